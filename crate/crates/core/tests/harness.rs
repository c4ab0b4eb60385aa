use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use qmctunnel::harness::{
    fit_exponential, measure_first_passage, run_first_passage, summarize, Bootstrap, Engine, FitPoint, FitResult,
    ReversalCriterion, RunSpec, SpinRun,
};
use qmctunnel::rng::rng_from_seed;
use qmctunnel::SpinModel;

fn spin_spec(engine: Engine, model: SpinModel<f64>, beta: f64) -> RunSpec {
    RunSpec::Spin(SpinRun::new(engine, model, beta).unwrap())
}

fn size_fit(engine: Engine, gamma: f64, beta: f64, sizes: &[usize], fraction: f64, runs: usize) -> FitResult {
    let points: Vec<FitPoint> = sizes
        .iter()
        .map(|&l| {
            let mut run = SpinRun::new(engine, SpinModel::fully_connected(l, gamma).unwrap(), beta).unwrap();
            run.criterion = ReversalCriterion {
                threshold: 0.5,
                fraction,
            };
            let records = measure_first_passage(&RunSpec::Spin(run), runs, 100_000_000, 90 + l as u64).unwrap();
            FitPoint::from_records(l as f64, &records).unwrap()
        })
        .collect();
    fit_exponential(&points, None, Some(Bootstrap::default())).unwrap()
}

#[test]
fn reversed_start_never_tunnels() {
    for engine in [Engine::PimcContinuous, Engine::PigsContinuous, Engine::PimcDiscrete, Engine::PigsDiscrete] {
        let mut run = SpinRun::new(engine, SpinModel::chain(8, 0.7).unwrap(), 8.0).unwrap();
        run.slices = 32;
        run.start_sign = -1;
        let records = measure_first_passage(&RunSpec::Spin(run), 16, 1000, 1).unwrap();
        assert!(records.iter().all(|r| r.sweeps_to_reversal == 0 && !r.censored), "{engine}");
    }
}

#[test]
fn runs_are_reproducible_from_their_seed() {
    let spec = spin_spec(Engine::PimcContinuous, SpinModel::chain(6, 0.8).unwrap(), 6.0);
    let all = measure_first_passage(&spec, 8, 1_000_000, 17).unwrap();
    assert_eq!(all, measure_first_passage(&spec, 8, 1_000_000, 17).unwrap());
    for r in &all {
        assert_eq!(*r, run_first_passage(&spec, r.run, 17, 1_000_000).unwrap());
    }
    assert_ne!(all, measure_first_passage(&spec, 8, 1_000_000, 18).unwrap());
}

#[test]
fn tunneling_time_grows_with_size() {
    let means: Vec<f64> = [6, 8, 10]
        .iter()
        .map(|&l| {
            let spec = spin_spec(Engine::PimcContinuous, SpinModel::chain(l, 0.8).unwrap(), 16.0);
            let s = summarize(&measure_first_passage(&spec, 64, 100_000_000, 5).unwrap());
            assert_eq!(s.censored, 0);
            s.mean
        })
        .collect();
    assert!(means.windows(2).all(|w| w[1] > w[0]), "{means:?}");
}

/// The exponent should not hinge on how much of imaginary time must reverse.
/// At these sizes it does: fully connected Γ=0.6, β=8, L=10..16 gives
/// 0.432, 0.480 and 0.398 (±0.014) for fractions 1, 0.25 and 0.02.
#[test]
#[ignore = "fails: the fitted exponent shifts with the reversed fraction at L ≤ 16"]
fn exponent_is_robust_to_the_reversed_fraction() {
    let sizes = [10, 12, 14, 16];
    let fits: Vec<(f64, FitResult)> = [1.0, 0.25, 0.02]
        .into_iter()
        .map(|f| (f, size_fit(Engine::PimcContinuous, 0.6, 8.0, &sizes, f, 200)))
        .collect();
    for (f, fit) in &fits {
        eprintln!("fraction {f}: {} ± {}", fit.slope, fit.slope_stderr);
    }
    for (f, fit) in &fits[1..] {
        let (_, all) = &fits[0];
        let z = (fit.slope - all.slope).abs() / fit.slope_stderr.hypot(all.slope_stderr);
        assert!(z <= 2.0, "fraction {f}: {} ± {} vs {} ± {}", fit.slope, fit.slope_stderr, all.slope, all.slope_stderr);
    }
}

/// Synthetic exponential data with Gaussian scatter: both error estimates
/// describe the same spread.
#[test]
fn bootstrap_and_analytic_errors_agree() {
    let mut rng = rng_from_seed(11);
    for case in 0..20 {
        let slope = rng.random_range(0.2..1.0);
        let points: Vec<FitPoint> = (0..5)
            .map(|i| {
                let x = 8.0 + 2.0 * i as f64;
                let mean = 3.0 * f64::exp(slope * x);
                let noise = Normal::new(mean, 0.3 * mean).unwrap();
                let samples: Vec<f64> = (0..200).map(|_| noise.sample(&mut rng)).collect();
                let (m, e) = qmctunnel::harness::mean_stderr(&samples);
                FitPoint {
                    x,
                    mean: m,
                    stderr: e,
                    samples: Some(samples),
                }
            })
            .collect();
        let bs = Bootstrap {
            resamples: 500,
            seed: case,
        };
        let fit = fit_exponential(&points, None, Some(bs)).unwrap();
        let ratio = fit.slope_stderr / fit.analytic_slope_stderr;
        assert!((0.5..=2.0).contains(&ratio), "case {case}: ratio {ratio}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Raising the budget only turns censored runs into longer uncensored
    /// ones, so the mean over uncensored runs cannot drop.
    #[test]
    fn larger_budget_never_lowers_the_mean(seed in 0u64..1000, b1 in 20u64..400, extra in 1u64..2000) {
        let spec = spin_spec(Engine::PimcContinuous, SpinModel::chain(8, 0.7).unwrap(), 8.0);
        let short = measure_first_passage(&spec, 24, b1, seed).unwrap();
        let long = measure_first_passage(&spec, 24, b1 + extra, seed).unwrap();
        let (s, l) = (summarize(&short), summarize(&long));
        prop_assert!(l.censored <= s.censored);
        if s.censored < s.runs {
            prop_assert!(l.mean >= s.mean);
        }
        for (a, b) in short.iter().zip(&long) {
            if !a.censored {
                prop_assert_eq!(a.sweeps_to_reversal, b.sweeps_to_reversal);
            } else {
                prop_assert!(b.sweeps_to_reversal >= a.sweeps_to_reversal);
            }
        }
    }

    #[test]
    fn censored_runs_report_the_budget(seed in 0u64..1000, budget in 1u64..50) {
        let spec = spin_spec(Engine::PigsContinuous, SpinModel::chain(10, 0.6).unwrap(), 8.0);
        for r in measure_first_passage(&spec, 8, budget, seed).unwrap() {
            prop_assert!(r.sweeps_to_reversal <= budget);
            if r.censored {
                prop_assert_eq!(r.sweeps_to_reversal, budget);
            }
        }
    }
}
