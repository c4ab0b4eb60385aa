//! Texts of `list` and `describe`.

use crate::config::Kind;

pub fn summary(kind: Kind) -> &'static str {
    match kind {
        Kind::EdGap => "exact tunneling splitting of a spin model or the quartic double well",
        Kind::Wkb => "instanton action and trajectory of a mean-field model",
        Kind::PimcSpin => "first-passage times of thermal (periodic) path-integral Monte Carlo",
        Kind::PigsSpin => "first-passage times of ground-state (open-ended) path-integral Monte Carlo",
        Kind::PimcWell => "first-passage times of a double-well ring polymer under local Metropolis moves",
        Kind::PimdWell => "first-passage times of a double-well ring polymer under Langevin dynamics",
        Kind::TempScan => "tunneling time against inverse temperature at several sizes",
        Kind::SizeScan => "tunneling time against system size with an exponential fit and exact comparison",
        Kind::Fit => "exponential fit of ln ξ over the records of an earlier run",
        Kind::Compare => "fitted exponent against the exact splitting exponent within 3σ",
    }
}

pub fn describe(kind: Kind) -> String {
    let body = match kind {
        Kind::EdGap => {
            "Diagonalizes H = -Σ J σz σz - Γ Σ σx (dense, Krylov or the permutation-symmetric sector) and \
reports the lowest levels and Δ = E1 - E0 per size. With three or more sizes it also fits the \
exponents of 1/Δ and 1/Δ² against L, the reference for QMC scaling. With topology double-well it \
solves the Schrödinger equation of V = λx⁴ - x² on a refined grid for each λ.

  [model] topology = chain | open-chain | fully-connected | double-well
          sizes = 12 | [12, 14] | \"12..16\"   gamma   h = 0
          lambda = 0.1 | [...]   mass = 0.5   (double well)"
        }
        Kind::Wkb => {
            "Integrates the WKB action a = ∫ k dm between the turning points of the spin-coherent-state \
potential at the energy of the metastable minimum, and the instanton m*(s). For the \
unbiased Curie-Weiss model it checks the splitting exponent a/2 (Δ ∝ e^(-La/2)) against the \
closed form c(Γ) of the large-L splitting Δ ≈ b e^(-cL). The trajectory is written to trajectory.csv.

  [model] potential = curie-weiss | grover   gamma   h = 0   ell = 1"
        }
        Kind::PimcSpin => {
            "Starts every run fully polarized at m = +1 and counts sweeps until a quarter of imaginary time \
has m(τ) <= -0.5. With periodic paths the tunneling time scales as 1/Δ², like incoherent tunneling.

  [model]  topology   sizes   gamma   h
  [engine] name = pimc-ct (alias pimc) | pimc-discrete   beta   slices = 128 (discrete)
           scheme = swendsen-wang | wolff | local (discrete)   threshold = 0.5   fraction = 0.25
           budget = 100000000   runs = 200"
        }
        Kind::PigsSpin => {
            "Same protocol with open imaginary-time ends. Open paths let the wall enter from a boundary, so \
the tunneling time scales as 1/Δ rather than 1/Δ².

  [model]  topology   sizes   gamma   h
  [engine] name = pigs-ct (alias pigs) | pigs-discrete   beta   slices   scheme   threshold
           fraction   budget   runs"
        }
        Kind::PimcWell => {
            "Ring polymer of P beads in V = λx⁴ - x² (mass 1/2) started in the right well; a run ends when a \
quarter of the beads sit below -x_min/2. Single-bead Metropolis with a step tuned on a pilot copy. With \
three or more λ values ln ξ is fitted against ln(1/Δ²), Δ from the grid solver; the slope is near 1.

  [model]  lambda = [0.1, 0.125, 0.15, 0.2]   mass = 0.5
  [engine] temperature   slices = 64 (beads)   step (tuned when absent)   target_acceptance = 0.5
           threshold   fraction   budget   runs"
        }
        Kind::PimdWell => {
            "As pimc-well, with the ring polymer evolved by Langevin dynamics. Each integration step of all \
beads counts as one unit of time.

  [model]  lambda   mass
  [engine] temperature   slices   delta = 0.25   friction = 0.7   threshold   fraction   budget   runs"
        }
        Kind::TempScan => {
            "First-passage times on the grid of sizes × β values. At high temperature ξ is independent of L \
and grows as exp(E_barrier β) (thermal activation, E_barrier = 4 for the chain); at low temperature it \
saturates to a β-independent, L-dependent plateau set by quantum tunneling. Reports Arrhenius fits per \
size and the z-score spreads of both regimes.

  [model]  topology   sizes   gamma
  [engine] name   scheme   threshold   fraction   budget   runs
  [scan]   betas = [0.5, 1, 2, 4, 8, 16]   high_t_window   low_t_window"
        }
        Kind::SizeScan => {
            "First-passage times for each size at fixed β, fitted as ξ = a e^(bL) by weighted least squares \
with bootstrap errors, and compared with the exact exponent: 2× that of 1/Δ for periodic engines, 1× for \
open ones.

  [model]   topology   sizes = \"12..16\"   gamma
  [engine]  name   beta   ...
  [fit]     window = [12, 16] (periodic) | [12, 18] (open)   bootstrap = 1000
  [compare] mode   gap_exponent (computed when absent)"
        }
        Kind::Fit => {
            "Reads the records.csv of an earlier experiment, regroups the runs by the chosen abscissa and \
fits ln ξ linearly.

  [fit] records = path   x = size | beta | gap   window   bootstrap = 1000"
        }
        Kind::Compare => {
            "Compares a QMC exponent, fitted from records or given directly, with the exact exponent of \
1/Δ² (mode squared) or 1/Δ (mode linear). Passes within 3 combined standard errors.

  [fit]     records   window   bootstrap
  [compare] mode = squared | linear   exponent = [value, stderr]   gap_exponent = [value, stderr]
  [model]   topology   sizes   gamma   (when the exact exponent is computed from scratch)"
        }
    };
    format!("{}: {}\n\n{}\n", kind.name(), summary(kind), body)
}
