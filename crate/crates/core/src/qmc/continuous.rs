//! Continuous-time worldlines: per site, the spin at `τ = 0` and the sorted
//! times in `[0, β)` where it flips.
//!
//! The `P → ∞` limit of the Trotter path: unbroken τ-bonds are activated with
//! probability `1 - tanh(Γ dτ) → 1 - Γ dτ`, so cluster boundaries are the
//! existing walls plus Poisson cuts at rate `Γ`.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::models::SpinModel;
use crate::rng::SimRng;

use super::coupling::Coupling;
use super::{accept_cluster, is_reversed, Boundary, ClusterFlavor, SpinPath, SweepStats, UpdateScheme};

#[derive(Clone, Debug)]
pub struct ContinuousTimePath {
    size: usize,
    beta: f64,
    gamma: f64,
    boundary: Boundary,
    coupling: Coupling,
    initial: Vec<i8>,
    walls: Vec<Vec<f64>>,
    scratch: Scratch,
}

#[derive(Clone, Debug, Default)]
struct Scratch {
    events: Vec<(f64, i32)>,
    /// Piecewise-constant `φ(τ)`: breakpoints, values and running integral.
    knots: Vec<f64>,
    values: Vec<f64>,
    integral: Vec<f64>,
    cuts: Vec<f64>,
    /// Cluster boundaries along the worldline: `(time, is_wall)`.
    points: Vec<(f64, bool)>,
    /// `∫_0^t φ` at every boundary, then at `β`.
    point_integral: Vec<f64>,
    piece_spin: Vec<i8>,
    flip: Vec<bool>,
}

impl ContinuousTimePath {
    /// Constant worldlines with spin `sign` on every site.
    pub fn polarized(model: &SpinModel<f64>, beta: f64, boundary: Boundary, sign: i8) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::Input(format!("sign must be +1 or -1, got {sign}")));
        }
        Self::from_worldlines(model, beta, boundary, vec![sign; model.size()], vec![Vec::new(); model.size()])
    }

    pub fn from_worldlines(
        model: &SpinModel<f64>,
        beta: f64,
        boundary: Boundary,
        initial: Vec<i8>,
        walls: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Input(format!("β must be positive and finite, got {beta}")));
        }
        let l = model.size();
        if initial.len() != l || walls.len() != l {
            return Err(Error::Input(format!("expected {l} worldlines")));
        }
        if initial.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Input("spins must be +1 or -1".into()));
        }
        for w in &walls {
            if w.iter().any(|&t| !(0.0..beta).contains(&t)) || w.windows(2).any(|p| p[1] <= p[0]) {
                return Err(Error::Input("wall times must be strictly increasing in [0, β)".into()));
            }
            if boundary == Boundary::Periodic && w.len() % 2 == 1 {
                return Err(Error::Input("periodic worldlines need an even number of walls".into()));
            }
        }
        Ok(Self {
            size: l,
            beta,
            gamma: model.gamma(),
            boundary,
            coupling: Coupling::new(model)?,
            initial,
            walls,
            scratch: Scratch::default(),
        })
    }

    pub fn walls(&self, site: usize) -> &[f64] {
        &self.walls[site]
    }

    pub fn initial_spin(&self, site: usize) -> i8 {
        self.initial[site]
    }

    pub fn wall_count(&self) -> usize {
        self.walls.iter().map(Vec::len).sum()
    }

    pub fn spin_at(&self, site: usize, tau: f64) -> i8 {
        let n = self.walls[site].partition_point(|&t| t <= tau);
        if n % 2 == 0 {
            self.initial[site]
        } else {
            -self.initial[site]
        }
    }

    /// Appends the `(time, change)` events of a sum over `sites` and returns
    /// its value at `τ = 0`. The sum runs over spins, or over up spins when
    /// `count_up` is set.
    fn push_events(&self, sites: impl Iterator<Item = usize>, count_up: bool, events: &mut Vec<(f64, i32)>) -> i32 {
        let mut start = 0;
        for j in sites {
            let mut s = i32::from(self.initial[j]);
            start += if count_up { i32::from(s == 1) } else { s };
            for &t in &self.walls[j] {
                // s → -s: the spin sum moves by -2s, the up count by -s
                events.push((t, if count_up { -s } else { -2 * s }));
                s = -s;
            }
        }
        events.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        start
    }

    /// Builds `φ(τ)` for site `i` into the scratch buffers.
    fn build_field(&self, i: usize, scratch: &mut Scratch) {
        scratch.events.clear();
        let start = match &self.coupling {
            Coupling::Chain { neighbors, .. } => {
                self.push_events(neighbors[i].iter().copied(), false, &mut scratch.events)
            }
            Coupling::MeanField { .. } => {
                self.push_events((0..self.size).filter(|&j| j != i), true, &mut scratch.events)
            }
        };
        scratch.knots.clear();
        scratch.values.clear();
        scratch.integral.clear();
        let mut others = start;
        scratch.knots.push(0.0);
        scratch.values.push(self.coupling.flip_slope(others));
        scratch.integral.push(0.0);
        for &(t, d) in &scratch.events {
            others += d;
            let last = scratch.knots.len() - 1;
            if t == scratch.knots[last] {
                scratch.values[last] = self.coupling.flip_slope(others);
            } else {
                let acc = scratch.integral[last] + scratch.values[last] * (t - scratch.knots[last]);
                scratch.knots.push(t);
                scratch.values.push(self.coupling.flip_slope(others));
                scratch.integral.push(acc);
            }
        }
    }

    fn update_site(&mut self, i: usize, flavor: ClusterFlavor, rng: &mut SimRng, stats: &mut SweepStats) {
        let mut sc = std::mem::take(&mut self.scratch);
        self.build_field(i, &mut sc);

        // Poisson cuts at rate Γ
        sc.cuts.clear();
        let mut t = 0.0;
        loop {
            t += rng.sample::<f64, _>(Exp1) / self.gamma;
            if t >= self.beta {
                break;
            }
            sc.cuts.push(t);
        }
        // merge walls and cuts
        sc.points.clear();
        {
            let walls = &self.walls[i];
            let (mut a, mut b) = (0, 0);
            while a < walls.len() || b < sc.cuts.len() {
                if b == sc.cuts.len() || (a < walls.len() && walls[a] < sc.cuts[b]) {
                    sc.points.push((walls[a], true));
                    a += 1;
                } else {
                    sc.points.push((sc.cuts[b], false));
                    b += 1;
                }
            }
        }
        // field integral at every boundary in one pass over the knots
        sc.point_integral.clear();
        {
            let mut k = 0;
            let last = sc.knots.len() - 1;
            for x in sc.points.iter().map(|p| p.0).chain(std::iter::once(self.beta)) {
                while k < last && sc.knots[k + 1] <= x {
                    k += 1;
                }
                sc.point_integral.push(sc.integral[k] + sc.values[k] * (x - sc.knots[k]));
            }
        }
        let n = sc.points.len();
        // pieces [0, p0), [p0, p1), ..., [p_{n-1}, β)
        sc.piece_spin.clear();
        let mut s = self.initial[i];
        sc.piece_spin.push(s);
        for &(_, wall) in &sc.points {
            if wall {
                s = -s;
            }
            sc.piece_spin.push(s);
        }
        let mut flip = std::mem::take(&mut sc.flip);
        // in a periodic worldline the first and last pieces form one cluster
        let wrap = self.boundary == Boundary::Periodic && n > 0;
        let clusters = if wrap { n } else { n + 1 };
        // ∫ φ over piece k = [p_{k-1}, p_k)
        let piece = |k: usize| sc.point_integral[k] - if k == 0 { 0.0 } else { sc.point_integral[k - 1] };
        let cost = |c: usize| -> f64 {
            let sum = if wrap && c == 0 { piece(0) + piece(n) } else { piece(c) };
            f64::from(sc.piece_spin[c]) * sum
        };
        flip.clear();
        flip.resize(clusters, false);
        let mut decide = |c: usize, flip: &mut Vec<bool>, rng: &mut SimRng| {
            let ds = cost(c);
            stats.cluster_attempted += 1;
            if accept_cluster(flavor, ds, rng) {
                flip[c] = true;
                stats.cluster_accepted += 1;
            }
        };
        match flavor {
            ClusterFlavor::SwendsenWang => {
                for c in 0..clusters {
                    decide(c, &mut flip, rng);
                }
            }
            ClusterFlavor::Wolff => {
                let tau = rng.random::<f64>() * self.beta;
                let k = sc.points.partition_point(|p| p.0 <= tau);
                let c = if wrap && k == n { 0 } else { k };
                decide(c, &mut flip, rng);
            }
        }
        // rebuild the worldline
        let cluster_of = |k: usize| if wrap && k == n { 0 } else { k };
        let new_spin = |k: usize| {
            let s = sc.piece_spin[k];
            if flip[cluster_of(k)] {
                -s
            } else {
                s
            }
        };
        self.initial[i] = new_spin(0);
        let walls = &mut self.walls[i];
        walls.clear();
        for k in 0..n {
            if new_spin(k) != new_spin(k + 1) {
                walls.push(sc.points[k].0);
            }
        }
        sc.flip = flip;
        self.scratch = sc;
    }

    /// One worldline decomposition per site.
    pub fn sweep_cluster(&mut self, flavor: ClusterFlavor, rng: &mut SimRng) -> SweepStats {
        let mut stats = SweepStats::default();
        for i in 0..self.size {
            self.update_site(i, flavor, rng, &mut stats);
        }
        stats
    }

    /// `Σ_i s_i(0)` and the sorted changes of the total spin sum.
    fn total_events(&self) -> (i32, Vec<(f64, i32)>) {
        let mut events = Vec::with_capacity(self.wall_count());
        let start = self.push_events(0..self.size, false, &mut events);
        (start, events)
    }

    /// Visits the constant pieces of `m(τ)`: `(length, m)`.
    fn for_each_piece(&self, mut f: impl FnMut(f64, f64)) {
        let (mut total, events) = self.total_events();
        let l = self.size as f64;
        let mut last = 0.0;
        for (t, d) in events {
            f(t - last, f64::from(total) / l);
            total += d;
            last = t;
        }
        f(self.beta - last, f64::from(total) / l);
    }
}

impl SpinPath for ContinuousTimePath {
    fn size(&self) -> usize {
        self.size
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn boundary(&self) -> Boundary {
        self.boundary
    }

    fn sweep(&mut self, scheme: UpdateScheme, rng: &mut SimRng) -> Result<SweepStats> {
        match scheme.cluster_flavor() {
            Some(flavor) => Ok(self.sweep_cluster(flavor, rng)),
            None => Err(Error::Input("continuous-time paths only support cluster updates".into())),
        }
    }

    fn reversal_fraction(&self, threshold: f64) -> f64 {
        let mut reversed = 0.0;
        self.for_each_piece(|len, m| {
            if is_reversed(m, threshold) {
                reversed += len;
            }
        });
        (reversed / self.beta).min(1.0)
    }

    fn magnetization_profile(&self, bins: usize) -> Vec<f64> {
        let (mut total, events) = self.total_events();
        let l = self.size as f64;
        let mut k = 0;
        (0..bins)
            .map(|b| {
                let tau = (b as f64 + 0.5) / bins as f64 * self.beta;
                while k < events.len() && events[k].0 <= tau {
                    total += events[k].1;
                    k += 1;
                }
                f64::from(total) / l
            })
            .collect()
    }

    fn mean_m2(&self) -> f64 {
        let mut acc = 0.0;
        self.for_each_piece(|len, m| acc += len * m * m);
        acc / self.beta
    }

    /// `⟨σx⟩ = ⟨n_walls⟩ / (β Γ L)`.
    fn sigma_x_estimate(&self) -> f64 {
        self.wall_count() as f64 / (self.beta * self.gamma * self.size as f64)
    }
}
