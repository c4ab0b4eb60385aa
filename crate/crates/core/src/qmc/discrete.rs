//! Suzuki-Trotter path: `P` slices of `L` Ising spins.
//!
//! ```text
//! W(S) ∝ exp( k_τ Σ S_{i,τ} S_{i,τ+1} - (β/P) Σ_τ E(S_τ) ),   k_τ = ½ ln coth(Γβ/P)
//! ```
//!
//! With open boundaries the bond between slice `P` and slice 1 is omitted.

use rand::Rng;

use crate::error::{Error, Result};
use crate::models::SpinModel;
use crate::rng::SimRng;

use super::coupling::Coupling;
use super::{accept_cluster, is_reversed, Boundary, ClusterFlavor, SpinPath, SweepStats, UpdateScheme};

/// `k_τ = ½ ln coth(Γ Δτ)`.
pub fn trotter_coupling(gamma: f64, dtau: f64) -> f64 {
    -0.5 * (gamma * dtau).tanh().ln()
}

#[derive(Clone, Debug)]
pub struct DiscretePath {
    size: usize,
    slices: usize,
    beta: f64,
    gamma: f64,
    boundary: Boundary,
    dtau: f64,
    k_tau: f64,
    /// Bond activation probability `1 - e^{-2 k_τ}` of the cluster update.
    p_bond: f64,
    coupling: Coupling,
    /// Site-major: spin `(i, τ)` at `i * P + τ`.
    spins: Vec<i8>,
    /// `Σ_i S_{i,τ}` per slice.
    mag: Vec<i32>,
    active: Vec<bool>,
}

impl DiscretePath {
    /// Every spin on every slice set to `sign`.
    pub fn polarized(model: &SpinModel<f64>, beta: f64, slices: usize, boundary: Boundary, sign: i8) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::Input(format!("sign must be +1 or -1, got {sign}")));
        }
        let spins = vec![sign; model.size() * slices.max(1)];
        Self::from_spins(model, beta, slices, boundary, spins)
    }

    /// Path from site-major spins (`spins[i * P + τ]`).
    pub fn from_spins(
        model: &SpinModel<f64>,
        beta: f64,
        slices: usize,
        boundary: Boundary,
        spins: Vec<i8>,
    ) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Input(format!("β must be positive and finite, got {beta}")));
        }
        if slices == 0 {
            return Err(Error::Input("need at least one Trotter slice".into()));
        }
        let l = model.size();
        if spins.len() != l * slices {
            return Err(Error::Input(format!("expected {} spins, got {}", l * slices, spins.len())));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Input("spins must be +1 or -1".into()));
        }
        let coupling = Coupling::new(model)?;
        let dtau = beta / slices as f64;
        let k_tau = trotter_coupling(model.gamma(), dtau);
        if !(k_tau > 0.0) || !k_tau.is_finite() {
            return Err(Error::Input(format!(
                "Γβ/P = {} gives an unusable imaginary-time coupling",
                model.gamma() * dtau
            )));
        }
        let mut mag = vec![0i32; slices];
        for i in 0..l {
            for (t, m) in mag.iter_mut().enumerate() {
                *m += i32::from(spins[i * slices + t]);
            }
        }
        Ok(Self {
            size: l,
            slices,
            beta,
            gamma: model.gamma(),
            boundary,
            dtau,
            k_tau,
            p_bond: -(-2.0 * k_tau).exp_m1(),
            coupling,
            spins,
            mag,
            active: vec![false; slices],
        })
    }

    pub fn slices(&self) -> usize {
        self.slices
    }

    pub fn k_tau(&self) -> f64 {
        self.k_tau
    }

    /// Spatial coupling scale `β/P`.
    pub fn k_space_scale(&self) -> f64 {
        self.dtau
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn spin(&self, site: usize, slice: usize) -> i8 {
        self.spins[site * self.slices + slice]
    }

    pub fn slice_magnetization(&self, slice: usize) -> f64 {
        f64::from(self.mag[slice]) / self.size as f64
    }

    /// `ln W` up to the configuration-independent constant.
    pub fn log_weight(&self) -> f64 {
        let p = self.slices;
        let mut bonds = 0i64;
        for i in 0..self.size {
            let w = &self.spins[i * p..(i + 1) * p];
            for t in 0..self.tau_bonds() {
                bonds += i64::from(w[t]) * i64::from(w[(t + 1) % p]);
            }
        }
        let mut energy = 0.0;
        let mut slice = vec![0i8; self.size];
        for t in 0..p {
            for (i, s) in slice.iter_mut().enumerate() {
                *s = self.spins[i * p + t];
            }
            energy += self.slice_energy(&slice);
        }
        self.k_tau * bonds as f64 - self.dtau * energy
    }

    fn slice_energy(&self, slice: &[i8]) -> f64 {
        match &self.coupling {
            Coupling::Chain { neighbors, h } => {
                let mut e = 0.0;
                for (i, nb) in neighbors.iter().enumerate() {
                    for &j in nb {
                        if j > i {
                            e -= f64::from(slice[i]) * f64::from(slice[j]);
                        }
                    }
                    e -= h * f64::from(slice[i]);
                }
                e
            }
            Coupling::MeanField { energy } => {
                let up = slice.iter().filter(|&&s| s == 1).count();
                energy[up]
            }
        }
    }

    /// Number of τ-bonds per worldline: bond `t` joins `t` and `t + 1 mod P`.
    fn tau_bonds(&self) -> usize {
        match (self.boundary, self.slices) {
            (_, 1) => 0,
            (Boundary::Periodic, p) => p,
            (Boundary::Open, p) => p - 1,
        }
    }

    /// `φ` of [`Coupling::flip_slope`] for site `i` on slice `t` holding spin `s`.
    #[inline]
    fn slope(&self, i: usize, t: usize, s: i8) -> f64 {
        let others = match &self.coupling {
            Coupling::Chain { neighbors, .. } => neighbors[i]
                .iter()
                .map(|&j| i32::from(self.spins[j * self.slices + t]))
                .sum(),
            Coupling::MeanField { .. } => (self.mag[t] - i32::from(s) + self.size as i32 - 1) / 2,
        };
        self.coupling.flip_slope(others)
    }

    /// Sum of the τ-neighbors of `(i, t)` that are joined to it by a bond.
    #[inline]
    fn tau_field(&self, i: usize, t: usize) -> i32 {
        let p = self.slices;
        let w = &self.spins[i * p..(i + 1) * p];
        match self.boundary {
            Boundary::Periodic => {
                if p == 1 {
                    0
                } else {
                    i32::from(w[(t + p - 1) % p]) + i32::from(w[(t + 1) % p])
                }
            }
            Boundary::Open => {
                let prev = if t > 0 { i32::from(w[t - 1]) } else { 0 };
                let next = if t + 1 < p { i32::from(w[t + 1]) } else { 0 };
                prev + next
            }
        }
    }

    fn flip(&mut self, i: usize, t: usize) {
        let idx = i * self.slices + t;
        let s = self.spins[idx];
        self.spins[idx] = -s;
        self.mag[t] -= 2 * i32::from(s);
    }

    /// `L·P` single-spin Metropolis attempts in site-major order.
    pub fn sweep_local(&mut self, rng: &mut SimRng) -> SweepStats {
        let mut stats = SweepStats::default();
        for i in 0..self.size {
            for t in 0..self.slices {
                let s = self.spins[i * self.slices + t];
                let sf = f64::from(s);
                let ds = 2.0 * self.k_tau * sf * f64::from(self.tau_field(i, t)) + self.dtau * sf * self.slope(i, t, s);
                stats.local_attempted += 1;
                if ds <= 0.0 || rng.random::<f64>() < (-ds).exp() {
                    self.flip(i, t);
                    stats.local_accepted += 1;
                }
            }
        }
        stats
    }

    /// Change of the action if the slices `start, start+1, ...` (`len` of
    /// them, cyclic) of worldline `i`, all holding spin `s`, were flipped.
    fn segment_cost(&self, i: usize, start: usize, len: usize, s: i8) -> f64 {
        let mut sum = 0.0;
        for k in 0..len {
            let t = (start + k) % self.slices;
            sum += self.slope(i, t, s);
        }
        self.dtau * f64::from(s) * sum
    }

    fn flip_segment(&mut self, i: usize, start: usize, len: usize) {
        for k in 0..len {
            let t = (start + k) % self.slices;
            self.flip(i, t);
        }
    }

    /// One worldline decomposition per site followed by Metropolis flips of
    /// its clusters against the spatial couplings.
    pub fn sweep_cluster(&mut self, flavor: ClusterFlavor, rng: &mut SimRng) -> SweepStats {
        let mut stats = SweepStats::default();
        for i in 0..self.size {
            match flavor {
                ClusterFlavor::SwendsenWang => self.swendsen_wang_site(i, rng, &mut stats),
                ClusterFlavor::Wolff => self.wolff_site(i, rng, &mut stats),
            }
        }
        stats
    }

    fn try_flip(
        &mut self,
        flavor: ClusterFlavor,
        (i, start, len): (usize, usize, usize),
        rng: &mut SimRng,
        stats: &mut SweepStats,
    ) {
        let s = self.spins[i * self.slices + start];
        let ds = self.segment_cost(i, start, len, s);
        stats.cluster_attempted += 1;
        if accept_cluster(flavor, ds, rng) {
            self.flip_segment(i, start, len);
            stats.cluster_accepted += 1;
        }
    }

    fn swendsen_wang_site(&mut self, i: usize, rng: &mut SimRng, stats: &mut SweepStats) {
        let p = self.slices;
        let nb = self.tau_bonds();
        let mut active = std::mem::take(&mut self.active);
        {
            let w = &self.spins[i * p..(i + 1) * p];
            for (t, a) in active.iter_mut().enumerate() {
                *a = t < nb && w[t] == w[(t + 1) % p] && rng.random::<f64>() < self.p_bond;
            }
        }
        // clusters: maximal runs of active bonds
        let mut segments: Vec<(usize, usize)> = Vec::new();
        match self.boundary {
            Boundary::Periodic if nb > 0 => match (0..p).find(|&t| !active[t]) {
                None => segments.push((0, p)),
                Some(cut) => {
                    let start = (cut + 1) % p;
                    let mut seg_start = start;
                    let mut len = 0;
                    for step in 0..p {
                        let t = (start + step) % p;
                        len += 1;
                        if !active[t] {
                            segments.push((seg_start, len));
                            seg_start = (t + 1) % p;
                            len = 0;
                        }
                    }
                }
            },
            _ => {
                let mut seg_start = 0;
                for t in 0..p {
                    if t + 1 == p || !active[t] {
                        segments.push((seg_start, t + 1 - seg_start));
                        seg_start = t + 1;
                    }
                }
            }
        }
        self.active = active;
        // clusters occupy disjoint slices, so each decision sees the others'
        // final state only through other sites, which are frozen
        for (start, len) in segments {
            self.try_flip(ClusterFlavor::SwendsenWang, (i, start, len), rng, stats);
        }
    }

    fn wolff_site(&mut self, i: usize, rng: &mut SimRng, stats: &mut SweepStats) {
        let p = self.slices;
        let nb = self.tau_bonds();
        let t0 = rng.random_range(0..p);
        let w = &self.spins[i * p..(i + 1) * p];
        let s = w[t0];
        let bond = |t: usize, rng: &mut SimRng| -> bool {
            t < nb && w[(t + 1) % p] == s && w[t] == s && rng.random::<f64>() < self.p_bond
        };
        // forward from t0
        let mut forward = 0;
        while forward + 1 < p && bond((t0 + forward) % p, rng) {
            forward += 1;
        }
        // backward from t0
        let mut backward = 0;
        while forward + backward + 1 < p {
            let t = (t0 + p - backward - 1) % p;
            if !bond(t, rng) {
                break;
            }
            backward += 1;
        }
        let start = (t0 + p - backward) % p;
        self.try_flip(ClusterFlavor::Wolff, (i, start, forward + backward + 1), rng, stats);
    }
}

impl SpinPath for DiscretePath {
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
        Ok(match scheme.cluster_flavor() {
            None => self.sweep_local(rng),
            Some(flavor) => self.sweep_cluster(flavor, rng),
        })
    }

    fn reversal_fraction(&self, threshold: f64) -> f64 {
        let l = self.size as f64;
        let reversed = self
            .mag
            .iter()
            .filter(|&&m| is_reversed(f64::from(m) / l, threshold))
            .count();
        reversed as f64 / self.slices as f64
    }

    fn magnetization_profile(&self, bins: usize) -> Vec<f64> {
        (0..bins)
            .map(|b| {
                let t = (((b as f64 + 0.5) / bins as f64) * self.slices as f64) as usize;
                self.slice_magnetization(t.min(self.slices - 1))
            })
            .collect()
    }

    fn mean_m2(&self) -> f64 {
        let l = self.size as f64;
        self.mag.iter().map(|&m| (f64::from(m) / l).powi(2)).sum::<f64>() / self.slices as f64
    }

    /// Average over τ-bonds of `tanh(ΓΔτ)` (aligned) or `coth(ΓΔτ)` (broken).
    fn sigma_x_estimate(&self) -> f64 {
        let nb = self.tau_bonds();
        if nb == 0 {
            return f64::NAN;
        }
        let p = self.slices;
        let th = (self.gamma * self.dtau).tanh();
        let mut broken = 0usize;
        for i in 0..self.size {
            let w = &self.spins[i * p..(i + 1) * p];
            broken += (0..nb).filter(|&t| w[t] != w[(t + 1) % p]).count();
        }
        let total = nb * self.size;
        ((total - broken) as f64 * th + broken as f64 / th) / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn chain(l: usize, gamma: f64) -> SpinModel<f64> {
        SpinModel::chain(l, gamma).unwrap()
    }

    #[test]
    fn polarized_start() {
        let up = DiscretePath::polarized(&chain(4, 0.5), 2.0, 8, Boundary::Periodic, 1).unwrap();
        assert!(up.magnetization_profile(5).iter().all(|&m| m == 1.0));
        assert_eq!(up.reversal_fraction(0.5), 0.0);
        let down = DiscretePath::polarized(&chain(4, 0.5), 2.0, 8, Boundary::Periodic, -1).unwrap();
        assert_eq!(down.reversal_fraction(0.5), 1.0);
        assert!(DiscretePath::polarized(&chain(4, 0.5), 2.0, 8, Boundary::Periodic, 0).is_err());
    }

    #[test]
    fn trotter_coupling_values() {
        // coth(x) = e^{2k}
        let k = trotter_coupling(0.7, 0.25);
        assert!(((2.0 * k).exp() - 1.0 / (0.175f64).tanh()).abs() < 1e-12);
        assert!(trotter_coupling(1.0, 1e-3) > 3.0);
    }

    #[test]
    fn half_reversed_slices() {
        let model = chain(4, 0.5);
        let p = 8;
        let spins: Vec<i8> = (0..4 * p).map(|k| if k % p < p / 2 { -1 } else { 1 }).collect();
        let path = DiscretePath::from_spins(&model, 2.0, p, Boundary::Periodic, spins).unwrap();
        assert_eq!(path.reversal_fraction(0.5), 0.5);
        let prof = path.magnetization_profile(2);
        assert_eq!(prof, vec![-1.0, 1.0]);
    }

    #[test]
    fn local_moves_keep_log_weight_consistent() {
        // accepted moves must match the change predicted from the full action
        let model = SpinModel::fully_connected(5, 0.6).unwrap();
        let mut path = DiscretePath::polarized(&model, 3.0, 6, Boundary::Open, 1).unwrap();
        let mut rng = rng_from_seed(3);
        for _ in 0..50 {
            path.sweep_local(&mut rng);
            path.sweep_cluster(ClusterFlavor::SwendsenWang, &mut rng);
            path.sweep_cluster(ClusterFlavor::Wolff, &mut rng);
            let mags: Vec<i32> = (0..6)
                .map(|t| (0..5).map(|i| i32::from(path.spin(i, t))).sum())
                .collect();
            assert_eq!(mags, path.mag);
        }
        let i = 2;
        let t = 3;
        let before = path.log_weight();
        let s = path.spin(i, t);
        let predicted = 2.0 * path.k_tau * f64::from(s) * f64::from(path.tau_field(i, t))
            + path.dtau * f64::from(s) * path.slope(i, t, s);
        path.flip(i, t);
        assert!((before - path.log_weight() - predicted).abs() < 1e-12);
    }

    #[test]
    fn zero_cost_flip_is_always_accepted() {
        // open chain of two sites, middle slice: τ-neighbors +1 and -1 cancel
        // and the spatial neighbor field is zero at h = 0 on a single site
        let model = SpinModel::chain(1, 0.5).unwrap();
        let spins = vec![1, 1, -1];
        let mut path = DiscretePath::from_spins(&model, 1.0, 3, Boundary::Open, spins).unwrap();
        let mut rng = rng_from_seed(9);
        let s = path.spin(0, 1);
        let ds = 2.0 * path.k_tau * f64::from(s) * f64::from(path.tau_field(0, 1)) + path.dtau * path.slope(0, 1, s);
        assert_eq!(ds, 0.0);
        let stats = path.sweep_local(&mut rng);
        assert!(stats.local_accepted >= 1);
    }

    #[test]
    fn cluster_flip_creates_two_walls() {
        let model = chain(3, 0.4);
        let mut path = DiscretePath::polarized(&model, 4.0, 32, Boundary::Periodic, 1).unwrap();
        path.flip_segment(1, 5, 7);
        let w: Vec<i8> = (0..32).map(|t| path.spin(1, t)).collect();
        let walls = (0..32).filter(|&t| w[t] != w[(t + 1) % 32]).count();
        assert_eq!(walls, 2);
    }

    #[test]
    fn wrong_shapes_are_rejected() {
        let model = chain(2, 0.5);
        assert!(DiscretePath::from_spins(&model, 1.0, 2, Boundary::Open, vec![1; 3]).is_err());
        assert!(DiscretePath::from_spins(&model, 1.0, 2, Boundary::Open, vec![1, 1, 0, 1]).is_err());
        assert!(DiscretePath::polarized(&model, 0.0, 2, Boundary::Open, 1).is_err());
        let classical = SpinModel::chain(2, 0.0).unwrap();
        assert!(DiscretePath::polarized(&classical, 1.0, 2, Boundary::Open, 1).is_err());
    }
}
