//! Hamiltonians and potentials.
//!
//! Spin models are stored as a topology plus a handful of parameters; couplings
//! are never materialized as an `L x L` matrix. The quantum Hamiltonian is
//!
//! ```text
//! H = -Γ Σ_i σx_i - Σ_<ij> J_ij σz_i σz_j - h Σ_i σz_i
//! ```
//!
//! with `J = 1` on chain bonds and, for permutation-symmetric models, the
//! diagonal part written as `-L g(m)` with `m = (1/L) Σ σz`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Mean-field potential `g(m)` of a permutation-symmetric spin model.
pub trait MeanField<T: Real>: Send + Sync {
    fn value(&self, m: T) -> T;

    fn derivative(&self, m: T) -> T;

    /// End point of the tunneling path for potentials with a point term at the
    /// edge of the magnetization range (the Grover oracle).
    fn terminal_point(&self) -> Option<T> {
        None
    }

    /// `g(m) == g(-m)` for every `m`.
    fn is_even(&self) -> bool {
        false
    }

    /// `Some(h)` when `g(m) = m²/2 + h m`, which has closed-form landscape
    /// results.
    fn curie_weiss_field(&self) -> Option<T> {
        None
    }

    fn name(&self) -> String;
}

/// Curie-Weiss potential `g(m) = m²/2 + h m`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurieWeiss<T> {
    pub h: T,
}

impl<T: Real> MeanField<T> for CurieWeiss<T> {
    fn value(&self, m: T) -> T {
        T::cst(0.5) * m * m + self.h * m
    }

    fn derivative(&self, m: T) -> T {
        m + self.h
    }

    fn is_even(&self) -> bool {
        self.h == T::zero()
    }

    fn curie_weiss_field(&self) -> Option<T> {
        Some(self.h)
    }

    fn name(&self) -> String {
        format!("curie-weiss(h={})", self.h)
    }
}

/// Grover oracle: `g(m) = 1` at `m = 1` and zero elsewhere.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Grover;

impl<T: Real> MeanField<T> for Grover {
    fn value(&self, m: T) -> T {
        if m >= T::one() - T::cst(1e-12) {
            T::one()
        } else {
            T::zero()
        }
    }

    fn derivative(&self, _m: T) -> T {
        T::zero()
    }

    fn terminal_point(&self) -> Option<T> {
        Some(T::one())
    }

    fn name(&self) -> String {
        "grover".to_string()
    }
}

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// User supplied smooth `g(m)` with its derivative.
#[derive(Clone)]
pub struct CustomMeanField<T> {
    value: ScalarFn<T>,
    derivative: ScalarFn<T>,
    even: bool,
    label: String,
}

impl<T: Real> CustomMeanField<T> {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(T) -> T + Send + Sync + 'static,
        derivative: impl Fn(T) -> T + Send + Sync + 'static,
        even: bool,
    ) -> Self {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            even,
            label: label.into(),
        }
    }
}

impl<T: Real> MeanField<T> for CustomMeanField<T> {
    fn value(&self, m: T) -> T {
        (self.value)(m)
    }

    fn derivative(&self, m: T) -> T {
        (self.derivative)(m)
    }

    fn is_even(&self) -> bool {
        self.even
    }

    fn name(&self) -> String {
        self.label.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Nearest-neighbor ferromagnetic chain, `J = 1` per bond.
    Chain,
    /// All-to-all couplings `J_ij = 1/(2L)`, i.e. `g(m) = m²/2 + h m`.
    FullyConnected,
    /// Permutation-symmetric model with an arbitrary `g(m)`.
    MeanFieldPSpin,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Chain => "chain",
            Topology::FullyConnected => "fully-connected",
            Topology::MeanFieldPSpin => "mean-field",
        })
    }
}

/// Transverse-field Ising model. Immutable once built.
#[derive(Clone)]
pub struct SpinModel<T: Real> {
    topology: Topology,
    size: usize,
    gamma: T,
    h: T,
    periodic: bool,
    potential: Arc<dyn MeanField<T>>,
}

impl<T: Real> fmt::Debug for SpinModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpinModel")
            .field("topology", &self.topology)
            .field("size", &self.size)
            .field("gamma", &self.gamma)
            .field("h", &self.h)
            .field("periodic", &self.periodic)
            .field("potential", &self.potential.name())
            .finish()
    }
}

fn check_common<T: Real>(size: usize, gamma: T) -> Result<()> {
    if size == 0 {
        return Err(Error::Input("number of spins must be at least 1".into()));
    }
    if !(gamma >= T::zero()) || !gamma.is_finite() {
        return Err(Error::Input(format!("transverse field must be finite and >= 0, got {gamma}")));
    }
    Ok(())
}

impl<T: Real> SpinModel<T> {
    /// Ring of `size` spins (periodic spatial boundary).
    pub fn chain(size: usize, gamma: T) -> Result<Self> {
        check_common(size, gamma)?;
        Ok(Self {
            topology: Topology::Chain,
            size,
            gamma,
            h: T::zero(),
            periodic: true,
            potential: Arc::new(CurieWeiss { h: T::zero() }),
        })
    }

    /// Chain without the bond between the last and the first spin.
    pub fn open_chain(size: usize, gamma: T) -> Result<Self> {
        Ok(Self {
            periodic: false,
            ..Self::chain(size, gamma)?
        })
    }

    pub fn fully_connected(size: usize, gamma: T) -> Result<Self> {
        check_common(size, gamma)?;
        Ok(Self {
            topology: Topology::FullyConnected,
            size,
            gamma,
            h: T::zero(),
            periodic: false,
            potential: Arc::new(CurieWeiss { h: T::zero() }),
        })
    }

    pub fn mean_field(size: usize, gamma: T, potential: Arc<dyn MeanField<T>>) -> Result<Self> {
        check_common(size, gamma)?;
        Ok(Self {
            topology: Topology::MeanFieldPSpin,
            size,
            gamma,
            h: T::zero(),
            periodic: false,
            potential,
        })
    }

    /// Returns a copy with longitudinal field `h`.
    ///
    /// Not available for [`Topology::MeanFieldPSpin`], whose field lives in `g`.
    pub fn with_field(&self, h: T) -> Result<Self> {
        if !h.is_finite() {
            return Err(Error::Input("longitudinal field must be finite".into()));
        }
        let potential: Arc<dyn MeanField<T>> = match self.topology {
            Topology::MeanFieldPSpin => {
                return Err(Error::Input("mean-field models carry their field inside g(m)".into()))
            }
            _ => Arc::new(CurieWeiss { h }),
        };
        Ok(Self {
            h,
            potential,
            ..self.clone()
        })
    }

    pub fn with_gamma(&self, gamma: T) -> Result<Self> {
        check_common(self.size, gamma)?;
        Ok(Self {
            gamma,
            ..self.clone()
        })
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn potential(&self) -> &Arc<dyn MeanField<T>> {
        &self.potential
    }

    pub fn is_permutation_symmetric(&self) -> bool {
        self.topology != Topology::Chain
    }

    /// Symmetric under a global spin flip.
    pub fn is_flip_symmetric(&self) -> bool {
        match self.topology {
            Topology::Chain | Topology::FullyConnected => self.h == T::zero(),
            Topology::MeanFieldPSpin => self.potential.is_even(),
        }
    }

    /// Chain bonds `(i, j)` with `i < j`. Empty for mean-field topologies.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        if self.topology != Topology::Chain {
            return Vec::new();
        }
        let l = self.size;
        let mut bonds: Vec<(usize, usize)> = (0..l.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        // a two-site ring would count the same pair twice
        if self.periodic && l > 2 {
            bonds.push((0, l - 1));
        }
        bonds
    }

    /// Chain neighbors of site `i`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2);
        for (a, b) in self.bonds() {
            if a == i {
                out.push(b);
            } else if b == i {
                out.push(a);
            }
        }
        out
    }

    /// Diagonal (σz basis) energy of a configuration of ±1 spins.
    pub fn classical_energy(&self, spins: &[i8]) -> Result<T> {
        if spins.len() != self.size {
            return Err(Error::Input(format!(
                "expected {} spins, got {}",
                self.size,
                spins.len()
            )));
        }
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Input("spins must be +1 or -1".into()));
        }
        Ok(self.classical_energy_unchecked(spins))
    }

    pub(crate) fn classical_energy_unchecked(&self, spins: &[i8]) -> T {
        match self.topology {
            Topology::Chain => {
                let bond: i64 = self
                    .bonds()
                    .iter()
                    .map(|&(i, j)| i64::from(spins[i]) * i64::from(spins[j]))
                    .sum();
                let total: i64 = spins.iter().map(|&s| i64::from(s)).sum();
                -T::from_i64(bond).unwrap() - self.h * T::from_i64(total).unwrap()
            }
            Topology::FullyConnected | Topology::MeanFieldPSpin => {
                let total: i64 = spins.iter().map(|&s| i64::from(s)).sum();
                let l = T::from_count(self.size);
                let m = T::from_i64(total).unwrap() / l;
                -l * self.potential.value(m)
            }
        }
    }

    /// Classical energy barrier of thermally activated reversal at `h = 0`.
    ///
    /// A ring reverses by nucleating a segment bounded by two domain walls
    /// (cost `2J` each); an open chain needs a single wall entering from an end.
    /// Fully connected clusters must pass through `m = 0`: `L (g(1) - g(0)) = L/2`.
    pub fn barrier_height(&self) -> Result<T> {
        if self.h != T::zero() {
            return Err(Error::Input("barrier height is defined at h = 0".into()));
        }
        match self.topology {
            Topology::Chain => {
                if self.periodic && self.size > 2 {
                    Ok(T::cst(4.0))
                } else {
                    Ok(T::cst(2.0))
                }
            }
            Topology::FullyConnected => {
                let l = T::from_count(self.size);
                Ok(l * (self.potential.value(T::one()) - self.potential.value(T::zero())))
            }
            Topology::MeanFieldPSpin => Err(Error::Input(
                "barrier height is only tabulated for chains and fully connected clusters".into(),
            )),
        }
    }
}

/// Quartic double well `V(x) = λ x⁴ - x²` for a particle of mass `mass`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleWell<T> {
    pub lambda: T,
    pub mass: T,
}

impl<T: Real> DoubleWell<T> {
    /// Mass `1/2`, i.e. `H = p² + λx⁴ - x²`.
    pub fn new(lambda: T) -> Result<Self> {
        Self::with_mass(lambda, T::cst(0.5))
    }

    pub fn with_mass(lambda: T, mass: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::Input(format!("quartic coefficient must be > 0, got {lambda}")));
        }
        if !(mass > T::zero()) || !mass.is_finite() {
            return Err(Error::Input(format!("mass must be > 0, got {mass}")));
        }
        Ok(Self { lambda, mass })
    }

    #[inline]
    pub fn potential(&self, x: T) -> T {
        let x2 = x * x;
        self.lambda * x2 * x2 - x2
    }

    #[inline]
    pub fn potential_grad(&self, x: T) -> T {
        T::cst(4.0) * self.lambda * x * x * x - T::cst(2.0) * x
    }

    /// Position of the right minimum, `sqrt(1/(2λ))`.
    pub fn x_min(&self) -> T {
        (T::one() / (T::cst(2.0) * self.lambda)).sqrt()
    }

    pub fn well_separation(&self) -> T {
        T::cst(2.0) * self.x_min()
    }

    pub fn barrier_height(&self) -> T {
        T::one() / (T::cst(4.0) * self.lambda)
    }
}
