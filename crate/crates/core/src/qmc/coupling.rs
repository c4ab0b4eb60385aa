//! Classical (σz) energy changes for single spin flips.

use crate::error::{Error, Result};
use crate::models::{SpinModel, Topology};

/// Spatial part of the path action, specialized per topology.
#[derive(Clone, Debug)]
pub(crate) enum Coupling {
    /// `ΔE = 2 s (Σ_nb s_j + h)` for flipping spin `s`.
    Chain { neighbors: Vec<Vec<usize>>, h: f64 },
    /// `E = -L g(m)` tabulated by the number of up spins `k`.
    MeanField { energy: Vec<f64> },
}

impl Coupling {
    pub(crate) fn new(model: &SpinModel<f64>) -> Result<Self> {
        let l = model.size();
        if !(model.gamma() > 0.0) {
            return Err(Error::Input("path-integral sampling needs Γ > 0".into()));
        }
        Ok(match model.topology() {
            Topology::Chain => Coupling::Chain {
                neighbors: (0..l).map(|i| model.neighbors(i)).collect(),
                h: model.h(),
            },
            Topology::FullyConnected | Topology::MeanFieldPSpin => {
                let g = model.potential();
                let lf = l as f64;
                let energy = (0..=l)
                    .map(|k| -lf * g.value((2.0 * k as f64 - lf) / lf))
                    .collect();
                Coupling::MeanField { energy }
            }
        })
    }

    /// `φ` such that flipping a spin `s` changes the energy by `s·φ`, given the
    /// spins of the other sites at the same time (`others`: neighbor sum for
    /// chains, number of up spins among the other sites for mean-field
    /// models).
    #[inline]
    pub(crate) fn flip_slope(&self, others: i32) -> f64 {
        match self {
            Coupling::Chain { h, .. } => 2.0 * (others as f64 + h),
            Coupling::MeanField { energy } => {
                let k = others as usize;
                energy[k] - energy[k + 1]
            }
        }
    }
}
