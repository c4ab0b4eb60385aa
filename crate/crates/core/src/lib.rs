//! Tunneling times of path-integral quantum Monte Carlo compared with
//! incoherent quantum tunneling, with exact-diagonalization and instanton
//! references.
//!
//! The numerical kernels are generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases at the crate root fix the double-precision instantiation used
//! by the command line tool.

pub mod error;
pub mod harness;
pub mod models;
pub mod qmc;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod spectrum;
pub mod wkb;

pub use error::{Error, Result};
pub use models::{CurieWeiss, CustomMeanField, DoubleWell, Grover, MeanField, SpinModel, Topology};
pub use scalar::Real;
pub use spectrum::{GridSpec, SpectrumMethod, SpectrumResult};
pub use wkb::{PotentialLandscape, WkbProblem};

pub type SpinModel64 = SpinModel<f64>;
pub type SpinModel32 = SpinModel<f32>;
pub type DoubleWell64 = DoubleWell<f64>;
pub type DoubleWell32 = DoubleWell<f32>;
pub type SpectrumResult64 = SpectrumResult<f64>;
pub type SpectrumResult32 = SpectrumResult<f32>;
pub type WkbProblem64 = WkbProblem<f64>;
