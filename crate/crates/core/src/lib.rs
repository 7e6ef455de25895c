//! Estimation-theoretic tools for Gaussian channels: MMSE, mutual
//! information and the identities that connect them, for scalar, vector,
//! continuous-time and discrete-time models.

pub mod ct;
pub mod curve;
pub mod dt;
pub mod error;
pub mod inputs;
pub mod mc;
pub mod quadrature;
pub mod report;
pub mod representations;
pub mod scalar;
pub mod stats;
pub mod vector;

pub use curve::Curve;
pub use error::{Error, Result};
pub use inputs::{InputLaw, MixtureComponent, Moments, OutputDensity, Posterior, QuadratureSpec};
pub use mc::{Estimate, McConfig};
pub use report::{Check, Report};
pub use representations::{Mapping, SnrIntegral, TailEstimator, TailPolicy};
pub use scalar::ScalarChannel;
pub use vector::{VectorChannelModel, VectorInput};

pub use nalgebra;
