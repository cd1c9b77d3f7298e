pub mod bivariate;
pub mod error;
pub mod leaders;
pub mod pyramid;
pub mod scaling;
pub mod synth;

pub use error::{Error, Result};
pub use pyramid::{
    dwt_forward, dwt_forward_with, fractional_integrate, Boundary, CoefficientPyramid, Level,
    Signal,
};
