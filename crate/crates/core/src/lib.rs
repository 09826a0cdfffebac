pub mod cap_spectrum;
pub mod eigen;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod ode;
pub mod quadrature;
pub mod stereographic;
pub mod verifier;

pub use error::{Error, Result};
