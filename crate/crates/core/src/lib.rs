//! Discrete extension operators for trimmed tensor-product spline spaces and
//! a cut Nitsche solver for the Poisson problem on trimmed domains.

pub mod active;
pub mod diagnostics;
pub mod draw;
pub mod error;
pub mod extension;
pub mod geometry;
pub mod interpolation;
pub mod linalg;
pub mod mesh;
pub mod nitsche;
pub mod problems;
pub mod quadrature;
pub mod space;
pub mod spline;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Order-preserving map, parallel when the `parallel` feature is enabled.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
