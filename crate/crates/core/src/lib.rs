//! Global sensitivity analysis for functions of independent random inputs.
//!
//! The crate estimates lower and upper Sobol' indices, derivative-based
//! measures (DGSM), activity scores from the gradient outer-product matrix and
//! global activity scores from the finite-slope matrix. The [`bounds`] module
//! checks the inequalities that tie these measures together, with an explicit
//! Monte Carlo slack.
//!
//! Every estimator is driven by counter-based [`randkit::RngStream`]s and
//! reduced in a fixed order, so a given seed produces bit-identical results
//! regardless of the number of worker threads.
//!
//! ```
//! use sensyn::models::Model;
//! use sensyn::randkit::RngStream;
//! use sensyn::variance::upper_sobol;
//!
//! let model = Model::linear_unit(vec![1.0, 2.0]).unwrap();
//! let est = upper_sobol(&model, 20_000, &RngStream::new(7, 0)).unwrap();
//! assert!((est.indices[0] - 0.2).abs() < 0.02);
//! assert!((est.indices[1] - 0.8).abs() < 0.02);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dgsm;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod models;
pub mod randkit;
pub mod report;
pub mod subspace;
pub mod variance;

pub use error::{Error, Result};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 2024;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/sobol.md")]
    mod sobol {}
    #[doc = include_str!("../../../book/src/dgsm.md")]
    mod dgsm {}
    #[doc = include_str!("../../../book/src/subspaces.md")]
    mod subspaces {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
