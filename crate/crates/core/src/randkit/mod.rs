//! Deterministic random streams and the marginal input laws sampled from them.

mod distribution;
mod normal;
mod stream;

pub use distribution::{InputDistribution, CHEEGER_GRID_POINTS};
pub use normal::{normal_cdf, normal_pdf, normal_quantile};
pub use stream::{EvalStreams, RngStream};
