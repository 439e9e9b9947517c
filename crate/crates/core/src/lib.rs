//! Exact distributions of normalized sums of heavy-tailed i.i.d. variables and
//! the logarithmic lower bounds on their convergence to symmetric stable laws.

pub mod cli;
pub mod error;
pub mod fourier;
pub mod harness;
pub mod metrics;
pub mod montecarlo;
pub mod quad;
pub mod rng;
pub mod scaling;
pub mod special;
pub mod stable;
pub mod summands;

pub use error::{Error, Result};
pub use fourier::{GridSpec, SampledDistribution};
pub use scaling::{ScalingKind, ScalingRule};
pub use stable::StableLaw;
pub use summands::Family;
