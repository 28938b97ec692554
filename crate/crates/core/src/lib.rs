//! Differentially private synthetic data.
//!
//! The pipeline has two stages. A reference distribution μ is estimated from
//! the data: uniform (data independent), a perturbed histogram on discrete
//! grids, or a Bernstein-mechanism release of a Gaussian kernel density
//! estimate on the unit cube. A reduced support is then sampled from μ and a
//! density over it is fitted, by linear programming, to Laplace-perturbed
//! empirical averages of a query family; synthetic records are drawn from
//! the fitted density.
//!
//! The [`metrics`] module carries the accuracy metric, the divergences used
//! to reason about μ, and calculators for the sample sizes that make the
//! accuracy guarantees hold. [`applications`] has downstream statistics
//! computed on synthetic output.

pub mod applications;
pub mod dataset;
pub mod density;
pub mod domain;
pub mod error;
pub mod estimators;
pub mod fitting;
pub mod metrics;
pub mod noise;
pub mod privacy;
pub mod query;
pub mod rng;

pub use dataset::Dataset;
pub use density::{sample_density, DiscreteDensity};
pub use domain::{DomainKind, DomainSpec};
pub use error::{Error, Result};
pub use noise::LaplaceScale;
pub use privacy::PrivacyBudget;
pub use query::{build_marginal_family, empirical_average, Query, QueryFamily};
pub use rng::SeededRng;
