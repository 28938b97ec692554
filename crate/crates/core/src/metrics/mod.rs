//! Accuracy, divergences between discrete densities, and sample-size
//! calculators.

mod accuracy;
mod bounds;
mod divergence;

pub use accuracy::{accuracy, accuracy_against_density, AccuracyReport};
pub use bounds::{
    histogram_condition_bound, required_parameters, BoundConstants, BoundReport, BoundRequest, DensityExtremes, Regime,
};
pub use divergence::{
    chained_renyi_bound, l1_tail_bound, min_ratio_bound, renyi_condition_number, renyi_divergence, sason_verdu_bound,
    total_variation, MinRatio,
};
