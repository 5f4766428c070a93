//! Robustness metrics for local explanations.
//!
//! A metric perturbs an instance inside a small ball, re-explains every
//! perturbed copy, and aggregates the explanation distances — the maximum for
//! a worst-case view, the mean for a typical-case view. Raw, relative, and
//! prediction-filtered variants share the same perturbation draw.

mod neighborhood;
mod performance;
mod sensitivity;

pub use neighborhood::{sample_neighborhood, BallNorm, NeighborhoodSpec};
pub use performance::{mae, mse};
pub use sensitivity::{
    avg_sensitivity, frobenius_diff, max_sensitivity, sensitivities, Explainer, MetricMode,
    Predictor, SensitivityPair,
};
