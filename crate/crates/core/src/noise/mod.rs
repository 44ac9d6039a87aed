//! Marginal ambiguity sets, their divergences, the smooth c-transform and
//! its gradient oracles.

mod choice;
mod model;
mod transform;

pub use choice::{
    bisection_probs, choice_from_utilities, choice_jacobian, choice_probabilities, softmax_probs, sparsemax_probs, ChoiceMethod,
    ChoiceProbabilities,
};
pub use model::{hyperbolic_offset, MarginalModel, ModelKind};
pub use transform::{chebyshev_value, log_partition, smooth_c_transform, smooth_value_from_utilities, spmax};
