//! Averaged SGD on the semi-discrete dual, step-size rules and reference
//! solvers.

mod agd;
mod dual;
mod ot;
mod reference;
mod sgd;
mod step;

pub use agd::{dual_smoothness, nesterov_agd, AgdResult, AGD_GRADIENT_TOL};
pub use dual::{dual_objective_estimate, Estimate, FiniteDual};
pub use ot::{exact_discrete_ot, transport_from_costs, TransportPlan, TransportSolution, MAX_CELLS};
pub use reference::{estimate_kappa, finite_sample_reference, gauge_gap, Reference, ReferenceConfig, ReferenceMethod};
pub use sgd::{averaged_sgd, averaged_sgd_on, phi_hash, LogSchedule, Snapshot, SolverConfig, SolverTrace};
pub use step::{step_size, Average, RateConstants, StepRule, GRADIENT_BOUND};
