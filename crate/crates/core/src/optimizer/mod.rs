//! Penalty-method maximum-entropy training of the RBM purification.

mod config;
mod gradcheck;
mod gradient;
mod train;

pub use config::{Constraint, ConstraintSet, EntropyMode, OptimizerConfig, UpdateMethod, XiSchedule};
pub use gradcheck::{
    compare_gradients, gradcheck, h_sweep, CoordinateError, Fault, GradcheckConfig, GradcheckInstance,
    GradcheckReport,
};
pub use gradient::{
    cost, evaluate_cost, exact_cost, finite_difference_gradient, grad_entropy_term, grad_observable_term,
    CostEvaluation, EntropyKind,
};
pub use train::{train, EpochRecord, TrainingOutcome, TrainingStatus, TrainingTrace};
