//! Ordered weighted L1 (OWL / OSCAR / SLOPE) regularized least squares with
//! duality-gap safe screening.
//!
//! The solvers minimize `½‖y − Xβ‖² + Σ λ_i |β|_[i]` by accelerated
//! (FISTA) or variance-reduced stochastic proximal gradient. With screening
//! enabled, features certified to be zero at the optimum are removed during
//! the solve; the returned solution is the same as without screening.

pub mod dataset;
pub mod duality;
pub mod error;
pub mod linalg;
pub mod screening;
pub mod solvers;
pub mod sorted_l1;

pub use dataset::{
    generate_synthetic, load_csv, load_libsvm, rmse, DesignMatrix, SyntheticSpec, TargetColumn,
};
pub use duality::{dual_value, feasible_dual_point, gap_certificate, primal_value, GapCertificate};
pub use error::{OwlError, Result};
pub use screening::{restrict, screen_iterative, screen_test, ActiveSet, ScreeningTrace, TraceRow};
pub use solvers::{
    apgd, lipschitz_estimate, solve, solve_observed, solve_path, spgd, IterationEvent, Mode,
    ResultRecord, SolveResult, SolverConfig, SpgdParams, STEP_INFLATION,
};
pub use sorted_l1::{
    dual_norm, oscar_weights, oscar_weights_from_data, oscar_weights_from_tau, owl_norm, prox_owl,
    WeightProvenance, WeightVector,
};
