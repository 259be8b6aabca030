//! Tikhonov regularization with oversmoothing penalties in a Hilbert scale.
//!
//! The crate discretizes the exponential growth model y' = x·y, y(0) = 1 on
//! `[0,1]`, minimizes the Tikhonov functional with the H¹(0,1) penalty under the
//! boundary condition x(1) = 0, and selects the regularization parameter with
//! balancing principles, the discrepancy principle, the δ-free
//! quasi-optimality heuristic, a-priori rules, and an oracle rule. An
//! experiment harness reproduces rate regressions and rule-comparison runs as
//! CSV/JSON artifacts.

pub mod error;
pub mod experiments;
pub mod forward;
pub mod grid;
pub mod hilbert;
pub mod selection;
pub mod solver;

pub use error::{Error, Result};
pub use experiments::{
    error_decomposition_scan, fit_rate, make_noisy_data, run_oversmoothing_contrast,
    run_rule_comparison, run_table1, BaseConfig, CaseStudy, NoiseModel, RateFit,
};
pub use forward::{explosion_sequence, tcc_report, ForwardOp, NonlinearityProfile, TccReport};
pub use grid::{cumulative_trapezoid, cumulative_trapezoid_adjoint, Grid, GridFunction};
pub use hilbert::{h1_norm, HilbertScale, SourceCondition};
pub use selection::{
    a_priori_alpha, balancing_first, balancing_select, balancing_standard, balancing_third,
    beta_min, discrepancy_principle, error_constant, gamma_admissible, oracle_alpha,
    oracle_infimum, oracle_set, quasi_optimality_bound, quasi_optimality_check,
    quasi_optimality_check_on, quasi_optimality_heuristic, BalancingConfig, BalancingVariant,
    ErrorConstant, GridBounds, NoiseAmplification, ParameterGrid, SelectionResult, Threshold,
    TraceEntry,
};
pub use solver::{
    functional_gradient, functional_value, minimize, solve_path, Reconstruction, SolverConfig,
    SolverMethod,
};
