//! Tight convergence analysis and simulation of the difference-of-convex
//! algorithm (DCA).
//!
//! The crate classifies a curvature splitting `F = f1 - f2` into its
//! decrease regime, computes rate bounds and optimal curvature shifts, runs
//! DCA over caller-supplied oracles, builds exact worst-case instances,
//! relates proximal gradient descent to DCA, and hosts a sparse-PCA
//! experiment.

pub mod curvature;
pub mod dca;
pub mod error;
pub mod interpolation;
pub mod pgd;
pub mod piecewise;
pub mod rates;
pub mod regimes;
pub mod shift;
pub mod spca;
pub mod verify;
pub mod worstcase;

pub use curvature::{inv, objective_curvatures, validate_splitting, ExtReal, LowerCurvature, ObjectiveCurvatures, Splitting};
pub use dca::{run_dca, DcOracles, DcaOptions, DcaTrajectory, SeparableQuadratics};
pub use error::{Error, Result};
pub use interpolation::{interpolation_check, InterpolationReport, Triplet};
pub use pgd::{pgd_map, pgd_rate, pgd_sigma_plus, pgd_to_dca, run_pgd, CompositeOracles, PgdAsDca, PgdSetting, StepsizeCell};
pub use piecewise::{PiecewiseQuadratic1D, QuadPiece};
pub use rates::{rate_bound, RateBound};
pub use regimes::{classify, classify_with_tol, contour_grid, GridCell, Regime, RegimeReport, SampleRange};
pub use shift::{optimize_shift, p_of_shift, shifted_splitting, ShiftResult, ShiftSearch};
pub use spca::{build_problem, run_config, run_experiment, spca_conjugate_step, EntryDistribution, NEpsilonTable, SpcaConfig, SpcaProblem};
pub use worstcase::{instance_p1, instance_p2, Anchors, PiecewiseDc, WorstCaseInstance};
pub use verify::{run_verify, Suite, SuiteReport, VerifyReport};
