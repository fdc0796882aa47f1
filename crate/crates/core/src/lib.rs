//! Coupled channel/wall model of a catalytic converter monolith.
//!
//! The channel field `u_f(r, z, t)` obeys radial diffusion transported in
//! `z`; the wall field `u_s(z, t)` obeys a reaction–diffusion system driven
//! by the flux integral of the channel. The two are coupled by a Picard
//! iteration of the maps `Ψ` (wall to channel) and `Φ` (channel to wall).
//!
//! ```
//! use catconv::{picard_solve, ProblemSpec};
//!
//! let sol = picard_solve(&ProblemSpec::reference(), 1e-9, 50).unwrap();
//! assert!(sol.report.converged);
//! assert!(sol.report.contraction_ratio < 1.0);
//! ```

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod boundary;
pub mod coupling;
pub mod cylinder;
pub mod eigenbasis;
pub mod error;
pub mod kinetics;
pub mod oracle;
pub mod spaces;
pub mod tridiag;

pub use boundary::{
    contraction_probe_phi, solve_boundary, weak_step_residuals, PhiProbeReport, WallParams,
};
pub use coupling::{
    energy_audit, full_audit, horizon_sweep, picard_iterate, picard_solve, stability_experiment,
    theta_continuation, AuditOptions, AuditReport, CauchyReport, GridSpec, PicardReport, Prepared,
    ProblemSpec, Profile, Solution, StabilityReport, SweepEntry,
};
pub use cylinder::{flux_integral, lipschitz_probe_psi, solve_cylinder, PsiProbeReport};
pub use eigenbasis::{
    apply_t, assemble_operators, eigenpairs, poincare_sup, EigenBasis, RadialOperators,
};
pub use error::{Error, Result};
pub use kinetics::{evaluate, verify_hypotheses, HypothesisReport, Kinetics, ReactionModel, Sign};
pub use spaces::{
    build_discretization, build_discretization_with, dual_norm, inner_weighted, norm_wr0,
    norm_wr_t, norm_wtilde_t, norm_wz, norm_wz_t, BoundaryField, CylinderField, Discretization,
    Measure, ModalForm, RadialSpacing,
};
