//! Picard iteration of `Φ ∘ Ψ`, `θ → 0` continuation and the estimate audits.

mod audit;
mod continuation;
mod picard;
mod problem;

pub use audit::{
    energy_audit, energy_constants, full_audit, stability_experiment, AuditOptions, AuditReport,
    EnergyConstants, StabilityReport,
};
pub use continuation::{
    default_theta_sequence, solution_distance, theta_continuation, CauchyReport,
};
pub use picard::{
    apply_coupled_map, horizon_sweep, initial_guess, picard_iterate, picard_solve, PicardReport,
    Solution, SweepEntry,
};
pub use problem::{GridSpec, Prepared, ProblemSpec, Profile};
