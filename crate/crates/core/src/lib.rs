//! Numerical laboratory for a time-periodic diffusive vector-borne epidemic
//! model whose infected region grows behind a moving front.
//!
//! The crate provides:
//! - [`model`]: parameters, positive bounded time-periodic coefficient
//!   fields, initial data, and validation of the standing assumptions;
//! - [`solver`]: the free-boundary simulator (front-fixing transformation,
//!   implicit diffusion, explicit advection/reaction, Stefan front update);
//! - [`spectral`]: periodic-parabolic principal eigenvalues via the period
//!   map, domain reproduction numbers, the risk index, and the critical
//!   length;
//! - [`periodic`]: minimal/maximal time-periodic attractors by monotone
//!   iteration and the half-line envelope approximation;
//! - [`classify`]: spreading/vanishing verdicts, the weighted-mass front
//!   bound, the critical expansion capability, and the attractor sandwich
//!   check.

pub mod classify;
pub mod io;
pub mod model;
pub mod numerics;
pub mod periodic;
pub mod solver;
pub mod spectral;

pub use classify::{
    attractor_sandwich_check, classify_dynamics, critical_mu, energy_residual, Classification,
    ClassifyError, ClassifyOptions, CriterionTag, CriticalMu, EnergyReport, SandwichOptions,
    SandwichReport, Thresholds, Verdict,
};
pub use model::{
    validate, CoefficientField, Grid1D, InitialData, ModelParams, SampledTable, SpatialProfile,
    ValidatedModel, ValidationError,
};
pub use periodic::{
    halfline_envelope, iterate_maximal, iterate_minimal, EnvelopePair, PeriodicError,
    PeriodicOptions, PeriodicSolution, SolutionKind,
};
pub use solver::{
    front_gradient, resample_initial, simulate, simulate_state, step, FrontRecord, SimState,
    SolverConfig, SolverError, StopReason, Trajectory,
};
pub use spectral::{
    critical_length, lambda0, principal_eigenvalue, r0_closed_form, r0_domain,
    r0_limit_closed_form, risk_index, CriticalLength, EigenField, EigenResult, R0Result,
    RiskPoint, SpectralError, SpectralOptions,
};

#[cfg(test)]
pub(crate) mod testutil;
