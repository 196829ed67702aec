//! Shared fixtures for unit tests.

use crate::model::{CoefficientField, InitialData, ModelParams};
use std::f64::consts::FRAC_PI_2;

/// Reference constant-coefficient parameter set used across the test suites:
/// unit diffusivities, half transmission probabilities, quarter recovery and
/// death rates, unit populations, and a front starting at pi/2.
pub fn canonical_params() -> ModelParams {
    ModelParams {
        d1: 1.0,
        d2: 1.0,
        alpha_b: 0.5,
        alpha_m: 0.5,
        d_m: 0.25,
        n_b: 1.0,
        a_m: 1.0,
        mu: 1.0,
        h0: FRAC_PI_2,
        period: 1.0,
        beta_b: CoefficientField::constant(1.0, 1.0).unwrap(),
        gamma_b: CoefficientField::constant(0.25, 1.0).unwrap(),
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Tweak {
    Beta(f64),
    Gamma(f64),
    H0(f64),
    Mu(f64),
    D1(f64),
    D2(f64),
    Dm(f64),
    AlphaB(f64),
    AlphaM(f64),
}

pub fn params_with(tweaks: &[Tweak]) -> ModelParams {
    let mut p = canonical_params();
    for t in tweaks {
        match *t {
            Tweak::Beta(v) => p.beta_b = CoefficientField::constant(v, p.period).unwrap(),
            Tweak::Gamma(v) => p.gamma_b = CoefficientField::constant(v, p.period).unwrap(),
            Tweak::H0(v) => p.h0 = v,
            Tweak::Mu(v) => p.mu = v,
            Tweak::D1(v) => p.d1 = v,
            Tweak::D2(v) => p.d2 = v,
            Tweak::Dm(v) => p.d_m = v,
            Tweak::AlphaB(v) => p.alpha_b = v,
            Tweak::AlphaM(v) => p.alpha_m = v,
        }
    }
    p
}

/// Cosine-bump initial data matching the parameter set's front position.
pub fn canonical_init(params: &ModelParams, bird_peak: f64, mosquito_peak: f64) -> InitialData {
    InitialData::cosine(params.h0, 129, bird_peak, mosquito_peak)
}
