//! Spreading/vanishing classification with declared finite-horizon proxies,
//! the weighted-mass front bound check on constant-coefficient runs, the
//! critical expansion capability, and the long-time sandwich between the
//! periodic envelopes.

use crate::model::{ModelParams, ValidatedModel};
use crate::numerics::MonotoneCubic;
use crate::periodic::{iterate_maximal, iterate_minimal, PeriodicError, PeriodicOptions};
use crate::solver::{simulate, SolverConfig, SolverError, StopReason, Trajectory};
use crate::spectral::{critical_length, r0_domain, r0_limit_closed_form, SpectralError, SpectralOptions};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("coefficients are not constant: {0}")]
    NotConstantCoefficients(String),
    #[error("not in the bistable regime: {0}")]
    NotInBistableRegime(String),
    #[error("verdicts are not monotone in mu: {0}")]
    InconsistentOracle(String),
    #[error("prerequisite failed: {0}")]
    PrerequisiteFailed(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Periodic(#[from] PeriodicError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Vanishing,
    Spreading,
    Undetermined,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Vanishing => "Vanishing",
            Verdict::Spreading => "Spreading",
            Verdict::Undetermined => "Undetermined",
        }
    }
}

/// Which decision rule fired. Named by what each rule observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionTag {
    /// constant coefficients with the spatially-independent reproduction
    /// number at or below 1: extinction regardless of the initial state
    GlobalReproductionAtOrBelowOne,
    /// the initial risk index already reaches 1
    InitialRiskAtOrAboveOne,
    /// the front crossed the critical length, so the risk index reached 1
    RiskIndexReachedOne,
    /// the front passed the configured spreading threshold
    FrontBeyondLimit,
    /// the front stalled for a full period with the infection below the
    /// extinction threshold
    FrontStalledInfectionDecayed,
}

impl CriterionTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriterionTag::GlobalReproductionAtOrBelowOne => "global-reproduction-at-or-below-one",
            CriterionTag::InitialRiskAtOrAboveOne => "initial-risk-at-or-above-one",
            CriterionTag::RiskIndexReachedOne => "risk-index-reached-one",
            CriterionTag::FrontBeyondLimit => "front-beyond-limit",
            CriterionTag::FrontStalledInfectionDecayed => "front-stalled-infection-decayed",
        }
    }
}

/// Resolved finite-horizon thresholds a classification was decided under.
#[derive(Debug, Clone, Copy)]
pub struct Thresholds {
    pub eps_front: f64,
    pub eps_ext: f64,
    pub h_max: f64,
    pub t_max: f64,
    pub spread_tol: f64,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub verdict: Verdict,
    pub criteria: Vec<CriterionTag>,
    pub r0f_initial: f64,
    pub r0f_final: f64,
    pub h_final: f64,
    pub h_prime_final: f64,
    pub final_max_u: f64,
    pub final_max_v: f64,
    pub l0: Option<f64>,
    pub thresholds: Thresholds,
    pub simulated_time: f64,
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    /// simulation horizon in periods (doubled once before settling on
    /// Undetermined)
    pub t_max_periods: f64,
    pub eps_front: Option<f64>,
    pub eps_ext: f64,
    pub h_max: Option<f64>,
    pub spread_tol: f64,
    pub recheck_with_doubled_horizon: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            t_max_periods: 20.0,
            eps_front: None,
            eps_ext: 1e-6,
            h_max: None,
            spread_tol: 1e-9,
            recheck_with_doubled_horizon: true,
        }
    }
}

/// Spectral quantities that do not depend on `mu`; computed once and shared
/// across classifier calls in sweeps and bisections.
#[derive(Debug, Clone)]
struct SpectralSummary {
    r0f_initial: f64,
    /// None when the reproduction number stays at or below 1 on every domain
    l0: Option<f64>,
    /// closed-form large-domain reproduction number for constant coefficients
    r0_limit_constant: Option<f64>,
}

fn spectral_summary(
    params: &ModelParams,
    sopts: &SpectralOptions,
) -> Result<SpectralSummary, ClassifyError> {
    let r0f_initial = r0_domain(params.h0, params, sopts)?.value;
    let l0 = match critical_length(params, sopts) {
        Ok(c) => Some(c.l0),
        Err(SpectralError::NoCriticalLength { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let r0_limit_constant = r0_limit_closed_form(params).ok();
    Ok(SpectralSummary {
        r0f_initial,
        l0,
        r0_limit_constant,
    })
}

/// Decide spreading vs vanishing for one model configuration.
pub fn classify_dynamics(
    model: &ValidatedModel,
    solver_cfg: &SolverConfig,
    sopts: &SpectralOptions,
    opts: &ClassifyOptions,
) -> Result<Classification, ClassifyError> {
    let summary = spectral_summary(&model.params, sopts)?;
    classify_with_summary(model, solver_cfg, sopts, opts, &summary)
}

fn classify_with_summary(
    model: &ValidatedModel,
    solver_cfg: &SolverConfig,
    sopts: &SpectralOptions,
    opts: &ClassifyOptions,
    summary: &SpectralSummary,
) -> Result<Classification, ClassifyError> {
    let params = &model.params;
    let eps_front = opts
        .eps_front
        .unwrap_or(1e-8 * params.h0 / params.period);
    let h_max = opts
        .h_max
        .unwrap_or(16.0 * params.h0.max(summary.l0.unwrap_or(params.h0)));
    let t_max = opts.t_max_periods * params.period;
    let thresholds = Thresholds {
        eps_front,
        eps_ext: opts.eps_ext,
        h_max,
        t_max,
        spread_tol: opts.spread_tol,
    };

    // initial risk already critical: spreading without simulation
    if summary.r0f_initial >= 1.0 - opts.spread_tol {
        return Ok(Classification {
            verdict: Verdict::Spreading,
            criteria: vec![CriterionTag::InitialRiskAtOrAboveOne],
            r0f_initial: summary.r0f_initial,
            r0f_final: summary.r0f_initial,
            h_final: params.h0,
            h_prime_final: f64::NAN,
            final_max_u: model
                .init
                .infected_birds
                .iter()
                .fold(0.0_f64, |m, v| m.max(*v)),
            final_max_v: model
                .init
                .infected_mosquitoes
                .iter()
                .fold(0.0_f64, |m, v| m.max(*v)),
            l0: summary.l0,
            thresholds,
            simulated_time: 0.0,
        });
    }

    // constant coefficients with a subcritical global number: extinction is
    // unconditional, no simulation needed
    if let Some(r0_limit) = summary.r0_limit_constant {
        if r0_limit <= 1.0 {
            return Ok(Classification {
                verdict: Verdict::Vanishing,
                criteria: vec![CriterionTag::GlobalReproductionAtOrBelowOne],
                r0f_initial: summary.r0f_initial,
                r0f_final: summary.r0f_initial,
                h_final: params.h0,
                h_prime_final: f64::NAN,
                final_max_u: f64::NAN,
                final_max_v: f64::NAN,
                l0: summary.l0,
                thresholds,
                simulated_time: 0.0,
            });
        }
    }

    // crossing the critical length is equivalent to the risk index reaching 1,
    // so the front threshold can double as the risk monitor
    let h_stop = summary.l0.map_or(h_max, |l0| l0.min(h_max));

    let mut horizon = t_max;
    let mut attempts = if opts.recheck_with_doubled_horizon { 2 } else { 1 };
    loop {
        let cfg = SolverConfig {
            t_max: horizon,
            h_max: h_stop,
            eps_ext: opts.eps_ext,
            eps_front: Some(eps_front),
            ..solver_cfg.clone()
        };
        let traj = simulate(model, &cfg)?;
        let last = traj.final_front();
        let decided = match traj.stop {
            StopReason::FrontReachedLimit => {
                let tag = match summary.l0 {
                    Some(l0) if l0 <= h_max && last.h >= l0 => CriterionTag::RiskIndexReachedOne,
                    _ => CriterionTag::FrontBeyondLimit,
                };
                Some((Verdict::Spreading, tag))
            }
            StopReason::Extinguished => Some((
                Verdict::Vanishing,
                CriterionTag::FrontStalledInfectionDecayed,
            )),
            StopReason::HorizonReached => None,
        };

        match decided {
            Some((verdict, tag)) => {
                let r0f_final = r0_domain(last.h, params, sopts)?.value;
                return Ok(Classification {
                    verdict,
                    criteria: vec![tag],
                    r0f_initial: summary.r0f_initial,
                    r0f_final,
                    h_final: last.h,
                    h_prime_final: last.h_prime,
                    final_max_u: last.max_u,
                    final_max_v: last.max_v,
                    l0: summary.l0,
                    thresholds,
                    simulated_time: last.t,
                });
            }
            None => {
                attempts -= 1;
                if attempts == 0 {
                    let r0f_final = r0_domain(last.h, params, sopts)?.value;
                    return Ok(Classification {
                        verdict: Verdict::Undetermined,
                        criteria: Vec::new(),
                        r0f_initial: summary.r0f_initial,
                        r0f_final,
                        h_final: last.h,
                        h_prime_final: last.h_prime,
                        final_max_u: last.max_u,
                        final_max_v: last.max_v,
                        l0: summary.l0,
                        thresholds,
                        simulated_time: last.t,
                    });
                }
                horizon *= 2.0;
            }
        }
    }
}

/// Weighted-mass balance report for constant-coefficient runs.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    /// mosquito mass weight `gamma* N_b / (A_m alpha_m beta*)`
    pub k: f64,
    /// spatially-independent reproduction number entering the source factor
    pub r0: f64,
    /// per-snapshot relative residual of the integrated inequality
    pub residuals: Vec<(f64, f64)>,
    pub max_residual: f64,
    /// front bound implied when the inequality source is nonpositive
    pub h_bound: Option<f64>,
    pub h_final: f64,
    pub bound_satisfied: Option<bool>,
}

/// Verify the integrated mass/front inequality along a trajectory: the
/// weighted infected mass plus `(D1/mu) h(t)` never exceeds its initial value
/// plus the accumulated source, which is nonpositive when the global
/// reproduction number is at or below 1.
pub fn energy_residual(
    trajectory: &Trajectory,
    params: &ModelParams,
) -> Result<EnergyReport, ClassifyError> {
    let (beta, gamma) = match (
        params.beta_b.constant_value(),
        params.gamma_b.constant_value(),
    ) {
        (Some(b), Some(g)) => (b, g),
        _ => {
            return Err(ClassifyError::NotConstantCoefficients(
                "the mass balance check needs constant beta_b and gamma_b".into(),
            ))
        }
    };
    let r0 = r0_limit_closed_form(params)?;
    let k = gamma * params.n_b / (params.a_m * params.alpha_m * beta);
    let source_factor = params.alpha_b * beta * (1.0 - 1.0 / (r0 * r0));
    let d1_over_mu = params.d1 / params.mu;

    let front = &trajectory.front;
    if front.is_empty() {
        return Err(ClassifyError::PrerequisiteFailed(
            "trajectory has no front records".into(),
        ));
    }
    let baseline = front[0].mass_u + k * front[0].mass_v + d1_over_mu * front[0].h;
    let scale = baseline.abs().max(1e-300);

    // accumulated source integral at every record time (trapezoid in time)
    let mut accumulated = Vec::with_capacity(front.len());
    let mut acc = 0.0;
    accumulated.push(0.0);
    for w in front.windows(2) {
        let f0 = source_factor * w[0].mass_v;
        let f1 = source_factor * w[1].mass_v;
        acc += 0.5 * (f0 + f1) * (w[1].t - w[0].t);
        accumulated.push(acc);
    }

    let mut residuals = Vec::with_capacity(trajectory.snapshots.len());
    let mut max_residual = f64::NEG_INFINITY;
    for snap in &trajectory.snapshots {
        // nearest front record (records exist at every step)
        let idx = front
            .binary_search_by(|r| r.t.partial_cmp(&snap.t).expect("finite times"))
            .unwrap_or_else(|i| i.min(front.len() - 1));
        let lhs = snap.mass_u() + k * snap.mass_v() + d1_over_mu * snap.h;
        let residual = (lhs - baseline - accumulated[idx]) / scale;
        max_residual = max_residual.max(residual);
        residuals.push((snap.t, residual));
    }

    let h_final = trajectory.final_front().h;
    let (h_bound, bound_satisfied) = if r0 <= 1.0 {
        let bound = front[0].h + params.mu / params.d1 * (front[0].mass_u + k * front[0].mass_v);
        (Some(bound), Some(h_final <= bound))
    } else {
        (None, None)
    };

    Ok(EnergyReport {
        k,
        r0,
        residuals,
        max_residual,
        h_bound,
        h_final,
        bound_satisfied,
    })
}

#[derive(Debug, Clone)]
pub struct CriticalMu {
    pub mu_star: f64,
    pub bracket: (f64, f64),
    /// classifier verdicts observed along the bisection, sorted by mu
    pub trace: Vec<(f64, Verdict)>,
    pub undetermined_calls: usize,
    pub classifier_calls: usize,
}

/// Critical expansion capability: bisection on `mu` (in log scale, the
/// bracket usually spans decades) with the classifier as oracle. Requires the
/// bistable regime: subcritical initial risk but a supercritical large-domain
/// reproduction number.
pub fn critical_mu(
    model: &ValidatedModel,
    mu_lo: f64,
    mu_hi: f64,
    rel_tol: f64,
    solver_cfg: &SolverConfig,
    sopts: &SpectralOptions,
    opts: &ClassifyOptions,
) -> Result<CriticalMu, ClassifyError> {
    if !(mu_lo > 0.0 && mu_hi > mu_lo) {
        return Err(ClassifyError::PrerequisiteFailed(format!(
            "mu bracket [{mu_lo}, {mu_hi}] must be positive and increasing"
        )));
    }
    let summary = spectral_summary(&model.params, sopts)?;
    if summary.r0f_initial >= 1.0 - opts.spread_tol {
        return Err(ClassifyError::NotInBistableRegime(format!(
            "the initial risk index {} already reaches 1, so spreading happens for every mu",
            summary.r0f_initial
        )));
    }
    if summary.l0.is_none() {
        return Err(ClassifyError::NotInBistableRegime(
            "the reproduction number stays at or below 1 on every domain, so vanishing happens for every mu"
                .into(),
        ));
    }

    let mut calls = 0usize;
    let mut undetermined = 0usize;
    let mut trace: Vec<(f64, Verdict)> = Vec::new();
    let mut classify_at = |mu: f64,
                           trace: &mut Vec<(f64, Verdict)>,
                           undetermined: &mut usize|
     -> Result<Verdict, ClassifyError> {
        let mut m = model.clone();
        m.params.mu = mu;
        let c = classify_with_summary(&m, solver_cfg, sopts, opts, &summary)?;
        calls += 1;
        if c.verdict == Verdict::Undetermined {
            *undetermined += 1;
        }
        trace.push((mu, c.verdict));
        Ok(c.verdict)
    };

    let v_lo = classify_at(mu_lo, &mut trace, &mut undetermined)?;
    if v_lo == Verdict::Spreading {
        return Err(ClassifyError::NotInBistableRegime(format!(
            "spreading already at mu_lo = {mu_lo}"
        )));
    }
    let v_hi = classify_at(mu_hi, &mut trace, &mut undetermined)?;
    if v_hi != Verdict::Spreading {
        return Err(ClassifyError::NotInBistableRegime(format!(
            "no spreading at mu_hi = {mu_hi} (verdict {})",
            v_hi.as_str()
        )));
    }

    let (mut lo, mut hi) = (mu_lo, mu_hi);
    while hi - lo >= rel_tol * hi {
        let mid = (lo * hi).sqrt();
        let v = classify_at(mid, &mut trace, &mut undetermined)?;
        // an undetermined midpoint counts as not-yet-spreading: spreading
        // evidence is decisive, vanishing proxies may need more horizon
        if v == Verdict::Spreading {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    trace.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite mu"));
    let mut last_vanishing_above_spreading: Option<(f64, f64)> = None;
    let mut seen_spreading_at: Option<f64> = None;
    for &(mu, v) in &trace {
        match v {
            Verdict::Spreading => {
                if seen_spreading_at.is_none() {
                    seen_spreading_at = Some(mu);
                }
            }
            Verdict::Vanishing => {
                if let Some(s) = seen_spreading_at {
                    last_vanishing_above_spreading = Some((s, mu));
                }
            }
            Verdict::Undetermined => {}
        }
    }
    if let Some((s, v)) = last_vanishing_above_spreading {
        return Err(ClassifyError::InconsistentOracle(format!(
            "spreading at mu = {s} but vanishing at larger mu = {v}"
        )));
    }

    Ok(CriticalMu {
        mu_star: (lo * hi).sqrt(),
        bracket: (lo, hi),
        trace,
        undetermined_calls: undetermined,
        classifier_calls: calls,
    })
}

#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub l: f64,
    pub window: f64,
    pub n_periods: usize,
    pub compared_periods: usize,
    /// worst signed margins; nonnegative means strictly inside the envelope
    pub worst_lower_u: f64,
    pub worst_upper_u: f64,
    pub worst_lower_v: f64,
    pub worst_upper_v: f64,
    pub tol: f64,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct SandwichOptions {
    pub window: f64,
    pub n_periods: usize,
    /// periods compared at the end of the run
    pub compare_periods: usize,
    pub tol: f64,
    /// envelope domain length; defaults to four windows
    pub l: Option<f64>,
    /// time levels compared per period
    pub checks_per_period: usize,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        Self {
            window: 1.0,
            n_periods: 40,
            compare_periods: 3,
            tol: 1e-2,
            l: None,
            checks_per_period: 8,
        }
    }
}

/// After a spreading run settles, its fields on a compact window must lie
/// between the minimal and maximal periodic solutions at matching phases.
pub fn attractor_sandwich_check(
    model: &ValidatedModel,
    solver_cfg: &SolverConfig,
    sopts: &SpectralOptions,
    copts: &ClassifyOptions,
    popts: &PeriodicOptions,
    opts: &SandwichOptions,
) -> Result<SandwichReport, ClassifyError> {
    let params = &model.params;
    let classification = classify_dynamics(model, solver_cfg, sopts, copts)?;
    if classification.verdict != Verdict::Spreading {
        return Err(ClassifyError::PrerequisiteFailed(format!(
            "sandwich check needs a spreading run, classifier said {}",
            classification.verdict.as_str()
        )));
    }

    let l = opts.l.unwrap_or(4.0 * opts.window);
    if l < opts.window {
        return Err(ClassifyError::PrerequisiteFailed(format!(
            "envelope length {l} must cover the window {}",
            opts.window
        )));
    }
    let minimal = iterate_minimal(l, params, popts)?;
    if minimal.trivial_zero {
        return Err(ClassifyError::PrerequisiteFailed(format!(
            "length {l} is below the critical length; no positive envelope exists"
        )));
    }
    let maximal = iterate_maximal(l, params, popts)?;

    // align the solver step with the periodic time levels
    let steps = popts.steps_per_period;
    let dt = params.period / steps as f64;
    let stride = steps / opts.checks_per_period.max(1);
    let cfg = SolverConfig {
        dt,
        t_max: opts.n_periods as f64 * params.period,
        snapshot_stride: stride.max(1),
        h_max: f64::INFINITY,
        ..solver_cfg.clone()
    };
    let traj = simulate(model, &cfg)?;

    let win_nodes = (opts.window * popts.nodes_per_unit as f64).round() as usize;
    let first_compare = (opts.n_periods - opts.compare_periods.min(opts.n_periods)) as f64
        * params.period
        - 0.5 * dt;
    let mut worst_lower_u = f64::INFINITY;
    let mut worst_upper_u = f64::INFINITY;
    let mut worst_lower_v = f64::INFINITY;
    let mut worst_upper_v = f64::INFINITY;
    let mut compared = 0usize;

    for snap in &traj.snapshots {
        if snap.t < first_compare {
            continue;
        }
        if snap.h < opts.window {
            return Err(ClassifyError::PrerequisiteFailed(format!(
                "front h = {} never covered the window {} at t = {}",
                snap.h, opts.window, snap.t
            )));
        }
        // periodic phase level of this snapshot
        let level = ((snap.t / dt).round() as usize) % steps;
        let xs = snap.physical_nodes();
        let birds = MonotoneCubic::new(&xs, &snap.u);
        let mosquitoes = MonotoneCubic::new(&xs, &snap.v);
        for i in 0..=win_nodes {
            let x = minimal.xs[i];
            let sim_u = birds.eval(x);
            let sim_v = mosquitoes.eval(x);
            worst_lower_u = worst_lower_u.min(sim_u - minimal.u[level][i]);
            worst_upper_u = worst_upper_u.min(maximal.u[level][i] - sim_u);
            worst_lower_v = worst_lower_v.min(sim_v - minimal.v[level][i]);
            worst_upper_v = worst_upper_v.min(maximal.v[level][i] - sim_v);
        }
        compared += 1;
    }
    if compared == 0 {
        return Err(ClassifyError::PrerequisiteFailed(
            "no snapshots fell into the comparison window".into(),
        ));
    }

    let worst = worst_lower_u
        .min(worst_upper_u)
        .min(worst_lower_v)
        .min(worst_upper_v);
    Ok(SandwichReport {
        l: minimal.l,
        window: opts.window,
        n_periods: opts.n_periods,
        compared_periods: compared,
        worst_lower_u,
        worst_upper_u,
        worst_lower_v,
        worst_upper_v,
        tol: opts.tol,
        holds: worst >= -opts.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;
    use crate::testutil::{canonical_init, params_with, Tweak};
    use std::f64::consts::PI;

    fn coarse_spectral() -> SpectralOptions {
        SpectralOptions::coarse()
    }

    #[test]
    fn subcritical_global_number_vanishes_without_simulation() {
        let params = params_with(&[Tweak::Beta(0.25)]);
        let init = canonical_init(&params, 0.8, 0.6);
        let model = validate(params, init).unwrap();
        let cfg = SolverConfig::stable_for(&model.params, 96, 1.0);
        let c = classify_dynamics(&model, &cfg, &coarse_spectral(), &ClassifyOptions::default())
            .unwrap();
        assert_eq!(c.verdict, Verdict::Vanishing);
        assert_eq!(
            c.criteria,
            vec![CriterionTag::GlobalReproductionAtOrBelowOne]
        );
        assert_eq!(c.simulated_time, 0.0);
    }

    #[test]
    fn supercritical_initial_risk_spreads_without_simulation() {
        let params = params_with(&[Tweak::H0(2.0 * PI)]);
        let init = canonical_init(&params, 0.8, 0.6);
        let model = validate(params, init).unwrap();
        let cfg = SolverConfig::stable_for(&model.params, 96, 1.0);
        let c = classify_dynamics(&model, &cfg, &coarse_spectral(), &ClassifyOptions::default())
            .unwrap();
        assert_eq!(c.verdict, Verdict::Spreading);
        assert_eq!(c.criteria, vec![CriterionTag::InitialRiskAtOrAboveOne]);
        assert!(c.r0f_initial > 1.5);
    }

    #[test]
    fn small_data_with_small_mu_vanishes_by_simulation() {
        let params = params_with(&[Tweak::Mu(0.05)]);
        let init = canonical_init(&params, 0.8, 0.6).scaled(1e-3);
        let model = validate(params, init).unwrap();
        let cfg = SolverConfig::stable_for(&model.params, 96, 1.0);
        let c = classify_dynamics(
            &model,
            &cfg,
            &coarse_spectral(),
            &ClassifyOptions {
                t_max_periods: 30.0,
                ..ClassifyOptions::default()
            },
        )
        .unwrap();
        assert_eq!(c.verdict, Verdict::Vanishing);
        assert_eq!(
            c.criteria,
            vec![CriterionTag::FrontStalledInfectionDecayed]
        );
        assert!(c.simulated_time > 0.0);
        assert!(c.h_final < PI);
    }

    #[test]
    fn zero_trajectory_has_zero_energy_residuals() {
        let params = params_with(&[Tweak::Beta(0.25)]);
        let cfg = SolverConfig::stable_for(&params, 64, 2.0);
        let state = crate::solver::SimState::zero(params.h0, 64, 0.0);
        let traj = crate::solver::simulate_state(state, &params, &cfg).unwrap();
        let report = energy_residual(&traj, &params).unwrap();
        assert!((report.k - 2.0).abs() < 1e-12);
        assert!(report.residuals.iter().all(|(_, r)| r.abs() < 1e-14));
    }

    #[test]
    fn energy_weight_matches_hand_computation() {
        // gamma* N_b / (A_m alpha_m beta*) = 0.25 / (0.5 * 0.25) = 2
        let params = params_with(&[Tweak::Beta(0.25)]);
        let init = canonical_init(&params, 0.8, 0.6);
        let model = validate(params, init).unwrap();
        let cfg = SolverConfig::stable_for(&model.params, 128, 5.0);
        let traj = simulate(&model, &cfg).unwrap();
        let report = energy_residual(&traj, &model.params).unwrap();
        assert!((report.k - 2.0).abs() < 1e-12);
        assert!((report.r0 - 0.5).abs() < 1e-12);
        assert!(report.max_residual <= 1e-4, "residual {}", report.max_residual);
        assert_eq!(report.bound_satisfied, Some(true));
    }

    #[test]
    fn energy_check_rejects_varying_coefficients() {
        let mut params = params_with(&[]);
        params.beta_b = crate::model::CoefficientField::separable(
            1.0,
            crate::model::SpatialProfile::Flat,
            0.2,
            0.0,
            1.0,
        )
        .unwrap();
        let cfg = SolverConfig::stable_for(&params, 64, 1.0);
        let state = crate::solver::SimState::zero(params.h0, 64, 0.0);
        let traj = crate::solver::simulate_state(state, &params, &cfg).unwrap();
        assert!(matches!(
            energy_residual(&traj, &params),
            Err(ClassifyError::NotConstantCoefficients(_))
        ));
    }

    #[test]
    fn critical_mu_rejects_the_subcritical_regime() {
        let params = params_with(&[Tweak::Beta(0.25)]);
        let init = canonical_init(&params, 0.8, 0.6);
        let model = validate(params, init).unwrap();
        let cfg = SolverConfig::stable_for(&model.params, 96, 1.0);
        let err = critical_mu(
            &model,
            1e-3,
            1e2,
            0.01,
            &cfg,
            &coarse_spectral(),
            &ClassifyOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ClassifyError::NotInBistableRegime(_)));
    }

    #[test]
    fn sandwich_check_requires_a_spreading_run() {
        let params = params_with(&[Tweak::Beta(0.25)]);
        let init = canonical_init(&params, 0.8, 0.6);
        let model = validate(params, init).unwrap();
        let cfg = SolverConfig::stable_for(&model.params, 96, 1.0);
        let err = attractor_sandwich_check(
            &model,
            &cfg,
            &coarse_spectral(),
            &ClassifyOptions::default(),
            &PeriodicOptions::coarse(),
            &SandwichOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, ClassifyError::PrerequisiteFailed(_)));
    }
}
