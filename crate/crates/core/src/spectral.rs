//! Principal eigenvalues of the linear periodic-parabolic system and the
//! threshold quantities built on them.
//!
//! The eigenvalue `mu1(R, [0,b))` is extracted from the one-period solution
//! map of the unforced cooperative system: if `rho` is the map's dominant
//! multiplier then `mu1 = -ln(rho)/T`, and the converged iterate is the
//! positive eigenfunction. Power iteration with sup normalization converges
//! because the discrete map is positive; min/max componentwise ratios bracket
//! the multiplier, which lets root brackets discard candidates long before
//! full convergence.

use crate::model::{Grid1D, ModelParams};
use crate::numerics::{imex_tridiag, sup_diff, sup_norm, Tridiag};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("power iteration did not converge within {iterations} iterations (last change {last_change:e})")]
    NoConvergence { iterations: usize, last_change: f64 },
    #[error("the period map collapsed the iterate to zero; the grid is too coarse")]
    DegenerateMap,
    #[error("the period map produced non-finite values")]
    NonfiniteEvolution,
    #[error(
        "mu1 does not change sign over R in [{r_lo:e}, {r_hi:e}]: mu1 = {mu_lo:e} .. {mu_hi:e}"
    )]
    BracketFailure {
        r_lo: f64,
        r_hi: f64,
        mu_lo: f64,
        mu_hi: f64,
    },
    #[error("coefficients are not constant: {0}")]
    NotConstantCoefficients(String),
    #[error("no critical length: mu1(1, [0,{b_max})) = {mu1:e} >= 0, so the domain reproduction number stays at or below 1")]
    NoCriticalLength { b_max: f64, mu1: f64 },
    #[error("invalid spectral configuration: {0}")]
    InvalidConfiguration(String),
}

#[derive(Debug, Clone)]
pub struct SpectralOptions {
    pub n_cells: usize,
    pub steps_per_period: usize,
    /// convergence tolerance on both the multiplier change and the iterate
    /// sup distance
    pub power_tol: f64,
    pub max_power_iters: usize,
    /// bisection stops once |mu1| at the candidate root is below this
    pub root_tol: f64,
    /// tolerance on |R0 - 1| for the critical length
    pub length_tol: f64,
    /// geometric factor for the root bracket hunt
    pub bracket_factor: f64,
    pub max_bracket_expansions: u32,
    /// domain used as the half-line proxy; defaults to 64 h0
    pub b_max: Option<f64>,
    /// run an extrapolated restart every this many iterations (0 disables)
    pub accel_stride: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            n_cells: 256,
            steps_per_period: 512,
            power_tol: 1e-9,
            max_power_iters: 10_000,
            root_tol: 1e-8,
            length_tol: 1e-6,
            bracket_factor: 4.0,
            max_bracket_expansions: 12,
            b_max: None,
            accel_stride: 24,
        }
    }
}

impl SpectralOptions {
    /// Cheaper resolution for sweeps and smoke tests.
    pub fn coarse() -> Self {
        Self {
            n_cells: 128,
            steps_per_period: 256,
            ..Self::default()
        }
    }
}

/// Converged principal eigenpair of the period map.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub mu1: f64,
    /// dominant multiplier of the one-period map, `exp(-mu1 T)`
    pub rho: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct R0Result {
    pub value: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// mu1 at the returned root
    pub mu1_residual: f64,
    pub eigen: EigenResult,
}

#[derive(Debug, Clone)]
pub struct CriticalLength {
    pub l0: f64,
    pub iterations: usize,
    pub r0_at_l0: f64,
    pub b_max: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RiskPoint {
    pub t: f64,
    pub h: f64,
    pub r0: f64,
}

/// The eigenpair extended over one full period, scaled to be time-periodic.
#[derive(Debug, Clone)]
pub struct EigenField {
    pub times: Vec<f64>,
    /// `phi[level][node]`
    pub phi: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
}

/// One-period evolution of the linear system on `[0, b]` with a zero-flux
/// left end and a Dirichlet right end. Coefficient samples and the implicit
/// factorizations are shared across applications; only the coupling scale
/// `1/R` varies.
pub(crate) struct PeriodEvolver {
    grid: Grid1D,
    dt: f64,
    steps: usize,
    d_m: f64,
    gamma: Vec<f64>,
    coup_u: Vec<f64>,
    coup_v: Vec<f64>,
    trid_u: Tridiag,
    trid_v: Tridiag,
    scratch_u: Vec<f64>,
    scratch_v: Vec<f64>,
}

impl PeriodEvolver {
    pub fn new(params: &ModelParams, b: f64, opts: &SpectralOptions) -> Result<Self, SpectralError> {
        if !(b > 0.0) {
            return Err(SpectralError::InvalidConfiguration(
                "domain length must be positive".into(),
            ));
        }
        let grid = Grid1D::new(0.0, b, opts.n_cells)
            .map_err(|e| SpectralError::InvalidConfiguration(e.to_string()))?;
        let steps = opts.steps_per_period;
        if steps < 8 {
            return Err(SpectralError::InvalidConfiguration(
                "steps_per_period must be at least 8".into(),
            ));
        }
        let dt = params.period / steps as f64;
        if dt * params.reaction_lipschitz() >= 1.0 {
            return Err(SpectralError::InvalidConfiguration(format!(
                "steps_per_period = {steps} is too coarse for the reaction rates"
            )));
        }

        let nodes = grid.n_nodes();
        let xs = grid.nodes();
        let mut gamma = vec![0.0; steps * nodes];
        let mut coup_u = vec![0.0; steps * nodes];
        let mut coup_v = vec![0.0; steps * nodes];
        let mut beta_row = vec![0.0; nodes];
        for n in 0..steps {
            let t = n as f64 * dt;
            let off = n * nodes;
            params
                .gamma_b
                .eval_into(&xs, t, &mut gamma[off..off + nodes]);
            params.beta_b.eval_into(&xs, t, &mut beta_row);
            for i in 0..nodes {
                coup_u[off + i] = params.alpha_b * beta_row[i];
                coup_v[off + i] = params.alpha_m * beta_row[i] * params.a_m / params.n_b;
            }
        }

        let dx = grid.spacing();
        let trid_u = imex_tridiag(nodes, dt * params.d1 / (dx * dx), 0.0);
        let trid_v = imex_tridiag(nodes, dt * params.d2 / (dx * dx), 0.0);

        Ok(Self {
            grid,
            dt,
            steps,
            d_m: params.d_m,
            gamma,
            coup_u,
            coup_v,
            trid_u,
            trid_v,
            scratch_u: vec![0.0; nodes],
            scratch_v: vec![0.0; nodes],
        })
    }

    pub fn nodes(&self) -> usize {
        self.grid.n_nodes()
    }

    pub fn period(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    /// Apply the one-period map in place. When `record` is given it receives
    /// the `steps + 1` time levels including the initial one.
    pub fn apply(
        &mut self,
        inv_r: f64,
        phi: &mut Vec<f64>,
        psi: &mut Vec<f64>,
        mut record: Option<&mut Vec<(Vec<f64>, Vec<f64>)>>,
    ) {
        let nodes = self.nodes();
        let last = nodes - 1;
        if let Some(rec) = record.as_deref_mut() {
            rec.clear();
            rec.push((phi.clone(), psi.clone()));
        }
        for n in 0..self.steps {
            let off = n * nodes;
            for i in 0..last {
                let p = phi[i];
                let q = psi[i];
                self.scratch_u[i] =
                    p + self.dt * (-self.gamma[off + i] * p + inv_r * self.coup_u[off + i] * q);
                self.scratch_v[i] =
                    q + self.dt * (-self.d_m * q + inv_r * self.coup_v[off + i] * p);
            }
            self.scratch_u[last] = 0.0;
            self.scratch_v[last] = 0.0;
            self.trid_u.solve_into(&mut self.scratch_u);
            self.trid_v.solve_into(&mut self.scratch_v);
            std::mem::swap(phi, &mut self.scratch_u);
            std::mem::swap(psi, &mut self.scratch_v);
            if let Some(rec) = record.as_deref_mut() {
                rec.push((phi.clone(), psi.clone()));
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PowerMode {
    /// iterate to the double convergence criterion
    Full,
    /// allow an early exit once the multiplier is bracketed away from 1
    SignProbe,
}

#[derive(Debug, Clone)]
pub(crate) struct PowerOutcome {
    pub rho: f64,
    pub mu1: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// true when only the sign of mu1 was certified (mu1 is then approximate)
    pub sign_only: bool,
}

impl PowerOutcome {
    fn into_eigen(self) -> EigenResult {
        EigenResult {
            mu1: self.mu1,
            rho: self.rho,
            phi: self.phi,
            psi: self.psi,
            iterations: self.iterations,
            residual: self.residual,
        }
    }
}

fn default_start(grid: &Grid1D) -> Vec<f64> {
    let b = grid.end();
    (0..grid.n_nodes())
        .map(|i| (std::f64::consts::FRAC_PI_2 * grid.node(i) / b).cos().max(0.0))
        .collect()
}

pub(crate) fn power_iteration(
    ev: &mut PeriodEvolver,
    inv_r: f64,
    opts: &SpectralOptions,
    start: Option<(&[f64], &[f64])>,
    mode: PowerMode,
) -> Result<PowerOutcome, SpectralError> {
    let nodes = ev.nodes();
    let period = ev.period();
    // sign probes must not fire inside the root tolerance band around rho = 1
    let probe_hi = (-5.0 * opts.root_tol * period).exp();
    let probe_lo = (5.0 * opts.root_tol * period).exp();

    let mut phi;
    let mut psi;
    match start {
        Some((p, q)) if p.len() == nodes && q.len() == nodes && sup_norm(p).max(sup_norm(q)) > 0.0 => {
            phi = p.to_vec();
            psi = q.to_vec();
        }
        _ => {
            phi = default_start(&ev.grid());
            psi = default_start(&ev.grid());
        }
    }
    let scale = sup_norm(&phi).max(sup_norm(&psi));
    phi.iter_mut().for_each(|x| *x /= scale);
    psi.iter_mut().for_each(|x| *x /= scale);

    let mut prev_phi = phi.clone();
    let mut prev_psi = psi.clone();
    let mut prev_rho = f64::NAN;
    let mut last_change = f64::NAN;
    // rolling window of normalized iterates for the extrapolated restart
    let mut window: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut cooldown = 0usize;

    for k in 1..=opts.max_power_iters {
        ev.apply(inv_r, &mut phi, &mut psi, None);
        let sup = sup_norm(&phi).max(sup_norm(&psi));
        if !sup.is_finite() {
            return Err(SpectralError::NonfiniteEvolution);
        }
        if sup == 0.0 {
            return Err(SpectralError::DegenerateMap);
        }
        let rho = sup; // previous iterate was sup-normalized

        if mode == PowerMode::SignProbe && cooldown == 0 {
            if let Some((lo, hi)) = multiplier_bracket(&prev_phi, &prev_psi, &phi, &psi) {
                if hi < probe_hi || lo > probe_lo {
                    let mu_est = -rho.ln() / period;
                    return Ok(PowerOutcome {
                        rho,
                        mu1: mu_est,
                        phi,
                        psi,
                        iterations: k,
                        residual: f64::NAN,
                        sign_only: true,
                    });
                }
            }
        }

        let inv = 1.0 / sup;
        phi.iter_mut().for_each(|x| *x *= inv);
        psi.iter_mut().for_each(|x| *x *= inv);
        let change = sup_diff(&phi, &prev_phi).max(sup_diff(&psi, &prev_psi));
        last_change = change;

        if cooldown == 0
            && (rho - prev_rho).abs() <= opts.power_tol * rho.max(1e-300)
            && change <= opts.power_tol
        {
            return Ok(PowerOutcome {
                rho,
                mu1: -rho.ln() / period,
                phi,
                psi,
                iterations: k,
                residual: rho * change,
                sign_only: false,
            });
        }

        prev_rho = rho;
        prev_phi.copy_from_slice(&phi);
        prev_psi.copy_from_slice(&psi);
        if cooldown > 0 {
            cooldown -= 1;
        }

        if opts.accel_stride > 0 {
            window.push((phi.clone(), psi.clone()));
            if window.len() > 3 {
                window.remove(0);
            }
            if k % opts.accel_stride == 0 && window.len() == 3 {
                if let Some((ephi, epsi)) = extrapolate(&window) {
                    phi = ephi;
                    psi = epsi;
                    prev_phi.copy_from_slice(&phi);
                    prev_psi.copy_from_slice(&psi);
                    prev_rho = f64::NAN;
                    cooldown = 2;
                    window.clear();
                }
            }
        }
    }

    Err(SpectralError::NoConvergence {
        iterations: opts.max_power_iters,
        last_change,
    })
}

/// Componentwise min/max ratios of image over argument; these bracket the
/// dominant multiplier of the nonnegative period map. The Dirichlet node is
/// excluded (it is identically zero).
fn multiplier_bracket(
    prev_phi: &[f64],
    prev_psi: &[f64],
    phi: &[f64],
    psi: &[f64],
) -> Option<(f64, f64)> {
    let last = prev_phi.len() - 1;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (p_old, p_new) in prev_phi[..last]
        .iter()
        .zip(&phi[..last])
        .chain(prev_psi[..last].iter().zip(&psi[..last]))
    {
        if *p_old <= 0.0 {
            return None;
        }
        let r = p_new / p_old;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Some((lo, hi))
}

/// One-step vector extrapolation assuming a single dominant error mode with
/// contraction rate estimated from the last three iterates. Negative entries
/// are clamped away so the result stays in the positive cone.
fn extrapolate(window: &[(Vec<f64>, Vec<f64>)]) -> Option<(Vec<f64>, Vec<f64>)> {
    let (w0, w1, w2) = (&window[0], &window[1], &window[2]);
    let mut num = 0.0;
    let mut den = 0.0;
    for c in 0..2 {
        let (a0, a1, a2) = match c {
            0 => (&w0.0, &w1.0, &w2.0),
            _ => (&w0.1, &w1.1, &w2.1),
        };
        for i in 0..a0.len() {
            let d1 = a1[i] - a0[i];
            let d2 = a2[i] - a1[i];
            num += d2 * d1;
            den += d1 * d1;
        }
    }
    if den == 0.0 || !num.is_finite() {
        return None;
    }
    let rate = num / den;
    if !(0.2..0.9995).contains(&rate) {
        return None;
    }
    let gain = rate / (1.0 - rate);
    let build = |curr: &[f64], prev: &[f64]| -> Vec<f64> {
        curr.iter()
            .zip(prev)
            .map(|(c, p)| (c + gain * (c - p)).max(0.0))
            .collect()
    };
    let mut ephi = build(&w2.0, &w1.0);
    let mut epsi = build(&w2.1, &w1.1);
    let sup = sup_norm(&ephi).max(sup_norm(&epsi));
    if !(sup.is_finite() && sup > 0.0) {
        return None;
    }
    ephi.iter_mut().for_each(|x| *x /= sup);
    epsi.iter_mut().for_each(|x| *x /= sup);
    Some((ephi, epsi))
}

/// Principal eigenvalue `mu1(R, [0,b))` of the linear periodic-parabolic
/// system, with the positive period-map eigenfunction.
pub fn principal_eigenvalue(
    r: f64,
    b: f64,
    params: &ModelParams,
    opts: &SpectralOptions,
) -> Result<EigenResult, SpectralError> {
    if !(r > 0.0) {
        return Err(SpectralError::InvalidConfiguration(
            "R must be positive".into(),
        ));
    }
    let mut ev = PeriodEvolver::new(params, b, opts)?;
    power_iteration(&mut ev, 1.0 / r, opts, None, PowerMode::Full).map(PowerOutcome::into_eigen)
}

/// `lambda0([0,b))`: the sign-linked eigenvalue, equal to `mu1(1, [0,b))`.
pub fn lambda0(b: f64, params: &ModelParams, opts: &SpectralOptions) -> Result<EigenResult, SpectralError> {
    principal_eigenvalue(1.0, b, params, opts)
}

/// Domain reproduction number: the unique positive root of
/// `R -> mu1(R, [0,b))`, found by sign-probe bisection after a geometric
/// bracket hunt from `R = 1`.
pub fn r0_domain(b: f64, params: &ModelParams, opts: &SpectralOptions) -> Result<R0Result, SpectralError> {
    let mut ev = PeriodEvolver::new(params, b, opts)?;
    let mut warm: Option<(Vec<f64>, Vec<f64>)> = None;

    let mut eval = |r: f64,
                    mode: PowerMode,
                    warm: &mut Option<(Vec<f64>, Vec<f64>)>|
     -> Result<PowerOutcome, SpectralError> {
        let start = warm.as_ref().map(|(p, q)| (p.as_slice(), q.as_slice()));
        let out = power_iteration(&mut ev, 1.0 / r, opts, start, mode)?;
        *warm = Some((out.phi.clone(), out.psi.clone()));
        Ok(out)
    };

    let at_one = eval(1.0, PowerMode::Full, &mut warm)?;
    if at_one.mu1.abs() < opts.root_tol {
        return Ok(R0Result {
            value: 1.0,
            bracket: (1.0, 1.0),
            iterations: 0,
            mu1_residual: at_one.mu1,
            eigen: at_one.into_eigen(),
        });
    }

    // mu1 is increasing in R, so expand away from 1 until the sign flips
    let expanding_up = at_one.mu1 < 0.0;
    let factor = opts.bracket_factor;
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut bracketed = false;
    let mut last_mu = at_one.mu1;
    for _ in 0..opts.max_bracket_expansions {
        if expanding_up {
            hi *= factor;
        } else {
            lo /= factor;
        }
        let r = if expanding_up { hi } else { lo };
        let out = eval(r, PowerMode::SignProbe, &mut warm)?;
        last_mu = out.mu1;
        if !out.sign_only && out.mu1.abs() < opts.root_tol {
            return Ok(R0Result {
                value: r,
                bracket: (lo, hi),
                iterations: 0,
                mu1_residual: out.mu1,
                eigen: out.into_eigen(),
            });
        }
        let positive = out.mu1 > 0.0;
        if positive == expanding_up {
            bracketed = true;
            break;
        }
    }
    if !bracketed {
        let (r_lo, r_hi) = (lo, hi);
        let (mu_lo, mu_hi) = if expanding_up {
            (at_one.mu1, last_mu)
        } else {
            (last_mu, at_one.mu1)
        };
        return Err(SpectralError::BracketFailure {
            r_lo,
            r_hi,
            mu_lo,
            mu_hi,
        });
    }

    for iteration in 1..=200 {
        let mid = (lo * hi).sqrt();
        let out = eval(mid, PowerMode::SignProbe, &mut warm)?;
        if !out.sign_only && out.mu1.abs() < opts.root_tol {
            return Ok(R0Result {
                value: mid,
                bracket: (lo, hi),
                iterations: iteration,
                mu1_residual: out.mu1,
                eigen: out.into_eigen(),
            });
        }
        if out.mu1 > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(SpectralError::NoConvergence {
        iterations: 200,
        last_change: f64::NAN,
    })
}

/// Closed-form reproduction number on `[0, b)` for constant coefficients.
pub fn r0_closed_form(b: f64, params: &ModelParams) -> Result<f64, SpectralError> {
    let (beta, gamma) = constant_rates(params)?;
    let q = std::f64::consts::FRAC_PI_2 / b;
    Ok(r0_from_mode(q, beta, gamma, params))
}

/// Large-domain limit of the closed form: the reproduction number of the
/// spatially independent system.
pub fn r0_limit_closed_form(params: &ModelParams) -> Result<f64, SpectralError> {
    let (beta, gamma) = constant_rates(params)?;
    Ok(r0_from_mode(0.0, beta, gamma, params))
}

fn constant_rates(params: &ModelParams) -> Result<(f64, f64), SpectralError> {
    match (
        params.beta_b.constant_value(),
        params.gamma_b.constant_value(),
    ) {
        (Some(beta), Some(gamma)) => Ok((beta, gamma)),
        (None, _) => Err(SpectralError::NotConstantCoefficients(
            "beta_b varies in space or time".into(),
        )),
        (_, None) => Err(SpectralError::NotConstantCoefficients(
            "gamma_b varies in space or time".into(),
        )),
    }
}

fn r0_from_mode(q: f64, beta: f64, gamma: f64, params: &ModelParams) -> f64 {
    let numerator = params.a_m * params.alpha_b * params.alpha_m * beta * beta;
    let denominator =
        params.n_b * (params.d1 * q * q + gamma) * (params.d2 * q * q + params.d_m);
    (numerator / denominator).sqrt()
}

/// Critical domain length with `R0 = 1`, located by bisecting the sign of
/// `mu1(1, [0,b))` (the two vanish together) and verified with a full root
/// solve at the end.
pub fn critical_length(params: &ModelParams, opts: &SpectralOptions) -> Result<CriticalLength, SpectralError> {
    let b_max = opts.b_max.unwrap_or(64.0 * params.h0);

    let probe = |b: f64| -> Result<PowerOutcome, SpectralError> {
        let mut ev = PeriodEvolver::new(params, b, opts)?;
        power_iteration(&mut ev, 1.0, opts, None, PowerMode::SignProbe)
    };

    let at_max = probe(b_max)?;
    if at_max.mu1 >= 0.0 {
        return Err(SpectralError::NoCriticalLength {
            b_max,
            mu1: at_max.mu1,
        });
    }

    let mut hi = b_max;
    let mut lo = 0.5 * b_max;
    let mut iterations = 0usize;
    loop {
        let out = probe(lo)?;
        iterations += 1;
        if out.mu1 >= 0.0 {
            break;
        }
        hi = lo;
        lo *= 0.5;
        if lo < 1e-12 * b_max {
            return Err(SpectralError::InvalidConfiguration(
                "mu1(1, b) stayed negative down to vanishing domain lengths".into(),
            ));
        }
    }

    // bisect on the eigenvalue sign, then confirm the reproduction number
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let out = probe(mid)?;
        iterations += 1;
        if !out.sign_only && out.mu1.abs() < opts.root_tol {
            break;
        }
        if out.mu1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut l0 = mid;
    for _ in 0..40 {
        let r0 = r0_domain(l0, params, opts)?;
        iterations += r0.iterations;
        if (r0.value - 1.0).abs() <= opts.length_tol {
            return Ok(CriticalLength {
                l0,
                iterations,
                r0_at_l0: r0.value,
                b_max,
            });
        }
        if r0.value > 1.0 {
            hi = l0;
        } else {
            lo = l0;
        }
        l0 = 0.5 * (lo + hi);
    }
    Err(SpectralError::NoConvergence {
        iterations,
        last_change: f64::NAN,
    })
}

/// Map a sampled front history to the risk index `t -> R0([0, h(t)))`,
/// reusing roots for repeated front positions.
pub fn risk_index(
    front: &[(f64, f64)],
    params: &ModelParams,
    opts: &SpectralOptions,
) -> Result<Vec<RiskPoint>, SpectralError> {
    let mut cache: Vec<(f64, f64)> = Vec::new();
    let mut out = Vec::with_capacity(front.len());
    for &(t, h) in front {
        if !(h > 0.0) {
            return Err(SpectralError::InvalidConfiguration(format!(
                "front position must be positive, got {h} at t = {t}"
            )));
        }
        let cached = cache
            .iter()
            .find(|(hc, _)| (hc - h).abs() <= 1e-9 * h.max(1.0))
            .map(|&(_, r)| r);
        let r0 = match cached {
            Some(r) => r,
            None => {
                let r = r0_domain(h, params, opts)?.value;
                cache.push((h, r));
                r
            }
        };
        out.push(RiskPoint { t, h, r0 });
    }
    Ok(out)
}

/// Full-period eigenfunction of the system at coupling `1/R`, scaled so the
/// sampled pair is time-periodic. Used as the seed of the monotone iteration.
pub fn periodic_eigen_field(
    r: f64,
    b: f64,
    params: &ModelParams,
    opts: &SpectralOptions,
) -> Result<(EigenResult, EigenField), SpectralError> {
    if !(r > 0.0) {
        return Err(SpectralError::InvalidConfiguration(
            "R must be positive".into(),
        ));
    }
    let mut ev = PeriodEvolver::new(params, b, opts)?;
    let out = power_iteration(&mut ev, 1.0 / r, opts, None, PowerMode::Full)?;
    let mut phi = out.phi.clone();
    let mut psi = out.psi.clone();
    let mut levels = Vec::with_capacity(ev.steps + 1);
    ev.apply(1.0 / r, &mut phi, &mut psi, Some(&mut levels));

    let dt = ev.dt;
    let mut times = Vec::with_capacity(levels.len());
    let mut phis = Vec::with_capacity(levels.len());
    let mut psis = Vec::with_capacity(levels.len());
    for (n, (mut p, mut q)) in levels.into_iter().enumerate() {
        let t = n as f64 * dt;
        let scale = (out.mu1 * t).exp();
        p.iter_mut().for_each(|x| *x *= scale);
        q.iter_mut().for_each(|x| *x *= scale);
        times.push(t);
        phis.push(p);
        psis.push(q);
    }
    Ok((
        out.into_eigen(),
        EigenField {
            times,
            phi: phis,
            psi: psis,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{canonical_params, params_with, Tweak};
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Independent oracle for constant coefficients: on `[0, b)` the lowest
    /// spatial mode is `cos(q x)` with `q = pi/(2b)`, so the eigenvalue is
    /// the principal eigenvalue of the 2x2 matrix
    /// `[[q^2 D1 + gamma, -alpha_b beta / R], [-alpha_m beta A_m/(N_b R), q^2 D2 + d_m]]`.
    fn matrix_oracle_mu1(r: f64, b: f64, params: &ModelParams) -> f64 {
        let beta = params.beta_b.constant_value().unwrap();
        let gamma = params.gamma_b.constant_value().unwrap();
        let q = FRAC_PI_2 / b;
        let a = q * q * params.d1 + gamma;
        let d = q * q * params.d2 + params.d_m;
        let off1 = params.alpha_b * beta / r;
        let off2 = params.alpha_m * beta * params.a_m / (params.n_b * r);
        0.5 * (a + d) - (0.25 * (a - d) * (a - d) + off1 * off2).sqrt()
    }

    fn opts() -> SpectralOptions {
        SpectralOptions {
            n_cells: 128,
            steps_per_period: 512,
            ..SpectralOptions::default()
        }
    }

    #[test]
    fn eigenvalue_matches_the_matrix_oracle() {
        let params = canonical_params();
        let b = FRAC_PI_2;
        for (r, expected) in [(1.0, 0.75), (0.5, 0.25), (0.4, 0.0)] {
            assert!((matrix_oracle_mu1(r, b, &params) - expected).abs() < 1e-12);
            let eig = principal_eigenvalue(r, b, &params, &opts()).unwrap();
            assert!(
                (eig.mu1 - expected).abs() < 2.5e-3,
                "mu1({r}) = {} vs oracle {expected}",
                eig.mu1
            );
            assert!((eig.mu1 + eig.rho.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenfunction_is_positive_inside_and_zero_at_the_front() {
        let params = canonical_params();
        let eig = principal_eigenvalue(1.0, FRAC_PI_2, &params, &opts()).unwrap();
        let n = eig.phi.len() - 1;
        assert_eq!(eig.phi[n], 0.0);
        assert_eq!(eig.psi[n], 0.0);
        for i in 0..n {
            assert!(eig.phi[i] > 0.0, "phi[{i}] = {}", eig.phi[i]);
            assert!(eig.psi[i] > 0.0);
        }
        assert!(eig.residual < 1e-8);
    }

    #[test]
    fn domain_reproduction_number_matches_the_closed_form() {
        let params = canonical_params();
        for (b, expected) in [(FRAC_PI_2, 0.4), (PI, 1.0)] {
            let closed = r0_closed_form(b, &params).unwrap();
            assert!((closed - expected).abs() < 1e-12);
            let numeric = r0_domain(b, &params, &opts()).unwrap();
            assert!(
                (numeric.value - closed).abs() / closed < 1e-2,
                "b = {b}: numeric {} vs closed {closed}",
                numeric.value
            );
            assert!(numeric.mu1_residual.abs() < 1e-8);
        }
    }

    #[test]
    fn closed_form_requires_constant_coefficients() {
        let mut params = canonical_params();
        params.beta_b = crate::model::CoefficientField::separable(
            1.0,
            crate::model::SpatialProfile::Flat,
            0.3,
            0.0,
            1.0,
        )
        .unwrap();
        assert!(matches!(
            r0_closed_form(1.0, &params),
            Err(SpectralError::NotConstantCoefficients(_))
        ));
    }

    #[test]
    fn closed_form_limit_is_the_spatially_independent_number() {
        let params = canonical_params();
        assert!((r0_limit_closed_form(&params).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sign_linked_eigenvalue_matches_the_oracle_and_the_sign_relation() {
        let params = canonical_params();
        for (b, expected) in [(FRAC_PI_2, 0.75), (PI, 0.0), (2.0 * PI, -0.1875)] {
            assert!((matrix_oracle_mu1(1.0, b, &params) - expected).abs() < 1e-12);
            let eig = lambda0(b, &params, &opts()).unwrap();
            assert!(
                (eig.mu1 - expected).abs() < 2.5e-3,
                "lambda0({b}) = {} vs {expected}",
                eig.mu1
            );
            let r0 = r0_closed_form(b, &params).unwrap();
            if (1.0 - r0).abs() > 1e-6 {
                assert_eq!((1.0 - r0).signum(), eig.mu1.signum());
            }
        }
    }

    #[test]
    fn critical_length_matches_the_closed_form_root() {
        let params = canonical_params();
        let result = critical_length(&params, &opts()).unwrap();
        assert!(
            (result.l0 - PI).abs() / PI < 5e-3,
            "L0 = {} vs pi",
            result.l0
        );
        assert!((result.r0_at_l0 - 1.0).abs() < 1e-6);

        // stronger transmission shortens the critical length:
        // (q^2 + 1/4)^2 = 1 at the root gives q = sqrt(3)/2
        let strong = params_with(&[Tweak::Beta(2.0)]);
        let expected = FRAC_PI_2 / (0.75_f64).sqrt();
        let result = critical_length(&strong, &opts()).unwrap();
        assert!((result.l0 - expected).abs() / expected < 5e-3);
    }

    #[test]
    fn subcritical_transmission_has_no_critical_length() {
        let weak = params_with(&[Tweak::Beta(0.25)]);
        match critical_length(&weak, &opts()) {
            Err(SpectralError::NoCriticalLength { mu1, .. }) => assert!(mu1 > 0.0),
            other => panic!("expected NoCriticalLength, got {other:?}"),
        }
    }

    #[test]
    fn risk_index_is_monotone_and_caches_repeats() {
        let params = canonical_params();
        let front = [
            (0.0, FRAC_PI_2),
            (1.0, 2.0),
            (2.0, PI),
            (3.0, PI),
            (4.0, 4.5),
        ];
        let points = risk_index(&front, &params, &opts()).unwrap();
        assert!((points[0].r0 - 0.4).abs() < 0.4 * 1e-2);
        assert!((points[2].r0 - 1.0).abs() < 1e-2);
        assert_eq!(points[2].r0, points[3].r0);
        for w in points.windows(2) {
            if w[1].h > w[0].h {
                assert!(w[1].r0 > w[0].r0);
            }
        }
    }

    #[test]
    fn eigenvalues_are_monotone_in_coupling_and_domain() {
        let params = params_with(&[Tweak::D1(0.8), Tweak::Gamma(0.35)]);
        let o = SpectralOptions::coarse();
        let mut prev = f64::NEG_INFINITY;
        for r in [0.3, 0.7, 1.4, 3.0] {
            let mu = principal_eigenvalue(r, 2.0, &params, &o).unwrap().mu1;
            assert!(mu > prev + 1e-9, "mu1 must increase in R: {mu} after {prev}");
            prev = mu;
        }
        let mut prev = f64::INFINITY;
        for b in [0.8, 1.4, 2.5, 4.0] {
            let mu = principal_eigenvalue(1.0, b, &params, &o).unwrap().mu1;
            assert!(mu < prev - 1e-9, "mu1 must decrease in b: {mu} after {prev}");
            prev = mu;
        }
    }

    #[test]
    fn periodic_eigen_field_wraps_in_time() {
        let params = params_with(&[Tweak::H0(2.0 * PI)]);
        let (eig, field) = periodic_eigen_field(1.0, 2.0 * PI, &params, &opts()).unwrap();
        assert!(eig.mu1 < 0.0);
        let first = &field.phi[0];
        let last = field.phi.last().unwrap();
        let wrap = first
            .iter()
            .zip(last)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(wrap < 1e-7, "periodic wrap defect {wrap}");
    }

    #[test]
    fn time_varying_coefficients_shift_the_eigenvalue_continuously() {
        // a temporal modulation of the biting rate must stay between the
        // frozen-coefficient extremes
        let base = canonical_params();
        let lo_params = params_with(&[Tweak::Beta(0.7)]);
        let hi_params = params_with(&[Tweak::Beta(1.3)]);
        let mut varying = base.clone();
        varying.beta_b = crate::model::CoefficientField::separable(
            1.0,
            crate::model::SpatialProfile::Flat,
            0.3,
            0.0,
            1.0,
        )
        .unwrap();
        let o = SpectralOptions::coarse();
        let mu_lo = principal_eigenvalue(1.0, 2.0, &lo_params, &o).unwrap().mu1;
        let mu_hi = principal_eigenvalue(1.0, 2.0, &hi_params, &o).unwrap().mu1;
        let mu_var = principal_eigenvalue(1.0, 2.0, &varying, &o).unwrap().mu1;
        assert!(mu_var < mu_lo && mu_var > mu_hi);
    }
}
