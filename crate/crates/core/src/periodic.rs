//! Time-periodic attractors on bounded domains. The minimal solution grows
//! out of a small multiple of the principal eigenfunction, the maximal one
//! shrinks from the carrying pair; both move monotonically under a shifted
//! linear sweep whose source is frozen at the previous iterate, and the
//! half-line envelopes are approximated by letting the domain length grow at
//! fixed resolution per unit length.

use crate::model::{Grid1D, ModelParams};
use crate::numerics::{imex_tridiag, Tridiag};
use crate::spectral::{critical_length, periodic_eigen_field, SpectralError, SpectralOptions};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PeriodicError {
    #[error("monotone iteration did not converge within {max_outer} sweeps (residual {residual:e})")]
    MaxIterations { max_outer: usize, residual: f64 },
    #[error("iterate lost monotonicity at sweep {outer} by {violation:e}; the shift constants or the grid are too coarse")]
    NonMonotoneIterate { outer: usize, violation: f64 },
    #[error("prerequisite failed: {0}")]
    PrerequisiteFailed(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid periodic configuration: {0}")]
    InvalidConfiguration(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    Minimal,
    Maximal,
}

#[derive(Debug, Clone)]
pub struct PeriodicOptions {
    /// grid nodes per unit length; domain lengths snap to this lattice so
    /// solutions for different lengths share nodes
    pub nodes_per_unit: usize,
    pub steps_per_period: usize,
    /// sup-norm change between sweeps at convergence
    pub tol: f64,
    pub max_outer: usize,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        Self {
            nodes_per_unit: 64,
            steps_per_period: 512,
            tol: 1e-8,
            max_outer: 1000,
        }
    }
}

impl PeriodicOptions {
    pub fn coarse() -> Self {
        Self {
            nodes_per_unit: 32,
            steps_per_period: 256,
            ..Self::default()
        }
    }

    fn spectral_for(&self, n_cells: usize) -> SpectralOptions {
        SpectralOptions {
            n_cells,
            steps_per_period: self.steps_per_period,
            ..SpectralOptions::default()
        }
    }
}

/// A converged T-periodic solution sampled on `grid x time levels`.
#[derive(Debug, Clone)]
pub struct PeriodicSolution {
    /// snapped domain length
    pub l: f64,
    pub kind: SolutionKind,
    pub xs: Vec<f64>,
    pub times: Vec<f64>,
    /// `u[level][node]`
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub outer_iterations: usize,
    pub residual: f64,
    /// true when the subcritical minimal problem only supports zero
    pub trivial_zero: bool,
    /// shift constants actually used in the sweeps
    pub shift_k1: f64,
    pub shift_k2: f64,
}

impl PeriodicSolution {
    pub fn sup_u(&self) -> f64 {
        self.u
            .iter()
            .flat_map(|row| row.iter())
            .fold(0.0_f64, |m, v| m.max(*v))
    }

    pub fn sup_v(&self) -> f64 {
        self.v
            .iter()
            .flat_map(|row| row.iter())
            .fold(0.0_f64, |m, v| m.max(*v))
    }

    /// Sup distance between the first and last time slice.
    pub fn periodicity_defect(&self) -> f64 {
        let d_u = crate::numerics::sup_diff(&self.u[0], self.u.last().expect("levels"));
        let d_v = crate::numerics::sup_diff(&self.v[0], self.v.last().expect("levels"));
        d_u.max(d_v)
    }
}

struct Sweeper {
    grid: Grid1D,
    dt: f64,
    steps: usize,
    k1: f64,
    k2: f64,
    diffusion_u: f64,
    diffusion_v: f64,
    gamma: Vec<f64>,
    beta: Vec<f64>,
    trid_u: Tridiag,
    trid_v: Tridiag,
    alpha_b: f64,
    alpha_m: f64,
    n_b: f64,
    a_m: f64,
    d_m: f64,
}

type Levels = Vec<Vec<f64>>;

impl Sweeper {
    fn new(params: &ModelParams, l: f64, opts: &PeriodicOptions) -> Result<(Self, usize), PeriodicError> {
        if !(l > 0.0) {
            return Err(PeriodicError::InvalidConfiguration(
                "domain length must be positive".into(),
            ));
        }
        let n_cells = ((l * opts.nodes_per_unit as f64).round() as usize).max(16);
        let l_snap = n_cells as f64 / opts.nodes_per_unit as f64;
        let grid = Grid1D::new(0.0, l_snap, n_cells)
            .map_err(|e| PeriodicError::InvalidConfiguration(e.to_string()))?;
        let steps = opts.steps_per_period;
        let dt = params.period / steps as f64;
        if dt * params.reaction_lipschitz() >= 1.0 {
            return Err(PeriodicError::InvalidConfiguration(format!(
                "steps_per_period = {steps} is too coarse for the reaction rates"
            )));
        }

        let beta_max = params.beta_b.bounds().1;
        let gamma_max = params.gamma_b.bounds().1;
        // dominating shifts: the shifted sources are nondecreasing in both
        // components over the invariant box
        let k1 = gamma_max + params.alpha_b * beta_max * (params.a_m / params.n_b + 1.0);
        let k2 = params.d_m + params.alpha_m * beta_max * (params.a_m / params.n_b + 1.0);

        let nodes = grid.n_nodes();
        let xs = grid.nodes();
        let mut gamma = vec![0.0; steps * nodes];
        let mut beta = vec![0.0; steps * nodes];
        for n in 0..steps {
            let t = n as f64 * dt;
            let off = n * nodes;
            params
                .gamma_b
                .eval_into(&xs, t, &mut gamma[off..off + nodes]);
            params.beta_b.eval_into(&xs, t, &mut beta[off..off + nodes]);
        }

        let dx = grid.spacing();
        let trid_u = imex_tridiag(nodes, dt * params.d1 / (dx * dx), dt * k1);
        let trid_v = imex_tridiag(nodes, dt * params.d2 / (dx * dx), dt * k2);

        Ok((
            Self {
                grid,
                dt,
                steps,
                k1,
                k2,
                diffusion_u: params.d1,
                diffusion_v: params.d2,
                gamma,
                beta,
                trid_u,
                trid_v,
                alpha_b: params.alpha_b,
                alpha_m: params.alpha_m,
                n_b: params.n_b,
                a_m: params.a_m,
                d_m: params.d_m,
            },
            n_cells,
        ))
    }

    fn shifted_sources(&self, n: usize, u: &[f64], v: &[f64], f_u: &mut [f64], f_v: &mut [f64]) {
        let nodes = self.grid.n_nodes();
        let off = n * nodes;
        for i in 0..nodes {
            let b = self.beta[off + i];
            let g = self.gamma[off + i];
            f_u[i] = self.k1 * u[i] - g * u[i]
                + self.alpha_b * b * (self.n_b - u[i]) * v[i] / self.n_b;
            f_v[i] = self.k2 * v[i] - self.d_m * v[i]
                + self.alpha_m * b * (self.a_m - v[i]) * u[i] / self.n_b;
        }
    }

    /// One outer sweep: solve the shifted linear problems over a period with
    /// sources frozen at the previous iterate and the previous terminal slice
    /// as the initial slice.
    fn sweep(&self, prev_u: &Levels, prev_v: &Levels, bc: (f64, f64)) -> (Levels, Levels) {
        let nodes = self.grid.n_nodes();
        let last = nodes - 1;
        let mut next_u: Levels = Vec::with_capacity(self.steps + 1);
        let mut next_v: Levels = Vec::with_capacity(self.steps + 1);
        next_u.push(prev_u[self.steps].clone());
        next_v.push(prev_v[self.steps].clone());

        let mut f_u = vec![0.0; nodes];
        let mut f_v = vec![0.0; nodes];
        for n in 0..self.steps {
            self.shifted_sources(n, &prev_u[n], &prev_v[n], &mut f_u, &mut f_v);
            let mut rhs_u: Vec<f64> = (0..nodes)
                .map(|i| next_u[n][i] + self.dt * f_u[i])
                .collect();
            let mut rhs_v: Vec<f64> = (0..nodes)
                .map(|i| next_v[n][i] + self.dt * f_v[i])
                .collect();
            rhs_u[last] = bc.0;
            rhs_v[last] = bc.1;
            self.trid_u.solve_into(&mut rhs_u);
            self.trid_v.solve_into(&mut rhs_v);
            next_u.push(rhs_u);
            next_v.push(rhs_v);
        }
        (next_u, next_v)
    }

    /// Apply the implicit row operator to a slice (for the start admissibility
    /// check).
    fn apply_implicit(&self, w: &[f64], diffusion: f64, shift: f64, out: &mut [f64]) {
        let nodes = w.len();
        let dx = self.grid.spacing();
        let r = self.dt * diffusion / (dx * dx);
        let k = self.dt * shift;
        out[0] = (1.0 + k + 2.0 * r) * w[0] - 2.0 * r * w[1];
        for i in 1..nodes - 1 {
            out[i] = -r * w[i - 1] + (1.0 + k + 2.0 * r) * w[i] - r * w[i + 1];
        }
        out[nodes - 1] = w[nodes - 1];
    }
}

fn sup_levels(levels: &Levels) -> f64 {
    levels
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn sup_levels_diff(a: &Levels, b: &Levels) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| crate::numerics::sup_diff(x, y))
        .fold(0.0_f64, f64::max)
}

/// Largest signed excess of `a` over `b` (positive when `a > b` somewhere).
fn max_excess(a: &Levels, b: &Levels) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max(x - y);
        }
    }
    worst
}

fn run_iteration(
    sweeper: &Sweeper,
    mut u: Levels,
    mut v: Levels,
    bc: (f64, f64),
    kind: SolutionKind,
    opts: &PeriodicOptions,
    params: &ModelParams,
) -> Result<(Levels, Levels, usize, f64), PeriodicError> {
    let mono_tol = 1e-10 * params.n_b.max(params.a_m);
    let mut residual = f64::INFINITY;
    for outer in 1..=opts.max_outer {
        let (next_u, next_v) = sweeper.sweep(&u, &v, bc);
        let violation = match kind {
            SolutionKind::Minimal => max_excess(&u, &next_u).max(max_excess(&v, &next_v)),
            SolutionKind::Maximal => max_excess(&next_u, &u).max(max_excess(&next_v, &v)),
        };
        if violation > mono_tol {
            return Err(PeriodicError::NonMonotoneIterate { outer, violation });
        }
        residual = sup_levels_diff(&next_u, &u).max(sup_levels_diff(&next_v, &v));
        u = next_u;
        v = next_v;
        if residual < opts.tol {
            return Ok((u, v, outer, residual));
        }
    }
    Err(PeriodicError::MaxIterations {
        max_outer: opts.max_outer,
        residual,
    })
}

/// Minimal positive T-periodic solution with a zero Dirichlet condition at
/// `x = l`. Below the critical length the only nonnegative solution is zero,
/// returned with `trivial_zero` set.
pub fn iterate_minimal(
    l: f64,
    params: &ModelParams,
    opts: &PeriodicOptions,
) -> Result<PeriodicSolution, PeriodicError> {
    let (sweeper, n_cells) = Sweeper::new(params, l, opts)?;
    let l_snap = sweeper.grid.end();
    let sopts = opts.spectral_for(n_cells);
    let (eig, field) = periodic_eigen_field(1.0, l_snap, params, &sopts)?;

    let times: Vec<f64> = (0..=sweeper.steps)
        .map(|n| n as f64 * sweeper.dt)
        .collect();
    let xs = sweeper.grid.nodes();

    if eig.mu1 >= 0.0 {
        let zeros: Levels = (0..=sweeper.steps)
            .map(|_| vec![0.0; sweeper.grid.n_nodes()])
            .collect();
        return Ok(PeriodicSolution {
            l: l_snap,
            kind: SolutionKind::Minimal,
            xs,
            times,
            u: zeros.clone(),
            v: zeros,
            outer_iterations: 0,
            residual: 0.0,
            trivial_zero: true,
            shift_k1: sweeper.k1,
            shift_k2: sweeper.k2,
        });
    }

    let sup_phi = sup_levels(&field.phi).max(1e-300);
    let sup_psi = sup_levels(&field.psi).max(1e-300);
    let delta0 = (params.n_b / (2.0 * sup_phi)).min(params.a_m / (2.0 * sup_psi));
    let mut chosen = None;
    let mut best_violation = f64::INFINITY;
    for k in 0..=46 {
        let delta = delta0 * 0.5_f64.powi(k);
        let violation = lower_start_excess(&sweeper, &field.phi, &field.psi, delta);
        if violation <= 1e-12 * delta {
            chosen = Some(delta);
            break;
        }
        best_violation = best_violation.min(violation);
    }
    let delta = chosen.ok_or(PeriodicError::NonMonotoneIterate {
        outer: 0,
        violation: best_violation,
    })?;

    let scale_levels = |levels: &Levels| -> Levels {
        levels
            .iter()
            .map(|row| row.iter().map(|x| delta * x).collect())
            .collect()
    };
    let (u, v, outer, residual) = run_iteration(
        &sweeper,
        scale_levels(&field.phi),
        scale_levels(&field.psi),
        (0.0, 0.0),
        SolutionKind::Minimal,
        opts,
        params,
    )?;
    Ok(PeriodicSolution {
        l: l_snap,
        kind: SolutionKind::Minimal,
        xs,
        times,
        u,
        v,
        outer_iterations: outer,
        residual,
        trivial_zero: false,
        shift_k1: sweeper.k1,
        shift_k2: sweeper.k2,
    })
}

/// Maximal T-periodic solution with the carrying pair imposed at `x = l`,
/// reached from above starting at the constant carrying state.
pub fn iterate_maximal(
    l: f64,
    params: &ModelParams,
    opts: &PeriodicOptions,
) -> Result<PeriodicSolution, PeriodicError> {
    let (sweeper, _) = Sweeper::new(params, l, opts)?;
    let l_snap = sweeper.grid.end();
    let nodes = sweeper.grid.n_nodes();
    let times: Vec<f64> = (0..=sweeper.steps)
        .map(|n| n as f64 * sweeper.dt)
        .collect();
    let xs = sweeper.grid.nodes();

    let u0: Levels = (0..=sweeper.steps)
        .map(|_| vec![params.n_b; nodes])
        .collect();
    let v0: Levels = (0..=sweeper.steps)
        .map(|_| vec![params.a_m; nodes])
        .collect();
    let (u, v, outer, residual) = run_iteration(
        &sweeper,
        u0,
        v0,
        (params.n_b, params.a_m),
        SolutionKind::Maximal,
        opts,
        params,
    )?;
    Ok(PeriodicSolution {
        l: l_snap,
        kind: SolutionKind::Maximal,
        xs,
        times,
        u,
        v,
        outer_iterations: outer,
        residual,
        trivial_zero: false,
        shift_k1: sweeper.k1,
        shift_k2: sweeper.k2,
    })
}

/// Worst excess of the sweep operator over the shifted source for the scaled
/// eigenpair; at or below zero the pair is an admissible starting point.
fn lower_start_excess(sweeper: &Sweeper, phi: &Levels, psi: &Levels, delta: f64) -> f64 {
    let nodes = sweeper.grid.n_nodes();
    let last = nodes - 1;
    let mut lhs_u = vec![0.0; nodes];
    let mut lhs_v = vec![0.0; nodes];
    let mut f_u = vec![0.0; nodes];
    let mut f_v = vec![0.0; nodes];
    let mut u_level = vec![0.0; nodes];
    let mut v_level = vec![0.0; nodes];
    let mut worst = f64::NEG_INFINITY;
    for n in 0..sweeper.steps {
        for i in 0..nodes {
            u_level[i] = delta * phi[n][i];
            v_level[i] = delta * psi[n][i];
        }
        sweeper.shifted_sources(n, &u_level, &v_level, &mut f_u, &mut f_v);
        let next_u: Vec<f64> = phi[n + 1].iter().map(|x| delta * x).collect();
        let next_v: Vec<f64> = psi[n + 1].iter().map(|x| delta * x).collect();
        sweeper.apply_implicit(&next_u, sweeper.diffusion_u, sweeper.k1, &mut lhs_u);
        sweeper.apply_implicit(&next_v, sweeper.diffusion_v, sweeper.k2, &mut lhs_v);
        for i in 0..last {
            worst = worst.max(lhs_u[i] - u_level[i] - sweeper.dt * f_u[i]);
            worst = worst.max(lhs_v[i] - v_level[i] - sweeper.dt * f_v[i]);
        }
    }
    worst
}

/// Approximation of the half-line envelope pair: minimal and maximal
/// solutions along a growing sequence of lengths at fixed resolution per
/// unit length, with the gap profile on a shared window.
#[derive(Debug, Clone)]
pub struct EnvelopePair {
    pub lengths: Vec<f64>,
    pub window: f64,
    pub minimal: Vec<PeriodicSolution>,
    pub maximal: Vec<PeriodicSolution>,
    /// sup of `maximal - minimal` over the window, per length
    pub gap_u: Vec<f64>,
    pub gap_v: Vec<f64>,
    /// worst violation of `minimal <= maximal` (nonpositive when ordered)
    pub ordering_violation: f64,
    /// worst decrease of the minimal family along the length sequence
    pub minimal_trend_violation: f64,
    /// worst increase of the maximal family along the length sequence
    pub maximal_trend_violation: f64,
    /// per length: the two envelopes agree within 10x the sweep tolerance,
    /// i.e. the periodic solution is numerically unique on the window
    pub numerically_unique: Vec<bool>,
    pub l0: f64,
}

pub fn halfline_envelope(
    params: &ModelParams,
    lengths: &[f64],
    window: f64,
    opts: &PeriodicOptions,
    sopts: &SpectralOptions,
) -> Result<EnvelopePair, PeriodicError> {
    if lengths.is_empty() {
        return Err(PeriodicError::InvalidConfiguration(
            "need at least one domain length".into(),
        ));
    }
    let min_l = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(window > 0.0 && window <= min_l) {
        return Err(PeriodicError::InvalidConfiguration(format!(
            "window {window} must be positive and no larger than the smallest length {min_l}"
        )));
    }
    let l0 = match critical_length(params, sopts) {
        Ok(c) => c.l0,
        Err(SpectralError::NoCriticalLength { b_max, mu1 }) => {
            return Err(PeriodicError::PrerequisiteFailed(format!(
                "no critical length below b_max = {b_max} (mu1 = {mu1:e}); the half-line problem has no positive solution"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    for &l in lengths {
        if l <= l0 {
            return Err(PeriodicError::PrerequisiteFailed(format!(
                "length {l} does not exceed the critical length {l0}"
            )));
        }
    }

    let mut minimal = Vec::with_capacity(lengths.len());
    let mut maximal = Vec::with_capacity(lengths.len());
    for &l in lengths {
        minimal.push(iterate_minimal(l, params, opts)?);
        maximal.push(iterate_maximal(l, params, opts)?);
    }

    let win_nodes = (window * opts.nodes_per_unit as f64).round() as usize;
    let mut gap_u = Vec::with_capacity(lengths.len());
    let mut gap_v = Vec::with_capacity(lengths.len());
    let mut ordering_violation = f64::NEG_INFINITY;
    let mut numerically_unique = Vec::with_capacity(lengths.len());
    for (lo, hi) in minimal.iter().zip(&maximal) {
        let mut g_u = 0.0_f64;
        let mut g_v = 0.0_f64;
        for (rl, rh) in lo.u.iter().zip(&hi.u) {
            for i in 0..=win_nodes {
                ordering_violation = ordering_violation.max(rl[i] - rh[i]);
                g_u = g_u.max(rh[i] - rl[i]);
            }
        }
        for (rl, rh) in lo.v.iter().zip(&hi.v) {
            for i in 0..=win_nodes {
                ordering_violation = ordering_violation.max(rl[i] - rh[i]);
                g_v = g_v.max(rh[i] - rl[i]);
            }
        }
        numerically_unique.push(g_u.max(g_v) <= 10.0 * opts.tol);
        gap_u.push(g_u);
        gap_v.push(g_v);
    }

    let mut minimal_trend_violation = f64::NEG_INFINITY;
    let mut maximal_trend_violation = f64::NEG_INFINITY;
    for w in minimal.windows(2) {
        minimal_trend_violation =
            minimal_trend_violation.max(window_excess(&w[0].u, &w[1].u, win_nodes));
        minimal_trend_violation =
            minimal_trend_violation.max(window_excess(&w[0].v, &w[1].v, win_nodes));
    }
    for w in maximal.windows(2) {
        maximal_trend_violation =
            maximal_trend_violation.max(window_excess(&w[1].u, &w[0].u, win_nodes));
        maximal_trend_violation =
            maximal_trend_violation.max(window_excess(&w[1].v, &w[0].v, win_nodes));
    }

    Ok(EnvelopePair {
        lengths: minimal.iter().map(|s| s.l).collect(),
        window,
        minimal,
        maximal,
        gap_u,
        gap_v,
        ordering_violation,
        minimal_trend_violation,
        maximal_trend_violation,
        numerically_unique,
        l0,
    })
}

/// Largest excess of `a` over `b` restricted to the first `win_nodes + 1`
/// nodes of every time level.
fn window_excess(a: &Levels, b: &Levels, win_nodes: usize) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for (ra, rb) in a.iter().zip(b) {
        for i in 0..=win_nodes {
            worst = worst.max(ra[i] - rb[i]);
        }
    }
    worst
}
