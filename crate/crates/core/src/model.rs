//! Model data: epidemiological parameters, positive bounded time-periodic
//! coefficient fields, initial infection profiles, and validation of the
//! standing assumptions. Everything here is immutable after construction and
//! safe to share across threads.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("positivity violation: {0}")]
    PositivityViolation(String),
    #[error("bound violation: {0}")]
    BoundViolation(String),
    #[error("boundary violation: {0}")]
    BoundaryViolation(String),
    #[error("periodicity violation: {0}")]
    PeriodicityViolation(String),
}

/// Spatial factor of a separable coefficient field. Every profile is strictly
/// positive on `x >= 0` for admissible parameters and equals 1 at the flat
/// reference level.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialProfile {
    Flat,
    /// `1 + amplitude * cos(2*pi*x/wavelength)`, `|amplitude| < 1`.
    CosineRamp { amplitude: f64, wavelength: f64 },
    /// `1 + amplitude * exp(-(x-center)^2 / (2*width^2))`, `amplitude > -1`.
    GaussianBump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `1 + slope * min(x, x_max)`, held constant beyond `x_max`.
    ClampedLinear { slope: f64, x_max: f64 },
}

impl SpatialProfile {
    fn validate(&self) -> Result<(), ValidationError> {
        match *self {
            SpatialProfile::Flat => Ok(()),
            SpatialProfile::CosineRamp {
                amplitude,
                wavelength,
            } => {
                if wavelength <= 0.0 {
                    return Err(ValidationError::PositivityViolation(
                        "cosine ramp wavelength must be positive".into(),
                    ));
                }
                if amplitude.abs() >= 1.0 {
                    return Err(ValidationError::BoundViolation(
                        "cosine ramp amplitude must satisfy |a| < 1".into(),
                    ));
                }
                Ok(())
            }
            SpatialProfile::GaussianBump {
                amplitude, width, ..
            } => {
                if width <= 0.0 {
                    return Err(ValidationError::PositivityViolation(
                        "gaussian bump width must be positive".into(),
                    ));
                }
                if amplitude <= -1.0 {
                    return Err(ValidationError::BoundViolation(
                        "gaussian bump amplitude must satisfy a > -1".into(),
                    ));
                }
                Ok(())
            }
            SpatialProfile::ClampedLinear { slope, x_max } => {
                if x_max <= 0.0 {
                    return Err(ValidationError::PositivityViolation(
                        "clamped linear x_max must be positive".into(),
                    ));
                }
                if 1.0 + slope * x_max <= 0.0 {
                    return Err(ValidationError::PositivityViolation(
                        "clamped linear profile must stay positive".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match *self {
            SpatialProfile::Flat => 1.0,
            SpatialProfile::CosineRamp {
                amplitude,
                wavelength,
            } => 1.0 + amplitude * (2.0 * std::f64::consts::PI * x / wavelength).cos(),
            SpatialProfile::GaussianBump {
                amplitude,
                center,
                width,
            } => {
                let z = (x - center) / width;
                1.0 + amplitude * (-0.5 * z * z).exp()
            }
            SpatialProfile::ClampedLinear { slope, x_max } => 1.0 + slope * x.min(x_max),
        }
    }

    /// Range of the profile over `x >= 0`, in closed form.
    fn range(&self) -> (f64, f64) {
        match *self {
            SpatialProfile::Flat => (1.0, 1.0),
            SpatialProfile::CosineRamp { amplitude, .. } => {
                (1.0 - amplitude.abs(), 1.0 + amplitude.abs())
            }
            SpatialProfile::GaussianBump {
                amplitude,
                center,
                width,
            } => {
                // the exponential peaks at x = max(center, 0) and decays to 0
                let peak = if center >= 0.0 {
                    1.0
                } else {
                    let z = center / width;
                    (-0.5 * z * z).exp()
                };
                let v = 1.0 + amplitude * peak;
                (v.min(1.0), v.max(1.0))
            }
            SpatialProfile::ClampedLinear { slope, x_max } => {
                let v = 1.0 + slope * x_max;
                (v.min(1.0), v.max(1.0))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum FieldKind {
    Constant(f64),
    Separable {
        base: f64,
        profile: SpatialProfile,
        temporal_amplitude: f64,
        phase: f64,
    },
    Table(SampledTable),
}

/// Positive, bounded coefficient field on `x >= 0`, periodic in time with the
/// model period. Evaluation reduces `t` modulo the period, so the periodicity
/// holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    kind: FieldKind,
    period: f64,
    bounds: (f64, f64),
}

impl CoefficientField {
    pub fn constant(value: f64, period: f64) -> Result<Self, ValidationError> {
        check_period(period)?;
        if value <= 0.0 {
            return Err(ValidationError::PositivityViolation(
                "constant coefficient must be positive".into(),
            ));
        }
        Ok(Self {
            kind: FieldKind::Constant(value),
            period,
            bounds: (value, value),
        })
    }

    /// `base * profile(x) * (1 + a*cos(2*pi*t/T + phase))` with `a` in `[0,1)`.
    pub fn separable(
        base: f64,
        profile: SpatialProfile,
        temporal_amplitude: f64,
        phase: f64,
        period: f64,
    ) -> Result<Self, ValidationError> {
        check_period(period)?;
        if base <= 0.0 {
            return Err(ValidationError::PositivityViolation(
                "separable base must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&temporal_amplitude) {
            return Err(ValidationError::BoundViolation(
                "temporal amplitude must lie in [0, 1)".into(),
            ));
        }
        profile.validate()?;
        let (p_lo, p_hi) = profile.range();
        let bounds = (
            base * p_lo * (1.0 - temporal_amplitude),
            base * p_hi * (1.0 + temporal_amplitude),
        );
        Ok(Self {
            kind: FieldKind::Separable {
                base,
                profile,
                temporal_amplitude,
                phase,
            },
            period,
            bounds,
        })
    }

    pub fn table(table: SampledTable, period: f64) -> Result<Self, ValidationError> {
        check_period(period)?;
        let table = table.into_validated(period)?;
        let bounds = table.value_range();
        Ok(Self {
            kind: FieldKind::Table(table),
            period,
            bounds,
        })
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        let tw = wrap_time(t, self.period);
        match &self.kind {
            FieldKind::Constant(v) => *v,
            FieldKind::Separable {
                base,
                profile,
                temporal_amplitude,
                phase,
            } => {
                let temporal = 1.0
                    + temporal_amplitude
                        * (2.0 * std::f64::consts::PI * tw / self.period + phase).cos();
                base * profile.eval(x) * temporal
            }
            FieldKind::Table(table) => table.eval(x, tw, self.period),
        }
    }

    /// Evaluate at many positions for one time; hoists the temporal factor.
    pub fn eval_into(&self, xs: &[f64], t: f64, out: &mut [f64]) {
        debug_assert_eq!(xs.len(), out.len());
        let tw = wrap_time(t, self.period);
        match &self.kind {
            FieldKind::Constant(v) => out.fill(*v),
            FieldKind::Separable {
                base,
                profile,
                temporal_amplitude,
                phase,
            } => {
                let temporal = 1.0
                    + temporal_amplitude
                        * (2.0 * std::f64::consts::PI * tw / self.period + phase).cos();
                let scale = base * temporal;
                for (o, x) in out.iter_mut().zip(xs) {
                    *o = scale * profile.eval(*x);
                }
            }
            FieldKind::Table(table) => {
                for (o, x) in out.iter_mut().zip(xs) {
                    *o = table.eval(*x, tw, self.period);
                }
            }
        }
    }

    /// `(c_min, c_max)` bracketing every reachable value.
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// The constant value when the field has no space-time variation.
    pub fn constant_value(&self) -> Option<f64> {
        match self.kind {
            FieldKind::Constant(v) => Some(v),
            _ => None,
        }
    }
}

fn check_period(period: f64) -> Result<(), ValidationError> {
    if period > 0.0 && period.is_finite() {
        Ok(())
    } else {
        Err(ValidationError::PositivityViolation(
            "period must be positive and finite".into(),
        ))
    }
}

fn wrap_time(t: f64, period: f64) -> f64 {
    let w = t - period * (t / period).floor();
    // guard against w == period from rounding
    if w >= period {
        w - period
    } else {
        w
    }
}

/// Tabulated coefficient samples on a rectangular `(x, t)` grid covering one
/// period. Evaluation wraps periodically in `t` and holds the boundary value
/// beyond the first/last `x` node.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTable {
    x_nodes: Vec<f64>,
    t_nodes: Vec<f64>,
    /// row-major, `values[ix * t_nodes.len() + it]`
    values: Vec<f64>,
}

impl SampledTable {
    pub fn new(
        x_nodes: Vec<f64>,
        t_nodes: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, ValidationError> {
        if x_nodes.is_empty() || t_nodes.is_empty() {
            return Err(ValidationError::BoundViolation(
                "coefficient table needs at least one x and one t node".into(),
            ));
        }
        if values.len() != x_nodes.len() * t_nodes.len() {
            return Err(ValidationError::BoundViolation(format!(
                "coefficient table needs {} values, got {}",
                x_nodes.len() * t_nodes.len(),
                values.len()
            )));
        }
        for w in x_nodes.windows(2) {
            if w[1] <= w[0] {
                return Err(ValidationError::BoundViolation(
                    "table x nodes must be strictly increasing".into(),
                ));
            }
        }
        for w in t_nodes.windows(2) {
            if w[1] <= w[0] {
                return Err(ValidationError::BoundViolation(
                    "table t nodes must be strictly increasing".into(),
                ));
            }
        }
        for v in &values {
            if !(*v > 0.0 && v.is_finite()) {
                return Err(ValidationError::PositivityViolation(
                    "table values must be positive and finite".into(),
                ));
            }
        }
        Ok(Self {
            x_nodes,
            t_nodes,
            values,
        })
    }

    /// Check the nodes against the period and fold an explicit `t = T` column
    /// back onto `t = 0` after verifying the wrap.
    fn into_validated(mut self, period: f64) -> Result<Self, ValidationError> {
        let nt = self.t_nodes.len();
        if self.t_nodes[0] < 0.0 {
            return Err(ValidationError::PeriodicityViolation(
                "table t nodes must start at or after 0".into(),
            ));
        }
        let last = self.t_nodes[nt - 1];
        if last > period * (1.0 + 1e-9) {
            return Err(ValidationError::PeriodicityViolation(
                "table t nodes must lie within one period".into(),
            ));
        }
        if (last - period).abs() <= 1e-9 * period {
            // explicit closing column: must match the opening one, then drop it
            let nx = self.x_nodes.len();
            for ix in 0..nx {
                let a = self.values[ix * nt];
                let b = self.values[ix * nt + nt - 1];
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(ValidationError::PeriodicityViolation(format!(
                        "table row at x={} does not wrap: value at t=0 is {a}, at t=T is {b}",
                        self.x_nodes[ix]
                    )));
                }
            }
            let mut trimmed = Vec::with_capacity(nx * (nt - 1));
            for ix in 0..nx {
                trimmed.extend_from_slice(&self.values[ix * nt..ix * nt + nt - 1]);
            }
            self.values = trimmed;
            self.t_nodes.pop();
        }
        Ok(self)
    }

    fn value_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in &self.values {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        (lo, hi)
    }

    fn eval(&self, x: f64, tw: f64, period: f64) -> f64 {
        let nt = self.t_nodes.len();
        // time interval, wrapping from the last node back to the first
        let (it0, it1, t_frac) = if nt == 1 {
            (0, 0, 0.0)
        } else if tw < self.t_nodes[0] {
            // before the first node: inside the wrap segment
            let span = self.t_nodes[0] + period - self.t_nodes[nt - 1];
            (nt - 1, 0, (tw + period - self.t_nodes[nt - 1]) / span)
        } else if tw >= self.t_nodes[nt - 1] {
            let span = self.t_nodes[0] + period - self.t_nodes[nt - 1];
            (nt - 1, 0, (tw - self.t_nodes[nt - 1]) / span)
        } else {
            let i = match self
                .t_nodes
                .binary_search_by(|v| v.partial_cmp(&tw).expect("non-finite node"))
            {
                Ok(i) => i,
                Err(i) => i - 1,
            };
            let span = self.t_nodes[i + 1] - self.t_nodes[i];
            (i, i + 1, (tw - self.t_nodes[i]) / span)
        };

        let nx = self.x_nodes.len();
        // constant extrapolation outside the x range
        let (ix0, ix1, x_frac) = if nx == 1 || x <= self.x_nodes[0] {
            (0, 0, 0.0)
        } else if x >= self.x_nodes[nx - 1] {
            (nx - 1, nx - 1, 0.0)
        } else {
            let i = match self
                .x_nodes
                .binary_search_by(|v| v.partial_cmp(&x).expect("non-finite node"))
            {
                Ok(i) => i,
                Err(i) => i - 1,
            };
            let span = self.x_nodes[i + 1] - self.x_nodes[i];
            (i, i + 1, (x - self.x_nodes[i]) / span)
        };

        let at = |ix: usize, it: usize| self.values[ix * nt + it];
        let v0 = at(ix0, it0) * (1.0 - t_frac) + at(ix0, it1) * t_frac;
        let v1 = at(ix1, it0) * (1.0 - t_frac) + at(ix1, it1) * t_frac;
        v0 * (1.0 - x_frac) + v1 * x_frac
    }
}

/// All constants of the transmission model plus the two coefficient fields.
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// diffusion coefficient of infected birds
    pub d1: f64,
    /// diffusion coefficient of infected mosquitoes
    pub d2: f64,
    /// transmission probability per bite to birds
    pub alpha_b: f64,
    /// transmission probability per bite to mosquitoes
    pub alpha_m: f64,
    /// mosquito death rate induced by the virus
    pub d_m: f64,
    /// total bird population
    pub n_b: f64,
    /// total adult mosquito population
    pub a_m: f64,
    /// front expansion capability
    pub mu: f64,
    /// initial front position
    pub h0: f64,
    /// temporal period of the coefficient fields
    pub period: f64,
    /// biting rate of mosquitoes on birds
    pub beta_b: CoefficientField,
    /// bird recovery rate
    pub gamma_b: CoefficientField,
}

impl ModelParams {
    /// Lipschitz bound of the explicit reaction terms over the invariant box,
    /// used for the time-step stability limit.
    pub fn reaction_lipschitz(&self) -> f64 {
        let beta_max = self.beta_b.bounds().1;
        let gamma_max = self.gamma_b.bounds().1;
        let l_b = gamma_max + self.alpha_b * beta_max * self.a_m / self.n_b;
        let l_m = self.d_m + self.alpha_m * beta_max;
        l_b.max(l_m)
    }

    pub fn has_constant_coefficients(&self) -> bool {
        self.beta_b.constant_value().is_some() && self.gamma_b.constant_value().is_some()
    }
}

/// Sampled initial infection profiles on `[0, h0]`.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub x: Vec<f64>,
    pub infected_birds: Vec<f64>,
    pub infected_mosquitoes: Vec<f64>,
}

impl InitialData {
    pub fn from_samples(x: Vec<f64>, infected_birds: Vec<f64>, infected_mosquitoes: Vec<f64>) -> Self {
        Self {
            x,
            infected_birds,
            infected_mosquitoes,
        }
    }

    /// Cosine bump peaking at `x = 0` and vanishing at `x = h0`; satisfies the
    /// zero-slope and zero-boundary conditions up to sampling resolution.
    pub fn cosine(h0: f64, n_samples: usize, bird_peak: f64, mosquito_peak: f64) -> Self {
        assert!(n_samples >= 9, "cosine initial data needs at least 9 samples");
        let n = n_samples - 1;
        let mut x = Vec::with_capacity(n_samples);
        let mut birds = Vec::with_capacity(n_samples);
        let mut mosquitoes = Vec::with_capacity(n_samples);
        for i in 0..=n {
            let xi = h0 * i as f64 / n as f64;
            let c = (std::f64::consts::FRAC_PI_2 * i as f64 / n as f64).cos();
            x.push(xi);
            birds.push(if i == n { 0.0 } else { bird_peak * c });
            mosquitoes.push(if i == n { 0.0 } else { mosquito_peak * c });
        }
        Self {
            x,
            infected_birds: birds,
            infected_mosquitoes: mosquitoes,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            x: self.x.clone(),
            infected_birds: self.infected_birds.iter().map(|v| v * factor).collect(),
            infected_mosquitoes: self
                .infected_mosquitoes
                .iter()
                .map(|v| v * factor)
                .collect(),
        }
    }
}

/// Uniform 1D grid with at least 16 cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n_cells: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n_cells: usize) -> Result<Self, ValidationError> {
        if n_cells < 16 {
            return Err(ValidationError::BoundViolation(
                "grid needs at least 16 cells".into(),
            ));
        }
        if !(b > a) {
            return Err(ValidationError::PositivityViolation(
                "grid spacing must be positive".into(),
            ));
        }
        Ok(Self { a, b, n_cells })
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / self.n_cells as f64
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn node(&self, i: usize) -> f64 {
        self.a + (self.b - self.a) * i as f64 / self.n_cells as f64
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.b
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| self.node(i)).collect()
    }
}

/// Parameters plus initial data that passed every admissibility check.
#[derive(Debug, Clone)]
pub struct ValidatedModel {
    pub params: ModelParams,
    pub init: InitialData,
    /// non-fatal observations, e.g. a decoupled test configuration
    pub warnings: Vec<String>,
}

/// Check every standing assumption; returns the validated bundle or a
/// structured error naming the first violated condition.
pub fn validate(params: ModelParams, init: InitialData) -> Result<ValidatedModel, ValidationError> {
    let mut warnings = Vec::new();

    for (name, v) in [
        ("D1", params.d1),
        ("D2", params.d2),
        ("d_m", params.d_m),
        ("N_b", params.n_b),
        ("A_m", params.a_m),
        ("mu", params.mu),
        ("h0", params.h0),
        ("period_T", params.period),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(ValidationError::PositivityViolation(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }

    for (name, v) in [("alpha_b", params.alpha_b), ("alpha_m", params.alpha_m)] {
        if v < 0.0 || !v.is_finite() {
            return Err(ValidationError::PositivityViolation(format!(
                "{name} must be nonnegative, got {v}"
            )));
        }
        if v > 1.0 {
            return Err(ValidationError::BoundViolation(format!(
                "{name} is a probability and must not exceed 1, got {v}"
            )));
        }
        if v == 0.0 {
            warnings.push(format!(
                "{name} = 0 decouples the system; accepted for test configurations only"
            ));
        }
    }

    for (name, field) in [("beta_b", &params.beta_b), ("gamma_b", &params.gamma_b)] {
        if (field.period() - params.period).abs() > 1e-12 * params.period {
            return Err(ValidationError::PeriodicityViolation(format!(
                "{name} period {} does not match period_T {}",
                field.period(),
                params.period
            )));
        }
        let (lo, hi) = field.bounds();
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(ValidationError::PositivityViolation(format!(
                "{name} must be positive and bounded, computed bounds ({lo}, {hi})"
            )));
        }
        // spot check the wrap on a few points
        for k in 0..4 {
            let x = params.h0 * k as f64 / 3.0;
            let t = params.period * (0.1 + 0.27 * k as f64);
            let a = field.eval(x, t);
            let b = field.eval(x, t + params.period);
            if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                return Err(ValidationError::PeriodicityViolation(format!(
                    "{name} fails the wrap check at (x={x}, t={t}): {a} vs {b}"
                )));
            }
        }
    }

    check_initial_component(
        "Ib0",
        &init.x,
        &init.infected_birds,
        params.n_b,
        params.h0,
    )?;
    check_initial_component(
        "Im0",
        &init.x,
        &init.infected_mosquitoes,
        params.a_m,
        params.h0,
    )?;

    Ok(ValidatedModel {
        params,
        init,
        warnings,
    })
}

fn check_initial_component(
    name: &str,
    xs: &[f64],
    values: &[f64],
    cap: f64,
    h0: f64,
) -> Result<(), ValidationError> {
    if xs.len() < 5 {
        return Err(ValidationError::BoundViolation(format!(
            "{name} needs at least 5 samples"
        )));
    }
    if values.len() != xs.len() {
        return Err(ValidationError::BoundViolation(format!(
            "{name} has {} values for {} sample positions",
            values.len(),
            xs.len()
        )));
    }
    for w in xs.windows(2) {
        if w[1] <= w[0] {
            return Err(ValidationError::BoundViolation(format!(
                "{name} sample positions must be strictly increasing"
            )));
        }
    }
    if xs[0].abs() > 1e-12 * h0 {
        return Err(ValidationError::BoundaryViolation(format!(
            "{name} samples must start at x = 0, got {}",
            xs[0]
        )));
    }
    let last = *xs.last().expect("nonempty");
    if (last - h0).abs() > 1e-12 * h0 {
        return Err(ValidationError::BoundaryViolation(format!(
            "{name} samples must end at x = h0 = {h0}, got {last}"
        )));
    }

    let n = values.len();
    let sup = values.iter().fold(0.0_f64, |m, v| m.max(*v));
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(ValidationError::BoundViolation(format!(
                "{name} sample {i} is not finite"
            )));
        }
        if *v > cap * (1.0 + 1e-12) {
            return Err(ValidationError::BoundViolation(format!(
                "{name}({}) = {v} exceeds the population cap {cap}",
                xs[i]
            )));
        }
        if i > 0 && i < n - 1 && *v <= 0.0 {
            return Err(ValidationError::PositivityViolation(format!(
                "{name}({}) = {v} must be positive inside the infected region",
                xs[i]
            )));
        }
    }
    if values[0] < 0.0 {
        return Err(ValidationError::PositivityViolation(format!(
            "{name}(0) must be nonnegative"
        )));
    }
    if values[n - 1].abs() > 1e-12 * cap {
        return Err(ValidationError::BoundaryViolation(format!(
            "{name}(h0) must vanish at the initial front, got {}",
            values[n - 1]
        )));
    }
    // discrete zero-slope condition at x = 0: the first two samples must agree
    // up to the curvature a smooth profile can produce over one sample spacing
    let dx0 = xs[1] - xs[0];
    let slope_tol = 8.0 * (dx0 / h0) * (dx0 / h0) * sup.max(1e-300);
    if (values[1] - values[0]).abs() > slope_tol {
        return Err(ValidationError::BoundaryViolation(format!(
            "{name} must have zero slope at x = 0: first two samples differ by {} (allowed {slope_tol})",
            (values[1] - values[0]).abs()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

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

    fn canonical_init() -> InitialData {
        InitialData::cosine(FRAC_PI_2, 65, 0.8, 0.6)
    }

    #[test]
    fn canonical_configuration_validates() {
        let ok = validate(canonical_params(), canonical_init()).unwrap();
        assert!(ok.warnings.is_empty());
    }

    #[test]
    fn negative_recovery_rate_is_rejected_at_construction() {
        let err = CoefficientField::constant(-0.1, 1.0).unwrap_err();
        assert!(matches!(err, ValidationError::PositivityViolation(_)));
    }

    #[test]
    fn nonzero_boundary_value_is_a_boundary_violation() {
        let mut init = canonical_init();
        *init.infected_birds.last_mut().unwrap() = 0.3;
        let err = validate(canonical_params(), init).unwrap_err();
        assert!(matches!(err, ValidationError::BoundaryViolation(_)));
    }

    #[test]
    fn oversized_initial_density_is_a_bound_violation() {
        let mut init = canonical_init();
        init.infected_birds[5] = 1.7;
        let err = validate(canonical_params(), init).unwrap_err();
        assert!(matches!(err, ValidationError::BoundViolation(_)));
    }

    #[test]
    fn sloped_initial_data_fails_the_neumann_check() {
        let n = 65;
        let h0 = FRAC_PI_2;
        let x: Vec<f64> = (0..n).map(|i| h0 * i as f64 / (n - 1) as f64).collect();
        let line: Vec<f64> = x.iter().map(|xi| 0.8 * (1.0 - xi / h0)).collect();
        let init = InitialData::from_samples(x.clone(), line.clone(), line);
        let err = validate(canonical_params(), init).unwrap_err();
        assert!(matches!(err, ValidationError::BoundaryViolation(_)));
    }

    #[test]
    fn zero_coupling_warns_but_validates() {
        let mut params = canonical_params();
        params.alpha_m = 0.0;
        let ok = validate(params, canonical_init()).unwrap();
        assert_eq!(ok.warnings.len(), 1);
    }

    #[test]
    fn constant_field_evaluates_everywhere() {
        let f = CoefficientField::constant(0.25, 1.0).unwrap();
        assert_eq!(f.eval(0.0, 0.0), 0.25);
        assert_eq!(f.eval(13.0, 7.9), 0.25);
        assert_eq!(f.bounds(), (0.25, 0.25));
    }

    #[test]
    fn separable_field_matches_hand_evaluation() {
        let f = CoefficientField::separable(1.0, SpatialProfile::Flat, 0.5, 0.0, 1.0).unwrap();
        assert!((f.eval(2.0, 0.0) - 1.5).abs() < 1e-14);
        assert!((f.eval(2.0, 0.5) - 0.5).abs() < 1e-12);
        assert_eq!(f.bounds(), (0.5, 1.5));
    }

    #[test]
    fn table_bounds_are_the_value_range() {
        let table = SampledTable::new(
            vec![0.0, 1.0, 2.0],
            vec![0.0],
            vec![0.2, 0.9, 0.4],
        )
        .unwrap();
        let f = CoefficientField::table(table, 1.0).unwrap();
        assert_eq!(f.bounds(), (0.2, 0.9));
        // constant extrapolation beyond the last x node
        assert!((f.eval(5.0, 0.3) - 0.4).abs() < 1e-14);
    }

    #[test]
    fn table_wrap_mismatch_is_rejected() {
        let table = SampledTable::new(
            vec![0.0],
            vec![0.0, 0.5, 1.0],
            vec![0.3, 0.6, 0.4],
        )
        .unwrap();
        let err = CoefficientField::table(table, 1.0).unwrap_err();
        assert!(matches!(err, ValidationError::PeriodicityViolation(_)));
    }

    #[test]
    fn table_interpolates_bilinearly_and_wraps() {
        let table = SampledTable::new(
            vec![0.0, 2.0],
            vec![0.0, 0.5],
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        let f = CoefficientField::table(table, 1.0).unwrap();
        assert!((f.eval(0.0, 0.25) - 1.5).abs() < 1e-14);
        assert!((f.eval(1.0, 0.0) - 2.0).abs() < 1e-14);
        // wrap segment from t=0.5 back to t=1.0 -> value at t=0.75 blends
        assert!((f.eval(0.0, 0.75) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn grid_enforces_minimum_resolution() {
        assert!(Grid1D::new(0.0, 1.0, 8).is_err());
        let g = Grid1D::new(0.0, 2.0, 32).unwrap();
        assert!((g.spacing() - 0.0625).abs() < 1e-15);
        assert_eq!(g.n_nodes(), 33);
        assert_eq!(g.node(32), 2.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arbitrary_field() -> impl Strategy<Value = CoefficientField> {
            let constant = (0.05f64..3.0).prop_map(|v| CoefficientField::constant(v, 1.0).unwrap());
            let separable = (
                0.1f64..2.0,
                -0.9f64..0.9,
                0.2f64..5.0,
                0.0f64..0.95,
                0.0f64..(2.0 * PI),
            )
                .prop_map(|(base, amp, wavelength, a_t, phase)| {
                    CoefficientField::separable(
                        base,
                        SpatialProfile::CosineRamp {
                            amplitude: amp,
                            wavelength,
                        },
                        a_t,
                        phase,
                        1.0,
                    )
                    .unwrap()
                });
            let gaussian = (0.1f64..2.0, -0.8f64..2.0, -1.0f64..4.0, 0.2f64..3.0, 0.0f64..0.9)
                .prop_map(|(base, amp, center, width, a_t)| {
                    CoefficientField::separable(
                        base,
                        SpatialProfile::GaussianBump {
                            amplitude: amp,
                            center,
                            width,
                        },
                        a_t,
                        0.0,
                        1.0,
                    )
                    .unwrap()
                });
            prop_oneof![constant, separable, gaussian]
        }

        proptest! {
            #[test]
            fn bounds_bracket_every_evaluation(
                field in arbitrary_field(),
                x in 0.0f64..50.0,
                t in 0.0f64..20.0,
            ) {
                let v = field.eval(x, t);
                let (lo, hi) = field.bounds();
                prop_assert!(v > 0.0);
                prop_assert!(v >= lo - 1e-12 * hi.max(1.0));
                prop_assert!(v <= hi + 1e-12 * hi.max(1.0));
            }

            #[test]
            fn evaluation_is_periodic_to_machine_precision(
                field in arbitrary_field(),
                x in 0.0f64..50.0,
                t in 0.0f64..20.0,
            ) {
                let a = field.eval(x, t);
                let b = field.eval(x, t + 1.0);
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
