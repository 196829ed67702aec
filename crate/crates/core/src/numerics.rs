//! Small numerical kernels shared by the solvers: a prefactorized tridiagonal
//! solve, trapezoid quadrature, and monotone cubic interpolation.

/// Tridiagonal system factorized once with the Thomas algorithm so that
/// repeated solves against new right-hand sides cost two sweeps each.
///
/// The factorization assumes the usual diagonal dominance of implicit
/// diffusion matrices; a vanishing pivot panics.
#[derive(Debug, Clone)]
pub struct Tridiag {
    lower: Vec<f64>,
    upper_scaled: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiag {
    /// Factorize a tridiagonal matrix given by its three diagonals.
    /// `lower[0]` and `upper[n-1]` are ignored.
    pub fn factorize(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        assert!(n >= 2, "tridiagonal system needs at least two rows");
        assert_eq!(lower.len(), n);
        assert_eq!(upper.len(), n);

        let mut upper_scaled = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];

        let mut pivot = diag[0];
        assert!(pivot != 0.0, "zero pivot in row 0");
        inv_pivot[0] = 1.0 / pivot;
        upper_scaled[0] = upper[0] * inv_pivot[0];
        for i in 1..n {
            pivot = diag[i] - lower[i] * upper_scaled[i - 1];
            assert!(pivot != 0.0, "zero pivot in row {i}");
            inv_pivot[i] = 1.0 / pivot;
            if i + 1 < n {
                upper_scaled[i] = upper[i] * inv_pivot[i];
            }
        }

        Self {
            lower: lower.to_vec(),
            upper_scaled,
            inv_pivot,
        }
    }

    /// Solve in place: on return `rhs` holds the solution.
    pub fn solve_into(&self, rhs: &mut [f64]) {
        let n = self.inv_pivot.len();
        debug_assert_eq!(rhs.len(), n);

        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_scaled[i] * rhs[i + 1];
        }
    }

    pub fn n(&self) -> usize {
        self.inv_pivot.len()
    }
}

/// Implicit operator `(1 + shift)I - r*L` on a uniform grid with a mirror
/// (zero-flux) row at the left end and an identity (Dirichlet) row at the
/// right end. `r = dt*D/dx^2`.
pub fn imex_tridiag(n_nodes: usize, r: f64, shift: f64) -> Tridiag {
    assert!(n_nodes >= 3);
    let mut lower = vec![-r; n_nodes];
    let mut diag = vec![1.0 + shift + 2.0 * r; n_nodes];
    let mut upper = vec![-r; n_nodes];
    // mirror row: ghost node equals node 1
    upper[0] = -2.0 * r;
    // Dirichlet row
    let last = n_nodes - 1;
    lower[last] = 0.0;
    diag[last] = 1.0;
    upper[last] = 0.0;
    Tridiag::factorize(&lower, &diag, &upper)
}

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..n - 1].iter().sum();
    dx * (interior + 0.5 * (values[0] + values[n - 1]))
}

pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Monotone cubic interpolant (Fritsch-Carlson slopes). Preserves the range
/// of the data on monotone pieces, which keeps resampled densities inside
/// their physical bounds and pins exact zeros at the endpoints.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Build the interpolant. `xs` must be strictly increasing with at least
    /// two nodes.
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        let n = xs.len();
        assert!(n >= 2, "need at least two interpolation nodes");
        assert_eq!(ys.len(), n);
        for w in xs.windows(2) {
            assert!(w[1] > w[0], "interpolation nodes must be increasing");
        }

        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();

        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            slopes[0] = endpoint_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = endpoint_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
            for i in 1..n - 1 {
                let (d0, d1) = (delta[i - 1], delta[i]);
                if d0 * d1 <= 0.0 {
                    slopes[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slopes[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
        }

        Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            slopes,
        }
    }

    /// Evaluate at `x`; outside the node range the endpoint value is held.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let k = match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).expect("non-finite node"))
        {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let (y0, y1) = (self.ys[k], self.ys[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    // three-point one-sided estimate, limited to keep monotonicity
    let mut d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        d = 0.0;
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        d = 3.0 * d0;
    }
    d
}
