use std::f64::consts::PI;

use crate::{Error, Result};

const MASS_TOL: f64 = 1e-6;
const BOUNDARY_TOL: f64 = 1e-12;

/// A Lebesgue density on the line given on a grid and interpolated by a
/// natural cubic spline. Used for Stein-kernel stress tests.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated1D {
    grid: Vec<f64>,
    values: Vec<f64>,
    /// Spline second derivatives at the grid points.
    second: Vec<f64>,
}

impl Tabulated1D {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 5 || grid.len() != values.len() {
            return Err(Error::InvalidDensity(
                "tabulated density needs at least 5 grid points and one value per point".into(),
            ));
        }
        if grid.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDensity("non-finite grid or value".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidDensity("grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| *v < 0.0) {
            return Err(Error::InvalidDensity("negative density value".into()));
        }
        let (first, last) = (values[0], values[values.len() - 1]);
        if first >= BOUNDARY_TOL || last >= BOUNDARY_TOL {
            return Err(Error::InvalidDensity(format!(
                "boundary values {first:.3e}, {last:.3e} must be below {BOUNDARY_TOL:e}"
            )));
        }
        let mass: f64 = grid.windows(2).zip(values.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDensity(format!("trapezoidal mass {mass} differs from 1")));
        }
        let second = natural_spline(&grid, &values);
        Ok(Self { grid, values, second })
    }

    /// Tabulates a density function on `[lo, hi]` with `points` nodes and
    /// renormalizes the trapezoidal mass to one.
    pub fn from_fn(lo: f64, hi: f64, points: usize, p: impl Fn(f64) -> f64) -> Result<Self> {
        let grid: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
        let mut values: Vec<f64> = grid.iter().map(|&x| p(x)).collect();
        let mass: f64 = grid.windows(2).zip(values.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum();
        values.iter_mut().for_each(|v| *v /= mass);
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    /// Power-form coefficients of the spline on interval `i`:
    /// `S(x_i + u) = a + b u + c u² + d u³`.
    fn coefficients(&self, i: usize) -> [f64; 4] {
        let h = self.grid[i + 1] - self.grid[i];
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        [y0, (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0, 0.5 * m0, (m1 - m0) / (6.0 * h)]
    }

    fn locate(&self, x: f64) -> Option<usize> {
        let (lo, hi) = self.support();
        if !(lo..=hi).contains(&x) {
            return None;
        }
        let i = self.grid.partition_point(|g| *g <= x).saturating_sub(1);
        Some(i.min(self.grid.len() - 2))
    }

    /// Interpolated Lebesgue density, clamped at zero; zero off the grid.
    pub fn density(&self, x: f64) -> f64 {
        self.derivatives(x)[0].max(0.0)
    }

    /// `[p, p', p'']` at `x` from the spline (zero off the grid).
    pub fn derivatives(&self, x: f64) -> [f64; 3] {
        let Some(i) = self.locate(x) else {
            return [0.0; 3];
        };
        let [a, b, c, d] = self.coefficients(i);
        let u = x - self.grid[i];
        [a + u * (b + u * (c + u * d)), b + u * (2.0 * c + 3.0 * d * u), 2.0 * c + 6.0 * d * u]
    }

    /// Exact integral of the spline over `[x_0, x]`.
    pub fn cumulative(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        let x = x.clamp(lo, hi);
        let i = self.locate(x).expect("clamped into support");
        let whole: f64 = (0..i).map(|j| self.interval_integral(j, self.grid[j + 1] - self.grid[j])).sum();
        whole + self.interval_integral(i, x - self.grid[i])
    }

    fn interval_integral(&self, i: usize, u: f64) -> f64 {
        let [a, b, c, d] = self.coefficients(i);
        u * (a + u * (b / 2.0 + u * (c / 3.0 + u * d / 4.0)))
    }

    /// Spline mass (close to one by construction).
    pub fn spline_mass(&self) -> f64 {
        self.cumulative(self.support().1)
    }

    /// Composite Simpson on the (possibly non-uniform) grid of `g(x_i, p_i)`.
    pub fn simpson<F: Fn(f64, f64) -> f64>(&self, g: F) -> f64 {
        let ys: Vec<f64> = self.grid.iter().zip(&self.values).map(|(x, p)| g(*x, *p)).collect();
        simpson_irregular(&self.grid, &ys)
    }

    pub fn mean(&self) -> f64 {
        self.simpson(|x, p| x * p)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.simpson(|x, p| (x - m) * (x - m) * p)
    }

    pub fn second_moment(&self) -> f64 {
        self.simpson(|x, p| x * x * p)
    }

    /// Law of `X + shift`.
    pub fn translated(&self, shift: f64) -> Self {
        Self {
            grid: self.grid.iter().map(|x| x + shift).collect(),
            values: self.values.clone(),
            second: self.second.clone(),
        }
    }

    /// Density relative to `γ` at `x`: `p(x) / φ(x)`.
    pub fn relative(&self, x: f64) -> f64 {
        let p = self.density(x);
        if p == 0.0 {
            0.0
        } else {
            (p.ln() + 0.5 * x * x + 0.5 * (2.0 * PI).ln()).exp()
        }
    }

    /// `log(p(x) / φ(x))`, finite wherever `p > 0` even when `φ` underflows.
    pub fn log_relative(&self, x: f64) -> f64 {
        self.density(x).ln() + 0.5 * x * x + 0.5 * (2.0 * PI).ln()
    }

    /// `[f, f', f'']` for `f = p/φ`.
    pub fn relative_derivatives(&self, x: f64) -> [f64; 3] {
        let [p, dp, d2p] = self.derivatives(x);
        let inv_phi = (0.5 * x * x + 0.5 * (2.0 * PI).ln()).exp();
        [p.max(0.0) * inv_phi, (dp + x * p) * inv_phi, (d2p + 2.0 * x * dp + (1.0 + x * x) * p) * inv_phi]
    }

    /// Inverse of the normalized spline CDF by bisection, to `1e-12` in `x`.
    pub fn quantile(&self, q: f64) -> f64 {
        let total = self.spline_mass();
        let target = q.clamp(0.0, 1.0) * total;
        let (mut lo, mut hi) = self.support();
        while hi - lo > 1e-12 * (1.0 + hi.abs().max(lo.abs())) {
            let mid = 0.5 * (lo + hi);
            if self.cumulative(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn natural_spline(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior unknowns M_1..M_{n-2}.
    let size = n - 2;
    let mut diag = vec![0.0; size];
    let mut upper = vec![0.0; size];
    let mut rhs = vec![0.0; size];
    for k in 0..size {
        let i = k + 1;
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        diag[k] = 2.0 * (h0 + h1);
        upper[k] = h1;
        rhs[k] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    for k in 1..size {
        let lower = x[k + 1] - x[k];
        let w = lower / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    let mut sol = vec![0.0; size];
    for k in (0..size).rev() {
        let next = if k + 1 < size { upper[k] * sol[k + 1] } else { 0.0 };
        sol[k] = (rhs[k] - next) / diag[k];
    }
    m[1..n - 1].copy_from_slice(&sol);
    m
}

/// Composite Simpson for irregular abscissas; an odd interval count closes
/// with the parabola through the last three points.
pub(crate) fn simpson_irregular(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    if n < 3 {
        return x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (a[1] - a[0]) * (b[0] + b[1])).sum();
    }
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut acc = 0.0;
    let mut i = 0;
    while i < paired {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        acc += (h0 + h1) / 6.0
            * ((2.0 - h1 / h0) * y[i] + (h0 + h1) * (h0 + h1) / (h0 * h1) * y[i + 1] + (2.0 - h0 / h1) * y[i + 2]);
        i += 2;
    }
    if intervals % 2 == 1 {
        let h0 = x[n - 2] - x[n - 3];
        let h1 = x[n - 1] - x[n - 2];
        let alpha = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
        let beta = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
        let eta = h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
        acc += alpha * y[n - 1] + beta * y[n - 2] - eta * y[n - 3];
    }
    acc
}
