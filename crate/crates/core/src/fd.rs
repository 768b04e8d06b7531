//! Semi-implicit finite differences for `∂t u − c ∂x u − D ∂xx u = R(x, u)`
//! on a bounded interval with zero-flux ends.
//!
//! Diffusion and transport are implicit (centered), the reaction is explicit.
//! Each step solves one tridiagonal system with a pre-factorized Thomas sweep.
//! The discrete steady states do not depend on `dt`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform mesh `x_i = x_min + i·dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter {
                field: "grid.n".into(),
                reason: format!("need at least 3 nodes, got {n}"),
            });
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidParameter {
                field: "grid.x_max".into(),
                reason: format!("empty interval [{x_min}, {x_max}]"),
            });
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Mesh with spacing as close as possible to `dx` (exact when `dx` divides the length).
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::InvalidParameter {
                field: "grid.dx".into(),
                reason: format!("spacing must be positive, got {dx}"),
            });
        }
        let cells = ((x_max - x_min) / dx).round() as usize;
        Self::new(x_min, x_max, cells + 1)
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Trapezoid weights, the invariant measure of the Neumann Laplacian.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut w = vec![dx; self.n];
        w[0] = 0.5 * dx;
        w[self.n - 1] = 0.5 * dx;
        w
    }

    /// Fraction of the control cell `[x_i − dx/2, x_i + dx/2]` covered by `(a, b)`.
    ///
    /// Indicator coefficients sampled this way vary continuously with the
    /// interval ends, which keeps threshold searches in the zone width smooth.
    pub fn cell_fraction(&self, i: usize, a: f64, b: f64) -> f64 {
        let dx = self.dx();
        let xi = self.x(i);
        let lo = (xi - 0.5 * dx).max(self.x_min);
        let hi = (xi + 0.5 * dx).min(self.x_max);
        let overlap = (hi.min(b) - lo.max(a)).max(0.0);
        overlap / (hi - lo)
    }
}

/// Nodal profile at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn from_fn(grid: Grid1D, f: impl FnMut(f64) -> f64) -> Self {
        Self {
            values: grid.nodes().map(f).collect(),
            grid,
            time: 0.0,
        }
    }

    pub fn constant(grid: Grid1D, value: f64) -> Self {
        Self::from_fn(grid, |_| value)
    }

    /// Linear interpolation, clamped to the end values outside the mesh.
    pub fn sample(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g.x_min {
            return self.values[0];
        }
        if x >= g.x_max {
            return self.values[g.n - 1];
        }
        let s = (x - g.x_min) / g.dx();
        let i = (s.floor() as usize).min(g.n - 2);
        let t = s - i as f64;
        (1.0 - t) * self.values[i] + t * self.values[i + 1]
    }

    /// Centered slope of the interpolant at `x`, using a `±dx` stencil.
    pub fn slope(&self, x: f64) -> f64 {
        let dx = self.grid.dx();
        (self.sample(x + dx) - self.sample(x - dx)) / (2.0 * dx)
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Time step, frame speed and diffusivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub dt: f64,
    pub c: f64,
    pub d: f64,
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Validation("scheme.dt".into()));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::Validation("scheme.d".into()));
        }
        if !self.c.is_finite() {
            return Err(Error::Validation("scheme.c".into()));
        }
        Ok(())
    }

    /// Mesh Péclet number `|c|·dx / (2D)`; the centered scheme is monotone when ≤ 1.
    pub fn peclet(&self, grid: &Grid1D) -> f64 {
        self.c.abs() * grid.dx() / (2.0 * self.d)
    }
}

/// Three diagonals of a tridiagonal matrix; `lower[0]` and `upper[n-1]` are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Off-diagonals non-positive and rows weakly diagonally dominant: an M-matrix.
    pub fn is_monotone(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            let l = if i > 0 { self.lower[i] } else { 0.0 };
            let u = if i + 1 < n { self.upper[i] } else { 0.0 };
            l <= 0.0 && u <= 0.0 && self.diag[i] >= l.abs() + u.abs()
        })
    }

    pub fn factor(&self) -> Thomas {
        Thomas::new(self)
    }
}

/// `I − dt·(D·Δ_h + c·∇_h) + dt·decay·I` with mirrored ghost nodes at both ends.
pub fn build_operator(scheme: &SchemeParams, grid: &Grid1D) -> Tridiagonal {
    build_operator_with_decay(scheme, grid, 0.0)
}

/// As [`build_operator`], with an implicit linear decay term `−decay·u` added.
pub fn build_operator_with_decay(scheme: &SchemeParams, grid: &Grid1D, decay: f64) -> Tridiagonal {
    let n = grid.n;
    let dx = grid.dx();
    let diff = scheme.dt * scheme.d / (dx * dx);
    let adv = scheme.dt * scheme.c / (2.0 * dx);
    let centre = 1.0 + 2.0 * diff + scheme.dt * decay;
    let mut lower = vec![-(diff - adv); n];
    let mut upper = vec![-(diff + adv); n];
    let diag = vec![centre; n];
    // ghost u_{-1} = u_1: the advective difference vanishes, diffusion doubles
    lower[0] = 0.0;
    upper[0] = -2.0 * diff;
    lower[n - 1] = -2.0 * diff;
    upper[n - 1] = 0.0;
    Tridiagonal { lower, diag, upper }
}

/// Pre-factorized Thomas elimination for repeated solves with one matrix.
#[derive(Debug, Clone)]
pub struct Thomas {
    lower: Vec<f64>,
    upper_mod: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Thomas {
    pub fn new(a: &Tridiagonal) -> Self {
        let n = a.len();
        let mut upper_mod = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = if i == 0 {
                a.diag[0]
            } else {
                a.diag[i] - a.lower[i] * prev
            };
            inv_pivot[i] = 1.0 / pivot;
            prev = if i + 1 < n { a.upper[i] / pivot } else { 0.0 };
            upper_mod[i] = prev;
        }
        Self {
            lower: a.lower.clone(),
            upper_mod,
            inv_pivot,
        }
    }

    /// Overwrites `rhs` with the solution of `A x = rhs`.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper_mod[i] * rhs[i + 1];
        }
    }
}

/// Owns the factorized operator for one `(scheme, grid)` pair.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub grid: Grid1D,
    pub scheme: SchemeParams,
    solver: Thomas,
    rhs: Vec<f64>,
}

impl Stepper {
    pub fn new(scheme: SchemeParams, grid: Grid1D) -> Result<Self> {
        Self::with_decay(scheme, grid, 0.0)
    }

    pub fn with_decay(scheme: SchemeParams, grid: Grid1D, decay: f64) -> Result<Self> {
        scheme.validate()?;
        let op = build_operator_with_decay(&scheme, &grid, decay);
        Ok(Self {
            grid,
            scheme,
            solver: op.factor(),
            rhs: vec![0.0; grid.n],
        })
    }

    /// One step `A u^{n+1} = u^n + dt·R(i, u^n_i)`.
    pub fn step<R: Fn(usize, f64) -> f64>(&mut self, u: &mut Field, rate: R) -> Result<()> {
        let dt = self.scheme.dt;
        for (i, (r, &v)) in self.rhs.iter_mut().zip(&u.values).enumerate() {
            *r = v + dt * rate(i, v);
        }
        self.solver.solve_in_place(&mut self.rhs);
        if let Some(node) = self.rhs.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                time: u.time + dt,
                node,
            });
        }
        u.values.copy_from_slice(&self.rhs);
        u.time += dt;
        Ok(())
    }

    /// Linear step with an explicit node-wise source: `A u^{n+1} = u^n + dt·s_i`.
    pub fn step_with_source(&mut self, u: &mut Field, source: &[f64]) -> Result<()> {
        self.step(u, |i, _| source[i])
    }
}

/// Single step on a fresh operator.
pub fn step<R: Fn(usize, f64) -> f64>(u: &Field, scheme: SchemeParams, rate: R) -> Result<Field> {
    let mut s = Stepper::new(scheme, u.grid)?;
    let mut out = u.clone();
    s.step(&mut out, rate)?;
    Ok(out)
}

/// Cauchy-criterion settings for steady-state detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyOptions {
    pub eps: f64,
    pub t_check: f64,
    pub t_max: f64,
}

impl SteadyOptions {
    pub fn for_dt(dt: f64) -> Self {
        Self {
            eps: 1e-8,
            t_check: 50.0 * dt,
            t_max: 1e5,
        }
    }

    pub fn validate(&self, dt: f64) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::Validation("steady.eps".into()));
        }
        if !(self.t_check >= dt) {
            return Err(Error::Validation("steady.t_check".into()));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::Validation("steady.t_max".into()));
        }
        Ok(())
    }
}

/// Result of [`run_until_steady`].
#[derive(Debug, Clone)]
pub struct SteadyRun {
    pub field: Field,
    pub elapsed: f64,
    /// Max-norm of `u(t) − u(t − t_check)` at the last check.
    pub residual: f64,
    pub converged: bool,
}

/// Steps until the max-norm change over one `t_check` interval is at most `eps`,
/// or `t_max` is reached (reported as `converged = false`).
pub fn run_until_steady<R: Fn(usize, f64) -> f64>(
    u0: Field,
    stepper: &mut Stepper,
    rate: R,
    opts: &SteadyOptions,
) -> Result<SteadyRun> {
    run_until_steady_observed(u0, stepper, rate, opts, |_, _| {})
}

/// As [`run_until_steady`], handing the step count and state to `observe`
/// after every step (and once for the initial state, with count 0).
pub fn run_until_steady_observed<R: Fn(usize, f64) -> f64, O: FnMut(usize, &Field)>(
    u0: Field,
    stepper: &mut Stepper,
    rate: R,
    opts: &SteadyOptions,
    mut observe: O,
) -> Result<SteadyRun> {
    observe(0, &u0);
    opts.validate(stepper.scheme.dt)?;
    let dt = stepper.scheme.dt;
    let per_check = ((opts.t_check / dt).round() as usize).max(1);
    let max_steps = (opts.t_max / dt).ceil() as usize;
    let t0 = u0.time;
    let mut u = u0;
    let mut previous = u.values.clone();
    let mut residual = f64::INFINITY;
    let mut steps = 0usize;
    while steps < max_steps {
        for k in 1..=per_check {
            stepper.step(&mut u, &rate)?;
            observe(steps + k, &u);
        }
        steps += per_check;
        residual = u
            .values
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual <= opts.eps {
            let elapsed = u.time - t0;
            return Ok(SteadyRun {
                field: u,
                elapsed,
                residual,
                converged: true,
            });
        }
        previous.copy_from_slice(&u.values);
    }
    let elapsed = u.time - t0;
    Ok(SteadyRun {
        field: u,
        elapsed,
        residual,
        converged: false,
    })
}

/// Largest `x` where the piecewise-linear interpolant of `u` crosses `level`.
pub fn measure_front_position(u: &Field, level: f64) -> Result<f64> {
    let v = &u.values;
    for i in (0..v.len() - 1).rev() {
        let (a, b) = (v[i] - level, v[i + 1] - level);
        if b == 0.0 && a != 0.0 {
            return Ok(u.grid.x(i + 1));
        }
        if a == 0.0 && b != 0.0 {
            return Ok(u.grid.x(i));
        }
        if a * b < 0.0 {
            let t = a / (a - b);
            return Ok(u.grid.x(i) + t * u.grid.dx());
        }
    }
    Err(Error::NoCrossing { level })
}
