//! Phase-plane layer: explicit super-solutions, tails, front speed and the
//! matching conditions that characterise the critical killing width.
//!
//! Steady profiles solve `−c u′ − u″ = g(u)` outside the zone and
//! `−c u′ − u″ = −μ u` inside it. Outside the zone we work with the first
//! order system `u′ = p`, `p′ = −c p − g(u)` and follow the two invariant
//! manifolds that carry the tails: the one leaving the upper state (left of
//! the zone) and the one entering 0 (right of the zone). Inside the zone the
//! equation is linear with constant coefficients and is solved in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{measure_front_position, Field, Grid1D, SchemeParams, Stepper};
use crate::ode::{integrate, OdeOptions, Stop};
use crate::reaction::{derive_info, Bistable};
use crate::roots::bisect;

/// Distance from an equilibrium at which a manifold is seeded by its linearisation.
pub const SEED_OFFSET: f64 = 1e-6;

/// Constants of the zone equation `u″ + c u′ − μ u = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KillingAnalytic {
    pub c: f64,
    pub mu: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Discriminant `c² + 4μ`.
    pub delta: f64,
}

impl KillingAnalytic {
    pub fn new(c: f64, mu: f64) -> Result<Self> {
        if !(mu > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter {
                field: "strategy.mu".into(),
                reason: format!("kill rate must be positive, got {mu}"),
            });
        }
        let delta = c * c + 4.0 * mu;
        let s = delta.sqrt();
        // written to avoid cancellation when |c| ≫ √μ
        let (lambda_plus, lambda_minus) = if c >= 0.0 {
            let lm = -(c + s) / 2.0;
            (-mu / lm, lm)
        } else {
            let lp = (s - c) / 2.0;
            (lp, -mu / lp)
        };
        Ok(Self {
            c,
            mu,
            lambda_plus,
            lambda_minus,
            delta,
        })
    }

    /// `ψ₁(s) = e^{cs}[−c sinh(√Δ s) + √Δ cosh(√Δ s)]`.
    pub fn psi1(&self, s: f64) -> f64 {
        let r = self.delta.sqrt();
        (self.c * s).exp() * (-self.c * (r * s).sinh() + r * (r * s).cosh())
    }

    /// Zone solution with value `u_l` and slope `p_l` at the right edge,
    /// evaluated at `y = x − L`; returns `(u, u′)`.
    pub fn zone_state(&self, u_l: f64, p_l: f64, y: f64) -> (f64, f64) {
        let (lp, lm) = (self.lambda_plus, self.lambda_minus);
        let a = (p_l - lm * u_l) / (lp - lm);
        let b = (lp * u_l - p_l) / (lp - lm);
        let (ep, em) = ((lp * y).exp(), (lm * y).exp());
        (a * ep + b * em, a * lp * ep + b * lm * em)
    }
}

/// Super-solution on the zone with `v₁(L) = γ`, `v₁′(L) = 0`.
pub fn v1_profile(an: &KillingAnalytic, gamma: f64, width: f64, x: f64) -> f64 {
    an.zone_state(gamma, 0.0, x - width).0
}

/// Derivative of [`v1_profile`].
pub fn v1_derivative(an: &KillingAnalytic, gamma: f64, width: f64, x: f64) -> f64 {
    an.zone_state(gamma, 0.0, x - width).1
}

/// Width `L` at which the super-solution reaches 1 at the left edge of the zone.
pub fn solve_super_width(an: &KillingAnalytic, gamma0: f64) -> Result<f64> {
    let spread = an.lambda_plus - an.lambda_minus;
    let edge = |l: f64| gamma0 * an.psi1(l / 2.0) / spread - 1.0;
    if edge(0.0) >= 0.0 {
        return Err(Error::NoBracket(format!(
            "γ√Δ/(λ₊−λ₋) = {} is already ≥ 1 at zero width",
            edge(0.0) + 1.0
        )));
    }
    let mut hi = 1.0;
    while edge(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoBracket("super-solution never reaches 1".into()));
        }
    }
    bisect(edge, 0.0, hi, 1e-13)
}

/// Exponential decay rate of a profile at `+∞`.
pub fn tail_decay_rate<G: Bistable + ?Sized>(term: &G, c: f64) -> f64 {
    let g0 = term.derivative(0.0).abs();
    ((c * c + 4.0 * g0).sqrt() - c.abs()) / 2.0
}

/// An orbit of `u′ = p`, `p′ = −cp − g(u)` stored densely in `x`.
///
/// Samples are ordered along the direction of integration; `dissipation`
/// holds `∫ p² dx` accumulated from the first sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePath {
    pub c: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub dissipation: Vec<f64>,
    /// `g(u)` at each sample, kept for Hermite interpolation of `p`.
    rate: Vec<f64>,
}

impl PhasePath {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// `(u, p)` at the last sample.
    pub fn end(&self) -> (f64, f64) {
        let n = self.len() - 1;
        (self.u[n], self.p[n])
    }

    fn hermite(t: f64, h: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
        let s = t / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * d1
    }

    fn state_in(&self, k: usize, t: f64) -> (f64, f64) {
        let h = self.x[k + 1] - self.x[k];
        let u = Self::hermite(t, h, self.u[k], self.u[k + 1], self.p[k], self.p[k + 1]);
        let dp = |j: usize| -self.c * self.p[j] - self.rate[j];
        let p = Self::hermite(t, h, self.p[k], self.p[k + 1], dp(k), dp(k + 1));
        (u, p)
    }

    /// Slope `p` where the path passes through density `u`; `None` outside its range.
    pub fn p_at(&self, u: f64) -> Option<f64> {
        let n = self.len();
        let (lo, hi) = if self.u[0] <= self.u[n - 1] {
            (self.u[0], self.u[n - 1])
        } else {
            (self.u[n - 1], self.u[0])
        };
        if !(u >= lo && u <= hi) {
            return None;
        }
        let increasing = self.u[n - 1] >= self.u[0];
        // the path is monotone in u, so locate the bracketing interval by bisection
        let k = {
            let (mut a, mut b) = (0usize, n - 1);
            while b - a > 1 {
                let m = (a + b) / 2;
                if (self.u[m] <= u) == increasing {
                    a = m;
                } else {
                    b = m;
                }
            }
            a
        };
        let h = self.x[k + 1] - self.x[k];
        if h == 0.0 {
            return Some(self.p[k]);
        }
        let f = |t: f64| self.state_in(k, t).0 - u;
        let t = if f(0.0) == 0.0 {
            0.0
        } else if f(h) == 0.0 {
            h
        } else {
            bisect(f, 0.0, h, 1e-15 * h.abs().max(1.0)).unwrap_or(0.5 * h)
        };
        Some(self.state_in(k, t).1)
    }

    /// `∫ p² dx` from the start of the path to the point where it crosses `u`.
    pub fn dissipation_to(&self, u: f64) -> Option<f64> {
        let n = self.len();
        let i = (0..n - 1).find(|&i| (self.u[i] - u) * (self.u[i + 1] - u) <= 0.0)?;
        let w = if self.u[i + 1] == self.u[i] {
            0.0
        } else {
            (u - self.u[i]) / (self.u[i + 1] - self.u[i])
        };
        Some(self.dissipation[i] + w * (self.dissipation[i + 1] - self.dissipation[i]))
    }
}

fn ode_options() -> OdeOptions {
    OdeOptions {
        rtol: 1e-10,
        atol: 1e-15,
        h_init: 1e-3,
        h_max: 0.05,
        max_steps: 5_000_000,
    }
}

/// Integrates the orbit through `(u_start, p_start)` in `x` (forward for
/// `forward = true`) until `u` reaches `u_end`, `p` reaches 0, or `x_budget`
/// is exhausted.
fn trace<G: Bistable + ?Sized>(
    term: &G,
    c: f64,
    u_start: f64,
    p_start: f64,
    u_end: f64,
    forward: bool,
    x_budget: f64,
) -> Result<(PhasePath, Stop)> {
    let rhs = |_: f64, y: &[f64; 3]| [y[1], -c * y[1] - term.rate(y[0]), y[1] * y[1]];
    let reach = move |_: f64, y: &[f64; 3]| y[0] - u_end;
    let turn = |_: f64, y: &[f64; 3]| y[1];
    let mut path = PhasePath {
        c,
        x: Vec::new(),
        u: Vec::new(),
        p: Vec::new(),
        dissipation: Vec::new(),
        rate: Vec::new(),
    };
    let x_end = if forward { x_budget } else { -x_budget };
    let sol = integrate(
        rhs,
        0.0,
        [u_start, p_start, 0.0],
        x_end,
        &ode_options(),
        &[&reach, &turn],
        |x, y| {
            path.x.push(x);
            path.u.push(y[0]);
            path.p.push(y[1]);
            path.dissipation.push(y[2].abs());
            path.rate.push(term.rate(y[0]));
        },
    )?;
    Ok((path, sol.stop))
}

/// Follows the orbit from `(u_start, p_start)` with `p < 0` down to `u_end`.
///
/// Fails with [`Error::PathTerminates`] when `p` returns to 0 first, or when
/// the orbit stalls near an equilibrium without reaching `u_end`.
pub fn phase_tail<G: Bistable + ?Sized>(
    term: &G,
    c: f64,
    u_start: f64,
    u_end: f64,
    p_start: f64,
) -> Result<PhasePath> {
    if !(p_start < 0.0) || !(u_end < u_start) {
        return Err(Error::Domain(format!(
            "phase tail needs p_start < 0 and u_end < u_start, got p_start = {p_start}, [{u_end}, {u_start}]"
        )));
    }
    let (path, stop) = trace(term, c, u_start, p_start, u_end, true, 1e4)?;
    match stop {
        Stop::Event(0) => Ok(path),
        _ => Err(Error::PathTerminates(path.end().0)),
    }
}

/// Upper equilibrium and the slope of the orbit leaving it, `p = −r (F − u)`.
fn upper_seed<G: Bistable + ?Sized>(term: &G, c: f64, upper: f64) -> (f64, f64) {
    let g1 = term.derivative(upper).abs();
    let r = (-c + (c * c + 4.0 * g1).sqrt()) / 2.0;
    let gap = SEED_OFFSET * upper;
    (upper - gap, -r * gap)
}

/// Orbit leaving the upper equilibrium with `p < 0`, traced down to `u_floor`.
///
/// Its slope at `u` is the interface slope demanded at the left edge of the zone.
pub fn left_manifold<G: Bistable + ?Sized>(term: &G, c: f64, u_floor: f64) -> Result<LeftManifold> {
    let info = derive_info(term)?;
    let (u0, p0) = upper_seed(term, c, info.f_upper);
    let path = phase_tail(term, c, u0, u_floor, p0)?;
    Ok(LeftManifold {
        path,
        upper: info.f_upper,
        seed_rate: -p0 / (info.f_upper - u0),
    })
}

#[derive(Debug, Clone)]
pub struct LeftManifold {
    pub path: PhasePath,
    pub upper: f64,
    seed_rate: f64,
}

impl LeftManifold {
    /// Slope of the left tail at density `u`, linearised in the seed gap.
    pub fn slope(&self, u: f64) -> Option<f64> {
        if u >= self.path.u[0] && u <= self.upper {
            return Some(-self.seed_rate * (self.upper - u));
        }
        self.path.p_at(u)
    }

    /// `∫ p² dx` over the tail from the upper state down to `u`.
    pub fn dissipation(&self, u: f64) -> Option<f64> {
        if u >= self.path.u[0] {
            return Some(0.0);
        }
        self.path.dissipation_to(u)
    }
}

/// Orbit entering 0 from above, traced backwards in `x` from a seed near 0
/// until `p` returns to 0 (its top, the local maximum `φ₀`) or the orbit
/// settles towards the middle equilibrium.
#[derive(Debug, Clone)]
pub struct RightManifold {
    pub path: PhasePath,
    /// Density where the orbit turns, if it does.
    pub top: Option<f64>,
    seed: (f64, f64),
    decay: f64,
}

pub fn right_manifold<G: Bistable + ?Sized>(term: &G, c: f64) -> Result<RightManifold> {
    let info = derive_info(term)?;
    let decay = -tail_decay_rate(term, c);
    let decay = if c > 0.0 {
        // the formula above assumes c ≤ 0; use the exact stable root otherwise
        let g0 = term.derivative(0.0).abs();
        (-c - (c * c + 4.0 * g0).sqrt()) / 2.0
    } else {
        decay
    };
    let u0 = SEED_OFFSET * info.f_prime;
    let p0 = decay * u0;
    let (path, stop) = trace(term, c, u0, p0, info.f_upper, false, 2e3)?;
    let top = match stop {
        Stop::Event(1) => Some(path.end().0),
        _ => None,
    };
    Ok(RightManifold {
        path,
        top,
        seed: (u0, p0),
        decay,
    })
}

impl RightManifold {
    /// Slope of the right tail at density `u`.
    pub fn slope(&self, u: f64) -> Option<f64> {
        if u >= 0.0 && u <= self.seed.0 {
            return Some(self.decay * u);
        }
        self.path.p_at(u)
    }
}

/// Local maximum `φ₀` reached by a critical eradication profile: the top of the
/// orbit entering 0. Fails when that orbit never turns (fast zones).
pub fn critical_top<G: Bistable + ?Sized>(term: &G, c: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(derive_info(term)?.beta);
    }
    right_manifold(term, c)?
        .top
        .ok_or_else(|| Error::HypothesisViolation(format!("no critical profile at c = {c}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalRegime {
    CriticalSolutionExists,
    CriticalSolutionAbsent,
}

/// A critical eradication profile exists iff `|c| < 2√g′(α)`.
pub fn critical_regime<G: Bistable + ?Sized>(term: &G, c: f64) -> Result<CriticalRegime> {
    let info = derive_info(term)?;
    let threshold = 2.0 * term.derivative(info.f_prime).sqrt();
    Ok(if c.abs() < threshold {
        CriticalRegime::CriticalSolutionExists
    } else {
        CriticalRegime::CriticalSolutionAbsent
    })
}

/// Matching data for the critical profile at one speed.
pub struct CriticalMatching<'a, G: Bistable + ?Sized> {
    pub term: &'a G,
    pub analytic: KillingAnalytic,
    pub top: f64,
    pub left: LeftManifold,
}

impl<'a, G: Bistable + ?Sized> CriticalMatching<'a, G> {
    pub fn new(term: &'a G, c: f64, mu: f64) -> Result<Self> {
        let analytic = KillingAnalytic::new(c, mu)?;
        let top = critical_top(term, c)?;
        let left = left_manifold(term, c, 0.5 * top)?;
        Ok(Self {
            term,
            analytic,
            top,
            left,
        })
    }

    /// Difference between the left-tail slope and the zone slope at `x = 0⁺`
    /// for the zone profile that peaks at `φ₀` exactly at `x = L`.
    pub fn residual(&self, width: f64) -> Result<f64> {
        let (u0, du0) = self.analytic.zone_state(self.top, 0.0, -width);
        if u0 > self.left.upper * (1.0 + 1e-9) {
            return Err(Error::Domain(format!(
                "zone profile exceeds the upper state at x = 0 for L = {width}"
            )));
        }
        let p = self
            .left
            .slope(u0.min(self.left.upper))
            .ok_or_else(|| Error::PathTerminates(u0))?;
        Ok(p - du0)
    }

    /// Width at which the zone profile reaches the upper state at `x = 0`.
    pub fn saturating_width(&self) -> Result<f64> {
        solve_super_width(&self.analytic, self.top / self.left.upper)
    }
}

/// Residual of the critical matching condition (zero at the analytic width).
pub fn critical_matching_residual<G: Bistable + ?Sized>(term: &G, c: f64, mu: f64, width: f64) -> Result<f64> {
    CriticalMatching::new(term, c, mu)?.residual(width)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingRoot {
    pub width: f64,
    pub top: f64,
    /// Whether the residual was monotone on 50 samples of the bracket.
    pub monotone: bool,
}

/// Root in `L` of [`critical_matching_residual`] on `[0, L₁]`, `L₁` being the
/// width where the zone profile reaches the upper state at `x = 0`.
pub fn matching_width<G: Bistable + ?Sized>(term: &G, c: f64, mu: f64) -> Result<MatchingRoot> {
    let m = CriticalMatching::new(term, c, mu)?;
    let l1 = m.saturating_width()?;
    let f = |l: f64| m.residual(l.min(l1)).unwrap_or(f64::NAN);
    let samples: Vec<f64> = (0..50).map(|k| f(l1 * k as f64 / 49.0)).collect();
    let monotone = samples.windows(2).all(|w| w[1] >= w[0]) || samples.windows(2).all(|w| w[1] <= w[0]);
    let width = bisect(f, 0.0, l1, 1e-12)?;
    Ok(MatchingRoot {
        width,
        top: m.top,
        monotone,
    })
}

/// The eradication profile family: for each interface value `v = u(L)` on the
/// orbit entering 0, the width `L(v)` at which the zone profile lands on the
/// left tail. The minimal width over the family is the threshold `Λ(c)`.
pub struct EradicationFamily<'a, G: Bistable + ?Sized> {
    pub term: &'a G,
    pub analytic: KillingAnalytic,
    pub right: RightManifold,
    pub left: LeftManifold,
}

/// Minimum of the family's width together with the interface value attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldPoint {
    pub width: f64,
    pub interface_value: f64,
}

impl<'a, G: Bistable + ?Sized> EradicationFamily<'a, G> {
    pub fn new(term: &'a G, c: f64, mu: f64) -> Result<Self> {
        let analytic = KillingAnalytic::new(c, mu)?;
        let right = right_manifold(term, c)?;
        let left = left_manifold(term, c, right.seed.0)?;
        Ok(Self {
            term,
            analytic,
            right,
            left,
        })
    }

    /// Largest interface value on the right tail: its top, or the density it
    /// settles to when it never turns.
    pub fn v_max(&self) -> f64 {
        self.top_or_end()
    }

    fn top_or_end(&self) -> f64 {
        self.right.top.unwrap_or_else(|| self.right.path.end().0)
    }

    /// Width of the family member with interface value `v`.
    pub fn width(&self, v: f64) -> Result<f64> {
        let p_r = self
            .right
            .slope(v)
            .ok_or_else(|| Error::Domain(format!("interface value {v} is off the right tail")))?;
        let upper = self.left.upper;
        let state = |l: f64| self.analytic.zone_state(v, p_r, -l);
        let f = |l: f64| {
            let (u0, du0) = state(l);
            match self.left.slope(u0.min(upper)) {
                Some(p) => p - du0,
                None => f64::NAN,
            }
        };
        let mut hi = 1.0;
        while state(hi).0 < upper {
            hi *= 1.5;
            if hi > 1e4 {
                return Err(Error::NoBracket(format!("zone profile from v = {v} never saturates")));
            }
        }
        bisect(f, 0.0, hi, 1e-12)
    }

    /// Minimal width over interface values in `(0, v_max]`, by a scan over
    /// `n` points followed by golden-section refinement.
    pub fn fold(&self, n: usize) -> Result<FoldPoint> {
        let v_hi = self.v_max();
        let v_lo = self.right.seed.0.max(1e-4 * v_hi);
        let pts: Vec<f64> = (0..n).map(|k| v_lo + (v_hi - v_lo) * k as f64 / (n - 1) as f64).collect();
        let widths: Vec<f64> = pts
            .iter()
            .map(|&v| self.width(v).unwrap_or(f64::INFINITY))
            .collect();
        let k = (0..n)
            .min_by(|&a, &b| widths[a].total_cmp(&widths[b]))
            .ok_or_else(|| Error::NoBracket("empty family scan".into()))?;
        let (mut a, mut b) = (pts[k.saturating_sub(1)], pts[(k + 1).min(n - 1)]);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let w = |v: f64| self.width(v).unwrap_or(f64::INFINITY);
        let mut x1 = b - phi * (b - a);
        let mut x2 = a + phi * (b - a);
        let (mut f1, mut f2) = (w(x1), w(x2));
        for _ in 0..80 {
            if b - a < 1e-10 {
                break;
            }
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = w(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = w(x2);
            }
        }
        let v = 0.5 * (a + b);
        let best = [(w(v), v), (widths[k], pts[k])]
            .into_iter()
            .min_by(|p, q| p.0.total_cmp(&q.0))
            .expect("two candidates");
        Ok(FoldPoint {
            width: best.0,
            interface_value: best.1,
        })
    }
}

/// Settings for the lab-frame front-speed measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedOptions {
    pub grid: Grid1D,
    pub dt: f64,
    pub d: f64,
    pub t_end: f64,
    /// Front level as a fraction of the upper state.
    pub level: f64,
    /// Largest accepted RMS deviation of the positions from the fitted line.
    pub tolerance: f64,
}

impl Default for SpeedOptions {
    fn default() -> Self {
        Self {
            grid: Grid1D::with_spacing(-75.0, 75.0, 0.03).expect("static grid"),
            dt: 0.05,
            d: 1.0,
            t_end: 150.0,
            level: 0.5,
            tolerance: 0.1,
        }
    }
}

/// Measured front speed with its regression diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedMeasurement {
    pub speed: f64,
    pub residual: f64,
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
}

/// Evolves a step datum placed at the first quarter of the grid in the lab
/// frame and fits a line to the front position over the second half of the run.
pub fn natural_speed<G: Bistable + ?Sized>(term: &G, opts: &SpeedOptions) -> Result<SpeedMeasurement> {
    let info = derive_info(term)?;
    let grid = opts.grid;
    let start = grid.x_min + 0.25 * (grid.x_max - grid.x_min);
    let scheme = SchemeParams {
        dt: opts.dt,
        c: 0.0,
        d: opts.d,
    };
    scheme.validate()?;
    let mut stepper = Stepper::new(scheme, grid)?;
    let upper = info.f_upper;
    let mut u = Field::from_fn(grid, |x| if x < start { upper } else { 0.0 });
    let level = opts.level * upper;
    let steps = (opts.t_end / opts.dt).round() as usize;
    let stride = ((1.0 / opts.dt).round() as usize).max(1);
    let mut times = Vec::new();
    let mut positions = Vec::new();
    for k in 1..=steps {
        stepper.step(&mut u, |_, v| term.rate(v))?;
        if k % stride == 0 {
            times.push(u.time);
            positions.push(measure_front_position(&u, level)?);
        }
    }
    let half = times.len() / 2;
    let (ts, xs) = (&times[half..], &positions[half..]);
    let n = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / n;
    let xm = xs.iter().sum::<f64>() / n;
    let sxy: f64 = ts.iter().zip(xs).map(|(t, x)| (t - tm) * (x - xm)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - tm).powi(2)).sum();
    let speed = sxy / sxx;
    let residual = (ts
        .iter()
        .zip(xs)
        .map(|(t, x)| (x - xm - speed * (t - tm)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    if !(residual <= opts.tolerance) {
        return Err(Error::UndecidedSpeed {
            residual,
            tolerance: opts.tolerance,
        });
    }
    Ok(SpeedMeasurement {
        speed,
        residual,
        times,
        positions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::CubicReaction;

    fn cubic() -> CubicReaction {
        CubicReaction { alpha: 0.25 }
    }

    #[test]
    fn root_relations() {
        for &(c, mu) in &[(0.0, 1.0), (-0.5, 1.0), (-2.2, 0.3), (-40.0, 1.0), (0.7, 2.0)] {
            let a = KillingAnalytic::new(c, mu).unwrap();
            assert!(a.lambda_minus < 0.0 && a.lambda_plus > 0.0);
            assert!((a.lambda_plus * a.lambda_minus + mu).abs() < 1e-14 * mu.max(1.0));
            assert!((a.lambda_plus + a.lambda_minus + c).abs() < 1e-13 * c.abs().max(1.0));
        }
    }

    #[test]
    fn v1_edge_values_and_ode() {
        let a = KillingAnalytic::new(-0.7, 1.3).unwrap();
        let (g, l) = (0.1, 4.0);
        assert!((v1_profile(&a, g, l, l) - g).abs() < 1e-15);
        assert!(v1_derivative(&a, g, l, l).abs() < 1e-15);
        assert!(v1_derivative(&a, g, l, 0.0) < 0.0);
        for k in 0..1000 {
            let x = l * k as f64 / 999.0;
            let (v, dv) = a.zone_state(g, 0.0, x - l);
            // second derivative from the exponential representation
            let h = 1e-4;
            let d2 = (v1_derivative(&a, g, l, x + h) - v1_derivative(&a, g, l, x - h)) / (2.0 * h);
            assert!((-a.c * dv - d2 + a.mu * v).abs() < 1e-7);
        }
    }

    #[test]
    fn v1_is_cosh_at_rest() {
        let a = KillingAnalytic::new(0.0, 1.0).unwrap();
        for x in [0.0, 0.5, 1.7, 3.0] {
            let want = 0.2 * (x - 3.0f64).cosh();
            assert!((v1_profile(&a, 0.2, 3.0, x) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn super_width_inverts_cosh() {
        let a = KillingAnalytic::new(0.0, 1.0).unwrap();
        let l = solve_super_width(&a, 0.1).unwrap();
        assert!((l - 10f64.acosh()).abs() < 1e-10, "{l}");
        assert!((v1_profile(&a, 0.1, l, 0.0) - 1.0).abs() < 1e-10);
        let faster = solve_super_width(&KillingAnalytic::new(-1.0, 1.0).unwrap(), 0.1).unwrap();
        assert!(faster > l);
        assert!(matches!(solve_super_width(&a, 1.2), Err(Error::NoBracket(_))));
    }

    #[test]
    fn decay_rate_formula() {
        assert!((tail_decay_rate(&cubic(), 0.0) - 0.5).abs() < 1e-9);
        assert!(tail_decay_rate(&cubic(), -1e4) < 1e-4);
        assert!(tail_decay_rate(&cubic(), -1e4) > 0.0);
    }

    #[test]
    fn standing_connection_reaches_zero() {
        let g = cubic();
        let left = left_manifold(&g, 0.0, 0.0).unwrap();
        let p0 = left.slope(0.0).unwrap();
        assert!((p0 + (1.0f64 / 12.0).sqrt()).abs() < 1e-8, "{p0}");
        // energy identity along the path
        let pot = |u: f64| g.potential(u);
        for (&u, &p) in left.path.u.iter().zip(&left.path.p) {
            assert!((p * p - 2.0 * (pot(1.0) - pot(u))).abs() < 1e-8);
        }
    }

    #[test]
    fn tiny_start_slope_keeps_energy() {
        let g = cubic();
        let path = phase_tail(&g, 0.0, 1.0 - 1e-6, 0.2, -1e-9).unwrap();
        for (&u, &p) in path.u.iter().zip(&path.p) {
            assert!((p * p - 2.0 * (g.potential(1.0) - g.potential(u))).abs() < 1e-8);
        }
    }

    #[test]
    fn critical_orbit_stalls_at_zero() {
        let g = cubic();
        let beta = derive_info(&g).unwrap().beta;
        match phase_tail(&g, 0.0, beta, -0.1, -1e-12) {
            Err(Error::PathTerminates(u)) => assert!(u <= 1e-3, "{u}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn top_is_beta_at_rest_and_lower_when_moving() {
        let g = cubic();
        let beta = derive_info(&g).unwrap().beta;
        let rm = right_manifold(&g, 0.0).unwrap();
        assert!((rm.top.unwrap() - beta).abs() < 1e-6);
        let phi = critical_top(&g, -0.5).unwrap();
        assert!(phi > 0.25 && phi < beta);
        // dissipation balance along the orbit from the top down to 0
        let rm = right_manifold(&g, -0.5).unwrap();
        let total = *rm.path.dissipation.last().unwrap();
        assert!((g.potential(phi) - (-0.5) * total).abs() < 1e-7);
        assert!(critical_top(&g, -1.5).is_err());
    }

    #[test]
    fn regime_boundary() {
        let g = cubic();
        let edge = 3f64.sqrt() / 2.0;
        assert_eq!(critical_regime(&g, 0.0).unwrap(), CriticalRegime::CriticalSolutionExists);
        assert_eq!(critical_regime(&g, -0.5).unwrap(), CriticalRegime::CriticalSolutionExists);
        assert_eq!(critical_regime(&g, -edge).unwrap(), CriticalRegime::CriticalSolutionAbsent);
        assert_eq!(critical_regime(&g, -1.0).unwrap(), CriticalRegime::CriticalSolutionAbsent);
    }

    #[test]
    fn matching_root_at_rest() {
        let g = cubic();
        let beta = derive_info(&g).unwrap().beta;
        // closed form: β² sinh² L = 2(G(1) − G(β cosh L))
        let f = |l: f64| (beta * l.sinh()).powi(2) - 2.0 * (g.potential(1.0) - g.potential(beta * l.cosh()));
        let want = bisect(f, 0.0, 1.2, 1e-14).unwrap();
        assert!(critical_matching_residual(&g, 0.0, 1.0, 0.0).unwrap() < 0.0);
        let root = matching_width(&g, 0.0, 1.0).unwrap();
        assert!((root.width - want).abs() < 1e-7, "{} vs {want}", root.width);
        assert!(root.monotone);
    }

    #[test]
    fn fold_lies_below_matching_root() {
        let g = cubic();
        let fam = EradicationFamily::new(&g, 0.0, 1.0).unwrap();
        let fold = fam.fold(40).unwrap();
        let root = matching_width(&g, 0.0, 1.0).unwrap();
        assert!(fold.width < root.width);
        assert!(fold.interface_value > 0.25 && fold.interface_value < root.top);
        // the family's end member is the critical profile
        assert!((fam.width(fam.v_max() - 1e-9).unwrap() - root.width).abs() < 1e-3);
    }
}
