//! Sterile-male release: the moving release window feeds a linear equation
//! for the sterile density `m`, which in turn suppresses female births in
//! `g(f, m)`.
//!
//! The steady sterile density in the window frame has a closed form and a
//! spectral representation; both are checked against the lab-frame solver.
//! The coupled system is run in the lab frame, where the window occupies
//! `(ct + start, ct + end)` for each release segment.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bisect::{dichotomy, CriticalResult, Tolerance, Verdict};
use crate::error::{Error, Result};
use crate::fd::{measure_front_position, Field, Grid1D, SchemeParams, Stepper};
use crate::reaction::{derive_info, MosquitoReaction};

/// One constant-density piece of a release profile, in window coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub density: f64,
}

/// Piecewise-constant release density carried by the moving window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReleaseProfile {
    pub segments: Vec<Segment>,
}

impl ReleaseProfile {
    /// `M` on `(0, L)`.
    pub fn homogeneous(m: f64, width: f64) -> Self {
        Self {
            segments: vec![Segment {
                start: 0.0,
                end: width,
                density: m,
            }],
        }
    }

    /// `M` on `(0, 2L/3)` followed by `M/2` on `(2L/3, 7L/6)`.
    pub fn two_step(m: f64, width: f64) -> Self {
        Self {
            segments: vec![
                Segment {
                    start: 0.0,
                    end: 2.0 * width / 3.0,
                    density: m,
                },
                Segment {
                    start: 2.0 * width / 3.0,
                    end: 7.0 * width / 6.0,
                    density: 0.5 * m,
                },
            ],
        }
    }

    /// Same pieces as [`two_step`](Self::two_step) with the densities swapped.
    pub fn two_step_swapped(m: f64, width: f64) -> Self {
        let mut p = Self::two_step(m, width);
        p.segments[0].end = width / 2.0;
        p.segments[0].density = 0.5 * m;
        p.segments[1].start = width / 2.0;
        p.segments[1].end = 7.0 * width / 6.0;
        p.segments[1].density = m;
        p
    }

    /// Total released per unit time, `Σ density·width`.
    pub fn count(&self) -> f64 {
        self.segments.iter().map(|s| s.density * (s.end - s.start)).sum()
    }

    pub fn extent(&self) -> (f64, f64) {
        let lo = self.segments.iter().map(|s| s.start).fold(f64::INFINITY, f64::min);
        let hi = self.segments.iter().map(|s| s.end).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    density: s.density * factor,
                    ..*s
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::Validation("strategy.segments".into()));
        }
        let mut sorted = self.segments.clone();
        sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
        for (k, s) in sorted.iter().enumerate() {
            if !(s.end > s.start) || !(s.density >= 0.0) || !s.start.is_finite() || !s.end.is_finite() {
                return Err(Error::Validation(format!("strategy.segments[{k}]")));
            }
            if k > 0 && s.start < sorted[k - 1].end {
                return Err(Error::InvalidParameter {
                    field: "strategy.segments".into(),
                    reason: "segments overlap".into(),
                });
            }
        }
        Ok(())
    }
}

/// Closed-form steady sterile density for a single segment `M·1_{(0,L)}`
/// in the window frame: `−c m′ − m″ + μ_s m = M 1_{(0,L)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SterileAnalytic {
    pub c: f64,
    pub width: f64,
    pub m: f64,
    pub mu_s: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    pub a: f64,
    pub b: f64,
    pub c_coef: f64,
    pub d_coef: f64,
}

impl SterileAnalytic {
    pub fn new(c: f64, width: f64, m: f64, mu_s: f64) -> Result<Self> {
        if !(mu_s > 0.0) {
            return Err(Error::Validation("strategy.mu_s".into()));
        }
        if !(width > 0.0) {
            return Err(Error::Validation("release.width".into()));
        }
        let s = (c * c + 4.0 * mu_s).sqrt();
        let (r_plus, r_minus) = if c >= 0.0 {
            let rm = -(c + s) / 2.0;
            (-mu_s / rm, rm)
        } else {
            let rp = (s - c) / 2.0;
            (rp, -mu_s / rp)
        };
        let level = m / mu_s;
        let spread = r_plus - r_minus;
        let d_coef = -r_plus * level / spread;
        let c_coef = r_minus * level * (-r_plus * width).exp() / spread;
        let a = level + c_coef + d_coef;
        let b = level + c_coef * (r_plus * width).exp() + d_coef * (r_minus * width).exp();
        Ok(Self {
            c,
            width,
            m,
            mu_s,
            r_plus,
            r_minus,
            a,
            b,
            c_coef,
            d_coef,
        })
    }

    /// `(m, m′)` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let (rp, rm) = (self.r_plus, self.r_minus);
        if x <= 0.0 {
            let e = (rp * x).exp();
            (self.a * e, self.a * rp * e)
        } else if x >= self.width {
            let e = (rm * (x - self.width)).exp();
            (self.b * e, self.b * rm * e)
        } else {
            let (ep, em) = ((rp * x).exp(), (rm * x).exp());
            (
                self.m / self.mu_s + self.c_coef * ep + self.d_coef * em,
                self.c_coef * rp * ep + self.d_coef * rm * em,
            )
        }
    }

    /// Location of the maximum inside `(0, L)`, where `m′` vanishes.
    pub fn argmax(&self) -> f64 {
        let (rp, rm) = (self.r_plus, self.r_minus);
        // C r₊ e^{r₊x} + D r₋ e^{r₋x} = 0
        ((-self.d_coef * rm) / (self.c_coef * rp)).ln() / (rp - rm)
    }
}

/// Steady sterile density of a release profile at `x`, by superposing the
/// single-segment closed forms.
pub fn ms_closed_form(x: f64, c: f64, mu_s: f64, release: &ReleaseProfile) -> Result<f64> {
    let mut total = 0.0;
    for s in &release.segments {
        let an = SterileAnalytic::new(c, s.end - s.start, s.density, mu_s)?;
        total += an.eval(x - s.start).0;
    }
    Ok(total)
}

/// Quadrature settings for the inverse Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSettings {
    /// Frequencies are integrated over `[0, half_width]`.
    pub half_width: f64,
    /// Gauss–Legendre panel length in frequency.
    pub panel: f64,
    /// Largest change accepted when the panel count is doubled.
    pub tolerance: f64,
}

impl Default for SpectralSettings {
    fn default() -> Self {
        Self {
            half_width: 400.0,
            panel: 0.01,
            tolerance: 1e-8,
        }
    }
}

fn spectral_sum(x: f64, c: f64, mu_s: f64, release: &ReleaseProfile, xi_max: f64, panels: usize) -> f64 {
    use std::f64::consts::PI;
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_47,
        0.478_628_670_499_366_47,
        0.236_926_885_056_189_08,
        0.236_926_885_056_189_08,
    ];
    let h = xi_max / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for (&t, &w) in NODES.iter().zip(&WEIGHTS) {
            let xi = mid + 0.5 * h * t;
            // 1/(4π²ξ² − 2πicξ + μ_s) = (4π²ξ² + μ_s + 2πicξ)/|…|²
            let re_d = 4.0 * PI * PI * xi * xi + mu_s;
            let im_d = -2.0 * PI * c * xi;
            let norm = re_d * re_d + im_d * im_d;
            let mut value = 0.0;
            for s in &release.segments {
                let l = s.end - s.start;
                let arg = PI * l * xi;
                let sinc = if arg == 0.0 { 1.0 } else { arg.sin() / arg };
                // forcing transform times e^{2iπxξ}: phase 2πξ(x − start − L/2)
                let phase = 2.0 * PI * xi * (x - s.start - 0.5 * l);
                let amp = s.density * l * sinc;
                // Re[amp e^{i phase} / (re_d + i im_d)]
                value += amp * (phase.cos() * re_d + phase.sin() * im_d) / norm;
            }
            total += w * value;
        }
    }
    2.0 * total * 0.5 * h
}

/// Steady sterile density at `x` from the inverse Fourier transform of the
/// forcing divided by the symbol of the window-frame operator.
pub fn ms_spectral(
    x: f64,
    c: f64,
    mu_s: f64,
    release: &ReleaseProfile,
    settings: &SpectralSettings,
) -> Result<f64> {
    let panels = (settings.half_width / settings.panel).ceil().max(1.0) as usize;
    let coarse = spectral_sum(x, c, mu_s, release, settings.half_width, panels);
    let fine = spectral_sum(x, c, mu_s, release, settings.half_width, 2 * panels);
    let change = (fine - coarse).abs();
    if !(change <= settings.tolerance) {
        return Err(Error::QuadratureNotConverged(change));
    }
    Ok(fine)
}

/// Evolves the sterile density alone in the lab frame from zero up to `t_end`
/// and returns it in window coordinates `ξ = x − ct` (as `(ξ, m)` pairs).
pub fn lab_sterile_density(
    c: f64,
    mu_s: f64,
    release: &ReleaseProfile,
    grid: Grid1D,
    dt: f64,
    d: f64,
    t_end: f64,
) -> Result<Vec<(f64, f64)>> {
    release.validate()?;
    let (lo, hi) = release.extent();
    if lo + c * t_end < grid.x_min || hi + c * t_end > grid.x_max {
        return Err(Error::InvalidParameter {
            field: "strategy.segments".into(),
            reason: "window leaves the mesh before the horizon".into(),
        });
    }
    let scheme = SchemeParams { dt, c: 0.0, d };
    let mut stepper = Stepper::with_decay(scheme, grid, mu_s)?;
    let mut m = Field::constant(grid, 0.0);
    let steps = (t_end / dt).round() as usize;
    let mut source = vec![0.0; grid.n];
    for k in 1..=steps {
        let shift = c * k as f64 * dt;
        for (i, v) in source.iter_mut().enumerate() {
            *v = release
                .segments
                .iter()
                .map(|s| s.density * grid.cell_fraction(i, s.start + shift, s.end + shift))
                .sum();
        }
        stepper.step_with_source(&mut m, &source)?;
    }
    let shift = c * steps as f64 * dt;
    Ok(grid.nodes().map(|x| x - shift).zip(m.values).collect())
}

/// One coupled female/sterile simulation in the lab frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SterileConfig {
    /// Window speed, `≤ 0` moves the window into the population.
    pub c: f64,
    pub release: ReleaseProfile,
    pub mu_s: f64,
    pub term: MosquitoReaction,
    pub grid: Grid1D,
    pub dt: f64,
    pub d: f64,
    /// Initial female front: `f(0) = F·1_{x<front}`.
    pub front: f64,
    pub t_max: f64,
    /// Extinction when `max f < extinction_fraction·F`.
    pub extinction_fraction: f64,
    /// Persistence when the female front passes the window's leading end by this much.
    pub escape_margin: f64,
    /// Store every `stride`-th step in the space-time record (0 disables it).
    pub stride: usize,
    /// Keep stepping to `t_max` after a verdict is reached.
    pub run_to_horizon: bool,
}

/// Distance kept between the initial window and the right end of the mesh.
pub const WINDOW_CLEARANCE: f64 = 40.0;

impl SterileConfig {
    /// Default reaction parameters with `D = 1`, `dx = 0.1`, `dt = 0.05`, the population
    /// on `[−30, 0)` and a horizon long enough for the window to sweep it.
    pub fn reference(c: f64, release: ReleaseProfile) -> Self {
        let (_, hi) = release.extent();
        let grid = Grid1D::with_spacing(-30.0, hi.max(0.0) + WINDOW_CLEARANCE, 0.1).expect("static grid");
        let sweep = if c < 0.0 { 30.0 / c.abs() } else { 0.0 };
        Self {
            c,
            release,
            mu_s: 0.1,
            term: MosquitoReaction::default(),
            grid,
            dt: 0.05,
            d: 1.0,
            front: 0.0,
            t_max: sweep + 600.0,
            extinction_fraction: 1e-3,
            escape_margin: 1.0,
            stride: 100,
            run_to_horizon: false,
        }
    }

    pub fn scheme(&self) -> SchemeParams {
        SchemeParams {
            dt: self.dt,
            c: 0.0,
            d: self.d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme().validate()?;
        self.release.validate()?;
        self.term.validate()?;
        if !(self.mu_s > 0.0) {
            return Err(Error::Validation("strategy.mu_s".into()));
        }
        if !(self.t_max > 0.0) {
            return Err(Error::Validation("strategy.t_max".into()));
        }
        let (lo, hi) = self.release.extent();
        if lo < self.grid.x_min || hi > self.grid.x_max {
            return Err(Error::InvalidParameter {
                field: "strategy.segments".into(),
                reason: format!(
                    "initial window [{lo}, {hi}] must lie inside [{}, {}]",
                    self.grid.x_min, self.grid.x_max
                ),
            });
        }
        if self.c > 0.0 && hi + self.c * self.t_max > self.grid.x_max {
            return Err(Error::InvalidParameter {
                field: "strategy.c".into(),
                reason: "window leaves the mesh before the horizon".into(),
            });
        }
        Ok(())
    }

    /// Lab-frame offset of the window at time `t`; a window moving left stops
    /// once its trailing end reaches the left end of the mesh.
    pub fn window_shift(&self, t: f64) -> f64 {
        let (lo, hi) = self.release.extent();
        let shift = self.c * t;
        let shift = shift.max(self.grid.x_min - lo);
        shift.min(self.grid.x_max - hi)
    }

    fn source(&self, t: f64, out: &mut [f64]) {
        let shift = self.window_shift(t);
        for (i, v) in out.iter_mut().enumerate() {
            *v = self
                .release
                .segments
                .iter()
                .map(|s| s.density * self.grid.cell_fraction(i, s.start + shift, s.end + shift))
                .sum();
        }
    }
}

/// Space-time record of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceTime {
    pub times: Vec<f64>,
    pub females: Vec<Vec<f64>>,
    pub steriles: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SterileOutcome {
    pub verdict: Verdict,
    pub females: Field,
    pub steriles: Field,
    /// First time at which `max f` fell below the extinction level.
    pub extinct_at: Option<f64>,
    /// First time at which the female front passed the window.
    pub escaped_at: Option<f64>,
    pub female_mass: Vec<(f64, f64)>,
    pub front_positions: Vec<(f64, f64)>,
    pub record: SpaceTime,
}

/// Runs the coupled system from `f = F·1_{x<front}`, `m = source(0)`.
pub fn run_sterile(cfg: &SterileConfig) -> Result<SterileOutcome> {
    cfg.validate()?;
    let info = derive_info(&cfg.term)?;
    let upper = info.f_upper;
    let grid = cfg.grid;
    let term = cfg.term;
    let mut f_step = Stepper::with_decay(cfg.scheme(), grid, term.mu_f)?;
    let mut m_step = Stepper::with_decay(cfg.scheme(), grid, cfg.mu_s)?;
    let mut females = Field::from_fn(grid, |x| if x < cfg.front { upper } else { 0.0 });
    let mut source = vec![0.0; grid.n];
    cfg.source(0.0, &mut source);
    let mut steriles = Field {
        grid,
        values: source.clone(),
        time: 0.0,
    };
    let weights = grid.trapezoid_weights();
    let mass = |f: &Field| f.values.iter().zip(&weights).map(|(v, w)| v * w).sum::<f64>();
    let steps = (cfg.t_max / cfg.dt).round() as usize;
    let extinction = cfg.extinction_fraction * upper;
    let mut out = SterileOutcome {
        verdict: Verdict::Undecided,
        females: females.clone(),
        steriles: steriles.clone(),
        extinct_at: None,
        escaped_at: None,
        female_mass: vec![(0.0, mass(&females))],
        front_positions: Vec::new(),
        record: SpaceTime::default(),
    };
    let record = |out: &mut SterileOutcome, f: &Field, m: &Field| {
        out.record.times.push(f.time);
        out.record.females.push(f.values.clone());
        out.record.steriles.push(m.values.clone());
    };
    if cfg.stride > 0 {
        record(&mut out, &females, &steriles);
    }
    let (_, lead) = cfg.release.extent();
    for k in 1..=steps {
        let t = k as f64 * cfg.dt;
        cfg.source(t, &mut source);
        m_step.step_with_source(&mut steriles, &source)?;
        let m_now = &steriles.values;
        f_step.step(&mut females, |i, f| term.rate_fm(f, m_now[i]) + term.mu_f * f)?;
        if cfg.stride > 0 && k % cfg.stride == 0 {
            record(&mut out, &females, &steriles);
        }
        let max_f = females.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if out.extinct_at.is_none() && max_f < extinction {
            out.extinct_at = Some(t);
        }
        let x_front = leading_front(&females, 0.5 * upper);
        if out.escaped_at.is_none() {
            if let Some(x) = x_front {
                if x > lead + cfg.window_shift(t) + cfg.escape_margin {
                    out.escaped_at = Some(t);
                }
            }
        }
        if k % ((1.0 / cfg.dt).round() as usize).max(1) == 0 {
            out.female_mass.push((t, mass(&females)));
            if let Some(x) = x_front {
                out.front_positions.push((t, x));
            }
        }
        let decided = out.extinct_at.is_some() || out.escaped_at.is_some();
        if decided && !cfg.run_to_horizon {
            break;
        }
    }
    out.verdict = match (out.extinct_at, out.escaped_at) {
        (Some(te), Some(tp)) if tp < te => Verdict::Invasion,
        (Some(_), _) => Verdict::Eradication,
        (None, Some(_)) => Verdict::Invasion,
        (None, None) => Verdict::Undecided,
    };
    out.females = females;
    out.steriles = steriles;
    Ok(out)
}

/// Rightmost point where the female density crosses `level`; the right end of
/// the mesh once the density exceeds it everywhere, `None` once it is below.
fn leading_front(f: &Field, level: f64) -> Option<f64> {
    match measure_front_position(f, level) {
        Ok(x) => Some(x),
        Err(_) if f.values.iter().all(|&v| v >= level) => Some(f.grid.x_max),
        Err(_) => None,
    }
}

/// Π(c, L): minimal release density for eradication, bisected on `M`.
pub fn pi_dichotomy(template: &SterileConfig, width: f64, bracket: (f64, f64), rel_tol: f64) -> Result<CriticalResult> {
    let base = SterileConfig {
        release: ReleaseProfile::homogeneous(1.0, width),
        ..template.clone()
    };
    dichotomy(bracket.0, bracket.1, Tolerance::Relative(rel_tol), |m| {
        let cfg = SterileConfig {
            release: base.release.scaled(m),
            stride: 0,
            ..base.clone()
        };
        Ok(run_sterile(&cfg)?.verdict)
    })
}

/// L*(c, M): minimal homogeneous window width for eradication, bisected on `L`.
pub fn critical_width(template: &SterileConfig, m: f64, bracket: (f64, f64), tol: f64) -> Result<CriticalResult> {
    dichotomy(bracket.0, bracket.1, Tolerance::Absolute(tol), |width| {
        let cfg = SterileConfig {
            release: ReleaseProfile::homogeneous(m, width),
            stride: 0,
            ..template.clone()
        };
        Ok(run_sterile(&cfg)?.verdict)
    })
}

/// Homogeneous versus two-step release at the same leading density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroReport {
    pub c: f64,
    pub m: f64,
    pub width: f64,
    pub homogeneous: Verdict,
    pub heterogeneous: Verdict,
    pub swapped: Verdict,
    pub n_homogeneous: f64,
    pub n_heterogeneous: f64,
    pub n_swapped: f64,
}

/// Runs the three release profiles at width `width` (in parallel).
pub fn hetero_compare(template: &SterileConfig, m: f64, width: f64) -> Result<HeteroReport> {
    let profiles = [
        ReleaseProfile::homogeneous(m, width),
        ReleaseProfile::two_step(m, width),
        ReleaseProfile::two_step_swapped(m, width),
    ];
    let verdicts: Vec<Verdict> = profiles
        .par_iter()
        .map(|p| {
            let (_, hi) = p.extent();
            let x_max = template.grid.x_max.max(hi + WINDOW_CLEARANCE);
            let grid = Grid1D::with_spacing(template.grid.x_min, x_max, template.grid.dx());
            let cfg = SterileConfig {
                release: p.clone(),
                grid: grid?,
                stride: 0,
                ..template.clone()
            };
            Ok(run_sterile(&cfg)?.verdict)
        })
        .collect::<Result<_>>()?;
    Ok(HeteroReport {
        c: template.c,
        m,
        width,
        homogeneous: verdicts[0],
        heterogeneous: verdicts[1],
        swapped: verdicts[2],
        n_homogeneous: profiles[0].count(),
        n_heterogeneous: profiles[1].count(),
        n_swapped: profiles[2].count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_symmetric_midpoint() {
        let an = SterileAnalytic::new(0.0, 6.0, 2.0, 0.3).unwrap();
        let want = (2.0 / 0.3) * (1.0 - (-(0.3f64).sqrt() * 3.0).exp());
        assert!((an.eval(3.0).0 - want).abs() < 1e-12);
        assert!((an.argmax() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_is_c1_and_solves_ode() {
        let an = SterileAnalytic::new(-0.05, 10.0, 1.0, 0.1).unwrap();
        for x in [0.0, 10.0] {
            let (l, dl) = an.eval(x - 1e-13);
            let (r, dr) = an.eval(x + 1e-13);
            assert!((l - r).abs() < 1e-10 && (dl - dr).abs() < 1e-10);
        }
        let h = 1e-4;
        for k in 0..200 {
            let x = -15.0 + 40.0 * k as f64 / 199.0;
            if (x.abs() < 2.0 * h) || ((x - 10.0).abs() < 2.0 * h) {
                continue;
            }
            let (m, dm) = an.eval(x);
            let d2 = (an.eval(x + h).1 - an.eval(x - h).1) / (2.0 * h);
            let forcing = if x > 0.0 && x < 10.0 { 1.0 } else { 0.0 };
            assert!((0.05 * dm - d2 + 0.1 * m - forcing).abs() < 1e-7);
        }
    }

    #[test]
    fn spectral_matches_closed_form() {
        let rel = ReleaseProfile::homogeneous(1.0, 10.0);
        for x in [-20.0, -3.0, 0.0, 2.5, 7.0, 10.0, 14.0, 30.0] {
            let a = ms_closed_form(x, -0.05, 0.1, &rel).unwrap();
            let s = ms_spectral(x, -0.05, 0.1, &rel, &SpectralSettings::default()).unwrap();
            assert!((a - s).abs() < 1e-6, "x={x}: {a} vs {s}");
        }
    }

    #[test]
    fn spectral_detects_underresolution() {
        let rel = ReleaseProfile::homogeneous(1.0, 10.0);
        let coarse = SpectralSettings {
            panel: 2.0,
            ..Default::default()
        };
        assert!(matches!(
            ms_spectral(25.0, -0.05, 0.1, &rel, &coarse),
            Err(Error::QuadratureNotConverged(_))
        ));
    }

    #[test]
    fn profile_counts() {
        let h = ReleaseProfile::homogeneous(3.0, 12.0);
        let t = ReleaseProfile::two_step(3.0, 12.0);
        let s = ReleaseProfile::two_step_swapped(3.0, 12.0);
        assert_eq!(t.count() / h.count(), 11.0 / 12.0);
        assert!((s.count() - t.count()).abs() < 1e-12);
        assert!(t.validate().is_ok() && s.validate().is_ok());
        let bad = ReleaseProfile {
            segments: vec![t.segments[0], Segment { start: 1.0, end: 2.0, density: 1.0 }],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn window_moves_and_stops_at_the_edge() {
        let cfg = SterileConfig::reference(-0.05, ReleaseProfile::homogeneous(1.0, 10.0));
        assert!((cfg.window_shift(100.0) + 5.0).abs() < 1e-12);
        assert!((cfg.window_shift(1e5) - cfg.grid.x_min).abs() < 1e-12);
    }

    #[test]
    fn lab_density_settles_on_closed_form() {
        let rel = ReleaseProfile::homogeneous(1.0, 10.0);
        let grid = Grid1D::with_spacing(-60.0, 60.0, 0.05).unwrap();
        let lab = lab_sterile_density(-0.05, 0.1, &rel, grid, 0.02, 1.0, 250.0).unwrap();
        let err = lab
            .iter()
            .map(|&(xi, m)| (m - ms_closed_form(xi, -0.05, 0.1, &rel).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn no_release_invades() {
        let cfg = SterileConfig {
            t_max: 200.0,
            ..SterileConfig::reference(-0.05, ReleaseProfile::homogeneous(0.0, 5.0))
        };
        let out = run_sterile(&cfg).unwrap();
        assert_eq!(out.verdict, Verdict::Invasion);
    }
}
