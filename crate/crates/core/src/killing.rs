//! Killing strategy: the reaction is replaced by `−μu` on a zone `(0, L)` that
//! moves at speed `c ≤ 0`. Simulated in the zone frame until steady, then
//! classified by the far-field state, with the sign of `u′(L)` as a
//! consistency requirement on the eradication side.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bisect::{dichotomy, CriticalResult, Tolerance, Verdict};
use crate::error::{Error, Result};
use crate::fd::{run_until_steady_observed, Field, Grid1D, SchemeParams, SteadyOptions, Stepper};
use crate::reaction::{derive_info, Bistable, CubicReaction, ReactionTerm};

/// Minimum distance between the zone and either end of the mesh.
pub const BOUNDARY_CLEARANCE: f64 = 20.0;

/// Default interface-slope tolerance for classification.
pub const SLOPE_TOL: f64 = 1e-6;

/// One killing-strategy simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KillingConfig {
    /// Frame speed, `≤ 0` for the eradication problem.
    pub c: f64,
    /// Zone width `L`.
    pub width: f64,
    /// Kill rate `μ`.
    pub mu: f64,
    pub term: ReactionTerm,
    pub grid: Grid1D,
    pub dt: f64,
    pub d: f64,
    pub steady: SteadyOptions,
    pub slope_tol: f64,
}

impl KillingConfig {
    /// Reference setup: `x ∈ [−75, 75]`, `dx = 0.03`, `dt = 0.5`, `α = 1/4`, `μ = 1`, `D = 1`.
    pub fn reference(c: f64, width: f64) -> Self {
        Self {
            c,
            width,
            mu: 1.0,
            term: ReactionTerm::Cubic { alpha: 0.25 },
            grid: Grid1D::with_spacing(-75.0, 75.0, 0.03).expect("static grid"),
            dt: 0.5,
            d: 1.0,
            steady: SteadyOptions {
                eps: 1e-8,
                t_check: 25.0,
                t_max: 2e5,
            },
            slope_tol: SLOPE_TOL,
        }
    }

    pub fn with_width(&self, width: f64) -> Self {
        Self {
            width,
            ..self.clone()
        }
    }

    pub fn scheme(&self) -> SchemeParams {
        SchemeParams {
            dt: self.dt,
            c: self.c,
            d: self.d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme().validate()?;
        self.steady.validate(self.dt)?;
        if !(self.width > 0.0) {
            return Err(Error::Validation("strategy.width".into()));
        }
        if !(self.mu >= 0.0) {
            return Err(Error::Validation("strategy.mu".into()));
        }
        if self.grid.x_min > -BOUNDARY_CLEARANCE
            || self.grid.x_max < self.width + BOUNDARY_CLEARANCE
        {
            return Err(Error::InvalidParameter {
                field: "strategy.width".into(),
                reason: format!(
                    "zone [0, {}] must stay {BOUNDARY_CLEARANCE} units inside [{}, {}]",
                    self.width, self.grid.x_min, self.grid.x_max
                ),
            });
        }
        if self.scheme().peclet(&self.grid) > 1.0 {
            return Err(Error::InvalidParameter {
                field: "scheme.c".into(),
                reason: "mesh Péclet number |c|·dx/(2D) exceeds 1".into(),
            });
        }
        Ok(())
    }
}

/// Converged (or abandoned) state of one simulation with its diagnostics.
#[derive(Debug, Clone)]
pub struct SteadyOutcome {
    pub profile: Field,
    pub verdict: Verdict,
    pub u_at_l: f64,
    pub du_at_l: f64,
    /// Location of the interior minimum inside the zone, if the profile has one.
    pub interior_min_location: Option<f64>,
    pub residual: f64,
    pub elapsed: f64,
    pub converged: bool,
}

/// Invasion/eradication decision from the far field and the interface slope.
///
/// A converged state whose far field has not vanished is an invasion whatever
/// the interface slope: for fast zones the state just above threshold dips
/// slightly past `L` before rising, so `u′(L)` can be negative there.
/// Eradication needs a vanishing far field and a decreasing interface, the
/// slope being compared in logarithmic form `u′(L)/u(L)` because behind a
/// wide zone both values are exponentially small while their ratio is not.
pub fn classify(
    converged: bool,
    u_at_l: f64,
    du_at_l: f64,
    u_far: f64,
    levels: FarLevels,
    slope_tol: f64,
) -> Verdict {
    let log_slope = if u_at_l > 0.0 {
        du_at_l / u_at_l
    } else {
        // the profile vanished to the last bit at the interface
        f64::NEG_INFINITY
    };
    if !converged {
        Verdict::Undecided
    } else if log_slope < -slope_tol && u_far < levels.low {
        Verdict::Eradication
    } else if u_far >= levels.low {
        Verdict::Invasion
    } else {
        Verdict::Undecided
    }
}

/// Far-field level separating the two outcomes.
///
/// The decaying tail behind the zone relaxes at rate
/// `(√(c² + 4|g′(0)|) − |c|)/2`, which is slow for fast zones, so the level
/// sits at half the middle equilibrium rather than near zero. Just below
/// threshold a fast zone can leave a plateau at the middle equilibrium behind
/// it instead of the upper state. The plateau is convectively unstable, since
/// disturbances are swept into the zone faster than they grow, so it persists
/// and spreads away from the zone: the population survives, which counts as
/// an invasion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarLevels {
    pub low: f64,
}

impl FarLevels {
    pub fn for_term<G: Bistable + ?Sized>(term: &G) -> Result<Self> {
        let info = derive_info(term)?;
        Ok(Self {
            low: 0.5 * info.f_prime,
        })
    }

    /// Levels for the cubic term with middle root `alpha`.
    pub fn cubic(alpha: f64) -> Self {
        Self {
            low: 0.5 * alpha,
        }
    }
}

/// Kill-zone coverage of each control cell.
pub fn zone_weights(grid: &Grid1D, width: f64) -> Vec<f64> {
    (0..grid.n).map(|i| grid.cell_fraction(i, 0.0, width)).collect()
}

/// Evolves the step datum `1_{x<0}` in the zone frame until steady and classifies it.
pub fn run_killing(cfg: &KillingConfig) -> Result<SteadyOutcome> {
    run_killing_observed(cfg, |_, _| {})
}

/// As [`run_killing`], handing every intermediate state to `observe`.
pub fn run_killing_observed<O: FnMut(usize, &Field)>(cfg: &KillingConfig, observe: O) -> Result<SteadyOutcome> {
    cfg.validate()?;
    match cfg.term {
        ReactionTerm::Cubic { alpha } => run_with(cfg, &CubicReaction { alpha }, observe),
        ReactionTerm::Mosquito(p) => run_with(cfg, &p, observe),
    }
}

fn run_with<G: Bistable, O: FnMut(usize, &Field)>(cfg: &KillingConfig, term: &G, observe: O) -> Result<SteadyOutcome> {
    let grid = cfg.grid;
    let weights = zone_weights(&grid, cfg.width);
    let mu = cfg.mu;
    let rate = |i: usize, u: f64| {
        let w = weights[i];
        if w == 0.0 {
            term.rate(u)
        } else {
            (1.0 - w) * term.rate(u) - w * mu * u
        }
    };
    let u0 = Field::from_fn(grid, |x| if x < 0.0 { 1.0 } else { 0.0 });
    let mut stepper = Stepper::new(cfg.scheme(), grid)?;
    let run = run_until_steady_observed(u0, &mut stepper, rate, &cfg.steady, observe)?;
    let profile = run.field;
    let u_at_l = profile.sample(cfg.width);
    let du_at_l = profile.slope(cfg.width);
    let u_far = profile.values[grid.n - 1];
    let levels = FarLevels::for_term(term)?;
    let verdict = classify(run.converged, u_at_l, du_at_l, u_far, levels, cfg.slope_tol);
    let interior_min_location = interior_minimum(&profile, cfg.width);
    Ok(SteadyOutcome {
        profile,
        verdict,
        u_at_l,
        du_at_l,
        interior_min_location,
        residual: run.residual,
        elapsed: run.elapsed,
        converged: run.converged,
    })
}

/// Nodes strictly inside `(0, width)`.
fn zone_nodes(grid: &Grid1D, width: f64) -> std::ops::Range<usize> {
    let first = (0..grid.n).find(|&i| grid.x(i) > 0.0).unwrap_or(grid.n);
    let last = (first..grid.n).find(|&i| grid.x(i) >= width).unwrap_or(grid.n);
    first..last
}

/// Position of the unique local minimum of the profile strictly inside the zone.
pub fn interior_minimum(profile: &Field, width: f64) -> Option<f64> {
    let range = zone_nodes(&profile.grid, width);
    let v = &profile.values;
    let (i, _) = range
        .clone()
        .map(|i| (i, v[i]))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    if i > 0 && i + 1 < v.len() && v[i - 1] > v[i] && v[i + 1] > v[i] {
        Some(profile.grid.x(i))
    } else {
        None
    }
}

/// Number of sign changes of the discrete derivative inside the zone,
/// ignoring differences below `noise`.
pub fn zone_slope_sign_changes(profile: &Field, width: f64, noise: f64) -> usize {
    let range = zone_nodes(&profile.grid, width);
    let v = &profile.values;
    let mut changes = 0;
    let mut last = 0.0f64;
    for i in range.start..range.end.saturating_sub(1) {
        let d = v[i + 1] - v[i];
        if d.abs() <= noise {
            continue;
        }
        if last != 0.0 && d.signum() != last.signum() {
            changes += 1;
        }
        last = d;
    }
    changes
}

/// Largest increase between consecutive nodes (0 for a nonincreasing profile).
pub fn max_increase(profile: &Field) -> f64 {
    profile
        .values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max)
}

/// Λ(c): minimal zone width for eradication, by dichotomy on `[low, high]`.
pub fn lambda_of_c(
    c: f64,
    bracket: (f64, f64),
    tol: f64,
    template: &KillingConfig,
) -> Result<CriticalResult> {
    lambda_of_c_observed(c, bracket, tol, template, |_, _| {})
}

/// As [`lambda_of_c`], handing every simulated outcome to `observe`.
pub fn lambda_of_c_observed<O: FnMut(f64, &SteadyOutcome)>(
    c: f64,
    bracket: (f64, f64),
    tol: f64,
    template: &KillingConfig,
    mut observe: O,
) -> Result<CriticalResult> {
    let base = KillingConfig {
        c,
        ..template.clone()
    };
    dichotomy(bracket.0, bracket.1, Tolerance::Absolute(tol), |width| {
        let out = run_killing(&base.with_width(width))?;
        observe(width, &out);
        Ok(out.verdict)
    })
}

/// One row of the interface-value sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterfaceRow {
    pub c: f64,
    pub lambda: CriticalResult,
    /// Width at which the interface value is read: `Λ(c) + 10·dx`.
    pub probe_width: f64,
    pub u_at_l: f64,
    pub g_at_l: f64,
    pub du_at_l: f64,
    pub verdict: Verdict,
}

/// Λ(c) and `u(Λ(c) + 10dx)` for each speed. Speeds are processed in
/// parallel; rows come back in input order.
pub fn interface_value_sweep(
    speeds: &[f64],
    bracket: (f64, f64),
    tol: f64,
    template: &KillingConfig,
) -> Result<Vec<InterfaceRow>> {
    speeds
        .par_iter()
        .map(|&c| interface_row(c, bracket, tol, template))
        .collect()
}

pub fn interface_row(
    c: f64,
    bracket: (f64, f64),
    tol: f64,
    template: &KillingConfig,
) -> Result<InterfaceRow> {
    let lambda = lambda_of_c(c, bracket, tol, template)?;
    let probe_width = lambda.threshold + 10.0 * template.grid.dx();
    let cfg = KillingConfig {
        c,
        ..template.with_width(probe_width)
    };
    let out = run_killing(&cfg)?;
    let g = cfg.term.as_bistable();
    Ok(InterfaceRow {
        c,
        probe_width,
        u_at_l: out.u_at_l,
        g_at_l: g.rate(out.u_at_l),
        du_at_l: out.du_at_l,
        verdict: out.verdict,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(c: f64, width: f64) -> KillingConfig {
        KillingConfig {
            grid: Grid1D::with_spacing(-40.0, 60.0, 0.1).unwrap(),
            ..KillingConfig::reference(c, width)
        }
    }

    const LEVELS: FarLevels = FarLevels { low: 0.125 };

    #[test]
    fn classify_rules() {
        assert_eq!(classify(true, 0.3, 1e-3, 1.0, LEVELS, SLOPE_TOL), Verdict::Invasion);
        assert_eq!(classify(true, 0.2, -1e-2, 1e-5, LEVELS, SLOPE_TOL), Verdict::Eradication);
        // exponentially small interface values still classify
        assert_eq!(classify(true, 1e-11, -1e-12, 1e-14, LEVELS, SLOPE_TOL), Verdict::Eradication);
        assert_eq!(classify(false, 0.2, -1e-2, 1e-5, LEVELS, SLOPE_TOL), Verdict::Undecided);
        // plateau at the middle equilibrium behind a fast zone
        assert_eq!(classify(true, 0.25, -2e-3, 0.27, LEVELS, SLOPE_TOL), Verdict::Invasion);
        assert_eq!(classify(true, 0.2, 0.0, 1e-5, LEVELS, SLOPE_TOL), Verdict::Undecided);
        // dip past the interface on the way back up to 1
        assert_eq!(classify(true, 0.2528, -1.2e-3, 1.0, LEVELS, SLOPE_TOL), Verdict::Invasion);
    }

    #[test]
    fn flat_one_is_invasion() {
        let g = Grid1D::new(-30.0, 40.0, 701).unwrap();
        let p = Field::constant(g, 1.0);
        assert_eq!(classify(true, p.sample(5.0), p.slope(5.0), p.values[700], LEVELS, SLOPE_TOL), Verdict::Invasion);
        assert_eq!(classify(false, p.sample(5.0), p.slope(5.0), p.values[700], LEVELS, SLOPE_TOL), Verdict::Undecided);
    }

    #[test]
    fn zone_must_clear_boundaries() {
        let cfg = small(-1.0, 45.0);
        assert!(matches!(cfg.validate(), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn no_kill_means_invasion() {
        let cfg = KillingConfig { mu: 0.0, ..small(0.0, 5.0) };
        let out = run_killing(&cfg).unwrap();
        assert_eq!(out.verdict, Verdict::Invasion);
    }

    #[test]
    fn wide_zone_eradicates_narrow_invades() {
        let wide = run_killing(&small(-1.0, 30.0)).unwrap();
        assert_eq!(wide.verdict, Verdict::Eradication);
        assert!(max_increase(&wide.profile) < 1e-9);
        let narrow = run_killing(&small(-1.0, 1.0)).unwrap();
        assert_eq!(narrow.verdict, Verdict::Invasion);
        assert!(narrow.interior_min_location.is_some());
    }
}
