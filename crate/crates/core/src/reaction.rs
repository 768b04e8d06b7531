//! Bistable reaction terms and their derived constants.
//!
//! Two families are provided: the cubic `u(1-u)(u-α)` and the quasi-stationary
//! mosquito birth/death balance `g(f, m)` that depends on the local density of
//! sterile males `m`. Both expose the scalar [`Bistable`] interface (the
//! mosquito term with `m = 0`) used by the solvers and the phase-plane layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{self, ROOT_TOL, SCAN_POINTS};

/// A scalar bistable nonlinearity `g` with zeros `0 < α < upper`.
pub trait Bistable: Sync + Send {
    fn rate(&self, u: f64) -> f64;

    fn derivative(&self, u: f64) -> f64 {
        let h = 1e-6 * u.abs().max(1.0);
        (self.rate(u + h) - self.rate(u - h)) / (2.0 * h)
    }

    /// `G(u) = ∫₀ᵘ g`.
    fn potential(&self, u: f64) -> f64 {
        geometric_quadrature(|v| self.rate(v), u)
    }

    /// Upper end of the density range scanned for equilibria.
    fn scan_max(&self) -> f64;
}

/// `∫₀ᵘ f` on geometrically refined panels toward 0, where the mosquito term
/// has structure on a scale many orders of magnitude below its carrying capacity.
fn geometric_quadrature<F: FnMut(f64) -> f64>(mut f: F, u: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut hi = u;
    for _ in 0..64 {
        let lo = 0.5 * hi;
        total += roots::integrate(&mut f, lo, hi, 4);
        hi = lo;
    }
    total + roots::integrate(&mut f, 0.0, hi, 1)
}

/// `g(u) = u (1 - u) (u - α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicReaction {
    pub alpha: f64,
}

impl CubicReaction {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter {
                field: "reaction.alpha".into(),
                reason: format!("threshold must lie in (0, 1), got {alpha}"),
            });
        }
        Ok(Self { alpha })
    }
}

/// The cubic nonlinearity evaluated at any real `u`.
pub fn eval_cubic(u: f64, alpha: f64) -> f64 {
    u * (1.0 - u) * (u - alpha)
}

impl Bistable for CubicReaction {
    #[inline]
    fn rate(&self, u: f64) -> f64 {
        eval_cubic(u, self.alpha)
    }

    fn derivative(&self, u: f64) -> f64 {
        -3.0 * u * u + 2.0 * (1.0 + self.alpha) * u - self.alpha
    }

    fn potential(&self, u: f64) -> f64 {
        let a = self.alpha;
        -u.powi(4) / 4.0 + (1.0 + a) * u.powi(3) / 3.0 - a * u * u / 2.0
    }

    fn scan_max(&self) -> f64 {
        1.5
    }
}

/// Female growth rate under sterile-male pressure.
///
/// Rates are per day, `k` is the environmental capacity. `mu_e` has no
/// reference value; 0.03 is used by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MosquitoReaction {
    pub r: f64,
    pub nu_e: f64,
    pub mu_e: f64,
    pub k: f64,
    pub b: f64,
    pub tau: f64,
    pub gamma_s: f64,
    pub mu_f: f64,
}

impl Default for MosquitoReaction {
    fn default() -> Self {
        Self {
            r: 0.49,
            nu_e: 0.7,
            mu_e: 0.03,
            k: 1440.0,
            b: 10.0,
            tau: 0.41,
            gamma_s: 1.0,
            mu_f: 0.04,
        }
    }
}

impl MosquitoReaction {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r", self.r),
            ("nu_e", self.nu_e),
            ("mu_e", self.mu_e),
            ("k", self.k),
            ("b", self.b),
            ("tau", self.tau),
            ("gamma_s", self.gamma_s),
            ("mu_f", self.mu_f),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    field: format!("reaction.{name}"),
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Unchecked evaluation for `f, m ≥ 0`; hot path of the coupled solver.
    #[inline]
    pub fn rate_fm(&self, f: f64, m: f64) -> f64 {
        if f <= 0.0 {
            return -self.mu_f * f;
        }
        let s = self.tau * f + self.gamma_s * m;
        // 1 - exp(-s), accurate for small s
        let one_minus_e = -(-s).exp_m1();
        let births = self.b * self.tau * f * f * one_minus_e;
        let denom = births + self.k * (self.nu_e + self.mu_e) * s;
        self.r * self.nu_e * self.k * births / denom - self.mu_f * f
    }
}

/// Mosquito reaction `g(f, m)` with domain checks.
pub fn eval_mosquito(f: f64, m: f64, params: &MosquitoReaction) -> Result<f64> {
    if f < 0.0 || m < 0.0 || !f.is_finite() || !m.is_finite() {
        return Err(Error::Domain(format!(
            "densities must be finite and non-negative (f = {f}, m = {m})"
        )));
    }
    Ok(params.rate_fm(f, m))
}

impl Bistable for MosquitoReaction {
    #[inline]
    fn rate(&self, u: f64) -> f64 {
        self.rate_fm(u.max(0.0), 0.0)
    }

    fn scan_max(&self) -> f64 {
        // births saturate at r·νE·K, so every equilibrium lies below this
        2.0 * self.r * self.nu_e * self.k / self.mu_f
    }
}

/// A reaction term as it appears in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ReactionTerm {
    Cubic { alpha: f64 },
    Mosquito(MosquitoReaction),
}

impl ReactionTerm {
    pub fn as_bistable(&self) -> Box<dyn Bistable> {
        match *self {
            ReactionTerm::Cubic { alpha } => Box::new(CubicReaction { alpha }),
            ReactionTerm::Mosquito(p) => Box::new(p),
        }
    }
}

/// Constants derived from a bistable term.
///
/// For the cubic, `f_prime = alpha` and `f_upper = 1`; for the mosquito term
/// `f_prime` (F′) and `f_upper` (F) play the roles of α and 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionInfo {
    pub alpha: f64,
    pub beta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub f_prime: f64,
    pub f_upper: f64,
    pub integral01: f64,
}

/// Equilibria, potential zero β and critical points α₁, α₂ of `g`.
pub fn derive_info<G: Bistable + ?Sized>(term: &G) -> Result<ReactionInfo> {
    let top = term.scan_max();
    // per-capita rate g(u)/u has the nonzero equilibria as its roots
    let per_capita = |u: f64| {
        if u == 0.0 {
            term.derivative(0.0)
        } else {
            term.rate(u) / u
        }
    };
    let zeros: Vec<f64> = roots::roots_in(per_capita, 0.0, top, SCAN_POINTS, ROOT_TOL)
        .into_iter()
        .filter(|&z| z > 0.0)
        .collect();
    if zeros.len() < 2 {
        return Err(Error::HypothesisViolation(format!(
            "expected two positive equilibria, found {zeros:?}"
        )));
    }
    let alpha = zeros[0];
    let upper = zeros[1];
    let refine = |x: f64| refine_root(term, x);
    let alpha = refine(alpha);
    let upper = refine(upper);

    let integral = term.potential(upper);
    if integral <= 1e-12 * upper.max(1.0) {
        return Err(Error::HypothesisViolation(format!(
            "∫₀^F g = {integral:e} must be positive"
        )));
    }
    let beta = roots::bisect(|u| term.potential(u), alpha, upper, ROOT_TOL * upper.max(1.0))?;
    let alpha1 = roots::bisect(|u| term.derivative(u), 0.0, alpha, ROOT_TOL * upper.max(1.0))
        .map_err(|_| Error::HypothesisViolation("no critical point below α".into()))?;
    let alpha2 = roots::bisect(|u| term.derivative(u), alpha, upper, ROOT_TOL * upper.max(1.0))
        .map_err(|_| Error::HypothesisViolation("no critical point between α and F".into()))?;
    Ok(ReactionInfo {
        alpha,
        beta,
        alpha1,
        alpha2,
        f_prime: alpha,
        f_upper: upper,
        integral01: integral,
    })
}

/// Polishes a root of `g` found on the per-capita scan by bisecting `g` itself
/// on a small bracket; exact zeros (cubic at 1, α) are kept as-is.
fn refine_root<G: Bistable + ?Sized>(term: &G, x: f64) -> f64 {
    if term.rate(x) == 0.0 {
        return x;
    }
    let h = 1e-9 * x.abs().max(1e-9);
    let (mut a, mut b) = (x - h, x + h);
    for _ in 0..40 {
        if term.rate(a).signum() != term.rate(b).signum() {
            return roots::bisect(|u| term.rate(u), a, b, 0.0).unwrap_or(x);
        }
        a -= h;
        b += h;
    }
    x
}

/// Outcome of checking one structural hypothesis on a sample grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// `(u)` or `(f, m)` sample where the check failed.
    pub violation: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
}

impl HypothesisReport {
    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Sample grids for [`check_hypotheses`].
#[derive(Debug, Clone)]
pub struct HypothesisGrid {
    /// Densities covering `[0, upper·(1 + margin)]`.
    pub densities: Vec<f64>,
    /// Sterile densities (mosquito term only).
    pub sterile: Vec<f64>,
    /// Kill rate μ of the killing strategy, checked against `-μu ≤ g(u)`.
    pub kill_rate: Option<f64>,
}

impl HypothesisGrid {
    pub fn uniform(upper: f64, margin: f64, n: usize, kill_rate: Option<f64>) -> Self {
        let top = upper * (1.0 + margin);
        let densities = (0..=n).map(|i| top * i as f64 / n as f64).collect();
        Self {
            densities,
            sterile: Vec::new(),
            kill_rate,
        }
    }
}

fn check(name: &str, passed: bool, detail: String, violation: Option<(f64, f64)>) -> HypothesisCheck {
    HypothesisCheck {
        name: name.into(),
        passed,
        detail,
        violation,
    }
}

fn check_bistable_shape<G: Bistable + ?Sized>(name: &str, term: &G) -> (HypothesisCheck, Option<ReactionInfo>) {
    match derive_info(term) {
        Ok(info) => {
            let d0 = term.derivative(0.0);
            let da = term.derivative(info.alpha);
            let d1 = term.derivative(info.f_upper);
            let ok = d0 < 0.0 && d1 < 0.0 && da > 0.0 && info.integral01 > 0.0;
            (
                check(
                    name,
                    ok,
                    format!(
                        "zeros 0 < {:.6e} < {:.6e}; g'(0) = {d0:.3e}, g'(α) = {da:.3e}, g'(F) = {d1:.3e}, ∫g = {:.6e}",
                        info.alpha, info.f_upper, info.integral01
                    ),
                    None,
                ),
                Some(info),
            )
        }
        Err(e) => (check(name, false, e.to_string(), None), None),
    }
}

/// Checks the structural hypotheses of the killing or sterile setting on the
/// supplied samples: bistable shape, kill rate dominating the loss of growth,
/// sterile males suppressing growth, and no growth without females. Failures are reported, never raised.
pub fn check_hypotheses(term: &ReactionTerm, grid: &HypothesisGrid) -> HypothesisReport {
    let mut checks = Vec::new();
    match term {
        ReactionTerm::Cubic { alpha } => {
            let cubic = CubicReaction { alpha: *alpha };
            checks.push(check_bistable_shape("bistable-shape", &cubic).0);
            if let Some(mu) = grid.kill_rate {
                checks.push(check_kill_rate(&cubic, mu, &grid.densities));
            }
        }
        ReactionTerm::Mosquito(p) => {
            checks.push(check_bistable_shape("bistable-shape", p).0);
            if let Some(mu) = grid.kill_rate {
                checks.push(check_kill_rate(p, mu, &grid.densities));
            }
            checks.push(check_sterile_monotone(p, grid));
            checks.push(check_sterile_vanishing(p, grid));
        }
    }
    HypothesisReport { checks }
}

fn check_kill_rate<G: Bistable + ?Sized>(term: &G, mu: f64, densities: &[f64]) -> HypothesisCheck {
    let mut worst = f64::NEG_INFINITY;
    let mut at = 0.0;
    for &u in densities.iter().filter(|&&u| u > 0.0) {
        let need = -term.rate(u) / u;
        if need > worst {
            worst = need;
            at = u;
        }
    }
    let passed = mu >= worst;
    check(
        "kill-dominates",
        passed,
        format!("μ = {mu}, max -g(u)/u = {worst:.6e} at u = {at:.6e}"),
        (!passed).then_some((at, 0.0)),
    )
}

fn check_sterile_monotone(p: &MosquitoReaction, grid: &HypothesisGrid) -> HypothesisCheck {
    let mut sterile = grid.sterile.clone();
    sterile.sort_by(f64::total_cmp);
    for &f in grid.densities.iter().filter(|&&f| f > 0.0) {
        for w in sterile.windows(2) {
            if w[1] > w[0] && p.rate_fm(f, w[1]) >= p.rate_fm(f, w[0]) {
                return check(
                    "sterile-suppresses",
                    false,
                    format!("g(f, m) not decreasing in m at f = {f}, m = {}", w[1]),
                    Some((f, w[1])),
                );
            }
        }
    }
    // saturation: g(f, m) -> -μF f as m grows; the sterile density needed grows like f²
    for &f in grid.densities.iter().filter(|&&f| f > 0.0) {
        let m_big = 1e6 * (1.0 + f * f / 100.0);
        let lim = -p.mu_f * f;
        let got = p.rate_fm(f, m_big);
        if ((got - lim) / lim).abs() > 1e-3 {
            return check(
                "sterile-suppresses",
                false,
                format!("g(f, {m_big:e}) = {got} is not within 1e-3 of -μF f = {lim}"),
                Some((f, m_big)),
            );
        }
    }
    check("sterile-suppresses", true, "∂g/∂m < 0 and g(f, m) → -μF f".into(), None)
}

fn check_sterile_vanishing(p: &MosquitoReaction, grid: &HypothesisGrid) -> HypothesisCheck {
    for &m in grid.sterile.iter() {
        let v = p.rate_fm(0.0, m);
        if v != 0.0 {
            return check("no-females-no-growth", false, format!("g(0, {m}) = {v}"), Some((0.0, m)));
        }
    }
    check("no-females-no-growth", true, "g(0, m) = 0 on all samples".into(), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_roots_and_values() {
        assert_eq!(eval_cubic(0.0, 0.25), 0.0);
        assert_eq!(eval_cubic(0.25, 0.25), 0.0);
        assert_eq!(eval_cubic(1.0, 0.25), 0.0);
        assert!((eval_cubic(0.5, 0.25) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn cubic_sign_pattern() {
        let a = 0.25;
        for i in 1..1000 {
            let u = i as f64 / 1000.0;
            let g = eval_cubic(u, a);
            if u < a {
                assert!(g < 0.0);
            } else if u > a {
                assert!(g > 0.0);
            }
        }
    }

    #[test]
    fn cubic_beta_closed_form() {
        let info = derive_info(&CubicReaction { alpha: 0.25 }).unwrap();
        let beta = (5.0 - 7f64.sqrt()) / 6.0;
        assert!((info.beta - beta).abs() < 1e-10, "{}", info.beta);
        assert!((info.integral01 - 1.0 / 24.0).abs() < 1e-14);
        assert!(info.alpha1 < info.alpha && info.alpha < info.alpha2);
        assert!(info.alpha < info.beta && info.beta < 1.0);
        assert_eq!(info.f_upper, 1.0);
        assert_eq!(info.alpha, 0.25);
        let g = CubicReaction { alpha: 0.25 };
        assert!(g.potential(info.beta).abs() <= 1e-10);
    }

    #[test]
    fn balanced_cubic_rejected() {
        assert!(matches!(
            derive_info(&CubicReaction { alpha: 0.5 }),
            Err(Error::HypothesisViolation(_))
        ));
    }

    #[test]
    fn cubic_derivative_at_alpha() {
        let g = CubicReaction { alpha: 0.25 };
        assert!((g.derivative(0.25) - 3.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn numerical_potential_matches_closed_form() {
        struct Plain(f64);
        impl Bistable for Plain {
            fn rate(&self, u: f64) -> f64 {
                eval_cubic(u, self.0)
            }
            fn scan_max(&self) -> f64 {
                1.5
            }
        }
        let exact = CubicReaction { alpha: 0.3 };
        for u in [0.1, 0.4, 0.77, 1.0] {
            assert!((Plain(0.3).potential(u) - exact.potential(u)).abs() < 1e-14);
        }
    }

    #[test]
    fn kill_rate_hypothesis() {
        let term = ReactionTerm::Cubic { alpha: 0.25 };
        let ok = check_hypotheses(&term, &HypothesisGrid::uniform(1.0, 0.1, 2000, Some(1.0)));
        assert!(ok.get("kill-dominates").unwrap().passed);
        assert!(ok.get("bistable-shape").unwrap().passed);
        let bad = check_hypotheses(&term, &HypothesisGrid::uniform(1.0, 0.1, 2000, Some(0.1)));
        let kill = bad.get("kill-dominates").unwrap();
        assert!(!kill.passed);
        assert!(kill.violation.is_some());
    }

    #[test]
    fn mosquito_vanishes_without_females() {
        let p = MosquitoReaction::default();
        assert_eq!(eval_mosquito(0.0, 1000.0, &p).unwrap(), 0.0);
        assert_eq!(eval_mosquito(0.0, 0.0, &p).unwrap(), 0.0);
        assert!(eval_mosquito(-1.0, 0.0, &p).is_err());
        assert!(eval_mosquito(1.0, -1.0, &p).is_err());
    }

    #[test]
    fn mosquito_decreasing_in_sterile_density() {
        let p = MosquitoReaction::default();
        assert!(p.rate_fm(1.0, 0.0) > p.rate_fm(1.0, 100.0));
    }

    #[test]
    fn mosquito_saturates_to_death_rate() {
        let p = MosquitoReaction::default();
        for f in [0.5, 1.0, 5.0, 10.0] {
            let lim = -p.mu_f * f;
            assert!(((p.rate_fm(f, 1e6) - lim) / lim).abs() < 1e-3, "f = {f}");
        }
    }

    #[test]
    fn mosquito_equilibria() {
        let p = MosquitoReaction::default();
        let info = derive_info(&p).unwrap();
        // oracle: independent scalar bisection for the largest positive root
        let upper = roots::bisect(|f| p.rate_fm(f, 0.0), 1000.0, 1e5, 1e-9).unwrap();
        assert!((info.f_upper - upper).abs() < 1e-6 * upper);
        assert!(p.rate_fm(info.f_upper, 0.0).abs() < 1e-6);
        assert!(info.f_prime > 0.0 && info.f_prime < 1e-3 * info.f_upper);
        let report = check_hypotheses(
            &ReactionTerm::Mosquito(p),
            &HypothesisGrid {
                sterile: vec![0.0, 1.0, 10.0, 100.0, 1e4],
                ..HypothesisGrid::uniform(info.f_upper, 0.1, 500, None)
            },
        );
        assert!(report.all_passed(), "{report:#?}");
    }
}
