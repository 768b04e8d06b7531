//! Derivative-free scalar root finding: sign-change scans and bracketed bisection.

use crate::error::{Error, Result};

/// Absolute tolerance used for reaction-term roots.
pub const ROOT_TOL: f64 = 1e-12;

/// Default number of scan points used to locate sign changes.
pub const SCAN_POINTS: usize = 10_000;

/// Bisection on `[a, b]`, which must bracket a sign change of `f`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoBracket(format!(
            "f({a}) = {fa}, f({b}) = {fb} have the same sign"
        )));
    }
    // 200 halvings exhaust f64 resolution on any finite bracket.
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Sub-intervals of `[a, b]` on which `f` changes sign, found on a uniform scan.
///
/// Exact zeros on scan nodes are reported as degenerate intervals `(x, x)`.
pub fn sign_changes<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let n = n.max(2);
    let h = (b - a) / n as f64;
    let mut out = Vec::new();
    let mut x_prev = a;
    let mut f_prev = f(a);
    if f_prev == 0.0 {
        out.push((a, a));
    }
    for i in 1..=n {
        let x = if i == n { b } else { a + i as f64 * h };
        let fx = f(x);
        if fx == 0.0 {
            out.push((x, x));
        } else if f_prev != 0.0 && f_prev.signum() != fx.signum() {
            out.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    out
}

/// All roots of `f` on `[a, b]` located by scanning and refined by bisection.
pub fn roots_in<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize, tol: f64) -> Vec<f64> {
    let brackets = sign_changes(&mut f, a, b, n);
    brackets
        .into_iter()
        .filter_map(|(lo, hi)| {
            if lo == hi {
                Some(lo)
            } else {
                bisect(&mut f, lo, hi, tol).ok()
            }
        })
        .collect()
}

/// Composite Gauss-Legendre quadrature (5 nodes per panel).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
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
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * h;
        let half = 0.5 * h;
        let s: f64 = NODES
            .iter()
            .zip(WEIGHTS.iter())
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum();
        total += s * half;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_same_sign() {
        assert!(matches!(
            bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(Error::NoBracket(_))
        ));
    }

    #[test]
    fn scan_finds_all_cubic_roots() {
        let r = roots_in(|u| u * (1.0 - u) * (u - 0.3), -0.1, 1.1, 1000, 1e-13);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.0, 0.3, 1.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn gauss_legendre_polynomial_exact() {
        let v = integrate(|x| x.powi(9) - 3.0 * x * x, 0.0, 2.0, 1);
        assert!((v - (102.4 - 8.0)).abs() < 1e-11);
    }
}
