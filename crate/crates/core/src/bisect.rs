//! Threshold search by dichotomy on a verdict-valued map.
//!
//! Every search in this crate has the same orientation: small parameter values
//! (zone width, release density) lead to invasion, large ones to eradication.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Classification of a simulated outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Eradication,
    Invasion,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Eradication => "Eradication",
            Verdict::Invasion => "Invasion",
            Verdict::Undecided => "Undecided",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tolerance {
    Absolute(f64),
    /// Bracket width relative to its lower end.
    Relative(f64),
}

impl Tolerance {
    fn met(&self, low: f64, high: f64) -> bool {
        match *self {
            Tolerance::Absolute(t) => high - low <= t,
            Tolerance::Relative(t) => high - low <= t * low.abs(),
        }
    }
}

/// Output of a threshold search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalResult {
    /// Midpoint of the final bracket.
    pub threshold: f64,
    pub bracket_low: f64,
    pub bracket_high: f64,
    pub iterations: usize,
    /// Every evaluated parameter value with its verdict, in evaluation order.
    pub verdicts: Vec<(f64, Verdict)>,
    pub tolerance: Tolerance,
}

/// Bisects `[low, high]` until the tolerance is met. `low` must yield
/// [`Verdict::Invasion`] and `high` [`Verdict::Eradication`]; an undecided
/// midpoint aborts the search.
pub fn dichotomy<F>(low: f64, high: f64, tol: Tolerance, mut eval: F) -> Result<CriticalResult>
where
    F: FnMut(f64) -> Result<Verdict>,
{
    if !(high > low) {
        return Err(Error::InvalidParameter {
            field: "bracket".into(),
            reason: format!("need low < high, got [{low}, {high}]"),
        });
    }
    let mut verdicts = Vec::new();
    let vl = eval(low)?;
    verdicts.push((low, vl));
    let vh = eval(high)?;
    verdicts.push((high, vh));
    if vl != Verdict::Invasion || vh != Verdict::Eradication {
        return Err(Error::BadBracket {
            low,
            high,
            low_verdict: vl.to_string(),
            high_verdict: vh.to_string(),
        });
    }
    let (mut lo, mut hi) = (low, high);
    let mut iterations = 0;
    while !tol.met(lo, hi) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = eval(mid)?;
        verdicts.push((mid, v));
        iterations += 1;
        match v {
            Verdict::Invasion => lo = mid,
            Verdict::Eradication => hi = mid,
            Verdict::Undecided => return Err(Error::UndecidedVerdict(mid)),
        }
    }
    Ok(CriticalResult {
        threshold: 0.5 * (lo + hi),
        bracket_low: lo,
        bracket_high: hi,
        iterations,
        verdicts,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_at(t: f64) -> impl FnMut(f64) -> Result<Verdict> {
        move |x| {
            Ok(if x < t {
                Verdict::Invasion
            } else {
                Verdict::Eradication
            })
        }
    }

    #[test]
    fn converges_to_known_threshold() {
        let r = dichotomy(2.0, 39.0, Tolerance::Absolute(0.02), step_at(7.123)).unwrap();
        assert!(r.bracket_high - r.bracket_low <= 0.02);
        assert!(r.bracket_low < 7.123 && 7.123 <= r.bracket_high);
        assert_eq!(r.verdicts.len(), r.iterations + 2);
    }

    #[test]
    fn relative_tolerance() {
        let r = dichotomy(100.0, 1e6, Tolerance::Relative(0.01), step_at(4321.0)).unwrap();
        assert!(r.bracket_high - r.bracket_low <= 0.01 * r.bracket_low);
        assert!((r.threshold - 4321.0).abs() / 4321.0 < 0.01);
    }

    #[test]
    fn bad_bracket() {
        let e = dichotomy(10.0, 39.0, Tolerance::Absolute(0.02), step_at(7.0)).unwrap_err();
        assert!(matches!(e, Error::BadBracket { .. }));
    }

    #[test]
    fn undecided_aborts() {
        let e = dichotomy(0.0, 1.0, Tolerance::Absolute(1e-3), |x| {
            Ok(if x == 0.0 {
                Verdict::Invasion
            } else if x == 1.0 {
                Verdict::Eradication
            } else {
                Verdict::Undecided
            })
        })
        .unwrap_err();
        assert_eq!(e, Error::UndecidedVerdict(0.5));
    }
}
