//! Adaptive Dormand–Prince 5(4) integration with terminal events.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; the sign follows the integration direction.
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            h_init: 1e-3,
            h_max: 0.5,
            max_steps: 2_000_000,
        }
    }
}

/// How an integration ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// Reached the requested end of the independent variable.
    End,
    /// Event function `index` crossed zero.
    Event(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub stop: Stop,
    pub steps: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let s: f64 = terms.iter().map(|(a, k)| a * k[i]).sum();
        out[i] += h * s;
    }
    out
}

/// One step of size `h`: returns the fifth-order solution and the error estimate.
fn dp_step<F, const N: usize>(f: &F, t: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, &k1)]));
    let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        t + C5 * h,
        &axpy(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &axpy(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y5 = axpy(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err)
}

fn error_norm<const N: usize>(y0: &[f64; N], y1: &[f64; N], err: &[f64; N], o: &OdeOptions) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let scale = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        s += (err[i] / scale).powi(2);
    }
    (s / N as f64).sqrt()
}

/// Integrates `y′ = f(t, y)` from `t0` towards `t_end` (either direction).
///
/// Integration stops early at the first zero crossing of any event function,
/// located by bisection on the step length. `observe` sees every accepted
/// state, including the initial and final ones.
pub fn integrate<F, const N: usize>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &OdeOptions,
    events: &[&dyn Fn(f64, &[f64; N]) -> f64],
    mut observe: impl FnMut(f64, &[f64; N]),
) -> Result<Solution<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * opts.h_init.abs().min((t_end - t0).abs().max(f64::MIN_POSITIVE));
    let mut ev_prev: Vec<f64> = events.iter().map(|e| e(t, &y)).collect();
    observe(t, &y);
    let mut steps = 0;
    while dir * (t_end - t) > 0.0 {
        if steps >= opts.max_steps {
            return Err(Error::StepUnderflow(t));
        }
        if dir * (t + h - t_end) > 0.0 {
            h = t_end - t;
        }
        let (y_new, err) = dp_step(&f, t, &y, h);
        let en = error_norm(&y, &y_new, &err, opts);
        if !en.is_finite() || en > 1.0 {
            let shrink = if en.is_finite() {
                (0.9 * en.powf(-0.2)).max(0.1)
            } else {
                0.1
            };
            h *= shrink;
            if h.abs() <= 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepUnderflow(t));
            }
            continue;
        }
        steps += 1;
        let t_new = t + h;
        // event crossing inside the step
        let ev_new: Vec<f64> = events.iter().map(|e| e(t_new, &y_new)).collect();
        let crossed = (0..events.len())
            .find(|&k| ev_new[k] == 0.0 || ev_prev[k].signum() != ev_new[k].signum());
        if let Some(k) = crossed {
            let (mut lo, mut hi) = (0.0, h);
            let mut y_hit = y_new;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let (y_mid, _) = dp_step(&f, t, &y, mid);
                let v = events[k](t + mid, &y_mid);
                if v == 0.0 || v.signum() != ev_prev[k].signum() {
                    hi = mid;
                    y_hit = y_mid;
                } else {
                    lo = mid;
                }
            }
            let t_hit = t + hi;
            observe(t_hit, &y_hit);
            return Ok(Solution {
                t: t_hit,
                y: y_hit,
                stop: Stop::Event(k),
                steps,
            });
        }
        t = t_new;
        y = y_new;
        ev_prev = ev_new;
        observe(t, &y);
        let grow = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        h = dir * (h.abs() * grow).min(opts.h_max);
    }
    Ok(Solution {
        t,
        y,
        stop: Stop::End,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let s = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 5.0, &OdeOptions::default(), &[], |_, _| {})
            .unwrap();
        assert_eq!(s.stop, Stop::End);
        assert!((s.y[0] - (-5f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let s = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            -10.0,
            &OdeOptions::default(),
            &[],
            |_, _| {},
        )
        .unwrap();
        assert!((s.y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((s.y[1] - 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn event_locates_first_zero() {
        let ev = |_: f64, y: &[f64; 2]| y[0];
        let s = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            10.0,
            &OdeOptions::default(),
            &[&ev],
            |_, _| {},
        )
        .unwrap();
        assert_eq!(s.stop, Stop::Event(0));
        assert!((s.t - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }
}
