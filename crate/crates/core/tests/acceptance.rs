//! End-to-end acceptance checks. Each test prints one line
//! `criterion N: PASS|FAIL <measurements>` and then asserts the criterion.

use std::sync::OnceLock;
use std::time::Instant;

use carpet::bisect::Verdict;
use carpet::fd::Grid1D;
use carpet::killing::{interface_value_sweep, max_increase, InterfaceRow, KillingConfig, SteadyOutcome};
use carpet::reaction::{derive_info, Bistable, CubicReaction};
use carpet::sterile::{
    critical_width, hetero_compare, lab_sterile_density, ms_closed_form, ms_spectral, pi_dichotomy, run_sterile,
    ReleaseProfile, SpectralSettings, SterileAnalytic, SterileConfig,
};
use carpet::wave::{matching_width, natural_speed, SpeedOptions};

const ALPHA: f64 = 0.25;
const SPEEDS: [f64; 5] = [0.0, -0.5, -1.0, -1.5, -2.0];
const LAMBDA_BRACKET: (f64, f64) = (0.1, 39.0);
const LAMBDA_TOL: f64 = 0.02;

fn report(n: usize, pass: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn beta() -> f64 {
    (5.0 - 7f64.sqrt()) / 6.0
}

fn killing_template() -> KillingConfig {
    KillingConfig::reference(0.0, 1.0)
}

/// Threshold sweep over [`SPEEDS`] on the reference mesh, with the steady
/// state at `Λ(c) + 10dx` for each speed.
fn sweep() -> &'static [InterfaceRow] {
    static ROWS: OnceLock<Vec<InterfaceRow>> = OnceLock::new();
    ROWS.get_or_init(|| interface_value_sweep(&SPEEDS, LAMBDA_BRACKET, LAMBDA_TOL, &killing_template()).unwrap())
}

/// Steady outcomes on either side of each threshold of the sweep.
fn bracketing_profiles() -> &'static [(f64, SteadyOutcome, SteadyOutcome)] {
    static OUT: OnceLock<Vec<(f64, SteadyOutcome, SteadyOutcome)>> = OnceLock::new();
    OUT.get_or_init(|| {
        sweep()
            .iter()
            .map(|row| {
                let base = KillingConfig {
                    c: row.c,
                    ..killing_template()
                };
                let below = carpet::killing::run_killing(&base.with_width(row.lambda.bracket_low)).unwrap();
                let above = carpet::killing::run_killing(&base.with_width(row.lambda.bracket_high)).unwrap();
                (row.c, below, above)
            })
            .collect()
    })
}

const RELEASE: f64 = 20000.0;
const STERILE_C: f64 = -0.05;
const WIDTH_BRACKET: (f64, f64) = (5.0, 80.0);
const WIDTH_TOL: f64 = 0.05;

fn sterile_template(c: f64, widest: f64) -> SterileConfig {
    SterileConfig::reference(c, ReleaseProfile::homogeneous(RELEASE, widest))
}

/// L*(−0.05, 20000) on the reference mesh.
fn critical_window() -> f64 {
    static L: OnceLock<f64> = OnceLock::new();
    *L.get_or_init(|| {
        let template = sterile_template(STERILE_C, WIDTH_BRACKET.1);
        critical_width(&template, RELEASE, WIDTH_BRACKET, WIDTH_TOL)
            .unwrap()
            .threshold
    })
}

#[test]
fn criterion_01_natural_speed() {
    let t = Instant::now();
    let m = natural_speed(&CubicReaction { alpha: ALPHA }, &SpeedOptions::default()).unwrap();
    let exact = (1.0 - 2.0 * ALPHA) / 2f64.sqrt();
    let rel = (m.speed - exact).abs() / exact;
    let secs = t.elapsed().as_secs_f64();
    let pass = rel <= 0.02 && secs <= 30.0;
    report(
        1,
        pass,
        format!("speed {:.5} vs {exact:.5}, relative error {rel:.2e}, {secs:.1} s", m.speed),
    );
    assert!(pass);
}

#[test]
fn criterion_02_beta() {
    let info = derive_info(&CubicReaction { alpha: ALPHA }).unwrap();
    let err = (info.beta - beta()).abs();
    let pass = err <= 1e-10;
    report(2, pass, format!("beta {:.15} vs {:.15}, error {err:.1e}", info.beta, beta()));
    assert!(pass);
}

#[test]
fn criterion_03_lambda_monotone_and_interface_values() {
    let t = Instant::now();
    let rows = sweep();
    let increasing = rows.windows(2).all(|w| w[1].lambda.threshold > w[0].lambda.threshold);
    let mut failures = Vec::new();
    let mut values = Vec::new();
    for row in rows {
        let u = row.u_at_l;
        values.push(format!("c={} Lambda={:.4} u={u:.4}", row.c, row.lambda.threshold));
        let ok = if row.c.abs() <= 0.5 {
            u > ALPHA && u <= beta()
        } else {
            (u - ALPHA).abs() <= 0.05
        };
        if !ok {
            failures.push(format!("c={}", row.c));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = increasing && failures.is_empty() && secs <= 1800.0;
    report(
        3,
        pass,
        format!(
            "increasing={increasing}; {}; interface-value failures at [{}]",
            values.join(", "),
            failures.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_04_ode_pde_cross_validation() {
    let term = CubicReaction { alpha: ALPHA };
    let dx = killing_template().grid.dx();
    let rows = sweep();
    let mut pass = true;
    let mut parts = Vec::new();
    for c in [0.0, -0.5] {
        let row = rows.iter().find(|r| r.c == c).unwrap();
        let root = matching_width(&term, c, 1.0).unwrap();
        let gap = (row.lambda.threshold - root.width).abs();
        pass &= gap <= 2.0 * dx;
        parts.push(format!(
            "c={c}: PDE {:.4} vs matching root {:.4} (gap {gap:.4}, limit {:.2})",
            row.lambda.threshold,
            root.width,
            2.0 * dx
        ));
    }
    let at_rest = rows.iter().find(|r| r.c == 0.0).unwrap();
    let beta_gap = (at_rest.u_at_l - beta()).abs();
    pass &= beta_gap <= 0.02;
    parts.push(format!("u(Lambda(0)+10dx) = {:.4}, |u - beta| = {beta_gap:.4}", at_rest.u_at_l));
    report(4, pass, parts.join("; "));
    assert!(pass);
}

#[test]
fn criterion_05_sterile_density_triple_agreement() {
    let t = Instant::now();
    let (c, width, m, mu_s) = (-0.05, 10.0, 1.0, 0.1);
    let rel = ReleaseProfile::homogeneous(m, width);
    let settings = SpectralSettings::default();
    let xs: Vec<f64> = (0..=140).map(|k| -30.0 + 0.5 * k as f64).collect();
    let spectral_gap = xs
        .iter()
        .map(|&x| (ms_closed_form(x, c, mu_s, &rel).unwrap() - ms_spectral(x, c, mu_s, &rel, &settings).unwrap()).abs())
        .fold(0.0, f64::max);
    let grid = Grid1D::with_spacing(-60.0, 60.0, 0.05).unwrap();
    let lab = lab_sterile_density(c, mu_s, &rel, grid, 0.02, 1.0, 250.0).unwrap();
    let lab_gap = lab
        .iter()
        .map(|&(xi, v)| (v - ms_closed_form(xi, c, mu_s, &rel).unwrap()).abs())
        .fold(0.0, f64::max);
    let an = SterileAnalytic::new(c, width, m, mu_s).unwrap();
    let peak = an.eval(an.argmax()).0;
    let sampled_peak = (0..=20000)
        .map(|k| an.eval(-50.0 + 0.005 * k as f64).0)
        .fold(f64::NEG_INFINITY, f64::max);
    let bound = m / mu_s;
    let secs = t.elapsed().as_secs_f64();
    let pass = spectral_gap <= 1e-6 && lab_gap <= 1e-3 && peak <= bound && sampled_peak <= bound && secs <= 120.0;
    report(
        5,
        pass,
        format!(
            "closed/spectral {spectral_gap:.2e}, closed/lab {lab_gap:.2e}, sup {peak:.6} <= {bound}, {secs:.1} s"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_comparison_principle() {
    let t = Instant::now();
    let run = |m: f64| {
        let cfg = SterileConfig {
            run_to_horizon: true,
            ..SterileConfig::reference(STERILE_C, ReleaseProfile::homogeneous(m, 17.45))
        };
        run_sterile(&cfg).unwrap()
    };
    let low = run(5000.0);
    let high = run(20000.0);
    let same_times = low.record.times == high.record.times;
    let mut m_excess: f64 = 0.0;
    let mut f_excess: f64 = 0.0;
    for k in 0..low.record.times.len().min(high.record.times.len()) {
        for i in 0..low.record.females[k].len() {
            m_excess = m_excess.max(low.record.steriles[k][i] - high.record.steriles[k][i]);
            f_excess = f_excess.max(high.record.females[k][i] - low.record.females[k][i]);
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = same_times && !low.record.times.is_empty() && m_excess <= 1e-8 && f_excess <= 1e-8 && secs <= 600.0;
    report(
        6,
        pass,
        format!(
            "{} stored times, max(m5k - m20k) = {m_excess:.2e}, max(f20k - f5k) = {f_excess:.2e}, {secs:.1} s",
            low.record.times.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_critical_window_width() {
    let t = Instant::now();
    let l_star = critical_window();
    let template = sterile_template(STERILE_C, WIDTH_BRACKET.1);
    let verdict = |w: f64| {
        run_sterile(&SterileConfig {
            release: ReleaseProfile::homogeneous(RELEASE, w),
            stride: 0,
            ..template.clone()
        })
        .unwrap()
        .verdict
    };
    let below = verdict(l_star - 0.5);
    let above = verdict(l_star + 0.5);
    let rel = (l_star - 17.45).abs() / 17.45;
    let secs = t.elapsed().as_secs_f64();
    let flips = below == Verdict::Invasion && above == Verdict::Eradication;
    let pass = flips && rel <= 0.35 && secs <= 2700.0;
    report(
        7,
        pass,
        format!("L* = {l_star:.3} (relative distance to 17.45: {rel:.3}), L*-0.5 {below}, L*+0.5 {above}, {secs:.1} s"),
    );
    assert!(pass);
}

#[test]
fn criterion_08_heterogeneous_release() {
    let t = Instant::now();
    let template = sterile_template(STERILE_C, WIDTH_BRACKET.1);
    let width = critical_window() + 10.0 * template.grid.dx();
    let r = hetero_compare(&template, RELEASE, width).unwrap();
    let ratio = r.n_heterogeneous / r.n_homogeneous;
    let exact = (ratio - 11.0 / 12.0).abs() <= 4.0 * f64::EPSILON;
    let secs = t.elapsed().as_secs_f64();
    let pass = r.homogeneous == Verdict::Eradication && r.heterogeneous == Verdict::Eradication && exact && secs <= 900.0;
    report(
        8,
        pass,
        format!(
            "L = {width:.3}: homogeneous {}, two-step {}, swapped {}, N ratio {ratio:.17} (11/12 = {:.17}), {secs:.1} s",
            r.homogeneous,
            r.heterogeneous,
            r.swapped,
            11.0 / 12.0
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_release_density_trends() {
    let t = Instant::now();
    let pi = |c: f64, width: f64| {
        let template = SterileConfig::reference(c, ReleaseProfile::homogeneous(1.0, width));
        pi_dichotomy(&template, width, (1e2, 1e12), 0.01).map(|r| r.threshold)
    };
    let cases = [(-0.05, 5.0), (-0.05, 20.0), (-0.05, 50.0), (-0.5, 20.0)];
    let values: Vec<_> = cases.iter().map(|&(c, w)| pi(c, w)).collect();
    let shown: Vec<String> = cases
        .iter()
        .zip(&values)
        .map(|((c, w), v)| match v {
            Ok(p) => format!("Pi({c}, {w}) = {p:.4e}"),
            Err(e) => format!("Pi({c}, {w}) failed: {e}"),
        })
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let pass = match values.iter().cloned().collect::<Result<Vec<f64>, _>>() {
        Ok(v) => v[0] > v[1] && v[1] > v[2] && v[3] > v[1] && secs <= 2700.0,
        Err(_) => false,
    };
    report(9, pass, format!("{}, {secs:.1} s", shown.join(", ")));
    assert!(pass);
}

#[test]
fn criterion_10_structural_invariants() {
    let term = CubicReaction { alpha: ALPHA };
    let g0 = term.derivative(0.0).abs();
    let mut failures = Vec::new();
    let mut checked = (0, 0);
    let mut worst_rate: f64 = 0.0;
    for (c, below, above) in bracketing_profiles() {
        for out in [below, above] {
            let width = out_width(out);
            match out.verdict {
                Verdict::Eradication => {
                    checked.0 += 1;
                    // single-node noise: no increase beyond the steady tolerance
                    if max_increase(&out.profile) > 1e-6 {
                        failures.push(format!("c={c} L={width:.4}: eradication profile increases"));
                    }
                    let expected = ((c * c + 4.0 * g0).sqrt() - c.abs()) / 2.0;
                    match fitted_decay(out, width) {
                        Some(measured) => {
                            let rel = (measured - expected).abs() / expected;
                            worst_rate = worst_rate.max(rel);
                            if rel > 0.05 {
                                failures.push(format!("c={c}: decay {measured:.4} vs {expected:.4}"));
                            }
                        }
                        None => failures.push(format!(
                            "c={c} L={width:.4}: tail never enters the linear regime on the mesh (u at the right end {:.3e})",
                            out.profile.values[out.profile.grid.n - 1]
                        )),
                    }
                }
                Verdict::Invasion => {
                    checked.1 += 1;
                    let minima = interior_minima(out, width);
                    if minima != 1 {
                        failures.push(format!("c={c} L={width:.4}: {minima} interior minima in (0, L)"));
                    }
                }
                Verdict::Undecided => failures.push(format!("c={c}: undecided")),
            }
        }
    }
    let pass = failures.is_empty();
    report(
        10,
        pass,
        format!(
            "{} eradication, {} invasion profiles; worst tail-rate error {worst_rate:.3}; failures [{}]",
            checked.0,
            checked.1,
            failures.join("; ")
        ),
    );
    assert!(pass);
}

/// Zone width of a bracketing run, recovered from the sweep.
fn out_width(out: &SteadyOutcome) -> f64 {
    for (row, (_, below, above)) in sweep().iter().zip(bracketing_profiles()) {
        if std::ptr::eq(out, below) {
            return row.lambda.bracket_low;
        }
        if std::ptr::eq(out, above) {
            return row.lambda.bracket_high;
        }
    }
    unreachable!("profile is not from the sweep")
}

/// Count of strict local minima of the profile at nodes inside `(0, width)`.
fn interior_minima(out: &SteadyOutcome, width: f64) -> usize {
    let g = out.profile.grid;
    let v = &out.profile.values;
    (1..g.n - 1)
        .filter(|&i| g.x(i) > 0.0 && g.x(i) < width)
        .filter(|&i| v[i] < v[i - 1] && v[i] <= v[i + 1])
        .count()
}

/// Log-linear least-squares decay rate over the linear regime of the tail:
/// nodes behind the zone with `u ≤ 1e-2`, clear of the last 5 units of mesh.
/// `None` when that stretch is shorter than 10 units.
fn fitted_decay(out: &SteadyOutcome, width: f64) -> Option<f64> {
    let g = out.profile.grid;
    let pts: Vec<(f64, f64)> = (0..g.n)
        .map(|i| (g.x(i), out.profile.values[i]))
        .filter(|&(x, u)| x > width && x <= g.x_max - 5.0 && u <= 1e-2 && u > 1e-300)
        .map(|(x, u)| (x, u.ln()))
        .collect();
    let span = pts.last()?.0 - pts.first()?.0;
    if span < 10.0 {
        return None;
    }
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    Some(-sxy / sxx)
}
