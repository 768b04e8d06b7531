//! Experiment runners, output files, run manifest and replay.
//!
//! Every run writes its data files into the output directory and finishes by
//! writing `manifest.json` atomically: the resolved configuration, the list of
//! defaulted settings and a SHA-256 digest of each data file. A run directory
//! without a manifest is therefore incomplete.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bisect::{CriticalResult, Verdict};
use crate::config::{parse_config, Experiment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::fd::{Field, Grid1D};
use crate::killing::{lambda_of_c, run_killing_observed, KillingConfig, SteadyOutcome};
use crate::reaction::{derive_info, ReactionTerm};
use crate::sterile::{
    critical_width, hetero_compare, ms_closed_form, ms_spectral, pi_dichotomy, run_sterile, ReleaseProfile,
    SterileConfig, SterileOutcome,
};
use crate::wave::{natural_speed, EradicationFamily, SpeedOptions};

pub const PROFILES_FILE: &str = "profiles.csv";
pub const SPACETIME_FILE: &str = "spacetime.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Environment variable consulted when no worker count is given.
pub const WORKERS_ENV: &str = "CARPET_WORKERS";

/// Scan resolution of the exact eradication family used as the sweep oracle.
const FOLD_SCAN: usize = 60;

/// Worker count from an explicit value, else from [`WORKERS_ENV`], else `None`
/// (one worker per core).
pub fn resolve_workers(explicit: Option<usize>) -> Result<Option<usize>> {
    let n = match explicit {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(s) if !s.trim().is_empty() => Some(
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Validation("workers".into()))?,
            ),
            _ => None,
        },
    };
    if n == Some(0) {
        return Err(Error::Validation("workers".into()));
    }
    Ok(n)
}

/// Formats a value with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a CSV file with a header row and `\n` line endings.
pub fn write_csv<I, R>(path: &Path, header: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    w.write_all(header.join(",").as_bytes())?;
    w.write_all(b"\n")?;
    for row in rows {
        let line: Vec<String> = row.as_ref().iter().map(|&v| fmt_num(v)).collect();
        w.write_all(line.join(",").as_bytes())?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// `t`, then one column per field and node, named `field(x)`.
fn spacetime_header(grid: &Grid1D, fields: &[&str]) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for f in fields {
        h.extend(grid.nodes().map(|x| format!("{f}({})", fmt_num(x))));
    }
    h
}

/// Record of one completed run, stored as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub version: String,
    /// Resolved configuration as TOML; replay parses it back.
    pub config: String,
    pub defaulted: Vec<String>,
    pub workers: Option<usize>,
    pub wall_clock_seconds: f64,
    /// Verdicts, residuals and convergence flags, as in `summary.json`.
    pub diagnostics: Value,
    /// Data file name to hex SHA-256 digest, sorted by name.
    pub files: std::collections::BTreeMap<String, String>,
}

impl Manifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// Runs the configured experiment with `workers` threads and writes its
/// outputs into `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, workers: Option<usize>) -> Result<Manifest> {
    let start = Instant::now();
    fs::create_dir_all(out)?;
    let _ = fs::remove_file(out.join(MANIFEST_FILE));
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Io(e.to_string()))?;
    let files = pool.install(|| dispatch(cfg, out))?;
    let mut digests = std::collections::BTreeMap::new();
    let summary = fs::read_to_string(out.join(SUMMARY_FILE))?;
    let diagnostics: Value = serde_json::from_str(&summary).map_err(|e| Error::Io(e.to_string()))?;
    for name in files {
        digests.insert(name.to_string(), sha256_file(&out.join(name))?);
    }
    let manifest = Manifest {
        experiment: cfg.experiment,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.to_toml()?,
        defaulted: cfg.defaulted.clone(),
        workers,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        diagnostics,
        files: digests,
    };
    let tmp = out.join(format!("{MANIFEST_FILE}.tmp"));
    write_json(&tmp, &serde_json::to_value(&manifest).map_err(|e| Error::Io(e.to_string()))?)?;
    fs::rename(&tmp, out.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Outcome of a successful replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub experiment: Experiment,
    pub verified: Vec<String>,
}

/// Checks the data files of a run directory against its manifest, then reruns
/// the recorded configuration in a scratch directory and compares digests again.
/// `path` is the run directory or its manifest file.
pub fn replay(path: &Path, workers: Option<usize>) -> Result<ReplayReport> {
    let dir = if path.is_file() {
        path.parent().unwrap_or(Path::new("."))
    } else {
        path
    };
    let manifest = Manifest::read(dir)?;
    let cfg = parse_config(&manifest.config, None)?;
    let mut mismatched = Vec::new();
    for (name, digest) in &manifest.files {
        match sha256_file(&dir.join(name)) {
            Ok(d) if &d == digest => {}
            _ => mismatched.push(name.clone()),
        }
    }
    if mismatched.is_empty() {
        let nanos = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0);
        let scratch = std::env::temp_dir().join(format!("carpet-replay-{}-{nanos}", std::process::id()));
        let rerun = run_experiment(&cfg, &scratch, workers);
        let _ = fs::remove_dir_all(&scratch);
        let rerun = rerun?;
        for (name, digest) in &manifest.files {
            if rerun.files.get(name) != Some(digest) {
                mismatched.push(name.clone());
            }
        }
        for name in rerun.files.keys() {
            if !manifest.files.contains_key(name) {
                mismatched.push(name.clone());
            }
        }
    }
    if !mismatched.is_empty() {
        return Err(Error::Mismatch(mismatched));
    }
    Ok(ReplayReport {
        experiment: manifest.experiment,
        verified: manifest.files.keys().cloned().collect(),
    })
}

fn dispatch(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<&'static str>> {
    match cfg.experiment {
        Experiment::LambdaSweep => lambda_sweep(cfg, out),
        Experiment::KillingRun => killing_run(cfg, out),
        Experiment::SterileRun => sterile_run(cfg, out),
        Experiment::PiSearch => pi_search(cfg, out),
        Experiment::WidthSearch => width_search(cfg, out),
        Experiment::MsProfile => ms_profile(cfg, out),
        Experiment::HeteroCompare => hetero(cfg, out),
        Experiment::SpeedCheck => speed_check(cfg, out),
    }
}

fn grid_of(cfg: &ExperimentConfig) -> Result<Grid1D> {
    Grid1D::with_spacing(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.dx)
}

/// Killing-strategy template for a resolved configuration.
pub fn killing_config(cfg: &ExperimentConfig) -> Result<KillingConfig> {
    let k = KillingConfig {
        c: cfg.strategy.c,
        width: cfg.strategy.width,
        mu: cfg.strategy.mu,
        term: cfg.reaction,
        grid: grid_of(cfg)?,
        dt: cfg.scheme.dt,
        d: cfg.scheme.d,
        steady: cfg.steady,
        slope_tol: cfg.strategy.slope_tol,
    };
    k.validate()?;
    Ok(k)
}

fn release_of(cfg: &ExperimentConfig) -> ReleaseProfile {
    if cfg.strategy.segments.is_empty() {
        ReleaseProfile::homogeneous(cfg.strategy.release, cfg.strategy.width)
    } else {
        ReleaseProfile {
            segments: cfg.strategy.segments.clone(),
        }
    }
}

/// Sterile-release template for a resolved configuration.
pub fn sterile_config(cfg: &ExperimentConfig) -> Result<SterileConfig> {
    let term = match cfg.reaction {
        ReactionTerm::Mosquito(p) => p,
        ReactionTerm::Cubic { .. } => {
            return Err(Error::InvalidParameter {
                field: "reaction.kind".into(),
                reason: "sterile release needs the mosquito reaction".into(),
            })
        }
    };
    let s = SterileConfig {
        c: cfg.strategy.c,
        release: release_of(cfg),
        mu_s: cfg.strategy.mu_s,
        term,
        grid: grid_of(cfg)?,
        dt: cfg.scheme.dt,
        d: cfg.scheme.d,
        front: cfg.strategy.front,
        t_max: cfg.strategy.t_max,
        extinction_fraction: cfg.strategy.extinction_fraction,
        escape_margin: cfg.strategy.escape_margin,
        stride: cfg.output.stride,
        run_to_horizon: false,
    };
    s.validate()?;
    Ok(s)
}

fn bracket(cfg: &ExperimentConfig) -> (f64, f64) {
    (cfg.strategy.bracket[0], cfg.strategy.bracket[1])
}

fn critical_json(r: &CriticalResult) -> Value {
    json!({
        "threshold": r.threshold,
        "bracket_low": r.bracket_low,
        "bracket_high": r.bracket_high,
        "iterations": r.iterations,
        "verdicts": r.verdicts.iter().map(|(p, v)| json!([p, v.to_string()])).collect::<Vec<_>>(),
    })
}

fn steady_json(o: &SteadyOutcome) -> Value {
    json!({
        "verdict": o.verdict.to_string(),
        "u_at_l": o.u_at_l,
        "du_at_l": o.du_at_l,
        "interior_min_location": o.interior_min_location,
        "residual": o.residual,
        "elapsed": o.elapsed,
        "converged": o.converged,
    })
}

fn lambda_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<&'static str>> {
    let template = killing_config(cfg)?;
    let br = bracket(cfg);
    let tol = cfg.strategy.tol;
    let dx = template.grid.dx();
    let rows: Vec<(f64, CriticalResult, SteadyOutcome, Option<f64>)> = cfg
        .strategy
        .speeds
        .par_iter()
        .map(|&c| {
            let lambda = lambda_of_c(c, br, tol, &template)?;
            let probe = KillingConfig {
                c,
                ..template.with_width(lambda.threshold + 10.0 * dx)
            };
            let outcome = run_killing_observed(&probe, |_, _| {})?;
            let g = cfg.reaction.as_bistable();
            let fold = EradicationFamily::new(g.as_ref(), c, cfg.strategy.mu)
                .and_then(|f| f.fold(FOLD_SCAN))
                .ok()
                .map(|p| p.width);
            Ok((c, lambda, outcome, fold))
        })
        .collect::<Result<_>>()?;

    let mut names = vec!["x".to_string()];
    names.extend(rows.iter().map(|(c, ..)| format!("u[c={c}]")));
    let grid = template.grid;
    write_csv(
        &out.join(PROFILES_FILE),
        &names,
        (0..grid.n).map(|i| {
            let mut r = vec![grid.x(i)];
            r.extend(rows.iter().map(|(_, _, o, _)| o.profile.values[i]));
            r
        }),
    )?;

    let lambdas: Vec<f64> = rows.iter().map(|(_, l, ..)| l.threshold).collect();
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[a].0.abs().total_cmp(&rows[b].0.abs()));
    let monotone = order
        .windows(2)
        .all(|w| lambdas[w[1]] >= lambdas[w[0]] - 2.0 * tol);
    let g = cfg.reaction.as_bistable();
    let info = derive_info(g.as_ref())?;
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "rows": rows.iter().map(|(c, l, o, fold)| json!({
            "c": c,
            "lambda": critical_json(l),
            "probe_width": o.profile.grid.dx() * 10.0 + l.threshold,
            "probe": steady_json(o),
            "g_at_l": g.rate(o.u_at_l),
            "family_minimum_width": fold,
        })).collect::<Vec<_>>(),
        "lambda": lambdas,
        "monotone_in_speed": monotone,
        "alpha": info.alpha,
        "beta": info.beta,
    });
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(vec![PROFILES_FILE, SUMMARY_FILE])
}

fn killing_run(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<&'static str>> {
    let k = killing_config(cfg)?;
    let stride = cfg.output.stride.max(1);
    let mut snapshots: Vec<Field> = Vec::new();
    let outcome = run_killing_observed(&k, |step, u| {
        if step % stride == 0 {
            snapshots.push(u.clone());
        }
    })?;
    if snapshots.last().map(|s| s.time) != Some(outcome.profile.time) {
        snapshots.push(outcome.profile.clone());
    }
    let grid = k.grid;
    write_csv(
        &out.join(PROFILES_FILE),
        &header(&["x", "u"]),
        (0..grid.n).map(|i| [grid.x(i), outcome.profile.values[i]]),
    )?;
    write_csv(
        &out.join(SPACETIME_FILE),
        &spacetime_header(&grid, &["u"]),
        snapshots.iter().map(|s| {
            let mut r = vec![s.time];
            r.extend_from_slice(&s.values);
            r
        }),
    )?;
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "c": k.c,
        "width": k.width,
        "mu": k.mu,
        "outcome": steady_json(&outcome),
    });
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(vec![PROFILES_FILE, SPACETIME_FILE, SUMMARY_FILE])
}

fn sterile_json(o: &SterileOutcome) -> Value {
    json!({
        "verdict": o.verdict.to_string(),
        "extinct_at": o.extinct_at,
        "escaped_at": o.escaped_at,
        "final_time": o.females.time,
        "final_female_max": o.females.values.iter().cloned().fold(0.0, f64::max),
    })
}

fn write_sterile_profile(path: &Path, o: &SterileOutcome) -> Result<()> {
    let grid = o.females.grid;
    write_csv(
        path,
        &header(&["x", "u", "m"]),
        (0..grid.n).map(|i| [grid.x(i), o.females.values[i], o.steriles.values[i]]),
    )
}

fn sterile_run(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<&'static str>> {
    let s = sterile_config(cfg)?;
    let o = run_sterile(&s)?;
    write_sterile_profile(&out.join(PROFILES_FILE), &o)?;
    let grid = s.grid;
    let rec = &o.record;
    write_csv(
        &out.join(SPACETIME_FILE),
        &spacetime_header(&grid, &["u", "m"]),
        (0..rec.times.len()).map(|k| {
            let mut r = vec![rec.times[k]];
            r.extend_from_slice(&rec.females[k]);
            r.extend_from_slice(&rec.steriles[k]);
            r
        }),
    )?;
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "c": s.c,
        "release_count": s.release.count(),
        "segments": s.release.segments,
        "outcome": sterile_json(&o),
        "female_mass": o.female_mass,
        "front_positions": o.front_positions,
    });
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(vec![PROFILES_FILE, SPACETIME_FILE, SUMMARY_FILE])
}

fn pi_search(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<&'static str>> {
    let template = sterile_config(cfg)?;
    let width = cfg.strategy.width;
    let pi = pi_dichotomy(&template, width, bracket(cfg), cfg.strategy.tol)?;
    let at_threshold = run_sterile(&SterileConfig {
        release: ReleaseProfile::homogeneous(pi.bracket_high, width),
        stride: 0,
        ..template.clone()
    })?;
    write_sterile_profile(&out.join(PROFILES_FILE), &at_threshold)?;
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "c": template.c,
        "width": width,
        "pi": critical_json(&pi),
        "release_count": pi.threshold * width,
        "profile_release_density": pi.bracket_high,
        "profile_outcome": sterile_json(&at_threshold),
    });
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(vec![PROFILES_FILE, SUMMARY_FILE])
}

fn width_search(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<&'static str>> {
    let template = sterile_config(cfg)?;
    let m = cfg.strategy.release;
    let (lo, hi) = bracket(cfg);
    if hi + WINDOW_ROOM > template.grid.x_max {
        return Err(Error::InvalidParameter {
            field: "grid.x_max".into(),
            reason: format!("the widest window {hi} needs x_max >= {}", hi + WINDOW_ROOM),
        });
    }
    let l_star = critical_width(&template, m, (lo, hi), cfg.strategy.tol)?;
    let at_threshold = run_sterile(&SterileConfig {
        release: ReleaseProfile::homogeneous(m, l_star.bracket_high),
        stride: 0,
        ..template.clone()
    })?;
    write_sterile_profile(&out.join(PROFILES_FILE), &at_threshold)?;
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "c": template.c,
        "release_density": m,
        "critical_width": critical_json(&l_star),
        "profile_width": l_star.bracket_high,
        "profile_outcome": sterile_json(&at_threshold),
    });
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(vec![PROFILES_FILE, SUMMARY_FILE])
}

/// Room the mesh must leave to the right of the widest searched window.
const WINDOW_ROOM: f64 = 1.0;

fn ms_profile(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<&'static str>> {
    let release = release_of(cfg);
    release.validate()?;
    let grid = grid_of(cfg)?;
    let (c, mu_s) = (cfg.strategy.c, cfg.strategy.mu_s);
    let rows: Vec<[f64; 3]> = (0..grid.n)
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            Ok([
                x,
                ms_closed_form(x, c, mu_s, &release)?,
                ms_spectral(x, c, mu_s, &release, &cfg.spectral)?,
            ])
        })
        .collect::<Result<_>>()?;
    write_csv(&out.join(PROFILES_FILE), &header(&["x", "m", "m_spectral"]), &rows)?;
    let (imax, peak) = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (i, r[1]))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let gap = rows.iter().map(|r| (r[1] - r[2]).abs()).fold(0.0, f64::max);
    let bound = release.segments.iter().map(|s| s.density).fold(0.0, f64::max) / mu_s;
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "c": c,
        "mu_s": mu_s,
        "segments": release.segments,
        "max_m": peak,
        "argmax_x": rows[imax][0],
        "bound_release_over_mu_s": bound,
        "max_closed_spectral_gap": gap,
    });
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(vec![PROFILES_FILE, SUMMARY_FILE])
}

fn hetero(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<&'static str>> {
    let template = sterile_config(cfg)?;
    let (m, width) = (cfg.strategy.release, cfg.strategy.width);
    let report = hetero_compare(&template, m, width)?;
    let profiles = [
        ReleaseProfile::homogeneous(m, width),
        ReleaseProfile::two_step(m, width),
        ReleaseProfile::two_step_swapped(m, width),
    ];
    let grid = template.grid;
    let hi = profiles.iter().map(|p| p.extent().1).fold(grid.x_max, f64::max);
    let grid = Grid1D::with_spacing(grid.x_min, hi, grid.dx())?;
    let density = |p: &ReleaseProfile, x: f64| -> f64 {
        p.segments
            .iter()
            .filter(|s| x >= s.start && x < s.end)
            .map(|s| s.density)
            .sum()
    };
    write_csv(
        &out.join(PROFILES_FILE),
        &header(&["x", "homogeneous", "two_step", "two_step_swapped"]),
        (0..grid.n).map(|i| {
            let x = grid.x(i);
            [x, density(&profiles[0], x), density(&profiles[1], x), density(&profiles[2], x)]
        }),
    )?;
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "report": report,
        "count_ratio": report.n_heterogeneous / report.n_homogeneous,
        "heterogeneous_saves_release": report.heterogeneous == Verdict::Eradication
            && report.n_heterogeneous < report.n_homogeneous,
    });
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(vec![PROFILES_FILE, SUMMARY_FILE])
}

fn speed_check(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<&'static str>> {
    let opts = SpeedOptions {
        grid: grid_of(cfg)?,
        dt: cfg.scheme.dt,
        d: cfg.scheme.d,
        t_end: cfg.strategy.t_max,
        level: cfg.strategy.level,
        tolerance: cfg.strategy.speed_tolerance,
    };
    let g = cfg.reaction.as_bistable();
    let m = natural_speed(g.as_ref(), &opts)?;
    write_csv(
        &out.join(SPACETIME_FILE),
        &header(&["t", "front"]),
        m.times.iter().zip(&m.positions).map(|(&t, &x)| [t, x]),
    )?;
    let exact = match cfg.reaction {
        ReactionTerm::Cubic { alpha } => Some((2.0 * cfg.scheme.d).sqrt() * (0.5 - alpha)),
        ReactionTerm::Mosquito(_) => None,
    };
    let summary = json!({
        "experiment": cfg.experiment.name(),
        "speed": m.speed,
        "fit_residual": m.residual,
        "exact_speed": exact,
        "relative_error": exact.map(|e| (m.speed - e).abs() / e.abs()),
    });
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(vec![SPACETIME_FILE, SUMMARY_FILE])
}

/// Directory used when no `--out` is given.
pub fn default_out_dir(experiment: Experiment) -> PathBuf {
    PathBuf::from("runs").join(experiment.name())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.5), "-2.5000000000000000e0");
        assert_eq!(fmt_num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn zero_workers_rejected() {
        assert_eq!(resolve_workers(Some(0)), Err(Error::Validation("workers".into())));
        assert_eq!(resolve_workers(Some(3)), Ok(Some(3)));
    }
}
