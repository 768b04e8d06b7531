//! Experiment configuration: TOML ingestion, validation and default resolution.
//!
//! Every numeric setting an experiment uses is materialised in the resolved
//! [`ExperimentConfig`]; settings that were filled from defaults are listed in
//! [`ExperimentConfig::defaulted`] by their dotted path.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::SteadyOptions;
use crate::reaction::{MosquitoReaction, ReactionTerm};
use crate::sterile::{Segment, SpectralSettings};

/// Bundled reference setup for the killing-zone threshold sweep.
pub const REFERENCE_PRESET: &str = include_str!("../presets/reference.toml");

/// Name under which [`REFERENCE_PRESET`] can be passed instead of a path.
pub const REFERENCE_PRESET_NAME: &str = "preset:reference";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    LambdaSweep,
    KillingRun,
    SterileRun,
    PiSearch,
    WidthSearch,
    MsProfile,
    HeteroCompare,
    SpeedCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::LambdaSweep,
        Experiment::KillingRun,
        Experiment::SterileRun,
        Experiment::PiSearch,
        Experiment::WidthSearch,
        Experiment::MsProfile,
        Experiment::HeteroCompare,
        Experiment::SpeedCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::LambdaSweep => "lambda-sweep",
            Experiment::KillingRun => "killing-run",
            Experiment::SterileRun => "sterile-run",
            Experiment::PiSearch => "pi-search",
            Experiment::WidthSearch => "width-search",
            Experiment::MsProfile => "ms-profile",
            Experiment::HeteroCompare => "hetero-compare",
            Experiment::SpeedCheck => "speed-check",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| Error::Validation("experiment".into()))
    }

    fn uses_mosquito(&self) -> bool {
        matches!(
            self,
            Experiment::SterileRun
                | Experiment::PiSearch
                | Experiment::WidthSearch
                | Experiment::MsProfile
                | Experiment::HeteroCompare
        )
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<String>,
    grid: Option<RawGrid>,
    scheme: Option<RawScheme>,
    steady: Option<RawSteady>,
    reaction: Option<RawReaction>,
    strategy: Option<RawStrategy>,
    spectral: Option<RawSpectral>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x_min: Option<f64>,
    x_max: Option<f64>,
    dx: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    dt: Option<f64>,
    d: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSteady {
    eps: Option<f64>,
    t_check: Option<f64>,
    t_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReaction {
    kind: Option<String>,
    alpha: Option<f64>,
    r: Option<f64>,
    nu_e: Option<f64>,
    mu_e: Option<f64>,
    k: Option<f64>,
    b: Option<f64>,
    tau: Option<f64>,
    gamma_s: Option<f64>,
    mu_f: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    c: Option<f64>,
    width: Option<f64>,
    mu: Option<f64>,
    speeds: Option<Vec<f64>>,
    bracket: Option<[f64; 2]>,
    tol: Option<f64>,
    release: Option<f64>,
    segments: Option<Vec<Segment>>,
    mu_s: Option<f64>,
    front: Option<f64>,
    t_max: Option<f64>,
    extinction_fraction: Option<f64>,
    escape_margin: Option<f64>,
    slope_tol: Option<f64>,
    speed_tolerance: Option<f64>,
    level: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectral {
    half_width: Option<f64>,
    panel: Option<f64>,
    tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    stride: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub dt: f64,
    pub d: f64,
}

/// Intervention and search settings; each experiment reads the subset it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    pub c: f64,
    pub width: f64,
    pub mu: f64,
    pub speeds: Vec<f64>,
    pub bracket: [f64; 2],
    pub tol: f64,
    /// Release density `M` of a homogeneous window.
    pub release: f64,
    /// Explicit release profile; when empty the window is `M·1_{(0, width)}`.
    pub segments: Vec<Segment>,
    pub mu_s: f64,
    pub front: f64,
    pub t_max: f64,
    pub extinction_fraction: f64,
    pub escape_margin: f64,
    pub slope_tol: f64,
    pub speed_tolerance: f64,
    pub level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Space-time output keeps every `stride`-th step.
    pub stride: usize,
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub grid: GridSpec,
    pub scheme: SchemeSpec,
    pub steady: SteadyOptions,
    pub reaction: ReactionTerm,
    pub strategy: StrategySpec,
    pub spectral: SpectralSettings,
    pub output: OutputSpec,
    /// Dotted paths of every setting filled from a default.
    pub defaulted: Vec<String>,
}

/// Speeds of the default threshold sweep.
pub fn default_speeds() -> Vec<f64> {
    let mut v: Vec<f64> = (0..=8).map(|k| if k == 0 { 0.0 } else { -0.25 * k as f64 }).collect();
    v.push(-2.2);
    v
}

struct Resolver {
    defaulted: Vec<String>,
}

impl Resolver {
    fn take<T>(&mut self, value: Option<T>, default: T, path: &str) -> T {
        match value {
            Some(v) => v,
            None => {
                self.defaulted.push(path.to_string());
                default
            }
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and resolves a configuration from TOML text.
///
/// `experiment` overrides the file's own `experiment` key when given.
pub fn parse_config(text: &str, experiment: Option<Experiment>) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    resolve(raw, experiment)
}

/// Reads a configuration file, or the bundled preset when `path` is
/// [`REFERENCE_PRESET_NAME`].
pub fn load_config(path: &Path, experiment: Option<Experiment>) -> Result<ExperimentConfig> {
    let text = if path.as_os_str() == REFERENCE_PRESET_NAME {
        REFERENCE_PRESET.to_string()
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
    };
    parse_config(&text, experiment)
}

fn resolve(raw: RawConfig, experiment: Option<Experiment>) -> Result<ExperimentConfig> {
    let experiment = match (experiment, raw.experiment.as_deref()) {
        (Some(e), Some(name)) if Experiment::parse(name)? != e => {
            return Err(Error::InvalidParameter {
                field: "experiment".into(),
                reason: format!("config names '{name}' but '{e}' was requested"),
            })
        }
        (Some(e), _) => e,
        (None, Some(name)) => Experiment::parse(name)?,
        (None, None) => return Err(Error::Validation("experiment".into())),
    };
    let mut r = Resolver { defaulted: Vec::new() };
    let mosquito = experiment.uses_mosquito();

    let rs = raw.strategy.unwrap_or_default();
    let c = r.take(rs.c, if mosquito { -0.05 } else { -1.0 }, "strategy.c");
    let width_default = match experiment {
        Experiment::MsProfile => 10.0,
        Experiment::SterileRun | Experiment::HeteroCompare => 17.45,
        Experiment::PiSearch => 20.0,
        _ => 5.0,
    };
    let width = r.take(rs.width, width_default, "strategy.width");
    let bracket_default = match experiment {
        Experiment::PiSearch => [1e2, 1e12],
        Experiment::WidthSearch | Experiment::HeteroCompare => [5.0, 80.0],
        _ => [0.1, 39.0],
    };
    let bracket = r.take(rs.bracket, bracket_default, "strategy.bracket");
    let tol_default = match experiment {
        Experiment::PiSearch => 0.01,
        Experiment::WidthSearch | Experiment::HeteroCompare => 0.05,
        _ => 0.02,
    };
    let release = r.take(
        rs.release,
        if experiment == Experiment::MsProfile { 1.0 } else { 20000.0 },
        "strategy.release",
    );
    let segments = rs.segments.unwrap_or_default();
    // largest window extent the experiment may use, for sizing the mesh
    let reach = {
        let seg_hi = segments.iter().map(|s| s.end).fold(0.0, f64::max);
        let w = match experiment {
            Experiment::WidthSearch => bracket[1],
            Experiment::HeteroCompare => 7.0 / 6.0 * width.max(bracket[1]),
            _ => width,
        };
        w.max(seg_hi)
    };

    let rg = raw.grid.unwrap_or_default();
    let (gx_min, gx_max, gdx) = match experiment {
        Experiment::MsProfile => (-30.0, reach + 30.0, 0.1),
        e if e.uses_mosquito() => (-30.0, reach + crate::sterile::WINDOW_CLEARANCE, 0.1),
        _ => (-75.0, 75.0, 0.03),
    };
    let grid = GridSpec {
        x_min: r.take(rg.x_min, gx_min, "grid.x_min"),
        x_max: r.take(rg.x_max, gx_max, "grid.x_max"),
        dx: r.take(rg.dx, gdx, "grid.dx"),
    };

    let rsch = raw.scheme.unwrap_or_default();
    let dt_default = match experiment {
        Experiment::LambdaSweep | Experiment::KillingRun => 0.5,
        Experiment::MsProfile => 0.02,
        _ => 0.05,
    };
    let scheme = SchemeSpec {
        dt: r.take(rsch.dt, dt_default, "scheme.dt"),
        d: r.take(rsch.d, 1.0, "scheme.d"),
    };

    let rst = raw.steady.unwrap_or_default();
    let steady = SteadyOptions {
        eps: r.take(rst.eps, 1e-8, "steady.eps"),
        t_check: r.take(rst.t_check, 25.0, "steady.t_check"),
        t_max: r.take(rst.t_max, 2e5, "steady.t_max"),
    };

    let rr = raw.reaction.unwrap_or_default();
    let kind = r.take(
        rr.kind.clone(),
        if mosquito { "mosquito".into() } else { "cubic".into() },
        "reaction.kind",
    );
    let reaction = match kind.as_str() {
        "cubic" => {
            let stray = [
                ("reaction.r", rr.r),
                ("reaction.nu_e", rr.nu_e),
                ("reaction.mu_e", rr.mu_e),
                ("reaction.k", rr.k),
                ("reaction.b", rr.b),
                ("reaction.tau", rr.tau),
                ("reaction.gamma_s", rr.gamma_s),
                ("reaction.mu_f", rr.mu_f),
            ];
            if let Some((name, _)) = stray.iter().find(|(_, v)| v.is_some()) {
                return Err(Error::Validation((*name).into()));
            }
            ReactionTerm::Cubic {
                alpha: r.take(rr.alpha, 0.25, "reaction.alpha"),
            }
        }
        "mosquito" => {
            if rr.alpha.is_some() {
                return Err(Error::Validation("reaction.alpha".into()));
            }
            let d = MosquitoReaction::default();
            ReactionTerm::Mosquito(MosquitoReaction {
                r: r.take(rr.r, d.r, "reaction.r"),
                nu_e: r.take(rr.nu_e, d.nu_e, "reaction.nu_e"),
                mu_e: r.take(rr.mu_e, d.mu_e, "reaction.mu_e"),
                k: r.take(rr.k, d.k, "reaction.k"),
                b: r.take(rr.b, d.b, "reaction.b"),
                tau: r.take(rr.tau, d.tau, "reaction.tau"),
                gamma_s: r.take(rr.gamma_s, d.gamma_s, "reaction.gamma_s"),
                mu_f: r.take(rr.mu_f, d.mu_f, "reaction.mu_f"),
            })
        }
        _ => return Err(Error::Validation("reaction.kind".into())),
    };

    let t_max_default = match experiment {
        Experiment::SpeedCheck => 150.0,
        _ if c < 0.0 => (0.0 - grid.x_min) / c.abs() + 600.0,
        _ => 600.0,
    };
    let strategy = StrategySpec {
        c,
        width,
        mu: r.take(rs.mu, 1.0, "strategy.mu"),
        speeds: r.take(rs.speeds, default_speeds(), "strategy.speeds"),
        bracket,
        tol: r.take(rs.tol, tol_default, "strategy.tol"),
        release,
        segments,
        mu_s: r.take(rs.mu_s, 0.1, "strategy.mu_s"),
        front: r.take(rs.front, 0.0, "strategy.front"),
        t_max: r.take(rs.t_max, t_max_default, "strategy.t_max"),
        extinction_fraction: r.take(rs.extinction_fraction, 1e-3, "strategy.extinction_fraction"),
        escape_margin: r.take(rs.escape_margin, 1.0, "strategy.escape_margin"),
        slope_tol: r.take(rs.slope_tol, crate::killing::SLOPE_TOL, "strategy.slope_tol"),
        speed_tolerance: r.take(rs.speed_tolerance, 0.1, "strategy.speed_tolerance"),
        level: r.take(rs.level, 0.5, "strategy.level"),
    };

    let rsp = raw.spectral.unwrap_or_default();
    let sd = SpectralSettings::default();
    let spectral = SpectralSettings {
        half_width: r.take(rsp.half_width, sd.half_width, "spectral.half_width"),
        panel: r.take(rsp.panel, sd.panel, "spectral.panel"),
        tolerance: r.take(rsp.tolerance, sd.tolerance, "spectral.tolerance"),
    };
    let ro = raw.output.unwrap_or_default();
    let output = OutputSpec {
        stride: r.take(ro.stride, 100, "output.stride"),
    };
    let cfg = ExperimentConfig {
        experiment,
        grid,
        scheme,
        steady,
        reaction,
        strategy,
        spectral,
        output,
        defaulted: r.defaulted,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn positive(v: f64, path: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(path.into()))
    }
}

impl ExperimentConfig {
    /// Field-level checks; solver-specific constraints are checked again by the solvers.
    pub fn validate(&self) -> Result<()> {
        positive(self.scheme.dt, "scheme.dt")?;
        positive(self.scheme.d, "scheme.d")?;
        positive(self.grid.dx, "grid.dx")?;
        if !(self.grid.x_max > self.grid.x_min) {
            return Err(Error::Validation("grid.x_max".into()));
        }
        positive(self.steady.eps, "steady.eps")?;
        positive(self.steady.t_check, "steady.t_check")?;
        positive(self.steady.t_max, "steady.t_max")?;
        let s = &self.strategy;
        if !s.c.is_finite() {
            return Err(Error::Validation("strategy.c".into()));
        }
        positive(s.width, "strategy.width")?;
        if !(s.mu >= 0.0) {
            return Err(Error::Validation("strategy.mu".into()));
        }
        if !(s.bracket[0] < s.bracket[1]) || !(s.bracket[0] >= 0.0) {
            return Err(Error::Validation("strategy.bracket".into()));
        }
        positive(s.tol, "strategy.tol")?;
        if !(s.release >= 0.0) {
            return Err(Error::Validation("strategy.release".into()));
        }
        positive(s.mu_s, "strategy.mu_s")?;
        positive(s.t_max, "strategy.t_max")?;
        positive(s.extinction_fraction, "strategy.extinction_fraction")?;
        if !(s.escape_margin >= 0.0) {
            return Err(Error::Validation("strategy.escape_margin".into()));
        }
        positive(s.slope_tol, "strategy.slope_tol")?;
        positive(s.speed_tolerance, "strategy.speed_tolerance")?;
        if !(s.level > 0.0 && s.level < 1.0) {
            return Err(Error::Validation("strategy.level".into()));
        }
        if s.speeds.is_empty() || s.speeds.iter().any(|c| !c.is_finite()) {
            return Err(Error::Validation("strategy.speeds".into()));
        }
        positive(self.spectral.half_width, "spectral.half_width")?;
        positive(self.spectral.panel, "spectral.panel")?;
        positive(self.spectral.tolerance, "spectral.tolerance")?;
        match self.reaction {
            ReactionTerm::Cubic { alpha } => {
                if !(alpha > 0.0 && alpha < 0.5) {
                    return Err(Error::Validation("reaction.alpha".into()));
                }
            }
            ReactionTerm::Mosquito(p) => p.validate()?,
        }
        if self.experiment.uses_mosquito() && !matches!(self.reaction, ReactionTerm::Mosquito(_)) {
            return Err(Error::InvalidParameter {
                field: "reaction.kind".into(),
                reason: format!("{} needs the mosquito reaction", self.experiment),
            });
        }
        Ok(())
    }

    /// The resolved configuration as TOML, loadable by [`parse_config`].
    pub fn to_toml(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a> {
            experiment: &'a str,
            grid: &'a GridSpec,
            scheme: &'a SchemeSpec,
            steady: &'a SteadyOptions,
            reaction: &'a ReactionTerm,
            strategy: &'a StrategySpec,
            spectral: &'a SpectralSettings,
            output: &'a OutputSpec,
        }
        toml::to_string(&Out {
            experiment: self.experiment.name(),
            grid: &self.grid,
            scheme: &self.scheme,
            steady: &self.steady,
            reaction: &self.reaction,
            strategy: &self.strategy,
            spectral: &self.spectral,
            output: &self.output,
        })
        .map_err(|e| Error::Io(e.to_string()))
    }
}
