//! Experiment configuration: TOML text with one table per concern.
//!
//! ```toml
//! [experiment]
//! schemes = ["beamform-no-dl", "best-relay"]
//! topology = "unit"          # unit | triangle | line | random-disk | explicit
//! relay_count = 2
//! trials = 100000
//! seed = 1
//!
//! [sweep]
//! start_db = 0.0
//! stop_db = 20.0
//! step_db = 2.5
//!
//! [relay_power_ratio]        # optional, 1-based relay numbers
//! 2 = 0.5
//! ```
//!
//! Optional tables: `[adaptive]` (`min_errors`, `max_trials`), `[solver]`
//! (`iter`, `thre`), `[feedback]` (`b1`), `[output]` (`dir`) and `[summary]`
//! (`targets`, `slope_window_db`).

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use relaybeam_core::channel::Topology;
use relaybeam_core::dlsolver::IterationControl;
use relaybeam_core::montecarlo::Scheme;
use serde::Deserialize;

/// A problem in the configuration text, located by 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Keep sampling a point until it has `min_errors` errors or `max_trials`
/// trials, doubling the trial count each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Adaptive {
    pub min_errors: u64,
    pub max_trials: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub topology: Topology,
    pub powers_db: Vec<f64>,
    /// `P_j / P` for each relay.
    pub relay_ratios: Vec<f64>,
    /// Trials per power point (the minimum when `adaptive` is set).
    pub trials: u64,
    pub adaptive: Option<Adaptive>,
    pub seed: u64,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    pub control: IterationControl,
    pub b1: Option<u32>,
    pub output_dir: PathBuf,
    pub targets: Vec<f64>,
    pub slope_window_db: (f64, f64),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    experiment: RawExperiment,
    sweep: RawSweep,
    #[serde(default)]
    relay_power_ratio: BTreeMap<String, f64>,
    adaptive: Option<RawAdaptive>,
    solver: Option<RawSolver>,
    feedback: Option<RawFeedback>,
    output: Option<RawOutput>,
    summary: Option<RawSummary>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    schemes: Vec<String>,
    topology: String,
    relay_count: Option<usize>,
    path_loss_exponent: Option<f64>,
    disk_radius: Option<f64>,
    tx_rx_distance: Option<f64>,
    links: Option<Vec<[f64; 2]>>,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    start_db: f64,
    stop_db: f64,
    step_db: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAdaptive {
    min_errors: u64,
    max_trials: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    iter: Option<usize>,
    thre: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFeedback {
    b1: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSummary {
    targets: Option<Vec<f64>>,
    slope_window_db: Option<[f64; 2]>,
}

/// Line and column of byte `offset` in `text`.
fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |nl| before.len() - nl - 1) + 1;
    (line, column)
}

/// Where `key` is assigned inside `[section]`, or the section header, or the
/// start of the file.
fn locate(text: &str, section: &str, key: &str) -> (usize, usize) {
    let header = format!("[{section}]");
    let mut in_section = false;
    let mut header_pos = None;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim_start();
        if trimmed.starts_with('[') {
            in_section = trimmed.trim_end().starts_with(&header);
            if in_section {
                header_pos = Some(offset + line.len() - trimmed.len());
            }
        } else if in_section {
            let rest = trimmed.strip_prefix(key).or_else(|| {
                trimmed.strip_prefix(&format!("\"{key}\"")).or_else(|| trimmed.strip_prefix(&format!("'{key}'")))
            });
            if rest.is_some_and(|r| r.trim_start().starts_with('=')) {
                return position(text, offset + line.len() - trimmed.len());
            }
        }
        offset += line.len();
    }
    header_pos.map_or((1, 1), |p| position(text, p))
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn fail(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        let (line, column) = locate(self.text, section, key);
        ConfigError { line, column, message: message.into() }
    }

    fn ensure(&self, ok: bool, section: &str, key: &str, message: &str) -> Result<(), ConfigError> {
        if ok {
            Ok(())
        } else {
            Err(self.fail(section, key, message))
        }
    }
}

/// Power points `start, start + step, …` up to `stop` inclusive.
pub fn sweep_points(start_db: f64, stop_db: f64, step_db: f64) -> Vec<f64> {
    let count = ((stop_db - start_db) / step_db + 1e-9).floor() as usize + 1;
    (0..count).map(|k| start_db + k as f64 * step_db).collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: Raw = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| position(text, s.start));
            ConfigError { line, column, message: e.message().trim().to_string() }
        })?;
        let check = Checker { text };
        let ex = &raw.experiment;

        check.ensure(!ex.schemes.is_empty(), "experiment", "schemes", "at least one scheme is required")?;
        let mut schemes = Vec::with_capacity(ex.schemes.len());
        for name in &ex.schemes {
            let scheme: Scheme = name.parse().map_err(|_| {
                let known: Vec<&str> = Scheme::ALL.iter().map(|s| s.label()).collect();
                check.fail(
                    "experiment",
                    "schemes",
                    format!("unknown scheme `{name}` (expected one of {})", known.join(", ")),
                )
            })?;
            if schemes.contains(&scheme) {
                return Err(check.fail("experiment", "schemes", format!("scheme `{name}` listed twice")));
            }
            schemes.push(scheme);
        }

        let exponent = ex.path_loss_exponent.unwrap_or(2.0);
        let relay_count = ex.relay_count.or_else(|| ex.links.as_ref().map(Vec::len));
        let relay_count =
            relay_count.ok_or_else(|| check.fail("experiment", "relay_count", "relay_count is required"))?;
        let mut topology = match ex.topology.as_str() {
            "unit" => Topology::unit_variance(relay_count),
            "triangle" => Topology::triangle(relay_count, exponent),
            "line" => Topology::line(relay_count, exponent),
            "random-disk" => Topology::random_disk(relay_count, ex.disk_radius.unwrap_or(0.5), exponent),
            "explicit" => {
                let links = ex
                    .links
                    .as_ref()
                    .ok_or_else(|| check.fail("experiment", "links", "explicit topology needs `links`"))?;
                check.ensure(
                    links.len() == relay_count,
                    "experiment",
                    "links",
                    "one [d_tx, d_rx] pair per relay is required",
                )?;
                let pairs = links.iter().map(|l| (l[0], l[1])).collect();
                Topology::explicit(pairs, ex.tx_rx_distance.unwrap_or(2.0), exponent)
            }
            other => {
                return Err(check.fail(
                    "experiment",
                    "topology",
                    format!("unknown topology `{other}` (expected unit, triangle, line, random-disk or explicit)"),
                ))
            }
        };
        if let Some(d) = ex.tx_rx_distance {
            topology.tx_rx_distance = d;
        }
        topology.validate().map_err(|e| check.fail("experiment", "topology", e.to_string()))?;

        check.ensure(ex.trials > 0, "experiment", "trials", "trials must be positive")?;
        check.ensure(ex.trials <= u64::from(u32::MAX), "experiment", "trials", "trials must fit in 32 bits")?;
        if let Some(w) = ex.workers {
            check.ensure(w > 0, "experiment", "workers", "workers must be positive")?;
        }

        let sw = &raw.sweep;
        check.ensure(sw.step_db > 0.0 && sw.step_db.is_finite(), "sweep", "step_db", "step_db must be positive")?;
        check.ensure(sw.start_db.is_finite(), "sweep", "start_db", "start_db must be finite")?;
        check.ensure(
            sw.stop_db.is_finite() && sw.stop_db >= sw.start_db,
            "sweep",
            "stop_db",
            "stop_db must not be below start_db",
        )?;
        let powers_db = sweep_points(sw.start_db, sw.stop_db, sw.step_db);

        let mut relay_ratios = vec![1.0; relay_count];
        for (key, &ratio) in &raw.relay_power_ratio {
            let index: usize = key.parse().ok().filter(|i| (1..=relay_count).contains(i)).ok_or_else(|| {
                check.fail("relay_power_ratio", key, format!("relay `{key}` is not in 1..={relay_count}"))
            })?;
            check.ensure(ratio > 0.0 && ratio.is_finite(), "relay_power_ratio", key, "power ratio must be positive")?;
            relay_ratios[index - 1] = ratio;
        }

        let adaptive = match &raw.adaptive {
            Some(a) => {
                check.ensure(a.min_errors > 0, "adaptive", "min_errors", "min_errors must be positive")?;
                check.ensure(
                    a.max_trials >= ex.trials && a.max_trials <= u64::from(u32::MAX),
                    "adaptive",
                    "max_trials",
                    "max_trials must lie between trials and 2^32 - 1",
                )?;
                Some(Adaptive { min_errors: a.min_errors, max_trials: a.max_trials })
            }
            None => None,
        };

        let mut control = IterationControl::default();
        if let Some(s) = &raw.solver {
            if let Some(iter) = s.iter {
                check.ensure(iter >= 1, "solver", "iter", "iter must be at least 1")?;
                control.iter = iter;
            }
            if let Some(thre) = s.thre {
                check.ensure(thre > 0.0 && thre.is_finite(), "solver", "thre", "thre must be positive")?;
                control.thre = thre;
            }
        }

        let b1 = match &raw.feedback {
            Some(f) => {
                check.ensure((1..=64).contains(&f.b1), "feedback", "b1", "b1 must lie in 1..=64")?;
                Some(f.b1)
            }
            None => None,
        };

        let output_dir = raw.output.map_or_else(|| PathBuf::from("out"), |o| o.dir);

        let (targets, slope_window_db) = match &raw.summary {
            Some(s) => {
                let targets = s.targets.clone().unwrap_or_else(|| vec![1e-2, 1e-3]);
                check.ensure(
                    targets.iter().all(|t| *t > 0.0 && *t < 1.0),
                    "summary",
                    "targets",
                    "targets must lie in (0, 1)",
                )?;
                let window = s.slope_window_db.unwrap_or([20.0, 30.0]);
                check.ensure(window[0] < window[1], "summary", "slope_window_db", "window must be increasing")?;
                (targets, (window[0], window[1]))
            }
            None => (vec![1e-2, 1e-3], (20.0, 30.0)),
        };

        Ok(Self {
            schemes,
            topology,
            powers_db,
            relay_ratios,
            trials: ex.trials,
            adaptive,
            seed: ex.seed,
            workers: ex.workers,
            control,
            b1,
            output_dir,
            targets,
            slope_window_db,
        })
    }
}
