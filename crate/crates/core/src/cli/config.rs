//! Run configuration files.
//!
//! A config is a TOML file with one table per concern:
//!
//! ```toml
//! [run]
//! command = "run-adaptive"
//! seed = 7
//! output_dir = "out/beta"
//!
//! [target]
//! name = "transformed-beta"
//!
//! [regeneration]
//! mean = 0.5
//! sd = 1.0
//!
//! [adaptive]
//! n_bar = 0.5
//! a = 1000.0
//! lambda0 = 10.0
//! burn_in = 5e5
//! time = 1e5
//! ```
//!
//! Unknown keys are rejected and every numeric field is range-checked;
//! errors name the offending key and, where it can be found, its line.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    RunStandard,
    RunAdaptive,
    RunMinimalDemo,
    RunRwm,
    EstimateZ,
    RateQuantiles,
    Guidance,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::RunStandard,
        Command::RunAdaptive,
        Command::RunMinimalDemo,
        Command::RunRwm,
        Command::EstimateZ,
        Command::RateQuantiles,
        Command::Guidance,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::RunStandard => "run-standard",
            Command::RunAdaptive => "run-adaptive",
            Command::RunMinimalDemo => "run-minimal-demo",
            Command::RunRwm => "run-rwm",
            Command::EstimateZ => "estimate-z",
            Command::RateQuantiles => "rate-quantiles",
            Command::Guidance => "guidance",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

/// A scalar applied to every coordinate, or one value per coordinate.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrVec {
    Scalar(f64),
    Vec(Vec<f64>),
}

impl ScalarOrVec {
    pub fn expand(&self, dim: usize) -> Vec<f64> {
        match self {
            ScalarOrVec::Scalar(v) => vec![*v; dim],
            ScalarOrVec::Vec(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Record the event log (`events.csv`); on by default.
    pub events: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetName {
    StdGaussian,
    Gaussian,
    TransformedBeta,
    MultivariateT,
    GaussianMixture,
    Pump,
    Lgcp,
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub name: TargetName,
    pub dim: Option<usize>,
    pub mean: Option<ScalarOrVec>,
    /// Covariance (Gaussian) or scale matrix (multivariate t), as rows.
    pub cov: Option<Vec<Vec<f64>>>,
    pub nu: Option<f64>,
    /// Multiplies the density by a constant; changes the normalizing constant only.
    pub scale: Option<f64>,
    /// Logistic regression data CSV, relative to the config file.
    pub data: Option<PathBuf>,
    pub prior_variance: Option<f64>,
    /// Logistic: generate this many synthetic rows instead of reading `data`.
    pub synthetic_rows: Option<usize>,
    /// Seed for simulated data (logistic synthetic rows, LGCP counts).
    pub data_seed: Option<u64>,
    /// LGCP grid side length.
    pub grid: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TransformSection {
    #[serde(default)]
    pub laplace: bool,
    /// Frozen map to load instead of computing one.
    pub map: Option<PathBuf>,
    /// Starting point for the mode search.
    pub init: Option<ScalarOrVec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegenerationSection {
    #[serde(default = "zero")]
    pub mean: ScalarOrVec,
    #[serde(default = "one")]
    pub sd: ScalarOrVec,
}

impl Default for RegenerationSection {
    fn default() -> Self {
        Self { mean: zero(), sd: one() }
    }
}

fn zero() -> ScalarOrVec {
    ScalarOrVec::Scalar(0.0)
}

fn one() -> ScalarOrVec {
    ScalarOrVec::Scalar(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RateKind {
    #[default]
    Full,
    Minimal,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct StandardSection {
    #[serde(default)]
    pub rate: RateKind,
    pub c_tilde: Option<f64>,
    pub k_hat: Option<f64>,
    pub lambda0: Option<f64>,
    /// Output on an evenly spaced mesh instead of at Poisson times.
    pub mesh: Option<f64>,
    pub tours: Option<u64>,
    pub time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveSection {
    pub a: Option<f64>,
    pub k_plus_bar: Option<f64>,
    pub n_bar: Option<f64>,
    pub lambda0: Option<f64>,
    pub burn_in: Option<f64>,
    pub tours: Option<u64>,
    pub time: Option<f64>,
    pub freeze_after: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RwmSection {
    /// Proposal scale; tuned automatically when absent.
    pub scale: Option<f64>,
    pub steps: Option<usize>,
    pub thin: Option<usize>,
    pub burn_in_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct QuantilesSection {
    /// Multiplies the sample-based regeneration constant.
    pub safety_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GuidanceSection {
    pub d: Option<Vec<usize>>,
    pub eps: Option<Vec<f64>>,
}

/// A parsed and validated configuration file.
#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub run: RunSection,
    pub target: Option<TargetSection>,
    #[serde(default)]
    pub transform: TransformSection,
    #[serde(default)]
    pub regeneration: RegenerationSection,
    pub standard: Option<StandardSection>,
    pub adaptive: Option<AdaptiveSection>,
    pub rwm: Option<RwmSection>,
    pub quantiles: Option<QuantilesSection>,
    pub guidance: Option<GuidanceSection>,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
    #[serde(skip)]
    source: String,
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut spec = parse_config_str(&text)?;
    spec.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(spec)
}

pub fn parse_config_str(text: &str) -> Result<RunSpec> {
    let mut spec: RunSpec = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
        Error::Config {
            key: key_from_toml_error(e.message()),
            line,
            message: e.message().to_string(),
        }
    })?;
    spec.source = text.to_string();
    spec.validate()?;
    Ok(spec)
}

fn key_from_toml_error(message: &str) -> String {
    message
        .split('`')
        .nth(1)
        .map(str::to_string)
        .unwrap_or_else(|| "<document>".to_string())
}

impl RunSpec {
    /// Config error for `section.key`, with the key's line when it appears in the source.
    pub fn key_error(&self, section: &str, key: &str, message: impl Into<String>) -> Error {
        Error::Config {
            key: format!("{section}.{key}"),
            line: find_key_line(&self.source, section, key),
            message: message.into(),
        }
    }

    /// Re-tag an engine validation error with the config section it came from.
    pub fn attribute(&self, section: &str, err: Error) -> Error {
        match err {
            Error::InvalidParameter { name, message } => self.key_error(section, &name, message),
            other => other,
        }
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Apply a `section.key=value` (or bare `key=value` for the section of
    /// `command`) override, as given on the command line.
    pub fn apply_override(&mut self, command: Command, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| Error::Config {
            key: assignment.to_string(),
            line: None,
            message: "override must look like key=value".to_string(),
        })?;
        let (section, key) = match key.split_once('.') {
            Some((s, k)) => (s.to_string(), k.to_string()),
            None => (default_section(command).to_string(), key.to_string()),
        };
        let mut doc: toml::Table = toml::from_str(&self.source).unwrap_or_default();
        let parsed = parse_override_value(&section, &key, value);
        let table = doc
            .entry(section.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match table {
            toml::Value::Table(t) => {
                t.insert(key, parsed);
            }
            _ => {
                return Err(Error::Config {
                    key: section,
                    line: None,
                    message: "not a table".to_string(),
                })
            }
        }
        let text = toml::to_string(&doc).map_err(|e| Error::Config {
            key: "<override>".to_string(),
            line: None,
            message: e.to_string(),
        })?;
        let base = std::mem::take(&mut self.base_dir);
        *self = parse_config_str(&text)?;
        self.base_dir = base;
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if let Some(t) = &self.target {
            self.check_pos_opt("target", "nu", t.nu)?;
            self.check_pos_opt("target", "scale", t.scale)?;
            self.check_pos_opt("target", "prior_variance", t.prior_variance)?;
            if t.dim == Some(0) {
                return Err(self.key_error("target", "dim", "must be at least 1"));
            }
            if t.grid == Some(0) {
                return Err(self.key_error("target", "grid", "must be at least 1"));
            }
            if t.synthetic_rows == Some(0) {
                return Err(self.key_error("target", "synthetic_rows", "must be at least 1"));
            }
        }
        for (key, v) in [("mean", &self.regeneration.mean), ("sd", &self.regeneration.sd)] {
            let values = v.expand(1);
            if values.iter().any(|x| !x.is_finite()) || (key == "sd" && values.iter().any(|x| *x <= 0.0)) {
                return Err(self.key_error("regeneration", key, "must be finite (sd positive)"));
            }
        }
        if let Some(s) = &self.standard {
            self.check_pos_opt("standard", "c_tilde", s.c_tilde)?;
            self.check_pos_opt("standard", "k_hat", s.k_hat)?;
            self.check_pos_opt("standard", "lambda0", s.lambda0)?;
            self.check_pos_opt("standard", "mesh", s.mesh)?;
            self.check_pos_opt("standard", "time", s.time)?;
            if s.tours == Some(0) {
                return Err(self.key_error("standard", "tours", "must be at least 1"));
            }
            if s.tours.is_some() && s.time.is_some() {
                return Err(self.key_error("standard", "time", "give either `tours` or `time`, not both"));
            }
            if s.mesh.is_some() && s.lambda0.is_some() {
                return Err(self.key_error("standard", "mesh", "give either `lambda0` or `mesh`, not both"));
            }
        }
        if let Some(a) = &self.adaptive {
            self.check_pos_opt("adaptive", "a", a.a)?;
            self.check_pos_opt("adaptive", "k_plus_bar", a.k_plus_bar)?;
            self.check_pos_opt("adaptive", "n_bar", a.n_bar)?;
            self.check_pos_opt("adaptive", "lambda0", a.lambda0)?;
            self.check_pos_opt("adaptive", "time", a.time)?;
            self.check_nonneg_opt("adaptive", "burn_in", a.burn_in)?;
            self.check_nonneg_opt("adaptive", "freeze_after", a.freeze_after)?;
            if a.tours == Some(0) {
                return Err(self.key_error("adaptive", "tours", "must be at least 1"));
            }
            if a.tours.is_some() && a.time.is_some() {
                return Err(self.key_error("adaptive", "time", "give either `tours` or `time`, not both"));
            }
        }
        if let Some(r) = &self.rwm {
            self.check_pos_opt("rwm", "scale", r.scale)?;
            if r.thin == Some(0) {
                return Err(self.key_error("rwm", "thin", "must be at least 1"));
            }
            if r.steps == Some(0) {
                return Err(self.key_error("rwm", "steps", "must be at least 1"));
            }
        }
        if let Some(q) = &self.quantiles {
            if let Some(f) = q.safety_factor {
                if !(f >= 1.0 && f.is_finite()) {
                    return Err(self.key_error("quantiles", "safety_factor", "must be at least 1"));
                }
            }
        }
        if let Some(g) = &self.guidance {
            if let Some(d) = &g.d {
                if d.is_empty() || d.contains(&0) {
                    return Err(self.key_error("guidance", "d", "dimensions must be positive"));
                }
            }
            if let Some(eps) = &g.eps {
                if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
                    return Err(self.key_error("guidance", "eps", "levels must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }

    fn check_pos_opt(&self, section: &str, key: &str, v: Option<f64>) -> Result<()> {
        match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(self.key_error(section, key, "must be positive and finite")),
            _ => Ok(()),
        }
    }

    fn check_nonneg_opt(&self, section: &str, key: &str, v: Option<f64>) -> Result<()> {
        match v {
            Some(x) if !(x >= 0.0 && x.is_finite()) => Err(self.key_error(section, key, "must be nonnegative and finite")),
            _ => Ok(()),
        }
    }
}

fn default_section(command: Command) -> &'static str {
    match command {
        Command::RunStandard | Command::RunMinimalDemo | Command::EstimateZ => "standard",
        Command::RunAdaptive => "adaptive",
        Command::RunRwm | Command::RateQuantiles => "rwm",
        Command::Guidance => "guidance",
    }
}

fn parse_override_value(section: &str, key: &str, value: &str) -> toml::Value {
    let list_keys = section == "guidance";
    let scalar = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    if list_keys && !matches!(scalar, toml::Value::Array(_)) {
        let _ = key;
        return toml::Value::Array(vec![scalar]);
    }
    scalar
}

/// 1-based line of `key = ...` inside `[section]`.
fn find_key_line(source: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in source.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = trimmed.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}
