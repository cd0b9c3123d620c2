//! Experiment configuration.
//!
//! Configs are TOML documents. Validation walks the whole document and
//! collects every problem, each tagged with its key path and, where the key
//! appears in the source, its line number. See the README for the grammar.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use toml::{Table, Value};

use crate::baselines::KernelKind;
use crate::error::{Error, Result};
use crate::evaluation::RateFamily;
use crate::modes::{EpsTilde, MIN_ALPHA};
use crate::seeds;
use crate::sphere::{random_unit, UnitVector};
use crate::vmf::{mean_pair, VmfComponent, VmfMixture};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    DensityExperiment,
    ModeSingle,
    ModeMulti,
    Diagnostics,
    Rate,
}

impl Task {
    pub const ALL: [Task; 5] = [
        Task::DensityExperiment,
        Task::ModeSingle,
        Task::ModeMulti,
        Task::Diagnostics,
        Task::Rate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::DensityExperiment => "density-experiment",
            Task::ModeSingle => "mode-single",
            Task::ModeMulti => "mode-multi",
            Task::Diagnostics => "diagnostics",
            Task::Rate => "rate",
        }
    }

    fn parse(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Estimators {
    pub eas: bool,
    pub knnde: bool,
    pub kde: bool,
}

impl Estimators {
    pub fn any(&self) -> bool {
        self.eas || self.knnde || self.kde
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSpec {
    pub kappa: f64,
    /// Mean direction; drawn from the `means` seed stream when absent.
    pub mu: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureSpec {
    pub components: Vec<ComponentSpec>,
    pub weights: Vec<f64>,
    /// Angle in radians between two randomly placed means.
    pub mean_angle: Option<f64>,
}

impl MixtureSpec {
    /// Resolves missing means from `seed` and builds the mixture.
    pub fn build(&self, d: usize, seed: u64) -> Result<VmfMixture> {
        let mut mus: Vec<Option<UnitVector>> = self
            .components
            .iter()
            .map(|c| c.mu.clone().map(UnitVector::new).transpose())
            .collect::<Result<_>>()?;
        if let Some(angle) = self.mean_angle {
            let (a, b) = mean_pair(d, angle, &mut seeds::stream(seed, "means", 0))?;
            mus[0] = Some(a);
            mus[1] = Some(b);
        }
        let components = mus
            .into_iter()
            .zip(&self.components)
            .enumerate()
            .map(|(i, (mu, c))| {
                let mu = match mu {
                    Some(mu) => mu,
                    None => random_unit(d, &mut seeds::stream(seed, "means", 1 + i as u64)),
                };
                VmfComponent::new(mu, c.kappa)
            })
            .collect::<Result<Vec<_>>>()?;
        VmfMixture::new(components, self.weights.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub d: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    /// Density and rate tasks repeat over this many derived seeds.
    pub trials: usize,
    /// Ratios `m / d`; each is rounded to an integer `m`.
    pub expansion_factors: Vec<f64>,
    pub estimators: Estimators,
    pub kde_kernel: KernelKind,
    /// Expansion size for mode and diagnostics tasks.
    pub m: Option<usize>,
    /// Fixed sparsity; the validation grid is searched when absent.
    pub k: Option<usize>,
    pub mixture: Option<MixtureSpec>,
    pub k_graph: Option<usize>,
    pub alpha: f64,
    pub eps_tilde: EpsTilde,
    pub probes: usize,
    pub regions: usize,
    pub rate_family: RateFamily,
    pub n_grid: Vec<usize>,
    pub save_models: bool,
    /// Fill the `fit_ms`/`eval_ms` CSV columns. Off by default so that
    /// reruns produce byte-identical CSVs.
    pub record_timings: bool,
}

impl ExperimentConfig {
    /// `m` for an expansion factor.
    pub fn expansion_size(&self, factor: f64) -> usize {
        ((factor * self.d as f64).round() as usize).max(1)
    }

    pub fn mixture(&self, seed: u64) -> Result<VmfMixture> {
        self.mixture
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("the task needs a [mixture] section".into()))?
            .build(self.d, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.path, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl ConfigErrors {
    pub fn iter(&self) -> impl Iterator<Item = &ConfigError> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn paths(&self) -> Vec<&str> {
        self.0.iter().map(|e| e.path.as_str()).collect()
    }
}

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const TOP_KEYS: &[&str] = &[
    "task",
    "d",
    "seed",
    "output_dir",
    "n_train",
    "n_val",
    "n_test",
    "trials",
    "expansion_factors",
    "estimators",
    "kde_kernel",
    "m",
    "k",
    "save_models",
    "record_timings",
    "mixture",
    "modes",
    "diagnostics",
    "rate",
];
const REQUIRED: &[&str] = &["task", "d", "seed", "output_dir"];
const MIXTURE_KEYS: &[&str] = &["components", "weights", "mean_angle"];
const COMPONENT_KEYS: &[&str] = &["kappa", "mu"];
const MODES_KEYS: &[&str] = &["k_graph", "alpha", "eps_tilde"];
const DIAGNOSTICS_KEYS: &[&str] = &["probes", "regions"];
const RATE_KEYS: &[&str] = &["family", "n_grid"];
const ESTIMATOR_NAMES: &[&str] = &["eas", "knnde", "kde"];
const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Parses and validates a config document.
pub fn validate_config(text: &str) -> std::result::Result<ExperimentConfig, ConfigErrors> {
    validate_config_with(text, &[])
}

/// As [`validate_config`], with `key = value` overrides merged on top.
/// Override keys may be dotted (`modes.alpha = 2.0`).
pub fn validate_config_with(
    text: &str,
    overrides: &[String],
) -> std::result::Result<ExperimentConfig, ConfigErrors> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e.span().map(|s| line_at(text, s.start));
        ConfigErrors(vec![ConfigError {
            path: "<document>".into(),
            line,
            message: e.message().to_string(),
        }])
    })?;
    let mut errors = Vec::new();
    for o in overrides {
        match parse_override(o) {
            Ok(patch) => merge(&mut table, patch),
            Err(message) => errors.push(ConfigError {
                path: o.clone(),
                line: None,
                message,
            }),
        }
    }
    let mut v = Validator {
        text,
        errors,
    };
    let config = v.config(&table);
    if v.errors.is_empty() {
        Ok(config.expect("a config is produced whenever no errors were recorded"))
    } else {
        Err(ConfigErrors(v.errors))
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &std::path::Path, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    validate_config_with(&text, overrides).map_err(Error::Config)
}

fn parse_override(o: &str) -> std::result::Result<Table, String> {
    let (key, value) = o
        .split_once('=')
        .ok_or_else(|| "override must have the form key=value".to_string())?;
    let (key, value) = (key.trim(), value.trim());
    format!("{key} = {value}")
        .parse::<Table>()
        .or_else(|_| format!("{key} = {}", Value::String(value.to_string())).parse::<Table>())
        .map_err(|e| e.message().to_string())
}

fn merge(base: &mut Table, patch: Table) {
    for (k, v) in patch {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(p)) => merge(b, p),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Validator<'a> {
    text: &'a str,
    errors: Vec<ConfigError>,
}

impl Validator<'_> {
    /// Line of `key` inside `section` ("" for the top level), found by a
    /// scan of the source text.
    fn line_of(&self, section: &str, key: &str) -> Option<usize> {
        let mut current = String::new();
        for (i, raw) in self.text.lines().enumerate() {
            let line = raw.trim();
            if let Some(header) = line.strip_prefix('[') {
                current = header.trim_matches(|c| c == '[' || c == ']').trim().to_string();
                if section.is_empty() {
                    continue;
                }
                if current == format!("{section}.{key}") {
                    return Some(i + 1);
                }
                continue;
            }
            if current != section {
                continue;
            }
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
        if section.is_empty() {
            let header = format!("[{key}]");
            return self.text.lines().position(|l| l.trim() == header).map(|i| i + 1);
        }
        None
    }

    fn push(&mut self, path: &str, message: impl Into<String>) {
        let (section, key) = match path.rsplit_once('.') {
            Some((s, k)) => (s.split('[').next().unwrap_or(s), k),
            None => ("", path),
        };
        let line = self.line_of(section, key);
        self.errors.push(ConfigError {
            path: path.to_string(),
            line,
            message: message.into(),
        });
    }

    fn unknown_keys(&mut self, table: &Table, allowed: &[&str], prefix: &str) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                self.push(&path, "unknown key");
            }
        }
    }

    fn section<'t>(&mut self, table: &'t Table, key: &str) -> Option<&'t Table> {
        match table.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.push(key, "expected a table");
                None
            }
        }
    }

    fn positive_int(&mut self, table: &Table, key: &str, path: &str) -> Option<Option<usize>> {
        match table.get(key) {
            None => Some(None),
            Some(Value::Integer(i)) if *i > 0 => Some(Some(*i as usize)),
            Some(Value::Integer(i)) => {
                self.push(path, format!("must be a positive integer, got {i}"));
                None
            }
            Some(_) => {
                self.push(path, "expected an integer");
                None
            }
        }
    }

    fn real(&mut self, table: &Table, key: &str, path: &str) -> Option<Option<f64>> {
        match table.get(key) {
            None => Some(None),
            Some(Value::Float(x)) if x.is_finite() => Some(Some(*x)),
            Some(Value::Integer(i)) => Some(Some(*i as f64)),
            Some(_) => {
                self.push(path, "expected a finite number");
                None
            }
        }
    }

    fn real_list(&mut self, value: &Value, path: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = value else {
            self.push(path, "expected an array of numbers");
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Value::Float(x) if x.is_finite() => out.push(*x),
                Value::Integer(i) => out.push(*i as f64),
                _ => {
                    self.push(path, "expected an array of numbers");
                    return None;
                }
            }
        }
        Some(out)
    }

    fn boolean(&mut self, table: &Table, key: &str) -> bool {
        match table.get(key) {
            None => false,
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                self.push(key, "expected true or false");
                false
            }
        }
    }

    fn config(&mut self, t: &Table) -> Option<ExperimentConfig> {
        self.unknown_keys(t, TOP_KEYS, "");
        for key in REQUIRED {
            if !t.contains_key(*key) {
                self.push(key, "required key is missing");
            }
        }

        let task = match t.get("task") {
            None => None,
            Some(Value::String(s)) => match Task::parse(s) {
                Some(task) => Some(task),
                None => {
                    let names: Vec<_> = Task::ALL.iter().map(|t| t.as_str()).collect();
                    self.push("task", format!("unknown task {s:?}; expected one of {}", names.join(", ")));
                    None
                }
            },
            Some(_) => {
                self.push("task", "expected a string");
                None
            }
        };
        if !t.contains_key("mixture") && task != Some(Task::Diagnostics) {
            self.push("mixture", "required key is missing (every task but diagnostics samples from a mixture)");
        }

        let d = match t.get("d") {
            None => None,
            Some(Value::Integer(d)) if *d >= 2 => Some(*d as usize),
            Some(Value::Integer(d)) => {
                self.push("d", format!("must be at least 2, got {d}"));
                None
            }
            Some(_) => {
                self.push("d", "expected an integer");
                None
            }
        };
        let seed = match t.get("seed") {
            None => None,
            Some(Value::Integer(s)) if *s >= 0 => Some(*s as u64),
            Some(_) => {
                self.push("seed", "expected a nonnegative integer");
                None
            }
        };
        let output_dir = match t.get("output_dir") {
            None => None,
            Some(Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
            Some(_) => {
                self.push("output_dir", "expected a nonempty path string");
                None
            }
        };

        let n_train = self.positive_int(t, "n_train", "n_train").map(|v| v.unwrap_or(10_000));
        let n_val = self.positive_int(t, "n_val", "n_val").map(|v| v.unwrap_or(2_000));
        let n_test = self.positive_int(t, "n_test", "n_test").map(|v| v.unwrap_or(10_000));
        let default_trials = if task == Some(Task::Rate) { 5 } else { 1 };
        let trials = self.positive_int(t, "trials", "trials").map(|v| v.unwrap_or(default_trials));
        let m = self.positive_int(t, "m", "m");
        let k = self.positive_int(t, "k", "k");

        let expansion_factors = match t.get("expansion_factors") {
            None => Some(vec![8.0, 32.0, 128.0, 512.0, 2048.0]),
            Some(v) => self.real_list(v, "expansion_factors").and_then(|efs| {
                if efs.is_empty() {
                    self.push("expansion_factors", "must list at least one factor");
                    None
                } else if let Some(bad) = efs.iter().find(|&&e| e < 1.0) {
                    self.push("expansion_factors", format!("factors must be >= 1, got {bad}"));
                    None
                } else {
                    Some(efs)
                }
            }),
        };

        let estimators = match t.get("estimators") {
            None => Some(Estimators { eas: true, knnde: true, kde: true }),
            Some(Value::Array(items)) => {
                let mut est = Estimators::default();
                let mut ok = true;
                for item in items {
                    match item.as_str() {
                        Some("eas") => est.eas = true,
                        Some("knnde") => est.knnde = true,
                        Some("kde") => est.kde = true,
                        _ => {
                            self.push(
                                "estimators",
                                format!("unknown estimator {item}; expected any of {}", ESTIMATOR_NAMES.join(", ")),
                            );
                            ok = false;
                        }
                    }
                }
                if ok && !est.any() && task == Some(Task::DensityExperiment) {
                    self.push("estimators", "at least one estimator must be enabled");
                    ok = false;
                }
                ok.then_some(est)
            }
            Some(_) => {
                self.push("estimators", "expected an array of estimator names");
                None
            }
        };

        let kde_kernel = match t.get("kde_kernel") {
            None => Some(KernelKind::Vmf),
            Some(Value::String(s)) => match s.parse::<KernelKind>() {
                Ok(kind) => Some(kind),
                Err(e) => {
                    self.push("kde_kernel", e.to_string());
                    None
                }
            },
            Some(_) => {
                self.push("kde_kernel", "expected a string");
                None
            }
        };

        let save_models = self.boolean(t, "save_models");
        let record_timings = self.boolean(t, "record_timings");

        let mixture = self.section(t, "mixture").map(|s| self.mixture(s, d));
        let mixture = match mixture {
            None => Some(None),
            Some(None) => None,
            Some(Some(spec)) => Some(Some(spec)),
        };

        let modes = self.section(t, "modes").cloned().unwrap_or_default();
        self.unknown_keys(&modes, MODES_KEYS, "modes");
        let k_graph = self.positive_int(&modes, "k_graph", "modes.k_graph");
        let alpha = self.real(&modes, "alpha", "modes.alpha").and_then(|a| {
            let a = a.unwrap_or(MIN_ALPHA);
            if a < MIN_ALPHA {
                self.push("modes.alpha", format!("must be at least sqrt(2), got {a}"));
                None
            } else {
                Some(a)
            }
        });
        let eps_tilde = match modes.get("eps_tilde") {
            None => Some(EpsTilde::Auto),
            Some(Value::String(s)) if s == "auto" => Some(EpsTilde::Auto),
            Some(v) => match v.as_float().or_else(|| v.as_integer().map(|i| i as f64)) {
                Some(e) if e >= 0.0 && e.is_finite() => Some(EpsTilde::Fixed(e)),
                _ => {
                    self.push("modes.eps_tilde", "expected \"auto\" or a nonnegative number");
                    None
                }
            },
        };

        let diagnostics = self.section(t, "diagnostics").cloned().unwrap_or_default();
        self.unknown_keys(&diagnostics, DIAGNOSTICS_KEYS, "diagnostics");
        let probes = self
            .positive_int(&diagnostics, "probes", "diagnostics.probes")
            .map(|v| v.unwrap_or(200_000));
        let regions = self
            .positive_int(&diagnostics, "regions", "diagnostics.regions")
            .map(|v| v.unwrap_or(100));

        let rate = self.section(t, "rate").cloned().unwrap_or_default();
        self.unknown_keys(&rate, RATE_KEYS, "rate");
        let rate_family = match rate.get("family") {
            None => Some(RateFamily::Density),
            Some(Value::String(s)) if s == "density" => Some(RateFamily::Density),
            Some(Value::String(s)) if s == "mode" => Some(RateFamily::Mode),
            Some(_) => {
                self.push("rate.family", "expected \"density\" or \"mode\"");
                None
            }
        };
        let n_grid = match rate.get("n_grid") {
            None => Some(vec![1_000, 4_000, 16_000, 64_000]),
            Some(v) => self.real_list(v, "rate.n_grid").and_then(|ns| {
                let ints: Vec<usize> = ns.iter().map(|&n| n as usize).collect();
                let valid = ns.iter().all(|&n| n >= 2.0 && n.fract() == 0.0)
                    && ints.windows(2).all(|w| w[0] < w[1])
                    && ints.len() >= 2;
                if valid {
                    Some(ints)
                } else {
                    self.push("rate.n_grid", "expected at least two strictly increasing integers >= 2");
                    None
                }
            }),
        };

        match task {
            Some(Task::Diagnostics) => {
                if m.flatten().is_none() && m.is_some() {
                    self.push("m", "required for the diagnostics task");
                }
                if k.flatten().is_none() && k.is_some() {
                    self.push("k", "required for the diagnostics task");
                }
            }
            Some(Task::Rate) => {
                if let Some(tr) = trials {
                    if tr < 3 {
                        self.push("trials", format!("rate experiments need at least 3 trials, got {tr}"));
                    }
                }
            }
            Some(Task::DensityExperiment) => {
                if let (Some(est), Some(n)) = (estimators, n_train) {
                    if est.knnde && n < 2 {
                        self.push("n_train", "kNN selection needs at least 2 training points");
                    }
                }
            }
            _ => {}
        }
        if let (Some(Some(k)), Some(Some(m))) = (k, m) {
            if k > m {
                self.push("k", format!("sparsity {k} exceeds the expansion size m = {m}"));
            }
        }
        if let (Some(Some(kg)), Some(n)) = (k_graph, n_train) {
            if kg >= n {
                self.push("modes.k_graph", format!("must be below n_train = {n}"));
            }
        }

        if !self.errors.is_empty() {
            return None;
        }
        Some(ExperimentConfig {
            task: task?,
            d: d?,
            seed: seed?,
            output_dir: output_dir?,
            n_train: n_train?,
            n_val: n_val?,
            n_test: n_test?,
            trials: trials?,
            expansion_factors: expansion_factors?,
            estimators: estimators?,
            kde_kernel: kde_kernel?,
            m: m?,
            k: k?,
            mixture: mixture?,
            k_graph: k_graph?,
            alpha: alpha?,
            eps_tilde: eps_tilde?,
            probes: probes?,
            regions: regions?,
            rate_family: rate_family?,
            n_grid: n_grid?,
            save_models,
            record_timings,
        })
    }

    fn mixture(&mut self, t: &Table, d: Option<usize>) -> Option<MixtureSpec> {
        let before = self.errors.len();
        self.unknown_keys(t, MIXTURE_KEYS, "mixture");
        let mut components = Vec::new();
        match t.get("components") {
            None => self.push("mixture.components", "required key is missing"),
            Some(Value::Array(items)) if !items.is_empty() => {
                for (i, item) in items.iter().enumerate() {
                    let path = format!("mixture.components[{i}]");
                    let Value::Table(c) = item else {
                        self.push(&path, "expected a table with kappa and optional mu");
                        continue;
                    };
                    self.unknown_keys(c, COMPONENT_KEYS, &path);
                    let kappa = match self.real(c, "kappa", &format!("{path}.kappa")) {
                        Some(Some(k)) if k > 0.0 => Some(k),
                        Some(Some(k)) => {
                            self.push(&format!("{path}.kappa"), format!("must be positive, got {k}"));
                            None
                        }
                        Some(None) => {
                            self.push(&format!("{path}.kappa"), "required key is missing");
                            None
                        }
                        None => None,
                    };
                    let mu = match c.get("mu") {
                        None => None,
                        Some(v) => self.real_list(v, &format!("{path}.mu")).and_then(|mu| {
                            if let Some(d) = d {
                                if mu.len() != d {
                                    self.push(&format!("{path}.mu"), format!("expected {d} coordinates, got {}", mu.len()));
                                    return None;
                                }
                            }
                            match UnitVector::new(mu.clone()) {
                                Ok(_) => Some(mu),
                                Err(e) => {
                                    self.push(&format!("{path}.mu"), e.to_string());
                                    None
                                }
                            }
                        }),
                    };
                    if let Some(kappa) = kappa {
                        components.push(ComponentSpec { kappa, mu });
                    }
                }
            }
            Some(_) => self.push("mixture.components", "expected a nonempty array of tables"),
        }

        let weights = match t.get("weights") {
            None if components.len() <= 1 => Some(vec![1.0]),
            None => {
                self.push("mixture.weights", "required when the mixture has several components");
                None
            }
            Some(v) => self.real_list(v, "mixture.weights").and_then(|w| {
                let sum: f64 = w.iter().sum();
                if w.iter().any(|&x| x <= 0.0) {
                    self.push("mixture.weights", "weights must be positive");
                    None
                } else if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
                    self.push("mixture.weights", format!("weights sum to {sum}, but a mixture must be normalized to 1"));
                    None
                } else {
                    Some(w)
                }
            }),
        };
        if let (Some(w), Some(Value::Array(items))) = (&weights, t.get("components")) {
            if w.len() != items.len() {
                self.push(
                    "mixture.weights",
                    format!("{} weights for {} components", w.len(), items.len()),
                );
            }
        }

        let mean_angle = match self.real(t, "mean_angle", "mixture.mean_angle") {
            Some(Some(a)) => {
                let free: BTreeSet<usize> = components
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.mu.is_none())
                    .map(|(i, _)| i)
                    .collect();
                if !(0.0..=std::f64::consts::PI).contains(&a) {
                    self.push("mixture.mean_angle", format!("must lie in [0, pi], got {a}"));
                } else if components.len() != 2 || free.len() != 2 {
                    self.push("mixture.mean_angle", "needs exactly two components without mu");
                }
                Some(a)
            }
            _ => None,
        };

        (self.errors.len() == before).then(|| MixtureSpec {
            components,
            weights: weights.unwrap_or_default(),
            mean_angle,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
task = "density-experiment"
d = 3
seed = 7
output_dir = "out"
n_train = 100
n_val = 100
n_test = 100
expansion_factors = [8]
estimators = ["eas"]

[mixture]
components = [{ kappa = 10.0 }]
"#;

    #[test]
    fn minimal_config_resolves_defaults() {
        let c = validate_config(MINIMAL).unwrap();
        assert_eq!(c.task, Task::DensityExperiment);
        assert_eq!((c.n_train, c.n_val, c.n_test), (100, 100, 100));
        assert_eq!(c.estimators, Estimators { eas: true, knnde: false, kde: false });
        assert_eq!(c.alpha, MIN_ALPHA);
        assert_eq!(c.eps_tilde, EpsTilde::Auto);
        assert_eq!(c.trials, 1);
        assert_eq!(c.expansion_size(8.0), 24);
    }

    #[test]
    fn protocol_sizes_are_the_defaults() {
        let text = MINIMAL.replace("n_train = 100\nn_val = 100\nn_test = 100\n", "");
        let c = validate_config(&text).unwrap();
        assert_eq!((c.n_train, c.n_val, c.n_test), (10_000, 2_000, 10_000));
    }

    #[test]
    fn empty_input_lists_every_required_key() {
        let errs = validate_config("").unwrap_err();
        let paths = errs.paths();
        for key in ["task", "d", "seed", "output_dir", "mixture"] {
            assert!(paths.contains(&key), "{key} missing from {paths:?}");
        }
    }

    #[test]
    fn negative_size_is_one_error_with_a_line() {
        let text = MINIMAL.replace("n_train = 100", "n_train = -5");
        let errs = validate_config(&text).unwrap_err();
        assert_eq!(errs.len(), 1, "{errs}");
        assert_eq!(errs.0[0].path, "n_train");
        assert_eq!(errs.0[0].line, Some(6));
    }

    #[test]
    fn unnormalized_weights_are_reported() {
        let text = MINIMAL.replace(
            "components = [{ kappa = 10.0 }]",
            "components = [{ kappa = 10.0 }, { kappa = 5.0 }]\nweights = [0.3, 0.6]",
        );
        let errs = validate_config(&text).unwrap_err();
        assert_eq!(errs.paths(), vec!["mixture.weights"]);
        assert!(errs.0[0].message.contains("normalized"));
    }

    #[test]
    fn errors_are_collected_not_fail_fast() {
        let text = MINIMAL
            .replace("d = 3", "d = 1")
            .replace("expansion_factors = [8]", "expansion_factors = [0.5]")
            .replace("seed = 7", "seed = 7\nbogus = 1");
        let errs = validate_config(&text).unwrap_err();
        let paths = errs.paths();
        assert!(paths.contains(&"d"));
        assert!(paths.contains(&"expansion_factors"));
        assert!(paths.contains(&"bogus"));
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let errs = validate_config("task = \"rate\"\nd = = 3\n").unwrap_err();
        assert_eq!(errs.0[0].line, Some(2));
    }

    #[test]
    fn overrides_replace_values() {
        let c = validate_config_with(
            MINIMAL,
            &["seed=99".into(), "modes.alpha=3.0".into(), "output_dir=elsewhere".into()],
        )
        .unwrap();
        assert_eq!(c.seed, 99);
        assert_eq!(c.alpha, 3.0);
        assert_eq!(c.output_dir, PathBuf::from("elsewhere"));
        assert!(validate_config_with(MINIMAL, &["modes.alpha=1.0".into()]).is_err());
    }

    #[test]
    fn mixture_with_mean_angle_builds_separated_means() {
        let text = MINIMAL.replace(
            "components = [{ kappa = 10.0 }]",
            "components = [{ kappa = 80.0 }, { kappa = 100.0 }]\nweights = [0.3, 0.7]\nmean_angle = 0.7853981633974483",
        );
        let c = validate_config(&text).unwrap();
        let mix = c.mixture(5).unwrap();
        let a = mix.components()[0].mu();
        let b = mix.components()[1].mu();
        assert!((a.dot(b) - std::f64::consts::FRAC_PI_4.cos()).abs() < 1e-12);
        let again = c.mixture(5).unwrap();
        assert_eq!(again.components()[0].mu(), a);
    }

    #[test]
    fn diagnostics_needs_no_mixture() {
        let text = "task = \"diagnostics\"\nd = 3\nseed = 1\noutput_dir = \"o\"\nm = 50\nk = 5\n";
        let c = validate_config(text).unwrap();
        assert_eq!((c.m, c.k), (Some(50), Some(5)));
        let errs = validate_config("task = \"diagnostics\"\nd = 3\nseed = 1\noutput_dir = \"o\"\nm = 5\nk = 9\n").unwrap_err();
        assert_eq!(errs.paths(), vec!["k"]);
    }

    #[test]
    fn rate_needs_three_trials() {
        let text = MINIMAL.replace("\"density-experiment\"", "\"rate\"") + "";
        let text = text.replace("seed = 7", "seed = 7\ntrials = 2");
        assert_eq!(validate_config(&text).unwrap_err().paths(), vec!["trials"]);
    }
}
