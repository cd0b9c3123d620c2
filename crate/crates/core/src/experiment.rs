//! Seeded pipelines behind the `eas` binary and their on-disk artifacts.
//!
//! A run expands the config's base seed into one seed per trial,
//! `derive(seed, "trial", t)`, and each trial seed into named streams:
//! `means` (random component means), `train`, `val`, `test` (samples) and
//! `bank` (projection rows, indexed by expansion factor). Every number in
//! the CSVs is a function of the config alone. Wall times go to the manifest
//! and only reach the CSVs when `record_timings = true`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use crate::baselines::{KdeModel, KnnModel};
use crate::config::{ExperimentConfig, Task};
use crate::density::Density;
use crate::eas::{self, EasModel, ProjectionBank, RankedCodes, RegionReport};
use crate::error::{Error, Result};
use crate::evaluation::{
    best_pairing_error, etv, etv_from_values, rate_experiment, select_eas_k_full, select_kde_bandwidth,
    select_knn_k, selected, GridResult, RateTable,
};
use crate::modes::{argmax, auto_eps, knn_radii, recover_modes_from, EpsTilde, Mode, ModeSet};
use crate::seeds;
use crate::sphere::UnitVector;
use crate::vmf::VmfMixture;
use crate::{CSV_SCHEMA_VERSION, THREADS_ENV};

/// Sizes the global worker pool from `EAS_THREADS`; unset means one worker
/// per core. Returns the pool size.
pub fn init_threads() -> Result<usize> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
        // a pool that is already built keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrialSeeds {
    pub trial: u64,
    pub train: u64,
    pub val: u64,
    pub test: u64,
}

impl TrialSeeds {
    pub fn new(base: u64, t: usize) -> Self {
        let trial = seeds::derive(base, "trial", t as u64);
        TrialSeeds {
            trial,
            train: seeds::derive(trial, "train", 0),
            val: seeds::derive(trial, "val", 0),
            test: seeds::derive(trial, "test", 0),
        }
    }

    pub fn bank(&self, index: usize) -> u64 {
        seeds::derive(self.trial, "bank", index as u64)
    }
}

/// Train, validation and test samples of one trial.
pub struct Splits {
    pub mixture: VmfMixture,
    pub train: Vec<UnitVector>,
    pub val: Vec<UnitVector>,
    pub test: Vec<UnitVector>,
}

impl Splits {
    pub fn draw(config: &ExperimentConfig, s: &TrialSeeds) -> Result<Self> {
        let mixture = config.mixture(s.trial)?;
        Ok(Splits {
            train: mixture.sample(config.n_train, &mut seeds::rng(s.train)),
            val: mixture.sample(config.n_val, &mut seeds::rng(s.val)),
            test: mixture.sample(config.n_test, &mut seeds::rng(s.test)),
            mixture,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub estimator: &'static str,
    pub d: usize,
    pub expansion_factor: Option<f64>,
    pub m: Option<usize>,
    pub parameter: f64,
    pub n_train: usize,
    pub seed: u64,
    pub etv: f64,
    pub sup_error: f64,
    pub flagged: usize,
    pub fit_ms: f64,
    pub eval_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationRow {
    pub estimator: &'static str,
    pub expansion_factor: Option<f64>,
    pub seed: u64,
    pub candidate: GridResult,
}

pub struct DensityTrial {
    pub seeds: TrialSeeds,
    pub rows: Vec<ResultRow>,
    pub validation: Vec<ValidationRow>,
    /// Fitted EaS models by expansion factor.
    pub models: Vec<(f64, EasModel)>,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// One trial of the expansion-factor sweep: EaS at every factor plus the
/// enabled baselines, each tuned on the validation set and scored on the
/// test set.
pub fn density_trial(config: &ExperimentConfig, t: usize) -> Result<DensityTrial> {
    let s = TrialSeeds::new(config.seed, t);
    let data = Splits::draw(config, &s)?;
    let val_truth = data.mixture.density_batch(&data.val)?;
    let test_truth = data.mixture.density_batch(&data.test)?;
    let mut out = DensityTrial {
        seeds: s,
        rows: Vec::new(),
        validation: Vec::new(),
        models: Vec::new(),
    };
    let push = |out: &mut DensityTrial,
                    estimator: &'static str,
                    ef: Option<f64>,
                    m: Option<usize>,
                    parameter: f64,
                    est: Vec<f64>,
                    fit_ms: f64,
                    eval_ms: f64|
     -> Result<()> {
        let r = etv_from_values(&test_truth, &est)?;
        out.rows.push(ResultRow {
            estimator,
            d: config.d,
            expansion_factor: ef,
            m,
            parameter,
            n_train: config.n_train,
            seed: s.trial,
            etv: r.etv,
            sup_error: r.sup_error,
            flagged: r.flagged,
            fit_ms,
            eval_ms,
        });
        Ok(())
    };
    let record = |out: &mut DensityTrial, estimator, ef, grid: Vec<GridResult>| {
        out.validation.extend(grid.into_iter().map(|candidate| ValidationRow {
            estimator,
            expansion_factor: ef,
            seed: s.trial,
            candidate,
        }));
    };

    if config.estimators.eas {
        for (i, &ef) in config.expansion_factors.iter().enumerate() {
            let m = config.expansion_size(ef);
            let started = Instant::now();
            let bank = Arc::new(ProjectionBank::new(config.d, m, s.bank(i))?);
            let model = match config.k {
                Some(k) => eas::fit(bank, k, &data.train)?,
                None => {
                    let sel = select_eas_k_full(&bank, &data.train, &data.val, &val_truth)?;
                    record(&mut out, "eas", Some(ef), sel.grid);
                    sel.model
                }
            };
            let fit_ms = ms(started);
            let started = Instant::now();
            let est = model.evaluate_batch(&data.test)?;
            push(&mut out, "eas", Some(ef), Some(m), model.k() as f64, est, fit_ms, ms(started))?;
            out.models.push((ef, model));
        }
    }
    if config.estimators.knnde {
        let started = Instant::now();
        let grid = select_knn_k(&data.train, &data.val, &val_truth)?;
        let k = selected(&grid).parameter as usize;
        record(&mut out, "knnde", None, grid);
        let model = KnnModel::new(&data.train, k)?;
        let fit_ms = ms(started);
        let started = Instant::now();
        let est = model.density_batch(&data.test)?;
        push(&mut out, "knnde", None, None, k as f64, est, fit_ms, ms(started))?;
    }
    if config.estimators.kde {
        let started = Instant::now();
        let grid = select_kde_bandwidth(&data.train, &data.val, &val_truth, config.kde_kernel)?;
        let h = selected(&grid).parameter;
        record(&mut out, "kde", None, grid);
        let model = KdeModel::new(&data.train, h, config.kde_kernel)?;
        let fit_ms = ms(started);
        let started = Instant::now();
        let est = model.density_batch(&data.test)?;
        push(&mut out, "kde", None, None, h, est, fit_ms, ms(started))?;
    }
    Ok(out)
}

pub struct ModeTrial {
    pub seeds: TrialSeeds,
    pub mixture: VmfMixture,
    pub train: Vec<UnitVector>,
    pub m: usize,
    pub k: usize,
    /// Validation grid, when `k` was selected rather than fixed.
    pub grid: Option<Vec<GridResult>>,
    pub fhat: Vec<f64>,
    pub modes: ModeSet,
    /// Single mode: distance to the dominant mean. Several modes: best
    /// pairing error against all component means (`None` when too few
    /// modes were found).
    pub error: Option<f64>,
}

/// Fits on the training sample (with `m = n_train` unless set) and
/// estimates one mode or all modes, depending on the task.
pub fn mode_trial(config: &ExperimentConfig, t: usize) -> Result<ModeTrial> {
    let s = TrialSeeds::new(config.seed, t);
    let mixture = config.mixture(s.trial)?;
    let train = mixture.sample(config.n_train, &mut seeds::rng(s.train));
    let m = config.m.unwrap_or(config.n_train);
    let bank = Arc::new(ProjectionBank::new(config.d, m, s.bank(0))?);
    let (model, fhat, grid) = match config.k {
        Some(k) => {
            let codes = RankedCodes::new(&bank, &train, k)?;
            let model = EasModel::from_ranked(bank, &codes, k)?;
            let fhat = model.evaluate_all_ranked(&codes)?;
            (model, fhat, None)
        }
        None => {
            let val = mixture.sample(config.n_val, &mut seeds::rng(s.val));
            let val_truth = mixture.density_batch(&val)?;
            let sel = select_eas_k_full(&bank, &train, &val, &val_truth)?;
            let fhat = sel.train_fhat()?;
            (sel.model, fhat, Some(sel.grid))
        }
    };
    let k = model.k();
    let (modes, error) = if config.task == Task::ModeMulti {
        let n = train.len();
        let k_graph = config.k_graph.unwrap_or(k).min(n.saturating_sub(1)).max(1);
        let rk = if n == 1 { vec![0.0] } else { knn_radii(&train, k_graph)? };
        let eps = match config.eps_tilde {
            EpsTilde::Fixed(e) => e,
            EpsTilde::Auto => auto_eps(&model, fhat.iter().copied().fold(0.0, f64::max))?,
        };
        let set = recover_modes_from(&train, &fhat, &rk, config.alpha, eps, k_graph)?;
        let means: Vec<&UnitVector> = mixture.components().iter().map(|c| c.mu()).collect();
        let error = best_pairing_error(&set.points(&train), &means);
        (set, error)
    } else {
        let i = argmax(&fhat).ok_or(Error::Empty("training data"))?;
        let set = ModeSet {
            modes: vec![Mode {
                index: i,
                fhat: fhat[i],
                level: fhat[i],
            }],
            eps_tilde: 0.0,
            alpha: config.alpha,
            k_graph: k,
        };
        (set, Some(train[i].distance(mixture.dominant_mean())))
    };
    Ok(ModeTrial {
        seeds: s,
        mixture,
        train,
        m,
        k,
        grid,
        fhat,
        modes,
        error,
    })
}

/// Region geometry of a bank drawn from `derive(seed, "bank", 0)`, probed
/// with streams of `derive(seed, "probes", 0)`.
pub fn diagnostics_report(config: &ExperimentConfig) -> Result<RegionReport> {
    let m = config.m.ok_or_else(|| Error::InvalidParameter("diagnostics needs m".into()))?;
    let k = config.k.ok_or_else(|| Error::InvalidParameter("diagnostics needs k".into()))?;
    let bank = ProjectionBank::new(config.d, m, seeds::derive(config.seed, "bank", 0))?;
    eas::region_diagnostics(&bank, k, config.probes, config.regions, seeds::derive(config.seed, "probes", 0))
}

/// Files written by [`run`] and the manifest describing them.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub manifest: serde_json::Value,
}

/// Runs the configured task and writes its artifacts into `output_dir`.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    fs::create_dir_all(&config.output_dir)?;
    let started = Instant::now();
    let mut out = Emitter::new(&config.output_dir);
    let details = match config.task {
        Task::DensityExperiment => run_density(config, &mut out)?,
        Task::ModeSingle | Task::ModeMulti => run_modes(config, &mut out)?,
        Task::Diagnostics => run_diagnostics(config, &mut out)?,
        Task::Rate => run_rate(config, &mut out)?,
    };
    let manifest = json!({
        "library": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "task": config.task,
        "config": config,
        "seed_derivation": "trial t: derive(seed, \"trial\", t); streams: derive(trial, label, index) \
                            for label in {train, val, test, bank}; means: stream(trial, \"means\", i)",
        "workers": rayon::current_num_threads(),
        "wall_ms": ms(started),
        "details": details,
        "files": out.names(),
    });
    out.write("manifest.json", |w| Ok(serde_json::to_writer_pretty(w, &manifest)?))?;
    Ok(RunReport {
        files: out.files,
        manifest,
    })
}

/// Serialized writer for everything a run emits.
struct Emitter {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Emitter {
    fn new(dir: &Path) -> Self {
        Emitter {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut file = std::io::BufWriter::new(fs::File::create(&path)?);
        body(&mut file)?;
        file.flush()?;
        self.files.push(path.clone());
        Ok(path)
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        self.write(name, |w| {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(header)?;
            for row in rows {
                csv.write_record(row)?;
            }
            csv.flush()?;
            Ok(())
        })
    }

    fn names(&self) -> Vec<String> {
        self.files
            .iter()
            .filter_map(|p| p.strip_prefix(&self.dir).ok())
            .map(|p| p.display().to_string())
            .collect()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn version() -> String {
    CSV_SCHEMA_VERSION.to_string()
}

pub const RESULTS_HEADER: [&str; 12] = [
    "schema_version",
    "estimator",
    "d",
    "expansion_factor",
    "m",
    "k_or_bandwidth",
    "n_train",
    "seed",
    "etv",
    "sup_error",
    "fit_ms",
    "eval_ms",
];

fn run_density(config: &ExperimentConfig, out: &mut Emitter) -> Result<serde_json::Value> {
    let trials = (0..config.trials)
        .map(|t| density_trial(config, t))
        .collect::<Result<Vec<_>>>()?;
    let timing = |v: f64| if config.record_timings { format!("{v:.3}") } else { String::new() };

    let rows: Vec<&ResultRow> = trials.iter().flat_map(|t| &t.rows).collect();
    let results: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                version(),
                r.estimator.into(),
                r.d.to_string(),
                opt(r.expansion_factor),
                opt(r.m),
                r.parameter.to_string(),
                r.n_train.to_string(),
                r.seed.to_string(),
                r.etv.to_string(),
                r.sup_error.to_string(),
                timing(r.fit_ms),
                timing(r.eval_ms),
            ]
        })
        .collect();
    out.csv("results.csv", &RESULTS_HEADER, &results)?;

    let validation: Vec<Vec<String>> = trials
        .iter()
        .flat_map(|t| &t.validation)
        .map(|v| {
            vec![
                version(),
                v.estimator.into(),
                opt(v.expansion_factor),
                v.seed.to_string(),
                v.candidate.parameter.to_string(),
                v.candidate.val_etv.to_string(),
                v.candidate.selected.to_string(),
            ]
        })
        .collect();
    out.csv(
        "validation.csv",
        &["schema_version", "estimator", "expansion_factor", "seed", "parameter", "val_etv", "selected"],
        &validation,
    )?;

    // one row per (estimator, expansion factor); baselines do not depend
    // on the factor and repeat as reference levels
    let mut summary = Vec::new();
    for &ef in &config.expansion_factors {
        for name in ["eas", "knnde", "kde"] {
            let etvs: Vec<f64> = rows
                .iter()
                .filter(|r| r.estimator == name && (name != "eas" || r.expansion_factor == Some(ef)))
                .map(|r| r.etv)
                .collect();
            if etvs.is_empty() {
                continue;
            }
            let n = etvs.len() as f64;
            let mean = etvs.iter().sum::<f64>() / n;
            let std = if etvs.len() > 1 {
                (etvs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            summary.push(vec![
                version(),
                name.to_string(),
                ef.to_string(),
                opt((name == "eas").then(|| config.expansion_size(ef))),
                etvs.len().to_string(),
                mean.to_string(),
                std.to_string(),
            ]);
        }
    }
    out.csv(
        "summary.csv",
        &["schema_version", "estimator", "expansion_factor", "m", "trials", "etv_mean", "etv_std"],
        &summary,
    )?;

    if config.record_timings {
        let timings: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.estimator.into(),
                    opt(r.expansion_factor),
                    r.seed.to_string(),
                    format!("{:.3}", r.fit_ms),
                    format!("{:.3}", r.eval_ms),
                ]
            })
            .collect();
        out.csv("timings.csv", &["estimator", "expansion_factor", "seed", "fit_ms", "eval_ms"], &timings)?;
    }
    if config.save_models {
        for (t, trial) in trials.iter().enumerate() {
            for (ef, model) in &trial.models {
                out.write(&format!("models/eas_trial{t}_ef{ef}.json"), |w| eas::persist::write_model(model, w))?;
            }
        }
    }

    let per_trial: Vec<_> = trials
        .iter()
        .map(|t| {
            json!({
                "seeds": t.seeds,
                "selected": t.rows.iter().map(|r| json!({
                    "estimator": r.estimator,
                    "expansion_factor": r.expansion_factor,
                    "m": r.m,
                    "k_or_bandwidth": r.parameter,
                    "flagged_test_points": r.flagged,
                    "fit_ms": r.fit_ms,
                    "eval_ms": r.eval_ms,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(json!({ "trials": per_trial }))
}

fn run_modes(config: &ExperimentConfig, out: &mut Emitter) -> Result<serde_json::Value> {
    let mut summary = Vec::new();
    let mut details = Vec::new();
    for t in 0..config.trials {
        let trial = mode_trial(config, t)?;
        let name = if config.trials == 1 {
            "modes.csv".to_string()
        } else {
            format!("modes_trial{t}.csv")
        };
        out.write(&name, |w| trial.modes.write_csv(&trial.train, w))?;
        summary.push(vec![
            version(),
            t.to_string(),
            trial.seeds.trial.to_string(),
            trial.m.to_string(),
            trial.k.to_string(),
            trial.modes.k_graph.to_string(),
            trial.modes.eps_tilde.to_string(),
            trial.modes.len().to_string(),
            opt(trial.error),
        ]);
        let means: Vec<&UnitVector> = trial.mixture.components().iter().map(|c| c.mu()).collect();
        details.push(json!({
            "seeds": trial.seeds,
            "m": trial.m,
            "k": trial.k,
            "k_selected_on_validation": trial.grid.is_some(),
            "k_graph": trial.modes.k_graph,
            "alpha": trial.modes.alpha,
            "eps_tilde": trial.modes.eps_tilde,
            "eps_tilde_mode": config.eps_tilde,
            "sup_fhat": trial.fhat.iter().copied().fold(0.0, f64::max),
            "component_means": means,
            "error": trial.error,
        }));
    }
    out.csv(
        "mode_summary.csv",
        &["schema_version", "trial", "seed", "m", "k", "k_graph", "eps_tilde", "modes_found", "error"],
        &summary,
    )?;
    Ok(json!({ "trials": details }))
}

fn run_diagnostics(config: &ExperimentConfig, out: &mut Emitter) -> Result<serde_json::Value> {
    let report = diagnostics_report(config)?;
    let rows: Vec<Vec<String>> = report
        .regions
        .iter()
        .map(|r| {
            vec![
                version(),
                r.index.to_string(),
                r.hits.to_string(),
                r.volume_ratio.to_string(),
                r.diameter.to_string(),
                r.inner_ratio.to_string(),
                r.outer_ratio.to_string(),
            ]
        })
        .collect();
    out.csv(
        "regions.csv",
        &["schema_version", "region", "hits", "volume_ratio", "diameter", "inner_ratio", "outer_ratio"],
        &rows,
    )?;
    Ok(json!({
        "bank_seed": seeds::derive(config.seed, "bank", 0),
        "probe_seed": seeds::derive(config.seed, "probes", 0),
        "m": report.m,
        "k": report.k,
        "probes": report.probes,
        "min_ratio": report.min_ratio,
        "max_ratio": report.max_ratio,
        "mean_ratio": report.mean_ratio,
        "fraction_in_0.75_1.25": report.fraction_within(0.75, 1.25),
        "max_diameter": report.max_diameter,
        "diameter_bound": report.diameter_bound,
        "diameters_within_bound": report.diameters_within_bound(),
    }))
}

fn run_rate(config: &ExperimentConfig, out: &mut Emitter) -> Result<serde_json::Value> {
    let mixture = config.mixture(seeds::derive(config.seed, "means", 0))?;
    let table = rate_experiment(
        config.rate_family,
        &mixture,
        &config.n_grid,
        config.trials,
        config.seed,
        config.n_val,
        config.n_test,
    )?;
    write_rate(&table, config, out)?;
    Ok(json!({
        "family": config.rate_family,
        "slope": table.slope,
        "slope_se": table.slope_se,
        "inversions": table.inversions(),
        "selected_k": table.rows.iter().map(|r| json!({ "n": r.n, "k": r.selected_k })).collect::<Vec<_>>(),
    }))
}

fn write_rate(table: &RateTable, config: &ExperimentConfig, out: &mut Emitter) -> Result<()> {
    let mut rows = Vec::new();
    for r in &table.rows {
        for (t, e) in r.errors.iter().enumerate() {
            rows.push(vec![
                version(),
                config.rate_family.as_str().into(),
                r.n.to_string(),
                t.to_string(),
                seeds::derive(config.seed, "trial", t as u64).to_string(),
                opt(r.selected_k.get(t)),
                e.to_string(),
            ]);
        }
    }
    out.csv("rate.csv", &["schema_version", "family", "n", "trial", "seed", "k", "error"], &rows)?;
    let summary: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| vec![version(), r.n.to_string(), r.mean.to_string(), r.std.to_string()])
        .collect();
    out.csv("rate_summary.csv", &["schema_version", "n", "mean_error", "std_error"], &summary)?;
    Ok(())
}

/// Reads points from a CSV with a header row and one coordinate per column.
pub fn read_points(path: &Path) -> Result<Vec<UnitVector>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let coords = record
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidParameter(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        points.push(UnitVector::new(coords)?);
    }
    Ok(points)
}

/// Writes points under an `x0..x{d-1}` header, optionally with one value
/// column.
pub fn write_points<W: Write>(points: &[UnitVector], values: Option<(&str, &[f64])>, writer: W) -> Result<()> {
    let d = points.first().map_or(0, UnitVector::dim);
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (0..d).map(|i| format!("x{i}")).collect();
    if let Some((name, _)) = values {
        header.push(name.to_string());
    }
    w.write_record(&header)?;
    for (i, p) in points.iter().enumerate() {
        let mut row: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
        if let Some((_, vals)) = values {
            row.push(vals[i].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Fits one model on the config's training sample and saves it.
pub fn fit_model(config: &ExperimentConfig, model_path: &Path) -> Result<EasModel> {
    let s = TrialSeeds::new(config.seed, 0);
    let data = Splits::draw(config, &s)?;
    let m = config
        .m
        .unwrap_or_else(|| config.expansion_size(config.expansion_factors[0]));
    let bank = Arc::new(ProjectionBank::new(config.d, m, s.bank(0))?);
    let model = match config.k {
        Some(k) => eas::fit(bank, k, &data.train)?,
        None => {
            let val_truth = data.mixture.density_batch(&data.val)?;
            select_eas_k_full(&bank, &data.train, &data.val, &val_truth)?.model
        }
    };
    if let Some(parent) = model_path.parent() {
        fs::create_dir_all(parent)?;
    }
    eas::persist::save(&model, model_path)?;
    Ok(model)
}

/// ETV of a saved model against the config's mixture on a fresh test set.
pub fn evaluate_model(config: &ExperimentConfig, model: &EasModel) -> Result<crate::evaluation::EtvReport> {
    let s = TrialSeeds::new(config.seed, 0);
    let data = Splits::draw(config, &s)?;
    etv(&data.mixture, model, &data.test)
}
