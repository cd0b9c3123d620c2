//! Accuracy metrics, validation-set hyperparameter selection, and
//! convergence-rate experiments.
//!
//! Grids use natural logarithms: the kNN grid contains `round(ln n)` and the
//! EaS grid is centered at `round(d ln m)`.

use std::sync::Arc;

use serde::Serialize;

use crate::baselines::{KdeModel, KernelKind, KnnModel};
use crate::density::Density;
use crate::eas::{EasModel, ProjectionBank, RankedCodes};
use crate::error::{Error, Result};
use crate::modes::argmax;
use crate::seeds;
use crate::sphere::UnitVector;
use crate::vmf::VmfMixture;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtvReport {
    /// `(1 / 2M) sum_i |f(x_i) - fhat(x_i)|` over the `M` finite differences.
    pub etv: f64,
    /// `max_i |f(x_i) - fhat(x_i)|` over finite estimates.
    pub sup_error: f64,
    /// Number of test points.
    pub m: usize,
    /// Test points where either value was not finite (e.g. the kNN
    /// duplicate-point sentinel); excluded from `etv` and `sup_error`.
    pub flagged: usize,
}

impl EtvReport {
    /// ETV for ranking purposes: `+inf` when any point was flagged.
    pub fn score(&self) -> f64 {
        if self.flagged > 0 {
            f64::INFINITY
        } else {
            self.etv
        }
    }
}

/// ETV and sup error between two sets of pointwise values.
pub fn etv_from_values(truth: &[f64], estimate: &[f64]) -> Result<EtvReport> {
    if truth.is_empty() {
        return Err(Error::Empty("test set"));
    }
    if truth.len() != estimate.len() {
        return Err(Error::InvalidParameter(format!(
            "{} truth values but {} estimates",
            truth.len(),
            estimate.len()
        )));
    }
    let mut total = 0.0;
    let mut sup = 0.0_f64;
    let mut flagged = 0;
    for (f, g) in truth.iter().zip(estimate) {
        let diff = (f - g).abs();
        if diff.is_finite() {
            total += diff;
            sup = sup.max(diff);
        } else {
            flagged += 1;
        }
    }
    let finite = truth.len() - flagged;
    Ok(EtvReport {
        etv: if finite == 0 { f64::NAN } else { total / (2.0 * finite as f64) },
        sup_error: sup,
        m: truth.len(),
        flagged,
    })
}

/// Empirical total variation between two densities over a test set.
pub fn etv<T: Density + ?Sized, E: Density + ?Sized>(
    truth: &T,
    estimate: &E,
    test: &[UnitVector],
) -> Result<EtvReport> {
    if test.is_empty() {
        return Err(Error::Empty("test set"));
    }
    etv_from_values(&truth.density_batch(test)?, &estimate.density_batch(test)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridResult {
    pub parameter: f64,
    pub val_etv: f64,
    pub selected: bool,
}

/// Marks the candidate with the smallest validation ETV; ties go to the
/// smaller parameter.
pub fn mark_selection(mut grid: Vec<GridResult>) -> Result<Vec<GridResult>> {
    let best = grid
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            a.val_etv
                .total_cmp(&b.val_etv)
                .then(a.parameter.total_cmp(&b.parameter))
        })
        .map(|(i, _)| i)
        .ok_or(Error::Empty("hyperparameter grid"))?;
    grid.iter_mut().for_each(|g| g.selected = false);
    grid[best].selected = true;
    Ok(grid)
}

/// The selected entry of a grid produced by this module.
pub fn selected(grid: &[GridResult]) -> &GridResult {
    grid.iter().find(|g| g.selected).expect("exactly one selected candidate")
}

/// Neighbor counts `{1, 10, 50, ln n, sqrt n, n/8, n/4, n/2, 3n/4}`, rounded,
/// clamped to `[1, n-1]`, sorted and deduplicated.
pub fn knn_k_grid(n: usize) -> Result<Vec<usize>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("kNN selection needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let raw = [1.0, 10.0, 50.0, nf.ln(), nf.sqrt(), nf / 8.0, nf / 4.0, nf / 2.0, 0.75 * nf];
    let mut ks: Vec<usize> = raw
        .iter()
        .map(|v| (v.round() as usize).clamp(1, n - 1))
        .collect();
    ks.sort_unstable();
    ks.dedup();
    Ok(ks)
}

/// 20 log-spaced bandwidths from 0.01 to 1 inclusive.
pub fn kde_bandwidth_grid() -> Vec<f64> {
    let mut hs: Vec<f64> = (0..20).map(|i| 10f64.powf(-2.0 + 2.0 * i as f64 / 19.0)).collect();
    hs[0] = 0.01;
    hs[19] = 1.0;
    hs
}

/// Integers within 8 of `round(d ln m)`, clamped to `[1, m]`.
pub fn eas_k_grid(d: usize, m: usize) -> Vec<usize> {
    let center = (d as f64 * (m as f64).ln()).round() as i64;
    let mut ks: Vec<usize> = (center - 8..=center + 8)
        .map(|k| k.clamp(1, m as i64) as usize)
        .collect();
    ks.dedup();
    ks
}

pub fn select_knn_k(train: &[UnitVector], val: &[UnitVector], val_truth: &[f64]) -> Result<Vec<GridResult>> {
    let ks = knn_k_grid(train.len())?;
    let probe = KnnModel::new(train, 1)?;
    let est = probe.multi_k_densities(val, &ks)?;
    let grid = ks
        .iter()
        .enumerate()
        .map(|(c, &k)| {
            let column: Vec<f64> = est.iter().map(|row| row[c]).collect();
            Ok(GridResult {
                parameter: k as f64,
                val_etv: etv_from_values(val_truth, &column)?.score(),
                selected: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    mark_selection(grid)
}

pub fn select_kde_bandwidth(
    train: &[UnitVector],
    val: &[UnitVector],
    val_truth: &[f64],
    kind: KernelKind,
) -> Result<Vec<GridResult>> {
    let hs = kde_bandwidth_grid();
    let est = KdeModel::multi_bandwidth_densities(train, val, &hs, kind)?;
    let grid = hs
        .iter()
        .enumerate()
        .map(|(c, &h)| {
            let column: Vec<f64> = est.iter().map(|row| row[c]).collect();
            Ok(GridResult {
                parameter: h,
                val_etv: etv_from_values(val_truth, &column)?.score(),
                selected: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    mark_selection(grid)
}

/// Outcome of a sparsity search on one fixed bank.
#[derive(Debug, Clone)]
pub struct EasSelection {
    pub grid: Vec<GridResult>,
    /// Model fitted at the selected `k`.
    pub model: EasModel,
    /// Training codes at the grid's largest `k`, reusable for evaluating
    /// the model at the training points.
    pub train_codes: RankedCodes,
}

impl EasSelection {
    pub fn k(&self) -> usize {
        self.model.k()
    }

    /// The selected model's estimate at every training point.
    pub fn train_fhat(&self) -> Result<Vec<f64>> {
        self.model.evaluate_all_ranked(&self.train_codes)
    }
}

/// Sparsity selection on one fixed bank. Each point is encoded once at the
/// largest grid `k`; smaller codes are prefixes of it.
pub fn select_eas_k_full(
    bank: &Arc<ProjectionBank>,
    train: &[UnitVector],
    val: &[UnitVector],
    val_truth: &[f64],
) -> Result<EasSelection> {
    if train.is_empty() {
        return Err(Error::Empty("training data"));
    }
    let ks = eas_k_grid(bank.dim(), bank.m());
    let depth = *ks.last().expect("grid is never empty");
    let train_codes = RankedCodes::new(bank, train, depth)?;
    let val_codes = RankedCodes::new(bank, val, depth)?;
    let mut grid = Vec::with_capacity(ks.len());
    for &k in &ks {
        let model = EasModel::from_ranked(Arc::clone(bank), &train_codes, k)?;
        let est = model.evaluate_all_ranked(&val_codes)?;
        grid.push(GridResult {
            parameter: k as f64,
            val_etv: etv_from_values(val_truth, &est)?.score(),
            selected: false,
        });
    }
    let grid = mark_selection(grid)?;
    let k = selected(&grid).parameter as usize;
    let model = EasModel::from_ranked(Arc::clone(bank), &train_codes, k)?;
    Ok(EasSelection {
        grid,
        model,
        train_codes,
    })
}

pub fn select_eas_k(
    bank: &Arc<ProjectionBank>,
    train: &[UnitVector],
    val: &[UnitVector],
    val_truth: &[f64],
) -> Result<Vec<GridResult>> {
    Ok(select_eas_k_full(bank, train, val, val_truth)?.grid)
}

/// Smallest achievable worst-case error when each true mean is matched to a
/// distinct estimated mode: `min over injective pairings of max distance`.
/// `None` when there are fewer estimates than means.
pub fn best_pairing_error(estimates: &[UnitVector], means: &[&UnitVector]) -> Option<f64> {
    fn search(estimates: &[UnitVector], means: &[&UnitVector], used: &mut Vec<bool>, worst: f64) -> Option<f64> {
        let Some((mu, rest)) = means.split_first() else {
            return Some(worst);
        };
        let mut best: Option<f64> = None;
        for (i, x) in estimates.iter().enumerate() {
            if used[i] {
                continue;
            }
            used[i] = true;
            if let Some(e) = search(estimates, rest, used, worst.max(x.distance(mu))) {
                best = Some(best.map_or(e, |b: f64| b.min(e)));
            }
            used[i] = false;
        }
        best
    }
    search(estimates, means, &mut vec![false; estimates.len()], 0.0)
}

/// Least-squares slope of `y` on `x` with its standard error (NaN with
/// fewer than three points).
pub fn ols_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let se = if x.len() < 3 {
        f64::NAN
    } else {
        let ssr: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let r = b - my - slope * (a - mx);
                r * r
            })
            .sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    };
    (slope, se)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RateFamily {
    /// Sup error of the density estimate over the test set.
    Density,
    /// Distance from the sample maximizer to the dominant mean.
    Mode,
}

impl RateFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            RateFamily::Density => "density",
            RateFamily::Mode => "mode",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRow {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub errors: Vec<f64>,
    /// Selected sparsity per trial; empty for custom trial functions.
    pub selected_k: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    /// OLS slope of `ln(mean error)` on `ln n`.
    pub slope: f64,
    pub slope_se: f64,
}

impl RateTable {
    /// `errors[i][t]` is trial `t` at `n_grid[i]`.
    pub fn from_errors(n_grid: &[usize], errors: Vec<Vec<f64>>) -> Result<Self> {
        if n_grid.len() != errors.len() || n_grid.len() < 2 {
            return Err(Error::InvalidParameter(
                "need at least two sample sizes with one error series each".into(),
            ));
        }
        let rows: Vec<RateRow> = n_grid
            .iter()
            .zip(errors)
            .map(|(&n, errs)| {
                let t = errs.len() as f64;
                let mean = errs.iter().sum::<f64>() / t;
                let var = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (t - 1.0).max(1.0);
                RateRow {
                    n,
                    mean,
                    std: var.sqrt(),
                    errors: errs,
                    selected_k: Vec::new(),
                }
            })
            .collect();
        let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.mean.ln()).collect();
        let (slope, slope_se) = ols_slope(&x, &y);
        Ok(RateTable { rows, slope, slope_se })
    }

    /// Number of places where the mean error goes up as `n` grows.
    pub fn inversions(&self) -> usize {
        self.rows.windows(2).filter(|w| w[1].mean > w[0].mean).count()
    }
}

/// Runs `trial(n, t)` for every `n` in an increasing grid and `t < trials`.
pub fn rate_experiment_with<F>(n_grid: &[usize], trials: usize, mut trial: F) -> Result<RateTable>
where
    F: FnMut(usize, usize) -> Result<f64>,
{
    if trials < 3 {
        return Err(Error::InvalidParameter(format!("rate experiments need >= 3 trials, got {trials}")));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("n_grid must be strictly increasing".into()));
    }
    let errors = n_grid
        .iter()
        .map(|&n| (0..trials).map(|t| trial(n, t)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    RateTable::from_errors(n_grid, errors)
}

/// Convergence study with `m = n` and grid-selected `k`.
///
/// Trial `t` at size `n` draws its data from streams of
/// `derive(seed, "trial", t)` indexed by `n`, so every cell is independent
/// of the others and of evaluation order.
pub fn rate_experiment(
    family: RateFamily,
    truth: &VmfMixture,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
    n_val: usize,
    n_test: usize,
) -> Result<RateTable> {
    let d = truth.dim();
    let mut ks = Vec::new();
    let mut table = rate_experiment_with(n_grid, trials, |n, t| {
        let ts = seeds::derive(seed, "trial", t as u64);
        let train = truth.sample(n, &mut seeds::stream(ts, "train", n as u64));
        let val = truth.sample(n_val, &mut seeds::stream(ts, "val", n as u64));
        let val_truth = truth.density_batch(&val)?;
        let bank = Arc::new(ProjectionBank::new(d, n, seeds::derive(ts, "bank", n as u64))?);
        let sel = select_eas_k_full(&bank, &train, &val, &val_truth)?;
        ks.push(sel.k());
        match family {
            RateFamily::Density => {
                let test = truth.sample(n_test, &mut seeds::stream(ts, "test", n as u64));
                Ok(etv(truth, &sel.model, &test)?.sup_error)
            }
            RateFamily::Mode => {
                let fhat = sel.train_fhat()?;
                let i = argmax(&fhat).expect("training data is nonempty");
                Ok(train[i].distance(truth.dominant_mean()))
            }
        }
    })?;
    for (row, chunk) in table.rows.iter_mut().zip(ks.chunks(trials)) {
        row.selected_k = chunk.to_vec();
    }
    Ok(table)
}
