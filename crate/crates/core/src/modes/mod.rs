//! Mode estimation from the expand-and-sparsify density estimate.
//!
//! [`single_mode`] returns the sample point maximizing the estimate.
//! [`recover_modes`] handles an unknown number of modes: it walks the
//! distinct estimate values from the top, and at each level `lambda` looks at
//! the connected components of the density graph `G(lambda - eps)`. Every
//! component that does not yet contain a returned mode contributes the
//! maximizer of the estimate over its points with value at least `lambda`.
//!
//! A component counts as "already represented" when it contains the sample
//! index of a previously returned mode.

mod graph;
mod union_find;

use std::io::Write;

use serde::Serialize;

use crate::eas::EasModel;
use crate::error::{Error, Result};
use crate::sphere::{self, UnitVector};

pub use graph::{connected_components, knn_radii, DensityGraph, MIN_ALPHA};
pub use union_find::UnionFind;

/// Confidence parameter used by [`auto_eps`].
pub const AUTO_EPS_DELTA: f64 = 0.05;

/// Index of the sample point with the largest value; ties go to the smaller
/// index. `None` for an empty slice.
pub fn argmax(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Index of the sample maximizing the estimate.
pub fn single_mode_index(model: &EasModel, data: &[UnitVector]) -> Result<usize> {
    if data.is_empty() {
        return Err(Error::Empty("data"));
    }
    let fhat = model.evaluate_batch(data)?;
    Ok(argmax(&fhat).expect("nonempty"))
}

/// The sample point maximizing the estimate.
pub fn single_mode(model: &EasModel, data: &[UnitVector]) -> Result<UnitVector> {
    Ok(data[single_mode_index(model, data)?].clone())
}

/// The estimator's uniform slack
/// `gamma_n = alpha_n / (S_{d-1} k / m)` with
/// `alpha_n = 2 sqrt(k S_{d-1} |f|_inf log(m/delta) / (m n)) + 2 log(m/delta) / (3n)`.
pub fn gamma_n(d: usize, m: usize, k: usize, n: u64, sup_f: f64, delta: f64) -> Result<f64> {
    sphere::check_dim(d)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain("delta", delta, "(0, 1)"));
    }
    if !(sup_f >= 0.0) || !sup_f.is_finite() {
        return Err(Error::domain("sup_f", sup_f, "[0, inf)"));
    }
    if m == 0 || k == 0 || n == 0 {
        return Err(Error::InvalidParameter("m, k and n must be positive".into()));
    }
    let s = sphere::surface_area_unchecked(d);
    let (m, k, n) = (m as f64, k as f64, n as f64);
    let log_term = (m / delta).ln();
    let alpha_n = 2.0 * (k * s * sup_f * log_term / (m * n)).sqrt() + 2.0 * log_term / (3.0 * n);
    Ok(alpha_n / (s * k / m))
}

/// `gamma_n` for a fitted model with `delta = 0.05` and `|f|_inf` replaced by
/// the largest estimate over the training sample.
pub fn auto_eps(model: &EasModel, sup_fhat: f64) -> Result<f64> {
    gamma_n(model.dim(), model.m(), model.k(), model.n(), sup_fhat, AUTO_EPS_DELTA)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsTilde {
    /// Use [`auto_eps`] with the empirical supremum.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub index: usize,
    pub fhat: f64,
    /// The level `lambda` at which the mode was added.
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSet {
    pub modes: Vec<Mode>,
    /// The level offset actually used (resolved when `EpsTilde::Auto`).
    pub eps_tilde: f64,
    pub alpha: f64,
    pub k_graph: usize,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.index).collect()
    }

    pub fn points(&self, data: &[UnitVector]) -> Vec<UnitVector> {
        self.modes.iter().map(|m| data[m.index].clone()).collect()
    }

    /// CSV with header
    /// `schema_version,mode_rank,sample_index,x0..x{d-1},fhat,discovery_level`.
    pub fn write_csv<W: Write>(&self, data: &[UnitVector], writer: W) -> Result<()> {
        let d = data.first().map_or(0, UnitVector::dim);
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["schema_version".to_string(), "mode_rank".into(), "sample_index".into()];
        header.extend((0..d).map(|i| format!("x{i}")));
        header.extend(["fhat".to_string(), "discovery_level".into()]);
        w.write_record(&header)?;
        for (rank, mode) in self.modes.iter().enumerate() {
            let mut row = vec![
                crate::CSV_SCHEMA_VERSION.to_string(),
                rank.to_string(),
                mode.index.to_string(),
            ];
            row.extend(data[mode.index].coords().iter().map(|c| c.to_string()));
            row.extend([mode.fhat.to_string(), mode.level.to_string()]);
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Multi-mode recovery on a fitted model: evaluates the estimate at every
/// sample, builds `k_graph`-NN radii, and runs [`recover_modes_from`].
pub fn recover_modes(
    model: &EasModel,
    data: &[UnitVector],
    k_graph: usize,
    alpha: f64,
    eps_tilde: EpsTilde,
) -> Result<ModeSet> {
    if data.is_empty() {
        return Err(Error::Empty("data"));
    }
    graph::check_alpha(alpha)?;
    let fhat = model.evaluate_batch(data)?;
    let eps = match eps_tilde {
        EpsTilde::Fixed(e) => e,
        EpsTilde::Auto => {
            let sup = fhat.iter().copied().fold(0.0, f64::max);
            auto_eps(model, sup)?
        }
    };
    let rk = if data.len() == 1 {
        vec![0.0]
    } else {
        knn_radii(data, k_graph.min(data.len() - 1))?
    };
    recover_modes_from(data, &fhat, &rk, alpha, eps, k_graph)
}

/// Multi-mode recovery from precomputed estimates and radii.
///
/// Levels are the distinct values of `fhat`, descending. Modes found at the
/// same level are listed by ascending sample index. The graph only grows as the
/// level drops, so components are maintained incrementally with a
/// union-find that tracks each component's best sample and whether it
/// already holds a mode.
pub fn recover_modes_from(
    points: &[UnitVector],
    fhat: &[f64],
    rk: &[f64],
    alpha: f64,
    eps: f64,
    k_graph: usize,
) -> Result<ModeSet> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Empty("data"));
    }
    if fhat.len() != n || rk.len() != n {
        return Err(Error::InvalidParameter("fhat and radii must match the data length".into()));
    }
    graph::check_alpha(alpha)?;
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::domain("eps_tilde", eps, "[0, inf)"));
    }
    if let Some(v) = fhat.iter().find(|v| !v.is_finite()) {
        return Err(Error::domain("fhat", *v, "finite values"));
    }
    let d = points[0].dim();
    sphere::check_all_dim(points, d)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fhat[b].total_cmp(&fhat[a]).then(a.cmp(&b)));

    // (activation level, i, j) for every edge of the level-free graph
    let mut edges = edge_list(points, rk, alpha, fhat);
    edges.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let better = |a: usize, b: usize| {
        // is sample a preferred over sample b as a maximizer?
        fhat[a] > fhat[b] || (fhat[a] == fhat[b] && a < b)
    };

    let mut uf = UnionFind::new(n);
    let mut best: Vec<usize> = (0..n).collect();
    let mut has_mode = vec![false; n];
    let mut modes = Vec::new();
    let (mut next_edge, mut start) = (0, 0);
    while start < n {
        let lambda = fhat[order[start]];
        let mut end = start;
        while end < n && fhat[order[end]] == lambda {
            end += 1;
        }
        let threshold = lambda - eps;
        while next_edge < edges.len() && edges[next_edge].0 >= threshold {
            let (_, i, j) = edges[next_edge];
            if let Some((root, gone)) = uf.union(i, j) {
                if better(best[gone], best[root]) {
                    best[root] = best[gone];
                }
                has_mode[root] |= has_mode[gone];
            }
            next_edge += 1;
        }
        let first_new = modes.len();
        for &i in &order[start..end] {
            let r = uf.find(i);
            if !has_mode[r] {
                let b = best[r];
                modes.push(Mode {
                    index: b,
                    fhat: fhat[b],
                    level: lambda,
                });
                has_mode[r] = true;
            }
        }
        modes[first_new..].sort_by_key(|m| m.index);
        start = end;
    }
    Ok(ModeSet {
        modes,
        eps_tilde: eps,
        alpha,
        k_graph,
    })
}

fn edge_list(points: &[UnitVector], rk: &[f64], alpha: f64, fhat: &[f64]) -> Vec<(f64, usize, usize)> {
    use rayon::prelude::*;
    let n = points.len();
    (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let xi = &points[i];
            (i + 1..n).filter_map(move |j| {
                let reach = alpha * rk[i].min(rk[j]);
                (xi.distance(&points[j]) <= reach).then(|| (fhat[i].min(fhat[j]), i, j))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eas::{fit, make_bank};
    use crate::seeds;
    use crate::sphere::sample_uniform;
    use proptest::prelude::*;
    use std::sync::Arc;

    /// Direct transcription of the level loop, recomputing components of
    /// `G(lambda - eps)` from scratch at every level.
    fn naive_recover(points: &[UnitVector], fhat: &[f64], rk: &[f64], alpha: f64, eps: f64) -> Vec<Mode> {
        let mut levels: Vec<f64> = fhat.to_vec();
        levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
        levels.dedup();
        let base = DensityGraph::new(points.to_vec(), fhat.to_vec(), rk.to_vec(), alpha).unwrap();
        let mut modes: Vec<Mode> = Vec::new();
        for lambda in levels {
            let g = base.clone().at_level(lambda - eps);
            let mut fresh = Vec::new();
            for comp in connected_components(&g) {
                if comp.iter().any(|i| modes.iter().any(|m| m.index == *i)) {
                    continue;
                }
                let cands: Vec<usize> = comp.into_iter().filter(|&i| fhat[i] >= lambda).collect();
                let Some(&first) = cands.first() else { continue };
                let b = cands.iter().fold(first, |b, &i| if fhat[i] > fhat[b] { i } else { b });
                fresh.push(Mode { index: b, fhat: fhat[b], level: lambda });
            }
            fresh.sort_by_key(|m| m.index);
            modes.extend(fresh);
        }
        modes
    }

    fn circle(deg: f64) -> UnitVector {
        let t = deg.to_radians();
        UnitVector::new(vec![t.cos(), t.sin()]).unwrap()
    }

    #[test]
    fn two_triad_fixture_yields_two_modes() {
        let pts: Vec<UnitVector> = [-10.0, 0.0, 10.0, 170.0, 180.0, 190.0].iter().map(|&a| circle(a)).collect();
        let rk = knn_radii(&pts, 2).unwrap();
        let fhat = vec![0.5, 0.9, 0.4, 0.3, 0.8, 0.6];
        let set = recover_modes_from(&pts, &fhat, &rk, MIN_ALPHA, 0.05, 2).unwrap();
        assert_eq!(set.indices(), vec![1, 4]);
        assert_eq!(set.modes[0].level, 0.9);
        assert_eq!(set.modes[1].level, 0.8);
        assert_eq!(set.modes, naive_recover(&pts, &fhat, &rk, MIN_ALPHA, 0.05));
    }

    #[test]
    fn gamma_spot_value() {
        let (d, m, k, n, sup, delta) = (3, 10_000.0_f64, 500.0, 10_000.0, 0.5, 0.05);
        let s = 4.0 * std::f64::consts::PI;
        let l = (m / delta).ln();
        let alpha = 2.0 * (k * s * sup * l / (m * n)).sqrt() + 2.0 * l / (3.0 * n);
        let want = alpha / (s * k / m);
        let got = gamma_n(d, 10_000, 500, 10_000, sup, delta).unwrap();
        assert!(((got - want) / want).abs() < 1e-12);
        assert!(got > 0.0);
        assert!(gamma_n(d, 10_000, 500, 20_000, sup, delta).unwrap() < got);
        assert!(gamma_n(d, 10_000, 500, 10_000, sup, 0.0).is_err());
    }

    #[test]
    fn single_mode_basics() {
        let bank = Arc::new(make_bank(3, 100, 1).unwrap());
        let data = sample_uniform(3, 1, &mut seeds::rng(2)).unwrap();
        let model = fit(Arc::clone(&bank), 5, &data).unwrap();
        assert_eq!(single_mode(&model, &data).unwrap(), data[0]);
        assert!(single_mode(&model, &[]).is_err());
    }

    #[test]
    fn argmax_ties_to_smallest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax(&[]), None);
    }

    #[test]
    fn count_scaling_keeps_argmax() {
        let bank = Arc::new(make_bank(3, 200, 4).unwrap());
        let data = sample_uniform(3, 300, &mut seeds::rng(5)).unwrap();
        let model = fit(Arc::clone(&bank), 10, &data).unwrap();
        let i = single_mode_index(&model, &data).unwrap();
        for factor in [2u64, 7] {
            let scaled: Vec<u64> = model.counts().iter().map(|c| c * factor).collect();
            let big = EasModel::from_counts(Arc::clone(&bank), 10, scaled, model.n() * factor).unwrap();
            assert_eq!(single_mode_index(&big, &data).unwrap(), i);
        }
    }

    #[test]
    fn modes_are_samples_and_first_is_global_max() {
        let bank = Arc::new(make_bank(3, 400, 9).unwrap());
        let data = sample_uniform(3, 400, &mut seeds::rng(10)).unwrap();
        let model = fit(bank, 12, &data).unwrap();
        let set = recover_modes(&model, &data, 12, MIN_ALPHA, EpsTilde::Auto).unwrap();
        assert!(!set.is_empty());
        assert_eq!(set.modes[0].index, single_mode_index(&model, &data).unwrap());
        assert!(set.eps_tilde > 0.0);
        for w in set.modes.windows(2) {
            assert!(w[0].level >= w[1].level);
        }
        let again = recover_modes(&model, &data, 12, MIN_ALPHA, EpsTilde::Auto).unwrap();
        assert_eq!(set, again);
        assert!(recover_modes(&model, &data, 12, 1.0, EpsTilde::Auto).is_err());
        assert!(recover_modes(&model, &[], 12, MIN_ALPHA, EpsTilde::Auto).is_err());
    }

    #[test]
    fn single_point_data() {
        let bank = Arc::new(make_bank(3, 20, 9).unwrap());
        let data = sample_uniform(3, 1, &mut seeds::rng(1)).unwrap();
        let model = fit(bank, 3, &data).unwrap();
        let set = recover_modes(&model, &data, 3, MIN_ALPHA, EpsTilde::Fixed(0.0)).unwrap();
        assert_eq!(set.indices(), vec![0]);
    }

    #[test]
    fn csv_layout() {
        let pts = vec![circle(0.0), circle(90.0)];
        let set = ModeSet {
            modes: vec![Mode { index: 1, fhat: 2.5, level: 2.5 }],
            eps_tilde: 0.1,
            alpha: MIN_ALPHA,
            k_graph: 1,
        };
        let mut buf = Vec::new();
        set.write_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "schema_version,mode_rank,sample_index,x0,x1,fhat,discovery_level");
        assert!(lines.next().unwrap().starts_with("1,0,1,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn incremental_matches_naive(seed in 0u64..10_000, n in 2usize..40, quantize in any::<bool>(), eps_frac in 0.0f64..0.5) {
            let mut rng = seeds::rng(seed);
            let pts = sample_uniform(3, n, &mut rng).unwrap();
            let mut fhat: Vec<f64> = pts.iter().map(|p| (3.0 * p.coords()[0]).exp() + p.coords()[1]).collect();
            if quantize {
                fhat.iter_mut().for_each(|v| *v = (*v * 2.0).round() / 2.0 + 0.0);
            }
            let k = 1 + seed as usize % (n - 1);
            let rk = knn_radii(&pts, k).unwrap();
            let alpha = MIN_ALPHA * (1.0 + (seed % 3) as f64 * 0.5);
            let eps = eps_frac * fhat.iter().copied().fold(0.0, f64::max);
            let fast = recover_modes_from(&pts, &fhat, &rk, alpha, eps, k).unwrap();
            prop_assert_eq!(fast.modes, naive_recover(&pts, &fhat, &rk, alpha, eps));
        }
    }
}
