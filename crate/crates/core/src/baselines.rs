//! Comparison estimators: k-nearest-neighbor and kernel density estimates.
//!
//! The kNN estimate uses the exact surface volume of the chordal cap that
//! reaches the k-th neighbor, so it is a density on the sphere. The KDE
//! ships two kernels: a vMF kernel (a proper surface density) and the
//! ambient Gaussian kernel, which is a density on `R^d` evaluated on the
//! sphere. On the sphere both kernels are `exp(-|x - x_i|^2 / (2 h^2))` up to
//! their normalizing factor.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::special::log_bessel_i;
use crate::sphere::{self, cap_volume, UnitVector};

fn flatten(points: &[UnitVector]) -> Vec<f64> {
    points.iter().flat_map(|p| p.coords().iter().copied()).collect()
}

fn check_data(data: &[UnitVector]) -> Result<usize> {
    let first = data.first().ok_or(Error::Empty("training data"))?;
    let d = first.dim();
    sphere::check_all_dim(data, d)?;
    Ok(d)
}

/// kNN density estimate `k / (n vol(B(x, r_k(x))))` on `S^{d-1}`.
#[derive(Debug, Clone)]
pub struct KnnModel {
    d: usize,
    n: usize,
    k_nn: usize,
    flat: Vec<f64>,
}

impl KnnModel {
    pub fn new(data: &[UnitVector], k_nn: usize) -> Result<Self> {
        let d = check_data(data)?;
        if k_nn == 0 || k_nn > data.len() {
            return Err(Error::InvalidParameter(format!(
                "k_nn = {k_nn} must lie in [1, n = {}]",
                data.len()
            )));
        }
        Ok(KnnModel {
            d,
            n: data.len(),
            k_nn,
            flat: flatten(data),
        })
    }

    pub fn k_nn(&self) -> usize {
        self.k_nn
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn distances(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.flat
                .chunks_exact(self.d)
                .map(|p| sphere::squared_distance(p, x)),
        );
    }

    /// Estimate from a k-th neighbor distance. Zero distance (duplicates)
    /// gives `+inf`.
    fn estimate_at_radius(&self, k: usize, r: f64) -> f64 {
        if r == 0.0 {
            return f64::INFINITY;
        }
        let vol = cap_volume(self.d, r.min(2.0)).expect("radius clamped to [0, 2]");
        k as f64 / (self.n as f64 * vol)
    }

    /// Distance from `x` to its `k_nn`-th nearest data point.
    pub fn kth_distance(&self, x: &UnitVector) -> Result<f64> {
        x.check_same_dim(self.d)?;
        let mut buf = Vec::with_capacity(self.n);
        self.distances(x.coords(), &mut buf);
        let (_, kth, _) = buf.select_nth_unstable_by(self.k_nn - 1, f64::total_cmp);
        Ok(kth.sqrt())
    }

    /// Estimates at every query for several neighbor counts at once:
    /// `result[q][i]` uses `ks[i]` neighbors.
    pub fn multi_k_densities(&self, queries: &[UnitVector], ks: &[usize]) -> Result<Vec<Vec<f64>>> {
        sphere::check_all_dim(queries, self.d)?;
        if let Some(&bad) = ks.iter().find(|&&k| k == 0 || k > self.n) {
            return Err(Error::InvalidParameter(format!("k_nn = {bad} out of range")));
        }
        Ok(queries
            .par_iter()
            .map_init(Vec::new, |buf, q| {
                self.distances(q.coords(), buf);
                buf.sort_unstable_by(f64::total_cmp);
                ks.iter()
                    .map(|&k| self.estimate_at_radius(k, buf[k - 1].sqrt()))
                    .collect()
            })
            .collect())
    }
}

impl Density for KnnModel {
    fn dim(&self) -> usize {
        self.d
    }

    fn density(&self, x: &UnitVector) -> Result<f64> {
        Ok(self.estimate_at_radius(self.k_nn, self.kth_distance(x)?))
    }

    fn density_batch(&self, xs: &[UnitVector]) -> Result<Vec<f64>> {
        sphere::check_all_dim(xs, self.d)?;
        Ok(xs
            .par_iter()
            .map_init(Vec::new, |buf, q| {
                self.distances(q.coords(), buf);
                let (_, kth, _) = buf.select_nth_unstable_by(self.k_nn - 1, f64::total_cmp);
                self.estimate_at_radius(self.k_nn, kth.sqrt())
            })
            .collect())
    }
}

pub fn knn_density(model: &KnnModel, x: &UnitVector) -> Result<f64> {
    model.density(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `vMF(x_i, 1/h^2)` bumps; integrates to one over the sphere.
    Vmf,
    /// `(2 pi h^2)^{-d/2} exp(-|x - x_i|^2 / (2 h^2))`; a density on `R^d`.
    AmbientGaussian,
}

impl KernelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Vmf => "vmf",
            KernelKind::AmbientGaussian => "ambient-gaussian",
        }
    }

    /// Log of the factor multiplying `exp(-|x - x_i|^2 / (2 h^2))`.
    fn log_factor(self, d: usize, h: f64) -> Result<f64> {
        let df = d as f64;
        let two_pi_ln = (2.0 * std::f64::consts::PI).ln();
        Ok(match self {
            KernelKind::Vmf => {
                // C(kappa) e^{kappa x_i^T x} = C(kappa) e^{kappa} e^{-kappa |x - x_i|^2 / 2}
                let kappa = 1.0 / (h * h);
                let nu = 0.5 * df - 1.0;
                nu * kappa.ln() - 0.5 * df * two_pi_ln - log_bessel_i(nu, kappa)? + kappa
            }
            KernelKind::AmbientGaussian => -0.5 * df * (two_pi_ln + 2.0 * h.ln()),
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vmf" => Ok(KernelKind::Vmf),
            "ambient-gaussian" => Ok(KernelKind::AmbientGaussian),
            other => Err(Error::InvalidParameter(format!(
                "unknown kernel {other:?} (expected vmf or ambient-gaussian)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KdeModel {
    d: usize,
    n: usize,
    bandwidth: f64,
    kind: KernelKind,
    log_factor: f64,
    flat: Vec<f64>,
}

impl KdeModel {
    pub fn new(data: &[UnitVector], bandwidth: f64, kind: KernelKind) -> Result<Self> {
        let d = check_data(data)?;
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::domain("bandwidth", bandwidth, "(0, inf)"));
        }
        Ok(KdeModel {
            d,
            n: data.len(),
            bandwidth,
            kind,
            log_factor: kind.log_factor(d, bandwidth)?,
            flat: flatten(data),
        })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let scale = -0.5 / (self.bandwidth * self.bandwidth);
        let sum: f64 = self
            .flat
            .chunks_exact(self.d)
            .map(|p| (scale * sphere::squared_distance(p, x)).exp())
            .sum();
        (self.log_factor).exp() * sum / self.n as f64
    }

    /// Estimates at every query for several bandwidths, sharing the distance
    /// computation: `result[q][i]` uses `bandwidths[i]`.
    pub fn multi_bandwidth_densities(
        data: &[UnitVector],
        queries: &[UnitVector],
        bandwidths: &[f64],
        kind: KernelKind,
    ) -> Result<Vec<Vec<f64>>> {
        let models: Vec<KdeModel> = bandwidths
            .iter()
            .map(|&h| KdeModel::new(data, h, kind))
            .collect::<Result<_>>()?;
        let Some(first) = models.first() else {
            return Ok(vec![Vec::new(); queries.len()]);
        };
        sphere::check_all_dim(queries, first.d)?;
        let scales: Vec<f64> = bandwidths.iter().map(|h| -0.5 / (h * h)).collect();
        let flat = &first.flat;
        let d = first.d;
        Ok(queries
            .par_iter()
            .map_init(
                || vec![0.0; bandwidths.len()],
                |acc, q| {
                    acc.iter_mut().for_each(|a| *a = 0.0);
                    for p in flat.chunks_exact(d) {
                        let sq = sphere::squared_distance(p, q.coords());
                        for (a, s) in acc.iter_mut().zip(&scales) {
                            *a += (s * sq).exp();
                        }
                    }
                    acc.iter()
                        .zip(&models)
                        .map(|(a, m)| m.log_factor.exp() * a / m.n as f64)
                        .collect()
                },
            )
            .collect())
    }
}

impl Density for KdeModel {
    fn dim(&self) -> usize {
        self.d
    }

    fn density(&self, x: &UnitVector) -> Result<f64> {
        x.check_same_dim(self.d)?;
        Ok(self.eval(x.coords()))
    }
}

pub fn kde_density(model: &KdeModel, x: &UnitVector) -> Result<f64> {
    model.density(x)
}
