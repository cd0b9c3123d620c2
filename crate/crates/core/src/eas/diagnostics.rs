//! Monte-Carlo checks of the region geometry behind the estimator.
//!
//! For uniform rows, each region `C_j` should have volume close to
//! `S_{d-1} k / m`, be sandwiched between two caps around `theta_j` of
//! nearly that volume, and have diameter at most
//! `(4 / sqrt 3) (6 sqrt(d) k / m)^{1/(d-1)}`. Uniform probes estimate all
//! three per sampled region.

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;

use super::bank::{ProjectionBank, Scratch};
use crate::error::{Error, Result};
use crate::seeds;
use crate::sphere::{self, cap_mass};

#[derive(Debug, Clone, Serialize)]
pub struct RegionStat {
    pub index: usize,
    /// Probes whose code contains `index`.
    pub hits: usize,
    /// `vol(C_j) / (S_{d-1} k / m)`, estimated as `(hits / probes) * m / k`.
    pub volume_ratio: f64,
    /// Largest pairwise chordal distance among the hits (0 with < 2 hits).
    pub diameter: f64,
    /// Distance from `theta_j` to the nearest probe outside `C_j`
    /// (2 when every probe is inside).
    pub inner_radius: f64,
    /// Distance from `theta_j` to the farthest probe inside `C_j`.
    pub outer_radius: f64,
    /// Cap volumes at the two radii, in units of `S_{d-1} k / m`.
    pub inner_ratio: f64,
    pub outer_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionReport {
    pub d: usize,
    pub m: usize,
    pub k: usize,
    pub probes: usize,
    pub regions: Vec<RegionStat>,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub max_diameter: f64,
    /// `(4 / sqrt 3) (6 sqrt(d) k / m)^{1/(d-1)}`.
    pub diameter_bound: f64,
}

impl RegionReport {
    /// Share of sampled regions whose volume ratio lies in `[lo, hi]`.
    pub fn fraction_within(&self, lo: f64, hi: f64) -> f64 {
        let inside = self
            .regions
            .iter()
            .filter(|r| (lo..=hi).contains(&r.volume_ratio))
            .count();
        inside as f64 / self.regions.len() as f64
    }

    pub fn diameters_within_bound(&self) -> bool {
        self.regions.iter().all(|r| r.diameter <= self.diameter_bound)
    }
}

pub fn diameter_bound(d: usize, m: usize, k: usize) -> f64 {
    let base = 6.0 * (d as f64).sqrt() * k as f64 / m as f64;
    4.0 / 3f64.sqrt() * base.powf(1.0 / (d as f64 - 1.0))
}

/// Probes the sphere with `probes` uniform points and reports geometry for
/// `regions` coordinates drawn without replacement (all of them when
/// `regions >= m`).
pub fn region_diagnostics(
    bank: &ProjectionBank,
    k: usize,
    probes: usize,
    regions: usize,
    seed: u64,
) -> Result<RegionReport> {
    bank.check_k(k)?;
    if probes == 0 {
        return Err(Error::InvalidParameter("probes must be at least 1".into()));
    }
    if regions == 0 {
        return Err(Error::InvalidParameter("regions must be at least 1".into()));
    }
    let (d, m) = (bank.dim(), bank.m());
    let mut rng = seeds::stream(seed, "regions", 0);
    let mut sampled: Vec<usize> = index::sample(&mut rng, m, regions.min(m)).into_vec();
    sampled.sort_unstable();
    let slot_of: Vec<Option<usize>> = {
        let mut v = vec![None; m];
        for (s, &j) in sampled.iter().enumerate() {
            v[j] = Some(s);
        }
        v
    };

    let mut probe_rng = seeds::stream(seed, "probes", 0);
    let points: Vec<f64> = (0..probes)
        .flat_map(|_| sphere::random_unit(d, &mut probe_rng).into_coords())
        .collect();

    // membership[s] = probe indices inside region sampled[s]
    let mut membership: Vec<Vec<u32>> = vec![Vec::new(); sampled.len()];
    let codes: Vec<Vec<u32>> = points
        .par_chunks(d * 4096)
        .map_init(Scratch::default, |scratch, chunk| {
            let mut out = Vec::with_capacity(chunk.len() / d * k);
            for x in chunk.chunks_exact(d) {
                bank.rank_into(x, k, scratch, &mut out);
            }
            out
        })
        .collect();
    for (p, code) in codes.concat().chunks_exact(k).enumerate() {
        for &j in code {
            if let Some(s) = slot_of[j as usize] {
                membership[s].push(p as u32);
            }
        }
    }

    let unit = k as f64 / m as f64;
    let stats: Vec<RegionStat> = sampled
        .par_iter()
        .zip(membership.par_iter())
        .map(|(&j, members)| {
            let theta = bank.row(j);
            let probe = |p: u32| &points[p as usize * d..(p as usize + 1) * d];
            let mut inside = vec![false; probes];
            members.iter().for_each(|&p| inside[p as usize] = true);
            let mut outer = 0.0_f64;
            let mut inner = 2.0_f64;
            for (p, &is_in) in inside.iter().enumerate() {
                let r = sphere::chordal_distance(theta, probe(p as u32));
                if is_in {
                    outer = outer.max(r);
                } else {
                    inner = inner.min(r);
                }
            }
            let pts: Vec<&[f64]> = members.iter().map(|&p| probe(p)).collect();
            RegionStat {
                index: j,
                hits: members.len(),
                volume_ratio: members.len() as f64 / probes as f64 / unit,
                diameter: diameter(theta, &pts),
                inner_radius: inner,
                outer_radius: outer,
                inner_ratio: cap_mass(d, inner.min(2.0)).unwrap_or(f64::NAN) / unit,
                outer_ratio: cap_mass(d, outer.min(2.0)).unwrap_or(f64::NAN) / unit,
            }
        })
        .collect();

    let ratios = stats.iter().map(|s| s.volume_ratio);
    let min_ratio = ratios.clone().fold(f64::INFINITY, f64::min);
    let max_ratio = ratios.clone().fold(f64::NEG_INFINITY, f64::max);
    let mean_ratio = ratios.sum::<f64>() / stats.len() as f64;
    let max_diameter = stats.iter().map(|s| s.diameter).fold(0.0, f64::max);
    Ok(RegionReport {
        d,
        m,
        k,
        probes,
        min_ratio,
        max_ratio,
        mean_ratio,
        max_diameter,
        diameter_bound: diameter_bound(d, m, k),
        regions: stats,
    })
}

/// Exact largest pairwise distance, pruned with the triangle inequality
/// through `center`: `|a - b| <= |a - c| + |b - c|`.
fn diameter(center: &[f64], pts: &[&[f64]]) -> f64 {
    let mut by_reach: Vec<(f64, usize)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (sphere::chordal_distance(center, p), i))
        .collect();
    by_reach.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
    let mut best_sq = 0.0_f64;
    for (a, &(ra, ia)) in by_reach.iter().enumerate() {
        if 2.0 * ra <= best_sq.sqrt() {
            break;
        }
        for &(rb, ib) in &by_reach[a + 1..] {
            if ra + rb <= best_sq.sqrt() {
                break;
            }
            best_sq = best_sq.max(sphere::squared_distance(pts[ia], pts[ib]));
        }
    }
    best_sq.sqrt()
}
