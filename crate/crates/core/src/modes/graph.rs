use rayon::prelude::*;

use super::union_find::UnionFind;
use crate::error::{Error, Result};
use crate::sphere::{self, UnitVector};

/// Smallest edge scale the density graph admits.
pub const MIN_ALPHA: f64 = std::f64::consts::SQRT_2;

/// Distance from every sample point to its `k`-th nearest other sample point.
pub fn knn_radii(data: &[UnitVector], k: usize) -> Result<Vec<f64>> {
    let n = data.len();
    if k == 0 || k + 1 > n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in [1, n - 1 = {}]",
            n.saturating_sub(1)
        )));
    }
    let d = data[0].dim();
    sphere::check_all_dim(data, d)?;
    Ok(data
        .par_iter()
        .enumerate()
        .map_init(Vec::new, |buf: &mut Vec<f64>, (i, x)| {
            buf.clear();
            buf.extend(
                data.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, y)| sphere::squared_distance(x.coords(), y.coords())),
            );
            let (_, kth, _) = buf.select_nth_unstable_by(k - 1, f64::total_cmp);
            kth.sqrt()
        })
        .collect())
}

/// `G(lambda)`: vertices are sample points with `fhat >= lambda`; two
/// vertices share an edge when `|x_i - x_j| <= alpha * min(r_k(x_i), r_k(x_j))`.
#[derive(Debug, Clone)]
pub struct DensityGraph {
    points: Vec<UnitVector>,
    fhat: Vec<f64>,
    rk: Vec<f64>,
    alpha: f64,
    lambda: f64,
}

impl DensityGraph {
    /// Builds the graph at level `-inf` (every point is a vertex).
    pub fn new(points: Vec<UnitVector>, fhat: Vec<f64>, rk: Vec<f64>, alpha: f64) -> Result<Self> {
        if fhat.len() != points.len() || rk.len() != points.len() {
            return Err(Error::InvalidParameter(format!(
                "{} points, {} density values, {} radii",
                points.len(),
                fhat.len(),
                rk.len()
            )));
        }
        check_alpha(alpha)?;
        if let Some(p) = points.first() {
            sphere::check_all_dim(&points, p.dim())?;
        }
        Ok(DensityGraph {
            points,
            fhat,
            rk,
            alpha,
            lambda: f64::NEG_INFINITY,
        })
    }

    pub fn at_level(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn set_level(&mut self, lambda: f64) {
        self.lambda = lambda;
    }

    pub fn level(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn fhat(&self) -> &[f64] {
        &self.fhat
    }

    pub fn radii(&self) -> &[f64] {
        &self.rk
    }

    pub fn is_vertex(&self, i: usize) -> bool {
        self.fhat[i] >= self.lambda
    }

    pub fn vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_vertex(i)).collect()
    }

    /// Edge rule ignoring the level.
    pub(crate) fn linked(&self, i: usize, j: usize) -> bool {
        i != j && self.points[i].distance(&self.points[j]) <= self.alpha * self.rk[i].min(self.rk[j])
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.is_vertex(i) && self.is_vertex(j) && self.linked(i, j)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= MIN_ALPHA) || !alpha.is_finite() {
        return Err(Error::domain("alpha", alpha, "[sqrt 2, inf)"));
    }
    Ok(())
}

/// Connected components of `G(lambda)`. Each component is sorted and the
/// list is ordered by smallest member, so a component's id is its first entry.
pub fn connected_components(graph: &DensityGraph) -> Vec<Vec<usize>> {
    let verts = graph.vertices();
    let mut uf = UnionFind::new(graph.len());
    for (a, &i) in verts.iter().enumerate() {
        for &j in &verts[a + 1..] {
            if graph.linked(i, j) {
                uf.union(i, j);
            }
        }
    }
    let mut slot = vec![usize::MAX; graph.len()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for &i in &verts {
        let r = uf.find(i);
        if slot[r] == usize::MAX {
            slot[r] = comps.len();
            comps.push(Vec::new());
        }
        comps[slot[r]].push(i);
    }
    comps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use crate::sphere::sample_uniform;

    fn circle(deg: f64) -> UnitVector {
        let t = deg.to_radians();
        UnitVector::new(vec![t.cos(), t.sin()]).unwrap()
    }

    #[test]
    fn radii_small_cases() {
        let a = circle(0.0);
        let b = circle(60.0);
        let t = a.distance(&b);
        assert_eq!(knn_radii(&[a.clone(), b.clone()], 1).unwrap(), vec![t, t]);
        let c = circle(120.0);
        let tri = [circle(90.0), circle(210.0), circle(330.0)];
        let s = tri[0].distance(&tri[1]);
        for r in knn_radii(&tri, 2).unwrap() {
            assert!((r - s).abs() < 1e-12);
        }
        assert!(knn_radii(&[a.clone(), b.clone(), c], 3).is_err());
        assert!(knn_radii(&[a], 0).is_err());
    }

    #[test]
    fn radii_match_sorted_oracle() {
        let pts = sample_uniform(3, 20, &mut seeds::rng(3)).unwrap();
        for k in [1, 5, 19] {
            let got = knn_radii(&pts, k).unwrap();
            for (i, p) in pts.iter().enumerate() {
                let mut ds: Vec<f64> = pts
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, q)| p.distance(q))
                    .collect();
                ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert_eq!(got[i], ds[k - 1]);
            }
        }
    }

    fn two_triads() -> DensityGraph {
        let pts: Vec<UnitVector> = [-10.0, 0.0, 10.0, 170.0, 180.0, 190.0]
            .iter()
            .map(|&a| circle(a))
            .collect();
        let rk = knn_radii(&pts, 2).unwrap();
        let fhat = vec![0.5, 0.9, 0.4, 0.3, 0.8, 0.6];
        DensityGraph::new(pts, fhat, rk, MIN_ALPHA).unwrap()
    }

    #[test]
    fn antipodal_triads_split_in_two() {
        let g = two_triads();
        assert_eq!(connected_components(&g), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn level_above_max_is_empty() {
        let g = two_triads().at_level(1.0);
        assert!(connected_components(&g).is_empty());
        let g = two_triads().at_level(0.55);
        assert_eq!(connected_components(&g), vec![vec![1], vec![4, 5]]);
    }

    #[test]
    fn huge_alpha_joins_everything() {
        let g = two_triads();
        let min_r = g.radii().iter().copied().fold(f64::INFINITY, f64::min);
        let (pts, fhat, rk) = (g.points().to_vec(), g.fhat().to_vec(), g.radii().to_vec());
        let g = DensityGraph::new(pts, fhat, rk, 2.0 / min_r + 1.0).unwrap();
        assert_eq!(connected_components(&g), vec![vec![0, 1, 2, 3, 4, 5]]);
    }

    #[test]
    fn alpha_floor() {
        let g = two_triads();
        let (pts, fhat, rk) = (g.points().to_vec(), g.fhat().to_vec(), g.radii().to_vec());
        assert!(DensityGraph::new(pts, fhat, rk, 1.0).is_err());
    }
}
