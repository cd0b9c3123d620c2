use serde::{Deserialize, Serialize};

use super::select::TopK;
use crate::error::{Error, Result};
use crate::seeds;
use crate::sphere::{self, check_dim, UnitVector};

/// The random expansion matrix `Theta`: `m` unit rows in `R^d`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBank {
    d: usize,
    m: usize,
    seed: u64,
    rows: Vec<f64>,
}

impl ProjectionBank {
    /// `m` i.i.d. rows uniform on `S^{d-1}`, drawn from `seed`.
    pub fn new(d: usize, m: usize, seed: u64) -> Result<Self> {
        check_dim(d)?;
        if m == 0 {
            return Err(Error::InvalidParameter("expansion size m must be at least 1".into()));
        }
        let mut rng = seeds::rng(seed);
        let mut rows = Vec::with_capacity(m * d);
        for _ in 0..m {
            rows.extend_from_slice(sphere::random_unit(d, &mut rng).coords());
        }
        Ok(ProjectionBank { d, m, seed, rows })
    }

    /// Rebuilds a bank from stored rows. Each row must already be unit norm
    /// to within 1e-9 and is kept bit-for-bit.
    pub fn from_rows(d: usize, rows: Vec<f64>, seed: u64) -> Result<Self> {
        check_dim(d)?;
        if rows.is_empty() || !rows.len().is_multiple_of(d) {
            return Err(Error::ModelFormat(format!(
                "{} projection coefficients do not form rows of length {d}",
                rows.len()
            )));
        }
        for (j, row) in rows.chunks_exact(d).enumerate() {
            let n = sphere::dot(row, row).sqrt();
            if !((n - 1.0).abs() <= 1e-9) {
                return Err(Error::ModelFormat(format!("row {j} has norm {n}")));
            }
        }
        let m = rows.len() / d;
        Ok(ProjectionBank { d, m, seed, rows })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j * self.d..(j + 1) * self.d]
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub(crate) fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.m {
            return Err(Error::InvalidParameter(format!(
                "sparsity k = {k} must lie in [1, m = {}]",
                self.m
            )));
        }
        Ok(())
    }

    /// `y = Theta x`.
    pub(crate) fn project(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.rows.chunks_exact(self.d).map(|row| sphere::dot(row, x)));
    }

    /// Appends the indices of the `k` largest projections, best first.
    pub(crate) fn rank_into(&self, x: &[f64], k: usize, scratch: &mut Scratch, out: &mut Vec<u32>) {
        self.project(x, &mut scratch.scores);
        scratch.topk.select_into(&scratch.scores, k, out);
    }

    /// Code of `x`: the `k` coordinates with the largest `theta_j^T x`,
    /// ties going to the smaller index.
    pub fn encode(&self, k: usize, x: &UnitVector) -> Result<SparseCode> {
        self.check_k(k)?;
        x.check_same_dim(self.d)?;
        let mut out = Vec::with_capacity(k);
        self.rank_into(x.coords(), k, &mut Scratch::default(), &mut out);
        Ok(SparseCode::from_ranked(&out))
    }
}

/// Per-thread buffers for encoding.
#[derive(Default)]
pub(crate) struct Scratch {
    scores: Vec<f64>,
    topk: TopK,
}

/// `make_bank(d, m, seed)`.
pub fn make_bank(d: usize, m: usize, seed: u64) -> Result<ProjectionBank> {
    ProjectionBank::new(d, m, seed)
}

/// The active coordinates of one encoded point, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparseCode(Vec<usize>);

impl SparseCode {
    pub(crate) fn from_ranked(ranked: &[u32]) -> Self {
        let mut v: Vec<usize> = ranked.iter().map(|&j| j as usize).collect();
        v.sort_unstable();
        SparseCode(v)
    }

    pub fn active(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    /// Dense 0/1 indicator of length `m`.
    pub fn to_dense(&self, m: usize) -> Vec<u8> {
        let mut z = vec![0u8; m];
        for &j in &self.0 {
            z[j] = 1;
        }
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn compass() -> ProjectionBank {
        let rows = vec![1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0];
        ProjectionBank::from_rows(2, rows, 0).unwrap()
    }

    #[test]
    fn bank_shape_and_norms() {
        assert!(make_bank(3, 0, 1).is_err());
        assert!(make_bank(1, 4, 1).is_err());
        let b = make_bank(2, 4, 17).unwrap();
        assert_eq!(b.m(), 4);
        for j in 0..4 {
            let r = b.row(j);
            assert!((sphere::dot(r, r).sqrt() - 1.0).abs() <= 1e-9);
        }
        assert_eq!(b, make_bank(2, 4, 17).unwrap());
    }

    #[test]
    fn large_bank_is_centered() {
        let b = make_bank(3, 10_000, 23).unwrap();
        let mut mean = [0.0; 3];
        for row in b.rows().chunks_exact(3) {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v / 1e4;
            }
        }
        assert!(sphere::dot(&mean, &mean).sqrt() <= 0.03);
    }

    #[test]
    fn compass_codes() {
        let b = compass();
        let x = UnitVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(b.encode(1, &x).unwrap().active(), &[0]);
        assert_eq!(b.encode(2, &x).unwrap().active(), &[0, 1]);
        assert_eq!(b.encode(4, &x).unwrap().active(), &[0, 1, 2, 3]);
        assert!(b.encode(0, &x).is_err());
        assert!(b.encode(5, &x).is_err());
        let wrong = UnitVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(b.encode(1, &wrong).is_err());
    }

    #[test]
    fn code_ignores_scale() {
        let b = make_bank(3, 200, 5).unwrap();
        let raw = vec![0.3, -1.2, 0.4];
        let x = UnitVector::normalize(raw.clone()).unwrap();
        let x2 = UnitVector::normalize(raw.iter().map(|v| 2.0 * v).collect()).unwrap();
        assert_eq!(b.encode(10, &x).unwrap(), b.encode(10, &x2).unwrap());
    }

    #[test]
    fn rejects_non_unit_rows() {
        assert!(ProjectionBank::from_rows(2, vec![1.0, 1.0], 0).is_err());
        assert!(ProjectionBank::from_rows(2, vec![1.0, 0.0, 1.0], 0).is_err());
    }
}
