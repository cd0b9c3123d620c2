use std::sync::Arc;

use rayon::prelude::*;

use super::bank::{ProjectionBank, Scratch, SparseCode};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::sphere::{self, UnitVector};

const CHUNK: usize = 2048;

/// A fitted expand-and-sparsify density estimator.
///
/// Holds integer activation counts only; the empirical masses
/// `f_n(C_j) = c_j / n` are formed at evaluation time, so
/// `sum_j c_j == n * k` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct EasModel {
    bank: Arc<ProjectionBank>,
    k: usize,
    counts: Vec<u64>,
    n: u64,
    norm_const: f64,
}

impl EasModel {
    /// Assembles a model from its parts, checking the count invariants.
    pub fn from_counts(bank: Arc<ProjectionBank>, k: usize, counts: Vec<u64>, n: u64) -> Result<Self> {
        bank.check_k(k)?;
        if counts.len() != bank.m() {
            return Err(Error::InvalidParameter(format!(
                "{} counts for a bank of {} rows",
                counts.len(),
                bank.m()
            )));
        }
        if n == 0 {
            return Err(Error::Empty("training data"));
        }
        let total: u64 = counts.iter().sum();
        if total != n * k as u64 {
            return Err(Error::InvalidParameter(format!(
                "counts sum to {total}, expected n * k = {}",
                n * k as u64
            )));
        }
        if let Some(c) = counts.iter().find(|&&c| c > n) {
            return Err(Error::InvalidParameter(format!("count {c} exceeds n = {n}")));
        }
        let norm_const = bank.m() as f64
            / ((k * k) as f64 * sphere::surface_area_unchecked(bank.dim()));
        Ok(EasModel {
            bank,
            k,
            counts,
            n,
            norm_const,
        })
    }

    /// Fits from ranked codes whose depth is at least `k`.
    pub fn from_ranked(bank: Arc<ProjectionBank>, ranked: &RankedCodes, k: usize) -> Result<Self> {
        ranked.check_depth(k)?;
        if ranked.is_empty() {
            return Err(Error::Empty("training data"));
        }
        let mut counts = vec![0u64; bank.m()];
        for i in 0..ranked.len() {
            for &j in ranked.prefix(i, k) {
                counts[j as usize] += 1;
            }
        }
        Self::from_counts(bank, k, counts, ranked.len() as u64)
    }

    pub fn bank(&self) -> &ProjectionBank {
        &self.bank
    }

    pub fn shared_bank(&self) -> Arc<ProjectionBank> {
        Arc::clone(&self.bank)
    }

    pub fn dim(&self) -> usize {
        self.bank.dim()
    }

    pub fn m(&self) -> usize {
        self.bank.m()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `m / (k^2 S_{d-1})`.
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    pub fn encode(&self, x: &UnitVector) -> Result<SparseCode> {
        self.bank.encode(self.k, x)
    }

    fn value_of_sum(&self, active_total: u64) -> f64 {
        self.norm_const * active_total as f64 / self.n as f64
    }

    fn value_of_ranked(&self, ranked: &[u32]) -> f64 {
        self.value_of_sum(ranked.iter().map(|&j| self.counts[j as usize]).sum())
    }

    pub fn evaluate(&self, x: &UnitVector) -> Result<f64> {
        x.check_same_dim(self.dim())?;
        let mut out = Vec::with_capacity(self.k);
        self.bank
            .rank_into(x.coords(), self.k, &mut Scratch::default(), &mut out);
        Ok(self.value_of_ranked(&out))
    }

    pub fn evaluate_batch(&self, xs: &[UnitVector]) -> Result<Vec<f64>> {
        sphere::check_all_dim(xs, self.dim())?;
        Ok(xs
            .par_iter()
            .map_init(
                || (Scratch::default(), Vec::with_capacity(self.k)),
                |(scratch, out), x| {
                    out.clear();
                    self.bank.rank_into(x.coords(), self.k, scratch, out);
                    self.value_of_ranked(out)
                },
            )
            .collect())
    }

    /// Evaluates at point `i` of a ranked batch; bitwise equal to
    /// [`evaluate`](Self::evaluate) at the same point.
    pub fn evaluate_ranked(&self, ranked: &RankedCodes, i: usize) -> Result<f64> {
        ranked.check_depth(self.k)?;
        Ok(self.value_of_ranked(ranked.prefix(i, self.k)))
    }

    /// Evaluates every point of a ranked batch.
    pub fn evaluate_all_ranked(&self, ranked: &RankedCodes) -> Result<Vec<f64>> {
        ranked.check_depth(self.k)?;
        Ok((0..ranked.len())
            .map(|i| self.value_of_ranked(ranked.prefix(i, self.k)))
            .collect())
    }
}

impl Density for EasModel {
    fn dim(&self) -> usize {
        self.bank.dim()
    }

    fn density(&self, x: &UnitVector) -> Result<f64> {
        self.evaluate(x)
    }

    fn density_batch(&self, xs: &[UnitVector]) -> Result<Vec<f64>> {
        self.evaluate_batch(xs)
    }
}

/// Accumulates activation counts chunk by chunk. Counts from fitters over
/// disjoint data merge by addition.
#[derive(Debug, Clone)]
pub struct EasFitter {
    bank: Arc<ProjectionBank>,
    k: usize,
    counts: Vec<u64>,
    n: u64,
}

impl EasFitter {
    pub fn new(bank: Arc<ProjectionBank>, k: usize) -> Result<Self> {
        bank.check_k(k)?;
        let m = bank.m();
        Ok(EasFitter {
            bank,
            k,
            counts: vec![0; m],
            n: 0,
        })
    }

    pub fn absorb(&mut self, data: &[UnitVector]) -> Result<()> {
        sphere::check_all_dim(data, self.bank.dim())?;
        let (bank, k, m) = (&*self.bank, self.k, self.bank.m());
        let partial = data
            .par_chunks(CHUNK)
            .map_init(
                || (Scratch::default(), Vec::with_capacity(k)),
                |(scratch, out), chunk| {
                    let mut counts = vec![0u64; m];
                    for x in chunk {
                        out.clear();
                        bank.rank_into(x.coords(), k, scratch, out);
                        for &j in out.iter() {
                            counts[j as usize] += 1;
                        }
                    }
                    counts
                },
            )
            .reduce_with(|mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            });
        if let Some(p) = partial {
            self.counts.iter_mut().zip(p).for_each(|(x, y)| *x += y);
        }
        self.n += data.len() as u64;
        Ok(())
    }

    pub fn merge(&mut self, other: EasFitter) -> Result<()> {
        if other.k != self.k || *other.bank != *self.bank {
            return Err(Error::InvalidParameter(
                "cannot merge fitters built on different banks or sparsities".into(),
            ));
        }
        self.counts
            .iter_mut()
            .zip(other.counts)
            .for_each(|(x, y)| *x += y);
        self.n += other.n;
        Ok(())
    }

    pub fn finish(self) -> Result<EasModel> {
        EasModel::from_counts(self.bank, self.k, self.counts, self.n)
    }
}

/// Counts `c_j = #{i : j in encode(x_i)}` over `data`.
pub fn fit(bank: Arc<ProjectionBank>, k: usize, data: &[UnitVector]) -> Result<EasModel> {
    if data.is_empty() {
        return Err(Error::Empty("training data"));
    }
    let mut fitter = EasFitter::new(bank, k)?;
    fitter.absorb(data)?;
    fitter.finish()
}

pub fn evaluate(model: &EasModel, x: &UnitVector) -> Result<f64> {
    model.evaluate(x)
}

pub fn evaluate_batch(model: &EasModel, xs: &[UnitVector]) -> Result<Vec<f64>> {
    model.evaluate_batch(xs)
}

/// The `depth` best coordinates of every point in a batch, best first.
///
/// Because selection follows one total order (score, then smaller index),
/// the first `k` entries of a row are exactly the code for sparsity `k`.
/// This lets a sweep over `k` encode each point once.
#[derive(Debug, Clone)]
pub struct RankedCodes {
    depth: usize,
    ranks: Vec<u32>,
}

impl RankedCodes {
    pub fn new(bank: &ProjectionBank, points: &[UnitVector], depth: usize) -> Result<Self> {
        bank.check_k(depth)?;
        sphere::check_all_dim(points, bank.dim())?;
        let chunks: Vec<Vec<u32>> = points
            .par_chunks(CHUNK)
            .map_init(Scratch::default, |scratch, chunk| {
                let mut out = Vec::with_capacity(chunk.len() * depth);
                for x in chunk {
                    bank.rank_into(x.coords(), depth, scratch, &mut out);
                }
                out
            })
            .collect();
        Ok(RankedCodes {
            depth,
            ranks: chunks.concat(),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.ranks.len() / self.depth
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn prefix(&self, i: usize, k: usize) -> &[u32] {
        &self.ranks[i * self.depth..i * self.depth + k]
    }

    pub fn code(&self, i: usize, k: usize) -> Result<SparseCode> {
        self.check_depth(k)?;
        Ok(SparseCode::from_ranked(self.prefix(i, k)))
    }

    fn check_depth(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.depth {
            return Err(Error::InvalidParameter(format!(
                "k = {k} exceeds ranked depth {}",
                self.depth
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eas::make_bank;
    use crate::seeds;
    use crate::sphere::sample_uniform;

    fn bank(d: usize, m: usize, seed: u64) -> Arc<ProjectionBank> {
        Arc::new(make_bank(d, m, seed).unwrap())
    }

    #[test]
    fn single_point_fit() {
        let b = bank(3, 50, 1);
        let x = sample_uniform(3, 1, &mut seeds::rng(2)).unwrap();
        let model = fit(b, 7, &x).unwrap();
        assert_eq!(model.counts().iter().filter(|&&c| c == 1).count(), 7);
        assert_eq!(model.counts().iter().sum::<u64>(), 7);
    }

    #[test]
    fn duplicate_points_double_counts() {
        let b = bank(3, 40, 3);
        let x = sample_uniform(3, 1, &mut seeds::rng(4)).unwrap();
        let data = vec![x[0].clone(), x[0].clone()];
        let model = fit(b, 5, &data).unwrap();
        let nz: Vec<u64> = model.counts().iter().copied().filter(|&c| c > 0).collect();
        assert_eq!(nz, vec![2; 5]);
    }

    #[test]
    fn empty_data_rejected() {
        assert!(matches!(fit(bank(3, 10, 1), 2, &[]), Err(Error::Empty(_))));
        assert!(fit(bank(3, 10, 1), 11, &sample_uniform(3, 2, &mut seeds::rng(1)).unwrap()).is_err());
    }

    #[test]
    fn zero_count_query_is_zero() {
        // two antipodal clusters of rows; data sits on one side only
        let rows = vec![1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0];
        let b = Arc::new(ProjectionBank::from_rows(2, rows, 0).unwrap());
        let data = vec![UnitVector::new(vec![1.0, 0.0]).unwrap()];
        let model = fit(b, 1, &data).unwrap();
        let q = UnitVector::new(vec![-1.0, 0.0]).unwrap();
        assert_eq!(model.evaluate(&q).unwrap(), 0.0);
        let want = 4.0 / (2.0 * std::f64::consts::PI);
        assert!((model.evaluate(&data[0]).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn equal_counts_formula() {
        // every active coordinate holds count c: value = m c / (n k S)
        let b = bank(3, 30, 9);
        let x = sample_uniform(3, 1, &mut seeds::rng(10)).unwrap();
        let data = vec![x[0].clone(); 3];
        let model = fit(b, 4, &data).unwrap();
        let s = 4.0 * std::f64::consts::PI;
        let want = 30.0 * 3.0 / (3.0 * 4.0 * s);
        assert!((model.evaluate(&x[0]).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn chunked_fit_matches_one_shot() {
        let b = bank(4, 300, 5);
        let data = sample_uniform(4, 5000, &mut seeds::rng(6)).unwrap();
        let whole = fit(Arc::clone(&b), 12, &data).unwrap();
        let mut left = EasFitter::new(Arc::clone(&b), 12).unwrap();
        left.absorb(&data[..1234]).unwrap();
        let mut right = EasFitter::new(Arc::clone(&b), 12).unwrap();
        right.absorb(&data[1234..]).unwrap();
        left.merge(right).unwrap();
        assert_eq!(left.finish().unwrap(), whole);
    }

    #[test]
    fn ranked_prefixes_match_direct_codes() {
        let b = bank(3, 120, 8);
        let pts = sample_uniform(3, 200, &mut seeds::rng(9)).unwrap();
        let ranked = RankedCodes::new(&b, &pts, 20).unwrap();
        for k in [1, 5, 20] {
            let model = EasModel::from_ranked(Arc::clone(&b), &ranked, k).unwrap();
            assert_eq!(model, fit(Arc::clone(&b), k, &pts).unwrap());
            for (i, p) in pts.iter().enumerate().step_by(17) {
                assert_eq!(ranked.code(i, k).unwrap(), b.encode(k, p).unwrap());
                assert_eq!(
                    model.evaluate_ranked(&ranked, i).unwrap().to_bits(),
                    model.evaluate(p).unwrap().to_bits()
                );
            }
        }
        assert!(ranked.code(0, 21).is_err());
    }

    #[test]
    fn batch_equals_loop_and_permutes() {
        let b = bank(3, 500, 11);
        let train = sample_uniform(3, 2000, &mut seeds::rng(12)).unwrap();
        let model = fit(b, 15, &train).unwrap();
        let qs = sample_uniform(3, 300, &mut seeds::rng(13)).unwrap();
        let batch = model.evaluate_batch(&qs).unwrap();
        for (q, v) in qs.iter().zip(&batch) {
            assert_eq!(model.evaluate(q).unwrap().to_bits(), v.to_bits());
        }
        let single = model.evaluate_batch(&qs[..1]).unwrap();
        assert_eq!(single[0].to_bits(), batch[0].to_bits());
        let rev: Vec<UnitVector> = qs.iter().rev().cloned().collect();
        let mut back = model.evaluate_batch(&rev).unwrap();
        back.reverse();
        assert_eq!(back, batch);
    }

    #[test]
    fn norm_const_invariant() {
        let model = fit(bank(5, 64, 1), 8, &sample_uniform(5, 10, &mut seeds::rng(2)).unwrap()).unwrap();
        let want = 64.0 / (64.0 * sphere::surface_area(5).unwrap());
        assert!(((model.norm_const() - want) / want).abs() <= 1e-12);
    }

    #[test]
    fn from_counts_checks_conservation() {
        let b = bank(3, 4, 1);
        assert!(EasModel::from_counts(Arc::clone(&b), 2, vec![1, 1, 0, 1], 1).is_err());
        assert!(EasModel::from_counts(Arc::clone(&b), 2, vec![2, 0, 0, 0], 1).is_err());
        assert!(EasModel::from_counts(b, 2, vec![1, 1, 0, 0], 1).is_ok());
    }
}
