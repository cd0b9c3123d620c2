//! Geometry on the unit sphere `S^{d-1}` embedded in `R^d`.
//!
//! All distances are chordal (Euclidean in the ambient space). A "cap" of
//! radius `r` around `x` is `{y : |x - y| <= r}`; its uniform mass has an
//! exact expression through the regularized incomplete beta function, since
//! the first coordinate of a uniform point satisfies
//! `theta_1^2 ~ Beta(1/2, (d-1)/2)`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{beta_reg_split, ln_gamma};

/// Inputs whose norm is within this distance of 1 are renormalized.
pub const NORM_TOLERANCE: f64 = 1e-6;

/// A point on `S^{d-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Accepts coordinates within [`NORM_TOLERANCE`] of unit norm and
    /// renormalizes them. Coordinates already unit to rounding error are
    /// kept bit for bit, so stored points reload unchanged.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        let norm = norm(&coords);
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotUnitNorm(norm));
        }
        if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(UnitVector(coords));
        }
        Ok(Self::scaled(coords, norm))
    }

    /// Projects any nonzero vector onto the sphere.
    pub fn normalize(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        let norm = norm(&coords);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotUnitNorm(norm));
        }
        Ok(Self::scaled(coords, norm))
    }

    fn scaled(mut coords: Vec<f64>, norm: f64) -> Self {
        if norm != 1.0 {
            coords.iter_mut().for_each(|c| *c /= norm);
        }
        UnitVector(coords)
    }

    /// The standard basis vector `e_axis`.
    pub fn basis(d: usize, axis: usize) -> Result<Self> {
        check_dim(d)?;
        if axis >= d {
            return Err(Error::InvalidParameter(format!(
                "axis {axis} out of range for dimension {d}"
            )));
        }
        let mut c = vec![0.0; d];
        c[axis] = 1.0;
        Ok(UnitVector(c))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn distance(&self, other: &UnitVector) -> f64 {
        chordal_distance(&self.0, &other.0)
    }

    pub(crate) fn check_same_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Self {
        u.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn chordal_distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

pub fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(())
}

pub(crate) fn check_all_dim(points: &[UnitVector], d: usize) -> Result<()> {
    points.iter().try_for_each(|p| p.check_same_dim(d))
}

/// `S_{d-1} = 2 pi^{d/2} / Gamma(d/2)`.
pub fn surface_area(d: usize) -> Result<f64> {
    check_dim(d)?;
    Ok(surface_area_unchecked(d))
}

pub(crate) fn surface_area_unchecked(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    (2f64.ln() + h * std::f64::consts::PI.ln() - ln_gamma(h)).exp()
}

/// One uniform point: a normalized standard Gaussian vector.
pub fn random_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> UnitVector {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&v);
        if n > 1e-300 {
            return UnitVector::scaled(v, n);
        }
    }
}

/// `count` i.i.d. uniform points on `S^{d-1}`.
pub fn sample_uniform<R: Rng + ?Sized>(d: usize, count: usize, rng: &mut R) -> Result<Vec<UnitVector>> {
    check_dim(d)?;
    Ok((0..count).map(|_| random_unit(d, rng)).collect())
}

/// A chordal-radius cap on `S^{d-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapSpec {
    d: usize,
    r: f64,
}

impl CapSpec {
    pub fn new(d: usize, r: f64) -> Result<Self> {
        check_dim(d)?;
        if !(0.0..=2.0).contains(&r) {
            return Err(Error::domain("r", r, "[0, 2]"));
        }
        Ok(CapSpec { d, r })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    /// Uniform probability mass of the cap.
    pub fn mass(&self) -> f64 {
        let (d, r) = (self.d, self.r);
        let r2 = r * r;
        if r2 <= 2.0 {
            // P(theta_1 >= t) with t = 1 - r^2/2 >= 0:
            // 1/2 * P(theta_1^2 >= t^2) = 1/2 * I_{1 - t^2}((d-1)/2, 1/2).
            let t = 1.0 - 0.5 * r2;
            let one_minus_t2 = r2 - 0.25 * r2 * r2;
            0.5 * beta_reg_split(0.5 * (d as f64 - 1.0), 0.5, one_minus_t2, t * t)
        } else {
            let mirrored = CapSpec {
                d,
                r: (4.0 - r2).max(0.0).sqrt(),
            };
            1.0 - mirrored.mass()
        }
    }

    /// Surface area of the cap.
    pub fn volume(&self) -> f64 {
        self.mass() * surface_area_unchecked(self.d)
    }
}

/// Uniform probability of a chordal-radius `r` cap on `S^{d-1}`.
pub fn cap_mass(d: usize, r: f64) -> Result<f64> {
    Ok(CapSpec::new(d, r)?.mass())
}

/// `(d-1)`-dimensional volume of a chordal-radius `r` cap.
pub fn cap_volume(d: usize, r: f64) -> Result<f64> {
    Ok(CapSpec::new(d, r)?.volume())
}

/// Chordal radius of the cap with the given uniform mass (bisection).
pub fn cap_radius(d: usize, mass: f64) -> Result<f64> {
    check_dim(d)?;
    if !(0.0..=1.0).contains(&mass) {
        return Err(Error::domain("mass", mass, "[0, 1]"));
    }
    if mass == 0.0 {
        return Ok(0.0);
    }
    if mass == 1.0 {
        return Ok(2.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (CapSpec { d, r: mid }).mass() < mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let m_lo = (CapSpec { d, r: lo }).mass();
    let m_hi = (CapSpec { d, r: hi }).mass();
    Ok(if (mass - m_lo).abs() <= (m_hi - mass).abs() { lo } else { hi })
}
