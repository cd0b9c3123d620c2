//! von Mises-Fisher distributions on `S^{d-1}` and finite mixtures of them.
//!
//! Densities are with respect to the surface measure, so they integrate to
//! one over a sphere of area `S_{d-1}`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Beta, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::special::log_bessel_i;
use crate::sphere::{self, check_dim, UnitVector};

pub use crate::special::log_bessel_i as log_bessel;

/// Mean resultant length `A_d(kappa) = I_{d/2}(kappa) / I_{d/2-1}(kappa)`,
/// i.e. the expected value of `mu^T x` under `vMF(mu, kappa)`.
pub fn mean_resultant_length(d: usize, kappa: f64) -> Result<f64> {
    check_dim(d)?;
    let h = 0.5 * d as f64;
    Ok((log_bessel_i(h, kappa)? - log_bessel_i(h - 1.0, kappa)?).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawComponent", into = "RawComponent")]
pub struct VmfComponent {
    mu: UnitVector,
    kappa: f64,
    log_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct RawComponent {
    mu: UnitVector,
    kappa: f64,
}

impl TryFrom<RawComponent> for VmfComponent {
    type Error = Error;

    fn try_from(raw: RawComponent) -> Result<Self> {
        VmfComponent::new(raw.mu, raw.kappa)
    }
}

impl From<VmfComponent> for RawComponent {
    fn from(c: VmfComponent) -> Self {
        RawComponent {
            mu: c.mu,
            kappa: c.kappa,
        }
    }
}

impl VmfComponent {
    pub fn new(mu: UnitVector, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::domain("kappa", kappa, "(0, inf)"));
        }
        let d = mu.dim() as f64;
        let nu = 0.5 * d - 1.0;
        let log_norm = nu * kappa.ln()
            - 0.5 * d * (2.0 * std::f64::consts::PI).ln()
            - log_bessel_i(nu, kappa)?;
        Ok(VmfComponent { mu, kappa, log_norm })
    }

    pub fn mu(&self) -> &UnitVector {
        &self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Log of the normalizing constant `kappa^{d/2-1} / ((2 pi)^{d/2} I_{d/2-1}(kappa))`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_norm
    }

    pub fn log_pdf(&self, x: &UnitVector) -> Result<f64> {
        x.check_same_dim(self.mu.dim())?;
        Ok(self.log_norm + self.kappa * self.mu.dot(x))
    }

    pub fn pdf(&self, x: &UnitVector) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<UnitVector> {
        let sampler = WoodSampler::new(self);
        (0..count).map(|_| sampler.draw(rng)).collect()
    }
}

impl Density for VmfComponent {
    fn dim(&self) -> usize {
        self.mu.dim()
    }

    fn density(&self, x: &UnitVector) -> Result<f64> {
        self.pdf(x)
    }
}

/// Surface density of `vMF(mu, kappa)` at `x`.
pub fn vmf_pdf(comp: &VmfComponent, x: &UnitVector) -> Result<f64> {
    comp.pdf(x)
}

/// `count` i.i.d. draws from one component.
pub fn vmf_sample<R: Rng + ?Sized>(comp: &VmfComponent, count: usize, rng: &mut R) -> Vec<UnitVector> {
    comp.sample(count, rng)
}

/// Rejection sampler for the `mu^T x` marginal (Wood, 1994) plus a uniform
/// tangential direction, reflected onto `mu` with a Householder map.
struct WoodSampler<'a> {
    comp: &'a VmfComponent,
    b: f64,
    x0: f64,
    c: f64,
    dm1: f64,
    beta: Beta<f64>,
    householder: Option<Vec<f64>>,
}

impl<'a> WoodSampler<'a> {
    fn new(comp: &'a VmfComponent) -> Self {
        let d = comp.mu.dim();
        let dm1 = (d - 1) as f64;
        let kappa = comp.kappa;
        let b = dm1 / (2.0 * kappa + (4.0 * kappa * kappa + dm1 * dm1).sqrt());
        let x0 = (1.0 - b) / (1.0 + b);
        let c = kappa * x0 + dm1 * (1.0 - x0 * x0).ln();
        let beta = Beta::new(0.5 * dm1, 0.5 * dm1).expect("positive shape parameters");
        // u = e_1 - mu; H = I - 2 u u^T / |u|^2 maps e_1 to mu.
        let mu = comp.mu.coords();
        let mut u: Vec<f64> = mu.iter().map(|m| -m).collect();
        u[0] += 1.0;
        let un = sphere::dot(&u, &u);
        let householder = (un > 1e-24).then(|| {
            let s = (2.0 / un).sqrt();
            u.iter_mut().for_each(|v| *v *= s);
            u
        });
        WoodSampler {
            comp,
            b,
            x0,
            c,
            dm1,
            beta,
            householder,
        }
    }

    fn draw_cosine<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let kappa = self.comp.kappa;
        loop {
            let z: f64 = self.beta.sample(rng);
            let w = (1.0 - (1.0 + self.b) * z) / (1.0 - (1.0 - self.b) * z);
            let u: f64 = rng.random();
            if kappa * w + self.dm1 * (1.0 - self.x0 * w).ln() - self.c >= u.ln() {
                return w;
            }
        }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> UnitVector {
        let d = self.comp.mu.dim();
        let w = self.draw_cosine(rng);
        let mut y = vec![0.0; d];
        y[0] = w;
        let tangent = loop {
            let g: Vec<f64> = (1..d).map(|_| rng.sample(StandardNormal)).collect();
            let n = sphere::dot(&g, &g).sqrt();
            if n > 1e-300 {
                break g.into_iter().map(move |v| v / n);
            }
        };
        let s = (1.0 - w * w).max(0.0).sqrt();
        for (yi, t) in y[1..].iter_mut().zip(tangent) {
            *yi = s * t;
        }
        if let Some(h) = &self.householder {
            let proj = sphere::dot(h, &y);
            for (yi, hi) in y.iter_mut().zip(h) {
                *yi -= proj * hi;
            }
        }
        UnitVector::normalize(y).expect("reflection of a unit vector is a unit vector")
    }
}

/// A finite mixture `sum_i w_i vMF(mu_i, kappa_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMixture", into = "RawMixture")]
pub struct VmfMixture {
    components: Vec<VmfComponent>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMixture {
    components: Vec<VmfComponent>,
    weights: Vec<f64>,
}

impl TryFrom<RawMixture> for VmfMixture {
    type Error = Error;

    fn try_from(raw: RawMixture) -> Result<Self> {
        VmfMixture::new(raw.components, raw.weights)
    }
}

impl From<VmfMixture> for RawMixture {
    fn from(m: VmfMixture) -> Self {
        RawMixture {
            components: m.components,
            weights: m.weights,
        }
    }
}

/// Tolerance on `|sum(weights) - 1|`.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

impl VmfMixture {
    pub fn new(components: Vec<VmfComponent>, weights: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Empty("mixture components"));
        }
        if components.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} components but {} weights",
                components.len(),
                weights.len()
            )));
        }
        let d = components[0].mu.dim();
        for c in &components[1..] {
            c.mu.check_same_dim(d)?;
        }
        if let Some(&w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::domain("weight", w, "(0, 1]"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidParameter(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(VmfMixture {
            components,
            weights,
        })
    }

    pub fn single(component: VmfComponent) -> Self {
        VmfMixture {
            components: vec![component],
            weights: vec![1.0],
        }
    }

    pub fn components(&self) -> &[VmfComponent] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pdf(&self, x: &UnitVector) -> Result<f64> {
        self.components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| Ok(w * c.pdf(x)?))
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<UnitVector> {
        let samplers: Vec<WoodSampler<'_>> = self.components.iter().map(WoodSampler::new).collect();
        let pick = WeightedIndex::new(&self.weights).expect("validated weights");
        (0..count)
            .map(|_| {
                let i = pick.sample(rng);
                samplers[i].draw(rng)
            })
            .collect()
    }

    /// The component mean at which the mixture density is largest.
    ///
    /// For a single component this is the exact mode; for well-separated
    /// components it is the mean of the dominant bump.
    pub fn dominant_mean(&self) -> &UnitVector {
        self.components
            .iter()
            .map(|c| (c.mu(), self.pdf(c.mu()).unwrap_or(0.0)))
            .fold(None::<(&UnitVector, f64)>, |best, (mu, f)| match best {
                Some((_, bf)) if bf >= f => best,
                _ => Some((mu, f)),
            })
            .map(|(mu, _)| mu)
            .expect("mixture has at least one component")
    }
}

impl Density for VmfMixture {
    fn dim(&self) -> usize {
        self.components[0].mu.dim()
    }

    fn density(&self, x: &UnitVector) -> Result<f64> {
        self.pdf(x)
    }
}

pub fn mixture_pdf(mix: &VmfMixture, x: &UnitVector) -> Result<f64> {
    mix.pdf(x)
}

pub fn mixture_sample<R: Rng + ?Sized>(mix: &VmfMixture, count: usize, rng: &mut R) -> Vec<UnitVector> {
    mix.sample(count, rng)
}

/// Draws `mu_1` uniformly and `mu_2` uniformly among unit vectors at exactly
/// `angle` radians from it: `mu_2 = cos(angle) mu_1 + sin(angle) v` with `v`
/// uniform on the unit sphere of `mu_1`'s tangent space.
pub fn mean_pair<R: Rng + ?Sized>(d: usize, angle: f64, rng: &mut R) -> Result<(UnitVector, UnitVector)> {
    check_dim(d)?;
    if !(angle > 0.0 && angle < std::f64::consts::PI) {
        return Err(Error::domain("angle", angle, "(0, pi)"));
    }
    let mu1 = sphere::random_unit(d, rng);
    let v = loop {
        let g = sphere::random_unit(d, rng);
        let along = mu1.dot(&g);
        let t: Vec<f64> = g
            .coords()
            .iter()
            .zip(mu1.coords())
            .map(|(gi, mi)| gi - along * mi)
            .collect();
        if sphere::dot(&t, &t) > 1e-12 {
            break UnitVector::normalize(t)?;
        }
    };
    let (s, c) = angle.sin_cos();
    let mu2: Vec<f64> = mu1
        .coords()
        .iter()
        .zip(v.coords())
        .map(|(m, t)| c * m + s * t)
        .collect();
    Ok((mu1, UnitVector::normalize(mu2)?))
}
