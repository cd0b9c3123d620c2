//! vMF densities and samplers against independent oracles.

use std::f64::consts::PI;

use eas_sphere::seeds;
use eas_sphere::sphere::{random_unit, sample_uniform, surface_area, UnitVector};
use eas_sphere::vmf::{mean_resultant_length, VmfComponent, VmfMixture};
use statrs::function::gamma::gamma;

const DIMS: [usize; 3] = [2, 3, 5];
const KAPPAS: [f64; 6] = [0.1, 1.0, 5.0, 10.0, 80.0, 100.0];

fn component(d: usize, kappa: f64, seed: u64) -> VmfComponent {
    VmfComponent::new(random_unit(d, &mut seeds::rng(seed)), kappa).unwrap()
}

/// A unit vector orthogonal to `mu`.
fn orthogonal(mu: &UnitVector) -> Vec<f64> {
    let d = mu.dim();
    let axis = (0..d).min_by(|&a, &b| mu.coords()[a].abs().total_cmp(&mu.coords()[b].abs())).unwrap();
    let mut v = vec![0.0; d];
    v[axis] = 1.0;
    let p = mu.coords()[axis];
    let mut w: Vec<f64> = v.iter().zip(mu.coords()).map(|(a, m)| a - p * m).collect();
    let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.iter_mut().for_each(|x| *x /= n);
    w
}

/// `S_{d-2} * integral_0^pi f(theta) sin^{d-2}(theta) d theta` by composite
/// Simpson over the polar angle from the mean.
fn polar_integral(c: &VmfComponent) -> f64 {
    let d = c.mu().dim();
    let slice = 2.0 * PI.powf((d as f64 - 1.0) / 2.0) / gamma((d as f64 - 1.0) / 2.0);
    let v = orthogonal(c.mu());
    let steps = 200_000;
    let h = PI / steps as f64;
    let g = |theta: f64| {
        let x: Vec<f64> = c.mu().coords().iter().zip(&v).map(|(m, o)| theta.cos() * m + theta.sin() * o).collect();
        c.pdf(&UnitVector::normalize(x).unwrap()).unwrap() * theta.sin().powi(d as i32 - 2)
    };
    let mut acc = g(0.0) + g(PI);
    for i in 1..steps {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    slice * acc * h / 3.0
}

#[test]
fn pdf_integrates_to_one_by_quadrature() {
    for d in DIMS {
        for kappa in KAPPAS {
            let total = polar_integral(&component(d, kappa, 1));
            assert!((total - 1.0).abs() < 1e-6, "d={d} kappa={kappa}: {total}");
        }
    }
}

#[test]
fn pdf_integrates_to_one_by_monte_carlo() {
    // uniform probes estimate the integral with relative spread about
    // sqrt(S * int f^2) / 1000; only cells where that is well under 0.01
    let probes = 1_000_000;
    for d in DIMS {
        for kappa in KAPPAS.into_iter().filter(|&k| k <= 5.0 || (d <= 3 && k <= 10.0)) {
            let c = component(d, kappa, 2);
            let pts = sample_uniform(d, probes, &mut seeds::stream(3, "mc", d as u64)).unwrap();
            let mean = pts.iter().map(|x| c.pdf(x).unwrap()).sum::<f64>() / probes as f64;
            let total = mean * surface_area(d).unwrap();
            assert!((total - 1.0).abs() < 0.01, "d={d} kappa={kappa}: {total}");
        }
    }
}

/// Exact CDF of `mu . x` on the 2-sphere.
fn cosine_cdf_s2(kappa: f64, t: f64) -> f64 {
    // (e^{k t} - e^{-k}) / (e^{k} - e^{-k}), scaled by e^{-k} for stability
    ((kappa * (t - 1.0)).exp() - (-2.0 * kappa).exp()) / -(-2.0 * kappa).exp_m1()
}

#[test]
fn cosine_marginal_passes_kolmogorov_smirnov() {
    let n = 100_000;
    let critical = 1.95 / (n as f64).sqrt(); // alpha = 0.001
    for (i, kappa) in [0.1, 1.0, 10.0, 100.0].into_iter().enumerate() {
        let c = component(3, kappa, 10 + i as u64);
        let mut t: Vec<f64> = c
            .sample(n, &mut seeds::rng(20 + i as u64))
            .iter()
            .map(|x| x.dot(c.mu()))
            .collect();
        t.sort_by(f64::total_cmp);
        let ks = t
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let f = cosine_cdf_s2(kappa, v);
                f64::max((j + 1) as f64 / n as f64 - f, f - j as f64 / n as f64)
            })
            .fold(0.0, f64::max);
        assert!(ks < critical, "kappa={kappa}: D={ks} >= {critical}");
    }
}

#[test]
fn sample_mean_cosine_matches_resultant_length() {
    let n = 100_000;
    for d in DIMS {
        for kappa in [1.0, 10.0, 80.0] {
            let c = component(d, kappa, 30);
            let t: Vec<f64> = c.sample(n, &mut seeds::rng(31)).iter().map(|x| x.dot(c.mu())).collect();
            let mean = t.iter().sum::<f64>() / n as f64;
            let sd = (t.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt();
            let want = mean_resultant_length(d, kappa).unwrap();
            assert!((mean - want).abs() < 5.0 * sd / (n as f64).sqrt() + 1e-12, "d={d} kappa={kappa}");
        }
    }
}

#[test]
fn three_dimensional_pdf_has_closed_form() {
    // on S^2: f(x) = kappa / (4 pi sinh kappa) exp(kappa mu.x)
    for kappa in [0.1, 1.0, 10.0, 100.0] {
        let c = component(3, kappa, 40);
        for x in sample_uniform(3, 50, &mut seeds::rng(41)).unwrap() {
            let log_want = kappa.ln() - (4.0 * PI).ln() - kappa - (-(-2.0 * kappa).exp_m1()).ln() + 2f64.ln() + kappa * x.dot(c.mu());
            let got = c.log_pdf(&x).unwrap();
            assert!((got - log_want).abs() < 1e-11, "kappa={kappa}");
        }
    }
}

#[test]
fn mixture_of_identical_components_is_the_component() {
    let c = component(4, 7.0, 50);
    let mix = VmfMixture::new(vec![c.clone(), c.clone()], vec![0.3, 0.7]).unwrap();
    for x in sample_uniform(4, 20, &mut seeds::rng(51)).unwrap() {
        assert!((mix.pdf(&x).unwrap() - c.pdf(&x).unwrap()).abs() < 1e-15 * c.pdf(&x).unwrap().max(1.0));
    }
}
