//! A two-component von Mises-Fisher mixture: density values and sampling.

use eas_sphere::seeds;
use eas_sphere::sphere::UnitVector;
use eas_sphere::vmf::{mean_pair, VmfComponent, VmfMixture};

pub fn run_example() -> eas_sphere::Result<()> {
    let (a, b) = mean_pair(3, std::f64::consts::FRAC_PI_4, &mut seeds::rng(1))?;
    let mix = VmfMixture::new(
        vec![VmfComponent::new(a.clone(), 80.0)?, VmfComponent::new(b.clone(), 100.0)?],
        vec![0.3, 0.7],
    )?;
    println!("f(mu1) = {:.4}, f(mu2) = {:.4}", mix.pdf(&a)?, mix.pdf(&b)?);

    let sample = mix.sample(10_000, &mut seeds::rng(2));
    let near_a = sample.iter().filter(|x| x.distance(&a) < x.distance(&b)).count();
    println!("{near_a} of {} draws lie closer to mu1", sample.len());

    let far = UnitVector::new(a.coords().iter().map(|c| -c).collect())?;
    println!("f(-mu1) = {:.3e}", mix.pdf(&far)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> eas_sphere::Result<()> {
    run_example()
}
