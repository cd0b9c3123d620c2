//! The sample point with the largest estimated density approximates the
//! mode of a concentrated vMF.

use std::sync::Arc;

use eas_sphere::eas::{fit, ProjectionBank};
use eas_sphere::modes::single_mode;
use eas_sphere::seeds;
use eas_sphere::sphere::UnitVector;
use eas_sphere::vmf::VmfComponent;

pub fn run_example() -> eas_sphere::Result<()> {
    let mu = UnitVector::normalize(vec![1.0, 2.0, 2.0])?;
    let truth = VmfComponent::new(mu.clone(), 80.0)?;
    for n in [500, 2_000, 8_000] {
        let data = truth.sample(n, &mut seeds::rng(n as u64));
        let bank = Arc::new(ProjectionBank::new(3, n, 1)?);
        let k = (3.0 * (n as f64).ln()).round() as usize;
        let model = fit(bank, k, &data)?;
        let mode = single_mode(&model, &data)?;
        println!("n={n:>5} k={k:>2}: |mode - mu| = {:.4}", mode.distance(&mu));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> eas_sphere::Result<()> {
    run_example()
}
