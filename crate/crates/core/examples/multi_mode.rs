//! Recover both modes of a two-bump mixture from level-set components.

use std::sync::Arc;

use eas_sphere::eas::{fit, ProjectionBank};
use eas_sphere::modes::{recover_modes, EpsTilde, MIN_ALPHA};
use eas_sphere::seeds;
use eas_sphere::vmf::{mean_pair, VmfComponent, VmfMixture};

pub fn run_example() -> eas_sphere::Result<()> {
    let (a, b) = mean_pair(3, std::f64::consts::FRAC_PI_4, &mut seeds::rng(3))?;
    let truth = VmfMixture::new(
        vec![VmfComponent::new(a.clone(), 80.0)?, VmfComponent::new(b.clone(), 100.0)?],
        vec![0.3, 0.7],
    )?;
    let data = truth.sample(4_000, &mut seeds::rng(4));
    let bank = Arc::new(ProjectionBank::new(3, 4_000, 5)?);
    let model = fit(bank, 25, &data)?;

    let modes = recover_modes(&model, &data, 25, MIN_ALPHA, EpsTilde::Auto)?;
    println!("eps = {:.4}, {} mode(s):", modes.eps_tilde, modes.len());
    for m in &modes.modes {
        let x = &data[m.index];
        println!(
            "  sample {:>4} fhat {:.3}: {:.3} from mu1, {:.3} from mu2",
            m.index,
            m.fhat,
            x.distance(&a),
            x.distance(&b)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> eas_sphere::Result<()> {
    run_example()
}
