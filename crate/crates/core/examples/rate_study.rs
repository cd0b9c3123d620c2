//! Sup error and mode error as the sample grows, with m = n.

use eas_sphere::evaluation::{rate_experiment, RateFamily};
use eas_sphere::sphere::UnitVector;
use eas_sphere::vmf::{VmfComponent, VmfMixture};

pub fn run_example() -> eas_sphere::Result<()> {
    let truth = VmfMixture::single(VmfComponent::new(UnitVector::basis(2, 0)?, 10.0)?);
    for family in [RateFamily::Density, RateFamily::Mode] {
        let table = rate_experiment(family, &truth, &[250, 1_000, 4_000], 3, 11, 500, 2_000)?;
        println!("{}: slope {:.3} +- {:.3}", family.as_str(), table.slope, table.slope_se);
        for row in &table.rows {
            println!("  n={:>5} mean {:.4} std {:.4} k {:?}", row.n, row.mean, row.std, row.selected_k);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> eas_sphere::Result<()> {
    run_example()
}
