//! Fit the expand-and-sparsify estimator and compare it with kNN and KDE.

use std::sync::Arc;

use eas_sphere::baselines::{KdeModel, KernelKind, KnnModel};
use eas_sphere::eas::{fit, ProjectionBank};
use eas_sphere::evaluation::etv;
use eas_sphere::seeds;
use eas_sphere::sphere::UnitVector;
use eas_sphere::vmf::{VmfComponent, VmfMixture};

pub fn run_example() -> eas_sphere::Result<()> {
    let truth = VmfMixture::new(
        vec![
            VmfComponent::new(UnitVector::basis(3, 0)?, 10.0)?,
            VmfComponent::new(UnitVector::basis(3, 2)?, 5.0)?,
        ],
        vec![0.3, 0.7],
    )?;
    let train = truth.sample(5_000, &mut seeds::rng(1));
    let test = truth.sample(2_000, &mut seeds::rng(2));

    let bank = Arc::new(ProjectionBank::new(3, 3_000, 3)?);
    let eas = fit(bank, 24, &train)?;
    let knn = KnnModel::new(&train, 70)?;
    let kde = KdeModel::new(&train, 0.15, KernelKind::Vmf)?;

    println!("EaS  m={} k={}: ETV {:.4}", eas.m(), eas.k(), etv(&truth, &eas, &test)?.etv);
    println!("kNN  k=70:        ETV {:.4}", etv(&truth, &knn, &test)?.etv);
    println!("KDE  h=0.15:      ETV {:.4}", etv(&truth, &kde, &test)?.etv);
    Ok(())
}

#[allow(dead_code)]
fn main() -> eas_sphere::Result<()> {
    run_example()
}
