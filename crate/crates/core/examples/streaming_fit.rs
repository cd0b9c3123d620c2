//! Counts are additive, so data can be absorbed in chunks or fitted on
//! separate partitions and merged.

use std::sync::Arc;

use eas_sphere::eas::{fit, EasFitter, ProjectionBank};
use eas_sphere::seeds;
use eas_sphere::sphere::sample_uniform;

pub fn run_example() -> eas_sphere::Result<()> {
    let bank = Arc::new(ProjectionBank::new(4, 1_000, 7)?);
    let data = sample_uniform(4, 6_000, &mut seeds::rng(8))?;

    let mut left = EasFitter::new(Arc::clone(&bank), 30)?;
    for chunk in data[..4_000].chunks(1_000) {
        left.absorb(chunk)?;
    }
    let mut right = EasFitter::new(Arc::clone(&bank), 30)?;
    right.absorb(&data[4_000..])?;
    left.merge(right)?;
    let streamed = left.finish()?;

    let direct = fit(bank, 30, &data)?;
    assert_eq!(streamed, direct);
    println!("n={} counts sum to {}", streamed.n(), streamed.counts().iter().sum::<u64>());
    Ok(())
}

#[allow(dead_code)]
fn main() -> eas_sphere::Result<()> {
    run_example()
}
