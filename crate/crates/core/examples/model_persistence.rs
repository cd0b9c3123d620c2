//! Save a fitted model and reload it with bitwise-identical evaluations.

use std::sync::Arc;

use eas_sphere::eas::{fit, persist, ProjectionBank};
use eas_sphere::seeds;
use eas_sphere::sphere::sample_uniform;

pub fn run_example() -> eas_sphere::Result<()> {
    let bank = Arc::new(ProjectionBank::new(3, 800, 21)?);
    let data = sample_uniform(3, 2_000, &mut seeds::rng(22))?;
    let model = fit(bank, 20, &data)?;

    let dir = std::env::temp_dir().join(format!("eas-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("model.json");
    persist::save(&model, &path)?;
    let back = persist::load(&path)?;

    let queries = sample_uniform(3, 1_000, &mut seeds::rng(23))?;
    let same = model
        .evaluate_batch(&queries)?
        .iter()
        .zip(back.evaluate_batch(&queries)?)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!("{} bytes written; evaluations identical: {same}", std::fs::metadata(&path)?.len());
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> eas_sphere::Result<()> {
    run_example()
}
