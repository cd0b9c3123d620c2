//! How large is the region of the sphere that activates one coordinate?

use eas_sphere::eas::{region_diagnostics, ProjectionBank};

pub fn run_example() -> eas_sphere::Result<()> {
    let bank = ProjectionBank::new(3, 2_000, 5)?;
    let report = region_diagnostics(&bank, 200, 50_000, 40, 6)?;
    println!(
        "volume / (S k/m): min {:.3} mean {:.3} max {:.3}; {:.0}% within [0.75, 1.25]",
        report.min_ratio,
        report.mean_ratio,
        report.max_ratio,
        100.0 * report.fraction_within(0.75, 1.25)
    );
    println!(
        "largest observed diameter {:.3}, bound {:.3}",
        report.max_diameter, report.diameter_bound
    );
    for r in report.regions.iter().take(3) {
        println!(
            "  region {:>4}: {} hits, caps at {:.2} and {:.2} of the average volume",
            r.index, r.hits, r.inner_ratio, r.outer_ratio
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> eas_sphere::Result<()> {
    run_example()
}
