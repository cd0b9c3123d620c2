//! Surface areas and chordal caps on spheres of several dimensions.

use eas_sphere::sphere::{cap_mass, cap_radius, cap_volume, surface_area};

pub fn run_example() -> eas_sphere::Result<()> {
    for d in [2, 3, 5, 10] {
        let area = surface_area(d)?;
        // the cap holding 1% of the sphere shrinks toward the equator's
        // chordal distance sqrt(2) as d grows
        let r = cap_radius(d, 0.01)?;
        println!(
            "d={d:<3} area={area:>9.4} r(1%)={r:.4} mass(r)={:.6} volume(r)={:.6}",
            cap_mass(d, r)?,
            cap_volume(d, r)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> eas_sphere::Result<()> {
    run_example()
}
