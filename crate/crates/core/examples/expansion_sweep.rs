//! A configured sweep over expansion factors, written to CSV.

use eas_sphere::config::validate_config;
use eas_sphere::experiment::run;

const CONFIG: &str = r#"
task = "density-experiment"
d = 3
seed = 1
output_dir = "unused"
n_train = 3000
n_val = 600
n_test = 3000
expansion_factors = [8, 64, 512]

[mixture]
components = [{ kappa = 10.0 }, { kappa = 5.0 }]
weights = [0.3, 0.7]
"#;

pub fn run_example() -> eas_sphere::Result<()> {
    let mut config = validate_config(CONFIG).map_err(eas_sphere::Error::Config)?;
    config.output_dir = std::env::temp_dir().join(format!("eas-sweep-{}", std::process::id()));
    let report = run(&config)?;
    print!("{}", std::fs::read_to_string(config.output_dir.join("summary.csv"))?);
    println!("{} files in {}", report.files.len(), config.output_dir.display());
    std::fs::remove_dir_all(&config.output_dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> eas_sphere::Result<()> {
    run_example()
}
