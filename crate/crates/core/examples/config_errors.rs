//! Config validation reports every problem at once, with line numbers.

use eas_sphere::config::validate_config;

const BROKEN: &str = r#"
task = "mode-multi"
d = 3
output_dir = "out"
n_train = -10

[mixture]
components = [{ kappa = 80.0 }, { kappa = -1.0 }]
weights = [0.5, 0.4]

[modes]
alpha = 1.0
"#;

pub fn run_example() -> eas_sphere::Result<()> {
    match validate_config(BROKEN) {
        Ok(_) => println!("unexpectedly valid"),
        Err(errors) => {
            println!("{} problems:", errors.len());
            for e in errors.iter() {
                println!("  {e}");
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> eas_sphere::Result<()> {
    run_example()
}
