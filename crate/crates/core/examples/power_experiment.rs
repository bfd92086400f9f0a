//! Mean closed-testing bound against the Meinshausen-Rice bound as the number
//! of hypotheses grows around a fixed set of false nulls. Writes power.csv.
//!
//! cargo run --release --example power_experiment -- [config] [out.csv]

use std::fs::File;
use std::io::BufWriter;

use discovery_bounds::experiments::{run_power_experiment, write_power_csv, PowerScenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario = match args.first() {
        Some(path) => PowerScenario::from_config_str(&std::fs::read_to_string(path)?)?,
        None => PowerScenario::default(),
    };
    let out = args.get(1).map(String::as_str).unwrap_or("power.csv");

    let rows = run_power_experiment(&scenario, None)?;
    for row in &rows {
        println!(
            "m = {:>5}  {:<17} mean {:>7.3}  se {:.3}",
            row.m, row.method, row.mean_bound, row.se
        );
    }
    write_power_csv(&scenario, &rows, BufWriter::new(File::create(out)?))?;
    println!("wrote {out}");
    Ok(())
}
