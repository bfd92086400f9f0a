//! Wall-clock cost of full closure (exponential in m) against the Simes
//! shortcut (near linear). Writes timing.csv.
//!
//! cargo run --release --example timing_experiment -- [config] [out.csv]

use std::fs::File;
use std::io::BufWriter;

use discovery_bounds::experiments::{run_timing_experiment, write_timing_csv, TimingScenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scenario = match args.first() {
        Some(path) => TimingScenario::from_config_str(&std::fs::read_to_string(path)?)?,
        None => TimingScenario::default(),
    };
    let out = args.get(1).map(String::as_str).unwrap_or("timing.csv");

    let rows = run_timing_experiment(&scenario)?;
    for row in &rows {
        println!(
            "{:<12} {:<6} m = {:>8}  {:.3e} s",
            row.method, row.local_test, row.m, row.seconds
        );
    }
    write_timing_csv(&scenario, &rows, BufWriter::new(File::create(out)?))?;
    println!("wrote {out}");
    Ok(())
}
