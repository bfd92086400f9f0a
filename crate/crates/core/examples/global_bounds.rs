//! Global baselines: the Meinshausen-Rice lower bound on the number of false
//! nulls and the Higher Criticism statistic, both with Monte Carlo
//! calibration (cached on disk between runs).
//!
//! cargo run --release --example global_bounds -- [cache_dir]

use discovery_bounds::experiments::simulate_study;
use discovery_bounds::{derive_stream, higher_criticism, mr_lower_bound, CalibrationCache};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| std::env::temp_dir().join("dbounds-calibration").display().to_string());
    std::fs::create_dir_all(&dir)?;
    let mut cache = CalibrationCache::open(&dir)?;

    let (m, alpha) = (500, 0.05);
    let bounding = cache.lambda(m, alpha, 10_000, 1)?;
    let crit = cache.hc_critical_value(m, alpha, 10_000, 2)?;
    println!(
        "m = {m}: lambda = {:.4}, HC critical value = {crit:.4}",
        bounding.lambda
    );

    for (label, n_false) in [("global null", 0), ("sparse signal", 25), ("dense signal", 150)] {
        let study = simulate_study(m, n_false, 1e-3, &mut derive_stream(7, n_false as u64))?;
        let hc = higher_criticism(&study)?;
        println!(
            "{label:>13}: MR bound = {:>3}, HC = {hc:>7.3} ({})",
            mr_lower_bound(&study, &bounding)?,
            if hc > crit { "reject global null" } else { "no evidence" }
        );
    }
    println!(
        "calibration cache: {} ({} entries)",
        cache.path().display(),
        cache.len()
    );
    Ok(())
}
