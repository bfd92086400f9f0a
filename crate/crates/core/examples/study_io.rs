//! Simulate a study, write it as `label,p` CSV, read it back and save a
//! defining family in the text format used by the dual tooling.
//!
//! cargo run --example study_io -- [out_dir]

use discovery_bounds::experiments::simulate_study;
use discovery_bounds::{derive_stream, full_closure, load_study, write_study, AnalysisConfig, SetFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&dir)?;

    let study = simulate_study(8, 3, 0.01, &mut derive_stream(42, 0))?;
    let csv = dir.join("simulated.csv");
    write_study(&study, &csv)?;
    let back = load_study(&csv)?;
    assert_eq!(back, study);
    println!("{}:\n{}", csv.display(), std::fs::read_to_string(&csv)?);

    let defining = full_closure(&back, &AnalysisConfig::default())?.defining_family();
    let family_path = dir.join("defining.txt");
    defining.save(back.labels(), &family_path)?;
    println!("{}:\n{}", family_path.display(), std::fs::read_to_string(&family_path)?);

    let (reloaded, labels) = SetFamily::load(&family_path)?;
    assert_eq!(reloaded, defining);
    assert_eq!(labels, back.labels());
    Ok(())
}
