//! Exact closed testing on a small study, then discovery bounds for a few
//! hand-picked sets.
//!
//! cargo run --example closure_bounds -- [study.csv] [alpha] [simes|fisher]

use discovery_bounds::{full_closure, load_study, AnalysisConfig, LocalTest};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args
        .first()
        .map(String::as_str)
        .unwrap_or(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/demo.csv"));
    let alpha: f64 = args.get(1).map(|a| a.parse()).transpose()?.unwrap_or(0.05);
    let test: LocalTest = args.get(2).map(|t| t.parse()).transpose()?.unwrap_or(LocalTest::Simes);

    let study = load_study(path)?;
    let closure = full_closure(&study, &AnalysisConfig::new(alpha, test)?)?;
    println!("{} hypotheses, {test} local tests, alpha = {alpha}", study.m());
    println!(
        "{} of {} intersection hypotheses rejected",
        closure.rejected_count(),
        (1u64 << study.m()) - 1
    );

    // Every singleton, then the full set.
    let mut queries: Vec<Vec<String>> = study.labels().iter().map(|l| vec![l.clone()]).collect();
    queries.push(study.labels().to_vec());
    for labels in queries {
        let set = study.set_from_labels(&labels)?;
        let bound = closure.discovery_bound(&set)?;
        println!("R = {{{}}}: at least {} true discoveries", labels.join(","), bound.d);
    }

    let defining = closure.defining_family();
    println!("defining sets (each contains a false null):");
    for set in defining.to_labels(study.labels()) {
        println!("  {{{}}}", set.join(","));
    }
    Ok(())
}
