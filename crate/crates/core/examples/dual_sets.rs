//! From the defining family to the dual view, then conditioning on
//! hypotheses known to be true nulls.
//!
//! cargo run --example dual_sets

use discovery_bounds::{
    condition_on_nulls, full_closure, minimal_transversals, verify_duality, AnalysisConfig, LocalTest, PValueStudy,
};

fn show(title: &str, sets: Vec<Vec<String>>) {
    println!("{title}:");
    if sets.is_empty() {
        println!("  (none)");
    }
    for set in sets {
        println!("  {{{}}}", set.join(","));
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let labels = ["thigh", "calf", "neck", "back", "hand", "foot"]
        .map(String::from)
        .to_vec();
    let study = PValueStudy::new(labels, vec![0.01, 0.015, 0.02, 0.025, 0.5, 0.9])?;
    let closure = full_closure(&study, &AnalysisConfig::new(0.05, LocalTest::Simes)?)?;

    let defining = closure.defining_family();
    show(
        "defining sets (each holds at least one false null)",
        defining.to_labels(study.labels()),
    );

    let dual = minimal_transversals(&defining)?;
    assert!(verify_duality(&defining, &dual));
    show(
        "dual sets (at least one is entirely false nulls)",
        dual.to_labels(study.labels()),
    );

    let known = study.set_from_labels(&["back"])?;
    let (kept, implicated) = condition_on_nulls(&dual, &known)?;
    show(
        "dual sets left once back is a known true null",
        kept.to_labels(study.labels()),
    );
    println!("still implicated: {{{}}}", study.labels_of(&implicated).join(","));
    Ok(())
}
