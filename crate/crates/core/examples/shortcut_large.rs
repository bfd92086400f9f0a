//! The Simes shortcut on a million simulated hypotheses: the bound for the
//! whole study, for a random subset, and along the sorted p-value order.
//!
//! cargo run --release --example shortcut_large -- [m] [seed]

use std::time::Instant;

use discovery_bounds::experiments::simulate_study;
use discovery_bounds::{derive_stream, preprocess, HypothesisSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let m: usize = args.first().map(|a| a.parse()).transpose()?.unwrap_or(1_000_000);
    let seed: u64 = args.get(1).map(|a| a.parse()).transpose()?.unwrap_or(1);

    let mut stream = derive_stream(seed, 0);
    let study = simulate_study(m, 50, 1e-4, &mut stream)?;

    let start = Instant::now();
    let state = preprocess(&study, 0.05)?;
    let total = state.full_bound();
    println!(
        "m = {m}, h = {}, full-set bound = {total} ({:.3} s)",
        state.h(),
        start.elapsed().as_secs_f64()
    );

    // Every tenth hypothesis. Signals sit at the first indices, so five remain.
    let subset = HypothesisSet::new((0..m).step_by(10).collect(), m)?;
    println!(
        "every tenth hypothesis: at least {} true discoveries",
        state.shortcut_bound(&subset)?.d
    );

    // Growing sets along the sorted order, all answered in one pass.
    let order = state.sorted_order().to_vec();
    let curve = state.bound_curve(&order[..200])?;
    for k in [10, 25, 50, 100, 200] {
        println!("top {k:>3} p-values: at least {} true discoveries", curve[k - 1]);
    }
    Ok(())
}
