use discovery_bounds::global::{LAMBDA_GRID_RATIO, LAMBDA_GRID_START};
use discovery_bounds::{
    calibrate_lambda, derive_stream, hc_critical_value, higher_criticism, mr_lower_bound, PValueStudy,
};

/// Null envelope statistics computed from the formula, replicate by replicate.
fn envelope_stats_oracle(m: usize, reps: usize, seed: u64) -> Vec<f64> {
    (0..reps)
        .map(|r| {
            let mut u = derive_stream(seed, r as u64).uniforms(m);
            u.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mf = m as f64;
            u.iter()
                .enumerate()
                .map(|(i, &t)| ((i + 1) as f64 / mf - t) / (t * (1.0 - t) / mf).sqrt())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

fn hc_oracle(p: &mut [f64]) -> f64 {
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = p.len() as f64;
    (1..=p.len() / 2)
        .map(|i| {
            let q = p[i - 1];
            m.sqrt() * (i as f64 / m - q) / (q * (1.0 - q)).sqrt()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn lambda_calibration_matches_grid_scan_oracle() {
    let (m, alpha, reps, seed) = (100, 0.05, 10_000, 1);
    let stats = envelope_stats_oracle(m, reps, seed);
    let mut k = 0;
    let oracle = loop {
        let lambda = LAMBDA_GRID_START * LAMBDA_GRID_RATIO.powi(k);
        let exceed = stats.iter().filter(|&&s| s > lambda).count() as f64 / reps as f64;
        if exceed <= alpha {
            break lambda;
        }
        k += 1;
    };
    let c = calibrate_lambda(m, alpha, reps, seed).unwrap();
    assert_eq!(c.lambda, oracle);
    // Frozen from the oracle run above.
    assert_eq!(c.lambda, 4.8278138501698935);
    assert_eq!(calibrate_lambda(m, alpha, reps, seed).unwrap(), c);
}

#[test]
fn mr_examples_with_calibrated_lambda() {
    let c = calibrate_lambda(100, 0.05, 10_000, 1).unwrap();

    let grid = PValueStudy::from_pvalues((1..=100).map(|i| (i as f64 - 0.5) / 100.0).collect()).unwrap();
    assert_eq!(mr_lower_bound(&grid, &c).unwrap(), 0);

    let mut p = vec![1e-12; 10];
    p.extend((1..=90).map(|i| (i as f64 - 0.5) / 90.0));
    let signal = PValueStudy::from_pvalues(p.clone()).unwrap();
    // By hand at t = 1e-12: F = 0.1, envelope ~ 4.83e-7, so m * value ~ 9.99995.
    let t: f64 = 1e-12;
    let by_hand = 100.0 * (0.1 - t - c.lambda * (t * (1.0 - t) / 100.0).sqrt()) / (1.0 - t);
    assert!(by_hand > 9.0 && by_hand < 10.0);
    assert_eq!(mr_lower_bound(&signal, &c).unwrap(), 10);

    let ones = PValueStudy::from_pvalues(vec![1.0; 100]).unwrap();
    assert_eq!(mr_lower_bound(&ones, &c).unwrap(), 0);
}

#[test]
fn hc_critical_value_matches_sorted_null_sample() {
    let (m, reps, seed) = (100, 10_000, 2);
    let mut stats: Vec<f64> = (0..reps)
        .map(|r| hc_oracle(&mut derive_stream(seed, r as u64).uniforms(m)))
        .collect();
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let crit = hc_critical_value(m, 0.05, reps, seed).unwrap();
    assert_eq!(crit, stats[9499]);
    assert_eq!(crit, 4.805561043249355);
    let median = hc_critical_value(m, 0.5, reps, seed).unwrap();
    assert_eq!(median, stats[4999]);
    assert!(median < crit);
}

#[test]
fn hc_matches_oracle_on_random_studies() {
    for id in 0..50 {
        let mut s = derive_stream(21, id);
        let m = 2 + (s.next_u64() % 300) as usize;
        let mut p = s.uniforms(m);
        let study = PValueStudy::from_pvalues(p.clone()).unwrap();
        let expected = hc_oracle(&mut p);
        assert!((higher_criticism(&study).unwrap() - expected).abs() <= 1e-12 * expected.abs().max(1.0));
    }
}
