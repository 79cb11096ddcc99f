//! Random pairs of trees are nearly as far apart as possible: on n leaves
//! the expected leaf-removal distance is n minus order sqrt(n). This
//! experiment makes the effect visible at a desk-friendly size.

use lrc::expected_distance_experiment;

fn main() {
    let n = 64;
    let stats = expected_distance_experiment(n, 100, 7);

    println!("{}", stats.to_json());
    let reference = n as f64 - 3.0 * (n as f64).sqrt();
    println!(
        "mean {:.2} over {} trials, against n - 3*sqrt(n) = {reference:.2}",
        stats.mean_distance, stats.trials
    );
    assert!(stats.mean_distance >= reference);
}
