// Stage entropy of action histograms and its correlation with final success.

use scddq::analysis::{action_distribution, entropy, pearson};

pub fn run_example() -> scddq::Result<(Vec<f64>, f64)> {
    // Per-run action histograms for one stage, with each run's final success rate.
    let runs: [(&[i64], f64); 4] = [
        (&[40, 40, 40, 40, 0, 0], 0.62),
        (&[90, 30, 20, 10, 5, 5], 0.71),
        (&[150, 5, 2, 1, 1, 1], 0.80),
        (&[120, 20, 10, 5, 3, 2], 0.74),
    ];
    let mut entropies = Vec::new();
    for (counts, _) in &runs {
        entropies.push(entropy(&action_distribution(1, counts)?)?);
    }
    let success: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let r = pearson(&entropies, &success)?;
    for (h, s) in entropies.iter().zip(&success) {
        println!("entropy {h:.3} bits  final success {s:.2}");
    }
    println!("pearson r = {r:.3}");
    Ok((entropies, r))
}

#[allow(dead_code)]
fn main() -> scddq::Result<()> {
    run_example().map(|_| ())
}
