//! Deterministic exploit triggers are not competitive.
//!
//! Two natural rules: exploit whenever any identified item has positive
//! value, or exploit whenever the best identified value clears a threshold.
//! Both collapse on a complete bipartite graph: a sea of near-worthless items
//! stops all exploration (first rule), and values kept below the threshold
//! waste the exploit machinery entirely (second rule). The measured ratios
//! match the closed forms delta + (1 - delta)/n and 1/n.
//!
//! Run with: cargo run --release --example exploit_rules

use std::sync::Arc;

use recosim::graph::gen_complete_bipartite;
use recosim::policy::{ExploreRule, PolicySpec};
use recosim::sim::finite::{estimate_gamma_finite, FiniteSim, ModelGen};

fn main() {
    let trials = 30_000;
    println!("exploit-when-possible, one 1-valued item in a sea of delta = 0.01:");
    for n in [10usize, 30, 100] {
        let sim = FiniteSim::new(
            Arc::new(gen_complete_bipartite(n, n).unwrap()),
            ModelGen::Planted {
                k: 1,
                high: 1.0,
                low: 0.01,
            },
            &PolicySpec::ExploitWhenPossible {
                explore: ExploreRule::Uniform,
            },
            1,
        )
        .unwrap();
        let batch = estimate_gamma_finite(&sim, trials, 3);
        let exact = 0.01 + 0.99 / n as f64;
        println!(
            "  n = {n:<4} measured {:.4} ± {:.4}   closed form {exact:.4}",
            batch.estimate.gamma, batch.estimate.gamma_ci_half
        );
    }

    println!("exploit-above-threshold(0.5), best item worth only 0.1:");
    for n in [10usize, 30, 100] {
        let sim = FiniteSim::new(
            Arc::new(gen_complete_bipartite(n, n).unwrap()),
            ModelGen::Planted {
                k: 1,
                high: 0.1,
                low: 0.0,
            },
            &PolicySpec::ExploitAboveThreshold {
                threshold: 0.5,
                explore: ExploreRule::Uniform,
            },
            1,
        )
        .unwrap();
        let batch = estimate_gamma_finite(&sim, trials, 4);
        let exact = 1.0 / n as f64;
        println!(
            "  n = {n:<4} measured {:.4} ± {:.4}   closed form {exact:.4}",
            batch.estimate.gamma, batch.estimate.gamma_ci_half
        );
    }
}
