//! Why the exploration bias must be exactly inverse degree.
//!
//! Sampling unexplored items proportional to degree^(-1+e) or degree^(-1-e)
//! for any e > 0 collapses on the lopsided family: the worst-user ratio
//! drops toward zero as the family grows, while inverse-degree sampling on
//! the same instances stays flat. The exact reward upper bounds for the
//! degenerate samplers are also evaluated for comparison.
//!
//! Run with: cargo run --release --example degree_power_tradeoff

use std::sync::Arc;

use recosim::graph::gen_lopsided;
use recosim::oracle::{degree_power_reward_bound, LopsidedPlacement};
use recosim::policy::PolicySpec;
use recosim::reward::RewardModel;
use recosim::sim::finite::{estimate_gamma_finite, FiniteSim, ModelGen};

fn gamma(n: usize, planted: Vec<usize>, spec: &PolicySpec, trials: u64) -> f64 {
    let g = gen_lopsided(n).unwrap();
    let model = RewardModel::binary_planted(planted, 2 * n).unwrap();
    let sim = FiniteSim::new(Arc::new(g), ModelGen::fixed(model), spec, 1).unwrap();
    estimate_gamma_finite(&sim, trials, 11).estimate.gamma
}

fn main() {
    let sizes = [16usize, 64, 256];
    let trials = 5_000;

    println!("exponent -0.5, value on every exclusive item:");
    println!("{:>6} {:>12} {:>12} {:>12}", "n", "degree_power", "bound", "idexp");
    for &n in &sizes {
        let placement: Vec<usize> = (0..n).collect();
        let dp = gamma(n, placement.clone(), &PolicySpec::DegreePower { exponent: -0.5 }, trials);
        let id = gamma(n, placement, &PolicySpec::IdExp, trials);
        let bound = degree_power_reward_bound(n, 0.5, LopsidedPlacement::Exclusive).ratio_bound;
        println!("{n:>6} {dp:>12.4} {bound:>12.4} {id:>12.4}");
    }

    println!("exponent -1.5, value on one shared item:");
    println!("{:>6} {:>12} {:>12} {:>12}", "n", "degree_power", "bound", "idexp");
    for &n in &sizes {
        let placement = vec![n];
        let dp = gamma(n, placement.clone(), &PolicySpec::DegreePower { exponent: -1.5 }, trials);
        let id = gamma(n, placement, &PolicySpec::IdExp, trials);
        let bound = degree_power_reward_bound(n, 0.5, LopsidedPlacement::Shared).ratio_bound;
        println!("{n:>6} {dp:>12.4} {bound:>12.4} {id:>12.4}");
    }
}
