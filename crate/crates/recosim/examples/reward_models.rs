//! Reward models and the identification oracle.
//!
//! Covers universal values, planted binary placements, per-edge personalized
//! scales, class value sequences, noisy identification (values known only
//! within a multiplicative band after f views), and the probabilistic
//! identification hook where exploitation sometimes picks the second-best
//! item.
//!
//! Run with: cargo run --example reward_models

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::SeedableRng;

use recosim::graph::gen_complete_bipartite;
use recosim::policy::PolicySpec;
use recosim::reward::{planted_uniform, ClassSequence, RewardModel, ValueOracle};
use recosim::sim::finite::{estimate_gamma_finite, FiniteSim, ModelGen};

fn main() {
    let mut rng = StdRng::seed_from_u64(8);
    let g = gen_complete_bipartite(2, 4).unwrap();

    // Planted binary: k items worth 1, drawn uniformly without replacement.
    let model = planted_uniform(4, 2, &mut rng).unwrap();
    let values: Vec<f64> = (0..4).map(|i| model.value(&g, 0, i).unwrap()).collect();
    println!("planted(2) over 4 items: {values:?}");

    // Personalized: per-edge positive scales on top of base values.
    let mut scales = BTreeMap::new();
    scales.insert((0, 2), 3.0);
    scales.insert((1, 2), 0.5);
    let model = RewardModel::personalized(vec![1.0, 2.0, 2.0, 0.5], scales).unwrap();
    println!(
        "personalized item 2: user 0 sees {}, user 1 sees {}",
        model.value(&g, 0, 2).unwrap(),
        model.value(&g, 1, 2).unwrap()
    );

    // Class sequences for the infinite setting: deterministic in the arrival
    // rank within the class.
    let seq = ClassSequence::GeometricDecay {
        initial: 1.0,
        ratio: 0.5,
    };
    let firsts: Vec<f64> = (1..=4).map(|k| seq.value(k)).collect();
    println!("geometric class sequence, first four values: {firsts:?}");

    // Noisy identification: below f views the value is unknown; afterwards a
    // single draw within (1 ± delta) is memoized.
    let mut oracle = ValueOracle::new(2, 0.25);
    println!(
        "one view:  {:?}",
        oracle.report(7, 4.0, 1, &mut rng)
    );
    let first = oracle.report(7, 4.0, 2, &mut rng).unwrap();
    let again = oracle.report(7, 4.0, 9, &mut rng).unwrap();
    println!("two views: {first:.3} (stable on re-query: {again:.3})");

    // Identification that fails with some probability: the exploit slot
    // falls to the second-best identified item, scaling the ratio by p_pred.
    let g = Arc::new(gen_complete_bipartite(4, 8).unwrap());
    for p_pred in [1.0, 0.7] {
        let mut sim = FiniteSim::new(
            g.clone(),
            ModelGen::planted(1),
            &PolicySpec::BpExp,
            1,
        )
        .unwrap();
        sim.p_pred = p_pred;
        let batch = estimate_gamma_finite(&sim, 20_000, 12);
        println!(
            "p_pred = {p_pred}: worst-user ratio {:.4} ± {:.4}",
            batch.estimate.gamma, batch.estimate.gamma_ci_half
        );
    }
}
