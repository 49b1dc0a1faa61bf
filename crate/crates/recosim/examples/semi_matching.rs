//! Balanced semi-matchings and greedy neighborhood partitions.
//!
//! A semi-matching assigns every item to one neighboring user; the balanced
//! one minimizes the largest per-user load (the makespan). The greedy
//! neighborhood partition splits one user's items into r sets whose
//! inverse-degree weights stay within twice the balanced optimum.
//!
//! Run with: cargo run --example semi_matching

use rand::rngs::StdRng;
use rand::SeedableRng;

use recosim::graph::{compute_stats, gen_random};
use recosim::partition::{
    balanced_semi_matching, greedy_neighborhood_partition, greedy_semi_matching,
    verify_partition_bound,
};

fn main() {
    let mut rng = StdRng::seed_from_u64(2024);
    let g = gen_random(5, 17, 0.35, &mut rng).unwrap();
    let stats = compute_stats(&g);

    let greedy = greedy_semi_matching(&g);
    let balanced = balanced_semi_matching(&g);
    println!(
        "random graph: {} users, {} items, {} edges, z_max {:.3}",
        g.n_users(),
        g.n_items(),
        g.n_edges(),
        stats.z_max
    );
    println!("greedy warm-start makespan : {}", greedy.max_load);
    println!("exact balanced makespan    : {}", balanced.max_load);
    println!("per-user loads             : {:?}", balanced.loads);

    // Semi-matchings serialize as "item owner" lines for reuse across runs.
    let text = balanced.to_text();
    let restored = recosim::partition::SemiMatching::parse(&text, &g).unwrap();
    assert_eq!(restored, balanced);

    // Per-user greedy splits: the heaviest set stays below 2 z_max / r.
    for r in [1usize, 2, 4] {
        let report = verify_partition_bound(&g, &stats, r);
        println!(
            "r = {r}: max set weight {:.3} <= bound {:.3} (slack {:.3}, violations {})",
            report.max_weight, report.bound, report.slack, report.violations
        );
    }

    let p = greedy_neighborhood_partition(&g, 0, 3);
    println!(
        "user 0 split into 3 sets, weights {:?}",
        p.weights.iter().map(|w| (w * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    );
}
