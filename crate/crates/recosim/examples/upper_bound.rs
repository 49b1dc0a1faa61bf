//! The planted-item search game caps every online policy.
//!
//! With one hidden 1-valued item placed uniformly on a complete bipartite
//! graph, the best deterministic strategy earns exactly
//! min(u, i) (2u + 1 - min(u, i)) / (2i) in total — computed three ways
//! (recursion, closed form, and full game-tree optimization) and compared
//! against what the implemented policies actually achieve per user.
//!
//! Run with: cargo run --release --example upper_bound

use std::sync::Arc;

use num_traits::ToPrimitive;

use recosim::graph::gen_complete_bipartite;
use recosim::oracle::{
    planted_search_closed_form, planted_search_optimum, planted_search_recursion,
};
use recosim::policy::{ExploreRule, PolicySpec};
use recosim::sim::finite::{estimate_gamma_finite, FiniteSim, ModelGen};

fn main() {
    println!("search-game optimum, three independent routes:");
    println!("{:>6} {:>6} {:>12} {:>12} {:>12}", "users", "items", "recursion", "closed", "game tree");
    for (u, i) in [(2usize, 2usize), (3, 5), (4, 5), (5, 6)] {
        let rec = planted_search_recursion(u, i).unwrap();
        let closed = planted_search_closed_form(u, i).unwrap();
        let opt = planted_search_optimum(u, i).unwrap();
        assert_eq!(rec, closed);
        assert_eq!(rec, opt);
        println!(
            "{u:>6} {i:>6} {:>12.5} {:>12.5} {:>12.5}",
            rec.to_f64().unwrap(),
            closed.to_f64().unwrap(),
            opt.to_f64().unwrap()
        );
    }

    let (n_users, n_items, trials) = (4usize, 32usize, 20_000u64);
    let per_user_cap = planted_search_recursion(n_users, n_items)
        .unwrap()
        .to_f64()
        .unwrap()
        / n_users as f64;
    println!("\ncomplete bipartite {n_users}x{n_items}, r = 1, planted item per trial");
    println!("per-user optimum {per_user_cap:.4}; measured worst-user ratios:");
    let policies = [
        PolicySpec::BpExp,
        PolicySpec::IdExp,
        PolicySpec::UniformExplore,
        PolicySpec::ExploitWhenPossible {
            explore: ExploreRule::Uniform,
        },
    ];
    for spec in policies {
        let sim = FiniteSim::new(
            Arc::new(gen_complete_bipartite(n_users, n_items).unwrap()),
            ModelGen::planted(1),
            &spec,
            1,
        )
        .unwrap();
        let batch = estimate_gamma_finite(&sim, trials, 5);
        println!(
            "  {:<34} {:.4} ± {:.4}",
            spec.name(),
            batch.estimate.gamma,
            batch.estimate.gamma_ci_half
        );
    }
}
