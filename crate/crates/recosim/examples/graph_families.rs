//! Tour of the built-in access-graph families and their derived statistics:
//! degrees, inverse-degree mass per user (z), and the makespan of the
//! balanced item assignment.
//!
//! Run with: cargo run --example graph_families

use recosim::graph::{
    compute_stats, gen_biregular, gen_complete_bipartite, gen_disjoint_stars, gen_lopsided,
    parse_graph,
};
use recosim::partition::balanced_semi_matching;

fn describe(name: &str, g: &recosim::AccessGraph) {
    let stats = compute_stats(g);
    let sm = balanced_semi_matching(g);
    println!(
        "{name:<28} users {:>3}  items {:>3}  edges {:>5}  z_max {:>6.3}  makespan {}",
        g.n_users(),
        g.n_items(),
        g.n_edges(),
        stats.z_max,
        sm.max_load
    );
}

fn main() {
    describe("complete_bipartite(4, 8)", &gen_complete_bipartite(4, 8).unwrap());
    describe("biregular(4, 8, 4)", &gen_biregular(4, 8, 4).unwrap());
    describe("disjoint_stars(4, 3)", &gen_disjoint_stars(4, 3).unwrap());
    // The lopsided family mixes degree-1 exclusive items with degree-n
    // shared items; its inverse-degree mass stays 2 at every size.
    for n in [4usize, 16, 64] {
        describe(&format!("lopsided({n})"), &gen_lopsided(n).unwrap());
    }

    // Graphs round-trip through a plain text format: a header line with the
    // side sizes, then one edge per line.
    let g = gen_lopsided(3).unwrap();
    let text = g.to_text();
    println!("\nlopsided(3) in the text format:\n{text}");
    let reparsed = parse_graph(&text).unwrap();
    assert_eq!(reparsed, g);
    println!("round-trips losslessly: ok");
}
