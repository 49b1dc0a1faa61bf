//! Exact expected run lengths under uniform permutations.
//!
//! Shuffle R red and B blue balls uniformly; for the i-th red ball, how long
//! is the maximal all-red run containing it, in expectation? The middle
//! index sees the longest runs, yet even its expectation stays below
//! 4R/(B+1) + 2 — the combinatorial fact behind the latest-set size bound in
//! the infinite-horizon analysis.
//!
//! Run with: cargo run --example run_lengths

use recosim::oracle::run_length_table;

fn main() {
    let table = run_length_table(7, 2).unwrap();
    println!("R = 7 red, B = 2 blue ({} arrangements):", table.arrangements);
    for (i, v) in table.per_index.iter().enumerate() {
        let approx = *v.numer() as f64 / *v.denom() as f64;
        println!("  red index {}: E[run] = {v} = {approx:.4}", i + 1);
    }
    println!(
        "max {} at index {} (bound 4R/(B+1) + 2 = {})",
        table.max,
        table.argmax() + 1,
        4.0 * 7.0 / 3.0 + 2.0
    );

    // With a single blue ball the maximum has the closed form (3R + 1) / 4
    // for odd R, attained at the middle red ball.
    println!("\nsingle blue ball, odd R:");
    for r in [3usize, 5, 7, 9] {
        let t = run_length_table(r, 1).unwrap();
        println!(
            "  R = {r}: max E[run] = {} (closed form {}/4), index {}",
            t.max,
            3 * r + 1,
            t.argmax() + 1
        );
    }
}
