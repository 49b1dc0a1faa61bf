//! Independent exact verifiers, used as test oracles and by the acceptance
//! suites: expected run lengths under uniform permutations, the optimal
//! deterministic strategy for the planted-item search game (exact recursion,
//! closed form, and game-tree optimum), degenerate-sampler reward bounds, and
//! an exhaustive minimum-makespan search.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use thiserror::Error;

use crate::graph::AccessGraph;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("enumeration bound exceeded: {reds} + {blues} > {max}")]
    TooLarge { reds: usize, blues: usize, max: usize },
    #[error("need at least one red ball")]
    NoReds,
    #[error("need at least one user and one item")]
    EmptyGame,
}

const RUN_LENGTH_MAX: usize = 20;

/// Exact expected run lengths over all uniform arrangements of `reds` red and
/// `blues` blue balls.
#[derive(Debug, Clone)]
pub struct RunLengthTable {
    /// `per_index[i]` = expected length of the red run containing the
    /// (i+1)-th red ball.
    pub per_index: Vec<Ratio<u64>>,
    /// Maximum of `per_index`.
    pub max: Ratio<u64>,
    /// Number of arrangements enumerated.
    pub arrangements: u64,
}

impl RunLengthTable {
    /// Index (0-based) attaining the maximum, lowest on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.per_index.iter().enumerate() {
            if *v > self.per_index[best] {
                best = i;
            }
        }
        best
    }

    pub fn max_f64(&self) -> f64 {
        *self.max.numer() as f64 / *self.max.denom() as f64
    }
}

/// Enumerate every arrangement of `reds` red and `blues` blue balls and
/// compute, for each red index, the exact expected length of the maximal red
/// run containing it. Bounded to `reds + blues <= 20`.
pub fn run_length_table(reds: usize, blues: usize) -> Result<RunLengthTable, OracleError> {
    if reds == 0 {
        return Err(OracleError::NoReds);
    }
    let total = reds + blues;
    if total > RUN_LENGTH_MAX {
        return Err(OracleError::TooLarge {
            reds,
            blues,
            max: RUN_LENGTH_MAX,
        });
    }
    let mut sums = vec![0u64; reds];
    let mut arrangements = 0u64;
    // Masks with `blues` set bits mark blue positions.
    let mut mask: u32 = if blues == 0 { 0 } else { (1u32 << blues) - 1 };
    loop {
        arrangements += 1;
        let mut red_index = 0usize;
        let mut run_start = 0usize; // red_index at which the current run began
        for pos in 0..total {
            if mask >> pos & 1 == 1 {
                for i in run_start..red_index {
                    sums[i] += (red_index - run_start) as u64;
                }
                run_start = red_index;
            } else {
                red_index += 1;
            }
        }
        for i in run_start..red_index {
            sums[i] += (red_index - run_start) as u64;
        }

        if blues == 0 {
            break;
        }
        // Gosper's hack: next mask with the same popcount.
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        let next = (((r ^ mask) >> 2) / c) | r;
        if next >= 1u32 << total {
            break;
        }
        mask = next;
    }
    let per_index: Vec<Ratio<u64>> = sums
        .iter()
        .map(|&s| Ratio::new(s, arrangements))
        .collect();
    let max = per_index.iter().max().copied().unwrap();
    Ok(RunLengthTable {
        per_index,
        max,
        arrangements,
    })
}

fn big(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Expected total reward of the best deterministic strategy in the planted
/// search game on a complete bipartite graph (one hidden 1-valued item,
/// uniformly placed), evaluated through its recursion
/// `R(u, i) = u/i + (i-1)/i * R(u-1, i-1)` with bases `R(u, 1) = u` and
/// `R(1, i) = 1/i`. Exact rational arithmetic.
pub fn planted_search_recursion(n_users: usize, n_items: usize) -> Result<BigRational, OracleError> {
    if n_users == 0 || n_items == 0 {
        return Err(OracleError::EmptyGame);
    }
    let mut memo: HashMap<(usize, usize), BigRational> = HashMap::new();
    fn rec(
        u: usize,
        i: usize,
        memo: &mut HashMap<(usize, usize), BigRational>,
    ) -> BigRational {
        if i == 1 {
            return big(u);
        }
        if u == 1 {
            return big(1) / big(i);
        }
        if let Some(v) = memo.get(&(u, i)) {
            return v.clone();
        }
        let v = big(u) / big(i) + (big(i - 1) / big(i)) * rec(u - 1, i - 1, memo);
        memo.insert((u, i), v.clone());
        v
    }
    Ok(rec(n_users, n_items, &mut memo))
}

/// Closed form for the same quantity:
/// `min(u, i) * (2u + 1 - min(u, i)) / (2i)`.
pub fn planted_search_closed_form(
    n_users: usize,
    n_items: usize,
) -> Result<BigRational, OracleError> {
    if n_users == 0 || n_items == 0 {
        return Err(OracleError::EmptyGame);
    }
    let m = n_users.min(n_items);
    Ok(big(m) * (big(2 * n_users + 1) - big(m)) / big(2 * n_items))
}

/// Optimum of the planted search game by backward induction over game states
/// `(users left, unexplored items, found)`, maximizing over every available
/// action at every state. This searches the full space of deterministic
/// online strategies without assuming any structure of the optimum, so it is
/// an independent check of [`planted_search_recursion`].
pub fn planted_search_optimum(n_users: usize, n_items: usize) -> Result<BigRational, OracleError> {
    if n_users == 0 || n_items == 0 {
        return Err(OracleError::EmptyGame);
    }
    let mut memo: HashMap<(usize, usize, bool), BigRational> = HashMap::new();
    fn value(
        users: usize,
        unexplored: usize,
        found: bool,
        memo: &mut HashMap<(usize, usize, bool), BigRational>,
    ) -> BigRational {
        if users == 0 {
            return big(0);
        }
        if let Some(v) = memo.get(&(users, unexplored, found)) {
            return v.clone();
        }
        // Showing an already-explored item earns 1 only when the planted item
        // has been found (all other explored items are worth 0).
        let show_known = if found { big(1) } else { big(0) }
            + value(users - 1, unexplored, found, memo);
        let mut best = show_known;
        if unexplored > 0 {
            let explore = if found {
                // Every unexplored item is worth 0 once the planted item is
                // known, so exploring earns nothing now.
                value(users - 1, unexplored - 1, true, memo)
            } else {
                // The planted item is uniform over the unexplored items.
                let hit = big(1) / big(unexplored);
                hit.clone() * (big(1) + value(users - 1, unexplored - 1, true, memo))
                    + (big(1) - hit) * value(users - 1, unexplored - 1, false, memo)
            };
            if explore > best {
                best = explore;
            }
        }
        memo.insert((users, unexplored, found), best.clone());
        best
    }
    Ok(value(n_users, n_items, false, &mut memo))
}

/// Which of the two adversarial placements on the lopsided family a bound is
/// computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LopsidedPlacement {
    /// Each user's exclusive degree-1 item carries value 1.
    Exclusive,
    /// A single shared degree-n item carries value 1.
    Shared,
}

/// Upper bounds on the expected reward of degree-power exploration on the
/// lopsided family with `n` users.
#[derive(Debug, Clone, Copy)]
pub struct DegreePowerBound {
    /// Upper bound on the expected total reward over all users.
    pub reward_bound: f64,
    /// `reward_bound / n`: by symmetry, an upper bound on the per-user ratio.
    pub ratio_bound: f64,
}

/// Evaluate the reward upper bound for a sampler drawing items proportional
/// to `degree^(-1 + epsilon)` (exclusive placement) or `degree^(-1 - epsilon)`
/// (shared placement) on the lopsided family. Per-user terms are capped at 1
/// since they bound probabilities.
pub fn degree_power_reward_bound(
    n: usize,
    epsilon: f64,
    placement: LopsidedPlacement,
) -> DegreePowerBound {
    assert!(n >= 1 && epsilon > 0.0);
    let nf = n as f64;
    let reward_bound = match placement {
        LopsidedPlacement::Exclusive => (1..=n)
            .map(|j| (nf.powf(1.0 - epsilon) / j as f64).min(1.0))
            .sum(),
        LopsidedPlacement::Shared => (1..=n)
            .map(|j| (j as f64) * nf.powf(-1.0 - epsilon))
            .sum(),
    };
    DegreePowerBound {
        reward_bound,
        ratio_bound: reward_bound / nf,
    }
}

/// Exhaustive minimum makespan over all owner assignments (branch and bound).
/// Reference oracle for the semi-matching solver; exponential, keep inputs
/// small.
pub fn exhaustive_min_makespan(g: &AccessGraph) -> usize {
    fn dfs(g: &AccessGraph, item: usize, loads: &mut Vec<usize>, cur_max: usize, best: &mut usize) {
        if cur_max >= *best {
            return;
        }
        if item == g.n_items() {
            *best = cur_max;
            return;
        }
        for &u in g.item_neighbors(item) {
            loads[u] += 1;
            dfs(g, item + 1, loads, cur_max.max(loads[u]), best);
            loads[u] -= 1;
        }
    }
    let mut best = g.n_items() + 1;
    let mut loads = vec![0usize; g.n_users()];
    dfs(g, 0, &mut loads, 0, &mut best);
    best
}
