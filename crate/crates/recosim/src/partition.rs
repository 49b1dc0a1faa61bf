//! Item-side preprocessing: balanced semi-matchings (minimum makespan) and
//! per-user greedy neighborhood partitions.
//!
//! A semi-matching assigns every item to exactly one neighboring user; the
//! makespan is the largest per-user load. The exact optimum is found by
//! binary search on the load bound, with feasibility decided by max-flow and
//! a greedy assignment as warm start.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{AccessGraph, GraphStats};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("semi-matching line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("owner {user} of item {item} is not a neighbor")]
    NotNeighbor { user: usize, item: usize },
}

/// An assignment of every item to one neighboring user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiMatching {
    /// `owner[i]` = the user owning item `i`.
    pub owner: Vec<usize>,
    /// `loads[u]` = number of items owned by user `u`.
    pub loads: Vec<usize>,
    /// Maximum of `loads`.
    pub max_load: usize,
}

impl SemiMatching {
    fn from_owner(owner: Vec<usize>, n_users: usize) -> Self {
        let mut loads = vec![0usize; n_users];
        for &u in &owner {
            loads[u] += 1;
        }
        let max_load = loads.iter().copied().max().unwrap_or(0);
        SemiMatching {
            owner,
            loads,
            max_load,
        }
    }

    /// Items owned by user `u`.
    pub fn items_of(&self, u: usize) -> Vec<usize> {
        self.owner
            .iter()
            .enumerate()
            .filter(|&(_, &o)| o == u)
            .map(|(i, _)| i)
            .collect()
    }

    /// Serialize as one `item owner` pair per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, &u) in self.owner.iter().enumerate() {
            let _ = writeln!(out, "{i} {u}");
        }
        out
    }

    /// Parse the `item owner` line format and validate against the graph.
    pub fn parse(text: &str, g: &AccessGraph) -> Result<Self, PartitionError> {
        let mut owner = vec![usize::MAX; g.n_items()];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let mut next = |what: &str| -> Result<usize, PartitionError> {
                fields
                    .next()
                    .ok_or_else(|| PartitionError::Parse {
                        line: lineno + 1,
                        msg: format!("missing {what}"),
                    })?
                    .parse()
                    .map_err(|e| PartitionError::Parse {
                        line: lineno + 1,
                        msg: format!("bad {what}: {e}"),
                    })
            };
            let item = next("item")?;
            let user = next("owner")?;
            if item >= g.n_items() {
                return Err(PartitionError::Parse {
                    line: lineno + 1,
                    msg: format!("item {item} out of range"),
                });
            }
            if !g.has_edge(user, item) {
                return Err(PartitionError::NotNeighbor { user, item });
            }
            owner[item] = user;
        }
        if let Some(item) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(PartitionError::Parse {
                line: 0,
                msg: format!("item {item} has no owner"),
            });
        }
        Ok(SemiMatching::from_owner(owner, g.n_users()))
    }
}

/// Greedy assignment: items in ascending degree order, each to its currently
/// least-loaded neighbor (ties to the lowest user index).
pub fn greedy_semi_matching(g: &AccessGraph) -> SemiMatching {
    let mut items: Vec<usize> = (0..g.n_items()).collect();
    items.sort_by_key(|&i| (g.item_degree(i), i));
    let mut loads = vec![0usize; g.n_users()];
    let mut owner = vec![0usize; g.n_items()];
    for i in items {
        let u = *g
            .item_neighbors(i)
            .iter()
            .min_by_key(|&&u| (loads[u], u))
            .expect("every item has a neighbor");
        owner[i] = u;
        loads[u] += 1;
    }
    SemiMatching::from_owner(owner, g.n_users())
}

/// Exact minimum-makespan semi-matching.
///
/// Binary search on the load bound `L`; a bound is feasible when a flow
/// assigning every item to a neighbor with user capacity `L` saturates all
/// items. The greedy assignment caps the search from above, the pigeonhole
/// bound `ceil(n_items / n_users)` from below.
pub fn balanced_semi_matching(g: &AccessGraph) -> SemiMatching {
    let warm = greedy_semi_matching(g);
    let mut lo = g.n_items().div_ceil(g.n_users());
    let mut hi = warm.max_load;
    let mut best = warm;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match assign_with_capacity(g, mid) {
            Some(sm) => {
                best = sm;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    debug_assert_eq!(best.max_load, lo.max(best.max_load.min(lo)));
    best
}

/// Try to assign every item with per-user capacity `cap` via Dinic max-flow.
fn assign_with_capacity(g: &AccessGraph, cap: usize) -> Option<SemiMatching> {
    let n_users = g.n_users();
    let n_items = g.n_items();
    // Node ids: 0 = source, 1..=n_users users, then items, last = sink.
    let source = 0;
    let user0 = 1;
    let item0 = 1 + n_users;
    let sink = 1 + n_users + n_items;
    let mut flow = Dinic::new(sink + 1);
    for u in 0..n_users {
        flow.add_edge(source, user0 + u, cap as i64);
    }
    let mut edge_ids = Vec::with_capacity(g.n_edges());
    for (u, i) in g.edges() {
        edge_ids.push((i, u, flow.add_edge(user0 + u, item0 + i, 1)));
    }
    for i in 0..n_items {
        flow.add_edge(item0 + i, sink, 1);
    }
    let value = flow.max_flow(source, sink);
    if value != n_items as i64 {
        return None;
    }
    let mut owner = vec![usize::MAX; n_items];
    for (i, u, id) in edge_ids {
        if flow.edge_flow(id) > 0 {
            owner[i] = u;
        }
    }
    debug_assert!(owner.iter().all(|&o| o != usize::MAX));
    Some(SemiMatching::from_owner(owner, n_users))
}

struct DinicEdge {
    to: usize,
    cap: i64,
    rev: usize,
}

struct Dinic {
    adj: Vec<Vec<DinicEdge>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic {
            adj: (0..n).map(|_| Vec::new()).collect(),
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    /// Returns an id for later flow inspection.
    fn add_edge(&mut self, from: usize, to: usize, cap: i64) -> (usize, usize) {
        let fwd = self.adj[from].len();
        let back = self.adj[to].len();
        self.adj[from].push(DinicEdge {
            to,
            cap,
            rev: back,
        });
        self.adj[to].push(DinicEdge {
            to: from,
            cap: 0,
            rev: fwd,
        });
        (from, fwd)
    }

    fn edge_flow(&self, id: (usize, usize)) -> i64 {
        let e = &self.adj[id.0][id.1];
        // Residual on the reverse edge equals the flow pushed forward.
        self.adj[e.to][e.rev].cap
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.fill(-1);
        let mut queue = std::collections::VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for e in &self.adj[v] {
                if e.cap > 0 && self.level[e.to] < 0 {
                    self.level[e.to] = self.level[v] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, f: i64) -> i64 {
        if v == t {
            return f;
        }
        while self.iter[v] < self.adj[v].len() {
            let i = self.iter[v];
            let (to, cap, rev) = {
                let e = &self.adj[v][i];
                (e.to, e.cap, e.rev)
            };
            if cap > 0 && self.level[v] < self.level[to] {
                let d = self.dfs(to, t, f.min(cap));
                if d > 0 {
                    self.adj[v][i].cap -= d;
                    self.adj[to][rev].cap += d;
                    return d;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut flow = 0;
        while self.bfs(s, t) {
            self.iter.fill(0);
            loop {
                let f = self.dfs(s, t, i64::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
        flow
    }
}

/// One user's neighborhood split into `r` disjoint sets balanced by
/// inverse-degree weight.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodPartition {
    /// `sets[k]` = items of the k-th set, in assignment order.
    pub sets: Vec<Vec<usize>>,
    /// `weights[k]` = sum of 1/item_degree over `sets[k]`.
    pub weights: Vec<f64>,
}

impl NeighborhoodPartition {
    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    pub fn non_empty(&self) -> usize {
        self.sets.iter().filter(|s| !s.is_empty()).count()
    }
}

/// Greedy neighborhood partitioning for one user: items sorted by descending
/// inverse degree (ties by ascending item index), each assigned to the set
/// with the smallest current weight (ties to the lowest set index). With
/// fewer items than sets the surplus sets stay empty.
pub fn greedy_neighborhood_partition(
    g: &AccessGraph,
    user: usize,
    r: usize,
) -> NeighborhoodPartition {
    assert!(r >= 1, "need at least one set");
    let mut items: Vec<usize> = g.user_neighbors(user).to_vec();
    items.sort_by_key(|&i| (g.item_degree(i), i));
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); r];
    let mut weights = vec![0.0f64; r];
    for i in items {
        let mut k_best = 0;
        for k in 1..r {
            if weights[k] < weights[k_best] {
                k_best = k;
            }
        }
        sets[k_best].push(i);
        weights[k_best] += 1.0 / g.item_degree(i) as f64;
    }
    NeighborhoodPartition { sets, weights }
}

/// Compute partitions for every user.
pub fn all_neighborhood_partitions(g: &AccessGraph, r: usize) -> Vec<NeighborhoodPartition> {
    (0..g.n_users())
        .map(|u| greedy_neighborhood_partition(g, u, r))
        .collect()
}

/// Result of checking the balance guarantee `max set weight <= 2 z_max / r`
/// over all users.
#[derive(Debug, Clone)]
pub struct PartitionBoundReport {
    pub r: usize,
    pub z_max: f64,
    /// Largest set weight observed over all users and sets.
    pub max_weight: f64,
    /// The bound `2 z_max / r`.
    pub bound: f64,
    /// `bound - max_weight` (negative on violation).
    pub slack: f64,
    /// Number of (user, set) pairs exceeding the bound.
    pub violations: usize,
}

/// Check the greedy-partition balance guarantee for every user of the graph.
pub fn verify_partition_bound(g: &AccessGraph, stats: &GraphStats, r: usize) -> PartitionBoundReport {
    let bound = 2.0 * stats.z_max / r as f64;
    let mut max_weight = 0.0f64;
    let mut violations = 0;
    for u in 0..g.n_users() {
        let p = greedy_neighborhood_partition(g, u, r);
        for &w in &p.weights {
            if w > bound + 1e-12 {
                violations += 1;
            }
            max_weight = max_weight.max(w);
        }
    }
    PartitionBoundReport {
        r,
        z_max: stats.z_max,
        max_weight,
        bound,
        slack: bound - max_weight,
        violations,
    }
}
