//! Bipartite access graphs between users and items (or item-classes).
//!
//! The graph fixes which items a user may ever be shown. Adjacency is stored
//! CSR-style on both sides (flat sorted index arrays with offsets) because the
//! simulators sample neighborhoods millions of times. Graphs are immutable
//! after construction and safe to share across simulation workers.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

/// Tolerance for float equality checks on derived graph quantities.
pub const STATS_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("user index {user} out of range (n_users = {n_users})")]
    UserOutOfRange { user: usize, n_users: usize },
    #[error("item index {item} out of range (n_items = {n_items})")]
    ItemOutOfRange { item: usize, n_items: usize },
    #[error("item {item} has no neighboring user and could never be shown")]
    ZeroDegreeItem { item: usize },
    #[error("graph must have at least one user and one item")]
    EmptySide,
    #[error("n_users * user_degree = {product} is not divisible by n_items = {n_items}")]
    NotDivisible { product: usize, n_items: usize },
    #[error("user_degree {degree} exceeds n_items {n_items}")]
    DegreeTooLarge { degree: usize, n_items: usize },
    #[error("graph file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Immutable bipartite access graph.
///
/// Users are `0..n_users`, items `0..n_items`. In the infinite-horizon
/// setting the right side holds item-classes; the representation is the same.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessGraph {
    n_users: usize,
    n_items: usize,
    user_offsets: Vec<usize>,
    user_edges: Vec<usize>,
    item_offsets: Vec<usize>,
    item_edges: Vec<usize>,
}

impl AccessGraph {
    /// Build a graph from an edge list. Duplicate edges are collapsed;
    /// out-of-range indices and items with no neighbors are rejected.
    pub fn build(
        edges: &[(usize, usize)],
        n_users: usize,
        n_items: usize,
    ) -> Result<Self, GraphError> {
        if n_users == 0 || n_items == 0 {
            return Err(GraphError::EmptySide);
        }
        let mut per_user: Vec<Vec<usize>> = vec![Vec::new(); n_users];
        for &(u, i) in edges {
            if u >= n_users {
                return Err(GraphError::UserOutOfRange { user: u, n_users });
            }
            if i >= n_items {
                return Err(GraphError::ItemOutOfRange { item: i, n_items });
            }
            per_user[u].push(i);
        }
        for list in &mut per_user {
            list.sort_unstable();
            list.dedup();
        }

        let mut user_offsets = Vec::with_capacity(n_users + 1);
        let mut user_edges = Vec::new();
        user_offsets.push(0);
        for list in &per_user {
            user_edges.extend_from_slice(list);
            user_offsets.push(user_edges.len());
        }

        let mut item_degree = vec![0usize; n_items];
        for &i in &user_edges {
            item_degree[i] += 1;
        }
        if let Some(item) = item_degree.iter().position(|&d| d == 0) {
            return Err(GraphError::ZeroDegreeItem { item });
        }

        let mut item_offsets = Vec::with_capacity(n_items + 1);
        item_offsets.push(0);
        for &d in &item_degree {
            item_offsets.push(item_offsets.last().unwrap() + d);
        }
        let mut write = item_offsets[..n_items].to_vec();
        let mut item_edges = vec![0usize; user_edges.len()];
        for u in 0..n_users {
            for &i in &user_edges[user_offsets[u]..user_offsets[u + 1]] {
                item_edges[write[i]] = u;
                write[i] += 1;
            }
        }
        // Users are visited in ascending order, so each item's list is sorted.

        Ok(Self {
            n_users,
            n_items,
            user_offsets,
            user_edges,
            item_offsets,
            item_edges,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn n_edges(&self) -> usize {
        self.user_edges.len()
    }

    /// Sorted item neighbors of a user.
    pub fn user_neighbors(&self, u: usize) -> &[usize] {
        &self.user_edges[self.user_offsets[u]..self.user_offsets[u + 1]]
    }

    /// Sorted user neighbors of an item.
    pub fn item_neighbors(&self, i: usize) -> &[usize] {
        &self.item_edges[self.item_offsets[i]..self.item_offsets[i + 1]]
    }

    pub fn user_degree(&self, u: usize) -> usize {
        self.user_offsets[u + 1] - self.user_offsets[u]
    }

    pub fn item_degree(&self, i: usize) -> usize {
        self.item_offsets[i + 1] - self.item_offsets[i]
    }

    /// Whether edge `(u, i)` is present.
    pub fn has_edge(&self, u: usize, i: usize) -> bool {
        self.user_neighbors(u).binary_search(&i).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_users).flat_map(move |u| self.user_neighbors(u).iter().map(move |&i| (u, i)))
    }

    /// Serialize in the plain-text graph format (see [`parse_graph`]).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_users, self.n_items);
        for (u, i) in self.edges() {
            let _ = writeln!(out, "{u} {i}");
        }
        out
    }
}

/// Derived per-graph quantities: inverse-degree mass per user and degree
/// histograms.
#[derive(Debug, Clone)]
pub struct GraphStats {
    /// `z[u] = sum over neighboring items of 1/item_degree`.
    pub z_per_user: Vec<f64>,
    /// Maximum of `z_per_user`.
    pub z_max: f64,
    /// `user_degree_hist[d]` = number of users with degree `d`.
    pub user_degree_hist: Vec<usize>,
    /// `item_degree_hist[d]` = number of items with degree `d`.
    pub item_degree_hist: Vec<usize>,
}

/// Compute [`GraphStats`].
///
/// Reciprocals are summed in descending-degree order (smallest terms first)
/// to reduce rounding error.
pub fn compute_stats(g: &AccessGraph) -> GraphStats {
    let mut z_per_user = Vec::with_capacity(g.n_users());
    for u in 0..g.n_users() {
        let mut degrees: Vec<usize> = g.user_neighbors(u).iter().map(|&i| g.item_degree(i)).collect();
        degrees.sort_unstable_by(|a, b| b.cmp(a));
        let z: f64 = degrees.iter().map(|&d| 1.0 / d as f64).sum();
        z_per_user.push(z);
    }
    let z_max = z_per_user.iter().copied().fold(0.0, f64::max);

    let max_ud = (0..g.n_users()).map(|u| g.user_degree(u)).max().unwrap_or(0);
    let mut user_degree_hist = vec![0usize; max_ud + 1];
    for u in 0..g.n_users() {
        user_degree_hist[g.user_degree(u)] += 1;
    }
    let max_id = (0..g.n_items()).map(|i| g.item_degree(i)).max().unwrap_or(0);
    let mut item_degree_hist = vec![0usize; max_id + 1];
    for i in 0..g.n_items() {
        item_degree_hist[g.item_degree(i)] += 1;
    }

    GraphStats {
        z_per_user,
        z_max,
        user_degree_hist,
        item_degree_hist,
    }
}

/// Complete bipartite graph: every user sees every item.
pub fn gen_complete_bipartite(n_users: usize, n_items: usize) -> Result<AccessGraph, GraphError> {
    if n_users == 0 || n_items == 0 {
        return Err(GraphError::EmptySide);
    }
    let edges: Vec<(usize, usize)> = (0..n_users)
        .flat_map(|u| (0..n_items).map(move |i| (u, i)))
        .collect();
    AccessGraph::build(&edges, n_users, n_items)
}

/// Lopsided family: `n` users and `2n` items. User `j` has one exclusive
/// degree-1 item `j`, and items `n..2n` are shared by all users, so every
/// user sees `n + 1` items and the inverse-degree mass is `z_max = 2` for
/// every `n`. The degree spread (1 vs `n`) makes the family a stress test for
/// popularity-biased exploration.
pub fn gen_lopsided(n: usize) -> Result<AccessGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::EmptySide);
    }
    let mut edges = Vec::with_capacity(n + n * n);
    for j in 0..n {
        edges.push((j, j));
    }
    for u in 0..n {
        for i in n..2 * n {
            edges.push((u, i));
        }
    }
    AccessGraph::build(&edges, n, 2 * n)
}

/// Bi-regular circulant graph: user `u` connects to items
/// `(u * user_degree + k) % n_items` for `k < user_degree`. Requires
/// `n_users * user_degree` divisible by `n_items`, which makes all item
/// degrees equal to `n_users * user_degree / n_items`.
pub fn gen_biregular(
    n_users: usize,
    n_items: usize,
    user_degree: usize,
) -> Result<AccessGraph, GraphError> {
    if n_users == 0 || n_items == 0 || user_degree == 0 {
        return Err(GraphError::EmptySide);
    }
    if user_degree > n_items {
        return Err(GraphError::DegreeTooLarge {
            degree: user_degree,
            n_items,
        });
    }
    let product = n_users * user_degree;
    if product % n_items != 0 {
        return Err(GraphError::NotDivisible { product, n_items });
    }
    let mut edges = Vec::with_capacity(product);
    for u in 0..n_users {
        for k in 0..user_degree {
            edges.push((u, (u * user_degree + k) % n_items));
        }
    }
    AccessGraph::build(&edges, n_users, n_items)
}

/// Disjoint stars: each user owns `items_per_user` exclusive degree-1 items.
pub fn gen_disjoint_stars(
    n_users: usize,
    items_per_user: usize,
) -> Result<AccessGraph, GraphError> {
    if n_users == 0 || items_per_user == 0 {
        return Err(GraphError::EmptySide);
    }
    let edges: Vec<(usize, usize)> = (0..n_users)
        .flat_map(|u| (0..items_per_user).map(move |k| (u, u * items_per_user + k)))
        .collect();
    AccessGraph::build(&edges, n_users, n_users * items_per_user)
}

/// Random graph with independent edge probability `p`. Any item that ends up
/// with no neighbor is attached to one uniformly random user so the
/// zero-degree invariant holds.
pub fn gen_random(
    n_users: usize,
    n_items: usize,
    p: f64,
    rng: &mut impl rand::Rng,
) -> Result<AccessGraph, GraphError> {
    if n_users == 0 || n_items == 0 {
        return Err(GraphError::EmptySide);
    }
    let mut edges = Vec::new();
    let mut item_seen = vec![false; n_items];
    for u in 0..n_users {
        for i in 0..n_items {
            if rng.random::<f64>() < p {
                edges.push((u, i));
                item_seen[i] = true;
            }
        }
    }
    for (i, seen) in item_seen.iter().enumerate() {
        if !seen {
            edges.push((rng.random_range(0..n_users), i));
        }
    }
    AccessGraph::build(&edges, n_users, n_items)
}

/// Parse the plain-text graph format: first non-comment line `n_users
/// n_items`, then one `u i` pair per line. Lines starting with `#` and blank
/// lines are ignored.
pub fn parse_graph(text: &str) -> Result<AccessGraph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let parse = |s: Option<&str>, what: &str| -> Result<usize, GraphError> {
            s.ok_or_else(|| GraphError::Parse {
                line: lineno + 1,
                msg: format!("missing {what}"),
            })?
            .parse::<usize>()
            .map_err(|e| GraphError::Parse {
                line: lineno + 1,
                msg: format!("bad {what}: {e}"),
            })
        };
        let a = parse(fields.next(), "first field")?;
        let b = parse(fields.next(), "second field")?;
        if fields.next().is_some() {
            return Err(GraphError::Parse {
                line: lineno + 1,
                msg: "expected exactly two fields".into(),
            });
        }
        match header {
            None => header = Some((a, b)),
            Some(_) => edges.push((a, b)),
        }
    }
    let (n_users, n_items) = header.ok_or(GraphError::Parse {
        line: 0,
        msg: "missing header line".into(),
    })?;
    AccessGraph::build(&edges, n_users, n_items)
}

/// Load a graph from a file in the plain-text format.
pub fn load_graph(path: &Path) -> Result<AccessGraph, GraphError> {
    parse_graph(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn build_counts_degrees() {
        let g = AccessGraph::build(&[(0, 0), (0, 1), (1, 1)], 2, 2).unwrap();
        assert_eq!(g.user_degree(0), 2);
        assert_eq!(g.user_degree(1), 1);
        assert_eq!(g.item_degree(0), 1);
        assert_eq!(g.item_degree(1), 2);
    }

    #[test]
    fn build_dedups_edges() {
        let g = AccessGraph::build(&[(0, 0), (0, 0), (0, 1), (1, 1)], 2, 2).unwrap();
        assert_eq!(g.n_edges(), 3);
        assert_eq!(g.user_neighbors(0), &[0, 1]);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(matches!(
            AccessGraph::build(&[(2, 0)], 2, 1),
            Err(GraphError::UserOutOfRange { user: 2, .. })
        ));
        assert!(matches!(
            AccessGraph::build(&[(0, 3)], 2, 2),
            Err(GraphError::ItemOutOfRange { item: 3, .. })
        ));
        // Item 1 has no neighbor: the error names it.
        assert!(matches!(
            AccessGraph::build(&[(0, 0)], 1, 2),
            Err(GraphError::ZeroDegreeItem { item: 1 })
        ));
        assert!(matches!(
            AccessGraph::build(&[], 0, 1),
            Err(GraphError::EmptySide)
        ));
    }

    #[test]
    fn complete_bipartite_shapes() {
        let g = gen_complete_bipartite(2, 3).unwrap();
        assert_eq!(g.n_edges(), 6);
        let g = gen_complete_bipartite(1, 1).unwrap();
        assert_eq!(g.n_edges(), 1);
        let g = gen_complete_bipartite(3, 6).unwrap();
        assert!((0..3).all(|u| g.user_degree(u) == 6));
        assert!((0..6).all(|i| g.item_degree(i) == 3));
        let g = gen_complete_bipartite(3, 3).unwrap();
        assert!((0..3).all(|i| g.item_degree(i) == 3));
        assert!(gen_complete_bipartite(0, 3).is_err());
    }

    #[test]
    fn stats_on_complete_bipartite() {
        let g = gen_complete_bipartite(4, 8).unwrap();
        let s = compute_stats(&g);
        for z in &s.z_per_user {
            assert!((z - 2.0).abs() < STATS_TOL);
        }
        assert!((s.z_max - 2.0).abs() < STATS_TOL);
    }

    #[test]
    fn stats_single_edge() {
        let g = AccessGraph::build(&[(0, 0)], 1, 1).unwrap();
        let s = compute_stats(&g);
        assert!((s.z_max - 1.0).abs() < STATS_TOL);
    }

    #[test]
    fn lopsided_structure() {
        let g = gen_lopsided(2).unwrap();
        assert_eq!(g.n_edges(), 6);
        let degs: Vec<usize> = (0..4).map(|i| g.item_degree(i)).collect();
        assert_eq!(degs, vec![1, 1, 2, 2]);

        let g = gen_lopsided(1).unwrap();
        assert_eq!(g.user_neighbors(0), &[0, 1]);

        for n in [1usize, 2, 3, 5, 17] {
            let g = gen_lopsided(n).unwrap();
            let s = compute_stats(&g);
            assert!((s.z_max - 2.0).abs() < STATS_TOL, "n={n} z={}", s.z_max);
        }
    }

    #[test]
    fn biregular_shapes() {
        let g = gen_biregular(4, 4, 1).unwrap();
        assert!((0..4).all(|i| g.item_degree(i) == 1));
        assert_eq!(g.n_edges(), 4);

        let g = gen_biregular(2, 4, 2).unwrap();
        assert!((0..4).all(|i| g.item_degree(i) == 1));

        let g = gen_biregular(4, 2, 1).unwrap();
        assert!((0..2).all(|i| g.item_degree(i) == 2));

        assert!(matches!(
            gen_biregular(3, 2, 3),
            Err(GraphError::DegreeTooLarge { .. })
        ));
        assert!(matches!(
            gen_biregular(3, 4, 1),
            Err(GraphError::NotDivisible { .. })
        ));
    }

    #[test]
    fn biregular_is_biregular_across_params() {
        for (nu, ni, d) in [(4, 8, 4), (8, 4, 3), (6, 9, 3), (5, 10, 4), (12, 8, 2)] {
            let g = gen_biregular(nu, ni, d).unwrap();
            assert!((0..nu).all(|u| g.user_degree(u) == d), "{nu}x{ni} d={d}");
            let want = nu * d / ni;
            assert!((0..ni).all(|i| g.item_degree(i) == want), "{nu}x{ni} d={d}");
        }
    }

    #[test]
    fn disjoint_stars_shapes() {
        let g = gen_disjoint_stars(2, 3).unwrap();
        assert_eq!(g.n_items(), 6);
        assert!((0..6).all(|i| g.item_degree(i) == 1));
        let g = gen_disjoint_stars(1, 1).unwrap();
        assert_eq!(g.n_edges(), 1);
        let g = gen_disjoint_stars(3, 2).unwrap();
        let s = compute_stats(&g);
        assert!((s.z_max - 2.0).abs() < STATS_TOL);
    }

    #[test]
    fn text_round_trip() {
        let g = gen_lopsided(3).unwrap();
        let g2 = parse_graph(&g.to_text()).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let err = parse_graph("2 2\n0 0\nbad line here\n").unwrap_err();
        match err {
            GraphError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        let g = parse_graph("# comment\n2 2\n\n0 0\n0 1\n1 1\n").unwrap();
        assert_eq!(g.n_edges(), 3);
    }

    #[test]
    fn random_graph_has_no_orphan_items() {
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..20 {
            let g = gen_random(5, 12, 0.1, &mut rng).unwrap();
            assert!((0..12).all(|i| g.item_degree(i) >= 1));
        }
    }

    // Each item spreads exactly one unit of inverse-degree mass over its
    // neighbors, so the per-user masses must add up to the item count.
    fn assert_mass_conservation(g: &AccessGraph) {
        let s = compute_stats(g);
        let total: f64 = s.z_per_user.iter().sum();
        assert!(
            (total - g.n_items() as f64).abs() < STATS_TOL * g.n_items().max(1) as f64,
            "sum z = {total}, items = {}",
            g.n_items()
        );
        let avg = total / g.n_users() as f64;
        assert!(s.z_max >= avg - STATS_TOL);
        for u in 0..g.n_users() {
            assert!(s.z_per_user[u] <= g.user_degree(u) as f64 + STATS_TOL);
        }
    }

    #[test]
    fn mass_conservation_on_generators() {
        assert_mass_conservation(&gen_complete_bipartite(4, 8).unwrap());
        assert_mass_conservation(&gen_lopsided(7).unwrap());
        assert_mass_conservation(&gen_biregular(6, 9, 3).unwrap());
        assert_mass_conservation(&gen_disjoint_stars(3, 4).unwrap());
    }

    proptest! {
        #[test]
        fn mass_conservation_on_random_graphs(seed in any::<u64>(), nu in 1usize..10, ni in 1usize..20) {
            let mut rng = StdRng::seed_from_u64(seed);
            let g = gen_random(nu, ni, 0.3, &mut rng).unwrap();
            assert_mass_conservation(&g);
        }

        #[test]
        fn adjacency_is_mutually_consistent(seed in any::<u64>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let g = gen_random(6, 10, 0.4, &mut rng).unwrap();
            for (u, i) in g.edges() {
                prop_assert!(g.item_neighbors(i).binary_search(&u).is_ok());
            }
            let reverse_count: usize = (0..g.n_items()).map(|i| g.item_neighbors(i).len()).sum();
            prop_assert_eq!(reverse_count, g.n_edges());
        }
    }
}
