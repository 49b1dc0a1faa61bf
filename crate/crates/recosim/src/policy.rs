//! Recommendation policies for the finite-population setting, the policy
//! vocabulary shared with the infinite-horizon simulator, and the
//! explore/exploit slot split.
//!
//! Every policy fills up to `r` slots per arrival. Pool exhaustion follows
//! fixed fallback rules: an explore slot with an empty pool converts to
//! exploit, an exploit slot with an empty pool converts to explore, and when
//! both pools are empty the slot stays unfilled.

use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::graph::AccessGraph;
use crate::partition::{
    all_neighborhood_partitions, balanced_semi_matching, NeighborhoodPartition, SemiMatching,
};
use crate::reward::{RewardModel, ValueOracle};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("policy {policy} is not available in the {setting} setting")]
    WrongSetting {
        policy: String,
        setting: &'static str,
    },
    #[error("cannot parse policy spec '{spec}': {msg}")]
    Parse { spec: String, msg: String },
}

/// How a rule-based policy picks items when it explores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExploreRule {
    /// Uniform over unexplored neighbors.
    Uniform,
    /// Proportional to `item_degree^exponent` over unexplored neighbors.
    DegreePower { exponent: f64 },
}

/// A recommendation policy, selectable by name in experiment configs.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    /// Balanced-partition exploration: explore uniformly inside the user's
    /// share of a minimum-makespan item partition.
    BpExp,
    /// Inverse-degree exploration over a per-user greedy neighborhood
    /// partition.
    IdExp,
    /// Explore uniformly over unexplored neighbors.
    UniformExplore,
    /// Explore proportional to `degree^exponent` over unexplored neighbors.
    DegreePower { exponent: f64 },
    /// Exploit all slots whenever any identified neighbor has positive
    /// reported value, else explore all slots with the given rule.
    ExploitWhenPossible { explore: ExploreRule },
    /// Exploit all slots iff the best reported value exceeds `threshold`,
    /// else explore all slots with the given rule.
    ExploitAboveThreshold { threshold: f64, explore: ExploreRule },
    /// Shows the true top-r items; harness self-test with ratio exactly 1.
    Genie,
    /// Uniform latest-item exploration (infinite-horizon only).
    ULExp,
    /// Multi-view latest exploration with per-item view counters
    /// (infinite-horizon only). `delta`, when set, overrides the experiment's
    /// identification noise.
    ULExpF { views: u32, delta: Option<f64> },
}

impl PolicySpec {
    /// Stable name, used in CSV output and to derive per-policy RNG streams.
    pub fn name(&self) -> String {
        match self {
            PolicySpec::BpExp => "bpexp".into(),
            PolicySpec::IdExp => "idexp".into(),
            PolicySpec::UniformExplore => "uniform_explore".into(),
            PolicySpec::DegreePower { exponent } => format!("degree_power({exponent})"),
            PolicySpec::ExploitWhenPossible { explore } => {
                format!("exploit_when_possible({})", explore_rule_name(explore))
            }
            PolicySpec::ExploitAboveThreshold { threshold, explore } => format!(
                "exploit_above_threshold({threshold}, {})",
                explore_rule_name(explore)
            ),
            PolicySpec::Genie => "genie".into(),
            PolicySpec::ULExp => "ulexp".into(),
            PolicySpec::ULExpF { views, delta } => match delta {
                Some(d) => format!("ulexp_f({views}, {d})"),
                None => format!("ulexp_f({views})"),
            },
        }
    }

    pub fn supports_finite(&self) -> bool {
        !matches!(self, PolicySpec::ULExp | PolicySpec::ULExpF { .. })
    }

    pub fn supports_infinite(&self) -> bool {
        matches!(
            self,
            PolicySpec::ULExp | PolicySpec::ULExpF { .. } | PolicySpec::Genie
        )
    }
}

fn explore_rule_name(rule: &ExploreRule) -> String {
    match rule {
        ExploreRule::Uniform => "uniform".into(),
        ExploreRule::DegreePower { exponent } => format!("degree_power({exponent})"),
    }
}

fn parse_args(spec: &str) -> Result<(String, Vec<String>), PolicyError> {
    let spec = spec.trim();
    match spec.find('(') {
        None => Ok((spec.to_string(), Vec::new())),
        Some(open) => {
            if !spec.ends_with(')') {
                return Err(PolicyError::Parse {
                    spec: spec.into(),
                    msg: "missing closing parenthesis".into(),
                });
            }
            let name = spec[..open].trim().to_string();
            let inner = &spec[open + 1..spec.len() - 1];
            // Split on top-level commas only; nested parens belong to
            // sub-rules such as degree_power(-0.5).
            let mut args = Vec::new();
            let mut depth = 0usize;
            let mut cur = String::new();
            for ch in inner.chars() {
                match ch {
                    '(' => {
                        depth += 1;
                        cur.push(ch);
                    }
                    ')' => {
                        depth -= 1;
                        cur.push(ch);
                    }
                    ',' if depth == 0 => {
                        args.push(cur.trim().to_string());
                        cur.clear();
                    }
                    _ => cur.push(ch),
                }
            }
            if !cur.trim().is_empty() {
                args.push(cur.trim().to_string());
            }
            Ok((name, args))
        }
    }
}

fn parse_f64(spec: &str, arg: &str) -> Result<f64, PolicyError> {
    arg.parse().map_err(|e| PolicyError::Parse {
        spec: spec.into(),
        msg: format!("bad number '{arg}': {e}"),
    })
}

fn parse_explore_rule(spec: &str, arg: &str) -> Result<ExploreRule, PolicyError> {
    let (name, args) = parse_args(arg)?;
    match (name.as_str(), args.len()) {
        ("uniform", 0) => Ok(ExploreRule::Uniform),
        ("degree_power", 1) => Ok(ExploreRule::DegreePower {
            exponent: parse_f64(spec, &args[0])?,
        }),
        _ => Err(PolicyError::Parse {
            spec: spec.into(),
            msg: format!("unknown explore rule '{arg}'"),
        }),
    }
}

impl FromStr for PolicySpec {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, PolicyError> {
        let (name, args) = parse_args(s)?;
        let wrong_arity = || PolicyError::Parse {
            spec: s.into(),
            msg: format!("wrong number of arguments for '{name}'"),
        };
        match name.as_str() {
            "bpexp" => args.is_empty().then_some(PolicySpec::BpExp).ok_or_else(wrong_arity),
            "idexp" => args.is_empty().then_some(PolicySpec::IdExp).ok_or_else(wrong_arity),
            "uniform_explore" => args
                .is_empty()
                .then_some(PolicySpec::UniformExplore)
                .ok_or_else(wrong_arity),
            "genie" => args.is_empty().then_some(PolicySpec::Genie).ok_or_else(wrong_arity),
            "ulexp" => args.is_empty().then_some(PolicySpec::ULExp).ok_or_else(wrong_arity),
            "degree_power" => {
                if args.len() != 1 {
                    return Err(wrong_arity());
                }
                Ok(PolicySpec::DegreePower {
                    exponent: parse_f64(s, &args[0])?,
                })
            }
            "exploit_when_possible" => {
                if args.len() != 1 {
                    return Err(wrong_arity());
                }
                Ok(PolicySpec::ExploitWhenPossible {
                    explore: parse_explore_rule(s, &args[0])?,
                })
            }
            "exploit_above_threshold" => {
                if args.len() != 2 {
                    return Err(wrong_arity());
                }
                Ok(PolicySpec::ExploitAboveThreshold {
                    threshold: parse_f64(s, &args[0])?,
                    explore: parse_explore_rule(s, &args[1])?,
                })
            }
            "ulexp_f" => {
                if args.is_empty() || args.len() > 2 {
                    return Err(wrong_arity());
                }
                let views: u32 = args[0].parse().map_err(|e| PolicyError::Parse {
                    spec: s.into(),
                    msg: format!("bad view count '{}': {e}", args[0]),
                })?;
                if views == 0 {
                    return Err(PolicyError::Parse {
                        spec: s.into(),
                        msg: "view count must be at least 1".into(),
                    });
                }
                let delta = match args.get(1) {
                    Some(a) => Some(parse_f64(s, a)?),
                    None => None,
                };
                Ok(PolicySpec::ULExpF { views, delta })
            }
            _ => Err(PolicyError::Parse {
                spec: s.into(),
                msg: format!("unknown policy '{name}'"),
            }),
        }
    }
}

/// Whether a filled slot was an exploration or an exploitation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Explore,
    Exploit,
}

/// The items shown during one arrival, at most `r`, all distinct, all inside
/// the arriving user's neighborhood.
#[derive(Debug, Clone, Default)]
pub struct Recommendation {
    pub slots: Vec<(usize, SlotKind)>,
}

impl Recommendation {
    pub fn items(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().map(|&(i, _)| i)
    }

    pub fn contains(&self, item: usize) -> bool {
        self.slots.iter().any(|&(i, _)| i == item)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Split `r` slots into `(explore, exploit)` counts with the explore count
/// binomially distributed at `explore_prob`.
pub fn split_slots(r: usize, explore_prob: f64, rng: &mut impl Rng) -> (usize, usize) {
    assert!((0.0..=1.0).contains(&explore_prob));
    if r == 0 {
        return (0, 0);
    }
    let n_explore = Binomial::new(r as u64, explore_prob)
        .expect("valid binomial")
        .sample(rng) as usize;
    (n_explore, r - n_explore)
}

/// Mutable per-trial state visible to the finite-setting policies.
pub struct FiniteContext<'a> {
    pub graph: &'a AccessGraph,
    pub model: &'a RewardModel,
    /// Per-item presentation counts.
    pub views: Vec<u32>,
    /// Items whose view count reached the oracle's threshold, in the order
    /// they became identified.
    pub identified: Vec<usize>,
    pub oracle: ValueOracle,
    /// Slots per arrival.
    pub r: usize,
    /// Probability that exploitation picks the intended item; with the
    /// remaining probability the slot receives the next-best identified item.
    pub p_pred: f64,
}

impl<'a> FiniteContext<'a> {
    pub fn new(
        graph: &'a AccessGraph,
        model: &'a RewardModel,
        r: usize,
        views_needed: u32,
        delta: f64,
    ) -> Self {
        FiniteContext {
            graph,
            model,
            views: vec![0; graph.n_items()],
            identified: Vec::new(),
            oracle: ValueOracle::new(views_needed, delta),
            r,
            p_pred: 1.0,
        }
    }

    /// Seed the pre-explored set before any arrival.
    pub fn warm_start(&mut self, items: &[usize], rng: &mut impl Rng) {
        for &i in items {
            while self.views[i] < self.oracle.views_needed() {
                self.record_shown(i, rng);
            }
        }
    }

    pub fn is_identified(&self, item: usize) -> bool {
        self.views[item] >= self.oracle.views_needed()
    }

    /// Reported value of an identified item for a given user (personalized
    /// scale applied on top of the memoized noisy report).
    pub fn reported(&mut self, user: usize, item: usize, rng: &mut impl Rng) -> Option<f64> {
        if !self.is_identified(item) {
            return None;
        }
        let base = self
            .model
            .base_value(item)
            .expect("finite model covers all items");
        let report = self.oracle.known_report(item as u64, base, rng);
        Some(report * self.model.scale(user, item))
    }

    /// Bump the view counter of a shown item, promoting it to the identified
    /// list when it crosses the threshold.
    pub fn record_shown(&mut self, item: usize, rng: &mut impl Rng) {
        self.views[item] += 1;
        if self.views[item] == self.oracle.views_needed() {
            self.identified.push(item);
            // Materialize the noisy report at identification time.
            let base = self
                .model
                .base_value(item)
                .expect("finite model covers all items");
            self.oracle.known_report(item as u64, base, rng);
        }
    }

    /// Identified neighbors of `user`, excluding `taken`, sorted by reported
    /// value descending with index ascending on ties.
    fn exploit_candidates(
        &mut self,
        user: usize,
        taken: &[(usize, SlotKind)],
        rng: &mut impl Rng,
    ) -> Vec<(usize, f64)> {
        let mut cands: Vec<(usize, f64)> = Vec::new();
        for idx in 0..self.identified.len() {
            let item = self.identified[idx];
            if !self.graph.has_edge(user, item) || taken.iter().any(|&(t, _)| t == item) {
                continue;
            }
            let value = self.reported(user, item, rng).expect("identified");
            cands.push((item, value));
        }
        cands.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        cands
    }
}

/// A policy prepared for a specific graph; cheap to clone across trials.
#[derive(Debug, Clone)]
pub struct FinitePolicy {
    spec: PolicySpec,
    semi_matching: Option<Arc<SemiMatching>>,
    partitions: Option<Arc<Vec<NeighborhoodPartition>>>,
    /// `degree^exponent` per item for the degree-power family.
    power_weights: Option<Arc<Vec<f64>>>,
}

impl FinitePolicy {
    /// Run any preprocessing the policy needs (semi-matching, per-user
    /// partitions, degree weights). The result is immutable and shared by
    /// all trials.
    pub fn prepare(spec: &PolicySpec, g: &AccessGraph, r: usize) -> Result<Self, PolicyError> {
        if !spec.supports_finite() {
            return Err(PolicyError::WrongSetting {
                policy: spec.name(),
                setting: "finite",
            });
        }
        let mut policy = FinitePolicy {
            spec: spec.clone(),
            semi_matching: None,
            partitions: None,
            power_weights: None,
        };
        match spec {
            PolicySpec::BpExp => {
                policy.semi_matching = Some(Arc::new(balanced_semi_matching(g)));
            }
            PolicySpec::IdExp => {
                policy.partitions = Some(Arc::new(all_neighborhood_partitions(g, r)));
            }
            PolicySpec::DegreePower { exponent } => {
                policy.power_weights = Some(Arc::new(degree_weights(g, *exponent)));
            }
            _ => {}
        }
        Ok(policy)
    }

    /// Override the semi-matching used by balanced-partition exploration
    /// (e.g. one loaded from a file).
    pub fn with_semi_matching(mut self, sm: Arc<SemiMatching>) -> Self {
        self.semi_matching = Some(sm);
        self
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    /// Produce the recommendation for one arriving user. The caller applies
    /// it (rewards, view counts) afterwards.
    pub fn recommend(
        &self,
        ctx: &mut FiniteContext,
        user: usize,
        rng: &mut impl Rng,
    ) -> Recommendation {
        match &self.spec {
            PolicySpec::Genie => genie_recommend(ctx, user),
            PolicySpec::ExploitWhenPossible { explore } => {
                rule_recommend(ctx, user, rng, explore, |best| best > 0.0)
            }
            PolicySpec::ExploitAboveThreshold { threshold, explore } => {
                let t = *threshold;
                rule_recommend(ctx, user, rng, explore, move |best| best > t)
            }
            _ => self.split_recommend(ctx, user, rng),
        }
    }

    /// Common path for the split policies: binomial explore/exploit split,
    /// policy-specific explore draw, value-greedy exploitation, fallbacks.
    fn split_recommend(
        &self,
        ctx: &mut FiniteContext,
        user: usize,
        rng: &mut impl Rng,
    ) -> Recommendation {
        let f = ctx.oracle.views_needed();
        let explore_prob = f as f64 / (f as f64 + 1.0);
        let (want_explore, want_exploit) = split_slots(ctx.r, explore_prob, rng);

        let mut rec = Recommendation::default();
        self.draw_explores(ctx, user, want_explore, &mut rec, rng);
        let explore_short = want_explore - rec.len();

        exploit_into(ctx, user, want_exploit + explore_short, &mut rec, rng);
        let filled = rec.len();
        let exploit_short = (want_explore + want_exploit).saturating_sub(filled);
        if exploit_short > 0 {
            // Unfilled exploit demand converts back to exploration.
            self.draw_explores(ctx, user, exploit_short, &mut rec, rng);
        }
        rec
    }

    fn draw_explores(
        &self,
        ctx: &mut FiniteContext,
        user: usize,
        count: usize,
        rec: &mut Recommendation,
        rng: &mut impl Rng,
    ) {
        if count == 0 {
            return;
        }
        match &self.spec {
            PolicySpec::BpExp => {
                let sm = self.semi_matching.as_ref().expect("prepared");
                let pool: Vec<usize> = sm
                    .items_of(user)
                    .into_iter()
                    .filter(|&i| !ctx.is_identified(i) && !rec.contains(i))
                    .collect();
                for &i in pick_uniform(&pool, count, rng).iter() {
                    rec.slots.push((i, SlotKind::Explore));
                }
            }
            PolicySpec::IdExp => {
                let parts = self.partitions.as_ref().expect("prepared");
                let sets: Vec<&Vec<usize>> = parts[user]
                    .sets
                    .iter()
                    .filter(|s| !s.is_empty())
                    .collect();
                let chosen = pick_uniform(&(0..sets.len()).collect::<Vec<_>>(), count, rng);
                for &k in &chosen {
                    // One item per chosen set, proportional to inverse degree,
                    // over the whole set whether explored or not.
                    let set = sets[k];
                    let weights: Vec<f64> = set
                        .iter()
                        .map(|&i| 1.0 / ctx.graph.item_degree(i) as f64)
                        .collect();
                    if let Some(pos) = weighted_pick(&weights, rng) {
                        let item = set[pos];
                        if !rec.contains(item) {
                            rec.slots.push((item, SlotKind::Explore));
                        }
                    }
                }
            }
            PolicySpec::UniformExplore => {
                let pool = unexplored_pool(ctx, user, rec);
                for &i in pick_uniform(&pool, count, rng).iter() {
                    rec.slots.push((i, SlotKind::Explore));
                }
            }
            PolicySpec::DegreePower { .. } => {
                let weights = self.power_weights.as_ref().expect("prepared");
                let mut pool = unexplored_pool(ctx, user, rec);
                for _ in 0..count {
                    let w: Vec<f64> = pool.iter().map(|&i| weights[i]).collect();
                    match weighted_pick(&w, rng) {
                        Some(pos) => {
                            rec.slots.push((pool.swap_remove(pos), SlotKind::Explore));
                        }
                        None => break,
                    }
                }
            }
            _ => {
                // Rule policies explore via their explicit rule.
            }
        }
    }
}

fn degree_weights(g: &AccessGraph, exponent: f64) -> Vec<f64> {
    (0..g.n_items())
        .map(|i| (g.item_degree(i) as f64).powf(exponent))
        .collect()
}

fn unexplored_pool(ctx: &FiniteContext, user: usize, rec: &Recommendation) -> Vec<usize> {
    ctx.graph
        .user_neighbors(user)
        .iter()
        .copied()
        .filter(|&i| !ctx.is_identified(i) && !rec.contains(i))
        .collect()
}

fn pick_uniform(pool: &[usize], count: usize, rng: &mut impl Rng) -> Vec<usize> {
    let k = count.min(pool.len());
    if k == 0 {
        return Vec::new();
    }
    rand::seq::index::sample(rng, pool.len(), k)
        .into_iter()
        .map(|idx| pool[idx])
        .collect()
}

fn weighted_pick(weights: &[f64], rng: &mut impl Rng) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut x = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        x -= w;
        if x <= 0.0 {
            return Some(i);
        }
    }
    Some(weights.len() - 1)
}

/// Fill up to `count` exploit slots with the highest reported-value
/// identified neighbors (ties to the lowest item index). With probability
/// `1 - p_pred` a slot receives the next-best candidate instead.
fn exploit_into(
    ctx: &mut FiniteContext,
    user: usize,
    count: usize,
    rec: &mut Recommendation,
    rng: &mut impl Rng,
) {
    if count == 0 {
        return;
    }
    let cands = ctx.exploit_candidates(user, &rec.slots, rng);
    let mut used = vec![false; cands.len()];
    let mut cursor = 0usize;
    for _ in 0..count {
        while cursor < cands.len() && used[cursor] {
            cursor += 1;
        }
        if cursor >= cands.len() {
            break;
        }
        let mut pick = cursor;
        if ctx.p_pred < 1.0 && rng.random::<f64>() >= ctx.p_pred {
            // Identification failed: the slot gets the next-best item.
            let mut alt = cursor + 1;
            while alt < cands.len() && used[alt] {
                alt += 1;
            }
            if alt < cands.len() {
                pick = alt;
            }
        }
        used[pick] = true;
        rec.slots.push((cands[pick].0, SlotKind::Exploit));
    }
}

/// Explore everything or exploit everything, per the rule's trigger on the
/// best reported value among identified neighbors.
fn rule_recommend(
    ctx: &mut FiniteContext,
    user: usize,
    rng: &mut impl Rng,
    explore: &ExploreRule,
    trigger: impl Fn(f64) -> bool,
) -> Recommendation {
    let mut rec = Recommendation::default();
    let best = ctx
        .exploit_candidates(user, &[], rng)
        .first()
        .map(|&(_, v)| v);
    let exploit_all = matches!(best, Some(v) if trigger(v));
    let r = ctx.r;
    if exploit_all {
        exploit_into(ctx, user, r, &mut rec, rng);
        let shortfall = r - rec.len();
        rule_explore_into(ctx, user, shortfall, explore, &mut rec, rng);
    } else {
        rule_explore_into(ctx, user, r, explore, &mut rec, rng);
        let shortfall = r - rec.len();
        exploit_into(ctx, user, shortfall, &mut rec, rng);
    }
    rec
}

fn rule_explore_into(
    ctx: &mut FiniteContext,
    user: usize,
    count: usize,
    rule: &ExploreRule,
    rec: &mut Recommendation,
    rng: &mut impl Rng,
) {
    if count == 0 {
        return;
    }
    let mut pool = unexplored_pool(ctx, user, rec);
    match rule {
        ExploreRule::Uniform => {
            for &i in pick_uniform(&pool, count, rng).iter() {
                rec.slots.push((i, SlotKind::Explore));
            }
        }
        ExploreRule::DegreePower { exponent } => {
            for _ in 0..count {
                let w: Vec<f64> = pool
                    .iter()
                    .map(|&i| (ctx.graph.item_degree(i) as f64).powf(*exponent))
                    .collect();
                match weighted_pick(&w, rng) {
                    Some(pos) => rec.slots.push((pool.swap_remove(pos), SlotKind::Explore)),
                    None => break,
                }
            }
        }
    }
}

/// Show the true top-r neighbors regardless of exploration state.
fn genie_recommend(ctx: &FiniteContext, user: usize) -> Recommendation {
    let mut items: Vec<(usize, f64)> = ctx
        .graph
        .user_neighbors(user)
        .iter()
        .map(|&i| {
            let v = ctx
                .model
                .value(ctx.graph, user, i)
                .expect("neighbor value");
            (i, v)
        })
        .collect();
    items.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Recommendation {
        slots: items
            .into_iter()
            .take(ctx.r)
            .map(|(i, _)| (i, SlotKind::Exploit))
            .collect(),
    }
}

/// Panics unless the recommendation is valid for `(user, r)`: all items
/// distinct neighbors, at most `r` slots. Test helper.
pub fn assert_valid_recommendation(rec: &Recommendation, g: &AccessGraph, user: usize, r: usize) {
    assert!(rec.len() <= r, "too many slots: {} > {r}", rec.len());
    let mut seen = std::collections::HashSet::new();
    for &(item, _) in &rec.slots {
        assert!(g.has_edge(user, item), "item {item} not a neighbor of {user}");
        assert!(seen.insert(item), "duplicate item {item}");
    }
}
