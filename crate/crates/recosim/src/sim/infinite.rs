//! Infinite-horizon simulator: users visit and items arrive by independent
//! Poisson processes over a user x item-class access graph; items expire
//! after a fixed lifetime. Event-driven, with lazy expiry.
//!
//! The latest-item set of a visit contains the alive neighboring items for
//! which this visit is the first by any neighboring user. That bookkeeping is
//! part of the system dynamics and is maintained for every policy; the
//! latest-uniform policies additionally consume it for exploration.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::AccessGraph;
use crate::policy::{split_slots, PolicySpec, SlotKind};
use crate::reward::{RewardModel, ValueOracle};
use crate::sim::RatioEstimate;
use crate::stats::{derive_seed, stream_id, Accumulator};

#[derive(Debug, Error)]
pub enum InfiniteError {
    #[error("policy {0} is not available in the infinite-horizon setting")]
    UnsupportedPolicy(String),
    #[error("rates must be non-negative with positive total visit rate")]
    BadRates,
    #[error("lifetime and horizon must be positive, warmup below horizon")]
    BadTimes,
    #[error("expected one rate per node: got {got}, need {need}")]
    RateLength { got: usize, need: usize },
    #[error("reward model must provide class sequences")]
    WrongModel,
}

/// Configuration of one infinite-horizon experiment.
#[derive(Debug, Clone)]
pub struct InfiniteConfig {
    /// Users x item-classes access graph.
    pub graph: Arc<AccessGraph>,
    /// Per-user visit rates.
    pub user_rates: Vec<f64>,
    /// Per-class item arrival rates.
    pub class_rates: Vec<f64>,
    /// Item lifetime tau.
    pub lifetime: f64,
    /// Simulated time horizon.
    pub horizon: f64,
    /// Visits before this time are excluded from metrics.
    pub warmup: f64,
    /// Recommendation slots per visit.
    pub r: usize,
    /// Identification noise for pre-explored items.
    pub delta: f64,
}

impl InfiniteConfig {
    /// Unit-rate configuration with warmup defaulting to five lifetimes.
    pub fn unit_rates(graph: Arc<AccessGraph>, lifetime: f64, horizon: f64, r: usize) -> Self {
        let n_users = graph.n_users();
        let n_classes = graph.n_items();
        InfiniteConfig {
            graph,
            user_rates: vec![1.0; n_users],
            class_rates: vec![1.0; n_classes],
            lifetime,
            horizon,
            warmup: 5.0 * lifetime,
            r,
            delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), InfiniteError> {
        if self.user_rates.len() != self.graph.n_users() {
            return Err(InfiniteError::RateLength {
                got: self.user_rates.len(),
                need: self.graph.n_users(),
            });
        }
        if self.class_rates.len() != self.graph.n_items() {
            return Err(InfiniteError::RateLength {
                got: self.class_rates.len(),
                need: self.graph.n_items(),
            });
        }
        let all_ok = self
            .user_rates
            .iter()
            .chain(self.class_rates.iter())
            .all(|&x| x >= 0.0 && x.is_finite());
        if !all_ok || self.user_rates.iter().sum::<f64>() <= 0.0 {
            return Err(InfiniteError::BadRates);
        }
        if self.lifetime <= 0.0 || self.horizon <= 0.0 || self.warmup >= self.horizon {
            return Err(InfiniteError::BadTimes);
        }
        Ok(())
    }

    /// Rate-weighted inverse mass:
    /// `max_u sum_{c in N(u)} class_rate(c) / sum_{u' in N(c)} user_rate(u')`.
    /// Reduces to `z_max` under unit rates.
    pub fn weighted_mass(&self) -> f64 {
        let g = self.graph.as_ref();
        (0..g.n_users())
            .map(|u| {
                g.user_neighbors(u)
                    .iter()
                    .map(|&c| {
                        let visits: f64 =
                            g.item_neighbors(c).iter().map(|&v| self.user_rates[v]).sum();
                        if visits > 0.0 {
                            self.class_rates[c] / visits
                        } else {
                            0.0
                        }
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }
}

/// One event of the merged marked Poisson process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Visit { user: usize },
    Arrival { class: usize },
}

/// Samples inter-event times and marks for competing Poisson streams.
#[derive(Debug, Clone)]
pub struct EventSampler {
    cumulative: Vec<f64>,
    n_users: usize,
    total: f64,
}

impl EventSampler {
    pub fn new(user_rates: &[f64], class_rates: &[f64]) -> Self {
        let mut cumulative = Vec::with_capacity(user_rates.len() + class_rates.len());
        let mut acc = 0.0;
        for &x in user_rates.iter().chain(class_rates.iter()) {
            acc += x;
            cumulative.push(acc);
        }
        EventSampler {
            cumulative,
            n_users: user_rates.len(),
            total: acc,
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.total
    }

    /// Exponential inter-event time at the total rate; the mark is chosen
    /// proportionally to the individual rates.
    pub fn sample(&self, rng: &mut impl Rng) -> (f64, Event) {
        let u: f64 = rng.random();
        let dt = -(1.0 - u).ln() / self.total;
        let x = rng.random::<f64>() * self.total;
        let idx = self.cumulative.partition_point(|&c| c <= x);
        let idx = idx.min(self.cumulative.len() - 1);
        let ev = if idx < self.n_users {
            Event::Visit { user: idx }
        } else {
            Event::Arrival {
                class: idx - self.n_users,
            }
        };
        (dt, ev)
    }
}

/// Policies available in this setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InfinitePolicy {
    /// Explore uniformly from the latest-item set (single view identifies).
    LatestUniform,
    /// Level-counter exploration; items need `views` presentations by their
    /// first `views` visiting neighbors.
    LatestLevels { views: u32 },
    /// True top-r among alive neighbors.
    Genie,
}

fn resolve_policy(spec: &PolicySpec) -> Result<(InfinitePolicy, Option<f64>), InfiniteError> {
    match spec {
        PolicySpec::ULExp => Ok((InfinitePolicy::LatestUniform, None)),
        PolicySpec::ULExpF { views, delta } => {
            Ok((InfinitePolicy::LatestLevels { views: *views }, *delta))
        }
        PolicySpec::Genie => Ok((InfinitePolicy::Genie, None)),
        other => Err(InfiniteError::UnsupportedPolicy(other.name())),
    }
}

// An item's class is implied by which per-class alive deque holds it.
#[derive(Debug, Clone)]
struct Item {
    arrival: f64,
    /// True value, fixed by the class sequence at arrival rank.
    value: f64,
    /// True until the first visit by a neighboring user.
    pending: bool,
    /// Identified: eligible for exploitation while alive.
    known: bool,
    /// Dropped from exploration permanently.
    discarded: bool,
    /// Neighbor visits witnessed while still unidentified (level counter).
    counter: u32,
    /// Whether some counted visit passed without this item being presented.
    missed: bool,
}

/// Outcome of one visit.
#[derive(Debug, Clone, Copy)]
pub struct VisitRecord {
    /// Running visit index (all visits, including warmup).
    pub s: u64,
    pub user: usize,
    pub time: f64,
    /// Size of the latest-item set of this visit.
    pub latest_size: usize,
    pub earned: f64,
    pub optimal: f64,
}

impl VisitRecord {
    /// `earned / optimal`, defined only when the optimal reward is positive.
    pub fn ratio(&self) -> Option<f64> {
        (self.optimal > 0.0).then(|| self.earned / self.optimal)
    }
}

/// Mutable simulation state, drivable event by event (the run loop feeds it
/// Poisson events; tests can feed it hand-built schedules).
pub struct SimState {
    graph: Arc<AccessGraph>,
    model: Arc<RewardModel>,
    lifetime: f64,
    r: usize,
    policy: InfinitePolicy,
    oracle: ValueOracle,
    items: Vec<Item>,
    /// Alive item indices per class, ordered by arrival.
    alive: Vec<std::collections::VecDeque<usize>>,
    /// Arrival count per class (the sequence ordinal of the next item).
    class_counts: Vec<u64>,
    visit_count: u64,
    // Whole-run conservation ledger for the latest-set partition.
    pub arrivals: u64,
    pub latest_sum: u64,
    pub expired_unseen: u64,
}

impl SimState {
    fn new(
        graph: Arc<AccessGraph>,
        model: Arc<RewardModel>,
        lifetime: f64,
        r: usize,
        policy: InfinitePolicy,
        delta: f64,
    ) -> Self {
        let views = match policy {
            InfinitePolicy::LatestLevels { views } => views,
            _ => 1,
        };
        let n_classes = graph.n_items();
        SimState {
            graph,
            model,
            lifetime,
            r,
            policy,
            oracle: ValueOracle::new(views, delta),
            items: Vec::new(),
            alive: vec![std::collections::VecDeque::new(); n_classes],
            class_counts: vec![0; n_classes],
            visit_count: 0,
            arrivals: 0,
            latest_sum: 0,
            expired_unseen: 0,
        }
    }

    fn arrival(&mut self, class: usize, time: f64) {
        self.class_counts[class] += 1;
        let k = self.class_counts[class];
        let value = self
            .model
            .class_value(class, k)
            .expect("class sequence value");
        let idx = self.items.len();
        self.items.push(Item {
            arrival: time,
            value,
            pending: true,
            known: false,
            discarded: false,
            counter: 0,
            missed: false,
        });
        self.alive[class].push_back(idx);
        self.arrivals += 1;
    }

    /// Drop expired items of a class; pending ones are counted as expired
    /// unseen.
    fn expire(&mut self, class: usize, now: f64) {
        while let Some(&idx) = self.alive[class].front() {
            if self.items[idx].arrival + self.lifetime <= now {
                if self.items[idx].pending {
                    self.expired_unseen += 1;
                }
                self.alive[class].pop_front();
            } else {
                break;
            }
        }
    }

    /// Final sweep at the end of the horizon; returns the count of items
    /// still alive and pending, closing the conservation identity
    /// `sum |L(s)| + expired_unseen + final_pending = arrivals`.
    pub fn finish(&mut self, horizon: f64) -> u64 {
        let mut final_pending = 0;
        for class in 0..self.alive.len() {
            self.expire(class, horizon);
            for &idx in &self.alive[class] {
                if self.items[idx].pending {
                    final_pending += 1;
                }
            }
        }
        final_pending
    }

    /// Process one visit, returning its record.
    pub fn visit(&mut self, user: usize, time: f64, rng: &mut impl Rng) -> VisitRecord {
        self.visit_with_class_counts(user, time, rng, None)
    }

    fn visit_with_class_counts(
        &mut self,
        user: usize,
        time: f64,
        rng: &mut impl Rng,
        mut latest_by_class: Option<&mut Vec<Accumulator>>,
    ) -> VisitRecord {
        self.visit_count += 1;
        let s = self.visit_count;
        let neighbor_classes: Vec<usize> = self.graph.user_neighbors(user).to_vec();
        for &c in &neighbor_classes {
            self.expire(c, time);
        }

        // One pass over alive neighbors: latest set, exploit candidates,
        // true values for the offline optimum.
        let mut latest: Vec<usize> = Vec::new();
        let mut known: Vec<(usize, f64)> = Vec::new();
        let mut true_values: Vec<f64> = Vec::new();
        for &c in &neighbor_classes {
            let mut class_latest = 0u64;
            for &idx in &self.alive[c] {
                let item = &self.items[idx];
                true_values.push(item.value);
                if item.pending {
                    latest.push(idx);
                    class_latest += 1;
                }
                if item.known {
                    let rep = self.oracle.known_report(idx as u64, item.value, rng);
                    known.push((idx, rep));
                }
            }
            if let Some(accs) = latest_by_class.as_deref_mut() {
                accs[c].push(class_latest as f64);
            }
        }
        self.latest_sum += latest.len() as u64;
        // Highest reported value first, oldest item on ties.
        known.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

        let mut shown: Vec<(usize, SlotKind)> = Vec::new();
        match self.policy {
            InfinitePolicy::Genie => {
                let mut all: Vec<usize> = neighbor_classes
                    .iter()
                    .flat_map(|&c| self.alive[c].iter().copied())
                    .collect();
                all.sort_by(|&a, &b| {
                    self.items[b]
                        .value
                        .partial_cmp(&self.items[a].value)
                        .unwrap()
                        .then(a.cmp(&b))
                });
                shown.extend(all.into_iter().take(self.r).map(|i| (i, SlotKind::Exploit)));
            }
            InfinitePolicy::LatestUniform => {
                let (want_explore, want_exploit) = split_slots(self.r, 0.5, rng);
                let mut pool = latest.clone();
                let picks = want_explore.min(pool.len());
                for idx in rand::seq::index::sample(rng, pool.len(), picks).into_iter() {
                    shown.push((pool[idx], SlotKind::Explore));
                }
                pool.retain(|&i| !shown.iter().any(|&(j, _)| j == i));
                let explore_short = want_explore - picks;
                let mut taken = 0usize;
                for &(idx, _) in &known {
                    if taken >= want_exploit + explore_short {
                        break;
                    }
                    shown.push((idx, SlotKind::Exploit));
                    taken += 1;
                }
                // Exploit shortfall falls back to more latest-set picks.
                let unfilled = self.r - shown.len();
                if unfilled > 0 && !pool.is_empty() {
                    let extra = unfilled.min(pool.len());
                    for idx in rand::seq::index::sample(rng, pool.len(), extra).into_iter() {
                        shown.push((pool[idx], SlotKind::Explore));
                    }
                }
            }
            InfinitePolicy::LatestLevels { views } => {
                let f = views as f64;
                let (want_explore, want_exploit) = split_slots(self.r, f / (f + 1.0), rng);
                let mut pools: Vec<Vec<usize>> = vec![Vec::new(); views as usize];
                for &c in &neighbor_classes {
                    for &idx in &self.alive[c] {
                        let item = &self.items[idx];
                        if !item.known && !item.discarded && item.counter < views {
                            pools[item.counter as usize].push(idx);
                        }
                    }
                }
                let level_pick = |shown: &Vec<(usize, SlotKind)>, rng: &mut dyn rand::RngCore| {
                    let level = rng.random_range(0..views) as usize;
                    let eligible: Vec<usize> = pools[level]
                        .iter()
                        .copied()
                        .filter(|i| !shown.iter().any(|&(j, _)| j == *i))
                        .collect();
                    if eligible.is_empty() {
                        None
                    } else {
                        Some(eligible[rng.random_range(0..eligible.len())])
                    }
                };
                let mut exploit_demand = want_exploit;
                for _ in 0..want_explore {
                    match level_pick(&shown, rng) {
                        Some(idx) => shown.push((idx, SlotKind::Explore)),
                        // Empty level: the slot falls back to exploitation.
                        None => exploit_demand += 1,
                    }
                }
                let mut taken = 0usize;
                for &(idx, _) in &known {
                    if taken >= exploit_demand {
                        break;
                    }
                    shown.push((idx, SlotKind::Exploit));
                    taken += 1;
                }
                let unfilled = self.r - shown.len();
                for _ in 0..unfilled {
                    match level_pick(&shown, rng) {
                        Some(idx) => shown.push((idx, SlotKind::Explore)),
                        None => {}
                    }
                }
            }
        }

        let earned: f64 = shown.iter().map(|&(idx, _)| self.items[idx].value).sum();
        true_values.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let optimal: f64 = true_values.iter().take(self.r).sum();

        // Post-visit bookkeeping. The latest set is consumed for every
        // policy (this visit was its items' first neighbor visit); the level
        // counters advance only under the counter policy.
        match self.policy {
            InfinitePolicy::LatestUniform => {
                for &idx in &latest {
                    let presented = shown.iter().any(|&(j, _)| j == idx);
                    let item = &mut self.items[idx];
                    item.pending = false;
                    if presented {
                        item.known = true;
                    } else {
                        item.discarded = true;
                    }
                }
            }
            InfinitePolicy::LatestLevels { views } => {
                for &c in &neighbor_classes {
                    for i in 0..self.alive[c].len() {
                        let idx = self.alive[c][i];
                        let presented = shown.iter().any(|&(j, _)| j == idx);
                        let item = &mut self.items[idx];
                        item.pending = false;
                        if item.known || item.discarded {
                            continue;
                        }
                        item.counter += 1;
                        if !presented {
                            item.missed = true;
                        }
                        if item.counter == views {
                            if item.missed {
                                item.discarded = true;
                            } else {
                                item.known = true;
                            }
                        }
                    }
                }
            }
            InfinitePolicy::Genie => {
                for &idx in &latest {
                    self.items[idx].pending = false;
                }
            }
        }

        VisitRecord {
            s,
            user,
            time,
            latest_size: latest.len(),
            earned,
            optimal,
        }
    }
}

/// Result of a single simulated horizon.
pub struct InfiniteRun {
    /// Post-warmup visit records.
    pub records: Vec<VisitRecord>,
    /// Mean latest-set size over post-warmup visits.
    pub mean_latest: f64,
    /// Per-class mean latest-set contribution per neighbor visit.
    pub latest_per_class: Vec<Accumulator>,
    /// Whole-run conservation ledger: arrivals, sum of latest sizes, expired
    /// unseen, still-pending at the end.
    pub arrivals: u64,
    pub latest_sum: u64,
    pub expired_unseen: u64,
    pub final_pending: u64,
}

/// Simulate one horizon under the given policy.
pub fn run_infinite(
    cfg: &InfiniteConfig,
    model: &Arc<RewardModel>,
    spec: &PolicySpec,
    seed: u64,
) -> Result<InfiniteRun, InfiniteError> {
    cfg.validate()?;
    let (policy, delta_override) = resolve_policy(spec)?;
    if !matches!(model.as_ref(), RewardModel::ClassSequences { .. }) {
        return Err(InfiniteError::WrongModel);
    }
    let delta = delta_override.unwrap_or(cfg.delta);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, stream_id(&spec.name())));
    let mut state = SimState::new(
        cfg.graph.clone(),
        model.clone(),
        cfg.lifetime,
        cfg.r,
        policy,
        delta,
    );
    let sampler = EventSampler::new(&cfg.user_rates, &cfg.class_rates);
    let mut latest_per_class = vec![Accumulator::default(); cfg.graph.n_items()];

    let mut records = Vec::new();
    let mut latest_acc = Accumulator::default();
    let mut t = 0.0;
    loop {
        let (dt, ev) = sampler.sample(&mut rng);
        t += dt;
        if t >= cfg.horizon {
            break;
        }
        match ev {
            Event::Arrival { class } => state.arrival(class, t),
            Event::Visit { user } => {
                let in_window = t >= cfg.warmup;
                let rec = state.visit_with_class_counts(
                    user,
                    t,
                    &mut rng,
                    in_window.then_some(&mut latest_per_class),
                );
                if in_window {
                    latest_acc.push(rec.latest_size as f64);
                    records.push(rec);
                }
            }
        }
    }
    let final_pending = state.finish(cfg.horizon);

    Ok(InfiniteRun {
        records,
        mean_latest: latest_acc.mean(),
        latest_per_class,
        arrivals: state.arrivals,
        latest_sum: state.latest_sum,
        expired_unseen: state.expired_unseen,
        final_pending,
    })
}

/// Aggregate of a batch of horizons.
pub struct InfiniteBatch {
    pub estimate: RatioEstimate,
    /// Mean latest-set size pooled over trials.
    pub mean_latest: f64,
    pub trials: u64,
}

/// Pool post-warmup per-visit ratios by visiting user across trials and take
/// the worst user mean.
pub fn estimate_gamma_infinite(
    cfg: &InfiniteConfig,
    model: &Arc<RewardModel>,
    spec: &PolicySpec,
    trials: u64,
    seed: u64,
) -> Result<InfiniteBatch, InfiniteError> {
    cfg.validate()?;
    resolve_policy(spec)?;
    let n_users = cfg.graph.n_users();
    let results: Result<Vec<(Vec<Accumulator>, Accumulator)>, InfiniteError> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let run = run_infinite(cfg, model, spec, derive_seed(seed, trial))?;
            let mut accs = vec![Accumulator::default(); n_users];
            let mut latest = Accumulator::default();
            for rec in &run.records {
                if let Some(ratio) = rec.ratio() {
                    accs[rec.user].push(ratio);
                }
                latest.push(rec.latest_size as f64);
            }
            Ok((accs, latest))
        })
        .collect();
    let mut user_accs = vec![Accumulator::default(); n_users];
    let mut latest_acc = Accumulator::default();
    for (accs, latest) in results? {
        for (a, b) in user_accs.iter_mut().zip(accs.iter()) {
            a.merge(b);
        }
        latest_acc.merge(&latest);
    }
    Ok(InfiniteBatch {
        estimate: RatioEstimate::from_accumulators(&user_accs),
        mean_latest: latest_acc.mean(),
        trials,
    })
}

/// All post-warmup per-visit ratios pooled across trials (for distributional
/// comparisons between policies).
pub fn collect_visit_ratios(
    cfg: &InfiniteConfig,
    model: &Arc<RewardModel>,
    spec: &PolicySpec,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>, InfiniteError> {
    cfg.validate()?;
    resolve_policy(spec)?;
    let per_trial: Result<Vec<Vec<f64>>, InfiniteError> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let run = run_infinite(cfg, model, spec, derive_seed(seed, trial))?;
            Ok(run.records.iter().filter_map(|r| r.ratio()).collect())
        })
        .collect();
    Ok(per_trial?.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{compute_stats, gen_biregular, gen_complete_bipartite};
    use crate::reward::ClassSequence;
    use crate::stats::mean_ci95;

    fn constant_model(n_classes: usize, v: f64) -> Arc<RewardModel> {
        Arc::new(RewardModel::class_sequences(vec![
            ClassSequence::Constant(v);
            n_classes
        ]))
    }

    fn test_cfg(graph: AccessGraph, r: usize) -> InfiniteConfig {
        InfiniteConfig::unit_rates(Arc::new(graph), 1.0, 100.0, r)
    }

    #[test]
    fn sampler_competing_rates() {
        let sampler = EventSampler::new(&[2.0], &[1.0]);
        assert_eq!(sampler.total_rate(), 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut visits = 0u64;
        let mut dt_sum = 0.0;
        for _ in 0..n {
            let (dt, ev) = sampler.sample(&mut rng);
            dt_sum += dt;
            if matches!(ev, Event::Visit { .. }) {
                visits += 1;
            }
        }
        let frac = visits as f64 / n as f64;
        let sigma = (2.0 / 9.0f64 / n as f64).sqrt();
        assert!((frac - 2.0 / 3.0).abs() < 4.0 * sigma, "frac {frac}");
        let mean_dt = dt_sum / n as f64;
        assert!((mean_dt - 1.0 / 3.0).abs() < 0.01, "mean dt {mean_dt}");
    }

    #[test]
    fn sampler_single_pair_rates() {
        // One user, one class, unit rates: mean inter-event 0.5, visit
        // probability 1/2.
        let sampler = EventSampler::new(&[1.0], &[1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let mut visits = 0u64;
        let mut dt_sum = 0.0;
        for _ in 0..n {
            let (dt, ev) = sampler.sample(&mut rng);
            dt_sum += dt;
            visits += matches!(ev, Event::Visit { .. }) as u64;
        }
        assert!((dt_sum / n as f64 - 0.5).abs() < 0.01);
        let sigma = 0.5 / (n as f64).sqrt();
        assert!((visits as f64 / n as f64 - 0.5).abs() < 4.0 * sigma);
    }

    #[test]
    fn event_count_matches_total_rate() {
        let g = gen_complete_bipartite(2, 3).unwrap();
        let mut cfg = test_cfg(g, 1);
        cfg.horizon = 10_000.0;
        cfg.warmup = 0.0;
        let sampler = EventSampler::new(&cfg.user_rates, &cfg.class_rates);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut t = 0.0;
        let mut count = 0u64;
        loop {
            let (dt, _) = sampler.sample(&mut rng);
            t += dt;
            if t >= cfg.horizon {
                break;
            }
            count += 1;
        }
        let expect = sampler.total_rate() * cfg.horizon;
        let sigma = expect.sqrt();
        assert!(
            (count as f64 - expect).abs() < 4.0 * sigma,
            "count {count} vs {expect}"
        );
    }

    #[test]
    fn latest_set_semantics_by_hand() {
        // One user connected to one class.
        let g = gen_complete_bipartite(1, 1).unwrap();
        let model = constant_model(1, 1.0);
        let mut state = SimState::new(
            Arc::new(g),
            model,
            1.0, // lifetime
            1,
            InfinitePolicy::LatestUniform,
            0.0,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);

        // Three arrivals, then the first neighboring visit: all three are
        // latest.
        state.arrival(0, 0.10);
        state.arrival(0, 0.20);
        state.arrival(0, 0.30);
        let rec = state.visit(0, 0.50, &mut rng);
        assert_eq!(rec.latest_size, 3);
        assert_eq!(rec.optimal, 1.0);

        // Immediately after: nothing is latest anymore.
        let rec = state.visit(0, 0.55, &mut rng);
        assert_eq!(rec.latest_size, 0);

        // An item expiring before any neighbor visit is never latest.
        state.arrival(0, 1.0);
        let rec = state.visit(0, 2.5, &mut rng);
        assert_eq!(rec.latest_size, 0);
        assert_eq!(state.expired_unseen, 1);
    }

    #[test]
    fn latest_explore_is_uniform() {
        // Three latest items and one explore slot: each is drawn 1/3 of the
        // time the slot explores.
        let g = gen_complete_bipartite(1, 1).unwrap();
        let model = constant_model(1, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut counts = [0u64; 3];
        let mut explored_visits = 0u64;
        for _ in 0..60_000 {
            let mut state = SimState::new(
                Arc::new(g.clone()),
                model.clone(),
                1.0,
                1,
                InfinitePolicy::LatestUniform,
                0.0,
            );
            state.arrival(0, 0.1);
            state.arrival(0, 0.2);
            state.arrival(0, 0.3);
            let before = state.items.len();
            state.visit(0, 0.5, &mut rng);
            // The explored item is the one now marked known.
            let known: Vec<usize> = (0..before).filter(|&i| state.items[i].known).collect();
            if let [only] = known.as_slice() {
                counts[*only] += 1;
                explored_visits += 1;
            }
        }
        // Half the visits explore (one slot, fair split).
        assert!(explored_visits > 25_000);
        for (i, &c) in counts.iter().enumerate() {
            let freq = c as f64 / explored_visits as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.02, "item {i}: {freq}");
        }
    }

    #[test]
    fn level_counters_identify_or_discard() {
        // f = 2: an item presented at both of its first two neighbor visits
        // becomes identified; an item missed once is discarded for good.
        let g = gen_complete_bipartite(1, 1).unwrap();
        let model = constant_model(1, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut saw_known = false;
        let mut saw_discarded = false;
        for _ in 0..4_000 {
            let mut state = SimState::new(
                Arc::new(g.clone()),
                model.clone(),
                10.0, // long lifetime so expiry never interferes
                1,
                InfinitePolicy::LatestLevels { views: 2 },
                0.0,
            );
            state.arrival(0, 0.1);
            state.visit(0, 0.2, &mut rng);
            state.visit(0, 0.3, &mut rng);
            let item = &state.items[0];
            assert_eq!(item.counter, 2);
            assert!(item.known != item.discarded, "exactly one outcome");
            // Identification requires presentation at both counted visits.
            assert_eq!(item.known, !item.missed);
            saw_known |= item.known;
            saw_discarded |= item.discarded;
            if item.known {
                // An identified alive item is exploitable at later visits.
                let rec = state.visit(0, 0.4, &mut rng);
                assert!(rec.earned == 1.0 || rec.latest_size == 0);
            }
        }
        assert!(saw_known && saw_discarded);
    }

    #[test]
    fn zero_class_rates_produce_no_ratios() {
        let g = gen_complete_bipartite(2, 2).unwrap();
        let mut cfg = test_cfg(g, 1);
        cfg.class_rates = vec![0.0, 0.0];
        let model = constant_model(2, 1.0);
        let run = run_infinite(&cfg, &model, &PolicySpec::ULExp, 5).unwrap();
        assert!(!run.records.is_empty());
        for rec in &run.records {
            assert_eq!(rec.earned, 0.0);
            assert_eq!(rec.optimal, 0.0);
            assert!(rec.ratio().is_none());
        }
    }

    #[test]
    fn conservation_of_latest_partition() {
        // Every arrival is latest for exactly one visit, expires unseen, or
        // is still pending at the end.
        let g = gen_biregular(4, 8, 4).unwrap();
        let cfg = test_cfg(g, 2);
        let model = constant_model(8, 1.0);
        for seed in 0..5 {
            for spec in [PolicySpec::ULExp, PolicySpec::ULExpF { views: 2, delta: None }, PolicySpec::Genie] {
                let run = run_infinite(&cfg, &model, &spec, seed).unwrap();
                assert_eq!(
                    run.latest_sum + run.expired_unseen + run.final_pending,
                    run.arrivals,
                    "seed {seed} policy {}",
                    spec.name()
                );
            }
        }
    }

    #[test]
    fn genie_ratio_is_one() {
        let g = gen_biregular(3, 6, 4).unwrap();
        let cfg = test_cfg(g, 2);
        let model = Arc::new(RewardModel::class_sequences(
            (0..6)
                .map(|c| ClassSequence::GeometricDecay {
                    initial: 1.0 + c as f64,
                    ratio: 0.9,
                })
                .collect(),
        ));
        let batch = estimate_gamma_infinite(&cfg, &model, &PolicySpec::Genie, 5, 1).unwrap();
        assert!((batch.estimate.gamma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn per_class_latest_counts_below_rate_ratio() {
        // Per neighbor visit, the expected count of a class's latest items is
        // at most class_rate / total neighbor visit rate (expiry only lowers
        // it).
        let g = gen_biregular(4, 8, 4).unwrap();
        let mut cfg = test_cfg(g, 1);
        cfg.horizon = 400.0;
        let model = constant_model(8, 1.0);
        let mut accs = vec![Accumulator::default(); 8];
        for seed in 0..8 {
            let run = run_infinite(&cfg, &model, &PolicySpec::ULExp, seed).unwrap();
            for (a, b) in accs.iter_mut().zip(run.latest_per_class.iter()) {
                a.merge(b);
            }
        }
        for (c, acc) in accs.iter().enumerate() {
            // d_c = 2 neighbors at unit rates: bound 1/2.
            let bound = 0.5;
            let sigma = (acc.variance() / acc.count() as f64).sqrt();
            assert!(
                acc.mean() <= bound + 3.0 * sigma,
                "class {c}: mean {} bound {bound}",
                acc.mean()
            );
        }
    }

    #[test]
    fn mean_latest_within_mass_bound() {
        let g = gen_biregular(4, 8, 4).unwrap();
        let cfg = test_cfg(g, 1);
        let stats = compute_stats(&cfg.graph);
        assert!((stats.z_max - 2.0).abs() < 1e-9);
        assert!((cfg.weighted_mass() - 2.0).abs() < 1e-9);
        let model = constant_model(8, 1.0);
        let batch =
            estimate_gamma_infinite(&cfg, &model, &PolicySpec::ULExp, 10, 3).unwrap();
        assert!(
            batch.mean_latest <= 5.0 * 2.0 + 2.0,
            "mean latest {}",
            batch.mean_latest
        );
    }

    #[test]
    fn general_rates_respect_mass_bounds() {
        // Heterogeneous visit and arrival rates: the latest-set mean stays
        // within 5z + 2 for the rate-weighted mass z, and the worst-user
        // ratio clears r / (4 (5z + 2)) with slack.
        let g = gen_biregular(4, 8, 4).unwrap();
        let mut cfg = test_cfg(g, 1);
        cfg.user_rates = vec![0.5, 1.0, 2.0, 1.5];
        cfg.class_rates = vec![1.0, 0.25, 2.0, 1.0, 0.5, 1.0, 0.75, 1.5];
        cfg.horizon = 400.0;
        let z = cfg.weighted_mass();
        assert!(z > 0.0);
        let model = Arc::new(RewardModel::class_sequences(
            (0..8)
                .map(|_| ClassSequence::GeometricDecay {
                    initial: 1.0,
                    ratio: 0.9,
                })
                .collect(),
        ));
        let batch =
            estimate_gamma_infinite(&cfg, &model, &PolicySpec::ULExp, 20, 8).unwrap();
        assert!(
            batch.mean_latest <= 5.0 * z + 2.0,
            "mean latest {} vs bound {}",
            batch.mean_latest,
            5.0 * z + 2.0
        );
        let bound = 1.0 / (4.0 * (5.0 * z + 2.0));
        assert!(
            batch.estimate.gamma >= bound - batch.estimate.gamma_ci_half,
            "gamma {} below bound {bound}",
            batch.estimate.gamma
        );
    }

    #[test]
    fn stationary_after_warmup() {
        let g = gen_biregular(4, 8, 4).unwrap();
        let mut cfg = test_cfg(g, 1);
        cfg.horizon = 600.0;
        let model = constant_model(8, 1.0);
        let mut first = Vec::new();
        let mut second = Vec::new();
        for seed in 0..10 {
            let run = run_infinite(&cfg, &model, &PolicySpec::ULExp, seed).unwrap();
            let mid = (cfg.warmup + cfg.horizon) / 2.0;
            for rec in &run.records {
                if let Some(ratio) = rec.ratio() {
                    if rec.time < mid {
                        first.push(ratio);
                    } else {
                        second.push(ratio);
                    }
                }
            }
        }
        let (m1, h1) = mean_ci95(&first);
        let (m2, h2) = mean_ci95(&second);
        assert!(
            (m1 - m2).abs() <= h1 + h2,
            "halves disagree: {m1}±{h1} vs {m2}±{h2}"
        );
    }

    #[test]
    fn finite_policies_rejected() {
        let g = gen_complete_bipartite(1, 1).unwrap();
        let cfg = test_cfg(g, 1);
        let model = constant_model(1, 1.0);
        assert!(matches!(
            run_infinite(&cfg, &model, &PolicySpec::BpExp, 0),
            Err(InfiniteError::UnsupportedPolicy(_))
        ));
    }

    #[test]
    fn wrong_model_kind_rejected() {
        let g = gen_complete_bipartite(1, 1).unwrap();
        let cfg = test_cfg(g, 1);
        let model = Arc::new(RewardModel::universal(vec![1.0]).unwrap());
        assert!(matches!(
            run_infinite(&cfg, &model, &PolicySpec::ULExp, 0),
            Err(InfiniteError::WrongModel)
        ));
    }

    #[test]
    fn runs_are_deterministic() {
        let g = gen_biregular(2, 4, 2).unwrap();
        let cfg = test_cfg(g, 1);
        let model = constant_model(4, 1.0);
        let a = run_infinite(&cfg, &model, &PolicySpec::ULExp, 42).unwrap();
        let b = run_infinite(&cfg, &model, &PolicySpec::ULExp, 42).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(b.records.iter()) {
            assert_eq!(x.earned, y.earned);
            assert_eq!(x.time, y.time);
        }
    }

    #[test]
    fn config_validation() {
        let g = gen_complete_bipartite(2, 2).unwrap();
        let mut cfg = test_cfg(g, 1);
        cfg.user_rates = vec![1.0];
        assert!(matches!(
            cfg.validate(),
            Err(InfiniteError::RateLength { .. })
        ));
        let g = gen_complete_bipartite(2, 2).unwrap();
        let mut cfg = test_cfg(g, 1);
        cfg.warmup = cfg.horizon + 1.0;
        assert!(matches!(cfg.validate(), Err(InfiniteError::BadTimes)));
        let g = gen_complete_bipartite(2, 2).unwrap();
        let mut cfg = test_cfg(g, 1);
        cfg.user_rates = vec![0.0, 0.0];
        assert!(matches!(cfg.validate(), Err(InfiniteError::BadRates)));
    }
}
