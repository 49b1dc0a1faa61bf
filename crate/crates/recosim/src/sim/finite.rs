//! Finite-population simulator: a fixed set of users arrives in a uniformly
//! random order, each receiving `r` recommendations. Selection may use noisy
//! reported values; earned rewards always use true values.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;
use rayon::prelude::*;

use crate::graph::AccessGraph;
use crate::policy::{FiniteContext, FinitePolicy, PolicySpec};
use crate::reward::{planted_uniform, RewardModel};
use crate::sim::RatioEstimate;
use crate::stats::{derive_seed, stream_id, Accumulator};

/// Per-trial reward model source. Randomized adversarial placements are
/// redrawn for every trial; fixed models are shared.
#[derive(Debug, Clone)]
pub enum ModelGen {
    Fixed(Arc<RewardModel>),
    /// `k` items chosen uniformly without replacement get value `high`, the
    /// rest `low`.
    Planted { k: usize, high: f64, low: f64 },
    /// Independently for each user, `k` of their neighbors get value 1 (the
    /// union is planted; other items are 0).
    PlantedPerUser { k: usize },
}

impl ModelGen {
    pub fn planted(k: usize) -> Self {
        ModelGen::Planted {
            k,
            high: 1.0,
            low: 0.0,
        }
    }

    pub fn fixed(model: RewardModel) -> Self {
        ModelGen::Fixed(Arc::new(model))
    }

    pub fn name(&self) -> String {
        match self {
            ModelGen::Fixed(_) => "fixed".into(),
            ModelGen::Planted { k, high, low } => {
                if *high == 1.0 && *low == 0.0 {
                    format!("planted({k})")
                } else {
                    format!("planted({k}, {high}, {low})")
                }
            }
            ModelGen::PlantedPerUser { k } => format!("planted_per_user({k})"),
        }
    }

    pub fn draw(&self, g: &AccessGraph, rng: &mut impl Rng) -> Arc<RewardModel> {
        match self {
            ModelGen::Fixed(m) => m.clone(),
            ModelGen::Planted { k, high, low } => {
                if *high == 1.0 && *low == 0.0 {
                    Arc::new(planted_uniform(g.n_items(), *k, rng).expect("valid planted size"))
                } else {
                    let chosen = rand::seq::index::sample(rng, g.n_items(), *k);
                    let mut values = vec![*low; g.n_items()];
                    for i in chosen {
                        values[i] = *high;
                    }
                    Arc::new(RewardModel::universal(values).expect("non-negative"))
                }
            }
            ModelGen::PlantedPerUser { k } => {
                let mut planted = Vec::new();
                for u in 0..g.n_users() {
                    let nbrs = g.user_neighbors(u);
                    let take = (*k).min(nbrs.len());
                    for idx in rand::seq::index::sample(rng, nbrs.len(), take) {
                        planted.push(nbrs[idx]);
                    }
                }
                Arc::new(
                    RewardModel::binary_planted(planted, g.n_items()).expect("valid planted"),
                )
            }
        }
    }
}

/// A fully specified finite-population experiment.
#[derive(Clone)]
pub struct FiniteSim {
    pub graph: Arc<AccessGraph>,
    pub model_gen: ModelGen,
    pub policy: FinitePolicy,
    pub r: usize,
    /// Views needed before an item's value is identified.
    pub views_needed: u32,
    /// Multiplicative identification noise, in [0, 0.5).
    pub delta: f64,
    /// Probability that exploitation identifies the intended item.
    pub p_pred: f64,
    /// Items pre-explored before any arrival.
    pub warm_start: Vec<usize>,
}

impl FiniteSim {
    pub fn new(
        graph: Arc<AccessGraph>,
        model_gen: ModelGen,
        spec: &PolicySpec,
        r: usize,
    ) -> Result<Self, crate::policy::PolicyError> {
        let policy = FinitePolicy::prepare(spec, &graph, r)?;
        Ok(FiniteSim {
            graph,
            model_gen,
            policy,
            r,
            views_needed: 1,
            delta: 0.0,
            p_pred: 1.0,
            warm_start: Vec::new(),
        })
    }

    pub fn with_identification(mut self, views_needed: u32, delta: f64) -> Self {
        self.views_needed = views_needed;
        self.delta = delta;
        self
    }

    /// RNG for one trial; stream separated by trial index and policy name.
    fn trial_rng(&self, master_seed: u64, trial: u64) -> ChaCha8Rng {
        let trial_seed = derive_seed(master_seed, trial);
        ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, stream_id(&self.policy.spec().name())))
    }
}

/// Outcome of a single simulated arrival sequence.
#[derive(Debug, Clone)]
pub struct FiniteTrial {
    /// Arrival order: `permutation[t]` is the t-th arriving user.
    pub permutation: Vec<usize>,
    /// Per-user earned reward (true values).
    pub earned: Vec<f64>,
    /// Per-user offline-optimal reward, independent of the arrival order.
    pub optimal: Vec<f64>,
    pub seed: u64,
}

/// Offline-optimal reward of a user: the sum of the `min(r, degree)` largest
/// true values in the neighborhood.
pub fn optimal_reward(g: &AccessGraph, model: &RewardModel, user: usize, r: usize) -> f64 {
    let mut values: Vec<f64> = g
        .user_neighbors(user)
        .iter()
        .map(|&i| model.value(g, user, i).expect("neighbor value"))
        .collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values.iter().take(r).sum()
}

/// Run one trial: draw the reward model and a uniform arrival order, process
/// every arrival, and account true earned rewards against the offline optima.
pub fn run_finite_trial(sim: &FiniteSim, master_seed: u64, trial: u64) -> FiniteTrial {
    let mut rng = sim.trial_rng(master_seed, trial);
    let g = sim.graph.as_ref();
    let model = sim.model_gen.draw(g, &mut rng);

    let mut permutation: Vec<usize> = (0..g.n_users()).collect();
    permutation.shuffle(&mut rng);

    let mut ctx = FiniteContext::new(g, &model, sim.r, sim.views_needed, sim.delta);
    ctx.p_pred = sim.p_pred;
    if !sim.warm_start.is_empty() {
        ctx.warm_start(&sim.warm_start, &mut rng);
    }

    let mut earned = vec![0.0; g.n_users()];
    for &user in &permutation {
        let rec = sim.policy.recommend(&mut ctx, user, &mut rng);
        for item in rec.items() {
            earned[user] += model.value(g, user, item).expect("neighbor value");
        }
        for item in rec.items() {
            ctx.record_shown(item, &mut rng);
        }
    }

    let optimal = (0..g.n_users())
        .map(|u| optimal_reward(g, &model, u, sim.r))
        .collect();

    FiniteTrial {
        permutation,
        earned,
        optimal,
        seed: master_seed,
    }
}

/// Aggregate results of a batch of trials.
#[derive(Debug, Clone)]
pub struct FiniteBatch {
    pub estimate: RatioEstimate,
    /// Total reward summed over users, per trial.
    pub total_reward_mean: f64,
    pub total_reward_ci_half: f64,
    pub trials: u64,
}

/// Estimate the worst-case per-user ratio over `trials` independent trials.
/// Trials run in parallel; per-trial seeds derive from the master seed and
/// trial index, so results do not depend on scheduling.
pub fn estimate_gamma_finite(sim: &FiniteSim, trials: u64, seed: u64) -> FiniteBatch {
    let n_users = sim.graph.n_users();
    let (ratio_accs, total_acc) = (0..trials)
        .into_par_iter()
        .fold(
            || (vec![Accumulator::default(); n_users], Accumulator::default()),
            |(mut accs, mut total), trial| {
                let t = run_finite_trial(sim, seed, trial);
                let mut sum = 0.0;
                for u in 0..n_users {
                    sum += t.earned[u];
                    if t.optimal[u] > 0.0 {
                        accs[u].push(t.earned[u] / t.optimal[u]);
                    }
                }
                total.push(sum);
                (accs, total)
            },
        )
        .reduce(
            || (vec![Accumulator::default(); n_users], Accumulator::default()),
            |(mut a, mut ta), (b, tb)| {
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    x.merge(y);
                }
                ta.merge(&tb);
                (a, ta)
            },
        );
    FiniteBatch {
        estimate: RatioEstimate::from_accumulators(&ratio_accs),
        total_reward_mean: total_acc.mean(),
        total_reward_ci_half: total_acc.ci95_half(),
        trials,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_complete_bipartite, gen_disjoint_stars};
    use crate::oracle::planted_search_recursion;
    use crate::policy::ExploreRule;
    use num_traits::ToPrimitive;

    fn sim(
        g: AccessGraph,
        gen: ModelGen,
        spec: PolicySpec,
        r: usize,
    ) -> FiniteSim {
        FiniteSim::new(Arc::new(g), gen, &spec, r).unwrap()
    }

    #[test]
    fn single_user_single_item_is_forced() {
        let g = gen_complete_bipartite(1, 1).unwrap();
        let model = RewardModel::universal(vec![0.7]).unwrap();
        for spec in [PolicySpec::BpExp, PolicySpec::IdExp, PolicySpec::UniformExplore] {
            let s = sim(g.clone(), ModelGen::fixed(model.clone()), spec, 1);
            let t = run_finite_trial(&s, 1, 0);
            assert_eq!(t.earned, vec![0.7]);
            assert_eq!(t.optimal, vec![0.7]);
        }
    }

    #[test]
    fn optimal_reward_examples() {
        let g = gen_complete_bipartite(1, 3).unwrap();
        let m = RewardModel::universal(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(optimal_reward(&g, &m, 0, 2), 5.0);
        assert_eq!(optimal_reward(&g, &m, 0, 10), 6.0);
        let m = RewardModel::binary_planted(vec![1], 3).unwrap();
        assert_eq!(optimal_reward(&g, &m, 0, 1), 1.0);
    }

    #[test]
    fn genie_gamma_is_one() {
        let g = gen_complete_bipartite(4, 9).unwrap();
        let s = sim(g, ModelGen::planted(2), PolicySpec::Genie, 2);
        let batch = estimate_gamma_finite(&s, 200, 7);
        assert_eq!(batch.estimate.gamma, 1.0);
        assert_eq!(batch.estimate.per_user.len(), 4);
    }

    #[test]
    fn genie_gamma_is_one_on_stars() {
        let g = gen_disjoint_stars(3, 2).unwrap();
        let s = sim(g, ModelGen::PlantedPerUser { k: 1 }, PolicySpec::Genie, 1);
        let batch = estimate_gamma_finite(&s, 100, 3);
        assert_eq!(batch.estimate.gamma, 1.0);
    }

    #[test]
    fn pairwise_arrival_order_is_balanced() {
        let g = gen_complete_bipartite(4, 4).unwrap();
        let s = sim(g, ModelGen::planted(1), PolicySpec::UniformExplore, 1);
        let trials = 40_000u64;
        let mut before = 0u64;
        for trial in 0..trials {
            let t = run_finite_trial(&s, 11, trial);
            let pos: Vec<usize> = {
                let mut p = vec![0; 4];
                for (idx, &u) in t.permutation.iter().enumerate() {
                    p[u] = idx;
                }
                p
            };
            if pos[1] < pos[2] {
                before += 1;
            }
        }
        let freq = before as f64 / trials as f64;
        let sigma = 0.5 / (trials as f64).sqrt();
        assert!((freq - 0.5).abs() <= 3.0 * sigma, "freq {freq}");
    }

    #[test]
    fn explore_until_found_matches_search_game_optimum() {
        // On the complete bipartite n x n with a single planted item, the
        // exploit-when-possible rule with uniform exploration explores fresh
        // items until the planted one is found and exploits afterwards; its
        // expected total reward equals the planted-search game optimum.
        for n in [2usize, 3, 4] {
            let g = gen_complete_bipartite(n, n).unwrap();
            let s = sim(
                g,
                ModelGen::planted(1),
                PolicySpec::ExploitWhenPossible {
                    explore: ExploreRule::Uniform,
                },
                1,
            );
            let trials = 60_000;
            let batch = estimate_gamma_finite(&s, trials, 23);
            let expect = planted_search_recursion(n, n)
                .unwrap()
                .to_f64()
                .unwrap();
            let slack = 4.0 * batch.total_reward_ci_half.max(1e-3);
            assert!(
                (batch.total_reward_mean - expect).abs() <= slack,
                "n={n}: mean {} vs exact {expect}",
                batch.total_reward_mean
            );
        }
    }

    #[test]
    fn two_by_two_enumeration_value() {
        // 2 users x 2 items, planted-1: exhaustive enumeration over the two
        // permutations and two placements gives expected total reward 3/2.
        let g = gen_complete_bipartite(2, 2).unwrap();
        let s = sim(
            g,
            ModelGen::planted(1),
            PolicySpec::ExploitWhenPossible {
                explore: ExploreRule::Uniform,
            },
            1,
        );
        let batch = estimate_gamma_finite(&s, 60_000, 5);
        assert!(
            (batch.total_reward_mean - 1.5).abs() <= 4.0 * batch.total_reward_ci_half,
            "mean {}",
            batch.total_reward_mean
        );
    }

    #[test]
    fn users_with_zero_optimum_are_excluded() {
        // Planted item fixed on item 0; user 1 only sees item 1 (value 0),
        // so user 1 never contributes ratio samples.
        let g = crate::graph::AccessGraph::build(&[(0, 0), (1, 1)], 2, 2).unwrap();
        let model = RewardModel::binary_planted(vec![0], 2).unwrap();
        let s = sim(g, ModelGen::fixed(model), PolicySpec::UniformExplore, 1);
        let batch = estimate_gamma_finite(&s, 50, 2);
        assert_eq!(batch.estimate.per_user.len(), 1);
        assert_eq!(batch.estimate.per_user[0].user, 0);
    }

    #[test]
    fn earned_uses_true_values_under_noise() {
        // delta-noisy reports may reorder selection, but earned rewards are
        // true values, so they never exceed the optimum.
        let g = gen_complete_bipartite(3, 5).unwrap();
        let model =
            RewardModel::universal(vec![0.5, 0.45, 0.9, 0.2, 0.8]).unwrap();
        let s = sim(g, ModelGen::fixed(model), PolicySpec::UniformExplore, 2)
            .with_identification(1, 0.3);
        for trial in 0..200 {
            let t = run_finite_trial(&s, 31, trial);
            for u in 0..3 {
                assert!(t.earned[u] <= t.optimal[u] + 1e-12);
                assert!(t.earned[u] >= 0.0);
            }
        }
    }

    #[test]
    fn warm_start_items_are_identified_up_front() {
        let g = gen_complete_bipartite(2, 4).unwrap();
        let model = RewardModel::universal(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let mut s = sim(
            g,
            ModelGen::fixed(model),
            PolicySpec::ExploitWhenPossible {
                explore: ExploreRule::Uniform,
            },
            1,
        );
        s.warm_start = vec![3];
        // With item 3 pre-explored, every user exploits it immediately.
        for trial in 0..50 {
            let t = run_finite_trial(&s, 13, trial);
            assert_eq!(t.earned, vec![1.0, 1.0]);
        }
    }

    #[test]
    fn trials_are_deterministic_given_seed() {
        let g = gen_complete_bipartite(5, 8).unwrap();
        let s = sim(g, ModelGen::planted(2), PolicySpec::IdExp, 2);
        let a = run_finite_trial(&s, 99, 4);
        let b = run_finite_trial(&s, 99, 4);
        assert_eq!(a.permutation, b.permutation);
        assert_eq!(a.earned, b.earned);
        let c = run_finite_trial(&s, 100, 4);
        assert_ne!(a.permutation, c.permutation);
    }
}
