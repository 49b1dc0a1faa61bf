//! Item-value assignment: universal per-item values, personalized per-edge
//! transforms, planted binary placements, and per-class value sequences for
//! the infinite-horizon setting. Also the noisy value oracle that models
//! identification of pre-explored items.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use thiserror::Error;

use crate::graph::AccessGraph;

#[derive(Debug, Error)]
pub enum RewardError {
    #[error("item {item} is not in user {user}'s neighborhood")]
    NotNeighbor { user: usize, item: usize },
    #[error("value lookup for item {item} outside model range {n}")]
    ItemOutOfRange { item: usize, n: usize },
    #[error("planted size {k} invalid for {n_items} items")]
    BadPlantedSize { k: usize, n_items: usize },
    #[error("values file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("negative value {value} for item {item}")]
    NegativeValue { item: usize, value: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A deterministic per-class value sequence; the k-th item of the class
/// (k = 1, 2, ...) takes `value(k)`. Sequences are fixed before any arrival,
/// never adapted to the sample path.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassSequence {
    Constant(f64),
    /// `initial * ratio^(k-1)`.
    GeometricDecay { initial: f64, ratio: f64 },
    /// `value` at ordinal `position` (1-based), `background` elsewhere.
    PlantedPosition {
        position: u64,
        value: f64,
        background: f64,
    },
    /// Explicit list extended cyclically.
    Explicit(Vec<f64>),
}

impl ClassSequence {
    /// Value of the k-th item (k is 1-based).
    pub fn value(&self, k: u64) -> f64 {
        debug_assert!(k >= 1);
        match self {
            ClassSequence::Constant(v) => *v,
            ClassSequence::GeometricDecay { initial, ratio } => {
                initial * ratio.powi((k - 1) as i32)
            }
            ClassSequence::PlantedPosition {
                position,
                value,
                background,
            } => {
                if k == *position {
                    *value
                } else {
                    *background
                }
            }
            ClassSequence::Explicit(vs) => vs[((k - 1) % vs.len() as u64) as usize],
        }
    }
}

/// Value assignment over the item side of an access graph.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardModel {
    /// Per-item value shared by all neighboring users.
    Universal { values: Vec<f64> },
    /// Per-item base value with a positive per-edge scale: the reward of
    /// `(u, i)` is `scale(u, i) * values[i]`. Scales default to 1.
    Personalized {
        values: Vec<f64>,
        scales: BTreeMap<(usize, usize), f64>,
    },
    /// A planted set of 1-valued items; everything else is 0.
    BinaryPlanted { planted: Vec<usize>, n_items: usize },
    /// One value sequence per item-class (infinite-horizon setting).
    ClassSequences { sequences: Vec<ClassSequence> },
}

impl RewardModel {
    pub fn universal(values: Vec<f64>) -> Result<Self, RewardError> {
        check_non_negative(&values)?;
        Ok(RewardModel::Universal { values })
    }

    pub fn personalized(
        values: Vec<f64>,
        scales: BTreeMap<(usize, usize), f64>,
    ) -> Result<Self, RewardError> {
        check_non_negative(&values)?;
        for (&(_, item), &s) in &scales {
            if s < 0.0 {
                return Err(RewardError::NegativeValue { item, value: s });
            }
        }
        Ok(RewardModel::Personalized { values, scales })
    }

    pub fn binary_planted(mut planted: Vec<usize>, n_items: usize) -> Result<Self, RewardError> {
        planted.sort_unstable();
        planted.dedup();
        if let Some(&bad) = planted.iter().find(|&&i| i >= n_items) {
            return Err(RewardError::ItemOutOfRange {
                item: bad,
                n: n_items,
            });
        }
        Ok(RewardModel::BinaryPlanted { planted, n_items })
    }

    pub fn class_sequences(sequences: Vec<ClassSequence>) -> Self {
        RewardModel::ClassSequences { sequences }
    }

    /// True base value of an item, ignoring personalization.
    pub fn base_value(&self, item: usize) -> Result<f64, RewardError> {
        match self {
            RewardModel::Universal { values } | RewardModel::Personalized { values, .. } => values
                .get(item)
                .copied()
                .ok_or(RewardError::ItemOutOfRange {
                    item,
                    n: values.len(),
                }),
            RewardModel::BinaryPlanted { planted, n_items } => {
                if item >= *n_items {
                    return Err(RewardError::ItemOutOfRange {
                        item,
                        n: *n_items,
                    });
                }
                Ok(if planted.binary_search(&item).is_ok() {
                    1.0
                } else {
                    0.0
                })
            }
            RewardModel::ClassSequences { .. } => Err(RewardError::ItemOutOfRange { item, n: 0 }),
        }
    }

    /// Per-edge scale factor (1 unless the model is personalized).
    pub fn scale(&self, user: usize, item: usize) -> f64 {
        match self {
            RewardModel::Personalized { scales, .. } => {
                scales.get(&(user, item)).copied().unwrap_or(1.0)
            }
            _ => 1.0,
        }
    }

    /// True reward user `u` earns from neighboring item `i` (finite setting).
    /// Querying a non-neighbor is an access-graph violation.
    pub fn value(&self, g: &AccessGraph, user: usize, item: usize) -> Result<f64, RewardError> {
        if !g.has_edge(user, item) {
            return Err(RewardError::NotNeighbor { user, item });
        }
        Ok(self.base_value(item)? * self.scale(user, item))
    }

    /// Value of the k-th item of a class (infinite setting, k 1-based).
    pub fn class_value(&self, class: usize, k: u64) -> Result<f64, RewardError> {
        match self {
            RewardModel::ClassSequences { sequences } => sequences
                .get(class)
                .map(|s| s.value(k))
                .ok_or(RewardError::ItemOutOfRange {
                    item: class,
                    n: sequences.len(),
                }),
            _ => Err(RewardError::ItemOutOfRange { item: class, n: 0 }),
        }
    }
}

fn check_non_negative(values: &[f64]) -> Result<(), RewardError> {
    for (item, &v) in values.iter().enumerate() {
        if !(v >= 0.0) {
            return Err(RewardError::NegativeValue { item, value: v });
        }
    }
    Ok(())
}

/// Draw a planted binary model with `k` 1-valued items chosen uniformly
/// without replacement.
pub fn planted_uniform(n_items: usize, k: usize, rng: &mut impl Rng) -> Result<RewardModel, RewardError> {
    if k == 0 || k > n_items {
        return Err(RewardError::BadPlantedSize { k, n_items });
    }
    let planted = rand::seq::index::sample(rng, n_items, k).into_vec();
    RewardModel::binary_planted(planted, n_items)
}

/// Parse the "item value" per-line format; `#` comments and blank lines are
/// ignored.
pub fn parse_values(text: &str, n_items: usize) -> Result<Vec<f64>, RewardError> {
    let mut values = vec![0.0; n_items];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let item: usize = fields
            .next()
            .unwrap()
            .parse()
            .map_err(|e| RewardError::Parse {
                line: lineno + 1,
                msg: format!("bad item index: {e}"),
            })?;
        let value: f64 = fields
            .next()
            .ok_or_else(|| RewardError::Parse {
                line: lineno + 1,
                msg: "missing value".into(),
            })?
            .parse()
            .map_err(|e| RewardError::Parse {
                line: lineno + 1,
                msg: format!("bad value: {e}"),
            })?;
        if item >= n_items {
            return Err(RewardError::Parse {
                line: lineno + 1,
                msg: format!("item {item} out of range ({n_items} items)"),
            });
        }
        values[item] = value;
    }
    check_non_negative(&values)?;
    Ok(values)
}

/// Exposure model: an item's value becomes identifiable only after `f` views,
/// and then only within a multiplicative `(1 ± delta)` band. The reported
/// value is drawn once per item and memoized, so repeated queries agree.
#[derive(Debug, Clone)]
pub struct ValueOracle {
    views_needed: u32,
    delta: f64,
    reports: HashMap<u64, f64>,
}

impl ValueOracle {
    /// `delta` must lie in `[0, 0.5)`.
    pub fn new(views_needed: u32, delta: f64) -> Self {
        assert!(views_needed >= 1, "need at least one view");
        assert!((0.0..0.5).contains(&delta), "delta must be in [0, 0.5)");
        ValueOracle {
            views_needed,
            delta,
            reports: HashMap::new(),
        }
    }

    pub fn views_needed(&self) -> u32 {
        self.views_needed
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Reported value for an item with `view_count` views, or `None` while
    /// the item is still unidentified.
    pub fn report(
        &mut self,
        item: u64,
        true_value: f64,
        view_count: u32,
        rng: &mut impl Rng,
    ) -> Option<f64> {
        if view_count < self.views_needed {
            return None;
        }
        Some(self.known_report(item, true_value, rng))
    }

    /// Reported value for an item already known to be identified.
    pub fn known_report(&mut self, item: u64, true_value: f64, rng: &mut impl Rng) -> f64 {
        if self.delta == 0.0 {
            return true_value;
        }
        *self.reports.entry(item).or_insert_with(|| {
            let lo = (1.0 - self.delta) * true_value;
            let hi = (1.0 + self.delta) * true_value;
            if lo == hi {
                lo
            } else {
                rng.random_range(lo..=hi)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_complete_bipartite;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn binary_planted_values() {
        let g = gen_complete_bipartite(1, 5).unwrap();
        let m = RewardModel::binary_planted(vec![3], 5).unwrap();
        assert_eq!(m.value(&g, 0, 3).unwrap(), 1.0);
        assert_eq!(m.value(&g, 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn personalized_scaling() {
        let g = gen_complete_bipartite(1, 1).unwrap();
        let mut scales = BTreeMap::new();
        scales.insert((0, 0), 0.5);
        let m = RewardModel::personalized(vec![2.0], scales).unwrap();
        assert_eq!(m.value(&g, 0, 0).unwrap(), 1.0);
    }

    #[test]
    fn class_sequence_values() {
        // One high first value, then a low tail.
        let s = ClassSequence::Explicit(vec![1.0, 0.1]);
        assert_eq!(s.value(1), 1.0);
        assert_eq!(s.value(2), 0.1);
        assert_eq!(s.value(3), 1.0); // cyclic extension

        let s = ClassSequence::GeometricDecay {
            initial: 1.0,
            ratio: 0.5,
        };
        assert_eq!(s.value(1), 1.0);
        assert_eq!(s.value(2), 0.5);

        let s = ClassSequence::PlantedPosition {
            position: 2,
            value: 1.0,
            background: 0.25,
        };
        assert_eq!(s.value(1), 0.25);
        assert_eq!(s.value(2), 1.0);

        let m = RewardModel::class_sequences(vec![ClassSequence::Explicit(vec![1.0, 0.1])]);
        assert_eq!(m.class_value(0, 2).unwrap(), 0.1);
        assert!(m.class_value(1, 1).is_err());
    }

    #[test]
    fn non_neighbor_query_is_error() {
        let g = crate::graph::AccessGraph::build(&[(0, 0), (1, 0), (1, 1)], 2, 2).unwrap();
        let m = RewardModel::universal(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            m.value(&g, 0, 1),
            Err(RewardError::NotNeighbor { user: 0, item: 1 })
        ));
    }

    #[test]
    fn negative_values_rejected() {
        assert!(RewardModel::universal(vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn oracle_exact_when_noiseless() {
        let mut rng = StdRng::seed_from_u64(0);
        let mut o = ValueOracle::new(1, 0.0);
        assert_eq!(o.report(7, 3.5, 1, &mut rng), Some(3.5));
        assert_eq!(o.report(7, 3.5, 5, &mut rng), Some(3.5));
    }

    #[test]
    fn oracle_unknown_below_view_threshold() {
        let mut rng = StdRng::seed_from_u64(0);
        let mut o = ValueOracle::new(3, 0.1);
        assert_eq!(o.report(0, 1.0, 2, &mut rng), None);
        assert!(o.report(0, 1.0, 3, &mut rng).is_some());
    }

    #[test]
    fn oracle_noisy_report_is_stable_and_in_band() {
        let mut rng = StdRng::seed_from_u64(42);
        let mut o = ValueOracle::new(2, 0.25);
        let first = o.report(9, 4.0, 2, &mut rng).unwrap();
        assert!((3.0..=5.0).contains(&first));
        for _ in 0..10 {
            assert_eq!(o.report(9, 4.0, 7, &mut rng), Some(first));
        }
    }

    #[test]
    fn planted_uniform_sizes() {
        let mut rng = StdRng::seed_from_u64(1);
        let m = planted_uniform(5, 1, &mut rng).unwrap();
        match &m {
            RewardModel::BinaryPlanted { planted, .. } => assert_eq!(planted.len(), 1),
            _ => panic!(),
        }
        let m = planted_uniform(6, 6, &mut rng).unwrap();
        match &m {
            RewardModel::BinaryPlanted { planted, .. } => assert_eq!(planted, &[0, 1, 2, 3, 4, 5]),
            _ => panic!(),
        }
        assert!(planted_uniform(4, 0, &mut rng).is_err());
        assert!(planted_uniform(4, 5, &mut rng).is_err());
    }

    #[test]
    fn planted_uniform_frequencies() {
        // (4, 2): each item planted with probability 1/2; counts over 10^4
        // draws stay within 4 sigma of 5000.
        let mut rng = StdRng::seed_from_u64(123);
        let draws = 10_000u32;
        let mut counts = [0u32; 4];
        for _ in 0..draws {
            if let RewardModel::BinaryPlanted { planted, .. } =
                planted_uniform(4, 2, &mut rng).unwrap()
            {
                for i in planted {
                    counts[i] += 1;
                }
            }
        }
        let sigma = (draws as f64 * 0.25).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            let dev = (c as f64 - draws as f64 / 2.0).abs();
            assert!(dev <= 4.0 * sigma, "item {i}: count {c}, dev {dev}");
        }
    }

    #[test]
    fn ranking_preserved_under_exact_reports() {
        let mut rng = StdRng::seed_from_u64(5);
        let values = [0.3, 0.9, 0.1, 0.9];
        let mut o = ValueOracle::new(1, 0.0);
        let reported: Vec<f64> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| o.report(i as u64, v, 1, &mut rng).unwrap())
            .collect();
        // Ranking by reported value with index tie-break equals ranking by
        // true value.
        let mut by_reported: Vec<usize> = (0..4).collect();
        by_reported.sort_by(|&a, &b| {
            reported[b]
                .partial_cmp(&reported[a])
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut by_true: Vec<usize> = (0..4).collect();
        by_true.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap().then(a.cmp(&b)));
        assert_eq!(by_reported, by_true);
    }

    #[test]
    fn personalized_argmax_matches_true_argmax() {
        let g = gen_complete_bipartite(1, 3).unwrap();
        let mut scales = BTreeMap::new();
        scales.insert((0, 0), 4.0);
        scales.insert((0, 2), 0.1);
        let m = RewardModel::personalized(vec![1.0, 2.0, 30.0], scales).unwrap();
        // True rewards: 4.0, 2.0, 3.0 -> argmax item 0.
        let best = (0..3)
            .max_by(|&a, &b| {
                m.value(&g, 0, a)
                    .unwrap()
                    .partial_cmp(&m.value(&g, 0, b).unwrap())
                    .unwrap()
            })
            .unwrap();
        assert_eq!(best, 0);
    }

    #[test]
    fn parse_values_format() {
        let vs = parse_values("# planted\n3 1\n0 0.5\n", 5).unwrap();
        assert_eq!(vs, vec![0.5, 0.0, 0.0, 1.0, 0.0]);
        assert!(parse_values("9 1\n", 5).is_err());
        assert!(matches!(
            parse_values("0 x\n", 5),
            Err(RewardError::Parse { line: 1, .. })
        ));
    }
}
