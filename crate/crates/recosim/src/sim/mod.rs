//! Finite-population and infinite-horizon simulators with worst-case-user
//! competitive-ratio estimation.

pub mod finite;
pub mod infinite;

use crate::stats::Accumulator;

/// Ratio statistics for one user: mean of per-trial (or per-visit) ratios
/// `earned / optimal` over samples where the optimal reward is positive.
#[derive(Debug, Clone, Copy)]
pub struct UserRatio {
    pub user: usize,
    pub mean: f64,
    pub ci_half: f64,
    pub samples: u64,
}

/// Monte-Carlo estimate of the worst-case per-user expected-reward ratio.
#[derive(Debug, Clone)]
pub struct RatioEstimate {
    /// Users with at least one valid sample, ascending by user index.
    pub per_user: Vec<UserRatio>,
    /// Minimum per-user mean ratio.
    pub gamma: f64,
    /// 95% half-width of the minimizing user's mean.
    pub gamma_ci_half: f64,
    /// The minimizing user.
    pub min_user: usize,
}

impl RatioEstimate {
    /// Collapse per-user accumulators into the worst-case estimate. Users
    /// without samples (zero optimal reward throughout) are excluded.
    pub fn from_accumulators(accs: &[Accumulator]) -> RatioEstimate {
        let per_user: Vec<UserRatio> = accs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.count() > 0)
            .map(|(user, a)| UserRatio {
                user,
                mean: a.mean(),
                ci_half: a.ci95_half(),
                samples: a.count(),
            })
            .collect();
        let worst = per_user
            .iter()
            .min_by(|a, b| a.mean.partial_cmp(&b.mean).unwrap());
        match worst {
            Some(w) => RatioEstimate {
                gamma: w.mean,
                gamma_ci_half: w.ci_half,
                min_user: w.user,
                per_user,
            },
            None => RatioEstimate {
                per_user,
                gamma: f64::NAN,
                gamma_ci_half: 0.0,
                min_user: usize::MAX,
            },
        }
    }

    /// Conservative lower edge `gamma - ci_half`.
    pub fn lower_edge(&self) -> f64 {
        self.gamma - self.gamma_ci_half
    }
}
