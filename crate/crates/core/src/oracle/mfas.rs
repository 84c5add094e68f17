use itertools::Itertools;

use super::OracleError;
use crate::element::ElementSet;
use crate::pair::PairTable;
use crate::ranking::Ranking;
use crate::scalar::{binomial2, Scalar};
use crate::weight::WeightFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteForceConfig {
    pub max_n: usize,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self { max_n: 10 }
    }
}

/// Exhaustive minimum of Σ_{a ahead of b} cost(b, a) · ω(pos a, pos b) over
/// all rankings of `elements` (ω ≡ 1 when `w` is `None`). Returns the
/// unnormalized minimum.
///
/// Ties go to the lexicographically smallest position vector, listing
/// elements in canonical id order.
pub fn min_ranking_cost<T: Scalar>(
    elements: &ElementSet,
    cost: &PairTable<T>,
    w: Option<&WeightFunction<T>>,
    cfg: &BruteForceConfig,
) -> Result<(Ranking, T), OracleError> {
    let n = elements.len();
    if n > cfg.max_n {
        return Err(OracleError::TooLarge { n, limit: cfg.max_n });
    }
    let canon = elements.canonical_order();
    let mut order = vec![0usize; n];
    let mut best: Option<(Vec<usize>, T)> = None;
    for positions in (0..n).permutations(n) {
        for (t, &p) in positions.iter().enumerate() {
            order[p] = canon[t];
        }
        let mut total = T::zero();
        for a in 0..n {
            for b in a + 1..n {
                let c = cost.get(order[b], order[a]);
                if c.is_zero() {
                    continue;
                }
                total = match w {
                    Some(w) => total + c.clone() * w.at(a, b).clone(),
                    None => total + c.clone(),
                };
            }
        }
        if best.as_ref().is_none_or(|(_, b)| total < *b) {
            best = Some((order.clone(), total));
        }
    }
    let (order, total) = best.expect("at least one ranking");
    Ok((Ranking::from_order(elements.clone(), order)?, total))
}

/// σ_optimal for a pair-cost function (a tournament's indicator, or a
/// marginal μ), with its binomially normalized loss. With ω ≡ 1 and a
/// tournament this is minimum feedback arc set.
pub fn optimal_ranking<T: Scalar>(
    elements: &ElementSet,
    cost: &PairTable<T>,
    w: Option<&WeightFunction<T>>,
    cfg: &BruteForceConfig,
) -> Result<(Ranking, T), OracleError> {
    let (r, raw) = min_ranking_cost(elements, cost, w, cfg)?;
    let c = binomial2::<T>(elements.len());
    let loss = if c.is_zero() { T::zero() } else { raw / c };
    Ok((r, loss))
}
