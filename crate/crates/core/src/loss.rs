//! Weighted pairwise misranking losses.
//!
//! All losses share one shape: a sum over ordered pairs of
//! `x(u,v) · g(v,u)` divided by a normalizer, where `x` is the relation
//! being judged (ranking, tournament, partition) and `g` encodes the ground
//! truth. The normalizer travels with the value in [`LossValue`].

use serde::Serialize;
use thiserror::Error;

use crate::element::PairRelation;
use crate::error::CoreError;
use crate::pair::PairTable;
use crate::partition::Partition;
use crate::ranking::Ranking;
use crate::scalar::{binomial2, Scalar};
use crate::weight::WeightFunction;

#[derive(Debug, Error)]
pub enum LossError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("weight function is defined for n = {weight_n}, rankings have n = {n}")]
    WeightSize { weight_n: usize, n: usize },
    #[error("mixed-pairs normalizer requested but the partition has no mixed pairs")]
    NoMixedPairs,
    #[error("normalizer must be positive")]
    NonPositiveNormalizer,
}

/// Which denominator a loss is divided by.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalizer<T> {
    /// n choose 2.
    Binomial,
    /// Number of pairs with different labels (bipartite losses only).
    MixedPairs,
    /// A caller-supplied ν.
    Custom(T),
}

impl<T> Normalizer<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Normalizer::Binomial => "binomial",
            Normalizer::MixedPairs => "mixed-pairs",
            Normalizer::Custom(_) => "custom",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossValue<T> {
    /// Normalized loss.
    pub value: T,
    /// Unnormalized weighted count.
    pub raw: T,
    pub normalizer: Normalizer<T>,
    /// The number actually divided by (0 when the pair sum is empty).
    pub denominator: T,
}

impl<T: Scalar> LossValue<T> {
    fn binomial(raw: T, n: usize) -> Self {
        let denominator = binomial2::<T>(n);
        let value = if denominator.is_zero() {
            T::zero()
        } else {
            raw.clone() / denominator.clone()
        };
        Self {
            value,
            raw,
            normalizer: Normalizer::Binomial,
            denominator,
        }
    }
}

fn same_elements<A: PairRelation + ?Sized, B: PairRelation + ?Sized>(
    a: &A,
    b: &B,
) -> Result<(), LossError> {
    if a.elements() != b.elements() {
        return Err(CoreError::ElementSetMismatch.into());
    }
    Ok(())
}

/// Σ_{u≠v} x(u,v) σ*(v,u) ω(σ*(u), σ*(v)), unnormalized.
pub fn weighted_disagreement<T, X>(
    x: &X,
    sigma_star: &Ranking,
    w: &WeightFunction<T>,
) -> Result<T, LossError>
where
    T: Scalar,
    X: PairRelation + ?Sized,
{
    same_elements(x, sigma_star)?;
    let n = sigma_star.len();
    if w.n() != n {
        return Err(LossError::WeightSize { weight_n: w.n(), n });
    }
    let mut total = T::zero();
    for u in 0..n {
        for v in 0..n {
            if u != v && x.holds(u, v) && sigma_star.prefers(v, u) {
                total = total + w.at(sigma_star.rank_of(u), sigma_star.rank_of(v)).clone();
            }
        }
    }
    Ok(total)
}

/// Weighted misranking loss of `sigma` against the ground truth `sigma_star`.
pub fn loss_ranking<T: Scalar>(
    sigma: &Ranking,
    sigma_star: &Ranking,
    w: &WeightFunction<T>,
) -> Result<LossValue<T>, LossError> {
    let raw = weighted_disagreement(sigma, sigma_star, w)?;
    Ok(LossValue::binomial(raw, sigma.len()))
}

/// Preference loss: the same functional evaluated on a (possibly cyclic)
/// preference relation instead of a ranking.
pub fn loss_pref<T, H>(
    h: &H,
    sigma_star: &Ranking,
    w: &WeightFunction<T>,
) -> Result<LossValue<T>, LossError>
where
    T: Scalar,
    H: PairRelation + ?Sized,
{
    let raw = weighted_disagreement(h, sigma_star, w)?;
    Ok(LossValue::binomial(raw, h.size()))
}

/// Bipartite loss Σ_{u≠v} x(u,v) τ*(v,u) / ν.
pub fn loss_bipartite<T, X>(
    x: &X,
    tau_star: &Partition,
    normalizer: Normalizer<T>,
) -> Result<LossValue<T>, LossError>
where
    T: Scalar,
    X: PairRelation + ?Sized,
{
    same_elements(x, tau_star)?;
    let n = tau_star.size();
    let mut count = 0usize;
    for u in 0..n {
        for v in 0..n {
            if u != v && x.holds(u, v) && tau_star.prefers(v, u) {
                count += 1;
            }
        }
    }
    let raw = T::from_usize(count);
    match normalizer {
        Normalizer::Binomial => Ok(LossValue::binomial(raw, n)),
        Normalizer::MixedPairs => {
            let mixed = tau_star.mixed_pairs();
            if mixed == 0 {
                return Err(LossError::NoMixedPairs);
            }
            let denominator = T::from_usize(mixed);
            Ok(LossValue {
                value: raw.clone() / denominator.clone(),
                raw,
                normalizer: Normalizer::MixedPairs,
                denominator,
            })
        }
        Normalizer::Custom(nu) => {
            if nu <= T::zero() {
                return Err(LossError::NonPositiveNormalizer);
            }
            Ok(LossValue {
                value: raw.clone() / nu.clone(),
                raw,
                denominator: nu.clone(),
                normalizer: Normalizer::Custom(nu),
            })
        }
    }
}

/// Fraction of mixed pairs a ranking orders correctly (positive ahead).
pub fn auc<T: Scalar>(sigma: &Ranking, tau_star: &Partition) -> Result<T, LossError> {
    same_elements(sigma, tau_star)?;
    let n = sigma.len();
    let mixed = tau_star.mixed_pairs();
    if mixed == 0 {
        return Err(LossError::NoMixedPairs);
    }
    let mut correct = 0usize;
    for u in 0..n {
        for v in 0..n {
            if tau_star.prefers(u, v) && sigma.prefers(u, v) {
                correct += 1;
            }
        }
    }
    Ok(T::from_ratio(correct as i64, mixed as i64))
}

/// Σ_{u≠v} x(u,v) · cost(v,u), the unnormalized loss of `x` against a
/// pair-cost table (e.g. Δ, τ*, or an expectation μ of either).
pub fn pair_cost_loss<T, X>(x: &X, cost: &PairTable<T>) -> T
where
    T: Scalar,
    X: PairRelation + ?Sized,
{
    let n = x.size();
    let mut total = T::zero();
    for u in 0..n {
        for v in 0..n {
            if u != v && x.holds(u, v) {
                total = total + cost.get(v, u).clone();
            }
        }
    }
    total
}

/// A fixed ground truth: a ranking with its weight function, or a
/// bipartite partition.
#[derive(Clone, Debug)]
pub enum GroundTruth<T> {
    Ranking {
        sigma_star: Ranking,
        weight: WeightFunction<T>,
    },
    Partition(Partition),
}

impl<T: Scalar> GroundTruth<T> {
    pub fn elements(&self) -> &crate::element::ElementSet {
        match self {
            GroundTruth::Ranking { sigma_star, .. } => sigma_star.elements(),
            GroundTruth::Partition(p) => p.elements(),
        }
    }

    /// Binomially normalized loss of any relation against this truth.
    pub fn loss<X: PairRelation + ?Sized>(&self, x: &X) -> Result<T, LossError> {
        Ok(match self {
            GroundTruth::Ranking { sigma_star, weight } => loss_pref(x, sigma_star, weight)?.value,
            GroundTruth::Partition(p) => loss_bipartite(x, p, Normalizer::Binomial)?.value,
        })
    }

    /// Δ(u,v) = ω(σ*(u), σ*(v)) · σ*(u,v); for a partition, τ*(u,v).
    /// The loss of X is then Σ X(u,v) Δ(v,u) / (n choose 2).
    pub fn delta(&self) -> PairTable<T> {
        match self {
            GroundTruth::Ranking { sigma_star, weight } => delta(sigma_star, weight),
            GroundTruth::Partition(p) => PairTable::indicator(p),
        }
    }
}

/// Δ(u,v) = ω(σ*(u), σ*(v)) · σ*(u,v).
pub fn delta<T: Scalar>(sigma_star: &Ranking, w: &WeightFunction<T>) -> PairTable<T> {
    PairTable::from_fn(sigma_star.len(), |u, v| {
        if sigma_star.prefers(u, v) {
            w.at(sigma_star.rank_of(u), sigma_star.rank_of(v)).clone()
        } else {
            T::zero()
        }
    })
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::element::ElementSet;
    use crate::tournament::Tournament;

    type Q = BigRational;

    fn q(a: i64, b: i64) -> Q {
        Q::new(a.into(), b.into())
    }

    fn ranking(order: &[usize]) -> Ranking {
        Ranking::from_order(ElementSet::range(order.len()), order.to_vec()).unwrap()
    }

    fn cycle3() -> Tournament {
        Tournament::from_upper(ElementSet::range(3), |i, j| matches!((i, j), (0, 1) | (1, 2)))
    }

    #[test]
    fn identical_rankings_have_zero_loss() {
        let s = ranking(&[2, 0, 3, 1]);
        let w = WeightFunction::<Q>::top_k(4, 2).unwrap();
        assert_eq!(loss_ranking(&s, &s, &w).unwrap().value, q(0, 1));
    }

    #[test]
    fn reversed_ranking_has_unit_loss() {
        let s = ranking(&[0, 1, 2]);
        let w = WeightFunction::<Q>::constant(3);
        assert_eq!(loss_ranking(&s.reversed(), &s, &w).unwrap().value, q(1, 1));
    }

    #[test]
    fn two_of_three_pairs_inverted() {
        // sigma = (w,u,v), sigma* = (u,v,w)
        let w = WeightFunction::<Q>::constant(3);
        let l = loss_ranking(&ranking(&[2, 0, 1]), &ranking(&[0, 1, 2]), &w).unwrap();
        assert_eq!(l.value, q(2, 3));
        assert_eq!(l.raw, q(2, 1));
    }

    #[test]
    fn preference_loss_examples() {
        let w = WeightFunction::<Q>::constant(3);
        let star = ranking(&[0, 1, 2]);
        assert_eq!(loss_pref(&Tournament::from_ranking(&star), &star, &w).unwrap().value, q(0, 1));
        assert_eq!(loss_pref(&cycle3(), &star, &w).unwrap().value, q(1, 3));
        let rev = Tournament::from_ranking(&star.reversed());
        assert_eq!(loss_pref(&rev, &star, &w).unwrap().value, q(1, 1));
    }

    #[test]
    fn bipartite_examples() {
        let tau = Partition::new(ElementSet::range(3), vec![0, 1, 1]).unwrap();
        let h = cycle3();
        assert_eq!(loss_bipartite::<Q, _>(&h, &tau, Normalizer::Binomial).unwrap().value, q(1, 3));
        assert_eq!(loss_bipartite::<Q, _>(&h, &tau, Normalizer::MixedPairs).unwrap().value, q(1, 2));
        let good = Ranking::from_order(ElementSet::range(3), tau.sorted_order()).unwrap();
        assert_eq!(loss_bipartite::<Q, _>(&good, &tau, Normalizer::Binomial).unwrap().value, q(0, 1));
        assert_eq!(loss_bipartite::<Q, _>(&good, &tau, Normalizer::MixedPairs).unwrap().value, q(0, 1));
        assert_eq!(
            loss_bipartite::<Q, _>(&h, &tau, Normalizer::Custom(q(4, 1))).unwrap().value,
            q(1, 4)
        );
    }

    #[test]
    fn degenerate_partition() {
        let tau = Partition::new(ElementSet::range(3), vec![1, 1, 1]).unwrap();
        let h = cycle3();
        assert_eq!(loss_bipartite::<Q, _>(&h, &tau, Normalizer::Binomial).unwrap().value, q(0, 1));
        assert!(matches!(
            loss_bipartite::<Q, _>(&h, &tau, Normalizer::MixedPairs),
            Err(LossError::NoMixedPairs)
        ));
    }

    #[test]
    fn tiny_sets_have_zero_loss() {
        for n in 0..2 {
            let r = Ranking::identity(ElementSet::range(n));
            let w = WeightFunction::<Q>::constant(n);
            assert_eq!(loss_ranking(&r, &r, &w).unwrap().value, q(0, 1));
        }
    }

    #[test]
    fn mismatched_sets_are_rejected() {
        let a = Ranking::identity(ElementSet::range(3));
        let b = Ranking::identity(
            ElementSet::new(vec![1, 2, 3].into_iter().map(crate::ElementId).collect()).unwrap(),
        );
        let w = WeightFunction::<Q>::constant(3);
        assert!(loss_ranking(&a, &b, &w).is_err());
        let w4 = WeightFunction::<Q>::constant(4);
        assert!(matches!(
            loss_ranking(&a, &a, &w4),
            Err(LossError::WeightSize { .. })
        ));
    }

    /// Bipartite loss equals the general loss with ω = bipartite(k) and any
    /// σ* that sorts by label, exhaustively for n ≤ 5.
    #[test]
    fn bipartite_matches_general_form_exhaustively() {
        for n in 0..=5 {
            let set = ElementSet::range(n);
            for tau in Partition::enumerate_all(set.clone()) {
                let star = Ranking::from_order(set.clone(), tau.sorted_order()).unwrap();
                let w = WeightFunction::<Q>::bipartite(n, tau.positives()).unwrap();
                for sigma in Ranking::enumerate_all(set.clone()) {
                    let a = loss_bipartite::<Q, _>(&sigma, &tau, Normalizer::Binomial).unwrap();
                    let b = loss_ranking(&sigma, &star, &w).unwrap();
                    assert_eq!(a.value, b.value);
                }
                if n <= 4 {
                    for h in Tournament::enumerate_all(set.clone()) {
                        let a = loss_bipartite::<Q, _>(&h, &tau, Normalizer::Binomial).unwrap();
                        let b = loss_pref(&h, &star, &w).unwrap();
                        assert_eq!(a.value, b.value);
                    }
                }
            }
        }
    }

    #[test]
    fn auc_complements_mixed_pair_loss() {
        let set = ElementSet::range(5);
        for tau in Partition::enumerate_all(set.clone()).filter(|t| t.mixed_pairs() > 0) {
            let star = Ranking::from_order(set.clone(), tau.sorted_order()).unwrap();
            let w = WeightFunction::<Q>::bipartite(5, tau.positives()).unwrap();
            for sigma in Ranking::enumerate_all(set.clone()) {
                let l = loss_ranking(&sigma, &star, &w).unwrap().value;
                let scaled = l * binomial2::<Q>(5) / Q::from_usize(tau.mixed_pairs());
                assert_eq!(scaled + auc::<Q>(&sigma, &tau).unwrap(), q(1, 1));
                let lf = loss_ranking(&sigma, &star, &WeightFunction::<f64>::bipartite(5, tau.positives()).unwrap())
                    .unwrap()
                    .value;
                let sf = lf * 10.0 / tau.mixed_pairs() as f64 + auc::<f64>(&sigma, &tau).unwrap();
                assert!((sf - 1.0).abs() < 1e-12);
            }
        }
    }

    /// A score-difference weight is the non-negative combination
    /// Σ_k (s(k) − s(k+1)) · bipartite(k).
    #[test]
    fn score_weight_decomposes_into_bipartite_weights() {
        let s: Vec<Q> = [9, 7, 7, 3, 0].iter().map(|&x| q(x, 1)).collect();
        let w = WeightFunction::score(s.clone()).unwrap();
        let n = s.len();
        for i in 0..n {
            for j in 0..n {
                let mut sum = q(0, 1);
                for k in 1..n {
                    let c = s[k - 1].clone() - s[k].clone();
                    sum += c * WeightFunction::<Q>::bipartite(n, k).unwrap().at(i, j).clone();
                }
                assert_eq!(&sum, w.at(i, j));
            }
        }
    }

    #[test]
    fn expectation_over_ground_truths_is_linear() {
        let set = ElementSet::range(4);
        let h = Tournament::from_upper(set.clone(), |i, j| (i + 2 * j) % 3 != 0);
        let taus: Vec<Partition> = Partition::enumerate_all(set.clone()).collect();
        let probs: Vec<Q> = (0..taus.len()).map(|i| q(i as i64 + 1, 136)).collect();
        let direct: Q = taus
            .iter()
            .zip(&probs)
            .map(|(t, p)| loss_bipartite::<Q, _>(&h, t, Normalizer::Binomial).unwrap().value * p)
            .sum();
        let mut mu = PairTable::<Q>::zeros(4);
        for (t, p) in taus.iter().zip(&probs) {
            for u in 0..4 {
                for v in 0..4 {
                    if t.prefers(u, v) {
                        mu.add_at(u, v, p);
                    }
                }
            }
        }
        assert_eq!(direct, pair_cost_loss(&h, &mu) / binomial2::<Q>(4));
    }

    proptest! {
        #[test]
        fn swapping_a_concordant_adjacent_pair_never_helps(
            seed in any::<u64>(), n in 2usize..7, at in any::<usize>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let set = ElementSet::range(n);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            let star = Ranking::from_order(set.clone(), { let mut o = order.clone(); o.shuffle(&mut rng); o }).unwrap();
            let w = WeightFunction::<Q>::random_admissible(n, &mut rng);
            let sigma = Ranking::from_order(set.clone(), order.clone()).unwrap();
            let p = at % (n - 1);
            let (a, b) = (order[p], order[p + 1]);
            prop_assume!(star.prefers(a, b));
            order.swap(p, p + 1);
            let flipped = Ranking::from_order(set, order).unwrap();
            prop_assert!(loss_ranking(&flipped, &star, &w).unwrap().value >= loss_ranking(&sigma, &star, &w).unwrap().value);
        }
    }
}
