use std::collections::HashMap;

use super::distribution::{nu, optimal_pref, pair_cost_of, GroundTruthDistribution};
use super::mfas::{min_ranking_cost, BruteForceConfig};
use super::OracleError;
use crate::element::{ElementId, ElementSet};
use crate::exact::{enumerate_distribution, ExactConfig};
use crate::loss::{pair_cost_loss, Normalizer};
use crate::pair::PairTable;
use crate::ranking::Ranking;
use crate::scalar::Scalar;
use crate::tournament::Tournament;

/// A (possibly randomized) procedure mapping a tournament to a ranking of
/// its elements, exposed through its exact output distribution.
pub trait RankingProcedure<T: Scalar> {
    fn distribution(&self, h: &Tournament) -> Result<Vec<(Ranking, T)>, OracleError>;

    /// P(u ahead of v) over the procedure's randomness.
    fn ahead_probabilities(&self, h: &Tournament) -> Result<PairTable<T>, OracleError> {
        let n = h.len();
        let mut p = PairTable::zeros(n);
        for (r, pr) in self.distribution(h)? {
            if r.elements() != h.elements() {
                return Err(OracleError::InvalidOutput(format!("{r:?}")));
            }
            for (a, &u) in r.order().iter().enumerate() {
                for &v in &r.order()[a + 1..] {
                    p.add_at(u, v, &pr);
                }
            }
        }
        Ok(p)
    }
}

/// QuickSort with uniform pivots, evaluated exactly.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuickSortProcedure {
    pub cfg: ExactConfig,
}

impl<T: Scalar> RankingProcedure<T> for QuickSortProcedure {
    fn distribution(&self, h: &Tournament) -> Result<Vec<(Ranking, T)>, OracleError> {
        Ok(enumerate_distribution(h, &self.cfg)?.outcomes)
    }
}

/// A deterministic procedure given as a function.
pub struct Deterministic<F>(pub F);

impl<T: Scalar, F: Fn(&Tournament) -> Ranking> RankingProcedure<T> for Deterministic<F> {
    fn distribution(&self, h: &Tournament) -> Result<Vec<(Ranking, T)>, OracleError> {
        let r = (self.0)(h);
        if !r.elements().same_members(h.elements()) {
            return Err(OracleError::InvalidOutput(format!("{r:?}")));
        }
        let r = Ranking::from_ids(h.elements().clone(), &r.ids())?;
        Ok(vec![(r, T::one())])
    }
}

/// Expected loss, the comparator's expected loss, and their difference.
#[derive(Clone, Debug, PartialEq)]
pub struct RegretValue<T> {
    pub expected: T,
    pub optimum: T,
    pub regret: T,
}

impl<T: Scalar> RegretValue<T> {
    fn new(expected: T, optimum: T) -> Self {
        let regret = expected.clone() - optimum.clone();
        Self {
            expected,
            optimum,
            regret,
        }
    }
}

fn universe_tournament(h: &Tournament, universe: &ElementSet) -> Result<Tournament, OracleError> {
    if !h.elements().same_members(universe) {
        return Err(crate::error::CoreError::ElementSetMismatch.into());
    }
    Ok(h.restrict(universe)?)
}

fn expected_relation_loss<T: Scalar>(x: &PairTable<T>, cost: &PairTable<T>) -> T {
    let n = x.n();
    let mut total = T::zero();
    for u in 0..n {
        for v in 0..n {
            if u != v && !x.get(u, v).is_zero() && !cost.get(v, u).is_zero() {
                total = total + x.get(u, v).clone() * cost.get(v, u).clone();
            }
        }
    }
    total
}

/// E_D E_s[L(A(h|V), truth)], running `alg` once per distinct element set.
fn procedure_loss<T: Scalar, A: RankingProcedure<T> + ?Sized>(
    alg: &A,
    h: &Tournament,
    d: &GroundTruthDistribution<T>,
    normalizer: &Normalizer<T>,
) -> Result<T, OracleError> {
    let mut cache: HashMap<Vec<ElementId>, PairTable<T>> = HashMap::new();
    let mut total = T::zero();
    for (truth, p) in d.support() {
        let set = truth.elements();
        if set.len() < 2 || p.is_zero() {
            continue;
        }
        let key = set.ids().to_vec();
        if !cache.contains_key(&key) {
            let local = h.restrict(set)?;
            cache.insert(key.clone(), alg.ahead_probabilities(&local)?);
        }
        let ahead = &cache[&key];
        let raw = expected_relation_loss(ahead, &truth.delta());
        total = total + p.clone() * raw / nu(truth, normalizer)?;
    }
    Ok(total)
}

/// E_D[L(h|V, truth)].
fn relation_loss<T: Scalar>(
    h: &Tournament,
    d: &GroundTruthDistribution<T>,
    normalizer: &Normalizer<T>,
) -> Result<T, OracleError> {
    let all: Vec<usize> = (0..d.support().len()).collect();
    let m = pair_cost_of(d, &all, normalizer)?;
    Ok(pair_cost_loss(&universe_tournament(h, d.universe())?, &m))
}

fn best_ranking<T: Scalar>(
    d: &GroundTruthDistribution<T>,
    entries: &[usize],
    normalizer: &Normalizer<T>,
    cfg: &BruteForceConfig,
) -> Result<T, OracleError> {
    let m = pair_cost_of(d, entries, normalizer)?;
    Ok(min_ranking_cost(d.universe(), &m, None, cfg)?.1)
}

fn best_tournament<T: Scalar>(
    d: &GroundTruthDistribution<T>,
    entries: &[usize],
    normalizer: &Normalizer<T>,
) -> Result<T, OracleError> {
    let m = pair_cost_of(d, entries, normalizer)?;
    let h = optimal_pref(d.universe(), &m);
    Ok(pair_cost_loss(&h, &m))
}

/// reg_rank(A, D): expected loss of `alg` (run on h restricted to each V)
/// minus the best single ranking of the universe.
pub fn regret_rank<T: Scalar, A: RankingProcedure<T> + ?Sized>(
    alg: &A,
    h: &Tournament,
    d: &GroundTruthDistribution<T>,
    normalizer: &Normalizer<T>,
    cfg: &BruteForceConfig,
) -> Result<RegretValue<T>, OracleError> {
    universe_tournament(h, d.universe())?;
    let expected = procedure_loss(alg, h, d, normalizer)?;
    let all: Vec<usize> = (0..d.support().len()).collect();
    Ok(RegretValue::new(expected, best_ranking(d, &all, normalizer, cfg)?))
}

/// reg_class(h, D): expected loss of h minus the best single tournament,
/// which is `optimal_pref` of the aggregated pair cost.
pub fn regret_class<T: Scalar>(
    h: &Tournament,
    d: &GroundTruthDistribution<T>,
    normalizer: &Normalizer<T>,
) -> Result<RegretValue<T>, OracleError> {
    let expected = relation_loss(h, d, normalizer)?;
    let all: Vec<usize> = (0..d.support().len()).collect();
    Ok(RegretValue::new(expected, best_tournament(d, &all, normalizer)?))
}

/// reg′_rank: the comparator may depend on V.
pub fn regret_prime_rank<T: Scalar, A: RankingProcedure<T> + ?Sized>(
    alg: &A,
    h: &Tournament,
    d: &GroundTruthDistribution<T>,
    normalizer: &Normalizer<T>,
    cfg: &BruteForceConfig,
) -> Result<RegretValue<T>, OracleError> {
    universe_tournament(h, d.universe())?;
    let expected = procedure_loss(alg, h, d, normalizer)?;
    let mut optimum = T::zero();
    for entries in d.by_subset().values() {
        optimum = optimum + best_ranking(d, entries, normalizer, cfg)?;
    }
    Ok(RegretValue::new(expected, optimum))
}

/// reg′_class: the comparator tournament may depend on V.
pub fn regret_prime_class<T: Scalar>(
    h: &Tournament,
    d: &GroundTruthDistribution<T>,
    normalizer: &Normalizer<T>,
) -> Result<RegretValue<T>, OracleError> {
    let expected = relation_loss(h, d, normalizer)?;
    let mut optimum = T::zero();
    for entries in d.by_subset().values() {
        optimum = optimum + best_tournament(d, entries, normalizer)?;
    }
    Ok(RegretValue::new(expected, optimum))
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::loss::{loss_bipartite, GroundTruth};
    use crate::partition::Partition;

    type Q = BigRational;

    fn q(a: i64, b: i64) -> Q {
        Q::new(a.into(), b.into())
    }

    fn part(n: usize, labels: &[u8]) -> GroundTruth<Q> {
        GroundTruth::Partition(Partition::new(ElementSet::range(n), labels.to_vec()).unwrap())
    }

    fn cycle() -> Tournament {
        // u→v, v→w, w→u
        Tournament::from_upper(ElementSet::range(3), |i, j| (i, j) != (0, 2))
    }

    fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> GroundTruthDistribution<Q> {
        let size = rng.random_range(1..=8);
        let weights: Vec<i64> = (0..size).map(|_| rng.random_range(1..=6)).collect();
        let total: i64 = weights.iter().sum();
        let support = weights
            .iter()
            .map(|&w| {
                let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
                (part(n, &labels), q(w, total))
            })
            .collect();
        GroundTruthDistribution::new(ElementSet::range(n), support).unwrap()
    }

    fn random_tournament(rng: &mut ChaCha8Rng, n: usize) -> Tournament {
        Tournament::from_upper(ElementSet::range(n), |_, _| rng.random_bool(0.5))
    }

    #[test]
    fn consistent_point_mass_has_zero_regret() {
        let gt = part(4, &[0, 1, 0, 1]);
        let GroundTruth::Partition(tau) = &gt else { unreachable!() };
        let h = Tournament::from_ranking(&Ranking::from_order(ElementSet::range(4), tau.sorted_order()).unwrap());
        let d = GroundTruthDistribution::point_mass(gt);
        let cfg = BruteForceConfig::default();
        let qs = QuickSortProcedure::default();
        assert_eq!(regret_class(&h, &d, &Normalizer::Binomial).unwrap().regret, q(0, 1));
        assert_eq!(regret_rank(&qs, &h, &d, &Normalizer::Binomial, &cfg).unwrap().regret, q(0, 1));
    }

    #[test]
    fn cycle_instance_values() {
        let h = cycle();
        let d = GroundTruthDistribution::point_mass(part(3, &[1, 1, 0]));
        let cls = regret_class(&h, &d, &Normalizer::Binomial).unwrap();
        assert_eq!(cls.regret, q(1, 3));
        let fixed = Deterministic(|t: &Tournament| Ranking::identity(t.elements().clone()));
        let rank = regret_rank(&fixed, &h, &d, &Normalizer::Binomial, &BruteForceConfig::default()).unwrap();
        assert_eq!(rank.regret, q(2, 3));
    }

    #[test]
    fn class_expected_matches_direct_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.random_range(2..=5);
            let d = random_distribution(&mut rng, n);
            let h = random_tournament(&mut rng, n);
            let direct = d.support().iter().fold(q(0, 1), |acc, (t, p)| {
                let GroundTruth::Partition(tau) = t else { unreachable!() };
                acc + p.clone() * loss_bipartite::<Q, _>(&h, tau, Normalizer::Binomial).unwrap().value
            });
            assert_eq!(regret_class(&h, &d, &Normalizer::Binomial).unwrap().expected, direct);
        }
    }

    #[test]
    fn optimal_pref_beats_every_tournament() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let n = rng.random_range(2..=4);
            let d = random_distribution(&mut rng, n);
            let best = regret_class(&random_tournament(&mut rng, n), &d, &Normalizer::Binomial)
                .unwrap()
                .optimum;
            let min = Tournament::enumerate_all(ElementSet::range(n))
                .map(|t| regret_class(&t, &d, &Normalizer::Binomial).unwrap().expected)
                .min()
                .unwrap();
            assert_eq!(best, min);
        }
    }

    #[test]
    fn quicksort_rank_regret_within_class_regret() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = BruteForceConfig::default();
        let qs = QuickSortProcedure::default();
        for _ in 0..40 {
            let n = rng.random_range(2..=5);
            let d = random_distribution(&mut rng, n);
            let h = random_tournament(&mut rng, n);
            let r = regret_rank(&qs, &h, &d, &Normalizer::Binomial, &cfg).unwrap();
            let c = regret_class(&h, &d, &Normalizer::Binomial).unwrap();
            // the loss half holds pointwise in expectation
            assert_eq!(r.expected, c.expected);
            assert!(r.regret <= c.regret);
        }
    }

    #[test]
    fn prime_variants_on_fixed_v_coincide() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cfg = BruteForceConfig::default();
        let qs = QuickSortProcedure::default();
        let d = random_distribution(&mut rng, 4);
        let h = random_tournament(&mut rng, 4);
        assert_eq!(
            regret_rank(&qs, &h, &d, &Normalizer::Binomial, &cfg).unwrap(),
            regret_prime_rank(&qs, &h, &d, &Normalizer::Binomial, &cfg).unwrap()
        );
        assert_eq!(
            regret_class(&h, &d, &Normalizer::Binomial).unwrap(),
            regret_prime_class(&h, &d, &Normalizer::Binomial).unwrap()
        );
    }

    #[test]
    fn prime_regret_dominates_on_varying_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = BruteForceConfig::default();
        let qs = QuickSortProcedure::default();
        let universe = ElementSet::range(4);
        for _ in 0..30 {
            let mut support = Vec::new();
            let parts = rng.random_range(2..=5);
            for _ in 0..parts {
                let mut ids: Vec<ElementId> = (0..4).filter(|_| rng.random_bool(0.7)).map(ElementId).collect();
                if ids.len() < 2 {
                    ids = vec![ElementId(0), ElementId(3)];
                }
                let labels = (0..ids.len()).map(|_| rng.random_range(0..2)).collect();
                let set = ElementSet::new(ids).unwrap();
                support.push((GroundTruth::Partition(Partition::new(set, labels).unwrap()), q(1, parts)));
            }
            let d = GroundTruthDistribution::new(universe.clone(), support).unwrap();
            let h = random_tournament(&mut rng, 4);
            let reg = regret_rank(&qs, &h, &d, &Normalizer::Binomial, &cfg).unwrap();
            let prime = regret_prime_rank(&qs, &h, &d, &Normalizer::Binomial, &cfg).unwrap();
            assert!(prime.regret >= reg.regret);
            let reg = regret_class(&h, &d, &Normalizer::Binomial).unwrap();
            let prime = regret_prime_class(&h, &d, &Normalizer::Binomial).unwrap();
            assert!(prime.regret >= reg.regret);
        }
    }

    #[test]
    fn mixed_pairs_normalizer_is_supported() {
        let h = cycle();
        let d = GroundTruthDistribution::point_mass(part(3, &[1, 1, 0]));
        let cls = regret_class(&h, &d, &Normalizer::MixedPairs).unwrap();
        // one of two mixed pairs misordered by h, none by the best tournament
        assert_eq!(cls.regret, q(1, 2));
        let bad = GroundTruthDistribution::point_mass(part(3, &[1, 1, 1]));
        assert!(regret_class(&h, &bad, &Normalizer::MixedPairs).is_err());
    }
}
