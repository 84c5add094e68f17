use std::collections::BTreeMap;

use super::OracleError;
use crate::element::{ElementId, ElementSet};
use crate::loss::{GroundTruth, LossError, Normalizer};
use crate::pair::PairTable;
use crate::scalar::{binomial2, Scalar};
use crate::tournament::Tournament;

/// A finite-support distribution over ground truths. Each truth lives on its
/// own element set, a subset of `universe`; when every truth uses the
/// universe itself the distribution is *fixed-V*.
#[derive(Clone, Debug)]
pub struct GroundTruthDistribution<T> {
    universe: ElementSet,
    support: Vec<(GroundTruth<T>, T)>,
}

impl<T: Scalar> GroundTruthDistribution<T> {
    pub fn new(universe: ElementSet, support: Vec<(GroundTruth<T>, T)>) -> Result<Self, OracleError> {
        let mut total = T::zero();
        for (truth, p) in &support {
            if *p < T::zero() {
                return Err(OracleError::BadProbabilities(p.to_string()));
            }
            total = total + p.clone();
            universe.indices_of(truth.elements())?;
        }
        if !total.near(&T::one()) {
            return Err(OracleError::BadProbabilities(total.to_string()));
        }
        Ok(Self { universe, support })
    }

    /// All mass on one truth over the universe.
    pub fn point_mass(truth: GroundTruth<T>) -> Self {
        Self {
            universe: truth.elements().clone(),
            support: vec![(truth, T::one())],
        }
    }

    pub fn universe(&self) -> &ElementSet {
        &self.universe
    }

    pub fn support(&self) -> &[(GroundTruth<T>, T)] {
        &self.support
    }

    pub fn is_fixed_v(&self) -> bool {
        self.support.iter().all(|(t, _)| t.elements() == &self.universe)
    }

    pub fn is_bipartite(&self) -> bool {
        self.support
            .iter()
            .all(|(t, _)| matches!(t, GroundTruth::Partition(_)))
    }

    /// Support entries grouped by the member set of their element set,
    /// in canonical order of the sorted ids.
    pub fn by_subset(&self) -> BTreeMap<Vec<ElementId>, Vec<usize>> {
        let mut groups: BTreeMap<Vec<ElementId>, Vec<usize>> = BTreeMap::new();
        for (k, (t, _)) in self.support.iter().enumerate() {
            let mut ids = t.elements().ids().to_vec();
            ids.sort_unstable();
            groups.entry(ids).or_default().push(k);
        }
        groups
    }
}

/// The denominator ν for one truth.
pub(crate) fn nu<T: Scalar>(truth: &GroundTruth<T>, normalizer: &Normalizer<T>) -> Result<T, OracleError> {
    Ok(match normalizer {
        Normalizer::Binomial => binomial2(truth.elements().len()),
        Normalizer::MixedPairs => match truth {
            GroundTruth::Partition(p) => {
                if p.mixed_pairs() == 0 {
                    return Err(LossError::NoMixedPairs.into());
                }
                T::from_usize(p.mixed_pairs())
            }
            GroundTruth::Ranking { .. } => return Err(OracleError::NotBipartite),
        },
        Normalizer::Custom(c) => c.clone(),
    })
}

/// M(u,v) = Σ_entries p · Δ(u,v) / ν over universe indices, restricted to
/// the entries listed in `entries`. The expected normalized loss of any
/// relation X on the universe is then Σ_{u≠v} X(u,v) M(v,u).
pub(crate) fn pair_cost_of<T: Scalar>(
    d: &GroundTruthDistribution<T>,
    entries: &[usize],
    normalizer: &Normalizer<T>,
) -> Result<PairTable<T>, OracleError> {
    let mut m = PairTable::zeros(d.universe.len());
    for &k in entries {
        let (truth, p) = &d.support[k];
        let v = truth.elements().len();
        if v < 2 {
            continue;
        }
        let idx = d.universe.indices_of(truth.elements())?;
        let scale = p.clone() / nu(truth, normalizer)?;
        let delta = truth.delta();
        for a in 0..v {
            for b in 0..v {
                if a != b && !delta.get(a, b).is_zero() {
                    m.add_at(idx[a], idx[b], &(scale.clone() * delta.get(a, b).clone()));
                }
            }
        }
    }
    Ok(m)
}

/// Expected per-pair cost over the whole distribution (see
/// [`GroundTruthDistribution`]); with the binomial normalizer and a fixed
/// element set this is μ / (n choose 2).
pub fn pair_cost<T: Scalar>(
    d: &GroundTruthDistribution<T>,
    normalizer: &Normalizer<T>,
) -> Result<PairTable<T>, OracleError> {
    let all: Vec<usize> = (0..d.support.len()).collect();
    pair_cost_of(d, &all, normalizer)
}

/// μ(u,v) = E[τ*(u,v)] for a fixed-V bipartite distribution.
#[derive(Clone, Debug)]
pub struct PairMarginal<T> {
    pub elements: ElementSet,
    pub mu: PairTable<T>,
}

impl<T: Scalar> PairMarginal<T> {
    pub fn new(elements: ElementSet, mu: PairTable<T>) -> Result<Self, OracleError> {
        let m = Self { elements, mu };
        if let Some(v) = m.violations().into_iter().next() {
            return Err(OracleError::BadMarginal(v));
        }
        Ok(m)
    }

    /// Every violated constraint, described.
    pub fn violations(&self) -> Vec<String> {
        let n = self.elements.len();
        let mu = |a: usize, b: usize| self.mu.get(a, b).clone();
        let id = |a: usize| self.elements.id(a);
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                if mu(a, b) < T::zero() || mu(a, b) > T::one() {
                    out.push(format!("mu({},{}) outside [0,1]", id(a), id(b)));
                }
                if a < b && mu(a, b) + mu(b, a) > T::one() {
                    out.push(format!("mu({0},{1}) + mu({1},{0}) > 1", id(a), id(b)));
                }
                for c in (0..n).filter(|&c| c != a && c != b) {
                    if mu(a, c) > mu(a, b) + mu(b, c) {
                        out.push(format!("triangle mu({},{}) via {}", id(a), id(c), id(b)));
                    }
                }
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                for w in v + 1..n {
                    let fwd = mu(u, v) + mu(v, w) + mu(w, u);
                    let back = mu(v, u) + mu(w, v) + mu(u, w);
                    if !fwd.near(&back) {
                        out.push(format!("cyclic sum on {{{},{},{}}}", id(u), id(v), id(w)));
                    }
                }
            }
        }
        out
    }

    /// The pairwise-optimal preference function for this marginal.
    pub fn optimal_pref(&self) -> Tournament {
        optimal_pref(&self.elements, &self.mu)
    }
}

pub fn mu_of<T: Scalar>(d: &GroundTruthDistribution<T>) -> Result<PairMarginal<T>, OracleError> {
    if !d.is_bipartite() {
        return Err(OracleError::NotBipartite);
    }
    if !d.is_fixed_v() {
        return Err(OracleError::VaryingElementSets);
    }
    let n = d.universe.len();
    let mut mu = PairTable::zeros(n);
    for (truth, p) in &d.support {
        if let GroundTruth::Partition(tau) = truth {
            for a in 0..n {
                for b in 0..n {
                    if tau.prefers(a, b) {
                        mu.add_at(a, b, p);
                    }
                }
            }
        }
    }
    let m = PairMarginal {
        elements: d.universe.clone(),
        mu,
    };
    let v = m.violations();
    assert!(v.is_empty(), "marginal of a distribution must be feasible: {v:?}");
    Ok(m)
}

/// h̃(u,v) = 1 iff score(u,v) > score(v,u); on equality the element with the
/// larger canonical id is preferred.
pub fn optimal_pref<T: Scalar>(elements: &ElementSet, score: &PairTable<T>) -> Tournament {
    Tournament::from_upper(elements.clone(), |u, v| {
        let (a, b) = (score.get(u, v), score.get(v, u));
        if a > b {
            true
        } else if a < b {
            false
        } else {
            elements.id(u) > elements.id(v)
        }
    })
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;

    use super::*;
    use crate::partition::Partition;

    type Q = BigRational;

    fn q(a: i64, b: i64) -> Q {
        Q::new(a.into(), b.into())
    }

    fn part(labels: &[u8]) -> GroundTruth<Q> {
        GroundTruth::Partition(Partition::new(ElementSet::range(labels.len()), labels.to_vec()).unwrap())
    }

    #[test]
    fn point_mass_marginal_is_the_partition() {
        let d = GroundTruthDistribution::point_mass(part(&[0, 1, 1, 0]));
        let m = mu_of(&d).unwrap();
        assert_eq!(*m.mu.get(0, 1), q(1, 1));
        assert_eq!(*m.mu.get(1, 0), q(0, 1));
        assert_eq!(*m.mu.get(0, 3), q(0, 1));
        let h = m.optimal_pref();
        // agrees with τ* on mixed pairs
        assert!(h.prefers(0, 1) && h.prefers(3, 2) && h.prefers(0, 2));
    }

    #[test]
    fn uniform_over_partition_and_reverse() {
        let d = GroundTruthDistribution::new(
            ElementSet::range(3),
            vec![(part(&[0, 1, 1]), q(1, 2)), (part(&[1, 0, 0]), q(1, 2))],
        )
        .unwrap();
        let m = mu_of(&d).unwrap();
        assert_eq!(*m.mu.get(0, 1), q(1, 2));
        assert_eq!(*m.mu.get(1, 0), q(1, 2));
        assert_eq!(*m.mu.get(0, 2), q(1, 2));
        assert_eq!(*m.mu.get(1, 2), q(0, 1));
    }

    #[test]
    fn optimal_pref_rules() {
        let set = ElementSet::range(2);
        let mut mu = PairTable::<f64>::zeros(2);
        mu.set(0, 1, 0.7);
        mu.set(1, 0, 0.2);
        assert!(optimal_pref(&set, &mu).prefers(0, 1));
        mu.set(1, 0, 0.7);
        // equality: larger canonical id wins
        assert!(optimal_pref(&set, &mu).prefers(1, 0));
    }

    #[test]
    fn rejects_bad_probabilities() {
        let bad = GroundTruthDistribution::new(ElementSet::range(3), vec![(part(&[0, 1, 1]), q(1, 2))]);
        assert!(matches!(bad, Err(OracleError::BadProbabilities(_))));
        let neg = GroundTruthDistribution::new(
            ElementSet::range(3),
            vec![(part(&[0, 1, 1]), q(3, 2)), (part(&[0, 0, 1]), q(-1, 2))],
        );
        assert!(neg.is_err());
    }

    #[test]
    fn marginal_violations_are_reported() {
        let mut mu = PairTable::<Q>::zeros(3);
        mu.set(0, 2, q(1, 1));
        let m = PairMarginal {
            elements: ElementSet::range(3),
            mu,
        };
        let v = m.violations();
        assert!(v.iter().any(|s| s.starts_with("triangle")));
        assert!(v.iter().any(|s| s.starts_with("cyclic")));
    }
}
