use serde::Serialize;

use super::distribution::GroundTruthDistribution;
use crate::element::ElementId;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IiaViolation {
    pub u: ElementId,
    pub v: ElementId,
    pub set_a: Vec<ElementId>,
    pub set_b: Vec<ElementId>,
    pub expectation_a: String,
    pub expectation_b: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IiaReport {
    /// Number of (pair, set, set) comparisons made.
    pub comparisons: usize,
    pub violations: Vec<IiaViolation>,
}

impl IiaReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Pairwise IIA: for every ordered pair (u,v) the conditional expectation of
/// the truth's pair indicator given the element set V is the same for every
/// V in the support that contains both.
pub fn check_pairwise_iia<T: Scalar>(d: &GroundTruthDistribution<T>) -> IiaReport {
    let groups: Vec<(Vec<ElementId>, Vec<usize>)> = d.by_subset().into_iter().collect();
    // conditional E[truth(u,v) | V] per group, keyed by the pair of ids
    let conditional: Vec<Vec<(ElementId, ElementId, T)>> = groups
        .iter()
        .map(|(_, entries)| {
            let mass = entries
                .iter()
                .fold(T::zero(), |acc, &k| acc + d.support()[k].1.clone());
            let set = d.support()[entries[0]].0.elements().clone();
            let n = set.len();
            let mut e = vec![T::zero(); n * n];
            for &k in entries {
                let (truth, p) = &d.support()[k];
                let local = set
                    .indices_of(truth.elements())
                    .expect("group members share an element set");
                let delta = truth.delta();
                for a in 0..n {
                    for b in 0..n {
                        if a != b && !delta.get(a, b).is_zero() {
                            let at = local[a] * n + local[b];
                            e[at] = e[at].clone() + p.clone();
                        }
                    }
                }
            }
            let mut out = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        let v = if mass.is_zero() { T::zero() } else { e[a * n + b].clone() / mass.clone() };
                        out.push((set.id(a), set.id(b), v));
                    }
                }
            }
            out.sort_by_key(|&(u, v, _)| (u, v));
            out
        })
        .collect();

    let mut report = IiaReport::default();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            for (u, v, ea) in &conditional[i] {
                let Ok(pos) = conditional[j].binary_search_by_key(&(*u, *v), |&(a, b, _)| (a, b)) else {
                    continue;
                };
                let eb = &conditional[j][pos].2;
                report.comparisons += 1;
                if !ea.near(eb) {
                    report.violations.push(IiaViolation {
                        u: *u,
                        v: *v,
                        set_a: groups[i].0.clone(),
                        set_b: groups[j].0.clone(),
                        expectation_a: ea.to_string(),
                        expectation_b: eb.to_string(),
                    });
                }
            }
        }
    }
    report
}
