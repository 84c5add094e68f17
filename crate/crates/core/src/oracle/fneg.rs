use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use super::distribution::optimal_pref;
use super::mfas::{min_ranking_cost, BruteForceConfig};
use crate::element::ElementSet;
use crate::exact::{alpha_table, beta, gamma};
use crate::pair::PairTable;
use crate::qsrank::derive_seed;
use crate::scalar::Scalar;
use crate::tournament::Tournament;

/// μ on a triple (u, v, w) = (0, 1, 2), stored as
/// (μ(u,v), μ(v,u), μ(u,w), μ(w,u), μ(w,v), μ(v,w)).
#[derive(Clone, Debug, PartialEq)]
pub struct TripleMu<T>(pub [T; 6]);

const SLOTS: [(usize, usize); 6] = [(0, 1), (1, 0), (0, 2), (2, 0), (2, 1), (1, 2)];

impl<T: Scalar> TripleMu<T> {
    pub fn from_table(mu: &PairTable<T>) -> Self {
        Self(SLOTS.map(|(a, b)| mu.get(a, b).clone()))
    }

    pub fn to_table(&self) -> PairTable<T> {
        let mut t = PairTable::zeros(3);
        for (k, &(a, b)) in SLOTS.iter().enumerate() {
            t.set(a, b, self.0[k].clone());
        }
        t
    }

    /// The image under the element relabeling a ↦ perm[a].
    pub fn relabel(&self, perm: [usize; 3]) -> Self {
        let src = self.to_table();
        let mut t = PairTable::zeros(3);
        for &(a, b) in &SLOTS {
            t.set(perm[a], perm[b], src.get(a, b).clone());
        }
        Self::from_table(&t)
    }

    /// Non-negativity, triangle inequalities and cyclic-sum equality, with
    /// slack `tol` on each.
    pub fn in_polytope(&self, tol: &T) -> bool {
        let t = self.to_table();
        let mu = |a: usize, b: usize| t.get(a, b).clone();
        if self.0.iter().any(|x| x.clone() + tol.clone() < T::zero()) {
            return false;
        }
        for &(a, c) in &SLOTS {
            let b = 3 - a - c;
            if mu(a, c) > mu(a, b) + mu(b, c) + tol.clone() {
                return false;
            }
        }
        let fwd = mu(0, 1) + mu(1, 2) + mu(2, 0);
        let back = mu(1, 0) + mu(2, 1) + mu(0, 2);
        let gap = if fwd > back { fwd - back } else { back - fwd };
        gap <= tol.clone()
    }
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// The vertex sets A and B with their images under every relabeling of
/// the triple, deduplicated.
pub fn polytope_vertices<T: Scalar>() -> Vec<TripleMu<T>> {
    let h = |x: i64| T::from_ratio(x, 2);
    let base: [[i64; 6]; 5] = [
        [0, 0, 2, 0, 0, 2],
        [2, 0, 2, 0, 0, 0],
        [1, 1, 1, 1, 0, 0],
        [1, 1, 0, 0, 1, 1],
        [0, 0, 1, 1, 1, 1],
    ];
    let mut out: Vec<TripleMu<T>> = Vec::new();
    for b in base {
        let m = TripleMu(b.map(h));
        for p in PERMS {
            let r = m.relabel(p);
            if !out.contains(&r) {
                out.push(r);
            }
        }
    }
    out
}

/// F = β[μ] − γ[α[σ̃,μ]] − (γ[α[h,μ]] − γ[α[h̃,μ]]) on the triple, with σ̃
/// the brute-force optimal ranking against μ and h̃ the optimal preference.
pub fn f_value<T: Scalar>(h: &Tournament, mu: &TripleMu<T>) -> T {
    assert_eq!(h.len(), 3, "F is defined on a triple");
    let set = ElementSet::range(3);
    let m = mu.to_table();
    let (sigma, _) = min_ranking_cost(&set, &m, None, &BruteForceConfig::default()).expect("n = 3");
    let h_opt = optimal_pref(&set, &m);
    let at = |x: &PairTable<T>| gamma(h, &alpha_table(x, &m), 0, 1, 2);
    beta(h, &m, 0, 1, 2) - at(&PairTable::indicator(&sigma))
        - (at(&PairTable::indicator(h)) - at(&PairTable::indicator(&h_opt)))
}

#[derive(Clone, Debug)]
pub struct FReport<T> {
    /// (μ, h) evaluations made.
    pub samples: usize,
    pub max_f: T,
    /// Samples whose F exceeded the tolerance, with the h that produced it.
    pub violations: Vec<(TripleMu<T>, Tournament, T)>,
    /// Sampled points that failed the polytope re-check (always empty for
    /// correct sampling).
    pub outside: usize,
}

impl<T: Scalar> FReport<T> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.outside == 0
    }
}

/// Zero for exact scalars, 1e-12 otherwise.
fn tolerance<T: Scalar>() -> T {
    if T::is_exact() {
        T::zero()
    } else {
        T::from_f64(1e-12)
    }
}

fn random_combination<T: Scalar>(vertices: &[TripleMu<T>], rng: &mut ChaCha8Rng) -> TripleMu<T> {
    let picks = rng.random_range(1..=vertices.len().min(5));
    let mut acc: [T; 6] = std::array::from_fn(|_| T::zero());
    let mut total = T::zero();
    for _ in 0..picks {
        let v = &vertices[rng.random_range(0..vertices.len())];
        let w = if T::is_exact() {
            T::from_usize(rng.random_range(1..=12))
        } else {
            T::from_f64(rng.sample::<f64, _>(Exp1))
        };
        total = total + w.clone();
        for (a, x) in acc.iter_mut().zip(&v.0) {
            *a = a.clone() + w.clone() * x.clone();
        }
    }
    TripleMu(acc.map(|a| a / total.clone()))
}

/// Evaluate F over every polytope vertex and `trials` random convex
/// combinations of vertices, each against all 8 tournaments on the triple.
pub fn f_negativity_sample<T: Scalar>(trials: usize, seed: u64) -> FReport<T> {
    let vertices = polytope_vertices::<T>();
    let hs: Vec<Tournament> = Tournament::enumerate_all(ElementSet::range(3)).collect();
    let tol = tolerance::<T>();
    let points: Vec<TripleMu<T>> = vertices
        .iter()
        .cloned()
        .chain((0..trials).map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            random_combination(&vertices, &mut rng)
        }))
        .collect();
    let results: Vec<(bool, Vec<(Tournament, T)>)> = points
        .par_iter()
        .map(|mu| {
            let inside = mu.in_polytope(&tol);
            (inside, hs.iter().map(|h| (h.clone(), f_value(h, mu))).collect())
        })
        .collect();

    let mut report = FReport {
        samples: 0,
        max_f: T::zero(),
        violations: Vec::new(),
        outside: 0,
    };
    let mut first = true;
    for (mu, (inside, fs)) in points.iter().zip(results) {
        if !inside {
            report.outside += 1;
        }
        for (h, f) in fs {
            report.samples += 1;
            if first || f > report.max_f {
                report.max_f = f.clone();
                first = false;
            }
            if f > tol {
                report.violations.push((mu.clone(), h, f));
            }
        }
    }
    report
}
