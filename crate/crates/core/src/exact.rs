//! Exact expectations over QuickSort's pivot choices.
//!
//! A [`PivotTree`] is the memoized DAG of every sub-array QuickSort can
//! create on a tournament, keyed by member set. It yields two independent
//! views of the algorithm: the full output distribution (by composing child
//! distributions) and the reach probability of each sub-array (by pushing
//! probability mass down from the root). The first gives expectations by
//! enumeration; the second gives the direct and triple decision
//! probabilities p_uv and p_uvw used by the decomposition formulas.

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

use crate::element::{ElementSet, PairRelation};
use crate::error::CoreError;
use crate::loss::{GroundTruth, LossError};
use crate::pair::PairTable;
use crate::ranking::Ranking;
use crate::scalar::{binomial2, Scalar};

/// Masks are u32, so this is the absolute ceiling.
pub const HARD_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactConfig {
    /// Largest element count accepted.
    pub max_n: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self { max_n: 8 }
    }
}

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("n = {n} exceeds the exact-mode limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("exact expectations need at least two elements")]
    TooSmall,
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Loss(#[from] LossError),
    /// Two computations that must agree did not: an implementation bug.
    #[error("internal identity failed ({what}): {lhs} != {rhs}")]
    IdentityMismatch {
        what: &'static str,
        lhs: String,
        rhs: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Branch {
    pub pivot: usize,
    pub left: u32,
    pub right: u32,
}

#[derive(Clone, Debug)]
pub struct PivotNode<T> {
    /// Probability that this member set occurs as a sub-array.
    pub reach: T,
    /// One branch per pivot candidate, each taken with probability 1/size.
    pub branches: Vec<Branch>,
}

#[derive(Clone, Debug)]
pub struct PivotTree<T> {
    n: usize,
    elements: ElementSet,
    /// Sub-arrays of size ≥ 2 reachable from the root.
    nodes: BTreeMap<u32, PivotNode<T>>,
}

fn members(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |&i| mask >> i & 1 == 1)
}

fn full_mask(n: usize) -> u32 {
    ((1u64 << n) - 1) as u32
}

fn check_size(n: usize, cfg: &ExactConfig) -> Result<(), ExactError> {
    let limit = cfg.max_n.min(HARD_LIMIT);
    if n > limit {
        return Err(ExactError::TooLarge { n, limit });
    }
    Ok(())
}

impl<T: Scalar> PivotTree<T> {
    pub fn build<H: PairRelation + ?Sized>(h: &H, cfg: &ExactConfig) -> Result<Self, ExactError> {
        let n = h.size();
        check_size(n, cfg)?;
        let full = full_mask(n);
        let mut nodes: BTreeMap<u32, PivotNode<T>> = BTreeMap::new();
        let mut queue = VecDeque::new();
        if n >= 2 {
            queue.push_back(full);
        }
        while let Some(mask) = queue.pop_front() {
            if nodes.contains_key(&mask) {
                continue;
            }
            let branches: Vec<Branch> = members(mask)
                .map(|x| {
                    let mut left = 0u32;
                    for y in members(mask) {
                        if y != x && h.holds(y, x) {
                            left |= 1 << y;
                        }
                    }
                    let right = mask & !left & !(1 << x);
                    Branch { pivot: x, left, right }
                })
                .collect();
            for b in &branches {
                for child in [b.left, b.right] {
                    if child.count_ones() >= 2 && !nodes.contains_key(&child) {
                        queue.push_back(child);
                    }
                }
            }
            nodes.insert(
                mask,
                PivotNode {
                    reach: T::zero(),
                    branches,
                },
            );
        }

        // Parents are strict supersets, so larger sets go first.
        let mut order: Vec<u32> = nodes.keys().copied().collect();
        order.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
        if let Some(root) = nodes.get_mut(&full) {
            root.reach = T::one();
        }
        for mask in order {
            let node = &nodes[&mask];
            let share = node.reach.clone() / T::from_usize(mask.count_ones() as usize);
            let children: Vec<u32> = node
                .branches
                .iter()
                .flat_map(|b| [b.left, b.right])
                .filter(|c| c.count_ones() >= 2)
                .collect();
            for c in children {
                let child = nodes.get_mut(&c).expect("child was enqueued");
                child.reach = child.reach.clone() + share.clone();
            }
        }

        Ok(Self {
            n,
            elements: h.elements().clone(),
            nodes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &BTreeMap<u32, PivotNode<T>> {
        &self.nodes
    }

    /// Probability that the member set `mask` occurs as a sub-array.
    pub fn reach(&self, mask: u32) -> T {
        self.nodes
            .get(&mask)
            .map(|node| node.reach.clone())
            .unwrap_or_else(T::zero)
    }

    /// The exact output distribution, built bottom-up over the DAG.
    pub fn distribution(&self) -> OutputDistribution<T> {
        let mut memo: HashMap<u32, Vec<(Vec<u8>, T)>> = HashMap::new();
        let mut order: Vec<u32> = self.nodes.keys().copied().collect();
        order.sort_by_key(|m| m.count_ones());
        let leaf = |mask: u32| -> Vec<(Vec<u8>, T)> {
            vec![(members(mask).map(|i| i as u8).collect(), T::one())]
        };
        for mask in order {
            let size = T::from_usize(mask.count_ones() as usize);
            let mut acc: HashMap<Vec<u8>, T> = HashMap::new();
            for b in &self.nodes[&mask].branches {
                let left = memo.get(&b.left).cloned().unwrap_or_else(|| leaf(b.left));
                let right = memo.get(&b.right).cloned().unwrap_or_else(|| leaf(b.right));
                for (l, pl) in &left {
                    for (r, pr) in &right {
                        let mut key = Vec::with_capacity(l.len() + r.len() + 1);
                        key.extend_from_slice(l);
                        key.push(b.pivot as u8);
                        key.extend_from_slice(r);
                        let p = pl.clone() * pr.clone() / size.clone();
                        match acc.get_mut(&key) {
                            Some(slot) => *slot = slot.clone() + p,
                            None => {
                                acc.insert(key, p);
                            }
                        }
                    }
                }
            }
            memo.insert(mask, acc.into_iter().collect());
        }
        let full = full_mask(self.n);
        let mut outcomes: Vec<(Vec<u8>, T)> = memo.remove(&full).unwrap_or_else(|| leaf(full));
        outcomes.sort_by(|a, b| a.0.cmp(&b.0));
        OutputDistribution {
            outcomes: outcomes
                .into_iter()
                .map(|(o, p)| {
                    let order = o.into_iter().map(usize::from).collect();
                    (
                        Ranking::from_order(self.elements.clone(), order).expect("permutation"),
                        p,
                    )
                })
                .collect(),
        }
    }

    /// p_uv and p_uvw from the reach probabilities: a set S of size s hands
    /// each member the pivot role with probability 1/s.
    pub fn pair_stats(&self) -> PairStats<T> {
        let n = self.n;
        let mut direct = PairTable::zeros(n);
        let mut triple = vec![T::zero(); n * n * n];
        for (&mask, node) in &self.nodes {
            let s = mask.count_ones() as usize;
            let two = node.reach.clone() * T::from_ratio(2, s as i64);
            let three = node.reach.clone() * T::from_ratio(3, s as i64);
            let m: Vec<usize> = members(mask).collect();
            for (a, &u) in m.iter().enumerate() {
                for (b, &v) in m.iter().enumerate().skip(a + 1) {
                    direct.add_at(u, v, &two);
                    for &w in &m[b + 1..] {
                        let slot = &mut triple[(u * n + v) * n + w];
                        *slot = slot.clone() + three.clone();
                    }
                }
            }
        }
        for u in 0..n {
            for v in u + 1..n {
                let p = direct.get(u, v).clone();
                direct.set(v, u, p);
            }
        }
        PairStats { n, direct, triple }
    }
}

/// Every output ranking with its exact probability.
#[derive(Clone, Debug)]
pub struct OutputDistribution<T> {
    pub outcomes: Vec<(Ranking, T)>,
}

impl<T: Scalar> OutputDistribution<T> {
    pub fn total(&self) -> T {
        self.outcomes
            .iter()
            .fold(T::zero(), |acc, (_, p)| acc + p.clone())
    }

    pub fn probability_of(&self, r: &Ranking) -> T {
        self.outcomes
            .iter()
            .find(|(o, _)| o == r)
            .map(|(_, p)| p.clone())
            .unwrap_or_else(T::zero)
    }

    /// E[f(ranking)].
    pub fn expect<F, E>(&self, mut f: F) -> Result<T, E>
    where
        F: FnMut(&Ranking) -> Result<T, E>,
    {
        let mut acc = T::zero();
        for (r, p) in &self.outcomes {
            acc = acc + p.clone() * f(r)?;
        }
        Ok(acc)
    }
}

/// Direct (p_uv) and triple (p_uvw) decision probabilities.
#[derive(Clone, Debug)]
pub struct PairStats<T> {
    n: usize,
    direct: PairTable<T>,
    triple: Vec<T>,
}

impl<T: Scalar> PairStats<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// p_uv = p_vu.
    pub fn p_direct(&self, u: usize, v: usize) -> &T {
        self.direct.get(u, v)
    }

    /// p_uvw, symmetric in its arguments.
    pub fn p_triple(&self, u: usize, v: usize, w: usize) -> &T {
        let mut t = [u, v, w];
        t.sort_unstable();
        &self.triple[(t[0] * self.n + t[1]) * self.n + t[2]]
    }

    /// For each pair u < v, the total probability that it is decided:
    /// directly, or indirectly through a third pivot. Each must be 1.
    pub fn decided_once<H: PairRelation + ?Sized>(&self, h: &H) -> Vec<((usize, usize), T)> {
        let n = self.n;
        let third = T::from_ratio(1, 3);
        let mut out = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let mut total = self.p_direct(u, v).clone();
                for w in (0..n).filter(|&w| w != u && w != v) {
                    let through = (h.holds(u, w) && h.holds(w, v)) || (h.holds(v, w) && h.holds(w, u));
                    if through {
                        total = total + third.clone() * self.p_triple(u, v, w).clone();
                    }
                }
                out.push(((u, v), total));
            }
        }
        out
    }
}

/// α[X,Y]_uv = X(u,v)Y(v,u) + X(v,u)Y(u,v).
pub fn alpha<T: Scalar>(x: &PairTable<T>, y: &PairTable<T>, u: usize, v: usize) -> T {
    x.get(u, v).clone() * y.get(v, u).clone() + x.get(v, u).clone() * y.get(u, v).clone()
}

/// α[X,Y] as a symmetric table (read it as an unordered-pair function).
pub fn alpha_table<T: Scalar>(x: &PairTable<T>, y: &PairTable<T>) -> PairTable<T> {
    PairTable::from_fn(x.n(), |u, v| if u == v { T::zero() } else { alpha(x, y, u, v) })
}

fn ind<T: Scalar>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}

/// β[X]_uvw: the expected contribution of X to a triple decided through a
/// pivot among the three, with each pivot taken with probability 1/3.
pub fn beta<T, H>(h: &H, x: &PairTable<T>, u: usize, v: usize, w: usize) -> T
where
    T: Scalar,
    H: PairRelation + ?Sized,
{
    let p = |a: usize, b: usize| h.holds(a, b);
    let term = |a: usize, b: usize, c: usize| -> T {
        // pivot b between a and c
        ind::<T>(p(a, b) && p(b, c)) * x.get(c, a).clone()
            + ind::<T>(p(c, b) && p(b, a)) * x.get(a, c).clone()
    };
    (term(u, v, w) + term(v, u, w) + term(u, w, v)) * T::from_ratio(1, 3)
}

/// γ[Z]_uvw for an unordered-pair function Z (read as `z.get(min, max)`).
pub fn gamma<T, H>(h: &H, z: &PairTable<T>, u: usize, v: usize, w: usize) -> T
where
    T: Scalar,
    H: PairRelation + ?Sized,
{
    let p = |a: usize, b: usize| h.holds(a, b);
    let zz = |a: usize, b: usize| z.get(a.min(b), a.max(b)).clone();
    let term = |a: usize, b: usize, c: usize| -> T {
        ind::<T>((p(a, b) && p(b, c)) || (p(c, b) && p(b, a))) * zz(a, c)
    };
    (term(u, v, w) + term(v, u, w) + term(u, w, v)) * T::from_ratio(1, 3)
}

fn triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n).flat_map(move |u| (u + 1..n).flat_map(move |v| (v + 1..n).map(move |w| (u, v, w))))
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)))
}

/// Output distribution of QuickSort on `h` under uniform pivots.
pub fn enumerate_distribution<T, H>(h: &H, cfg: &ExactConfig) -> Result<OutputDistribution<T>, ExactError>
where
    T: Scalar,
    H: PairRelation + ?Sized,
{
    let dist = PivotTree::<T>::build(h, cfg)?.distribution();
    let total = dist.total();
    if !total.near(&T::one()) {
        return Err(ExactError::IdentityMismatch {
            what: "leaf probabilities sum to 1",
            lhs: total.to_string(),
            rhs: "1".into(),
        });
    }
    Ok(dist)
}

pub fn pair_probs<T, H>(h: &H, cfg: &ExactConfig) -> Result<PairStats<T>, ExactError>
where
    T: Scalar,
    H: PairRelation + ?Sized,
{
    Ok(PivotTree::<T>::build(h, cfg)?.pair_stats())
}

/// Σ_{u<v} p_uv α[h,X]_uv + Σ_{u<v<w} p_uvw β[X]_uvw: the decomposition of
/// E_s[Σ α[Q_s, X]].
pub fn decomposed_expectation<T, H>(h: &H, stats: &PairStats<T>, x: &PairTable<T>) -> T
where
    T: Scalar,
    H: PairRelation + ?Sized,
{
    let ht = PairTable::indicator(h);
    let n = stats.n();
    let direct = pairs(n).fold(T::zero(), |acc, (u, v)| {
        acc + stats.p_direct(u, v).clone() * alpha(&ht, x, u, v)
    });
    triples(n).fold(direct, |acc, (u, v, w)| {
        acc + stats.p_triple(u, v, w).clone() * beta(h, x, u, v, w)
    })
}

/// The exact expected loss of QuickSort on `h` against `gt`, computed by
/// enumeration and cross-checked against the p_uv/p_uvw decomposition.
pub fn expected_loss_exact<T, H>(h: &H, gt: &GroundTruth<T>, cfg: &ExactConfig) -> Result<T, ExactError>
where
    T: Scalar,
    H: PairRelation + ?Sized,
{
    let n = h.size();
    if n < 2 {
        return Err(ExactError::TooSmall);
    }
    if gt.elements() != h.elements() {
        return Err(CoreError::ElementSetMismatch.into());
    }
    let tree = PivotTree::<T>::build(h, cfg)?;
    let enumerated = tree.distribution().expect(|r| gt.loss(r))?;
    let decomposed = decomposed_expectation(h, &tree.pair_stats(), &gt.delta()) / binomial2::<T>(n);
    if !enumerated.near(&decomposed) {
        return Err(ExactError::IdentityMismatch {
            what: "enumerated vs decomposed expected loss",
            lhs: enumerated.to_string(),
            rhs: decomposed.to_string(),
        });
    }
    Ok(enumerated)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Identity<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

impl<T: Scalar> Identity<T> {
    fn new(lhs: T, rhs: T) -> Self {
        let holds = lhs.near(&rhs);
        Self { lhs, rhs, holds }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionReport<T> {
    /// Σ Z_uv = Σ p_uv Z_uv + Σ p_uvw γ[Z]_uvw.
    pub part1: Option<Identity<T>>,
    /// E_s[Σ α[Q_s,X]] = Σ p_uv α[h,X] + Σ p_uvw β[X].
    pub part2: Option<Identity<T>>,
}

impl<T: Scalar> DecompositionReport<T> {
    pub fn holds(&self) -> bool {
        self.part1.as_ref().is_none_or(|i| i.holds) && self.part2.as_ref().is_none_or(|i| i.holds)
    }
}

/// Check both decomposition identities for an unordered-pair function `z`
/// and an ordered-pair function `x` (either may be omitted).
pub fn decomposition_check<T, H>(
    h: &H,
    z: Option<&PairTable<T>>,
    x: Option<&PairTable<T>>,
    cfg: &ExactConfig,
) -> Result<DecompositionReport<T>, ExactError>
where
    T: Scalar,
    H: PairRelation + ?Sized,
{
    let n = h.size();
    let tree = PivotTree::<T>::build(h, cfg)?;
    let stats = tree.pair_stats();
    let part1 = z.map(|z| {
        let lhs = pairs(n).fold(T::zero(), |acc, (u, v)| acc + z.get(u, v).clone());
        let direct = pairs(n).fold(T::zero(), |acc, (u, v)| {
            acc + stats.p_direct(u, v).clone() * z.get(u, v).clone()
        });
        let rhs = triples(n).fold(direct, |acc, (u, v, w)| {
            acc + stats.p_triple(u, v, w).clone() * gamma(h, z, u, v, w)
        });
        Identity::new(lhs, rhs)
    });
    let part2 = match x {
        Some(x) => {
            let lhs = tree.distribution().expect::<_, ExactError>(|q| {
                let qt = PairTable::indicator(q);
                Ok(pairs(n).fold(T::zero(), |acc, (u, v)| acc + alpha(&qt, x, u, v)))
            })?;
            Some(Identity::new(lhs, decomposed_expectation(h, &stats, x)))
        }
        None => None,
    };
    Ok(DecompositionReport { part1, part2 })
}

/// Triples where β[Δ] > 2·γ[α[h,Δ]], the pointwise inequality behind the
/// factor-2 loss bound.
pub fn beta_gamma_violations<T, H>(h: &H, delta: &PairTable<T>) -> Vec<(usize, usize, usize)>
where
    T: Scalar,
    H: PairRelation + ?Sized,
{
    let ht = PairTable::indicator(h);
    let a = alpha_table(&ht, delta);
    let two = T::from_usize(2);
    triples(h.size())
        .filter(|&(u, v, w)| beta(h, delta, u, v, w) > two.clone() * gamma(h, &a, u, v, w))
        .collect()
}
