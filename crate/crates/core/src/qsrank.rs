//! Randomized QuickSort driven by a preference relation, and its pruned
//! top-k variant.
//!
//! Recursion is run on an explicit stack, left side first, so a single
//! sequential pivot stream serves both the full sort and the pruned one:
//! every call the top-k variant keeps is reached, with the same stream
//! state, before any call it drops.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::element::{ElementId, ElementSet, PairRelation};
use crate::error::CoreError;
use crate::loss::{GroundTruth, LossError};
use crate::ranking::Ranking;
use crate::scalar::Scalar;
use crate::tournament::Tournament;

#[derive(Debug, Error)]
pub enum RankError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("output is a top-k prefix, not a full ranking")]
    Partial,
}

/// SplitMix64 finalizer; used to derive independent seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent sub-stream of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    mix64(mix64(seed) ^ index.wrapping_mul(0xd605_bbb5_8c8a_bbd5))
}

/// Chooses the pivot of a sub-array.
pub trait PivotRule {
    /// Index into `members` (which has at least two entries).
    fn choose(&mut self, members: &[usize]) -> usize;
}

/// Seeded pivot stream: same seed, same pivots, same output.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent source for sub-task `index`.
    pub fn derive(&self, index: u64) -> Self {
        Self::new(derive_seed(self.seed, index))
    }
}

impl PivotRule for RandomSource {
    fn choose(&mut self, members: &[usize]) -> usize {
        self.rng.random_range(0..members.len())
    }
}

impl<F: FnMut(&[usize]) -> usize> PivotRule for F {
    fn choose(&mut self, members: &[usize]) -> usize {
        self(members)
    }
}

/// One partitioning step: the pivot and the sub-array it split, in the
/// order the sub-array was stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotRecord {
    pub pivot: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct RankResult {
    pub elements: ElementSet,
    /// Element indices, most preferred first. All n for a full sort, the
    /// first k for a top-k run.
    pub order: Vec<usize>,
    /// Preference-function evaluations performed.
    pub comparisons: u64,
    /// Empty unless tracing was enabled.
    pub pivot_trace: Vec<PivotRecord>,
}

impl RankResult {
    pub fn ids(&self) -> Vec<ElementId> {
        self.order.iter().map(|&i| self.elements.id(i)).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.order.len() == self.elements.len()
    }

    pub fn ranking(&self) -> Result<Ranking, RankError> {
        if !self.is_complete() {
            return Err(RankError::Partial);
        }
        Ok(Ranking::from_order(self.elements.clone(), self.order.clone())?)
    }
}

/// QuickSort settings.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuickSort {
    /// Keep a [`PivotRecord`] per partitioning step.
    pub trace: bool,
    /// In top-k mode, sort any sub-array with k ≥ size/8 without pruning.
    pub fallback: bool,
}

enum Frame {
    Sort { members: Vec<usize>, k: usize },
    Emit(usize),
}

impl QuickSort {
    pub fn traced() -> Self {
        Self {
            trace: true,
            fallback: false,
        }
    }

    /// Sort `members` (element indices of `h`) keeping only the first `k`
    /// output positions (`k >= members.len()` sorts fully).
    pub fn sort_members<H, P>(&self, h: &H, members: Vec<usize>, k: usize, rule: &mut P) -> (Vec<usize>, u64, Vec<PivotRecord>)
    where
        H: PairRelation + ?Sized,
        P: PivotRule + ?Sized,
    {
        let mut out = Vec::with_capacity(k.min(members.len()));
        let mut comparisons = 0u64;
        let mut trace = Vec::new();
        let mut stack = vec![Frame::Sort { members, k }];
        while let Some(frame) = stack.pop() {
            let (members, mut k) = match frame {
                Frame::Emit(x) => {
                    out.push(x);
                    continue;
                }
                Frame::Sort { members, k } => (members, k),
            };
            let n = members.len();
            if k == 0 || n == 0 {
                continue;
            }
            if n == 1 {
                out.push(members[0]);
                continue;
            }
            if k >= n || (self.fallback && 8 * k >= n) {
                k = n;
            }
            let pivot = members[rule.choose(&members)];
            let mut left = Vec::new();
            let mut right = Vec::new();
            for &v in &members {
                if v == pivot {
                    continue;
                }
                comparisons += 1;
                if h.holds(v, pivot) {
                    left.push(v);
                } else {
                    right.push(v);
                }
            }
            if self.trace {
                trace.push(PivotRecord { pivot, members });
            }
            let n_left = left.len();
            let k_right = k.saturating_sub(n_left + 1);
            if k_right > 0 {
                stack.push(Frame::Sort {
                    members: right,
                    k: k_right,
                });
            }
            if k > n_left {
                stack.push(Frame::Emit(pivot));
            }
            stack.push(Frame::Sort {
                members: left,
                k: k.min(n_left),
            });
        }
        (out, comparisons, trace)
    }

    pub fn rank<P: PivotRule + ?Sized>(&self, h: &Tournament, rule: &mut P) -> Result<RankResult, RankError> {
        h.ensure_valid()?;
        Ok(self.run(h, h.len(), rule))
    }

    pub fn top_k<P: PivotRule + ?Sized>(&self, h: &Tournament, k: usize, rule: &mut P) -> Result<RankResult, RankError> {
        let n = h.len();
        if k == 0 || k > n {
            return Err(CoreError::KOutOfRange { k, n }.into());
        }
        h.ensure_valid()?;
        let mut res = self.run(h, k, rule);
        res.order.truncate(k);
        Ok(res)
    }

    /// Unvalidated entry point for any relation, e.g. implicit bench
    /// tournaments.
    pub fn run<H, P>(&self, h: &H, k: usize, rule: &mut P) -> RankResult
    where
        H: PairRelation + ?Sized,
        P: PivotRule + ?Sized,
    {
        let (order, comparisons, pivot_trace) = self.sort_members(h, (0..h.size()).collect(), k, rule);
        RankResult {
            elements: h.elements().clone(),
            order,
            comparisons,
            pivot_trace,
        }
    }
}

/// Rank all of `h` with uniformly random pivots. Records the pivot trace.
pub fn quicksort_rank(h: &Tournament, rng: &mut RandomSource) -> Result<RankResult, RankError> {
    QuickSort::traced().rank(h, rng)
}

/// The first `k` positions of [`quicksort_rank`]'s output under the same
/// seed, computed with the recursion pruned.
pub fn quicksort_topk(
    h: &Tournament,
    k: usize,
    rng: &mut RandomSource,
    fallback: bool,
) -> Result<RankResult, RankError> {
    QuickSort {
        trace: true,
        fallback,
    }
    .top_k(h, k, rng)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Monte Carlo estimate of QuickSort's expected loss against `gt`. Trial
/// `t` uses the seed `derive_seed(seed, t)`; trials run in parallel and are
/// reduced in trial order.
pub fn estimate_expected_loss<T: Scalar>(
    h: &Tournament,
    gt: &GroundTruth<T>,
    trials: u64,
    seed: u64,
) -> Result<LossEstimate, RankError> {
    if trials == 0 {
        return Err(RankError::ZeroTrials);
    }
    h.ensure_valid()?;
    if gt.elements() != h.elements() {
        return Err(CoreError::ElementSetMismatch.into());
    }
    let sorter = QuickSort::default();
    let losses: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = RandomSource::new(derive_seed(seed, t));
            let r = sorter.run(h, h.len(), &mut rng);
            let ranking = Ranking::from_order(h.elements().clone(), r.order).expect("full sort");
            gt.loss(&ranking).map(|l| l.to_f64())
        })
        .collect::<Result<_, _>>()?;
    let m = losses.len() as f64;
    let mean = losses.iter().sum::<f64>() / m;
    let std_error = if losses.len() < 2 {
        0.0
    } else {
        let var = losses.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
        (var / m).sqrt()
    };
    Ok(LossEstimate {
        mean,
        std_error,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    use super::*;
    use crate::partition::Partition;
    use crate::weight::WeightFunction;

    fn cycle3() -> Tournament {
        Tournament::from_upper(ElementSet::range(3), |i, j| matches!((i, j), (0, 1) | (1, 2)))
    }

    fn random_tournament(n: usize, seed: u64) -> Tournament {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Tournament::from_upper(ElementSet::range(n), |_, _| rng.random_bool(0.5))
    }

    /// Always picks the member at `pos` (clamped).
    fn fixed(pos: usize) -> impl FnMut(&[usize]) -> usize {
        move |m: &[usize]| pos.min(m.len() - 1)
    }

    #[test]
    fn transitive_input_is_sorted_exactly() {
        let mut order: Vec<usize> = (0..30).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
        let r = Ranking::from_order(ElementSet::range(30), order).unwrap();
        let h = Tournament::from_ranking(&r);
        for seed in 0..10 {
            let out = quicksort_rank(&h, &mut RandomSource::new(seed)).unwrap();
            assert_eq!(out.ranking().unwrap(), r);
        }
    }

    #[test]
    fn three_cycle_with_u_as_first_pivot() {
        // pivot u: v goes right (h(v,u)=0), w goes left (h(w,u)=1)
        let out = QuickSort::traced().rank(&cycle3(), &mut fixed(0)).unwrap();
        assert_eq!(out.order, vec![2, 0, 1]);
        assert_eq!(out.comparisons, 2);
        let top = QuickSort::traced().top_k(&cycle3(), 1, &mut fixed(0)).unwrap();
        assert_eq!(top.order, vec![2]);
        assert_eq!(top.comparisons, 2);
    }

    #[test]
    fn singleton_needs_no_comparisons() {
        let h = Tournament::from_upper(ElementSet::range(1), |_, _| true);
        let out = quicksort_rank(&h, &mut RandomSource::new(1)).unwrap();
        assert_eq!(out.order, vec![0]);
        assert_eq!(out.comparisons, 0);
    }

    #[test]
    fn invalid_tournament_is_rejected() {
        let mut h = cycle3();
        h.set(1, 0, true);
        assert!(quicksort_rank(&h, &mut RandomSource::new(1)).is_err());
    }

    #[test]
    fn k_range_is_checked() {
        let h = cycle3();
        assert!(quicksort_topk(&h, 0, &mut RandomSource::new(1), false).is_err());
        assert!(quicksort_topk(&h, 4, &mut RandomSource::new(1), false).is_err());
    }

    #[test]
    fn top_k_equal_to_n_matches_full_sort() {
        let h = random_tournament(40, 9);
        for seed in 0..20 {
            let full = quicksort_rank(&h, &mut RandomSource::new(seed)).unwrap();
            let top = quicksort_topk(&h, 40, &mut RandomSource::new(seed), false).unwrap();
            assert_eq!(full.order, top.order);
            assert_eq!(full.comparisons, top.comparisons);
        }
    }

    #[test]
    fn top_one_of_transitive_is_the_source() {
        let r = Ranking::from_order(ElementSet::range(6), vec![4, 2, 0, 5, 1, 3]).unwrap();
        let h = Tournament::from_ranking(&r);
        for seed in 0..10 {
            let top = quicksort_topk(&h, 1, &mut RandomSource::new(seed), false).unwrap();
            assert_eq!(top.order, vec![4]);
        }
    }

    #[test]
    fn same_seed_same_output() {
        let h = random_tournament(50, 1);
        let a = quicksort_rank(&h, &mut RandomSource::new(77)).unwrap();
        let b = quicksort_rank(&h, &mut RandomSource::new(77)).unwrap();
        assert_eq!(a.order, b.order);
        assert_eq!(a.pivot_trace, b.pivot_trace);
    }

    #[test]
    fn estimate_on_transitive_input_is_exactly_zero() {
        let r = Ranking::from_order(ElementSet::range(5), vec![3, 1, 4, 0, 2]).unwrap();
        let h = Tournament::from_ranking(&r);
        let gt = GroundTruth::Ranking {
            sigma_star: r,
            weight: WeightFunction::<f64>::constant(5),
        };
        let e = estimate_expected_loss(&h, &gt, 200, 5).unwrap();
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.std_error, 0.0);
        assert!(matches!(estimate_expected_loss(&h, &gt, 0, 5), Err(RankError::ZeroTrials)));
    }

    #[test]
    fn estimate_on_three_cycle_approaches_known_values() {
        let h = cycle3();
        let star = Ranking::identity(ElementSet::range(3));
        let gt = GroundTruth::Ranking {
            sigma_star: star,
            weight: WeightFunction::<BigRational>::constant(3),
        };
        let e = estimate_expected_loss(&h, &gt, 20_000, 1).unwrap();
        assert!((e.mean - 4.0 / 9.0).abs() < 4.0 * e.std_error, "{e:?}");
        let tau = Partition::new(ElementSet::range(3), vec![0, 1, 1]).unwrap();
        let e = estimate_expected_loss(&h, &GroundTruth::<f64>::Partition(tau), 20_000, 2).unwrap();
        assert!((e.mean - 1.0 / 3.0).abs() < 4.0 * e.std_error, "{e:?}");
    }

    proptest! {
        #[test]
        fn output_is_a_permutation_and_comparisons_add_up(seed in any::<u64>(), n in 0usize..60) {
            let h = random_tournament(n, seed);
            let out = quicksort_rank(&h, &mut RandomSource::new(seed ^ 1)).unwrap();
            prop_assert!(out.ranking().is_ok());
            let expected: u64 = out.pivot_trace.iter().map(|r| r.members.len() as u64 - 1).sum();
            prop_assert_eq!(out.comparisons, expected);
        }

        #[test]
        fn outermost_pivot_splits_by_preference(seed in any::<u64>(), n in 2usize..40) {
            let h = random_tournament(n, seed);
            let out = quicksort_rank(&h, &mut RandomSource::new(seed)).unwrap();
            let ranking = out.ranking().unwrap();
            let root = &out.pivot_trace[0];
            for &v in &root.members {
                if v != root.pivot {
                    prop_assert_eq!(ranking.prefers(v, root.pivot), h.prefers(v, root.pivot));
                }
            }
        }

        #[test]
        fn prefix_consistency(seed in any::<u64>(), n in 1usize..80, k in any::<usize>(), fallback in any::<bool>()) {
            let h = random_tournament(n, seed);
            let k = 1 + k % n;
            let full = quicksort_rank(&h, &mut RandomSource::new(seed)).unwrap();
            let top = quicksort_topk(&h, k, &mut RandomSource::new(seed), fallback).unwrap();
            prop_assert_eq!(&top.order[..], &full.order[..k]);
            prop_assert!(top.comparisons <= full.comparisons);
        }

        /// With pivots chosen by element identity, the input order of a
        /// sub-array does not affect the output.
        #[test]
        fn traversal_order_is_irrelevant(seed in any::<u64>(), n in 1usize..30) {
            let h = random_tournament(n, seed);
            let by_identity = |m: &[usize]| {
                let key = |x: usize| mix64(seed ^ x as u64);
                (0..m.len()).min_by_key(|&i| key(m[i])).unwrap()
            };
            let sorter = QuickSort::default();
            let (a, _, _) = sorter.sort_members(&h, (0..n).collect(), n, &mut { by_identity });
            let mut shuffled: Vec<usize> = (0..n).collect();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let (b, _, _) = sorter.sort_members(&h, shuffled, n, &mut { by_identity });
            prop_assert_eq!(a, b);
        }
    }
}
