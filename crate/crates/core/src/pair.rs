use std::fmt;

use crate::element::PairRelation;
use crate::scalar::Scalar;

/// A real-valued function on ordered pairs of element indices, stored as a
/// dense n×n table. Used for Δ, μ, probabilities and arbitrary test
/// functions; unordered-pair functions read only `get(min, max)`.
#[derive(Clone, PartialEq)]
pub struct PairTable<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> PairTable<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> T>(n: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// 0/1 indicator table of a relation (tournament, ranking, partition).
    pub fn indicator<R: PairRelation + ?Sized>(r: &R) -> Self {
        Self::from_fn(r.size(), |i, j| {
            if r.holds(i, j) {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.n + j] = value;
    }

    pub fn add_at(&mut self, i: usize, j: usize, value: &T) {
        let slot = &mut self.data[i * self.n + j];
        *slot = slot.clone() + value.clone();
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn map<U: Scalar, F: Fn(&T) -> U>(&self, f: F) -> PairTable<U> {
        PairTable {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for PairTable<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.n.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}
