use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;

use crate::error::CoreError;
use crate::scalar::Scalar;

/// How the weight table was specified.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightKind<T> {
    /// ω = 1 off the diagonal (Kemeny).
    Constant,
    /// ω(i,j) = 1 if either position is within the top k.
    TopK(usize),
    /// ω(i,j) = 1 if exactly one position is within the top k.
    Bipartite(usize),
    /// ω(i,j) = |s(i) − s(j)| for a non-increasing score vector.
    Score(Vec<T>),
    /// Explicit entries.
    Table,
}

/// An importance weight on pairs of ranks. Internally a dense n×n table over
/// 0-based positions; closed-form kinds build it on first use.
#[derive(Clone)]
pub struct WeightFunction<T> {
    n: usize,
    kind: WeightKind<T>,
    table: OnceLock<Vec<T>>,
}

impl<T: Scalar> WeightFunction<T> {
    pub fn constant(n: usize) -> Self {
        Self::lazy(n, WeightKind::Constant)
    }

    pub fn top_k(n: usize, k: usize) -> Result<Self, CoreError> {
        if k > n {
            return Err(CoreError::KOutOfRange { k, n });
        }
        Ok(Self::lazy(n, WeightKind::TopK(k)))
    }

    pub fn bipartite(n: usize, k: usize) -> Result<Self, CoreError> {
        if k > n {
            return Err(CoreError::KOutOfRange { k, n });
        }
        Ok(Self::lazy(n, WeightKind::Bipartite(k)))
    }

    /// Scores indexed by 0-based position; must be non-increasing.
    pub fn score(scores: Vec<T>) -> Result<Self, CoreError> {
        if let Some(i) = scores.windows(2).position(|w| w[1] > w[0]) {
            return Err(CoreError::InvalidWeight(format!(
                "score increases from position {} to {}",
                i + 1,
                i + 2
            )));
        }
        Ok(Self::lazy(scores.len(), WeightKind::Score(scores)))
    }

    /// Explicit row-major n×n table. Only shape and a zero diagonal are
    /// enforced here; the axioms are checked by [`WeightFunction::validate`].
    pub fn table(n: usize, entries: Vec<T>) -> Result<Self, CoreError> {
        if entries.len() != n * n {
            return Err(CoreError::Shape {
                expected: n * n,
                found: entries.len(),
            });
        }
        if let Some(i) = (0..n).find(|&i| !entries[i * n + i].is_zero()) {
            return Err(CoreError::InvalidWeight(format!(
                "diagonal entry at position {} is not 0",
                i + 1
            )));
        }
        let table = OnceLock::new();
        let _ = table.set(entries);
        Ok(Self {
            n,
            kind: WeightKind::Table,
            table,
        })
    }

    fn lazy(n: usize, kind: WeightKind<T>) -> Self {
        Self {
            n,
            kind,
            table: OnceLock::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &WeightKind<T> {
        &self.kind
    }

    fn closed_form(&self, i: usize, j: usize) -> T {
        if i == j {
            return T::zero();
        }
        let one = |b: bool| if b { T::one() } else { T::zero() };
        match &self.kind {
            WeightKind::Constant => T::one(),
            WeightKind::TopK(k) => one(i < *k || j < *k),
            WeightKind::Bipartite(k) => one((i < *k) != (j < *k)),
            WeightKind::Score(s) => {
                if s[i] >= s[j] {
                    s[i].clone() - s[j].clone()
                } else {
                    s[j].clone() - s[i].clone()
                }
            }
            WeightKind::Table => unreachable!("tables are materialized at construction"),
        }
    }

    /// Row-major table over 0-based positions.
    pub fn entries(&self) -> &[T] {
        self.table.get_or_init(|| {
            let n = self.n;
            let mut t = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    t.push(self.closed_form(i, j));
                }
            }
            t
        })
    }

    /// ω at 0-based positions `i`, `j`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.entries()[i * self.n + j]
    }

    /// Same weights as an explicit table.
    pub fn to_table(&self) -> Self {
        Self::table(self.n, self.entries().to_vec()).expect("diagonal is zero")
    }

    /// Check non-negativity and the three axioms over the full position
    /// domain, recording the first witness of every violated property.
    pub fn validate(&self) -> WeightReport {
        let n = self.n;
        let w = |i: usize, j: usize| self.at(i, j).clone();
        let mut violations = Vec::new();

        'neg: for i in 0..n {
            for j in 0..n {
                if w(i, j) < T::zero() {
                    violations.push(WeightViolation::Negative { i: i + 1, j: j + 1 });
                    break 'neg;
                }
            }
        }
        'p1: for i in 0..n {
            for j in i + 1..n {
                if w(i, j) != w(j, i) {
                    violations.push(WeightViolation::Symmetry { i: i + 1, j: j + 1 });
                    break 'p1;
                }
            }
        }
        'p2: for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ordered = (i < j && j < k) || (i > j && j > k);
                    if ordered && w(i, j) > w(i, k) {
                        violations.push(WeightViolation::Monotonicity {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                        });
                        break 'p2;
                    }
                }
            }
        }
        'p3: for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if w(i, j) > w(i, k) + w(k, j) {
                        violations.push(WeightViolation::Triangle {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                        });
                        break 'p3;
                    }
                }
            }
        }
        WeightReport { violations }
    }
}

impl<T: Scalar> WeightFunction<T> {
    /// A random admissible table: a non-negative integer combination of
    /// constant, top-k and bipartite weights (the axioms are closed under
    /// such combinations).
    pub fn random_admissible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut table = vec![T::zero(); n * n];
        let mut add = |w: &WeightFunction<T>, c: i64| {
            if c == 0 {
                return;
            }
            let c = T::from_ratio(c, 1);
            for (dst, src) in table.iter_mut().zip(w.entries()) {
                *dst = dst.clone() + c.clone() * src.clone();
            }
        };
        add(&Self::constant(n), rng.random_range(0..=2));
        for k in 1..n {
            add(&Self::top_k(n, k).expect("k < n"), rng.random_range(0..=2));
            add(&Self::bipartite(n, k).expect("k < n"), rng.random_range(0..=2));
        }
        Self::table(n, table).expect("zero diagonal")
    }
}

impl<T: Scalar> PartialEq for WeightFunction<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.entries() == other.entries()
    }
}

impl<T> WeightFunction<T> {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            WeightKind::Constant => "constant",
            WeightKind::TopK(_) => "top-k",
            WeightKind::Bipartite(_) => "bipartite",
            WeightKind::Score(_) => "score",
            WeightKind::Table => "table",
        }
    }
}

impl<T> fmt::Debug for WeightFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightFunction")
            .field("n", &self.n)
            .field("kind", &self.kind_name())
            .finish()
    }
}

/// One violated property with its witness, as 1-based positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "kebab-case")]
pub enum WeightViolation {
    Negative { i: usize, j: usize },
    /// P1: ω(i,j) ≠ ω(j,i).
    Symmetry { i: usize, j: usize },
    /// P2: ω(i,j) > ω(i,k) with j strictly between i and k.
    Monotonicity { i: usize, j: usize, k: usize },
    /// P3: ω(i,j) > ω(i,k) + ω(k,j).
    Triangle { i: usize, j: usize, k: usize },
}

impl WeightViolation {
    pub fn axiom(&self) -> &'static str {
        match self {
            WeightViolation::Negative { .. } => "non-negativity",
            WeightViolation::Symmetry { .. } => "P1",
            WeightViolation::Monotonicity { .. } => "P2",
            WeightViolation::Triangle { .. } => "P3",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WeightReport {
    pub violations: Vec<WeightViolation>,
}

impl WeightReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// The first violated property in the order non-negativity, P1, P2, P3.
    pub fn first(&self) -> Option<&WeightViolation> {
        self.violations.first()
    }
}
