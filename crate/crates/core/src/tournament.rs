use std::fmt;

use serde::Serialize;

use crate::element::{ElementId, ElementSet, PairRelation};
use crate::error::CoreError;
use crate::ranking::Ranking;

/// A binary preference function on a finite element set, stored as a dense
/// n×n indicator matrix. `prefers(i, j)` means the element at index `i` is
/// preferred over the one at `j`. Cycles are allowed.
///
/// Construction only checks the shape; [`Tournament::validate`] reports
/// pairwise-consistency violations.
#[derive(Clone, PartialEq, Eq)]
pub struct Tournament {
    elements: ElementSet,
    matrix: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TournamentViolation {
    /// Both or neither direction is set for the pair.
    Inconsistent { u: ElementId, v: ElementId, both: bool },
    SelfPreference { u: ElementId },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TournamentReport {
    pub violations: Vec<TournamentViolation>,
}

impl TournamentReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for TournamentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                write!(f, "; ")?;
            }
            match v {
                TournamentViolation::Inconsistent { u, v, both: true } => {
                    write!(f, "pair {{{u},{v}}}: both directions preferred")?
                }
                TournamentViolation::Inconsistent { u, v, both: false } => {
                    write!(f, "pair {{{u},{v}}}: no direction preferred")?
                }
                TournamentViolation::SelfPreference { u } => {
                    write!(f, "element {u} prefers itself")?
                }
            }
        }
        Ok(())
    }
}

impl Tournament {
    /// Build from a row-major n×n 0/1 matrix.
    pub fn from_matrix(elements: ElementSet, matrix: Vec<bool>) -> Result<Self, CoreError> {
        let n = elements.len();
        if matrix.len() != n * n {
            return Err(CoreError::Shape {
                expected: n * n,
                found: matrix.len(),
            });
        }
        Ok(Self { elements, matrix })
    }

    pub fn from_rows(elements: ElementSet, rows: &[Vec<bool>]) -> Result<Self, CoreError> {
        let n = elements.len();
        if rows.len() != n {
            return Err(CoreError::Shape {
                expected: n,
                found: rows.len(),
            });
        }
        let mut matrix = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(CoreError::Shape {
                    expected: n,
                    found: row.len(),
                });
            }
            matrix.extend_from_slice(row);
        }
        Ok(Self { elements, matrix })
    }

    /// `prefers(i, j)` for `i < j` is `f(i, j)`; the reverse direction is the
    /// complement. Always pairwise consistent.
    pub fn from_upper<F: FnMut(usize, usize) -> bool>(elements: ElementSet, mut f: F) -> Self {
        let n = elements.len();
        let mut matrix = vec![false; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let p = f(i, j);
                matrix[i * n + j] = p;
                matrix[j * n + i] = !p;
            }
        }
        Self { elements, matrix }
    }

    /// The transitive tournament induced by a ranking.
    pub fn from_ranking(r: &Ranking) -> Self {
        Self::from_upper(r.elements().clone(), |i, j| r.prefers(i, j))
    }

    /// Same as [`Tournament::from_matrix`] followed by a consistency check.
    pub fn checked(elements: ElementSet, matrix: Vec<bool>) -> Result<Self, CoreError> {
        let t = Self::from_matrix(elements, matrix)?;
        t.ensure_valid()?;
        Ok(t)
    }

    pub fn elements(&self) -> &ElementSet {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    #[inline]
    pub fn prefers(&self, i: usize, j: usize) -> bool {
        self.matrix[i * self.elements.len() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let n = self.elements.len();
        self.matrix[i * n + j] = value;
    }

    /// Reverse the pair `{i, j}`.
    pub fn flip(&mut self, i: usize, j: usize) {
        let n = self.elements.len();
        self.matrix[i * n + j] = !self.matrix[i * n + j];
        self.matrix[j * n + i] = !self.matrix[j * n + i];
    }

    pub fn out_degree(&self, i: usize) -> usize {
        let n = self.elements.len();
        self.matrix[i * n..(i + 1) * n].iter().filter(|&&b| b).count()
    }

    pub fn validate(&self) -> TournamentReport {
        let n = self.len();
        let mut violations = Vec::new();
        for i in 0..n {
            if self.prefers(i, i) {
                violations.push(TournamentViolation::SelfPreference {
                    u: self.elements.id(i),
                });
            }
            for j in i + 1..n {
                let (a, b) = (self.prefers(i, j), self.prefers(j, i));
                if a == b {
                    violations.push(TournamentViolation::Inconsistent {
                        u: self.elements.id(i),
                        v: self.elements.id(j),
                        both: a,
                    });
                }
            }
        }
        TournamentReport { violations }
    }

    pub fn ensure_valid(&self) -> Result<(), CoreError> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(CoreError::InconsistentTournament(report))
        }
    }

    /// Restrict to `subset`, keeping every pair indicator. The result is
    /// indexed in the order of `subset`.
    pub fn restrict(&self, subset: &ElementSet) -> Result<Self, CoreError> {
        let idx = self.elements.indices_of(subset)?;
        let m = idx.len();
        let mut matrix = Vec::with_capacity(m * m);
        for &a in &idx {
            for &b in &idx {
                matrix.push(self.prefers(a, b));
            }
        }
        Ok(Self {
            elements: subset.clone(),
            matrix,
        })
    }

    /// True if some triple forms a directed cycle.
    pub fn has_cycle3(&self) -> bool {
        self.cyclic_triples() > 0
    }

    /// Number of cyclic (non-transitive) triples, counted via out-degrees:
    /// C(n,3) minus the transitive triples Σ C(outdeg, 2).
    pub fn cyclic_triples(&self) -> u64 {
        let n = self.len() as u64;
        let all = if n < 3 { 0 } else { n * (n - 1) * (n - 2) / 6 };
        let transitive: u64 = (0..self.len())
            .map(|i| {
                let d = self.out_degree(i) as u64;
                d * d.saturating_sub(1) / 2
            })
            .sum();
        all - transitive
    }

    /// Iterate over every tournament on `elements` (2^(n choose 2) of them).
    pub fn enumerate_all(elements: ElementSet) -> impl Iterator<Item = Tournament> {
        let n = elements.len();
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let count = 1u64 << pairs.len();
        (0..count).map(move |bits| {
            let mut t = Tournament::from_upper(elements.clone(), |_, _| true);
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if bits >> b & 1 == 0 {
                    t.flip(i, j);
                }
            }
            t
        })
    }
}

impl PairRelation for Tournament {
    fn elements(&self) -> &ElementSet {
        &self.elements
    }

    #[inline]
    fn holds(&self, i: usize, j: usize) -> bool {
        self.prefers(i, j)
    }
}

impl fmt::Debug for Tournament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Tournament {:?}", self.elements)?;
        let n = self.len();
        for i in 0..n {
            let row: String = (0..n)
                .map(|j| if self.prefers(i, j) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle3() -> Tournament {
        // u=0, v=1, w=2: u>v, v>w, w>u
        Tournament::from_upper(ElementSet::range(3), |i, j| matches!((i, j), (0, 1) | (1, 2)))
    }

    #[test]
    fn three_cycle_is_valid() {
        let t = cycle3();
        assert!(t.prefers(0, 1) && t.prefers(1, 2) && t.prefers(2, 0));
        assert!(t.validate().is_ok());
        assert_eq!(t.cyclic_triples(), 1);
    }

    #[test]
    fn double_preference_is_reported() {
        let mut t = cycle3();
        t.set(1, 0, true);
        let report = t.validate();
        assert_eq!(
            report.violations,
            vec![TournamentViolation::Inconsistent {
                u: ElementId(0),
                v: ElementId(1),
                both: true
            }]
        );
        assert!(t.ensure_valid().is_err());
    }

    #[test]
    fn empty_set_is_valid() {
        let t = Tournament::from_matrix(ElementSet::range(0), vec![]).unwrap();
        assert!(t.validate().is_ok());
    }

    #[test]
    fn self_preference_is_reported() {
        let mut t = cycle3();
        t.set(2, 2, true);
        assert_eq!(
            t.validate().violations,
            vec![TournamentViolation::SelfPreference { u: ElementId(2) }]
        );
    }

    #[test]
    fn restrict_copies_pair() {
        let t = cycle3();
        let sub = ElementSet::new(vec![ElementId(2), ElementId(0)]).unwrap();
        let r = t.restrict(&sub).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.prefers(0, 1)); // w > u
        assert!(!r.prefers(1, 0));
        assert_eq!(t.restrict(t.elements()).unwrap(), t);
        let foreign = ElementSet::new(vec![ElementId(5)]).unwrap();
        assert!(t.restrict(&foreign).is_err());
    }

    #[test]
    fn enumerates_all_tournaments() {
        let all: Vec<_> = Tournament::enumerate_all(ElementSet::range(3)).collect();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|t| t.validate().is_ok()));
        assert_eq!(all.iter().filter(|t| t.has_cycle3()).count(), 2);
    }

    #[test]
    fn shape_errors() {
        assert!(Tournament::from_matrix(ElementSet::range(2), vec![false; 3]).is_err());
        assert!(Tournament::from_rows(ElementSet::range(2), &[vec![false, true]]).is_err());
    }
}
