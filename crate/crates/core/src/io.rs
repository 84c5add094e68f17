//! Text and JSON formats for tournaments, ground truths and distributions.
//!
//! The `.trn` text format is a header line `n <count>` followed by `n` rows
//! of the 0/1 preference matrix (`M[i][j] = 1` when element `i` is preferred
//! over `j`). Row entries may be separated by whitespace or written as one
//! run of digits. Blank lines and lines starting with `#` are ignored.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::element::{ElementId, ElementSet};
use crate::error::CoreError;
use crate::loss::GroundTruth;
use crate::oracle::{GroundTruthDistribution, OracleError};
use crate::partition::Partition;
use crate::ranking::Ranking;
use crate::scalar::{from_rational, parse_rational, Scalar};
use crate::tournament::{Tournament, TournamentReport};
use crate::weight::WeightFunction;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("invalid tournament: {0}")]
    Invalid(TournamentReport),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn syntax(line: usize, message: impl Into<String>) -> IoError {
    IoError::Syntax {
        line,
        message: message.into(),
    }
}

fn field(name: &str, message: impl Into<String>) -> IoError {
    IoError::Field {
        field: name.into(),
        message: message.into(),
    }
}

fn parse_row(text: &str, line: usize) -> Result<Vec<bool>, IoError> {
    let cells: Vec<&str> = if text.contains(char::is_whitespace) {
        text.split_whitespace().collect()
    } else {
        text.split_terminator("").skip(1).collect()
    };
    cells
        .iter()
        .enumerate()
        .map(|(col, c)| match *c {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(syntax(line, format!("column {}: expected 0 or 1, found `{other}`", col + 1))),
        })
        .collect()
}

/// Parse a `.trn` document. Elements are `0..n`; the matrix must have a
/// zero diagonal and exactly one 1 per off-diagonal pair.
pub fn parse_trn(text: &str) -> Result<Tournament, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| syntax(1, "missing `n <count>` header"))?;
    let n: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["n", count] => count
            .parse()
            .map_err(|_| syntax(hline, format!("bad element count `{count}`")))?,
        _ => return Err(syntax(hline, format!("expected `n <count>`, found `{header}`"))),
    };
    let mut rows = Vec::with_capacity(n);
    let mut last = hline;
    for (line, text) in lines {
        if rows.len() == n {
            return Err(syntax(line, format!("more than {n} matrix rows")));
        }
        let row = parse_row(text, line)?;
        if row.len() != n {
            return Err(syntax(line, format!("expected {n} entries, found {}", row.len())));
        }
        if row[rows.len()] {
            return Err(syntax(line, format!("diagonal entry ({0},{0}) must be 0", rows.len())));
        }
        rows.push(row);
        last = line;
    }
    if rows.len() != n {
        return Err(syntax(last, format!("expected {n} matrix rows, found {}", rows.len())));
    }
    let t = Tournament::from_rows(ElementSet::range(n), &rows)?;
    let report = t.validate();
    if !report.is_ok() {
        return Err(IoError::Invalid(report));
    }
    Ok(t)
}

/// Render a tournament as `.trn` text. Element ids are not recorded; the
/// file describes indices `0..n`.
pub fn write_trn(t: &Tournament) -> String {
    let n = t.len();
    let mut s = format!("n {n}\n");
    for i in 0..n {
        let row: Vec<&str> = (0..n).map(|j| if t.prefers(i, j) { "1" } else { "0" }).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TournamentDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<u32>>,
    /// Row-major 0/1 matrix.
    pub prefers: Vec<Vec<u8>>,
}

fn element_set(ids: Option<&Vec<u32>>, n: usize, name: &str) -> Result<ElementSet, IoError> {
    match ids {
        None => Ok(ElementSet::range(n)),
        Some(ids) => {
            if ids.len() != n {
                return Err(field(name, format!("{} ids for {n} entries", ids.len())));
            }
            Ok(ElementSet::new(ids.iter().map(|&i| ElementId(i)).collect())?)
        }
    }
}

impl TournamentDoc {
    pub fn build(&self) -> Result<Tournament, IoError> {
        let n = self.prefers.len();
        let elements = element_set(self.elements.as_ref(), n, "elements")?;
        let mut rows = Vec::with_capacity(n);
        for (i, r) in self.prefers.iter().enumerate() {
            if r.len() != n {
                return Err(field("prefers", format!("row {i} has {} entries, expected {n}", r.len())));
            }
            let row = r
                .iter()
                .map(|&b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    _ => Err(field("prefers", format!("row {i}: entry {b} is not 0 or 1"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        let t = Tournament::from_rows(elements, &rows)?;
        let report = t.validate();
        if !report.is_ok() {
            return Err(IoError::Invalid(report));
        }
        Ok(t)
    }

    pub fn from_tournament(t: &Tournament) -> Self {
        let n = t.len();
        Self {
            elements: Some(t.elements().ids().iter().map(|e| e.0).collect()),
            prefers: (0..n)
                .map(|i| (0..n).map(|j| t.prefers(i, j) as u8).collect())
                .collect(),
        }
    }
}

/// A tournament from `.trn` text or a JSON [`TournamentDoc`], chosen by the
/// first non-blank character.
pub fn load_tournament(text: &str) -> Result<Tournament, IoError> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str::<TournamentDoc>(text)?.build()
    } else {
        parse_trn(text)
    }
}

/// Weight functions with rational entries written as strings (`"1/2"`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightDoc {
    Constant,
    TopK { k: usize },
    Bipartite { k: usize },
    Score { scores: Vec<String> },
    Table { entries: Vec<Vec<String>> },
}

fn rational(s: &str, name: &str) -> Result<BigRational, IoError> {
    parse_rational(s).ok_or_else(|| field(name, format!("`{s}` is not a rational number")))
}

impl WeightDoc {
    pub fn build<T: Scalar>(&self, n: usize) -> Result<WeightFunction<T>, IoError> {
        let w = match self {
            WeightDoc::Constant => WeightFunction::constant(n),
            WeightDoc::TopK { k } => WeightFunction::top_k(n, *k)?,
            WeightDoc::Bipartite { k } => WeightFunction::bipartite(n, *k)?,
            WeightDoc::Score { scores } => {
                if scores.len() != n {
                    return Err(field("weight.scores", format!("{} scores for n = {n}", scores.len())));
                }
                let s = scores
                    .iter()
                    .map(|x| rational(x, "weight.scores").map(|q| from_rational(&q)))
                    .collect::<Result<_, _>>()?;
                WeightFunction::score(s)?
            }
            WeightDoc::Table { entries } => {
                if entries.len() != n || entries.iter().any(|r| r.len() != n) {
                    return Err(field("weight.entries", format!("table must be {n}×{n}")));
                }
                let flat = entries
                    .iter()
                    .flatten()
                    .map(|x| rational(x, "weight.entries").map(|q| from_rational(&q)))
                    .collect::<Result<_, _>>()?;
                WeightFunction::table(n, flat)?
            }
        };
        Ok(w)
    }
}

/// A ground truth: `labels` for a partition, or `ranking` (ids, best first)
/// with a `weight`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruthDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightDoc>,
}

impl GroundTruthDoc {
    /// `default_elements` applies when the document omits `elements`.
    pub fn build<T: Scalar>(&self, default_elements: Option<&ElementSet>) -> Result<GroundTruth<T>, IoError> {
        let n = match (&self.labels, &self.ranking) {
            (Some(l), None) => l.len(),
            (None, Some(r)) => r.len(),
            _ => return Err(field("labels", "exactly one of `labels` and `ranking` is required")),
        };
        let elements = match (&self.elements, default_elements) {
            (None, Some(set)) if set.len() == n => set.clone(),
            (None, Some(set)) => {
                return Err(field("elements", format!("{} elements for {n} entries", set.len())));
            }
            (ids, _) => element_set(ids.as_ref(), n, "elements")?,
        };
        if let Some(labels) = &self.labels {
            if self.weight.is_some() {
                return Err(field("weight", "a partition takes no weight"));
            }
            return Ok(GroundTruth::Partition(Partition::new(elements, labels.clone())?));
        }
        let ids: Vec<ElementId> = self.ranking.iter().flatten().map(|&i| ElementId(i)).collect();
        let sigma_star = Ranking::from_ids(elements, &ids)?;
        let weight = self.weight.clone().unwrap_or(WeightDoc::Constant).build(n)?;
        Ok(GroundTruth::Ranking { sigma_star, weight })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportEntryDoc {
    #[serde(flatten)]
    pub truth: GroundTruthDoc,
    /// Probability as a rational string.
    pub prob: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionDoc {
    pub elements: Vec<u32>,
    pub support: Vec<SupportEntryDoc>,
}

impl DistributionDoc {
    pub fn build<T: Scalar>(&self) -> Result<GroundTruthDistribution<T>, IoError> {
        let universe = element_set(Some(&self.elements), self.elements.len(), "elements")?;
        let support = self
            .support
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let name = format!("support[{i}].prob");
                let p = rational(&e.prob, &name)?;
                let truth = e.truth.build::<T>(Some(&universe)).map_err(|err| match err {
                    IoError::Field { field, message } => IoError::Field {
                        field: format!("support[{i}].{field}"),
                        message,
                    },
                    other => other,
                })?;
                Ok((truth, from_rational(&p)))
            })
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(GroundTruthDistribution::new(universe, support)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tournament::TournamentViolation;

    type Q = BigRational;

    #[test]
    fn trn_round_trip() {
        let text = "# a 3-cycle\nn 3\n0 1 0\n0 0 1\n1 0 0\n";
        let t = parse_trn(text).unwrap();
        assert!(t.prefers(0, 1) && t.prefers(1, 2) && t.prefers(2, 0));
        assert_eq!(parse_trn(&write_trn(&t)).unwrap(), t);
        assert_eq!(parse_trn("n 3\n010\n001\n100").unwrap(), t);
    }

    #[test]
    fn trn_diagnostics() {
        let err = parse_trn("n 2\n0 1\n1 0\n").unwrap_err();
        match err {
            IoError::Invalid(r) => assert!(matches!(
                r.violations[0],
                TournamentViolation::Inconsistent { .. }
            )),
            e => panic!("{e}"),
        }
        assert!(matches!(parse_trn("n 2\n1 1\n0 0\n"), Err(IoError::Syntax { line: 2, .. })));
        assert!(matches!(parse_trn("n 2\n0 2\n0 0\n"), Err(IoError::Syntax { line: 2, .. })));
        assert!(matches!(parse_trn("n 2\n0 1\n"), Err(IoError::Syntax { line: 2, .. })));
        assert!(matches!(parse_trn("size 2\n"), Err(IoError::Syntax { line: 1, .. })));
        assert!(matches!(parse_trn("n 1\n0\n0\n"), Err(IoError::Syntax { line: 3, .. })));
    }

    #[test]
    fn json_tournament() {
        let t = load_tournament(r#"{"elements":[5,9],"prefers":[[0,0],[1,0]]}"#).unwrap();
        assert!(t.prefers(1, 0));
        assert_eq!(t.elements().ids(), &[ElementId(5), ElementId(9)]);
        let back = TournamentDoc::from_tournament(&t).build().unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn distribution_doc() {
        let text = r#"{
            "elements": [0, 1, 2],
            "support": [
                {"labels": [0, 1, 1], "prob": "1/3"},
                {"labels": [1, 0, 1], "prob": "2/3"}
            ]
        }"#;
        let d: DistributionDoc = serde_json::from_str(text).unwrap();
        let d = d.build::<Q>().unwrap();
        assert!(d.is_fixed_v() && d.is_bipartite());
        let bad = text.replace("2/3", "1/3");
        let d: DistributionDoc = serde_json::from_str(&bad).unwrap();
        assert!(matches!(d.build::<Q>(), Err(IoError::Oracle(OracleError::BadProbabilities(_)))));
    }

    #[test]
    fn ranking_truth_with_weight() {
        let doc: GroundTruthDoc =
            serde_json::from_str(r#"{"ranking":[2,0,1],"weight":{"kind":"score","scores":["1","1/2","0"]}}"#).unwrap();
        let GroundTruth::Ranking { sigma_star, weight } = doc.build::<Q>(None).unwrap() else {
            panic!("expected a ranking");
        };
        assert_eq!(sigma_star.order(), &[2, 0, 1]);
        assert_eq!(weight.at(0, 1), &Q::new(1.into(), 2.into()));
        let both: GroundTruthDoc = serde_json::from_str(r#"{"ranking":[0],"labels":[0]}"#).unwrap();
        assert!(matches!(both.build::<Q>(None), Err(IoError::Field { .. })));
    }
}
