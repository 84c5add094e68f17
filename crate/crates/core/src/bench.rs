//! Comparison-count scaling experiments on large implicit tournaments.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::element::{ElementSet, PairRelation};
use crate::qsrank::{derive_seed, mix64, QuickSort, RandomSource};
use crate::tournament::Tournament;

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("density {0} outside [0, 1]")]
    BadDensity(f64),
    #[error("n must be at least 1")]
    EmptyTournament,
    #[error("k = {k} out of range for n = {n}")]
    BadK { k: usize, n: usize },
    #[error("at least 3 trials per cell are required (got {0})")]
    TooFewTrials(usize),
    #[error("comparison budget of {cap} exceeded")]
    ComparisonCap { cap: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TournamentKind {
    Uniform,
    Transitive,
    PlantedCycle { density: f64 },
}

impl TournamentKind {
    pub fn name(&self) -> String {
        match self {
            TournamentKind::Uniform => "uniform".into(),
            TournamentKind::Transitive => "transitive".into(),
            TournamentKind::PlantedCycle { density } => format!("planted-cycle:{density}"),
        }
    }
}

/// A tournament defined by a seeded rule instead of a stored matrix:
/// each pair's orientation is a hash of (seed, pair), so memory is O(n).
#[derive(Clone, Debug)]
pub struct ImplicitTournament {
    elements: ElementSet,
    kind: TournamentKind,
    seed: u64,
    /// rank[i] of element i in the base permutation (transitive kinds).
    rank: Vec<u32>,
    /// Pairs are reversed when their hash falls below this threshold.
    flip_below: u64,
}

fn pair_hash(seed: u64, i: usize, j: usize) -> u64 {
    mix64(seed ^ mix64(((i as u64) << 32) | j as u64))
}

impl ImplicitTournament {
    pub fn kind(&self) -> TournamentKind {
        self.kind
    }

    /// The generating order (best first) for transitive kinds.
    pub fn base_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.rank.len()).collect();
        order.sort_by_key(|&i| self.rank[i]);
        order
    }

    pub fn materialize(&self) -> Tournament {
        Tournament::from_upper(self.elements.clone(), |i, j| self.holds(i, j))
    }
}

impl PairRelation for ImplicitTournament {
    fn elements(&self) -> &ElementSet {
        &self.elements
    }

    #[inline]
    fn holds(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (a, b, swapped) = if i < j { (i, j, false) } else { (j, i, true) };
        let forward = match self.kind {
            TournamentKind::Uniform => pair_hash(self.seed, a, b) & 1 == 1,
            TournamentKind::Transitive => self.rank[a] < self.rank[b],
            TournamentKind::PlantedCycle { .. } => {
                (self.rank[a] < self.rank[b]) != (pair_hash(self.seed, a, b) < self.flip_below)
            }
        };
        forward != swapped
    }
}

pub fn generate_tournament(kind: TournamentKind, n: usize, seed: u64) -> Result<ImplicitTournament, BenchError> {
    if n == 0 {
        return Err(BenchError::EmptyTournament);
    }
    let mut flip_below = 0;
    if let TournamentKind::PlantedCycle { density } = kind {
        if !(0.0..=1.0).contains(&density) {
            return Err(BenchError::BadDensity(density));
        }
        flip_below = if density >= 1.0 {
            u64::MAX
        } else {
            (density * 2f64.powi(64)) as u64
        };
    }
    let rank = match kind {
        TournamentKind::Uniform => Vec::new(),
        _ => {
            let mut perm: Vec<u32> = (0..n as u32).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, 0)));
            perm
        }
    };
    Ok(ImplicitTournament {
        elements: ElementSet::range(n),
        kind,
        seed: derive_seed(seed, 1),
        rank,
        flip_below,
    })
}

/// One (n, k) cell of a scaling grid; `k = None` is a full sort.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub n: usize,
    pub k: Option<usize>,
    pub kind: TournamentKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub n: usize,
    pub k: Option<usize>,
    pub kind: String,
    pub trials: usize,
    pub mean: f64,
    pub stddev: f64,
    pub wall_seconds: f64,
    /// Per-trial comparison counts, in trial order.
    pub samples: Vec<u64>,
}

/// Least-squares fit of `model` with its per-row residuals.
#[derive(Clone, Debug, Serialize)]
pub struct Fit {
    pub model: &'static str,
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub seed: u64,
    pub rows: Vec<Row>,
    /// a·n ln n + b over full-sort rows.
    pub full_fit: Option<Fit>,
    /// c₁·n + c₂·k ln k over top-k rows.
    pub topk_fit: Option<Fit>,
}

/// Ordinary least squares on two regressors.
pub fn fit2(x1: &[f64], x2: &[f64], y: &[f64]) -> Option<[f64; 2]> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let (s11, s12, s22) = (dot(x1, x1), dot(x1, x2), dot(x2, x2));
    let (t1, t2) = (dot(x1, y), dot(x2, y));
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-12 * s11.abs().max(s22.abs()).max(1.0).powi(2) {
        return None;
    }
    Some([(t1 * s22 - t2 * s12) / det, (t2 * s11 - t1 * s12) / det])
}

fn nlogn(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

fn make_fit(model: &'static str, x1: Vec<f64>, x2: Vec<f64>, y: Vec<f64>) -> Option<Fit> {
    let c = fit2(&x1, &x2, &y)?;
    let residuals = (0..y.len()).map(|i| y[i] - c[0] * x1[i] - c[1] * x2[i]).collect();
    Some(Fit {
        model,
        coefficients: c.to_vec(),
        residuals,
    })
}

/// Trial `t` of a cell uses tournament and pivot seeds derived from
/// (seed, n, t) only, so cells that differ in k share their instances.
pub fn trial_seed(seed: u64, n: usize, trial: usize) -> u64 {
    derive_seed(derive_seed(seed, n as u64), trial as u64)
}

/// Comparisons made by one trial of a cell.
pub fn run_trial(cell: &Cell, seed: u64, trial: usize) -> Result<u64, BenchError> {
    let s = trial_seed(seed, cell.n, trial);
    let h = generate_tournament(cell.kind, cell.n, s)?;
    let k = cell.k.unwrap_or(cell.n);
    let mut rng = RandomSource::new(derive_seed(s, 2));
    Ok(QuickSort::default().run(&h, k, &mut rng).comparisons)
}

pub fn run_scaling(cells: &[Cell], trials: usize, seed: u64, max_comparisons: Option<u64>) -> Result<ScalingReport, BenchError> {
    if trials < 3 {
        return Err(BenchError::TooFewTrials(trials));
    }
    for c in cells {
        if c.n == 0 {
            return Err(BenchError::EmptyTournament);
        }
        if let Some(k) = c.k {
            if k == 0 || k > c.n {
                return Err(BenchError::BadK { k, n: c.n });
            }
        }
    }
    let spent = AtomicU64::new(0);
    let cap = max_comparisons.unwrap_or(u64::MAX);
    let rows: Vec<Row> = cells
        .par_iter()
        .map(|cell| {
            let start = Instant::now();
            let mut samples = Vec::with_capacity(trials);
            for t in 0..trials {
                let c = run_trial(cell, seed, t)?;
                if spent.fetch_add(c, Ordering::Relaxed).saturating_add(c) > cap {
                    return Err(BenchError::ComparisonCap { cap });
                }
                samples.push(c);
            }
            let m = trials as f64;
            let mean = samples.iter().sum::<u64>() as f64 / m;
            let var = samples.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (m - 1.0);
            Ok(Row {
                n: cell.n,
                k: cell.k,
                kind: cell.kind.name(),
                trials,
                mean,
                stddev: var.sqrt(),
                wall_seconds: start.elapsed().as_secs_f64(),
                samples,
            })
        })
        .collect::<Result<_, _>>()?;

    let full: Vec<&Row> = rows.iter().filter(|r| r.k.is_none()).collect();
    let full_fit = make_fit(
        "a*n*ln(n) + b",
        full.iter().map(|r| nlogn(r.n as f64)).collect(),
        vec![1.0; full.len()],
        full.iter().map(|r| r.mean).collect(),
    );
    let top: Vec<&Row> = rows.iter().filter(|r| r.k.is_some()).collect();
    let topk_fit = make_fit(
        "c1*n + c2*k*ln(k)",
        top.iter().map(|r| r.n as f64).collect(),
        top.iter().map(|r| nlogn(r.k.unwrap_or(0) as f64)).collect(),
        top.iter().map(|r| r.mean).collect(),
    );
    Ok(ScalingReport {
        seed,
        rows,
        full_fit,
        topk_fit,
    })
}

impl ScalingReport {
    /// Comma-separated table, one row per cell.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,k,kind,trials,mean,stddev\n");
        for r in &self.rows {
            let k = r.k.map(|k| k.to_string()).unwrap_or_default();
            s.push_str(&format!("{},{},{},{},{:.3},{:.3}\n", r.n, k, r.kind, r.trials, r.mean, r.stddev));
        }
        s
    }
}
