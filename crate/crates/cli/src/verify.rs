use anyhow::anyhow;
use prefrank::exact::{beta_gamma_violations, decomposition_check, expected_loss_exact, ExactConfig};
use prefrank::loss::{loss_bipartite, loss_pref};
use prefrank::qsrank::derive_seed;
use prefrank::{ElementSet, GroundTruth, Normalizer, PairTable, Partition, Ranking, Rational, Tournament, WeightFunction};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::fail::{Fail, Outcome};
use crate::report::{Limits, Output, Report};
use crate::{Check, VerifyArgs};

/// (identities checked, violations) for one tournament.
type Tally = (u64, u64);

fn weights(n: usize) -> Vec<WeightFunction<Rational>> {
    let mut w = vec![WeightFunction::constant(n)];
    for k in 1..=n {
        w.push(WeightFunction::top_k(n, k).expect("k <= n"));
        w.push(WeightFunction::bipartite(n, k).expect("k <= n"));
    }
    w
}

fn rankings(n: usize) -> Vec<Ranking> {
    Ranking::enumerate_all(ElementSet::range(n)).collect()
}

fn random_truth(rng: &mut ChaCha8Rng, n: usize, bipartite: bool) -> GroundTruth<Rational> {
    if bipartite {
        let labels = (0..n).map(|_| rng.random_range(0..2)).collect();
        return GroundTruth::Partition(Partition::new(ElementSet::range(n), labels).expect("0/1 labels"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let sigma_star = Ranking::from_order(ElementSet::range(n), order).expect("permutation");
    let weight = match rng.random_range(0..4) {
        0 => WeightFunction::constant(n),
        1 => WeightFunction::top_k(n, rng.random_range(1..=n)).expect("k <= n"),
        2 => WeightFunction::bipartite(n, rng.random_range(1..=n)).expect("k <= n"),
        _ => WeightFunction::random_admissible(n, rng),
    };
    GroundTruth::Ranking { sigma_star, weight }
}

fn thm1(h: &Tournament, truths: &[GroundTruth<Rational>], cfg: &ExactConfig) -> Outcome<Tally> {
    let mut bad = 0;
    for t in truths {
        let GroundTruth::Ranking { sigma_star, weight } = t else {
            continue;
        };
        let lhs = expected_loss_exact(h, t, cfg)?;
        let rhs = loss_pref(h, sigma_star, weight)?.value * Rational::from_integer(2.into());
        bad += u64::from(lhs > rhs);
    }
    Ok((truths.len() as u64, bad))
}

fn thm2(h: &Tournament, truths: &[GroundTruth<Rational>], cfg: &ExactConfig) -> Outcome<Tally> {
    let mut bad = 0;
    for t in truths {
        let GroundTruth::Partition(tau) = t else {
            continue;
        };
        let lhs = expected_loss_exact(h, t, cfg)?;
        bad += u64::from(lhs != loss_bipartite::<Rational, _>(h, tau, Normalizer::Binomial)?.value);
    }
    Ok((truths.len() as u64, bad))
}

fn lemma1(h: &Tournament, truths: &[GroundTruth<Rational>], rng: &mut ChaCha8Rng, cfg: &ExactConfig) -> Outcome<Tally> {
    let n = h.len();
    let zero = Rational::from_integer(0.into());
    let ones = PairTable::from_fn(n, |u, v| Rational::from_integer(i64::from(u != v).into()));
    let random = PairTable::from_fn(n, |u, v| {
        if u == v {
            zero.clone()
        } else {
            Rational::new(rng.random_range(0..=20).into(), 7.into())
        }
    });
    let (mut count, mut bad) = (0, 0);
    for t in truths {
        let delta = t.delta();
        for z in [&ones, &random] {
            let r = decomposition_check(h, Some(z), Some(&delta), cfg)?;
            count += 2;
            bad += u64::from(!r.part1.is_some_and(|i| i.holds));
            bad += u64::from(!r.part2.is_some_and(|i| i.holds));
        }
    }
    Ok((count, bad))
}

fn beta_gamma(h: &Tournament, truths: &[GroundTruth<Rational>]) -> Tally {
    let n = h.len() as u64;
    let triples = if n < 3 { 0 } else { n * (n - 1) * (n - 2) / 6 };
    let mut bad = 0;
    for t in truths {
        bad += beta_gamma_violations(h, &t.delta()).len() as u64;
    }
    (triples * truths.len() as u64, bad)
}

fn check_one(
    check: Check,
    h: &Tournament,
    truths: &[GroundTruth<Rational>],
    seed: u64,
    cfg: &ExactConfig,
) -> Outcome<Tally> {
    match check {
        Check::Thm1 => thm1(h, truths, cfg),
        Check::Thm2Loss => thm2(h, truths, cfg),
        Check::Lemma1 => lemma1(h, truths, &mut ChaCha8Rng::seed_from_u64(seed), cfg),
        Check::BetaGamma => Ok(beta_gamma(h, truths)),
    }
}

fn exhaustive_truths(check: Check, n: usize) -> Vec<GroundTruth<Rational>> {
    match check {
        Check::Thm2Loss => Partition::enumerate_all(ElementSet::range(n))
            .map(GroundTruth::Partition)
            .collect(),
        Check::Lemma1 => {
            // one ranking truth per weight family, plus every partition
            let sigma = Ranking::identity(ElementSet::range(n));
            weights(n)
                .into_iter()
                .map(|weight| GroundTruth::Ranking {
                    sigma_star: sigma.clone(),
                    weight,
                })
                .chain(Partition::enumerate_all(ElementSet::range(n)).map(GroundTruth::Partition))
                .collect()
        }
        Check::Thm1 | Check::BetaGamma => {
            let ws = weights(n);
            rankings(n)
                .into_iter()
                .flat_map(|s| {
                    ws.iter().map(move |w| GroundTruth::Ranking {
                        sigma_star: s.clone(),
                        weight: w.clone(),
                    })
                })
                .collect()
        }
    }
}

fn check_name(c: Check) -> &'static str {
    match c {
        Check::Thm1 => "thm1",
        Check::Thm2Loss => "thm2-loss",
        Check::Lemma1 => "lemma1",
        Check::BetaGamma => "beta-gamma",
    }
}

pub fn verify(a: &VerifyArgs, limits: Limits) -> Outcome<(Output, Vec<String>)> {
    let cfg = ExactConfig {
        max_n: limits.exact_max_n,
    };
    let size = a.exhaustive.unwrap_or(a.n);
    if size < 2 {
        return Err(Fail::Validation(anyhow!("instances need at least 2 elements")));
    }
    if size > limits.exact_max_n {
        return Err(Fail::Limit(format!(
            "n = {size} exceeds the exact-mode limit {}",
            limits.exact_max_n
        )));
    }
    let tallies: Vec<Tally> = if let Some(max_n) = a.exhaustive {
        let mut jobs = Vec::new();
        for n in 2..=max_n {
            let truths = std::sync::Arc::new(exhaustive_truths(a.check, n));
            for h in Tournament::enumerate_all(ElementSet::range(n)) {
                jobs.push((h, truths.clone()));
            }
        }
        jobs.par_iter()
            .enumerate()
            .map(|(i, (h, truths))| check_one(a.check, h, truths, derive_seed(a.seed, i as u64), &cfg))
            .collect::<Outcome<_>>()?
    } else {
        let trials = a.random.expect("clap enforces one scope");
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(a.seed, t));
                let h = Tournament::from_upper(ElementSet::range(a.n), |_, _| rng.random_bool(0.5));
                let truth = random_truth(&mut rng, a.n, a.check == Check::Thm2Loss);
                check_one(a.check, &h, &[truth], rng.random(), &cfg)
            })
            .collect::<Outcome<_>>()?
    };
    let checked: u64 = tallies.iter().map(|t| t.0).sum();
    let violations: u64 = tallies.iter().map(|t| t.1).sum();
    let scope = match a.exhaustive {
        Some(n) => json!({"exhaustive": n}),
        None => json!({"random": a.random, "n": a.n}),
    };
    let out = Output {
        lines: vec![format!("identities checked: {checked}, violations: {violations}")],
        report: Report {
            command: "verify",
            seed: a.seed,
            limits,
            inputs: Vec::new(),
            result: json!({
                "check": check_name(a.check),
                "scope": scope,
                "tournaments": tallies.len(),
                "identities_checked": checked,
                "violations": violations,
            }),
        },
        violation: (violations > 0).then(|| format!("{violations} of {checked} {} checks failed", check_name(a.check))),
    };
    Ok((out, Vec::new()))
}
