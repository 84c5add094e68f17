use anyhow::{anyhow, Context};
use prefrank::bench::{run_scaling, Cell, TournamentKind};
use prefrank::exact::{enumerate_distribution, ExactConfig};
use prefrank::io::GroundTruthDoc;
use prefrank::loss::{auc, loss_bipartite, loss_pref};
use prefrank::qsrank::derive_seed;
use prefrank::{
    load_tournament, ElementId, GroundTruth, Normalizer, QuickSort, RandomSource, Ranking, Rational, Scalar,
};
use serde_json::json;

use crate::fail::{Fail, Outcome};
use crate::report::{read_input, Limits, Output, Report};
use crate::{BenchArgs, EvalArgs, NormalizerArg, RankArgs, ReportItem};

pub fn normalizer(arg: NormalizerArg) -> Normalizer<Rational> {
    match arg {
        NormalizerArg::Binomial => Normalizer::Binomial,
        NormalizerArg::MixedPairs => Normalizer::MixedPairs,
    }
}

pub fn rank(a: &RankArgs, top: bool, limits: Limits) -> Outcome<(Output, Vec<String>)> {
    let input = read_input(&a.input)?;
    let h = load_tournament(&input.text).with_context(|| format!("loading {}", a.input.display()))?;
    let n = h.len();
    let k = match (top, a.k) {
        (true, None) => return Err(Fail::Validation(anyhow!("topk needs --k"))),
        (_, Some(k)) if k == 0 || k > n => {
            return Err(Fail::Validation(anyhow!("--k must be in 1..={n}, got {k}")));
        }
        (_, Some(k)) => k,
        (false, None) => n,
    };
    let sorter = QuickSort {
        trace: false,
        fallback: a.fallback,
    };
    let run = |seed: u64| sorter.run(&h, k, &mut RandomSource::new(seed));
    let first = run(a.seed);
    let mut counts = vec![first.comparisons];
    counts.extend((1..a.trials).map(|t| run(derive_seed(a.seed, t)).comparisons));
    let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;

    let ids: Vec<ElementId> = first.order[..k].iter().map(|&i| h.elements().id(i)).collect();
    let mut lines: Vec<String> = ids.iter().map(|id| id.to_string()).collect();
    if a.report == Some(ReportItem::Comparisons) {
        lines.push(format!("comparisons: {}", first.comparisons));
    }
    let report = Report {
        command: if top { "topk" } else { "rank" },
        seed: a.seed,
        limits,
        inputs: vec![input.digest],
        result: json!({
            "n": n,
            "k": k,
            "fallback": a.fallback,
            "ranking": ids.iter().map(|e| e.0).collect::<Vec<_>>(),
            "comparisons": first.comparisons,
            "trials": a.trials,
            "mean_comparisons": mean,
            "min_comparisons": counts.iter().min(),
            "max_comparisons": counts.iter().max(),
        }),
    };
    Ok((
        Output {
            lines,
            report,
            violation: None,
        },
        Vec::new(),
    ))
}

fn weight_kind(truth: &GroundTruth<Rational>) -> &'static str {
    match truth {
        GroundTruth::Ranking { weight, .. } => weight.kind_name(),
        GroundTruth::Partition(_) => "partition",
    }
}

/// Loss of any relation against `truth` under `norm`.
fn loss_of<X: prefrank::PairRelation>(
    x: &X,
    truth: &GroundTruth<Rational>,
    norm: &Normalizer<Rational>,
) -> Outcome<Rational> {
    Ok(match truth {
        GroundTruth::Partition(tau) => loss_bipartite(x, tau, norm.clone())?.value,
        GroundTruth::Ranking { sigma_star, weight } => {
            if !matches!(norm, Normalizer::Binomial) {
                return Err(Fail::Validation(anyhow!(
                    "the mixed-pairs normalizer applies to bipartite truths only"
                )));
            }
            loss_pref(x, sigma_star, weight)?.value
        }
    })
}

pub fn eval(a: &EvalArgs, limits: Limits) -> Outcome<(Output, Vec<String>)> {
    let input = read_input(&a.input)?;
    let h = load_tournament(&input.text).with_context(|| format!("loading {}", a.input.display()))?;
    let truth_in = read_input(&a.truth)?;
    let doc: GroundTruthDoc =
        serde_json::from_str(&truth_in.text).with_context(|| format!("parsing {}", a.truth.display()))?;
    let truth = doc
        .build::<Rational>(Some(h.elements()))
        .with_context(|| format!("loading {}", a.truth.display()))?;
    if !truth.elements().same_members(h.elements()) {
        return Err(Fail::Validation(anyhow!("truth and tournament have different elements")));
    }
    let h = h.restrict(truth.elements())?;
    let norm = normalizer(a.normalizer);

    let mut extra = serde_json::Map::new();
    let (subject, loss) = if let Some(ids) = &a.ranking {
        let ids: Vec<ElementId> = ids.iter().map(|&i| ElementId(i)).collect();
        let r = Ranking::from_ids(h.elements().clone(), &ids).context("--ranking")?;
        if let GroundTruth::Partition(tau) = &truth {
            if let Ok(v) = auc::<Rational>(&r, tau) {
                extra.insert("auc".into(), json!(v.to_string()));
            }
        }
        ("ranking", loss_of(&r, &truth, &norm)?)
    } else if a.expected {
        let cfg = ExactConfig {
            max_n: limits.exact_max_n,
        };
        let dist = enumerate_distribution::<Rational, _>(&h, &cfg)?;
        ("quicksort-expected", dist.expect(|r| loss_of(r, &truth, &norm))?)
    } else {
        ("preference", loss_of(&h, &truth, &norm)?)
    };
    let mut result = json!({
        "subject": subject,
        "loss": loss.to_string(),
        "loss_f64": Scalar::to_f64(&loss),
        "normalizer": norm.name(),
        "n": h.len(),
        "weight_kind": weight_kind(&truth),
    });
    result.as_object_mut().expect("object").extend(extra);
    let report = Report {
        command: "eval",
        seed: 0,
        limits,
        inputs: vec![input.digest, truth_in.digest],
        result,
    };
    Ok((
        Output {
            lines: vec![format!("loss: {loss}")],
            report,
            violation: None,
        },
        Vec::new(),
    ))
}

fn parse_kind(s: &str) -> Outcome<TournamentKind> {
    match s.split_once(':') {
        None if s == "uniform" => Ok(TournamentKind::Uniform),
        None if s == "transitive" => Ok(TournamentKind::Transitive),
        Some(("planted", d)) => {
            let density: f64 = d.parse().map_err(|_| anyhow!("bad density `{d}`"))?;
            Ok(TournamentKind::PlantedCycle { density })
        }
        _ => Err(Fail::Validation(anyhow!(
            "--kind must be uniform, transitive or planted:<density>, got `{s}`"
        ))),
    }
}

fn parse_cell(s: &str, kind: TournamentKind) -> Outcome<Cell> {
    let bad = || Fail::Validation(anyhow!("cell `{s}` is not `n` or `n:k`"));
    let (n, k) = match s.split_once(':') {
        None => (s.trim().parse().map_err(|_| bad())?, None),
        Some((n, k)) => (
            n.trim().parse().map_err(|_| bad())?,
            Some(k.trim().parse().map_err(|_| bad())?),
        ),
    };
    Ok(Cell { n, k, kind })
}

pub fn bench(a: &BenchArgs, limits: Limits) -> Outcome<(Output, Vec<String>)> {
    let kind = parse_kind(&a.kind)?;
    let cells = a
        .cells
        .iter()
        .map(|c| parse_cell(c, kind))
        .collect::<Outcome<Vec<_>>>()?;
    // the generator's own check, surfaced before any work is done
    for c in &cells {
        prefrank::bench::generate_tournament(kind, c.n.max(1), 0)?;
    }
    let report = run_scaling(&cells, a.trials, a.seed, Some(limits.max_comparisons))?;
    let rows: Vec<_> = report
        .rows
        .iter()
        .map(|r| {
            json!({
                "n": r.n, "k": r.k, "kind": r.kind, "trials": r.trials,
                "mean": r.mean, "stddev": r.stddev,
            })
        })
        .collect();
    let timing = report
        .rows
        .iter()
        .map(|r| {
            let k = r.k.map(|k| format!(":{k}")).unwrap_or_default();
            format!("cell[{}{}]={:.3}s", r.n, k, r.wall_seconds)
        })
        .collect();
    let lines = report.to_csv().lines().map(String::from).collect();
    let out = Output {
        lines,
        report: Report {
            command: "bench",
            seed: a.seed,
            limits,
            inputs: Vec::new(),
            result: json!({
                "rows": rows,
                "full_fit": report.full_fit,
                "topk_fit": report.topk_fit,
            }),
        },
        violation: None,
    };
    Ok((out, timing))
}
