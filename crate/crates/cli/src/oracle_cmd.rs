use std::path::PathBuf;

use anyhow::{anyhow, Context};
use prefrank::exact::ExactConfig;
use prefrank::io::DistributionDoc;
use prefrank::oracle::{
    check_pairwise_iia, f_negativity_sample, lower_bound_adversary, optimal_ranking, regret_class,
    regret_prime_class, regret_prime_rank, regret_rank, AdversaryCase, BruteForceConfig,
    GroundTruthDistribution, QuickSortProcedure, RegretValue,
};
use prefrank::{load_tournament, ElementId, PairTable, Ranking, Rational, Scalar, Tournament};
use serde_json::{json, Value};

use crate::commands::normalizer;
use crate::fail::{Fail, Outcome};
use crate::report::{read_input, Input, Limits, Output, Report};
use crate::{NormalizerArg, OracleArgs, OracleMode};

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Outcome<&'a PathBuf> {
    p.as_ref()
        .ok_or_else(|| Fail::Validation(anyhow!("this mode needs {flag}")))
}

fn tournament(path: &PathBuf) -> Outcome<(Tournament, Input)> {
    let input = read_input(path)?;
    let h = load_tournament(&input.text).with_context(|| format!("loading {}", path.display()))?;
    Ok((h, input))
}

fn distribution(path: &PathBuf) -> Outcome<(GroundTruthDistribution<Rational>, Input)> {
    let input = read_input(path)?;
    let doc: DistributionDoc =
        serde_json::from_str(&input.text).with_context(|| format!("parsing {}", path.display()))?;
    let d = doc.build().with_context(|| format!("loading {}", path.display()))?;
    Ok((d, input))
}

fn regret_json(r: &RegretValue<Rational>) -> Value {
    json!({
        "expected": r.expected.to_string(),
        "optimum": r.optimum.to_string(),
        "regret": r.regret.to_string(),
        "regret_f64": Scalar::to_f64(&r.regret),
    })
}

struct Done {
    lines: Vec<String>,
    seed: u64,
    inputs: Vec<Input>,
    result: Value,
    violation: Option<String>,
}

fn mfas(a: &OracleArgs, limits: Limits) -> Outcome<Done> {
    let (h, input) = tournament(need(&a.input, "--input")?)?;
    let cfg = BruteForceConfig {
        max_n: limits.brute_force_max_n,
    };
    let ind = PairTable::<Rational>::indicator(&h);
    let (r, loss) = optimal_ranking(h.elements(), &ind, None, &cfg)?;
    let n = h.len();
    let back_arcs = loss.clone() * Rational::from_integer(((n * n.saturating_sub(1) / 2) as i64).into());
    let ids: Vec<u32> = r.ids().iter().map(|e| e.0).collect();
    let mut lines: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    lines.push(format!("loss: {loss}"));
    Ok(Done {
        lines,
        seed: a.seed,
        inputs: vec![input],
        result: json!({
            "ranking": ids,
            "loss": loss.to_string(),
            "back_arcs": back_arcs.to_string(),
        }),
        violation: None,
    })
}

fn regret(a: &OracleArgs, limits: Limits) -> Outcome<Done> {
    let (h, h_in) = tournament(need(&a.input, "--input")?)?;
    let (d, d_in) = distribution(need(&a.dist, "--dist")?)?;
    let norm = normalizer(a.normalizer);
    let bf = BruteForceConfig {
        max_n: limits.brute_force_max_n,
    };
    let qs = QuickSortProcedure {
        cfg: ExactConfig {
            max_n: limits.exact_max_n,
        },
    };
    let rank = regret_rank(&qs, &h, &d, &norm, &bf)?;
    let class = regret_class(&h, &d, &norm)?;
    let rank_p = regret_prime_rank(&qs, &h, &d, &norm, &bf)?;
    let class_p = regret_prime_class(&h, &d, &norm)?;
    // the bound is claimed only for fixed-V bipartite truths, binomially normalized
    let covered = d.is_fixed_v() && d.is_bipartite() && a.normalizer == NormalizerArg::Binomial;
    let holds = rank.regret <= class.regret;
    let violation = (covered && !holds).then(|| {
        format!(
            "QuickSort rank regret {} exceeds class regret {}",
            rank.regret, class.regret
        )
    });
    Ok(Done {
        lines: vec![
            format!("regret_rank(QuickSort): {}", rank.regret),
            format!("regret_class(h): {}", class.regret),
        ],
        seed: a.seed,
        inputs: vec![h_in, d_in],
        result: json!({
            "normalizer": norm.name(),
            "fixed_v": d.is_fixed_v(),
            "bound_applies": covered,
            "bound_holds": holds,
            "regret_rank": regret_json(&rank),
            "regret_class": regret_json(&class),
            "regret_prime_rank": regret_json(&rank_p),
            "regret_prime_class": regret_json(&class_p),
        }),
        violation,
    })
}

fn iia(a: &OracleArgs) -> Outcome<Done> {
    let (d, input) = distribution(need(&a.dist, "--dist")?)?;
    let r = check_pairwise_iia(&d);
    Ok(Done {
        lines: vec![format!(
            "pairwise IIA {}: {} comparisons, {} violations",
            if r.holds() { "holds" } else { "fails" },
            r.comparisons,
            r.violations.len()
        )],
        seed: a.seed,
        inputs: vec![input],
        result: json!({ "holds": r.holds(), "report": r }),
        violation: None,
    })
}

fn fneg(a: &OracleArgs) -> Outcome<Done> {
    let (samples, max_f, bad, outside) = if a.float {
        let r = f_negativity_sample::<f64>(a.trials, a.seed);
        (r.samples, r.max_f.to_string(), r.violations.len(), r.outside)
    } else {
        let r = f_negativity_sample::<Rational>(a.trials, a.seed);
        (r.samples, r.max_f.to_string(), r.violations.len(), r.outside)
    };
    Ok(Done {
        lines: vec![format!("samples: {samples}, max F: {max_f}, violations: {bad}")],
        seed: a.seed,
        inputs: Vec::new(),
        result: json!({
            "arithmetic": if a.float { "f64" } else { "rational" },
            "samples": samples,
            "max_f": max_f,
            "violations": bad,
            "outside_polytope": outside,
        }),
        violation: (bad > 0 || outside > 0).then(|| format!("{bad} samples with F > 0, {outside} outside the polytope")),
    })
}

fn lowerbound(a: &OracleArgs) -> Outcome<Done> {
    let ids: Vec<ElementId> = a.order.iter().map(|&i| ElementId(i)).collect();
    let check = Ranking::from_ids(prefrank::ElementSet::range(3), &ids).context("--order must permute 0,1,2")?;
    let o = lower_bound_adversary(&move |h: &Tournament| {
        Ranking::from_ids(h.elements().clone(), &check.ids()).expect("validated above")
    })?;
    let two = Rational::from_integer(2.into());
    let case = match o.case {
        AdversaryCase::FollowsCycle => "follows-cycle",
        AdversaryCase::AgainstCycle => "against-cycle",
    };
    Ok(Done {
        lines: vec![
            format!("case: {case}"),
            format!("regret_rank: {}, regret_class: {}, ratio: {}", o.regret_rank, o.regret_class, o.ratio),
        ],
        seed: a.seed,
        inputs: Vec::new(),
        result: json!({
            "output": o.output.ids().iter().map(|e| e.0).collect::<Vec<_>>(),
            "labels": o.partition.labels(),
            "case": case,
            "regret_rank": o.regret_rank.to_string(),
            "regret_class": o.regret_class.to_string(),
            "ratio": o.ratio.to_string(),
        }),
        violation: (o.ratio < two).then(|| format!("ratio {} below 2", o.ratio)),
    })
}

pub fn oracle(a: &OracleArgs, limits: Limits) -> Outcome<(Output, Vec<String>)> {
    let (mode, done) = match a.mode {
        OracleMode::Mfas => ("mfas", mfas(a, limits)?),
        OracleMode::Regret => ("regret", regret(a, limits)?),
        OracleMode::Iia => ("iia", iia(a)?),
        OracleMode::Fneg => ("fneg", fneg(a)?),
        OracleMode::Lowerbound => ("lowerbound", lowerbound(a)?),
    };
    let mut result = json!({ "mode": mode });
    result
        .as_object_mut()
        .expect("object")
        .extend(done.result.as_object().cloned().unwrap_or_default());
    let out = Output {
        lines: done.lines,
        report: Report {
            command: "oracle",
            seed: done.seed,
            limits,
            inputs: done.inputs.into_iter().map(|i| i.digest).collect(),
            result,
        },
        violation: done.violation,
    };
    Ok((out, Vec::new()))
}
