use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const CYCLE3: &str = "n 3\n0 1 0\n0 0 1\n1 0 0\n";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_prefrank"));
    c.env_remove("PREFRANK_EXACT_MAX_N")
        .env_remove("PREFRANK_BRUTE_FORCE_MAX_N")
        .env_remove("PREFRANK_MAX_COMPARISONS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// The JSON footer of human-format output.
fn footer(o: &Output) -> Value {
    let out = stdout(o);
    let line = out
        .lines()
        .find_map(|l| l.strip_prefix("--- "))
        .expect("footer line");
    serde_json::from_str(line).unwrap()
}

#[test]
fn rank_prints_ids_and_footer() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "cycle3.trn", CYCLE3);
    let o = run(&["rank", "--input", s(&f), "--seed", "7", "--report", "comparisons"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let ids: Vec<&str> = out.lines().take(3).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(sorted, ["0", "1", "2"]);
    assert!(out.lines().any(|l| l.starts_with("comparisons: ")));
    let r = footer(&o);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["command"], "rank");
    // sha256 of the file contents
    assert_eq!(
        r["inputs"][0]["sha256"],
        "c4fc294966ec1c258b32b1680222e34f0c0e3684d5b630ca24d4c08baee0b5de"
    );
    assert!(r["result"]["comparisons"].as_u64().unwrap() >= 2);
}

#[test]
fn structured_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let mut text = String::from("n 12\n");
    for i in 0..12 {
        let row: Vec<&str> = (0..12)
            .map(|j| if i != j && (i + 2 * j) % 3 == 0 && i < j || i > j && (j + 2 * i) % 3 != 0 { "1" } else { "0" })
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    let f = write(&dir, "h.trn", &text);
    let args = ["rank", "--input", s(&f), "--seed", "99", "--trials", "5", "--format", "json"];
    let a = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["result"]["trials"], 5);
}

#[test]
fn topk_is_a_prefix_of_rank() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "cycle3.trn", CYCLE3);
    for seed in ["1", "2", "3", "11"] {
        let full = footer(&run(&["rank", "--input", s(&f), "--seed", seed]));
        for fallback in [false, true] {
            let mut args = vec!["topk", "--input", s(&f), "--seed", seed, "--k", "2"];
            if fallback {
                args.push("--fallback");
            }
            let top = footer(&run(&args));
            let want: Vec<Value> = full["result"]["ranking"].as_array().unwrap()[..2].to_vec();
            assert_eq!(top["result"]["ranking"].as_array().unwrap(), &want);
        }
    }
    let o = run(&["topk", "--input", s(&f)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_inputs_exit_1_with_diagnostics() {
    let dir = TempDir::new().unwrap();
    let both = write(&dir, "inconsistent.trn", "n 2\n0 1\n1 0\n");
    let o = run(&["rank", "--input", s(&both)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("pair {0,1}"), "{}", stderr(&o));

    let bad_cell = write(&dir, "bad.trn", "n 2\n0 1\n0 x\n");
    let o = run(&["rank", "--input", s(&bad_cell)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = run(&["rank", "--input", s(&dir.path().join("missing.trn"))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn verify_reports_counts() {
    let o = run(&["verify", "--check", "thm2-loss", "--exhaustive", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let line = out.lines().next().unwrap();
    assert!(line.starts_with("identities checked: ") && line.ends_with(", violations: 0"), "{line}");
    // tournament × partition pairs for n = 2, 3, 4
    assert_eq!(footer(&o)["result"]["identities_checked"], 2 * 4 + 8 * 8 + 64 * 16);

    for check in ["thm1", "lemma1", "beta-gamma"] {
        let o = run(&["verify", "--check", check, "--exhaustive", "3"]);
        assert_eq!(o.status.code(), Some(0), "{check}: {}", stderr(&o));
        let o = run(&["verify", "--check", check, "--random", "20", "--n", "5", "--seed", "3"]);
        assert_eq!(o.status.code(), Some(0), "{check}: {}", stderr(&o));
    }
}

#[test]
fn limits_come_from_flags_then_environment() {
    let o = run(&["verify", "--check", "thm1", "--exhaustive", "9"]);
    assert_eq!(o.status.code(), Some(3));
    let o = bin()
        .args(["verify", "--check", "thm2-loss", "--exhaustive", "4"])
        .env("PREFRANK_EXACT_MAX_N", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = bin()
        .args(["verify", "--check", "thm2-loss", "--exhaustive", "4", "--exact-max-n", "4"])
        .env("PREFRANK_EXACT_MAX_N", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(footer(&o)["limits"]["exact_max_n"], 4);
}

#[test]
fn eval_losses() {
    let dir = TempDir::new().unwrap();
    let h = write(&dir, "cycle3.trn", CYCLE3);
    let t = write(&dir, "t.json", r#"{"labels":[1,1,0]}"#);
    let o = run(&["eval", "--input", s(&h), "--truth", s(&t)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = footer(&o)["result"].clone();
    assert_eq!(r["loss"], "1/3");
    assert_eq!(r["normalizer"], "binomial");
    assert_eq!(r["n"], 3);
    assert_eq!(r["weight_kind"], "partition");

    let o = run(&["eval", "--input", s(&h), "--truth", s(&t), "--normalizer", "mixed-pairs"]);
    assert_eq!(footer(&o)["result"]["loss"], "1/2");
    let o = run(&["eval", "--input", s(&h), "--truth", s(&t), "--expected"]);
    assert_eq!(footer(&o)["result"]["loss"], "1/3");

    let sigma = write(&dir, "s.json", r#"{"ranking":[0,1,2],"weight":{"kind":"constant"}}"#);
    let o = run(&["eval", "--input", s(&h), "--truth", s(&sigma), "--expected"]);
    assert_eq!(footer(&o)["result"]["loss"], "4/9");
    let o = run(&["eval", "--input", s(&h), "--truth", s(&sigma), "--ranking", "2,0,1"]);
    assert_eq!(footer(&o)["result"]["loss"], "2/3");
    assert_eq!(footer(&o)["result"]["weight_kind"], "constant");
}

#[test]
fn oracle_modes() {
    let dir = TempDir::new().unwrap();
    let h = write(&dir, "cycle3.trn", CYCLE3);
    let o = run(&["oracle", "--mode", "mfas", "--input", s(&h)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(footer(&o)["result"]["loss"], "1/3");

    let d = write(
        &dir,
        "d.json",
        r#"{"elements":[0,1,2],"support":[{"labels":[1,1,0],"prob":"1"}]}"#,
    );
    let o = run(&["oracle", "--mode", "regret", "--input", s(&h), "--dist", s(&d)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = footer(&o)["result"].clone();
    assert_eq!(r["regret_class"]["regret"], "1/3");
    assert_eq!(r["regret_rank"]["regret"], "1/3");
    assert_eq!(r["bound_holds"], true);

    let v = write(
        &dir,
        "v.json",
        r#"{"elements":[0,1,2],"support":[
            {"elements":[0,1],"labels":[0,1],"prob":"1/2"},
            {"labels":[1,0,1],"prob":"1/2"}]}"#,
    );
    let o = run(&["oracle", "--mode", "iia", "--dist", s(&v)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(footer(&o)["result"]["holds"], false);

    let o = run(&["oracle", "--mode", "fneg", "--trials", "200", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(footer(&o)["result"]["violations"], 0);

    let o = run(&["oracle", "--mode", "lowerbound", "--order", "0,1,2"]);
    assert_eq!(o.status.code(), Some(0));
    let r = footer(&o)["result"].clone();
    assert_eq!((r["regret_rank"].as_str(), r["regret_class"].as_str()), (Some("2/3"), Some("1/3")));
    assert_eq!(r["case"], "follows-cycle");

    let o = run(&["oracle", "--mode", "regret", "--input", s(&h)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bench_table_and_cap() {
    let o = run(&["bench", "--cells", "256,256:8", "--trials", "3", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("n,k,kind,trials,mean,stddev\n256,,uniform,3,"));
    assert!(out.lines().any(|l| l.starts_with("timing: ") && l.contains("cell[256:8]")));
    let again = run(&["bench", "--cells", "256,256:8", "--trials", "3", "--seed", "2"]);
    assert_eq!(footer(&o), footer(&again));

    let o = run(&["bench", "--cells", "5000", "--trials", "3", "--max-comparisons", "100"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["bench", "--cells", "10", "--kind", "planted:1.5"]);
    assert_eq!(o.status.code(), Some(1));
}
