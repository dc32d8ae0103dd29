use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use dellab::online::wait_profile;
use dellab::Word;
use tempfile::TempDir;

fn dellab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dellab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn dellab_stdin(args: &[&str], dir: &Path, input: &str) -> Output {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_dellab"))
        .args(args)
        .current_dir(dir)
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn params_derived_from_p() {
    let dir = TempDir::new().unwrap();
    let v = json(&dellab(&["params", "--p", "0.9", "--n", "100"], dir.path()));
    assert_eq!(v["params"]["lambda"], 5);
    assert!((v["params"]["delta"].as_f64().unwrap() - 0.06875).abs() < 1e-12);
    assert!(v["params"]["exact"].is_null());
    assert!(v["params"]["log2_k"].as_f64().unwrap() > 1000.0);
}

#[test]
fn params_toy() {
    let dir = TempDir::new().unwrap();
    let args = ["params", "--toy", "--K", "2", "--R", "4", "--lambda", "2", "--delta", "0.5", "--n", "8"];
    let v = json(&dellab(&args, dir.path()));
    assert_eq!(v["params"]["exact"]["l"], 32);
    assert_eq!(v["total_len"], 256);
    assert_eq!(v["kept_blocks"], 4);
}

#[test]
fn params_from_config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("p.json"),
        r#"{"mode": "toy", "n": 8, "K": 2, "R": 4, "lambda": 2, "delta": 0.25}"#,
    )
    .unwrap();
    let v = json(&dellab(&["params", "--config", "p.json", "--delta", "0.5"], dir.path()));
    assert_eq!(v["params"]["delta"], 0.5);
    assert_eq!(v["total_len"], 256);
}

#[test]
fn invalid_p_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = dellab(&["params", "--p", "1.2", "--n", "4"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn encode_corrupt_decode_round_trip() {
    let dir = TempDir::new().unwrap();
    let outer = "1,2,2,1\n2,1,1,2\n2,2,2,2\n";
    std::fs::write(dir.path().join("outer.txt"), outer).unwrap();
    let toy = ["--K", "2", "--R", "4"];
    let code = stdout(&dellab(&[&["encode", "outer.txt"][..], &toy].concat(), dir.path()));
    assert_eq!(code.lines().count(), 3);
    assert!(code.lines().all(|l| l.len() == 4 * 32));
    std::fs::write(dir.path().join("code.txt"), &code).unwrap();

    let received = stdout(&dellab(&["corrupt", "code.txt", "--pattern", ""], dir.path()));
    assert_eq!(received, code);
    let decoded = stdout(&dellab_stdin(&[&["decode", "--outer-code", "outer.txt"][..], &toy].concat(), dir.path(), &received));
    assert_eq!(decoded, outer);

    let codebook = stdout(&dellab_stdin(&["decode", "--codebook", "code.txt"], dir.path(), &received));
    assert_eq!(codebook, code);
}

#[test]
fn delete_zeros_family() {
    let dir = TempDir::new().unwrap();
    let out = stdout(&dellab_stdin(&["corrupt", "--family", "delete-zeros"], dir.path(), "0101\n0011\n"));
    assert_eq!(out, "11\n11\n");
    let out = stdout(&dellab_stdin(&["corrupt", "--family", "delete-ones", "--weight", "1"], dir.path(), "0101\n"));
    assert_eq!(out, "001\n");
}

#[test]
fn explicit_patterns_per_line() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("p.txt"), "1\n2,3\n").unwrap();
    let out = stdout(&dellab_stdin(&["corrupt", "--patterns", "p.txt"], dir.path(), "0101\n0011\n"));
    assert_eq!(out, "101\n01\n");
    let bad = dellab_stdin(&["corrupt", "--pattern", "5"], dir.path(), "0101\n");
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn random_corruption_is_seeded() {
    let dir = TempDir::new().unwrap();
    let input = "0110100110010110\n1111000011110000\n";
    let args = ["corrupt", "--family", "random", "--weight", "5", "--seed", "11"];
    let a = stdout(&dellab_stdin(&args, dir.path(), input));
    let b = stdout(&dellab_stdin(&args, dir.path(), input));
    assert_eq!(a, b);
    assert!(a.lines().all(|l| l.len() == 11));
}

#[test]
fn ambiguous_and_foreign_words_fail_to_decode() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.txt"), "0011\n1100\n").unwrap();
    let out = stdout(&dellab_stdin(&["decode", "--codebook", "c.txt"], dir.path(), "0\n0110\n01\n10\n"));
    assert_eq!(out, "FAIL\nFAIL\n0011\n1100\n");
}

#[test]
fn malformed_codebook_is_rejected() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("c.txt"), "0011\n110\n").unwrap();
    let o = dellab_stdin(&["decode", "--codebook", "c.txt"], dir.path(), "0\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

const OBLIVIOUS: &str = r#"{
  "params": {"K": 2, "R": 64, "lambda": 1, "delta": 0.25, "n": 8},
  "p": 0.2, "family": "both", "uniform_count": 2, "code_size": 16,
  "filtered": false, "seeds": 3
}"#;

#[test]
fn oblivious_experiment_is_byte_identical_under_a_seed() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("e.json"), OBLIVIOUS).unwrap();
    let run = |out: &str| {
        let o = dellab(
            &["experiment", "oblivious", "--config", "e.json", "--seed", "5", "--out", out, "--summary", "s.json"],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(dir.path().join(out)).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("seed,pattern_id,pattern_weight,code_size,error_fraction"));
    // Two uniform and six structured patterns per seed.
    assert_eq!(lines.count(), 3 * 8);

    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["rows"], 24);
    assert_eq!(summary["pool_size"], 256);
    assert_eq!(summary["config"]["seeds"], 3);
    assert!(summary["version"].is_string());
}

#[test]
fn missing_seed_is_drawn_and_echoed() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("e.json"), OBLIVIOUS).unwrap();
    let o = dellab(&["experiment", "oblivious", "--config", "e.json", "--out", "a.csv"], dir.path());
    assert!(o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    let seed: u64 = err
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .expect("seed announced")
        .parse()
        .unwrap();
    let again = dellab(
        &["experiment", "oblivious", "--config", "e.json", "--out", "b.csv", "--seed", &seed.to_string()],
        dir.path(),
    );
    assert!(again.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("a.csv")).unwrap(),
        std::fs::read(dir.path().join("b.csv")).unwrap()
    );
}

#[test]
fn failed_runs_leave_no_output_file() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("e.json"), OBLIVIOUS.replace("\"p\": 0.2", "\"p\": 1.5")).unwrap();
    let o = dellab(&["experiment", "oblivious", "--config", "e.json", "--seed", "1", "--out", "x.csv"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("x.csv").exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

/// Four-bit prefixes followed by a suffix shared within each pair, trimmed
/// until every wait class has even size.
fn paired_code(suffix_len: usize) -> Vec<Word> {
    let mut prefixes: Vec<u64> = (1..15).collect();
    let classes = loop {
        let words: Vec<Word> = prefixes
            .iter()
            .map(|&p| Word::from_u64(p, 4).concat(&Word::zeros(suffix_len)))
            .collect();
        let mut classes: BTreeMap<(usize, usize, bool), Vec<u64>> = BTreeMap::new();
        for (w, &p) in words.iter().zip(&prefixes) {
            let pr = wait_profile(w, &words).unwrap();
            classes.entry((pr.wait_len, pr.r0, pr.b)).or_default().push(p);
        }
        let odd: Vec<u64> = classes.values().filter(|c| c.len() % 2 == 1).map(|c| c[0]).collect();
        if odd.is_empty() {
            break classes;
        }
        prefixes.retain(|p| !odd.contains(p));
    };
    let mut code = Vec::new();
    for (c, members) in classes.values().enumerate() {
        for (k, pair) in members.chunks(2).enumerate() {
            let suffix: Word = (0..suffix_len).map(|i| (i * 7 + c * 3 + k) % 5 < 2).collect();
            for &p in pair {
                code.push(Word::from_u64(p, 4).concat(&suffix));
            }
        }
    }
    code
}

#[test]
fn online_experiment_on_a_paired_code() {
    let dir = TempDir::new().unwrap();
    let code = paired_code(20);
    let text: String = code.iter().map(|w| format!("{w}\n")).collect();
    std::fs::write(dir.path().join("code.txt"), text).unwrap();
    let args = [
        "experiment", "online", "--code", "code.txt", "--p", "0.5", "--p0-adv", "0.25", "--trials", "300",
        "--decoder", "unique", "--draw", "correct", "--seed", "8", "--summary", "s.json",
    ];
    let csv = stdout(&dellab(&args, dir.path()));
    assert_eq!(csv, stdout(&dellab(&args, dir.path())));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("trial,codeword_index,strategy,coin_bit,deletions_used,output_len,decoded_ok,confused")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 300);
    for (t, r) in rows.iter().enumerate() {
        assert_eq!(r[0], t.to_string());
        assert_eq!(r[2], "1");
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(summary["paired_fraction"], 1.0);
    assert_eq!(summary["confusion_mass"], 1.0, "{summary}");
    assert!(rows.iter().all(|r| r[7] == "true"));
    assert_eq!(summary["budget_violations"], 0);
}

#[test]
fn verify_reports_json_and_exit_status() {
    let dir = TempDir::new().unwrap();
    let o = dellab(&["verify", "levenshtein", "--exhaustive", "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["name"], "levenshtein");
    assert_eq!(v[0]["violations"], 0);
    assert_eq!(v[0]["mode"], "exhaustive");

    let o = dellab(&["verify", "match-dominance", "geometric", "--samples", "1e2", "--seed", "7"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[0]["instances"], 100);
}

#[test]
fn verify_violation_exits_one() {
    let dir = TempDir::new().unwrap();
    let o = dellab(&["verify", "absorption", "--samples", "2000", "--seed", "3"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["violations"], 1);
}

#[test]
fn unknown_oracle_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = dellab(&["verify", "no-such-oracle"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn graph_summary_and_edges() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("pool.txt"), "1,1,1\n2,2,2\n1,2,1\n").unwrap();
    let args = ["graph", "--pool", "pool.txt", "--K", "2", "--t", "1", "--kept", "1,3"];
    let v = json(&dellab(&args, dir.path()));
    assert_eq!(v["vertices"], 3);
    let edges = stdout(&dellab(&[&args[..], &["--edges"]].concat(), dir.path()));
    assert_eq!(edges.lines().next(), Some("from,to"));
    assert_eq!(edges.lines().count() - 1, v["edges"].as_u64().unwrap() as usize);
}

#[test]
fn graph_sparsity_on_a_filtered_random_pool() {
    let dir = TempDir::new().unwrap();
    let kept: Vec<String> = (1..=36).map(|i| i.to_string()).collect();
    let kept = kept.join(",");
    let args = [
        "graph", "--random", "256", "--length", "48", "--K", "64", "--t", "64", "--kept", &kept,
        "--max-outdegree", "10", "--sparsity-seeds", "200", "--seed", "1",
    ];
    let v = json(&dellab(&args, dir.path()));
    assert!(v["max_out_degree"].as_u64().unwrap() <= 10);
    let s = &v["sparsity"];
    assert!(s["passed"].as_u64().unwrap() * 100 >= 95 * 200, "{s}");
}

#[test]
fn threads_flag_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("e.json"), OBLIVIOUS).unwrap();
    let one = dellab(&["experiment", "oblivious", "--config", "e.json", "--seed", "2", "--threads", "1"], dir.path());
    let four = dellab(&["experiment", "oblivious", "--config", "e.json", "--seed", "2", "--threads", "4"], dir.path());
    assert_eq!(stdout(&one), stdout(&four));
}
