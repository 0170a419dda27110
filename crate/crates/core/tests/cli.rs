use std::collections::HashMap;

use clap::Parser;
use linplan::game::{is_close, SignVector};
use linplan::harness::cli::{resolve, run_cli, Cli};
use linplan::harness::{cmd_dump, ExperimentConfig, DUMP_HEADER, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};

fn run(args: &[&str]) -> u8 {
    run_cli(std::iter::once("linplan").chain(args.iter().copied()))
}

fn parse(args: &[&str]) -> ExperimentConfig {
    resolve(Cli::try_parse_from(std::iter::once("linplan").chain(args.iter().copied())).unwrap()).unwrap()
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"seed": 5, "p": 3, "k": 4, "episodes": 9, "delta": 0.25}"#).unwrap();
    let cfg = parse(&["--config", path.to_str().unwrap(), "run", "game", "--p", "2"]);
    assert_eq!((cfg.seed, cfg.p, cfg.k, cfg.episodes, cfg.delta), (5, 2, 4, 9, 0.25));
    assert_eq!((cfg.command.as_str(), cfg.target.as_str()), ("run", "game"));
    let cfg = parse(&["--config", path.to_str().unwrap(), "--seed", "8", "check", "lemmas"]);
    assert_eq!((cfg.seed, cfg.p), (8, 3));
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"sead": 5}"#).unwrap();
    assert_eq!(run(&["--config", path.to_str().unwrap(), "check", "lemmas"]), EXIT_USAGE);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    assert_eq!(run(&["check", "realizability", "--p", "2", "--K", "2", "--out", report.to_str().unwrap()]), EXIT_PASS);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["pass"], true);
    // Desk parameters carry warnings, which strict mode turns into a failure.
    assert_eq!(run(&["check", "realizability", "--p", "2", "--K", "2", "--strict"]), EXIT_FAIL);
    assert_eq!(run(&["check", "nonsense"]), EXIT_USAGE);
    assert_eq!(run(&[]), EXIT_USAGE);
    assert_eq!(run(&["--help"]), EXIT_PASS);
    assert_eq!(run(&["check", "realizability", "--p", "9"]), EXIT_USAGE);
    let out = dir.path().join("runs");
    // Formula-exact sample sizes exceed the query budget.
    assert_eq!(run(&["run", "tensorplan", "--out-dir", out.to_str().unwrap()]), EXIT_USAGE);
    assert!(!out.exists());
}

#[test]
fn game_run_writes_both_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("game");
    let code = run(&["--seed", "3", "run", "game", "--p", "12", "--K", "10", "--episodes", "50", "--out-dir", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_PASS);
    let csv = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
    assert!(csv.starts_with("seed,episode,total_reward,v_star,suboptimality,queries_init,queries_total,wall_time\n"));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 3);
}

/// Legal prefixes of one round of length `m`, counted from the action rules alone.
fn round_prefixes(p: usize, m: usize) -> u64 {
    let r = p.div_ceil(4);
    // (fresh actions used, frozen) -> count
    let mut layer: HashMap<(usize, bool), u64> = HashMap::from([((0, false), 1)]);
    for i in 0..m {
        let mut next = HashMap::new();
        for (&(used, frozen), &n) in &layer {
            if frozen {
                *next.entry((used, true)).or_default() += n * p as u64;
                continue;
            }
            *next.entry((used + 1, false)).or_default() += n * (p - used) as u64;
            if i >= r {
                *next.entry((used, true)).or_default() += n * used as u64;
            }
        }
        layer = next;
    }
    layer.values().sum()
}

fn expected_nodes(p: usize, k: usize) -> u64 {
    let per_round: u64 = (0..p).map(|m| round_prefixes(p, m)).sum();
    let full = round_prefixes(p, p);
    (0..k as u32).map(|j| full.pow(j) * per_round).sum()
}

#[test]
fn dump_matches_independent_enumeration() {
    for (p, k) in [(2, 2), (2, 3), (3, 2), (4, 2)] {
        let cfg = ExperimentConfig { command: "dump".into(), target: "hardmdp".into(), p, k, ..Default::default() };
        let mut buf = Vec::new();
        let rows = cmd_dump(&cfg, &mut buf).unwrap();
        let mut reader = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), DUMP_HEADER.to_vec());
        let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(records.len(), rows);
        assert_eq!(rows as u64, expected_nodes(p, k) + 1, "p={p} K={k}");
        assert_eq!(records.iter().filter(|r| &r[0] == "bot").count(), 1);
        for rec in records.iter().filter(|r| &r[0] != "bot") {
            let (kk, i): (usize, usize) = (rec[1].parse().unwrap(), rec[2].parse().unwrap());
            assert_eq!(rec[13].parse::<usize>().unwrap(), kk * p + i);
            let w0: SignVector = rec[3].parse().unwrap();
            let secret: SignVector = rec[8].parse().unwrap();
            let notreach = kk > 0 && is_close(w0.hamming_unchecked(&secret), p);
            assert_eq!(&rec[7], if notreach { "notreach" } else { "reach" });
        }
    }
}

#[test]
fn dump_rejects_bad_secret_index() {
    assert_eq!(run(&["dump", "hardmdp", "--p", "2", "--K", "2", "--secret-index", "99"]), EXIT_USAGE);
}
