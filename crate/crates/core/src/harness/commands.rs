use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ExperimentConfig, FixtureChoice};
use super::records::{evaluate, fmt_f64, summarize_episodes, write_records_csv, EpisodeSummary, RunRecord};
use crate::error::{Error, Result};
use crate::fixtures::{random_realizable, toy_q_deterministic, toy_v_realizable, Fixture, Realize};
use crate::hard::{HardInstance, HardMdpParams, HardTable, Variant, B_HARD};
use crate::mdp::{dp_solve_table, Mdp, Tabular};
use crate::oracle::{
    check_close_count, check_f_bounds, check_optimise_ks, hard_sweep, smoke_trials, summarize_smoke, LemmaReport,
    SweepOptions,
};
use crate::reduction::{delayed_dp_check, TpPrime};
use crate::rng::Streams;
use crate::tensorplan::{tp_constants, TensorPlan, TpConfig, TpConstants};
use crate::game::enumerate_wstar;

/// Largest `p` and `K` accepted by the exhaustive modes.
pub const DESK_P_MAX: usize = 4;
pub const DESK_K_MAX: usize = 4;

/// Result of `check`: a JSON report and the verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub pass: bool,
    pub report: Value,
}

/// Result of `run`: per-episode records and the JSON summary text.
///
/// The summary is kept as text because sample sizes can exceed the 64-bit range of
/// a JSON value tree.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub pass: bool,
    pub records: Vec<RunRecord>,
    pub summary: String,
}

fn desk_params(cfg: &ExperimentConfig, variant: Variant) -> Result<HardMdpParams> {
    if cfg.p > DESK_P_MAX || cfg.k > DESK_K_MAX {
        return Err(Error::Budget(format!(
            "exhaustive modes need p <= {DESK_P_MAX} and K <= {DESK_K_MAX} (got p = {}, K = {})",
            cfg.p, cfg.k
        )));
    }
    HardMdpParams::desk(cfg.p, cfg.k, variant)
}

fn variants(cfg: &ExperimentConfig) -> Vec<Variant> {
    cfg.variant.map_or_else(|| Variant::ALL.to_vec(), |v| vec![v])
}

pub fn cmd_check(cfg: &ExperimentConfig) -> Result<CheckOutcome> {
    let (pass, body, warnings) = match cfg.target.as_str() {
        "realizability" => {
            let params = desk_params(cfg, Variant::V)?;
            let table = Arc::new(HardTable::build(&params)?);
            let opts = SweepOptions { variants: variants(cfg), secrets: None, tol: cfg.tol };
            let rep = hard_sweep(&table, &opts)?;
            (rep.pass, serde_json::to_value(&rep)?, params.warnings())
        }
        "lemmas" => {
            let streams = Streams::new(cfg.seed);
            let reports: Vec<LemmaReport> = vec![
                check_optimise_ks(cfg.p, cfg.lemma_l_max)?,
                check_f_bounds(&[4, 8], cfg.lemma_samples, &mut streams.stream("f-bounds", 0))?,
                check_close_count(16)?,
            ];
            let pass = reports.iter().all(LemmaReport::pass);
            (pass, serde_json::to_value(&reports)?, Vec::new())
        }
        "reduction" => {
            let params = desk_params(cfg, Variant::Q)?;
            let table = Arc::new(HardTable::build(&params)?);
            let mut hard = Vec::new();
            for secret in enumerate_wstar(params.p)? {
                let inst = HardInstance::new(table.clone(), secret, Variant::Q)?;
                let rep = delayed_dp_check(&inst, |s, a| table.phi_q(s, a).to_vec(), inst.theta(), B_HARD, cfg.tol)?;
                hard.push(json!({ "secret": secret.to_string(), "report": rep }));
            }
            let toy = toy_q_deterministic();
            let toy_rep = delayed_dp_check(
                &toy.mdp,
                |s, a| toy.mdp.phi_q(&s, a).unwrap_or_default(),
                &toy.theta,
                toy.b,
                cfg.tol,
            )?;
            let pass = toy_rep.pass && hard.iter().all(|h| h["report"]["pass"] == json!(true));
            (pass, json!({ "hard_q": hard, "toy_q": toy_rep }), params.warnings())
        }
        other => return Err(Error::InvalidParams(format!("unknown check {other:?}"))),
    };
    let pass = pass && !(cfg.strict && !warnings.is_empty());
    Ok(CheckOutcome { pass, report: json!({ "config": cfg, "warnings": warnings, "pass": pass, "result": body }) })
}

fn planner_fixture(cfg: &ExperimentConfig, realize: Realize, streams: &Streams) -> Result<Fixture> {
    match cfg.fixture {
        FixtureChoice::Toy => {
            if (cfg.d, cfg.h, cfg.a) != (2, 3, 2) {
                return Err(Error::InvalidParams(format!(
                    "the toy fixture has d = 2, H = 3, A = 2 (got d = {}, H = {}, A = {}); use the random fixture",
                    cfg.d, cfg.h, cfg.a
                )));
            }
            Ok(match realize {
                Realize::Value => toy_v_realizable(),
                Realize::ActionValue => toy_q_deterministic(),
            })
        }
        FixtureChoice::Random => random_realizable(cfg.d, cfg.h, cfg.a, 3, realize, &mut streams.stream("fixture", 0)),
    }
}

/// Refuse configurations whose Init would issue more than the query budget per iteration.
fn check_budget(cfg: &TpConfig, c: &TpConstants, budget: f64) -> Result<()> {
    let per_iteration =
        c.n1_used as f64 * cfg.h as f64 * cfg.a as f64 * c.n2_used as f64 + cfg.a as f64 * c.n3_used as f64;
    if per_iteration > budget {
        return Err(Error::Budget(format!(
            "about {per_iteration:.3e} simulator queries per consistency iteration exceed the budget of {budget:.3e}; \
             lower the sample-size scales"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct PlannerSummary<'a> {
    config: &'a ExperimentConfig,
    fixture: &'a str,
    constants: &'a TpConstants,
    #[serde(skip_serializing_if = "Option::is_none")]
    inner_constants: Option<&'a TpConstants>,
    summary: &'a EpisodeSummary,
    pass: bool,
}

pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let streams = Streams::new(cfg.seed);
    match cfg.target.as_str() {
        "tensorplan" => {
            let f = planner_fixture(cfg, Realize::Value, &streams)?;
            let tp = cfg.tp_config();
            let constants = tp_constants(&tp)?;
            check_budget(&tp, &constants, cfg.query_budget)?;
            let v_star = dp_solve_table(&f.mdp)?.v[f.mdp.initial_index()];
            let planners = streams.child("planner", 0);
            let records = evaluate(&f.mdp, v_star, cfg.episodes, &streams, cfg.record_timing, |e| {
                TensorPlan::new(tp.clone(), planners.stream("episode", e))
            })?;
            let summary = summarize_episodes(&records, v_star, cfg.delta);
            let pass = summary.sound;
            let doc = PlannerSummary {
                config: cfg,
                fixture: &f.name,
                constants: &constants,
                inner_constants: None,
                summary: &summary,
                pass,
            };
            Ok(RunOutcome { pass, summary: serde_json::to_string_pretty(&doc)?, records })
        }
        "reduction" => {
            let f = planner_fixture(cfg, Realize::ActionValue, &streams)?;
            let tp = cfg.tp_config();
            let constants = tp_constants(&tp)?;
            let probe: TpPrime<usize> = TpPrime::new(&tp, streams.stream("probe", 0))?;
            let inner = tp_constants(probe.inner_config())?;
            check_budget(probe.inner_config(), &inner, cfg.query_budget)?;
            let v_star = dp_solve_table(&f.mdp)?.v[f.mdp.initial_index()];
            let planners = streams.child("planner", 0);
            let records = evaluate(&f.mdp, v_star, cfg.episodes, &streams, cfg.record_timing, |e| {
                TpPrime::<usize>::new(&tp, planners.stream("episode", e))
            })?;
            let summary = summarize_episodes(&records, v_star, cfg.delta);
            let pass = summary.sound;
            let doc = PlannerSummary {
                config: cfg,
                fixture: &f.name,
                constants: &constants,
                inner_constants: Some(&inner),
                summary: &summary,
                pass,
            };
            Ok(RunOutcome { pass, summary: serde_json::to_string_pretty(&doc)?, records })
        }
        "game" => {
            let trials = smoke_trials(cfg.p, cfg.k, cfg.smoke_planner, cfg.episodes, &mut streams.stream("smoke", 0))?;
            let report = summarize_smoke(cfg.p, cfg.k, cfg.smoke_planner, &trials);
            let records = trials
                .iter()
                .enumerate()
                .map(|(i, t)| RunRecord {
                    seed: cfg.seed,
                    episode: i as u64,
                    total_reward: t.payoff,
                    v_star: t.f_empty,
                    suboptimality: t.f_empty - t.payoff,
                    queries_init: 0,
                    queries_total: 0,
                    wall_time: 0.0,
                })
                .collect();
            let pass = report.pass;
            let doc = json!({ "config": cfg, "hardness": report, "pass": pass });
            Ok(RunOutcome { pass, summary: serde_json::to_string_pretty(&doc)?, records })
        }
        other => Err(Error::InvalidParams(format!("unknown run target {other:?}"))),
    }
}

/// Write `runs.csv` and `summary.json` into `dir`.
pub fn write_run_outputs(dir: &Path, run: &RunOutcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_records_csv(std::fs::File::create(dir.join("runs.csv"))?, &run.records)?;
    std::fs::write(dir.join("summary.json"), format!("{}\n", run.summary))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub const DUMP_HEADER: [&str; 14] = [
    "id", "k", "i", "w0", "w", "fix", "frozen", "reach_class", "secret", "variant", "v_star", "v_prime", "phi_v_theta",
    "stage",
];

/// One row per enumerated state of the selected hard instance, then the terminal row.
pub fn cmd_dump<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<usize> {
    if cfg.target != "hardmdp" {
        return Err(Error::InvalidParams(format!("unknown dump target {:?}", cfg.target)));
    }
    let variant = cfg.variant.unwrap_or(Variant::V);
    let params = desk_params(cfg, variant)?;
    let secrets = enumerate_wstar(params.p)?;
    let secret = *secrets.get(cfg.secret_index).ok_or_else(|| {
        Error::InvalidParams(format!("secret index {} out of range ({} secrets)", cfg.secret_index, secrets.len()))
    })?;
    let table = Arc::new(HardTable::build(&params)?);
    let inst = HardInstance::new(table.clone(), secret, variant)?;
    let values = dp_solve_table(&inst)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DUMP_HEADER)?;
    let (secret_s, variant_s) = (secret.to_string(), variant.name());
    for s in 0..table.num_nodes() {
        let st = table.stats(s);
        let fix: String = (0..params.p).map(|j| if st.fix >> j & 1 == 1 { '1' } else { '0' }).collect();
        w.write_record([
            table.state(s).to_string(),
            st.k.to_string(),
            st.i.to_string(),
            st.w0.to_string(),
            st.w.to_string(),
            fix,
            st.frozen.to_string(),
            if inst.is_notreach(s) { "notreach" } else { "reach" }.to_string(),
            secret_s.clone(),
            variant_s.to_string(),
            fmt_f64(values.v[s]),
            fmt_f64(inst.v_prime(s)),
            fmt_f64(inst.phi_v_ip(s)),
            (st.k * params.p + st.i).to_string(),
        ])?;
    }
    let stage_bot = (params.k * params.p).to_string();
    let zero = fmt_f64(0.0);
    w.write_record([
        "bot", "", "", "", "", "", "", "", &secret_s, variant_s, &zero, &zero, &zero, &stage_bot,
    ])?;
    w.flush()?;
    Ok(table.num_nodes() + 1)
}
