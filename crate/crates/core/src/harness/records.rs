use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mdp::{run_episode, AccessMode, Mdp, Planner};
use crate::rng::Streams;

/// One evaluation episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub episode: u64,
    pub total_reward: f64,
    pub v_star: f64,
    /// `v_star - total_reward`.
    pub suboptimality: f64,
    /// Queries issued by the first planner call of the episode (the one that runs Init).
    pub queries_init: u64,
    pub queries_total: u64,
    /// Seconds; zero unless timing was requested.
    pub wall_time: f64,
}

pub const CSV_HEADER: [&str; 8] =
    ["seed", "episode", "total_reward", "v_star", "suboptimality", "queries_init", "queries_total", "wall_time"];

/// Float formatting used in every CSV: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write records sorted by `(seed, episode)`.
pub fn write_records_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.seed, r.episode));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in sorted {
        w.write_record([
            r.seed.to_string(),
            r.episode.to_string(),
            fmt_f64(r.total_reward),
            fmt_f64(r.v_star),
            fmt_f64(r.suboptimality),
            r.queries_init.to_string(),
            r.queries_total.to_string(),
            fmt_f64(r.wall_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean, standard error and one-sided 95% bounds of a sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub n: u64,
    pub mean: f64,
    pub stderr: f64,
    pub lower95: f64,
    pub upper95: f64,
}

const Z95: f64 = 1.6448536269514722;

impl MeanCi {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = xs.into_iter().collect();
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self { n: 0, mean: 0.0, stderr: 0.0, lower95: 0.0, upper95: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let stderr = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Self { n: xs.len() as u64, mean, stderr, lower95: mean - Z95 * stderr, upper95: mean + Z95 * stderr }
    }
}

/// Aggregates of a planner evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub episodes: u64,
    pub v_star: f64,
    pub total_reward: MeanCi,
    pub suboptimality: MeanCi,
    pub mean_queries_init: f64,
    pub mean_queries_total: f64,
    pub max_queries_total: u64,
    /// Whether the one-sided 95% upper bound on suboptimality is at most `delta`.
    pub sound: bool,
}

pub fn summarize_episodes(records: &[RunRecord], v_star: f64, delta: f64) -> EpisodeSummary {
    let n = records.len().max(1) as f64;
    let suboptimality = MeanCi::of(records.iter().map(|r| r.suboptimality));
    EpisodeSummary {
        episodes: records.len() as u64,
        v_star,
        total_reward: MeanCi::of(records.iter().map(|r| r.total_reward)),
        sound: !records.is_empty() && suboptimality.upper95 <= delta,
        suboptimality,
        mean_queries_init: records.iter().map(|r| r.queries_init as f64).sum::<f64>() / n,
        mean_queries_total: records.iter().map(|r| r.queries_total as f64).sum::<f64>() / n,
        max_queries_total: records.iter().map(|r| r.queries_total).max().unwrap_or(0),
    }
}

/// Evaluate a planner over independent episodes in parallel.
///
/// Episode `e` owns a fresh planner from `make_planner(e)` and its own environment
/// and simulator streams, so the records do not depend on scheduling.
pub fn evaluate<M, P, F>(
    mdp: &M,
    v_star: f64,
    episodes: u64,
    streams: &Streams,
    record_timing: bool,
    make_planner: F,
) -> Result<Vec<RunRecord>>
where
    M: Mdp + Sync,
    M::State: Sync,
    P: Planner<M>,
    F: Fn(u64) -> Result<P> + Sync,
{
    let s0 = mdp.initial_state();
    let mut records = (0..episodes)
        .into_par_iter()
        .map(|e| {
            let start = Instant::now();
            let mut planner = make_planner(e)?;
            let mut env = streams.stream("env", e);
            let ep = run_episode(&mut planner, mdp, &s0, AccessMode::Local, &mut env, streams.stream("sim", e))?;
            Ok(RunRecord {
                seed: streams.master(),
                episode: e,
                total_reward: ep.total_reward,
                v_star,
                suboptimality: v_star - ep.total_reward,
                queries_init: ep.ledger.per_call.first().copied().unwrap_or(0),
                queries_total: ep.ledger.queries_total,
                wall_time: if record_timing { start.elapsed().as_secs_f64() } else { 0.0 },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|r| (r.seed, r.episode));
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_sorted_and_fixed_width() {
        let rec = |episode| RunRecord {
            seed: 1,
            episode,
            total_reward: 0.1,
            v_star: 1.0 / 3.0,
            suboptimality: 1.0 / 3.0 - 0.1,
            queries_init: 4,
            queries_total: 9,
            wall_time: 0.0,
        };
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &[rec(2), rec(0), rec(1)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("1,0,1.0000000000000001e-1,3.3333333333333331e-1,"));
        assert!(lines[3].starts_with("1,2,"));
    }

    #[test]
    fn mean_ci_basics() {
        let c = MeanCi::of([1.0, 1.0, 1.0]);
        assert_eq!((c.mean, c.stderr, c.upper95), (1.0, 0.0, 1.0));
        let c = MeanCi::of([0.0, 2.0]);
        assert_eq!(c.mean, 1.0);
        assert!((c.stderr - 1.0).abs() < 1e-15);
    }
}
