//! Exhaustive realizability sweep over a hard MDP's enumerated action tree.
//!
//! The table supplies the tree and the feature vectors under test. The round
//! statistics of every child are re-derived here from the action rules and compared
//! with the table; transition rewards, optimal values and the closed-form value are
//! computed by an independent backward induction.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{close_ref, diff_bits, g_ref};
use crate::error::Result;
use crate::game::{enumerate_wstar, SignVector};
use crate::hard::{completion_blocks, theta_star, HardInstance, HardMdpParams, HardTable, RoundStats, Variant};
use crate::linalg::{dot, norm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub variants: Vec<Variant>,
    /// Secrets to sweep; all admissible secrets when `None`.
    pub secrets: Option<Vec<SignVector>>,
    pub tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { variants: Variant::ALL.to_vec(), secrets: None, tol: 1e-9 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub p: usize,
    pub k: usize,
    pub states: usize,
    pub secrets: usize,
    pub variants: Vec<Variant>,
    /// Children whose statistics disagree with the action rules (or missing/extra children).
    pub structure_mismatches: u64,
    /// Violations of the round-statistics identities.
    pub relationship_violations: u64,
    /// `max |<phi_v, theta*> - v*|` over reach states, all variants.
    pub v_error_reach: f64,
    /// `max |<phi_q, theta*> - q*|` over reach states, all variants.
    pub q_error_reach: f64,
    /// Same identities on every state, for the variant whose unreachable reward uses the matching features.
    pub v_error_all: f64,
    pub q_error_all: f64,
    /// `max |v^pi - v*|` over all states.
    pub policy_gap: f64,
    /// `max |v' - v*|` over reach states.
    pub v_prime_error: f64,
    /// Transitions from a reach state to a non-terminal notreach state.
    pub reach_to_notreach_edges: u64,
    /// Transitions scanned for the previous count.
    pub transitions_scanned: u64,
    pub max_phi_v_norm: f64,
    pub max_phi_q_norm: f64,
    pub max_theta_norm: f64,
    /// Largest norm of the unscaled completion blocks.
    pub max_completion_block_norm: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl SweepReport {
    fn absorb(&mut self, o: &PassResult) {
        self.relationship_violations += o.relationship_violations;
        self.v_error_reach = self.v_error_reach.max(o.v_error_reach);
        self.q_error_reach = self.q_error_reach.max(o.q_error_reach);
        self.v_error_all = self.v_error_all.max(o.v_error_all);
        self.q_error_all = self.q_error_all.max(o.q_error_all);
        self.policy_gap = self.policy_gap.max(o.policy_gap);
        self.v_prime_error = self.v_prime_error.max(o.v_prime_error);
        self.reach_to_notreach_edges += o.reach_edges;
        self.transitions_scanned += o.transitions;
    }

    fn finish(&mut self) {
        let t = self.tolerance;
        self.pass = self.structure_mismatches == 0
            && self.relationship_violations == 0
            && self.v_error_reach <= t
            && self.q_error_reach <= t
            && self.v_error_all <= t
            && self.q_error_all <= t
            && self.policy_gap <= t
            && self.v_prime_error <= t
            && self.reach_to_notreach_edges == 0
            && self.max_phi_v_norm <= 1.0 + 1e-12
            && self.max_phi_q_norm <= 1.0 + 1e-12
            && self.max_theta_norm <= crate::hard::B_HARD
            && self.max_completion_block_norm <= 8.0;
    }
}

#[derive(Default)]
struct PassResult {
    relationship_violations: u64,
    v_error_reach: f64,
    q_error_reach: f64,
    v_error_all: f64,
    q_error_all: f64,
    policy_gap: f64,
    v_prime_error: f64,
    reach_edges: u64,
    transitions: u64,
}

/// Round statistics of a child, derived from the action rules; `None` when there is no child.
fn child_stats(st: &RoundStats, a: usize, p: usize, k_total: usize) -> Option<(usize, usize, u64, u64, u64, bool, f64)> {
    let full = (1u64 << p) - 1;
    let bit = 1u64 << a;
    let repeat = st.fix & bit != 0;
    let critical = (p + 3) / 4;
    if repeat && !st.frozen && st.i < critical {
        return None;
    }
    let (w, fix, frozen) =
        if st.frozen || repeat { (st.w.bits(), full, true) } else { (st.w.bits() ^ bit, st.fix | bit, false) };
    if st.i + 1 < p {
        return Some((st.k, st.i + 1, st.w0.bits(), w, fix, frozen, st.prefix));
    }
    if st.k + 1 == k_total {
        return None;
    }
    let prefix = st.prefix * g_ref(diff_bits(st.w0.bits(), w), p);
    Some((st.k + 1, 0, w, w, 0, false, prefix))
}

fn structure_mismatches(table: &HardTable) -> u64 {
    let params = table.params();
    let (p, k) = (params.p, params.k);
    let mut bad = 0;
    for s in 0..table.num_nodes() {
        let st = table.stats(s);
        for a in 0..p {
            match (child_stats(&st, a, p, k), table.child(s, a)) {
                (None, None) => {}
                (Some((ck, ci, w0, w, fix, frozen, prefix)), Some(c)) => {
                    let t = table.stats(c);
                    let same = t.k == ck
                        && t.i == ci
                        && t.w0.bits() == w0
                        && t.w.bits() == w
                        && t.fix == fix
                        && t.frozen == frozen
                        && (t.prefix - prefix).abs() <= 1e-15 * prefix.abs().max(1.0);
                    bad += u64::from(!same);
                }
                _ => bad += 1,
            }
        }
    }
    bad
}

fn one_pass(table: &Arc<HardTable>, secret: SignVector, variant: Variant) -> Result<PassResult> {
    let params: HardMdpParams = *table.params();
    let (p, k_total) = (params.p, params.k);
    let full = params.mask();
    let inst = HardInstance::new(table.clone(), secret, variant)?;
    let theta = theta_star(&params, &secret);
    let ip: Vec<f64> = (0..table.num_features() as u32).map(|id| dot(table.feature(id), &theta)).collect();
    let sb = secret.bits();
    let n = table.num_nodes();
    let mut v = vec![0.0f64; n];
    let mut vpi = vec![0.0f64; n];
    let mut out = PassResult::default();
    let notreach = |st: &RoundStats| st.k > 0 && close_ref(diff_bits(st.w0.bits(), sb), p);

    for s in (0..n).rev() {
        let st = table.stats(s);
        let s_notreach = notreach(&st);
        let wrong = st.w.bits() ^ sb;
        let ct = diff_bits(st.w0.bits(), st.w.bits());
        let e_fix = (wrong & st.fix).count_ones();
        let e_notfix = (wrong & !st.fix & full).count_ones();
        if e_notfix as usize > p - ct as usize || (st.fix != full && e_fix > ct) {
            out.relationship_violations += 1;
        }
        if !st.frozen && st.fix != full && !(ct as usize == st.i && st.fix.count_ones() as usize == st.i) {
            out.relationship_violations += 1;
        }

        let pi = inst.policy(s);
        let phi_v_ip = ip[table.phi_v_id(s) as usize];
        let mut best = f64::NEG_INFINITY;
        for a in 0..p {
            let phi_q_ip = ip[table.phi_q_id(s, a) as usize];
            let (q, q_pi) = if s_notreach {
                let r = if variant == Variant::Q { phi_q_ip } else { phi_v_ip };
                (r, r)
            } else {
                let bit = 1u64 << a;
                let w_new = if st.frozen || st.fix & bit != 0 { st.w.bits() } else { st.w.bits() ^ bit };
                let completes = st.i + 1 == p;
                if completes && (close_ref(diff_bits(w_new, sb), p) || st.k + 1 == k_total) {
                    let r = st.prefix * g_ref(diff_bits(st.w0.bits(), w_new), p) * g_ref(diff_bits(w_new, sb), p);
                    (r, r)
                } else {
                    out.transitions += 1;
                    match table.child(s, a) {
                        None => (0.0, 0.0),
                        Some(c) => {
                            if notreach(&table.stats(c)) {
                                out.reach_edges += 1;
                            }
                            (v[c], vpi[c])
                        }
                    }
                }
            };
            let q_err = (phi_q_ip - q).abs();
            if !s_notreach {
                out.q_error_reach = out.q_error_reach.max(q_err);
            }
            if variant == Variant::Q {
                out.q_error_all = out.q_error_all.max(q_err);
            }
            if a == pi {
                vpi[s] = q_pi;
            }
            best = best.max(q);
        }
        v[s] = best;
        let v_err = (phi_v_ip - best).abs();
        if !s_notreach {
            out.v_error_reach = out.v_error_reach.max(v_err);
            let vp = st.prefix * g_ref(ct + e_notfix, p) * g_ref(e_fix, p);
            out.v_prime_error = out.v_prime_error.max((vp - best).abs());
        }
        if variant == Variant::V {
            out.v_error_all = out.v_error_all.max(v_err);
        }
        out.policy_gap = out.policy_gap.max((vpi[s] - best).abs());
    }
    Ok(out)
}

/// Run the sweep over the given table for every requested secret and variant.
pub fn hard_sweep(table: &Arc<HardTable>, opts: &SweepOptions) -> Result<SweepReport> {
    let params = *table.params();
    let secrets = match &opts.secrets {
        Some(s) => s.clone(),
        None => enumerate_wstar(params.p)?,
    };
    let mut report = SweepReport {
        p: params.p,
        k: params.k,
        states: table.num_nodes(),
        secrets: secrets.len(),
        variants: opts.variants.clone(),
        tolerance: opts.tol,
        ..Default::default()
    };
    report.structure_mismatches = structure_mismatches(table);

    // Interned vectors are shared between the two maps; classify them by use.
    let mut q_norm: f64 = 0.0;
    let mut v_norm: f64 = 0.0;
    let mut seen_v = vec![false; table.num_features()];
    let mut seen_q = vec![false; table.num_features()];
    for s in 0..table.num_nodes() {
        let id = table.phi_v_id(s) as usize;
        if !seen_v[id] {
            seen_v[id] = true;
            v_norm = v_norm.max(norm(table.feature(id as u32)));
        }
        for a in 0..params.p {
            let id = table.phi_q_id(s, a) as usize;
            if !seen_q[id] {
                seen_q[id] = true;
                q_norm = q_norm.max(norm(table.feature(id as u32)));
            }
        }
    }
    report.max_phi_v_norm = v_norm;
    report.max_phi_q_norm = q_norm;
    for bits in 0..1u64 << params.p {
        let blocks = completion_blocks(&params, &SignVector::from_bits(bits, params.p));
        let flat: Vec<f64> = blocks.concat();
        report.max_completion_block_norm = report.max_completion_block_norm.max(norm(&flat));
    }
    for secret in &secrets {
        report.max_theta_norm = report.max_theta_norm.max(norm(&theta_star(&params, secret)));
    }

    let jobs: Vec<(SignVector, Variant)> =
        secrets.iter().flat_map(|&s| opts.variants.iter().map(move |&v| (s, v))).collect();
    let results: Vec<Result<PassResult>> =
        jobs.par_iter().map(|&(secret, variant)| one_pass(table, secret, variant)).collect();
    for r in results {
        report.absorb(&r?);
    }
    report.finish();
    Ok(report)
}
