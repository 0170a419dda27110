//! Exhaustive enumeration of the action tree.
//!
//! Nodes are stored breadth first, so every child has a larger index than its
//! parent. Features depend on a node only through a small quotient (prefix
//! product, flip count, fix mask, current weight), so they are interned and
//! inner products with a parameter are computed once per distinct feature.

use std::collections::HashMap;
use std::sync::Arc;

use super::features::{completion_blocks, completion_scale, phi_q, phi_v, round_payoff, theta_star, v_prime};
use super::params::{HardMdpParams, Variant};
use super::state::{Advance, HardState, RoundStats};
use crate::error::{Error, Result};
use crate::game::{in_wstar, is_close, SignVector};
use crate::linalg::dot;
use crate::mdp::{Succ, Tabular};

const NONE: u32 = u32::MAX;
/// Feature id of the zero vector.
pub const ZERO_FEATURE: u32 = 0;
/// Largest tree the enumerator will build.
pub const MAX_NODES: usize = 20_000_000;

#[derive(Clone, Copy, Debug)]
struct Node {
    prefix: f64,
    parent: u32,
    w0: u16,
    w: u16,
    fix: u16,
    k: u8,
    i: u8,
    action: u8,
    frozen: bool,
}

/// Secret-independent enumeration of a hard MDP's states and features.
pub struct HardTable {
    params: HardMdpParams,
    nodes: Vec<Node>,
    children: Vec<u32>,
    phi_v_id: Vec<u32>,
    phi_q_id: Vec<u32>,
    features: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum FeatureKey {
    Value { prefix: u64, ct: u32, fix: u64, w: u64 },
    Completion { prefix: u64, step: u32, w: u64 },
}

struct Interner {
    d: usize,
    ids: HashMap<FeatureKey, u32>,
    data: Vec<f64>,
}

impl Interner {
    fn new(d: usize) -> Self {
        Self { d, ids: HashMap::new(), data: vec![0.0; d] }
    }

    fn intern(&mut self, key: FeatureKey, make: impl FnOnce() -> Vec<f64>) -> u32 {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = (self.data.len() / self.d) as u32;
        let v = make();
        debug_assert_eq!(v.len(), self.d);
        self.data.extend_from_slice(&v);
        self.ids.insert(key, id);
        id
    }
}

impl HardTable {
    pub fn build(params: &HardMdpParams) -> Result<Self> {
        let p = params.p;
        if p > 16 {
            return Err(Error::Budget(format!("enumeration supports p <= 16, got {p}")));
        }
        let mut nodes = vec![node_from(&RoundStats::root(p), NONE, 0)];
        let mut children: Vec<u32> = Vec::new();
        let mut head = 0;
        while head < nodes.len() {
            let st = stats_of(&nodes[head], p);
            for a in 0..p {
                let child = match st.advance(params, a) {
                    Advance::Illegal | Advance::End => NONE,
                    Advance::Within(c) | Advance::NextRound(c) => {
                        if nodes.len() >= MAX_NODES {
                            return Err(Error::Budget(format!("more than {MAX_NODES} states")));
                        }
                        nodes.push(node_from(&c, head as u32, a as u8));
                        (nodes.len() - 1) as u32
                    }
                };
                children.push(child);
            }
            head += 1;
        }

        let mut interner = Interner::new(params.d);
        let mut phi_v_id = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let st = stats_of(node, p);
            let key = FeatureKey::Value {
                prefix: st.prefix.to_bits(),
                ct: st.ct_flip(),
                fix: st.fix,
                w: st.w.bits(),
            };
            phi_v_id.push(interner.intern(key, || phi_v(params, &st)));
        }
        let mut phi_q_id = Vec::with_capacity(nodes.len() * p);
        for (s, node) in nodes.iter().enumerate() {
            let st = stats_of(node, p);
            for a in 0..p {
                let id = if st.i + 1 < p {
                    match children[s * p + a] {
                        NONE => ZERO_FEATURE,
                        c => phi_v_id[c as usize],
                    }
                } else {
                    let w_new = st.w_after(a);
                    let key = FeatureKey::Completion {
                        prefix: st.prefix.to_bits(),
                        step: st.w0.hamming_unchecked(&w_new),
                        w: w_new.bits(),
                    };
                    interner.intern(key, || {
                        let scale = completion_scale(params, &st, a);
                        let mut out: Vec<f64> =
                            completion_blocks(params, &w_new).concat().into_iter().map(|v| scale * v).collect();
                        out.resize(params.d, 0.0);
                        out
                    })
                };
                phi_q_id.push(id);
            }
        }
        Ok(Self { params: *params, nodes, children, phi_v_id, phi_q_id, features: interner.data })
    }

    pub fn params(&self) -> &HardMdpParams {
        &self.params
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_features(&self) -> usize {
        self.features.len() / self.params.d
    }

    pub fn feature(&self, id: u32) -> &[f64] {
        let d = self.params.d;
        &self.features[id as usize * d..(id as usize + 1) * d]
    }

    pub fn stats(&self, s: usize) -> RoundStats {
        stats_of(&self.nodes[s], self.params.p)
    }

    pub fn child(&self, s: usize, a: usize) -> Option<usize> {
        match self.children[s * self.params.p + a] {
            NONE => None,
            c => Some(c as usize),
        }
    }

    pub fn phi_v_id(&self, s: usize) -> u32 {
        self.phi_v_id[s]
    }

    pub fn phi_q_id(&self, s: usize, a: usize) -> u32 {
        self.phi_q_id[s * self.params.p + a]
    }

    pub fn phi_v(&self, s: usize) -> &[f64] {
        self.feature(self.phi_v_id[s])
    }

    pub fn phi_q(&self, s: usize, a: usize) -> &[f64] {
        self.feature(self.phi_q_id(s, a))
    }

    pub fn actions_of(&self, s: usize) -> Vec<u8> {
        let mut out = Vec::new();
        let mut cur = s;
        while self.nodes[cur].parent != NONE {
            out.push(self.nodes[cur].action);
            cur = self.nodes[cur].parent as usize;
        }
        out.reverse();
        out
    }

    pub fn index_of(&self, actions: &[u8]) -> Option<usize> {
        let mut cur = 0;
        for &a in actions {
            if usize::from(a) >= self.params.p {
                return None;
            }
            cur = self.child(cur, usize::from(a))?;
        }
        Some(cur)
    }

    pub fn state(&self, s: usize) -> HardState {
        HardState::from_actions(&self.params, &self.actions_of(s)).expect("enumerated nodes are valid")
    }

    /// Whether the node belongs to the unreachable class for `secret`.
    pub fn is_notreach(&self, s: usize, secret: &SignVector) -> bool {
        let st = self.stats(s);
        st.k > 0 && is_close(st.w0.hamming_unchecked(secret), self.params.p)
    }

    /// Recompute features through the state-level path (for cross-checks).
    pub fn phi_v_direct(&self, s: usize) -> Vec<f64> {
        phi_v(&self.params, &self.stats(s))
    }

    pub fn phi_q_direct(&self, s: usize, a: usize) -> Vec<f64> {
        phi_q(&self.params, &self.stats(s), a)
    }
}

fn node_from(st: &RoundStats, parent: u32, action: u8) -> Node {
    Node {
        prefix: st.prefix,
        parent,
        w0: st.w0.bits() as u16,
        w: st.w.bits() as u16,
        fix: st.fix as u16,
        k: st.k as u8,
        i: st.i as u8,
        action,
        frozen: st.frozen,
    }
}

fn stats_of(n: &Node, p: usize) -> RoundStats {
    RoundStats {
        k: usize::from(n.k),
        i: usize::from(n.i),
        w0: SignVector::from_bits(u64::from(n.w0), p),
        w: SignVector::from_bits(u64::from(n.w), p),
        fix: u64::from(n.fix),
        frozen: n.frozen,
        prefix: n.prefix,
    }
}

/// One hard MDP (secret and variant fixed) over a shared enumeration.
pub struct HardInstance {
    table: Arc<HardTable>,
    secret: SignVector,
    variant: Variant,
    theta: Vec<f64>,
    /// `<feature, theta>` per interned feature id.
    ip: Vec<f64>,
}

impl HardInstance {
    pub fn new(table: Arc<HardTable>, secret: SignVector, variant: Variant) -> Result<Self> {
        let params = table.params;
        if secret.p() != params.p || !in_wstar(&secret) {
            return Err(Error::InvalidParams(format!("secret {secret} is not admissible for p = {}", params.p)));
        }
        let theta = theta_star(&params, &secret);
        let ip = (0..table.num_features() as u32).map(|id| dot(table.feature(id), &theta)).collect();
        Ok(Self { table, secret, variant, theta, ip })
    }

    pub fn table(&self) -> &HardTable {
        &self.table
    }

    pub fn secret(&self) -> SignVector {
        self.secret
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn phi_v_ip(&self, s: usize) -> f64 {
        self.ip[self.table.phi_v_id(s) as usize]
    }

    pub fn phi_q_ip(&self, s: usize, a: usize) -> f64 {
        self.ip[self.table.phi_q_id(s, a) as usize]
    }

    pub fn is_notreach(&self, s: usize) -> bool {
        self.table.is_notreach(s, &self.secret)
    }

    pub fn v_prime(&self, s: usize) -> f64 {
        v_prime(&self.table.params, &self.table.stats(s), &self.secret)
    }

    /// The optimal policy that knows the secret.
    pub fn policy(&self, s: usize) -> usize {
        let params = &self.table.params;
        if self.is_notreach(s) {
            let values: Vec<f64> = (0..params.p).map(|a| self.phi_q_ip(s, a)).collect();
            return crate::linalg::argmax(&values);
        }
        greedy_flip(&self.table.stats(s), &self.secret, params.mask())
    }

    /// Transition law at node `s`: expected reward and successor.
    pub fn law(&self, s: usize, a: usize) -> (super::Routing, f64, Succ) {
        use super::Routing;
        let params = &self.table.params;
        let p = params.p;
        let st = self.table.stats(s);
        if st.k > 0 && is_close(st.w0.hamming_unchecked(&self.secret), p) {
            let r = if self.variant.case1_uses_phi_q() { self.phi_q_ip(s, a) } else { self.phi_v_ip(s) };
            return (Routing::Unreachable, r, Succ::Bottom);
        }
        if st.i + 1 == p {
            let w_new = st.w_after(a);
            let hit = is_close(w_new.hamming_unchecked(&self.secret), p);
            if hit || st.k + 1 == params.k {
                let routing = if hit { Routing::Hit } else { Routing::LastStep };
                return (routing, round_payoff(params, &st, a, &self.secret), Succ::Bottom);
            }
        }
        let next = self.table.child(s, a).map_or(Succ::Bottom, Succ::State);
        (Routing::Continue, 0.0, next)
    }
}

/// Flip the smallest unfixed wrong-sign component, else repeat the smallest fixed action.
pub(crate) fn greedy_flip(st: &RoundStats, secret: &SignVector, mask: u64) -> usize {
    let wrong = st.w.bits() ^ secret.bits();
    let a1 = wrong & !st.fix & mask;
    if a1 != 0 {
        return a1.trailing_zeros() as usize;
    }
    if st.fix != 0 {
        return st.fix.trailing_zeros() as usize;
    }
    0
}

impl Tabular for HardInstance {
    fn num_states(&self) -> usize {
        self.table.num_nodes()
    }

    fn num_actions(&self) -> usize {
        self.table.params.p
    }

    fn expected(&self, s: usize, a: usize, succ: &mut Vec<(f64, Succ)>) -> Result<f64> {
        let (_, r, next) = self.law(s, a);
        succ.push((1.0, next));
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_recursive(params: &HardMdpParams, st: &RoundStats) -> usize {
        1 + (0..params.p)
            .map(|a| match st.advance(params, a) {
                Advance::Within(c) | Advance::NextRound(c) => count_recursive(params, &c),
                _ => 0,
            })
            .sum::<usize>()
    }

    #[test]
    fn node_count_matches_recursion() {
        for (p, k) in [(2usize, 2usize), (2, 3), (3, 2)] {
            let params = HardMdpParams::desk(p, k, Variant::V).unwrap();
            let table = HardTable::build(&params).unwrap();
            assert_eq!(table.num_nodes(), count_recursive(&params, &RoundStats::root(p)));
        }
    }

    #[test]
    fn interned_features_match_direct() {
        let params = HardMdpParams::desk(3, 2, Variant::V).unwrap();
        let table = HardTable::build(&params).unwrap();
        for s in 0..table.num_nodes() {
            assert_eq!(table.phi_v(s), table.phi_v_direct(s).as_slice());
            for a in 0..3 {
                assert_eq!(table.phi_q(s, a), table.phi_q_direct(s, a).as_slice());
            }
            assert_eq!(table.index_of(&table.actions_of(s)), Some(s));
        }
    }
}
