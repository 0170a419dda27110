use std::fmt;
use std::hash::{Hash, Hasher};

use super::params::HardMdpParams;
use crate::error::{Error, Result};
use crate::game::{g_unchecked, SignVector};

/// Per-state summary of the current round; everything transitions and features need.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundStats {
    pub k: usize,
    pub i: usize,
    /// Weight at the start of the round.
    pub w0: SignVector,
    /// Current weight.
    pub w: SignVector,
    /// Bit mask of fixed components.
    pub fix: u64,
    pub frozen: bool,
    /// Product of `g` over the distances between consecutive round-start weights.
    pub prefix: f64,
}

/// Child of a state along the action tree, ignoring the secret.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Advance {
    /// Repeated action inside the critical prefix of the round.
    Illegal,
    Within(RoundStats),
    NextRound(RoundStats),
    /// The step completes the last round; there is no child.
    End,
}

impl RoundStats {
    pub fn root(p: usize) -> Self {
        Self { k: 0, i: 0, w0: SignVector::ones(p), w: SignVector::ones(p), fix: 0, frozen: false, prefix: 1.0 }
    }

    pub fn stage(&self, p: usize) -> usize {
        self.k * p + self.i
    }

    /// Number of components flipped so far in the round.
    pub fn ct_flip(&self) -> u32 {
        self.w0.hamming_unchecked(&self.w)
    }

    /// Weight after taking `a`: component `a` flipped unless the round is frozen or `a` repeats.
    pub fn w_after(&self, a: usize) -> SignVector {
        if self.frozen || self.fix >> a & 1 == 1 {
            self.w
        } else {
            self.w.flipped(a)
        }
    }

    /// Error counts `(e_fix, e_notfix)` relative to `secret`.
    pub fn error_counts(&self, secret: &SignVector, mask: u64) -> (u32, u32) {
        let wrong = self.w.bits() ^ secret.bits();
        ((wrong & self.fix).count_ones(), (wrong & !self.fix & mask).count_ones())
    }

    pub fn advance(&self, params: &HardMdpParams, a: usize) -> Advance {
        let p = params.p;
        let repeat = self.fix >> a & 1 == 1;
        if repeat && !self.frozen && self.i < params.r {
            return Advance::Illegal;
        }
        let (w, fix, frozen) = if self.frozen || repeat {
            (self.w, params.mask(), true)
        } else {
            (self.w.flipped(a), self.fix | 1 << a, false)
        };
        if self.i + 1 < p {
            return Advance::Within(Self { i: self.i + 1, w, fix, frozen, ..*self });
        }
        if self.k + 1 == params.k {
            return Advance::End;
        }
        let prefix = self.prefix * g_unchecked(self.w0.hamming_unchecked(&w), p);
        Advance::NextRound(Self { k: self.k + 1, i: 0, w0: w, w, fix: 0, frozen: false, prefix })
    }
}

/// A node of the action tree: the defining action sequence plus cached statistics.
#[derive(Clone, Debug)]
pub struct NodeState {
    actions: Vec<u8>,
    stats: RoundStats,
    /// Completed round-start weights `w_1 .. w_k`.
    starts: Vec<SignVector>,
}

impl NodeState {
    pub fn actions(&self) -> &[u8] {
        &self.actions
    }

    pub fn stats(&self) -> &RoundStats {
        &self.stats
    }

    pub fn starts(&self) -> &[SignVector] {
        &self.starts
    }
}

/// A state of the hard MDP; equality and hashing use the action sequence only.
#[derive(Clone, Debug)]
pub enum HardState {
    Bottom,
    Node(NodeState),
}

impl PartialEq for HardState {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (HardState::Bottom, HardState::Bottom) => true,
            (HardState::Node(a), HardState::Node(b)) => a.actions == b.actions,
            _ => false,
        }
    }
}

impl Eq for HardState {}

impl Hash for HardState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            HardState::Bottom => state.write_u8(0),
            HardState::Node(n) => {
                state.write_u8(1);
                n.actions.hash(state);
            }
        }
    }
}

impl HardState {
    pub fn root(params: &HardMdpParams) -> Self {
        HardState::Node(NodeState { actions: Vec::new(), stats: RoundStats::root(params.p), starts: Vec::new() })
    }

    pub fn node(&self) -> Option<&NodeState> {
        match self {
            HardState::Bottom => None,
            HardState::Node(n) => Some(n),
        }
    }

    pub fn stats(&self) -> Option<&RoundStats> {
        self.node().map(|n| &n.stats)
    }

    pub fn is_bottom(&self) -> bool {
        matches!(self, HardState::Bottom)
    }

    /// Child along the action tree, or `Bottom` for an illegal repeat or the end of the tree.
    pub fn child(&self, params: &HardMdpParams, a: usize) -> HardState {
        let HardState::Node(n) = self else { return HardState::Bottom };
        let mut actions = n.actions.clone();
        actions.push(a as u8);
        match n.stats.advance(params, a) {
            Advance::Illegal | Advance::End => HardState::Bottom,
            Advance::Within(stats) => HardState::Node(NodeState { actions, stats, starts: n.starts.clone() }),
            Advance::NextRound(stats) => {
                let mut starts = n.starts.clone();
                starts.push(stats.w0);
                HardState::Node(NodeState { actions, stats, starts })
            }
        }
    }

    /// Replay an action sequence from the root.
    pub fn from_actions(params: &HardMdpParams, actions: &[u8]) -> Result<Self> {
        let mut s = Self::root(params);
        for &a in actions {
            if usize::from(a) >= params.p {
                return Err(Error::ActionOutOfRange { action: usize::from(a), num_actions: params.p });
            }
            s = s.child(params, usize::from(a));
            if s.is_bottom() {
                return Err(Error::InvalidParams(format!("action sequence {actions:?} leaves the tree")));
            }
        }
        Ok(s)
    }

    /// Parse the text id produced by `Display`.
    pub fn parse(params: &HardMdpParams, id: &str) -> Result<Self> {
        match id {
            "bot" => return Ok(HardState::Bottom),
            "()" => return Ok(Self::root(params)),
            _ => {}
        }
        let mut actions = Vec::new();
        for (round, part) in id.split('|').enumerate() {
            if part.is_empty() {
                continue;
            }
            let items: Vec<&str> = part.split('.').collect();
            if items.len() > params.p || (round > 0 && actions.len() != round * params.p) {
                return Err(Error::InvalidParams(format!("malformed state id {id:?}")));
            }
            for item in items {
                actions.push(item.parse::<u8>().map_err(|_| Error::InvalidParams(format!("malformed state id {id:?}")))?);
            }
        }
        let s = Self::from_actions(params, &actions)?;
        if s.to_string_with(params.p) != id {
            return Err(Error::InvalidParams(format!("non-canonical state id {id:?}")));
        }
        Ok(s)
    }

    /// Text id: actions within a round joined by `.`, rounds separated by `|`.
    pub fn to_string_with(&self, p: usize) -> String {
        match self {
            HardState::Bottom => "bot".into(),
            HardState::Node(n) => format_actions(&n.actions, p),
        }
    }
}

/// Canonical text form of an action sequence; the root is `()`.
pub fn format_actions(actions: &[u8], p: usize) -> String {
    if actions.is_empty() {
        return "()".into();
    }
    let mut out = String::new();
    for (j, a) in actions.iter().enumerate() {
        if j > 0 {
            out.push(if j % p == 0 { '|' } else { '.' });
        }
        out.push_str(&a.to_string());
    }
    if actions.len() % p == 0 {
        out.push('|');
    }
    out
}

impl fmt::Display for HardState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HardState::Bottom => f.write_str("bot"),
            HardState::Node(n) => f.write_str(&format_actions(&n.actions, n.stats.w.p())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hard::params::Variant;

    #[test]
    fn ids_roundtrip() {
        let params = HardMdpParams::desk(2, 3, Variant::V).unwrap();
        for actions in [vec![], vec![1], vec![0, 1], vec![0, 1, 1], vec![1, 0, 0, 1, 1]] {
            let s = HardState::from_actions(&params, &actions).unwrap();
            let id = s.to_string();
            assert_eq!(HardState::parse(&params, &id).unwrap(), s, "{id}");
        }
        assert_eq!(HardState::from_actions(&params, &[0, 1]).unwrap().to_string(), "0.1|");
        assert!(HardState::parse(&params, "0.1.1").is_err());
    }

    #[test]
    fn repeats_freeze_or_kill() {
        let p4 = HardMdpParams::desk(4, 2, Variant::V).unwrap();
        let s = HardState::from_actions(&p4, &[2, 2]).unwrap();
        let st = s.stats().unwrap();
        assert!(st.frozen && st.fix == 0b1111 && st.ct_flip() == 1);
        let p8 = HardMdpParams::desk(8, 1, Variant::V).unwrap();
        assert!(HardState::from_actions(&p8, &[2, 2]).is_err());
        assert!(HardState::from_actions(&p8, &[2, 3, 2]).is_ok());
    }
}
