use super::{FeatureKind, Mdp, Outcome, Reward, Succ, Tabular};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
struct Entry {
    reward: Reward,
    next: Vec<(f64, Succ)>,
}

/// An explicit finite MDP, used for hand-built fixtures.
///
/// States are indices `0..n`; index `n` is the terminal state. State 0 is initial.
#[derive(Clone, Debug)]
pub struct TableMdp {
    num_actions: usize,
    horizon: usize,
    dim: usize,
    kind: FeatureKind,
    stages: Vec<usize>,
    phi_v: Vec<Vec<f64>>,
    phi_q: Vec<Vec<Vec<f64>>>,
    entries: Vec<Vec<Entry>>,
}

/// Builder for [`TableMdp`]; states must be added in non-decreasing stage order.
#[derive(Clone, Debug)]
pub struct TableMdpBuilder {
    inner: TableMdp,
}

impl TableMdpBuilder {
    pub fn new(num_actions: usize, horizon: usize, dim: usize, kind: FeatureKind) -> Self {
        Self {
            inner: TableMdp {
                num_actions,
                horizon,
                dim,
                kind,
                stages: Vec::new(),
                phi_v: Vec::new(),
                phi_q: Vec::new(),
                entries: Vec::new(),
            },
        }
    }

    /// Add a state; returns its index.
    pub fn state(&mut self, stage: usize, phi_v: Vec<f64>) -> usize {
        let t = &mut self.inner;
        t.stages.push(stage);
        t.phi_v.push(phi_v);
        t.phi_q.push(vec![vec![0.0; t.dim]; t.num_actions]);
        t.entries.push(Vec::new());
        t.stages.len() - 1
    }

    pub fn action_features(&mut self, s: usize, a: usize, phi: Vec<f64>) -> &mut Self {
        self.inner.phi_q[s][a] = phi;
        self
    }

    /// Define action `a` at state `s`. Successor `None` is the terminal state.
    pub fn transition(&mut self, s: usize, a: usize, reward: Reward, next: &[(f64, Option<usize>)]) -> &mut Self {
        let entries = &mut self.inner.entries[s];
        if entries.len() <= a {
            entries.resize(a + 1, Entry { reward: Reward::Deterministic(f64::NAN), next: Vec::new() });
        }
        entries[a] = Entry {
            reward,
            next: next
                .iter()
                .map(|&(p, n)| (p, n.map_or(Succ::Bottom, Succ::State)))
                .collect(),
        };
        self
    }

    pub fn build(self) -> Result<TableMdp> {
        let t = self.inner;
        let n = t.stages.len();
        if n == 0 || t.stages[0] != 0 {
            return Err(Error::InvalidParams("first state must be at stage 0".into()));
        }
        for s in 0..n {
            if s > 0 && t.stages[s] < t.stages[s - 1] {
                return Err(Error::InvalidParams(format!("state {s} added out of stage order")));
            }
            if t.stages[s] >= t.horizon {
                return Err(Error::InvalidParams(format!("state {s} beyond the horizon")));
            }
            for v in std::iter::once(&t.phi_v[s]).chain(&t.phi_q[s]) {
                if v.len() != t.dim {
                    return Err(Error::DimensionMismatch { expected: t.dim, got: v.len() });
                }
            }
            if t.entries[s].len() != t.num_actions {
                return Err(Error::InvalidParams(format!("state {s} lacks some actions")));
            }
            for (a, e) in t.entries[s].iter().enumerate() {
                let r = e.reward.mean();
                if !(0.0..=1.0).contains(&r) {
                    return Err(Error::InvalidParams(format!("reward of ({s},{a}) outside [0,1]")));
                }
                let total: f64 = e.next.iter().map(|x| x.0).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParams(format!("probabilities of ({s},{a}) sum to {total}")));
                }
                for &(_, next) in &e.next {
                    if let Succ::State(j) = next {
                        if j >= n || j <= s || t.stages[j] != t.stages[s] + 1 {
                            return Err(Error::NotStageOrdered { from: s, to: j });
                        }
                    }
                }
            }
        }
        Ok(t)
    }
}

impl TableMdp {
    pub fn num_states(&self) -> usize {
        self.stages.len()
    }

    pub fn bottom(&self) -> usize {
        self.stages.len()
    }

    /// Successor of a deterministic transition, `None` for the terminal state.
    pub fn deterministic_next(&self, s: usize, a: usize) -> Result<Option<usize>> {
        match self.entries[s][a].next.as_slice() {
            [(_, Succ::Bottom)] => Ok(None),
            [(_, Succ::State(j))] => Ok(Some(*j)),
            _ => Err(Error::NotDeterministic(s)),
        }
    }
}

impl Tabular for TableMdp {
    fn num_states(&self) -> usize {
        self.stages.len()
    }

    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn expected(&self, s: usize, a: usize, succ: &mut Vec<(f64, Succ)>) -> Result<f64> {
        let e = &self.entries[s][a];
        succ.extend_from_slice(&e.next);
        Ok(e.reward.mean())
    }
}

impl Mdp for TableMdp {
    type State = usize;

    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn feature_kind(&self) -> FeatureKind {
        self.kind
    }

    fn initial_state(&self) -> usize {
        0
    }

    fn terminal_state(&self) -> usize {
        self.bottom()
    }

    fn is_terminal(&self, s: &usize) -> bool {
        *s >= self.bottom()
    }

    fn stage(&self, s: &usize) -> usize {
        if self.is_terminal(s) {
            self.horizon
        } else {
            self.stages[*s]
        }
    }

    fn phi_v(&self, s: &usize) -> Option<Vec<f64>> {
        if !self.kind.has_state() {
            return None;
        }
        Some(if self.is_terminal(s) { vec![0.0; self.dim] } else { self.phi_v[*s].clone() })
    }

    fn phi_q(&self, s: &usize, a: usize) -> Option<Vec<f64>> {
        if !self.kind.has_action() {
            return None;
        }
        Some(if self.is_terminal(s) { vec![0.0; self.dim] } else { self.phi_q[*s][a].clone() })
    }

    fn outcomes(&self, s: &usize, a: usize) -> Result<Vec<Outcome<usize>>> {
        self.check_action(a)?;
        let e = &self.entries[*s][a];
        Ok(e.next
            .iter()
            .map(|&(prob, next)| Outcome {
                prob,
                reward: e.reward,
                next: match next {
                    Succ::Bottom => self.bottom(),
                    Succ::State(j) => j,
                },
            })
            .collect())
    }

    fn enumeration(&self) -> Option<&dyn Tabular> {
        Some(self)
    }
}
