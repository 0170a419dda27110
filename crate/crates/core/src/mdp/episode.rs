use super::{AccessMode, Features, Mdp, QueryLedger, Simulator};
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// An online planner: called once per episode step with the current state.
pub trait Planner<M: Mdp> {
    fn act(
        &mut self,
        s: &M::State,
        features: &Features,
        episode_start: bool,
        sim: &mut Simulator<'_, M>,
    ) -> Result<usize>;
}

/// Wraps a query-free policy as a planner.
pub struct FnPlanner<F>(pub F);

impl<M: Mdp, F: FnMut(&M::State) -> usize> Planner<M> for FnPlanner<F> {
    fn act(&mut self, s: &M::State, _: &Features, _: bool, _: &mut Simulator<'_, M>) -> Result<usize> {
        Ok((self.0)(s))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeStep<S> {
    pub state: S,
    pub action: usize,
    pub reward: f64,
}

#[derive(Clone, Debug)]
pub struct Episode<S> {
    pub steps: Vec<EpisodeStep<S>>,
    pub total_reward: f64,
    pub ledger: QueryLedger,
}

/// Run one episode of `H` planner calls from `s0`.
///
/// `env_rng` drives the environment transitions; `sim_rng` drives the planner's simulator.
pub fn run_episode<M: Mdp, P: Planner<M> + ?Sized>(
    planner: &mut P,
    mdp: &M,
    s0: &M::State,
    access: AccessMode,
    env_rng: &mut StreamRng,
    sim_rng: StreamRng,
) -> Result<Episode<M::State>> {
    let mut sim = Simulator::new(mdp, access, sim_rng);
    let mut state = s0.clone();
    let mut steps = Vec::with_capacity(mdp.horizon());
    let mut total = 0.0;
    for t in 0..mdp.horizon() {
        sim.observe(&state);
        sim.ledger_mut().begin_call();
        let features = mdp.features(&state);
        let action = planner.act(&state, &features, t == 0, &mut sim)?;
        mdp.check_action(action).map_err(|_| Error::ActionOutOfRange {
            action,
            num_actions: mdp.num_actions(),
        })?;
        let out = super::simulate(mdp, &state, action, env_rng)?;
        sim.ledger_mut().env_transitions += 1;
        total += out.reward;
        steps.push(EpisodeStep { state, action, reward: out.reward });
        state = out.next;
    }
    Ok(Episode { steps, total_reward: total, ledger: sim.into_ledger() })
}
