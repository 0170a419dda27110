use linplan::fixtures::{toy_q_deterministic, toy_v_realizable};
use linplan::mdp::{run_episode, AccessMode, Features, Mdp, Planner, Simulator, Succ, Tabular};
use linplan::reduction::{DelayedTable, TpPrime};
use linplan::rng::Streams;
use linplan::tensorplan::{approx_td, TensorPlan, TpConfig};
use linplan::Error;
use rand::Rng;

/// Queries a random state it has never been shown.
struct Trespasser {
    attempts: u64,
    rejected: u64,
    rng: linplan::rng::StreamRng,
}

impl<M: Mdp<State = usize>> Planner<M> for Trespasser {
    fn act(&mut self, s: &usize, _: &Features, _: bool, sim: &mut Simulator<'_, M>) -> linplan::Result<usize> {
        let unseen: Vec<usize> = (0..6).filter(|t| t != s && !sim.is_observed(t)).collect();
        if !unseen.is_empty() {
            let target = unseen[self.rng.random_range(0..unseen.len())];
            self.attempts += 1;
            match sim.simulate(&target, 0) {
                Err(Error::IllegalLocalQuery(_)) => self.rejected += 1,
                other => panic!("query at unseen state {target} answered: {other:?}"),
            }
        }
        Ok(0)
    }
}

#[test]
fn local_access_rejects_every_unseen_query() {
    let fx = toy_v_realizable();
    let streams = Streams::new(11);
    let mut planner = Trespasser { attempts: 0, rejected: 0, rng: streams.stream("adversary", 0) };
    for e in 0..200 {
        let ep = run_episode(
            &mut planner,
            &fx.mdp,
            &fx.mdp.initial_state(),
            AccessMode::Local,
            &mut streams.stream("env", e),
            streams.stream("sim", e),
        )
        .unwrap();
        assert_eq!(ep.ledger.queries_total, 0);
    }
    assert!(planner.attempts >= 200);
    assert_eq!(planner.rejected, planner.attempts);
}

#[test]
fn global_access_answers_any_state() {
    let fx = toy_v_realizable();
    let mut sim = Simulator::new(&fx.mdp, AccessMode::Global, Streams::new(1).stream("sim", 0));
    for s in 0..6 {
        sim.simulate(&s, 1).unwrap();
    }
    assert_eq!(sim.ledger().queries_total, 6);
}

/// Issues a random number of queries at the current state and remembers how many.
struct Counter {
    issued: Vec<u64>,
    rng: linplan::rng::StreamRng,
}

impl<M: Mdp<State = usize>> Planner<M> for Counter {
    fn act(&mut self, s: &usize, _: &Features, _: bool, sim: &mut Simulator<'_, M>) -> linplan::Result<usize> {
        let n = self.rng.random_range(0..20u64);
        let mut at = *s;
        for _ in 0..n {
            let out = sim.simulate(&at, self.rng.random_range(0..2))?;
            if !sim.mdp().is_terminal(&out.next) {
                at = out.next;
            }
        }
        self.issued.push(n);
        Ok(1)
    }
}

#[test]
fn ledger_counts_every_query_and_one_call_per_step() {
    let fx = toy_v_realizable();
    let streams = Streams::new(3);
    for e in 0..50 {
        let mut planner = Counter { issued: Vec::new(), rng: streams.stream("counter", e) };
        let ep = run_episode(
            &mut planner,
            &fx.mdp,
            &0,
            AccessMode::Local,
            &mut streams.stream("env", e),
            streams.stream("sim", e),
        )
        .unwrap();
        assert_eq!(ep.ledger.calls as usize, fx.mdp.horizon());
        assert_eq!(ep.steps.len(), fx.mdp.horizon());
        assert_eq!(ep.ledger.per_call, planner.issued);
        assert_eq!(ep.ledger.queries_total, planner.issued.iter().sum::<u64>());
        assert_eq!(ep.ledger.env_transitions as usize, fx.mdp.horizon());
    }
}

#[test]
fn approx_td_spends_n_queries_per_action() {
    let fx = toy_v_realizable();
    let mut sim = Simulator::new(&fx.mdp, AccessMode::Local, Streams::new(2).stream("sim", 0));
    sim.observe(&0);
    let phi = fx.mdp.phi_v(&0).unwrap();
    let deltas = approx_td(&mut sim, &0, &phi, 37).unwrap();
    assert_eq!(deltas.len(), 2);
    assert!(deltas.iter().all(|d| d.len() == 3));
    assert_eq!(sim.ledger().queries_total, 2 * 37);
    // Action 1 is deterministic: reward 0.1 and a fixed successor.
    let next = fx.mdp.phi_v(&1).unwrap();
    assert!((deltas[1][0] - 0.1).abs() < 1e-15);
    assert!((deltas[1][1] - (next[0] - phi[0])).abs() < 1e-15);
}

fn desk_config(d: usize, h: usize, a: usize) -> TpConfig {
    TpConfig::new(d, a, h, 0.3, 2.0).with_scales(1e-4, 1e-5, 1e-17)
}

#[test]
fn tensorplan_episode_is_optimal_on_the_toy() {
    let fx = toy_v_realizable();
    let streams = Streams::new(7);
    let mut planner = TensorPlan::new(desk_config(2, 3, 2), streams.stream("planner", 0)).unwrap();
    let ep = run_episode(&mut planner, &fx.mdp, &0, AccessMode::Local, &mut streams.stream("env", 0), streams.stream("sim", 0))
        .unwrap();
    assert_eq!(ep.ledger.calls, 3);
    assert!((ep.total_reward - 1.2).abs() < 1e-12, "{}", ep.total_reward);
    let st = planner.state().unwrap();
    assert!((st.theta_plus[0] - 1.5).abs() < 0.05 && st.theta_plus[1].abs() < 0.05, "{:?}", st.theta_plus);
    assert!(ep.ledger.per_call[0] > ep.ledger.per_call[1]);
}

#[test]
fn tensorplan_requires_state_features() {
    let fx = toy_q_deterministic();
    let streams = Streams::new(7);
    let mut planner = TensorPlan::new(desk_config(2, 3, 2), streams.stream("planner", 0)).unwrap();
    let err = run_episode(&mut planner, &fx.mdp, &0, AccessMode::Local, &mut streams.stream("env", 0), streams.stream("sim", 0))
        .unwrap_err();
    assert!(matches!(err, Error::InvalidParams(_)), "{err}");
}

#[test]
fn tp_prime_needs_its_memory() {
    let fx = toy_q_deterministic();
    let mut planner: TpPrime<usize> = TpPrime::new(&desk_config(2, 3, 2), Streams::new(1).stream("planner", 0)).unwrap();
    let mut sim = Simulator::new(&fx.mdp, AccessMode::Local, Streams::new(1).stream("sim", 0));
    sim.observe(&1);
    let features = fx.mdp.features(&1);
    let err = planner.act(&1, &features, false, &mut sim).unwrap_err();
    assert!(matches!(err, Error::MissingPlannerState(_)), "{err}");
    assert_eq!(sim.ledger().queries_total, 0);
}

#[test]
fn tp_prime_inner_problem_is_one_step_longer() {
    let planner: TpPrime<usize> = TpPrime::new(&desk_config(2, 3, 2), Streams::new(1).stream("planner", 0)).unwrap();
    let inner = planner.inner_config();
    assert_eq!((inner.d, inner.h, inner.a), (3, 4, 2));
    assert_eq!(inner.b, 4.0);
}

#[test]
fn delayed_table_rejects_stochastic_bases() {
    let fx = toy_v_realizable();
    let delayed = DelayedTable::new(&fx.mdp);
    let mut succ = Vec::new();
    // The start state never touches the base law.
    delayed.expected(0, 1, &mut succ).unwrap();
    assert_eq!(succ, vec![(1.0, Succ::State(delayed.pair_index(0, 1)))]);
    succ.clear();
    let err = delayed.expected(delayed.pair_index(0, 0), 0, &mut succ).unwrap_err();
    assert!(matches!(err, Error::NotDeterministic(0)), "{err}");
    succ.clear();
    delayed.expected(delayed.pair_index(0, 1), 0, &mut succ).unwrap();
}
