//! Small hand-built and generated MDPs with known optimal values.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::mdp::{dp_solve_table, FeatureKind, Reward, Succ, TableMdp, TableMdpBuilder, Tabular};
use crate::rng::StreamRng;

/// An MDP together with a parameter that realizes its optimal values.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub mdp: TableMdp,
    pub theta: Vec<f64>,
    /// Norm bound of the class the fixture belongs to.
    pub b: f64,
}

fn det(r: f64) -> Reward {
    Reward::Deterministic(r)
}

/// A stochastic `v*`-realizable MDP with `d = 2`, `H = 3`, `A = 2` and `v*(s0) = 1.2`.
///
/// The first feature coordinate is `v*/1.5` and `theta* = (1.5, 0)`; the second
/// coordinate is a distractor.
pub fn toy_v_realizable() -> Fixture {
    let phi = |v: f64, z: f64| vec![v / 1.5, z];
    let mut m = TableMdpBuilder::new(2, 3, 2, FeatureKind::State);
    let s0 = m.state(0, phi(1.2, 0.55));
    let a = m.state(1, phi(1.0, 0.3));
    let b = m.state(1, phi(1.0, -0.5));
    let c = m.state(2, phi(0.6, 0.7));
    let c2 = m.state(2, phi(0.6, -0.6));
    let e = m.state(2, phi(0.9, 0.2));
    m.transition(s0, 0, det(0.2), &[(0.5, Some(a)), (0.5, Some(b))])
        .transition(s0, 1, det(0.1), &[(1.0, Some(a))])
        .transition(a, 0, det(0.3), &[(1.0, Some(c))])
        .transition(a, 1, det(0.1), &[(1.0, Some(e))])
        .transition(b, 0, det(0.4), &[(0.5, Some(c)), (0.5, Some(c2))])
        .transition(b, 1, det(0.1), &[(1.0, Some(e))])
        .transition(c, 0, det(0.6), &[(1.0, None)])
        .transition(c, 1, det(0.2), &[(1.0, None)])
        .transition(c2, 0, det(0.0), &[(1.0, None)])
        .transition(c2, 1, det(0.6), &[(1.0, None)])
        .transition(e, 0, det(0.1), &[(1.0, None)])
        .transition(e, 1, det(0.9), &[(1.0, None)]);
    Fixture {
        name: "toy-v".into(),
        mdp: m.build().expect("toy fixture is well formed"),
        theta: vec![1.5, 0.0],
        b: 2.0,
    }
}

/// A deterministic `q*`-realizable MDP with `d = 2`, `H = 3`, `A = 2` and `v*(s0) = 1.1`.
///
/// The first action-feature coordinate is `q*/1.25` and `theta* = (1.25, 0)`.
pub fn toy_q_deterministic() -> Fixture {
    let phi = |q: f64, z: f64| vec![q / 1.25, z];
    let mut m = TableMdpBuilder::new(2, 3, 2, FeatureKind::Action);
    let s0 = m.state(0, vec![0.0; 2]);
    let x = m.state(1, vec![0.0; 2]);
    let y = m.state(1, vec![0.0; 2]);
    let u = m.state(2, vec![0.0; 2]);
    let w = m.state(2, vec![0.0; 2]);
    m.transition(s0, 0, det(0.2), &[(1.0, Some(x))])
        .transition(s0, 1, det(0.4), &[(1.0, Some(y))])
        .transition(x, 0, det(0.3), &[(1.0, Some(u))])
        .transition(x, 1, det(0.1), &[(1.0, Some(w))])
        .transition(y, 0, det(0.0), &[(1.0, Some(u))])
        .transition(y, 1, det(0.2), &[(1.0, Some(w))])
        .transition(u, 0, det(0.6), &[(1.0, None)])
        .transition(u, 1, det(0.1), &[(1.0, None)])
        .transition(w, 0, det(0.2), &[(1.0, None)])
        .transition(w, 1, det(0.4), &[(1.0, None)]);
    m.action_features(s0, 0, phi(1.1, 0.3))
        .action_features(s0, 1, phi(1.0, -0.4))
        .action_features(x, 0, phi(0.9, 0.5))
        .action_features(x, 1, phi(0.5, -0.2))
        .action_features(y, 0, phi(0.6, 0.6))
        .action_features(y, 1, phi(0.6, -0.7))
        .action_features(u, 0, phi(0.6, 0.1))
        .action_features(u, 1, phi(0.1, 0.9))
        .action_features(w, 0, phi(0.2, -0.3))
        .action_features(w, 1, phi(0.4, 0.5));
    Fixture {
        name: "toy-q".into(),
        mdp: m.build().expect("toy fixture is well formed"),
        theta: vec![1.25, 0.0],
        b: 2.0,
    }
}

/// A chain with zero rewards and the same features everywhere.
pub fn zero_reward(d: usize, h: usize, a: usize) -> Result<Fixture> {
    if d == 0 || h == 0 || a == 0 {
        return Err(Error::InvalidParams("d, H and A must be positive".into()));
    }
    let phi = vec![1.0 / (d as f64).sqrt(); d];
    let mut m = TableMdpBuilder::new(a, h, d, FeatureKind::Both);
    let states: Vec<usize> = (0..h).map(|t| m.state(t, phi.clone())).collect();
    for t in 0..h {
        let next = (t + 1 < h).then(|| states[t + 1]);
        for act in 0..a {
            m.transition(states[t], act, det(0.0), &[(1.0, next)]).action_features(states[t], act, phi.clone());
        }
    }
    Ok(Fixture { name: "zero".into(), mdp: m.build()?, theta: vec![0.0; d], b: 1.0 })
}

/// Which optimal value function a generated fixture realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Realize {
    /// State features realize `v*`; transitions may branch.
    Value,
    /// Action features realize `q*`; transitions are deterministic.
    ActionValue,
}

/// A layered random MDP with `width` states per stage whose features realize `v*` or `q*`.
///
/// `theta* = (H, 0, ..., 0)` and the first feature coordinate is the optimal value
/// divided by `H`; the remaining coordinates are random with the total norm kept below one.
pub fn random_realizable(d: usize, h: usize, a: usize, width: usize, realize: Realize, rng: &mut StreamRng) -> Result<Fixture> {
    if d == 0 || h == 0 || a == 0 || width == 0 {
        return Err(Error::InvalidParams("d, H, A and width must be positive".into()));
    }
    let kind = match realize {
        Realize::Value => FeatureKind::State,
        Realize::ActionValue => FeatureKind::Action,
    };
    // First pass: structure and rewards.
    let mut m = TableMdpBuilder::new(a, h, d, kind);
    let layers: Vec<Vec<usize>> =
        (0..h).map(|t| (0..if t == 0 { 1 } else { width }).map(|_| m.state(t, vec![0.0; d])).collect()).collect();
    for t in 0..h {
        for &s in &layers[t] {
            for act in 0..a {
                let r = det((rng.random::<f64>() * 100.0).round() / 100.0);
                if t + 1 == h {
                    m.transition(s, act, r, &[(1.0, None)]);
                    continue;
                }
                let next = &layers[t + 1];
                let j = next[rng.random_range(0..next.len())];
                if realize == Realize::Value && next.len() > 1 && rng.random::<bool>() {
                    let k = next[rng.random_range(0..next.len())];
                    m.transition(s, act, r, &[(0.5, Some(j)), (0.5, Some(k))]);
                } else {
                    m.transition(s, act, r, &[(1.0, Some(j))]);
                }
            }
        }
    }
    let skeleton = m.clone().build()?;
    let values = dp_solve_table(&skeleton)?;
    let scale = h as f64;
    let mut feature = |value: f64| {
        let mut v = vec![0.0; d];
        v[0] = value / scale;
        if d > 1 {
            let mut z: Vec<f64> = (1..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let room = (1.0 - v[0] * v[0]).max(0.0).sqrt() * 0.9;
            let n = norm(&z);
            if n > 0.0 {
                let shrink = room * rng.random::<f64>() / n;
                z.iter_mut().for_each(|x| *x *= shrink);
            }
            v[1..].copy_from_slice(&z);
        }
        v
    };
    // Second pass: attach features now that the optimal values are known.
    let mut m = TableMdpBuilder::new(a, h, d, kind);
    for t in 0..h {
        for &s in &layers[t] {
            let phi_v = if realize == Realize::Value { feature(values.v[s]) } else { vec![0.0; d] };
            let idx = m.state(t, phi_v);
            debug_assert_eq!(idx, s);
        }
    }
    for s in 0..skeleton.num_states() {
        for act in 0..a {
            let mut succ = Vec::new();
            let r = Tabular::expected(&skeleton, s, act, &mut succ)?;
            let next: Vec<(f64, Option<usize>)> = succ
                .iter()
                .map(|&(p, n)| (p, match n {
                    Succ::Bottom => None,
                    Succ::State(j) => Some(j),
                }))
                .collect();
            m.transition(s, act, det(r), &next);
            if realize == Realize::ActionValue {
                m.action_features(s, act, feature(values.q_at(s, act)));
            }
        }
    }
    let mut theta = vec![0.0; d];
    theta[0] = scale;
    let name = match realize {
        Realize::Value => "random-v",
        Realize::ActionValue => "random-q",
    };
    Ok(Fixture { name: name.into(), mdp: m.build()?, theta, b: scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::mdp::{policy_values, Mdp};
    use crate::rng::Streams;

    #[test]
    fn toy_v_values_and_realization() {
        let f = toy_v_realizable();
        let vt = dp_solve_table(&f.mdp).unwrap();
        let expect = [1.2, 1.0, 1.0, 0.6, 0.6, 0.9];
        for (s, want) in expect.iter().enumerate() {
            assert!((vt.v[s] - want).abs() < 1e-12);
            let phi = f.mdp.phi_v(&s).unwrap();
            assert!((dot(&phi, &f.theta) - want).abs() < 1e-12);
            assert!(norm(&phi) <= 1.0);
        }
        // Always taking the worse action.
        let worst = policy_values(&f.mdp, |s| [1, 1, 1, 1, 0, 0][s]).unwrap();
        assert!((worst[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn toy_q_values_and_realization() {
        let f = toy_q_deterministic();
        let vt = dp_solve_table(&f.mdp).unwrap();
        assert!((vt.v[0] - 1.1).abs() < 1e-12);
        for s in 0..f.mdp.num_states() {
            assert!(f.mdp.deterministic_next(s, 0).is_ok());
            for a in 0..2 {
                let phi = f.mdp.phi_q(&s, a).unwrap();
                assert!((dot(&phi, &f.theta) - vt.q_at(s, a)).abs() < 1e-12);
                assert!(norm(&phi) <= 1.0);
            }
        }
    }

    #[test]
    fn generated_fixtures_are_realizable() {
        let streams = Streams::new(7);
        for (i, realize) in [Realize::Value, Realize::ActionValue].into_iter().enumerate() {
            let f = random_realizable(3, 4, 2, 3, realize, &mut streams.stream("fixture", i as u64)).unwrap();
            let vt = dp_solve_table(&f.mdp).unwrap();
            for s in 0..f.mdp.num_states() {
                match realize {
                    Realize::Value => {
                        let phi = f.mdp.phi_v(&s).unwrap();
                        assert!((dot(&phi, &f.theta) - vt.v[s]).abs() < 1e-12);
                        assert!(norm(&phi) <= 1.0);
                    }
                    Realize::ActionValue => {
                        for a in 0..2 {
                            let phi = f.mdp.phi_q(&s, a).unwrap();
                            assert!((dot(&phi, &f.theta) - vt.q_at(s, a)).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }
}
