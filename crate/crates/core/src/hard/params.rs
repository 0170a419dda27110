use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameter-norm bound of the construction: five unit-norm blocks scaled by 63.
pub const B_HARD: f64 = 315.0;

/// Which realizability assumption the instance is built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `v*` is linear in state features.
    V,
    /// `q*` is linear in state-action features.
    Q,
    /// Both, on states reachable from the start.
    VqReach,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::V, Variant::Q, Variant::VqReach];

    /// Whether the unreachable-class reward is read through action features.
    pub fn case1_uses_phi_q(self) -> bool {
        self == Variant::Q
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::V => "v",
            Variant::Q => "q",
            Variant::VqReach => "vq-reach",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v" => Ok(Variant::V),
            "q" => Ok(Variant::Q),
            "vq-reach" | "vq" => Ok(Variant::VqReach),
            other => Err(Error::InvalidParams(format!("unknown variant {other:?}"))),
        }
    }
}

/// Dimensions of a hard MDP instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardMdpParams {
    /// Feature dimension.
    pub d: usize,
    /// Horizon.
    pub h: usize,
    /// Number of actions and hypercube dimension.
    pub p: usize,
    /// Number of rounds.
    pub k: usize,
    /// Effective horizon `k * p`.
    pub h_eff: usize,
    pub b: f64,
    /// Steps at the start of a round in which a repeated action is illegal.
    pub r: usize,
    pub variant: Variant,
}

/// `1 + p + p^2 + p^3 + p^4`, the dimension used by the tensor blocks.
pub fn block_dim(p: usize) -> usize {
    1 + p + p * p + p.pow(3) + p.pow(4)
}

impl HardMdpParams {
    /// Parameters implied by `(d, H)` with the thresholds `d >= 31`, `H >= 81`.
    pub fn derive(d: usize, h: usize, variant: Variant) -> Result<Self> {
        if d < 31 || h < 81 {
            return Err(Error::InvalidParams(format!("strict mode needs d >= 31 and H >= 81, got d = {d}, H = {h}")));
        }
        let mut x = 1usize;
        while block_dim(x + 1) <= d {
            x += 1;
        }
        let p = x.min(isqrt(h));
        let k = h / p;
        if p < 2 || k < 9 {
            return Err(Error::InvalidParams(format!("derived p = {p}, K = {k} violate p >= 2, K >= 9")));
        }
        Ok(Self { d, h, p, k, h_eff: k * p, b: B_HARD, r: p.div_ceil(4), variant })
    }

    /// Explicit small instance with `d = 1 + p + ... + p^4` and `H = K p`.
    pub fn desk(p: usize, k: usize, variant: Variant) -> Result<Self> {
        if !(2..=16).contains(&p) || k == 0 {
            return Err(Error::InvalidParams(format!("desk mode needs 2 <= p <= 16 and K >= 1, got p = {p}, K = {k}")));
        }
        let h = k * p;
        Ok(Self { d: block_dim(p), h, p, k, h_eff: h, b: B_HARD, r: p.div_ceil(4), variant })
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    /// Conditions under which the lower-bound argument does not apply.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.k < 9 {
            out.push(format!("K = {} is below 9; the lower-bound argument does not cover this instance", self.k));
        }
        out
    }

    pub fn mask(&self) -> u64 {
        if self.p >= 64 {
            u64::MAX
        } else {
            (1u64 << self.p) - 1
        }
    }
}

fn isqrt(n: usize) -> usize {
    let mut x = (n as f64).sqrt() as usize;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_examples() {
        let a = HardMdpParams::derive(31, 81, Variant::V).unwrap();
        assert_eq!((a.p, a.k, a.h_eff), (2, 40, 80));
        let b = HardMdpParams::derive(10_000, 100, Variant::V).unwrap();
        assert_eq!((b.p, b.k, b.h_eff), (9, 11, 99));
        assert!(HardMdpParams::derive(30, 81, Variant::V).is_err());
    }

    #[test]
    fn desk_dims() {
        let p = HardMdpParams::desk(2, 3, Variant::Q).unwrap();
        assert_eq!((p.d, p.h, p.r), (31, 6, 1));
        assert_eq!(HardMdpParams::desk(8, 1, Variant::V).unwrap().r, 2);
        assert_eq!(p.warnings().len(), 1);
        assert!(HardMdpParams::desk(1, 3, Variant::V).is_err());
    }
}
