//! Exact rational evaluation of `g` and `f`, for certifying fixtures at small `p`.

use num_rational::Ratio;

use super::{require_wcirc, SignVector};
use crate::error::{Error, Result};

/// `g(x)` as an exact fraction.
pub fn g_exact(x: u32, p: usize) -> Result<Ratio<i128>> {
    if x as usize > p {
        return Err(Error::OutOfRange { value: i64::from(x), max: p as i64 });
    }
    let (x, p) = (i128::from(x), p as i128);
    Ok(Ratio::from_integer(1) - Ratio::new(x, p) + Ratio::new((x - 1) * x, 2 * p * p))
}

/// `f(seq)` as an exact fraction; limited to `p <= 8` and at most 8 items so
/// denominators stay within `i128`.
pub fn f_exact(seq: &[SignVector], secret: &SignVector) -> Result<Ratio<i128>> {
    let p = secret.p();
    if p > 8 || seq.len() > 8 {
        return Err(Error::Budget(format!("exact evaluation supports p <= 8 and k <= 8, got p = {p}, k = {}", seq.len())));
    }
    require_wcirc(seq, p)?;
    let mut prev = SignVector::ones(p);
    let mut prod = Ratio::from_integer(1);
    for w in seq {
        prod *= g_exact(prev.hamming_unchecked(w), p)?;
        prev = *w;
    }
    Ok(prod * g_exact(prev.hamming_unchecked(secret), p)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_matches_float() {
        assert_eq!(g_exact(1, 2).unwrap(), Ratio::new(1, 2));
        assert_eq!(g_exact(4, 4).unwrap(), Ratio::new(3, 8));
        let secret: SignVector = "--++".parse().unwrap();
        assert_eq!(f_exact(&[], &secret).unwrap(), Ratio::new(9, 16));
    }
}
