//! Security-bound formulas for the product and two-round games.
//!
//! All bounds are evaluated in 64-bit floats; exact rational quantities from
//! the brute-force side are compared against them through [`leq_bound`],
//! which rounds the float up before the comparison so a true inequality is
//! never rejected.

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("field order must be at least 2, got {0}")]
    OrderTooSmall(f64),
    #[error("player count must be at least 1")]
    NoPlayers,
    #[error("cumulative intersection weight must be non-negative, got {0}")]
    NegativeIntersection(f64),
    #[error("threshold must satisfy 0 <= s <= mu (mu = {mu}, s = {s})")]
    ThresholdOutOfRange { mu: f64, s: f64 },
}

/// Bound on the average probability of m events whose pairwise intersections
/// have cumulative weight c: (1 + sqrt(1 + 4c)) / (2m).
pub fn cauchy_schwarz_bound(m: u64, c: f64) -> Result<f64, BoundError> {
    if m == 0 {
        return Err(BoundError::NoPlayers);
    }
    if !(c >= 0.0) {
        return Err(BoundError::NegativeIntersection(c));
    }
    Ok((1.0 + (1.0 + 4.0 * c).sqrt()) / (2.0 * m as f64))
}

/// The sequence c_1..c_m bounding the classical value of the product game.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSeries {
    /// Field order (exact for powers of two up to 2^1023).
    pub q: f64,
    /// terms[k-1] = c_k.
    pub terms: Vec<f64>,
}

impl BoundSeries {
    pub fn last(&self) -> f64 {
        *self.terms.last().expect("series is non-empty")
    }
}

/// Recursive bound: c_1 = 1/q, c_m = (1 + sqrt(1 + 4 q (q-1) c_{m-1})) / (2q).
pub fn recursive_bound(q: f64, m: usize) -> Result<BoundSeries, BoundError> {
    if !(q >= 2.0) {
        return Err(BoundError::OrderTooSmall(q));
    }
    if m == 0 {
        return Err(BoundError::NoPlayers);
    }
    let mut terms = Vec::with_capacity(m);
    let mut c = 1.0 / q;
    terms.push(c);
    for _ in 2..=m {
        // multiply q * c first: q * (q - 1) overflows f64 for q near 2^512
        c = (1.0 + (1.0 + 4.0 * (q * c) * (q - 1.0)).sqrt()) / (2.0 * q);
        terms.push(c);
    }
    debug_assert!(terms.iter().all(|&t| t < 1.0), "bound is always non-trivial");
    Ok(BoundSeries { q, terms })
}

/// Recursive bound for q = 2^n.
pub fn recursive_bound_pow2(n_bits: u32, m: usize) -> Result<BoundSeries, BoundError> {
    assert!(n_bits >= 1 && n_bits <= 1023);
    recursive_bound((n_bits as f64).exp2(), m)
}

/// Simpler relaxation for q = 2^n: c_1 = 2^-n, c_m = 2^-(n+1) + sqrt(c_{m-1}).
pub fn simplified_bound(n_bits: u32, m: usize) -> Result<BoundSeries, BoundError> {
    if n_bits == 0 {
        return Err(BoundError::OrderTooSmall(1.0));
    }
    if m == 0 {
        return Err(BoundError::NoPlayers);
    }
    let mut terms = Vec::with_capacity(m);
    let mut c = (-(n_bits as f64)).exp2();
    terms.push(c);
    for _ in 2..=m {
        c = (-(n_bits as f64 + 1.0)).exp2() + c.sqrt();
        terms.push(c);
    }
    Ok(BoundSeries {
        q: (n_bits as f64).exp2(),
        terms,
    })
}

/// Lower-tail bound for a sum of independent 0/1 variables with expectation
/// mu: Pr[X < s] < exp(-(sqrt(mu) - s/sqrt(mu))^2 / 2). Demanding s <= mu
/// keeps the bound form valid.
pub fn chernoff_tail(mu: f64, s: f64) -> Result<f64, BoundError> {
    if !(mu > 0.0) || !(s >= 0.0) || s > mu {
        return Err(BoundError::ThresholdOutOfRange { mu, s });
    }
    let root = mu.sqrt() - s / mu.sqrt();
    Ok((-0.5 * root * root).exp())
}

/// Classical and quantum values of the two-round game, with the binding
/// excesses they imply for the commitment (epsilon = 2 * value - 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshnBounds {
    pub classical_value: f64,
    pub quantum_value: f64,
    pub classical_binding_epsilon: f64,
    pub quantum_binding_epsilon: f64,
}

pub fn chshn_bounds(n_bits: u32) -> ChshnBounds {
    let n = n_bits as f64;
    ChshnBounds {
        classical_value: 0.5 + (-(n + 1.0)).exp2(),
        quantum_value: 0.5 + (-(n + 1.0) / 2.0).exp2(),
        classical_binding_epsilon: (-n).exp2(),
        quantum_binding_epsilon: ((1.0 - n) / 2.0).exp2(),
    }
}

/// Exact-rational <= float comparison with the float rounded up first, so a
/// true inequality is never falsely rejected by float error.
pub fn leq_bound(value: Ratio<u64>, bound: f64) -> bool {
    let padded = bound + bound.abs() * 1e-12;
    let Some(bound_exact) = BigRational::from_float(padded) else {
        return false;
    };
    let value_exact = BigRational::new(
        BigInt::from(*value.numer()),
        BigInt::from(*value.denom()),
    );
    value_exact <= bound_exact
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn cauchy_schwarz_examples() {
        assert_eq!(cauchy_schwarz_bound(1, 0.0).unwrap(), 1.0);
        close(
            cauchy_schwarz_bound(2, 1.0).unwrap(),
            (1.0 + 5f64.sqrt()) / 4.0,
            1e-15,
        );
        for m in 1..10u64 {
            close(cauchy_schwarz_bound(m, 0.0).unwrap(), 1.0 / m as f64, 1e-15);
        }
        assert!(cauchy_schwarz_bound(0, 0.0).is_err());
        assert!(cauchy_schwarz_bound(2, -1.0).is_err());
    }

    #[test]
    fn recursive_bound_examples() {
        let s = recursive_bound(2.0, 2).unwrap();
        assert_eq!(s.terms[0], 0.5);
        close(s.terms[1], (1.0 + 5f64.sqrt()) / 4.0, 1e-15);

        // the experimental operating point: n = 512, m + 1 = 6 rounds
        let s = recursive_bound_pow2(512, 5).unwrap();
        assert!(s.last() > 2.2e-10 && s.last() < 2.4e-10, "{}", s.last());
        close(s.last(), 2f64.powi(-32), 1e-12 * 2f64.powi(-32));
    }

    #[test]
    fn recursive_bound_nontrivial_and_monotone() {
        for q in [2.0, 4.0, 8.0, 256.0] {
            let s = recursive_bound(q, 8).unwrap();
            for w in s.terms.windows(2) {
                assert!(w[1] >= w[0]);
            }
            assert!(s.terms.iter().all(|&c| c < 1.0));
        }
    }

    #[test]
    fn simplified_bound_examples() {
        let s = simplified_bound(2, 2).unwrap();
        close(s.terms[1], 0.625, 1e-15);
        for n in 1..8u32 {
            assert_eq!(simplified_bound(n, 1).unwrap().last(), (-(n as f64)).exp2());
        }
        let s = simplified_bound(512, 5).unwrap();
        assert!(s.last() > 2.2e-10 && s.last() < 2.4e-10);
    }

    #[test]
    fn simplified_dominates_recursive() {
        for n in [1u32, 2, 3, 8, 32, 128, 512] {
            let rec = recursive_bound_pow2(n, 6).unwrap();
            let sim = simplified_bound(n, 6).unwrap();
            for (r, s) in rec.terms.iter().zip(&sim.terms) {
                assert!(s + 1e-15 >= *r, "n={n}: {s} < {r}");
            }
        }
    }

    #[test]
    fn chernoff_examples() {
        close(chernoff_tail(100.0, 50.0).unwrap(), (-12.5f64).exp(), 1e-18);
        assert_eq!(chernoff_tail(7.0, 7.0).unwrap(), 1.0);
        assert!(chernoff_tail(6.0, 7.0).is_err());
        assert!(chernoff_tail(0.0, 0.0).is_err());

        // exact Binomial(20, 0.3) lower tail is below the bound
        let exact: f64 = (0..3)
            .map(|k| {
                let c = (0..k).fold(1.0, |acc, i| acc * (20 - i) as f64 / (i + 1) as f64);
                c * 0.3f64.powi(k) * 0.7f64.powi(20 - k)
            })
            .sum();
        assert!(exact <= chernoff_tail(6.0, 3.0).unwrap());
    }

    #[test]
    fn chshn_bound_values() {
        let b = chshn_bounds(1);
        assert_eq!(b.classical_value, 0.75);
        assert_eq!(b.quantum_value, 1.0);
        let b = chshn_bounds(512);
        close(
            b.quantum_binding_epsilon,
            2f64.sqrt() * 2f64.powi(-256),
            1e-15 * 2f64.powi(-256),
        );
        for n in 1..64u32 {
            let b = chshn_bounds(n);
            assert!(b.classical_value <= b.quantum_value);
        }
    }

    #[test]
    fn leq_bound_rounds_up() {
        assert!(leq_bound(Ratio::new(1, 3), 1.0 / 3.0));
        assert!(leq_bound(Ratio::new(3, 4), 0.75));
        assert!(!leq_bound(Ratio::new(3, 4), 0.74));
    }
}
