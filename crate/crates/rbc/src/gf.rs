//! GF(2^n) arithmetic over an explicit reduction polynomial.
//!
//! Elements are coefficient vectors (bit j = coefficient of X^j) stored as a
//! [`BitString`]. Addition is XOR; multiplication is a portable carry-less
//! product reduced modulo the field's irreducible polynomial; inverses come
//! from the extended Euclidean algorithm over GF(2)[X].
//!
//! A fixed table of low-weight irreducible polynomials covers
//! n in {1..=64, 128, 256, 512}; user-supplied polynomials are accepted after
//! an irreducibility check (Rabin's test) and rejected with an error
//! otherwise.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::prng::SplitMix64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GfError {
    #[error("degree mismatch: element of {0} bits in GF(2^{1})")]
    DegreeMismatch(usize, usize),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("polynomial of degree {0} is reducible over GF(2)")]
    Reducible(usize),
    #[error("no built-in reduction polynomial for n = {0}")]
    UnsupportedDegree(usize),
    #[error("reduction polynomial must contain X^n and 1")]
    MalformedPolynomial,
}

/// Sparse irreducible polynomial X^n + ... + 1 given by its exponent set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionPolynomial {
    n: usize,
    /// Strictly decreasing, starts with n, ends with 0.
    exponents: Vec<usize>,
}

/// Middle exponents (everything besides X^n and 1) of the lowest-weight
/// irreducible polynomial for each supported degree. Trinomials use the
/// smallest middle exponent; degrees without an irreducible trinomial use the
/// lexicographically smallest pentanomial. The table is validated against an
/// exhaustive search in the test suite.
const BUILTIN_MIDDLE: &[(usize, &[usize])] = &[
    (1, &[]),
    (2, &[1]),
    (3, &[1]),
    (4, &[1]),
    (5, &[2]),
    (6, &[1]),
    (7, &[1]),
    (8, &[4, 3, 1]),
    (9, &[1]),
    (10, &[3]),
    (11, &[2]),
    (12, &[3]),
    (13, &[4, 3, 1]),
    (14, &[5]),
    (15, &[1]),
    (16, &[5, 3, 1]),
    (17, &[3]),
    (18, &[3]),
    (19, &[5, 2, 1]),
    (20, &[3]),
    (21, &[2]),
    (22, &[1]),
    (23, &[5]),
    (24, &[4, 3, 1]),
    (25, &[3]),
    (26, &[4, 3, 1]),
    (27, &[5, 2, 1]),
    (28, &[1]),
    (29, &[2]),
    (30, &[1]),
    (31, &[3]),
    (32, &[7, 3, 2]),
    (33, &[10]),
    (34, &[7]),
    (35, &[2]),
    (36, &[9]),
    (37, &[6, 4, 1]),
    (38, &[6, 5, 1]),
    (39, &[4]),
    (40, &[5, 4, 3]),
    (41, &[3]),
    (42, &[7]),
    (43, &[6, 4, 3]),
    (44, &[5]),
    (45, &[4, 3, 1]),
    (46, &[1]),
    (47, &[5]),
    (48, &[5, 3, 2]),
    (49, &[9]),
    (50, &[4, 3, 2]),
    (51, &[6, 3, 1]),
    (52, &[3]),
    (53, &[6, 2, 1]),
    (54, &[9]),
    (55, &[7]),
    (56, &[7, 4, 2]),
    (57, &[4]),
    (58, &[19]),
    (59, &[7, 4, 2]),
    (60, &[1]),
    (61, &[5, 2, 1]),
    (62, &[29]),
    (63, &[1]),
    (64, &[4, 3, 1]),
    (128, &[7, 2, 1]),
    (256, &[10, 5, 2]),
    (512, &[8, 5, 2]),
];

impl ReductionPolynomial {
    /// Builds from the full exponent set (must include n and 0) and verifies
    /// irreducibility. Rejection is an error, not a panic.
    pub fn new(exponents: &[usize]) -> Result<Self, GfError> {
        let mut exps: Vec<usize> = exponents.to_vec();
        exps.sort_unstable_by(|a, b| b.cmp(a));
        exps.dedup();
        let n = *exps.first().ok_or(GfError::MalformedPolynomial)?;
        if n == 0 || *exps.last().unwrap() != 0 {
            return Err(GfError::MalformedPolynomial);
        }
        let p = ReductionPolynomial { n, exponents: exps };
        if !p.is_irreducible() {
            return Err(GfError::Reducible(n));
        }
        Ok(p)
    }

    /// The built-in low-weight polynomial for degree n.
    pub fn builtin(n: usize) -> Result<Self, GfError> {
        let middle = BUILTIN_MIDDLE
            .iter()
            .find(|(deg, _)| *deg == n)
            .map(|(_, m)| *m)
            .ok_or(GfError::UnsupportedDegree(n))?;
        let mut exponents = Vec::with_capacity(middle.len() + 2);
        exponents.push(n);
        exponents.extend_from_slice(middle);
        exponents.push(0);
        Ok(ReductionPolynomial { n, exponents })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    /// Supported built-in degrees, in ascending order.
    pub fn supported_degrees() -> Vec<usize> {
        BUILTIN_MIDDLE.iter().map(|(n, _)| *n).collect()
    }

    fn to_poly(&self) -> Poly {
        let mut p = Poly::zero(self.n + 1);
        for &e in &self.exponents {
            p.flip(e);
        }
        p
    }

    /// Rabin's test: X^(2^n) = X mod p, and gcd(X^(2^(n/q)) - X, p) = 1 for
    /// every prime q dividing n.
    fn is_irreducible(&self) -> bool {
        let n = self.n;
        if n == 1 {
            return true; // X and X + 1 are the only degree-1 polynomials
        }
        let p = self.to_poly();
        // x_pow[k] = X^(2^k) mod p
        let mut cur = Poly::x();
        let mut powers = vec![cur.clone()];
        for _ in 0..n {
            cur = poly_mulmod(&cur, &cur, &p);
            powers.push(cur.clone());
        }
        let x = Poly::x();
        if powers[n].clone().sub(&x).degree().is_some() {
            return false;
        }
        for q in prime_divisors(n) {
            let diff = powers[n / q].clone().sub(&x);
            let g = poly_gcd(diff, p.clone());
            if g.degree() != Some(0) {
                return false;
            }
        }
        true
    }
}

/// An element of GF(2^n); the degree travels with the value so mismatched
/// operands are caught at run time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldElement(pub BitString);

impl FieldElement {
    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_hex(&self) -> String {
        self.0.to_hex()
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The field GF(2^n) with a fixed reduction polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gf {
    poly: ReductionPolynomial,
}

impl Gf {
    pub fn new(poly: ReductionPolynomial) -> Self {
        Gf { poly }
    }

    /// GF(2^n) with the built-in reduction polynomial.
    pub fn builtin(n: usize) -> Result<Self, GfError> {
        Ok(Gf::new(ReductionPolynomial::builtin(n)?))
    }

    pub fn degree(&self) -> usize {
        self.poly.n
    }

    pub fn order(&self) -> u128 {
        1u128 << self.poly.n.min(127)
    }

    pub fn poly(&self) -> &ReductionPolynomial {
        &self.poly
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(BitString::zeros(self.poly.n))
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(BitString::from_u64(self.poly.n, 1))
    }

    pub fn from_u64(&self, v: u64) -> FieldElement {
        FieldElement(BitString::from_u64(self.poly.n, v))
    }

    pub fn from_bits(&self, bits: BitString) -> Result<FieldElement, GfError> {
        if bits.len() != self.poly.n {
            return Err(GfError::DegreeMismatch(bits.len(), self.poly.n));
        }
        Ok(FieldElement(bits))
    }

    pub fn random(&self, rng: &mut SplitMix64) -> FieldElement {
        FieldElement(BitString::random(self.poly.n, rng))
    }

    fn check(&self, a: &FieldElement) -> Result<(), GfError> {
        if a.degree() != self.poly.n {
            return Err(GfError::DegreeMismatch(a.degree(), self.poly.n));
        }
        Ok(())
    }

    /// Field addition: bitwise XOR.
    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, GfError> {
        self.check(a)?;
        self.check(b)?;
        Ok(FieldElement(a.0.xor(&b.0).expect("checked lengths")))
    }

    /// Field multiplication: carry-less product reduced mod the polynomial.
    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, GfError> {
        self.check(a)?;
        self.check(b)?;
        let n = self.poly.n;
        let mut prod = clmul(a.0.limbs(), b.0.limbs(), n);
        self.reduce(&mut prod);
        let limbs = prod[..n.div_ceil(64)].to_vec();
        Ok(FieldElement(BitString::from_limbs(n, limbs)))
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, GfError> {
        self.check(a)?;
        if a.is_zero() {
            return Err(GfError::ZeroInverse);
        }
        let n = self.poly.n;
        let p = self.poly.to_poly();
        let a_poly = Poly::from_limbs(a.0.limbs(), n);

        // Invariants: t0 * a = r0 mod p, t1 * a = r1 mod p.
        let mut r0 = p;
        let mut r1 = a_poly;
        let mut t0 = Poly::zero(1);
        let mut t1 = Poly::x_pow(0);
        while let Some(d1) = r1.degree() {
            if d1 == 0 {
                break;
            }
            let (q, r) = poly_divmod(&r0, &r1);
            let t = t0.sub(&poly_mul(&q, &t1));
            r0 = r1;
            r1 = r;
            t0 = t1;
            t1 = t;
        }
        // p irreducible and a != 0, so the last nonzero remainder is 1.
        debug_assert_eq!(r1.degree(), Some(0));
        let mut limbs = t1.into_limbs(n);
        limbs.resize(n.div_ceil(64), 0);
        Ok(FieldElement(BitString::from_limbs(n, limbs)))
    }

    /// Reduces a 2n-1-bit carry-less product in place.
    fn reduce(&self, prod: &mut [u64]) {
        let n = self.poly.n;
        for i in (n..=2 * n.saturating_sub(1)).rev() {
            if prod[i / 64] >> (i % 64) & 1 == 1 {
                prod[i / 64] ^= 1u64 << (i % 64);
                for &e in &self.poly.exponents[1..] {
                    let j = i - n + e;
                    prod[j / 64] ^= 1u64 << (j % 64);
                }
            }
        }
    }
}

/// Carry-less product of two n-bit operands; result has 2n-1 bits.
fn clmul(a: &[u64], b: &[u64], n: usize) -> Vec<u64> {
    let out_len = (2 * n).div_ceil(64).max(1);
    let mut out = vec![0u64; out_len];
    for (wa, &limb) in a.iter().enumerate() {
        let mut bits = limb;
        while bits != 0 {
            let tz = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let shift = wa * 64 + tz;
            let (words, rem) = (shift / 64, shift % 64);
            for (wb, &bl) in b.iter().enumerate() {
                if bl == 0 {
                    continue;
                }
                out[wb + words] ^= bl << rem;
                if rem != 0 && wb + words + 1 < out_len {
                    out[wb + words + 1] ^= bl >> (64 - rem);
                }
            }
        }
    }
    out
}

/// Dense polynomial over GF(2) of unbounded degree; only used internally for
/// inversion and irreducibility testing.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Poly {
    limbs: Vec<u64>,
}

impl Poly {
    fn zero(capacity_bits: usize) -> Self {
        Poly {
            limbs: vec![0; capacity_bits.div_ceil(64).max(1)],
        }
    }

    fn x() -> Self {
        Self::x_pow(1)
    }

    fn x_pow(e: usize) -> Self {
        let mut p = Poly::zero(e + 1);
        p.flip(e);
        p
    }

    fn from_limbs(limbs: &[u64], n_bits: usize) -> Self {
        let mut p = Poly {
            limbs: limbs.to_vec(),
        };
        let keep = n_bits.div_ceil(64);
        p.limbs.truncate(keep.max(1));
        p
    }

    fn into_limbs(mut self, n_bits: usize) -> Vec<u64> {
        self.limbs.resize(n_bits.div_ceil(64).max(1), 0);
        self.limbs
    }

    fn flip(&mut self, e: usize) {
        if e / 64 >= self.limbs.len() {
            self.limbs.resize(e / 64 + 1, 0);
        }
        self.limbs[e / 64] ^= 1u64 << (e % 64);
    }

    fn degree(&self) -> Option<usize> {
        for (i, &l) in self.limbs.iter().enumerate().rev() {
            if l != 0 {
                return Some(i * 64 + 63 - l.leading_zeros() as usize);
            }
        }
        None
    }

    /// Addition and subtraction coincide over GF(2).
    fn sub(mut self, other: &Poly) -> Poly {
        if other.limbs.len() > self.limbs.len() {
            self.limbs.resize(other.limbs.len(), 0);
        }
        for (i, &l) in other.limbs.iter().enumerate() {
            self.limbs[i] ^= l;
        }
        self
    }

    fn xor_shifted(&mut self, other: &Poly, shift: usize) {
        let (words, rem) = (shift / 64, shift % 64);
        let need = other.limbs.len() + words + 1;
        if self.limbs.len() < need {
            self.limbs.resize(need, 0);
        }
        for (i, &l) in other.limbs.iter().enumerate() {
            if l == 0 {
                continue;
            }
            self.limbs[i + words] ^= l << rem;
            if rem != 0 {
                self.limbs[i + words + 1] ^= l >> (64 - rem);
            }
        }
    }
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let da = match a.degree() {
        Some(d) => d,
        None => return Poly::zero(1),
    };
    let db = match b.degree() {
        Some(d) => d,
        None => return Poly::zero(1),
    };
    let mut out = Poly::zero(da + db + 1);
    for (wa, &limb) in a.limbs.iter().enumerate() {
        let mut bits = limb;
        while bits != 0 {
            let tz = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            out.xor_shifted(b, wa * 64 + tz);
        }
    }
    out
}

fn poly_divmod(num: &Poly, den: &Poly) -> (Poly, Poly) {
    let dd = den.degree().expect("division by zero polynomial");
    let mut rem = num.clone();
    let mut quot = Poly::zero(1);
    while let Some(dr) = rem.degree() {
        if dr < dd {
            break;
        }
        let shift = dr - dd;
        quot.flip(shift);
        rem.xor_shifted(den, shift);
    }
    (quot, rem)
}

fn poly_gcd(mut a: Poly, mut b: Poly) -> Poly {
    while b.degree().is_some() {
        let (_, r) = poly_divmod(&a, &b);
        a = b;
        b = r;
    }
    a
}

fn poly_mulmod(a: &Poly, b: &Poly, modulus: &Poly) -> Poly {
    let (_, r) = poly_divmod(&poly_mul(a, b), modulus);
    r
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
