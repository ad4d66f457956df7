//! Classical certification (strong binding) of the two-agent commitment.
//!
//! Against classical adversaries the scheme admits an external random
//! variable D marking the value that cannot be unveiled: for any commit
//! function f of the first agent, split the challenge space by preimage size
//! at threshold 2^(n/2); the resulting D fails with probability at most
//! 2^(-n/2) for every opening function. Against entangled adversaries no
//! such D exists: the explicit attack below leaves every candidate D with a
//! failure probability of at least 1/4, independent of n.

pub mod statevector;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use self::statevector::StateVector;

#[derive(Debug, Error, PartialEq)]
pub enum CertifyError {
    #[error("n = {0} too large for exhaustive statevector checks (max {1})")]
    TooLarge(usize, usize),
    #[error("assignment does not marginalise to the protocol state distribution")]
    InconsistentAssignment,
    #[error("commit function table must have 2^n entries of n bits")]
    BadCommitFunction,
    #[error("state must be a normalised qubit")]
    BadQubit,
}

/// Deterministic commit response of the first agent: b -> f(b), both n-bit.
#[derive(Debug, Clone)]
pub struct CommitFunction {
    pub n: usize,
    pub table: Vec<u64>,
}

impl CommitFunction {
    pub fn new(n: usize, table: Vec<u64>) -> Result<Self, CertifyError> {
        let size = 1usize << n;
        if table.len() != size || table.iter().any(|&v| v >= size as u64) {
            return Err(CertifyError::BadCommitFunction);
        }
        Ok(CommitFunction { n, table })
    }

    pub fn constant(n: usize, value: u64) -> Self {
        CommitFunction {
            n,
            table: vec![value; 1 << n],
        }
    }

    pub fn identity(n: usize) -> Self {
        CommitFunction {
            n,
            table: (0..1u64 << n).collect(),
        }
    }
}

/// The external variable D, given as Pr[D = 1 | state]. For the classical
/// construction the state is the challenge b; for attack analysis it is the
/// pair (x1, b).
#[derive(Debug, Clone)]
pub struct CertificationAssignment {
    pub n: usize,
    /// Pr[D = 1 | x1, b], indexed x1 * 2^n + b. Classical-construction
    /// assignments depend on b alone.
    pub p1_given: Vec<f64>,
}

impl CertificationAssignment {
    pub fn deterministic_on_b(n: usize, d_of_b: impl Fn(u64) -> bool) -> Self {
        let q = 1usize << n;
        let mut p1_given = vec![0.0; q * q];
        for x in 0..q {
            for b in 0..q {
                p1_given[x * q + b] = if d_of_b(b as u64) { 1.0 } else { 0.0 };
            }
        }
        CertificationAssignment { n, p1_given }
    }

    pub fn from_conditional(n: usize, p1_given: Vec<f64>) -> Result<Self, CertifyError> {
        let q = 1usize << n;
        if p1_given.len() != q * q || p1_given.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(CertifyError::InconsistentAssignment);
        }
        Ok(CertificationAssignment { n, p1_given })
    }

    /// Builds from an explicit joint p[d][x1][b]; marginalising over d must
    /// recover the uniform protocol distribution 2^(-2n).
    pub fn from_joint(n: usize, joint: &[Vec<f64>; 2]) -> Result<Self, CertifyError> {
        let q = 1usize << n;
        let uniform = 1.0 / (q * q) as f64;
        if joint[0].len() != q * q || joint[1].len() != q * q {
            return Err(CertifyError::InconsistentAssignment);
        }
        let mut p1_given = vec![0.0; q * q];
        for i in 0..q * q {
            let total = joint[0][i] + joint[1][i];
            if (total - uniform).abs() > 1e-12 * uniform.max(1.0) {
                return Err(CertifyError::InconsistentAssignment);
            }
            p1_given[i] = joint[1][i] / total;
        }
        Ok(CertificationAssignment { n, p1_given })
    }

    fn p1(&self, x1: usize, b: usize) -> f64 {
        self.p1_given[x1 * (1 << self.n) + b]
    }
}

/// Outcome of the classical D construction for one commit function.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalCertification {
    pub n: usize,
    /// Guaranteed bound 2^(-n/2).
    pub epsilon: f64,
    /// Worst Pr[D = d and unveil d] over all opening functions, per d.
    pub worst: [f64; 2],
    /// D as a function of the challenge b.
    pub d_of_b: Vec<bool>,
}

/// Builds D from the preimage structure of f: challenges whose image has more
/// than 2^(n/2) preimages get D = 1, the rest D = 0. For every opening
/// function the joint probability of D = d and a successful unveiling of d is
/// at most 2^(-n/2).
pub fn classical_d(f: &CommitFunction) -> ClassicalCertification {
    let n = f.n;
    let q = 1usize << n;
    let threshold = (n as f64 / 2.0).exp2();
    let mut preimages = vec![0u64; q];
    for &c in &f.table {
        preimages[c as usize] += 1;
    }
    let in_t1 = |c: u64| preimages[c as usize] as f64 > threshold;
    let d_of_b: Vec<bool> = f.table.iter().map(|&c| in_t1(c)).collect();

    // worst case over openings: unveiling 0 needs f(b) = g0, unveiling 1
    // needs f(b) xor b = g1
    let mut count0 = vec![0u64; q];
    let mut count1 = vec![0u64; q];
    for b in 0..q {
        let c = f.table[b] as usize;
        if !d_of_b[b] {
            count0[c] += 1;
        } else {
            count1[f.table[b] as usize ^ b] += 1;
        }
    }
    let worst0 = count0.iter().max().copied().unwrap_or(0) as f64 / q as f64;
    let worst1 = count1.iter().max().copied().unwrap_or(0) as f64 / q as f64;
    ClassicalCertification {
        n,
        epsilon: (-(n as f64) / 2.0).exp2(),
        worst: [worst0, worst1],
        d_of_b,
    }
}

/// Classical binding figures of one deterministic strategy (f, g0, g1):
/// p_d = Pr_b[f(b) xor g_d = d.b].
pub fn classical_strategy_value(f: &CommitFunction, g0: u64, g1: u64) -> (f64, f64) {
    let q = 1usize << f.n;
    let mut p0 = 0u64;
    let mut p1 = 0u64;
    for b in 0..q as u64 {
        if f.table[b as usize] ^ g0 == 0 {
            p0 += 1;
        }
        if f.table[b as usize] ^ g1 == b {
            p1 += 1;
        }
    }
    (p0 as f64 / q as f64, p1 as f64 / q as f64)
}

/// Joint distribution over (X1, B, X2) induced by the entangled attack:
/// X1 and B uniform, and X2 equals X1 or X1 xor B with probability 1/2 each
/// (coinciding when B = 0). Unveiling either value then succeeds with
/// probability (1 + [B = 0]) / 2, giving p_0 = p_1 = 1/2 + 2^-(n+1).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AttackJoint {
    pub n: usize,
}

impl AttackJoint {
    pub fn new(n: usize) -> Self {
        AttackJoint { n }
    }

    /// Pr[X2 = x2 | X1 = x1, B = b].
    pub fn pr_x2(&self, x1: u64, b: u64, x2: u64) -> f64 {
        let mut p = 0.0;
        if x2 == x1 {
            p += 0.5;
        }
        if x2 == x1 ^ b {
            p += 0.5;
        }
        p
    }

    /// Pr[unveil d succeeds | B = b]; independent of d and of x1.
    pub fn unveil_prob_given_b(&self, b: u64) -> f64 {
        if b == 0 {
            1.0
        } else {
            0.5
        }
    }

    /// Acceptance probability of unveiling d, averaged over the uniform b.
    pub fn p_d(&self, _d: u8) -> f64 {
        0.5 + (-(self.n as f64 + 1.0)).exp2()
    }

    pub fn p0_plus_p1(&self) -> f64 {
        1.0 + (-(self.n as f64)).exp2()
    }
}

/// Statevector realisation of the attack for one challenge b: maximally
/// entangled n-qubit registers, control qubit in |+>, the controlled-XOR
/// unitary, then computational measurements of X1 and X2.
/// Returns Pr[X1 = x1, X2 = x2 | b] indexed x1 * 2^n + x2.
pub fn attack_joint_statevector(n: usize, b: u64) -> Result<Vec<f64>, CertifyError> {
    let sv = attack_state(n, b, [Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2])?;
    let q = 1usize << n;
    let a1: Vec<usize> = (0..n).collect();
    let a2: Vec<usize> = (n..2 * n).collect();
    let mut joint = vec![0.0; q * q];
    for x1 in 0..q {
        for x2 in 0..q {
            let mut probe = sv.clone();
            let p1 = probe.collapse(&a1, x1);
            if p1 == 0.0 {
                continue;
            }
            let p2 = probe.probability(&a2, x2);
            joint[x1 * q + x2] = p1 * p2;
        }
    }
    Ok(joint)
}

/// State after the commit-phase attack with the control register holding an
/// arbitrary qubit phi (|+> reproduces the plain binding attack).
fn attack_state(n: usize, b: u64, phi: [Complex64; 2]) -> Result<StateVector, CertifyError> {
    if 2 * n + 1 > statevector::MAX_QUBITS {
        return Err(CertifyError::TooLarge(n, (statevector::MAX_QUBITS - 1) / 2));
    }
    let norm = phi[0].norm_sqr() + phi[1].norm_sqr();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(CertifyError::BadQubit);
    }
    let q = 1usize << n;
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * n + 1)];
    let scale = 1.0 / (q as f64).sqrt();
    for x in 0..q {
        let base = x | (x << n);
        amps[base] = phi[0] * scale;
        amps[base | 1 << (2 * n)] = phi[1] * scale;
    }
    let mut sv = StateVector::zero_state(2 * n + 1);
    sv.set_amplitudes(amps);
    // controlled XOR of b onto the first register
    let control = 1usize << (2 * n);
    sv.apply_permutation(|i| if i & control != 0 { i ^ b as usize } else { i });
    Ok(sv)
}

/// max_d Pr[D = d and unveil d] for the attack joint supplemented by the
/// assignment D. The attack guarantees a floor of 1/4 for every D because
/// each term is at least Pr[D = d] / 2.
pub fn violation_floor(joint: &AttackJoint, d: &CertificationAssignment) -> Result<f64, CertifyError> {
    if d.n != joint.n {
        return Err(CertifyError::InconsistentAssignment);
    }
    let q = 1usize << joint.n;
    let weight = 1.0 / (q * q) as f64;
    let mut per_d = [0.0f64; 2];
    for x1 in 0..q {
        for b in 0..q {
            let unveil = joint.unveil_prob_given_b(b as u64);
            let p1 = d.p1(x1, b);
            per_d[0] += weight * (1.0 - p1) * unveil;
            per_d[1] += weight * p1 * unveil;
        }
    }
    Ok(per_d[0].max(per_d[1]))
}

/// Report of the attack on the measurement-commit construction: opened-round
/// statistics match the honest execution exactly, while unopened rounds stay
/// recoverable as the original qubit.
#[derive(Debug, Clone, Serialize)]
pub struct CanonicalBreakReport {
    pub n: usize,
    /// Probability that the opener's measurement unveils d, averaged over b.
    pub unveil_success: [f64; 2],
    /// Largest total-variation distance (over challenges b) between the
    /// attack's (x1, x2, value) statistics and the honest ones.
    pub max_total_variation: f64,
    /// Smallest fidelity of the recovered qubit against the original.
    pub min_recovery_fidelity: f64,
}

/// Runs the attack with the control register holding the received qubit phi,
/// compares opened statistics against an honest measure-then-commit run, and
/// checks that unopened rounds recombine to the original state.
pub fn canonical_break_demo(n: usize, phi: [Complex64; 2]) -> Result<CanonicalBreakReport, CertifyError> {
    let q = 1usize << n;
    let a1: Vec<usize> = (0..n).collect();
    let a2: Vec<usize> = (n..2 * n).collect();
    let control = 2 * n;

    let alpha = [phi[0].norm_sqr(), phi[1].norm_sqr()];
    let mut unveil = [0.0f64; 2];
    let mut max_tv: f64 = 0.0;
    let mut min_fidelity: f64 = 1.0;

    for b in 0..q as u64 {
        let sv = attack_state(n, b, phi)?;
        let mut tv = 0.0;
        for x1 in 0..q {
            let mut after_x1 = sv.clone();
            let p_x1 = after_x1.collapse(&a1, x1);
            if p_x1 == 0.0 {
                continue;
            }

            // opened round: measure X2 then the control register
            for x2 in 0..q {
                let mut after_x2 = after_x1.clone();
                let p2 = after_x2.collapse(&a2, x2);
                // a measured string unveils d when it equals x1 xor d.b
                for d in 0..2usize {
                    if x2 == x1 ^ (usize::from(d == 1) * b as usize) {
                        unveil[d] += p_x1 * p2;
                    }
                }
                for v in 0..2usize {
                    let pv = if p2 == 0.0 { 0.0 } else { after_x2.probability(&[control], v) };
                    let attack_p = p_x1 * p2 * pv;
                    // honest: outcome v with weight |alpha_v|^2, pad uniform,
                    // x2 = pad, x1 = v.b xor pad
                    let target = if v == 1 { x2 ^ b as usize } else { x2 };
                    let honest_p = if x1 == target { alpha[v] / q as f64 } else { 0.0 };
                    tv += (attack_p - honest_p).abs();
                }
            }

            // unopened round: recombine the registers and undo the splitting
            let mut recovered = after_x1.clone();
            recovered
                .apply_permutation(|i| if i & (1 << control) != 0 { i ^ ((b as usize) << n) } else { i });
            let mut target = StateVector::zero_state(2 * n + 1);
            let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * n + 1)];
            amps[x1 | (x1 << n)] = phi[0];
            amps[x1 | (x1 << n) | (1 << control)] = phi[1];
            target.set_amplitudes(amps);
            min_fidelity = min_fidelity.min(recovered.fidelity(&target));
        }
        max_tv = max_tv.max(tv / 2.0);
    }
    // average the unveiling success over the uniform challenge
    unveil[0] /= q as f64;
    unveil[1] /= q as f64;
    Ok(CanonicalBreakReport {
        n,
        unveil_success: unveil,
        max_total_variation: max_tv,
        min_recovery_fidelity: min_fidelity,
    })
}
