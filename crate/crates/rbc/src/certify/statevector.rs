//! Minimal dense statevector simulator.
//!
//! Deliberately small: amplitudes for at most 7 qubits, computational-basis
//! measurements and the few controlled permutations the certification
//! analysis needs. Qubit 0 is the least significant bit of the amplitude
//! index.

use num_complex::Complex64;

pub const MAX_QUBITS: usize = 7;

#[derive(Debug, Clone)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero_state(qubits: usize) -> Self {
        assert!(qubits >= 1 && qubits <= MAX_QUBITS, "statevector limited to {MAX_QUBITS} qubits");
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { qubits, amps }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn set_amplitudes(&mut self, amps: Vec<Complex64>) {
        assert_eq!(amps.len(), 1 << self.qubits);
        self.amps = amps;
        let norm: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-9, "state must be normalised");
    }

    /// Applies a single-qubit unitary given by its 2x2 matrix.
    pub fn apply_1q(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) {
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let a = self.amps[i];
                let b = self.amps[i | mask];
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | mask] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    /// Permutes basis states: index -> perm(index). `perm` must be a bijection.
    pub fn apply_permutation(&mut self, perm: impl Fn(usize) -> usize) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            out[perm(i)] += a;
        }
        self.amps = out;
    }

    /// Probability of reading `value` on the given qubits (computational
    /// basis), bit j of `value` belonging to `qubits[j]`.
    pub fn probability(&self, qubits: &[usize], value: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| Self::extract(*i, qubits) == value)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Collapses the given qubits onto `value`; returns the outcome
    /// probability (state is left renormalised unless the probability is 0).
    pub fn collapse(&mut self, qubits: &[usize], value: usize) -> f64 {
        let p = self.probability(qubits, value);
        if p == 0.0 {
            return 0.0;
        }
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if Self::extract(i, qubits) == value {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        p
    }

    /// |<other|self>|^2.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        let ip: Complex64 = self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| b.conj() * a)
            .sum();
        ip.norm_sqr()
    }

    fn extract(index: usize, qubits: &[usize]) -> usize {
        let mut v = 0usize;
        for (j, &q) in qubits.iter().enumerate() {
            if index >> q & 1 == 1 {
                v |= 1 << j;
            }
        }
        v
    }
}
