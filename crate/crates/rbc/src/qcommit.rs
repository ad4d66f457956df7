//! The measurement-outcome commitment (two encoding bases, weak-coherent
//! devices) and its security accounting.
//!
//! The honest run is simulated with per-round classical sufficient
//! statistics: honest states are products of single-qubit states, so a
//! same-basis round flips the prepared bit with probability `err` and a
//! cross-basis round yields a uniform outcome. No statevector is needed.
//!
//! Binding bounds depend on the basis pair only through the overlap
//! c = max |<psi_x^0|psi_y^1>|, via lambda0 = (1+c)/2 and lambda1 = (1-c)/2:
//! the excess is lambda0^n for delta = 0 and both the exact binomial tail
//! sum_{k<=floor(delta n)} C(n,k) lambda0^(n-k) lambda1^k and its Chernoff
//! relaxation exp(-(sqrt(lambda1)-delta/sqrt(lambda1))^2 n / 2) for
//! 0 < delta < lambda1. All tail sums run in log space so n up to 10^6 is
//! fine.

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::bits::BitString;
use crate::games::bounds::chernoff_tail;
use crate::prng::SplitMix64;
use crate::report::FeasibilityFlags;

#[derive(Debug, Error, PartialEq)]
pub enum QcError {
    #[error("states within one basis must be orthonormal")]
    NotOrthonormal,
    #[error("delta must satisfy delta < lambda1 = {lambda1} (got {delta}); no security otherwise")]
    DeltaTooLarge { delta: f64, lambda1: f64 },
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("sweep grid is empty")]
    EmptyGrid,
}

/// Two qubit bases |psi_x^theta>, theta, x in {0,1}; orthonormal within each
/// basis. The default pair is computational + Hadamard.
#[derive(Debug, Clone)]
pub struct BasisPair {
    states: [[Complex64; 2]; 4],
}

impl BasisPair {
    pub fn bb84() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64| Complex64::new(re, 0.0);
        BasisPair {
            states: [
                [c(1.0), c(0.0)],  // |psi_0^0> = |0>
                [c(0.0), c(1.0)],  // |psi_1^0> = |1>
                [c(s), c(s)],      // |psi_0^1> = |+>
                [c(s), c(-s)],     // |psi_1^1> = |->
            ],
        }
    }

    /// Any two bases with per-basis orthonormality; the security bound only
    /// sees their overlap.
    pub fn general(basis0: [[Complex64; 2]; 2], basis1: [[Complex64; 2]; 2]) -> Result<Self, QcError> {
        for basis in [&basis0, &basis1] {
            for v in basis.iter() {
                let norm = v[0].norm_sqr() + v[1].norm_sqr();
                if (norm - 1.0).abs() > 1e-12 {
                    return Err(QcError::NotOrthonormal);
                }
            }
            let ip = basis[0][0].conj() * basis[1][0] + basis[0][1].conj() * basis[1][1];
            if ip.norm() > 1e-12 {
                return Err(QcError::NotOrthonormal);
            }
        }
        Ok(BasisPair {
            states: [basis0[0], basis0[1], basis1[0], basis1[1]],
        })
    }

    /// A pair with a prescribed overlap c in [1/sqrt(2), 1]: the second basis
    /// is the first rotated so that |<psi_0^0|psi_0^1>| = c.
    pub fn with_overlap(c: f64) -> Result<Self, QcError> {
        let lo = std::f64::consts::FRAC_1_SQRT_2;
        if !(lo - 1e-12..=1.0 + 1e-12).contains(&c) {
            return Err(QcError::BadParameter(format!(
                "overlap must lie in [1/sqrt(2), 1], got {c}"
            )));
        }
        let s = (1.0 - c * c).max(0.0).sqrt();
        let re = |x: f64| Complex64::new(x, 0.0);
        Self::general(
            [[re(1.0), re(0.0)], [re(0.0), re(1.0)]],
            [[re(c), re(s)], [re(s), re(-c)]],
        )
    }

    pub fn state(&self, theta: bool, x: bool) -> [Complex64; 2] {
        self.states[2 * usize::from(theta) + usize::from(x)]
    }

    /// Overlap between the bases: c = max_{x,y} |<psi_x^0|psi_y^1>|.
    pub fn overlap(&self) -> f64 {
        let mut c: f64 = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                let a = self.states[x];
                let b = self.states[2 + y];
                let ip = a[0].conj() * b[0] + a[1].conj() * b[1];
                c = c.max(ip.norm());
            }
        }
        c
    }

    pub fn lambda0(&self) -> f64 {
        (1.0 + self.overlap()) / 2.0
    }

    pub fn lambda1(&self) -> f64 {
        (1.0 - self.overlap()) / 2.0
    }
}

/// Trusted-device parameters of the honest parties.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeviceModel {
    /// Mean photons per pulse of the weak-coherent source.
    pub mu: f64,
    /// Detection efficiency.
    pub eta: f64,
    /// Same-basis bit-flip error rate.
    pub err: f64,
    /// Detection threshold gamma: the run aborts below ceil(gamma n) clicks.
    pub gamma: f64,
    /// Fractional error tolerance of the verification.
    pub delta: f64,
    /// Optional basis-dependent efficiencies (eta_0, eta_1); clicks of the
    /// more efficient setting are subsampled so the backreported counts have
    /// identical distribution for both settings.
    pub eta_by_basis: Option<(f64, f64)>,
}

impl DeviceModel {
    pub fn new(mu: f64, eta: f64, err: f64, gamma: f64, delta: f64) -> Result<Self, QcError> {
        if !(mu >= 0.0) {
            return Err(QcError::BadParameter(format!("mu must be >= 0, got {mu}")));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(QcError::BadParameter(format!("eta must lie in [0,1], got {eta}")));
        }
        if !(0.0..0.5).contains(&err) {
            return Err(QcError::BadParameter(format!("err must lie in [0,1/2), got {err}")));
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(QcError::BadParameter(format!("gamma must lie in [0,1), got {gamma}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(QcError::BadParameter(format!("delta must lie in [0,1), got {delta}")));
        }
        Ok(DeviceModel {
            mu,
            eta,
            err,
            gamma,
            delta,
            eta_by_basis: None,
        })
    }

    /// Poisson detection statistics: p_r = e^(-mu eta) (mu eta)^r / r!.
    pub fn p_r(&self, r: u32) -> f64 {
        let lambda = self.mu * self.eta;
        let ln = -lambda + r as f64 * lambda.ln() - ln_gamma(r as f64 + 1.0);
        if r == 0 {
            (-lambda).exp()
        } else {
            ln.exp()
        }
    }

    /// Probability of at least one detected photon for the given setting.
    fn click_probability(&self, basis: bool) -> f64 {
        let eta = match self.eta_by_basis {
            Some((e0, e1)) => {
                if basis {
                    e1
                } else {
                    e0
                }
            }
            None => self.eta,
        };
        -(-self.mu * eta).exp_m1()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunOutcome {
    Accepted,
    Rejected,
    /// Too few clicks backreported; the protocol stops before the open phase.
    Aborted,
}

/// One honest protocol run.
#[derive(Debug, Clone, Serialize)]
pub struct QcommitRun {
    pub n: usize,
    pub d: u8,
    /// Preparation basis per round (the receiver's choice).
    pub theta_hex: String,
    /// Prepared logical bits.
    pub x_hex: String,
    /// Committer's measured bits (basis d everywhere).
    pub y_hex: String,
    /// Rounds with a detector click: the backreported valid set M.
    pub clicks_hex: String,
    pub valid_count: usize,
    pub required_clicks: usize,
    /// Fractional disagreement on the verified subset (valid rounds whose
    /// preparation basis equals d).
    pub error_fraction: f64,
    pub outcome: RunOutcome,
}

/// Honest run of the backreporting protocol with imperfect devices.
pub fn honest_run(
    n: usize,
    pair: &BasisPair,
    dev: &DeviceModel,
    d: u8,
    seed: u64,
) -> Result<QcommitRun, QcError> {
    if n == 0 {
        return Err(QcError::BadParameter("n must be positive".into()));
    }
    if d > 1 {
        return Err(QcError::BadParameter("d must be 0 or 1".into()));
    }
    let _ = pair; // honest statistics depend only on err for same-basis rounds
    let mut bob = SplitMix64::derive(seed, 2, 0);
    let mut alice = SplitMix64::derive(seed, 1, 0);

    let d_basis = d == 1;
    // Equalisation: discard clicks of the more efficient setting so the
    // backreported count distribution is the same for both bases.
    let keep_probability = match dev.eta_by_basis {
        Some(_) => {
            let p0 = dev.click_probability(false);
            let p1 = dev.click_probability(true);
            let p_min = p0.min(p1);
            let own = dev.click_probability(d_basis);
            if own > 0.0 {
                p_min / own
            } else {
                1.0
            }
        }
        None => 1.0,
    };

    let mut theta = BitString::zeros(n);
    let mut x = BitString::zeros(n);
    let mut y = BitString::zeros(n);
    let mut clicks = BitString::zeros(n);
    for k in 0..n {
        theta.set(k, bob.next_bool());
        x.set(k, bob.next_bool());
        let clicked = alice.bernoulli(dev.click_probability(d_basis))
            && (keep_probability >= 1.0 || alice.bernoulli(keep_probability));
        clicks.set(k, clicked);
        let outcome = if theta.get(k) == d_basis {
            x.get(k) ^ alice.bernoulli(dev.err)
        } else {
            alice.next_bool()
        };
        y.set(k, outcome);
    }

    let required = (dev.gamma * n as f64).ceil() as usize;
    let valid_count = clicks.count_ones() as usize;
    let mut checked = 0usize;
    let mut wrong = 0usize;
    for k in 0..n {
        if clicks.get(k) && theta.get(k) == d_basis {
            checked += 1;
            if y.get(k) != x.get(k) {
                wrong += 1;
            }
        }
    }
    let error_fraction = if checked == 0 {
        0.0
    } else {
        wrong as f64 / checked as f64
    };
    let outcome = if valid_count < required {
        RunOutcome::Aborted
    } else if error_fraction <= dev.delta {
        RunOutcome::Accepted
    } else {
        RunOutcome::Rejected
    };
    Ok(QcommitRun {
        n,
        d,
        theta_hex: theta.to_hex(),
        x_hex: x.to_hex(),
        y_hex: y.to_hex(),
        clicks_hex: clicks.to_hex(),
        valid_count,
        required_clicks: required,
        error_fraction,
        outcome,
    })
}

/// Delayed-commitment wrapper: commit to a uniform bit r up front, later
/// announce d XOR r to start the actual commitment. No separate security
/// statement is attached to this variant.
pub fn delayed_commitment(
    n: usize,
    pair: &BasisPair,
    dev: &DeviceModel,
    d: u8,
    seed: u64,
) -> Result<(QcommitRun, u8), QcError> {
    let mut rng = SplitMix64::derive(seed, 3, 0);
    let r = u8::from(rng.next_bool());
    let run = honest_run(n, pair, dev, r, seed)?;
    Ok((run, d ^ r))
}

/// Binding excess for ideal devices: the exact binomial form and its
/// Chernoff relaxation, with the exact value never above the relaxation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EpsilonBound {
    pub n: usize,
    pub delta: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub exact: f64,
    pub exact_log: f64,
    pub chernoff: f64,
    pub chernoff_log: f64,
    /// The bound as stated: the exact value at delta = 0, the Chernoff form
    /// otherwise.
    pub epsilon: f64,
}

pub fn epsilon_bound(n: usize, delta: f64, pair: &BasisPair) -> Result<EpsilonBound, QcError> {
    if n == 0 {
        return Err(QcError::BadParameter("n must be positive".into()));
    }
    let lambda0 = pair.lambda0();
    let lambda1 = pair.lambda1();
    if !(delta >= 0.0) || delta >= lambda1 {
        return Err(QcError::DeltaTooLarge { delta, lambda1 });
    }
    let exact_log = binomial_lower_tail_log(n, lambda1, (delta * n as f64).floor() as usize);
    let nf = n as f64;
    let chernoff = chernoff_tail(nf * lambda1, delta * nf)
        .expect("0 <= delta n < lambda1 n");
    let chernoff_log = chernoff.ln();
    let exact = exact_log.exp();
    let epsilon = if delta == 0.0 { exact } else { chernoff };
    debug_assert!(exact_log <= chernoff_log + 1e-12);
    Ok(EpsilonBound {
        n,
        delta,
        lambda0,
        lambda1,
        exact,
        exact_log,
        chernoff,
        chernoff_log,
        epsilon,
    })
}

/// ln sum_{k=0..kmax} C(n,k) (1-p)^(n-k) p^k, evaluated stably in log space.
fn binomial_lower_tail_log(n: usize, p: f64, kmax: usize) -> f64 {
    let nf = n as f64;
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let mut max_term = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax.min(n) {
        let kf = k as f64;
        let t = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0)
            + kf * ln_p
            + (nf - kf) * ln_q;
        max_term = max_term.max(t);
        terms.push(t);
    }
    max_term + terms.iter().map(|t| (t - max_term).exp()).sum::<f64>().ln()
}

/// Cheating probability with a weak-coherent source: the multiphoton count
/// N_m is binomial with per-round probability p_m = 1 - e^(-mu)(1+mu), each
/// k < gamma n (1 - delta/lambda1) contributes the conditional Chernoff term
/// for an effective round count ceil(gamma n) - k and error allowance
/// delta ceil(gamma n) / (ceil(gamma n) - k); larger k gives no security.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MultiphotonEpsilon {
    pub epsilon: f64,
    pub log_epsilon: f64,
    pub p_multiphoton: f64,
    pub threshold_k: f64,
}

pub fn multiphoton_epsilon(
    n: usize,
    gamma: f64,
    delta: f64,
    mu: f64,
    pair: &BasisPair,
) -> Result<MultiphotonEpsilon, QcError> {
    if n == 0 || !(gamma > 0.0) || gamma >= 1.0 {
        return Err(QcError::BadParameter(
            "need n >= 1 and 0 < gamma < 1".into(),
        ));
    }
    if !(mu >= 0.0) {
        return Err(QcError::BadParameter(format!("mu must be >= 0, got {mu}")));
    }
    let lambda1 = pair.lambda1();
    if !(delta >= 0.0) || delta >= lambda1 {
        return Err(QcError::DeltaTooLarge { delta, lambda1 });
    }
    let m = (gamma * n as f64).ceil();
    let k_t = m * (1.0 - delta / lambda1);
    // p_m = 1 - e^(-mu)(1 + mu), stable for small mu
    let p_m = (-(-mu).exp_m1()) - mu * (-mu).exp();
    let cheat_log = |k: f64| -> f64 {
        if k >= k_t {
            0.0
        } else {
            let rounds = m - k;
            let root = (rounds * lambda1).sqrt() - delta * m / (rounds * lambda1).sqrt();
            -0.5 * root * root
        }
    };
    if p_m <= 0.0 {
        let log = cheat_log(0.0);
        return Ok(MultiphotonEpsilon {
            epsilon: log.exp(),
            log_epsilon: log,
            p_multiphoton: 0.0,
            threshold_k: k_t,
        });
    }
    let nf = n as f64;
    let ln_p = p_m.ln();
    let ln_q = (1.0 - p_m).ln();
    let mut logs = Vec::with_capacity(n + 1);
    let mut max_log = f64::NEG_INFINITY;
    for k in 0..=n {
        let kf = k as f64;
        let ln_binom = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0)
            + kf * ln_p
            + (nf - kf) * ln_q;
        let t = ln_binom + cheat_log(kf);
        max_log = max_log.max(t);
        logs.push(t);
    }
    let log_epsilon =
        max_log + logs.iter().map(|t| (t - max_log).exp()).sum::<f64>().ln();
    Ok(MultiphotonEpsilon {
        epsilon: log_epsilon.exp().min(1.0),
        log_epsilon,
        p_multiphoton: p_m,
        threshold_k: k_t,
    })
}

/// Correctness/security checks of one device configuration at its given mu.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FeasibilityDetail {
    pub flags: FeasibilityFlags,
    pub lambda1: f64,
    /// e^(-mu eta) + gamma, must be < 1 for enough clicks.
    pub click_lhs: f64,
    /// e^(-mu)(1+mu) + (1 - delta/lambda1) gamma, must be > 1 for security.
    pub security_lhs: f64,
    /// e^(-mu)(1+mu) + (1 - err/lambda1)(1 - e^(-mu eta)), must be > 1.
    pub combined_lhs: f64,
}

pub fn feasibility(dev: &DeviceModel, pair: &BasisPair) -> FeasibilityDetail {
    let lambda1 = pair.lambda1();
    let click_lhs = (-dev.mu * dev.eta).exp() + dev.gamma;
    let security_lhs = (-dev.mu).exp() * (1.0 + dev.mu) + (1.0 - dev.delta / lambda1) * dev.gamma;
    let combined_lhs =
        (-dev.mu).exp() * (1.0 + dev.mu) + (1.0 - dev.err / lambda1) * (-(-dev.mu * dev.eta).exp_m1());
    FeasibilityDetail {
        flags: FeasibilityFlags {
            correct: click_lhs < 1.0 && dev.err < dev.delta,
            secure: dev.delta < lambda1 && security_lhs > 1.0,
            combined: dev.err < lambda1 && combined_lhs > 1.0,
        },
        lambda1,
        click_lhs,
        security_lhs,
        combined_lhs,
    }
}

/// Whether devices of quality (err, eta) admit any mean photon number mu
/// making the protocol simultaneously correct and secure. Maximises the
/// combined requirement over mu numerically.
pub fn device_requirement(err: f64, eta: f64, pair: &BasisPair) -> (bool, f64) {
    let lambda1 = pair.lambda1();
    if err >= lambda1 || eta <= 0.0 {
        return (false, 0.0);
    }
    let s = 1.0 - err / lambda1;
    let f = |mu: f64| (-mu).exp() * (1.0 + mu) + s * (-(-mu * eta).exp_m1());
    // log-spaced scan, then golden-section refinement around the best point
    let mut best_mu = 1e-6;
    let mut best = f(best_mu);
    let points = 600;
    for i in 0..=points {
        let mu = 10f64.powf(-6.0 + 7.0 * i as f64 / points as f64);
        let v = f(mu);
        if v > best {
            best = v;
            best_mu = mu;
        }
    }
    let (mut lo, mut hi) = (best_mu / 10.0, best_mu * 10.0);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let mu = (lo + hi) / 2.0;
    let value = f(mu).max(best);
    (value > 1.0, if f(mu) >= best { mu } else { best_mu })
}

/// One row of a feasibility sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub mu: f64,
    pub eta: f64,
    pub err: f64,
    pub gamma: f64,
    pub delta: f64,
    pub correct: bool,
    pub secure: bool,
    pub combined: bool,
}

/// Grid of feasibility results, e.g. for plotting the secure region.
pub fn feasibility_sweep(
    mus: &[f64],
    etas: &[f64],
    errs: &[f64],
    gammas: &[f64],
    deltas: &[f64],
    pair: &BasisPair,
) -> Result<Vec<SweepRow>, QcError> {
    if [mus, etas, errs, gammas, deltas].iter().any(|v| v.is_empty()) {
        return Err(QcError::EmptyGrid);
    }
    let mut rows = Vec::new();
    for &mu in mus {
        for &eta in etas {
            for &err in errs {
                for &gamma in gammas {
                    for &delta in deltas {
                        let dev = DeviceModel {
                            mu,
                            eta,
                            err,
                            gamma,
                            delta,
                            eta_by_basis: None,
                        };
                        let detail = feasibility(&dev, pair);
                        rows.push(SweepRow {
                            mu,
                            eta,
                            err,
                            gamma,
                            delta,
                            correct: detail.flags.correct,
                            secure: detail.flags.secure,
                            combined: detail.flags.combined,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("mu,eta,err,gamma,delta,correct,secure,combined\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.mu, r.eta, r.err, r.gamma, r.delta, r.correct, r.secure, r.combined
        ));
    }
    out
}
