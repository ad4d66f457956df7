//! The two-round pad-and-challenge commitment and its relativistic variant.
//!
//! Sites sit at x = -1 and x = +1 (separation 2). The commit interaction at
//! t = 0 pads the committed bit with a pre-shared string
//! (x1 = d.b xor a); the second agent opens by announcing (d, x2 = a) and the
//! verifier accepts iff x1 xor x2 = d.b. The challenge b leaves site 1 at
//! t = 0, so openings are only safe for t in (0, 2): at t = 2 the relayed
//! challenge reaches the opener and a scripted adversary unveils either value
//! with certainty.

use num_rational::Ratio;

use crate::bits::BitString;
use crate::netsim::{alice, bob, run, Scenario, SimRun};
use crate::spacetime::Rat;

use super::{unit_seconds, CommitmentOutcome, ProtocolError};

#[derive(Debug, Clone)]
pub struct SbgkwParams {
    pub n: usize,
    pub d: u8,
    /// Opening time in natural units; the commitment is valid for t in (0, 2).
    pub open_at: Rat,
    pub seed: u64,
    pub distance_km: Option<f64>,
}

impl SbgkwParams {
    pub fn new(n: usize, d: u8, seed: u64) -> Self {
        SbgkwParams {
            n,
            d,
            open_at: Rat::from_integer(1),
            seed,
            distance_km: None,
        }
    }
}

#[derive(Debug)]
pub struct SbgkwRun {
    pub sim: SimRun,
    pub outcome: CommitmentOutcome,
}

/// Honest run; an opening scheduled at or after t = 2 still verifies but the
/// outcome carries an expiry flag because the challenge has reached the
/// opening agent by then.
pub fn sbgkw_run(params: &SbgkwParams) -> Result<SbgkwRun, ProtocolError> {
    let SbgkwParams {
        n,
        d,
        open_at,
        seed,
        distance_km,
    } = params.clone();
    if d > 1 {
        return Err(ProtocolError::BadParameter("d must be 0 or 1".into()));
    }
    if open_at <= Rat::from_integer(0) {
        return Err(ProtocolError::BadParameter(
            "opening must happen after the commit at t = 0".into(),
        ));
    }
    let expired = open_at >= Rat::from_integer(2);

    // locations: 0 at x = -1 (commit site), 1 at x = +1 (open site)
    let mut sc = Scenario::new("sbgkw", vec![Rat::from_integer(-1), Rat::from_integer(1)]);

    // pad shared by the two Alice agents before the protocol begins
    sc.at(Rat::from_integer(-2), alice(0), "predistribution", move |ctx| {
        let pad = BitString::random(n, ctx.rng());
        ctx.send(alice(1), "a", pad.clone())?;
        ctx.send(alice(0), "a", pad)?;
        Ok(())
    });

    sc.at(Rat::from_integer(0), bob(0), "commit-challenge", move |ctx| {
        let b = BitString::random(n, ctx.rng());
        ctx.send(alice(0), "b", b.clone())?;
        // the verifier at the far site needs b to check the opening
        ctx.send(bob(1), "b", b)?;
        Ok(())
    });
    sc.at(Rat::from_integer(0), alice(0), "commit-response", move |ctx| {
        let b = ctx.recv("b")?;
        let a = ctx.recv("a")?;
        let x1 = BitString::select(d == 1, &b).xor(&a).expect("equal lengths");
        ctx.send(bob(0), "x1", x1)?;
        Ok(())
    });
    sc.at(Rat::from_integer(0), bob(0), "commit-mirror", move |ctx| {
        let x1 = ctx.recv("x1")?;
        ctx.send(bob(1), "x1", x1)?;
        Ok(())
    });

    sc.at(open_at, alice(1), "open", move |ctx| {
        let a = ctx.recv("a")?;
        ctx.send(bob(1), "open-d", BitString::from_u64(1, u64::from(d)))?;
        ctx.send(bob(1), "x2", a)?;
        Ok(())
    });

    // b and x1 travel two units from site 1
    let verify_time = if open_at > Rat::from_integer(2) {
        open_at
    } else {
        Rat::from_integer(2)
    };
    sc.at(verify_time, bob(1), "verify", move |ctx| {
        let b = ctx.recv("b")?;
        let x1 = ctx.recv("x1")?;
        let x2 = ctx.recv("x2")?;
        let unveiled = ctx.recv("open-d")?.get(0);
        let lhs = x1.xor(&x2).expect("equal lengths");
        let accepted = lhs == BitString::select(unveiled, &b);
        ctx.output("accepted", accepted);
        ctx.output("unveiled", u8::from(unveiled));
        Ok(())
    });

    let sim = run(sc, seed)?;
    let accepted = sim.outputs["accepted"].as_bool().unwrap_or(false);
    let unveiled = sim.outputs["unveiled"].as_u64().map(|v| v as u8);
    let mut outcome = CommitmentOutcome {
        protocol: "sbgkw".into(),
        accepted,
        unveiled,
        commit_point: Rat::from_integer(0),
        opening_point: open_at,
        verify_time,
        duration: open_at,
        duration_ms: None,
        verify_time_ms: None,
        expiry: expired.then(|| {
            "commitment expires at t = 2: the challenge reaches the opening agent".to_string()
        }),
    };
    outcome.attach_physical(distance_km.map(|km| unit_seconds(km, &Rat::from_integer(2))));
    Ok(SbgkwRun { sim, outcome })
}

/// The expiry attack, executed on the simulator: the commit-site agent sends
/// a pad-only x1, relays (b, x1) to the opener, who answers the unveiling
/// challenge as x2 = x1 xor d.b once the relay arrives. Returns the verifier
/// verdict for the challenged d. Succeeds for both challenges iff the opening
/// happens at t >= 2; earlier openings make the relay read a causality error.
pub fn sbgkw_expiry_attack(
    n: usize,
    challenge: u8,
    open_at: Rat,
    seed: u64,
) -> Result<bool, ProtocolError> {
    let mut sc = Scenario::new(
        "sbgkw-expiry-attack",
        vec![Rat::from_integer(-1), Rat::from_integer(1)],
    );

    sc.at(Rat::from_integer(0), bob(0), "commit-challenge", move |ctx| {
        let b = BitString::random(n, ctx.rng());
        ctx.send(alice(0), "b", b.clone())?;
        ctx.send(bob(1), "b", b)?;
        Ok(())
    });
    sc.at(Rat::from_integer(0), alice(0), "commit-response", move |ctx| {
        // no commitment: x1 is an arbitrary string, and both it and the
        // challenge are relayed to the opening agent
        let x1 = BitString::random(n, ctx.rng());
        let b = ctx.recv("b")?;
        ctx.send(bob(0), "x1", x1.clone())?;
        ctx.send(alice(1), "x1-relay", x1)?;
        ctx.send(alice(1), "b-relay", b)?;
        Ok(())
    });
    sc.at(Rat::from_integer(0), bob(0), "commit-mirror", move |ctx| {
        let x1 = ctx.recv("x1")?;
        ctx.send(bob(1), "x1", x1)?;
        Ok(())
    });

    sc.at(open_at, alice(1), "open", move |ctx| {
        let x1 = ctx.recv("x1-relay")?;
        let b = ctx.recv("b-relay")?;
        let x2 = x1
            .xor(&BitString::select(challenge == 1, &b))
            .expect("equal lengths");
        ctx.send(bob(1), "open-d", BitString::from_u64(1, u64::from(challenge)))?;
        ctx.send(bob(1), "x2", x2)?;
        Ok(())
    });

    let verify_time = if open_at > Rat::from_integer(2) {
        open_at
    } else {
        Rat::from_integer(2)
    };
    sc.at(verify_time, bob(1), "verify", move |ctx| {
        let b = ctx.recv("b")?;
        let x1 = ctx.recv("x1")?;
        let x2 = ctx.recv("x2")?;
        let unveiled = ctx.recv("open-d")?.get(0);
        let accepted = x1.xor(&x2).expect("len") == BitString::select(unveiled, &b);
        ctx.output("accepted", accepted);
        Ok(())
    });

    let sim = run(sc, seed)?;
    Ok(sim.outputs["accepted"].as_bool().unwrap_or(false))
}

/// Exact maximum of p0 + p1 over deterministic classical strategies of the
/// two agents: f maps the challenge to x1, the opener answers g(d).
///
/// For a fixed f the two opening values decouple, so the inner maximisation
/// is exact: p0 is maximised by the most frequent value of f(b) and p1 by the
/// most frequent value of f(b) xor b. The scan over f is exhaustive, in
/// lexicographic order, keeping the first witness on ties; disjoint f-ranges
/// may be scanned in parallel and merged by (value, lowest index).
#[derive(Debug, Clone)]
pub struct SbgkwBinding {
    pub n: usize,
    pub max_p0_plus_p1: Ratio<u64>,
    /// Response tables of the witness: f(b) for all b, then (g(0), g(1)).
    pub witness_f: Vec<u64>,
    pub witness_g: [u64; 2],
}

impl SbgkwBinding {
    pub fn witness_is_all_zero(&self) -> bool {
        self.witness_f.iter().all(|&v| v == 0) && self.witness_g == [0, 0]
    }
}

pub fn sbgkw_binding_bruteforce(n: usize) -> Result<SbgkwBinding, ProtocolError> {
    if n == 0 || n > 3 {
        return Err(ProtocolError::Budget(format!(
            "exhaustive scan of 2^(n 2^n) commit functions is limited to n <= 3, got n = {n}"
        )));
    }
    let q = 1u64 << n;
    let table_bits = n as u32 * q as u32;
    let total: u64 = 1u64 << table_bits;

    let threads = crate::max_threads().max(1) as u64;
    let chunk = total.div_ceil(threads);
    let ranges: Vec<(u64, u64)> = (0..threads)
        .map(|i| (i * chunk, ((i + 1) * chunk).min(total)))
        .filter(|(lo, hi)| lo < hi)
        .collect();

    use rayon::prelude::*;
    let best_per_range: Vec<(u64, u64, [u64; 2])> = ranges
        .par_iter()
        .map(|&(lo, hi)| {
            let mut best_score = 0u64; // p0 + p1 in units of 1/q
            let mut best_code = lo;
            let mut best_g = [0u64; 2];
            let mask = q - 1;
            for code in lo..hi {
                let mut hist0 = [0u64; 8];
                let mut hist1 = [0u64; 8];
                for b in 0..q {
                    let fb = code >> (n as u64 * b) & mask;
                    hist0[fb as usize] += 1;
                    hist1[(fb ^ b) as usize] += 1;
                }
                let (mut g0, mut c0) = (0u64, 0u64);
                let (mut g1, mut c1) = (0u64, 0u64);
                for v in 0..q {
                    if hist0[v as usize] > c0 {
                        c0 = hist0[v as usize];
                        g0 = v;
                    }
                    if hist1[v as usize] > c1 {
                        c1 = hist1[v as usize];
                        g1 = v;
                    }
                }
                if c0 + c1 > best_score {
                    best_score = c0 + c1;
                    best_code = code;
                    best_g = [g0, g1];
                }
            }
            (best_score, best_code, best_g)
        })
        .collect();

    let mut best = best_per_range[0];
    for cand in best_per_range.into_iter().skip(1) {
        if cand.0 > best.0 {
            best = cand;
        }
    }
    let (score, code, witness_g) = best;
    let witness_f: Vec<u64> = (0..q).map(|b| code >> (n as u64 * b) & (q - 1)).collect();
    Ok(SbgkwBinding {
        n,
        max_p0_plus_p1: Ratio::new(score, q),
        witness_f,
        witness_g,
    })
}
