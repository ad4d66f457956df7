//! The three one-shot constructions: XOR-share commitment (auto-opening
//! relativistic variant), the trivial local-command commitment, and
//! distributed oblivious transfer.
//!
//! All three use the symmetric three-site layout: site 1 at x = -1, site 2 at
//! x = +1 and the midpoint site 0 at x = 0 where shares recombine one time
//! unit after they are announced.

use serde::Serialize;

use crate::bits::BitString;
use crate::netsim::{alice, bob, run, Scenario, SimRun};
use crate::spacetime::Rat;

use super::{unit_seconds, CommitmentOutcome, ProtocolError};

// location indices used by every scenario in this module
const MID: usize = 0; // x = 0
const SITE1: usize = 1; // x = -1
const SITE2: usize = 2; // x = +1

fn three_sites(name: &str) -> Scenario {
    Scenario::new(
        name,
        vec![
            Rat::from_integer(0),
            Rat::from_integer(-1),
            Rat::from_integer(1),
        ],
    )
}

/// XOR-share commitment: the agents announce d xor a and a at t = 0; the
/// shares meet at the midpoint at t = 1 where the commitment opens by itself.
pub fn secret_sharing_run(
    d: u8,
    seed: u64,
    distance_km: Option<f64>,
) -> Result<(SimRun, CommitmentOutcome), ProtocolError> {
    if d > 1 {
        return Err(ProtocolError::BadParameter("d must be 0 or 1".into()));
    }
    let mut sc = three_sites("secret-sharing");

    // the shared bit a reaches both agents before the protocol begins
    sc.at(Rat::from_integer(-2), alice(SITE1), "predistribution", move |ctx| {
        let a = BitString::from_u64(1, ctx.rng().next_u64() & 1);
        ctx.send(alice(SITE2), "a", a.clone())?;
        ctx.send(alice(SITE1), "a", a)?;
        Ok(())
    });

    sc.at(Rat::from_integer(0), alice(SITE1), "commit-share1", move |ctx| {
        let a = ctx.recv("a")?;
        let share = BitString::from_u64(1, u64::from(d)).xor(&a).expect("bits");
        ctx.send(bob(SITE1), "share1", share)?;
        Ok(())
    });
    sc.at(Rat::from_integer(0), alice(SITE2), "commit-share2", move |ctx| {
        let a = ctx.recv("a")?;
        ctx.send(bob(SITE2), "share2", a)?;
        Ok(())
    });
    for (site, tag) in [(SITE1, "share1"), (SITE2, "share2")] {
        sc.at(Rat::from_integer(0), bob(site), "forward", move |ctx| {
            let share = ctx.recv(tag)?;
            ctx.send(bob(MID), tag, share)?;
            Ok(())
        });
    }

    // the shares meet after one light-travel unit; the commitment opens
    sc.at(Rat::from_integer(1), bob(MID), "reconstruct", move |ctx| {
        let s1 = ctx.recv("share1")?;
        let s2 = ctx.recv("share2")?;
        let d_bit = s1.xor(&s2).expect("bits");
        ctx.send(bob(MID), "reconstructed-d", d_bit.clone())?;
        ctx.output("unveiled", u8::from(d_bit.get(0)));
        ctx.output("accepted", true);
        Ok(())
    });

    let sim = run(sc, seed)?;
    let unveiled = sim.outputs["unveiled"].as_u64().map(|v| v as u8);
    let mut outcome = CommitmentOutcome {
        protocol: "secret-sharing".into(),
        accepted: true,
        unveiled,
        commit_point: Rat::from_integer(0),
        opening_point: Rat::from_integer(1),
        verify_time: Rat::from_integer(1),
        duration: Rat::from_integer(1),
        duration_ms: None,
        verify_time_ms: None,
        expiry: Some("commitment auto-opens at t = 1 when the shares meet".into()),
    };
    outcome.attach_physical(distance_km.map(|km| unit_seconds(km, &Rat::from_integer(2))));
    Ok((sim, outcome))
}

/// Exact share distribution of the XOR commitment: over the two values of the
/// shared bit, each agent's share is uniform for either d.
pub fn secret_sharing_share_distribution(d: u8) -> [[u64; 2]; 2] {
    let mut counts = [[0u64; 2]; 2]; // [agent][share value]
    for a in 0..2u64 {
        counts[0][(u64::from(d) ^ a) as usize] += 1;
        counts[1][a as usize] += 1;
    }
    counts
}

/// The trivial commitment secure only under local command: both agents just
/// announce the committed bit and the verifier compares.
pub fn local_command_run(
    d: u8,
    seed: u64,
    distance_km: Option<f64>,
) -> Result<(SimRun, CommitmentOutcome), ProtocolError> {
    if d > 1 {
        return Err(ProtocolError::BadParameter("d must be 0 or 1".into()));
    }
    let mut sc = three_sites("local-command");

    sc.at(Rat::from_integer(-2), alice(SITE1), "brief", move |ctx| {
        let bit = BitString::from_u64(1, u64::from(d));
        ctx.send(alice(SITE2), "d", bit.clone())?;
        ctx.send(alice(SITE1), "d", bit)?;
        Ok(())
    });
    for (site, tag) in [(SITE1, "x1"), (SITE2, "x2")] {
        sc.at(Rat::from_integer(0), alice(site), "open", move |ctx| {
            let bit = ctx.recv("d")?;
            ctx.send(bob(site), tag, bit)?;
            Ok(())
        });
        sc.at(Rat::from_integer(0), bob(site), "forward", move |ctx| {
            let bit = ctx.recv(tag)?;
            ctx.send(bob(MID), tag, bit)?;
            Ok(())
        });
    }
    sc.at(Rat::from_integer(1), bob(MID), "verify", move |ctx| {
        let x1 = ctx.recv("x1")?;
        let x2 = ctx.recv("x2")?;
        ctx.output("accepted", x1 == x2);
        ctx.output("unveiled", u8::from(x1.get(0)));
        Ok(())
    });

    let sim = run(sc, seed)?;
    let accepted = sim.outputs["accepted"].as_bool().unwrap_or(false);
    let unveiled = sim.outputs["unveiled"].as_u64().map(|v| v as u8);
    let mut outcome = CommitmentOutcome {
        protocol: "local-command".into(),
        accepted,
        unveiled,
        commit_point: Rat::from_integer(0),
        opening_point: Rat::from_integer(0),
        verify_time: Rat::from_integer(1),
        duration: Rat::from_integer(0),
        duration_ms: None,
        verify_time_ms: None,
        expiry: None,
    };
    outcome.attach_physical(distance_km.map(|km| unit_seconds(km, &Rat::from_integer(2))));
    Ok((sim, outcome))
}

/// Binding audit of the local-command commitment: in the local command model
/// only the first agent learns the challenge, so no strategy beats an honest
/// commitment; delivering the challenge to both agents (global command) wins
/// with certainty.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LocalCommandAudit {
    pub local_max_p0_plus_p1: f64,
    pub global_max_p0_plus_p1: f64,
}

pub fn local_command_audit() -> LocalCommandAudit {
    // strategies: agent 1 answers v1(d); agent 2 answers a constant (local)
    // or v2(d) (global); the unveiling of d is accepted iff both equal d
    let mut local: f64 = 0.0;
    for v1 in 0..4u8 {
        // v1 encodes the map d -> bit as two bits
        for v2 in 0..2u8 {
            let mut total = 0.0;
            for d in 0..2u8 {
                let x1 = v1 >> d & 1;
                let x2 = v2;
                if x1 == d && x2 == d {
                    total += 1.0;
                }
            }
            local = local.max(total);
        }
    }
    let mut global: f64 = 0.0;
    for v1 in 0..4u8 {
        for v2 in 0..4u8 {
            let mut total = 0.0;
            for d in 0..2u8 {
                if v1 >> d & 1 == d && v2 >> d & 1 == d {
                    total += 1.0;
                }
            }
            global = global.max(total);
        }
    }
    LocalCommandAudit {
        local_max_p0_plus_p1: local,
        global_max_p0_plus_p1: global,
    }
}

/// Pure response functions of distributed oblivious transfer, kept separate
/// from the simulator so the exhaustive checks below can sweep them.
/// Server 1 answers its query bit with the masked chosen message; server 2
/// answers with the mask, shifted by the message difference when its query
/// bit is set. The two answers always XOR to m_c.
pub fn dot_response_server1(
    m0: &BitString,
    m1: &BitString,
    r: &BitString,
    query: bool,
) -> BitString {
    let chosen = if query { m1 } else { m0 };
    chosen.xor(r).expect("equal lengths")
}

pub fn dot_response_server2(
    m0: &BitString,
    m1: &BitString,
    r: &BitString,
    query: bool,
) -> BitString {
    let diff = m0.xor(m1).expect("equal lengths");
    BitString::select(query, &diff).xor(r).expect("equal lengths")
}

#[derive(Debug)]
pub struct DotRun {
    pub sim: SimRun,
    pub retrieved_hex: String,
}

/// Distributed oblivious transfer on the simulator: the requesting agents
/// query the two servers with alpha and alpha xor c, then combine the two
/// answers at the midpoint. Each server sees a marginally uniform query.
pub fn dot_run(
    m0: &BitString,
    m1: &BitString,
    c: u8,
    seed: u64,
) -> Result<DotRun, ProtocolError> {
    if m0.len() != m1.len() {
        return Err(ProtocolError::BadParameter(
            "messages must have equal length".into(),
        ));
    }
    if c > 1 {
        return Err(ProtocolError::BadParameter("c must be 0 or 1".into()));
    }
    let n = m0.len();
    let mut sc = three_sites("distributed-ot");

    // servers pre-share the mask r; requesters pre-share the query bits
    sc.at(Rat::from_integer(-2), bob(SITE1), "predistribution", move |ctx| {
        let r = BitString::random(n, ctx.rng());
        ctx.send(bob(SITE2), "r", r.clone())?;
        ctx.send(bob(SITE1), "r", r)?;
        Ok(())
    });
    sc.at(Rat::from_integer(-2), alice(SITE1), "briefing", move |ctx| {
        let q1 = ctx.rng().next_bool();
        let q2 = q1 ^ (c == 1);
        ctx.send(alice(SITE1), "query1", BitString::from_u64(1, u64::from(q1)))?;
        ctx.send(alice(SITE2), "query2", BitString::from_u64(1, u64::from(q2)))?;
        Ok(())
    });

    let (m0a, m1a) = (m0.clone(), m1.clone());
    sc.at(Rat::from_integer(0), alice(SITE1), "query-server1", move |ctx| {
        let q = ctx.recv("query1")?;
        ctx.send(bob(SITE1), "q1", q)?;
        Ok(())
    });
    sc.at(Rat::from_integer(0), bob(SITE1), "answer-server1", move |ctx| {
        let q = ctx.recv("q1")?.get(0);
        let r = ctx.recv("r")?;
        ctx.send(alice(SITE1), "w1", dot_response_server1(&m0a, &m1a, &r, q))?;
        Ok(())
    });
    let (m0b, m1b) = (m0.clone(), m1.clone());
    sc.at(Rat::from_integer(0), alice(SITE2), "query-server2", move |ctx| {
        let q = ctx.recv("query2")?;
        ctx.send(bob(SITE2), "q2", q)?;
        Ok(())
    });
    sc.at(Rat::from_integer(0), bob(SITE2), "answer-server2", move |ctx| {
        let q = ctx.recv("q2")?.get(0);
        let r = ctx.recv("r")?;
        ctx.send(alice(SITE2), "w2", dot_response_server2(&m0b, &m1b, &r, q))?;
        Ok(())
    });

    for (site, tag) in [(SITE1, "w1"), (SITE2, "w2")] {
        sc.at(Rat::from_integer(0), alice(site), "forward", move |ctx| {
            let w = ctx.recv(tag)?;
            ctx.send(alice(MID), tag, w)?;
            Ok(())
        });
    }
    sc.at(Rat::from_integer(1), alice(MID), "reconstruct", move |ctx| {
        let w1 = ctx.recv("w1")?;
        let w2 = ctx.recv("w2")?;
        let m = w1.xor(&w2).expect("equal lengths");
        ctx.output("retrieved", m.to_hex());
        Ok(())
    });

    let sim = run(sc, seed)?;
    let retrieved_hex = sim.outputs["retrieved"]
        .as_str()
        .unwrap_or_default()
        .to_string();
    Ok(DotRun { sim, retrieved_hex })
}
