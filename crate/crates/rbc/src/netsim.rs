//! Deterministic event-driven simulator of agents exchanging messages under
//! speed-of-light delay.
//!
//! A scenario fixes agent locations (natural units, c = 1, exact rational
//! coordinates) and a choreography of interactions ordered by
//! (time, location, sequence number). Interactions are closures that read
//! delivered messages, draw from their agent's own PRNG stream and send new
//! messages; a message between distinct locations is delivered no earlier
//! than its light travel time, so causality violations are impossible by
//! construction. Reading a payload that has not yet reached the agent is a
//! [`SimError::Causality`] naming the offending data.
//!
//! Per-agent randomness streams derive from (master seed, party, location),
//! making transcripts bit-identical for a fixed (scenario, seed).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::prng::SplitMix64;
use crate::spacetime::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    fn code(self) -> u64 {
        match self {
            Party::Alice => 1,
            Party::Bob => 2,
        }
    }
}

/// An agent is a (party, location) pair; it only acts at its own location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId {
    pub party: Party,
    pub location: usize,
}

pub fn alice(location: usize) -> AgentId {
    AgentId {
        party: Party::Alice,
        location,
    }
}

pub fn bob(location: usize) -> AgentId {
    AgentId {
        party: Party::Bob,
        location,
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(
        "causality error: '{tag}' for {agent:?} at t={at} is only delivered at t={available} \
         (interaction '{round}')"
    )]
    Causality {
        tag: String,
        agent: AgentId,
        at: String,
        available: String,
        round: String,
    },
    #[error("no message '{tag}' addressed to {agent:?} (interaction '{round}')")]
    MissingData {
        tag: String,
        agent: AgentId,
        round: String,
    },
    #[error("location index {0} out of range")]
    BadLocation(usize),
}

/// One message; doubles as the transcript record.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Record {
    pub id: usize,
    pub round: String,
    pub tag: String,
    pub from: AgentId,
    pub to: AgentId,
    #[serde(with = "crate::report::rat_serde")]
    pub send_time: Rat,
    #[serde(with = "crate::report::rat_serde")]
    pub deliver_time: Rat,
    pub direction: String,
    pub payload_hex: String,
    pub payload_bits: usize,
    /// Ids of the records whose payloads fed this one.
    pub parents: Vec<usize>,
}

/// Ordered record of every message of a run; reproducible from the seed.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
pub struct Transcript {
    pub records: Vec<Record>,
}

impl Transcript {
    /// Line-delimited JSON, one record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

fn direction(from: AgentId, to: AgentId) -> String {
    match (from.party, to.party) {
        (Party::Alice, Party::Bob) => "alice_to_bob".to_string(),
        (Party::Bob, Party::Alice) => "bob_to_alice".to_string(),
        (Party::Alice, Party::Alice) => "alice_internal".to_string(),
        (Party::Bob, Party::Bob) => "bob_internal".to_string(),
    }
}

/// Execution context handed to an interaction closure. Reads are restricted
/// to messages already delivered to the closure's agent, which is exactly its
/// past light cone view.
pub struct Ctx<'a> {
    pub time: Rat,
    pub agent: AgentId,
    round: String,
    sim: &'a mut SimState,
}

impl Ctx<'_> {
    /// Reads the payload with the given tag addressed to (or sent by) this
    /// agent. The message becomes a provenance parent of everything the
    /// interaction sends afterwards.
    pub fn recv(&mut self, tag: &str) -> Result<BitString, SimError> {
        let mut best: Option<(usize, Rat, BitString)> = None;
        for r in &self.sim.messages {
            if r.tag != tag {
                continue;
            }
            let visible_at = if r.to == self.agent {
                Some(r.deliver_time)
            } else if r.from == self.agent {
                Some(r.send_time)
            } else {
                None
            };
            if let Some(at) = visible_at {
                if best.as_ref().map_or(true, |(_, t, _)| at < *t) {
                    best = Some((r.id, at, r.payload.clone()));
                }
            }
        }
        match best {
            Some((id, at, payload)) if at <= self.time => {
                if !self.sim.accessed.contains(&id) {
                    self.sim.accessed.push(id);
                }
                Ok(payload)
            }
            Some((_, at, _)) => Err(SimError::Causality {
                tag: tag.to_string(),
                agent: self.agent,
                at: crate::report::rat_to_string(&self.time),
                available: crate::report::rat_to_string(&at),
                round: self.round.clone(),
            }),
            None => Err(SimError::MissingData {
                tag: tag.to_string(),
                agent: self.agent,
                round: self.round.clone(),
            }),
        }
    }

    pub fn has(&self, tag: &str) -> bool {
        self.sim.messages.iter().any(|r| {
            r.tag == tag
                && ((r.to == self.agent && r.deliver_time <= self.time)
                    || (r.from == self.agent && r.send_time <= self.time))
        })
    }

    /// This agent's private randomness stream.
    pub fn rng(&mut self) -> &mut SplitMix64 {
        let master = self.sim.seed;
        self.sim.rngs.entry(self.agent).or_insert_with(|| {
            SplitMix64::derive(master, self.agent.party.code(), self.agent.location as u64)
        })
    }

    /// Sends `payload` to `to`; delivery is delayed by distance (c = 1), or
    /// by the scenario's local latency at a shared location.
    pub fn send(&mut self, to: AgentId, tag: &str, payload: BitString) -> Result<(), SimError> {
        let from_x = self
            .sim
            .locations
            .get(self.agent.location)
            .copied()
            .ok_or(SimError::BadLocation(self.agent.location))?;
        let to_x = self
            .sim
            .locations
            .get(to.location)
            .copied()
            .ok_or(SimError::BadLocation(to.location))?;
        let delay = if self.agent.location == to.location {
            self.sim.local_latency
        } else {
            let dx = to_x - from_x;
            if dx >= Rat::from_integer(0) {
                dx
            } else {
                -dx
            }
        };
        let id = self.sim.messages.len();
        let parents = self.sim.accessed.clone();
        self.sim.messages.push(Message {
            id,
            round: self.round.clone(),
            tag: tag.to_string(),
            from: self.agent,
            to,
            send_time: self.time,
            deliver_time: self.time + delay,
            payload,
            parents,
        });
        Ok(())
    }

    /// Records a run-level output value (e.g. the reconstructed bit).
    pub fn output(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.sim.outputs.insert(key.to_string(), value.into());
    }
}

struct Message {
    id: usize,
    round: String,
    tag: String,
    from: AgentId,
    to: AgentId,
    send_time: Rat,
    deliver_time: Rat,
    payload: BitString,
    parents: Vec<usize>,
}

struct SimState {
    seed: u64,
    locations: Vec<Rat>,
    local_latency: Rat,
    messages: Vec<Message>,
    accessed: Vec<usize>,
    rngs: BTreeMap<AgentId, SplitMix64>,
    outputs: BTreeMap<String, serde_json::Value>,
}

type Script = Box<dyn FnOnce(&mut Ctx) -> Result<(), SimError>>;

pub struct Interaction {
    pub time: Rat,
    pub agent: AgentId,
    pub round: String,
    script: Script,
}

/// Agent locations plus the interaction choreography.
pub struct Scenario {
    pub name: String,
    pub locations: Vec<Rat>,
    /// Delay of same-location exchanges; zero unless configured.
    pub local_latency: Rat,
    pub interactions: Vec<Interaction>,
}

impl Scenario {
    pub fn new(name: &str, locations: Vec<Rat>) -> Self {
        Scenario {
            name: name.to_string(),
            locations,
            local_latency: Rat::from_integer(0),
            interactions: Vec::new(),
        }
    }

    pub fn at(
        &mut self,
        time: Rat,
        agent: AgentId,
        round: &str,
        script: impl FnOnce(&mut Ctx) -> Result<(), SimError> + 'static,
    ) {
        self.interactions.push(Interaction {
            time,
            agent,
            round: round.to_string(),
            script: Box::new(script),
        });
    }
}

/// Result of a run: the full message transcript plus run-level outputs.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SimRun {
    pub scenario: String,
    pub seed: u64,
    pub transcript: Transcript,
    pub outputs: BTreeMap<String, serde_json::Value>,
}

/// Executes the scenario with one deterministic event loop; events are
/// processed in (time, location, sequence number) order.
pub fn run(scenario: Scenario, seed: u64) -> Result<SimRun, SimError> {
    let mut order: Vec<(Rat, usize, usize)> = scenario
        .interactions
        .iter()
        .enumerate()
        .map(|(i, it)| (it.time, it.agent.location, i))
        .collect();
    order.sort();

    let mut state = SimState {
        seed,
        locations: scenario.locations.clone(),
        local_latency: scenario.local_latency,
        messages: Vec::new(),
        accessed: Vec::new(),
        rngs: BTreeMap::new(),
        outputs: BTreeMap::new(),
    };

    let mut scripts: Vec<Option<Interaction>> =
        scenario.interactions.into_iter().map(Some).collect();
    for (time, _, idx) in order {
        let interaction = scripts[idx].take().expect("each interaction runs once");
        state.accessed.clear();
        let mut ctx = Ctx {
            time,
            agent: interaction.agent,
            round: interaction.round,
            sim: &mut state,
        };
        (interaction.script)(&mut ctx)?;
    }

    let records = state
        .messages
        .iter()
        .map(|m| Record {
            id: m.id,
            round: m.round.clone(),
            tag: m.tag.clone(),
            from: m.from,
            to: m.to,
            send_time: m.send_time,
            deliver_time: m.deliver_time,
            direction: direction(m.from, m.to),
            payload_hex: m.payload.to_hex(),
            payload_bits: m.payload.len(),
            parents: m.parents.clone(),
        })
        .collect();
    Ok(SimRun {
        scenario: scenario.name,
        seed,
        transcript: Transcript { records },
        outputs: state.outputs,
    })
}

/// Audits a transcript against the scenario geometry: every message must
/// respect the light-travel delay, and every payload's provenance parents
/// must lie in the past light cone of the send event. Transcripts produced by
/// [`run`] always pass; a hand-forged transcript that leaks data early fails.
pub fn audit_causality(transcript: &Transcript, locations: &[Rat], local_latency: Rat) -> bool {
    audit_causality_report(transcript, locations, local_latency).is_empty()
}

pub fn audit_causality_report(
    transcript: &Transcript,
    locations: &[Rat],
    local_latency: Rat,
) -> Vec<String> {
    let mut violations = Vec::new();
    let by_id: BTreeMap<usize, &Record> = transcript.records.iter().map(|r| (r.id, r)).collect();
    for r in &transcript.records {
        let (Some(&fx), Some(&tx)) = (locations.get(r.from.location), locations.get(r.to.location))
        else {
            violations.push(format!("record {}: bad location index", r.id));
            continue;
        };
        let dx = if tx >= fx { tx - fx } else { fx - tx };
        let min_delay = if r.from.location == r.to.location {
            local_latency
        } else {
            dx
        };
        if r.deliver_time - r.send_time < min_delay {
            violations.push(format!(
                "record {} ('{}'): delivered faster than light ({} -> {})",
                r.id,
                r.tag,
                crate::report::rat_to_string(&r.send_time),
                crate::report::rat_to_string(&r.deliver_time),
            ));
        }
        for &pid in &r.parents {
            let Some(parent) = by_id.get(&pid) else {
                violations.push(format!("record {}: missing parent {}", r.id, pid));
                continue;
            };
            // the parent's data exists at its send and deliver events; one of
            // them must reach this record's send event
            let sx = locations[r.from.location];
            let reach_from = |ex: Rat, et: Rat| {
                let dx = if sx >= ex { sx - ex } else { ex - sx };
                dx <= r.send_time - et
            };
            let ok = reach_from(locations[parent.from.location], parent.send_time)
                || reach_from(locations[parent.to.location], parent.deliver_time);
            if !ok {
                violations.push(format!(
                    "record {} ('{}'): parent {} ('{}') is outside the past light cone",
                    r.id, r.tag, pid, parent.tag
                ));
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i128) -> Rat {
        Rat::from_integer(n)
    }

    fn two_site_scenario() -> Scenario {
        // locations: 0 at x = -1, 1 at x = +1
        let mut sc = Scenario::new("ping", vec![rat(-1), rat(1)]);
        sc.at(rat(0), alice(0), "commit", |ctx| {
            let payload = BitString::random(8, ctx.rng());
            ctx.send(bob(1), "ping", payload)?;
            Ok(())
        });
        sc.at(rat(2), bob(1), "reply", |ctx| {
            let got = ctx.recv("ping")?;
            ctx.send(alice(0), "pong", got)?;
            Ok(())
        });
        sc
    }

    #[test]
    fn deterministic_transcripts() {
        let a = run(two_site_scenario(), 42).unwrap();
        let b = run(two_site_scenario(), 42).unwrap();
        assert_eq!(a.transcript.to_jsonl(), b.transcript.to_jsonl());
        let c = run(two_site_scenario(), 43).unwrap();
        assert_ne!(a.transcript.to_jsonl(), c.transcript.to_jsonl());
    }

    #[test]
    fn delay_law_exact() {
        let r = run(two_site_scenario(), 1).unwrap();
        for rec in &r.transcript.records {
            assert!(rec.deliver_time - rec.send_time == rat(2));
        }
    }

    #[test]
    fn empty_schedule_empty_transcript() {
        let sc = Scenario::new("empty", vec![rat(0)]);
        let r = run(sc, 9).unwrap();
        assert!(r.transcript.records.is_empty());
    }

    #[test]
    fn reading_undelivered_data_is_causality_error() {
        let mut sc = Scenario::new("early", vec![rat(-1), rat(1)]);
        sc.at(rat(0), alice(0), "commit", |ctx| {
            let payload = BitString::zeros(4);
            ctx.send(bob(1), "secret", payload)?;
            Ok(())
        });
        // distance is 2 but the read happens after 1 time unit
        sc.at(rat(1), bob(1), "peek", |ctx| {
            ctx.recv("secret")?;
            Ok(())
        });
        match run(sc, 0) {
            Err(SimError::Causality { tag, available, .. }) => {
                assert_eq!(tag, "secret");
                assert_eq!(available, "2");
            }
            other => panic!("expected causality error, got {other:?}"),
        }
    }

    #[test]
    fn audit_accepts_run_output_and_rejects_forgery() {
        let r = run(two_site_scenario(), 7).unwrap();
        let locations = vec![rat(-1), rat(1)];
        assert!(audit_causality(&r.transcript, &locations, rat(0)));

        // forge: deliver the pong before light can carry it
        let mut forged = r.transcript.clone();
        forged.records[1].deliver_time = forged.records[1].send_time;
        assert!(!audit_causality(&forged, &locations, rat(0)));

        // forge: a reply whose parent was never in its past cone
        let mut forged = r.transcript.clone();
        forged.records[1].send_time = rat(1);
        forged.records[1].deliver_time = rat(3);
        assert!(!audit_causality(&forged, &locations, rat(0)));
    }

    #[test]
    fn same_location_delivery_is_instantaneous() {
        let mut sc = Scenario::new("local", vec![rat(5)]);
        sc.at(rat(0), bob(0), "challenge", |ctx| {
            ctx.send(alice(0), "y", BitString::from_u64(4, 0b1010))?;
            Ok(())
        });
        sc.at(rat(0), alice(0), "response", |ctx| {
            let y = ctx.recv("y")?;
            ctx.output("seen", y.to_hex());
            Ok(())
        });
        let r = run(sc, 0).unwrap();
        assert_eq!(r.outputs["seen"], serde_json::json!("a"));
    }

    #[test]
    fn nonzero_local_latency_delays_delivery() {
        let mut sc = Scenario::new("latency", vec![rat(0)]);
        sc.local_latency = Rat::new(1, 100);
        sc.at(rat(0), bob(0), "send", |ctx| {
            ctx.send(alice(0), "y", BitString::zeros(1))?;
            Ok(())
        });
        sc.at(rat(0), alice(0), "read", |ctx| match ctx.recv("y") {
            Err(SimError::Causality { .. }) => Ok(()),
            other => panic!("latency should delay delivery, got {other:?}"),
        });
        run(sc, 0).unwrap();
    }
}
