//! Commitment protocols: state machines, honest roles, adversary scripts and
//! hiding/binding audits.
//!
//! Every protocol runs on the [`crate::netsim`] event loop, so the
//! light-travel constraints come from the scenario geometry rather than from
//! per-protocol bookkeeping. Natural units (c = 1) are used inside the
//! simulator; physical timestamps are attached to outcomes when a distance in
//! kilometres is supplied.

pub mod audits;
pub mod multiround;
pub mod sbgkw;
pub mod simple;

use serde::Serialize;
use thiserror::Error;

use crate::gf::GfError;
use crate::netsim::SimError;
use crate::spacetime::{Rat, C_KM_S};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error("field error: {0}")]
    Field(#[from] GfError),
    #[error("game error: {0}")]
    Game(#[from] crate::games::GameError),
    #[error("{0}")]
    BadParameter(String),
    #[error("audit budget exceeded: {0}")]
    Budget(String),
}

/// Result of one commitment run, with the phase timestamps in natural units
/// and optionally in physical seconds.
#[derive(Debug, Clone, Serialize)]
pub struct CommitmentOutcome {
    pub protocol: String,
    pub accepted: bool,
    pub unveiled: Option<u8>,
    #[serde(with = "crate::report::rat_serde")]
    pub commit_point: Rat,
    #[serde(with = "crate::report::rat_serde")]
    pub opening_point: Rat,
    #[serde(with = "crate::report::rat_serde")]
    pub verify_time: Rat,
    /// Length of the sustain interval, natural units.
    #[serde(with = "crate::report::rat_serde")]
    pub duration: Rat,
    /// Physical timestamps when the scenario was given a distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify_time_ms: Option<f64>,
    /// Binding-audit flag, e.g. an opening scheduled after the commitment
    /// expired.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expiry: Option<String>,
}

impl CommitmentOutcome {
    pub(crate) fn attach_physical(&mut self, unit_seconds: Option<f64>) {
        if let Some(unit) = unit_seconds {
            let to_ms = |r: &Rat| rat_to_f64(r) * unit * 1e3;
            self.duration_ms = Some(to_ms(&self.duration));
            self.verify_time_ms = Some(to_ms(&self.verify_time));
        }
    }
}

pub(crate) fn rat_to_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Seconds per natural time unit when `natural_units` of length correspond to
/// `distance_km` kilometres.
pub(crate) fn unit_seconds(distance_km: f64, natural_units: &Rat) -> f64 {
    distance_km / rat_to_f64(natural_units) / C_KM_S
}
