//! Toolkit for relativistic bit-commitment protocols.
//!
//! The crate bundles the pieces needed to execute, attack and certify
//! relativistic commitment schemes:
//!
//! * [`bits`] / [`gf`] — bit strings and GF(2^n) arithmetic carrying every
//!   protocol payload,
//! * [`spacetime`] — light-cone tests and the protocol-to-communication-graph
//!   construction,
//! * [`games`] — multiplayer games, brute-force classical values and the
//!   security-bound formulas,
//! * [`netsim`] — a deterministic event simulator enforcing speed-of-light
//!   delays,
//! * [`protocols`] — the commitment protocols themselves plus hiding/binding
//!   audits,
//! * [`qcommit`] — the BB84-based commitment with imperfect devices,
//! * [`certify`] — strongly-binding (classical certification) analysis and the
//!   entangled attack that defeats it,
//! * [`report`] — stable JSON report types used by the `rbc` binary.

pub mod bits;
pub mod certify;
pub mod games;
pub mod gf;
pub mod netsim;
pub mod prng;
pub mod protocols;
pub mod qcommit;
pub mod report;
pub mod spacetime;

pub use bits::BitString;
pub use gf::{FieldElement, Gf};

/// Parallelism cap: RBC_THREADS when set, otherwise the machine's worker
/// count as rayon sees it.
pub fn max_threads() -> usize {
    std::env::var("RBC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or_else(rayon::current_num_threads)
}
