//! Spacetime events, light-cone reachability and communication graphs.
//!
//! Everything lives in one spatial dimension with a single fixed frame.
//! Natural-unit mode (c = 1) uses exact rational coordinates so light-like
//! boundary cases are decided exactly; physical mode works in kilometres and
//! seconds with c fixed and a documented 1e-9 relative tolerance on the cone
//! test.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact coordinate in natural units.
pub type Rat = Ratio<i128>;

/// Speed of light, km/s, used by physical mode throughout the crate.
pub const C_KM_S: f64 = 299_792.458;

/// Relative tolerance of the floating-point cone test in physical mode.
pub const PHYSICAL_CONE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum SpacetimeError {
    #[error("separation must be positive, got {0}")]
    NonPositiveSeparation(f64),
    #[error("scenario needs at least one event")]
    NoEvents,
    #[error("duplicate event label {0}")]
    DuplicateLabel(usize),
}

/// An interaction point (x, t) with its interaction index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacetimeEvent {
    pub label: usize,
    #[serde(with = "crate::report::rat_serde")]
    pub x: Rat,
    #[serde(with = "crate::report::rat_serde")]
    pub t: Rat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
}

impl SpacetimeEvent {
    pub fn new(label: usize, x: Rat, t: Rat) -> Self {
        SpacetimeEvent {
            label,
            x,
            t,
            party: None,
            agent: None,
        }
    }
}

/// Directed causality DAG over interaction labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunicationGraph {
    pub n: usize,
    /// Vertex labels in ascending order.
    pub labels: Vec<usize>,
    /// Edges (j, k): k lies in the future light cone of j.
    pub edges: BTreeSet<(usize, usize)>,
}

impl CommunicationGraph {
    pub fn has_edge(&self, j: usize, k: usize) -> bool {
        self.edges.contains(&(j, k))
    }

    /// Visible-input sets of the broadcast reduction, keyed by vertex label:
    /// S_j = {k : (k, j) in E}. A constrained game on this graph and the
    /// non-communicating game where player j additionally receives the
    /// challenges {c_k} for k in S_j have identical classical strategy sets.
    pub fn broadcast_reduction(&self) -> BTreeMap<usize, BTreeSet<usize>> {
        let mut sets: BTreeMap<usize, BTreeSet<usize>> =
            self.labels.iter().map(|&l| (l, BTreeSet::new())).collect();
        for &(k, j) in &self.edges {
            sets.get_mut(&j).expect("edge endpoint is a vertex").insert(k);
        }
        sets
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm.
        let mut indeg: BTreeMap<usize, usize> = self.labels.iter().map(|&l| (l, 0)).collect();
        for &(_, k) in &self.edges {
            *indeg.get_mut(&k).unwrap() += 1;
        }
        let mut queue: Vec<usize> = indeg
            .iter()
            .filter(|&(_, &d)| d == 0)
            .map(|(&v, _)| v)
            .collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for &(j, k) in &self.edges {
                if j == v {
                    let d = indeg.get_mut(&k).unwrap();
                    *d -= 1;
                    if *d == 0 {
                        queue.push(k);
                    }
                }
            }
        }
        seen == self.n
    }
}

/// True iff e_k lies in the future light cone of e_j: |x_k - x_j| <= t_k - t_j.
pub fn reaches(e_j: &SpacetimeEvent, e_k: &SpacetimeEvent) -> bool {
    let dx = if e_k.x >= e_j.x {
        e_k.x - e_j.x
    } else {
        e_j.x - e_k.x
    };
    dx <= e_k.t - e_j.t
}

/// Physical-mode cone test (km, seconds): |dx| <= c dt up to relative 1e-9.
pub fn reaches_physical(x_j_km: f64, t_j_s: f64, x_k_km: f64, t_k_s: f64) -> bool {
    let dx = (x_k_km - x_j_km).abs();
    let ct = C_KM_S * (t_k_s - t_j_s);
    dx <= ct + PHYSICAL_CONE_TOL * dx.max(ct.abs()).max(1.0)
}

/// Builds the communication graph of an interaction list.
///
/// Coincident events (same x and t) are ordered by label and connected in
/// label order only, which keeps the graph acyclic; the order of simultaneous
/// interactions does not affect any downstream analysis.
pub fn build_graph(events: &[SpacetimeEvent]) -> Result<CommunicationGraph, SpacetimeError> {
    if events.is_empty() {
        return Err(SpacetimeError::NoEvents);
    }
    let mut labels = BTreeSet::new();
    for e in events {
        if !labels.insert(e.label) {
            return Err(SpacetimeError::DuplicateLabel(e.label));
        }
    }
    let mut edges = BTreeSet::new();
    for ej in events {
        for ek in events {
            if ej.label == ek.label || !reaches(ej, ek) {
                continue;
            }
            let coincident = ej.x == ek.x && ej.t == ek.t;
            if coincident && ej.label > ek.label {
                continue;
            }
            edges.insert((ej.label, ek.label));
        }
    }
    Ok(CommunicationGraph {
        n: events.len(),
        labels: labels.into_iter().collect(),
        edges,
    })
}

/// Maximum commitment time for two opening sites `separation_km` apart:
/// half the light travel time between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxCommitmentTime {
    pub separation_km: f64,
    pub seconds: f64,
    pub milliseconds: f64,
}

pub fn max_commitment_time(separation_km: f64) -> Result<MaxCommitmentTime, SpacetimeError> {
    if !(separation_km > 0.0) {
        return Err(SpacetimeError::NonPositiveSeparation(separation_km));
    }
    let seconds = separation_km / (2.0 * C_KM_S);
    Ok(MaxCommitmentTime {
        separation_km,
        seconds,
        milliseconds: seconds * 1e3,
    })
}

/// Natural-unit variant (c = 1): separation / 2.
pub fn max_commitment_time_natural(separation: Rat) -> Result<Rat, SpacetimeError> {
    if separation <= Rat::from_integer(0) {
        return Err(SpacetimeError::NonPositiveSeparation(0.0));
    }
    Ok(separation / Rat::from_integer(2))
}

/// One-way light travel time over `distance_km`, in seconds.
pub fn light_travel_time(distance_km: f64) -> Result<f64, SpacetimeError> {
    if !(distance_km > 0.0) {
        return Err(SpacetimeError::NonPositiveSeparation(distance_km));
    }
    Ok(distance_km / C_KM_S)
}

/// Event layout of the multiround protocol: interaction k happens at
/// t = k - 1, alternating between two sites `separation` apart (site 1 at
/// x = 0). With separation slightly above one time unit the resulting edge
/// set is exactly {(j, k) : j + 2 <= k}.
pub fn multiround_events(rounds: usize, separation: Rat) -> Vec<SpacetimeEvent> {
    (1..=rounds)
        .map(|k| {
            let x = if k % 2 == 1 {
                Rat::from_integer(0)
            } else {
                separation
            };
            SpacetimeEvent::new(k, x, Rat::from_integer(k as i128 - 1))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(label: usize, x: i128, t: i128) -> SpacetimeEvent {
        SpacetimeEvent::new(label, Rat::from_integer(x), Rat::from_integer(t))
    }

    #[test]
    fn reaches_examples() {
        assert!(reaches(&ev(1, 0, 0), &ev(2, 1, 1))); // light-like boundary
        assert!(!reaches(&ev(1, 0, 0), &ev(2, 2, 1))); // outside cone
        assert!(!reaches(&ev(1, 0, 0), &ev(2, 0, -1))); // past
    }

    #[test]
    fn reaches_transitive_along_chains() {
        let mut rng = crate::prng::SplitMix64::new(11);
        let mut checked = 0;
        while checked < 2000 {
            let r = |rng: &mut crate::prng::SplitMix64| {
                Rat::new(rng.next_below(41) as i128 - 20, 1 + rng.next_below(4) as i128)
            };
            let a = SpacetimeEvent::new(1, r(&mut rng), r(&mut rng));
            let b = SpacetimeEvent::new(2, r(&mut rng), r(&mut rng));
            let c = SpacetimeEvent::new(3, r(&mut rng), r(&mut rng));
            if reaches(&a, &b) && reaches(&b, &c) {
                assert!(reaches(&a, &c));
                checked += 1;
            }
        }
    }

    #[test]
    fn multiround_layout_gives_skip_one_graph() {
        let sep = Rat::new(1001, 1000); // 1 + epsilon
        for rounds in [2usize, 4, 6] {
            let g = build_graph(&multiround_events(rounds, sep)).unwrap();
            for j in 1..=rounds {
                for k in 1..=rounds {
                    assert_eq!(g.has_edge(j, k), j + 2 <= k, "({j},{k}) rounds={rounds}");
                }
            }
            assert!(g.is_acyclic());
        }
    }

    #[test]
    fn broadcast_reduction_multiround() {
        let g = build_graph(&multiround_events(4, Rat::new(1001, 1000))).unwrap();
        let sets = g.broadcast_reduction();
        assert!(sets[&1].is_empty());
        assert!(sets[&2].is_empty());
        assert_eq!(sets[&3], BTreeSet::from([1]));
        assert_eq!(sets[&4], BTreeSet::from([1, 2]));
    }

    #[test]
    fn broadcast_reduction_trivial_cases() {
        // single event: empty edge set, empty S
        let g = build_graph(&[ev(1, 0, 0)]).unwrap();
        assert!(g.edges.is_empty());
        assert!(g.broadcast_reduction()[&1].is_empty());

        // three collinear simultaneous events at distinct positions
        let g = build_graph(&[ev(1, 0, 0), ev(2, 1, 0), ev(3, 2, 0)]).unwrap();
        assert!(g.edges.is_empty());

        // total order: same location, increasing times
        let g = build_graph(&[ev(1, 0, 0), ev(2, 0, 1), ev(3, 0, 2), ev(4, 0, 3)]).unwrap();
        let sets = g.broadcast_reduction();
        for j in 1..=4usize {
            let expect: BTreeSet<usize> = (1..j).collect();
            assert_eq!(sets[&j], expect);
        }
    }

    #[test]
    fn coincident_events_stay_acyclic() {
        let g = build_graph(&[ev(1, 3, 2), ev(2, 3, 2), ev(3, 3, 2)]).unwrap();
        assert!(g.has_edge(1, 2));
        assert!(g.has_edge(2, 3));
        assert!(!g.has_edge(2, 1));
        assert!(g.is_acyclic());
    }

    #[test]
    fn random_graphs_acyclic_and_edge_monotone() {
        let mut rng = crate::prng::SplitMix64::new(5);
        for _ in 0..200 {
            let n = 2 + rng.next_below(6) as usize;
            let events: Vec<_> = (1..=n)
                .map(|label| {
                    ev(
                        label,
                        rng.next_below(9) as i128 - 4,
                        rng.next_below(9) as i128 - 4,
                    )
                })
                .collect();
            let g = build_graph(&events).unwrap();
            assert!(g.is_acyclic());

            // adding time to the head of an edge never removes it
            for &(j, k) in &g.edges {
                let mut later = events.clone();
                for e in later.iter_mut() {
                    if e.label == k {
                        e.t += Rat::from_integer(3);
                    }
                }
                // skip the coincident tie-break case where the pair stops
                // being coincident but stays causally connected
                let g2 = build_graph(&later).unwrap();
                assert!(g2.has_edge(j, k), "edge ({j},{k}) vanished");
            }
        }
    }

    #[test]
    fn commitment_time_figures() {
        let earth = max_commitment_time(12_742.0).unwrap();
        assert!((earth.milliseconds - 21.25).abs() < 0.01);

        // chord length recovered by inverting d = 2 c t for t = 15.6 ms
        let chord_km = 2.0 * C_KM_S * 15.6e-3;
        let gs = max_commitment_time(chord_km).unwrap();
        assert!((gs.milliseconds - 15.6).abs() < 1e-9);

        assert_eq!(
            max_commitment_time_natural(Rat::from_integer(2)).unwrap(),
            Rat::from_integer(1)
        );
        assert!(max_commitment_time(0.0).is_err());
        assert!(max_commitment_time(-3.0).is_err());
    }

    #[test]
    fn one_way_light_time() {
        let t = light_travel_time(131.0).unwrap();
        assert!((t * 1e6 - 437.0).abs() < 1.0); // microseconds
    }

    #[test]
    fn physical_cone_tolerance() {
        let t = 131.0 / C_KM_S;
        assert!(reaches_physical(0.0, 0.0, 131.0, t));
        assert!(reaches_physical(0.0, 0.0, 131.0, t * (1.0 - 1e-12)));
        assert!(!reaches_physical(0.0, 0.0, 131.0, t * (1.0 - 1e-6)));
    }
}
