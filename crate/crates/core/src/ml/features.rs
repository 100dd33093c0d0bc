//! The 238-value feature vector.
//!
//! Layout: voltage magnitude (bus-major, phase-minor, 42), voltage angle
//! (42), frequency (42), breaker trip signal (56) and breaker status (56,
//! 1 = closed). Breakers follow the terminal order: line ends by branch id
//! (from, then to), generators, loads.

use crate::grid::{BusPhasors, End, NetworkModel, Terminal};

use super::MlError;

pub const NUM_BUSES: usize = 14;
pub const NUM_BREAKERS: usize = 56;
pub const CONTINUOUS_FEATURES: usize = 3 * 3 * NUM_BUSES;
pub const NUM_FEATURES: usize = CONTINUOUS_FEATURES + 2 * NUM_BREAKERS;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<FeatureVector, MlError> {
        if values.len() != NUM_FEATURES {
            return Err(MlError::Length {
                expected: NUM_FEATURES,
                actual: values.len(),
            });
        }
        Ok(FeatureVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn magnitude(&self, bus: usize, phase: usize) -> f64 {
        self.0[(bus - 1) * 3 + phase]
    }

    pub fn angle(&self, bus: usize, phase: usize) -> f64 {
        self.0[3 * NUM_BUSES + (bus - 1) * 3 + phase]
    }

    pub fn frequency(&self, bus: usize, phase: usize) -> f64 {
        self.0[6 * NUM_BUSES + (bus - 1) * 3 + phase]
    }

    pub fn trip(&self, cb: usize) -> bool {
        self.0[CONTINUOUS_FEATURES + cb] > 0.5
    }

    pub fn closed(&self, cb: usize) -> bool {
        self.0[CONTINUOUS_FEATURES + NUM_BREAKERS + cb] > 0.5
    }
}

/// Column headers in feature order.
pub fn feature_names(net: &NetworkModel) -> Vec<String> {
    let ph = ["a", "b", "c"];
    let mut names = Vec::with_capacity(NUM_FEATURES);
    for prefix in ["vmag", "vang", "freq"] {
        for bus in 1..=NUM_BUSES {
            for p in ph {
                names.push(format!("{prefix}_b{bus:02}_{p}"));
            }
        }
    }
    let cbs: Vec<String> = net
        .terminals()
        .into_iter()
        .map(|t| match t {
            Terminal::Line { branch, end } => {
                format!("l{branch:02}_{}", if end == End::From { "from" } else { "to" })
            }
            Terminal::Generator(i) => format!("g{}_b{:02}", i + 1, net.generators[i].bus),
            Terminal::Load(i) => format!("d{}_b{:02}", i + 1, net.loads[i].bus),
        })
        .collect();
    for prefix in ["trip", "closed"] {
        for c in &cbs {
            names.push(format!("{prefix}_{c}"));
        }
    }
    names
}

/// Builds the vector from one report per bus (any order) and the breaker
/// trip and status vectors.
pub fn assemble_features(
    buses: &[(usize, BusPhasors)],
    trips: &[bool],
    closed: &[bool],
) -> Result<FeatureVector, MlError> {
    for (len, what) in [(trips.len(), "trip"), (closed.len(), "status")] {
        if len != NUM_BREAKERS {
            return Err(MlError::Invalid(format!("{what} vector has {len} entries, want {NUM_BREAKERS}")));
        }
    }
    let mut by_bus: [Option<&BusPhasors>; NUM_BUSES] = [None; NUM_BUSES];
    for (bus, r) in buses {
        match bus.checked_sub(1).and_then(|i| by_bus.get_mut(i)) {
            Some(slot) => *slot = Some(r),
            None => return Err(MlError::Invalid(format!("bus {bus} outside 1..={NUM_BUSES}"))),
        }
    }
    let mut v = vec![0.0; NUM_FEATURES];
    for (i, r) in by_bus.iter().enumerate() {
        let r = r.ok_or(MlError::IncompleteSnapshot(i + 1))?;
        for p in 0..3 {
            v[i * 3 + p] = r.magnitude[p];
            v[3 * NUM_BUSES + i * 3 + p] = r.angle[p];
            v[6 * NUM_BUSES + i * 3 + p] = r.frequency[p];
        }
    }
    for k in 0..NUM_BREAKERS {
        v[CONTINUOUS_FEATURES + k] = trips[k] as u8 as f64;
        v[CONTINUOUS_FEATURES + NUM_BREAKERS + k] = closed[k] as u8 as f64;
    }
    FeatureVector::new(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_ieee14;
    use num_complex::Complex64;

    fn nominal() -> Vec<(usize, BusPhasors)> {
        let a = crate::grid::ALPHA;
        (1..=14)
            .map(|b| {
                (
                    b,
                    BusPhasors::from_phases([Complex64::new(1.0, 0.0), a * a, a], 60.0),
                )
            })
            .collect()
    }

    #[test]
    fn quiescent_vector() {
        let f = assemble_features(&nominal(), &[false; 56], &[true; 56]).unwrap();
        assert_eq!(f.values().len(), 238);
        for b in 1..=14 {
            for p in 0..3 {
                assert!((f.magnitude(b, p) - 1.0).abs() < 1e-12);
                assert_eq!(f.frequency(b, p), 60.0);
            }
        }
        for k in 0..56 {
            assert!(!f.trip(k));
            assert!(f.closed(k));
        }
    }

    #[test]
    fn arrival_order_does_not_matter() {
        let mut buses = nominal();
        buses[3].1.magnitude[1] = 0.5;
        let a = assemble_features(&buses, &[false; 56], &[true; 56]).unwrap();
        buses.reverse();
        let b = assemble_features(&buses, &[false; 56], &[true; 56]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.magnitude(4, 1), 0.5);
    }

    #[test]
    fn missing_bus_named() {
        let mut buses = nominal();
        buses.remove(6);
        assert_eq!(
            assemble_features(&buses, &[false; 56], &[true; 56]),
            Err(MlError::IncompleteSnapshot(7))
        );
    }

    #[test]
    fn header_layout() {
        let n = feature_names(&build_ieee14());
        assert_eq!(n.len(), 238);
        assert_eq!(n[0], "vmag_b01_a");
        assert_eq!(n[126], "trip_l01_from");
        assert_eq!(n[126 + 27], "trip_l14_to");
        assert_eq!(n[126 + 40], "trip_g1_b01");
        assert_eq!(n[182], "closed_l01_from");
        let mut u = n.clone();
        u.sort();
        u.dedup();
        assert_eq!(u.len(), 238);
    }
}
