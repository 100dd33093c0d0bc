use std::f64::consts::PI;

use num_complex::Complex64;

/// Three-phase measurements at one bus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusPhasors {
    /// Per-unit.
    pub magnitude: [f64; 3],
    /// Radians in (-π, π].
    pub angle: [f64; 3],
    /// Hz.
    pub frequency: [f64; 3],
}

impl BusPhasors {
    pub fn from_phases(v: [Complex64; 3], hz: f64) -> BusPhasors {
        BusPhasors {
            magnitude: v.map(|p| p.norm()),
            angle: v.map(|p| wrap_angle(p.arg())),
            frequency: [hz; 3],
        }
    }

    pub fn phasor(&self, phase: usize) -> Complex64 {
        Complex64::from_polar(self.magnitude[phase], self.angle[phase])
    }

    pub fn phasors(&self) -> [Complex64; 3] {
        [self.phasor(0), self.phasor(1), self.phasor(2)]
    }
}

/// Per-bus three-phase state of the whole network at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSnapshot {
    /// Seconds of simulation time.
    pub time: f64,
    /// Indexed by bus id - 1.
    pub buses: Vec<BusPhasors>,
}

impl SystemSnapshot {
    pub fn from_phase_voltages(v: &[[Complex64; 3]], hz: f64, time: f64) -> SystemSnapshot {
        SystemSnapshot {
            time,
            buses: v.iter().map(|p| BusPhasors::from_phases(*p, hz)).collect(),
        }
    }

    pub fn bus(&self, id: usize) -> Option<&BusPhasors> {
        id.checked_sub(1).and_then(|i| self.buses.get(i))
    }

    /// Largest per-phase magnitude difference against `other`, per bus.
    pub fn magnitude_deviation(&self, other: &SystemSnapshot) -> Vec<f64> {
        self.buses
            .iter()
            .zip(&other.buses)
            .map(|(a, b)| {
                (0..3)
                    .map(|p| (a.magnitude[p] - b.magnitude[p]).abs())
                    .fold(0.0, f64::max)
            })
            .collect()
    }
}

/// Maps an angle into (-π, π].
pub(crate) fn wrap_angle(theta: f64) -> f64 {
    let mut a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn phasors_round_trip() {
        let v = [
            Complex64::new(1.0, 0.1),
            Complex64::new(-0.5, -0.8),
            Complex64::new(-0.4, 0.9),
        ];
        let p = BusPhasors::from_phases(v, 60.0);
        for (a, b) in p.phasors().iter().zip(v.iter()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert_eq!(p.frequency, [60.0; 3]);
    }
}
