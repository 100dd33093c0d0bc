//! Relay settings computed from the network at configuration time.

use crate::grid::{bus_fault_state, End, FaultType, NetworkModel, OpenSet, PowerFlow, Terminal};

use super::SimError;

/// Bolted bus-fault impedance used to find the largest through-fault
/// contribution of a generator.
const BOLTED_PU: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SettingRules {
    pub line_pickup_pu: f64,
    /// Generator pickup over its largest bus-fault contribution.
    pub generator_margin: f64,
    /// Load pickup over its normal current.
    pub load_margin: f64,
}

impl Default for SettingRules {
    fn default() -> Self {
        SettingRules {
            line_pickup_pu: 0.2,
            generator_margin: 1.05,
            load_margin: 1.5,
        }
    }
}

/// Pickup and normal operate quantity per terminal (breaker order).
#[derive(Debug, Clone, PartialEq)]
pub struct ProtectionSettings {
    pub pickup_pu: Vec<f64>,
    pub normal_pu: Vec<f64>,
}

fn max_phase(i: &[num_complex::Complex64; 3]) -> f64 {
    i.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

impl ProtectionSettings {
    pub fn compute(net: &NetworkModel, base: &PowerFlow, rules: &SettingRules) -> Result<ProtectionSettings, SimError> {
        let st = base.phasor_state(net);
        let terms = net.terminals();
        let mut normal = vec![0.0; terms.len()];
        for (k, t) in terms.iter().enumerate() {
            normal[k] = match *t {
                Terminal::Line { branch, .. } => {
                    let br = net.branch(branch)?;
                    let f = st.current(net, Terminal::Line { branch, end: End::From });
                    let to = st.current(net, Terminal::Line { branch, end: End::To });
                    max_phase(&std::array::from_fn(|p| f[p] * br.tap + to[p]))
                }
                _ => max_phase(&st.currents[k]),
            };
        }
        let mut through = vec![0.0f64; terms.len()];
        for bus in &net.buses {
            for ft in FaultType::ALL {
                let s = bus_fault_state(net, base, bus.id, ft, BOLTED_PU, &OpenSet::new())?;
                for (k, t) in terms.iter().enumerate() {
                    if matches!(t, Terminal::Generator(_)) {
                        through[k] = through[k].max(max_phase(&s.currents[k]));
                    }
                }
            }
        }
        let pickup: Vec<f64> = terms
            .iter()
            .enumerate()
            .map(|(k, t)| match t {
                Terminal::Line { .. } => rules.line_pickup_pu,
                Terminal::Generator(_) => (through[k] * rules.generator_margin).max(normal[k] * rules.load_margin),
                Terminal::Load(_) => normal[k] * rules.load_margin,
            })
            .collect();
        for (k, (&p, &nrm)) in pickup.iter().zip(&normal).enumerate() {
            if p <= nrm {
                return Err(SimError::InvalidConfig(format!(
                    "terminal {k}: pickup {p:.4} pu not above normal {nrm:.4} pu"
                )));
            }
        }
        Ok(ProtectionSettings {
            pickup_pu: pickup,
            normal_pu: normal,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_ieee14, PowerFlowOptions};

    #[test]
    fn line_pickup_clears_charging_current() {
        let net = build_ieee14();
        let pf = PowerFlow::solve(&net, &OpenSet::new(), PowerFlowOptions::default()).unwrap();
        let s = ProtectionSettings::compute(&net, &pf, &SettingRules::default()).unwrap();
        for k in 0..40 {
            assert!(s.normal_pu[k] < 0.1, "terminal {k}: {}", s.normal_pu[k]);
        }
        for k in 40..56 {
            assert!(s.pickup_pu[k] > s.normal_pu[k]);
        }
    }
}
