//! Scenario configuration: TOML text with sections.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attack::{AttackKind, AttackSpec};
use crate::codec::GooseEntry;
use crate::grid::{FaultSpec, FaultType};
use crate::sim::{SAMPLES_PER_SECOND, SAMPLES_PER_CYCLE};

use super::HarnessError;

pub const NOMINAL_FREQUENCY_HZ: f64 = 60.0;

fn d_freq() -> f64 {
    NOMINAL_FREQUENCY_HZ
}
fn d_rate() -> u32 {
    SAMPLES_PER_SECOND as u32
}
fn d_duration() -> f64 {
    6.0
}
fn d_delay() -> f64 {
    2.0
}
fn d_true() -> bool {
    true
}
fn d_reclose() -> f64 {
    0.5
}
fn d_test_fault() -> f64 {
    1.0
}
fn d_attack_duration() -> f64 {
    0.1
}
fn d_normal() -> usize {
    320
}
fn d_scale_lo() -> f64 {
    0.9
}
fn d_scale_hi() -> f64 {
    1.1
}
fn d_test_fraction() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultConfig {
    pub branch: usize,
    pub location: f64,
    pub impedance_ohm: f64,
    /// Label ("B-gnd", "A-B", ...) or class number 1-10.
    pub fault_type: String,
}

impl FaultConfig {
    pub fn to_spec(&self) -> Result<FaultSpec, HarnessError> {
        Ok(FaultSpec {
            branch: self.branch,
            location: self.location,
            impedance_ohm: self.impedance_ohm,
            fault_type: self
                .fault_type
                .parse::<FaultType>()
                .map_err(|e| HarnessError::Config(e.to_string()))?,
        })
    }

    pub fn from_spec(s: &FaultSpec) -> FaultConfig {
        FaultConfig {
            branch: s.branch,
            location: s.location,
            impedance_ohm: s.impedance_ohm,
            fault_type: s.fault_type.label().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EventConfig {
    #[default]
    None,
    Fault {
        start_s: f64,
        fault: FaultConfig,
    },
    Attack {
        attack: String,
        bus: usize,
        bay: u8,
        start_s: f64,
        #[serde(default = "d_attack_duration")]
        duration_s: f64,
        /// Fault mimicked by FDI_SV, or captured for replays.
        signature: Option<FaultConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScadaSection {
    #[serde(default = "d_delay")]
    pub collection_delay_s: f64,
}

impl Default for ScadaSection {
    fn default() -> Self {
        ScadaSection {
            collection_delay_s: d_delay(),
        }
    }
}

/// What happens after a mitigated attack: the tripped breaker is reclosed
/// and a test fault checks the CIED.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestorationConfig {
    #[serde(default = "d_true")]
    pub enabled: bool,
    /// Seconds from CIED activation to reclosing.
    #[serde(default = "d_reclose")]
    pub reclose_after_s: f64,
    /// Seconds from reclosing to the test fault.
    #[serde(default = "d_test_fault")]
    pub test_fault_after_s: f64,
    /// Defaults to the attack signature.
    pub test_fault: Option<FaultConfig>,
}

impl Default for RestorationConfig {
    fn default() -> Self {
        RestorationConfig {
            enabled: true,
            reclose_after_s: d_reclose(),
            test_fault_after_s: d_test_fault(),
            test_fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub model: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub verdict: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    #[serde(default = "d_normal")]
    pub normal_samples: usize,
    #[serde(default = "d_scale_lo")]
    pub load_scale_min: f64,
    #[serde(default = "d_scale_hi")]
    pub load_scale_max: f64,
    #[serde(default = "d_test_fraction")]
    pub test_fraction: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            normal_samples: d_normal(),
            load_scale_min: d_scale_lo(),
            load_scale_max: d_scale_hi(),
            test_fraction: d_test_fraction(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    #[serde(default = "d_freq")]
    pub nominal_frequency_hz: f64,
    #[serde(default = "d_rate")]
    pub sv_rate: u32,
    /// Minimum simulated time; restoration steps extend it as needed.
    #[serde(default = "d_duration")]
    pub duration_s: f64,
    #[serde(default)]
    pub event: EventConfig,
    #[serde(default)]
    pub scada: ScadaSection,
    #[serde(default)]
    pub restoration: RestorationConfig,
    #[serde(default)]
    pub paths: PathsConfig,
    #[serde(default)]
    pub dataset: DatasetSection,
}

impl ScenarioConfig {
    pub fn with_seed(seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            seed,
            nominal_frequency_hz: d_freq(),
            sv_rate: d_rate(),
            duration_s: d_duration(),
            event: EventConfig::None,
            scada: ScadaSection::default(),
            restoration: RestorationConfig::default(),
            paths: PathsConfig::default(),
            dataset: DatasetSection::default(),
        }
    }

    /// FDI_SV on bus 8 bay 2 (line 7-8) mimicking a 1-ohm B-gnd fault at
    /// 1.0 s, then SCADA detection, CIED takeover and a test fault.
    pub fn reference_scenario(seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            event: EventConfig::Attack {
                attack: AttackKind::FdiSv.as_str().to_string(),
                bus: 8,
                bay: 2,
                start_s: 1.0,
                duration_s: d_attack_duration(),
                signature: Some(FaultConfig {
                    branch: 14,
                    location: 0.5,
                    impedance_ohm: 1.0,
                    fault_type: "B-gnd".into(),
                }),
            },
            ..ScenarioConfig::with_seed(seed)
        }
    }

    pub fn parse(text: &str) -> Result<ScenarioConfig, HarnessError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ScenarioConfig, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        ScenarioConfig::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.nominal_frequency_hz != NOMINAL_FREQUENCY_HZ {
            return bad(format!("nominal frequency must be {NOMINAL_FREQUENCY_HZ} Hz"));
        }
        if self.sv_rate as u64 != SAMPLES_PER_SECOND {
            return bad(format!(
                "SV rate must be {SAMPLES_PER_SECOND} samples/s ({SAMPLES_PER_CYCLE} per cycle)"
            ));
        }
        if !(self.duration_s > 0.0 && self.duration_s <= 600.0) {
            return bad("duration_s must be in (0, 600]".into());
        }
        if !(1.0..=3.0).contains(&self.scada.collection_delay_s) {
            return bad("scada.collection_delay_s must be in [1, 3]".into());
        }
        let r = &self.restoration;
        if !(r.reclose_after_s >= 0.0 && r.test_fault_after_s > 0.0) {
            return bad("restoration delays must be non-negative".into());
        }
        let d = &self.dataset;
        if !(0.0 < d.load_scale_min && d.load_scale_min <= d.load_scale_max) {
            return bad("dataset load scale range is empty".into());
        }
        if !(0.0 < d.test_fraction && d.test_fraction < 1.0) {
            return bad("dataset.test_fraction must be in (0, 1)".into());
        }
        match &self.event {
            EventConfig::None => {}
            EventConfig::Fault { start_s, fault } => {
                fault.to_spec()?;
                if !(*start_s > 0.0 && *start_s < self.duration_s) {
                    return bad("fault start_s must lie inside the run".into());
                }
            }
            EventConfig::Attack { .. } => {
                self.attack_spec()?;
            }
        }
        if let Some(f) = &r.test_fault {
            f.to_spec()?;
        }
        Ok(())
    }

    pub fn attack_spec(&self) -> Result<Option<AttackSpec>, HarnessError> {
        let EventConfig::Attack {
            attack,
            bus,
            bay,
            start_s,
            duration_s,
            signature,
        } = &self.event
        else {
            return Ok(None);
        };
        let kind: AttackKind = attack.parse().map_err(|e: crate::attack::AttackError| HarnessError::Config(e.to_string()))?;
        let spec = AttackSpec {
            kind,
            bus: *bus,
            bay: *bay,
            start_s: *start_s,
            duration_s: *duration_s,
            signature: signature.as_ref().map(FaultConfig::to_spec).transpose()?,
            trip_payload: GooseEntry {
                trip: true,
                cb_closed: true,
            },
        };
        spec.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if !kind.is_sv() || kind == AttackKind::FdiSv {
            return Ok(Some(spec));
        }
        if spec.signature.is_none() {
            return Err(HarnessError::Config(format!("{kind} needs a signature fault to capture")));
        }
        Ok(Some(spec))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scenario_round_trips_through_toml() {
        let c = ScenarioConfig::reference_scenario(7);
        let text = c.to_toml();
        assert_eq!(ScenarioConfig::parse(&text).unwrap(), c);
    }

    #[test]
    fn seed_is_mandatory_and_unknown_keys_rejected() {
        assert!(ScenarioConfig::parse("").is_err());
        assert!(ScenarioConfig::parse("seed = 1\nbogus = 2\n").is_err());
        let c = ScenarioConfig::parse("seed = 1\n").unwrap();
        assert_eq!(c.event, EventConfig::None);
        assert_eq!(c.dataset.normal_samples, 320);
    }

    #[test]
    fn rejects_other_rates_and_bad_events() {
        assert!(ScenarioConfig::parse("seed = 1\nsv_rate = 4000\n").is_err());
        assert!(ScenarioConfig::parse("seed = 1\nnominal_frequency_hz = 50.0\n").is_err());
        let t = "seed = 1\n[event]\nkind = \"attack\"\nattack = \"FDI_SV\"\nbus = 8\nbay = 2\nstart_s = 1.0\n";
        assert!(ScenarioConfig::parse(t).is_err());
        let t = "seed = 1\n[event]\nkind = \"fault\"\nstart_s = 1.0\n[event.fault]\nbranch = 3\nlocation = 0.5\nimpedance_ohm = 1.0\nfault_type = \"A-B\"\n";
        assert!(matches!(ScenarioConfig::parse(t).unwrap().event, EventConfig::Fault { .. }));
    }
}
