//! Rule-based Ethernet switch.
//!
//! Frames are forwarded by destination MAC to the port set of the matching
//! static rule, never back out of the ingress port. One port may be flagged
//! as the monitoring port: it receives a copy of every accepted frame and
//! may also inject.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use crate::codec::{MacAddr, RawFrame};

use super::SimError;

pub type PortId = usize;

/// What is plugged into a port.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Device {
    MergingUnit(u8),
    Ied(u8),
    Cied,
    Breaker(u8),
    Pmu,
    Gateway,
    Monitor,
}

impl fmt::Display for Device {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Device::MergingUnit(b) => write!(f, "MU{b:02}"),
            Device::Ied(b) => write!(f, "IED{b:02}"),
            Device::Cied => f.write_str("CIED"),
            Device::Breaker(b) => write!(f, "CB{b:02}"),
            Device::Pmu => f.write_str("PMU"),
            Device::Gateway => f.write_str("GW"),
            Device::Monitor => f.write_str("MON"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub device: Device,
    pub enabled: bool,
}

/// A frame leaving the switch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivery {
    pub port: PortId,
    pub frame: RawFrame,
}

/// Why a frame was not delivered somewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Drop {
    pub port: PortId,
    pub ingress: bool,
    pub dst: Option<MacAddr>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Forwarded {
    pub deliveries: Vec<Delivery>,
    pub drops: Vec<Drop>,
}

#[derive(Debug, Clone)]
pub struct SdnSwitch {
    pub name: String,
    ports: Vec<Port>,
    rules: BTreeMap<MacAddr, BTreeSet<PortId>>,
    monitor: Option<PortId>,
    /// Copies of frames seen while mirroring is on.
    mirror: Option<Vec<RawFrame>>,
}

impl SdnSwitch {
    pub fn new(name: impl Into<String>) -> SdnSwitch {
        SdnSwitch {
            name: name.into(),
            ports: Vec::new(),
            rules: BTreeMap::new(),
            monitor: None,
            mirror: None,
        }
    }

    pub fn add_port(&mut self, device: Device, enabled: bool) -> PortId {
        self.ports.push(Port { device, enabled });
        if device == Device::Monitor {
            self.monitor = Some(self.ports.len() - 1);
        }
        self.ports.len() - 1
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn port_of(&self, device: Device) -> Option<PortId> {
        self.ports.iter().position(|p| p.device == device)
    }

    pub fn monitor_port(&self) -> Option<PortId> {
        self.monitor
    }

    pub fn is_enabled(&self, port: PortId) -> bool {
        self.ports.get(port).is_some_and(|p| p.enabled)
    }

    pub fn set_enabled(&mut self, port: PortId, enabled: bool) -> Result<(), SimError> {
        let p = self
            .ports
            .get_mut(port)
            .ok_or(SimError::UnknownPort(port))?;
        p.enabled = enabled;
        Ok(())
    }

    pub fn add_rule(&mut self, dst: MacAddr, port: PortId) {
        self.rules.entry(dst).or_default().insert(port);
    }

    pub fn rules(&self) -> &BTreeMap<MacAddr, BTreeSet<PortId>> {
        &self.rules
    }

    /// Moves every rule entry pointing at `from` to `to`.
    pub fn redirect(&mut self, from: PortId, to: PortId) {
        for set in self.rules.values_mut() {
            if set.remove(&from) {
                set.insert(to);
            }
        }
    }

    /// Starts copying accepted frames for the monitoring port.
    pub fn start_mirror(&mut self, port: PortId) -> Result<(), SimError> {
        if self.monitor != Some(port) {
            return Err(SimError::NotMonitorPort {
                switch: self.name.clone(),
                port,
            });
        }
        self.mirror = Some(Vec::new());
        Ok(())
    }

    pub fn stop_mirror(&mut self) -> Vec<RawFrame> {
        self.mirror.take().unwrap_or_default()
    }

    pub fn mirroring(&self) -> bool {
        self.mirror.is_some()
    }

    /// Forwards one frame arriving on `ingress`.
    pub fn forward(&mut self, ingress: PortId, frame: RawFrame, out: &mut Forwarded) {
        let dst = frame.dst();
        if !self.is_enabled(ingress) {
            out.drops.push(Drop {
                port: ingress,
                ingress: true,
                dst,
            });
            return;
        }
        if let Some(m) = self.mirror.as_mut() {
            m.push(frame.clone());
        }
        let Some(ports) = dst.and_then(|d| self.rules.get(&d)) else {
            return;
        };
        for &p in ports {
            if p == ingress {
                continue;
            }
            if self.ports[p].enabled {
                out.deliveries.push(Delivery {
                    port: p,
                    frame: frame.clone(),
                });
            } else {
                out.drops.push(Drop {
                    port: p,
                    ingress: false,
                    dst,
                });
            }
        }
    }
}
