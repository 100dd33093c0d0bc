//! Bay allocation and addressing.
//!
//! Bays at a bus are numbered from 1: generator bays first, then load bays,
//! then one bay per incident line end in branch order. Every bay has one
//! merging unit, one IED and one breaker.

use crate::codec::MacAddr;
use crate::grid::{End, NetworkModel, Terminal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bay {
    /// 1-based within the substation.
    pub number: u8,
    pub terminal: Terminal,
    /// Global breaker index (feature order).
    pub cb_index: usize,
}

impl Bay {
    pub fn is_line(&self) -> bool {
        matches!(self.terminal, Terminal::Line { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubstationLayout {
    pub bus: usize,
    pub bays: Vec<Bay>,
}

impl SubstationLayout {
    pub fn bay(&self, number: u8) -> Option<&Bay> {
        number.checked_sub(1).and_then(|i| self.bays.get(i as usize))
    }

    pub fn bay_of_terminal(&self, t: Terminal) -> Option<&Bay> {
        self.bays.iter().find(|b| b.terminal == t)
    }

    pub fn line_bay(&self, branch: usize) -> Option<&Bay> {
        self.bays
            .iter()
            .find(|b| matches!(b.terminal, Terminal::Line { branch: br, .. } if br == branch))
    }
}

pub fn substation_layouts(net: &NetworkModel) -> Vec<SubstationLayout> {
    net.buses
        .iter()
        .map(|bus| {
            let mut terms = Vec::new();
            for (i, g) in net.generators.iter().enumerate() {
                if g.bus == bus.id {
                    terms.push(Terminal::Generator(i));
                }
            }
            for (i, l) in net.loads.iter().enumerate() {
                if l.bus == bus.id {
                    terms.push(Terminal::Load(i));
                }
            }
            for br in &net.branches {
                if br.from == bus.id {
                    terms.push(Terminal::Line { branch: br.id, end: End::From });
                }
                if br.to == bus.id {
                    terms.push(Terminal::Line { branch: br.id, end: End::To });
                }
            }
            SubstationLayout {
                bus: bus.id,
                bays: terms
                    .into_iter()
                    .enumerate()
                    .map(|(i, t)| Bay {
                        number: (i + 1) as u8,
                        terminal: t,
                        cb_index: net.terminal_index(t),
                    })
                    .collect(),
            }
        })
        .collect()
}

pub fn sv_mac(bus: usize, bay: u8) -> MacAddr {
    MacAddr([0x01, 0x0C, 0xCD, 0x04, bus as u8, bay])
}

pub fn goose_mac(bus: usize, bay: u8) -> MacAddr {
    MacAddr([0x01, 0x0C, 0xCD, 0x01, bus as u8, bay])
}

pub fn sv_appid(bus: usize, bay: u8) -> u16 {
    0x4000 + (bus as u16) * 16 + bay as u16
}

pub fn goose_appid(bus: usize, bay: u8) -> u16 {
    (bus as u16) * 16 + bay as u16
}

/// Unicast source addresses: 02-00-00-bus-bay-role.
pub fn device_mac(bus: usize, bay: u8, role: u8) -> MacAddr {
    MacAddr([0x02, 0x00, 0x00, bus as u8, bay, role])
}

pub const ROLE_MU: u8 = 1;
pub const ROLE_IED: u8 = 2;
pub const ROLE_CIED: u8 = 3;

pub fn sv_id(bus: usize, bay: u8) -> String {
    format!("S{bus:02}MU{bay:02}")
}

pub fn ied_name(bus: usize, bay: u8) -> String {
    format!("S{bus:02}IED{bay:02}")
}

pub fn gocb_ref(bus: usize, bay: u8) -> String {
    format!("{}/LLN0$GO$gcb01", ied_name(bus, bay))
}

pub fn dat_set(bus: usize, bay: u8) -> String {
    format!("{}/LLN0$DS01", ied_name(bus, bay))
}
