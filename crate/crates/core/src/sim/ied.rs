//! Protection IEDs and their GOOSE publishers.

use crate::codec::{decode_sv, encode_goose, GooseEntry, GooseFrame, MacAddr, RawFrame, Timestamp, VlanTag};
use crate::grid::End;

use super::dft::SlidingDft;
use super::layout::{dat_set, gocb_ref, goose_appid, goose_mac, ied_name, sv_appid};
use super::mu::Scaling;
use super::{sample_micros, SimError, SAMPLES_PER_CYCLE, SAMPLES_PER_SECOND};

/// Quantity the definite-time element operates on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    /// Local phase current.
    Overcurrent,
    /// `tap * I_from + I_to`, with the remote end delivered over the
    /// teleprotection channel.
    LineDifferential {
        branch: usize,
        local_end: End,
        tap: f64,
        remote_scale: Scaling,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IedConfig {
    pub bus: usize,
    pub bay: u8,
    pub element: Element,
    /// Operate threshold in per-unit current.
    pub pickup_pu: f64,
    pub trip_delay_cycles: u8,
    pub reclose_disabled: bool,
    pub local_scale: Scaling,
    pub time_allowed_to_live_ms: u32,
    pub vlan: Option<VlanTag>,
}

impl IedConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(1..=3).contains(&self.trip_delay_cycles) {
            return Err(SimError::InvalidConfig(format!(
                "trip delay {} cycles outside 1..=3",
                self.trip_delay_cycles
            )));
        }
        if !(self.pickup_pu > 0.0 && self.pickup_pu.is_finite()) {
            return Err(SimError::InvalidConfig(format!("pickup {} pu must be positive", self.pickup_pu)));
        }
        if self.time_allowed_to_live_ms < 2 {
            return Err(SimError::InvalidConfig("timeAllowedtoLive below 2 ms".into()));
        }
        Ok(())
    }

    pub fn delay_samples(&self) -> u64 {
        self.trip_delay_cycles as u64 * SAMPLES_PER_CYCLE
    }
}

/// stNum/sqNum bookkeeping for one GOOSE control block.
#[derive(Debug, Clone)]
pub struct GoosePublisher {
    template: GooseFrame,
    last: Option<GooseEntry>,
    last_sent: u64,
    heartbeat: u64,
}

impl GoosePublisher {
    pub fn new(template: GooseFrame) -> GoosePublisher {
        let heartbeat = (template.time_allowed_to_live as u64 * SAMPLES_PER_SECOND / 2000).max(1);
        GoosePublisher {
            template,
            last: None,
            last_sent: 0,
            heartbeat,
        }
    }

    /// Live state of the control block (last frame sent).
    pub fn state(&self) -> &GooseFrame {
        &self.template
    }

    /// Frame to send at sample `n`, if the data changed or a heartbeat is due.
    pub fn update(&mut self, n: u64, entry: GooseEntry) -> Option<GooseFrame> {
        if self.last != Some(entry) {
            self.template.st_num = if self.last.is_none() { 1 } else { self.template.st_num.wrapping_add(1) };
            self.template.sq_num = 0;
            self.template.t = Timestamp::from_micros(sample_micros(n));
            self.template.all_data = vec![entry];
        } else if n >= self.last_sent + self.heartbeat {
            self.template.sq_num = self.template.sq_num.wrapping_add(1);
        } else {
            return None;
        }
        self.last = Some(entry);
        self.last_sent = n;
        Some(self.template.clone())
    }
}

pub fn goose_template(bus: usize, bay: u8, src: MacAddr, tal_ms: u32, vlan: Option<VlanTag>) -> GooseFrame {
    GooseFrame {
        dst: goose_mac(bus, bay),
        src,
        vlan,
        appid: goose_appid(bus, bay),
        gocb_ref: gocb_ref(bus, bay),
        time_allowed_to_live: tal_ms,
        dat_set: dat_set(bus, bay),
        go_id: ied_name(bus, bay),
        t: Timestamp::default(),
        st_num: 0,
        sq_num: 0,
        test: false,
        conf_rev: 1,
        nds_com: false,
        all_data: Vec::new(),
    }
}

/// What changed during one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Evaluation {
    pub trip_issued: bool,
    pub trip_reset: bool,
    pub samples_missing: bool,
}

/// Protection state machine shared by IEDs and the CIED.
#[derive(Debug, Clone)]
pub struct Ied {
    pub name: String,
    pub config: IedConfig,
    pub src: MacAddr,
    dft: [SlidingDft; 3],
    above: u64,
    tripped: bool,
    missing: bool,
    inbox: Option<[i32; 3]>,
    publisher: GoosePublisher,
}

impl Ied {
    pub fn new(name: String, config: IedConfig, src: MacAddr) -> Result<Ied, SimError> {
        config.validate()?;
        let t = goose_template(config.bus, config.bay, src, config.time_allowed_to_live_ms, config.vlan);
        Ok(Ied {
            name,
            src,
            dft: Default::default(),
            above: 0,
            tripped: false,
            missing: false,
            inbox: None,
            publisher: GoosePublisher::new(t),
            config,
        })
    }

    pub fn tripped(&self) -> bool {
        self.tripped
    }

    pub fn goose_state(&self) -> &GooseFrame {
        self.publisher.state()
    }

    /// Accepts an SV frame from the process bus; the last one per sample wins.
    pub fn receive_sv(&mut self, frame: &RawFrame) {
        let Ok(f) = decode_sv(frame) else { return };
        if f.appid != sv_appid(self.config.bus, self.config.bay) {
            return;
        }
        self.inbox = Some([f.dataset[0].value, f.dataset[1].value, f.dataset[2].value]);
    }

    /// Runs the element on the sample taken at `n`. `remote` carries the
    /// far-end phase currents for a line differential.
    pub fn evaluate(&mut self, n: u64, remote: Option<[i32; 3]>) -> Evaluation {
        let mut ev = Evaluation::default();
        let Some(local) = self.inbox.take() else {
            if !self.missing {
                self.missing = true;
                ev.samples_missing = true;
            }
            return ev;
        };
        self.missing = false;
        let ls = self.config.local_scale;
        let op: [f64; 3] = match self.config.element {
            Element::Overcurrent => local.map(|v| ls.current_pu(v)),
            Element::LineDifferential {
                local_end,
                tap,
                remote_scale,
                ..
            } => {
                let r = remote.unwrap_or([0; 3]);
                std::array::from_fn(|p| {
                    let l = ls.current_pu(local[p]);
                    let r = remote_scale.current_pu(r[p]);
                    match local_end {
                        End::From => tap * l + r,
                        End::To => tap * r + l,
                    }
                })
            }
        };
        for (d, x) in self.dft.iter_mut().zip(op) {
            d.push(n, x);
        }
        let operate = self.dft[0].ready()
            && self.dft.iter().any(|d| d.phasor().norm() > self.config.pickup_pu);
        if operate {
            self.above += 1;
            // pickup must hold for the full delay, measured in intervals
            if !self.tripped && self.above > self.config.delay_samples() {
                self.tripped = true;
                ev.trip_issued = true;
            }
        } else {
            self.above = 0;
            if self.tripped {
                self.tripped = false;
                ev.trip_reset = true;
            }
        }
        ev
    }

    /// GOOSE frame due at `n`, given the breaker position read over the
    /// hardwired status input.
    pub fn publish(&mut self, n: u64, cb_closed: bool) -> Option<RawFrame> {
        let entry = GooseEntry {
            trip: self.tripped,
            cb_closed,
        };
        let f = self.publisher.update(n, entry)?;
        encode_goose(&f).ok()
    }

    /// Clears measurement history, as after a restart.
    pub fn reset_measurements(&mut self) {
        for d in &mut self.dft {
            d.reset();
        }
        self.above = 0;
        self.inbox = None;
    }
}
