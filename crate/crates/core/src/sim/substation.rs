//! One bus worth of devices wired to a process-bus and a station-bus switch.

use std::collections::BTreeSet;

use crate::codec::{decode_goose, MacAddr, RawFrame};
use crate::grid::BusPhasors;

use super::cb::{CircuitBreaker, TripInput};
use super::events::{EventKind, EventLog};
use super::ied::{Ied, IedConfig};
use super::layout::{device_mac, goose_appid, goose_mac, sv_appid, sv_mac, SubstationLayout, ROLE_CIED, ROLE_IED};
use super::mu::MergingUnit;
use super::pmu::Pmu;
use super::switch::{Device, Forwarded, PortId, SdnSwitch};
use super::{sample_micros, SimError, SAMPLES_PER_SECOND};

/// Latest trip and breaker status of one bay as seen by the gateway.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BayStatus {
    /// Set once a trip has been reported; cleared only by a reset.
    pub trip_latched: bool,
    pub cb_closed: bool,
}

/// What a substation hands to the control center.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstationFeed {
    pub bus: usize,
    pub latest: Option<BusPhasors>,
    pub window: Option<Vec<BusPhasors>>,
    /// Indexed by bay number - 1.
    pub bays: Vec<BayStatus>,
}

#[derive(Debug, Clone)]
pub struct Cied {
    pub name: String,
    pub src: MacAddr,
    pub active: Option<(u8, Ied)>,
}

/// Port numbers of each device.
#[derive(Debug, Clone)]
struct Ports {
    mu: Vec<PortId>,
    ied_p: Vec<PortId>,
    ied_s: Vec<PortId>,
    cb: Vec<PortId>,
    cied_p: PortId,
    cied_s: PortId,
    pmu: PortId,
    monitor: PortId,
    gateway: PortId,
}

#[derive(Debug, Clone)]
pub struct Substation {
    pub bus: usize,
    pub layout: SubstationLayout,
    pub mus: Vec<MergingUnit>,
    pub ieds: Vec<Ied>,
    pub cied: Cied,
    pub cbs: Vec<CircuitBreaker>,
    pub process: SdnSwitch,
    pub station: SdnSwitch,
    pub pmu: Pmu,
    pub compromised: BTreeSet<u8>,
    feed: Vec<BayStatus>,
    ports: Ports,
}

/// Breakers whose contacts parted this step, by bay number.
pub type Opened = Vec<u8>;

impl Substation {
    pub fn new(
        layout: SubstationLayout,
        mus: Vec<MergingUnit>,
        configs: Vec<IedConfig>,
        pmu: Pmu,
        validate_goose: bool,
    ) -> Result<Substation, SimError> {
        let bus = layout.bus;
        if mus.len() != layout.bays.len() || configs.len() != layout.bays.len() {
            return Err(SimError::InvalidConfig(format!("bus {bus}: one MU and one IED per bay")));
        }
        let mut process = SdnSwitch::new(format!("S{bus:02}PSW"));
        let mut station = SdnSwitch::new(format!("S{bus:02}SSW"));
        let nb = layout.bays.len();
        let mut ports = Ports {
            mu: Vec::with_capacity(nb),
            ied_p: Vec::with_capacity(nb),
            ied_s: Vec::with_capacity(nb),
            cb: Vec::with_capacity(nb),
            cied_p: 0,
            cied_s: 0,
            pmu: 0,
            monitor: 0,
            gateway: 0,
        };
        for b in &layout.bays {
            ports.mu.push(process.add_port(Device::MergingUnit(b.number), true));
        }
        for b in &layout.bays {
            ports.ied_p.push(process.add_port(Device::Ied(b.number), true));
        }
        ports.cied_p = process.add_port(Device::Cied, false);
        for b in &layout.bays {
            ports.cb.push(process.add_port(Device::Breaker(b.number), true));
        }
        ports.pmu = process.add_port(Device::Pmu, true);
        ports.monitor = process.add_port(Device::Monitor, true);
        for b in &layout.bays {
            ports.ied_s.push(station.add_port(Device::Ied(b.number), true));
        }
        ports.cied_s = station.add_port(Device::Cied, false);
        ports.gateway = station.add_port(Device::Gateway, true);

        for (i, b) in layout.bays.iter().enumerate() {
            process.add_rule(sv_mac(bus, b.number), ports.ied_p[i]);
            process.add_rule(goose_mac(bus, b.number), ports.cb[i]);
            station.add_rule(goose_mac(bus, b.number), ports.gateway);
        }
        process.add_rule(sv_mac(bus, 1), ports.pmu);

        let mut ieds = Vec::with_capacity(nb);
        let mut cbs = Vec::with_capacity(nb);
        for (b, cfg) in layout.bays.iter().zip(configs) {
            ieds.push(Ied::new(
                format!("S{bus:02}IED{:02}", b.number),
                cfg,
                device_mac(bus, b.number, ROLE_IED),
            )?);
            cbs.push(CircuitBreaker::new(format!("S{bus:02}CB{:02}", b.number), validate_goose));
        }
        Ok(Substation {
            bus,
            mus,
            ieds,
            cied: Cied {
                name: format!("S{bus:02}CIED"),
                src: device_mac(bus, 0, ROLE_CIED),
                active: None,
            },
            cbs,
            process,
            station,
            pmu,
            compromised: BTreeSet::new(),
            feed: vec![
                BayStatus {
                    trip_latched: false,
                    cb_closed: true,
                };
                nb
            ],
            ports,
            layout,
        })
    }

    pub fn name(&self) -> String {
        format!("S{:02}", self.bus)
    }

    pub fn monitor_port(&self) -> PortId {
        self.ports.monitor
    }

    /// Mechanical breaker operations due at `n`.
    pub fn operate_breakers(&mut self, n: u64, log: &mut EventLog) -> Opened {
        let mut opened = Vec::new();
        for (i, cb) in self.cbs.iter_mut().enumerate() {
            if cb.tick(n) {
                log.push(n, cb.name.clone(), EventKind::CbOpened, "");
                opened.push(self.layout.bays[i].number);
            }
        }
        if !opened.is_empty() {
            self.pmu.retain_window();
        }
        opened
    }

    pub fn close_breaker(&mut self, n: u64, bay: u8, source: &str, log: &mut EventLog) -> Result<bool, SimError> {
        let i = self.bay_index(bay)?;
        let changed = self.cbs[i].close();
        if changed {
            log.push(n, source, EventKind::CbClosed, self.cbs[i].name.clone());
        }
        Ok(changed)
    }

    pub fn open_breaker(&mut self, n: u64, bay: u8, source: &str, log: &mut EventLog) -> Result<(), SimError> {
        let i = self.bay_index(bay)?;
        if let TripInput::AlreadyOpen = self.cbs[i].command_trip(n) {
            log.push(n, self.cbs[i].name.clone(), EventKind::CbTripIgnored, format!("operator {source}"));
        }
        Ok(())
    }

    fn bay_index(&self, bay: u8) -> Result<usize, SimError> {
        if bay >= 1 && (bay as usize) <= self.layout.bays.len() {
            Ok(bay as usize - 1)
        } else {
            Err(SimError::UnknownIed { bus: self.bus, bay })
        }
    }

    pub fn cb_closed(&self) -> Vec<bool> {
        self.cbs.iter().map(|c| c.is_closed()).collect()
    }

    pub fn pending_breaker_ops(&self) -> bool {
        self.cbs.iter().any(|c| c.pending().is_some())
    }

    /// One sample interval. `samples[i]` is the MU output of bay i + 1 and
    /// `remote[i]` the far-end current of a line bay.
    pub fn step(
        &mut self,
        n: u64,
        samples: &[[i32; 8]],
        remote: &[Option<[i32; 3]>],
        injected: &[RawFrame],
        frequency_hz: f64,
        log: &mut EventLog,
    ) {
        let mut seq_p = 0u64;
        let stamp = |f: &mut RawFrame, seq: &mut u64| {
            f.timestamp_us = sample_micros(n) + *seq;
            *seq += 1;
        };

        // merging units and injected traffic
        let mut fwd = Forwarded::default();
        for (i, mu) in self.mus.iter_mut().enumerate() {
            let mut f = mu.publish_values(n, &samples[i]);
            stamp(&mut f, &mut seq_p);
            self.process.forward(self.ports.mu[i], f, &mut fwd);
            if n.is_multiple_of(SAMPLES_PER_SECOND) {
                log.push(n, format!("S{:02}MU{:02}", self.bus, mu.bay), EventKind::SvPublish, "smpCnt=0");
            }
        }
        for f in injected {
            let mut f = f.clone();
            stamp(&mut f, &mut seq_p);
            self.process.forward(self.ports.monitor, f, &mut fwd);
        }
        self.deliver_process(n, fwd, log);

        // protection
        let mut fwd_p = Forwarded::default();
        let mut fwd_s = Forwarded::default();
        for i in 0..self.ieds.len() {
            let bay = self.layout.bays[i].number;
            let closed = self.cbs[i].is_closed();
            let ev = self.ieds[i].evaluate(n, remote[i]);
            let name = self.ieds[i].name.clone();
            protection_events(n, &name, ev, log);
            if let Some(f) = self.ieds[i].publish(n, closed) {
                log_goose(n, &name, &self.ieds[i], log);
                let mut fp = f.clone();
                stamp(&mut fp, &mut seq_p);
                self.process.forward(self.ports.ied_p[i], fp, &mut fwd_p);
                let mut fs = f;
                fs.timestamp_us = sample_micros(n) + i as u64;
                self.station.forward(self.ports.ied_s[i], fs, &mut fwd_s);
            }
            if let Some((cb, ied)) = self.cied.active.as_mut() {
                if *cb == bay {
                    let ev = ied.evaluate(n, remote[i]);
                    protection_events(n, &self.cied.name, ev, log);
                    if let Some(f) = ied.publish(n, closed) {
                        log_goose(n, &self.cied.name, ied, log);
                        let mut fp = f.clone();
                        stamp(&mut fp, &mut seq_p);
                        self.process.forward(self.ports.cied_p, fp, &mut fwd_p);
                        let mut fs = f;
                        fs.timestamp_us = sample_micros(n) + self.ieds.len() as u64;
                        self.station.forward(self.ports.cied_s, fs, &mut fwd_s);
                    }
                }
            }
        }
        self.deliver_process(n, fwd_p, log);
        self.deliver_station(n, fwd_s, log);

        self.pmu.step(n, frequency_hz);
    }

    fn deliver_process(&mut self, n: u64, fwd: Forwarded, log: &mut EventLog) {
        self.log_drops(n, &fwd, true, log);
        for d in fwd.deliveries {
            let dev = self.process.ports()[d.port].device;
            match dev {
                Device::Ied(b) => self.ieds[b as usize - 1].receive_sv(&d.frame),
                Device::Cied => {
                    if let Some((_, ied)) = self.cied.active.as_mut() {
                        ied.receive_sv(&d.frame);
                    }
                }
                Device::Pmu => self.pmu.receive_sv(&d.frame),
                Device::Breaker(b) => {
                    let cb = &mut self.cbs[b as usize - 1];
                    match cb.receive_goose(n, &d.frame) {
                        TripInput::AlreadyOpen => {
                            log.push(n, cb.name.clone(), EventKind::CbTripIgnored, "already open")
                        }
                        TripInput::Stale { st_num, sq_num } => log.push(
                            n,
                            cb.name.clone(),
                            EventKind::GooseRejected,
                            format!("stNum={st_num} sqNum={sq_num}"),
                        ),
                        _ => {}
                    }
                }
                _ => {}
            }
        }
    }

    fn deliver_station(&mut self, n: u64, fwd: Forwarded, log: &mut EventLog) {
        self.log_drops(n, &fwd, false, log);
        for d in fwd.deliveries {
            if self.station.ports()[d.port].device != Device::Gateway {
                continue;
            }
            let Ok(g) = decode_goose(&d.frame) else { continue };
            let bay = g.appid.wrapping_sub(goose_appid(self.bus, 0));
            let (Some(st), Some(e)) = (self.feed.get_mut((bay as usize).wrapping_sub(1)), g.all_data.first()) else {
                continue;
            };
            st.trip_latched |= e.trip;
            st.cb_closed = e.cb_closed;
        }
    }

    fn log_drops(&self, n: u64, fwd: &Forwarded, process: bool, log: &mut EventLog) {
        let sw = if process { &self.process } else { &self.station };
        for d in &fwd.drops {
            let dev = sw.ports()[d.port].device;
            let dst = d.dst.map(|m| m.to_string()).unwrap_or_else(|| "-".into());
            let dir = if d.ingress { "from" } else { "to" };
            log.push(
                n,
                sw.name.clone(),
                EventKind::FrameDropped,
                format!("{dir} disabled port {} ({dev}) dst {dst}", d.port),
            );
        }
    }

    /// Hands bay `bay` to the CIED: its IED's ports go down on both
    /// switches, the CIED's come up and take over its subscriptions.
    pub fn activate_cied(&mut self, n: u64, bay: u8, log: &mut EventLog) -> Result<bool, SimError> {
        let i = self.bay_index(bay)?;
        if let Some((active, _)) = &self.cied.active {
            if *active == bay {
                return Ok(false);
            }
            return Err(SimError::CiedBusy {
                bus: self.bus,
                active: *active,
                requested: bay,
            });
        }
        let cfg = self.ieds[i].config.clone();
        let ied = Ied::new(self.cied.name.clone(), cfg, self.cied.src)?;
        let (pi, si) = (self.ports.ied_p[i], self.ports.ied_s[i]);
        let (pc, sc) = (self.ports.cied_p, self.ports.cied_s);
        self.process.set_enabled(pi, false)?;
        self.station.set_enabled(si, false)?;
        self.process.set_enabled(pc, true)?;
        self.station.set_enabled(sc, true)?;
        self.process.redirect(pi, pc);
        self.station.redirect(si, sc);
        let ied_name = self.ieds[i].name.clone();
        log.push(n, self.process.name.clone(), EventKind::PortDisabled, format!("port {pi} ({ied_name})"));
        log.push(n, self.station.name.clone(), EventKind::PortDisabled, format!("port {si} ({ied_name})"));
        log.push(n, self.process.name.clone(), EventKind::PortEnabled, format!("port {pc} ({})", self.cied.name));
        log.push(n, self.station.name.clone(), EventKind::PortEnabled, format!("port {sc} ({})", self.cied.name));
        log.push(n, self.cied.name.clone(), EventKind::CiedActivated, format!("assumed {ied_name}"));
        self.cied.active = Some((bay, ied));
        self.compromised.insert(bay);
        Ok(true)
    }

    /// Active protection authority for a bay.
    pub fn authority(&self, bay: u8) -> Option<&Ied> {
        match &self.cied.active {
            Some((b, ied)) if *b == bay => Some(ied),
            _ => self.ieds.get((bay as usize).wrapping_sub(1)),
        }
    }

    pub fn live_goose(&self, bay: u8) -> Option<&crate::codec::GooseFrame> {
        self.authority(bay).map(|i| i.goose_state())
    }

    pub fn feed(&self) -> SubstationFeed {
        SubstationFeed {
            bus: self.bus,
            latest: self.pmu.latest().copied(),
            window: self.pmu.window().map(|w| w.to_vec()),
            bays: self.feed.clone(),
        }
    }

    /// Clears latched trips and the fault window after the control center
    /// has consumed them.
    pub fn acknowledge(&mut self) {
        for (st, cb) in self.feed.iter_mut().zip(&self.cbs) {
            st.trip_latched = false;
            st.cb_closed = cb.is_closed();
        }
        self.pmu.clear_window();
    }

    pub fn sv_appid(&self, bay: u8) -> u16 {
        sv_appid(self.bus, bay)
    }
}

fn protection_events(n: u64, name: &str, ev: super::ied::Evaluation, log: &mut EventLog) {
    if ev.trip_issued {
        log.push(n, name, EventKind::TripIssued, "");
    }
    if ev.trip_reset {
        log.push(n, name, EventKind::TripReset, "");
    }
    if ev.samples_missing {
        log.push(n, name, EventKind::SvMissing, "");
    }
}

fn log_goose(n: u64, name: &str, ied: &Ied, log: &mut EventLog) {
    let g = ied.goose_state();
    let e = g.all_data.first().copied().unwrap_or_default();
    log.push(
        n,
        name,
        EventKind::GoosePublish,
        format!("stNum={} sqNum={} trip={} cbClosed={}", g.st_num, g.sq_num, e.trip as u8, e.cb_closed as u8),
    );
}
