//! Whole-system clock: grid state, all substations and scheduled actions.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::codec::{GooseFrame, RawFrame, SvFrame, VlanTag};
use crate::grid::{faulted_state, End, FaultSpec, NetworkModel, OpenSet, PhasorState, PowerFlow, PowerFlowOptions, Terminal};

use super::events::{EventKind, EventLog};
use super::ied::{Element, IedConfig};
use super::layout::{substation_layouts, sv_appid};
use super::mu::{MergingUnit, Scaling};
use super::pmu::{NoiseConfig, Pmu};
use super::settings::{ProtectionSettings, SettingRules};
use super::substation::{Substation, SubstationFeed};
use super::{SimError, SAMPLES_PER_CYCLE};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub noise: NoiseConfig,
    pub rules: SettingRules,
    pub trip_delay_cycles: u8,
    pub goose_tal_ms: u32,
    pub vlan: Option<VlanTag>,
    /// Breakers check GOOSE stNum/sqNum freshness.
    pub validate_goose: bool,
    /// Frequency dip in Hz at full fault severity.
    pub frequency_dip_hz: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            noise: NoiseConfig::default(),
            rules: SettingRules::default(),
            trip_delay_cycles: 1,
            goose_tal_ms: 1000,
            vlan: None,
            validate_goose: false,
            frequency_dip_hz: 0.01,
        }
    }
}

/// Something that happens at the start of a sample interval.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    ApplyFault(FaultSpec),
    ClearFault,
    CloseBreaker { bus: usize, bay: u8, source: String },
    OpenBreaker { bus: usize, bay: u8, source: String },
    Log { source: String, kind: EventKind, detail: String },
}

#[derive(Debug, Clone)]
struct ActiveFault {
    spec: FaultSpec,
    base: PowerFlow,
    severity: f64,
}

#[derive(Debug, Clone)]
pub struct SystemSim {
    net: Arc<NetworkModel>,
    cfg: SimConfig,
    settings: Arc<ProtectionSettings>,
    prefault: PowerFlow,
    substations: Vec<Substation>,
    log: EventLog,
    n: u64,
    open: OpenSet,
    steady: PowerFlow,
    fault: Option<ActiveFault>,
    state: PhasorState,
    frequency: f64,
    actions: BTreeMap<u64, Vec<Action>>,
    injections: BTreeMap<u64, Vec<(usize, RawFrame)>>,
    /// Substation and bay index per terminal.
    placement: Vec<(usize, usize)>,
    /// Far-end terminal of each line terminal.
    remote: Vec<Option<usize>>,
    samples: Vec<[i32; 8]>,
    last_change: u64,
}

impl SystemSim {
    pub fn new(net: NetworkModel, cfg: SimConfig) -> Result<SystemSim, SimError> {
        let pf = PowerFlow::solve(&net, &OpenSet::new(), PowerFlowOptions::default())?;
        let settings = ProtectionSettings::compute(&net, &pf, &cfg.rules)?;
        SystemSim::with_settings(Arc::new(net), cfg, Arc::new(settings))
    }

    /// Builds with precomputed relay settings for `net`.
    pub fn with_settings(
        net: Arc<NetworkModel>,
        cfg: SimConfig,
        settings: Arc<ProtectionSettings>,
    ) -> Result<SystemSim, SimError> {
        net.validate()?;
        let pf = PowerFlow::solve(&net, &OpenSet::new(), PowerFlowOptions::default())?;
        let nt = net.terminal_count();
        if settings.pickup_pu.len() != nt {
            return Err(SimError::InvalidConfig("settings do not match the network".into()));
        }
        let mut substations = Vec::with_capacity(net.bus_count());
        let mut placement = vec![(0, 0); nt];
        let mut remote = vec![None; nt];
        for (si, layout) in substation_layouts(&net).into_iter().enumerate() {
            let bus = layout.bus;
            let scale = Scaling::new(net.base_mva, net.buses[bus - 1].base_kv);
            let mut mus = Vec::new();
            let mut cfgs = Vec::new();
            for (bi, b) in layout.bays.iter().enumerate() {
                placement[b.cb_index] = (si, bi);
                mus.push(MergingUnit::new(bus, b.number, scale, cfg.vlan)?);
                let element = match b.terminal {
                    Terminal::Line { branch, end } => {
                        let br = net.branch(branch)?;
                        let other = match end {
                            End::From => End::To,
                            End::To => End::From,
                        };
                        let far = Terminal::Line { branch, end: other };
                        remote[b.cb_index] = Some(net.terminal_index(far));
                        Element::LineDifferential {
                            branch,
                            local_end: end,
                            tap: br.tap,
                            remote_scale: Scaling::new(net.base_mva, net.buses[far.bus(&net) - 1].base_kv),
                        }
                    }
                    _ => Element::Overcurrent,
                };
                cfgs.push(IedConfig {
                    bus,
                    bay: b.number,
                    element,
                    pickup_pu: settings.pickup_pu[b.cb_index],
                    trip_delay_cycles: cfg.trip_delay_cycles,
                    reclose_disabled: true,
                    local_scale: scale,
                    time_allowed_to_live_ms: cfg.goose_tal_ms,
                    vlan: cfg.vlan,
                });
            }
            let pmu = Pmu::new(bus, sv_appid(bus, 1), scale, cfg.noise, cfg.seed);
            substations.push(Substation::new(layout, mus, cfgs, pmu, cfg.validate_goose)?);
        }
        let state = pf.phasor_state(&net);
        let mut sim = SystemSim {
            frequency: net.nominal_hz,
            net,
            cfg,
            settings,
            prefault: pf.clone(),
            substations,
            log: EventLog::new(),
            n: 0,
            open: OpenSet::new(),
            steady: pf,
            fault: None,
            state,
            actions: BTreeMap::new(),
            injections: BTreeMap::new(),
            placement,
            remote,
            samples: vec![[0; 8]; nt],
            last_change: 0,
        };
        sim.load_phasors();
        Ok(sim)
    }

    pub fn net(&self) -> &NetworkModel {
        &self.net
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn settings(&self) -> &Arc<ProtectionSettings> {
        &self.settings
    }

    /// Next sample to be simulated.
    pub fn sample(&self) -> u64 {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.n as f64 / super::SAMPLES_PER_SECOND as f64
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn log_mut(&mut self) -> &mut EventLog {
        &mut self.log
    }

    pub fn into_log(self) -> EventLog {
        self.log
    }

    /// Intact-network operating point at start.
    pub fn prefault(&self) -> &PowerFlow {
        &self.prefault
    }

    /// Power flow of the present breaker positions, without any fault.
    pub fn operating_point(&self) -> &PowerFlow {
        &self.steady
    }

    pub fn state(&self) -> &PhasorState {
        &self.state
    }

    pub fn open_set(&self) -> &OpenSet {
        &self.open
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn fault(&self) -> Option<&FaultSpec> {
        self.fault.as_ref().map(|f| &f.spec)
    }

    pub fn substations(&self) -> &[Substation] {
        &self.substations
    }

    pub fn substation(&self, bus: usize) -> Result<&Substation, SimError> {
        bus.checked_sub(1)
            .and_then(|i| self.substations.get(i))
            .ok_or(SimError::UnknownBus(bus))
    }

    pub fn substation_mut(&mut self, bus: usize) -> Result<&mut Substation, SimError> {
        bus.checked_sub(1)
            .and_then(|i| self.substations.get_mut(i))
            .ok_or(SimError::UnknownBus(bus))
    }

    pub fn schedule(&mut self, at: u64, action: Action) {
        self.actions.entry(at).or_default().push(action);
    }

    /// Queues raw frames for the monitoring port of `bus` at given samples.
    pub fn inject(&mut self, bus: usize, frames: impl IntoIterator<Item = (u64, RawFrame)>) -> Result<(), SimError> {
        self.substation(bus)?;
        for (at, f) in frames {
            self.injections.entry(at).or_default().push((bus, f));
        }
        Ok(())
    }

    /// SV frame the MU of a bay would publish at sample `n` under the
    /// present grid state.
    pub fn live_sv(&self, bus: usize, bay: u8) -> Result<SvFrame, SimError> {
        let s = self.substation(bus)?;
        let mu = s
            .mus
            .get((bay as usize).wrapping_sub(1))
            .ok_or(SimError::UnknownIed { bus, bay })?;
        Ok(mu.frame(self.n))
    }

    pub fn live_goose(&self, bus: usize, bay: u8) -> Result<GooseFrame, SimError> {
        self.substation(bus)?
            .live_goose(bay)
            .cloned()
            .ok_or(SimError::UnknownIed { bus, bay })
    }

    pub fn feeds(&self) -> Vec<SubstationFeed> {
        self.substations.iter().map(|s| s.feed()).collect()
    }

    pub fn acknowledge(&mut self) {
        for s in &mut self.substations {
            s.acknowledge();
        }
    }

    pub fn activate_cied(&mut self, bus: usize, bay: u8) -> Result<bool, SimError> {
        let n = self.n;
        let s = bus
            .checked_sub(1)
            .and_then(|i| self.substations.get_mut(i))
            .ok_or(SimError::UnknownBus(bus))?;
        s.activate_cied(n, bay, &mut self.log)
    }

    pub fn start_capture(&mut self, bus: usize, port: usize) -> Result<(), SimError> {
        self.substation_mut(bus)?.process.start_mirror(port)
    }

    pub fn stop_capture(&mut self, bus: usize) -> Result<Vec<RawFrame>, SimError> {
        Ok(self.substation_mut(bus)?.process.stop_mirror())
    }

    pub fn run_until(&mut self, end: u64) -> Result<(), SimError> {
        while self.n < end {
            self.step()?;
        }
        Ok(())
    }

    pub fn run_for(&mut self, samples: u64) -> Result<(), SimError> {
        self.run_until(self.n + samples)
    }

    /// True when nothing can change before `until` unless stepped: no
    /// queued actions or injections, no breaker in motion and every
    /// phasor window settled since the last grid change.
    pub fn quiescent_until(&self, until: u64) -> Result<(), SimError> {
        if self.actions.range(self.n..until).next().is_some() {
            return Err(SimError::NotQuiescent("action scheduled"));
        }
        if self.injections.range(self.n..until).next().is_some() {
            return Err(SimError::NotQuiescent("injection scheduled"));
        }
        if self.substations.iter().any(|s| s.pending_breaker_ops()) {
            return Err(SimError::NotQuiescent("breaker operating"));
        }
        if self.n < self.last_change + 2 * SAMPLES_PER_CYCLE {
            return Err(SimError::NotQuiescent("phasor windows not settled"));
        }
        Ok(())
    }

    /// Skips whole cycles of steady operation so that the next simulated
    /// sample is the last one at or before `target` with the same position
    /// in the cycle. Heartbeats inside the skipped span are not produced.
    pub fn fast_forward(&mut self, target: u64) -> Result<(), SimError> {
        if target <= self.n {
            return Ok(());
        }
        let cycles = (target - self.n) / SAMPLES_PER_CYCLE;
        let to = self.n + cycles * SAMPLES_PER_CYCLE;
        self.quiescent_until(to)?;
        self.n = to;
        Ok(())
    }

    pub fn step(&mut self) -> Result<(), SimError> {
        let n = self.n;
        let mut changed = false;
        if let Some(actions) = self.actions.remove(&n) {
            for a in actions {
                changed |= self.apply(n, a)?;
            }
        }
        for s in &mut self.substations {
            if !s.operate_breakers(n, &mut self.log).is_empty() {
                changed = true;
            }
        }
        if changed {
            self.update_grid(n)?;
        }

        for (k, (si, bi)) in self.placement.iter().enumerate() {
            self.samples[k] = self.substations[*si].mus[*bi].samples(n);
        }
        let injected = self.injections.remove(&n).unwrap_or_default();
        let mut bay_samples = Vec::new();
        let mut remote = Vec::new();
        let mut inj = Vec::new();
        for s in self.substations.iter_mut() {
            bay_samples.clear();
            remote.clear();
            for b in &s.layout.bays {
                bay_samples.push(self.samples[b.cb_index]);
                remote.push(self.remote[b.cb_index].map(|r| {
                    let v = self.samples[r];
                    [v[0], v[1], v[2]]
                }));
            }
            inj.clear();
            inj.extend(injected.iter().filter(|(bus, _)| *bus == s.bus).map(|(_, f)| f.clone()));
            s.step(n, &bay_samples, &remote, &inj, self.frequency, &mut self.log);
        }
        self.n += 1;
        Ok(())
    }

    fn apply(&mut self, n: u64, a: Action) -> Result<bool, SimError> {
        match a {
            Action::ApplyFault(spec) => {
                spec.validate(&self.net)?;
                self.log.push(
                    n,
                    "grid",
                    EventKind::FaultApplied,
                    format!(
                        "branch {} at {:.2} {} {} ohm",
                        spec.branch, spec.location, spec.fault_type, spec.impedance_ohm
                    ),
                );
                self.fault = Some(ActiveFault {
                    spec,
                    base: self.steady.clone(),
                    severity: 0.0,
                });
                Ok(true)
            }
            Action::ClearFault => {
                if self.fault.take().is_some() {
                    self.log.push(n, "grid", EventKind::FaultCleared, "");
                    Ok(true)
                } else {
                    Ok(false)
                }
            }
            Action::CloseBreaker { bus, bay, source } => {
                let s = self.substations.get_mut(bus.wrapping_sub(1)).ok_or(SimError::UnknownBus(bus))?;
                s.close_breaker(n, bay, &source, &mut self.log)
            }
            Action::OpenBreaker { bus, bay, source } => {
                let s = self.substations.get_mut(bus.wrapping_sub(1)).ok_or(SimError::UnknownBus(bus))?;
                s.open_breaker(n, bay, &source, &mut self.log)?;
                Ok(false)
            }
            Action::Log { source, kind, detail } => {
                self.log.push(n, source, kind, detail);
                Ok(false)
            }
        }
    }

    fn update_grid(&mut self, n: u64) -> Result<(), SimError> {
        let mut open = OpenSet::new();
        for s in &self.substations {
            for (b, closed) in s.layout.bays.iter().zip(s.cb_closed()) {
                if !closed {
                    open.0.insert(b.cb_index);
                }
            }
        }
        if let Some(f) = &self.fault {
            let br = f.spec.branch;
            let isolated = open.is_open(&self.net, Terminal::Line { branch: br, end: End::From })
                && open.is_open(&self.net, Terminal::Line { branch: br, end: End::To });
            if isolated {
                self.fault = None;
                self.log.push(n, "grid", EventKind::FaultCleared, format!("branch {br} isolated"));
            }
        }
        if open != self.open || self.steady.open != open {
            self.steady = PowerFlow::solve(&self.net, &open, PowerFlowOptions::default())?;
            self.open = open;
        }
        self.frequency = self.net.nominal_hz;
        self.state = match self.fault.as_mut() {
            Some(f) => {
                let st = faulted_state(&self.net, &f.base, &f.spec, &self.open)?;
                f.severity = severity(&self.net, &f.base, &f.spec, &st);
                self.frequency -= self.cfg.frequency_dip_hz * f.severity;
                st
            }
            None => self.steady.phasor_state(&self.net),
        };
        self.last_change = n;
        self.load_phasors();
        Ok(())
    }

    fn load_phasors(&mut self) {
        for (k, (si, bi)) in self.placement.iter().enumerate() {
            let s = &mut self.substations[*si];
            let bus = s.bus;
            s.mus[*bi].set_phasors(self.state.currents[k], self.state.voltages[bus - 1]);
        }
    }
}

/// Depth of the voltage collapse at the fault point, 0 to 1.
fn severity(net: &NetworkModel, base: &PowerFlow, spec: &FaultSpec, st: &PhasorState) -> f64 {
    let Some(vf) = st.fault_voltage else { return 0.0 };
    let Ok(br) = net.branch(spec.branch) else { return 0.0 };
    let pre = (1.0 - spec.location) * base.voltages[br.from - 1].norm() + spec.location * base.voltages[br.to - 1].norm();
    if pre <= 0.0 {
        return 0.0;
    }
    let min = spec
        .fault_type
        .phases()
        .iter()
        .map(|&p| vf[p].norm())
        .fold(f64::INFINITY, f64::min);
    (1.0 - min / pre).clamp(0.0, 1.0)
}
