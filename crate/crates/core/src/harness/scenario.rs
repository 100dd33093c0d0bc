//! Scenario execution and the timing verdict.

use std::fmt::Write as _;

use crate::attack::{launch, AttackKind, AttackSpec, CaptureBuffer};
use crate::grid::{FaultSpec, NetworkModel};
use crate::ml::TrainedModel;
use crate::scada::{Detection, ScadaCenter, ScadaConfig};
use crate::sim::{
    seconds_to_sample, Action, Event, EventKind, EventLog, SimConfig, SystemSim, SAMPLES_PER_CYCLE, SAMPLES_PER_SECOND,
};

use super::{EventConfig, HarnessError, ScenarioConfig};

/// Three cycles.
const CLEARING_LIMIT: u64 = 3 * SAMPLES_PER_CYCLE;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Verdict {
    pub checks: Vec<Check>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(s, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        }
        let _ = writeln!(s, "VERDICT: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }

    fn push(&mut self, name: &'static str, pass: bool, detail: String) {
        self.checks.push(Check { name, pass, detail });
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub log: EventLog,
    pub verdict: Verdict,
    pub detections: Vec<Detection>,
}

fn secs(n: u64) -> String {
    format!("{:.6} s", n as f64 / SAMPLES_PER_SECOND as f64)
}

fn lines<'a>(evs: impl IntoIterator<Item = &'a Event>) -> String {
    let v: Vec<String> = evs.into_iter().map(|e| e.to_string()).collect();
    if v.is_empty() {
        "no matching events".into()
    } else {
        v.join(" | ")
    }
}

/// Traffic of `bus` while `fault` develops and is tripped, for replays.
fn capture_fault(net: &NetworkModel, seed: u64, fault: FaultSpec, bus: usize) -> Result<CaptureBuffer, HarnessError> {
    let mut sim = SystemSim::new(
        net.clone(),
        SimConfig {
            seed,
            ..SimConfig::default()
        },
    )?;
    let at = 2 * SAMPLES_PER_CYCLE;
    sim.schedule(at, Action::ApplyFault(fault));
    sim.run_until(at - SAMPLES_PER_CYCLE)?;
    let port = sim.substation(bus)?.monitor_port();
    sim.start_capture(bus, port)?;
    while sim.log().first(EventKind::CbOpened).is_none() && sim.sample() < at + SAMPLES_PER_SECOND / 2 {
        sim.step()?;
    }
    let frames = sim.stop_capture(bus)?;
    Ok(CaptureBuffer::new(port as u32, frames)?)
}

struct Restoration {
    activation: u64,
    test_fault: u64,
}

pub fn run_scenario(net: &NetworkModel, cfg: &ScenarioConfig, model: Option<TrainedModel>) -> Result<ScenarioOutcome, HarnessError> {
    cfg.validate()?;
    let attack = cfg.attack_spec()?;
    if attack.is_some() && model.is_none() {
        return Err(HarnessError::Config("attack scenarios need a trained model file".into()));
    }
    let mut sim = SystemSim::new(
        net.clone(),
        SimConfig {
            seed: cfg.seed,
            ..SimConfig::default()
        },
    )?;
    let mut fault_start = None;
    match &cfg.event {
        EventConfig::None => {}
        EventConfig::Fault { start_s, fault } => {
            let at = seconds_to_sample(*start_s);
            sim.schedule(at, Action::ApplyFault(fault.to_spec()?));
            fault_start = Some(at);
        }
        EventConfig::Attack { .. } => {
            let spec = attack.as_ref().expect("attack spec");
            let capture = match spec.kind {
                AttackKind::ReplaySv | AttackKind::ReplayGoose => Some(capture_fault(
                    net,
                    cfg.seed ^ 0x5eed,
                    spec.signature.expect("validated"),
                    spec.bus,
                )?),
                _ => None,
            };
            launch(&mut sim, spec, capture.as_ref())?;
        }
    }
    let mut scada = match model {
        Some(m) => Some(ScadaCenter::new(
            m,
            ScadaConfig {
                collection_delay_s: cfg.scada.collection_delay_s,
            },
            &sim,
        )?),
        None => None,
    };
    let mut end = seconds_to_sample(cfg.duration_s);
    let mut restoration = None;
    while sim.sample() < end {
        sim.step()?;
        let Some(sc) = scada.as_mut() else { continue };
        let Some(d) = sc.poll(&mut sim)? else { continue };
        if let (true, Some((bus, bay)), None, true) = (d.mitigated, d.compromised, &restoration, cfg.restoration.enabled) {
            let now = sim.sample();
            let reclose = now + seconds_to_sample(cfg.restoration.reclose_after_s);
            let tf_at = reclose + seconds_to_sample(cfg.restoration.test_fault_after_s);
            let tf = match (&cfg.restoration.test_fault, attack.as_ref().and_then(|a| a.signature)) {
                (Some(f), _) => f.to_spec()?,
                (None, Some(sig)) => sig,
                (None, None) => {
                    let branch = sim.substation(bus)?.layout.bay(bay).and_then(|b| match b.terminal {
                        crate::grid::Terminal::Line { branch, .. } => Some(branch),
                        _ => None,
                    });
                    match branch {
                        Some(branch) => FaultSpec {
                            branch,
                            location: 0.5,
                            impedance_ohm: 1.0,
                            fault_type: crate::grid::FaultType::BG,
                        },
                        None => continue,
                    }
                }
            };
            sim.schedule(
                reclose,
                Action::CloseBreaker {
                    bus,
                    bay,
                    source: "operator".into(),
                },
            );
            sim.schedule(tf_at, Action::ApplyFault(tf));
            end = end.max(tf_at + SAMPLES_PER_SECOND / 2);
            restoration = Some(Restoration {
                activation: now,
                test_fault: tf_at,
            });
        }
    }
    let detections = scada.map(|s| s.detections().to_vec()).unwrap_or_default();
    let log = sim.into_log();
    let mut verdict = Verdict::default();
    match (&attack, fault_start) {
        (Some(spec), _) => attack_checks(&mut verdict, &log, spec, restoration.as_ref(), cfg.restoration.enabled),
        (None, Some(at)) => fault_checks(&mut verdict, &log, at, &detections),
        (None, None) => {
            let opened: Vec<&Event> = log.of_kind(EventKind::CbOpened).collect();
            verdict.push("no_breaker_operation", opened.is_empty(), lines(opened));
        }
    }
    Ok(ScenarioOutcome {
        log,
        verdict,
        detections,
    })
}

fn attack_checks(v: &mut Verdict, log: &EventLog, spec: &AttackSpec, rest: Option<&Restoration>, restore: bool) {
    let start = spec.start_sample();
    let cb = format!("S{:02}CB{:02}", spec.bus, spec.bay);
    let started = log.first(EventKind::AttackStarted);
    v.push(
        "attack_started",
        started.is_some_and(|e| e.sample == start),
        match started {
            Some(e) => format!("ATTACK_STARTED at {} (expected {})", secs(e.sample), secs(start)),
            None => "no ATTACK_STARTED".into(),
        },
    );

    let open = log.first_after(EventKind::CbOpened, start);
    let open_ok = open.is_some_and(|e| e.source == cb && e.sample - start <= CLEARING_LIMIT);
    v.push(
        "breaker_open_within_3_cycles",
        open_ok,
        match open {
            Some(e) => format!("{} opened {} after the attack began", e.source, secs(e.sample - start)),
            None => "no CB_OPENED after the attack".into(),
        },
    );

    let flag = log.first(EventKind::ScadaFlagSet);
    let flag_ok = match (open, flag) {
        (Some(o), Some(f)) => f.sample >= o.sample + SAMPLES_PER_SECOND && f.sample <= o.sample + 3 * SAMPLES_PER_SECOND,
        _ => false,
    };
    v.push(
        "scada_flag_within_1_to_3_s",
        flag_ok,
        match (open, flag) {
            (Some(o), Some(f)) if f.sample >= o.sample => format!("SCADA_FLAG_SET {} after CB_OPENED", secs(f.sample - o.sample)),
            _ => lines(flag.into_iter().chain(open)),
        },
    );

    let act = log.first(EventKind::CiedActivated);
    let ports_ok = act.is_some_and(|a| {
        let dis = log.of_kind(EventKind::PortDisabled).filter(|e| e.sample == a.sample).count();
        let en = log.of_kind(EventKind::PortEnabled).filter(|e| e.sample == a.sample).count();
        dis >= 1 && en >= 1 && flag.is_some_and(|f| f.sample == a.sample)
    });
    v.push(
        "cied_ports_switched_together",
        ports_ok,
        lines(
            log.events()
                .iter()
                .filter(|e| matches!(e.kind, EventKind::PortDisabled | EventKind::PortEnabled | EventKind::CiedActivated)),
        ),
    );

    if !restore {
        return;
    }
    let Some(r) = rest else {
        v.push("test_fault_cleared_by_cied", false, "restoration never started (no mitigation)".into());
        return;
    };
    let tf = r.test_fault;
    let cied = format!("S{:02}CIED", spec.bus);
    let trip = log.of_kind(EventKind::TripIssued).find(|e| e.sample >= tf && e.source == cied);
    let opened = log.of_kind(EventKind::CbOpened).find(|e| e.sample >= tf && e.source == cb);
    let cleared = log.first_after(EventKind::FaultCleared, tf);
    let ok = trip.is_some()
        && opened.is_some_and(|e| e.sample - tf <= CLEARING_LIMIT)
        && cleared.is_some_and(|e| e.sample - tf <= CLEARING_LIMIT)
        && r.activation < tf;
    v.push(
        "test_fault_cleared_by_cied",
        ok,
        match (opened, cleared) {
            (Some(o), Some(c)) if trip.is_some() => format!(
                "{cied} tripped; {cb} opened {} and fault cleared {} after the test fault",
                secs(o.sample - tf),
                secs(c.sample - tf)
            ),
            _ => lines(trip.into_iter().chain(opened).chain(cleared)),
        },
    );
}

fn fault_checks(v: &mut Verdict, log: &EventLog, at: u64, detections: &[Detection]) {
    let trip = log.first_after(EventKind::TripIssued, at);
    v.push(
        "trip_latency_1_to_3_cycles",
        trip.is_some_and(|e| (SAMPLES_PER_CYCLE..=CLEARING_LIMIT).contains(&(e.sample - at))),
        match trip {
            Some(e) => format!("{} tripped {} after the fault", e.source, secs(e.sample - at)),
            None => "no TRIP_ISSUED".into(),
        },
    );
    let flags: Vec<&Event> = log.of_kind(EventKind::ScadaFlagSet).collect();
    v.push("no_mitigation_for_fault", flags.is_empty(), lines(flags));
    if let Some(d) = detections.first() {
        v.push(
            "classified_as_fault",
            (1..=10).contains(&d.class),
            format!("class {}", d.class),
        );
    }
}
