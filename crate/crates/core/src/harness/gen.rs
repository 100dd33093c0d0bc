//! Labeled dataset generation: every sample is a full mini-simulation from
//! prefault operation through the breaker opening to the SCADA snapshot.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attack::{launch, AttackKind, AttackSpec, CaptureBuffer};
use crate::codec::GooseEntry;
use crate::grid::{FaultSpec, FaultType, NetworkModel, PowerFlow, PowerFlowOptions, OpenSet, DEFAULT_IMPEDANCES_OHM, DEFAULT_LOCATIONS};
use crate::ml::{feature_names, Dataset, FeatureVector, LabeledSample, Provenance, ATTACK_CLASS, NUM_BUSES, NUM_CLASSES};
use crate::scada::collect_system_snapshot;
use crate::sim::{
    seconds_to_sample, substation_layouts, Action, EventKind, ProtectionSettings, SettingRules, SimConfig,
    SubstationLayout, SystemSim, SAMPLES_PER_CYCLE, SAMPLES_PER_SECOND,
};

use super::{advance_to, derive_seed, HarnessError, ScenarioConfig};

/// Sample at which the fault or attack begins in every mini-simulation.
pub const EVENT_SAMPLE: u64 = 2 * SAMPLES_PER_CYCLE;

/// Longest wait for a breaker to open after the event.
const OPEN_TIMEOUT: u64 = SAMPLES_PER_SECOND / 2;

/// Sample at which class-0 runs are scanned.
const NORMAL_SCAN: u64 = 5 * SAMPLES_PER_CYCLE;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub index: usize,
    pub fault: FaultSpec,
}

/// Branch-major: branch, then location, impedance and fault type.
pub fn enumerate_conditions(net: &NetworkModel) -> Vec<Condition> {
    let mut out = Vec::new();
    for br in &net.branches {
        for &location in &DEFAULT_LOCATIONS {
            for &impedance_ohm in &DEFAULT_IMPEDANCES_OHM {
                for fault_type in FaultType::ALL {
                    out.push(Condition {
                        index: out.len(),
                        fault: FaultSpec {
                            branch: br.id,
                            location,
                            impedance_ohm,
                            fault_type,
                        },
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenOptions {
    pub seed: u64,
    pub normal_samples: usize,
    pub load_scale: (f64, f64),
    pub collection_delay_s: f64,
    /// Restricts generation to these condition indices.
    pub conditions: Option<Vec<usize>>,
}

impl GenOptions {
    pub fn new(seed: u64) -> GenOptions {
        GenOptions::from_config(&ScenarioConfig::with_seed(seed))
    }

    pub fn from_config(cfg: &ScenarioConfig) -> GenOptions {
        GenOptions {
            seed: cfg.seed,
            normal_samples: cfg.dataset.normal_samples,
            load_scale: (cfg.dataset.load_scale_min, cfg.dataset.load_scale_max),
            collection_delay_s: cfg.scada.collection_delay_s,
            conditions: None,
        }
    }
}

/// Physical facts about one sample, kept beside the features.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDiagnostics {
    pub label: usize,
    pub event_sample: u64,
    pub first_trip: Option<u64>,
    pub first_open: Option<u64>,
    /// Largest per-phase magnitude deviation from prefault seen in each
    /// bus's PMU reports between the event and the first opening.
    pub deviation: [f64; NUM_BUSES],
    /// Faulted branch ends, or the attacked bus.
    pub event_buses: Vec<usize>,
}

impl SampleDiagnostics {
    pub fn trip_latency(&self) -> Option<u64> {
        self.first_trip.map(|t| t - self.event_sample)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub seed: u64,
    pub conditions: usize,
    pub normal_samples: usize,
    pub class_counts: [usize; NUM_CLASSES],
    /// Attacks regenerated after failing to trip.
    pub adjustments: Vec<String>,
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "conditions = {}", self.conditions);
        let _ = writeln!(s, "normal_samples = {}", self.normal_samples);
        let _ = writeln!(s, "total = {}", self.class_counts.iter().sum::<usize>());
        for (c, n) in self.class_counts.iter().enumerate() {
            let _ = writeln!(s, "class_{c} = {n}");
        }
        let _ = writeln!(s, "adjustments = {}", self.adjustments.len());
        for a in &self.adjustments {
            let _ = writeln!(s, "# {a}");
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub dataset: Dataset,
    pub diagnostics: Vec<SampleDiagnostics>,
    pub manifest: Manifest,
}

struct Ctx {
    net: Arc<NetworkModel>,
    settings: Arc<ProtectionSettings>,
    layouts: Vec<SubstationLayout>,
    prefault_mag: [f64; NUM_BUSES],
    delay: u64,
    seed: u64,
}

impl Ctx {
    fn sim(&self, seed: u64) -> Result<SystemSim, HarnessError> {
        let cfg = SimConfig {
            seed,
            ..SimConfig::default()
        };
        Ok(SystemSim::with_settings(self.net.clone(), cfg, self.settings.clone())?)
    }
}

struct Run {
    features: FeatureVector,
    diag: SampleDiagnostics,
    capture: Option<CaptureBuffer>,
}

/// Steps until the first breaker opens, tracking per-bus deviations.
fn watch_until_open(sim: &mut SystemSim, ctx: &Ctx, diag: &mut SampleDiagnostics) -> Result<Option<u64>, HarnessError> {
    let mut cursor = sim.log().len();
    loop {
        for e in &sim.log().events()[cursor..] {
            if e.sample >= diag.event_sample {
                match e.kind {
                    EventKind::TripIssued if diag.first_trip.is_none() => diag.first_trip = Some(e.sample),
                    EventKind::CbOpened => {
                        diag.first_open = Some(e.sample);
                        return Ok(Some(e.sample));
                    }
                    _ => {}
                }
            }
        }
        cursor = sim.log().len();
        if sim.sample() > diag.event_sample + OPEN_TIMEOUT {
            return Ok(None);
        }
        sim.step()?;
        if sim.sample() > diag.event_sample && sim.sample().is_multiple_of(SAMPLES_PER_CYCLE) {
            for s in sim.substations() {
                if let Some(r) = s.pmu.latest() {
                    let i = s.bus - 1;
                    for p in 0..3 {
                        diag.deviation[i] = diag.deviation[i].max((r.magnitude[p] - ctx.prefault_mag[i]).abs());
                    }
                }
            }
        }
    }
}

fn diag(label: usize, event_buses: Vec<usize>) -> SampleDiagnostics {
    SampleDiagnostics {
        label,
        event_sample: EVENT_SAMPLE,
        first_trip: None,
        first_open: None,
        deviation: [0.0; NUM_BUSES],
        event_buses,
    }
}

fn branch_ends(net: &NetworkModel, branch: usize) -> Result<(usize, usize), HarnessError> {
    let b = net
        .branches
        .iter()
        .find(|b| b.id == branch)
        .ok_or_else(|| HarnessError::Generation(format!("no branch {branch}")))?;
    Ok((b.from, b.to))
}

fn fault_run(ctx: &Ctx, fault: FaultSpec, seed: u64, capture_bus: Option<usize>) -> Result<Run, HarnessError> {
    let mut sim = ctx.sim(seed)?;
    let (f, t) = branch_ends(&ctx.net, fault.branch)?;
    let mut d = diag(fault.fault_type.class() as usize, vec![f, t]);
    sim.schedule(EVENT_SAMPLE, Action::ApplyFault(fault));
    if let Some(bus) = capture_bus {
        sim.run_until(EVENT_SAMPLE - SAMPLES_PER_CYCLE)?;
        let port = sim.substation(bus)?.monitor_port();
        sim.start_capture(bus, port)?;
    }
    let open = watch_until_open(&mut sim, ctx, &mut d)?;
    let capture = match capture_bus {
        Some(bus) => Some(CaptureBuffer::new(sim.substation(bus)?.monitor_port() as u32, sim.stop_capture(bus)?)?),
        None => None,
    };
    let open = open.ok_or_else(|| HarnessError::Generation(format!("fault {fault:?} did not open a breaker")))?;
    advance_to(&mut sim, open + ctx.delay)?;
    let features = collect_system_snapshot(&sim.feeds(), &ctx.layouts)?;
    Ok(Run {
        features,
        diag: d,
        capture,
    })
}

/// `None` when no breaker opens.
fn attack_run(
    ctx: &Ctx,
    kind: AttackKind,
    bus: usize,
    bay: u8,
    signature: FaultSpec,
    seed: u64,
    capture: Option<&CaptureBuffer>,
) -> Result<Option<Run>, HarnessError> {
    let mut sim = ctx.sim(seed)?;
    let spec = AttackSpec {
        kind,
        bus,
        bay,
        start_s: EVENT_SAMPLE as f64 / SAMPLES_PER_SECOND as f64,
        duration_s: if kind.is_sv() && kind != AttackKind::FdiSv { 1.0 } else { 0.1 },
        signature: Some(signature),
        trip_payload: GooseEntry {
            trip: true,
            cb_closed: true,
        },
    };
    debug_assert_eq!(spec.start_sample(), EVENT_SAMPLE);
    launch(&mut sim, &spec, capture)?;
    let mut d = diag(ATTACK_CLASS, vec![bus]);
    let Some(open) = watch_until_open(&mut sim, ctx, &mut d)? else {
        return Ok(None);
    };
    advance_to(&mut sim, open + ctx.delay)?;
    let features = collect_system_snapshot(&sim.feeds(), &ctx.layouts)?;
    Ok(Some(Run {
        features,
        diag: d,
        capture: None,
    }))
}

struct ConditionOutput {
    fault: (Run, Provenance),
    attack: (Run, Provenance),
    notes: Vec<String>,
}

fn run_condition(ctx: &Ctx, cond: &Condition) -> Result<ConditionOutput, HarnessError> {
    let i = cond.index;
    let kind = AttackKind::ALL[i % 4];
    let (f, t) = branch_ends(&ctx.net, cond.fault.branch)?;
    let bus = if (i / 4).is_multiple_of(2) { f } else { t };
    let bay = ctx.layouts[bus - 1]
        .line_bay(cond.fault.branch)
        .ok_or_else(|| HarnessError::Generation(format!("bus {bus} has no bay for branch {}", cond.fault.branch)))?
        .number;
    let replay = matches!(kind, AttackKind::ReplaySv | AttackKind::ReplayGoose);
    let base = 16 * i as u64;
    let mut fault = fault_run(ctx, cond.fault, derive_seed(ctx.seed, base), replay.then_some(bus))?;
    let first_capture = fault.capture.take();
    let fault_prov = Provenance::Fault(cond.fault);

    let mut notes = Vec::new();
    let mut ohms = vec![cond.fault.impedance_ohm];
    let mut lower: Vec<f64> = DEFAULT_IMPEDANCES_OHM
        .iter()
        .copied()
        .filter(|&z| z < cond.fault.impedance_ohm)
        .collect();
    lower.sort_by(|a, b| b.total_cmp(a));
    ohms.extend(lower);
    for (k, &ohm) in ohms.iter().enumerate() {
        let sig = FaultSpec {
            impedance_ohm: ohm,
            ..cond.fault
        };
        let recapture;
        let capture = if !replay {
            None
        } else if k == 0 {
            first_capture.as_ref()
        } else {
            recapture = fault_run(ctx, sig, derive_seed(ctx.seed, base + 2 + k as u64), Some(bus))?.capture;
            recapture.as_ref()
        };
        if let Some(run) = attack_run(ctx, kind, bus, bay, sig, derive_seed(ctx.seed, base + 1 + 4 * k as u64), capture)? {
            if k > 0 {
                notes.push(format!(
                    "condition {i}: {kind} at bus {bus} bay {bay} did not trip at {} ohm; used {ohm} ohm",
                    cond.fault.impedance_ohm
                ));
            }
            let prov = Provenance::Attack {
                kind,
                bus,
                bay,
                signature: sig,
            };
            return Ok(ConditionOutput {
                fault: (fault, fault_prov),
                attack: (run, prov),
                notes,
            });
        }
    }
    let run = attack_run(ctx, AttackKind::FdiGoose, bus, bay, cond.fault, derive_seed(ctx.seed, base + 15), None)?
        .ok_or_else(|| HarnessError::Generation(format!("condition {i}: FDI_GOOSE fallback did not trip")))?;
    notes.push(format!(
        "condition {i}: {kind} at bus {bus} bay {bay} did not trip at any impedance; replaced by FDI_GOOSE"
    ));
    let prov = Provenance::Attack {
        kind: AttackKind::FdiGoose,
        bus,
        bay,
        signature: cond.fault,
    };
    Ok(ConditionOutput {
        fault: (fault, fault_prov),
        attack: (run, prov),
        notes,
    })
}

fn normal_run(ctx: &Ctx, j: usize, range: (f64, f64)) -> Result<(FeatureVector, f64), HarnessError> {
    let idx = (1u64 << 40) + j as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(ctx.seed, idx));
    let scale = if range.1 > range.0 { rng.random_range(range.0..=range.1) } else { range.0 };
    let mut net = (*ctx.net).clone();
    for l in &mut net.loads {
        l.s *= scale;
    }
    let cfg = SimConfig {
        seed: derive_seed(ctx.seed, idx + 1),
        ..SimConfig::default()
    };
    let mut sim = SystemSim::with_settings(Arc::new(net), cfg, ctx.settings.clone())?;
    sim.run_until(NORMAL_SCAN)?;
    if sim.log().first(EventKind::CbOpened).is_some() {
        return Err(HarnessError::Generation(format!("load scale {scale} tripped a breaker")));
    }
    Ok((collect_system_snapshot(&sim.feeds(), &ctx.layouts)?, scale))
}

pub fn generate_dataset(net: &NetworkModel, opts: &GenOptions) -> Result<GeneratedDataset, HarnessError> {
    let pf = PowerFlow::solve(net, &OpenSet::new(), PowerFlowOptions::default())?;
    let settings = ProtectionSettings::compute(net, &pf, &SettingRules::default())?;
    let mut prefault_mag = [0.0; NUM_BUSES];
    for (i, v) in pf.voltages.iter().enumerate().take(NUM_BUSES) {
        prefault_mag[i] = v.norm();
    }
    let ctx = Ctx {
        net: Arc::new(net.clone()),
        settings: Arc::new(settings),
        layouts: substation_layouts(net),
        prefault_mag,
        delay: seconds_to_sample(opts.collection_delay_s),
        seed: opts.seed,
    };
    let all = enumerate_conditions(net);
    let conds: Vec<Condition> = match &opts.conditions {
        Some(idx) => idx
            .iter()
            .map(|&i| {
                all.get(i)
                    .copied()
                    .ok_or_else(|| HarnessError::Config(format!("condition {i} out of range")))
            })
            .collect::<Result<_, _>>()?,
        None => all,
    };
    let outs: Vec<Result<ConditionOutput, HarnessError>> = conds.par_iter().map(|c| run_condition(&ctx, c)).collect();
    let normals: Vec<Result<(FeatureVector, f64), HarnessError>> = (0..opts.normal_samples)
        .into_par_iter()
        .map(|j| normal_run(&ctx, j, opts.load_scale))
        .collect();

    let mut dataset = Dataset::new(feature_names(net));
    let mut diagnostics = Vec::new();
    let mut adjustments = Vec::new();
    for o in outs {
        let o = o?;
        for (run, prov) in [o.fault, o.attack] {
            dataset
                .samples
                .push(LabeledSample::new(run.features, run.diag.label, prov)?);
            diagnostics.push(run.diag);
        }
        adjustments.extend(o.notes);
    }
    for n in normals {
        let (features, load_scale) = n?;
        dataset
            .samples
            .push(LabeledSample::new(features, 0, Provenance::Normal { load_scale })?);
        diagnostics.push(diag(0, Vec::new()));
    }
    let manifest = Manifest {
        seed: opts.seed,
        conditions: conds.len(),
        normal_samples: opts.normal_samples,
        class_counts: dataset.class_counts(),
        adjustments,
    };
    Ok(GeneratedDataset {
        dataset,
        diagnostics,
        manifest,
    })
}
