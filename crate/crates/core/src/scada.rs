//! Control-center side: gathers substation feeds after a breaker opens,
//! classifies the event and dispatches the CIED on a detected attack.

use thiserror::Error;

use crate::grid::BusPhasors;
use crate::ml::{assemble_features, FeatureVector, MlError, TrainedModel, ATTACK_CLASS, NUM_BREAKERS};
use crate::sim::{seconds_to_sample, EventKind, SimError, SubstationFeed, SubstationLayout, SystemSim, SAMPLES_PER_SECOND};

pub const SCADA_SOURCE: &str = "SCADA";

/// Magnitude deviation (pu) within a fault window that counts as a sag.
pub const SAG_THRESHOLD_PU: f64 = 0.008;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScadaError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error("no measurement from substation {0} within the collection window")]
    IncompleteCollection(usize),
    #[error("collection delay {0} s outside [1, 3]")]
    BadDelay(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScadaConfig {
    /// Seconds from the first breaker opening to classification.
    pub collection_delay_s: f64,
}

impl Default for ScadaConfig {
    fn default() -> Self {
        ScadaConfig { collection_delay_s: 2.0 }
    }
}

/// Report used for one substation: the last one before its breaker opened
/// if a fault window was retained, otherwise the latest.
pub fn feed_report(feed: &SubstationFeed) -> Option<BusPhasors> {
    match &feed.window {
        Some(w) if !w.is_empty() => w.last().copied(),
        _ => feed.latest,
    }
}

pub fn collect_system_snapshot(feeds: &[SubstationFeed], layouts: &[SubstationLayout]) -> Result<FeatureVector, ScadaError> {
    let mut reports = Vec::with_capacity(feeds.len());
    let mut trips = vec![false; NUM_BREAKERS];
    let mut closed = vec![true; NUM_BREAKERS];
    for layout in layouts {
        let feed = feeds
            .iter()
            .find(|f| f.bus == layout.bus)
            .ok_or(ScadaError::IncompleteCollection(layout.bus))?;
        let r = feed_report(feed).ok_or(ScadaError::IncompleteCollection(layout.bus))?;
        reports.push((layout.bus, r));
        for (bay, st) in layout.bays.iter().zip(&feed.bays) {
            trips[bay.cb_index] = st.trip_latched;
            closed[bay.cb_index] = st.cb_closed;
        }
    }
    Ok(assemble_features(&reports, &trips, &closed)?)
}

/// Largest per-phase magnitude change across the retained window, measured
/// from its oldest report.
pub fn window_deviation(feed: &SubstationFeed) -> Option<f64> {
    let w = feed.window.as_ref()?;
    let first = w.first()?;
    let mut dev = 0f64;
    for r in w {
        for p in 0..3 {
            dev = dev.max((r.magnitude[p] - first.magnitude[p]).abs());
        }
    }
    Some(dev)
}

/// First tripped bay (bus order) at a substation whose fault window shows
/// no voltage sag.
pub fn attribute_compromised(feeds: &[SubstationFeed]) -> Option<(usize, u8)> {
    let mut sorted: Vec<&SubstationFeed> = feeds.iter().collect();
    sorted.sort_by_key(|f| f.bus);
    for f in sorted {
        let Some(i) = f.bays.iter().position(|b| b.trip_latched) else {
            continue;
        };
        if window_deviation(f).unwrap_or(0.0) < SAG_THRESHOLD_PU {
            return Some((f.bus, i as u8 + 1));
        }
    }
    None
}

/// Runs the model and logs CLASSIFICATION with the latency since the trip.
pub fn classify_event(sim: &mut SystemSim, model: &TrainedModel, features: &FeatureVector, trip_sample: u64) -> Result<usize, ScadaError> {
    let class = model.predict(features.values())?;
    let n = sim.sample();
    let latency = n.saturating_sub(trip_sample) as f64 / SAMPLES_PER_SECOND as f64;
    sim.log_mut().push(
        n,
        SCADA_SOURCE,
        EventKind::Classification,
        format!("class={class} latency={latency:.6}"),
    );
    Ok(class)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyberattackSignal {
    pub bus: usize,
    pub flag: bool,
    /// Sample of the last transition.
    pub changed_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub trip_sample: u64,
    pub class: usize,
    pub latency_s: f64,
    pub compromised: Option<(usize, u8)>,
    pub mitigated: bool,
    pub features: FeatureVector,
}

pub struct ScadaCenter {
    model: TrainedModel,
    config: ScadaConfig,
    signals: Vec<CyberattackSignal>,
    layouts: Vec<SubstationLayout>,
    cursor: usize,
    pending: Option<u64>,
    detections: Vec<Detection>,
}

impl ScadaCenter {
    pub fn new(model: TrainedModel, config: ScadaConfig, sim: &SystemSim) -> Result<ScadaCenter, ScadaError> {
        if !(1.0..=3.0).contains(&config.collection_delay_s) {
            return Err(ScadaError::BadDelay(config.collection_delay_s));
        }
        let layouts: Vec<SubstationLayout> = sim.substations().iter().map(|s| s.layout.clone()).collect();
        Ok(ScadaCenter {
            model,
            config,
            signals: layouts
                .iter()
                .map(|l| CyberattackSignal {
                    bus: l.bus,
                    flag: false,
                    changed_at: None,
                })
                .collect(),
            layouts,
            cursor: sim.log().len(),
            pending: None,
            detections: Vec::new(),
        })
    }

    pub fn signal(&self, bus: usize) -> Option<&CyberattackSignal> {
        self.signals.iter().find(|s| s.bus == bus)
    }

    pub fn detections(&self) -> &[Detection] {
        &self.detections
    }

    pub fn model(&self) -> &TrainedModel {
        &self.model
    }

    /// Sample at which the pending collection completes, after scanning new
    /// log entries for a breaker opening.
    pub fn observe(&mut self, sim: &SystemSim) -> Option<u64> {
        let events = sim.log().events();
        if self.pending.is_none() {
            if let Some(e) = events[self.cursor.min(events.len())..]
                .iter()
                .find(|e| e.kind == EventKind::CbOpened)
            {
                self.pending = Some(e.sample);
            }
        }
        self.cursor = events.len();
        self.pending.map(|t| t + seconds_to_sample(self.config.collection_delay_s))
    }

    /// Completes a due collection: classify, attribute and mitigate.
    pub fn poll(&mut self, sim: &mut SystemSim) -> Result<Option<Detection>, ScadaError> {
        let Some(due) = self.observe(sim) else {
            return Ok(None);
        };
        if sim.sample() < due {
            return Ok(None);
        }
        let trip = self.pending.take().unwrap_or(due);
        let feeds = sim.feeds();
        let features = collect_system_snapshot(&feeds, &self.layouts);
        let features = match features {
            Ok(f) => f,
            Err(e) => {
                sim.acknowledge();
                self.cursor = sim.log().len();
                return Err(e);
            }
        };
        let class = classify_event(sim, &self.model, &features, trip)?;
        let compromised = if class == ATTACK_CLASS { attribute_compromised(&feeds) } else { None };
        let mut mitigated = false;
        if let Some((bus, bay)) = compromised {
            mitigated = self.issue_mitigation(sim, bus, bay)?;
        } else if class == ATTACK_CLASS {
            let n = sim.sample();
            sim.log_mut()
                .push(n, SCADA_SOURCE, EventKind::Classification, "attack without attributable bay");
        }
        sim.acknowledge();
        self.cursor = sim.log().len();
        let d = Detection {
            trip_sample: trip,
            class,
            latency_s: (sim.sample() - trip) as f64 / SAMPLES_PER_SECOND as f64,
            compromised,
            mitigated,
            features,
        };
        self.detections.push(d.clone());
        Ok(Some(d))
    }

    /// Raises the flag and activates the CIED in the same step. A raised
    /// flag makes this a logged no-op returning `false`.
    pub fn issue_mitigation(&mut self, sim: &mut SystemSim, bus: usize, bay: u8) -> Result<bool, ScadaError> {
        let n = sim.sample();
        let sig = self
            .signals
            .iter_mut()
            .find(|s| s.bus == bus)
            .ok_or(SimError::UnknownBus(bus))?;
        if sig.flag {
            sim.log_mut().push(
                n,
                SCADA_SOURCE,
                EventKind::ScadaFlagSet,
                format!("bus={bus} bay={bay} already set"),
            );
            return Ok(false);
        }
        sig.flag = true;
        sig.changed_at = Some(n);
        sim.log_mut()
            .push(n, SCADA_SOURCE, EventKind::ScadaFlagSet, format!("bus={bus} bay={bay} flag=1"));
        sim.activate_cied(bus, bay)?;
        Ok(true)
    }

    /// Operator reset of a raised flag.
    pub fn reset(&mut self, bus: usize, sample: u64) -> bool {
        match self.signals.iter_mut().find(|s| s.bus == bus && s.flag) {
            Some(s) => {
                s.flag = false;
                s.changed_at = Some(sample);
                true
            }
            None => false,
        }
    }
}
