//! Bus phasor measurement for the SCADA feed.

use std::collections::VecDeque;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::codec::{decode_sv, RawFrame};
use crate::grid::BusPhasors;

use super::dft::SlidingDft;
use super::mu::Scaling;
use super::SAMPLES_PER_CYCLE;

/// Reports kept for the fault window.
pub const WINDOW_REPORTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub magnitude_pu: f64,
    pub angle_rad: f64,
    pub frequency_hz: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            magnitude_pu: 0.001,
            angle_rad: 0.0005,
            frequency_hz: 0.002,
        }
    }
}

impl NoiseConfig {
    pub fn none() -> NoiseConfig {
        NoiseConfig {
            magnitude_pu: 0.0,
            angle_rad: 0.0,
            frequency_hz: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Pmu {
    pub bus: usize,
    appid: u16,
    scale: Scaling,
    dft: [SlidingDft; 3],
    inbox: Option<[i32; 3]>,
    noise: NoiseConfig,
    rng: ChaCha8Rng,
    recent: VecDeque<BusPhasors>,
    window: Option<Vec<BusPhasors>>,
}

impl Pmu {
    pub fn new(bus: usize, appid: u16, scale: Scaling, noise: NoiseConfig, seed: u64) -> Pmu {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(bus as u64);
        Pmu {
            bus,
            appid,
            scale,
            dft: Default::default(),
            inbox: None,
            noise,
            rng,
            recent: VecDeque::with_capacity(WINDOW_REPORTS),
            window: None,
        }
    }

    pub fn receive_sv(&mut self, frame: &RawFrame) {
        let Ok(f) = decode_sv(frame) else { return };
        if f.appid == self.appid {
            self.inbox = Some([f.dataset[4].value, f.dataset[5].value, f.dataset[6].value]);
        }
    }

    /// Consumes the sample at `n`; reports at every cycle boundary.
    pub fn step(&mut self, n: u64, frequency_hz: f64) -> Option<&BusPhasors> {
        if let Some(v) = self.inbox.take() {
            for (d, x) in self.dft.iter_mut().zip(v) {
                d.push(n, self.scale.voltage_pu(x));
            }
        }
        if n % SAMPLES_PER_CYCLE != SAMPLES_PER_CYCLE - 1 || !self.dft[0].ready() {
            return None;
        }
        let v: [Complex64; 3] = std::array::from_fn(|p| self.dft[p].phasor());
        let mut r = BusPhasors::from_phases(v, frequency_hz);
        self.add_noise(&mut r);
        if self.recent.len() == WINDOW_REPORTS {
            self.recent.pop_front();
        }
        self.recent.push_back(r);
        self.recent.back()
    }

    fn add_noise(&mut self, r: &mut BusPhasors) {
        let g = |rng: &mut ChaCha8Rng, s: f64| if s > 0.0 { Normal::new(0.0, s).unwrap().sample(rng) } else { 0.0 };
        for p in 0..3 {
            r.magnitude[p] = (r.magnitude[p] + g(&mut self.rng, self.noise.magnitude_pu)).max(0.0);
            r.angle[p] = crate::grid::wrap_angle(r.angle[p] + g(&mut self.rng, self.noise.angle_rad));
            r.frequency[p] += g(&mut self.rng, self.noise.frequency_hz);
        }
    }

    pub fn latest(&self) -> Option<&BusPhasors> {
        self.recent.back()
    }

    /// Freezes the recent reports as the fault window; later calls keep the
    /// first window.
    pub fn retain_window(&mut self) {
        if self.window.is_none() && !self.recent.is_empty() {
            self.window = Some(self.recent.iter().cloned().collect());
        }
    }

    pub fn window(&self) -> Option<&[BusPhasors]> {
        self.window.as_deref()
    }

    pub fn clear_window(&mut self) {
        self.window = None;
    }
}
