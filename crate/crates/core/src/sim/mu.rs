//! Merging unit: turns the bay's phasors into 9-2LE samples.

use num_complex::Complex64;

use crate::codec::{encode_sv, RawFrame, SvEntry, SvFrame, VlanTag, SV_CURRENT_UNIT_A, SV_VOLTAGE_UNIT_V};

use super::dft::twiddles;
use super::layout::{device_mac, sv_appid, sv_id, sv_mac, ROLE_MU};
use super::{SimError, SAMPLES_PER_CYCLE, SAMPLES_PER_SECOND};

/// Per-unit to SI scaling of one bay's analog channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaling {
    /// Phase-to-neutral base voltage in volts.
    pub v_base: f64,
    /// Base current in amperes.
    pub i_base: f64,
}

impl Scaling {
    pub fn new(base_mva: f64, base_kv: f64) -> Scaling {
        Scaling {
            v_base: base_kv * 1e3 / 3f64.sqrt(),
            i_base: base_mva * 1e6 / (3f64.sqrt() * base_kv * 1e3),
        }
    }

    pub fn current_pu(&self, value: i32) -> f64 {
        value as f64 * SV_CURRENT_UNIT_A / self.i_base
    }

    pub fn voltage_pu(&self, value: i32) -> f64 {
        value as f64 * SV_VOLTAGE_UNIT_V / self.v_base
    }
}

/// Integer samples of the eight channels at global sample `n`.
pub fn quantize(current: &[Complex64; 3], voltage: &[Complex64; 3], scale: Scaling, n: u64) -> [i32; 8] {
    let w = twiddles()[(n % SAMPLES_PER_CYCLE) as usize];
    let ki = 2f64.sqrt() * scale.i_base / SV_CURRENT_UNIT_A;
    let kv = 2f64.sqrt() * scale.v_base / SV_VOLTAGE_UNIT_V;
    let q = |x: Complex64, k: f64| ((x * w).re * k).round().clamp(i32::MIN as f64, i32::MAX as f64) as i32;
    let ia = q(current[0], ki);
    let ib = q(current[1], ki);
    let ic = q(current[2], ki);
    let va = q(voltage[0], kv);
    let vb = q(voltage[1], kv);
    let vc = q(voltage[2], kv);
    [
        ia,
        ib,
        ic,
        ia.saturating_add(ib).saturating_add(ic),
        va,
        vb,
        vc,
        va.saturating_add(vb).saturating_add(vc),
    ]
}

#[derive(Debug, Clone)]
pub struct MergingUnit {
    pub bus: usize,
    pub bay: u8,
    pub scale: Scaling,
    current: [Complex64; 3],
    voltage: [Complex64; 3],
    template: SvFrame,
    bytes: Vec<u8>,
    smp_off: usize,
    data_off: usize,
}

impl MergingUnit {
    pub fn new(bus: usize, bay: u8, scale: Scaling, vlan: Option<VlanTag>) -> Result<MergingUnit, SimError> {
        let template = SvFrame {
            dst: sv_mac(bus, bay),
            src: device_mac(bus, bay, ROLE_MU),
            vlan,
            appid: sv_appid(bus, bay),
            sv_id: sv_id(bus, bay),
            smp_cnt: 0,
            conf_rev: 1,
            smp_synch: 2,
            dataset: [SvEntry::default(); 8],
        };
        let a = encode_sv(&template)?.bytes;
        let mut probe = template.clone();
        probe.smp_cnt = 0xFFFF;
        let b = encode_sv(&probe)?.bytes;
        let smp_off = a.iter().zip(&b).position(|(x, y)| x != y).ok_or(SimError::Internal("smpCnt offset"))?;
        let data_off = a.len() - 64;
        Ok(MergingUnit {
            bus,
            bay,
            scale,
            current: [Complex64::new(0.0, 0.0); 3],
            voltage: [Complex64::new(0.0, 0.0); 3],
            template,
            bytes: a,
            smp_off,
            data_off,
        })
    }

    /// Sets the per-unit phasors the unit samples from now on.
    pub fn set_phasors(&mut self, current: [Complex64; 3], voltage: [Complex64; 3]) {
        self.current = current;
        self.voltage = voltage;
    }

    pub fn template(&self) -> &SvFrame {
        &self.template
    }

    pub fn samples(&self, n: u64) -> [i32; 8] {
        quantize(&self.current, &self.voltage, self.scale, n)
    }

    pub fn smp_cnt(n: u64) -> u16 {
        (n % SAMPLES_PER_SECOND) as u16
    }

    /// The frame published at sample `n`.
    pub fn publish(&mut self, n: u64) -> RawFrame {
        let values = self.samples(n);
        self.publish_values(n, &values)
    }

    /// Encodes precomputed samples for sample `n`.
    pub fn publish_values(&mut self, n: u64, values: &[i32; 8]) -> RawFrame {
        self.bytes[self.smp_off..self.smp_off + 2].copy_from_slice(&Self::smp_cnt(n).to_be_bytes());
        for (i, v) in values.iter().enumerate() {
            let o = self.data_off + 8 * i;
            self.bytes[o..o + 4].copy_from_slice(&v.to_be_bytes());
        }
        RawFrame::new(self.bytes.clone())
    }

    /// Same frame through the full encoder.
    pub fn frame(&self, n: u64) -> SvFrame {
        let mut f = self.template.clone();
        f.smp_cnt = Self::smp_cnt(n);
        for (e, v) in f.dataset.iter_mut().zip(self.samples(n)) {
            e.value = v;
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::decode_sv;

    #[test]
    fn patched_bytes_match_encoder() {
        let s = Scaling::new(100.0, 69.0);
        let mut mu = MergingUnit::new(8, 2, s, Some(VlanTag { priority: 4, vid: 7 })).unwrap();
        let a = Complex64::from_polar(0.8, 0.3);
        mu.set_phasors(
            [a, a * crate::grid::ALPHA * crate::grid::ALPHA, a * crate::grid::ALPHA],
            [Complex64::new(1.02, -0.1); 3],
        );
        for n in [0u64, 1, 79, 4799, 4800, 123_457] {
            let raw = mu.publish(n);
            assert_eq!(raw.bytes, encode_sv(&mu.frame(n)).unwrap().bytes);
            let f = decode_sv(&raw).unwrap();
            assert_eq!(f.smp_cnt as u64, n % 4800);
        }
    }

    #[test]
    fn peak_value_scaling() {
        let s = Scaling::new(100.0, 69.0);
        let v = quantize(&[Complex64::new(1.0, 0.0); 3], &[Complex64::new(1.0, 0.0); 3], s, 0);
        // 1 pu current at 69 kV = 836.7 A rms
        assert!((v[0] as f64 - 2f64.sqrt() * 836_739.0).abs() < 1000.0);
        assert!((s.voltage_pu(v[4]) - 2f64.sqrt()).abs() < 1e-6);
    }
}
