//! Full-cycle sliding DFT phasor estimation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::SAMPLES_PER_CYCLE;

const N: usize = SAMPLES_PER_CYCLE as usize;

/// `e^{j 2 pi k / N}` for k in 0..N.
pub fn twiddles() -> &'static [Complex64; N] {
    static T: OnceLock<[Complex64; N]> = OnceLock::new();
    T.get_or_init(|| std::array::from_fn(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / N as f64)))
}

/// RMS phasor of the last cycle of samples, referenced to the global sample
/// index so that `sqrt(2)|X| cos(2 pi n / N + phi)` reads back as `X`.
#[derive(Debug, Clone)]
pub struct SlidingDft {
    buf: [f64; N],
    filled: usize,
    sum: Complex64,
    pushes: usize,
}

impl Default for SlidingDft {
    fn default() -> Self {
        SlidingDft {
            buf: [0.0; N],
            filled: 0,
            sum: Complex64::new(0.0, 0.0),
            pushes: 0,
        }
    }
}

impl SlidingDft {
    pub fn new() -> SlidingDft {
        SlidingDft::default()
    }

    pub fn reset(&mut self) {
        *self = SlidingDft::default();
    }

    /// Adds the sample taken at global index `n`.
    pub fn push(&mut self, n: u64, x: f64) {
        let k = (n % N as u64) as usize;
        let w = twiddles()[k].conj();
        let old = self.buf[k];
        self.buf[k] = x;
        self.pushes += 1;
        if self.pushes.is_multiple_of(N) {
            // periodic exact recompute bounds rounding drift
            self.sum = self.buf.iter().zip(twiddles()).map(|(x, w)| x * w.conj()).sum();
        } else {
            self.sum += (x - old) * w;
        }
        self.filled = (self.filled + 1).min(N);
    }

    pub fn ready(&self) -> bool {
        self.filled == N
    }

    pub fn phasor(&self) -> Complex64 {
        self.sum * (2f64.sqrt() / N as f64)
    }
}
