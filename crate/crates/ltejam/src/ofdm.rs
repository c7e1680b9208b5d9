//! OFDM modulation between the resource grid and the time domain:
//! unitary FFT scaling, DC-skipping subcarrier mapping and the normal
//! cyclic-prefix schedule.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::cell::{Bandwidth, SYMBOLS_PER_SLOT};

/// Frequency-by-time grid of resource elements for any whole number of
/// OFDM symbols, stored row-major by symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    pub n_sc: usize,
    pub data: Vec<Complex64>,
}

impl ResourceGrid {
    pub fn new(n_sc: usize, n_symbols: usize) -> Self {
        Self {
            n_sc,
            data: vec![Complex64::new(0.0, 0.0); n_sc * n_symbols],
        }
    }

    pub fn n_symbols(&self) -> usize {
        self.data.len() / self.n_sc
    }

    pub fn at(&self, symbol: usize, subcarrier: usize) -> Complex64 {
        self.data[symbol * self.n_sc + subcarrier]
    }

    pub fn set(&mut self, symbol: usize, subcarrier: usize, value: Complex64) {
        self.data[symbol * self.n_sc + subcarrier] = value;
    }

    pub fn symbol(&self, symbol: usize) -> &[Complex64] {
        &self.data[symbol * self.n_sc..(symbol + 1) * self.n_sc]
    }

    pub fn symbol_mut(&mut self, symbol: usize) -> &mut [Complex64] {
        &mut self.data[symbol * self.n_sc..(symbol + 1) * self.n_sc]
    }

    /// Total grid energy (sum of squared magnitudes).
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// OFDM modulator/demodulator for one bandwidth, holding the FFT plans.
pub struct Ofdm {
    bandwidth: Bandwidth,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl Ofdm {
    pub fn new(bandwidth: Bandwidth) -> Self {
        let mut planner = FftPlanner::new();
        let n = bandwidth.fft_size();
        Self {
            bandwidth,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        }
    }

    pub fn bandwidth(&self) -> Bandwidth {
        self.bandwidth
    }

    pub fn fft_size(&self) -> usize {
        self.bandwidth.fft_size()
    }

    /// Cyclic-prefix length for a symbol position within its slot
    /// (normal CP: 160 then 144, scaled from the 2048-point reference).
    pub fn cp_len(&self, symbol_in_slot: usize) -> usize {
        let n = self.fft_size();
        if symbol_in_slot % SYMBOLS_PER_SLOT == 0 {
            160 * n / 2048
        } else {
            144 * n / 2048
        }
    }

    /// Samples occupied by one slot (CP included): 7.5 x FFT size.
    pub fn slot_samples(&self) -> usize {
        15 * self.fft_size() / 2
    }

    pub fn subframe_samples(&self) -> usize {
        2 * self.slot_samples()
    }

    pub fn frame_samples(&self) -> usize {
        20 * self.slot_samples()
    }

    /// FFT bin carrying grid subcarrier `k`. The occupied band straddles
    /// DC symmetrically and the DC bin itself stays empty.
    pub fn bin_of(&self, k: usize) -> usize {
        let half = self.bandwidth.n_subcarriers() / 2;
        let n = self.fft_size();
        if k < half {
            n - half + k
        } else {
            k - half + 1
        }
    }

    /// One OFDM symbol without cyclic prefix, unitary scaling.
    pub fn modulate_symbol(&self, freq: &[Complex64]) -> Vec<Complex64> {
        let n = self.fft_size();
        assert_eq!(freq.len(), self.bandwidth.n_subcarriers());
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (k, &v) in freq.iter().enumerate() {
            buf[self.bin_of(k)] = v;
        }
        self.ifft.process(&mut buf);
        let scale = 1.0 / (n as f64).sqrt();
        for v in buf.iter_mut() {
            *v *= scale;
        }
        buf
    }

    /// Inverse of `modulate_symbol` for one CP-free symbol.
    pub fn demodulate_symbol(&self, time: &[Complex64]) -> Vec<Complex64> {
        let n = self.fft_size();
        assert_eq!(time.len(), n);
        let mut buf = time.to_vec();
        self.fft.process(&mut buf);
        let scale = 1.0 / (n as f64).sqrt();
        let n_sc = self.bandwidth.n_subcarriers();
        (0..n_sc).map(|k| buf[self.bin_of(k)] * scale).collect()
    }

    /// Modulates a grid of whole symbols starting at a slot boundary,
    /// prepending the cyclic prefix of each symbol.
    pub fn modulate(&self, grid: &ResourceGrid) -> Vec<Complex64> {
        let n_symbols = grid.n_symbols();
        let mut out = Vec::with_capacity(n_symbols * (self.fft_size() + self.cp_len(1)));
        for s in 0..n_symbols {
            let body = self.modulate_symbol(grid.symbol(s));
            let cp = self.cp_len(s % SYMBOLS_PER_SLOT);
            out.extend_from_slice(&body[body.len() - cp..]);
            out.extend_from_slice(&body);
        }
        out
    }

    /// Demodulates `n_symbols` symbols from samples that start at a slot
    /// boundary, discarding each cyclic prefix.
    pub fn demodulate(&self, samples: &[Complex64], n_symbols: usize) -> ResourceGrid {
        let n = self.fft_size();
        let mut grid = ResourceGrid::new(self.bandwidth.n_subcarriers(), n_symbols);
        let mut pos = 0usize;
        for s in 0..n_symbols {
            pos += self.cp_len(s % SYMBOLS_PER_SLOT);
            let freq = self.demodulate_symbol(&samples[pos..pos + n]);
            grid.symbol_mut(s).copy_from_slice(&freq);
            pos += n;
        }
        grid
    }
}
