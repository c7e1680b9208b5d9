//! Cell search and synchronization tracking against the PSS/SSS
//! signals: initial acquisition over an unaligned capture and a
//! tracking-loop lock model for frame-aligned captures.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::cell::{
    Bandwidth, SYNC_SUBFRAMES, SYNC_USED_SUBCARRIERS,
};
use crate::ofdm::Ofdm;
use crate::sequences::{pss_sequence, sss_sequence};
use crate::tx::CellTables;

/// Detection and lock-loss parameters for synchronization.
#[derive(Debug, Clone, Copy)]
pub struct SyncParams {
    /// Peak-to-mean power ratio of the accumulated search profile that
    /// counts as a PSS detection.
    pub detection_ratio: f64,
    /// Minimum normalized SSS correlation accepting a cell identity.
    pub sss_threshold: f64,
    /// Sync occasions the timing loop effectively averages over.
    pub loop_memory: f64,
    /// Loop coherence below which timing lock counts as lost.
    pub lock_threshold: f64,
    /// Correlator shift, as a fraction of the nominal amplitude, beyond
    /// which the lock counts as broken outright (timing slip).
    pub divergence_fraction: f64,
    /// The shift must also exceed this many standard errors of the
    /// frame's correlator average before it counts as a slip.
    pub divergence_sigmas: f64,
}

impl Default for SyncParams {
    fn default() -> Self {
        Self {
            detection_ratio: 16.0,
            sss_threshold: 0.25,
            loop_memory: 64.0,
            lock_threshold: 0.05,
            divergence_fraction: 0.5,
            divergence_sigmas: 4.0,
        }
    }
}

/// Raw measurements taken at one sync occasion.
#[derive(Debug, Clone, Copy)]
pub struct OccasionStatus {
    pub subframe: usize,
    /// Complex PSS correlator output (nominally the sync amplitude).
    pub correlator: Complex64,
    /// Interference-plus-noise power per sync subcarrier, from the
    /// residual after removing the correlated component.
    pub interference: f64,
}

/// Tracking verdict over the sync occasions present in the capture.
#[derive(Debug, Clone)]
pub struct SyncReport {
    pub occasions: Vec<OccasionStatus>,
    /// Steady-state loop coherence: correlator signal power over
    /// correlator noise power, in [0, 1].
    pub coherence: f64,
    /// Magnitude of the average correlator's shift from nominal.
    pub divergence: f64,
    /// True when the loop model declares the timing reference gone.
    pub lost: bool,
}

/// Result of a full cell search.
#[derive(Debug, Clone, Copy)]
pub struct Acquisition {
    pub cell_id: u16,
    pub n_id_2: u8,
    /// Sample index where the detected frame starts.
    pub frame_offset: usize,
    /// Peak-to-mean ratio of the accumulated PSS search profile.
    pub pss_metric: f64,
    pub sss_metric: f64,
}

/// Sample offset of the PSS symbol body within its subframe.
pub fn pss_body_offset(ofdm: &Ofdm) -> usize {
    // Symbols 0..=5 precede it in the first slot.
    let mut pos = 0;
    for s in 0..6 {
        pos += ofdm.cp_len(s) + ofdm.fft_size();
    }
    pos + ofdm.cp_len(6)
}

/// Sample offset of the SSS symbol body within its subframe.
pub fn sss_body_offset(ofdm: &Ofdm) -> usize {
    let mut pos = 0;
    for s in 0..5 {
        pos += ofdm.cp_len(s) + ofdm.fft_size();
    }
    pos + ofdm.cp_len(5)
}

/// Central 62 subcarriers of one demodulated symbol window.
fn central_bins(ofdm: &Ofdm, window: &[Complex64]) -> Vec<Complex64> {
    let freq = ofdm.demodulate_symbol(window);
    let first = (freq.len() - 72) / 2 + 5;
    freq[first..first + SYNC_USED_SUBCARRIERS].to_vec()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Lock check over a frame-aligned capture, modeling a timing loop with
/// memory. A live receiver averages its PSS correlator over many past
/// occasions, so the lock metric responds to the sustained interference
/// level on the sync subcarriers, not to any single occasion. The
/// capture supplies the average correlator output and the measured
/// interference power; the loop state is modeled by damping the
/// observed correlator deviation down to its steady-state share and
/// thresholding the resulting coherence. A correlator shift too large
/// for measurement noise to explain (a timing slip) breaks the lock
/// regardless of the interference estimate.
///
/// `nominal` is the expected correlator amplitude, i.e. the transmit
/// amplitude of the primary sequence.
pub fn track_sync(
    ofdm: &Ofdm,
    tables: &CellTables,
    samples: &[Complex64],
    nominal: f64,
    params: &SyncParams,
) -> SyncReport {
    let n = ofdm.fft_size();
    let body = pss_body_offset(ofdm);
    let mut occasions = Vec::new();
    for &sf in &SYNC_SUBFRAMES {
        let base = sf * ofdm.subframe_samples() + body;
        if base + n > samples.len() {
            continue;
        }
        let bins = central_bins(ofdm, &samples[base..base + n]);
        let correlator = bins
            .iter()
            .zip(tables.pss.iter())
            .map(|(x, p)| x * p.conj())
            .sum::<Complex64>()
            / SYNC_USED_SUBCARRIERS as f64;
        let interference = bins
            .iter()
            .zip(tables.pss.iter())
            .map(|(x, p)| (x - correlator * p).norm_sqr())
            .sum::<f64>()
            / (SYNC_USED_SUBCARRIERS - 1) as f64;
        occasions.push(OccasionStatus {
            subframe: sf,
            correlator,
            interference,
        });
    }
    if occasions.is_empty() {
        return SyncReport {
            occasions,
            coherence: 0.0,
            divergence: nominal,
            lost: true,
        };
    }

    let n_occ = occasions.len() as f64;
    let mean = occasions.iter().map(|o| o.correlator).sum::<Complex64>() / n_occ;
    let noise = occasions.iter().map(|o| o.interference).sum::<f64>() / n_occ;
    // Variance of one occasion's correlator, and of the capture average.
    let correlator_var = noise / SYNC_USED_SUBCARRIERS as f64;
    let stderr = (correlator_var / n_occ).sqrt();

    let shift = mean - Complex64::new(nominal, 0.0);
    let divergence = shift.norm();
    let slipped = divergence
        > (params.divergence_sigmas * stderr).max(params.divergence_fraction * nominal);

    // The loop averages `loop_memory` occasions, so only a damped share
    // of the observed deviation survives into its steady state.
    let damping = (n_occ / params.loop_memory).sqrt();
    let filtered = Complex64::new(nominal, 0.0) + shift * damping;
    let coherence = filtered.norm_sqr() / (filtered.norm_sqr() + correlator_var);

    SyncReport {
        occasions,
        coherence,
        divergence,
        lost: slipped || coherence < params.lock_threshold,
    }
}

/// Searches a capture for the cell. PSS correlation profiles are
/// accumulated coherently modulo the half-frame period, so long
/// captures integrate every sync occasion they contain; the SSS then
/// identifies the cell group and the frame boundary. Returns the
/// sync-failure value `None` when no convincing peak emerges.
pub fn acquire_sync(
    bandwidth: Bandwidth,
    samples: &[Complex64],
    params: &SyncParams,
) -> Option<Acquisition> {
    let ofdm = Ofdm::new(bandwidth);
    let n = ofdm.fft_size();
    if samples.len() < n {
        return None;
    }
    let hf = 5 * ofdm.subframe_samples();
    let body = pss_body_offset(&ofdm);

    // Time-domain references for the three candidate PSS sequences.
    let mut refs = Vec::new();
    for n_id_2 in 0..3u8 {
        let seq = pss_sequence(n_id_2).expect("sector index in range");
        let mut freq = vec![Complex64::new(0.0, 0.0); bandwidth.n_subcarriers()];
        let first = (freq.len() - 72) / 2 + 5;
        freq[first..first + SYNC_USED_SUBCARRIERS].copy_from_slice(&seq);
        refs.push(ofdm.modulate_symbol(&freq));
    }

    // Cross-correlate each half-frame block against the references via
    // FFT and add the complex profiles; the eNB repeats the PSS with a
    // stable phase every half frame, so occasions combine coherently.
    let fft_len = (hf + n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(fft_len);
    let inv = planner.plan_fft_inverse(fft_len);
    let ref_spectra: Vec<Vec<Complex64>> = refs
        .iter()
        .map(|r| {
            let mut buf = vec![Complex64::new(0.0, 0.0); fft_len];
            buf[..r.len()].copy_from_slice(r);
            fwd.process(&mut buf);
            buf
        })
        .collect();

    let last_lag = samples.len() - n; // inclusive
    let n_blocks = last_lag / hf + 1;
    let mut profiles = vec![vec![Complex64::new(0.0, 0.0); hf]; 3];
    let mut counts = vec![0u32; hf];
    let mut block = vec![Complex64::new(0.0, 0.0); fft_len];
    for m in 0..n_blocks {
        let start = m * hf;
        let end = (start + hf + n - 1).min(samples.len());
        block.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        block[..end - start].copy_from_slice(&samples[start..end]);
        fwd.process(&mut block);
        let lags = (last_lag - start + 1).min(hf);
        let spectrum = block.clone();
        for (profile, rspec) in profiles.iter_mut().zip(&ref_spectra) {
            let mut prod: Vec<Complex64> = spectrum
                .iter()
                .zip(rspec)
                .map(|(x, r)| x * r.conj())
                .collect();
            inv.process(&mut prod);
            let scale = 1.0 / fft_len as f64;
            for (acc, v) in profile[..lags].iter_mut().zip(&prod[..lags]) {
                *acc += v * scale;
            }
        }
        for c in counts[..lags].iter_mut() {
            *c += 1;
        }
    }

    // Count-normalized energy keeps the accumulated peak comparable
    // across lags covered by different numbers of blocks.
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize);
    let mut total = 0.0;
    let mut n_bins = 0usize;
    for (root, profile) in profiles.iter().enumerate() {
        for (tau, v) in profile.iter().enumerate() {
            if counts[tau] == 0 {
                continue;
            }
            let score = v.norm_sqr() / counts[tau] as f64;
            total += score;
            n_bins += 1;
            if score > best.0 {
                best = (score, tau, root);
            }
        }
    }
    let (peak, tau_star, n_id_2) = best;
    let pss_metric = peak / (total / n_bins as f64).max(1e-300);
    if pss_metric < params.detection_ratio {
        return None;
    }

    // Accumulate the SSS symbol, one symbol ahead of each detected PSS,
    // separately per half-frame parity: the sequence alternates between
    // its subframe 0 and subframe 5 variants.
    let sss_gap = n + ofdm.cp_len(6);
    let zero_bins = || vec![Complex64::new(0.0, 0.0); SYNC_USED_SUBCARRIERS];
    let mut parity_bins = [zero_bins(), zero_bins()];
    let mut parity_seen = [false, false];
    for m in 0..n_blocks {
        let pss_at = m * hf + tau_star;
        if pss_at > last_lag || pss_at < sss_gap {
            continue;
        }
        let sss_at = pss_at - sss_gap;
        let bins = central_bins(&ofdm, &samples[sss_at..sss_at + n]);
        for (acc, v) in parity_bins[m % 2].iter_mut().zip(&bins) {
            *acc += v;
        }
        parity_seen[m % 2] = true;
    }
    if !parity_seen[0] && !parity_seen[1] {
        return None;
    }
    let parity_norm = [norm(&parity_bins[0]), norm(&parity_bins[1])];

    // Jointly pick the cell group and which parity carries subframe 0.
    let scale = (SYNC_USED_SUBCARRIERS as f64).sqrt();
    let mut best_sss = (f64::NEG_INFINITY, 0u16, 0usize);
    for n_id_1 in 0..168u16 {
        let cell = 3 * n_id_1 + n_id_2 as u16;
        let seqs = [
            sss_sequence(cell, 0).expect("cell in range"),
            sss_sequence(cell, 5).expect("cell in range"),
        ];
        for sf0_parity in 0..2usize {
            let mut score = 0.0;
            let mut weight = 0.0;
            for p in 0..2usize {
                if !parity_seen[p] {
                    continue;
                }
                let seq = &seqs[(p + sf0_parity) % 2];
                let dot: Complex64 = parity_bins[p]
                    .iter()
                    .zip(seq.iter())
                    .map(|(x, &s)| x * s)
                    .sum();
                score += dot.norm();
                weight += parity_norm[p] * scale;
            }
            let score = score / weight.max(1e-300);
            if score > best_sss.0 {
                best_sss = (score, cell, sf0_parity);
            }
        }
    }
    let (sss_metric, cell_id, sf0_parity) = best_sss;
    if sss_metric < params.sss_threshold {
        return None;
    }

    let frame_len = 2 * hf;
    let start = (sf0_parity as isize * hf as isize + tau_star as isize - body as isize)
        .rem_euclid(frame_len as isize);
    Some(Acquisition {
        cell_id,
        n_id_2: n_id_2 as u8,
        frame_offset: start as usize,
        pss_metric,
        sss_metric,
    })
}
