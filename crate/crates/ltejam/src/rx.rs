//! Software UE receiver: synchronization verification, reference-symbol
//! channel estimation, zero-forcing equalization and control-channel
//! decoding, reduced to the per-trial error flags.

use num_complex::Complex64;

use crate::cell::{Channel, SYMBOLS_PER_SUBFRAME};
use crate::coding::{cfi_decode, decode_block};
use crate::error::{Result, SimError};
use crate::jamming::Strategy;
use crate::ofdm::{Ofdm, ResourceGrid};
use crate::sync::{track_sync, SyncParams};
use crate::tx::{CellTables, FramePayload, PowerProfile, DCI_PAYLOAD_BITS, DCI_REGS, MIB_BITS,
    PBCH_QUARTER_BITS};

/// Per-trial decoding outcome across the monitored channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorFlags {
    pub sync_error: bool,
    pub pbch_error: bool,
    pub pcfich_error: bool,
    pub pdcch_error: bool,
    pub composite_error: bool,
}

impl ErrorFlags {
    pub fn compose(sync: bool, pbch: bool, pcfich: bool, pdcch: bool) -> ErrorFlags {
        ErrorFlags {
            sync_error: sync,
            pbch_error: pbch,
            pcfich_error: pcfich,
            pdcch_error: pdcch,
            composite_error: sync || pbch || pcfich || pdcch,
        }
    }
}

/// Channel estimate from the reference symbols: least-squares over every
/// pilot of each reference-bearing subcarrier (the channel model is
/// time-invariant within a capture), then linear interpolation across
/// frequency. Jamming the pilots therefore corrupts the estimate that
/// every downstream decode depends on.
pub fn estimate_channel(
    rx: &ResourceGrid,
    tables: &CellTables,
    profile: &PowerProfile,
) -> ResourceGrid {
    let cfg = &tables.config;
    let n_sc = cfg.n_subcarriers();
    let n_symbols = rx.n_symbols();
    let n_subframes = n_symbols / SYMBOLS_PER_SUBFRAME;
    let k0 = cfg.cell_id as usize % 6;
    let a = profile.amplitude(Channel::Crs);

    // Per-subcarrier least-squares estimate where pilots exist.
    let mut col = vec![Complex64::new(0.0, 0.0); n_sc];
    let mut has_pilot = vec![false; n_sc];
    for k in 0..n_sc {
        let family = if k % 6 == k0 {
            Some([0usize, 7])
        } else if k % 6 == (k0 + 3) % 6 {
            Some([4usize, 11])
        } else {
            None
        };
        let Some(symbols) = family else { continue };
        let shift = k % 6;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut n = 0usize;
        for sf in 0..n_subframes {
            for &sym in &symbols {
                let refs = tables.crs_symbol(sf, sym);
                let v = refs[(k - shift) / 6];
                let y = rx.at(sf * SYMBOLS_PER_SUBFRAME + sym, k);
                acc += y / (v * a);
                n += 1;
            }
        }
        col[k] = acc / n as f64;
        has_pilot[k] = true;
    }

    // Linear interpolation across frequency, clamped at the band edges.
    let pilots: Vec<usize> = (0..n_sc).filter(|&k| has_pilot[k]).collect();
    let mut h_col = vec![Complex64::new(0.0, 0.0); n_sc];
    for k in 0..n_sc {
        if has_pilot[k] {
            h_col[k] = col[k];
            continue;
        }
        let right = pilots.partition_point(|&p| p < k);
        h_col[k] = if right == 0 {
            col[pilots[0]]
        } else if right == pilots.len() {
            col[pilots[pilots.len() - 1]]
        } else {
            let (lo, hi) = (pilots[right - 1], pilots[right]);
            let w = (k - lo) as f64 / (hi - lo) as f64;
            col[lo] * (1.0 - w) + col[hi] * w
        };
    }

    let mut h = ResourceGrid::new(n_sc, n_symbols);
    for sym in 0..n_symbols {
        h.symbol_mut(sym).copy_from_slice(&h_col);
    }
    h
}

/// Zero-forcing equalization with a guard against vanishing estimates.
pub fn equalize(rx: &ResourceGrid, h: &ResourceGrid) -> ResourceGrid {
    let mut out = rx.clone();
    for (y, g) in out.data.iter_mut().zip(h.data.iter()) {
        let denom = if g.norm() < 1e-9 {
            Complex64::new(1e-9, 0.0)
        } else {
            *g
        };
        *y /= denom;
    }
    out
}

/// Largest magnitude an individual soft bit may take.
const LLR_CLIP: f64 = 4.0;

/// Soft bits of QPSK resource elements in mapping order: the in-phase
/// bit then the quadrature bit, normalized by the channel amplitude and
/// clipped. Positive favors bit 0.
fn qpsk_llrs<'a>(
    eq: &ResourceGrid,
    coords: impl Iterator<Item = (usize, usize)>,
    amplitude: f64,
) -> Vec<f64> {
    let scale = 2f64.sqrt() / amplitude;
    let mut llrs = Vec::new();
    for (sym, k) in coords {
        let v = eq.at(sym, k);
        llrs.push((v.re * scale).clamp(-LLR_CLIP, LLR_CLIP));
        llrs.push((v.im * scale).clamp(-LLR_CLIP, LLR_CLIP));
    }
    llrs
}

fn descramble(llrs: &mut [f64], bits: &[u8]) {
    for (l, &b) in llrs.iter_mut().zip(bits) {
        if b == 1 {
            *l = -*l;
        }
    }
}

/// Runs the receiver over a frame-aligned capture of one subframe or one
/// frame and evaluates every error flag against the transmitted truth.
/// All failures come back as flags; a lost sync forces every decode flag.
pub fn receive_frame(
    samples: &[Complex64],
    tables: &CellTables,
    profile: &PowerProfile,
    truth: &FramePayload,
    params: &SyncParams,
) -> Result<ErrorFlags> {
    let cfg = &tables.config;
    let ofdm = Ofdm::new(cfg.bandwidth);
    let per_subframe = ofdm.subframe_samples();
    if samples.len() % per_subframe != 0 {
        return Err(SimError::Framing(format!(
            "capture of {} samples is not whole subframes",
            samples.len()
        )));
    }
    let n_subframes = samples.len() / per_subframe;
    if n_subframes == 0 {
        return Err(SimError::Framing("empty capture".into()));
    }

    let nominal = profile.amplitude(Channel::PssSss);
    let report = track_sync(&ofdm, tables, samples, nominal, params);
    if report.lost {
        return Ok(ErrorFlags::compose(true, true, true, true));
    }

    let rx = ofdm.demodulate(samples, n_subframes * SYMBOLS_PER_SUBFRAME);
    let h = estimate_channel(&rx, tables, profile);
    let eq = equalize(&rx, &h);

    // Control format indicator of subframe 0.
    let mut cfi_llrs = qpsk_llrs(
        &eq,
        tables
            .pcfich_regs
            .iter()
            .flat_map(|r| r.subcarriers.iter().map(move |&k| (r.symbol, k))),
        profile.amplitude(Channel::Pcfich),
    );
    descramble(&mut cfi_llrs, tables.pcfich_scrambling(0));
    let cfi_arr: [f64; 32] = cfi_llrs.as_slice().try_into().expect("32 soft bits");
    let pcfich_error = cfi_decode(&cfi_arr) != cfg.cfi;

    // Downlink grant in the first control-channel element of subframe 0.
    let mut dci_llrs = qpsk_llrs(
        &eq,
        tables.pdcch_regs[..DCI_REGS]
            .iter()
            .flat_map(|r| r.subcarriers.iter().map(move |&k| (r.symbol, k))),
        profile.amplitude(Channel::Pdcch),
    );
    descramble(&mut dci_llrs, tables.pdcch_scrambling(0));
    let pdcch_error = match decode_block(&dci_llrs, DCI_PAYLOAD_BITS, truth.rnti) {
        Some(bits) => bits != truth.dci,
        None => true,
    };

    // Broadcast channel: blind search over the four quarter alignments.
    let pbch_llrs = qpsk_llrs(
        &eq,
        tables
            .mask(Channel::Pbch)
            .subframe_coords(0)
            .map(|c| (c.frame_symbol(), c.sc())),
        profile.amplitude(Channel::Pbch),
    );
    let mut pbch_error = true;
    for quarter in 0..4 {
        let mut llrs = pbch_llrs.clone();
        let scr = &tables.pbch_scr[quarter * PBCH_QUARTER_BITS..(quarter + 1) * PBCH_QUARTER_BITS];
        descramble(&mut llrs, scr);
        if let Some(mib) = decode_block(&llrs, MIB_BITS, 0) {
            if mib == truth.mib {
                pbch_error = false;
                break;
            }
        }
    }

    Ok(ErrorFlags::compose(false, pbch_error, pcfich_error, pdcch_error))
}

/// Table of which flag counts as the trial error for each strategy.
pub fn evaluate_strategy_flag(flags: &ErrorFlags, strategy: Strategy) -> bool {
    match strategy {
        Strategy::Barrage
        | Strategy::Crs
        | Strategy::CrsSubcarriers
        | Strategy::CustomMask => flags.composite_error,
        Strategy::PssSss => flags.sync_error,
        Strategy::Pdcch => flags.pdcch_error,
        Strategy::Pbch => flags.pbch_error,
        Strategy::Pcfich => flags.pcfich_error,
    }
}
