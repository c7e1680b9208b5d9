//! Deterministic physical-layer sequences: synchronization signals, the
//! length-31 Gold generator and the cell reference symbols derived from it.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Result, SimError};

/// Zadoff-Chu root indices used by the primary synchronization signal.
const PSS_ROOTS: [u32; 3] = [25, 29, 34];

/// Full length-63 Zadoff-Chu sequence for a given root.
pub fn zadoff_chu_63(root: u32) -> Vec<Complex64> {
    (0..63)
        .map(|n| {
            let phase = -PI * root as f64 * (n * (n + 1)) as f64 / 63.0;
            Complex64::from_polar(1.0, phase)
        })
        .collect()
}

/// 62-element PSS sequence for sector index `n_id_2`, with the middle
/// Zadoff-Chu element punctured (it would land on the unused DC bin).
pub fn pss_sequence(n_id_2: u8) -> Result<Vec<Complex64>> {
    if n_id_2 > 2 {
        return Err(SimError::InvalidConfiguration(format!(
            "n_id_2 {n_id_2} outside 0..=2"
        )));
    }
    let u = PSS_ROOTS[n_id_2 as usize] as f64;
    let mut d = Vec::with_capacity(62);
    for n in 0..31u64 {
        let phase = -PI * u * (n * (n + 1)) as f64 / 63.0;
        d.push(Complex64::from_polar(1.0, phase));
    }
    for n in 31..62u64 {
        let phase = -PI * u * ((n + 1) * (n + 2)) as f64 / 63.0;
        d.push(Complex64::from_polar(1.0, phase));
    }
    Ok(d)
}

/// Length-31 m-sequence with recurrence x(i+5) = x(i+taps0) + x(i+taps1) + ...
fn m_sequence(taps: &[usize]) -> [i8; 31] {
    let mut x = [0u8; 31];
    x[4] = 1;
    for i in 0..26 {
        let mut v = 0u8;
        for &t in taps {
            v ^= x[i + t];
        }
        x[i + 5] = v;
    }
    let mut s = [0i8; 31];
    for i in 0..31 {
        s[i] = 1 - 2 * x[i] as i8;
    }
    s
}

/// 62-element SSS sequence (+1/-1 values) for the given cell and sync
/// occasion. `subframe` must be 0 or 5; the two occasions swap the m0/m1
/// subsequences so a receiver can resolve frame timing.
pub fn sss_sequence(cell_id: u16, subframe: usize) -> Result<Vec<f64>> {
    if cell_id > 503 {
        return Err(SimError::InvalidConfiguration(format!(
            "cell_id {cell_id} outside 0..=503"
        )));
    }
    if subframe != 0 && subframe != 5 {
        return Err(SimError::InvalidConfiguration(format!(
            "SSS subframe {subframe} must be 0 or 5"
        )));
    }
    let n_id_1 = (cell_id / 3) as u64;
    let n_id_2 = (cell_id % 3) as usize;

    let q_prime = n_id_1 / 30;
    let q = (n_id_1 + q_prime * (q_prime + 1) / 2) / 30;
    let m_prime = n_id_1 + q * (q + 1) / 2;
    let m0 = (m_prime % 31) as usize;
    let m1 = ((m0 as u64 + m_prime / 31 + 1) % 31) as usize;

    let s_tilde = m_sequence(&[0, 2]);
    let c_tilde = m_sequence(&[0, 3]);
    let z_tilde = m_sequence(&[0, 1, 2, 4]);

    let s = |m: usize, n: usize| s_tilde[(n + m) % 31] as f64;
    let c0 = |n: usize| c_tilde[(n + n_id_2) % 31] as f64;
    let c1 = |n: usize| c_tilde[(n + n_id_2 + 3) % 31] as f64;
    let z1 = |m: usize, n: usize| z_tilde[(n + (m % 8)) % 31] as f64;

    let mut d = vec![0.0; 62];
    for n in 0..31 {
        if subframe == 0 {
            d[2 * n] = s(m0, n) * c0(n);
            d[2 * n + 1] = s(m1, n) * c1(n) * z1(m0, n);
        } else {
            d[2 * n] = s(m1, n) * c0(n);
            d[2 * n + 1] = s(m0, n) * c1(n) * z1(m1, n);
        }
    }
    Ok(d)
}

/// Length-31 Gold sequence c(n) for n in 0..len, discarding the first
/// 1600 outputs as the standard prescribes.
pub fn gold_sequence(c_init: u32, len: usize) -> Vec<u8> {
    const NC: usize = 1600;
    let total = NC + len;
    let mut x1 = vec![0u8; total + 31];
    let mut x2 = vec![0u8; total + 31];
    x1[0] = 1;
    for i in 0..31 {
        x2[i] = ((c_init >> i) & 1) as u8;
    }
    for n in 0..total {
        x1[n + 31] = x1[n + 3] ^ x1[n];
        x2[n + 31] = x2[n + 3] ^ x2[n + 2] ^ x2[n + 1] ^ x2[n];
    }
    (0..len).map(|n| x1[NC + n] ^ x2[NC + n]).collect()
}

/// Maps a pair of scrambling bits to one QPSK symbol of unit power.
pub fn qpsk(b0: u8, b1: u8) -> Complex64 {
    let re = if b0 == 0 { 1.0 } else { -1.0 };
    let im = if b1 == 0 { 1.0 } else { -1.0 };
    Complex64::new(re, im) / 2f64.sqrt()
}

/// Reference-symbol values for one CRS-bearing symbol, in increasing
/// subcarrier order (2 per PRB). `ns` is the slot index in the frame,
/// `l` the symbol index in the slot (0 or 4).
pub fn crs_values(cell_id: u16, ns: usize, l: usize, n_prb: usize) -> Vec<Complex64> {
    const MAX_PRB: usize = 110;
    let c_init = (1 << 10) * (7 * (ns as u32 + 1) + l as u32 + 1) * (2 * cell_id as u32 + 1)
        + 2 * cell_id as u32
        + 1;
    let c = gold_sequence(c_init, 4 * MAX_PRB);
    let offset = MAX_PRB - n_prb;
    (0..2 * n_prb)
        .map(|m| {
            let mp = m + offset;
            qpsk(c[2 * mp], c[2 * mp + 1])
        })
        .collect()
}

/// Scrambling sequence for the broadcast channel TTI (1920 coded bits,
/// reinitialized every 4 frames).
pub fn pbch_scrambling(cell_id: u16) -> Vec<u8> {
    gold_sequence(cell_id as u32, 1920)
}

/// Scrambling for the 32 control-format-indicator bits of one subframe.
pub fn pcfich_scrambling(cell_id: u16, subframe: usize) -> Vec<u8> {
    let c_init =
        (subframe as u32 + 1) * (2 * cell_id as u32 + 1) * (1 << 9) + cell_id as u32;
    gold_sequence(c_init, 32)
}

/// Scrambling for the control-channel bits of one subframe.
pub fn pdcch_scrambling(cell_id: u16, subframe: usize, len: usize) -> Vec<u8> {
    let c_init = (subframe as u32) * (1 << 9) + cell_id as u32;
    gold_sequence(c_init, len)
}
