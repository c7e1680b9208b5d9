//! Downlink transmitter: payload generation, channel coding and
//! resource-grid assembly with per-channel power offsets.

use num_complex::Complex64;
use rand::Rng;

use crate::cell::{
    build_channel_mask, pdcch_regs, pss_res, sss_res, CellConfig, Channel, ChannelMask, Reg,
    SUBFRAMES_PER_FRAME, SYMBOLS_PER_SLOT,
};
use crate::coding::{cfi_codeword, encode_block};
use crate::error::Result;
use crate::ofdm::ResourceGrid;
use crate::sequences::{
    crs_values, pbch_scrambling, pcfich_scrambling, pdcch_scrambling, pss_sequence, qpsk,
    sss_sequence,
};

/// Master-information payload bits carried by the broadcast channel.
pub const MIB_BITS: usize = 24;
/// Control-message payload bits (before the CRC) of the downlink grant.
pub const DCI_PAYLOAD_BITS: usize = 28;
/// Coded broadcast bits per 4-frame transmission interval.
pub const PBCH_TTI_BITS: usize = 1920;
/// Coded broadcast bits mapped in one frame.
pub const PBCH_QUARTER_BITS: usize = PBCH_TTI_BITS / 4;
/// Coded control-message bits: one control-channel element of nine REGs.
pub const DCI_CODED_BITS: usize = 72;
/// REGs occupied by the coded control message.
pub const DCI_REGS: usize = DCI_CODED_BITS / 8;

/// Per-channel transmit power offsets in dB relative to the shared data
/// channel. These same offsets are the rho terms used to normalize
/// jamming power to the target channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    pub crs_db: f64,
    pub pss_sss_db: f64,
    pub pbch_db: f64,
    pub pcfich_db: f64,
    pub pdcch_db: f64,
    pub pdsch_db: f64,
}

impl Default for PowerProfile {
    fn default() -> Self {
        Self {
            crs_db: -10.0,
            pss_sss_db: -5.0,
            pbch_db: -2.0,
            pcfich_db: -8.0,
            pdcch_db: -5.0,
            pdsch_db: 0.0,
        }
    }
}

impl PowerProfile {
    /// Power offset of a channel relative to the data channel. The
    /// full-band profile has no single channel and sits at 0 dB.
    pub fn offset_db(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Crs => self.crs_db,
            Channel::PssSss => self.pss_sss_db,
            Channel::Pbch => self.pbch_db,
            Channel::Pcfich => self.pcfich_db,
            Channel::Pdcch => self.pdcch_db,
            Channel::Pdsch => self.pdsch_db,
            Channel::Barrage => 0.0,
        }
    }

    /// Linear amplitude scale for one channel.
    pub fn amplitude(&self, channel: Channel) -> f64 {
        10f64.powf(self.offset_db(channel) / 20.0)
    }
}

/// Information content of one transmitted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePayload {
    pub mib: Vec<u8>,
    pub dci: Vec<u8>,
    pub rnti: u16,
    /// System frame number; selects the broadcast-channel quarter.
    pub sfn: u32,
}

impl FramePayload {
    pub fn random(rng: &mut impl Rng) -> FramePayload {
        FramePayload {
            mib: random_bits(rng, MIB_BITS),
            dci: random_bits(rng, DCI_PAYLOAD_BITS),
            rnti: rng.gen_range(0x0001..=0xFFF3),
            sfn: 0,
        }
    }
}

fn random_bits(rng: &mut impl Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.gen_range(0..2u8)).collect()
}

fn random_qpsk(rng: &mut impl Rng) -> Complex64 {
    qpsk(rng.gen_range(0..2u8), rng.gen_range(0..2u8))
}

fn bits_to_qpsk(bits: &[u8]) -> Vec<Complex64> {
    bits.chunks(2).map(|p| qpsk(p[0], p[1])).collect()
}

/// Precomputed per-cell material: channel masks, sequences, scrambling
/// streams and control-region geometry.
pub struct CellTables {
    pub config: CellConfig,
    masks: Vec<(Channel, ChannelMask)>,
    pub pss: Vec<Complex64>,
    /// SSS values for the subframe-0 and subframe-5 occasions.
    pub sss: [Vec<f64>; 2],
    /// Reference symbols indexed by slot and pilot symbol within slot.
    crs_vals: Vec<Vec<Complex64>>,
    pub pbch_scr: Vec<u8>,
    pcfich_scr: Vec<Vec<u8>>,
    pdcch_scr: Vec<Vec<u8>>,
    pub pcfich_regs: Vec<Reg>,
    pub pdcch_regs: Vec<Reg>,
}

impl CellTables {
    pub fn new(config: CellConfig) -> Result<CellTables> {
        let channels = [
            Channel::Crs,
            Channel::PssSss,
            Channel::Pbch,
            Channel::Pcfich,
            Channel::Pdcch,
            Channel::Pdsch,
            Channel::Barrage,
        ];
        let mut masks = Vec::new();
        for ch in channels {
            masks.push((ch, build_channel_mask(&config, ch)?));
        }
        let n_prb = config.n_prb();
        let mut crs_vals = Vec::with_capacity(40);
        for ns in 0..20 {
            for l in [0usize, 4] {
                crs_vals.push(crs_values(config.cell_id, ns, l, n_prb));
            }
        }
        let pcfich_scr = (0..SUBFRAMES_PER_FRAME)
            .map(|sf| pcfich_scrambling(config.cell_id, sf))
            .collect();
        let pdcch_scr = (0..SUBFRAMES_PER_FRAME)
            .map(|sf| pdcch_scrambling(config.cell_id, sf, DCI_CODED_BITS))
            .collect();
        Ok(CellTables {
            pss: pss_sequence((config.cell_id % 3) as u8)?,
            sss: [
                sss_sequence(config.cell_id, 0)?,
                sss_sequence(config.cell_id, 5)?,
            ],
            crs_vals,
            pbch_scr: pbch_scrambling(config.cell_id),
            pcfich_scr,
            pdcch_scr,
            pcfich_regs: crate::cell::pcfich_regs(&config),
            pdcch_regs: pdcch_regs(&config),
            masks,
            config,
        })
    }

    pub fn mask(&self, channel: Channel) -> &ChannelMask {
        &self
            .masks
            .iter()
            .find(|(c, _)| *c == channel)
            .expect("all channels tabulated")
            .1
    }

    /// Reference-symbol values of one CRS-bearing symbol, in ascending
    /// subcarrier order.
    pub fn crs_symbol(&self, subframe: usize, symbol: usize) -> &[Complex64] {
        let ns = 2 * subframe + symbol / SYMBOLS_PER_SLOT;
        let idx = 2 * ns + usize::from(symbol % SYMBOLS_PER_SLOT == 4);
        &self.crs_vals[idx]
    }

    pub fn pcfich_scrambling(&self, subframe: usize) -> &[u8] {
        &self.pcfich_scr[subframe]
    }

    pub fn pdcch_scrambling(&self, subframe: usize) -> &[u8] {
        &self.pdcch_scr[subframe]
    }

    /// Coded, scrambled broadcast bits of the quarter sent in `sfn`.
    pub fn pbch_quarter(&self, mib: &[u8], sfn: u32) -> Vec<u8> {
        let coded = encode_block(mib, 0, PBCH_TTI_BITS);
        let q = (sfn % 4) as usize * PBCH_QUARTER_BITS;
        coded
            .iter()
            .zip(self.pbch_scr.iter())
            .skip(q)
            .take(PBCH_QUARTER_BITS)
            .map(|(&c, &s)| c ^ s)
            .collect()
    }

    /// Coded, scrambled control-message bits for one subframe.
    pub fn dci_bits(&self, dci: &[u8], rnti: u16, subframe: usize) -> Vec<u8> {
        encode_block(dci, rnti, DCI_CODED_BITS)
            .iter()
            .zip(self.pdcch_scr[subframe].iter())
            .map(|(&c, &s)| c ^ s)
            .collect()
    }
}

/// Builds the resource grid of one frame. The random source fills the
/// control-region padding first and the data region second, so a fixed
/// seed reproduces the frame exactly.
pub fn build_frame(
    tables: &CellTables,
    payload: &FramePayload,
    profile: &PowerProfile,
    rng: &mut impl Rng,
) -> Result<ResourceGrid> {
    let cfg = &tables.config;
    let mut grid = ResourceGrid::new(cfg.n_subcarriers(), crate::cell::SYMBOLS_PER_FRAME);
    let at = |sf: usize, sym: usize| sf * crate::cell::SYMBOLS_PER_SUBFRAME + sym;

    // Reference symbols.
    let a_crs = profile.amplitude(Channel::Crs);
    for sf in 0..SUBFRAMES_PER_FRAME {
        for &sym in &crate::cell::CRS_SYMBOLS {
            let vals = tables.crs_symbol(sf, sym);
            let coords: Vec<_> = tables
                .mask(Channel::Crs)
                .subframe_coords(sf)
                .filter(|c| c.symbol as usize == sym)
                .cloned()
                .collect();
            debug_assert_eq!(coords.len(), vals.len());
            for (c, v) in coords.iter().zip(vals) {
                grid.set(c.frame_symbol(), c.sc(), v * a_crs);
            }
        }
    }

    // Synchronization signals, both occasions.
    let a_sync = profile.amplitude(Channel::PssSss);
    for (occ, &sf) in crate::cell::SYNC_SUBFRAMES.iter().enumerate() {
        for (c, v) in pss_res(cfg, sf).iter().zip(tables.pss.iter()) {
            grid.set(c.frame_symbol(), c.sc(), v * a_sync);
        }
        for (c, &v) in sss_res(cfg, sf).iter().zip(tables.sss[occ].iter()) {
            grid.set(c.frame_symbol(), c.sc(), Complex64::new(v * a_sync, 0.0));
        }
    }

    // Broadcast channel: one scrambled quarter as QPSK.
    let a_pbch = profile.amplitude(Channel::Pbch);
    let quarter = bits_to_qpsk(&tables.pbch_quarter(&payload.mib, payload.sfn));
    let pbch_mask = tables.mask(Channel::Pbch);
    debug_assert_eq!(quarter.len(), pbch_mask.len());
    for (c, v) in pbch_mask.subframe_coords(0).zip(quarter) {
        grid.set(c.frame_symbol(), c.sc(), v * a_pbch);
    }

    // Control region, subframe by subframe.
    let a_pcfich = profile.amplitude(Channel::Pcfich);
    let a_pdcch = profile.amplitude(Channel::Pdcch);
    for sf in 0..SUBFRAMES_PER_FRAME {
        let cw = cfi_codeword(cfg.cfi)?;
        let scrambled: Vec<u8> = cw
            .iter()
            .zip(tables.pcfich_scrambling(sf))
            .map(|(&c, &s)| c ^ s)
            .collect();
        let syms = bits_to_qpsk(&scrambled);
        for (i, reg) in tables.pcfich_regs.iter().enumerate() {
            for (j, &k) in reg.subcarriers.iter().enumerate() {
                grid.set(at(sf, reg.symbol), k, syms[4 * i + j] * a_pcfich);
            }
        }

        let dci_syms = bits_to_qpsk(&tables.dci_bits(&payload.dci, payload.rnti, sf));
        for (i, reg) in tables.pdcch_regs.iter().enumerate() {
            for (j, &k) in reg.subcarriers.iter().enumerate() {
                let v = if i < DCI_REGS {
                    dci_syms[4 * i + j]
                } else {
                    random_qpsk(rng)
                };
                grid.set(at(sf, reg.symbol), k, v * a_pdcch);
            }
        }
    }

    // Shared data region (includes the hybrid-ARQ filler REs).
    let a_pdsch = profile.amplitude(Channel::Pdsch);
    for c in &tables.mask(Channel::Pdsch).coords {
        grid.set(c.frame_symbol(), c.sc(), random_qpsk(rng) * a_pdsch);
    }

    Ok(grid)
}
