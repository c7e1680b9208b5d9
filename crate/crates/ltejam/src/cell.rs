//! Cell-level configuration and resource-grid geometry.
//!
//! Models a Release 8 FDD downlink cell with normal cyclic prefix and a
//! single antenna port, and knows where every physical signal and channel
//! lives inside one 10 ms radio frame.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

pub const SUBCARRIERS_PER_RB: usize = 12;
pub const SYMBOLS_PER_SLOT: usize = 7;
pub const SLOTS_PER_SUBFRAME: usize = 2;
pub const SUBFRAMES_PER_FRAME: usize = 10;
pub const SYMBOLS_PER_SUBFRAME: usize = SYMBOLS_PER_SLOT * SLOTS_PER_SUBFRAME;
pub const SYMBOLS_PER_FRAME: usize = SYMBOLS_PER_SUBFRAME * SUBFRAMES_PER_FRAME;

/// Symbol indices (within a subframe) that carry cell reference symbols.
pub const CRS_SYMBOLS: [usize; 4] = [0, 4, 7, 11];
/// Subframes carrying the synchronization signals in FDD.
pub const SYNC_SUBFRAMES: [usize; 2] = [0, 5];
/// Subframe symbol carrying the primary synchronization signal.
pub const PSS_SYMBOL: usize = 6;
/// Subframe symbol carrying the secondary synchronization signal.
pub const SSS_SYMBOL: usize = 5;
/// Subframe symbols of the broadcast channel block (subframe 0 only).
pub const PBCH_SYMBOLS: [usize; 4] = [7, 8, 9, 10];
/// Subcarriers occupied by PSS/SSS inside the central 72.
pub const SYNC_USED_SUBCARRIERS: usize = 62;
/// Width of the central band used by sync and broadcast signals.
pub const CENTRAL_SUBCARRIERS: usize = 72;

/// Downlink channel bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bandwidth {
    Mhz1_4,
    Mhz3,
    Mhz5,
    Mhz10,
    Mhz15,
    Mhz20,
}

impl Bandwidth {
    pub const ALL: [Bandwidth; 6] = [
        Bandwidth::Mhz1_4,
        Bandwidth::Mhz3,
        Bandwidth::Mhz5,
        Bandwidth::Mhz10,
        Bandwidth::Mhz15,
        Bandwidth::Mhz20,
    ];

    pub fn mhz(self) -> f64 {
        match self {
            Bandwidth::Mhz1_4 => 1.4,
            Bandwidth::Mhz3 => 3.0,
            Bandwidth::Mhz5 => 5.0,
            Bandwidth::Mhz10 => 10.0,
            Bandwidth::Mhz15 => 15.0,
            Bandwidth::Mhz20 => 20.0,
        }
    }

    pub fn n_prb(self) -> usize {
        match self {
            Bandwidth::Mhz1_4 => 6,
            Bandwidth::Mhz3 => 15,
            Bandwidth::Mhz5 => 25,
            Bandwidth::Mhz10 => 50,
            Bandwidth::Mhz15 => 75,
            Bandwidth::Mhz20 => 100,
        }
    }

    pub fn n_subcarriers(self) -> usize {
        self.n_prb() * SUBCARRIERS_PER_RB
    }

    /// FFT length used for OFDM modulation at this bandwidth.
    pub fn fft_size(self) -> usize {
        match self {
            Bandwidth::Mhz1_4 => 128,
            Bandwidth::Mhz3 => 256,
            Bandwidth::Mhz5 => 512,
            Bandwidth::Mhz10 => 1024,
            Bandwidth::Mhz15 => 1536,
            Bandwidth::Mhz20 => 2048,
        }
    }

    /// Baseband sample rate implied by the FFT size and 15 kHz spacing.
    pub fn sample_rate_hz(self) -> f64 {
        self.fft_size() as f64 * 15_000.0
    }

    pub fn from_mhz(mhz: f64) -> Result<Bandwidth> {
        for bw in Bandwidth::ALL {
            if (bw.mhz() - mhz).abs() < 1e-9 {
                return Ok(bw);
            }
        }
        Err(SimError::InvalidConfiguration(format!(
            "unsupported bandwidth {mhz} MHz (valid: 1.4, 3, 5, 10, 15, 20)"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CyclicPrefix {
    Normal,
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Duplex {
    Fdd,
    Tdd,
}

/// Static downlink cell configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellConfig {
    pub bandwidth: Bandwidth,
    /// Physical cell identity, 0..=503.
    pub cell_id: u16,
    /// Control format indicator value carried on PCFICH.
    pub cfi: u8,
    pub cp: CyclicPrefix,
    pub duplex: Duplex,
    pub n_antenna_ports: u8,
}

impl CellConfig {
    /// Builds a validated configuration. Only normal CP, FDD and one
    /// antenna port are supported.
    pub fn new(bandwidth: Bandwidth, cell_id: u16, cfi: u8) -> Result<CellConfig> {
        if cell_id > 503 {
            return Err(SimError::InvalidConfiguration(format!(
                "cell_id {cell_id} outside 0..=503"
            )));
        }
        if !(1..=4).contains(&cfi) {
            return Err(SimError::InvalidConfiguration(format!(
                "cfi {cfi} outside 1..=4"
            )));
        }
        Ok(CellConfig {
            bandwidth,
            cell_id,
            cfi,
            cp: CyclicPrefix::Normal,
            duplex: Duplex::Fdd,
            n_antenna_ports: 1,
        })
    }

    pub fn n_prb(&self) -> usize {
        self.bandwidth.n_prb()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.bandwidth.n_subcarriers()
    }

    /// Number of OFDM symbols spanned by the control region.
    ///
    /// Narrow cells (<= 10 PRB) span one symbol more than the CFI value.
    pub fn control_span(&self) -> usize {
        let span = if self.n_prb() <= 10 {
            self.cfi as usize + 1
        } else {
            self.cfi as usize
        };
        span.min(4)
    }

    /// First subcarrier of the central 72-subcarrier band.
    pub fn central_offset(&self) -> usize {
        (self.n_subcarriers() - CENTRAL_SUBCARRIERS) / 2
    }
}

/// Returns (subcarriers, symbols per frame, resource elements per frame).
pub fn grid_dimensions(cfg: &CellConfig) -> (usize, usize, usize) {
    let n_sc = cfg.n_subcarriers();
    (n_sc, SYMBOLS_PER_FRAME, n_sc * SYMBOLS_PER_FRAME)
}

/// Frequency shift of the first reference-symbol subcarrier: cell_id mod 6.
pub fn crs_subcarrier_offset(cell_id: u16) -> Result<usize> {
    if cell_id > 503 {
        return Err(SimError::InvalidConfiguration(format!(
            "cell_id {cell_id} outside 0..=503"
        )));
    }
    Ok(cell_id as usize % 6)
}

/// One resource element addressed inside a radio frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReCoordinate {
    pub subframe: u8,
    pub symbol: u8,
    pub subcarrier: u16,
}

impl ReCoordinate {
    pub fn new(subframe: usize, symbol: usize, subcarrier: usize) -> ReCoordinate {
        ReCoordinate {
            subframe: subframe as u8,
            symbol: symbol as u8,
            subcarrier: subcarrier as u16,
        }
    }

    /// Symbol index within the frame (0..140).
    pub fn frame_symbol(&self) -> usize {
        self.subframe as usize * SYMBOLS_PER_SUBFRAME + self.symbol as usize
    }

    pub fn sc(&self) -> usize {
        self.subcarrier as usize
    }
}

/// Downlink signal or channel selectable as a jamming target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    PssSss,
    Pbch,
    Pdcch,
    Pcfich,
    Crs,
    Pdsch,
    Barrage,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::PssSss => "pss_sss",
            Channel::Pbch => "pbch",
            Channel::Pdcch => "pdcch",
            Channel::Pcfich => "pcfich",
            Channel::Crs => "crs",
            Channel::Pdsch => "pdsch",
            Channel::Barrage => "barrage",
        }
    }
}

/// Interference repetition interval of a channel (smallest unit that
/// contains every occupied RE of the target).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Periodicity {
    Subframe,
    Frame,
}

impl Channel {
    pub fn periodicity(self) -> Periodicity {
        match self {
            Channel::PssSss | Channel::Pbch => Periodicity::Frame,
            _ => Periodicity::Subframe,
        }
    }
}

/// Set of resource elements claimed by one channel over one frame.
#[derive(Debug, Clone)]
pub struct ChannelMask {
    pub channel: Channel,
    pub periodicity: Periodicity,
    pub coords: BTreeSet<ReCoordinate>,
    n_prb: usize,
}

impl ChannelMask {
    /// Wraps an explicit coordinate set, e.g. a custom jamming target.
    pub fn from_coords(
        channel: Channel,
        periodicity: Periodicity,
        coords: BTreeSet<ReCoordinate>,
        n_prb: usize,
    ) -> ChannelMask {
        ChannelMask {
            channel,
            periodicity,
            coords,
            n_prb,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn contains(&self, c: &ReCoordinate) -> bool {
        self.coords.contains(c)
    }

    pub fn n_prb(&self) -> usize {
        self.n_prb
    }

    /// Coordinates restricted to one subframe.
    pub fn subframe_coords(&self, subframe: usize) -> impl Iterator<Item = &ReCoordinate> {
        self.coords
            .iter()
            .filter(move |c| c.subframe as usize == subframe)
    }
}

/// Fraction of the frame grid claimed by `mask`.
pub fn occupancy_fraction(mask: &ChannelMask, cfg: &CellConfig) -> Result<f64> {
    if mask.n_prb != cfg.n_prb() {
        return Err(SimError::InvalidConfiguration(format!(
            "mask built for {} PRB applied to a {} PRB cell",
            mask.n_prb,
            cfg.n_prb()
        )));
    }
    let (_, _, n_re) = grid_dimensions(cfg);
    Ok(mask.len() as f64 / n_re as f64)
}

/// Builds the per-frame RE mask of a channel for the given cell.
pub fn build_channel_mask(cfg: &CellConfig, channel: Channel) -> Result<ChannelMask> {
    let coords = match channel {
        Channel::Crs => crs_res(cfg)?,
        Channel::PssSss => sync_attack_res(cfg),
        Channel::Pbch => pbch_res(cfg)?,
        Channel::Pcfich => pcfich_res(cfg),
        Channel::Pdcch => pdcch_res(cfg),
        Channel::Pdsch => pdsch_res(cfg)?,
        Channel::Barrage => barrage_res(cfg),
    };
    Ok(ChannelMask {
        channel,
        periodicity: channel.periodicity(),
        coords,
        n_prb: cfg.n_prb(),
    })
}

/// Reference-symbol REs for antenna port 0 over one frame.
pub fn crs_res(cfg: &CellConfig) -> Result<BTreeSet<ReCoordinate>> {
    let k0 = crs_subcarrier_offset(cfg.cell_id)?;
    let n_sc = cfg.n_subcarriers();
    let mut set = BTreeSet::new();
    for sf in 0..SUBFRAMES_PER_FRAME {
        for &sym in &CRS_SYMBOLS {
            // l = 0 carries v = 0, l = 4 carries v = 3.
            let shift = if sym % SYMBOLS_PER_SLOT == 0 { k0 } else { (k0 + 3) % 6 };
            let mut k = shift;
            while k < n_sc {
                set.insert(ReCoordinate::new(sf, sym, k));
                k += 6;
            }
        }
    }
    Ok(set)
}

/// PSS REs of one sync occasion (62 used subcarriers, symbol 6).
pub fn pss_res(cfg: &CellConfig, subframe: usize) -> BTreeSet<ReCoordinate> {
    sync_symbol_res(cfg, subframe, PSS_SYMBOL)
}

/// SSS REs of one sync occasion (62 used subcarriers, symbol 5).
pub fn sss_res(cfg: &CellConfig, subframe: usize) -> BTreeSet<ReCoordinate> {
    sync_symbol_res(cfg, subframe, SSS_SYMBOL)
}

fn sync_symbol_res(cfg: &CellConfig, subframe: usize, symbol: usize) -> BTreeSet<ReCoordinate> {
    let first = cfg.central_offset() + 5;
    (0..SYNC_USED_SUBCARRIERS)
        .map(|i| ReCoordinate::new(subframe, symbol, first + i))
        .collect()
}

/// Jamming target for the sync signals: the PSS symbol of both sync
/// occasions. Timing lock rides on the primary sequence at every
/// occasion, so a jammer that wants to break synchronization has to
/// cover subframe 5 as well as subframe 0; the secondary sequence only
/// matters for initial identification and is left alone. The set size
/// matches the nominal per-frame sync footprint of 124 REs.
fn sync_attack_res(cfg: &CellConfig) -> BTreeSet<ReCoordinate> {
    let mut set = pss_res(cfg, 0);
    set.extend(pss_res(cfg, 5));
    set
}

/// Unused guard subcarriers flanking PSS/SSS inside the central 72.
pub fn sync_guard_res(cfg: &CellConfig) -> BTreeSet<ReCoordinate> {
    let c0 = cfg.central_offset();
    let mut set = BTreeSet::new();
    for &sf in &SYNC_SUBFRAMES {
        for sym in [SSS_SYMBOL, PSS_SYMBOL] {
            for g in 0..5 {
                set.insert(ReCoordinate::new(sf, sym, c0 + g));
                set.insert(ReCoordinate::new(sf, sym, c0 + CENTRAL_SUBCARRIERS - 1 - g));
            }
        }
    }
    set
}

/// Broadcast-channel REs: central 72 subcarriers of four symbols in
/// subframe 0, rate-matched around the reference-symbol lattice.
///
/// The mapping skips every subcarrier congruent to the CRS shift mod 3 in
/// the first two symbols, which reserves the reference positions of ports
/// 0 and 1 (symbol 7) and ports 2 and 3 (symbol 8).
pub fn pbch_res(cfg: &CellConfig) -> Result<BTreeSet<ReCoordinate>> {
    let k0 = crs_subcarrier_offset(cfg.cell_id)?;
    let c0 = cfg.central_offset();
    let mut set = BTreeSet::new();
    for &sym in &PBCH_SYMBOLS {
        for i in 0..CENTRAL_SUBCARRIERS {
            let k = c0 + i;
            let reserved = sym <= 8 && k % 3 == k0 % 3;
            if !reserved {
                set.insert(ReCoordinate::new(0, sym, k));
            }
        }
    }
    Ok(set)
}

/// Reserved-but-silent REs inside the broadcast block (reference
/// positions of antenna ports that this cell does not transmit).
pub fn pbch_ghost_res(cfg: &CellConfig) -> BTreeSet<ReCoordinate> {
    let k0 = cfg.cell_id as usize % 6;
    let c0 = cfg.central_offset();
    let mut set = BTreeSet::new();
    for sym in [7usize, 8] {
        for i in 0..CENTRAL_SUBCARRIERS {
            let k = c0 + i;
            if k % 3 != k0 % 3 {
                continue;
            }
            // Symbol 7 carries real port-0 reference symbols at k0 mod 6.
            let is_live_crs = sym == 7 && k % 6 == k0;
            if !is_live_crs {
                set.insert(ReCoordinate::new(0, sym, k));
            }
        }
    }
    set
}

/// A resource-element group: four contiguous non-reserved REs of one
/// symbol, used for control-channel mapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reg {
    pub symbol: usize,
    /// Subcarriers of the four REs.
    pub subcarriers: [usize; 4],
}

/// REGs available in symbol 0 of a subframe. Each half-PRB contributes
/// one REG of the four subcarriers not reserved for reference symbols
/// (ports 0 and 1 positions, i.e. k congruent to the CRS shift mod 3).
pub fn symbol0_regs(cfg: &CellConfig) -> Vec<Reg> {
    let k0 = cfg.cell_id as usize % 6;
    let n_sc = cfg.n_subcarriers();
    let mut regs = Vec::new();
    let mut start = 0;
    while start < n_sc {
        let mut sc = [0usize; 4];
        let mut n = 0;
        for k in start..start + 6 {
            if k % 3 != k0 % 3 {
                sc[n] = k;
                n += 1;
            }
        }
        debug_assert_eq!(n, 4);
        regs.push(Reg { symbol: 0, subcarriers: sc });
        start += 6;
    }
    regs
}

/// The four REGs carrying the control format indicator, spread across
/// the band with a cell-dependent offset.
pub fn pcfich_regs(cfg: &CellConfig) -> Vec<Reg> {
    let n_prb = cfg.n_prb();
    let n_sc = cfg.n_subcarriers();
    let k_bar = (SUBCARRIERS_PER_RB / 2) * (cfg.cell_id as usize % (2 * n_prb));
    let all = symbol0_regs(cfg);
    (0..4)
        .map(|i| {
            let k = (k_bar + (i * n_prb / 2) * (SUBCARRIERS_PER_RB / 2)) % n_sc;
            all[k / 6]
        })
        .collect()
}

/// Symbol-0 REGs claimed by the hybrid-ARQ indicator channel.
///
/// One group of three REGs per eight PRBs, picked evenly from the REGs
/// left over by PCFICH with a cell-dependent rotation. The channel is
/// never decoded here, so a simplified deterministic spread is used.
pub fn phich_regs(cfg: &CellConfig) -> Vec<Reg> {
    let pcfich: Vec<Reg> = pcfich_regs(cfg);
    let avail: Vec<Reg> = symbol0_regs(cfg)
        .into_iter()
        .filter(|r| !pcfich.contains(r))
        .collect();
    let n_groups = cfg.n_prb().div_ceil(8);
    let needed = 3 * n_groups;
    let n = avail.len();
    let mut used = vec![false; n];
    let mut picks = Vec::with_capacity(needed);
    for j in 0..needed {
        let mut idx = (cfg.cell_id as usize + j * n / needed) % n;
        while used[idx] {
            idx = (idx + 1) % n;
        }
        used[idx] = true;
        picks.push(avail[idx]);
    }
    picks
}

fn reg_res(subframe: usize, regs: &[Reg]) -> BTreeSet<ReCoordinate> {
    let mut set = BTreeSet::new();
    for reg in regs {
        for &k in &reg.subcarriers {
            set.insert(ReCoordinate::new(subframe, reg.symbol, k));
        }
    }
    set
}

fn pcfich_res(cfg: &CellConfig) -> BTreeSet<ReCoordinate> {
    let regs = pcfich_regs(cfg);
    let mut set = BTreeSet::new();
    for sf in 0..SUBFRAMES_PER_FRAME {
        set.extend(reg_res(sf, &regs));
    }
    set
}

/// REGs available to the downlink control channel, in mapping order:
/// the symbol-0 REGs left over by PCFICH and PHICH, then the REGs of
/// the remaining control symbols (four consecutive REs each, since no
/// reference symbols fall there with one antenna port).
pub fn pdcch_regs(cfg: &CellConfig) -> Vec<Reg> {
    let pcfich = pcfich_regs(cfg);
    let phich = phich_regs(cfg);
    let mut regs: Vec<Reg> = symbol0_regs(cfg)
        .into_iter()
        .filter(|r| !pcfich.contains(r) && !phich.contains(r))
        .collect();
    let span = cfg.control_span();
    let n_sc = cfg.n_subcarriers();
    for sym in 1..span {
        let mut start = 0;
        while start < n_sc {
            regs.push(Reg {
                symbol: sym,
                subcarriers: [start, start + 1, start + 2, start + 3],
            });
            start += 4;
        }
    }
    regs
}

/// Control-region REs available to the downlink control channel: every
/// REG of the first `control_span` symbols minus PCFICH and PHICH.
fn pdcch_res(cfg: &CellConfig) -> BTreeSet<ReCoordinate> {
    let regs = pdcch_regs(cfg);
    let mut set = BTreeSet::new();
    for sf in 0..SUBFRAMES_PER_FRAME {
        set.extend(reg_res(sf, &regs));
    }
    set
}

/// Everything not claimed by a control channel or signal: the shared
/// data region plus the PHICH REs, which carry filler at data power.
fn pdsch_res(cfg: &CellConfig) -> Result<BTreeSet<ReCoordinate>> {
    let crs = crs_res(cfg)?;
    let span = cfg.control_span();
    let n_sc = cfg.n_subcarriers();
    let c0 = cfg.central_offset();
    let central = c0..c0 + CENTRAL_SUBCARRIERS;
    let mut set = BTreeSet::new();
    for sf in 0..SUBFRAMES_PER_FRAME {
        for sym in span..SYMBOLS_PER_SUBFRAME {
            let sync_block = SYNC_SUBFRAMES.contains(&sf) && (sym == SSS_SYMBOL || sym == PSS_SYMBOL);
            let pbch_block = sf == 0 && PBCH_SYMBOLS.contains(&sym);
            for k in 0..n_sc {
                if (sync_block || pbch_block) && central.contains(&k) {
                    continue;
                }
                let c = ReCoordinate::new(sf, sym, k);
                if !crs.contains(&c) {
                    set.insert(c);
                }
            }
        }
        let phich = phich_regs(cfg);
        set.extend(reg_res(sf, &phich));
    }
    Ok(set)
}

fn barrage_res(cfg: &CellConfig) -> BTreeSet<ReCoordinate> {
    let n_sc = cfg.n_subcarriers();
    let mut set = BTreeSet::new();
    for sf in 0..SUBFRAMES_PER_FRAME {
        for sym in 0..SYMBOLS_PER_SUBFRAME {
            for k in 0..n_sc {
                set.insert(ReCoordinate::new(sf, sym, k));
            }
        }
    }
    set
}
