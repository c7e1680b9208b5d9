//! Jammer waveform synthesis and power-calibrated mixing: full-band
//! pulsed noise, resource-element-targeted interference, and the
//! additive channel that combines them with the downlink signal.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::cell::{
    build_channel_mask, CellConfig, Channel, ChannelMask, Periodicity, ReCoordinate,
    SUBFRAMES_PER_FRAME, SYMBOLS_PER_SUBFRAME,
};
use crate::error::{Result, SimError};
use crate::ofdm::{Ofdm, ResourceGrid};
use crate::sequences::qpsk;

/// Jamming strategy: either one of the protocol-aware channel targets,
/// the full-band barrage, the reference-symbol subcarrier columns, or a
/// caller-supplied mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Barrage,
    PssSss,
    Pdcch,
    Pbch,
    Pcfich,
    Crs,
    CrsSubcarriers,
    CustomMask,
}

impl Strategy {
    /// The six strategies assessed against each other.
    pub const ASSESSED: [Strategy; 6] = [
        Strategy::Barrage,
        Strategy::PssSss,
        Strategy::Pdcch,
        Strategy::Pbch,
        Strategy::Pcfich,
        Strategy::Crs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Barrage => "Barrage",
            Strategy::PssSss => "PSS/SSS",
            Strategy::Pdcch => "PDCCH",
            Strategy::Pbch => "PBCH",
            Strategy::Pcfich => "PCFICH",
            Strategy::Crs => "CRS",
            Strategy::CrsSubcarriers => "CRS subcarriers",
            Strategy::CustomMask => "Custom mask",
        }
    }

    /// Machine-readable token used in spec files and CSV output.
    pub fn token(self) -> &'static str {
        match self {
            Strategy::Barrage => "barrage",
            Strategy::PssSss => "pss-sss",
            Strategy::Pdcch => "pdcch",
            Strategy::Pbch => "pbch",
            Strategy::Pcfich => "pcfich",
            Strategy::Crs => "crs",
            Strategy::CrsSubcarriers => "crs-subcarriers",
            Strategy::CustomMask => "custom-mask",
        }
    }

    /// Parses the machine-readable token form; inverse of `token`.
    pub fn from_token(token: &str) -> Option<Strategy> {
        [
            Strategy::Barrage,
            Strategy::PssSss,
            Strategy::Pdcch,
            Strategy::Pbch,
            Strategy::Pcfich,
            Strategy::Crs,
            Strategy::CrsSubcarriers,
            Strategy::CustomMask,
        ]
        .into_iter()
        .find(|s| s.token() == token)
    }

    /// Stable numeric identity, used to derive independent RNG streams.
    pub fn id(self) -> u64 {
        match self {
            Strategy::Barrage => 0,
            Strategy::PssSss => 1,
            Strategy::Pdcch => 2,
            Strategy::Pbch => 3,
            Strategy::Pcfich => 4,
            Strategy::Crs => 5,
            Strategy::CrsSubcarriers => 6,
            Strategy::CustomMask => 7,
        }
    }

    /// Channel whose occupancy and power offset describe this strategy.
    pub fn channel(self) -> Option<Channel> {
        match self {
            Strategy::Barrage => Some(Channel::Barrage),
            Strategy::PssSss => Some(Channel::PssSss),
            Strategy::Pdcch => Some(Channel::Pdcch),
            Strategy::Pbch => Some(Channel::Pbch),
            Strategy::Pcfich => Some(Channel::Pcfich),
            Strategy::Crs => Some(Channel::Crs),
            Strategy::CrsSubcarriers | Strategy::CustomMask => None,
        }
    }
}

/// Whether the jammer shares the cell's symbol clock or free-runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SyncMode {
    Asynchronous,
    Synchronous,
}

/// Full description of one jammer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JammerSpec {
    pub strategy: Strategy,
    pub sync_mode: SyncMode,
    /// Per-active-RE jammer power over per-RE reference signal power.
    pub jsr_re_db: f64,
    /// Shift of the jammer waveform against the downlink frame clock.
    pub timing_offset_samples: i64,
    /// Fraction of time the jammer transmits, gated per OFDM symbol.
    pub duty_cycle: f64,
    pub subcarrier_mask: Option<BTreeSet<usize>>,
    pub symbol_mask: Option<BTreeSet<usize>>,
}

impl JammerSpec {
    pub fn new(strategy: Strategy, jsr_re_db: f64) -> JammerSpec {
        JammerSpec {
            strategy,
            sync_mode: SyncMode::Synchronous,
            jsr_re_db,
            timing_offset_samples: 0,
            duty_cycle: 1.0,
            subcarrier_mask: None,
            symbol_mask: None,
        }
    }

    /// A free-running jammer; targeted strategies refuse this mode.
    pub fn asynchronous(strategy: Strategy, jsr_re_db: f64) -> JammerSpec {
        JammerSpec {
            sync_mode: SyncMode::Asynchronous,
            ..JammerSpec::new(strategy, jsr_re_db)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duty_cycle > 0.0 && self.duty_cycle <= 1.0) {
            return Err(SimError::InvalidConfiguration(format!(
                "duty cycle {} outside (0, 1]",
                self.duty_cycle
            )));
        }
        if self.strategy == Strategy::CustomMask
            && (self.subcarrier_mask.is_none() || self.symbol_mask.is_none())
        {
            return Err(SimError::InvalidConfiguration(
                "custom-mask strategy needs subcarrier and symbol masks".into(),
            ));
        }
        if self.sync_mode == SyncMode::Asynchronous
            && matches!(
                self.strategy,
                Strategy::PssSss
                    | Strategy::Pdcch
                    | Strategy::Pbch
                    | Strategy::Pcfich
                    | Strategy::Crs
            )
        {
            return Err(SimError::InvalidConfiguration(format!(
                "{} jamming targets specific resource elements and needs the \
                 synchronous mode",
                self.strategy.name()
            )));
        }
        if let Some(mask) = &self.subcarrier_mask {
            if mask.is_empty() {
                return Err(SimError::InvalidConfiguration(
                    "subcarrier mask must not be empty".into(),
                ));
            }
        }
        if let Some(mask) = &self.symbol_mask {
            if mask.is_empty() {
                return Err(SimError::InvalidConfiguration(
                    "symbol mask must not be empty".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Subcarrier columns that ever carry reference symbols: both pilot
/// families, fixed by the cell identity and constant over time.
pub fn crs_subcarrier_columns(cfg: &CellConfig) -> BTreeSet<usize> {
    let k0 = cfg.cell_id as usize % 6;
    (0..cfg.n_subcarriers())
        .filter(|k| k % 6 == k0 || k % 6 == (k0 + 3) % 6)
        .collect()
}

/// Resource elements a strategy aims at, as a per-frame mask.
pub fn strategy_mask(cfg: &CellConfig, spec: &JammerSpec) -> Result<ChannelMask> {
    spec.validate()?;
    match spec.strategy {
        Strategy::Barrage => build_channel_mask(cfg, Channel::Barrage),
        Strategy::PssSss => build_channel_mask(cfg, Channel::PssSss),
        Strategy::Pdcch => build_channel_mask(cfg, Channel::Pdcch),
        Strategy::Pbch => build_channel_mask(cfg, Channel::Pbch),
        Strategy::Pcfich => build_channel_mask(cfg, Channel::Pcfich),
        Strategy::Crs => build_channel_mask(cfg, Channel::Crs),
        Strategy::CrsSubcarriers => {
            let columns = crs_subcarrier_columns(cfg);
            let mut coords = BTreeSet::new();
            for sf in 0..SUBFRAMES_PER_FRAME {
                for sym in 0..SYMBOLS_PER_SUBFRAME {
                    for &k in &columns {
                        coords.insert(ReCoordinate::new(sf, sym, k));
                    }
                }
            }
            Ok(ChannelMask::from_coords(
                Channel::Crs,
                Periodicity::Subframe,
                coords,
                cfg.n_prb(),
            ))
        }
        Strategy::CustomMask => {
            let subs = spec.subcarrier_mask.as_ref().unwrap();
            let syms = spec.symbol_mask.as_ref().unwrap();
            let n_sc = cfg.n_subcarriers();
            if let Some(&bad) = subs.iter().find(|&&k| k >= n_sc) {
                return Err(SimError::InvalidConfiguration(format!(
                    "subcarrier {bad} outside 0..{n_sc}"
                )));
            }
            if let Some(&bad) = syms.iter().find(|&&s| s >= SYMBOLS_PER_SUBFRAME) {
                return Err(SimError::InvalidConfiguration(format!(
                    "symbol {bad} outside 0..{SYMBOLS_PER_SUBFRAME}"
                )));
            }
            let mut coords = BTreeSet::new();
            for sf in 0..SUBFRAMES_PER_FRAME {
                for &sym in syms {
                    for &k in subs {
                        coords.insert(ReCoordinate::new(sf, sym, k));
                    }
                }
            }
            Ok(ChannelMask::from_coords(
                Channel::Barrage,
                Periodicity::Subframe,
                coords,
                cfg.n_prb(),
            ))
        }
    }
}

/// Cyclic rotation implementing a timing offset inside a looped capture.
fn rotate(samples: &mut [Complex64], offset: i64) {
    let n = samples.len() as i64;
    if n == 0 {
        return;
    }
    let shift = offset.rem_euclid(n) as usize;
    samples.rotate_right(shift);
}

/// Free-running jammer: unit-power QPSK on the masked subcarriers (all of
/// them by default) of every active symbol, with symbols gated to
/// approximate the duty cycle evenly.
pub fn make_async_waveform(
    ofdm: &Ofdm,
    n_subframes: usize,
    spec: &JammerSpec,
    rng: &mut impl Rng,
) -> Result<Vec<Complex64>> {
    spec.validate()?;
    if spec.sync_mode != SyncMode::Asynchronous {
        return Err(SimError::InvalidConfiguration(
            "free-running waveform builder expects the asynchronous mode".into(),
        ));
    }
    let n_sc = ofdm.bandwidth().n_subcarriers();
    let active_subcarriers: Vec<usize> = match &spec.subcarrier_mask {
        Some(mask) => {
            if let Some(&bad) = mask.iter().find(|&&k| k >= n_sc) {
                return Err(SimError::InvalidConfiguration(format!(
                    "subcarrier {bad} outside 0..{n_sc}"
                )));
            }
            mask.iter().copied().collect()
        }
        None => (0..n_sc).collect(),
    };
    let n_symbols = n_subframes * SYMBOLS_PER_SUBFRAME;
    let mut grid = ResourceGrid::new(n_sc, n_symbols);
    let duty = spec.duty_cycle;
    for sym in 0..n_symbols {
        let active = ((sym + 1) as f64 * duty).floor() > (sym as f64 * duty).floor();
        if !active {
            continue;
        }
        for &k in &active_subcarriers {
            grid.set(sym, k, qpsk(rng.gen_range(0..2), rng.gen_range(0..2)));
        }
    }
    let mut wave = ofdm.modulate(&grid);
    rotate(&mut wave, spec.timing_offset_samples);
    Ok(wave)
}

/// Protocol-aware jammer: unit-power QPSK confined to the strategy's
/// resource elements, optionally shifted in time against the frame.
pub fn make_sync_waveform(
    ofdm: &Ofdm,
    cfg: &CellConfig,
    spec: &JammerSpec,
    n_subframes: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Complex64>> {
    if spec.sync_mode != SyncMode::Synchronous {
        return Err(SimError::InvalidConfiguration(
            "targeted waveform builder expects the synchronous mode".into(),
        ));
    }
    let mask = strategy_mask(cfg, spec)?;
    let n_symbols = n_subframes * SYMBOLS_PER_SUBFRAME;
    let mut grid = ResourceGrid::new(cfg.n_subcarriers(), n_symbols);
    for c in &mask.coords {
        if (c.subframe as usize) < n_subframes {
            grid.set(
                c.frame_symbol(),
                c.sc(),
                qpsk(rng.gen_range(0..2), rng.gen_range(0..2)),
            );
        }
    }
    let mut wave = ofdm.modulate(&grid);
    rotate(&mut wave, spec.timing_offset_samples);
    Ok(wave)
}

/// Combines signal and jammer: the jammer (generated with unit
/// per-active-RE power) is scaled to the requested per-RE JSR and white
/// Gaussian noise enters at `noise_floor_db` below the unit reference
/// resource element.
pub fn mix_at_jsr(
    enb_samples: &[Complex64],
    jammer_samples: &[Complex64],
    jsr_re_db: f64,
    noise_floor_db: f64,
    rng: &mut impl Rng,
) -> Vec<Complex64> {
    assert_eq!(enb_samples.len(), jammer_samples.len());
    let gain = 10f64.powf(jsr_re_db / 20.0);
    let sigma = (10f64.powf(noise_floor_db / 10.0) / 2.0).sqrt();
    let normal = Normal::new(0.0, sigma).expect("valid noise variance");
    enb_samples
        .iter()
        .zip(jammer_samples)
        .map(|(&s, &j)| {
            s + j * gain + Complex64::new(normal.sample(rng), normal.sample(rng))
        })
        .collect()
}
