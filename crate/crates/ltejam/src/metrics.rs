//! Jammer-to-signal metric algebra: per-RE to per-frame to normalized
//! conversions, denial-of-service thresholds, and bandwidth scaling.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cell::{build_channel_mask, occupancy_fraction, Bandwidth, CellConfig};
use crate::error::{Result, SimError};
use crate::jamming::{JammerSpec, Strategy};
use crate::tx::PowerProfile;

/// Reference bandwidth for the denial-threshold scaling law.
pub const BASELINE_BANDWIDTH_MHZ: f64 = 1.4;

/// Which resource-occupancy figures feed the JSR normalization.
///
/// `Physical` counts mask coordinates; `PublishedTable` substitutes the
/// rounded fractions from the published vulnerability table, which lists
/// the control-format channel at 0.2 % (one subframe's worth) instead of
/// the 1.59 % its per-frame mapping occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OccupancyConvention {
    Physical,
    PublishedTable,
}

impl OccupancyConvention {
    pub fn name(self) -> &'static str {
        match self {
            OccupancyConvention::Physical => "physical",
            OccupancyConvention::PublishedTable => "published-table",
        }
    }
}

/// Qualitative attack complexity: how much synchronization and RE
/// targeting the strategy demands of the jammer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Complexity {
    VeryLow,
    Low,
    Medium,
    High,
}

impl Complexity {
    pub fn name(self) -> &'static str {
        match self {
            Complexity::VeryLow => "very low",
            Complexity::Low => "low",
            Complexity::Medium => "medium",
            Complexity::High => "high",
        }
    }
}

/// One measured point of an error-rate curve with its full JSR chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsPoint {
    pub jsr_re_db: f64,
    pub jsr_f_db: f64,
    pub rho_pdsch_db: f64,
    pub jsr_n_db: f64,
    pub p_err: f64,
    pub n_err: u64,
    pub n_trial: u64,
}

impl MetricsPoint {
    /// Builds a point from raw trial counts, deriving the dB chain.
    pub fn from_counts(
        jsr_re_db: f64,
        n_tf: usize,
        n_totf: usize,
        rho_pdsch_db: f64,
        n_err: u64,
        n_trial: u64,
    ) -> Result<MetricsPoint> {
        let jsr_f_db = jsr_f(jsr_re_db, n_tf, n_totf)?;
        Self::assemble(jsr_re_db, jsr_f_db, rho_pdsch_db, n_err, n_trial)
    }

    /// Same as `from_counts` but with a pre-agreed occupancy fraction.
    pub fn from_fraction(
        jsr_re_db: f64,
        fraction: f64,
        rho_pdsch_db: f64,
        n_err: u64,
        n_trial: u64,
    ) -> Result<MetricsPoint> {
        let jsr_f_db = jsr_f_from_fraction(jsr_re_db, fraction)?;
        Self::assemble(jsr_re_db, jsr_f_db, rho_pdsch_db, n_err, n_trial)
    }

    fn assemble(
        jsr_re_db: f64,
        jsr_f_db: f64,
        rho_pdsch_db: f64,
        n_err: u64,
        n_trial: u64,
    ) -> Result<MetricsPoint> {
        Ok(MetricsPoint {
            jsr_re_db,
            jsr_f_db,
            rho_pdsch_db,
            jsr_n_db: jsr_n(jsr_f_db, rho_pdsch_db),
            p_err: error_rate(n_err, n_trial)?,
            n_err,
            n_trial,
        })
    }
}

/// Result of a denial-threshold search over an error curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DosOutcome {
    Reached(f64),
    NotReached,
}

impl DosOutcome {
    pub fn value(self) -> Option<f64> {
        match self {
            DosOutcome::Reached(db) => Some(db),
            DosOutcome::NotReached => None,
        }
    }
}

impl fmt::Display for DosOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DosOutcome::Reached(db) => write!(f, "{db:.2} dB"),
            DosOutcome::NotReached => write!(f, "not reached"),
        }
    }
}

/// Final verdict for one strategy: the JSR_N needed to deny service.
#[derive(Debug, Clone, PartialEq)]
pub struct DosAssessment {
    pub strategy: Strategy,
    pub p_err_threshold: f64,
    pub jsr_n_dos_db: DosOutcome,
    pub complexity_label: Option<Complexity>,
}

/// Per-frame JSR: per-RE ratio diluted by the jammed fraction of the grid.
pub fn jsr_f(jsr_re_db: f64, n_tf: usize, n_totf: usize) -> Result<f64> {
    if n_tf == 0 || n_totf == 0 || n_tf > n_totf {
        return Err(SimError::InvalidConfiguration(format!(
            "jammed RE count must satisfy 0 < {n_tf} <= {n_totf}"
        )));
    }
    jsr_f_from_fraction(jsr_re_db, n_tf as f64 / n_totf as f64)
}

/// Per-frame JSR from an occupancy fraction in (0, 1].
pub fn jsr_f_from_fraction(jsr_re_db: f64, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SimError::InvalidConfiguration(format!(
            "occupancy fraction {fraction} outside (0, 1]"
        )));
    }
    Ok(jsr_re_db + 10.0 * fraction.log10())
}

/// Normalized JSR: per-frame JSR weighted by the target's power offset
/// relative to the data channel.
pub fn jsr_n(jsr_f_db: f64, rho_pdsch_db: f64) -> f64 {
    jsr_f_db + rho_pdsch_db
}

/// Fraction of trials that ended in a decode error.
pub fn error_rate(n_err: u64, n_trial: u64) -> Result<f64> {
    if n_trial == 0 {
        return Err(SimError::InvalidConfiguration(
            "error rate needs at least one trial".into(),
        ));
    }
    if n_err > n_trial {
        return Err(SimError::InvalidConfiguration(format!(
            "error count {n_err} exceeds trial count {n_trial}"
        )));
    }
    Ok(n_err as f64 / n_trial as f64)
}

/// Power offset applied in the JSR_N chain for one strategy. Strategies
/// without a single target channel normalize against the data power.
pub fn rho_pdsch_db(strategy: Strategy, profile: &PowerProfile) -> f64 {
    match strategy.channel() {
        Some(channel) => profile.offset_db(channel),
        None => 0.0,
    }
}

/// Smallest JSR_N at which the error curve meets the threshold, linearly
/// interpolated between the bracketing sweep points.
pub fn dos_threshold(curve: &[MetricsPoint], p_err_th: f64) -> Result<DosOutcome> {
    if curve.is_empty() {
        return Err(SimError::InvalidConfiguration(
            "denial threshold needs a non-empty error curve".into(),
        ));
    }
    if !(p_err_th > 0.0 && p_err_th < 1.0) {
        return Err(SimError::InvalidConfiguration(format!(
            "error threshold {p_err_th} must lie strictly between 0 and 1"
        )));
    }
    for pair in curve.windows(2) {
        if pair[1].jsr_n_db <= pair[0].jsr_n_db {
            return Err(SimError::InvalidConfiguration(
                "error curve must be sorted by strictly increasing jsr_n_db".into(),
            ));
        }
    }
    let Some(i) = curve.iter().position(|p| p.p_err >= p_err_th) else {
        return Ok(DosOutcome::NotReached);
    };
    if i == 0 {
        return Ok(DosOutcome::Reached(curve[0].jsr_n_db));
    }
    let (lo, hi) = (&curve[i - 1], &curve[i]);
    let t = (p_err_th - lo.p_err) / (hi.p_err - lo.p_err);
    Ok(DosOutcome::Reached(lo.jsr_n_db + t * (hi.jsr_n_db - lo.jsr_n_db)))
}

/// Scales a 1.4 MHz denial threshold to a wider carrier for channels whose
/// RE count is bandwidth-independent. Full-band strategies do not scale.
pub fn scale_jsr_to_bandwidth(
    jsr_n_dos_1_4_db: f64,
    bandwidth: Bandwidth,
    strategy: Strategy,
) -> Result<f64> {
    match strategy {
        Strategy::PssSss | Strategy::Pbch | Strategy::Pcfich => Ok(jsr_n_dos_1_4_db
            - 10.0 * (bandwidth.mhz() / BASELINE_BANDWIDTH_MHZ).log10()),
        _ => Err(SimError::InvalidConfiguration(format!(
            "{} jamming must grow with the carrier; its threshold does not scale",
            strategy.name()
        ))),
    }
}

/// Denial threshold at another bandwidth: sparse fixed-size channels follow
/// the inverse-bandwidth law, full-band strategies keep their 1.4 MHz value.
pub fn bandwidth_threshold(
    jsr_n_dos_1_4_db: f64,
    bandwidth: Bandwidth,
    strategy: Strategy,
) -> Result<f64> {
    match strategy {
        Strategy::PssSss | Strategy::Pbch | Strategy::Pcfich => {
            scale_jsr_to_bandwidth(jsr_n_dos_1_4_db, bandwidth, strategy)
        }
        Strategy::Barrage | Strategy::Pdcch | Strategy::Crs => Ok(jsr_n_dos_1_4_db),
        Strategy::CrsSubcarriers | Strategy::CustomMask => {
            Err(SimError::InvalidConfiguration(format!(
                "no bandwidth law is defined for {} jamming",
                strategy.name()
            )))
        }
    }
}

/// Error thresholds deemed sufficient for denial of service, per strategy.
pub fn default_thresholds() -> [(Strategy, f64); 6] {
    [
        (Strategy::Barrage, 0.1),
        (Strategy::PssSss, 0.5),
        (Strategy::Pdcch, 0.1),
        (Strategy::Pbch, 0.9),
        (Strategy::Pcfich, 0.1),
        (Strategy::Crs, 0.1),
    ]
}

/// Published 1.4 MHz denial thresholds (JSR_N, dB) for the assessed set,
/// used as the reference input for bandwidth projections.
pub fn published_dos_thresholds() -> [(Strategy, f64); 6] {
    [
        (Strategy::Barrage, -10.0),
        (Strategy::PssSss, 5.0),
        (Strategy::Pdcch, -16.0),
        (Strategy::Pbch, -3.0),
        (Strategy::Pcfich, -19.0),
        (Strategy::Crs, -26.0),
    ]
}

/// Threshold for one strategy; mask-style jammers reuse the composite 0.1.
pub fn default_error_threshold(strategy: Strategy) -> f64 {
    default_thresholds()
        .iter()
        .find(|(s, _)| *s == strategy)
        .map(|(_, th)| *th)
        .unwrap_or(0.1)
}

/// Qualitative complexity of mounting each assessed attack.
pub fn complexity_label(strategy: Strategy) -> Option<Complexity> {
    match strategy {
        Strategy::Barrage => Some(Complexity::VeryLow),
        Strategy::Pbch => Some(Complexity::Low),
        Strategy::PssSss | Strategy::Pdcch => Some(Complexity::Medium),
        Strategy::Pcfich | Strategy::Crs => Some(Complexity::High),
        Strategy::CrsSubcarriers | Strategy::CustomMask => None,
    }
}

/// Occupied fraction of the frame grid for a strategy under a convention.
pub fn strategy_fraction(
    cfg: &CellConfig,
    strategy: Strategy,
    convention: OccupancyConvention,
) -> Result<f64> {
    if convention == OccupancyConvention::PublishedTable {
        let published = match strategy {
            Strategy::Barrage => Some(1.0),
            Strategy::PssSss => Some(0.0123),
            Strategy::Pdcch => Some(0.234),
            Strategy::Pbch => Some(0.0238),
            Strategy::Pcfich => Some(0.002),
            Strategy::Crs => Some(0.0476),
            Strategy::CrsSubcarriers | Strategy::CustomMask => None,
        };
        if let Some(fraction) = published {
            return Ok(fraction);
        }
    }
    match strategy.channel() {
        Some(channel) => {
            let mask = build_channel_mask(cfg, channel)?;
            occupancy_fraction(&mask, cfg)
        }
        None if strategy == Strategy::CrsSubcarriers => {
            let spec = JammerSpec::new(Strategy::CrsSubcarriers, 0.0);
            let mask = crate::jamming::strategy_mask(cfg, &spec)?;
            occupancy_fraction(&mask, cfg)
        }
        None => Err(SimError::InvalidConfiguration(
            "custom masks define their own resource count".into(),
        )),
    }
}
