//! Batch experiment runner: JSR sweeps over jamming strategies with
//! Monte Carlo trials, aggregation into curves and denial assessments,
//! and CSV/table emission.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cell::{Bandwidth, CellConfig, Periodicity, SUBFRAMES_PER_FRAME};
use crate::error::{Result, SimError};
use crate::jamming::{
    crs_subcarrier_columns, make_async_waveform, make_sync_waveform, mix_at_jsr, JammerSpec,
    Strategy, SyncMode,
};
use crate::metrics::{
    bandwidth_threshold, complexity_label, default_error_threshold, dos_threshold, rho_pdsch_db,
    strategy_fraction, DosAssessment, MetricsPoint, OccupancyConvention,
};
use crate::ofdm::Ofdm;
use crate::rx::{evaluate_strategy_flag, receive_frame};
use crate::sync::SyncParams;
use crate::tx::{build_frame, CellTables, FramePayload, PowerProfile};

/// Everything one sweep needs, loadable from a flat key-value TOML file.
/// Every field has a default, so an empty file is a valid spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub bandwidth_mhz: f64,
    pub cell_id: u16,
    pub cfi: u8,
    pub strategies: Vec<Strategy>,
    pub jsr_start_db: f64,
    pub jsr_stop_db: f64,
    pub jsr_step_db: f64,
    pub n_trial: u64,
    pub rng_seed: u64,
    pub noise_floor_db: f64,
    /// Applied to synchronized jammers to model imperfect alignment.
    pub timing_offset_samples: i64,
    pub occupancy_convention: OccupancyConvention,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub bandwidth_path: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> ExperimentSpec {
        ExperimentSpec {
            bandwidth_mhz: 1.4,
            cell_id: 0,
            cfi: 3,
            strategies: Strategy::ASSESSED.to_vec(),
            jsr_start_db: -45.0,
            jsr_stop_db: 40.0,
            jsr_step_db: 2.5,
            n_trial: 1000,
            rng_seed: 1,
            noise_floor_db: -30.0,
            timing_offset_samples: 0,
            occupancy_convention: OccupancyConvention::Physical,
            csv_path: PathBuf::from("results.csv"),
            summary_path: PathBuf::from("summary.txt"),
            bandwidth_path: PathBuf::from("bandwidth.csv"),
        }
    }
}

impl ExperimentSpec {
    pub fn from_file(path: &std::path::Path) -> Result<ExperimentSpec> {
        let text = std::fs::read_to_string(path)?;
        let spec: ExperimentSpec = toml::from_str(&text)
            .map_err(|e| SimError::SpecFile(format!("{}: {e}", path.display())))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.cell_config()?;
        if self.strategies.is_empty() {
            return Err(SimError::InvalidConfiguration(
                "at least one strategy is required".into(),
            ));
        }
        if self.strategies.contains(&Strategy::CustomMask) {
            return Err(SimError::InvalidConfiguration(
                "custom-mask jamming carries explicit masks and is not \
                 sweepable from a spec file"
                    .into(),
            ));
        }
        if self.n_trial == 0 {
            return Err(SimError::InvalidConfiguration(
                "n_trial must be at least 1".into(),
            ));
        }
        if !(self.jsr_step_db > 0.0) {
            return Err(SimError::InvalidConfiguration(format!(
                "sweep step {} must be positive",
                self.jsr_step_db
            )));
        }
        if self.jsr_start_db > self.jsr_stop_db {
            return Err(SimError::InvalidConfiguration(format!(
                "sweep start {} exceeds stop {}",
                self.jsr_start_db, self.jsr_stop_db
            )));
        }
        Ok(())
    }

    pub fn cell_config(&self) -> Result<CellConfig> {
        let bandwidth = Bandwidth::from_mhz(self.bandwidth_mhz)?;
        CellConfig::new(bandwidth, self.cell_id, self.cfi)
    }

    /// Swept per-RE JSR values, inclusive of both ends.
    pub fn jsr_points(&self) -> Vec<f64> {
        let n = ((self.jsr_stop_db - self.jsr_start_db) / self.jsr_step_db + 1e-9).floor()
            as usize;
        (0..=n)
            .map(|i| self.jsr_start_db + i as f64 * self.jsr_step_db)
            .collect()
    }

    /// Digest of the canonical serialized spec, recorded as provenance.
    pub fn digest(&self) -> String {
        let canonical = toml::to_string(self).expect("spec serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Error curve and verdict for one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyCurve {
    pub strategy: Strategy,
    /// Grid fraction used for the JSR_F normalization.
    pub fraction: f64,
    pub points: Vec<MetricsPoint>,
    pub assessment: DosAssessment,
}

/// Aggregated sweep output plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub curves: Vec<StrategyCurve>,
    pub spec_sha256: String,
    pub rng_seed: u64,
}

/// Counter-derived per-trial stream: any trial can be replayed alone and
/// parallel execution aggregates identically to sequential.
pub fn trial_rng(seed: u64, strategy_id: u64, jsr_index: u64, trial_index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&strategy_id.to_le_bytes());
    key[16..24].copy_from_slice(&jsr_index.to_le_bytes());
    key[24..32].copy_from_slice(&trial_index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// One subframe per trial for always-on channels, a whole frame for the
/// channels that complete only once per frame.
fn trial_subframes(strategy: Strategy) -> usize {
    match strategy.channel().map(|c| c.periodicity()) {
        Some(Periodicity::Frame) => SUBFRAMES_PER_FRAME,
        _ => 1,
    }
}

/// Barrage and subcarrier-column jammers free-run; channel targets need
/// the cell's symbol clock.
fn jammer_mode(strategy: Strategy) -> SyncMode {
    match strategy {
        Strategy::Barrage | Strategy::CrsSubcarriers => SyncMode::Asynchronous,
        _ => SyncMode::Synchronous,
    }
}

struct TrialEnv {
    cfg: CellConfig,
    tables: CellTables,
    profile: PowerProfile,
    ofdm: Ofdm,
    sync: SyncParams,
    noise_floor_db: f64,
    timing_offset_samples: i64,
}

/// Jammer waveform for one capture, built the way the sweep builds it:
/// targeted strategies run synchronously with the configured offset,
/// free-running ones land at a uniform random phase drawn from `rng`.
pub fn make_strategy_jammer(
    ofdm: &Ofdm,
    cfg: &CellConfig,
    strategy: Strategy,
    jsr_re_db: f64,
    sync_offset_samples: i64,
    n_subframes: usize,
    rng: &mut impl Rng,
) -> Result<Vec<num_complex::Complex64>> {
    match jammer_mode(strategy) {
        SyncMode::Asynchronous => {
            let mut spec = JammerSpec::asynchronous(strategy, jsr_re_db);
            if strategy == Strategy::CrsSubcarriers {
                spec.subcarrier_mask = Some(crs_subcarrier_columns(cfg));
            }
            let n_samples = (n_subframes * ofdm.subframe_samples()) as i64;
            spec.timing_offset_samples = rng.gen_range(0..n_samples);
            make_async_waveform(ofdm, n_subframes, &spec, rng)
        }
        SyncMode::Synchronous => {
            let mut spec = JammerSpec::new(strategy, jsr_re_db);
            spec.timing_offset_samples = sync_offset_samples;
            make_sync_waveform(ofdm, cfg, &spec, n_subframes, rng)
        }
    }
}

fn run_trial(
    env: &TrialEnv,
    strategy: Strategy,
    jsr_re_db: f64,
    rng: &mut ChaCha8Rng,
) -> Result<bool> {
    let payload = FramePayload::random(rng);
    let grid = build_frame(&env.tables, &payload, &env.profile, rng)?;
    let samples = env.ofdm.modulate(&grid);
    let n_sf = trial_subframes(strategy);
    let clean = &samples[..n_sf * env.ofdm.subframe_samples()];

    let jammer = make_strategy_jammer(
        &env.ofdm,
        &env.cfg,
        strategy,
        jsr_re_db,
        env.timing_offset_samples,
        n_sf,
        rng,
    )?;
    let mixed = mix_at_jsr(clean, &jammer, jsr_re_db, env.noise_floor_db, rng);
    let flags = receive_frame(&mixed, &env.tables, &env.profile, &payload, &env.sync)?;
    Ok(evaluate_strategy_flag(&flags, strategy))
}

/// Runs the full sweep. Trials are independent and execute in parallel;
/// the outcome is identical to a sequential run under the same seed.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let cfg = spec.cell_config()?;
    let env = TrialEnv {
        tables: CellTables::new(cfg.clone())?,
        profile: PowerProfile::default(),
        ofdm: Ofdm::new(cfg.bandwidth),
        sync: SyncParams::default(),
        noise_floor_db: spec.noise_floor_db,
        timing_offset_samples: spec.timing_offset_samples,
        cfg,
    };
    let points = spec.jsr_points();

    let mut curves = Vec::with_capacity(spec.strategies.len());
    for &strategy in &spec.strategies {
        let fraction = strategy_fraction(&env.cfg, strategy, spec.occupancy_convention)?;
        let rho = rho_pdsch_db(strategy, &env.profile);
        let mut curve = Vec::with_capacity(points.len());
        for (jsr_index, &jsr_re_db) in points.iter().enumerate() {
            let flags: Result<Vec<bool>> = (0..spec.n_trial)
                .into_par_iter()
                .map(|trial| {
                    let mut rng =
                        trial_rng(spec.rng_seed, strategy.id(), jsr_index as u64, trial);
                    run_trial(&env, strategy, jsr_re_db, &mut rng)
                })
                .collect();
            let n_err = flags?.into_iter().filter(|&e| e).count() as u64;
            curve.push(MetricsPoint::from_fraction(
                jsr_re_db,
                fraction,
                rho,
                n_err,
                spec.n_trial,
            )?);
        }
        let p_err_threshold = default_error_threshold(strategy);
        let assessment = DosAssessment {
            strategy,
            p_err_threshold,
            jsr_n_dos_db: dos_threshold(&curve, p_err_threshold)?,
            complexity_label: complexity_label(strategy),
        };
        curves.push(StrategyCurve {
            strategy,
            fraction,
            points: curve,
            assessment,
        });
    }

    Ok(ExperimentResult {
        curves,
        spec_sha256: spec.digest(),
        rng_seed: spec.rng_seed,
    })
}

/// One row per strategy and sweep point, fixed column order.
pub fn write_results_csv(result: &ExperimentResult, mut w: impl Write) -> Result<()> {
    writeln!(
        w,
        "strategy,jsr_re_db,jsr_f_db,rho_pdsch_db,jsr_n_db,n_err,n_trial,p_err"
    )?;
    for curve in &result.curves {
        for p in &curve.points {
            writeln!(
                w,
                "{},{:.6},{:.6},{:.6},{:.6},{},{},{:.6}",
                curve.strategy.token(),
                p.jsr_re_db,
                p.jsr_f_db,
                p.rho_pdsch_db,
                p.jsr_n_db,
                p.n_err,
                p.n_trial,
                p.p_err
            )?;
        }
    }
    Ok(())
}

/// Vulnerability summary table: occupancy, complexity, threshold and the
/// JSR_N at which each strategy denies service.
pub fn write_summary(result: &ExperimentResult, mut w: impl Write) -> Result<()> {
    writeln!(w, "# spec_sha256 {}", result.spec_sha256)?;
    writeln!(w, "# rng_seed {}", result.rng_seed)?;
    writeln!(
        w,
        "{:<16} {:>12} {:>10} {:>9} {:>14}",
        "strategy", "fraction_re", "complexity", "p_err_th", "jsr_n_dos"
    )?;
    for curve in &result.curves {
        let a = &curve.assessment;
        writeln!(
            w,
            "{:<16} {:>11.3}% {:>10} {:>9.2} {:>14}",
            curve.strategy.token(),
            100.0 * curve.fraction,
            a.complexity_label.map(|c| c.name()).unwrap_or("-"),
            a.p_err_threshold,
            a.jsr_n_dos_db.to_string(),
        )?;
    }
    Ok(())
}

/// Denial threshold projected over carrier bandwidths for one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthCurve {
    pub strategy: Strategy,
    pub points: Vec<(Bandwidth, f64)>,
}

/// The qualitative cross-bandwidth orderings the projection must show.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conclusions {
    /// Sync-signal jamming needs the most power at every bandwidth.
    pub sync_jamming_least_efficient: bool,
    /// Broadcast-channel jamming beats barrage only from 10 MHz up.
    pub pbch_overtakes_barrage_at_10_mhz: bool,
    /// Format-indicator jamming beats reference-symbol jamming only from
    /// 10 MHz up.
    pub pcfich_overtakes_crs_at_10_mhz: bool,
    /// Reference-symbol jamming beats control-channel jamming everywhere.
    pub crs_always_beats_pdcch: bool,
}

impl Conclusions {
    pub fn all_hold(&self) -> bool {
        self.sync_jamming_least_efficient
            && self.pbch_overtakes_barrage_at_10_mhz
            && self.pcfich_overtakes_crs_at_10_mhz
            && self.crs_always_beats_pdcch
    }
}

/// Bandwidth projection of 1.4 MHz denial thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthAnalysis {
    pub curves: Vec<BandwidthCurve>,
    pub conclusions: Conclusions,
}

/// Projects each strategy's 1.4 MHz denial threshold across bandwidths
/// and evaluates the qualitative ordering conclusions.
pub fn bandwidth_analysis(
    inputs: &[(Strategy, f64)],
    bandwidths: &[Bandwidth],
) -> Result<BandwidthAnalysis> {
    if bandwidths.is_empty() {
        return Err(SimError::InvalidConfiguration(
            "at least one bandwidth is required".into(),
        ));
    }
    let mut by_strategy: BTreeMap<u64, (Strategy, f64)> = BTreeMap::new();
    for &(strategy, db) in inputs {
        by_strategy.insert(strategy.id(), (strategy, db));
    }
    for required in Strategy::ASSESSED {
        if !by_strategy.contains_key(&required.id()) {
            return Err(SimError::InvalidConfiguration(format!(
                "bandwidth projection needs a 1.4 MHz threshold for {}",
                required.name()
            )));
        }
    }

    let mut curves = Vec::new();
    for &(strategy, base_db) in by_strategy.values() {
        let points = bandwidths
            .iter()
            .map(|&bw| Ok((bw, bandwidth_threshold(base_db, bw, strategy)?)))
            .collect::<Result<Vec<_>>>()?;
        curves.push(BandwidthCurve { strategy, points });
    }

    let at = |strategy: Strategy, bw: Bandwidth| -> f64 {
        curves
            .iter()
            .find(|c| c.strategy == strategy)
            .and_then(|c| c.points.iter().find(|(b, _)| *b == bw))
            .map(|(_, db)| *db)
            .expect("assessed strategies present")
    };
    let others = [
        Strategy::Barrage,
        Strategy::Pdcch,
        Strategy::Pbch,
        Strategy::Pcfich,
        Strategy::Crs,
    ];
    let conclusions = Conclusions {
        sync_jamming_least_efficient: bandwidths.iter().all(|&bw| {
            others
                .iter()
                .all(|&s| at(Strategy::PssSss, bw) > at(s, bw))
        }),
        pbch_overtakes_barrage_at_10_mhz: bandwidths.iter().all(|&bw| {
            if bw.mhz() >= 10.0 {
                at(Strategy::Pbch, bw) < at(Strategy::Barrage, bw)
            } else {
                at(Strategy::Pbch, bw) >= at(Strategy::Barrage, bw)
            }
        }),
        pcfich_overtakes_crs_at_10_mhz: bandwidths.iter().all(|&bw| {
            if bw.mhz() >= 10.0 {
                at(Strategy::Pcfich, bw) < at(Strategy::Crs, bw)
            } else {
                at(Strategy::Pcfich, bw) >= at(Strategy::Crs, bw)
            }
        }),
        crs_always_beats_pdcch: bandwidths
            .iter()
            .all(|&bw| at(Strategy::Crs, bw) < at(Strategy::Pdcch, bw)),
    };

    Ok(BandwidthAnalysis {
        curves,
        conclusions,
    })
}

/// CSV of the bandwidth projection: strategy, bandwidth, threshold.
pub fn write_bandwidth_csv(analysis: &BandwidthAnalysis, mut w: impl Write) -> Result<()> {
    writeln!(w, "strategy,bandwidth_mhz,jsr_n_dos_db")?;
    for curve in &analysis.curves {
        for &(bw, db) in &curve.points {
            writeln!(w, "{},{},{:.6}", curve.strategy.token(), bw.mhz(), db)?;
        }
    }
    Ok(())
}

/// Human-readable report of the ordering conclusions.
pub fn write_conclusions(conclusions: &Conclusions, mut w: impl Write) -> Result<()> {
    writeln!(
        w,
        "sync-signal jamming needs the most power at every bandwidth: {}",
        conclusions.sync_jamming_least_efficient
    )?;
    writeln!(
        w,
        "broadcast-channel jamming beats barrage only from 10 MHz: {}",
        conclusions.pbch_overtakes_barrage_at_10_mhz
    )?;
    writeln!(
        w,
        "format-indicator jamming beats reference-symbol jamming only from 10 MHz: {}",
        conclusions.pcfich_overtakes_crs_at_10_mhz
    )?;
    writeln!(
        w,
        "reference-symbol jamming beats control-channel jamming at every bandwidth: {}",
        conclusions.crs_always_beats_pdcch
    )?;
    Ok(())
}
