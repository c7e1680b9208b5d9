//! Command-line front end: sweep runner, bandwidth projection, IQ export.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ltejam::cell::{Bandwidth, CellConfig};
use ltejam::harness::{
    bandwidth_analysis, make_strategy_jammer, run_experiment, write_bandwidth_csv,
    write_conclusions, write_results_csv, write_summary, ExperimentSpec,
};
use ltejam::iq::write_iq_file;
use ltejam::jamming::{mix_at_jsr, Strategy};
use ltejam::metrics::published_dos_thresholds;
use ltejam::ofdm::Ofdm;
use ltejam::tx::{build_frame, CellTables, FramePayload, PowerProfile};
use ltejam::{Result, SimError};

#[derive(Parser)]
#[command(
    name = "ltejam",
    version,
    about = "Link-level LTE downlink jamming vulnerability simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo JSR sweep described by a spec file
    Run {
        /// Flat key-value TOML spec; every field has a default
        spec: PathBuf,
    },
    /// Project 1.4 MHz denial thresholds across carrier bandwidths
    Scale {
        /// TOML map of strategy tokens to 1.4 MHz JSR_N thresholds in dB;
        /// defaults to the published vulnerability table
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "bandwidth.csv")]
        output: PathBuf,
    },
    /// Synthesize a downlink capture and write interleaved float32 I/Q
    ExportIq {
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 1.4)]
        bandwidth_mhz: f64,
        #[arg(long, default_value_t = 0)]
        cell_id: u16,
        #[arg(long, default_value_t = 3)]
        cfi: u8,
        /// Capture length; a frame is 10 subframes
        #[arg(long, default_value_t = 10)]
        subframes: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Optional jammer to mix in (barrage, pss-sss, pdcch, pbch,
        /// pcfich, crs, crs-subcarriers)
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        jsr_re_db: f64,
        #[arg(long, default_value_t = -30.0)]
        noise_floor_db: f64,
        #[arg(long, default_value_t = 0)]
        timing_offset_samples: i64,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => process::exit(0),
                _ => process::exit(1),
            }
        }
    };
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        process::exit(exit_code(&e));
    }
}

fn exit_code(e: &SimError) -> i32 {
    match e {
        SimError::Io(_) => 2,
        SimError::SpecFile(_) | SimError::InvalidConfiguration(_) | SimError::Framing(_) => 3,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { spec } => cmd_run(&spec),
        Command::Scale { input, output } => cmd_scale(input.as_deref(), &output),
        Command::ExportIq {
            output,
            bandwidth_mhz,
            cell_id,
            cfi,
            subframes,
            seed,
            strategy,
            jsr_re_db,
            noise_floor_db,
            timing_offset_samples,
        } => cmd_export_iq(
            &output,
            bandwidth_mhz,
            cell_id,
            cfi,
            subframes,
            seed,
            strategy.as_deref(),
            jsr_re_db,
            noise_floor_db,
            timing_offset_samples,
        ),
    }
}

fn cmd_run(spec_path: &Path) -> Result<()> {
    let spec = ExperimentSpec::from_file(spec_path)?;
    // Open every output before computing so path mistakes fail fast.
    let csv_file = File::create(&spec.csv_path)?;
    let summary_file = File::create(&spec.summary_path)?;
    let bandwidth_file = File::create(&spec.bandwidth_path)?;

    let result = run_experiment(&spec)?;

    write_results_csv(&result, BufWriter::new(csv_file))?;
    let mut summary = BufWriter::new(summary_file);
    write_summary(&result, &mut summary)?;

    let reached: Vec<(Strategy, f64)> = result
        .curves
        .iter()
        .filter_map(|c| {
            c.assessment
                .jsr_n_dos_db
                .value()
                .map(|db| (c.strategy, db))
        })
        .collect();
    let mut bandwidth = BufWriter::new(bandwidth_file);
    match bandwidth_analysis(&reached, &Bandwidth::ALL) {
        Ok(analysis) => {
            write_bandwidth_csv(&analysis, &mut bandwidth)?;
            writeln!(summary)?;
            write_conclusions(&analysis.conclusions, &mut summary)?;
        }
        Err(_) => {
            writeln!(bandwidth, "strategy,bandwidth_mhz,jsr_n_dos_db")?;
            writeln!(
                summary,
                "\nbandwidth projection skipped: it needs a reached threshold \
                 for every assessed strategy"
            )?;
        }
    }

    for curve in &result.curves {
        println!(
            "{:<16} denial at {}",
            curve.strategy.token(),
            curve.assessment.jsr_n_dos_db
        );
    }
    println!(
        "wrote {}, {}, {}",
        spec.csv_path.display(),
        spec.summary_path.display(),
        spec.bandwidth_path.display()
    );
    Ok(())
}

fn cmd_scale(input: Option<&Path>, output: &Path) -> Result<()> {
    let inputs: Vec<(Strategy, f64)> = match input {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let map: BTreeMap<String, f64> = toml::from_str(&text)
                .map_err(|e| SimError::SpecFile(format!("{}: {e}", path.display())))?;
            map.iter()
                .map(|(token, &db)| {
                    Strategy::from_token(token)
                        .map(|s| (s, db))
                        .ok_or_else(|| {
                            SimError::SpecFile(format!("unknown strategy token '{token}'"))
                        })
                })
                .collect::<Result<_>>()?
        }
        None => published_dos_thresholds().to_vec(),
    };
    let analysis = bandwidth_analysis(&inputs, &Bandwidth::ALL)?;
    let file = File::create(output)?;
    write_bandwidth_csv(&analysis, BufWriter::new(file))?;
    write_conclusions(&analysis.conclusions, std::io::stdout().lock())?;
    println!("wrote {}", output.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_export_iq(
    output: &Path,
    bandwidth_mhz: f64,
    cell_id: u16,
    cfi: u8,
    subframes: usize,
    seed: u64,
    strategy: Option<&str>,
    jsr_re_db: f64,
    noise_floor_db: f64,
    timing_offset_samples: i64,
) -> Result<()> {
    if !(1..=10).contains(&subframes) {
        return Err(SimError::InvalidConfiguration(format!(
            "capture length {subframes} outside 1..=10 subframes"
        )));
    }
    let bandwidth = Bandwidth::from_mhz(bandwidth_mhz)?;
    let cfg = CellConfig::new(bandwidth, cell_id, cfi)?;
    let tables = CellTables::new(cfg.clone())?;
    let ofdm = Ofdm::new(bandwidth);
    let profile = PowerProfile::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let payload = FramePayload::random(&mut rng);
    let grid = build_frame(&tables, &payload, &profile, &mut rng)?;
    let samples = ofdm.modulate(&grid);
    let clean = &samples[..subframes * ofdm.subframe_samples()];

    let jammer: Vec<Complex64> = match strategy {
        Some(token) => {
            let s = Strategy::from_token(token).ok_or_else(|| {
                SimError::InvalidConfiguration(format!("unknown strategy token '{token}'"))
            })?;
            make_strategy_jammer(
                &ofdm,
                &cfg,
                s,
                jsr_re_db,
                timing_offset_samples,
                subframes,
                &mut rng,
            )?
        }
        None => vec![Complex64::new(0.0, 0.0); clean.len()],
    };
    let mixed = mix_at_jsr(clean, &jammer, jsr_re_db, noise_floor_db, &mut rng);
    write_iq_file(output, &mixed)?;
    println!(
        "wrote {} samples at {} Hz to {}",
        mixed.len(),
        bandwidth.sample_rate_hz(),
        output.display()
    );
    Ok(())
}
