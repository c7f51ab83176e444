//! `spamsep`: characterize, mitigate and study state-preparation and
//! readout errors on simulated or exported device data.

mod args;
mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use args::{
    parse_angle, parse_circuit, parse_count, parse_floats, parse_folds, parse_pairs, parse_shots, parse_thetas,
    CircuitArg, ProtocolArg, Shots,
};
use commands::Output;

#[derive(Parser)]
#[command(name = "spamsep", version, about = "Separate state-preparation and readout error toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Shots per circuit, or `exact` for analytic distributions.
    #[arg(long, default_value = "exact", value_parser = parse_shots)]
    shots: Shots,
    /// Master seed for sampling.
    #[arg(long, env = "SPAMSEP_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the ancilla characterization protocol on a simulated device or
    /// on exported counts.
    Characterize {
        /// Noise model JSON of the simulated device.
        #[arg(long)]
        noise: Option<PathBuf>,
        /// Target:ancilla pairs, e.g. `0:1,1:2`. Defaults to each qubit with
        /// its successor.
        #[arg(long, value_parser = parse_pairs)]
        pairs: Option<::std::vec::Vec<(usize, usize)>>,
        #[arg(long, value_enum, default_value = "plain")]
        protocol: ProtocolArg,
        /// Fold counts for `--protocol zne`.
        #[arg(long, value_parser = parse_folds)]
        folds: Option<::std::vec::Vec<u32>>,
        /// Directory of `<circuit id>.json` counts files to use instead of
        /// simulating.
        #[arg(long)]
        counts_dir: Option<PathBuf>,
        /// Also write the simulated counts to `<out>/counts`.
        #[arg(long)]
        emit_counts: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Apply standard (SRM) and preparation-aware (SPRM) mitigation to one
    /// circuit.
    Mitigate {
        #[arg(long)]
        noise: PathBuf,
        /// Circuit JSON file, `builtin:2q` or `builtin:4q`.
        #[arg(long, value_parser = parse_circuit)]
        circuit: CircuitArg,
        /// Rotation angle for built-in circuits.
        #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
        theta: Option<f64>,
        /// Characterization report to calibrate from. Measured on the
        /// simulated device when absent.
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "plain")]
        protocol: ProtocolArg,
        #[command(flatten)]
        common: Common,
    },
    /// Fidelity of raw, SRM and SPRM outputs over a range of angles.
    Sweep {
        #[arg(long)]
        noise: PathBuf,
        #[arg(long, value_parser = parse_circuit, default_value = "builtin:2q")]
        circuit: CircuitArg,
        /// Comma-separated angles or `linspace:START:STOP:N`; `pi` is allowed.
        #[arg(long, value_parser = parse_thetas, default_value = "linspace:0:pi:11")]
        theta: ::std::vec::Vec<f64>,
        #[arg(long, value_enum, default_value = "plain")]
        protocol: ProtocolArg,
        /// Shots per calibration circuit in sampled mode.
        #[arg(long, value_parser = parse_count, default_value = "4000000")]
        calibration_shots: u64,
        /// Independent repetitions in sampled mode.
        #[arg(long, default_value_t = 10)]
        repetitions: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Zero-noise extrapolation of the ancilla SPAM rates over CNOT folds.
    Zne {
        #[arg(long)]
        noise: PathBuf,
        #[arg(long, value_parser = parse_pairs)]
        pairs: Option<::std::vec::Vec<(usize, usize)>>,
        /// Odd fold counts, default `1,3,5`.
        #[arg(long, value_parser = parse_folds)]
        folds: Option<::std::vec::Vec<u32>>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the two-qubit cooling equations for preparation and readout
    /// rates.
    CoolingDemo {
        /// Observed `dspam1,dspam2,dspam1_tilde,dspam2_tilde`.
        #[arg(long, value_parser = parse_floats::<4>)]
        observables: Option<[f64; 4]>,
        /// Rates `dsp1,dm1,dsp2,dm2` to generate observables from.
        #[arg(long, value_parser = parse_floats::<4>)]
        rates: Option<[f64; 4]>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Single-qubit tomography of the prepared state.
    Tomo {
        #[arg(long)]
        noise: PathBuf,
        /// Qubit of the noise model to use.
        #[arg(long, default_value_t = 0)]
        qubit: usize,
        /// Prepare |1> instead of |0>.
        #[arg(long)]
        prep_one: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Characterize {
            noise,
            pairs,
            protocol,
            folds,
            counts_dir,
            emit_counts,
            common,
        } => commands::characterize(
            &commands::CharacterizeArgs {
                noise,
                pairs,
                protocol: protocol.protocol(folds),
                counts_dir,
                emit_counts,
                shots: common.shots,
                seed: common.seed,
            },
            &Output::new(&common.out)?,
        ),
        Command::Mitigate {
            noise,
            circuit,
            theta,
            calibration,
            protocol,
            common,
        } => commands::mitigate(
            &commands::MitigateArgs {
                noise,
                circuit,
                theta,
                calibration,
                protocol: protocol.protocol(None),
                shots: common.shots,
                seed: common.seed,
            },
            &Output::new(&common.out)?,
        ),
        Command::Sweep {
            noise,
            circuit,
            theta,
            protocol,
            calibration_shots,
            repetitions,
            common,
        } => commands::sweep(
            &commands::SweepArgs {
                noise,
                circuit,
                thetas: theta,
                protocol: protocol.protocol(None),
                shots: common.shots,
                calibration_shots,
                repetitions,
                seed: common.seed,
            },
            &Output::new(&common.out)?,
        ),
        Command::Zne { noise, pairs, folds, common } => commands::zne(
            &commands::ZneArgs {
                noise,
                pairs,
                folds,
                shots: common.shots,
                seed: common.seed,
            },
            &Output::new(&common.out)?,
        ),
        Command::CoolingDemo { observables, rates, out } => commands::cooling_demo(observables, rates, &Output::new(&out)?),
        Command::Tomo {
            noise,
            qubit,
            prep_one,
            common,
        } => commands::tomo(
            &commands::TomoArgs {
                noise,
                qubit,
                prep_one,
                shots: common.shots,
                seed: common.seed,
            },
            &Output::new(&common.out)?,
        ),
    }
}

/// 3 for numerical failures of the library, 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .filter_map(|e| e.downcast_ref::<spamsep::Error>())
        .any(spamsep::Error::is_numerical);
    if numerical {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
