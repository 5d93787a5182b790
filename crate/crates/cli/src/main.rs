//! `slantstack`: scenario-driven array processing from the command line.
//!
//! The `pipeline` subcommand runs the whole chain; the stage subcommands
//! (`synth`, `radon`, `semblance`, `filter`, `invert`, `localize`) re-run a
//! single step from the previous stage's grid files so intermediate
//! products can be regenerated or swapped out. `export` converts any grid
//! file to CSV or copies it byte-exactly.
//!
//! Exit codes: 0 success, 2 configuration error, 3 stage error, 4 I/O
//! error.

use clap::{Parser, Subcommand};
use slantstack::config::ScenarioConfig;
use slantstack::gridfile::{export_plot_data, scenario_hash, ExportFormat, GridFile};
use slantstack::pipeline::{
    self, load_scenario, run_pipeline, stage_filter, stage_invert, stage_localize, stage_radon,
    stage_semblance, stage_synth,
};
use slantstack::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "slantstack",
    version,
    about = "Slant-stack processing for ultra-wideband linear arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Scenario configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for stage files.
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario's noise seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and write all products plus a manifest.
    Pipeline(CommonArgs),
    /// Synthesize the space/time measurement grid.
    Synth(CommonArgs),
    /// Forward slant stack of the space/time grid.
    Radon {
        #[command(flatten)]
        common: CommonArgs,
        /// Input space/time grid (defaults to <out>/spacetime.grid).
        #[arg(long)]
        stage_input: Option<PathBuf>,
    },
    /// Windowed semblance of the space/time grid.
    Semblance {
        #[command(flatten)]
        common: CommonArgs,
        /// Input space/time grid (defaults to <out>/spacetime.grid).
        #[arg(long)]
        stage_input: Option<PathBuf>,
    },
    /// Detect plane-wave bands and mask them out of the Radon grid.
    Filter {
        #[command(flatten)]
        common: CommonArgs,
        /// Input Radon grid (defaults to <out>/radon.grid); the semblance
        /// grid is read from <out>/semblance.grid.
        #[arg(long)]
        stage_input: Option<PathBuf>,
    },
    /// Inverse Radon transform of the filtered grid.
    Invert {
        #[command(flatten)]
        common: CommonArgs,
        /// Input Radon grid (defaults to <out>/radon_filtered.grid).
        #[arg(long)]
        stage_input: Option<PathBuf>,
    },
    /// Localize the near-field source and extract its envelope.
    Localize {
        #[command(flatten)]
        common: CommonArgs,
        /// Input filtered space/time grid (defaults to
        /// <out>/spacetime_filtered.grid); the original measurement is read
        /// from <out>/spacetime.grid.
        #[arg(long)]
        stage_input: Option<PathBuf>,
    },
    /// Convert a grid file to plot-ready data.
    Export {
        /// Grid file to export.
        #[arg(long)]
        stage_input: PathBuf,
        /// Output file path.
        #[arg(long)]
        out: PathBuf,
        /// Output format.
        #[arg(long, value_parser = ["csv", "binary"], default_value = "csv")]
        format: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::Io(_) | Error::GridParse { .. } => 4,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Pipeline(args) => {
            let (_, text) = load_scenario(&args.config)?;
            let report = run_pipeline(&text, &args.out, args.seed)?;
            println!("detected_bands={}", report.bands.len());
            if let Some(pos) = &report.position {
                println!("position_x_m={}", pos.x);
                println!("position_z_m={}", pos.z);
                println!("residual_m={}", pos.residual);
            }
            for (stage, ms) in &report.timings {
                println!("timing_{stage}_ms={ms:.3}");
            }
            println!(
                "wrote {} files to {}",
                report.files.len(),
                args.out.display()
            );
            Ok(())
        }
        Command::Synth(args) => {
            let (r, hash) = resolve(&args)?;
            std::fs::create_dir_all(&args.out)?;
            let data = stage_synth(&r).map_err(|e| e.in_stage("synth"))?;
            let path = args.out.join(pipeline::SPACETIME_FILE);
            GridFile::from_spacetime(&data, &hash).write(&path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Radon {
            common,
            stage_input,
        } => {
            let (r, hash) = resolve(&common)?;
            std::fs::create_dir_all(&common.out)?;
            let input = input_path(&common.out, stage_input, pipeline::SPACETIME_FILE);
            let data = GridFile::read(&input)?.to_spacetime(Some(&r.geometry))?;
            let radon = stage_radon(&r, &data);
            let path = common.out.join(pipeline::RADON_FILE);
            GridFile::from_radon(&radon, &hash).write(&path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Semblance {
            common,
            stage_input,
        } => {
            let (r, hash) = resolve(&common)?;
            std::fs::create_dir_all(&common.out)?;
            let input = input_path(&common.out, stage_input, pipeline::SPACETIME_FILE);
            let data = GridFile::read(&input)?.to_spacetime(Some(&r.geometry))?;
            let semb = stage_semblance(&r, &data).map_err(|e| e.in_stage("semblance"))?;
            let path = common.out.join(pipeline::SEMBLANCE_FILE);
            GridFile::from_semblance(&semb, &hash).write(&path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Filter {
            common,
            stage_input,
        } => {
            let (r, hash) = resolve(&common)?;
            std::fs::create_dir_all(&common.out)?;
            let radon_path = input_path(&common.out, stage_input, pipeline::RADON_FILE);
            let radon = GridFile::read(&radon_path)?.to_radon()?;
            let semb_path = common.out.join(pipeline::SEMBLANCE_FILE);
            let semb = GridFile::read(&semb_path)?.to_semblance(r.window_len, r.window_shape)?;
            let outcome = stage_filter(&r, &radon, &semb).map_err(|e| e.in_stage("filter"))?;
            let filtered_path = common.out.join(pipeline::RADON_FILTERED_FILE);
            GridFile::from_radon(&outcome.filtered, &hash).write(&filtered_path)?;
            let mut text = format!("count={}\n", outcome.bands.len());
            for band in &outcome.bands {
                text.push_str(&format!("band={},{}\n", band.p_low, band.p_high));
            }
            std::fs::write(common.out.join(pipeline::DETECTIONS_FILE), text)?;
            println!(
                "detected {} bands; wrote {}",
                outcome.bands.len(),
                filtered_path.display()
            );
            Ok(())
        }
        Command::Invert {
            common,
            stage_input,
        } => {
            let (r, hash) = resolve(&common)?;
            std::fs::create_dir_all(&common.out)?;
            let input = input_path(&common.out, stage_input, pipeline::RADON_FILTERED_FILE);
            let radon = GridFile::read(&input)?.to_radon()?;
            let st = stage_invert(&r, &radon);
            let path = common.out.join(pipeline::SPACETIME_FILTERED_FILE);
            GridFile::from_spacetime(&st, &hash).write(&path)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Localize {
            common,
            stage_input,
        } => {
            let (r, hash) = resolve(&common)?;
            std::fs::create_dir_all(&common.out)?;
            let input = input_path(&common.out, stage_input, pipeline::SPACETIME_FILTERED_FILE);
            let filtered = GridFile::read(&input)?.to_spacetime(Some(&r.geometry))?;
            let original_path = common.out.join(pipeline::SPACETIME_FILE);
            let original = GridFile::read(&original_path)?.to_spacetime(Some(&r.geometry))?;
            let (pos, env) =
                stage_localize(&r, &filtered, &original).map_err(|e| e.in_stage("localize"))?;
            GridFile::from_envelope(&env, &hash)
                .write(&common.out.join(pipeline::ENVELOPE_FILE))?;
            let peak = env.peak_index();
            let mut text = String::new();
            text.push_str(&format!("sub_array_count={}\n", pos.estimates.len()));
            text.push_str(&format!("position_x_m={}\n", pos.x));
            text.push_str(&format!("position_z_m={}\n", pos.z));
            text.push_str(&format!("residual_m={}\n", pos.residual));
            text.push_str(&format!("envelope_peak_t_s={}\n", env.time.value(peak)));
            std::fs::write(common.out.join(pipeline::LOCALIZATION_FILE), text)?;
            println!(
                "position ({}, {}) m, residual {} m",
                pos.x, pos.z, pos.residual
            );
            Ok(())
        }
        Command::Export {
            stage_input,
            out,
            format,
        } => {
            let format: ExportFormat = format.parse()?;
            export_plot_data(&stage_input, &out, format)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn resolve(args: &CommonArgs) -> Result<(slantstack::config::ResolvedScenario, String), Error> {
    let text = std::fs::read_to_string(&args.config)?;
    let config = ScenarioConfig::from_toml_str(&text)?;
    let mut resolved = config.resolve()?;
    if let Some(seed) = args.seed {
        resolved.seed = seed;
    }
    Ok((resolved, scenario_hash(&text)))
}

fn input_path(out: &Path, stage_input: Option<PathBuf>, default_name: &str) -> PathBuf {
    stage_input.unwrap_or_else(|| out.join(default_name))
}
