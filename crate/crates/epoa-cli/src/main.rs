//! Command-line front end for the auction-log analysis pipeline.
//!
//! Subcommands: `synth` (generate seeded synthetic datasets), `curves`
//! (interim allocation/payment and threshold curves as CSV), `epoa` (full
//! analysis report with optional bootstrap and mode comparison), `report`
//! (re-render a JSON report as markdown or CSV).
//!
//! Exit codes: 0 success, 2 parse/validation/spec errors, 3 bid cap too
//! low, 4 zero revenue, 1 anything else.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use epoa_core::analysis::{
    AnalysisConfig, BootstrapConfig, EpoaReport, ValueGridSpec, analyze,
    compare_correlation_modes,
};
use epoa_core::dataset::{AuctionDataset, DatasetConfig, Format, load_dataset, summarize};
use epoa_core::interim::{BidGrid, EstimationMode, estimate_curves};
use epoa_core::synth::{SynthSpec, generate};
use epoa_core::thresholds::{all_thresholds, write_thresholds_csv};
use epoa_core::Error;

#[derive(Parser)]
#[command(name = "epoa", version, about = "Empirical price-of-anarchy analysis for position auctions")]
struct Cli {
    /// Worker threads; defaults to the available parallelism. Results are
    /// independent of this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum ModeArg {
    Joint,
    Independent,
    Both,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum ReportFormat {
    Json,
    Csv,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset (plus ground truth) from a spec file.
    Synth {
        /// JSON generator spec.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Override the spec's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Estimate interim curves and threshold curves, exported as CSV.
    Curves {
        #[arg(long)]
        input: PathBuf,
        /// Dataset config JSON (bid cap, value cap, pricing, CSV context).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Input format; inferred from the extension when omitted.
        #[arg(long)]
        input_format: Option<InputFormat>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long, value_enum, default_value = "joint")]
        mode: ModeArg,
        #[arg(long)]
        mc_profiles: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Full analysis: covering, value covering, bounds, bootstrap.
    Epoa {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input_format: Option<InputFormat>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "joint")]
        mode: ModeArg,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        mc_profiles: Option<usize>,
        #[arg(long)]
        value_cap: Option<f64>,
        /// Bootstrap replicates; omit to skip the bootstrap.
        #[arg(long)]
        bootstrap: Option<usize>,
        /// Bootstrap confidence level.
        #[arg(long, default_value_t = 0.9)]
        level: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Concentration parameter k for the table-based bound.
        #[arg(long)]
        conc_k: Option<f64>,
        /// Report formats to write (the JSON report is always written).
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![ReportFormat::Json, ReportFormat::Md])]
        format: Vec<ReportFormat>,
        /// Skip the half-resolution grid sensitivity diagnostic.
        #[arg(long)]
        no_grid_sensitivity: bool,
    },
    /// Summarize a dataset (per-bidder averages, revenue).
    Summary {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input_format: Option<InputFormat>,
    },
    /// Re-render a JSON report as markdown or CSV.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: ReportFormat,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: could not configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::Validation { .. }
        | Error::Spec(_)
        | Error::MalformedContext(_)
        | Error::Domain { .. }
        | Error::NonPositiveMu(_) => 2,
        Error::BidCapTooLow { .. } => 3,
        Error::ZeroRevenue => 4,
        _ => 1,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Synth { spec, out_dir, seed } => cmd_synth(&spec, &out_dir, seed),
        Command::Curves {
            input,
            config,
            input_format,
            out_dir,
            grid_points,
            mode,
            mc_profiles,
            seed,
        } => cmd_curves(
            &input,
            config.as_deref(),
            input_format,
            &out_dir,
            grid_points,
            mode,
            mc_profiles,
            seed,
        ),
        Command::Epoa {
            input,
            config,
            input_format,
            out_dir,
            mode,
            grid_points,
            mc_profiles,
            value_cap,
            bootstrap,
            level,
            seed,
            conc_k,
            format,
            no_grid_sensitivity,
        } => cmd_epoa(CmdEpoa {
            input,
            config,
            input_format,
            out_dir,
            mode,
            grid_points,
            mc_profiles,
            value_cap,
            bootstrap,
            level,
            seed,
            conc_k,
            report_format: format,
            no_grid_sensitivity,
        }),
        Command::Summary { input, config, input_format } => {
            let ds = read_dataset(&input, config.as_deref(), input_format)?;
            let summary = summarize(&ds)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(())
        }
        Command::Report { input, format, out } => cmd_report(&input, format, out.as_deref()),
    }
}

fn read_config(path: Option<&Path>) -> Result<Option<DatasetConfig>, Error> {
    match path {
        None => Ok(None),
        Some(p) => {
            let file = File::open(p)?;
            let cfg: DatasetConfig = serde_json::from_reader(BufReader::new(file))?;
            Ok(Some(cfg))
        }
    }
}

fn read_dataset(
    input: &Path,
    config: Option<&Path>,
    format: Option<InputFormat>,
) -> Result<AuctionDataset, Error> {
    let cfg = read_config(config)?;
    let format = match format {
        Some(InputFormat::Jsonl) => Format::Jsonl,
        Some(InputFormat::Csv) => Format::Csv,
        None => match input.extension().and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            _ => Format::Jsonl,
        },
    };
    let file = File::open(input)?;
    load_dataset(BufReader::new(file), format, cfg.as_ref())
}

fn cmd_synth(spec_path: &Path, out_dir: &Path, seed: Option<u64>) -> Result<(), Error> {
    let file = File::open(spec_path)?;
    let mut spec: SynthSpec = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Error::Spec(format!("bad generator spec: {e}")))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let (ds, ground_truth) = generate(&spec)?;
    fs::create_dir_all(out_dir)?;
    let mut w = BufWriter::new(File::create(out_dir.join("dataset.jsonl"))?);
    ds.write_jsonl(&mut w)?;
    w.flush()?;
    write_json(&out_dir.join("config.json"), &ds.config())?;
    if let Some(gt) = &ground_truth {
        write_json(&out_dir.join("ground_truth.json"), gt)?;
    }
    println!(
        "wrote {} auctions x {} bidders to {}",
        ds.n_records(),
        ds.n_bidders(),
        out_dir.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_curves(
    input: &Path,
    config: Option<&Path>,
    input_format: Option<InputFormat>,
    out_dir: &Path,
    grid_points: Option<usize>,
    mode: ModeArg,
    mc_profiles: Option<usize>,
    seed: Option<u64>,
) -> Result<(), Error> {
    let mode = match mode {
        ModeArg::Joint => EstimationMode::Joint,
        ModeArg::Independent => EstimationMode::Independent,
        ModeArg::Both => return Err(Error::Spec("curves supports joint or independent".into())),
    };
    if mode == EstimationMode::Independent && seed.is_none() {
        return Err(Error::Spec("--seed is required in independent mode".into()));
    }
    let ds = read_dataset(input, config, input_format)?;
    let points = grid_points.or(ds.grid_points).unwrap_or(201);
    let grid = BidGrid::geometric(ds.bid_cap, points.max(1));
    let curves = estimate_curves(&ds, &grid, mode, mc_profiles.unwrap_or(200), seed.unwrap_or(0))?;
    fs::create_dir_all(out_dir.join("curves"))?;
    // One CSV per bidder plus a combined file.
    let mut combined = Vec::new();
    curves.write_csv(&ds.bidder_ids, &mut combined)?;
    fs::write(out_dir.join("curves.csv"), &combined)?;
    for (i, id) in ds.bidder_ids.iter().enumerate() {
        let safe: String = id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        let path = out_dir.join("curves").join(format!("{i:03}_{safe}.csv"));
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "bidder_id,bid,alloc,pay")?;
        for (g, b) in curves.grid.points().iter().enumerate() {
            writeln!(w, "{id},{b},{},{}", curves.alloc(i)[g], curves.pay(i)[g])?;
        }
        w.flush()?;
    }
    let (thresholds, excluded) = all_thresholds(&ds, &curves);
    let mut tbuf = Vec::new();
    write_thresholds_csv(&ds, &thresholds, &mut tbuf)?;
    fs::write(out_dir.join("thresholds.csv"), &tbuf)?;
    write_json(
        &out_dir.join("diagnostics.json"),
        &serde_json::json!({
            "n_bidders": ds.n_bidders(),
            "n_records": ds.n_records(),
            "grid_points": grid.len(),
            "excluded_bidders": excluded,
        }),
    )?;
    println!("wrote curves for {} bidders to {}", ds.n_bidders(), out_dir.display());
    Ok(())
}

struct CmdEpoa {
    input: PathBuf,
    config: Option<PathBuf>,
    input_format: Option<InputFormat>,
    out_dir: PathBuf,
    mode: ModeArg,
    grid_points: Option<usize>,
    mc_profiles: Option<usize>,
    value_cap: Option<f64>,
    bootstrap: Option<usize>,
    level: f64,
    seed: Option<u64>,
    conc_k: Option<f64>,
    report_format: Vec<ReportFormat>,
    no_grid_sensitivity: bool,
}

fn cmd_epoa(args: CmdEpoa) -> Result<(), Error> {
    let stochastic = args.mode != ModeArg::Joint || args.bootstrap.is_some();
    if stochastic && args.seed.is_none() {
        return Err(Error::Spec(
            "--seed is required when independent mode or bootstrap is enabled".into(),
        ));
    }
    let seed = args.seed.unwrap_or(0);
    let ds = read_dataset(&args.input, args.config.as_deref(), args.input_format)?;
    let config = AnalysisConfig {
        grid_points: args.grid_points.or(ds.grid_points).unwrap_or(201),
        mode: EstimationMode::Joint,
        mc_profiles: args.mc_profiles.unwrap_or(200),
        seed,
        value_grid: ValueGridSpec {
            cap: args.value_cap,
            ..ValueGridSpec::default()
        },
        conc_k: args.conc_k,
        bootstrap: args.bootstrap.map(|replicates| BootstrapConfig {
            replicates,
            level: args.level,
            seed: seed ^ 0x6f0a_1db3_5c84_92e7,
        }),
        grid_sensitivity: !args.no_grid_sensitivity,
    };
    fs::create_dir_all(&args.out_dir)?;
    match args.mode {
        ModeArg::Joint | ModeArg::Independent => {
            let config = AnalysisConfig {
                mode: if args.mode == ModeArg::Joint {
                    EstimationMode::Joint
                } else {
                    EstimationMode::Independent
                },
                ..config
            };
            let report = analyze(&ds, &config)?;
            write_report_files(&args.out_dir, "report", &report, &args.report_format)?;
            println!(
                "1/EPoA = {:.4} (mu1 = {:.4}, lambda1 = {:.4})",
                report.inv_epoa_final, report.mu1, report.lambda1
            );
        }
        ModeArg::Both => {
            let cmp = compare_correlation_modes(&ds, &config)?;
            write_report_files(&args.out_dir, "report_joint", &cmp.joint, &args.report_format)?;
            write_report_files(
                &args.out_dir,
                "report_independent",
                &cmp.independent,
                &args.report_format,
            )?;
            write_json(
                &args.out_dir.join("comparison.json"),
                &serde_json::json!({
                    "epoa_final_joint": cmp.joint.epoa_final,
                    "epoa_final_independent": cmp.independent.epoa_final,
                    "tolerance": cmp.tolerance,
                    "ordering_holds": cmp.ordering_holds,
                }),
            )?;
            println!(
                "joint 1/EPoA = {:.4}, independent 1/EPoA = {:.4}, ordering_holds = {}",
                cmp.joint.inv_epoa_final, cmp.independent.inv_epoa_final, cmp.ordering_holds
            );
        }
    }
    Ok(())
}

fn write_report_files(
    out_dir: &Path,
    stem: &str,
    report: &EpoaReport,
    formats: &[ReportFormat],
) -> Result<(), Error> {
    let mut formats = formats.to_vec();
    if !formats.contains(&ReportFormat::Json) {
        formats.push(ReportFormat::Json);
    }
    for f in formats {
        match f {
            ReportFormat::Json => write_json(&out_dir.join(format!("{stem}.json")), report)?,
            ReportFormat::Md => {
                fs::write(out_dir.join(format!("{stem}.md")), report.to_markdown())?
            }
            ReportFormat::Csv => {
                fs::write(out_dir.join(format!("{stem}.csv")), report.to_csv())?
            }
        }
    }
    Ok(())
}

fn cmd_report(input: &Path, format: ReportFormat, out: Option<&Path>) -> Result<(), Error> {
    let file = File::open(input)?;
    let report: EpoaReport = serde_json::from_reader(BufReader::new(file))?;
    let rendered = match format {
        ReportFormat::Md => report.to_markdown(),
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
    };
    match out {
        Some(p) => fs::write(p, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}
