//! Command-line front end: demand feasibility checks and the three
//! experiment drivers, with CSV/JSON-lines export.
//!
//! Exit codes: 0 on success, 2 when demands are infeasible, 1 on any other
//! error. The default output directory comes from `--out`, falling back to
//! the `FDSCHED_OUT_DIR` environment variable, then `./results`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fdsched::feasibility::{
    allocate_window_box, longterm_witness_box, witness_schedule, DemandError, TemporalDemands,
};
use fdsched::harness::{
    run_gain_sweep, run_longterm, run_shortterm, DemandsConfig, ExportFormat, HarnessError,
    MetricsReport, SimConfig, SweepAxis,
};

/// Environment variable holding the default output directory.
const OUT_DIR_ENV: &str = "FDSCHED_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "fdsched",
    version,
    about = "Temporal-fair full-duplex scheduling: feasibility checks and simulation runs"
)]
struct Cli {
    /// Output directory for result files (default: $FDSCHED_OUT_DIR, then ./results)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Result file format: csv or jsonl
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check temporal demands and print a witness schedule
    Feasibility {
        /// A TOML file of demand vectors, or inline
        /// "ul=0.125,0.25; dl=0.5,0.25[; ul_max=...; dl_max=...]"
        #[arg(long)]
        demands: String,
        /// Check a finite window of this many slots instead of the long run
        #[arg(long)]
        window: Option<u64>,
    },
    /// Learn thresholds online and record shares/utility per scheduler
    Simulate {
        /// Experiment configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Override the configured master seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Paired full-duplex vs half-duplex gain sweep
    Sweep {
        /// Experiment configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Sweep axis: sim or placement
        #[arg(long)]
        axis: String,
    },
    /// Window-constrained scheduling across window lengths
    Convergence {
        /// Experiment configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated window lengths (default: the config's list)
        #[arg(long)]
        windows: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    let format: ExportFormat = cli.format.parse()?;
    let out_dir = cli
        .out
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"));
    match cli.command {
        Command::Feasibility { demands, window } => {
            let d = load_demands(&demands)?;
            check_feasibility(&d, window)
        }
        Command::Simulate { config, seed } => {
            let mut cfg = SimConfig::from_path(&config)?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            let report = run_longterm(&cfg)?;
            finish(&report, &out_dir, format)
        }
        Command::Sweep { config, axis } => {
            let cfg = SimConfig::from_path(&config)?;
            let axis: SweepAxis = axis.parse()?;
            let report = run_gain_sweep(&cfg, axis)?;
            finish(&report, &out_dir, format)
        }
        Command::Convergence { config, windows } => {
            let cfg = SimConfig::from_path(&config)?;
            let windows = match windows {
                Some(list) => parse_windows(&list)?,
                None => cfg.run.windows.clone(),
            };
            let report = run_shortterm(&cfg, &windows)?;
            finish(&report, &out_dir, format)
        }
    }
}

/// Reads demand vectors from a TOML file (either bare demand keys or a full
/// experiment config) or from the inline `ul=..; dl=..` syntax.
fn load_demands(arg: &str) -> Result<TemporalDemands, HarnessError> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        if let Ok(d) = toml::from_str::<DemandsConfig>(&text) {
            return d.to_demands();
        }
        let cfg: SimConfig = toml::from_str(&text)?;
        return cfg.demands();
    }
    parse_inline_demands(arg)
}

fn parse_inline_demands(arg: &str) -> Result<TemporalDemands, HarnessError> {
    let mut lower_ul = None;
    let mut lower_dl = None;
    let mut upper_ul = None;
    let mut upper_dl = None;
    for segment in arg.split(';') {
        let segment = segment.trim();
        if segment.is_empty() {
            continue;
        }
        let (key, values) = segment.split_once('=').ok_or_else(|| {
            HarnessError::Config(format!(
                "inline demand segment `{segment}` is not of the form key=v1,v2,..."
            ))
        })?;
        let parsed: Result<Vec<f64>, HarnessError> = values
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|e| {
                    HarnessError::Config(format!("bad demand value `{}`: {e}", v.trim()))
                })
            })
            .collect();
        let parsed = parsed?;
        match key.trim() {
            "ul" => lower_ul = Some(parsed),
            "dl" => lower_dl = Some(parsed),
            "ul_max" => upper_ul = Some(parsed),
            "dl_max" => upper_dl = Some(parsed),
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown demand key `{other}` (expected ul, dl, ul_max, dl_max)"
                )))
            }
        }
    }
    let lower_ul = lower_ul
        .ok_or_else(|| HarnessError::Config("inline demands need a `ul=...` segment".into()))?;
    let lower_dl = lower_dl
        .ok_or_else(|| HarnessError::Config("inline demands need a `dl=...` segment".into()))?;
    DemandsConfig { lower_ul, lower_dl, upper_ul, upper_dl }.to_demands()
}

fn parse_windows(list: &str) -> Result<Vec<u64>, HarnessError> {
    list.split(',')
        .map(|w| {
            w.trim()
                .parse::<u64>()
                .map_err(|e| HarnessError::Config(format!("bad window length `{}`: {e}", w.trim())))
        })
        .collect()
}

/// Prints the verdict (and witness when feasible); exit code 2 on an
/// infeasible verdict so scripts can branch on it.
fn check_feasibility(
    d: &TemporalDemands,
    window: Option<u64>,
) -> Result<ExitCode, HarnessError> {
    let n = d.n_users();
    println!("demands ({n} users):");
    println!("  {:>5} {:>9} {:>9} {:>9} {:>9}", "user", "ul_min", "ul_max", "dl_min", "dl_max");
    for i in 0..n {
        println!(
            "  {:>5} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            i, d.lower_ul[i], d.upper_ul[i], d.lower_dl[i], d.upper_dl[i]
        );
    }
    match window {
        None => match longterm_witness_box(d) {
            Ok(w) => {
                println!("verdict: FEASIBLE (long-term)");
                println!("witness long-run schedule (fraction of slots per pairing):");
                print!("  {:>7}", "ul\\dl");
                for j in 0..=n {
                    print!(" {:>8}", label(j));
                }
                println!();
                for i in 0..=n {
                    print!("  {:>7}", label(i));
                    for j in 0..=n {
                        if i == j {
                            print!(" {:>8}", "-");
                        } else {
                            print!(" {:>8.4}", w.fraction(i, j));
                        }
                    }
                    println!();
                }
                println!("  achieved shares:");
                for i in 0..n {
                    println!(
                        "    user {i}: uplink {:.4}, downlink {:.4}",
                        w.share_ul(i),
                        w.share_dl(i)
                    );
                }
                Ok(ExitCode::SUCCESS)
            }
            Err(DemandError::Infeasible(msg)) => {
                println!("verdict: INFEASIBLE (long-term): {msg}");
                Ok(ExitCode::from(2))
            }
            Err(e) => Err(e.into()),
        },
        Some(s) => match allocate_window_box(d, s)? {
            Some(alloc) => {
                println!("verdict: FEASIBLE (window of {s} slots)");
                println!("witness slot counts:");
                for i in 0..n {
                    let ul: u64 = (0..=n).map(|j| alloc.count(i + 1, j)).sum();
                    let dl: u64 = (0..=n).map(|g| alloc.count(g, i + 1)).sum();
                    println!("    user {i}: uplink {ul}, downlink {dl}");
                }
                let slots = witness_schedule(&alloc);
                let shown = slots.len().min(64);
                println!("witness schedule (first {shown} of {} slots):", slots.len());
                for (t, v) in slots.iter().take(shown).enumerate() {
                    println!("    slot {t:>4}: {v}");
                }
                Ok(ExitCode::SUCCESS)
            }
            None => {
                println!(
                    "verdict: INFEASIBLE (window of {s} slots): no integer slot counts \
                     inside the demand bounds can fill the window"
                );
                Ok(ExitCode::from(2))
            }
        },
    }
}

fn label(idx: usize) -> String {
    if idx == 0 {
        "idle".to_string()
    } else {
        format!("u{}", idx - 1)
    }
}

fn finish(
    report: &MetricsReport,
    out_dir: &Path,
    format: ExportFormat,
) -> Result<ExitCode, HarnessError> {
    let paths = report.export(out_dir, format)?;
    print_summaries(report);
    for p in &paths {
        println!("wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn print_summaries(report: &MetricsReport) {
    println!("{} (seed {}):", report.label, report.master_seed);
    println!(
        "  {:<18} {:<9} {:>7} {:>6} {:>12} {:>10} {:>11} {:>9} {:>10} {:>10}",
        "cell",
        "scheduler",
        "window",
        "drops",
        "mean bps/Hz",
        "std err",
        "mean Mbps",
        "gain %",
        "margin",
        "violations"
    );
    for s in &report.summaries {
        let gain = s
            .gain_percent_vs_hd
            .map(|g| format!("{g:>9.2}"))
            .unwrap_or_else(|| format!("{:>9}", "-"));
        println!(
            "  {:<18} {:<9} {:>7} {:>6} {:>12.4} {:>10.4} {:>11.2} {gain} {:>10.4} {:>10}",
            s.cell,
            s.scheduler,
            s.window,
            s.n_drops,
            s.mean_utility_bps_hz,
            s.std_err_bps_hz,
            s.mean_utility_mbps,
            s.min_share_margin,
            s.window_violations
        );
    }
}
