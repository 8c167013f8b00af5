//! Command-line front end: `scan`, `dump` and `classify`.
//!
//! Exit codes: 0 success, 1 bad configuration, 2 write failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pathwitness::scan::{
    classify_point, dump_ensemble, parse_angle, parse_grid, parse_mask, parse_range,
    scan_grid_with_jobs, write_result, ConfigFile,
};
use pathwitness::{Error, Tolerances};

#[derive(Parser)]
#[command(
    name = "pathwitness",
    version,
    about = "Signalling-in-time witnesses for a Rabi-oscillating qubit measured at 0, tau and T"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the (tau, T) plane and write witness maps.
    Scan(ScanArgs),
    /// Print the real and virtual paths at one point as JSON.
    Dump(DumpArgs),
    /// Print the regime and all witnesses at one point.
    Classify(PointArgs),
}

#[derive(Args)]
struct ScanArgs {
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// tau range `lo,hi`; accepts multiples of pi such as `pi/4`.
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<String>,
    /// T range `lo,hi`.
    #[arg(long = "T", allow_hyphen_values = true)]
    t_final: Option<String>,
    /// Resolution `N` or `NxM` (n_tau x n_T).
    #[arg(long)]
    grid: Option<String>,
    /// Output file; stdout when omitted (CSV / JSON only).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv, json or pgm.
    #[arg(long)]
    format: Option<String>,
    /// Zero tolerance for witness flags.
    #[arg(long)]
    tol: Option<String>,
    /// Comma-separated subset of delta_P, delta_p, delta_L, regime.
    #[arg(long)]
    witness: Option<String>,
    /// Also evaluate nodes with tau > T.
    #[arg(long)]
    no_constraint: bool,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, allow_hyphen_values = true)]
    tau: String,
    #[arg(long = "T", allow_hyphen_values = true)]
    t_final: String,
    #[arg(long)]
    tol: Option<String>,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Measured slots at (0, tau, T), e.g. `101`.
    #[arg(long, default_value = "111")]
    mask: String,
    /// Keep paths with zero probability or amplitude.
    #[arg(long)]
    all: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::OutputWriteFailure { .. } => 2,
        _ => 1,
    }
}

fn tolerances(tol: Option<&str>) -> Result<Tolerances, Error> {
    let mut t = Tolerances::default();
    if let Some(s) = tol {
        t.zero = parse_angle(s)?;
        if t.zero <= 0.0 {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
    }
    Ok(t)
}

fn run_scan(args: ScanArgs) -> Result<(), Error> {
    let mut file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidConfig(format!("cannot read {}: {e}", path.display()))
            })?;
            ConfigFile::parse(&text)?
        }
        None => ConfigFile::default(),
    };
    let cfg = &mut file.config;
    if let Some(s) = &args.tau {
        cfg.tau_range = parse_range(s)?;
    }
    if let Some(s) = &args.t_final {
        cfg.t_range = parse_range(s)?;
    }
    if let Some(s) = &args.grid {
        cfg.resolution = parse_grid(s)?;
    }
    if let Some(s) = &args.format {
        cfg.format = s.parse()?;
    }
    if let Some(s) = &args.tol {
        cfg.set("tol", s)?;
    }
    if let Some(s) = &args.witness {
        cfg.set("witnesses", s)?;
    }
    if args.no_constraint {
        cfg.constrain = false;
    }
    let out = args.out.or(file.out);
    let jobs = args.jobs.or(file.jobs).unwrap_or(0);

    let result = scan_grid_with_jobs(&file.config, jobs)?;
    let written = write_result(&result, out.as_deref())?;
    let s = &result.summary;
    eprintln!(
        "evaluated {} points ({} skipped): signalling {:.4}, negative quasi-probability {:.4}, LGI violated {:.4}",
        s.evaluated,
        s.skipped,
        s.signalling_fraction,
        s.negativity_fraction,
        s.lgi_violation_fraction
    );
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn run_dump(args: DumpArgs) -> Result<(), Error> {
    let tau = parse_angle(&args.point.tau)?;
    let t_final = parse_angle(&args.point.t_final)?;
    let tol = tolerances(args.point.tol.as_deref())?;
    let mask = parse_mask(&args.mask)?;
    let dump = dump_ensemble(tau, t_final, &mask, args.all, tol.zero)?;
    let text = serde_json::to_string_pretty(&dump).expect("dump is plain JSON") + "\n";
    match args.out {
        Some(path) => {
            std::fs::write(&path, text).map_err(|source| Error::OutputWriteFailure { path, source })
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_classify(args: PointArgs) -> Result<(), Error> {
    let tau = parse_angle(&args.tau)?;
    let t_final = parse_angle(&args.t_final)?;
    let tol = tolerances(args.tol.as_deref())?;
    print!("{}", classify_point(tau, t_final, &tol)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Scan(a) => run_scan(a),
        Command::Dump(a) => run_dump(a),
        Command::Classify(a) => run_classify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
