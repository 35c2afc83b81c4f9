use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lsi_lab::bounds::{self, BoundsConfig, SlackReport, Verdict};
use lsi_lab::density::DensitySpec;
use lsi_lab::numerics::{QuadratureConfig, TimeQuadrature};
use lsi_lab::report;
use lsi_lab::Error;

#[derive(Parser)]
#[command(
    name = "lsi-lab",
    version,
    about = "Deficit, Stein and transport diagnostics for densities relative to the standard Gaussian"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Functionals, Stein estimates, W2 and the inequality catalog as JSON.
    Analyze {
        spec: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Inequality catalog; exit status 1 if any check fails. Accepts a
    /// directory of specs, writing one report per spec into --out.
    Verify {
        spec: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// CSV of flow diagnostics along the Ornstein-Uhlenbeck semigroup.
    Flow {
        spec: PathBuf,
        /// Comma-separated times (default 0, 0.1, ..., 10).
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args)]
struct Flags {
    /// Absolute tolerance of adaptive rules.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Gauss-Hermite order (per axis in 2-D).
    #[arg(long, default_value_t = 128)]
    gh_order: usize,
    #[arg(long, default_value_t = 0.05)]
    time_split: f64,
    #[arg(long, default_value_t = 12.0)]
    time_max: f64,
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0x5eed_1d0c)]
    seed: u64,
    /// Output file (or directory for `verify` on a directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Flags {
    fn config(&self) -> Result<BoundsConfig, Error> {
        let q = QuadratureConfig {
            gh_order_1d: self.gh_order,
            gh_order_2d: self.gh_order,
            tol: self.tol,
            mc_samples: self.mc_samples,
            seed: self.seed,
        };
        q.validate()?;
        let t = TimeQuadrature { t_split: self.time_split, t_max: self.time_max, tol: self.tol };
        t.validate()?;
        Ok(BoundsConfig::new(q, t))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InequalityViolation { .. } => 1,
        Error::InvalidDensity(_)
        | Error::InvalidConfig(_)
        | Error::UnsupportedFamily(_)
        | Error::UnsupportedKind(_)
        | Error::Precondition(_)
        | Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_) => 2,
        Error::DegenerateConditioning | Error::ToleranceExceeded { .. } => 3,
    }
}

fn load(path: &Path) -> Result<(DensitySpec, lsi_lab::density::RelativeDensity), Error> {
    let spec = DensitySpec::from_path(path).map_err(|e| match e {
        Error::Io(e) => Error::InvalidConfig(format!("{}: {e}", path.display())),
        Error::Json(e) => Error::InvalidDensity(format!("{}: {e}", path.display())),
        e => e,
    })?;
    let d = spec.build()?;
    Ok((spec, d))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn verify_one(path: &Path, cfg: &BoundsConfig) -> Result<Vec<SlackReport>, Error> {
    let (spec, d) = load(path)?;
    let hash = spec.hash();
    let mut reports = bounds::verify_all(&d, cfg)?;
    for r in &mut reports {
        r.spec_hash = Some(hash.clone());
    }
    Ok(reports)
}

fn any_fail(reports: &[SlackReport]) -> bool {
    reports.iter().any(|r| r.verdict == Verdict::Fail)
}

fn verify(spec: &Path, cfg: &BoundsConfig, out: Option<&Path>) -> Result<bool, Error> {
    if !spec.is_dir() {
        let reports = verify_one(spec, cfg)?;
        emit(&report::to_json(&reports)?, out)?;
        return Ok(any_fail(&reports));
    }
    let out = out.ok_or_else(|| Error::InvalidConfig("verify on a directory needs --out DIR".into()))?;
    fs::create_dir_all(out)?;
    let mut specs: Vec<PathBuf> = fs::read_dir(spec)?.map(|e| e.map(|e| e.path())).collect::<io::Result<_>>()?;
    specs.retain(|p| p.extension().is_some_and(|e| e == "json"));
    specs.sort();
    let mut failed = false;
    for p in &specs {
        let reports = verify_one(p, cfg)?;
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("spec");
        fs::write(out.join(format!("{stem}.report.json")), report::to_json(&reports)?)?;
        for r in reports.iter().filter(|r| r.verdict == Verdict::Fail) {
            eprintln!("{}: {} failed (slack {:?})", p.display(), r.check, r.slack);
        }
        failed |= any_fail(&reports);
    }
    Ok(failed)
}

fn run(cli: Cli) -> Result<bool, Error> {
    let flags = match &cli.command {
        Command::Analyze { flags, .. } | Command::Verify { flags, .. } | Command::Flow { flags, .. } => flags,
    };
    let cfg = flags.config()?;
    if let Some(n) = flags.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    let out = flags.out.as_deref();
    match &cli.command {
        Command::Analyze { spec, .. } => {
            let (s, d) = load(spec)?;
            let r = report::analyze(&d, &s.hash(), &cfg)?;
            emit(&report::to_json(&r)?, out)?;
            Ok(any_fail(&r.checks))
        }
        Command::Verify { spec, .. } => verify(spec, &cfg, out),
        Command::Flow { spec, times, .. } => {
            let (_, d) = load(spec)?;
            let ts = times.clone().unwrap_or_else(report::default_flow_times);
            let rows = report::flow_rows(&d, &ts, &cfg)?;
            match out {
                Some(p) => report::write_flow_csv(&rows, fs::File::create(p)?)?,
                None => report::write_flow_csv(&rows, io::stdout().lock())?,
            }
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("lsi-lab: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
