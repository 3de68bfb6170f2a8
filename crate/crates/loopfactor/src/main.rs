use clap::{Args, Parser, Subcommand};
use loopfactor::config::{Overrides, RunConfig};
use loopfactor::exit;
use loopfactor::io::{read_loop, to_pretty};
use loopfactor::jobs::{self, BracketJob, BracketKind, Variant, Which};
use loopfactor::study::{limit_rows, write_csv};
use loopfactor::suite::run_suite;
use loopfactor_core::build_cartan_weyl;
use loopfactor_core::rmatrix::{CartanPoint, Chamber};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "loopfactor", version, about = "Loop-group factorization and Poisson-bracket verification")]
#[command(after_help = "A TOML config file may be named by the LOOPFACTOR_CONFIG environment variable; flags override it.")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Rank-plus-one of SU(n).
    #[arg(long, global = true)]
    group_n: Option<usize>,
    /// Mode cutoff N.
    #[arg(long, global = true)]
    cutoff: Option<i64>,
    /// Grid size M (power of two, at least 4N+4).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Algebraic tolerance.
    #[arg(long, global = true, allow_hyphen_values = true)]
    tol_alg: Option<f64>,
    /// Finite-difference tolerance.
    #[arg(long, global = true, allow_hyphen_values = true)]
    tol_fd: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every named invariant check and emit a JSON report.
    Suite,
    /// Factor a loop read from a JSON file.
    Factorize {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "gstar-gl")]
        which: Which,
    },
    /// Evaluate an exchange-relation right-hand side for a loop.
    Bracket {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: BracketKind,
        #[arg(long, value_enum, default_value = "star")]
        variant: Variant,
        #[arg(long)]
        sigma: f64,
        #[arg(long, allow_hyphen_values = true)]
        sigma_prime: f64,
        /// Cartan coordinates of a (comma separated).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        phi: Vec<f64>,
        /// ε′ for the finite-q kinds.
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1)]
        level: i64,
        /// Skip the bivector-route oracle.
        #[arg(long)]
        no_oracle: bool,
    },
    /// Tabulate the elliptic-to-trigonometric limit deviation as CSV.
    LimitStudy {
        /// ε′ values (negative, comma separated; may be empty).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 0..)]
        eps: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        phi: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        sigma: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        level: i64,
    },
    /// Evolve a dual chiral point (k̃ from a file, ã = e^{φH} in A_-).
    Evolve {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        phi: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), i32> {
    match &cfg.out {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            eprintln!("cannot write {}: {e}", p.display());
            exit::RUNTIME
        }),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes()).and_then(|_| s.flush()).map_err(|_| exit::RUNTIME)
        }
    }
}

fn run(cli: Cli) -> Result<i32, i32> {
    let c = cli.common;
    let ov = Overrides { group_n: c.group_n, cutoff: c.cutoff, grid: c.grid, tol_alg: c.tol_alg, tol_fd: c.tol_fd, seed: c.seed, out: c.out };
    let cfg = RunConfig::resolve(&ov).map_err(|e| {
        eprintln!("{e}");
        exit::CONFIG
    })?;
    let load = |p: &PathBuf| {
        read_loop(p).map_err(|e| {
            eprintln!("{e}");
            exit::CONFIG
        })
    };
    let runtime = |e: loopfactor_core::Error| {
        eprintln!("error: {e}");
        exit::RUNTIME
    };
    match cli.cmd {
        Cmd::Suite => {
            let report = run_suite(&cfg);
            emit(&cfg, &to_pretty(&serde_json::to_value(&report).expect("report serializes")))?;
            for r in report.checks.iter().filter(|r| r.status != loopfactor::suite::Status::Pass) {
                eprintln!("{:?}: {} {}", r.status, r.name, r.reason.as_deref().unwrap_or(""));
            }
            Ok(if report.all_pass() { exit::OK } else { exit::CHECK_FAILED })
        }
        Cmd::Factorize { input, which } => {
            let (x, _) = load(&input)?;
            let grid = cfg.grid.max(x.check_grid());
            let (v, ok) = jobs::factorize(&x.with_grid(grid), which);
            emit(&cfg, &to_pretty(&v))?;
            Ok(if ok { exit::OK } else { exit::RUNTIME })
        }
        Cmd::Bracket { input, kind, variant, sigma, sigma_prime, phi, eps, level, no_oracle } => {
            let (x, _) = load(&input)?;
            if kind.needs_phi() && phi.len() != x.n() - 1 {
                eprintln!("config error: --phi needs {} coordinates for this kind, got {}", x.n() - 1, phi.len());
                return Err(exit::CONFIG);
            }
            let needs_eps = matches!(kind, BracketKind::FiniteAK | BracketKind::FiniteKK);
            if needs_eps && eps.is_none() {
                eprintln!("config error: --eps is required for finite-q kinds");
                return Err(exit::CONFIG);
            }
            let job = BracketJob {
                kind,
                variant,
                sigma,
                sigma_prime,
                phi,
                eps_k: eps.map(|e| (e, level)),
                oracle_cutoff: (!no_oracle).then(|| jobs::oracle_cutoff(&cfg)),
            };
            let v = jobs::bracket(&x, &job).map_err(runtime)?;
            emit(&cfg, &to_pretty(&v))?;
            Ok(exit::OK)
        }
        Cmd::LimitStudy { eps, phi, sigma, level } => {
            let cw = build_cartan_weyl(cfg.group_n).map_err(|e| {
                eprintln!("config error: {e}");
                exit::CONFIG
            })?;
            if let Some(e) = eps.iter().find(|e| !(**e < 0.0)) {
                eprintln!("config error: eps values must be negative, got {e}");
                return Err(exit::CONFIG);
            }
            if let Err(e) = CartanPoint::new(&cw, phi.clone(), Chamber::APlus) {
                eprintln!("config error: phi: {e}");
                return Err(exit::CONFIG);
            }
            let rows = limit_rows(&cw, &eps, &phi, &sigma, level);
            let mut buf = Vec::new();
            write_csv(&mut buf, cw.rank, &phi, &rows).map_err(|e| {
                eprintln!("error: {e}");
                exit::RUNTIME
            })?;
            emit(&cfg, &String::from_utf8(buf).expect("csv is utf-8"))?;
            Ok(exit::OK)
        }
        Cmd::Evolve { input, phi, tau, steps } => {
            let (x, _) = load(&input)?;
            let v = jobs::evolve(&x, &phi, tau, steps).map_err(runtime)?;
            emit(&cfg, &to_pretty(&v))?;
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = run(cli).unwrap_or_else(|c| c);
    ExitCode::from(code as u8)
}
