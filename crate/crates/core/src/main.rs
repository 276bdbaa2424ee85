use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ifed::harness::{self, props, BenchmarkConfig, Outcome};

#[derive(Parser)]
#[command(
    name = "ifed",
    version,
    about = "2D immersed FE/FD benchmarks with IB, BS and CBS kernels"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one benchmark configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        mfac: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run every kernel × MFAC pair, one subdirectory per pair.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        kernels: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        mfacs: Vec<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Runs in flight at once.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Kernel, transfer and material property suite.
    Props {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match real_main(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn real_main(cli: Cli) -> ifed::Result<ExitCode> {
    match cli.cmd {
        Cmd::Run {
            config,
            kernel,
            mfac,
            n,
            out,
        } => {
            let mut cfg = BenchmarkConfig::load(&config)?;
            if let Some(k) = kernel {
                cfg.kernel = k;
            }
            if let Some(m) = mfac {
                cfg.mfac = m;
            }
            if let Some(n) = n {
                cfg.n = n;
            }
            cfg.validate()?;
            let r = harness::run(&cfg)?;
            harness::emit_report(&r, &out)?;
            println!("{}: {:?}", cfg.name, r.outcome);
            if let Some(row) = r.series.rows.last() {
                for (c, v) in r.series.columns.iter().zip(row) {
                    println!("  {c} = {v}");
                }
            }
            Ok(match r.outcome {
                Outcome::Failed { .. } => ExitCode::from(1),
                _ => ExitCode::SUCCESS,
            })
        }
        Cmd::Sweep {
            config,
            kernels,
            mfacs,
            n,
            out,
            jobs,
        } => {
            let mut cfg = BenchmarkConfig::load(&config)?;
            if let Some(n) = n {
                cfg.n = n;
            }
            let cells = harness::sweep(&cfg, &kernels, &mfacs, &out, jobs)?;
            for c in &cells {
                let last: Vec<String> = c
                    .series
                    .columns
                    .iter()
                    .zip(c.series.rows.last().into_iter().flatten())
                    .skip(1)
                    .map(|(k, v)| format!("{k}={v:.6e}"))
                    .collect();
                println!("{:>6} MFAC {:<5} {:?} {}", c.kernel, c.mfac, c.outcome, last.join(" "));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Props { seed } => {
            let checks: Vec<_> = props::kernel_checks(seed)
                .into_iter()
                .chain(props::divergence_checks(seed + 1, 100, 1000))
                .chain(props::transfer_checks(seed + 2, 200))
                .chain(props::material_checks(seed + 3, 100))
                .collect();
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!("{} checks, {failed} failed", checks.len());
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
