//! Benchmark setup, time stepping, reporting and parameter sweeps.

pub mod config;
pub mod driver;
pub mod props;
pub mod report;
pub mod setup;

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use log::info;

pub use config::{BenchmarkConfig, BenchmarkKind, FluidConfig, Scaling, TetherConfig};
pub use driver::{boundary_layer_width, profile_max_rel_error, run, Outcome, ProfileSample, RunResult, Simulation};
pub use props::Check;
pub use report::{emit_report, line_plot, TimeSeries};

use crate::error::{Error, Result};

/// One (kernel, MFAC) cell of a sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub kernel: String,
    pub mfac: f64,
    pub series: TimeSeries,
    pub outcome: Outcome,
}

/// Run `base` for every kernel × MFAC pair, writing each run to its own
/// subdirectory of `dir`, then overlay plots and `summary.csv`.
/// `threads` bounds the number of runs in flight.
pub fn sweep(
    base: &BenchmarkConfig,
    kernels: &[String],
    mfacs: &[f64],
    dir: &Path,
    threads: usize,
) -> Result<Vec<SweepCell>> {
    let mut cfgs = Vec::new();
    for k in kernels {
        for &m in mfacs {
            let mut c = base.clone();
            c.kernel = k.clone();
            c.mfac = m;
            c.validate()?;
            cfgs.push(c);
        }
    }
    std::fs::create_dir_all(dir)?;
    let threads = threads.max(1);
    let mut cells = Vec::with_capacity(cfgs.len());
    for chunk in cfgs.chunks(threads) {
        let done: Vec<Result<SweepCell>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|c| s.spawn(move || run_cell(c, dir))).collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join()
                        .unwrap_or_else(|_| Err(Error::InvalidConfig("sweep worker panicked".into())))
                })
                .collect()
        });
        for d in done {
            cells.push(d?);
        }
    }
    write_summary(&cells, dir)?;
    overlay_plots(base, &cells, dir)?;
    Ok(cells)
}

fn run_cell(cfg: &BenchmarkConfig, dir: &Path) -> Result<SweepCell> {
    info!("sweep cell {}", cfg.cell_label());
    let r = run(cfg)?;
    emit_report(&r, &dir.join(cfg.cell_label()))?;
    Ok(SweepCell {
        kernel: cfg.kernel.clone(),
        mfac: cfg.mfac,
        series: r.series,
        outcome: r.outcome,
    })
}

fn write_summary(cells: &[SweepCell], dir: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("summary.csv"))?));
    let cols: Vec<String> = cells.first().map(|c| c.series.columns.clone()).unwrap_or_default();
    let mut header = vec!["kernel".to_string(), "mfac".into(), "outcome".into(), "t_end".into()];
    header.extend(cols.iter().skip(1).map(|c| format!("final_{c}")));
    header.extend(cols.iter().skip(1).map(|c| format!("maxabs_{c}")));
    w.write_record(&header).map_err(std::io::Error::other)?;
    for c in cells {
        let outcome = match &c.outcome {
            Outcome::Completed => "completed".to_string(),
            Outcome::Steady { .. } => "steady".into(),
            Outcome::Failed { .. } => "failed".into(),
        };
        let mut rec = vec![
            c.kernel.clone(),
            c.mfac.to_string(),
            outcome,
            c.series.last_t().unwrap_or(0.0).to_string(),
        ];
        for col in cols.iter().skip(1) {
            rec.push(c.series.last(col).unwrap_or(f64::NAN).to_string());
        }
        for col in cols.iter().skip(1) {
            rec.push(c.series.max_abs(col).unwrap_or(f64::NAN).to_string());
        }
        w.write_record(&rec).map_err(std::io::Error::other)?;
    }
    w.flush()?;
    Ok(())
}

fn overlay_plots(base: &BenchmarkConfig, cells: &[SweepCell], dir: &Path) -> Result<()> {
    let Some(first) = cells.first() else {
        return Ok(());
    };
    for col in first.series.columns.iter().skip(1) {
        let curves: Vec<(String, Vec<(f64, f64)>)> = cells
            .iter()
            .map(|c| {
                let t = c.series.column("t").unwrap_or_default();
                let y = c.series.column(col).unwrap_or_default();
                (format!("{} MFAC {}", c.kernel, c.mfac), t.into_iter().zip(y).collect())
            })
            .collect();
        let log_y = matches!(col.as_str(), "j_err" | "max_u" | "max_node_speed");
        line_plot(
            &dir.join(format!("{col}.svg")),
            &format!("{} {col}", base.name),
            "t",
            col,
            &curves,
            log_y,
        )?;
    }
    Ok(())
}
