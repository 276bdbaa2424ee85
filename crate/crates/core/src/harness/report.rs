//! Time series, CSV output, field dumps and SVG plots.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use plotters::prelude::*;

use super::config::BenchmarkKind;
use super::driver::{Outcome, RunResult};
use crate::error::{Error, Result};
use crate::grid::io::write_fields;
use crate::lagrangian::io::write_mesh;

/// Rows of diagnostics; the first column is `t` and strictly increases.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    /// Append a row; rows that do not advance `t` are ignored.
    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        if let Some(t) = self.last_t() {
            if !(row[0] > t) {
                return;
            }
        }
        self.rows.push(row);
    }

    pub fn last_t(&self) -> Option<f64> {
        self.rows.last().map(|r| r[0])
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.column(name).and_then(|c| c.last().copied())
    }

    /// Largest absolute value of a column.
    pub fn max_abs(&self, name: &str) -> Option<f64> {
        self.column(name)
            .map(|c| c.iter().fold(0.0, |m, v| f64::max(m, v.abs())))
    }

    /// RFC 4180 CSV with shortest round-trip formatting of each value.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns).map_err(csv_err)?;
        for r in &self.rows {
            out.write_record(r.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let columns = rd.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
        let mut s = Self::new(columns);
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let row = rec
                .iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("csv value `{v}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            s.rows.push(row);
        }
        Ok(s)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Write `series.csv`, `outcome.txt`, the final fluid fields and the
/// deformed structures into `dir`, plus one plot per diagnostic.
pub fn emit_report(result: &RunResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    result
        .series
        .write_csv(BufWriter::new(File::create(dir.join("series.csv"))?))?;
    let outcome = match &result.outcome {
        Outcome::Completed => "completed".to_string(),
        Outcome::Steady { t } => format!("steady {t}"),
        Outcome::Failed { t, reason } => format!("failed {t} {reason}"),
    };
    std::fs::write(dir.join("outcome.txt"), outcome + "\n")?;
    std::fs::write(dir.join("config.toml"), result.sim.cfg.to_toml())?;

    let sim = &result.sim;
    write_fields(
        BufWriter::new(File::create(dir.join("fields.txt"))?),
        &sim.problem.spec,
        &sim.fluid.u,
        &sim.fluid.p,
    )?;
    for (body, state) in sim.problem.bodies.iter().zip(&sim.bodies) {
        write_mesh(
            BufWriter::new(File::create(dir.join(format!("{}_mesh.txt", body.name)))?),
            &body.mesh,
        )?;
        let mut s = TimeSeries::new(
            ["X", "Y", "x", "y", "u", "v", "fx", "fy"]
                .iter()
                .map(|c| c.to_string())
                .collect(),
        );
        for (k, r) in body.mesh.nodes.iter().enumerate() {
            let (x, u, f) = (state.x[k], state.u[k], state.f[k]);
            s.rows.push(vec![r[0], r[1], x[0], x[1], u[0], u[1], f[0], f[1]]);
        }
        s.write_csv(BufWriter::new(File::create(
            dir.join(format!("{}_nodes.csv", body.name)),
        )?))?;
    }

    if sim.problem.kind == BenchmarkKind::Channel {
        let prof = sim.channel_profile(0.5, 200)?;
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("profile.csv"))?));
        w.write_record(["y", "s", "speed", "exact"]).map_err(csv_err)?;
        for p in &prof {
            w.write_record([p.y, p.s, p.speed, p.exact].iter().map(|v| v.to_string()))
                .map_err(csv_err)?;
        }
        w.flush()?;
        let num = prof.iter().map(|p| (p.s, p.speed)).collect();
        let exact = prof.iter().map(|p| (p.s, p.exact)).collect();
        line_plot(
            &dir.join("profile.svg"),
            &format!("{} speed at x = 0.5", sim.cfg.name),
            "s",
            "|u|",
            &[(sim.cfg.kernel.clone(), num), ("exact".into(), exact)],
            false,
        )?;
    }

    let t = result.series.column("t").unwrap_or_default();
    for name in result.series.columns.iter().skip(1) {
        let y = result.series.column(name).unwrap_or_default();
        let pts: Vec<(f64, f64)> = t.iter().copied().zip(y).collect();
        line_plot(
            &dir.join(format!("{name}.svg")),
            &format!("{} {name}", sim.cfg.name),
            "t",
            name,
            &[(sim.cfg.kernel.clone(), pts)],
            false,
        )?;
    }
    Ok(())
}

/// Overlay of several labelled curves. With `log_y`, non-positive values
/// are dropped.
pub fn line_plot(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
    log_y: bool,
) -> Result<()> {
    let plot_err = |e: String| Error::Io(std::io::Error::other(e));
    let clean: Vec<(String, Vec<(f64, f64)>)> = series
        .iter()
        .map(|(l, pts)| {
            let p = pts
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_y || *y > 0.0))
                .map(|&(x, y)| if log_y { (x, y.log10()) } else { (x, y) })
                .collect();
            (l.clone(), p)
        })
        .collect();
    let all = clean.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        let pad = if y0 == 0.0 { 1.0 } else { 0.1 * y0.abs() };
        (y0, y1) = (y0 - pad, y1 + pad);
    }
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| plot_err(e.to_string()))?;
    let y_desc = if log_y {
        format!("log10 {y_label}")
    } else {
        y_label.to_string()
    };
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| plot_err(e.to_string()))?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_desc)
        .draw()
        .map_err(|e| plot_err(e.to_string()))?;
    for (k, (label, pts)) in clean.into_iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        chart
            .draw_series(LineSeries::new(pts, color.stroke_width(2)))
            .map_err(|e| plot_err(e.to_string()))?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    if series.len() > 1 {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(|e| plot_err(e.to_string()))?;
    }
    root.present().map_err(|e| plot_err(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_header_only() {
        let mut s = TimeSeries::new(vec!["t".into(), "a".into()]);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "t,a\n");
        s.push(vec![0.0, 0.1 + 0.2]);
        s.push(vec![0.0, 5.0]);
        s.push(vec![1e-300, -1.0 / 3.0]);
        assert_eq!(s.rows.len(), 2);
        buf.clear();
        s.write_csv(&mut buf).unwrap();
        let back = TimeSeries::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn plot_writes_svg() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.svg");
        let pts = (0..10).map(|k| (k as f64, (k as f64).exp())).collect();
        line_plot(&p, "demo", "t", "y", &[("a".into(), pts), ("b".into(), vec![])], true).unwrap();
        let s = std::fs::read_to_string(&p).unwrap();
        assert!(s.starts_with("<svg"));
    }
}
