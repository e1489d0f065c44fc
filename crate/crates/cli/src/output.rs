//! CSV tables with 17-significant-digit floats, and the metadata sidecar.

use std::path::{Path, PathBuf};

use echo_rmt::concurrence_cp::CPCurve;
use echo_rmt::fidelity_mc::FidelitySeries;
use echo_rmt::spectator_purity::PuritySeries;

use crate::CliError;

/// One CSV cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Count(usize),
}

impl Cell {
    fn render(self) -> String {
        match self {
            // 1 + 16 digits: enough to round-trip every f64.
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Count(n) => n.to_string(),
        }
    }
}

/// A header plus rows of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

pub const FIDELITY_HEADER: [&str; 6] = ["t_over_tauh", "re_f", "im_f", "stderr_re_f", "F", "stderr_F"];
pub const PURITY_HEADER: [&str; 3] = ["t_over_tauh", "P", "stderr_P"];
pub const CP_HEADER: [&str; 4] = ["P", "C", "stderr_C", "n_samples"];
pub const THEORY_HEADER: [&str; 2] = ["t", "value"];

pub fn fidelity_table(s: &FidelitySeries) -> Table {
    let rows = (0..s.t_over_tau_h.len())
        .map(|j| {
            [s.t_over_tau_h[j], s.mean_re_f[j], s.mean_im_f[j], s.stderr_re_f[j], s.mean_fidelity[j], s.stderr_fidelity[j]]
                .map(Cell::Float)
                .to_vec()
        })
        .collect();
    Table { header: FIDELITY_HEADER.to_vec(), rows }
}

pub fn purity_table(s: &PuritySeries) -> Table {
    let rows =
        (0..s.t_over_tau_h.len()).map(|j| [s.t_over_tau_h[j], s.mean_purity[j], s.stderr_purity[j]].map(Cell::Float).to_vec()).collect();
    Table { header: PURITY_HEADER.to_vec(), rows }
}

pub fn cp_table(curve: &CPCurve) -> Table {
    let rows = curve
        .points
        .iter()
        .map(|p| vec![Cell::Float(p.purity), Cell::Float(p.concurrence), Cell::Float(p.stderr_concurrence), Cell::Count(p.n_samples)])
        .collect();
    Table { header: CP_HEADER.to_vec(), rows }
}

pub fn theory_table(points: &[(f64, f64)]) -> Table {
    let rows = points.iter().map(|&(t, v)| vec![Cell::Float(t), Cell::Float(v)]).collect();
    Table { header: THEORY_HEADER.to_vec(), rows }
}

fn io_error(path: &Path, source: impl Into<std::io::Error>) -> CliError {
    CliError::Io { path: path.display().to_string(), source: source.into() }
}

/// Writes `table` to `path`. An empty table is refused.
pub fn write_table(table: &Table, path: &Path) -> Result<(), CliError> {
    if table.rows.is_empty() {
        return Err(CliError::Numerical(format!("refusing to write an empty series to {}", path.display())));
    }
    if let Some(bad) = table.rows.iter().find(|r| r.len() != table.header.len()) {
        return Err(CliError::Numerical(format!("row of width {} under a header of width {}", bad.len(), table.header.len())));
    }
    let mut writer = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    writer.write_record(&table.header).map_err(|e| io_error(path, e))?;
    for row in &table.rows {
        writer.write_record(row.iter().map(|c| c.render())).map_err(|e| io_error(path, e))?;
    }
    writer.flush().map_err(|e| io_error(path, e))
}

/// Reads a table written by [`write_table`]: the header and every cell as `f64`.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let header = reader.headers().map_err(|e| io_error(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| io_error(path, e))?;
        let row = record
            .iter()
            .map(|cell| cell.parse::<f64>().map_err(|e| CliError::Config(format!("{}: bad number '{cell}': {e}", path.display()))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// `results.csv` → `results.meta`.
pub fn sidecar_path(primary: &Path) -> PathBuf {
    primary.with_extension("meta")
}

/// `base.csv` → `base_<suffix>.csv`.
pub fn companion_path(primary: &Path, suffix: &str) -> PathBuf {
    let stem = primary.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = primary.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    primary.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

/// Writes the sidecar: the resolved flags as a config file that re-runs the experiment,
/// followed by commented run information.
pub fn write_sidecar(
    primary: &Path,
    command: &str,
    flags: &[(String, String)],
    metadata: &[(String, String)],
    wall_time: f64,
) -> Result<(), CliError> {
    let mut text = format!("# echo-rmt {} {command}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in flags {
        text.push_str(&format!("{k} = {v}\n"));
    }
    text.push_str(&format!("# version = {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# wall_time_s = {wall_time:.3}\n"));
    for (k, v) in metadata {
        text.push_str(&format!("# {k} = {v}\n"));
    }
    let path = sidecar_path(primary);
    std::fs::write(&path, text).map_err(|e| io_error(&path, e))
}
