//! Persisted runs and tabular outputs.
//!
//! Every float is written as a decimal with 17 significant digits, which
//! identifies an `f64` uniquely, so files round-trip bit-exactly.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::analysis::AnalysisReport;
use crate::error::{GeimError, Result};
use crate::greedy::GreedyResult;
use crate::interp::InterpolationSystem;
use crate::space::{DiscreteFunction, FunctionSet, Functional, Grid, NormMode};

pub const ARTIFACT_VERSION: u32 = 1;

/// Decimal text of `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Pretty JSON with every float printed by [`fmt_f64`].
struct ExactFloats<'a>(PrettyFormatter<'a>);

impl Formatter for ExactFloats<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serialize `value` as pretty JSON with exact floats and a trailing newline.
pub fn to_exact_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_exact_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_exact_json(value)?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridData {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histories {
    pub selected_phi_index: Vec<usize>,
    pub selected_sigma_index: Vec<usize>,
    pub eps_history: Vec<f64>,
    pub max_residual: Vec<f64>,
    pub effective_eta: Vec<f64>,
    pub trailing_eta: f64,
    pub trailing_max_residual: f64,
    pub stopped_early: bool,
}

/// A greedy run: basis, functional densities, `B` (row-major) and histories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactFile {
    pub version: u32,
    pub mode: NormMode,
    pub grid: GridData,
    pub basis_q: Vec<Vec<f64>>,
    pub selected_sigma: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub histories: Histories,
}

impl ArtifactFile {
    pub fn from_result(result: &GreedyResult) -> Self {
        let system = &result.system;
        let grid = system
            .grid()
            .map(|g| GridData { points: g.points().to_vec(), weights: g.weights().to_vec() })
            .unwrap_or(GridData { points: Vec::new(), weights: Vec::new() });
        let b = (0..system.b.nrows()).map(|i| system.b.row(i).iter().cloned().collect()).collect();
        Self {
            version: ARTIFACT_VERSION,
            mode: system.mode,
            grid,
            basis_q: system.basis.iter().map(|q| q.values().to_vec()).collect(),
            selected_sigma: system.functionals.iter().map(|s| s.weights().to_vec()).collect(),
            b,
            histories: Histories {
                selected_phi_index: result.selected_phi_index.clone(),
                selected_sigma_index: result.selected_sigma_index.clone(),
                eps_history: result.eps_history.clone(),
                max_residual: result.max_residual.clone(),
                effective_eta: result.effective_eta.clone(),
                trailing_eta: result.trailing_eta,
                trailing_max_residual: result.trailing_max_residual,
                stopped_early: result.stopped_early,
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        to_exact_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let a: Self = serde_json::from_str(text)?;
        if a.version != ARTIFACT_VERSION {
            return Err(GeimError::InvalidConfig(format!(
                "unsupported artifact version {} (expected {ARTIFACT_VERSION})",
                a.version
            )));
        }
        Ok(a)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(self.grid.points.clone(), self.grid.weights.clone())?))
    }

    /// Rebuild the interpolation system with the stored `B`.
    pub fn to_system(&self) -> Result<InterpolationSystem> {
        self.build_system(self.grid()?)
    }

    /// As [`Self::to_system`], sharing `grid`, which must equal the stored grid.
    pub fn to_system_on(&self, grid: &Arc<Grid>) -> Result<InterpolationSystem> {
        if *self.grid()? != **grid {
            return Err(GeimError::GridMismatch);
        }
        self.build_system(grid.clone())
    }

    fn build_system(&self, grid: Arc<Grid>) -> Result<InterpolationSystem> {
        let n = self.basis_q.len();
        let basis =
            self.basis_q.iter().map(|v| DiscreteFunction::new(grid.clone(), v.clone())).collect::<Result<Vec<_>>>()?;
        let functionals =
            self.selected_sigma.iter().map(|v| Functional::new(grid.clone(), v.clone())).collect::<Result<Vec<_>>>()?;
        if self.b.len() != n || self.b.iter().any(|r| r.len() != n) {
            return Err(GeimError::SizeMismatch { expected: n, got: self.b.len() });
        }
        let b = DMatrix::from_fn(n, n, |i, j| self.b[i][j]);
        InterpolationSystem::from_parts(self.mode, basis, functionals, b)
    }

    /// Rebuild the full greedy result against the regenerated snapshot set.
    pub fn to_result(&self, set: &FunctionSet) -> Result<GreedyResult> {
        let system = self.to_system_on(set.grid())?;
        let h = &self.histories;
        let selected_phi = h
            .selected_phi_index
            .iter()
            .map(|&i| set.get(i).cloned().ok_or(GeimError::OutOfRange { index: i, available: set.len() }))
            .collect::<Result<Vec<_>>>()?;
        Ok(GreedyResult {
            system,
            selected_phi,
            selected_phi_index: h.selected_phi_index.clone(),
            selected_sigma_index: h.selected_sigma_index.clone(),
            eps_history: h.eps_history.clone(),
            max_residual: h.max_residual.clone(),
            effective_eta: h.effective_eta.clone(),
            stopped_early: h.stopped_early,
            trailing_eta: h.trailing_eta,
            trailing_max_residual: h.trailing_max_residual,
        })
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

/// `greedy.csv`: one row per selected snapshot.
pub fn write_greedy_csv(path: &Path, result: &GreedyResult) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["n", "eps_n", "effective_eta", "selected_phi_index", "selected_sigma_index"])?;
    for n in 0..result.len() {
        w.write_record([
            n.to_string(),
            fmt_f64(result.eps_history[n]),
            fmt_f64(result.effective_eta[n]),
            result.selected_phi_index[n].to_string(),
            result.selected_sigma_index[n].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Column names of `analysis.csv`.
pub const ANALYSIS_COLUMNS: [&str; 9] =
    ["n", "tau", "d", "lambda", "beta", "gamma", "lebesgue_upper", "eps_max", "eta"];

/// `analysis.csv`, followed by `#`-prefixed footer lines with flags and spot checks.
pub fn write_analysis_csv(path: &Path, report: &AnalysisReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(ANALYSIS_COLUMNS)?;
    for n in 0..=report.n {
        w.write_record([
            n.to_string(),
            fmt_f64(report.tau[n]),
            fmt_f64(report.d[n]),
            fmt_f64(report.lambda[n]),
            report.beta[n].map(fmt_f64).unwrap_or_default(),
            fmt_f64(report.gamma[n]),
            fmt_f64(report.lebesgue_upper[n]),
            fmt_f64(report.eps_max[n]),
            fmt_f64(report.eta[n]),
        ])?;
    }
    w.flush()?;
    drop(w);
    let mut footer = format!("# mode={}\n# hilbert_surrogate={}\n", mode_name(report.mode), report.hilbert_surrogate);
    for (name, ok) in report.spot_checks() {
        footer.push_str(&format!("# check {name}: {}\n", if ok { "ok" } else { "violated" }));
    }
    let mut f = fs::OpenOptions::new().append(true).open(path)?;
    f.write_all(footer.as_bytes())?;
    Ok(())
}

fn mode_name(mode: NormMode) -> &'static str {
    match mode {
        NormMode::Hilbert => "hilbert",
        NormMode::Sup => "sup",
    }
}

/// Two-column decay series `n,<name>` for `n = 0..seq.len()`.
pub fn write_series_csv(path: &Path, name: &str, seq: &[f64]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["n", name])?;
    for (n, v) in seq.iter().enumerate() {
        w.write_record([n.to_string(), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// `x,value` rows of a grid function.
pub fn write_field_csv(path: &Path, f: &DiscreteFunction) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x", "value"])?;
    for (x, v) in f.grid().points().iter().zip(f.values()) {
        w.write_record([fmt_f64(*x), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Measurements `m_0, m_1, …`: a CSV with a header and the value in the last
/// column (a single `value` column or `i,value`).
pub fn read_measurements(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let field =
            rec.iter().next_back().ok_or_else(|| GeimError::InvalidConfig(format!("row {} is empty", row + 1)))?;
        let v: f64 = field
            .parse()
            .map_err(|_| GeimError::InvalidConfig(format!("row {}: cannot parse {field:?} as a number", row + 1)))?;
        if !v.is_finite() {
            return Err(GeimError::NonFinite(row));
        }
        out.push(v);
    }
    Ok(out)
}

/// Report as exact JSON.
pub fn write_report_json(path: &Path, report: &AnalysisReport) -> Result<()> {
    write_exact_json(path, report)
}

pub fn read_report_json(path: &Path) -> Result<AnalysisReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        for x in [0.1, 1.0 / 3.0, -2.5e-300, f64::MAX, f64::MIN_POSITIVE, 5e-324] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn json_floats_are_exact() {
        let v = vec![0.1, 1.0 / 3.0, 1e-17];
        let s = to_exact_json(&v).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(v, back);
        assert_eq!(to_exact_json(&back).unwrap(), s);
    }
}
