use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::extend::Extension;
use super::grid::{build_grid, GridSpec};
use super::problem::{Field, Problem};
use super::solve::Solution;
use crate::error::{domain, Result};
use crate::model::{CoefficientField, Potential};
use crate::nfunc::NFunctionSpec;
use crate::optim::{IterRecord, StopReason};

/// On-disk form of a [`Solution`]; enough to rebuild the problem exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionFile {
    pub grid: GridSpec,
    pub alpha: f64,
    pub level: f64,
    pub coefficient: CoefficientField,
    pub far_data: Vec<f64>,
    pub values: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub history: Vec<IterRecord>,
}

impl SolutionFile {
    pub fn from_solution(sol: &Solution) -> Result<Self> {
        let level = match sol.problem.level() {
            Some(l) => l,
            None => return domain("only truncated generators can be saved"),
        };
        Ok(Self {
            grid: sol.problem.grid.spec,
            alpha: sol.alpha(),
            level,
            coefficient: sol.problem.coefficient.clone(),
            far_data: sol.problem.far_data.clone(),
            values: sol.field.values.clone(),
            converged: sol.converged,
            iterations: sol.iterations,
            history: sol.history.clone(),
        })
    }

    pub fn into_solution(self) -> Result<Solution> {
        let grid = Arc::new(build_grid(self.grid)?);
        let problem = Arc::new(Problem::new(
            grid.clone(),
            NFunctionSpec::truncated(self.level)?,
            Potential::quartic(self.alpha)?,
            self.coefficient,
            self.far_data,
        )?);
        let field = Field::new(grid, self.values)?;
        Ok(Solution {
            problem,
            field,
            history: self.history,
            wall_seconds: 0.0,
            converged: self.converged,
            iterations: self.iterations,
            stop: if self.converged {
                StopReason::Converged
            } else {
                StopReason::MaxIter
            },
            profile: None,
            warnings: Vec::new(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(&mut out, self)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    columns: [&'a str; 3],
    rows: Vec<[f64; 3]>,
}

/// Samples the extended field on the lattice, decimated by `stride`.
///
/// Triangle kind: `x,y,u` over `[-R, R]^2`. Sector kind: `rho,theta,u` over
/// the whole disk with `theta` in `[0, 2 pi)`.
pub fn sample_rows(ext: &Extension, stride: usize) -> Result<([&'static str; 3], Vec<[f64; 3]>)> {
    if stride == 0 {
        return domain("stride must be >= 1");
    }
    let g = ext.grid();
    let h = g.h();
    let mut rows = Vec::new();
    match g.spec {
        GridSpec::QuadrantTriangle { n, .. } => {
            let m = n - 1;
            for k in (0..=2 * m).step_by(stride) {
                let y = (k as f64 - m as f64) * h;
                for i in (0..=2 * m).step_by(stride) {
                    let x = (i as f64 - m as f64) * h;
                    rows.push([x, y, ext.eval(x, y)?]);
                }
            }
            Ok((["x", "y", "u"], rows))
        }
        GridSpec::PolarSector { n_rho, n_theta, j, .. } => {
            let dth = g.dtheta().expect("polar grid");
            let n_angles = 4 * j as usize * (n_theta - 1);
            for i in (0..n_rho).step_by(stride) {
                let rho = i as f64 * h;
                for k in (0..n_angles).step_by(stride) {
                    let theta = (k as f64 * dth).min(2.0 * PI);
                    rows.push([rho, theta, ext.eval_polar(rho, theta)?]);
                }
            }
            Ok((["rho", "theta", "u"], rows))
        }
    }
}

/// Writes the extended field to `path`; repeated calls produce identical bytes.
pub fn export_field(ext: &Extension, path: impl AsRef<Path>, format: ExportFormat, stride: usize) -> Result<usize> {
    let (columns, rows) = sample_rows(ext, stride)?;
    let file = std::fs::File::create(path)?;
    match format {
        ExportFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(std::io::BufWriter::new(file));
            w.write_record(columns)?;
            for r in &rows {
                w.write_record(r.iter().map(|v| v.to_string()))?;
            }
            w.flush()?;
        }
        ExportFormat::Json => {
            let mut out = std::io::BufWriter::new(file);
            serde_json::to_writer(&mut out, &JsonTable { columns, rows: rows.clone() })?;
            out.flush()?;
        }
    }
    Ok(rows.len())
}
