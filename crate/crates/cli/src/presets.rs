//! The four built-in experiments: velocity robustness on the piecewise
//! quadratic source with sine jumps (`table1` for PG2, `table2` for dG) and
//! convergence in `h` and `k` for `f = atan` with `β = 1` (`table3` for PG2,
//! `table4` for dG).
//!
//! The presets compute the oscillation indicator with the constant
//! [`TABLE_POINCARE`] instead of the library default.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use advest_core::Method;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::runner::{fmt_ieff, fmt_sci, run_cell, run_custom, Cell, CellResult, RunError};
use crate::source::SourceSpec;

/// Velocities of the robustness tables.
pub const TABLE_BETAS: [f64; 5] = [1e-4, 1e-2, 1.0, 1e2, 1e4];
/// Element counts of the robustness tables.
pub const ROBUSTNESS_ELEMENTS: [usize; 4] = [4, 16, 64, 256];
/// Oscillation constant used by the presets.
pub const TABLE_POINCARE: f64 = 1.0;
/// Convergence tables stop refining once `η` drops to this level.
pub const HALT_ESTIMATOR: f64 = 1e-14;
/// Largest mesh of the convergence tables.
pub const MAX_ELEMENTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Table1,
    Table2,
    Table3,
    Table4,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Table1, Preset::Table2, Preset::Table3, Preset::Table4];

    pub fn method(self) -> Method {
        match self {
            Preset::Table1 | Preset::Table3 => Method::Pg2,
            Preset::Table2 | Preset::Table4 => Method::Dg,
        }
    }

    fn is_robustness(self) -> bool {
        matches!(self, Preset::Table1 | Preset::Table2)
    }

    /// Polynomial degrees, one block each, in output order (`k' = k`).
    pub fn degrees(self) -> Vec<usize> {
        match self {
            Preset::Table1 | Preset::Table2 => vec![1, 2],
            Preset::Table3 => (0..=4).collect(),
            Preset::Table4 => (1..=4).collect(),
        }
    }

    /// The configuration of the block with degree `k`. For the convergence
    /// tables only the first mesh is listed; refinement is done by
    /// [`run_preset`].
    pub fn config(self, k: usize) -> RunConfig {
        let mut c = RunConfig {
            method: self.method(),
            k,
            kprime: Some(k),
            poincare: TABLE_POINCARE,
            ..RunConfig::default()
        };
        if self.is_robustness() {
            c.elements = ROBUSTNESS_ELEMENTS.to_vec();
            c.betas = TABLE_BETAS.to_vec();
            c.source = SourceSpec::Table81;
        } else {
            c.elements = vec![4];
            c.betas = vec![1.0];
            c.source = SourceSpec::Arctan;
        }
        c
    }

    /// Refinement factor between rows of a convergence table.
    pub fn refinement_factor(self, k: usize) -> usize {
        if k >= 4 {
            2
        } else {
            4
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
            Preset::Table3 => "table3",
            Preset::Table4 => "table4",
        })
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.to_string() == s.trim())
            .ok_or_else(|| format!("unknown preset `{s}` (expected table1, table2, table3 or table4)"))
    }
}

#[derive(Debug, Clone)]
pub struct PresetBlock {
    pub k: usize,
    pub kprime: usize,
    /// Robustness tables: meshes outermost, velocities innermost.
    pub rows: Vec<CellResult>,
}

#[derive(Debug, Clone)]
pub struct PresetOutput {
    pub preset: Preset,
    pub blocks: Vec<PresetBlock>,
}

impl PresetOutput {
    pub fn block(&self, k: usize) -> Option<&PresetBlock> {
        self.blocks.iter().find(|b| b.k == k)
    }

    pub fn results(&self) -> impl Iterator<Item = &CellResult> {
        self.blocks.iter().flat_map(|b| b.rows.iter())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), RunError> {
        let header: Vec<String> = if self.preset.is_robustness() {
            ["elements", "dof"]
                .iter()
                .map(|s| s.to_string())
                .chain(TABLE_BETAS.iter().map(|b| format!("beta={b:e}")))
                .collect()
        } else {
            ["elements", "dof", "eta_nc", "eta_osc", "error", "estimator", "i_eff"]
                .iter()
                .map(|s| s.to_string())
                .collect()
        };
        writeln!(out, "{}", header.join(","))?;
        for block in &self.blocks {
            writeln!(out, "# {} k={} kprime={}", self.preset.method(), block.k, block.kprime)?;
            let mut w = csv::Writer::from_writer(&mut out);
            if self.preset.is_robustness() {
                for row in block.rows.chunks(TABLE_BETAS.len()) {
                    let mut record = vec![row[0].cell.elements.to_string(), row[0].dof.to_string()];
                    record.extend(row.iter().map(|r| fmt_ieff(r.i_eff)));
                    w.write_record(&record)?;
                }
            } else {
                for r in &block.rows {
                    w.write_record([
                        r.cell.elements.to_string(),
                        r.dof.to_string(),
                        fmt_sci(r.eta_nc),
                        fmt_sci(r.eta_osc),
                        r.error.map_or_else(String::new, fmt_sci),
                        fmt_sci(r.estimator),
                        fmt_ieff(r.i_eff),
                    ])?;
                }
            }
            w.flush()?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}

/// Refines from 4 elements until `η ≤` [`HALT_ESTIMATOR`] (that mesh is not
/// listed) or [`MAX_ELEMENTS`] is reached.
fn convergence_block(preset: Preset, k: usize, quad_order: Option<usize>) -> Result<PresetBlock, RunError> {
    let mut config = preset.config(k);
    config.quad_order = quad_order;
    let mut rows = Vec::new();
    let mut elements = config.elements[0];
    loop {
        let cell = Cell {
            method: config.method,
            k,
            kprime: k,
            elements,
            beta: config.betas[0],
        };
        let result = run_cell(&config, cell)?;
        if result.estimator <= HALT_ESTIMATOR {
            break;
        }
        rows.push(result);
        elements *= preset.refinement_factor(k);
        if elements > MAX_ELEMENTS {
            break;
        }
    }
    Ok(PresetBlock { k, kprime: k, rows })
}

/// Runs a preset; `quad_order` overrides the Gauss order for analytic data.
pub fn run_preset(preset: Preset, quad_order: Option<usize>) -> Result<PresetOutput, RunError> {
    let blocks = preset
        .degrees()
        .into_par_iter()
        .map(|k| {
            if preset.is_robustness() {
                let mut config = preset.config(k);
                config.quad_order = quad_order;
                Ok(PresetBlock {
                    k,
                    kprime: k,
                    rows: run_custom(&config)?,
                })
            } else {
                convergence_block(preset, k, quad_order)
            }
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok(PresetOutput { preset, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
        }
        assert!("table5".parse::<Preset>().is_err());
    }

    #[test]
    fn configs_respect_minimum_degrees() {
        for p in Preset::ALL {
            for k in p.degrees() {
                p.config(k).validate().unwrap();
            }
        }
    }
}
