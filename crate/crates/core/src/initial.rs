//! Declarative initial data: constants, cosine modes, boxes, power-law
//! edges around a center, or cell values read from a file.

use crate::pde_solver::mollify;
use crate::torus_field::{ScalarField, TorusGrid};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InitialError {
    #[error("initial_condition.{key}: {msg}")]
    Invalid { key: String, msg: String },
    #[error("initial_condition.profile.path: cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn invalid(key: &str, msg: impl Into<String>) -> InitialError {
    InitialError::Invalid { key: key.into(), msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosineMode {
    /// Integer wavevector, one entry per dimension.
    pub k: Vec<i64>,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    /// Lower corner, one entry per dimension, in `[0, 1]`.
    pub lo: Vec<f64>,
    /// Upper corner, componentwise above `lo`, in `[0, 1]`.
    pub hi: Vec<f64>,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `base + Σ amplitude·cos(2π k·x)`.
    Cosine {
        base: f64,
        modes: Vec<CosineMode>,
    },
    /// Sum of boxes, averaged exactly over each cell.
    Blocks {
        blocks: Vec<Block>,
    },
    /// `c·(1 − |B(r)|/s0)₊^exponent` with `r` the distance from the cell center
    /// to `(½, ½)` and `|B(r)|` the ball measure (`2r` in 1-D, `πr²` in 2-D).
    PowerEdge {
        c: f64,
        s0: f64,
        exponent: f64,
    },
    /// One cell value per line; a trailing column is taken when lines carry coordinates.
    FromFile {
        path: String,
    },
}

/// `"off"` or a Gaussian width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Mollify {
    Word(String),
    Width(f64),
}

impl Default for Mollify {
    fn default() -> Self {
        Mollify::Word("off".into())
    }
}

impl Mollify {
    pub fn width(&self) -> Result<Option<f64>, InitialError> {
        match self {
            Mollify::Word(w) if w == "off" => Ok(None),
            Mollify::Word(w) => Err(invalid("mollify", format!("expected \"off\" or a positive width, got \"{w}\""))),
            Mollify::Width(w) if *w > 0.0 && w.is_finite() => Ok(Some(*w)),
            Mollify::Width(w) => Err(invalid("mollify", format!("width must be positive, got {w}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConditionSpec {
    pub profile: Profile,
    #[serde(default)]
    pub mollify: Mollify,
}

impl InitialConditionSpec {
    pub fn new(profile: Profile) -> Self {
        Self { profile, mollify: Mollify::default() }
    }

    /// Builds the field; relative `from_file` paths resolve against `base_dir`.
    pub fn build(&self, grid: TorusGrid, base_dir: &Path) -> Result<ScalarField, InitialError> {
        let dim = grid.dim();
        let u = match &self.profile {
            Profile::Constant { value } => ScalarField::constant(grid, *value),
            Profile::Cosine { base, modes } => {
                for (i, mode) in modes.iter().enumerate() {
                    if mode.k.len() != dim {
                        return Err(invalid(&format!("profile.modes[{i}].k"), format!("needs {dim} entries, got {}", mode.k.len())));
                    }
                }
                ScalarField::from_fn(grid, |x| {
                    base + modes
                        .iter()
                        .map(|md| {
                            let phase: f64 = md.k.iter().zip(x).map(|(&k, xi)| k as f64 * xi).sum();
                            md.amplitude * (2.0 * PI * phase).cos()
                        })
                        .sum::<f64>()
                })
            }
            Profile::Blocks { blocks } => {
                for (i, b) in blocks.iter().enumerate() {
                    let key = format!("profile.blocks[{i}]");
                    if b.lo.len() != dim || b.hi.len() != dim {
                        return Err(invalid(&key, format!("lo and hi need {dim} entries")));
                    }
                    if b.lo.iter().zip(&b.hi).any(|(l, h)| !(0.0 <= *l && l < h && *h <= 1.0)) {
                        return Err(invalid(&key, "need 0 ≤ lo < hi ≤ 1 on every axis"));
                    }
                }
                blocks_field(grid, blocks)
            }
            Profile::PowerEdge { c, s0, exponent } => {
                if !(*s0 > 0.0 && *s0 < 1.0) {
                    return Err(invalid("profile.s0", format!("must lie in (0, 1), got {s0}")));
                }
                if !(*exponent > 0.0) {
                    return Err(invalid("profile.exponent", format!("must be positive, got {exponent}")));
                }
                ScalarField::from_fn(grid, |x| {
                    let r2: f64 = x[..dim].iter().map(|&xi| (xi - 0.5) * (xi - 0.5)).sum();
                    let ball = if dim == 1 { 2.0 * r2.sqrt() } else { PI * r2 };
                    c * (1.0 - ball / s0).max(0.0).powf(*exponent)
                })
            }
            Profile::FromFile { path } => {
                let full = base_dir.join(path);
                let text = std::fs::read_to_string(&full).map_err(|source| InitialError::Io { path: full.display().to_string(), source })?;
                let values = parse_cell_values(&text)?;
                if values.len() != grid.len() {
                    return Err(invalid("profile.path", format!("{} holds {} values, grid has {} cells", full.display(), values.len(), grid.len())));
                }
                ScalarField::new(grid, values).map_err(|e| invalid("profile.path", e.to_string()))?
            }
        };
        let u = match self.mollify.width()? {
            Some(w) => mollify(&u, w),
            None => u,
        };
        if let Some((i, v)) = u.values().iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid("profile", format!("initial value {v} in cell {i} is negative or non-finite")));
        }
        Ok(u)
    }
}

fn blocks_field(grid: TorusGrid, blocks: &[Block]) -> ScalarField {
    let h = grid.h();
    let overlap = |i: usize, lo: f64, hi: f64| {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        (hi.min(b) - lo.max(a)).max(0.0) / h
    };
    let values = (0..grid.len())
        .map(|flat| {
            let idx = grid.multi_index(flat);
            blocks
                .iter()
                .map(|b| b.height * (0..grid.dim()).map(|a| overlap(idx[a], b.lo[a], b.hi[a])).product::<f64>())
                .sum()
        })
        .collect();
    ScalarField::new(grid, values).expect("length matches grid")
}

fn parse_cell_values(text: &str) -> Result<Vec<f64>, InitialError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let last = line.rsplit(',').next().unwrap_or("").trim();
        match last.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if lineno == 0 => continue,
            Err(_) => return Err(invalid("profile.path", format!("line {}: cannot parse \"{last}\"", lineno + 1))),
        }
    }
    Ok(out)
}
