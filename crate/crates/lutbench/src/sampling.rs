//! Experiment designs over the atmospheric variable space: Latin hypercube
//! samples, bound-space vertices, and their merge.
//!
//! A design is always deterministic in `(n, specs, seed)`; see [`crate::rng`]
//! for the generator contract that makes that reproducible across
//! implementations.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::SplitMix64;

/// One input variable with its physical bounds. `min == max` denotes a
/// frozen variable and is allowed; `min > max` is rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub units: String,
    pub min: f64,
    pub max: f64,
}

impl VariableSpec {
    pub fn new(name: &str, units: &str, min: f64, max: f64) -> Self {
        VariableSpec {
            name: name.into(),
            units: units.into(),
            min,
            max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::NonFiniteInput(format!("bounds of {}", self.name)));
        }
        if self.min > self.max {
            return Err(Error::InvalidBounds {
                name: self.name.clone(),
                min: self.min,
                max: self.max,
            });
        }
        Ok(())
    }

    pub fn is_frozen(&self) -> bool {
        self.min == self.max
    }
}

/// The six-variable atmospheric input space used by the default benchmark:
/// ozone column, water-vapour scale factor, aerosol optical thickness,
/// scattering asymmetry, Angstrom exponent, and single-scattering albedo.
pub fn default_variables() -> Vec<VariableSpec> {
    vec![
        VariableSpec::new("O3C", "atm-cm", 0.2, 0.45),
        VariableSpec::new("CWV", "scale-factor", 1.0, 4.0),
        VariableSpec::new("AOT", "unitless", 0.05, 0.4),
        VariableSpec::new("G", "unitless", 0.65, 0.99),
        VariableSpec::new("alpha", "unitless", 1.0, 2.0),
        VariableSpec::new("SSA", "unitless", 0.75, 1.0),
    ]
}

/// How a design was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignKind {
    Lhs,
    Vertices,
    Merged,
}

/// An n x D sample of the variable space in physical units, with the bounds
/// metadata that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub specs: Vec<VariableSpec>,
    pub points: Matrix,
    pub seed: u64,
    pub kind: DesignKind,
}

impl Design {
    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.specs.len()
    }

    /// True when every coordinate of `x` lies within the variable bounds.
    pub fn in_bounds(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && self
                .specs
                .iter()
                .zip(x)
                .all(|(s, &v)| v >= s.min && v <= s.max)
    }

    /// Writes the design as CSV: a header of variable names, then one row
    /// per sample at 17 significant digits (lossless for f64).
    pub fn export_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        let names: Vec<&str> = self.specs.iter().map(|s| s.name.as_str()).collect();
        writeln!(out, "{}", names.join(",")).expect("vec write");
        for i in 0..self.len() {
            let row: Vec<String> = self
                .points
                .row(i)
                .iter()
                .map(|v| format!("{v:.16e}"))
                .collect();
            writeln!(out, "{}", row.join(",")).expect("vec write");
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

fn validate_specs(specs: &[VariableSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::InvalidConfig("design needs at least one variable".into()));
    }
    for s in specs {
        s.validate()?;
    }
    Ok(())
}

/// Latin hypercube design: for each variable the range is split into `n`
/// equal strata, each stratum receives exactly one sample at a uniform
/// position, and the stratum-to-row assignment is an independent random
/// permutation per column.
pub fn latin_hypercube(n: usize, specs: &[VariableSpec], seed: u64) -> Result<Design> {
    validate_specs(specs)?;
    if n == 0 {
        return Err(Error::InvalidConfig("latin hypercube needs n >= 1".into()));
    }
    let d = specs.len();
    let mut points = Matrix::zeros(n, d);
    for (col, spec) in specs.iter().enumerate() {
        // Independent stream per column so the design is stable under
        // column reordering of unrelated variables.
        let mut rng = SplitMix64::derived(seed, &[col as u64]);
        let mut strata: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut strata);
        let width = (spec.max - spec.min) / n as f64;
        for row in 0..n {
            let u = rng.next_f64();
            let v = spec.min + (strata[row] as f64 + u) * width;
            // Guard the upper edge against rounding past max.
            points[(row, col)] = v.min(spec.max);
        }
    }
    Ok(Design {
        specs: specs.to_vec(),
        points,
        seed,
        kind: DesignKind::Lhs,
    })
}

/// Largest number of free (non-frozen) variables `vertices` accepts before
/// the 2^D corner count explodes.
pub const MAX_VERTEX_DIMENSIONS: usize = 20;

/// All corner points of the bounds box: every non-frozen variable takes its
/// min or max, frozen variables stay at their fixed value. Row order is the
/// binary counter over free variables, least-significant bit first.
pub fn vertices(specs: &[VariableSpec]) -> Result<Design> {
    validate_specs(specs)?;
    let free: Vec<usize> = (0..specs.len()).filter(|&i| !specs[i].is_frozen()).collect();
    if free.len() > MAX_VERTEX_DIMENSIONS {
        return Err(Error::TooManyDimensions {
            got: free.len(),
            limit: MAX_VERTEX_DIMENSIONS,
        });
    }
    let count = 1usize << free.len();
    let mut points = Matrix::zeros(count, specs.len());
    for r in 0..count {
        for (col, spec) in specs.iter().enumerate() {
            points[(r, col)] = spec.min;
        }
        for (bit, &col) in free.iter().enumerate() {
            if (r >> bit) & 1 == 1 {
                points[(r, col)] = specs[col].max;
            }
        }
    }
    Ok(Design {
        specs: specs.to_vec(),
        points,
        seed: 0,
        kind: DesignKind::Vertices,
    })
}

/// Row-concatenates two designs over identical specs, dropping rows of `b`
/// that duplicate an earlier row bit for bit. Original order is preserved,
/// `a` first.
pub fn merge(a: &Design, b: &Design) -> Result<Design> {
    if a.specs != b.specs {
        return Err(Error::SpecMismatch(
            "designs disagree on variables or their order".into(),
        ));
    }
    let d = a.dim();
    let mut seen = std::collections::HashSet::new();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(a.len() + b.len());
    for design in [a, b] {
        for i in 0..design.len() {
            let row = design.points.row(i);
            let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
            if seen.insert(key) {
                rows.push(row.to_vec());
            }
        }
    }
    let points = if rows.is_empty() {
        Matrix::zeros(0, d)
    } else {
        Matrix::from_rows(&rows)?
    };
    Ok(Design {
        specs: a.specs.clone(),
        points,
        seed: a.seed,
        kind: DesignKind::Merged,
    })
}
