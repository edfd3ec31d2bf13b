//! Evaluation statistics for reconstructed spectra: per-wavelength RMSE,
//! range-normalized RMSE, relative-residual percentile bands, and their
//! aggregates.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Reference values with magnitude below this are excluded from relative
/// residuals (division guard); the exclusion count is reported. Radiance
/// from the surrogate model is strictly positive, so the count is zero in
/// every benchmark run.
pub const RELATIVE_RESIDUAL_FLOOR: f64 = 1e-12;

/// The percentile levels reported for residual bands.
pub const PERCENTILES: [f64; 4] = [2.5, 16.0, 84.0, 95.5];

/// Normalization convention for the range in the NRMSE denominator.
///
/// `PerWavelength` divides each wavelength's RMSE by that wavelength's
/// reference range; `Global` divides every wavelength by the range of the
/// whole reference matrix. Both readings of "maximum and minimum of the
/// reference spectra" are computable; per-wavelength is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NrmseNorm {
    PerWavelength,
    Global,
}

/// Per-wavelength NRMSE in percent. Wavelengths whose reference range is
/// zero are undefined (stored as NaN) and excluded from the aggregate.
#[derive(Debug, Clone, Serialize)]
pub struct NrmseCurve {
    pub percent: Vec<f64>,
    pub degenerate_count: usize,
}

impl NrmseCurve {
    /// Mean over the wavelengths where the value is defined.
    pub fn aggregate(&self) -> f64 {
        let finite: Vec<f64> = self.percent.iter().copied().filter(|v| v.is_finite()).collect();
        finite.iter().sum::<f64>() / finite.len() as f64
    }
}

/// Absolute relative residuals |pred - ref| / |ref| in percent, one row per
/// sample. Entries where the reference magnitude is below the floor are NaN
/// and counted in `excluded`.
#[derive(Debug, Clone)]
pub struct ResidualSet {
    pub percent: Matrix,
    pub excluded: usize,
}

fn check_shapes(reference: &Matrix, predicted: &Matrix) -> Result<()> {
    if reference.rows() != predicted.rows() || reference.cols() != predicted.cols() {
        return Err(Error::ShapeMismatch(format!(
            "reference {}x{} vs predicted {}x{}",
            reference.rows(),
            reference.cols(),
            predicted.rows(),
            predicted.cols()
        )));
    }
    if reference.rows() == 0 || reference.cols() == 0 {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    Ok(())
}

/// Root-mean-square error per wavelength (per column).
pub fn rmse_per_wavelength(reference: &Matrix, predicted: &Matrix) -> Result<Vec<f64>> {
    check_shapes(reference, predicted)?;
    let (m, k) = (reference.rows(), reference.cols());
    let mut acc = vec![0.0; k];
    for i in 0..m {
        let (r, p) = (reference.row(i), predicted.row(i));
        for j in 0..k {
            let d = r[j] - p[j];
            acc[j] += d * d;
        }
    }
    Ok(acc.into_iter().map(|s| (s / m as f64).sqrt()).collect())
}

/// Range-normalized RMSE per wavelength, in percent:
/// `100 * rmse / (ref_max - ref_min)` with the extrema taken per wavelength
/// (or globally, per `norm`). Errors only when every wavelength is
/// degenerate; isolated zero-range wavelengths are reported as undefined.
pub fn nrmse_per_wavelength(
    reference: &Matrix,
    predicted: &Matrix,
    norm: NrmseNorm,
) -> Result<NrmseCurve> {
    let rmse = rmse_per_wavelength(reference, predicted)?;
    let (m, k) = (reference.rows(), reference.cols());
    let range_per_col: Vec<f64> = (0..k)
        .map(|j| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..m {
                let v = reference[(i, j)];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            hi - lo
        })
        .collect();
    let global_range = {
        let lo = reference.data().iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = reference
            .data()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let mut degenerate = 0usize;
    let percent: Vec<f64> = rmse
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let range = match norm {
                NrmseNorm::PerWavelength => range_per_col[j],
                NrmseNorm::Global => global_range,
            };
            if range > 0.0 {
                100.0 * r / range
            } else {
                degenerate += 1;
                f64::NAN
            }
        })
        .collect();
    if degenerate == k {
        return Err(Error::DegenerateRange);
    }
    Ok(NrmseCurve {
        percent,
        degenerate_count: degenerate,
    })
}

/// Absolute relative residuals in percent.
pub fn residual_set(reference: &Matrix, predicted: &Matrix) -> Result<ResidualSet> {
    check_shapes(reference, predicted)?;
    let (m, k) = (reference.rows(), reference.cols());
    let mut excluded = 0usize;
    let percent = Matrix::from_fn(m, k, |i, j| {
        let r = reference[(i, j)];
        if r.abs() < RELATIVE_RESIDUAL_FLOOR {
            excluded += 1;
            f64::NAN
        } else {
            100.0 * (predicted[(i, j)] - r).abs() / r.abs()
        }
    });
    Ok(ResidualSet { percent, excluded })
}

/// Linear-interpolated order statistic (the "type 7" convention): for a
/// sorted sample v of size n and level q in [0, 100], the value at fractional
/// rank (n-1) * q/100.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * q / 100.0;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

/// Per-wavelength percentile curves of the residual set at the requested
/// levels. Excluded (NaN) entries are skipped; at least two finite residuals
/// per wavelength are required.
pub fn residual_percentiles(res: &ResidualSet, levels: &[f64]) -> Result<Vec<Vec<f64>>> {
    let (m, k) = (res.percent.rows(), res.percent.cols());
    if m < 2 {
        return Err(Error::TooFewSamples { got: m, need: 2 });
    }
    let mut curves = vec![vec![0.0; k]; levels.len()];
    let mut col = Vec::with_capacity(m);
    for j in 0..k {
        col.clear();
        for i in 0..m {
            let v = res.percent[(i, j)];
            if v.is_finite() {
                col.push(v);
            }
        }
        if col.len() < 2 {
            return Err(Error::TooFewSamples {
                got: col.len(),
                need: 2,
            });
        }
        col.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (c, &q) in levels.iter().enumerate() {
            curves[c][j] = quantile_sorted(&col, q);
        }
    }
    Ok(curves)
}

/// Mean relative residual per wavelength, in percent, over finite entries.
pub fn mean_relative_residual(res: &ResidualSet) -> Vec<f64> {
    let (m, k) = (res.percent.rows(), res.percent.cols());
    (0..k)
        .map(|j| {
            let mut sum = 0.0;
            let mut count = 0usize;
            for i in 0..m {
                let v = res.percent[(i, j)];
                if v.is_finite() {
                    sum += v;
                    count += 1;
                }
            }
            sum / count as f64
        })
        .collect()
}

/// Wall-clock seconds for the two phases of a method.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Timings {
    /// Triangulation build or emulator training.
    pub build_seconds: f64,
    /// The timed batch query pass.
    pub query_seconds: f64,
}

/// Everything the benchmark reports for one method on one LUT.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub method: String,
    /// Nominal training LUT size (before vertex augmentation).
    pub lut_size: usize,
    /// Actual node count of the training LUT.
    pub lut_rows: usize,
    /// Retained component count, for emulator methods.
    pub components: Option<usize>,
    pub wavelengths: Vec<f64>,
    pub rmse: Vec<f64>,
    pub nrmse_percent: Vec<f64>,
    pub nrmse_degenerate_count: usize,
    pub mean_rel_residual_percent: Vec<f64>,
    /// One curve per entry of [`PERCENTILES`], same order.
    pub residual_percentile_curves: Vec<Vec<f64>>,
    pub residuals_excluded: usize,
    pub rmse_mean: f64,
    pub nrmse_mean_percent: f64,
    pub timings: Timings,
}

/// Assembles the full report for one method's outputs against the reference.
#[allow(clippy::too_many_arguments)]
pub fn compare(
    reference: &Matrix,
    predicted: &Matrix,
    wavelengths: &[f64],
    norm: NrmseNorm,
    method: &str,
    lut_size: usize,
    lut_rows: usize,
    components: Option<usize>,
    timings: Timings,
) -> Result<EvalReport> {
    check_shapes(reference, predicted)?;
    if wavelengths.len() != reference.cols() {
        return Err(Error::ShapeMismatch(format!(
            "{} wavelengths for {} spectral columns",
            wavelengths.len(),
            reference.cols()
        )));
    }
    let rmse = rmse_per_wavelength(reference, predicted)?;
    let nrmse = nrmse_per_wavelength(reference, predicted, norm)?;
    let residuals = residual_set(reference, predicted)?;
    let curves = residual_percentiles(&residuals, &PERCENTILES)?;
    let mean_rel = mean_relative_residual(&residuals);
    let rmse_mean = rmse.iter().sum::<f64>() / rmse.len() as f64;
    let nrmse_mean = nrmse.aggregate();
    Ok(EvalReport {
        method: method.into(),
        lut_size,
        lut_rows,
        components,
        wavelengths: wavelengths.to_vec(),
        rmse,
        nrmse_percent: nrmse.percent,
        nrmse_degenerate_count: nrmse.degenerate_count,
        mean_rel_residual_percent: mean_rel,
        residual_percentile_curves: curves,
        residuals_excluded: residuals.excluded,
        rmse_mean,
        nrmse_mean_percent: nrmse_mean,
        timings,
    })
}

impl EvalReport {
    /// One CSV row per wavelength. Contains no timing data, so files from
    /// identical runs are byte-identical.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        let mut header = vec![
            "wavelength_nm".to_string(),
            "rmse".to_string(),
            "nrmse_percent".to_string(),
            "mean_rel_residual_percent".to_string(),
        ];
        for q in PERCENTILES {
            header.push(format!("residual_p{q}_percent"));
        }
        writeln!(out, "{}", header.join(",")).expect("vec write");
        for (j, &w) in self.wavelengths.iter().enumerate() {
            let mut fields = vec![
                format!("{w}"),
                format!("{:.16e}", self.rmse[j]),
                format!("{:.16e}", self.nrmse_percent[j]),
                format!("{:.16e}", self.mean_rel_residual_percent[j]),
            ];
            for curve in &self.residual_percentile_curves {
                fields.push(format!("{:.16e}", curve[j]));
            }
            writeln!(out, "{}", fields.join(",")).expect("vec write");
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Structured-text form of the report (pretty JSON), timings included.
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::format(path, e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}
