//! Analytic top-of-atmosphere radiance model.
//!
//! A deterministic, closed-form atmosphere over a fixed vegetation surface,
//! driven by six input variables: ozone column `O3C`, columnar water vapour
//! scale `CWV`, aerosol optical thickness `AOT`, scattering asymmetry `G`,
//! Angstrom exponent `alpha`, and single-scattering albedo `SSA`. It is not
//! a physical band model; what matters here is a smooth, strictly positive
//! ground truth that responds to all six variables, so that interpolation
//! and emulation error can be measured exactly against it.
//!
//! The top-of-atmosphere radiance couples the atmospheric functions with the
//! Lambertian surface reflectance `rho` as
//!
//! ```text
//! L_toa = L0 + (E_dir * mu_s + E_dif) * (T_dif + T_dir) * rho
//!              / (pi * (1 - S * rho))
//! ```
//!
//! with path radiance `L0`, direct/diffuse at-surface irradiances
//! `E_dir`/`E_dif`, surface-to-sensor transmittances `T_dir`/`T_dif`,
//! spherical albedo `S`, and `mu_s` the cosine of the solar zenith angle.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::sampling::Design;
use crate::store::{Lut, Provenance};

/// Wavelength axis shared by all spectra, in nanometres.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    wavelengths: Vec<f64>,
}

/// Supported wavelength range in nm.
pub const GRID_MIN_NM: f64 = 400.0;
pub const GRID_MAX_NM: f64 = 2400.0;

impl SpectralGrid {
    /// A strictly increasing wavelength axis within [400, 2400] nm.
    pub fn new(wavelengths: Vec<f64>) -> Result<Self> {
        if wavelengths.is_empty() {
            return Err(Error::InvalidConfig("spectral grid is empty".into()));
        }
        for w in wavelengths.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidConfig(
                    "spectral grid must be strictly increasing".into(),
                ));
            }
        }
        let (&lo, &hi) = (
            wavelengths.first().unwrap(),
            wavelengths.last().unwrap(),
        );
        if !lo.is_finite() || lo < GRID_MIN_NM || hi > GRID_MAX_NM {
            return Err(Error::InvalidConfig(format!(
                "spectral grid [{lo}, {hi}] outside supported range [{GRID_MIN_NM}, {GRID_MAX_NM}] nm"
            )));
        }
        Ok(SpectralGrid { wavelengths })
    }

    /// Regular grid `start..=stop` with the given step.
    pub fn regular(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || stop < start {
            return Err(Error::InvalidConfig(format!(
                "bad grid spec: start {start}, stop {stop}, step {step}"
            )));
        }
        let count = ((stop - start) / step).round() as usize + 1;
        SpectralGrid::new((0..count).map(|i| start + i as f64 * step).collect())
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
    }
}

impl Default for SpectralGrid {
    /// 400-2400 nm at 5 nm spacing: 401 points.
    fn default() -> Self {
        SpectralGrid::regular(400.0, 2400.0, 5.0).expect("default grid is valid")
    }
}

/// Sun/sensor geometry in degrees. Held fixed for the whole benchmark.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Geometry {
    pub sza_deg: f64,
    pub vza_deg: f64,
    pub raa_deg: f64,
}

impl Geometry {
    pub fn new(sza_deg: f64, vza_deg: f64, raa_deg: f64) -> Result<Self> {
        if !(0.0..90.0).contains(&sza_deg) || !(0.0..90.0).contains(&vza_deg) {
            return Err(Error::InvalidConfig(format!(
                "zenith angles must lie in [0, 90): sza {sza_deg}, vza {vza_deg}"
            )));
        }
        Ok(Geometry {
            sza_deg,
            vza_deg,
            raa_deg,
        })
    }

    pub fn mu_s(&self) -> f64 {
        self.sza_deg.to_radians().cos()
    }

    pub fn mu_v(&self) -> f64 {
        self.vza_deg.to_radians().cos()
    }

    /// Cosine of the scattering angle from standard spherical geometry.
    pub fn cos_scatter(&self) -> f64 {
        let (ms, mv) = (self.mu_s(), self.mu_v());
        -ms * mv
            - (1.0 - ms * ms).max(0.0).sqrt()
                * (1.0 - mv * mv).max(0.0).sqrt()
                * self.raa_deg.to_radians().cos()
    }
}

impl Default for Geometry {
    /// Solar zenith 55 degrees, nadir view, zero relative azimuth.
    fn default() -> Self {
        Geometry {
            sza_deg: 55.0,
            vza_deg: 0.0,
            raa_deg: 0.0,
        }
    }
}

/// Per-wavelength atmospheric functions entering the coupling formula.
#[derive(Debug, Clone)]
pub struct AtmFunctions {
    /// Path radiance L0, W m^-2 sr^-1 nm^-1.
    pub path_radiance: Vec<f64>,
    /// Direct at-surface solar irradiance E_dir, W m^-2 nm^-1.
    pub direct_irradiance: Vec<f64>,
    /// Diffuse at-surface solar irradiance E_dif, W m^-2 nm^-1.
    pub diffuse_irradiance: Vec<f64>,
    /// Surface-to-sensor direct transmittance T_dir, in [0, 1].
    pub direct_transmittance: Vec<f64>,
    /// Surface-to-sensor diffuse transmittance T_dif, in [0, 1].
    pub diffuse_transmittance: Vec<f64>,
    /// Spherical albedo S, in [0, 1).
    pub spherical_albedo: Vec<f64>,
}

/// A top-of-atmosphere radiance spectrum, W m^-2 sr^-1 nm^-1.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
}

/// Number of input variables the model expects, in the order
/// (O3C, CWV, AOT, G, alpha, SSA).
pub const INPUT_DIM: usize = 6;

// Second radiation constant hc/k in m K, CODATA values.
const C2_M_K: f64 = 6.62607015e-34 * 2.99792458e8 / 1.380649e-23;
const SUN_TEMP_K: f64 = 5800.0;
/// Peak of the solar irradiance surrogate over the default grid, W m^-2 nm^-1.
const E0_PEAK: f64 = 1.8;

fn e0_unnormalized(lambda_nm: f64) -> f64 {
    let x = C2_M_K / (lambda_nm * 1e-9 * SUN_TEMP_K);
    1.9 * (lambda_nm / 500.0).powi(-5) / (x.exp() - 1.0)
}

fn e0_norm_factor() -> f64 {
    static FACTOR: OnceLock<f64> = OnceLock::new();
    *FACTOR.get_or_init(|| {
        let grid = SpectralGrid::default();
        let max = grid
            .wavelengths()
            .iter()
            .map(|&l| e0_unnormalized(l))
            .fold(0.0_f64, f64::max);
        E0_PEAK / max
    })
}

/// Solar irradiance surrogate: a Planck-shaped curve scaled so its maximum
/// over the default grid is 1.8 W m^-2 nm^-1.
pub fn solar_irradiance(lambda_nm: f64) -> f64 {
    e0_unnormalized(lambda_nm) * e0_norm_factor()
}

/// Rayleigh optical depth.
pub fn rayleigh_optical_depth(lambda_nm: f64) -> f64 {
    let um = lambda_nm / 1000.0;
    let inv2 = 1.0 / (um * um);
    let inv4 = inv2 * inv2;
    0.008569 * inv4 * (1.0 + 0.0113 * inv2 + 0.00013 * inv4)
}

// Water vapour absorption bands: (centre nm, width nm, strength).
const H2O_BANDS: [(f64, f64, f64); 4] = [
    (940.0, 25.0, 0.30),
    (1130.0, 30.0, 0.45),
    (1380.0, 40.0, 1.60),
    (1870.0, 45.0, 2.20),
];

fn gaussian(lambda: f64, centre: f64, width: f64) -> f64 {
    let t = (lambda - centre) / width;
    (-t * t).exp()
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Fixed vegetation surface reflectance: red-edge sigmoid at 715 nm, a green
/// bump, a red absorption well, and two water dips, clamped to [0.01, 0.55].
pub fn surface_reflectance_at(lambda_nm: f64) -> f64 {
    let rho = 0.05 + 0.43 * logistic((lambda_nm - 715.0) / 30.0)
        + 0.04 * gaussian(lambda_nm, 550.0, 30.0)
        - 0.03 * gaussian(lambda_nm, 670.0, 25.0)
        - 0.12 * gaussian(lambda_nm, 1450.0, 60.0)
        - 0.10 * gaussian(lambda_nm, 1940.0, 70.0);
    rho.clamp(0.01, 0.55)
}

/// The vegetation reflectance sampled on a grid.
pub fn surface_reflectance(grid: &SpectralGrid) -> Vec<f64> {
    grid.wavelengths()
        .iter()
        .map(|&l| surface_reflectance_at(l))
        .collect()
}

/// Per-wavelength quantities that do not depend on the input vector.
/// Hoisting them keeps single-point and batch evaluation on one code path,
/// which in turn keeps LUT generation bit-identical to `toa_radiance`.
struct GridTables {
    e0: Vec<f64>,
    tau_rayleigh: Vec<f64>,
    ln_l_over_550: Vec<f64>,
    ozone_shape: Vec<f64>,
    water_shape: Vec<f64>,
    rho: Vec<f64>,
}

impl GridTables {
    fn new(grid: &SpectralGrid) -> Self {
        let ls = grid.wavelengths();
        GridTables {
            e0: ls.iter().map(|&l| solar_irradiance(l)).collect(),
            tau_rayleigh: ls.iter().map(|&l| rayleigh_optical_depth(l)).collect(),
            ln_l_over_550: ls.iter().map(|&l| (l / 550.0).ln()).collect(),
            ozone_shape: ls.iter().map(|&l| 3.0 * gaussian(l, 600.0, 70.0)).collect(),
            water_shape: ls
                .iter()
                .map(|&l| {
                    H2O_BANDS
                        .iter()
                        .map(|&(c, w, s)| s * gaussian(l, c, w))
                        .sum()
                })
                .collect(),
            rho: ls.iter().map(|&l| surface_reflectance_at(l)).collect(),
        }
    }
}

struct GeomTables {
    mu_s: f64,
    mu_v: f64,
    phase_rayleigh: f64,
}

impl GeomTables {
    fn new(geom: &Geometry) -> Self {
        let cos_t = geom.cos_scatter();
        GeomTables {
            mu_s: geom.mu_s(),
            mu_v: geom.mu_v(),
            phase_rayleigh: 0.75 * (1.0 + cos_t * cos_t),
        }
    }
}

fn check_input(x: &[f64]) -> Result<()> {
    if x.len() != INPUT_DIM {
        return Err(Error::DimensionMismatch(format!(
            "model input needs {INPUT_DIM} variables, got {}",
            x.len()
        )));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput(format!("input variable {i}")));
    }
    Ok(())
}

fn eval_atm(x: &[f64], grid_t: &GridTables, geom: &Geometry, gt: &GeomTables) -> AtmFunctions {
    let (o3c, cwv, aot, g, alpha, ssa) = (x[0], x[1], x[2], x[3], x[4], x[5]);
    let k = grid_t.e0.len();
    let (mu_s, mu_v) = (gt.mu_s, gt.mu_v);

    let cos_t = geom.cos_scatter();
    let phase_hg =
        (1.0 - g * g) / (1.0 + g * g - 2.0 * g * cos_t).powf(1.5);

    let mut atm = AtmFunctions {
        path_radiance: Vec::with_capacity(k),
        direct_irradiance: Vec::with_capacity(k),
        diffuse_irradiance: Vec::with_capacity(k),
        direct_transmittance: Vec::with_capacity(k),
        diffuse_transmittance: Vec::with_capacity(k),
        spherical_albedo: Vec::with_capacity(k),
    };

    for i in 0..k {
        let e0 = grid_t.e0[i];
        let tau_r = grid_t.tau_rayleigh[i];
        let tau_a = aot * (-alpha * grid_t.ln_l_over_550[i]).exp();
        let tau_o3 = o3c * grid_t.ozone_shape[i];
        let tau_w = cwv * grid_t.water_shape[i];
        let tau = tau_r + tau_a + tau_o3 + tau_w;
        let tau_abs = tau_o3 + tau_w + (1.0 - ssa) * tau_a;
        let tau_sc = tau_r + ssa * tau_a;

        let t_dir = (-tau / mu_v).exp();
        let e_dir = e0 * (-tau / mu_s).exp();
        let t_dif = t_dir * ((0.5 * tau_sc / mu_v).exp() - 1.0);
        let e_dif = e0 * mu_s * (-tau_abs / mu_s).exp() * (1.0 - (-tau_sc / mu_s).exp()) * 0.5;

        let l0 = e0 * mu_s / (4.0 * std::f64::consts::PI * (mu_s + mu_v))
            * (tau_r * gt.phase_rayleigh + ssa * tau_a * phase_hg)
            * (-tau_abs * (1.0 / mu_s + 1.0 / mu_v)).exp();

        let s = (1.0 - (-0.5 * tau_sc).exp()).min(0.9);

        atm.path_radiance.push(l0);
        atm.direct_irradiance.push(e_dir);
        atm.diffuse_irradiance.push(e_dif);
        atm.direct_transmittance.push(t_dir);
        atm.diffuse_transmittance.push(t_dif);
        atm.spherical_albedo.push(s);
    }
    atm
}

/// Evaluates the atmospheric functions at one input vector. Out-of-bounds
/// inputs are evaluated as-is (the functions are defined everywhere the
/// variables are non-negative); only non-finite inputs are rejected.
pub fn atm_functions(x: &[f64], grid: &SpectralGrid, geom: &Geometry) -> Result<AtmFunctions> {
    check_input(x)?;
    Ok(eval_atm(x, &GridTables::new(grid), geom, &GeomTables::new(geom)))
}

fn compose_toa(atm: &AtmFunctions, rho: &[f64], mu_s: f64) -> Vec<f64> {
    (0..rho.len())
        .map(|i| {
            atm.path_radiance[i]
                + (atm.direct_irradiance[i] * mu_s + atm.diffuse_irradiance[i])
                    * (atm.diffuse_transmittance[i] + atm.direct_transmittance[i])
                    * rho[i]
                    / (std::f64::consts::PI * (1.0 - atm.spherical_albedo[i] * rho[i]))
        })
        .collect()
}

/// Top-of-atmosphere radiance over the fixed vegetation surface.
pub fn toa_radiance(x: &[f64], grid: &SpectralGrid, geom: &Geometry) -> Result<Spectrum> {
    check_input(x)?;
    let gt = GridTables::new(grid);
    let geo = GeomTables::new(geom);
    let atm = eval_atm(x, &gt, geom, &geo);
    Ok(Spectrum {
        values: compose_toa(&atm, &gt.rho, geo.mu_s),
    })
}

/// Top-of-atmosphere radiance over a caller-supplied Lambertian reflectance.
pub fn toa_radiance_with_surface(
    x: &[f64],
    grid: &SpectralGrid,
    geom: &Geometry,
    rho: &[f64],
) -> Result<Spectrum> {
    check_input(x)?;
    if rho.len() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "reflectance has {} values for a grid of {}",
            rho.len(),
            grid.len()
        )));
    }
    let gt = GridTables::new(grid);
    let geo = GeomTables::new(geom);
    let atm = eval_atm(x, &gt, geom, &geo);
    Ok(Spectrum {
        values: compose_toa(&atm, rho, geo.mu_s),
    })
}

/// Evaluates the model at every design point, producing a look-up table.
/// Rows are computed independently (in parallel) and the result is invariant
/// to evaluation order.
pub fn generate_lut(
    design: &Design,
    grid: &SpectralGrid,
    geom: &Geometry,
    provenance: Provenance,
) -> Result<Lut> {
    if design.is_empty() {
        return Err(Error::TooFewPoints { got: 0, need: 1 });
    }
    if design.dim() != INPUT_DIM {
        return Err(Error::DimensionMismatch(format!(
            "design has {} variables, model needs {INPUT_DIM}",
            design.dim()
        )));
    }
    let gt = GridTables::new(grid);
    let geo = GeomTables::new(geom);
    let rows: Result<Vec<Vec<f64>>> = (0..design.len())
        .into_par_iter()
        .map(|i| {
            let x = design.points.row(i);
            check_input(x)?;
            let atm = eval_atm(x, &gt, geom, &geo);
            Ok(compose_toa(&atm, &gt.rho, geo.mu_s))
        })
        .collect();
    let spectra = Matrix::from_rows(&rows?)?;
    Ok(Lut {
        design: design.clone(),
        grid: grid.clone(),
        geometry: *geom,
        spectra,
        provenance,
    })
}
