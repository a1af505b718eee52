//! Parameter-scan engine: offset spectra, saturation scans of the center
//! dispersion, and drive-intensity scans with a Kerr-coefficient fit.
//!
//! Scans parallelize over grid points; results are collected in grid order,
//! so output files are byte-identical for any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::optics::{
    dispersion_from_exact_derivative, gamma_units_to_hz, index_and_absorption,
    kerr_fit, KerrFit, Spectrum, SpectrumMetadata, SpectrumPoint, C_LIGHT,
    HBAR,
};
use crate::probe_response::linear_response;
use crate::steady_state::{solve_steady_state, DensityMatrix};
use crate::system::{
    build_generator, DriveField, LevelScheme, Liouvillian, Polarization,
    ProbeField,
};
use crate::{Error, Result};

/// Probe Rabi frequency used inside scans; `chi` is exactly independent of
/// it (first-order response), it only has to be positive.
const SCAN_PROBE_RABI: f64 = 1e-4;

/// Strictly increasing, non-empty scan grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    values: Vec<f64>,
}

impl Grid {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("grid must be non-empty"));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("grid must be strictly increasing"));
        }
        Ok(Grid { values })
    }

    pub fn linear(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("grid must be non-empty"));
        }
        if n == 1 {
            return Grid::from_values(vec![lo]);
        }
        let step = (hi - lo) / (n - 1) as f64;
        Grid::from_values((0..n).map(|k| lo + k as f64 * step).collect())
    }

    pub fn log(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if lo <= 0.0 {
            return Err(Error::domain("log grid needs positive bounds"));
        }
        if n == 1 {
            return Grid::from_values(vec![lo]);
        }
        let (a, b) = (lo.ln(), hi.ln());
        Grid::linear(a, b, n).map(|g| Grid {
            values: g.values.iter().map(|x| x.exp()).collect(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Fixed parameters of a scan; the varied axis is passed to the individual
/// scan operations.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub scheme: LevelScheme,
    /// Drive saturation parameter `S = 2 Omega^2 / Gamma^2` (for scans that
    /// do not vary it).
    pub saturation: f64,
    /// Drive detuning, `Gamma` units.
    pub detuning: f64,
    /// Atomic density, 1/m^3.
    pub density: f64,
    pub drive_polarization: Polarization,
    pub probe_polarization: Polarization,
}

impl SweepPlan {
    /// Orthogonal linear drive/probe at exact resonance.
    pub fn resonant(scheme: LevelScheme, saturation: f64, density: f64) -> Result<Self> {
        if saturation < 0.0 {
            return Err(Error::domain("saturation parameter must be non-negative"));
        }
        if density <= 0.0 {
            return Err(Error::domain("atomic density must be positive"));
        }
        Ok(SweepPlan {
            scheme,
            saturation,
            detuning: 0.0,
            density,
            drive_polarization: Polarization::pi(),
            probe_polarization: Polarization::linear_orthogonal(),
        })
    }

    fn drive(&self, saturation: f64) -> Result<DriveField> {
        DriveField::from_saturation(
            saturation,
            self.detuning,
            self.drive_polarization,
        )
    }

    fn probe(&self, delta: f64) -> ProbeField {
        ProbeField::new(SCAN_PROBE_RABI, delta, self.probe_polarization)
            .expect("positive probe Rabi")
    }

    fn prepared(&self, saturation: f64) -> Result<(Liouvillian, DensityMatrix)> {
        let liouv = build_generator(&self.scheme, &self.drive(saturation)?)?;
        let rho0 = solve_steady_state(&liouv)?;
        Ok((liouv, rho0))
    }

    fn metadata(&self, grid_hz: (f64, f64, usize)) -> SpectrumMetadata {
        SpectrumMetadata {
            f_ground: self.scheme.f_ground().value(),
            f_excited: self.scheme.f_excited().value(),
            gamma_sp_rad_s: self.scheme.gamma_sp(),
            gamma_transit_rad_s: self.scheme.gamma_transit(),
            wavelength_m: self.scheme.wavelength(),
            density_m3: self.density,
            saturation: self.saturation,
            detuning: self.detuning,
            drive_polarization: polarization_label(&self.drive_polarization),
            probe_polarization: polarization_label(&self.probe_polarization),
            grid_hz,
        }
    }
}

fn polarization_label(p: &Polarization) -> String {
    let c = |q: i32| {
        let z = p.component(q);
        format!("{:+.6}{:+.6}i", z.re, z.im)
    };
    format!("[{}, {}, {}]", c(-1), c(0), c(1))
}

/// Offset spectrum at the plan's fixed saturation: one steady-state solve,
/// then one linear response per grid point (`delta` grid in `Gamma` units).
pub fn spectrum_scan(plan: &SweepPlan, delta_grid: &Grid) -> Result<Spectrum> {
    let (liouv, rho0) = plan.prepared(plan.saturation)?;
    let gamma_sp = plan.scheme.gamma_sp();
    let points: Result<Vec<SpectrumPoint>> = delta_grid
        .values()
        .par_iter()
        .map(|&delta| {
            let point = linear_response(
                &liouv,
                &rho0,
                &plan.scheme,
                &plan.probe(delta),
                plan.density,
            )
            .map_err(|e| {
                Error::numerical(format!("at delta = {delta} Gamma: {e}"))
            })?;
            let (n, alpha) =
                index_and_absorption(point.chi, plan.scheme.wavelength());
            Ok(SpectrumPoint {
                delta_hz: gamma_units_to_hz(delta, gamma_sp),
                re_chi: point.chi.re,
                im_chi: point.chi.im,
                n,
                alpha_per_m: alpha,
                d_per_hz: dispersion_from_exact_derivative(
                    point.dchi_ddelta,
                    gamma_sp,
                ),
            })
        })
        .collect();
    let points = points?;
    let grid_hz = (
        points.first().map(|p| p.delta_hz).unwrap_or(0.0),
        points.last().map(|p| p.delta_hz).unwrap_or(0.0),
        points.len(),
    );
    Ok(Spectrum {
        points,
        metadata: plan.metadata(grid_hz),
    })
}

/// Center dispersion against the drive saturation parameter.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SaturationPoint {
    pub saturation: f64,
    /// `D(0) = dn/dnu` at `delta = 0`, 1/Hz.
    pub d0_per_hz: f64,
    /// `true` for anomalous (`D < 0`) dispersion.
    pub anomalous: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaturationScan {
    pub points: Vec<SaturationPoint>,
    pub metadata: SpectrumMetadata,
}

impl SaturationScan {
    /// CSV schema: `saturation,d0_per_hz,anomalous`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "saturation,d0_per_hz,anomalous")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{}",
                p.saturation, p.d0_per_hz, p.anomalous as u8
            )?;
        }
        Ok(())
    }
}

/// `D(0)` per saturation grid point via the exact-derivative path.  For the
/// asymptote checks the grid should span at least `[1e-4, 1e3]`.
pub fn saturation_scan(plan: &SweepPlan, s_grid: &Grid) -> Result<SaturationScan> {
    if s_grid.values()[0] < 0.0 {
        return Err(Error::domain("saturation grid must be non-negative"));
    }
    let gamma_sp = plan.scheme.gamma_sp();
    let points: Result<Vec<SaturationPoint>> = s_grid
        .values()
        .par_iter()
        .map(|&s| {
            let (liouv, rho0) = plan
                .prepared(s)
                .map_err(|e| Error::numerical(format!("at S = {s}: {e}")))?;
            let point = linear_response(
                &liouv,
                &rho0,
                &plan.scheme,
                &plan.probe(0.0),
                plan.density,
            )
            .map_err(|e| Error::numerical(format!("at S = {s}: {e}")))?;
            let d0 =
                dispersion_from_exact_derivative(point.dchi_ddelta, gamma_sp);
            Ok(SaturationPoint {
                saturation: s,
                d0_per_hz: d0,
                anomalous: d0 < 0.0,
            })
        })
        .collect();
    Ok(SaturationScan {
        points: points?,
        metadata: plan
            .metadata((0.0, 0.0, s_grid.len())),
    })
}

/// Drive Rabi frequency squared (in `Gamma^2`) for a drive intensity in
/// W/m^2:
/// `Omega^2 = 3 lambda^3 I / (4 pi^2 hbar c Gamma)`.
///
/// Follows from `I = (1/2) c eps_0 E^2`, `Omega = mu E / hbar`, and the
/// two-level decay relation `mu^2 = 3 pi eps_0 hbar c^3 Gamma / omega_0^3`.
pub fn rabi_squared_from_intensity(scheme: &LevelScheme, intensity: f64) -> f64 {
    3.0 * scheme.wavelength().powi(3) * intensity
        / (4.0 * std::f64::consts::PI.powi(2) * HBAR * C_LIGHT * scheme.gamma_sp())
}

/// Inverse of [`rabi_squared_from_intensity`].
pub fn intensity_from_rabi_squared(scheme: &LevelScheme, rabi_squared: f64) -> f64 {
    rabi_squared
        * (4.0 * std::f64::consts::PI.powi(2) * HBAR * C_LIGHT * scheme.gamma_sp())
        / (3.0 * scheme.wavelength().powi(3))
}

/// Intensity at which `S = 1`, W/m^2 (the conventional saturation
/// intensity `pi h c Gamma_SI / 3 lambda^3`).
pub fn saturation_intensity(scheme: &LevelScheme) -> f64 {
    intensity_from_rabi_squared(scheme, 0.5)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntensitySample {
    pub intensity_w_m2: f64,
    /// `Omega^2` in `Gamma^2` after conversion.
    pub rabi_squared: f64,
    /// Refractive index at the evaluation offset.
    pub n: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntensityScan {
    pub samples: Vec<IntensitySample>,
    pub fit: KerrFit,
    pub metadata: SpectrumMetadata,
    /// The conversion formula the intensity axis was produced with.
    pub rabi_conversion: String,
}

impl IntensityScan {
    /// CSV schema: `intensity_w_m2,rabi_squared,n_minus_1`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "intensity_w_m2,rabi_squared,n_minus_1")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{},{}",
                s.intensity_w_m2,
                s.rabi_squared,
                s.n - 1.0
            )?;
        }
        Ok(())
    }
}

/// Refractive index against drive intensity at a fixed offset `delta_eval`
/// (`Gamma` units), with a linear Kerr fit `n = n1 + n2 I_d`.
///
/// Intensities outside the low-saturation linear regime
/// (`Omega^2 > 0.01 Gamma gamma`) are admitted but flagged with a warning;
/// the nonlinearity then shows up in the fit residual.
pub fn intensity_scan(
    plan: &SweepPlan,
    intensities: &Grid,
    delta_eval: f64,
) -> Result<IntensityScan> {
    if intensities.values()[0] < 0.0 {
        return Err(Error::domain("intensities must be non-negative"));
    }
    let linear_limit = 0.01 * plan.scheme.transit_ratio();
    let max_rabi_sq = rabi_squared_from_intensity(
        &plan.scheme,
        *intensities.values().last().unwrap(),
    );
    if max_rabi_sq > linear_limit {
        eprintln!(
            "warning: Omega^2 up to {max_rabi_sq:.3e} Gamma^2 exceeds the \
             linear Kerr regime (0.01 Gamma gamma = {linear_limit:.3e})"
        );
    }
    let samples: Result<Vec<IntensitySample>> = intensities
        .values()
        .par_iter()
        .map(|&intensity| {
            let rabi_sq = rabi_squared_from_intensity(&plan.scheme, intensity);
            let (liouv, rho0) = plan.prepared(2.0 * rabi_sq).map_err(|e| {
                Error::numerical(format!("at I = {intensity} W/m^2: {e}"))
            })?;
            let point = linear_response(
                &liouv,
                &rho0,
                &plan.scheme,
                &plan.probe(delta_eval),
                plan.density,
            )
            .map_err(|e| {
                Error::numerical(format!("at I = {intensity} W/m^2: {e}"))
            })?;
            let (n, _) =
                index_and_absorption(point.chi, plan.scheme.wavelength());
            Ok(IntensitySample {
                intensity_w_m2: intensity,
                rabi_squared: rabi_sq,
                n,
            })
        })
        .collect();
    let samples = samples?;
    let delta_eval_hz = gamma_units_to_hz(delta_eval, plan.scheme.gamma_sp());
    let pairs: Vec<(f64, f64)> =
        samples.iter().map(|s| (s.intensity_w_m2, s.n)).collect();
    let fit = kerr_fit(&pairs, delta_eval_hz)?;
    Ok(IntensityScan {
        samples,
        fit,
        metadata: plan.metadata((delta_eval_hz, delta_eval_hz, intensities.len())),
        rabi_conversion:
            "Omega^2[Gamma^2] = 3 lambda^3 I / (4 pi^2 hbar c Gamma)".into(),
    })
}
