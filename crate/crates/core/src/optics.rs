//! Conversion of susceptibility to observables: refractive index,
//! absorption, dispersion `D = dn/dnu`, group velocity, peak-to-peak index
//! swing, Kerr coefficient and heterodyne phase.
//!
//! Delta axes in emitted files are ordinary frequency (Hz); internal math is
//! angular in `Gamma` units.  All `2 pi` conversions live here.  Note the
//! orientation of the offset axis: `delta = omega_d - omega_p`, so the probe
//! frequency *decreases* with `delta` and `dn/dnu = -dn/d(delta_ordinary)`.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::{C64, Error, Result};

/// Speed of light, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

/// Rb D2 transition wavelength, m (standard reference value).
pub const RB_D2_WAVELENGTH: f64 = 780.24e-9;

/// Rb D2 natural linewidth `Gamma = 2 pi x 6.0666 MHz`, rad/s (standard
/// reference value).
pub const RB_D2_GAMMA: f64 = 2.0 * std::f64::consts::PI * 6.0666e6;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Threshold on `|n + nu D|` below which the group velocity is reported as
/// divergent rather than as a finite number.
pub const VG_DIVERGENCE_THRESHOLD: f64 = 2e-3;

/// Convert an offset in `Gamma` units to ordinary frequency (Hz).
pub fn gamma_units_to_hz(delta: f64, gamma_sp: f64) -> f64 {
    delta * gamma_sp / (2.0 * std::f64::consts::PI)
}

/// Convert an ordinary frequency (Hz) to `Gamma` units.
pub fn hz_to_gamma_units(delta_hz: f64, gamma_sp: f64) -> f64 {
    delta_hz * 2.0 * std::f64::consts::PI / gamma_sp
}

/// Refractive index and intensity absorption coefficient from the complex
/// susceptibility, optically thin convention: `n = 1 + Re chi / 2`,
/// `alpha = (omega_0/c) Im chi`.
pub fn index_and_absorption(chi: C64, wavelength: f64) -> (f64, f64) {
    if chi.norm() > 1e-2 {
        eprintln!(
            "warning: |chi| = {:.3e} is outside the optically thin regime",
            chi.norm()
        );
    }
    let n = 1.0 + chi.re / 2.0;
    let alpha = 2.0 * std::f64::consts::PI / wavelength * chi.im;
    (n, alpha)
}

/// Dispersion `D = dn/dnu` (1/Hz) from the exact offset derivative of the
/// susceptibility in `Gamma` units.
///
/// `nu` runs opposite to `delta = omega_d - omega_p`, hence the sign flip.
pub fn dispersion_from_exact_derivative(dchi_ddelta_gamma: C64, gamma_sp: f64) -> f64 {
    -std::f64::consts::PI * dchi_ddelta_gamma.re / gamma_sp
}

/// One point of a probe spectrum, SI units.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectrumPoint {
    /// Offset `delta = omega_d - omega_p` as ordinary frequency, Hz.
    pub delta_hz: f64,
    pub re_chi: f64,
    pub im_chi: f64,
    /// Refractive index.
    pub n: f64,
    /// Intensity absorption coefficient, 1/m.
    pub alpha_per_m: f64,
    /// Dispersion `dn/dnu`, 1/Hz (exact-derivative path).
    pub d_per_hz: f64,
}

/// Parameters a spectrum was computed with; embedded in every output file so
/// a result is reproducible from its own sidecar.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumMetadata {
    pub f_ground: f64,
    pub f_excited: f64,
    /// Spontaneous decay rate, rad/s.
    pub gamma_sp_rad_s: f64,
    /// Transit relaxation rate, rad/s.
    pub gamma_transit_rad_s: f64,
    pub wavelength_m: f64,
    /// Atomic density, 1/m^3.
    pub density_m3: f64,
    /// Drive saturation parameter `S = 2 Omega^2 / Gamma^2`.
    pub saturation: f64,
    /// Drive detuning in `Gamma` units.
    pub detuning: f64,
    pub drive_polarization: String,
    pub probe_polarization: String,
    /// Offset grid in Hz: first point, last point, count.
    pub grid_hz: (f64, f64, usize),
}

/// A probe spectrum: strictly increasing offsets with the susceptibility and
/// derived observables per point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub points: Vec<SpectrumPoint>,
    pub metadata: SpectrumMetadata,
}

impl Spectrum {
    /// CSV schema: `delta_hz,re_chi,im_chi,n_minus_1,alpha_per_m,d_per_hz`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "delta_hz,re_chi,im_chi,n_minus_1,alpha_per_m,d_per_hz")?;
        for p in &self.points {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                p.delta_hz,
                p.re_chi,
                p.im_chi,
                p.n - 1.0,
                p.alpha_per_m,
                p.d_per_hz
            )?;
        }
        Ok(())
    }

    pub fn deltas_hz(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.delta_hz).collect()
    }

    pub fn indices(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.n).collect()
    }
}

/// Dispersion profile of a spectrum from the stored exact derivatives,
/// cross-checked against central finite differences on the grid.
///
/// Fails if the two estimates disagree by more than 1% where the dispersion
/// is significant (grid too coarse).
pub fn dispersion_profile(spectrum: &Spectrum) -> Result<Vec<f64>> {
    let pts = &spectrum.points;
    if pts.len() < 3 {
        return Ok(pts.iter().map(|p| p.d_per_hz).collect());
    }
    let scale = pts
        .iter()
        .map(|p| p.d_per_hz.abs())
        .fold(0.0f64, f64::max);
    for k in 1..pts.len() - 1 {
        let dn = pts[k + 1].n - pts[k - 1].n;
        let dd = pts[k + 1].delta_hz - pts[k - 1].delta_hz;
        // nu runs opposite to delta.
        let fd = -dn / dd;
        let exact = pts[k].d_per_hz;
        if exact.abs() > 0.5 * scale && (fd - exact).abs() > 0.01 * exact.abs() {
            return Err(Error::numerical(format!(
                "dispersion grid too coarse at delta = {} Hz: exact {:.6e} vs \
                 finite-difference {:.6e}",
                pts[k].delta_hz, exact, fd
            )));
        }
    }
    Ok(pts.iter().map(|p| p.d_per_hz).collect())
}

/// Group velocity, or a divergence flag when `|n + nu D|` falls below
/// [`VG_DIVERGENCE_THRESHOLD`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GroupVelocity {
    Finite { v_m_s: f64 },
    /// Denominator within the divergence window; `sign` is the sign of the
    /// limiting direction of `n + nu D`.
    Divergent { sign: f64 },
}

/// `V_g = c / (n + nu dn/dnu)` with `nu` in Hz and `D` in 1/Hz.
pub fn group_velocity(n: f64, nu: f64, d: f64) -> Result<GroupVelocity> {
    if nu <= 0.0 {
        return Err(Error::domain("optical frequency must be positive"));
    }
    let denom = n + nu * d;
    if denom.abs() < VG_DIVERGENCE_THRESHOLD {
        Ok(GroupVelocity::Divergent {
            sign: if denom >= 0.0 { 1.0 } else { -1.0 },
        })
    } else {
        Ok(GroupVelocity::Finite {
            v_m_s: C_LIGHT / denom,
        })
    }
}

/// Heterodyne phase shift `delta_Phi = l (n - 1) omega / c` over a cell of
/// length `l`.
pub fn phase_shift(n: f64, cell_length: f64, omega: f64) -> Result<f64> {
    if cell_length <= 0.0 {
        return Err(Error::domain("cell length must be positive"));
    }
    Ok(cell_length * (n - 1.0) * omega / C_LIGHT)
}

/// Linear Kerr characterization `n = n1 + n2 I_d` at fixed offset.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KerrFit {
    /// Intercept (index at zero drive intensity).
    pub n1: f64,
    /// Kerr coefficient, m^2/W.
    pub n2_m2_per_w: f64,
    /// Relative fit residual `||n - fit|| / ||n - mean||` (0 for a perfect
    /// line).
    pub residual: f64,
    /// Offset the fit was evaluated at, Hz.
    pub delta_eval_hz: f64,
}

impl KerrFit {
    pub fn n2_cm2_per_w(&self) -> f64 {
        self.n2_m2_per_w * 1e4
    }
}

/// Least-squares line through `(I_d [W/m^2], n)` samples.
pub fn kerr_fit(samples: &[(f64, f64)], delta_eval_hz: f64) -> Result<KerrFit> {
    if samples.len() < 3 {
        return Err(Error::domain("Kerr fit needs at least 3 intensity samples"));
    }
    let m = samples.len() as f64;
    let mean_x = samples.iter().map(|(x, _)| x).sum::<f64>() / m;
    let mean_y = samples.iter().map(|(_, y)| y).sum::<f64>() / m;
    let sxx: f64 = samples.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 || samples.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::domain(
            "Kerr fit needs distinct intensities (degenerate abscissa)",
        ));
    }
    let sxy: f64 = samples
        .iter()
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = samples
        .iter()
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = samples.iter().map(|(_, y)| (y - mean_y).powi(2)).sum();
    let residual = if ss_tot > 0.0 {
        (ss_res / ss_tot).sqrt()
    } else {
        0.0
    };
    Ok(KerrFit {
        n1: intercept,
        n2_m2_per_w: slope,
        residual,
        delta_eval_hz,
    })
}

/// Peak-to-peak refractive index swing and the offsets of the two extrema.
///
/// Fails when an extremum sits on the grid boundary (grid too narrow).
pub fn peak_to_peak(deltas_hz: &[f64], ns: &[f64]) -> Result<(f64, (f64, f64))> {
    if deltas_hz.len() != ns.len() || ns.len() < 3 {
        return Err(Error::domain("need at least 3 spectrum points"));
    }
    let (i_max, _) = ns
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let (i_min, _) = ns
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    if ns[i_max] != ns[i_min]
        && (i_max == 0 || i_max == ns.len() - 1 || i_min == 0 || i_min == ns.len() - 1)
    {
        return Err(Error::numerical(
            "spectrum extremum at grid boundary; widen the offset grid",
        ));
    }
    Ok((
        ns[i_max] - ns[i_min],
        (deltas_hz[i_min], deltas_hz[i_max]),
    ))
}

/// Full derived-scalar report for a spectrum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DispersionReport {
    /// Dispersion at `delta = 0`, 1/Hz.
    pub d0_per_hz: f64,
    pub group_velocity: GroupVelocity,
    /// Peak-to-peak index swing.
    pub delta_n_pp: f64,
    /// Offsets of the index extrema, Hz.
    pub extrema_offsets_hz: (f64, f64),
    /// Heterodyne phase swing for the given cell length, rad (evaluated at
    /// the index maximum).
    pub phase_shift_rad: f64,
    pub cell_length_m: f64,
}

/// Assemble a [`DispersionReport`] from a spectrum that brackets `delta = 0`.
pub fn dispersion_report(spectrum: &Spectrum, cell_length: f64) -> Result<DispersionReport> {
    let deltas = spectrum.deltas_hz();
    let ns = spectrum.indices();
    let d_profile = dispersion_profile(spectrum)?;
    // Point closest to delta = 0.
    let (i0, _) = deltas
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .ok_or_else(|| Error::domain("empty spectrum"))?;
    let d0 = d_profile[i0];
    let nu = C_LIGHT / spectrum.metadata.wavelength_m;
    let vg = group_velocity(ns[i0], nu, d0)?;
    let (delta_n_pp, extrema) = peak_to_peak(&deltas, &ns)?;
    let n_max = ns.iter().fold(f64::MIN, |a, &b| a.max(b));
    let omega = 2.0 * std::f64::consts::PI * nu;
    let phase = phase_shift(n_max, cell_length, omega)?;
    Ok(DispersionReport {
        d0_per_hz: d0,
        group_velocity: vg,
        delta_n_pp,
        extrema_offsets_hz: extrema,
        phase_shift_rad: phase,
        cell_length_m: cell_length,
    })
}
