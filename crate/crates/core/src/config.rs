//! JSON run configuration with explicit unit suffixes on every physical
//! quantity, normalized to internal `Gamma` units on resolution.
//!
//! The experimental literature mixes kHz offsets, MHz rates, mW/cm^2
//! intensities, and cm lengths; requiring a unit string on each field makes
//! silent unit errors impossible.  Defaults reproduce the canonical
//! configuration: exact resonance, `Gamma/gamma = 1000`, orthogonal linear
//! drive and probe polarizations.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::angular::AngularMomentum;
use crate::optics::hz_to_gamma_units;
use crate::sweeps::{
    intensity_from_rabi_squared, rabi_squared_from_intensity, Grid, SweepPlan,
};
use crate::system::{LevelScheme, Polarization};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub medium: MediumSection,
    #[serde(default)]
    pub grids: GridsSection,
    /// Worker-thread count; 0 or absent selects the runtime default.
    #[serde(default)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub f_ground: u32,
    pub f_excited: u32,
    /// Natural linewidth as ordinary frequency, e.g. `"6.0666 MHz"`.
    #[serde(default = "default_gamma_sp")]
    pub gamma_sp: String,
    /// Transit relaxation rate; defaults to `gamma_sp / 1000`.
    #[serde(default)]
    pub gamma_transit: Option<String>,
    #[serde(default = "default_wavelength")]
    pub wavelength: String,
}

fn default_gamma_sp() -> String {
    "6.0666 MHz".into()
}

fn default_wavelength() -> String {
    "780.24 nm".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Dimensionless `S = 2 Omega^2 / Gamma^2`; exclusive with `intensity`.
    #[serde(default)]
    pub saturation: Option<f64>,
    /// Drive intensity with unit, e.g. `"0.8 mW/cm^2"`.
    #[serde(default)]
    pub intensity: Option<String>,
    /// Drive detuning from the atomic resonance, ordinary frequency.
    #[serde(default = "default_detuning")]
    pub detuning: String,
    /// `"pi"` (or `"linear"`), `"sigma+"`, `"sigma-"`.
    #[serde(default = "default_drive_pol")]
    pub polarization: String,
    /// Probe polarization; additionally `"linear_orthogonal"`.
    #[serde(default = "default_probe_pol")]
    pub probe_polarization: String,
}

fn default_detuning() -> String {
    "0 Hz".into()
}

fn default_drive_pol() -> String {
    "pi".into()
}

fn default_probe_pol() -> String {
    "linear_orthogonal".into()
}

impl Default for DriveSection {
    fn default() -> Self {
        DriveSection {
            saturation: None,
            intensity: None,
            detuning: default_detuning(),
            polarization: default_drive_pol(),
            probe_polarization: default_probe_pol(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSection {
    /// Atomic density, e.g. `"1e10 cm^-3"`.
    #[serde(default = "default_density")]
    pub density: String,
    #[serde(default = "default_cell_length")]
    pub cell_length: String,
}

fn default_density() -> String {
    "1e10 cm^-3".into()
}

fn default_cell_length() -> String {
    "5 cm".into()
}

impl Default for MediumSection {
    fn default() -> Self {
        MediumSection {
            density: default_density(),
            cell_length: default_cell_length(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsSection {
    #[serde(default)]
    pub spectrum: Option<SpectrumGridSection>,
    #[serde(default)]
    pub saturation: Option<ScanGridSection>,
    #[serde(default)]
    pub intensity: Option<IntensityGridSection>,
    /// Offset the Kerr fit is evaluated at, ordinary frequency.
    #[serde(default)]
    pub delta_eval: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumGridSection {
    pub delta_min: String,
    pub delta_max: String,
    pub points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGridSection {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default = "default_true")]
    pub log: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntensityGridSection {
    pub min: String,
    pub max: String,
    pub points: usize,
}

/// Quantity parsing: `"<number> <unit>"`.
fn parse_quantity(raw: &str, field: &str, units: &[(&str, f64)]) -> Result<f64> {
    let mut parts = raw.split_whitespace();
    let (Some(number), Some(unit), None) =
        (parts.next(), parts.next(), parts.next())
    else {
        return Err(Error::config(format!(
            "{field}: expected \"<value> <unit>\", got {raw:?}"
        )));
    };
    let value: f64 = number.parse().map_err(|_| {
        Error::config(format!("{field}: cannot parse number {number:?}"))
    })?;
    let scale = units
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            let known: Vec<&str> = units.iter().map(|(u, _)| *u).collect();
            Error::config(format!(
                "{field}: unknown unit {unit:?} (known: {})",
                known.join(", ")
            ))
        })?;
    Ok(value * scale)
}

/// Ordinary frequency in Hz.
pub fn parse_frequency(raw: &str, field: &str) -> Result<f64> {
    parse_quantity(
        raw,
        field,
        &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)],
    )
}

/// Length in m.
pub fn parse_length(raw: &str, field: &str) -> Result<f64> {
    parse_quantity(
        raw,
        field,
        &[("nm", 1e-9), ("um", 1e-6), ("mm", 1e-3), ("cm", 1e-2), ("m", 1.0)],
    )
}

/// Number density in 1/m^3.
pub fn parse_density(raw: &str, field: &str) -> Result<f64> {
    parse_quantity(raw, field, &[("cm^-3", 1e6), ("m^-3", 1.0)])
}

/// Intensity in W/m^2.
pub fn parse_intensity(raw: &str, field: &str) -> Result<f64> {
    parse_quantity(
        raw,
        field,
        &[
            ("W/m^2", 1.0),
            ("mW/cm^2", 10.0),
            ("uW/cm^2", 1e-2),
            ("W/cm^2", 1e4),
        ],
    )
}

fn parse_polarization(raw: &str, field: &str) -> Result<Polarization> {
    match raw {
        "pi" | "linear" => Ok(Polarization::pi()),
        "sigma+" => Ok(Polarization::sigma_plus()),
        "sigma-" => Ok(Polarization::sigma_minus()),
        "linear_orthogonal" | "orthogonal" => {
            Ok(Polarization::linear_orthogonal())
        }
        other => Err(Error::config(format!(
            "{field}: unknown polarization {other:?} \
             (known: pi, linear, sigma+, sigma-, linear_orthogonal)"
        ))),
    }
}

/// A configuration with all quantities normalized to internal units.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scheme: LevelScheme,
    pub plan: SweepPlan,
    /// Cell length, m.
    pub cell_length: f64,
    /// Spectrum offset grid, `Gamma` units.
    pub spectrum_grid: Grid,
    pub saturation_grid: Grid,
    /// Drive intensity grid, W/m^2.
    pub intensity_grid: Grid,
    /// Kerr evaluation offset, `Gamma` units.
    pub delta_eval: f64,
    pub workers: Option<usize>,
    pub summary: ResolvedSummary,
}

/// Flat, unit-annotated record of every resolved parameter; embedded in all
/// output sidecars so a result is reproducible from its own file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedSummary {
    pub f_ground: u32,
    pub f_excited: u32,
    pub gamma_sp_rad_s: f64,
    pub gamma_transit_rad_s: f64,
    pub wavelength_m: f64,
    pub saturation: f64,
    pub drive_intensity_w_m2: f64,
    pub detuning_gamma_units: f64,
    pub drive_polarization: String,
    pub probe_polarization: String,
    pub density_m3: f64,
    pub cell_length_m: f64,
    pub workers: Option<usize>,
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::config(format!("cannot read {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text).map_err(|e| {
        Error::config(format!("{}: {e}", path.display()))
    })
}

impl RunConfig {
    /// Validate, apply defaults, and convert every quantity to internal
    /// units.
    pub fn resolve(&self) -> Result<Resolved> {
        let gamma_sp_hz = parse_frequency(&self.scheme.gamma_sp, "scheme.gamma_sp")?;
        let gamma_sp = 2.0 * std::f64::consts::PI * gamma_sp_hz;
        let gamma_transit = match &self.scheme.gamma_transit {
            Some(raw) => {
                2.0 * std::f64::consts::PI
                    * parse_frequency(raw, "scheme.gamma_transit")?
            }
            None => gamma_sp / 1000.0,
        };
        let wavelength = parse_length(&self.scheme.wavelength, "scheme.wavelength")?;
        let scheme = LevelScheme::new(
            AngularMomentum::integer(self.scheme.f_ground),
            AngularMomentum::integer(self.scheme.f_excited),
            gamma_sp,
            gamma_transit,
            wavelength,
        )
        .map_err(|e| Error::config(format!("scheme: {e}")))?;

        let (saturation, intensity_w_m2) =
            match (self.drive.saturation, &self.drive.intensity) {
                (Some(_), Some(_)) => {
                    return Err(Error::config(
                        "drive: saturation and intensity are exclusive; \
                         give exactly one",
                    ))
                }
                (Some(s), None) => {
                    if s < 0.0 {
                        return Err(Error::config(
                            "drive.saturation: must be non-negative",
                        ));
                    }
                    (s, intensity_from_rabi_squared(&scheme, s / 2.0))
                }
                (None, Some(raw)) => {
                    let i = parse_intensity(raw, "drive.intensity")?;
                    (2.0 * rabi_squared_from_intensity(&scheme, i), i)
                }
                (None, None) => {
                    return Err(Error::config(
                        "drive: either saturation or intensity is required",
                    ))
                }
            };
        let detuning = hz_to_gamma_units(
            parse_frequency(&self.drive.detuning, "drive.detuning")?,
            gamma_sp,
        );
        let drive_polarization =
            parse_polarization(&self.drive.polarization, "drive.polarization")?;
        let probe_polarization = parse_polarization(
            &self.drive.probe_polarization,
            "drive.probe_polarization",
        )?;

        let density = parse_density(&self.medium.density, "medium.density")?;
        let cell_length =
            parse_length(&self.medium.cell_length, "medium.cell_length")?;
        if cell_length <= 0.0 {
            return Err(Error::config("medium.cell_length: must be positive"));
        }

        let gamma_ratio = scheme.transit_ratio();
        let spectrum_grid = match &self.grids.spectrum {
            Some(g) => {
                let lo = hz_to_gamma_units(
                    parse_frequency(&g.delta_min, "grids.spectrum.delta_min")?,
                    gamma_sp,
                );
                let hi = hz_to_gamma_units(
                    parse_frequency(&g.delta_max, "grids.spectrum.delta_max")?,
                    gamma_sp,
                );
                Grid::linear(lo, hi, g.points)
                    .map_err(|e| Error::config(format!("grids.spectrum: {e}")))?
            }
            None => Grid::linear(-20.0 * gamma_ratio, 20.0 * gamma_ratio, 201)
                .expect("default spectrum grid"),
        };
        let saturation_grid = match &self.grids.saturation {
            Some(g) => {
                let build: fn(f64, f64, usize) -> Result<Grid> =
                    if g.log { Grid::log } else { Grid::linear };
                build(g.min, g.max, g.points)
                    .map_err(|e| Error::config(format!("grids.saturation: {e}")))?
            }
            None => Grid::log(1e-4, 1e3, 30).expect("default saturation grid"),
        };
        let intensity_grid = match &self.grids.intensity {
            Some(g) => {
                let lo = parse_intensity(&g.min, "grids.intensity.min")?;
                let hi = parse_intensity(&g.max, "grids.intensity.max")?;
                Grid::linear(lo, hi, g.points)
                    .map_err(|e| Error::config(format!("grids.intensity: {e}")))?
            }
            None => {
                // Linear Kerr regime: Omega^2 up to 0.01 Gamma gamma.
                let hi = intensity_from_rabi_squared(&scheme, 0.01 * gamma_ratio);
                Grid::linear(hi / 10.0, hi, 8).expect("default intensity grid")
            }
        };
        let delta_eval = match &self.grids.delta_eval {
            Some(raw) => hz_to_gamma_units(
                parse_frequency(raw, "grids.delta_eval")?,
                gamma_sp,
            ),
            None => 0.3 * gamma_ratio,
        };

        let plan = SweepPlan {
            scheme,
            saturation,
            detuning,
            density,
            drive_polarization,
            probe_polarization,
        };
        let summary = ResolvedSummary {
            f_ground: self.scheme.f_ground,
            f_excited: self.scheme.f_excited,
            gamma_sp_rad_s: gamma_sp,
            gamma_transit_rad_s: gamma_transit,
            wavelength_m: wavelength,
            saturation,
            drive_intensity_w_m2: intensity_w_m2,
            detuning_gamma_units: detuning,
            drive_polarization: self.drive.polarization.clone(),
            probe_polarization: self.drive.probe_polarization.clone(),
            density_m3: density,
            cell_length_m: cell_length,
            workers: self.workers,
        };
        Ok(Resolved {
            scheme,
            plan,
            cell_length,
            spectrum_grid,
            saturation_grid,
            intensity_grid,
            delta_eval,
            workers: self.workers,
            summary,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{RB_D2_GAMMA, RB_D2_WAVELENGTH};
    use approx::assert_relative_eq;

    fn minimal(extra: &str) -> String {
        format!(
            r#"{{"scheme": {{"f_ground": 2, "f_excited": 3}},
                "drive": {{"saturation": 0.5{extra}}}}}"#
        )
    }

    fn parse(text: &str) -> Result<Resolved> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::config(e.to_string()))?;
        config.resolve()
    }

    #[test]
    fn minimal_config_gets_documented_defaults() {
        let r = parse(&minimal("")).unwrap();
        assert_relative_eq!(r.scheme.gamma_sp(), RB_D2_GAMMA, max_relative = 1e-12);
        assert_relative_eq!(r.scheme.transit_ratio(), 1e-3, max_relative = 1e-12);
        assert_relative_eq!(
            r.scheme.wavelength(),
            RB_D2_WAVELENGTH,
            max_relative = 1e-12
        );
        assert_eq!(r.plan.detuning, 0.0);
        assert_eq!(r.plan.drive_polarization, Polarization::pi());
        assert_eq!(
            r.plan.probe_polarization,
            Polarization::linear_orthogonal()
        );
        assert_relative_eq!(r.cell_length, 0.05, max_relative = 1e-12);
        assert_eq!(r.saturation_grid.len(), 30);
        assert_eq!(r.workers, None);
    }

    #[test]
    fn intensity_round_trips_through_conversion() {
        let r = parse(
            r#"{"scheme": {"f_ground": 2, "f_excited": 3},
                "drive": {"intensity": "0.8 mW/cm^2"}}"#,
        )
        .unwrap();
        // 0.8 mW/cm^2 = 8 W/m^2; S = 2 Omega^2.
        assert_relative_eq!(
            intensity_from_rabi_squared(&r.scheme, r.plan.saturation / 2.0),
            8.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn transit_faster_than_decay_rejected() {
        let err = parse(
            r#"{"scheme": {"f_ground": 2, "f_excited": 3,
                           "gamma_transit": "7 MHz"},
                "drive": {"saturation": 0.5}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn unknown_unit_names_the_field() {
        let err = parse(
            r#"{"scheme": {"f_ground": 2, "f_excited": 3,
                           "wavelength": "780.24 furlong"},
                "drive": {"saturation": 0.5}}"#,
        )
        .unwrap_err();
        let message = err.to_string();
        assert!(message.contains("scheme.wavelength"), "{message}");
        assert!(message.contains("furlong"), "{message}");
    }

    #[test]
    fn unitless_quantity_rejected() {
        let err = parse(
            r#"{"scheme": {"f_ground": 2, "f_excited": 3},
                "drive": {"saturation": 0.5, "detuning": "100"}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("drive.detuning"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(parse(&minimal(r#", "chirp": 1.0"#)).is_err());
    }

    #[test]
    fn saturation_and_intensity_exclusive() {
        let err = parse(
            r#"{"scheme": {"f_ground": 2, "f_excited": 3},
                "drive": {"saturation": 0.5, "intensity": "1 W/m^2"}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("exclusive"), "{err}");
        let err = parse(r#"{"scheme": {"f_ground": 2, "f_excited": 3}}"#)
            .unwrap_err();
        assert!(err.to_string().contains("required"), "{err}");
    }

    #[test]
    fn detuning_converts_to_gamma_units() {
        let r = parse(
            r#"{"scheme": {"f_ground": 1, "f_excited": 0},
                "drive": {"saturation": 0.5, "detuning": "6.0666 MHz"}}"#,
        )
        .unwrap();
        assert_relative_eq!(r.plan.detuning, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn explicit_grids_parsed() {
        let r = parse(
            r#"{"scheme": {"f_ground": 2, "f_excited": 3},
                "drive": {"saturation": 0.5},
                "grids": {
                  "spectrum": {"delta_min": "-120 kHz",
                               "delta_max": "120 kHz", "points": 41},
                  "saturation": {"min": 0.01, "max": 10.0, "points": 7},
                  "delta_eval": "2 kHz"}}"#,
        )
        .unwrap();
        assert_eq!(r.spectrum_grid.len(), 41);
        assert_eq!(r.saturation_grid.len(), 7);
        assert_relative_eq!(
            r.spectrum_grid.values()[40],
            hz_to_gamma_units(120e3, RB_D2_GAMMA),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            r.delta_eval,
            hz_to_gamma_units(2e3, RB_D2_GAMMA),
            max_relative = 1e-12
        );
    }
}
