//! Weak-probe (first-order Floquet) response: complex probe susceptibility
//! `chi(delta)` and its exact offset derivative.
//!
//! The density matrix in the drive rotating frame is expanded as
//! `rho(t) = rho_0 + rho_+ e^{+i delta t} + rho_- e^{-i delta t}` with the
//! probe at `omega_p = omega_d - delta`; the `e^{+i delta t}` component
//! carries the probe response.  `rho_+` solves the resolvent system
//! `(L - i delta) vec(rho_+) = -i/2 vec([V_p, rho_0])` and the co-polarized
//! projection gives `chi`.
//!
//! Sign conventions follow the positive-frequency factor `e^{-i omega t}`:
//! absorption corresponds to `Im chi > 0`, and a narrow absorption *peak*
//! (EIA) produces a positive slope of `Re chi` against `delta` at line
//! center, which is anomalous dispersion (`dn/dnu < 0`) because the probe
//! frequency runs opposite to `delta`.

use crate::steady_state::{solve_steady_state, DensityMatrix};
use crate::system::{
    build_generator, devectorize, probe_coupling_operator, vectorize,
    vectorized_identity, DriveField, LevelScheme, Liouvillian, Polarization,
    ProbeField,
};
use crate::{C64, CMatrix, CVector, Error, Result};

/// Dimensionless calibration constant `C` of the susceptibility prefactor
/// `K = C * 3 lambda^3 N Gamma / (8 pi^2)` (with the response already
/// expressed in `Gamma` units).
///
/// Anchored so that in the two-level linear limit the resonant absorption
/// coefficient equals `N sigma_0` with `sigma_0 = 3 lambda^2 / (2 pi)`; the
/// anchor fixes `C = 1` exactly, which [`calibrate_prefactor`] verifies
/// numerically.
pub const CALIBRATION_CONSTANT: f64 = 1.0;

/// Susceptibility at one probe offset, `Gamma` units.
#[derive(Debug, Clone, Copy)]
pub struct SusceptibilityPoint {
    /// Offset `delta = omega_d - omega_p` in `Gamma` units.
    pub delta: f64,
    /// Complex dimensionless susceptibility.
    pub chi: C64,
    /// Exact derivative `d chi / d delta`, per `Gamma` unit.
    pub dchi_ddelta: C64,
}

/// `K = C * 3 lambda^3 N / (8 pi^2)`, the dimensionless scale between the
/// `Gamma`-unit response and the physical susceptibility.
pub fn susceptibility_prefactor(scheme: &LevelScheme, density: f64) -> f64 {
    CALIBRATION_CONSTANT * 3.0 * scheme.wavelength().powi(3) * density
        / (8.0 * std::f64::consts::PI * std::f64::consts::PI)
}

fn resolvent_solve(
    liouv: &Liouvillian,
    delta: f64,
    rhs: &CVector,
) -> Result<CVector> {
    let n = liouv.matrix().nrows();
    let d = liouv.dim();
    let mut a = liouv.matrix().clone();
    let shift = C64::new(0.0, -delta);
    for k in 0..n {
        a[(k, k)] += shift;
    }
    let mut b = rhs.clone();
    if delta.abs() < 1e-9 {
        // The resolvent degenerates into the (singular) generator; the
        // delta -> 0 limit is the unique solution with zero trace, obtained
        // by replacing one row with the trace constraint.
        let trace_row = vectorized_identity(d);
        for col in 0..n {
            a[(0, col)] = trace_row[col].conj();
        }
        b[0] = C64::new(0.0, 0.0);
    }
    a.lu().solve(&b).ok_or_else(|| {
        Error::numerical(format!(
            "singular resolvent at delta = {delta} (undamped eigenvalue)"
        ))
    })
}

/// First-order probe susceptibility and its exact offset derivative.
///
/// The probe Rabi frequency cancels exactly (first-order contract); it must
/// be nonzero only so the ratio is defined.
pub fn linear_response(
    liouv: &Liouvillian,
    rho0: &DensityMatrix,
    scheme: &LevelScheme,
    probe: &ProbeField,
    density: f64,
) -> Result<SusceptibilityPoint> {
    if probe.rabi() <= 0.0 {
        return Err(Error::domain(
            "probe Rabi frequency must be positive (chi is its Omega_p -> 0 limit)",
        ));
    }
    let delta = probe.offset();
    let vp = probe_coupling_operator(scheme, probe);
    let commutator = &vp * rho0.matrix() - rho0.matrix() * &vp;
    let source = vectorize(&commutator) * C64::new(0.0, -0.5);

    let x_plus = resolvent_solve(liouv, delta, &source)?;
    let rho_plus = devectorize(&x_plus, liouv.dim());

    // d/d delta of the resolvent system: (L - i delta) rho_+' = i rho_+.
    let x_prime = resolvent_solve(liouv, delta, &(&x_plus * C64::i()))?;
    let rho_prime = devectorize(&x_prime, liouv.dim());

    let prefactor = susceptibility_prefactor(scheme, density);
    let scale = C64::new(2.0 * prefactor / (probe.rabi() * probe.rabi()), 0.0);
    let project = |rho: &CMatrix| (vp.adjoint() * rho).trace() * scale;
    Ok(SusceptibilityPoint {
        delta,
        chi: project(&rho_plus),
        dchi_ddelta: project(&rho_prime),
    })
}

/// Numerically determine the calibration constant `C` from the resonant
/// cross-section anchor: for `F_g=0 -> F_e=1`, `Omega -> 0`, `gamma -> 0`,
/// the peak absorption coefficient must equal `N sigma_0` with
/// `sigma_0 = 3 lambda^2 / (2 pi)`.
///
/// Independent of the scheme passed in (only its wavelength is reused); the
/// result extrapolates the `gamma -> 0` limit sequence.
pub fn calibrate_prefactor(scheme: &LevelScheme) -> Result<f64> {
    let density = 1e15; // cancels exactly
    let sigma0 = 3.0 * scheme.wavelength().powi(2) / (2.0 * std::f64::consts::PI);
    let mut estimates = Vec::new();
    let gammas = [1e-5, 1e-6];
    for gamma in gammas {
        let reference = LevelScheme::new(
            crate::angular::AngularMomentum::integer(0),
            crate::angular::AngularMomentum::integer(1),
            scheme.gamma_sp(),
            gamma * scheme.gamma_sp(),
            scheme.wavelength(),
        )?;
        let drive =
            DriveField::new(1e-6, 0.0, Polarization::pi()).unwrap();
        let liouv = build_generator(&reference, &drive)?;
        let rho0 = solve_steady_state(&liouv)?;
        let probe = ProbeField::new(1e-6, 0.0, Polarization::pi()).unwrap();
        let point = linear_response(&liouv, &rho0, &reference, &probe, density)?;
        let alpha = 2.0 * std::f64::consts::PI / reference.wavelength() * point.chi.im;
        let ratio = alpha / (density * sigma0);
        estimates.push(1.0 / ratio);
    }
    // The finite-gamma error is linear in gamma; extrapolate to zero.
    let (g1, g2) = (gammas[0], gammas[1]);
    Ok((g1 * estimates[1] - g2 * estimates[0]) / (g1 - g2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const DENSITY: f64 = 1e15;

    fn response_setup(
        scheme: &LevelScheme,
        s: f64,
        drive_pol: Polarization,
    ) -> (Liouvillian, DensityMatrix) {
        let drive = DriveField::from_saturation(s, 0.0, drive_pol).unwrap();
        let liouv = build_generator(scheme, &drive).unwrap();
        let rho0 = solve_steady_state(&liouv).unwrap();
        (liouv, rho0)
    }

    fn chi_at(
        liouv: &Liouvillian,
        rho0: &DensityMatrix,
        scheme: &LevelScheme,
        delta: f64,
    ) -> SusceptibilityPoint {
        let probe = ProbeField::new(
            1e-4,
            delta,
            Polarization::linear_orthogonal(),
        )
        .unwrap();
        linear_response(liouv, rho0, scheme, &probe, DENSITY).unwrap()
    }

    #[test]
    fn linear_absorption_lorentzian() {
        // Omega -> 0, F_g=0 -> F_e=1, Delta = 0: Im chi is a Lorentzian of
        // half-width Gamma/2 + gamma in the offset, Re chi = 0 at center.
        let gamma = 1e-3;
        let scheme = LevelScheme::two_level_reference(gamma).unwrap();
        let (liouv, rho0) = response_setup(&scheme, 0.0, Polarization::pi());
        let beta = 0.5 + gamma;
        let center = chi_at(&liouv, &rho0, &scheme, 0.0);
        assert!(center.chi.im > 0.0);
        assert_abs_diff_eq!(center.chi.re, 0.0, epsilon = 1e-18);
        let half = chi_at(&liouv, &rho0, &scheme, beta);
        assert_relative_eq!(half.chi.im, center.chi.im / 2.0, max_relative = 1e-9);
        // Lorentzian shape at a couple more points.
        for x in [0.3, 2.0] {
            let p = chi_at(&liouv, &rho0, &scheme, x * beta);
            assert_relative_eq!(
                p.chi.im,
                center.chi.im / (1.0 + x * x),
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn probe_power_independence() {
        let scheme = LevelScheme::rb_d2_fg2_fe3(1e-3).unwrap();
        let (liouv, rho0) =
            response_setup(&scheme, 0.5, Polarization::pi());
        let chi = |rabi: f64| {
            let probe = ProbeField::new(
                rabi,
                0.3e-3,
                Polarization::linear_orthogonal(),
            )
            .unwrap();
            linear_response(&liouv, &rho0, &scheme, &probe, DENSITY)
                .unwrap()
                .chi
        };
        let a = chi(1e-3);
        let b = chi(5e-4);
        assert!((a - b).norm() / a.norm() < 1e-12);
    }

    #[test]
    fn exact_derivative_matches_finite_differences() {
        let gamma = 1e-3;
        let scheme = LevelScheme::rb_d2_fg2_fe3(gamma).unwrap();
        let (liouv, rho0) =
            response_setup(&scheme, 0.5, Polarization::pi());
        let h = 1e-3 * gamma;
        for delta in [-3.0 * gamma, 0.0, 0.4 * gamma, 2.0 * gamma, 0.8] {
            let p = chi_at(&liouv, &rho0, &scheme, delta);
            let plus = chi_at(&liouv, &rho0, &scheme, delta + h);
            let minus = chi_at(&liouv, &rho0, &scheme, delta - h);
            let fd = (plus.chi - minus.chi) / C64::new(2.0 * h, 0.0);
            assert!(
                (fd - p.dchi_ddelta).norm() / p.dchi_ddelta.norm() < 1e-6,
                "delta = {delta}: exact {:?} vs fd {:?}",
                p.dchi_ddelta,
                fd
            );
        }
    }

    #[test]
    fn density_linearity() {
        let scheme = LevelScheme::rb_d2_fg2_fe3(1e-3).unwrap();
        let (liouv, rho0) =
            response_setup(&scheme, 0.5, Polarization::pi());
        let probe = ProbeField::new(
            1e-4,
            0.5e-3,
            Polarization::linear_orthogonal(),
        )
        .unwrap();
        let a = linear_response(&liouv, &rho0, &scheme, &probe, DENSITY).unwrap();
        let b =
            linear_response(&liouv, &rho0, &scheme, &probe, 2.0 * DENSITY).unwrap();
        assert!((b.chi - a.chi * 2.0).norm() <= 1e-12 * b.chi.norm());
        // 100x over two decades
        let c =
            linear_response(&liouv, &rho0, &scheme, &probe, 100.0 * DENSITY).unwrap();
        assert!((c.chi - a.chi * 100.0).norm() <= 1e-12 * c.chi.norm());
    }

    #[test]
    fn eia_absorption_peak_and_anomalous_dispersion() {
        // F_g=2 -> F_e=3 at moderate saturation: enhanced absorption at
        // delta = 0 with a subnatural peak, and anomalous dispersion
        // D = dn/dnu < 0 at line center.
        let gamma = 1e-3;
        let scheme = LevelScheme::rb_d2_fg2_fe3(gamma).unwrap();
        let (liouv, rho0) =
            response_setup(&scheme, 0.25, Polarization::pi());
        let center = chi_at(&liouv, &rho0, &scheme, 0.0);
        let wing = chi_at(&liouv, &rho0, &scheme, 30.0 * gamma);
        assert!(
            center.chi.im > wing.chi.im,
            "expected EIA absorption enhancement"
        );
        let d0 = crate::optics::dispersion_from_exact_derivative(
            center.dchi_ddelta,
            scheme.gamma_sp(),
        );
        assert!(d0 < 0.0, "expected anomalous dispersion, got D = {d0:.3e}");
    }

    #[test]
    fn calibration_constant_is_unity() {
        let scheme = LevelScheme::rb_d2_fg2_fe3(1e-3).unwrap();
        let c = calibrate_prefactor(&scheme).unwrap();
        assert_abs_diff_eq!(c, CALIBRATION_CONSTANT, epsilon = 1e-4);
    }

    #[test]
    fn calibration_independent_of_density_and_probe_power() {
        // C is a pure number; the anchor ratio must not move with N.  The
        // cancellation is structural, so a single re-evaluation with the
        // internals exercised at another density suffices.
        let gamma = 1e-6;
        let scheme = LevelScheme::two_level_reference(gamma).unwrap();
        let sigma0 =
            3.0 * scheme.wavelength().powi(2) / (2.0 * std::f64::consts::PI);
        let drive = DriveField::new(1e-6, 0.0, Polarization::pi()).unwrap();
        let liouv = build_generator(&scheme, &drive).unwrap();
        let rho0 = solve_steady_state(&liouv).unwrap();
        for density in [1e12, 1e16] {
            for rabi in [1e-3, 2e-5] {
                let probe =
                    ProbeField::new(rabi, 0.0, Polarization::pi()).unwrap();
                let p =
                    linear_response(&liouv, &rho0, &scheme, &probe, density)
                        .unwrap();
                let alpha = 2.0 * std::f64::consts::PI / scheme.wavelength()
                    * p.chi.im;
                assert_relative_eq!(
                    alpha / (density * sigma0),
                    1.0,
                    max_relative = 1e-4
                );
            }
        }
    }

    #[test]
    fn kramers_kronig_consistency() {
        // chi as a function of probe frequency must satisfy the dispersion
        // relation; evaluate the principal-value transform of Im chi on a
        // wide grid and compare against Re chi.  Grid truncation and
        // discretization keep this approximate.
        let gamma = 0.1;
        let scheme = LevelScheme::rb_d2_fg1_fe0(gamma).unwrap();
        let (liouv, rho0) =
            response_setup(&scheme, 0.5, Polarization::pi());
        let half_span = 40.0;
        let n = 4001usize;
        let h = 2.0 * half_span / (n - 1) as f64;
        // Probe-frequency axis x = -delta (nu increases with x).
        let xs: Vec<f64> = (0..n).map(|k| -half_span + k as f64 * h).collect();
        let chis: Vec<C64> = xs
            .iter()
            .map(|x| chi_at(&liouv, &rho0, &scheme, -x).chi)
            .collect();
        let im: Vec<f64> = chis.iter().map(|c| c.im).collect();
        let re: Vec<f64> = chis.iter().map(|c| c.re).collect();
        let re_scale = re.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let mut worst: f64 = 0.0;
        for i in (200..n - 200).step_by(40) {
            let mut pv = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                pv += im[j] / (xs[j] - xs[i]);
            }
            let slope = (im[i + 1] - im[i - 1]) / (2.0 * h);
            let predicted = (pv * h + 2.0 * h * slope) / std::f64::consts::PI;
            worst = worst.max((predicted - re[i]).abs() / re_scale);
        }
        assert!(worst < 0.05, "KK residual {worst:.3}");
    }
}
