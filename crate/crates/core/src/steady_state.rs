//! Drive-dressed zeroth-order steady state `rho_0` of the Liouvillian.

use crate::system::{devectorize, vectorize, vectorized_identity, Liouvillian};
use crate::{C64, CMatrix, CVector, Error, Result};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// A physical density matrix: Hermitian, unit trace, positive semidefinite
/// within tolerance.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validate and wrap; violations beyond tolerance abort with diagnostics
    /// rather than being clipped.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let herm = (&matrix - matrix.adjoint()).norm();
        if herm > HERMITICITY_TOL {
            return Err(Error::numerical(format!(
                "density matrix not Hermitian: defect {herm:.3e}"
            )));
        }
        let trace: C64 = matrix.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::numerical(format!(
                "density matrix trace {trace} is not 1"
            )));
        }
        let hermitized = (&matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
        let eigs = hermitized.symmetric_eigenvalues();
        if let Some(lambda) = eigs.iter().find(|l| **l < -POSITIVITY_TOL) {
            return Err(Error::numerical(format!(
                "density matrix has negative eigenvalue {lambda:.3e}"
            )));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Real eigenvalues of the (hermitized) matrix, for diagnostics.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().iter().copied().collect()
    }
}

/// Solve `generator * vec(rho) = 0` with `Tr rho = 1` by replacing one row of
/// the linear system with the trace constraint, then LU-solving the dense
/// system.
pub fn solve_steady_state(liouv: &Liouvillian) -> Result<DensityMatrix> {
    let d = liouv.dim();
    let n = d * d;
    let mut a = liouv.matrix().clone();
    let mut b = CVector::zeros(n);
    // Row 0 of the generator is replaced by the trace row.  Any row works as
    // long as the remaining rows still span the complement of the kernel;
    // row 0 touches a population equation, which the trace row replaces
    // naturally.
    let trace_row = vectorized_identity(d);
    for col in 0..n {
        a[(0, col)] = trace_row[col].conj();
    }
    b[0] = C64::new(1.0, 0.0);

    let lu = a.clone().lu();
    let x = lu.solve(&b).ok_or_else(|| {
        Error::numerical(singular_diagnostics(liouv.matrix()))
    })?;

    // Residual of the original homogeneous system, in Gamma units.
    let residual = (liouv.matrix() * &x).norm();
    let scale = liouv.matrix().norm();
    if residual > 1e-10 * scale.max(1.0) {
        return Err(Error::numerical(format!(
            "steady-state residual {residual:.3e} exceeds tolerance; {}",
            singular_diagnostics(liouv.matrix())
        )));
    }

    let rho = devectorize(&x, d);
    // Symmetrize roundoff before validation.
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    DensityMatrix::new(rho)
}

fn singular_diagnostics(generator: &CMatrix) -> String {
    let svd = generator.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    let smallest: Vec<String> = sv.iter().take(4).map(|s| format!("{s:.3e}")).collect();
    format!(
        "generator null space appears degenerate; smallest singular values: [{}]",
        smallest.join(", ")
    )
}

/// Residual norm `||generator vec(rho)||` of a candidate steady state.
pub fn residual_norm(liouv: &Liouvillian, rho: &DensityMatrix) -> f64 {
    (liouv.matrix() * vectorize(rho.matrix())).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{
        build_generator, DriveField, LevelScheme, Polarization,
    };
    use approx::assert_abs_diff_eq;

    fn steady(scheme: &LevelScheme, s: f64, det: f64) -> DensityMatrix {
        let drive =
            DriveField::from_saturation(s, det, Polarization::pi()).unwrap();
        let liouv = build_generator(scheme, &drive).unwrap();
        solve_steady_state(&liouv).unwrap()
    }

    #[test]
    fn no_drive_isotropic_ground_state() {
        let scheme = LevelScheme::rb_d2_fg2_fe3(1e-3).unwrap();
        let rho = steady(&scheme, 0.0, 0.0);
        let d = scheme.dim();
        let ng = scheme.n_ground();
        for r in 0..d {
            for c in 0..d {
                let expected = if r == c && r < ng {
                    C64::new(1.0 / ng as f64, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((rho.matrix()[(r, c)] - expected).norm() < 1e-12);
            }
        }
    }

    /// Closed-form two-level saturation: for a resonant drive of Rabi
    /// frequency `Omega` (Gamma = 1), the excited population in the
    /// `gamma -> 0` limit is `(Omega^2/4) / (Omega^2/2 + 1/4)`.
    #[test]
    fn two_level_saturation_oracle() {
        let rabi = 0.9f64;
        let expected = (rabi * rabi / 4.0) / (rabi * rabi / 2.0 + 0.25);
        let mut last_err = f64::MAX;
        for gamma in [1e-3, 1e-4, 1e-5] {
            let scheme = LevelScheme::two_level_reference(gamma).unwrap();
            let drive = DriveField::new(rabi, 0.0, Polarization::pi()).unwrap();
            let liouv = build_generator(&scheme, &drive).unwrap();
            let rho = solve_steady_state(&liouv).unwrap();
            // excited m = 0 sits at global index ng + 1 = 2
            let pe = rho.matrix()[(2, 2)].re;
            let err = (pe - expected).abs();
            assert!(err < last_err * 1.01, "no convergence toward closed form");
            last_err = err;
        }
        assert!(last_err < 1e-4, "residual {last_err:.2e}");
    }

    #[test]
    fn eia_transition_develops_ground_zeeman_coherence() {
        // F_g=2 -> F_e=3, linear drive, S ~ 1: Delta m = 2 ground coherences
        // must be nonzero (degenerate-level coherence is the EIA mechanism).
        let scheme = LevelScheme::rb_d2_fg2_fe3(1e-3).unwrap();
        let drive = DriveField::from_saturation(
            1.0,
            0.0,
            Polarization::linear_orthogonal(),
        )
        .unwrap();
        let liouv = build_generator(&scheme, &drive).unwrap();
        let rho = solve_steady_state(&liouv).unwrap();
        let c02 = rho.matrix()[(0, 2)].norm();
        let c13 = rho.matrix()[(1, 3)].norm();
        assert!(
            c02 > 1e-6 || c13 > 1e-6,
            "expected Delta m = 2 ground coherence, got {c02:.2e}, {c13:.2e}"
        );
    }

    #[test]
    fn invariants_over_parameter_grid() {
        let scheme = LevelScheme::rb_d2_fg2_fe3(1e-3).unwrap();
        for k in 0..9 {
            let s = 10f64.powf(-4.0 + k as f64);
            for det in [-5.0, -1.0, 0.0, 2.5, 5.0] {
                let drive = DriveField::from_saturation(
                    s,
                    det,
                    Polarization::pi(),
                )
                .unwrap();
                let liouv = build_generator(&scheme, &drive).unwrap();
                let rho = solve_steady_state(&liouv).unwrap();
                // DensityMatrix::new validated Hermiticity/trace/positivity.
                assert!(residual_norm(&liouv, &rho) < 1e-9);
            }
        }
    }

    #[test]
    fn continuity_in_rabi() {
        let scheme = LevelScheme::rb_d2_fg2_fe3(1e-3).unwrap();
        let mut prev: Option<CMatrix> = None;
        let n_pts = 60;
        for k in 0..=n_pts {
            let rabi = 0.2 + 0.6 * k as f64 / n_pts as f64;
            let drive = DriveField::new(
                rabi,
                0.0,
                Polarization::linear_orthogonal(),
            )
            .unwrap();
            let liouv = build_generator(&scheme, &drive).unwrap();
            let rho = solve_steady_state(&liouv).unwrap();
            if let Some(p) = &prev {
                let jump = (rho.matrix() - p).norm();
                assert!(jump < 0.05, "steady state jumped by {jump:.2e}");
            }
            prev = Some(rho.matrix().clone());
        }
    }

    #[test]
    fn trace_exactly_constrained() {
        let scheme = LevelScheme::rb_d2_fg1_fe0(1e-3).unwrap();
        let rho = steady(&scheme, 0.7, 0.3);
        assert_abs_diff_eq!(rho.matrix().trace().re, 1.0, epsilon = 1e-12);
    }
}
