//! Brute-force time-domain oracle for the probe susceptibility.
//!
//! Integrates the full time-dependent master equation in the drive rotating
//! frame with an explicitly oscillating probe term, then extracts the probe
//! polarization component by phase-cycled lock-in projection.  Everything is
//! done in matrix form (no superoperator vectorization) starting from the
//! isotropic ground state, so the result is independent of the resolvent
//! path it verifies.
//!
//! The probe coupling is run four times with carrier phases `0, pi/2, pi,
//! 3pi/2`; the discrete Fourier combination over the phase cancels the
//! drive-only background, the counter-rotating first-order component, and
//! all second-order probe terms exactly, so the projection window does not
//! need to be an integer number of beat periods and the same code path
//! covers `delta = 0`.

use rayon::prelude::*;

use crate::probe_response::susceptibility_prefactor;
use crate::system::{
    drive_hamiltonian, equilibrium_state, jump_operators, raising_operator,
    DriveField, LevelScheme, ProbeField,
};
use crate::{C64, CMatrix, Error, Result};

pub const TRACE_DRIFT_TOL: f64 = 1e-9;
pub const HERMITICITY_DRIFT_TOL: f64 = 1e-9;
pub const POSITIVITY_DRIFT_TOL: f64 = 1e-8;

/// Fixed-step integration parameters, `Gamma` units of time except where
/// noted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    /// RK4 step; the rates span `gamma..Gamma`, so `step <= 0.01` resolves
    /// the fast scale with margin.
    pub step: f64,
    /// Settling time before projection, in multiples of `1/gamma` (the
    /// slowest relaxation); transients must decay below the probe signal.
    pub settle: f64,
    /// Projection window length.
    pub window: f64,
    /// Relative tolerance for the step-halving convergence estimate.
    pub tolerance: f64,
    /// Re-run at half step and Richardson-check the difference.
    pub check_convergence: bool,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig {
            step: 0.01,
            settle: 20.0,
            window: 50.0,
            tolerance: 1e-6,
            check_convergence: false,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= 0.02) {
            return Err(Error::domain(
                "integration step must lie in (0, 0.02] / Gamma",
            ));
        }
        if self.settle < 5.0 {
            return Err(Error::domain(
                "settle time must be at least 5 / gamma",
            ));
        }
        if self.window <= 0.0 || self.tolerance <= 0.0 {
            return Err(Error::domain(
                "window and tolerance must be positive",
            ));
        }
        Ok(())
    }
}

/// Matrix-form right-hand side of the master equation with the oscillating
/// probe, evaluated directly (commutator + jump sandwiches + transit).
struct Propagator {
    h0: CMatrix,
    probe_raising: CMatrix,
    probe_lowering: CMatrix,
    jumps: Vec<(CMatrix, CMatrix)>,
    anticomm: CMatrix,
    rho_eq: CMatrix,
    gamma: f64,
    probe_rabi: f64,
    delta: f64,
    phase: f64,
}

impl Propagator {
    fn new(
        scheme: &LevelScheme,
        drive: &DriveField,
        probe: &ProbeField,
        phase: f64,
    ) -> Self {
        let couplings = scheme.couplings();
        let probe_raising =
            raising_operator(&couplings, probe.polarization());
        let probe_lowering = probe_raising.adjoint();
        let jumps: Vec<(CMatrix, CMatrix)> = jump_operators(scheme)
            .into_iter()
            .map(|c| {
                let cd = c.adjoint();
                (c, cd)
            })
            .collect();
        let mut anticomm = CMatrix::zeros(scheme.dim(), scheme.dim());
        for (c, cd) in &jumps {
            anticomm += cd * c;
        }
        Propagator {
            h0: drive_hamiltonian(scheme, drive),
            probe_raising,
            probe_lowering,
            jumps,
            anticomm,
            rho_eq: equilibrium_state(scheme),
            gamma: scheme.transit_ratio(),
            probe_rabi: probe.rabi(),
            delta: probe.offset(),
            phase,
        }
    }

    fn rhs(&self, t: f64, rho: &CMatrix) -> CMatrix {
        // Probe coupling -(Omega_p/2)(e^{i(delta t + phi)} D + h.c.), same
        // sign convention as the static drive term.
        let z = C64::from_polar(
            self.probe_rabi / 2.0,
            self.delta * t + self.phase,
        );
        let h = &self.h0
            - (&self.probe_raising * z + &self.probe_lowering * z.conj());
        let mut out = (&h * rho - rho * &h) * C64::new(0.0, -1.0);
        for (c, cd) in &self.jumps {
            out += (c * rho) * cd;
        }
        out -= (&self.anticomm * rho + rho * &self.anticomm)
            * C64::new(0.5, 0.0);
        out += (&self.rho_eq * rho.trace() - rho) * C64::new(self.gamma, 0.0);
        out
    }

    fn rk4_step(&self, t: f64, h: f64, rho: &CMatrix) -> CMatrix {
        let half = C64::new(h / 2.0, 0.0);
        let k1 = self.rhs(t, rho);
        let k2 = self.rhs(t + h / 2.0, &(rho + &k1 * half));
        let k3 = self.rhs(t + h / 2.0, &(rho + &k2 * half));
        let k4 = self.rhs(t + h, &(rho + &k3 * C64::new(h, 0.0)));
        let two = C64::new(2.0, 0.0);
        rho + (k1 + k2 * two + k3 * two + k4) * C64::new(h / 6.0, 0.0)
    }
}

fn check_state(rho: &CMatrix, t: f64, positivity: bool) -> Result<()> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_DRIFT_TOL || tr.im.abs() > TRACE_DRIFT_TOL {
        return Err(Error::numerical(format!(
            "trace drifted to {tr} at t = {t:.1}"
        )));
    }
    let herm = (rho - rho.adjoint()).norm();
    if herm > HERMITICITY_DRIFT_TOL {
        return Err(Error::numerical(format!(
            "Hermiticity defect {herm:.3e} at t = {t:.1}"
        )));
    }
    if positivity {
        let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
        if let Some(lambda) = h
            .symmetric_eigenvalues()
            .iter()
            .find(|l| **l < -POSITIVITY_DRIFT_TOL)
        {
            return Err(Error::numerical(format!(
                "negative eigenvalue {lambda:.3e} at t = {t:.1}"
            )));
        }
    }
    Ok(())
}

/// One settle-and-project run at a fixed probe carrier phase; returns the
/// window average of `Tr(D_p^dag rho(t)) e^{-i delta t}`.
fn propagate_and_project(
    prop: &Propagator,
    scheme: &LevelScheme,
    config: &IntegrationConfig,
    step: f64,
) -> Result<C64> {
    let settle_time = config.settle / scheme.transit_ratio();
    let settle_steps = (settle_time / step).ceil() as usize;
    let window_steps = (config.window / step).ceil() as usize;
    let check_every = 1000usize;

    let mut rho = equilibrium_state(scheme);
    for i in 0..settle_steps {
        let t = i as f64 * step;
        rho = prop.rk4_step(t, step, &rho);
        if (i + 1) % check_every == 0 {
            check_state(&rho, t + step, false)?;
        }
    }
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..window_steps {
        let t = (settle_steps + j) as f64 * step;
        rho = prop.rk4_step(t, step, &rho);
        let t1 = t + step;
        let g = (&prop.probe_lowering * &rho).trace();
        acc += g * C64::from_polar(1.0, -prop.delta * t1);
        if (j + 1) % check_every == 0 {
            check_state(&rho, t1, false)?;
        }
    }
    check_state(&rho, (settle_steps + window_steps) as f64 * step, true)?;
    Ok(acc / C64::new(window_steps as f64, 0.0))
}

fn lockin_chi(
    scheme: &LevelScheme,
    drive: &DriveField,
    probe: &ProbeField,
    density: f64,
    config: &IntegrationConfig,
    step: f64,
) -> Result<C64> {
    use std::f64::consts::FRAC_PI_2;
    let phases = [0.0, FRAC_PI_2, 2.0 * FRAC_PI_2, 3.0 * FRAC_PI_2];
    let projections: Result<Vec<C64>> = phases
        .par_iter()
        .map(|&phi| {
            let prop = Propagator::new(scheme, drive, probe, phi);
            propagate_and_project(&prop, scheme, config, step)
        })
        .collect();
    let projections = projections?;
    let mut c_plus = C64::new(0.0, 0.0);
    for (a, phi) in projections.iter().zip(phases) {
        c_plus += a * C64::from_polar(0.25, -phi);
    }
    let prefactor = susceptibility_prefactor(scheme, density);
    Ok(c_plus * C64::new(2.0 * prefactor / probe.rabi(), 0.0))
}

/// Time-domain probe susceptibility, scaled identically to the resolvent
/// path.  `Omega_p = 0` trivially projects to zero; `Omega_p > 1e-3` leaves
/// the linear-response regime and is rejected.
pub fn chi_by_integration(
    scheme: &LevelScheme,
    drive: &DriveField,
    probe: &ProbeField,
    density: f64,
    config: &IntegrationConfig,
) -> Result<C64> {
    config.validate()?;
    if probe.rabi() == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    if probe.rabi() > 1e-3 {
        return Err(Error::domain(
            "probe Rabi frequency above 1e-3 Gamma leaves linear response",
        ));
    }
    let chi = lockin_chi(scheme, drive, probe, density, config, config.step)?;
    if config.check_convergence {
        let refined =
            lockin_chi(scheme, drive, probe, density, config, config.step / 2.0)?;
        // RK4 Richardson estimate of the fine-step error.
        let estimate = (chi - refined).norm() / 15.0;
        if estimate > config.tolerance * refined.norm() {
            return Err(Error::numerical(format!(
                "step-halving estimate {estimate:.3e} exceeds tolerance \
                 (chi = {chi}, refined = {refined})"
            )));
        }
        return Ok(refined);
    }
    Ok(chi)
}
