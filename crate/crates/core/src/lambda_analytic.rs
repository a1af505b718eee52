//! Closed-form ideal Lambda-scheme dispersion toolkit.
//!
//! Evaluates the textbook EIT index profile
//! `n(delta) = 1 + (3/8pi^2) lambda^3 N Omega^2 delta /
//! [(Omega^2 + gamma/2)^2 + (gamma delta / 2)^2]`
//! with every frequency nondimensionalized by `Gamma` (so `Gamma = 1` in the
//! denominator products), together with its stationary points and the
//! optimum drive strength.  The profile is used as an analytic guide for the
//! degenerate-transition numerics, not as an absolute-scale model.

use crate::{Error, Result};

/// Parameters of the ideal Lambda scheme, `Gamma` units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaParams {
    /// Drive Rabi frequency `Omega / Gamma`.
    pub rabi: f64,
    /// Ground relaxation `gamma / Gamma`, in (0, 1).
    pub gamma: f64,
    /// Transition wavelength, m.
    pub lambda0: f64,
    /// Atomic density, 1/m^3.
    pub density: f64,
}

impl LambdaParams {
    pub fn new(rabi: f64, gamma: f64, lambda0: f64, density: f64) -> Result<Self> {
        if !(0.0 < gamma && gamma < 1.0) {
            return Err(Error::domain("gamma/Gamma must lie in (0, 1)"));
        }
        if rabi < 0.0 {
            return Err(Error::domain("Rabi frequency must be non-negative"));
        }
        Ok(LambdaParams {
            rabi,
            gamma,
            lambda0,
            density,
        })
    }

    fn amplitude(&self) -> f64 {
        3.0 / (8.0 * std::f64::consts::PI * std::f64::consts::PI)
            * self.lambda0.powi(3)
            * self.density
    }

    fn rabi_sq(&self) -> f64 {
        self.rabi * self.rabi
    }
}

/// Refractive index at offset `delta` (in `Gamma` units).
pub fn n_lambda(p: &LambdaParams, delta: f64) -> f64 {
    let o2 = p.rabi_sq();
    let denom = (o2 + p.gamma / 2.0).powi(2) + (p.gamma * delta / 2.0).powi(2);
    1.0 + p.amplitude() * o2 * delta / denom
}

/// Slope `dn/d delta` at line center, `1/Gamma` units; positive for the EIT
/// profile (normal dispersion in this module's axis orientation).
pub fn dispersion_at_zero(p: &LambdaParams) -> f64 {
    let o2 = p.rabi_sq();
    p.amplitude() * o2 / (o2 + p.gamma / 2.0).powi(2)
}

/// The drive strength maximizing the center dispersion: `Omega^2 = Gamma
/// gamma / 2` (`S_opt = gamma / Gamma`).
///
/// The closed form is cross-checked by a golden-section maximization of
/// [`dispersion_at_zero`] over `Omega^2` before it is returned.
pub fn optimal_rabi_squared(p: &LambdaParams) -> Result<f64> {
    if p.gamma <= 0.0 {
        return Err(Error::domain("gamma must be positive"));
    }
    let closed_form = p.gamma / 2.0;
    let objective = |o2: f64| {
        dispersion_at_zero(&LambdaParams {
            rabi: o2.sqrt(),
            ..*p
        })
    };
    let numeric = golden_section_max(objective, closed_form * 1e-3, closed_form * 1e3, 1e-10);
    if (numeric - closed_form).abs() > 1e-4 * closed_form {
        return Err(Error::numerical(format!(
            "closed-form optimum {closed_form:.6e} disagrees with numeric \
             maximum {numeric:.6e}"
        )));
    }
    Ok(closed_form)
}

/// Stationary points of `n(delta)`: `delta = +/- 2 (Omega^2 + gamma/2) /
/// gamma`.
pub fn extrema_offsets(p: &LambdaParams) -> Result<(f64, f64)> {
    if p.gamma <= 0.0 {
        return Err(Error::domain("gamma must be positive"));
    }
    let x = 2.0 * (p.rabi_sq() + p.gamma / 2.0) / p.gamma;
    Ok((-x, x))
}

/// Peak `|n - 1|`, attained at the extrema offsets:
/// `A Omega^2 / [gamma (Omega^2 + gamma/2)]` with `A = (3/8pi^2) lambda^3 N`.
pub fn peak_index_deviation(p: &LambdaParams) -> f64 {
    let o2 = p.rabi_sq();
    p.amplitude() * o2 / (p.gamma * (o2 + p.gamma / 2.0))
}

/// Golden-section maximization on `[lo, hi]` (log-spaced coordinate), used
/// as an internal cross-check and exported for the CLI.
pub fn golden_section_max(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    rel_tol: f64,
) -> f64 {
    // Work in log space: the objective is unimodal in log(Omega^2).
    let mut a = lo.ln();
    let mut b = hi.ln();
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c.exp());
    let mut fd = f(d.exp());
    while (b - a).abs() > rel_tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d.exp());
        }
    }
    ((a + b) / 2.0).exp()
}
