//! Dispersive response of coherently driven degenerate two-level atomic
//! transitions.
//!
//! The library computes the weak-probe susceptibility of a motionless atom
//! driven on a single `F_g -> F_e` transition, and derives from it the
//! refractive index, absorption, dispersion `D = dn/dnu`, group velocity and
//! Kerr coefficient of an optically thin vapor.  Internally all rates and
//! frequencies are expressed in units of the spontaneous decay rate `Gamma`;
//! SI conversions are confined to [`optics`] and the configuration layer.

pub mod angular;
pub mod config;
pub mod lambda_analytic;
pub mod optics;
pub mod probe_response;
pub mod steady_state;
pub mod sweeps;
pub mod system;
pub mod timedomain;

mod error;

pub use error::Error;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;

pub type Result<T> = std::result::Result<T, Error>;
