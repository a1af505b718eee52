//! Atomic system and field definitions, and assembly of the master-equation
//! generator (Liouvillian) in the drive rotating frame.
//!
//! Basis ordering: ground sublevels by ascending `m` (indices `0..n_g`), then
//! excited sublevels by ascending `m` (indices `n_g..d`).  Density matrices
//! are vectorized column-major over `(row, col)`, i.e. `vec(rho)[col*d + row]`,
//! so a sandwich `A rho B` maps to `(B^T kron A) vec(rho)`.
//!
//! All rates inside the generator are dimensionless in units of the
//! spontaneous decay rate `Gamma`; the rotating-wave approximation is applied
//! and the frame rotates at the drive frequency, so the generator is time
//! independent.

use std::io::Write;

use crate::angular::{dipole_couplings, AngularMomentum, DipoleCouplingSet};
use crate::{C64, CMatrix, CVector, Error, Result};

/// A single closed `F_g -> F_e` optical transition with its relaxation rates.
///
/// `gamma_sp` (spontaneous decay) and `gamma_transit` (finite interaction
/// time) are angular frequencies in rad/s; the ratio `gamma_transit /
/// gamma_sp` is what enters the dimensionless generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelScheme {
    f_ground: AngularMomentum,
    f_excited: AngularMomentum,
    gamma_sp: f64,
    gamma_transit: f64,
    wavelength: f64,
}

impl LevelScheme {
    pub fn new(
        f_ground: AngularMomentum,
        f_excited: AngularMomentum,
        gamma_sp: f64,
        gamma_transit: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if gamma_sp <= 0.0 {
            return Err(Error::domain("spontaneous decay rate must be positive"));
        }
        if gamma_transit <= 0.0 || gamma_transit >= gamma_sp {
            return Err(Error::domain(
                "transit rate must satisfy 0 < gamma < Gamma",
            ));
        }
        if wavelength <= 0.0 {
            return Err(Error::domain("wavelength must be positive"));
        }
        // Validates the transition is dipole-allowed.
        dipole_couplings(f_ground, f_excited)?;
        Ok(LevelScheme {
            f_ground,
            f_excited,
            gamma_sp,
            gamma_transit,
            wavelength,
        })
    }

    /// Rb D2 `F_g=2 -> F_e=3` (the EIA transition) with the given
    /// `gamma/Gamma` ratio.
    pub fn rb_d2_fg2_fe3(gamma_ratio: f64) -> Result<Self> {
        LevelScheme::new(
            AngularMomentum::integer(2),
            AngularMomentum::integer(3),
            crate::optics::RB_D2_GAMMA,
            gamma_ratio * crate::optics::RB_D2_GAMMA,
            crate::optics::RB_D2_WAVELENGTH,
        )
    }

    /// Rb D2 `F_g=1 -> F_e=0` (the EIT transition) with the given
    /// `gamma/Gamma` ratio.
    pub fn rb_d2_fg1_fe0(gamma_ratio: f64) -> Result<Self> {
        LevelScheme::new(
            AngularMomentum::integer(1),
            AngularMomentum::integer(0),
            crate::optics::RB_D2_GAMMA,
            gamma_ratio * crate::optics::RB_D2_GAMMA,
            crate::optics::RB_D2_WAVELENGTH,
        )
    }

    /// `F_g=0 -> F_e=1` reference transition used for calibration.
    pub fn two_level_reference(gamma_ratio: f64) -> Result<Self> {
        LevelScheme::new(
            AngularMomentum::integer(0),
            AngularMomentum::integer(1),
            crate::optics::RB_D2_GAMMA,
            gamma_ratio * crate::optics::RB_D2_GAMMA,
            crate::optics::RB_D2_WAVELENGTH,
        )
    }

    pub fn f_ground(&self) -> AngularMomentum {
        self.f_ground
    }

    pub fn f_excited(&self) -> AngularMomentum {
        self.f_excited
    }

    /// Spontaneous decay rate, rad/s.
    pub fn gamma_sp(&self) -> f64 {
        self.gamma_sp
    }

    /// Transit relaxation rate, rad/s.
    pub fn gamma_transit(&self) -> f64 {
        self.gamma_transit
    }

    /// `gamma / Gamma`, the only relaxation parameter of the dimensionless
    /// generator.
    pub fn transit_ratio(&self) -> f64 {
        self.gamma_transit / self.gamma_sp
    }

    /// Transition wavelength, m.
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn n_ground(&self) -> usize {
        self.f_ground.multiplicity()
    }

    pub fn n_excited(&self) -> usize {
        self.f_excited.multiplicity()
    }

    /// Total sublevel count `d = (2F_g+1) + (2F_e+1)`.
    pub fn dim(&self) -> usize {
        self.n_ground() + self.n_excited()
    }

    pub fn couplings(&self) -> DipoleCouplingSet {
        dipole_couplings(self.f_ground, self.f_excited)
            .expect("validated at construction")
    }
}

/// Unit polarization vector in the spherical basis `(q = -1, 0, +1)`.
///
/// The quantization axis is chosen along the drive linear polarization, so a
/// linearly polarized drive is pure `q = 0` and the orthogonal linear probe
/// decomposes into `(q = -1, q = +1)` with amplitudes `(1/sqrt2, -1/sqrt2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization {
    components: [C64; 3],
}

impl Polarization {
    pub fn new(components: [C64; 3]) -> Result<Self> {
        let norm2: f64 = components.iter().map(|c| c.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-10 {
            return Err(Error::domain("polarization vector must have unit norm"));
        }
        Ok(Polarization { components })
    }

    /// Linear polarization along the quantization axis (`q = 0`).
    pub fn pi() -> Self {
        Polarization {
            components: [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        }
    }

    pub fn sigma_plus() -> Self {
        Polarization {
            components: [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        }
    }

    pub fn sigma_minus() -> Self {
        Polarization {
            components: [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        }
    }

    /// Linear polarization orthogonal to the quantization axis.
    pub fn linear_orthogonal() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        Polarization {
            components: [C64::new(a, 0.0), C64::new(0.0, 0.0), C64::new(-a, 0.0)],
        }
    }

    /// Spherical component for `q` in `{-1, 0, +1}`.
    pub fn component(&self, q: i32) -> C64 {
        self.components[(q + 1) as usize]
    }
}

/// Drive field in the rotating frame: Rabi frequency and detuning in units of
/// `Gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveField {
    rabi: f64,
    detuning: f64,
    polarization: Polarization,
}

impl DriveField {
    pub fn new(rabi: f64, detuning: f64, polarization: Polarization) -> Result<Self> {
        if rabi < 0.0 {
            return Err(Error::domain("Rabi frequency must be non-negative"));
        }
        Ok(DriveField {
            rabi,
            detuning,
            polarization,
        })
    }

    /// Drive with saturation parameter `S = 2 Omega^2 / Gamma^2`.
    pub fn from_saturation(s: f64, detuning: f64, polarization: Polarization) -> Result<Self> {
        if s < 0.0 {
            return Err(Error::domain("saturation parameter must be non-negative"));
        }
        DriveField::new((s / 2.0).sqrt(), detuning, polarization)
    }

    /// Rabi frequency `Omega / Gamma`.
    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    /// Detuning `Delta / Gamma = (omega_d - omega_0) / Gamma`.
    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn polarization(&self) -> &Polarization {
        &self.polarization
    }

    /// Saturation parameter `S = 2 Omega^2 / Gamma^2`.
    pub fn saturation(&self) -> f64 {
        2.0 * self.rabi * self.rabi
    }
}

/// Weak probe field: Rabi frequency and offset `delta = omega_d - omega_p` in
/// units of `Gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeField {
    rabi: f64,
    offset: f64,
    polarization: Polarization,
}

impl ProbeField {
    pub fn new(rabi: f64, offset: f64, polarization: Polarization) -> Result<Self> {
        if rabi < 0.0 {
            return Err(Error::domain("probe Rabi frequency must be non-negative"));
        }
        Ok(ProbeField {
            rabi,
            offset,
            polarization,
        })
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    /// Frequency offset `delta = omega_d - omega_p`, in units of `Gamma`.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        ProbeField { offset, ..*self }
    }

    pub fn polarization(&self) -> &Polarization {
        &self.polarization
    }
}

/// Embed the spherical coupling matrices into the full `d x d` raising
/// operator `sum_q eps_q d_q`, connecting ground to excited sublevels only.
pub fn raising_operator(
    couplings: &DipoleCouplingSet,
    polarization: &Polarization,
) -> CMatrix {
    let ng = couplings.f_ground().multiplicity();
    let ne = couplings.f_excited().multiplicity();
    let d = ng + ne;
    let mut op = CMatrix::zeros(d, d);
    for q in [-1i32, 0, 1] {
        let eps = polarization.component(q);
        if eps == C64::new(0.0, 0.0) {
            continue;
        }
        let m = couplings.q_matrix(q);
        for ie in 0..ne {
            for ig in 0..ng {
                if m[(ie, ig)] != 0.0 {
                    op[(ng + ie, ig)] += eps * C64::new(m[(ie, ig)], 0.0);
                }
            }
        }
    }
    op
}

/// Probe interaction raising operator `Omega_p * sum_q eps_q d_q` (the full
/// Hermitian coupling is this plus its adjoint).
pub fn probe_coupling_operator(scheme: &LevelScheme, probe: &ProbeField) -> CMatrix {
    raising_operator(&scheme.couplings(), probe.polarization())
        * C64::new(probe.rabi(), 0.0)
}

/// Time-independent master-equation generator in the drive rotating frame,
/// acting on column-major vectorized density matrices.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    matrix: CMatrix,
    n_ground: usize,
    n_excited: usize,
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.n_ground + self.n_excited
    }

    pub fn n_ground(&self) -> usize {
        self.n_ground
    }

    pub fn n_excited(&self) -> usize {
        self.n_excited
    }

    /// The `d^2 x d^2` generator matrix.
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Apply the generator to a density matrix (devectorized action).
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let v = vectorize(rho);
        devectorize(&(&self.matrix * v), self.dim())
    }

    /// Debug dump as CSV rows `row,col,re,im` (zeros omitted).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for col in 0..self.matrix.ncols() {
            for row in 0..self.matrix.nrows() {
                let z = self.matrix[(row, col)];
                if z != C64::new(0.0, 0.0) {
                    writeln!(w, "{},{},{},{}", row, col, z.re, z.im)?;
                }
            }
        }
        Ok(())
    }
}

/// Column-major vectorization `vec(rho)[col*d + row]`.
pub fn vectorize(rho: &CMatrix) -> CVector {
    CVector::from_column_slice(rho.as_slice())
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_column_slice(d, d, v.as_slice())
}

/// Vectorized identity, the left null vector of any trace-preserving
/// generator.
pub fn vectorized_identity(d: usize) -> CVector {
    let mut v = CVector::zeros(d * d);
    for k in 0..d {
        v[k * d + k] = C64::new(1.0, 0.0);
    }
    v
}

/// Isotropic ground-manifold equilibrium state (populations `1/(2F_g+1)`).
pub fn equilibrium_state(scheme: &LevelScheme) -> CMatrix {
    let d = scheme.dim();
    let ng = scheme.n_ground();
    let mut rho = CMatrix::zeros(d, d);
    for k in 0..ng {
        rho[(k, k)] = C64::new(1.0 / ng as f64, 0.0);
    }
    rho
}

/// Rotating-frame Hamiltonian `-Delta P_e - (Omega/2)(D + D^dagger)` in
/// `Gamma` units.
pub fn drive_hamiltonian(scheme: &LevelScheme, drive: &DriveField) -> CMatrix {
    let couplings = scheme.couplings();
    let d = scheme.dim();
    let ng = scheme.n_ground();
    let raising = raising_operator(&couplings, drive.polarization());
    let mut h = CMatrix::zeros(d, d);
    for k in ng..d {
        h[(k, k)] = C64::new(-drive.detuning(), 0.0);
    }
    let coupling = raising.clone() + raising.adjoint();
    h - coupling * C64::new(drive.rabi() / 2.0, 0.0)
}

/// Spontaneous-emission jump operators `C_q = d_q^dagger` (lowering), one per
/// spherical component, with total rate `Gamma = 1`.
pub fn jump_operators(scheme: &LevelScheme) -> [CMatrix; 3] {
    let couplings = scheme.couplings();
    [-1i32, 0, 1].map(|q| {
        let mut pol = [C64::new(0.0, 0.0); 3];
        pol[(q + 1) as usize] = C64::new(1.0, 0.0);
        raising_operator(&couplings, &Polarization { components: pol }).adjoint()
    })
}

/// Assemble the drive-dressed generator.
///
/// Encodes the coherent drive coupling, spontaneous emission with branching
/// given by the dipole couplings, and transit relaxation
/// `-gamma (rho - rho_eq Tr rho)`; the refill is proportional to `Tr rho` so
/// the generator stays linear and trace preserving.
pub fn build_generator(scheme: &LevelScheme, drive: &DriveField) -> Result<Liouvillian> {
    let d = scheme.dim();
    let gamma = scheme.transit_ratio();
    if gamma <= 0.0 {
        return Err(Error::domain(
            "transit rate must be positive (steady state would be non-unique)",
        ));
    }

    let eye = CMatrix::identity(d, d);
    let h = drive_hamiltonian(scheme, drive);

    // -i [H, rho]  ->  -i (I kron H - H^T kron I)
    let mut gen = (eye.kronecker(&h) - h.transpose().kronecker(&eye))
        * C64::new(0.0, -1.0);

    // sum_q C_q rho C_q^dag - 1/2 {C_q^dag C_q, rho}
    let jumps = jump_operators(scheme);
    let mut anticomm = CMatrix::zeros(d, d);
    for c in &jumps {
        gen += c.conjugate().kronecker(c);
        anticomm += c.adjoint() * c;
    }
    gen -= (eye.kronecker(&anticomm) + anticomm.transpose().kronecker(&eye))
        * C64::new(0.5, 0.0);

    // Transit relaxation with isotropic ground refill.
    let g = C64::new(gamma, 0.0);
    gen -= CMatrix::identity(d * d, d * d) * g;
    let refill = vectorize(&equilibrium_state(scheme)) * g;
    let id_row = vectorized_identity(d);
    for col in 0..d * d {
        if id_row[col] != C64::new(0.0, 0.0) {
            for row in 0..d * d {
                gen[(row, col)] += refill[row];
            }
        }
    }

    Ok(Liouvillian {
        matrix: gen,
        n_ground: scheme.n_ground(),
        n_excited: scheme.n_excited(),
    })
}
