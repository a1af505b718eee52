//! Angular-momentum algebra: Clebsch-Gordan coefficients and spherical
//! dipole coupling matrices between Zeeman manifolds.
//!
//! Coefficients are evaluated from the Racah factorial formula with exact
//! big-integer rational arithmetic; the only floating-point step is the final
//! square root.  Half-integer momenta are stored as `2j` so every value is
//! exact.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// An angular momentum magnitude, stored as `2j` so half-integer values are
/// exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AngularMomentum {
    twice: u32,
}

impl AngularMomentum {
    /// From twice the momentum value (`2j`).
    pub fn from_twice(twice: u32) -> Self {
        AngularMomentum { twice }
    }

    /// An integer momentum `j`.
    pub fn integer(j: u32) -> Self {
        AngularMomentum { twice: 2 * j }
    }

    pub fn twice(&self) -> u32 {
        self.twice
    }

    pub fn value(&self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    /// Number of magnetic sublevels, `2j + 1`.
    pub fn multiplicity(&self) -> usize {
        self.twice as usize + 1
    }

    /// Projections `2m` in ascending order, `-2j, -2j + 2, ..., 2j`.
    pub fn projections(&self) -> impl Iterator<Item = i32> {
        let t = self.twice as i32;
        (-t..=t).step_by(2)
    }

    /// Whether `2m` is a valid projection of this momentum.
    pub fn holds_projection(&self, twice_m: i32) -> bool {
        let t = self.twice as i32;
        twice_m.abs() <= t && (twice_m - t) % 2 == 0
    }
}

fn factorial(n: i64) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn triangle_ok(tj1: u32, tj2: u32, tj: u32) -> bool {
    let (a, b, j) = (tj1 as i64, tj2 as i64, tj as i64);
    (a - b).abs() <= j && j <= a + b && (a + b + j) % 2 == 0
}

/// Clebsch-Gordan coefficient `<j1 m1; j2 m2 | J M>` in the Condon-Shortley
/// phase convention.  Projections are passed as `2m`.
pub fn clebsch_gordan(
    j1: AngularMomentum,
    twice_m1: i32,
    j2: AngularMomentum,
    twice_m2: i32,
    j: AngularMomentum,
    twice_m: i32,
) -> Result<f64> {
    if !j1.holds_projection(twice_m1)
        || !j2.holds_projection(twice_m2)
        || !j.holds_projection(twice_m)
    {
        return Err(Error::domain(format!(
            "invalid projection in CG({}, {}/2; {}, {}/2 | {}, {}/2)",
            j1.value(),
            twice_m1,
            j2.value(),
            twice_m2,
            j.value(),
            twice_m
        )));
    }
    if !triangle_ok(j1.twice, j2.twice, j.twice) {
        return Err(Error::domain(format!(
            "non-triangular momenta (j1={}, j2={}, J={})",
            j1.value(),
            j2.value(),
            j.value()
        )));
    }
    if twice_m1 + twice_m2 != twice_m {
        return Ok(0.0);
    }

    // All arguments below are genuine integers (twice-values have even
    // sums); intermediate values may be negative, the summation bounds keep
    // factorial arguments non-negative.
    let half = |t: i64| -> i64 {
        debug_assert!(t % 2 == 0);
        t / 2
    };
    let (tj1, tj2, tj) = (j1.twice as i64, j2.twice as i64, j.twice as i64);
    let (tm1, tm2, tm) = (twice_m1 as i64, twice_m2 as i64, twice_m as i64);

    // Prefactor under the square root, as an exact rational.
    let num = BigInt::from(tj + 1)
        * factorial(half(tj1 + tj2 - tj))
        * factorial(half(tj1 - tj2 + tj))
        * factorial(half(-tj1 + tj2 + tj))
        * factorial(half(tj1 + tm1))
        * factorial(half(tj1 - tm1))
        * factorial(half(tj2 + tm2))
        * factorial(half(tj2 - tm2))
        * factorial(half(tj + tm))
        * factorial(half(tj - tm));
    let den = factorial(half(tj1 + tj2 + tj) + 1);
    let prefactor = BigRational::new(num, den);

    // Racah alternating sum, exact.
    let k_min = 0i64
        .max(-half(tj - tj2 + tm1))
        .max(-half(tj - tj1 - tm2));
    let k_max = half(tj1 + tj2 - tj)
        .min(half(tj1 - tm1))
        .min(half(tj2 + tm2));
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(half(tj1 + tj2 - tj) - k)
            * factorial(half(tj1 - tm1) - k)
            * factorial(half(tj2 + tm2) - k)
            * factorial(half(tj - tj2 + tm1) + k)
            * factorial(half(tj - tj1 - tm2) + k);
        let sign = if k % 2 == 0 { 1 } else { -1 };
        sum += BigRational::new(BigInt::from(sign), den);
    }
    if sum.is_zero() {
        return Ok(0.0);
    }

    let magnitude2 = &prefactor * &sum * &sum;
    let sign = if sum.is_negative() { -1.0 } else { 1.0 };
    Ok(sign * magnitude2.to_f64().expect("rational fits in f64").sqrt())
}

/// Spherical dipole coupling amplitudes between the Zeeman sublevels of a
/// ground manifold `F_g` and an excited manifold `F_e`.
///
/// `d_q[m_e][m_g]` couples `|g, m_g>` to `|e, m_e = m_g + q>`; entries are in
/// units of the reduced matrix element and normalized so that every excited
/// sublevel decays at the total rate `Gamma`:
/// `sum_{q, m_g} |d_q[m_e][m_g]|^2 = 1`.
#[derive(Debug, Clone)]
pub struct DipoleCouplingSet {
    f_ground: AngularMomentum,
    f_excited: AngularMomentum,
    // index 0, 1, 2 <-> q = -1, 0, +1
    d: [DMatrix<f64>; 3],
}

impl DipoleCouplingSet {
    pub fn f_ground(&self) -> AngularMomentum {
        self.f_ground
    }

    pub fn f_excited(&self) -> AngularMomentum {
        self.f_excited
    }

    /// Coupling matrix for spherical component `q` in `{-1, 0, +1}`, shape
    /// `(2F_e + 1) x (2F_g + 1)` with rows ordered by ascending `m_e` and
    /// columns by ascending `m_g`.
    pub fn q_matrix(&self, q: i32) -> &DMatrix<f64> {
        match q {
            -1 => &self.d[0],
            0 => &self.d[1],
            1 => &self.d[2],
            _ => panic!("spherical component q must be -1, 0 or +1"),
        }
    }
}

/// Build the dipole coupling set of a single `F_g -> F_e` transition.
pub fn dipole_couplings(
    f_ground: AngularMomentum,
    f_excited: AngularMomentum,
) -> Result<DipoleCouplingSet> {
    let diff = (f_ground.twice() as i64 - f_excited.twice() as i64).abs();
    if diff > 2 || diff % 2 != 0 || f_ground.twice() + f_excited.twice() < 2 {
        return Err(Error::domain(format!(
            "dipole-forbidden transition F_g={} -> F_e={}",
            f_ground.value(),
            f_excited.value()
        )));
    }

    let one = AngularMomentum::integer(1);
    let ne = f_excited.multiplicity();
    let ng = f_ground.multiplicity();
    let mut d = [
        DMatrix::zeros(ne, ng),
        DMatrix::zeros(ne, ng),
        DMatrix::zeros(ne, ng),
    ];
    for (qi, q) in [-1i32, 0, 1].into_iter().enumerate() {
        for (ie, tme) in f_excited.projections().enumerate() {
            for (ig, tmg) in f_ground.projections().enumerate() {
                if tme != tmg + 2 * q {
                    continue;
                }
                d[qi][(ie, ig)] =
                    clebsch_gordan(f_ground, tmg, one, 2 * q, f_excited, tme)?;
            }
        }
    }

    // Rescale so the decay sum rule holds exactly per excited sublevel.  With
    // exact CG coefficients each row sum is already 1; the explicit step keeps
    // the invariant independent of the CG normalization convention.
    for ie in 0..ne {
        let total: f64 = (0..3)
            .map(|qi| d[qi].row(ie).iter().map(|x| x * x).sum::<f64>())
            .sum();
        if total <= 0.0 {
            return Err(Error::domain(format!(
                "excited sublevel {ie} has no decay channel for F_g={} -> F_e={}",
                f_ground.value(),
                f_excited.value()
            )));
        }
        let scale = total.sqrt().recip();
        for m in d.iter_mut() {
            m.row_mut(ie).scale_mut(scale);
        }
    }

    Ok(DipoleCouplingSet {
        f_ground,
        f_excited,
        d,
    })
}
