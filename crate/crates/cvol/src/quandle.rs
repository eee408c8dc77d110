//! The parabolic quandle P ≅ (ℂ²∖{0})/± and its arithmetic.
//!
//! Elements are nonzero complex column vectors up to sign. The quandle
//! operation is conjugation of the associated parabolic matrices, which
//! on vectors is a left multiplication by a unit-determinant matrix
//! quadratic in the right operand. Nothing in here ever picks a
//! canonical sign except for display and hashing; arithmetic is exactly
//! sign-invariant.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuandleError {
    /// The two vectors span (numerically) the same projective point.
    #[error("degenerate pair: projective points coincide (|det|/(|x||y|) = {0:.3e})")]
    DegeneratePair(f64),
}

/// Scale-invariant threshold below which a pair of vectors counts as
/// projectively coincident.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Principal logarithm with arg ∈ (−π, π].
///
/// A `-0.0` imaginary part is treated as `+0.0` so that negative real
/// inputs land on the upper side of the cut (arg = +π, never −π).
pub fn clog(z: Complex64) -> Complex64 {
    let z = if z.im == 0.0 {
        Complex64::new(z.re, 0.0)
    } else {
        z
    };
    z.ln()
}

/// One representative of an element {v, −v} of (ℂ²∖{0})/±.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjVector {
    pub a: Complex64,
    pub b: Complex64,
}

impl ProjVector {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        ProjVector { a, b }
    }

    pub fn from_re(a: f64, b: f64) -> Self {
        ProjVector::new(Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    pub fn norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b.norm_sqr()).sqrt()
    }

    pub fn neg(&self) -> Self {
        ProjVector::new(-self.a, -self.b)
    }

    pub fn scale(&self, t: Complex64) -> Self {
        ProjVector::new(t * self.a, t * self.b)
    }

    /// min(‖u−v‖, ‖u+v‖) / max(‖u‖, ‖v‖) < tol.
    pub fn approx_eq(&self, other: &ProjVector, tol: f64) -> bool {
        self.dist(other) < tol
    }

    /// The sign-insensitive relative distance used by `approx_eq`.
    pub fn dist(&self, other: &ProjVector) -> f64 {
        let d = ((self.a - other.a).norm_sqr() + (self.b - other.b).norm_sqr()).sqrt();
        let s = ((self.a + other.a).norm_sqr() + (self.b + other.b).norm_sqr()).sqrt();
        d.min(s) / self.norm().max(other.norm())
    }

    /// Representative with the first nonzero coordinate's argument in
    /// [0, π). For display and lookup keys only.
    pub fn canonical(&self) -> Self {
        let lead = if self.a.norm() > 1e-14 * self.norm() {
            self.a
        } else {
            self.b
        };
        let arg = lead.arg();
        if (0.0..PI).contains(&arg) {
            *self
        } else {
            self.neg()
        }
    }

    /// Each coordinate has modulus uniform in [0.5, 2] and uniform phase.
    pub fn random_annulus<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let coord = |rng: &mut R| {
            let r = rng.gen_range(0.5..2.0);
            let th = rng.gen_range(0.0..2.0 * PI);
            Complex64::from_polar(r, th)
        };
        ProjVector::new(coord(rng), coord(rng))
    }
}

/// x ∗ y: left multiplication of x by [[1+γδ, −γ²], [δ², 1−γδ]] where
/// y = (γ, δ).
pub fn qmul(x: &ProjVector, y: &ProjVector) -> ProjVector {
    let (g, d) = (y.a, y.b);
    let gd = g * d;
    ProjVector::new(
        (1.0 + gd) * x.a - g * g * x.b,
        d * d * x.a + (1.0 - gd) * x.b,
    )
}

/// x ∗⁻¹ y, the inverse of `qmul(·, y)`.
pub fn qmul_inv(x: &ProjVector, y: &ProjVector) -> ProjVector {
    let (g, d) = (y.a, y.b);
    let gd = g * d;
    ProjVector::new(
        (1.0 - gd) * x.a + g * g * x.b,
        -d * d * x.a + (1.0 + gd) * x.b,
    )
}

/// A word x₁^ε₁ ⋯ xₙ^εₙ in the associated group, acting on the right.
#[derive(Clone, Debug, Default)]
pub struct QuandleWord(pub Vec<(ProjVector, i8)>);

impl QuandleWord {
    pub fn positive(letters: &[ProjVector]) -> Self {
        QuandleWord(letters.iter().map(|x| (*x, 1)).collect())
    }
}

/// Left fold of qmul / qmul_inv over the word; the empty word is the
/// identity.
pub fn act_word(x: &ProjVector, word: &QuandleWord) -> ProjVector {
    let mut v = *x;
    for (y, e) in &word.0 {
        v = if *e >= 0 { qmul(&v, y) } else { qmul_inv(&v, y) };
    }
    v
}

/// 2×2 complex matrix, row major.
#[derive(Clone, Copy, Debug)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Inverse assuming det = 1.
    pub fn inv_unit(&self) -> Mat2 {
        Mat2([
            [self.0[1][1], -self.0[0][1]],
            [-self.0[1][0], self.0[0][0]],
        ])
    }

    pub fn apply(&self, v: &ProjVector) -> ProjVector {
        ProjVector::new(
            self.0[0][0] * v.a + self.0[0][1] * v.b,
            self.0[1][0] * v.a + self.0[1][1] * v.b,
        )
    }

    pub fn dist_mod_sign(&self, other: &Mat2) -> f64 {
        let mut dp = 0.0;
        let mut dm = 0.0;
        let mut n = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                dp += (self.0[i][j] - other.0[i][j]).norm_sqr();
                dm += (self.0[i][j] + other.0[i][j]).norm_sqr();
                n += self.0[i][j].norm_sqr();
            }
        }
        (dp.min(dm) / n).sqrt()
    }
}

/// The parabolic matrix [[1+αβ, β²], [−α², 1−αβ]] associated with
/// (α, β); well defined mod ±, trace 2, determinant 1.
pub fn to_matrix(x: &ProjVector) -> Mat2 {
    let (al, be) = (x.a, x.b);
    let ab = al * be;
    Mat2([
        [1.0 + ab, be * be],
        [-al * al, 1.0 - ab],
    ])
}

/// A point of ℂP¹ = ℂ ∪ {∞}, with ∞ handled exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtComplex {
    pub fn finite(&self) -> Option<Complex64> {
        match self {
            ExtComplex::Finite(z) => Some(*z),
            ExtComplex::Infinity => None,
        }
    }
}

/// h(α, β) = α/β, with β = 0 ↦ ∞. Sign-invariant.
pub fn h_value(x: &ProjVector) -> ExtComplex {
    if x.b.norm() == 0.0 {
        ExtComplex::Infinity
    } else {
        ExtComplex::Finite(x.a / x.b)
    }
}

pub fn det2(x: &ProjVector, y: &ProjVector) -> Complex64 {
    x.a * y.b - y.a * x.b
}

/// Sign choice for the determinant of a projective pair.
///
/// The default fixes arg(det) ∈ [0, π). `FlipOrbit` negates that choice
/// for every pair in one PSL₂-orbit; a pair's orbit is keyed by its
/// sign-fixed Log det, which is a complete PSL₂ invariant of the pair.
#[derive(Clone, Copy, Debug, Default)]
pub enum SignConvention {
    #[default]
    Standard,
    FlipOrbit { log_det: Complex64, tol: f64 },
}

/// Log of det(x, y) with the sign fixed so that arg ∈ [0, π); the result
/// is invariant under the ± ambiguity of either input and under the
/// simultaneous action of any unit-determinant matrix.
pub fn log_det(x: &ProjVector, y: &ProjVector) -> Result<Complex64, QuandleError> {
    log_det_with(x, y, SignConvention::Standard)
}

pub fn log_det_with(
    x: &ProjVector,
    y: &ProjVector,
    conv: SignConvention,
) -> Result<Complex64, QuandleError> {
    let d = det2(x, y);
    let scaled = d.norm() / (x.norm() * y.norm());
    if scaled < DEGENERACY_TOL {
        return Err(QuandleError::DegeneratePair(scaled));
    }
    let arg = d.arg();
    let fixed = if (0.0..PI).contains(&arg) { d } else { -d };
    let mut v = clog(fixed);
    if let SignConvention::FlipOrbit { log_det, tol } = conv {
        if (v - log_det).norm() < tol {
            v -= Complex64::new(0.0, PI);
        }
    }
    Ok(v)
}
