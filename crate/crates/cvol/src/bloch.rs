//! Flattenings, the extended-Bloch evaluation R, and the dilogarithm.
//!
//! A combinatorial flattening (z; p, q) carries log-parameters
//! w₀ = Log z + pπi, w₁ = −Log(1−z) + qπi, w₂ = −w₀ − w₁. Here they are
//! produced from ideal tetrahedra with vertices in (ℂ²∖{0})/± through
//! six sign-fixed log-determinants, and consumed by the Rogers
//! dilogarithm map R, well defined mod π².

use crate::quandle::{
    clog, h_value, log_det_with, ExtComplex, ProjVector, SignConvention,
};
use crate::simplicial::SimpTet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub const PI_SQ: f64 = PI * PI;

#[derive(Debug, Error)]
pub enum BlochError {
    #[error("coincident points in cross-ratio")]
    CoincidentPoints,
    #[error("degenerate tetrahedron edge ({0})")]
    DegenerateTetrahedron(#[from] crate::quandle::QuandleError),
    #[error("flattening integrality failure: residual {0:.3e} for {1}")]
    IntegralityFailure(f64, &'static str),
    #[error("dilogarithm argument {0} is a branch point")]
    BranchPoint(Complex64),
}

/// Reduce the real part into (−π²/2, π²/2]; the imaginary part is kept.
pub fn mod_pi2(z: Complex64) -> Complex64 {
    let mut re = z.re - (z.re / PI_SQ).round() * PI_SQ;
    if re <= -PI_SQ / 2.0 {
        re += PI_SQ;
    } else if re > PI_SQ / 2.0 {
        re -= PI_SQ;
    }
    Complex64::new(re, z.im)
}

/// |a − b| after reducing the difference mod π².
pub fn mod_pi2_dist(a: Complex64, b: Complex64) -> f64 {
    mod_pi2(a - b).norm()
}

/// [z₀ : z₁ : z₂ : z₃] = (z₃−z₀)(z₂−z₁) / ((z₃−z₁)(z₂−z₀)), with ∞
/// handled by limit cancellation. At most one input may be ∞ (they are
/// required pairwise distinct).
pub fn cross_ratio(
    z0: ExtComplex,
    z1: ExtComplex,
    z2: ExtComplex,
    z3: ExtComplex,
) -> Result<Complex64, BlochError> {
    use ExtComplex::*;
    let r = match (z0, z1, z2, z3) {
        (Infinity, Finite(b), Finite(c), Finite(d)) => (c - b) / (d - b),
        (Finite(a), Infinity, Finite(c), Finite(d)) => (d - a) / (c - a),
        (Finite(a), Finite(b), Infinity, Finite(d)) => (d - a) / (d - b),
        (Finite(a), Finite(b), Finite(c), Infinity) => (c - b) / (c - a),
        (Finite(a), Finite(b), Finite(c), Finite(d)) => ((d - a) * (c - b)) / ((d - b) * (c - a)),
        _ => return Err(BlochError::CoincidentPoints),
    };
    if !r.is_finite() || r.norm() == 0.0 {
        return Err(BlochError::CoincidentPoints);
    }
    Ok(r)
}

// Bernoulli numbers B_0..B_30 (odd ones beyond B_1 are zero).
const BERNOULLI: [f64; 31] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
    0.0,
    7.0 / 6.0,
    0.0,
    -3617.0 / 510.0,
    0.0,
    43867.0 / 798.0,
    0.0,
    -174611.0 / 330.0,
    0.0,
    854513.0 / 138.0,
    0.0,
    -236364091.0 / 2730.0,
    0.0,
    8553103.0 / 6.0,
    0.0,
    -23749461029.0 / 870.0,
    0.0,
    8615841276005.0 / 14322.0,
];

fn li2_maclaurin(z: Complex64) -> Complex64 {
    let mut term = z;
    let mut sum = z;
    for n in 2..300 {
        term *= z;
        let d = term / ((n * n) as f64);
        sum += d;
        if d.norm() < 1e-18 * sum.norm().max(1.0) {
            break;
        }
    }
    sum
}

/// Series in u = −Log(1−z); converges for |u| < 2π, used on the annulus
/// where neither the Maclaurin series nor the reflection applies.
fn li2_bernoulli(z: Complex64) -> Complex64 {
    let u = -clog(1.0 - z);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut up = u; // u^{k+1}
    let mut fact = 1.0; // (k+1)!
    for (k, bk) in BERNOULLI.iter().enumerate() {
        if k > 0 {
            up *= u;
            fact *= (k + 1) as f64;
        }
        if *bk != 0.0 {
            sum += *bk * up / fact;
        }
    }
    sum
}

/// Principal-branch dilogarithm Li₂(z) = −∫₀^z Log(1−t)/t dt.
///
/// Branch values on the cut [1, ∞) follow the Log convention
/// arg ∈ (−π, π]. Absolute accuracy is well below 1e−13 for |z| ≤ 10.
pub fn li2(z: Complex64) -> Complex64 {
    if z.norm() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if z.norm() > 1.0 {
        // Li2(z) + Li2(1/z) = -pi^2/6 - Log^2(-z)/2
        let l = clog(-z);
        return -PI_SQ / 6.0 - 0.5 * l * l - li2(1.0 / z);
    }
    if z.norm() <= 0.5 {
        return li2_maclaurin(z);
    }
    if (1.0 - z).norm() <= 0.5 {
        if (1.0 - z).norm() == 0.0 {
            return Complex64::new(PI_SQ / 6.0, 0.0);
        }
        // Li2(z) = pi^2/6 - Log(z)Log(1-z) - Li2(1-z)
        return PI_SQ / 6.0 - clog(z) * clog(1.0 - z) - li2_maclaurin(1.0 - z);
    }
    li2_bernoulli(z)
}

/// Bloch–Wigner function D(z) = Im Li₂(z) + arg(1−z)·log|z|.
pub fn bloch_wigner(z: Complex64) -> Result<f64, BlochError> {
    if z.norm() == 0.0 || (z - 1.0).norm() == 0.0 {
        return Err(BlochError::BranchPoint(z));
    }
    Ok(li2(z).im + clog(1.0 - z).im * z.norm().ln())
}

/// A combinatorial flattening (z; p, q) with its cached log-parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Flattening {
    pub z: Complex64,
    pub p: i64,
    pub q: i64,
    #[serde(skip)]
    pub w: [Complex64; 3],
}

impl Flattening {
    /// Build from (z; p, q) alone, recomputing the log-parameters.
    pub fn from_zpq(z: Complex64, p: i64, q: i64) -> Self {
        let w0 = clog(z) + Complex64::new(0.0, p as f64 * PI);
        let w1 = -clog(1.0 - z) + Complex64::new(0.0, q as f64 * PI);
        Flattening {
            z,
            p,
            q,
            w: [w0, w1, -w0 - w1],
        }
    }

    /// Max deviation of the cached w from the (z; p, q) parametrization
    /// plus the closing condition w₀+w₁+w₂ = 0.
    pub fn validation_residual(&self) -> f64 {
        let fresh = Flattening::from_zpq(self.z, self.p, self.q);
        let mut r: f64 = (self.w[0] + self.w[1] + self.w[2]).norm();
        for i in 0..3 {
            r = r.max((self.w[i] - fresh.w[i]).norm());
        }
        r
    }
}

/// Tolerance on the rounding residual of the integers p, q.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// σ̂: flatten a nondegenerate tetrahedron through six sign-fixed
/// log-determinants. Returns the tetrahedron's sign with its flattening.
pub fn sigma_hat(t: &SimpTet) -> Result<(i64, Flattening), BlochError> {
    sigma_hat_with(t, SignConvention::Standard)
}

pub fn sigma_hat_with(
    t: &SimpTet,
    conv: SignConvention,
) -> Result<(i64, Flattening), BlochError> {
    let f = flatten_vertices(&t.verts, conv)?;
    Ok((t.coeff, f))
}

pub fn flatten_vertices(
    v: &[ProjVector; 4],
    conv: SignConvention,
) -> Result<Flattening, BlochError> {
    let ld = |i: usize, j: usize| log_det_with(&v[i], &v[j], conv);
    let (c01, c02, c03) = (ld(0, 1)?, ld(0, 2)?, ld(0, 3)?);
    let (c12, c13, c23) = (ld(1, 2)?, ld(1, 3)?, ld(2, 3)?);
    let w0 = c03 + c12 - c02 - c13;
    let w1 = c02 + c13 - c01 - c23;
    let w2 = c01 + c23 - c03 - c12;

    let z = cross_ratio(
        h_value(&v[0]),
        h_value(&v[1]),
        h_value(&v[2]),
        h_value(&v[3]),
    )?;
    let pf = (w0 - clog(z)) / Complex64::new(0.0, PI);
    let qf = (w1 + clog(1.0 - z)) / Complex64::new(0.0, PI);
    let p = pf.re.round();
    let q = qf.re.round();
    let p_res = (pf - p).norm();
    let q_res = (qf - q).norm();
    if p_res > INTEGRALITY_TOL {
        return Err(BlochError::IntegralityFailure(p_res, "p"));
    }
    if q_res > INTEGRALITY_TOL {
        return Err(BlochError::IntegralityFailure(q_res, "q"));
    }
    let sum = (w0 + w1 + w2).norm();
    if sum > 1e-9 {
        return Err(BlochError::IntegralityFailure(sum, "w0+w1+w2"));
    }
    Ok(Flattening {
        z,
        p: p as i64,
        q: q as i64,
        w: [w0, w1, w2],
    })
}

/// R(z; p, q) = 𝓡(z) + (πi/2)(q Log z − p Log(1/(1−z))) − π²/6 with
/// 𝓡(z) = Li₂(z) + ½ Log(z) Log(1−z). Well defined mod π² on elements;
/// the caller reduces.
pub fn rogers_r(f: &Flattening) -> Complex64 {
    let z = f.z;
    let rr = li2(z) + 0.5 * clog(z) * clog(1.0 - z);
    rr + Complex64::new(0.0, PI / 2.0)
        * (f.q as f64 * clog(z) - f.p as f64 * clog(1.0 / (1.0 - z)))
        - PI_SQ / 6.0
}

/// A signed formal sum of flattenings.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct BlochElement(pub Vec<(i64, Flattening)>);

impl BlochElement {
    /// Σ sign·R, reduced so the real part lies in (−π²/2, π²/2].
    pub fn evaluate(&self) -> Complex64 {
        let mut tot = Complex64::new(0.0, 0.0);
        for (s, f) in &self.0 {
            tot += *s as f64 * rogers_r(f);
        }
        mod_pi2(tot)
    }
}

/// Per-edge residuals of the lifted five-term relation for the boundary
/// of the 4-simplex on five projective points.
#[derive(Clone, Copy, Debug)]
pub struct FiveTermReport {
    /// |Σ (−1)^i R(σ̂(Δ_i))| reduced mod π².
    pub r_residual: f64,
    /// Worst of the ten log-parameter flattening-condition equations.
    pub max_equation_residual: f64,
}

impl FiveTermReport {
    pub fn worst(&self) -> f64 {
        self.r_residual.max(self.max_equation_residual)
    }
}

/// Flatten the five boundary tetrahedra of (v₀,…,v₄) and check the
/// lifted five-term relation: the alternating R-sum vanishes mod π² and
/// the ten flattening-condition equations hold termwise.
pub fn five_term_residual(v: &[ProjVector; 5]) -> Result<FiveTermReport, BlochError> {
    let mut total = Complex64::new(0.0, 0.0);
    let mut w = [[Complex64::new(0.0, 0.0); 3]; 5];
    for i in 0..5 {
        let mut verts = [v[0]; 4];
        let mut k = 0;
        for (j, vj) in v.iter().enumerate() {
            if j != i {
                verts[k] = *vj;
                k += 1;
            }
        }
        let f = flatten_vertices(&verts, SignConvention::Standard)?;
        w[i] = f.w;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * rogers_r(&f);
    }
    // The ten edge equations; one sign in the published table is
    // corrected ([z4 z1] carries +w2 of the third tetrahedron).
    let eqs = [
        w[2][0] - w[3][0] + w[4][0],  // [z0 z1]
        w[0][0] - w[3][1] + w[4][1],  // [z1 z2]
        w[0][1] - w[1][1] + w[4][0],  // [z2 z3]
        w[0][0] - w[1][0] + w[2][0],  // [z3 z4]
        -w[1][1] + w[2][1] - w[3][1], // [z4 z0]
        -w[1][0] - w[3][2] + w[4][2], // [z0 z2]
        w[0][2] + w[2][1] + w[4][2],  // [z1 z3]
        w[0][2] - w[1][2] - w[3][0],  // [z2 z4]
        -w[1][2] + w[2][2] + w[4][1], // [z3 z0]
        w[0][1] + w[2][2] - w[3][2],  // [z4 z1]
    ];
    let max_eq = eqs.iter().map(|e| e.norm()).fold(0.0, f64::max);
    Ok(FiveTermReport {
        r_residual: mod_pi2(total).norm(),
        max_equation_residual: max_eq,
    })
}
