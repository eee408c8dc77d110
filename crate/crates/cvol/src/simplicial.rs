//! Simplicial quandle chains, the map φ from quandle chains, and the
//! lift ψ into the nondegenerate complex.
//!
//! Simplices live in the coinvariant complex: tuples are identified up
//! to a simultaneous unit-determinant action. Equality up to that
//! action is decided by the pairwise sign-fixed log-determinants, which
//! are a complete invariant of a nondegenerate tuple, so no group
//! element is ever solved for.

use crate::chain::QChain;
use crate::coloring::{is_reducible, propagate_regions, ArcColoring, ColoringError, ShadowColoring};
use crate::diagram::{LinkDiagram, RegionStructure};
use crate::quandle::{det2, log_det, qmul, ProjVector};
use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimplicialError {
    #[error("arc coloring is reducible; the lift consists of degenerate ideal tetrahedra")]
    ReducibleColoring,
    #[error("degenerate after max attempts ({0})")]
    DegeneracyExhausted(usize),
    #[error("fundamental chain is not a cycle (residual {0}); convention or coloring broken")]
    CycleViolation(f64),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

/// Signed M-vertex simplex; a 3-simplex has M = 4.
#[derive(Clone, Debug)]
pub struct Simplex<const M: usize> {
    pub coeff: i64,
    pub verts: [ProjVector; M],
}

pub type SimpTet = Simplex<4>;

#[derive(Clone, Debug, Default)]
pub struct SimpChain<const M: usize>(pub Vec<Simplex<M>>);

/// Chain of 3-simplices (ordered 4-tuples of projective vectors).
pub type SimpChain3 = SimpChain<4>;

/// Pairwise sign-fixed log-determinants, the unit-determinant-invariant
/// signature of a tuple. None when some pair is degenerate.
pub fn signature<const M: usize>(verts: &[ProjVector; M]) -> Option<Vec<Complex64>> {
    let mut sig = Vec::with_capacity(M * (M - 1) / 2);
    for i in 0..M {
        for j in (i + 1)..M {
            sig.push(log_det(&verts[i], &verts[j]).ok()?);
        }
    }
    Some(sig)
}

fn sig_eq(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
}

impl<const M: usize> SimpChain<M> {
    pub fn push(&mut self, coeff: i64, verts: [ProjVector; M]) {
        self.0.push(Simplex { coeff, verts });
    }

    /// Merge simplices equal up to the simultaneous group action (or
    /// literally, for degenerate ones) and drop zero coefficients.
    pub fn canonicalized(&self, tol: f64) -> SimpChain<M> {
        let sigs: Vec<Option<Vec<Complex64>>> =
            self.0.iter().map(|s| signature(&s.verts)).collect();
        let mut out: Vec<(Simplex<M>, Option<Vec<Complex64>>)> = Vec::new();
        for (s, sig) in self.0.iter().zip(sigs) {
            let hit = out.iter_mut().find(|(o, osig)| match (&sig, osig) {
                (Some(a), Some(b)) => sig_eq(a, b, tol),
                (None, None) => o
                    .verts
                    .iter()
                    .zip(&s.verts)
                    .all(|(u, v)| u.approx_eq(v, tol)),
                _ => false,
            });
            match hit {
                Some((o, _)) => o.coeff += s.coeff,
                None => out.push((s.clone(), sig)),
            }
        }
        SimpChain(
            out.into_iter()
                .map(|(s, _)| s)
                .filter(|s| s.coeff != 0)
                .collect(),
        )
    }

    pub fn coefficient_mass(&self, tol: f64) -> f64 {
        self.canonicalized(tol)
            .0
            .iter()
            .map(|s| s.coeff.unsigned_abs() as f64)
            .fold(0.0, f64::max)
    }
}

/// ∂ of a chain of M-vertex simplices: alternating-sign vertex deletion.
pub fn boundary_simp<const M: usize, const K: usize>(c: &SimpChain<M>) -> SimpChain<K> {
    assert_eq!(K + 1, M, "boundary drops exactly one vertex");
    let mut out = SimpChain::default();
    for s in &c.0 {
        for i in 0..M {
            let mut verts = [s.verts[0]; K];
            let mut k = 0;
            for (j, v) in s.verts.iter().enumerate() {
                if j != i {
                    verts[k] = *v;
                    k += 1;
                }
            }
            let sign = if i % 2 == 0 { 1 } else { -1 };
            out.push(s.coeff * sign, verts);
        }
    }
    out
}

/// φ for a degree-n generator: 2ⁿ simplices Σ_ι (−1)^{|ι|}
/// (p, r(ι), x(ι,1), …, x(ι,n)).
fn phi_rows<const N: usize>(p: &ProjVector, g_base: &ProjVector, xs: &[ProjVector; N]) -> Vec<(i64, Vec<ProjVector>)> {
    let mut rows = Vec::with_capacity(1 << N);
    for iota in 0u32..(1 << N) {
        let bit = |i: usize| iota >> i & 1 == 1;
        let mut sign = 1i64;
        let mut r = *g_base;
        for i in 0..N {
            if bit(i) {
                sign = -sign;
                r = qmul(&r, &xs[i]);
            }
        }
        let mut verts = vec![*p, r];
        for i in 0..N {
            let mut xi = xs[i];
            for j in (i + 1)..N {
                if bit(j) {
                    xi = qmul(&xi, &xs[j]);
                }
            }
            verts.push(xi);
        }
        rows.push((sign, verts));
    }
    rows
}

fn pack<const M: usize>(rows: Vec<(i64, Vec<ProjVector>)>, coeff: i64) -> SimpChain<M> {
    let mut out = SimpChain::default();
    for (sign, verts) in rows {
        let mut arr = [verts[0]; M];
        arr.copy_from_slice(&verts);
        out.push(coeff * sign, arr);
    }
    out
}

/// φ at n = 1: (p, r, x) − (p, r∗x, x).
pub fn phi_one(p: &ProjVector, c: &QChain<1>) -> SimpChain<3> {
    let mut out = SimpChain::default();
    for g in &c.0 {
        let rows = phi_rows(p, &g.base, &g.tuple);
        out.0.extend(pack::<3>(rows, g.coeff).0);
    }
    out
}

/// φ at n = 2: (p,r,x,y) − (p,r∗x,x,y) − (p,r∗y,x∗y,y) + (p,r∗(xy),x∗y,y).
pub fn phi_two(p: &ProjVector, c: &QChain<2>) -> SimpChain<4> {
    let mut out = SimpChain::default();
    for g in &c.0 {
        let rows = phi_rows(p, &g.base, &g.tuple);
        out.0.extend(pack::<4>(rows, g.coeff).0);
    }
    out
}

/// φ at n = 3 (eight simplices per generator).
pub fn phi_three(p: &ProjVector, c: &QChain<3>) -> SimpChain<5> {
    let mut out = SimpChain::default();
    for g in &c.0 {
        let rows = phi_rows(p, &g.base, &g.tuple);
        out.0.extend(pack::<5>(rows, g.coeff).0);
    }
    out
}

/// The retriangulated form of φ at n = 2, homologous to `phi_two` but
/// nondegenerate for generic region colorings:
///
/// (p, r∗x, r, x) − (p, r∗x, r, y) − (p, r∗(xy), r∗y, x∗y) + (p, r∗(xy), r∗y, y).
pub fn phi_alt(p: &ProjVector, c: &QChain<2>) -> SimpChain<4> {
    let mut out = SimpChain::default();
    for g in &c.0 {
        let [x, y] = g.tuple;
        let r = g.base;
        let rx = qmul(&r, &x);
        let ry = qmul(&r, &y);
        let rxy = qmul(&rx, &y);
        let xy = qmul(&x, &y);
        let s = g.coeff;
        out.push(s, [*p, rx, r, x]);
        out.push(-s, [*p, rx, r, y]);
        out.push(-s, [*p, rxy, ry, xy]);
        out.push(s, [*p, rxy, ry, y]);
    }
    out
}

/// All six pairwise scale-invariant determinant magnitudes exceed the
/// threshold.
pub fn is_nondegenerate(t: &SimpTet, threshold: f64) -> bool {
    for i in 0..4 {
        for j in (i + 1)..4 {
            let d = det2(&t.verts[i], &t.verts[j]).norm()
                / (t.verts[i].norm() * t.verts[j].norm());
            if d < threshold {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug)]
pub struct ClosednessReport {
    /// Leftover coefficient mass after pairing faces.
    pub residual: f64,
    pub unmatched_faces: usize,
    pub closed: bool,
}

/// Compute all faces with alternating signs and pair them by their
/// unit-determinant-invariant signatures; closed iff everything cancels.
pub fn check_closed(c: &SimpChain<4>, tol: f64) -> ClosednessReport {
    let faces: SimpChain<3> = boundary_simp(c);
    let canon = faces.canonicalized(tol);
    let residual = canon
        .0
        .iter()
        .map(|s| s.coeff.unsigned_abs() as f64)
        .fold(0.0, f64::max);
    ClosednessReport {
        residual,
        unmatched_faces: canon.0.len(),
        closed: canon.0.is_empty(),
    }
}

/// Result of a successful lift: the nondegenerate tetrahedra together
/// with the randomization that produced them.
#[derive(Clone, Debug)]
pub struct LiftOutcome {
    pub tets: SimpChain<4>,
    pub chain: QChain<2>,
    pub shadow: ShadowColoring,
    pub p: ProjVector,
    pub base_region: usize,
    pub base_color: ProjVector,
    pub attempts: usize,
    pub cycle_residual: f64,
}

/// ψ: re-randomize the base point p and the region coloring until
/// `phi_alt` of the fundamental cycle is entirely nondegenerate.
pub fn lift_psi<R: Rng + ?Sized>(
    d: &LinkDiagram,
    regions: &RegionStructure,
    arcs: &ArcColoring,
    rng: &mut R,
    max_attempts: usize,
    tol: f64,
) -> Result<LiftOutcome, SimplicialError> {
    if is_reducible(arcs, 1e-8) {
        return Err(SimplicialError::ReducibleColoring);
    }
    let base_region = regions.outer;
    for attempt in 1..=max_attempts {
        let base_color = ProjVector::random_annulus(rng);
        let p = ProjVector::random_annulus(rng);
        let rc = propagate_regions(d, regions, arcs, base_region, base_color, tol)?;
        let shadow = ShadowColoring {
            arcs: arcs.clone(),
            regions: rc,
        };
        let chain = crate::chain::fundamental_cycle(d, regions, &shadow, tol);
        let cycle = crate::chain::is_cycle(&chain, tol);
        if !cycle.is_cycle {
            return Err(SimplicialError::CycleViolation(cycle.residual));
        }
        let tets = phi_alt(&p, &chain);
        if tets.0.iter().all(|t| is_nondegenerate(t, 1e-8)) {
            return Ok(LiftOutcome {
                tets,
                chain,
                shadow,
                p,
                base_region,
                base_color,
                attempts: attempt,
                cycle_residual: cycle.residual,
            });
        }
    }
    Err(SimplicialError::DegeneracyExhausted(max_attempts))
}
