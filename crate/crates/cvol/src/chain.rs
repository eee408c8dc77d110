//! Quandle chains with ℤ[P] coefficients at low degree, their boundary
//! maps, and the fundamental cycle of a shadow coloring.
//!
//! A generator is r ⊗ (x₁,…,xₙ) with an integer multiplicity; a chain is
//! a formal sum of generators, canonicalized by merging generators that
//! agree mod ± within tolerance and dropping generators with two
//! consecutive equal entries (these span the degenerate subcomplex and
//! are zero in the quandle complex).

use crate::coloring::ShadowColoring;
use crate::diagram::{crossing_region, LinkDiagram, RegionStructure};
use crate::quandle::{qmul, ProjVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub struct QGen<const N: usize> {
    pub coeff: i64,
    pub base: ProjVector,
    pub tuple: [ProjVector; N],
}

#[derive(Clone, Debug, Default)]
pub struct QChain<const N: usize>(pub Vec<QGen<N>>);

pub type QChain1 = QChain<1>;
pub type QChain2 = QChain<2>;
pub type QChain3 = QChain<3>;

impl<const N: usize> QGen<N> {
    fn matches(&self, other: &Self, tol: f64) -> bool {
        self.base.approx_eq(&other.base, tol)
            && self
                .tuple
                .iter()
                .zip(&other.tuple)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Consecutive equal entries make the generator degenerate.
    fn is_degenerate(&self, tol: f64) -> bool {
        N >= 2 && self.tuple.windows(2).any(|w| w[0].approx_eq(&w[1], tol))
    }
}

impl<const N: usize> QChain<N> {
    pub fn push(&mut self, coeff: i64, base: ProjVector, tuple: [ProjVector; N]) {
        self.0.push(QGen { coeff, base, tuple });
    }

    /// Merge approximately equal generators, drop degenerate ones and
    /// zero coefficients.
    pub fn canonicalized(&self, tol: f64) -> QChain<N> {
        let mut out: Vec<QGen<N>> = Vec::new();
        for g in &self.0 {
            if g.is_degenerate(tol) {
                continue;
            }
            if let Some(o) = out.iter_mut().find(|o| o.matches(g, tol)) {
                o.coeff += g.coeff;
            } else {
                out.push(g.clone());
            }
        }
        out.retain(|g| g.coeff != 0);
        QChain(out)
    }

    /// Largest coefficient magnitude after canonicalization.
    pub fn coefficient_mass(&self, tol: f64) -> f64 {
        self.canonicalized(tol)
            .0
            .iter()
            .map(|g| g.coeff.unsigned_abs() as f64)
            .fold(0.0, f64::max)
    }
}

/// ∂(r ⊗ (x, y)) = −r⊗(y) + (r∗x)⊗(y) + r⊗(x) − (r∗y)⊗(x∗y).
pub fn boundary2(c: &QChain<2>, tol: f64) -> QChain<1> {
    let mut out = QChain::default();
    for g in c.canonicalized(tol).0 {
        let [x, y] = g.tuple;
        let s = g.coeff;
        out.push(-s, g.base, [y]);
        out.push(s, qmul(&g.base, &x), [y]);
        out.push(s, g.base, [x]);
        out.push(-s, qmul(&g.base, &y), [qmul(&x, &y)]);
    }
    out.canonicalized(tol)
}

/// Six-term boundary for degree 3:
/// ∂(r⊗(x,y,z)) = −r⊗(y,z) + (r∗x)⊗(y,z) + r⊗(x,z) − (r∗y)⊗(x∗y,z)
///               − r⊗(x,y) + (r∗z)⊗(x∗z,y∗z).
pub fn boundary3(c: &QChain<3>, tol: f64) -> QChain<2> {
    let mut out = QChain::default();
    for g in c.canonicalized(tol).0 {
        let [x, y, z] = g.tuple;
        let s = g.coeff;
        out.push(-s, g.base, [y, z]);
        out.push(s, qmul(&g.base, &x), [y, z]);
        out.push(s, g.base, [x, z]);
        out.push(-s, qmul(&g.base, &y), [qmul(&x, &y), z]);
        out.push(-s, g.base, [x, y]);
        out.push(s, qmul(&g.base, &z), [qmul(&x, &z), qmul(&y, &z)]);
    }
    out.canonicalized(tol)
}

/// C(S) = Σ_c ε_c · r_c ⊗ (x_c, y_c), one generator per crossing.
///
/// x_c is the incoming under-color at a positive crossing and the
/// outgoing under-color at a negative one (so that the other under-arc
/// always carries x_c ∗ y_c); r_c is the quadrant fixed in
/// `crossing_region`. Q-degenerate generators vanish in canonical form.
pub fn fundamental_cycle(
    d: &LinkDiagram,
    regions: &RegionStructure,
    s: &ShadowColoring,
    tol: f64,
) -> QChain<2> {
    let mut out = QChain::default();
    for c in 0..d.n_crossings() {
        let cr = &d.crossings[c];
        let y = s.arcs.0[d.over_arc(c)];
        let x = if cr.sign >= 0 {
            s.arcs.0[d.under_in_arc(c)]
        } else {
            s.arcs.0[d.under_out_arc(c)]
        };
        let r = s.regions.0[crossing_region(d, regions, c)];
        out.push(cr.sign as i64, r, [x, y]);
    }
    out.canonicalized(tol)
}

#[derive(Clone, Copy, Debug)]
pub struct CycleReport {
    pub residual: f64,
    pub is_cycle: bool,
}

/// Check ∂c = 0 up to tolerance; the residual is the leftover
/// coefficient mass after cancellation.
pub fn is_cycle(c: &QChain<2>, tol: f64) -> CycleReport {
    let residual = boundary2(c, tol).coefficient_mass(tol);
    CycleReport {
        residual,
        is_cycle: residual == 0.0,
    }
}

/// JSON form of a degree-2 chain: a list of {sign, r, x, y} with
/// complex numbers as [re, im] pairs.
#[derive(Serialize, Deserialize)]
pub struct ChainGenJson {
    pub sign: i64,
    pub r: [[f64; 2]; 2],
    pub x: [[f64; 2]; 2],
    pub y: [[f64; 2]; 2],
}

fn pv_json(v: &ProjVector) -> [[f64; 2]; 2] {
    [[v.a.re, v.a.im], [v.b.re, v.b.im]]
}

fn pv_from_json(p: &[[f64; 2]; 2]) -> ProjVector {
    ProjVector::new(
        num_complex::Complex64::new(p[0][0], p[0][1]),
        num_complex::Complex64::new(p[1][0], p[1][1]),
    )
}

impl QChain<2> {
    pub fn to_json(&self) -> Vec<ChainGenJson> {
        self.0
            .iter()
            .map(|g| ChainGenJson {
                sign: g.coeff,
                r: pv_json(&g.base),
                x: pv_json(&g.tuple[0]),
                y: pv_json(&g.tuple[1]),
            })
            .collect()
    }

    pub fn from_json(gens: &[ChainGenJson]) -> Self {
        QChain(
            gens.iter()
                .map(|g| QGen {
                    coeff: g.sign,
                    base: pv_from_json(&g.r),
                    tuple: [pv_from_json(&g.x), pv_from_json(&g.y)],
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::{propagate_regions, solve_colorings, ArcColoring};
    use crate::diagram::{build_diagram, build_regions, parse_pd, FIGURE_EIGHT_PD, KINK_PD, TREFOIL_PD};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const TOL: f64 = 1e-9;

    #[test]
    fn boundary_of_degenerate_generator_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = ProjVector::random_annulus(&mut rng);
        let x = ProjVector::random_annulus(&mut rng);
        let mut c = QChain::<2>::default();
        c.push(1, r, [x, x]);
        assert_eq!(boundary2(&c, TOL).0.len(), 0);
    }

    #[test]
    fn boundary2_known_terms() {
        // r=(1,1), x=(1,0), y=(0,1): four distinct terms, coeffs -1,+1,+1,-1
        let r = ProjVector::from_re(1.0, 1.0);
        let x = ProjVector::from_re(1.0, 0.0);
        let y = ProjVector::from_re(0.0, 1.0);
        let mut c = QChain::<2>::default();
        c.push(1, r, [x, y]);
        let b = boundary2(&c, TOL);
        assert_eq!(b.0.len(), 4);
        let mut coeffs: Vec<i64> = b.0.iter().map(|g| g.coeff).collect();
        coeffs.sort_unstable();
        assert_eq!(coeffs, vec![-1, -1, 1, 1]);
        // expected generators
        let rx = qmul(&r, &x);
        let ry = qmul(&r, &y);
        let xy = qmul(&x, &y);
        let find = |base: &ProjVector, t: &ProjVector| {
            b.0.iter()
                .find(|g| g.base.approx_eq(base, TOL) && g.tuple[0].approx_eq(t, TOL))
                .map(|g| g.coeff)
        };
        assert_eq!(find(&r, &y), Some(-1));
        assert_eq!(find(&rx, &y), Some(1));
        assert_eq!(find(&r, &x), Some(1));
        assert_eq!(find(&ry, &xy), Some(-1));
    }

    #[test]
    fn boundary_squares_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let mut c = QChain::<3>::default();
            for _ in 0..2 {
                c.push(
                    1,
                    ProjVector::random_annulus(&mut rng),
                    [
                        ProjVector::random_annulus(&mut rng),
                        ProjVector::random_annulus(&mut rng),
                        ProjVector::random_annulus(&mut rng),
                    ],
                );
            }
            let dd = boundary2(&boundary3(&c, TOL), TOL);
            assert!(dd.coefficient_mass(TOL) < 1e-9);
        }
    }

    #[test]
    fn monochromatic_cycle_vanishes() {
        let d = build_diagram(&parse_pd(TREFOIL_PD).unwrap()).unwrap();
        let regions = build_regions(&d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = ProjVector::random_annulus(&mut rng);
        let arcs = ArcColoring(vec![x; d.n_arcs]);
        let rc = propagate_regions(&d, &regions, &arcs, 0, ProjVector::random_annulus(&mut rng), TOL).unwrap();
        let s = ShadowColoring { arcs, regions: rc };
        let c = fundamental_cycle(&d, &regions, &s, TOL);
        assert!(c.0.is_empty());
    }

    #[test]
    fn kink_cycle_vanishes() {
        let d = build_diagram(&parse_pd(KINK_PD).unwrap()).unwrap();
        let regions = build_regions(&d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = ProjVector::random_annulus(&mut rng);
        let arcs = ArcColoring(vec![x; d.n_arcs]);
        let rc = propagate_regions(&d, &regions, &arcs, 0, ProjVector::random_annulus(&mut rng), TOL).unwrap();
        let s = ShadowColoring { arcs, regions: rc };
        assert!(fundamental_cycle(&d, &regions, &s, TOL).0.is_empty());
    }

    #[test]
    fn figure_eight_cycle() {
        let d = build_diagram(&parse_pd(FIGURE_EIGHT_PD).unwrap()).unwrap();
        let regions = build_regions(&d).unwrap();
        let sols = solve_colorings(&d, 1, 40, 1e-12);
        let arcs = sols.iter().find(|s| !s.reducible).unwrap().arcs.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rc = propagate_regions(&d, &regions, &arcs, 0, ProjVector::random_annulus(&mut rng), TOL).unwrap();
        let s = ShadowColoring { arcs, regions: rc };
        let c = fundamental_cycle(&d, &regions, &s, TOL);
        assert_eq!(c.0.len(), 4);
        let mut signs: Vec<i64> = c.0.iter().map(|g| g.coeff).collect();
        signs.sort_unstable();
        let mut expect: Vec<i64> = d.crossings.iter().map(|c| c.sign as i64).collect();
        expect.sort_unstable();
        assert_eq!(signs, expect);
        let rep = is_cycle(&c, TOL);
        assert!(rep.is_cycle, "residual {}", rep.residual);
    }

    #[test]
    fn single_generator_is_not_a_cycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut c = QChain::<2>::default();
        c.push(
            1,
            ProjVector::random_annulus(&mut rng),
            [
                ProjVector::random_annulus(&mut rng),
                ProjVector::random_annulus(&mut rng),
            ],
        );
        assert!(!is_cycle(&c, TOL).is_cycle);
        assert!(is_cycle(&QChain::<2>::default(), TOL).is_cycle);
    }

    #[test]
    fn chain_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut c = QChain::<2>::default();
        for _ in 0..3 {
            c.push(
                -1,
                ProjVector::random_annulus(&mut rng),
                [
                    ProjVector::random_annulus(&mut rng),
                    ProjVector::random_annulus(&mut rng),
                ],
            );
        }
        let j = c.to_json();
        let back = QChain::<2>::from_json(&j);
        for (a, b) in c.0.iter().zip(&back.0) {
            assert_eq!(a.coeff, b.coeff);
            assert!(a.base.approx_eq(&b.base, 1e-15));
        }
    }
}
