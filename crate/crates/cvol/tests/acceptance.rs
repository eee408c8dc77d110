//! Acceptance suite. One test per criterion; each prints a pass line.
//!
//! Expected values come from oracles implemented in this file, kept
//! independent of the library: a block-accelerated series for the
//! figure-eight volume, and a Newton solve of the 5₂ gluing polynomial
//! with Lobachevsky-quadrature Bloch-Wigner summation.

use cvol::bloch::{
    five_term_residual, li2, mod_pi2_dist, sigma_hat, sigma_hat_with, BlochElement, PI_SQ,
};
use cvol::chain::{boundary2, boundary3, fundamental_cycle, is_cycle, QChain};
use cvol::coloring::{
    conjugate_coloring, propagate_regions, solve_colorings, ArcColoring, ShadowColoring,
};
use cvol::diagram::{
    build_diagram, build_regions, parse_pd, PdCode, FIGURE_EIGHT_PD, K52_PD, TREFOIL_PD,
};
use cvol::pipeline::{
    compute_complex_volume, compute_from_pd_text, diagram_from_input, solve_and_compute,
    PipelineError, Tolerances,
};
use cvol::quandle::{log_det, qmul, ProjVector, SignConvention};
use cvol::simplicial::{boundary_simp, check_closed, is_nondegenerate, lift_psi, phi_alt, phi_one,
    phi_two, SimpChain,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

// ---------------------------------------------------------------- oracles

/// Σ sin(nπ/3)/n² = Im Li₂(e^{iπ/3}) by grouping six terms per block;
/// the tail of the block sum is 1/(36 M²) + O(1/M³).
fn oracle_cl2_pi_third() -> f64 {
    let blocks: u64 = 2_000_000;
    let mut sum = 0.0;
    for m in (0..blocks).rev() {
        let b = 6.0 * m as f64;
        sum += 1.0 / ((b + 1.0) * (b + 1.0)) + 1.0 / ((b + 2.0) * (b + 2.0))
            - 1.0 / ((b + 4.0) * (b + 4.0))
            - 1.0 / ((b + 5.0) * (b + 5.0));
    }
    let m = blocks as f64;
    (3.0f64.sqrt() / 2.0) * (sum + 1.0 / (36.0 * m * m))
}

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let legendre = |x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = pk;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        (p1, dp)
    };
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(x);
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Lobachevsky function Л(θ) = −∫₀^θ ln|2 sin t| dt, odd and
/// π-periodic; the log singularity is integrated in closed form and the
/// analytic remainder by Gauss-Legendre.
fn lobachevsky(theta: f64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let t0 = theta - PI * (theta / PI).round();
    if t0 == 0.0 {
        return 0.0;
    }
    let sign = t0.signum();
    let t = t0.abs();
    let mut integral = 0.0;
    for (x, w) in gl.0.iter().zip(&gl.1) {
        let u = 0.5 * t * (x + 1.0);
        let f = if u < 1e-8 {
            -u * u / 6.0
        } else {
            (u.sin() / u).ln()
        };
        integral += w * f;
    }
    integral *= 0.5 * t;
    sign * (t - t * (2.0 * t).ln() - integral)
}

/// D(z) as the sum of three Lobachevsky values at the dihedral angles.
fn oracle_bloch_wigner(z: Complex64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    if z.im == 0.0 {
        return 0.0;
    }
    if z.im < 0.0 {
        return -oracle_bloch_wigner(z.conj(), gl);
    }
    let a1 = z.arg();
    let a2 = (1.0 / (1.0 - z)).arg();
    let a3 = ((z - 1.0) / z).arg();
    lobachevsky(a1, gl) + lobachevsky(a2, gl) + lobachevsky(a3, gl)
}

/// Geometric solution of the gluing equations of the standard
/// three-tetrahedron triangulation of the 5₂ complement: all three
/// shapes equal the root of w³ − w² + 1 with positive imaginary part.
fn oracle_52_volume(gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let mut w = Complex64::new(0.8, 0.6);
    for _ in 0..100 {
        let g = w * w * w - w * w + 1.0;
        let dg = 3.0 * w * w - 2.0 * w;
        let step = g / dg;
        w -= step;
        if step.norm() < 1e-16 {
            break;
        }
    }
    assert!((w * w * w - w * w + 1.0).norm() < 1e-13);
    assert!(w.im > 0.0);
    3.0 * oracle_bloch_wigner(w, gl)
}

fn rand_pv(rng: &mut ChaCha8Rng) -> ProjVector {
    ProjVector::random_annulus(rng)
}

// ---------------------------------------------------------------- criteria

#[test]
fn criterion_1_figure_eight() {
    let oracle = 2.0 * oracle_cl2_pi_third();
    assert!((oracle - 2.0298832128193).abs() < 1e-10);
    let t0 = Instant::now();
    let out = compute_from_pd_text(FIGURE_EIGHT_PD, 0, 50, &Tolerances::default()).unwrap();
    let elapsed = t0.elapsed();
    let r = &out.classes[out.best].result;
    assert!(
        (r.volume - oracle).abs() < 1e-9,
        "volume {} vs oracle {}",
        r.volume,
        oracle
    );
    assert!((r.volume - 2.0298832128193).abs() < 1e-9);
    assert!(r.cs.abs() < 1e-8, "cs {}", r.cs);
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "acceptance criterion 1: PASS (4_1 volume {:.13}, cs {:.1e}, {:?})",
        r.volume, r.cs, elapsed
    );
}

#[test]
fn criterion_2_five_two() {
    let gl = gauss_legendre(40);
    // calibrate the quadrature oracle against the series oracle
    let w = Complex64::from_polar(1.0, PI / 3.0);
    assert!((oracle_bloch_wigner(w, &gl) - oracle_cl2_pi_third()).abs() < 1e-12);
    let oracle = oracle_52_volume(&gl);
    assert!((oracle - 2.8281220883308).abs() < 1e-10);

    let t0 = Instant::now();
    let (d, regions) = diagram_from_input(K52_PD).unwrap();
    let tols = Tolerances::default();
    let out = solve_and_compute(&d, &regions, 0, 60, &tols).unwrap();
    let best = &out.classes[out.best];
    assert!(
        (best.result.volume - 2.8281220883308).abs() < 1e-6,
        "volume {}",
        best.result.volume
    );
    assert!((best.result.volume - oracle).abs() < 1e-9);

    // cs accepted by stability: identical mod pi^2 over 20 random
    // (p, region-base, seed) randomizations
    let arcs = &best.coloring.arcs;
    let base = best.result.raw;
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let r = compute_complex_volume(&d, &regions, arcs, seed, 50, &tols).unwrap();
        worst = worst.max(mod_pi2_dist(r.raw, base));
    }
    let elapsed = t0.elapsed();
    assert!(worst < 1e-9, "cs instability {worst}");
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "acceptance criterion 2: PASS (5_2 volume {:.13}, cs {:.13} stable to {:.1e}, {:?})",
        best.result.volume, best.result.cs, worst, elapsed
    );
}

#[test]
fn criterion_3_five_term_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut done = 0;
    let mut worst_r = 0.0f64;
    let mut worst_eq = 0.0f64;
    while done < 1000 {
        let v = [
            rand_pv(&mut rng),
            rand_pv(&mut rng),
            rand_pv(&mut rng),
            rand_pv(&mut rng),
            rand_pv(&mut rng),
        ];
        match five_term_residual(&v) {
            Ok(rep) => {
                worst_r = worst_r.max(rep.r_residual);
                worst_eq = worst_eq.max(rep.max_equation_residual);
                done += 1;
            }
            Err(_) => continue,
        }
    }
    assert!(worst_r < 1e-8, "five-term R residual {worst_r}");
    assert!(worst_eq < 1e-9, "flattening equation residual {worst_eq}");
    println!(
        "acceptance criterion 3: PASS (1000 tuples, R residual {:.2e}, equations {:.2e})",
        worst_r, worst_eq
    );
}

#[test]
fn criterion_4_sign_independence() {
    let tols = Tolerances::default();
    let (d, regions) = diagram_from_input(FIGURE_EIGHT_PD).unwrap();
    let out = solve_and_compute(&d, &regions, 1, 40, &tols).unwrap();
    let arcs = &out.classes[out.best].coloring.arcs;
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let lift = lift_psi(&d, &regions, arcs, &mut rng, 50, tols.approx).unwrap();
    let evaluate = |conv: SignConvention| -> Complex64 {
        let mut e = BlochElement::default();
        for t in &lift.tets.0 {
            let (s, f) = sigma_hat_with(t, conv).unwrap();
            e.0.push((s, f));
        }
        e.evaluate()
    };
    let base = evaluate(SignConvention::Standard);
    let base_flats: Vec<(i64, i64)> = lift
        .tets
        .0
        .iter()
        .map(|t| {
            let (_, f) = sigma_hat(t).unwrap();
            (f.p, f.q)
        })
        .collect();
    // pairs that actually occur as tetrahedron edges
    let mut pairs = Vec::new();
    for t in &lift.tets.0 {
        for i in 0..4 {
            for j in (i + 1)..4 {
                pairs.push((t.verts[i], t.verts[j]));
            }
        }
    }
    let mut worst = 0.0f64;
    let mut any_flat_changed = false;
    for _ in 0..100 {
        let (u, v) = pairs[rng.gen_range(0..pairs.len())];
        let value = log_det(&u, &v).unwrap();
        let conv = SignConvention::FlipOrbit {
            log_det: value,
            tol: 1e-9,
        };
        worst = worst.max(mod_pi2_dist(evaluate(conv), base));
        let changed = lift.tets.0.iter().zip(&base_flats).any(|(t, (p0, q0))| {
            let (_, f) = sigma_hat_with(t, conv).unwrap();
            f.p != *p0 || f.q != *q0
        });
        any_flat_changed |= changed;
    }
    assert!(worst < 1e-9, "sign-flip changed evaluate by {worst}");
    assert!(any_flat_changed, "flips never touched a flattening");
    println!(
        "acceptance criterion 4: PASS (100 pair flips, max change {:.2e})",
        worst
    );
}

#[test]
fn criterion_5_algebraic_suites() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    // quandle axioms, 1e-12, 10^4 samples
    for _ in 0..10_000 {
        let x = rand_pv(&mut rng);
        let y = rand_pv(&mut rng);
        let z = rand_pv(&mut rng);
        assert!(qmul(&x, &x).approx_eq(&x, 1e-12));
        assert!(cvol::quandle::qmul_inv(&qmul(&x, &y), &y).approx_eq(&x, 1e-12));
        assert!(qmul(&qmul(&x, &y), &z).approx_eq(&qmul(&qmul(&x, &z), &qmul(&y, &z)), 1e-12));
    }
    // boundary^2 = 0 at 1e-9
    for _ in 0..1000 {
        let mut c = QChain::<3>::default();
        c.push(
            1,
            rand_pv(&mut rng),
            [rand_pv(&mut rng), rand_pv(&mut rng), rand_pv(&mut rng)],
        );
        assert!(boundary2(&boundary3(&c, 1e-9), 1e-9).coefficient_mass(1e-9) < 1e-9);
    }
    // chain map at n = 2 (boundary compatibility, 1e-8)
    for _ in 0..100 {
        let mut c = QChain::<2>::default();
        for _ in 0..2 {
            c.push(1, rand_pv(&mut rng), [rand_pv(&mut rng), rand_pv(&mut rng)]);
        }
        let p = rand_pv(&mut rng);
        let mut total: SimpChain<3> = boundary_simp(&phi_two(&p, &c));
        for t in phi_one(&p, &boundary2(&c, 1e-9)).0 {
            total.push(t.coeff, t.verts);
        }
        assert!(total.coefficient_mass(1e-8) == 0.0);
    }
    // is_cycle on every solver-produced C(S); check_closed on every lift
    let tols = Tolerances::default();
    for pd in [TREFOIL_PD, FIGURE_EIGHT_PD, K52_PD] {
        let (d, regions) = diagram_from_input(pd).unwrap();
        for s in solve_colorings(&d, 1, 40, tols.solver_accept) {
            if s.reducible {
                continue;
            }
            let base = rand_pv(&mut rng);
            let rc = propagate_regions(&d, &regions, &s.arcs, 0, base, tols.approx).unwrap();
            let shadow = ShadowColoring {
                arcs: s.arcs.clone(),
                regions: rc,
            };
            let chain = fundamental_cycle(&d, &regions, &shadow, tols.approx);
            let rep = is_cycle(&chain, tols.approx);
            assert!(rep.is_cycle, "{pd}: cycle residual {}", rep.residual);
            let lift = lift_psi(&d, &regions, &s.arcs, &mut rng, 50, tols.approx).unwrap();
            assert!(lift.tets.0.iter().all(|t| is_nondegenerate(t, 1e-8)));
            assert!(check_closed(&lift.tets, 1e-8).closed, "{pd}");
        }
    }
    // Li2 reference values at 1e-12
    let l = 2.0f64.ln();
    assert!((li2(Complex64::new(1.0, 0.0)).re - PI_SQ / 6.0).abs() < 1e-12);
    assert!((li2(Complex64::new(0.5, 0.0)).re - (PI_SQ / 12.0 - l * l / 2.0)).abs() < 1e-12);
    assert!((li2(Complex64::new(-1.0, 0.0)).re + PI_SQ / 12.0).abs() < 1e-12);
    for _ in 0..500 {
        let z = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.01..3.0));
        let lhs = li2(z) + li2(1.0 - z);
        let rhs = PI_SQ / 6.0 - cvol::quandle::clog(z) * cvol::quandle::clog(1.0 - z);
        assert!((lhs - rhs).norm() < 1e-12);
    }
    println!("acceptance criterion 5: PASS (axioms, boundaries, chain map, cycles, closedness, Li2)");
}

/// Insert a Reidemeister-I kink on `edge`, splitting it at its head.
fn add_kink(pd: &PdCode, edge: usize, positive: bool) -> PdCode {
    let d = build_diagram(pd).unwrap();
    let (hc, hs) = d.edges[edge - 1].head;
    let m = 2 * pd.len() + 1;
    let mut crossings = pd.crossings.clone();
    crossings[hc][hs] = m + 1;
    if positive {
        crossings.push([edge, m, m, m + 1]);
    } else {
        crossings.push([edge, m + 1, m, m]);
    }
    PdCode::new(crossings).unwrap()
}

#[test]
fn criterion_6_invariance_suites() {
    let tols = Tolerances::default();
    let (d, regions) = diagram_from_input(FIGURE_EIGHT_PD).unwrap();
    let out = solve_and_compute(&d, &regions, 1, 40, &tols).unwrap();
    let best = &out.classes[out.best];
    let arcs = &best.coloring.arcs;
    let base_raw = best.result.raw;
    let mut rng = ChaCha8Rng::seed_from_u64(66);

    let eval_tets = |tets: &SimpChain<4>| -> Complex64 {
        let mut e = BlochElement::default();
        for t in &tets.0 {
            let (s, f) = sigma_hat(t).unwrap();
            e.0.push((s, f));
        }
        e.evaluate()
    };

    // base-point independence: same region coloring, two random p
    let lift = lift_psi(&d, &regions, arcs, &mut rng, 50, tols.approx).unwrap();
    let mut done = 0;
    while done < 5 {
        let p2 = rand_pv(&mut rng);
        let tets2 = phi_alt(&p2, &lift.chain);
        if !tets2.0.iter().all(|t| is_nondegenerate(t, 1e-8)) {
            continue;
        }
        assert!(mod_pi2_dist(eval_tets(&tets2), base_raw) < 1e-9);
        done += 1;
    }

    // region-coloring independence: two random base colors
    for seed in [101u64, 202, 303] {
        let r = compute_complex_volume(&d, &regions, arcs, seed, 50, &tols).unwrap();
        assert!(mod_pi2_dist(r.raw, base_raw) < 1e-9);
    }

    // global conjugation
    for _ in 0..3 {
        let w = rand_pv(&mut rng);
        let rc = propagate_regions(&d, &regions, arcs, 0, rand_pv(&mut rng), tols.approx).unwrap();
        let shadow = ShadowColoring {
            arcs: arcs.clone(),
            regions: rc,
        };
        let conj = conjugate_coloring(&shadow, &w);
        let r = compute_complex_volume(&d, &regions, &conj.arcs, 7, 50, &tols).unwrap();
        assert!(mod_pi2_dist(r.raw, base_raw) < 1e-9);
        // the conjugated shadow coloring itself still yields a cycle
        let chain = fundamental_cycle(&d, &regions, &conj, tols.approx);
        assert!(is_cycle(&chain, tols.approx).is_cycle);
    }

    // alternate PD code: figure-eight with a Reidemeister-I kink
    let pd = parse_pd(FIGURE_EIGHT_PD).unwrap();
    for positive in [true, false] {
        let kinked = add_kink(&pd, 1, positive);
        let out2 = compute_from_pd_text(&kinked.to_string(), 2, 60, &tols).unwrap();
        let r2 = &out2.classes[out2.best].result;
        assert!(
            mod_pi2_dist(r2.raw, base_raw) < 1e-9,
            "kinked (positive={positive}) differs: {} vs {}",
            r2.raw,
            base_raw
        );
    }

    // orientation reversal with inverted arc colors: X[a,b,c,d] -> X[c,d,a,b]
    let reversed = PdCode::new(
        pd.crossings
            .iter()
            .map(|q| [q[2], q[3], q[0], q[1]])
            .collect(),
    )
    .unwrap();
    let dr = build_diagram(&reversed).unwrap();
    let rr = build_regions(&dr).unwrap();
    let i_unit = Complex64::new(0.0, 1.0);
    let mut rev_colors = vec![ProjVector::from_re(0.0, 1.0); dr.n_arcs];
    for (e, edge) in dr.edges.iter().enumerate() {
        rev_colors[edge.arc] = arcs.0[d.edges[e].arc].scale(i_unit);
    }
    let rev_arcs = ArcColoring(rev_colors);
    let r = compute_complex_volume(&dr, &rr, &rev_arcs, 9, 50, &tols).unwrap();
    assert!(
        mod_pi2_dist(r.raw, base_raw) < 1e-9,
        "orientation reversal differs: {} vs {}",
        r.raw,
        base_raw
    );

    println!("acceptance criterion 6: PASS (p, region, conjugation, kinked PD, orientation reversal)");
}

#[test]
fn criterion_7_degenerate_path() {
    let tols = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for pd in [TREFOIL_PD, FIGURE_EIGHT_PD, K52_PD] {
        let (d, regions) = diagram_from_input(pd).unwrap();
        let x = rand_pv(&mut rng);
        let mono = ArcColoring(vec![x; d.n_arcs]);
        let err = compute_complex_volume(&d, &regions, &mono, 0, 50, &tols).unwrap_err();
        assert!(
            matches!(
                err,
                PipelineError::Simplicial(
                    cvol::simplicial::SimplicialError::ReducibleColoring
                        | cvol::simplicial::SimplicialError::DegeneracyExhausted(_)
                )
            ),
            "{pd}: unexpected {err:?}"
        );
        assert_eq!(err.exit_code(), 4);
    }
    println!("acceptance criterion 7: PASS (monochromatic colorings error out)");
}
