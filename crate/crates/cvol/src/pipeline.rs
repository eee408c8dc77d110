//! End-to-end orchestration: diagram → coloring → C(S) → ψ → σ̂ → R,
//! plus the JSON result artifact and its verification replay.

use crate::bloch::{bloch_wigner, mod_pi2, mod_pi2_dist, sigma_hat, BlochElement, BlochError};
use crate::chain::{fundamental_cycle, is_cycle};
use crate::coloring::{
    check_arc_coloring, solve_colorings, ArcColoring, ColoringError, SolvedColoring,
};
use crate::diagram::{build_diagram, build_regions, parse_pd, DiagramError, LinkDiagram, PdCode, RegionStructure};
use crate::quandle::ProjVector;
use crate::simplicial::{check_closed, is_nondegenerate, lift_psi, phi_alt, SimpChain, SimplicialError};
use crate::{c64_to_pair, pair_to_c64};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

/// The tolerance family, scaled coherently by the --tol flag
/// (defaults correspond to --tol 1e-9).
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Approximate equality of projective vectors and chain merging.
    pub approx: f64,
    /// Pair/tetrahedron degeneracy threshold.
    pub degeneracy: f64,
    /// Max normalized crossing residual for accepting a solver output.
    pub solver_accept: f64,
    /// Rounding guard for the flattening integers p, q.
    pub integrality: f64,
    /// Mod-π² agreement for invariance and consistency checks.
    pub consistency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            approx: 1e-9,
            degeneracy: 1e-8,
            solver_accept: 1e-12,
            integrality: 1e-6,
            consistency: 1e-9,
        }
    }
}

impl Tolerances {
    /// Scale the whole family linearly from the reference --tol 1e-9.
    pub fn scaled(tol: f64) -> Self {
        let s = tol / 1e-9;
        let d = Tolerances::default();
        Tolerances {
            approx: d.approx * s,
            degeneracy: d.degeneracy * s,
            solver_accept: d.solver_accept * s,
            integrality: d.integrality * s,
            consistency: d.consistency * s,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error("arc coloring invalid: max crossing residual {0:.3e}")]
    InvalidColoring(f64),
    #[error("no irreducible parabolic coloring found")]
    NoIrreducibleColoring,
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error("psi image not closed: residual {0:.3e}")]
    NotClosed(f64),
    #[error("volume consistency failure: |Im(R-sum) - Σ sign D(z)| = {0:.3e}")]
    VolumeConsistency(f64),
    #[error("bad artifact: {0}")]
    BadArtifact(String),
}

impl PipelineError {
    /// CLI exit code: 2 parse, 3 solver failure, 4 degeneracy,
    /// 5 numerical breakdown.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Diagram(_) | PipelineError::BadArtifact(_) => 2,
            PipelineError::NoIrreducibleColoring => 3,
            PipelineError::Simplicial(SimplicialError::ReducibleColoring)
            | PipelineError::Simplicial(SimplicialError::DegeneracyExhausted(_)) => 4,
            PipelineError::Coloring(_) | PipelineError::InvalidColoring(_) => 2,
            _ => 5,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Residuals {
    pub arc: f64,
    pub cycle: f64,
    pub closedness: f64,
    pub flattening: f64,
    pub volume_consistency: f64,
}

#[derive(Clone, Debug)]
pub struct Provenance {
    pub seed: u64,
    pub attempts: usize,
    pub p: ProjVector,
    pub base_region: usize,
    pub base_color: ProjVector,
    pub residuals: Residuals,
}

/// i(Vol + i·CS) mod π² with everything needed to replay the checks.
#[derive(Clone, Debug)]
pub struct ComplexVolumeResult {
    /// Im(raw).
    pub volume: f64,
    /// −Re(raw), reduced mod π² to (−π²/2, π²/2].
    pub cs: f64,
    pub raw: Complex64,
    pub element: BlochElement,
    pub tets: SimpChain<4>,
    pub pd_text: String,
    pub arc_colors: Vec<ProjVector>,
    pub provenance: Provenance,
}

fn compute_rng(seed: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[16] = 0x7a;
    ChaCha8Rng::from_seed(bytes)
}

/// Run the full pipeline on one arc coloring. Deterministic given the
/// seed; every internal check passes or the failing stage errors out.
pub fn compute_complex_volume(
    d: &LinkDiagram,
    regions: &RegionStructure,
    arcs: &ArcColoring,
    seed: u64,
    attempts: usize,
    tols: &Tolerances,
) -> Result<ComplexVolumeResult, PipelineError> {
    let report = check_arc_coloring(d, arcs, tols.approx)?;
    if report.max_residual > tols.approx {
        return Err(PipelineError::InvalidColoring(report.max_residual));
    }
    let mut rng = compute_rng(seed);
    let lift = lift_psi(d, regions, arcs, &mut rng, attempts, tols.approx)?;
    let closed = check_closed(&lift.tets, tols.degeneracy);
    if !closed.closed {
        return Err(PipelineError::NotClosed(closed.residual));
    }
    let mut element = BlochElement::default();
    let mut flat_res = 0.0f64;
    let mut d_sum = 0.0f64;
    for t in &lift.tets.0 {
        let (s, f) = sigma_hat(t)?;
        flat_res = flat_res.max(f.validation_residual());
        d_sum += s as f64 * bloch_wigner(f.z)?;
        element.0.push((s, f));
    }
    let raw = element.evaluate();
    let volume = raw.im;
    let cs = mod_pi2(Complex64::new(-raw.re, 0.0)).re;
    let vc = (volume - d_sum).abs();
    if vc > tols.consistency * volume.abs().max(1.0) {
        return Err(PipelineError::VolumeConsistency(vc));
    }
    Ok(ComplexVolumeResult {
        volume,
        cs,
        raw,
        element,
        tets: lift.tets,
        pd_text: d.pd.to_string(),
        arc_colors: arcs.0.clone(),
        provenance: Provenance {
            seed,
            attempts: lift.attempts,
            p: lift.p,
            base_region: lift.base_region,
            base_color: lift.base_color,
            residuals: Residuals {
                arc: report.max_residual,
                cycle: lift.cycle_residual,
                closedness: closed.residual,
                flattening: flat_res,
                volume_consistency: vc,
            },
        },
    })
}

/// One solved class together with its evaluation.
#[derive(Clone, Debug)]
pub struct ClassResult {
    pub coloring: SolvedColoring,
    pub result: ComplexVolumeResult,
}

#[derive(Clone, Debug)]
pub struct ComputeOutcome {
    pub classes: Vec<ClassResult>,
    /// Index of the maximal-Im class.
    pub best: usize,
    /// Another class ties the maximum within the consistency tolerance.
    pub tie: bool,
}

/// Solve for colorings, evaluate every irreducible class, and pick the
/// maximal-Im one (the geometric solution when the link is hyperbolic).
pub fn solve_and_compute(
    d: &LinkDiagram,
    regions: &RegionStructure,
    seed: u64,
    attempts: usize,
    tols: &Tolerances,
) -> Result<ComputeOutcome, PipelineError> {
    let sols = solve_colorings(d, seed, attempts, tols.solver_accept);
    let mut classes = Vec::new();
    for s in sols.into_iter().filter(|s| !s.reducible) {
        let result = compute_complex_volume(d, regions, &s.arcs, seed, attempts, tols)?;
        classes.push(ClassResult {
            coloring: s,
            result,
        });
    }
    if classes.is_empty() {
        return Err(PipelineError::NoIrreducibleColoring);
    }
    let mut best = 0;
    for (i, c) in classes.iter().enumerate() {
        if c.result.volume > classes[best].result.volume {
            best = i;
        }
    }
    let tie = classes.iter().enumerate().any(|(i, c)| {
        i != best && (c.result.volume - classes[best].result.volume).abs() < tols.consistency
    });
    Ok(ComputeOutcome { classes, best, tie })
}

/// Parse PD input from either the text grammar or the JSON alternative
/// and build the diagram (applying an explicit sign override if given).
pub fn diagram_from_input(text: &str) -> Result<(LinkDiagram, RegionStructure), PipelineError> {
    let trimmed = text.trim_start();
    let d = if trimmed.starts_with('{') {
        let pj: crate::diagram::PdJson = serde_json::from_str(trimmed)
            .map_err(|e| PipelineError::BadArtifact(format!("PD JSON: {e}")))?;
        let pd = PdCode::new(pj.crossings)?;
        crate::diagram::build_diagram_with_signs(&pd, pj.signs.as_deref())?
    } else {
        build_diagram(&parse_pd(text)?)?
    };
    let regions = build_regions(&d)?;
    Ok((d, regions))
}

/// Full pipeline from PD text: parse, solve, pick the maximal-Im class.
pub fn compute_from_pd_text(
    text: &str,
    seed: u64,
    attempts: usize,
    tols: &Tolerances,
) -> Result<ComputeOutcome, PipelineError> {
    let (d, regions) = diagram_from_input(text)?;
    solve_and_compute(&d, &regions, seed, attempts, tols)
}

fn pv_json(v: &ProjVector) -> Value {
    json!([c64_to_pair(v.a), c64_to_pair(v.b)])
}

fn pv_from_value(v: &Value) -> Result<ProjVector, PipelineError> {
    let arr: [[f64; 2]; 2] = serde_json::from_value(v.clone())
        .map_err(|e| PipelineError::BadArtifact(format!("bad vector: {e}")))?;
    Ok(ProjVector::new(pair_to_c64(arr[0]), pair_to_c64(arr[1])))
}

impl ComplexVolumeResult {
    pub fn to_json(&self) -> Value {
        let tets: Vec<Value> = self
            .tets
            .0
            .iter()
            .map(|t| {
                json!({
                    "sign": t.coeff,
                    "vertices": t.verts.iter().map(pv_json).collect::<Vec<_>>(),
                })
            })
            .collect();
        let element: Vec<Value> = self
            .element
            .0
            .iter()
            .map(|(s, f)| {
                json!({"sign": s, "z": c64_to_pair(f.z), "p": f.p, "q": f.q})
            })
            .collect();
        let arcs: serde_json::Map<String, Value> = self
            .arc_colors
            .iter()
            .enumerate()
            .map(|(i, v)| (i.to_string(), pv_json(v)))
            .collect();
        json!({
            "volume": self.volume,
            "cs": self.cs,
            "raw": c64_to_pair(self.raw),
            "tetrahedra": tets,
            "element": element,
            "provenance": {
                "seed": self.provenance.seed,
                "attempts": self.provenance.attempts,
                "p": pv_json(&self.provenance.p),
                "base_region": self.provenance.base_region,
                "base_color": pv_json(&self.provenance.base_color),
                "residuals": {
                    "arc": self.provenance.residuals.arc,
                    "cycle": self.provenance.residuals.cycle,
                    "closedness": self.provenance.residuals.closedness,
                    "flattening": self.provenance.residuals.flattening,
                    "volume_consistency": self.provenance.residuals.volume_consistency,
                },
                "pd": self.pd_text,
                "coloring": {"arcs": arcs},
            },
        })
    }
}

/// Coloring file: {"arcs": {"<arc-id>": [[re,im],[re,im]], ...},
/// "regions": optional same shape, "base_region": optional id}.
pub fn parse_coloring_json(
    text: &str,
    n_arcs: usize,
) -> Result<(ArcColoring, Option<usize>), PipelineError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| PipelineError::BadArtifact(format!("coloring JSON: {e}")))?;
    let arcs_v = v
        .get("arcs")
        .and_then(|a| a.as_object())
        .ok_or_else(|| PipelineError::BadArtifact("missing \"arcs\" object".into()))?;
    let mut arcs = vec![None; n_arcs];
    for (k, val) in arcs_v {
        let idx: usize = k
            .parse()
            .map_err(|_| PipelineError::BadArtifact(format!("bad arc id {k:?}")))?;
        if idx >= n_arcs {
            return Err(PipelineError::BadArtifact(format!(
                "arc id {idx} out of range (diagram has {n_arcs} arcs)"
            )));
        }
        arcs[idx] = Some(pv_from_value(val)?);
    }
    let arcs: Option<Vec<ProjVector>> = arcs.into_iter().collect();
    let arcs = arcs.ok_or_else(|| PipelineError::BadArtifact("missing arc assignment".into()))?;
    let base_region = v
        .get("base_region")
        .and_then(|b| b.as_u64())
        .map(|b| b as usize);
    Ok((ArcColoring(arcs), base_region))
}

#[derive(Clone, Debug)]
pub struct VerifyCheck {
    pub name: String,
    pub residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Re-run every invariant check on a saved computation.
pub fn verify_artifact(artifact: &Value, tols: &Tolerances) -> Result<VerifyReport, PipelineError> {
    let prov = artifact
        .get("provenance")
        .ok_or_else(|| PipelineError::BadArtifact("missing provenance".into()))?;
    let pd_text = prov
        .get("pd")
        .and_then(|p| p.as_str())
        .ok_or_else(|| PipelineError::BadArtifact("missing provenance.pd".into()))?;
    let (d, regions) = diagram_from_input(pd_text)?;
    let coloring_v = prov
        .get("coloring")
        .ok_or_else(|| PipelineError::BadArtifact("missing provenance.coloring".into()))?;
    let (arcs, _) = parse_coloring_json(&coloring_v.to_string(), d.n_arcs)?;
    let base_region = prov
        .get("base_region")
        .and_then(|b| b.as_u64())
        .ok_or_else(|| PipelineError::BadArtifact("missing base_region".into()))? as usize;
    let base_color = pv_from_value(
        prov.get("base_color")
            .ok_or_else(|| PipelineError::BadArtifact("missing base_color".into()))?,
    )?;
    let p = pv_from_value(
        prov.get("p")
            .ok_or_else(|| PipelineError::BadArtifact("missing p".into()))?,
    )?;
    let raw = pair_to_c64(
        serde_json::from_value(
            artifact
                .get("raw")
                .cloned()
                .ok_or_else(|| PipelineError::BadArtifact("missing raw".into()))?,
        )
        .map_err(|e| PipelineError::BadArtifact(e.to_string()))?,
    );

    let mut checks = Vec::new();
    let mut push = |name: &str, residual: f64, tol: f64| {
        checks.push(VerifyCheck {
            name: name.to_string(),
            residual,
            passed: residual <= tol,
        });
    };

    let report = check_arc_coloring(&d, &arcs, tols.approx)?;
    push("arc coloring residual", report.max_residual, tols.approx);

    let rc = crate::coloring::propagate_regions(&d, &regions, &arcs, base_region, base_color, tols.approx)?;
    let shadow = crate::coloring::ShadowColoring {
        arcs: arcs.clone(),
        regions: rc,
    };
    let chain = fundamental_cycle(&d, &regions, &shadow, tols.approx);
    let cyc = is_cycle(&chain, tols.approx);
    push("fundamental chain is a cycle", cyc.residual, 0.0);

    let tets = phi_alt(&p, &chain);
    let degenerate = tets
        .0
        .iter()
        .filter(|t| !is_nondegenerate(t, tols.degeneracy))
        .count();
    push("tetrahedra nondegenerate", degenerate as f64, 0.0);

    let closed = check_closed(&tets, tols.degeneracy);
    push("psi image closed", closed.residual, 0.0);

    // recompute the element and compare with the stored one
    let stored: Vec<(i64, Complex64, i64, i64)> = artifact
        .get("element")
        .and_then(|e| e.as_array())
        .map(|arr| {
            arr.iter()
                .filter_map(|t| {
                    Some((
                        t.get("sign")?.as_i64()?,
                        pair_to_c64(serde_json::from_value(t.get("z")?.clone()).ok()?),
                        t.get("p")?.as_i64()?,
                        t.get("q")?.as_i64()?,
                    ))
                })
                .collect()
        })
        .ok_or_else(|| PipelineError::BadArtifact("missing element".into()))?;
    let mut element = BlochElement::default();
    let mut elem_diff = 0.0f64;
    if stored.len() != tets.0.len() {
        elem_diff = f64::INFINITY;
    } else {
        for (t, st) in tets.0.iter().zip(&stored) {
            let (s, f) = sigma_hat(t)?;
            elem_diff = elem_diff.max((f.z - st.1).norm());
            if s != st.0 || f.p != st.2 || f.q != st.3 {
                elem_diff = f64::INFINITY;
            }
            element.0.push((s, f));
        }
    }
    push("element matches stored flattenings", elem_diff, tols.integrality);

    push(
        "evaluation matches stored raw (mod pi^2)",
        mod_pi2_dist(element.evaluate(), raw),
        tols.consistency,
    );

    let mut d_sum = 0.0;
    for (s, f) in &element.0 {
        d_sum += *s as f64 * bloch_wigner(f.z)?;
    }
    push(
        "Bloch-Wigner volume consistency",
        (d_sum - raw.im).abs() / raw.im.abs().max(1.0),
        tols.consistency,
    );

    let vol = artifact.get("volume").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
    let cs = artifact.get("cs").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
    push("volume = Im(raw)", (vol - raw.im).abs(), 1e-12);
    push(
        "cs = -Re(raw) mod pi^2",
        (cs - mod_pi2(Complex64::new(-raw.re, 0.0)).re).abs(),
        1e-12,
    );

    Ok(VerifyReport { checks })
}
