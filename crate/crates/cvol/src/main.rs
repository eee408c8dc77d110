//! `cvol` — complex volume of hyperbolic links from planar diagrams.

use clap::{Args, Parser, Subcommand};
use cvol::bloch::{five_term_residual, mod_pi2_dist};
use cvol::chain::{boundary2, boundary3, QChain};
use cvol::pipeline::{
    self, compute_complex_volume, diagram_from_input, parse_coloring_json, solve_and_compute,
    ComputeOutcome, PipelineError, Tolerances,
};
use cvol::quandle::{qmul, qmul_inv, ProjVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cvol", version, about = "Complex volume i(Vol + i CS) mod pi^2 of a hyperbolic link from a PD code")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// PD file (text grammar `X[a,b,c,d] ...` or JSON)
    #[arg(long, value_name = "FILE", conflicts_with = "pd_inline")]
    pd: Option<String>,
    /// PD given inline
    #[arg(long, value_name = "STR")]
    pd_inline: Option<String>,
    /// RNG seed for the solver and the lift randomization
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Max solver / lift attempts
    #[arg(long, default_value_t = 50)]
    attempts: usize,
    /// Base tolerance; the whole tolerance family scales with it
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

impl InputArgs {
    fn pd_text(&self) -> Result<String, String> {
        match (&self.pd, &self.pd_inline) {
            (Some(path), None) => fs::read_to_string(path)
                .map_err(|e| format!("cannot read {path}: {e}")),
            (None, Some(s)) => Ok(s.clone()),
            _ => Err("exactly one of --pd or --pd-inline is required".into()),
        }
    }

    fn tols(&self) -> Tolerances {
        Tolerances::scaled(self.tol)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the crossing equations and print the coloring classes
    Solve {
        #[command(flatten)]
        input: InputArgs,
        /// List every class, not only the maximal-volume one
        #[arg(long)]
        all: bool,
        #[arg(long)]
        json: bool,
    },
    /// Compute the complex volume (solving first unless --coloring is given)
    Compute {
        #[command(flatten)]
        input: InputArgs,
        /// JSON coloring file {"arcs": {...}}
        #[arg(long, value_name = "FILE")]
        coloring: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long)]
        json: bool,
        /// Write the result artifact to a file
        #[arg(long, value_name = "FILE")]
        out: Option<String>,
    },
    /// Re-run all invariant checks on a saved computation
    Verify {
        /// Result artifact produced by `compute --out`
        artifact: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Run the built-in property suites
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve { input, all, json } => cmd_solve(&input, all, json),
        Command::Compute {
            input,
            coloring,
            all,
            json,
            out,
        } => cmd_compute(&input, coloring.as_deref(), all, json, out.as_deref()),
        Command::Verify {
            artifact,
            tol,
            json,
        } => cmd_verify(&artifact, tol, json),
        Command::Selftest => cmd_selftest(),
    };
    match code {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Pipeline(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

enum CliError {
    Usage(String),
    Pipeline(PipelineError),
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError::Pipeline(e)
    }
}

fn cmd_solve(input: &InputArgs, all: bool, json: bool) -> Result<(), CliError> {
    let text = input.pd_text().map_err(CliError::Usage)?;
    let (d, _regions) = diagram_from_input(&text)?;
    let sols = cvol::coloring::solve_colorings(&d, input.seed, input.attempts, input.tols().solver_accept);
    if sols.iter().all(|s| s.reducible) && sols.is_empty() {
        return Err(PipelineError::NoIrreducibleColoring.into());
    }
    if json {
        let arr: Vec<serde_json::Value> = sols
            .iter()
            .map(|s| {
                serde_json::json!({
                    "residual": s.residual,
                    "reducible": s.reducible,
                    "arcs": s.arcs.0.iter().enumerate().map(|(i, v)| {
                        (i.to_string(), serde_json::json!([[v.a.re, v.a.im],[v.b.re, v.b.im]]))
                    }).collect::<serde_json::Map<_,_>>(),
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&arr).unwrap());
    } else {
        println!("{} coloring class(es) on {} arcs", sols.len(), d.n_arcs);
        for (i, s) in sols.iter().enumerate() {
            println!(
                "class {i}: residual {:.3e}{}",
                s.residual,
                if s.reducible { " (reducible)" } else { "" }
            );
            if all {
                for (a, v) in s.arcs.0.iter().enumerate() {
                    let c = v.canonical();
                    println!("  arc {a}: ({:.6}{:+.6}i, {:.6}{:+.6}i)", c.a.re, c.a.im, c.b.re, c.b.im);
                }
            }
        }
    }
    if sols.iter().all(|s| s.reducible) {
        return Err(PipelineError::NoIrreducibleColoring.into());
    }
    Ok(())
}

fn print_result(r: &cvol::pipeline::ComplexVolumeResult) {
    println!("volume = {:.13}", r.volume);
    println!("cs     = {:.13}", r.cs);
    println!("raw    = {:.13} {:+.13}i (mod pi^2)", r.raw.re, r.raw.im);
    println!(
        "tetrahedra: {}   lift attempts: {}   residuals: arc {:.1e} cycle {:.1e} closed {:.1e} flat {:.1e} vol {:.1e}",
        r.tets.0.len(),
        r.provenance.attempts,
        r.provenance.residuals.arc,
        r.provenance.residuals.cycle,
        r.provenance.residuals.closedness,
        r.provenance.residuals.flattening,
        r.provenance.residuals.volume_consistency,
    );
}

fn cmd_compute(
    input: &InputArgs,
    coloring: Option<&str>,
    all: bool,
    json: bool,
    out: Option<&str>,
) -> Result<(), CliError> {
    let text = input.pd_text().map_err(CliError::Usage)?;
    let tols = input.tols();
    let (d, mut regions) = diagram_from_input(&text)?;
    let outcome: ComputeOutcome = if let Some(path) = coloring {
        let ctext = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
        let (arcs, base) = parse_coloring_json(&ctext, d.n_arcs)?;
        if let Some(b) = base {
            if b >= regions.n_regions {
                return Err(CliError::Usage(format!(
                    "base_region {b} out of range ({} regions)",
                    regions.n_regions
                )));
            }
            regions.outer = b;
        }
        let result = compute_complex_volume(&d, &regions, &arcs, input.seed, input.attempts, &tols)?;
        ComputeOutcome {
            classes: vec![pipeline::ClassResult {
                coloring: cvol::coloring::SolvedColoring {
                    residual: result.provenance.residuals.arc,
                    reducible: false,
                    fingerprint: cvol::coloring::fingerprint(&arcs),
                    arcs,
                },
                result,
            }],
            best: 0,
            tie: false,
        }
    } else {
        solve_and_compute(&d, &regions, input.seed, input.attempts, &tols)?
    };

    let best = &outcome.classes[outcome.best].result;
    if let Some(path) = out {
        fs::write(path, serde_json::to_string_pretty(&best.to_json()).unwrap())
            .map_err(|e| CliError::Usage(format!("cannot write {path}: {e}")))?;
    }
    if json {
        if all {
            let arr: Vec<_> = outcome.classes.iter().map(|c| c.result.to_json()).collect();
            println!("{}", serde_json::to_string_pretty(&arr).unwrap());
        } else {
            println!("{}", serde_json::to_string_pretty(&best.to_json()).unwrap());
        }
    } else {
        if outcome.tie {
            println!("note: multiple classes tie the maximal volume");
        }
        if all {
            for (i, c) in outcome.classes.iter().enumerate() {
                println!(
                    "-- class {i}{}",
                    if i == outcome.best { " (selected)" } else { "" }
                );
                print_result(&c.result);
            }
        } else {
            print_result(best);
        }
    }
    Ok(())
}

fn cmd_verify(path: &str, tol: f64, json: bool) -> Result<(), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))?;
    let artifact: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Pipeline(PipelineError::BadArtifact(e.to_string())))?;
    let report = pipeline::verify_artifact(&artifact, &Tolerances::scaled(tol))?;
    if json {
        let arr: Vec<_> = report
            .checks
            .iter()
            .map(|c| serde_json::json!({"check": c.name, "residual": c.residual, "passed": c.passed}))
            .collect::<Vec<_>>();
        println!("{}", serde_json::to_string_pretty(&arr).unwrap());
    } else {
        for c in &report.checks {
            println!(
                "{} {} (residual {:.3e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.residual
            );
        }
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Pipeline(PipelineError::BadArtifact(
            "verification failed".into(),
        )))
    }
}

fn cmd_selftest() -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut failures = 0;
    let mut suite = |name: &str, pass: bool| {
        println!("{} {name}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failures += 1;
        }
    };

    // quandle axioms
    let mut ok = true;
    for _ in 0..10_000 {
        let x = ProjVector::random_annulus(&mut rng);
        let y = ProjVector::random_annulus(&mut rng);
        let z = ProjVector::random_annulus(&mut rng);
        ok &= qmul(&x, &x).approx_eq(&x, 1e-12);
        ok &= qmul_inv(&qmul(&x, &y), &y).approx_eq(&x, 1e-12);
        ok &= qmul(&qmul(&x, &y), &z).approx_eq(&qmul(&qmul(&x, &z), &qmul(&y, &z)), 1e-12);
    }
    suite("quandle axioms (10^4 samples, 1e-12)", ok);

    // boundary squares to zero
    let mut ok = true;
    for _ in 0..1000 {
        let mut c = QChain::<3>::default();
        c.push(
            1,
            ProjVector::random_annulus(&mut rng),
            [
                ProjVector::random_annulus(&mut rng),
                ProjVector::random_annulus(&mut rng),
                ProjVector::random_annulus(&mut rng),
            ],
        );
        ok &= boundary2(&boundary3(&c, 1e-9), 1e-9).coefficient_mass(1e-9) < 1e-9;
    }
    suite("boundary^2 = 0 (10^3 chains, 1e-9)", ok);

    // five-term relation
    let mut ok = true;
    let mut done = 0;
    while done < 200 {
        let v = [
            ProjVector::random_annulus(&mut rng),
            ProjVector::random_annulus(&mut rng),
            ProjVector::random_annulus(&mut rng),
            ProjVector::random_annulus(&mut rng),
            ProjVector::random_annulus(&mut rng),
        ];
        match five_term_residual(&v) {
            Ok(rep) => {
                ok &= rep.worst() < 1e-8;
                done += 1;
            }
            Err(_) => continue,
        }
    }
    suite("lifted five-term relation (200 tuples, 1e-8)", ok);

    // dilogarithm reference values
    use cvol::bloch::{li2, PI_SQ};
    use num_complex::Complex64;
    let l = 2.0f64.ln();
    let ok = (li2(Complex64::new(1.0, 0.0)).re - PI_SQ / 6.0).abs() < 1e-12
        && (li2(Complex64::new(-1.0, 0.0)).re + PI_SQ / 12.0).abs() < 1e-12
        && (li2(Complex64::new(0.5, 0.0)).re - (PI_SQ / 12.0 - l * l / 2.0)).abs() < 1e-12;
    suite("Li2 reference values (1e-12)", ok);

    // figure-eight end to end
    let tols = Tolerances::default();
    let ok = match pipeline::compute_from_pd_text(cvol::diagram::FIGURE_EIGHT_PD, 0, 50, &tols) {
        Ok(out) => {
            let r = &out.classes[out.best].result;
            (r.volume - 2.0298832128193072).abs() < 1e-9 && r.cs.abs() < 1e-8
        }
        Err(_) => false,
    };
    suite("figure-eight pipeline (volume to 1e-9)", ok);

    // seed independence
    let ok = match diagram_from_input(cvol::diagram::TREFOIL_PD) {
        Ok((d, regions)) => match solve_and_compute(&d, &regions, 1, 50, &tols) {
            Ok(out) => {
                let arcs = &out.classes[out.best].coloring.arcs;
                let a = compute_complex_volume(&d, &regions, arcs, 21, 50, &tols);
                let b = compute_complex_volume(&d, &regions, arcs, 22, 50, &tols);
                match (a, b) {
                    (Ok(a), Ok(b)) => mod_pi2_dist(a.raw, b.raw) < 1e-9,
                    _ => false,
                }
            }
            Err(_) => false,
        },
        Err(_) => false,
    };
    suite("base-point / region independence on the trefoil (1e-9)", ok);

    if failures == 0 {
        println!("all selftest suites green");
        Ok(())
    } else {
        Err(CliError::Pipeline(PipelineError::BadArtifact(format!(
            "{failures} selftest suite(s) failed"
        ))))
    }
}
