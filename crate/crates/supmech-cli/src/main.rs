//! Batch CLI: verification suites, tensor-pair classification, bracket
//! Jacobi probes, and dynamics runs with CSV trajectories.
//!
//! Exit codes: 0 all-pass, 1 unexpected failure, 2 expected-forbidden
//! (theorem-enforcing) outcome, 3 spec error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use supmech::algebra::{AlgebraDescriptor, AlgebraElement};
use supmech::error::Error;
use supmech::report::{sig17, SuiteBuilder, SuiteReport};
use supmech::rng::{case_rng, random_element};
use supmech::suites;
use supmech::symplectic::SymplecticStructure;
use supmech::sysspec::{self, element_to_json};
use supmech::tensor_product::{
    classify_worlds, generalized_mixed_pb, jacobiator, product_pb, symmetrized_pb, Verdict,
};
use supmech::C64;

#[derive(Parser)]
#[command(name = "supmech", version, about = "Noncommutative symplectic mechanics workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite: calculus, symplectic, tensor, or dynamics.
    Verify {
        /// Suite name: calculus | symplectic | tensor | dynamics
        target: String,
        /// Restrict to one backend, e.g. matrix:2 or poly:1
        #[arg(long)]
        algebra: Option<String>,
        /// Trials per randomized case
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Top-level seed; identical seeds reproduce identical reports
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the JSON report here
        #[arg(long)]
        json: Option<PathBuf>,
        /// Left factor spec (tensor suite only)
        #[arg(long)]
        left: Option<PathBuf>,
        /// Right factor spec (tensor suite only)
        #[arg(long)]
        right: Option<PathBuf>,
    },
    /// Tensor-product analyses.
    Tensor {
        #[command(subcommand)]
        cmd: TensorCmd,
    },
    /// Time evolution runs.
    Dynamics {
        #[command(subcommand)]
        cmd: DynamicsCmd,
    },
}

#[derive(Subcommand)]
enum TensorCmd {
    /// Classify a pair of factor structures and report λ.
    Classify {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Probe the Jacobi identity of one product bracket in one world.
    Jacobi {
        /// Bracket format: eq81 (product), eq82 (symmetrized), eq86 (external field)
        #[arg(long)]
        bracket: String,
        /// World: commutative | quantum | mixed
        #[arg(long)]
        case: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum DynamicsCmd {
    /// Evolve a system spec and write the trajectory CSV.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn tolerance_from_env() -> Result<Option<f64>, String> {
    match std::env::var("SUPMECH_TOLERANCE") {
        Ok(s) => {
            let t: f64 = s
                .parse()
                .map_err(|_| format!("SUPMECH_TOLERANCE is not a number: {s:?}"))?;
            if !(t > 0.0) {
                return Err("SUPMECH_TOLERANCE must be positive".into());
            }
            Ok(Some(t))
        }
        Err(_) => Ok(None),
    }
}

fn parse_algebra_arg(s: &str, tolerance: Option<f64>) -> Result<AlgebraDescriptor, Error> {
    let (kind, n) = s
        .split_once(':')
        .ok_or_else(|| Error::SpecParse(format!("algebra {s:?}; expected matrix:N or poly:N")))?;
    let n: usize = n
        .parse()
        .map_err(|_| Error::SpecParse(format!("algebra size in {s:?} is not an integer")))?;
    let base = match kind {
        "matrix" => AlgebraDescriptor::matrix(n)?,
        "poly" | "polynomial" => AlgebraDescriptor::polynomial(n)?,
        _ => return Err(Error::SpecParse(format!("unknown algebra kind {kind:?}"))),
    };
    match tolerance {
        Some(t) => base.with_tolerance(t),
        None => Ok(base),
    }
}

fn load_structure(path: &Path, tolerance: Option<f64>) -> Result<SymplecticStructure, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::SpecParse(format!("{}: {e}", path.display())))?;
    let spec = sysspec::parse_system_spec(&text)?;
    sysspec::build_structure(&spec, tolerance)
}

fn emit(report: &SuiteReport, json_path: &Option<PathBuf>) -> Result<(), Error> {
    print!("{}", report.to_text());
    if let Some(path) = json_path {
        std::fs::write(path, report.to_json_string())
            .map_err(|e| Error::SpecParse(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::ForbiddenCoupling(_) | Error::UnclassifiedWorld(_) => 2,
        Error::SpecParse(_) => 3,
        _ => 1,
    }
}

#[allow(clippy::too_many_arguments)]
fn run_verify(
    target: &str,
    algebra: Option<String>,
    trials: usize,
    seed: u64,
    json: Option<PathBuf>,
    left: Option<PathBuf>,
    right: Option<PathBuf>,
    tolerance: Option<f64>,
) -> Result<u8, Error> {
    let report = match target {
        "calculus" => {
            let algebras = match algebra {
                Some(s) => vec![parse_algebra_arg(&s, tolerance)?],
                None => suites::default_calculus_algebras(tolerance)?,
            };
            suites::calculus_suite(&algebras, trials, seed)?
        }
        "symplectic" => suites::symplectic_suite(trials, seed, tolerance)?,
        "tensor" => match (&left, &right) {
            (Some(l), Some(r)) => {
                let s1 = load_structure(l, tolerance)?;
                let s2 = load_structure(r, tolerance)?;
                let mut b = SuiteBuilder::new("tensor", seed);
                suites::tensor_pair_cases(&mut b, "pair", &s1, &s2, trials)?;
                b.finish()
            }
            (None, None) => suites::tensor_suite(trials, seed, tolerance)?,
            _ => {
                return Err(Error::SpecParse(
                    "verify tensor takes either both --left and --right or neither".into(),
                ))
            }
        },
        "dynamics" => suites::dynamics_suite(seed, tolerance)?,
        other => {
            return Err(Error::SpecParse(format!(
                "unknown verify target {other:?}; expected calculus, symplectic, tensor, dynamics"
            )))
        }
    };
    emit(&report, &json)?;
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn run_classify(
    left: &Path,
    right: &Path,
    seed: u64,
    json: Option<PathBuf>,
    tolerance: Option<f64>,
) -> Result<u8, Error> {
    let s1 = load_structure(left, tolerance)?;
    let s2 = load_structure(right, tolerance)?;
    let class = classify_worlds(&s1, &s2)?;
    let mut b = SuiteBuilder::new("tensor-classify", seed);
    let (verdict, lambda, reason) = match &class.verdict {
        Verdict::BothCommutative => ("both-commutative", Some(C64::new(0.0, 0.0)), None),
        Verdict::BothQuantum { lambda } => ("both-quantum", Some(*lambda), None),
        Verdict::Inconsistent { reason } => ("inconsistent", None, Some(reason.clone())),
    };
    let mut witness = json!({"verdict": verdict});
    if let Some(l) = lambda {
        witness["lambda"] = json!([l.re, l.im]);
    }
    if let Some(r) = &reason {
        witness["reason"] = json!(r);
    }
    witness["evidence"] = json!(class
        .evidence
        .iter()
        .map(|(k, v)| json!({"label": k, "residual": sig17(*v)}))
        .collect::<Vec<_>>());
    b.check("classification", true, Some(witness));
    let report = b.finish();
    emit(&report, &json)?;
    match class.verdict {
        Verdict::Inconsistent { .. } => Ok(2),
        _ => Ok(0),
    }
}

/// Representative factor structures for a named world.
fn world_pair(
    case: &str,
    tolerance: Option<f64>,
) -> Result<(SymplecticStructure, SymplecticStructure), Error> {
    let tol = |a: AlgebraDescriptor| -> Result<AlgebraDescriptor, Error> {
        match tolerance {
            Some(t) => a.with_tolerance(t),
            None => Ok(a),
        }
    };
    let poly1 = tol(AlgebraDescriptor::polynomial(1)?)?;
    let mat2 = tol(AlgebraDescriptor::matrix(2)?)?;
    match case {
        "commutative" => Ok((
            SymplecticStructure::classical(&poly1)?,
            SymplecticStructure::classical(&poly1)?,
        )),
        "quantum" => Ok((
            SymplecticStructure::quantum(&mat2, 1.0)?,
            SymplecticStructure::quantum(&mat2, 1.0)?,
        )),
        "mixed" => Ok((
            SymplecticStructure::classical(&poly1)?,
            SymplecticStructure::quantum(&mat2, 1.0)?,
        )),
        other => Err(Error::SpecParse(format!(
            "unknown case {other:?}; expected commutative, quantum, mixed"
        ))),
    }
}

fn run_jacobi(
    bracket: &str,
    case: &str,
    seed: u64,
    json: Option<PathBuf>,
    tolerance: Option<f64>,
) -> Result<u8, Error> {
    let (s1, s2) = world_pair(case, tolerance)?;
    let algebra = AlgebraDescriptor::tensor(s1.algebra().clone(), s2.algebra().clone())?;
    let tol = algebra.tolerance();
    let mut b = SuiteBuilder::new("tensor-jacobi", seed);
    let mut rng = case_rng(seed, &format!("jacobi-{bracket}-{case}"));
    let mut triple = || -> (AlgebraElement, AlgebraElement, AlgebraElement) {
        (
            random_element(&mut rng, &algebra, 2),
            random_element(&mut rng, &algebra, 2),
            random_element(&mut rng, &algebra, 2),
        )
    };

    match bracket {
        "eq81" => {
            let class = classify_worlds(&s1, &s2)?;
            if class.verdict.lambda().is_none() {
                // theorem-enforcing refusal: no product bracket exists here
                emit(&b.finish(), &json)?;
                if let Verdict::Inconsistent { reason } = &class.verdict {
                    eprintln!("product bracket undefined: {reason}");
                }
                return Ok(2);
            }
            let mut worst = 0.0f64;
            for _ in 0..25 {
                let (u, v, w) = triple();
                let j = jacobiator(|x, y| product_pb(&class, &s1, &s2, x, y), &u, &v, &w)?;
                worst = worst.max(j.norm() / (u.norm() * v.norm() * w.norm()).max(1.0));
            }
            b.case(&format!("jacobi-product-{case}"), worst, 1e-9, None);
        }
        "eq82" => {
            if case == "mixed" {
                // the pinned witness triple
                let q = AlgebraElement::coordinate_q(s1.algebra(), 0)?;
                let p = AlgebraElement::coordinate_p(s1.algebra(), 0)?;
                let [sx, sy, _] = supmech::algebra::matrices::pauli();
                let ex = AlgebraElement::from_matrix(s2.algebra(), sx)?;
                let ey = AlgebraElement::from_matrix(s2.algebra(), sy)?;
                let u = AlgebraElement::tensor(&q, &ex)?;
                let v = AlgebraElement::tensor(&p.mul(&p)?, &ex)?;
                let w = AlgebraElement::tensor(&q.mul(&q)?, &ey)?;
                let j = jacobiator(|x, y| symmetrized_pb(&s1, &s2, x, y), &u, &v, &w)?;
                b.check(
                    "jacobi-symmetrized-mixed-violation",
                    j.norm() > 1e3 * tol,
                    Some(json!({
                        "jacobiatorNorm": sig17(j.norm()),
                        "u": element_to_json(&u),
                        "v": element_to_json(&v),
                        "w": element_to_json(&w),
                        "jacobiator": element_to_json(&j),
                    })),
                );
            } else {
                let mut worst = 0.0f64;
                for _ in 0..25 {
                    let (u, v, w) = triple();
                    let j = jacobiator(|x, y| symmetrized_pb(&s1, &s2, x, y), &u, &v, &w)?;
                    worst = worst.max(j.norm() / (u.norm() * v.norm() * w.norm()).max(1.0));
                }
                b.case(&format!("jacobi-symmetrized-{case}"), worst, 1e-9, None);
            }
        }
        "eq86" => {
            if case != "mixed" {
                return Err(Error::SpecParse(
                    "the external-field bracket lives on the mixed polynomial ⊗ matrix algebra; \
                     use --case mixed"
                        .into(),
                ));
            }
            let bparam = C64::new(0.0, -1.0);
            let mut worst = 0.0f64;
            for _ in 0..25 {
                let (u, v, w) = triple();
                let j = jacobiator(|x, y| generalized_mixed_pb(bparam, x, y), &u, &v, &w)?;
                worst = worst.max(j.norm() / (u.norm() * v.norm() * w.norm()).max(1.0));
            }
            b.case("jacobi-external-field-mixed", worst, 1e-9, None);
        }
        other => {
            return Err(Error::SpecParse(format!(
                "unknown bracket {other:?}; expected eq81, eq82, eq86"
            )))
        }
    }
    let report = b.finish();
    emit(&report, &json)?;
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn run_dynamics(
    spec: &Path,
    out: &Path,
    seed: u64,
    json: Option<PathBuf>,
    tolerance: Option<f64>,
) -> Result<u8, Error> {
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Error::SpecParse(format!("{}: {e}", spec.display())))?;
    let parsed = sysspec::parse_system_spec(&text)?;
    let setup = sysspec::build_dynamics(&parsed, tolerance)?;
    let (report, csv) = suites::run_dynamics(&setup, seed)?;
    std::fs::write(out, csv).map_err(|e| Error::SpecParse(format!("{}: {e}", out.display())))?;
    emit(&report, &json)?;
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn run() -> Result<u8, Error> {
    let cli = Cli::parse();
    let tolerance = tolerance_from_env().map_err(Error::SpecParse)?;
    match cli.command {
        Command::Verify { target, algebra, trials, seed, json, left, right } => {
            run_verify(&target, algebra, trials, seed, json, left, right, tolerance)
        }
        Command::Tensor { cmd } => match cmd {
            TensorCmd::Classify { left, right, seed, json } => {
                run_classify(&left, &right, seed, json, tolerance)
            }
            TensorCmd::Jacobi { bracket, case, seed, json } => {
                run_jacobi(&bracket, &case, seed, json, tolerance)
            }
        },
        Command::Dynamics { cmd } => match cmd {
            DynamicsCmd::Run { spec, out, seed, json } => {
                run_dynamics(&spec, &out, seed, json, tolerance)
            }
        },
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
