//! Command implementations. Every command returns a JSON result that is
//! wrapped into a report by [`run`].

use std::time::Instant;

use lmi_iis_core::altsys::{classify, is_extreme, membership_residual, purify, seeded_member, AltPoint, Extremality, MembershipResidual};
use lmi_iis_core::iis::{greedy_iis, min_support_bruteforce, min_support_l21, verify_iis, IisCheck, IisResult, Refutation};
use lmi_iis_core::pencil::{build_disc, build_halfplane, concat_blocks, Pencil};
use lmi_iis_core::recovery::{
    check_recovery_condition, gen_blocklinear, gen_blocksdp, gen_unique_lp, gen_unique_sdp, sign_stats, CheckMode, Outcome,
    SingletonVerdict,
};
use lmi_iis_core::sdpsolve::SolverSettings;
use lmi_iis_core::symcore::{min_eigenvalue, BlockIndexSet, SymMatrix};
use lmi_iis_core::Error as CoreError;
use serde_json::{json, Value};

use crate::args::{Cli, Command, Family, IisMethod, NormArg};
use crate::format::{read_file, InputError, MatrixFile, ProblemFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Indeterminate(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) | CliError::Usage(_) => 2,
            CliError::Indeterminate(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidArgument(_)
            | CoreError::InvalidPartition(_)
            | CoreError::BlockIndexOutOfRange { .. }
            | CoreError::NotBlockDiagonal { .. }
            | CoreError::NonFinite
            | CoreError::DimensionMismatch { .. } => CliError::Usage(e.to_string()),
            other => CliError::Indeterminate(other.to_string()),
        }
    }
}

/// Everything a process invocation writes.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

/// Runs one command. `argv` is echoed into the report.
pub fn run(cli: &Cli, argv: &[String]) -> Output {
    let settings = cli.global.settings();
    let start = Instant::now();
    if let Command::Gen { .. } = &cli.command {
        return match gen(&cli.command) {
            Ok(text) => Output { stdout: text, stderr: String::new(), code: 0 },
            Err(e) => Output { stdout: String::new(), stderr: format!("error: {e}\n"), code: e.exit_code() },
        };
    }
    let result = execute(cli, &settings);
    let report = |status: &str, body: (&str, Value)| {
        let mut r = json!({
            "command": argv.get(1..).unwrap_or_default(),
            "settings": settings_json(&settings),
            "status": status,
        });
        r[body.0] = body.1;
        r["elapsed_seconds"] = json!(start.elapsed().as_secs_f64());
        let mut text = String::new();
        write_compact(&mut text, &r, 0);
        text + "\n"
    };
    match result {
        Ok(v) => Output { stdout: report("determinate", ("result", v)), stderr: String::new(), code: 0 },
        Err(CliError::Indeterminate(msg)) => Output {
            stdout: report("indeterminate", ("reason", json!(msg))),
            stderr: format!("indeterminate: {msg}\n"),
            code: 3,
        },
        Err(e) => Output { stdout: String::new(), stderr: format!("error: {e}\n"), code: e.exit_code() },
    }
}

/// Indented JSON that keeps arrays of scalars, and arrays of those, on one line.
fn write_compact(out: &mut String, v: &Value, depth: usize) {
    let flat = |v: &Value| match v {
        Value::Array(a) => a.iter().all(|x| !x.is_array() && !x.is_object()),
        Value::Object(_) => false,
        _ => true,
    };
    let pad = "  ".repeat(depth + 1);
    match v {
        Value::Array(a) if a.iter().all(flat) => out.push_str(&serde_json::to_string(v).expect("plain data")),
        Value::Array(a) => {
            out.push_str("[\n");
            for (k, x) in a.iter().enumerate() {
                out.push_str(&pad);
                write_compact(out, x, depth + 1);
                out.push_str(if k + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(depth));
            out.push(']');
        }
        Value::Object(m) if !m.is_empty() => {
            out.push_str("{\n");
            for (k, (key, x)) in m.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&serde_json::to_string(key).expect("string key"));
                out.push_str(": ");
                write_compact(out, x, depth + 1);
                out.push_str(if k + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&"  ".repeat(depth));
            out.push('}');
        }
        _ => out.push_str(&serde_json::to_string(v).expect("plain data")),
    }
}

fn execute(cli: &Cli, s: &SolverSettings) -> Result<Value, CliError> {
    match &cli.command {
        Command::Check { file } => check(&load(file)?, s),
        Command::Iis { file, norm } => iis(&load(file)?, cli.global.method, *norm, s),
        Command::Extreme { file, blocks } => extreme(&load(file)?, blocks, s),
        Command::Unique { file, t, x0, trials } => {
            let p = load(file)?;
            match (t, x0) {
                (Some(t), _) => unique_condition(&p, *t, s),
                (None, Some(path)) => unique_solution(&p, &load_matrix(path)?, *trials, s),
                (None, None) => Err(CliError::Usage("unique needs --t or --x0".into())),
            }
        }
        Command::Gen { .. } => unreachable!("handled before solving"),
    }
}

fn with_path(path: &str, e: InputError) -> CliError {
    match e {
        InputError::Io { .. } => CliError::Input(e),
        other => CliError::Usage(format!("{path}: {other}")),
    }
}

pub fn load(path: &str) -> Result<Pencil, CliError> {
    let text = read_file(path)?;
    ProblemFile::parse(&text).and_then(|f| f.to_pencil()).map_err(|e| with_path(path, e))
}

fn load_matrix(path: &str) -> Result<SymMatrix, CliError> {
    let text = read_file(path)?;
    MatrixFile::parse(&text).and_then(|f| f.to_matrix()).map_err(|e| with_path(path, e))
}

fn settings_json(s: &SolverSettings) -> Value {
    json!({
        "algorithm": format!("{:?}", s.algorithm),
        "max_iter": s.iteration_cap(),
        "tol_primal": s.tol_primal,
        "tol_dual": s.tol_dual,
        "tol_gap": s.tol_gap,
        "tol_psd": s.tol_psd,
        "tol_certificate": s.tol_certificate,
        "infeasible_threshold": s.infeasible_threshold,
        "feasible_threshold": s.feasible_threshold,
        "rank_tol": s.rank_tol,
        "kernel_tol": s.kernel_tol,
        "support_tol": s.support_tol,
        "sign_tol": s.sign_tol,
        "uniqueness_tol": s.uniqueness_tol,
        "samples": s.samples,
        "full_subset_limit": s.full_subset_limit,
        "brute_force_limit": s.brute_force_limit,
        "seed": s.seed,
    })
}

fn set_json(set: &BlockIndexSet) -> Value {
    json!({ "indices": set.as_slice(), "labels": set.labels() })
}

fn matrix_json(x: &SymMatrix) -> Value {
    serde_json::to_value(MatrixFile::from_matrix(x)).expect("finite matrix")
}

fn residual_json(r: &MembershipResidual) -> Value {
    json!({ "constraint": r.constraint, "normalization": r.normalization, "min_eig": r.min_eig })
}

/// A member of the alternative set with the residuals recomputed from the
/// emitted matrix.
fn point_json(p: &Pencil, x: &AltPoint) -> Result<Value, CliError> {
    let r = membership_residual(p, x.x())?;
    Ok(json!({
        "matrix": matrix_json(x.x()),
        "support": set_json(x.support()),
        "residuals": residual_json(&r),
    }))
}

fn not_infeasible() -> CliError {
    CliError::Indeterminate("system is not weakly infeasible".into())
}

fn check(p: &Pencil, s: &SolverSettings) -> Result<Value, CliError> {
    let st = classify(p, s)?;
    match &st.certificate {
        Some(c) => Ok(json!({
            "verdict": "WeaklyInfeasible",
            "eta": st.eta_opt,
            "certificate": point_json(p, c)?,
        })),
        None => {
            let mut witnesses = Vec::new();
            for (eps, y) in &st.epsilon_witnesses {
                let lmin = if p.n() == 0 { 0.0 } else { min_eigenvalue(&p.evaluate(y)?)? };
                witnesses.push(json!({ "epsilon": eps, "y": y, "min_eigenvalue": lmin }));
            }
            Ok(json!({ "verdict": "WeaklyFeasible", "eta": st.eta_opt, "epsilon_witnesses": witnesses }))
        }
    }
}

fn verification_json(r: &IisResult) -> Value {
    r.verification
        .iter()
        .map(|v| json!({ "set": set_json(&v.set), "verdict": format!("{:?}", v.verdict), "eta": v.eta }))
        .collect()
}

fn refutation_json(c: &IisCheck) -> Value {
    match c {
        IisCheck::Verified(_) => Value::Null,
        IisCheck::Refuted(Refutation::Feasible { eta }) => json!({ "feasible": { "eta": eta } }),
        IisCheck::Refuted(Refutation::Reducible { subset, .. }) => json!({ "reducible_to": set_json(subset) }),
    }
}

fn iis(p: &Pencil, method: IisMethod, norm: NormArg, s: &SolverSettings) -> Result<Value, CliError> {
    if !classify(p, s)?.is_infeasible() {
        return Err(not_infeasible());
    }
    match method {
        IisMethod::Greedy => {
            let r = greedy_iis(p, s)?;
            Ok(json!({
                "method": "greedy",
                "set": set_json(&r.set),
                "verified": true,
                "certificate": point_json(p, &r.certificate)?,
                "certificate_extreme": r.certificate_extreme,
                "verification": verification_json(&r),
            }))
        }
        IisMethod::Brute => {
            let (set, point) = min_support_bruteforce(p, s)?;
            let check = verify_iis(p, &set, s)?;
            Ok(json!({
                "method": "brute",
                "set": set_json(&set),
                "verified": check.is_verified(),
                "refutation": refutation_json(&check),
                "certificate": point_json(p, &point)?,
            }))
        }
        IisMethod::L21 => {
            let sol = min_support_l21(p, norm.into(), s)?;
            let support = sol.point.support().clone();
            let check = verify_iis(p, &support, s)?;
            Ok(json!({
                "method": "l21",
                "norm": format!("{:?}", sol.norm),
                "objective": sol.objective,
                "set": set_json(&support),
                "verified": check.is_verified(),
                "refutation": refutation_json(&check),
                "certificate": point_json(p, &sol.point)?,
            }))
        }
    }
}

fn extreme(p: &Pencil, blocks: &[usize], s: &SolverSettings) -> Result<Value, CliError> {
    let set = BlockIndexSet::new(blocks.iter().copied());
    set.validate(p.partition())?;
    if set.is_empty() {
        return Err(CliError::Indeterminate("empty restricted system has no alternative points".into()));
    }
    let sub = p.subsystem(&set)?;
    let st = classify(&sub, s)?;
    let certificate = st.certificate.ok_or_else(|| CliError::Indeterminate("restricted system is not weakly infeasible".into()))?;
    let start = seeded_member(&sub, s).unwrap_or(certificate);
    let local = purify(&sub, &start, s)?;
    let point = AltPoint::new(p, p.lift(&set, local.x())?, s)?;
    match is_extreme(p, &point, s)? {
        Extremality::Extreme { rank } => Ok(json!({
            "blocks": set_json(&set),
            "point": point_json(p, &point)?,
            "extreme": true,
            "rank": rank,
        })),
        Extremality::NotExtreme { .. } => Err(CliError::Indeterminate("purified point failed the extremality test".into())),
    }
}

fn max_constraint(matrices: &[&SymMatrix], v: &SymMatrix) -> f64 {
    matrices.iter().map(|a| a.dot(v).abs()).fold(0.0, f64::max)
}

fn unique_condition(p: &Pencil, t: usize, s: &SolverSettings) -> Result<Value, CliError> {
    let mats: Vec<SymMatrix> = p.matrices().cloned().collect();
    let v = check_recovery_condition(&mats, p.partition(), t, s.samples, s)?;
    let mode = match v.mode {
        CheckMode::ExactKernel => "exact",
        CheckMode::Randomized => "randomized",
    };
    let mut out = json!({ "t": t, "mode": mode, "kernel_dimension": v.kernel_dimension });
    match &v.outcome {
        Outcome::Holds => out["outcome"] = json!("Holds"),
        Outcome::Fails(w) => {
            let st = sign_stats(w, p.partition(), s.sign_tol)?;
            out["outcome"] = json!("Fails");
            out["witness"] = matrix_json(w);
            out["sigma_plus"] = json!(st.sigma_plus);
            out["sigma_minus"] = json!(st.sigma_minus);
            out["constraint_residual"] = json!(max_constraint(&p.matrices().collect::<Vec<_>>(), w));
        }
        Outcome::InconclusiveSampled(n) => {
            return Err(CliError::Indeterminate(format!("no counterexample among {n} sampled kernel elements")));
        }
    }
    Ok(out)
}

fn unique_solution(p: &Pencil, x0: &SymMatrix, trials: usize, s: &SolverSettings) -> Result<Value, CliError> {
    let mats: Vec<SymMatrix> = p.matrices().cloned().collect();
    let verdict = lmi_iis_core::recovery::verify_unique_solution(&mats, p.partition(), x0, trials, s)?;
    Ok(match verdict {
        SingletonVerdict::ProbablyUnique { trials } => json!({ "outcome": "ProbablyUnique", "trials": trials }),
        SingletonVerdict::NotUnique { other } => {
            let diff = other.sub(x0);
            json!({
                "outcome": "NotUnique",
                "other": matrix_json(&other),
                "distance": diff.max_abs(),
                "constraint_residual": max_constraint(&p.matrices().collect::<Vec<_>>(), &diff),
                "min_eigenvalue": min_eigenvalue(&other)?,
            })
        }
    })
}

fn parse_halfplane(text: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match parts.as_deref() {
        Ok(&[a, b, g]) if a.is_finite() && b.is_finite() && g.is_finite() => Ok((a, b, g)),
        _ => Err(CliError::Usage(format!("halfplane {text:?} is not of the form α,β,γ"))),
    }
}

/// Problem file text of a fixture family.
pub fn gen(cmd: &Command) -> Result<String, CliError> {
    let Command::Gen { family, eps, n, r, c, halfplane } = cmd else {
        return Err(CliError::Usage("not a gen command".into()));
    };
    let need_n = || n.ok_or_else(|| CliError::Usage("this family needs --n".into()));
    let p = match family {
        Family::Blocklinear => gen_blocklinear(),
        Family::Blocksdp => {
            if !eps.is_finite() {
                return Err(CliError::Usage("--eps must be finite".into()));
            }
            gen_blocksdp(*eps)
        }
        Family::Uniquelp => gen_unique_lp(need_n()?)?.to_pencil()?,
        Family::Uniquesdp => gen_unique_sdp(need_n()?)?.to_pencil()?,
        Family::DiscHalfplanes => {
            let mut parts = Vec::new();
            for h in halfplane {
                let (a, b, g) = parse_halfplane(h)?;
                parts.push(build_halfplane(a, b, g));
            }
            parts.push(build_disc(*r, [c[0], c[1]])?);
            concat_blocks(&parts)?
        }
    };
    Ok(ProblemFile::from_pencil(&p).emit())
}
