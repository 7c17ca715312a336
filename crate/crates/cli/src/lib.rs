//! Command implementations behind the `ncsos` binary.
//!
//! [`run`] never touches the process: it returns the exit code together with
//! the bytes destined for stdout and stderr, which keeps every command
//! testable in-process.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use ncsos::gram::{self, default_half_degree, GramLimits};
use ncsos::ncparse::{format_rational, parse_poly, parse_rational};
use ncsos::numlin::{Matrix, SymMat};
use ncsos::opeval::{
    evaluate, nsd_check, shift_quadratic_form, shift_truncation, MatTuple, MatrixJson, NsdVerdict,
    OpError,
};
use ncsos::random::{random_conjugators, task_rng};
use ncsos::soscert::SosError;
use ncsos::{
    print_canonical, refute_conjugation, sos_decompose, NcPoly, SosOptions, SosResult, VarContext,
};
use serde::Serialize;
use serde_json::{json, Value};

mod demo;

pub use demo::{paper_demo, Stage};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_SOS: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_CONTRACT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "ncsos",
    version,
    about = "Sums of hermitian squares in the free *-algebra"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: Config,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Config {
    /// Variable declaration; a trailing ' marks a non-self-adjoint variable.
    #[arg(long, global = true, default_value = "X1,X2")]
    pub vars: String,
    /// Half degree of the border basis (default: ceil(deg/2)).
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub accept_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub converge_tol: f64,
    #[arg(long, global = true, default_value_t = 20_000)]
    pub max_iters: usize,
    /// Dimensions as a range "1..6" (inclusive) or a list "1,3,5".
    #[arg(long, global = true, default_value = "1..6", value_parser = parse_dims)]
    pub dims: Dims,
    #[arg(long, global = true, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, global = true, conflicts_with = "text")]
    pub json: bool,
    /// Human-readable output (the default).
    #[arg(long, global = true)]
    pub text: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            vars: "X1,X2".into(),
            degree: None,
            seed: 0,
            accept_tol: 1e-7,
            converge_tol: 1e-10,
            max_iters: 20_000,
            dims: Dims((1..=6).collect()),
            samples: 50,
            json: false,
            text: false,
            out: None,
        }
    }
}

impl Config {
    pub fn sos_options(&self) -> SosOptions {
        SosOptions {
            accept_tol: self.accept_tol,
            converge_tol: self.converge_tol,
            max_iters: self.max_iters,
            limits: GramLimits::default(),
        }
    }

    fn context(&self) -> Result<Arc<VarContext>, Failure> {
        VarContext::from_decl(&self.vars)
            .map(Arc::new)
            .map_err(|e| Failure::usage(format!("--vars {:?}: {e}", self.vars)))
    }

    fn poly(&self, text: &str) -> Result<NcPoly, Failure> {
        let ctx = self.context()?;
        parse_poly(text, &ctx).map_err(|e| Failure::usage(format!("cannot parse {text:?}: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dims(pub Vec<usize>);

fn parse_dims(s: &str) -> Result<Dims, String> {
    let dims: Vec<usize> = if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo
            .trim()
            .parse()
            .map_err(|_| format!("bad range start in {s:?}"))?;
        let hi: usize = hi
            .trim()
            .parse()
            .map_err(|_| format!("bad range end in {s:?}"))?;
        (lo..=hi).collect()
    } else {
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| format!("bad dimension {t:?}"))
            })
            .collect::<Result<_, _>>()?
    };
    if dims.is_empty() || dims.contains(&0) {
        return Err(format!(
            "dimensions must be a nonempty list of positive integers, got {s:?}"
        ));
    }
    Ok(Dims(dims))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for a sum-of-squares certificate or an exact obstruction.
    CheckSos { poly: String },
    /// Refute Σ g_i* p g_i ∈ 1 + SoS for given or random conjugator tuples.
    RefuteConjugation {
        poly: String,
        /// A conjugator g_i; repeat for a tuple.
        #[arg(long = "gs", conflicts_with = "random")]
        gs: Vec<String>,
        /// Random tuples: R DMAX COUNT (up to R conjugators of degree <= DMAX).
        #[arg(long, num_args = 3, value_names = ["R", "DMAX", "COUNT"])]
        random: Option<Vec<usize>>,
    },
    /// Evaluate a polynomial at matrices given as {"n", "entries"} JSON.
    Eval {
        poly: String,
        /// One matrix per declared variable, inline JSON or @path.
        #[arg(long = "mat", required = true)]
        mats: Vec<String>,
    },
    /// Print the canonical Gram matrix.
    Gram { poly: String },
    /// Quadratic form of AA* - A*A + I for the truncated weighted shift.
    ShiftDemo {
        /// Truncation sizes.
        #[arg(long = "n", value_delimiter = ',', default_value = "8,64")]
        sizes: Vec<usize>,
        /// Exact vector "p/q,p/q,..." evaluated at every size of matching length.
        #[arg(long)]
        vector: Option<String>,
    },
    /// Reproduce the counter-example end to end.
    PaperDemo,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn contract(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONTRACT,
            message: message.into(),
        }
    }
}

impl From<SosError> for Failure {
    fn from(e: SosError) -> Self {
        match e {
            SosError::ObstructionMissing | SosError::Numeric(_) => Failure::contract(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

/// A report in both renderings; the flags pick one.
struct Report {
    code: i32,
    text: String,
    json: Value,
    /// Extra stderr line for failing runs.
    note: Option<String>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let rendered = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: rendered,
                }
            } else {
                // --help and --version
                Outcome {
                    code: EXIT_OK,
                    stdout: rendered,
                    stderr: String::new(),
                }
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let cfg = &cli.config;
    let result = match &cli.command {
        Command::CheckSos { poly } => check_sos(poly, cfg),
        Command::RefuteConjugation { poly, gs, random } => refute(poly, gs, random.as_deref(), cfg),
        Command::Eval { poly, mats } => eval(poly, mats, cfg),
        Command::Gram { poly } => gram_cmd(poly, cfg),
        Command::ShiftDemo { sizes, vector } => shift_demo(sizes, vector.as_deref(), cfg),
        Command::PaperDemo => Ok(demo_report(cfg)),
    };
    let report = match result {
        Ok(r) => r,
        Err(f) => {
            return Outcome {
                code: f.code,
                stdout: String::new(),
                stderr: format!("error: {}\n", f.message),
            }
        }
    };
    let body = if cfg.json {
        let mut s = serde_json::to_string_pretty(&report.json).expect("reports serialize");
        s.push('\n');
        s
    } else {
        report.text
    };
    let mut stderr = String::new();
    if let Some(note) = &report.note {
        stderr.push_str(&format!("error: {note}\n"));
    } else if report.code == EXIT_CONTRACT {
        stderr.push_str("error: contract violation, see report\n");
    }
    if let Some(path) = &cfg.out {
        if let Err(e) = std::fs::write(path, &body) {
            return Outcome {
                code: EXIT_USAGE,
                stdout: String::new(),
                stderr: format!("error: cannot write {}: {e}\n", path.display()),
            };
        }
        return Outcome {
            code: report.code,
            stdout: String::new(),
            stderr,
        };
    }
    Outcome {
        code: report.code,
        stdout: body,
        stderr,
    }
}

pub fn exit_code(result: &SosResult) -> i32 {
    match result {
        SosResult::Certificate { .. } => EXIT_OK,
        SosResult::NotSos { .. } => EXIT_NOT_SOS,
        SosResult::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    }
}

fn check_sos(text: &str, cfg: &Config) -> Result<Report, Failure> {
    let p = cfg.poly(text)?;
    let ctx = p.context().clone();
    let d = cfg.degree.unwrap_or_else(|| default_half_degree(&p));
    let result = sos_decompose(&p, d, &cfg.sos_options())?;
    let j = result.to_json(&ctx);
    let mut t = String::new();
    writeln!(t, "polynomial: {}", print_canonical(&p)).unwrap();
    writeln!(t, "half degree: {d}").unwrap();
    writeln!(t, "status: {}", j.status).unwrap();
    match &result {
        SosResult::Certificate {
            gs,
            residual,
            iterations,
            ..
        } => {
            for (i, g) in gs.iter().enumerate() {
                writeln!(t, "g{} = {}", i + 1, g.format(&ctx)).unwrap();
            }
            writeln!(t, "residual: {residual:e}").unwrap();
            writeln!(t, "iterations: {iterations}").unwrap();
        }
        SosResult::NotSos { obstruction } => {
            writeln!(t, "{}", obstruction.describe(&ctx)).unwrap();
        }
        SosResult::Inconclusive {
            iterations,
            final_gap,
            min_eigenvalue,
        } => {
            writeln!(t, "iterations: {iterations}").unwrap();
            writeln!(t, "final gap: {final_gap:e}").unwrap();
            writeln!(t, "min eigenvalue: {min_eigenvalue:e}").unwrap();
        }
    }
    Ok(Report {
        code: exit_code(&result),
        text: t,
        json: serde_json::to_value(j).expect("serializable"),
        note: None,
    })
}

#[derive(Serialize)]
struct TupleRecord {
    index: usize,
    gs: Vec<String>,
    refuted: bool,
    kind: Option<String>,
    witness_word: Option<String>,
    top_word: Option<String>,
    coefficient: Option<String>,
    error: Option<String>,
}

fn refute(
    text: &str,
    gs: &[String],
    random: Option<&[usize]>,
    cfg: &Config,
) -> Result<Report, Failure> {
    let p = cfg.poly(text)?;
    let ctx = p.context().clone();
    let tuples: Vec<Vec<NcPoly>> = match random {
        Some(&[r, dmax, count]) => {
            if r == 0 {
                return Err(Failure::usage("--random needs R >= 1"));
            }
            (0..count)
                .map(|i| random_conjugators(&mut task_rng(cfg.seed, i as u64), &ctx, r, dmax))
                .collect()
        }
        Some(_) => unreachable!("clap enforces three values"),
        None => {
            if gs.is_empty() {
                return Err(Failure::usage(
                    "give --gs at least once or --random R DMAX COUNT",
                ));
            }
            let parsed = gs
                .iter()
                .map(|g| cfg.poly(g))
                .collect::<Result<Vec<_>, _>>()?;
            vec![parsed]
        }
    };
    let mut records = Vec::with_capacity(tuples.len());
    let mut t = String::new();
    let mut missing = false;
    for (index, tuple) in tuples.iter().enumerate() {
        let gs_text: Vec<String> = tuple.iter().map(print_canonical).collect();
        let mut rec = TupleRecord {
            index,
            gs: gs_text.clone(),
            refuted: false,
            kind: None,
            witness_word: None,
            top_word: None,
            coefficient: None,
            error: None,
        };
        match refute_conjugation(&p, tuple) {
            Ok(r) => {
                let ob = &r.obstruction;
                rec.refuted = true;
                rec.kind = Some(ob.kind.to_string());
                rec.witness_word = Some(ctx.format_word_compact(&ob.witness_word));
                rec.top_word = Some(ctx.format_word_compact(&ob.top_word));
                rec.coefficient = Some(format_rational(&ob.coefficient));
                writeln!(t, "tuple {index}: refuted, {}", ob.describe(&ctx)).unwrap();
            }
            Err(SosError::ObstructionMissing) => {
                missing = true;
                rec.error = Some(SosError::ObstructionMissing.to_string());
                writeln!(
                    t,
                    "tuple {index}: NOT refuted, gs = [{}]",
                    gs_text.join("; ")
                )
                .unwrap();
            }
            Err(e) => return Err(e.into()),
        }
        records.push(rec);
    }
    let refuted = records.iter().filter(|r| r.refuted).count();
    let summary = format!("{refuted}/{} refuted", records.len());
    writeln!(t, "{summary}").unwrap();
    Ok(Report {
        code: if missing { EXIT_CONTRACT } else { EXIT_OK },
        text: t,
        json: json!({
            "polynomial": print_canonical(&p),
            "tuples": records,
            "refuted": refuted,
            "count": records.len(),
            "summary": summary,
        }),
        note: None,
    })
}

fn read_matrix(arg: &str) -> Result<Matrix, Failure> {
    let raw = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {path}: {e}")))?,
        None => arg.to_string(),
    };
    let m: MatrixJson = serde_json::from_str(&raw)
        .map_err(|e| Failure::usage(format!("bad matrix JSON {arg:?}: {e}")))?;
    m.to_matrix().map_err(|e| Failure::usage(e.to_string()))
}

fn eval(text: &str, mats: &[String], cfg: &Config) -> Result<Report, Failure> {
    let p = cfg.poly(text)?;
    let mats = mats
        .iter()
        .map(|m| read_matrix(m))
        .collect::<Result<Vec<_>, _>>()?;
    let tuple =
        MatTuple::new(p.context().clone(), mats).map_err(|e| Failure::usage(e.to_string()))?;
    let m = evaluate(&p, &tuple).map_err(op_failure)?;
    let mut t = String::new();
    writeln!(t, "polynomial: {}", print_canonical(&p)).unwrap();
    writeln!(t, "n = {}", m.rows()).unwrap();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| m.get(i, j).to_string()).collect();
        writeln!(t, "[{}]", row.join(", ")).unwrap();
    }
    let mut j = json!({ "matrix": MatrixJson::from_matrix(&m) });
    // symmetric polynomials give symmetric matrices up to rounding
    if p.is_symmetric() {
        let s = SymMat::symmetrize(&m);
        match nsd_check(&s, 0.0).map_err(op_failure)? {
            NsdVerdict::Nsd { max_eigenvalue } => {
                writeln!(t, "negative semidefinite: max eigenvalue {max_eigenvalue}").unwrap();
                j["nsd"] = json!(true);
                j["max_eigenvalue"] = json!(max_eigenvalue);
            }
            NsdVerdict::NotNsd { vector, value } => {
                writeln!(
                    t,
                    "not negative semidefinite: eigenvalue {value} at {vector:?}"
                )
                .unwrap();
                j["nsd"] = json!(false);
                j["max_eigenvalue"] = json!(value);
                j["witness"] = json!({ "vector": vector, "value": value });
            }
        }
    } else {
        writeln!(t, "polynomial is not symmetric, no definiteness check").unwrap();
    }
    Ok(Report {
        code: EXIT_OK,
        text: t,
        json: j,
        note: None,
    })
}

fn op_failure(e: OpError) -> Failure {
    match e {
        OpError::Numeric(_) | OpError::IdentityViolated { .. } => Failure::contract(e.to_string()),
        _ => Failure::usage(e.to_string()),
    }
}

fn gram_cmd(text: &str, cfg: &Config) -> Result<Report, Failure> {
    let p = cfg.poly(text)?;
    if !p.is_symmetric() {
        return Err(Failure::usage(SosError::NotSymmetric.to_string()));
    }
    let d = cfg.degree.unwrap_or_else(|| default_half_degree(&p));
    let g = gram::canonical_gram(&p, d).map_err(|e| Failure::usage(e.to_string()))?;
    let ctx = p.context();
    let mut t = String::new();
    writeln!(t, "polynomial: {}", print_canonical(&p)).unwrap();
    writeln!(t, "basis ({}): {}", g.n(), g.basis().labels().join(" ")).unwrap();
    for (r, c, v) in g.nonzero_entries() {
        writeln!(
            t,
            "({}, {}) = {}",
            ctx.format_word_compact(&r),
            ctx.format_word_compact(&c),
            format_rational(&v)
        )
        .unwrap();
    }
    Ok(Report {
        code: EXIT_OK,
        text: t,
        json: serde_json::to_value(g.to_json()).expect("serializable"),
        note: None,
    })
}

fn parse_vector(s: &str) -> Result<Vec<ncsos::Rational>, Failure> {
    s.split(',')
        .map(|x| {
            parse_rational(x.trim())
                .map_err(|e| Failure::usage(format!("bad vector entry {x:?}: {e}")))
        })
        .collect()
}

fn shift_demo(sizes: &[usize], vector: Option<&str>, _cfg: &Config) -> Result<Report, Failure> {
    let v = vector.map(parse_vector).transpose()?;
    let mut t = String::new();
    let mut out = Vec::new();
    let mut ok = true;
    for &n in sizes {
        let sh = shift_truncation(n).map_err(|e| Failure::usage(e.to_string()))?;
        let mut basis = Vec::new();
        writeln!(t, "N = {n}").unwrap();
        for k in 1..n {
            let mut e = vec![ncsos::Rational::from_integer(0.into()); n];
            e[k - 1] = ncsos::Rational::from_integer(1.into());
            let q = shift_quadratic_form(&sh, &e).map_err(op_failure)?;
            let expect = ncsos::Rational::from_integer((-2 * (k as i64 - 1)).into());
            ok &= q == expect;
            writeln!(t, "  e{k}: {}", format_rational(&q)).unwrap();
            basis.push(json!({ "k": k, "value": format_rational(&q) }));
        }
        writeln!(t, "  e{n}: rejected, boundary coordinate").unwrap();
        let mut entry = json!({ "n": n, "basis": basis });
        if let Some(v) = v.as_ref().filter(|v| v.len() == n) {
            let q = shift_quadratic_form(&sh, v).map_err(op_failure)?;
            writeln!(t, "  vector: {}", format_rational(&q)).unwrap();
            entry["vector_value"] = json!(format_rational(&q));
        }
        out.push(entry);
    }
    if let Some(v) = &v {
        if !sizes.contains(&v.len()) {
            return Err(Failure::usage(format!(
                "vector length {} matches no --n",
                v.len()
            )));
        }
    }
    Ok(Report {
        code: if ok { EXIT_OK } else { EXIT_CONTRACT },
        text: t,
        json: json!({ "shift": out }),
        note: None,
    })
}

fn demo_report(cfg: &Config) -> Report {
    let stages = paper_demo(cfg);
    let mut t = String::new();
    let mut failed = Vec::new();
    for s in &stages {
        writeln!(t, "== {} ==", s.name).unwrap();
        for line in &s.lines {
            writeln!(t, "{line}").unwrap();
        }
        writeln!(
            t,
            "stage {}: {}",
            s.name,
            if s.passed { "PASS" } else { "FAIL" }
        )
        .unwrap();
        if !s.passed {
            failed.push(s.name);
        }
    }
    if failed.is_empty() {
        writeln!(t, "all {} stages passed", stages.len()).unwrap();
    } else {
        writeln!(t, "failed stages: {}", failed.join(", ")).unwrap();
    }
    let json = json!({
        "stages": stages.iter().map(|s| json!({
            "name": s.name,
            "passed": s.passed,
            "lines": s.lines,
            "data": s.data,
        })).collect::<Vec<_>>(),
        "passed": failed.is_empty(),
        "failed": failed,
    });
    let note =
        (!failed.is_empty()).then(|| format!("paper-demo failed stage(s): {}", failed.join(", ")));
    Report {
        code: if failed.is_empty() {
            EXIT_OK
        } else {
            EXIT_CONTRACT
        },
        text: t,
        json,
        note,
    }
}
