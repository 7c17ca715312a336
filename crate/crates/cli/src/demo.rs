//! The end-to-end reproduction behind `ncsos paper-demo`.

use ncsos::gram::{canonical_gram, default_half_degree};
use ncsos::ncparse::{format_rational, parse_poly, parse_word};
use ncsos::numlin::{Matrix, SymMat};
use ncsos::opeval::{
    counter_example_f, counter_example_h, cstar_identity_check, evaluate, f_refutation_witness,
    h_refutation_witness, shift_quadratic_form, shift_truncation, MatTuple, OpError,
};
use ncsos::random::{gaussian_matrix, random_conjugators, random_symmetric, task_rng};
use ncsos::soscert::quadratic_rule;
use ncsos::{
    refute_conjugation, sos_decompose, top_obstruction, NcPoly, ObstructionKind, Rational,
    SosResult,
};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::Config;

const WITNESS_FLOOR: f64 = 1.0 - 1e-8;
const CAMPAIGN: usize = 200;
const CAMPAIGN_SHIFTED: usize = 20;

/// One stage of the demo transcript.
#[derive(Debug, Clone)]
pub struct Stage {
    pub name: &'static str,
    pub passed: bool,
    pub lines: Vec<String>,
    pub data: Value,
}

struct Builder {
    name: &'static str,
    passed: bool,
    lines: Vec<String>,
    data: Value,
}

impl Builder {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            lines: Vec::new(),
            data: json!({}),
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    /// Records a check; a false check fails the stage.
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.lines
            .push(format!("[{}] {what}", if ok { "ok" } else { "FAILED" }));
        self.passed &= ok;
    }

    fn fail(&mut self, what: impl std::fmt::Display) {
        self.check(false, what.to_string());
    }

    fn done(self) -> Stage {
        Stage {
            name: self.name,
            passed: self.passed,
            lines: self.lines,
            data: self.data,
        }
    }
}

/// Independent stream per stage and task.
fn stream(stage: u64, a: usize, b: usize) -> u64 {
    (stage << 48) | ((a as u64) << 24) | b as u64
}

pub fn paper_demo(cfg: &Config) -> Vec<Stage> {
    vec![
        gram_stage(),
        obstruction_stage(),
        witness_stage(cfg),
        cstar_stage(cfg),
        campaign_stage(cfg),
        h_stage(cfg),
        shift_stage(cfg),
    ]
}

fn gram_stage() -> Stage {
    let mut s = Builder::new("gram");
    let f = counter_example_f();
    let ctx = f.context().clone();
    s.line(format!("f = {}", ncsos::print_canonical(&f)));
    let g = match canonical_gram(&f, 2) {
        Ok(g) => g,
        Err(e) => {
            s.fail(e);
            return s.done();
        }
    };
    s.line(format!(
        "border basis, d = 2: {}",
        g.basis().labels().join(" ")
    ));
    let entries: Vec<(String, String, String)> = g
        .nonzero_entries()
        .into_iter()
        .map(|(r, c, v)| {
            (
                ctx.format_word_compact(&r),
                ctx.format_word_compact(&c),
                format_rational(&v),
            )
        })
        .collect();
    for (r, c, v) in &entries {
        s.line(format!("M_f({r}, {c}) = {v}"));
    }
    let expected: Vec<(String, String, String)> = [
        ("1", "1", "1"),
        ("X1X2", "X1X2", "-1"),
        ("X2X1", "X2X1", "1"),
    ]
    .iter()
    .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
    .collect();
    s.check(
        entries == expected,
        "exactly three nonzero entries: (1,1) = 1, (X1X2,X1X2) = -1, (X2X1,X2X1) = 1",
    );
    s.check(g.reconstruct() == f, "V* M_f V reconstructs f exactly");
    s.data = json!({ "gram": g.to_json() });
    s.done()
}

fn obstruction_stage() -> Stage {
    let mut s = Builder::new("obstruction");
    let f = counter_example_f();
    let ctx = f.context().clone();
    match top_obstruction(&f) {
        Ok(Some(ob)) => {
            s.line(format!("f: {}", ob.describe(&ctx)));
            let ok = ob.kind == ObstructionKind::NegativeTopDiagonal
                && ctx.format_word_compact(&ob.witness_word) == "X1X2"
                && ob.coefficient == -Rational::one();
            s.check(
                ok,
                "every Gram matrix of f has entry -1 at (X1X2, X1X2), so f is not a sum of squares",
            );
            s.data = json!({
                "kind": ob.kind.to_string(),
                "witness_word": ctx.format_word_compact(&ob.witness_word),
                "coefficient": format_rational(&ob.coefficient),
            });
        }
        Ok(None) => s.fail("no obstruction found for f"),
        Err(e) => s.fail(e),
    }
    match sos_decompose(&f, 2, &Default::default()) {
        Ok(r) => s.check(
            r.is_not_sos(),
            format!("sos_decompose(f, 2) = {}", r.status()),
        ),
        Err(e) => s.fail(e),
    }
    s.done()
}

fn sym(rows: &[&[f64]]) -> SymMat {
    SymMat::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
        .expect("symmetric literal")
}

fn witness_stage(cfg: &Config) -> Stage {
    let mut s = Builder::new("witness");
    let f = counter_example_f();

    let a = sym(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let b = sym(&[&[0.0, 0.0], &[0.0, 1.0]]);
    match f_refutation_witness(&a, &b) {
        Ok(w) => s.check(
            (w.value - 2.0).abs() <= 1e-12,
            format!("A = [[0,1],[1,0]], B = diag(0,1): <f v, v> = {}", w.value),
        ),
        Err(e) => s.fail(e),
    }
    let zero = SymMat::zeros(2);
    match f_refutation_witness(&zero, &zero) {
        Ok(w) => s.check(
            (w.value - 1.0).abs() <= 1e-12,
            format!("A = B = 0: f = identity, <f v, v> = {}", w.value),
        ),
        Err(e) => s.fail(e),
    }

    let mut per_dim = Vec::new();
    for &n in &cfg.dims.0 {
        let mut min_value = f64::INFINITY;
        let mut all_ok = true;
        let mut scalar_ok = true;
        for k in 0..cfg.samples {
            let mut rng = task_rng(cfg.seed, stream(3, n, k));
            let a = random_symmetric(&mut rng, n);
            let b = random_symmetric(&mut rng, n);
            match f_refutation_witness(&a, &b) {
                Ok(w) => {
                    all_ok &= w.value >= WITNESS_FLOOR && w.unit_error() <= 1e-12;
                    min_value = min_value.min(w.value);
                    if n == 1 {
                        scalar_ok &= scalar_is_one(&f, &w.tuple);
                    }
                }
                Err(e) => {
                    all_ok = false;
                    s.line(format!("n = {n}, sample {k}: {e}"));
                }
            }
        }
        s.check(
            all_ok,
            format!(
                "n = {n}: {} pairs, min <f(A,B)v, v> = {:.6}",
                cfg.samples, min_value
            ),
        );
        if n == 1 {
            s.check(
                scalar_ok,
                format!(
                    "n = 1: f(a, b) = 1 for all {} scalar pairs (commutators vanish)",
                    cfg.samples
                ),
            );
        }
        per_dim.push(json!({ "n": n, "samples": cfg.samples, "min_value": min_value }));
    }
    s.data = json!({ "dims": per_dim });
    s.done()
}

fn scalar_is_one(f: &NcPoly, t: &MatTuple) -> bool {
    let scale: f64 = t.mats().iter().map(|m| m.get(0, 0).powi(4)).sum::<f64>() + 1.0;
    evaluate(f, t)
        .map(|m| (m.get(0, 0) - 1.0).abs() <= 1e-12 * scale)
        .unwrap_or(false)
}

fn cstar_stage(cfg: &Config) -> Stage {
    let mut s = Builder::new("cstar");
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let count = cfg.samples.max(1);
    for k in 0..count {
        let n = cfg.dims.0[k % cfg.dims.0.len()].min(10);
        let mut rng = task_rng(cfg.seed, stream(4, n, k));
        let a = random_symmetric(&mut rng, n);
        let b = random_symmetric(&mut rng, n);
        match cstar_identity_check(&a, &b, 1e-8) {
            Ok(r) => {
                let scale = r.norm_ab_squared.max(1.0);
                let dev = (r.norm_abba - r.norm_ab_squared)
                    .abs()
                    .max((r.norm_baab - r.norm_ab_squared).abs())
                    / scale;
                worst = worst.max(dev);
            }
            Err(e @ OpError::IdentityViolated { .. }) => {
                ok = false;
                s.line(format!("sample {k}: {e}"));
            }
            Err(e) => {
                ok = false;
                s.line(format!("sample {k}: {e}"));
            }
        }
    }
    s.check(
        ok,
        format!("{count} pairs: ‖ABBA‖ = ‖AB‖² = ‖BAAB‖, max relative deviation {worst:.3e}"),
    );
    s.data = json!({ "samples": count, "max_relative_deviation": worst });
    s.done()
}

fn campaign_stage(cfg: &Config) -> Stage {
    let mut s = Builder::new("campaign");
    let f = counter_example_f();
    let ctx = f.context().clone();
    let prefix = parse_word("X1*X2", &ctx).expect("static word");
    match refute_conjugation(&f, &[NcPoly::one(ctx.clone())]) {
        Ok(r) => s.line(format!("gs = [1]: {}", r.obstruction.describe(&ctx))),
        Err(e) => s.fail(e),
    }
    let mut refuted = 0;
    let mut rule_ok = true;
    let mut shifted_rejected = 0;
    for i in 0..CAMPAIGN {
        let mut rng = task_rng(cfg.seed, stream(5, 0, i));
        let gs = random_conjugators(&mut rng, &ctx, 3, 3);
        let r = match refute_conjugation(&f, &gs) {
            Ok(r) => r,
            Err(e) => {
                let shown: Vec<String> = gs.iter().map(ncsos::print_canonical).collect();
                s.line(format!("tuple {i}: {e}; gs = [{}]", shown.join("; ")));
                continue;
            }
        };
        refuted += 1;
        let ob = &r.obstruction;
        let top = gs.iter().filter_map(NcPoly::degree).max().unwrap_or(0);
        let u = ob.witness_word.suffix_from(2.min(ob.witness_word.len()));
        rule_ok &= ob.kind == ObstructionKind::NegativeTopDiagonal
            && ob.witness_word.prefix(2.min(ob.witness_word.len())) == prefix
            && u.len() == top
            && ob.coefficient == quadratic_rule(&gs, &u)
            && ob.coefficient.is_negative();
        if i < 3 {
            s.line(format!("tuple {i}: {}", ob.describe(&ctx)));
        }
        if i < CAMPAIGN_SHIFTED {
            let shifted = &r.conjugated - &NcPoly::one(ctx.clone());
            let d = default_half_degree(&shifted);
            match sos_decompose(&shifted, d, &Default::default()) {
                Ok(SosResult::NotSos { .. }) => shifted_rejected += 1,
                Ok(other) => s.line(format!("tuple {i}: F - 1 gave {}", other.status())),
                Err(e) => s.line(format!("tuple {i}: F - 1: {e}")),
            }
        }
    }
    s.check(refuted == CAMPAIGN, format!("{refuted}/{CAMPAIGN} refuted"));
    s.check(
        rule_ok,
        "every witness is X1X2·u, u of top degree, coefficient -Σ c(g_i, u)²",
    );
    s.check(
        shifted_rejected == CAMPAIGN_SHIFTED,
        format!("{shifted_rejected}/{CAMPAIGN_SHIFTED} shifted F - 1 reported not SoS"),
    );
    s.data = json!({ "count": CAMPAIGN, "refuted": refuted, "shifted_not_sos": shifted_rejected });
    s.done()
}

fn h_stage(cfg: &Config) -> Stage {
    let mut s = Builder::new("h");
    let h = counter_example_h();
    let ctx = h.context().clone();
    s.line(format!(
        "h = {} over {}",
        ncsos::print_canonical(&h),
        ctx.decl()
    ));
    match top_obstruction(&h) {
        Ok(Some(ob)) => {
            s.line(format!("h: {}", ob.describe(&ctx)));
            s.check(
                ob.kind == ObstructionKind::NegativeTopDiagonal
                    && ctx.format_word_compact(&ob.witness_word) == "X"
                    && ob.coefficient == -Rational::one(),
                "h is not a sum of squares",
            );
        }
        Ok(None) => s.fail("no obstruction found for h"),
        Err(e) => s.fail(e),
    }
    let xs = parse_poly("X'", &ctx).expect("static polynomial");
    match refute_conjugation(&h, &[xs]) {
        Ok(r) => s.check(true, format!("gs = [X']: {}", r.obstruction.describe(&ctx))),
        Err(e) => s.fail(format!("gs = [X']: {e}")),
    }
    let mut refuted = 0;
    for i in 0..cfg.samples {
        let mut rng = task_rng(cfg.seed, stream(6, 0, i));
        let gs = random_conjugators(&mut rng, &ctx, 3, 3);
        if refute_conjugation(&h, &gs).is_ok() {
            refuted += 1;
        }
    }
    s.check(
        refuted == cfg.samples,
        format!("{refuted}/{} random conjugations refuted", cfg.samples),
    );
    let mut min_value = f64::INFINITY;
    let mut ok = true;
    for &n in &cfg.dims.0 {
        for k in 0..cfg.samples {
            let mut rng = task_rng(cfg.seed, stream(7, n, k));
            let a: Matrix = gaussian_matrix(&mut rng, n, n);
            match h_refutation_witness(&a) {
                Ok(w) => {
                    ok &= w.value >= WITNESS_FLOOR;
                    min_value = min_value.min(w.value);
                }
                Err(e) => {
                    ok = false;
                    s.line(format!("n = {n}, sample {k}: {e}"));
                }
            }
        }
    }
    s.check(
        ok,
        format!(
            "dims {:?} x {} matrices: min <h(A, Aᵀ)v, v> = {min_value:.6}",
            cfg.dims.0, cfg.samples
        ),
    );
    s.data = json!({ "refuted": refuted, "min_value": min_value });
    s.done()
}

fn closed_form(v: &[Rational]) -> Rational {
    v.iter()
        .enumerate()
        .skip(1)
        .fold(Rational::zero(), |acc, (i, x)| {
            acc - Rational::from_integer((2 * i as i64).into()) * x * x
        })
}

fn shift_stage(cfg: &Config) -> Stage {
    let mut s = Builder::new("shift");
    let mut data = Vec::new();
    for n in [8usize, 64] {
        let t = match shift_truncation(n) {
            Ok(t) => t,
            Err(e) => {
                s.fail(e);
                continue;
            }
        };
        let mut basis_ok = true;
        let mut values = Vec::new();
        for k in 1..n {
            let mut e = vec![Rational::zero(); n];
            e[k - 1] = Rational::one();
            let want = Rational::from_integer((-2 * (k as i64 - 1)).into());
            match shift_quadratic_form(&t, &e) {
                Ok(q) => {
                    basis_ok &= q == want;
                    values.push(format_rational(&q));
                }
                Err(err) => {
                    basis_ok = false;
                    values.push(err.to_string());
                }
            }
        }
        let shown = if n <= 8 {
            values.join(", ")
        } else {
            format!("{}, ..., {}", values[..4].join(", "), values[n - 2])
        };
        s.check(
            basis_ok,
            format!(
                "N = {n}: <(AA* - A*A + I)e_k, e_k> for k = 1..{} is {shown}",
                n - 1
            ),
        );
        let mut last = vec![Rational::zero(); n];
        last[n - 1] = Rational::one();
        s.check(
            shift_quadratic_form(&t, &last) == Err(OpError::BoundaryArtifact),
            format!("N = {n}: e_{n} rejected as a truncation artifact"),
        );
        let mut random_ok = true;
        for k in 0..cfg.samples {
            let mut rng = task_rng(cfg.seed, stream(8, n, k));
            let mut v: Vec<Rational> = (0..n)
                .map(|_| {
                    let p: i64 = rng.random_range(-9..=9);
                    let q: i64 = rng.random_range(1..=5);
                    Rational::new(p.into(), q.into())
                })
                .collect();
            v[n - 1] = Rational::zero();
            random_ok &= matches!(shift_quadratic_form(&t, &v), Ok(q) if !q.is_positive() && q == closed_form(&v));
        }
        s.check(
            random_ok,
            format!(
                "N = {n}: {} random interior vectors give -2 Σ n v_(n+1)² <= 0 exactly",
                cfg.samples
            ),
        );
        data.push(json!({ "n": n, "basis": values }));
    }
    s.data = json!({ "shift": data });
    s.done()
}
