//! Evaluation at matrix tuples, negative-semidefiniteness witnesses and the
//! truncated weighted shift.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::freealg::{NcPoly, Rational, VarContext};
use crate::numlin::{dot, norm2, opnorm2, sym_eigen, Matrix, NumError, SymMat, DEFAULT_EIGEN_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpError {
    #[error("tuple has {got} matrices, context declares {want} variables")]
    Arity { got: usize, want: usize },
    #[error("matrix for {var} is not {n}x{n}")]
    Dimension { var: String, n: usize },
    #[error("matrix for self-adjoint variable {0} is not symmetric")]
    NotSelfAdjoint(String),
    #[error("polynomial and tuple use different variable contexts")]
    ContextMismatch,
    #[error("C* identity violated: ‖AB‖² = {a}, ‖ABBA‖ = {abba}, ‖BAAB‖ = {baab}")]
    IdentityViolated { a: f64, abba: f64, baab: f64 },
    #[error("shift truncation needs N >= 2, got {0}")]
    ShiftTooSmall(usize),
    #[error("vector has length {got}, expected {want}")]
    VectorLength { got: usize, want: usize },
    #[error(
        "vector touches the last coordinate; the truncation's last diagonal entry is a finite-size artifact"
    )]
    BoundaryArtifact,
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// One `n×n` matrix per variable. Self-adjoint variables get exactly
/// symmetric matrices; the adjoint letter of any other variable evaluates
/// to the transpose.
#[derive(Debug, Clone)]
pub struct MatTuple {
    ctx: Arc<VarContext>,
    n: usize,
    mats: Vec<Matrix>,
}

impl MatTuple {
    pub fn new(ctx: Arc<VarContext>, mats: Vec<Matrix>) -> Result<Self, OpError> {
        if mats.len() != ctx.var_count() {
            return Err(OpError::Arity { got: mats.len(), want: ctx.var_count() });
        }
        let n = mats.first().map_or(0, Matrix::rows);
        for (var, m) in mats.iter().enumerate() {
            if m.rows() != n || m.cols() != n || n == 0 {
                return Err(OpError::Dimension { var: ctx.name(var).to_string(), n });
            }
            if ctx.is_selfadjoint(var) && !m.is_symmetric() {
                return Err(OpError::NotSelfAdjoint(ctx.name(var).to_string()));
            }
        }
        Ok(Self { ctx, n, mats })
    }

    pub fn pair(ctx: Arc<VarContext>, a: &SymMat, b: &SymMat) -> Result<Self, OpError> {
        Self::new(ctx, vec![a.as_matrix().clone(), b.as_matrix().clone()])
    }

    pub fn context(&self) -> &Arc<VarContext> {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mats(&self) -> &[Matrix] {
        &self.mats
    }
}

/// `p(t)`; the empty word evaluates to the identity.
pub fn evaluate(p: &NcPoly, t: &MatTuple) -> Result<Matrix, OpError> {
    if **p.context() != *t.ctx {
        return Err(OpError::ContextMismatch);
    }
    let transposes: Vec<Matrix> = t.mats.iter().map(Matrix::transpose).collect();
    let mut out = Matrix::zeros(t.n, t.n);
    for (w, c) in p.terms() {
        let mut prod = Matrix::identity(t.n);
        for l in w.letters() {
            let m = if l.starred { &transposes[l.var] } else { &t.mats[l.var] };
            prod = &prod * m;
        }
        out.add_scaled(&prod, c.to_f64().unwrap_or(f64::NAN));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum NsdVerdict {
    Nsd { max_eigenvalue: f64 },
    NotNsd { vector: Vec<f64>, value: f64 },
}

/// Not NSD iff `λ_max > tol`; the witness is the top eigenvector.
pub fn nsd_check(m: &SymMat, tol: f64) -> Result<NsdVerdict, OpError> {
    let e = sym_eigen(m, DEFAULT_EIGEN_TOL)?;
    if e.max() > tol {
        Ok(NsdVerdict::NotNsd { vector: e.vectors.column(0), value: e.max() })
    } else {
        Ok(NsdVerdict::Nsd { max_eigenvalue: e.max() })
    }
}

/// A unit vector on which the quadratic form of `p(tuple)` is positive.
#[derive(Debug, Clone)]
pub struct NsdWitness {
    pub tuple: MatTuple,
    pub vector: Vec<f64>,
    pub value: f64,
}

fn top_eigenvector(s: &SymMat) -> Result<Vec<f64>, OpError> {
    let e = sym_eigen(s, DEFAULT_EIGEN_TOL)?;
    let mut v = e.vectors.column(0);
    let len = norm2(&v);
    v.iter_mut().for_each(|x| *x /= len);
    Ok(v)
}

fn witness_at(p: &NcPoly, tuple: MatTuple, vector: Vec<f64>) -> Result<NsdWitness, OpError> {
    let value = evaluate(p, &tuple)?.quadratic_form(&vector);
    Ok(NsdWitness { tuple, vector, value })
}

/// `f = X1 X2 X2 X1 - X2 X1 X1 X2 + 1` over self-adjoint `X1, X2`.
pub fn counter_example_f() -> NcPoly {
    let ctx = Arc::new(VarContext::selfadjoint(&["X1", "X2"]).expect("static context"));
    crate::ncparse::parse_poly("X1*X2*X2*X1 - X2*X1*X1*X2 + 1", &ctx).expect("static polynomial")
}

/// `h = X X' - X' X + 1` over a single non-self-adjoint `X`.
pub fn counter_example_h() -> NcPoly {
    let ctx = Arc::new(VarContext::from_decl("X'").expect("static context"));
    crate::ncparse::parse_poly("X*X' - X'*X + 1", &ctx).expect("static polynomial")
}

/// Evaluates `f` on the top eigenvector `v` of `ABBA`. Then
/// `⟨f(A,B)v, v⟩ = ‖AB‖² - ⟨BAABv, v⟩ + 1 >= 1`.
pub fn f_refutation_witness(a: &SymMat, b: &SymMat) -> Result<NsdWitness, OpError> {
    if a.n() != b.n() {
        return Err(OpError::Dimension { var: "X2".into(), n: a.n() });
    }
    let f = counter_example_f();
    let tuple = MatTuple::pair(f.context().clone(), a, b)?;
    let ba = b.as_matrix() * a.as_matrix();
    let abba = SymMat::symmetrize(&(&ba.transpose() * &ba));
    let v = top_eigenvector(&abba)?;
    witness_at(&f, tuple, v)
}

/// Same construction for `h(A, Aᵀ)` with `v` the top eigenvector of `AAᵀ`.
pub fn h_refutation_witness(a: &Matrix) -> Result<NsdWitness, OpError> {
    let h = counter_example_h();
    let tuple = MatTuple::new(h.context().clone(), vec![a.clone()])?;
    let aat = SymMat::symmetrize(&(a * &a.transpose()));
    let v = top_eigenvector(&aat)?;
    witness_at(&h, tuple, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CstarReport {
    pub norm_ab_squared: f64,
    pub norm_abba: f64,
    pub norm_baab: f64,
}

/// Checks `‖ABBA‖ = ‖AB‖² = ‖BAAB‖` to relative tolerance `tol`.
pub fn cstar_identity_check(a: &SymMat, b: &SymMat, tol: f64) -> Result<CstarReport, OpError> {
    if a.n() != b.n() {
        return Err(OpError::Dimension { var: "B".into(), n: a.n() });
    }
    let (am, bm) = (a.as_matrix(), b.as_matrix());
    let ab = am * bm;
    let ba = bm * am;
    let norm_ab = opnorm2(&ab)?;
    let a_sq = norm_ab * norm_ab;
    let norm_abba = opnorm2(&(&ab * &ba))?;
    let norm_baab = opnorm2(&(&ba * &ab))?;
    let scale = tol * a_sq.max(1.0);
    if (norm_abba - a_sq).abs() > scale || (norm_baab - a_sq).abs() > scale {
        return Err(OpError::IdentityViolated { a: a_sq, abba: norm_abba, baab: norm_baab });
    }
    Ok(CstarReport { norm_ab_squared: a_sq, norm_abba, norm_baab })
}

/// `N×N` truncation of `A e_k = k e_{k+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftTruncation {
    n: usize,
    /// Row-major, exact integers.
    entries: Vec<i64>,
}

impl ShiftTruncation {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_vec(self.n, self.n, self.entries.iter().map(|&x| x as f64).collect())
    }

    fn apply(&self, v: &[Rational], transpose: bool) -> Vec<Rational> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(Rational::zero(), |acc, j| {
                    let a = if transpose { self.get(j, i) } else { self.get(i, j) };
                    if a == 0 {
                        acc
                    } else {
                        acc + &v[j] * Rational::from_integer(BigInt::from(a))
                    }
                })
            })
            .collect()
    }
}

pub fn shift_truncation(n: usize) -> Result<ShiftTruncation, OpError> {
    if n < 2 {
        return Err(OpError::ShiftTooSmall(n));
    }
    let mut entries = vec![0i64; n * n];
    // 0-based: row k, column k-1 holds k
    for k in 1..n {
        entries[k * n + (k - 1)] = k as i64;
    }
    Ok(ShiftTruncation { n, entries })
}

fn sq_norm(v: &[Rational]) -> Rational {
    v.iter().fold(Rational::zero(), |acc, x| acc + x * x)
}

/// `⟨(AAᵀ - AᵀA + I)v, v⟩ = ‖Aᵀv‖² - ‖Av‖² + ‖v‖²`, exactly. The vector must
/// vanish on the last coordinate.
pub fn shift_quadratic_form(t: &ShiftTruncation, v: &[Rational]) -> Result<Rational, OpError> {
    if v.len() != t.n {
        return Err(OpError::VectorLength { got: v.len(), want: t.n });
    }
    if !v[t.n - 1].is_zero() {
        return Err(OpError::BoundaryArtifact);
    }
    let av = t.apply(v, false);
    let atv = t.apply(v, true);
    Ok(sq_norm(&atv) - sq_norm(&av) + sq_norm(v))
}

/// Dense matrix interchange form, `{n, entries}` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<f64>,
}

impl MatrixJson {
    pub fn from_matrix(m: &Matrix) -> Self {
        assert!(m.is_square(), "interchange matrices are square");
        Self { n: m.rows(), entries: m.as_slice().to_vec() }
    }

    pub fn to_matrix(&self) -> Result<Matrix, OpError> {
        if self.entries.len() != self.n * self.n {
            return Err(OpError::VectorLength { got: self.entries.len(), want: self.n * self.n });
        }
        Ok(Matrix::from_vec(self.n, self.n, self.entries.clone()))
    }
}

/// `{vector, value, norms}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessJson {
    pub vector: Vec<f64>,
    pub value: f64,
    pub norms: Option<CstarReport>,
}

impl NsdWitness {
    pub fn to_json(&self, norms: Option<CstarReport>) -> WitnessJson {
        WitnessJson { vector: self.vector.clone(), value: self.value, norms }
    }

    pub fn unit_error(&self) -> f64 {
        (dot(&self.vector, &self.vector).sqrt() - 1.0).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncparse::parse_poly;
    use crate::random::{random_symmetric, task_rng};

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn swap() -> SymMat {
        SymMat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn f_at_scalars_is_one() {
        let f = counter_example_f();
        for (a, b) in [(0.3, -2.0), (5.0, 1.5), (0.0, 7.0)] {
            let t = MatTuple::new(
                f.context().clone(),
                vec![Matrix::from_vec(1, 1, vec![a]), Matrix::from_vec(1, 1, vec![b])],
            )
            .unwrap();
            let v = evaluate(&f, &t).unwrap().get(0, 0);
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn f_at_hand_computed_pair() {
        let f = counter_example_f();
        let t = MatTuple::pair(f.context().clone(), &swap(), &SymMat::diag(&[0.0, 1.0])).unwrap();
        let m = evaluate(&f, &t).unwrap();
        assert_eq!(m, Matrix::diag(&[2.0, 0.0]));
    }

    #[test]
    fn f_at_zero_is_identity() {
        let f = counter_example_f();
        let z = SymMat::zeros(3);
        let t = MatTuple::pair(f.context().clone(), &z, &z).unwrap();
        assert_eq!(evaluate(&f, &t).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn tuple_validation() {
        let f = counter_example_f();
        let ctx = f.context().clone();
        let asym = Matrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(
            MatTuple::new(ctx.clone(), vec![asym.clone(), Matrix::identity(2)]).unwrap_err(),
            OpError::NotSelfAdjoint("X1".into())
        );
        assert!(matches!(
            MatTuple::new(ctx.clone(), vec![Matrix::identity(2)]).unwrap_err(),
            OpError::Arity { .. }
        ));
        assert!(matches!(
            MatTuple::new(ctx, vec![Matrix::identity(2), Matrix::identity(3)]).unwrap_err(),
            OpError::Dimension { .. }
        ));
        let h = counter_example_h();
        assert!(MatTuple::new(h.context().clone(), vec![asym]).is_ok());
    }

    #[test]
    fn context_mismatch() {
        let h = counter_example_h();
        let f = counter_example_f();
        let t = MatTuple::new(h.context().clone(), vec![Matrix::identity(2)]).unwrap();
        assert_eq!(evaluate(&f, &t).unwrap_err(), OpError::ContextMismatch);
    }

    #[test]
    fn nsd_examples() {
        let r = nsd_check(&SymMat::identity(3).sub(&SymMat::identity(3).add(&SymMat::identity(3))), 1e-12)
            .unwrap();
        assert!(matches!(r, NsdVerdict::Nsd { .. }));
        let r = nsd_check(&SymMat::diag(&[2.0, 0.0]), 1e-12).unwrap();
        match r {
            NsdVerdict::NotNsd { vector, value } => {
                assert_eq!(value, 2.0);
                assert!((vector[0].abs() - 1.0).abs() < 1e-14 && vector[1] == 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(nsd_check(&SymMat::zeros(2), 1e-12).unwrap(), NsdVerdict::Nsd { .. }));
    }

    #[test]
    fn f_witness_examples() {
        let w = f_refutation_witness(&swap(), &SymMat::diag(&[0.0, 1.0])).unwrap();
        assert!((w.value - 2.0).abs() < 1e-12);
        assert!((w.vector[0].abs() - 1.0).abs() < 1e-12);

        for n in 1..4 {
            let w = f_refutation_witness(&SymMat::zeros(n), &SymMat::zeros(n)).unwrap();
            assert!((w.value - 1.0).abs() < 1e-12);
            assert!(w.unit_error() <= 1e-12);
        }

        let mut rng = task_rng(5, 0);
        for i in 0..50 {
            let n = 1 + i % 8;
            let a = random_symmetric(&mut rng, n);
            let b = random_symmetric(&mut rng, n);
            let w = f_refutation_witness(&a, &b).unwrap();
            assert!(w.value >= 1.0 - 1e-8, "value {}", w.value);
        }
    }

    #[test]
    fn h_witness_on_random_squares() {
        let mut rng = task_rng(6, 0);
        for n in 1..7 {
            let a = crate::random::gaussian_matrix(&mut rng, n, n);
            let w = h_refutation_witness(&a).unwrap();
            assert!(w.value >= 1.0 - 1e-8);
        }
    }

    #[test]
    fn cstar_examples() {
        let r = cstar_identity_check(&SymMat::identity(3), &SymMat::identity(3), 1e-12).unwrap();
        assert_eq!((r.norm_ab_squared, r.norm_abba, r.norm_baab), (1.0, 1.0, 1.0));
        let r = cstar_identity_check(&swap(), &SymMat::diag(&[0.0, 1.0]), 1e-12).unwrap();
        assert!((r.norm_ab_squared - 1.0).abs() < 1e-12);
        assert!((r.norm_abba - 1.0).abs() < 1e-12);
        assert!((r.norm_baab - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shift_matrices() {
        let t = shift_truncation(3).unwrap();
        assert_eq!(
            t.to_matrix(),
            Matrix::from_rows(&[vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]]).unwrap()
        );
        let t = shift_truncation(2).unwrap();
        assert_eq!(t.to_matrix(), Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap());
        let t = shift_truncation(5).unwrap();
        let sub: Vec<i64> = (1..5).map(|k| t.get(k, k - 1)).collect();
        assert_eq!(sub, vec![1, 2, 3, 4]);
        assert_eq!(shift_truncation(1).unwrap_err(), OpError::ShiftTooSmall(1));
    }

    fn basis_vec(n: usize, k: usize) -> Vec<Rational> {
        (1..=n).map(|i| if i == k { q(1) } else { q(0) }).collect()
    }

    #[test]
    fn shift_form_examples() {
        let t = shift_truncation(5).unwrap();
        assert_eq!(shift_quadratic_form(&t, &basis_vec(5, 2)).unwrap(), q(-2));
        for n in [3, 5, 9] {
            let t = shift_truncation(n).unwrap();
            assert_eq!(shift_quadratic_form(&t, &basis_vec(n, 1)).unwrap(), q(0));
        }
        let t = shift_truncation(6).unwrap();
        let v: Vec<Rational> = basis_vec(6, 2).iter().zip(basis_vec(6, 4)).map(|(a, b)| a + b).collect();
        assert_eq!(shift_quadratic_form(&t, &v).unwrap(), q(-8));
    }

    #[test]
    fn shift_form_boundary_and_length() {
        let t = shift_truncation(4).unwrap();
        assert_eq!(shift_quadratic_form(&t, &basis_vec(4, 4)).unwrap_err(), OpError::BoundaryArtifact);
        assert!(matches!(
            shift_quadratic_form(&t, &basis_vec(3, 1)).unwrap_err(),
            OpError::VectorLength { .. }
        ));
    }

    #[test]
    fn commuting_scalars_collapse_any_commutator() {
        let ctx = Arc::new(VarContext::selfadjoint(&["X1", "X2"]).unwrap());
        let p = parse_poly("X1*X2 - X2*X1 + 3", &ctx).unwrap();
        let t = MatTuple::new(
            ctx,
            vec![Matrix::from_vec(1, 1, vec![2.0]), Matrix::from_vec(1, 1, vec![-4.0])],
        )
        .unwrap();
        assert_eq!(evaluate(&p, &t).unwrap().get(0, 0), 3.0);
    }
}
