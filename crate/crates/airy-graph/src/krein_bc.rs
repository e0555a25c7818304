//! Krein-space calculus for vertex conditions.
//!
//! The boundary form of the Airy operator splits into the Hermitian matrices
//! `B±` acting on the trace spaces `G±`; `⟨x∣y⟩± = yᴴ B± x`. A vertex condition
//! is either the graph of a map `L: G− → G+` or a separated condition `(Y, U)`.
//! Skew-adjointness corresponds to `L` being `(G−,G+)`-unitary, generation of a
//! contraction semigroup to `L` and `L♯` both being contractions.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::graph_model::{Side, StarGraph};
use crate::linalg::{self, condition_number, hermitian_eigen, null_space, orth, rank, LinalgError};
use crate::{CMat, CVec, C64};

/// Relative threshold used for ranks and null spaces of small constraint matrices.
const RANK_TOL: f64 = 1e-10;
/// Largest condition number for which `L` counts as invertible.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KreinError {
    #[error("the {0} side of the graph has no edges")]
    EmptySide(Side),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("the Krein form is singular")]
    SingularForm,
    #[error("basis vectors are linearly dependent")]
    DependentBasis,
    #[error("vertex constraints are linearly dependent (rank {rank} < {rows})")]
    RankDeficient { rank: usize, rows: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// The indefinite Gram matrix `B±` on `G±` in `(u0 | u1 | u2)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinForm {
    pub side: Side,
    pub matrix: CMat,
}

impl KreinForm {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `[[−diag β, 0, −diag α], [0, diag α, 0], [−diag α, 0, 0]]` over the side's edges.
pub fn krein_matrix(alphas: &[f64], betas: &[f64]) -> CMat {
    let m = alphas.len();
    let mut b = CMat::zeros(3 * m, 3 * m);
    for i in 0..m {
        b[(i, i)] = c(-betas[i]);
        b[(i, 2 * m + i)] = c(-alphas[i]);
        b[(m + i, m + i)] = c(alphas[i]);
        b[(2 * m + i, i)] = c(-alphas[i]);
    }
    b
}

pub fn build_krein_form(g: &StarGraph, side: Side) -> Result<KreinForm, KreinError> {
    if g.side_len(side) == 0 {
        return Err(KreinError::EmptySide(side));
    }
    Ok(KreinForm { side, matrix: krein_matrix(&g.alphas(side), &g.betas(side)) })
}

/// Both forms; an empty side yields a `0×0` matrix.
pub fn krein_pair(g: &StarGraph) -> (KreinForm, KreinForm) {
    let f = |side| KreinForm { side, matrix: krein_matrix(&g.alphas(side), &g.betas(side)) };
    (f(Side::Minus), f(Side::Plus))
}

/// `⟨x∣y⟩ = yᴴ B x`, linear in `x` and conjugate-linear in `y`.
pub fn krein_inner(b: &KreinForm, x: &CVec, y: &CVec) -> Result<C64, KreinError> {
    let n = b.dim();
    if x.len() != n || y.len() != n {
        return Err(KreinError::DimensionMismatch(format!("form of size {n}, vectors {} and {}", x.len(), y.len())));
    }
    Ok(y.dotc(&(&b.matrix * x)))
}

/// Vertex condition given as the graph of `L: G− → G+`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralCondition {
    pub l: CMat,
}

/// Separated condition: `(u(0−), u(0+)) ∈ Y`, the weighted second-derivative
/// combination lies in `Y⊥`, and `u'(0+) = U u'(0−)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedCondition {
    /// Basis of `Y ⊆ ℂ^{|E−|+|E+|}`, ordered as `(u(0−) block | u(0+) block)`.
    pub y_basis: Vec<CVec>,
    /// `|E+| × |E−|`.
    pub u: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VertexCondition {
    General(GeneralCondition),
    Separated(SeparatedCondition),
}

impl VertexCondition {
    /// True when every matrix entry of the condition is real.
    pub fn is_real(&self) -> bool {
        let real = |m: &CMat| m.iter().all(|z| z.im == 0.0);
        match self {
            VertexCondition::General(gc) => real(&gc.l),
            VertexCondition::Separated(sc) => real(&sc.u) && sc.y_basis.iter().all(|y| y.iter().all(|z| z.im == 0.0)),
        }
    }
}

fn check_shape(l: &CMat, bm: &KreinForm, bp: &KreinForm) -> Result<(), KreinError> {
    if l.nrows() != bp.dim() || l.ncols() != bm.dim() {
        return Err(KreinError::DimensionMismatch(format!(
            "L is {}×{}, forms are {} and {}",
            l.nrows(),
            l.ncols(),
            bm.dim(),
            bp.dim()
        )));
    }
    Ok(())
}

/// `L♯ = B−⁻¹ Lᴴ B+`, the adjoint with respect to the two indefinite forms.
pub fn sharp_adjoint(l: &CMat, bm: &KreinForm, bp: &KreinForm) -> Result<CMat, KreinError> {
    check_shape(l, bm, bp)?;
    let rhs = l.adjoint() * &bp.matrix;
    bm.matrix.clone().lu().solve(&rhs).ok_or(KreinError::SingularForm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub holds: bool,
    /// Smallest eigenvalue of the defect `B− − Lᴴ B+ L`.
    pub min_eigenvalue: f64,
    /// Eigenvector of the smallest eigenvalue when the test fails.
    pub witness: Option<CVec>,
}

/// Defect `B_from − Lᴴ B_to L` as a Hermitian matrix.
fn defect(l: &CMat, from: &CMat, to: &CMat) -> CMat {
    linalg::hermitian_part(&(from - l.adjoint() * to * l))
}

fn psd_report(d: &CMat, tol: f64) -> ContractionReport {
    if d.nrows() == 0 {
        return ContractionReport { holds: true, min_eigenvalue: 0.0, witness: None };
    }
    let (vals, vecs) = hermitian_eigen(d);
    let min = vals[0];
    let scale = 1.0 + d.norm();
    let holds = min >= -tol * scale;
    let witness = if holds { None } else { Some(vecs.column(0).into_owned()) };
    ContractionReport { holds, min_eigenvalue: min, witness }
}

/// `⟨Lx∣Lx⟩+ ≤ ⟨x∣x⟩−` for all `x`, i.e. `B− − Lᴴ B+ L ⪰ −tol·(1+‖D‖)`.
pub fn is_krein_contraction(
    l: &CMat,
    bm: &KreinForm,
    bp: &KreinForm,
    tol: f64,
) -> Result<ContractionReport, KreinError> {
    check_shape(l, bm, bp)?;
    Ok(psd_report(&defect(l, &bm.matrix, &bp.matrix), tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotUnitaryReason {
    NotSquare,
    ShapeMismatch,
    Singular,
    Residual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryReport {
    pub holds: bool,
    /// `‖Lᴴ B+ L − B−‖_F / ‖B−‖_F`.
    pub residual: f64,
    pub condition_number: f64,
    pub reason: Option<NotUnitaryReason>,
}

/// `L` square, invertible and `Lᴴ B+ L = B−` up to `tol·‖B−‖`.
pub fn is_krein_unitary(l: &CMat, bm: &KreinForm, bp: &KreinForm, tol: f64) -> UnitaryReport {
    let fail =
        |reason, residual, cond| UnitaryReport { holds: false, residual, condition_number: cond, reason: Some(reason) };
    if l.nrows() != l.ncols() {
        return fail(NotUnitaryReason::NotSquare, f64::NAN, f64::INFINITY);
    }
    if check_shape(l, bm, bp).is_err() {
        return fail(NotUnitaryReason::ShapeMismatch, f64::NAN, f64::INFINITY);
    }
    let residual = linalg::frobenius(&(l.adjoint() * &bp.matrix * l - &bm.matrix)) / linalg::frobenius(&bm.matrix);
    let cond = condition_number(l);
    if cond.is_nan() || cond > MAX_CONDITION {
        return fail(NotUnitaryReason::Singular, residual, cond);
    }
    if residual.is_nan() || residual > tol {
        return fail(NotUnitaryReason::Residual, residual, cond);
    }
    UnitaryReport { holds: true, residual, condition_number: cond, reason: None }
}

/// Columns spanning the graph `{(x, Lx)}` in `G− ⊕ G+`.
pub fn graph_basis(l: &CMat) -> CMat {
    let (r, n) = l.shape();
    let mut m = CMat::zeros(n + r, n);
    m.rows_mut(0, n).copy_from(&CMat::identity(n, n));
    m.rows_mut(n, r).copy_from(l);
    m
}

/// `ω = diag(B−, −B+)` on `G− ⊕ G+`.
pub fn omega_matrix(bm: &KreinForm, bp: &KreinForm) -> CMat {
    let (a, b) = (bm.dim(), bp.dim());
    let mut j = CMat::zeros(a + b, a + b);
    j.view_mut((0, 0), (a, a)).copy_from(&bm.matrix);
    j.view_mut((a, a), (b, b)).copy_from(&(-&bp.matrix));
    j
}

/// Orthonormal basis of `X^{⊥ω} = ker(Mᴴ J)` for `X = span M`.
pub fn omega_complement(x_basis: &CMat, bm: &KreinForm, bp: &KreinForm) -> CMat {
    let j = omega_matrix(bm, bp);
    if x_basis.ncols() == 0 {
        return CMat::identity(j.nrows(), j.nrows());
    }
    null_space(&(x_basis.adjoint() * j), RANK_TOL)
}

/// `X = X^{⊥ω}` with principal angles at most `tol`.
pub fn is_self_orthogonal(x_basis: &CMat, bm: &KreinForm, bp: &KreinForm, tol: f64) -> Result<bool, KreinError> {
    let dim = bm.dim() + bp.dim();
    if x_basis.nrows() != dim {
        return Err(KreinError::DimensionMismatch(format!(
            "basis vectors of length {}, expected {dim}",
            x_basis.nrows()
        )));
    }
    if rank(x_basis, RANK_TOL) < x_basis.ncols() {
        return Err(KreinError::DependentBasis);
    }
    let comp = omega_complement(x_basis, bm, bp);
    if comp.ncols() != x_basis.ncols() {
        return Ok(false);
    }
    if comp.ncols() == 0 {
        return Ok(true);
    }
    let q = orth(x_basis, RANK_TOL);
    let resid = &comp - &q * (q.adjoint() * &comp);
    let sin_max = linalg::svd_full(&resid).0.first().cloned().unwrap_or(0.0);
    Ok(sin_max <= tol)
}

/// A map `L0` with `L0ᴴ B+ L0 = B−`, when the two forms have equal inertia.
pub fn krein_congruence(bm: &KreinForm, bp: &KreinForm) -> Option<CMat> {
    if bm.dim() != bp.dim() {
        return None;
    }
    let (lm, vm) = hermitian_eigen(&bm.matrix);
    let (lp, vp) = hermitian_eigen(&bp.matrix);
    if lm.iter().zip(&lp).any(|(a, b)| a.signum() != b.signum() || *a == 0.0 || *b == 0.0) {
        return None;
    }
    let n = lm.len();
    let d = CMat::from_fn(n, n, |i, j| if i == j { c((lm[i].abs() / lp[i].abs()).sqrt()) } else { c(0.0) });
    Some(vp * d * vm.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    SkewAdjoint,
    ContractionGenerator,
    NotGenerator,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::SkewAdjoint => "SkewAdjoint",
            Verdict::ContractionGenerator => "ContractionGenerator",
            Verdict::NotGenerator => "NotGenerator",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MassConservation {
    Always,
    Never,
    /// Conserved only under a relation among the transport coefficients.
    Conditional(String),
}

impl MassConservation {
    pub fn tag(&self) -> &'static str {
        match self {
            MassConservation::Always => "Always",
            MassConservation::Never => "Never",
            MassConservation::Conditional(_) => "Conditional",
        }
    }
}

impl fmt::Display for MassConservation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MassConservation::Conditional(d) => write!(f, "Conditional({d})"),
            other => f.write_str(other.tag()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    pub mass_conserving: MassConservation,
    pub diagnostics: BTreeMap<String, f64>,
}

fn check_general(g: &StarGraph, cond: &GeneralCondition) -> Result<(KreinForm, KreinForm), KreinError> {
    let (bm, bp) = krein_pair(g);
    check_shape(&cond.l, &bm, &bp)?;
    Ok((bm, bp))
}

/// Skew-adjoint iff `L` is unitary; otherwise a contraction generator iff both
/// `L` and `L♯` are Krein contractions.
pub fn classify_general(g: &StarGraph, cond: &GeneralCondition, tol: f64) -> Result<Classification, KreinError> {
    let (bm, bp) = check_general(g, cond)?;
    let mut diag = BTreeMap::new();
    let unitary = is_krein_unitary(&cond.l, &bm, &bp, tol);
    diag.insert("unitary_residual".to_string(), unitary.residual);
    diag.insert("condition_number".to_string(), unitary.condition_number);
    let contraction = is_krein_contraction(&cond.l, &bm, &bp, tol)?;
    diag.insert("defect_min_eig".to_string(), contraction.min_eigenvalue);
    let sharp_ok = match sharp_adjoint(&cond.l, &bm, &bp) {
        Ok(ls) => {
            let r = psd_report(&defect(&ls, &bp.matrix, &bm.matrix), tol);
            diag.insert("sharp_defect_min_eig".to_string(), r.min_eigenvalue);
            r.holds
        }
        Err(_) => false,
    };
    let verdict = if unitary.holds {
        Verdict::SkewAdjoint
    } else if contraction.holds && sharp_ok {
        Verdict::ContractionGenerator
    } else {
        Verdict::NotGenerator
    };
    let mass = mass_flux_condition(g, &VertexCondition::General(cond.clone()))?;
    Ok(Classification { verdict, mass_conserving: mass, diagnostics: diag })
}

fn check_separated(g: &StarGraph, cond: &SeparatedCondition) -> Result<(), KreinError> {
    let (nm, np) = (g.side_len(Side::Minus), g.side_len(Side::Plus));
    if cond.u.shape() != (np, nm) {
        return Err(KreinError::DimensionMismatch(format!("U is {:?}, expected ({np}, {nm})", cond.u.shape())));
    }
    if let Some(y) = cond.y_basis.iter().find(|y| y.len() != nm + np) {
        return Err(KreinError::DimensionMismatch(format!("Y vector of length {}, expected {}", y.len(), nm + np)));
    }
    if !cond.y_basis.is_empty() && rank(&y_matrix(cond, nm + np), RANK_TOL) < cond.y_basis.len() {
        return Err(KreinError::DependentBasis);
    }
    Ok(())
}

fn y_matrix(cond: &SeparatedCondition, n: usize) -> CMat {
    let mut y = CMat::zeros(n, cond.y_basis.len());
    for (k, v) in cond.y_basis.iter().enumerate() {
        y.set_column(k, v);
    }
    y
}

/// `U` measured between `ℓ²(E−, α−)` and `ℓ²(E+, α+)`: unitary iff
/// `Uᴴ diag(α+) U = diag(α−)`, contraction iff `diag(α−) − Uᴴ diag(α+) U ⪰ 0`.
/// `Y` does not enter the verdict.
pub fn classify_separated(g: &StarGraph, cond: &SeparatedCondition, tol: f64) -> Result<Classification, KreinError> {
    check_separated(g, cond)?;
    let wm = CMat::from_diagonal(&linalg::vec_from(&g.alphas(Side::Minus)));
    let wp = CMat::from_diagonal(&linalg::vec_from(&g.alphas(Side::Plus)));
    let d = linalg::hermitian_part(&(&wm - cond.u.adjoint() * &wp * &cond.u));
    let report = psd_report(&d, tol);
    let mut diag = BTreeMap::new();
    diag.insert("weighted_defect_min_eig".to_string(), report.min_eigenvalue);
    let square = cond.u.nrows() == cond.u.ncols();
    let residual = if square && wm.nrows() > 0 { linalg::frobenius(&d) / linalg::frobenius(&wm) } else { f64::NAN };
    diag.insert("unitary_residual".to_string(), residual);
    let verdict = if square && residual <= tol {
        Verdict::SkewAdjoint
    } else if report.holds {
        Verdict::ContractionGenerator
    } else {
        Verdict::NotGenerator
    };
    let mass = mass_flux_condition(g, &VertexCondition::Separated(cond.clone()))?;
    Ok(Classification { verdict, mass_conserving: mass, diagnostics: diag })
}

pub fn classify(g: &StarGraph, cond: &VertexCondition, tol: f64) -> Result<Classification, KreinError> {
    match cond {
        VertexCondition::General(gc) => classify_general(g, gc, tol),
        VertexCondition::Separated(sc) => classify_separated(g, sc, tol),
    }
}

/// Column offsets of the blocks of `G− ⊕ G+`: `(u0−, u1−, u2−, u0+, u1+, u2+)`.
fn offsets(nm: usize, np: usize) -> [usize; 6] {
    [0, nm, 2 * nm, 3 * nm, 3 * nm + np, 3 * nm + 2 * np]
}

/// Rows over `G− ⊕ G+` expressing a separated condition: `codim Y` value rows,
/// `dim Y` second-derivative rows and `|E+|` first-derivative rows.
pub fn separated_to_general(g: &StarGraph, cond: &SeparatedCondition) -> Result<CMat, KreinError> {
    check_separated(g, cond)?;
    let (nm, np) = (g.side_len(Side::Minus), g.side_len(Side::Plus));
    let (am, bm) = (g.alphas(Side::Minus), g.betas(Side::Minus));
    let (ap, bp) = (g.alphas(Side::Plus), g.betas(Side::Plus));
    let o = offsets(nm, np);
    let n = nm + np;
    let y = y_matrix(cond, n);
    let y_perp = if cond.y_basis.is_empty() { CMat::identity(n, n) } else { null_space(&y.adjoint(), RANK_TOL) };
    let rows = y_perp.ncols() + y.ncols() + np;
    let mut c_mat = CMat::zeros(rows, 3 * n);
    let mut r = 0;
    // value block: wᴴ (u(0−), u(0+)) = 0 for w ∈ Y⊥
    for k in 0..y_perp.ncols() {
        for i in 0..nm {
            c_mat[(r, o[0] + i)] = y_perp[(i, k)].conj();
        }
        for i in 0..np {
            c_mat[(r, o[3] + i)] = y_perp[(nm + i, k)].conj();
        }
        r += 1;
    }
    // yᴴ (−α− u''(0−) − β−/2 u(0−), α+ u''(0+) + β+/2 u(0+)) = 0 for y ∈ Y
    for k in 0..y.ncols() {
        for i in 0..nm {
            let w = y[(i, k)].conj();
            c_mat[(r, o[2] + i)] = w * (-am[i]);
            c_mat[(r, o[0] + i)] = w * (-bm[i] / 2.0);
        }
        for i in 0..np {
            let w = y[(nm + i, k)].conj();
            c_mat[(r, o[5] + i)] = w * ap[i];
            c_mat[(r, o[3] + i)] = w * (bp[i] / 2.0);
        }
        r += 1;
    }
    // u'(0+) = U u'(0−)
    for i in 0..np {
        c_mat[(r, o[4] + i)] = c(1.0);
        for j in 0..nm {
            c_mat[(r, o[1] + j)] = -cond.u[(i, j)];
        }
        r += 1;
    }
    let rk = rank(&c_mat, RANK_TOL);
    if rk < rows {
        return Err(KreinError::RankDeficient { rank: rk, rows });
    }
    Ok(c_mat)
}

/// Rows `[L | −I]` over `G− ⊕ G+`.
pub fn general_constraints(g: &StarGraph, cond: &GeneralCondition) -> Result<CMat, KreinError> {
    let (bm, bp) = check_general(g, cond)?;
    let (a, b) = (bm.dim(), bp.dim());
    let mut c_mat = CMat::zeros(b, a + b);
    c_mat.view_mut((0, 0), (b, a)).copy_from(&cond.l);
    c_mat.view_mut((0, a), (b, b)).copy_from(&(-CMat::identity(b, b)));
    Ok(c_mat)
}

/// Linear constraints on the vertex trace pair for either kind of condition.
pub fn constraint_matrix(g: &StarGraph, cond: &VertexCondition) -> Result<CMat, KreinError> {
    match cond {
        VertexCondition::General(gc) => general_constraints(g, gc),
        VertexCondition::Separated(sc) => separated_to_general(g, sc),
    }
}

/// When the separated condition is the graph of a map `G− → G+`, returns that map.
pub fn separated_as_general(g: &StarGraph, cond: &SeparatedCondition) -> Option<GeneralCondition> {
    let c_mat = separated_to_general(g, cond).ok()?;
    let a = 3 * g.side_len(Side::Minus);
    let b = 3 * g.side_len(Side::Plus);
    if c_mat.nrows() != b {
        return None;
    }
    let cm = c_mat.columns(0, a).into_owned();
    let cp = c_mat.columns(a, b).into_owned();
    if condition_number(&cp) > MAX_CONDITION {
        return None;
    }
    let l = -cp.lu().solve(&cm)?;
    Some(GeneralCondition { l })
}

/// The mass flux `Φ = Σ α u''(0−) − Σ α u''(0+) + Σ β u(0−) − Σ β u(0+)` as a
/// row vector over `G− ⊕ G+`.
pub fn flux_functional(g: &StarGraph) -> CVec {
    let (nm, np) = (g.side_len(Side::Minus), g.side_len(Side::Plus));
    let o = offsets(nm, np);
    let mut phi = CVec::zeros(3 * (nm + np));
    for (i, e) in g.e_minus().iter().enumerate() {
        phi[o[2] + i] = c(e.alpha);
        phi[o[0] + i] = c(e.beta);
    }
    for (i, e) in g.e_plus().iter().enumerate() {
        phi[o[5] + i] = c(-e.alpha);
        phi[o[3] + i] = c(-e.beta);
    }
    phi
}

/// Norm of `Φ` restricted to the admissible traces, relative to `‖Φ‖`.
fn flux_residual(g: &StarGraph, cond: &VertexCondition) -> Result<f64, KreinError> {
    let c_mat = constraint_matrix(g, cond)?;
    let phi = flux_functional(g);
    let z = null_space(&c_mat, RANK_TOL);
    if z.ncols() == 0 {
        return Ok(0.0);
    }
    let restricted = z.transpose() * &phi;
    Ok(restricted.norm() / phi.norm().max(f64::MIN_POSITIVE))
}

/// Relative threshold below which the restricted flux counts as zero.
pub const MASS_TOL: f64 = 1e-10;

/// Whether `Φ` vanishes on every trace pair admitted by the condition.
///
/// A nonzero residual that disappears once all `β` are set to zero is reported
/// as `Conditional`: conservation then hinges on a relation among the
/// transport coefficients.
pub fn mass_flux_condition(g: &StarGraph, cond: &VertexCondition) -> Result<MassConservation, KreinError> {
    let r = flux_residual(g, cond)?;
    if r <= MASS_TOL {
        return Ok(MassConservation::Always);
    }
    let g0 = g.map_betas(|_| 0.0);
    let r0 = flux_residual(&g0, cond)?;
    if r0 <= MASS_TOL {
        Ok(MassConservation::Conditional(format!(
            "conserved only for a relation among the beta coefficients; flux residual {r:.3e} at the given values"
        )))
    } else {
        Ok(MassConservation::Never)
    }
}
