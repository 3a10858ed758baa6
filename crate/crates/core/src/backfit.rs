//! Penalized backfitting for the two-component additive model.
//!
//! The estimating equations are the normal equations of
//!
//! ```text
//! L(b1, b2) = |y - X1 b1 - X2 b2|² + λ1 b1'Q b1 + λ2 b2'Q b2
//! ```
//!
//! and a backfitting stage is one block Gauss–Seidel sweep
//! `b1 = Λ1⁻¹ X1'(y - X2 b2)`, `b2 = Λ2⁻¹ X2'(y - X1 b1)` with
//! `Λj = Xj'Xj + λj Q`. Sweeps run in Gram form: `X1'X2` is accumulated once
//! (a `q × q` matrix) and every stage is two banded solves plus two `q × q`
//! products. Smoother matrices `Xj Λj⁻¹ Xj'` are never formed.
//!
//! Because the basis is a partition of unity and `Q·1 = 0`, the shift
//! `(b1, b2) → (b1 + c·1, b2 − c·1)` leaves `L` unchanged: the stacked
//! system has the one-dimensional kernel spanned by `(1, −1)` for every
//! choice of smoothing parameters. Every sweep conserves `1'X2 b2`, so the
//! backfitting limit is the normal-equation solution whose second component
//! has the same data sum as the starting value. [`joint_solve`] solves for
//! exactly that point.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bandmat::{gram_banded, penalized_gram, symmetric_eigenvalues, BandCholesky, BandedMatrix};
use crate::basis::{design_matrix, DesignMatrix, SplineConfig};
use crate::error::{Error, Result};
use crate::penalty::{penalty_matrix, PenaltyMatrix};

/// Which additive component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    First,
    Second,
}

impl Component {
    pub fn index(self) -> usize {
        match self {
            Component::First => 0,
            Component::Second => 1,
        }
    }
}

/// `K = round(2 n^{2/5})`.
pub fn default_num_intervals(n: usize) -> usize {
    ((2.0 * (n as f64).powf(0.4)).round() as usize).max(1)
}

/// `λ = 2 n^{2/5} K^{-1/2}`.
pub fn default_lambda(n: usize, num_intervals: usize) -> f64 {
    2.0 * (n as f64).powf(0.4) / (num_intervals as f64).sqrt()
}

#[derive(Debug, Clone)]
pub struct AdditiveDesign {
    y: Vec<f64>,
    x1: DesignMatrix,
    x2: DesignMatrix,
    lambda1: f64,
    lambda2: f64,
    penalty: PenaltyMatrix,
}

impl AdditiveDesign {
    pub fn new(
        y: Vec<f64>,
        x1: DesignMatrix,
        x2: DesignMatrix,
        lambda1: f64,
        lambda2: f64,
        penalty: PenaltyMatrix,
    ) -> Result<Self> {
        for (d, name) in [(&x1, "x1"), (&x2, "x2")] {
            if d.rows() != y.len() {
                return Err(Error::SizeMismatch {
                    expected: y.len(),
                    found: d.rows(),
                });
            }
            if d.cols() != penalty.size() {
                return Err(Error::InvalidConfig(format!(
                    "{name} has {} basis functions but the penalty is {}×{}",
                    d.cols(),
                    penalty.size(),
                    penalty.size()
                )));
            }
        }
        for lam in [lambda1, lambda2] {
            if !(lam >= 0.0) || !lam.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "smoothing parameters must be finite and non-negative, got {lam}"
                )));
            }
        }
        Ok(Self {
            y,
            x1,
            x2,
            lambda1,
            lambda2,
            penalty,
        })
    }

    /// Builds both designs on one basis and an order-`diff_order` penalty.
    pub fn from_points(
        cfg: &SplineConfig,
        y: Vec<f64>,
        x1: &[f64],
        x2: &[f64],
        lambda1: f64,
        lambda2: f64,
        diff_order: usize,
    ) -> Result<Self> {
        let penalty = penalty_matrix(diff_order, cfg.num_basis())?;
        Self::new(
            y,
            design_matrix(cfg, x1)?,
            design_matrix(cfg, x2)?,
            lambda1,
            lambda2,
            penalty,
        )
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn num_basis(&self) -> usize {
        self.penalty.size()
    }

    pub fn x1(&self) -> &DesignMatrix {
        &self.x1
    }

    pub fn x2(&self) -> &DesignMatrix {
        &self.x2
    }

    pub fn design(&self, j: Component) -> &DesignMatrix {
        match j {
            Component::First => &self.x1,
            Component::Second => &self.x2,
        }
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn lambda(&self, j: Component) -> f64 {
        match j {
            Component::First => self.lambda1,
            Component::Second => self.lambda2,
        }
    }

    pub fn penalty(&self) -> &PenaltyMatrix {
        &self.penalty
    }

    pub fn config(&self) -> &SplineConfig {
        self.x1.config()
    }

    /// Same covariates and tuning with a different response.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        Self::new(
            y,
            self.x1.clone(),
            self.x2.clone(),
            self.lambda1,
            self.lambda2,
            self.penalty.clone(),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackfitResult {
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub stages: usize,
    pub converged: bool,
    /// Sup-norm of the normal-equation residual at exit.
    pub residual_norm: f64,
    /// Sup-norm change of the stacked coefficients at each stage.
    pub change_trace: Vec<f64>,
    /// Coefficients after each stage, when requested.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub history: Option<Vec<(Vec<f64>, Vec<f64>)>>,
}

impl BackfitResult {
    pub fn coefficients(&self, j: Component) -> &[f64] {
        match j {
            Component::First => &self.b1,
            Component::Second => &self.b2,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BackfitOptions {
    pub tol: f64,
    pub max_stages: usize,
    pub keep_history: bool,
}

impl Default for BackfitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_stages: 100,
            keep_history: false,
        }
    }
}

/// Factorized per-component systems plus the cross Gram, reused by every
/// stage and by the smoother-weight extraction.
#[derive(Debug, Clone)]
pub struct Backfitter {
    lambda1: BandedMatrix,
    lambda2: BandedMatrix,
    chol1: BandCholesky,
    chol2: BandCholesky,
    /// `X1' X2`.
    cross: DMatrix<f64>,
    r1: Vec<f64>,
    r2: Vec<f64>,
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn dmat_mul(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

fn dmat_tr_mul(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m.tr_mul(&DVector::from_column_slice(v))).as_slice().to_vec()
}

impl Backfitter {
    pub fn new(design: &AdditiveDesign) -> Result<Self> {
        let lambda1 = penalized_gram(&gram_banded(&design.x1), design.lambda1, &design.penalty)?;
        let lambda2 = penalized_gram(&gram_banded(&design.x2), design.lambda2, &design.penalty)?;
        let chol1 = lambda1.cholesky()?;
        let chol2 = lambda2.cholesky()?;
        Ok(Self {
            chol1,
            chol2,
            lambda1,
            lambda2,
            cross: design.x1.cross_gram(&design.x2),
            r1: design.x1.tr_mul_vec(&design.y),
            r2: design.x2.tr_mul_vec(&design.y),
        })
    }

    pub fn num_basis(&self) -> usize {
        self.r1.len()
    }

    pub fn cross_gram(&self) -> &DMatrix<f64> {
        &self.cross
    }

    pub fn penalized_gram(&self, j: Component) -> &BandedMatrix {
        match j {
            Component::First => &self.lambda1,
            Component::Second => &self.lambda2,
        }
    }

    pub fn factor(&self, j: Component) -> &BandCholesky {
        match j {
            Component::First => &self.chol1,
            Component::Second => &self.chol2,
        }
    }

    /// `(X1'y, X2'y)`.
    pub fn rhs(&self) -> (&[f64], &[f64]) {
        (&self.r1, &self.r2)
    }

    /// Replaces `(X1'y, X2'y)`; the factorizations are reused.
    pub fn with_rhs(&self, r1: Vec<f64>, r2: Vec<f64>) -> Self {
        Self {
            r1,
            r2,
            ..self.clone()
        }
    }

    pub fn stage(&self, b2_prev: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let c12b2 = dmat_mul(&self.cross, b2_prev);
        let mut b1: Vec<f64> = self.r1.iter().zip(&c12b2).map(|(r, c)| r - c).collect();
        self.chol1.solve_in_place(&mut b1);
        let c21b1 = dmat_tr_mul(&self.cross, &b1);
        let mut b2: Vec<f64> = self.r2.iter().zip(&c21b1).map(|(r, c)| r - c).collect();
        self.chol2.solve_in_place(&mut b2);
        (b1, b2)
    }

    /// `max(|Λ1 b1 + X1'X2 b2 − X1'y|∞, |X2'X1 b1 + Λ2 b2 − X2'y|∞)`.
    pub fn residual_norm(&self, b1: &[f64], b2: &[f64]) -> f64 {
        let first: Vec<f64> = self
            .lambda1
            .mul_vec(b1)
            .iter()
            .zip(dmat_mul(&self.cross, b2))
            .zip(&self.r1)
            .map(|((a, c), r)| a + c - r)
            .collect();
        let second: Vec<f64> = self
            .lambda2
            .mul_vec(b2)
            .iter()
            .zip(dmat_tr_mul(&self.cross, b1))
            .zip(&self.r2)
            .map(|((a, c), r)| a + c - r)
            .collect();
        sup_norm(&first).max(sup_norm(&second))
    }

    /// Exactly `stages` sweeps from `b2_init`.
    pub fn run_stages(&self, b2_init: &[f64], stages: usize) -> (Vec<f64>, Vec<f64>) {
        let mut b1 = vec![0.0; self.num_basis()];
        let mut b2 = b2_init.to_vec();
        for _ in 0..stages {
            (b1, b2) = self.stage(&b2);
        }
        (b1, b2)
    }

    pub fn run(&self, b2_init: &[f64], opts: &BackfitOptions) -> Result<BackfitResult> {
        let q = self.num_basis();
        if b2_init.len() != q {
            return Err(Error::SizeMismatch {
                expected: q,
                found: b2_init.len(),
            });
        }
        let mut b1 = vec![0.0; q];
        let mut b2 = b2_init.to_vec();
        let mut trace = Vec::new();
        let mut history = opts.keep_history.then(Vec::new);
        let mut residual = f64::INFINITY;
        let mut converged = false;
        for _ in 0..opts.max_stages {
            let (n1, n2) = self.stage(&b2);
            let change = sup_diff(&n1, &b1).max(sup_diff(&n2, &b2));
            b1 = n1;
            b2 = n2;
            trace.push(change);
            if let Some(h) = history.as_mut() {
                h.push((b1.clone(), b2.clone()));
            }
            if change <= opts.tol {
                residual = self.residual_norm(&b1, &b2);
                if residual <= opts.tol {
                    converged = true;
                    break;
                }
            }
        }
        if !converged {
            residual = self.residual_norm(&b1, &b2);
        }
        Ok(BackfitResult {
            b1,
            b2,
            stages: trace.len(),
            converged,
            residual_norm: residual,
            change_trace: trace,
            history,
        })
    }

    /// Coefficients `(s1, s2)` with `g1'b1⁽ˡ⁾ + g2'b2⁽ˡ⁾ = s1'X1'y + s2'X2'y`
    /// after `stages` sweeps from `b2 = 0`. Reverse-mode pass over the sweeps.
    pub fn stage_functional(&self, g1: &[f64], g2: &[f64], stages: usize) -> (Vec<f64>, Vec<f64>) {
        let q = self.num_basis();
        let mut s1 = vec![0.0; q];
        let mut s2 = vec![0.0; q];
        if stages == 0 {
            return (s1, s2);
        }
        let mut adj1 = g1.to_vec();
        let mut adj2 = g2.to_vec();
        for _ in 0..stages {
            // b2 = Λ2⁻¹ (r2 − X2'X1 b1)
            let t2 = self.chol2.solve(&adj2);
            s2.iter_mut().zip(&t2).for_each(|(s, t)| *s += t);
            let back = dmat_mul(&self.cross, &t2);
            adj1.iter_mut().zip(&back).for_each(|(a, b)| *a -= b);
            // b1 = Λ1⁻¹ (r1 − X1'X2 b2_prev)
            let t1 = self.chol1.solve(&adj1);
            s1.iter_mut().zip(&t1).for_each(|(s, t)| *s += t);
            adj2 = dmat_tr_mul(&self.cross, &t1).into_iter().map(|v| -v).collect();
            adj1.fill(0.0);
        }
        (s1, s2)
    }
}

/// `L(b1, b2)`.
pub fn criterion(design: &AdditiveDesign, b1: &[f64], b2: &[f64]) -> f64 {
    let f1 = design.x1.mul_vec(b1);
    let f2 = design.x2.mul_vec(b2);
    let rss: f64 = design
        .y
        .iter()
        .zip(f1.iter().zip(&f2))
        .map(|(y, (a, b))| (y - a - b).powi(2))
        .sum();
    rss + design.lambda1 * design.penalty.quadratic_form(b1)
        + design.lambda2 * design.penalty.quadratic_form(b2)
}

/// One sweep from `b2_prev`.
pub fn backfit_stage(design: &AdditiveDesign, b2_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if b2_prev.len() != design.num_basis() {
        return Err(Error::SizeMismatch {
            expected: design.num_basis(),
            found: b2_prev.len(),
        });
    }
    Ok(Backfitter::new(design)?.stage(b2_prev))
}

/// Sweeps until the stacked sup-norm change and the normal-equation residual
/// are both `<= tol`, or `max_stages` is reached (then `converged == false`).
pub fn backfit(design: &AdditiveDesign, b2_init: &[f64], tol: f64, max_stages: usize) -> Result<BackfitResult> {
    Backfitter::new(design)?.run(
        b2_init,
        &BackfitOptions {
            tol,
            max_stages,
            keep_history: false,
        },
    )
}

/// The stacked normal equations `H b = (X1'y; X2'y)` with
/// `H = [[Λ1, X1'X2], [X2'X1, Λ2]]`.
pub fn stacked_system(design: &AdditiveDesign) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let fitter = Backfitter::new(design)?;
    Ok(stacked_from(&fitter))
}

fn stacked_from(fitter: &Backfitter) -> (DMatrix<f64>, DVector<f64>) {
    let q = fitter.num_basis();
    let mut h = DMatrix::zeros(2 * q, 2 * q);
    h.view_mut((0, 0), (q, q)).copy_from(&fitter.lambda1.to_dense());
    h.view_mut((q, q), (q, q)).copy_from(&fitter.lambda2.to_dense());
    h.view_mut((0, q), (q, q)).copy_from(&fitter.cross);
    h.view_mut((q, 0), (q, q)).copy_from(&fitter.cross.transpose());
    let rhs = DVector::from_iterator(2 * q, fitter.r1.iter().chain(&fitter.r2).copied());
    (h, rhs)
}

/// Dense Cholesky with a relative pivot floor; `None` when the matrix is
/// not numerically positive definite.
pub(crate) fn dense_cholesky(m: &DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let scale = m.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let chol = nalgebra::Cholesky::new(m.clone())?;
    let floor = 1e-11 * scale;
    let l = chol.l_dirty();
    if (0..m.nrows()).any(|i| !(l[(i, i)] * l[(i, i)] > floor)) {
        return None;
    }
    Some(chol)
}

/// `H + s a a'` with `a = (0; X2'1)` and `s` scaled to the mean diagonal
/// of `H`. Its inverse applied to `rhs + s a c` gives the normal-equation
/// solution with `a'b = c`, where `c = 1'X2 b2_init`.
pub(crate) fn constrained_matrix(fitter: &Backfitter, design: &AdditiveDesign) -> (DMatrix<f64>, DVector<f64>, f64) {
    let q = fitter.num_basis();
    let (mut h, _) = stacked_from(fitter);
    let mut a = DVector::zeros(2 * q);
    a.rows_mut(q, q).copy_from_slice(&design.x2.column_sums());
    let s = h.diagonal().mean() / a.norm_squared();
    h += s * &a * a.transpose();
    (h, a, s)
}

fn constrained_system(fitter: &Backfitter, design: &AdditiveDesign, b2_init: &[f64]) -> (DMatrix<f64>, DVector<f64>) {
    let q = fitter.num_basis();
    let (h, a, s) = constrained_matrix(fitter, design);
    let target: f64 = a.rows(q, q).iter().zip(b2_init).map(|(x, b)| x * b).sum();
    let (_, rhs) = stacked_from(fitter);
    (h, rhs + s * target * a)
}

fn split(b: &DVector<f64>, q: usize) -> (Vec<f64>, Vec<f64>) {
    (b.rows(0, q).iter().copied().collect(), b.rows(q, q).iter().copied().collect())
}

/// Dense solution of the normal equations at the backfitting limit from
/// `b2_init = 0`: the stacked system plus the conserved quantity
/// `1'X2 b2 = 0`.
pub fn joint_solve(design: &AdditiveDesign) -> Result<(Vec<f64>, Vec<f64>)> {
    joint_solve_from(design, &vec![0.0; design.num_basis()])
}

/// As [`joint_solve`], for the limit reached from an arbitrary `b2_init`.
pub fn joint_solve_from(design: &AdditiveDesign, b2_init: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let fitter = Backfitter::new(design)?;
    let (h, rhs) = constrained_system(&fitter, design, b2_init);
    let chol = dense_cholesky(&h).ok_or(Error::SingularSystem)?;
    Ok(split(&chol.solve(&rhs), fitter.num_basis()))
}

/// Plain dense Cholesky of the stacked system. The concurvity direction
/// makes this report [`Error::SingularSystem`] for every admissible design.
pub fn joint_solve_unconstrained(design: &AdditiveDesign) -> Result<(Vec<f64>, Vec<f64>)> {
    let (h, rhs) = stacked_system(design)?;
    let chol = dense_cholesky(&h).ok_or(Error::SingularSystem)?;
    Ok(split(&chol.solve(&rhs), design.num_basis()))
}

/// Coefficients of the univariate penalized fit `Λ⁻¹ X'y`.
pub fn univariate_fit(x: &DesignMatrix, y: &[f64], lambda: f64, penalty: &PenaltyMatrix) -> Result<Vec<f64>> {
    let lam = penalized_gram(&gram_banded(x), lambda, penalty)?;
    Ok(lam.cholesky()?.solve(&x.tr_mul_vec(y)))
}

/// `B(x)'Λ⁻¹X'y`.
pub fn univariate_penalized(
    x: &DesignMatrix,
    y: &[f64],
    lambda: f64,
    penalty: &PenaltyMatrix,
    at: f64,
) -> Result<f64> {
    let coef = univariate_fit(x, y, lambda, penalty)?;
    evaluate(x.config(), &coef, at)
}

/// `B(x)'b`.
pub fn evaluate(cfg: &SplineConfig, coef: &[f64], x: f64) -> Result<f64> {
    let mut local = vec![0.0; cfg.degree() + 1];
    let first = cfg.eval_local(x, &mut local)?;
    Ok(local.iter().zip(&coef[first..]).map(|(b, c)| b * c).sum())
}

/// Stage-one estimates from `b2 = 0`: the marginal fit on `x1`, then the
/// marginal fit of its residual on `x2`.
pub fn one_stage_pair(design: &AdditiveDesign, x1: f64, x2: f64) -> Result<(f64, f64)> {
    let (b1, b2) = one_stage_coefficients(design)?;
    Ok((evaluate(design.config(), &b1, x1)?, evaluate(design.config(), &b2, x2)?))
}

pub fn one_stage_coefficients(design: &AdditiveDesign) -> Result<(Vec<f64>, Vec<f64>)> {
    let b1 = univariate_fit(&design.x1, &design.y, design.lambda1, &design.penalty)?;
    let fitted = design.x1.mul_vec(&b1);
    let resid: Vec<f64> = design.y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let b2 = univariate_fit(&design.x2, &resid, design.lambda2, &design.penalty)?;
    Ok((b1, b2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub f1: f64,
    pub f2: f64,
    pub yhat: f64,
}

pub fn predict(result: &BackfitResult, cfg: &SplineConfig, x1: f64, x2: f64) -> Result<Prediction> {
    let f1 = evaluate(cfg, &result.b1, x1)?;
    let f2 = evaluate(cfg, &result.b2, x2)?;
    Ok(Prediction { f1, f2, yhat: f1 + f2 })
}

/// Mean of `f̂_j` over the observed covariates.
pub fn component_sample_mean(result: &BackfitResult, design: &AdditiveDesign, j: Component) -> f64 {
    let fitted = design.design(j).mul_vec(result.coefficients(j));
    fitted.iter().sum::<f64>() / fitted.len() as f64
}

/// `f̂_j(x) − n⁻¹ Σ_i f̂_j(x_ij)`.
pub fn center_component(result: &BackfitResult, design: &AdditiveDesign, j: Component, x: f64) -> Result<f64> {
    let value = evaluate(design.config(), result.coefficients(j), x)?;
    Ok(value - component_sample_mean(result, design, j))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HessianReport {
    /// Whether `H = H1 + H2` passes a dense Cholesky with a relative pivot floor.
    pub is_pd: bool,
    pub min_eig: f64,
    pub max_eig: f64,
    /// `|H z0|∞ / |H|∞` for the concurvity direction `z0 = (1, −1)`.
    pub concurvity_residual: f64,
    /// Positive definiteness of `H` restricted to the complement of `z0`.
    pub identifiable_is_pd: bool,
    pub identifiable_min_eig: f64,
}

/// `H1 = [[X1'X1, X1'X2], [X2'X1, X2'X2]]` and `H2 = diag(λ1 Q, λ2 Q)`;
/// `H1 + H2` is half the Hessian of `L`.
pub fn hessian_parts(design: &AdditiveDesign) -> (DMatrix<f64>, DMatrix<f64>) {
    let q = design.num_basis();
    let mut h1 = DMatrix::zeros(2 * q, 2 * q);
    let cross = design.x1.cross_gram(&design.x2);
    h1.view_mut((0, 0), (q, q)).copy_from(&gram_banded(&design.x1).to_dense());
    h1.view_mut((q, q), (q, q)).copy_from(&gram_banded(&design.x2).to_dense());
    h1.view_mut((0, q), (q, q)).copy_from(&cross);
    h1.view_mut((q, 0), (q, q)).copy_from(&cross.transpose());
    let mut h2 = DMatrix::zeros(2 * q, 2 * q);
    let qd = design.penalty.to_dense();
    h2.view_mut((0, 0), (q, q)).copy_from(&(design.lambda1 * &qd));
    h2.view_mut((q, q), (q, q)).copy_from(&(design.lambda2 * &qd));
    (h1, h2)
}

/// The unit vector along `(1, −1)`.
pub fn concurvity_direction(q: usize) -> DVector<f64> {
    let s = 1.0 / ((2 * q) as f64).sqrt();
    DVector::from_iterator(2 * q, (0..2 * q).map(|i| if i < q { s } else { -s }))
}

/// Orthonormal basis of the complement of `unit` (a Householder reflector
/// mapping `e1` to `unit`, minus its first column).
fn complement_basis(unit: &DVector<f64>) -> DMatrix<f64> {
    let n = unit.len();
    let mut u = unit.clone();
    u[0] -= 1.0;
    let norm2 = u.norm_squared();
    let mut p = DMatrix::identity(n, n);
    if norm2 > 0.0 {
        p -= (2.0 / norm2) * &u * u.transpose();
    }
    p.columns(1, n - 1).into_owned()
}

pub fn hessian_check(design: &AdditiveDesign) -> HessianReport {
    let (h1, h2) = hessian_parts(design);
    let h = h1 + h2;
    let q = design.num_basis();
    let ev = symmetric_eigenvalues(&h);
    let z0 = concurvity_direction(q);
    let scale = h.amax().max(f64::MIN_POSITIVE);
    let concurvity_residual = (&h * &z0).amax() / scale;
    let u = complement_basis(&z0);
    let restricted = u.transpose() * &h * &u;
    let rev = symmetric_eigenvalues(&restricted);
    HessianReport {
        is_pd: dense_cholesky(&h).is_some(),
        min_eig: ev[0],
        max_eig: *ev.last().unwrap(),
        concurvity_residual,
        identifiable_is_pd: dense_cholesky(&restricted).is_some(),
        identifiable_min_eig: rev[0],
    }
}
