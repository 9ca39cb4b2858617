//! The Markov splitting `gl(N) = M ⊕ E`.
//!
//! `E(A) = diag(eA)` collects the column sums of `A` on the diagonal and
//! `M(A) = A − E(A)` has vanishing column sums. Both pieces are subalgebras (`E` is
//! abelian), so `R = ½(P_M − P_E)` defines a second Lie bracket
//! `[A, B]_R = [RA, B] + [A, RB]`, and with it the deformed Lie-Poisson bracket.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::matrix::{commutator, ensure_same, ensure_square, frobenius, Matrix};
use crate::Result;

/// Relative tolerance for the membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovDecomposition {
    /// Zero column sums.
    pub m_part: Matrix,
    /// Diagonal of column sums.
    pub e_part: Matrix,
}

impl MarkovDecomposition {
    pub fn reconstruct(&self) -> Matrix {
        &self.m_part + &self.e_part
    }
}

fn column_sums_diag(a: &Matrix) -> Matrix {
    let sums = nalgebra::DVector::from_iterator(a.ncols(), a.column_iter().map(|c| c.sum()));
    Matrix::from_diagonal(&sums)
}

pub fn split(a: &Matrix) -> MarkovDecomposition {
    let e_part = column_sums_diag(a);
    MarkovDecomposition { m_part: a - &e_part, e_part }
}

pub fn project_m(a: &Matrix) -> Matrix {
    split(a).m_part
}

pub fn project_e(a: &Matrix) -> Matrix {
    column_sums_diag(a)
}

/// `R(A) = ½ (M(A) − E(A))`.
pub fn r_map(a: &Matrix) -> Matrix {
    let d = split(a);
    (d.m_part - d.e_part) * 0.5
}

/// `[A, B]_R = [R A, B] + [A, R B]`.
pub fn r_bracket(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    ensure_same(a, b)?;
    Ok(commutator(&r_map(a), b) + commutator(a, &r_map(b)))
}

/// `tr(AB)`.
pub fn trace_form(a: &Matrix, b: &Matrix) -> Result<f64> {
    ensure_same(a, b)?;
    Ok(a.component_mul(&b.transpose()).sum())
}

/// Maps a point `α` to the trace-form gradient of some functional at `α`.
#[derive(Clone)]
pub struct GradientField {
    f: Arc<dyn Fn(&Matrix) -> Matrix + Send + Sync>,
    casimir: bool,
}

impl fmt::Debug for GradientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GradientField").field("casimir", &self.casimir).finish_non_exhaustive()
    }
}

impl GradientField {
    pub fn new(f: impl Fn(&Matrix) -> Matrix + Send + Sync + 'static) -> Self {
        GradientField { f: Arc::new(f), casimir: false }
    }

    /// A gradient field promised to satisfy `[∇γ(α), α] = 0`; see [`Self::casimir_defect`].
    pub fn casimir(f: impl Fn(&Matrix) -> Matrix + Send + Sync + 'static) -> Self {
        GradientField { f: Arc::new(f), casimir: true }
    }

    /// Central finite differences on the matrix entries of a scalar functional,
    /// step `1e-5 · (1 + ‖α‖)`. With respect to `tr(AB)` the gradient is the
    /// transpose of the entrywise partial derivatives.
    pub fn finite_difference(functional: impl Fn(&Matrix) -> f64 + Send + Sync + 'static) -> Self {
        GradientField::new(move |alpha: &Matrix| {
            let h = 1e-5 * (1.0 + frobenius(alpha));
            let mut grad = Matrix::zeros(alpha.ncols(), alpha.nrows());
            let mut probe = alpha.clone();
            for i in 0..alpha.nrows() {
                for j in 0..alpha.ncols() {
                    let orig = probe[(i, j)];
                    probe[(i, j)] = orig + h;
                    let up = functional(&probe);
                    probe[(i, j)] = orig - h;
                    let down = functional(&probe);
                    probe[(i, j)] = orig;
                    grad[(j, i)] = (up - down) / (2.0 * h);
                }
            }
            grad
        })
    }

    pub fn is_casimir(&self) -> bool {
        self.casimir
    }

    pub fn eval(&self, alpha: &Matrix) -> Matrix {
        (self.f)(alpha)
    }

    /// `‖[∇γ(α), α]‖` at a queried point.
    pub fn casimir_defect(&self, alpha: &Matrix) -> Result<f64> {
        casimir_condition_defect(alpha, &self.eval(alpha))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketVariant {
    /// `tr(α [∇γ, ∇η])`.
    Classical,
    /// `tr(α [P_M ∇γ, P_M ∇η])`.
    Deformed,
}

pub fn lie_poisson_bracket(
    alpha: &Matrix,
    gf: &GradientField,
    gg: &GradientField,
    variant: BracketVariant,
) -> Result<f64> {
    ensure_square(alpha)?;
    let (a, b) = (gf.eval(alpha), gg.eval(alpha));
    ensure_same(alpha, &a)?;
    ensure_same(alpha, &b)?;
    let inner = match variant {
        BracketVariant::Classical => commutator(&a, &b),
        BracketVariant::Deformed => commutator(&project_m(&a), &project_m(&b)),
    };
    trace_form(alpha, &inner)
}

/// The deformed bracket written through the R-bracket, `tr(α [∇γ, ∇η]_R)`.
/// Agrees with [`BracketVariant::Deformed`] because `E` is abelian.
pub fn r_bracket_form(alpha: &Matrix, gf: &GradientField, gg: &GradientField) -> Result<f64> {
    ensure_square(alpha)?;
    let inner = r_bracket(&gf.eval(alpha), &gg.eval(alpha))?;
    trace_form(alpha, &inner)
}

/// `P_{E⊥}([P_M ∇H(α), α])`; the projector zeroes the diagonal, so the diagonal of `α`
/// is constant along this field.
pub fn markov_orbit_field(alpha: &Matrix, grad_h: &GradientField) -> Result<Matrix> {
    ensure_square(alpha)?;
    let g = grad_h.eval(alpha);
    ensure_same(alpha, &g)?;
    let mut out = commutator(&project_m(&g), alpha);
    out.fill_diagonal(0.0);
    Ok(out)
}

/// Membership in `E⊥ = {Y : diag(Y) = 0}`.
pub fn is_in_e_perp(y: &Matrix) -> bool {
    if ensure_square(y).is_err() {
        return false;
    }
    let tol = MEMBERSHIP_TOL * frobenius(y);
    y.diagonal().iter().all(|d| d.abs() <= tol)
}

/// Membership in `M⊥ = {q ⊗ e}`: every row is constant.
pub fn is_in_m_perp(x: &Matrix) -> bool {
    if ensure_square(x).is_err() {
        return false;
    }
    let tol = MEMBERSHIP_TOL * frobenius(x);
    x.row_iter().all(|row| {
        let first = row[0];
        row.iter().all(|v| (v - first).abs() <= tol)
    })
}

/// `‖[grad, α]‖_F`.
pub fn casimir_condition_defect(alpha: &Matrix, grad: &Matrix) -> Result<f64> {
    ensure_same(alpha, grad)?;
    Ok(frobenius(&commutator(grad, alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::max_abs;
    use approx::assert_abs_diff_eq;
    use nalgebra::dvector;

    fn mat(n: usize, v: &[f64]) -> Matrix {
        Matrix::from_row_slice(n, n, v)
    }

    fn sample(n: usize, seed: u64) -> Matrix {
        // small LCG; these tests only need deterministic, non-special entries
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        Matrix::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn split_examples() {
        let a = mat(2, &[1.0, 2.0, 3.0, 4.0]);
        let d = split(&a);
        assert_eq!(d.e_part, Matrix::from_diagonal(&dvector![4.0, 6.0]));
        assert_eq!(d.m_part, mat(2, &[-3.0, 2.0, 3.0, -2.0]));
        assert_eq!(d.reconstruct(), a);

        let diag = Matrix::from_diagonal(&dvector![1.0, -2.0, 5.0]);
        let d = split(&diag);
        assert_eq!(d.e_part, diag);
        assert_eq!(d.m_part, Matrix::zeros(3, 3));

        let m = mat(2, &[-3.0, 2.0, 3.0, -2.0]);
        let d = split(&m);
        assert_eq!(d.e_part, Matrix::zeros(2, 2));
        assert_eq!(d.m_part, m);
    }

    #[test]
    fn r_map_examples() {
        let m = mat(2, &[-3.0, 2.0, 3.0, -2.0]);
        assert_eq!(r_map(&m), &m * 0.5);
        let e = Matrix::from_diagonal(&dvector![4.0, 6.0]);
        assert_eq!(r_map(&e), &e * -0.5);
        assert_eq!(r_map(&mat(2, &[1.0, 2.0, 3.0, 4.0])), mat(2, &[-3.5, 1.0, 1.5, -4.0]));
    }

    #[test]
    fn r_bracket_examples() {
        let e1 = Matrix::from_diagonal(&dvector![1.0, 2.0, 3.0]);
        let e2 = Matrix::from_diagonal(&dvector![-1.0, 0.5, 7.0]);
        assert_eq!(r_bracket(&e1, &e2).unwrap(), Matrix::zeros(3, 3));

        let a = project_m(&sample(4, 1));
        let b = project_m(&sample(4, 2));
        let direct = commutator(&a, &b);
        assert!(max_abs(&(r_bracket(&a, &b).unwrap() - direct)) < 1e-14);

        let (a, b) = (sample(5, 3), sample(5, 4));
        let ab = r_bracket(&a, &b).unwrap();
        let ba = r_bracket(&b, &a).unwrap();
        assert!(max_abs(&(ab + ba)) < 1e-14);
        assert!(r_bracket(&a, &sample(4, 1)).is_err());
    }

    #[test]
    fn trace_form_examples() {
        let i = Matrix::identity(4, 4);
        assert_eq!(trace_form(&i, &i).unwrap(), 4.0);
        let a = mat(2, &[0.0, 1.0, 0.0, 0.0]);
        let b = mat(2, &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(trace_form(&a, &b).unwrap(), 1.0);
        let (a, b, c) = (sample(4, 5), sample(4, 6), sample(4, 7));
        let lhs = trace_form(&commutator(&c, &a), &b).unwrap();
        let rhs = trace_form(&a, &commutator(&c, &b)).unwrap();
        assert_abs_diff_eq!(lhs, -rhs, epsilon = 1e-13);
        assert_abs_diff_eq!(trace_form(&a, &b).unwrap(), (&a * &b).trace(), epsilon = 1e-14);
    }

    #[test]
    fn lie_poisson_examples() {
        let alpha = sample(4, 8);
        let g = GradientField::new(|a: &Matrix| a * a);
        for variant in [BracketVariant::Classical, BracketVariant::Deformed] {
            assert_eq!(lie_poisson_bracket(&alpha, &g, &g, variant).unwrap(), 0.0);
        }

        let casimir = GradientField::casimir(|a: &Matrix| a.clone());
        let eta = GradientField::new(|a: &Matrix| a.transpose() * 0.3 + Matrix::identity(4, 4));
        let v = lie_poisson_bracket(&alpha, &casimir, &eta, BracketVariant::Classical).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-14);

        let (ca, cb) = (sample(4, 9), sample(4, 10));
        let (ga, gb) = (ca.clone(), cb.clone());
        let fa = GradientField::new(move |_: &Matrix| ga.clone());
        let fb = GradientField::new(move |_: &Matrix| gb.clone());
        let v = lie_poisson_bracket(&alpha, &fa, &fb, BracketVariant::Classical).unwrap();
        assert_abs_diff_eq!(v, (&alpha * commutator(&ca, &cb)).trace(), epsilon = 1e-13);
    }

    #[test]
    fn deformed_bracket_equals_r_bracket_form() {
        let alpha = sample(5, 11);
        let fa = GradientField::new(|a: &Matrix| a * a * a);
        let fb = GradientField::new(|a: &Matrix| a.transpose() + a * 2.0);
        let lhs = r_bracket_form(&alpha, &fa, &fb).unwrap();
        let rhs = lie_poisson_bracket(&alpha, &fa, &fb, BracketVariant::Deformed).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn finite_difference_gradient_of_linear_and_quadratic() {
        let c = sample(3, 12);
        let c2 = c.clone();
        let g = GradientField::finite_difference(move |a: &Matrix| (&c2 * a).trace());
        let alpha = sample(3, 13);
        assert!(max_abs(&(g.eval(&alpha) - &c)) < 1e-8);

        let g = GradientField::finite_difference(|a: &Matrix| 0.5 * (a * a).trace());
        assert!(max_abs(&(g.eval(&alpha) - &alpha)) < 1e-8);
        assert!(!g.is_casimir());
    }

    #[test]
    fn orbit_field_examples() {
        let alpha = sample(4, 14);
        let h = GradientField::new(|a: &Matrix| a * a);
        let f = markov_orbit_field(&alpha, &h).unwrap();
        assert!(f.diagonal().iter().all(|&d| d == 0.0));

        let diag = Matrix::from_diagonal(&dvector![1.0, 2.0, 3.0]);
        let id = GradientField::new(|a: &Matrix| a.clone());
        assert_eq!(markov_orbit_field(&diag, &id).unwrap(), Matrix::zeros(3, 3));

        let swap = mat(2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(split(&swap).e_part, Matrix::identity(2, 2));
        assert_eq!(markov_orbit_field(&swap, &id).unwrap(), Matrix::zeros(2, 2));
    }

    #[test]
    fn perp_membership_examples() {
        assert!(is_in_e_perp(&mat(2, &[0.0, 5.0, 7.0, 0.0])));
        assert!(!is_in_e_perp(&mat(2, &[1.0, 5.0, 7.0, 0.0])));
        let x = mat(2, &[2.0, 2.0, -1.0, -1.0]);
        assert!(is_in_m_perp(&x));
        for seed in 0..5 {
            let m = project_m(&sample(2, seed));
            assert_abs_diff_eq!(trace_form(&m, &x).unwrap(), 0.0, epsilon = 1e-14);
        }
        assert!(!is_in_m_perp(&Matrix::identity(3, 3)));
        assert!(!is_in_m_perp(&Matrix::zeros(2, 3)));
    }

    #[test]
    fn casimir_condition_examples() {
        let alpha = sample(4, 15);
        let cube = &alpha * &alpha * &alpha;
        assert!(casimir_condition_defect(&alpha, &cube).unwrap() < 1e-13);
        assert_eq!(casimir_condition_defect(&alpha, &Matrix::identity(4, 4)).unwrap(), 0.0);
        let g = sample(4, 16);
        let expected = frobenius(&(&g * &alpha - &alpha * &g));
        let got = casimir_condition_defect(&alpha, &g).unwrap();
        assert!(got > 0.0);
        assert_abs_diff_eq!(got, expected, epsilon = 1e-15);

        let casimir = GradientField::casimir(|a: &Matrix| a * a);
        assert!(casimir.is_casimir());
        assert!(casimir.casimir_defect(&alpha).unwrap() < 1e-13);
    }
}
