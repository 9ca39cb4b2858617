//! The Riemann-type element `α = λ³I + λ²U + λV + Z` and the audit of the hand-derived
//! generator formulas that accompany it.

use crate::calogero::QuasiRep;
use crate::loopalg::{loop_bracket, LoopElement};
use crate::markov::project_m;
use crate::matrix::{commutator, ensure_same, frobenius, is_diagonal, Matrix};
use crate::{Error, Result};

use super::{aks_generator, CasimirSpec};

/// Initial data for the Riemann-type flow: node samples of `u` and `v` as diagonal
/// matrices, together with the quasi-representation that supplies `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannState {
    u: Matrix,
    v: Matrix,
    rep: QuasiRep,
}

impl RiemannState {
    pub fn new(rep: QuasiRep, u: Matrix, v: Matrix) -> Result<Self> {
        let n = ensure_same(&u, &v)?;
        if n != rep.len() {
            return Err(Error::DimensionMismatch { expected: rep.len(), found: n });
        }
        if !is_diagonal(&u) || !is_diagonal(&v) {
            return Err(Error::InvalidArgument("U and V must be diagonal".into()));
        }
        Ok(RiemannState { u, v, rep })
    }

    /// Samples `u` and `v` on the mesh of `rep`.
    pub fn from_profiles(rep: QuasiRep, u: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64) -> Self {
        let um = rep.mesh().multiplication_matrix(u);
        let vm = rep.mesh().multiplication_matrix(v);
        RiemannState { u: um, v: vm, rep }
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    pub fn rep(&self) -> &QuasiRep {
        &self.rep
    }
}

/// `λ³I + λ²U + λV + Z`.
pub fn riemann_alpha(state: &RiemannState) -> LoopElement {
    let n = state.rep.len();
    LoopElement::from_terms(
        n,
        [
            (3, Matrix::identity(n, n)),
            (2, state.u.clone()),
            (1, state.v.clone()),
            (0, state.rep.z().clone()),
        ],
    )
    .expect("sizes checked at construction")
}

/// The generator written down for the Riemann-type system:
/// `λ³I + (3/2)λ²U + λ((3/2)Z − (3/8)U²) − U³/16 − (3/8)(ZU + UZ)`.
pub fn paper_generator_b(u: &Matrix, z: &Matrix) -> Result<LoopElement> {
    let n = ensure_same(u, z)?;
    let u2 = u * u;
    let u3 = &u2 * u;
    let zu = z * u + u * z;
    LoopElement::from_terms(
        n,
        [
            (3, Matrix::identity(n, n)),
            (2, u * 1.5),
            (1, z * 1.5 - &u2 * 0.375),
            (0, &u3 * (-1.0 / 16.0) - &zu * 0.375),
        ],
    )
}

/// The printed form of `P₊∇γ₂⁽⁴⁾` at the Riemann element:
/// `λ⁴I + 2λ³U + λ²(2V + U²) + λ(2Z + UV + VU) + M(ZU + UZ)`.
pub fn printed_generator(u: &Matrix, v: &Matrix, z: &Matrix) -> Result<LoopElement> {
    let n = ensure_same(u, v)?;
    ensure_same(u, z)?;
    LoopElement::from_terms(
        n,
        [
            (4, Matrix::identity(n, n)),
            (3, u * 2.0),
            (2, v * 2.0 + u * u),
            (1, z * 2.0 + u * v + v * u),
            (0, project_m(&(z * u + u * z))),
        ],
    )
}

/// Residual norms of the printed generator formulas, all in the Frobenius norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaperResiduals {
    /// (a) `‖λ³-coefficient of [B, α]‖`; the ansatz needs it to vanish.
    pub lambda3_coefficient: f64,
    /// Closed form of (a): `(3/2)‖[U,V] + [Z,U]‖`.
    pub lambda3_closed_form: f64,
    /// (b) `‖λ²-coefficient of [B, α] − (−2[Z,V])‖`.
    pub du_mismatch: f64,
    /// (c) `‖λ¹-coefficient of [B, α] − (−[Z, VU + UZ] + [UZ + ZU, V])‖`.
    pub dv_mismatch: f64,
    /// (d) `‖P₊∇γ₂⁽⁴⁾(α) − printed generator‖`.
    pub generator_mismatch: f64,
    /// `‖M(V²)‖`, the expected value of (d).
    pub m_v_squared: f64,
    /// `‖α‖ · ‖B‖`, the size of the bracket terms.
    pub scale: f64,
}

/// Audits the printed generator formulas at `α = λ³I + λ²U + λV + Z`.
///
/// `U` and `V` may be arbitrary matrices here: along a flow the coefficients leave the
/// diagonal.
pub fn paper_residuals(u: &Matrix, v: &Matrix, z: &Matrix) -> Result<PaperResiduals> {
    let n = ensure_same(u, v)?;
    ensure_same(u, z)?;
    let alpha = LoopElement::from_terms(
        n,
        [(3, Matrix::identity(n, n)), (2, u.clone()), (1, v.clone()), (0, z.clone())],
    )?;
    let b = paper_generator_b(u, z)?;
    let bracket = loop_bracket(&b, &alpha)?;

    let lambda3_coefficient = frobenius(&bracket.coeff_or_zero(3));
    let lambda3_closed_form = 1.5 * frobenius(&(commutator(u, v) + commutator(z, u)));
    let du_claim = commutator(z, v) * -2.0;
    let du_mismatch = frobenius(&(bracket.coeff_or_zero(2) - du_claim));
    let dv_claim = -commutator(z, &(v * u + u * z)) + commutator(&(u * z + z * u), v);
    let dv_mismatch = frobenius(&(bracket.coeff_or_zero(1) - dv_claim));

    let generator = aks_generator(&alpha, CasimirSpec::new(2, 4))?;
    let generator_mismatch = generator.sub(&printed_generator(u, v, z)?)?.norm();
    let m_v_squared = frobenius(&project_m(&(v * v)));

    Ok(PaperResiduals {
        lambda3_coefficient,
        lambda3_closed_form,
        du_mismatch,
        dv_mismatch,
        generator_mismatch,
        m_v_squared,
        scale: alpha.norm() * b.norm(),
    })
}

pub fn paper_rhs_residuals(state: &RiemannState) -> Result<PaperResiduals> {
    paper_residuals(&state.u, &state.v, state.rep.z())
}
