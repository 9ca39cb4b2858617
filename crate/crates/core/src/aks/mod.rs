//! Casimir functionals of the loop algebra and the Lax flows they generate.
//!
//! For `α` of degree `d` put `A = α λ^{-d}`. The functionals
//! `γ_n^{(k)}(α) = ⟨A^{n+1}, λ^{k+d}⟩ / (n+1)` have gradients `Aⁿ λᵏ`, which commute
//! with `α`. Projecting a gradient onto `g̃₊` gives the AKS generator `G`, and
//! `dα/dt = [G, α]` is an isospectral flow along which every Casimir is conserved
//! and any two Casimirs Poisson-commute under the R-deformed bracket.

mod flow;
mod riemann;

pub use flow::{
    integrate_flow, ConservationReport, ConservationRow, ConservationTracker, SpectrumSource, EigenDrift, FlowConfig, FlowResult,
    GeneratorRule, InvariantDrift, Snapshot,
};
pub use riemann::{
    paper_generator_b, paper_residuals, paper_rhs_residuals, printed_generator, riemann_alpha,
    PaperResiduals, RiemannState,
};

use serde::{Deserialize, Serialize};

use crate::loopalg::{degree, loop_bracket, loop_power, loop_r_bracket, pairing, project_plus, LoopElement};
use crate::{Error, Result};

/// Selects `γ_n^{(k)}`: power index `n`, λ-shift `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CasimirSpec {
    pub n: u32,
    pub k: i32,
}

impl CasimirSpec {
    pub fn new(n: u32, k: i32) -> Self {
        CasimirSpec { n, k }
    }
}

/// `A^{n+1}` paired with `λ^{k+d}`, scaled by `1/(n+1)`.
pub fn casimir_value(alpha: &LoopElement, spec: CasimirSpec) -> Result<f64> {
    let d = degree(alpha)?;
    let power = loop_power(&alpha.shift(-d), spec.n + 1)?;
    let shift = LoopElement::scalar_monomial(alpha.size(), spec.k + d);
    Ok(pairing(&power, &shift)? / f64::from(spec.n + 1))
}

/// `∇γ_n^{(k)}(α) = (α λ^{-d})ⁿ λᵏ`.
pub fn casimir_gradient(alpha: &LoopElement, spec: CasimirSpec) -> Result<LoopElement> {
    let d = degree(alpha)?;
    Ok(loop_power(&alpha.shift(-d), spec.n)?.shift(spec.k))
}

/// `P₊ ∇γ(α)`.
pub fn aks_generator(alpha: &LoopElement, spec: CasimirSpec) -> Result<LoopElement> {
    Ok(project_plus(&casimir_gradient(alpha, spec)?))
}

/// `[G, α]`.
pub fn lax_field(alpha: &LoopElement, generator: &LoopElement) -> Result<LoopElement> {
    loop_bracket(generator, alpha)
}

/// `‖[∇γ(α), α]‖`, zero up to roundoff for every `α`.
pub fn casimir_defect(alpha: &LoopElement, spec: CasimirSpec) -> Result<f64> {
    Ok(loop_bracket(&casimir_gradient(alpha, spec)?, alpha)?.norm())
}

/// `|⟨α, [∇γ₁(α), ∇γ₂(α)]_R⟩|`, the R-bracket of two Casimirs.
pub fn involutivity_defect(alpha: &LoopElement, s1: CasimirSpec, s2: CasimirSpec) -> Result<f64> {
    let g1 = casimir_gradient(alpha, s1)?;
    let g2 = casimir_gradient(alpha, s2)?;
    Ok(pairing(alpha, &loop_r_bracket(&g1, &g2)?)?.abs())
}

/// `‖α‖ · ‖∇γ₁‖ · ‖∇γ₂‖`, the natural size of the terms in [`involutivity_defect`].
pub fn involutivity_scale(alpha: &LoopElement, s1: CasimirSpec, s2: CasimirSpec) -> Result<f64> {
    Ok(alpha.norm() * casimir_gradient(alpha, s1)?.norm() * casimir_gradient(alpha, s2)?.norm())
}

/// Outcome of [`gradient_fd_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    /// `(γ(α + hβ) − γ(α − hβ)) / 2h`.
    pub finite_difference: f64,
    /// `⟨∇γ(α), β⟩`.
    pub analytic: f64,
    pub abs_error: f64,
    /// `abs_error / (‖∇γ‖ ‖β‖)`, relative to the Cauchy–Schwarz bound of the pairing.
    pub rel_error: f64,
}

/// Compares the gradient against a central difference of the functional along `β`.
///
/// The step moves `α` by `1e-5 · (1 + ‖α‖)` in norm, i.e. `h = 1e-5 (1 + ‖α‖) / ‖β‖`.
/// `β` must leave the degree of `α ± hβ` unchanged.
pub fn gradient_fd_check(alpha: &LoopElement, spec: CasimirSpec, direction: &LoopElement) -> Result<GradientCheck> {
    let d = degree(alpha)?;
    let grad = casimir_gradient(alpha, spec)?;
    let analytic = pairing(&grad, direction)?;
    let beta_norm = direction.norm();
    if beta_norm == 0.0 {
        return Ok(GradientCheck { finite_difference: 0.0, analytic, abs_error: analytic.abs(), rel_error: 0.0 });
    }
    if direction.max_exponent().is_some_and(|top| top > d) {
        return Err(Error::DegreeChanged { degree: d });
    }
    let h = 1e-5 * (1.0 + alpha.norm()) / beta_norm;
    let plus = alpha.add(&direction.scale(h))?;
    let minus = alpha.add(&direction.scale(-h))?;
    if degree(&plus)? != d || degree(&minus)? != d {
        return Err(Error::DegreeChanged { degree: d });
    }
    let finite_difference = (casimir_value(&plus, spec)? - casimir_value(&minus, spec)?) / (2.0 * h);
    let abs_error = (finite_difference - analytic).abs();
    let bound = grad.norm() * beta_norm;
    let rel_error = if bound > 0.0 { abs_error / bound } else { abs_error };
    Ok(GradientCheck { finite_difference, analytic, abs_error, rel_error })
}

#[cfg(test)]
mod tests;
