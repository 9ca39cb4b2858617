//! Matrix Laurent polynomials `X(λ) = Σ_j X_j λ^j` with finitely many nonzero terms.
//!
//! The loop algebra carries the pointwise commutator, the residue pairing
//! `⟨X, Y⟩ = res tr(X Y)` (the `λ⁻¹` coefficient), and the splitting
//! `g̃ = g̃₊ ⊕ g̃₋` where `g̃₊` holds the positive powers plus the `M`-part of the
//! constant term and `g̃₋` the negative powers plus the `E`-part.

use std::collections::BTreeMap;

use serde_json::Value;

use crate::markov::split;
use crate::matrix::{self, commutator, ensure_square, Matrix};
use crate::{Error, Result};

/// Largest deviation of a top coefficient from `I` that still counts as the identity.
pub const TOP_IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LoopElement {
    size: usize,
    coeffs: BTreeMap<i32, Matrix>,
}

fn is_zero_matrix(m: &Matrix) -> bool {
    m.iter().all(|&v| v == 0.0)
}

impl LoopElement {
    pub fn zero(size: usize) -> Self {
        LoopElement { size, coeffs: BTreeMap::new() }
    }

    /// `λ⁰ I`.
    pub fn identity(size: usize) -> Self {
        Self::scalar_monomial(size, 0)
    }

    /// `λ^exponent I`.
    pub fn scalar_monomial(size: usize, exponent: i32) -> Self {
        Self::monomial(exponent, Matrix::identity(size, size)).expect("identity is square")
    }

    /// `λ^exponent A`.
    pub fn monomial(exponent: i32, a: Matrix) -> Result<Self> {
        let size = ensure_square(&a)?;
        Self::from_terms(size, [(exponent, a)])
    }

    /// Collects `(exponent, matrix)` terms; repeated exponents are summed and zero
    /// coefficients dropped.
    pub fn from_terms(size: usize, terms: impl IntoIterator<Item = (i32, Matrix)>) -> Result<Self> {
        let mut out = LoopElement::zero(size);
        for (j, a) in terms {
            if ensure_square(&a)? != size {
                return Err(Error::DimensionMismatch { expected: size, found: a.nrows() });
            }
            out.add_term(j, &a);
        }
        Ok(out)
    }

    fn add_term(&mut self, exponent: i32, a: &Matrix) {
        match self.coeffs.get_mut(&exponent) {
            Some(c) => {
                *c += a;
                if is_zero_matrix(c) {
                    self.coeffs.remove(&exponent);
                }
            }
            None if !is_zero_matrix(a) => {
                self.coeffs.insert(exponent, a.clone());
            }
            None => {}
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, exponent: i32) -> Option<&Matrix> {
        self.coeffs.get(&exponent)
    }

    pub fn coeff_or_zero(&self, exponent: i32) -> Matrix {
        self.coeffs
            .get(&exponent)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.size, self.size))
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &Matrix)> {
        self.coeffs.iter().map(|(&j, a)| (j, a))
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn min_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    /// `√(Σ_j ‖X_j‖²_F)`.
    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|a| a.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(matrix::max_abs).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: f64) -> Self {
        let coeffs = if s == 0.0 {
            BTreeMap::new()
        } else {
            self.coeffs.iter().map(|(&j, a)| (j, a * s)).filter(|(_, a)| !is_zero_matrix(a)).collect()
        };
        LoopElement { size: self.size, coeffs }
    }

    /// Multiplication by `λ^k`.
    pub fn shift(&self, k: i32) -> Self {
        LoopElement {
            size: self.size,
            coeffs: self.coeffs.iter().map(|(&j, a)| (j + k, a.clone())).collect(),
        }
    }

    /// Drops every term with exponent below `min_exponent`.
    pub fn truncate_below(&self, min_exponent: i32) -> Self {
        LoopElement { size: self.size, coeffs: self.coeffs.range(min_exponent..).map(|(&j, a)| (j, a.clone())).collect() }
    }

    /// Keeps only exponents in `lo..=hi`.
    pub fn restrict(&self, lo: i32, hi: i32) -> Self {
        if lo > hi {
            return LoopElement::zero(self.size);
        }
        LoopElement { size: self.size, coeffs: self.coeffs.range(lo..=hi).map(|(&j, a)| (j, a.clone())).collect() }
    }

    fn check_size(&self, other: &Self) -> Result<()> {
        if self.size != other.size {
            return Err(Error::DimensionMismatch { expected: self.size, found: other.size });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_size(other)?;
        let mut out = self.clone();
        for (j, a) in other.terms() {
            out.add_term(j, a);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// `X(λ*)` for a nonzero real `λ*`.
    pub fn evaluate(&self, lambda: f64) -> Matrix {
        self.coeffs
            .iter()
            .fold(Matrix::zeros(self.size, self.size), |acc, (&j, a)| acc + a * lambda.powi(j))
    }

    /// Row-major JSON keyed by exponent, e.g. `{"3": [[1,0],[0,1]], "0": [[…]]}`.
    pub fn to_json_value(&self) -> Value {
        let map: serde_json::Map<String, Value> =
            self.coeffs.iter().map(|(j, a)| (j.to_string(), matrix::to_json_value(a))).collect();
        Value::Object(map)
    }

    /// Parses the exponent-keyed JSON form. The object must contain at least one
    /// coefficient so that the matrix size is known.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<Vec<f64>>> = serde_json::from_str(s)?;
        let mut terms = Vec::with_capacity(raw.len());
        for (key, rows) in raw {
            let j: i32 = key
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("exponent key {key:?} is not an integer")))?;
            let a = matrix::from_rows(&rows)?;
            if a.nrows() != a.ncols() || a.nrows() == 0 {
                return Err(Error::Parse(format!("coefficient at λ^{j} is not a nonempty square matrix")));
            }
            terms.push((j, a));
        }
        let size = terms
            .first()
            .map(|(_, a)| a.nrows())
            .ok_or_else(|| Error::Parse("empty loop element has no matrix size".into()))?;
        LoopElement::from_terms(size, terms).map_err(|e| match e {
            Error::DimensionMismatch { expected, found } => {
                Error::Parse(format!("mixed coefficient sizes {expected} and {found}"))
            }
            other => other,
        })
    }
}

/// Cauchy product `Σ_s λ^s Σ_{j+k=s} X_j Y_k`.
pub fn loop_mul(x: &LoopElement, y: &LoopElement) -> Result<LoopElement> {
    x.check_size(y)?;
    let mut out = LoopElement::zero(x.size);
    for (j, a) in x.terms() {
        for (k, b) in y.terms() {
            out.add_term(j + k, &(a * b));
        }
    }
    Ok(out)
}

/// `Σ_s λ^s Σ_{j+k=s} [X_j, Y_k]`.
pub fn loop_bracket(x: &LoopElement, y: &LoopElement) -> Result<LoopElement> {
    x.check_size(y)?;
    let mut out = LoopElement::zero(x.size);
    for (j, a) in x.terms() {
        for (k, b) in y.terms() {
            out.add_term(j + k, &commutator(a, b));
        }
    }
    Ok(out)
}

/// `res tr(X(λ) Y(λ)) = Σ_{j+k=−1} tr(X_j Y_k)`.
pub fn pairing(x: &LoopElement, y: &LoopElement) -> Result<f64> {
    x.check_size(y)?;
    Ok(x.terms()
        .filter_map(|(j, a)| y.coeff(-1 - j).map(|b| a.component_mul(&b.transpose()).sum()))
        .sum())
}

/// Positive powers plus `M(X_0)`.
pub fn project_plus(x: &LoopElement) -> LoopElement {
    let mut out = x.truncate_below(1);
    if let Some(x0) = x.coeff(0) {
        out.add_term(0, &split(x0).m_part);
    }
    out
}

/// Negative powers plus `E(X_0)`.
pub fn project_minus(x: &LoopElement) -> LoopElement {
    let mut out = x.restrict(i32::MIN, -1);
    if let Some(x0) = x.coeff(0) {
        out.add_term(0, &split(x0).e_part);
    }
    out
}

/// `R X = ½ (P₊X − P₋X)`.
pub fn loop_r_map(x: &LoopElement) -> LoopElement {
    project_plus(x).sub(&project_minus(x)).expect("projections keep the size").scale(0.5)
}

/// `[X, Y]_R = [RX, Y] + [X, RY]`.
pub fn loop_r_bracket(x: &LoopElement, y: &LoopElement) -> Result<LoopElement> {
    loop_bracket(&loop_r_map(x), y)?.add(&loop_bracket(x, &loop_r_map(y))?)
}

/// Highest exponent with a nonzero coefficient.
pub fn degree(x: &LoopElement) -> Result<i32> {
    x.max_exponent().ok_or(Error::ZeroElement)
}

/// `Xⁿ`, with `X⁰ = λ⁰ I`.
pub fn loop_power(x: &LoopElement, n: u32) -> Result<LoopElement> {
    let mut acc = LoopElement::identity(x.size);
    for _ in 0..n {
        acc = loop_mul(&acc, x)?;
    }
    Ok(acc)
}

/// Checks that `x` has the form `λ^d (I + lower)` and returns `d`.
pub fn identity_top(x: &LoopElement) -> Result<i32> {
    let d = degree(x)?;
    let top = x.coeff(d).expect("degree points at a stored coefficient");
    if matrix::max_abs(&(top - Matrix::identity(x.size, x.size))) > TOP_IDENTITY_TOL {
        return Err(Error::TopNotIdentity);
    }
    Ok(d)
}

/// The formal series `Y = λ^{dp/q} (I + Σ_{j≥1} Y_j λ^{-j})` with `Y^q = X^p`, truncated
/// to `order` terms below the top.
///
/// `X = λ^d (I + T)` must have identity top coefficient. Writing `W = (I + T)^p`, the
/// coefficients of `S = W^{1/q}` follow from matching the `λ^{-n}` terms of `S^q = W`:
/// the only place `S_n` enters is linearly as `q · S_n`, so
/// `S_n = (W_n − [λ^{-n}] (S_0 + … + S_{n−1} λ^{1−n})^q) / q`.
pub fn fractional_power_series(x: &LoopElement, p: i32, q: u32, order: usize) -> Result<LoopElement> {
    if order == 0 {
        return Err(Error::TruncationTooSmall);
    }
    if q == 0 {
        return Err(Error::InvalidArgument("root index q must be positive".into()));
    }
    let order = i32::try_from(order).map_err(|_| Error::InvalidArgument("truncation order too large".into()))?;
    let d = identity_top(x)?;
    let top = d
        .checked_mul(p)
        .filter(|dp| dp % q as i32 == 0)
        .map(|dp| dp / q as i32)
        .ok_or(Error::FractionalDegree { degree: d, p, q })?;

    let n = x.size;
    // I + T with the top term replaced by an exact identity.
    let mut normalized = x.shift(-d).truncate_below(-order).restrict(i32::MIN, -1);
    normalized.add_term(0, &Matrix::identity(n, n));
    let w = integer_power_series(&normalized, p, order)?;

    let mut s = LoopElement::identity(n);
    for k in 1..=order {
        let mut power = LoopElement::identity(n);
        for _ in 0..q {
            power = loop_mul(&power, &s)?.truncate_below(-k);
        }
        let residual = w.coeff_or_zero(-k) - power.coeff_or_zero(-k);
        s.add_term(-k, &(residual / q as f64));
    }
    Ok(s.shift(top))
}

/// `(I + T)^p` through `λ^{-order}` for a series `I + T` with `T` of negative degree.
/// Negative `p` uses the binomial series `Σ_k C(p, k) T^k`.
fn integer_power_series(one_plus_t: &LoopElement, p: i32, order: i32) -> Result<LoopElement> {
    let n = one_plus_t.size;
    if p >= 0 {
        let mut acc = LoopElement::identity(n);
        for _ in 0..p {
            acc = loop_mul(&acc, one_plus_t)?.truncate_below(-order);
        }
        return Ok(acc);
    }
    let t = one_plus_t.sub(&LoopElement::identity(n))?;
    let mut acc = LoopElement::identity(n);
    let mut term = LoopElement::identity(n);
    let mut binom = 1.0;
    for k in 1..=order {
        binom *= (p as f64 - (k - 1) as f64) / k as f64;
        term = loop_mul(&term, &t)?.truncate_below(-order);
        acc = acc.add(&term.scale(binom))?;
    }
    Ok(acc)
}

/// One `λ`-coefficient of `tr(Xᵐ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceInvariant {
    pub m: u32,
    pub exponent: i32,
    pub value: f64,
}

/// Coefficients of `tr(Xᵐ)` for `1 ≤ m ≤ m_max`. With `window = None` every exponent
/// between `m · min_exponent` and `m · max_exponent` is listed, zeros included, so the
/// index set depends only on the support of `x`.
pub fn trace_invariants(x: &LoopElement, m_max: u32, window: Option<(i32, i32)>) -> Vec<TraceInvariant> {
    let (Some(lo), Some(hi)) = (x.min_exponent(), x.max_exponent()) else {
        return (1..=m_max)
            .flat_map(|m| {
                let (a, b) = window.unwrap_or((0, 0));
                (a..=b).map(move |exponent| TraceInvariant { m, exponent, value: 0.0 })
            })
            .collect();
    };
    let mut out = Vec::new();
    let mut power = LoopElement::identity(x.size);
    for m in 1..=m_max {
        power = loop_mul(&power, x).expect("same size");
        let (a, b) = window.unwrap_or((m as i32 * lo, m as i32 * hi));
        for exponent in a..=b {
            let value = power.coeff(exponent).map_or(0.0, Matrix::trace);
            out.push(TraceInvariant { m, exponent, value });
        }
    }
    out
}

/// `|⟨X, [Y, W]⟩ − ⟨[X, Y], W⟩|`.
pub fn ad_invariance_defect(x: &LoopElement, y: &LoopElement, w: &LoopElement) -> Result<f64> {
    let lhs = pairing(x, &loop_bracket(y, w)?)?;
    let rhs = pairing(&loop_bracket(x, y)?, w)?;
    Ok((lhs - rhs).abs())
}
