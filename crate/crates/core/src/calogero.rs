//! Interpolation meshes and the Calogero quasi-representation of `(x, d/dx, 1)`.
//!
//! A function sampled at distinct nodes `x_1 < … < x_N` is carried by its Lagrange
//! coefficient vector `c_j = f(x_j) / ρ_j`, where `ρ_j = Π_{i≠j} (x_j − x_i)`, so that
//! `f_N(x) = Σ_j c_j e_j(x)` with `e_j(x) = Π_{i≠j} (x − x_i)`.
//!
//! On coefficient vectors, multiplication by `x` is `X = diag(x)` and differentiation is
//! the matrix `Z` with `Z_ij = 1/(x_i − x_j)` off the diagonal and `Z_ii = Σ_{j≠i} Z_ij`.
//! The pair satisfies `[Z, X] = I − eᵀ⊗e`: the Heisenberg relation fails only by the
//! all-ones matrix, which annihilates the coefficients of every polynomial of degree
//! at most `N − 2`.

use serde::{Deserialize, Serialize};

use crate::matrix::{commutator, ensure_same, ensure_square, Matrix};
use crate::{Error, Result};

/// Minimum admissible node gap, relative to the mesh span.
pub const MIN_RELATIVE_GAP: f64 = 1e-10;

/// Default row cap for [`kron_power`].
pub const KRON_ROW_CAP: usize = 4096;

/// How to place the nodes of a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeshSpec {
    /// Equispaced nodes including both endpoints. Ill-conditioned for large `n`:
    /// the Lagrange denominators under- and overflow geometrically.
    Uniform { n: usize, interval: [f64; 2] },
    /// Chebyshev–Gauss nodes `cos((2k−1)π/2n)` mapped to the interval.
    Chebyshev { n: usize, interval: [f64; 2] },
    Explicit { nodes: Vec<f64> },
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec::Chebyshev { n: 8, interval: [-1.0, 1.0] }
    }
}

impl MeshSpec {
    pub fn len(&self) -> usize {
        match self {
            MeshSpec::Uniform { n, .. } | MeshSpec::Chebyshev { n, .. } => *n,
            MeshSpec::Explicit { nodes } => nodes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same node family with a different node count. Explicit meshes are returned unchanged.
    pub fn with_len(&self, n: usize) -> MeshSpec {
        match self {
            MeshSpec::Uniform { interval, .. } => MeshSpec::Uniform { n, interval: *interval },
            MeshSpec::Chebyshev { interval, .. } => MeshSpec::Chebyshev { n, interval: *interval },
            MeshSpec::Explicit { .. } => self.clone(),
        }
    }
}

/// Sorted, pairwise-distinct interpolation nodes together with their Lagrange denominators.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    rho: Vec<f64>,
    span: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshJson {
    nodes: Vec<f64>,
    rho: Vec<f64>,
}

fn check_interval(interval: [f64; 2]) -> Result<(f64, f64)> {
    let [a, b] = interval;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::BadInterval { a, b });
    }
    Ok((a, b))
}

/// Builds a mesh. Nodes come out sorted ascending.
pub fn build_mesh(spec: &MeshSpec) -> Result<Mesh> {
    match spec {
        MeshSpec::Uniform { n, interval } => {
            let (a, b) = check_interval(*interval)?;
            if *n < 2 {
                return Err(Error::TooFewNodes(*n));
            }
            let h = (b - a) / (*n - 1) as f64;
            let mut nodes: Vec<f64> = (0..*n).map(|k| a + h * k as f64).collect();
            nodes[*n - 1] = b;
            Mesh::from_nodes(nodes)
        }
        MeshSpec::Chebyshev { n, interval } => {
            let (a, b) = check_interval(*interval)?;
            if *n < 2 {
                return Err(Error::TooFewNodes(*n));
            }
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let nodes = (1..=*n)
                .rev()
                .map(|k| {
                    let theta = (2 * k - 1) as f64 * std::f64::consts::PI / (2 * n) as f64;
                    mid + half * theta.cos()
                })
                .collect();
            Mesh::from_nodes(nodes)
        }
        MeshSpec::Explicit { nodes } => Mesh::from_nodes(nodes.clone()),
    }
}

/// `ρ_j = Π_{i≠j} (x_j − x_i)`.
fn lagrange_denominators(nodes: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &xi)| xj - xi)
                .product()
        })
        .collect()
}

impl Mesh {
    pub fn from_nodes(mut nodes: Vec<f64>) -> Result<Mesh> {
        if nodes.len() < 2 {
            return Err(Error::TooFewNodes(nodes.len()));
        }
        if let Some(&bad) = nodes.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFiniteNode(bad));
        }
        nodes.sort_by(f64::total_cmp);
        let span = nodes[nodes.len() - 1] - nodes[0];
        let threshold = MIN_RELATIVE_GAP * span;
        let gap = nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if !span.is_finite() || gap < threshold || gap == 0.0 {
            return Err(Error::DuplicateNodes { gap, threshold });
        }
        let rho = lagrange_denominators(&nodes);
        Ok(Mesh { nodes, rho, span })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    /// `max_j |1/ρ_j| · max_j |ρ_j|`, the spread of the Lagrange denominators.
    pub fn condition_factor(&self) -> f64 {
        let max = self.rho.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
        let min = self.rho.iter().fold(f64::INFINITY, |m, r| m.min(r.abs()));
        max / min
    }

    /// Samples `f` at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> SampleVector<'_> {
        SampleVector { mesh: self, values: self.nodes.iter().map(|&x| f(x)).collect() }
    }

    pub fn samples(&self, values: Vec<f64>) -> Result<SampleVector<'_>> {
        if values.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: values.len() });
        }
        Ok(SampleVector { mesh: self, values })
    }

    /// `diag(f(x_1), …, f(x_N))`, the matrix of multiplication by `f` on coefficients.
    pub fn multiplication_matrix(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.len(),
            self.nodes.iter().map(|&x| f(x)),
        ))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(MeshJson { nodes: self.nodes.clone(), rho: self.rho.clone() })
            .expect("finite floats serialize")
    }

    /// Parses `{"nodes": [...], "rho": [...]}`. The denominators are recomputed from
    /// the nodes and must agree with the stored ones to relative error `1e-12`.
    pub fn from_json_str(s: &str) -> Result<Mesh> {
        let raw: MeshJson = serde_json::from_str(s)?;
        if raw.rho.len() != raw.nodes.len() {
            return Err(Error::Parse(format!(
                "{} nodes but {} denominators",
                raw.nodes.len(),
                raw.rho.len()
            )));
        }
        let mut pairs: Vec<(f64, f64)> = raw.nodes.into_iter().zip(raw.rho).collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mesh = Mesh::from_nodes(pairs.iter().map(|p| p.0).collect())?;
        for (computed, &(_, stored)) in mesh.rho.iter().zip(&pairs) {
            let agrees = (computed - stored).abs() <= 1e-12 * computed.abs();
            if !agrees {
                return Err(Error::Parse(format!(
                    "stored denominator {stored:e} disagrees with recomputed {computed:e}"
                )));
            }
        }
        Ok(mesh)
    }
}

/// Function values at the nodes of a particular mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector<'m> {
    mesh: &'m Mesh,
    values: Vec<f64>,
}

impl<'m> SampleVector<'m> {
    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Evaluates the interpolating polynomial `Σ_j (f_j/ρ_j) e_j(x)`.
pub fn interpolate(samples: &SampleVector<'_>, x: f64) -> f64 {
    let nodes = samples.mesh.nodes();
    if let Some(j) = nodes.iter().position(|&xj| xj == x) {
        return samples.values[j];
    }
    to_coefficients(samples)
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let ej: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &xi)| x - xi)
                .product();
            c * ej
        })
        .sum()
}

/// `c_j = f_j / ρ_j`.
pub fn to_coefficients(samples: &SampleVector<'_>) -> Vec<f64> {
    samples.values.iter().zip(samples.mesh.rho()).map(|(f, r)| f / r).collect()
}

pub fn from_coefficients<'m>(mesh: &'m Mesh, coeffs: &[f64]) -> Result<SampleVector<'m>> {
    mesh.samples(coeffs.iter().zip(mesh.rho()).map(|(c, r)| c * r).collect())
}

/// The matrix triple `(X, Z, I)` for a mesh; `I` and the all-ones covector are implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiRep {
    mesh: Mesh,
    x: Matrix,
    z: Matrix,
}

pub fn build_quasirep(mesh: &Mesh) -> QuasiRep {
    let n = mesh.len();
    let nodes = mesh.nodes();
    let mut z = Matrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let zij = 1.0 / (nodes[i] - nodes[j]);
                z[(i, j)] = zij;
                diag += zij;
            }
        }
        z[(i, i)] = diag;
    }
    QuasiRep { mesh: mesh.clone(), x: mesh.multiplication_matrix(|x| x), z }
}

impl QuasiRep {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn z(&self) -> &Matrix {
        &self.z
    }

    pub fn identity(&self) -> Matrix {
        Matrix::identity(self.len(), self.len())
    }

    /// The row covector `e = (1, …, 1)`.
    pub fn ones_covector(&self) -> nalgebra::RowDVector<f64> {
        nalgebra::RowDVector::from_element(self.len(), 1.0)
    }

    /// `diag(ρ) · Z · diag(ρ)⁻¹`: differentiation acting on node samples instead of
    /// coefficients.
    pub fn nodal_differentiation(&self) -> Matrix {
        let rho = self.mesh.rho();
        Matrix::from_fn(self.len(), self.len(), |i, j| rho[i] * self.z[(i, j)] / rho[j])
    }
}

/// `Z · c_f`: the coefficients of the derivative of the interpolant.
pub fn derivative_coeffs(samples: &SampleVector<'_>, rep: &QuasiRep) -> Result<Vec<f64>> {
    if samples.mesh.len() != rep.len() {
        return Err(Error::DimensionMismatch { expected: rep.len(), found: samples.mesh.len() });
    }
    let c = nalgebra::DVector::from_vec(to_coefficients(samples));
    Ok((rep.z() * c).iter().copied().collect())
}

/// `[Z, [Z, … [Z, Φ]]]` with `n` nested commutators.
pub fn ad_power(z: &Matrix, phi: &Matrix, n: usize) -> Result<Matrix> {
    ensure_same(z, phi)?;
    Ok((0..n).fold(phi.clone(), |acc, _| commutator(z, &acc)))
}

/// `A ⊗ A ⊗ … ⊗ A` (`m` factors) under the default row cap.
pub fn kron_power(a: &Matrix, m: usize) -> Result<Matrix> {
    kron_power_capped(a, m, KRON_ROW_CAP)
}

pub fn kron_power_capped(a: &Matrix, m: usize, cap: usize) -> Result<Matrix> {
    if m == 0 {
        return Err(Error::InvalidArgument("Kronecker power needs m >= 1".into()));
    }
    let rows = u32::try_from(m)
        .ok()
        .and_then(|m| a.nrows().max(a.ncols()).checked_pow(m))
        .unwrap_or(usize::MAX);
    if rows > cap {
        return Err(Error::SizeCapExceeded { rows, cap });
    }
    Ok((1..m).fold(a.clone(), |acc, _| acc.kronecker(a)))
}

/// Operator ordering for the nonlinear terms of the naive discretization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductOrdering {
    /// `u·v_x ↦ U [Z, V]`.
    #[default]
    Left,
    /// `u·v_x ↦ ½ (U [Z, V] + [Z, V] U)`.
    Symmetrized,
}

/// Right-hand side of the naive matrix discretization of `u_t = −2 v_x`,
/// `v_t = u v_x − v u_x`, obtained by `∂_x ↦ ad_Z`, `u ↦ U`, `v ↦ V`.
///
/// `U` and `V` start out diagonal but the flow moves them off the diagonal, so only
/// their sizes are checked here.
pub fn naive_discretize_riemann(
    rep: &QuasiRep,
    u: &Matrix,
    v: &Matrix,
    ordering: ProductOrdering,
) -> Result<(Matrix, Matrix)> {
    let n = ensure_same(u, v)?;
    if ensure_square(rep.z())? != n {
        return Err(Error::DimensionMismatch { expected: rep.len(), found: n });
    }
    let zv = commutator(rep.z(), v);
    let zu = commutator(rep.z(), u);
    let du = &zv * -2.0;
    let dv = match ordering {
        ProductOrdering::Left => u * &zv - v * &zu,
        ProductOrdering::Symmetrized => {
            (u * &zv + &zv * u) * 0.5 - (v * &zu + &zu * v) * 0.5
        }
    };
    Ok((du, dv))
}
