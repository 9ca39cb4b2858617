//! Checks of the quasi-representation identities on each mesh of the sweep.
//!
//! Test polynomials are powers of `t = (x − mid)/half`, so their samples stay O(1) on
//! any interval. Errors are reported relative to the largest entry of the expected
//! coefficient vector, next to the mesh condition factor `max|ρ|/min|ρ|`.

use lax_markov_core::calogero::{build_quasirep, to_coefficients, Mesh};
use lax_markov_core::matrix::{all_ones, commutator, max_abs};
use lax_markov_core::Matrix;
use nalgebra::DVector;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CommutatorRow {
    pub n: usize,
    pub span: f64,
    /// `max |[Z,X] − I + J|`.
    pub max_abs_deviation: f64,
    /// Second over first singular value of `[Z,X] − I`; zero for an exact rank-one defect.
    pub rank_one_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceRow {
    pub n: usize,
    pub degree: usize,
    /// `‖[Z,X]c_f − c_f‖ / ‖c_f‖`.
    pub heisenberg_error: f64,
    /// `‖Z c_f − c_{f'}‖ / ‖c_{f'}‖`.
    pub derivative_error: f64,
    pub condition: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopDegreeRow {
    pub n: usize,
    pub degree: usize,
    /// `‖[Z,X]c_f − c_f‖ / ‖c_f‖` for `deg f = N − 1`, where it must not vanish.
    pub heisenberg_defect: f64,
    /// `e · c_f`, the leading divided difference; the defect equals `−(e·c_f)·1`.
    pub ones_dot_coefficients: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplicationRow {
    pub n: usize,
    pub deg_v: usize,
    pub deg_f: usize,
    /// `‖[Z, v(X)]c_f − c_{v'f}‖ / ‖c_{v'f}‖`.
    pub error: f64,
    pub condition: f64,
}

#[derive(Debug, Clone, Default)]
pub struct QuasirepReport {
    pub commutator: Vec<CommutatorRow>,
    pub subspace: Vec<SubspaceRow>,
    pub top_degree: Vec<TopDegreeRow>,
    pub multiplication: Vec<MultiplicationRow>,
}

struct Monomials {
    mid: f64,
    half: f64,
}

impl Monomials {
    fn new(mesh: &Mesh) -> Self {
        let nodes = mesh.nodes();
        let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
        Monomials { mid: 0.5 * (a + b), half: 0.5 * (b - a) }
    }

    fn value(&self, d: usize, x: f64) -> f64 {
        ((x - self.mid) / self.half).powi(d as i32)
    }

    fn derivative(&self, d: usize, x: f64) -> f64 {
        if d == 0 {
            0.0
        } else {
            d as f64 * ((x - self.mid) / self.half).powi(d as i32 - 1) / self.half
        }
    }

    fn coefficients(&self, mesh: &Mesh, f: impl Fn(f64) -> f64) -> DVector<f64> {
        DVector::from_vec(to_coefficients(&mesh.sample(f)))
    }
}

fn relative(err: &DVector<f64>, reference: &DVector<f64>) -> f64 {
    let scale = reference.amax();
    if scale > 0.0 {
        err.amax() / scale
    } else {
        err.amax()
    }
}

pub fn quasirep_check(meshes: &[Mesh]) -> QuasirepReport {
    let mut report = QuasirepReport::default();
    for mesh in meshes {
        let n = mesh.len();
        let rep = build_quasirep(mesh);
        let zx = commutator(rep.z(), rep.x());
        let defect = &zx - Matrix::identity(n, n);
        let sv = defect.clone().singular_values();
        let mut sv: Vec<f64> = sv.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        report.commutator.push(CommutatorRow {
            n,
            span: mesh.span(),
            max_abs_deviation: max_abs(&(&defect + all_ones(n))),
            rank_one_ratio: if sv[0] > 0.0 { sv.get(1).copied().unwrap_or(0.0) / sv[0] } else { 0.0 },
        });

        let mono = Monomials::new(mesh);
        let condition = mesh.condition_factor();
        for d in 0..n {
            let cf = mono.coefficients(mesh, |x| mono.value(d, x));
            let heis = &zx * &cf - &cf;
            if d + 1 < n {
                let cdf = mono.coefficients(mesh, |x| mono.derivative(d, x));
                let deriv = rep.z() * &cf - &cdf;
                let derivative_error = if d == 0 { deriv.amax() / cf.amax() } else { relative(&deriv, &cdf) };
                report.subspace.push(SubspaceRow {
                    n,
                    degree: d,
                    heisenberg_error: relative(&heis, &cf),
                    derivative_error,
                    condition,
                });
            } else {
                report.top_degree.push(TopDegreeRow {
                    n,
                    degree: d,
                    heisenberg_defect: relative(&heis, &cf),
                    ones_dot_coefficients: cf.sum(),
                });
            }
        }

        for dv in 1..n {
            let vm = mesh.multiplication_matrix(|x| mono.value(dv, x));
            let op = commutator(rep.z(), &vm);
            for df in 0..n - dv {
                let cf = mono.coefficients(mesh, |x| mono.value(df, x));
                let expected = mono.coefficients(mesh, |x| mono.derivative(dv, x) * mono.value(df, x));
                report.multiplication.push(MultiplicationRow {
                    n,
                    deg_v: dv,
                    deg_f: df,
                    error: relative(&(&op * &cf - &expected), &expected),
                    condition,
                });
            }
        }
    }
    report
}
