//! The naive matrix discretization `U_t = −2[Z,V]`, `V_t = U[Z,V] − V[Z,U]`, integrated
//! with the same solver and monitored through the same functionals as the Lax flows.

use lax_markov_core::aks::{ConservationReport, ConservationTracker, FlowConfig, SpectrumSource};
use lax_markov_core::calogero::{naive_discretize_riemann, ProductOrdering, QuasiRep};
use lax_markov_core::loopalg::LoopElement;
use lax_markov_core::ode::{Dopri5, StepStats};
use lax_markov_core::{Matrix, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveSnapshot {
    pub t: f64,
    pub u: Matrix,
    pub v: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaiveResult {
    pub snapshots: Vec<NaiveSnapshot>,
    pub report: ConservationReport,
    pub stats: StepStats,
}

/// `λ³I + λ²U + λV + Z`, the element whose invariants are tracked.
pub fn naive_alpha(rep: &QuasiRep, u: &Matrix, v: &Matrix) -> LoopElement {
    let n = rep.len();
    LoopElement::from_terms(n, [(3, Matrix::identity(n, n)), (2, u.clone()), (1, v.clone()), (0, rep.z().clone())])
        .expect("sizes match the mesh")
}

fn split_state(y: &[f64], n: usize) -> (Matrix, Matrix) {
    let (a, b) = y.split_at(n * n);
    (Matrix::from_row_slice(n, n, a), Matrix::from_row_slice(n, n, b))
}

fn join_state(u: &Matrix, v: &Matrix) -> Vec<f64> {
    u.transpose().iter().chain(v.transpose().iter()).copied().collect()
}

pub fn integrate_naive(
    rep: &QuasiRep,
    u0: &Matrix,
    v0: &Matrix,
    ordering: ProductOrdering,
    config: &FlowConfig,
) -> Result<NaiveResult> {
    config.validate()?;
    let n = rep.len();
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (u, v) = split_state(y, n);
        let (du, dv) = naive_discretize_riemann(rep, &u, &v, ordering).expect("sizes fixed");
        dy.copy_from_slice(&join_state(&du, &dv));
    };
    let alpha0 = naive_alpha(rep, u0, v0);
    let mut tracker = ConservationTracker::new(&alpha0, config.invariants_m_max, &config.lambda_samples, SpectrumSource::Direct);
    tracker.observe(0.0, &alpha0, true);
    let mut snapshots = vec![NaiveSnapshot { t: 0.0, u: u0.clone(), v: v0.clone() }];
    let mut solver = Dopri5::new(rhs, 0.0, join_state(u0, v0), config.step_options())?;
    for &t in &config.snapshot_times()[1..] {
        solver.advance_to(t, |ts, y| {
            if ts < t {
                let (u, v) = split_state(y, n);
                tracker.observe(ts, &naive_alpha(rep, &u, &v), false);
            }
        })?;
        let (u, v) = split_state(solver.y(), n);
        tracker.observe(t, &naive_alpha(rep, &u, &v), true);
        snapshots.push(NaiveSnapshot { t, u, v });
    }
    Ok(NaiveResult { snapshots, report: tracker.finish(0.0), stats: solver.stats() })
}
