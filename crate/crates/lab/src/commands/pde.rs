//! Compares the matrix flows with a method-of-lines solve of
//! `u_t = −2v_x`, `v_t = u v_x − v u_x` on the same nodes.
//!
//! The nodal derivative is `D = diag(ρ) Z diag(ρ)⁻¹`. Matrix trajectories are observed
//! through their action on coefficient vectors: `U(t) c_f` is compared with
//! `c_{u(t) f} = u(t) ∘ c_f` for the test polynomials `f = tᵈ`, `d ≤ 2`, where
//! `t = (x − mid)/half`. Errors are divided by `‖c_f‖ · max(‖u‖, 1)` (max norms).

use lax_markov_core::aks::{integrate_flow, riemann_alpha, CasimirSpec, FlowConfig, GeneratorRule, RiemannState};
use lax_markov_core::calogero::{build_quasirep, to_coefficients, Mesh, ProductOrdering};
use lax_markov_core::ode::Dopri5;
use lax_markov_core::Matrix;
use nalgebra::DVector;
use serde::Serialize;

use crate::config::{ExperimentConfig, FlowRule, MAX_FLOW_N};
use crate::error::{LabError, LabResult};
use crate::naive::integrate_naive;
use crate::profile::Profile;

#[derive(Debug, Clone, Serialize)]
pub struct SlopeRow {
    pub n: usize,
    pub node: usize,
    pub x: f64,
    pub du_dt: f64,
    pub du_dt_exact: f64,
    pub dv_dt: f64,
    pub dv_dt_exact: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorVsTRow {
    pub n: usize,
    pub method: String,
    pub t: f64,
    pub err_u: f64,
    pub err_v: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorVsNRow {
    pub n: usize,
    pub method: String,
    /// `ok`, or the integrator failure for this method.
    pub status: String,
    pub t_end: f64,
    pub err_u: f64,
    pub err_v: f64,
    pub max_err_u: f64,
    pub max_err_v: f64,
}

#[derive(Debug, Clone, Default)]
pub struct PdeReport {
    pub slopes: Vec<SlopeRow>,
    pub error_vs_t: Vec<ErrorVsTRow>,
    pub error_vs_n: Vec<ErrorVsNRow>,
}

impl PdeReport {
    /// `max |MoL slope − exact slope|` over all nodes and meshes, for `u` and `v`.
    pub fn max_slope_deviation(&self) -> (f64, f64) {
        self.slopes.iter().fold((0.0, 0.0), |(a, b), r| {
            (a.max((r.du_dt - r.du_dt_exact).abs()), b.max((r.dv_dt - r.dv_dt_exact).abs()))
        })
    }
}

/// `(−2Dv, u∘Dv − v∘Du)`.
pub fn mol_rhs(d: &Matrix, u: &DVector<f64>, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let du = d * u;
    let dv = d * v;
    (&dv * -2.0, u.component_mul(&dv) - v.component_mul(&du))
}

struct Observer {
    coeffs: Vec<DVector<f64>>,
}

impl Observer {
    fn new(mesh: &Mesh) -> Self {
        let nodes = mesh.nodes();
        let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let degrees = 0..=2.min(mesh.len() - 1);
        let coeffs = degrees
            .map(|d| DVector::from_vec(to_coefficients(&mesh.sample(|x| ((x - mid) / half).powi(d as i32)))))
            .collect();
        Observer { coeffs }
    }

    fn error(&self, op: &Matrix, field: &DVector<f64>) -> f64 {
        let scale = field.amax().max(1.0);
        self.coeffs
            .iter()
            .map(|c| (op * c - field.component_mul(c)).amax() / (c.amax() * scale))
            .fold(0.0, f64::max)
    }
}

fn reference_solve(
    d: &Matrix,
    u0: DVector<f64>,
    v0: DVector<f64>,
    times: &[f64],
    opts: lax_markov_core::ode::StepOptions,
) -> LabResult<Vec<(DVector<f64>, DVector<f64>)>> {
    let n = u0.len();
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (du, dv) = mol_rhs(d, &DVector::from_column_slice(&y[..n]), &DVector::from_column_slice(&y[n..]));
        dy[..n].copy_from_slice(du.as_slice());
        dy[n..].copy_from_slice(dv.as_slice());
    };
    let y0: Vec<f64> = u0.iter().chain(v0.iter()).copied().collect();
    let mut solver = Dopri5::new(rhs, 0.0, y0, opts)?;
    let mut out = vec![(u0, v0)];
    for &t in &times[1..] {
        solver.advance_to(t, |_, _| {})?;
        let y = solver.y();
        out.push((DVector::from_column_slice(&y[..n]), DVector::from_column_slice(&y[n..])));
    }
    Ok(out)
}

fn slopes(mesh: &Mesh, d: &Matrix, u0: &Profile, v0: &Profile) -> Vec<SlopeRow> {
    let u = DVector::from_vec(mesh.sample(|x| u0.eval(x)).values().to_vec());
    let v = DVector::from_vec(mesh.sample(|x| v0.eval(x)).values().to_vec());
    let (du, dv) = mol_rhs(d, &u, &v);
    mesh.nodes()
        .iter()
        .enumerate()
        .map(|(i, &x)| SlopeRow {
            n: mesh.len(),
            node: i,
            x,
            du_dt: du[i],
            du_dt_exact: -2.0 * v0.derivative(x),
            dv_dt: dv[i],
            dv_dt_exact: u0.eval(x) * v0.derivative(x) - v0.eval(x) * u0.derivative(x),
        })
        .collect()
}

type Trajectory = Vec<(f64, Matrix, Matrix)>;

fn matrix_trajectories(
    config: &ExperimentConfig,
    state: &RiemannState,
    flow: &FlowConfig,
) -> Vec<(String, Result<Trajectory, String>)> {
    let rep = state.rep();
    let ordering = match config.flow {
        FlowRule::Naive { ordering } => ordering,
        _ => ProductOrdering::Left,
    };
    let spec = config.casimir_spec().unwrap_or(CasimirSpec::new(2, 4));
    let mut out = Vec::new();
    let naive = integrate_naive(rep, state.u(), state.v(), ordering, flow)
        .map(|r| r.snapshots.into_iter().map(|s| (s.t, s.u, s.v)).collect())
        .map_err(|e| e.to_string());
    out.push((crate::commands::flow::rule_name(&FlowRule::Naive { ordering }), naive));
    let alpha = riemann_alpha(state);
    for (name, rule) in [
        (format!("casimir({},{})", spec.n, spec.k), GeneratorRule::Casimir(spec)),
        ("paper_b".to_string(), GeneratorRule::PaperB),
    ] {
        let traj = integrate_flow(&alpha, &rule, flow)
            .map(|r| r.snapshots.into_iter().map(|s| (s.t, s.alpha.coeff_or_zero(2), s.alpha.coeff_or_zero(1))).collect())
            .map_err(|e| e.to_string());
        out.push((name, traj));
    }
    out
}

pub fn pde_compare(config: &ExperimentConfig) -> LabResult<PdeReport> {
    let mut report = PdeReport::default();
    let flow = &config.integrator;
    let times = flow.snapshot_times();
    let ref_opts = lax_markov_core::ode::StepOptions {
        rtol: config.reference_rtol,
        atol: config.reference_rtol * 1e-2,
        max_step: flow.max_step,
        max_steps: flow.max_steps,
    };
    for mesh in config.sweep_meshes()? {
        let n = mesh.len();
        if n > MAX_FLOW_N {
            return Err(LabError::Config(format!("pde-compare is limited to N <= {MAX_FLOW_N}")));
        }
        let rep = build_quasirep(&mesh);
        let d = rep.nodal_differentiation();
        report.slopes.extend(slopes(&mesh, &d, &config.u0, &config.v0));

        let u0 = DVector::from_vec(mesh.sample(|x| config.u0.eval(x)).values().to_vec());
        let v0 = DVector::from_vec(mesh.sample(|x| config.v0.eval(x)).values().to_vec());
        let reference = reference_solve(&d, u0, v0, &times, ref_opts)?;
        let observer = Observer::new(&mesh);
        let (pu, pv) = (config.u0.clone(), config.v0.clone());
        let state = RiemannState::from_profiles(rep, move |x| pu.eval(x), move |x| pv.eval(x));

        for (method, traj) in matrix_trajectories(config, &state, flow) {
            match traj {
                Ok(traj) => {
                    let (mut max_u, mut max_v, mut last) = (0.0_f64, 0.0_f64, (0.0, 0.0));
                    for ((t, um, vm), (ur, vr)) in traj.iter().zip(&reference) {
                        let (eu, ev) = (observer.error(um, ur), observer.error(vm, vr));
                        max_u = max_u.max(eu);
                        max_v = max_v.max(ev);
                        last = (eu, ev);
                        report.error_vs_t.push(ErrorVsTRow { n, method: method.clone(), t: *t, err_u: eu, err_v: ev });
                    }
                    report.error_vs_n.push(ErrorVsNRow {
                        n,
                        method,
                        status: "ok".into(),
                        t_end: flow.t_end,
                        err_u: last.0,
                        err_v: last.1,
                        max_err_u: max_u,
                        max_err_v: max_v,
                    });
                }
                Err(e) => report.error_vs_n.push(ErrorVsNRow {
                    n,
                    method,
                    status: format!("failed: {e}"),
                    t_end: flow.t_end,
                    err_u: f64::NAN,
                    err_v: f64::NAN,
                    max_err_u: f64::NAN,
                    max_err_v: f64::NAN,
                }),
            }
        }
    }
    Ok(report)
}
