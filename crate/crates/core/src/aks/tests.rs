use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::calogero::{build_mesh, build_quasirep, Mesh, MeshSpec};
use crate::loopalg::loop_mul;
use crate::markov::project_m;
use crate::matrix::{commutator, frobenius, Matrix};

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
}

fn random_int_diag(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| f64::from(rng.random_range(-5i32..=5))))
}

fn riemann_from(u: &Matrix, v: &Matrix, z: &Matrix) -> LoopElement {
    let n = u.nrows();
    LoopElement::from_terms(n, [(3, Matrix::identity(n, n)), (2, u.clone()), (1, v.clone()), (0, z.clone())]).unwrap()
}

fn random_top_identity(rng: &mut ChaCha8Rng, n: usize, lo: i32, d: i32) -> LoopElement {
    let mut terms: Vec<(i32, Matrix)> = (lo..d).map(|e| (e, random_matrix(rng, n))).collect();
    terms.push((d, Matrix::identity(n, n)));
    LoopElement::from_terms(n, terms).unwrap()
}

#[test]
fn casimir_value_examples() {
    let a = LoopElement::scalar_monomial(3, 1);
    for n in 0..4 {
        for k in 0..4 {
            assert_eq!(casimir_value(&a, CasimirSpec::new(n, k)).unwrap(), 0.0);
        }
    }

    // A = I + Bλ⁻² paired with λ⁻¹ picks the λ⁰ coefficient I, so the value is tr I = N,
    // not 0; the B-dependent terms do drop out
    let b = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
    let alpha = LoopElement::from_terms(2, [(2, Matrix::identity(2, 2)), (0, b)]).unwrap();
    assert_eq!(casimir_value(&alpha, CasimirSpec::new(0, -3)).unwrap(), 2.0);
    assert_eq!(casimir_value(&alpha, CasimirSpec::new(0, -2)).unwrap(), 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (u, v, z) = (random_matrix(&mut rng, 3), random_matrix(&mut rng, 3), random_matrix(&mut rng, 3));
    let value = casimir_value(&riemann_from(&u, &v, &z), CasimirSpec::new(0, -3)).unwrap();
    assert!((value - u.trace()).abs() < 1e-14);

    assert_eq!(casimir_value(&LoopElement::zero(2), CasimirSpec::new(0, 0)), Err(Error::ZeroElement));
}

#[test]
fn gradient_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let alpha = random_top_identity(&mut rng, 3, -1, 2);
    assert_eq!(casimir_gradient(&alpha, CasimirSpec::new(0, 5)).unwrap(), LoopElement::scalar_monomial(3, 5));
    assert_eq!(casimir_gradient(&alpha, CasimirSpec::new(1, 0)).unwrap(), alpha.shift(-2));
}

/// `α² λ⁻²` for the Riemann element, expanded by hand.
fn hand_expanded_square(u: &Matrix, v: &Matrix, z: &Matrix) -> Vec<(i32, Matrix)> {
    let n = u.nrows();
    vec![
        (4, Matrix::identity(n, n)),
        (3, u * 2.0),
        (2, u * u + v * 2.0),
        (1, u * v + v * u + z * 2.0),
        (0, u * z + z * u + v * v),
        (-1, v * z + z * v),
        (-2, z * z),
    ]
}

#[test]
fn generator_24_matches_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 3;
    let (u, v, z) = (random_int_diag(&mut rng, n), random_int_diag(&mut rng, n), random_matrix(&mut rng, n));
    let alpha = riemann_from(&u, &v, &z);
    let spec = CasimirSpec::new(2, 4);

    let grad = casimir_gradient(&alpha, spec).unwrap();
    for (e, expected) in hand_expanded_square(&u, &v, &z) {
        assert!(frobenius(&(grad.coeff_or_zero(e) - expected)) < 1e-12, "gradient at λ^{e}");
    }

    let g = aks_generator(&alpha, spec).unwrap();
    assert_eq!(g.min_exponent(), Some(0));
    for (e, expected) in hand_expanded_square(&u, &v, &z).into_iter().filter(|(e, _)| *e >= 0) {
        let expected = if e == 0 { project_m(&expected) } else { expected };
        assert!(frobenius(&(g.coeff_or_zero(e) - expected)) < 1e-12, "generator at λ^{e}");
    }
    let col_sums = g.coeff_or_zero(0).row_sum();
    assert!(col_sums.amax() < 1e-12);

    let field = lax_field(&alpha, &g).unwrap();
    for e in [7, 6, 5] {
        assert!(frobenius(&field.coeff_or_zero(e)) < 1e-12, "λ^{e} should vanish");
    }
    // the field is the full product expansion
    let direct = loop_mul(&g, &alpha).unwrap().sub(&loop_mul(&alpha, &g).unwrap()).unwrap();
    assert!(field.sub(&direct).unwrap().norm() < 1e-12);
}

#[test]
fn trivial_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let alpha = random_top_identity(&mut rng, 3, 0, 3);
    assert_eq!(aks_generator(&alpha, CasimirSpec::new(0, 2)).unwrap(), LoopElement::scalar_monomial(3, 2));

    let z = random_matrix(&mut rng, 3);
    let alpha = LoopElement::from_terms(3, [(3, Matrix::identity(3, 3)), (0, z)]).unwrap();
    assert!(aks_generator(&alpha, CasimirSpec::new(1, 0)).unwrap().is_zero());

    assert!(lax_field(&alpha, &alpha).unwrap().norm() < 1e-14);
    assert!(lax_field(&alpha, &LoopElement::scalar_monomial(3, 4)).unwrap().is_zero());
    assert!(matches!(
        lax_field(&alpha, &LoopElement::identity(2)),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn casimir_defect_vanishes_and_perturbation_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (u, v, z) = (random_matrix(&mut rng, 4), random_matrix(&mut rng, 4), random_matrix(&mut rng, 4));
    let alpha = riemann_from(&u, &v, &z);
    for n in 0..=3 {
        for k in -2..=5 {
            let spec = CasimirSpec::new(n, k);
            let scale = alpha.norm() * casimir_gradient(&alpha, spec).unwrap().norm();
            assert!(casimir_defect(&alpha, spec).unwrap() <= 1e-12 * scale, "{spec:?}");
        }
    }

    let grad = casimir_gradient(&alpha, CasimirSpec::new(2, 4)).unwrap();
    let w = LoopElement::monomial(1, random_matrix(&mut rng, 4)).unwrap();
    let defect = |eps: f64| loop_bracket(&grad.add(&w.scale(eps)).unwrap(), &alpha).unwrap().norm();
    let (d1, d2) = (defect(1e-3), defect(2e-3));
    assert!(d1 > 1e-6);
    assert!((d2 / d1 - 2.0).abs() < 1e-6);
}

#[test]
fn involutivity_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let alpha = random_top_identity(&mut rng, 3, 0, 3);
    let s = CasimirSpec::new(2, 4);
    assert!(involutivity_defect(&alpha, s, s).unwrap() < 1e-12 * involutivity_scale(&alpha, s, s).unwrap());

    let scalar = LoopElement::scalar_monomial(3, 2);
    assert_eq!(involutivity_defect(&scalar, CasimirSpec::new(1, 2), CasimirSpec::new(3, 1)).unwrap(), 0.0);

    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let alpha = random_top_identity(&mut rng, 4, 0, 3);
        let (s1, s2) = (CasimirSpec::new(1, 2), CasimirSpec::new(2, 4));
        let defect = involutivity_defect(&alpha, s1, s2).unwrap();
        assert!(defect <= 1e-9 * involutivity_scale(&alpha, s1, s2).unwrap(), "seed {seed}: {defect}");
    }
}

fn two_point_rep() -> crate::calogero::QuasiRep {
    build_quasirep(&Mesh::from_nodes(vec![0.0, 1.0]).unwrap())
}

#[test]
fn riemann_alpha_examples() {
    let rep = two_point_rep();
    let state = RiemannState::from_profiles(rep.clone(), |x| x, |x| 2.0 * x);
    let alpha = riemann_alpha(&state);
    assert_eq!(degree(&alpha).unwrap(), 3);
    assert_eq!(alpha.coeff_or_zero(3), Matrix::identity(2, 2));
    assert_eq!(alpha.coeff_or_zero(2), Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
    assert_eq!(alpha.coeff_or_zero(1), Matrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 2.0]));
    assert_eq!(alpha.coeff_or_zero(0), Matrix::from_row_slice(2, 2, &[-1.0, -1.0, 1.0, 1.0]));

    let zero = RiemannState::new(rep.clone(), Matrix::zeros(2, 2), Matrix::zeros(2, 2)).unwrap();
    let expected = LoopElement::from_terms(2, [(3, Matrix::identity(2, 2)), (0, rep.z().clone())]).unwrap();
    assert_eq!(riemann_alpha(&zero), expected);

    assert!(matches!(
        RiemannState::new(rep.clone(), Matrix::zeros(3, 3), Matrix::zeros(3, 3)),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(RiemannState::new(rep, Matrix::from_element(2, 2, 1.0), Matrix::zeros(2, 2)).is_err());
}

#[test]
fn paper_generator_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let z = random_matrix(&mut rng, 3);
    let b = paper_generator_b(&Matrix::zeros(3, 3), &z).unwrap();
    let expected = LoopElement::from_terms(3, [(3, Matrix::identity(3, 3)), (1, &z * 1.5)]).unwrap();
    assert_eq!(b, expected);

    let i = Matrix::identity(3, 3);
    let b = paper_generator_b(&i, &Matrix::zeros(3, 3)).unwrap();
    let expected = LoopElement::from_terms(3, [(3, i.clone()), (2, &i * 1.5), (1, &i * -0.375), (0, &i * -0.0625)]).unwrap();
    assert_eq!(b, expected);

    let sym = |m: Matrix| &m + m.transpose();
    let (u, z) = (sym(random_matrix(&mut rng, 3)), sym(random_matrix(&mut rng, 3)));
    let c0 = paper_generator_b(&u, &z).unwrap().coeff_or_zero(0);
    assert!(frobenius(&(&c0 - c0.transpose())) < 1e-14);

    assert!(paper_generator_b(&u, &Matrix::zeros(2, 2)).is_err());
}

#[test]
fn paper_residual_examples() {
    let rep = build_quasirep(&build_mesh(&MeshSpec::Explicit { nodes: vec![-1.0, 0.0, 1.0] }).unwrap());
    let zero = RiemannState::new(rep.clone(), Matrix::zeros(3, 3), Matrix::zeros(3, 3)).unwrap();
    let r = paper_rhs_residuals(&zero).unwrap();
    assert!(r.lambda3_coefficient < 1e-14 && r.du_mismatch < 1e-14 && r.dv_mismatch < 1e-14);
    assert_eq!(r.m_v_squared, 0.0);

    let scalar = RiemannState::new(rep.clone(), Matrix::identity(3, 3) * 2.5, Matrix::zeros(3, 3)).unwrap();
    let r = paper_rhs_residuals(&scalar).unwrap();
    assert!(r.lambda3_coefficient < 1e-13);

    // diagonal V gives M(V²) = 0, and then the printed generator is exact
    let state = RiemannState::from_profiles(rep.clone(), |x| 1.0 + x, |x| 2.0 - x * x);
    let r = paper_rhs_residuals(&state).unwrap();
    assert_eq!(r.m_v_squared, 0.0);
    assert!(r.generator_mismatch <= 1e-13 * r.scale);
    assert!((r.lambda3_coefficient - r.lambda3_closed_form).abs() <= 1e-12 * r.scale);
    assert!(r.lambda3_coefficient > 1e-3, "the λ³ term does not vanish for generic data");

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let full = |rng: &mut ChaCha8Rng| Matrix::from_fn(3, 3, |_, _| f64::from(rng.random_range(-5i32..=5)));
    let (u, v) = (full(&mut rng), full(&mut rng));
    let r = paper_residuals(&u, &v, rep.z()).unwrap();
    assert!(r.m_v_squared > 1.0);
    assert!((r.generator_mismatch - r.m_v_squared).abs() <= 1e-12 * r.m_v_squared);

    // closed form of (a) cross-checked directly
    let z = rep.z();
    let direct = 1.5 * frobenius(&(commutator(&u, &v) + commutator(z, &u)));
    assert!((direct - r.lambda3_closed_form).abs() <= 1e-14 * direct);
    assert!((r.lambda3_coefficient - direct).abs() <= 1e-12 * r.scale);
}

#[test]
fn gradient_fd_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let alpha = random_top_identity(&mut rng, 3, -1, 3);
    let spec = CasimirSpec::new(2, 4);

    let zero = gradient_fd_check(&alpha, spec, &LoopElement::zero(3)).unwrap();
    assert_eq!(zero.abs_error, 0.0);

    let top_free = alpha.restrict(i32::MIN, 2);
    let c = gradient_fd_check(&alpha, spec, &top_free).unwrap();
    assert!(c.rel_error <= 1e-8, "{c:?}");

    for _ in 0..10 {
        let beta = LoopElement::from_terms(3, (0..=2).map(|e| (e, random_matrix(&mut rng, 3)))).unwrap();
        for n in 1..=3 {
            let c = gradient_fd_check(&alpha, CasimirSpec::new(n, 3), &beta).unwrap();
            assert!(c.rel_error <= 1e-6, "{c:?}");
        }
    }

    let raises = LoopElement::scalar_monomial(3, 4);
    assert_eq!(gradient_fd_check(&alpha, spec, &raises), Err(Error::DegreeChanged { degree: 3 }));
}

#[test]
fn scaled_direction_gradient() {
    // γ(α + εα) with top I moved: use β equal to all coefficients below the top and
    // compare with the derivative of the scalar function directly
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let alpha = random_top_identity(&mut rng, 2, 0, 2);
    let beta = alpha.restrict(0, 1);
    let spec = CasimirSpec::new(3, 2);
    let g = |eps: f64| casimir_value(&alpha.add(&beta.scale(eps)).unwrap(), spec).unwrap();
    let h = 1e-4;
    let richardson = (8.0 * (g(h) - g(-h)) - (g(2.0 * h) - g(-2.0 * h))) / (12.0 * h);
    let analytic = pairing(&casimir_gradient(&alpha, spec).unwrap(), &beta).unwrap();
    assert!((richardson - analytic).abs() <= 1e-8 * (1.0 + analytic.abs()));
}

fn riemann_state(n: usize) -> RiemannState {
    let mesh = build_mesh(&MeshSpec::Chebyshev { n, interval: [-1.0, 1.0] }).unwrap();
    RiemannState::from_profiles(build_quasirep(&mesh), f64::sin, f64::cos)
}

#[test]
fn zero_generator_keeps_trajectory_constant() {
    let alpha = riemann_alpha(&riemann_state(4));
    let config = FlowConfig { snapshot_count: 3, ..Default::default() };
    let result = integrate_flow(&alpha, &GeneratorRule::Fixed(LoopElement::zero(4)), &config).unwrap();
    assert_eq!(result.snapshots.len(), 3);
    for s in &result.snapshots {
        assert_eq!(s.alpha, alpha);
    }
    assert_eq!(result.report.max_invariant_rel_drift(), 0.0);
    assert_eq!(result.report.max_eigen_rel_drift(), 0.0);
}

#[test]
fn diagonal_alpha_is_stationary() {
    let n = 3;
    let d = |s: f64| Matrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| s * (i as f64 + 1.0)));
    let alpha = LoopElement::from_terms(n, [(3, Matrix::identity(n, n)), (2, d(1.0)), (1, d(-0.5)), (0, d(2.0))]).unwrap();
    let config = FlowConfig { snapshot_count: 2, ..Default::default() };
    let result = integrate_flow(&alpha, &GeneratorRule::Casimir(CasimirSpec::new(2, 4)), &config).unwrap();
    assert_eq!(result.snapshots.last().unwrap().alpha, alpha);
}

#[test]
fn riemann_flow_conserves_invariants() {
    let config = FlowConfig { t_end: 0.2, snapshot_count: 3, ..Default::default() };
    for n in [3, 8] {
        let alpha = riemann_alpha(&riemann_state(n));
        let t_end = if n == 3 { 0.5 } else { 0.2 };
        let config = FlowConfig { t_end, ..config.clone() };
        for rule in [GeneratorRule::Casimir(CasimirSpec::new(2, 4)), GeneratorRule::PaperB] {
            let result = integrate_flow(&alpha, &rule, &config).unwrap();
            let report = &result.report;
            assert!(report.max_invariant_rel_drift() <= 1e-6, "{rule:?}: {}", report.max_invariant_rel_drift());
            assert!(report.max_eigen_rel_drift() <= 1e-6, "{rule:?}: {}", report.max_eigen_rel_drift());
            let last = &result.snapshots.last().unwrap().alpha;
            assert!(last.restrict(0, 3).sub(&alpha).unwrap().norm() > 1e-3, "the flow moves");
            assert!(report.invariants.iter().all(|d| d.max_abs_drift >= 0.0));
            assert_eq!(report.rows.len(), config.snapshot_count * report.invariants.len());
        }
    }
}

#[test]
fn casimir_window_is_closed_and_paper_b_is_not() {
    let alpha = riemann_alpha(&riemann_state(4));
    let config = FlowConfig { t_end: 0.05, snapshot_count: 2, ..Default::default() };
    let casimir = integrate_flow(&alpha, &GeneratorRule::Casimir(CasimirSpec::new(2, 4)), &config).unwrap();
    assert_eq!(casimir.window, (0, 3));
    assert!(casimir.report.window_leakage < 1e-9);
    let last = &casimir.snapshots[1].alpha;
    assert!(frobenius(&(last.coeff_or_zero(3) - Matrix::identity(4, 4))) < 1e-10);

    let paper = integrate_flow(&alpha, &GeneratorRule::PaperB, &config).unwrap();
    assert_eq!(paper.window, (0, 12));
    // the top coefficient leaves I at the rate of residual (a)
    let top = paper.snapshots[1].alpha.coeff_or_zero(3);
    assert!(frobenius(&(top - Matrix::identity(4, 4))) > 1e-3);
}

#[test]
fn riemann_flow_on_unit_interval_breaks_down_before_t1() {
    // the exact solution leaves every bounded set near t ≈ 0.23; the integrator must
    // report that instead of returning a trajectory
    let alpha = riemann_alpha(&riemann_state(8));
    let config = FlowConfig { max_steps: 20_000, ..Default::default() };
    let err = integrate_flow(&alpha, &GeneratorRule::Casimir(CasimirSpec::new(2, 4)), &config).unwrap_err();
    match err {
        Error::StepSizeUnderflow { t } | Error::MaxStepsExceeded { t, .. } => assert!(t > 0.2 && t < 0.3, "{t}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn power_sum_roots_recover_spectrum() {
    let m = Matrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, -1.0, 3.0, 1.0, 0.0, 0.5]);
    let direct = m.complex_eigenvalues();
    let p: Vec<f64> = (1..=3).map(|k| m.pow(k).trace()).collect();
    let from_sums = super::flow::polynomial_roots_from_power_sums(&p);
    for z in direct.iter() {
        assert!(from_sums.iter().any(|w| (w - z).norm() < 1e-10), "{z}");
    }
}

#[test]
fn flow_rejects_bad_input() {
    let config = FlowConfig::default();
    let rule = GeneratorRule::Casimir(CasimirSpec::new(2, 4));
    assert_eq!(integrate_flow(&LoopElement::zero(2), &rule, &config).unwrap_err(), Error::ZeroElement);
    let bad = FlowConfig { rtol: -1.0, ..Default::default() };
    assert!(integrate_flow(&LoopElement::identity(2), &rule, &bad).is_err());
    let bad = FlowConfig { t_end: f64::NAN, ..Default::default() };
    assert!(bad.validate().is_err());
}

#[test]
fn flow_config_serde_defaults() {
    let c: FlowConfig = serde_json::from_str(r#"{"t_end": 0.5}"#).unwrap();
    assert_eq!(c.t_end, 0.5);
    assert_eq!(c.lambda_samples, vec![-2.0, -1.0, 1.0, 2.0]);
    assert!(serde_json::from_str::<FlowConfig>(r#"{"tend": 0.5}"#).is_err());
    assert_eq!(c.snapshot_times().last(), Some(&0.5));
}
