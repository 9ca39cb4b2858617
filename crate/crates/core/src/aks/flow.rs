//! Time integration of `dα/dt = [G(α), α]` with conservation monitoring.

use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::loopalg::{degree, loop_bracket, loop_mul, LoopElement};
use crate::ode::{Dopri5, StepOptions, StepStats};
use crate::{Error, Result};

use super::riemann::paper_generator_b;
use super::{aks_generator, CasimirSpec};

/// Integration and monitoring parameters for [`integrate_flow`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
    /// Largest power `m` whose `tr(αᵐ)` coefficients are tracked.
    pub invariants_m_max: u32,
    /// Number of equally spaced snapshots, both ends included.
    pub snapshot_count: usize,
    /// Real points `λ*` at which the spectrum of `α(λ*)` is tracked.
    pub lambda_samples: Vec<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            t_end: 1.0,
            rtol: 1e-9,
            atol: 1e-12,
            max_step: 0.1,
            max_steps: 100_000,
            invariants_m_max: 4,
            snapshot_count: 11,
            lambda_samples: vec![-2.0, -1.0, 1.0, 2.0],
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad("t_end must be finite and nonnegative");
        }
        if self.snapshot_count < 2 {
            return bad("snapshot_count must be at least 2");
        }
        if self.invariants_m_max == 0 {
            return bad("invariants_m_max must be at least 1");
        }
        if self.lambda_samples.iter().any(|l| !l.is_finite() || *l == 0.0) {
            return bad("lambda samples must be finite and nonzero");
        }
        self.step_options().validate()
    }

    pub fn step_options(&self) -> StepOptions {
        StepOptions { rtol: self.rtol, atol: self.atol, max_step: self.max_step, max_steps: self.max_steps }
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        let last = self.snapshot_count - 1;
        (0..=last)
            .map(|i| if i == last { self.t_end } else { self.t_end * i as f64 / last as f64 })
            .collect()
    }
}

/// How the generator `G(α)` is chosen at every instant.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorRule {
    /// `G = P₊∇γ_n^{(k)}(α)`.
    Casimir(CasimirSpec),
    /// A constant generator.
    Fixed(LoopElement),
    /// The hand-derived generator `B(U, Z)`, with `U` and `Z` read off the current
    /// `λ²` and `λ⁰` coefficients.
    PaperB,
}

impl GeneratorRule {
    pub fn generator(&self, alpha: &LoopElement) -> Result<LoopElement> {
        match self {
            GeneratorRule::Casimir(spec) => aks_generator(alpha, *spec),
            GeneratorRule::Fixed(g) => Ok(g.clone()),
            GeneratorRule::PaperB => paper_generator_b(&alpha.coeff_or_zero(2), &alpha.coeff_or_zero(0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub alpha: LoopElement,
}

/// Drift of one `λ`-coefficient of `tr(αᵐ)` over a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantDrift {
    pub m: u32,
    pub exponent: i32,
    pub initial: f64,
    pub max_abs_drift: f64,
    /// `max_abs_drift / max(|initial|, largest |initial| among the coefficients of the same m)`.
    pub max_rel_drift: f64,
}

/// Drift of one eigenvalue of `α(λ*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenDrift {
    pub lambda: f64,
    pub index: usize,
    pub initial: Complex<f64>,
    pub max_abs_drift: f64,
    /// Relative to the initial spectral radius of `α(λ*)`.
    pub max_rel_drift: f64,
}

/// One line of the conservation table: an invariant's value at a snapshot time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationRow {
    pub t: f64,
    pub invariant_id: String,
    pub m: u32,
    pub exponent: i32,
    pub value: f64,
    pub abs_drift: f64,
    pub rel_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConservationReport {
    pub invariants: Vec<InvariantDrift>,
    pub eigenvalues: Vec<EigenDrift>,
    pub rows: Vec<ConservationRow>,
    /// Largest norm of the vector field outside the integrated exponent window.
    pub window_leakage: f64,
}

impl ConservationReport {
    pub fn max_invariant_rel_drift(&self) -> f64 {
        self.invariants.iter().map(|d| d.max_rel_drift).fold(0.0, f64::max)
    }

    pub fn max_eigen_rel_drift(&self) -> f64 {
        self.eigenvalues.iter().map(|d| d.max_rel_drift).fold(0.0, f64::max)
    }
}

struct SpectrumTrack {
    lambda: f64,
    initial: Vec<Complex<f64>>,
    current: Vec<Complex<f64>>,
    radius: f64,
    max_drift: Vec<f64>,
}

/// Where sampled spectra are read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    /// Eigenvalues of the matrix `α(λ*)`.
    Direct,
    /// The state is a truncated series whose exact continuation has `tr(αᵐ)` supported
    /// on `m·lo ..= m·hi`. The characteristic polynomial of `α(λ*)` is rebuilt from
    /// those power sums (Newton's identities) and its roots are returned.
    PowerSums { lo: i32, hi: i32 },
}

/// Spectra of `α(λ*)` for every sample point, in the order of `lambdas`.
fn spectra_at(alpha: &LoopElement, lambdas: &[f64], source: SpectrumSource) -> Vec<Vec<Complex<f64>>> {
    match source {
        SpectrumSource::Direct => lambdas
            .iter()
            .map(|&l| alpha.evaluate(l).complex_eigenvalues().iter().copied().collect())
            .collect(),
        SpectrumSource::PowerSums { lo, hi } => {
            let n = alpha.size() as u32;
            let traces = trace_power_coefficients(alpha, n, Some(series_cap(lo, hi, n)));
            lambdas
                .iter()
                .map(|&l| {
                    let p: Vec<f64> = traces
                        .iter()
                        .zip(1..)
                        .map(|(c, m)| c.range(m * lo..=m * hi).map(|(&e, v)| v * l.powi(e)).sum())
                        .collect();
                    polynomial_roots_from_power_sums(&p)
                })
                .collect()
        }
    }
}

/// Highest exponent of a truncated series that can feed the `m·lo ..= m·hi` range of
/// `tr(αᵐ)` for `m ≤ powers`.
fn series_cap(lo: i32, hi: i32, powers: u32) -> i32 {
    hi + (powers as i32 - 1) * (hi - lo)
}

/// Roots of `μⁿ − e₁μⁿ⁻¹ + e₂μⁿ⁻² − …` where `e_k` follow from the power sums `p`.
pub(super) fn polynomial_roots_from_power_sums(p: &[f64]) -> Vec<Complex<f64>> {
    let n = p.len();
    let mut e = vec![1.0];
    for k in 1..=n {
        let s: f64 = (1..=k).map(|i| if i % 2 == 1 { 1.0 } else { -1.0 } * e[k - i] * p[i - 1]).sum();
        e.push(s / k as f64);
    }
    // companion matrix of μⁿ + a₁μⁿ⁻¹ + … + aₙ with a_k = (−1)ᵏ e_k
    let companion = crate::Matrix::from_fn(n, n, |i, j| {
        if i == 0 {
            let k = j + 1;
            -(if k % 2 == 1 { -e[k] } else { e[k] })
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion.complex_eigenvalues().iter().copied().collect()
}

/// Greedy nearest-neighbour pairing: returns `new` reordered to follow `prev`.
fn match_to(prev: &[Complex<f64>], new: &[Complex<f64>]) -> Vec<Complex<f64>> {
    let mut pairs: Vec<(f64, usize, usize)> = prev
        .iter()
        .enumerate()
        .flat_map(|(i, p)| new.iter().enumerate().map(move |(j, q)| ((p - q).norm(), i, j)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = vec![Complex::new(f64::NAN, f64::NAN); prev.len()];
    let (mut used_prev, mut used_new) = (vec![false; prev.len()], vec![false; new.len()]);
    for (_, i, j) in pairs {
        if !used_prev[i] && !used_new[j] {
            used_prev[i] = true;
            used_new[j] = true;
            out[i] = new[j];
        }
    }
    out
}

/// Tracks trace-power coefficients and sampled spectra along a trajectory.
///
/// Only the coefficients of `tr(αᵐ)` on the exponent range spanned by the initial
/// state are tracked. Every observed state must have the initial matrix size.
pub struct ConservationTracker {
    m_max: u32,
    source: SpectrumSource,
    initial: Vec<BTreeMap<i32, f64>>,
    family_scale: Vec<f64>,
    max_abs: Vec<BTreeMap<i32, f64>>,
    spectra: Vec<SpectrumTrack>,
    rows: Vec<ConservationRow>,
}

/// Coefficients of `tr(αᵐ)` for `m = 1..=m_max`; with `cap`, powers are truncated above
/// that exponent as they are built.
fn trace_power_coefficients(alpha: &LoopElement, m_max: u32, cap: Option<i32>) -> Vec<BTreeMap<i32, f64>> {
    let mut power = LoopElement::identity(alpha.size());
    (1..=m_max)
        .map(|_| {
            power = loop_mul(&power, alpha).expect("same size");
            if let Some(cap) = cap {
                power = power.restrict(i32::MIN, cap);
            }
            power.terms().map(|(j, a)| (j, a.trace())).collect()
        })
        .collect()
}

impl ConservationTracker {
    pub fn new(alpha0: &LoopElement, m_max: u32, lambda_samples: &[f64], source: SpectrumSource) -> Self {
        let lo = alpha0.min_exponent().unwrap_or(0);
        let hi = alpha0.max_exponent().unwrap_or(0);
        let raw = trace_power_coefficients(alpha0, m_max, None);
        let initial: Vec<BTreeMap<i32, f64>> = raw
            .iter()
            .zip(1..)
            .map(|(coeffs, m)| {
                (m * lo..=m * hi).map(|e| (e, coeffs.get(&e).copied().unwrap_or(0.0))).collect()
            })
            .collect();
        let family_scale = initial.iter().map(|c| c.values().fold(0.0_f64, |s, v| s.max(v.abs()))).collect();
        let max_abs = initial.iter().map(|c| c.keys().map(|&e| (e, 0.0)).collect()).collect();
        let spectra = lambda_samples
            .iter()
            .zip(spectra_at(alpha0, lambda_samples, source))
            .map(|(&lambda, mut eig)| {
                eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
                let radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
                SpectrumTrack { lambda, max_drift: vec![0.0; eig.len()], current: eig.clone(), initial: eig, radius }
            })
            .collect();
        ConservationTracker { m_max, source, initial, family_scale, max_abs, spectra, rows: Vec::new() }
    }
    fn rel(&self, m_index: usize, initial: f64, abs: f64) -> f64 {
        let denom = initial.abs().max(self.family_scale[m_index]);
        if denom > 0.0 {
            abs / denom
        } else {
            abs
        }
    }

    /// Records the state after an accepted step; with `snapshot` the per-invariant
    /// values are also kept as table rows.
    pub fn observe(&mut self, t: f64, alpha: &LoopElement, snapshot: bool) {
        let cap = match self.source {
            SpectrumSource::Direct => None,
            SpectrumSource::PowerSums { lo, hi } => Some(series_cap(lo, hi, self.m_max)),
        };
        let coeffs = trace_power_coefficients(alpha, self.m_max, cap);
        for (mi, c) in coeffs.iter().enumerate() {
            let m = mi as u32 + 1;
            for (&e, &v0) in &self.initial[mi] {
                let value = c.get(&e).copied().unwrap_or(0.0);
                let abs = (value - v0).abs();
                let slot = self.max_abs[mi].get_mut(&e).expect("same keys");
                *slot = slot.max(if abs.is_nan() { f64::INFINITY } else { abs });
                if snapshot {
                    let rel_drift = self.rel(mi, v0, abs);
                    self.rows.push(ConservationRow {
                        t,
                        invariant_id: format!("tr{m}@{e}"),
                        m,
                        exponent: e,
                        value,
                        abs_drift: abs,
                        rel_drift,
                    });
                }
            }
        }
        // power-sum spectra need all N powers of a long series; read them at snapshots only
        if !snapshot && self.source != SpectrumSource::Direct {
            return;
        }
        let lambdas: Vec<f64> = self.spectra.iter().map(|t| t.lambda).collect();
        for (track, eig) in self.spectra.iter_mut().zip(spectra_at(alpha, &lambdas, self.source)) {
            track.current = match_to(&track.current, &eig);
            for ((now, init), worst) in track.current.iter().zip(&track.initial).zip(&mut track.max_drift) {
                let d = (now - init).norm();
                *worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
            }
        }
    }

    pub fn finish(self, window_leakage: f64) -> ConservationReport {
        let mut invariants = Vec::new();
        for (mi, init) in self.initial.iter().enumerate() {
            for (&e, &v0) in init {
                let abs = self.max_abs[mi][&e];
                invariants.push(InvariantDrift {
                    m: mi as u32 + 1,
                    exponent: e,
                    initial: v0,
                    max_abs_drift: abs,
                    max_rel_drift: self.rel(mi, v0, abs),
                });
            }
        }
        let eigenvalues = self
            .spectra
            .iter()
            .flat_map(|track| {
                track.initial.iter().zip(&track.max_drift).enumerate().map(move |(index, (init, &abs))| EigenDrift {
                    lambda: track.lambda,
                    index,
                    initial: *init,
                    max_abs_drift: abs,
                    max_rel_drift: if track.radius > 0.0 { abs / track.radius } else { abs },
                })
            })
            .collect();
        ConservationReport { invariants, eigenvalues, rows: self.rows, window_leakage }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult {
    pub snapshots: Vec<Snapshot>,
    pub report: ConservationReport,
    pub stats: StepStats,
    /// Exponent range `lo..=hi` carried by the integrated state.
    pub window: (i32, i32),
}

/// Fixed exponent window `lo..=hi` flattened row-major, coefficient by coefficient.
struct Layout {
    size: usize,
    lo: i32,
    hi: i32,
}

impl Layout {
    fn dim(&self) -> usize {
        (self.hi - self.lo + 1) as usize * self.size * self.size
    }

    fn flatten(&self, x: &LoopElement) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for e in self.lo..=self.hi {
            let c = x.coeff_or_zero(e);
            out.extend(c.transpose().iter());
        }
        out
    }

    fn unflatten(&self, y: &[f64]) -> LoopElement {
        let block = self.size * self.size;
        let terms = (self.lo..=self.hi).zip(y.chunks(block)).map(|(e, chunk)| {
            (e, crate::Matrix::from_row_slice(self.size, self.size, chunk))
        });
        LoopElement::from_terms(self.size, terms).expect("square blocks")
    }
}

/// The exponent window integrated for `rule`, and how spectra are read from it.
///
/// Casimir fields stay on the support of `alpha0` (the field equals `−[P₋∇γ, α]`).
/// Other generators may push coefficients upward; when the generator has no negative
/// powers, coefficient `e` of the field depends only on coefficients `≤ e` of `α`, so a
/// window cut off at `hi` evolves everything inside it exactly. The cut-off is chosen
/// high enough to carry every power sum `tr(αᵐ)` needed for the tracked invariants and
/// for the characteristic polynomial.
fn window_for(alpha0: &LoopElement, rule: &GeneratorRule, m_max: u32) -> (i32, i32, SpectrumSource) {
    let lo = alpha0.min_exponent().expect("nonzero");
    let hi = alpha0.max_exponent().expect("nonzero");
    match rule {
        GeneratorRule::Casimir(_) => (lo, hi, SpectrumSource::Direct),
        GeneratorRule::Fixed(_) | GeneratorRule::PaperB => {
            let powers = m_max.max(alpha0.size() as u32);
            (lo, series_cap(lo, hi, powers), SpectrumSource::PowerSums { lo, hi })
        }
    }
}

/// Integrates `dα/dt = [G(α), α]` from `alpha0` over `[0, t_end]`.
///
/// The state is the coefficient map of `α` on a fixed exponent window (see
/// [`FlowResult::window`]). Field components outside the window are dropped and their
/// largest norm is reported as `window_leakage`.
pub fn integrate_flow(alpha0: &LoopElement, rule: &GeneratorRule, config: &FlowConfig) -> Result<FlowResult> {
    config.validate()?;
    degree(alpha0)?;
    if let GeneratorRule::Fixed(g) = rule {
        if g.size() != alpha0.size() {
            return Err(Error::DimensionMismatch { expected: alpha0.size(), found: g.size() });
        }
    }
    let (lo, hi, source) = window_for(alpha0, rule, config.invariants_m_max);
    let layout = Layout { size: alpha0.size(), lo, hi };
    let leakage = Cell::new(0.0_f64);
    let failure: RefCell<Option<Error>> = RefCell::new(None);

    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let alpha = layout.unflatten(y);
        let field = rule.generator(&alpha).and_then(|g| loop_bracket(&g, &alpha));
        match field {
            Ok(field) => {
                let below = field.restrict(i32::MIN, layout.lo - 1).norm();
                let above = field.restrict(layout.hi + 1, i32::MAX).norm();
                leakage.set(leakage.get().max(below.hypot(above)));
                dy.copy_from_slice(&layout.flatten(&field));
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                dy.fill(f64::NAN);
            }
        }
    };

    let mut tracker = ConservationTracker::new(alpha0, config.invariants_m_max, &config.lambda_samples, source);
    tracker.observe(0.0, alpha0, true);
    let mut snapshots = vec![Snapshot { t: 0.0, alpha: alpha0.clone() }];
    let mut solver = Dopri5::new(rhs, 0.0, layout.flatten(alpha0), config.step_options())?;
    for &t in &config.snapshot_times()[1..] {
        let advanced = solver.advance_to(t, |ts, y| {
            if ts < t {
                tracker.observe(ts, &layout.unflatten(y), false);
            }
        });
        if let Err(e) = advanced {
            return Err(failure.borrow_mut().take().unwrap_or(e));
        }
        let alpha = layout.unflatten(solver.y());
        tracker.observe(t, &alpha, true);
        snapshots.push(Snapshot { t, alpha });
    }
    let stats = solver.stats();
    drop(solver);
    Ok(FlowResult { snapshots, report: tracker.finish(leakage.get()), stats, window: (lo, hi) })
}
