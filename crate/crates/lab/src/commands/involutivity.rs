//! Involutivity of the Casimir family under the R-bracket at seeded random
//! `α = λ³I + λ²A₂ + λA₁ + A₀`.

use lax_markov_core::aks::{casimir_defect, casimir_gradient, involutivity_defect, involutivity_scale, CasimirSpec};
use lax_markov_core::loopalg::LoopElement;
use lax_markov_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ExperimentConfig, InvolutivityConfig};
use crate::error::LabResult;

#[derive(Debug, Clone, Serialize)]
pub struct PairRow {
    pub sample: usize,
    pub n1: u32,
    pub k1: i32,
    pub n2: u32,
    pub k2: i32,
    pub defect: f64,
    pub scale: f64,
    pub rel_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CasimirRow {
    pub sample: usize,
    pub n: u32,
    pub k: i32,
    pub defect: f64,
    pub scale: f64,
    pub rel_defect: f64,
}

#[derive(Debug, Clone)]
pub struct InvolutivityReport {
    pub pairs: Vec<PairRow>,
    pub casimirs: Vec<CasimirRow>,
}

impl InvolutivityReport {
    pub fn max_rel_defect(&self) -> f64 {
        self.pairs.iter().map(|r| r.rel_defect).fold(0.0, f64::max)
    }

    pub fn max_casimir_rel_defect(&self) -> f64 {
        self.casimirs.iter().map(|r| r.rel_defect).fold(0.0, f64::max)
    }
}

/// The grid `n ≤ n_max`, `0 ≤ k ≤ k_max`.
pub fn spec_grid(settings: &InvolutivityConfig) -> Vec<CasimirSpec> {
    (0..=settings.n_max).flat_map(|n| (0..=settings.k_max).map(move |k| CasimirSpec::new(n, k))).collect()
}

pub fn random_alpha(rng: &mut impl Rng, size: usize, bound: f64) -> LoopElement {
    let mut terms = vec![(3, Matrix::identity(size, size))];
    for e in 0..3 {
        terms.push((e, Matrix::from_fn(size, size, |_, _| rng.random_range(-bound..=bound))));
    }
    LoopElement::from_terms(size, terms).expect("coefficients share a size")
}

fn relative(defect: f64, scale: f64) -> f64 {
    defect / scale.max(1.0)
}

pub fn involutivity(config: &ExperimentConfig) -> LabResult<InvolutivityReport> {
    let settings = &config.involutivity;
    let specs = spec_grid(settings);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut report = InvolutivityReport { pairs: Vec::new(), casimirs: Vec::new() };
    for sample in 0..settings.samples {
        let alpha = random_alpha(&mut rng, settings.size, settings.entry_bound);
        for &s in &specs {
            let defect = casimir_defect(&alpha, s)?;
            let scale = alpha.norm() * casimir_gradient(&alpha, s)?.norm();
            report.casimirs.push(CasimirRow { sample, n: s.n, k: s.k, defect, scale, rel_defect: relative(defect, scale) });
        }
        for (i, &s1) in specs.iter().enumerate() {
            for &s2 in &specs[i..] {
                let defect = involutivity_defect(&alpha, s1, s2)?;
                let scale = involutivity_scale(&alpha, s1, s2)?;
                report.pairs.push(PairRow {
                    sample,
                    n1: s1.n,
                    k1: s1.k,
                    n2: s2.n,
                    k2: s2.k,
                    defect,
                    scale,
                    rel_defect: relative(defect, scale),
                });
            }
        }
    }
    Ok(report)
}
