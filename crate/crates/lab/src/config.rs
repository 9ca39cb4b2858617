//! Experiment configuration, read from JSON.
//!
//! Every field has a default, so `{}` is a valid config. Unknown fields are rejected.
//!
//! ```json
//! {
//!   "mesh": {"kind": "chebyshev", "n": 8, "interval": [-1, 1]},
//!   "u0": "sin",
//!   "v0": "cos",
//!   "flow": {"rule": "casimir", "n": 2, "k": 4},
//!   "integrator": {"t_end": 1.0, "rtol": 1e-9},
//!   "n_sweep": [4, 8, 16],
//!   "seed": 0,
//!   "out_dir": "out"
//! }
//! ```

use std::path::{Path, PathBuf};

use lax_markov_core::aks::{CasimirSpec, FlowConfig};
use lax_markov_core::calogero::{build_mesh, Mesh, MeshSpec, ProductOrdering};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};
use crate::profile::Profile;

/// Largest mesh accepted by any command.
pub const MAX_N: usize = 64;
/// Largest matrix size for loop-algebra experiments (flows, involutivity).
pub const MAX_FLOW_N: usize = 32;

/// Which generator drives the matrix flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowRule {
    /// `P₊∇γ_n^{(k)}`.
    Casimir { n: u32, k: i32 },
    /// The printed generator `B(U, Z)`.
    PaperB {},
    /// `∂_x ↦ ad_Z` applied to the PDE directly.
    Naive {
        #[serde(default)]
        ordering: ProductOrdering,
    },
}

impl Default for FlowRule {
    fn default() -> Self {
        FlowRule::Casimir { n: 2, k: 4 }
    }
}

/// Settings of the involutivity grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InvolutivityConfig {
    pub size: usize,
    pub samples: usize,
    pub n_max: u32,
    pub k_max: i32,
    /// Entries of the random lower coefficients are drawn from `[−entry_bound, entry_bound]`.
    pub entry_bound: f64,
}

impl Default for InvolutivityConfig {
    fn default() -> Self {
        InvolutivityConfig { size: 4, samples: 20, n_max: 3, k_max: 5, entry_bound: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mesh: MeshSpec,
    pub u0: Profile,
    pub v0: Profile,
    pub flow: FlowRule,
    pub integrator: FlowConfig,
    /// Mesh sizes for sweeps; empty means the configured mesh only.
    pub n_sweep: Vec<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Number of seeded random states used by `paper-check`.
    pub random_states: usize,
    pub involutivity: InvolutivityConfig,
    /// Tolerance of the reference solve in the PDE comparison.
    pub reference_rtol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            mesh: MeshSpec::default(),
            u0: Profile::Sin,
            v0: Profile::Cos,
            flow: FlowRule::default(),
            integrator: FlowConfig::default(),
            n_sweep: Vec::new(),
            seed: 0,
            out_dir: PathBuf::from("out"),
            random_states: 20,
            involutivity: InvolutivityConfig::default(),
            reference_rtol: 1e-12,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> LabResult<Self> {
        let value: serde_json::Value = serde_json::from_str(s).map_err(|e| LabError::io("parsing config", e))?;
        if !value.is_object() {
            return Err(LabError::Config("config must be a JSON object".into()));
        }
        let config: ExperimentConfig = serde_json::from_value(value).map_err(|e| LabError::io("parsing config", e))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(&format!("reading {}", path.display()), e))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> LabResult<()> {
        let bad = |msg: String| Err(LabError::Config(msg));
        self.integrator.validate().map_err(|e| LabError::Config(e.to_string()))?;
        if self.mesh.len() > MAX_N {
            return bad(format!("mesh size {} exceeds {MAX_N}", self.mesh.len()));
        }
        for &n in &self.n_sweep {
            if !(2..=MAX_N).contains(&n) {
                return bad(format!("sweep size {n} outside 2..={MAX_N}"));
            }
        }
        if !self.n_sweep.is_empty() && matches!(self.mesh, MeshSpec::Explicit { .. }) {
            return bad("an explicit mesh cannot be swept over N".into());
        }
        if self.random_states > 10_000 {
            return bad("random_states is limited to 10000".into());
        }
        let inv = &self.involutivity;
        if !(1..=MAX_FLOW_N).contains(&inv.size) || inv.samples == 0 || inv.n_max > 8 || !(0..=16).contains(&inv.k_max) {
            return bad(format!("involutivity settings out of range: {inv:?}"));
        }
        if !(inv.entry_bound.is_finite() && inv.entry_bound > 0.0) {
            return bad("involutivity entry_bound must be positive".into());
        }
        if !(self.reference_rtol > 0.0 && self.reference_rtol < 1.0) {
            return bad("reference_rtol must lie in (0, 1)".into());
        }
        let mesh = self.build_mesh()?;
        for (name, p) in [("u0", &self.u0), ("v0", &self.v0)] {
            if mesh.nodes().iter().any(|&x| !p.eval(x).is_finite() || !p.derivative(x).is_finite()) {
                return bad(format!("profile {name} = {p} is not finite on the mesh"));
            }
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> LabResult<Mesh> {
        build_mesh(&self.mesh).map_err(|e| LabError::Config(format!("mesh: {e}")))
    }

    /// The configured mesh resized to every sweep size (or just the configured mesh).
    pub fn sweep_meshes(&self) -> LabResult<Vec<Mesh>> {
        if self.n_sweep.is_empty() {
            return Ok(vec![self.build_mesh()?]);
        }
        self.n_sweep
            .iter()
            .map(|&n| build_mesh(&self.mesh.with_len(n)).map_err(|e| LabError::Config(format!("mesh N={n}: {e}"))))
            .collect()
    }

    pub fn casimir_spec(&self) -> Option<CasimirSpec> {
        match self.flow {
            FlowRule::Casimir { n, k } => Some(CasimirSpec::new(n, k)),
            _ => None,
        }
    }
}
