//! Experiment driver for the matrix discretizations in `lax-markov-core`.
//!
//! Each [`Command`] reads an [`ExperimentConfig`], runs one batch computation and writes
//! CSV tables (plus JSON snapshots for flows) into an output directory stamped with the
//! resolved configuration.

pub mod commands;
pub mod config;
pub mod error;
pub mod naive;
pub mod output;
pub mod profile;

use std::path::PathBuf;

pub use config::{ExperimentConfig, FlowRule};
pub use error::{LabError, LabResult};
pub use profile::Profile;

use output::OutDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    QuasirepCheck,
    Flow,
    PdeCompare,
    PaperCheck,
    Involutivity,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::QuasirepCheck => "quasirep-check",
            Command::Flow => "flow",
            Command::PdeCompare => "pde-compare",
            Command::PaperCheck => "paper-check",
            Command::Involutivity => "involutivity",
        }
    }
}

/// Runs `command` and returns the files it wrote. The one-line summary for the terminal
/// is the second element.
pub fn run(command: Command, config: &ExperimentConfig) -> LabResult<(Vec<PathBuf>, String)> {
    config.validate()?;
    let mut out = OutDir::create(&config.out_dir, config, command.name())?;
    let summary = match command {
        Command::QuasirepCheck => {
            let r = commands::quasirep::quasirep_check(&config.sweep_meshes()?);
            out.csv("commutator_defect.csv", &r.commutator)?;
            out.csv("subspace_exactness.csv", &r.subspace)?;
            out.csv("top_degree.csv", &r.top_degree)?;
            out.csv("multiplication_exactness.csv", &r.multiplication)?;
            let worst = r.commutator.iter().map(|c| c.max_abs_deviation).fold(0.0, f64::max);
            format!("commutator defect max deviation {worst:.3e}")
        }
        Command::Flow => {
            let r = commands::flow::run_flow(config)?;
            out.json("snapshots.json", &r.snapshots_json())?;
            out.csv("conservation.csv", &r.primary().rows)?;
            out.csv("invariant_drift.csv", &r.invariant_rows())?;
            out.csv("eigen_drift.csv", &r.eigen_rows())?;
            out.csv("summary.csv", &r.summary)?;
            if let Some(d) = &r.dividend {
                out.csv("dividend.csv", std::slice::from_ref(d))?;
            }
            if !r.residuals.is_empty() {
                out.csv("paper_residuals.csv", &r.residuals)?;
            }
            let p = r.primary();
            let mut line = format!(
                "max relative drift: invariants {:.3e}, eigenvalues {:.3e}",
                p.max_invariant_rel_drift(),
                p.max_eigen_rel_drift()
            );
            if let Some(d) = &r.dividend {
                line.push_str(&format!("; dividend {}", d.status));
            }
            line
        }
        Command::PdeCompare => {
            let r = commands::pde::pde_compare(config)?;
            out.csv("slopes.csv", &r.slopes)?;
            out.csv("error_vs_t.csv", &r.error_vs_t)?;
            out.csv("error_vs_n.csv", &r.error_vs_n)?;
            let (su, sv) = r.max_slope_deviation();
            let failed = r.error_vs_n.iter().filter(|row| row.status != "ok").count();
            format!("t=0 slope deviation u {su:.3e}, v {sv:.3e}; {failed} failed matrix runs")
        }
        Command::PaperCheck => {
            let r = commands::paper::paper_check(config)?;
            out.csv("paper_residuals.csv", &r.rows)?;
            out.csv("verdicts.csv", &r.verdicts)?;
            let text = r.verdict_text();
            out.text("verdicts.txt", &text)?;
            text.trim_end().to_string()
        }
        Command::Involutivity => {
            let r = commands::involutivity::involutivity(config)?;
            out.csv("involutivity.csv", &r.pairs)?;
            out.csv("casimir_defects.csv", &r.casimirs)?;
            format!(
                "max relative involutivity defect {:.3e}, max relative Casimir defect {:.3e}",
                r.max_rel_defect(),
                r.max_casimir_rel_defect()
            )
        }
    };
    Ok((out.written().to_vec(), summary))
}
