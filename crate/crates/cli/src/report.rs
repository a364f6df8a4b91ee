//! Serializable report documents. Field names and nesting are stable across
//! releases (schema_version bumps on breaking changes); float formatting is
//! serde_json's shortest round-trip representation, so identical runs yield
//! byte-identical documents.

use serde::Serialize;

use crate::config::RunConfig;
use outstab_core::{ApproxControllability, StabilizabilityReport};

pub const SCHEMA_VERSION: u32 = 1;

/// The analysis convention notes carried by every report: the places where
/// the underlying subspace formulas admit more than one reading and which
/// one this tool implements.
pub const CONVENTIONS: [&str; 3] = [
    "uncontrollable coefficient directions of cluster n are solutions of B_n v = 0 with B_n the p x r_n matrix of actuator inner products",
    "controllable directions are the row space of B_n (the orthogonal complement of ker B_n)",
    "K_refined keeps cluster n only when T_n is nonzero on ker B_n; K_literal keeps it whenever T_n is nonzero as a matrix and ker B_n is nontrivial",
];

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: "outstab",
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeRow {
    pub cluster: usize,
    pub mu: f64,
    pub multiplicity: usize,
    /// Mode indices of the members, `[m]` or `[m, n]` each.
    pub members: Vec<Vec<u32>>,
    pub rank_b: usize,
    pub dim_ker_b: usize,
    pub dim_observable_uncontrollable: usize,
    pub in_j: bool,
    pub in_k_literal: bool,
    pub in_k_refined: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessRow {
    pub cluster: usize,
    pub mu: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproxRow {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster: Option<usize>,
}

impl From<ApproxControllability> for ApproxRow {
    fn from(value: ApproxControllability) -> Self {
        match value {
            ApproxControllability::HoldsUpToTruncation => ApproxRow {
                status: "holds_up_to_truncation",
                cluster: None,
            },
            ApproxControllability::FailsAtMode { cluster_index } => ApproxRow {
                status: "fails_at_mode",
                cluster: Some(cluster_index),
            },
            ApproxControllability::NotApplicable => ApproxRow {
                status: "not_applicable",
                cluster: None,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationRow {
    pub clusters_analyzed: usize,
    pub unstable_clusters: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToleranceRow {
    pub cluster: f64,
    pub rank: f64,
    pub zero: f64,
}

/// The `analyze` report.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisDoc {
    pub tool: ToolInfo,
    pub schema_version: u32,
    pub k_reading: &'static str,
    pub verdict: bool,
    pub verdict_literal: bool,
    pub verdict_refined: bool,
    pub witnesses: Vec<WitnessRow>,
    pub modes: Vec<ModeRow>,
    pub approx_controllability: ApproxRow,
    pub truncation: TruncationRow,
    pub tolerances: ToleranceRow,
    pub conventions: Vec<&'static str>,
    pub config: RunConfig,
}

pub fn reading_name(reading: outstab_core::KReading) -> &'static str {
    match reading {
        outstab_core::KReading::Literal => "literal",
        outstab_core::KReading::Refined => "refined",
    }
}

pub fn analysis_doc(config: &RunConfig, report: &StabilizabilityReport) -> AnalysisDoc {
    AnalysisDoc {
        tool: ToolInfo::current(),
        schema_version: SCHEMA_VERSION,
        k_reading: reading_name(report.reading),
        verdict: report.verdict(),
        verdict_literal: report.verdict_literal,
        verdict_refined: report.verdict_refined,
        witnesses: report
            .witnesses()
            .iter()
            .map(|w| WitnessRow {
                cluster: w.cluster_index,
                mu: w.mu,
            })
            .collect(),
        modes: report
            .modes
            .iter()
            .map(|m| ModeRow {
                cluster: m.cluster_index,
                mu: m.mu,
                multiplicity: m.multiplicity,
                members: m.mode_indices.iter().map(|i| i.as_vec()).collect(),
                rank_b: m.rank_b,
                dim_ker_b: m.kernel_dim(),
                dim_observable_uncontrollable: m.observable_uncontrollable.ncols(),
                in_j: m.in_j,
                in_k_literal: m.in_k_literal,
                in_k_refined: m.in_k_refined,
            })
            .collect(),
        approx_controllability: report.approx_controllability.into(),
        truncation: TruncationRow {
            clusters_analyzed: report.truncation.clusters_analyzed,
            unstable_clusters: report.truncation.unstable_clusters,
        },
        tolerances: ToleranceRow {
            cluster: config.tolerances.cluster,
            rank: config.tolerances.rank,
            zero: config.tolerances.zero,
        },
        conventions: CONVENTIONS.to_vec(),
        config: config.clone(),
    }
}

/// The `simulate` decay summary.
#[derive(Debug, Clone, Serialize)]
pub struct DecayDoc {
    pub tool: ToolInfo,
    pub schema_version: u32,
    pub k_reading: &'static str,
    /// "open_loop", "closed_loop", or "refused".
    pub feedback: &'static str,
    pub sigma: f64,
    pub window: [f64; 2],
    /// None marks an identically zero output on the window.
    pub rate: Option<f64>,
    pub all_zero: bool,
    pub residual: Option<f64>,
    pub points_used: usize,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub refusal_witnesses: Vec<WitnessRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// The `oracle-check` agreement report.
#[derive(Debug, Clone, Serialize)]
pub struct OracleDoc {
    pub tool: ToolInfo,
    pub schema_version: u32,
    /// "agree", "disagree", or "inconclusive".
    pub agreement: &'static str,
    pub resolution: Vec<usize>,
    pub spectral: SpectralSide,
    pub oracle: OracleSide,
    pub eigenvalue_comparison: Vec<EigenComparisonRow>,
    pub guard_band: GuardBandRow,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectoryRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSide {
    pub verdict: bool,
    pub verdict_literal: bool,
    pub verdict_refined: bool,
    pub witnesses: Vec<WitnessRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleSide {
    pub stabilizable: bool,
    pub witnesses: Vec<f64>,
    pub unstable_eigenspaces: Vec<EigenspaceRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenspaceRow {
    pub mu: f64,
    pub dim: usize,
    pub uncontrollable_dim: usize,
    pub visible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenComparisonRow {
    pub cluster: usize,
    pub mu_spectral: f64,
    pub mu_oracle: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GuardBandRow {
    pub conclusive: bool,
    pub violations: Vec<GuardBandViolationRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GuardBandViolationRow {
    pub eigenvalue: f64,
    pub band: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRow {
    /// `max_t ‖y_spectral − y_oracle‖_∞ / max_t ‖y_oracle‖_∞`.
    pub max_relative_deviation: f64,
    pub time_points: usize,
}

/// Structured error document for exit codes 2 and 3.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorDoc {
    pub error: ErrorBody,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    /// "config" or "internal".
    pub kind: &'static str,
    pub messages: Vec<String>,
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("reports always serialize");
    text.push('\n');
    text
}
