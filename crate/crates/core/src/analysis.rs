//! Per-mode linear algebra and the stabilizability criterion.
//!
//! For each cluster the coefficient space ℝ^{rₙ} splits orthogonally into the
//! row space of `Bₙ` (controllable directions) and `ker Bₙ` (uncontrollable
//! directions). A cluster belongs to the index set J when `rank Bₙ < rₙ`, and
//! to K when it is both partially uncontrollable and sensed. The system is
//! output stabilizable iff `μₙ < 0` on K.
//!
//! Two readings of K are computed side by side: the *literal* one
//! (`Tₙ ≠ 0` and `ker Bₙ ≠ {0}`) and the *refined* one (`Tₙ` nonzero **on**
//! `ker Bₙ`). The refined reading is the one consistent with the output
//! series of the uncontrollable subsystem, and drives the default verdict;
//! the literal reading can reject systems whose sensed directions are all
//! controllable. Both appear in every report so the discrepancy stays
//! auditable.
//!
//! Convention: the uncontrollable coefficient condition is `Bₙv = 0` with
//! `Bₙ` the p×rₙ matrix of entries `⟨gᵢ, φₙⱼ⟩` (the expansion of
//! `⟨E(μₙ)x, gᵢ⟩ = 0`), and the controllable directions are the row space of
//! `Bₙ`. Dimensions work out only this way; reports flag the convention.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::devices::{
    assemble_actuator_matrix, assemble_sensor_matrix, Device, DeviceError,
};
use crate::quadrature::QuadratureSettings;
use crate::spectral::{Domain, EigenCluster, ModeIndices};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error(
        "truncation violation: cluster {cluster_index} (μ = {mu}) is unstable but has no analysis"
    )]
    TruncationViolation { cluster_index: usize, mu: f64 },
    #[error("mode matrices for cluster {cluster_index} have {cols} columns, multiplicity is {multiplicity}")]
    ShapeMismatch {
        cluster_index: usize,
        cols: usize,
        multiplicity: usize,
    },
}

/// The pair `(Bₙ, Tₙ)` for one cluster: p×rₙ actuator rows, q×rₙ sensor rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMatrices {
    pub cluster_index: usize,
    pub b: DMatrix<f64>,
    pub t: DMatrix<f64>,
}

impl ModeMatrices {
    pub fn assemble(
        cluster: &EigenCluster,
        actuators: &[Device],
        sensors: &[Device],
        domain: &Domain,
        quadrature: &QuadratureSettings,
    ) -> Result<Self, DeviceError> {
        Ok(ModeMatrices {
            cluster_index: cluster.index,
            b: assemble_actuator_matrix(cluster, actuators, domain, quadrature)?,
            t: assemble_sensor_matrix(cluster, sensors, domain, quadrature)?,
        })
    }
}

/// Rank decision and orthonormal row-space/kernel split of a matrix.
///
/// Singular values at or below `rank_tolerance` in absolute terms, or below
/// `rank_tolerance·σ_max` relative to the largest one, count as zero. The
/// absolute floor matters: closed-form inner products leave ~1e-17 residue at
/// configurations that vanish exactly (sine orthogonality), and those must
/// read as zero rows, not rank.
fn svd_split(m: &DMatrix<f64>, rank_tolerance: f64) -> (usize, DMatrix<f64>, DMatrix<f64>) {
    assert!(rank_tolerance > 0.0, "rank tolerance must be positive");
    let r = m.ncols();
    if r == 0 {
        return (0, DMatrix::zeros(0, 0), DMatrix::zeros(0, 0));
    }
    // Pad to at least r rows so the SVD carries a full right basis.
    let padded = if m.nrows() < r {
        let mut p = DMatrix::zeros(r, r);
        p.view_mut((0, 0), (m.nrows(), r)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let sigma = &svd.singular_values;
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = sigma.iter().fold(0.0_f64, |a, &s| a.max(s));
    let rank = if sigma_max <= rank_tolerance {
        0
    } else {
        sigma
            .iter()
            .filter(|&&s| s > rank_tolerance * sigma_max)
            .count()
    };
    if rank == 0 {
        // Whole space is kernel; pick the canonical basis.
        return (0, DMatrix::zeros(r, 0), DMatrix::identity(r, r));
    }
    let rowspace = v_t.rows(0, rank).transpose();
    let kernel = v_t.rows(rank, r - rank).transpose();
    (rank, rowspace, kernel)
}

/// Numerical rank under the shared tolerance policy.
pub fn rank(m: &DMatrix<f64>, rank_tolerance: f64) -> usize {
    svd_split(m, rank_tolerance).0
}

/// Orthonormal basis of `ker M` as matrix columns (empty when M has full
/// column rank).
pub fn kernel_basis(m: &DMatrix<f64>, rank_tolerance: f64) -> DMatrix<f64> {
    svd_split(m, rank_tolerance).2
}

/// Orthonormal basis of the row space of `M` (the orthogonal complement of
/// the kernel).
pub fn rowspace_basis(m: &DMatrix<f64>, rank_tolerance: f64) -> DMatrix<f64> {
    svd_split(m, rank_tolerance).1
}

/// `(uncontrollable, controllable)` bases of the coefficient space of one
/// cluster: `ker Bₙ` and its orthogonal complement, the row space of `Bₙ`.
/// Concatenated they form an orthonormal basis of ℝ^{rₙ}.
pub fn mode_subspaces(
    mm: &ModeMatrices,
    rank_tolerance: f64,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let (_, rowspace, kernel) = svd_split(&mm.b, rank_tolerance);
    (kernel, rowspace)
}

/// Orthonormal basis of `ker Bₙ ⊖ (ker Bₙ ∩ ker Tₙ)`: the uncontrollable
/// directions the sensors can see (equivalently, the projection of the row
/// space of `Tₙ` onto `ker Bₙ`).
pub fn observable_uncontrollable_basis(mm: &ModeMatrices, rank_tolerance: f64) -> DMatrix<f64> {
    let kernel = kernel_basis(&mm.b, rank_tolerance);
    if kernel.ncols() == 0 {
        return DMatrix::zeros(mm.b.ncols(), 0);
    }
    // Restrict T to the kernel and take the visible part back up.
    let restricted = &mm.t * &kernel;
    let visible = rowspace_basis(&restricted, rank_tolerance);
    &kernel * visible
}

/// Everything the criterion needs to know about one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeAnalysis {
    pub cluster_index: usize,
    pub mu: f64,
    pub multiplicity: usize,
    pub mode_indices: Vec<ModeIndices>,
    pub rank_b: usize,
    /// Orthonormal columns spanning `ker Bₙ` (uncontrollable directions).
    pub kernel_b: DMatrix<f64>,
    /// Orthonormal columns spanning the row space of `Bₙ`.
    pub rowspace_b: DMatrix<f64>,
    /// Basis of the sensed part of `ker Bₙ`.
    pub observable_uncontrollable: DMatrix<f64>,
    pub in_j: bool,
    pub in_k_literal: bool,
    pub in_k_refined: bool,
}

impl ModeAnalysis {
    pub fn kernel_dim(&self) -> usize {
        self.kernel_b.ncols()
    }
}

/// Analyze one cluster's mode matrices.
pub fn analyze_mode(
    cluster: &EigenCluster,
    mm: &ModeMatrices,
    rank_tolerance: f64,
) -> Result<ModeAnalysis, AnalysisError> {
    let r = cluster.multiplicity();
    if mm.b.ncols() != r || mm.t.ncols() != r {
        return Err(AnalysisError::ShapeMismatch {
            cluster_index: cluster.index,
            cols: if mm.b.ncols() != r {
                mm.b.ncols()
            } else {
                mm.t.ncols()
            },
            multiplicity: r,
        });
    }
    let (rank_b, rowspace_b, kernel_b) = svd_split(&mm.b, rank_tolerance);
    let observable_uncontrollable = observable_uncontrollable_basis(mm, rank_tolerance);
    let t_nonzero = rank(&mm.t, rank_tolerance) > 0;
    let kernel_nonzero = kernel_b.ncols() > 0;
    Ok(ModeAnalysis {
        cluster_index: cluster.index,
        mu: cluster.mu,
        multiplicity: r,
        mode_indices: cluster.member_indices(),
        rank_b,
        kernel_b,
        rowspace_b,
        in_j: rank_b < r,
        in_k_literal: t_nonzero && kernel_nonzero,
        in_k_refined: observable_uncontrollable.ncols() > 0,
        observable_uncontrollable,
    })
}

/// Analyze a list of clusters; `mode_matrices` aligned by position.
pub fn analyze_modes(
    clusters: &[EigenCluster],
    mode_matrices: &[ModeMatrices],
    rank_tolerance: f64,
) -> Result<Vec<ModeAnalysis>, AnalysisError> {
    clusters
        .iter()
        .zip(mode_matrices)
        .map(|(c, mm)| analyze_mode(c, mm, rank_tolerance))
        .collect()
}

/// Which K set drives the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KReading {
    Literal,
    Refined,
}

/// A cluster defeating the criterion: unstable and in the selected K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub cluster_index: usize,
    pub mu: f64,
}

/// Remark-style approximate-controllability check, quantified over the
/// enumerated clusters only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxControllability {
    HoldsUpToTruncation,
    FailsAtMode { cluster_index: usize },
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationInfo {
    pub clusters_analyzed: usize,
    pub unstable_clusters: usize,
}

/// Verdict plus the per-mode table behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizabilityReport {
    pub modes: Vec<ModeAnalysis>,
    pub reading: KReading,
    pub verdict_literal: bool,
    pub verdict_refined: bool,
    pub witnesses_literal: Vec<Witness>,
    pub witnesses_refined: Vec<Witness>,
    pub approx_controllability: ApproxControllability,
    pub truncation: TruncationInfo,
}

impl StabilizabilityReport {
    /// Verdict under the selected reading.
    pub fn verdict(&self) -> bool {
        match self.reading {
            KReading::Literal => self.verdict_literal,
            KReading::Refined => self.verdict_refined,
        }
    }

    /// Witnesses under the selected reading.
    pub fn witnesses(&self) -> &[Witness] {
        match self.reading {
            KReading::Literal => &self.witnesses_literal,
            KReading::Refined => &self.witnesses_refined,
        }
    }
}

/// The criterion: output stabilizable iff no cluster with `μ ≥ −zero_tol`
/// lies in K. Every unstable cluster must carry an analysis, otherwise the
/// truncation is unsound and the verdict refuses.
pub fn stabilizability_verdict(
    clusters: &[EigenCluster],
    analyses: &[ModeAnalysis],
    zero_tolerance: f64,
    reading: KReading,
    actuator_count: usize,
) -> Result<StabilizabilityReport, AnalysisError> {
    assert!(zero_tolerance >= 0.0);
    for cluster in clusters {
        if cluster.mu >= -zero_tolerance
            && !analyses.iter().any(|a| a.cluster_index == cluster.index)
        {
            return Err(AnalysisError::TruncationViolation {
                cluster_index: cluster.index,
                mu: cluster.mu,
            });
        }
    }
    let mut witnesses_literal = Vec::new();
    let mut witnesses_refined = Vec::new();
    for analysis in analyses {
        if analysis.mu < -zero_tolerance {
            continue;
        }
        let witness = Witness {
            cluster_index: analysis.cluster_index,
            mu: analysis.mu,
        };
        if analysis.in_k_literal {
            witnesses_literal.push(witness);
        }
        if analysis.in_k_refined {
            witnesses_refined.push(witness);
        }
    }
    let unstable_clusters = analyses
        .iter()
        .filter(|a| a.mu >= -zero_tolerance)
        .count();
    Ok(StabilizabilityReport {
        verdict_literal: witnesses_literal.is_empty(),
        verdict_refined: witnesses_refined.is_empty(),
        witnesses_literal,
        witnesses_refined,
        reading,
        approx_controllability: approx_controllability_check(analyses, actuator_count),
        truncation: TruncationInfo {
            clusters_analyzed: analyses.len(),
            unstable_clusters,
        },
        modes: analyses.to_vec(),
    })
}

/// Sufficient condition for approximate controllability: `p ≥ sup rₙ` and
/// `rank Bₙ = rₙ` for every enumerated cluster. Explicitly
/// truncation-qualified; the first failing cluster is reported.
pub fn approx_controllability_check(
    analyses: &[ModeAnalysis],
    actuator_count: usize,
) -> ApproxControllability {
    if analyses.is_empty() {
        return ApproxControllability::NotApplicable;
    }
    for analysis in analyses {
        if actuator_count < analysis.multiplicity || analysis.rank_b < analysis.multiplicity {
            return ApproxControllability::FailsAtMode {
                cluster_index: analysis.cluster_index,
            };
        }
    }
    ApproxControllability::HoldsUpToTruncation
}
