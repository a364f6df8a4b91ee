//! Spectral simulation on the truncated modal system.
//!
//! States live as per-cluster coefficient vectors `vₙ ∈ ℝ^{rₙ}` with
//! dynamics `v̇ₙ = μₙvₙ + Bₙᵀu` and output `y = Σ Tₙvₙ`. The uncontrollable
//! output `y₂` is evaluated directly as the exponential series over K; the
//! closed loop integrates the assembled block system through the matrix
//! exponential, stepping over the (usually uniform) time grid.
//!
//! The feedback is a per-mode least-squares pole shift: on the stacked
//! controllable coordinates of the unstable clusters the closed-loop rates
//! land at `−σ` (exactly, when the actuators can realize the shift
//! independently; via eigenvector assignment with targets spread just below
//! `−σ` otherwise), and the gain is identically zero on every uncontrollable
//! direction, so the series `y₂` is invariant under feedback.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::{ModeAnalysis, ModeMatrices, Witness};
use crate::quadrature::{GaussLegendre, QuadratureSettings};
use crate::spectral::{eigenfunction_eval, Domain, EigenCluster};

#[derive(Debug, Error, PartialEq)]
pub enum SimulateError {
    #[error("feedback shift σ must be strictly positive")]
    SigmaNotPositive,
    #[error("no bounded feedback can stabilize the output: unstable cluster(s) {witnesses:?} are uncontrollable and sensor-visible")]
    DesignRefused { witnesses: Vec<Witness> },
    #[error("initial state references cluster {cluster_index}, member {member}, which the truncation does not carry")]
    UnknownMode { cluster_index: usize, member: usize },
    #[error("tabulated initial states are supported on intervals only")]
    TabulatedUnsupportedDimension,
    #[error("tabulated initial state needs at least 2 strictly increasing samples")]
    TabulatedInvalid,
    #[error("modal coefficients do not align with the cluster list")]
    LayoutMismatch,
    #[error("gain references cluster {cluster_index} outside the simulation truncation")]
    GainOutsideTruncation { cluster_index: usize },
    #[error("times must be non-negative and strictly increasing")]
    InvalidTimes,
    #[error("decay window does not intersect the series")]
    WindowOutsideSeries,
    #[error("eigenvector assignment failed to find a well-conditioned gain")]
    PlacementFailed,
}

/// Initial state `x₀` of the PDE.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    /// A single eigenfunction `φ_{nj}` (1-based member within the cluster).
    Eigenfunction { cluster_index: usize, member: usize },
    /// Finite linear combination of eigenfunctions.
    Combination { terms: Vec<CombinationTerm> },
    /// Piecewise-linear field samples on a strictly increasing grid
    /// (intervals only); zero-extended outside the sampled range.
    Tabulated {
        positions: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombinationTerm {
    pub cluster_index: usize,
    pub member: usize,
    pub coefficient: f64,
}

/// Projection coefficients `vₙⱼ = ⟨x₀, φₙⱼ⟩`, aligned with a cluster slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalCoefficients {
    pub per_cluster: Vec<DVector<f64>>,
}

impl ModalCoefficients {
    pub fn zeros(clusters: &[EigenCluster]) -> Self {
        ModalCoefficients {
            per_cluster: clusters
                .iter()
                .map(|c| DVector::zeros(c.multiplicity()))
                .collect(),
        }
    }

    /// `Σₙ ‖vₙ‖²` (the Parseval sum at truncation).
    pub fn energy(&self) -> f64 {
        self.per_cluster.iter().map(|v| v.norm_squared()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionWarning {
    /// Fewer than 4 samples per half-wavelength of the highest retained mode.
    CoarseGrid { max_spacing: f64, required: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coeffs: ModalCoefficients,
    pub warnings: Vec<ProjectionWarning>,
}

/// Project `x₀` onto the eigenbasis of the given clusters.
pub fn project_initial_state(
    x0: &InitialState,
    clusters: &[EigenCluster],
    domain: &Domain,
    quadrature: &QuadratureSettings,
) -> Result<Projection, SimulateError> {
    let mut coeffs = ModalCoefficients::zeros(clusters);
    let mut warnings = Vec::new();
    let add_term = |coeffs: &mut ModalCoefficients,
                        cluster_index: usize,
                        member: usize,
                        value: f64|
     -> Result<(), SimulateError> {
        let pos = clusters
            .iter()
            .position(|c| c.index == cluster_index)
            .ok_or(SimulateError::UnknownMode {
                cluster_index,
                member,
            })?;
        if member == 0 || member > clusters[pos].multiplicity() {
            return Err(SimulateError::UnknownMode {
                cluster_index,
                member,
            });
        }
        coeffs.per_cluster[pos][member - 1] += value;
        Ok(())
    };
    match x0 {
        InitialState::Eigenfunction {
            cluster_index,
            member,
        } => add_term(&mut coeffs, *cluster_index, *member, 1.0)?,
        InitialState::Combination { terms } => {
            for term in terms {
                add_term(&mut coeffs, term.cluster_index, term.member, term.coefficient)?;
            }
        }
        InitialState::Tabulated { positions, values } => {
            if domain.dim() != 1 {
                return Err(SimulateError::TabulatedUnsupportedDimension);
            }
            if positions.len() < 2
                || positions.len() != values.len()
                || positions.windows(2).any(|w| w[0] >= w[1])
            {
                return Err(SimulateError::TabulatedInvalid);
            }
            let length = domain.side(0);
            let lo = positions[0].max(0.0);
            let hi = positions[positions.len() - 1].min(length);
            if lo >= hi {
                return Err(SimulateError::TabulatedInvalid);
            }
            // Quadrature cells aligned with the sample grid, clipped to Ω.
            let mut bounds = vec![lo];
            bounds.extend(positions.iter().copied().filter(|&p| p > lo && p < hi));
            bounds.push(hi);
            let cells: Vec<(f64, f64)> = bounds.windows(2).map(|w| (w[0], w[1])).collect();
            let rule = GaussLegendre::new(quadrature.order);
            for (pos, cluster) in clusters.iter().enumerate() {
                for (j, descriptor) in cluster.members.iter().enumerate() {
                    let v = rule.integrate_cells(&cells, quadrature.subdivisions, |x| {
                        interp(positions, values, x)
                            * eigenfunction_eval(descriptor, domain, &[x])
                                .expect("cell nodes lie inside the domain")
                    });
                    coeffs.per_cluster[pos][j] = v;
                }
            }
            // Resolution warning: 4 points per half-wavelength of the
            // highest retained mode.
            let max_index = clusters
                .iter()
                .flat_map(|c| c.members.iter())
                .flat_map(|d| d.mode_indices.as_vec())
                .max()
                .unwrap_or(1);
            let max_spacing = positions
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(0.0_f64, f64::max);
            let required = length / max_index as f64 / 4.0;
            if max_spacing > required {
                warnings.push(ProjectionWarning::CoarseGrid {
                    max_spacing,
                    required,
                });
            }
        }
    }
    Ok(Projection { coeffs, warnings })
}

fn interp(positions: &[f64], values: &[f64], x: f64) -> f64 {
    match positions.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => values[i],
        Err(0) => 0.0,
        Err(i) if i >= positions.len() => 0.0,
        Err(i) => {
            let (x0, x1) = (positions[i - 1], positions[i]);
            let t = (x - x0) / (x1 - x0);
            values[i - 1] * (1.0 - t) + values[i] * t
        }
    }
}

/// Sensor outputs over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub outputs: Vec<DVector<f64>>,
}

impl TimeSeries {
    pub fn norms(&self) -> Vec<f64> {
        self.outputs.iter().map(|y| y.norm()).collect()
    }
}

/// The series of the uncontrollable output: component `k` at time `t` is
/// `Σ_{n∈K} e^{μₙt} (Tₙ wₙ)ₖ` with `wₙ` the projection of `vₙ` onto
/// `ker Bₙ`. Passing `project_onto_kernel = false` evaluates the unprojected
/// variant (debug only: it double-counts controllable content).
pub fn output_uncontrollable(
    coeffs: &ModalCoefficients,
    clusters: &[EigenCluster],
    analyses: &[ModeAnalysis],
    mode_matrices: &[ModeMatrices],
    k_set: &[usize],
    times: &[f64],
    project_onto_kernel: bool,
) -> Result<TimeSeries, SimulateError> {
    if coeffs.per_cluster.len() != clusters.len() || mode_matrices.len() != clusters.len() {
        return Err(SimulateError::LayoutMismatch);
    }
    let q = mode_matrices.first().map(|mm| mm.t.nrows()).unwrap_or(0);
    // Fixed summation order: ascending cluster index.
    let mut selected: Vec<usize> = k_set.to_vec();
    selected.sort_unstable();
    selected.dedup();
    let mut terms: Vec<(f64, DVector<f64>)> = Vec::new();
    for cluster_index in selected {
        let pos = clusters
            .iter()
            .position(|c| c.index == cluster_index)
            .ok_or(SimulateError::UnknownMode {
                cluster_index,
                member: 1,
            })?;
        let v = &coeffs.per_cluster[pos];
        let analysis = analyses
            .iter()
            .find(|a| a.cluster_index == cluster_index)
            .ok_or(SimulateError::UnknownMode {
                cluster_index,
                member: 1,
            })?;
        let w = if project_onto_kernel {
            if analysis.kernel_b.ncols() == 0 {
                continue;
            }
            &analysis.kernel_b * (analysis.kernel_b.transpose() * v)
        } else {
            v.clone()
        };
        terms.push((clusters[pos].mu, &mode_matrices[pos].t * w));
    }
    let outputs = times
        .iter()
        .map(|&t| {
            let mut y = DVector::zeros(q);
            for (mu, c) in &terms {
                y += c * (mu * t).exp();
            }
            y
        })
        .collect();
    Ok(TimeSeries {
        times: times.to_vec(),
        outputs,
    })
}

/// Modal feedback `u = Σₙ Gₙ vₙ` with shift σ.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackGain {
    pub sigma: f64,
    pub blocks: Vec<GainBlock>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainBlock {
    pub cluster_index: usize,
    /// p×rₙ; zero on stable clusters and on every uncontrollable direction.
    pub gain: DMatrix<f64>,
}

/// Build the stabilizing modal gain, or refuse when no bounded feedback can
/// work (an unstable cluster in the refined K), mirroring the verdict.
///
/// `seed` drives the parameter draws of the eigenvector-assignment fallback;
/// fixed seed, fixed gain.
pub fn design_modal_feedback(
    clusters: &[EigenCluster],
    analyses: &[ModeAnalysis],
    mode_matrices: &[ModeMatrices],
    sigma: f64,
    zero_tolerance: f64,
    seed: u64,
) -> Result<FeedbackGain, SimulateError> {
    if !(sigma > 0.0) {
        return Err(SimulateError::SigmaNotPositive);
    }
    if clusters.len() != mode_matrices.len() {
        return Err(SimulateError::LayoutMismatch);
    }
    let witnesses: Vec<Witness> = analyses
        .iter()
        .filter(|a| a.mu >= -zero_tolerance && a.in_k_refined)
        .map(|a| Witness {
            cluster_index: a.cluster_index,
            mu: a.mu,
        })
        .collect();
    if !witnesses.is_empty() {
        return Err(SimulateError::DesignRefused { witnesses });
    }
    let p = mode_matrices.first().map(|mm| mm.b.nrows()).unwrap_or(0);

    // Stack the controllable coordinates of the unstable clusters:
    // ẇ = D w + 𝔅 u with D diagonal and 𝔅 rows RₙᵀBₙᵀ.
    struct Block<'a> {
        position: usize,
        rowspace: &'a DMatrix<f64>,
    }
    let mut stacked: Vec<Block> = Vec::new();
    let mut diag: Vec<f64> = Vec::new();
    for (pos, cluster) in clusters.iter().enumerate() {
        let Some(analysis) = analyses.iter().find(|a| a.cluster_index == cluster.index) else {
            continue;
        };
        if cluster.mu < -zero_tolerance || analysis.rank_b == 0 {
            continue;
        }
        stacked.push(Block {
            position: pos,
            rowspace: &analysis.rowspace_b,
        });
        diag.extend(std::iter::repeat(cluster.mu).take(analysis.rank_b));
    }
    let c = diag.len();
    let mut blocks: Vec<GainBlock> = clusters
        .iter()
        .map(|cl| GainBlock {
            cluster_index: cl.index,
            gain: DMatrix::zeros(p, cl.multiplicity()),
        })
        .collect();
    if c == 0 {
        return Ok(FeedbackGain { sigma, blocks });
    }

    let mut input = DMatrix::zeros(c, p);
    let mut row = 0;
    for block in &stacked {
        let contribution = block.rowspace.transpose() * mode_matrices[block.position].b.transpose();
        input.view_mut((row, 0), (contribution.nrows(), p)).copy_from(&contribution);
        row += contribution.nrows();
    }

    let gain_c = place_poles(&diag, &input, sigma, seed)?;

    // Scatter back: Gₙ = Gc[:, block]·Rₙᵀ, zero on the kernel by construction.
    let mut col = 0;
    for block in &stacked {
        let width = block.rowspace.ncols();
        let gc_block = gain_c.columns(col, width).into_owned();
        blocks[block.position].gain = &gc_block * block.rowspace.transpose();
        col += width;
    }
    Ok(FeedbackGain { sigma, blocks })
}

/// Gain for `ẇ = diag(d)w + 𝔅u` putting the closed-loop spectrum at `−σ`
/// (exact when `𝔅` has full row rank) or spread over `[−1.1σ, −σ]`
/// (eigenvector assignment with random parameter vectors otherwise).
fn place_poles(
    diag: &[f64],
    input: &DMatrix<f64>,
    sigma: f64,
    seed: u64,
) -> Result<DMatrix<f64>, SimulateError> {
    let c = diag.len();
    let p = input.ncols();
    let shifted = DMatrix::from_fn(c, c, |i, j| {
        if i == j {
            diag[i] + sigma
        } else {
            0.0
        }
    });
    let svd = input.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let full_row_rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-12 * sigma_max)
        .count()
        == c;
    if full_row_rank {
        let pinv = svd
            .pseudo_inverse(1e-12 * sigma_max)
            .map_err(|_| SimulateError::PlacementFailed)?;
        // 𝔅·G = −(D+σI) exactly; closed loop is −σ·I.
        return Ok(-(pinv * shifted));
    }
    // Eigenvector assignment: columns xⱼ = −(D−λⱼ)⁻¹𝔅γⱼ, G = Γ X⁻¹ puts the
    // spectrum at {λⱼ}. Targets −σ, −2σ, … keep −σ as the slowest (governing)
    // closed-loop rate; the σ-wide spacing keeps the assigned eigenvectors
    // well separated, so the non-normal transient dies on a 1/σ timescale.
    let targets: Vec<f64> = (0..c).map(|j| -sigma * (1.0 + j as f64)).collect();
    for attempt in 0..32u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let gamma = DMatrix::from_fn(p, c, |_, _| rng.gen_range(-1.0..1.0));
        let mut x = DMatrix::zeros(c, c);
        for (j, &lambda) in targets.iter().enumerate() {
            let bg = input * gamma.column(j);
            for i in 0..c {
                x[(i, j)] = -bg[i] / (diag[i] - lambda);
            }
        }
        let Some(x_inv) = x.clone().try_inverse() else {
            continue;
        };
        if (&x * &x_inv - DMatrix::identity(c, c)).norm() > 1e-8 {
            continue;
        }
        return Ok(&gamma * x_inv);
    }
    Err(SimulateError::PlacementFailed)
}

/// Closed-loop (or free) evolution of the truncated modal system.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub series: TimeSeries,
    /// `(cluster_index, multiplicity)` in stack order.
    pub layout: Vec<(usize, usize)>,
    /// Stacked modal state at each time point.
    pub states: Vec<DVector<f64>>,
}

impl SimulationResult {
    /// View of the state block of one cluster at one time point.
    pub fn cluster_state(&self, time_index: usize, cluster_index: usize) -> Option<DVector<f64>> {
        let mut offset = 0;
        for &(index, width) in &self.layout {
            if index == cluster_index {
                return Some(self.states[time_index].rows(offset, width).into_owned());
            }
            offset += width;
        }
        None
    }
}

/// Integrate `v̇ₙ = μₙvₙ + Bₙᵀu`, `u = Σ Gₙvₙ`, `y = Σ Tₙvₙ` exactly via the
/// matrix exponential of the assembled block system, stepping across the
/// time grid (exponentials are cached per distinct step).
pub fn simulate_closed_loop(
    clusters: &[EigenCluster],
    mode_matrices: &[ModeMatrices],
    gain: Option<&FeedbackGain>,
    coeffs: &ModalCoefficients,
    times: &[f64],
) -> Result<SimulationResult, SimulateError> {
    if clusters.len() != mode_matrices.len() || coeffs.per_cluster.len() != clusters.len() {
        return Err(SimulateError::LayoutMismatch);
    }
    if times.iter().any(|&t| !(t >= 0.0))
        || times.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(SimulateError::InvalidTimes);
    }
    let layout: Vec<(usize, usize)> = clusters
        .iter()
        .map(|c| (c.index, c.multiplicity()))
        .collect();
    let total: usize = layout.iter().map(|&(_, w)| w).sum();
    let q = mode_matrices.first().map(|mm| mm.t.nrows()).unwrap_or(0);
    if total == 0 {
        return Ok(SimulationResult {
            series: TimeSeries {
                times: times.to_vec(),
                outputs: times.iter().map(|_| DVector::zeros(q)).collect(),
            },
            layout,
            states: times.iter().map(|_| DVector::zeros(0)).collect(),
        });
    }
    let offsets: Vec<usize> = layout
        .iter()
        .scan(0, |acc, &(_, w)| {
            let here = *acc;
            *acc += w;
            Some(here)
        })
        .collect();

    // System matrix: diagonal μ plus BᵀG coupling columns of gained clusters.
    let mut system = DMatrix::zeros(total, total);
    for (pos, cluster) in clusters.iter().enumerate() {
        for i in 0..cluster.multiplicity() {
            system[(offsets[pos] + i, offsets[pos] + i)] = cluster.mu;
        }
    }
    if let Some(feedback) = gain {
        for block in &feedback.blocks {
            let source = clusters
                .iter()
                .position(|c| c.index == block.cluster_index)
                .ok_or(SimulateError::GainOutsideTruncation {
                    cluster_index: block.cluster_index,
                })?;
            if block.gain == DMatrix::zeros(block.gain.nrows(), block.gain.ncols()) {
                continue;
            }
            for (target, mm) in mode_matrices.iter().enumerate() {
                let coupling = mm.b.transpose() * &block.gain;
                let mut view = system.view_mut(
                    (offsets[target], offsets[source]),
                    (coupling.nrows(), coupling.ncols()),
                );
                view += coupling;
            }
        }
    }

    let mut state = DVector::zeros(total);
    for (pos, v) in coeffs.per_cluster.iter().enumerate() {
        state.rows_mut(offsets[pos], v.len()).copy_from(v);
    }

    let output = |v: &DVector<f64>| -> DVector<f64> {
        let mut y = DVector::zeros(q);
        for (pos, mm) in mode_matrices.iter().enumerate() {
            y += &mm.t * v.rows(offsets[pos], layout[pos].1);
        }
        y
    };

    let mut cache: Vec<(u64, DMatrix<f64>)> = Vec::new();
    let mut outputs = Vec::with_capacity(times.len());
    let mut states = Vec::with_capacity(times.len());
    let mut t_prev = 0.0;
    for &t in times {
        let dt = t - t_prev;
        if dt > 0.0 {
            let key = dt.to_bits();
            let exp = match cache.iter().find(|(k, _)| *k == key) {
                Some((_, e)) => e.clone(),
                None => {
                    let e = (system.clone() * dt).exp();
                    cache.push((key, e.clone()));
                    e
                }
            };
            state = exp * state;
            t_prev = t;
        }
        outputs.push(output(&state));
        states.push(state.clone());
    }
    Ok(SimulationResult {
        series: TimeSeries {
            times: times.to_vec(),
            outputs,
        },
        layout,
        states,
    })
}

/// Least-squares slope of `log‖y(t)‖` over the window; negative = decay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Estimated rate; `-∞` marks an identically zero output.
    pub rate: f64,
    /// RMS residual of the linear fit.
    pub residual: f64,
    pub points_used: usize,
}

pub fn estimate_decay_rate(
    series: &TimeSeries,
    window: (f64, f64),
) -> Result<DecayFit, SimulateError> {
    let (t0, t1) = window;
    if !(t0 < t1) {
        return Err(SimulateError::WindowOutsideSeries);
    }
    let in_window: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.outputs)
        .filter(|(&t, _)| t >= t0 && t <= t1)
        .map(|(&t, y)| (t, y.norm()))
        .collect();
    if in_window.is_empty() {
        return Err(SimulateError::WindowOutsideSeries);
    }
    let points: Vec<(f64, f64)> = in_window
        .iter()
        .filter(|&&(_, n)| n > 1e-300)
        .map(|&(t, n)| (t, n.ln()))
        .collect();
    if points.len() < 2 {
        // Output is (numerically) zero on the window: decays faster than
        // anything we could fit.
        return Ok(DecayFit {
            rate: f64::NEG_INFINITY,
            residual: 0.0,
            points_used: points.len(),
        });
    }
    let n = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_l = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_t) * (p.1 - mean_l))
        .sum();
    let rate = sxy / sxx;
    let intercept = mean_l - rate * mean_t;
    let residual = (points
        .iter()
        .map(|p| (p.1 - (intercept + rate * p.0)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        rate,
        residual,
        points_used: points.len(),
    })
}
