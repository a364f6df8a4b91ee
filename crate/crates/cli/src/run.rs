//! Orchestration of the analyze / simulate / oracle-check runs on top of a
//! validated configuration.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use outstab_core::oracle::{discretize, guard_band, pbh_output_stab_check, PbhTolerances};
use outstab_core::simulate::ProjectionWarning;
use outstab_core::{
    analyze_modes, cluster_eigenvalues, design_modal_feedback, enumerate_clusters,
    eigenfunction_eval, estimate_decay_rate, raw_eigenvalues, simulate_closed_loop,
    stabilizability_verdict, Domain, EigenCluster, EnumerationPolicy, InitialState,
    ModeMatrices, SimulateError, StabilizabilityReport, TimeSeries,
};

use crate::config::{ConfigError, ConfigIssue, RunConfig, Setup};
use crate::report::{
    self, analysis_doc, reading_name, to_json, AnalysisDoc, DecayDoc, EigenComparisonRow,
    EigenspaceRow, ErrorBody, ErrorDoc, GuardBandRow, GuardBandViolationRow, OracleDoc,
    OracleSide, SpectralSide, ToolInfo, TrajectoryRow, WitnessRow,
};

#[derive(Debug)]
pub enum RunError {
    /// Invalid configuration or device set: exit code 2.
    Config(ConfigError),
    /// Truncation violations and other internal failures: exit code 3.
    Internal(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Internal(_) => 3,
        }
    }

    /// Structured error object for scripting.
    pub fn to_json(&self) -> String {
        let body = match self {
            RunError::Config(e) => ErrorBody {
                kind: "config",
                messages: e.issues.iter().map(|i| i.to_string()).collect(),
            },
            RunError::Internal(message) => ErrorBody {
                kind: "internal",
                messages: vec![message.clone()],
            },
        };
        to_json(&ErrorDoc { error: body })
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "configuration error:\n{e}"),
            RunError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

fn config_error(message: String) -> RunError {
    RunError::Config(ConfigError {
        issues: vec![ConfigIssue {
            line: None,
            message,
        }],
    })
}

/// Shared analysis path: enumerate clusters (at least `min_clusters`, always
/// covering the unstable ones), assemble mode matrices, analyze, decide.
fn analyze(
    config: &RunConfig,
    setup: &Setup,
    clusters: &[EigenCluster],
) -> Result<(Vec<ModeMatrices>, StabilizabilityReport), RunError> {
    let mms: Vec<ModeMatrices> = clusters
        .iter()
        .map(|c| {
            ModeMatrices::assemble(c, &setup.actuators, &setup.sensors, &setup.domain, &setup.quadrature)
        })
        .collect::<Result<_, _>>()
        .map_err(|e| RunError::Internal(e.to_string()))?;
    let analyses = analyze_modes(clusters, &mms, config.tolerances.rank)
        .map_err(|e| RunError::Internal(e.to_string()))?;
    let report = stabilizability_verdict(
        clusters,
        &analyses,
        config.tolerances.zero,
        setup.reading,
        setup.actuators.len(),
    )
    .map_err(|e| RunError::Internal(e.to_string()))?;
    Ok((mms, report))
}

fn analysis_clusters(config: &RunConfig, setup: &Setup) -> Result<Vec<EigenCluster>, RunError> {
    enumerate_clusters(
        &setup.domain,
        setup.k,
        config.truncation.analysis_clusters,
        config.tolerances.cluster,
        config.tolerances.zero,
    )
    .map_err(|e| RunError::Internal(e.to_string()))
}

fn simulation_clusters(config: &RunConfig, setup: &Setup) -> Result<Vec<EigenCluster>, RunError> {
    match setup.domain {
        Domain::Interval { .. } => enumerate_clusters(
            &setup.domain,
            setup.k,
            config.truncation.simulation_modes,
            config.tolerances.cluster,
            config.tolerances.zero,
        )
        .map_err(|e| RunError::Internal(e.to_string())),
        Domain::Rectangle { a, b } => {
            let cap = config.truncation.simulation_max_index;
            // μ decreases in each index, so the largest excluded eigenvalue
            // sits at (cap+1, 1) or (1, cap+1); it must be safely stable.
            let pi = std::f64::consts::PI;
            let first_excluded = f64::max(
                setup.k - ((cap as f64 + 1.0) * pi / a).powi(2) - (pi / b).powi(2),
                setup.k - (pi / a).powi(2) - ((cap as f64 + 1.0) * pi / b).powi(2),
            );
            if first_excluded >= -config.tolerances.zero {
                return Err(RunError::Internal(format!(
                    "truncation violation: simulation_max_index = {cap} leaves unstable modes outside the truncation (first excluded mu = {first_excluded})"
                )));
            }
            let raw = raw_eigenvalues(&setup.domain, setup.k, EnumerationPolicy::MaxIndex(cap))
                .map_err(|e| RunError::Internal(e.to_string()))?;
            Ok(cluster_eigenvalues(
                &raw,
                &setup.domain,
                config.tolerances.cluster,
            ))
        }
    }
}

fn validate_materialized(setup: &Setup) -> Result<(), RunError> {
    let mut devices = setup.actuators.clone();
    devices.extend(setup.sensors.iter().cloned());
    let report = outstab_core::validate_device_set(&setup.domain, &devices);
    if report.is_ok() {
        Ok(())
    } else {
        Err(RunError::Config(ConfigError {
            issues: report
                .violations
                .iter()
                .map(|v| ConfigIssue {
                    line: None,
                    message: v.to_string(),
                })
                .collect(),
        }))
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

pub struct AnalysisOutcome {
    pub doc: AnalysisDoc,
    pub json: String,
    pub stabilizable: bool,
}

pub fn run_analysis(
    config: &RunConfig,
    base_dir: Option<&Path>,
) -> Result<AnalysisOutcome, RunError> {
    let setup = config.materialize(base_dir).map_err(RunError::Config)?;
    validate_materialized(&setup)?;
    let clusters = analysis_clusters(config, &setup)?;
    let (_, report) = analyze(config, &setup, &clusters)?;
    let doc = analysis_doc(config, &report);
    let json = to_json(&doc);
    Ok(AnalysisOutcome {
        stabilizable: report.verdict(),
        doc,
        json,
    })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub struct SimulationOutcome {
    pub csv: String,
    pub summary_json: String,
    pub stabilizable: bool,
}

fn timeseries_csv(series: &TimeSeries) -> String {
    let q = series.outputs.first().map(|y| y.len()).unwrap_or(0);
    let mut text = String::from("t");
    for i in 1..=q {
        let _ = write!(text, ",y_{i}");
    }
    text.push_str(",norm_y\n");
    for (t, y) in series.times.iter().zip(&series.outputs) {
        let _ = write!(text, "{t}");
        for value in y.iter() {
            let _ = write!(text, ",{value}");
        }
        let _ = writeln!(text, ",{}", y.norm());
    }
    text
}

pub fn run_simulation(
    config: &RunConfig,
    base_dir: Option<&Path>,
) -> Result<SimulationOutcome, RunError> {
    let sim = config
        .simulation
        .clone()
        .ok_or_else(|| config_error("simulate requires a [simulation] section".into()))?;
    let setup = config.materialize(base_dir).map_err(RunError::Config)?;
    validate_materialized(&setup)?;
    let clusters = simulation_clusters(config, &setup)?;
    let (mms, report) = analyze(config, &setup, &clusters)?;

    let x0 = config
        .initial_state(base_dir)
        .map_err(RunError::Config)?
        .expect("simulation section present");
    let projection = outstab_core::project_initial_state(
        &x0,
        &clusters,
        &setup.domain,
        &setup.quadrature,
    )
    .map_err(|e| config_error(e.to_string()))?;
    let mut warnings: Vec<String> = projection
        .warnings
        .iter()
        .map(|w| match w {
            ProjectionWarning::CoarseGrid {
                max_spacing,
                required,
            } => format!(
                "tabulated grid is coarse for the retained modes: spacing {max_spacing} exceeds {required}"
            ),
        })
        .collect();

    let analyses = report.modes.clone();
    let (gain, feedback_kind, refusal) = if sim.feedback {
        match design_modal_feedback(
            &clusters,
            &analyses,
            &mms,
            sim.sigma,
            config.tolerances.zero,
            config.seed,
        ) {
            Ok(gain) => (Some(gain), "closed_loop", Vec::new()),
            Err(SimulateError::DesignRefused { witnesses }) => {
                warnings.push(
                    "feedback design refused: unstable uncontrollable content is sensor-visible; simulating the open loop".into(),
                );
                (
                    None,
                    "refused",
                    witnesses
                        .iter()
                        .map(|w| WitnessRow {
                            cluster: w.cluster_index,
                            mu: w.mu,
                        })
                        .collect(),
                )
            }
            Err(e) => return Err(RunError::Internal(e.to_string())),
        }
    } else {
        (None, "open_loop", Vec::new())
    };

    let times = sim.times();
    let result = simulate_closed_loop(&clusters, &mms, gain.as_ref(), &projection.coeffs, &times)
        .map_err(|e| RunError::Internal(e.to_string()))?;
    let window = sim.window();
    let fit = estimate_decay_rate(&result.series, window)
        .map_err(|e| RunError::Internal(e.to_string()))?;
    let all_zero = fit.rate == f64::NEG_INFINITY;
    let doc = DecayDoc {
        tool: ToolInfo::current(),
        schema_version: report::SCHEMA_VERSION,
        k_reading: reading_name(setup.reading),
        feedback: feedback_kind,
        sigma: sim.sigma,
        window: [window.0, window.1],
        rate: (!all_zero).then_some(fit.rate),
        all_zero,
        residual: (!all_zero).then_some(fit.residual),
        points_used: fit.points_used,
        verdict: report.verdict(),
        refusal_witnesses: refusal,
        warnings,
    };
    Ok(SimulationOutcome {
        csv: timeseries_csv(&result.series),
        summary_json: to_json(&doc),
        stabilizable: report.verdict(),
    })
}

// ---------------------------------------------------------------------------
// oracle-check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    Disagree,
    Inconclusive,
}

pub struct OracleOutcome {
    pub json: String,
    pub agreement: Agreement,
    pub stabilizable: bool,
}

fn interp_linear(positions: &[f64], values: &[f64], x: f64) -> f64 {
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

/// Evaluate the configured initial state on the oracle grid.
fn x0_on_grid(
    x0: &InitialState,
    clusters: &[EigenCluster],
    domain: &Domain,
    grid: &outstab_core::oracle::GridInfo,
) -> Result<DVector<f64>, RunError> {
    match x0 {
        InitialState::Tabulated { positions, values } => {
            Ok(grid.sample_field(|p| interp_linear(positions, values, p[0])))
        }
        InitialState::Eigenfunction { .. } | InitialState::Combination { .. } => {
            let terms: Vec<(usize, usize, f64)> = match x0 {
                InitialState::Eigenfunction {
                    cluster_index,
                    member,
                } => vec![(*cluster_index, *member, 1.0)],
                InitialState::Combination { terms } => terms
                    .iter()
                    .map(|t| (t.cluster_index, t.member, t.coefficient))
                    .collect(),
                InitialState::Tabulated { .. } => unreachable!(),
            };
            let mut field = DVector::zeros(grid.node_count());
            for (cluster_index, member, coefficient) in terms {
                let cluster = clusters
                    .iter()
                    .find(|c| c.index == cluster_index)
                    .ok_or_else(|| {
                        config_error(format!(
                            "initial state references cluster {cluster_index} outside the truncation"
                        ))
                    })?;
                let descriptor = cluster.members.get(member - 1).ok_or_else(|| {
                    config_error(format!(
                        "initial state references member {member} of cluster {cluster_index}"
                    ))
                })?;
                field += grid.sample_field(|p| {
                    coefficient * eigenfunction_eval(descriptor, domain, p).unwrap_or(0.0)
                });
            }
            Ok(field)
        }
    }
}

pub fn run_oracle_check(
    config: &RunConfig,
    base_dir: Option<&Path>,
) -> Result<OracleOutcome, RunError> {
    let setup = config.materialize(base_dir).map_err(RunError::Config)?;
    validate_materialized(&setup)?;
    let clusters = analysis_clusters(config, &setup)?;
    let (_, report) = analyze(config, &setup, &clusters)?;

    let oracle_config = config.oracle.clone().unwrap_or_default();
    let resolution = oracle_config.resolution_for(&setup.domain);
    let sys = discretize(
        &setup.domain,
        setup.k,
        &setup.actuators,
        &setup.sensors,
        &resolution,
    )
    .map_err(|e| config_error(e.to_string()))?;
    let eig = sys
        .eigendecompose()
        .map_err(|e| RunError::Internal(e.to_string()))?;
    let pbh = pbh_output_stab_check(
        &sys,
        &eig,
        &PbhTolerances {
            zero_tolerance: config.tolerances.zero,
            rank_tolerance: config.tolerances.rank,
            cluster_tolerance: 1e-6,
        },
    );
    let band = guard_band(&sys, &eig, config.tolerances.zero);

    // Eigenvalue comparison: nearest discrete eigenvalue per analyzed cluster.
    let comparison: Vec<EigenComparisonRow> = report
        .modes
        .iter()
        .map(|m| {
            let mu_oracle = eig
                .values
                .iter()
                .copied()
                .min_by(|a, b| (a - m.mu).abs().total_cmp(&(b - m.mu).abs()))
                .unwrap_or(f64::NAN);
            EigenComparisonRow {
                cluster: m.cluster_index,
                mu_spectral: m.mu,
                mu_oracle,
                abs_error: (mu_oracle - m.mu).abs(),
            }
        })
        .collect();

    // Trajectory comparison when a simulation section is configured: open
    // loop, spectral series truncation vs. the discrete solution.
    let trajectory = match (&config.simulation, config.initial_state(base_dir)) {
        (Some(sim), Ok(Some(x0))) => {
            let sim_clusters = simulation_clusters(config, &setup)?;
            let sim_mms: Vec<ModeMatrices> = sim_clusters
                .iter()
                .map(|c| {
                    ModeMatrices::assemble(
                        c,
                        &setup.actuators,
                        &setup.sensors,
                        &setup.domain,
                        &setup.quadrature,
                    )
                })
                .collect::<Result<_, _>>()
                .map_err(|e| RunError::Internal(e.to_string()))?;
            let projection = outstab_core::project_initial_state(
                &x0,
                &sim_clusters,
                &setup.domain,
                &setup.quadrature,
            )
            .map_err(|e| config_error(e.to_string()))?;
            let times = sim.times();
            let spectral = simulate_closed_loop(
                &sim_clusters,
                &sim_mms,
                None,
                &projection.coeffs,
                &times,
            )
            .map_err(|e| RunError::Internal(e.to_string()))?;
            let x0_grid = x0_on_grid(&x0, &sim_clusters, &setup.domain, &sys.grid)?;
            let discrete = outstab_core::oracle::integrate_lti(&sys, &eig, None, &x0_grid, &times)
                .map_err(|e| RunError::Internal(e.to_string()))?;
            let peak = discrete
                .outputs
                .iter()
                .map(|y| y.amax())
                .fold(0.0_f64, f64::max);
            let deviation = spectral
                .series
                .outputs
                .iter()
                .zip(&discrete.outputs)
                .map(|(a, b)| (a - b).amax())
                .fold(0.0_f64, f64::max);
            Some(TrajectoryRow {
                max_relative_deviation: if peak > 0.0 { deviation / peak } else { 0.0 },
                time_points: times.len(),
            })
        }
        (_, Err(e)) => return Err(RunError::Config(e)),
        _ => None,
    };

    let agreement = if !band.conclusive {
        Agreement::Inconclusive
    } else if report.verdict_refined == pbh.stabilizable {
        Agreement::Agree
    } else {
        Agreement::Disagree
    };
    let doc = OracleDoc {
        tool: ToolInfo::current(),
        schema_version: report::SCHEMA_VERSION,
        agreement: match agreement {
            Agreement::Agree => "agree",
            Agreement::Disagree => "disagree",
            Agreement::Inconclusive => "inconclusive",
        },
        resolution,
        spectral: SpectralSide {
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
        },
        oracle: OracleSide {
            stabilizable: pbh.stabilizable,
            witnesses: pbh.witnesses.clone(),
            unstable_eigenspaces: pbh
                .eigenspaces
                .iter()
                .map(|e| EigenspaceRow {
                    mu: e.mu,
                    dim: e.dim,
                    uncontrollable_dim: e.uncontrollable_dim,
                    visible: e.visible,
                })
                .collect(),
        },
        eigenvalue_comparison: comparison,
        guard_band: GuardBandRow {
            conclusive: band.conclusive,
            violations: band
                .violations
                .iter()
                .map(|&(eigenvalue, band)| GuardBandViolationRow { eigenvalue, band })
                .collect(),
        },
        trajectory,
    };
    Ok(OracleOutcome {
        json: to_json(&doc),
        agreement,
        stabilizable: report.verdict(),
    })
}

// ---------------------------------------------------------------------------
// exit codes
// ---------------------------------------------------------------------------

/// 0 = stabilizable, 1 = not stabilizable, 2 = config error, 3 = internal,
/// 4 = oracle disagreement, 5 = oracle inconclusive.
pub fn verdict_exit_code(stabilizable: bool) -> i32 {
    if stabilizable {
        0
    } else {
        1
    }
}

pub fn agreement_exit_code(agreement: Agreement, stabilizable: bool) -> i32 {
    match agreement {
        Agreement::Agree => verdict_exit_code(stabilizable),
        Agreement::Disagree => 4,
        Agreement::Inconclusive => 5,
    }
}
