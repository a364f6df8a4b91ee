//! Decides output stabilizability of the reaction-diffusion system
//! `z_t = Δz + kz + Σ gᵢuᵢ` with Dirichlet boundary, zone actuators `(Ωᵢ, gᵢ)`
//! and zone sensors `(Dₖ, fₖ)`, on intervals and axis-aligned rectangles.
//!
//! The analysis is spectral: the eigenvalues `μₙ = k − λₙ` of `Δ + kI` are
//! enumerated in closed form, grouped into clusters of multiplicity `rₙ`, and
//! for each cluster the actuator and sensor mode matrices `Bₙ` and `Tₙ` are
//! assembled from `L²` inner products of device profiles with eigenfunctions.
//! The system is output stabilizable iff `μₙ < 0` for every cluster whose
//! uncontrollable coefficient directions (`ker Bₙ`) are visible to the
//! sensors. [`oracle`] carries an independent finite-difference referee that
//! validates every verdict without sharing the spectral code path.
//!
//! Module map:
//! * [`spectral`] — eigenvalue enumeration, clustering, eigenfunction evaluation
//! * [`devices`] — zones, profiles, mode-matrix assembly, device validation
//! * [`quadrature`] — composite Gauss-Legendre rules
//! * [`analysis`] — per-mode kernels/row spaces, index sets J and K, verdict
//! * [`simulate`] — modal projection, output series, feedback design, closed loop
//! * [`oracle`] — finite-difference discretization, PBH check, LTI integration

pub mod analysis;
pub mod devices;
pub mod oracle;
pub mod quadrature;
pub mod simulate;
pub mod spectral;

pub use analysis::{
    analyze_mode, analyze_modes, approx_controllability_check, kernel_basis, mode_subspaces,
    observable_uncontrollable_basis, rowspace_basis, stabilizability_verdict, AnalysisError,
    ApproxControllability, KReading, ModeAnalysis, ModeMatrices, StabilizabilityReport, Witness,
};
pub use devices::{
    assemble_actuator_matrix, assemble_sensor_matrix, device_eigen_inner_product,
    validate_device_set, Device, DeviceError, Profile, Role, ValidationReport, Violation, Zone,
};
pub use quadrature::{GaussLegendre, QuadratureSettings};
pub use simulate::{
    design_modal_feedback, estimate_decay_rate, output_uncontrollable, project_initial_state,
    simulate_closed_loop, DecayFit, FeedbackGain, InitialState, ModalCoefficients,
    SimulateError, SimulationResult, TimeSeries,
};
pub use spectral::{
    cluster_eigenvalues, eigenfunction_eval, enumerate_clusters, raw_eigenvalues,
    unstable_cluster_set, Domain, EigenCluster, EigenFunctionDescriptor, EnumerationPolicy,
    ModeIndices, RawMode, SpectralError,
};
