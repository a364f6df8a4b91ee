//! Brute-force referee for the spectral analysis: a second-order
//! finite-difference discretization of the same PDE, a PBH-style
//! output-stabilizability check on the discrete eigenspaces, and exact LTI
//! integration. No code is shared with the spectral criterion path; the two
//! sides meet only at the problem data (domain, `k`, device definitions).
//!
//! Discrete 3-/5-point Dirichlet Laplacians underestimate the continuous
//! eigenvalue magnitudes (`(4/h²)sin²(mπh/2) ≤ (mπ/L)²`), so a discretely
//! stable eigenvalue is certainly stable, while a discretely unstable one
//! sits above the boundary by a trustworthy margin only when it clears the
//! `O(h²λ²)` error band; the guard-band diagnostic makes that call explicit.

use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::devices::{Device, Role};
use crate::simulate::TimeSeries;
use crate::spectral::Domain;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("oracle resolution must be at least 16 interior points per axis (axis {axis} has {got})")]
    ResolutionTooCoarse { axis: usize, got: usize },
    #[error("resolution must specify one interior count per domain axis")]
    ResolutionDimensionMismatch,
    #[error("system matrix is not symmetric; eigendecomposition refused")]
    NotSymmetric,
    #[error("eigendecomposition failed to converge")]
    EigenFailed,
    #[error("initial state length does not match the grid")]
    StateDimensionMismatch,
    #[error("gain must map the grid state to one input per actuator")]
    GainDimensionMismatch,
    #[error("times must be non-negative and strictly increasing")]
    InvalidTimes,
}

/// Uniform interior grid of the discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct GridInfo {
    pub domain: Domain,
    /// Interior points per axis.
    pub interior: Vec<usize>,
    /// Grid spacing per axis: `h = L/(N+1)`.
    pub spacing: Vec<f64>,
}

impl GridInfo {
    pub fn node_count(&self) -> usize {
        self.interior.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Coordinates of the flat node index (first axis fastest).
    pub fn node_position(&self, flat: usize) -> Vec<f64> {
        match self.interior.len() {
            1 => vec![(flat as f64 + 1.0) * self.spacing[0]],
            2 => {
                let nx = self.interior[0];
                let ix = flat % nx;
                let iy = flat / nx;
                vec![
                    (ix as f64 + 1.0) * self.spacing[0],
                    (iy as f64 + 1.0) * self.spacing[1],
                ]
            }
            _ => unreachable!("grids are 1- or 2-dimensional"),
        }
    }

    /// Sample a field at every interior node.
    pub fn sample_field<F: Fn(&[f64]) -> f64>(&self, f: F) -> DVector<f64> {
        DVector::from_fn(self.node_count(), |i, _| f(&self.node_position(i)))
    }
}

/// The finite LTI triple `(A_h, B_h, C_h)` standing in for the PDE.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    pub a_h: DMatrix<f64>,
    /// Column `i`: actuator profile sampled on the grid, zero outside its zone.
    pub b_h: DMatrix<f64>,
    /// Row `k`: sensor profile times the trapezoid weight, so `C_h·z`
    /// approximates `∫ f_k z`.
    pub c_h: DMatrix<f64>,
    pub grid: GridInfo,
    pub k: f64,
}

/// Central-difference discretization of `Δ + kI` with boundary rows
/// eliminated, plus sampled device maps.
pub fn discretize(
    domain: &Domain,
    k: f64,
    actuators: &[Device],
    sensors: &[Device],
    resolution: &[usize],
) -> Result<DiscreteSystem, OracleError> {
    if resolution.len() != domain.dim() {
        return Err(OracleError::ResolutionDimensionMismatch);
    }
    for (axis, &n) in resolution.iter().enumerate() {
        if n < 16 {
            return Err(OracleError::ResolutionTooCoarse { axis, got: n });
        }
    }
    let spacing: Vec<f64> = resolution
        .iter()
        .enumerate()
        .map(|(axis, &n)| domain.side(axis) / (n as f64 + 1.0))
        .collect();
    let grid = GridInfo {
        domain: *domain,
        interior: resolution.to_vec(),
        spacing,
    };
    let n = grid.node_count();
    let mut a_h = DMatrix::zeros(n, n);
    match domain.dim() {
        1 => {
            let h2 = grid.spacing[0] * grid.spacing[0];
            for i in 0..n {
                a_h[(i, i)] = -2.0 / h2 + k;
                if i + 1 < n {
                    a_h[(i, i + 1)] = 1.0 / h2;
                    a_h[(i + 1, i)] = 1.0 / h2;
                }
            }
        }
        2 => {
            let nx = grid.interior[0];
            let ny = grid.interior[1];
            let hx2 = grid.spacing[0] * grid.spacing[0];
            let hy2 = grid.spacing[1] * grid.spacing[1];
            for iy in 0..ny {
                for ix in 0..nx {
                    let p = ix + iy * nx;
                    a_h[(p, p)] = -2.0 / hx2 - 2.0 / hy2 + k;
                    if ix + 1 < nx {
                        a_h[(p, p + 1)] = 1.0 / hx2;
                        a_h[(p + 1, p)] = 1.0 / hx2;
                    }
                    if iy + 1 < ny {
                        a_h[(p, p + nx)] = 1.0 / hy2;
                        a_h[(p + nx, p)] = 1.0 / hy2;
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    debug_assert!(actuators.iter().all(|d| d.role == Role::Actuator));
    debug_assert!(sensors.iter().all(|d| d.role == Role::Sensor));
    let volume = grid.cell_volume();
    let mut b_h = DMatrix::zeros(n, actuators.len());
    let mut c_h = DMatrix::zeros(sensors.len(), n);
    for node in 0..n {
        let pos = grid.node_position(node);
        for (i, actuator) in actuators.iter().enumerate() {
            if actuator.zone.contains(&pos) {
                b_h[(node, i)] = actuator.profile.eval(domain, &pos);
            }
        }
        for (s, sensor) in sensors.iter().enumerate() {
            if sensor.zone.contains(&pos) {
                c_h[(s, node)] = sensor.profile.eval(domain, &pos) * volume;
            }
        }
    }
    Ok(DiscreteSystem {
        a_h,
        b_h,
        c_h,
        grid,
        k,
    })
}

/// Orthogonal eigendecomposition of `A_h`, eigenvalues descending.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEigen {
    pub values: DVector<f64>,
    /// Columns are ℓ²-orthonormal eigenvectors, aligned with `values`.
    pub vectors: DMatrix<f64>,
}

impl DiscreteSystem {
    pub fn eigendecompose(&self) -> Result<OracleEigen, OracleError> {
        if self.a_h != self.a_h.transpose() {
            return Err(OracleError::NotSymmetric);
        }
        let n = self.a_h.nrows();
        let mat = Mat::from_fn(n, n, |i, j| self.a_h[(i, j)]);
        let evd = mat
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| OracleError::EigenFailed)?;
        let s = evd.S();
        let u = evd.U();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
        let values = DVector::from_fn(n, |i, _| s[order[i]]);
        let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
        Ok(OracleEigen { values, vectors })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbhTolerances {
    pub zero_tolerance: f64,
    pub rank_tolerance: f64,
    /// Relative clustering tolerance for discrete eigenvalues; looser than
    /// the analytic one because discretization splits exact coincidences.
    pub cluster_tolerance: f64,
}

impl Default for PbhTolerances {
    fn default() -> Self {
        PbhTolerances {
            zero_tolerance: 1e-9,
            rank_tolerance: 1e-10,
            cluster_tolerance: 1e-6,
        }
    }
}

/// One unstable discrete eigenspace as the PBH check saw it.
#[derive(Debug, Clone, PartialEq)]
pub struct PbhEigenspace {
    pub mu: f64,
    pub dim: usize,
    pub uncontrollable_dim: usize,
    /// Whether `C_h` is nonzero on the uncontrollable part.
    pub visible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PbhOutcome {
    pub stabilizable: bool,
    /// Eigenvalues of the defeating eigenspaces.
    pub witnesses: Vec<f64>,
    pub eigenspaces: Vec<PbhEigenspace>,
}

/// Same rank policy as the spectral side (absolute floor plus relative
/// cutoff), reimplemented here so the referee shares no analysis code.
fn split_rank(m: &DMatrix<f64>, rank_tolerance: f64) -> (usize, DMatrix<f64>) {
    let cols = m.ncols();
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd
        .singular_values
        .iter()
        .fold(0.0_f64, |a, &s| a.max(s));
    let rank = if sigma_max <= rank_tolerance {
        0
    } else {
        svd.singular_values
            .iter()
            .filter(|&&s| s > rank_tolerance * sigma_max)
            .count()
    };
    if rank == 0 {
        return (0, DMatrix::identity(cols, cols));
    }
    (rank, v_t.rows(rank, cols - rank).transpose())
}

/// PBH-style check: the system is output stabilizable iff no unstable
/// discrete eigenspace carries a direction orthogonal to every actuator
/// column yet visible to `C_h`.
pub fn pbh_output_stab_check(
    sys: &DiscreteSystem,
    eig: &OracleEigen,
    tol: &PbhTolerances,
) -> PbhOutcome {
    let n = eig.values.len();
    let volume = sys.grid.cell_volume();
    let scale = 1.0 / volume.sqrt();
    let mut eigenspaces = Vec::new();
    let mut witnesses = Vec::new();
    let mut start = 0;
    while start < n {
        let anchor = eig.values[start];
        if anchor < -tol.zero_tolerance {
            break;
        }
        let mut end = start + 1;
        while end < n
            && (anchor - eig.values[end]).abs() <= tol.cluster_tolerance * anchor.abs().max(1.0)
        {
            end += 1;
        }
        let dim = end - start;
        let mu = eig.values.rows(start, dim).sum() / dim as f64;
        // L²-normalized eigenvectors: scale ℓ²-unit columns by 1/√volume so
        // the restricted maps live on the same scale as the analytic B, T.
        let basis = eig.vectors.columns(start, dim) * scale;
        let b_restricted = (sys.b_h.transpose() * &basis) * volume;
        let (_, kernel) = split_rank(&b_restricted, tol.rank_tolerance);
        let uncontrollable_dim = kernel.ncols();
        let mut visible = false;
        if uncontrollable_dim > 0 {
            let c_restricted = (&sys.c_h * &basis) * kernel;
            let (c_rank, _) = split_rank(&c_restricted, tol.rank_tolerance);
            visible = c_rank > 0;
        }
        if visible {
            witnesses.push(mu);
        }
        eigenspaces.push(PbhEigenspace {
            mu,
            dim,
            uncontrollable_dim,
            visible,
        });
        start = end;
    }
    PbhOutcome {
        stabilizable: witnesses.is_empty(),
        witnesses,
        eigenspaces,
    }
}

/// Trustworthiness of the sign pattern near the stability boundary: an
/// unstable discrete eigenvalue is conclusive when it clears ten times its
/// own `O(h²λ²)` discretization-error estimate. (Discretely stable
/// eigenvalues need no band: the discrete spectrum lies above the continuous
/// one, so stable readings are one-sided safe.)
#[derive(Debug, Clone, PartialEq)]
pub struct GuardBand {
    pub conclusive: bool,
    /// `(eigenvalue, band)` pairs that sit inside their guard band.
    pub violations: Vec<(f64, f64)>,
}

pub fn guard_band(sys: &DiscreteSystem, eig: &OracleEigen, zero_tolerance: f64) -> GuardBand {
    let h_max = sys
        .grid
        .spacing
        .iter()
        .fold(0.0_f64, |a, &h| a.max(h));
    let mut violations = Vec::new();
    for &lambda in eig.values.iter() {
        if lambda < -zero_tolerance {
            break;
        }
        let laplacian_part = sys.k - lambda;
        let error_estimate = h_max * h_max * laplacian_part * laplacian_part / 12.0;
        let band = 10.0 * error_estimate;
        if lambda <= band {
            violations.push((lambda, band));
        }
    }
    GuardBand {
        conclusive: violations.is_empty(),
        violations,
    }
}

/// Exact trajectory of the (optionally closed-loop) discrete system.
///
/// Open loop reuses the symmetric eigendecomposition; with a grid gain
/// `F` (p×N) the nonsymmetric `A_h + B_h F` is stepped through cached matrix
/// exponentials.
pub fn integrate_lti(
    sys: &DiscreteSystem,
    eig: &OracleEigen,
    gain: Option<&DMatrix<f64>>,
    x0: &DVector<f64>,
    times: &[f64],
) -> Result<TimeSeries, OracleError> {
    let n = sys.a_h.nrows();
    if x0.len() != n {
        return Err(OracleError::StateDimensionMismatch);
    }
    if times.iter().any(|&t| !(t >= 0.0)) || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(OracleError::InvalidTimes);
    }
    match gain {
        None => {
            let coeffs = eig.vectors.transpose() * x0;
            let c_modes = &sys.c_h * &eig.vectors;
            let outputs = times
                .iter()
                .map(|&t| {
                    let evolved =
                        DVector::from_fn(n, |i, _| coeffs[i] * (eig.values[i] * t).exp());
                    &c_modes * evolved
                })
                .collect();
            Ok(TimeSeries {
                times: times.to_vec(),
                outputs,
            })
        }
        Some(f) => {
            if f.nrows() != sys.b_h.ncols() || f.ncols() != n {
                return Err(OracleError::GainDimensionMismatch);
            }
            let closed = &sys.a_h + &sys.b_h * f;
            let mut cache: Vec<(u64, DMatrix<f64>)> = Vec::new();
            let mut state = x0.clone();
            let mut t_prev = 0.0;
            let mut outputs = Vec::with_capacity(times.len());
            for &t in times {
                let dt = t - t_prev;
                if dt > 0.0 {
                    let key = dt.to_bits();
                    let exp = match cache.iter().find(|(k, _)| *k == key) {
                        Some((_, e)) => e.clone(),
                        None => {
                            let e = (closed.clone() * dt).exp();
                            cache.push((key, e.clone()));
                            e
                        }
                    };
                    state = exp * state;
                    t_prev = t;
                }
                outputs.push(&sys.c_h * &state);
            }
            Ok(TimeSeries {
                times: times.to_vec(),
                outputs,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{Profile, Zone};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn constant_device(role: Role, c: f64, d: f64, label: &str) -> Device {
        Device::new(
            role,
            Zone::interval(c, d).unwrap(),
            Profile::Constant { value: 1.0 },
            label,
        )
    }

    #[test]
    fn textbook_tridiagonal_stencil() {
        let dom = Domain::interval(1.0).unwrap();
        let sys = discretize(&dom, 3.0, &[], &[], &[16]).unwrap();
        let h2 = sys.grid.spacing[0] * sys.grid.spacing[0];
        assert_abs_diff_eq!(sys.a_h[(0, 0)], -2.0 / h2 + 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sys.a_h[(0, 1)], 1.0 / h2, epsilon = 1e-9);
        assert_eq!(sys.a_h[(0, 2)], 0.0);
        assert_eq!(sys.a_h, sys.a_h.transpose());
    }

    #[test]
    fn non_symmetric_matrix_refused() {
        let dom = Domain::interval(1.0).unwrap();
        let mut sys = discretize(&dom, 0.0, &[], &[], &[16]).unwrap();
        sys.a_h[(0, 1)] += 1.0;
        assert_eq!(sys.eigendecompose().unwrap_err(), OracleError::NotSymmetric);
    }

    #[test]
    fn resolution_below_minimum_rejected() {
        let dom = Domain::interval(1.0).unwrap();
        assert_eq!(
            discretize(&dom, 0.0, &[], &[], &[15]).unwrap_err(),
            OracleError::ResolutionTooCoarse { axis: 0, got: 15 }
        );
        assert_eq!(
            discretize(&dom, 0.0, &[], &[], &[64, 64]).unwrap_err(),
            OracleError::ResolutionDimensionMismatch
        );
    }

    #[test]
    fn discrete_spectrum_matches_closed_form_and_continuum() {
        // λ_m = −(4/h²)sin²(mπh/2): the eigensolver must reproduce it to
        // roundoff, and at N = 511 the first mode matches π² to 3e-5 rel.
        let dom = Domain::interval(1.0).unwrap();
        let sys = discretize(&dom, 0.0, &[], &[], &[511]).unwrap();
        let eig = sys.eigendecompose().unwrap();
        let h = sys.grid.spacing[0];
        for m in 1..=5usize {
            let closed = -(4.0 / (h * h)) * (m as f64 * PI * h / 2.0).sin().powi(2);
            assert_abs_diff_eq!(eig.values[m - 1], closed, epsilon = 1e-7);
        }
        let relative = (eig.values[0] + PI * PI).abs() / (PI * PI);
        assert!(relative < 3e-5, "relative error {relative}");
    }

    #[test]
    fn eigenvalue_convergence_is_second_order() {
        let dom = Domain::interval(1.0).unwrap();
        let mut errors = Vec::new();
        for n in [64usize, 128, 256] {
            let sys = discretize(&dom, 0.0, &[], &[], &[n]).unwrap();
            let eig = sys.eigendecompose().unwrap();
            let err: f64 = (1..=5)
                .map(|m| {
                    let exact = -((m as f64) * PI).powi(2);
                    (eig.values[m - 1] - exact).abs()
                })
                .sum();
            errors.push(err);
        }
        let order1 = (errors[0] / errors[1]).log2();
        let order2 = (errors[1] / errors[2]).log2();
        for order in [order1, order2] {
            assert!(
                (1.8..=2.2).contains(&order),
                "fitted order {order} outside [1.8, 2.2]"
            );
        }
    }

    #[test]
    fn trapezoid_sensor_row_approximates_the_integral() {
        let dom = Domain::interval(1.0).unwrap();
        let sensor = constant_device(Role::Sensor, 0.0, 1.0, "s");
        let sys = discretize(&dom, 0.0, &[], std::slice::from_ref(&sensor), &[511]).unwrap();
        let samples = sys.grid.sample_field(|pos| (PI * pos[0]).sin());
        let value = (&sys.c_h * samples)[0];
        assert_abs_diff_eq!(value, 2.0 / PI, epsilon = 1e-5);
    }

    #[test]
    fn pbh_trivially_stabilizable_without_unstable_modes() {
        let dom = Domain::interval(1.0).unwrap();
        let act = constant_device(Role::Actuator, 0.0, 0.5, "a");
        let sen = constant_device(Role::Sensor, 0.0, 1.0, "s");
        let sys = discretize(
            &dom,
            0.0,
            std::slice::from_ref(&act),
            std::slice::from_ref(&sen),
            &[64],
        )
        .unwrap();
        let eig = sys.eigendecompose().unwrap();
        let outcome = pbh_output_stab_check(&sys, &eig, &PbhTolerances::default());
        assert!(outcome.stabilizable);
        assert!(outcome.eigenspaces.is_empty());
    }

    #[test]
    fn pbh_rejects_the_sine_actuator_counterexample() {
        // Actuator sin(2πξ) on (0,1), constant sensor, k = 50: mode 1 is
        // uncontrollable but visible; witness near 50 − π².
        let dom = Domain::interval(1.0).unwrap();
        let act = Device::new(
            Role::Actuator,
            Zone::interval(0.0, 1.0).unwrap(),
            Profile::SineProduct {
                modes: vec![2],
                amplitude: 1.0,
            },
            "sin2",
        );
        let sen = constant_device(Role::Sensor, 0.0, 1.0, "s");
        let sys = discretize(
            &dom,
            50.0,
            std::slice::from_ref(&act),
            std::slice::from_ref(&sen),
            &[511],
        )
        .unwrap();
        let eig = sys.eigendecompose().unwrap();
        let outcome = pbh_output_stab_check(&sys, &eig, &PbhTolerances::default());
        assert!(!outcome.stabilizable);
        assert_eq!(outcome.witnesses.len(), 1);
        assert_abs_diff_eq!(outcome.witnesses[0], 50.0 - PI * PI, epsilon = 1e-2);
        assert!(guard_band(&sys, &eig, 1e-9).conclusive);
    }

    #[test]
    fn pbh_accepts_when_actuator_matches_the_unstable_eigenvector() {
        let dom = Domain::interval(1.0).unwrap();
        let sen = constant_device(Role::Sensor, 0.0, 1.0, "s");
        let mut sys = discretize(&dom, 50.0, &[], std::slice::from_ref(&sen), &[64]).unwrap();
        let eig = sys.eigendecompose().unwrap();
        // Two unstable modes at k = 50; feed both eigenvectors in as columns.
        sys.b_h = DMatrix::from_columns(&[
            eig.vectors.column(0).into_owned(),
            eig.vectors.column(1).into_owned(),
        ]);
        let outcome = pbh_output_stab_check(&sys, &eig, &PbhTolerances::default());
        assert!(outcome.stabilizable);
        assert_eq!(outcome.eigenspaces.len(), 2);
        assert!(outcome.eigenspaces.iter().all(|e| e.uncontrollable_dim == 0));
    }

    #[test]
    fn square_grid_preserves_the_degenerate_pair() {
        let dom = Domain::rectangle(1.0, 1.0).unwrap();
        let act = Device::new(
            Role::Actuator,
            Zone::rectangle(0.0, 0.5, 0.0, 0.5).unwrap(),
            Profile::Constant { value: 1.0 },
            "corner",
        );
        let sen = Device::new(
            Role::Sensor,
            Zone::rectangle(0.15, 0.85, 0.25, 0.6).unwrap(),
            Profile::Constant { value: 1.0 },
            "probe",
        );
        let sys = discretize(
            &dom,
            60.0,
            std::slice::from_ref(&act),
            std::slice::from_ref(&sen),
            &[24, 24],
        )
        .unwrap();
        let eig = sys.eigendecompose().unwrap();
        let outcome = pbh_output_stab_check(&sys, &eig, &PbhTolerances::default());
        // Eigenspaces: (1,1) simple, then the exactly degenerate (1,2)/(2,1)
        // pair. One symmetric actuator leaves its antisymmetric direction
        // uncontrollable and the generic sensor sees it.
        assert_eq!(outcome.eigenspaces.len(), 2);
        assert_eq!(outcome.eigenspaces[0].dim, 1);
        assert_eq!(outcome.eigenspaces[1].dim, 2);
        assert_eq!(outcome.eigenspaces[1].uncontrollable_dim, 1);
        assert!(outcome.eigenspaces[1].visible);
        assert!(!outcome.stabilizable);
    }

    #[test]
    fn open_loop_integration_of_an_eigenvector_is_a_pure_exponential() {
        let dom = Domain::interval(1.0).unwrap();
        let sen = constant_device(Role::Sensor, 0.0, 1.0, "s");
        let sys = discretize(&dom, 0.0, &[], std::slice::from_ref(&sen), &[64]).unwrap();
        let eig = sys.eigendecompose().unwrap();
        let x0 = eig.vectors.column(0).into_owned();
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.005).collect();
        let series = integrate_lti(&sys, &eig, None, &x0, &times).unwrap();
        let y0 = series.outputs[0][0];
        for (i, &t) in times.iter().enumerate() {
            let expected = y0 * (eig.values[0] * t).exp();
            assert_abs_diff_eq!(series.outputs[i][0], expected, epsilon = 1e-8 * y0.abs());
        }
    }

    #[test]
    fn zero_sensor_map_means_zero_output() {
        let dom = Domain::interval(1.0).unwrap();
        let dead_sensor = Device::new(
            Role::Sensor,
            Zone::interval(0.0, 1.0).unwrap(),
            Profile::Constant { value: 0.0 },
            "dead",
        );
        let sys =
            discretize(&dom, 10.0, &[], std::slice::from_ref(&dead_sensor), &[32]).unwrap();
        let eig = sys.eigendecompose().unwrap();
        let x0 = sys.grid.sample_field(|p| p[0] * (1.0 - p[0]));
        let times = [0.0, 0.5, 1.0];
        let series = integrate_lti(&sys, &eig, None, &x0, &times).unwrap();
        assert!(series.outputs.iter().all(|y| y.norm() == 0.0));
    }

    #[test]
    fn closed_loop_grid_feedback_stabilizes_the_output() {
        // k = 15 leaves exactly mode 1 unstable; feed back its own modal
        // coordinate: u = −c·⟨x, v₁⟩ with B the indicator of (0.2, 0.8).
        let dom = Domain::interval(1.0).unwrap();
        let act = constant_device(Role::Actuator, 0.2, 0.8, "a");
        let sen = constant_device(Role::Sensor, 0.0, 1.0, "s");
        let sys = discretize(
            &dom,
            15.0,
            std::slice::from_ref(&act),
            std::slice::from_ref(&sen),
            &[64],
        )
        .unwrap();
        let eig = sys.eigendecompose().unwrap();
        assert!(eig.values[0] > 0.0 && eig.values[1] < 0.0);
        let v1 = eig.vectors.column(0).into_owned();
        let b1 = (sys.b_h.transpose() * &v1)[(0, 0)];
        let shift = (eig.values[0] + 1.0) / b1;
        let gain = DMatrix::from_fn(1, sys.a_h.nrows(), |_, j| -shift * v1[j]);
        let x0 = v1.clone();
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let series = integrate_lti(&sys, &eig, Some(&gain), &x0, &times).unwrap();
        let fit = crate::simulate::estimate_decay_rate(&series, (1.0, 4.0)).unwrap();
        assert!(
            (fit.rate + 1.0).abs() < 0.05,
            "closed-loop rate {} should be ≈ −1",
            fit.rate
        );
    }
}
