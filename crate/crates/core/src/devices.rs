//! Zone actuators `(Ωᵢ, gᵢ)` and sensors `(Dₖ, fₖ)`, and the `L²` inner
//! products `⟨gᵢ, φₙⱼ⟩`, `⟨fₖ, φₙⱼ⟩` that fill the mode matrices `Bₙ`, `Tₙ`.
//!
//! Constant, polynomial and sine-product profiles integrate against the sine
//! eigenfunctions in closed form (machine precision); tabulated profiles are
//! interpolated linearly and integrated with composite Gauss-Legendre cells
//! aligned with the sample grid. Profiles are zero-extended outside their
//! zone, so every integral runs over the zone only.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::quadrature::{GaussLegendre, QuadratureSettings};
use crate::spectral::{Domain, EigenCluster, EigenFunctionDescriptor};

#[derive(Debug, Error, PartialEq)]
pub enum DeviceError {
    #[error("zone bounds must be finite with lower < upper on every axis")]
    InvalidZoneBounds,
    #[error("device '{label}': zone does not fit inside the domain")]
    ZoneOutsideDomain { label: String },
    #[error("device '{label}': zone dimension does not match the domain")]
    DimensionMismatch { label: String },
    #[error("device '{label}': expected role {expected:?}")]
    RoleMismatch { label: String, expected: Role },
    #[error("device '{label}': tabulated profile needs at least 2 samples")]
    TabulatedTooFewSamples { label: String },
    #[error("device '{label}': tabulated positions must be strictly increasing")]
    TabulatedNotIncreasing { label: String },
    #[error("device '{label}': tabulated samples must cover the zone")]
    TabulatedDoesNotCoverZone { label: String },
    #[error("device '{label}': tabulated profiles are supported on intervals only")]
    TabulatedUnsupportedDimension { label: String },
    #[error("device '{label}': profile parameters do not match the domain dimension")]
    ProfileDimensionMismatch { label: String },
    #[error("device '{label}': sine-product profile modes must be positive")]
    SineModeZero { label: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Actuator,
    Sensor,
}

/// Open sub-box of the domain carrying a device.
#[derive(Debug, Clone, PartialEq)]
pub struct Zone {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Zone {
    pub fn interval(c: f64, d: f64) -> Result<Self, DeviceError> {
        Self::new(vec![c], vec![d])
    }

    pub fn rectangle(c1: f64, d1: f64, c2: f64, d2: f64) -> Result<Self, DeviceError> {
        Self::new(vec![c1, c2], vec![d1, d2])
    }

    fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, DeviceError> {
        let ok = lower.len() == upper.len()
            && lower
                .iter()
                .zip(&upper)
                .all(|(&c, &d)| c.is_finite() && d.is_finite() && c < d);
        if !ok {
            return Err(DeviceError::InvalidZoneBounds);
        }
        Ok(Zone { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.lower[axis]
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.upper[axis]
    }

    /// Closed containment of a point.
    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .enumerate()
                .all(|(axis, &x)| x >= self.lower[axis] && x <= self.upper[axis])
    }

    /// Containment within the closure of the domain.
    pub fn inside(&self, domain: &Domain) -> bool {
        self.dim() == domain.dim()
            && (0..self.dim())
                .all(|axis| self.lower[axis] >= 0.0 && self.upper[axis] <= domain.side(axis))
    }

    /// Whether the open boxes intersect.
    pub fn overlaps(&self, other: &Zone) -> bool {
        self.dim() == other.dim()
            && (0..self.dim())
                .all(|axis| self.lower[axis] < other.upper[axis] && other.lower[axis] < self.upper[axis])
    }
}

/// Spatial profile of a device over its zone.
///
/// Polynomials and sine products are separable across axes: on a rectangle
/// the profile is the product of the per-axis factors. Sine-product modes are
/// taken relative to the full domain sides, so a full-zone sine profile is
/// exactly orthogonal to mismatched eigenfunctions.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// One coefficient list per axis, ascending powers of the global
    /// coordinate; the profile is the product over axes.
    Polynomial {
        axis_coeffs: Vec<Vec<f64>>,
    },
    /// `amplitude · Π sin(modesᵢ·π·ξᵢ/Lᵢ)`.
    SineProduct {
        modes: Vec<u32>,
        amplitude: f64,
    },
    /// Piecewise-linear samples on a strictly increasing grid covering the
    /// zone (intervals only).
    Tabulated {
        positions: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Profile {
    /// Point evaluation; `domain` supplies the sides for sine products.
    pub fn eval(&self, domain: &Domain, point: &[f64]) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Polynomial { axis_coeffs } => axis_coeffs
                .iter()
                .zip(point)
                .map(|(coeffs, &x)| horner(coeffs, x))
                .product(),
            Profile::SineProduct { modes, amplitude } => {
                let mut v = *amplitude;
                for (axis, (&m, &x)) in modes.iter().zip(point).enumerate() {
                    v *= (m as f64 * PI * x / domain.side(axis)).sin();
                }
                v
            }
            Profile::Tabulated { positions, values } => interp_linear(positions, values, point[0]),
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn interp_linear(positions: &[f64], values: &[f64], x: f64) -> f64 {
    match positions.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => values[i],
        Err(0) => values[0],
        Err(i) if i >= positions.len() => values[values.len() - 1],
        Err(i) => {
            let (x0, x1) = (positions[i - 1], positions[i]);
            let t = (x - x0) / (x1 - x0);
            values[i - 1] * (1.0 - t) + values[i] * t
        }
    }
}

/// An actuator or sensor: a zone, a profile, and a label for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub role: Role,
    pub zone: Zone,
    pub profile: Profile,
    pub label: String,
}

impl Device {
    pub fn new(role: Role, zone: Zone, profile: Profile, label: impl Into<String>) -> Self {
        Device {
            role,
            zone,
            profile,
            label: label.into(),
        }
    }
}

// ---------------------------------------------------------------------------
// closed-form axis integrals
// ---------------------------------------------------------------------------

/// `∫_c^d sin(ωx) dx`.
fn int_sin(omega: f64, c: f64, d: f64) -> f64 {
    ((omega * c).cos() - (omega * d).cos()) / omega
}

/// Antiderivative pair (`∫x^j sin(ωx)`, `∫x^j cos(ωx)`) evaluated at `x`,
/// by the integration-by-parts recurrence.
fn sin_cos_antiderivatives(degree: usize, omega: f64, x: f64) -> (Vec<f64>, Vec<f64>) {
    let (s, c) = ((omega * x).sin(), (omega * x).cos());
    let mut sint = vec![0.0; degree + 1];
    let mut cint = vec![0.0; degree + 1];
    sint[0] = -c / omega;
    cint[0] = s / omega;
    let mut xpow = 1.0;
    for j in 1..=degree {
        xpow *= x;
        let jf = j as f64;
        sint[j] = -xpow * c / omega + jf / omega * cint[j - 1];
        cint[j] = xpow * s / omega - jf / omega * sint[j - 1];
    }
    (sint, cint)
}

/// `∫_c^d p(x)·sin(ωx) dx` for `p` in ascending-power coefficients.
fn int_poly_sin(coeffs: &[f64], omega: f64, c: f64, d: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let degree = coeffs.len() - 1;
    let (s_hi, _) = sin_cos_antiderivatives(degree, omega, d);
    let (s_lo, _) = sin_cos_antiderivatives(degree, omega, c);
    coeffs
        .iter()
        .enumerate()
        .map(|(j, &a)| a * (s_hi[j] - s_lo[j]))
        .sum()
}

/// `∫_c^d sin(pπx/L)·sin(mπx/L) dx` by product-to-sum.
fn int_sin_sin(p: u32, m: u32, side: f64, c: f64, d: f64) -> f64 {
    let base = PI / side;
    if p == m {
        let w = 2.0 * m as f64 * base;
        0.5 * ((d - c) - ((w * d).sin() - (w * c).sin()) / w)
    } else {
        let wm = (p as f64 - m as f64) * base;
        let wp = (p as f64 + m as f64) * base;
        0.5 * (((wm * d).sin() - (wm * c).sin()) / wm - ((wp * d).sin() - (wp * c).sin()) / wp)
    }
}

// ---------------------------------------------------------------------------
// inner products
// ---------------------------------------------------------------------------

fn check_device(device: &Device, domain: &Domain) -> Result<(), DeviceError> {
    let label = || device.label.clone();
    if device.zone.dim() != domain.dim() {
        return Err(DeviceError::DimensionMismatch { label: label() });
    }
    if !device.zone.inside(domain) {
        return Err(DeviceError::ZoneOutsideDomain { label: label() });
    }
    match &device.profile {
        Profile::Constant { .. } => {}
        Profile::Polynomial { axis_coeffs } => {
            if axis_coeffs.len() != domain.dim() {
                return Err(DeviceError::ProfileDimensionMismatch { label: label() });
            }
        }
        Profile::SineProduct { modes, .. } => {
            if modes.len() != domain.dim() {
                return Err(DeviceError::ProfileDimensionMismatch { label: label() });
            }
            if modes.iter().any(|&m| m == 0) {
                return Err(DeviceError::SineModeZero { label: label() });
            }
        }
        Profile::Tabulated { positions, values } => {
            if domain.dim() != 1 {
                return Err(DeviceError::TabulatedUnsupportedDimension { label: label() });
            }
            if positions.len() < 2 || positions.len() != values.len() {
                return Err(DeviceError::TabulatedTooFewSamples { label: label() });
            }
            if positions.windows(2).any(|w| w[0] >= w[1]) {
                return Err(DeviceError::TabulatedNotIncreasing { label: label() });
            }
            if positions[0] > device.zone.lower(0) || positions[positions.len() - 1] < device.zone.upper(0)
            {
                return Err(DeviceError::TabulatedDoesNotCoverZone { label: label() });
            }
        }
    }
    Ok(())
}

/// `∫_zone profile·φₙⱼ`: closed forms for constant/polynomial/sine-product
/// profiles, composite Gauss-Legendre for tabulated ones.
pub fn device_eigen_inner_product(
    device: &Device,
    descriptor: &EigenFunctionDescriptor,
    domain: &Domain,
    quadrature: &QuadratureSettings,
) -> Result<f64, DeviceError> {
    check_device(device, domain)?;
    let modes = descriptor.mode_indices.as_vec();
    debug_assert_eq!(modes.len(), domain.dim());
    let norm = descriptor.normalization;
    let value = match &device.profile {
        Profile::Constant { value } => {
            let mut acc = *value * norm;
            for (axis, &m) in modes.iter().enumerate() {
                let omega = m as f64 * PI / domain.side(axis);
                acc *= int_sin(omega, device.zone.lower(axis), device.zone.upper(axis));
            }
            acc
        }
        Profile::Polynomial { axis_coeffs } => {
            let mut acc = norm;
            for (axis, &m) in modes.iter().enumerate() {
                let omega = m as f64 * PI / domain.side(axis);
                acc *= int_poly_sin(
                    &axis_coeffs[axis],
                    omega,
                    device.zone.lower(axis),
                    device.zone.upper(axis),
                );
            }
            acc
        }
        Profile::SineProduct {
            modes: profile_modes,
            amplitude,
        } => {
            let mut acc = *amplitude * norm;
            for (axis, &m) in modes.iter().enumerate() {
                acc *= int_sin_sin(
                    profile_modes[axis],
                    m,
                    domain.side(axis),
                    device.zone.lower(axis),
                    device.zone.upper(axis),
                );
            }
            acc
        }
        Profile::Tabulated { positions, .. } => {
            // Cells aligned with both the sample grid and the zone bounds.
            let (lo, hi) = (device.zone.lower(0), device.zone.upper(0));
            let mut bounds = vec![lo];
            bounds.extend(positions.iter().copied().filter(|&p| p > lo && p < hi));
            bounds.push(hi);
            let cells: Vec<(f64, f64)> = bounds.windows(2).map(|w| (w[0], w[1])).collect();
            let rule = GaussLegendre::new(quadrature.order);
            let profile = &device.profile;
            rule.integrate_cells(&cells, quadrature.subdivisions, |x| {
                let point = [x];
                profile.eval(domain, &point)
                    * crate::spectral::eigenfunction_eval(descriptor, domain, &point)
                        .expect("cell nodes lie inside the domain")
            })
        }
    };
    Ok(value)
}

/// Fully numerical route for the same integral, all profile kinds. This is
/// the cross-check path for the closed forms; it never consults them.
pub fn quadrature_inner_product(
    device: &Device,
    descriptor: &EigenFunctionDescriptor,
    domain: &Domain,
    quadrature: &QuadratureSettings,
) -> Result<f64, DeviceError> {
    check_device(device, domain)?;
    let rule = GaussLegendre::new(quadrature.order);
    let profile = &device.profile;
    let value = match domain.dim() {
        1 => {
            let cells = [(device.zone.lower(0), device.zone.upper(0))];
            rule.integrate_cells(&cells, quadrature.subdivisions, |x| {
                let point = [x];
                profile.eval(domain, &point)
                    * crate::spectral::eigenfunction_eval(descriptor, domain, &point).unwrap()
            })
        }
        2 => {
            let outer = [(device.zone.lower(0), device.zone.upper(0))];
            let inner = [(device.zone.lower(1), device.zone.upper(1))];
            rule.integrate_cells(&outer, quadrature.subdivisions, |x| {
                rule.integrate_cells(&inner, quadrature.subdivisions, |y| {
                    let point = [x, y];
                    profile.eval(domain, &point)
                        * crate::spectral::eigenfunction_eval(descriptor, domain, &point).unwrap()
                })
            })
        }
        _ => unreachable!("domains are 1- or 2-dimensional"),
    };
    Ok(value)
}

fn assemble_matrix(
    cluster: &EigenCluster,
    devices: &[Device],
    expected_role: Role,
    domain: &Domain,
    quadrature: &QuadratureSettings,
) -> Result<DMatrix<f64>, DeviceError> {
    for device in devices {
        if device.role != expected_role {
            return Err(DeviceError::RoleMismatch {
                label: device.label.clone(),
                expected: expected_role,
            });
        }
    }
    let rows = devices.len();
    let cols = cluster.multiplicity();
    let mut entries = Vec::with_capacity(rows * cols);
    // Column-major fill: columns follow the cluster's member order.
    for member in &cluster.members {
        for device in devices {
            entries.push(device_eigen_inner_product(
                device, member, domain, quadrature,
            )?);
        }
    }
    Ok(DMatrix::from_vec(rows, cols, entries))
}

/// `Bₙ`: entry `(i, j) = ⟨gᵢ, φₙⱼ⟩`, rows in actuator-list order, columns in
/// cluster-member order.
pub fn assemble_actuator_matrix(
    cluster: &EigenCluster,
    actuators: &[Device],
    domain: &Domain,
    quadrature: &QuadratureSettings,
) -> Result<DMatrix<f64>, DeviceError> {
    assemble_matrix(cluster, actuators, Role::Actuator, domain, quadrature)
}

/// `Tₙ`: entry `(k, j) = ⟨fₖ, φₙⱼ⟩`.
pub fn assemble_sensor_matrix(
    cluster: &EigenCluster,
    sensors: &[Device],
    domain: &Domain,
    quadrature: &QuadratureSettings,
) -> Result<DMatrix<f64>, DeviceError> {
    assemble_matrix(cluster, sensors, Role::Sensor, domain, quadrature)
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Zone not contained in the domain, or dimension mismatch.
    Containment { label: String, detail: String },
    /// Two actuator zones intersect (the standing assumption Ωᵢ∩Ωⱼ = ∅).
    ActuatorOverlap { first: String, second: String },
    /// Profile parameters invalid for the device's zone or the domain.
    Profile { label: String, detail: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Containment { label, detail } => {
                write!(f, "device '{label}': {detail}")
            }
            Violation::ActuatorOverlap { first, second } => {
                write!(f, "actuators '{first}' and '{second}' have overlapping zones")
            }
            Violation::Profile { label, detail } => write!(f, "device '{label}': {detail}"),
        }
    }
}

/// Outcome of [`validate_device_set`]; analysis refuses to run unless
/// [`ValidationReport::is_ok`] holds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check zone containment, actuator-zone disjointness and profile
/// well-formedness for a whole device set. Sensor zones may overlap freely.
pub fn validate_device_set(domain: &Domain, devices: &[Device]) -> ValidationReport {
    let mut violations = Vec::new();
    for device in devices {
        match check_device(device, domain) {
            Ok(()) => {}
            Err(
                e @ (DeviceError::ZoneOutsideDomain { .. } | DeviceError::DimensionMismatch { .. }),
            ) => violations.push(Violation::Containment {
                label: device.label.clone(),
                detail: e.to_string(),
            }),
            Err(e) => violations.push(Violation::Profile {
                label: device.label.clone(),
                detail: e.to_string(),
            }),
        }
    }
    let actuators: Vec<&Device> = devices.iter().filter(|d| d.role == Role::Actuator).collect();
    for (i, first) in actuators.iter().enumerate() {
        for second in &actuators[i + 1..] {
            if first.zone.dim() == second.zone.dim() && first.zone.overlaps(&second.zone) {
                violations.push(Violation::ActuatorOverlap {
                    first: first.label.clone(),
                    second: second.label.clone(),
                });
            }
        }
    }
    ValidationReport { violations }
}
