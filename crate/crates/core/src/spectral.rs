//! Closed-form spectrum of `A = Δ + kI` with Dirichlet boundary on intervals
//! and axis-aligned rectangles, grouped into clusters of distinct eigenvalues.
//!
//! On `(0, L)` the modes are `φ_m(ξ) = √(2/L)·sin(mπξ/L)` with
//! `μ_m = k − (mπ/L)²`; on `(0,a)×(0,b)` they are products of axis sines with
//! `μ_{mn} = k − (mπ/a)² − (nπ/b)²`. Rectangles produce repeated eigenvalues
//! (`(m,n)` vs `(n,m)` on the square), which is where the multiplicity
//! handling downstream earns its keep.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("domain lengths must be strictly positive and finite")]
    InvalidLength,
    #[error("enumeration policy must request at least one mode")]
    EmptyPolicy,
    #[error("enumeration threshold must be finite")]
    InvalidThreshold,
    #[error("point dimension {got} does not match domain dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point lies outside the closure of the domain")]
    PointOutsideDomain,
}

/// The spatial region Ω: an interval `(0, L)` or a rectangle `(0,a)×(0,b)`
/// with its corner at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval { length: f64 },
    Rectangle { a: f64, b: f64 },
}

impl Domain {
    pub fn interval(length: f64) -> Result<Self, SpectralError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::InvalidLength);
        }
        Ok(Domain::Interval { length })
    }

    pub fn rectangle(a: f64, b: f64) -> Result<Self, SpectralError> {
        if !(a.is_finite() && a > 0.0 && b.is_finite() && b > 0.0) {
            return Err(SpectralError::InvalidLength);
        }
        Ok(Domain::Rectangle { a, b })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    /// Side length along `axis` (0 or 1).
    pub fn side(&self, axis: usize) -> f64 {
        match (self, axis) {
            (Domain::Interval { length }, 0) => *length,
            (Domain::Rectangle { a, .. }, 0) => *a,
            (Domain::Rectangle { b, .. }, 1) => *b,
            _ => panic!("axis {axis} out of range for domain"),
        }
    }

    /// Whether `point` lies in the closure of Ω.
    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .enumerate()
                .all(|(axis, &x)| x >= 0.0 && x <= self.side(axis))
    }

    /// Unit-norm prefactor of the eigenfunctions: `√(2/L)` or `2/√(ab)`.
    pub fn normalization(&self) -> f64 {
        match self {
            Domain::Interval { length } => (2.0 / length).sqrt(),
            Domain::Rectangle { a, b } => 2.0 / (a * b).sqrt(),
        }
    }
}

/// Mode index `m` (interval) or `(m, n)` (rectangle); all indices start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeIndices {
    One(u32),
    Two(u32, u32),
}

impl ModeIndices {
    pub fn as_vec(&self) -> Vec<u32> {
        match self {
            ModeIndices::One(m) => vec![*m],
            ModeIndices::Two(m, n) => vec![*m, *n],
        }
    }
}

impl fmt::Display for ModeIndices {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeIndices::One(m) => write!(f, "{m}"),
            ModeIndices::Two(m, n) => write!(f, "({m},{n})"),
        }
    }
}

/// One eigenvalue before clustering: its mode indices and `μ = k − λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawMode {
    pub indices: ModeIndices,
    pub mu: f64,
}

/// How many modes to enumerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnumerationPolicy {
    /// The first `n` modes in descending μ (ties broken by lexicographic
    /// mode indices). May cut through a degenerate cluster; use
    /// [`enumerate_clusters`] when whole clusters are required.
    FirstN(usize),
    /// Every mode with `μ ≥ threshold`. Complete by construction.
    Threshold(f64),
    /// Every mode with all indices `≤ cap` (the rectangle simulation
    /// truncation; on intervals identical to `FirstN(cap)`).
    MaxIndex(u32),
}

fn mu_interval(m: u32, length: f64, k: f64) -> f64 {
    let w = m as f64 * PI / length;
    k - w * w
}

fn mu_rectangle(m: u32, n: u32, a: f64, b: f64, k: f64) -> f64 {
    let wa = m as f64 * PI / a;
    let wb = n as f64 * PI / b;
    k - wa * wa - wb * wb
}

/// Enumerate `(mode_indices, μ)` for the policy, sorted by descending μ and
/// lexicographic indices within ties.
pub fn raw_eigenvalues(
    domain: &Domain,
    k: f64,
    policy: EnumerationPolicy,
) -> Result<Vec<RawMode>, SpectralError> {
    let mut modes = match (*domain, policy) {
        (_, EnumerationPolicy::FirstN(0)) | (_, EnumerationPolicy::MaxIndex(0)) => {
            return Err(SpectralError::EmptyPolicy)
        }
        (_, EnumerationPolicy::Threshold(t)) if !t.is_finite() => {
            return Err(SpectralError::InvalidThreshold)
        }
        (Domain::Interval { length }, EnumerationPolicy::FirstN(n)) => (1..=n as u32)
            .map(|m| RawMode {
                indices: ModeIndices::One(m),
                mu: mu_interval(m, length, k),
            })
            .collect::<Vec<_>>(),
        (Domain::Interval { length }, EnumerationPolicy::MaxIndex(cap)) => (1..=cap)
            .map(|m| RawMode {
                indices: ModeIndices::One(m),
                mu: mu_interval(m, length, k),
            })
            .collect(),
        (Domain::Interval { length }, EnumerationPolicy::Threshold(t)) => {
            let mut out = Vec::new();
            let mut m = 1u32;
            loop {
                let mu = mu_interval(m, length, k);
                if mu < t {
                    break;
                }
                out.push(RawMode {
                    indices: ModeIndices::One(m),
                    mu,
                });
                m += 1;
            }
            out
        }
        (Domain::Rectangle { a, b }, EnumerationPolicy::FirstN(n)) => {
            first_n_rectangle(a, b, k, n)
        }
        (Domain::Rectangle { a, b }, EnumerationPolicy::MaxIndex(cap)) => {
            let mut out = Vec::new();
            for m in 1..=cap {
                for n in 1..=cap {
                    out.push(RawMode {
                        indices: ModeIndices::Two(m, n),
                        mu: mu_rectangle(m, n, a, b, k),
                    });
                }
            }
            out
        }
        (Domain::Rectangle { a, b }, EnumerationPolicy::Threshold(t)) => {
            let mut out = Vec::new();
            let mut m = 1u32;
            loop {
                if mu_rectangle(m, 1, a, b, k) < t {
                    break;
                }
                let mut n = 1u32;
                loop {
                    let mu = mu_rectangle(m, n, a, b, k);
                    if mu < t {
                        break;
                    }
                    out.push(RawMode {
                        indices: ModeIndices::Two(m, n),
                        mu,
                    });
                    n += 1;
                }
                m += 1;
            }
            out
        }
    };
    modes.sort_by(|x, y| {
        y.mu.total_cmp(&x.mu)
            .then_with(|| x.indices.cmp(&y.indices))
    });
    Ok(modes)
}

/// Heap entry ordered by ascending `(mπ/a)² + (nπ/b)²`, lexicographic ties.
struct HeapMode {
    lambda: f64,
    m: u32,
    n: u32,
}

impl PartialEq for HeapMode {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapMode {}
impl PartialOrd for HeapMode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapMode {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; reverse for ascending λ.
        other
            .lambda
            .total_cmp(&self.lambda)
            .then_with(|| (other.m, other.n).cmp(&(self.m, self.n)))
    }
}

/// Lazy merge of the per-`m` sorted rows of `(mπ/a)² + (nπ/b)²`.
fn first_n_rectangle(a: f64, b: f64, k: f64, count: usize) -> Vec<RawMode> {
    let lambda = |m: u32, n: u32| {
        let wa = m as f64 * PI / a;
        let wb = n as f64 * PI / b;
        wa * wa + wb * wb
    };
    let mut heap = BinaryHeap::new();
    heap.push(HeapMode {
        lambda: lambda(1, 1),
        m: 1,
        n: 1,
    });
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let top = heap.pop().expect("heap never empties before count modes");
        out.push(RawMode {
            indices: ModeIndices::Two(top.m, top.n),
            mu: k - top.lambda,
        });
        heap.push(HeapMode {
            lambda: lambda(top.m, top.n + 1),
            m: top.m,
            n: top.n + 1,
        });
        if top.n == 1 {
            heap.push(HeapMode {
                lambda: lambda(top.m + 1, 1),
                m: top.m + 1,
                n: 1,
            });
        }
    }
    out
}

/// Eigenfunction of one mode: sine product with the domain's unit-norm
/// prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFunctionDescriptor {
    pub mode_indices: ModeIndices,
    pub normalization: f64,
}

impl EigenFunctionDescriptor {
    pub fn new(domain: &Domain, indices: ModeIndices) -> Self {
        EigenFunctionDescriptor {
            mode_indices: indices,
            normalization: domain.normalization(),
        }
    }
}

/// Evaluate `φ` at a point of the closed domain. Exactly zero on the
/// boundary.
pub fn eigenfunction_eval(
    descriptor: &EigenFunctionDescriptor,
    domain: &Domain,
    point: &[f64],
) -> Result<f64, SpectralError> {
    if point.len() != domain.dim() {
        return Err(SpectralError::DimensionMismatch {
            expected: domain.dim(),
            got: point.len(),
        });
    }
    if !domain.contains(point) {
        return Err(SpectralError::PointOutsideDomain);
    }
    let idx = descriptor.mode_indices.as_vec();
    debug_assert_eq!(idx.len(), domain.dim());
    let mut value = descriptor.normalization;
    for (axis, (&m, &x)) in idx.iter().zip(point).enumerate() {
        let side = domain.side(axis);
        if x == 0.0 || x == side {
            return Ok(0.0);
        }
        value *= (m as f64 * PI * x / side).sin();
    }
    Ok(value)
}

/// One distinct eigenvalue `μₙ` with its multiplicity-`rₙ` eigenspace, the
/// members ordered lexicographically by mode indices.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    /// 1-based position in descending-μ order.
    pub index: usize,
    pub mu: f64,
    pub members: Vec<EigenFunctionDescriptor>,
}

impl EigenCluster {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }

    pub fn member_indices(&self) -> Vec<ModeIndices> {
        self.members.iter().map(|d| d.mode_indices).collect()
    }
}

/// Group raw modes into clusters of equal eigenvalues: a mode joins the
/// current cluster iff its μ is within `tolerance·max(1, |μ|)` of the
/// cluster's anchor (its first member). `raw` must be sorted descending.
pub fn cluster_eigenvalues(
    raw: &[RawMode],
    domain: &Domain,
    tolerance: f64,
) -> Vec<EigenCluster> {
    assert!(tolerance > 0.0, "cluster tolerance must be positive");
    debug_assert!(raw.windows(2).all(|w| w[0].mu >= w[1].mu));
    let mut groups: Vec<(f64, f64, Vec<EigenFunctionDescriptor>)> = Vec::new();
    for mode in raw {
        match groups.last_mut() {
            Some((anchor, sum, members))
                if (*anchor - mode.mu).abs() <= tolerance * anchor.abs().max(1.0) =>
            {
                *sum += mode.mu;
                members.push(EigenFunctionDescriptor::new(domain, mode.indices));
            }
            _ => groups.push((
                mode.mu,
                mode.mu,
                vec![EigenFunctionDescriptor::new(domain, mode.indices)],
            )),
        }
    }
    groups
        .into_iter()
        .enumerate()
        .map(|(i, (_, sum, mut members))| {
            members.sort_by_key(|d| d.mode_indices);
            EigenCluster {
                index: i + 1,
                // Representative μ: mean over members (identical up to roundoff).
                mu: sum / members.len() as f64,
                members,
            }
        })
        .collect()
}

/// Cluster indices with `μ ≥ −zero_tolerance`: the only modes that can
/// defeat the stabilizability criterion.
pub fn unstable_cluster_set(clusters: &[EigenCluster], zero_tolerance: f64) -> Vec<usize> {
    assert!(zero_tolerance >= 0.0);
    clusters
        .iter()
        .filter(|c| c.mu >= -zero_tolerance)
        .map(|c| c.index)
        .collect()
}

/// Enumerate at least the first `min_clusters` complete clusters, extended so
/// that every cluster with `μ ≥ −zero_tolerance` is included. Never cuts a
/// degenerate cluster at the truncation boundary.
pub fn enumerate_clusters(
    domain: &Domain,
    k: f64,
    min_clusters: usize,
    cluster_tolerance: f64,
    zero_tolerance: f64,
) -> Result<Vec<EigenCluster>, SpectralError> {
    let want = min_clusters.max(1);
    let mut budget = want * 4 + 16;
    loop {
        let raw = raw_eigenvalues(domain, k, EnumerationPolicy::FirstN(budget + 1))?;
        let clusters = cluster_eigenvalues(&raw, domain, cluster_tolerance);
        // The final cluster may be truncated mid-degeneracy; drop it.
        let complete = clusters.len().saturating_sub(1);
        let enough_clusters = complete >= want;
        let covers_unstable = clusters
            .get(complete)
            .map(|c| c.mu < -zero_tolerance)
            .unwrap_or(false);
        if enough_clusters && covers_unstable {
            // Unstable clusters form a prefix of the descending-μ order, so
            // taking max(want, #unstable) keeps them all.
            let unstable = clusters[..complete]
                .iter()
                .filter(|c| c.mu >= -zero_tolerance)
                .count();
            let take = want.max(unstable).min(complete);
            return Ok(clusters[..take].to_vec());
        }
        budget *= 2;
        assert!(
            budget < 1 << 26,
            "cluster enumeration exceeded a sane mode budget"
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn interval(l: f64) -> Domain {
        Domain::interval(l).unwrap()
    }

    fn square() -> Domain {
        Domain::rectangle(1.0, 1.0).unwrap()
    }

    #[test]
    fn interval_first_three_at_unit_pi_length() {
        let dom = interval(PI);
        let raw = raw_eigenvalues(&dom, 0.0, EnumerationPolicy::FirstN(3)).unwrap();
        let mus: Vec<f64> = raw.iter().map(|r| r.mu).collect();
        assert_abs_diff_eq!(mus[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mus[1], -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mus[2], -9.0, epsilon = 1e-12);
    }

    #[test]
    fn square_first_four_frozen_values() {
        let raw = raw_eigenvalues(&square(), 0.0, EnumerationPolicy::FirstN(4)).unwrap();
        // Frozen: -2π², -5π² (twice), -8π².
        assert_abs_diff_eq!(raw[0].mu, -19.739208802178716, epsilon = 1e-12);
        assert_abs_diff_eq!(raw[1].mu, -49.34802200544679, epsilon = 1e-12);
        assert_abs_diff_eq!(raw[2].mu, -49.34802200544679, epsilon = 1e-12);
        assert_abs_diff_eq!(raw[3].mu, -78.95683520871486, epsilon = 1e-12);
        assert_eq!(raw[1].indices, ModeIndices::Two(1, 2));
        assert_eq!(raw[2].indices, ModeIndices::Two(2, 1));
    }

    #[test]
    fn threshold_policy_interval_k50() {
        let dom = interval(1.0);
        let raw = raw_eigenvalues(&dom, 50.0, EnumerationPolicy::Threshold(0.0)).unwrap();
        assert_eq!(raw.len(), 2);
        assert_abs_diff_eq!(raw[0].mu, 40.13039559891064, epsilon = 1e-12);
        assert_abs_diff_eq!(raw[1].mu, 10.521582395642568, epsilon = 1e-12);
    }

    #[test]
    fn threshold_policy_may_return_empty() {
        let dom = interval(1.0);
        let raw = raw_eigenvalues(&dom, 0.0, EnumerationPolicy::Threshold(0.0)).unwrap();
        assert!(raw.is_empty());
    }

    #[test]
    fn threshold_completeness_against_brute_force() {
        let dom = Domain::rectangle(1.0, 2.0).unwrap();
        let k = 120.0;
        let theta = -30.0;
        let raw = raw_eigenvalues(&dom, k, EnumerationPolicy::Threshold(theta)).unwrap();
        let mut brute = Vec::new();
        for m in 1..200u32 {
            for n in 1..400u32 {
                let mu = mu_rectangle(m, n, 1.0, 2.0, k);
                if mu >= theta {
                    brute.push((m, n));
                }
            }
        }
        assert_eq!(raw.len(), brute.len());
        for r in &raw {
            let ModeIndices::Two(m, n) = r.indices else {
                panic!("expected 2-d indices")
            };
            assert!(brute.contains(&(m, n)));
        }
    }

    #[test]
    fn invalid_policies_rejected() {
        let dom = interval(1.0);
        assert_eq!(
            raw_eigenvalues(&dom, 0.0, EnumerationPolicy::FirstN(0)),
            Err(SpectralError::EmptyPolicy)
        );
        assert_eq!(
            raw_eigenvalues(&dom, 0.0, EnumerationPolicy::Threshold(f64::NAN)),
            Err(SpectralError::InvalidThreshold)
        );
    }

    #[test]
    fn interval_clusters_are_singletons() {
        let dom = interval(1.0);
        let raw = raw_eigenvalues(&dom, 50.0, EnumerationPolicy::FirstN(20)).unwrap();
        let clusters = cluster_eigenvalues(&raw, &dom, 1e-9);
        assert_eq!(clusters.len(), 20);
        assert!(clusters.iter().all(|c| c.multiplicity() == 1));
    }

    #[test]
    fn square_degenerate_pair_clusters() {
        let dom = square();
        let raw = raw_eigenvalues(&dom, 0.0, EnumerationPolicy::FirstN(4)).unwrap();
        let clusters = cluster_eigenvalues(&raw, &dom, 1e-9);
        assert_eq!(clusters.len(), 3);
        assert_eq!(clusters[1].multiplicity(), 2);
        assert_eq!(
            clusters[1].member_indices(),
            vec![ModeIndices::Two(1, 2), ModeIndices::Two(2, 1)]
        );
        assert_abs_diff_eq!(clusters[1].mu, -49.34802200544679, epsilon = 1e-12);
    }

    #[test]
    fn anisotropic_rectangle_separates_swapped_modes() {
        // a=1, b=2: (1,2) → 2π², (2,1) → 4.25π²: distinct clusters.
        let dom = Domain::rectangle(1.0, 2.0).unwrap();
        let raw = raw_eigenvalues(&dom, 0.0, EnumerationPolicy::MaxIndex(2)).unwrap();
        let clusters = cluster_eigenvalues(&raw, &dom, 1e-9);
        assert_eq!(clusters.len(), 4);
        assert!(clusters.iter().all(|c| c.multiplicity() == 1));
        let mus: Vec<f64> = clusters.iter().map(|c| c.mu).collect();
        assert_abs_diff_eq!(mus[1], -2.0 * PI * PI, epsilon = 1e-10);
        assert_abs_diff_eq!(mus[2], -4.25 * PI * PI, epsilon = 1e-10);
    }

    #[test]
    fn clustering_is_idempotent() {
        let dom = square();
        let raw = raw_eigenvalues(&dom, 60.0, EnumerationPolicy::FirstN(30)).unwrap();
        let clusters = cluster_eigenvalues(&raw, &dom, 1e-9);
        let reflat: Vec<RawMode> = clusters
            .iter()
            .flat_map(|c| {
                c.members.iter().map(|d| RawMode {
                    indices: d.mode_indices,
                    mu: c.mu,
                })
            })
            .collect();
        let again = cluster_eigenvalues(&reflat, &dom, 1e-9);
        assert_eq!(again.len(), clusters.len());
        for (x, y) in again.iter().zip(&clusters) {
            assert_eq!(x.member_indices(), y.member_indices());
            assert_abs_diff_eq!(x.mu, y.mu, epsilon = 1e-14);
        }
    }

    #[test]
    fn eigenfunction_values() {
        let dom = interval(PI);
        let d1 = EigenFunctionDescriptor::new(&dom, ModeIndices::One(1));
        let v = eigenfunction_eval(&d1, &dom, &[PI / 2.0]).unwrap();
        assert_abs_diff_eq!(v, (2.0 / PI).sqrt(), epsilon = 1e-12);
        let d2 = EigenFunctionDescriptor::new(&dom, ModeIndices::One(2));
        let v = eigenfunction_eval(&d2, &dom, &[PI / 2.0]).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        // Frozen: 2·sin(π/2)·sin(π/2) = 2 for mode (1,2) at (0.5, 0.25).
        let sq = square();
        let d12 = EigenFunctionDescriptor::new(&sq, ModeIndices::Two(1, 2));
        let v = eigenfunction_eval(&d12, &sq, &[0.5, 0.25]).unwrap();
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenfunction_boundary_and_domain_errors() {
        let dom = interval(1.0);
        let d = EigenFunctionDescriptor::new(&dom, ModeIndices::One(3));
        assert_eq!(eigenfunction_eval(&d, &dom, &[0.0]).unwrap(), 0.0);
        assert_eq!(eigenfunction_eval(&d, &dom, &[1.0]).unwrap(), 0.0);
        assert_eq!(
            eigenfunction_eval(&d, &dom, &[1.5]),
            Err(SpectralError::PointOutsideDomain)
        );
        assert_eq!(
            eigenfunction_eval(&d, &dom, &[0.5, 0.5]),
            Err(SpectralError::DimensionMismatch {
                expected: 1,
                got: 2
            })
        );
    }

    #[test]
    fn unstable_set_examples() {
        let dom = interval(PI);
        let raw = raw_eigenvalues(&dom, 0.0, EnumerationPolicy::FirstN(10)).unwrap();
        let clusters = cluster_eigenvalues(&raw, &dom, 1e-9);
        assert!(unstable_cluster_set(&clusters, 1e-9).is_empty());

        let dom = interval(1.0);
        let raw = raw_eigenvalues(&dom, 50.0, EnumerationPolicy::FirstN(10)).unwrap();
        let clusters = cluster_eigenvalues(&raw, &dom, 1e-9);
        assert_eq!(unstable_cluster_set(&clusters, 1e-9), vec![1, 2]);

        // μ₁ = 0 counts as unstable (boundary case).
        let dom = interval(PI);
        let raw = raw_eigenvalues(&dom, 1.0, EnumerationPolicy::FirstN(5)).unwrap();
        let clusters = cluster_eigenvalues(&raw, &dom, 1e-9);
        assert_eq!(unstable_cluster_set(&clusters, 1e-9), vec![1]);
    }

    #[test]
    fn enumerate_clusters_never_splits_degenerate_boundary() {
        // On the unit square ask for 2 clusters: the second is the
        // degenerate (1,2)/(2,1) pair and must come back whole.
        let clusters = enumerate_clusters(&square(), 0.0, 2, 1e-9, 1e-9).unwrap();
        assert!(clusters.len() >= 2);
        assert_eq!(clusters[1].multiplicity(), 2);
    }

    #[test]
    fn enumerate_clusters_covers_all_unstable() {
        let clusters = enumerate_clusters(&interval(1.0), 50.0, 1, 1e-9, 1e-9).unwrap();
        assert!(clusters.len() >= 2);
        assert!(clusters.iter().take(2).all(|c| c.mu >= 0.0));
        let count = clusters.iter().filter(|c| c.mu >= -1e-9).count();
        assert_eq!(count, 2);
    }

    #[test]
    fn domain_validation() {
        assert!(Domain::interval(0.0).is_err());
        assert!(Domain::interval(-1.0).is_err());
        assert!(Domain::rectangle(1.0, f64::INFINITY).is_err());
        assert!(Domain::interval(2.5).is_ok());
    }
}
