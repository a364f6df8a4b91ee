//! Composite Gauss-Legendre quadrature on intervals and axis-aligned boxes.
//!
//! Device inner products use closed-form antiderivatives wherever possible;
//! this module is the numerical fallback for tabulated profiles and the
//! reference path the tests use to cross-check the closed forms.

use std::f64::consts::PI;

/// Gauss-Legendre rule of a fixed order on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights via Newton iteration on the Legendre polynomial.
    ///
    /// Orders up to a few hundred converge in a handful of iterations from
    /// the Chebyshev-like initial guesses.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be at least 1");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Symmetry: compute the non-negative half, mirror the rest.
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * d * d);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        // Exact middle node for odd orders.
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate `f` over `[a, b]` with a single application of the rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Integrate over a list of cells, each subdivided `subdivisions` times.
    pub fn integrate_cells<F: FnMut(f64) -> f64>(
        &self,
        cells: &[(f64, f64)],
        subdivisions: usize,
        mut f: F,
    ) -> f64 {
        let sub = subdivisions.max(1);
        let mut acc = 0.0;
        for &(a, b) in cells {
            let step = (b - a) / sub as f64;
            for s in 0..sub {
                let lo = a + step * s as f64;
                let hi = if s + 1 == sub { b } else { lo + step };
                acc += self.integrate(lo, hi, &mut f);
            }
        }
        acc
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Per-run quadrature configuration: rule order and the number of uniform
/// subdivisions applied to each integration cell (cells are aligned with the
/// zone bounds, and for tabulated profiles with the sample grid).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub order: usize,
    pub subdivisions: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            order: 16,
            subdivisions: 1,
        }
    }
}
