//! Right-Radau quadrature on `[0,1]`.
//!
//! The rules fix their last node at the right endpoint — the same point the
//! upwind flux evaluates — so one reconstruction evaluation per node serves
//! both the convolution terms and the flux. An `R`-node rule integrates
//! polynomials up to degree `2R-2` exactly, which matches the degree-`2g`
//! reconstructions for `R = g + 1`.

use std::sync::OnceLock;

use crate::grid::{CellAverages, Grid};
use crate::{invalid_input, linalg, Result};

/// Quadrature rule on `[0,1]` with nodes in increasing order, last node 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub r: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `∫_0^1 f`, exact for polynomials of degree ≤ 2R-2.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * f(y))
            .sum()
    }
}

/// The right-Radau rule with `r` nodes, for `r` in `{2, 3, 4}`.
pub fn radau_rule(r: usize) -> Result<&'static QuadratureRule> {
    static RULES: OnceLock<[QuadratureRule; 3]> = OnceLock::new();
    if !(2..=4).contains(&r) {
        return Err(invalid_input!("radau_rule supports R in {{2,3,4}}, got {r}"));
    }
    let rules = RULES.get_or_init(|| [build_rule(2), build_rule(3), build_rule(4)]);
    Ok(&rules[r - 2])
}

/// Integrate `f` over `[a,b]` with the rule mapped affinely onto it.
pub fn integrate_on_subinterval(
    rule: &QuadratureRule,
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
) -> Result<f64> {
    if !(a <= b) {
        return Err(invalid_input!("subinterval [{a}, {b}] has a > b"));
    }
    let len = b - a;
    Ok(len * rule.integrate(|y| f(a + len * y)))
}

/// Cell averages of `rho0`: `ρ̄_j = Σ_ν γ_ν ρ0(x_{j-1/2} + h y_ν)`.
pub fn initial_cell_averages(
    rho0: impl Fn(f64) -> f64,
    grid: &Grid,
    rule: &QuadratureRule,
) -> CellAverages {
    let values = (0..grid.n_cells)
        .map(|j| {
            let left = grid.left_edge(j);
            rule.integrate(|y| rho0(left + grid.h * y))
        })
        .collect();
    CellAverages::new(values, 0.0)
}

/// Legendre polynomial `P_n` and its derivative at `x`, by recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p_prev, mut p) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
        p_prev = p;
        p = next;
    }
    // (1 - x²) P_n' = n (P_{n-1} - x P_n)
    let dp = if (1.0 - x * x).abs() > 1e-12 {
        n as f64 * (p_prev - x * p) / (1.0 - x * x)
    } else {
        // endpoint: P_n'(±1) = (±1)^{n-1} n (n+1) / 2
        let sign = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 - 1) };
        sign * (n * (n + 1)) as f64 / 2.0
    };
    (p, dp)
}

/// `P_R(x) - P_{R-1}(x)`, whose roots in `[-1, 1)` are the interior
/// right-Radau nodes on `[-1, 1]` (the remaining root is the fixed node +1).
fn radau_poly(r: usize, x: f64) -> (f64, f64) {
    let (p1, dp1) = legendre(r, x);
    let (p0, dp0) = legendre(r - 1, x);
    (p1 - p0, dp1 - dp0)
}

fn build_rule(r: usize) -> QuadratureRule {
    // bracket the r-1 interior roots by scanning, then bisect + Newton-polish
    let mut roots = Vec::with_capacity(r - 1);
    let samples = 4000;
    let upper = 1.0 - 1e-9;
    let mut prev_x = -1.0;
    let mut prev_f = radau_poly(r, prev_x).0;
    for i in 1..=samples {
        let x = -1.0 + (upper + 1.0) * i as f64 / samples as f64;
        let f = radau_poly(r, x).0;
        if prev_f == 0.0 {
            roots.push(prev_x);
        } else if prev_f * f < 0.0 {
            let (mut lo, mut hi) = (prev_x, x);
            let mut flo = prev_f;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                let fm = radau_poly(r, mid).0;
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            let mut root = 0.5 * (lo + hi);
            for _ in 0..3 {
                let (f, df) = radau_poly(r, root);
                root -= f / df;
            }
            roots.push(root);
        }
        prev_x = x;
        prev_f = f;
    }
    assert_eq!(roots.len(), r - 1, "expected {} interior Radau roots", r - 1);

    // map [-1,1] -> [0,1] and append the fixed endpoint node
    let mut nodes: Vec<f64> = roots.iter().map(|x| 0.5 * (x + 1.0)).collect();
    nodes.push(1.0);

    // weights from the moment conditions Σ γ y^d = 1/(d+1), d = 0..R-1
    let mut vandermonde = vec![0.0; r * r];
    let mut rhs = vec![0.0; r];
    for d in 0..r {
        for (nu, &y) in nodes.iter().enumerate() {
            vandermonde[d * r + nu] = y.powi(d as i32);
        }
        rhs[d] = 1.0 / (d as f64 + 1.0);
    }
    let weights = linalg::solve(&vandermonde, &rhs, r).expect("Radau moment system");

    QuadratureRule { r, nodes, weights }
}
