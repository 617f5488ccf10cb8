//! Central WENO reconstruction from cell averages.
//!
//! For a scheme parameter `g ∈ {1,2,3}` every cell gets one polynomial of
//! degree `2g` in the centered local coordinate `ξ = (x - x_j)/h ∈ [-1/2,1/2]`,
//! built as a convex combination
//!
//! ```text
//!     P_j = Σ_k w_k P_k,     k = 0..m,  m = g+1,
//! ```
//!
//! of the `m` one-sided substencil polynomials `P_1..P_m` (degree `g`, each
//! matching `g+1` consecutive cell means) and `P_0 = (P_opt - Σ c_k P_k)/c_0`,
//! where `P_opt` (degree `2g`) matches all `2g+1` means of the centered
//! stencil. The weights `w_k` follow from the linear coefficients `c_k` and
//! the Jiang-Shu smoothness indicators, so the combination falls back to
//! `P_opt` on smooth data and to the least oscillatory substencil at shocks.
//!
//! Working in `ξ` makes the mean-matching matrices and the smoothness
//! indicators independent of the mesh size.

use std::sync::OnceLock;

use crate::grid::GhostedAverages;
use crate::{invalid_input, linalg, Result};

/// Maximum polynomial degree is 2g = 6, so 7 coefficients suffice.
pub const MAX_COEFFS: usize = 7;

/// Polynomial in the local cell coordinate `ξ ∈ [-1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalPolynomial {
    coeffs: [f64; MAX_COEFFS],
    degree: usize,
}

impl LocalPolynomial {
    pub fn constant(c: f64) -> Self {
        let mut coeffs = [0.0; MAX_COEFFS];
        coeffs[0] = c;
        LocalPolynomial { coeffs, degree: 0 }
    }

    pub fn from_coeffs(c: &[f64]) -> Self {
        assert!(c.len() <= MAX_COEFFS, "degree above {}", MAX_COEFFS - 1);
        let mut coeffs = [0.0; MAX_COEFFS];
        coeffs[..c.len()].copy_from_slice(c);
        LocalPolynomial {
            coeffs,
            degree: c.len().saturating_sub(1),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs[i]
    }

    /// Evaluate at local coordinate `ξ`.
    pub fn eval_xi(&self, xi: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs[..=self.degree].iter().rev() {
            acc = acc * xi + c;
        }
        acc
    }

    /// Evaluate at `y ∈ [0,1]` measured from the left cell edge.
    pub fn eval_y(&self, y: f64) -> f64 {
        self.eval_xi(y - 0.5)
    }

    /// Exact mean over the home cell `ξ ∈ [-1/2, 1/2]`.
    pub fn mean(&self) -> f64 {
        (0..=self.degree)
            .map(|i| self.coeffs[i] * moment_centered(i))
            .sum()
    }

    /// Exact mean over the shifted cell `ξ ∈ [l-1/2, l+1/2]`.
    pub fn mean_over_shifted(&self, l: i32) -> f64 {
        (0..=self.degree)
            .map(|i| self.coeffs[i] * moment_shifted(l, i))
            .sum()
    }

    /// `mean + θ (P - mean)`: rescale about a prescribed mean value.
    pub fn scaled_about(&self, mean: f64, theta: f64) -> Self {
        let mut out = *self;
        for c in &mut out.coeffs[..=out.degree] {
            *c *= theta;
        }
        out.coeffs[0] += (1.0 - theta) * mean;
        out
    }

    fn add_scaled(&mut self, other: &LocalPolynomial, factor: f64) {
        for i in 0..=other.degree {
            self.coeffs[i] += factor * other.coeffs[i];
        }
        self.degree = self.degree.max(other.degree);
    }
}

/// `∫_{-1/2}^{1/2} ξ^i dξ`.
fn moment_centered(i: usize) -> f64 {
    if i % 2 == 1 {
        0.0
    } else {
        0.5f64.powi(i as i32) / (i as f64 + 1.0)
    }
}

/// `∫_{l-1/2}^{l+1/2} ξ^i dξ`.
fn moment_shifted(l: i32, i: usize) -> f64 {
    let hi = l as f64 + 0.5;
    let lo = l as f64 - 0.5;
    (hi.powi(i as i32 + 1) - lo.powi(i as i32 + 1)) / (i as f64 + 1.0)
}

/// Scheme parameters: `g`, the linear coefficients, and the regularization
/// exponents of the nonlinear weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionParams {
    pub g: usize,
    pub c0: f64,
    /// power `p` in `α_k = c_k / (S_k + ε)^p`
    pub p: i32,
    /// exponent `q` in `ε = h^q`
    pub q: i32,
}

impl ReconstructionParams {
    /// Defaults used throughout: `c_0 = 0.5`, `p = 2`, `q = 2`; the remaining
    /// linear coefficients split `1 - c_0` uniformly over the substencils.
    pub fn new(g: usize) -> Result<Self> {
        if !(1..=3).contains(&g) {
            return Err(invalid_input!("g must be in {{1,2,3}}, got {g}"));
        }
        Ok(ReconstructionParams {
            g,
            c0: 0.5,
            p: 2,
            q: 2,
        })
    }

    /// Number of substencil polynomials, `m = g + 1`.
    pub fn m(&self) -> usize {
        self.g + 1
    }

    /// Linear coefficient `c_k`, `k = 0..=m`.
    pub fn c(&self, k: usize) -> f64 {
        if k == 0 {
            self.c0
        } else {
            (1.0 - self.c0) / self.m() as f64
        }
    }

    /// Reconstruction degree `2g`.
    pub fn big_g(&self) -> usize {
        2 * self.g
    }
}

/// One reconstruction polynomial per cell, including ghost cells that had a
/// full `2g+1` stencil available.
#[derive(Debug, Clone)]
pub struct PiecewiseReconstruction {
    polys: Vec<LocalPolynomial>,
    margin: usize,
    n_real: usize,
    pub h: f64,
}

impl PiecewiseReconstruction {
    /// Number of real cells.
    pub fn n_real(&self) -> usize {
        self.n_real
    }

    /// Ghost cells with a polynomial on each side.
    pub fn margin(&self) -> usize {
        self.margin
    }

    /// Polynomial of cell `j` (signed; ghost cells included).
    ///
    /// Panics if `j` has no reconstructed polynomial — that is a caller bug,
    /// not a data condition.
    pub fn poly(&self, j: isize) -> &LocalPolynomial {
        let idx = j + self.margin as isize;
        assert!(
            idx >= 0 && (idx as usize) < self.polys.len(),
            "no reconstruction for cell {j} (margin {})",
            self.margin
        );
        &self.polys[idx as usize]
    }

    pub fn poly_mut(&mut self, j: isize) -> &mut LocalPolynomial {
        let idx = j + self.margin as isize;
        assert!(
            idx >= 0 && (idx as usize) < self.polys.len(),
            "no reconstruction for cell {j} (margin {})",
            self.margin
        );
        &mut self.polys[idx as usize]
    }

    /// Evaluate cell `j`'s polynomial at `y ∈ [0,1]` from its left edge.
    pub fn evaluate(&self, j: isize, y: f64) -> f64 {
        self.poly(j).eval_y(y)
    }
}

/// Mean-matching matrices for one `g`, inverted once and reused.
struct StencilMatrices {
    /// inverse of the (2g+1)² system for `P_opt`
    opt_inv: Vec<f64>,
    /// inverses of the (g+1)² systems for `P_1..P_m`
    sub_inv: Vec<Vec<f64>>,
}

fn matrices(g: usize) -> &'static StencilMatrices {
    static MATS: OnceLock<[StencilMatrices; 3]> = OnceLock::new();
    &MATS.get_or_init(|| [build_matrices(1), build_matrices(2), build_matrices(3)])[g - 1]
}

fn build_matrices(g: usize) -> StencilMatrices {
    let n = 2 * g + 1;
    let mut m = vec![0.0; n * n];
    for (row, l) in (-(g as i32)..=g as i32).enumerate() {
        for i in 0..n {
            m[row * n + i] = moment_shifted(l, i);
        }
    }
    let opt_inv = linalg::invert(&m, n).expect("optimal stencil matrix");

    let msub = g + 1;
    let sub_inv = (1..=msub)
        .map(|k| {
            let mut m = vec![0.0; msub * msub];
            // substencil k covers cells j-g+k-1 ..= j+k-1
            let start = k as i32 - 1 - g as i32;
            for row in 0..msub {
                let l = start + row as i32;
                for i in 0..msub {
                    m[row * msub + i] = moment_shifted(l, i);
                }
            }
            linalg::invert(&m, msub).expect("substencil matrix")
        })
        .collect();

    StencilMatrices { opt_inv, sub_inv }
}

fn apply_inverse(inv: &[f64], stencil: &[f64], n: usize) -> LocalPolynomial {
    let mut coeffs = [0.0; MAX_COEFFS];
    for row in 0..n {
        let mut acc = 0.0;
        for col in 0..n {
            acc += inv[row * n + col] * stencil[col];
        }
        coeffs[row] = acc;
    }
    LocalPolynomial {
        coeffs,
        degree: n - 1,
    }
}

/// Degree-`2g` polynomial matching the `2g+1` cell means of the centered
/// stencil (`stencil[g]` is the home cell's average).
pub fn optimal_polynomial(stencil: &[f64]) -> Result<LocalPolynomial> {
    let g = match stencil.len() {
        3 => 1,
        5 => 2,
        7 => 3,
        n => return Err(invalid_input!("optimal stencil needs 2g+1 ∈ {{3,5,7}} values, got {n}")),
    };
    Ok(apply_inverse(&matrices(g).opt_inv, stencil, 2 * g + 1))
}

/// Degree-`g` polynomial matching the means of substencil `k ∈ 1..=g+1`,
/// which covers cells `j-g+k-1 ..= j+k-1` (`stencil` in that order).
pub fn substencil_polynomial(g: usize, k: usize, stencil: &[f64]) -> Result<LocalPolynomial> {
    if !(1..=3).contains(&g) {
        return Err(invalid_input!("g must be in {{1,2,3}}, got {g}"));
    }
    if k < 1 || k > g + 1 {
        return Err(invalid_input!("substencil index k = {k} outside 1..={}", g + 1));
    }
    if stencil.len() != g + 1 {
        return Err(invalid_input!(
            "substencil needs g+1 = {} values, got {}",
            g + 1,
            stencil.len()
        ));
    }
    Ok(apply_inverse(
        &matrices(g).sub_inv[k - 1],
        stencil,
        g + 1,
    ))
}

/// `P_0 = (P_opt - Σ_{k≥1} c_k P_k) / c_0`.
pub fn p0_polynomial(
    p_opt: &LocalPolynomial,
    substencils: &[LocalPolynomial],
    params: &ReconstructionParams,
) -> LocalPolynomial {
    let mut p0 = *p_opt;
    for (idx, p_k) in substencils.iter().enumerate() {
        p0.add_scaled(p_k, -params.c(idx + 1));
    }
    for c in &mut p0.coeffs[..=p0.degree] {
        *c /= params.c0;
    }
    p0
}

/// Jiang-Shu smoothness indicator `Σ_{l=1}^{G} h^{2l-1} ∫_{I_j} (P^(l))² dx`,
/// evaluated exactly. In local coordinates the powers of `h` cancel and the
/// result is `Σ_l ∫_{-1/2}^{1/2} (Q^(l)(ξ))² dξ`, independent of `h`.
pub fn smoothness_indicator(p: &LocalPolynomial, big_g: usize) -> f64 {
    let mut total = 0.0;
    // coefficients of the l-th derivative, updated incrementally
    let mut deriv = p.coeffs;
    let mut deg = p.degree;
    for _l in 1..=big_g {
        if deg == 0 {
            break;
        }
        for i in 0..deg {
            deriv[i] = deriv[i + 1] * (i as f64 + 1.0);
        }
        deriv[deg] = 0.0;
        deg -= 1;
        // ∫ (Σ d_i ξ^i)² dξ over [-1/2, 1/2]
        for i in 0..=deg {
            for i2 in 0..=deg {
                total += deriv[i] * deriv[i2] * moment_centered(i + i2);
            }
        }
    }
    total
}

/// Normalized nonlinear weights `w_k = α_k / Σ α`, `α_k = c_k/(S_k + ε)^p`.
pub fn nonlinear_weights(
    indicators: &[f64],
    params: &ReconstructionParams,
    h: f64,
) -> Vec<f64> {
    let eps = h.powi(params.q);
    let alphas: Vec<f64> = indicators
        .iter()
        .enumerate()
        .map(|(k, &s)| params.c(k) / (s + eps).powi(params.p))
        .collect();
    let total: f64 = alphas.iter().sum();
    alphas.into_iter().map(|a| a / total).collect()
}

/// Build the CWENO polynomial for every cell with a full stencil available:
/// real cells plus `ghost_width - g` ghost cells on each side.
pub fn reconstruct(
    averages: &GhostedAverages,
    params: &ReconstructionParams,
    h: f64,
) -> Result<PiecewiseReconstruction> {
    let g = params.g;
    if averages.ghost_width() < g {
        return Err(invalid_input!(
            "reconstruction needs ghost width ≥ g = {g}, got {}",
            averages.ghost_width()
        ));
    }
    let margin = averages.ghost_width() - g;
    let n_real = averages.n_real();
    let m = params.m();
    let eps = h.powi(params.q);

    let mats = matrices(g);
    let mut polys = Vec::with_capacity(n_real + 2 * margin);

    for j in -(margin as isize)..(n_real + margin) as isize {
        let window = averages.window(j, g);
        let p_opt = apply_inverse(&mats.opt_inv, window, 2 * g + 1);

        let mut candidates = [LocalPolynomial::constant(0.0); 5];
        for k in 1..=m {
            candidates[k] = apply_inverse(&mats.sub_inv[k - 1], &window[k - 1..k + g], g + 1);
        }
        candidates[0] = p0_polynomial(&p_opt, &candidates[1..=m], params);

        let mut alphas = [0.0; 5];
        let mut total = 0.0;
        for k in 0..=m {
            let s = smoothness_indicator(&candidates[k], params.big_g());
            alphas[k] = params.c(k) / (s + eps).powi(params.p);
            total += alphas[k];
        }

        let mut p = LocalPolynomial::constant(0.0);
        p.degree = 2 * g;
        for k in 0..=m {
            p.add_scaled(&candidates[k], alphas[k] / total);
        }
        polys.push(p);
    }

    Ok(PiecewiseReconstruction {
        polys,
        margin,
        n_real,
        h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GhostedAverages;
    use approx::assert_abs_diff_eq;

    fn ghosted(values: Vec<f64>, ghost: usize) -> GhostedAverages {
        GhostedAverages::from_parts(values, ghost)
    }

    /// Exact cell means of a global polynomial in x over unit-free local
    /// shifts: helper building averages of x^d over cells of width h centered
    /// so cell j spans [x0 + j h, x0 + (j+1) h].
    fn averages_of(f_anti: impl Fn(f64) -> f64, x0: f64, h: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| {
                let a = x0 + j as f64 * h;
                (f_anti(a + h) - f_anti(a)) / h
            })
            .collect()
    }

    #[test]
    fn polynomial_evaluation_and_means() {
        let p = LocalPolynomial::from_coeffs(&[1.0, 2.0, 3.0]); // 1 + 2ξ + 3ξ²
        assert_abs_diff_eq!(p.eval_xi(0.5), 1.0 + 1.0 + 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eval_y(1.0), p.eval_xi(0.5), epsilon = 1e-16);
        assert_abs_diff_eq!(p.eval_y(0.0), p.eval_xi(-0.5), epsilon = 1e-16);
        // mean over home cell: 1 + 3/12
        assert_abs_diff_eq!(p.mean(), 1.25, epsilon = 1e-15);
        // mean over right neighbor: ∫_{1/2}^{3/2} = 1 + 2·1 + 3·13/12
        assert_abs_diff_eq!(p.mean_over_shifted(1), 1.0 + 2.0 + 3.25, epsilon = 1e-14);
    }

    #[test]
    fn optimal_rejects_bad_widths() {
        assert!(optimal_polynomial(&[1.0, 2.0]).is_err());
        assert!(optimal_polynomial(&[0.0; 4]).is_err());
        assert!(optimal_polynomial(&[0.0; 9]).is_err());
    }

    #[test]
    fn optimal_constant_and_linear() {
        let p = optimal_polynomial(&[0.7, 0.7, 0.7]).unwrap();
        for y in [0.0, 0.3, 1.0] {
            assert_abs_diff_eq!(p.eval_y(y), 0.7, epsilon = 1e-14);
        }
        // averages of ρ(x) = x over three unit cells centered at 0 are
        // (-1, 0, 1); in local coordinates that is Q(ξ) = ξ
        let p = optimal_polynomial(&[-1.0, 0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(p.coeff(0), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.coeff(1), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.coeff(2), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn optimal_matches_all_stencil_means() {
        for g in 1..=3usize {
            let n = 2 * g + 1;
            // arbitrary but fixed stencil data
            let stencil: Vec<f64> = (0..n).map(|i| (i as f64 * 1.3 - 0.4).sin()).collect();
            let p = optimal_polynomial(&stencil).unwrap();
            assert_eq!(p.degree(), 2 * g);
            for (row, l) in (-(g as i32)..=g as i32).enumerate() {
                assert_abs_diff_eq!(p.mean_over_shifted(l), stencil[row], epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn optimal_reproduces_degree_4_polynomial_for_g2() {
        // averages of q(x) = x^4 - x over unit cells centered at 0
        let anti = |x: f64| x.powi(5) / 5.0 - x * x / 2.0;
        let avgs = averages_of(anti, -2.5, 1.0, 5);
        let p = optimal_polynomial(&avgs).unwrap();
        // local coordinate equals x here (h = 1, center 0)
        for xi in [-0.5f64, -0.2, 0.0, 0.3, 0.5] {
            let exact = xi.powi(4) - xi;
            assert_abs_diff_eq!(p.eval_xi(xi), exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn substencil_lines_for_g1() {
        // k=1 covers (j-1, j): means (0,1) → slope-1 line through the means
        let p = substencil_polynomial(1, 1, &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(p.coeff(0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.coeff(1), 1.0, epsilon = 1e-14);
        // k=2 covers (j, j+1): means (1,0) → slope -1
        let p = substencil_polynomial(1, 2, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p.coeff(0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.coeff(1), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn substencil_matches_its_means_and_rejects_bad_input() {
        for g in 1..=3usize {
            for k in 1..=g + 1 {
                let stencil: Vec<f64> = (0..g + 1).map(|i| (i as f64).cos()).collect();
                let p = substencil_polynomial(g, k, &stencil).unwrap();
                let start = k as i32 - 1 - g as i32;
                for (row, &val) in stencil.iter().enumerate() {
                    assert_abs_diff_eq!(
                        p.mean_over_shifted(start + row as i32),
                        val,
                        epsilon = 1e-12
                    );
                }
            }
        }
        assert!(substencil_polynomial(1, 3, &[0.0, 1.0]).is_err());
        assert!(substencil_polynomial(1, 0, &[0.0, 1.0]).is_err());
        assert!(substencil_polynomial(2, 1, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn p0_recombination_identity() {
        let params = ReconstructionParams::new(1).unwrap();
        // arbitrary candidates: the defining identity c_0 P_0 + Σ c_k P_k = P_opt
        let p_opt = LocalPolynomial::from_coeffs(&[0.3, -1.1, 0.8]);
        let subs = [
            LocalPolynomial::from_coeffs(&[0.2, 0.5]),
            LocalPolynomial::from_coeffs(&[-0.4, 1.5]),
        ];
        let p0 = p0_polynomial(&p_opt, &subs, &params);
        for xi in [-0.5, 0.0, 0.25, 0.5] {
            let recombined = params.c(0) * p0.eval_xi(xi)
                + params.c(1) * subs[0].eval_xi(xi)
                + params.c(2) * subs[1].eval_xi(xi);
            assert_abs_diff_eq!(recombined, p_opt.eval_xi(xi), epsilon = 1e-14);
        }
    }

    #[test]
    fn p0_constant_and_paper_example() {
        let params = ReconstructionParams::new(1).unwrap();
        let c = LocalPolynomial::constant(0.9);
        let p0 = p0_polynomial(&c, &[c, c], &params);
        assert_abs_diff_eq!(p0.eval_xi(0.1), 0.9, epsilon = 1e-14);
        // c = (0.5, 0.25, 0.25), P_opt = ξ², P_1 = P_2 = 0 → P_0 = 2ξ²
        let p_opt = LocalPolynomial::from_coeffs(&[0.0, 0.0, 1.0]);
        let zero = LocalPolynomial::constant(0.0);
        let p0 = p0_polynomial(&p_opt, &[zero, zero], &params);
        assert_abs_diff_eq!(p0.coeff(2), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn smoothness_indicator_closed_forms() {
        assert_eq!(smoothness_indicator(&LocalPolynomial::constant(3.0), 2), 0.0);
        // Q = ξ: ∫ 1² dξ = 1
        let q = LocalPolynomial::from_coeffs(&[0.0, 1.0]);
        assert_abs_diff_eq!(smoothness_indicator(&q, 2), 1.0, epsilon = 1e-15);
        // Q = ξ², G = 2: ∫(2ξ)² + ∫ 2² = 1/3 + 4 = 13/3
        let q = LocalPolynomial::from_coeffs(&[0.0, 0.0, 1.0]);
        assert_abs_diff_eq!(smoothness_indicator(&q, 2), 13.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn smoothness_indicator_ignores_constant_shift() {
        let q = LocalPolynomial::from_coeffs(&[0.0, 0.7, -1.2, 0.3]);
        let shifted = LocalPolynomial::from_coeffs(&[5.0, 0.7, -1.2, 0.3]);
        for big_g in [2, 4, 6] {
            assert_abs_diff_eq!(
                smoothness_indicator(&q, big_g),
                smoothness_indicator(&shifted, big_g),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn weights_reduce_to_linear_coefficients_on_equal_indicators() {
        for g in 1..=3usize {
            let params = ReconstructionParams::new(g).unwrap();
            let m = params.m();
            let w = nonlinear_weights(&vec![0.37; m + 1], &params, 0.05);
            for (k, &wk) in w.iter().enumerate() {
                assert_abs_diff_eq!(wk, params.c(k), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn weights_favor_smooth_candidate_and_normalize() {
        let params = ReconstructionParams::new(1).unwrap();
        let w = nonlinear_weights(&[0.0, 1e12, 1e12], &params, 0.1);
        assert!(w[0] > 1.0 - 1e-12);
        let sum: f64 = w.iter().sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-14);
        assert!(w.iter().all(|&x| x >= 0.0));
        // direct formula evaluation: ε = 0.01, p = 2
        let w = nonlinear_weights(&[0.0, 1.0, 1.0], &params, 0.1);
        let a0 = 0.5 / (0.01f64).powi(2);
        let a1 = 0.25 / (1.01f64).powi(2);
        let total = a0 + 2.0 * a1;
        assert_abs_diff_eq!(w[0], a0 / total, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], a1 / total, epsilon = 1e-15);
    }

    #[test]
    fn reconstruct_constant_data_everywhere_constant() {
        for g in 1..=3usize {
            let params = ReconstructionParams::new(g).unwrap();
            let avg = ghosted(vec![0.35; 12 + 2 * g], g);
            let rec = reconstruct(&avg, &params, 0.1).unwrap();
            for j in 0..12 {
                for y in [0.0, 0.41, 1.0] {
                    assert_abs_diff_eq!(rec.evaluate(j, y), 0.35, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn reconstruct_linear_data_exactly() {
        // ρ(x) = x on h = 0.1 cells: averages are the cell centers
        let h = 0.1;
        let n = 10;
        let g = 1;
        let params = ReconstructionParams::new(g).unwrap();
        let values: Vec<f64> = (0..n + 2 * g as i32)
            .map(|i| ((i - g as i32) as f64 + 0.5) * h)
            .collect();
        let avg = ghosted(values, g);
        let rec = reconstruct(&avg, &params, h).unwrap();
        for j in 0..n as isize {
            // right edge value should be x_{j+1/2} = (j+1) h
            assert_abs_diff_eq!(rec.evaluate(j, 1.0), (j + 1) as f64 * h, epsilon = 1e-13);
            assert_abs_diff_eq!(rec.evaluate(j, 0.0), j as f64 * h, epsilon = 1e-13);
        }
    }

    #[test]
    fn reconstruct_reproduces_global_low_degree_polynomial() {
        // degree-g data: every candidate matches it, so the reconstruction is
        // exact regardless of the weights (g = 2, quadratic).
        let h = 0.25;
        let anti = |x: f64| x.powi(3) / 3.0 + 0.5 * x * x - x; // of x² + x - 1
        let g = 2;
        let n = 8usize;
        let values = averages_of(anti, -1.0 - g as f64 * h, h, n + 2 * g);
        let params = ReconstructionParams::new(g).unwrap();
        let rec = reconstruct(&ghosted(values, g), &params, h).unwrap();
        for j in 0..n as isize {
            let x_left = -1.0 + j as f64 * h;
            for y in [0.0, 0.5, 1.0] {
                let x = x_left + y * h;
                assert_abs_diff_eq!(rec.evaluate(j, y), x * x + x - 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn reconstruct_preserves_cell_means() {
        for g in 1..=3usize {
            let params = ReconstructionParams::new(g).unwrap();
            let n = 16;
            let values: Vec<f64> = (0..n + 2 * g)
                .map(|i| 0.5 + 0.4 * ((i as f64) * 0.7).sin())
                .collect();
            let avg = ghosted(values.clone(), g);
            let rec = reconstruct(&avg, &params, 0.05).unwrap();
            for j in 0..n as isize {
                let target = values[j as usize + g];
                let mean = rec.poly(j).mean();
                assert!(
                    (mean - target).abs() <= 1e-13 * target.abs().max(1.0),
                    "g={g} cell {j}: mean {mean} vs average {target}"
                );
            }
        }
    }

    #[test]
    fn reconstruct_rejects_insufficient_ghosts() {
        let params = ReconstructionParams::new(2).unwrap();
        let avg = ghosted(vec![0.0; 10], 1);
        assert!(reconstruct(&avg, &params, 0.1).is_err());
    }

    #[test]
    fn reconstruct_third_order_on_sine() {
        // g = 1: point error at right edges should drop ~8x per halving
        let f = |x: f64| (std::f64::consts::PI * x).sin();
        let anti = |x: f64| -(std::f64::consts::PI * x).cos() / std::f64::consts::PI;
        let params = ReconstructionParams::new(1).unwrap();
        let mut errors = Vec::new();
        for n in [40usize, 80, 160] {
            let h = 2.0 / n as f64;
            let values = averages_of(anti, -1.0 - h, h, n + 2);
            let rec = reconstruct(&ghosted(values, 1), &params, h).unwrap();
            let mut emax: f64 = 0.0;
            for j in 0..n as isize {
                let x_edge = -1.0 + (j + 1) as f64 * h;
                emax = emax.max((rec.evaluate(j, 1.0) - f(x_edge)).abs());
            }
            errors.push(emax);
        }
        for pair in errors.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!(order >= 2.8, "observed order {order} below 2.8: {errors:?}");
        }
    }
}
