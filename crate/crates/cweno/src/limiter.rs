//! Linear scaling limiter.
//!
//! Rescales a cell polynomial toward its mean,
//!
//! ```text
//!     P̃ = ρ̄ + θ (P - ρ̄),   θ ∈ [0, 1],
//! ```
//!
//! with the largest θ for which all *discrete* evaluation points the scheme
//! actually uses (quadrature nodes plus the flux point y = 1) stay inside
//! prescribed global bounds. The cell mean is untouched, so conservation is
//! preserved; on smooth in-bounds data θ = 1 and the limiter is inactive.

use crate::reconstruction::LocalPolynomial;
use crate::{bounds_violation, invalid_input, Result};

/// Global solution bounds `ρ_m ≤ ρ ≤ ρ_M` enforced by the limiter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub min: f64,
    pub max: f64,
}

impl BoundPair {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min <= max) {
            return Err(invalid_input!("bounds [{min}, {max}] have min > max"));
        }
        Ok(BoundPair { min, max })
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        v >= self.min - slack && v <= self.max + slack
    }
}

/// Minimum and maximum of `P` over the given evaluation points `y ∈ [0,1]`.
pub fn cell_extrema(p: &LocalPolynomial, eval_points: &[f64]) -> Result<(f64, f64)> {
    if eval_points.is_empty() {
        return Err(invalid_input!("cell_extrema needs at least one evaluation point"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &y in eval_points {
        let v = p.eval_y(y);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Scale `P` about the cell average so the recorded extrema land in bounds.
///
/// Returns the scaled polynomial and the scaling factor θ. The cell average
/// must already lie inside the bounds; if it does not, the CFL condition was
/// violated upstream and the state is unusable for bound-preserving stepping.
pub fn scale(
    p: &LocalPolynomial,
    rho_bar: f64,
    bounds: &BoundPair,
    extrema: (f64, f64),
) -> Result<(LocalPolynomial, f64)> {
    // tiny slack for accumulated roundoff in upstream convex combinations
    if !bounds.contains(rho_bar, 1e-10) {
        return Err(bounds_violation!(
            "cell average {rho_bar} outside [{}, {}]",
            bounds.min,
            bounds.max
        ));
    }
    let (m_j, big_m_j) = extrema;

    let ratio = |target: f64, extremum: f64| -> f64 {
        let den = extremum - rho_bar;
        if den == 0.0 {
            1.0 // flat side: no constraint
        } else {
            ((target - rho_bar) / den).abs().min(1.0)
        }
    };
    let theta = ratio(bounds.max, big_m_j).min(ratio(bounds.min, m_j));

    if theta >= 1.0 {
        return Ok((*p, 1.0));
    }
    Ok((p.scaled_about(rho_bar, theta), theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn extrema_of_known_polynomials() {
        let c = LocalPolynomial::constant(0.4);
        assert_eq!(cell_extrema(&c, &[0.0, 0.5, 1.0]).unwrap(), (0.4, 0.4));

        // Q = ξ at y ∈ {1/3, 1} → ξ ∈ {-1/6, 1/2}
        let q = LocalPolynomial::from_coeffs(&[0.0, 1.0]);
        let (lo, hi) = cell_extrema(&q, &[1.0 / 3.0, 1.0]).unwrap();
        assert_abs_diff_eq!(lo, -1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 0.5, epsilon = 1e-15);

        // Q = ξ² at the edges: both 1/4
        let q = LocalPolynomial::from_coeffs(&[0.0, 0.0, 1.0]);
        let (lo, hi) = cell_extrema(&q, &[0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(lo, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn extrema_reject_empty_point_list() {
        let q = LocalPolynomial::constant(0.0);
        assert!(matches!(
            cell_extrema(&q, &[]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn feasible_polynomial_is_untouched() {
        let bounds = BoundPair::new(0.0, 1.0).unwrap();
        let q = LocalPolynomial::from_coeffs(&[0.5, 0.2]); // 0.3 .. 0.7 on the cell
        let extrema = cell_extrema(&q, &[0.0, 1.0]).unwrap();
        let (scaled, theta) = scale(&q, 0.5, &bounds, extrema).unwrap();
        assert_eq!(theta, 1.0);
        assert_eq!(scaled, q);
    }

    #[test]
    fn theta_formula_example() {
        // ρ̄ = 0.5, extrema (-0.5, 1.5), bounds [0,1] → θ = 0.5
        let bounds = BoundPair::new(0.0, 1.0).unwrap();
        let q = LocalPolynomial::from_coeffs(&[0.5, 2.0]); // -0.5 at y=0, 1.5 at y=1
        let extrema = cell_extrema(&q, &[0.0, 1.0]).unwrap();
        let (scaled, theta) = scale(&q, 0.5, &bounds, extrema).unwrap();
        assert_abs_diff_eq!(theta, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(scaled.eval_y(1.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(scaled.eval_y(0.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn average_at_bound_flattens_polynomial() {
        let bounds = BoundPair::new(0.0, 1.0).unwrap();
        // mean 1 (= ρ_M), exceeds above → θ = 0, P̃ ≡ 1
        let q = LocalPolynomial::from_coeffs(&[1.0, 0.5]);
        let extrema = cell_extrema(&q, &[0.0, 1.0]).unwrap();
        let (scaled, theta) = scale(&q, 1.0, &bounds, extrema).unwrap();
        assert_eq!(theta, 0.0);
        for y in [0.0, 0.3, 1.0] {
            assert_abs_diff_eq!(scaled.eval_y(y), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn out_of_bounds_average_is_an_invariant_violation() {
        let bounds = BoundPair::new(0.0, 1.0).unwrap();
        let q = LocalPolynomial::constant(1.5);
        let err = scale(&q, 1.5, &bounds, (1.5, 1.5)).unwrap_err();
        assert!(matches!(err, Error::BoundsViolation(_)));
    }

    #[test]
    fn bound_pair_validates() {
        assert!(BoundPair::new(1.0, 0.0).is_err());
        assert!(BoundPair::new(0.3, 0.3).is_ok());
    }

    proptest! {
        /// Scaling keeps the mean and forces all recorded points in bounds.
        #[test]
        fn scaling_conserves_mean_and_respects_bounds(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 1..=5),
            min in -0.5f64..0.0,
            width in 0.1f64..1.5,
        ) {
            let p = LocalPolynomial::from_coeffs(&coeffs);
            let bounds = BoundPair::new(min, min + width).unwrap();
            let rho_bar = p.mean();
            prop_assume!(bounds.contains(rho_bar, 0.0));

            // quadrature nodes of the 3-point rule plus both edges
            let points = [0.0, 0.15505102572168172, 0.64494897427831788, 1.0];
            let extrema = cell_extrema(&p, &points).unwrap();
            let (scaled, theta) = scale(&p, rho_bar, &bounds, extrema).unwrap();

            prop_assert!((0.0..=1.0).contains(&theta));
            prop_assert!((scaled.mean() - rho_bar).abs() <= 1e-14);
            for y in points {
                let v = scaled.eval_y(y);
                prop_assert!(
                    bounds.contains(v, 1e-13),
                    "value {v} at y={y} escapes [{}, {}] (theta {theta})",
                    bounds.min, bounds.max
                );
            }
            // idempotence up to roundoff: a second pass is a near no-op
            let extrema2 = cell_extrema(&scaled, &points).unwrap();
            let (rescaled, theta2) = scale(&scaled, rho_bar, &bounds, extrema2).unwrap();
            prop_assert!(theta2 >= 1.0 - 1e-12);
            for y in points {
                prop_assert!((rescaled.eval_y(y) - scaled.eval_y(y)).abs() <= 1e-12);
            }
        }
    }
}
