//! Model data for the non-local conservation laws.
//!
//! Each model bundles the flux factor `g`, the velocity map `v`, their
//! derivatives, the convolution kernel `w_η` with its support geometry, and
//! the analytic L∞ bounds over the physical density range that enter the
//! time-step restrictions. Two instances are provided: a traffic-flow model
//! with three one-sided kernels and a sedimentation model with a symmetric
//! truncated-parabola kernel.
//!
//! [`kernel_samples`] precomputes the discrete kernel table used by the
//! convolution quadrature, including fractional boundary subintervals when
//! the support length is not a whole number of cells, and renormalizes the
//! samples so the discrete kernel mass is exactly one.

use crate::quadrature::QuadratureRule;
use crate::{invalid_input, Result};

/// Kernel support geometry, measured as distances downstream of an interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportType {
    /// Kernel lives on `[0, L]`: only downstream densities are weighted.
    OneSided,
    /// Kernel lives on `[-L, L]` around the interface.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ModelKind {
    Traffic { kernel_id: u8 },
    Sedimentation,
}

/// A scalar non-local conservation law `ρ_t + (g(ρ) v(w_η * ρ))_x = 0`
/// together with the analytic constants its CFL conditions need.
///
/// The norm fields are L∞ bounds over the density range `[0, rho_max]`,
/// supplied in closed form per model so the step-size formulas carry no
/// sampling error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlocalModel {
    kind: ModelKind,
    /// Kernel length parameter η.
    pub eta: f64,
    /// Upper end of the physical density range `[0, rho_max]`.
    pub rho_max: f64,
    /// `sup |v|` over the density range.
    pub norm_v: f64,
    /// `sup |v'|` over the density range.
    pub norm_vprime: f64,
    /// `sup |g|` over the density range.
    pub norm_g: f64,
    /// `sup |g'|` over the density range.
    pub norm_gprime: f64,
    /// Kernel value at distance zero, `w_η(0)`.
    pub w_at_zero: f64,
    pub support: SupportType,
    /// Whether the structural assumptions behind the discrete maximum
    /// principle hold for this instance: `g' ≥ 0`, `v ≥ 0`, `v' ≤ 0`, and a
    /// non-negative, non-increasing one-sided kernel. Bound-preserving runs
    /// are only meaningful when this is true.
    pub assumptions_hold: bool,
}

/// Traffic-flow model: `g(ρ) = ρ`, `v(ρ) = 1 - ρ`, one-sided kernel on
/// `[0, η]` selected by `kernel_id`:
///
/// 1. `w(x) = 1/η` (constant),
/// 2. `w(x) = 2(η - x)/η²` (linear),
/// 3. `w(x) = 3(η² - x²)/(2η³)` (parabolic).
///
/// All three integrate to one over the support.
pub fn traffic_model(kernel_id: u8, eta: f64) -> Result<NonlocalModel> {
    if !(eta > 0.0) {
        return Err(invalid_input!("kernel length eta must be positive, got {eta}"));
    }
    let w_at_zero = match kernel_id {
        1 => 1.0 / eta,
        2 => 2.0 / eta,
        3 => 1.5 / eta,
        other => return Err(invalid_input!("unknown traffic kernel id {other} (expected 1-3)")),
    };
    Ok(NonlocalModel {
        kind: ModelKind::Traffic { kernel_id },
        eta,
        rho_max: 1.0,
        norm_v: 1.0,
        norm_vprime: 1.0,
        norm_g: 1.0,
        norm_gprime: 1.0,
        w_at_zero,
        support: SupportType::OneSided,
        assumptions_hold: true,
    })
}

/// Sedimentation model: `g(ρ) = ρ(1 - ρ)`, `v(ρ) = (1 - ρ)³`, symmetric
/// kernel `w_η(x) = K(x/η)/η` with the truncated parabola
/// `K(y) = (3/8)(1 - y²/4)` on `|y| ≤ 2`, so the support is `[-2η, 2η]`.
///
/// The kernel is not one-sided monotone, so the maximum-principle
/// assumptions are flagged false.
pub fn sedimentation_model(eta: f64) -> Result<NonlocalModel> {
    if !(eta > 0.0) {
        return Err(invalid_input!("kernel length eta must be positive, got {eta}"));
    }
    Ok(NonlocalModel {
        kind: ModelKind::Sedimentation,
        eta,
        rho_max: 1.0,
        norm_v: 1.0,
        norm_vprime: 3.0,
        norm_g: 0.25,
        norm_gprime: 1.0,
        w_at_zero: 3.0 / (8.0 * eta),
        support: SupportType::Symmetric,
        assumptions_hold: false,
    })
}

impl NonlocalModel {
    /// Flux factor `g(ρ)`.
    pub fn g(&self, rho: f64) -> f64 {
        match self.kind {
            ModelKind::Traffic { .. } => rho,
            ModelKind::Sedimentation => rho * (1.0 - rho),
        }
    }

    /// `g'(ρ)`.
    pub fn g_prime(&self, rho: f64) -> f64 {
        match self.kind {
            ModelKind::Traffic { .. } => 1.0,
            ModelKind::Sedimentation => 1.0 - 2.0 * rho,
        }
    }

    /// Velocity map `v(ρ)` applied to the convolved mean density.
    pub fn v(&self, rho: f64) -> f64 {
        match self.kind {
            ModelKind::Traffic { .. } => 1.0 - rho,
            ModelKind::Sedimentation => {
                let s = 1.0 - rho;
                s * s * s
            }
        }
    }

    /// `v'(ρ)`.
    pub fn v_prime(&self, rho: f64) -> f64 {
        match self.kind {
            ModelKind::Traffic { .. } => -1.0,
            ModelKind::Sedimentation => {
                let s = 1.0 - rho;
                -3.0 * s * s
            }
        }
    }

    /// Kernel value `w_η(x)`; zero outside the support.
    pub fn kernel(&self, x: f64) -> f64 {
        match self.kind {
            ModelKind::Traffic { kernel_id } => {
                if !(0.0..=self.eta).contains(&x) {
                    return 0.0;
                }
                let eta = self.eta;
                match kernel_id {
                    1 => 1.0 / eta,
                    2 => 2.0 * (eta - x) / (eta * eta),
                    3 => 3.0 * (eta * eta - x * x) / (2.0 * eta * eta * eta),
                    _ => unreachable!("kernel id validated at construction"),
                }
            }
            ModelKind::Sedimentation => {
                let y = x / self.eta;
                if y.abs() > 2.0 {
                    return 0.0;
                }
                (3.0 / 8.0) * (1.0 - y * y / 4.0) / self.eta
            }
        }
    }

    /// Support of the kernel as distances from an interface: `(0, η)` for
    /// one-sided kernels, `(-2η, 2η)` for the symmetric one.
    pub fn support_interval(&self) -> (f64, f64) {
        match self.support {
            SupportType::OneSided => (0.0, self.eta),
            SupportType::Symmetric => (-2.0 * self.eta, 2.0 * self.eta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Traffic { .. } => "traffic",
            ModelKind::Sedimentation => "sedimentation",
        }
    }

    pub fn kernel_id(&self) -> Option<u8> {
        match self.kind {
            ModelKind::Traffic { kernel_id } => Some(kernel_id),
            ModelKind::Sedimentation => None,
        }
    }
}

/// One discrete kernel sample: for the interface `j+1/2` it weights the
/// reconstructed density of cell `j + k + 1` evaluated at local coordinate
/// `y`, with quadrature measure `gamma * sub_len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    /// Subinterval index: the sampled cell is `j + k + 1` for interface `j+1/2`.
    pub k: isize,
    /// Evaluation coordinate inside that cell, `y ∈ [0, 1]`.
    pub y: f64,
    /// Quadrature weight of the node.
    pub gamma: f64,
    /// Length of the subinterval the sample integrates over (`h`, or the
    /// fractional remainder at a support boundary).
    pub sub_len: f64,
    /// Kernel value at the sample point.
    pub raw: f64,
    /// Mass-renormalized kernel value.
    pub renorm: f64,
}

/// Precomputed kernel samples for one mesh size, shared by every interface.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSampleTable {
    pub samples: Vec<KernelSample>,
    /// Number of whole-cell subintervals per support side.
    pub n_whole: usize,
    /// Discrete kernel mass before renormalization.
    pub raw_mass: f64,
    pub h: f64,
}

impl KernelSampleTable {
    /// Smallest subinterval index present.
    pub fn min_k(&self) -> isize {
        self.samples.iter().map(|s| s.k).min().expect("table is never empty")
    }

    /// Largest subinterval index present.
    pub fn max_k(&self) -> isize {
        self.samples.iter().map(|s| s.k).max().expect("table is never empty")
    }

    /// Discrete kernel mass of the renormalized samples (compensated sum);
    /// equals one up to a few ulps by construction.
    pub fn discrete_mass(&self) -> f64 {
        compensated_sum(self.samples.iter().map(|s| s.gamma * s.sub_len * s.renorm))
    }

    /// Local evaluation coordinates introduced by fractional boundary
    /// subintervals, beyond the plain quadrature nodes. Empty when the
    /// support length is a whole number of cells. Bound-enforcing callers
    /// must include these in the evaluation-point set they control.
    pub fn extra_eval_points(&self, rule: &QuadratureRule) -> Vec<f64> {
        let mut extra: Vec<f64> = self
            .samples
            .iter()
            .filter(|s| s.sub_len != self.h)
            .map(|s| s.y)
            .filter(|y| !rule.nodes.contains(y))
            .collect();
        extra.sort_by(f64::total_cmp);
        extra.dedup();
        extra
    }
}

/// Build the discrete kernel table for mesh size `h`.
///
/// Whole cells are covered by the rule's nodes directly; when the support
/// length is not an integer multiple of `h`, the leftover boundary piece(s)
/// get the same rule affinely mapped onto them. All samples are then
/// renormalized by the raw discrete mass so the table's total mass is one
/// and the convolution argument is a convex combination of density values.
pub fn kernel_samples(
    model: &NonlocalModel,
    h: f64,
    rule: &QuadratureRule,
) -> Result<KernelSampleTable> {
    if !(h > 0.0) {
        return Err(invalid_input!("mesh size must be positive, got {h}"));
    }
    let (_, extent) = model.support_interval();
    if h > extent {
        return Err(invalid_input!(
            "mesh size {h} exceeds the kernel support extent {extent}"
        ));
    }

    // Split the support side [0, extent] into n_whole cells plus a remainder,
    // absorbing floating-point noise when extent/h is a whole number.
    let ratio = extent / h;
    let rounded = ratio.round();
    let (n_whole, delta) = if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        (rounded as usize, 0.0)
    } else {
        let n = ratio.floor() as usize;
        (n, extent - n as f64 * h)
    };
    let n = n_whole as isize;

    let k_range = match model.support {
        SupportType::OneSided => 0..n,
        SupportType::Symmetric => -n..n,
    };

    let mut samples = Vec::new();
    for k in k_range {
        for (&y, &gamma) in rule.nodes.iter().zip(&rule.weights) {
            let dist = (k as f64 + y) * h;
            samples.push(KernelSample {
                k,
                y,
                gamma,
                sub_len: h,
                raw: model.kernel(dist),
                renorm: 0.0,
            });
        }
    }
    if delta > 0.0 {
        // boundary piece [n_whole * h, extent], inside cell j + n_whole + 1
        for (&y, &gamma) in rule.nodes.iter().zip(&rule.weights) {
            let dist = n as f64 * h + y * delta;
            samples.push(KernelSample {
                k: n,
                y: y * delta / h,
                gamma,
                sub_len: delta,
                raw: model.kernel(dist),
                renorm: 0.0,
            });
        }
        if model.support == SupportType::Symmetric {
            // mirrored piece [-extent, -n_whole * h], inside cell j - n_whole
            for (&y, &gamma) in rule.nodes.iter().zip(&rule.weights) {
                let dist = -extent + y * delta;
                samples.push(KernelSample {
                    k: -n - 1,
                    y: (dist + (n + 1) as f64 * h) / h,
                    gamma,
                    sub_len: delta,
                    raw: model.kernel(dist),
                    renorm: 0.0,
                });
            }
        }
    }

    let raw_mass = compensated_sum(samples.iter().map(|s| s.gamma * s.sub_len * s.raw));
    for s in &mut samples {
        s.renorm = s.raw / raw_mass;
    }

    Ok(KernelSampleTable { samples, n_whole, raw_mass, h })
}

/// Neumaier-compensated summation: error stays a few ulps of the result
/// independent of term count, which the mass identities here rely on.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}
