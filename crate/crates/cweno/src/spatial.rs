//! Semi-discrete right-hand side for the non-local conservation law.
//!
//! One evaluation runs the full spatial pipeline: ghost extension of the
//! cell averages, reconstruction, optional bound limiting, convolution
//! velocities at every interface, the upwind flux, and divided flux
//! differences. The pipeline is a pure function of the averages, so results
//! are deterministic and mass is conserved on periodic grids up to roundoff.

use crate::grid::{Boundary, CellAverages, GhostedAverages, Grid};
use crate::limiter::{self, BoundPair};
use crate::model::{kernel_samples, KernelSampleTable, NonlocalModel};
use crate::quadrature::QuadratureRule;
use crate::reconstruction::{reconstruct, PiecewiseReconstruction, ReconstructionParams};
use crate::{invalid_input, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimiterMode {
    On,
    Off,
}

/// Pad the averages with `width` ghost cells per side: periodic wrap-around,
/// or the boundary value for constant extension.
pub fn ghost_extend(avg: &CellAverages, grid: &Grid, width: usize) -> Result<GhostedAverages> {
    let n = avg.len();
    if n != grid.n_cells {
        return Err(invalid_input!(
            "state has {n} cells but the grid has {}",
            grid.n_cells
        ));
    }
    let mut values = Vec::with_capacity(n + 2 * width);
    match grid.boundary {
        Boundary::Periodic => {
            if width > n {
                return Err(invalid_input!(
                    "periodic ghost width {width} exceeds the grid size {n}"
                ));
            }
            values.extend_from_slice(&avg.values[n - width..]);
            values.extend_from_slice(&avg.values);
            values.extend_from_slice(&avg.values[..width]);
        }
        Boundary::Constant(c) => {
            values.resize(width, c);
            values.extend_from_slice(&avg.values);
            values.resize(n + 2 * width, c);
        }
    }
    Ok(GhostedAverages::from_parts(values, width))
}

/// Convolution velocities `V` at all `n + 1` interfaces.
///
/// `V[i]` belongs to the interface between cells `i - 1` and `i`; its value
/// is `v` applied to the kernel-weighted mean of reconstructed densities
/// over the downstream (and, for symmetric kernels, upstream) cells. The
/// renormalized sample table makes that mean a convex combination of the
/// evaluated densities.
pub fn convolution_velocities(
    rec: &PiecewiseReconstruction,
    table: &KernelSampleTable,
    model: &NonlocalModel,
) -> Result<Vec<f64>> {
    let n = rec.n_real() as isize;
    let margin = rec.margin() as isize;
    let need_left = -table.min_k();
    let need_right = table.max_k() + 1;
    if margin < need_left.max(need_right) {
        return Err(invalid_input!(
            "reconstruction margin {margin} does not cover the kernel span \
             ({need_left} upstream, {need_right} downstream)"
        ));
    }

    let weights: Vec<f64> = table
        .samples
        .iter()
        .map(|s| s.gamma * s.sub_len * s.renorm)
        .collect();
    let mut v = Vec::with_capacity(rec.n_real() + 1);
    for i in 0..=n {
        let mut mean = 0.0;
        for (s, w) in table.samples.iter().zip(&weights) {
            mean += w * rec.evaluate(i + s.k, s.y);
        }
        v.push(model.v(mean));
    }
    Ok(v)
}

/// Step size from the bound-preserving CFL condition,
///
/// ```text
///     τ = safety · c_ssp · γ_R h / (γ_R h w_η(0) ‖v'‖ ‖g‖ + ‖v‖ ‖g'‖),
/// ```
///
/// where `γ_R` is the smallest quadrature weight (the one at the flux node)
/// and `c_ssp` the integrator's strong-stability coefficient.
pub fn cfl_step(model: &NonlocalModel, h: f64, gamma_r: f64, c_ssp: f64, safety: f64) -> f64 {
    debug_assert!(h > 0.0 && gamma_r > 0.0 && c_ssp > 0.0 && safety > 0.0);
    safety * c_ssp * gamma_r * h
        / (gamma_r * h * model.w_at_zero * model.norm_vprime * model.norm_g
            + model.norm_v * model.norm_gprime)
}

/// A fully assembled spatial discretization: model, grid, reconstruction
/// parameters, quadrature rule, precomputed kernel table, and the limiter
/// configuration. [`Scheme::rhs`] evaluates the semi-discrete right-hand
/// side for a state on this grid.
#[derive(Debug, Clone)]
pub struct Scheme {
    pub model: NonlocalModel,
    pub grid: Grid,
    pub params: ReconstructionParams,
    pub rule: &'static QuadratureRule,
    pub table: KernelSampleTable,
    pub limiter: LimiterMode,
    pub bounds: Option<BoundPair>,
    /// Local coordinates at which reconstructed polynomials are evaluated:
    /// the quadrature nodes (whose last node is the flux point y = 1) plus
    /// any mapped nodes from fractional kernel subintervals.
    eval_points: Vec<f64>,
    ghost_width: usize,
}

impl Scheme {
    pub fn new(
        model: NonlocalModel,
        grid: Grid,
        params: ReconstructionParams,
        rule: &'static QuadratureRule,
        limiter: LimiterMode,
        bounds: Option<BoundPair>,
    ) -> Result<Self> {
        let table = kernel_samples(&model, grid.h, rule)?;

        if limiter == LimiterMode::On {
            let b = bounds.ok_or_else(|| {
                invalid_input!("bound limiting requires explicit solution bounds")
            })?;
            if !model.assumptions_hold {
                return Err(invalid_input!(
                    "model '{}' violates the structural assumptions of the \
                     bound-preserving theory; run with the limiter off",
                    model.name()
                ));
            }
            if b.min < 0.0 || b.max > model.rho_max {
                return Err(invalid_input!(
                    "bounds [{}, {}] exceed the model's density range [0, {}]",
                    b.min,
                    b.max,
                    model.rho_max
                ));
            }
        }

        let mut eval_points = rule.nodes.clone();
        eval_points.extend(table.extra_eval_points(rule));
        eval_points.sort_by(f64::total_cmp);
        eval_points.dedup();

        // ghosts must cover the kernel span, a possible fractional cell, and
        // the reconstruction stencil on top of the outermost evaluated cell
        let ghost_width = params.g + table.n_whole + 2;
        if grid.boundary == Boundary::Periodic && ghost_width > grid.n_cells {
            return Err(invalid_input!(
                "grid of {} cells is too small for a kernel spanning {} cells",
                grid.n_cells,
                table.n_whole
            ));
        }

        Ok(Scheme {
            model,
            grid,
            params,
            rule,
            table,
            limiter,
            bounds,
            eval_points,
            ghost_width,
        })
    }

    pub fn evaluation_points(&self) -> &[f64] {
        &self.eval_points
    }

    pub fn ghost_width(&self) -> usize {
        self.ghost_width
    }

    /// Reconstruct (and, with the limiter on, rescale) the state's cell
    /// polynomials, including the ghost margin.
    pub fn reconstruct_state(&self, avg: &CellAverages) -> Result<PiecewiseReconstruction> {
        let ghosted = ghost_extend(avg, &self.grid, self.ghost_width)?;
        let mut rec = reconstruct(&ghosted, &self.params, self.grid.h)?;
        if self.limiter == LimiterMode::On {
            let bounds = self.bounds.expect("validated at construction");
            let margin = rec.margin() as isize;
            let n = rec.n_real() as isize;
            for j in -margin..n + margin {
                let rho_bar = ghosted.get(j);
                let poly = rec.poly(j);
                let extrema = limiter::cell_extrema(poly, &self.eval_points)?;
                let (scaled, _theta) = limiter::scale(poly, rho_bar, &bounds, extrema)?;
                *rec.poly_mut(j) = scaled;
            }
        }
        Ok(rec)
    }

    /// Time derivative of the cell averages: upwind flux differences
    /// `-(F_{j+1/2} - F_{j-1/2})/h` with `F = V · g(ρ⁻)` and `ρ⁻` the
    /// left cell's trace at the interface.
    pub fn rhs(&self, avg: &CellAverages) -> Result<Vec<f64>> {
        let rec = self.reconstruct_state(avg)?;
        let v = convolution_velocities(&rec, &self.table, &self.model)?;

        let n = avg.len();
        let mut flux = Vec::with_capacity(n + 1);
        for (i, &vi) in v.iter().enumerate() {
            let trace = rec.evaluate(i as isize - 1, 1.0);
            flux.push(vi * self.model.g(trace));
        }
        let inv_h = 1.0 / self.grid.h;
        Ok((0..n).map(|j| -(flux[j + 1] - flux[j]) * inv_h).collect())
    }
}
