//! Experiment presets, error norms, convergence tables and bound audits.
//!
//! This module wires the solver components into complete runs:
//!
//! * [`InitialProfile`] — the initial data used by the standard test cases,
//!   including the piecewise degree-17 plateau for bound-preservation runs,
//! * [`RunConfig`] / [`run_experiment`] — a fully described run (model,
//!   scheme, integrator, grid, step-size rule) and its execution,
//! * [`error_norms`] / [`convergence_rows`] — errors against a reference on
//!   a nested finer grid, and mesh-refinement tables with observed rates,
//! * [`maxprinciple_audit`] — global min/max versus prescribed bounds,
//! * preset constructors for the four standard experiments.

use crate::error::Result;
use crate::grid::{Boundary, CellAverages, Grid};
use crate::invalid_input;
use crate::limiter::BoundPair;
use crate::model::{sedimentation_model, traffic_model, NonlocalModel};
use crate::quadrature::{initial_cell_averages, radau_rule};
use crate::reconstruction::ReconstructionParams;
use crate::spatial::{cfl_step, LimiterMode, Scheme};
use crate::timestep::{integrate_to, IntegratorSpec, MethodId};

// ---------------------------------------------------------------------------
// initial data

/// Coefficients of `S(x)/x⁹`: `C(8+k, k)·C(17, 8−k)·(−1)^k` for `k = 0..8`.
const SMOOTHSTEP17_BRACKET: [f64; 9] = [
    24310.0,
    -175032.0,
    556920.0,
    -1021020.0,
    1178100.0,
    -875160.0,
    408408.0,
    -109395.0,
    12870.0,
];

/// The C⁸ smoothstep: the unique degree-17 polynomial with `S(0) = 0`,
/// `S(1) = 1` and vanishing derivatives of orders 1..8 at both endpoints.
/// Inputs outside `[0, 1]` are clamped, extending `S` continuously by its
/// plateau values.
///
/// Near `x = 1` the monomial form cancels catastrophically (the bracket sum
/// alternates in units of 10⁶ to produce a value near 1), which would push
/// results above 1 by ~10⁻¹¹; evaluating the upper half as `1 − S(1 − x)`
/// keeps every output inside `[0, 1]` in floating point and makes the
/// symmetry `S(x) + S(1 − x) = 1` hold to the last bit.
pub fn smoothstep17(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    if x > 0.5 {
        return 1.0 - smoothstep17_lower(1.0 - x);
    }
    smoothstep17_lower(x)
}

/// Monomial-form evaluation, accurate (and non-negative) for `x ∈ [0, 1/2]`.
fn smoothstep17_lower(x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in SMOOTHSTEP17_BRACKET.iter().rev() {
        acc = acc * x + c;
    }
    acc * x.powi(9)
}

/// Initial data of the standard test cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialProfile {
    /// 0.95 on `[−0.5, 0.4]`, 0.05 elsewhere — a double Riemann problem.
    RiemannPlateau,
    /// `0.5 + 0.4·sin(πx)` — smooth periodic wave on `[−1, 1]`.
    SineWave,
    /// `0.8·sin(πx)^10` — smooth compact bump on `[0, 1]`.
    SineBump,
    /// 0 → 1 → 0 plateau on `[0, 1]` with degree-17 transitions on
    /// `[1/8, 3/8]` and `[5/8, 7/8]`; attains both bounds exactly.
    SmoothPlateau,
    /// Constant state.
    Constant(f64),
}

impl InitialProfile {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            InitialProfile::RiemannPlateau => {
                if (-0.5..=0.4).contains(&x) {
                    0.95
                } else {
                    0.05
                }
            }
            InitialProfile::SineWave => 0.5 + 0.4 * (std::f64::consts::PI * x).sin(),
            InitialProfile::SineBump => 0.8 * (std::f64::consts::PI * x).sin().powi(10),
            InitialProfile::SmoothPlateau => {
                if x < 0.125 {
                    0.0
                } else if x < 0.375 {
                    smoothstep17(4.0 * (x - 0.125))
                } else if x <= 0.625 {
                    1.0
                } else if x < 0.875 {
                    smoothstep17(4.0 * (0.875 - x))
                } else {
                    0.0
                }
            }
            InitialProfile::Constant(v) => v,
        }
    }

    /// Exact range `[inf ρ₀, sup ρ₀]` of the profile (the bound pair of the
    /// maximum principle).
    pub fn range(&self) -> (f64, f64) {
        match *self {
            InitialProfile::RiemannPlateau => (0.05, 0.95),
            InitialProfile::SineWave => (0.1, 0.9),
            InitialProfile::SineBump => (0.0, 0.8),
            InitialProfile::SmoothPlateau => (0.0, 1.0),
            InitialProfile::Constant(v) => (v, v),
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        if let Some(v) = id.strip_prefix("constant:") {
            let v: f64 = v
                .parse()
                .map_err(|_| invalid_input!("bad constant profile '{id}'"))?;
            return Ok(InitialProfile::Constant(v));
        }
        Ok(match id {
            "riemann" => InitialProfile::RiemannPlateau,
            "sine" => InitialProfile::SineWave,
            "bump" => InitialProfile::SineBump,
            "plateau" => InitialProfile::SmoothPlateau,
            _ => {
                return Err(invalid_input!(
                    "unknown profile '{id}' (expected riemann, sine, bump, plateau or constant:<v>)"
                ))
            }
        })
    }

    pub fn id(&self) -> String {
        match *self {
            InitialProfile::RiemannPlateau => "riemann".into(),
            InitialProfile::SineWave => "sine".into(),
            InitialProfile::SineBump => "bump".into(),
            InitialProfile::SmoothPlateau => "plateau".into(),
            InitialProfile::Constant(v) => format!("constant:{v}"),
        }
    }
}

// ---------------------------------------------------------------------------
// run configuration

/// Step-size selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// `τ = safety·h/(h·w(0) + 1)` — traffic convergence runs.
    TrafficConvergence,
    /// `τ = safety·h/(3η·w(0) + 1)` — sedimentation convergence runs.
    SedimentationConvergence,
    /// `τ = safety·c_SSP·γ_R·h/(γ_R·h·w(0)·‖v′‖‖g‖ + ‖v‖‖g′‖)` — the bound
    /// guarantee's step restriction.
    BoundPreserving,
}

/// Everything needed to execute one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: NonlocalModel,
    /// Reconstruction half-width `g ∈ {1, 2, 3}` (scheme order `2g+1`).
    pub g: usize,
    pub integrator: MethodId,
    pub grid: Grid,
    pub t_final: f64,
    pub limiter: LimiterMode,
    /// Safety factor multiplying the step-size rule.
    pub safety: f64,
    pub step_rule: StepRule,
    pub profile: InitialProfile,
    /// Solution bounds for limiting/auditing; `None` derives them from the
    /// profile range.
    pub bounds: Option<BoundPair>,
    /// Mesh refinement index `n` with `h = (1/20)·2^{−n}`; drives the
    /// two-step bootstrap sub-step rule.
    pub refinement_index: f64,
}

/// Refinement index `n` solving `h = (1/20)·2^{−n}` for a given `h`.
pub fn refinement_index_for(h: f64) -> f64 {
    (1.0 / (20.0 * h)).log2()
}

/// Mesh size `h = (1/20)·2^{−n}` of the convergence studies.
pub fn table_mesh(n: u32) -> f64 {
    1.0 / (20.0 * f64::powi(2.0, n as i32))
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.g) {
            return Err(invalid_input!("scheme half-width must be 1, 2 or 3, got {}", self.g));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(invalid_input!("final time must be positive, got {}", self.t_final));
        }
        if !(self.safety > 0.0) || self.safety > 1.0 {
            return Err(invalid_input!(
                "safety factor must lie in (0, 1], got {}",
                self.safety
            ));
        }
        Ok(())
    }

    /// `γ_R = 1/R²` for the rule with `R = g + 1` nodes.
    pub fn gamma_r(&self) -> f64 {
        let r = (self.g + 1) as f64;
        1.0 / (r * r)
    }

    /// The run's time step according to its step rule.
    pub fn time_step(&self, spec: &IntegratorSpec) -> Result<f64> {
        let h = self.grid.h;
        let w0 = self.model.w_at_zero;
        Ok(match self.step_rule {
            StepRule::TrafficConvergence => self.safety * h / (h * w0 + 1.0),
            StepRule::SedimentationConvergence => {
                self.safety * h / (3.0 * self.model.eta * w0 + 1.0)
            }
            StepRule::BoundPreserving => {
                let c_ssp = spec.c_ssp.ok_or_else(|| {
                    invalid_input!(
                        "integrator '{}' has no strong-stability coefficient; the bound-preserving \
                         step rule requires one",
                        spec.method.as_str()
                    )
                })?;
                cfl_step(&self.model, h, self.gamma_r(), c_ssp, self.safety)
            }
        })
    }

    /// Sub-step bound for the fourth-order bootstrap of a two-step method:
    /// `min{τ, 1.35·γ_R·h/(γ_R·h·w(0) + 1)·2^{−αn}}` with `α = 5/4` for the
    /// order-5 method and `α = 7/4` for the order-7 method.
    pub fn bootstrap_sub_tau(&self, tau: f64, spec: &IntegratorSpec) -> Option<f64> {
        if !spec.two_step {
            return None;
        }
        let alpha = match spec.formal_order {
            5 => 1.25,
            7 => 1.75,
            _ => return Some(tau),
        };
        let h = self.grid.h;
        let gamma = self.gamma_r();
        let base = 1.35 * gamma * h / (gamma * h * self.model.w_at_zero + 1.0);
        Some(tau.min(base * f64::powf(2.0, -alpha * self.refinement_index)))
    }

    /// Bounds used for limiting and auditing: the explicit pair if set, the
    /// profile range otherwise.
    pub fn effective_bounds(&self) -> Result<BoundPair> {
        match self.bounds {
            Some(b) => Ok(b),
            None => {
                let (lo, hi) = self.profile.range();
                BoundPair::new(lo, hi)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// running

/// Outcome of a single run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub grid: Grid,
    pub initial: CellAverages,
    pub state: CellAverages,
    pub tau: f64,
    pub steps: usize,
    /// Smallest/largest cell average over the initial state and every step.
    pub min_seen: f64,
    pub max_seen: f64,
    /// Bounds the run was limited/audited against.
    pub bounds: BoundPair,
}

/// Initialize cell averages from the profile and integrate to the final time.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    let spec = IntegratorSpec::from_id(cfg.integrator.as_str())?;
    let params = ReconstructionParams::new(cfg.g)?;
    let rule = radau_rule(cfg.g + 1)?;
    let bounds = cfg.effective_bounds()?;
    let scheme = Scheme::new(
        cfg.model,
        cfg.grid,
        params,
        rule,
        cfg.limiter,
        Some(bounds),
    )?;
    let initial = initial_cell_averages(|x| cfg.profile.eval(x), &cfg.grid, rule);
    let tau = cfg.time_step(&spec)?;
    let sub_tau = cfg.bootstrap_sub_tau(tau, &spec);
    let mut rhs = |state: &CellAverages| scheme.rhs(state);
    let out = integrate_to(&initial, cfg.t_final, tau, &mut rhs, &spec, sub_tau)?;
    Ok(RunResult {
        grid: cfg.grid,
        initial,
        state: out.state,
        tau: out.tau,
        steps: out.steps,
        min_seen: out.min_seen,
        max_seen: out.max_seen,
        bounds,
    })
}

// ---------------------------------------------------------------------------
// errors and convergence tables

/// L¹ and L∞ errors of `coarse` against a reference on a nested finer grid.
///
/// The reference is restricted to the coarse grid by exact block means of
/// its cell averages (the grids share the domain and the fine resolution is
/// an integer multiple of the coarse one), then
/// `L¹ = h·Σ_j |ρ̄_j − ρ̄_ref,j|` and `L∞ = max_j |ρ̄_j − ρ̄_ref,j|`.
pub fn error_norms(
    coarse: &CellAverages,
    coarse_grid: &Grid,
    reference: &CellAverages,
    reference_grid: &Grid,
) -> Result<(f64, f64)> {
    if coarse.len() != coarse_grid.n_cells || reference.len() != reference_grid.n_cells {
        return Err(invalid_input!("state sizes do not match their grids"));
    }
    let scale = coarse_grid.length().abs().max(1.0);
    if (coarse_grid.x0 - reference_grid.x0).abs() > 1e-12 * scale
        || (coarse_grid.length() - reference_grid.length()).abs() > 1e-12 * scale
    {
        return Err(invalid_input!(
            "error norms require grids covering the same domain"
        ));
    }
    if reference_grid.n_cells % coarse_grid.n_cells != 0 {
        return Err(invalid_input!(
            "reference grid with {} cells is not a refinement of {} cells",
            reference_grid.n_cells,
            coarse_grid.n_cells
        ));
    }
    let factor = reference_grid.n_cells / coarse_grid.n_cells;
    let mut l1 = 0.0;
    let mut linf: f64 = 0.0;
    for j in 0..coarse_grid.n_cells {
        let block = &reference.values[j * factor..(j + 1) * factor];
        let mean = block.iter().sum::<f64>() / factor as f64;
        let diff = (coarse.values[j] - mean).abs();
        l1 += diff;
        linf = linf.max(diff);
    }
    Ok((l1 * coarse_grid.h, linf))
}

/// One line of a mesh-refinement table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: u32,
    pub h: f64,
    pub l1: f64,
    pub l1_rate: Option<f64>,
    pub linf: f64,
    pub linf_rate: Option<f64>,
}

/// Build table rows with observed rates `log2(e_{n−1}/e_n)` from
/// `(n, h, L1, L∞)` samples ordered coarse to fine.
pub fn convergence_rows(samples: &[(u32, f64, f64, f64)]) -> Vec<ConvergenceRow> {
    samples
        .iter()
        .enumerate()
        .map(|(i, &(n, h, l1, linf))| {
            let rate = |prev: f64, cur: f64| {
                if prev > 0.0 && cur > 0.0 {
                    Some((prev / cur).log2())
                } else {
                    None
                }
            };
            let (l1_rate, linf_rate) = if i == 0 {
                (None, None)
            } else {
                let (_, _, p1, pinf) = samples[i - 1];
                (rate(p1, l1), rate(pinf, linf))
            };
            ConvergenceRow {
                n,
                h,
                l1,
                l1_rate,
                linf,
                linf_rate,
            }
        })
        .collect()
}

/// Run a family of configurations against a shared reference run and build
/// the refinement table.
pub fn run_convergence_family(
    configs: &[RunConfig],
    reference: &RunConfig,
) -> Result<Vec<ConvergenceRow>> {
    let ref_run = run_experiment(reference)?;
    let mut samples = Vec::with_capacity(configs.len());
    for cfg in configs {
        let run = run_experiment(cfg)?;
        let (l1, linf) = error_norms(&run.state, &cfg.grid, &ref_run.state, &reference.grid)?;
        samples.push((cfg.refinement_index.round() as u32, cfg.grid.h, l1, linf));
    }
    Ok(convergence_rows(&samples))
}

/// Scientific notation with two fractional digits and a sign-and-two-digit
/// exponent (`2.33e-04`), matching the convergence-table typography.
pub fn format_sci(v: f64) -> String {
    if v == 0.0 {
        return "0.00e+00".to_string();
    }
    let s = format!("{v:.2e}");
    let (mantissa, exp) = s.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

/// Render rows as CSV with columns `n, L1, L1_rate, Linf, Linf_rate`
/// (rates empty on the coarsest row).
pub fn convergence_table_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("n,L1,L1_rate,Linf,Linf_rate\n");
    for row in rows {
        let rate = |r: Option<f64>| r.map(|v| format!("{v:.2}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.n,
            format_sci(row.l1),
            rate(row.l1_rate),
            format_sci(row.linf),
            rate(row.linf_rate),
        ));
    }
    out
}

/// Plot-ready snapshot: one `x ρ̄` line per cell center.
pub fn snapshot_text(grid: &Grid, state: &CellAverages) -> String {
    let mut out = String::with_capacity(state.len() * 48);
    for (j, v) in state.values.iter().enumerate() {
        out.push_str(&format!("{:.17e} {:.17e}\n", grid.cell_center(j), v));
    }
    out
}

// ---------------------------------------------------------------------------
// maximum-principle audit

/// Excursions beyond the audit tolerance are flagged.
pub const AUDIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub min_seen: f64,
    pub max_seen: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// How far below the lower bound the run dipped (0 if it never did).
    pub lower_excess: f64,
    /// How far above the upper bound the run rose (0 if it never did).
    pub upper_excess: f64,
    pub flagged: bool,
}

/// Compare recorded global extrema against the prescribed bounds.
pub fn maxprinciple_audit(min_seen: f64, max_seen: f64, bounds: &BoundPair) -> AuditReport {
    let lower_excess = (bounds.min - min_seen).max(0.0);
    let upper_excess = (max_seen - bounds.max).max(0.0);
    AuditReport {
        min_seen,
        max_seen,
        lower_bound: bounds.min,
        upper_bound: bounds.max,
        lower_excess,
        upper_excess,
        flagged: lower_excess > AUDIT_TOLERANCE || upper_excess > AUDIT_TOLERANCE,
    }
}

/// Render an audit report as the `audit.txt` body.
pub fn audit_text(report: &AuditReport) -> String {
    format!(
        "global minimum   {}\n\
         global maximum   {}\n\
         lower bound      {}\n\
         upper bound      {}\n\
         lower excursion  {}\n\
         upper excursion  {}\n\
         maximum principle {} (tolerance {:.0e})\n",
        format_sci17(report.min_seen),
        format_sci17(report.max_seen),
        format_sci17(report.lower_bound),
        format_sci17(report.upper_bound),
        format_sci17(report.lower_excess),
        format_sci17(report.upper_excess),
        if report.flagged { "VIOLATED" } else { "SATISFIED" },
        AUDIT_TOLERANCE,
    )
}

fn format_sci17(v: f64) -> String {
    format!("{v:.17e}")
}

// ---------------------------------------------------------------------------
// experiment presets

/// Integrator pairing for convergence runs: the one-step method of the
/// scheme's order.
pub fn convergence_integrator(g: usize) -> Result<MethodId> {
    Ok(match g {
        1 => MethodId::TvdRk3,
        2 => MethodId::Rk5,
        3 => MethodId::Rk7,
        _ => return Err(invalid_input!("no convergence integrator for g = {g}")),
    })
}

/// Integrator pairing for bound-preserving runs: the SSP method of the
/// scheme's order.
pub fn bound_preserving_integrator(g: usize) -> Result<MethodId> {
    Ok(match g {
        1 => MethodId::TvdRk3,
        2 => MethodId::Tsrk5,
        3 => MethodId::Tsrk7,
        _ => return Err(invalid_input!("no bound-preserving integrator for g = {g}")),
    })
}

/// Double-Riemann traffic run on `[−1, 1]`: quadratic-decay kernel with
/// `η = 0.1`, final time 0.1, periodic boundary, limiter off.
pub fn nonsmooth_traffic_config(g: usize, h: f64) -> Result<RunConfig> {
    let grid = Grid::with_spacing(-1.0, 1.0, h, Boundary::Periodic)?;
    Ok(RunConfig {
        model: traffic_model(3, 0.1)?,
        g,
        integrator: convergence_integrator(g)?,
        grid,
        t_final: 0.1,
        limiter: LimiterMode::Off,
        safety: 0.9,
        step_rule: StepRule::TrafficConvergence,
        profile: InitialProfile::RiemannPlateau,
        bounds: None,
        refinement_index: refinement_index_for(h),
    })
}

/// Smooth traffic convergence run on `[−1, 1]`: kernel `kernel_id` with
/// `η = 0.2`, final time 0.15, mesh `h = (1/20)·2^{−n}`.
pub fn smooth_traffic_config(g: usize, kernel_id: u8, n: u32) -> Result<RunConfig> {
    let h = table_mesh(n);
    let grid = Grid::with_spacing(-1.0, 1.0, h, Boundary::Periodic)?;
    Ok(RunConfig {
        model: traffic_model(kernel_id, 0.2)?,
        g,
        integrator: convergence_integrator(g)?,
        grid,
        t_final: 0.15,
        limiter: LimiterMode::Off,
        safety: 0.9,
        step_rule: StepRule::TrafficConvergence,
        profile: InitialProfile::SineWave,
        bounds: None,
        refinement_index: n as f64,
    })
}

/// Sedimentation convergence run on `[0, 1]`: truncated-parabola kernel with
/// `η = 0.05`, final time 0.04, zero boundary extension.
pub fn sedimentation_config(g: usize, n: u32) -> Result<RunConfig> {
    let h = table_mesh(n);
    let grid = Grid::with_spacing(0.0, 1.0, h, Boundary::Constant(0.0))?;
    Ok(RunConfig {
        model: sedimentation_model(0.05)?,
        g,
        integrator: convergence_integrator(g)?,
        grid,
        t_final: 0.04,
        limiter: LimiterMode::Off,
        safety: 0.9,
        step_rule: StepRule::SedimentationConvergence,
        profile: InitialProfile::SineBump,
        bounds: None,
        refinement_index: n as f64,
    })
}

/// Bound-preservation run on `[0, 1]`: smooth 0→1→0 plateau, quadratic-decay
/// kernel with `η = 0.05`, final time 0.05, SSP integrator of the scheme's
/// order, the bound guarantee's step rule and bounds `[0, 1]`.
pub fn maxprinciple_config(g: usize, n: u32, limiter: LimiterMode) -> Result<RunConfig> {
    let h = table_mesh(n);
    let grid = Grid::with_spacing(0.0, 1.0, h, Boundary::Periodic)?;
    Ok(RunConfig {
        model: traffic_model(3, 0.05)?,
        g,
        integrator: bound_preserving_integrator(g)?,
        grid,
        t_final: 0.05,
        limiter,
        safety: 0.9,
        step_rule: StepRule::BoundPreserving,
        profile: InitialProfile::SmoothPlateau,
        bounds: Some(BoundPair::new(0.0, 1.0)?),
        refinement_index: n as f64,
    })
}

/// Reference configuration for a convergence family: the seven-point scheme
/// with its one-step integrator on the `n_ref` mesh, same model, profile,
/// step rule and final time.
pub fn reference_config(like: &RunConfig, n_ref: u32) -> Result<RunConfig> {
    let h = table_mesh(n_ref);
    let grid = Grid::with_spacing(
        like.grid.x0,
        like.grid.x1(),
        h,
        like.grid.boundary,
    )?;
    Ok(RunConfig {
        model: like.model,
        g: 3,
        integrator: convergence_integrator(3)?,
        grid,
        t_final: like.t_final,
        limiter: LimiterMode::Off,
        safety: like.safety,
        step_rule: like.step_rule,
        profile: like.profile,
        bounds: None,
        refinement_index: n_ref as f64,
    })
}
