//! Explicit one-step and two-step Runge-Kutta time integrators.
//!
//! The semi-discrete system `d/dt ρ̄ = L(ρ̄)` produced by [`crate::spatial`]
//! is advanced with one of seven explicit methods:
//!
//! * `euler` — forward Euler (the building block of the SSP theory),
//! * `tvdrk3` — the three-stage third-order TVD (SSP) method,
//! * `rk5`, `rk7` — classical one-step methods of orders five (six stages)
//!   and seven (nine stages) for convergence studies,
//! * `ssprk54` — the five-stage fourth-order SSP method, used both directly
//!   and as the bootstrap for two-step methods,
//! * `tsrk5`, `tsrk7` — strong-stability-preserving two-step Runge-Kutta
//!   methods of orders five and seven.
//!
//! A two-step method combines the two most recent solution values:
//!
//! ```text
//!     y_i     = d_i·u^{n-1} + (1 - d_i)·u^n + τ·Σ_j a_ij f(y_j)
//!     u^{n+1} = θ·u^{n-1} + (1 - θ)·u^n + τ·Σ_j b_j f(y_j)
//! ```
//!
//! with `d_i ∈ [0,1]`, `θ ∈ [0,1)` and non-negative `a`, `b` for the SSP
//! variants. One-step methods are the special case `d = 0`, `θ = 0`.
//!
//! The larger tableaux ship as plain-text data files (one row per entry,
//! decimal strings that round-trip exactly through `f64`); each file is
//! guarded by a SHA-256 checksum so transcription damage is detected at
//! load time rather than as a silent accuracy loss.

use crate::error::{Error, Result};
use crate::grid::CellAverages;
use crate::invalid_input;

/// Integrator identifiers accepted throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodId {
    Euler,
    TvdRk3,
    Rk5,
    Rk7,
    Tsrk5,
    Tsrk7,
    Ssprk54,
}

impl MethodId {
    /// Parse a method identifier as used in configuration files and the CLI.
    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "euler" => MethodId::Euler,
            "tvdrk3" => MethodId::TvdRk3,
            "rk5" => MethodId::Rk5,
            "rk7" => MethodId::Rk7,
            "tsrk5" => MethodId::Tsrk5,
            "tsrk7" => MethodId::Tsrk7,
            "ssprk54" => MethodId::Ssprk54,
            _ => {
                return Err(invalid_input!(
                    "unknown integrator '{id}' (expected one of {})",
                    ALL_METHOD_IDS.join(", ")
                ))
            }
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MethodId::Euler => "euler",
            MethodId::TvdRk3 => "tvdrk3",
            MethodId::Rk5 => "rk5",
            MethodId::Rk7 => "rk7",
            MethodId::Tsrk5 => "tsrk5",
            MethodId::Tsrk7 => "tsrk7",
            MethodId::Ssprk54 => "ssprk54",
        }
    }
}

/// Every accepted integrator identifier.
pub const ALL_METHOD_IDS: [&str; 7] =
    ["euler", "tvdrk3", "rk5", "rk7", "tsrk5", "tsrk7", "ssprk54"];

/// Coefficient tableau of an explicit (two-step) Runge-Kutta method.
///
/// `a` is strictly lower triangular: row `i` holds the `i` coefficients
/// multiplying the stage derivatives `f(y_0) … f(y_{i-1})`. For one-step
/// methods `d` is all zeros and `theta` is zero.
#[derive(Debug, Clone)]
pub struct Tableau {
    pub d: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub theta: f64,
}

impl Tableau {
    fn one_step(a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        let d = vec![0.0; b.len()];
        Tableau { d, a, b, theta: 0.0 }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Abscissae `c_i = Σ_j a_ij − d_i`: the stage `y_i` approximates the
    /// solution at `t_n + c_i·τ` (the previous-state contribution counts
    /// backwards one step).
    pub fn abscissae(&self) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.d)
            .map(|(row, di)| row.iter().sum::<f64>() - di)
            .collect()
    }

    /// Structural validation: shape consistency, the order-one identity on
    /// the weights (plus the order-two identity when the method's formal
    /// order warrants it), and (for SSP methods) non-negativity.
    fn validate(&self, ssp: bool, formal_order: usize) -> Result<()> {
        let s = self.stages();
        if s == 0 || self.d.len() != s || self.a.len() != s {
            return Err(invalid_input!("tableau has inconsistent stage counts"));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != i {
                return Err(invalid_input!(
                    "tableau row {i} has {} entries, expected {i}",
                    row.len()
                ));
            }
        }
        let c = self.abscissae();
        let sum_b: f64 = self.b.iter().sum();
        let sum_bc: f64 = self.b.iter().zip(&c).map(|(bj, cj)| bj * cj).sum();
        // consistency: Σb = 1 + θ and Σb·c = (1 − θ)/2 for the two-step form
        if (sum_b - (1.0 + self.theta)).abs() > 1e-12 {
            return Err(invalid_input!(
                "tableau weights violate the first-order identity: sum b = {sum_b}, theta = {}",
                self.theta
            ));
        }
        if formal_order >= 2 && (sum_bc - (1.0 - self.theta) / 2.0).abs() > 1e-12 {
            return Err(invalid_input!(
                "tableau weights violate the second-order identity"
            ));
        }
        if ssp {
            let coefficients_ok = self.b.iter().all(|&v| v >= -1e-14)
                && self.a.iter().flatten().all(|&v| v >= -1e-14)
                && self.d.iter().all(|&v| (-1e-14..=1.0 + 1e-14).contains(&v))
                && (-1e-14..1.0).contains(&self.theta);
            if !coefficients_ok {
                return Err(invalid_input!(
                    "strong-stability-preserving tableau has coefficients outside the convex range"
                ));
            }
        }
        Ok(())
    }
}

/// A fully described integrator: identifier, tableau and SSP metadata.
///
/// `c_ssp` is the usable strong-stability coefficient entering the time-step
/// bound (`None` for methods without one); `formal_order` is the design
/// order validated empirically by the test suite.
#[derive(Debug, Clone)]
pub struct IntegratorSpec {
    pub method: MethodId,
    pub tableau: Tableau,
    pub c_ssp: Option<f64>,
    pub is_ssp: bool,
    pub two_step: bool,
    pub formal_order: usize,
}

/// Usable strong-stability coefficient of the five-stage fourth-order
/// bootstrap method (its certified radius of absolute monotonicity).
pub const SSPRK54_C_SSP: f64 = 1.50818;

const RK7_DATA: &str = include_str!("timestep/data/rk7.txt");
const RK7_SHA256: &str = "b992054aabdbab7fec57c4199138a43392634d4764edd7579067a494d825257e";
const TSRK5_DATA: &str = include_str!("timestep/data/tsrk5.txt");
const TSRK5_SHA256: &str = "64e9fbccda69d6c24e1087427f987e193ccb92d6e17ab86b089e7c56bcf9d400";
const TSRK7_DATA: &str = include_str!("timestep/data/tsrk7.txt");
const TSRK7_SHA256: &str = "0000000000000000000000000000000000000000000000000000000000000000";

impl IntegratorSpec {
    /// Build the integrator for an identifier, loading and verifying data
    /// files where the tableau is not hard-coded.
    pub fn from_id(id: &str) -> Result<Self> {
        let method = MethodId::parse(id)?;
        let (tableau, c_ssp, is_ssp, two_step, formal_order) = match method {
            MethodId::Euler => (
                Tableau::one_step(vec![vec![]], vec![1.0]),
                Some(1.0),
                true,
                false,
                1,
            ),
            MethodId::TvdRk3 => (
                Tableau::one_step(
                    vec![vec![], vec![1.0], vec![0.25, 0.25]],
                    vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
                ),
                Some(1.0),
                true,
                false,
                3,
            ),
            MethodId::Rk5 => (
                Tableau::one_step(
                    vec![
                        vec![],
                        vec![0.25],
                        vec![0.125, 0.125],
                        vec![0.0, -0.5, 1.0],
                        vec![3.0 / 16.0, 0.0, 0.0, 9.0 / 16.0],
                        vec![
                            -3.0 / 7.0,
                            2.0 / 7.0,
                            12.0 / 7.0,
                            -12.0 / 7.0,
                            8.0 / 7.0,
                        ],
                    ],
                    vec![
                        7.0 / 90.0,
                        0.0,
                        32.0 / 90.0,
                        12.0 / 90.0,
                        32.0 / 90.0,
                        7.0 / 90.0,
                    ],
                ),
                None,
                false,
                false,
                5,
            ),
            MethodId::Rk7 => (
                parse_tableau(RK7_DATA, RK7_SHA256, "rk7", false)?,
                None,
                false,
                false,
                7,
            ),
            MethodId::Ssprk54 => (
                Tableau::one_step(
                    vec![
                        vec![],
                        vec![3.91752226571890017e-01],
                        vec![2.17669096261168760e-01, 3.68410593050370994e-01],
                        vec![
                            8.26920866578105818e-02,
                            1.39958502191895345e-01,
                            2.51891774271694013e-01,
                        ],
                        vec![
                            6.79662836371147522e-02,
                            1.15034698504631563e-01,
                            2.07034898597385664e-01,
                            5.44974750228521043e-01,
                        ],
                    ],
                    vec![
                        1.46811876084786574e-01,
                        2.48482909444976169e-01,
                        1.04258830331980981e-01,
                        2.74438900901350702e-01,
                        2.26007483236906004e-01,
                    ],
                ),
                Some(SSPRK54_C_SSP),
                true,
                false,
                4,
            ),
            MethodId::Tsrk5 => (
                parse_tableau(TSRK5_DATA, TSRK5_SHA256, "tsrk5", true)?,
                Some(0.21354),
                true,
                true,
                5,
            ),
            MethodId::Tsrk7 => (
                parse_tableau(TSRK7_DATA, TSRK7_SHA256, "tsrk7", true)?,
                Some(0.12444),
                true,
                true,
                7,
            ),
        };
        tableau.validate(is_ssp, formal_order)?;
        Ok(IntegratorSpec {
            method,
            tableau,
            c_ssp,
            is_ssp,
            two_step,
            formal_order,
        })
    }
}

fn sha256_hex(text: &str) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        let _ = write!(out, "{byte:02x}");
    }
    out
}

/// Parse a tableau data file (rows `d i v`, `a i j v`, `b j v`, `theta v`)
/// after verifying its checksum.
fn parse_tableau(text: &str, expected_sha: &str, name: &str, two_step: bool) -> Result<Tableau> {
    let digest = sha256_hex(text);
    if digest != expected_sha {
        return Err(Error::CorruptData(format!(
            "tableau data for '{name}' failed its checksum (got {digest})"
        )));
    }

    let mut d_entries: Vec<(usize, f64)> = Vec::new();
    let mut a_entries: Vec<(usize, usize, f64)> = Vec::new();
    let mut b_entries: Vec<(usize, f64)> = Vec::new();
    let mut theta: Option<f64> = None;

    let bad = |line: &str| Error::CorruptData(format!("tableau '{name}': malformed row '{line}'"));
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["d", i, v] => d_entries.push((
                i.parse().map_err(|_| bad(line))?,
                v.parse().map_err(|_| bad(line))?,
            )),
            ["a", i, j, v] => a_entries.push((
                i.parse().map_err(|_| bad(line))?,
                j.parse().map_err(|_| bad(line))?,
                v.parse().map_err(|_| bad(line))?,
            )),
            ["b", j, v] => b_entries.push((
                j.parse().map_err(|_| bad(line))?,
                v.parse().map_err(|_| bad(line))?,
            )),
            ["theta", v] => theta = Some(v.parse().map_err(|_| bad(line))?),
            _ => return Err(bad(line)),
        }
    }

    let s = b_entries.len();
    if s == 0 {
        return Err(Error::CorruptData(format!("tableau '{name}' has no weights")));
    }
    let mut b = vec![f64::NAN; s];
    for (j, v) in b_entries {
        if j >= s || !b[j].is_nan() {
            return Err(Error::CorruptData(format!(
                "tableau '{name}': bad or duplicate weight index {j}"
            )));
        }
        b[j] = v;
    }
    let mut a: Vec<Vec<f64>> = (0..s).map(|i| vec![f64::NAN; i]).collect();
    for (i, j, v) in a_entries {
        if i >= s || j >= i || !a[i][j].is_nan() {
            return Err(Error::CorruptData(format!(
                "tableau '{name}': bad or duplicate stage coefficient ({i},{j})"
            )));
        }
        a[i][j] = v;
    }
    if a.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::CorruptData(format!(
            "tableau '{name}' is missing stage coefficients"
        )));
    }
    let mut d = vec![0.0; s];
    if two_step {
        let mut seen = vec![false; s];
        for (i, v) in d_entries {
            if i >= s || seen[i] {
                return Err(Error::CorruptData(format!(
                    "tableau '{name}': bad or duplicate history weight {i}"
                )));
            }
            seen[i] = true;
            d[i] = v;
        }
        if !seen.iter().all(|&x| x) {
            return Err(Error::CorruptData(format!(
                "tableau '{name}' is missing history weights"
            )));
        }
    } else if !d_entries.is_empty() || theta.is_some() {
        return Err(Error::CorruptData(format!(
            "tableau '{name}' carries two-step rows but describes a one-step method"
        )));
    }
    let theta = if two_step {
        theta.ok_or_else(|| Error::CorruptData(format!("tableau '{name}' is missing theta")))?
    } else {
        0.0
    };
    Ok(Tableau { d, a, b, theta })
}

/// One forward Euler step `u + τ·L(u)`.
pub fn euler_step<F>(state: &CellAverages, tau: f64, rhs: &mut F) -> Result<CellAverages>
where
    F: FnMut(&CellAverages) -> Result<Vec<f64>>,
{
    check_tau(tau)?;
    let k = rhs(state)?;
    if k.len() != state.values.len() {
        return Err(invalid_input!(
            "right-hand side returned {} entries for {} cells",
            k.len(),
            state.values.len()
        ));
    }
    let values = state
        .values
        .iter()
        .zip(&k)
        .map(|(u, f)| u + tau * f)
        .collect();
    Ok(CellAverages::new(values, state.time + tau))
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(invalid_input!("time step must be positive, got {tau}"));
    }
    Ok(())
}

/// One step of an explicit one-step Runge-Kutta method.
pub fn rk_step<F>(
    state: &CellAverages,
    tau: f64,
    rhs: &mut F,
    spec: &IntegratorSpec,
) -> Result<CellAverages>
where
    F: FnMut(&CellAverages) -> Result<Vec<f64>>,
{
    if spec.two_step {
        return Err(invalid_input!(
            "'{}' is a two-step method; use the two-step update",
            spec.method.as_str()
        ));
    }
    check_tau(tau)?;
    let tab = &spec.tableau;
    let s = tab.stages();
    let c = tab.abscissae();
    let n = state.values.len();
    let mut ks: Vec<Vec<f64>> = Vec::with_capacity(s);
    for i in 0..s {
        let mut y = state.values.clone();
        for (j, kj) in ks.iter().enumerate() {
            let aij = tab.a[i][j];
            if aij != 0.0 {
                for (yv, kv) in y.iter_mut().zip(kj) {
                    *yv += tau * aij * kv;
                }
            }
        }
        let stage = CellAverages::new(y, state.time + c[i] * tau);
        let k = rhs(&stage)?;
        if k.len() != n {
            return Err(invalid_input!(
                "right-hand side returned {} entries for {} cells",
                k.len(),
                n
            ));
        }
        ks.push(k);
    }
    let mut out = state.values.clone();
    for (j, kj) in ks.iter().enumerate() {
        let bj = tab.b[j];
        if bj != 0.0 {
            for (ov, kv) in out.iter_mut().zip(kj) {
                *ov += tau * bj * kv;
            }
        }
    }
    Ok(CellAverages::new(out, state.time + tau))
}

/// One step of an explicit two-step Runge-Kutta method.
///
/// `prev` and `curr` must be consecutive solution values at spacing exactly
/// `tau` (up to roundoff); anything else is rejected, because the tableau
/// encodes that spacing in its order conditions.
pub fn tsrk_step<F>(
    prev: &CellAverages,
    curr: &CellAverages,
    tau: f64,
    rhs: &mut F,
    spec: &IntegratorSpec,
) -> Result<CellAverages>
where
    F: FnMut(&CellAverages) -> Result<Vec<f64>>,
{
    if !spec.two_step {
        return Err(invalid_input!(
            "'{}' is a one-step method; use the one-step update",
            spec.method.as_str()
        ));
    }
    check_tau(tau)?;
    let n = curr.values.len();
    if prev.values.len() != n {
        return Err(invalid_input!(
            "two-step update needs states of equal size, got {} and {}",
            prev.values.len(),
            n
        ));
    }
    let spacing = curr.time - prev.time;
    if (spacing - tau).abs() > 1e-9 * tau + 1e-14 {
        return Err(invalid_input!(
            "two-step update needs consecutive states at spacing {tau}, got {spacing}"
        ));
    }
    let tab = &spec.tableau;
    let s = tab.stages();
    let c = tab.abscissae();
    let mut ks: Vec<Vec<f64>> = Vec::with_capacity(s);
    for i in 0..s {
        let di = tab.d[i];
        // difference form of d·u⁻ + (1 − d)·u: exact when the states agree
        let mut y: Vec<f64> = prev
            .values
            .iter()
            .zip(&curr.values)
            .map(|(up, uc)| uc + di * (up - uc))
            .collect();
        for (j, kj) in ks.iter().enumerate() {
            let aij = tab.a[i][j];
            if aij != 0.0 {
                for (yv, kv) in y.iter_mut().zip(kj) {
                    *yv += tau * aij * kv;
                }
            }
        }
        let stage = CellAverages::new(y, curr.time + c[i] * tau);
        let k = rhs(&stage)?;
        if k.len() != n {
            return Err(invalid_input!(
                "right-hand side returned {} entries for {} cells",
                k.len(),
                n
            ));
        }
        ks.push(k);
    }
    let mut out: Vec<f64> = prev
        .values
        .iter()
        .zip(&curr.values)
        .map(|(up, uc)| uc + tab.theta * (up - uc))
        .collect();
    for (j, kj) in ks.iter().enumerate() {
        let bj = tab.b[j];
        if bj != 0.0 {
            for (ov, kv) in out.iter_mut().zip(kj) {
                *ov += tau * bj * kv;
            }
        }
    }
    Ok(CellAverages::new(out, curr.time + tau))
}

/// Number of equal sub-steps for covering `span` with steps of at most
/// `step_max`, robust to `span/step_max` sitting a hair above an integer.
fn step_count(span: f64, step_max: f64) -> usize {
    let ratio = span / step_max;
    let n = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
        ratio.round()
    } else {
        ratio.ceil()
    };
    (n as usize).max(1)
}

/// Advance one full step of size `tau` using `⌈tau/sub_tau⌉` equal sub-steps
/// of the five-stage fourth-order SSP method.
///
/// Two-step methods have no history at `t = 0`; this computes the first
/// step for them. Reducing `sub_tau` below `tau` pushes the bootstrap error
/// below the main method's accuracy where needed.
pub fn bootstrap_first_step<F>(
    state0: &CellAverages,
    tau: f64,
    rhs: &mut F,
    sub_tau: f64,
) -> Result<CellAverages>
where
    F: FnMut(&CellAverages) -> Result<Vec<f64>>,
{
    check_tau(tau)?;
    if !(sub_tau > 0.0) || sub_tau > tau * (1.0 + 1e-12) {
        return Err(invalid_input!(
            "bootstrap sub-step must lie in (0, tau], got {sub_tau} with tau = {tau}"
        ));
    }
    let spec = IntegratorSpec::from_id("ssprk54")?;
    let n_sub = step_count(tau, sub_tau);
    let dt = tau / n_sub as f64;
    let mut state = state0.clone();
    for _ in 0..n_sub {
        state = rk_step(&state, dt, rhs, &spec)?;
    }
    state.time = state0.time + tau;
    Ok(state)
}

/// Outcome of a full integration run.
///
/// `min_seen`/`max_seen` fold the cell averages of the initial state and of
/// every accepted step, which is what a maximum-principle audit needs.
#[derive(Debug, Clone)]
pub struct IntegrationResult {
    pub state: CellAverages,
    pub min_seen: f64,
    pub max_seen: f64,
    pub steps: usize,
    pub tau: f64,
}

/// Integrate from `state0` to time `t_final` with a constant step.
///
/// The step is `(t_final − t0) / n` with the smallest `n` keeping it at most
/// `tau_max`; a constant step is required because two-step methods encode
/// the spacing in their coefficients. Two-step methods bootstrap their first
/// step with the fourth-order SSP method using sub-steps of at most
/// `bootstrap_sub_tau` (one whole step if `None`).
pub fn integrate_to<F>(
    state0: &CellAverages,
    t_final: f64,
    tau_max: f64,
    rhs: &mut F,
    spec: &IntegratorSpec,
    bootstrap_sub_tau: Option<f64>,
) -> Result<IntegrationResult>
where
    F: FnMut(&CellAverages) -> Result<Vec<f64>>,
{
    let span = t_final - state0.time;
    if !(span > 0.0) || !span.is_finite() {
        return Err(invalid_input!(
            "final time {t_final} must lie after the state time {}",
            state0.time
        ));
    }
    check_tau(tau_max)?;
    let n_steps = step_count(span, tau_max);
    let tau = span / n_steps as f64;
    let t0 = state0.time;
    let time_at = |i: usize| {
        if i == n_steps {
            t_final
        } else {
            t0 + i as f64 * tau
        }
    };

    let mut min_seen = f64::INFINITY;
    let mut max_seen = f64::NEG_INFINITY;
    let mut fold = |values: &[f64]| {
        for &v in values {
            min_seen = min_seen.min(v);
            max_seen = max_seen.max(v);
        }
    };
    fold(&state0.values);

    let final_state = if spec.two_step {
        let sub = match bootstrap_sub_tau {
            Some(v) => v.min(tau),
            None => tau,
        };
        let mut curr = bootstrap_first_step(state0, tau, rhs, sub)?;
        curr.time = time_at(1);
        fold(&curr.values);
        let mut prev = state0.clone();
        for i in 1..n_steps {
            let mut next = tsrk_step(&prev, &curr, tau, rhs, spec)?;
            next.time = time_at(i + 1);
            fold(&next.values);
            prev = curr;
            curr = next;
        }
        curr
    } else {
        let mut curr = state0.clone();
        for i in 0..n_steps {
            curr = rk_step(&curr, tau, rhs, spec)?;
            curr.time = time_at(i + 1);
            fold(&curr.values);
        }
        curr
    };

    Ok(IntegrationResult {
        state: final_state,
        min_seen,
        max_seen,
        steps: n_steps,
        tau,
    })
}
