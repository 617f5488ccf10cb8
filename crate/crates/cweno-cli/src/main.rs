//! Command-line front-end for the non-local conservation-law solver.
//!
//! Three subcommands cover the standard workflows:
//!
//! * `run` — a single experiment; writes a plot-ready `solution_<n>.dat`,
//! * `converge` — a mesh-refinement family against a reference solution;
//!   writes `table.csv` plus one snapshot per member,
//! * `audit` — a bound-preservation run; writes `audit.txt` with the global
//!   extrema and violation flags.
//!
//! Every flag can also be supplied through `--config <file>` as flat
//! `key=value` lines (keys named like the long flags); explicit flags
//! override the file. Outputs are written atomically (tempfile + rename).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cweno::harness::{
    audit_text, bound_preserving_integrator, convergence_integrator, convergence_rows,
    convergence_table_csv, error_norms, maxprinciple_audit, refinement_index_for, run_experiment,
    snapshot_text, table_mesh, InitialProfile, RunConfig, RunResult, StepRule,
};
use cweno::limiter::BoundPair;
use cweno::model::{sedimentation_model, traffic_model};
use cweno::spatial::LimiterMode;
use cweno::timestep::MethodId;
use cweno::{Boundary, CellAverages, Grid};

#[derive(Parser)]
#[command(
    name = "cweno",
    about = "Finite-volume solver for 1D scalar non-local conservation laws",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment and write a solution snapshot
    Run(CommonOpts),
    /// Run a mesh-refinement family and write a convergence table
    Converge(CommonOpts),
    /// Run with min/max tracking and write a bound-preservation report
    Audit(CommonOpts),
}

#[derive(Args, Debug, Default, Clone)]
struct CommonOpts {
    /// Flat key=value config file mirroring the flags; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model: traffic | sedimentation
    #[arg(long)]
    model: Option<String>,
    /// Traffic kernel id (1 linear, 2 quartic-decay, 3 quadratic-decay);
    /// ignored by the sedimentation model
    #[arg(long)]
    kernel: Option<u8>,
    /// Kernel support radius η
    #[arg(long)]
    eta: Option<f64>,
    /// Scheme order: 3 | 5 | 7
    #[arg(long)]
    scheme: Option<u32>,
    /// Integrator: euler | tvdrk3 | rk5 | rk7 | tsrk5 | tsrk7 | ssprk54
    #[arg(long)]
    integrator: Option<String>,
    /// Mesh spacing (must divide the domain); exclusive with --n
    #[arg(long)]
    h: Option<f64>,
    /// Refinement index, h = (1/20)·2^-n; for `converge` the finest index
    #[arg(long)]
    n: Option<u32>,
    /// Final time
    #[arg(long = "T")]
    t_final: Option<f64>,
    /// Scaling limiter: on | off
    #[arg(long)]
    limiter: Option<String>,
    /// Safety factor on the step-size rule
    #[arg(long)]
    safety: Option<f64>,
    /// Solution bounds: auto | <lo>,<hi>
    #[arg(long)]
    bounds: Option<String>,
    /// Reference for error norms: auto | <path to a snapshot>
    #[arg(long = "ref")]
    reference: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Initial data: riemann | sine | bump | plateau | constant:<v>
    #[arg(long)]
    profile: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Single,
    Converge,
    Audit,
}

/// Everything a subcommand needs after merging defaults, config and flags.
struct Resolved {
    config: RunConfig,
    /// Finest refinement index of a convergence family.
    n_max: u32,
    reference: RefSource,
    out_dir: PathBuf,
}

enum RefSource {
    Auto,
    Path(PathBuf),
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(opts) => cmd_run(&opts),
        Command::Converge(opts) => cmd_converge(&opts),
        Command::Audit(opts) => cmd_audit(&opts),
    }
}

// ---------------------------------------------------------------------------
// option merging

fn load_config_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), lineno + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Merge flags over config-file entries; flags win.
fn merged(opts: &CommonOpts) -> Result<CommonOpts> {
    let mut out = opts.clone();
    let Some(path) = &opts.config else {
        return Ok(out);
    };
    let file = load_config_file(path)?;
    let known = [
        "model",
        "kernel",
        "eta",
        "scheme",
        "integrator",
        "h",
        "n",
        "T",
        "limiter",
        "safety",
        "bounds",
        "ref",
        "out",
        "profile",
    ];
    for key in file.keys() {
        if !known.contains(&key.as_str()) {
            bail!("config file {}: unknown key '{key}'", path.display());
        }
    }
    fn parse_into<T: std::str::FromStr>(
        slot: &mut Option<T>,
        file: &HashMap<String, String>,
        key: &str,
    ) -> Result<()>
    where
        T::Err: std::fmt::Display,
    {
        if slot.is_none() {
            if let Some(v) = file.get(key) {
                *slot = Some(
                    v.parse()
                        .map_err(|e| anyhow!("config key '{key}': {e}"))?,
                );
            }
        }
        Ok(())
    }
    parse_into(&mut out.model, &file, "model")?;
    parse_into(&mut out.kernel, &file, "kernel")?;
    parse_into(&mut out.eta, &file, "eta")?;
    parse_into(&mut out.scheme, &file, "scheme")?;
    parse_into(&mut out.integrator, &file, "integrator")?;
    parse_into(&mut out.h, &file, "h")?;
    parse_into(&mut out.n, &file, "n")?;
    parse_into(&mut out.t_final, &file, "T")?;
    parse_into(&mut out.limiter, &file, "limiter")?;
    parse_into(&mut out.safety, &file, "safety")?;
    parse_into(&mut out.bounds, &file, "bounds")?;
    parse_into(&mut out.reference, &file, "ref")?;
    parse_into(&mut out.out, &file, "out")?;
    parse_into(&mut out.profile, &file, "profile")?;
    Ok(out)
}

fn resolve(kind: Kind, raw: &CommonOpts) -> Result<Resolved> {
    let opts = merged(raw)?;

    let model_id = opts.model.as_deref().unwrap_or("traffic");
    let g = match opts.scheme.unwrap_or(3) {
        3 => 1,
        5 => 2,
        7 => 3,
        other => bail!("--scheme must be 3, 5 or 7, got {other}"),
    };

    // model-and-subcommand defaults mirror the standard experiments
    let (default_profile, default_eta, default_t, default_kernel) = match (model_id, kind) {
        ("traffic", Kind::Audit) => (InitialProfile::SmoothPlateau, 0.05, 0.05, 3),
        ("traffic", _) => (InitialProfile::SineWave, 0.2, 0.15, 1),
        ("sedimentation", _) => (InitialProfile::SineBump, 0.05, 0.04, 1),
        (other, _) => bail!("--model must be traffic or sedimentation, got '{other}'"),
    };

    let profile = match &opts.profile {
        Some(id) => InitialProfile::parse(id)?,
        None => default_profile,
    };
    let eta = opts.eta.unwrap_or(default_eta);
    let t_final = opts.t_final.unwrap_or(default_t);
    let kernel = opts.kernel.unwrap_or(default_kernel);

    let model = match model_id {
        "traffic" => traffic_model(kernel, eta)?,
        _ => sedimentation_model(eta)?,
    };

    // the Riemann and sine profiles live on [−1, 1]; the rest on [0, 1]
    let (x0, x1) = match profile {
        InitialProfile::RiemannPlateau | InitialProfile::SineWave => (-1.0, 1.0),
        _ => (0.0, 1.0),
    };
    let boundary = match model_id {
        "traffic" => Boundary::Periodic,
        _ => Boundary::Constant(0.0),
    };

    let n_default = if kind == Kind::Converge { 3 } else { 2 };
    let (h, n_max) = match (opts.h, opts.n) {
        (Some(_), Some(_)) => bail!("--h and --n are mutually exclusive"),
        (Some(h), None) => {
            if kind == Kind::Converge {
                bail!("converge builds its family from --n; --h is not accepted");
            }
            (h, 0)
        }
        (None, Some(n)) => (table_mesh(n), n),
        (None, None) => (table_mesh(n_default), n_default),
    };
    let grid = Grid::with_spacing(x0, x1, h, boundary)?;

    let limiter = match opts
        .limiter
        .as_deref()
        .unwrap_or(if kind == Kind::Audit { "on" } else { "off" })
    {
        "on" => LimiterMode::On,
        "off" => LimiterMode::Off,
        other => bail!("--limiter must be on or off, got '{other}'"),
    };

    let integrator = match &opts.integrator {
        Some(id) => MethodId::parse(id)?,
        None if kind == Kind::Audit => bound_preserving_integrator(g)?,
        None => convergence_integrator(g)?,
    };

    let step_rule = if kind == Kind::Audit {
        StepRule::BoundPreserving
    } else if model_id == "traffic" {
        StepRule::TrafficConvergence
    } else {
        StepRule::SedimentationConvergence
    };

    let bounds = match opts.bounds.as_deref() {
        None | Some("auto") => None,
        Some(pair) => {
            let (lo, hi) = pair
                .split_once(',')
                .ok_or_else(|| anyhow!("--bounds expects auto or <lo>,<hi>, got '{pair}'"))?;
            Some(BoundPair::new(
                lo.trim().parse().context("--bounds lower value")?,
                hi.trim().parse().context("--bounds upper value")?,
            )?)
        }
    };

    let reference = match opts.reference.as_deref() {
        None | Some("auto") => RefSource::Auto,
        Some(path) => RefSource::Path(PathBuf::from(path)),
    };

    let config = RunConfig {
        model,
        g,
        integrator,
        grid,
        t_final,
        limiter,
        safety: opts.safety.unwrap_or(0.9),
        step_rule,
        profile,
        bounds,
        refinement_index: refinement_index_for(h),
    };
    config.validate()?;

    Ok(Resolved {
        config,
        n_max,
        reference,
        out_dir: opts.out.unwrap_or_else(|| PathBuf::from("out")),
    })
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_run(opts: &CommonOpts) -> Result<()> {
    let resolved = resolve(Kind::Single, opts)?;
    let result = run_experiment(&resolved.config)?;
    let path = write_snapshot(&resolved.out_dir, &resolved.config, &result)?;
    println!(
        "run: {} cells, {} steps of τ = {:.6e}, range seen [{:.6e}, {:.6e}]",
        result.grid.n_cells, result.steps, result.tau, result.min_seen, result.max_seen
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_audit(opts: &CommonOpts) -> Result<()> {
    let resolved = resolve(Kind::Audit, opts)?;
    let result = run_experiment(&resolved.config)?;
    let report = maxprinciple_audit(result.min_seen, result.max_seen, &result.bounds);
    let text = audit_text(&report);
    write_atomic(&resolved.out_dir.join("audit.txt"), text.as_bytes())?;
    let snapshot = write_snapshot(&resolved.out_dir, &resolved.config, &result)?;
    print!("{text}");
    println!("wrote {}", resolved.out_dir.join("audit.txt").display());
    println!("wrote {}", snapshot.display());
    if report.flagged {
        std::process::exit(3);
    }
    Ok(())
}

fn cmd_converge(opts: &CommonOpts) -> Result<()> {
    let resolved = resolve(Kind::Converge, opts)?;
    let base = &resolved.config;

    // reference: an explicit snapshot file, or a seven-point run two
    // refinement levels past the finest family member
    let (ref_state, ref_grid) = match &resolved.reference {
        RefSource::Path(path) => load_reference(path, base)?,
        RefSource::Auto => {
            let ref_cfg = cweno::harness::reference_config(base, resolved.n_max + 2)?;
            eprintln!(
                "computing reference: {} cells, seven-point scheme",
                ref_cfg.grid.n_cells
            );
            let run = run_experiment(&ref_cfg)?;
            (run.state, ref_cfg.grid)
        }
    };

    let mut samples = Vec::new();
    for n in 0..=resolved.n_max {
        let mut member = base.clone();
        member.grid = Grid::with_spacing(
            base.grid.x0,
            base.grid.x1(),
            table_mesh(n),
            base.grid.boundary,
        )?;
        member.refinement_index = n as f64;
        let result = run_experiment(&member)?;
        let (l1, linf) = error_norms(&result.state, &member.grid, &ref_state, &ref_grid)?;
        samples.push((n, member.grid.h, l1, linf));
        write_snapshot(&resolved.out_dir, &member, &result)?;
        eprintln!("n = {n}: {} cells, {} steps", member.grid.n_cells, result.steps);
    }

    let rows = convergence_rows(&samples);
    let csv = convergence_table_csv(&rows);
    write_atomic(&resolved.out_dir.join("table.csv"), csv.as_bytes())?;

    // human-readable table on stdout
    let mut table = String::new();
    writeln!(table, "{:>3} {:>12} {:>6} {:>12} {:>6}", "n", "L1", "rate", "Linf", "rate")?;
    for row in &rows {
        let fmt_rate =
            |r: Option<f64>| r.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        writeln!(
            table,
            "{:>3} {:>12} {:>6} {:>12} {:>6}",
            row.n,
            cweno::harness::format_sci(row.l1),
            fmt_rate(row.l1_rate),
            cweno::harness::format_sci(row.linf),
            fmt_rate(row.linf_rate),
        )?;
    }
    print!("{table}");
    println!("wrote {}", resolved.out_dir.join("table.csv").display());
    Ok(())
}

// ---------------------------------------------------------------------------
// input/output helpers

/// Snapshot file name: the refinement index when it is integral, otherwise
/// the cell count.
fn snapshot_name(config: &RunConfig) -> String {
    let n = config.refinement_index;
    if (n - n.round()).abs() < 1e-9 && n >= 0.0 {
        format!("solution_{}.dat", n.round() as i64)
    } else {
        format!("solution_c{}.dat", config.grid.n_cells)
    }
}

fn write_snapshot(dir: &Path, config: &RunConfig, result: &RunResult) -> Result<PathBuf> {
    let path = dir.join(snapshot_name(config));
    let text = snapshot_text(&result.grid, &result.state);
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// Write through a temporary sibling then rename, so readers never observe
/// a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move {} into place", path.display()))?;
    Ok(())
}

/// Load a reference snapshot (two whitespace-separated columns: cell center,
/// cell average) and reconstruct its grid on the family's domain.
fn load_reference(path: &Path, base: &RunConfig) -> Result<(CellAverages, Grid)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read reference {}", path.display()))?;
    let mut values = Vec::new();
    let mut centers = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split_whitespace();
        let (Some(x), Some(v)) = (cols.next(), cols.next()) else {
            bail!("{}:{}: expected two columns", path.display(), lineno + 1);
        };
        centers.push(x.parse::<f64>().context("reference x column")?);
        values.push(v.parse::<f64>().context("reference value column")?);
    }
    if values.is_empty() {
        bail!("reference {} is empty", path.display());
    }
    let grid = Grid::new(
        base.grid.x0,
        base.grid.x1(),
        values.len(),
        base.grid.boundary,
    )?;
    // sanity: the snapshot's first center must sit at x0 + h/2
    let expect = grid.cell_center(0);
    if (centers[0] - expect).abs() > 1e-9 * grid.length().abs().max(1.0) {
        bail!(
            "reference {} does not cover the family domain (first center {} vs expected {})",
            path.display(),
            centers[0],
            expect
        );
    }
    Ok((CellAverages::new(values, base.t_final), grid))
}
