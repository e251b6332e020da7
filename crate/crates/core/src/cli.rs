//! The `chaoscope` command line.
//!
//! Exit codes: 0 success, 1 a supplied reference was not reached,
//! 2 usage/config/input error, 3 numeric divergence guard.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::analysis::{
    basin_invariance_check, basin_probe, reference_trajectory, tail_convergence, BasinVerdict,
    ConvergenceReport, ProbeBudget,
};
use crate::chaos::{run_chaos_game, tail_cloud, ChaosRng, Trace, RNG_ALGORITHM, DECAYING_WARNING};
use crate::config::{resolve_system, KeyLines, ReferenceChoice, ResolvedRun, RunConfig};
use crate::error::{Error, Result};
use crate::gallery::{GalleryEntry, ReferenceKind};
use crate::render::{encode_pgm, encode_pgm_ascii, rasterize, Viewport};
use crate::sets::{push_coords, PointCloud};
use crate::spaces::{SpaceModel, SpacePoint, DEFAULT_CHART_THRESHOLD};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

/// Default-seed override; an explicit `--seed` or config seed wins.
pub const SEED_ENV: &str = "CHAOSCOPE_SEED";

#[derive(Debug, Parser)]
#[command(name = "chaoscope", version, about = "Chaos game and attractor diagnostics for iterated function systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a chaos game, write its trace and a convergence report.
    Run(RunArgs),
    /// Iterate the Hutchinson operator to a deterministic attractor cloud.
    Oracle(OracleArgs),
    /// Rasterize a cloud or trace file to PGM.
    Render(RenderArgs),
    /// Probe pointwise basins of attraction.
    Basin(BasinArgs),
}

/// Comma- or space-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords(pub Vec<f64>);

fn parse_reals(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: {t:?}")))
        .collect()
}

fn parse_coords_arg(s: &str) -> std::result::Result<Coords, String> {
    let v = parse_reals(s)?;
    if v.is_empty() {
        return Err("no coordinates given".into());
    }
    Ok(Coords(v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ladder(pub Vec<usize>);

fn parse_ladder_arg(s: &str) -> std::result::Result<Ladder, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("not a step count: {t:?}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(Ladder)
}

fn parse_range_arg(s: &str) -> std::result::Result<(f64, f64), String> {
    match parse_reals(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(format!("expected `lo,hi`, got {s:?}")),
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML run file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Gallery name or system-file path.
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_coords_arg)]
    pub x0: Option<Coords>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Selection model descriptor, e.g. `iid:0.5,0.25,0.25` or `markov:…/…@0.1`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Burn-in ladder, e.g. `0,100,1000`.
    #[arg(long, value_parser = parse_ladder_arg)]
    pub ladder: Option<Ladder>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// `none`, `oracle`, `cross-seed` or a cloud file.
    #[arg(long)]
    pub reference: Option<String>,
    /// Seed of the second orbit for `--reference cross-seed` (default seed+1).
    #[arg(long)]
    pub cross_seed: Option<u64>,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    /// Write the report as one JSON record.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Cauchy tolerance between successive iterates.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Start from this point instead of the system's default.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_coords_arg)]
    pub from_point: Option<Coords>,
    /// Cloud output (default `<system>.cloud`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Cloud or trace file.
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 800)]
    pub width: usize,
    #[arg(long, default_value_t = 800)]
    pub height: usize,
    /// Fixed x range `lo,hi` (requires `--y-range`); percentile autoscale otherwise.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range_arg)]
    pub x_range: Option<(f64, f64)>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range_arg)]
    pub y_range: Option<(f64, f64)>,
    /// Orbit points to skip (traces only).
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
    /// Projective points with `|z|` at or below this are dropped.
    #[arg(long, default_value_t = DEFAULT_CHART_THRESHOLD)]
    pub chart_threshold: f64,
    /// Plain-text P2 instead of binary P5.
    #[arg(long)]
    pub ascii: bool,
}

#[derive(Debug, Args)]
pub struct BasinArgs {
    #[arg(long)]
    pub system: String,
    /// Grid `x0,x1,y0,y1,nx,ny` (planar spaces) or `a,b,n` (circle, line).
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// File with one probe point per line (or a cloud file).
    #[arg(long)]
    pub probes: Option<PathBuf>,
    /// Number of random unit-norm probes.
    #[arg(long)]
    pub random_unit: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Reference cloud file (default: the system's own reference).
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Also check that images of attracted probes are attracted.
    #[arg(long)]
    pub invariance: bool,
    /// Verdict table output (default stdout only).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Oracle(a) => cmd_oracle(a, out),
        Command::Render(a) => cmd_render(a, out, err),
        Command::Basin(a) => cmd_basin(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Diverged { .. } => EXIT_DIVERGED,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if jobs == 0 {
        return Err(Error::Input("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Input(format!("cannot start {jobs} worker threads: {e}")))?
        .install(f)
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Input(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn fmt_coords(c: &[f64]) -> String {
    let mut s = String::new();
    push_coords(&mut s, c);
    s
}

/// The system's own reference cloud. Systems without an independent ground
/// truth fall back to the deterministic oracle.
fn system_reference(entry: &GalleryEntry, eps: f64) -> Result<(PointCloud, String)> {
    let d = &entry.defaults;
    if let ReferenceKind::Oracle | ReferenceKind::CrossSeed = entry.reference {
        let oracle_tol = if eps == d.eps { d.oracle_tol } else { d.oracle_tol.max(2.0 * eps) };
        let (cloud, report) = entry.oracle_with(eps, oracle_tol, d.max_iter)?;
        let desc = format!(
            "deterministic-oracle eps={eps} tol={oracle_tol} iterations={} converged={}",
            report.ladder.len(),
            report.converged
        );
        return Ok((cloud, desc));
    }
    Ok(entry.static_reference()?.expect("non-oracle references are static"))
}

fn cmd_run(a: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (file_cfg, mut lines) = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => (RunConfig::default(), KeyLines::default()),
    };
    let flags = RunConfig {
        system: a.system.clone().unwrap_or_default(),
        x0: a.x0.clone().map(|c| c.0),
        steps: a.steps,
        model: a.model.clone(),
        seed: a.seed,
        ladder: a.ladder.clone().map(|l| l.0),
        eps: a.eps,
        tol: a.tol,
        reference: a.reference.clone(),
        cross_seed: a.cross_seed,
        trace_out: a.trace_out.clone(),
        report_out: a.report_out.clone(),
    };
    for (key, set) in [
        ("system", a.system.is_some()),
        ("x0", a.x0.is_some()),
        ("steps", a.steps.is_some()),
        ("model", a.model.is_some()),
        ("seed", a.seed.is_some()),
        ("ladder", a.ladder.is_some()),
        ("eps", a.eps.is_some()),
        ("tol", a.tol.is_some()),
        ("reference", a.reference.is_some()),
    ] {
        if set {
            lines.override_key(key);
        }
    }
    let mut cfg = flags.or(file_cfg);
    if cfg.seed.is_none() {
        cfg.seed = env_seed()?;
    }
    let run = cfg.resolve(&lines)?;
    let jobs = a.jobs;
    let json = a.json;
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = with_jobs(jobs, || execute_run(&run, json, &mut o, &mut e));
    let _ = err.write_all(&e);
    let _ = out.write_all(&o);
    code
}

fn execute_run(run: &ResolvedRun, json: bool, out: &mut Vec<u8>, err: &mut Vec<u8>) -> Result<i32> {
    let sys = &run.entry.system;
    if run.model.is_experimental() {
        let _ = writeln!(err, "warning: {DECAYING_WARNING}");
    }
    let orbit = run_chaos_game(sys, &run.x0, run.steps, &run.model, run.seed)?;
    write_file(&run.trace_out, orbit.to_trace().as_bytes())?;

    let reference = match &run.reference {
        ReferenceChoice::None => None,
        ReferenceChoice::Oracle => Some(system_reference(&run.entry, run.eps)?),
        ReferenceChoice::CrossSeed => {
            let burn_in = *run.ladder.last().unwrap_or(&0);
            let other = run_chaos_game(sys, &run.x0, run.steps, &run.model, run.cross_seed)?;
            Some((
                tail_cloud(&other, burn_in)?,
                format!("cross-seed seed={} burn_in={burn_in}", run.cross_seed),
            ))
        }
        ReferenceChoice::File(p) => {
            let cloud = PointCloud::from_text(&read_file(p)?, &p.display().to_string())?;
            Some((cloud, format!("file {}", p.display())))
        }
    };
    let report = match &reference {
        Some((cloud, desc)) => Some(tail_convergence(&orbit, cloud, &run.ladder, run.tol, desc)?),
        None => None,
    };

    let text = if json {
        let record = serde_json::json!({
            "command": "run",
            "system": run.entry.name,
            "space": run.entry.system.space.to_string(),
            "seed": run.seed,
            "rng": RNG_ALGORITHM,
            "model": run.model.to_string(),
            "steps": run.steps,
            "x0": run.x0.coords(),
            "trace": run.trace_out.display().to_string(),
            "report": report,
        });
        format!("{record}\n")
    } else {
        let mut s = format!(
            "command = run\nsystem = {}\nspace = {}\nseed = {}\nrng = {RNG_ALGORITHM}\nmodel = {}\nsteps = {}\nx0 = {}\ntrace = {}\n",
            run.entry.name,
            run.entry.system.space,
            run.seed,
            run.model,
            run.steps,
            fmt_coords(run.x0.coords()),
            run.trace_out.display()
        );
        match &report {
            Some(r) => s.push_str(&r.to_kv()),
            None => s.push_str("reference = none\n"),
        }
        s
    };
    write_file(&run.report_out, text.as_bytes())?;
    let _ = out.write_all(text.as_bytes());
    Ok(match report {
        Some(r) if !r.converged => EXIT_NOT_CONVERGED,
        _ => EXIT_OK,
    })
}

fn cmd_oracle(a: OracleArgs, out: &mut dyn Write) -> Result<i32> {
    let entry = resolve_system(&a.system)?;
    let d = entry.defaults.clone();
    let eps = a.eps.unwrap_or(d.eps);
    let tol = a.tol.unwrap_or(d.oracle_tol);
    let max_iter = a.max_iter.unwrap_or(d.max_iter);
    let start = match &a.from_point {
        Some(c) => PointCloud::singleton(entry.system.space, entry.system.point(&c.0)?)?,
        None => entry.start_cloud()?,
    };
    let stem = entry.name.replace(['/', '\\'], "_");
    let cloud_path = a.out.clone().unwrap_or_else(|| format!("{stem}.cloud").into());
    let report_path = a.report_out.clone().unwrap_or_else(|| format!("{stem}.oracle.report").into());

    let (cloud, report, limit) = with_jobs(a.jobs, || {
        let (cloud, report) =
            crate::ifs::deterministic_attractor(&entry.system, &start, eps, tol, max_iter)?;
        // Distance to a known limit set along the way, where there is one.
        let limit = match &entry.reference {
            ReferenceKind::Points(_) => {
                let (limit_cloud, desc) = entry.static_reference()?.expect("points are static");
                Some(reference_trajectory(
                    &entry.system,
                    &start,
                    &limit_cloud,
                    max_iter,
                    eps,
                    d.tol,
                    &desc,
                )?)
            }
            _ => None,
        };
        Ok((cloud, report, limit))
    })?;
    write_file(&cloud_path, cloud.to_text().as_bytes())?;

    let text = if a.json {
        let record = serde_json::json!({
            "command": "oracle",
            "system": entry.name,
            "eps": eps,
            "max_iter": max_iter,
            "start": start.points()[0].coords(),
            "points": cloud.len(),
            "cloud": cloud_path.display().to_string(),
            "report": report,
            "limit": limit,
        });
        format!("{record}\n")
    } else {
        let mut s = format!(
            "command = oracle\nsystem = {}\neps = {eps}\nmax_iter = {max_iter}\nstart = {}\npoints = {}\ncloud = {}\n",
            entry.name,
            fmt_coords(start.points()[0].coords()),
            cloud.len(),
            cloud_path.display()
        );
        s.push_str(&report.to_kv());
        if let Some(l) = &limit {
            s.push_str(&prefixed("limit.", l));
        }
        s
    };
    write_file(&report_path, text.as_bytes())?;
    let _ = out.write_all(text.as_bytes());
    Ok(EXIT_OK)
}

fn prefixed(prefix: &str, r: &ConvergenceReport) -> String {
    r.to_kv().lines().map(|l| format!("{prefix}{l}\n")).collect()
}

fn is_cloud_text(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with("cloud "))
}

fn cmd_render(a: RenderArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let text = read_file(&a.input)?;
    let name = a.input.display().to_string();
    let cloud = if is_cloud_text(&text) {
        if a.burn_in > 0 {
            return Err(Error::Input("--burn-in applies to trace input only".into()));
        }
        PointCloud::from_text(&text, &name)?
    } else {
        Trace::parse(&text, &name)?.tail_cloud(a.burn_in)?
    };
    let vp = match (a.x_range, a.y_range) {
        (Some(x), Some(y)) => Viewport::fixed(x, y, a.width, a.height),
        (None, None) => Viewport::auto(a.width, a.height),
        _ => return Err(Error::Input("--x-range and --y-range go together".into())),
    };
    let r = rasterize(&cloud, &vp, a.chart_threshold)?;
    if let Some(w) = &r.warning {
        let _ = writeln!(err, "warning: {w}");
    }
    let bytes = if a.ascii { encode_pgm_ascii(&r.image) } else { encode_pgm(&r.image) };
    write_file(&a.out, &bytes)?;
    let _ = writeln!(
        out,
        "wrote {} ({}x{}): {} points, {} dropped near infinity, {} dark pixels, x in [{}, {}], y in [{}, {}]",
        a.out.display(),
        r.image.width,
        r.image.height,
        cloud.len(),
        r.dropped,
        r.image.dark_pixels(),
        r.viewport.x_range.0,
        r.viewport.x_range.1,
        r.viewport.y_range.0,
        r.viewport.y_range.1
    );
    Ok(EXIT_OK)
}

fn grid_probes(spec: &str, space: &SpaceModel) -> Result<Vec<Vec<f64>>> {
    let v = parse_reals(spec).map_err(Error::Input)?;
    let count = |n: f64| -> Result<usize> {
        if n >= 1.0 && n.fract() == 0.0 {
            Ok(n as usize)
        } else {
            Err(Error::Input(format!("grid count must be a positive integer, got {n}")))
        }
    };
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        if n == 1 {
            vec![lo]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        }
    };
    match (v.as_slice(), space.coord_len()) {
        ([a, b, n], 1) => Ok(axis(*a, *b, count(*n)?).into_iter().map(|x| vec![x]).collect()),
        ([x0, x1, y0, y1, nx, ny], 2) => {
            let xs = axis(*x0, *x1, count(*nx)?);
            let ys = axis(*y0, *y1, count(*ny)?);
            Ok(ys.iter().flat_map(|y| xs.iter().map(move |x| vec![*x, *y])).collect())
        }
        _ => Err(Error::Input(format!(
            "grid {spec:?} does not fit space {space}; use a,b,n for one coordinate or x0,x1,y0,y1,nx,ny for two"
        ))),
    }
}

fn file_probes(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    if is_cloud_text(&text) {
        let cloud = PointCloud::from_text(&text, &name)?;
        return Ok(cloud.points().iter().map(|p| p.coords().to_vec()).collect());
    }
    let mut probes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        probes.push(parse_reals(line).map_err(|m| Error::Parse {
            source_name: name.clone(),
            line: i + 1,
            message: m,
        })?);
    }
    Ok(probes)
}

/// Deterministic pseudo-random unit vectors (normalized uniform cube draws).
fn random_unit_probes(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaosRng::new(seed);
    (0..n)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 1e-3 {
                break v.into_iter().map(|c| c / norm).collect();
            }
        })
        .collect()
}

fn verdict_line(v: &BasinVerdict) -> String {
    format!("{} {} {} {}\n", fmt_coords(&v.point), v.verdict, v.k_reached, v.final_d_h)
}

fn cmd_basin(a: BasinArgs, out: &mut dyn Write) -> Result<i32> {
    let entry = resolve_system(&a.system)?;
    let space = entry.system.space;
    let mut raw = Vec::new();
    if let Some(g) = &a.grid {
        raw.extend(grid_probes(g, &space)?);
    }
    if let Some(p) = &a.probes {
        raw.extend(file_probes(p)?);
    }
    if let Some(n) = a.random_unit {
        let seed = match a.seed {
            Some(s) => s,
            None => env_seed()?.unwrap_or(0),
        };
        raw.extend(random_unit_probes(n, space.coord_len(), seed));
    }
    if raw.is_empty() {
        return Err(Error::Input("no probes: give --grid, --probes or --random-unit".into()));
    }
    let probes: Vec<SpacePoint> = raw
        .iter()
        .enumerate()
        .map(|(i, p)| entry.system.point(p).map_err(|e| Error::Input(format!("probe {i}: {e}"))))
        .collect::<Result<_>>()?;
    let d = entry.defaults.clone();
    let budget = ProbeBudget {
        k_max: a.k_max.unwrap_or(d.max_iter),
        eps: a.eps.unwrap_or(d.eps),
        tol: a.tol.unwrap_or(d.tol),
    };
    let (verdicts, invariance, desc) = with_jobs(a.jobs, || {
        let (reference, desc) = match &a.reference {
            Some(p) => (
                PointCloud::from_text(&read_file(p)?, &p.display().to_string())?,
                format!("file {}", p.display()),
            ),
            None => system_reference(&entry, budget.eps)?,
        };
        let verdicts = probes
            .par_iter()
            .map(|x| basin_probe(&entry.system, x, &reference, budget))
            .collect::<Result<Vec<_>>>()?;
        let invariance = if a.invariance {
            Some(basin_invariance_check(&entry.system, &probes, &reference, budget)?)
        } else {
            None
        };
        Ok((verdicts, invariance, desc))
    })?;

    let mut table = format!(
        "# system = {}\n# reference = {desc}\n# k_max = {} eps = {} tol = {}\n# point verdict k_reached final_d_h\n",
        entry.name, budget.k_max, budget.eps, budget.tol
    );
    for v in &verdicts {
        table.push_str(&verdict_line(v));
    }
    if let Some(p) = &a.out {
        write_file(p, table.as_bytes())?;
    }
    let _ = out.write_all(table.as_bytes());
    let count = |want: crate::analysis::Verdict| verdicts.iter().filter(|v| v.verdict == want).count();
    let _ = writeln!(
        out,
        "# summary: {} probes, {} ATTRACTED, {} NOT_ATTRACTED_WITHIN_BUDGET, {} DIVERGED",
        verdicts.len(),
        count(crate::analysis::Verdict::Attracted),
        count(crate::analysis::Verdict::NotAttractedWithinBudget),
        count(crate::analysis::Verdict::Diverged)
    );
    if let Some(s) = invariance {
        let _ = writeln!(
            out,
            "# invariance: {} attracted probes, {} images checked, {} violations",
            s.attracted,
            s.images_checked,
            s.violations.len()
        );
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_coordinate_lists() {
        assert_eq!(parse_coords_arg("0.3,0").unwrap(), Coords(vec![0.3, 0.0]));
        assert_eq!(parse_coords_arg("-1 2").unwrap(), Coords(vec![-1.0, 2.0]));
        assert!(parse_coords_arg("x").is_err());
        assert_eq!(parse_ladder_arg("0,100").unwrap(), Ladder(vec![0, 100]));
        assert!(parse_ladder_arg("0,-1").is_err());
    }

    #[test]
    fn grid_layouts() {
        let g = grid_probes("-1,2,-1,2,21,21", &SpaceModel::Euclidean { dim: 2 }).unwrap();
        assert_eq!(g.len(), 441);
        assert_eq!(g[0], vec![-1.0, -1.0]);
        assert_eq!(g[440], vec![2.0, 2.0]);
        assert_eq!(grid_probes("0,1,3", &SpaceModel::Circle).unwrap().len(), 3);
        assert!(grid_probes("0,1,3", &SpaceModel::Euclidean { dim: 2 }).is_err());
        assert!(grid_probes("0,1,0.5", &SpaceModel::Circle).is_err());
    }

    #[test]
    fn random_units_are_unit_and_seeded() {
        let a = random_unit_probes(5, 256, 3);
        assert_eq!(a, random_unit_probes(5, 256, 3));
        for v in &a {
            let n: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run_cli(["chaoscope", "run", "--system", "sierpinski", "--steps", "-5"], &mut o, &mut e), 2);
        assert_eq!(run_cli(["chaoscope", "frobnicate"], &mut o, &mut e), 2);
        assert_eq!(run_cli(["chaoscope", "--help"], &mut o, &mut e), 0);
    }
}
