// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

//! Batch front-end. Every subcommand writes one CSV artifact plus a JSON
//! manifest next to it (`<out>.json`).

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;
use twolevel::kernel::{kernel_fast, KernelSpec};
use twolevel::oracle::{self, Frame, StepControl};
use twolevel::propagator::{
    effective_hamiltonian_ks, long_time_average_series, quasienergies, transition_probability, unitary_analytic_trace,
    unitary_grid_ks, unitary_trace_grid, GridOptions, SeriesOptions,
};
use twolevel::rwa::{avg_map, rabi_map, sweep_map, Axis, Detuning, Range, SweepGrid, SweepSpec};
use twolevel::waveform::frame_unitary;
use twolevel::{gbf, presets, DriveSpec, Error, Result};

#[derive(Parser)]
#[command(name = "twolevel", version, about = "Exact propagators of periodically driven two-level systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Drive-spec JSON file or preset name.
    #[arg(long)]
    spec: String,
    /// CSV artifact path; the manifest goes to `<out>.json`.
    #[arg(long)]
    out: PathBuf,
    /// Grid points per drive period.
    #[arg(long, default_value_t = 513)]
    grid: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 40)]
    kmax: usize,
    /// Time span in drive periods.
    #[arg(long = "t-max", default_value_t = 1.0)]
    t_max: f64,
    /// Map resolution, `<n1>x<n2>`.
    #[arg(long, default_value = "81x81")]
    res: String,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = FrameArg::Rotated)]
    frame: FrameArg,
}

#[derive(Copy, Clone, ValueEnum)]
enum FrameArg {
    Lab,
    Rotated,
}

impl FrameArg {
    fn frame(self) -> Frame {
        match self {
            FrameArg::Lab => Frame::Lab,
            FrameArg::Rotated => Frame::Rotated,
        }
    }

    fn name(self) -> &'static str {
        match self {
            FrameArg::Lab => "lab",
            FrameArg::Rotated => "rotated",
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Engine {
    Series,
    Grid,
    Oracle,
}

impl Engine {
    fn name(self) -> &'static str {
        match self {
            Engine::Series => "series",
            Engine::Grid => "grid",
            Engine::Oracle => "oracle",
        }
    }
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[arg(long, default_value = "A1")]
    axis1: String,
    #[arg(long, default_value = "A2")]
    axis2: String,
    /// `lo:hi` in units of ω.
    #[arg(long, default_value = "-40:40", allow_hyphen_values = true)]
    range1: String,
    #[arg(long, default_value = "-40:40", allow_hyphen_values = true)]
    range2: String,
    #[arg(long, default_value = "carrier")]
    detuning: String,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel K(t, s) on the lower triangle of a time grid.
    Kernel {
        #[command(flatten)]
        common: Common,
    },
    /// Transition probability p(t, 0), or p(t, s) with --two-time.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Engine::Series)]
        engine: Engine,
        /// Emit the full two-time map (grid engine).
        #[arg(long)]
        two_time: bool,
    },
    /// Long-time-averaged exact transition probability over a sweep.
    ProbMap {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_enum, default_value_t = Engine::Oracle)]
        engine: Engine,
        /// Simpson panels over one period.
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// |𝒥_l| over a sweep.
    RabiMap {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
        /// Channel l; defaults to the nearest integer of −ε₀/ω.
        #[arg(long, allow_hyphen_values = true)]
        channel: Option<i64>,
    },
    /// Rotating-wave long-time average over a sweep.
    AvgMap {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Floquet quasienergies from the one-period propagator.
    Quasi {
        #[command(flatten)]
        common: Common,
    },
    /// Period-averaged Hamiltonian (rotated frame).
    Heff {
        #[command(flatten)]
        common: Common,
        /// Initial trapezoid panels.
        #[arg(long, default_value_t = 64)]
        quad: usize,
    },
    /// Series and grid engines against the time-stepping oracle.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Largest accepted series |Δp|.
        #[arg(long, default_value_t = 1e-6)]
        threshold: f64,
    },
}

struct Artifact {
    csv: String,
    spec: Value,
    knobs: Value,
    diagnostics: Value,
    /// Set when the artifact was written but the run should still fail.
    failure: Option<Error>,
}

/// Code for command-line usage errors, after the library codes.
const USAGE_CODE: i32 = 16;

fn report(code: i32, kind: &str, message: &str) -> ExitCode {
    eprintln!(
        "error: code={code} kind={kind} message={}",
        serde_json::to_string(message).unwrap_or_default()
    );
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion)
                || matches!(e.kind(), ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand)
            {
                e.exit();
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("usage error").trim_start_matches("error: ");
            return report(USAGE_CODE, "usage", first);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e.code(), e.kind(), &e.to_string()),
    }
}

/// Shortest round-trip scientific form; signed zero prints as `0e0`.
fn num(x: f64) -> String {
    format!("{:e}", x + 0.0)
}

fn common_of(cmd: &Command) -> &Common {
    match cmd {
        Command::Kernel { common }
        | Command::Evolve { common, .. }
        | Command::ProbMap { common, .. }
        | Command::RabiMap { common, .. }
        | Command::AvgMap { common, .. }
        | Command::Quasi { common }
        | Command::Heff { common, .. }
        | Command::Validate { common, .. } => common,
    }
}

fn run(cmd: Command) -> Result<()> {
    let common = common_of(&cmd).clone();
    check_knobs(&common)?;
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    }
    let start = Instant::now();
    let (name, art) = match cmd {
        Command::Kernel { common } => ("kernel", kernel_cmd(&common)?),
        Command::Evolve {
            common,
            engine,
            two_time,
        } => ("evolve", evolve_cmd(&common, engine, two_time)?),
        Command::ProbMap {
            common,
            sweep,
            engine,
            samples,
        } => ("prob-map", prob_map_cmd(&common, &sweep, engine, samples)?),
        Command::RabiMap { common, sweep, channel } => ("rabi-map", rabi_map_cmd(&common, &sweep, channel)?),
        Command::AvgMap { common, sweep } => ("avg-map", avg_map_cmd(&common, &sweep)?),
        Command::Quasi { common } => ("quasi", quasi_cmd(&common)?),
        Command::Heff { common, quad } => ("heff", heff_cmd(&common, quad)?),
        Command::Validate { common, threshold } => ("validate", validate_cmd(&common, threshold)?),
    };
    write_outputs(name, &common, art, start.elapsed().as_secs_f64())
}

fn check_knobs(c: &Common) -> Result<()> {
    let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
    if c.grid < 3 {
        return bad("--grid must be >= 3");
    }
    if !(c.tol > 0.0) || !c.tol.is_finite() {
        return bad("--tol must be positive");
    }
    if c.kmax == 0 {
        return bad("--kmax must be positive");
    }
    if !(c.t_max > 0.0) || !c.t_max.is_finite() {
        return bad("--t-max must be positive");
    }
    if c.threads == Some(0) {
        return bad("--threads must be positive");
    }
    parse_res(&c.res)?;
    Ok(())
}

fn parse_res(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("bad --res '{s}' (expected <n1>x<n2>, each >= 2)"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    if a < 2 || b < 2 {
        return Err(bad());
    }
    Ok((a, b))
}

fn load_spec(arg: &str) -> Result<DriveSpec> {
    let path = Path::new(arg);
    if path.exists() {
        return DriveSpec::from_path(path);
    }
    presets::by_name(arg).ok_or_else(|| Error::SpecParse {
        path: arg.into(),
        message: format!(
            "no such file or preset (presets: {})",
            presets::all().iter().map(|p| p.0).collect::<Vec<_>>().join(", ")
        ),
    })
}

fn spec_value(spec: &DriveSpec) -> Value {
    serde_json::to_value(spec).expect("drive spec serializes")
}

/// Points on `[0, t_max·T]` keeping `grid` points per period.
fn span_points(c: &Common) -> usize {
    ((c.grid - 1) as f64 * c.t_max).round().max(2.0) as usize + 1
}

fn series_options(c: &Common) -> SeriesOptions {
    SeriesOptions {
        tol: c.tol,
        k_max: c.kmax,
        ..SeriesOptions::default()
    }
}

fn grid_options(c: &Common) -> GridOptions {
    GridOptions {
        k_max: c.kmax.max(GridOptions::default().k_max),
        ..GridOptions::default()
    }
}

fn base_knobs(c: &Common) -> Value {
    json!({
        "grid": c.grid,
        "tol": c.tol,
        "kmax": c.kmax,
        "t_max_periods": c.t_max,
        "res": c.res,
        "threads": c.threads.unwrap_or_else(rayon::current_num_threads),
        "frame": c.frame.name(),
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Some(x), Value::Object(y)) = (a.as_object_mut(), b) {
        x.extend(y);
    }
    a
}

fn artifact(csv: String, spec: Value, knobs: Value, diagnostics: Value) -> Artifact {
    Artifact {
        csv,
        spec,
        knobs,
        diagnostics,
        failure: None,
    }
}

fn kernel_cmd(c: &Common) -> Result<Artifact> {
    let spec = load_spec(&c.spec)?;
    let ks = KernelSpec::from_spec(&spec, gbf::DEFAULT_THRESHOLD)?;
    let n = span_points(c);
    let t1 = c.t_max * spec.period();
    let times: Vec<f64> = (0..n).map(|i| t1 * i as f64 / (n - 1) as f64).collect();
    let mut csv = String::from("t,s,re,im\n");
    for (j, s) in times.iter().enumerate() {
        for t in &times[j..] {
            let k = kernel_fast(&ks, *t, *s);
            let _ = writeln!(csv, "{t},{s},{},{}", num(k.re), num(k.im));
        }
    }
    let (lo, hi) = ks.band();
    Ok(artifact(
        csv,
        spec_value(&spec),
        base_knobs(c),
        json!({"points": n, "band": [lo, hi], "channels": ks.terms().len()}),
    ))
}

fn evolve_cmd(c: &Common, engine: Engine, two_time: bool) -> Result<Artifact> {
    let spec = load_spec(&c.spec)?;
    let ks = KernelSpec::from_spec(&spec, gbf::DEFAULT_THRESHOLD)?;
    let n = span_points(c);
    let t1 = c.t_max * spec.period();
    let knobs = merge(base_knobs(c), json!({"engine": engine.name(), "two_time": two_time}));
    if two_time {
        if !matches!(engine, Engine::Grid) {
            return Err(Error::InvalidArgument("--two-time requires --engine grid".into()));
        }
        let g = unitary_grid_ks(&ks, 0.0, t1, n, &grid_options(c))?;
        let mut csv = String::from("t,s,p\n");
        for j in 0..n {
            for i in j..n {
                let _ = writeln!(csv, "{},{},{}", g.u11.time(i), g.u11.time(j), num(transition_probability(&g.at(i, j))));
            }
        }
        let diag = json!({
            "points": n,
            "orders": g.orders,
            "discretization_estimate": g.discretization_estimate,
            "max_unitarity_defect": g.max_unitarity_defect(),
        });
        return Ok(artifact(csv, spec_value(&spec), knobs, diag));
    }
    let times: Vec<f64> = (0..n).map(|i| t1 * i as f64 / (n - 1) as f64).collect();
    let (us, diag) = match engine {
        Engine::Series => {
            let tr = unitary_analytic_trace(&ks, 0.0, &times, &series_options(c))?;
            let d = json!({"orders": tr.orders, "last_term": tr.last_term, "lattice_radius": tr.radius});
            (tr.u, d)
        }
        Engine::Grid => {
            let tr = unitary_trace_grid(&ks, 0.0, t1, n, &grid_options(c))?;
            let d = json!({"orders": tr.orders, "discretization_estimate": tr.discretization_estimate});
            (tr.u, d)
        }
        Engine::Oracle => {
            let u = oracle::integrate_trace(&spec, 0.0, &times, c.tol, c.frame.frame(), StepControl::default())?;
            (u, json!({}))
        }
    };
    let defect = us.iter().map(|u| u.unitarity_defect()).fold(0.0, f64::max);
    let mut csv = String::from("t,p\n");
    for (t, u) in times.iter().zip(&us) {
        let _ = writeln!(csv, "{t},{}", num(transition_probability(u)));
    }
    Ok(artifact(
        csv,
        spec_value(&spec),
        knobs,
        merge(diag, json!({"points": n, "max_unitarity_defect": defect})),
    ))
}

fn build_sweep(c: &Common, a: &SweepArgs) -> Result<SweepSpec> {
    let template = load_spec(&c.spec)?;
    let (n1, n2) = parse_res(&c.res)?;
    let range = |s: &str, n: usize| -> Result<Range> {
        let bad = || Error::InvalidArgument(format!("bad range '{s}' (expected lo:hi)"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        Ok(Range::new(lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?, n))
    };
    let axis1: Axis = a.axis1.parse()?;
    let axis2: Axis = a.axis2.parse()?;
    // sweep axes that are absent from the spec start at zero amplitude
    let template = [axis1, axis2].iter().fold(template, |s, ax| match *ax {
        Axis::Cos(n) if !s.a_coeffs.iter().any(|h| h.n == n) => s.with_cos(n, 0.0),
        Axis::Sin(m) if !s.b_coeffs.iter().any(|h| h.m == m) => s.with_sin(m, 0.0),
        Axis::Delta(k) if !s.d_coeffs.iter().any(|d| d.k == k) => s.with_delta(k, Default::default()),
        _ => s,
    });
    let mut sweep = SweepSpec::new(template, axis1, range(&a.range1, n1)?, axis2, range(&a.range2, n2)?);
    sweep.detuning = a.detuning.parse::<Detuning>()?;
    sweep.validate()?;
    Ok(sweep)
}

fn map_csv(sweep: &SweepSpec, grid: &SweepGrid) -> String {
    let meta = serde_json::to_string(sweep).expect("sweep serializes");
    let mut csv = format!("# sweep {meta}\naxis1,axis2,value\n");
    for (i2, a2) in grid.axis2.iter().enumerate() {
        for (i1, a1) in grid.axis1.iter().enumerate() {
            let _ = writeln!(csv, "{a1},{a2},{}", num(grid.get(i1, i2)));
        }
    }
    csv
}

fn map_diag(grid: &SweepGrid) -> Value {
    let lo = grid.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    json!({"cells": grid.values.len(), "min": lo, "max": hi})
}

fn prob_map_cmd(c: &Common, a: &SweepArgs, engine: Engine, samples: usize) -> Result<Artifact> {
    let sweep = build_sweep(c, a)?;
    let grid = match engine {
        Engine::Oracle => sweep_map(&sweep, |s| oracle::long_time_average(s, samples, c.tol))?,
        Engine::Series => {
            let opt = series_options(c);
            sweep_map(&sweep, |s| long_time_average_series(s, samples, &opt))?
        }
        Engine::Grid => return Err(Error::InvalidArgument("prob-map supports --engine oracle|series".into())),
    };
    let knobs = merge(base_knobs(c), json!({"engine": engine.name(), "samples": samples}));
    Ok(artifact(map_csv(&sweep, &grid), spec_value(&sweep.template), knobs, map_diag(&grid)))
}

fn rabi_map_cmd(c: &Common, a: &SweepArgs, channel: Option<i64>) -> Result<Artifact> {
    let sweep = build_sweep(c, a)?;
    let l = channel.unwrap_or_else(|| (-sweep.template.eps0 / sweep.template.omega).round() as i64);
    let grid = rabi_map(&sweep, l)?;
    let knobs = merge(base_knobs(c), json!({"channel": l}));
    Ok(artifact(map_csv(&sweep, &grid), spec_value(&sweep.template), knobs, map_diag(&grid)))
}

fn avg_map_cmd(c: &Common, a: &SweepArgs) -> Result<Artifact> {
    let sweep = build_sweep(c, a)?;
    let grid = avg_map(&sweep)?;
    Ok(artifact(map_csv(&sweep, &grid), spec_value(&sweep.template), base_knobs(c), map_diag(&grid)))
}

fn quasi_cmd(c: &Common) -> Result<Artifact> {
    let spec = load_spec(&c.spec)?;
    let ks = KernelSpec::from_spec(&spec, gbf::DEFAULT_THRESHOLD)?;
    let period = spec.period();
    let tr = unitary_analytic_trace(&ks, 0.0, &[period], &series_options(c))?;
    let mut m = tr.u[0];
    if let FrameArg::Lab = c.frame {
        m = frame_unitary(&spec, period) * m * frame_unitary(&spec, 0.0).dagger();
    }
    let (ep, em) = quasienergies(&m, period)?;
    let defect = m.unitarity_defect();
    let csv = format!("eps_plus,eps_minus,unitarity_defect\n{},{},{}\n", num(ep), num(em), num(defect));
    Ok(artifact(
        csv,
        spec_value(&spec),
        base_knobs(c),
        json!({"orders": tr.orders, "last_term": tr.last_term}),
    ))
}

fn heff_cmd(c: &Common, quad: usize) -> Result<Artifact> {
    let spec = load_spec(&c.spec)?;
    if let FrameArg::Lab = c.frame {
        return Err(Error::InvalidArgument("heff is defined in the rotated frame".into()));
    }
    let ks = KernelSpec::from_spec(&spec, gbf::DEFAULT_THRESHOLD)?;
    let h = effective_hamiltonian_ks(&ks, spec.period(), quad)?;
    let mut csv = String::from("entry,re,im\n");
    for (name, z) in ["h11", "h12", "h21", "h22"].iter().zip(h.entries()) {
        let _ = writeln!(csv, "{name},{},{}", num(z.re), num(z.im));
    }
    let knobs = merge(base_knobs(c), json!({"quad": quad}));
    Ok(artifact(csv, spec_value(&spec), knobs, json!({"hermiticity_defect": h.hermiticity_defect()})))
}

fn validate_cmd(c: &Common, threshold: f64) -> Result<Artifact> {
    let cases: Vec<(String, DriveSpec)> = if c.spec == "all" {
        presets::all().into_iter().map(|(n, s)| (n.to_string(), s)).collect()
    } else {
        vec![(c.spec.clone(), load_spec(&c.spec)?)]
    };
    let n = span_points(c);
    let oracle_tol = (c.tol * 1e-2).min(1e-10);
    let mut csv = String::from("case,engine,max_dp,unitarity_defect,orders\n");
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for (name, spec) in &cases {
        let ks = KernelSpec::from_spec(spec, gbf::DEFAULT_THRESHOLD)?;
        let t1 = c.t_max * spec.period();
        let grid = unitary_trace_grid(&ks, 0.0, t1, n, &grid_options(c))?;
        let series = unitary_analytic_trace(&ks, 0.0, &grid.times, &series_options(c))?;
        let exact = oracle::integrate_trace(spec, 0.0, &grid.times, oracle_tol, c.frame.frame(), StepControl::default())?;
        for (engine, us, orders) in [("series", &series.u, series.orders), ("grid", &grid.u, grid.orders)] {
            let dp = us
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a.u12.norm_sqr() - b.u12.norm_sqr()).abs())
                .fold(0.0, f64::max);
            let defect = us.iter().map(|u| u.unitarity_defect()).fold(0.0, f64::max);
            if engine == "series" {
                worst = worst.max(dp);
            }
            let _ = writeln!(csv, "{name},{engine},{},{},{orders}", num(dp), num(defect));
            rows.push(json!({"case": name, "engine": engine, "max_dp": dp}));
        }
    }
    let knobs = merge(base_knobs(c), json!({"threshold": threshold, "oracle_tol": oracle_tol}));
    let specs: Value = cases.iter().map(|(n, s)| (n.clone(), spec_value(s))).collect::<serde_json::Map<_, _>>().into();
    let mut art = artifact(csv, specs, knobs, json!({"cases": rows, "worst_series_dp": worst}));
    if worst >= threshold {
        art.failure = Some(Error::InvalidArgument(format!(
            "validation failed: series max |dp| {worst:e} >= threshold {threshold:e}"
        )));
    }
    Ok(art)
}

fn write_outputs(command: &str, c: &Common, art: Artifact, wall: f64) -> Result<()> {
    std::fs::write(&c.out, &art.csv).map_err(|e| Error::Io(format!("{}: {e}", c.out.display())))?;
    let manifest = json!({
        "command": command,
        "artifact": c.out.file_name().map(|f| f.to_string_lossy().into_owned()),
        "spec_source": c.spec,
        "spec": art.spec,
        "knobs": art.knobs,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_s": wall,
        "diagnostics": art.diagnostics,
        "status": if art.failure.is_some() { "failed" } else { "ok" },
    });
    let mut path = c.out.clone().into_os_string();
    path.push(".json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", PathBuf::from(&path).display())))?;
    art.failure.map_or(Ok(()), Err)
}
