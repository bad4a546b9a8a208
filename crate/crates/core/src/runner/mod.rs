//! Command-line front end: `check`, `verify`, `flow`, `sample` and `sweep`.
//!
//! Every flag can also come from a TOML file given with `--config`; flags
//! win. Keys are the long flag names, either at the top level or in a table
//! named after the subcommand:
//!
//! ```toml
//! seed = 7
//! [verify]
//! samples = 100
//! [flow]
//! rtol = 1e-10
//! ```
//!
//! Exit codes: 0 success, 1 a violation (cone check, failed claim, sampler
//! or integrity failure), 2 invalid input.

mod manifest;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;

pub use manifest::{sha256_hex, RunManifest};

use crate::cones::{self, ConeId, OptimizerConfig};
use crate::error::{Error, Result};
use crate::flow::{self, FunctionalId, InvarianceConfig, InvarianceReport, StepControl};
use crate::rng;
use crate::sampling::{sample_in_cone, SamplerConfig};
use crate::tensor::{io, Kind, Tensor};
use crate::verify::{self, ClaimId, SearchConfig, VerifierReport, ALL_CLAIMS};

#[derive(Parser, Debug)]
#[command(name = "curvlab", version, about = "Cone checks, lemma verification and reaction flows for algebraic curvature tensors")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CURVLAB_JOBS")]
    pub jobs: Option<usize>,
    /// TOML file with default flag values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cone defect of a tensor; exit 1 if it lies outside the cone.
    Check(CheckArgs),
    /// Run registered identities and inequalities.
    Verify(VerifyArgs),
    /// Integrate the reaction ODE from a tensor.
    Flow(FlowArgs),
    /// Draw cone members.
    Sample(SampleArgs),
    /// Sample, flow and report the worst cone-defect excursion.
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub cone: String,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Membership tolerance relative to the tensor norm (default 1e-6).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub oracle_samples: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Claim name or tag, or `all`.
    #[arg(long)]
    pub claim: String,
    /// Real dimension for Riemannian claims, complex dimension for Kähler ones.
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Adversarial search restarts.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON report file; the CSV summary goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FlowArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Comma-separated functionals: scal, ric-min, ric-min2, nob-shift or a cone name.
    #[arg(long)]
    pub track: Option<String>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub dt_init: Option<f64>,
    #[arg(long)]
    pub dt_max: Option<f64>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Stop once scal exceeds this multiple of max(scal(0), 1).
    #[arg(long)]
    pub stop_factor: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    #[arg(long)]
    pub cone: String,
    /// riemann or kahler; defaults to the cone's natural kind.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub count: Option<usize>,
    /// Target defect (absolute).
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub cone: String,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Initial defect relative to the norm.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Also shift samples into this cone.
    #[arg(long)]
    pub also: Option<String>,
    #[arg(long)]
    pub stop_factor: Option<f64>,
    /// Excursion tolerance relative to the norm (default 1e-6).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Flow these tensors instead of sampling.
    #[arg(long, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Defaults from the `--config` file.
struct Settings {
    table: toml::Table,
    section: &'static str,
}

impl Settings {
    fn load(path: Option<&Path>, section: &'static str) -> Result<Self> {
        let table = match path {
            None => toml::Table::new(),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::InvalidInput(format!("malformed config {}: {e}", p.display())))?
            }
        };
        Ok(Self { table, section })
    }

    fn lookup<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        let v = self
            .table
            .get(self.section)
            .and_then(|s| s.as_table())
            .and_then(|s| s.get(key))
            .or_else(|| self.table.get(key).filter(|v| !v.is_table()));
        match v {
            None => Ok(None),
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| Error::InvalidInput(format!("config key {key}: {e}"))),
        }
    }

    /// Flag value, else config value, else `default`.
    fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.lookup(key)?.unwrap_or(default)),
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Precondition(_) | Error::Json(_) => 2,
        Error::Io(_) | Error::Sampler(_) | Error::Integrity(_) | Error::Blowup { .. } => 1,
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let command_line: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    if let Some(j) = cli.jobs {
        // the global pool can only be built once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a, cli.config.as_deref(), command_line),
        Command::Verify(a) => cmd_verify(a, cli.config.as_deref(), command_line),
        Command::Flow(a) => cmd_flow(a, cli.config.as_deref(), command_line),
        Command::Sample(a) => cmd_sample(a, cli.config.as_deref(), command_line),
        Command::Sweep(a) => cmd_sweep(a, cli.config.as_deref(), command_line),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn parse_kind(s: &str) -> Result<Kind> {
    match s.to_ascii_lowercase().as_str() {
        "riemann" | "riemannian" | "real" => Ok(Kind::Riemann),
        "kahler" | "kähler" | "complex" => Ok(Kind::Kahler),
        _ => Err(Error::InvalidInput(format!("unknown kind {s:?}"))),
    }
}

fn natural_kind(cone: ConeId, flag: Option<&str>) -> Result<Kind> {
    match flag {
        Some(k) => parse_kind(k),
        None if cone.accepts(Kind::Riemann) => Ok(Kind::Riemann),
        None => Ok(Kind::Kahler),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn read_input(path: &Path, manifest: &mut RunManifest) -> Result<Tensor> {
    let t = io::read_tensor(path, false)?;
    manifest.hash_input(path)?;
    Ok(t)
}

fn cmd_check(a: &CheckArgs, config: Option<&Path>, cl: Vec<String>) -> Result<i32> {
    let s = Settings::load(config, "check")?;
    let cone: ConeId = a.cone.parse()?;
    let seed = s.pick(a.seed, "seed", 0)?;
    let tol = s.pick(a.tol, "tol", 1e-6)?;
    let opt = OptimizerConfig {
        restarts: s.pick(a.restarts, "restarts", OptimizerConfig::default().restarts)?,
        oracle_samples: s.pick(a.oracle_samples, "oracle-samples", OptimizerConfig::default().oracle_samples)?,
        seed,
        ..Default::default()
    };
    let mut manifest = RunManifest::new(cl, Some(seed));
    let t = read_input(&a.input, &mut manifest)?;
    let rep = cones::defect(&t, cone, &opt)?;
    let scale = t.norm();
    let member = rep.defect >= -tol * scale.max(f64::MIN_POSITIVE);
    let doc = json!({
        "input": a.input.display().to_string(),
        "kind": t.kind().as_str(),
        "dim": t.dim(),
        "scale": scale,
        "tol": tol,
        "member": member,
        "report": rep.to_json(),
    });
    println!("{cone}: defect {:.12e} (scale {:.6e}) -> {}", rep.defect, scale, if member { "member" } else { "violation" });
    if let Some(out) = &a.out {
        write_text(out, &serde_json::to_string_pretty(&doc)?)?;
        manifest.param("cone", cone.to_string());
        manifest.param("restarts", opt.restarts);
        manifest.param("oracle_samples", opt.oracle_samples);
        manifest.param("tol", tol);
        manifest.outputs.push(out.display().to_string());
        manifest.write(&manifest::sidecar(out))?;
    }
    Ok(if member { 0 } else { 1 })
}

fn cmd_verify(a: &VerifyArgs, config: Option<&Path>, cl: Vec<String>) -> Result<i32> {
    let s = Settings::load(config, "verify")?;
    let claims: Vec<ClaimId> = if a.claim.eq_ignore_ascii_case("all") {
        ALL_CLAIMS.to_vec()
    } else {
        vec![a.claim.parse()?]
    };
    let seed = s.pick(a.seed, "seed", 0)?;
    let samples = s.pick(a.samples, "samples", 100)?;
    let cfg = SearchConfig { restarts: s.pick(a.restarts, "restarts", 64)?, ..Default::default() };
    let mut manifest = RunManifest::new(cl, Some(seed));
    manifest.param("dim", a.dim);
    manifest.param("samples", samples);
    manifest.param("restarts", cfg.restarts);
    let mut reports: Vec<VerifierReport> = Vec::new();
    for (i, c) in claims.iter().enumerate() {
        let task_seed = rng::derive_seed(seed, i as u64);
        manifest.task_seeds.push(task_seed);
        reports.push(verify::verify(*c, a.dim, samples, &cfg, task_seed)?);
    }
    let mut csv = format!("{}\n", VerifierReport::CSV_HEADER);
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    print!("{csv}");
    if let Some(out) = &a.out {
        let doc: Vec<_> = reports.iter().map(|r| r.to_json()).collect();
        write_text(out, &serde_json::to_string_pretty(&doc)?)?;
        let csv_path = out.with_extension("csv");
        write_text(&csv_path, &csv)?;
        manifest.outputs.push(out.display().to_string());
        manifest.outputs.push(csv_path.display().to_string());
        manifest.write(&manifest::sidecar(out))?;
    }
    Ok(if reports.iter().all(|r| r.passed()) { 0 } else { 1 })
}

fn cmd_flow(a: &FlowArgs, config: Option<&Path>, cl: Vec<String>) -> Result<i32> {
    let s = Settings::load(config, "flow")?;
    let d = StepControl::default();
    let seed = s.pick(a.seed, "seed", 0)?;
    let ctrl = StepControl {
        dt_init: s.pick(a.dt_init, "dt-init", d.dt_init)?,
        dt_max: s.pick(a.dt_max, "dt-max", d.dt_max)?,
        rtol: s.pick(a.rtol, "rtol", d.rtol)?,
        atol: s.pick(a.atol, "atol", d.atol)?,
        max_steps: s.pick(a.max_steps, "max-steps", d.max_steps)?,
        t_end: s.pick(a.t_end, "t-end", d.t_end)?,
        stop_factor: s.pick(a.stop_factor, "stop-factor", d.stop_factor)?,
        optimizer: d.optimizer.with_seed(seed),
        ..d
    };
    let track: String = s.pick(a.track.clone(), "track", "scal,ric-min,ric-min2".to_string())?;
    let tracked: Vec<FunctionalId> = track.split(',').filter(|x| !x.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    let mut manifest = RunManifest::new(cl, Some(seed));
    let t0 = read_input(&a.input, &mut manifest)?;
    let (trace, blowup) = match flow::integrate(&t0, &ctrl, &tracked) {
        Ok(tr) => (tr, None),
        Err(Error::Blowup { t, dt, partial }) => (*partial, Some((t, dt))),
        Err(e) => return Err(e),
    };
    fs::create_dir_all(a.out.join("snapshots"))?;
    write_text(&a.out.join("trace.csv"), &trace.to_csv())?;
    manifest.outputs.push("trace.csv".into());
    for (idx, state) in &trace.snapshots {
        let name = format!("snapshots/state_{idx:06}.json");
        io::write_tensor(&a.out.join(&name), state)?;
        manifest.outputs.push(name);
    }
    let mut summary = trace.summary_json();
    summary["blowup"] = json!(blowup.map(|(t, dt)| json!({"t": t, "dt": dt})));
    write_text(&a.out.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    manifest.outputs.push("summary.json".into());
    manifest.param("ctrl", json!({
        "dt_init": ctrl.dt_init, "dt_max": ctrl.dt_max, "rtol": ctrl.rtol, "atol": ctrl.atol,
        "max_steps": ctrl.max_steps, "t_end": ctrl.t_end, "stop_factor": ctrl.stop_factor,
        "stop_floor": ctrl.stop_floor, "optimizer_restarts": ctrl.optimizer.restarts,
    }));
    manifest.param("track", track);
    manifest.write(&a.out.join("manifest.json"))?;
    match blowup {
        Some((t, _)) => println!("blow-up at t = {t:.6e} after {} steps", trace.accepted),
        None => println!(
            "stopped ({}) at t = {:.6e} after {} steps",
            trace.stop.map(|s| s.as_str()).unwrap_or("?"),
            trace.final_time(),
            trace.accepted
        ),
    }
    Ok(0)
}

fn cmd_sample(a: &SampleArgs, config: Option<&Path>, cl: Vec<String>) -> Result<i32> {
    let s = Settings::load(config, "sample")?;
    let cone: ConeId = a.cone.parse()?;
    let kind = natural_kind(cone, a.kind.as_deref())?;
    if !cone.accepts(kind) {
        return Err(Error::InvalidInput(format!("cone {cone} does not apply to {} tensors", kind.as_str())));
    }
    if a.dim < cone.min_dim() {
        return Err(Error::InvalidInput(format!("cone {cone} needs dimension ≥ {}", cone.min_dim())));
    }
    let seed = s.pick(a.seed, "seed", 0)?;
    let count = s.pick(a.count, "count", 10)?;
    let margin = s.pick(a.margin, "margin", 0.0)?;
    let opt = OptimizerConfig {
        restarts: s.pick(a.restarts, "restarts", 32)?,
        oracle_samples: 0,
        ..Default::default()
    };
    // validates margin and dimension before any work
    SamplerConfig::new(a.dim, seed).with_cone(cone, margin);
    let mut manifest = RunManifest::new(cl, Some(seed));
    manifest.param("cone", cone.to_string());
    manifest.param("kind", kind.as_str());
    manifest.param("dim", a.dim);
    manifest.param("count", count);
    manifest.param("margin", margin);
    manifest.param("restarts", opt.restarts);
    use rayon::prelude::*;
    let results: Vec<(u64, Result<crate::sampling::ConeSample>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let ts = rng::derive_seed(seed, i as u64);
            let cfg = SamplerConfig::new(a.dim, ts).with_cone(cone, margin);
            (ts, sample_in_cone(kind, &cfg, &opt.with_seed(ts)))
        })
        .collect();
    fs::create_dir_all(&a.out)?;
    let mut csv = String::from("index,seed,shift,raw_defect,defect,scale,relative_defect\n");
    let mut failures = Vec::new();
    for (i, (ts, r)) in results.into_iter().enumerate() {
        manifest.task_seeds.push(ts);
        match r {
            Ok(smp) => {
                let name = format!("sample_{i:04}.json");
                io::write_tensor(&a.out.join(&name), &smp.tensor)?;
                manifest.outputs.push(name);
                let scale = smp.tensor.norm();
                csv.push_str(&format!(
                    "{i},{ts},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    smp.shift,
                    smp.raw_defect,
                    smp.report.defect,
                    scale,
                    smp.report.defect / scale.max(f64::MIN_POSITIVE)
                ));
            }
            Err(e @ Error::Sampler(_)) => failures.push(json!({"index": i, "seed": ts, "error": e.to_string()})),
            Err(e) => return Err(e),
        }
    }
    write_text(&a.out.join("samples.csv"), &csv)?;
    manifest.outputs.push("samples.csv".into());
    if !failures.is_empty() {
        write_text(&a.out.join("failures.json"), &serde_json::to_string_pretty(&failures)?)?;
        manifest.outputs.push("failures.json".into());
    }
    manifest.write(&a.out.join("manifest.json"))?;
    println!("{} of {count} samples written to {}", count - failures.len(), a.out.display());
    if failures.is_empty() {
        Ok(0)
    } else {
        eprintln!("{} sampler failures, see failures.json", failures.len());
        Ok(1)
    }
}

fn cmd_sweep(a: &SweepArgs, config: Option<&Path>, cl: Vec<String>) -> Result<i32> {
    let s = Settings::load(config, "sweep")?;
    let cone: ConeId = a.cone.parse()?;
    let seed = s.pick(a.seed, "seed", 0)?;
    let tol = s.pick(a.tol, "tol", 1e-6)?;
    let mut manifest = RunManifest::new(cl, Some(seed));
    let mut base = InvarianceConfig::new(cone, Kind::Riemann, 0, 1, seed);
    base.ctrl.stop_factor = s.pick(a.stop_factor, "stop-factor", base.ctrl.stop_factor)?;
    let report: InvarianceReport = if !a.input.is_empty() {
        let states = a.input.iter().map(|p| read_input(p, &mut manifest)).collect::<Result<Vec<_>>>()?;
        flow::invariance_from_states(cone, &states, &base.ctrl, seed)?
    } else {
        let kind = natural_kind(cone, a.kind.as_deref())?;
        let dim = match a.dim {
            Some(d) => d,
            None => s.lookup("dim")?.ok_or_else(|| Error::InvalidInput("sweep needs --dim or --input".into()))?,
        };
        let also = a.also.as_deref().map(str::parse::<ConeId>).transpose()?;
        let cfg = InvarianceConfig {
            kind,
            dim,
            count: s.pick(a.count, "count", 50)?,
            margin: s.pick(a.margin, "margin", 0.0)?,
            also,
            ..base
        };
        manifest.param("kind", kind.as_str());
        manifest.param("dim", dim);
        manifest.param("count", cfg.count);
        manifest.param("margin", cfg.margin);
        flow::invariance_experiment(&cfg)?
    };
    manifest.param("cone", cone.to_string());
    manifest.param("stop_factor", base.ctrl.stop_factor);
    manifest.param("tol", tol);
    manifest.task_seeds = report.trajectories.iter().map(|t| t.seed).collect();

    println!("cone,kind,dim,count,worst_excursion,worst_ric_min,worst_ric_min2,blowups,failures");
    println!(
        "{},{},{},{},{:.6e},{:.6e},{:.6e},{},{}",
        report.cone,
        report.kind.as_str(),
        report.dim,
        report.trajectories.len(),
        report.worst_excursion(),
        report.worst_ric_min(),
        report.worst_ric_min2(),
        report.blowups(),
        report.failures()
    );
    if let Some(out) = &a.out {
        fs::create_dir_all(out)?;
        write_text(&out.join("trajectories.csv"), &report.to_csv())?;
        write_text(&out.join("report.json"), &serde_json::to_string_pretty(&report.to_json())?)?;
        manifest.outputs.extend(["trajectories.csv".to_string(), "report.json".to_string()]);
        manifest.write(&out.join("manifest.json"))?;
    }
    if report.failures() > 0 {
        eprintln!("{} trajectories failed their integrity checks", report.failures());
        return Ok(1);
    }
    Ok(if report.worst_excursion() >= -tol { 0 } else { 1 })
}
