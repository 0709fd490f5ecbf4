//! `fpopt` command-line interface.
//!
//! Exit codes: 0 success, 1 usage or configuration error (nothing is
//! written), 2 at least one plan failed.

use std::collections::HashSet;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fpopt::comfort::{total_penalty, ComfortModel, PenaltyWeights};
use fpopt::generate::{generate_plan_set, DesignProgram};
use fpopt::metrics::{align_curve_to_max, benchmark_plan, orientation_curve, BenchmarkReport, PlanEntry};
use fpopt::optimize::{orient_descend, run_pipeline, Objective, OrientDescentConfig, PipelineConfig, ThermalObjective};
use fpopt::plan::{EnvelopeProperties, FloorPlan};
use fpopt::sim::{simulate_plan, temperatures_csv};
use fpopt::weather::{load_weather, WeatherSeries};

#[derive(Parser)]
#[command(name = "fpopt", version, about = "Floor-plan thermal evaluation and orientation-aware optimization")]
struct Cli {
    /// Log level: error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic plans from a design program.
    Generate(GenerateArgs),
    /// Simulate plans and report their discomfort penalty.
    Simulate(SimulateArgs),
    /// Run the full operator pipeline on plans.
    Optimize(OptimizeArgs),
    /// Sweep the exhaustive orientation curve of plans.
    Curve(CurveArgs),
    /// Optimize plans and score the orientation operator against exhaustive curves.
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of plans, from consecutive seeds.
    #[arg(long, default_value_t = 1)]
    plans_count: usize,
    /// Design program JSON; defaults to the three-bedroom house.
    #[arg(long)]
    program: Option<PathBuf>,
    #[command(flatten)]
    envelope: EnvelopeArgs,
    /// Output directory for `<plan id>.json` files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the synthetic Coimbra-like weather year to this CSV path.
    #[arg(long)]
    weather_out: Option<PathBuf>,
}

#[derive(Args)]
struct EnvelopeArgs {
    /// Opaque wall U-value, W/m²K.
    #[arg(long)]
    wall_u: Option<f64>,
    /// Window U-value, W/m²K.
    #[arg(long)]
    window_u: Option<f64>,
    /// Window solar heat gain coefficient.
    #[arg(long)]
    shgc: Option<f64>,
    /// Thermal mass as a multiple of the air heat capacity.
    #[arg(long)]
    capacitance_multiplier: Option<f64>,
}

impl EnvelopeArgs {
    fn apply(&self, mut env: EnvelopeProperties) -> EnvelopeProperties {
        env.wall_u = self.wall_u.unwrap_or(env.wall_u);
        env.window_u = self.window_u.unwrap_or(env.window_u);
        env.shgc = self.shgc.unwrap_or(env.shgc);
        env.capacitance_multiplier = self.capacitance_multiplier.unwrap_or(env.capacitance_multiplier);
        env
    }
}

#[derive(Args)]
struct InputArgs {
    /// Plan JSON files, each holding one plan or an array of plans.
    #[arg(long, num_args = 1.., required = true)]
    plans: Vec<PathBuf>,
    /// Weather CSV.
    #[arg(long)]
    weather: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct CostArgs {
    /// Underheating weight.
    #[arg(long, default_value_t = 1.0)]
    w1: f64,
    /// Overheating weight.
    #[arg(long, default_value_t = 1.0)]
    w2: f64,
    #[arg(long, default_value_t = 0.33)]
    comfort_slope: f64,
    #[arg(long, default_value_t = 18.8)]
    comfort_intercept: f64,
    /// Half width of the comfort band, K.
    #[arg(long, default_value_t = 3.0)]
    comfort_half_width: f64,
    /// Running-mean smoothing constant.
    #[arg(long, default_value_t = 0.8)]
    running_mean_alpha: f64,
    #[arg(long, default_value_t = 10.0)]
    clamp_low: f64,
    #[arg(long, default_value_t = 30.0)]
    clamp_high: f64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
}

impl CostArgs {
    fn weights(&self) -> Result<PenaltyWeights> {
        Ok(PenaltyWeights::new(self.w1, self.w2)?)
    }

    fn comfort(&self) -> Result<ComfortModel> {
        let m = ComfortModel {
            slope: self.comfort_slope,
            intercept: self.comfort_intercept,
            half_width: self.comfort_half_width,
            alpha: self.running_mean_alpha,
            clamp_low: self.clamp_low,
            clamp_high: self.clamp_high,
        };
        if !(m.half_width > 0.0 && (0.0..1.0).contains(&m.alpha) && m.clamp_low <= m.clamp_high) {
            bail!("comfort constants need half width > 0, 0 ≤ alpha < 1 and clamp_low ≤ clamp_high");
        }
        Ok(m)
    }
}

#[derive(Args, Clone)]
struct DescentArgs {
    #[arg(long, default_value_t = 30)]
    initial_step: u32,
    #[arg(long, default_value_t = 1)]
    min_step: u32,
    #[arg(long, default_value_t = 2.0)]
    decay: f64,
    /// Evaluation budget per orientation invocation.
    #[arg(long, default_value_t = 32)]
    max_evals: usize,
    /// Restore the initial step after every accepted move.
    #[arg(long)]
    reset_on_success: bool,
}

impl DescentArgs {
    fn config(&self) -> Result<OrientDescentConfig> {
        let cfg = OrientDescentConfig {
            initial_step: self.initial_step,
            min_step: self.min_step,
            decay: self.decay,
            max_evals: self.max_evals,
            reset_on_success: self.reset_on_success,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    /// Simulate at this orientation instead of the plan's own.
    #[arg(long)]
    orientation: Option<f64>,
    /// Also write hourly temperatures (`hour,space,temp_c`).
    #[arg(long)]
    dump: bool,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    descent: DescentArgs,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    descent: DescentArgs,
    /// Angular step, degrees; must divide 360.
    #[arg(long, default_value_t = 1)]
    resolution: u32,
    /// Rotate each curve so its maximum sits at 0°.
    #[arg(long)]
    align_max: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Plan JSON files; when absent, plans are generated.
    #[arg(long, num_args = 1..)]
    plans: Vec<PathBuf>,
    /// Number of generated plans.
    #[arg(long, default_value_t = 20)]
    plans_count: usize,
    /// First generator seed.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Design program JSON for generated plans.
    #[arg(long)]
    program: Option<PathBuf>,
    /// Weather CSV; defaults to the synthetic Coimbra-like year.
    #[arg(long)]
    weather: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    cost: CostArgs,
    #[command(flatten)]
    descent: DescentArgs,
}

/// Configuration error: exit 1 before anything is written.
#[derive(Debug)]
struct UsageError(anyhow::Error);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::new().filter_level(cli.log_level).init();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Curve(a) => cmd_curve(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    };
    match result {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {:#}", e.0);
            ExitCode::from(1)
        }
    }
}

enum Status {
    Success,
    Partial,
}

type CmdResult = std::result::Result<Status, UsageError>;

fn usage<T>(r: Result<T>) -> std::result::Result<T, UsageError> {
    r.map_err(UsageError)
}

fn configure_jobs(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        if n == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker threads")?;
    }
    Ok(())
}

fn read_weather(path: &Path) -> Result<WeatherSeries> {
    let file = fs::File::open(path).with_context(|| format!("cannot open weather file {}", path.display()))?;
    load_weather(std::io::BufReader::new(file)).with_context(|| format!("weather file {}", path.display()))
}

fn read_program(path: Option<&Path>) -> Result<DesignProgram> {
    match path {
        None => Ok(DesignProgram::three_bedroom_house()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("cannot read program {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("program {}", p.display()))
        }
    }
}

/// A plan parsed from an input file, or the reason it could not be.
type PlanInput = std::result::Result<FloorPlan, (String, String)>;

/// Reads every plan file. Missing or unreadable files are configuration
/// errors; malformed contents become per-plan failures.
fn read_plans(paths: &[PathBuf]) -> Result<Vec<PlanInput>> {
    let mut plans = Vec::new();
    for path in paths {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read plan file {}", path.display()))?;
        let name = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        let value: serde_json::Value = match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(e) => {
                plans.push(Err((name, format!("{}: {e}", path.display()))));
                continue;
            }
        };
        let items = match value {
            serde_json::Value::Array(items) => items,
            v => vec![v],
        };
        for (k, item) in items.into_iter().enumerate() {
            plans.push(serde_json::from_value::<FloorPlan>(item).map_err(|e| (format!("{name}-{k}"), format!("{}: {e}", path.display()))));
        }
    }
    Ok(plans)
}

fn plan_id(p: &PlanInput) -> &str {
    match p {
        Ok(plan) => &plan.id,
        Err((id, _)) => id,
    }
}

/// Output directory for each plan: `out` itself for a single plan,
/// `out/<id>` otherwise.
fn plan_dirs(out: &Path, plans: &[PlanInput]) -> Result<Vec<PathBuf>> {
    if plans.len() == 1 {
        return Ok(vec![out.to_path_buf()]);
    }
    let mut seen = HashSet::new();
    plans
        .iter()
        .map(|p| {
            let safe: String = plan_id(p)
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
                .collect();
            if !seen.insert(safe.clone()) {
                bail!("duplicate plan id {:?}", plan_id(p));
            }
            Ok(out.join(safe))
        })
        .collect()
}

/// Writes `contents` to `path` through a temporary file in the same directory.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, &text)
}

fn pipeline_config(cost: &CostArgs, descent: &DescentArgs) -> Result<PipelineConfig> {
    Ok(PipelineConfig {
        descent: descent.config()?,
        weights: cost.weights()?,
        comfort: cost.comfort()?,
    })
}

/// Runs `job` on every parsed plan and reports per-plan failures on stderr.
fn for_each_plan<F>(plans: &[PlanInput], dirs: &[PathBuf], job: F) -> Status
where
    F: Fn(&FloorPlan, &Path) -> Result<()> + Sync,
{
    use rayon::prelude::*;
    let errors: Vec<String> = plans
        .par_iter()
        .zip(dirs)
        .filter_map(|(p, dir)| match p {
            Ok(plan) => job(plan, dir).err().map(|e| format!("plan {}: {e:#}", plan.id)),
            Err((id, e)) => Some(format!("plan {id}: {e}")),
        })
        .collect();
    for e in &errors {
        eprintln!("error: {e}");
    }
    if errors.is_empty() {
        Status::Success
    } else {
        Status::Partial
    }
}

fn cmd_generate(a: GenerateArgs) -> CmdResult {
    let mut program = usage(read_program(a.program.as_deref()))?;
    program.envelope = a.envelope.apply(program.envelope);
    if a.out.is_none() && a.weather_out.is_none() {
        return Err(UsageError(anyhow::anyhow!("nothing to do: pass --out and/or --weather-out")));
    }
    let plans = usage(generate_plan_set(a.seed, a.plans_count, &program).map_err(Into::into))?;
    if let Some(out) = &a.out {
        for plan in &plans {
            usage(write_json(&out.join(format!("{}.json", plan.id)), plan))?;
        }
    }
    if let Some(path) = &a.weather_out {
        let weather = WeatherSeries::synthetic(program.site.latitude, program.site.longitude).map_err(|e| UsageError(e.into()))?;
        usage(write_atomic(path, &weather.to_csv()))?;
    }
    Ok(Status::Success)
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    plan_id: &'a str,
    orientation_deg: f64,
    #[serde(flatten)]
    penalty: fpopt::comfort::PenaltyReport,
    comfort: ComfortModel,
}

fn cmd_simulate(a: SimulateArgs) -> CmdResult {
    let weights = usage(a.cost.weights())?;
    let comfort = usage(a.cost.comfort())?;
    usage(configure_jobs(a.cost.jobs))?;
    let weather = usage(read_weather(&a.input.weather))?;
    let plans = usage(read_plans(&a.input.plans))?;
    let dirs = usage(plan_dirs(&a.input.out, &plans))?;
    let bands = comfort.hourly_bands(&weather);
    Ok(for_each_plan(&plans, &dirs, |plan, dir| {
        let result = simulate_plan(plan, &weather, a.orientation)?;
        let penalty = total_penalty(&result, &bands, weights)?;
        write_json(
            &dir.join("penalty.json"),
            &SimulateReport {
                plan_id: &plan.id,
                orientation_deg: a.orientation.unwrap_or(plan.orientation_deg),
                penalty,
                comfort,
            },
        )?;
        if a.dump {
            write_atomic(&dir.join("temperatures.csv"), &temperatures_csv(&result))?;
        }
        Ok(())
    }))
}

fn cmd_optimize(a: OptimizeArgs) -> CmdResult {
    let cfg = usage(pipeline_config(&a.cost, &a.descent))?;
    usage(configure_jobs(a.cost.jobs))?;
    let weather = usage(read_weather(&a.input.weather))?;
    let plans = usage(read_plans(&a.input.plans))?;
    let dirs = usage(plan_dirs(&a.input.out, &plans))?;
    Ok(for_each_plan(&plans, &dirs, |plan, dir| {
        let outcome = run_pipeline(plan, &weather, &cfg)?;
        write_json(&dir.join("report.json"), &outcome.report)?;
        write_json(&dir.join("plan.json"), &outcome.plan)?;
        Ok(())
    }))
}

fn cmd_curve(a: CurveArgs) -> CmdResult {
    let cfg = usage(pipeline_config(&a.cost, &a.descent))?;
    if a.resolution == 0 || 360 % a.resolution != 0 {
        return Err(UsageError(anyhow::anyhow!("--resolution must divide 360")));
    }
    usage(configure_jobs(a.cost.jobs))?;
    let weather = usage(read_weather(&a.input.weather))?;
    let plans = usage(read_plans(&a.input.plans))?;
    let dirs = usage(plan_dirs(&a.input.out, &plans))?;
    let objective = ThermalObjective::new(&weather, cfg.weights, &cfg.comfort);
    Ok(for_each_plan(&plans, &dirs, |plan, dir| {
        let curve = orientation_curve(plan, &objective, a.resolution)?;
        let start = plan.orientation_deg.round().rem_euclid(360.0) as u16;
        let found = orient_descend(start, &cfg.descent, |angle| objective.penalty(&plan.with_orientation(angle as f64)))?.best_angle;
        let csv = if a.align_max {
            let shifted = (found as i32 - curve.max_angle as i32).rem_euclid(360) as u16;
            align_curve_to_max(&curve).to_csv(&plan.id, Some(shifted))
        } else {
            curve.to_csv(&plan.id, Some(found))
        };
        write_atomic(&dir.join("curve.csv"), &csv)
    }))
}

fn cmd_benchmark(a: BenchmarkArgs) -> CmdResult {
    use rayon::prelude::*;
    let cfg = usage(pipeline_config(&a.cost, &a.descent))?;
    usage(configure_jobs(a.cost.jobs))?;
    let weather = match &a.weather {
        Some(p) => usage(read_weather(p))?,
        None => WeatherSeries::coimbra_synthetic(),
    };
    let inputs: Vec<PlanInput> = if a.plans.is_empty() {
        if a.plans_count == 0 {
            return Err(UsageError(anyhow::anyhow!("--plans-count must be at least 1")));
        }
        let program = usage(read_program(a.program.as_deref()))?;
        usage(generate_plan_set(a.seed, a.plans_count, &program).map_err(Into::into))?
            .into_iter()
            .map(Ok)
            .collect()
    } else {
        usage(read_plans(&a.plans))?
    };
    let entries: Vec<PlanEntry> = inputs
        .par_iter()
        .map(|p| match p {
            Ok(plan) => benchmark_plan(plan, &weather, &cfg),
            Err((id, e)) => PlanEntry::failed(id, e),
        })
        .collect();
    let report = BenchmarkReport::from_entries(entries, cfg);
    for e in report.entries.iter().filter(|e| !e.succeeded()) {
        eprintln!("error: plan {}: {}", e.plan_id, e.error.as_deref().unwrap_or_default());
    }
    usage(write_json(&a.out.join("benchmark.json"), &report))?;
    Ok(if report.failed > 0 { Status::Partial } else { Status::Success })
}
