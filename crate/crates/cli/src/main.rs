//! Batch command line: steady optimization, dynamic simulation, annual
//! sweeps, setpoint extraction and steady-vs-dynamic validation.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use ebus_hvac::annual::{
    extract_control, pareto_sweep, sample_weights, segment_and_average, setpoint_points, ExtractedControl,
    ParetoRow, Sample,
};
use ebus_hvac::dynamics::{comfort_metric, mean_power, CausalConfig, Controller, MissionTrace, Simulator};
use ebus_hvac::io::{
    config_hash, load_mission_trace, parse_comfort_list, synth_mission, synth_year, write_json,
    write_pareto_csv, write_trajectory_csv, ControllerChoice, RunConfig, RunSummary, SolutionTable,
    SyntheticProfile,
};
use ebus_hvac::model::{kelvin_to_celsius, DesignVariant, HvacMode};
use ebus_hvac::steady::{ComfortRequirement, SteadySolver};
use ebus_hvac::validation::{replay_mission, validate_mission, ValidationRow, SEGMENT_LENGTH};

#[derive(Parser)]
#[command(name = "ebus-hvac", version, about = "Energy and comfort of electric city-bus HVAC systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Mission CSV (timestamp, passengers, door flag or fraction, ...).
    #[arg(long, global = true)]
    mission: Option<PathBuf>,
    /// Weather CSV joined onto the mission.
    #[arg(long, global = true)]
    weather: Option<PathBuf>,
    /// Design `<ptc|hp>[,+rh][,+curtains]`; repeat to compare several.
    #[arg(long, global = true)]
    design: Vec<String>,
    /// Comfort boxes `min:max[,min:max...]`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    comfort: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Synthetic data instead of files: winter-day, summer-day or year-round.
    #[arg(long, global = true)]
    synthetic: Option<SyntheticProfile>,
    /// Record wall times (makes outputs non-reproducible).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize every sample of a sample set.
    Optimize,
    /// Simulate a mission in closed loop.
    Simulate {
        /// replay or causal.
        #[arg(long)]
        controller: Option<ControllerChoiceArg>,
        /// Extracted control from `extract-setpoints` for the causal controller.
        #[arg(long)]
        setpoints: Option<PathBuf>,
    },
    /// Annual mean power of every design under every comfort box.
    Sweep,
    /// Setpoint profiles and curtain thresholds from steady solutions.
    ExtractSetpoints,
    /// Steady predictions against closed-loop replay, per comfort box.
    Validate,
}

impl std::str::FromStr for ControllerChoiceArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "replay" => Ok(Self(ControllerChoice::Replay)),
            "causal" => Ok(Self(ControllerChoice::Causal)),
            _ => Err(format!("unknown controller `{s}`")),
        }
    }
}

#[derive(Clone)]
struct ControllerChoiceArg(ControllerChoice);

/// Effective configuration of one invocation.
struct Run {
    cfg: RunConfig,
    hash: String,
    timings: bool,
}

impl Run {
    fn new(c: &Common) -> Result<Self> {
        let mut cfg = match &c.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &c.mission {
            cfg.mission = Some(p.clone());
        }
        if let Some(p) = &c.weather {
            cfg.weather = Some(p.clone());
        }
        if !c.design.is_empty() {
            cfg.designs = c
                .design
                .iter()
                .map(|s| s.parse::<DesignVariant>())
                .collect::<Result<_, _>>()?;
            cfg.constants.design = cfg.designs[0].clone();
        }
        if let Some(s) = &c.comfort {
            cfg.comfort = parse_comfort_list(s)?;
        }
        if let Some(s) = c.seed {
            cfg.seed = s;
        }
        if let Some(o) = &c.out {
            cfg.out = o.clone();
        }
        if let Some(p) = c.synthetic {
            cfg.synthetic = Some(p);
        }
        cfg.validate()?;
        let hash = config_hash(&cfg);
        Ok(Self {
            cfg,
            hash,
            timings: c.timings,
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    fn summary<T: Serialize>(&self, command: &str, results: T) -> Result<()> {
        write_json(&self.path("summary.json"), &RunSummary::new(command, self.hash.clone(), results))?;
        Ok(())
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        let path = self.path(name);
        std::fs::create_dir_all(&self.cfg.out).with_context(|| self.cfg.out.display().to_string())?;
        Ok(BufWriter::new(File::create(&path).with_context(|| path.display().to_string())?))
    }

    fn single_design(&self) -> Result<DesignVariant> {
        let designs = self.cfg.design_list();
        if designs.len() > 1 {
            bail!("this command takes a single design, got {}", designs.len());
        }
        Ok(designs[0].clone())
    }

    fn constants(&self, design: &DesignVariant) -> ebus_hvac::model::ModelConstants {
        self.cfg.constants.clone().with_design(design.clone())
    }

    /// Mission file (joined with weather when given), or a synthetic day (winter by default).
    fn trace(&self) -> Result<MissionTrace> {
        let c = &self.cfg.constants;
        if let Some(path) = &self.cfg.mission {
            return Ok(load_mission_trace(path, self.cfg.weather.as_deref(), &self.cfg.schema, c)?);
        }
        match self.cfg.synthetic.unwrap_or(SyntheticProfile::WinterDay) {
            SyntheticProfile::YearRound => bail!("this command needs a mission, not the year-round profile"),
            p => Ok(synth_mission(p, self.cfg.seed, c)?),
        }
    }

    /// Hourly samples of a mission, or the synthetic year by default.
    fn samples(&self) -> Result<Vec<Sample>> {
        let profile = self.cfg.synthetic.unwrap_or(SyntheticProfile::YearRound);
        if self.cfg.mission.is_none() && profile == SyntheticProfile::YearRound {
            return Ok(synth_year(self.cfg.seed, self.cfg.days_per_month, &self.cfg.constants));
        }
        let trace = self.trace()?;
        Ok(segment_and_average(&trace, SEGMENT_LENGTH)?
            .into_iter()
            .enumerate()
            .map(|(i, s)| Sample::new(format!("{}-{i:03}", trace.id), s.disturbance))
            .collect())
    }

    /// Month weights normalized over the months present.
    fn weights(&self, samples: &[Sample]) -> Result<Vec<f64>> {
        let tags: Vec<(i32, u32)> = samples.iter().map(|s| (s.year, s.month)).collect();
        let w = sample_weights(&tags, self.cfg.year_length)?.values;
        let total: f64 = w.iter().sum();
        Ok(w.iter().map(|v| v / total).collect())
    }

    fn simulator(&self, design: &DesignVariant) -> Result<Simulator> {
        Ok(Simulator::new(self.constants(design))?.with_options(self.cfg.sim))
    }
}

#[derive(Serialize)]
struct OptimizeResult {
    samples: usize,
    rows: Vec<ParetoRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<TimingSummary>,
}

#[derive(Serialize)]
struct TimingSummary {
    median: f64,
    p99: f64,
    max: f64,
}

fn timing_summary(times: &[f64]) -> Option<TimingSummary> {
    if times.is_empty() {
        return None;
    }
    let mut t = times.to_vec();
    t.sort_by(f64::total_cmp);
    let q = |p: f64| t[((t.len() - 1) as f64 * p).round() as usize];
    Some(TimingSummary {
        median: q(0.5),
        p99: q(0.99),
        max: t[t.len() - 1],
    })
}

fn optimize(run: &Run) -> Result<()> {
    let samples = run.samples()?;
    let weights = run.weights(&samples)?;
    let reqs = run.cfg.requirements()?;
    let mut table = SolutionTable::new(run.create("solutions.csv")?, run.timings)?;
    let mut rows = Vec::new();
    let mut all_times = Vec::new();
    for design in run.cfg.design_list() {
        let solver = SteadySolver::new(run.constants(&design))?;
        for req in &reqs {
            let timed = samples
                .par_iter()
                .map(|s| {
                    let t0 = Instant::now();
                    let sol = solver
                        .optimize_sample(&s.disturbance, req)
                        .with_context(|| format!("sample {}", s.id))?;
                    Ok((sol, t0.elapsed().as_secs_f64() * 1e3))
                })
                .collect::<Result<Vec<_>>>()?;
            let (solutions, times): (Vec<_>, Vec<_>) = timed.into_iter().unzip();
            table.append(&design.to_string(), req, &samples, &solutions, Some(&times))?;
            rows.push(ebus_hvac::annual::summarize(&design.to_string(), req, &solutions, &weights)?);
            all_times.extend(times);
        }
    }
    table.finish()?;
    run.summary(
        "optimize",
        OptimizeResult {
            samples: samples.len(),
            rows,
            wall_time_ms: if run.timings { timing_summary(&all_times) } else { None },
        },
    )
}

fn sweep(run: &Run) -> Result<()> {
    let samples = run.samples()?;
    let weights = run.weights(&samples)?;
    let cells = pareto_sweep(
        &samples,
        &weights,
        &run.cfg.requirements()?,
        &run.cfg.design_list(),
        &run.cfg.constants,
    )?;
    let rows: Vec<ParetoRow> = cells.iter().map(|c| c.row.clone()).collect();
    write_pareto_csv(run.create("pareto.csv")?, &rows)?;
    let mut table = SolutionTable::new(run.create("solutions.csv")?, false)?;
    for c in &cells {
        table.append(&c.row.design, &c.requirement, &samples, &c.solutions, None)?;
    }
    table.finish()?;
    run.summary("sweep", rows)
}

#[derive(Serialize)]
struct ExtractedBox {
    psi_min: f64,
    psi_max: f64,
    control: ExtractedControl,
}

fn extract(run: &Run) -> Result<Vec<ExtractedBox>> {
    let design = run.single_design()?;
    let samples = run.samples()?;
    let solver = SteadySolver::new(run.constants(&design))?;
    let mut out = Vec::new();
    let mut points = csv::Writer::from_writer(run.create("setpoint_points.csv")?);
    points.write_record([
        "psi_min[-]",
        "psi_max[-]",
        "mode",
        "t_amb[degC]",
        "t_cab[degC]",
        "air_curtain",
        "door_fraction[-]",
    ])?;
    for req in run.cfg.requirements()? {
        let solutions = ebus_hvac::annual::solve_all(&solver, &samples, &req)?;
        let pairs: Vec<_> = samples
            .iter()
            .map(|s| s.disturbance.clone())
            .zip(solutions)
            .collect();
        for (d, s) in pairs.iter().filter(|(_, s)| s.feasible && s.inputs.mode != HvacMode::Passive) {
            points.write_record([
                req.psi_min.to_string(),
                req.psi_max.to_string(),
                s.inputs.mode.name().to_string(),
                kelvin_to_celsius(d.t_amb).to_string(),
                kelvin_to_celsius(s.state.t_cab).to_string(),
                (s.inputs.air_curtain as u8).to_string(),
                d.door_fraction.to_string(),
            ])?;
        }
        let control = extract_control(&pairs, run.cfg.envelope, run.cfg.hysteresis)?;
        log::info!(
            "[{:+.2}, {:+.2}]: {} heating / {} cooling points",
            req.psi_min,
            req.psi_max,
            setpoint_points(&pairs, HvacMode::Heating).len(),
            setpoint_points(&pairs, HvacMode::Cooling).len()
        );
        out.push(ExtractedBox {
            psi_min: req.psi_min,
            psi_max: req.psi_max,
            control,
        });
    }
    points.flush()?;
    Ok(out)
}

fn extract_setpoints(run: &Run) -> Result<()> {
    let boxes = extract(run)?;
    let mut w = csv::Writer::from_writer(run.create("profiles.csv")?);
    w.write_record(["psi_min[-]", "psi_max[-]", "t_amb[degC]", "heating[degC]", "cooling[degC]"])?;
    for b in &boxes {
        let (lo, hi) = b.control.ambient_range;
        for k in 0..=100 {
            let t = lo + (hi - lo) * k as f64 / 100.0;
            w.write_record([
                b.psi_min.to_string(),
                b.psi_max.to_string(),
                t.to_string(),
                b.control.profiles.heating.eval_celsius(t).to_string(),
                b.control.profiles.cooling.eval_celsius(t).to_string(),
            ])?;
        }
    }
    w.flush()?;
    run.summary("extract-setpoints", boxes)
}

#[derive(Serialize)]
struct SimulateResult {
    mission: String,
    controller: ControllerChoice,
    psi_min: f64,
    psi_max: f64,
    mean_power: f64,
    comfort_metric: f64,
    energy_residual: f64,
}

fn simulate(run: &Run, controller: Option<ControllerChoice>, setpoints: Option<&Path>) -> Result<()> {
    let design = run.single_design()?;
    let trace = run.trace()?;
    let sim = run.simulator(&design)?;
    let reqs = run.cfg.requirements()?;
    if reqs.len() > 1 {
        log::warn!("simulate uses the first comfort box only");
    }
    let req: ComfortRequirement = reqs[0];
    let choice = controller.unwrap_or(run.cfg.controller);
    let traj = match choice {
        ControllerChoice::Replay => {
            let solver = SteadySolver::new(run.constants(&design))?;
            replay_mission(&trace, &solver, &sim, &req)?.1
        }
        ControllerChoice::Causal => {
            let control: ExtractedControl = match setpoints {
                Some(p) => {
                    let v: serde_json::Value =
                        serde_json::from_reader(File::open(p).with_context(|| p.display().to_string())?)?;
                    let boxes = v.get("results").unwrap_or(&v);
                    serde_json::from_value(boxes[0]["control"].clone())
                        .with_context(|| format!("{}: no extracted control", p.display()))?
                }
                None => {
                    let mut year = Run {
                        cfg: run.cfg.clone(),
                        hash: run.hash.clone(),
                        timings: false,
                    };
                    year.cfg.synthetic = Some(SyntheticProfile::YearRound);
                    year.cfg.mission = None;
                    year.cfg.comfort = vec![[req.psi_min, req.psi_max]];
                    extract(&year)?.remove(0).control
                }
            };
            sim.simulate(
                &trace,
                Controller::Causal(CausalConfig {
                    profiles: control.profiles,
                    curtains: control.curtains,
                    radiant_with_heating: design.radiant_heaters,
                }),
            )?
        }
    };
    write_trajectory_csv(run.create("trajectory.csv")?, &traj)?;
    run.summary(
        "simulate",
        SimulateResult {
            mission: trace.id.clone(),
            controller: choice,
            psi_min: req.psi_min,
            psi_max: req.psi_max,
            mean_power: mean_power(&traj.points)?,
            comfort_metric: comfort_metric(&traj.points)?,
            energy_residual: traj.audit.relative_residual(),
        },
    )
}

fn validate(run: &Run) -> Result<()> {
    let design = run.single_design()?;
    let trace = run.trace()?;
    let solver = SteadySolver::new(run.constants(&design))?;
    let rows: Vec<ValidationRow> = validate_mission(&trace, &solver, &run.simulator(&design)?, &run.cfg.requirements()?)?;
    let mut w = csv::Writer::from_writer(run.create("validation.csv")?);
    w.write_record([
        "psi_min[-]",
        "psi_max[-]",
        "steady_mean_power[W]",
        "dynamic_mean_power[W]",
        "steady_comfort[-]",
        "dynamic_comfort[-]",
        "segments",
        "infeasible_segments",
    ])?;
    for r in &rows {
        w.write_record([
            r.psi_min.to_string(),
            r.psi_max.to_string(),
            r.steady_mean_power.to_string(),
            r.dynamic_mean_power.to_string(),
            r.steady_comfort.to_string(),
            r.dynamic_comfort.to_string(),
            r.segments.to_string(),
            r.infeasible_segments.to_string(),
        ])?;
    }
    w.flush()?;
    run.summary("validate", rows)
}

#[derive(Serialize)]
struct ErrorReport {
    error: String,
    causes: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = Run::new(&cli.common).and_then(|run| {
        match &cli.command {
            Command::Optimize => optimize(&run),
            Command::Simulate {
                controller,
                setpoints,
            } => simulate(&run, controller.clone().map(|c| c.0), setpoints.as_deref()),
            Command::Sweep => sweep(&run),
            Command::ExtractSetpoints => extract_setpoints(&run),
            Command::Validate => validate(&run),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = ErrorReport {
                error: e.to_string(),
                causes: e.chain().skip(1).map(|c| c.to_string()).collect(),
            };
            eprintln!("{}", serde_json::to_string_pretty(&report).unwrap_or_else(|_| e.to_string()));
            ExitCode::FAILURE
        }
    }
}
