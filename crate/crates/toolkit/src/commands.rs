//! The six subcommands as library functions.
//!
//! Each command validates its inputs before touching the output
//! directory, writes its files through [`OutputDir`] and finishes with a
//! `manifest.json` listing them.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use lpbf_core::baselines::{Axis, BaselineSpec};
use lpbf_core::env::{detect_sensitive_regions, ScanEnv, N_ACTIONS, OBS_DIM};
use lpbf_core::geometry::{sample_uniform, SampleGrid};
use lpbf_core::learner::{greedy_rollout, train_with, QNetwork, TrainOutcome};
use lpbf_core::pathplan::{finetune_gcode, plan_layer, GCodeProgram, IslandPlan, PolicySource};
use lpbf_core::thermal::{
    angle_template_study, calibrate_absorptivity, depth_stats, simulate, straight_scan_depth, AngleDepth,
    MeltPoolTrace, ThermalConfig, TEMPLATE_ANGLES,
};
use lpbf_core::{PolygonDomain, Toolpath};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{AxisName, Config, Overrides};
use crate::formats::{angle_csv, depth_csv, episode_csv, to_json, DomainFile, ModelFile, ToolpathFile};
use crate::manifest::{OutputDir, RunManifest};
use crate::svg::{line_chart, toolpath_svg, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyName {
    Zigzag,
    Chessboard,
    Atg,
    Drl,
}

impl StrategyName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Zigzag => "zigzag",
            Self::Chessboard => "chessboard",
            Self::Atg => "atg",
            Self::Drl => "drl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenerateMode {
    #[default]
    Direct,
    VoronoiIsland,
}

/// Inputs shared by every command.
#[derive(Debug, Clone, Default)]
pub struct Common {
    pub config: Option<PathBuf>,
    pub overrides: Overrides,
    pub out: PathBuf,
}

impl Common {
    pub fn resolve(&self) -> Result<Config> {
        let mut cfg = Config::resolve(self.config.as_deref())?;
        cfg.apply(&self.overrides);
        ensure!(cfg.geometry.hatch_um > 0.0, "hatch_um must be positive");
        Ok(cfg)
    }
}

struct Domain {
    file: DomainFile,
    polygon: PolygonDomain,
}

fn load_domain(path: &Path) -> Result<Domain> {
    let file = DomainFile::load(path).with_context(|| format!("loading domain {}", path.display()))?;
    let polygon = file.domain()?;
    Ok(Domain { file, polygon })
}

fn grid_of(domain: &PolygonDomain, cfg: &Config) -> Result<SampleGrid> {
    sample_uniform(domain, cfg.hatch_mm()).context("sampling the domain")
}

/// The thermal model, with the absorptivity fitted when calibration is on.
pub fn thermal_model(cfg: &Config) -> Result<(ThermalConfig, Option<f64>)> {
    let t = &cfg.thermal;
    let mut model = t.to_core();
    model.validate().context("invalid thermal configuration")?;
    if !t.calibrate {
        return Ok((model, None));
    }
    let fit = calibrate_absorptivity(
        &model,
        t.target_depth_um,
        (t.calibration_low, t.calibration_high),
        t.calibration_length_mm,
    )
    .context("calibrating absorptivity")?;
    model.laser.absorptivity = fit.absorptivity;
    Ok((model, Some(fit.absorptivity)))
}

fn model_network(model: &ModelFile) -> Result<QNetwork> {
    let net = model.network()?;
    if net.input_dim() != OBS_DIM || net.output_dim() != N_ACTIONS {
        bail!(
            "model maps {} inputs to {} actions; the environment needs {} to {}",
            net.input_dim(),
            net.output_dim(),
            OBS_DIM,
            N_ACTIONS
        );
    }
    Ok(net)
}

fn write_toolpath(out: &mut OutputDir, stem: &str, path: &Toolpath, domain: &PolygonDomain, generator: serde_json::Value, title: &str) -> Result<()> {
    out.write(&format!("{stem}.json"), &to_json(&ToolpathFile::new(path, Some(generator))))?;
    out.write(&format!("{stem}.svg"), &toolpath_svg(path, Some(domain), title))?;
    Ok(())
}

// ---------------------------------------------------------------- train

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub domain: PathBuf,
    pub common: Common,
}

#[derive(Debug)]
pub struct TrainReport {
    pub outcome: TrainOutcome,
    pub rollout: Toolpath,
    pub manifest: RunManifest,
}

/// Train a policy on the domain's sample grid.
///
/// Writes `model.json` (the selected policy), `training_log.csv`,
/// `reward_curve.svg`, `sensitive_curve.svg`, a pattern snapshot every
/// `snapshot_every` episodes under `snapshots/`, and the greedy rollout as
/// `toolpath.json`/`.svg`.
pub fn cmd_train(args: &TrainArgs) -> Result<TrainReport> {
    let cfg = args.common.resolve()?;
    let domain = load_domain(&args.domain)?;
    let grid = grid_of(&domain.polygon, &cfg)?;
    let train_cfg = cfg.train_config();
    train_cfg.validate().context("invalid learner configuration")?;
    let mut env = ScanEnv::new(grid.clone(), cfg.env_config()).context("building the environment")?;

    let mut out = OutputDir::create(&args.common.out, "train")?;
    let every = cfg.learner.snapshot_every;
    let mut write_err = None;
    let outcome = train_with(&mut env, &train_cfg, |log, path| {
        let n = log.episode + 1;
        if every > 0 && n % every == 0 && write_err.is_none() {
            let svg = toolpath_svg(path, Some(&domain.polygon), &format!("episode {n}"));
            if let Err(e) = out.write(&format!("snapshots/episode_{n:04}.svg"), &svg) {
                write_err = Some(e);
            }
        }
    })
    .context("training")?;
    if let Some(e) = write_err {
        return Err(e);
    }

    let config_value = serde_json::to_value(&cfg)?;
    out.write("model.json", &to_json(&ModelFile::new(&outcome.policy, config_value, None)))?;
    out.write("training_log.csv", &episode_csv(&outcome.log.episodes))?;
    let reward: Vec<_> = outcome.log.episodes.iter().map(|e| ((e.episode + 1) as f64, e.total_reward)).collect();
    let sensitive: Vec<_> = outcome.log.episodes.iter().map(|e| ((e.episode + 1) as f64, e.sensitive as f64)).collect();
    out.write("reward_curve.svg", &line_chart("Total reward per episode", "episode", "reward", &[Series::new("reward", reward)]))?;
    out.write(
        "sensitive_curve.svg",
        &line_chart("Sensitive regions per episode", "episode", "count", &[Series::new("sensitive regions", sensitive)]),
    )?;

    let rollout = greedy_rollout(&outcome.policy, &grid, &cfg.env_config())?;
    let generator = json!({
        "strategy": "drl",
        "mode": "direct",
        "policy_episode": outcome.policy_episode,
        "total_reward": rollout.summary.total_reward,
        "sensitive": rollout.summary.sensitive,
    });
    write_toolpath(&mut out, "toolpath", &rollout.path, &domain.polygon, generator, "greedy rollout")?;
    let manifest = out.finish(&cfg, None)?;
    Ok(TrainReport { outcome, rollout: rollout.path, manifest })
}

// ------------------------------------------------------------- generate

#[derive(Debug, Clone)]
pub struct GenerateArgs {
    pub model: PathBuf,
    pub domain: PathBuf,
    pub mode: GenerateMode,
    pub common: Common,
}

#[derive(Debug, Serialize)]
struct PlanIsland {
    col: usize,
    row: usize,
    centroid: [f64; 2],
    cells: Vec<String>,
    moves: usize,
}

#[derive(Debug, Serialize)]
struct PlanFile {
    island_size_mm: f64,
    order: Vec<usize>,
    islands: Vec<PlanIsland>,
}

fn plan_file(plan: &IslandPlan, island_size: f64) -> PlanFile {
    PlanFile {
        island_size_mm: island_size,
        order: plan.order.clone(),
        islands: plan
            .islands
            .iter()
            .map(|i| PlanIsland {
                col: i.col,
                row: i.row,
                centroid: [i.centroid.x, i.centroid.y],
                cells: i.cells.iter().map(|c| c.label.clone()).collect(),
                moves: i.path.len(),
            })
            .collect(),
    }
}

#[derive(Debug)]
pub struct GenerateReport {
    pub path: Toolpath,
    pub plan: Option<IslandPlan>,
    pub manifest: RunManifest,
}

/// Toolpath from a trained model, either one rollout over the whole
/// domain or the island/Voronoi layer plan (also written as `plan.json`).
pub fn cmd_generate(args: &GenerateArgs) -> Result<GenerateReport> {
    let cfg = args.common.resolve()?;
    let domain = load_domain(&args.domain)?;
    let model = ModelFile::load(&args.model)?;
    let net = model_network(&model)?;
    let env_cfg = cfg.env_config();

    let (path, plan) = match args.mode {
        GenerateMode::Direct => {
            let grid = grid_of(&domain.polygon, &cfg)?;
            (greedy_rollout(&net, &grid, &env_cfg)?.path, None)
        }
        GenerateMode::VoronoiIsland => {
            let seeds = domain.file.seed_points();
            let mut source = PolicySource { policy: &net, env: env_cfg };
            let plan = plan_layer(&domain.polygon, &cfg.plan_config(), seeds.as_deref(), &mut source)
                .context("planning the layer")?;
            (plan.path.clone(), Some(plan))
        }
    };

    let mut out = OutputDir::create(&args.common.out, "generate")?;
    let mode = match args.mode {
        GenerateMode::Direct => "direct",
        GenerateMode::VoronoiIsland => "voronoi-island",
    };
    write_toolpath(&mut out, "toolpath", &path, &domain.polygon, json!({"strategy": "drl", "mode": mode}), mode)?;
    if let Some(plan) = &plan {
        out.write("plan.json", &to_json(&plan_file(plan, cfg.pathplan.island_size_mm)))?;
    }
    let manifest = out.finish(&cfg, model.calibration.absorptivity)?;
    Ok(GenerateReport { path, plan, manifest })
}

// ------------------------------------------------------------- baseline

fn baseline_spec(name: StrategyName, cfg: &Config) -> Option<BaselineSpec> {
    let p = &cfg.pathplan;
    match name {
        StrategyName::Zigzag => Some(BaselineSpec::Zigzag {
            direction: match p.zigzag_axis {
                AxisName::X => Axis::X,
                AxisName::Y => Axis::Y,
            },
        }),
        StrategyName::Chessboard => Some(BaselineSpec::Chessboard { island_size: p.chessboard_island_mm }),
        StrategyName::Atg => Some(BaselineSpec::Atg { threshold_deg: p.atg_threshold_deg }),
        StrategyName::Drl => None,
    }
}

fn baseline_path(name: StrategyName, grid: &SampleGrid, cfg: &Config) -> Result<Toolpath> {
    let spec = baseline_spec(name, cfg).with_context(|| format!("{} is not a baseline strategy", name.as_str()))?;
    spec.generate(grid, &cfg.env_config()).with_context(|| format!("generating {}", spec.name()))
}

#[derive(Debug, Clone)]
pub struct BaselineArgs {
    pub domain: PathBuf,
    pub strategy: StrategyName,
    pub common: Common,
}

pub fn cmd_baseline(args: &BaselineArgs) -> Result<(Toolpath, RunManifest)> {
    let cfg = args.common.resolve()?;
    let domain = load_domain(&args.domain)?;
    let grid = grid_of(&domain.polygon, &cfg)?;
    let path = baseline_path(args.strategy, &grid, &cfg)?;
    let mut out = OutputDir::create(&args.common.out, "baseline")?;
    let name = args.strategy.as_str();
    write_toolpath(&mut out, "toolpath", &path, &domain.polygon, json!({"strategy": name}), name)?;
    let manifest = out.finish(&cfg, None)?;
    Ok((path, manifest))
}

// -------------------------------------------------------------- compare

#[derive(Debug, Clone)]
pub struct CompareArgs {
    pub domain: PathBuf,
    pub strategies: Vec<StrategyName>,
    /// Policy for `drl`; trained in-process on the domain when absent.
    pub model: Option<PathBuf>,
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub strategy: StrategyName,
    pub avg_depth_um: f64,
    pub peak_depth_um: f64,
    pub sensitive_count: usize,
    pub void_moves: usize,
    pub path_length_mm: f64,
}

#[derive(Debug)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub paths: Vec<Toolpath>,
    pub traces: Vec<MeltPoolTrace>,
    pub absorptivity: Option<f64>,
    pub manifest: RunManifest,
}

fn drl_path(model: Option<&Path>, grid: &SampleGrid, cfg: &Config) -> Result<Toolpath> {
    let env_cfg = cfg.env_config();
    let net = match model {
        Some(p) => model_network(&ModelFile::load(p)?)?,
        None => {
            let mut env = ScanEnv::new(grid.clone(), env_cfg)?;
            lpbf_core::learner::train(&mut env, &cfg.train_config()).context("training the drl policy")?.policy
        }
    };
    Ok(greedy_rollout(&net, grid, &env_cfg)?.path)
}

/// Simulate each strategy's toolpath and compare melt-pool depths.
///
/// Writes `depth_{k}_{name}.csv` and `toolpath_{k}_{name}.json`/`.svg` per
/// strategy, `summary.csv`, `comparison.json` and the overlay `depth.svg`.
pub fn cmd_compare(args: &CompareArgs) -> Result<CompareReport> {
    ensure!(args.strategies.len() >= 2, "compare needs at least two strategies");
    let cfg = args.common.resolve()?;
    let domain = load_domain(&args.domain)?;
    let grid = grid_of(&domain.polygon, &cfg)?;
    let (thermal, absorptivity) = thermal_model(&cfg)?;

    let mut drl: Option<Toolpath> = None;
    let mut paths = Vec::with_capacity(args.strategies.len());
    for &s in &args.strategies {
        let path = match s {
            StrategyName::Drl => {
                if drl.is_none() {
                    drl = Some(drl_path(args.model.as_deref(), &grid, &cfg)?);
                }
                drl.clone().expect("drl path generated")
            }
            other => baseline_path(other, &grid, &cfg)?,
        };
        paths.push(path);
    }

    let traces: Vec<MeltPoolTrace> = paths
        .par_iter()
        .map(|p| simulate(p, &thermal).context("thermal simulation"))
        .collect::<Result<_>>()?;

    let coeff = cfg.env.sensitive_coeff;
    let mut rows = Vec::with_capacity(paths.len());
    for ((&strategy, path), trace) in args.strategies.iter().zip(&paths).zip(&traces) {
        let stats = depth_stats(trace).with_context(|| format!("{} has no laser-on steps", strategy.as_str()))?;
        rows.push(CompareRow {
            strategy,
            avg_depth_um: stats.avg,
            peak_depth_um: stats.peak,
            sensitive_count: detect_sensitive_regions(path, coeff).count(),
            void_moves: path.void_moves(),
            path_length_mm: path.length(),
        });
    }

    let mut out = OutputDir::create(&args.common.out, "compare")?;
    let mut summary = String::from("strategy,avg_depth_um,peak_depth_um,sensitive_count,void_moves,path_length_mm\n");
    let mut series = Vec::new();
    for (k, ((row, path), trace)) in rows.iter().zip(&paths).zip(&traces).enumerate() {
        let name = row.strategy.as_str();
        out.write(&format!("depth_{k}_{name}.csv"), &depth_csv(trace))?;
        write_toolpath(&mut out, &format!("toolpath_{k}_{name}"), path, &domain.polygon, json!({"strategy": name}), name)?;
        summary.push_str(&format!(
            "{name},{},{},{},{},{}\n",
            row.avg_depth_um, row.peak_depth_um, row.sensitive_count, row.void_moves, row.path_length_mm
        ));
        let points: Vec<(f64, f64)> = trace.samples.iter().enumerate().map(|(i, s)| (i as f64, s.depth_um)).collect();
        let peak = points.iter().copied().fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let mut s = Series::new(name, points);
        s.mean_line = Some(row.avg_depth_um);
        s.marker = Some(peak);
        series.push(s);
    }
    out.write("summary.csv", &summary)?;
    out.write("depth.svg", &line_chart("Melt-pool depth", "laser-on step", "depth (um)", &series))?;
    out.write(
        "comparison.json",
        &to_json(&json!({ "absorptivity": absorptivity, "hatch_um": cfg.geometry.hatch_um, "rows": rows })),
    )?;
    let manifest = out.finish(&cfg, absorptivity)?;
    Ok(CompareReport { rows, paths, traces, absorptivity, manifest })
}

// --------------------------------------------------------- export-gcode

#[derive(Debug, Clone)]
pub struct ExportArgs {
    pub toolpath: PathBuf,
    pub common: Common,
}

/// `program.gcode` from a toolpath file, isolated points removed.
pub fn cmd_export_gcode(args: &ExportArgs) -> Result<(GCodeProgram, RunManifest)> {
    let cfg = args.common.resolve()?;
    let file: ToolpathFile = crate::formats::read_json(&args.toolpath)?;
    let path = file.toolpath()?;
    let program = finetune_gcode(&path, cfg.pathplan.gap_threshold * path.hatch);
    let mut out = OutputDir::create(&args.common.out, "export-gcode")?;
    out.write("program.gcode", &program.to_text())?;
    let manifest = out.finish(&cfg, None)?;
    Ok((program, manifest))
}

// ---------------------------------------------------------- angle-study

#[derive(Debug, Clone, PartialEq)]
pub struct AngleStudy {
    pub absorptivity: Option<f64>,
    pub straight_depth_um: f64,
    pub rows: Vec<AngleDepth>,
}

/// Pool depth at the vertex of two-leg templates over the standard angles
/// plus `sweep_angles`, after calibration.
pub fn run_angle_study(cfg: &Config) -> Result<AngleStudy> {
    let (thermal, absorptivity) = thermal_model(cfg)?;
    let t = &cfg.thermal;
    let straight_depth_um = straight_scan_depth(&thermal, t.calibration_length_mm)?;
    let mut angles: Vec<f64> = TEMPLATE_ANGLES.to_vec();
    for &a in &t.sweep_angles {
        if !angles.contains(&a) {
            angles.push(a);
        }
    }
    angles.sort_by(|a, b| b.total_cmp(a));
    let rows = angle_template_study(&angles, &thermal, t.template_leg_mm, t.vertex_window_mm)?;
    Ok(AngleStudy { absorptivity, straight_depth_um, rows })
}

#[derive(Debug, Clone)]
pub struct AngleArgs {
    pub common: Common,
}

pub fn cmd_angle_study(args: &AngleArgs) -> Result<(AngleStudy, RunManifest)> {
    let cfg = args.common.resolve()?;
    let study = run_angle_study(&cfg)?;
    let mut out = OutputDir::create(&args.common.out, "angle-study")?;
    out.write("angle_study.csv", &angle_csv(&study.rows))?;
    let mut series = Series::new("max depth", study.rows.iter().map(|r| (r.angle_deg, r.depth_um)).collect());
    series.mean_line = Some(study.straight_depth_um);
    out.write("angle_study.svg", &line_chart("Pool depth at the turn", "turning angle (deg)", "depth (um)", &[series]))?;
    let rows: Vec<_> = study.rows.iter().map(|r| json!({"angle_deg": r.angle_deg, "depth_um": r.depth_um})).collect();
    out.write(
        "calibration.json",
        &to_json(&json!({
            "absorptivity": study.absorptivity,
            "straight_depth_um": study.straight_depth_um,
            "rows": rows,
        })),
    )?;
    let manifest = out.finish(&cfg, study.absorptivity)?;
    Ok((study, manifest))
}
