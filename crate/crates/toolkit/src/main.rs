use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lpbf_toolkit::commands::{
    cmd_angle_study, cmd_baseline, cmd_compare, cmd_export_gcode, cmd_generate, cmd_train, AngleArgs, BaselineArgs,
    Common, CompareArgs, ExportArgs, GenerateArgs, GenerateMode, StrategyName, TrainArgs,
};
use lpbf_toolkit::{Overrides, CONFIG_ENV};

#[derive(Debug, Parser)]
#[command(name = "lpbf", version, about = "Scan-path generation and melt-pool comparison for laser powder bed fusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonFlags {
    /// TOML configuration file.
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Seed for the learner and the Voronoi seed generator.
    #[arg(long)]
    seed: Option<u64>,
    /// Hatch spacing, um.
    #[arg(long)]
    hatch_um: Option<f64>,
    /// Training episodes.
    #[arg(long)]
    episodes: Option<usize>,
}

impl CommonFlags {
    fn common(self) -> Common {
        Common {
            config: self.config,
            overrides: Overrides { hatch_um: self.hatch_um, episodes: self.episodes, seed: self.seed },
            out: self.out,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a scan policy on a domain.
    Train {
        #[arg(long)]
        domain: PathBuf,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Generate a toolpath from a trained model.
    Generate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, value_enum, default_value_t = GenerateMode::Direct)]
        mode: GenerateMode,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Generate a reference toolpath (zigzag, chessboard or atg).
    Baseline {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, value_enum)]
        strategy: StrategyName,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Simulate several strategies on one domain and compare pool depths.
    Compare {
        #[arg(long)]
        domain: PathBuf,
        /// Strategies to compare, comma separated or repeated.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [StrategyName::Zigzag, StrategyName::Atg, StrategyName::Drl])]
        strategy: Vec<StrategyName>,
        /// Trained model for `drl`; trained on the domain when omitted.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Write the G-code program for a toolpath file.
    ExportGcode {
        #[arg(long)]
        toolpath: PathBuf,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Pool depth at the turn of two-leg templates.
    AngleStudy {
        #[command(flatten)]
        common: CommonFlags,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { domain, common } => {
            let r = cmd_train(&TrainArgs { domain, common: common.common() })?;
            let s = &r.outcome.policy_summary;
            println!(
                "policy from episode {}: reward {:.4}, sensitive regions {}, collisions {}",
                r.outcome.policy_episode + 1,
                s.total_reward,
                s.sensitive,
                s.collisions
            );
        }
        Command::Generate { model, domain, mode, common } => {
            let r = cmd_generate(&GenerateArgs { model, domain, mode, common: common.common() })?;
            println!("{} moves, {} laser-off", r.path.len(), r.path.void_moves());
            if let Some(plan) = &r.plan {
                println!("{} islands", plan.islands.len());
            }
        }
        Command::Baseline { domain, strategy, common } => {
            let (path, _) = cmd_baseline(&BaselineArgs { domain, strategy, common: common.common() })?;
            println!("{} moves, {} laser-off", path.len(), path.void_moves());
        }
        Command::Compare { domain, strategy, model, common } => {
            let r = cmd_compare(&CompareArgs { domain, strategies: strategy, model, common: common.common() })?;
            println!("{:<12} {:>10} {:>10} {:>9} {:>6} {:>10}", "strategy", "avg_um", "peak_um", "sensitive", "voids", "length_mm");
            for row in &r.rows {
                println!(
                    "{:<12} {:>10.2} {:>10.2} {:>9} {:>6} {:>10.2}",
                    row.strategy.as_str(),
                    row.avg_depth_um,
                    row.peak_depth_um,
                    row.sensitive_count,
                    row.void_moves,
                    row.path_length_mm
                );
            }
        }
        Command::ExportGcode { toolpath, common } => {
            let (program, _) = cmd_export_gcode(&ExportArgs { toolpath, common: common.common() })?;
            println!("{} moves, {} feeds", program.len(), program.feed_count());
        }
        Command::AngleStudy { common } => {
            let (study, _) = cmd_angle_study(&AngleArgs { common: common.common() })?;
            if let Some(a) = study.absorptivity {
                println!("absorptivity {a:.4}");
            }
            println!("straight scan {:.2} um", study.straight_depth_um);
            for r in &study.rows {
                println!("{:>8.3} deg {:>8.2} um", r.angle_deg, r.depth_um);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
