use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aircap_arena::harness::baselines::Strategy;
use aircap_arena::harness::config::{ExperimentConfig, Mode};
use aircap_arena::harness::eval::{run_eval, Controller};
use aircap_arena::harness::report::{emit_reports, Summary};
use aircap_arena::harness::{eval_config, evaluate_checkpoint, HarnessError};
use aircap_arena::replay::read_replay;
use aircap_arena::rl::checkpoint::Checkpoint;
use aircap_arena::rl::train::Trainer;
use aircap_arena::rl::worker_threads;
use aircap_arena::variant::NetworkVariant;

#[derive(Parser)]
#[command(
    name = "aircap-arena",
    version,
    about = "Aerial motion-capture simulator, PPO trainer and evaluator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a network variant with PPO
    Train {
        #[arg(long)]
        variant: Option<NetworkVariant>,
        #[command(flatten)]
        common: Common,
        /// Override the configured iteration count
        #[arg(long)]
        iterations: Option<u64>,
        /// Warm-start the actor from another variant's checkpoint
        #[arg(long)]
        curriculum: Option<PathBuf>,
        /// Continue from <out>/checkpoint.json
        #[arg(long)]
        resume: bool,
    },
    /// Evaluate a trained checkpoint on the fixed test walk
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Fail unless the checkpoint was trained for this variant
        #[arg(long)]
        variant: Option<NetworkVariant>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Evaluate a scripted strategy on the fixed test walk
    Baseline {
        #[arg(long)]
        strategy: Option<Strategy>,
        /// Variant whose world (agent count, rewards) is used
        #[arg(long)]
        variant: Option<NetworkVariant>,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Print a replay log as a table
    Replay {
        #[arg(long)]
        log: PathBuf,
        /// Print every n-th record
        #[arg(long, default_value_t = 1)]
        every: usize,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to AIRCAP_ARENA_THREADS or all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Evaluation length in seconds
    #[arg(long)]
    duration: Option<f64>,
}

impl Common {
    fn load(&self, mode: Mode) -> Result<(ExperimentConfig, usize), HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        cfg.mode = mode;
        if let Some(s) = self.seed {
            cfg.seed = s;
            cfg.train.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(d) = self.duration {
            cfg.duration_s = d;
        }
        Ok((cfg, self.threads.unwrap_or_else(worker_threads)))
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train {
            variant,
            common,
            iterations,
            curriculum,
            resume,
        } => {
            let (mut cfg, threads) = common.load(Mode::Train)?;
            if let Some(v) = variant {
                cfg.variant = v;
            }
            if let Some(n) = iterations {
                cfg.train.iterations = n;
            }
            cfg.validate()?;
            let ck_path = cfg.out_dir.join("checkpoint.json");
            let mut trainer = if resume {
                let ck = Checkpoint::load(&ck_path)?;
                if ck.variant != cfg.variant {
                    return Err(HarnessError::CheckpointMismatch {
                        expected: cfg.variant,
                        found: ck.variant,
                    });
                }
                let mut t = Trainer::from_checkpoint(ck)?;
                t.config.iterations = cfg.train.iterations;
                t
            } else {
                Trainer::new(cfg.variant, cfg.env, cfg.train)?
            };
            if let Some(p) = curriculum {
                let src = Checkpoint::load(&p)?;
                trainer.warm_start(&src.policy, src.variant)?;
                println!(
                    "warm-started from {} (network {})",
                    p.display(),
                    src.variant
                );
            }
            println!(
                "training network {} for {} iterations on {threads} thread(s)",
                cfg.variant, trainer.config.iterations
            );
            trainer.run(Some(&cfg.out_dir), threads, |m| {
                println!(
                    "iter {:>5}  reward {:>10.3}  actor {:>9.4}  critic {:>10.4}  clip {:.3}  kl {:.5}",
                    m.iteration, m.mean_ep_reward, m.actor_loss, m.critic_loss, m.clip_fraction, m.approx_kl
                )
            })?;
            println!("wrote {}", ck_path.display());
            Ok(())
        }
        Command::Eval {
            checkpoint,
            variant,
            common,
            runs,
        } => {
            let (mut cfg, threads) = common.load(Mode::Eval)?;
            if let Some(r) = runs {
                cfg.runs = r;
            }
            cfg.validate()?;
            let ck = Checkpoint::load(&checkpoint)?;
            let (report, replays) = evaluate_checkpoint(&ck, variant, &cfg, threads)?;
            let summary = emit_reports(&report, &replays, &cfg.out_dir)?;
            print_summary(&summary);
            Ok(())
        }
        Command::Baseline {
            strategy,
            variant,
            common,
            runs,
        } => {
            let (mut cfg, threads) = common.load(Mode::Baseline)?;
            if let Some(s) = strategy {
                cfg.strategy = s;
            }
            if let Some(v) = variant {
                cfg.variant = v;
            }
            if let Some(r) = runs {
                cfg.runs = r;
            }
            cfg.validate()?;
            let (report, replays) = run_eval(
                cfg.variant,
                Controller::Strategy(cfg.strategy, cfg.baseline),
                &cfg.env,
                &eval_config(&cfg),
                &format!("{} baseline", cfg.strategy),
                threads,
            )?;
            let summary = emit_reports(&report, &replays, &cfg.out_dir)?;
            print_summary(&summary);
            Ok(())
        }
        Command::Replay { log, every } => {
            let records = read_replay(BufReader::new(File::open(&log)?))?;
            println!("{} records", records.len());
            println!(
                "{:>6} {:>8}  {:>26}  {:>26}  mavs",
                "step", "time", "person", ""
            );
            for r in records.iter().step_by(every.max(1)) {
                let p = r.person.root;
                let mavs: Vec<String> = r
                    .mavs
                    .iter()
                    .map(|m| {
                        format!(
                            "({:.2}, {:.2}, {:.2}) yaw {:.2}",
                            m.position.x, m.position.y, m.position.z, m.yaw
                        )
                    })
                    .collect();
                let reward: Vec<String> = r
                    .rewards
                    .iter()
                    .map(|b| format!("{:.3}", b.total))
                    .collect();
                println!(
                    "{:>6} {:>8.2}  ({:>6.2}, {:>6.2}, {:>5.2})  {}  r=[{}]",
                    r.step,
                    r.time,
                    p.x,
                    p.y,
                    p.z,
                    mavs.join("  "),
                    reward.join(", ")
                );
            }
            Ok(())
        }
    }
}

fn print_summary(s: &Summary) {
    println!("{}: {} run(s), {} agent(s)", s.label, s.runs, s.agents);
    if let Some(v) = s.visibility_fraction {
        println!("  visibility  {:.3}", v);
    }
    for (name, m) in &s.metrics {
        if let Some(d) = &m.pooled {
            println!(
                "  {name:<20} median {:>9.4}  [p5 {:.4}, p95 {:.4}]  n={}",
                d.p50, d.p5, d.p95, d.count
            );
        }
    }
    if let Some(d) = s.min_inter_mav_distance {
        println!("  min inter-MAV distance {:.3} m", d);
    }
}
