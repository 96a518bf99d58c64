//! `ftsurf`: train, evaluate and compare fault-tolerant surfacing policies.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ftsurf::faults::{enumerate_fault_set, FaultMask};
use ftsurf::harness::{
    check_policy_shape, compare, comparison_table, evaluate, run_episode, run_training,
    write_comparison_csv, write_trajectory_csv, Controller, ExperimentConfig, TransferSpec,
};
use ftsurf::nn::{load_checkpoint, save_checkpoint, transfer_layers, Checkpoint, NetworkWeights};
use ftsurf::{Error, Platform};
use rand::SeedableRng;

#[derive(Parser)]
#[command(name = "ftsurf", version, about = "Fault-tolerant surfacing of underwater vehicles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where the experiment configuration comes from.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// Configuration file (TOML). Without it, platform defaults are used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Platform: hovering, torpedo or ucat. Must agree with the config file.
    #[arg(long)]
    platform: Option<Platform>,
    /// Master seed; overrides the config file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy with PPO.
    Train {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory; overrides the config file.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Episode budget; overrides the config file.
        #[arg(long)]
        max_episodes: Option<usize>,
        /// Checkpoint whose LSTM layers initialize the new network.
        #[arg(long, requires = "layers")]
        transfer_from: Option<PathBuf>,
        /// 1-based LSTM layers to copy, e.g. `1` or `1,2`.
        #[arg(long, value_delimiter = ',', requires = "transfer_from")]
        layers: Vec<usize>,
        /// Continue from a training checkpoint.
        #[arg(long, conflicts_with = "transfer_from")]
        resume: Option<PathBuf>,
    },
    /// Evaluate a policy with deterministic (mean) actions.
    Eval {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Use the full enumerated fault set (U-CAT).
        #[arg(long, conflicts_with = "mask")]
        enumerate: bool,
        /// Fault mask, e.g. `FL/RR` or `none`. Repeatable.
        #[arg(long)]
        mask: Vec<String>,
        #[arg(long, default_value_t = 2)]
        trials: usize,
        /// Report CSV (default: `<output_dir>/eval.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// RL policy against the PID baseline over the U-CAT fault set.
    Compare {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 2)]
        trials: usize,
        /// Comparison CSV (default: `<output_dir>/compare.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Record one episode as a per-step trajectory CSV.
    Replay {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Fault mask; sampled from the config when omitted.
        #[arg(long)]
        mask: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Copy LSTM layers from one checkpoint into another.
    Transfer {
        #[arg(long)]
        from: PathBuf,
        /// Target checkpoint; a fresh network for `--platform` when omitted.
        #[arg(long, required_unless_present = "platform")]
        to: Option<PathBuf>,
        #[arg(long)]
        platform: Option<Platform>,
        /// Seed for the fresh target network.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        layers: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the enumerated fault set.
    EnumerateFaults {
        #[arg(long, default_value = "ucat")]
        platform: Platform,
    },
    /// Print (or write) the full default configuration for a platform.
    DefaultConfig {
        #[arg(long)]
        platform: Platform,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) | Error::InvalidMask(_) => 1,
            Error::Divergence(_) => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn resolve(args: &ConfigArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match (&args.config, args.platform) {
        (Some(path), p) => {
            let cfg = ExperimentConfig::load(path)?;
            if let Some(p) = p.filter(|p| *p != cfg.platform) {
                return Err(usage(format!(
                    "--platform {p} disagrees with {} (platform = {})",
                    path.display(),
                    cfg.platform
                )));
            }
            cfg
        }
        (None, Some(p)) => ExperimentConfig::default_for(p),
        (None, None) => return Err(usage("either --config or --platform is required")),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Load a checkpoint's network and make sure it fits `platform`.
fn load_policy(path: &Path, platform: Platform) -> Result<NetworkWeights, Failure> {
    let ckpt = load_checkpoint(path).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })?;
    let w = ckpt.weights()?;
    check_policy_shape(&w, platform).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })?;
    Ok(w)
}

fn default_out(cfg: &ExperimentConfig, out: Option<PathBuf>, name: &str) -> PathBuf {
    out.unwrap_or_else(|| cfg.output_dir.join(name))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Train {
            cfg,
            output,
            threads,
            max_episodes,
            transfer_from,
            layers,
            resume,
        } => {
            let mut cfg = resolve(&cfg)?;
            if let Some(o) = output {
                cfg.output_dir = o;
            }
            if let Some(t) = threads {
                cfg.train.threads = t;
            }
            if let Some(m) = max_episodes {
                cfg.train.max_episodes = m;
            }
            cfg.validate()?;
            let source = match &transfer_from {
                Some(p) => {
                    let w = load_checkpoint(p)?.weights()?;
                    // Pre-flight: the copied layers must fit the new network.
                    let fresh = NetworkWeights::zeros(&cfg.net_config());
                    transfer_layers(&w, &fresh, &layers)?;
                    Some(w)
                }
                None => None,
            };
            let transfer = source.as_ref().map(|w| TransferSpec {
                source: w,
                layers: &layers,
                origin: transfer_from.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            });
            let resume_ckpt: Option<Checkpoint> = match &resume {
                Some(p) => {
                    let c = load_checkpoint(p)?;
                    check_policy_shape(&c.weights()?, cfg.platform)?;
                    Some(c)
                }
                None => None,
            };
            let s = run_training(&cfg, transfer, resume_ckpt.as_ref(), |line| eprintln!("{line}"))?;
            println!(
                "{}: {} after {} episodes (criterion at {}), checkpoint {}",
                s.platform,
                s.outcome,
                s.episodes,
                s.episodes_to_criterion.map_or("-".to_string(), |e| e.to_string()),
                s.final_checkpoint.display()
            );
        }
        Command::Eval {
            cfg,
            checkpoint,
            enumerate,
            mask,
            trials,
            out,
        } => {
            let cfg = resolve(&cfg)?;
            let masks: Vec<FaultMask> = if enumerate {
                enumerate_fault_set(cfg.platform).map_err(|e| usage(e.to_string()))?
            } else if !mask.is_empty() {
                mask.iter()
                    .map(|m| FaultMask::parse(cfg.platform, m))
                    .collect::<Result<_, _>>()?
            } else {
                return Err(usage("give --enumerate or at least one --mask"));
            };
            let weights = load_policy(&checkpoint, cfg.platform)?;
            let report = evaluate(&cfg.env()?, Controller::Policy(&weights), &masks, trials, cfg.seed)?;
            let path = default_out(&cfg, out, "eval.csv");
            report.write_csv(&path, &cfg.hash())?;
            print!("{}", report.table());
            println!("report written to {}", path.display());
        }
        Command::Compare {
            cfg,
            checkpoint,
            trials,
            out,
        } => {
            let cfg = resolve(&cfg)?;
            if cfg.platform != Platform::Ucat {
                return Err(usage("compare runs on the ucat platform"));
            }
            let weights = load_policy(&checkpoint, cfg.platform)?;
            let (rl, pid) = compare(&cfg.env()?, &weights, &cfg.baseline, trials, cfg.seed)?;
            let path = default_out(&cfg, out, "compare.csv");
            write_comparison_csv(&path, &[&rl, &pid], &cfg.hash())?;
            print!("{}", rl.table());
            print!("{}", pid.table());
            print!("{}", comparison_table(&[&rl, &pid]));
            println!("comparison written to {}", path.display());
        }
        Command::Replay {
            cfg,
            checkpoint,
            mask,
            out,
        } => {
            let cfg = resolve(&cfg)?;
            let mut env = cfg.env()?;
            if let Some(m) = &mask {
                env.fault_override = Some(FaultMask::parse(cfg.platform, m)?);
            }
            let weights = load_policy(&checkpoint, cfg.platform)?;
            let r = run_episode(&mut env, Controller::Policy(&weights), cfg.seed)?;
            write_trajectory_csv(&out, &r, &cfg.hash(), cfg.seed)?;
            println!(
                "{} steps, fault mask {}, {} in {:.2} s; trajectory written to {}",
                r.rows.len(),
                r.mask,
                if r.success { "surfaced" } else { "did not surface" },
                r.elapsed,
                out.display()
            );
        }
        Command::Transfer {
            from,
            to,
            platform,
            seed,
            layers,
            out,
        } => {
            let src = load_checkpoint(&from)?.weights()?;
            let mut target = match &to {
                Some(p) => load_checkpoint(p)?,
                None => {
                    let p = platform.expect("clap requires --platform without --to");
                    let net = ExperimentConfig::default_for(p).net_config();
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    Checkpoint::from_weights(&NetworkWeights::init(&net, &mut rng)?)
                }
            };
            let merged = transfer_layers(&src, &target.weights()?, &layers)?;
            // Keep the target's metadata; optimizer moments no longer apply.
            target.tensors = merged.to_tensors();
            target.meta.insert("transfer_from".into(), from.display().to_string());
            let l: Vec<String> = layers.iter().map(|l| l.to_string()).collect();
            target.meta.insert("transfer_layers".into(), l.join(","));
            save_checkpoint(&target, &out)?;
            println!("copied layers {} into {}", l.join(","), out.display());
        }
        Command::EnumerateFaults { platform } => {
            let masks = enumerate_fault_set(platform).map_err(|e| usage(e.to_string()))?;
            for m in &masks {
                println!("{m}");
            }
            eprintln!("{} masks", masks.len());
        }
        Command::DefaultConfig { platform, out } => {
            let text = ExperimentConfig::default_for(platform).to_toml();
            match out {
                Some(p) => std::fs::write(&p, text).map_err(Error::from)?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
