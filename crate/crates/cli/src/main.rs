use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gpfsp::arena::{play_match, player_from_spec};
use gpfsp::cards::{equity_enumerate, equity_mc, parse_cards};
use gpfsp::engine::GameConfig;
use gpfsp::kuhn::exploitability;
use gpfsp::neural::load_checkpoint;
use gpfsp::strategy::project_simplex;
use gpfsp_cli::serve;
use gpfsp::trainer::{config_from_checkpoint, kuhn_average_policy, resume_training, run_training, GameKind, TrainerConfig};

/// Self-play training, evaluation and play for heads-up hold'em agents.
#[derive(Parser)]
#[command(name = "gpfsp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train two agents by self-play.
    Train {
        /// `key = value` config file; game defaults apply to missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Game whose defaults to start from when no config file is given.
        #[arg(long, default_value = "holdem")]
        game: String,
        /// Extra `key=value` overrides, applied after the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Directory for checkpoint.bin, metrics.csv and config.txt.
        #[arg(long)]
        out: PathBuf,
    },
    /// Continue a run from its checkpoint.
    Resume {
        #[arg(long)]
        checkpoint: PathBuf,
        /// New total episode count.
        #[arg(long)]
        episodes: Option<u64>,
    },
    /// Play a match between two players.
    ///
    /// A player is a baseline (CALL, RANDOM, HEURISTIC_MC, ALWAYS_FOLD) or
    /// a checkpoint path, optionally suffixed `@2` for the second agent.
    Eval {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 1000)]
        games: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plain alternating seats instead of mirrored deals.
        #[arg(long)]
        no_duplicate: bool,
        #[arg(long)]
        max_hands: Option<u32>,
        #[arg(long)]
        allow_free_fold: bool,
        /// Write A's chip delta of every hand here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Exploitability of a Kuhn checkpoint's average policies.
    KuhnExploitability {
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Serve the play API for one or more checkpoints.
    PlayServe {
        #[arg(long, required = true)]
        checkpoint: Vec<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Overrides host and port, e.g. `0.0.0.0:9000`.
        #[arg(long, env = "GPFSP_BIND")]
        bind: Option<String>,
        /// Minutes before an idle session is dropped.
        #[arg(long, default_value_t = serve::DEFAULT_IDLE_EXPIRY.as_secs() / 60)]
        idle_minutes: u64,
    },
    /// Equity of a hole against a random hand, e.g. `equity AsKd Qh7c2s`.
    Equity {
        hole: String,
        board: Option<String>,
        /// Monte-Carlo samples; exact enumeration when omitted.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Euclidean projection of a vector onto the probability simplex.
    Project {
        /// Comma or space separated numbers.
        #[arg(allow_hyphen_values = true, num_args = 1..)]
        vector: Vec<String>,
    },
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match Cli::parse().command {
        Command::Train {
            config,
            game,
            overrides,
            out,
        } => {
            let mut text = match &config {
                Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
                None => format!("game = {game}\n"),
            };
            for o in &overrides {
                if !o.contains('=') {
                    bail!("override {o:?} is not key=value");
                }
                text.push_str(o);
                text.push('\n');
            }
            let cfg = TrainerConfig::parse(&text)?;
            tracing::info!(game = cfg.game.name(), episodes = cfg.episodes, "training");
            let s = run_training(cfg, &out)?;
            println!(
                "episodes = {}\nhands = {}\ncheckpoint = {}\nmetrics = {}",
                s.episodes,
                s.hands,
                s.checkpoint.display(),
                s.metrics.display()
            );
        }
        Command::Resume { checkpoint, episodes } => {
            let s = resume_training(&checkpoint, episodes)?;
            println!("episodes = {}\nhands = {}\ncheckpoint = {}", s.episodes, s.hands, s.checkpoint.display());
        }
        Command::Eval {
            a,
            b,
            games,
            seed,
            no_duplicate,
            max_hands,
            allow_free_fold,
            csv,
        } => {
            let mut pa = player_from_spec(&a).with_context(|| format!("player {a}"))?;
            let mut pb = player_from_spec(&b).with_context(|| format!("player {b}"))?;
            let mut config = GameConfig::default();
            if let Some(n) = max_hands {
                config.max_hands_per_game = n;
            }
            config.allow_free_fold = allow_free_fold;
            let r = play_match(pa.as_mut(), pb.as_mut(), games, &config, seed, !no_duplicate)?;
            println!("{}", r.summary());
            if let Some(path) = csv {
                let mut out = String::from("hand,delta_a\n");
                for (i, d) in r.hand_deltas.iter().enumerate() {
                    out.push_str(&format!("{i},{d}\n"));
                }
                fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::KuhnExploitability { checkpoint } => {
            let ckpt = load_checkpoint(&checkpoint)?;
            if config_from_checkpoint(&ckpt)?.game != GameKind::Kuhn {
                bail!("{} is not a Kuhn checkpoint", checkpoint.display());
            }
            let policy = kuhn_average_policy(ckpt.require_network("pi1")?, ckpt.require_network("pi2")?)?;
            println!("exploitability = {:.6}", exploitability(&policy, &policy)?);
        }
        Command::PlayServe {
            checkpoint,
            port,
            host,
            bind,
            idle_minutes,
        } => {
            let agents = checkpoint
                .iter()
                .map(|p| serve::AgentEntry::load(p).with_context(|| format!("loading {}", p.display())))
                .collect::<Result<Vec<_>>>()?;
            let addr = bind.unwrap_or_else(|| format!("{host}:{port}"));
            let app = serve::AppState::new(agents, std::time::Duration::from_secs(idle_minutes * 60));
            tokio::runtime::Runtime::new()?.block_on(serve::serve(app, &addr))?;
        }
        Command::Equity {
            hole,
            board,
            samples,
            seed,
        } => {
            let hole = parse_cards(&hole)?;
            let board = board.as_deref().map(parse_cards).transpose()?.unwrap_or_default();
            let e = match samples {
                Some(n) => equity_mc(&hole, &board, n.max(1), seed)?,
                None => equity_enumerate(&hole, &board)?,
            };
            println!("equity = {:.4}\nsamples = {}", e.win_rate, e.samples);
        }
        Command::Project { vector } => {
            let values = vector
                .iter()
                .flat_map(|s| s.split([',', ' ']))
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().with_context(|| format!("{s:?} is not a number")))
                .collect::<Result<Vec<_>>>()?;
            let p = project_simplex(&values)?;
            let text: Vec<String> = p.probs().iter().map(|x| format!("{x}")).collect();
            println!("{}", text.join(" "));
        }
    }
    Ok(())
}
