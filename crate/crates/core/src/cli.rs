//! Command-line front end: `gen-data`, `train`, `eval`, `matrix`, `report`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::DqnAgent;
use crate::curriculum::{build_buffers, DifficultyLevel, ScheduleName};
use crate::dialog::RewardConfig;
use crate::error::{Error, Result};
use crate::goal::{default_goal_counts, generate_goal_set, save_goals};
use crate::kb::{generate_kb, KnowledgeBase};
use crate::ontology::ActionRoster;
use crate::trainer::{
    derive_run_seed, evaluate_policy, evaluate_rule_agent, run_experiment, Method, RunConfig,
    DEFAULT_DATA_SEED, DEFAULT_KB_SIZE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "scddq", version, about = "Scheduled curiosity-driven Deep Dyna-Q dialog policy learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a knowledge base and goal set.
    GenData {
        #[arg(long, default_value_t = DEFAULT_DATA_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_KB_SIZE as u64, value_parser = clap::value_parser!(u64).range(1..))]
        movies: u64,
        /// Goal counts per request-slot count, e.g. `1=61,2=16,3=17,4=34,5=9`.
        #[arg(long)]
        goals_spec: Option<String>,
        #[arg(long, default_value = "data")]
        out_dir: PathBuf,
    },
    /// Train one run from a JSON config.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `out_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a saved agent checkpoint, or the rule-based agent.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// Agent checkpoint; omit together with `--rule`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        rule: bool,
        #[arg(long, default_value = "all", value_parser = parse_level)]
        level: DifficultyLevel,
        #[arg(long, default_value_t = 50)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a grid of methods × schedules × seeds.
    Matrix {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Build tables and figure data from finished runs.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_level(s: &str) -> std::result::Result<DifficultyLevel, String> {
    match s.to_ascii_lowercase().as_str() {
        "easy" => Ok(DifficultyLevel::Easy),
        "middle" => Ok(DifficultyLevel::Middle),
        "difficult" => Ok(DifficultyLevel::Difficult),
        "all" => Ok(DifficultyLevel::All),
        _ => Err(format!("unknown level `{s}`")),
    }
}

/// Parses `1=61,2=16` into a count map.
pub fn parse_goal_counts(spec: &str) -> Result<BTreeMap<usize, usize>> {
    spec.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected k=v, found `{pair}`")))?;
            let k = k.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad slot count `{k}`")))?;
            let v = v.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad goal count `{v}`")))?;
            Ok((k, v))
        })
        .collect()
}

/// Grid description for `matrix`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    #[serde(default)]
    pub base: RunConfig,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub schedules: Vec<ScheduleName>,
    /// Seed labels; each becomes one run per (method, schedule).
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub master_seed: u64,
}

impl MatrixSpec {
    /// Unscheduled methods run once per seed with RANDOM goal sampling; scheduled
    /// methods run once per listed non-RANDOM schedule.
    pub fn expand(&self) -> Vec<RunConfig> {
        let mut runs = Vec::new();
        for &method in &self.methods {
            let schedules: Vec<ScheduleName> = if method.is_scheduled() {
                self.schedules
                    .iter()
                    .copied()
                    .filter(|s| *s != ScheduleName::Random)
                    .collect()
            } else {
                vec![ScheduleName::Random]
            };
            for schedule in schedules {
                for (i, &seed) in self.seeds.iter().enumerate() {
                    runs.push(RunConfig {
                        method,
                        schedule,
                        seed,
                        rng_seed: Some(derive_run_seed(self.master_seed, method, schedule, i as u64)),
                        ..self.base.clone()
                    });
                }
            }
        }
        runs
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_USAGE
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command) -> Result<i32> {
    match command {
        Command::GenData {
            seed,
            movies,
            goals_spec,
            out_dir,
        } => {
            let counts = match goals_spec {
                Some(s) => parse_goal_counts(&s)?,
                None => default_goal_counts(),
            };
            let (easy, middle, difficult) = gen_data(seed, movies as usize, &counts, &out_dir)?;
            println!("easy={easy} middle={middle} difficult={difficult}");
            Ok(EXIT_OK)
        }
        Command::Train { config, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            let res = run_experiment(cfg)?;
            for e in &res.evals {
                println!(
                    "epoch {:>3}  success {:.2}  turns {:.2}",
                    e.checkpoint_epoch, e.success_rate, e.avg_turns
                );
            }
            if let Some(dir) = res.run_dir {
                println!("{}", dir.display());
            }
            Ok(EXIT_OK)
        }
        Command::Eval {
            config,
            checkpoint,
            rule,
            level,
            episodes,
            seed,
        } => {
            let cfg = RunConfig::load(&config)?;
            cfg.validate()?;
            let (kb, goals) = cfg.load_data()?;
            let buffers = build_buffers(&goals)?;
            let roster = ActionRoster::default();
            let reward = RewardConfig::for_max_turns(cfg.max_turns)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pool = buffers.level(level);
            let summary = match (rule, checkpoint) {
                (true, _) => evaluate_rule_agent(&kb, &roster, reward, pool, episodes, &mut rng)?,
                (false, Some(path)) => {
                    let agent = DqnAgent::from_checkpoint(crate::io::read_json(&path)?)?;
                    evaluate_policy(&agent, None, &kb, &roster, reward, pool, episodes, &mut rng)?
                }
                (false, None) => {
                    return Err(Error::InvalidArgument("pass --checkpoint or --rule".into()));
                }
            };
            println!(
                "level={level} episodes={episodes} success_rate={:.4} avg_turns={:.4}",
                summary.success_rate, summary.avg_turns
            );
            Ok(EXIT_OK)
        }
        Command::Matrix { config, jobs } => {
            let spec: MatrixSpec = crate::io::read_json(&config)?;
            run_matrix(&spec, jobs)
        }
        Command::Report { runs, out } => {
            let report = crate::analysis::build_report(&runs, &out)?;
            println!("{} conditions", report.conditions.len());
            for c in &report.correlations {
                match c.r {
                    Some(r) => println!("stage {}: r = {r:.4} (n = {})", c.stage, c.n),
                    None => println!("stage {}: r undefined (n = {})", c.stage, c.n),
                }
            }
            Ok(EXIT_OK)
        }
    }
}

/// Writes `kb.json` and `goals.json`; returns the easy/middle/difficult counts.
pub fn gen_data(
    seed: u64,
    movies: usize,
    counts: &BTreeMap<usize, usize>,
    out_dir: &Path,
) -> Result<(usize, usize, usize)> {
    let kb: KnowledgeBase = generate_kb(seed, movies)?;
    let goals = generate_goal_set(&kb, counts, seed)?;
    kb.save(&out_dir.join("kb.json"))?;
    save_goals(&goals, &out_dir.join("goals.json"))?;
    Ok(build_buffers(&goals)?.counts())
}

/// Runs every configuration of the grid on up to `jobs` threads.
pub fn run_matrix(spec: &MatrixSpec, jobs: usize) -> Result<i32> {
    let runs = spec.expand();
    for r in &runs {
        r.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let results: Vec<(String, Result<()>)> = pool.install(|| {
        runs.into_par_iter()
            .map(|cfg| {
                let id = cfg.run_id();
                (id, run_experiment(cfg).map(|_| ()))
            })
            .collect()
    });
    let mut code = EXIT_OK;
    for (id, res) in &results {
        match res {
            Ok(()) => println!("{id}: ok"),
            Err(e) => {
                println!("{id}: failed: {e}");
                code = code.max(exit_code(e));
            }
        }
    }
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goal_count_spec() {
        let c = parse_goal_counts("1=61, 2=16,3=17").unwrap();
        assert_eq!(c, BTreeMap::from([(1, 61), (2, 16), (3, 17)]));
        assert!(parse_goal_counts("1:61").is_err());
    }

    #[test]
    fn full_grid_has_fifteen_runs_per_seed() {
        let spec = MatrixSpec {
            base: RunConfig::default(),
            methods: Method::ALL.to_vec(),
            schedules: ScheduleName::NAMED.to_vec(),
            seeds: vec![1],
            master_seed: 0,
        };
        let runs = spec.expand();
        assert_eq!(runs.len(), 15);
        assert!(runs.iter().all(|r| r.validate().is_ok()));
    }

    #[test]
    fn movies_zero_is_usage_error() {
        assert_eq!(run(["scddq", "gen-data", "--movies", "0"]), EXIT_USAGE);
    }
}
