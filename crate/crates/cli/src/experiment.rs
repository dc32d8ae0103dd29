use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use dellab::construction::InnerCodebook;
use dellab::io::parse_codebook;
use dellab::oblivious::{experiment_pool, oblivious_trial, ExperimentConfig, FMode, PatternFamily, SamplingPlan};
use dellab::online::{
    simulate_online, AdversaryFactory, Draw, DrawPolicy, OnlineAdversary, OnlineConfig, OnlineDecoder, Strategy,
    WaitPushSetup,
};
use dellab::Word;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::output::{emit, master_seed, read_input, to_csv, to_json};
use crate::params::ParamFile;

pub const OBLIVIOUS_HEADER: [&str; 5] = ["seed", "pattern_id", "pattern_weight", "code_size", "error_fraction"];
pub const ONLINE_HEADER: [&str; 8] = [
    "trial",
    "codeword_index",
    "strategy",
    "coin_bit",
    "deletions_used",
    "output_len",
    "decoded_ok",
    "confused",
];

#[derive(Debug, Subcommand)]
pub enum ExperimentKind {
    /// Sampled outer codes against oblivious pattern families.
    Oblivious(ObliviousArgs),
    /// A binary code against the wait-push online adversary.
    Online(OnlineArgs),
}

#[derive(Debug, Args)]
pub struct ObliviousArgs {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Where to write the summary JSON; stderr if absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderArg {
    Unique,
    /// Most embeddings of the output.
    Ml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DrawArg {
    /// Fresh fair coins per trial.
    Random,
    /// Always wait-push with the transmitted word's own bit.
    Correct,
    /// Always wait-push keeping zeros.
    Push0,
    /// Always wait-push keeping ones.
    Push1,
    /// Always delete the tail.
    Truncate,
}

#[derive(Debug, Args, Serialize)]
pub struct OnlineArgs {
    /// Binary codebook, one codeword per line.
    #[arg(long)]
    pub code: PathBuf,
    /// Deletion fraction of the channel.
    #[arg(long)]
    pub p: f64,
    /// Deletion fraction the code is assumed to tolerate.
    #[arg(long = "p0-adv")]
    pub p0_adv: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = DecoderArg::Unique)]
    pub decoder: DecoderArg,
    /// Fixing the draw makes the adversary deterministic.
    #[arg(long, value_enum, default_value_t = DrawArg::Random)]
    pub draw: DrawArg,
    #[arg(long)]
    #[serde(skip)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Structured,
    Uniform,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FModeName {
    #[default]
    Exact,
    MonteCarlo,
}

fn default_true() -> bool {
    true
}

/// The JSON config of an oblivious experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObliviousConfig {
    pub params: ParamFile,
    /// Deleted fraction of the code bits.
    pub p: f64,
    pub family: FamilyName,
    /// Number of uniform patterns per seed.
    #[serde(default)]
    pub uniform_count: usize,
    pub code_size: f64,
    #[serde(default = "default_true")]
    pub filtered: bool,
    #[serde(default)]
    pub f_mode: FModeName,
    #[serde(default)]
    pub f_trials: Option<u64>,
    pub seeds: u64,
    /// Decay exponent of the filter; derived from K and R if absent.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Filter threshold on f(Y); overrides `beta`.
    #[serde(default)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Summary<C: Serialize, S: Serialize> {
    version: &'static str,
    seed: u64,
    config: C,
    #[serde(flatten)]
    stats: S,
}

#[derive(Debug, Serialize)]
struct ObliviousStats {
    pool_size: usize,
    rows: usize,
    mean_error: f64,
    sd_error: f64,
    mean_code_size: f64,
}

#[derive(Debug, Serialize)]
struct OnlineStats {
    codewords: usize,
    budget: usize,
    in_regime: bool,
    paired_fraction: f64,
    error_rate: f64,
    confusion_mass: f64,
    max_deletions: usize,
    budget_violations: usize,
}

fn mean_sd(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    (mean, var.sqrt())
}

fn summary_out(path: Option<&std::path::Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(_) => emit(path, bytes),
        None => {
            eprint!("{}", String::from_utf8_lossy(bytes));
            Ok(())
        }
    }
}

impl ObliviousConfig {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let family = match self.family {
            FamilyName::Structured => PatternFamily::Structured,
            FamilyName::Uniform => PatternFamily::Uniform { count: self.uniform_count },
            FamilyName::Both => PatternFamily::Both { count: self.uniform_count },
        };
        let f_mode = match self.f_mode {
            FModeName::Exact => FMode::Exact,
            FModeName::MonteCarlo => FMode::MonteCarlo {
                trials: self.f_trials.context("monte-carlo f_mode needs f_trials")?,
            },
        };
        if !(0.0..=1.0).contains(&self.p) {
            bail!("p = {} outside [0, 1]", self.p);
        }
        if self.code_size <= 0.0 {
            bail!("code_size must be positive");
        }
        Ok(ExperimentConfig {
            p: self.p,
            family,
            code_size: self.code_size,
            filtered: self.filtered,
            f_mode,
        })
    }

    fn plan(&self, book: &InnerCodebook) -> Result<SamplingPlan> {
        let n = book.params.n;
        let beta = match (self.threshold, self.beta) {
            (Some(t), _) => {
                if !(t > 0.0 && t <= 2.0) {
                    bail!("threshold {t} outside (0, 2]");
                }
                (1.0 - t.log2()) / n as f64
            }
            (None, Some(b)) => b,
            (None, None) => return Ok(SamplingPlan::from_params(&book.params)?),
        };
        Ok(SamplingPlan::new(beta, n, Some(self.code_size))?)
    }
}

pub fn oblivious(args: &ObliviousArgs, seed: Option<u64>, out: Option<&std::path::Path>) -> Result<()> {
    let text = read_input(Some(&args.config))?;
    let cfg: ObliviousConfig =
        serde_json::from_str(&text).with_context(|| format!("bad config {}", args.config.display()))?;
    let mut pf = cfg.params.clone();
    pf.mode.get_or_insert(dellab::construction::Mode::Toy);
    let params = pf.resolve()?;
    let book = InnerCodebook::new(&params)?;
    let exp = cfg.experiment()?;
    let plan = cfg.plan(&book)?;
    params.total_len()?;
    let master = master_seed(seed);

    let pool = experiment_pool(&book, &plan, &exp, master)?;
    let rows = (0..cfg.seeds)
        .into_par_iter()
        .map(|s| oblivious_trial(&book, &pool, &exp, master, s))
        .collect::<dellab::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();

    let (mean_error, sd_error) = mean_sd(rows.iter().map(|r| r.error_fraction));
    let summary = Summary {
        version: env!("CARGO_PKG_VERSION"),
        seed: master,
        config: &cfg,
        stats: ObliviousStats {
            pool_size: pool.len(),
            rows: rows.len(),
            mean_error,
            sd_error,
            mean_code_size: mean_sd(rows.iter().map(|r| r.code_size as f64)).0,
        },
    };
    emit(out, &to_csv(&OBLIVIOUS_HEADER, &rows)?)?;
    summary_out(args.summary.as_deref(), &to_json(&summary)?)
}

pub fn online(args: &OnlineArgs, seed: Option<u64>, out: Option<&std::path::Path>) -> Result<()> {
    let code: Vec<Word> = parse_codebook(&read_input(Some(&args.code))?)?;
    if code.is_empty() {
        bail!("{} holds no codewords", args.code.display());
    }
    let cfg = OnlineConfig::new(args.p, args.p0_adv)?;
    let policy = match args.draw {
        DrawArg::Random => DrawPolicy::Random,
        DrawArg::Correct => DrawPolicy::CorrectForCodeword,
        DrawArg::Push0 | DrawArg::Push1 => DrawPolicy::Fixed(Draw {
            strategy: Strategy::WaitPush,
            bit: args.draw == DrawArg::Push1,
        }),
        DrawArg::Truncate => DrawPolicy::Fixed(Draw {
            strategy: Strategy::Truncate,
            bit: false,
        }),
    };
    let setup = WaitPushSetup::new(code, cfg, policy)?;
    let decoder = match args.decoder {
        DecoderArg::Unique => OnlineDecoder::Unique,
        DecoderArg::Ml => OnlineDecoder::MostEmbeddings,
    };
    let master = master_seed(seed);
    let factory = |s: u64, w: &Word| -> Box<dyn OnlineAdversary> { Box::new(setup.adversary(s, w)) };
    let report = simulate_online(
        &setup.code,
        &factory as &AdversaryFactory<'_>,
        decoder,
        setup.budget(),
        args.trials,
        master,
        true,
    )?;
    let summary = Summary {
        version: env!("CARGO_PKG_VERSION"),
        seed: master,
        config: args,
        stats: OnlineStats {
            codewords: setup.code.len(),
            budget: report.budget,
            in_regime: setup.cfg.in_regime(),
            paired_fraction: setup.table.paired_fraction(),
            error_rate: report.error_rate,
            confusion_mass: report.confusion_mass,
            max_deletions: report.max_deletions,
            budget_violations: report.budget_violations,
        },
    };
    emit(out, &to_csv(&ONLINE_HEADER, &report.rows)?)?;
    summary_out(args.summary.as_deref(), &to_json(&summary)?)
}
