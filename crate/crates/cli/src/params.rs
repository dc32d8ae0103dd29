use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use dellab::construction::{derive_params, rate, toy_params, CodeParams, InnerCodebook, Mode};
use serde::{Deserialize, Serialize};

/// Parameter fields as they appear in a JSON config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub mode: Option<Mode>,
    pub p: Option<f64>,
    pub n: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<u32>,
    #[serde(rename = "R")]
    pub r: Option<u64>,
    pub lambda: Option<u32>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// JSON file with {mode, p, n, K, R, lambda, delta}; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Explicit small sizes instead of sizes derived from p.
    #[arg(long)]
    pub toy: bool,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "K")]
    pub k: Option<u32>,
    #[arg(long = "R")]
    pub r: Option<u64>,
    #[arg(long)]
    pub lambda: Option<u32>,
    #[arg(long)]
    pub delta: Option<f64>,
}

impl ParamArgs {
    /// Config file values overlaid with the flags.
    pub fn merged(&self) -> Result<ParamFile> {
        let mut f = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("bad config {}", path.display()))?
            }
            None => ParamFile::default(),
        };
        if self.toy {
            f.mode = Some(Mode::Toy);
        }
        f.p = self.p.or(f.p);
        f.n = self.n.or(f.n);
        f.k = self.k.or(f.k);
        f.r = self.r.or(f.r);
        f.lambda = self.lambda.or(f.lambda);
        f.delta = self.delta.or(f.delta);
        Ok(f)
    }
}

impl ParamFile {
    /// Toy mode is implied by explicit sizes.
    pub fn resolve(&self) -> Result<CodeParams> {
        let toy = match self.mode {
            Some(m) => m == Mode::Toy,
            None => self.k.is_some() || self.r.is_some(),
        };
        let Some(n) = self.n else { bail!("--n is required") };
        if toy {
            let (Some(k), Some(r)) = (self.k, self.r) else {
                bail!("toy parameters need --K and --R");
            };
            let lambda = self.lambda.context("toy parameters need --lambda")?;
            let delta = self.delta.context("toy parameters need --delta")?;
            Ok(toy_params(k, r, lambda, delta, n)?)
        } else {
            let p = self.p.context("--p is required unless --toy is given")?;
            Ok(derive_params(p, n)?)
        }
    }

    /// Toy codebook with `λ = 1`, `n` taken from the data and `δ = 2/n`
    /// when those are not given.
    pub fn toy_codebook(&self, data_n: Option<usize>) -> Result<InnerCodebook> {
        let mut f = self.clone();
        if f.mode == Some(Mode::Full) {
            bail!("encoding needs toy parameters");
        }
        f.mode = Some(Mode::Toy);
        f.n = f.n.or(data_n);
        f.lambda = f.lambda.or(Some(1));
        if let (None, Some(n)) = (f.delta, f.n) {
            f.delta = Some(2.0 / n as f64);
        }
        let params = f.resolve()?;
        Ok(InnerCodebook::new(&params)?)
    }
}

#[derive(Debug, Serialize)]
struct ParamsReport {
    params: CodeParams,
    rate: dellab::construction::Rate,
    kept_blocks: usize,
    /// Total length `N = nL` when it fits.
    total_len: Option<usize>,
}

pub fn report(params: CodeParams) -> Result<Vec<u8>> {
    let r = rate(&params);
    crate::output::to_json(&ParamsReport {
        kept_blocks: params.kept(),
        total_len: params.total_len().ok(),
        rate: r,
        params,
    })
}
