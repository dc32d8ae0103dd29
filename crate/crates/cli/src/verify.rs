use anyhow::{bail, Result};
use clap::Args;
use dellab::oracles::{run_oracle, OracleId, OracleReport, VerifyOptions};
use rayon::prelude::*;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Oracle names, or "all".
    #[arg(required = true, value_parser = parse_target)]
    pub ids: Vec<Vec<OracleId>>,
    /// Run only the exhaustive parts.
    #[arg(long, conflicts_with = "samples")]
    pub exhaustive: bool,
    /// Sample or trial count for the sampled parts; accepts "1e4".
    #[arg(long, value_parser = parse_count)]
    pub samples: Option<u64>,
}

fn parse_target(s: &str) -> Result<Vec<OracleId>, String> {
    if s == "all" {
        return Ok(OracleId::ALL.to_vec());
    }
    s.parse::<OracleId>().map(|id| vec![id]).map_err(|_| {
        let known: Vec<&str> = OracleId::ALL.iter().map(|id| id.name()).collect();
        format!("unknown oracle {s:?}; expected all or one of {}", known.join(", "))
    })
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64 => Ok(x as u64),
        _ => Err(format!("{s:?} is not a nonnegative integer")),
    }
}

/// Runs the oracles and returns their reports in request order.
pub fn verify(args: &VerifyArgs, seed: u64) -> Result<Vec<OracleReport>> {
    let mut ids: Vec<OracleId> = Vec::new();
    for id in args.ids.iter().flatten() {
        if !ids.contains(id) {
            ids.push(*id);
        }
    }
    if ids.is_empty() {
        bail!("no oracle selected");
    }
    let opts = VerifyOptions {
        exhaustive: args.exhaustive,
        samples: args.samples,
        seed,
    };
    Ok(ids
        .par_iter()
        .map(|&id| run_oracle(id, &opts))
        .collect::<dellab::Result<Vec<_>>>()?)
}
