use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use dellab::construction::OuterWord;
use dellab::io::parse_outer_words;
use dellab::matching::MatchConfig;
use dellab::oblivious::{build_confusability_graph, isolated_fraction, ConfusabilityGraph};
use dellab::seed;
use rand::Rng;
use serde::Serialize;

use crate::output::read_input;

#[derive(Debug, Args)]
#[group(skip)]
#[command(group(clap::ArgGroup::new("vertices").required(true).args(["pool", "random"])))]
pub struct GraphArgs {
    /// Outer-word pool, one word per line.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Number of uniformly random pool words.
    #[arg(long, requires = "length")]
    pub random: Option<usize>,
    /// Length of random pool words.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long = "K")]
    pub k: u32,
    #[arg(long, default_value_t = 1)]
    pub lambda: u32,
    /// Cap on consecutive A-moves; 2^lambda if absent.
    #[arg(long)]
    pub s: Option<usize>,
    /// Cap on consecutive B-moves.
    #[arg(long)]
    pub t: usize,
    /// Kept 1-based positions, e.g. "1,2,5"; all positions if absent.
    #[arg(long)]
    pub kept: Option<String>,
    /// Keep only vertices with at most this outdegree.
    #[arg(long)]
    pub max_outdegree: Option<usize>,
    /// Sample this many subcodes and check how many are nearly free of
    /// incoming edges.
    #[arg(long)]
    pub sparsity_seeds: Option<u64>,
    /// Print the edge list as CSV instead of the summary.
    #[arg(long)]
    pub edges: bool,
}

#[derive(Debug, Serialize)]
struct Sparsity {
    seeds: u64,
    /// Subcodes with an isolated fraction of at least 1 − epsilon; empty
    /// subcodes count.
    passed: u64,
    empty: u64,
    m_target: f64,
    epsilon: f64,
    inclusion_prob: f64,
}

#[derive(Debug, Serialize)]
struct GraphSummary {
    pool: usize,
    vertices: usize,
    edges: usize,
    max_out_degree: usize,
    max_in_degree: usize,
    /// Largest outdegree over the vertex count.
    r: f64,
    sparsity: Option<Sparsity>,
}

fn sparsity(graph: &ConfusabilityGraph, r: f64, seeds: u64, master: u64) -> Sparsity {
    let m_target = r.powf(-0.25);
    let epsilon = r.powf(0.125);
    let inclusion_prob = (m_target / graph.vertices.max(1) as f64).min(1.0);
    let (mut passed, mut empty) = (0, 0);
    for s in 0..seeds {
        let mut rng = seed::substream(master, "subcode", s);
        match isolated_fraction(graph, inclusion_prob, &mut rng) {
            None => {
                empty += 1;
                passed += 1;
            }
            Some(f) if f >= 1.0 - epsilon => passed += 1,
            Some(_) => {}
        }
    }
    Sparsity {
        seeds,
        passed,
        empty,
        m_target,
        epsilon,
        inclusion_prob,
    }
}

/// Runs the graph command; the seed is only drawn when something random is
/// requested.
pub fn graph(args: &GraphArgs, seed: Option<u64>) -> Result<Vec<u8>> {
    let needs_seed = args.random.is_some() || args.sparsity_seeds.is_some();
    let master = if needs_seed { crate::output::master_seed(seed) } else { 0 };
    let pool: Vec<OuterWord> = match (&args.pool, args.random) {
        (Some(path), _) => parse_outer_words(&read_input(Some(path))?, args.k)?,
        (None, Some(count)) => {
            let len = args.length.context("--random needs --length")?;
            let mut rng = seed::substream(master, "pool", 0);
            (0..count)
                .map(|_| OuterWord((0..len).map(|_| rng.random_range(1..=args.k)).collect()))
                .collect()
        }
        (None, None) => unreachable!("argument group requires a pool"),
    };
    let Some(len) = pool.first().map(OuterWord::len) else {
        bail!("empty pool");
    };
    if pool.iter().any(|x| x.len() != len) {
        bail!("pool words differ in length");
    }
    let kept: Vec<usize> = match &args.kept {
        Some(s) => s
            .split(',')
            .map(|t| t.trim().parse::<usize>().with_context(|| format!("bad position {t:?}")))
            .collect::<Result<_>>()?,
        None => (1..=len).collect(),
    };
    if kept.iter().any(|&i| i == 0 || i > len) || kept.windows(2).any(|w| w[0] >= w[1]) {
        bail!("kept positions must be increasing and within 1..={len}");
    }
    if args.lambda == 0 || args.lambda > args.k + 1 {
        bail!("lambda must lie in 1..={}", args.k + 1);
    }
    let s = args.s.unwrap_or(1usize << args.lambda.min(63));
    let cfg = MatchConfig::worst(s, args.t, args.lambda, kept.len())?;
    let full = build_confusability_graph(&pool, &kept, &cfg)?;
    let graph = match args.max_outdegree {
        Some(d) => {
            let keep: Vec<bool> = full.out_degrees().iter().map(|&o| o <= d).collect();
            full.induced(&keep)
        }
        None => full,
    };
    if args.edges {
        let mut text = String::from("from,to\n");
        for (y, xs) in graph.out.iter().enumerate() {
            for x in xs {
                text.push_str(&format!("{y},{x}\n"));
            }
        }
        return Ok(text.into_bytes());
    }
    let max_out = graph.max_out_degree();
    let r = if graph.vertices == 0 { 0.0 } else { max_out as f64 / graph.vertices as f64 };
    let sparsity = match args.sparsity_seeds {
        Some(_) if r == 0.0 => bail!("the graph has no edges; sparsity parameters are undefined"),
        Some(seeds) => Some(sparsity(&graph, r, seeds, master)),
        None => None,
    };
    crate::output::to_json(&GraphSummary {
        pool: pool.len(),
        vertices: graph.vertices,
        edges: graph.edge_count(),
        max_out_degree: max_out,
        max_in_degree: graph.max_in_degree(),
        r,
        sparsity,
    })
}
