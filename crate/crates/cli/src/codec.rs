use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use dellab::io::{format_outer_words, parse_codebook, parse_outer_words, parse_pattern_line};
use dellab::oblivious::{random_pattern, unique_decode};
use dellab::{seed, DeletionPattern, Word};

use crate::output::read_input;
use crate::params::ParamArgs;

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Outer words, comma-separated symbols one per line; stdin if absent.
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    DeleteZeros,
    DeleteOnes,
    Random,
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["pattern", "patterns", "family"])))]
pub struct CorruptArgs {
    /// Binary words, one per line; stdin if absent.
    pub input: Option<PathBuf>,
    /// One pattern of 1-based indices, e.g. "2,5"; "" deletes nothing.
    #[arg(long, allow_hyphen_values = true)]
    pub pattern: Option<String>,
    /// Pattern file: one line per input word, or a single line for all.
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Deletions per word for a family; all matching bits if absent.
    #[arg(long)]
    pub weight: Option<usize>,
}

#[derive(Debug, Args)]
#[group(skip)]
#[command(group(clap::ArgGroup::new("code").required(true).args(["codebook", "outer_code"])))]
pub struct DecodeArgs {
    /// Received words, one per line; stdin if absent.
    pub input: Option<PathBuf>,
    /// Binary codebook; decoded lines are codewords.
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    /// Outer code to encode with the toy parameters; decoded lines are
    /// outer words.
    #[arg(long)]
    pub outer_code: Option<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

/// Each non-comment line as a word; an empty line is the empty word.
fn parse_words(text: &str) -> Result<Vec<Word>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .map(|(i, l)| l.trim().parse::<Word>().with_context(|| format!("line {}", i + 1)))
        .collect()
}

fn lines(words: impl IntoIterator<Item = String>) -> Vec<u8> {
    words.into_iter().flat_map(|w| format!("{w}\n").into_bytes()).collect()
}

pub fn encode(args: &EncodeArgs) -> Result<Vec<u8>> {
    let text = read_input(args.input.as_deref())?;
    let file = args.params.merged()?;
    let k = file.k.context("--K is required")?;
    let outer = parse_outer_words(&text, k)?;
    let data_n = outer.first().map(|x| x.len());
    if outer.iter().any(|x| Some(x.len()) != data_n) {
        bail!("outer words differ in length");
    }
    let book = file.toy_codebook(data_n)?;
    if let Some(x) = outer.iter().find(|x| x.len() != book.params.n) {
        bail!("outer word {x} has length {}, expected n = {}", x.len(), book.params.n);
    }
    let code = outer.iter().map(|x| book.encode(x)).collect::<dellab::Result<Vec<_>>>()?;
    Ok(lines(code.iter().map(Word::to_string)))
}

fn family_pattern(w: &Word, family: Family, weight: Option<usize>, master: u64, line: usize) -> Result<DeletionPattern> {
    let target = match family {
        Family::DeleteZeros => Some(false),
        Family::DeleteOnes => Some(true),
        Family::Random => None,
    };
    match target {
        Some(b) => {
            let hits: Vec<usize> = (0..w.len()).filter(|&i| w.bit(i) == b).map(|i| i + 1).collect();
            let take = weight.unwrap_or(hits.len());
            if take > hits.len() {
                bail!("line {line}: weight {take} exceeds the {} matching bits", hits.len());
            }
            Ok(DeletionPattern::new(w.len(), hits[..take].to_vec())?)
        }
        None => {
            let weight = weight.context("--family random needs --weight")?;
            if weight > w.len() {
                bail!("line {line}: weight {weight} exceeds length {}", w.len());
            }
            let mut rng = seed::substream(master, "corrupt", line as u64);
            Ok(random_pattern(w.len(), weight, &mut rng))
        }
    }
}

pub fn corrupt(args: &CorruptArgs, seed: Option<u64>) -> Result<Vec<u8>> {
    let words = parse_words(&read_input(args.input.as_deref())?)?;
    let patterns: Vec<DeletionPattern> = if let Some(p) = &args.pattern {
        words
            .iter()
            .map(|w| parse_pattern_line(p, w.len()))
            .collect::<dellab::Result<_>>()?
    } else if let Some(path) = &args.patterns {
        let text = read_input(Some(path))?;
        let raw: Vec<&str> = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect();
        match raw.len() {
            1 => words
                .iter()
                .map(|w| parse_pattern_line(raw[0], w.len()))
                .collect::<dellab::Result<_>>()?,
            m if m == words.len() => {
                let mut out = Vec::with_capacity(m);
                for (i, w) in words.iter().enumerate() {
                    out.push(parse_pattern_line(raw[i], w.len()).with_context(|| format!("pattern line {}", i + 1))?);
                }
                out
            }
            m => bail!("{m} patterns for {} words", words.len()),
        }
    } else {
        let family = args.family.expect("argument group requires a source");
        let master = if family == Family::Random {
            crate::output::master_seed(seed)
        } else {
            0
        };
        words
            .iter()
            .enumerate()
            .map(|(i, w)| family_pattern(w, family, args.weight, master, i + 1))
            .collect::<Result<_>>()?
    };
    let out = words
        .iter()
        .zip(&patterns)
        .map(|(w, p)| p.apply(w).map(|r| r.to_string()))
        .collect::<dellab::Result<Vec<_>>>()?;
    Ok(lines(out))
}

pub fn decode(args: &DecodeArgs) -> Result<Vec<u8>> {
    let (code, labels): (Vec<Word>, Vec<String>) = if let Some(path) = &args.codebook {
        let code = parse_codebook(&read_input(Some(path))?)?;
        let labels = code.iter().map(Word::to_string).collect();
        (code, labels)
    } else {
        let path = args.outer_code.as_ref().expect("argument group requires a code");
        let file = args.params.merged()?;
        let k = file.k.context("--outer-code needs --K")?;
        let outer = parse_outer_words(&read_input(Some(path))?, k)?;
        let book = file.toy_codebook(outer.first().map(|x| x.len()))?;
        let code = outer.iter().map(|x| book.encode(x)).collect::<dellab::Result<Vec<_>>>()?;
        let labels = format_outer_words(&outer).lines().map(str::to_owned).collect();
        (code, labels)
    };
    let received = parse_words(&read_input(args.input.as_deref())?)?;
    Ok(lines(received.iter().map(|r| match unique_decode(r, &code) {
        Some(i) => labels[i].clone(),
        None => "FAIL".to_owned(),
    })))
}
