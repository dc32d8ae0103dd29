//! Binary words, runs, deletion patterns and the subsequence/LCS primitives
//! every other module is built on.
//!
//! Bit access on [`Word`] is 0-based like any Rust sequence. Deletion
//! patterns, run starts and alignment positions are 1-based, so a pattern
//! `{1, 3}` deletes the first and third bit.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::error::{Error, Result};

const BLOCK: usize = 64;

/// A finite binary string stored as packed 64-bit blocks.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    blocks: Vec<u64>,
    len: usize,
}

/// A maximal single-symbol interval of a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub symbol: u8,
    /// 1-based index of the first bit of the run.
    pub start: usize,
    pub len: usize,
}

impl Word {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            blocks: Vec::with_capacity(bits.div_ceil(BLOCK)),
            len: 0,
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            blocks: vec![0; len.div_ceil(BLOCK)],
            len,
        }
    }

    /// Word of `len` bits whose first bit is the most significant bit of
    /// `value`, so counting `value` upward enumerates words lexicographically.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        (0..len).map(|i| (value >> (len - 1 - i)) & 1 == 1).collect()
    }

    /// Inverse of [`Word::from_u64`]; `None` for words longer than 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        (self.len <= 64).then(|| self.iter().fold(0u64, |acc, b| (acc << 1) | b as u64))
    }

    /// Alternating word `0101...` of the given length.
    pub fn alternating(len: usize) -> Self {
        (0..len).map(|i| i % 2 == 1).collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Bit at 0-based `index`.
    #[inline]
    pub fn bit(&self, index: usize) -> bool {
        debug_assert!(index < self.len);
        (self.blocks[index / BLOCK] >> (index % BLOCK)) & 1 == 1
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(BLOCK) {
            self.blocks.push(0);
        }
        if bit {
            self.blocks[self.len / BLOCK] |= 1 << (self.len % BLOCK);
        }
        self.len += 1;
    }

    pub fn extend_from(&mut self, other: &Word) {
        for b in other.iter() {
            self.push(b);
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = Word::with_capacity(self.len + other.len);
        out.extend_from(self);
        out.extend_from(other);
        out
    }

    pub fn repeat(&self, times: usize) -> Word {
        let mut out = Word::with_capacity(self.len * times);
        for _ in 0..times {
            out.extend_from(self);
        }
        out
    }

    /// Sub-word covering 0-based `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Word {
        assert!(range.end <= self.len);
        range.map(|i| self.bit(i)).collect()
    }

    pub fn prefix(&self, len: usize) -> Word {
        self.slice(0..len.min(self.len))
    }

    /// Bits after the first `start` bits.
    pub fn suffix_from(&self, start: usize) -> Word {
        self.slice(start.min(self.len)..self.len)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = bool> + ExactSizeIterator + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    pub fn count_ones(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.count_ones()
    }

    pub fn run_count(&self) -> usize {
        if self.len == 0 {
            return 0;
        }
        1 + (1..self.len)
            .filter(|&i| self.bit(i) != self.bit(i - 1))
            .count()
    }

    /// Run decomposition; concatenating the runs reproduces the word.
    pub fn runs(&self) -> Vec<Run> {
        let mut runs: Vec<Run> = Vec::new();
        for (i, b) in self.iter().enumerate() {
            match runs.last_mut() {
                Some(run) if run.symbol == b as u8 => run.len += 1,
                _ => runs.push(Run {
                    symbol: b as u8,
                    start: i + 1,
                    len: 1,
                }),
            }
        }
        runs
    }

    /// Hamming distance; `None` if lengths differ.
    pub fn hamming(&self, other: &Word) -> Option<usize> {
        (self.len == other.len).then(|| {
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| (a ^ b).count_ones() as usize)
                .sum()
        })
    }

    /// Bitwise XOR of equal-length words.
    pub fn xor(&self, other: &Word) -> Result<Word> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(Word {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a ^ b).collect(),
            len: self.len,
        })
    }
}

impl FromIterator<bool> for Word {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let iter = iter.into_iter();
        let mut w = Word::with_capacity(iter.size_hint().0);
        for b in iter {
            w.push(b);
        }
        w
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse {
                    line: 0,
                    message: format!("unexpected character {other:?} in binary word"),
                }),
            })
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(\"{self}\")")
    }
}

/// A fixed set of 1-based positions removed from every word of length
/// `word_length`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeletionPattern {
    word_length: usize,
    deleted: Vec<usize>,
}

impl DeletionPattern {
    /// Builds a pattern from 1-based indices, which must be strictly
    /// increasing and lie in `[1, word_length]`.
    pub fn new(word_length: usize, deleted: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = deleted.iter().find(|&&i| i == 0 || i > word_length) {
            return Err(Error::InvalidPattern(format!(
                "index {bad} outside [1, {word_length}]"
            )));
        }
        if deleted.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPattern(
                "indices must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            word_length,
            deleted,
        })
    }

    /// Like [`DeletionPattern::new`] but sorts and deduplicates first.
    pub fn from_unsorted(word_length: usize, mut deleted: Vec<usize>) -> Result<Self> {
        deleted.sort_unstable();
        deleted.dedup();
        Self::new(word_length, deleted)
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self {
            word_length: mask.len(),
            deleted: mask
                .iter()
                .enumerate()
                .filter_map(|(i, &d)| d.then_some(i + 1))
                .collect(),
        }
    }

    pub fn empty(word_length: usize) -> Self {
        Self {
            word_length,
            deleted: Vec::new(),
        }
    }

    pub fn full(word_length: usize) -> Self {
        Self {
            word_length,
            deleted: (1..=word_length).collect(),
        }
    }

    pub fn word_length(&self) -> usize {
        self.word_length
    }

    pub fn deleted(&self) -> &[usize] {
        &self.deleted
    }

    /// Number of deleted positions, `|τ|`.
    pub fn len(&self) -> usize {
        self.deleted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deleted.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.deleted.binary_search(&index).is_ok()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.word_length];
        for &i in &self.deleted {
            mask[i - 1] = true;
        }
        mask
    }

    /// Positions (1-based) that survive the pattern.
    pub fn kept(&self) -> Vec<usize> {
        let mask = self.mask();
        (1..=self.word_length).filter(|&i| !mask[i - 1]).collect()
    }

    /// Subset order on patterns of the same word length.
    pub fn is_subset_of(&self, other: &DeletionPattern) -> bool {
        self.word_length == other.word_length && self.deleted.iter().all(|&i| other.contains(i))
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.len() != self.word_length {
            return Err(Error::LengthMismatch {
                expected: self.word_length,
                actual: w.len(),
            });
        }
        let mut out = Word::with_capacity(w.len() - self.deleted.len());
        let mut next = self.deleted.iter().peekable();
        for i in 0..w.len() {
            if next.peek() == Some(&&(i + 1)) {
                next.next();
            } else {
                out.push(w.bit(i));
            }
        }
        Ok(out)
    }

    /// Run count of `apply(w)` without materialising the result.
    pub fn run_count_after(&self, w: &Word) -> Result<usize> {
        if w.len() != self.word_length {
            return Err(Error::LengthMismatch {
                expected: self.word_length,
                actual: w.len(),
            });
        }
        let mut runs = 0;
        let mut last = None;
        let mut next = self.deleted.iter().peekable();
        for i in 0..w.len() {
            if next.peek() == Some(&&(i + 1)) {
                next.next();
                continue;
            }
            let b = w.bit(i);
            if last != Some(b) {
                runs += 1;
                last = Some(b);
            }
        }
        Ok(runs)
    }

    /// Splits a pattern over `blocks * block_len` positions into one inner
    /// pattern per block.
    pub fn split(&self, blocks: usize, block_len: usize) -> Result<Vec<DeletionPattern>> {
        if blocks * block_len != self.word_length {
            return Err(Error::LengthMismatch {
                expected: blocks * block_len,
                actual: self.word_length,
            });
        }
        let mut parts = vec![Vec::new(); blocks];
        for &j in &self.deleted {
            let block = (j - 1) / block_len;
            parts[block].push(j - block * block_len);
        }
        Ok(parts
            .into_iter()
            .map(|deleted| DeletionPattern {
                word_length: block_len,
                deleted,
            })
            .collect())
    }

    /// Concatenation `τ_1 ⁀ ... ⁀ τ_n` of inner patterns.
    pub fn concat(parts: &[DeletionPattern]) -> DeletionPattern {
        let mut offset = 0;
        let mut deleted = Vec::new();
        for p in parts {
            deleted.extend(p.deleted.iter().map(|&j| j + offset));
            offset += p.word_length;
        }
        DeletionPattern {
            word_length: offset,
            deleted,
        }
    }
}

impl fmt::Display for DeletionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.deleted.iter().join(","))
    }
}

/// Every pattern in `D(n, m)`, lazily, in lexicographic order.
pub fn enumerate_patterns(n: usize, m: usize) -> Result<impl Iterator<Item = DeletionPattern>> {
    if m > n {
        return Err(Error::InvalidParameter(format!(
            "cannot delete {m} of {n} positions"
        )));
    }
    Ok((1..=n).combinations(m).map(move |deleted| DeletionPattern {
        word_length: n,
        deleted,
    }))
}

/// Greedy left-to-right embedding of `a` into `b`: the 1-based positions
/// of `b` matched to each bit of `a`, or `None` if `a` is not a subsequence.
pub fn embed(a: &Word, b: &Word) -> Option<Vec<usize>> {
    let mut positions = Vec::with_capacity(a.len());
    let mut j = 0;
    for bit in a.iter() {
        while j < b.len() && b.bit(j) != bit {
            j += 1;
        }
        if j == b.len() {
            return None;
        }
        positions.push(j + 1);
        j += 1;
    }
    Some(positions)
}

pub fn is_subsequence(a: &Word, b: &Word) -> bool {
    if a.len() > b.len() {
        return false;
    }
    let mut j = 0;
    for bit in a.iter() {
        while j < b.len() && b.bit(j) != bit {
            j += 1;
        }
        if j == b.len() {
            return false;
        }
        j += 1;
    }
    true
}

/// Number of distinct embeddings of `a` into `b` (saturating).
pub fn count_embeddings(a: &Word, b: &Word) -> u128 {
    // ways[i] = embeddings of a[..i] into the prefix of b seen so far
    let mut ways = vec![0u128; a.len() + 1];
    ways[0] = 1;
    for bb in b.iter() {
        for i in (1..=a.len()).rev() {
            if a.bit(i - 1) == bb {
                ways[i] = ways[i].saturating_add(ways[i - 1]);
            }
        }
    }
    ways[a.len()]
}

/// A longest common subsequence with one deterministic witness alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lcs {
    pub length: usize,
    pub witness: Word,
    /// 1-based positions in `a` of the witness bits.
    pub positions_a: Vec<usize>,
    /// 1-based positions in `b` of the witness bits.
    pub positions_b: Vec<usize>,
}

/// LCS length only, in `O(|a|·|b|)` time and `O(|b|)` space.
pub fn lcs_len(a: &Word, b: &Word) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for i in 0..a.len() {
        let ai = a.bit(i);
        for j in 0..b.len() {
            cur[j + 1] = if ai == b.bit(j) {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS with a witness. Among all optimal alignments the one returned has
/// the lexicographically smallest positions in `a`, then in `b`.
pub fn lcs(a: &Word, b: &Word) -> Lcs {
    let (n, m) = (a.len(), b.len());
    // suffix[i][j] = LCS of a[i..] and b[j..]
    let mut suffix = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            suffix[i][j] = if a.bit(i) == b.bit(j) {
                suffix[i + 1][j + 1] + 1
            } else {
                suffix[i + 1][j].max(suffix[i][j + 1])
            };
        }
    }
    // next_occ[bit][j] = first k >= j with b[k] == bit
    let mut next_occ = [vec![m; m + 1], vec![m; m + 1]];
    for j in (0..m).rev() {
        for bit in 0..2 {
            next_occ[bit][j] = if b.bit(j) as usize == bit {
                j
            } else {
                next_occ[bit][j + 1]
            };
        }
    }

    let length = suffix[0][0];
    let mut positions_a = Vec::with_capacity(length);
    let mut positions_b = Vec::with_capacity(length);
    let (mut i, mut j) = (0, 0);
    let mut remaining = length;
    while remaining > 0 {
        // The earliest occurrence in b leaves the most of b for the rest,
        // so it is the only candidate worth testing for each i.
        let k = next_occ[a.bit(i) as usize][j];
        if k < m && suffix[i + 1][k + 1] + 1 == remaining {
            positions_a.push(i + 1);
            positions_b.push(k + 1);
            remaining -= 1;
            j = k + 1;
        }
        i += 1;
    }
    let witness = positions_a.iter().map(|&p| a.bit(p - 1)).collect();
    Lcs {
        length,
        witness,
        positions_a,
        positions_b,
    }
}
