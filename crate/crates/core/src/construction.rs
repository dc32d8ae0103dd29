//! The concatenated run-count code: parameters, the inner codebook
//! `g_1..g_K`, the concatenation map, and the per-block analysis of a
//! deletion pattern (preservation, admissibility, signatures).

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{DeletionPattern, Word};

/// Largest inner block length a toy configuration may materialise.
pub const MAX_INNER_LEN: u64 = 1 << 26;

const EVEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Toy,
}

/// Inner alphabet size, run multiplier and block length when they fit in
/// machine integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactSizes {
    pub k: u32,
    pub r: u64,
    pub l: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub mode: Mode,
    /// Deletion fraction the parameters were derived for; absent for toy
    /// configurations built from explicit sizes.
    pub p: Option<f64>,
    pub lambda: u32,
    pub delta: f64,
    pub n: usize,
    pub log2_k: f64,
    pub log2_r: f64,
    /// `log2(log2 L)`; finite even when `L` itself overflows an `f64`.
    pub log2_log2_l: f64,
    pub exact: Option<ExactSizes>,
}

/// Smallest `λ ≥ 1` with `(1+p)/2 < 1 − 2^{−λ}`.
pub fn lambda_for(p: f64) -> Result<u32> {
    check_p(p)?;
    smallest_lambda(|l| (1.0 + p) / 2.0 < 1.0 - (-(l as f64)).exp2())
}

/// Smallest `λ ≥ 1` with `p < 1 − 2^{−λ}`, the weaker condition that
/// suffices below one half.
pub fn relaxed_lambda(p: f64) -> Result<u32> {
    check_p(p)?;
    smallest_lambda(|l| p < 1.0 - (-(l as f64)).exp2())
}

fn smallest_lambda(ok: impl Fn(u32) -> bool) -> Result<u32> {
    (1..=60)
        .find(|&l| ok(l))
        .ok_or_else(|| Error::InvalidParameter("p too close to 1".into()))
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p = {p} outside (0, 1)")))
    }
}

/// Full-strength parameters for deletion fraction `p` and outer length `n`.
/// The sizes are astronomically large and kept in logarithmic form.
pub fn derive_params(p: f64, n: usize) -> Result<CodeParams> {
    let lambda = lambda_for(p)?;
    let delta = 1.0 - (-(lambda as f64)).exp2() - p;
    let log2_k = ((lambda as f64 + 5.0).exp2() / delta).ceil();
    let log2_r = 2.0 + 4.0 * log2_k;
    // log2 L = 1 + K·log2 R, so log2 log2 L ≈ log2 K + log2 log2 R.
    let log2_log2_l = if log2_k < 1000.0 {
        (1.0 + log2_k.exp2() * log2_r).log2()
    } else {
        log2_k + log2_r.log2()
    };
    let exact = exact_from_log(log2_k, log2_r, log2_log2_l);
    Ok(CodeParams {
        mode: Mode::Full,
        p: Some(p),
        lambda,
        delta,
        n,
        log2_k,
        log2_r,
        log2_log2_l,
        exact,
    })
}

fn exact_from_log(log2_k: f64, log2_r: f64, log2_log2_l: f64) -> Option<ExactSizes> {
    if log2_k > 31.0 || log2_r > 63.0 || log2_log2_l.exp2() > 63.0 {
        return None;
    }
    let k = 1u32 << log2_k as u32;
    let r = 1u64 << log2_r as u32;
    let l = 2u64.checked_mul(r.checked_pow(k)?)?;
    Some(ExactSizes {
        k,
        r,
        l: l as usize,
    })
}

/// Desk-scale parameters with explicit `K`, `R`, `λ`, `δ` and `L = 2R^K`.
pub fn toy_params(k: u32, r: u64, lambda: u32, delta: f64, n: usize) -> Result<CodeParams> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("K = {k} must be at least 2")));
    }
    if r < 2 || !r.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("R = {r} must be even and at least 2")));
    }
    if lambda < 1 {
        return Err(Error::InvalidParameter("lambda must be at least 1".into()));
    }
    if lambda - 1 > k {
        return Err(Error::InvalidParameter(format!(
            "lambda - 1 = {} exceeds K = {k}",
            lambda - 1
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    kept_count(delta, n)?;
    let l = r
        .checked_pow(k)
        .and_then(|v| v.checked_mul(2))
        .filter(|&l| l <= MAX_INNER_LEN)
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "L = 2*{r}^{k} exceeds the limit of {MAX_INNER_LEN}"
            ))
        })?;
    let log2_k = (k as f64).log2();
    let log2_r = (r as f64).log2();
    Ok(CodeParams {
        mode: Mode::Toy,
        p: None,
        lambda,
        delta,
        n,
        log2_k,
        log2_r,
        log2_log2_l: (l as f64).log2().log2(),
        exact: Some(ExactSizes {
            k,
            r,
            l: l as usize,
        }),
    })
}

/// `δn`, which must be a positive even integer.
pub fn kept_count(delta: f64, n: usize) -> Result<usize> {
    let dn = delta * n as f64;
    let rounded = dn.round();
    if (dn - rounded).abs() > EVEN_TOL || rounded < 1.0 || !(rounded as usize).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "delta*n = {dn} must be a positive even integer"
        )));
    }
    Ok(rounded as usize)
}

impl CodeParams {
    pub fn sizes(&self) -> Result<ExactSizes> {
        self.exact.ok_or_else(|| {
            Error::FullScale(format!(
                "K = 2^{}, R = 2^{}, L = 2^(2^{:.3})",
                self.log2_k, self.log2_r, self.log2_log2_l
            ))
        })
    }

    /// Total length `N = n·L` when it fits.
    pub fn total_len(&self) -> Result<usize> {
        let s = self.sizes()?;
        s.l.checked_mul(self.n)
            .ok_or_else(|| Error::InvalidParameter("n*L overflows".into()))
    }

    /// `δn` rounded to the nearest integer.
    pub fn kept(&self) -> usize {
        (self.delta * self.n as f64).round() as usize
    }
}

/// Rate of the code family, `γ/L` with `β = log2 K / (16R)` and `γ = β/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rate {
    /// The rate itself, if it is a normal `f64`.
    pub value: Option<f64>,
    /// `log2` of the rate, if finite.
    pub log2: Option<f64>,
    /// `log2(−log2 rate)`, always finite.
    pub log2_neg_log2: f64,
}

pub fn rate(params: &CodeParams) -> Rate {
    // log2 γ = log2 log2 K − log2 64 − log2 R
    let log2_gamma = params.log2_k.log2() - 6.0 - params.log2_r;
    let log2_l = match params.exact {
        Some(e) => (e.l as f64).log2(),
        None => params.log2_log2_l.exp2(),
    };
    let log2 = log2_gamma - log2_l;
    let log2_neg_log2 = if log2.is_finite() {
        (-log2).log2()
    } else {
        params.log2_log2_l
    };
    let value = log2.exp2();
    Rate {
        value: (value.is_normal()).then_some(value),
        log2: log2.is_finite().then_some(log2),
        log2_neg_log2,
    }
}

/// A word over the outer alphabet `[K]` (symbols are 1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct OuterWord(pub Vec<u32>);

impl OuterWord {
    pub fn new(symbols: Vec<u32>, k: u32) -> Result<Self> {
        if let Some(&s) = symbols.iter().find(|&&s| s == 0 || s > k) {
            return Err(Error::SymbolOutOfRange { symbol: s, k });
        }
        Ok(Self(symbols))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Symbol at 1-based position `i`.
    pub fn at(&self, i: usize) -> u32 {
        self.0[i - 1]
    }

    /// The subword at the given 1-based positions.
    pub fn project(&self, positions: &[usize]) -> OuterWord {
        OuterWord(positions.iter().map(|&i| self.0[i - 1]).collect())
    }

    /// The `index`-th word of `[K]^len` in lexicographic order.
    pub fn from_index(mut index: u64, k: u32, len: usize) -> OuterWord {
        let mut symbols = vec![0; len];
        for slot in symbols.iter_mut().rev() {
            *slot = (index % k as u64) as u32 + 1;
            index /= k as u64;
        }
        OuterWord(symbols)
    }
}

impl fmt::Display for OuterWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// A subset of `[K]` for `K ≤ 128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SymbolSet(u128);

impl SymbolSet {
    pub fn empty() -> Self {
        Self(0)
    }

    /// `{1, ..., m}`.
    pub fn prefix(m: u32) -> Self {
        assert!(m <= 128);
        if m == 128 {
            Self(u128::MAX)
        } else {
            Self((1u128 << m) - 1)
        }
    }

    pub fn from_symbols(symbols: impl IntoIterator<Item = u32>) -> Self {
        let mut set = Self::empty();
        for s in symbols {
            set.insert(s);
        }
        set
    }

    pub fn insert(&mut self, symbol: u32) {
        assert!((1..=128).contains(&symbol));
        self.0 |= 1 << (symbol - 1);
    }

    #[inline]
    pub fn contains(&self, symbol: u32) -> bool {
        (1..=128).contains(&symbol) && self.0 >> (symbol - 1) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (1..=128).filter(|&s| self.contains(s))
    }
}

impl fmt::Display for SymbolSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

/// The materialised inner code `g_1..g_K` for a toy configuration.
#[derive(Debug, Clone)]
pub struct InnerCodebook {
    pub params: CodeParams,
    pub k: u32,
    pub r: u64,
    pub l: usize,
    words: Vec<Word>,
    /// Largest admissible inner deletion count for `ℓ = λ − 1`.
    max_admissible: Option<usize>,
}

impl InnerCodebook {
    pub fn new(params: &CodeParams) -> Result<Self> {
        let ExactSizes { k, r, l } = params.sizes()?;
        if l as u64 > MAX_INNER_LEN {
            return Err(Error::FullScale(format!("L = {l} too large to materialise")));
        }
        let words = (1..=k).map(|i| build_inner(i, r, l)).collect();
        let mut book = Self {
            params: params.clone(),
            k,
            r,
            l,
            words,
            max_admissible: None,
        };
        book.max_admissible = book.max_admissible_weight(params.lambda.saturating_sub(1));
        Ok(book)
    }

    /// `g_i` for `1 ≤ i ≤ K`.
    pub fn word(&self, i: u32) -> Result<&Word> {
        if i == 0 || i > self.k {
            return Err(Error::SymbolOutOfRange { symbol: i, k: self.k });
        }
        Ok(&self.words[i as usize - 1])
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// Run count of an undamaged `g_i`, `2R^{K+1−i}`.
    pub fn full_runs(&self, i: u32) -> u64 {
        2 * self.r.pow(self.k + 1 - i)
    }

    /// `ψ(X) = g_{X_1} g_{X_2} ...`.
    pub fn encode(&self, x: &OuterWord) -> Result<Word> {
        let mut out = Word::with_capacity(x.len() * self.l);
        for &s in &x.0 {
            out.extend_from(self.word(s)?);
        }
        Ok(out)
    }

    /// Whether the inner pattern leaves `g_i` with at least
    /// `2R^{K+1−i}/√R` runs.
    pub fn preserves(&self, sigma: &DeletionPattern, i: u32) -> Result<bool> {
        self.check_inner(sigma)?;
        let runs = sigma.run_count_after(self.word(i)?)? as u128;
        let target = self.full_runs(i) as u128;
        Ok(runs * runs * self.r as u128 >= target * target)
    }

    /// Symbols whose inner codeword the pattern corrupts.
    pub fn corrupted(&self, sigma: &DeletionPattern) -> Result<SymbolSet> {
        let mut set = SymbolSet::empty();
        for i in 1..=self.k {
            if !self.preserves(sigma, i)? {
                set.insert(i);
            }
        }
        Ok(set)
    }

    /// Whether `|σ| ≤ L(1 − 2^{−(ℓ+1)} − 1/√R)`, decided exactly.
    pub fn is_admissible(&self, sigma: &DeletionPattern, ell: u32) -> Result<bool> {
        self.check_inner(sigma)?;
        Ok(self.admissible_weight(sigma.len(), ell))
    }

    /// The exact admissibility test on a deletion count.
    pub fn admissible_weight(&self, weight: usize, ell: u32) -> bool {
        let scale = BigInt::from(1) << (ell + 1);
        let l = BigInt::from(self.l);
        let num = &l * &scale - &l - BigInt::from(weight) * &scale;
        if num < BigInt::from(0) {
            return false;
        }
        let den = l * scale;
        &num * &num * BigInt::from(self.r) >= &den * &den
    }

    /// Largest admissible deletion count for `ℓ`, or `None` if even the
    /// empty pattern fails.
    pub fn max_admissible_weight(&self, ell: u32) -> Option<usize> {
        if !self.admissible_weight(0, ell) {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.l);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if self.admissible_weight(mid, ell) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Some(lo)
    }

    /// Cached [`InnerCodebook::max_admissible_weight`] at `ℓ = λ − 1`.
    pub fn signature_budget(&self) -> Option<usize> {
        self.max_admissible
    }

    fn check_inner(&self, sigma: &DeletionPattern) -> Result<()> {
        if sigma.word_length() != self.l {
            return Err(Error::LengthMismatch {
                expected: self.l,
                actual: sigma.word_length(),
            });
        }
        Ok(())
    }

    /// Summarises a full-length pattern by the first `δn` admissible blocks
    /// and the symbols each of them corrupts.
    pub fn extract_signature(&self, tau: &DeletionPattern) -> Result<Signature> {
        let n = self.params.n;
        let needed = self.params.kept();
        let ell = self.params.lambda - 1;
        let allowed = ell as usize;
        let blocks = tau.split(n, self.l)?;
        let mut kept_indices = Vec::with_capacity(needed);
        let mut corruption_sets = Vec::with_capacity(needed);
        let mut inner_patterns = Vec::with_capacity(needed);
        for (b, inner) in blocks.into_iter().enumerate() {
            if kept_indices.len() == needed {
                break;
            }
            if !self.admissible_weight(inner.len(), ell) {
                continue;
            }
            let mut set = self.corrupted(&inner)?;
            if set.len() > allowed {
                return Err(Error::TooManyCorrupted {
                    block: b + 1,
                    corrupted: set.len(),
                    allowed,
                });
            }
            let mut fill = 1;
            while set.len() < allowed {
                if !set.contains(fill) {
                    set.insert(fill);
                }
                fill += 1;
            }
            kept_indices.push(b + 1);
            corruption_sets.push(set);
            inner_patterns.push(inner);
        }
        if kept_indices.len() < needed {
            return Err(Error::InsufficientAdmissible {
                found: kept_indices.len(),
                needed,
            });
        }
        Ok(Signature {
            n,
            kept_indices,
            corruption_sets,
            inner_patterns,
        })
    }
}

fn build_inner(i: u32, r: u64, l: usize) -> Word {
    let half = r.pow(i - 1) as usize;
    (0..l).map(|j| (j / half) % 2 == 1).collect()
}

/// A deletion pattern reduced to the outer positions it keeps, the
/// corruption set of each kept block and the kept inner patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub n: usize,
    /// 1-based outer positions, strictly increasing.
    pub kept_indices: Vec<usize>,
    pub corruption_sets: Vec<SymbolSet>,
    pub inner_patterns: Vec<DeletionPattern>,
}

impl Signature {
    /// The outer pattern deleting every position not kept.
    pub fn outer_pattern(&self) -> DeletionPattern {
        let mut mask = vec![true; self.n];
        for &i in &self.kept_indices {
            mask[i - 1] = false;
        }
        DeletionPattern::from_mask(&mask)
    }

    /// `τ′ = τ′_1 ⁀ ... ⁀ τ′_{δn}`.
    pub fn inner_concat(&self) -> DeletionPattern {
        DeletionPattern::concat(&self.inner_patterns)
    }

    pub fn project(&self, x: &OuterWord) -> OuterWord {
        x.project(&self.kept_indices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::is_subsequence;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn book(k: u32, r: u64, lambda: u32, delta: f64, n: usize) -> InnerCodebook {
        InnerCodebook::new(&toy_params(k, r, lambda, delta, n).unwrap()).unwrap()
    }

    #[test]
    fn derived_lambda_and_delta() {
        let p = derive_params(0.4, 100).unwrap();
        assert_eq!(p.lambda, 2);
        assert!((p.delta - 0.35).abs() < 1e-12);
        let p = derive_params(0.9, 100).unwrap();
        assert_eq!(p.lambda, 5);
        assert!((p.delta - 0.06875).abs() < 1e-12);
        assert!(p.exact.is_none());
        assert!(matches!(p.sizes(), Err(Error::FullScale(_))));
        assert_eq!(relaxed_lambda(0.4).unwrap(), 1);
        assert_eq!(relaxed_lambda(0.49).unwrap(), 1);
        assert!(relaxed_lambda(0.5).unwrap() > 1);
        assert!(derive_params(1.2, 10).is_err());
        assert!(derive_params(0.0, 10).is_err());
    }

    #[test]
    fn derived_sizes_in_log_form() {
        let p = derive_params(0.4, 10).unwrap();
        // 2^7 / 0.35 = 365.7...
        assert_eq!(p.log2_k, 366.0);
        assert_eq!(p.log2_r, 2.0 + 4.0 * 366.0);
        let expected = (366f64.exp2() * 1466.0).log2();
        assert!((p.log2_log2_l - expected).abs() < 1e-9);
        let r = rate(&derive_params(0.9, 10).unwrap());
        assert!(r.value.is_none() && r.log2.is_none());
        assert!(r.log2_neg_log2 > 14000.0);
    }

    #[test]
    fn toy_param_examples() {
        let p = toy_params(2, 2, 1, 0.5, 4).unwrap();
        assert_eq!(p.sizes().unwrap().l, 8);
        assert_eq!(p.total_len().unwrap(), 32);
        let p = toy_params(2, 4, 2, 0.5, 8).unwrap();
        assert_eq!(p.sizes().unwrap().l, 32);
        assert_eq!(p.total_len().unwrap(), 256);
        assert!(toy_params(3, 3, 1, 0.5, 4).is_err());
        assert!(toy_params(2, 2, 1, 0.5, 6).is_err());
        assert!(toy_params(2, 2, 1, 0.3, 4).is_err());
        assert!(toy_params(8, 64, 1, 0.5, 4).is_err());
    }

    #[test]
    fn inner_codeword_examples() {
        let b = book(2, 2, 1, 0.5, 4);
        assert_eq!(b.word(1).unwrap().to_string(), "01010101");
        assert_eq!(b.word(2).unwrap().to_string(), "00110011");
        assert_eq!(b.word(1).unwrap().run_count(), 8);
        assert_eq!(b.word(2).unwrap().run_count(), 4);
        assert!(b.word(0).is_err() && b.word(3).is_err());
    }

    #[test]
    fn run_counts_scale_by_r() {
        for (k, r) in [(2u32, 2u64), (3, 2), (2, 4), (3, 4), (2, 16), (4, 4)] {
            let b = book(k, r, 1, 0.5, 4);
            for i in 1..=k {
                let g = b.word(i).unwrap();
                assert_eq!(g.len(), b.l);
                assert_eq!(g.run_count() as u64, b.full_runs(i));
                if i < k {
                    assert_eq!(g.run_count() as u64, r * b.word(i + 1).unwrap().run_count() as u64);
                }
            }
        }
    }

    #[test]
    fn encode_examples() {
        let b = book(2, 2, 1, 0.5, 4);
        let one = OuterWord::new(vec![1], 2).unwrap();
        assert_eq!(&b.encode(&one).unwrap(), b.word(1).unwrap());
        let x = OuterWord::new(vec![1, 2], 2).unwrap();
        assert_eq!(b.encode(&x).unwrap().to_string(), "0101010100110011");
        assert!(OuterWord::new(vec![3], 2).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let len = rng.random_range(0..10);
            let x = OuterWord((0..len).map(|_| rng.random_range(1..=2)).collect());
            assert_eq!(b.encode(&x).unwrap().len(), len * b.l);
        }
    }

    #[test]
    fn preserve_examples() {
        let b = book(2, 4, 2, 0.5, 4);
        let odd = DeletionPattern::new(32, (1..=32).step_by(2).collect()).unwrap();
        assert_eq!(odd.apply(b.word(1).unwrap()).unwrap().to_string(), "1".repeat(16));
        assert!(!b.preserves(&odd, 1).unwrap());
        // g_2 = (0^4 1^4)^4 keeps two of every four equal bits: 8 runs against a threshold of 4.
        let kept = odd.apply(b.word(2).unwrap()).unwrap();
        assert_eq!(kept.to_string(), "0011".repeat(4));
        assert_eq!(kept.run_count(), 8);
        assert!(b.preserves(&odd, 2).unwrap());
        let empty = DeletionPattern::empty(32);
        assert!(b.preserves(&empty, 1).unwrap() && b.preserves(&empty, 2).unwrap());
        assert!(b.preserves(&DeletionPattern::empty(31), 1).is_err());
    }

    #[test]
    fn admissible_examples() {
        let b = book(2, 4, 2, 0.5, 4);
        assert_eq!(b.max_admissible_weight(1), Some(8));
        assert!(b.admissible_weight(8, 1));
        assert!(!b.admissible_weight(9, 1));
        // λ = 1, R = 4: the bound is exactly zero.
        assert_eq!(b.max_admissible_weight(0), Some(0));
        for ell in 0..6 {
            assert!(!b.admissible_weight(32, ell));
        }
        // R = 2 is not a perfect square: 8(1 − 1/2 − 1/√2) < 0.
        let b2 = book(2, 2, 1, 0.5, 4);
        assert_eq!(b2.max_admissible_weight(0), None);
        // 8(1 − 1/4 − 0.7071) = 0.34
        assert_eq!(b2.max_admissible_weight(1), Some(0));
        // 8(1 − 1/8 − 0.7071) = 1.34
        assert_eq!(b2.max_admissible_weight(2), Some(1));
    }

    #[test]
    fn signature_of_empty_pattern() {
        let b = book(2, 4, 2, 0.5, 4);
        let sig = b.extract_signature(&DeletionPattern::empty(128)).unwrap();
        assert_eq!(sig.kept_indices, vec![1, 2]);
        assert!(sig.corruption_sets.iter().all(|s| *s == SymbolSet::prefix(1)));
        assert_eq!(sig.outer_pattern().deleted(), &[3, 4]);
    }

    #[test]
    fn signature_skips_inadmissible_block() {
        let b = book(2, 4, 2, 0.5, 4);
        let tau = DeletionPattern::new(128, (1..=32).step_by(2).collect()).unwrap();
        let sig = b.extract_signature(&tau).unwrap();
        assert_eq!(sig.kept_indices, vec![2, 3]);
        assert!(sig.corruption_sets.iter().all(|s| s.len() == 1));
    }

    #[test]
    fn signature_fails_without_enough_admissible_blocks() {
        let b = book(2, 4, 2, 0.5, 4);
        let tau = DeletionPattern::new(128, (1..=96).collect()).unwrap();
        assert!(matches!(
            b.extract_signature(&tau),
            Err(Error::InsufficientAdmissible { found: 1, needed: 2 })
        ));
    }

    #[test]
    fn signature_subsequence_guarantee() {
        let b = book(2, 4, 2, 0.5, 4);
        let budget = b.signature_budget().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mut deleted = Vec::new();
            for block in 0..4 {
                let w = rng.random_range(0..=budget * 2);
                let mut pos: Vec<usize> = rand::seq::index::sample(&mut rng, 32, w)
                    .into_iter()
                    .map(|j| block * 32 + j + 1)
                    .collect();
                pos.sort_unstable();
                deleted.extend(pos);
            }
            let tau = DeletionPattern::new(128, deleted).unwrap();
            let Ok(sig) = b.extract_signature(&tau) else { continue };
            for (inner, set) in sig.inner_patterns.iter().zip(&sig.corruption_sets) {
                assert!(b.is_admissible(inner, 1).unwrap());
                for j in 1..=2 {
                    assert!(set.contains(j) || b.preserves(inner, j).unwrap());
                }
            }
            let x = OuterWord((0..4).map(|_| rng.random_range(1..=2)).collect());
            let received = tau.apply(&b.encode(&x).unwrap()).unwrap();
            let projected = sig.inner_concat().apply(&b.encode(&sig.project(&x)).unwrap()).unwrap();
            assert!(is_subsequence(&projected, &received));
        }
    }

    #[test]
    fn copies_needed_for_cross_containment() {
        for (k, r) in [(2u32, 2u64), (2, 4), (3, 2), (2, 6)] {
            let b = book(k, r, 1, 0.5, 4);
            let (g1, g2) = (b.word(1).unwrap(), b.word(2).unwrap());
            assert!(is_subsequence(g2, &g1.repeat(2)));
            assert!(!is_subsequence(g2, g1));
            assert!(is_subsequence(g1, &g2.repeat(r as usize)));
            assert!(!is_subsequence(g1, &g2.repeat(r as usize - 1)));
        }
    }

    #[test]
    fn toy_rate() {
        let p = toy_params(2, 4, 2, 0.5, 8).unwrap();
        let r = rate(&p);
        assert!((r.value.unwrap() - 1.0 / 8192.0).abs() < 1e-18);
        assert!((r.log2.unwrap() + 13.0).abs() < 1e-12);
        let slower = rate(&toy_params(2, 8, 2, 0.5, 8).unwrap());
        assert!(slower.value.unwrap() < r.value.unwrap());
    }

    #[test]
    fn symbol_set_basics() {
        let s = SymbolSet::from_symbols([3, 1]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(SymbolSet::prefix(0), SymbolSet::empty());
        assert!(!s.contains(0) && !s.contains(200));
    }

    #[test]
    fn outer_index_is_lexicographic() {
        assert_eq!(OuterWord::from_index(0, 3, 2).0, vec![1, 1]);
        assert_eq!(OuterWord::from_index(1, 3, 2).0, vec![1, 2]);
        assert_eq!(OuterWord::from_index(8, 3, 2).0, vec![3, 3]);
    }
}
