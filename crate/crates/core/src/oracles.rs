//! Brute-force and closed-form checks of the combinatorial statements the
//! construction relies on, sized to run exhaustively or by sampling at
//! desk scale. Every check returns an [`OracleReport`] whose witnesses are
//! enough to replay a violation.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::{binomial, Roots};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::construction::{toy_params, InnerCodebook, OuterWord, SymbolSet};
use crate::error::{Error, Result};
use crate::matching::{is_matchable, match_count_dominance, MatchConfig, ENUMERATION_LIMIT};
use crate::oblivious::random_pattern;
use crate::seed;
use crate::words::{enumerate_patterns, is_subsequence, lcs_len, DeletionPattern, Word};

const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub instances: u64,
    pub violations: u64,
    /// At most sixteen replayable violating inputs.
    pub witnesses: Vec<String>,
    pub mode: OracleMode,
    /// Free-form measurements reported alongside the counts.
    pub notes: Vec<String>,
}

impl OracleReport {
    pub fn new(name: &str, mode: OracleMode) -> Self {
        Self {
            name: name.to_string(),
            instances: 0,
            violations: 0,
            witnesses: Vec::new(),
            mode,
            notes: Vec::new(),
        }
    }

    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok {
            self.violations += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    /// Associative combination of two partial reports of the same check.
    pub fn merge(mut self, other: OracleReport) -> Self {
        self.instances += other.instances;
        self.violations += other.violations;
        let room = MAX_WITNESSES.saturating_sub(self.witnesses.len());
        self.witnesses.extend(other.witnesses.into_iter().take(room));
        if other.mode == OracleMode::Sampled {
            self.mode = OracleMode::Sampled;
        }
        self.notes.extend(other.notes);
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.mode {
            OracleMode::Exhaustive => "exhaustive",
            OracleMode::Sampled => "sampled",
        };
        write!(
            f,
            "{}: {} instances, {} violations ({mode})",
            self.name, self.instances, self.violations
        )?;
        for note in &self.notes {
            write!(f, "\n  {note}")?;
        }
        for w in &self.witnesses {
            write!(f, "\n  witness: {w}")?;
        }
        Ok(())
    }
}

fn common_length(code: &[Word]) -> Result<usize> {
    let n = code.first().map_or(0, Word::len);
    for w in code {
        if w.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: w.len(),
            });
        }
    }
    Ok(n)
}

fn check_limit(count: u128) -> Result<()> {
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

/// Every `τ(x)` with `|τ| ≤ t`, grouped by output length.
fn deletion_ball(x: &Word, t: usize) -> Result<Vec<HashSet<Word>>> {
    (0..=t.min(x.len()))
        .map(|d| enumerate_patterns(x.len(), d)?.map(|p| p.apply(x)).collect())
        .collect()
}

/// True iff no two distinct codewords yield the same output under deletion
/// patterns of weight at most `t`, decided by listing every output.
pub fn exhaustive_decodable(code: &[Word], t: usize) -> Result<bool> {
    let n = common_length(code)?;
    let per_word: u128 = (0..=t.min(n)).map(|d| binomial(n as u128, d as u128)).sum();
    check_limit(per_word.saturating_mul(code.len() as u128))?;
    let balls = code.iter().map(|x| deletion_ball(x, t)).collect::<Result<Vec<_>>>()?;
    for i in 0..code.len() {
        for j in i + 1..code.len() {
            if balls[i].iter().zip(&balls[j]).any(|(a, b)| !a.is_disjoint(b)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All supersequences of `x` of length `|x| + extra`, listed by scanning
/// every word of that length once.
fn supersequences(x: &Word, extra: usize) -> Result<HashSet<Word>> {
    let len = x.len() + extra;
    if len >= 64 {
        return Err(Error::EnumerationLimit {
            count: u128::MAX,
            limit: ENUMERATION_LIMIT,
        });
    }
    check_limit(1u128 << len)?;
    Ok((0..1u64 << len)
        .map(|v| Word::from_u64(v, len))
        .filter(|w| is_subsequence(x, w))
        .collect())
}

/// Insertion analogue of [`exhaustive_decodable`]: no common supersequence
/// reachable with at most `t` insertions into each of two codewords.
pub fn insertion_decodable(code: &[Word], t: usize) -> Result<bool> {
    common_length(code)?;
    let balls = code
        .iter()
        .map(|x| (0..=t).map(|e| supersequences(x, e)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    for i in 0..code.len() {
        for j in i + 1..code.len() {
            if balls[i].iter().zip(&balls[j]).any(|(a, b)| !a.is_disjoint(b)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Words reachable from `x` with at most `t` single-bit insertions and
/// deletions in total, by breadth-first search.
fn edit_ball(x: &Word, t: usize) -> HashSet<Vec<bool>> {
    let start: Vec<bool> = x.iter().collect();
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((w, d)) = queue.pop_front() {
        if d == t {
            continue;
        }
        let mut next = Vec::new();
        for i in 0..w.len() {
            let mut v = w.clone();
            v.remove(i);
            next.push(v);
        }
        for i in 0..=w.len() {
            for b in [false, true] {
                let mut v = w.clone();
                v.insert(i, b);
                next.push(v);
            }
        }
        for v in next {
            if seen.insert(v.clone()) {
                queue.push_back((v, d + 1));
            }
        }
    }
    seen
}

/// No two codewords share a word reachable with at most `t` insertions and
/// deletions in total.
pub fn mixed_decodable(code: &[Word], t: usize) -> Result<bool> {
    common_length(code)?;
    let balls: Vec<_> = code.iter().map(|x| edit_ball(x, t)).collect();
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            if !balls[i].is_disjoint(&balls[j]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Largest LCS over distinct pairs, or `None` for fewer than two codewords.
pub fn code_lcs(code: &[Word]) -> Option<usize> {
    let mut best = None;
    for i in 0..code.len() {
        for j in i + 1..code.len() {
            best = best.max(Some(lcs_len(&code[i], &code[j])));
        }
    }
    best
}

/// Checks that deletion decodability, the LCS bound `LCS(C) ≤ n − t − 1`
/// and (for `n ≤ 8`) insertion and mixed decodability all agree.
pub fn levenshtein_equivalence(code: &[Word], t: usize) -> Result<OracleReport> {
    let n = common_length(code)?;
    let by_lcs = code_lcs(code).is_none_or(|l| l + t < n);
    let by_deletions = exhaustive_decodable(code, t)?;
    let mut report = OracleReport::new("levenshtein", OracleMode::Exhaustive);
    let (ins, mixed) = if n <= 8 {
        (Some(insertion_decodable(code, t)?), Some(mixed_decodable(code, t)?))
    } else {
        (None, None)
    };
    let ok = by_lcs == by_deletions
        && ins.is_none_or(|v| v == by_lcs)
        && mixed.is_none_or(|v| v == by_lcs);
    report.record(ok, || {
        let words: Vec<String> = code.iter().map(|w| w.to_string()).collect();
        format!(
            "C={{{}}} t={t} lcs={by_lcs} deletions={by_deletions} insertions={ins:?} mixed={mixed:?}",
            words.join(",")
        )
    });
    Ok(report)
}

/// Every two-word code of length `1..=max_n` for `t ∈ {1, 2}`, then
/// `random_codes` codes of 2 to 4 distinct words of length `random_n`.
pub fn verify_levenshtein(max_n: usize, random_codes: u64, random_n: usize, seed: u64) -> Result<OracleReport> {
    let mut jobs: Vec<(Vec<Word>, usize)> = Vec::new();
    for n in 1..=max_n {
        for a in 0..1u64 << n {
            for b in a + 1..1u64 << n {
                for t in 1..=2 {
                    jobs.push((vec![Word::from_u64(a, n), Word::from_u64(b, n)], t));
                }
            }
        }
    }
    let exhaustive = jobs
        .into_par_iter()
        .map(|(code, t)| levenshtein_equivalence(&code, t))
        .try_reduce(|| OracleReport::new("levenshtein", OracleMode::Exhaustive), |a, b| Ok(a.merge(b)))?;
    let sampled = (0..random_codes)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::substream(seed, "levenshtein", i);
            let size = rng.random_range(2..=4).min(1usize << random_n.min(20));
            let mut words = HashSet::new();
            while words.len() < size {
                words.insert(rng.random_range(0..1u64 << random_n));
            }
            let mut words: Vec<u64> = words.into_iter().collect();
            words.sort_unstable();
            let code: Vec<Word> = words.into_iter().map(|v| Word::from_u64(v, random_n)).collect();
            let mut r = levenshtein_equivalence(&code, rng.random_range(1..=2))?;
            r.mode = OracleMode::Sampled;
            Ok(r)
        })
        .try_reduce(|| OracleReport::new("levenshtein", OracleMode::Exhaustive), |a, b| Ok(a.merge(b)))?;
    Ok(exhaustive.merge(sampled))
}

/// How [`verify_del_pattern_1`] chooses inner deletion patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternSearch {
    /// Every pattern within the weight bound.
    Exhaustive,
    /// Weight-stratified random patterns plus the structured ones.
    Sampled { samples: u64, seed: u64 },
}

/// Inner patterns that delete every `bit` of `g_j`, cut to `budget` from
/// the left, from the right and evenly spread.
fn structured_inner(book: &InnerCodebook, budget: usize) -> Result<Vec<(String, DeletionPattern)>> {
    let mut out = Vec::new();
    for j in 1..=book.k {
        let g = book.word(j)?;
        for bit in [false, true] {
            let pos: Vec<usize> = (0..book.l).filter(|&i| g.bit(i) == bit).map(|i| i + 1).collect();
            let take = budget.min(pos.len());
            let left = pos[..take].to_vec();
            let right = pos[pos.len() - take..].to_vec();
            let spread: Vec<usize> = (0..take).map(|k| pos[k * pos.len() / take.max(1)]).collect();
            for (tag, d) in [("left", left), ("right", right), ("spread", spread)] {
                out.push((
                    format!("delete-{}s-of-g{j}-{tag}", bit as u8),
                    DeletionPattern::from_unsorted(book.l, d)?,
                ));
            }
        }
    }
    Ok(out)
}

/// Every tested inner pattern within `L(1 − 2^{−λ} − 1/√R)` deletions
/// corrupts at most `λ − 1` inner codewords.
pub fn verify_del_pattern_1(book: &InnerCodebook, search: PatternSearch) -> Result<OracleReport> {
    let lambda = book.params.lambda;
    let allowed = (lambda - 1) as usize;
    let name = format!("del-pattern-1 K={} R={} L={} lambda={lambda}", book.k, book.r, book.l);
    let mode = match search {
        PatternSearch::Exhaustive => OracleMode::Exhaustive,
        PatternSearch::Sampled { .. } => OracleMode::Sampled,
    };
    let check = |sigma: &DeletionPattern, tag: &str| -> Result<OracleReport> {
        let mut r = OracleReport::new(&name, mode);
        let corrupted = book.corrupted(sigma)?;
        r.record(corrupted.len() <= allowed, || {
            format!("{tag} sigma={{{sigma}}} corrupted={corrupted}")
        });
        Ok(r)
    };
    let empty = || OracleReport::new(&name, mode);
    let Some(budget) = book.max_admissible_weight(lambda - 1) else {
        let mut r = empty();
        r.notes.push(format!("{name}: no pattern is within the bound"));
        return Ok(r);
    };
    let mut report = match search {
        PatternSearch::Exhaustive => {
            let count: u128 = (0..=budget).map(|w| binomial(book.l as u128, w as u128)).sum();
            check_limit(count)?;
            (0..=budget)
                .map(|w| {
                    enumerate_patterns(book.l, w)?
                        .par_bridge()
                        .map(|sigma| check(&sigma, "exhaustive"))
                        .try_reduce(empty, |a, b| Ok(a.merge(b)))
                })
                .try_fold(empty(), |acc, r| r.map(|r| acc.merge(r)))?
        }
        PatternSearch::Sampled { samples, seed } => {
            let random = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let mut rng = seed::substream(seed, "del-pattern-1", i);
                    let weight = rng.random_range(0..=budget);
                    check(&random_pattern(book.l, weight, &mut rng), &format!("sample{i}"))
                })
                .try_reduce(empty, |a, b| Ok(a.merge(b)))?;
            structured_inner(book, budget)?
                .into_iter()
                .map(|(tag, sigma)| check(&sigma, &tag))
                .try_fold(random, |acc, r| r.map(|r| acc.merge(r)))?
        }
    };
    report.notes.push(format!("{name}: weight bound {budget}"));
    Ok(report)
}

/// Toy codebooks whose admissible inner patterns can all be listed.
pub fn small_del_pattern_configs() -> Vec<(u32, u64, u32)> {
    vec![
        (2, 2, 1),
        (2, 2, 2),
        (2, 2, 3),
        (3, 2, 1),
        (3, 2, 2),
        (3, 2, 3),
        (3, 2, 4),
        (2, 4, 1),
        (2, 4, 2),
    ]
}

/// Codebook for an oracle run; the outer length is irrelevant here.
pub fn oracle_codebook(k: u32, r: u64, lambda: u32) -> Result<InnerCodebook> {
    InnerCodebook::new(&toy_params(k, r, lambda, 0.5, 4)?)
}

fn random_outer<R: Rng>(k: u32, n: usize, rng: &mut R) -> OuterWord {
    OuterWord((0..n).map(|_| rng.random_range(1..=k)).collect())
}

/// A full-length pattern in which a random set of at least `δn` blocks is
/// admissible (random or structured inner deletions) and every other block
/// loses more than the admissible amount.
fn blockwise_pattern<R: Rng>(book: &InnerCodebook, budget: usize, rng: &mut R) -> Result<DeletionPattern> {
    let n = book.params.n;
    let kept = book.params.kept();
    let count = rng.random_range(kept..=n);
    let mut admissible = vec![false; n];
    for b in sample(rng, n, count) {
        admissible[b] = true;
    }
    let structured = structured_inner(book, budget)?;
    let mut parts = Vec::with_capacity(n);
    for adm in admissible {
        let inner = if adm {
            if rng.random_bool(0.5) {
                structured[rng.random_range(0..structured.len())].1.clone()
            } else {
                let w = rng.random_range(0..=budget);
                random_pattern(book.l, w, rng)
            }
        } else if rng.random_bool(0.5) {
            DeletionPattern::full(book.l)
        } else {
            let w = rng.random_range(budget + 1..=book.l);
            random_pattern(book.l, w, rng)
        };
        parts.push(inner);
    }
    Ok(DeletionPattern::concat(&parts))
}

/// Whenever `τ(ψ(X)) ⊑ ψ(Y)` for a blockwise-admissible `τ`, the kept
/// outer symbols of `X` must be matchable in `Y` with caps `(2^λ, ⌊√R⌋)`
/// and the corruption sets of `τ`'s signature.
pub fn verify_match_implication(book: &InnerCodebook, samples: u64, seed: u64) -> Result<OracleReport> {
    let lambda = book.params.lambda;
    let budget = book
        .max_admissible_weight(lambda - 1)
        .ok_or_else(|| Error::InvalidParameter("no admissible inner pattern exists".into()))?;
    let (s, t) = MatchConfig::standard_caps(lambda, book.r);
    let name = "match-implication";
    let per: Vec<(bool, OracleReport)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::substream(seed, name, i);
            let x = random_outer(book.k, book.params.n, &mut rng);
            let y = random_outer(book.k, book.params.n, &mut rng);
            let tau = blockwise_pattern(book, budget, &mut rng)?;
            let mut r = OracleReport::new(name, OracleMode::Sampled);
            let received = tau.apply(&book.encode(&x)?)?;
            if !is_subsequence(&received, &book.encode(&y)?) {
                return Ok((false, r));
            }
            let ok = match book.extract_signature(&tau) {
                Ok(sig) => {
                    let cfg = MatchConfig::new(s, t, sig.corruption_sets.clone())?;
                    is_matchable(&sig.project(&x), &y, &cfg)?
                }
                Err(Error::TooManyCorrupted { .. }) => false,
                Err(e) => return Err(e),
            };
            r.record(ok, || format!("seed={seed} sample={i} X={x} Y={y} tau={{{tau}}}"));
            Ok((true, r))
        })
        .collect::<Result<_>>()?;
    let relevant = per.iter().filter(|(hit, _)| *hit).count();
    let mut report = per
        .into_iter()
        .fold(OracleReport::new(name, OracleMode::Sampled), |a, (_, r)| a.merge(r));
    report
        .notes
        .push(format!("{relevant} of {samples} samples had the received word embedded"));
    Ok(report)
}

/// Random `(Y, S_1..S_m)` with `K ≤ max_k`, `m ≤ max_m` and `|S_i| = λ − 1`:
/// matchable counts under the sets never exceed those under all `[λ−1]`.
pub fn verify_match_dominance(max_k: u32, max_m: usize, samples: u64, seed: u64) -> Result<OracleReport> {
    let name = "match-dominance";
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::substream(seed, name, i);
            let k = rng.random_range(2..=max_k.max(2));
            let lambda = rng.random_range(1..=k);
            let m = rng.random_range(1..=max_m);
            let n = rng.random_range(1..=2 * m + 2);
            let y = random_outer(k, n, &mut rng);
            let sets: Vec<SymbolSet> = (0..m)
                .map(|_| SymbolSet::from_symbols(sample(&mut rng, k as usize, (lambda - 1) as usize).into_iter().map(|v| v as u32 + 1)))
                .collect();
            let t = rng.random_range(1..=4);
            let cfg = MatchConfig::new(1 << lambda, t, sets)?;
            let (with_sets, worst) = match_count_dominance(&y, &cfg, k, m, lambda)?;
            let mut r = OracleReport::new(name, OracleMode::Sampled);
            r.record(with_sets <= worst, || {
                let sets: Vec<String> = cfg.sets.iter().map(|s| s.to_string()).collect();
                format!("K={k} lambda={lambda} t={t} Y={y} sets={} counts={with_sets}>{worst}", sets.join(";"))
            });
            Ok(r)
        })
        .try_reduce(|| OracleReport::new(name, OracleMode::Sampled), |a, b| Ok(a.merge(b)))
}

fn check_geometric(j: u64, k: u64, cap: u64) -> Result<()> {
    if j == 0 || j > k {
        return Err(Error::InvalidParameter(format!("j = {j} outside [1, {k}]")));
    }
    if cap == 0 {
        return Err(Error::InvalidParameter("cap must be at least 1".into()));
    }
    Ok(())
}

/// `E[min(G, cap)]` for `G` geometric on `{1, 2, ...}` with success
/// probability `j/K`, as the finite geometric series
/// `(1 − (1 − j/K)^cap) / (j/K)`.
pub fn capped_geometric_mean(j: u64, k: u64, cap: u64) -> Result<BigRational> {
    check_geometric(j, k, cap)?;
    let c = u32::try_from(cap).map_err(|_| Error::InvalidParameter(format!("cap {cap} too large")))?;
    let kc = BigInt::from(k).pow(c);
    let ac = BigInt::from(k - j).pow(c);
    Ok(BigRational::new((kc.clone() - ac) * BigInt::from(k), kc * BigInt::from(j)))
}

/// The same expectation summed term by term over the probability mass
/// function: `Σ_{g<cap} g·P(G = g) + cap·P(G ≥ cap)`.
pub fn capped_geometric_mean_by_mass(j: u64, k: u64, cap: u64) -> Result<BigRational> {
    check_geometric(j, k, cap)?;
    let (a, kk) = (BigUint::from(k - j), BigUint::from(k));
    // Common denominator K^cap; term g is g·j·a^{g−1}·K^{cap−g}.
    let mut k_pow = BigUint::one();
    for _ in 1..cap {
        k_pow *= &kk;
    }
    let mut a_pow = BigUint::one();
    let mut sum = BigUint::zero();
    for g in 1..cap {
        sum += &a_pow * &k_pow * BigUint::from(g) * BigUint::from(j);
        a_pow *= &a;
        k_pow /= &kk;
    }
    sum += a_pow * BigUint::from(cap) * &kk;
    let mut den = BigUint::one();
    for _ in 0..cap {
        den *= &kk;
    }
    Ok(BigRational::new(BigInt::from(sum), BigInt::from(den)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeomExpectation {
    pub value: BigRational,
    pub cap: u64,
    /// Whether `R` is a perfect square, so that the cap is exactly `√R`.
    pub exact_cap: bool,
}

/// `E[min(Geometric(j/K), ⌊√R⌋)]`.
pub fn geom_expectation(j: u64, k: u64, r: u64) -> Result<GeomExpectation> {
    let cap = r.sqrt();
    Ok(GeomExpectation {
        value: capped_geometric_mean(j, k, cap)?,
        cap,
        exact_cap: cap * cap == r,
    })
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact checks at `R = 4K⁴` for a power of two `K`: both expectation code
/// paths agree; `E[min(G, √R − 1)] > K/(2j) − 1` for every `j` (when
/// `K > 8`); and the `J`-averaged expectations of the two averaged bounds
/// are at least `log₂K / 4` for every `λ ≤ log₂K` and every `λ' ∈ [λ, K]`.
pub fn verify_geometric(k: u64) -> Result<OracleReport> {
    if k < 2 || !k.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("K = {k} must be a power of two")));
    }
    let log_k = k.trailing_zeros() as u64;
    let cap = 2 * k * k;
    let name = format!("geometric K={k}");
    let per_j: Vec<(BigRational, BigRational, bool)> = (1..=k)
        .into_par_iter()
        .map(|j| {
            let full = capped_geometric_mean(j, k, cap)?;
            let short = capped_geometric_mean(j, k, cap - 1)?;
            let agree = full == capped_geometric_mean_by_mass(j, k, cap)?
                && short == capped_geometric_mean_by_mass(j, k, cap - 1)?;
            Ok((full, short, agree))
        })
        .collect::<Result<_>>()?;
    let mut report = OracleReport::new(&name, OracleMode::Exhaustive);
    for (idx, (_, short, agree)) in per_j.iter().enumerate() {
        let j = idx as u64 + 1;
        report.record(*agree, || format!("closed form and mass sum differ at j={j}"));
        if k > 8 {
            let bound = ratio(k as i64, 2 * j as i64) - BigRational::one();
            report.record(short > &bound, || format!("capped-mean bound fails at j={j}"));
        }
    }
    let target = ratio(log_k as i64, 4);
    for lambda in 1..=log_k {
        let tail: BigRational = per_j[(lambda - 1) as usize..].iter().map(|e| e.0.clone()).sum();
        let mixed = (tail + ratio(lambda as i64 - 1, 1)) / ratio(k as i64, 1);
        report.record(mixed >= target, || format!("uniform-J average below log K/4 at lambda={lambda}"));
        let mut partial = BigRational::zero();
        for hi in lambda..=k {
            partial += per_j[(hi - 1) as usize].0.clone();
            let avg = partial.clone() / ratio((hi - lambda + 1) as i64, 1);
            report.record(avg >= target, || {
                format!("window average below log K/4 at lambda={lambda} lambda'={hi}")
            });
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsorptionEstimate {
    pub n: usize,
    /// Length of the uniform word, `⌊0.6n⌋`.
    pub short_len: usize,
    /// Length of the alternating word, `⌊0.91n⌋`.
    pub long_len: usize,
    /// Whether either length needed rounding down.
    pub rounded: bool,
    pub trials: u64,
    pub hits: u64,
    pub estimate: f64,
    /// Exact probability from the binomial form of greedy embedding.
    pub exact: f64,
}

fn absorption_lengths(n: usize) -> (usize, usize, bool) {
    (3 * n / 5, 91 * n / 100, !(3 * n).is_multiple_of(5) || !(91 * n).is_multiple_of(100))
}

/// `Pr[uniform word of length ⌊0.6n⌋ ⊑ 0101…]` with the alternating word of
/// length `⌊0.91n⌋`. Greedy embedding spends one position on a symbol that
/// alternates with the previous match and two otherwise, so the probability
/// is `Pr[m + Bin(m, 1/2) ≤ len]`.
pub fn alternating_absorption_exact(n: usize) -> f64 {
    let (m, len, _) = absorption_lengths(n);
    if len < m {
        return 0.0;
    }
    let slack = (len - m).min(m);
    let hits: BigUint = (0..=slack).map(|i| binomial(BigUint::from(m), BigUint::from(i))).sum();
    BigRational::new(BigInt::from(hits), BigInt::from(BigUint::one() << m))
        .to_f64()
        .unwrap_or(f64::NAN)
}

pub fn alternating_absorption<R: Rng>(n: usize, trials: u64, rng: &mut R) -> AbsorptionEstimate {
    let (short_len, long_len, rounded) = absorption_lengths(n);
    let target = Word::alternating(long_len);
    let hits = (0..trials)
        .filter(|_| {
            let w: Word = (0..short_len).map(|_| rng.random_bool(0.5)).collect();
            is_subsequence(&w, &target)
        })
        .count() as u64;
    AbsorptionEstimate {
        n,
        short_len,
        long_len,
        rounded,
        trials,
        hits,
        estimate: if trials == 0 { 0.0 } else { hits as f64 / trials as f64 },
        exact: alternating_absorption_exact(n),
    }
}

/// `h(p) = −p log₂p − (1−p) log₂(1−p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// Number of binary words within Hamming distance `radius` of a fixed
/// word of length `n`.
pub fn hamming_ball_size(n: usize, radius: usize) -> u128 {
    (0..=radius.min(n)).map(|i| binomial(n as u128, i as u128)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BitflipConfig {
    pub n: usize,
    pub rate: f64,
    pub p: f64,
    pub seeds: u64,
    /// Error vectors tried per seed.
    pub vectors: usize,
}

/// Random stochastic codes against fixed bit-flip vectors. Each seed draws
/// `2^{⌊rate·n⌋}` distinct codewords split into groups of `n`, one group per
/// message; for each error vector `e` of weight `⌊pn⌋` and each message the
/// failure fraction is the share of its group whose flipped word lies
/// within `⌊pn⌋` of another message's codeword. A seed violates when its
/// worst failure fraction exceeds `1/log₂n`.
pub fn oblivious_bitflip_demo(cfg: &BitflipConfig, master_seed: u64) -> Result<OracleReport> {
    let BitflipConfig { n, rate, p, seeds, vectors } = *cfg;
    if !(2..=63).contains(&n) {
        return Err(Error::InvalidParameter(format!("n = {n} outside [2, 63]")));
    }
    let h = binary_entropy(p)?;
    if !(rate > 0.0 && rate < 1.0 - h) {
        return Err(Error::InvalidParameter(format!(
            "rate {rate} must lie in (0, 1 - h(p) = {:.4})",
            1.0 - h
        )));
    }
    let size = 1usize << (rate * n as f64).floor() as u32;
    let messages = size / n;
    if messages < 1 {
        return Err(Error::InvalidParameter(format!("{size} codewords cannot fill a group of {n}")));
    }
    let weight = (p * n as f64 + 1e-9).floor() as usize;
    let epsilon = 1.0 / (n as f64).log2();
    let name = format!("bitflip n={n} rate={rate} p={p}");
    let worst: Vec<f64> = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let mut rng = seed::substream(master_seed, "bitflip", s);
            let mut seen = HashSet::new();
            let mut code = Vec::with_capacity(messages * n);
            while code.len() < messages * n {
                let c = rng.random_range(0..1u64 << n);
                if seen.insert(c) {
                    code.push(c);
                }
            }
            let mut worst = 0.0f64;
            for _ in 0..vectors {
                let e = sample(&mut rng, n, weight).into_iter().fold(0u64, |acc, i| acc | 1 << i);
                for m in 0..messages {
                    let failures = code[m * n..(m + 1) * n]
                        .iter()
                        .filter(|&&c| {
                            let received = c ^ e;
                            code.iter()
                                .enumerate()
                                .any(|(idx, &o)| idx / n != m && (received ^ o).count_ones() as usize <= weight)
                        })
                        .count();
                    worst = worst.max(failures as f64 / n as f64);
                }
            }
            worst
        })
        .collect();
    let mut report = OracleReport::new(&name, OracleMode::Sampled);
    for (s, w) in worst.iter().enumerate() {
        report.record(*w <= epsilon, || format!("seed {s}: worst failure fraction {w:.4} > {epsilon:.4}"));
    }
    let mean = worst.iter().sum::<f64>() / worst.len().max(1) as f64;
    report.notes.push(format!(
        "{messages} messages x {n} codewords, flip weight {weight}, epsilon {epsilon:.4}, mean worst failure {mean:.4}"
    ));
    Ok(report)
}

/// Identifiers accepted by the `verify` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleId {
    Levenshtein,
    DelPattern1,
    MatchImplication,
    MatchDominance,
    Geometric,
    Absorption,
    Bitflip,
}

impl OracleId {
    pub const ALL: [OracleId; 7] = [
        OracleId::Levenshtein,
        OracleId::DelPattern1,
        OracleId::MatchImplication,
        OracleId::MatchDominance,
        OracleId::Geometric,
        OracleId::Absorption,
        OracleId::Bitflip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OracleId::Levenshtein => "levenshtein",
            OracleId::DelPattern1 => "del-pattern-1",
            OracleId::MatchImplication => "match-implication",
            OracleId::MatchDominance => "match-dominance",
            OracleId::Geometric => "geometric",
            OracleId::Absorption => "absorption",
            OracleId::Bitflip => "bitflip",
        }
    }
}

impl FromStr for OracleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OracleId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown oracle {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Skip every sampled component.
    pub exhaustive: bool,
    /// Overrides the default sample or trial count.
    pub samples: Option<u64>,
    pub seed: u64,
}

/// Runs one oracle with its default desk-scale configuration.
pub fn run_oracle(id: OracleId, opts: &VerifyOptions) -> Result<OracleReport> {
    let samples = |default: u64| if opts.exhaustive { 0 } else { opts.samples.unwrap_or(default) };
    let mut report = match id {
        OracleId::Levenshtein => verify_levenshtein(6, samples(1000), 8, opts.seed)?,
        OracleId::DelPattern1 => {
            let mut r = small_del_pattern_configs()
                .into_iter()
                .map(|(k, r, l)| verify_del_pattern_1(&oracle_codebook(k, r, l)?, PatternSearch::Exhaustive))
                .try_fold(OracleReport::new("", OracleMode::Exhaustive), |a, r| r.map(|r| a.merge(r)))?;
            let n = samples(100_000);
            if n > 0 {
                let sampled = PatternSearch::Sampled {
                    samples: n,
                    seed: opts.seed,
                };
                r = r.merge(verify_del_pattern_1(&oracle_codebook(2, 16, 2)?, sampled)?);
            }
            r
        }
        OracleId::MatchImplication => {
            let book = InnerCodebook::new(&toy_params(2, 16, 2, 0.25, 8)?)?;
            verify_match_implication(&book, samples(10_000), opts.seed)?
        }
        OracleId::MatchDominance => verify_match_dominance(3, 5, samples(100), opts.seed)?,
        OracleId::Geometric => [16, 32, 64]
            .into_iter()
            .map(verify_geometric)
            .try_fold(OracleReport::new("", OracleMode::Exhaustive), |a, r| r.map(|r| a.merge(r)))?,
        OracleId::Absorption => {
            let trials = opts.samples.unwrap_or(10_000);
            let mut rng = seed::substream(opts.seed, "absorption", 0);
            let est = alternating_absorption(200, trials, &mut rng);
            let mut r = OracleReport::new("", OracleMode::Sampled);
            r.record(est.estimate >= 0.99, || {
                format!("n=200: {} of {} embedded, estimate {:.4} < 0.99", est.hits, est.trials, est.estimate)
            });
            r.notes.push(format!(
                "estimate {:.4} over {} trials, exact {:.4}",
                est.estimate, est.trials, est.exact
            ));
            r
        }
        OracleId::Bitflip => oblivious_bitflip_demo(
            &BitflipConfig {
                n: 20,
                rate: 0.3,
                p: 0.1,
                seeds: opts.samples.unwrap_or(100),
                vectors: 20,
            },
            opts.seed,
        )?,
    };
    report.name = id.name().to_string();
    Ok(report)
}
