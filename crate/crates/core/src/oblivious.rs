//! Outer-code assembly against oblivious deletion patterns: matchability
//! mass `f(Y)`, filtering, random sampling, confusability graphs, unique
//! decoding, average-case error and the grouped stochastic wrapper.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::construction::{CodeParams, InnerCodebook, OuterWord, SymbolSet};
use crate::error::{Error, Result};
use crate::matching::{enumeration_size, matchable_raw, MatchConfig, ENUMERATION_LIMIT};
use crate::seed;
use crate::words::{is_subsequence, DeletionPattern, Word};

/// Everything `f(Y)` depends on: alphabet, `λ`, move caps and `|Z| = δn`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FSetup {
    pub k: u32,
    pub lambda: u32,
    pub s: usize,
    pub t: usize,
    /// Length of the projected words `Z`.
    pub m: usize,
}

impl FSetup {
    pub fn from_params(params: &CodeParams) -> Result<Self> {
        let sizes = params.sizes()?;
        let (s, t) = MatchConfig::standard_caps(params.lambda, sizes.r);
        Ok(Self {
            k: sizes.k,
            lambda: params.lambda,
            s,
            t,
            m: params.kept(),
        })
    }

    fn worst_sets(&self) -> Vec<SymbolSet> {
        vec![SymbolSet::prefix(self.lambda.saturating_sub(1)); self.m]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FMode {
    Exact,
    MonteCarlo { trials: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FEstimate {
    pub value: f64,
    /// `(matchable, K^m)` in exact mode.
    pub exact: Option<(u128, u128)>,
    pub trials: Option<u64>,
    /// 95% normal-approximation half-width in Monte-Carlo mode.
    pub half_width: Option<f64>,
}

/// Number of `Z ∈ [K]^m` matchable in `y` under all-`[λ−1]` sets, and `K^m`.
///
/// The matching reads `Z_a` only while its pointer sits at `a`, so the
/// count follows from a forward pass over `(a, b, A-run, B-run, Z_a)` in
/// which each new `Z_a` splits the weight evenly across `[K]`.
pub fn matchable_count(y: &OuterWord, setup: &FSetup) -> Result<(u128, u128)> {
    let FSetup { k, s, t, m, .. } = *setup;
    let n = y.len();
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter("matching needs nonempty words".into()));
    }
    let total = (k as u128)
        .checked_pow(m as u32)
        .ok_or_else(|| Error::InvalidParameter("K^m overflows u128".into()))?;
    let base = SymbolSet::prefix(setup.lambda.saturating_sub(1));
    let ku = k as usize;
    let idx = |a: usize, b: usize, ra: usize, rb: usize, x: usize| {
        (((a * n + b) * (s + 1) + ra) * (t + 1) + rb) * ku + x
    };
    let mut w = vec![0u128; m * n * (s + 1) * (t + 1) * ku];
    for x in 0..ku {
        w[idx(0, 0, 0, 0, x)] = total / k as u128;
    }
    let mut success = 0u128;
    for a in 0..m {
        for b in 0..n {
            for ra in 0..=s {
                for rb in 0..=t {
                    for x in 0..ku {
                        let cur = w[idx(a, b, ra, rb, x)];
                        if cur == 0 {
                            continue;
                        }
                        if a + 1 == m {
                            success += cur;
                            continue;
                        }
                        if b + 1 == n {
                            continue;
                        }
                        let sym = x as u32 + 1;
                        let move_a = if ra == s {
                            false
                        } else if rb == t {
                            true
                        } else {
                            base.contains(sym) || sym >= y.0[b]
                        };
                        if move_a {
                            let share = cur / k as u128;
                            for nx in 0..ku {
                                w[idx(a + 1, b, ra + 1, 0, nx)] += share;
                            }
                        } else {
                            w[idx(a, b + 1, 0, rb + 1, x)] += cur;
                        }
                    }
                }
            }
        }
    }
    Ok((success, total))
}

/// Estimates `f(Y)`, the probability that a uniform `Z ∈ [K]^m` is
/// matchable in `Y` under all-`[λ−1]` sets.
pub fn estimate_f<R: Rng>(y: &OuterWord, setup: &FSetup, mode: FMode, rng: &mut R) -> Result<FEstimate> {
    match mode {
        FMode::Exact => {
            let (count, total) = matchable_count(y, setup)?;
            Ok(FEstimate {
                value: count as f64 / total as f64,
                exact: Some((count, total)),
                trials: None,
                half_width: None,
            })
        }
        FMode::MonteCarlo { trials } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("trials must be positive".into()));
            }
            let sets = setup.worst_sets();
            let mut z = vec![0u32; setup.m];
            let mut hits = 0u64;
            for _ in 0..trials {
                for v in z.iter_mut() {
                    *v = rng.random_range(1..=setup.k);
                }
                hits += matchable_raw(&z, &y.0, setup.s, setup.t, &sets) as u64;
            }
            let value = hits as f64 / trials as f64;
            Ok(FEstimate {
                value,
                exact: None,
                trials: Some(trials),
                half_width: Some(1.96 * (value * (1.0 - value) / trials as f64).sqrt()),
            })
        }
    }
}

/// Exact probability that uniform `X ∈ [K]^m` is matchable in uniform
/// `Y ∈ [K]^n` under all-`[λ−1]` sets.
pub fn uniform_matchability(setup: &FSetup, n: usize) -> f64 {
    let FSetup { k, s, t, m, .. } = *setup;
    if m <= 1 {
        return 1.0;
    }
    if n <= 1 {
        return 0.0;
    }
    let base = SymbolSet::prefix(setup.lambda.saturating_sub(1));
    let ku = k as usize;
    let idx = |a: usize, b: usize, ra: usize, rb: usize, x: usize, y: usize| {
        ((((a * n + b) * (s + 1) + ra) * (t + 1) + rb) * ku + x) * ku + y
    };
    let mut w = vec![0f64; m * n * (s + 1) * (t + 1) * ku * ku];
    let p = 1.0 / k as f64;
    for x in 0..ku {
        for y in 0..ku {
            w[idx(0, 0, 0, 0, x, y)] = p * p;
        }
    }
    let mut success = 0.0;
    for a in 0..m {
        for b in 0..n {
            for ra in 0..=s {
                for rb in 0..=t {
                    for x in 0..ku {
                        for y in 0..ku {
                            let cur = w[idx(a, b, ra, rb, x, y)];
                            if cur == 0.0 {
                                continue;
                            }
                            if a + 1 == m {
                                success += cur;
                                continue;
                            }
                            if b + 1 == n {
                                continue;
                            }
                            let move_a = if ra == s {
                                false
                            } else if rb == t {
                                true
                            } else {
                                base.contains(x as u32 + 1) || x >= y
                            };
                            if move_a {
                                for nx in 0..ku {
                                    w[idx(a + 1, b, ra + 1, 0, nx, y)] += cur * p;
                                }
                            } else {
                                for ny in 0..ku {
                                    w[idx(a, b + 1, 0, rb + 1, x, ny)] += cur * p;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    success
}

/// Monte-Carlo count of uniform pairs `X ∈ [K]^m`, `Y ∈ [K]^n` that are
/// matchable under all-`[λ−1]` sets. Returns `(hits, trials)`.
pub fn sample_matchability(setup: &FSetup, n: usize, trials: u64, master_seed: u64) -> (u64, u64) {
    let sets = setup.worst_sets();
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = seed::substream(master_seed, &format!("matchability-{n}"), i);
            let x: Vec<u32> = (0..setup.m).map(|_| rng.random_range(1..=setup.k)).collect();
            let y: Vec<u32> = (0..n).map(|_| rng.random_range(1..=setup.k)).collect();
            matchable_raw(&x, &y, setup.s, setup.t, &sets)
        })
        .count() as u64;
    (hits, trials)
}

/// Least-squares line through `(x, y)` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(points: &[(f64, f64)]) -> Option<LineFit> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Sizes and tolerances for sampling the outer code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplingPlan {
    pub beta: f64,
    pub gamma: f64,
    /// Target code size `2^{γn}`.
    pub m_target: f64,
    /// `2^{−γn/2}`.
    pub epsilon: f64,
    pub n: usize,
}

impl SamplingPlan {
    /// `β = log2 K / (16R)`, `γ = β/4`, `M = 2^{γn}`, `ε = 2^{−γn/2}`.
    pub fn from_params(params: &CodeParams) -> Result<Self> {
        let sizes = params.sizes()?;
        let beta = (sizes.k as f64).log2() / (16.0 * sizes.r as f64);
        Self::new(beta, params.n, None)
    }

    /// Plan with an explicit `β` and optionally an explicit target size.
    pub fn new(beta: f64, n: usize, m_target: Option<f64>) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!("beta = {beta} outside (0, 1)")));
        }
        let gamma = beta / 4.0;
        let m_target = m_target.unwrap_or_else(|| (gamma * n as f64).exp2());
        if m_target <= 0.0 {
            return Err(Error::InvalidParameter("target code size must be positive".into()));
        }
        Ok(Self {
            beta,
            gamma,
            m_target,
            epsilon: (-gamma * n as f64 / 2.0).exp2(),
            n,
        })
    }

    /// Plan whose filter threshold is twice the pool's mean `f`, so that by
    /// averaging at most half the pool is discarded.
    pub fn from_mean_f(mean_f: f64, n: usize, m_target: Option<f64>) -> Result<Self> {
        if !(mean_f > 0.0 && mean_f <= 1.0) {
            return Err(Error::InvalidParameter(format!("mean f = {mean_f} outside (0, 1]")));
        }
        let beta = (-mean_f.log2() / n as f64).max(f64::MIN_POSITIVE);
        Self::new(beta, n, m_target)
    }

    /// `log2` of the filter threshold `2·2^{−βn}`.
    pub fn threshold_log2(&self) -> f64 {
        1.0 - self.beta * self.n as f64
    }

    pub fn threshold(&self) -> f64 {
        self.threshold_log2().exp2()
    }

    /// `min(1, M/|W|)`.
    pub fn inclusion_prob(&self, pool_size: usize) -> f64 {
        if pool_size == 0 {
            return 1.0;
        }
        (self.m_target / pool_size as f64).min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterReport {
    pub kept: Vec<OuterWord>,
    pub discarded: usize,
    /// Indices into the input pool whose Monte-Carlo estimate lies within
    /// two half-widths of the threshold.
    pub borderline: Vec<usize>,
}

impl FilterReport {
    pub fn discarded_fraction(&self) -> f64 {
        let total = self.kept.len() + self.discarded;
        if total == 0 {
            0.0
        } else {
            self.discarded as f64 / total as f64
        }
    }
}

/// Keeps the members of `pool` with `f(Y) < 2·2^{−βn}`.
pub fn filter_candidates(
    pool: &[OuterWord],
    setup: &FSetup,
    plan: &SamplingPlan,
    mode: FMode,
    master_seed: u64,
) -> Result<FilterReport> {
    let threshold_log2 = plan.threshold_log2();
    let threshold = plan.threshold();
    let verdicts = pool
        .par_iter()
        .enumerate()
        .map(|(i, y)| -> Result<(bool, bool)> {
            let mut rng = seed::substream(master_seed, "filter", i as u64);
            let est = estimate_f(y, setup, mode, &mut rng)?;
            let keep = match est.exact {
                Some((count, total)) => {
                    count == 0 || (count as f64).log2() - (total as f64).log2() < threshold_log2
                }
                None => est.value < threshold,
            };
            let border = est
                .half_width
                .is_some_and(|h| (est.value - threshold).abs() <= 2.0 * h);
            Ok((keep, border))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = FilterReport {
        kept: Vec::new(),
        discarded: 0,
        borderline: Vec::new(),
    };
    for (i, (keep, border)) in verdicts.into_iter().enumerate() {
        if keep {
            report.kept.push(pool[i].clone());
        } else {
            report.discarded += 1;
        }
        if border {
            report.borderline.push(i);
        }
    }
    Ok(report)
}

/// All of `[K]^n`, lexicographically.
pub fn all_outer_words(k: u32, n: usize) -> Result<Vec<OuterWord>> {
    let total = enumeration_size(k, n)?;
    Ok((0..total).map(|i| OuterWord::from_index(i, k, n)).collect())
}

/// Includes each member independently with probability `inclusion_prob`.
pub fn sample_outer_code<R: Rng>(w: &[OuterWord], inclusion_prob: f64, rng: &mut R) -> Result<Vec<OuterWord>> {
    if !(inclusion_prob > 0.0 && inclusion_prob <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "inclusion probability {inclusion_prob} outside (0, 1]"
        )));
    }
    Ok(w.iter()
        .filter(|_| inclusion_prob >= 1.0 || rng.random_bool(inclusion_prob))
        .cloned()
        .collect())
}

/// Directed graph on a pool with an edge `Y → X` whenever the projection
/// of `X` is matchable in `Y` and `X ≠ Y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusabilityGraph {
    pub vertices: usize,
    /// `out[y]` lists the `x` with an edge `y → x`, ascending.
    pub out: Vec<Vec<usize>>,
}

impl ConfusabilityGraph {
    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn out_degrees(&self) -> Vec<usize> {
        self.out.iter().map(Vec::len).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices];
        for xs in &self.out {
            for &x in xs {
                deg[x] += 1;
            }
        }
        deg
    }

    pub fn max_out_degree(&self) -> usize {
        self.out_degrees().into_iter().max().unwrap_or(0)
    }

    pub fn max_in_degree(&self) -> usize {
        self.in_degrees().into_iter().max().unwrap_or(0)
    }

    /// Subgraph induced by the vertices with `keep[v]`, reindexed in order.
    pub fn induced(&self, keep: &[bool]) -> ConfusabilityGraph {
        let mut new_index = vec![usize::MAX; self.vertices];
        let mut next = 0;
        for (v, &k) in keep.iter().enumerate() {
            if k {
                new_index[v] = next;
                next += 1;
            }
        }
        let out = (0..self.vertices)
            .filter(|&v| keep[v])
            .map(|v| {
                self.out[v]
                    .iter()
                    .filter(|&&x| keep[x])
                    .map(|&x| new_index[x])
                    .collect()
            })
            .collect();
        ConfusabilityGraph { vertices: next, out }
    }
}

/// Builds the graph for projection positions `kept` (1-based) and the
/// given caps and sets; `cfg.sets.len()` must equal `kept.len()`.
pub fn build_confusability_graph(pool: &[OuterWord], kept: &[usize], cfg: &MatchConfig) -> Result<ConfusabilityGraph> {
    if cfg.sets.len() != kept.len() {
        return Err(Error::LengthMismatch {
            expected: kept.len(),
            actual: cfg.sets.len(),
        });
    }
    let pairs = (pool.len() as u128).pow(2);
    if pairs > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            count: pairs,
            limit: ENUMERATION_LIMIT,
        });
    }
    let projected: Vec<OuterWord> = pool.iter().map(|x| x.project(kept)).collect();
    if projected.iter().any(OuterWord::is_empty) || pool.iter().any(OuterWord::is_empty) {
        return Err(Error::InvalidParameter("graph needs nonempty words".into()));
    }
    let out = pool
        .par_iter()
        .enumerate()
        .map(|(yi, y)| {
            projected
                .iter()
                .enumerate()
                .filter(|&(xi, z)| xi != yi && matchable_raw(&z.0, &y.0, cfg.s, cfg.t, &cfg.sets))
                .map(|(xi, _)| xi)
                .collect()
        })
        .collect();
    Ok(ConfusabilityGraph {
        vertices: pool.len(),
        out,
    })
}

/// Fraction of vertices with indegree zero in a random induced subgraph
/// that keeps each vertex with probability `inclusion_prob`; `None` when
/// the sample is empty.
pub fn isolated_fraction<R: Rng>(graph: &ConfusabilityGraph, inclusion_prob: f64, rng: &mut R) -> Option<f64> {
    let keep: Vec<bool> = (0..graph.vertices).map(|_| rng.random_bool(inclusion_prob)).collect();
    let sub = graph.induced(&keep);
    if sub.vertices == 0 {
        return None;
    }
    let zero = sub.in_degrees().iter().filter(|&&d| d == 0).count();
    Some(zero as f64 / sub.vertices as f64)
}

/// Index of the unique codeword containing `received` as a subsequence;
/// `None` when no codeword or several codewords do.
pub fn unique_decode(received: &Word, code: &[Word]) -> Option<usize> {
    let mut found = None;
    for (i, c) in code.iter().enumerate() {
        if is_subsequence(received, c) {
            if found.is_some() {
                return None;
            }
            found = Some(i);
        }
    }
    found
}

/// Indices `x` for which `τ(x)` is a subsequence of some other codeword.
pub fn confused_indices(code: &[Word], tau: &DeletionPattern) -> Result<Vec<usize>> {
    let received = code.iter().map(|c| tau.apply(c)).collect::<Result<Vec<_>>>()?;
    Ok((0..code.len())
        .into_par_iter()
        .filter(|&x| {
            code.iter()
                .enumerate()
                .any(|(y, c)| y != x && is_subsequence(&received[x], c))
        })
        .collect())
}

/// `|{x : ∃ y ≠ x, τ(x) ⊑ y}| / |C|`; zero for an empty code.
pub fn average_case_error(code: &[Word], tau: &DeletionPattern) -> Result<f64> {
    if code.is_empty() {
        return Ok(0.0);
    }
    Ok(confused_indices(code, tau)?.len() as f64 / code.len() as f64)
}

/// Disjoint equal-size groups of codewords, one per message.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticCode {
    pub code: Vec<Word>,
    /// `groups[m]` holds indices into `code`.
    pub groups: Vec<Vec<usize>>,
    /// The codewords actually used, in group order; decoding runs over
    /// these.
    pub used: Vec<Word>,
    owner: Vec<usize>,
}

/// Splits a random half of `C` into `⌊|C|/(2·group_size)⌋` groups.
pub fn make_stochastic<R: Rng>(code: &[Word], group_size: usize, rng: &mut R) -> Result<StochasticCode> {
    if group_size == 0 {
        return Err(Error::InvalidParameter("group size must be positive".into()));
    }
    if code.len() < 2 * group_size {
        return Err(Error::InsufficientCodewords {
            have: code.len(),
            need: 2 * group_size,
        });
    }
    let count = code.len() / (2 * group_size);
    let mut order: Vec<usize> = (0..code.len()).collect();
    order.shuffle(rng);
    let groups: Vec<Vec<usize>> = order[..count * group_size]
        .chunks(group_size)
        .map(<[usize]>::to_vec)
        .collect();
    let used: Vec<Word> = groups.iter().flatten().map(|&i| code[i].clone()).collect();
    let owner = groups
        .iter()
        .enumerate()
        .flat_map(|(m, g)| std::iter::repeat_n(m, g.len()))
        .collect();
    Ok(StochasticCode {
        code: code.to_vec(),
        groups,
        used,
        owner,
    })
}

impl StochasticCode {
    pub fn messages(&self) -> usize {
        self.groups.len()
    }

    /// Uniformly random codeword of message `m`.
    pub fn encode<R: Rng>(&self, m: usize, rng: &mut R) -> Result<&Word> {
        let group = self.groups.get(m).ok_or(Error::IndexOutOfRange {
            index: m,
            len: self.groups.len(),
        })?;
        Ok(&self.code[group[rng.random_range(0..group.len())]])
    }

    /// Message whose group holds the unique used codeword containing
    /// `received`.
    pub fn decode(&self, received: &Word) -> Option<usize> {
        unique_decode(received, &self.used).map(|i| self.owner[i])
    }

    /// Exact failure probability of message `m` under `τ`, over the
    /// encoder's choice.
    pub fn failure_probability(&self, m: usize, tau: &DeletionPattern) -> Result<f64> {
        let group = &self.groups[m];
        let mut fails = 0;
        for &i in group {
            if self.decode(&tau.apply(&self.code[i])?) != Some(m) {
                fails += 1;
            }
        }
        Ok(fails as f64 / group.len() as f64)
    }
}

/// Oblivious pattern families used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PatternFamily {
    /// Uniformly random patterns of the given weight.
    Uniform { count: usize },
    /// Deterministic adversarial patterns; see [`structured_patterns`].
    Structured,
    Both { count: usize },
}

/// Deterministic adversarial patterns of exactly `weight` deletions over
/// `n` blocks:
///
/// * `bit{b}-g{j}`: delete, in every block, the positions where `g_j`
///   holds `b`, then continue with every other remaining position;
/// * `alt{o}`: delete every other bit (offset `o`) block by block,
///   then fill the leftover positions left to right.
pub fn structured_patterns(book: &InnerCodebook, weight: usize) -> Result<Vec<(String, DeletionPattern)>> {
    let n = book.params.n;
    let total = n * book.l;
    if weight > total {
        return Err(Error::InvalidParameter(format!("weight {weight} exceeds length {total}")));
    }
    let mut out = Vec::new();
    for j in 1..=book.k {
        let g = book.word(j)?;
        for b in [false, true] {
            let primary: Vec<usize> = (0..total).filter(|&i| g.bit(i % book.l) == b).collect();
            out.push((format!("bit{}-g{j}", b as u8), fill(total, primary, weight)));
        }
    }
    for offset in 0..2 {
        let primary: Vec<usize> = (0..total).filter(|&i| (i % book.l) % 2 == offset).collect();
        out.push((format!("alt{offset}"), fill(total, primary, weight)));
    }
    Ok(out)
}

/// Takes positions from `primary` in order, then every other leftover
/// position, then the rest, until `weight` are chosen.
fn fill(total: usize, primary: Vec<usize>, weight: usize) -> DeletionPattern {
    let mut chosen = vec![false; total];
    let mut left = weight;
    for i in primary {
        if left == 0 {
            break;
        }
        chosen[i] = true;
        left -= 1;
    }
    for pass in 0..2 {
        let rest: Vec<usize> = (0..total).filter(|&i| !chosen[i]).collect();
        for (r, i) in rest.into_iter().enumerate() {
            if left == 0 {
                break;
            }
            if pass == 1 || r % 2 == 0 {
                chosen[i] = true;
                left -= 1;
            }
        }
    }
    DeletionPattern::from_mask(&chosen)
}

/// Uniform random pattern of `weight` deletions out of `len` positions.
pub fn random_pattern<R: Rng>(len: usize, weight: usize, rng: &mut R) -> DeletionPattern {
    let mut deleted: Vec<usize> = rand::seq::index::sample(rng, len, weight)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    deleted.sort_unstable();
    DeletionPattern::new(len, deleted).expect("sampled indices are valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub seed: u64,
    pub pattern_id: String,
    pub pattern_weight: usize,
    pub code_size: usize,
    pub error_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Deleted fraction of the `N` code bits.
    pub p: f64,
    pub family: PatternFamily,
    /// Target size of the sampled outer code.
    pub code_size: f64,
    /// Filter the pool by `f(Y)` before sampling.
    pub filtered: bool,
    pub f_mode: FMode,
}

impl Serialize for FMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            FMode::Exact => s.serialize_str("exact"),
            FMode::MonteCarlo { trials } => s.serialize_str(&format!("monte-carlo:{trials}")),
        }
    }
}

/// The candidate pool for an experiment: all of `[K]^n`, optionally
/// filtered. Reusable across seeds.
pub fn experiment_pool(book: &InnerCodebook, plan: &SamplingPlan, cfg: &ExperimentConfig, master_seed: u64) -> Result<Vec<OuterWord>> {
    let pool = all_outer_words(book.k, book.params.n)?;
    if !cfg.filtered {
        return Ok(pool);
    }
    let setup = FSetup::from_params(&book.params)?;
    Ok(filter_candidates(&pool, &setup, plan, cfg.f_mode, master_seed)?.kept)
}

/// One experiment seed: sample a code from `pool`, encode it, and measure
/// the average-case error under every pattern of the family.
pub fn oblivious_trial(
    book: &InnerCodebook,
    pool: &[OuterWord],
    cfg: &ExperimentConfig,
    master_seed: u64,
    trial: u64,
) -> Result<Vec<ExperimentRow>> {
    let total = book.params.total_len()?;
    let weight = (cfg.p * total as f64).floor() as usize;
    let mut rng = seed::substream(master_seed, "oblivious", trial);
    let incl = (cfg.code_size / pool.len().max(1) as f64).min(1.0);
    let outer = sample_outer_code(pool, incl, &mut rng)?;
    let code = outer.iter().map(|x| book.encode(x)).collect::<Result<Vec<_>>>()?;
    let mut patterns = Vec::new();
    let uniform = match cfg.family {
        PatternFamily::Uniform { count } | PatternFamily::Both { count } => count,
        PatternFamily::Structured => 0,
    };
    for u in 0..uniform {
        patterns.push((format!("uniform{u}"), random_pattern(total, weight, &mut rng)));
    }
    if matches!(cfg.family, PatternFamily::Structured | PatternFamily::Both { .. }) {
        patterns.extend(structured_patterns(book, weight)?);
    }
    patterns
        .into_iter()
        .map(|(id, tau)| {
            Ok(ExperimentRow {
                seed: trial,
                pattern_id: id,
                pattern_weight: tau.len(),
                code_size: code.len(),
                error_fraction: average_case_error(&code, &tau)?,
            })
        })
        .collect()
}

/// Runs `seeds` independent trials; rows are ordered by seed, then pattern.
pub fn oblivious_experiment(
    book: &InnerCodebook,
    plan: &SamplingPlan,
    cfg: &ExperimentConfig,
    seeds: u64,
    master_seed: u64,
) -> Result<Vec<ExperimentRow>> {
    let pool = experiment_pool(book, plan, cfg, master_seed)?;
    let per_seed = (0..seeds)
        .into_par_iter()
        .map(|s| oblivious_trial(book, &pool, cfg, master_seed, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_seed.into_iter().flatten().collect())
}
