//! Causal online deletion adversaries: the per-bit channel harness, wait
//! profiles, confusable pairing and the two-strategy wait-push attack.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::seed;
use crate::words::{count_embeddings, lcs, lcs_len, Word};

const REGIME_TOL: f64 = 1e-9;

/// A causal channel: sees each transmitted bit once, in order, and decides
/// immediately whether to delete it.
pub trait OnlineAdversary {
    /// Called for bits `x_1, x_2, ...`; `true` requests deletion.
    fn decide(&mut self, bit: bool) -> bool;

    /// The coin draw behind this run, for adversaries that have one.
    fn draw(&self) -> Option<Draw> {
        None
    }
}

/// Builds one adversary instance per transmission. The word is passed only
/// so that deliberately non-causal test adversaries can be expressed;
/// honest adversaries must ignore it.
pub type AdversaryFactory<'a> = dyn Fn(u64, &Word) -> Box<dyn OnlineAdversary> + Sync + 'a;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelRun {
    pub output: Word,
    /// 1-based positions actually deleted.
    pub deleted: Vec<usize>,
    /// Deletion requests refused because the budget was exhausted.
    pub refused: usize,
    /// Raw per-bit requests, before budget enforcement.
    pub requests: Vec<bool>,
}

/// Feeds `x` through `adv`, honouring at most `budget` deletions.
pub fn run_channel(adv: &mut dyn OnlineAdversary, x: &Word, budget: usize) -> ChannelRun {
    let mut output = Word::with_capacity(x.len());
    let mut deleted = Vec::new();
    let mut refused = 0;
    let mut requests = Vec::with_capacity(x.len());
    for (i, bit) in x.iter().enumerate() {
        let wants = adv.decide(bit);
        requests.push(wants);
        if wants && deleted.len() < budget {
            deleted.push(i + 1);
        } else {
            if wants {
                refused += 1;
            }
            output.push(bit);
        }
    }
    ChannelRun {
        output,
        deleted,
        refused,
        requests,
    }
}

/// Keeps every bit.
#[derive(Debug, Default, Clone, Copy)]
pub struct Identity;

impl OnlineAdversary for Identity {
    fn decide(&mut self, _bit: bool) -> bool {
        false
    }
}

/// Deletes bit `i` whenever bit `i+1` is a one. It reads the whole word up
/// front, so it is not causal.
#[derive(Debug, Clone)]
pub struct Lookahead {
    word: Word,
    pos: usize,
}

impl Lookahead {
    pub fn new(word: &Word) -> Self {
        Self {
            word: word.clone(),
            pos: 0,
        }
    }
}

impl OnlineAdversary for Lookahead {
    fn decide(&mut self, _bit: bool) -> bool {
        self.pos += 1;
        self.pos < self.word.len() && self.word.bit(self.pos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaitProfile {
    /// Number of bits needed before the prefix singles out the codeword.
    pub wait_len: usize,
    /// `wait_len / n`.
    pub q: f64,
    pub r0: usize,
    pub r1: usize,
    /// Majority bit of the wait prefix, ties going to 0.
    pub b: bool,
}

fn position(x: &Word, code: &[Word]) -> Result<usize> {
    code.iter().position(|c| c == x).ok_or(Error::NotInCode)
}

fn common_prefix(a: &Word, b: &Word) -> usize {
    a.iter().zip(b.iter()).take_while(|(x, y)| x == y).count()
}

/// Smallest `ℓ` such that `x_1..x_ℓ` is a prefix of no other codeword;
/// zero for a single-word code.
pub fn wait_length(x: &Word, code: &[Word]) -> Result<usize> {
    let xi = position(x, code)?;
    Ok(wait_length_at(xi, code))
}

fn wait_length_at(xi: usize, code: &[Word]) -> usize {
    let x = &code[xi];
    code.iter()
        .enumerate()
        .filter(|&(i, c)| i != xi && c != x)
        .map(|(_, c)| (common_prefix(x, c) + 1).min(x.len()))
        .max()
        .unwrap_or(0)
}

pub fn wait_profile(x: &Word, code: &[Word]) -> Result<WaitProfile> {
    let xi = position(x, code)?;
    Ok(profile_at(xi, code))
}

fn profile_at(xi: usize, code: &[Word]) -> WaitProfile {
    let x = &code[xi];
    let wait_len = wait_length_at(xi, code);
    let r1 = x.iter().take(wait_len).filter(|&b| b).count();
    let r0 = wait_len - r1;
    WaitProfile {
        wait_len,
        q: if x.is_empty() { 0.0 } else { wait_len as f64 / x.len() as f64 },
        r0,
        r1,
        b: r1 > r0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OnlineConfig {
    /// Deletion fraction; the budget is `⌊pn⌋`.
    pub p: f64,
    /// Assumed adversarial zero-rate threshold, in `(0, 1/2)`.
    pub p0_adv: f64,
}

impl OnlineConfig {
    pub fn new(p: f64, p0_adv: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("p = {p} outside (0, 1)")));
        }
        if !(p0_adv > 0.0 && p0_adv < 0.5) {
            return Err(Error::InvalidParameter(format!("p0_adv = {p0_adv} outside (0, 1/2)")));
        }
        Ok(Self { p, p0_adv })
    }

    /// Whether `p > 1/(3 − 2·p0_adv)`, where the attack fits its budget.
    pub fn in_regime(&self) -> bool {
        self.p > 1.0 / (3.0 - 2.0 * self.p0_adv)
    }

    pub fn budget(&self, n: usize) -> usize {
        (self.p * n as f64 + REGIME_TOL).floor() as usize
    }

    /// `q n / 2 + (1 − q)·p0_adv·n`, the cost bound of a completed push.
    pub fn push_cost_bound(&self, q: f64, n: usize) -> f64 {
        let n = n as f64;
        q * n / 2.0 + (1.0 - q) * self.p0_adv * n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusablePair {
    /// Indices into the code; `x < y`.
    pub x: usize,
    pub y: usize,
    pub profile: WaitProfile,
    /// Common subsequence of the two suffixes after the wait prefix.
    pub s_star: Word,
    /// 1-based positions within `x`'s suffix carrying `s_star`.
    pub x_positions: Vec<usize>,
    /// 1-based positions within `y`'s suffix carrying `s_star`.
    pub y_positions: Vec<usize>,
    /// `b^{r_b} ++ s_star`, what the decoder receives from either word.
    pub pushed: Word,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingTable {
    pub n: usize,
    pub profiles: Vec<WaitProfile>,
    pub pairs: Vec<ConfusablePair>,
    /// `partner[i] = Some(pair index)` for paired codewords.
    pub partner: Vec<Option<usize>>,
    pub unpaired: Vec<usize>,
}

impl PairingTable {
    pub fn paired_fraction(&self) -> f64 {
        if self.partner.is_empty() {
            return 0.0;
        }
        (self.partner.len() - self.unpaired.len()) as f64 / self.partner.len() as f64
    }

    /// Suffix positions (1-based, within the suffix) that codeword `i`
    /// keeps during the push phase.
    pub fn push_positions(&self, i: usize) -> Option<&[usize]> {
        let pair = &self.pairs[self.partner[i]?];
        Some(if pair.x == i { &pair.x_positions } else { &pair.y_positions })
    }

    fn check(&self, code: &[Word]) -> Result<()> {
        if self.partner.len() != code.len() || self.profiles.len() != code.len() {
            return Err(Error::InconsistentPairs(format!(
                "table covers {} codewords, code has {}",
                self.partner.len(),
                code.len()
            )));
        }
        Ok(())
    }
}

/// Groups codewords by `(wait length, r0, b)` and greedily pairs, within
/// each class of wait length at most `(1 − p)n`, the couples whose suffix
/// LCS exceeds `(n − wait)(1 − p0_adv)`, largest LCS first.
pub fn build_pairs(code: &[Word], cfg: &OnlineConfig) -> Result<PairingTable> {
    let n = code.first().map_or(0, Word::len);
    if code.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidParameter("codewords must share one length".into()));
    }
    let profiles: Vec<WaitProfile> = (0..code.len()).map(|i| profile_at(i, code)).collect();
    let mut classes: BTreeMap<(usize, usize, bool), Vec<usize>> = BTreeMap::new();
    for (i, pr) in profiles.iter().enumerate() {
        classes.entry((pr.wait_len, pr.r0, pr.b)).or_default().push(i);
    }
    let max_wait = (1.0 - cfg.p) * n as f64 + REGIME_TOL;
    let mut partner = vec![None; code.len()];
    let mut pairs = Vec::new();
    for ((wait, _, b), members) in classes {
        if wait as f64 > max_wait || members.len() < 2 {
            continue;
        }
        let need = (n - wait) as f64 * (1.0 - cfg.p0_adv);
        let suffixes: Vec<Word> = members.iter().map(|&i| code[i].suffix_from(wait)).collect();
        let mut candidates: Vec<(usize, usize, usize)> = (0..members.len())
            .into_par_iter()
            .flat_map_iter(|a| {
                let suffixes = &suffixes;
                (a + 1..members.len()).filter_map(move |c| {
                    let l = lcs_len(&suffixes[a], &suffixes[c]);
                    (l as f64 > need).then_some((l, a, c))
                })
            })
            .collect();
        candidates.sort_by(|u, v| v.0.cmp(&u.0).then(u.1.cmp(&v.1)).then(u.2.cmp(&v.2)));
        for (_, a, c) in candidates {
            let (xi, yi) = (members[a], members[c]);
            if partner[xi].is_some() || partner[yi].is_some() {
                continue;
            }
            let common = lcs(&suffixes[a], &suffixes[c]);
            let profile = profiles[xi];
            let rb = if b { profile.r1 } else { profile.r0 };
            let mut pushed = Word::with_capacity(rb + common.length);
            for _ in 0..rb {
                pushed.push(b);
            }
            pushed.extend_from(&common.witness);
            partner[xi] = Some(pairs.len());
            partner[yi] = Some(pairs.len());
            pairs.push(ConfusablePair {
                x: xi,
                y: yi,
                profile,
                s_star: common.witness,
                x_positions: common.positions_a,
                y_positions: common.positions_b,
                pushed,
            });
        }
    }
    let unpaired = (0..code.len()).filter(|&i| partner[i].is_none()).collect();
    Ok(PairingTable {
        n,
        profiles,
        pairs,
        partner,
        unpaired,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// Wait, then push onto the partner's common subsequence.
    WaitPush,
    /// Delete the final `⌊pn⌋` bits.
    Truncate,
}

impl Strategy {
    pub fn number(self) -> u8 {
        match self {
            Strategy::WaitPush => 1,
            Strategy::Truncate => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Draw {
    pub strategy: Strategy,
    /// The bit kept during the wait phase.
    pub bit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrawPolicy {
    /// Fair coins for the strategy and the bit.
    Random,
    Fixed(Draw),
    /// Wait-push with the bit equal to the transmitted codeword's majority
    /// bit: the lucky draw, used to certify pair confusion.
    CorrectForCodeword,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Wait,
    Push { suffix_start: usize, next: usize },
    GiveUp,
}

/// The randomized wait-push adversary, fixed to one draw.
pub struct WaitPush {
    code: Arc<Vec<Word>>,
    table: Arc<PairingTable>,
    draw: Draw,
    n: usize,
    budget: usize,
    seen: usize,
    candidates: Vec<usize>,
    phase: Phase,
    deletions: usize,
    identified: Option<usize>,
}

impl WaitPush {
    pub fn new(code: Arc<Vec<Word>>, table: Arc<PairingTable>, draw: Draw, budget: usize) -> Result<Self> {
        table.check(&code)?;
        let n = table.n;
        let candidates: Vec<usize> = (0..code.len()).collect();
        let mut adv = Self {
            code,
            table,
            draw,
            n,
            budget,
            seen: 0,
            candidates,
            phase: Phase::Wait,
            deletions: 0,
            identified: None,
        };
        adv.maybe_identify();
        Ok(adv)
    }

    pub fn identified(&self) -> Option<usize> {
        self.identified
    }

    fn distinct_candidates(&self) -> usize {
        let mut words: Vec<&Word> = self.candidates.iter().map(|&i| &self.code[i]).collect();
        words.dedup();
        words.len()
    }

    fn maybe_identify(&mut self) {
        if self.phase != Phase::Wait || self.draw.strategy != Strategy::WaitPush {
            return;
        }
        if self.candidates.is_empty() {
            self.phase = Phase::GiveUp;
            return;
        }
        if self.distinct_candidates() > 1 {
            return;
        }
        let x = self.candidates[0];
        self.identified = Some(x);
        let b_x = self.table.profiles[x].b;
        self.phase = match self.table.push_positions(x) {
            Some(_) if b_x == self.draw.bit => Phase::Push {
                suffix_start: self.seen,
                next: 0,
            },
            _ => Phase::GiveUp,
        };
    }

    fn request(&mut self, delete: bool) -> bool {
        if delete && self.deletions < self.budget {
            self.deletions += 1;
            if self.deletions == self.budget && self.draw.strategy == Strategy::WaitPush {
                self.phase = Phase::GiveUp;
            }
            true
        } else {
            false
        }
    }
}

impl OnlineAdversary for WaitPush {
    fn decide(&mut self, bit: bool) -> bool {
        self.seen += 1;
        let i = self.seen;
        match self.draw.strategy {
            Strategy::Truncate => self.request(i + self.budget > self.n),
            Strategy::WaitPush => match self.phase {
                Phase::Wait => {
                    let code = &self.code;
                    self.candidates.retain(|&c| code[c].len() >= i && code[c].bit(i - 1) == bit);
                    let del = self.request(bit != self.draw.bit);
                    self.maybe_identify();
                    del
                }
                Phase::Push { suffix_start, next } => {
                    let x = self.identified.expect("push implies identification");
                    let keep = self.table.push_positions(x).expect("push implies a partner");
                    let offset = i - suffix_start;
                    let on_alignment = keep.get(next) == Some(&offset);
                    if on_alignment {
                        self.phase = Phase::Push {
                            suffix_start,
                            next: next + 1,
                        };
                    }
                    self.request(!on_alignment)
                }
                Phase::GiveUp => false,
            },
        }
    }

    fn draw(&self) -> Option<Draw> {
        Some(self.draw)
    }
}

/// Shared state for building wait-push adversaries.
#[derive(Clone)]
pub struct WaitPushSetup {
    pub code: Arc<Vec<Word>>,
    pub table: Arc<PairingTable>,
    pub cfg: OnlineConfig,
    pub policy: DrawPolicy,
}

impl WaitPushSetup {
    pub fn new(code: Vec<Word>, cfg: OnlineConfig, policy: DrawPolicy) -> Result<Self> {
        let table = build_pairs(&code, &cfg)?;
        Ok(Self {
            code: Arc::new(code),
            table: Arc::new(table),
            cfg,
            policy,
        })
    }

    pub fn budget(&self) -> usize {
        self.cfg.budget(self.table.n)
    }

    /// The draw a run with adversary seed `seed` uses on `word`.
    pub fn draw_for(&self, seed: u64, word: &Word) -> Draw {
        match self.policy {
            DrawPolicy::Fixed(d) => d,
            DrawPolicy::Random => {
                let mut rng = seed::substream(seed, "wait-push-draw", 0);
                Draw {
                    strategy: if rng.random_bool(0.5) {
                        Strategy::WaitPush
                    } else {
                        Strategy::Truncate
                    },
                    bit: rng.random_bool(0.5),
                }
            }
            DrawPolicy::CorrectForCodeword => Draw {
                strategy: Strategy::WaitPush,
                bit: self
                    .code
                    .iter()
                    .position(|c| c == word)
                    .is_some_and(|i| self.table.profiles[i].b),
            },
        }
    }

    pub fn adversary(&self, seed: u64, word: &Word) -> WaitPush {
        WaitPush::new(self.code.clone(), self.table.clone(), self.draw_for(seed, word), self.budget())
            .expect("table built from this code")
    }
}

/// Deterministic decoders for received words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OnlineDecoder {
    /// The unique codeword containing the output, else failure.
    Unique,
    /// The codeword with the most embeddings of the output, lowest index
    /// on ties; failure if none contains it.
    MostEmbeddings,
}

impl OnlineDecoder {
    pub fn decode(self, received: &Word, code: &[Word]) -> Option<usize> {
        match self {
            OnlineDecoder::Unique => crate::oblivious::unique_decode(received, code),
            OnlineDecoder::MostEmbeddings => {
                let mut best: Option<(u128, usize)> = None;
                for (i, c) in code.iter().enumerate() {
                    let e = count_embeddings(received, c);
                    if e > 0 && best.is_none_or(|(b, _)| e > b) {
                        best = Some((e, i));
                    }
                }
                best.map(|(_, i)| i)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnlineRow {
    pub trial: u64,
    pub codeword_index: usize,
    /// 1 or 2 for wait-push runs, 0 for adversaries without a draw.
    pub strategy: u8,
    pub coin_bit: u8,
    pub deletions_used: usize,
    pub output_len: usize,
    pub decoded_ok: bool,
    pub confused: bool,
    #[serde(skip)]
    pub refused: usize,
    #[serde(skip)]
    pub output: Word,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OnlineReport {
    pub trials: u64,
    pub budget: usize,
    pub error_rate: f64,
    /// Fraction of trials whose output equals the output some other
    /// codeword produces under the same adversary randomness.
    pub confusion_mass: f64,
    pub max_deletions: usize,
    pub budget_violations: usize,
    pub rows: Vec<OnlineRow>,
}

/// Sends a uniformly random codeword per trial through a fresh adversary
/// and decodes the output.
pub fn simulate_online(
    code: &[Word],
    factory: &AdversaryFactory<'_>,
    decoder: OnlineDecoder,
    budget: usize,
    trials: u64,
    master_seed: u64,
    with_confusion: bool,
) -> Result<OnlineReport> {
    if code.is_empty() {
        return Err(Error::InsufficientCodewords { have: 0, need: 1 });
    }
    let rows: Vec<OnlineRow> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seed::substream(master_seed, "online", trial);
            let xi = rng.random_range(0..code.len());
            let adv_seed: u64 = rng.random();
            let mut adv = factory(adv_seed, &code[xi]);
            let run = run_channel(adv.as_mut(), &code[xi], budget);
            let draw = adv.draw();
            let decoded = decoder.decode(&run.output, code);
            let confused = with_confusion
                && code.iter().any(|y| {
                    y != &code[xi] && {
                        let mut other = factory(adv_seed, y);
                        run_channel(other.as_mut(), y, budget).output == run.output
                    }
                });
            OnlineRow {
                trial,
                codeword_index: xi,
                strategy: draw.map_or(0, |d| d.strategy.number()),
                coin_bit: draw.map_or(0, |d| d.bit as u8),
                deletions_used: run.deleted.len(),
                output_len: run.output.len(),
                decoded_ok: decoded.is_some_and(|d| code[d] == code[xi]),
                confused,
                refused: run.refused,
                output: run.output,
            }
        })
        .collect();
    let t = trials.max(1) as f64;
    Ok(OnlineReport {
        trials,
        budget,
        error_rate: rows.iter().filter(|r| !r.decoded_ok).count() as f64 / t,
        confusion_mass: rows.iter().filter(|r| r.confused).count() as f64 / t,
        max_deletions: rows.iter().map(|r| r.deletions_used).max().unwrap_or(0),
        budget_violations: rows.iter().filter(|r| r.deletions_used > budget).count(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalityReport {
    pub trials: u64,
    pub divergences: u64,
    /// First diverging case: the two words and the shared prefix length.
    pub witness: Option<(String, String, usize)>,
}

impl CausalityReport {
    pub fn passed(&self) -> bool {
        self.divergences == 0
    }
}

/// Runs the adversary on pairs of words that share a random-length prefix
/// and checks that its requests on the shared prefix agree. Words are
/// drawn from `pool` and spliced, so they need not lie in any code.
pub fn causality_check(factory: &AdversaryFactory<'_>, pool: &[Word], trials: u64, master_seed: u64) -> Result<CausalityReport> {
    let n = pool.first().map_or(0, Word::len);
    if pool.is_empty() || pool.iter().any(|w| w.len() != n) {
        return Err(Error::InvalidParameter("pool must hold words of one length".into()));
    }
    let results: Vec<Option<(String, String, usize)>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seed::substream(master_seed, "causality", trial);
            let a = &pool[rng.random_range(0..pool.len())];
            let b = &pool[rng.random_range(0..pool.len())];
            let shared = rng.random_range(0..=n);
            let mut spliced = a.prefix(shared);
            if rng.random_bool(0.5) {
                spliced.extend_from(&b.suffix_from(shared));
            } else {
                spliced.extend_from(&(shared..n).map(|_| rng.random_bool(0.5)).collect());
            }
            let adv_seed: u64 = rng.random();
            let ra = run_channel(factory(adv_seed, a).as_mut(), a, usize::MAX).requests;
            let rb = run_channel(factory(adv_seed, &spliced).as_mut(), &spliced, usize::MAX).requests;
            (ra[..shared] != rb[..shared]).then(|| (a.to_string(), spliced.to_string(), shared))
        })
        .collect();
    let divergences = results.iter().filter(|r| r.is_some()).count() as u64;
    Ok(CausalityReport {
        trials,
        divergences,
        witness: results.into_iter().flatten().next(),
    })
}
