//! The signature-driven matching procedure between outer words and the
//! worst-case corruption-set remapping.

use std::fmt;

use crate::construction::{OuterWord, SymbolSet};
use crate::error::{Error, Result};

/// Enumeration cap for exhaustive counts over `[K]^m`.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchConfig {
    /// Maximum run of consecutive A-moves.
    pub s: usize,
    /// Maximum run of consecutive B-moves.
    pub t: usize,
    /// One corruption set per position of `X`.
    pub sets: Vec<SymbolSet>,
}

impl MatchConfig {
    pub fn new(s: usize, t: usize, sets: Vec<SymbolSet>) -> Result<Self> {
        if s == 0 || t == 0 {
            return Err(Error::InvalidParameter("move caps must be positive".into()));
        }
        Ok(Self { s, t, sets })
    }

    /// Every set equal to `{1, ..., λ−1}`.
    pub fn worst(s: usize, t: usize, lambda: u32, m: usize) -> Result<Self> {
        Self::new(s, t, vec![SymbolSet::prefix(lambda.saturating_sub(1)); m])
    }

    /// The standard caps `s = 2^λ` and `t = ⌊√R⌋`.
    pub fn standard_caps(lambda: u32, r: u64) -> (usize, usize) {
        (1usize << lambda, r.isqrt() as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairType {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    A,
    B,
}

/// Why a move was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveReason {
    Type(PairType),
    Forced,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchTrace {
    /// Visited `(a, b)` states, 1-based, starting at `(1, 1)`.
    pub states: Vec<(usize, usize)>,
    pub moves: Vec<Move>,
    pub reasons: Vec<MoveReason>,
    pub success: bool,
}

impl MatchTrace {
    /// One line per move: `step k: (a,b) move=A|B type=A|B|forced`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, (mv, why)) in self.moves.iter().zip(&self.reasons).enumerate() {
            let (a, b) = self.states[k];
            let mv = match mv {
                Move::A => "A",
                Move::B => "B",
            };
            let why = match why {
                MoveReason::Type(PairType::A) => "A",
                MoveReason::Type(PairType::B) => "B",
                MoveReason::Forced => "forced",
            };
            out.push_str(&format!("step {}: ({a},{b}) move={mv} type={why}\n", k + 1));
        }
        out
    }
}

impl fmt::Display for MatchTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[inline]
fn classify(xi: u32, yj: u32, set: SymbolSet) -> PairType {
    if set.contains(xi) || xi >= yj {
        PairType::A
    } else {
        PairType::B
    }
}

/// Type of the 1-based pair `(i, j)`.
pub fn pair_type(i: usize, j: usize, x: &OuterWord, y: &OuterWord, sets: &[SymbolSet]) -> Result<PairType> {
    if i == 0 || i > x.len() {
        return Err(Error::IndexOutOfRange { index: i, len: x.len() });
    }
    if j == 0 || j > y.len() {
        return Err(Error::IndexOutOfRange { index: j, len: y.len() });
    }
    if sets.len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: sets.len(),
        });
    }
    Ok(classify(x.at(i), y.at(j), sets[i - 1]))
}

fn check(x: &OuterWord, y: &OuterWord, cfg: &MatchConfig) -> Result<()> {
    if cfg.sets.len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: cfg.sets.len(),
        });
    }
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidParameter("matching needs nonempty words".into()));
    }
    Ok(())
}

/// Runs the matching and records every step.
pub fn run_matching(x: &OuterWord, y: &OuterWord, cfg: &MatchConfig) -> Result<MatchTrace> {
    check(x, y, cfg)?;
    let mut trace = MatchTrace {
        states: vec![(1, 1)],
        moves: Vec::new(),
        reasons: Vec::new(),
        success: false,
    };
    let success = drive(&x.0, &y.0, cfg.s, cfg.t, &cfg.sets, |_, _, mv, why| {
        trace.moves.push(mv);
        trace.reasons.push(why);
        let &(pa, pb) = trace.states.last().unwrap();
        trace.states.push(match mv {
            Move::A => (pa + 1, pb),
            Move::B => (pa, pb + 1),
        });
    });
    trace.success = success;
    Ok(trace)
}

pub fn is_matchable(x: &OuterWord, y: &OuterWord, cfg: &MatchConfig) -> Result<bool> {
    check(x, y, cfg)?;
    Ok(matchable_raw(&x.0, &y.0, cfg.s, cfg.t, &cfg.sets))
}

/// Unchecked fast path; `sets.len()` must equal `x.len()` and both words
/// must be nonempty.
#[inline]
pub fn matchable_raw(x: &[u32], y: &[u32], s: usize, t: usize, sets: &[SymbolSet]) -> bool {
    drive(x, y, s, t, sets, |_, _, _, _| {})
}

#[inline]
fn drive(
    x: &[u32],
    y: &[u32],
    s: usize,
    t: usize,
    sets: &[SymbolSet],
    mut on_move: impl FnMut(usize, usize, Move, MoveReason),
) -> bool {
    let (m, n) = (x.len(), y.len());
    // 0-based internally: stop at a = m−1 or b = n−1.
    let (mut a, mut b) = (0usize, 0usize);
    let (mut run_a, mut run_b) = (0usize, 0usize);
    while a + 1 < m && b + 1 < n {
        let (mv, why) = if run_a == s {
            (Move::B, MoveReason::Forced)
        } else if run_b == t {
            (Move::A, MoveReason::Forced)
        } else {
            match classify(x[a], y[b], sets[a]) {
                PairType::A => (Move::A, MoveReason::Type(PairType::A)),
                PairType::B => (Move::B, MoveReason::Type(PairType::B)),
            }
        };
        on_move(a + 1, b + 1, mv, why);
        match mv {
            Move::A => {
                a += 1;
                run_a += 1;
                run_b = 0;
            }
            Move::B => {
                b += 1;
                run_b += 1;
                run_a = 0;
            }
        }
    }
    a + 1 == m
}

/// The involution `h_A` on `[K]`: ascending members of `A ∖ [λ−1]` are
/// swapped with ascending members of `[λ−1] ∖ A`; everything else is fixed.
pub fn remap_symbol(x: u32, set: SymbolSet, lambda: u32) -> Result<u32> {
    let base = lambda.saturating_sub(1);
    if set.len() != base as usize {
        return Err(Error::InvalidParameter(format!(
            "corruption set {set} must have size {base}"
        )));
    }
    let outside: Vec<u32> = set.iter().filter(|&v| v > base).collect();
    let missing: Vec<u32> = (1..=base).filter(|&v| !set.contains(v)).collect();
    for (&o, &m) in outside.iter().zip(&missing) {
        if x == o {
            return Ok(m);
        }
        if x == m {
            return Ok(o);
        }
    }
    Ok(x)
}

/// Applies `h_{S_i}` coordinatewise.
pub fn worst_case_remap(x: &OuterWord, sets: &[SymbolSet], lambda: u32) -> Result<OuterWord> {
    if sets.len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            actual: sets.len(),
        });
    }
    x.0.iter()
        .zip(sets)
        .map(|(&v, &set)| remap_symbol(v, set, lambda))
        .collect::<Result<Vec<_>>>()
        .map(OuterWord)
}

/// Counts `X ∈ [K]^m` matchable in `Y`, under the given sets and under all
/// sets equal to `[λ−1]`.
pub fn match_count_dominance(
    y: &OuterWord,
    cfg: &MatchConfig,
    k: u32,
    m: usize,
    lambda: u32,
) -> Result<(u64, u64)> {
    if cfg.sets.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: cfg.sets.len(),
        });
    }
    let total = enumeration_size(k, m)?;
    let worst = MatchConfig::worst(cfg.s, cfg.t, lambda, m)?;
    let (mut with_sets, mut with_worst) = (0u64, 0u64);
    for idx in 0..total {
        let x = OuterWord::from_index(idx, k, m);
        with_sets += matchable_raw(&x.0, &y.0, cfg.s, cfg.t, &cfg.sets) as u64;
        with_worst += matchable_raw(&x.0, &y.0, worst.s, worst.t, &worst.sets) as u64;
    }
    Ok((with_sets, with_worst))
}

/// `K^m`, if within [`ENUMERATION_LIMIT`].
pub fn enumeration_size(k: u32, m: usize) -> Result<u64> {
    let count = (k as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > ENUMERATION_LIMIT {
        return Err(Error::EnumerationLimit {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(count as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ow(v: &[u32]) -> OuterWord {
        OuterWord(v.to_vec())
    }

    fn empties(m: usize) -> Vec<SymbolSet> {
        vec![SymbolSet::empty(); m]
    }

    fn assert_trace_laws(tr: &MatchTrace, m: usize, n: usize, s: usize, t: usize) {
        assert_eq!(tr.states[0], (1, 1));
        for w in tr.states.windows(2) {
            let d = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            assert!(d == (1, 0) || d == (0, 1));
        }
        let (mut ra, mut rb) = (0, 0);
        for mv in &tr.moves {
            match mv {
                Move::A => {
                    ra += 1;
                    rb = 0;
                }
                Move::B => {
                    rb += 1;
                    ra = 0;
                }
            }
            assert!(ra <= s && rb <= t);
        }
        let last = *tr.states.last().unwrap();
        assert!(last.0 == m || last.1 == n);
        assert_eq!(tr.success, last.0 == m);
    }

    #[test]
    fn pair_type_examples() {
        let sets = vec![SymbolSet::empty()];
        assert_eq!(pair_type(1, 1, &ow(&[2]), &ow(&[1]), &sets).unwrap(), PairType::A);
        assert_eq!(
            pair_type(1, 1, &ow(&[1]), &ow(&[3]), &[SymbolSet::from_symbols([1])]).unwrap(),
            PairType::A
        );
        assert_eq!(pair_type(1, 1, &ow(&[1]), &ow(&[3]), &sets).unwrap(), PairType::B);
        assert!(pair_type(2, 1, &ow(&[1]), &ow(&[3]), &sets).is_err());
    }

    #[test]
    fn matching_examples() {
        let cfg = MatchConfig::new(2, 2, empties(2)).unwrap();
        let tr = run_matching(&ow(&[1, 1]), &ow(&[1, 2]), &cfg).unwrap();
        assert_eq!(tr.moves, vec![Move::A]);
        assert_eq!(tr.states, vec![(1, 1), (2, 1)]);
        assert!(tr.success);

        let cfg = MatchConfig::new(2, 2, empties(1)).unwrap();
        let tr = run_matching(&ow(&[3]), &ow(&[1, 2, 3]), &cfg).unwrap();
        assert!(tr.success && tr.moves.is_empty());

        // Every pair is type-B, so the first move is B and reaches b = |Y|.
        let cfg = MatchConfig::new(1, 1, empties(3)).unwrap();
        let tr = run_matching(&ow(&[1, 1, 1]), &ow(&[3, 3]), &cfg).unwrap();
        assert!(!tr.success);
        assert_eq!(tr.states, vec![(1, 1), (1, 2)]);
        assert_eq!(tr.dump(), "step 1: (1,1) move=B type=B\n");

        assert!(run_matching(&ow(&[1, 1]), &ow(&[1]), &MatchConfig::new(1, 1, empties(3)).unwrap()).is_err());
    }

    #[test]
    fn top_symbols_match_all_ones() {
        for m in 1..8 {
            let x = ow(&vec![4; m]);
            let y = ow(&vec![1; m + 1]);
            let cfg = MatchConfig::worst(2, 2, 1, m).unwrap();
            let tr = run_matching(&x, &y, &cfg).unwrap();
            assert!(tr.success);
            assert!(tr.reasons.iter().all(|r| *r != MoveReason::Type(PairType::B)));
        }
    }

    #[test]
    fn forced_moves_are_labelled() {
        let cfg = MatchConfig::new(1, 5, empties(4)).unwrap();
        let tr = run_matching(&ow(&[2, 2, 2, 2]), &ow(&[1, 1, 1, 1, 1]), &cfg).unwrap();
        assert_eq!(tr.moves[..2], [Move::A, Move::B]);
        assert_eq!(tr.reasons[1], MoveReason::Forced);
        assert!(tr.dump().contains("move=B type=forced"));
    }

    #[test]
    fn traces_respect_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let k = rng.random_range(2..=5);
            let m = rng.random_range(1..8);
            let n = rng.random_range(1..12);
            let s = rng.random_range(1..4);
            let t = rng.random_range(1..4);
            let x = OuterWord((0..m).map(|_| rng.random_range(1..=k)).collect());
            let y = OuterWord((0..n).map(|_| rng.random_range(1..=k)).collect());
            let sets = (0..m)
                .map(|_| SymbolSet::from_symbols((1..=k).filter(|_| rng.random_bool(0.2))))
                .collect();
            let cfg = MatchConfig::new(s, t, sets).unwrap();
            let tr = run_matching(&x, &y, &cfg).unwrap();
            assert_trace_laws(&tr, m, n, s, t);
            assert_eq!(tr.success, is_matchable(&x, &y, &cfg).unwrap());
        }
    }

    #[test]
    fn remap_examples() {
        let a = SymbolSet::from_symbols([3, 4]);
        let h: Vec<u32> = (1..=4).map(|x| remap_symbol(x, a, 3).unwrap()).collect();
        assert_eq!(h, vec![3, 4, 1, 2]);
        let id = SymbolSet::prefix(2);
        assert!((1..=4).all(|x| remap_symbol(x, id, 3).unwrap() == x));
        assert!(remap_symbol(1, SymbolSet::from_symbols([1]), 3).is_err());
    }

    #[test]
    fn remap_is_an_involution_with_the_claimed_shape() {
        let k = 6u32;
        let lambda = 4;
        for bits in 0u32..1 << k {
            let set = SymbolSet::from_symbols((1..=k).filter(|s| bits >> (s - 1) & 1 == 1));
            if set.len() != 3 {
                continue;
            }
            for x in 1..=k {
                let h = remap_symbol(x, set, lambda).unwrap();
                assert_eq!(remap_symbol(h, set, lambda).unwrap(), x);
                if set.contains(x) {
                    assert!(h <= 3);
                } else {
                    assert!(h >= x);
                }
            }
        }
    }

    #[test]
    fn dominance_examples() {
        let y = ow(&[2, 1, 3, 3, 2, 1]);
        let cfg = MatchConfig::worst(2, 2, 1, 3).unwrap();
        let (a, b) = match_count_dominance(&y, &cfg, 3, 3, 1).unwrap();
        assert_eq!(a, b);

        let ones = ow(&[1; 6]);
        let (a, b) = match_count_dominance(&ones, &MatchConfig::new(4, 2, empties(3)).unwrap(), 3, 3, 1).unwrap();
        assert_eq!((a, b), (27, 27));

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let y = OuterWord((0..6).map(|_| rng.random_range(1..=3)).collect());
            let sets = (0..3).map(|_| SymbolSet::from_symbols([rng.random_range(1..=3)])).collect();
            let cfg = MatchConfig::new(4, 2, sets).unwrap();
            let (a, b) = match_count_dominance(&y, &cfg, 3, 3, 2).unwrap();
            assert!(a <= b, "{y} {cfg:?}");
        }
        assert!(match_count_dominance(&y, &MatchConfig::worst(2, 2, 1, 30).unwrap(), 3, 30, 1).is_err());
    }

    #[test]
    fn remap_preserves_success() {
        // Exhaustive monotone domination at K = 3, m ≤ 4, small Y.
        let (k, lambda) = (3u32, 2u32);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for m in 1..=4 {
            for _ in 0..20 {
                let n = rng.random_range(1..=2 * m + 1);
                let y = OuterWord((0..n).map(|_| rng.random_range(1..=k)).collect());
                let sets: Vec<_> = (0..m).map(|_| SymbolSet::from_symbols([rng.random_range(1..=k)])).collect();
                let cfg = MatchConfig::new(4, 2, sets.clone()).unwrap();
                let worst = MatchConfig::worst(4, 2, lambda, m).unwrap();
                for idx in 0..(k as u64).pow(m as u32) {
                    let x = OuterWord::from_index(idx, k, m);
                    if is_matchable(&x, &y, &cfg).unwrap() {
                        let hx = worst_case_remap(&x, &sets, lambda).unwrap();
                        assert!(is_matchable(&hx, &y, &worst).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn standard_caps() {
        assert_eq!(MatchConfig::standard_caps(2, 16), (4, 4));
        assert_eq!(MatchConfig::standard_caps(1, 8), (2, 2));
    }
}
