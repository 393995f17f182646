//! Substitutions `χ_k: 1 -> 2, 2 -> 3 1^k, 3 -> 3 1^(k-1)`, their chains and
//! abelianizations, and factor statistics of the resulting words.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{ItmError, Result};
use crate::kseq::KSequence;
use crate::matrix::{substitution_matrix, Mat3};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum WordOrigin {
    ChainPrefix(Vec<u64>),
    NumericItinerary,
    UserSupplied,
}

/// Word over the alphabet `{1, 2, 3}`. Equality compares symbols only.
#[derive(Clone, Debug, Eq)]
pub struct Word {
    pub symbols: Vec<u8>,
    pub origin: WordOrigin,
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Word {
    pub fn new(symbols: Vec<u8>, origin: WordOrigin) -> Self {
        debug_assert!(symbols.iter().all(|s| (1..=3).contains(s)));
        Word { symbols, origin }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let symbols = s
            .chars()
            .map(|c| match c {
                '1' => Ok(1),
                '2' => Ok(2),
                '3' => Ok(3),
                _ => Err(ItmError::Parse(format!("word symbol {c:?} is not 1, 2 or 3"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Word { symbols, origin: WordOrigin::UserSupplied })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn letter_counts(&self) -> [u64; 3] {
        let mut c = [0u64; 3];
        for &s in &self.symbols {
            c[(s - 1) as usize] += 1;
        }
        c
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.symbols.starts_with(&self.symbols)
    }

    /// Index of the first differing symbol over the common length.
    pub fn first_mismatch(&self, other: &Word) -> Option<usize> {
        self.symbols.iter().zip(&other.symbols).position(|(a, b)| a != b)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.symbols.iter().map(|&c| (b'0' + c) as char).collect();
        f.write_str(&s)
    }
}

impl Serialize for Word {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Appends `χ_k(letter)` to `out`, stopping once `out` holds `cap` symbols.
fn push_image(k: u64, letter: u8, out: &mut Vec<u8>, cap: usize) {
    let room = cap.saturating_sub(out.len());
    if room == 0 {
        return;
    }
    match letter {
        1 => out.push(2),
        2 | 3 => {
            out.push(3);
            let ones = if letter == 2 { k } else { k - 1 };
            let ones = ones.min((room - 1) as u64) as usize;
            out.extend(std::iter::repeat_n(1u8, ones));
        }
        _ => unreachable!("alphabet is {{1,2,3}}"),
    }
}

fn substitute_capped(k: u64, w: &[u8], cap: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(w.len().min(cap));
    for &c in w {
        if out.len() >= cap {
            break;
        }
        push_image(k, c, &mut out, cap);
    }
    out
}

/// `χ_k(w)`.
pub fn apply_substitution(k: u64, w: &Word) -> Result<Word> {
    if k == 0 {
        return Err(ItmError::InvalidArgument("substitution index k must be >= 1".into()));
    }
    let symbols = substitute_capped(k, &w.symbols, usize::MAX);
    Ok(Word::new(symbols, w.origin.clone()))
}

/// The first `min_len` symbols of `χ_{k_0} ∘ ... ∘ χ_{k_n}(3)`, using the
/// shortest prefix of `ks` whose chain word is long enough.
///
/// Since every `χ_k(3)` starts with 3, these words are nested prefixes of a
/// single infinite word, so the result does not depend on how much of `ks`
/// is used. Intermediate words are truncated to `min_len` symbols, which
/// keeps the cost linear even for huge symbols.
pub fn chain_prefix(ks: &KSequence, min_len: usize) -> Result<Word> {
    if ks.is_empty() {
        return Err(ItmError::InvalidArgument("empty k-sequence".into()));
    }
    let lengths = chain_lengths(ks);
    let needed = BigInt::from(min_len);
    let Some(n) = lengths.iter().position(|l| *l >= needed) else {
        let achieved = lengths.last().and_then(|l| l.to_usize()).unwrap_or(usize::MAX);
        return Err(ItmError::PrefixExhausted { needed: min_len, achieved });
    };
    let mut w = vec![3u8];
    for &k in ks.symbols[..=n].iter().rev() {
        w = substitute_capped(k, &w, min_len);
    }
    w.truncate(min_len);
    Ok(Word::new(w, WordOrigin::ChainPrefix(ks.symbols[..=n].to_vec())))
}

/// `|χ_{k_0} ∘ ... ∘ χ_{k_j}(3)|` for each `j`.
pub fn chain_lengths(ks: &KSequence) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(ks.len());
    let mut m = Mat3::identity();
    let e3 = [BigInt::zero(), BigInt::zero(), BigInt::from(1)];
    for &k in &ks.symbols {
        m = &m * &substitution_matrix(k);
        let v = m.apply(&e3);
        out.push(&v[0] + &v[1] + &v[2]);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianProduct {
    /// `M_{k_0} ... M_{k_n}`.
    pub matrix: Mat3,
    /// Letter counts of `χ_{k_0} ∘ ... ∘ χ_{k_n}(3)`: the product applied to `e_3`.
    pub counts: [BigInt; 3],
}

pub fn abelian_product(ks: &KSequence) -> Result<AbelianProduct> {
    if ks.is_empty() {
        return Err(ItmError::InvalidArgument("empty k-sequence".into()));
    }
    let mut m = Mat3::identity();
    for &k in &ks.symbols {
        m = &m * &substitution_matrix(k);
    }
    let counts = m.apply(&[BigInt::zero(), BigInt::zero(), BigInt::from(1)]);
    Ok(AbelianProduct { matrix: m, counts })
}

/// Letter frequencies of the full chain word `χ_{k_0} ∘ ... ∘ χ_{k_n}(3)`;
/// exact, summing to 1.
pub fn letter_frequencies(ks: &KSequence) -> Result<[BigRational; 3]> {
    let c = abelian_product(ks)?.counts;
    let total = &c[0] + &c[1] + &c[2];
    Ok(std::array::from_fn(|i| BigRational::new(c[i].clone(), total.clone())))
}

/// `p(1), ..., p(n_max)`: the number of distinct factors of each length,
/// computed with a suffix automaton. Values are lower bounds for the
/// complexity of any infinite word that `w` is a prefix of.
pub fn subword_complexity(w: &Word, n_max: usize) -> Result<Vec<u64>> {
    let needed = n_max.saturating_mul(4);
    if w.len() < needed {
        return Err(ItmError::WordTooShort { len: w.len(), needed });
    }
    let sam = SuffixAutomaton::build(&w.symbols);
    // State v stands for the distinct factors with lengths in
    // (len(link v), len v]; accumulate those ranges with a difference array.
    let mut diff = vec![0i64; n_max + 2];
    for v in 1..sam.len.len() {
        let lo = sam.len[sam.link[v] as usize] as usize + 1;
        let hi = (sam.len[v] as usize).min(n_max);
        if lo <= hi {
            diff[lo] += 1;
            diff[hi + 1] -= 1;
        }
    }
    let mut out = Vec::with_capacity(n_max);
    let mut acc = 0i64;
    for d in diff.iter().take(n_max + 1).skip(1) {
        acc += d;
        out.push(acc as u64);
    }
    Ok(out)
}

struct SuffixAutomaton {
    len: Vec<u32>,
    link: Vec<i32>,
    next: Vec<[i32; 3]>,
}

impl SuffixAutomaton {
    fn build(s: &[u8]) -> Self {
        let cap = 2 * s.len() + 1;
        let mut a = SuffixAutomaton {
            len: Vec::with_capacity(cap),
            link: Vec::with_capacity(cap),
            next: Vec::with_capacity(cap),
        };
        a.len.push(0);
        a.link.push(-1);
        a.next.push([-1; 3]);
        let mut last = 0usize;
        for &ch in s {
            let c = (ch - 1) as usize;
            let cur = a.len.len();
            a.len.push(a.len[last] + 1);
            a.link.push(0);
            a.next.push([-1; 3]);
            let mut p = last as i32;
            while p >= 0 && a.next[p as usize][c] < 0 {
                a.next[p as usize][c] = cur as i32;
                p = a.link[p as usize];
            }
            if p >= 0 {
                let q = a.next[p as usize][c] as usize;
                if a.len[p as usize] + 1 == a.len[q] {
                    a.link[cur] = q as i32;
                } else {
                    let clone = a.len.len();
                    a.len.push(a.len[p as usize] + 1);
                    a.link.push(a.link[q]);
                    a.next.push(a.next[q]);
                    while p >= 0 && a.next[p as usize][c] == q as i32 {
                        a.next[p as usize][c] = clone as i32;
                        p = a.link[p as usize];
                    }
                    a.link[q] = clone as i32;
                    a.link[cur] = clone as i32;
                }
            }
            last = cur;
        }
        a
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AdicVerdict {
    BoundedPrefix,
    UnboundedSuspect,
}

/// Thresholds for [`adic_prefix_check`]. `None` means a quarter of the
/// prefix length.
#[derive(Clone, Copy, Debug, Default)]
pub struct AdicThresholds {
    pub max_k: Option<u64>,
    pub max_run: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdicReport {
    pub max_k: u64,
    pub max_run_of_ones: usize,
    pub verdict: AdicVerdict,
}

fn longest_one_run(s: &[u64]) -> usize {
    let (mut best, mut cur) = (0, 0);
    for &k in s {
        cur = if k == 1 { cur + 1 } else { 0 };
        best = best.max(cur);
    }
    best
}

/// Heuristic look at whether a finite prefix looks like it comes from a
/// bounded (adic) sequence.
///
/// The prefix is flagged when the symbol maximum or the longest run of 1s
/// exceeds its threshold, or when either sets a new record in the second
/// half of the prefix (still growing). A finite prefix can never settle the
/// question.
pub fn adic_prefix_check(ks: &KSequence, thresholds: AdicThresholds) -> AdicReport {
    let s = &ks.symbols;
    let max_k = s.iter().copied().max().unwrap_or(0);
    let max_run_of_ones = longest_one_run(s);
    let quarter = (s.len() / 4).max(1);
    let cap_k = thresholds.max_k.unwrap_or(quarter as u64);
    let cap_run = thresholds.max_run.unwrap_or(quarter);
    let half = s.len() / 2;
    let (first, second) = s.split_at(half);
    let first_max = first.iter().copied().max().unwrap_or(0);
    let second_max = second.iter().copied().max().unwrap_or(0);
    let late_record = s.len() >= 4 && (second_max > first_max || longest_one_run(second) > longest_one_run(first));
    let verdict = if max_k > cap_k || max_run_of_ones > cap_run || late_record {
        AdicVerdict::UnboundedSuspect
    } else {
        AdicVerdict::BoundedPrefix
    };
    AdicReport { max_k, max_run_of_ones, verdict }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kseq::KGenerator;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn ks(v: &[u64]) -> KSequence {
        KSequence::user(v.to_vec()).unwrap()
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(apply_substitution(2, &w("3")).unwrap().to_string(), "31");
        assert_eq!(apply_substitution(1, &w("3")).unwrap().to_string(), "3");
        assert_eq!(apply_substitution(3, &w("31")).unwrap().to_string(), "3112");
        assert_eq!(apply_substitution(2, &w("2")).unwrap().to_string(), "311");
    }

    #[test]
    fn chain_examples() {
        assert_eq!(chain_prefix(&ks(&[3, 3]), 5).unwrap().to_string(), "31122");
        assert_eq!(chain_prefix(&ks(&[2]), 2).unwrap().to_string(), "31");
        assert!(matches!(chain_prefix(&ks(&[1, 1, 1]), 2), Err(ItmError::PrefixExhausted { needed: 2, achieved: 1 })));
        // A huge final symbol does not blow up the work.
        let big = chain_prefix(&ks(&[3, 1 << 60]), 10).unwrap();
        assert_eq!(big.to_string(), "3112222222");
    }

    #[test]
    fn abelian_examples() {
        let c = |v: &[u64]| abelian_product(&ks(v)).unwrap().counts.map(|x| x.to_u64().unwrap());
        assert_eq!(c(&[3]), [2, 0, 1]);
        assert_eq!(c(&[3, 3]), [2, 2, 1]);
        assert_eq!(c(&[1]), [0, 0, 1]);
        let f = letter_frequencies(&ks(&[3])).unwrap();
        assert_eq!(
            f,
            [BigRational::new(2.into(), 3.into()), BigRational::zero(), BigRational::new(1.into(), 3.into())]
        );
    }

    #[test]
    fn perron_frequencies_for_k2() {
        // Oracle: power iteration on M_2 in f64.
        let m = [[0.0, 2.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 1.0]];
        let mut v = [1.0f64, 1.0, 1.0];
        for _ in 0..200 {
            let nv: Vec<f64> = (0..3).map(|i| (0..3).map(|j| m[i][j] * v[j]).sum()).collect();
            let s: f64 = nv.iter().sum();
            v = [nv[0] / s, nv[1] / s, nv[2] / s];
        }
        let f = letter_frequencies(&KSequence::constant(2, 80).unwrap()).unwrap();
        for i in 0..3 {
            assert!((f[i].to_f64().unwrap() - v[i]).abs() < 1e-4, "{i}: {:?} vs {v:?}", f[i]);
        }
        assert!((v[0] - 0.4450).abs() < 1e-4 && (v[1] - 0.2470).abs() < 1e-4 && (v[2] - 0.3080).abs() < 1e-4);
    }

    #[test]
    fn complexity_examples() {
        let word = chain_prefix(&KSequence::constant(3, 30).unwrap(), 400).unwrap();
        assert_eq!(subword_complexity(&word, 1).unwrap(), vec![3]);
        let ones = Word::new(vec![1; 50], WordOrigin::UserSupplied);
        assert!(subword_complexity(&ones, 12).unwrap().iter().all(|&p| p == 1));
        assert!(subword_complexity(&ones, 13).is_err());
    }

    #[test]
    fn adic_examples() {
        let r = adic_prefix_check(&KSequence::constant(3, 40).unwrap(), AdicThresholds::default());
        assert_eq!((r.max_k, r.max_run_of_ones, r.verdict), (3, 0, AdicVerdict::BoundedPrefix));
        let mut v = vec![2];
        v.extend(std::iter::repeat_n(1, 30));
        v.push(2);
        let r = adic_prefix_check(&ks(&v), AdicThresholds::default());
        assert_eq!(r.max_run_of_ones, 30);
        assert_eq!(r.verdict, AdicVerdict::UnboundedSuspect);
        let r = adic_prefix_check(&KGenerator::Arith { a: 1, b: 1 }.prefix(40).unwrap(), AdicThresholds::default());
        assert_eq!(r.verdict, AdicVerdict::UnboundedSuspect);
    }

    fn naive_complexity(s: &[u8], n: usize) -> u64 {
        s.windows(n).collect::<HashSet<_>>().len() as u64
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn counts_match_abelianization(v in prop::collection::vec(1u64..6, 1..8)) {
            let seq = ks(&v);
            let total = chain_lengths(&seq).last().unwrap().to_usize().unwrap();
            prop_assume!(total <= 200_000);
            let word = chain_prefix(&seq, total).unwrap();
            let counts = abelian_product(&seq).unwrap().counts.map(|x| x.to_u64().unwrap());
            prop_assert_eq!(word.letter_counts(), counts);
        }

        #[test]
        fn prefixes_are_stable(v in prop::collection::vec(1u64..6, 1..8), extra in 1u64..6, m in 1usize..200) {
            let a = ks(&v);
            let mut longer = v.clone();
            longer.push(extra);
            let b = ks(&longer);
            if let (Ok(x), Ok(y)) = (chain_prefix(&a, m), chain_prefix(&b, m + 7)) {
                prop_assert!(x.is_prefix_of(&y));
            }
        }

        #[test]
        fn length_recursion(word in "[123]{0,40}", k in 1u64..8) {
            let w0 = w(&word);
            let c = w0.letter_counts();
            let img = apply_substitution(k, &w0).unwrap();
            prop_assert_eq!(img.len() as u64, (c[1] + c[2]) * k + c[1] + c[0]);
        }

        #[test]
        fn automaton_matches_naive(word in "[123]{40,120}") {
            let w0 = w(&word);
            let p = subword_complexity(&w0, 10).unwrap();
            for n in 1..=10 {
                prop_assert_eq!(p[n - 1], naive_complexity(&w0.symbols, n));
            }
        }
    }
}
