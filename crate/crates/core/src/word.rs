//! Words over `T^Q`, section balance, lie application and shadows.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{Channel, Lie, LieString};
use crate::error::{Error, Result};
use crate::numeric::{binomial, Enclosure, DEFAULT_PREC, MAX_PREC};

/// A string of letters in `{0, .., t-1}`. Serialized as a digit string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn new(letters: Vec<u8>) -> Self {
        Word(letters)
    }

    pub fn zeros(len: usize) -> Self {
        Word(vec![0; len])
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn check_alphabet(&self, t: u8) -> Result<()> {
        match self.0.iter().find(|&&c| c >= t) {
            Some(c) => Err(Error::InvalidWord(format!("letter {c} in {self} outside alphabet of size {t}"))),
            None => Ok(()),
        }
    }

    /// Rank in lexicographic order of `T^len` (first letter most significant).
    pub fn index(&self, t: u8) -> usize {
        self.0.iter().fold(0usize, |acc, &c| acc * t as usize + c as usize)
    }

    pub fn from_index(mut idx: usize, t: u8, len: usize) -> Self {
        let mut letters = vec![0u8; len];
        for slot in letters.iter_mut().rev() {
            *slot = (idx % t as usize) as u8;
            idx /= t as usize;
        }
        Word(letters)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn split_at(&self, mid: usize) -> (Word, Word) {
        let (a, b) = self.0.split_at(mid);
        (Word(a.to_vec()), Word(b.to_vec()))
    }

    pub fn permuted(&self, perm: &[u8]) -> Word {
        Word(self.0.iter().map(|&c| perm[c as usize]).collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| {
                ch.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidWord(format!("non-digit {ch:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `t^len` if it fits under `cap`.
pub fn space_size(t: u8, len: usize, cap: u128) -> Result<usize> {
    let mut size: u128 = 1;
    for _ in 0..len {
        size = size.saturating_mul(t as u128);
        if size > cap {
            return Err(Error::cap(format!("word space {t}^{len}"), size, cap));
        }
    }
    Ok(size as usize)
}

/// Every word of `T^len` in lexicographic order.
pub fn all_words(t: u8, len: usize) -> impl Iterator<Item = Word> {
    let size = (t as usize).pow(len as u32);
    (0..size).map(move |i| Word::from_index(i, t, len))
}

/// Section lengths: `Q mod M` sections of length `⌈Q/M⌉`, then `⌊Q/M⌋`.
pub fn sections(len: usize, m: usize) -> Result<Vec<usize>> {
    if m == 0 || m > len {
        return Err(Error::InvalidArgument(format!(
            "section count {m} out of range 1..={len}"
        )));
    }
    let (q, rem) = (len / m, len % m);
    Ok((0..m).map(|i| if i < rem { q + 1 } else { q }).collect())
}

/// The `i` in `r(Q, M, i)`: either an integer, or `eta * log2(q)`.
#[derive(Debug, Clone, PartialEq)]
pub enum TolExponent {
    Bits(u32),
    LogScaled { eta: BigRational, q: u64 },
}

/// `ln(M t 2^i)` as an enclosure.
fn ln_tolerance_arg(m: usize, t: u8, exponent: &TolExponent, prec: u32) -> Enclosure {
    let mt = BigInt::from(m) * BigInt::from(t);
    match exponent {
        TolExponent::Bits(i) => Enclosure::from_big(mt << *i).ln(prec),
        TolExponent::LogScaled { eta, q } => {
            let ln_q = Enclosure::from_int(*q as i64).ln(prec);
            &Enclosure::from_big(mt).ln(prec) + &(&Enclosure::exact(eta.clone()) * &ln_q)
        }
    }
}

/// `r(Q, M, i) = sqrt(⌈Q/M⌉ ln(M t 2^i) / 2)` as an enclosure.
pub fn r_tolerance_enclosure(len: usize, m: usize, t: u8, exponent: &TolExponent, prec: u32) -> Enclosure {
    type Key = (usize, usize, u8, String, u32);
    thread_local! {
        static CACHE: std::cell::RefCell<std::collections::HashMap<Key, Enclosure>> = Default::default();
    }
    let key = (len, m, t, format!("{exponent:?}"), prec);
    if let Some(r) = CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return r;
    }
    let r = r_tolerance_uncached(len, m, t, exponent, prec);
    CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() > 4096 {
            c.clear();
        }
        c.insert(key, r.clone());
    });
    r
}

fn r_tolerance_uncached(len: usize, m: usize, t: u8, exponent: &TolExponent, prec: u32) -> Enclosure {
    let ceil = len.div_ceil(m) as i64;
    let inner = &(&Enclosure::from_int(ceil) * &ln_tolerance_arg(m, t, exponent, prec + 8))
        / &Enclosure::from_int(2);
    inner.sqrt(prec)
}

/// Floating-point `r(Q, M, i)` for real `i`.
pub fn r_tolerance(len: usize, m: usize, t: u8, i: f64) -> f64 {
    let ceil = len.div_ceil(m) as f64;
    (ceil * ((m as f64 * t as f64).ln() + i * std::f64::consts::LN_2) / 2.0).sqrt()
}

/// Where a [`BalanceSpec`]'s tolerance came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Tolerance {
    Exact(BigRational),
    Formula(TolExponent),
}

/// `(M, r)`-balance on `T^Q`. A section may hold each letter at most
/// `cap = ⌊⌈Q/M⌉/t + r⌋` times.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceSpec {
    len: usize,
    sections: Vec<usize>,
    t: u8,
    tolerance: Tolerance,
    r: Enclosure,
    cap: usize,
}

impl BalanceSpec {
    /// Balance with an exact rational tolerance.
    pub fn new(len: usize, m: usize, t: u8, r: BigRational) -> Result<Self> {
        if r < BigRational::zero() {
            return Err(Error::InvalidArgument("negative balance tolerance".into()));
        }
        let secs = sections(len, m)?;
        let share = BigRational::new(BigInt::from(len.div_ceil(m)), BigInt::from(t));
        let cap = (share + &r).floor().to_integer();
        Ok(BalanceSpec {
            len,
            sections: secs,
            t,
            tolerance: Tolerance::Exact(r.clone()),
            r: Enclosure::exact(r),
            cap: cap.to_usize().unwrap_or(usize::MAX),
        })
    }

    pub fn with_f64(len: usize, m: usize, t: u8, r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidArgument(format!("tolerance {r} is not finite")));
        }
        BalanceSpec::new(len, m, t, BigRational::from_float(r).expect("finite"))
    }

    /// Balance with `r = r(Q, M, i)`.
    pub fn from_exponent(len: usize, m: usize, t: u8, exponent: TolExponent) -> Result<Self> {
        let secs = sections(len, m)?;
        let share = Enclosure::from_ratio(len.div_ceil(m) as i64, t as i64);
        let mut prec = DEFAULT_PREC;
        loop {
            let r = r_tolerance_enclosure(len, m, t, &exponent, prec);
            if let Some(cap) = (&share + &r).floor() {
                return Ok(BalanceSpec {
                    len,
                    sections: secs,
                    t,
                    tolerance: Tolerance::Formula(exponent),
                    r,
                    cap: cap.to_usize().unwrap_or(usize::MAX),
                });
            }
            if prec >= MAX_PREC {
                return Err(Error::Inconsistent(
                    "balance cap undecided at maximum precision".into(),
                ));
            }
            prec *= 2;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn section_count(&self) -> usize {
        self.sections.len()
    }

    pub fn sections(&self) -> &[usize] {
        &self.sections
    }

    pub fn t(&self) -> u8 {
        self.t
    }

    pub fn r(&self) -> &Enclosure {
        &self.r
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tolerance
    }

    /// Largest admissible count of one letter in one section.
    pub fn cap(&self) -> usize {
        self.cap
    }

    fn section_counts(&self, w: &Word) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(self.sections.len());
        let mut pos = 0;
        for &l in &self.sections {
            let mut counts = vec![0usize; self.t as usize];
            for &c in &w.letters()[pos..pos + l] {
                counts[c as usize] += 1;
            }
            out.push(counts);
            pos += l;
        }
        out
    }

    fn check_len(&self, w: &Word) -> Result<()> {
        if w.len() != self.len {
            return Err(Error::InvalidWord(format!(
                "word {w} has length {}, expected {}",
                w.len(),
                self.len
            )));
        }
        w.check_alphabet(self.t)
    }

    pub fn is_balanced(&self, w: &Word) -> Result<bool> {
        self.check_len(w)?;
        Ok(self
            .section_counts(w)
            .iter()
            .all(|counts| counts.iter().all(|&c| c <= self.cap)))
    }

    /// `d(w, T^Q(M, r))`, or `None` when no balanced word exists.
    ///
    /// Sections are independent, and within a section each surplus
    /// occurrence needs exactly one change provided the section fits under
    /// `t * cap`.
    pub fn distance_to_balanced(&self, w: &Word) -> Result<Option<usize>> {
        self.check_len(w)?;
        let mut total = 0;
        for (counts, &l) in self.section_counts(w).iter().zip(&self.sections) {
            if l > self.t as usize * self.cap {
                return Ok(None);
            }
            total += counts.iter().map(|&c| c.saturating_sub(self.cap)).sum::<usize>();
        }
        Ok(Some(total))
    }

    /// Number of unbalanced words, by enumeration of `T^Q`.
    pub fn count_unbalanced(&self, max_space: u128) -> Result<u64> {
        space_size(self.t, self.len, max_space)?;
        let mut n = 0;
        for w in all_words(self.t, self.len) {
            if !self.is_balanced(&w)? {
                n += 1;
            }
        }
        Ok(n)
    }

    /// Number of balanced words, by a product of per-section multinomial sums.
    pub fn count_balanced(&self) -> BigUint {
        let mut memo = std::collections::HashMap::new();
        self.sections
            .iter()
            .map(|&l| {
                memo.entry(l)
                    .or_insert_with(|| bounded_strings(l, self.t as usize, self.cap))
                    .clone()
            })
            .product()
    }

    /// Balanced words of `T^Q` in lexicographic order.
    pub fn balanced_words(&self, max_space: u128) -> Result<Vec<Word>> {
        space_size(self.t, self.len, max_space)?;
        let mut out = Vec::new();
        for w in all_words(self.t, self.len) {
            if self.is_balanced(&w)? {
                out.push(w);
            }
        }
        Ok(out)
    }
}

/// Strings of length `len` over `t` letters using each letter at most `cap` times.
fn bounded_strings(len: usize, t: usize, cap: usize) -> BigUint {
    // ways[m] = number of strings of length m over the letters seen so far.
    let mut ways = vec![BigUint::zero(); len + 1];
    ways[0] = BigUint::one();
    for _ in 0..t {
        let mut next = vec![BigUint::zero(); len + 1];
        for (m, w) in ways.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for c in 0..=cap.min(len - m) {
                next[m + c] += w * binomial((m + c) as u64, c as u64);
            }
        }
        ways = next;
    }
    ways[len].clone()
}

pub fn hamming_distance(a: &Word, b: &Word) -> usize {
    assert_eq!(a.len(), b.len(), "hamming distance of unequal lengths");
    a.letters().iter().zip(b.letters()).filter(|(x, y)| x != y).count()
}

/// The lie string read off from a truthful word and a response: the
/// differing positions, in order.
pub fn lie_string_to(truth: &Word, response: &Word) -> LieString {
    LieString::new(
        truth
            .letters()
            .iter()
            .zip(response.letters())
            .filter(|(a, b)| a != b)
            .map(|(&a, &b)| Lie::new(a, b).expect("letters differ"))
            .collect(),
    )
}

/// `{w' : w →^u w'}`.
pub fn apply_lie_string(w: &Word, u: &LieString) -> BTreeSet<Word> {
    fn rec(cur: &mut Vec<u8>, start: usize, lies: &[Lie], out: &mut BTreeSet<Word>) {
        let Some((first, rest)) = lies.split_first() else {
            out.insert(Word(cur.clone()));
            return;
        };
        // Leave room for the remaining lies.
        let end = cur.len() - rest.len();
        for pos in start..end {
            if cur[pos] == first.truth() {
                cur[pos] = first.response();
                rec(cur, pos + 1, rest, out);
                cur[pos] = first.truth();
            }
        }
    }
    let mut out = BTreeSet::new();
    if u.len() <= w.len() {
        rec(&mut w.letters().to_vec(), 0, u.lies(), &mut out);
    }
    out
}

/// `{w : w →^u w'}`.
pub fn preimage_lie_string(response: &Word, u: &LieString) -> BTreeSet<Word> {
    apply_lie_string(response, &u.swapped())
}

/// The `C`-shadow `B(w, C)`.
pub fn shadow(w: &Word, channel: &Channel) -> BTreeSet<Word> {
    channel
        .strings()
        .iter()
        .flat_map(|u| apply_lie_string(w, u))
        .collect()
}

/// All stems `w` whose shadow `B(w, C)` contains `response`.
pub fn shadow_preimage(response: &Word, channel: &Channel) -> BTreeSet<Word> {
    channel
        .strings()
        .iter()
        .flat_map(|u| preimage_lie_string(response, u))
        .collect()
}

/// `b(Q, t, j)`: size of a Hamming ball of radius `j` in `T^Q`.
pub fn ball_size(len: usize, t: u8, j: usize) -> BigUint {
    (0..=j.min(len))
        .map(|l| binomial(len as u64, l as u64) * BigUint::from(t as u64 - 1).pow(l as u32))
        .sum()
}

/// `(1/t)⌈Q/M⌉` as an exact enclosure.
fn share(len: usize, m: usize, t: u8) -> Enclosure {
    Enclosure::from_ratio(len.div_ceil(m) as i64, t as i64)
}

/// `G(Q, M, r, j, k) = C(M+j-1, j) ((1/t)⌈Q/M⌉ + r + k)^j`.
pub fn g_bound_enclosure(len: usize, m: usize, t: u8, r: &Enclosure, j: usize, k: usize) -> Enclosure {
    let base = &(&share(len, m, t) + r) + &Enclosure::from_int(k as i64);
    &Enclosure::from_biguint(&binomial((m + j) as u64 - 1, j as u64)) * &base.pow(j as u32)
}

/// `H(Q, M, r, j, k) = C(M, j) max(0, (1/t)⌈Q/M⌉ - (t-1) r - 2 - k)^j`.
pub fn h_bound_enclosure(len: usize, m: usize, t: u8, r: &Enclosure, j: usize, k: usize) -> Enclosure {
    let base = &(&share(len, m, t) - &(&Enclosure::from_int(t as i64 - 1) * r))
        - &Enclosure::from_int(2 + k as i64);
    &Enclosure::from_biguint(&binomial(m as u64, j as u64)) * &base.max0().pow(j as u32)
}

pub fn g_bound(len: usize, m: usize, t: u8, r: f64, j: usize, k: usize) -> f64 {
    let base = len.div_ceil(m) as f64 / t as f64 + r + k as f64;
    binomial((m + j) as u64 - 1, j as u64).to_f64().unwrap_or(f64::INFINITY) * base.powi(j as i32)
}

pub fn h_bound(len: usize, m: usize, t: u8, r: f64, j: usize, k: usize) -> f64 {
    let base = len.div_ceil(m) as f64 / t as f64 - (t as f64 - 1.0) * r - 2.0 - k as f64;
    binomial(m as u64, j as u64).to_f64().unwrap_or(f64::INFINITY) * base.max(0.0).powi(j as i32)
}
