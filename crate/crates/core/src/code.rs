//! Linear codes over small finite fields, built greedily from a
//! parity-check matrix, and their transfer to alphabets that are not prime
//! powers by translation.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::word::{hamming_distance, space_size, Word};
use crate::Limits;

/// `Some((p, m))` when `q = p^m` for a prime `p`.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut rest = q;
    let mut m = 0;
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

/// Smallest prime power `>= t`.
pub fn next_prime_power(t: u64) -> u64 {
    (t.max(2)..).find(|&q| prime_power(q).is_some()).expect("prime powers are unbounded")
}

/// `GF(p^m)` with elements `0..q` read as base-`p` coefficient vectors.
#[derive(Debug, Clone)]
pub struct Field {
    p: u64,
    q: usize,
    add: Vec<Vec<u8>>,
    mul: Vec<Vec<u8>>,
    inv: Vec<u8>,
}

impl Field {
    pub fn new(q: u64) -> Result<Self> {
        let (p, m) = prime_power(q).ok_or_else(|| Error::InvalidArgument(format!("{q} is not a prime power")))?;
        if q > 256 {
            return Err(Error::InvalidArgument(format!("field of size {q} is too large")));
        }
        let qs = q as usize;
        let digits = |x: usize| -> Vec<u64> {
            let mut d = Vec::with_capacity(m as usize);
            let mut x = x as u64;
            for _ in 0..m {
                d.push(x % p);
                x /= p;
            }
            d
        };
        let undigits = |d: &[u64]| -> usize { d.iter().rev().fold(0u64, |acc, &c| acc * p + c) as usize };
        let add: Vec<Vec<u8>> = (0..qs)
            .map(|a| {
                (0..qs)
                    .map(|b| {
                        let s: Vec<u64> = digits(a).iter().zip(digits(b)).map(|(x, y)| (x + y) % p).collect();
                        undigits(&s) as u8
                    })
                    .collect()
            })
            .collect();
        // Multiplication modulo a monic polynomial of degree m whose root
        // generates the multiplicative group.
        let mul_mod = |a: &[u64], b: &[u64], modulus: &[u64]| -> Vec<u64> {
            let mut prod = vec![0u64; 2 * m as usize];
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            for deg in (m as usize..prod.len()).rev() {
                let c = prod[deg];
                if c == 0 {
                    continue;
                }
                prod[deg] = 0;
                // x^m = -(modulus[0] + ... + modulus[m-1] x^(m-1))
                for (i, &mc) in modulus.iter().enumerate() {
                    let idx = deg - m as usize + i;
                    prod[idx] = (prod[idx] + c * (p - mc) % p) % p;
                }
            }
            prod.truncate(m as usize);
            prod
        };
        let mut modulus = None;
        let x_elem: Vec<u64> = if m == 1 { Vec::new() } else { digits(p as usize) };
        for cand in 0..qs {
            let low = digits(cand);
            if low[0] == 0 {
                continue;
            }
            let gen: Vec<u64> = if m == 1 {
                // For prime fields search a primitive element directly.
                digits(cand)
            } else {
                x_elem.clone()
            };
            let mut seen = HashSet::new();
            let mut cur = digits(1);
            let mut ok = true;
            for _ in 0..qs - 1 {
                cur = if m == 1 {
                    vec![(cur[0] * gen[0]) % p]
                } else {
                    mul_mod(&cur, &gen, &low)
                };
                if !seen.insert(cur.clone()) {
                    ok = false;
                    break;
                }
            }
            if ok && seen.len() == qs - 1 && !seen.contains(&vec![0; m as usize]) {
                modulus = Some(low);
                break;
            }
        }
        let modulus = modulus.expect("a primitive polynomial exists");
        let mul: Vec<Vec<u8>> = (0..qs)
            .map(|a| {
                (0..qs)
                    .map(|b| {
                        let r = if m == 1 {
                            vec![(a as u64 * b as u64) % p]
                        } else {
                            mul_mod(&digits(a), &digits(b), &modulus)
                        };
                        undigits(&r) as u8
                    })
                    .collect()
            })
            .collect();
        let inv = (0..qs)
            .map(|a| if a == 0 { 0 } else { (1..qs).find(|&b| mul[a][b] == 1).expect("field inverse") as u8 })
            .collect();
        Ok(Field { p, q: qs, add, mul, inv })
    }

    pub fn size(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize][b as usize]
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize][b as usize]
    }

    pub fn neg(&self, a: u8) -> u8 {
        (0..self.q as u8).find(|&b| self.add(a, b) == 0).expect("additive inverse")
    }

    pub fn inv(&self, a: u8) -> u8 {
        assert!(a != 0, "inverse of zero");
        self.inv[a as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Construction {
    /// Null space of a greedy parity-check matrix with `redundancy` rows.
    Linear { redundancy: usize, dimension: usize },
    /// A linear code over `t2` shifted by `shift` and cut down to `T^Q`.
    Translated { t2: u8, shift: Word, parent_size: usize },
}

/// A code of length `len` over `{0, .., t-1}` with minimum distance at least `2R+1`.
#[derive(Debug, Clone, Serialize)]
pub struct Code {
    pub t: u8,
    pub len: usize,
    pub radius: usize,
    pub words: Vec<Word>,
    pub construction: Construction,
}

impl Code {
    pub fn size(&self) -> usize {
        self.words.len()
    }

    /// Smallest pairwise distance, by checking every pair.
    pub fn min_distance(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, a) in self.words.iter().enumerate() {
            for b in &self.words[i + 1..] {
                let d = hamming_distance(a, b);
                best = Some(best.map_or(d, |x: usize| x.min(d)));
            }
        }
        best
    }
}

/// Greedy parity-check columns over `field`: each new column avoids every
/// combination of at most `2R - 1` earlier ones, so any `2R` columns are
/// independent.
fn parity_columns(field: &Field, len: usize, radius: usize, rows: usize) -> Option<Vec<Vec<u8>>> {
    let q = field.size();
    let span = 2 * radius - 1;
    // levels[s]: vectors that are combinations of exactly s chosen columns.
    let mut levels: Vec<HashSet<Vec<u8>>> = vec![HashSet::new(); span + 1];
    levels[0].insert(vec![0; rows]);
    let mut columns: Vec<Vec<u8>> = Vec::with_capacity(len);
    let vectors = q.pow(rows as u32);
    for _ in 0..len {
        let mut pick = None;
        for idx in 1..vectors {
            let mut v = vec![0u8; rows];
            let mut x = idx;
            for slot in v.iter_mut().rev() {
                *slot = (x % q) as u8;
                x /= q;
            }
            if !levels.iter().any(|l| l.contains(&v)) {
                pick = Some(v);
                break;
            }
        }
        let col = pick?;
        for s in (0..span).rev() {
            let additions: Vec<Vec<u8>> = levels[s]
                .iter()
                .flat_map(|base| {
                    (1..q as u8).map(|c| base.iter().zip(&col).map(|(&b, &h)| field.add(b, field.mul(c, h))).collect())
                })
                .collect();
            levels[s + 1].extend(additions);
        }
        columns.push(col);
    }
    Some(columns)
}

/// Basis of `{x : H x = 0}` for the `rows x len` matrix with the given columns.
fn null_space(field: &Field, columns: &[Vec<u8>], rows: usize) -> Vec<Vec<u8>> {
    let len = columns.len();
    let mut m: Vec<Vec<u8>> = (0..rows).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..len {
        let Some(pr) = (row..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(row, pr);
        let inv = field.inv(m[row][col]);
        for x in m[row].iter_mut() {
            *x = field.mul(*x, inv);
        }
        for r in 0..rows {
            if r != row && m[r][col] != 0 {
                let f = field.neg(m[r][col]);
                let pivot_row = m[row].clone();
                for (x, &y) in m[r].iter_mut().zip(&pivot_row) {
                    *x = field.add(*x, field.mul(f, y));
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    let free: Vec<usize> = (0..len).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u8; len];
            v[f] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(m[r][f]);
            }
            v
        })
        .collect()
}

/// Redundancy `⌈log_t(1 + Σ_{i<2R} C(Q-1,i)(t-1)^i)⌉` of the greedy construction.
pub fn varshamov_redundancy(t: u64, len: usize, radius: usize) -> usize {
    if radius == 0 {
        return 0;
    }
    let mut sum = num_bigint::BigUint::from(1u32);
    for i in 0..2 * radius {
        sum += crate::numeric::binomial(len as u64 - 1, i as u64) * num_bigint::BigUint::from(t - 1).pow(i as u32);
    }
    let mut e = 0;
    let mut pow = num_bigint::BigUint::from(1u32);
    while pow < sum {
        pow *= t;
        e += 1;
    }
    e
}

fn linear_code(t: u8, len: usize, radius: usize, limits: &Limits) -> Result<Code> {
    if radius == 0 {
        space_size(t, len, limits.max_space)?;
        let words = crate::word::all_words(t, len).collect();
        return Ok(Code {
            t,
            len,
            radius,
            words,
            construction: Construction::Linear { redundancy: 0, dimension: len },
        });
    }
    let field = Field::new(t as u64)?;
    let rows = varshamov_redundancy(t as u64, len, radius);
    if rows >= len {
        return Ok(Code {
            t,
            len,
            radius,
            words: vec![Word::zeros(len)],
            construction: Construction::Linear { redundancy: len, dimension: 0 },
        });
    }
    let columns = parity_columns(&field, len, radius, rows)
        .ok_or_else(|| Error::Inconsistent("greedy parity-check construction ran out of columns".into()))?;
    let basis = null_space(&field, &columns, rows);
    let dim = basis.len();
    space_size(t, dim, limits.max_space)?;
    let q = t as usize;
    let mut words = Vec::with_capacity(q.pow(dim as u32));
    for idx in 0..q.pow(dim as u32) {
        let mut coeffs = vec![0u8; dim];
        let mut x = idx;
        for slot in coeffs.iter_mut().rev() {
            *slot = (x % q) as u8;
            x /= q;
        }
        let mut v = vec![0u8; len];
        for (c, b) in coeffs.iter().zip(&basis) {
            if *c == 0 {
                continue;
            }
            for (x, &y) in v.iter_mut().zip(b) {
                *x = field.add(*x, field.mul(*c, y));
            }
        }
        words.push(Word::new(v));
    }
    words.sort();
    Ok(Code {
        t,
        len,
        radius,
        words,
        construction: Construction::Linear { redundancy: rows, dimension: dim },
    })
}

/// A code with minimum distance `2R+1` in `T^len`.
///
/// Prime-power `t` uses the greedy linear construction. Otherwise the code
/// for the next prime power `t2` is shifted by the translate (in the field's
/// additive group) keeping the most words inside `T^len`.
pub fn varshamov_code(t: u8, len: usize, radius: usize, limits: &Limits) -> Result<Code> {
    if t < 2 {
        return Err(Error::InvalidArgument(format!("alphabet size {t} < 2")));
    }
    if prime_power(t as u64).is_some() {
        return linear_code(t, len, radius, limits);
    }
    let t2 = next_prime_power(t as u64) as u8;
    let parent = linear_code(t2, len, radius, limits)?;
    let field = Field::new(t2 as u64)?;
    let shifts = space_size(t2, len, limits.max_space)?;
    let work = (shifts as u128).saturating_mul(parent.size() as u128);
    let candidates: Vec<usize> = if work <= limits.max_nodes {
        (0..shifts).collect()
    } else {
        vec![0]
    };
    let mut best: Option<(usize, Vec<Word>)> = None;
    for s in candidates {
        let shift = Word::from_index(s, t2, len);
        let kept: Vec<Word> = parent
            .words
            .iter()
            .map(|w| Word::new(w.letters().iter().zip(shift.letters()).map(|(&a, &b)| field.add(a, b)).collect()))
            .filter(|w| w.letters().iter().all(|&c| c < t))
            .collect();
        if best.as_ref().is_none_or(|(_, b)| kept.len() > b.len()) {
            best = Some((s, kept));
        }
    }
    let (s, mut words) = best.expect("at least one shift");
    words.sort();
    Ok(Code {
        t,
        len,
        radius,
        words,
        construction: Construction::Translated {
            t2,
            shift: Word::from_index(s, t2, len),
            parent_size: parent.size(),
        },
    })
}
