//! Independent reference implementations shared by the integration tests.

use std::collections::BTreeMap;

use liar_core::{Channel, Lie, LieString, Variant};

pub type Pool = Vec<(Vec<LieString>, u64)>;

/// Plain minimax over every question, grouping elements only by their set
/// of remaining lie strings.
pub fn oracle_wins(pool: &Pool, rounds: usize, t: u8, variant: Variant) -> bool {
    let alive: u64 = pool.iter().filter(|(s, _)| s.iter().any(LieString::is_empty)).map(|p| p.1).sum();
    let live: u64 = pool.iter().map(|p| p.1).sum();
    if rounds == 0 {
        return match variant {
            Variant::Original => alive <= 1,
            Variant::Pathological => alive >= 1,
        };
    }
    if variant == Variant::Original && live <= 1 {
        return true;
    }
    if variant == Variant::Pathological && live == 0 {
        return false;
    }
    let mut split = vec![vec![0u64; t as usize]; pool.len()];
    questions(pool, 0, &mut split, t, &mut |split| {
        (0..t).all(|answer| oracle_wins(&respond(pool, split, answer), rounds - 1, t, variant))
    })
}

fn questions(pool: &Pool, i: usize, split: &mut Vec<Vec<u64>>, t: u8, f: &mut dyn FnMut(&Vec<Vec<u64>>) -> bool) -> bool {
    if i == pool.len() {
        return f(split);
    }
    fn parts(left: u64, slot: usize, i: usize, split: &mut Vec<Vec<u64>>, rest: &mut dyn FnMut(&mut Vec<Vec<u64>>) -> bool) -> bool {
        let t = split[i].len();
        if slot + 1 == t {
            split[i][slot] = left;
            return rest(split);
        }
        for v in 0..=left {
            split[i][slot] = v;
            if parts(left - v, slot + 1, i, split, rest) {
                return true;
            }
        }
        false
    }
    parts(pool[i].1, 0, i, split, &mut |s| questions(pool, i + 1, s, t, f))
}

fn respond(pool: &Pool, split: &[Vec<u64>], answer: u8) -> Pool {
    let mut next: BTreeMap<Vec<LieString>, u64> = BTreeMap::new();
    for ((strings, _), parts) in pool.iter().zip(split) {
        for (truth, &count) in parts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let after: Vec<LieString> = if truth as u8 == answer {
                strings.clone()
            } else {
                let head = LieString::new(vec![Lie::new(truth as u8, answer).expect("distinct")]);
                let mut v: Vec<LieString> = strings.iter().filter_map(|s| s.strip_prefix(&head)).collect();
                v.sort();
                v
            };
            if !after.is_empty() {
                *next.entry(after).or_default() += count;
            }
        }
    }
    next.into_iter().collect()
}

pub fn oracle_maxn(channel: &Channel, q: usize) -> u64 {
    let mut strings = channel.strings().to_vec();
    strings.sort();
    let mut n = 0;
    while oracle_wins(&vec![(strings.clone(), n + 1)], q, channel.t(), Variant::Original) {
        n += 1;
    }
    n
}

