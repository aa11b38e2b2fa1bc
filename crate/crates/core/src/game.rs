//! Game play on state vectors and exact solvers.
//!
//! Elements sharing a suffix channel are interchangeable, so a position is a
//! count per class plus the number of rounds left, and a question is a
//! `t`-composition of each class count.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, ClassId, SuffixFamily};
use crate::error::{Error, Result};
use crate::pack_cover::{
    find_placement_in, Mode, Placement, PlacementProblem, ShadowTable, Stem,
};
use crate::word::{all_words, space_size, Word};
use crate::{Limits, Variant, Winner};

/// Counts of live elements per class, with the rounds still to play.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateVector {
    counts: Vec<u64>,
    rounds_left: usize,
}

/// `x_i` = number of elements whose suffix channel has order `k - i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoarseState {
    pub x: Vec<u64>,
}

impl StateVector {
    /// `n` elements in the root class.
    pub fn init(family: &SuffixFamily, n: u64, rounds: usize) -> Self {
        let mut counts = vec![0; family.len()];
        counts[family.root().0] = n;
        StateVector::normalized(family, counts, rounds)
    }

    pub fn from_counts(family: &SuffixFamily, counts: Vec<u64>, rounds: usize) -> Result<Self> {
        if counts.len() != family.len() {
            return Err(Error::Inconsistent(format!(
                "state has {} entries, family has {} classes",
                counts.len(),
                family.len()
            )));
        }
        Ok(StateVector::normalized(family, counts, rounds))
    }

    /// Drops elements that can no longer complete any lie string.
    fn normalized(family: &SuffixFamily, mut counts: Vec<u64>, rounds: usize) -> Self {
        for c in family.ids() {
            if family.min_len(c) > rounds {
                counts[c.0] = 0;
            }
        }
        StateVector { counts, rounds_left: rounds }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, class: ClassId) -> u64 {
        self.counts[class.0]
    }

    pub fn rounds_left(&self) -> usize {
        self.rounds_left
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Elements that would survive if the game ended now.
    pub fn survivors(&self, family: &SuffixFamily) -> u64 {
        family
            .ids()
            .filter(|&c| family.contains_empty(c))
            .map(|c| self.counts[c.0])
            .sum()
    }

    /// Nonzero entries keyed by class.
    pub fn to_map(&self) -> BTreeMap<ClassId, u64> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0)
            .map(|(i, &x)| (ClassId(i), x))
            .collect()
    }

    pub fn coarse(&self, family: &SuffixFamily) -> CoarseState {
        let k = family.order(family.root());
        let mut x = vec![0; k + 1];
        for c in family.ids() {
            x[k - family.order(c)] += self.counts[c.0];
        }
        CoarseState { x }
    }
}

/// Per-class split of the live elements into parts `A_0..A_{t-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Question {
    pub parts: Vec<Vec<u64>>,
}

impl Question {
    /// Every element of every class in part `letter`.
    pub fn constant(state: &StateVector, t: u8, letter: u8) -> Self {
        Question {
            parts: state
                .counts
                .iter()
                .map(|&x| {
                    let mut p = vec![0; t as usize];
                    p[letter as usize] = x;
                    p
                })
                .collect(),
        }
    }

    fn validate(&self, state: &StateVector, t: u8) -> Result<()> {
        if self.parts.len() != state.counts.len() {
            return Err(Error::InvalidArgument("question does not match the state's classes".into()));
        }
        for (c, (p, &x)) in self.parts.iter().zip(&state.counts).enumerate() {
            if p.len() != t as usize || p.iter().sum::<u64>() != x {
                return Err(Error::InvalidArgument(format!(
                    "parts {p:?} of class {c} do not split its count {x} into {t} parts"
                )));
            }
        }
        Ok(())
    }
}

fn step_counts(family: &SuffixFamily, parts: &[Vec<u64>], answer: u8, rounds_after: usize) -> Vec<u64> {
    let mut next = vec![0; family.len()];
    for (c, p) in parts.iter().enumerate() {
        for (a, &x) in p.iter().enumerate() {
            if x == 0 {
                continue;
            }
            if let Some(nc) = family.answer(ClassId(c), a as u8, answer) {
                if family.min_len(nc) <= rounds_after {
                    next[nc.0] += x;
                }
            }
        }
    }
    next
}

pub fn apply_round(family: &SuffixFamily, state: &StateVector, question: &Question, answer: u8) -> Result<StateVector> {
    if state.rounds_left == 0 {
        return Err(Error::InvalidArgument("no rounds left".into()));
    }
    if answer >= family.t() {
        return Err(Error::InvalidArgument(format!("answer {answer} outside alphabet")));
    }
    question.validate(state, family.t())?;
    let rounds = state.rounds_left - 1;
    Ok(StateVector {
        counts: step_counts(family, &question.parts, answer, rounds),
        rounds_left: rounds,
    })
}

pub fn paul_wins_terminal(family: &SuffixFamily, state: &StateVector, variant: Variant) -> Result<bool> {
    if state.rounds_left != 0 {
        return Err(Error::InvalidArgument(format!(
            "game not over: {} rounds left",
            state.rounds_left
        )));
    }
    let s = state.survivors(family);
    Ok(match variant {
        Variant::Original => s <= 1,
        Variant::Pathological => s >= 1,
    })
}

/// For one element of each class, the fewest (most) response strings of
/// length `r` under which it can be made to survive, over all adaptive
/// letter choices for it.
#[derive(Debug, Clone)]
pub struct ResponseVolumes {
    t: u8,
    min: Vec<Vec<u128>>,
    max: Vec<Vec<u128>>,
}

impl ResponseVolumes {
    pub fn new(family: &SuffixFamily, rounds: usize) -> Self {
        let t = family.t();
        let n = family.len();
        let mut min = vec![vec![0u128; rounds + 1]; n];
        let mut max = vec![vec![0u128; rounds + 1]; n];
        for c in family.ids() {
            let base = u128::from(family.contains_empty(c));
            min[c.0][0] = base;
            max[c.0][0] = base;
        }
        for r in 1..=rounds {
            for c in family.ids() {
                let mut lo = u128::MAX;
                let mut hi = 0u128;
                for a in 0..t {
                    let (mut s_lo, mut s_hi) = (0u128, 0u128);
                    for b in 0..t {
                        if let Some(nc) = family.answer(c, a, b) {
                            s_lo = s_lo.saturating_add(min[nc.0][r - 1]);
                            s_hi = s_hi.saturating_add(max[nc.0][r - 1]);
                        }
                    }
                    lo = lo.min(s_lo);
                    hi = hi.max(s_hi);
                }
                min[c.0][r] = lo;
                max[c.0][r] = hi;
            }
        }
        ResponseVolumes { t, min, max }
    }

    pub fn min(&self, class: ClassId, r: usize) -> u128 {
        self.min[class.0][r]
    }

    pub fn max(&self, class: ClassId, r: usize) -> u128 {
        self.max[class.0][r]
    }

    pub fn space(&self, r: usize) -> u128 {
        (self.t as u128).saturating_pow(r as u32)
    }
}

/// A Paul-winning adaptive strategy: the question asked, then one subtree per
/// answer (`None` once the game is over).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyNode {
    pub question: Question,
    pub children: Vec<Option<StrategyNode>>,
}

impl StrategyNode {
    pub fn size(&self) -> usize {
        1 + self.children.iter().flatten().map(StrategyNode::size).sum::<usize>()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AdaptiveOutcome {
    pub winner: Winner,
    /// Present when Paul wins and the tree fits the node budget.
    pub strategy: Option<StrategyNode>,
    pub states_solved: usize,
}

/// Compositions of `x` into `t` parts, most even first.
fn compositions(x: u64, t: usize) -> Vec<Vec<u64>> {
    fn rec(left: u64, slots: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=left {
            cur.push(v);
            rec(left - v, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(x, t, &mut Vec::with_capacity(t), &mut out);
    out.sort_by_key(|p| {
        let hi = p.iter().max().copied().unwrap_or(0);
        let lo = p.iter().min().copied().unwrap_or(0);
        (hi - lo, std::cmp::Reverse(p.clone()))
    });
    out
}

struct Adaptive<'a> {
    family: &'a SuffixFamily,
    variant: Variant,
    limits: &'a Limits,
    volumes: ResponseVolumes,
    memo: HashMap<(usize, Vec<u64>), bool>,
    compositions: HashMap<u64, Vec<Vec<u64>>>,
}

enum Quick {
    Win,
    Lose,
    Open,
}

impl<'a> Adaptive<'a> {
    fn new(family: &'a SuffixFamily, variant: Variant, limits: &'a Limits, rounds: usize) -> Self {
        Adaptive {
            family,
            variant,
            limits,
            volumes: ResponseVolumes::new(family, rounds),
            memo: HashMap::new(),
            compositions: HashMap::new(),
        }
    }

    fn quick(&self, counts: &[u64], rounds: usize) -> Quick {
        let space = self.volumes.space(rounds);
        match self.variant {
            Variant::Original => {
                if counts.iter().sum::<u64>() <= 1 {
                    return Quick::Win;
                }
                let need = counts.iter().enumerate().fold(0u128, |acc, (c, &x)| {
                    acc.saturating_add((x as u128).saturating_mul(self.volumes.min(ClassId(c), rounds)))
                });
                if need > space {
                    return Quick::Lose;
                }
            }
            Variant::Pathological => {
                let mut reach = 0u128;
                for (c, &x) in counts.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    let m = self.volumes.max(ClassId(c), rounds);
                    if m == space {
                        return Quick::Win;
                    }
                    reach = reach.saturating_add((x as u128).saturating_mul(m));
                }
                if reach < space {
                    return Quick::Lose;
                }
            }
        }
        if rounds == 0 {
            let s: u64 = self
                .family
                .ids()
                .filter(|&c| self.family.contains_empty(c))
                .map(|c| counts[c.0])
                .sum();
            let win = match self.variant {
                Variant::Original => s <= 1,
                Variant::Pathological => s >= 1,
            };
            return if win { Quick::Win } else { Quick::Lose };
        }
        Quick::Open
    }

    fn class_compositions(&mut self, x: u64) -> Vec<Vec<u64>> {
        let t = self.family.t() as usize;
        self.compositions
            .entry(x)
            .or_insert_with(|| compositions(x, t))
            .clone()
    }

    /// Calls `f` on each question until it returns `Some`.
    fn for_each_question<R>(
        &mut self,
        counts: &[u64],
        mut f: impl FnMut(&mut Self, &[Vec<u64>]) -> Result<Option<R>>,
    ) -> Result<Option<R>> {
        let t = self.family.t() as usize;
        let live: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
        let lists: Vec<Vec<Vec<u64>>> = live.iter().map(|&c| self.class_compositions(counts[c])).collect();
        let mut parts: Vec<Vec<u64>> = vec![vec![0; t]; counts.len()];
        let mut odometer = vec![0usize; live.len()];
        loop {
            for (i, &c) in live.iter().enumerate() {
                parts[c].clone_from(&lists[i][odometer[i]]);
            }
            if let Some(r) = f(self, &parts)? {
                return Ok(Some(r));
            }
            let mut i = 0;
            loop {
                if i == live.len() {
                    return Ok(None);
                }
                odometer[i] += 1;
                if odometer[i] < lists[i].len() {
                    break;
                }
                odometer[i] = 0;
                i += 1;
            }
        }
    }

    fn children(&self, parts: &[Vec<u64>], rounds: usize) -> Vec<Vec<u64>> {
        (0..self.family.t())
            .map(|b| step_counts(self.family, parts, b, rounds - 1))
            .collect()
    }

    fn wins(&mut self, counts: &[u64], rounds: usize) -> Result<bool> {
        match self.quick(counts, rounds) {
            Quick::Win => return Ok(true),
            Quick::Lose => return Ok(false),
            Quick::Open => {}
        }
        let key = (rounds, counts.to_vec());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        if self.memo.len() as u128 >= self.limits.max_nodes {
            return Err(Error::cap("adaptive solver states", self.memo.len() as u128, self.limits.max_nodes));
        }
        let found = self.for_each_question(counts, |s, parts| {
            let kids = s.children(parts, rounds);
            // Cheap refutations first.
            if kids.iter().any(|k| matches!(s.quick(k, rounds - 1), Quick::Lose)) {
                return Ok(None);
            }
            for k in &kids {
                if !s.wins(k, rounds - 1)? {
                    return Ok(None);
                }
            }
            Ok(Some(()))
        })?;
        let win = found.is_some();
        self.memo.insert(key, win);
        Ok(win)
    }

    fn tree(&mut self, counts: &[u64], rounds: usize, budget: &mut usize) -> Result<Option<StrategyNode>> {
        if *budget == 0 {
            return Ok(None);
        }
        *budget -= 1;
        let question = self.for_each_question(counts, |s, parts| {
            let kids = s.children(parts, rounds);
            for k in &kids {
                if !s.wins(k, rounds - 1)? {
                    return Ok(None);
                }
            }
            Ok(Some(parts.to_vec()))
        })?;
        let Some(parts) = question else {
            return Err(Error::Inconsistent("winning state without a winning question".into()));
        };
        let mut children = Vec::new();
        for k in self.children(&parts, rounds) {
            if rounds == 1 {
                children.push(None);
                continue;
            }
            match self.tree(&k, rounds - 1, budget)? {
                Some(node) => children.push(Some(node)),
                None => return Ok(None),
            }
        }
        Ok(Some(StrategyNode { question: Question { parts }, children }))
    }
}

/// Exact minimax value of the fully adaptive game from `state`.
pub fn solve_adaptive_from(family: &SuffixFamily, state: &StateVector, variant: Variant, limits: &Limits) -> Result<AdaptiveOutcome> {
    let rounds = state.rounds_left;
    let mut solver = Adaptive::new(family, variant, limits, rounds);
    let win = solver.wins(&state.counts, rounds)?;
    let strategy = if win && rounds > 0 {
        let mut budget = limits.tree_budget;
        solver.tree(&state.counts, rounds, &mut budget)?
    } else {
        None
    };
    Ok(AdaptiveOutcome {
        winner: Winner::from_paul(win),
        strategy,
        states_solved: solver.memo.len(),
    })
}

pub fn solve_adaptive(channel: &Channel, n: u64, q: usize, variant: Variant, limits: &Limits) -> Result<AdaptiveOutcome> {
    let family = channel.family();
    let state = StateVector::init(&family, n, q);
    solve_adaptive_from(&family, &state, variant, limits)
}

/// First-batch blocks of elements sharing a word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub word: Word,
    pub element_ids: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub element: u64,
    pub word: Word,
}

/// Second-batch words for the survivors of one first-batch response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondBatch {
    pub response: Word,
    pub assignments: Vec<Assignment>,
}

/// A committed two-batch plan. Elements without a second-batch entry for a
/// response are asked the all-zero word.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoBatchStrategy {
    pub t: u8,
    pub q1: usize,
    pub q2: usize,
    pub blocks: Vec<Block>,
    pub second: Vec<SecondBatch>,
}

/// Elements alive after the first batch, with their classes.
pub type Survivors = Vec<(u64, ClassId)>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyVerdict {
    pub valid: bool,
    pub responses_checked: u64,
    /// First full response string (first and second batch) that breaks the strategy.
    pub failure: Option<Word>,
    pub reason: Option<String>,
}

/// First-batch words and second-batch tables, indexed for replay.
pub struct StrategyIndex<'s> {
    pub first: BTreeMap<u64, &'s Word>,
    pub second: HashMap<&'s Word, HashMap<u64, &'s Word>>,
}

impl TwoBatchStrategy {
    pub fn n(&self) -> u64 {
        self.blocks.iter().map(|b| b.element_ids.len() as u64).sum()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("strategy serializes")
    }

    /// Checks shapes and builds lookup tables.
    pub fn index(&self) -> Result<StrategyIndex<'_>> {
        let mut first = BTreeMap::new();
        for b in &self.blocks {
            if b.word.len() != self.q1 {
                return Err(Error::Inconsistent(format!("block word {} is not of length {}", b.word, self.q1)));
            }
            b.word.check_alphabet(self.t)?;
            for &e in &b.element_ids {
                if first.insert(e, &b.word).is_some() {
                    return Err(Error::Inconsistent(format!("element {e} appears in two blocks")));
                }
            }
        }
        let mut second: HashMap<&Word, HashMap<u64, &Word>> = HashMap::new();
        for s in &self.second {
            if s.response.len() != self.q1 {
                return Err(Error::Inconsistent(format!("response {} is not of length {}", s.response, self.q1)));
            }
            s.response.check_alphabet(self.t)?;
            let table = second.entry(&s.response).or_default();
            for a in &s.assignments {
                if a.word.len() != self.q2 {
                    return Err(Error::Inconsistent(format!("second-batch word {} is not of length {}", a.word, self.q2)));
                }
                a.word.check_alphabet(self.t)?;
                if !first.contains_key(&a.element) {
                    return Err(Error::Inconsistent(format!("unknown element {}", a.element)));
                }
                if table.insert(a.element, &a.word).is_some() {
                    return Err(Error::Inconsistent(format!(
                        "element {} assigned twice for response {}",
                        a.element, s.response
                    )));
                }
            }
        }
        Ok(StrategyIndex { first, second })
    }

    /// Survivors of the first batch under `response`, with their classes,
    /// dropping those that cannot finish a lie string in `q2` rounds.
    pub fn survivors(&self, family: &SuffixFamily, _index: &StrategyIndex, response: &Word) -> Survivors {
        let mut out = Vec::new();
        for b in &self.blocks {
            let Some(c) = family.read(family.root(), b.word.letters(), response.letters()) else {
                continue;
            };
            if family.min_len(c) <= self.q2 {
                out.extend(b.element_ids.iter().map(|&e| (e, c)));
            }
        }
        out
    }

    /// Second-batch placement induced by `response`.
    pub fn induced_placement(&self, family: &SuffixFamily, index: &StrategyIndex, response: &Word) -> Placement {
        let table = index.second.get(response);
        Placement {
            stems: self
                .survivors(family, index, response)
                .into_iter()
                .map(|(e, c)| Stem {
                    stem: table
                        .and_then(|m| m.get(&e))
                        .map(|w| (*w).clone())
                        .unwrap_or_else(|| Word::zeros(self.q2)),
                    channel: c,
                })
                .collect(),
        }
    }

    /// Replays every first-batch response and checks the induced second
    /// batch cell by cell.
    pub fn verify(&self, channel: &Channel, variant: Variant, limits: &Limits) -> Result<StrategyVerdict> {
        if channel.t() != self.t {
            return Err(Error::AlphabetMismatch { expected: channel.t(), found: self.t });
        }
        let family = channel.family();
        let index = self.index()?;
        space_size(self.t, self.q1, limits.max_space)?;
        let table = ShadowTable::new(&family, self.q2, limits)?;
        // Second-batch stems as word indices, per response.
        let stems: HashMap<&Word, HashMap<u64, usize>> = index
            .second
            .iter()
            .map(|(r, m)| (*r, m.iter().map(|(&e, w)| (e, w.index(self.t))).collect()))
            .collect();
        let mut checked = 0;
        let mut counts = vec![0u32; table.size()];
        let mut seen: HashSet<(ClassId, usize)> = HashSet::new();
        for response in all_words(self.t, self.q1) {
            checked += 1;
            counts.iter_mut().for_each(|c| *c = 0);
            seen.clear();
            let assigned = stems.get(&response);
            for b in &self.blocks {
                let Some(c) = family.read(family.root(), b.word.letters(), response.letters()) else {
                    continue;
                };
                if family.min_len(c) > self.q2 {
                    continue;
                }
                for e in &b.element_ids {
                    let stem = assigned.and_then(|m| m.get(e)).copied().unwrap_or(0);
                    // A repeated shadow cannot uncover anything.
                    if variant == Variant::Pathological && !seen.insert((c, stem)) {
                        continue;
                    }
                    for cell in table.shadow(c, stem).ones() {
                        counts[cell] += 1;
                    }
                }
            }
            let bad = match variant {
                Variant::Original => counts.iter().position(|&c| c > 1),
                Variant::Pathological => counts.iter().position(|&c| c == 0),
            };
            if let Some(cell) = bad {
                let tail = Word::from_index(cell, self.t, self.q2);
                let reason = match variant {
                    Variant::Original => format!("{} elements survive", counts[cell]),
                    Variant::Pathological => "no element survives".to_string(),
                };
                return Ok(StrategyVerdict {
                    valid: false,
                    responses_checked: checked,
                    failure: Some(response.concat(&tail)),
                    reason: Some(reason),
                });
            }
        }
        Ok(StrategyVerdict { valid: true, responses_checked: checked, failure: None, reason: None })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TwoBatchOutcome {
    pub winner: Winner,
    pub strategy: Option<TwoBatchStrategy>,
    pub first_batches_tried: u64,
}

/// Multisets of size `n` from `m` kinds.
fn multiset_count(m: u128, n: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..n {
        acc = acc.saturating_mul(m + i) / (i + 1);
    }
    acc
}

struct TwoBatch<'t, 'a> {
    table: &'t ShadowTable<'a>,
    variant: Variant,
    limits: &'t Limits,
    n: usize,
    t: u8,
    q1: usize,
    first_size: usize,
    /// `class_of[w][w']`: class after truth `w` is answered as `w'`.
    class_of: Vec<Vec<Option<ClassId>>>,
    cache: HashMap<Vec<u64>, Option<Placement>>,
    tried: u64,
}

impl<'t, 'a> TwoBatch<'t, 'a> {
    fn second_batch(&mut self, demand: &[u64]) -> Result<bool> {
        if let Some(p) = self.cache.get(demand) {
            return Ok(p.is_some());
        }
        let mode = Mode::for_variant(self.variant);
        let problem = PlacementProblem { len: self.table.len(), demand: demand.to_vec(), mode };
        let found = find_placement_in(self.table, &problem, self.limits)?;
        let ok = found.is_some();
        self.cache.insert(demand.to_vec(), found);
        Ok(ok)
    }

    fn add(&self, demand: &mut [Vec<u64>], w: usize, sign: bool) {
        for (r, slot) in demand.iter_mut().enumerate() {
            if let Some(c) = self.class_of[w][r] {
                if sign {
                    slot[c.0] += 1;
                } else {
                    slot[c.0] -= 1;
                }
            }
        }
    }

    fn dfs(&mut self, chosen: &mut Vec<usize>, demand: &mut Vec<Vec<u64>>) -> Result<bool> {
        if chosen.len() == self.n {
            self.tried += 1;
            if self.tried as u128 > self.limits.max_nodes {
                return Err(Error::cap("first-batch assignments", self.tried as u128, self.limits.max_nodes));
            }
            for r in 0..self.first_size {
                if !self.second_batch(&demand[r].clone())? {
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        let start = chosen.last().copied().unwrap_or(0);
        for w in start..self.first_size {
            self.add(demand, w, true);
            chosen.push(w);
            // Packing only gets harder as elements are added.
            let mut viable = true;
            if self.variant == Variant::Original {
                for r in 0..self.first_size {
                    if self.class_of[w][r].is_some() && !self.second_batch(&demand[r].clone())? {
                        viable = false;
                        break;
                    }
                }
            }
            if viable && self.dfs(chosen, demand)? {
                return Ok(true);
            }
            chosen.pop();
            self.add(demand, w, false);
        }
        Ok(false)
    }

    fn strategy(&self, chosen: &[usize], q2: usize) -> TwoBatchStrategy {
        let t = self.t;
        let mut blocks: Vec<Block> = Vec::new();
        for (e, &w) in chosen.iter().enumerate() {
            let word = Word::from_index(w, t, self.q1);
            match blocks.last_mut() {
                Some(b) if b.word == word => b.element_ids.push(e as u64),
                _ => blocks.push(Block { word, element_ids: vec![e as u64] }),
            }
        }
        let family = self.table.family();
        let mut second = Vec::new();
        for r in 0..self.first_size {
            let mut demand = vec![0; family.len()];
            let mut by_class: BTreeMap<ClassId, Vec<u64>> = BTreeMap::new();
            for (e, &w) in chosen.iter().enumerate() {
                if let Some(c) = self.class_of[w][r] {
                    demand[c.0] += 1;
                    by_class.entry(c).or_default().push(e as u64);
                }
            }
            if by_class.is_empty() {
                continue;
            }
            let placement = self.cache[&demand].as_ref().expect("winning demand has a placement");
            let mut assignments = Vec::new();
            for s in &placement.stems {
                if let Some(e) = by_class.get_mut(&s.channel).and_then(|v| if v.is_empty() { None } else { Some(v.remove(0)) }) {
                    assignments.push(Assignment { element: e, word: s.stem.clone() });
                }
            }
            assignments.sort_by_key(|a| a.element);
            second.push(SecondBatch { response: Word::from_index(r, t, self.q1), assignments });
        }
        TwoBatchStrategy { t, q1: self.q1, q2, blocks, second }
    }
}

/// Exact two-batch solver: searches first-batch word multisets and decides
/// each induced second batch by packing/covering existence.
pub fn solve_two_batch(channel: &Channel, n: u64, q1: usize, q2: usize, variant: Variant, limits: &Limits) -> Result<TwoBatchOutcome> {
    let family = channel.family();
    let t = channel.t();
    let first_size = space_size(t, q1, limits.max_space)?;
    let table = ShadowTable::new(&family, q2, limits)?;
    let count = multiset_count(first_size as u128, n as u128);
    if count > limits.max_nodes {
        return Err(Error::cap("first-batch assignments", count, limits.max_nodes));
    }
    let words: Vec<Word> = all_words(t, q1).collect();
    let class_of = words
        .iter()
        .map(|w| {
            words
                .iter()
                .map(|r| {
                    family
                        .read(family.root(), w.letters(), r.letters())
                        .filter(|&c| family.min_len(c) <= q2)
                })
                .collect()
        })
        .collect();
    let mut solver = TwoBatch {
        table: &table,
        variant,
        limits,
        n: n as usize,
        t,
        q1,
        first_size,
        class_of,
        cache: HashMap::new(),
        tried: 0,
    };
    let mut chosen = Vec::new();
    let mut demand = vec![vec![0; family.len()]; first_size];
    let win = solver.dfs(&mut chosen, &mut demand)?;
    let strategy = win.then(|| solver.strategy(&chosen, q2));
    Ok(TwoBatchOutcome {
        winner: Winner::from_paul(win),
        strategy,
        first_batches_tried: solver.tried,
    })
}

/// How a game is played for [`optimal_n`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Play {
    Adaptive,
    TwoBatch { q1: usize },
}

pub fn paul_wins(channel: &Channel, n: u64, q: usize, variant: Variant, play: Play, limits: &Limits) -> Result<bool> {
    let w = match play {
        Play::Adaptive => solve_adaptive(channel, n, q, variant, &Limits { tree_budget: 0, ..*limits })?.winner,
        Play::TwoBatch { q1 } => {
            if q1 > q {
                return Err(Error::InvalidArgument(format!("first batch {q1} longer than game {q}")));
            }
            solve_two_batch(channel, n, q1, q - q1, variant, limits)?.winner
        }
    };
    Ok(w == Winner::Paul)
}

/// Extremal search-space size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "n")]
pub enum Threshold {
    /// Original: the largest `n` Paul wins. Pathological: the smallest.
    Exact(u64),
    /// Original: Paul wins for every `n`.
    Unbounded,
    /// Pathological: Paul wins for no `n` up to the searched cap.
    NoneUpTo(u64),
}

/// Optimal `n` by binary search, using monotonicity of the outcome in `n`.
pub fn optimal_n(channel: &Channel, q: usize, variant: Variant, play: Play, limits: &Limits, n_cap: u64) -> Result<Threshold> {
    let family = channel.family();
    let vols = ResponseVolumes::new(&family, q);
    let space = vols.space(q);
    let root = family.root();
    let wins = |n: u64| paul_wins(channel, n, q, variant, play, limits);
    match variant {
        Variant::Original => {
            let per = vols.min(root, q);
            if per == 0 {
                // Every element can be steered to certain disqualification.
                return Ok(Threshold::Unbounded);
            }
            // Paul wins at n = 1 always; Carole wins once n * per > t^q.
            let mut lo = 1u64;
            let mut hi = (space / per + 1).min(n_cap as u128 + 1) as u64;
            if wins(hi)? {
                return Ok(Threshold::Exact(hi));
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if wins(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(Threshold::Exact(lo))
        }
        Variant::Pathological => {
            let per = vols.max(root, q);
            if per == 0 {
                return Ok(Threshold::NoneUpTo(n_cap));
            }
            let floor = space.div_ceil(per).max(1) as u64;
            let mut lo = floor - 1;
            let mut hi = floor;
            while !wins(hi)? {
                lo = hi;
                if hi >= n_cap {
                    return Ok(Threshold::NoneUpTo(n_cap));
                }
                hi = (hi * 2).min(n_cap);
            }
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if wins(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Ok(Threshold::Exact(hi))
        }
    }
}

/// For channels that are degenerate for `variant`, the constant answer or
/// constant question that decides every game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegenerateWitness {
    /// Original: Paul puts every element in part `letter`. Pathological:
    /// Carole always answers `letter`.
    pub letter: u8,
    pub winner: Winner,
}

pub fn degenerate_witness(channel: &Channel, variant: Variant) -> Option<DegenerateWitness> {
    if channel.contains_empty() {
        return None;
    }
    let letter = (0..channel.t()).find(|&c| !channel.has_constant_string(variant, c))?;
    let winner = match variant {
        Variant::Original => Winner::Paul,
        Variant::Pathological => Winner::Carole,
    };
    Some(DegenerateWitness { letter, winner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::presets::*;

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn init_examples() {
        let fam = symmetric(2, 1).family();
        let s = StateVector::init(&fam, 5, 3);
        assert_eq!(s.to_map(), BTreeMap::from([(fam.root(), 5)]));
        assert!(StateVector::init(&fam, 0, 3).to_map().is_empty());
        let eps = Channel::from_pairs(2, &[&[]]).unwrap().family();
        assert_eq!(StateVector::init(&eps, 1, 0).to_map(), BTreeMap::from([(eps.root(), 1)]));
    }

    #[test]
    fn round_examples() {
        let c = symmetric(2, 1);
        let fam = c.family();
        let eps = fam.id_of(&Channel::from_pairs(2, &[&[]]).unwrap()).unwrap();
        let s = StateVector::init(&fam, 2, 3);
        let mut parts = vec![vec![0, 0]; fam.len()];
        parts[fam.root().0] = vec![1, 1];
        let next = apply_round(&fam, &s, &Question { parts }, 0).unwrap();
        assert_eq!(next.to_map(), BTreeMap::from([(fam.root(), 1), (eps, 1)]));
        let q = Question::constant(&s, 2, 1);
        let same = apply_round(&fam, &s, &q, 1).unwrap();
        assert_eq!(same.counts(), s.counts());
        assert_eq!(same.rounds_left(), 2);
        let bad = Question { parts: vec![vec![2, 1]; fam.len()] };
        assert!(apply_round(&fam, &s, &bad, 0).is_err());
    }

    #[test]
    fn disqualified_by_length() {
        let fam = forced_lie().family();
        let s = StateVector::init(&fam, 1, 1);
        let q = Question::constant(&s, 2, 0);
        let next = apply_round(&fam, &s, &q, 0).unwrap();
        assert_eq!(next.total(), 0);
        let next = apply_round(&fam, &s, &q, 1).unwrap();
        assert_eq!(next.survivors(&fam), 1);
    }

    #[test]
    fn terminal_examples() {
        let eps = Channel::from_pairs(2, &[&[]]).unwrap().family();
        let one = StateVector::init(&eps, 1, 0);
        let two = StateVector::init(&eps, 2, 0);
        let none = StateVector::init(&eps, 0, 0);
        assert!(paul_wins_terminal(&eps, &one, Variant::Original).unwrap());
        assert!(!paul_wins_terminal(&eps, &two, Variant::Original).unwrap());
        assert!(paul_wins_terminal(&eps, &two, Variant::Pathological).unwrap());
        assert!(paul_wins_terminal(&eps, &none, Variant::Original).unwrap());
        assert!(!paul_wins_terminal(&eps, &none, Variant::Pathological).unwrap());
        assert!(paul_wins_terminal(&eps, &StateVector::init(&eps, 1, 2), Variant::Original).is_err());
    }

    #[test]
    fn adaptive_examples() {
        let c = symmetric(2, 1);
        assert_eq!(solve_adaptive(&c, 2, 3, Variant::Original, &lim()).unwrap().winner, Winner::Paul);
        assert_eq!(solve_adaptive(&c, 3, 3, Variant::Original, &lim()).unwrap().winner, Winner::Carole);
        for n in 0..6 {
            let out = solve_adaptive(&forced_lie(), n, 3, Variant::Original, &lim()).unwrap();
            assert_eq!(out.winner, Winner::Paul);
        }
    }

    #[test]
    fn strategy_tree_replays() {
        let c = symmetric(2, 1);
        let fam = c.family();
        let out = solve_adaptive(&c, 2, 3, Variant::Original, &lim()).unwrap();
        let tree = out.strategy.unwrap();
        fn walk(fam: &SuffixFamily, s: &StateVector, node: &StrategyNode) {
            for b in 0..2u8 {
                let next = apply_round(fam, s, &node.question, b).unwrap();
                match &node.children[b as usize] {
                    Some(child) => walk(fam, &next, child),
                    None => assert!(paul_wins_terminal(fam, &next, Variant::Original).unwrap()),
                }
            }
        }
        walk(&fam, &StateVector::init(&fam, 2, 3), &tree);
        let json = serde_json::to_value(&tree).unwrap();
        assert!(json.get("question").is_some() && json.get("children").is_some());
        let small = Limits { tree_budget: 2, ..lim() };
        assert!(solve_adaptive(&c, 2, 3, Variant::Original, &small).unwrap().strategy.is_none());
    }

    #[test]
    fn two_batch_examples() {
        let c = symmetric(2, 1);
        let out = solve_two_batch(&c, 2, 2, 1, Variant::Original, &lim()).unwrap();
        let s = out.strategy.clone();
        if let Some(s) = s {
            assert!(s.verify(&c, Variant::Original, &lim()).unwrap().valid);
        }
        // Two-batch wins imply adaptive wins.
        for n in 0..5 {
            for q1 in 0..=3 {
                let tb = solve_two_batch(&c, n, q1, 3 - q1, Variant::Original, &lim()).unwrap();
                let ad = solve_adaptive(&c, n, 3, Variant::Original, &lim()).unwrap();
                if tb.winner == Winner::Paul {
                    assert_eq!(ad.winner, Winner::Paul);
                }
            }
        }
    }

    #[test]
    fn two_batch_strategies_verify() {
        for name in ["sym1", "z1", "unidir2"] {
            let c = by_name(name).unwrap();
            for v in [Variant::Original, Variant::Pathological] {
                for n in 1..5 {
                    let out = solve_two_batch(&c, n, 2, 2, v, &lim()).unwrap();
                    if let Some(s) = out.strategy {
                        assert_eq!(s.n(), n);
                        let verdict = s.verify(&c, v, &lim()).unwrap();
                        assert!(verdict.valid, "{name} {v} {n}: {verdict:?}");
                        let back = TwoBatchStrategy::from_json(&s.to_json()).unwrap();
                        assert_eq!(back, s);
                    }
                }
            }
        }
    }

    #[test]
    fn optimal_n_small() {
        let c = symmetric(2, 1);
        assert_eq!(optimal_n(&c, 3, Variant::Original, Play::Adaptive, &lim(), 100).unwrap(), Threshold::Exact(2));
        assert_eq!(optimal_n(&forced_lie(), 3, Variant::Original, Play::Adaptive, &lim(), 100).unwrap(), Threshold::Unbounded);
        assert_eq!(
            optimal_n(&forced_lie(), 3, Variant::Pathological, Play::Adaptive, &lim(), 20).unwrap(),
            Threshold::NoneUpTo(20)
        );
        let eps = Channel::from_pairs(2, &[&[]]).unwrap();
        assert_eq!(optimal_n(&eps, 3, Variant::Pathological, Play::Adaptive, &lim(), 100).unwrap(), Threshold::Exact(8));
    }

    #[test]
    fn degenerate_witnesses() {
        let w = degenerate_witness(&forced_lie(), Variant::Original).unwrap();
        assert_eq!((w.letter, w.winner), (1, Winner::Paul));
        let w = degenerate_witness(&forced_lie(), Variant::Pathological).unwrap();
        assert_eq!((w.letter, w.winner), (0, Winner::Carole));
        assert!(degenerate_witness(&symmetric(2, 1), Variant::Original).is_none());
    }

    #[test]
    fn response_volumes_symmetric() {
        // One-lie binary: an element with its lie unused survives 1 + r responses.
        let fam = symmetric(2, 1).family();
        let v = ResponseVolumes::new(&fam, 6);
        for r in 0..=6 {
            assert_eq!(v.min(fam.root(), r), 1 + r as u128);
            assert_eq!(v.max(fam.root(), r), 1 + r as u128);
        }
    }

    #[test]
    fn coarse_state() {
        let fam = unidirectional(2).family();
        let mut counts = vec![0; fam.len()];
        for c in fam.ids() {
            counts[c.0] = 1 + c.0 as u64;
        }
        let s = StateVector::from_counts(&fam, counts.clone(), 5).unwrap();
        let x = s.coarse(&fam).x;
        assert_eq!(x.iter().sum::<u64>(), counts.iter().sum::<u64>());
        assert_eq!(x[0], counts[0]);
    }
}
