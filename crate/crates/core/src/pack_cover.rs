//! Packings and coverings of `T^Q` by suffix-channel shadows.
//!
//! A one-batch game from state `(x_C')` is won by Paul in the original
//! variant iff `T^Q` admits a packing with `x_C'` shadows of each class, and
//! in the pathological variant iff it admits such a covering. The search here
//! decides existence exactly; [`check_placement`] verifies a given placement
//! by counting cell multiplicities.

use std::cell::OnceCell;
use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::channel::{ClassId, SuffixFamily};
use crate::error::{Error, Result};
use crate::word::{shadow, space_size, Word};
use crate::{Limits, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Packing,
    Covering,
}

impl Mode {
    pub fn for_variant(variant: Variant) -> Mode {
        match variant {
            Variant::Original => Mode::Packing,
            Variant::Pathological => Mode::Covering,
        }
    }
}

/// Demand `x_C'` of shadows per class on `T^len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementProblem {
    pub len: usize,
    pub demand: Vec<u64>,
    pub mode: Mode,
}

impl PlacementProblem {
    pub fn new(family: &SuffixFamily, len: usize, demand: Vec<u64>, mode: Mode) -> Result<Self> {
        if demand.len() != family.len() {
            return Err(Error::Inconsistent(format!(
                "demand has {} entries, family has {} classes",
                demand.len(),
                family.len()
            )));
        }
        Ok(PlacementProblem { len, demand, mode })
    }

    /// `n` shadows of the root channel.
    pub fn root(family: &SuffixFamily, len: usize, n: u64, mode: Mode) -> Self {
        let mut demand = vec![0; family.len()];
        demand[family.root().0] = n;
        PlacementProblem { len, demand, mode }
    }

    pub fn total(&self) -> u64 {
        self.demand.iter().sum()
    }
}

/// One shadow `B(stem, class)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Stem {
    pub stem: Word,
    pub channel: ClassId,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Placement {
    pub stems: Vec<Stem>,
}

impl Placement {
    pub fn len(&self) -> usize {
        self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }

    /// Number of stems per class.
    pub fn class_counts(&self, classes: usize) -> Vec<u64> {
        let mut counts = vec![0; classes];
        for s in &self.stems {
            counts[s.channel.0] += 1;
        }
        counts
    }
}

/// Shadows of every stem of `T^len`, computed per class on first use.
pub struct ShadowTable<'a> {
    family: &'a SuffixFamily,
    len: usize,
    size: usize,
    per_class: Vec<OnceCell<Vec<FixedBitSet>>>,
}

impl<'a> ShadowTable<'a> {
    pub fn new(family: &'a SuffixFamily, len: usize, limits: &Limits) -> Result<Self> {
        let size = space_size(family.t(), len, limits.max_space)?;
        Ok(ShadowTable {
            family,
            len,
            size,
            per_class: (0..family.len()).map(|_| OnceCell::new()).collect(),
        })
    }

    pub fn family(&self) -> &SuffixFamily {
        self.family
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// `t^len`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn class_shadows(&self, class: ClassId) -> &[FixedBitSet] {
        self.per_class[class.0].get_or_init(|| {
            let t = self.family.t();
            let channel = self.family.class(class);
            (0..self.size)
                .map(|i| {
                    let mut bits = FixedBitSet::with_capacity(self.size);
                    for w in shadow(&Word::from_index(i, t, self.len), channel) {
                        bits.insert(w.index(t));
                    }
                    bits
                })
                .collect()
        })
    }

    pub fn shadow(&self, class: ClassId, stem: usize) -> &FixedBitSet {
        &self.class_shadows(class)[stem]
    }
}

/// Outcome of checking a placement cell by cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlacementCheck {
    pub valid: bool,
    /// A cell hit twice (packing) or never (covering), when invalid.
    pub witness: Option<Word>,
    pub reason: Option<String>,
}

impl PlacementCheck {
    fn ok() -> Self {
        PlacementCheck { valid: true, witness: None, reason: None }
    }

    fn fail(witness: Option<Word>, reason: String) -> Self {
        PlacementCheck { valid: false, witness, reason: Some(reason) }
    }
}

/// Multiplicity of every cell of `T^len` under the given shadows.
pub fn cell_counts(table: &ShadowTable, stems: &[Stem]) -> Result<Vec<u32>> {
    let t = table.family().t();
    let mut counts = vec![0u32; table.size()];
    for s in stems {
        if s.stem.len() != table.len() {
            return Err(Error::InvalidWord(format!(
                "stem {} has length {}, expected {}",
                s.stem,
                s.stem.len(),
                table.len()
            )));
        }
        s.stem.check_alphabet(t)?;
        if s.channel.0 >= table.family().len() {
            return Err(Error::Inconsistent(format!("unknown class {}", s.channel)));
        }
        for cell in table.shadow(s.channel, s.stem.index(t)).ones() {
            counts[cell] += 1;
        }
    }
    Ok(counts)
}

/// Checks that the stems form a packing (exact class counts) or a covering
/// (at most the demanded count per class).
pub fn check_placement(table: &ShadowTable, problem: &PlacementProblem, placement: &Placement) -> Result<PlacementCheck> {
    let t = table.family().t();
    let used = placement.class_counts(table.family().len());
    for (c, (&u, &d)) in used.iter().zip(&problem.demand).enumerate() {
        let bad = match problem.mode {
            Mode::Packing => u != d,
            Mode::Covering => u > d,
        };
        if bad {
            return Ok(PlacementCheck::fail(
                None,
                format!("class {c} used {u} times, demand {d}"),
            ));
        }
    }
    let counts = cell_counts(table, &placement.stems)?;
    let witness = match problem.mode {
        Mode::Packing => counts.iter().position(|&c| c > 1),
        Mode::Covering => counts.iter().position(|&c| c == 0),
    };
    Ok(match witness {
        None => PlacementCheck::ok(),
        Some(i) => {
            let w = Word::from_index(i, t, table.len());
            let reason = match problem.mode {
                Mode::Packing => format!("cell {w} lies in {} shadows", counts[i]),
                Mode::Covering => format!("cell {w} is uncovered"),
            };
            PlacementCheck::fail(Some(w), reason)
        }
    })
}

pub fn verify_placement(family: &SuffixFamily, problem: &PlacementProblem, placement: &Placement, limits: &Limits) -> Result<bool> {
    let table = ShadowTable::new(family, problem.len, limits)?;
    Ok(check_placement(&table, problem, placement)?.valid)
}

/// Exact existence search. `Ok(None)` means the search space was exhausted.
pub fn find_placement(family: &SuffixFamily, problem: &PlacementProblem, limits: &Limits) -> Result<Option<Placement>> {
    let table = ShadowTable::new(family, problem.len, limits)?;
    find_placement_in(&table, problem, limits)
}

pub fn find_placement_in(table: &ShadowTable, problem: &PlacementProblem, limits: &Limits) -> Result<Option<Placement>> {
    if problem.demand.len() != table.family().len() {
        return Err(Error::Inconsistent("demand does not match the family".into()));
    }
    match problem.mode {
        Mode::Packing => Packer::new(table, problem, limits).run(),
        Mode::Covering => Coverer::new(table, problem, limits).run(),
    }
}

/// Stems of one class whose shadows are pairwise distinct, first occurrence kept.
fn distinct_stems(shadows: &[FixedBitSet]) -> Vec<usize> {
    let mut seen: HashMap<&FixedBitSet, ()> = HashMap::new();
    (0..shadows.len())
        .filter(|&s| seen.insert(&shadows[s], ()).is_none())
        .collect()
}

struct Packer<'t, 'a> {
    table: &'t ShadowTable<'a>,
    problem: &'t PlacementProblem,
    limits: &'t Limits,
    /// Classes still to place, one entry per element, largest shadows first.
    items: Vec<ClassId>,
    candidates: HashMap<ClassId, Vec<usize>>,
    min_size: HashMap<ClassId, usize>,
    /// Admissible stems for the very first item (orbit representatives).
    first_allowed: Option<FixedBitSet>,
    fixed: Vec<Stem>,
    nodes: u128,
}

impl<'t, 'a> Packer<'t, 'a> {
    fn new(table: &'t ShadowTable<'a>, problem: &'t PlacementProblem, limits: &'t Limits) -> Self {
        let family = table.family();
        let t = family.t();
        let mut fixed = Vec::new();
        let mut classes = Vec::new();
        let mut candidates = HashMap::new();
        let mut min_size = HashMap::new();
        for c in family.ids() {
            let d = problem.demand[c.0];
            if d == 0 {
                continue;
            }
            let shadows = table.class_shadows(c);
            // Elements with an empty shadow never collide; park them there.
            if let Some(s) = shadows.iter().position(|b| b.is_clear()) {
                for _ in 0..d {
                    fixed.push(Stem { stem: Word::from_index(s, t, table.len()), channel: c });
                }
                continue;
            }
            let cands = distinct_stems(shadows);
            let smallest = shadows.iter().map(|b| b.count_ones(..)).min().unwrap_or(0);
            candidates.insert(c, cands);
            min_size.insert(c, smallest);
            classes.push(c);
        }
        classes.sort_by(|a, b| min_size[b].cmp(&min_size[a]).then(a.cmp(b)));
        let items: Vec<ClassId> = classes
            .iter()
            .flat_map(|&c| std::iter::repeat(c).take(problem.demand[c.0] as usize))
            .collect();
        let first_allowed = items.first().map(|_| {
            let demanded: Vec<ClassId> = family.ids().filter(|c| problem.demand[c.0] > 0).collect();
            orbit_representatives(family, &demanded, table.len(), table.size())
        });
        Packer {
            table,
            problem,
            limits,
            items,
            candidates,
            min_size,
            first_allowed,
            fixed,
            nodes: 0,
        }
    }

    fn run(mut self) -> Result<Option<Placement>> {
        let size = self.table.size();
        let volume: usize = self.items.iter().map(|c| self.min_size[c]).sum();
        if volume > size {
            return Ok(None);
        }
        let mut chosen = Vec::with_capacity(self.items.len());
        let occupied = FixedBitSet::with_capacity(size);
        if !self.dfs(0, &occupied, &mut chosen)? {
            return Ok(None);
        }
        let t = self.table.family().t();
        let mut stems = std::mem::take(&mut self.fixed);
        stems.extend(
            self.items
                .iter()
                .zip(&chosen)
                .map(|(&c, &s)| Stem { stem: Word::from_index(s, t, self.table.len()), channel: c }),
        );
        debug_assert!(self.problem.total() as usize == stems.len());
        Ok(Some(Placement { stems }))
    }

    fn dfs(&mut self, idx: usize, occupied: &FixedBitSet, chosen: &mut Vec<usize>) -> Result<bool> {
        if idx == self.items.len() {
            return Ok(true);
        }
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(Error::cap("packing search nodes", self.nodes, self.limits.max_nodes));
        }
        let free = self.table.size() - occupied.count_ones(..);
        let needed: usize = self.items[idx..].iter().map(|c| self.min_size[c]).sum();
        if needed > free {
            return Ok(false);
        }
        let class = self.items[idx];
        let lower = if idx > 0 && self.items[idx - 1] == class {
            chosen[idx - 1] + 1
        } else {
            0
        };
        let remaining_same = self.items[idx..].iter().take_while(|&&c| c == class).count();
        let shadows = self.table.class_shadows(class);
        let cands: Vec<usize> = self.candidates[&class]
            .iter()
            .copied()
            .filter(|&s| s >= lower && shadows[s].is_disjoint(occupied))
            .filter(|&s| idx > 0 || self.first_allowed.as_ref().is_none_or(|a| a.contains(s)))
            .collect();
        if cands.len() < remaining_same {
            return Ok(false);
        }
        for s in cands {
            let mut next = occupied.clone();
            next.union_with(&shadows[s]);
            chosen.push(s);
            if self.dfs(idx + 1, &next, chosen)? {
                return Ok(true);
            }
            chosen.pop();
        }
        Ok(false)
    }
}

/// Stems that are lexicographically least in their orbit under letter
/// permutations fixing every demanded class.
fn orbit_representatives(family: &SuffixFamily, classes: &[ClassId], len: usize, size: usize) -> FixedBitSet {
    let t = family.t();
    let perms = family.stabilizer(classes);
    let mut reps = FixedBitSet::with_capacity(size);
    for i in 0..size {
        let w = Word::from_index(i, t, len);
        if perms.iter().all(|p| w.permuted(p).index(t) >= i) {
            reps.insert(i);
        }
    }
    reps
}

struct Coverer<'t, 'a> {
    table: &'t ShadowTable<'a>,
    problem: &'t PlacementProblem,
    limits: &'t Limits,
    classes: Vec<ClassId>,
    max_size: Vec<usize>,
    /// `containing[i][cell]`: distinct-shadow stems of `classes[i]` covering `cell`.
    containing: Vec<Vec<Vec<usize>>>,
    nodes: u128,
}

impl<'t, 'a> Coverer<'t, 'a> {
    fn new(table: &'t ShadowTable<'a>, problem: &'t PlacementProblem, limits: &'t Limits) -> Self {
        let family = table.family();
        let mut classes = Vec::new();
        let mut max_size = Vec::new();
        let mut containing = Vec::new();
        for c in family.ids() {
            if problem.demand[c.0] == 0 {
                continue;
            }
            let shadows = table.class_shadows(c);
            let biggest = shadows.iter().map(|b| b.count_ones(..)).max().unwrap_or(0);
            if biggest == 0 {
                continue;
            }
            let mut inv = vec![Vec::new(); table.size()];
            for s in distinct_stems(shadows) {
                for cell in shadows[s].ones() {
                    inv[cell].push(s);
                }
            }
            classes.push(c);
            max_size.push(biggest);
            containing.push(inv);
        }
        Coverer { table, problem, limits, classes, max_size, containing, nodes: 0 }
    }

    fn run(mut self) -> Result<Option<Placement>> {
        let size = self.table.size();
        let mut caps: Vec<u64> = self.classes.iter().map(|c| self.problem.demand[c.0]).collect();
        let mut chosen = Vec::new();
        let covered = FixedBitSet::with_capacity(size);
        if !self.dfs(&covered, &mut caps, &mut chosen)? {
            return Ok(None);
        }
        let family = self.table.family();
        let t = family.t();
        let mut stems: Vec<Stem> = chosen
            .iter()
            .map(|&(i, s)| Stem { stem: Word::from_index(s, t, self.table.len()), channel: self.classes[i] })
            .collect();
        // Surplus elements change nothing in a covering; park them at the zero word.
        let mut used = vec![0u64; family.len()];
        for s in &stems {
            used[s.channel.0] += 1;
        }
        for c in family.ids() {
            for _ in used[c.0]..self.problem.demand[c.0] {
                stems.push(Stem { stem: Word::zeros(self.table.len()), channel: c });
            }
        }
        Ok(Some(Placement { stems }))
    }

    fn dfs(&mut self, covered: &FixedBitSet, caps: &mut [u64], chosen: &mut Vec<(usize, usize)>) -> Result<bool> {
        let Some(cell) = covered.zeroes().next() else {
            return Ok(true);
        };
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(Error::cap("covering search nodes", self.nodes, self.limits.max_nodes));
        }
        let uncovered = self.table.size() - covered.count_ones(..);
        let reach: u64 = caps
            .iter()
            .zip(&self.max_size)
            .map(|(&c, &m)| c.saturating_mul(m as u64))
            .sum();
        if reach < uncovered as u64 {
            return Ok(false);
        }
        let mut options: Vec<(usize, usize, usize)> = Vec::new();
        for (i, &class) in self.classes.iter().enumerate() {
            if caps[i] == 0 {
                continue;
            }
            for &s in &self.containing[i][cell] {
                let gain = self.table.shadow(class, s).difference(covered).count();
                options.push((gain, i, s));
            }
        }
        options.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for (_, i, s) in options {
            let mut next = covered.clone();
            next.union_with(self.table.shadow(self.classes[i], s));
            caps[i] -= 1;
            chosen.push((i, s));
            if self.dfs(&next, caps, chosen)? {
                return Ok(true);
            }
            chosen.pop();
            caps[i] += 1;
        }
        Ok(false)
    }
}

/// A non-adaptive strategy: each element (with its current class) is
/// assigned a word; round `i` asks which letter sits at position `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneBatchStrategy {
    pub t: u8,
    pub len: usize,
    pub elements: Vec<Stem>,
}

impl OneBatchStrategy {
    /// Round `i`'s parts `A_0..A_{t-1}` as element ids.
    pub fn questions(&self) -> Vec<Vec<Vec<usize>>> {
        (0..self.len)
            .map(|i| {
                let mut parts = vec![Vec::new(); self.t as usize];
                for (id, e) in self.elements.iter().enumerate() {
                    parts[e.stem.letters()[i] as usize].push(id);
                }
                parts
            })
            .collect()
    }

    /// Elements still alive after Carole answers `response`.
    pub fn survivors(&self, family: &SuffixFamily, response: &Word) -> Vec<usize> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                family
                    .read(e.channel, e.stem.letters(), response.letters())
                    .is_some_and(|c| family.contains_empty(c))
            })
            .map(|(id, _)| id)
            .collect()
    }
}

pub fn strategy_from_placement(family: &SuffixFamily, len: usize, placement: &Placement) -> Result<OneBatchStrategy> {
    for s in &placement.stems {
        if s.stem.len() != len {
            return Err(Error::Inconsistent(format!("stem {} has length {}, expected {len}", s.stem, s.stem.len())));
        }
        s.stem.check_alphabet(family.t())?;
        if s.channel.0 >= family.len() {
            return Err(Error::Inconsistent(format!("unknown class {}", s.channel)));
        }
    }
    Ok(OneBatchStrategy { t: family.t(), len, elements: placement.stems.clone() })
}

pub fn placement_from_strategy(strategy: &OneBatchStrategy) -> Placement {
    Placement { stems: strategy.elements.clone() }
}
