//! Constructive two-batch strategies for Paul.
//!
//! The first batch identifies blocks of elements with balanced words. After
//! Carole's first answers, elements whose suffix channel has order `ρ >= 1`
//! are placed on centers of a shifted code packing of radius-`ρ` balls, and
//! elements left with `{ε}` fill the free cells one by one. In the
//! pathological game, responses far from balanced are handled by a block of
//! `t^q2` elements that all survive with a channel containing `ε`.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::bounds::{prefix_length, Comparison, Relation};
use crate::code::varshamov_code;
use crate::error::{Error, Result};
use crate::game::{Assignment, Block, SecondBatch, TwoBatchStrategy};
use crate::numeric::{rational_from_f64, Enclosure, Truth};
use crate::pack_cover::ShadowTable;
use crate::word::{
    all_words, ball_size, g_bound_enclosure, h_bound_enclosure, r_tolerance_enclosure, space_size, TolExponent,
};
use crate::{BalanceSpec, Channel, ClassId, LieString, Limits, Variant, Word};

/// `⌈x^(1/3)⌉`.
pub fn cube_root_ceil(x: usize) -> usize {
    (0..).find(|m: &usize| m * m * m >= x).expect("cube roots exist")
}

/// Free parameters of the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub q1: usize,
    pub q2: usize,
    pub m1: usize,
    pub m2: usize,
    pub eta1: f64,
    pub eta2: f64,
    /// Elements per balanced word that take part in the packing.
    pub alpha: u64,
    /// Extra elements per balanced word used only to complete coverings.
    pub alpha_prime: u64,
}

impl SynthParams {
    /// Sections `⌈q_i^(1/3)⌉`, tolerance exponents `η_i = k+1`, `α = 1`, `α' = 0`.
    pub fn with_defaults(q1: usize, q2: usize, k: usize) -> Self {
        SynthParams {
            q1,
            q2,
            m1: cube_root_ceil(q1).max(1),
            m2: cube_root_ceil(q2).max(1),
            eta1: (k + 1) as f64,
            eta2: (k + 1) as f64,
            alpha: 1,
            alpha_prime: 0,
        }
    }

    pub fn q(&self) -> usize {
        self.q1 + self.q2
    }

    fn exponent(&self, eta: f64) -> Result<TolExponent> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance exponent {eta} must be positive")));
        }
        Ok(TolExponent::LogScaled { eta: rational_from_f64(eta), q: self.q() as u64 })
    }

    /// `(M1, r1)`-balance on the first batch.
    pub fn balance1(&self, t: u8) -> Result<BalanceSpec> {
        BalanceSpec::from_exponent(self.q1, self.m1, t, self.exponent(self.eta1)?)
    }

    /// `(M2, r2)`-balance on the second batch.
    pub fn balance2(&self, t: u8) -> Result<BalanceSpec> {
        BalanceSpec::from_exponent(self.q2, self.m2, t, self.exponent(self.eta2)?)
    }

    fn validate(&self) -> Result<()> {
        if self.q1 == 0 || self.q2 == 0 {
            return Err(Error::InvalidArgument("both batches must be nonempty".into()));
        }
        if self.m1 == 0 || self.m1 > self.q1 || self.m2 == 0 || self.m2 > self.q2 {
            return Err(Error::InvalidArgument("section counts must lie in 1..=batch length".into()));
        }
        if self.alpha == 0 {
            return Err(Error::InvalidArgument("alpha must be positive".into()));
        }
        self.exponent(self.eta1)?;
        self.exponent(self.eta2)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Requirement {
    pub name: String,
    pub holds: bool,
}

/// Both sides of every sufficient condition, plus the capacities they buy.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub params: SynthParams,
    pub t: u8,
    pub k: usize,
    pub prefix_len: usize,
    pub r1: Enclosure,
    pub r2: Enclosure,
    pub cap1: usize,
    pub cap2: usize,
    pub balanced_first: u64,
    pub unbalanced_first: u64,
    /// Constructive code sizes for radii `1..=k`.
    pub code_sizes: Vec<usize>,
    pub requirements: Vec<Requirement>,
    pub packing: Vec<Comparison>,
    pub volume_original: Option<Comparison>,
    pub volume_pathological: Option<Comparison>,
    /// `α + α' >= t^q2`: every response is covered by one witness block.
    pub pathological_shortcut: bool,
    pub original: Truth,
    pub pathological: Truth,
    /// `α` times the number of balanced first-batch words.
    pub capacity_original: u64,
    /// `α (1 - q^-η1) t^q1`.
    pub capacity_original_bound: Enclosure,
    /// `(α+α')` per balanced word plus `t^q2` per unbalanced word.
    pub min_n_pathological: u64,
    /// `(α+α')(1 - q^-η1) t^q1 + t^q q^-η1`.
    pub min_n_pathological_bound: Enclosure,
}

impl ConditionReport {
    pub fn holds(&self, variant: Variant) -> bool {
        match variant {
            Variant::Original => self.original.is_true(),
            Variant::Pathological => self.pathological.is_true(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn pow_enclosure(t: u8, e: usize) -> Enclosure {
    Enclosure::from_biguint(&BigUint::from(t).pow(e as u32))
}

/// `q^-η`.
fn q_pow_neg(q: usize, eta: f64, prec: u32) -> Enclosure {
    let e = Enclosure::exact(-rational_from_f64(eta));
    Enclosure::from_int(q as i64).powf(&e, prec)
}

/// Evaluates the packing and volume conditions on rigorous enclosures.
pub fn check_conditions(channel: &Channel, params: &SynthParams, limits: &Limits) -> Result<ConditionReport> {
    params.validate()?;
    let t = channel.t();
    let k = channel.order();
    let stats = channel.stats();
    let ck = prefix_length(k);
    let q = params.q();
    let bal1 = params.balance1(t)?;
    let bal2 = params.balance2(t)?;
    let total1 = space_size(t, params.q1, limits.max_space)? as u64;
    let balanced_first = bal1.count_balanced().to_u64().expect("fits");
    let unbalanced_first = total1 - balanced_first;
    let space2 = BigUint::from(t).pow(params.q2 as u32);

    let exp1 = params.exponent(params.eta1)?;
    let exp2 = params.exponent(params.eta2)?;
    let r1 = |p: u32| r_tolerance_enclosure(params.q1, params.m1, t, &exp1, p);
    let r2 = |p: u32| r_tolerance_enclosure(params.q2, params.m2, t, &exp2, p);
    let g1 = |r: &Enclosure, j: usize| g_bound_enclosure(params.q1, params.m1, t, r, j, k);
    let g2 = |r: &Enclosure, j: usize| g_bound_enclosure(params.q2, params.m2, t, r, j, k);
    let h1 = |r: &Enclosure, j: usize| h_bound_enclosure(params.q1, params.m1, t, r, j, k);
    let h2 = |r: &Enclosure, j: usize| h_bound_enclosure(params.q2, params.m2, t, r, j, k);
    let alpha = Enclosure::from_int(params.alpha as i64);
    let alpha_p = Enclosure::from_int(params.alpha_prime as i64);
    let e = |i: usize| Enclosure::from_int(stats.e(i) as i64);

    let mut requirements = vec![Requirement { name: format!("q2 > c_k = {ck}"), holds: params.q2 > ck }];
    let mut packing = Vec::new();
    let mut code_sizes = Vec::new();
    if params.q2 > ck {
        for rho in 1..=k {
            let size = varshamov_code(t, params.q2 - ck, rho, limits)?.size();
            code_sizes.push(size);
            let i = k - rho;
            let b = Enclosure::from_biguint(&ball_size(params.q2, t, rho));
            packing.push(Comparison::evaluate(format!("packing radius {rho}"), Relation::Le, |p| {
                let r = r1(p);
                let lhs = (0..=i).fold(Enclosure::zero(), |acc, j| {
                    &acc + &(&Enclosure::from_int(stats.p(rho, j) as i64) * &g1(&r, j))
                });
                let unbal = &(&q_pow_neg(q, params.eta2, p) * &pow_enclosure(t, params.q2)) / &b;
                (&alpha * &lhs, &Enclosure::from_int(size as i64) - &unbal)
            }));
        }
    }
    let volume_original = Comparison::evaluate("volume (original)", Relation::Le, |p| {
        let (ra, rb) = (r1(p), r2(p));
        let mut sum = Enclosure::zero();
        for i in 0..=k {
            for j in 0..=i {
                sum = &sum + &(&e(i) * &(&g1(&ra, j) * &g2(&rb, i - j)));
            }
        }
        (&alpha * &sum, Enclosure::from_biguint(&space2))
    });
    let volume_pathological = Comparison::evaluate("volume (pathological)", Relation::Ge, |p| {
        let (ra, rb) = (r1(p), r2(p));
        let mut sum = Enclosure::zero();
        for i in 0..=k {
            for j in 0..=i {
                sum = &sum + &(&e(i) * &(&h1(&ra, j) * &h2(&rb, i - j)));
            }
        }
        let mut extra = Enclosure::zero();
        for j in 0..=k {
            extra = &extra + &(&Enclosure::from_int(stats.p(0, j) as i64) * &h1(&ra, j));
        }
        (&(&alpha * &sum) + &(&alpha_p * &extra), Enclosure::from_biguint(&space2))
    });

    let packing_ok = packing.iter().fold(Truth::from(params.q2 > ck), |acc, c| acc.and(c.satisfied));
    let original = packing_ok.and(volume_original.satisfied);
    let shortcut = BigUint::from(params.alpha + params.alpha_prime) >= space2;
    let nondegenerate = channel.is_nondegenerate(Variant::Pathological);
    let long_enough = params.q1 > (t as usize) * k.saturating_sub(1);
    requirements.push(Requirement { name: "nondegenerate (pathological)".into(), holds: nondegenerate });
    requirements.push(Requirement { name: "q1 >= t(k-1)+1".into(), holds: long_enough });
    requirements.push(Requirement { name: "alpha + alpha' >= t^q2".into(), holds: shortcut });
    let structural = Truth::from(nondegenerate && long_enough);
    let pathological = if shortcut {
        structural
    } else {
        structural.and(packing_ok).and(volume_pathological.satisfied)
    };

    let prec = crate::numeric::DEFAULT_PREC;
    let keep = &Enclosure::one() - &q_pow_neg(q, params.eta1, prec);
    let capacity_original_bound = &(&alpha * &keep) * &pow_enclosure(t, params.q1);
    let min_n_pathological_bound = &(&(&(&alpha + &alpha_p) * &keep) * &pow_enclosure(t, params.q1))
        + &(&pow_enclosure(t, q) * &q_pow_neg(q, params.eta1, prec));
    let space2_u64 = space2.to_u64().unwrap_or(u64::MAX);
    Ok(ConditionReport {
        params: params.clone(),
        t,
        k,
        prefix_len: ck,
        r1: bal1.r().clone(),
        r2: bal2.r().clone(),
        cap1: bal1.cap(),
        cap2: bal2.cap(),
        balanced_first,
        unbalanced_first,
        code_sizes,
        requirements,
        packing,
        volume_original: Some(volume_original),
        volume_pathological: Some(volume_pathological),
        pathological_shortcut: shortcut,
        original,
        pathological,
        capacity_original: params.alpha.saturating_mul(balanced_first),
        capacity_original_bound,
        min_n_pathological: (params.alpha + params.alpha_prime)
            .saturating_mul(balanced_first)
            .saturating_add(space2_u64.saturating_mul(unbalanced_first)),
        min_n_pathological_bound,
    })
}

/// Pairwise disjoint balls of radii `1..=k` in `T^q2`: a fixed prefix of
/// length `c_k` marks the radius, followed by a codeword of distance
/// `2ρ+1`.
#[derive(Debug, Clone, Serialize)]
pub struct DPacking {
    pub t: u8,
    pub q2: usize,
    pub k: usize,
    /// `centers[ρ-1]`, in codeword order.
    pub centers: Vec<Vec<Word>>,
    pub code_sizes: Vec<usize>,
    pub pruned: Vec<usize>,
}

/// Prefix lengths `k, k, k-1, ..., 2`; radius `ρ` owns segment `k - ρ`.
fn prefix_for(k: usize, rho: usize) -> Vec<u8> {
    let segs: Vec<usize> = (0..k).map(|s| if s == 0 { k } else { k + 1 - s }).collect();
    let own = k - rho;
    segs.iter()
        .enumerate()
        .flat_map(|(s, &len)| std::iter::repeat_n(u8::from(s == own), len))
        .collect()
}

/// Builds the shifted-prefix packing. With a balance, centers whose whole
/// ball is unbalanced (distance to balanced above `ρ`) are dropped.
pub fn build_d_packing(q2: usize, k: usize, t: u8, balance: Option<&BalanceSpec>, limits: &Limits) -> Result<DPacking> {
    let ck = prefix_length(k);
    if q2 <= ck {
        return Err(Error::InvalidArgument(format!("q2 = {q2} must exceed the prefix length {ck}")));
    }
    let mut centers = Vec::with_capacity(k);
    let mut code_sizes = Vec::with_capacity(k);
    let mut pruned = Vec::with_capacity(k);
    for rho in 1..=k {
        let code = varshamov_code(t, q2 - ck, rho, limits)?;
        code_sizes.push(code.size());
        let prefix = Word::new(prefix_for(k, rho));
        let mut kept = Vec::with_capacity(code.size());
        for cw in &code.words {
            let z = prefix.concat(cw);
            let keep = match balance {
                Some(b) => b.distance_to_balanced(&z)?.is_some_and(|d| d <= rho),
                None => true,
            };
            if keep {
                kept.push(z);
            }
        }
        pruned.push(code.size() - kept.len());
        centers.push(kept);
    }
    Ok(DPacking { t, q2, k, centers, code_sizes, pruned })
}

impl DPacking {
    pub fn centers(&self, rho: usize) -> &[Word] {
        &self.centers[rho - 1]
    }

    /// The first `demand[ρ-1]` centers of each radius.
    pub fn place(&self, demand: &[u64]) -> Result<Vec<&[Word]>> {
        demand
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let have = self.centers[i].len() as u64;
                if d > have {
                    Err(Error::ConditionsUnsatisfied(format!(
                        "radius {} needs {d} centers, code packing has {have}",
                        i + 1
                    )))
                } else {
                    Ok(&self.centers[i][..d as usize])
                }
            })
            .collect()
    }

    /// Marks every cell of every ball and reports whether any is hit twice.
    pub fn is_packing(&self, limits: &Limits) -> Result<bool> {
        let size = space_size(self.t, self.q2, limits.max_space)?;
        let mut seen = FixedBitSet::with_capacity(size);
        for (i, cs) in self.centers.iter().enumerate() {
            for z in cs {
                for cell in ball(z, i + 1, self.t) {
                    if seen.put(cell.index(self.t)) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Hamming ball of radius `rho` around `z`.
pub fn ball(z: &Word, rho: usize, t: u8) -> Vec<Word> {
    let mut out = vec![z.clone()];
    let mut frontier = vec![(z.clone(), 0usize)];
    for _ in 0..rho {
        let mut next = Vec::new();
        for (w, from) in &frontier {
            for pos in *from..w.len() {
                for c in 0..t {
                    if c != z.letters()[pos] && w.letters()[pos] == z.letters()[pos] {
                        let mut l = w.letters().to_vec();
                        l[pos] = c;
                        let nw = Word::new(l);
                        out.push(nw.clone());
                        next.push((nw, pos + 1));
                    }
                }
            }
        }
        frontier = next;
    }
    out
}

/// A lie string `u` and a partner word linked to `w` by `u`: original
/// `w →u partner` with all truths equal to a most frequent letter of `w`;
/// pathological `partner →u w` with all responses equal to it.
pub fn nondegen_witness(w: &Word, channel: &Channel, variant: Variant) -> Result<(LieString, Word)> {
    let t = channel.t();
    w.check_alphabet(t)?;
    if channel.contains_empty() {
        return Ok((LieString::empty(), w.clone()));
    }
    let k = channel.order();
    if w.len() < (t as usize) * (k - 1) + 1 {
        return Err(Error::InvalidArgument(format!(
            "word length {} is below t(k-1)+1 = {}",
            w.len(),
            (t as usize) * (k - 1) + 1
        )));
    }
    let mut freq = vec![0usize; t as usize];
    for &c in w.letters() {
        freq[c as usize] += 1;
    }
    // Most frequent letter that starts a constant string; on a
    // nondegenerate channel every letter does, so pigeonhole gives enough
    // occurrences.
    let c = (0..t)
        .filter(|&c| channel.has_constant_string(variant, c))
        .max_by_key(|&c| (freq[c as usize], std::cmp::Reverse(c)))
        .ok_or_else(|| Error::InvalidChannel(format!("channel is degenerate for the {variant} variant")))?;
    let u = channel
        .constant_strings(variant, c)
        .min_by_key(|s| s.len())
        .expect("letter chosen with a constant string")
        .clone();
    if u.len() > freq[c as usize] {
        return Err(Error::InvalidChannel(format!(
            "letter {c} occurs {} times in {w}, fewer than the {} lies of {u}",
            freq[c as usize],
            u.len()
        )));
    }
    let mut letters = w.letters().to_vec();
    let positions: Vec<usize> = (0..letters.len()).filter(|&i| letters[i] == c).collect();
    for (&pos, lie) in positions.iter().zip(u.lies()) {
        letters[pos] = match variant {
            Variant::Original => lie.response(),
            Variant::Pathological => lie.truth(),
        };
    }
    Ok((u, Word::new(letters)))
}

/// Survivor bookkeeping for one first-batch response.
struct Responder<'a> {
    family: &'a crate::SuffixFamily,
    table: ShadowTable<'a>,
    q2: usize,
    t: u8,
}

impl<'a> Responder<'a> {
    fn order(&self, c: ClassId) -> usize {
        self.family.order(c)
    }

    fn shadow(&self, c: ClassId, z: &Word) -> &FixedBitSet {
        self.table.shadow(c, z.index(self.t))
    }
}

/// Places survivors of order `>= 1` on the code packing and marks their
/// shadows. Returns the assignments and the occupied cells.
fn pack_positive(
    resp: &Responder,
    d: &DPacking,
    survivors: &[(u64, ClassId)],
    occupied: &mut FixedBitSet,
    assignments: &mut Vec<Assignment>,
) -> Result<()> {
    let mut next = vec![0usize; d.k];
    for &(e, c) in survivors {
        let rho = resp.order(c);
        if rho == 0 {
            continue;
        }
        let centers = d.centers(rho);
        let Some(z) = centers.get(next[rho - 1]) else {
            return Err(Error::ConditionsUnsatisfied(format!(
                "radius {rho} needs more than the {} available centers",
                centers.len()
            )));
        };
        next[rho - 1] += 1;
        occupied.union_with(resp.shadow(c, z));
        assignments.push(Assignment { element: e, word: z.clone() });
    }
    Ok(())
}

/// Puts `elements` one per free cell, in cell order, until either runs out.
/// Each element's shadow must contain its stem. Returns the unused elements.
fn fill_free(
    resp: &Responder,
    elements: impl IntoIterator<Item = (u64, ClassId)>,
    occupied: &mut FixedBitSet,
    assignments: &mut Vec<Assignment>,
) -> usize {
    let mut free = (0..occupied.len()).filter(|&i| !occupied.contains(i)).collect::<Vec<_>>().into_iter();
    let mut unused = 0;
    for (e, c) in elements {
        match free.next() {
            Some(cell) => {
                let z = Word::from_index(cell, resp.t, resp.q2);
                occupied.union_with(resp.shadow(c, &z));
                assignments.push(Assignment { element: e, word: z });
            }
            None => unused += 1,
        }
    }
    unused
}

fn require(report: &ConditionReport, variant: Variant) -> Result<()> {
    if report.holds(variant) {
        return Ok(());
    }
    let failed: Vec<String> = report
        .packing
        .iter()
        .chain(report.volume_original.iter().filter(|_| variant == Variant::Original))
        .chain(report.volume_pathological.iter().filter(|_| variant == Variant::Pathological))
        .filter(|c| c.satisfied != Truth::True)
        .map(|c| c.name.clone())
        .chain(report.requirements.iter().filter(|r| !r.holds).map(|r| r.name.clone()))
        .collect();
    Err(Error::ConditionsUnsatisfied(failed.join("; ")))
}

fn check_verified(strategy: &TwoBatchStrategy, channel: &Channel, variant: Variant, limits: &Limits) -> Result<()> {
    let verdict = strategy.verify(channel, variant, limits)?;
    if verdict.valid {
        Ok(())
    } else {
        Err(Error::Inconsistent(format!(
            "synthesized strategy fails at {}: {}",
            verdict.failure.map(|w| w.to_string()).unwrap_or_default(),
            verdict.reason.unwrap_or_default()
        )))
    }
}

/// Paul's original-variant strategy for `n` elements. Refuses unless the
/// conditions hold and `n` fits `α` elements per balanced word.
pub fn synth_original(channel: &Channel, n: u64, params: &SynthParams, limits: &Limits) -> Result<TwoBatchStrategy> {
    let report = check_conditions(channel, params, limits)?;
    require(&report, Variant::Original)?;
    if n > report.capacity_original {
        return Err(Error::ConditionsUnsatisfied(format!(
            "n = {n} exceeds capacity {}",
            report.capacity_original
        )));
    }
    let t = channel.t();
    let bal1 = params.balance1(t)?;
    let bal2 = params.balance2(t)?;
    let mut blocks = Vec::new();
    let mut next_id = 0u64;
    for word in bal1.balanced_words(limits.max_space)? {
        if next_id == n {
            break;
        }
        let take = params.alpha.min(n - next_id);
        blocks.push(Block { word, element_ids: (next_id..next_id + take).collect() });
        next_id += take;
    }
    let mut strategy = TwoBatchStrategy { t, q1: params.q1, q2: params.q2, blocks, second: Vec::new() };
    let family = channel.family();
    let d = build_d_packing(params.q2, channel.order(), t, Some(&bal2), limits)?;
    let resp = Responder { family: &family, table: ShadowTable::new(&family, params.q2, limits)?, q2: params.q2, t };
    let index = strategy.index()?;
    let mut second = Vec::new();
    for response in all_words(t, params.q1) {
        let survivors = strategy.survivors(&family, &index, &response);
        if survivors.is_empty() {
            continue;
        }
        let mut occupied = FixedBitSet::with_capacity(resp.table.size());
        let mut assignments = Vec::new();
        pack_positive(&resp, &d, &survivors, &mut occupied, &mut assignments)?;
        let singles = survivors.iter().filter(|&&(_, c)| resp.order(c) == 0).copied();
        if fill_free(&resp, singles, &mut occupied, &mut assignments) > 0 {
            return Err(Error::ConditionsUnsatisfied(format!("no room for singletons after response {response}")));
        }
        assignments.sort_by_key(|a| a.element);
        second.push(SecondBatch { response, assignments });
    }
    drop(index);
    strategy.second = second;
    check_verified(&strategy, channel, Variant::Original, limits)?;
    Ok(strategy)
}

/// Paul's pathological-variant strategy for `n` elements. Needs `n` at least
/// `α+α'` per balanced and `t^q2` per unbalanced first-batch word; extra
/// elements join the block of the all-zero word.
pub fn synth_pathological(channel: &Channel, n: u64, params: &SynthParams, limits: &Limits) -> Result<TwoBatchStrategy> {
    let report = check_conditions(channel, params, limits)?;
    require(&report, Variant::Pathological)?;
    if n < report.min_n_pathological {
        return Err(Error::ConditionsUnsatisfied(format!(
            "n = {n} is below the covering size {}",
            report.min_n_pathological
        )));
    }
    let t = channel.t();
    let k = channel.order();
    let bal1 = params.balance1(t)?;
    let bal2 = params.balance2(t)?;
    let space2 = space_size(t, params.q2, limits.max_space)? as u64;
    let per_balanced = params.alpha + params.alpha_prime;
    let mut blocks = Vec::new();
    let mut next_id = 0u64;
    for word in all_words(t, params.q1) {
        let size = if bal1.is_balanced(&word)? { per_balanced } else { space2 };
        let extra = if next_id == 0 { n - report.min_n_pathological } else { 0 };
        blocks.push(Block { word, element_ids: (next_id..next_id + size + extra).collect() });
        next_id += size + extra;
    }
    // Position of every element inside its block: the first α form the
    // packing part, the next α' the completion part.
    let mut rank: HashMap<u64, u64> = HashMap::new();
    let mut block_of: HashMap<Word, usize> = HashMap::new();
    for (bi, b) in blocks.iter().enumerate() {
        block_of.insert(b.word.clone(), bi);
        for (r, &e) in b.element_ids.iter().enumerate() {
            rank.insert(e, r as u64);
        }
    }
    let mut strategy = TwoBatchStrategy { t, q1: params.q1, q2: params.q2, blocks, second: Vec::new() };
    let family = channel.family();
    let shortcut = report.pathological_shortcut;
    let d = if shortcut { None } else { Some(build_d_packing(params.q2, k, t, Some(&bal2), limits)?) };
    let resp = Responder { family: &family, table: ShadowTable::new(&family, params.q2, limits)?, q2: params.q2, t };
    let index = strategy.index()?;
    let mut second = Vec::new();
    for response in all_words(t, params.q1) {
        let mut assignments = Vec::new();
        let near = bal1.distance_to_balanced(&response)?.is_some_and(|dist| dist <= k);
        if shortcut || !near {
            let (_, partner) = nondegen_witness(&response, channel, Variant::Pathological)?;
            let block = &strategy.blocks[block_of[&partner]];
            if (block.element_ids.len() as u64) < space2 {
                return Err(Error::Inconsistent(format!("witness block for {response} is too small")));
            }
            for (cell, &e) in block.element_ids.iter().take(space2 as usize).enumerate() {
                assignments.push(Assignment { element: e, word: Word::from_index(cell, t, params.q2) });
            }
        } else {
            let d = d.as_ref().expect("built when not in the shortcut case");
            let survivors = strategy.survivors(&family, &index, &response);
            let (alpha_part, rest): (Vec<_>, Vec<_>) =
                survivors.iter().partition(|(e, _)| rank[e] < params.alpha);
            let mut occupied = FixedBitSet::with_capacity(resp.table.size());
            pack_positive(&resp, d, &alpha_part, &mut occupied, &mut assignments)?;
            let singles_a = alpha_part.iter().filter(|&&(_, c)| resp.order(c) == 0).copied();
            let singles_b = rest
                .iter()
                .filter(|&&(e, c)| rank[&e] < per_balanced && resp.order(c) == 0)
                .copied();
            // Any other survivor whose channel contains ε also covers its stem.
            let others = rest
                .iter()
                .filter(|&&(e, c)| !(rank[&e] < per_balanced && resp.order(c) == 0) && family.contains_empty(c))
                .copied();
            fill_free(&resp, singles_a.chain(singles_b).chain(others), &mut occupied, &mut assignments);
            if occupied.count_ones(..) < occupied.len() {
                return Err(Error::ConditionsUnsatisfied(format!(
                    "response {response} leaves {} cells uncovered",
                    occupied.len() - occupied.count_ones(..)
                )));
            }
        }
        assignments.sort_by_key(|a| a.element);
        second.push(SecondBatch { response, assignments });
    }
    drop(index);
    strategy.second = second;
    check_verified(&strategy, channel, Variant::Pathological, limits)?;
    Ok(strategy)
}

/// One candidate in a parameter sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepHit {
    pub params: SynthParams,
    pub original: bool,
    pub pathological: bool,
    pub capacity_original: u64,
    pub min_n_pathological: u64,
}

/// Parameter values tried by [`sweep`].
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub q_max: usize,
    pub sections: Vec<usize>,
    pub etas: Vec<f64>,
    pub alphas: Vec<u64>,
    pub alpha_primes: Vec<u64>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            q_max: 14,
            sections: vec![1, 2],
            etas: vec![0.25, 1.0, 2.0],
            alphas: vec![1, 2, 4],
            alpha_primes: vec![0, 2],
        }
    }
}

/// Every grid point whose conditions hold for at least one variant.
pub fn sweep(channel: &Channel, grid: &SweepGrid, limits: &Limits) -> Result<Vec<SweepHit>> {
    let mut hits = Vec::new();
    let ck = prefix_length(channel.order());
    for q in 2..=grid.q_max {
        for q2 in ck + 1..q {
            let q1 = q - q2;
            for &m1 in grid.sections.iter().filter(|&&m| m <= q1) {
                for &m2 in grid.sections.iter().filter(|&&m| m <= q2) {
                    for &eta1 in &grid.etas {
                        for &eta2 in &grid.etas {
                            for &alpha in &grid.alphas {
                                for &alpha_prime in &grid.alpha_primes {
                                    let params = SynthParams { q1, q2, m1, m2, eta1, eta2, alpha, alpha_prime };
                                    let r = check_conditions(channel, &params, limits)?;
                                    let (o, p) = (r.original.is_true(), r.pathological.is_true());
                                    if o || p {
                                        hits.push(SweepHit {
                                            params,
                                            original: o,
                                            pathological: p,
                                            capacity_original: r.capacity_original,
                                            min_n_pathological: r.min_n_pathological,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(hits)
}
