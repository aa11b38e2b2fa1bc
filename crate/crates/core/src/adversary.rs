//! Carole's side: response sets of elements under a fixed two-batch
//! strategy, search for responses that break a strategy, and the volume
//! thresholds beyond which Carole wins.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::Serialize;

use crate::bounds::{theorem2_thresholds, BoundConstants, BoundReport, GameShape};
use crate::error::{Error, Result};
use crate::game::TwoBatchStrategy;
use crate::numeric::{rational_from_f64, Enclosure};
use crate::pack_cover::{cell_counts, ShadowTable};
use crate::synth::SynthParams;
use crate::word::{
    all_words, g_bound_enclosure, h_bound_enclosure, lie_string_to, r_tolerance_enclosure, shadow, space_size,
    TolExponent,
};
use crate::{Channel, Limits, Variant, Word};

/// Every full response string under which `element` survives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResponseSet {
    pub element: u64,
    pub words: BTreeSet<Word>,
}

/// A full response string and the elements alive after it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BreakWitness {
    pub response: Word,
    pub survivors: Vec<u64>,
}

fn second_word(strategy: &TwoBatchStrategy, response: &Word, element: u64) -> Word {
    strategy
        .second
        .iter()
        .find(|s| &s.response == response)
        .and_then(|s| s.assignments.iter().find(|a| a.element == element))
        .map(|a| a.word.clone())
        .unwrap_or_else(|| Word::zeros(strategy.q2))
}

fn first_word(strategy: &TwoBatchStrategy, element: u64) -> Result<&Word> {
    strategy
        .blocks
        .iter()
        .find(|b| b.element_ids.contains(&element))
        .map(|b| &b.word)
        .ok_or_else(|| Error::InvalidArgument(format!("element {element} is not in the strategy")))
}

/// Whether `element` survives the full response `response` (first and
/// second batch concatenated), by checking its lie string against the
/// channel directly.
pub fn survives(strategy: &TwoBatchStrategy, channel: &Channel, element: u64, response: &Word) -> Result<bool> {
    if response.len() != strategy.q1 + strategy.q2 {
        return Err(Error::InvalidWord(format!("response {response} has the wrong length")));
    }
    let w = first_word(strategy, element)?;
    let (r1, _) = response.split_at(strategy.q1);
    let truth = w.concat(&second_word(strategy, &r1, element));
    Ok(channel.contains(&lie_string_to(&truth, response)))
}

/// The response set of `element`, composed from first-batch lie strings
/// and second-batch shadows.
pub fn response_set(strategy: &TwoBatchStrategy, channel: &Channel, element: u64, limits: &Limits) -> Result<ResponseSet> {
    space_size(strategy.t, strategy.q1 + strategy.q2, limits.max_space)?;
    let family = channel.family();
    let w = first_word(strategy, element)?;
    let mut words = BTreeSet::new();
    for r1 in all_words(strategy.t, strategy.q1) {
        let Some(c) = family.read(family.root(), w.letters(), r1.letters()) else {
            continue;
        };
        let z = second_word(strategy, &r1, element);
        for r2 in shadow(&z, family.class(c)) {
            words.insert(r1.concat(&r2));
        }
    }
    Ok(ResponseSet { element, words })
}

fn find_break(strategy: &TwoBatchStrategy, channel: &Channel, variant: Variant, limits: &Limits) -> Result<Option<BreakWitness>> {
    if channel.t() != strategy.t {
        return Err(Error::AlphabetMismatch { expected: channel.t(), found: strategy.t });
    }
    space_size(strategy.t, strategy.q1, limits.max_space)?;
    let family = channel.family();
    let index = strategy.index()?;
    let table = ShadowTable::new(&family, strategy.q2, limits)?;
    for r1 in all_words(strategy.t, strategy.q1) {
        let placement = strategy.induced_placement(&family, &index, &r1);
        let counts = cell_counts(&table, &placement.stems)?;
        let bad = match variant {
            Variant::Original => counts.iter().position(|&c| c > 1),
            Variant::Pathological => counts.iter().position(|&c| c == 0),
        };
        if let Some(cell) = bad {
            let survivors: Vec<u64> = strategy
                .survivors(&family, &index, &r1)
                .iter()
                .zip(&placement.stems)
                .filter(|(_, stem)| table.shadow(stem.channel, stem.stem.index(strategy.t)).contains(cell))
                .map(|((e, _), _)| *e)
                .collect();
            let response = r1.concat(&Word::from_index(cell, strategy.t, strategy.q2));
            return Ok(Some(BreakWitness { response, survivors }));
        }
    }
    Ok(None)
}

/// A response under which two or more elements survive, if any.
pub fn carole_break_original(strategy: &TwoBatchStrategy, channel: &Channel, limits: &Limits) -> Result<Option<BreakWitness>> {
    find_break(strategy, channel, Variant::Original, limits)
}

/// A response under which no element survives, if any.
pub fn carole_break_pathological(strategy: &TwoBatchStrategy, channel: &Channel, limits: &Limits) -> Result<Option<BreakWitness>> {
    find_break(strategy, channel, Variant::Pathological, limits)
}

/// Balance on the whole game used by the pathological threshold.
#[derive(Debug, Clone, Serialize)]
pub struct WholeGameBalance {
    pub m: usize,
    pub eta: f64,
}

/// Carole's two volume thresholds, and the first-order forms when
/// constants are supplied.
pub fn carole_threshold_report(
    channel: &Channel,
    params: &SynthParams,
    whole: &WholeGameBalance,
    constants: Option<&BoundConstants>,
    prec: u32,
) -> Result<BoundReport> {
    let t = channel.t();
    let k = channel.order();
    let stats = channel.stats();
    let q = params.q();
    if whole.m == 0 || whole.m > q {
        return Err(Error::InvalidArgument("section count must lie in 1..=q".into()));
    }
    for eta in [params.eta1, params.eta2, whole.eta] {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance exponent {eta} must be positive")));
        }
    }
    let exponent = |eta: f64| TolExponent::LogScaled { eta: rational_from_f64(eta), q: q as u64 };
    let r1 = r_tolerance_enclosure(params.q1, params.m1, t, &exponent(params.eta1), prec);
    let r2 = r_tolerance_enclosure(params.q2, params.m2, t, &exponent(params.eta2), prec);
    let r = r_tolerance_enclosure(q, whole.m, t, &exponent(whole.eta), prec);
    let space = Enclosure::from_biguint(&BigUint::from(t).pow(q as u32));
    let qe = Enclosure::from_int(q as i64);
    let q_neg = |eta: f64| qe.powf(&Enclosure::exact(-rational_from_f64(eta)), prec);

    let mut report = BoundReport::new("carole_thresholds");
    report.input("q1", params.q1);
    report.input("q2", params.q2);
    report.input("M1", params.m1);
    report.input("M2", params.m2);
    report.input("M", whole.m);
    report.input("eta1", params.eta1);
    report.input("eta2", params.eta2);
    report.input("eta", whole.eta);
    report.input("t", t);
    report.input("k", k);

    let e_k = Enclosure::from_int(stats.e(k) as i64);
    let h_sum = &h_bound_enclosure(params.q1, params.m1, t, &r1, k, k) + &h_bound_enclosure(params.q2, params.m2, t, &r2, k, k);
    let denom = &e_k * &h_sum;
    let atypical = &(&q_neg(params.eta1) + &q_neg(params.eta2)) * &space;
    report.values.insert("atypical_response_strings".into(), atypical.clone());
    if denom.lo() > &num_rational::BigRational::from_integer(0.into()) {
        let typical = &space / &denom;
        report.values.insert("carole_original_min_n_exclusive".into(), &typical + &atypical);
    } else {
        report.notes.push("H terms vanish at these parameters; the original-variant threshold is unbounded".into());
    }

    let mut sum = Enclosure::zero();
    for i in 0..=k {
        sum = &sum + &(&Enclosure::from_int(stats.e(i) as i64) * &g_bound_enclosure(q, whole.m, t, &r, i, 1));
    }
    let path = &(&space * &(&Enclosure::one() - &q_neg(whole.eta))) / &sum;
    report.values.insert("carole_pathological_max_n_exclusive".into(), path);

    if !channel.is_nondegenerate(Variant::Original) {
        report.notes.push("channel is degenerate for the original variant; the original threshold does not apply".into());
    }
    let need = (t as usize) * k.saturating_sub(1) + 1;
    if params.q1 < need || params.q2 < need {
        report.notes.push(format!("both batches need length at least t(k-1)+1 = {need}"));
    }
    if let Some(c) = constants {
        let shape = GameShape { q1: params.q1, q2: params.q2, t, k, e_k: stats.e(k) };
        let closed = theorem2_thresholds(&shape, c, prec)?;
        for (name, v) in closed.values {
            report.values.insert(format!("first_order_{name}"), v);
        }
        report.comparisons.extend(closed.comparisons);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::presets::*;
    use crate::game::{Assignment, Block, SecondBatch};
    use crate::numeric::DEFAULT_PREC;
    use crate::synth::{synth_original, synth_pathological};

    fn lim() -> Limits {
        Limits::default()
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn one_block(words: &[&str], q2: usize) -> TwoBatchStrategy {
        TwoBatchStrategy {
            t: 2,
            q1: words[0].len(),
            q2,
            blocks: words
                .iter()
                .enumerate()
                .map(|(i, s)| Block { word: w(s), element_ids: vec![i as u64] })
                .collect(),
            second: Vec::new(),
        }
    }

    #[test]
    fn one_batch_response_set_is_shadow() {
        let c = symmetric(2, 1);
        let s = one_block(&["010"], 0);
        let rs = response_set(&s, &c, 0, &lim()).unwrap();
        assert_eq!(rs.words, shadow(&w("010"), &c));
    }

    #[test]
    fn error_free_response_set_is_singleton() {
        let c = Channel::from_pairs(2, &[&[]]).unwrap();
        let mut s = one_block(&["01"], 2);
        s.second.push(SecondBatch { response: w("01"), assignments: vec![Assignment { element: 0, word: w("11") }] });
        let rs = response_set(&s, &c, 0, &lim()).unwrap();
        assert_eq!(rs.words, BTreeSet::from([w("0111")]));
    }

    #[test]
    fn membership_matches_simulation() {
        let c = symmetric(2, 1);
        let mut s = one_block(&["01", "10", "11"], 2);
        s.second.push(SecondBatch { response: w("01"), assignments: vec![Assignment { element: 1, word: w("10") }] });
        for e in 0..3 {
            let rs = response_set(&s, &c, e, &lim()).unwrap();
            for full in all_words(2, 4) {
                assert_eq!(rs.words.contains(&full), survives(&s, &c, e, &full).unwrap());
            }
        }
    }

    #[test]
    fn duplicate_words_overlap() {
        let c = symmetric(2, 1);
        let s = one_block(&["011", "011"], 0);
        let b = carole_break_original(&s, &c, &lim()).unwrap().unwrap();
        assert_eq!(b.survivors, vec![0, 1]);
        let s = one_block(&["000", "011", "101"], 0);
        assert!(carole_break_original(&s, &c, &lim()).unwrap().is_some());
        let s = one_block(&["000", "111"], 0);
        assert!(carole_break_original(&s, &c, &lim()).unwrap().is_none());
    }

    #[test]
    fn degenerate_constant_answer() {
        let c = forced_lie();
        let s = one_block(&["000", "111", "010"], 0);
        let b = carole_break_pathological(&s, &c, &lim()).unwrap().unwrap();
        assert!(b.survivors.is_empty());
        let empty = TwoBatchStrategy { t: 2, q1: 2, q2: 1, blocks: Vec::new(), second: Vec::new() };
        assert!(carole_break_pathological(&empty, &c, &lim()).unwrap().is_some());
        // No lie of the channel answers 0, so answering all zeros kills everyone.
        for e in 0..3 {
            assert!(!survives(&s, &c, e, &w("000")).unwrap());
        }
    }

    #[test]
    fn synthesized_strategies_are_unbreakable() {
        let c = symmetric(2, 1);
        let p = SynthParams { q1: 8, q2: 6, m1: 1, m2: 1, eta1: 0.1, eta2: 1.0, alpha: 2, alpha_prime: 0 };
        let s = synth_original(&c, 364, &p, &lim()).unwrap();
        assert!(carole_break_original(&s, &c, &lim()).unwrap().is_none());
        let p = SynthParams { q1: 4, q2: 3, m1: 1, m2: 1, eta1: 1.0, eta2: 1.0, alpha: 4, alpha_prime: 4 };
        let s = synth_pathological(&c, 128, &p, &lim()).unwrap();
        assert!(carole_break_pathological(&s, &c, &lim()).unwrap().is_none());
    }

    #[test]
    fn threshold_report_terms() {
        let c = symmetric(2, 1);
        let p = SynthParams { q1: 30, q2: 10, m1: 1, m2: 1, eta1: 2.0, eta2: 2.0, alpha: 1, alpha_prime: 0 };
        let whole = WholeGameBalance { m: 1, eta: 2.0 };
        let r = carole_threshold_report(&c, &p, &whole, None, DEFAULT_PREC).unwrap();
        // The i = 0 term alone bounds the denominator from below by E_0.
        let path = &r.values["carole_pathological_max_n_exclusive"];
        assert!(path.hi_f64() <= 2f64.powi(40));
        // Two applications of the balance lemma.
        let atyp = &r.values["atypical_response_strings"];
        let expect = 2.0 * 40f64.powf(-2.0) * 2f64.powi(40);
        assert!(atyp.lo_f64() <= expect * (1.0 + 1e-12) && expect * (1.0 - 1e-12) <= atyp.hi_f64());
    }
}
