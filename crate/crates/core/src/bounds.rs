//! Closed-form bounds: the sphere bound, first-order thresholds for both
//! players, and Varshamov-type code size bounds.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::code::{prime_power, varshamov_redundancy};
use crate::error::{Error, Result};
use crate::numeric::{binomial, decide, rational_from_f64, Enclosure, Truth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    fn test(self) -> fn(&Enclosure, &Enclosure) -> Truth {
        match self {
            Relation::Le => Enclosure::le,
            Relation::Lt => Enclosure::lt,
            Relation::Ge => Enclosure::ge,
            Relation::Gt => Enclosure::gt,
        }
    }
}

/// One inequality `lhs (relation) rhs`, decided on enclosures.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub name: String,
    pub lhs: Enclosure,
    pub relation: Relation,
    pub rhs: Enclosure,
    pub satisfied: Truth,
}

impl Comparison {
    /// Evaluates at increasing precision until the comparison is decided or
    /// the precision ceiling is reached.
    pub fn evaluate<F>(name: impl Into<String>, relation: Relation, eval: F) -> Self
    where
        F: FnMut(u32) -> (Enclosure, Enclosure),
    {
        let (lhs, rhs, satisfied) = decide(eval, relation.test());
        Comparison { name: name.into(), lhs, relation, rhs, satisfied }
    }

    pub fn exact(name: impl Into<String>, lhs: Enclosure, relation: Relation, rhs: Enclosure) -> Self {
        let satisfied = relation.test()(&lhs, &rhs);
        Comparison { name: name.into(), lhs, relation, rhs, satisfied }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BTreeMap<String, String>,
    pub values: BTreeMap<String, Enclosure>,
    pub comparisons: Vec<Comparison>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(name: impl Into<String>) -> Self {
        BoundReport { name: name.into(), ..Default::default() }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) {
        self.inputs.insert(key.to_string(), value.to_string());
    }

    /// Conjunction of all comparisons.
    pub fn satisfied(&self) -> Truth {
        self.comparisons.iter().fold(Truth::True, |acc, c| acc.and(c.satisfied))
    }

    pub fn comparison(&self, name: &str) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// One line of a threshold table.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdRow {
    pub q: usize,
    pub q1: usize,
    pub q2: usize,
    pub name: String,
    pub value: String,
    pub lo: String,
    pub hi: String,
}

impl ThresholdRow {
    pub fn new(q1: usize, q2: usize, name: &str, value: &Enclosure) -> Self {
        let mid = (value.lo() + value.hi()) / BigRational::from_integer(2.into());
        ThresholdRow {
            q: q1 + q2,
            q1,
            q2,
            name: name.to_string(),
            value: crate::numeric::decimal(&mid, 12, false),
            lo: crate::numeric::decimal(value.lo(), 12, false),
            hi: crate::numeric::decimal(value.hi(), 12, true),
        }
    }
}

/// Table rows for every named value in a report.
pub fn threshold_rows(report: &BoundReport, q1: usize, q2: usize) -> Vec<ThresholdRow> {
    report.values.iter().map(|(name, v)| ThresholdRow::new(q1, q2, name, v)).collect()
}

fn big_pow(base: u64, e: usize) -> BigUint {
    BigUint::from(base).pow(e as u32)
}

fn ratio(n: BigUint, d: BigUint) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `t^(q+k) / (E_k C(q,k))`.
pub fn sphere_bound(q: usize, k: usize, t: u8, e_k: u64) -> Result<BigRational> {
    if e_k == 0 {
        return Err(Error::InvalidArgument("E_k must be at least 1".into()));
    }
    if k > q {
        return Err(Error::InvalidArgument(format!("order {k} exceeds q = {q}")));
    }
    Ok(ratio(big_pow(t as u64, q + k), BigUint::from(e_k) * binomial(q as u64, k as u64)))
}

/// `t^(Q - ⌈log_t(1 + Σ_{i<2R} C(Q-1,i)(t-1)^i)⌉)` for prime-power `t`.
pub fn varshamov_lower(t: u8, len: usize, radius: usize) -> Result<BigRational> {
    if prime_power(t as u64).is_none() {
        return Err(Error::InvalidArgument(format!("alphabet size {t} is not a prime power")));
    }
    if len == 0 {
        return Err(Error::InvalidArgument("code length must be positive".into()));
    }
    let e = len as i64 - varshamov_redundancy(t as u64, len, radius) as i64;
    let tb = BigRational::from_integer(BigInt::from(t));
    Ok(tb.pow(e as i32))
}

/// `(t1/t2)^Q a_t2`.
pub fn alphabet_change_lower(t1: u8, t2: u8, len: usize, _radius: usize, a_t2: &BigUint) -> Result<BigRational> {
    if t1 > t2 || t1 < 2 {
        return Err(Error::InvalidArgument(format!("need 2 <= t1 <= t2, got {t1}, {t2}")));
    }
    let f = BigRational::new(BigInt::from(t1), BigInt::from(t2));
    Ok(f.pow(len as i32) * BigRational::from_integer(BigInt::from(a_t2.clone())))
}

/// `(k^2 + 3k - 2)/2`, the prefix length used by the shifted packing.
pub fn prefix_length(k: usize) -> usize {
    if k == 0 {
        0
    } else {
        (k * k + 3 * k - 2) / 2
    }
}

/// `c9 (2R-1)! / (2^(2R) (t-1)^(2R-1)) t^(Q-c_k-1) / Q^(2R-1)`, the
/// asymptotic lower bound on `A_t(Q - c_k, 2R+1)`.
pub fn asymp_varshamov(t: u8, len: usize, radius: usize, k: usize, c9: &BigRational) -> Result<BigRational> {
    if radius == 0 || radius > k {
        return Err(Error::InvalidArgument(format!("radius must lie in 1..={k}")));
    }
    if len == 0 {
        return Err(Error::InvalidArgument("code length must be positive".into()));
    }
    let m = 2 * radius - 1;
    let fact: BigUint = (1..=m as u64).map(BigUint::from).product();
    let tb = BigRational::from_integer(BigInt::from(t));
    let e = len as i64 - prefix_length(k) as i64 - 1;
    let num = BigRational::from_integer(BigInt::from(fact)) * tb.pow(e as i32);
    let den = BigRational::from_integer(BigInt::from(
        big_pow(2, 2 * radius) * big_pow(t as u64 - 1, m) * big_pow(len as u64, m),
    ));
    Ok(c9 * num / den)
}

/// The asymptotic constants. None of them has a canonical value; only the
/// inequalities among them are fixed, and those are checked by
/// [`BoundConstants::validate`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConstants {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub c4: Option<f64>,
    pub c5: Option<f64>,
    pub c6: Option<f64>,
    pub c9: Option<f64>,
    pub c10: Option<f64>,
    pub c11: Option<f64>,
    pub c12: Option<f64>,
    pub c13: Option<f64>,
}

fn exact(x: f64) -> Enclosure {
    Enclosure::exact(rational_from_f64(x))
}

/// `sqrt(k+2)/sqrt(2)`.
fn root_term(k: usize, prec: u32) -> Enclosure {
    Enclosure::from_ratio(k as i64 + 2, 2).sqrt(prec)
}

/// `c14 = t(t-1)k sqrt(k+2)/sqrt(2)`.
pub fn c14(t: u8, k: usize, prec: u32) -> Enclosure {
    &Enclosure::from_int(t as i64 * (t as i64 - 1) * k as i64) * &root_term(k, prec)
}

impl BoundConstants {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: BoundConstants = serde_json::from_str(text)?;
        Ok(c)
    }

    fn get(&self, name: &str) -> Option<f64> {
        match name {
            "c1" => self.c1,
            "c2" => self.c2,
            "c3" => self.c3,
            "c4" => self.c4,
            "c5" => self.c5,
            "c6" => self.c6,
            "c9" => self.c9,
            "c10" => self.c10,
            "c11" => self.c11,
            "c12" => self.c12,
            "c13" => self.c13,
            _ => None,
        }
    }

    pub fn require(&self, name: &str) -> Result<f64> {
        self.get(name).ok_or_else(|| Error::InvalidArgument(format!("constant {name} is required")))
    }

    /// Every inequality among the supplied constants, for channel order `k`
    /// over `t` letters with `E_k` top-length strings.
    pub fn checks(&self, t: u8, k: usize, e_k: u64) -> Vec<Comparison> {
        let tk = t as i64 * k as i64 * (k as i64 + 1);
        let base = move |p: u32| &Enclosure::from_int(tk) * &root_term(k, p);
        let base_t = move |p: u32| &Enclosure::from_int(tk * t as i64) * &root_term(k, p);
        let base_tm = move |p: u32| &Enclosure::from_int(tk * (t as i64 - 1)) * &root_term(k, p);
        let mut out = Vec::new();
        let mut push = |name: &str, rel: Relation, f: &mut dyn FnMut(u32) -> (Enclosure, Enclosure)| {
            out.push(Comparison::evaluate(name, rel, f));
        };
        for (name, v) in [
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c5", self.c5),
            ("c6", self.c6),
            ("c9", self.c9),
            ("c10", self.c10),
            ("c11", self.c11),
            ("c12", self.c12),
            ("c13", self.c13),
        ] {
            if let Some(v) = v {
                push(&format!("{name} > 0"), Relation::Gt, &mut |_| (exact(v), Enclosure::zero()));
            }
        }
        if let (Some(c2), Some(c10)) = (self.c2, self.c10) {
            push("c2 > c10", Relation::Gt, &mut |_| (exact(c2), exact(c10)));
        }
        if let Some(c10) = self.c10 {
            push("c10 > tk(k+1)sqrt(k+2)/sqrt2", Relation::Gt, &mut |p| (exact(c10), base(p)));
        }
        if let Some(c13) = self.c13 {
            push("c13 > t^2k(k+1)sqrt(k+2)/sqrt2", Relation::Gt, &mut |p| (exact(c13), base_t(p)));
            if let Some(c10) = self.c10 {
                push("c13 - t(t-1)k(k+1)sqrt(k+2)/sqrt2 > c10", Relation::Gt, &mut |p| {
                    (&exact(c13) - &base_tm(p), exact(c10))
                });
            }
        }
        if let Some(c3) = self.c3 {
            push("c3 > t(t-1)k(k+1)sqrt(k+2)/sqrt2", Relation::Gt, &mut |p| (exact(c3), base_tm(p)));
            if let (Some(c13), Some(c10)) = (self.c13, self.c10) {
                push("c3 > c13 - c10", Relation::Gt, &mut |_| (exact(c3), &exact(c13) - &exact(c10)));
            }
        }
        let root_exp = Enclosure::from_ratio(1, 2 * k.max(1) as i64 - 1);
        if let Some(c11) = self.c11 {
            let ck = prefix_length(k);
            let m = 2 * k.max(1) - 1;
            let fact = |n: usize| -> BigUint { (1..=n as u64).map(BigUint::from).product() };
            let num = BigInt::from(fact(m) * BigUint::from(e_k));
            let den = BigInt::from(big_pow(t as u64, ck + k + 1) * big_pow(2, 2 * k) * big_pow(t as u64 - 1, m) * fact(k));
            let inner = Enclosure::exact(BigRational::new(num, den));
            let re = root_exp.clone();
            push("c11 < ((2k-1)! t^(-c_k-k-1) E_k / (2^2k (t-1)^(2k-1) k!))^(1/(2k-1))", Relation::Lt, &mut |p| {
                (exact(c11), inner.powf(&re, p))
            });
            if let Some(c1) = self.c1 {
                push("c1 < c11", Relation::Lt, &mut |_| (exact(c1), exact(c11)));
                if let (Some(c9), Some(c12)) = (self.c9, self.c12) {
                    let re = root_exp.clone();
                    push("c1 < (c9/c12)^(1/(2k-1)) c11", Relation::Lt, &mut |p| {
                        let f = Enclosure::exact(rational_from_f64(c9) / rational_from_f64(c12));
                        (exact(c1), &f.powf(&re, p) * &exact(c11))
                    });
                }
            }
        }
        if let Some(c12) = self.c12 {
            push("c12 > 1", Relation::Gt, &mut |_| (exact(c12), Enclosure::one()));
        }
        if let Some(c9) = self.c9 {
            push("c9 < 1", Relation::Lt, &mut |_| (exact(c9), Enclosure::one()));
        }
        if let Some(c4) = self.c4 {
            let floor = if k == 1 { 0 } else { k as i64 };
            push("c4 > k (or > 0 when k = 1)", Relation::Gt, &mut |_| (exact(c4), Enclosure::from_int(floor)));
        }
        if let Some(c5) = self.c5 {
            push("c5 > c14 = t(t-1)k sqrt(k+2)/sqrt2", Relation::Gt, &mut |p| (exact(c5), c14(t, k, p)));
        }
        if let Some(c6) = self.c6 {
            push("c6 > tk sqrt((k+2)/2)", Relation::Gt, &mut |p| {
                (exact(c6), &Enclosure::from_int(t as i64 * k as i64) * &root_term(k, p))
            });
        }
        out
    }

    /// Fails unless every applicable inequality holds rigorously.
    pub fn validate(&self, t: u8, k: usize, e_k: u64) -> Result<()> {
        let bad: Vec<String> = self
            .checks(t, k, e_k)
            .into_iter()
            .filter(|c| c.satisfied != Truth::True)
            .map(|c| c.name)
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("constants violate: {}", bad.join("; "))))
        }
    }
}

/// Shape of a game for the threshold formulas.
#[derive(Debug, Clone, Copy)]
pub struct GameShape {
    pub q1: usize,
    pub q2: usize,
    pub t: u8,
    pub k: usize,
    pub e_k: u64,
}

impl GameShape {
    pub fn q(&self) -> usize {
        self.q1 + self.q2
    }

    fn sphere(&self) -> Result<Enclosure> {
        Ok(Enclosure::exact(sphere_bound(self.q(), self.k, self.t, self.e_k)?))
    }

    fn echo(&self, report: &mut BoundReport) {
        report.input("q", self.q());
        report.input("q1", self.q1);
        report.input("q2", self.q2);
        report.input("t", self.t);
        report.input("k", self.k);
        report.input("E_k", self.e_k);
    }
}

/// `sqrt(ln q) / x^(1/3)`.
fn decay(q: usize, x: usize, prec: u32) -> Enclosure {
    let root_ln = Enclosure::from_int(q as i64).ln(prec + 16).sqrt(prec + 8);
    let cube = Enclosure::from_int(x as i64).powf(&Enclosure::from_ratio(1, 3), prec + 8);
    &root_ln / &cube
}

/// Batch-size window `(ln q)^(3/2) f(q) <= q2 <= c1 q^(k/(2k-1))` with
/// `f = ln`.
fn window(shape: &GameShape, c1: Option<f64>, report: &mut BoundReport) {
    let q = shape.q();
    let q2 = Enclosure::from_int(shape.q2 as i64);
    report.comparisons.push(Comparison::evaluate("(ln q)^(3/2) f(q) <= q2", Relation::Le, |p| {
        let l = Enclosure::from_int(q as i64).ln(p + 16);
        (&(&l * &l.sqrt(p + 8)) * &l, q2.clone())
    }));
    match c1 {
        Some(c1) => {
            let k = shape.k.max(1) as i64;
            report.comparisons.push(Comparison::evaluate("q2 <= c1 q^(k/(2k-1))", Relation::Le, |p| {
                let e = Enclosure::from_ratio(k, 2 * k - 1);
                (q2.clone(), &exact(c1) * &Enclosure::from_int(q as i64).powf(&e, p + 8))
            }));
        }
        None => report.notes.push("c1 not supplied; upper end of the batch-size window not checked".into()),
    }
}

/// Paul's two first-order thresholds.
pub fn theorem1_thresholds(shape: &GameShape, constants: &BoundConstants, prec: u32) -> Result<BoundReport> {
    constants.validate(shape.t, shape.k, shape.e_k)?;
    let c2 = constants.require("c2")?;
    let c3 = constants.require("c3")?;
    if shape.q2 == 0 {
        return Err(Error::InvalidArgument("q2 must be positive".into()));
    }
    let mut report = BoundReport::new("paul_thresholds");
    shape.echo(&mut report);
    report.input("c2", c2);
    report.input("c3", c3);
    let sphere = shape.sphere()?;
    let q = shape.q();
    let orig = &sphere * &(&Enclosure::one() - &(&exact(c2) * &decay(q, shape.q2, prec)));
    let path = &sphere * &(&Enclosure::one() + &(&exact(c3) * &decay(q, q, prec)));
    report.values.insert("paul_original_max_n".into(), orig);
    report.values.insert("paul_pathological_min_n".into(), path);
    if let Some(c10) = constants.c10 {
        // Block size t^(q2+k)/(E_k C(q,k)) (1 - c10 sqrt(ln q)/q2^(1/3)) before flooring.
        let per_word = Enclosure::exact(BigRational::new(BigInt::one(), BigInt::from(big_pow(shape.t as u64, shape.q1))));
        let shrink = &Enclosure::one() - &(&exact(c10) * &decay(q, shape.q2, prec));
        report.values.insert("block_size_alpha_unfloored".into(), &(&sphere * &per_word) * &shrink);
    }
    report.values.insert("sphere_bound".into(), sphere);
    window(shape, constants.c1, &mut report);
    report.notes.push(
        "the original threshold decays with q2^(1/3) while the pathological one decays with q^(1/3); both are evaluated as stated".into(),
    );
    Ok(report)
}

/// Carole's two first-order thresholds.
pub fn theorem2_thresholds(shape: &GameShape, constants: &BoundConstants, prec: u32) -> Result<BoundReport> {
    constants.validate(shape.t, shape.k, shape.e_k)?;
    let c4 = constants.require("c4")?;
    let c5 = constants.require("c5")?;
    let c6 = constants.require("c6")?;
    if shape.q1 == 0 || shape.q2 == 0 {
        return Err(Error::InvalidArgument("both batches must be nonempty".into()));
    }
    let mut report = BoundReport::new("carole_thresholds");
    shape.echo(&mut report);
    report.input("c4", c4);
    report.input("c5", c5);
    report.input("c6", c6);
    let sphere = shape.sphere()?;
    let q = shape.q();
    let (lo, hi) = (shape.q1.min(shape.q2), shape.q1.max(shape.q2));
    let orig = &sphere
        * &(&(&Enclosure::one() + &(&exact(c4) * &Enclosure::from_ratio(lo as i64, q as i64)))
            + &(&exact(c5) * &decay(q, hi, prec)));
    let path = &sphere * &(&Enclosure::one() - &(&exact(c6) * &decay(q, q, prec)));
    report.values.insert("sphere_bound".into(), sphere);
    report.values.insert("carole_original_min_n".into(), orig);
    report.values.insert("carole_pathological_max_n".into(), path);
    Ok(report)
}

/// Ratio of Paul's original-variant threshold to the sphere bound:
/// `1 - c2 sqrt(ln q) / q2^(1/3)`.
pub fn paul_original_ratio(q: usize, q2: usize, c2: f64, prec: u32) -> Enclosure {
    &Enclosure::one() - &(&exact(c2) * &decay(q, q2, prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational;

    #[test]
    fn sphere_examples() {
        assert_eq!(sphere_bound(5, 1, 2, 2).unwrap(), rational(32, 5));
        assert_eq!(sphere_bound(7, 0, 3, 1).unwrap(), rational(2187, 1));
        assert!(sphere_bound(10, 2, 2, 3).unwrap() < sphere_bound(10, 2, 2, 2).unwrap());
        assert!(sphere_bound(3, 1, 2, 0).is_err());
        let big = sphere_bound(64, 1, 2, 2).unwrap();
        assert_eq!(big, BigRational::from_integer(BigInt::from(1u64 << 58)));
    }

    #[test]
    fn varshamov_examples() {
        assert_eq!(varshamov_lower(2, 7, 1).unwrap(), rational(16, 1));
        for t in [2u8, 3, 4, 5] {
            for q in 1..6 {
                assert_eq!(
                    varshamov_lower(t, q, 0).unwrap(),
                    BigRational::from_integer(BigInt::from(t).pow(q as u32))
                );
            }
        }
        assert!(varshamov_lower(6, 4, 1).is_err());
        assert_eq!(alphabet_change_lower(6, 7, 2, 1, &BigUint::from(7u32)).unwrap(), rational(36, 7));
    }

    #[test]
    fn prefix_lengths() {
        assert_eq!(prefix_length(1), 1);
        assert_eq!(prefix_length(2), 4);
        assert_eq!(prefix_length(3), 8);
        for k in 2..8 {
            assert_eq!(k + (2..=k).sum::<usize>(), prefix_length(k));
        }
    }

    #[test]
    fn asymptotic_code_bound_is_below_constructive_bound() {
        let c9 = rational(9, 10);
        for (t, r, k) in [(2u8, 1usize, 1usize), (2, 1, 2), (2, 2, 2), (3, 1, 1)] {
            for len in 12..24 {
                let ck = prefix_length(k);
                let a = asymp_varshamov(t, len, r, k, &c9).unwrap();
                let v = varshamov_lower(t, len - ck, r).unwrap();
                assert!(a < v, "t={t} Q={len} R={r}: {a} vs {v}");
            }
        }
        assert!(asymp_varshamov(2, 10, 0, 1, &c9).is_err());
    }

    fn good_constants() -> BoundConstants {
        // k = 1, t = 2: base = 2*1*2*sqrt(3/2) ~ 4.899
        BoundConstants {
            c1: Some(0.001),
            c2: Some(5.0),
            c3: Some(10.0),
            c4: Some(0.5),
            c5: Some(2.5),
            c6: Some(2.5),
            c9: Some(0.9),
            c10: Some(4.95),
            c11: Some(0.01),
            c12: Some(1.1),
            c13: Some(10.0),
        }
    }

    #[test]
    fn constants_validation() {
        good_constants().validate(2, 1, 2).unwrap();
        let mut bad = good_constants();
        bad.c10 = Some(4.8);
        assert!(bad.validate(2, 1, 2).is_err());
        let mut bad = good_constants();
        bad.c2 = Some(4.9);
        assert!(bad.validate(2, 1, 2).is_err());
        let mut bad = good_constants();
        bad.c9 = Some(1.2);
        assert!(bad.validate(2, 1, 2).is_err());
        assert!(BoundConstants::from_json(r#"{"c99": 1}"#).is_err());
    }

    #[test]
    fn thresholds_bracket_the_sphere_bound() {
        let shape = GameShape { q1: 56, q2: 8, t: 2, k: 1, e_k: 2 };
        let p = theorem1_thresholds(&shape, &good_constants(), 128).unwrap();
        let sphere = &p.values["sphere_bound"];
        assert!(p.values["paul_original_max_n"].hi() < sphere.lo());
        assert!(p.values["paul_pathological_min_n"].lo() > sphere.hi());
        let c = theorem2_thresholds(&shape, &good_constants(), 128).unwrap();
        assert!(c.values["carole_original_min_n"].lo() > sphere.hi());
        assert!(c.values["carole_pathological_max_n"].hi() < sphere.lo());
        // k = 1: the window's upper end is c1 q.
        let w = p.comparison("q2 <= c1 q^(k/(2k-1))").unwrap();
        assert_eq!(w.rhs.lo(), &(rational_from_f64(0.001) * rational(64, 1)));
    }

    #[test]
    fn ratio_matches_float_evaluation() {
        for e in 6..=16 {
            let q = 1usize << e;
            let q2 = (q as f64).sqrt() as usize;
            let r = paul_original_ratio(q, q2, 5.0, 128);
            let f = 1.0 - 5.0 * (q as f64).ln().sqrt() / (q2 as f64).cbrt();
            assert!(r.lo_f64() <= f + 1e-12 && f - 1e-12 <= r.hi_f64());
        }
    }
}
