//! Rigorous rational enclosures.
//!
//! Arithmetic on [`Enclosure`] is exact (rational endpoints). Only the
//! transcendental operations (`sqrt`, `ln`, `exp`) round, and they always
//! round outward to a dyadic grid of `2^-prec`, so the true value is inside
//! `[lo, hi]` at every step.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Working precision in bits for transcendental terms.
pub const DEFAULT_PREC: u32 = 128;
/// Precision ceiling when an inequality is still undecided.
pub const MAX_PREC: u32 = 1024;

/// Three-valued outcome of comparing enclosures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Truth {
    True,
    False,
    Indeterminate,
}

impl Truth {
    pub fn is_true(self) -> bool {
        self == Truth::True
    }

    pub fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Indeterminate,
        }
    }
}

impl From<bool> for Truth {
    fn from(b: bool) -> Self {
        if b {
            Truth::True
        } else {
            Truth::False
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    lo: BigRational,
    hi: BigRational,
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact rational value of a finite float.
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

fn pow2(e: u32) -> BigInt {
    BigInt::one() << e
}

fn round_down(x: &BigRational, prec: u32) -> BigRational {
    let scaled = x * BigRational::from_integer(pow2(prec));
    BigRational::new(scaled.floor().to_integer(), pow2(prec))
}

fn round_up(x: &BigRational, prec: u32) -> BigRational {
    let scaled = x * BigRational::from_integer(pow2(prec));
    BigRational::new(scaled.ceil().to_integer(), pow2(prec))
}

fn bits(x: &BigInt) -> i64 {
    x.bits() as i64
}

fn isqrt_floor(x: &BigInt) -> BigInt {
    let (_, mag) = x.clone().into_parts();
    BigInt::from_biguint(Sign::Plus, mag.sqrt())
}

impl Enclosure {
    pub fn exact(x: BigRational) -> Self {
        Enclosure { lo: x.clone(), hi: x }
    }

    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order");
        Enclosure { lo, hi }
    }

    pub fn from_int(n: i64) -> Self {
        Enclosure::exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_big(n: BigInt) -> Self {
        Enclosure::exact(BigRational::from_integer(n))
    }

    pub fn from_biguint(n: &BigUint) -> Self {
        Enclosure::from_big(BigInt::from(n.clone()))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Enclosure::exact(rational(n, d))
    }

    pub fn from_f64(x: f64) -> Self {
        Enclosure::exact(rational_from_f64(x))
    }

    pub fn zero() -> Self {
        Enclosure::from_int(0)
    }

    pub fn one() -> Self {
        Enclosure::from_int(1)
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64().unwrap_or(f64::NAN)
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2)))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    pub fn rounded(&self, prec: u32) -> Self {
        Enclosure {
            lo: round_down(&self.lo, prec),
            hi: round_up(&self.hi, prec),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Enclosure::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `[max(0, lo), max(0, hi)]`.
    pub fn max0(&self) -> Self {
        let z = BigRational::zero();
        Enclosure {
            lo: self.lo.clone().max(z.clone()),
            hi: self.hi.clone().max(z),
        }
    }

    pub fn min(&self, other: &Enclosure) -> Self {
        Enclosure {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().min(other.hi.clone()),
        }
    }

    pub fn recip(&self) -> Self {
        assert!(
            self.lo.is_positive() || self.hi.is_negative(),
            "reciprocal of an enclosure containing zero"
        );
        Enclosure {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        }
    }

    /// Floor of the enclosed value when it is determined.
    pub fn floor(&self) -> Option<BigInt> {
        let a = self.lo.floor().to_integer();
        let b = self.hi.floor().to_integer();
        (a == b).then_some(a)
    }

    pub fn sqrt(&self, prec: u32) -> Self {
        assert!(!self.lo.is_negative(), "sqrt of a negative enclosure");
        Enclosure {
            lo: sqrt_down(&self.lo, prec),
            hi: sqrt_up(&self.hi, prec),
        }
    }

    pub fn ln(&self, prec: u32) -> Self {
        assert!(self.lo.is_positive(), "ln of a non-positive enclosure");
        Enclosure {
            lo: ln_point(&self.lo, prec).lo,
            hi: ln_point(&self.hi, prec).hi,
        }
    }

    pub fn exp(&self, prec: u32) -> Self {
        Enclosure {
            lo: exp_point(&self.lo, prec).lo,
            hi: exp_point(&self.hi, prec).hi,
        }
    }

    /// `self^e` for a positive base and real exponent.
    pub fn powf(&self, e: &Enclosure, prec: u32) -> Self {
        if e.is_exact() && e.lo.is_integer() {
            let n = e.lo.to_integer();
            if let Some(k) = n.abs().to_u32() {
                let p = self.pow(k);
                return if n.is_negative() { p.recip() } else { p };
            }
        }
        (e * &self.ln(prec + 16)).exp(prec)
    }

    pub fn lt(&self, other: &Enclosure) -> Truth {
        if self.hi < other.lo {
            Truth::True
        } else if self.lo >= other.hi {
            Truth::False
        } else {
            Truth::Indeterminate
        }
    }

    pub fn le(&self, other: &Enclosure) -> Truth {
        if self.hi <= other.lo {
            Truth::True
        } else if self.lo > other.hi {
            Truth::False
        } else {
            Truth::Indeterminate
        }
    }

    pub fn gt(&self, other: &Enclosure) -> Truth {
        other.lt(self)
    }

    pub fn ge(&self, other: &Enclosure) -> Truth {
        other.le(self)
    }

    /// Partial order: `Some` only when the enclosures are disjoint or equal points.
    pub fn partial_cmp_strict(&self, other: &Enclosure) -> Option<Ordering> {
        if self.is_exact() && other.is_exact() {
            return Some(self.lo.cmp(&other.lo));
        }
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.lo)
        } else {
            write!(f, "[{}, {}]", decimal(&self.lo, 12, false), decimal(&self.hi, 12, true))
        }
    }
}

impl Serialize for Enclosure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(None)?;
        if self.is_exact() {
            m.serialize_entry("exact", &self.lo.to_string())?;
        }
        m.serialize_entry("lo", &decimal(&self.lo, 24, false))?;
        m.serialize_entry("hi", &decimal(&self.hi, 24, true))?;
        m.end()
    }
}

/// Decimal rendering with `digits` fractional digits, rounded toward
/// `-inf` (or `+inf` when `up`).
pub fn decimal(x: &BigRational, digits: u32, up: bool) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = x * BigRational::from_integer(scale.clone());
    let n = if up {
        scaled.ceil().to_integer()
    } else {
        scaled.floor().to_integer()
    };
    let neg = n.is_negative();
    let (q, r) = n.abs().div_rem(&scale);
    let frac = format!("{:0>width$}", r.to_string(), width = digits as usize);
    let frac = frac.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if frac.is_empty() {
        format!("{sign}{q}")
    } else {
        format!("{sign}{q}.{frac}")
    }
}

impl Add for &Enclosure {
    type Output = Enclosure;
    fn add(self, rhs: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
        }
    }
}

impl Sub for &Enclosure {
    type Output = Enclosure;
    fn sub(self, rhs: &Enclosure) -> Enclosure {
        Enclosure {
            lo: &self.lo - &rhs.hi,
            hi: &self.hi - &rhs.lo,
        }
    }
}

impl Mul for &Enclosure {
    type Output = Enclosure;
    fn mul(self, rhs: &Enclosure) -> Enclosure {
        let c = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let lo = c.iter().min().expect("nonempty").clone();
        let hi = c.iter().max().expect("nonempty").clone();
        Enclosure { lo, hi }
    }
}

impl Div for &Enclosure {
    type Output = Enclosure;
    fn div(self, rhs: &Enclosure) -> Enclosure {
        self * &rhs.recip()
    }
}

impl Neg for &Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Enclosure {
            type Output = Enclosure;
            fn $m(self, rhs: Enclosure) -> Enclosure {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Enclosure> for Enclosure {
            type Output = Enclosure;
            fn $m(self, rhs: &Enclosure) -> Enclosure {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

fn sqrt_down(x: &BigRational, prec: u32) -> BigRational {
    let scaled = x * BigRational::from_integer(pow2(2 * prec));
    let n = scaled.floor().to_integer();
    BigRational::new(isqrt_floor(&n), pow2(prec))
}

fn sqrt_up(x: &BigRational, prec: u32) -> BigRational {
    let scaled = x * BigRational::from_integer(pow2(2 * prec));
    let n = scaled.ceil().to_integer();
    let mut s = isqrt_floor(&n);
    if &s * &s < n {
        s += 1;
    }
    BigRational::new(s, pow2(prec))
}

/// `atanh(z)` for rational `0 <= z <= 1/3`.
fn atanh_small(z: &BigRational, prec: u32) -> Enclosure {
    if z.is_zero() {
        return Enclosure::zero();
    }
    let guard = prec + 16;
    let z2 = z * z;
    let z2_lo = round_down(&z2, guard);
    let z2_hi = round_up(&z2, guard);
    let mut p_lo = round_down(z, guard);
    let mut p_hi = round_up(z, guard);
    let mut lo = BigRational::zero();
    let mut hi = BigRational::zero();
    // z <= 1/3 gives z^(2N) <= 9^-N.
    let terms = guard / 3 + 2;
    let mut n = 0u32;
    while n < terms {
        let d = BigRational::from_integer(BigInt::from(2 * n + 1));
        lo += round_down(&(&p_lo / &d), guard);
        hi += round_up(&(&p_hi / &d), guard);
        p_lo = round_down(&(&p_lo * &z2_lo), guard);
        p_hi = round_up(&(&p_hi * &z2_hi), guard);
        n += 1;
    }
    // Tail: sum_{m >= n} z^(2m+1)/(2m+1) <= p_hi / ((2n+1)(1 - z^2)).
    let d = BigRational::from_integer(BigInt::from(2 * n + 1));
    let tail = &p_hi / (d * (BigRational::one() - &z2_hi));
    hi += round_up(&tail, guard);
    Enclosure { lo, hi }.rounded(prec + 8)
}

type PointCache = RefCell<HashMap<(BigRational, u32), Enclosure>>;

thread_local! {
    // The same few logarithms and powers recur across every condition check.
    static LN_CACHE: PointCache = RefCell::new(HashMap::new());
    static EXP_CACHE: PointCache = RefCell::new(HashMap::new());
    static LN2_CACHE: PointCache = RefCell::new(HashMap::new());
}

fn memo(
    cache: &'static std::thread::LocalKey<PointCache>,
    x: &BigRational,
    prec: u32,
    f: fn(&BigRational, u32) -> Enclosure,
) -> Enclosure {
    let key = (x.clone(), prec);
    if let Some(e) = cache.with(|c| c.borrow().get(&key).cloned()) {
        return e;
    }
    let e = f(x, prec);
    cache.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() > 4096 {
            c.clear();
        }
        c.insert(key, e.clone());
    });
    e
}

fn ln2(prec: u32) -> Enclosure {
    memo(&LN2_CACHE, &BigRational::zero(), prec, |_, p| {
        &Enclosure::from_int(2) * &atanh_small(&rational(1, 3), p + 4)
    })
}

fn ln_point(x: &BigRational, prec: u32) -> Enclosure {
    memo(&LN_CACHE, x, prec, ln_point_uncached)
}

fn ln_point_uncached(x: &BigRational, prec: u32) -> Enclosure {
    assert!(x.is_positive());
    if x.is_one() {
        return Enclosure::zero();
    }
    let mut m = bits(x.numer()) - bits(x.denom());
    let shift = |m: i64| -> BigRational {
        if m >= 0 {
            x / BigRational::from_integer(pow2(m as u32))
        } else {
            x * BigRational::from_integer(pow2((-m) as u32))
        }
    };
    let mut y = shift(m);
    let two = BigRational::from_integer(BigInt::from(2));
    while y < BigRational::one() {
        m -= 1;
        y = shift(m);
    }
    while y >= two {
        m += 1;
        y = shift(m);
    }
    let guard = prec + 16 + (64 - (m.unsigned_abs().leading_zeros()));
    let z = (&y - BigRational::one()) / (&y + BigRational::one());
    let ln_y = &Enclosure::from_int(2) * &atanh_small(&z, guard);
    let ln_x = &(&Enclosure::from_int(m) * &ln2(guard)) + &ln_y;
    ln_x.rounded(prec)
}

fn exp_point(x: &BigRational, prec: u32) -> Enclosure {
    memo(&EXP_CACHE, x, prec, exp_point_uncached)
}

fn exp_point_uncached(x: &BigRational, prec: u32) -> Enclosure {
    if x.is_zero() {
        return Enclosure::one();
    }
    let half = rational(1, 2);
    let mut s = 0u32;
    let mut y = x.clone();
    while y.abs() > half {
        y /= BigRational::from_integer(BigInt::from(2));
        s += 1;
    }
    let mag = x.abs().ceil().to_integer().to_u32().unwrap_or(u32::MAX / 4);
    let guard = prec + s + 32 + mag + mag / 2;
    let y_enc = Enclosure::exact(y.clone());
    let mut term = Enclosure::one();
    let mut sum = Enclosure::one();
    let mut n = 1u32;
    // |y| <= 1/2 so |y|^n / n! drops below 2^-guard well before n = guard.
    loop {
        term = (&(&term * &y_enc) / &Enclosure::from_int(n as i64)).rounded(guard);
        sum = &sum + &term;
        n += 1;
        let eps = BigRational::new(BigInt::one(), pow2(guard));
        if term.hi.abs() <= eps && term.lo.abs() <= eps && n > 4 {
            break;
        }
    }
    // Remainder after the last included term: |y|^n/n! * 2 bounds the tail.
    let mut fact = BigInt::one();
    for i in 1..=n {
        fact *= BigInt::from(i);
    }
    let tail = y.abs().pow(n as i32) * BigRational::new(BigInt::from(2), fact);
    let tail = round_up(&tail, guard);
    let mut e = Enclosure {
        lo: &sum.lo - &tail,
        hi: &sum.hi + &tail,
    };
    for _ in 0..s {
        e = (&e * &e).rounded(guard);
    }
    let e = Enclosure {
        lo: e.lo.max(BigRational::zero()),
        hi: e.hi,
    };
    e.rounded(prec.max(guard.min(prec + 64)))
}

/// Evaluates `lhs (rel) rhs` at increasing precision until decided.
pub fn decide<F>(mut eval: F, rel: fn(&Enclosure, &Enclosure) -> Truth) -> (Enclosure, Enclosure, Truth)
where
    F: FnMut(u32) -> (Enclosure, Enclosure),
{
    let mut prec = DEFAULT_PREC;
    loop {
        let (lhs, rhs) = eval(prec);
        let truth = rel(&lhs, &rhs);
        if truth != Truth::Indeterminate || prec >= MAX_PREC {
            return (lhs, rhs, truth);
        }
        prec *= 2;
    }
}

/// Binomial coefficient as a big integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(e: &Enclosure, v: f64, tol: f64) {
        assert!(e.lo_f64() <= v + tol && e.hi_f64() >= v - tol, "{e} vs {v}");
        assert!(e.hi_f64() - e.lo_f64() < 1e-30_f64.max(tol), "too wide: {e}");
    }

    #[test]
    fn ln_matches_float() {
        for x in [0.001, 0.5, 1.5, 2.0, 3.0, 16.0, 1e6, 65536.0] {
            let e = Enclosure::from_f64(x).ln(DEFAULT_PREC);
            close(&e, x.ln(), 1e-12);
        }
        assert_eq!(Enclosure::one().ln(64), Enclosure::zero());
    }

    #[test]
    fn ln2_encloses_reference() {
        // ln 2 = 0.693147180559945309417232121458176568...
        let e = ln2(128);
        let reference = BigRational::new(
            BigInt::parse_bytes(b"693147180559945309417232121458176568", 10).unwrap(),
            BigInt::from(10u32).pow(36),
        );
        let eps = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(35));
        assert!(e.lo() <= &(&reference + &eps) && e.hi() >= &(&reference - &eps));
        assert!(e.width() < eps);
    }

    #[test]
    fn sqrt_and_exp_match_float() {
        for x in [0.0, 0.25, 2.0, 10.0, 12345.678] {
            close(&Enclosure::from_f64(x).sqrt(DEFAULT_PREC), x.sqrt(), 1e-12);
        }
        for x in [-20.0, -1.0, -0.3, 0.0, 0.7, 3.0, 30.0] {
            let e = Enclosure::from_f64(x).exp(DEFAULT_PREC);
            let v = x.exp();
            assert!(e.lo_f64() <= v * (1.0 + 1e-14) && e.hi_f64() >= v * (1.0 - 1e-14), "{x}");
        }
    }

    #[test]
    fn sqrt_of_perfect_square_is_tight() {
        let e = Enclosure::from_int(49).sqrt(64);
        assert_eq!(e, Enclosure::from_int(7));
    }

    #[test]
    fn powf_integer_and_fractional() {
        let base = Enclosure::from_int(8);
        assert_eq!(base.powf(&Enclosure::from_int(-1), 64), Enclosure::from_ratio(1, 8));
        close(&base.powf(&Enclosure::from_ratio(1, 3), DEFAULT_PREC), 2.0, 1e-12);
    }

    #[test]
    fn comparisons_are_three_valued() {
        let a = Enclosure::new(rational(1, 1), rational(2, 1));
        let b = Enclosure::new(rational(3, 1), rational(4, 1));
        let c = Enclosure::new(rational(3, 2), rational(5, 1));
        assert_eq!(a.lt(&b), Truth::True);
        assert_eq!(b.lt(&a), Truth::False);
        assert_eq!(a.lt(&c), Truth::Indeterminate);
        assert_eq!(Enclosure::from_int(2).le(&Enclosure::from_int(2)), Truth::True);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal(&rational(-5, 4), 4, false), "-1.25");
        assert_eq!(decimal(&rational(1, 3), 3, true), "0.334");
        assert_eq!(decimal(&rational(6, 1), 3, true), "6");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 2), BigUint::from(15u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial(64, 1), BigUint::from(64u32));
    }
}
