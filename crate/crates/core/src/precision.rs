//! Arithmetic tiers shared by every algorithm in the crate.
//!
//! Three tiers exist: the full multiprecision working precision, a fixed
//! intermediate precision (same representation as full, fewer digits), and
//! hardware `f64`. The iteration kernels are written once against the
//! [`Real`] and [`Entry`] traits and instantiated for each tier.

use std::cmp::Ordering;
use std::fmt::Debug;

use rug::float::Round;
use rug::ops::{CompleteRound, Pow};
use rug::{Float, Integer};

use crate::error::{Error, Result};

/// log2(10)
const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Default digit count of the intermediate tier.
pub const DEFAULT_INTERMEDIATE_DIGITS: u32 = 125;

/// Largest integer that `f64` represents exactly together with all smaller ones.
pub const F64_EXACT_LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53

/// Binary precision needed to carry `digits` decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * LOG2_10).ceil() as u32
}

/// A fresh multiprecision zero carrying `digits` decimal digits.
pub fn mp_zero(digits: u32) -> Float {
    Float::new(bits_for_digits(digits))
}

/// `10^exp` at `digits` decimal digits.
pub fn pow10(exp: i32, digits: u32) -> Float {
    let ten = Float::with_val(bits_for_digits(digits), 10);
    ten.pow(exp)
}

/// Parses a decimal string at the given digit count.
pub fn parse_decimal(s: &str, digits: u32) -> Result<Float> {
    let parsed = Float::parse(s.trim())
        .map_err(|e| Error::InvalidParameter(format!("cannot parse {s:?}: {e}")))?;
    Ok(parsed.complete(bits_for_digits(digits)))
}

/// Scientific-notation rendering with `sig` significant digits, e.g. `1.23e-45`.
pub fn format_sci(x: &Float, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    format!("{:.*e}", sig.max(1), x)
}

/// One of the three arithmetic levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    Full(u32),
    Intermediate(u32),
    Double,
}

impl Tier {
    /// Decimal digits carried by the tier (53 bits for `Double`).
    pub fn digits(self) -> f64 {
        match self {
            Tier::Full(d) | Tier::Intermediate(d) => d as f64,
            Tier::Double => 53.0 / LOG2_10,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::Full(_) => "full",
            Tier::Intermediate(_) => "intermediate",
            Tier::Double => "double",
        }
    }
}

/// Detection and exhaustion thresholds derived from the working precision.
///
/// A relation is reported when `min|y| < 10^(detect_exp - work_digits)`.
/// Precision counts as exhausted when `min|y|` sinks below
/// `10^(exhaust_exp - work_digits)` without crossing the detection
/// threshold, or when an entry of `A` exceeds `10^(work_digits - exhaust_exp)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpsilonPolicy {
    pub work_digits: u32,
    pub detect_exp: u32,
    pub exhaust_exp: u32,
}

impl EpsilonPolicy {
    pub const DEFAULT_DETECT_EXP: u32 = 20;
    pub const DEFAULT_EXHAUST_EXP: u32 = 25;

    pub fn new(work_digits: u32, detect_exp: u32, exhaust_exp: u32) -> Result<Self> {
        if !(0 < detect_exp && detect_exp < exhaust_exp && exhaust_exp < work_digits) {
            return Err(Error::InvalidParameter(format!(
                "epsilon policy needs 0 < detect_exp ({detect_exp}) < exhaust_exp ({exhaust_exp}) < digits ({work_digits})"
            )));
        }
        if work_digits < 16 {
            return Err(Error::InvalidParameter(format!(
                "working precision must be at least 16 digits, got {work_digits}"
            )));
        }
        Ok(Self {
            work_digits,
            detect_exp,
            exhaust_exp,
        })
    }

    pub fn with_digits(work_digits: u32) -> Result<Self> {
        Self::new(
            work_digits,
            Self::DEFAULT_DETECT_EXP,
            Self::DEFAULT_EXHAUST_EXP,
        )
    }

    pub fn bits(&self) -> u32 {
        bits_for_digits(self.work_digits)
    }

    pub fn detection_threshold(&self) -> Float {
        pow10(
            self.detect_exp as i32 - self.work_digits as i32,
            self.work_digits,
        )
    }

    pub fn exhaustion_level(&self) -> Float {
        pow10(
            self.exhaust_exp as i32 - self.work_digits as i32,
            self.work_digits,
        )
    }

    /// Largest admissible `|A|` entry.
    pub fn entry_limit(&self) -> Integer {
        Integer::from(10).pow(self.work_digits - self.exhaust_exp)
    }
}

/// Nearest integer, exact halves rounded away from zero.
pub fn nint(x: &Float) -> Result<Integer> {
    if !x.is_finite() {
        return Err(Error::TierOverflow(x.to_string()));
    }
    // mpfr_round rounds halfway cases away from zero
    x.clone()
        .round()
        .to_integer()
        .ok_or_else(|| Error::TierOverflow(x.to_string()))
}

/// `nint` for the double tier; the result must fit an `i64`.
pub fn nint_f64(x: f64) -> Result<i64> {
    let r = x.round();
    if !r.is_finite() || r.abs() >= 9.223_372_036_854_775e18 {
        return Err(Error::TierOverflow(x.to_string()));
    }
    Ok(r as i64)
}

/// Correctly rounded conversion to `f64`; out-of-range magnitudes are
/// reported instead of saturating to infinity or flushing to zero.
pub fn demote_f64(x: &Float) -> Result<f64> {
    if x.is_zero() {
        return Ok(0.0);
    }
    let v = x.to_f64_round(Round::Nearest);
    if !v.is_finite() || v == 0.0 || v.abs() < f64::MIN_POSITIVE {
        return Err(Error::RangeViolation {
            value: format_sci(x, 6),
            tier: Tier::Double.name().to_string(),
        });
    }
    Ok(v)
}

/// Rounds `x` to `digits` decimal digits.
pub fn demote_float(x: &Float, digits: u32) -> Float {
    Float::with_val(bits_for_digits(digits), x)
}

/// True iff `x` is integral and `|x| <= cap`.
pub fn is_exact_int(x: f64, cap: f64) -> bool {
    x.is_finite() && x.fract() == 0.0 && x.abs() <= cap && cap <= F64_EXACT_LIMIT
}

/// Real scalar arithmetic at one tier.
pub trait Real: Clone + Debug + Send + Sync + 'static {
    /// Precision context: binary digits for multiprecision, `()` for `f64`.
    type Ctx: Copy + Debug + PartialEq + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn from_i64(v: i64, ctx: Self::Ctx) -> Self;
    fn from_integer(v: &Integer, ctx: Self::Ctx) -> Self;
    /// Rounds a full-precision value into this tier.
    fn demote(v: &Float, ctx: Self::Ctx) -> Result<Self>;
    fn promote(&self, bits: u32) -> Float;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn sqrt(&self) -> Self;
    fn hypot(&self, o: &Self) -> Self;
    fn abs(&self) -> Self;
    fn neg(&self) -> Self;
    /// `self += t * x`
    fn add_mul(&mut self, t: &Self, x: &Self);
    /// `self -= t * x`
    fn sub_mul(&mut self, t: &Self, x: &Self);
    fn nint(&self) -> Self;
    fn mul_pow2(&self, e: i32) -> Self;

    fn is_zero(&self) -> bool;
    fn is_finite(&self) -> bool;
    fn cmp_abs(&self, o: &Self) -> Ordering;
    fn lt(&self, o: &Self) -> bool;
    /// Exact equality of representation.
    fn bit_eq(&self, o: &Self) -> bool;
    fn log10_abs(&self) -> f64;
    /// Binary exponent `e` with `2^(e-1) <= |x| < 2^e`, `None` for zero.
    fn exp2(&self) -> Option<i64>;
    fn to_f64(&self) -> f64;
}

/// Integer-valued matrix entry paired with a real tier.
pub trait Entry<R: Real>: Clone + Debug + Send + Sync + PartialEq + 'static {
    fn zero(ctx: R::Ctx) -> Self;
    fn one(ctx: R::Ctx) -> Self;
    /// Converts an integer-valued real multiplier.
    fn from_nint(t: &R) -> Result<Self>;
    /// Exact conversion from an integer; fails if the tier cannot hold it.
    fn from_integer(v: &Integer, ctx: R::Ctx) -> Result<Self>;
    /// Exact conversion to an integer; fails if the stored value is not integral.
    fn to_integer(&self) -> Result<Integer>;
    /// `self += t * x`
    fn add_mul(&mut self, t: &Self, x: &Self);
    /// `self -= t * x`
    fn sub_mul(&mut self, t: &Self, x: &Self);
    /// `self * r` rounded at the real tier.
    fn mul_real(&self, r: &R) -> R;
    fn cmp_abs(&self, o: &Self) -> Ordering;
    fn is_zero(&self) -> bool;
    fn log10_abs(&self) -> f64;
}

impl Real for f64 {
    type Ctx = ();

    fn ctx(&self) {}
    fn from_i64(v: i64, _: ()) -> Self {
        v as f64
    }
    fn from_integer(v: &Integer, _: ()) -> Self {
        v.to_f64()
    }
    fn demote(v: &Float, _: ()) -> Result<Self> {
        demote_f64(v)
    }
    fn promote(&self, bits: u32) -> Float {
        Float::with_val(bits, *self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn hypot(&self, o: &Self) -> Self {
        f64::hypot(*self, *o)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn add_mul(&mut self, t: &Self, x: &Self) {
        *self += t * x;
    }
    fn sub_mul(&mut self, t: &Self, x: &Self) {
        *self -= t * x;
    }
    fn nint(&self) -> Self {
        self.round()
    }
    fn mul_pow2(&self, e: i32) -> Self {
        self * 2f64.powi(e)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn cmp_abs(&self, o: &Self) -> Ordering {
        self.abs().total_cmp(&o.abs())
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn bit_eq(&self, o: &Self) -> bool {
        self.to_bits() == o.to_bits()
    }
    fn log10_abs(&self) -> f64 {
        self.abs().log10()
    }
    fn exp2(&self) -> Option<i64> {
        if *self == 0.0 || !self.is_finite() {
            return None;
        }
        Some(self.abs().log2().floor() as i64 + 1)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Real for Float {
    type Ctx = u32;

    fn ctx(&self) -> u32 {
        self.prec()
    }
    fn from_i64(v: i64, prec: u32) -> Self {
        Float::with_val(prec, v)
    }
    fn from_integer(v: &Integer, prec: u32) -> Self {
        Float::with_val(prec, v)
    }
    fn demote(v: &Float, prec: u32) -> Result<Self> {
        Ok(Float::with_val(prec, v))
    }
    fn promote(&self, bits: u32) -> Float {
        Float::with_val(bits, self)
    }
    fn add(&self, o: &Self) -> Self {
        (self + o).complete(self.prec())
    }
    fn sub(&self, o: &Self) -> Self {
        (self - o).complete(self.prec())
    }
    fn mul(&self, o: &Self) -> Self {
        (self * o).complete(self.prec())
    }
    fn div(&self, o: &Self) -> Self {
        (self / o).complete(self.prec())
    }
    fn sqrt(&self) -> Self {
        self.clone().sqrt()
    }
    fn hypot(&self, o: &Self) -> Self {
        self.clone().hypot(o)
    }
    fn abs(&self) -> Self {
        self.clone().abs()
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn add_mul(&mut self, t: &Self, x: &Self) {
        *self += t * x;
    }
    fn sub_mul(&mut self, t: &Self, x: &Self) {
        *self -= t * x;
    }
    fn nint(&self) -> Self {
        self.clone().round()
    }
    fn mul_pow2(&self, e: i32) -> Self {
        let mut r = self.clone();
        r <<= e;
        r
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn is_finite(&self) -> bool {
        Float::is_finite(self)
    }
    fn cmp_abs(&self, o: &Self) -> Ordering {
        Float::cmp_abs(self, o).unwrap_or(Ordering::Equal)
    }
    fn lt(&self, o: &Self) -> bool {
        self < o
    }
    fn bit_eq(&self, o: &Self) -> bool {
        self.prec() == o.prec() && (self == o || (self.is_nan() && o.is_nan()))
    }
    fn log10_abs(&self) -> f64 {
        if Float::is_zero(self) {
            return f64::NEG_INFINITY;
        }
        let (m, e) = self.to_f64_exp();
        m.abs().log10() + e as f64 * std::f64::consts::LOG10_2
    }
    fn exp2(&self) -> Option<i64> {
        self.get_exp().map(i64::from)
    }
    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }
}

impl Entry<Float> for Integer {
    fn zero(_: u32) -> Self {
        Integer::new()
    }
    fn one(_: u32) -> Self {
        Integer::from(1)
    }
    fn from_nint(t: &Float) -> Result<Self> {
        t.to_integer()
            .ok_or_else(|| Error::TierOverflow(t.to_string()))
    }
    fn from_integer(v: &Integer, _: u32) -> Result<Self> {
        Ok(v.clone())
    }
    fn to_integer(&self) -> Result<Integer> {
        Ok(self.clone())
    }
    fn add_mul(&mut self, t: &Self, x: &Self) {
        *self += t * x;
    }
    fn sub_mul(&mut self, t: &Self, x: &Self) {
        *self -= t * x;
    }
    fn mul_real(&self, r: &Float) -> Float {
        (r * self).complete(r.prec())
    }
    fn cmp_abs(&self, o: &Self) -> Ordering {
        Integer::cmp_abs(self, o)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == Ordering::Equal
    }
    fn log10_abs(&self) -> f64 {
        if Entry::<Float>::is_zero(self) {
            return f64::NEG_INFINITY;
        }
        let (m, e) = self.to_f64_exp();
        m.abs().log10() + e as f64 * std::f64::consts::LOG10_2
    }
}

impl Entry<f64> for f64 {
    fn zero(_: ()) -> Self {
        0.0
    }
    fn one(_: ()) -> Self {
        1.0
    }
    fn from_nint(t: &f64) -> Result<Self> {
        Ok(*t)
    }
    fn from_integer(v: &Integer, _: ()) -> Result<Self> {
        let f = v.to_f64();
        if f.abs() > F64_EXACT_LIMIT {
            return Err(Error::TierOverflow(v.to_string()));
        }
        Ok(f)
    }
    fn to_integer(&self) -> Result<Integer> {
        if !is_exact_int(*self, F64_EXACT_LIMIT) {
            return Err(Error::InexactShadow(self.to_string()));
        }
        Integer::from_f64(*self).ok_or_else(|| Error::InexactShadow(self.to_string()))
    }
    fn add_mul(&mut self, t: &Self, x: &Self) {
        *self += t * x;
    }
    fn sub_mul(&mut self, t: &Self, x: &Self) {
        *self -= t * x;
    }
    fn mul_real(&self, r: &f64) -> f64 {
        self * r
    }
    fn cmp_abs(&self, o: &Self) -> Ordering {
        self.abs().total_cmp(&o.abs())
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn log10_abs(&self) -> f64 {
        self.abs().log10()
    }
}

impl Entry<Float> for Float {
    fn zero(prec: u32) -> Self {
        Float::new(prec)
    }
    fn one(prec: u32) -> Self {
        Float::with_val(prec, 1)
    }
    fn from_nint(t: &Float) -> Result<Self> {
        Ok(t.clone())
    }
    fn from_integer(v: &Integer, prec: u32) -> Result<Self> {
        if v.significant_bits() > prec {
            return Err(Error::TierOverflow(v.to_string()));
        }
        Ok(Float::with_val(prec, v))
    }
    fn to_integer(&self) -> Result<Integer> {
        if !self.is_integer() {
            return Err(Error::InexactShadow(self.to_string()));
        }
        Float::to_integer(self).ok_or_else(|| Error::InexactShadow(self.to_string()))
    }
    fn add_mul(&mut self, t: &Self, x: &Self) {
        *self += t * x;
    }
    fn sub_mul(&mut self, t: &Self, x: &Self) {
        *self -= t * x;
    }
    fn mul_real(&self, r: &Float) -> Float {
        (r * self).complete(r.prec())
    }
    fn cmp_abs(&self, o: &Self) -> Ordering {
        Float::cmp_abs(self, o).unwrap_or(Ordering::Equal)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn log10_abs(&self) -> f64 {
        Real::log10_abs(self)
    }
}
