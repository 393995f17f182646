use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::Scalar;

/// Binary floating point number `mant * 2^exp` with a working precision of
/// `prec` bits. Every operation rounds to nearest, ties to even, so its
/// relative error is at most `2^-prec`.
///
/// The mantissa is kept odd (or zero), which makes the representation of a
/// value unique; equality and hashing ignore `prec`.
#[derive(Clone, Debug)]
pub struct BigFloat {
    mant: BigInt,
    exp: i64,
    prec: u32,
}

impl BigFloat {
    pub fn zero(prec: u32) -> Self {
        BigFloat { mant: BigInt::zero(), exp: 0, prec }
    }

    pub fn from_int(n: i64, prec: u32) -> Self {
        Self::round(BigInt::from(n), 0, false, prec)
    }

    pub fn from_bigint(n: BigInt, prec: u32) -> Self {
        Self::round(n, 0, false, prec)
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        Self::quotient(q.numer().clone(), 0, q.denom().clone(), 0, prec)
    }

    /// Nearest representable value to `x`; exact when `prec >= 53`.
    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite(), "BigFloat::from_f64 of non-finite value");
        if x == 0.0 {
            return Self::zero(prec);
        }
        let bits = x.abs().to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), raw_exp - 1075) };
        let m = if x < 0.0 { -BigInt::from(m) } else { BigInt::from(m) };
        Self::round(m, e, false, prec)
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        Self::round(self.mant.clone(), self.exp, false, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    /// Exact rational value of the stored representation.
    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            BigRational::new(self.mant.clone(), BigInt::from(1) << (-self.exp) as usize)
        }
    }

    /// Position of the leading bit: `2^(top-1) <= |x| < 2^top`.
    fn top(&self) -> i64 {
        self.mant.bits() as i64 + self.exp
    }

    /// Rounds `mant * 2^exp` to `prec` bits. `sticky` records that the true
    /// value has nonzero bits below `mant`'s last bit (in the same direction
    /// as `mant`'s sign).
    fn round(mant: BigInt, exp: i64, sticky: bool, prec: u32) -> Self {
        let prec = prec.max(2);
        if mant.is_zero() {
            return Self::zero(prec);
        }
        let bits = mant.bits();
        let (mut m, mut e) = if bits > prec as u64 {
            let shift = bits - prec as u64;
            let neg = mant.is_negative();
            let mag = mant.magnitude();
            let kept = mag >> shift;
            let half_bit = mag.bit(shift - 1);
            let below_half = sticky || mag.trailing_zeros().is_some_and(|tz| tz < shift - 1);
            let round_up = half_bit && (below_half || kept.bit(0));
            let kept = if round_up { kept + 1u32 } else { kept };
            let kept = BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, kept);
            (kept, exp + shift as i64)
        } else {
            (mant, exp)
        };
        if let Some(tz) = m.trailing_zeros() {
            if tz > 0 {
                m >>= tz as usize;
                e += tz as i64;
            }
        }
        BigFloat { mant: m, exp: e, prec }
    }

    /// Correctly rounded `(a * 2^ea) / (b * 2^eb)`.
    fn quotient(a: BigInt, ea: i64, b: BigInt, eb: i64, prec: u32) -> Self {
        assert!(!b.is_zero(), "BigFloat division by zero");
        if a.is_zero() {
            return Self::zero(prec);
        }
        let shift = (prec as i64 + 2 + b.bits() as i64 - a.bits() as i64).max(0);
        let num = a << shift as usize;
        let (q, r) = num.div_rem(&b);
        let neg = q.is_negative() || (q.is_zero() && (num.is_negative() != b.is_negative()));
        // Append one bit so that the remainder acts as a sticky bit below the
        // guard position.
        let mut q2 = q << 1usize;
        if !r.is_zero() {
            if neg {
                q2 -= 1;
            } else {
                q2 += 1;
            }
        }
        Self::round(q2, ea - eb - shift - 1, false, prec)
    }

    fn sum(&self, other: &Self, prec: u32) -> Self {
        if self.is_zero() {
            return other.with_precision(prec);
        }
        if other.is_zero() {
            return self.with_precision(prec);
        }
        let (big, small) = if self.top() >= other.top() { (self, other) } else { (other, self) };
        // A summand far below the rounding position only matters through its
        // sign; replace it by a tiny stand-in to avoid huge shifts.
        let floor_exp = big.top() - prec as i64 - 4;
        let small_owned;
        let small = if small.top() < floor_exp {
            let sign = if small.mant.is_negative() { -1 } else { 1 };
            small_owned = BigFloat { mant: BigInt::from(sign), exp: floor_exp - 1, prec };
            &small_owned
        } else {
            small
        };
        let e = big.exp.min(small.exp);
        let a = &big.mant << (big.exp - e) as usize;
        let b = &small.mant << (small.exp - e) as usize;
        Self::round(a + b, e, false, prec)
    }

    /// Decimal rendering with `digits` significant digits (truncated).
    pub fn to_decimal_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let q = self.to_rational();
        let neg = q.is_negative();
        let q = q.abs();
        let lg = super::rational::ln_rational(&q) / std::f64::consts::LN_10;
        let mut e10 = lg.floor() as i64;
        let ten = BigRational::from_integer(BigInt::from(10));
        let pow = |e: i64| -> BigRational {
            let p = BigRational::from_integer(num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize));
            if e >= 0 {
                p
            } else {
                p.recip()
            }
        };
        let mut scaled = &q / pow(e10);
        while scaled >= ten {
            scaled /= &ten;
            e10 += 1;
        }
        while scaled < BigRational::from_integer(BigInt::from(1)) {
            scaled *= &ten;
            e10 -= 1;
        }
        let digits = digits.max(1);
        let int = (scaled * pow(digits as i64 - 1)).to_integer().to_string();
        let (head, tail) = int.split_at(1);
        let tail = tail.trim_end_matches('0');
        let mut s = String::new();
        if neg {
            s.push('-');
        }
        s.push_str(head);
        if !tail.is_empty() {
            s.push('.');
            s.push_str(tail);
        }
        if e10 != 0 {
            s.push_str(&format!("e{e10}"));
        }
        s
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.mant == other.mant && (self.mant.is_zero() || self.exp == other.exp)
    }
}

impl Eq for BigFloat {}

impl Hash for BigFloat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.mant.hash(state);
        if !self.mant.is_zero() {
            self.exp.hash(state);
        }
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.prec as f64 * std::f64::consts::LOG10_2).floor() as usize;
        f.write_str(&self.to_decimal_string(digits))
    }
}

impl Add for BigFloat {
    type Output = BigFloat;
    fn add(self, rhs: BigFloat) -> BigFloat {
        let p = self.prec.max(rhs.prec);
        self.sum(&rhs, p)
    }
}

impl Sub for BigFloat {
    type Output = BigFloat;
    fn sub(self, rhs: BigFloat) -> BigFloat {
        let p = self.prec.max(rhs.prec);
        self.sum(&-rhs, p)
    }
}

impl Mul for BigFloat {
    type Output = BigFloat;
    fn mul(self, rhs: BigFloat) -> BigFloat {
        let p = self.prec.max(rhs.prec);
        Self::round(self.mant * rhs.mant, self.exp + rhs.exp, false, p)
    }
}

impl Div for BigFloat {
    type Output = BigFloat;
    fn div(self, rhs: BigFloat) -> BigFloat {
        let p = self.prec.max(rhs.prec);
        Self::quotient(self.mant, self.exp, rhs.mant, rhs.exp, p)
    }
}

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat { mant: -self.mant, exp: self.exp, prec: self.prec }
    }
}

impl Scalar for BigFloat {
    fn int(&self, n: i64) -> Self {
        BigFloat::from_int(n, self.prec)
    }

    fn ratio(&self, q: &BigRational) -> Self {
        BigFloat::from_rational(q, self.prec)
    }

    fn is_exact(&self) -> bool {
        false
    }

    fn sign_with_margin(&self, margin: f64) -> Option<Ordering> {
        if self.is_zero() {
            return None;
        }
        let threshold = margin.max(self.resolution());
        if self.approx_f64().abs() < threshold {
            return None;
        }
        Some(if self.mant.is_negative() { Ordering::Less } else { Ordering::Greater })
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        match (self.clone() - other.clone()).mant.sign() {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }

    fn floor_int(&self) -> Option<BigInt> {
        let fl = if self.exp >= 0 {
            &self.mant << self.exp as usize
        } else {
            // Arithmetic shift rounds toward negative infinity.
            &self.mant >> (-self.exp) as usize
        };
        let x = self.to_rational();
        let below = &x - BigRational::from_integer(fl.clone());
        let above = BigRational::from_integer(&fl + 1) - &x;
        let dist = below.min(above);
        let margin = self.resolution() * self.approx_f64().abs().max(1.0);
        if dist.to_f64().unwrap_or(0.0) < margin {
            None
        } else {
            Some(fl)
        }
    }

    fn approx_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let shift = (bits - 64).max(0);
        let m = (&self.mant >> shift as usize).to_f64().unwrap_or(0.0);
        let e = self.exp + shift;
        if e > 2000 {
            return m.signum() * f64::INFINITY;
        }
        if e < -2200 {
            return 0.0;
        }
        // Split the scaling to stay clear of intermediate overflow.
        let half = e / 2;
        m * 2f64.powi(half as i32) * 2f64.powi((e - half) as i32)
    }

    fn add_error(&self) -> f64 {
        2f64.powi(2 - self.prec as i32)
    }

    fn resolution(&self) -> f64 {
        2f64.powi(8 - self.prec as i32)
    }
}
