use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use super::Scalar;
use crate::error::ItmError;

impl Scalar for BigRational {
    fn int(&self, n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ratio(&self, q: &BigRational) -> Self {
        q.clone()
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn sign_with_margin(&self, _margin: f64) -> Option<Ordering> {
        Some(if self.is_zero() {
            Ordering::Equal
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        })
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }

    fn floor_int(&self) -> Option<BigInt> {
        Some(self.numer().div_floor(self.denom()))
    }

    fn approx_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            let l = ln_rational(&self.abs());
            if self.is_negative() {
                -l.exp()
            } else {
                l.exp()
            }
        })
    }

    fn add_error(&self) -> f64 {
        0.0
    }

    fn resolution(&self) -> f64 {
        0.0
    }
}

/// Parses `p/q`, an integer, or a decimal such as `-0.125` or `3.5e-4`,
/// exactly (decimals become `d / 10^n`).
pub fn parse_rational(s: &str) -> Result<BigRational, ItmError> {
    let s = s.trim();
    let bad = || ItmError::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(ItmError::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(digits * Pow::pow(&ten, scale as u32))
    } else {
        BigRational::new(digits, Pow::pow(&ten, scale.unsigned_abs()))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Natural log of a positive integer, accurate to about 1e-15 relative for
/// any size.
pub fn ln_bigint(n: &BigInt) -> f64 {
    debug_assert!(n.is_positive());
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().map(f64::ln).unwrap_or(f64::NAN);
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of a positive rational, safe for huge numerators and
/// denominators.
pub fn ln_rational(q: &BigRational) -> f64 {
    if !q.is_positive() {
        return f64::NAN;
    }
    if q.is_one() {
        return 0.0;
    }
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}
