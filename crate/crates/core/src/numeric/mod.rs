//! Arithmetic substrate.
//!
//! Everything in the crate is generic over [`Scalar`], which has three
//! implementations:
//!
//! * [`BigRational`] exact rationals, always in lowest terms;
//! * [`BigFloat`] binary floating point with a per-value precision in bits;
//! * [`AlgebraicNum`] exact elements of the cubic field generated by one root
//!   of `x^3 - x^2 - kx + 1`, used for the fixed points of the Gauss map.
//!
//! Constants are created from an existing value (`x.int(1)`) so that they
//! inherit its precision or number field.

mod algebraic;
mod bigfloat;
mod cubic;
mod rational;

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;

pub use algebraic::{AlgebraicNum, CubicField};
pub use bigfloat::BigFloat;
pub use cubic::{pk_roots, poly_eval, AlgebraicRoot, CubicPolynomialPk, PkRoots, RootKind};
pub use rational::{ln_bigint, ln_rational, parse_rational};

/// Number type all dynamics are computed over.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Eq
    + Hash
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Integer constant in the same context (precision, number field) as `self`.
    fn int(&self, n: i64) -> Self;

    /// Rational constant in the same context as `self`.
    fn ratio(&self, q: &BigRational) -> Self;

    /// True when field operations and comparisons are error-free.
    fn is_exact(&self) -> bool;

    /// Sign of the value, `None` when a floating value is too close to zero
    /// to be decided (closer than `max(margin, resolution)`).
    ///
    /// Exact types ignore `margin`.
    fn sign_with_margin(&self, margin: f64) -> Option<Ordering>;

    /// Ordering of the stored representations. Exact for exact types.
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// `floor(self)`, or `None` when a floating value lies within its
    /// resolution of an integer.
    fn floor_int(&self) -> Option<BigInt>;

    fn approx_f64(&self) -> f64;

    /// Absolute error bound of one addition whose operands and result lie in
    /// `[-2, 2]`. Zero for exact types.
    fn add_error(&self) -> f64;

    /// Comparisons closer than this are reported as undecidable. Zero for
    /// exact types.
    fn resolution(&self) -> f64;

    fn sign(&self) -> Option<Ordering> {
        self.sign_with_margin(0.0)
    }

    fn try_cmp(&self, other: &Self) -> Option<Ordering> {
        (self.clone() - other.clone()).sign()
    }

    fn zero_like(&self) -> Self {
        self.int(0)
    }

    fn one_like(&self) -> Self {
        self.int(1)
    }

    fn abs_val(&self) -> Self {
        match self.total_cmp(&self.zero_like()) {
            Ordering::Less => -self.clone(),
            _ => self.clone(),
        }
    }

    fn inv(&self) -> Self {
        self.one_like() / self.clone()
    }
}

/// Global arithmetic mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Mode {
    Exact,
    Float(u32),
}

impl Mode {
    /// Parses `exact` or `float:<bits>`.
    pub fn parse(s: &str) -> Option<Mode> {
        if s == "exact" {
            return Some(Mode::Exact);
        }
        let bits = s.strip_prefix("float:")?.parse::<u32>().ok()?;
        (bits >= 16).then_some(Mode::Float(bits))
    }
}

static DEFAULT_PRECISION: OnceLock<u32> = OnceLock::new();

/// Precision used by `Mode::Float` when none is given.
pub const FALLBACK_PRECISION_BITS: u32 = 256;

/// Sets the default float precision. Only the first call has any effect;
/// returns whether this call set it.
pub fn set_default_precision(bits: u32) -> bool {
    DEFAULT_PRECISION.set(bits).is_ok()
}

pub fn default_precision() -> u32 {
    *DEFAULT_PRECISION.get_or_init(|| FALLBACK_PRECISION_BITS)
}
