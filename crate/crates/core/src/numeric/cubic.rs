use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::Scalar;
use crate::error::ItmError;

/// The cubic `x^3 - x^2 - kx + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CubicPolynomialPk {
    pub k: u64,
}

impl CubicPolynomialPk {
    pub fn new(k: u64) -> Result<Self, ItmError> {
        if k == 0 {
            return Err(ItmError::InvalidArgument("P_k needs k >= 1".into()));
        }
        Ok(CubicPolynomialPk { k })
    }

    /// Coefficients from the constant term up.
    pub fn coefficients(&self) -> [BigInt; 4] {
        [BigInt::one(), -BigInt::from(self.k), -BigInt::one(), BigInt::one()]
    }

    pub fn eval<S: Scalar>(&self, x: &S) -> S {
        poly_eval(self, x)
    }

    fn eval_q(&self, x: &BigRational) -> BigRational {
        let k = BigRational::from_integer(BigInt::from(self.k));
        // Horner: ((x - 1) x - k) x + 1
        ((x - BigRational::one()) * x - k) * x + BigRational::one()
    }

    fn derivative_q(&self, x: &BigRational) -> BigRational {
        let k = BigRational::from_integer(BigInt::from(self.k));
        let three = BigRational::from_integer(BigInt::from(3));
        let two = BigRational::from_integer(BigInt::from(2));
        (three * x - two) * x - k
    }
}

/// `x^3 - x^2 - kx + 1`, exact for exact scalars.
pub fn poly_eval<S: Scalar>(p: &CubicPolynomialPk, x: &S) -> S {
    let k = x.int(p.k as i64);
    ((x.clone() - x.one_like()) * x.clone() - k) * x.clone() + x.one_like()
}

/// Which of the three real roots of `P_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RootKind {
    /// The negative root, in `(-k-1, 0)`.
    Lower,
    /// The root in `(1/(k+1), 1/k]`.
    Middle,
    /// The largest root, in `(1, k+1)`.
    Upper,
}

/// One real root of `P_k`, represented by a rational isolating bracket or, in
/// the degenerate `k = 1` case, by its exact value.
#[derive(Clone, Debug)]
pub struct AlgebraicRoot {
    pub polynomial: CubicPolynomialPk,
    pub kind: RootKind,
    lo: BigRational,
    hi: BigRational,
    /// Sign of `P_k(lo)`; the sign at `hi` is the opposite.
    sign_lo: Ordering,
    exact: Option<BigRational>,
}

impl AlgebraicRoot {
    fn isolate(k: u64, kind: RootKind) -> Self {
        let polynomial = CubicPolynomialPk { k };
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        if k == 1 {
            let v = match kind {
                RootKind::Lower => q(-1, 1),
                _ => q(1, 1),
            };
            return AlgebraicRoot {
                polynomial,
                kind,
                lo: v.clone(),
                hi: v.clone(),
                sign_lo: Ordering::Equal,
                exact: Some(v),
            };
        }
        let k = k as i64;
        let (lo, hi) = match kind {
            RootKind::Lower => (q(-k - 1, 1), q(0, 1)),
            RootKind::Middle => (q(1, k + 1), q(1, k)),
            RootKind::Upper => (q(1, 1), q(k + 1, 1)),
        };
        let sign_lo = polynomial.eval_q(&lo).cmp(&BigRational::zero());
        debug_assert_ne!(sign_lo, Ordering::Equal);
        AlgebraicRoot { polynomial, kind, lo, hi, sign_lo, exact: None }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn sign_at_lo(&self) -> Ordering {
        self.sign_lo
    }

    pub fn exact_value(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }

    fn sign_at(&self, x: &BigRational) -> Ordering {
        self.polynomial.eval_q(x).cmp(&BigRational::zero())
    }

    /// Halves the bracket.
    pub fn refine(&mut self) {
        if self.exact.is_some() {
            return;
        }
        let mid = self.midpoint();
        match self.sign_at(&mid) {
            Ordering::Equal => unreachable!("P_k has no rational roots for k >= 2"),
            s if s == self.sign_lo => self.lo = mid,
            _ => self.hi = mid,
        }
    }

    /// Shrinks the bracket to width at most `tol`, using Newton steps that
    /// are accepted only when they produce a verified smaller bracket.
    pub fn refine_to(&mut self, tol: &BigRational) {
        if self.exact.is_some() {
            return;
        }
        while self.width() > *tol {
            let w = self.width();
            if !self.try_newton(tol, &w) {
                self.refine();
            }
        }
    }

    fn try_newton(&mut self, tol: &BigRational, width: &BigRational) -> bool {
        let mid = self.midpoint();
        let d = self.polynomial.derivative_q(&mid);
        if d.is_zero() {
            return false;
        }
        let x = &mid - self.polynomial.eval_q(&mid) / d;
        // Target a bracket well below both the tolerance and the current
        // width; Newton roughly squares the error, so w^2 is a fair guess.
        let target = (width * width).min(tol.clone()) / BigRational::from_integer(BigInt::from(4));
        let target = if target.is_zero() { tol.clone() } else { target };
        let bits = dyadic_bits(&target);
        let x = round_dyadic(&x, bits);
        let delta = BigRational::new(BigInt::one(), BigInt::one() << bits);
        let (a, b) = (&x - &delta, &x + &delta);
        if a <= self.lo || b >= self.hi {
            return false;
        }
        let (sa, sb) = (self.sign_at(&a), self.sign_at(&b));
        if sa == self.sign_lo && sb != self.sign_lo {
            if sb == Ordering::Equal {
                return false;
            }
            self.lo = a;
            self.hi = b;
            true
        } else {
            false
        }
    }
}

/// Smallest `m` with `2^-m <= t` (for positive `t`).
fn dyadic_bits(t: &BigRational) -> usize {
    let r = t.recip();
    let c = r.ceil().to_integer();
    c.bits() as usize
}

fn round_dyadic(x: &BigRational, bits: usize) -> BigRational {
    let scale = BigInt::one() << bits;
    let n = (x * BigRational::from_integer(scale.clone())).round().to_integer();
    BigRational::new(n, scale)
}

/// The three roots `r_low < r <= r_up` of `P_k`.
#[derive(Clone, Debug)]
pub struct PkRoots {
    pub lower: AlgebraicRoot,
    pub middle: AlgebraicRoot,
    pub upper: AlgebraicRoot,
}

/// Isolates the three real roots of `P_k` to brackets of width at most
/// `tol`. For `k = 1` the roots are exactly `(-1, 1, 1)`.
pub fn pk_roots(k: u64, tol: &BigRational) -> Result<PkRoots, ItmError> {
    CubicPolynomialPk::new(k)?;
    if !tol.is_positive() {
        return Err(ItmError::InvalidArgument("root tolerance must be positive".into()));
    }
    let mut roots = PkRoots {
        lower: AlgebraicRoot::isolate(k, RootKind::Lower),
        middle: AlgebraicRoot::isolate(k, RootKind::Middle),
        upper: AlgebraicRoot::isolate(k, RootKind::Upper),
    };
    roots.lower.refine_to(tol);
    roots.middle.refine_to(tol);
    roots.upper.refine_to(tol);
    Ok(roots)
}

impl PkRoots {
    pub fn get(&self, kind: RootKind) -> &AlgebraicRoot {
        match kind {
            RootKind::Lower => &self.lower,
            RootKind::Middle => &self.middle,
            RootKind::Upper => &self.upper,
        }
    }
}

pub(crate) fn isolate_root(k: u64, kind: RootKind) -> AlgebraicRoot {
    AlgebraicRoot::isolate(k, kind)
}
