//! The interval translation map `T(x) = x + α` on `[0, 1-α)`, `x + β` on
//! `[1-α, 1-β)` and `x + β - 1` on `[1-β, 1)`, with `T(1) = β`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use crate::error::{ItmError, Result};
use crate::numeric::Scalar;
use crate::subshift::{Word, WordOrigin};

/// Where a parameter pair sits relative to `U = {0 <= β <= α <= 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    /// `0 < β < α < 1`.
    InteriorU,
    /// `α = 1` or `α = β`: the map is a circle rotation.
    BoundaryRotation,
    /// `β = 0`.
    BoundaryBetaZero,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ItmParams<S> {
    pub alpha: S,
    pub beta: S,
    pub region: Region,
}

impl<S: Scalar> ItmParams<S> {
    pub fn new(alpha: S, beta: S) -> Self {
        let region = region_of(&alpha, &beta);
        ItmParams { alpha, beta, region }
    }

    /// Like [`ItmParams::new`] but rejects pairs outside `U`.
    pub fn checked(alpha: S, beta: S) -> Result<Self> {
        let p = Self::new(alpha, beta);
        if p.region == Region::Invalid {
            return Err(ItmError::InvalidParams { alpha: p.alpha.to_string(), beta: p.beta.to_string() });
        }
        Ok(p)
    }
}

fn region_of<S: Scalar>(alpha: &S, beta: &S) -> Region {
    let zero = alpha.zero_like();
    let one = alpha.one_like();
    let ge = |a: &S, b: &S| a.total_cmp(b) != Ordering::Less;
    if !(ge(beta, &zero) && ge(alpha, beta) && ge(&one, alpha)) {
        return Region::Invalid;
    }
    if alpha.total_cmp(&one) == Ordering::Equal || alpha.total_cmp(beta) == Ordering::Equal {
        Region::BoundaryRotation
    } else if beta.total_cmp(&zero) == Ordering::Equal {
        Region::BoundaryBetaZero
    } else {
        Region::InteriorU
    }
}

/// Branch domain `B_1 = [0, 1-α)`, `B_2 = [1-α, 1-β)`, `B_3 = [1-β, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Branch {
    B1 = 1,
    B2 = 2,
    B3 = 3,
}

impl Branch {
    pub fn symbol(self) -> u8 {
        self as u8
    }

    pub fn from_symbol(s: u8) -> Option<Branch> {
        match s {
            1 => Some(Branch::B1),
            2 => Some(Branch::B2),
            3 => Some(Branch::B3),
            _ => None,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

fn check_domain<S: Scalar>(x: &S) -> Result<()> {
    if x.total_cmp(&x.zero_like()) == Ordering::Less || x.total_cmp(&x.one_like()) == Ordering::Greater {
        return Err(ItmError::OutOfDomain(x.to_string()));
    }
    Ok(())
}

fn require_valid<S: Scalar>(p: &ItmParams<S>) -> Result<()> {
    if p.region == Region::Invalid {
        return Err(ItmError::InvalidParams { alpha: p.alpha.to_string(), beta: p.beta.to_string() });
    }
    Ok(())
}

/// Branch of `x` in `[0, 1)` by direct comparison (no indeterminacy
/// reporting).
fn branch_of<S: Scalar>(p: &ItmParams<S>, x: &S) -> Branch {
    let one = x.one_like();
    if x.total_cmp(&(one.clone() - p.alpha.clone())) == Ordering::Less {
        Branch::B1
    } else if x.total_cmp(&(one - p.beta.clone())) == Ordering::Less {
        Branch::B2
    } else {
        Branch::B3
    }
}

/// Branch of `x`, or `None` when `x` lies within `margin` (or the scalar's
/// resolution) of a discontinuity.
pub fn branch_certified<S: Scalar>(p: &ItmParams<S>, x: &S, margin: f64) -> Option<Branch> {
    let one = x.one_like();
    let d1 = x.clone() - (one.clone() - p.alpha.clone());
    match d1.sign_with_margin(margin)? {
        Ordering::Less => return Some(Branch::B1),
        _ if p.alpha.total_cmp(&p.beta) == Ordering::Equal => return Some(Branch::B3),
        _ => {}
    }
    let d2 = x.clone() - (one - p.beta.clone());
    match d2.sign_with_margin(margin)? {
        Ordering::Less => Some(Branch::B2),
        _ => Some(Branch::B3),
    }
}

fn apply<S: Scalar>(p: &ItmParams<S>, x: S, b: Branch) -> S {
    match b {
        Branch::B1 => x + p.alpha.clone(),
        Branch::B2 => x + p.beta.clone(),
        Branch::B3 => x + p.beta.clone() - p.beta.one_like(),
    }
}

/// One application of `T`.
pub fn eval_t<S: Scalar>(p: &ItmParams<S>, x: &S) -> Result<(S, Branch)> {
    require_valid(p)?;
    check_domain(x)?;
    if x.total_cmp(&x.one_like()) == Ordering::Equal {
        return Ok((p.beta.clone(), Branch::B3));
    }
    let b = branch_of(p, x);
    Ok((apply(p, x.clone(), b), b))
}

#[derive(Clone, Debug)]
pub struct Orbit<S> {
    /// `(x_i, branch of x_i)` for `i = 0..=n`.
    pub points: Vec<(S, Branch)>,
    /// `(preperiod, period)` once a state repeats (exact scalars only).
    pub cycle: Option<(usize, usize)>,
}

/// `x_0, ..., x_n` with their branches. For exact scalars the first repeated
/// state is detected and reported as `(preperiod, period)`.
pub fn orbit<S: Scalar>(p: &ItmParams<S>, x0: &S, n: usize) -> Result<Orbit<S>> {
    require_valid(p)?;
    check_domain(x0)?;
    let exact = x0.is_exact();
    let mut seen: HashMap<S, usize> = HashMap::new();
    let mut points = Vec::with_capacity(n + 1);
    let mut cycle = None;
    let mut x = x0.clone();
    for i in 0..=n {
        let (y, b) = eval_t(p, &x)?;
        if exact && cycle.is_none() {
            if let Some(&j) = seen.get(&x) {
                cycle = Some((j, i - j));
            } else {
                seen.insert(x.clone(), i);
            }
        }
        points.push((x, b));
        x = y;
    }
    Ok(Orbit { points, cycle })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Itinerary {
    pub word: Word,
    /// Position whose branch could not be certified; `word` stops there.
    pub indeterminate_at: Option<usize>,
}

/// The itinerary `s_0 s_1 ... s_{n-1}` of the point 1: `s_0 = 3` and `s_i` is
/// the branch of `T^{i-1}(β)`.
///
/// For floating scalars every branch decision is certified against a running
/// bound on the accumulated error (including one unit of representation
/// error in each parameter). The word is truncated at the first position
/// that cannot be certified.
pub fn numeric_itinerary<S: Scalar>(p: &ItmParams<S>, n: usize) -> Result<Itinerary> {
    require_valid(p)?;
    if n == 0 {
        return Err(ItmError::InvalidArgument("itinerary length must be at least 1".into()));
    }
    let mut symbols = Vec::with_capacity(n);
    symbols.push(3u8);
    let param_err = p.alpha.add_error();
    let op_err = p.alpha.add_error();
    let beta_minus_one = p.beta.clone() - p.beta.one_like();
    let mut x = p.beta.clone();
    let mut err = param_err;
    let mut indeterminate_at = None;
    for i in 1..n {
        // The thresholds 1-α and 1-β carry their own parameter and rounding
        // error on top of the error in x.
        let margin = err + param_err + op_err;
        let b = if x.is_exact() { Some(branch_of(p, &x)) } else { branch_certified(p, &x, margin) };
        let Some(b) = b else {
            indeterminate_at = Some(i);
            break;
        };
        symbols.push(b.symbol());
        x = match b {
            Branch::B1 => x + p.alpha.clone(),
            Branch::B2 => x + p.beta.clone(),
            Branch::B3 => x + beta_minus_one.clone(),
        };
        err += param_err + 2.0 * op_err;
    }
    Ok(Itinerary { word: Word::new(symbols, WordOrigin::NumericItinerary), indeterminate_at })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn params(a: (i64, i64), b: (i64, i64)) -> ItmParams<BigRational> {
        ItmParams::new(q(a.0, a.1), q(b.0, b.1))
    }

    #[test]
    fn regions() {
        assert_eq!(params((1, 2), (1, 4)).region, Region::InteriorU);
        assert_eq!(params((1, 2), (1, 2)).region, Region::BoundaryRotation);
        assert_eq!(params((1, 1), (1, 3)).region, Region::BoundaryRotation);
        assert_eq!(params((1, 2), (0, 1)).region, Region::BoundaryBetaZero);
        assert_eq!(params((1, 4), (1, 2)).region, Region::Invalid);
        assert_eq!(params((3, 2), (1, 2)).region, Region::Invalid);
    }

    #[test]
    fn eval_examples() {
        let p = params((1, 2), (1, 4));
        assert_eq!(eval_t(&p, &q(1, 10)).unwrap(), (q(3, 5), Branch::B1));
        assert_eq!(eval_t(&p, &q(4, 5)).unwrap(), (q(1, 20), Branch::B3));
        assert_eq!(eval_t(&p, &q(1, 1)).unwrap(), (q(1, 4), Branch::B3));
        assert_eq!(eval_t(&p, &q(1, 2)).unwrap(), (q(3, 4), Branch::B2));
        assert!(eval_t(&p, &q(-1, 10)).is_err());
        assert!(eval_t(&p, &q(11, 10)).is_err());
        assert!(eval_t(&params((1, 4), (1, 2)), &q(0, 1)).is_err());
    }

    #[test]
    fn orbit_examples() {
        let rot = params((1, 2), (1, 2));
        let o = orbit(&rot, &q(0, 1), 4).unwrap();
        let xs: Vec<_> = o.points.iter().map(|(x, _)| x.clone()).collect();
        assert_eq!(xs, vec![q(0, 1), q(1, 2), q(0, 1), q(1, 2), q(0, 1)]);
        assert_eq!(o.cycle, Some((0, 2)));

        let p = params((1, 2), (1, 4));
        let o = orbit(&p, &q(1, 1), 3).unwrap();
        let xs: Vec<_> = o.points.iter().map(|(x, _)| x.clone()).collect();
        assert_eq!(xs, vec![q(1, 1), q(1, 4), q(3, 4), q(0, 1)]);

        // α = 1 rotates by β.
        let p = params((1, 1), (1, 3));
        let o = orbit(&p, &q(1, 6), 3).unwrap();
        let xs: Vec<_> = o.points.iter().map(|(x, _)| x.clone()).collect();
        assert_eq!(xs, vec![q(1, 6), q(1, 2), q(5, 6), q(1, 6)]);
        assert_eq!(o.cycle, Some((0, 3)));
        // (1, 0) is the identity.
        let id = params((1, 1), (0, 1));
        let o = orbit(&id, &q(2, 7), 5).unwrap();
        assert!(o.points.iter().all(|(x, _)| *x == q(2, 7)));
    }

    #[test]
    fn itinerary_examples() {
        let rot = params((1, 2), (1, 2));
        assert_eq!(numeric_itinerary(&rot, 4).unwrap().word.to_string(), "3313");
        let p = params((1, 2), (1, 4));
        assert_eq!(numeric_itinerary(&p, 1).unwrap().word.to_string(), "3");
        assert!(numeric_itinerary(&p, 0).is_err());
    }

    #[test]
    fn float_itinerary_flags_discontinuity() {
        use crate::numeric::BigFloat;
        // x_1 = β = 1/2 = 1 - α sits exactly on a discontinuity.
        let half = BigFloat::from_rational(&q(1, 2), 64);
        let it = numeric_itinerary(&ItmParams::new(half.clone(), half), 4).unwrap();
        assert_eq!(it.indeterminate_at, Some(1));
        assert_eq!(it.word.to_string(), "3");
    }
}
