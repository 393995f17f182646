//! Upper bounds for the box dimension of the attractor closure from the
//! cover recursion `l_{i+1} = C_{k_i} l_i`, fixed-point dimensions
//! `-log(r̄_k)/log(r_k)` and the inequality used to build dimension-zero
//! examples.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{ItmError, Result};
use crate::kseq::KSequence;
use crate::matrix::cover_matrix;
use crate::numeric::{ln_bigint, ln_rational, pk_roots, Scalar};

/// Cover counts `l_i` at depth `i` and `log_pi = -Σ_{j<i} log α_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverState {
    pub l: [BigInt; 3],
    pub log_pi: f64,
    pub depth: usize,
}

impl CoverState {
    pub fn seed() -> Self {
        CoverState { l: [BigInt::one(), BigInt::zero(), BigInt::zero()], log_pi: 0.0, depth: 0 }
    }

    pub fn total(&self) -> BigInt {
        &self.l[0] + &self.l[1] + &self.l[2]
    }
}

/// True when `1/(k+1) < α <= 1/k`. Floating values within their resolution
/// of a cell edge are accepted on either side.
fn in_cell<S: Scalar>(k: u64, alpha: &S) -> bool {
    let inv = alpha.inv();
    match inv.floor_int() {
        Some(f) => f == BigInt::from(k),
        None => {
            let x = inv.approx_f64();
            (x - k as f64).abs() < 1e-9 * x || (x - (k + 1) as f64).abs() < 1e-9 * x
        }
    }
}

pub fn cover_step<S: Scalar>(state: &CoverState, k_next: u64, alpha_i: &S) -> Result<CoverState> {
    if k_next == 0 || !in_cell(k_next, alpha_i) {
        return Err(ItmError::InconsistentCell { k: k_next, alpha: alpha_i.to_string() });
    }
    Ok(CoverState {
        l: cover_matrix(k_next).apply(&state.l),
        log_pi: state.log_pi - alpha_i.approx_f64().ln(),
        depth: state.depth + 1,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionRow {
    pub depth: usize,
    #[serde(serialize_with = "ser_display")]
    pub sum_l: BigInt,
    pub log_pi: f64,
    /// `log(Σ l) / log_pi`, capped at 1 (the dimension of the line). Early
    /// depths of sequences containing 1s can exceed the cap.
    pub quotient: f64,
}

fn ser_display<T: std::fmt::Display, Ser: serde::Serializer>(
    v: &T,
    s: Ser,
) -> std::result::Result<Ser::Ok, Ser::Error> {
    s.collect_str(v)
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub rows: Vec<DimensionRow>,
    /// Maximum quotient over the last third of the computed depths.
    pub limsup: f64,
    pub method: String,
}

impl DimensionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("depth,sum_l,log_pi,quotient\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.depth, r.sum_l, r.log_pi, r.quotient);
        }
        out
    }
}

/// Runs the cover recursion from the seed `(1, 0, 0)` along `ks` with the
/// matching `α_i`, reporting the quotient at each depth `i >= 1`.
pub fn box_dim_upper_bound<S: Scalar>(ks: &KSequence, alphas: &[S]) -> Result<DimensionReport> {
    if ks.len() != alphas.len() {
        return Err(ItmError::InvalidArgument(format!("{} symbols but {} alphas", ks.len(), alphas.len())));
    }
    if ks.is_empty() {
        return Err(ItmError::InvalidArgument("empty k-sequence".into()));
    }
    let mut state = CoverState::seed();
    let mut rows = Vec::with_capacity(ks.len());
    for (&k, a) in ks.symbols.iter().zip(alphas) {
        state = cover_step(&state, k, a)?;
        let sum = state.total();
        let quotient = if sum.is_zero() { 0.0 } else { (ln_bigint(&sum) / state.log_pi).min(1.0) };
        rows.push(DimensionRow { depth: state.depth, sum_l: sum, log_pi: state.log_pi, quotient });
    }
    let start = rows.len() - rows.len().div_ceil(3);
    let limsup = rows[start..].iter().map(|r| r.quotient).fold(f64::NEG_INFINITY, f64::max);
    Ok(DimensionReport { rows, limsup, method: "cover-recursion, max over last third".into() })
}

pub const DEFAULT_DEPTH: usize = 200;

/// The cover bound at the fixed point `(r_k, r_k²)` of the Gauss map, whose
/// code is constantly `k`.
pub fn fixed_point_cover_bound(k: u64, depth: usize) -> Result<DimensionReport> {
    let tol = BigRational::new(BigInt::one(), BigInt::from(10u8).pow(40));
    let r = pk_roots(k, &tol)?.middle.midpoint();
    let ks = KSequence::constant(k, depth)?;
    box_dim_upper_bound(&ks, &vec![r; depth])
}

/// Value with a certified enclosure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Enclosure {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Relative error allowance for one `ln_rational` evaluation.
const LN_REL: f64 = 4e-15;

/// `-log(r̄_k) / log(r_k)` with an enclosure derived from the root
/// brackets and a bound on logarithm rounding.
pub fn fixed_point_dimension(k: u64) -> Result<Enclosure> {
    if k < 2 {
        return Err(ItmError::InvalidArgument("fixed_point_dimension needs k >= 2".into()));
    }
    let tol = BigRational::new(BigInt::one(), BigInt::from(10u8).pow(30));
    let roots = pk_roots(k, &tol)?;
    let (ua, ub) = (roots.upper.lo().clone(), roots.upper.hi().clone());
    let (ma, mb) = (roots.middle.lo().clone(), roots.middle.hi().clone());
    let widen = |x: f64, up: bool| {
        let d = x.abs() * LN_REL + 1e-300;
        if up {
            x + d
        } else {
            x - d
        }
    };
    // log r̄ in [ln ua, ln ub] (positive), -log r in [-ln mb, -ln ma] (positive).
    let num_lo = widen(ln_rational(&ua), false);
    let num_hi = widen(ln_rational(&ub), true);
    let den_lo = widen(-ln_rational(&mb), false);
    let den_hi = widen(-ln_rational(&ma), true);
    let lo = num_lo / den_hi;
    let hi = num_hi / den_lo;
    let value = ln_rational(&roots.upper.midpoint()) / -ln_rational(&roots.middle.midpoint());
    Ok(Enclosure { value, lo: lo.min(value), hi: hi.max(value) })
}

/// `ρ = log(r̄_2) / log 2`, the universal upper bound.
pub fn rho() -> Result<Enclosure> {
    let tol = BigRational::new(BigInt::one(), BigInt::from(10u8).pow(30));
    let u = pk_roots(2, &tol)?.upper;
    let ln2 = std::f64::consts::LN_2;
    let lo = ln_rational(u.lo()) * (1.0 - LN_REL) / ln2;
    let hi = ln_rational(u.hi()) * (1.0 + LN_REL) / ln2;
    let value = ln_rational(&u.midpoint()) / ln2;
    Ok(Enclosure { value, lo, hi })
}

#[derive(Clone, Debug, Serialize)]
pub struct Hd0Report {
    pub holds: bool,
    /// The left-hand side `N⌊1/α + 1⌋(πβ)^{1/i} + N⌊α/β⌋(παβ')^{1/i}`,
    /// infinite if it overflows.
    pub lhs: f64,
    /// `1 - lhs`.
    pub slack: f64,
    /// Natural logs of the two terms.
    pub log_terms: [f64; 2],
}

/// Evaluates
/// `N ⌊1/α + 1⌋ (π β)^{1/i} + N ⌊α/β⌋ (π α β')^{1/i} < 1`
/// in the log domain, so very small `β`, `β'` and `π` are handled exactly
/// up to final rounding.
pub fn hd0_inequality_check(
    n: &BigInt,
    pi: &BigRational,
    alpha: &BigRational,
    beta: &BigRational,
    beta_next: &BigRational,
    i: usize,
) -> Result<Hd0Report> {
    let positive = |q: &BigRational| q.is_positive();
    if !n.is_positive() || !positive(pi) || !positive(alpha) || !positive(beta) || !positive(beta_next) || i == 0 {
        return Err(ItmError::InvalidArgument("hd0 arguments must be positive".into()));
    }
    if alpha >= &BigRational::one() || beta >= alpha {
        return Err(ItmError::InvalidArgument("hd0 needs 0 < β < α < 1".into()));
    }
    let floor = |q: BigRational| q.numer().div_floor(q.denom());
    let f1 = floor(alpha.recip() + BigRational::one());
    let f2 = floor(alpha / beta);
    let inv_i = 1.0 / i as f64;
    let ln_n = ln_bigint(n);
    let t1 = ln_n + ln_bigint(&f1) + (ln_rational(pi) + ln_rational(beta)) * inv_i;
    let t2 = if f2.is_zero() {
        f64::NEG_INFINITY
    } else {
        ln_n + ln_bigint(&f2) + (ln_rational(pi) + ln_rational(alpha) + ln_rational(beta_next)) * inv_i
    };
    let lhs = t1.exp() + t2.exp();
    Ok(Hd0Report { holds: lhs < 1.0, lhs, slack: 1.0 - lhs, log_terms: [t1, t2] })
}

/// Inputs for [`hd0_inequality_check`] built from `α = 1/k - ε`,
/// `β = kε + ε'`, with `β'` the second coordinate of the Gauss image.
#[derive(Clone, Debug)]
pub struct Hd0Inputs {
    pub n: BigInt,
    pub pi: BigRational,
    pub alpha: BigRational,
    pub beta: BigRational,
    pub beta_next: BigRational,
    pub i: usize,
}

pub fn hd0_recipe(k: u64, eps: &BigRational, eps2: &BigRational, n: BigInt, pi: BigRational, i: usize) -> Hd0Inputs {
    let kq = BigRational::from_integer(BigInt::from(k));
    let alpha = kq.recip() - eps;
    let beta = &kq * eps + eps2;
    let beta_next = (&beta - BigRational::one()) / &alpha + &kq;
    Hd0Inputs { n, pi, alpha, beta, beta_next, i }
}

/// The shipped preset: `k = 3`, `ε = 10^-12`, `ε' = 10^-70`, `N = 10`,
/// `π = 3^-5`, `i = 5`.
pub fn hd0_preset() -> Hd0Inputs {
    let ten = BigInt::from(10u8);
    let eps = BigRational::new(BigInt::one(), ten.pow(12));
    let eps2 = BigRational::new(BigInt::one(), ten.pow(70));
    hd0_recipe(3, &eps, &eps2, BigInt::from(10u8), BigRational::new(BigInt::one(), BigInt::from(243u16)), 5)
}

pub fn hd0_check_inputs(x: &Hd0Inputs) -> Result<Hd0Report> {
    hd0_inequality_check(&x.n, &x.pi, &x.alpha, &x.beta, &x.beta_next, x.i)
}

/// Approximate `f64` of a big integer, saturating to infinity.
pub fn bigint_f64(n: &BigInt) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Real roots of `x^3 - x^2 - kx + 1` by the trigonometric formula.
    fn trig_roots(k: f64) -> [f64; 3] {
        // x = y + 1/3: y^3 + p y + q = 0.
        let p = -k - 1.0 / 3.0;
        let qq = 1.0 - k / 3.0 - 2.0 / 27.0;
        let m = 2.0 * (-p / 3.0).sqrt();
        let theta = (3.0 * qq / (p * m)).acos() / 3.0;
        let mut r: Vec<f64> =
            (0..3).map(|j| m * (theta - 2.0 * std::f64::consts::PI * j as f64 / 3.0).cos() + 1.0 / 3.0).collect();
        r.sort_by(f64::total_cmp);
        [r[0], r[1], r[2]]
    }

    #[test]
    fn cover_step_examples() {
        let a = q(3, 10);
        let s1 = cover_step(&CoverState::seed(), 3, &a).unwrap();
        assert_eq!(s1.l, [0, 1, 2].map(BigInt::from));
        let s2 = cover_step(&s1, 3, &a).unwrap();
        assert_eq!(s2.l, [3, 0, 2].map(BigInt::from));
        let s3 = cover_step(&s2, 3, &a).unwrap();
        assert_eq!(s3.l, [2, 3, 8].map(BigInt::from));
        assert!(s3.log_pi > s2.log_pi && s2.log_pi > s1.log_pi);
        assert!(matches!(cover_step(&s3, 3, &q(1, 2)), Err(ItmError::InconsistentCell { .. })));
        assert!(cover_step(&s3, 3, &q(1, 4)).is_err());
        assert!(cover_step(&s3, 3, &q(1, 3)).is_ok());
    }

    #[test]
    fn sum_growth_matches_upper_root() {
        for k in [2u64, 3, 7] {
            let r = trig_roots(k as f64);
            let a = q(1, k as i64);
            let mut s = CoverState::seed();
            let mut prev = BigInt::one();
            for _ in 0..60 {
                prev = s.total();
                s = cover_step(&s, k, &a).unwrap();
            }
            let ratio = BigRational::new(s.total(), prev).to_f64().unwrap();
            assert!((ratio - r[2]).abs() < 1e-6, "k={k}: {ratio} vs {}", r[2]);
        }
    }

    #[test]
    fn fixed_point_dimension_values() {
        let d3 = fixed_point_dimension(3).unwrap();
        assert!((d3.value - 0.6635).abs() < 5e-4, "{d3:?}");
        let r = trig_roots(3.0);
        assert!((d3.value - (-r[2].ln() / r[1].ln())).abs() < 1e-12);
        assert!(d3.lo <= d3.value && d3.value <= d3.hi && d3.width() < 1e-12);
        let d2 = fixed_point_dimension(2).unwrap();
        let r = trig_roots(2.0);
        assert!((d2.value - (-r[2].ln() / r[1].ln())).abs() < 1e-12);
        assert!((d2.value - 0.72736).abs() < 1e-5, "{d2:?}");
        let big = fixed_point_dimension(1_000_000).unwrap();
        assert!(big.value > 0.5 && big.value < 0.501, "{big:?}");
        assert!(fixed_point_dimension(1).is_err());
    }

    #[test]
    fn rho_value() {
        let r = rho().unwrap();
        assert!((r.value - 0.84955).abs() < 5e-5);
        assert!((r.value - trig_roots(2.0)[2].log2()).abs() < 1e-12);
        assert!(r.lo <= r.value && r.value <= r.hi);
    }

    #[test]
    fn cover_bound_examples() {
        let rep = fixed_point_cover_bound(3, DEFAULT_DEPTH).unwrap();
        // Quotients approach the limit from above like c/i; the seed's
        // transient keeps the last-third maximum about 1.1e-3 high at depth 200.
        let last = rep.rows.last().unwrap().quotient;
        assert!((last - 0.66355).abs() < 1e-3, "{last}");
        assert!(rep.limsup >= last && rep.limsup - 0.66355 < 2e-3, "{}", rep.limsup);
        assert!(rep.rows.iter().all(|r| r.quotient <= 1.0));
        let rep = fixed_point_cover_bound(10_000, DEFAULT_DEPTH).unwrap();
        assert!(rep.limsup >= 0.5 && rep.limsup <= 0.52, "{}", rep.limsup);
        assert!(rep.to_csv().starts_with("depth,sum_l,log_pi,quotient\n1,"));
    }

    #[test]
    fn hd0_examples() {
        let one = BigInt::one();
        let big_beta = hd0_inequality_check(&one, &q(1, 2), &q(1, 2), &q(2, 5), &q(2, 5), 5).unwrap();
        assert!(!big_beta.holds);
        let r = hd0_check_inputs(&hd0_preset()).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.slack > 0.5);
        // The Gauss image of the recipe point has β' ≈ kε'.
        let p = hd0_preset();
        let approx = p.beta_next.to_f64().unwrap();
        assert!((approx / 3e-70 - 1.0).abs() < 1e-9);
        // ε' = 10^-24 is not small enough at this depth.
        let ten = BigInt::from(10u8);
        let x = hd0_recipe(
            3,
            &BigRational::new(one.clone(), ten.pow(12)),
            &BigRational::new(one, ten.pow(24)),
            10.into(),
            q(1, 243),
            5,
        );
        assert!(!hd0_check_inputs(&x).unwrap().holds);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn hd0_monotone_in_eps2(e1 in 20u32..100, extra in 1u32..40) {
            let ten = BigInt::from(10u8);
            let eps = BigRational::new(BigInt::one(), ten.pow(12));
            let mk = |e: u32| hd0_recipe(3, &eps, &BigRational::new(BigInt::one(), ten.pow(e)), 10.into(), q(1, 243), 5);
            let a = hd0_check_inputs(&mk(e1)).unwrap();
            let b = hd0_check_inputs(&mk(e1 + extra)).unwrap();
            prop_assert!(!a.holds || b.holds);
            prop_assert!(b.lhs <= a.lhs * (1.0 + 1e-12));
        }

        #[test]
        fn bounds_in_unit_interval(v in prop::collection::vec(1u64..40, 1..60)) {
            // Any α in the right cell; take the midpoint of the cell.
            let alphas: Vec<BigRational> = v.iter().map(|&k| q(2 * k as i64 + 1, 2 * k as i64 * (k as i64 + 1))).collect();
            let rep = box_dim_upper_bound(&KSequence::user(v.clone()).unwrap(), &alphas).unwrap();
            for r in &rep.rows {
                prop_assert!((0.0..=1.0).contains(&r.quotient), "{:?}", r);
                // Column sums of the cover matrix are k, 1, 2, so each step
                // grows Σ l by at most max(k, 2) <= 1/α once k >= 2 and the
                // cap never binds.
                if v.iter().all(|&k| k >= 2) {
                    prop_assert!(ln_bigint(&r.sum_l) <= r.log_pi * (1.0 + 1e-12), "{:?}", r);
                }
            }
        }
    }
}
