//! The Gauss map `G(α, β) = (β/α, (β-1)/α + ⌊1/α⌋)` on the interior of
//! `U = {0 <= β <= α <= 1}`, its coding by the cells
//! `𝒰_k = {1/(k+1) < α <= 1/k}` and derived diagnostics.
//!
//! `G` maps `U°` into `R = U ∪ L` with `L = {0 <= α <= β + 1 <= 1}`, the
//! quadrilateral with corners `(0,-1)`, `(1,0)`, `(1,1)`, `(0,0)`.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{ItmError, Result};
use crate::itm::{eval_t, ItmParams, Region};
use crate::kseq::{Growth, KGenerator, KSequence, KSource};
use crate::numeric::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Location {
    /// In `U°` and in the cell `𝒰_k`.
    InteriorU(u64),
    /// In `L` but not in `U`.
    InL,
    /// On the boundary of `U`.
    OnBoundary,
    Outside,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussPoint<S> {
    pub alpha: S,
    pub beta: S,
    pub location: Location,
}

impl<S: Scalar> GaussPoint<S> {
    /// Locates the point by comparing stored values; for floats near a
    /// boundary use [`locate_certified`] instead.
    pub fn new(alpha: S, beta: S) -> Self {
        let location = locate_with(
            &alpha,
            &beta,
            |x| Some(x.total_cmp(&x.zero_like())),
            |x| {
                let q = x.inv();
                Some(q.floor_int().unwrap_or_else(|| BigInt::from(q.approx_f64().floor() as i64)))
            },
        )
        .unwrap_or(Location::Outside);
        GaussPoint { alpha, beta, location }
    }

    pub fn from_params(p: &ItmParams<S>) -> Self {
        Self::new(p.alpha.clone(), p.beta.clone())
    }
}

/// Location of `(α, β)`, or `None` when a floating comparison or the floor
/// of `1/α` cannot be decided within `margin`.
pub fn locate_certified<S: Scalar>(alpha: &S, beta: &S, margin: f64) -> Option<Location> {
    locate_with(alpha, beta, |x| x.sign_with_margin(margin), |x| x.inv().floor_int())
}

fn locate_with<S: Scalar>(
    alpha: &S,
    beta: &S,
    sign: impl Fn(&S) -> Option<Ordering>,
    floor_inv: impl Fn(&S) -> Option<BigInt>,
) -> Option<Location> {
    use Ordering::*;
    let one = alpha.one_like();
    let s_beta = sign(beta)?;
    let s_gap = sign(&(alpha.clone() - beta.clone()))?;
    let s_top = sign(&(one.clone() - alpha.clone()))?;
    if s_beta == Greater && s_gap == Greater && s_top == Greater {
        let k = floor_inv(alpha)?.to_u64()?;
        return Some(Location::InteriorU(k.max(1)));
    }
    if s_beta != Less && s_gap != Less && s_top != Less {
        return Some(Location::OnBoundary);
    }
    let s_alpha = sign(alpha)?;
    let s_l = sign(&(beta.clone() + one - alpha.clone()))?;
    if s_alpha != Less && s_l != Less && s_beta != Greater {
        return Some(Location::InL);
    }
    Some(Location::Outside)
}

/// One step of `G`, for a point of `U°`.
pub fn gauss_step<S: Scalar>(p: &GaussPoint<S>) -> Result<(u64, GaussPoint<S>)> {
    let Location::InteriorU(k) = p.location else {
        return Err(ItmError::NotInInterior { alpha: p.alpha.to_string(), beta: p.beta.to_string() });
    };
    let (a, b) = raw_step(&p.alpha, &p.beta, k);
    Ok((k, GaussPoint::new(a, b)))
}

fn raw_step<S: Scalar>(alpha: &S, beta: &S, k: u64) -> (S, S) {
    let a = beta.clone() / alpha.clone();
    let b = (beta.clone() - alpha.one_like()) / alpha.clone() + alpha.int(k as i64);
    (a, b)
}

/// `(α, β) = (1/(k + α' - β'), α'/(k + α' - β'))`, the branch of `G^{-1}`
/// landing in the closure of `𝒰_k`.
pub fn inverse_branch<S: Scalar>(k: u64, alpha1: &S, beta1: &S) -> Result<GaussPoint<S>> {
    if k == 0 {
        return Err(ItmError::InvalidArgument("cell index k must be >= 1".into()));
    }
    let d = alpha1.int(k as i64) + alpha1.clone() - beta1.clone();
    if d.sign() != Some(Ordering::Greater) && d.total_cmp(&d.zero_like()) != Ordering::Greater {
        return Err(ItmError::DivisionByZero(format!("k + α' - β' = {d} for k = {k}")));
    }
    Ok(GaussPoint::new(d.inv(), alpha1.clone() / d))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Exit {
    HitL,
    HitBoundary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum InfiniteReason {
    /// The orbit revisited a point exactly: `G^(preperiod + period) = G^preperiod`.
    PeriodicCode {
        period: usize,
        preperiod: usize,
    },
    ExplicitKSequence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    FiniteType {
        steps: usize,
        exit: Exit,
    },
    InfiniteCertified(InfiniteReason),
    /// No decision within `budget` steps (or a floating comparison became
    /// undecidable after `budget` steps).
    Inconclusive {
        budget: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    /// Cells visited, one symbol per `G` step taken.
    pub k_prefix: KSequence,
}

impl Classification {
    pub fn is_finite(&self) -> bool {
        matches!(self.verdict, Verdict::FiniteType { .. })
    }
}

fn ks_from(symbols: Vec<u64>) -> KSequence {
    KSequence::new(symbols, KSource::FromParams).expect("cells are >= 1")
}

/// Iterates `G` until the orbit leaves `U°`, revisits a point exactly, or
/// `budget` steps have been taken.
///
/// Floating inputs never yield `InfiniteCertified`; once a location cannot
/// be decided under the accumulated error bound the result is
/// `Inconclusive`.
pub fn classify<S: Scalar>(p: &ItmParams<S>, budget: usize) -> Result<Classification> {
    if budget == 0 {
        return Err(ItmError::InvalidArgument("budget must be at least 1".into()));
    }
    match p.region {
        Region::Invalid => {
            return Err(ItmError::InvalidParams { alpha: p.alpha.to_string(), beta: p.beta.to_string() })
        }
        Region::BoundaryRotation | Region::BoundaryBetaZero => {
            return Ok(Classification {
                verdict: Verdict::FiniteType { steps: 0, exit: Exit::HitBoundary },
                k_prefix: ks_from(Vec::new()),
            })
        }
        Region::InteriorU => {}
    }
    let exact = p.alpha.is_exact();
    let mut seen: HashMap<(S, S), usize> = HashMap::new();
    let (mut a, mut b) = (p.alpha.clone(), p.beta.clone());
    let mut ks = Vec::new();
    // Running bound on the absolute error of (a, b) for floating scalars.
    let mut err = 0.0f64;
    let inconclusive = |steps: usize, ks: Vec<u64>| Classification {
        verdict: Verdict::Inconclusive { budget: steps },
        k_prefix: ks_from(ks),
    };
    for step in 0..=budget {
        let loc = if exact {
            GaussPoint::new(a.clone(), b.clone()).location
        } else {
            match locate_certified(&a, &b, err) {
                Some(l) => l,
                None => return Ok(inconclusive(step, ks)),
            }
        };
        let k = match loc {
            Location::InteriorU(k) => k,
            Location::InL => {
                return Ok(Classification {
                    verdict: Verdict::FiniteType { steps: step, exit: Exit::HitL },
                    k_prefix: ks_from(ks),
                })
            }
            Location::OnBoundary => {
                return Ok(Classification {
                    verdict: Verdict::FiniteType { steps: step, exit: Exit::HitBoundary },
                    k_prefix: ks_from(ks),
                })
            }
            // Only reachable through rounding.
            Location::Outside => return Ok(inconclusive(step, ks)),
        };
        if exact {
            if let Some(first) = seen.insert((a.clone(), b.clone()), step) {
                return Ok(Classification {
                    verdict: Verdict::InfiniteCertified(InfiniteReason::PeriodicCode {
                        period: step - first,
                        preperiod: first,
                    }),
                    k_prefix: ks_from(ks),
                });
            }
        }
        if step == budget {
            break;
        }
        if !exact {
            let inv_a2 = 1.0 / (a.approx_f64() * a.approx_f64());
            err = err * (2.0 * inv_a2 + 2.0) + 8.0 * a.add_error() * inv_a2;
        }
        let (na, nb) = raw_step(&a, &b, k);
        ks.push(k);
        a = na;
        b = nb;
    }
    Ok(inconclusive(budget, ks))
}

/// Certifies infinite type from a closed-form symbol sequence: every
/// sequence with symbols other than 1 infinitely often at both even and
/// odd positions codes a point of `A`.
///
/// Returns `None` when the generator's asymptotics cannot be decided.
pub fn certify_explicit(gen: &KGenerator, prefix_len: usize) -> Option<Classification> {
    let (even, odd) = gen.parity_growth();
    let ne_one_io = |g: &Growth| match g {
        Growth::Periodic(v) => Some(v.iter().any(|&k| k != 1)),
        Growth::Unknown => None,
        g if g.is_constant_one() => Some(false),
        g => Some(g.eventually_at_least_two()),
    };
    if ne_one_io(&even)? && ne_one_io(&odd)? {
        Some(Classification {
            verdict: Verdict::InfiniteCertified(InfiniteReason::ExplicitKSequence),
            k_prefix: gen.prefix_lossy(prefix_len),
        })
    } else {
        None
    }
}

/// Quadrilateral in parameter space, the image of the closure of `R` under
/// `inv_{k_0} ∘ ... ∘ inv_{k_n}`. Corners are images of `(0,-1)`, `(1,0)`,
/// `(1,1)`, `(0,0)` in that order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParamBox {
    #[serde(serialize_with = "ser_corners")]
    pub corners: [(BigRational, BigRational); 4],
}

fn ser_corners<Ser: serde::Serializer>(
    c: &[(BigRational, BigRational); 4],
    s: Ser,
) -> std::result::Result<Ser::Ok, Ser::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(4))?;
    for (a, b) in c {
        seq.serialize_element(&(a.to_string(), b.to_string()))?;
    }
    seq.end()
}

impl ParamBox {
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..4 {
            for j in i + 1..4 {
                let dx = (&self.corners[i].0 - &self.corners[j].0).to_f64().unwrap_or(f64::NAN);
                let dy = (&self.corners[i].1 - &self.corners[j].1).to_f64().unwrap_or(f64::NAN);
                d = d.max(dx.hypot(dy));
            }
        }
        d
    }

    /// Closed containment; the box is convex because the inverse branches
    /// are projective maps with no pole on `R`.
    pub fn contains(&self, alpha: &BigRational, beta: &BigRational) -> bool {
        let mut sign = 0i32;
        for i in 0..4 {
            let (x0, y0) = &self.corners[i];
            let (x1, y1) = &self.corners[(i + 1) % 4];
            let cross = (x1 - x0) * (beta - y0) - (y1 - y0) * (alpha - x0);
            let s = if cross.is_zero() {
                0
            } else if cross > BigRational::zero() {
                1
            } else {
                -1
            };
            if s != 0 {
                if sign != 0 && s != sign {
                    return false;
                }
                sign = s;
            }
        }
        true
    }

    /// Closed containment of `inner` (corner test suffices by convexity).
    pub fn contains_box(&self, inner: &ParamBox) -> bool {
        inner.corners.iter().all(|(a, b)| self.contains(a, b))
    }

    /// Containment of a point given as floating values, with the point
    /// rounded to a nearby rational.
    pub fn contains_approx<S: Scalar>(&self, alpha: &S, beta: &S) -> bool {
        let r = |x: &S| BigRational::from_float(x.approx_f64()).unwrap_or_else(BigRational::zero);
        self.contains(&r(alpha), &r(beta))
    }
}

pub fn param_box(ks: &KSequence) -> Result<ParamBox> {
    if ks.is_empty() {
        return Err(ItmError::InvalidArgument("param_box needs a nonempty prefix".into()));
    }
    let q = |n: i64| BigRational::from_integer(n.into());
    let mut corners = [(q(0), q(-1)), (q(1), q(0)), (q(1), q(1)), (q(0), q(0))];
    for &k in ks.symbols.iter().rev() {
        for c in corners.iter_mut() {
            let g = inverse_branch(k, &c.0, &c.1)?;
            *c = (g.alpha, g.beta);
        }
    }
    Ok(ParamBox { corners })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpansionEigenvalues {
    /// Eigenvalues of `DG`.
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    /// Eigenvalues of `DG²`; complex when the discriminant is negative.
    #[serde(serialize_with = "ser_complex")]
    pub big_lambda_plus: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub big_lambda_minus: Complex64,
}

fn ser_complex<Ser: serde::Serializer>(z: &Complex64, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
    (z.re, z.im).serialize(s)
}

/// Eigenvalues of the Jacobians of `G` and `G²` at `p`, in double precision.
pub fn expansion_eigenvalues<S: Scalar>(p: &GaussPoint<S>) -> Result<ExpansionEigenvalues> {
    let Location::InteriorU(_) = p.location else {
        return Err(ItmError::NotInInterior { alpha: p.alpha.to_string(), beta: p.beta.to_string() });
    };
    let (a, b) = (p.alpha.approx_f64(), p.beta.approx_f64());
    if b <= 0.0 {
        return Err(ItmError::DivisionByZero("β = 0 in the second-iterate eigenvalues".into()));
    }
    let c = (a - b) / (2.0 * a);
    let root = (c * c + 1.0 / a).sqrt();
    let k = 1.0 + ((1.0 - a) / a).floor();
    let t = 1.0 + a * (1.0 - k) + b * k;
    let disc = Complex64::new(t * t - 4.0 * b, 0.0).sqrt();
    let den = 2.0 * b * b;
    Ok(ExpansionEigenvalues {
        lambda_plus: (c + root) / a,
        lambda_minus: (c - root) / a,
        big_lambda_plus: (t + disc) / den,
        big_lambda_minus: (t - disc) / den,
    })
}

pub const DEFAULT_RETURN_CAP: usize = 100_000;

#[derive(Clone, Debug, Serialize)]
pub struct SelfSimilarityReport {
    pub passed: bool,
    pub period: usize,
    /// Length of the inducing interval `[1 - π, 1)`.
    pub scale: f64,
    pub points_checked: usize,
    pub max_deviation: f64,
    pub max_return_time: usize,
}

/// Checks that the first-return map of `T` to `Δ = [1 - π, 1)`,
/// `π = α_0 ⋯ α_{period-1}`, conjugated by `u -> 1 - π + πu`, equals `T`
/// at `n_points` sample points `u_j = (j + 1/2)/n_points`.
///
/// Requires `G^period(p) = p` to be certified by [`classify`]. Exact
/// scalars are compared exactly; floats within `tol`.
pub fn self_similarity_check<S: Scalar>(
    p: &ItmParams<S>,
    period: usize,
    n_points: usize,
    tol: f64,
    return_cap: usize,
) -> Result<SelfSimilarityReport> {
    if period == 0 || n_points == 0 {
        return Err(ItmError::InvalidArgument("period and n_points must be positive".into()));
    }
    let c = classify(p, 4 * period + 16)?;
    match c.verdict {
        Verdict::InfiniteCertified(InfiniteReason::PeriodicCode { period: q, preperiod: 0 })
            if period.is_multiple_of(q) => {}
        v => {
            return Err(ItmError::Precondition(format!(
                "parameters are not certified G-periodic with period {period} (got {v:?})"
            )))
        }
    }
    let mut scale = p.alpha.one_like();
    let mut g = GaussPoint::from_params(p);
    for _ in 0..period {
        scale = scale * g.alpha.clone();
        g = gauss_step(&g)?.1;
    }
    let one = scale.one_like();
    let left = one.clone() - scale.clone();
    let phi = |u: &S| left.clone() + scale.clone() * u.clone();
    let mut max_dev = 0.0f64;
    let mut max_ret = 0usize;
    let mut passed = true;
    for j in 0..n_points {
        let u = p.alpha.ratio(&BigRational::new(BigInt::from(2 * j + 1), BigInt::from(2 * n_points)));
        let x = phi(&u);
        let mut y = eval_t(p, &x)?.0;
        let mut t = 1;
        while y.total_cmp(&left) == Ordering::Less {
            y = eval_t(p, &y)?.0;
            t += 1;
            if t > return_cap {
                return Err(ItmError::ReturnTimeCap(return_cap));
            }
        }
        max_ret = max_ret.max(t);
        let expected = phi(&eval_t(p, &u)?.0);
        if p.alpha.is_exact() {
            if y != expected {
                passed = false;
                max_dev = max_dev.max((y.approx_f64() - expected.approx_f64()).abs());
            }
        } else {
            let dev = (y.approx_f64() - expected.approx_f64()).abs();
            max_dev = max_dev.max(dev);
            passed &= dev <= tol;
        }
    }
    Ok(SelfSimilarityReport {
        passed,
        period,
        scale: scale.approx_f64(),
        points_checked: n_points,
        max_deviation: max_dev,
        max_return_time: max_ret,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{BigFloat, CubicField, RootKind};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn gp(a: BigRational, b: BigRational) -> GaussPoint<BigRational> {
        GaussPoint::new(a, b)
    }

    #[test]
    fn step_examples() {
        let (k, p1) = gauss_step(&gp(q(2, 5), q(1, 5))).unwrap();
        assert_eq!((k, &p1.alpha, &p1.beta, p1.location), (2, &q(1, 2), &q(0, 1), Location::OnBoundary));
        let (k, p1) = gauss_step(&gp(q(7, 20), q(1, 5))).unwrap();
        assert_eq!((k, &p1.alpha, &p1.beta, p1.location), (2, &q(4, 7), &q(-2, 7), Location::InL));
        assert!(gauss_step(&gp(q(1, 2), q(0, 1))).is_err());
    }

    #[test]
    fn cell_convention_is_half_open() {
        assert_eq!(gp(q(1, 3), q(1, 5)).location, Location::InteriorU(3));
        assert_eq!(gp(q(1, 3) + q(1, 1000), q(1, 5)).location, Location::InteriorU(2));
        assert_eq!(gp(q(1, 1), q(1, 2)).location, Location::OnBoundary);
        assert_eq!(gp(q(1, 2), q(-1, 4)).location, Location::InL);
        assert_eq!(gp(q(1, 2), q(-3, 4)).location, Location::Outside);
    }

    #[test]
    fn fixed_point_in_cubic_field() {
        for k in 2..=6 {
            let f = CubicField::new(k, RootKind::Middle).unwrap();
            let r = f.generator();
            let p = GaussPoint::new(r.clone(), r.clone() * r.clone());
            let (kk, p1) = gauss_step(&p).unwrap();
            assert_eq!(kk, k);
            assert_eq!(p1, p);
            let back = inverse_branch(k, &p.alpha, &p.beta).unwrap();
            assert_eq!(back, p);
        }
    }

    #[test]
    fn classify_examples() {
        let c = classify(&ItmParams::new(q(2, 5), q(1, 5)), 100).unwrap();
        assert_eq!(c.verdict, Verdict::FiniteType { steps: 1, exit: Exit::HitBoundary });
        assert_eq!(c.k_prefix.symbols, vec![2]);
        let c = classify(&ItmParams::new(q(3, 7), q(3, 7)), 100).unwrap();
        assert_eq!(c.verdict, Verdict::FiniteType { steps: 0, exit: Exit::HitBoundary });
        let c = classify(&ItmParams::new(q(7, 20), q(1, 5)), 100).unwrap();
        assert_eq!(c.verdict, Verdict::FiniteType { steps: 1, exit: Exit::HitL });

        let f = CubicField::new(3, RootKind::Middle).unwrap();
        let r = f.generator();
        let c = classify(&ItmParams::new(r.clone(), r.clone() * r), 10).unwrap();
        assert_eq!(c.verdict, Verdict::InfiniteCertified(InfiniteReason::PeriodicCode { period: 1, preperiod: 0 }));
        assert_eq!(c.k_prefix.symbols, vec![3]);
    }

    #[test]
    fn float_classify_never_certifies() {
        let f = CubicField::new(3, RootKind::Middle).unwrap();
        let r = f.generator();
        let a = BigFloat::from_rational(&r.enclosure(&q(1, 10).pow(70)).0, 256);
        let b = a.clone() * a.clone();
        let c = classify(&ItmParams::new(a, b), 1000).unwrap();
        assert!(!matches!(c.verdict, Verdict::InfiniteCertified(_)), "{c:?}");
        assert!(c.k_prefix.len() >= 40, "{c:?}");
        assert!(c.k_prefix.symbols[..40].iter().all(|&k| k == 3));
    }

    #[test]
    fn inverse_examples() {
        let g = inverse_branch(2, &q(1, 2), &q(0, 1)).unwrap();
        assert_eq!((g.alpha, g.beta), (q(2, 5), q(1, 5)));
        for k in 1..6 {
            let g = inverse_branch(k, &q(1, 1), &q(1, 1)).unwrap();
            assert_eq!((g.alpha.clone(), g.beta.clone()), (q(1, k as i64), q(1, k as i64)));
            assert_eq!(g.location, Location::OnBoundary);
        }
        assert!(matches!(inverse_branch(1, &q(0, 1), &q(1, 1)), Err(ItmError::DivisionByZero(_))));
    }

    #[test]
    fn boxes_nest() {
        let b3 = param_box(&KSequence::user(vec![3]).unwrap()).unwrap();
        for (a, _) in &b3.corners {
            assert!(*a >= q(1, 4) && *a <= q(1, 3));
        }
        let b3333 = param_box(&KSequence::user(vec![3, 3, 3, 3]).unwrap()).unwrap();
        assert!(b3.contains_box(&b3333));
        assert!(b3333.diameter() < b3.diameter());
        let r = crate::numeric::pk_roots(3, &q(1, 1_000_000_000_000)).unwrap().middle.midpoint();
        assert!(b3333.contains(&r, &(r.clone() * r.clone())));
        let b2 = param_box(&KSequence::user(vec![2]).unwrap()).unwrap();
        let b21 = param_box(&KSequence::user(vec![2, 1]).unwrap()).unwrap();
        assert!(b2.contains_box(&b21));
    }

    #[test]
    fn markov_boundary_correspondence() {
        // Corners of R map to corners of the closed cell 𝒰_k, so each side of
        // R goes to the matching side of 𝒰_k.
        for k in 1..=30i64 {
            let b = param_box(&KSequence::user(vec![k as u64]).unwrap()).unwrap();
            let expect = [(q(1, k + 1), q(0, 1)), (q(1, k + 1), q(1, k + 1)), (q(1, k), q(1, k)), (q(1, k), q(0, 1))];
            assert_eq!(b.corners, expect);
        }
    }

    #[test]
    fn eigenvalue_identities() {
        let e = expansion_eigenvalues(&gp(q(3, 5), q(2, 5))).unwrap();
        assert!((e.big_lambda_plus.re - 1.0 / 0.16).abs() < 1e-12);
        assert!((e.big_lambda_minus.re - 1.0 / 0.4).abs() < 1e-12);
        assert!((e.lambda_plus * e.lambda_minus + 1.0 / 0.216).abs() < 1e-9);
        // Oracle: the eigenvalues of the displayed Jacobian, via trace and determinant.
        let (a, b) = (0.3f64, 0.1f64);
        let e = expansion_eigenvalues(&gp(q(3, 10), q(1, 10))).unwrap();
        let tr = -b / (a * a) + 1.0 / a;
        assert!((e.lambda_plus + e.lambda_minus - tr).abs() < 1e-12);
        let mut lo = gp(q(1, 5), q(1, 5));
        lo.location = Location::InteriorU(5);
        let e = expansion_eigenvalues(&lo).unwrap();
        assert!((e.big_lambda_minus.re - 5.0).abs() < 1e-12);
    }

    #[test]
    fn second_iterate_oracle() {
        // DG² as the product of two first-derivative matrices.
        let dg = |a: f64, b: f64| [[-b / (a * a), 1.0 / a], [(1.0 - b) / (a * a), 1.0 / a]];
        let (a, b) = (0.3f64, 0.2f64);
        let k = (1.0 / a).floor();
        let (a1, b1) = (b / a, (b - 1.0) / a + k);
        let m1 = dg(a, b);
        let m2 = dg(a1, b1);
        let p = [
            [m2[0][0] * m1[0][0] + m2[0][1] * m1[1][0], m2[0][0] * m1[0][1] + m2[0][1] * m1[1][1]],
            [m2[1][0] * m1[0][0] + m2[1][1] * m1[1][0], m2[1][0] * m1[0][1] + m2[1][1] * m1[1][1]],
        ];
        let tr = p[0][0] + p[1][1];
        let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
        let e = expansion_eigenvalues(&gp(q(3, 10), q(2, 10))).unwrap();
        let s = e.big_lambda_plus + e.big_lambda_minus;
        let pr = e.big_lambda_plus * e.big_lambda_minus;
        assert!((s.re - tr).abs() < 1e-9 * tr.abs().max(1.0), "{s} vs {tr}");
        assert!((pr.re - det).abs() < 1e-9 * det.abs().max(1.0), "{pr} vs {det}");
    }

    #[test]
    fn self_similarity_examples() {
        for k in [3, 2] {
            let f = CubicField::new(k, RootKind::Middle).unwrap();
            let r = f.generator();
            let p = ItmParams::new(r.clone(), r.clone() * r);
            let rep = self_similarity_check(&p, 1, 40, 0.0, DEFAULT_RETURN_CAP).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
        let p = ItmParams::new(q(2, 5), q(1, 5));
        assert!(matches!(self_similarity_check(&p, 1, 10, 0.0, 100), Err(ItmError::Precondition(_))));
    }

    #[test]
    fn explicit_certification() {
        let g = KGenerator::parse("arith:1,1").unwrap();
        assert!(certify_explicit(&g, 10).is_some());
        let g = KGenerator::parse("cycle:2,1").unwrap();
        assert!(certify_explicit(&g, 10).is_none());
        let g = KGenerator::parse("cycle:2,1,1").unwrap();
        assert!(certify_explicit(&g, 10).is_some());
    }

    fn rat() -> impl Strategy<Value = BigRational> {
        (1i64..10_000).prop_map(|n| q(n, 10_000))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn round_trip(a in rat(), b in rat(), k in 1u64..=50) {
            prop_assume!(b < a && a < q(1, 1));
            let g = inverse_branch(k, &a, &b).unwrap();
            if g.location == Location::InteriorU(k) {
                let (kk, back) = gauss_step(&g).unwrap();
                prop_assert_eq!(kk, k);
                prop_assert_eq!((back.alpha, back.beta), (a, b));
            }
        }

        #[test]
        fn round_trip_over_l(a in rat(), b in rat(), k in 1u64..=50) {
            // Points of L° land strictly inside 𝒰_k too.
            let beta = -b;
            prop_assume!(a < beta.clone() + q(1, 1));
            let g = inverse_branch(k, &a, &beta).unwrap();
            prop_assert_eq!(g.location, Location::InteriorU(k));
            let (_, back) = gauss_step(&g).unwrap();
            prop_assert_eq!((back.alpha, back.beta), (a, beta));
        }

        #[test]
        fn inverse_maps_lines_to_lines(k in 1u64..20, a in rat(), b in rat(), t in 0i64..=100) {
            prop_assume!(b < a);
            let p0 = (q(0, 1), q(0, 1));
            let p1 = (a.clone(), b.clone());
            let t = q(t, 100);
            let mid = (t.clone() * &p1.0, t.clone() * &p1.1);
            let g = |p: &(BigRational, BigRational)| {
                let g = inverse_branch(k, &p.0, &p.1).unwrap();
                (g.alpha, g.beta)
            };
            let (x0, x1, xm) = (g(&p0), g(&p1), g(&mid));
            let cross = (&x1.0 - &x0.0) * (&xm.1 - &x0.1) - (&x1.1 - &x0.1) * (&xm.0 - &x0.0);
            prop_assert!(cross.is_zero());
        }

        #[test]
        fn expanding_away_from_neutral_point(a in 1i64..=950, b in 1i64..=950) {
            prop_assume!(b < a);
            let e = expansion_eigenvalues(&gp(q(a, 1000), q(b, 1000))).unwrap();
            prop_assert!(e.big_lambda_minus.norm() > 1.0);
            prop_assert!(e.big_lambda_plus.norm() > 1.0);
        }

        #[test]
        fn classify_is_shift_stable(a in rat(), b in rat()) {
            prop_assume!(b < a);
            let p = ItmParams::new(a.clone(), b.clone());
            let c = classify(&p, 10_000).unwrap();
            if let Verdict::FiniteType { steps, exit } = c.verdict {
                if steps == 1 {
                    let (_, g) = gauss_step(&gp(a, b)).unwrap();
                    let expected = if exit == Exit::HitL { Location::InL } else { Location::OnBoundary };
                    prop_assert_eq!(g.location, expected);
                } else if steps >= 2 {
                    let (_, g) = gauss_step(&gp(a, b)).unwrap();
                    let c1 = classify(&ItmParams::new(g.alpha, g.beta), 10_000).unwrap();
                    prop_assert_eq!(c1.verdict, Verdict::FiniteType { steps: steps - 1, exit });
                }
            } else {
                prop_assert!(false, "rational parameters must be finite type: {:?}", c);
            }
        }

        #[test]
        fn boxes_shrink(v in prop::collection::vec(2u64..6, 1..12)) {
            let mut prev = f64::INFINITY;
            for n in 1..=v.len() {
                let d = param_box(&KSequence::user(v[..n].to_vec()).unwrap()).unwrap().diameter();
                prop_assert!(d < prev);
                prev = d;
            }
        }
    }
}
