use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::cubic::{isolate_root, AlgebraicRoot, RootKind};
use super::{BigFloat, Scalar};
use crate::error::ItmError;

/// The number field `Q(r)` for one real root `r` of `P_k`, `k >= 2`, with the
/// embedding into the reals fixed by the root's isolating bracket.
///
/// The bracket is refined lazily whenever a sign cannot be decided; the
/// refined bracket is shared by every element of the field.
#[derive(Debug)]
pub struct CubicField {
    k: u64,
    kind: RootKind,
    root: Mutex<AlgebraicRoot>,
}

impl CubicField {
    pub fn new(k: u64, kind: RootKind) -> Result<Arc<CubicField>, ItmError> {
        if k < 2 {
            return Err(ItmError::InvalidArgument(format!("P_{k} is reducible; the cubic field needs k >= 2")));
        }
        Ok(Arc::new(CubicField { k, kind, root: Mutex::new(isolate_root(k, kind)) }))
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn kind(&self) -> RootKind {
        self.kind
    }

    /// The generator `r` as a field element.
    pub fn generator(self: &Arc<Self>) -> AlgebraicNum {
        AlgebraicNum::from_coeffs(self, [BigRational::zero(), BigRational::one(), BigRational::zero()])
    }

    pub fn rational(self: &Arc<Self>, q: BigRational) -> AlgebraicNum {
        AlgebraicNum::from_coeffs(self, [q, BigRational::zero(), BigRational::zero()])
    }

    /// Current bracket `(lo, hi)` of the generator.
    pub fn bracket(&self) -> (BigRational, BigRational) {
        let root = self.root.lock().expect("root lock poisoned");
        (root.lo().clone(), root.hi().clone())
    }

    /// Refines the shared bracket to width at most `w`.
    pub fn refine_to(&self, w: &BigRational) {
        let mut root = self.root.lock().expect("root lock poisoned");
        root.refine_to(w);
    }

    fn same(&self, other: &CubicField) -> bool {
        self.k == other.k && self.kind == other.kind
    }
}

/// Element `c0 + c1 r + c2 r^2` of a [`CubicField`]. Arithmetic and
/// comparisons are exact.
///
/// Mixing elements of different fields is a programming error and panics.
#[derive(Clone, Debug)]
pub struct AlgebraicNum {
    field: Arc<CubicField>,
    c: [BigRational; 3],
}

impl AlgebraicNum {
    pub fn from_coeffs(field: &Arc<CubicField>, c: [BigRational; 3]) -> Self {
        AlgebraicNum { field: field.clone(), c }
    }

    pub fn coeffs(&self) -> &[BigRational; 3] {
        &self.c
    }

    pub fn field(&self) -> &Arc<CubicField> {
        &self.field
    }

    pub fn is_rational(&self) -> bool {
        self.c[1].is_zero() && self.c[2].is_zero()
    }

    fn check(&self, other: &Self) {
        assert!(self.field.same(&other.field), "mixing elements of Q(r) for different roots");
    }

    fn with(&self, c: [BigRational; 3]) -> Self {
        AlgebraicNum { field: self.field.clone(), c }
    }

    /// Coefficients of `self * r`.
    fn times_r(c: &[BigRational; 3], k: &BigRational) -> [BigRational; 3] {
        // r^3 = r^2 + k r - 1
        [-c[2].clone(), &c[0] + k * &c[2], &c[1] + &c[2]]
    }

    /// Rational interval containing the value, computed from the current
    /// bracket by a mean-value bound around its midpoint.
    fn enclosure_now(&self) -> (BigRational, BigRational) {
        let (lo, hi) = self.field.bracket();
        let two = BigRational::from_integer(BigInt::from(2));
        let m = (&lo + &hi) / &two;
        let rad = (&hi - &lo) / &two;
        let big = lo.abs().max(hi.abs());
        let center = &self.c[0] + (&self.c[1] + &self.c[2] * &m) * &m;
        let slope = self.c[1].abs() + &two * self.c[2].abs() * big;
        let err = slope * rad;
        (&center - &err, center + err)
    }

    /// Enclosure of width at most `w`, refining the generator as needed.
    pub fn enclosure(&self, w: &BigRational) -> (BigRational, BigRational) {
        if self.is_rational() {
            return (self.c[0].clone(), self.c[0].clone());
        }
        loop {
            let (a, b) = self.enclosure_now();
            if &b - &a <= *w {
                return (a, b);
            }
            self.tighten();
        }
    }

    fn tighten(&self) {
        let (lo, hi) = self.field.bracket();
        let w = &hi - &lo;
        // Shrinking by 2^-64 per round keeps the number of rounds small even
        // for values that are extremely close to zero.
        let target = w / BigRational::from_integer(BigInt::one() << 64usize);
        self.field.refine_to(&target);
    }

    fn exact_sign(&self) -> Ordering {
        if self.is_rational() {
            return self.c[0].cmp(&BigRational::zero());
        }
        loop {
            let (a, b) = self.enclosure_now();
            if a.is_positive() {
                return Ordering::Greater;
            }
            if b.is_negative() {
                return Ordering::Less;
            }
            self.tighten();
        }
    }

    /// Decimal approximation with about `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 8;
        let mag = self.approx_f64().abs().max(1e-300);
        let w = BigRational::from_float(mag * 2f64.powi(-(bits as i32)))
            .unwrap_or_else(|| BigRational::new(BigInt::one(), BigInt::one() << bits as usize));
        let (a, b) = self.enclosure(&w);
        let m = (a + b) / BigRational::from_integer(BigInt::from(2));
        BigFloat::from_rational(&m, bits).to_decimal_string(digits)
    }
}

impl PartialEq for AlgebraicNum {
    fn eq(&self, other: &Self) -> bool {
        self.field.same(&other.field) && self.c == other.c
    }
}

impl Eq for AlgebraicNum {}

impl Hash for AlgebraicNum {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.k.hash(state);
        self.field.kind.hash(state);
        self.c.hash(state);
    }
}

impl fmt::Display for AlgebraicNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(30))
    }
}

impl Add for AlgebraicNum {
    type Output = AlgebraicNum;
    fn add(self, rhs: AlgebraicNum) -> AlgebraicNum {
        self.check(&rhs);
        let [a0, a1, a2] = self.c.clone();
        let [b0, b1, b2] = rhs.c;
        self.with([a0 + b0, a1 + b1, a2 + b2])
    }
}

impl Sub for AlgebraicNum {
    type Output = AlgebraicNum;
    fn sub(self, rhs: AlgebraicNum) -> AlgebraicNum {
        self.check(&rhs);
        let [a0, a1, a2] = self.c.clone();
        let [b0, b1, b2] = rhs.c;
        self.with([a0 - b0, a1 - b1, a2 - b2])
    }
}

impl Neg for AlgebraicNum {
    type Output = AlgebraicNum;
    fn neg(self) -> AlgebraicNum {
        let [a0, a1, a2] = self.c.clone();
        self.with([-a0, -a1, -a2])
    }
}

impl Mul for AlgebraicNum {
    type Output = AlgebraicNum;
    fn mul(self, rhs: AlgebraicNum) -> AlgebraicNum {
        self.check(&rhs);
        let (a, b) = (&self.c, &rhs.c);
        let k = BigRational::from_integer(BigInt::from(self.field.k));
        let d0 = &a[0] * &b[0];
        let d1 = &a[0] * &b[1] + &a[1] * &b[0];
        let d2 = &a[0] * &b[2] + &a[1] * &b[1] + &a[2] * &b[0];
        let d3 = &a[1] * &b[2] + &a[2] * &b[1];
        let d4 = &a[2] * &b[2];
        // r^3 = r^2 + k r - 1,  r^4 = (k+1) r^2 + (k-1) r - 1
        let one = BigRational::one();
        let c0 = d0 - &d3 - &d4;
        let c1 = d1 + &k * &d3 + (&k - &one) * &d4;
        let c2 = d2 + &d3 + (&k + &one) * &d4;
        self.with([c0, c1, c2])
    }
}

impl Div for AlgebraicNum {
    type Output = AlgebraicNum;
    fn div(self, rhs: AlgebraicNum) -> AlgebraicNum {
        self.check(&rhs);
        if rhs.is_rational() {
            let d = &rhs.c[0];
            assert!(!d.is_zero(), "division by zero in Q(r)");
            let [a0, a1, a2] = self.c.clone();
            return self.with([a0 / d, a1 / d, a2 / d]);
        }
        let inv = rhs.inverse();
        self * inv
    }
}

impl AlgebraicNum {
    /// Multiplicative inverse, by solving `self * x = 1` for the coordinates
    /// of `x` in the basis `1, r, r^2`.
    pub fn inverse(&self) -> AlgebraicNum {
        let k = BigRational::from_integer(BigInt::from(self.field.k));
        let col0 = self.c.clone();
        let col1 = Self::times_r(&col0, &k);
        let col2 = Self::times_r(&col1, &k);
        let m = [
            [col0[0].clone(), col1[0].clone(), col2[0].clone()],
            [col0[1].clone(), col1[1].clone(), col2[1].clone()],
            [col0[2].clone(), col1[2].clone(), col2[2].clone()],
        ];
        let det = det3(&m);
        assert!(!det.is_zero(), "division by zero in Q(r)");
        // Cramer's rule with right-hand side e0.
        let mut x: [BigRational; 3] = Default::default();
        for (j, xj) in x.iter_mut().enumerate() {
            let mut mj = m.clone();
            for (i, row) in mj.iter_mut().enumerate() {
                row[j] = if i == 0 { BigRational::one() } else { BigRational::zero() };
            }
            *xj = det3(&mj) / &det;
        }
        self.with(x)
    }
}

fn det3(m: &[[BigRational; 3]; 3]) -> BigRational {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

impl Scalar for AlgebraicNum {
    fn int(&self, n: i64) -> Self {
        self.with([BigRational::from_integer(BigInt::from(n)), BigRational::zero(), BigRational::zero()])
    }

    fn ratio(&self, q: &BigRational) -> Self {
        self.with([q.clone(), BigRational::zero(), BigRational::zero()])
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn sign_with_margin(&self, _margin: f64) -> Option<Ordering> {
        Some(self.exact_sign())
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        (self.clone() - other.clone()).exact_sign()
    }

    fn floor_int(&self) -> Option<BigInt> {
        if self.is_rational() {
            return Some(self.c[0].numer().div_floor(self.c[0].denom()));
        }
        // An irrational value is never an integer, so refinement terminates.
        loop {
            let (a, b) = self.enclosure_now();
            let fa = a.floor().to_integer();
            if b < BigRational::from_integer(&fa + 1) {
                return Some(fa);
            }
            self.tighten();
        }
    }

    fn approx_f64(&self) -> f64 {
        if self.is_rational() {
            return self.c[0].to_f64().unwrap_or(f64::NAN);
        }
        loop {
            let (a, b) = self.enclosure_now();
            let (fa, fb) = (a.to_f64().unwrap_or(f64::NAN), b.to_f64().unwrap_or(f64::NAN));
            let scale = fa.abs().max(fb.abs());
            if (fb - fa) <= scale * 1e-17 || (fb - fa) < 1e-300 {
                return 0.5 * (fa + fb);
            }
            self.tighten();
        }
    }

    fn add_error(&self) -> f64 {
        0.0
    }

    fn resolution(&self) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn generator_satisfies_cubic() {
        let f = CubicField::new(3, RootKind::Middle).unwrap();
        let r = f.generator();
        let p = super::super::poly_eval(&super::super::CubicPolynomialPk { k: 3 }, &r);
        assert_eq!(p, r.zero_like());
        assert!((r.approx_f64() - 0.311107817465982).abs() < 1e-14);
    }

    #[test]
    fn inverse_of_generator() {
        let f = CubicField::new(5, RootKind::Middle).unwrap();
        let r = f.generator();
        let inv = r.inverse();
        assert_eq!(r.clone() * inv.clone(), r.one_like());
        assert!((inv.approx_f64() - 1.0 / r.approx_f64()).abs() < 1e-12);
        // (r^2) / r == r
        assert_eq!((r.clone() * r.clone()) / r.clone(), r);
    }

    #[test]
    fn sign_of_tiny_difference() {
        let f = CubicField::new(3, RootKind::Middle).unwrap();
        let r = f.generator();
        // A rational within 1e-40 of r, on each side.
        let (lo, hi) = {
            let mut root = isolate_root(3, RootKind::Middle);
            root.refine_to(&BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), 40)));
            (root.lo().clone(), root.hi().clone())
        };
        assert_eq!((r.clone() - r.ratio(&lo)).sign(), Some(Ordering::Greater));
        assert_eq!((r.clone() - r.ratio(&hi)).sign(), Some(Ordering::Less));
    }

    #[test]
    fn floor_of_scaled_root() {
        let f = CubicField::new(2, RootKind::Upper).unwrap();
        let r = f.generator();
        // r_up(2) = 1.8019...
        assert_eq!(r.floor_int(), Some(BigInt::from(1)));
        assert_eq!((r.int(10) * r.clone()).floor_int(), Some(BigInt::from(18)));
        assert!(CubicField::new(1, RootKind::Middle).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn field_axioms_against_f64(
            k in 2u64..20,
            a in prop::array::uniform3(-20i64..20),
            b in prop::array::uniform3(-20i64..20),
        ) {
            let f = CubicField::new(k, RootKind::Middle).unwrap();
            let mk = |c: [i64; 3]| AlgebraicNum::from_coeffs(&f, [q(c[0], 1), q(c[1], 1), q(c[2], 1)]);
            let (x, y) = (mk(a), mk(b));
            let (fx, fy) = (x.approx_f64(), y.approx_f64());
            let scale = 1.0 + fx.abs() * fy.abs();
            prop_assert!(((x.clone() * y.clone()).approx_f64() - fx * fy).abs() < 1e-9 * scale);
            if y != y.zero_like() {
                let quo = x.clone() / y.clone();
                prop_assert_eq!(quo * y.clone(), x.clone());
            }
            prop_assert_eq!(x.clone() - y.clone() + y.clone(), x);
        }
    }
}
