//! Letter-frequency cone dynamics: the simplex maps
//! `F̃_k(ξ, η) = (1 - η/(kη + ξ), 1/(kη + ξ))` on
//! `S̃ = {ξ, η <= 1, ξ + η >= 1}`, the nested triangles they produce, and
//! the unique-ergodicity conditions built on them.
//!
//! A point `(ξ, η)` corresponds to letter frequencies
//! `x = 1 - η`, `y = ξ + η - 1`, `z = 1 - ξ`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{ItmError, Result};
use crate::kseq::{poly_add, trim, Growth, KGenerator, KSequence, KSource};
use crate::matrix::Mat3;
use crate::numeric::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimplexPoint<S> {
    pub xi: S,
    pub eta: S,
}

impl<S: Scalar> SimplexPoint<S> {
    pub fn new(xi: S, eta: S) -> Self {
        SimplexPoint { xi, eta }
    }

    /// Membership in `S̃`.
    pub fn in_simplex(&self) -> bool {
        let one = self.xi.one_like();
        self.xi.total_cmp(&one) != Ordering::Greater
            && self.eta.total_cmp(&one) != Ordering::Greater
            && (self.xi.clone() + self.eta.clone()).total_cmp(&one) != Ordering::Less
    }

    /// Letter frequencies `(x, y, z)`.
    pub fn frequencies(&self) -> [S; 3] {
        let one = self.xi.one_like();
        [one.clone() - self.eta.clone(), self.xi.clone() + self.eta.clone() - one.clone(), one - self.xi.clone()]
    }
}

pub fn tilde_f<S: Scalar>(k: u64, p: &SimplexPoint<S>) -> Result<SimplexPoint<S>> {
    if k == 0 {
        return Err(ItmError::InvalidArgument("k must be >= 1".into()));
    }
    let d = p.eta.int(k as i64) * p.eta.clone() + p.xi.clone();
    if d.sign() == Some(Ordering::Equal) {
        return Err(ItmError::DivisionByZero("kη + ξ = 0".into()));
    }
    Ok(SimplexPoint { xi: d.one_like() - p.eta.clone() / d.clone(), eta: d.inv() })
}

pub fn tilde_f_inverse<S: Scalar>(k: u64, q: &SimplexPoint<S>) -> Result<SimplexPoint<S>> {
    if k == 0 {
        return Err(ItmError::InvalidArgument("k must be >= 1".into()));
    }
    if q.eta.sign() == Some(Ordering::Equal) {
        return Err(ItmError::DivisionByZero("η = 0".into()));
    }
    let one = q.xi.one_like();
    let xi = (one.clone() + q.xi.int(k as i64) * (q.xi.clone() - one.clone())) / q.eta.clone();
    let eta = (one - q.xi.clone()) / q.eta.clone();
    Ok(SimplexPoint { xi, eta })
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Corners of `𝒱_k = F̃_k(S̃)`: `(1,1)`, `((k-1)/k, 1/k)`, `(k/(k+1), 1/(k+1))`.
pub fn v_cell_corners(k: u64) -> [(BigRational, BigRational); 3] {
    let k = k as i64;
    [(q(1, 1), q(1, 1)), (q(k - 1, k), q(1, k)), (q(k, k + 1), q(1, k + 1))]
}

/// Orientation of `c` relative to the directed segment `a -> b`.
fn orient(a: &(BigRational, BigRational), b: &(BigRational, BigRational), c: &(BigRational, BigRational)) -> Ordering {
    let cross = (&b.0 - &a.0) * (&c.1 - &a.1) - (&b.1 - &a.1) * (&c.0 - &a.0);
    cross.cmp(&BigRational::zero())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Containment {
    Interior,
    Boundary,
    Outside,
}

/// Exact point-in-triangle test.
pub fn triangle_contains(t: &[(BigRational, BigRational); 3], p: &(BigRational, BigRational)) -> Containment {
    let o = [orient(&t[0], &t[1], p), orient(&t[1], &t[2], p), orient(&t[2], &t[0], p)];
    let has_pos = o.contains(&Ordering::Greater);
    let has_neg = o.contains(&Ordering::Less);
    if has_pos && has_neg {
        Containment::Outside
    } else if o.contains(&Ordering::Equal) {
        Containment::Boundary
    } else {
        Containment::Interior
    }
}

/// Cells `𝒱_k` containing `p` (closed), for a point of `S̃` with `ξ < 1`.
/// With `c = (1-η)/(1-ξ)`, only `k` in `[c, c+1]` can qualify.
pub fn locate_v_cells(p: &(BigRational, BigRational)) -> Vec<(u64, Containment)> {
    let one = BigRational::one();
    let gap = &one - &p.0;
    if !gap.is_positive() {
        return Vec::new();
    }
    let c = ((&one - &p.1) / &gap).floor().to_integer();
    let lo = c.to_u64().unwrap_or(0).max(1);
    let hi = c.to_u64().map_or(0, |c| c.saturating_add(1));
    (lo..=hi)
        .filter_map(|k| match triangle_contains(&v_cell_corners(k), p) {
            Containment::Outside => None,
            c => Some((k, c)),
        })
        .collect()
}

/// `F̃_k` in homogeneous coordinates `(ξ, η, w)`.
pub fn projective_matrix(k: u64) -> Mat3 {
    let k = k as i64;
    Mat3::from_i64([[1, k - 1, 0], [0, 0, 1], [1, k, 0]])
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeTriangle {
    /// Images of `(1,1)`, `(1,0)`, `(0,1)`.
    #[serde(skip)]
    pub corners: [(BigRational, BigRational); 3],
    pub depth: usize,
    pub diameter: f64,
    /// Extent of the `η` coordinates.
    pub vertical: f64,
    /// Extent of the `ξ` coordinates.
    pub width: f64,
    pub area: f64,
}

fn extent(v: [&BigRational; 3]) -> BigRational {
    let max = v.iter().copied().max().unwrap();
    let min = v.iter().copied().min().unwrap();
    max - min
}

fn triangle_from(corners: [(BigRational, BigRational); 3], depth: usize) -> ConeTriangle {
    let f = |x: &BigRational| x.to_f64().unwrap_or(f64::NAN);
    let mut diameter = 0.0f64;
    for i in 0..3 {
        for j in i + 1..3 {
            let dx = f(&(&corners[i].0 - &corners[j].0));
            let dy = f(&(&corners[i].1 - &corners[j].1));
            diameter = diameter.max(dx.hypot(dy));
        }
    }
    let cross = (&corners[1].0 - &corners[0].0) * (&corners[2].1 - &corners[0].1)
        - (&corners[1].1 - &corners[0].1) * (&corners[2].0 - &corners[0].0);
    let area = f(&cross.abs()) / 2.0;
    let vertical = f(&extent([&corners[0].1, &corners[1].1, &corners[2].1]));
    let width = f(&extent([&corners[0].0, &corners[1].0, &corners[2].0]));
    ConeTriangle { corners, depth, diameter, vertical, width, area }
}

fn project(m: &Mat3, v: [i64; 3]) -> (BigRational, BigRational) {
    let r = m.apply(&v.map(BigInt::from));
    (BigRational::new(r[0].clone(), r[2].clone()), BigRational::new(r[1].clone(), r[2].clone()))
}

fn corners_of(m: &Mat3) -> [(BigRational, BigRational); 3] {
    [project(m, [1, 1, 1]), project(m, [1, 0, 1]), project(m, [0, 1, 1])]
}

/// `F̃_{k_0} ∘ ... ∘ F̃_{k_n}(S̃)`, computed exactly from the product of the
/// projective matrices.
pub fn z_triangle(ks: &KSequence) -> Result<ConeTriangle> {
    if ks.is_empty() {
        return Err(ItmError::InvalidArgument("empty k-sequence".into()));
    }
    let mut m = Mat3::identity();
    for &k in &ks.symbols {
        m = &m * &projective_matrix(k);
    }
    Ok(triangle_from(corners_of(&m), ks.len()))
}

/// Triangles for every prefix length `1..=ks.len()`.
pub fn z_triangles(ks: &KSequence) -> Vec<ConeTriangle> {
    let mut m = Mat3::identity();
    let mut out = Vec::with_capacity(ks.len());
    for (d, &k) in ks.symbols.iter().enumerate() {
        m = &m * &projective_matrix(k);
        out.push(triangle_from(corners_of(&m), d + 1));
    }
    out
}

/// Hilbert projective distance on the closed positive quadrant; infinite
/// when the two vectors have different supports.
pub fn hilbert_metric(v: [f64; 2], w: [f64; 2]) -> Result<f64> {
    if v.iter().chain(&w).any(|x| *x < 0.0 || x.is_nan()) {
        return Err(ItmError::InvalidArgument("vectors must be nonnegative".into()));
    }
    if v == [0.0, 0.0] || w == [0.0, 0.0] {
        return Err(ItmError::InvalidArgument("zero vector".into()));
    }
    let support = |u: [f64; 2]| [u[0] > 0.0, u[1] > 0.0];
    if support(v) != support(w) {
        return Ok(f64::INFINITY);
    }
    let ratios: Vec<f64> = (0..2).filter(|&i| v[i] > 0.0).map(|i| w[i] / v[i]).collect();
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((max / min).ln())
}

/// `[[k, ξ], [k-1, k' + ξ]]` acting on `η` by `(kη + ξ)/((k-1)η + k' + ξ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusMap2 {
    pub m: [[f64; 2]; 2],
}

impl MobiusMap2 {
    pub fn new(k: u64, k_prime: u64, xi: f64) -> Self {
        let k = k as f64;
        MobiusMap2 { m: [[k, xi], [k - 1.0, k_prime as f64 + xi]] }
    }

    pub fn apply(&self, eta: f64) -> f64 {
        (self.m[0][0] * eta + self.m[0][1]) / (self.m[1][0] * eta + self.m[1][1])
    }

    pub fn apply_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.m[0][0] * v[0] + self.m[0][1] * v[1], self.m[1][0] * v[0] + self.m[1][1] * v[1]]
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }
}

/// `tanh(D/4)` for `D = log(k(k'+ξ)/((k-1)ξ))`, in the cancellation-free form
/// `(√(k(k'+ξ)) - √((k-1)ξ)) / (√(k(k'+ξ)) + √((k-1)ξ))`.
pub fn contraction_factor(k: u64, k_prime: u64, xi: f64) -> f64 {
    let a = (k as f64 * (k_prime as f64 + xi)).sqrt();
    let b = ((k as f64 - 1.0) * xi).sqrt();
    (a - b) / (a + b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Parity {
    /// Terms indexed by `k_{2i}` with `k_{2i-1}` in the denominator.
    Even,
    /// Terms indexed by `k_{2i-1}` with `k_{2i-2}` in the denominator.
    Odd,
}

impl Parity {
    fn index(self, i: usize) -> usize {
        match self {
            Parity::Even => 2 * i,
            Parity::Odd => 2 * i - 1,
        }
    }
}

/// `L_j = min{r >= 1 : k_{j+r} != 1}`; when no such `r` exists inside the
/// prefix, the distance to the end and `true` (a lower bound).
pub fn run_length(ks: &[u64], j: usize) -> (usize, bool) {
    for r in 1.. {
        match ks.get(j + r) {
            Some(&k) if k != 1 => return (r, false),
            Some(_) => {}
            None => return (r.max(1), true),
        }
    }
    unreachable!()
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesEvidence {
    pub parity: Parity,
    /// Partial sums `S_N` for condition (a); `ln P_N` for condition (b).
    pub values: Vec<f64>,
    /// Some `L` was cut off by the end of the prefix.
    pub truncated: bool,
    /// Analytic verdict from a declared generator: `Some(true)` when the
    /// condition holds for the infinite sequence.
    pub certified: Option<bool>,
}

/// Partial sums of `((k_j - 1)/k_j) √(1/(k_{j-1} L_j))` for `j = 2i`
/// (even) or `j = 2i - 1` (odd), `i >= 1`.
pub fn condition_a(ks: &KSequence, parity: Parity) -> SeriesEvidence {
    let s = &ks.symbols;
    let mut sum = 0.0;
    let mut values = Vec::new();
    let mut truncated = false;
    for i in 1.. {
        let j = parity.index(i);
        if j >= s.len() {
            break;
        }
        let (l, t) = run_length(s, j);
        truncated |= t;
        let kj = s[j] as f64;
        sum += (kj - 1.0) / kj * (1.0 / (s[j - 1] as f64 * l as f64)).sqrt();
        values.push(sum);
    }
    SeriesEvidence { parity, values, truncated, certified: None }
}

/// `ln` of the partial products of `k_j / (k_{j-1} + 1/L_j)`.
pub fn condition_b(ks: &KSequence, parity: Parity) -> SeriesEvidence {
    let s = &ks.symbols;
    let mut log = 0.0;
    let mut values = Vec::new();
    let mut truncated = false;
    for i in 1.. {
        let j = parity.index(i);
        if j >= s.len() {
            break;
        }
        let (l, t) = run_length(s, j);
        truncated |= t;
        log += (s[j] as f64).ln() - (s[j - 1] as f64 + 1.0 / l as f64).ln();
        values.push(log);
    }
    SeriesEvidence { parity, values, truncated, certified: None }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NueGrowth {
    pub lambda: Option<f64>,
    /// The ratios are still drifting at the end of the prefix, so the
    /// prefix cannot settle the question.
    pub prefix_limited: bool,
}

/// Largest `λ > 1` with `k_i >= λ k_{i-1}` over the second half of the
/// prefix, provided the ratios are not drifting down toward 1.
pub fn nue_growth_test(ks: &KSequence) -> Result<NueGrowth> {
    let s = &ks.symbols;
    if s.len() < 4 {
        return Err(ItmError::InvalidArgument("nue_growth_test needs at least 4 symbols".into()));
    }
    let ratios: Vec<f64> = s.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect();
    let half = &ratios[ratios.len() / 2..];
    let (third_q, fourth_q) = half.split_at(half.len() / 2);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda = min(half);
    if lambda <= 1.0 + 1e-12 {
        return Ok(NueGrowth { lambda: None, prefix_limited: false });
    }
    if !third_q.is_empty() && min(fourth_q) < min(third_q) * (1.0 - 1e-9) {
        return Ok(NueGrowth { lambda: None, prefix_limited: true });
    }
    Ok(NueGrowth { lambda: Some(lambda), prefix_limited: false })
}

/// Upper bound `∏ tanh(D_i/4)` on the height of the triangle, using
/// `ξ_i >= 1/L_{2i}` in the contraction factor of `h_i`.
pub fn height_bound(ks: &KSequence) -> f64 {
    let s = &ks.symbols;
    let mut p = 1.0;
    let mut i = 1;
    while 2 * i < s.len() {
        let (l, _) = run_length(s, 2 * i);
        p *= contraction_factor(s[2 * i], s[2 * i - 1], 1.0 / l as f64);
        i += 1;
    }
    p
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UeCondition {
    AEven,
    AOdd,
    BEven,
    BOdd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NumericalKind {
    UeLike,
    NueLike,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum UeVerdict {
    UeCertified { conditions: Vec<UeCondition> },
    NueCertified { lambda: f64 },
    Numerical(NumericalKind),
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct UeReport {
    pub generator: Option<String>,
    pub depth: usize,
    pub condition_a: [SeriesEvidence; 2],
    pub condition_b: [SeriesEvidence; 2],
    pub nue_growth: NueGrowth,
    /// Diameter of the triangle at depths `1..=depth`.
    pub z_diameter: Vec<f64>,
    pub z_vertical: Vec<f64>,
    pub height_bound: f64,
    pub verdict: UeVerdict,
    pub notes: Vec<String>,
}

impl UeReport {
    pub fn diameters_csv(&self) -> String {
        let mut out = String::from("depth,diameter,vertical\n");
        for (i, (d, v)) in self.z_diameter.iter().zip(&self.z_vertical).enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, d, v));
        }
        out
    }
}

pub const UE_LIKE_DIAMETER: f64 = 1e-6;
pub const PLATEAU_FLOOR: f64 = 1e-3;
pub const PLATEAU_SPREAD: f64 = 0.01;

/// Last 20% of the series varies by less than 1% and stays above `1e-3`.
pub fn is_plateau(d: &[f64]) -> bool {
    if d.len() < 5 {
        return false;
    }
    let tail = &d[d.len() - d.len() / 5..];
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    min > PLATEAU_FLOOR && (max - min) <= PLATEAU_SPREAD * min
}

fn as_periodic(g: &Growth) -> Option<Vec<u64>> {
    match g {
        Growth::Periodic(v) => Some(v.clone()),
        Growth::Poly(c) => {
            let c = trim(c);
            (c.len() == 1 && c[0] >= 1.0 && c[0].fract() == 0.0).then(|| vec![c[0] as u64])
        }
        _ => None,
    }
}

/// Growth of `E` composed with `i -> i - 1`, normalizing `base = 1` to a constant.
fn normalize(g: Growth) -> Growth {
    match g {
        Growth::Exp { base: 1.0, lead } => Growth::Poly(vec![lead]),
        g => g,
    }
}

/// Does `Σ ((N-1)/N) / √D` diverge, given `N, D` eventually >= 2 (so `L = 1`)?
fn a_diverges(den: &Growth) -> Option<bool> {
    match den {
        Growth::Poly(_) => Some(den.degree()? <= 2),
        Growth::Exp { base, .. } => Some(*base <= 1.0),
        _ => None,
    }
}

/// Does `∏ N/(D + 1)` vanish, given `N, D` eventually >= 2?
fn b_vanishes(num: &Growth, den: &Growth) -> Option<bool> {
    use Growth::*;
    match (num, den) {
        (Exp { base: bn, lead: ln }, Exp { base: bd, lead: ld }) => Some(match bn.partial_cmp(bd)? {
            Ordering::Less => true,
            Ordering::Greater => false,
            // Factors tend to ln/ld; at equality they approach 1 from below
            // with a summable gap.
            Ordering::Equal => ln < ld,
        }),
        (Poly(_), Exp { base, .. }) => Some(*base > 1.0),
        (Exp { base, .. }, Poly(_)) => Some(*base < 1.0),
        (Poly(n), Poly(d)) => {
            let (n, d) = (trim(n), trim(d));
            if n.len() != d.len() {
                return Some(n.len() < d.len());
            }
            let (ln, ld) = (*n.last()?, *d.last()?);
            if ln != ld {
                return Some(ln < ld);
            }
            // Factor is 1 + (N - D - 1)/(D + 1): the product vanishes iff the
            // sum of these gaps diverges to -∞.
            let gap = poly_add(&poly_add(n, d, -1.0), &[1.0], -1.0);
            let gap = trim(&gap);
            let lead = *gap.last()?;
            if lead >= 0.0 {
                return Some(false);
            }
            Some(gap.len() + 1 >= d.len())
        }
        _ => None,
    }
}

/// Exact analysis for a periodic sequence with period block `block`.
fn periodic_conditions(block: &[u64]) -> Option<[bool; 4]> {
    if block.iter().all(|&k| k == 1) || block.is_empty() {
        return None;
    }
    let p = block.len();
    let seq: Vec<u64> = (0..8 * p + 8).map(|i| block[i % p]).collect();
    let mut out = [false; 4];
    for (slot, parity) in [(0, Parity::Even), (1, Parity::Odd)] {
        let mut any_term = false;
        let mut prod = BigRational::one();
        for i in 2 * p..3 * p {
            let j = parity.index(i);
            let (l, t) = run_length(&seq, j);
            if t {
                return None;
            }
            any_term |= seq[j] >= 2;
            let l = BigInt::from(l);
            prod *= BigRational::new(BigInt::from(seq[j]) * &l, BigInt::from(seq[j - 1]) * &l + 1);
        }
        out[slot] = any_term;
        out[slot + 2] = prod < BigRational::one();
    }
    Some(out)
}

/// Analytic (a)/(b) verdicts for a closed-form generator, in the order
/// (a even, a odd, b even, b odd).
pub fn generator_conditions(gen: &KGenerator) -> [Option<bool>; 4] {
    let g = gen.growth();
    if let Some(block) = as_periodic(&g) {
        return periodic_conditions(&block).map_or([None; 4], |v| v.map(Some));
    }
    let (e, o) = gen.parity_growth();
    let (e, o) = (normalize(e), normalize(o));
    if let (Some(eb), Some(ob)) = (as_periodic(&e), as_periodic(&o)) {
        // Interleaved periodic parts: rebuild one joint period.
        let p = eb.len() * ob.len();
        let mut block = Vec::with_capacity(2 * p);
        for i in 0..p {
            block.push(eb[i % eb.len()]);
            block.push(ob[(i + 1) % ob.len()]);
        }
        return periodic_conditions(&block).map_or([None; 4], |v| v.map(Some));
    }
    if !(e.eventually_at_least_two() && o.eventually_at_least_two()) {
        return [None; 4];
    }
    // Odd variants: numerator k_{2i-1} = O(i), denominator k_{2i-2} = E(i-1).
    let e_shift = normalize(e.compose_linear(1.0, -1.0));
    [a_diverges(&o), a_diverges(&e_shift), b_vanishes(&e, &o), b_vanishes(&o, &e_shift)]
}

/// Combines generator-level certification with numerical triangle data.
///
/// Only a sequence produced by a closed-form generator
/// ([`KSource::Generator`]) can certify; the generator is re-read from the
/// source and extended to `depth` symbols if needed. A bare prefix gets a
/// numerical verdict at best. Contradictory evidence yields `Unknown` with
/// an explanatory note.
pub fn ue_decide(ks: &KSequence, depth: usize) -> Result<UeReport> {
    if depth == 0 {
        return Err(ItmError::InvalidArgument("depth must be at least 1".into()));
    }
    let generator = match &ks.source {
        KSource::Generator(s) => Some(KGenerator::parse(s)?),
        _ => None,
    };
    let generator = generator.as_ref();
    let ks = match generator {
        Some(g) if ks.len() < depth => g.prefix(depth)?,
        _ => ks.clone(),
    };
    if ks.len() < 4 {
        return Err(ItmError::InvalidArgument("need at least 4 symbols".into()));
    }
    let used = ks.len().min(depth);
    let prefix = KSequence { symbols: ks.symbols[..used].to_vec(), ..ks.clone() };
    let mut notes = Vec::new();

    let mut ca = [condition_a(&prefix, Parity::Even), condition_a(&prefix, Parity::Odd)];
    let mut cb = [condition_b(&prefix, Parity::Even), condition_b(&prefix, Parity::Odd)];
    let nue_growth = nue_growth_test(&prefix)?;
    let tris = z_triangles(&prefix);
    let z_diameter: Vec<f64> = tris.iter().map(|t| t.diameter).collect();
    let z_vertical: Vec<f64> = tris.iter().map(|t| t.vertical).collect();
    let last = *z_diameter.last().unwrap();
    let numerical = if last < UE_LIKE_DIAMETER {
        Some(NumericalKind::UeLike)
    } else if is_plateau(&z_diameter) {
        Some(NumericalKind::NueLike)
    } else {
        None
    };

    let mut ue_conditions = Vec::new();
    let mut nue_lambda = None;
    if let Some(g) = generator {
        if !ks.kappa_valid_prefix {
            notes.push("generator has a constant-1 parity tail; it codes no point of A".into());
        } else {
            let c = generator_conditions(g);
            ca[0].certified = c[0];
            ca[1].certified = c[1];
            cb[0].certified = c[2];
            cb[1].certified = c[3];
            for (flag, cond) in
                c.iter().zip([UeCondition::AEven, UeCondition::AOdd, UeCondition::BEven, UeCondition::BOdd])
            {
                if *flag == Some(true) {
                    ue_conditions.push(cond);
                }
            }
            nue_lambda = g.exact_ratio().filter(|&r| r > 1.0);
        }
    }

    let verdict = match (ue_conditions.is_empty(), nue_lambda) {
        (false, Some(l)) => {
            notes.push(format!("both UE conditions {ue_conditions:?} and NUE growth λ = {l} certified"));
            UeVerdict::Unknown
        }
        (false, None) if numerical == Some(NumericalKind::NueLike) => {
            notes.push("UE certified analytically but triangle diameters plateau".into());
            UeVerdict::Unknown
        }
        (false, None) => UeVerdict::UeCertified { conditions: ue_conditions },
        (true, Some(_)) if numerical == Some(NumericalKind::UeLike) => {
            notes.push("NUE growth certified but triangle diameters collapse".into());
            UeVerdict::Unknown
        }
        (true, Some(lambda)) => UeVerdict::NueCertified { lambda },
        (true, None) => numerical.map_or(UeVerdict::Unknown, UeVerdict::Numerical),
    };
    Ok(UeReport {
        generator: generator.map(|g| g.to_string()),
        depth: used,
        condition_a: ca,
        condition_b: cb,
        nue_growth,
        z_diameter,
        z_vertical,
        height_bound: height_bound(&prefix),
        verdict,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subshift::letter_frequencies;
    use proptest::prelude::*;

    fn pt(a: (i64, i64), b: (i64, i64)) -> SimplexPoint<BigRational> {
        SimplexPoint::new(q(a.0, a.1), q(b.0, b.1))
    }

    fn ks(v: &[u64]) -> KSequence {
        KSequence::user(v.to_vec()).unwrap()
    }

    #[test]
    fn tilde_f_examples() {
        assert_eq!(tilde_f(2, &pt((1, 1), (0, 1))).unwrap(), pt((1, 1), (1, 1)));
        assert_eq!(tilde_f(2, &pt((0, 1), (1, 1))).unwrap(), pt((1, 2), (1, 2)));
        assert_eq!(tilde_f(2, &pt((1, 1), (1, 1))).unwrap(), pt((2, 3), (1, 3)));
        assert_eq!(tilde_f_inverse(2, &pt((2, 3), (1, 3))).unwrap(), pt((1, 1), (1, 1)));
        assert_eq!(tilde_f_inverse(1, &pt((1, 1), (1, 1))).unwrap(), pt((1, 1), (0, 1)));
        assert!(tilde_f_inverse(1, &pt((1, 1), (0, 1))).is_err());
    }

    #[test]
    fn homogeneous_form_matches_direct_map() {
        for k in 1..8 {
            for p in [pt((1, 1), (1, 1)), pt((3, 4), (1, 2)), pt((1, 3), (5, 6))] {
                let direct = tilde_f(k, &p).unwrap();
                let m = projective_matrix(k);
                let v = m.apply(&[
                    p.xi.numer() * p.eta.denom(),
                    p.eta.numer() * p.xi.denom(),
                    p.xi.denom() * p.eta.denom(),
                ]);
                let proj = (BigRational::new(v[0].clone(), v[2].clone()), BigRational::new(v[1].clone(), v[2].clone()));
                assert_eq!((direct.xi, direct.eta), proj);
            }
        }
    }

    #[test]
    fn z_triangle_examples() {
        let t = z_triangle(&ks(&[2])).unwrap();
        assert_eq!(t.corners, [(q(2, 3), q(1, 3)), (q(1, 1), q(1, 1)), (q(1, 2), q(1, 2))]);
        // Farthest pair is (2/3,1/3)-(1,1).
        assert!((t.diameter - 5f64.sqrt() / 3.0).abs() < 1e-15);
        let t = z_triangle(&ks(&[1])).unwrap();
        assert_eq!(t.corners, [(q(1, 2), q(1, 2)), (q(1, 1), q(1, 1)), (q(0, 1), q(1, 1))]);
        let t = z_triangle(&KSequence::constant(2, 40).unwrap()).unwrap();
        assert!(t.diameter < 1e-6, "{}", t.diameter);
    }

    #[test]
    fn z_triangle_matches_composition() {
        // Oracle: apply the maps to the corners one by one, innermost first.
        let seq = [3u64, 1, 2, 5, 1, 1, 4];
        let t = z_triangle(&ks(&seq)).unwrap();
        for (c, start) in t.corners.iter().zip([pt((1, 1), (1, 1)), pt((1, 1), (0, 1)), pt((0, 1), (1, 1))]) {
            let mut p = start;
            for &k in seq.iter().rev() {
                p = tilde_f(k, &p).unwrap();
            }
            assert_eq!(c, &(p.xi, p.eta));
        }
    }

    #[test]
    fn hilbert_examples() {
        assert!((hilbert_metric([1.0, 1.0], [2.0, 1.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(hilbert_metric([1.0, 2.0], [3.0, 6.0]).unwrap(), 0.0);
        assert_eq!(hilbert_metric([1.0, 0.0], [0.0, 1.0]).unwrap(), f64::INFINITY);
        assert!(hilbert_metric([0.0, 0.0], [1.0, 1.0]).is_err());
    }

    #[test]
    fn contraction_examples() {
        assert_eq!(contraction_factor(1, 7, 0.3), 1.0);
        let six = 6f64.sqrt();
        assert!((contraction_factor(2, 2, 1.0) - (six - 1.0) / (six + 1.0)).abs() < 1e-15);
        assert!((contraction_factor(2, 2, 1.0) - 0.4202).abs() < 1e-4);
        let d: f64 = (2.0f64 * 3.0 / 1.0).ln();
        assert!((contraction_factor(2, 2, 1.0) - (d / 4.0).tanh()).abs() < 1e-15);
    }

    #[test]
    fn stated_tanh_bound_fails_at_small_k() {
        // 1 - 4((k-1)/k)√(ξ/k') is negative here while the factor is positive.
        let f = contraction_factor(2, 2, 1.0);
        assert!(f > 1.0 - 4.0 * 0.5 * 0.5f64.sqrt());
    }

    #[test]
    fn condition_examples() {
        let c = condition_a(&KSequence::constant(2, 21).unwrap(), Parity::Even);
        let t = 0.5 * 0.5f64.sqrt();
        for (n, s) in c.values.iter().enumerate() {
            assert!((s - t * (n + 1) as f64).abs() < 1e-12);
        }
        let ones_even: Vec<u64> = (0..20).map(|i| if i % 2 == 0 { 1 } else { 3 }).collect();
        assert!(condition_a(&ks(&ones_even), Parity::Even).values.iter().all(|&s| s == 0.0));
        let b = condition_b(&KSequence::constant(2, 21).unwrap(), Parity::Even);
        assert!((b.values[9] - 10.0 * (2.0f64 / 3.0).ln()).abs() < 1e-12);
        // k_{2i} = k_{2i-1} + 1 with L = 1: unit factors.
        let v: Vec<u64> = (0..20).map(|i| if i % 2 == 0 { 4 } else { 3 }).collect();
        assert!(condition_b(&ks(&v), Parity::Even).values.iter().all(|x| x.abs() < 1e-15));
        let growing: Vec<u64> = (0..201).map(|i| i + 1).collect();
        let a = condition_a(&ks(&growing), Parity::Even);
        assert!(a.values[99] > 0.5 * 100f64.sqrt(), "{}", a.values[99]);
    }

    #[test]
    fn nue_examples() {
        let g = KGenerator::parse("k_i=2^(i+1)").unwrap();
        assert_eq!(nue_growth_test(&g.prefix(40).unwrap()).unwrap().lambda, Some(2.0));
        let r = nue_growth_test(&KSequence::constant(3, 40).unwrap()).unwrap();
        assert_eq!(r.lambda, None);
        let r = nue_growth_test(&KGenerator::Arith { a: 1, b: 1 }.prefix(60).unwrap()).unwrap();
        assert_eq!(r, NueGrowth { lambda: None, prefix_limited: true });
    }

    #[test]
    fn generator_rules() {
        let c = generator_conditions(&KGenerator::parse("k_i=i+1").unwrap());
        assert_eq!(c[0], Some(true));
        assert_eq!((c[2], c[3]), (Some(false), Some(false)));
        let c = generator_conditions(&KGenerator::parse("k_{2i}=2^i;k_{2i-1}=3^i").unwrap());
        assert_eq!((c[0], c[1], c[2]), (Some(false), Some(false), Some(true)));
        let c = generator_conditions(&KGenerator::parse("k_i=2^(i+1)").unwrap());
        assert_eq!(c, [Some(false), Some(false), Some(false), Some(false)]);
        let c = generator_conditions(&KGenerator::Constant(2));
        assert_eq!(c, [Some(true); 4]);
        let c = generator_conditions(&KGenerator::parse("padded:3:5,1").unwrap());
        assert_eq!(c[0], Some(true));
        // Poly vs poly with equal leads: k_{2i} = 2i, k_{2i-1} = 2i+3.
        let c = generator_conditions(&KGenerator::parse("k_{2i}=2*i+2;k_{2i-1}=2*i+3").unwrap());
        assert_eq!(c[2], Some(true));
    }

    #[test]
    fn decide_examples() {
        let r = ue_decide(&KGenerator::parse("k_i=i+1").unwrap().prefix(4).unwrap(), 60).unwrap();
        assert!(
            matches!(&r.verdict, UeVerdict::UeCertified { conditions } if conditions.contains(&UeCondition::AEven)),
            "{:?}",
            r.verdict
        );
        let r = ue_decide(&KGenerator::Constant(2).prefix(40).unwrap(), 40).unwrap();
        assert!(
            matches!(&r.verdict, UeVerdict::UeCertified { conditions } if conditions.contains(&UeCondition::BEven))
        );
        assert!(*r.z_diameter.last().unwrap() < 1e-6);
        let r = ue_decide(&KGenerator::parse("k_i=2*2^i").unwrap().prefix(60).unwrap(), 60).unwrap();
        assert_eq!(r.verdict, UeVerdict::NueCertified { lambda: 2.0 });
        assert!(is_plateau(&r.z_diameter), "{:?}", &r.z_diameter[50..]);
        // A bare prefix only gets a numerical verdict.
        let r = ue_decide(&KSequence::user(vec![2; 40]).unwrap(), 40).unwrap();
        assert_eq!(r.verdict, UeVerdict::Numerical(NumericalKind::UeLike));
        assert!(r.diameters_csv().starts_with("depth,diameter,vertical\n1,"));
    }

    #[test]
    fn frequency_consistency() {
        let t = z_triangle(&KSequence::constant(2, 60).unwrap()).unwrap();
        let (xi, eta) = (t.corners[0].0.clone(), t.corners[0].1.clone());
        let p = SimplexPoint::new(xi, eta).frequencies();
        let f = letter_frequencies(&KSequence::constant(2, 60).unwrap()).unwrap();
        for i in 0..3 {
            assert!((&p[i] - &f[i]).abs().to_f64().unwrap() < 1e-6);
        }
    }

    #[test]
    fn v_cells_tile_samples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut n = 0;
        while n < 2000 {
            let (a, b) = (rng.gen_range(0..1_000_000i64), rng.gen_range(0..1_000_000i64));
            let p = (q(a, 1_000_000), q(b, 1_000_000));
            if &p.0 + &p.1 <= BigRational::one() {
                continue;
            }
            n += 1;
            let cells = locate_v_cells(&p);
            let interior = cells.iter().filter(|c| c.1 == Containment::Interior).count();
            assert!(
                interior == 1 && cells.len() == 1 || interior == 0 && (1..=2).contains(&cells.len()),
                "{p:?} {cells:?}"
            );
        }
    }

    fn simplex_point() -> impl Strategy<Value = SimplexPoint<BigRational>> {
        (0i64..=1000, 0i64..=1000)
            .prop_filter_map("in S̃", |(a, b)| (a + b >= 1000).then(|| SimplexPoint::new(q(a, 1000), q(b, 1000))))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn inverse_round_trip(p in simplex_point(), k in 1u64..30) {
            let img = tilde_f(k, &p).unwrap();
            prop_assert!(img.in_simplex());
            let c = triangle_contains(&v_cell_corners(k), &(img.xi.clone(), img.eta.clone()));
            prop_assert!(c != Containment::Outside);
            prop_assert_eq!(tilde_f_inverse(k, &img).unwrap(), p);
        }

        #[test]
        fn nested_and_shrinking(v in prop::collection::vec(1u64..8, 1..15), extra in 1u64..8) {
            let t = z_triangle(&ks(&v)).unwrap();
            let mut w = v.clone();
            w.push(extra);
            let t2 = z_triangle(&ks(&w)).unwrap();
            for c in &t2.corners {
                prop_assert!(triangle_contains(&t.corners, c) != Containment::Outside);
            }
            prop_assert!(t2.area <= t.area * (1.0 + 1e-12));
            if extra >= 2 || v.iter().any(|&k| k >= 2) {
                prop_assert!(t2.area < t.area || t.area == 0.0);
            }
        }

        #[test]
        fn width_collapses(v in prop::collection::vec(1u64..6, 2..6)) {
            prop_assume!(v.iter().any(|&k| k >= 2));
            let seq: Vec<u64> = v.iter().copied().cycle().take(60).collect();
            let t = z_triangle(&ks(&seq)).unwrap();
            prop_assert!(t.width < 1e-3, "{}", t.width);
        }

        #[test]
        fn hilbert_of_mobius_images(k in 2u64..30, kp in 2u64..30, xi in 0.01f64..=1.0) {
            let m = MobiusMap2::new(k, kp, xi);
            let d = hilbert_metric(m.apply_vec([1.0, 0.0]), m.apply_vec([0.0, 1.0])).unwrap();
            let expect = ((k as f64) * (kp as f64 + xi) / ((k as f64 - 1.0) * xi)).ln();
            prop_assert!((d - expect).abs() < 1e-12 * expect.abs().max(1.0));
            prop_assert!(m.det() > 0.0);
        }

        #[test]
        fn corrected_tanh_bound(k in 2u64..50, kp in 1u64..200, xi in 0.0f64..=1.0) {
            let f = contraction_factor(k, kp, xi);
            let bound = 1.0 - ((k - 1) as f64 / k as f64) * (xi / kp as f64).sqrt() / 2f64.sqrt();
            prop_assert!(f <= bound + 1e-12, "{} > {}", f, bound);
        }
    }
}
