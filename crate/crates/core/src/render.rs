//! Raster approximations of the set `A` of infinite-type parameters as
//! 8-bit grayscale PGM images.
//!
//! Pixel `(x, y)` covers `α ∈ [α_min + x·dα, α_min + (x+1)·dα]` and
//! `β ∈ [β_max - (y+1)·dβ, β_max - y·dβ]`; row 0 is the top of the image.

use std::cmp::Ordering;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ItmError, Result};
use crate::gauss::{classify, Verdict};
use crate::itm::ItmParams;
use crate::matrix::Mat3;
use crate::numeric::{pk_roots, BigFloat, Mode, RootKind};

/// Upper bound on `width * height`.
pub const MAX_PIXELS: usize = 1 << 24;
/// Default per-pixel node cap for the exact escape-time search.
pub const DEFAULT_NODE_CAP: usize = 200_000;
/// Cells examined beyond the first when a polygon reaches `α = 0`.
const K_SPAN_CAP: u64 = 256;
/// Fixed points `(r_k, r_k²)` with `2 <= k <= ANCHOR_K_MAX` serve as known
/// points of `A` during the escape-time search.
const ANCHOR_K_MAX: u64 = 40;

/// Rational boxes `[lo, hi] × [lo², hi²]` around the fixed points of `G`.
fn anchors() -> &'static [[Pt; 4]] {
    static CELL: OnceLock<Vec<[Pt; 4]>> = OnceLock::new();
    CELL.get_or_init(|| compute_anchors().expect("P_k has a root in each cell for k >= 2"))
}

fn compute_anchors() -> Result<Vec<[Pt; 4]>> {
    let tol = BigRational::new(1.into(), BigInt::from(10).pow(30));
    (2..=ANCHOR_K_MAX)
        .map(|k| {
            let roots = pk_roots(k, &tol)?;
            let r = roots.get(RootKind::Middle);
            let (lo, hi) = (r.lo().clone(), r.hi().clone());
            let (lo2, hi2) = (&lo * &lo, &hi * &hi);
            Ok([(lo.clone(), lo2.clone()), (hi.clone(), lo2), (hi.clone(), hi2.clone()), (lo, hi2)])
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RenderMode {
    EscapeTime { max_iters: usize },
    InverseIfs { depth: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Palette {
    /// Gray level linear in the escape step.
    Linear,
    /// Gray level linear in `ln(1 + step)`.
    Log,
}

/// Sub-rectangle `[α_min, α_max] × [β_min, β_max]` of the unit square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Viewport {
    pub alpha_min: BigRational,
    pub alpha_max: BigRational,
    pub beta_min: BigRational,
    pub beta_max: BigRational,
}

impl Viewport {
    pub fn unit() -> Self {
        Viewport {
            alpha_min: BigRational::zero(),
            alpha_max: BigRational::one(),
            beta_min: BigRational::zero(),
            beta_max: BigRational::one(),
        }
    }

    pub fn new(
        alpha_min: BigRational,
        alpha_max: BigRational,
        beta_min: BigRational,
        beta_max: BigRational,
    ) -> Result<Self> {
        let (zero, one) = (BigRational::zero(), BigRational::one());
        let ok = zero <= alpha_min
            && alpha_min < alpha_max
            && alpha_max <= one
            && zero <= beta_min
            && beta_min < beta_max
            && beta_max <= one;
        if !ok {
            return Err(ItmError::InvalidArgument("viewport must be a nondegenerate sub-rectangle of [0,1]^2".into()));
        }
        Ok(Viewport { alpha_min, alpha_max, beta_min, beta_max })
    }
}

#[derive(Clone, Debug)]
pub struct RenderConfig {
    pub width: usize,
    pub height: usize,
    pub mode: RenderMode,
    pub viewport: Viewport,
    pub palette: Palette,
    /// `Exact` uses polygon propagation; `Float(bits)` classifies pixel
    /// centers at that precision.
    pub arithmetic: Mode,
    pub node_cap: usize,
}

impl RenderConfig {
    pub fn new(width: usize, height: usize, mode: RenderMode) -> Self {
        RenderConfig {
            width,
            height,
            mode,
            viewport: Viewport::unit(),
            palette: Palette::Linear,
            arithmetic: Mode::Exact,
            node_cap: DEFAULT_NODE_CAP,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(ItmError::InvalidArgument("image dimensions must be positive".into()));
        }
        if self.width.saturating_mul(self.height) > MAX_PIXELS {
            return Err(ItmError::InvalidArgument(format!("at most {MAX_PIXELS} pixels")));
        }
        match self.mode {
            RenderMode::EscapeTime { max_iters: 0 } => {
                Err(ItmError::InvalidArgument("max_iters must be positive".into()))
            }
            RenderMode::InverseIfs { depth: 0 } => Err(ItmError::InvalidArgument("depth must be positive".into())),
            _ => Ok(()),
        }
    }

    fn pixel_size(&self) -> (BigRational, BigRational) {
        let v = &self.viewport;
        (
            (&v.alpha_max - &v.alpha_min) / BigInt::from(self.width),
            (&v.beta_max - &v.beta_min) / BigInt::from(self.height),
        )
    }

    /// Pixel containing `(α, β)`; points on a shared edge go to the pixel of
    /// larger `α` or smaller row index.
    pub fn pixel_of(&self, alpha: &BigRational, beta: &BigRational) -> Option<(usize, usize)> {
        let v = &self.viewport;
        if alpha < &v.alpha_min || alpha > &v.alpha_max || beta < &v.beta_min || beta > &v.beta_max {
            return None;
        }
        let (dw, dh) = self.pixel_size();
        let x = ((alpha - &v.alpha_min) / dw).floor().to_integer().to_usize()?.min(self.width - 1);
        let y = ((&v.beta_max - beta) / dh).floor().to_integer().to_usize()?.min(self.height - 1);
        Some((x, y))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Binary `P5` encoding with maxval 255.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<Image> {
        let bad = || ItmError::Parse("not an 8-bit binary PGM".into());
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad());
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?.to_string());
        }
        if fields[0] != "P5" || fields[3] != "255" {
            return Err(bad());
        }
        let width: usize = fields[1].parse().map_err(|_| bad())?;
        let height: usize = fields[2].parse().map_err(|_| bad())?;
        let pixels = bytes.get(pos + 1..).ok_or_else(bad)?.to_vec();
        if pixels.len() != width * height {
            return Err(bad());
        }
        Ok(Image { width, height, pixels })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RenderStats {
    pub black_pixels: usize,
    /// Searches cut short by a cap: escape-time pixels whose value is only a
    /// lower bound, or IFS accumulation tails left undrawn.
    pub truncations: usize,
}

/// Per-pixel escape value: `0` when the pixel misses `U°`, `n` in
/// `1..=budget` when every point of it has left `U°` after at most `n`
/// steps, `budget + 1` when some point is still in `U°` after `budget`
/// steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EscapeValue {
    pub steps: usize,
    pub capped: bool,
}

pub fn render(cfg: &RenderConfig) -> Result<(Image, RenderStats)> {
    cfg.validate()?;
    match cfg.mode {
        RenderMode::EscapeTime { max_iters } => render_escape(cfg, max_iters),
        RenderMode::InverseIfs { depth } => Ok(render_ifs(cfg, depth)),
    }
}

fn gray(palette: Palette, steps: usize, budget: usize) -> u8 {
    let top = budget + 1;
    if steps >= top {
        return 0;
    }
    let t = match palette {
        Palette::Linear => steps as f64 / top as f64,
        Palette::Log => (1.0 + steps as f64).ln() / (1.0 + top as f64).ln(),
    };
    (255.0 * (1.0 - t)).round() as u8
}

fn render_escape(cfg: &RenderConfig, budget: usize) -> Result<(Image, RenderStats)> {
    let anchors = anchors();
    let values: Vec<EscapeValue> = (0..cfg.width * cfg.height)
        .into_par_iter()
        .map(|i| pixel_escape_with(cfg, i % cfg.width, i / cfg.width, budget, anchors))
        .collect::<Result<_>>()?;
    let mut stats = RenderStats::default();
    let pixels = values
        .iter()
        .map(|v| {
            stats.truncations += v.capped as usize;
            let g = gray(cfg.palette, v.steps, budget);
            stats.black_pixels += (g == 0) as usize;
            g
        })
        .collect();
    Ok((Image { width: cfg.width, height: cfg.height, pixels }, stats))
}

type Pt = (BigRational, BigRational);

fn pixel_rect(cfg: &RenderConfig, x: usize, y: usize) -> [Pt; 4] {
    let v = &cfg.viewport;
    let (dw, dh) = cfg.pixel_size();
    let a0 = &v.alpha_min + &dw * BigInt::from(x);
    let a1 = &a0 + &dw;
    let b1 = &v.beta_max - &dh * BigInt::from(y);
    let b0 = &b1 - &dh;
    [(a0.clone(), b0.clone()), (a1.clone(), b0), (a1, b1.clone()), (a0, b1)]
}

pub fn pixel_escape(cfg: &RenderConfig, x: usize, y: usize, budget: usize) -> Result<EscapeValue> {
    pixel_escape_with(cfg, x, y, budget, anchors())
}

fn pixel_escape_with(
    cfg: &RenderConfig,
    x: usize,
    y: usize,
    budget: usize,
    anchors: &[[Pt; 4]],
) -> Result<EscapeValue> {
    let rect = pixel_rect(cfg, x, y);
    match cfg.arithmetic {
        Mode::Exact => {
            let Some(poly) = clip_to_u(rect.to_vec()) else {
                return Ok(EscapeValue { steps: 0, capped: false });
            };
            let mut search = Search { budget, nodes: 0, cap: cfg.node_cap, capped: false, anchors };
            let steps = search.run(poly, 0);
            // A pixel that reached the budget is exact whatever was skipped.
            Ok(EscapeValue { steps, capped: search.capped && steps <= budget })
        }
        Mode::Float(bits) => {
            let two = BigRational::from_integer(2.into());
            let a = (&rect[0].0 + &rect[2].0) / &two;
            let b = (&rect[0].1 + &rect[2].1) / &two;
            let p = ItmParams::new(BigFloat::from_rational(&a, bits), BigFloat::from_rational(&b, bits));
            if p.region == crate::itm::Region::Invalid {
                return Ok(EscapeValue { steps: 0, capped: false });
            }
            let c = classify(&p, budget)?;
            Ok(match c.verdict {
                Verdict::FiniteType { steps, .. } => EscapeValue { steps, capped: false },
                Verdict::Inconclusive { budget: b } if b == budget => EscapeValue { steps: budget + 1, capped: false },
                Verdict::Inconclusive { budget: b } => EscapeValue { steps: b, capped: true },
                Verdict::InfiniteCertified(_) => EscapeValue { steps: budget + 1, capped: false },
            })
        }
    }
}

/// Depth-first search over the cells a convex polygon meets, maximizing the
/// number of steps some point of it stays in `U°`.
struct Search<'a> {
    budget: usize,
    nodes: usize,
    cap: usize,
    capped: bool,
    anchors: &'a [[Pt; 4]],
}

impl Search<'_> {
    /// `poly` has positive area, lies in the closure of `U` and is the image
    /// of part of the pixel after `depth` steps.
    fn run(&mut self, poly: Vec<Pt>, depth: usize) -> usize {
        if depth == self.budget {
            return depth + 1;
        }
        // A polygon holding a point of A never empties.
        if self.anchors.iter().any(|b| b.iter().all(|c| convex_contains(&poly, c))) {
            return self.budget + 1;
        }
        self.nodes += 1;
        if self.nodes > self.cap {
            self.capped = true;
            return depth + 1;
        }
        let mut children = Vec::new();
        let amax = poly.iter().map(|p| &p.0).max().unwrap();
        let amin = poly.iter().map(|p| &p.0).min().unwrap();
        let k_lo = (BigRational::one() / amax).floor().to_integer().to_u64().unwrap_or(1).max(1);
        let k_hi = if amin.is_positive() {
            (BigRational::one() / amin).floor().to_integer().to_u64().unwrap_or(u64::MAX)
        } else {
            u64::MAX
        };
        let k_end = if k_hi - k_lo > K_SPAN_CAP {
            self.capped = true;
            k_lo + K_SPAN_CAP
        } else {
            k_hi
        };
        for k in k_lo..=k_end {
            let lo = BigRational::new(1.into(), BigInt::from(k + 1));
            let hi = BigRational::new(1.into(), BigInt::from(k));
            let piece = clip(&poly, &lo, &hi);
            let Some(piece) = nondegenerate(piece) else { continue };
            let image: Vec<Pt> = piece
                .iter()
                .map(|(a, b)| (b / a, (b - BigRational::one()) / a + BigRational::from_integer(k.into())))
                .collect();
            if let Some(img) = clip_to_u(image) {
                let area = twice_area(&img);
                children.push((area, img));
            }
        }
        // Larger pieces first: they reach the budget soonest when they can.
        children.sort_by(|x, y| y.0.cmp(&x.0));
        let mut best = depth + 1;
        for (_, child) in children {
            best = best.max(self.run(child, depth + 1));
            if best > self.budget || self.nodes > self.cap {
                break;
            }
        }
        best
    }
}

/// `poly ∩ {lo <= α <= hi}`.
fn clip(poly: &[Pt], lo: &BigRational, hi: &BigRational) -> Vec<Pt> {
    let p = clip_half(poly, |pt| &pt.0 - lo);
    clip_half(&p, |pt| hi - &pt.0)
}

/// `poly ∩ closure(U)`, or `None` when that has zero area.
fn clip_to_u(poly: Vec<Pt>) -> Option<Vec<Pt>> {
    let p = clip_half(&poly, |pt| pt.1.clone());
    let p = clip_half(&p, |pt| &pt.0 - &pt.1);
    let p = clip_half(&p, |pt| BigRational::one() - &pt.0);
    nondegenerate(p)
}

/// Sutherland-Hodgman step keeping `f >= 0`, for affine `f`.
fn clip_half(poly: &[Pt], f: impl Fn(&Pt) -> BigRational) -> Vec<Pt> {
    let n = poly.len();
    let vals: Vec<BigRational> = poly.iter().map(&f).collect();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = (i + 1) % n;
        let (p, q) = (&poly[i], &poly[j]);
        let (fp, fq) = (&vals[i], &vals[j]);
        if !fp.is_negative() {
            out.push(p.clone());
        }
        if (fp.is_positive() && fq.is_negative()) || (fp.is_negative() && fq.is_positive()) {
            let t = fp / (fp - fq);
            out.push((&p.0 + (&q.0 - &p.0) * &t, &p.1 + (&q.1 - &p.1) * &t));
        }
    }
    out.dedup();
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

fn twice_area(poly: &[Pt]) -> BigRational {
    let n = poly.len();
    let mut s = BigRational::zero();
    for i in 0..n {
        let (p, q) = (&poly[i], &poly[(i + 1) % n]);
        s += &p.0 * &q.1 - &q.0 * &p.1;
    }
    s.abs()
}

fn nondegenerate(poly: Vec<Pt>) -> Option<Vec<Pt>> {
    (poly.len() >= 3 && twice_area(&poly).is_positive()).then_some(poly)
}

/// `inv_k` in homogeneous coordinates `(α', β', w) -> (w, α', kw + α' - β')`.
fn inverse_matrix(k: u64) -> Mat3 {
    Mat3::from_i64([[0, 0, 1], [1, 0, 0], [1, -1, k as i64]])
}

fn project(m: &Mat3, v: [i64; 3]) -> Pt {
    let r = m.apply(&v.map(BigInt::from));
    (BigRational::new(r[0].clone(), r[2].clone()), BigRational::new(r[1].clone(), r[2].clone()))
}

/// Corners of `closure(R)`.
const R_CORNERS: [[i64; 3]; 4] = [[0, -1, 1], [1, 0, 1], [1, 1, 1], [0, 0, 1]];

struct Raster<'a> {
    cfg: &'a RenderConfig,
    depth: usize,
    black: Vec<bool>,
    truncations: usize,
    k_cap: u64,
}

impl Raster<'_> {
    fn set(&mut self, x: usize, y: usize) {
        self.black[y * self.cfg.width + x] = true;
    }

    /// Pixel holding all of `pts`, if there is a single one.
    fn single_pixel(&self, pts: &[Pt]) -> Option<Option<(usize, usize)>> {
        let first = self.cfg.pixel_of(&pts[0].0, &pts[0].1);
        pts[1..].iter().all(|p| self.cfg.pixel_of(&p.0, &p.1) == first).then_some(first)
    }

    /// Pixel index ranges covering `pts`, clamped to the image, when they
    /// span at most two pixels in each direction.
    fn small_span(&self, pts: &[Pt]) -> Option<(usize, usize, usize, usize)> {
        let v = &self.cfg.viewport;
        let clamp = |p: &Pt| {
            let a = p.0.clone().max(v.alpha_min.clone()).min(v.alpha_max.clone());
            let b = p.1.clone().max(v.beta_min.clone()).min(v.beta_max.clone());
            self.cfg.pixel_of(&a, &b).expect("clamped into the viewport")
        };
        let px: Vec<(usize, usize)> = pts.iter().map(clamp).collect();
        let x0 = px.iter().map(|p| p.0).min()?;
        let x1 = px.iter().map(|p| p.0).max()?;
        let y0 = px.iter().map(|p| p.1).min()?;
        let y1 = px.iter().map(|p| p.1).max()?;
        (x1 - x0 <= 1 && y1 - y0 <= 1).then_some((x0.saturating_sub(1), x1, y0.saturating_sub(1), y1))
    }

    fn outside_viewport(&self, pts: &[Pt]) -> bool {
        let v = &self.cfg.viewport;
        pts.iter().all(|p| p.0 < v.alpha_min)
            || pts.iter().all(|p| p.0 > v.alpha_max)
            || pts.iter().all(|p| p.1 < v.beta_min)
            || pts.iter().all(|p| p.1 > v.beta_max)
    }

    /// `poly ∩ pixel (x, y)` when it has positive area.
    fn overlap(&self, poly: &[Pt], x: usize, y: usize) -> Option<Vec<Pt>> {
        let [p0, _, p2, _] = pixel_rect(self.cfg, x, y);
        let c = clip_half(poly, |p| &p.0 - &p0.0);
        let c = clip_half(&c, |p| &p2.0 - &p.0);
        let c = clip_half(&c, |p| &p.1 - &p0.1);
        let c = clip_half(&c, |p| &p2.1 - &p.1);
        nondegenerate(c)
    }

    /// Blackens the pixels meeting `poly` in a set of positive area.
    fn fill(&mut self, poly: &[Pt]) {
        let v = &self.cfg.viewport;
        let amin = poly.iter().map(|p| &p.0).min().unwrap().max(&v.alpha_min);
        let amax = poly.iter().map(|p| &p.0).max().unwrap().min(&v.alpha_max);
        let bmin = poly.iter().map(|p| &p.1).min().unwrap().max(&v.beta_min);
        let bmax = poly.iter().map(|p| &p.1).max().unwrap().min(&v.beta_max);
        let Some((x0, y0)) = self.cfg.pixel_of(amin, bmax) else { return };
        let Some((x1, y1)) = self.cfg.pixel_of(amax, bmin) else { return };
        // Edge assignment can put a far corner one pixel beyond the overlap;
        // the area test discards such pixels.
        for y in y0.saturating_sub(1)..=y1 {
            for x in x0.saturating_sub(1)..=x1 {
                if self.overlap(poly, x, y).is_some() {
                    self.set(x, y);
                }
            }
        }
    }

    /// Decides the pixels around `region ⊆ m(closure(R))` directly: a point of
    /// the region is in a depth-`depth` box exactly when its image under
    /// `m⁻¹` stays in `U°` for the remaining `depth - level` steps.
    fn settle(&mut self, m: &Mat3, level: usize, region: &[Pt], span: (usize, usize, usize, usize)) {
        let adj = m.adjugate();
        let apply = |p: &Pt| -> Pt {
            let r = |i: usize| {
                BigRational::from_integer(adj.0[i][0].clone()) * &p.0
                    + BigRational::from_integer(adj.0[i][1].clone()) * &p.1
                    + BigRational::from_integer(adj.0[i][2].clone())
            };
            let w = r(2);
            (r(0) / &w, r(1) / &w)
        };
        let (x0, x1, y0, y1) = span;
        for y in y0..=y1.min(self.cfg.height - 1) {
            for x in x0..=x1.min(self.cfg.width - 1) {
                if self.black[y * self.cfg.width + x] {
                    continue;
                }
                let Some(piece) = self.overlap(region, x, y) else { continue };
                let Some(chart) = clip_to_u(piece.iter().map(apply).collect()) else { continue };
                let budget = self.depth - level - 1;
                let mut search = Search { budget, nodes: 0, cap: self.cfg.node_cap, capped: false, anchors: anchors() };
                if search.run(chart, 0) > budget {
                    self.set(x, y);
                } else if search.capped {
                    self.truncations += 1;
                }
            }
        }
    }

    /// `m` maps `closure(R)` onto the box of a word of length `level`.
    fn visit(&mut self, m: &Mat3, level: usize) {
        let corners: Vec<Pt> = R_CORNERS.iter().map(|c| project(m, *c)).collect();
        if self.outside_viewport(&corners) {
            return;
        }
        // Every box contains boxes of all deeper levels, so a box inside one
        // pixel blackens exactly that pixel.
        if let Some(px) = self.single_pixel(&corners) {
            if let Some((x, y)) = px {
                self.set(x, y);
            }
            return;
        }
        if level == self.depth {
            self.fill(&corners);
            return;
        }
        if let Some(span) = self.small_span(&corners) {
            self.settle(m, level, &corners, span);
            return;
        }
        self.children(m, level);
    }

    fn children(&mut self, m: &Mat3, level: usize) {
        for k in 1..=self.k_cap {
            self.visit(&(m * &inverse_matrix(k)), level + 1);
            // Children j > k lie in m({0 <= β <= α <= 1/(k+1)}).
            let kk = (k + 1) as i64;
            let tail = [project(m, [0, 0, 1]), project(m, [1, 0, kk]), project(m, [1, 1, kk])];
            if self.outside_viewport(&tail) {
                return;
            }
            if let Some(span) = self.small_span(&tail) {
                if level + 1 == self.depth {
                    self.fill(&tail);
                } else {
                    self.settle(m, level, &tail, span);
                }
                return;
            }
        }
        self.truncations += 1;
    }
}

fn convex_contains(poly: &[Pt], p: &Pt) -> bool {
    let mut sign = Ordering::Equal;
    for i in 0..poly.len() {
        let (a, b) = (&poly[i], &poly[(i + 1) % poly.len()]);
        let cross = (&b.0 - &a.0) * (&p.1 - &a.1) - (&b.1 - &a.1) * (&p.0 - &a.0);
        let s = cross.cmp(&BigRational::zero());
        if s != Ordering::Equal {
            if sign != Ordering::Equal && s != sign {
                return false;
            }
            sign = s;
        }
    }
    true
}

fn render_ifs(cfg: &RenderConfig, depth: usize) -> (Image, RenderStats) {
    let k_cap = (4 * cfg.width.max(cfg.height)).max(64) as u64;
    let mut r = Raster { cfg, depth, black: vec![false; cfg.width * cfg.height], truncations: 0, k_cap };
    r.children(&Mat3::identity(), 0);
    let pixels: Vec<u8> = r.black.iter().map(|&b| if b { 0 } else { 255 }).collect();
    let stats = RenderStats { black_pixels: r.black.iter().filter(|&&b| b).count(), truncations: r.truncations };
    (Image { width: cfg.width, height: cfg.height, pixels }, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{pk_roots, RootKind};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn pgm_round_trip() {
        let img = Image { width: 3, height: 2, pixels: vec![0, 1, 2, 253, 254, 255] };
        let bytes = img.to_pgm();
        assert!(bytes.starts_with(b"P5\n3 2\n255\n"));
        assert_eq!(Image::from_pgm(&bytes).unwrap(), img);
        assert!(Image::from_pgm(b"P2\n1 1\n255\n0").is_err());
    }

    #[test]
    fn clipping_examples() {
        let sq = vec![(q(0, 1), q(0, 1)), (q(1, 1), q(0, 1)), (q(1, 1), q(1, 1)), (q(0, 1), q(1, 1))];
        let t = clip_to_u(sq.clone()).unwrap();
        assert_eq!(twice_area(&t), q(1, 1));
        let strip = clip(&t, &q(1, 3), &q(1, 2));
        assert_eq!(twice_area(&strip), q(1, 4) - q(1, 9));
        // A pixel above the diagonal touches U only along a segment.
        let above = vec![(q(0, 1), q(1, 2)), (q(1, 2), q(1, 2)), (q(1, 2), q(1, 1)), (q(0, 1), q(1, 1))];
        assert!(clip_to_u(above).is_none());
    }

    #[test]
    fn escape_values_match_classify() {
        // Pixels far from A: the polygon value bounds the center's steps.
        let cfg = RenderConfig::new(20, 20, RenderMode::EscapeTime { max_iters: 30 });
        for (x, y) in [(10, 18), (15, 15), (19, 19), (5, 17)] {
            let v = pixel_escape(&cfg, x, y, 30).unwrap();
            let r = pixel_rect(&cfg, x, y);
            let a = (&r[0].0 + &r[2].0) / BigInt::from(2);
            let b = (&r[0].1 + &r[2].1) / BigInt::from(2);
            let c = classify(&ItmParams::new(a, b), 30).unwrap();
            let steps = match c.verdict {
                Verdict::FiniteType { steps, .. } => steps,
                _ => 31,
            };
            assert!(v.steps >= steps, "pixel ({x},{y}): {v:?} < {steps}");
        }
        assert_eq!(pixel_escape(&cfg, 0, 0, 30).unwrap().steps, 0);
    }

    #[test]
    fn fixed_point_pixel_is_black() {
        let cfg = RenderConfig::new(40, 40, RenderMode::EscapeTime { max_iters: 50 });
        let r = pk_roots(3, &q(1, 1_000_000_000)).unwrap().get(RootKind::Middle).to_f64();
        let px = cfg.pixel_of(&BigRational::from_float(r).unwrap(), &BigRational::from_float(r * r).unwrap()).unwrap();
        let v = pixel_escape(&cfg, px.0, px.1, 50).unwrap();
        assert_eq!(v, EscapeValue { steps: 51, capped: false });
    }

    #[test]
    fn ifs_render_is_deterministic() {
        let cfg = RenderConfig::new(32, 32, RenderMode::InverseIfs { depth: 3 });
        let (a, sa) = render(&cfg).unwrap();
        let (b, _) = render(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(sa.black_pixels > 0);
        // Nothing above the diagonal.
        for y in 0..32 {
            for x in 0..32 {
                if x + y + 2 < 32 {
                    assert_eq!(a.get(x, y), 255, "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(render(&RenderConfig::new(0, 5, RenderMode::InverseIfs { depth: 1 })).is_err());
        assert!(render(&RenderConfig::new(5, 5, RenderMode::EscapeTime { max_iters: 0 })).is_err());
        assert!(Viewport::new(q(1, 2), q(1, 4), q(0, 1), q(1, 1)).is_err());
    }
}
