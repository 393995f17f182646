//! Finite unions of half-open intervals in `[0, 1)` and the attractor
//! iteration `Ω_{n+1} = T(Ω_n)`.

use std::cmp::Ordering;

use crate::error::{ItmError, Result};
use crate::itm::ItmParams;
use crate::numeric::Scalar;

/// Canonical union of disjoint, non-abutting half-open intervals, sorted by
/// left endpoint. Two sets are equal exactly when their interval lists are.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntervalSet<S> {
    intervals: Vec<(S, S)>,
}

impl<S: Scalar> IntervalSet<S> {
    pub fn empty() -> Self {
        IntervalSet { intervals: Vec::new() }
    }

    /// `[0, 1)`, with constants taken from `like`.
    pub fn unit(like: &S) -> Self {
        IntervalSet { intervals: vec![(like.zero_like(), like.one_like())] }
    }

    /// Builds the canonical form: empty pieces dropped, overlapping or
    /// abutting pieces merged.
    pub fn from_intervals(mut pieces: Vec<(S, S)>) -> Self {
        pieces.retain(|(a, b)| a.total_cmp(b) == Ordering::Less);
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(S, S)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            if let Some(last) = out.last_mut() {
                if a.total_cmp(&last.1) != Ordering::Greater {
                    if b.total_cmp(&last.1) == Ordering::Greater {
                        last.1 = b;
                    }
                    continue;
                }
            }
            out.push((a, b));
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[(S, S)] {
        &self.intervals
    }

    pub fn components(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Lebesgue measure, or `None` for the empty set (which has no scalar
    /// context to build a zero from).
    pub fn measure(&self) -> Option<S> {
        let mut it = self.intervals.iter();
        let (a, b) = it.next()?;
        let mut m = b.clone() - a.clone();
        for (a, b) in it {
            m = m + (b.clone() - a.clone());
        }
        Some(m)
    }

    pub fn measure_f64(&self) -> f64 {
        self.measure().map(|m| m.approx_f64()).unwrap_or(0.0)
    }

    pub fn contains(&self, x: &S) -> bool {
        self.intervals.iter().any(|(a, b)| a.total_cmp(x) != Ordering::Greater && x.total_cmp(b) == Ordering::Less)
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &Self) -> bool {
        // Both lists are sorted and canonical, so each piece of `self` must
        // sit inside a single piece of `other`.
        let mut j = 0;
        for (a, b) in &self.intervals {
            while j < other.intervals.len() && other.intervals[j].1.total_cmp(a) != Ordering::Greater {
                j += 1;
            }
            match other.intervals.get(j) {
                Some((c, d)) if c.total_cmp(a) != Ordering::Greater && b.total_cmp(d) != Ordering::Greater => {}
                _ => return false,
            }
        }
        true
    }

    /// Fewest closed intervals of length `len` covering the closure of `self`
    /// (greedy from the left, which is optimal on the line).
    pub fn covering_number(&self, len: &S) -> usize {
        let mut count = 0;
        let mut reach: Option<S> = None;
        for (a, b) in &self.intervals {
            let mut start = match &reach {
                Some(r) if b.total_cmp(r) != Ordering::Greater => continue,
                Some(r) if a.total_cmp(r) == Ordering::Less => r.clone(),
                _ => a.clone(),
            };
            loop {
                count += 1;
                let end = start + len.clone();
                if b.total_cmp(&end) != Ordering::Greater {
                    reach = Some(end);
                    break;
                }
                start = end;
            }
        }
        count
    }

    /// Pieces of `self` cut at the discontinuities of `T`, each tagged with
    /// the translation applied to it.
    fn branch_pieces(&self, p: &ItmParams<S>) -> Vec<(S, S, S)> {
        let Some((first, _)) = self.intervals.first() else {
            return Vec::new();
        };
        let one = first.one_like();
        let zero = first.zero_like();
        let cuts = [
            (zero.clone(), one.clone() - p.alpha.clone(), p.alpha.clone()),
            (one.clone() - p.alpha.clone(), one.clone() - p.beta.clone(), p.beta.clone()),
            (one.clone() - p.beta.clone(), one.clone(), p.beta.clone() - one),
        ];
        let mut out = Vec::new();
        for (a, b) in &self.intervals {
            for (lo, hi, shift) in &cuts {
                let l = max_of(a, lo);
                let h = min_of(b, hi);
                if l.total_cmp(&h) == Ordering::Less {
                    out.push((l, h, shift.clone()));
                }
            }
        }
        out
    }

    /// True when `T` maps `self` bijectively onto itself.
    pub fn is_t_bijective(&self, p: &ItmParams<S>) -> bool {
        let pieces = self.branch_pieces(p);
        let images: Vec<(S, S)> = pieces.into_iter().map(|(l, h, s)| (l + s.clone(), h + s)).collect();
        let image = IntervalSet::from_intervals(images.clone());
        if image != *self {
            return false;
        }
        // Onto and measure preserving means the image pieces cannot overlap.
        let mut sorted = images;
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        sorted.windows(2).all(|w| w[0].1.total_cmp(&w[1].0) != Ordering::Greater)
    }
}

fn max_of<S: Scalar>(a: &S, b: &S) -> S {
    if a.total_cmp(b) == Ordering::Less {
        b.clone()
    } else {
        a.clone()
    }
}

fn min_of<S: Scalar>(a: &S, b: &S) -> S {
    if a.total_cmp(b) == Ordering::Greater {
        b.clone()
    } else {
        a.clone()
    }
}

/// The image `T(S)`, in canonical form.
pub fn attractor_step<S: Scalar>(p: &ItmParams<S>, s: &IntervalSet<S>) -> IntervalSet<S> {
    let images = s.branch_pieces(p).into_iter().map(|(l, h, shift)| (l + shift.clone(), h + shift)).collect();
    IntervalSet::from_intervals(images)
}

pub const DEFAULT_COMPONENT_CAP: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct AttractorStepInfo<S> {
    pub n: usize,
    pub components: usize,
    pub measure: S,
}

#[derive(Clone, Debug)]
pub struct AttractorReport<S> {
    /// Component count and measure of `Ω_0, Ω_1, ...`.
    pub steps: Vec<AttractorStepInfo<S>>,
    /// First `n` with `Ω_{n+1} = Ω_n`.
    pub stabilized_at: Option<usize>,
    /// Set when the component cap stopped the iteration early.
    pub aborted: Option<String>,
    /// The last computed `Ω_n`.
    pub last: IntervalSet<S>,
}

/// Iterates `Ω_{n+1} = T(Ω_n)` from `Ω_0 = [0, 1)` for at most `n_max`
/// steps, stopping early once the set is invariant.
///
/// Exceeding `component_cap` stops the iteration; the report then carries
/// the steps computed so far and the reason in `aborted`.
pub fn attractor_iterate<S: Scalar>(
    p: &ItmParams<S>,
    n_max: usize,
    component_cap: usize,
) -> Result<AttractorReport<S>> {
    if n_max == 0 {
        return Err(ItmError::InvalidArgument("n_max must be at least 1".into()));
    }
    let mut set = IntervalSet::unit(&p.alpha);
    let one = p.alpha.one_like();
    let mut steps = vec![AttractorStepInfo { n: 0, components: 1, measure: one }];
    let mut stabilized_at = None;
    let mut aborted = None;
    for n in 0..n_max {
        let next = attractor_step(p, &set);
        if next.components() > component_cap {
            aborted = Some(ItmError::ComponentCap { cap: component_cap, step: n + 1 }.to_string());
            break;
        }
        let measure = next.measure().unwrap_or_else(|| p.alpha.zero_like());
        steps.push(AttractorStepInfo { n: n + 1, components: next.components(), measure });
        let done = next == set;
        set = next;
        if done {
            stabilized_at = Some(n);
            break;
        }
    }
    Ok(AttractorReport { steps, stabilized_at, aborted, last: set })
}
