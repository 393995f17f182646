//! Monte Carlo estimate of how much of `U` is of finite type.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ItmError, Result};
use crate::gauss::{classify, Verdict};
use crate::itm::ItmParams;
use crate::numeric::{BigFloat, Mode};

/// Sample coordinates are multiples of `2^-SAMPLE_BITS`.
pub const SAMPLE_BITS: u32 = 32;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub steps: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyReport {
    pub n_samples: usize,
    pub budget: usize,
    pub seed: u64,
    pub finite: usize,
    pub fraction_finite: f64,
    /// Escape steps of the finite samples.
    pub histogram: Vec<HistogramBin>,
}

/// Points uniform in `U` on the grid `2^-32 Z^2`, drawn from ChaCha8 with
/// the given seed.
pub fn sample_u(n: usize, seed: u64) -> Vec<(BigRational, BigRational)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let den = BigInt::from(1u64 << SAMPLE_BITS);
    (0..n)
        .map(|_| {
            let (u, v): (u32, u32) = (rng.gen(), rng.gen());
            let (a, b) = if u >= v { (u, v) } else { (v, u) };
            (BigRational::new(a.into(), den.clone()), BigRational::new(b.into(), den.clone()))
        })
        .collect()
}

/// Classifies `n_samples` exact rational samples with the given budget.
///
/// Samples are classified in parallel; the histogram is aggregated in
/// sample order, so the report depends only on the arguments.
pub fn measure_survey(n_samples: usize, budget: usize, seed: u64) -> Result<SurveyReport> {
    measure_survey_in(n_samples, budget, seed, Mode::Exact)
}

/// [`measure_survey`] with the samples classified in the given arithmetic.
/// In float mode each sample is rounded to the precision first.
pub fn measure_survey_in(n_samples: usize, budget: usize, seed: u64, mode: Mode) -> Result<SurveyReport> {
    if n_samples == 0 {
        return Err(ItmError::InvalidArgument("n_samples must be at least 1".into()));
    }
    let samples = sample_u(n_samples, seed);
    let outcomes: Vec<Option<usize>> = samples
        .into_par_iter()
        .map(|(a, b)| {
            let c = match mode {
                Mode::Exact => classify(&ItmParams::new(a, b), budget)?,
                Mode::Float(bits) => classify(
                    &ItmParams::new(BigFloat::from_rational(&a, bits), BigFloat::from_rational(&b, bits)),
                    budget,
                )?,
            };
            Ok(match c.verdict {
                Verdict::FiniteType { steps, .. } => Some(steps),
                _ => None,
            })
        })
        .collect::<Result<_>>()?;
    let mut hist = BTreeMap::new();
    for s in outcomes.iter().flatten() {
        *hist.entry(*s).or_insert(0usize) += 1;
    }
    let finite = outcomes.iter().flatten().count();
    Ok(SurveyReport {
        n_samples,
        budget,
        seed,
        finite,
        fraction_finite: finite as f64 / n_samples as f64,
        histogram: hist.into_iter().map(|(steps, count)| HistogramBin { steps, count }).collect(),
    })
}
