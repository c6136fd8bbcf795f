use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{explicit_flag, FlagSampler, SamplerError};
use crate::group::SurjectionCounter;

/// Monte Carlo estimate of `E |Sur(flag, target)|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Samples that contributed a count.
    pub samples: u64,
    /// Samples lost to saturation or to the homomorphism budget.
    pub excluded: u64,
}

#[derive(Clone, Copy, Default)]
struct Sums {
    n: u64,
    sum: u128,
    sum_sq: u128,
    excluded: u64,
}

impl Sums {
    fn add(self, o: Sums) -> Sums {
        Sums {
            n: self.n + o.n,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
            excluded: self.excluded + o.excluded,
        }
    }

    fn estimate(&self) -> MomentEstimate {
        let n = self.n as f64;
        let mean = if self.n == 0 { f64::NAN } else { self.sum as f64 / n };
        let stderr = if self.n < 2 {
            f64::NAN
        } else {
            let var = (self.sum_sq as f64 - n * mean * mean) / (n - 1.0);
            (var.max(0.0) / n).sqrt()
        };
        MomentEstimate {
            mean,
            stderr,
            samples: self.n,
            excluded: self.excluded,
        }
    }
}

/// Estimates `E |Sur_flag(cok flag, target_j)|` for several targets from the
/// same samples. The sampler must use a single prime.
///
/// Sums are exact integers, so the result does not depend on how samples are
/// split across threads.
pub fn estimate_moments(
    sampler: &FlagSampler,
    targets: &[SurjectionCounter],
    seed: u64,
    samples: u64,
) -> Result<Vec<MomentEstimate>, SamplerError> {
    let p = *sampler.primes.first().ok_or(SamplerError::ZeroK)?;
    let schedule = sampler.schedules[0].clone();
    let per_sample = |s: u64| -> Result<Vec<Sums>, SamplerError> {
        let draws = sampler.draws(seed, s);
        let flag = explicit_flag(&draws, p, &schedule)?;
        Ok(targets
            .iter()
            .map(|t| match &flag {
                None => Sums {
                    excluded: 1,
                    ..Sums::default()
                },
                Some(f) => match t.count(&f.group, &f.chain) {
                    Ok(c) => Sums {
                        n: 1,
                        sum: c as u128,
                        sum_sq: (c as u128) * (c as u128),
                        excluded: 0,
                    },
                    Err(_) => Sums {
                        excluded: 1,
                        ..Sums::default()
                    },
                },
            })
            .collect())
    };
    let totals = (0..samples).into_par_iter().map(per_sample).try_reduce(
        || vec![Sums::default(); targets.len()],
        |a, b| Ok(a.into_iter().zip(b).map(|(x, y)| x.add(y)).collect()),
    )?;
    Ok(totals.iter().map(Sums::estimate).collect())
}

/// Single-target form of [`estimate_moments`].
pub fn estimate_moment(
    sampler: &FlagSampler,
    target: &SurjectionCounter,
    seed: u64,
    samples: u64,
) -> Result<MomentEstimate, SamplerError> {
    let target = std::slice::from_ref(target);
    Ok(estimate_moments(sampler, target, seed, samples)?.remove(0))
}
