//! Random entry distributions and the pipeline that turns `k` sampled
//! matrices into the flag of cokernels of their partial products.
//!
//! Every sample owns a ChaCha stream indexed by its position, so a run is a
//! pure function of `(seed, sample index)` regardless of how samples are
//! scheduled across threads.

mod corank;
mod distribution;
mod moment;

pub use corank::{sample_corank, CorankSample, CorankSampler};
pub use distribution::{alpha_of, parse_rational, Alpha, EntryDistribution, EntrySampler};
pub use moment::{estimate_moment, estimate_moments, MomentEstimate};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{canonicalize_flag_with, Bounds, ExplicitGroup, FlagClass, GroupError, Subgroup};
use crate::linalg::{cokernel_type, cokernel_with_images, product_chain, rank_mod_p, LinalgError, MatrixMod, RingSpec};
use crate::partition::{aut_order, Partition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("cannot parse distribution `{0}`: {1}")]
    Parse(String, String),
    #[error("distribution {dist} is degenerate modulo {p}")]
    Degenerate { dist: String, p: u64 },
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("invalid precision policy: start {start}, max {max}")]
    Policy { start: u32, max: u32 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Working precision schedule: start at `p^start`, double the exponent on
/// saturation, give up beyond `max` (capped to what fits in a machine word).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub start: u32,
    pub max: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { start: 8, max: 64 }
    }
}

impl PrecisionPolicy {
    /// The exponents tried for prime `p`, in order.
    pub fn schedule(&self, p: u64) -> Result<Vec<u32>, SamplerError> {
        let cap = self.max.min(RingSpec::max_precision(p));
        if self.start == 0 || self.start > cap {
            return Err(SamplerError::Policy {
                start: self.start,
                max: self.max,
            });
        }
        let mut out = vec![self.start];
        let mut n = self.start;
        while n < cap {
            n = (n * 2).min(cap);
            out.push(n);
        }
        Ok(out)
    }
}

/// The RNG for sample `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Integer matrices drawn for one sample, kept so that precision can be
/// raised without redrawing.
#[derive(Clone, Debug)]
pub struct Draws {
    pub n: usize,
    pub matrices: Vec<Vec<i64>>,
}

impl Draws {
    pub fn sample(sampler: &EntrySampler, n: usize, k: usize, rng: &mut ChaCha8Rng) -> Self {
        let matrices = (0..k)
            .map(|_| (0..n * n).map(|_| sampler.sample(rng)).collect())
            .collect();
        Draws { n, matrices }
    }

    /// Coranks over `F_p` of each factor.
    pub fn factor_coranks(&self, p: u64) -> Result<Vec<usize>, SamplerError> {
        let ring = RingSpec::new(p, 1)?;
        Ok(self.reduce(ring).iter().map(|m| self.n - rank_mod_p(m)).collect())
    }

    pub fn reduce(&self, ring: RingSpec) -> Vec<MatrixMod> {
        self.matrices
            .iter()
            .map(|m| MatrixMod::from_i64(ring, self.n, self.n, m))
            .collect()
    }
}

/// `n × n` matrix of iid entries reduced mod `p^N`.
pub fn sample_matrix(
    dist: &EntryDistribution,
    n: usize,
    ring: RingSpec,
    rng: &mut ChaCha8Rng,
) -> Result<MatrixMod, SamplerError> {
    let sampler = EntrySampler::new(dist)?;
    let values: Vec<i64> = (0..n * n).map(|_| sampler.sample(rng)).collect();
    Ok(MatrixMod::from_i64(ring, n, n, &values))
}

/// The explicit cokernel flag of one sample at one prime: the top group
/// `cok(M_1⋯M_k)_p` and its kernel chain `H_1 ≤ … ≤ H_{k-1}`.
#[derive(Clone, Debug)]
pub struct ExplicitFlag {
    pub group: ExplicitGroup,
    pub chain: Vec<Subgroup>,
    pub precision: u32,
    /// Types of `cok(M_i)` for each factor.
    pub factor_types: Vec<Partition>,
}

/// Builds the explicit flag from integer draws, raising precision on
/// saturation. Returns `None` when every precision in the schedule saturates.
pub fn explicit_flag(draws: &Draws, p: u64, schedule: &[u32]) -> Result<Option<ExplicitFlag>, SamplerError> {
    let k = draws.matrices.len();
    if k == 0 {
        return Err(SamplerError::ZeroK);
    }
    'precision: for &prec in schedule {
        let ring = RingSpec::new(p, prec)?;
        let mats = draws.reduce(ring);
        let mut factor_types = Vec::with_capacity(k);
        if k == 1 {
            match cokernel_type(&mats[0]).finite() {
                Some(t) => factor_types.push(t.clone()),
                None => continue 'precision,
            }
            let group = ExplicitGroup::new(p, factor_types[0].clone())?;
            return Ok(Some(ExplicitFlag {
                group,
                chain: Vec::new(),
                precision: prec,
                factor_types,
            }));
        }
        for m in &mats {
            match cokernel_type(m).finite() {
                Some(t) => factor_types.push(t.clone()),
                None => continue 'precision,
            }
        }
        let products = product_chain(&mats)?;
        // Extra columns: the blocks P_{k-1}, P_{k-2}, …, P_1, so that block
        // i spans H_i = im(P_{k-i}) / im(P_k).
        let mut extra = products[k - 2].clone();
        for i in (0..k - 2).rev() {
            extra = extra.hstack(&products[i])?;
        }
        let ci = cokernel_with_images(&products[k - 1], &extra)?;
        let Some(top) = ci.cokernel_type().finite().cloned() else {
            continue 'precision;
        };
        let group = ExplicitGroup::new(p, top)?;
        let n = draws.n;
        let mut chain = Vec::with_capacity(k - 1);
        for block in 0..k - 1 {
            let gens: Vec<Vec<u64>> = ci.images[block * n..(block + 1) * n].to_vec();
            chain.push(group.span(&gens)?);
        }
        return Ok(Some(ExplicitFlag {
            group,
            chain,
            precision: prec,
            factor_types,
        }));
    }
    Ok(None)
}

/// The outcome of one sample at one prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeRecord {
    pub p: u64,
    /// Types of `cok(M_1⋯M_i)_p` for `i = 1..k`; empty when saturated.
    pub types: Vec<Partition>,
    /// Types of `cok(M_i)_p` for each factor; empty when saturated.
    pub factor_types: Vec<Partition>,
    /// For `k = 2`, the type of `ker(cok(M_1 M_2) → cok(M_1))`.
    pub kernel_type: Option<Partition>,
    /// Canonical flag class, or `None` when outside the canonicalization
    /// bounds (only the marginal types are then available) or saturated.
    pub flag: Option<FlagClass>,
    pub saturated: bool,
    pub precision: u32,
}

/// One sample across all primes of the run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub stream: u64,
    pub primes: Vec<PrimeRecord>,
}

impl SampleRecord {
    pub fn saturated(&self) -> bool {
        self.primes.iter().any(|r| r.saturated)
    }

    /// Flag class key across primes, or `None` if any prime lacks one.
    pub fn flag_key(&self) -> Option<String> {
        let parts: Option<Vec<String>> = self
            .primes
            .iter()
            .map(|r| r.flag.as_ref().map(|f| f.to_string()))
            .collect();
        parts.map(|v| v.join(" x "))
    }

    /// Marginal type tuple key across primes, or `None` if saturated.
    pub fn types_key(&self) -> Option<String> {
        if self.saturated() {
            return None;
        }
        let parts: Vec<String> = self
            .primes
            .iter()
            .map(|r| {
                let types: Vec<String> = r.types.iter().map(Partition::to_string).collect();
                format!("p={} {}", r.p, types.join(" -> "))
            })
            .collect();
        Some(parts.join(" x "))
    }
}

/// Everything needed to draw flag samples.
#[derive(Clone, Debug)]
pub struct FlagSampler {
    pub primes: Vec<u64>,
    pub n: usize,
    pub k: usize,
    pub bounds: Bounds,
    entries: EntrySampler,
    schedules: Vec<Vec<u32>>,
}

impl FlagSampler {
    pub fn new(
        dist: &EntryDistribution,
        primes: &[u64],
        n: usize,
        k: usize,
        policy: PrecisionPolicy,
        bounds: Bounds,
    ) -> Result<Self, SamplerError> {
        if k == 0 {
            return Err(SamplerError::ZeroK);
        }
        for &p in primes {
            if let Alpha::Degenerate = alpha_of(dist, p)? {
                return Err(SamplerError::Degenerate {
                    dist: dist.to_string(),
                    p,
                });
            }
        }
        let schedules = primes.iter().map(|&p| policy.schedule(p)).collect::<Result<_, _>>()?;
        Ok(FlagSampler {
            primes: primes.to_vec(),
            n,
            k,
            bounds,
            entries: EntrySampler::new(dist)?,
            schedules,
        })
    }

    pub fn draws(&self, seed: u64, stream: u64) -> Draws {
        let mut rng = stream_rng(seed, stream);
        Draws::sample(&self.entries, self.n, self.k, &mut rng)
    }

    fn within_bounds(&self, g: &ExplicitGroup) -> bool {
        let order_ok = g.order().is_some_and(|o| o <= self.bounds.max_group_order);
        order_ok && aut_order(g.partition(), g.p()) <= self.bounds.max_aut_order.into()
    }

    /// Runs the pipeline on sample `stream`.
    pub fn sample(&self, seed: u64, stream: u64) -> Result<SampleRecord, SamplerError> {
        self.record(&self.draws(seed, stream), stream)
    }

    /// Runs the pipeline on given draws.
    pub fn record(&self, draws: &Draws, stream: u64) -> Result<SampleRecord, SamplerError> {
        let mut primes = Vec::with_capacity(self.primes.len());
        for (&p, schedule) in self.primes.iter().zip(&self.schedules) {
            let rec = match explicit_flag(draws, p, schedule)? {
                None => PrimeRecord {
                    p,
                    types: Vec::new(),
                    factor_types: Vec::new(),
                    kernel_type: None,
                    flag: None,
                    saturated: true,
                    precision: *schedule.last().expect("nonempty schedule"),
                },
                Some(f) => {
                    let g = &f.group;
                    let mut types: Vec<Partition> =
                        (1..self.k).map(|i| g.quotient_type(&f.chain[self.k - 1 - i])).collect();
                    types.push(g.partition().clone());
                    let kernel_type = (self.k == 2).then(|| g.subgroup_type(&f.chain[0]));
                    let flag = if self.within_bounds(g) {
                        Some(canonicalize_flag_with(g, &f.chain, &self.bounds)?)
                    } else {
                        None
                    };
                    PrimeRecord {
                        p,
                        types,
                        factor_types: f.factor_types,
                        kernel_type,
                        flag,
                        saturated: false,
                        precision: f.precision,
                    }
                }
            };
            primes.push(rec);
        }
        Ok(SampleRecord { stream, primes })
    }

    /// Samples `0..count` in parallel on the current rayon pool, in stream order.
    pub fn sample_many(&self, seed: u64, count: u64) -> Result<Vec<SampleRecord>, SamplerError> {
        (0..count).into_par_iter().map(|s| self.sample(seed, s)).collect()
    }
}

/// Convenience wrapper: one flag sample at a single prime.
pub fn sample_flag(
    dist: &EntryDistribution,
    n: usize,
    k: usize,
    p: u64,
    policy: PrecisionPolicy,
    seed: u64,
    stream: u64,
) -> Result<SampleRecord, SamplerError> {
    FlagSampler::new(dist, &[p], n, k, policy, Bounds::default())?.sample(seed, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::flag_aut_order;

    fn part(p: &[u32]) -> Partition {
        Partition::new(p.to_vec())
    }

    #[test]
    fn schedule_doubles_and_caps() {
        assert_eq!(PrecisionPolicy::default().schedule(2).unwrap(), vec![8, 16, 32, 62]);
        assert_eq!(
            PrecisionPolicy { start: 3, max: 10 }.schedule(3).unwrap(),
            vec![3, 6, 10]
        );
        assert!(PrecisionPolicy { start: 0, max: 10 }.schedule(2).is_err());
    }

    #[test]
    fn hand_flag() {
        // M_1 = diag(2,1), M_2 = diag(1,2): the product is diag(2,2).
        let draws = Draws {
            n: 2,
            matrices: vec![vec![2, 0, 0, 1], vec![1, 0, 0, 2]],
        };
        let f = explicit_flag(&draws, 2, &[4]).unwrap().unwrap();
        assert_eq!(f.group.partition(), &part(&[1, 1]));
        assert_eq!(f.group.quotient_type(&f.chain[0]), part(&[1]));
        assert_eq!(f.group.subgroup_type(&f.chain[0]), part(&[1]));
        assert_eq!(f.factor_types, vec![part(&[1]), part(&[1])]);
        assert_eq!(flag_aut_order(&f.group, &f.chain).unwrap(), 2);
    }

    #[test]
    fn identity_flag_is_trivial() {
        let draws = Draws {
            n: 3,
            matrices: vec![vec![1, 0, 0, 0, 1, 0, 0, 0, 1]; 3],
        };
        let f = explicit_flag(&draws, 2, &[8]).unwrap().unwrap();
        assert!(f.group.partition().is_empty());
        assert!(f.chain.iter().all(Subgroup::is_trivial));
    }

    #[test]
    fn singular_draws_saturate() {
        let draws = Draws {
            n: 2,
            matrices: vec![vec![1, 1, 1, 1]],
        };
        assert!(explicit_flag(&draws, 2, &[4, 8]).unwrap().is_none());
        let dist: EntryDistribution = "uniform:0..1".parse().unwrap();
        let s = FlagSampler::new(
            &dist,
            &[2],
            1,
            1,
            PrecisionPolicy { start: 2, max: 4 },
            Bounds::default(),
        )
        .unwrap();
        // A 1x1 matrix is zero with probability 1/2; such samples saturate.
        let recs = s.sample_many(3, 64).unwrap();
        assert!(recs.iter().any(SampleRecord::saturated));
        assert!(recs.iter().any(|r| !r.saturated()));
    }

    #[test]
    fn records_are_deterministic_and_consistent() {
        let dist: EntryDistribution = "uniform:0..7".parse().unwrap();
        let s = FlagSampler::new(&dist, &[2, 3], 12, 2, PrecisionPolicy::default(), Bounds::default()).unwrap();
        let a = s.sample_many(9, 200).unwrap();
        let b: Vec<SampleRecord> = (0..200).map(|i| s.sample(9, i).unwrap()).collect();
        assert_eq!(a, b);
        for rec in &a {
            for r in &rec.primes {
                assert!(!r.saturated);
                let (g1, g2) = (&r.types[0], &r.types[1]);
                let kt = r.kernel_type.as_ref().unwrap();
                assert_eq!(g2.size(), g1.size() + kt.size());
                assert_eq!(&r.factor_types[0], g1);
                assert_eq!(&r.factor_types[1], kt);
            }
        }
    }

    #[test]
    fn degenerate_distribution_is_rejected() {
        let dist: EntryDistribution = "const:0".parse().unwrap();
        assert!(matches!(
            FlagSampler::new(&dist, &[2], 4, 1, PrecisionPolicy::default(), Bounds::default()),
            Err(SamplerError::Degenerate { .. })
        ));
    }

    #[test]
    fn sample_matrix_support_and_golden() {
        let ring = RingSpec::new(2, 3).unwrap();
        let dist: EntryDistribution = "uniform:0..1".parse().unwrap();
        let m = sample_matrix(&dist, 5, ring, &mut stream_rng(1, 0)).unwrap();
        assert!(m.entries().iter().all(|&x| x <= 1));
        let e = sample_matrix(&dist, 0, ring, &mut stream_rng(1, 0)).unwrap();
        assert_eq!((e.rows(), e.cols()), (0, 0));
        let haar: EntryDistribution = "haar:2^12".parse().unwrap();
        let ring = RingSpec::new(2, 12).unwrap();
        let a = sample_matrix(&haar, 3, ring, &mut stream_rng(42, 7)).unwrap();
        let b = sample_matrix(&haar, 3, ring, &mut stream_rng(42, 7)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.entries(), &[526, 1336, 2520, 2022, 1608, 902, 924, 1030, 1217]);
        let c = sample_matrix(&haar, 3, ring, &mut stream_rng(42, 8)).unwrap();
        assert_ne!(a, c);
    }
}
