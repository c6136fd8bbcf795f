use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SamplerError;
use crate::partition::is_prime;

/// Law of a single integer matrix entry.
///
/// Text forms: `uniform:lo..hi` (inclusive), `finite:v=w,v=w,…`,
/// `haar:p^N`, and the shorthands `const:v` and `bernoulli:q` (mass `q` on 1).
/// Weights may be decimals or fractions and must sum to exactly 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntryDistribution {
    UniformRange {
        lo: i64,
        hi: i64,
    },
    FiniteSupport {
        values: Vec<i64>,
        weights: Vec<BigRational>,
    },
    /// Uniform residues in `[0, p^N)`.
    HaarProxy {
        p: u64,
        precision: u32,
    },
}

/// Balance parameter of a distribution at a prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Alpha {
    Balanced(BigRational),
    Degenerate,
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        return (!d.is_zero()).then(|| BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

fn err(s: &str, msg: &str) -> SamplerError {
    SamplerError::Parse(s.to_string(), msg.to_string())
}

impl EntryDistribution {
    pub fn uniform(lo: i64, hi: i64) -> Result<Self, SamplerError> {
        if lo > hi {
            return Err(SamplerError::Weights(format!("empty range {lo}..{hi}")));
        }
        Ok(EntryDistribution::UniformRange { lo, hi })
    }

    pub fn finite(values: Vec<i64>, weights: Vec<BigRational>) -> Result<Self, SamplerError> {
        if values.is_empty() || values.len() != weights.len() {
            return Err(SamplerError::Weights("need one weight per value".into()));
        }
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(SamplerError::Weights("weights must be positive".into()));
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(SamplerError::Weights(format!("weights sum to {total}, not 1")));
        }
        Ok(EntryDistribution::FiniteSupport { values, weights })
    }

    pub fn haar(p: u64, precision: u32) -> Result<Self, SamplerError> {
        if !is_prime(p) {
            return Err(SamplerError::Weights(format!("{p} is not prime")));
        }
        match p.checked_pow(precision) {
            Some(m) if m <= i64::MAX as u64 && precision > 0 => Ok(EntryDistribution::HaarProxy { p, precision }),
            _ => Err(SamplerError::Weights(format!(
                "{p}^{precision} does not fit in 63 bits"
            ))),
        }
    }

    /// Mass of each residue class modulo `p`, exactly.
    pub fn residue_masses(&self, p: u64) -> Vec<BigRational> {
        let p128 = p as i128;
        let uniform = |lo: i128, hi: i128| -> Vec<BigRational> {
            let total = BigInt::from(hi - lo + 1);
            (0..p128)
                .map(|r| {
                    let count = (hi - r).div_euclid(p128) - (lo - 1 - r).div_euclid(p128);
                    BigRational::new(BigInt::from(count), total.clone())
                })
                .collect()
        };
        match self {
            EntryDistribution::UniformRange { lo, hi } => uniform(*lo as i128, *hi as i128),
            EntryDistribution::HaarProxy { p: q, precision } => uniform(0, (*q as i128).pow(*precision) - 1),
            EntryDistribution::FiniteSupport { values, weights } => {
                let mut masses = vec![BigRational::zero(); p as usize];
                for (v, w) in values.iter().zip(weights) {
                    masses[(*v as i128).rem_euclid(p128) as usize] += w;
                }
                masses
            }
        }
    }
}

/// `α = min(1/2, 1 - max_r P(ξ ≡ r mod p))`, or `Degenerate` when one class
/// carries all the mass.
pub fn alpha_of(dist: &EntryDistribution, p: u64) -> Result<Alpha, SamplerError> {
    if !is_prime(p) {
        return Err(SamplerError::Weights(format!("{p} is not prime")));
    }
    let max = dist
        .residue_masses(p)
        .into_iter()
        .max()
        .unwrap_or_else(BigRational::one);
    if max.is_one() {
        return Ok(Alpha::Degenerate);
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    Ok(Alpha::Balanced((BigRational::one() - max).min(half)))
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryDistribution::UniformRange { lo, hi } => write!(f, "uniform:{lo}..{hi}"),
            EntryDistribution::HaarProxy { p, precision } => write!(f, "haar:{p}^{precision}"),
            EntryDistribution::FiniteSupport { values, weights } => {
                let items: Vec<String> = values.iter().zip(weights).map(|(v, w)| format!("{v}={w}")).collect();
                write!(f, "finite:{}", items.join(","))
            }
        }
    }
}

impl FromStr for EntryDistribution {
    type Err = SamplerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, body) = s.split_once(':').ok_or_else(|| err(s, "expected kind:parameters"))?;
        let body = body.trim();
        match kind.trim() {
            "uniform" => {
                let (lo, hi) = body.split_once("..").ok_or_else(|| err(s, "expected lo..hi"))?;
                let lo = lo.trim().parse().map_err(|_| err(s, "bad lower bound"))?;
                let hi = hi.trim().parse().map_err(|_| err(s, "bad upper bound"))?;
                EntryDistribution::uniform(lo, hi)
            }
            "const" => {
                let v = body.parse().map_err(|_| err(s, "bad constant"))?;
                EntryDistribution::finite(vec![v], vec![BigRational::one()])
            }
            "bernoulli" => {
                let q = parse_rational(body).ok_or_else(|| err(s, "bad probability"))?;
                if !q.is_positive() || q >= BigRational::one() {
                    return Err(err(s, "probability must lie strictly between 0 and 1"));
                }
                EntryDistribution::finite(vec![0, 1], vec![BigRational::one() - &q, q])
            }
            "finite" => {
                let mut values = Vec::new();
                let mut weights = Vec::new();
                for item in body.split(',') {
                    let (v, w) = item.split_once('=').ok_or_else(|| err(s, "expected value=weight"))?;
                    values.push(v.trim().parse().map_err(|_| err(s, "bad value"))?);
                    weights.push(parse_rational(w).ok_or_else(|| err(s, "bad weight"))?);
                }
                EntryDistribution::finite(values, weights)
            }
            "haar" => {
                let (p, e) = body.split_once('^').ok_or_else(|| err(s, "expected p^N"))?;
                let p = p.trim().parse().map_err(|_| err(s, "bad prime"))?;
                let e = e.trim().parse().map_err(|_| err(s, "bad exponent"))?;
                EntryDistribution::haar(p, e)
            }
            _ => Err(err(s, "unknown kind")),
        }
    }
}

impl Serialize for EntryDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntryDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A distribution prepared for fast repeated draws.
#[derive(Clone, Debug)]
pub enum EntrySampler {
    Uniform(Uniform<i64>),
    Finite {
        values: Vec<i64>,
        index: WeightedIndex<f64>,
    },
}

impl EntrySampler {
    pub fn new(dist: &EntryDistribution) -> Result<Self, SamplerError> {
        let bad = |e: rand::distr::uniform::Error| SamplerError::Weights(e.to_string());
        Ok(match dist {
            EntryDistribution::UniformRange { lo, hi } => {
                EntrySampler::Uniform(Uniform::new_inclusive(*lo, *hi).map_err(bad)?)
            }
            EntryDistribution::HaarProxy { p, precision } => {
                let m = p.pow(*precision) as i64;
                EntrySampler::Uniform(Uniform::new(0, m).map_err(bad)?)
            }
            EntryDistribution::FiniteSupport { values, weights } => {
                let w: Vec<f64> = weights.iter().map(|w| w.to_f64().unwrap_or(0.0)).collect();
                let index = WeightedIndex::new(w).map_err(|e| SamplerError::Weights(e.to_string()))?;
                EntrySampler::Finite {
                    values: values.clone(),
                    index,
                }
            }
        })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        match self {
            EntrySampler::Uniform(u) => u.sample(rng),
            EntrySampler::Finite { values, index } => values[index.sample(rng)],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::rational;

    fn dist(s: &str) -> EntryDistribution {
        s.parse().unwrap()
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(
            alpha_of(&dist("uniform:0..1"), 2).unwrap(),
            Alpha::Balanced(rational(1, 2))
        );
        assert_eq!(alpha_of(&dist("const:0"), 2).unwrap(), Alpha::Degenerate);
        assert_eq!(
            alpha_of(&dist("finite:0=0.7,1=0.3"), 2).unwrap(),
            Alpha::Balanced(rational(3, 10))
        );
        assert_eq!(
            alpha_of(&dist("bernoulli:0.3"), 2).unwrap(),
            Alpha::Balanced(rational(3, 10))
        );
        // {0,2,4} is constant mod 2 but balanced mod 3.
        assert_eq!(
            alpha_of(&dist("uniform:0..4"), 2).unwrap(),
            Alpha::Balanced(rational(2, 5))
        );
        assert_eq!(
            alpha_of(&dist("finite:0=1/3,2=1/3,4=1/3"), 2).unwrap(),
            Alpha::Degenerate
        );
        assert_eq!(
            alpha_of(&dist("finite:0=1/3,2=1/3,4=1/3"), 3).unwrap(),
            Alpha::Balanced(rational(1, 2))
        );
        assert_eq!(
            alpha_of(&dist("haar:2^12"), 3).unwrap(),
            Alpha::Balanced(rational(1, 2))
        );
        assert_eq!(alpha_of(&dist("haar:3^2"), 3).unwrap(), Alpha::Balanced(rational(1, 2)));
    }

    #[test]
    fn residue_masses_match_enumeration() {
        for (lo, hi) in [(-7i64, 5i64), (0, 0), (3, 17), (-20, -11)] {
            for p in [2u64, 3, 5, 7] {
                let masses = EntryDistribution::uniform(lo, hi).unwrap().residue_masses(p);
                for r in 0..p as i64 {
                    let count = (lo..=hi).filter(|x| x.rem_euclid(p as i64) == r).count() as i64;
                    assert_eq!(masses[r as usize], rational(count, hi - lo + 1));
                }
            }
        }
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in [
            "uniform:0..7",
            "uniform:-3..3",
            "haar:2^12",
            "finite:0=7/10,1=3/10",
            "finite:5=1",
        ] {
            let d = dist(s);
            assert_eq!(d.to_string(), s);
            assert_eq!(dist(&d.to_string()), d);
        }
        assert_eq!(dist("bernoulli:0.3"), dist("finite:0=0.7,1=0.3"));
        assert_eq!(dist("const:4"), dist("finite:4=1"));
        for bad in [
            "uniform:3..1",
            "finite:0=0.5,1=0.4",
            "haar:4^2",
            "haar:2^70",
            "bernoulli:1",
            "poisson:1",
            "uniform",
        ] {
            assert!(bad.parse::<EntryDistribution>().is_err(), "{bad}");
        }
        let json = serde_json::to_string(&dist("uniform:0..7")).unwrap();
        assert_eq!(json, "\"uniform:0..7\"");
    }

    #[test]
    fn sampler_respects_support() {
        let mut rng = super::super::stream_rng(5, 0);
        let s = EntrySampler::new(&dist("finite:-2=1/4,9=3/4")).unwrap();
        let draws: Vec<i64> = (0..4000).map(|_| s.sample(&mut rng)).collect();
        assert!(draws.iter().all(|&x| x == -2 || x == 9));
        let nines = draws.iter().filter(|&&x| x == 9).count() as f64 / 4000.0;
        assert!((nines - 0.75).abs() < 0.03);
        let u = EntrySampler::new(&dist("uniform:0..3")).unwrap();
        assert!((0..1000).map(|_| u.sample(&mut rng)).all(|x| (0..=3).contains(&x)));
    }
}
