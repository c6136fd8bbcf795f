//! Histograms of sampled keys and their comparison with exact limiting laws.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::group::{flag_classes, Bounds, ExplicitGroup};
use crate::partition::{aut_order, cohen_lenstra_constant, Partition};
use crate::theory::{
    conditional_convolution, corank_conditional, flag_constant, flag_measure_with, FlagMeasureQuery, TheoryError,
};

/// Two-sided normal quantile for 99% confidence.
pub const Z99: f64 = 2.5758;

/// Key of the bucket that collects everything outside a truncated law.
pub const OTHER: &str = "other";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("cannot merge a `{0}` histogram into a `{1}` histogram")]
    SchemaMismatch(String, String),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// Counts of sample keys. `total` includes the `excluded` samples.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub schema: String,
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
    pub excluded: u64,
}

impl Histogram {
    pub fn new(schema: impl Into<String>) -> Self {
        Histogram {
            schema: schema.into(),
            ..Default::default()
        }
    }

    pub fn record(&mut self, key: impl Into<String>) {
        *self.counts.entry(key.into()).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn exclude(&mut self) {
        self.excluded += 1;
        self.total += 1;
    }

    /// Records `Some(key)` and excludes `None`.
    pub fn record_opt(&mut self, key: Option<String>) {
        match key {
            Some(k) => self.record(k),
            None => self.exclude(),
        }
    }

    /// Samples that carry a key.
    pub fn counted(&self) -> u64 {
        self.total - self.excluded
    }

    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Frequency among counted samples; `NaN` when nothing was counted.
    pub fn frequency(&self, key: &str) -> f64 {
        self.count(key) as f64 / self.counted() as f64
    }

    pub fn merge(&self, other: &Histogram) -> Result<Histogram, StatsError> {
        if self.schema != other.schema {
            return Err(StatsError::SchemaMismatch(other.schema.clone(), self.schema.clone()));
        }
        let mut out = self.clone();
        for (k, &c) in &other.counts {
            *out.counts.entry(k.clone()).or_insert(0) += c;
        }
        out.total += other.total;
        out.excluded += other.excluded;
        Ok(out)
    }

    /// Empirical distribution of the counted samples.
    pub fn distribution(&self) -> BTreeMap<String, f64> {
        let n = self.counted() as f64;
        self.counts.iter().map(|(k, &c)| (k.clone(), c as f64 / n)).collect()
    }
}

/// Groups records by a condition key and histograms a value key within each
/// group. Records without a condition are skipped; records without a value
/// count as exclusions of their group.
pub fn conditional_histogram<R>(
    records: &[R],
    schema: &str,
    condition: impl Fn(&R) -> Option<String>,
    value: impl Fn(&R) -> Option<String>,
) -> BTreeMap<String, Histogram> {
    let mut out: BTreeMap<String, Histogram> = BTreeMap::new();
    for r in records {
        if let Some(c) = condition(r) {
            out.entry(c)
                .or_insert_with(|| Histogram::new(schema))
                .record_opt(value(r));
        }
    }
    out
}

/// An exact law on keys, truncated to finitely many keys plus an `other`
/// bucket that carries the remaining mass.
#[derive(Clone, Debug, PartialEq)]
pub struct Law {
    pub masses: BTreeMap<String, BigRational>,
    pub other: BigRational,
    /// Exact form of each mass for reports. Laws built from a truncated
    /// infinite product write it as a rational multiple of `C`, described in
    /// `constant`.
    pub exact: BTreeMap<String, String>,
    pub constant: Option<String>,
}

impl Law {
    /// A law with every key retained; `other` is whatever the masses miss.
    pub fn from_masses(masses: BTreeMap<String, BigRational>) -> Self {
        let total: BigRational = masses.values().sum();
        let other = BigRational::one() - total;
        Law {
            exact: masses.iter().map(|(k, m)| (k.clone(), m.to_string())).collect(),
            masses,
            other: if other.is_negative() {
                BigRational::zero()
            } else {
                other
            },
            constant: None,
        }
    }

    /// Drops keys with mass below `eps` into `other`.
    pub fn truncate(mut self, eps: f64) -> Self {
        let dropped: Vec<String> = self
            .masses
            .iter()
            .filter(|(_, m)| m.to_f64().unwrap_or(0.0) < eps)
            .map(|(k, _)| k.clone())
            .collect();
        for k in dropped {
            let m = self.masses.remove(&k).expect("key listed above");
            self.exact.remove(&k);
            self.other += m;
        }
        self
    }

    pub fn mass(&self, key: &str) -> f64 {
        self.masses.get(key).and_then(ToPrimitive::to_f64).unwrap_or(0.0)
    }

    pub fn other_f64(&self) -> f64 {
        self.other.to_f64().unwrap_or(0.0)
    }

    /// Probabilities as floats, with `other` under [`OTHER`] when positive.
    pub fn distribution(&self) -> BTreeMap<String, f64> {
        let mut d: BTreeMap<String, f64> = self
            .masses
            .iter()
            .map(|(k, m)| (k.clone(), m.to_f64().unwrap_or(0.0)))
            .collect();
        if self.other.is_positive() {
            d.insert(OTHER.to_string(), self.other_f64());
        }
        d
    }

    /// Cohen-Lenstra law of `cok(M)_p`, keyed by type.
    pub fn cohen_lenstra(p: u64, eps: f64) -> Self {
        let c = cohen_lenstra_constant(p, eps * 1e-3);
        let mut masses = BTreeMap::new();
        let mut exact = BTreeMap::new();
        for size in 0u32.. {
            let mut largest = 0.0f64;
            for lambda in Partition::all_of_size(size) {
                let aut = aut_order(&lambda, p);
                let m = &c.value / BigRational::from_integer(BigInt::from(aut.clone()));
                largest = largest.max(m.to_f64().unwrap_or(0.0));
                exact.insert(lambda.to_string(), format!("C/{aut}"));
                masses.insert(lambda.to_string(), m);
            }
            if largest < eps {
                break;
            }
        }
        let mut law = Law::from_masses(masses);
        law.exact = exact;
        law.constant = Some(constant_note(p, 1, c.tail_bound.to_f64().unwrap_or(0.0)));
        law.truncate(eps)
    }

    /// Flag law on classes of `k`-flags whose top group has order at most
    /// `max_order`, keyed by [`crate::group::FlagClass`] display strings.
    pub fn flags(p: u64, k: usize, max_order: u64, bounds: &Bounds) -> Result<Self, StatsError> {
        let mut masses = BTreeMap::new();
        let mut exact = BTreeMap::new();
        for size in 0u32.. {
            if p.checked_pow(size).is_none_or(|o| o > max_order) {
                break;
            }
            for lambda in Partition::all_of_size(size) {
                let g = ExplicitGroup::new(p, lambda).map_err(TheoryError::from)?;
                for (class, chain) in flag_classes(&g, k, bounds).map_err(TheoryError::from)? {
                    let q = FlagMeasureQuery::single(k, g.clone(), chain);
                    let m = flag_measure_with(&q, 1e-12, bounds)?;
                    exact.insert(class.to_string(), format!("C^{k}/{}", m.flag_aut_order));
                    masses.insert(class.to_string(), m.value);
                }
            }
        }
        let mut law = Law::from_masses(masses);
        law.exact = exact;
        let (_, error) = flag_constant(&[p], k, 1e-12);
        law.constant = Some(constant_note(p, k, error.to_f64().unwrap_or(0.0)));
        Ok(law)
    }

    /// Conditional law of the type of `cok(M_1 M_2)_p` given the factor types.
    pub fn convolution(p: u64, h: &Partition, k: &Partition) -> Result<Self, StatsError> {
        let mut masses = BTreeMap::new();
        for g in Partition::all_of_size(h.size() + k.size()) {
            let v = conditional_convolution(p, &g, h, k)?;
            if !v.is_zero() {
                masses.insert(g.to_string(), v);
            }
        }
        Ok(Law::from_masses(masses))
    }

    /// Conditional law of `corank(M_1 M_2)` given the factor coranks.
    pub fn corank(p: u64, a: u32, b: u32) -> Self {
        let masses = (a.max(b)..=a + b)
            .map(|c| (c.to_string(), corank_conditional(p, a, b, c)))
            .filter(|(_, m)| !m.is_zero())
            .collect();
        Law::from_masses(masses)
    }
}

fn constant_note(p: u64, k: usize, error: f64) -> String {
    let power = if k == 1 {
        String::new()
    } else {
        format!(", raised to the power {k}")
    };
    format!("C = prod_(i>=1) (1 - {p}^-i){power}; masses use a truncation within {error:e}")
}

/// Total variation distance between two finite distributions.
pub fn tv_between(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> f64 {
    let mut sum = 0.0;
    for (k, &x) in a {
        sum += (x - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &y) in b {
        if !a.contains_key(k) {
            sum += y;
        }
    }
    sum / 2.0
}

/// Empirical distribution folded onto the keys of `law`: counts on keys the
/// law does not list move to [`OTHER`].
fn folded(empirical: &Histogram, law: &Law) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for (k, &c) in &empirical.counts {
        let key = if law.masses.contains_key(k) { k.as_str() } else { OTHER };
        *out.entry(key.to_string()).or_insert(0) += c;
    }
    out
}

/// `½ Σ |f̂(key) − law(key)| + ½ |f̂(other) − law(other)|` over counted samples.
pub fn tv_distance(empirical: &Histogram, law: &Law) -> f64 {
    let n = empirical.counted() as f64;
    let emp: BTreeMap<String, f64> = folded(empirical, law)
        .into_iter()
        .map(|(k, c)| (k, c as f64 / n))
        .collect();
    tv_between(&emp, &law.distribution())
}

/// Empirical-versus-empirical total variation distance.
pub fn tv_empirical(a: &Histogram, b: &Histogram) -> f64 {
    tv_between(&a.distribution(), &b.distribution())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    /// `None` when the report is degenerate.
    pub p_value: Option<f64>,
    /// Cells left after pooling, including the pooled cell.
    pub cells: usize,
    pub degenerate: bool,
}

/// Pearson goodness of fit. Cells expecting fewer than five samples are
/// pooled together with the law's `other` mass; a pooled cell that still
/// falls short joins the smallest retained cell.
pub fn chi_square_report(empirical: &Histogram, law: &Law) -> ChiSquareReport {
    let n = empirical.counted() as f64;
    let observed = folded(empirical, law);
    let obs = |k: &str| observed.get(k).copied().unwrap_or(0) as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pooled_obs, mut pooled_exp) = (obs(OTHER), n * law.other_f64());
    for (k, m) in &law.masses {
        let e = n * m.to_f64().unwrap_or(0.0);
        if e >= 5.0 {
            cells.push((obs(k), e));
        } else {
            pooled_obs += obs(k);
            pooled_exp += e;
        }
    }
    if pooled_exp >= 5.0 {
        cells.push((pooled_obs, pooled_exp));
    } else if let Some(smallest) = cells.iter_mut().min_by(|a, b| a.1.total_cmp(&b.1)) {
        smallest.0 += pooled_obs;
        smallest.1 += pooled_exp;
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len().saturating_sub(1);
    let p_value = (dof > 0).then(|| ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN));
    ChiSquareReport {
        statistic: if cells.is_empty() { 0.0 } else { statistic },
        dof,
        p_value,
        cells: cells.len(),
        degenerate: dof == 0,
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Observed versus predicted frequency of one key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub key: String,
    pub observed: u64,
    pub frequency: f64,
    /// Exact predicted mass as a fraction.
    pub exact: String,
    pub predicted: f64,
    pub ci99: (f64, f64),
}

/// One cell per law key, plus the `other` bucket when it has mass or counts.
pub fn cells(empirical: &Histogram, law: &Law) -> Vec<Cell> {
    let n = empirical.counted();
    let observed = folded(empirical, law);
    let mut keys: Vec<(String, BigRational)> = law.masses.iter().map(|(k, m)| (k.clone(), m.clone())).collect();
    if law.other.is_positive() || observed.contains_key(OTHER) {
        keys.push((OTHER.to_string(), law.other.clone()));
    }
    keys.into_iter()
        .map(|(key, m)| {
            let c = observed.get(&key).copied().unwrap_or(0);
            Cell {
                observed: c,
                frequency: c as f64 / n as f64,
                exact: law.exact.get(&key).cloned().unwrap_or_else(|| m.to_string()),
                predicted: m.to_f64().unwrap_or(f64::NAN),
                ci99: wilson_interval(c, n, Z99),
                key,
            }
        })
        .collect()
}
