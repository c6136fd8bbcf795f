//! Exact evaluation of the limiting laws: the flag measure, the conditional
//! convolution of cokernels, and the conditional corank law with its finite-n
//! corner-rank counterpart.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::group::{flag_aut_order_with, hall_number, Bounds, ExplicitGroup, GroupError, Subgroup};
use crate::partition::{aut_order, cohen_lenstra_constant, gaussian_binomial, q_pochhammer, GroupType, Partition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("a {k}-flag needs a chain of {expected} subgroups, got {found}")]
    ChainLength { k: usize, expected: usize, found: usize },
    #[error("prime {0} appears twice in the query")]
    RepeatedPrime(u64),
}

/// The `p`-part of a flag: the top group and its kernel chain.
#[derive(Clone, Debug)]
pub struct FlagComponent {
    pub group: ExplicitGroup,
    pub chain: Vec<Subgroup>,
}

/// A surjective `k`-flag of abelian `P`-groups, one component per prime.
#[derive(Clone, Debug)]
pub struct FlagMeasureQuery {
    pub k: usize,
    pub components: Vec<FlagComponent>,
}

impl FlagMeasureQuery {
    pub fn single(k: usize, group: ExplicitGroup, chain: Vec<Subgroup>) -> Self {
        FlagMeasureQuery {
            k,
            components: vec![FlagComponent { group, chain }],
        }
    }
}

/// `(∏_p ∏_i (1-p^{-i}))^k / |Aut(G)|`, split into its exact and truncated parts.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagMeasure {
    /// `∏_p |Aut_flag(G_p)|`, exact.
    pub flag_aut_order: u64,
    /// Truncation of `(∏_p ∏_i (1-p^{-i}))^k`.
    pub constant: BigRational,
    /// `constant / flag_aut_order`.
    pub value: BigRational,
    /// The true measure lies in `[value - error_bound, value]`.
    pub error_bound: BigRational,
}

impl FlagMeasure {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

/// `(∏_{p ∈ P} ∏_i (1-p^{-i}))^k` truncated to `precision`, with its error bound.
pub fn flag_constant(primes: &[u64], k: usize, precision: f64) -> (BigRational, BigRational) {
    let mut upper = BigRational::one();
    let mut lower = BigRational::one();
    for &p in primes {
        let c = cohen_lenstra_constant(p, precision);
        for _ in 0..k {
            upper *= &c.value;
            lower *= &c.value - &c.tail_bound;
        }
    }
    let err = &upper - &lower;
    (upper, err)
}

pub fn flag_measure(query: &FlagMeasureQuery, precision: f64) -> Result<FlagMeasure, TheoryError> {
    flag_measure_with(query, precision, &Bounds::default())
}

pub fn flag_measure_with(
    query: &FlagMeasureQuery,
    precision: f64,
    bounds: &Bounds,
) -> Result<FlagMeasure, TheoryError> {
    let mut primes: Vec<u64> = Vec::new();
    let mut aut = 1u64;
    for comp in &query.components {
        let p = comp.group.p();
        if primes.contains(&p) {
            return Err(TheoryError::RepeatedPrime(p));
        }
        primes.push(p);
        let expected = query.k.saturating_sub(1);
        if comp.chain.len() != expected {
            return Err(TheoryError::ChainLength {
                k: query.k,
                expected,
                found: comp.chain.len(),
            });
        }
        aut = aut.saturating_mul(flag_aut_order_with(&comp.group, &comp.chain, bounds)?);
    }
    let (constant, err) = flag_constant(&primes, query.k, precision);
    let denom = BigRational::from_integer(BigInt::from(aut));
    Ok(FlagMeasure {
        flag_aut_order: aut,
        value: &constant / &denom,
        error_bound: err / denom,
        constant,
    })
}

fn aut_rational(lambda: &Partition, p: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(aut_order(lambda, p)))
}

/// `P(cok(M_1 M_2) ≅ G | cok(M_1) ≅ H, cok(M_2) ≅ K)` in the limit, for one prime:
/// `|Aut K| |Aut H| / |Aut G| · |{N ≤ G : N ≅ K, G/N ≅ H}|`.
pub fn conditional_convolution(
    p: u64,
    g: &Partition,
    h: &Partition,
    k: &Partition,
) -> Result<BigRational, TheoryError> {
    if g.size() != h.size() + k.size() {
        return Ok(BigRational::zero());
    }
    let count = hall_number(p, g, k, h)?;
    if count == 0 {
        return Ok(BigRational::zero());
    }
    Ok(aut_rational(k, p) * aut_rational(h, p) / aut_rational(g, p) * BigRational::from_integer(BigInt::from(count)))
}

/// Multi-prime conditional convolution: the product of the per-prime values.
pub fn conditional_convolution_multi(g: &GroupType, h: &GroupType, k: &GroupType) -> Result<BigRational, TheoryError> {
    let mut primes: Vec<u64> = g
        .components()
        .chain(h.components())
        .chain(k.components())
        .map(|(p, _)| p)
        .collect();
    primes.sort_unstable();
    primes.dedup();
    let mut acc = BigRational::one();
    for p in primes {
        acc *= conditional_convolution(p, &g.sylow(p), &h.sylow(p), &k.sylow(p))?;
    }
    Ok(acc)
}

fn pow_inv(p: u64, e: i64) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(p));
    if e >= 0 {
        BigRational::one() / num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base, (-e) as usize)
    }
}

/// Limiting `P(corank(M_1 M_2) = c | corank M_1 = a, corank M_2 = b)` over `F_p`:
/// `p^{-(c-a)(c-b)} (q;q)_a (q;q)_b / ((q;q)_{c-b} (q;q)_{a+b-c} (q;q)_{c-a})`
/// with `q = 1/p`, and zero unless `a, b ≤ c ≤ a + b`.
pub fn corank_conditional(p: u64, a: u32, b: u32, c: u32) -> BigRational {
    if c < a || c < b || c > a + b {
        return BigRational::zero();
    }
    let e = i64::from(c - a) * i64::from(c - b);
    pow_inv(p, e) * q_pochhammer(p, a) * q_pochhammer(p, b)
        / (q_pochhammer(p, c - b) * q_pochhammer(p, a + b - c) * q_pochhammer(p, c - a))
}

/// Finite-n law: `P(rank B' = r)` for `B'` the upper `(n-a) × (n-b)` block of a
/// uniformly random full-column-rank `n × (n-b)` matrix over `F_p`.
///
/// With `c = n - r` this equals
/// `p^{-(c-a)(c-b)} [a, c-b] [n-a, n-c] / [n, n-b]`, Gaussian binomials at `1/p`.
pub fn corner_rank_law(p: u64, n: u32, a: u32, b: u32, r: u32) -> BigRational {
    if a > n || b > n || r > n {
        return BigRational::zero();
    }
    let (n, a, b, c) = (i64::from(n), i64::from(a), i64::from(b), i64::from(n) - i64::from(r));
    let num = gaussian_binomial(p, a, c - b) * gaussian_binomial(p, n - a, n - c);
    if num.is_zero() {
        return num;
    }
    pow_inv(p, (c - a) * (c - b)) * num / gaussian_binomial(p, n, n - b)
}

/// The limiting moment `E|Sur(cok flag, G)|` for any target flag.
pub fn moment_prediction() -> u32 {
    1
}
