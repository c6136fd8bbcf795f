//! Hall-Littlewood polynomials `P_λ(x; t)` at a fixed rational `t`, Schur
//! polynomials, structure constants and their principally specialized
//! normalizations.
//!
//! Polynomials are kept in the monomial symmetric basis. `P_λ` is computed
//! from its tableau expansion `P_λ = Σ_T ψ_T(t) x^T` over semistandard
//! tableaux of shape `λ`, whose coefficients do not depend on the number of
//! variables beyond truncation to partitions of length at most `n`.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::group::{hall_number, GroupError};
use crate::partition::{aut_order, is_prime, Partition};

/// Largest variable count accepted by the tableau-based operations.
pub const MAX_VARS: usize = 64;
/// Largest variable count for the bialternant Schur computation.
pub const MAX_SCHUR_VARS: usize = 8;
/// Largest `|λ| + |μ|` accepted by [`structure_constants`].
pub const MAX_PRODUCT_SIZE: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HlError {
    #[error("partition {lambda} has more than {n_vars} parts")]
    TooLong { lambda: Partition, n_vars: usize },
    #[error("{n_vars} variables exceed the limit of {max}")]
    TooManyVariables { n_vars: usize, max: usize },
    #[error("structure constants need at least {needed} variables, got {n_vars}")]
    TooFewVariables { needed: usize, n_vars: usize },
    #[error("|λ|+|μ| = {size} exceeds the limit of {max}")]
    ProductTooLarge { size: u32, max: u32 },
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("operands disagree on the variable count or on t")]
    ParameterMismatch,
    #[error("P_{0} is not triangular in dominance order")]
    Triangularity(Partition),
    #[error("coefficient of P_{nu} in P_{lambda} P_{mu} lies outside the dominance interval")]
    Support {
        lambda: Partition,
        mu: Partition,
        nu: Partition,
    },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("no convergence to tolerance {tolerance} within {n_vars} variables")]
    NoConvergence { tolerance: f64, n_vars: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A symmetric polynomial in `n_vars` variables, in the monomial basis `m_ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct HlPolynomial {
    pub n_vars: usize,
    pub t: BigRational,
    pub coeffs: BTreeMap<Partition, BigRational>,
}

impl HlPolynomial {
    pub fn zero(n_vars: usize, t: BigRational) -> Self {
        HlPolynomial {
            n_vars,
            t,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(n_vars: usize, t: BigRational) -> Self {
        let mut p = Self::zero(n_vars, t);
        p.coeffs.insert(Partition::empty(), BigRational::one());
        p
    }

    pub fn coeff(&self, nu: &Partition) -> BigRational {
        self.coeffs.get(nu).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Common degree of all terms, or `None` for zero or mixed degrees.
    pub fn degree(&self) -> Option<u32> {
        let mut sizes = self.coeffs.keys().map(Partition::size);
        let d = sizes.next()?;
        sizes.all(|s| s == d).then_some(d)
    }

    fn check_compatible(&self, other: &HlPolynomial) -> Result<(), HlError> {
        if self.n_vars != other.n_vars || self.t != other.t {
            return Err(HlError::ParameterMismatch);
        }
        Ok(())
    }

    fn add_term(&mut self, nu: Partition, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(nu) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self - c · other`.
    pub fn sub_scaled(&self, c: &BigRational, other: &HlPolynomial) -> Result<HlPolynomial, HlError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (nu, v) in &other.coeffs {
            out.add_term(nu.clone(), -(c * v));
        }
        Ok(out)
    }

    /// Product in the monomial basis, truncated to `n_vars` variables.
    pub fn mul(&self, other: &HlPolynomial) -> Result<HlPolynomial, HlError> {
        self.check_compatible(other)?;
        let mut out = HlPolynomial::zero(self.n_vars, self.t.clone());
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let prod = ca * cb;
                for (nu, count) in monomial_product(a, b, self.n_vars) {
                    out.add_term(nu, &prod * BigRational::from_integer(BigInt::from(count)));
                }
            }
        }
        Ok(out)
    }

    /// Evaluates the polynomial at a point with `n_vars` coordinates.
    pub fn evaluate(&self, x: &[BigRational]) -> Result<BigRational, HlError> {
        if x.len() != self.n_vars {
            return Err(HlError::ParameterMismatch);
        }
        Ok(self
            .coeffs
            .iter()
            .map(|(nu, c)| c * monomial_value(nu, x))
            .fold(BigRational::zero(), |acc, v| acc + v))
    }
}

/// All distinct rearrangements of `parts` padded with zeros to length `n`.
fn rearrangements(parts: &[u32], n: usize) -> Vec<Vec<u32>> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &x in parts {
        *counts.entry(x).or_default() += 1;
    }
    *counts.entry(0).or_default() += n - parts.len();
    let values: Vec<u32> = counts.keys().copied().collect();
    let mut mult: Vec<usize> = counts.values().copied().collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(values: &[u32], mult: &mut [usize], cur: &mut Vec<u32>, n: usize, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..values.len() {
            if mult[i] > 0 {
                mult[i] -= 1;
                cur.push(values[i]);
                rec(values, mult, cur, n, out);
                cur.pop();
                mult[i] += 1;
            }
        }
    }
    rec(&values, &mut mult, &mut cur, n, &mut out);
    out
}

/// `m_α m_β = Σ_γ c_γ m_γ` in `n` variables: `c_γ` counts pairs of
/// rearrangements `(a, b)` of `α` and `β` with `a + b = γ`.
fn monomial_product(a: &Partition, b: &Partition, n: usize) -> BTreeMap<Partition, u64> {
    let mut out = BTreeMap::new();
    if a.len() > n || b.len() > n {
        return out;
    }
    let ra = rearrangements(a.parts(), n);
    let rb = rearrangements(b.parts(), n);
    for x in &ra {
        for y in &rb {
            let s: Vec<u32> = x.iter().zip(y).map(|(u, v)| u + v).collect();
            if s.windows(2).all(|w| w[0] >= w[1]) {
                *out.entry(Partition::new(s)).or_default() += 1;
            }
        }
    }
    out
}

/// `m_ν(x)`, summing over the distinct monomials by dynamic programming on
/// the multiset of parts still to be placed.
fn monomial_value(nu: &Partition, x: &[BigRational]) -> BigRational {
    let n = x.len();
    if nu.len() > n {
        return BigRational::zero();
    }
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &v in nu.parts() {
        *counts.entry(v).or_default() += 1;
    }
    counts.insert(0, n - nu.len());
    let values: Vec<u32> = counts.keys().copied().collect();
    let start: Vec<usize> = counts.values().copied().collect();
    let max_part = nu.largest_part() as usize;
    let powers: Vec<Vec<BigRational>> = x
        .iter()
        .map(|xi| {
            let mut row = Vec::with_capacity(max_part + 1);
            let mut acc = BigRational::one();
            for _ in 0..=max_part {
                row.push(acc.clone());
                acc *= xi;
            }
            row
        })
        .collect();
    let mut layer: HashMap<Vec<usize>, BigRational> = HashMap::from([(start, BigRational::one())]);
    for pw in &powers {
        let mut next: HashMap<Vec<usize>, BigRational> = HashMap::new();
        for (state, acc) in layer {
            for (i, &v) in values.iter().enumerate() {
                if state[i] == 0 {
                    continue;
                }
                let mut s = state.clone();
                s[i] -= 1;
                let term = &acc * &pw[v as usize];
                let e = next.entry(s).or_insert_with(BigRational::zero);
                *e += term;
            }
        }
        layer = next;
    }
    layer.into_values().fold(BigRational::zero(), |a, b| a + b)
}

/// Partitions `κ ⊇ μ` inside `λ` with `κ / μ` a horizontal strip of `size` boxes.
/// Shapes are padded to `λ.len()`.
fn horizontal_strips(mu: &[u32], lambda: &[u32], size: u32) -> Vec<Vec<u32>> {
    fn rec(i: usize, left: u32, mu: &[u32], lambda: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == mu.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let cap = if i == 0 { lambda[0] } else { lambda[i].min(mu[i - 1]) };
        for k in mu[i]..=cap.max(mu[i]) {
            let add = k - mu[i];
            if add > left {
                break;
            }
            cur.push(k);
            rec(i + 1, left - add, mu, lambda, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, size, mu, lambda, &mut Vec::with_capacity(mu.len()), &mut out);
    out
}

fn column_lengths(shape: &[u32], width: usize) -> Vec<u32> {
    (1..=width as u32)
        .map(|j| shape.iter().filter(|&&x| x >= j).count() as u32)
        .collect()
}

/// `ψ_{κ/μ}(t) = ∏_{j ∈ J} (1 - t^{m_j(μ)})`, where `J` collects the columns
/// `j ≥ 1` that receive no box of the strip while column `j + 1` does.
fn psi(mu: &[u32], kappa: &[u32], t: &BigRational) -> BigRational {
    let width = kappa.first().copied().unwrap_or(0) as usize + 1;
    let km = column_lengths(kappa, width);
    let mm = column_lengths(mu, width);
    let theta: Vec<u32> = km.iter().zip(&mm).map(|(a, b)| a - b).collect();
    let mut acc = BigRational::one();
    for j in 1..width {
        if theta[j - 1] == 0 && theta[j] == 1 {
            let m = mu.iter().filter(|&&x| x == j as u32).count();
            acc *= BigRational::one() - num_traits::pow(t.clone(), m);
        }
    }
    acc
}

/// Coefficient of `m_ν` in `P_λ`: the sum of `ψ_T(t)` over semistandard
/// tableaux of shape `λ` and content `ν`.
fn tableau_coefficient(lambda: &Partition, nu: &Partition, t: &BigRational) -> BigRational {
    let shape = lambda.parts();
    let mut layer: HashMap<Vec<u32>, BigRational> = HashMap::from([(vec![0; shape.len()], BigRational::one())]);
    for &s in nu.parts() {
        let mut next: HashMap<Vec<u32>, BigRational> = HashMap::new();
        for (mu, acc) in layer {
            for kappa in horizontal_strips(&mu, shape, s) {
                let w = psi(&mu, &kappa, t);
                if w.is_zero() {
                    continue;
                }
                let e = next.entry(kappa).or_insert_with(BigRational::zero);
                *e += &acc * w;
            }
        }
        layer = next;
    }
    layer.remove(shape).unwrap_or_else(BigRational::zero)
}

type PCache = RwLock<HashMap<(Partition, BigRational), Arc<BTreeMap<Partition, BigRational>>>>;

fn p_cache() -> &'static PCache {
    static CACHE: OnceLock<PCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Monomial coefficients of `P_λ` over all partitions of `|λ|`, independent
/// of the number of variables.
fn stable_coefficients(lambda: &Partition, t: &BigRational) -> Arc<BTreeMap<Partition, BigRational>> {
    let key = (lambda.clone(), t.clone());
    if let Some(hit) = p_cache().read().expect("cache poisoned").get(&key) {
        return hit.clone();
    }
    let coeffs: BTreeMap<Partition, BigRational> = Partition::all_of_size(lambda.size())
        .into_iter()
        .filter(|nu| lambda.dominates(nu))
        .filter_map(|nu| {
            let c = tableau_coefficient(lambda, &nu, t);
            (!c.is_zero()).then_some((nu, c))
        })
        .collect();
    let coeffs = Arc::new(coeffs);
    p_cache().write().expect("cache poisoned").insert(key, coeffs.clone());
    coeffs
}

fn check_vars(lambda: &Partition, n_vars: usize, max: usize) -> Result<(), HlError> {
    if n_vars > max {
        return Err(HlError::TooManyVariables { n_vars, max });
    }
    if lambda.len() > n_vars {
        return Err(HlError::TooLong {
            lambda: lambda.clone(),
            n_vars,
        });
    }
    Ok(())
}

/// The Hall-Littlewood polynomial `P_λ(x_1, …, x_n; t)`.
pub fn hl_polynomial(lambda: &Partition, n_vars: usize, t: &BigRational) -> Result<HlPolynomial, HlError> {
    check_vars(lambda, n_vars, MAX_VARS)?;
    let coeffs = stable_coefficients(lambda, t)
        .iter()
        .filter(|(nu, _)| nu.len() <= n_vars)
        .map(|(nu, c)| (nu.clone(), c.clone()))
        .collect();
    Ok(HlPolynomial {
        n_vars,
        t: t.clone(),
        coeffs,
    })
}

type Poly = BTreeMap<Vec<u32>, BigInt>;

fn alternant(exps: &[u32]) -> Poly {
    let n = exps.len();
    let mut out = Poly::new();
    let mut perm: Vec<usize> = (0..n).collect();
    // Heap's algorithm; each swap flips the sign.
    let mut c = vec![0usize; n];
    let mut sign = 1i32;
    let mut push = |perm: &[usize], sign: i32| {
        let mut e = vec![0u32; n];
        for (j, &i) in perm.iter().enumerate() {
            e[i] = exps[j];
        }
        out.insert(e, BigInt::from(sign));
    };
    push(&perm, sign);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            push(&perm, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Exact quotient `f / (x_i - x_j)`; panics if the division leaves a remainder.
fn divide_difference(f: Poly, i: usize, j: usize) -> Poly {
    let mut work: BTreeMap<(u32, Vec<u32>), BigInt> = f.into_iter().map(|(e, c)| ((e[i], e), c)).collect();
    let mut q = Poly::new();
    while let Some(((d, e), c)) = work.pop_last() {
        assert!(d > 0, "alternant not divisible by x_{i} - x_{j}");
        let mut base = e.clone();
        base[i] -= 1;
        let mut shifted = base.clone();
        shifted[j] += 1;
        let key = (shifted[i], shifted);
        let entry = work.entry(key.clone()).or_insert_with(BigInt::zero);
        *entry += &c;
        if entry.is_zero() {
            work.remove(&key);
        }
        *q.entry(base).or_insert_with(BigInt::zero) += c;
    }
    q.retain(|_, c| !c.is_zero());
    q
}

/// The Schur polynomial `s_λ(x_1, …, x_n) = a_{λ+δ} / a_δ`, by exact division
/// of the alternant by each `x_i - x_j`. The returned polynomial carries `t = 0`.
pub fn schur_polynomial(lambda: &Partition, n_vars: usize) -> Result<HlPolynomial, HlError> {
    check_vars(lambda, n_vars, MAX_SCHUR_VARS)?;
    let padded = lambda.padded(n_vars);
    let exps: Vec<u32> = padded
        .iter()
        .enumerate()
        .map(|(j, &l)| l + (n_vars - 1 - j) as u32)
        .collect();
    let mut f = alternant(&exps);
    for i in 0..n_vars {
        for j in i + 1..n_vars {
            f = divide_difference(f, i, j);
        }
    }
    let coeffs = f
        .into_iter()
        .filter(|(e, _)| e.windows(2).all(|w| w[0] >= w[1]))
        .map(|(e, c)| (Partition::new(e), BigRational::from_integer(c)))
        .collect();
    Ok(HlPolynomial {
        n_vars,
        t: BigRational::zero(),
        coeffs,
    })
}

/// Expands a homogeneous symmetric polynomial in the basis `P_ν(x; t)`.
///
/// The lexicographically largest partition in the support is maximal in
/// dominance order, so subtracting its coefficient times `P_ν` removes it.
pub fn expand_in_p_basis(f: &HlPolynomial) -> Result<BTreeMap<Partition, BigRational>, HlError> {
    if !f.is_zero() && f.degree().is_none() {
        return Err(HlError::NotHomogeneous);
    }
    let mut rest = f.clone();
    let mut out = BTreeMap::new();
    while let Some((nu, c)) = rest.coeffs.last_key_value().map(|(k, v)| (k.clone(), v.clone())) {
        let p = hl_polynomial(&nu, f.n_vars, &f.t)?;
        if p.coeff(&nu) != BigRational::one() || p.coeffs.keys().any(|k| !nu.dominates(k)) {
            return Err(HlError::Triangularity(nu));
        }
        rest = rest.sub_scaled(&c, &p)?;
        if rest.coeffs.contains_key(&nu) {
            return Err(HlError::Triangularity(nu));
        }
        out.insert(nu, c);
    }
    Ok(out)
}

/// `c^ν_{λμ}(t)` with `P_λ P_μ = Σ_ν c^ν_{λμ}(t) P_ν`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConstants {
    pub lambda: Partition,
    pub mu: Partition,
    pub t: BigRational,
    pub coeffs: BTreeMap<Partition, BigRational>,
}

fn union(lambda: &Partition, mu: &Partition) -> Partition {
    let mut parts = lambda.parts().to_vec();
    parts.extend_from_slice(mu.parts());
    Partition::new(parts)
}

fn sum(lambda: &Partition, mu: &Partition) -> Partition {
    let n = lambda.len().max(mu.len());
    let parts: Vec<u32> = lambda.padded(n).iter().zip(mu.padded(n)).map(|(a, b)| a + b).collect();
    Partition::new(parts)
}

/// Structure constants of the `P` basis. They are stable once
/// `n_vars ≥ |λ| + |μ|`, so the product is formed in exactly that many
/// variables; every `ν` in the support satisfies `λ ∪ μ ≤ ν ≤ λ + μ`.
pub fn structure_constants(
    lambda: &Partition,
    mu: &Partition,
    t: &BigRational,
    n_vars: usize,
) -> Result<StructureConstants, HlError> {
    let size = lambda.size() + mu.size();
    if size > MAX_PRODUCT_SIZE {
        return Err(HlError::ProductTooLarge {
            size,
            max: MAX_PRODUCT_SIZE,
        });
    }
    let needed = size as usize;
    if n_vars < needed {
        return Err(HlError::TooFewVariables { needed, n_vars });
    }
    if n_vars > MAX_VARS {
        return Err(HlError::TooManyVariables { n_vars, max: MAX_VARS });
    }
    let product = hl_polynomial(lambda, needed, t)?.mul(&hl_polynomial(mu, needed, t)?)?;
    let coeffs = expand_in_p_basis(&product)?;
    let (low, high) = (union(lambda, mu), sum(lambda, mu));
    for nu in coeffs.keys() {
        if nu.size() != size || !nu.dominates(&low) || !high.dominates(nu) {
            return Err(HlError::Support {
                lambda: lambda.clone(),
                mu: mu.clone(),
                nu: nu.clone(),
            });
        }
    }
    Ok(StructureConstants {
        lambda: lambda.clone(),
        mu: mu.clone(),
        t: t.clone(),
        coeffs,
    })
}

fn principal_point(t: &BigRational, n_vars: usize) -> Vec<BigRational> {
    let mut x = Vec::with_capacity(n_vars);
    let mut acc = BigRational::one();
    for _ in 0..n_vars {
        x.push(acc.clone());
        acc *= t;
    }
    x
}

/// `P_λ(1, t, …, t^{n-1}; t)`.
pub fn principal_specialization(lambda: &Partition, t: &BigRational, n_vars: usize) -> Result<BigRational, HlError> {
    if n_vars > MAX_VARS {
        return Err(HlError::TooManyVariables { n_vars, max: MAX_VARS });
    }
    if lambda.len() > n_vars {
        return Ok(BigRational::zero());
    }
    hl_polynomial(lambda, n_vars, t)?.evaluate(&principal_point(t, n_vars))
}

fn inverse_prime(p: u64) -> Result<BigRational, HlError> {
    if !is_prime(p) {
        return Err(HlError::NotPrime(p));
    }
    Ok(BigRational::new(BigInt::one(), BigInt::from(p)))
}

fn normalize(
    c: &StructureConstants,
    t: &BigRational,
    n_vars: usize,
) -> Result<BTreeMap<Partition, BigRational>, HlError> {
    let denom = principal_specialization(&c.lambda, t, n_vars)? * principal_specialization(&c.mu, t, n_vars)?;
    let mut out = BTreeMap::new();
    for (nu, v) in &c.coeffs {
        if nu.len() > n_vars {
            continue;
        }
        let value = principal_specialization(nu, t, n_vars)? * v / &denom;
        if !value.is_zero() {
            out.insert(nu.clone(), value);
        }
    }
    Ok(out)
}

/// `ĉ^ν_{λμ} = P_ν(1, …, t^{n-1}) / (P_λ(…) P_μ(…)) · c^ν_{λμ}` at `t = 1/p`:
/// the law of the cokernel of a product of two Haar `n × n` matrices whose
/// cokernels have types `λ` and `μ`.
pub fn normalized_constants(
    lambda: &Partition,
    mu: &Partition,
    p: u64,
    n_vars: usize,
) -> Result<BTreeMap<Partition, BigRational>, HlError> {
    let t = inverse_prime(p)?;
    let c = structure_constants(lambda, mu, &t, n_vars)?;
    normalize(&c, &t, n_vars)
}

/// Limit of the normalized constants as `n → ∞`, with a certified error.
#[derive(Clone, Debug, PartialEq)]
pub struct HlLimit {
    pub constants: BTreeMap<Partition, BigRational>,
    /// The last variable count used.
    pub n_vars: usize,
    /// Bound on the distance to the limit, `d_n · t / (1 - t)` where `d_n` is
    /// the largest change between the last two variable counts.
    pub error_bound: f64,
}

/// Iterates `normalized_constants` over growing `n` until the geometric tail
/// estimate from the last step falls below `tolerance`.
pub fn hl_limit_constants(lambda: &Partition, mu: &Partition, p: u64, tolerance: f64) -> Result<HlLimit, HlError> {
    let t = inverse_prime(p)?;
    let start = ((lambda.size() + mu.size()) as usize).max(1);
    let c = structure_constants(lambda, mu, &t, start)?;
    let ratio = t.to_f64().unwrap_or(0.5);
    let factor = ratio / (1.0 - ratio);
    let mut prev = normalize(&c, &t, start)?;
    for n in start + 1..=MAX_VARS {
        let cur = normalize(&c, &t, n)?;
        let keys: BTreeSet<&Partition> = prev.keys().chain(cur.keys()).collect();
        let diff = keys
            .into_iter()
            .map(|k| {
                let a = cur.get(k).cloned().unwrap_or_else(BigRational::zero);
                let b = prev.get(k).cloned().unwrap_or_else(BigRational::zero);
                (a - b).abs()
            })
            .max()
            .unwrap_or_else(BigRational::zero);
        let bound = diff.to_f64().unwrap_or(f64::INFINITY) * factor;
        if bound < tolerance {
            return Ok(HlLimit {
                constants: cur,
                n_vars: n,
                error_bound: bound,
            });
        }
        prev = cur;
    }
    Err(HlError::NoConvergence {
        tolerance,
        n_vars: MAX_VARS,
    })
}

/// `|Aut G_λ| |Aut G_μ| / |Aut G_ν| · |{N ≤ G_ν : N ≅ G_λ, G_ν/N ≅ G_μ}|` over
/// all `ν` with a nonzero value.
pub fn group_theoretic_constants(
    lambda: &Partition,
    mu: &Partition,
    p: u64,
) -> Result<BTreeMap<Partition, BigRational>, HlError> {
    inverse_prime(p)?;
    let aut = |x: &Partition| BigRational::from_integer(BigInt::from(aut_order(x, p)));
    let mut out = BTreeMap::new();
    for nu in Partition::all_of_size(lambda.size() + mu.size()) {
        let count = hall_number(p, &nu, lambda, mu)?;
        if count > 0 {
            let v = aut(lambda) * aut(mu) / aut(&nu) * BigRational::from_integer(BigInt::from(count));
            out.insert(nu, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::rational;

    fn part(p: &[u32]) -> Partition {
        Partition::new(p.to_vec())
    }

    fn map(entries: &[(&[u32], BigRational)]) -> BTreeMap<Partition, BigRational> {
        entries.iter().map(|(k, v)| (part(k), v.clone())).collect()
    }

    /// `P_λ(x)` from the symmetrization
    /// `(1/v_λ(t)) Σ_σ σ(x^λ ∏_{i<j} (x_i - t x_j) / (x_i - x_j))`.
    fn symmetrized(lambda: &Partition, t: &BigRational, x: &[BigRational]) -> BigRational {
        let n = x.len();
        let lam = lambda.padded(n);
        let mut perms: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..n {
            let mut next = Vec::new();
            for p in &perms {
                for i in (0..n).filter(|i| !p.contains(i)) {
                    next.push([p.clone(), vec![i]].concat());
                }
            }
            perms = next;
        }
        let mut total = BigRational::zero();
        for s in perms {
            let y: Vec<&BigRational> = s.iter().map(|&i| &x[i]).collect();
            let mut term = BigRational::one();
            for i in 0..n {
                term *= num_traits::pow(y[i].clone(), lam[i] as usize);
                for j in i + 1..n {
                    term *= (y[i] - t * y[j]) / (y[i] - y[j]);
                }
            }
            total += term;
        }
        let mut v = BigRational::one();
        let mut mult: BTreeMap<u32, usize> = BTreeMap::new();
        for &l in &lam {
            *mult.entry(l).or_default() += 1;
        }
        for m in mult.values() {
            for j in 1..=*m {
                v *= (BigRational::one() - num_traits::pow(t.clone(), j)) / (BigRational::one() - t);
            }
        }
        total / v
    }

    #[test]
    fn polynomial_examples() {
        let half = rational(1, 2);
        assert_eq!(
            hl_polynomial(&part(&[1]), 2, &half).unwrap().coeffs,
            map(&[(&[1], rational(1, 1))])
        );
        assert_eq!(
            hl_polynomial(&part(&[1, 1]), 2, &half).unwrap().coeffs,
            map(&[(&[1, 1], rational(1, 1))])
        );
        assert_eq!(
            hl_polynomial(&part(&[2]), 2, &half).unwrap().coeffs,
            map(&[(&[2], rational(1, 1)), (&[1, 1], rational(1, 2))])
        );
        assert!(matches!(
            hl_polynomial(&part(&[1, 1, 1]), 2, &half),
            Err(HlError::TooLong { .. })
        ));
    }

    #[test]
    fn tableau_formula_matches_symmetrization() {
        let points: Vec<Vec<i64>> = vec![vec![2, 3, 5, 7], vec![-1, 4, 9, 11], vec![3, -2, 13, 6]];
        for t in [rational(1, 2), rational(1, 3), rational(-2, 5), rational(0, 1)] {
            for n in 1..=4usize {
                for lambda in Partition::all_up_to_size(4) {
                    if lambda.len() > n {
                        continue;
                    }
                    let p = hl_polynomial(&lambda, n, &t).unwrap();
                    for pt in &points {
                        let x: Vec<BigRational> = pt[..n].iter().map(|&v| rational(v, 1)).collect();
                        assert_eq!(
                            p.evaluate(&x).unwrap(),
                            symmetrized(&lambda, &t, &x),
                            "λ={lambda} n={n} t={t}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn schur_examples_and_degeneration() {
        assert_eq!(
            schur_polynomial(&part(&[1]), 1).unwrap().coeffs,
            map(&[(&[1], rational(1, 1))])
        );
        assert_eq!(
            schur_polynomial(&part(&[2]), 2).unwrap().coeffs,
            map(&[(&[2], rational(1, 1)), (&[1, 1], rational(1, 1))])
        );
        assert_eq!(
            schur_polynomial(&part(&[1, 1]), 3).unwrap().coeffs,
            map(&[(&[1, 1], rational(1, 1))])
        );
        let zero = BigRational::zero();
        for n in 1..=4 {
            for lambda in Partition::all_up_to_size(5) {
                if lambda.len() <= n {
                    let hl = hl_polynomial(&lambda, n, &zero).unwrap();
                    assert_eq!(
                        hl.coeffs,
                        schur_polynomial(&lambda, n).unwrap().coeffs,
                        "λ={lambda} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn expansion_examples() {
        let t = rational(1, 3);
        let p2 = hl_polynomial(&part(&[2]), 2, &t).unwrap();
        assert_eq!(expand_in_p_basis(&p2).unwrap(), map(&[(&[2], rational(1, 1))]));
        let p1 = hl_polynomial(&part(&[1]), 2, &t).unwrap();
        let sq = p1.mul(&p1).unwrap();
        assert_eq!(
            expand_in_p_basis(&sq).unwrap(),
            map(&[(&[2], rational(1, 1)), (&[1, 1], rational(4, 3))])
        );
        assert!(expand_in_p_basis(&HlPolynomial::zero(2, t.clone())).unwrap().is_empty());
        let mixed = p1.sub_scaled(&rational(-1, 1), &p2).unwrap();
        assert_eq!(expand_in_p_basis(&mixed), Err(HlError::NotHomogeneous));
        for lambda in Partition::all_up_to_size(5) {
            let n = lambda.len().max(1) + 1;
            let p = hl_polynomial(&lambda, n, &t).unwrap();
            assert_eq!(
                expand_in_p_basis(&p).unwrap(),
                BTreeMap::from([(lambda.clone(), rational(1, 1))])
            );
        }
    }

    #[test]
    fn structure_constant_examples() {
        let one = part(&[1]);
        let c = structure_constants(&one, &one, &rational(1, 2), 2).unwrap();
        assert_eq!(c.coeffs, map(&[(&[2], rational(1, 1)), (&[1, 1], rational(3, 2))]));
        let c = structure_constants(&one, &Partition::empty(), &rational(1, 2), 1).unwrap();
        assert_eq!(c.coeffs, map(&[(&[1], rational(1, 1))]));
        let c = structure_constants(&one, &one, &rational(0, 1), 2).unwrap();
        assert_eq!(c.coeffs, map(&[(&[2], rational(1, 1)), (&[1, 1], rational(1, 1))]));
        assert!(matches!(
            structure_constants(&one, &one, &rational(1, 2), 1),
            Err(HlError::TooFewVariables { .. })
        ));
    }

    #[test]
    fn structure_constants_are_symmetric() {
        let t = rational(1, 3);
        for a in Partition::all_up_to_size(3) {
            for b in Partition::all_up_to_size(3) {
                if a.size() + b.size() <= 4 {
                    let n = (a.size() + b.size()) as usize;
                    let ab = structure_constants(&a, &b, &t, n).unwrap();
                    let ba = structure_constants(&b, &a, &t, n).unwrap();
                    assert_eq!(ab.coeffs, ba.coeffs);
                }
            }
        }
    }

    #[test]
    fn specialization_examples() {
        let t = rational(1, 3);
        assert_eq!(principal_specialization(&part(&[1]), &t, 2).unwrap(), rational(4, 3));
        assert_eq!(
            principal_specialization(&Partition::empty(), &t, 5).unwrap(),
            rational(1, 1)
        );
        assert_eq!(principal_specialization(&part(&[1, 1]), &t, 2).unwrap(), t);
        assert_eq!(
            principal_specialization(&part(&[1, 1, 1]), &t, 2).unwrap(),
            BigRational::zero()
        );
    }

    #[test]
    fn normalized_examples_and_normalization() {
        let one = part(&[1]);
        assert_eq!(
            normalized_constants(&one, &one, 2, 2).unwrap(),
            map(&[(&[1, 1], rational(1, 3)), (&[2], rational(2, 3))])
        );
        assert_eq!(
            normalized_constants(&one, &one, 3, 2).unwrap(),
            map(&[(&[1, 1], rational(1, 4)), (&[2], rational(3, 4))])
        );
        assert_eq!(
            normalized_constants(&Partition::empty(), &Partition::empty(), 2, 0).unwrap(),
            map(&[(&[], rational(1, 1))])
        );
        for p in [2, 3] {
            for a in Partition::all_up_to_size(4) {
                for b in Partition::all_up_to_size(4 - a.size()) {
                    let n0 = (a.size() + b.size()) as usize;
                    for n in n0..n0 + 2 {
                        let total: BigRational = normalized_constants(&a, &b, p, n).unwrap().values().sum();
                        assert_eq!(total, rational(1, 1), "λ={a} μ={b} p={p} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn group_theoretic_examples() {
        let one = part(&[1]);
        assert_eq!(
            group_theoretic_constants(&one, &one, 2).unwrap(),
            map(&[(&[1, 1], rational(1, 2)), (&[2], rational(1, 2))])
        );
        assert_eq!(
            group_theoretic_constants(&one, &one, 3).unwrap(),
            map(&[(&[1, 1], rational(1, 3)), (&[2], rational(2, 3))])
        );
        let nu = part(&[2, 1]);
        assert_eq!(
            group_theoretic_constants(&Partition::empty(), &nu, 2).unwrap(),
            map(&[(&[2, 1], rational(1, 1))])
        );
    }

    #[test]
    fn limit_matches_group_theory() {
        let one = part(&[1]);
        for p in [2u64, 3] {
            let lim = hl_limit_constants(&one, &one, p, 1e-6).unwrap();
            assert!(lim.error_bound < 1e-6);
            let exact = group_theoretic_constants(&one, &one, p).unwrap();
            for (nu, v) in &exact {
                let got = lim.constants.get(nu).cloned().unwrap_or_else(BigRational::zero);
                assert!((got - v).abs().to_f64().unwrap() < 1e-6, "ν={nu} p={p}");
            }
            assert!(!lim.constants.contains_key(&part(&[3])));
        }
    }
}
