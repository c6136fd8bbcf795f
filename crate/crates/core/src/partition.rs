//! Integer partitions, finite abelian group types and the closed-form
//! constants attached to them (group orders, automorphism counts,
//! q-Pochhammer symbols, Gaussian binomials, Cohen-Lenstra constants).
//!
//! A partition `λ` names the abelian p-group `G_λ = ⊕ Z/p^{λ_i}`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// A weakly decreasing tuple of positive integers.
///
/// The representation is canonical: parts are sorted in decreasing order and
/// zeros are dropped, so derived equality, hashing and ordering can be used
/// directly for histogram keys. The derived order is lexicographic, which
/// refines the dominance order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Builds the canonical partition from any multiset of part sizes.
    pub fn new(parts: impl Into<Vec<u32>>) -> Self {
        let mut parts = parts.into();
        parts.retain(|&x| x > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Number of nonzero parts, `ℓ(λ)`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|λ|`, the sum of the parts.
    pub fn size(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn largest_part(&self) -> u32 {
        self.0.first().copied().unwrap_or(0)
    }

    /// The `i`-th part (0-based), zero past the end.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// Parts padded with zeros to length `n`. Panics if `ℓ(λ) > n`.
    pub fn padded(&self, n: usize) -> Vec<u32> {
        assert!(self.len() <= n, "partition {self} longer than {n}");
        let mut v = self.0.clone();
        v.resize(n, 0);
        v
    }

    /// Conjugate partition: `λ'_i = |{j : λ_j ≥ i}|`.
    pub fn conjugate(&self) -> Partition {
        let width = self.largest_part();
        let parts = (1..=width)
            .map(|i| self.0.iter().take_while(|&&x| x >= i).count() as u32)
            .collect();
        Partition(parts)
    }

    /// `m_i(λ)`, the number of parts equal to `i`.
    pub fn multiplicity(&self, i: u32) -> usize {
        self.0.iter().filter(|&&x| x == i).count()
    }

    /// Distinct part values with their multiplicities, largest first.
    pub fn multiplicities(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for &x in &self.0 {
            match out.last_mut() {
                Some((v, m)) if *v == x => *m += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    /// `n(λ) = Σ (i-1) λ_i`.
    pub fn n_statistic(&self) -> u64 {
        self.0.iter().enumerate().map(|(i, &x)| i as u64 * x as u64).sum()
    }

    /// Dominance order: same size and every partial sum of `self` is at least
    /// the corresponding partial sum of `other`.
    pub fn dominates(&self, other: &Partition) -> bool {
        if self.size() != other.size() {
            return false;
        }
        let n = self.len().max(other.len());
        let (mut a, mut b) = (0u32, 0u32);
        for i in 0..n {
            a += self.part(i);
            b += other.part(i);
            if a < b {
                return false;
            }
        }
        true
    }

    /// All partitions of `n`, in decreasing lexicographic order.
    pub fn all_of_size(n: u32) -> Vec<Partition> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if rem == 0 {
                out.push(Partition(cur.clone()));
                return;
            }
            for x in (1..=rem.min(max)).rev() {
                cur.push(x);
                rec(rem - x, x, cur, out);
                cur.pop();
            }
        }
        rec(n, n, &mut cur, &mut out);
        out
    }

    /// All partitions of `n` with at most `max_len` parts.
    pub fn all_of_size_with_max_len(n: u32, max_len: usize) -> Vec<Partition> {
        Self::all_of_size(n)
            .into_iter()
            .filter(|l| l.len() <= max_len)
            .collect()
    }

    /// All partitions with `|λ| ≤ n`, by increasing size.
    pub fn all_up_to_size(n: u32) -> Vec<Partition> {
        (0..=n).flat_map(Self::all_of_size).collect()
    }
}

impl From<Vec<u32>> for Partition {
    fn from(v: Vec<u32>) -> Self {
        Partition::new(v)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl std::str::FromStr for Partition {
    type Err = String;

    /// Accepts `[3,1]`, `3,1`, `(3,1)` and `[]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s
            .trim()
            .trim_start_matches(['[', '('])
            .trim_end_matches([']', ')'])
            .trim();
        if inner.is_empty() {
            return Ok(Partition::empty());
        }
        inner
            .split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|e| format!("bad part {x:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Partition::new)
    }
}

/// Isomorphism type of a finite abelian group whose order is supported on a
/// finite set of primes: one partition per prime. Primes with trivial Sylow
/// subgroup are not stored, so the empty map is the trivial group.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "BTreeMap<u64, Partition>", into = "BTreeMap<u64, Partition>")]
pub struct GroupType(BTreeMap<u64, Partition>);

impl GroupType {
    pub fn new(components: impl IntoIterator<Item = (u64, Partition)>) -> Self {
        GroupType(components.into_iter().filter(|(_, l)| !l.is_empty()).collect())
    }

    pub fn trivial() -> Self {
        GroupType(BTreeMap::new())
    }

    pub fn single(p: u64, lambda: Partition) -> Self {
        Self::new([(p, lambda)])
    }

    /// The Sylow p-subgroup type.
    pub fn sylow(&self, p: u64) -> Partition {
        self.0.get(&p).cloned().unwrap_or_default()
    }

    pub fn components(&self) -> impl Iterator<Item = (u64, &Partition)> {
        self.0.iter().map(|(&p, l)| (p, l))
    }

    pub fn order(&self) -> BigUint {
        self.0
            .iter()
            .map(|(&p, l)| group_order(l, p))
            .fold(BigUint::one(), |a, b| a * b)
    }

    pub fn aut_order(&self) -> BigUint {
        self.0
            .iter()
            .map(|(&p, l)| aut_order(l, p))
            .fold(BigUint::one(), |a, b| a * b)
    }
}

impl From<BTreeMap<u64, Partition>> for GroupType {
    fn from(m: BTreeMap<u64, Partition>) -> Self {
        GroupType::new(m)
    }
}

impl From<GroupType> for BTreeMap<u64, Partition> {
    fn from(g: GroupType) -> Self {
        g.0
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
pub(crate) fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn inverse_prime(p: u64) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(p))
}

/// `(q;q)_m = ∏_{i=1}^m (1 - q^i)` for an arbitrary rational `q`.
pub fn q_pochhammer_at(q: &BigRational, m: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut pow = BigRational::one();
    for _ in 0..m {
        pow *= q;
        acc *= BigRational::one() - &pow;
    }
    acc
}

/// `(p^{-1};p^{-1})_m = ∏_{i=1}^m (1 - p^{-i})`; the empty product is 1.
pub fn q_pochhammer(p: u64, m: u32) -> BigRational {
    q_pochhammer_at(&inverse_prime(p), m)
}

/// The Gaussian binomial at `q = p^{-1}`:
/// `(q;q)_k / ((q;q)_l (q;q)_{k-l})`, which is zero when `l < 0` or `l > k`.
pub fn gaussian_binomial(p: u64, k: i64, l: i64) -> BigRational {
    if k < 0 || l < 0 || l > k {
        return BigRational::zero();
    }
    q_pochhammer(p, k as u32) / (q_pochhammer(p, l as u32) * q_pochhammer(p, (k - l) as u32))
}

/// A finite truncation of `∏_{i≥1} (1 - p^{-i})` together with a bound on
/// how far the infinite product can lie below it.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedProduct {
    pub p: u64,
    pub terms: u32,
    /// `∏_{i=1}^{terms} (1 - p^{-i})`.
    pub value: BigRational,
    /// The infinite product lies in `[value - tail_bound, value]`.
    pub tail_bound: BigRational,
}

impl TruncatedProduct {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

/// Truncated Cohen-Lenstra constant `∏_{i≥1}(1 - p^{-i})`.
///
/// The number of factors `I` is the smallest with `2 p^{-I} < precision`;
/// since the omitted tail is a factor in `[1 - 2p^{-I}, 1]` and the value is
/// below one, the truncation is within `precision` of the full product.
pub fn cohen_lenstra_constant(p: u64, precision: f64) -> TruncatedProduct {
    assert!(precision > 0.0, "precision must be positive");
    let inv = inverse_prime(p);
    let precision = BigRational::from_float(precision).expect("finite precision");
    let two = BigRational::from_integer(BigInt::from(2));
    let mut value = BigRational::one();
    let mut pow = BigRational::one();
    let mut terms = 0;
    loop {
        pow *= &inv;
        value *= BigRational::one() - &pow;
        terms += 1;
        let tail = &two * &pow;
        if tail < precision {
            return TruncatedProduct {
                p,
                terms,
                value,
                tail_bound: tail,
            };
        }
    }
}

/// `|G_λ| = p^{|λ|}`.
pub fn group_order(lambda: &Partition, p: u64) -> BigUint {
    BigUint::from(p).pow(lambda.size())
}

/// `|Aut(G_λ)| = p^{|λ| + 2n(λ)} ∏_i (p^{-1};p^{-1})_{m_i(λ)}`.
pub fn aut_order(lambda: &Partition, p: u64) -> BigUint {
    let exponent = lambda.size() as u64 + 2 * lambda.n_statistic();
    let mut value = BigRational::from_integer(BigInt::from(p).pow(exponent as u32));
    for (_, m) in lambda.multiplicities() {
        value *= q_pochhammer(p, m as u32);
    }
    debug_assert!(value.is_integer() && value.is_positive());
    value.to_integer().to_biguint().expect("positive")
}

/// `|∧² G_λ| = p^{Σ λ'_i (λ'_i - 1) / 2}`.
pub fn alt2_order(lambda: &Partition, p: u64) -> BigUint {
    let exponent: u32 = lambda
        .conjugate()
        .parts()
        .iter()
        .map(|&c| c * c.saturating_sub(1) / 2)
        .sum();
    BigUint::from(p).pow(exponent)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(v: &[u32]) -> Partition {
        Partition::new(v.to_vec())
    }

    fn conjugate_by_counting(l: &Partition) -> Vec<u32> {
        let mut out = Vec::new();
        let mut i = 1;
        loop {
            let c = l.parts().iter().filter(|&&x| x >= i).count() as u32;
            if c == 0 {
                break;
            }
            out.push(c);
            i += 1;
        }
        out
    }

    #[test]
    fn canonical_form() {
        assert_eq!(part(&[1, 3, 0, 2]).parts(), &[3, 2, 1]);
        assert_eq!(part(&[0, 0]), Partition::empty());
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(part(&[3, 1]).conjugate(), part(&[2, 1, 1]));
        assert_eq!(Partition::empty().conjugate(), Partition::empty());
        assert_eq!(part(&[1, 1, 1]).conjugate(), part(&[3]));
    }

    #[test]
    fn conjugate_is_involution_up_to_twelve() {
        for l in Partition::all_up_to_size(12) {
            let c = l.conjugate();
            assert_eq!(c.parts(), conjugate_by_counting(&l).as_slice());
            assert_eq!(c.size(), l.size());
            assert_eq!(c.conjugate(), l);
        }
    }

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (0..=10).map(|n| Partition::all_of_size(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]);
    }

    #[test]
    fn dominance() {
        assert!(part(&[2]).dominates(&part(&[1, 1])));
        assert!(!part(&[1, 1]).dominates(&part(&[2])));
        assert!(!part(&[3, 3]).dominates(&part(&[4, 1, 1])));
        assert!(!part(&[4, 1, 1]).dominates(&part(&[3, 3])));
    }

    #[test]
    fn q_pochhammer_examples() {
        assert_eq!(q_pochhammer(2, 0), rational(1, 1));
        assert_eq!(q_pochhammer(2, 1), rational(1, 2));
        assert_eq!(q_pochhammer(2, 2), rational(3, 8));
    }

    #[test]
    fn q_pochhammer_ratio() {
        for p in [2u64, 3, 5] {
            for m in 1..10u32 {
                let ratio = q_pochhammer(p, m) / q_pochhammer(p, m - 1);
                let expected = BigRational::one() - inverse_prime(p).pow(m as i32);
                assert_eq!(ratio, expected);
            }
        }
    }

    #[test]
    fn gaussian_binomial_examples() {
        assert_eq!(gaussian_binomial(2, 2, 1), rational(3, 2));
        assert_eq!(gaussian_binomial(3, 5, 0), rational(1, 1));
        assert_eq!(gaussian_binomial(2, 1, 2), BigRational::zero());
        assert_eq!(gaussian_binomial(2, 3, -1), BigRational::zero());
    }

    #[test]
    fn gaussian_binomial_symmetry() {
        for p in [2u64, 3] {
            for k in 0..9i64 {
                for l in -1..=k + 1 {
                    assert_eq!(gaussian_binomial(p, k, l), gaussian_binomial(p, k, k - l));
                }
            }
        }
    }

    fn float_product(p: f64, terms: i32) -> f64 {
        (1..=terms).map(|i| 1.0 - p.powi(-i)).product()
    }

    #[test]
    fn cohen_lenstra_constants() {
        let c2 = cohen_lenstra_constant(2, 1e-6);
        assert!((c2.to_f64() - float_product(2.0, 25)).abs() < 1e-6);
        assert!((c2.to_f64() - float_product(2.0, 50)).abs() < 1e-6);
        assert!((c2.to_f64() - 0.288788).abs() < 1e-6);

        let c3 = cohen_lenstra_constant(3, 1e-6);
        assert!((c3.to_f64() - float_product(3.0, 50)).abs() < 1e-6);
        assert!((c3.to_f64() - 0.560126).abs() < 1e-6);

        let big = 1_000_000_007u64;
        let c = cohen_lenstra_constant(big, 1e-3);
        assert_eq!(c.terms, 1);
        let v = c.to_f64();
        assert!(v < 1.0 && v > 1.0 - 2.0 / big as f64);
    }

    #[test]
    fn group_orders() {
        assert_eq!(group_order(&part(&[1, 1]), 2), BigUint::from(4u32));
        assert_eq!(group_order(&Partition::empty(), 7), BigUint::from(1u32));
        assert_eq!(group_order(&part(&[2]), 3), BigUint::from(9u32));
    }

    #[test]
    fn aut_order_examples() {
        assert_eq!(aut_order(&part(&[1, 1]), 2), BigUint::from(6u32));
        for p in [2u64, 3, 5, 7] {
            assert_eq!(aut_order(&part(&[1]), p), BigUint::from(p - 1));
        }
        assert_eq!(aut_order(&part(&[2]), 3), BigUint::from(6u32));
        assert_eq!(aut_order(&part(&[2, 1]), 2), BigUint::from(8u32));
        assert_eq!(aut_order(&Partition::empty(), 2), BigUint::from(1u32));
        // |GL_3(F_2)| = 168
        assert_eq!(aut_order(&part(&[1, 1, 1]), 2), BigUint::from(168u32));
    }

    fn gcd_u64(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd_u64(b, a % b)
        }
    }

    #[test]
    fn alt2_examples_and_gcd_decomposition() {
        assert_eq!(alt2_order(&part(&[1, 1]), 2), BigUint::from(2u32));
        assert_eq!(alt2_order(&part(&[5]), 3), BigUint::from(1u32));
        assert_eq!(alt2_order(&part(&[2, 1]), 3), BigUint::from(3u32));
        for p in [2u64, 3] {
            for l in Partition::all_up_to_size(8) {
                let orders: Vec<u64> = l.parts().iter().map(|&x| p.pow(x)).collect();
                let mut expected = BigUint::one();
                for i in 0..orders.len() {
                    for j in i + 1..orders.len() {
                        expected *= gcd_u64(orders[i], orders[j]);
                    }
                }
                assert_eq!(alt2_order(&l, p), expected, "λ={l} p={p}");
            }
        }
    }

    #[test]
    fn serde_shapes() {
        assert_eq!(serde_json::to_string(&part(&[3, 1])).unwrap(), "[3,1]");
        let back: Partition = serde_json::from_str("[1,3]").unwrap();
        assert_eq!(back, part(&[3, 1]));
        let g = GroupType::new([(2, part(&[3, 1])), (3, part(&[1])), (5, Partition::empty())]);
        assert_eq!(serde_json::to_string(&g).unwrap(), r#"{"2":[3,1],"3":[1]}"#);
        let back: GroupType = serde_json::from_str(r#"{"2":[3,1],"3":[1]}"#).unwrap();
        assert_eq!(back, g);
        assert_eq!(g.order(), BigUint::from(48u32));
    }

    #[test]
    fn parse_partition() {
        assert_eq!("[2,1]".parse::<Partition>().unwrap(), part(&[2, 1]));
        assert_eq!("1,2".parse::<Partition>().unwrap(), part(&[2, 1]));
        assert_eq!("[]".parse::<Partition>().unwrap(), Partition::empty());
        assert!("[a]".parse::<Partition>().is_err());
    }
}
