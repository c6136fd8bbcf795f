//! Explicit computations inside a concrete group `G_λ = ⊕ Z/p^{λ_i}`.
//!
//! These routines enumerate elements, subgroups and automorphisms directly.
//! They are meant for small groups and serve as the brute-force layer that the
//! closed formulas elsewhere in the crate are checked against.

mod aut;
mod flag;
mod subgroup;

pub use aut::{aut_generators, count_automorphisms, enumerate_automorphisms, for_each_automorphism, Automorphism};
pub use flag::{
    canonicalize_flag, canonicalize_flag_with, count_injective_flags, count_surjections_with_flag,
    count_surjections_with_flag_with, flag_aut_order, flag_aut_order_with, flag_classes, flag_orbit, FlagClass,
    SurjectionCounter,
};
pub use subgroup::{enumerate_subgroups, enumerate_subgroups_with, hall_number, hall_table, Subgroup, SubgroupInfo};

use thiserror::Error;

use crate::linalg::{RingSpec, Zmod};
use crate::partition::{is_prime, Partition};

/// Enumeration limits; every exhaustive routine refuses work beyond them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Largest `|G|` for subgroup enumeration.
    pub max_group_order: u64,
    /// Largest `|Aut(G)|` for orbit and automorphism work.
    pub max_aut_order: u64,
    /// Largest number of homomorphisms a surjection count may enumerate.
    pub max_homs: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_group_order: 1 << 12,
            max_aut_order: 1_000_000,
            max_homs: 1 << 20,
        }
    }
}

impl Bounds {
    pub fn unlimited() -> Self {
        Bounds {
            max_group_order: u64::MAX,
            max_aut_order: u64::MAX,
            max_homs: u64::MAX,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("exponent {exponent} is too large for prime {p}")]
    ExponentTooLarge { p: u64, exponent: u32 },
    #[error("{what} is {value}, above the configured bound {bound}")]
    BoundExceeded { what: &'static str, value: u64, bound: u64 },
    #[error("element {0:?} does not belong to the group")]
    InvalidElement(Vec<u64>),
    #[error("subgroups do not form an increasing chain")]
    NotAChain,
    #[error("chains have different lengths ({0} vs {1})")]
    ChainLength(usize, usize),
}

/// Coordinates of a group element, one residue per cyclic factor.
pub type Element = Vec<u64>;

/// Arithmetic frame for lattices between `Z^n` and `⊕ p^{e_i} Z`.
///
/// The exponents need not be sorted; permuted frames are used when searching
/// automorphisms in a different coordinate order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Frame {
    pub p: u64,
    pub exps: Vec<u32>,
    pub top: u32,
    pub moduli: Vec<u64>,
}

impl Frame {
    pub fn new(p: u64, exps: Vec<u32>) -> Self {
        let top = exps.iter().copied().max().unwrap_or(0);
        let moduli = exps.iter().map(|&e| p.pow(e)).collect();
        Frame { p, exps, top, moduli }
    }

    pub fn rank(&self) -> usize {
        self.exps.len()
    }

    /// Arithmetic modulo `p^top`, where every lattice computation happens.
    pub fn z(&self) -> Zmod {
        Zmod::new(self.p, self.top)
    }
}

/// The group `⊕_i Z/p^{λ_i}` with its standard generators `e_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExplicitGroup {
    lambda: Partition,
    frame: Frame,
}

impl ExplicitGroup {
    pub fn new(p: u64, lambda: Partition) -> Result<Self, GroupError> {
        if !is_prime(p) {
            return Err(GroupError::NotPrime(p));
        }
        let top = lambda.largest_part();
        // Quotient computations run modulo p^{top+1}.
        if top + 1 > RingSpec::max_precision(p) {
            return Err(GroupError::ExponentTooLarge { p, exponent: top });
        }
        let frame = Frame::new(p, lambda.parts().to_vec());
        Ok(ExplicitGroup { lambda, frame })
    }

    pub fn from_parts(p: u64, parts: &[u32]) -> Result<Self, GroupError> {
        Self::new(p, Partition::new(parts.to_vec()))
    }

    pub fn p(&self) -> u64 {
        self.frame.p
    }

    pub fn partition(&self) -> &Partition {
        &self.lambda
    }

    pub fn rank(&self) -> usize {
        self.frame.rank()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.frame.exps
    }

    pub fn moduli(&self) -> &[u64] {
        &self.frame.moduli
    }

    pub(crate) fn frame(&self) -> &Frame {
        &self.frame
    }

    /// `|G|` if it fits in 64 bits.
    pub fn order(&self) -> Option<u64> {
        self.frame.p.checked_pow(self.lambda.size())
    }

    /// `|G|`, saturating at `u64::MAX`.
    pub fn order_saturating(&self) -> u64 {
        self.order().unwrap_or(u64::MAX)
    }

    pub fn zero(&self) -> Element {
        vec![0; self.rank()]
    }

    /// The generator `e_i`.
    pub fn basis(&self, i: usize) -> Element {
        let mut e = self.zero();
        e[i] = 1 % self.frame.moduli[i];
        e
    }

    pub fn contains_element(&self, x: &[u64]) -> bool {
        x.len() == self.rank() && x.iter().zip(&self.frame.moduli).all(|(&a, &m)| a < m)
    }

    pub fn check_element(&self, x: &[u64]) -> Result<(), GroupError> {
        if self.contains_element(x) {
            Ok(())
        } else {
            Err(GroupError::InvalidElement(x.to_vec()))
        }
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Element {
        x.iter()
            .zip(y)
            .zip(&self.frame.moduli)
            .map(|((&a, &b), &m)| ((a as u128 + b as u128) % m as u128) as u64)
            .collect()
    }

    pub fn scale(&self, x: &[u64], c: u64) -> Element {
        x.iter()
            .zip(&self.frame.moduli)
            .map(|(&a, &m)| ((a as u128 * c as u128) % m as u128) as u64)
            .collect()
    }

    pub fn neg(&self, x: &[u64]) -> Element {
        x.iter().zip(&self.frame.moduli).map(|(&a, &m)| (m - a) % m).collect()
    }

    /// Reduces arbitrary integer coordinates into the group.
    pub fn reduce(&self, x: &[i64]) -> Element {
        x.iter()
            .zip(&self.frame.moduli)
            .map(|(&a, &m)| a.rem_euclid(m as i64) as u64)
            .collect()
    }

    /// `log_p` of the order of `x`.
    pub fn element_order_exp(&self, x: &[u64]) -> u32 {
        let z = self.frame.z();
        x.iter()
            .zip(&self.frame.exps)
            .map(|(&a, &e)| e - z.valuation(a).min(e))
            .max()
            .unwrap_or(0)
    }

    /// All elements, in mixed-radix order with the first coordinate fastest.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        let choices: Vec<Vec<u64>> = self.frame.moduli.iter().map(|&m| (0..m).collect()).collect();
        product_iter(choices)
    }

    /// Elements killed by `p^k`.
    pub fn torsion_elements(&self, k: u32) -> impl Iterator<Item = Element> + '_ {
        product_iter(self.torsion_choices(k))
    }

    pub(crate) fn torsion_choices(&self, k: u32) -> Vec<Vec<u64>> {
        let p = self.frame.p;
        self.frame
            .exps
            .iter()
            .map(|&e| {
                let step = p.pow(e.saturating_sub(k));
                (0..p.pow(e.min(k))).map(|c| c * step).collect()
            })
            .collect()
    }

    /// `|G[p^k]|`.
    pub fn torsion_count(&self, k: u32) -> u64 {
        self.frame.p.pow(self.frame.exps.iter().map(|&e| e.min(k)).sum())
    }

    pub fn check_bound(&self, bounds: &Bounds) -> Result<u64, GroupError> {
        let order = self.order_saturating();
        if order > bounds.max_group_order {
            return Err(GroupError::BoundExceeded {
                what: "group order",
                value: order,
                bound: bounds.max_group_order,
            });
        }
        Ok(order)
    }
}

/// Cartesian product of per-coordinate choice lists.
pub(crate) fn product_iter(choices: Vec<Vec<u64>>) -> impl Iterator<Item = Element> {
    let n = choices.len();
    let empty = choices.iter().any(Vec::is_empty);
    let mut idx = vec![0usize; n];
    let mut done = empty;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out: Element = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        done = true;
        for (i, c) in idx.iter_mut().zip(&choices) {
            *i += 1;
            if *i < c.len() {
                done = false;
                break;
            }
            *i = 0;
        }
        Some(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_arithmetic() {
        let g = ExplicitGroup::from_parts(2, &[2, 1]).unwrap();
        assert_eq!(g.elements().count(), 8);
        assert_eq!(g.add(&[3, 1], &[2, 1]), vec![1, 0]);
        assert_eq!(g.neg(&[1, 1]), vec![3, 1]);
        assert_eq!(g.element_order_exp(&[2, 1]), 1);
        assert_eq!(g.element_order_exp(&[1, 0]), 2);
        assert_eq!(g.torsion_elements(1).count(), 4);
        assert_eq!(g.torsion_count(1), 4);
        assert!(g.contains_element(&[3, 1]));
        assert!(!g.contains_element(&[4, 0]));

        let t = ExplicitGroup::new(3, Partition::empty()).unwrap();
        assert_eq!(t.elements().collect::<Vec<_>>(), vec![Vec::<u64>::new()]);
        assert!(ExplicitGroup::from_parts(4, &[1]).is_err());
    }
}
