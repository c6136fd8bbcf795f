use std::collections::HashMap;

use num_traits::ToPrimitive;

use super::subgroup::apply_hom;
use super::{Bounds, Element, ExplicitGroup, Frame, GroupError, Subgroup};
use crate::partition::aut_order;

/// An automorphism of `G_λ`, given by the images of the generators `e_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Automorphism {
    images: Vec<Element>,
}

impl Automorphism {
    pub fn identity(g: &ExplicitGroup) -> Self {
        Automorphism {
            images: (0..g.rank()).map(|i| g.basis(i)).collect(),
        }
    }

    pub fn images(&self) -> &[Element] {
        &self.images
    }

    pub fn apply(&self, g: &ExplicitGroup, x: &[u64]) -> Element {
        apply_hom(x, &self.images, g)
    }

    pub fn apply_subgroup(&self, g: &ExplicitGroup, h: &Subgroup) -> Subgroup {
        g.image_of(h, &self.images, g)
    }
}

/// Generators of `Aut(G_λ)`: unit scalings of each factor, elementary
/// transvections `e_j ↦ e_j + p^{max(0, λ_i-λ_j)} e_i`, and swaps of equal
/// factors.
pub fn aut_generators(g: &ExplicitGroup) -> Vec<Automorphism> {
    let p = g.p();
    let n = g.rank();
    let exps = g.exponents();
    let id = Automorphism::identity(g);
    let mut out = Vec::new();
    let units: Vec<i64> = if p == 2 {
        vec![-1, 3, 5]
    } else {
        (2..p as i64).chain(std::iter::once(1 + p as i64)).collect()
    };
    for i in 0..n {
        let m = g.moduli()[i] as i64;
        for &u in &units {
            let u = u.rem_euclid(m) as u64;
            if u == 1 {
                continue;
            }
            let mut a = id.clone();
            a.images[i][i] = u;
            out.push(a);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut a = id.clone();
            a.images[j][i] = p.pow(exps[i].saturating_sub(exps[j])) % g.moduli()[i];
            out.push(a);
            if exps[i] == exps[j] && i < j {
                let mut s = id.clone();
                s.images.swap(i, j);
                out.push(s);
            }
        }
    }
    out
}

/// Elements to test after one step, each with the index of the chain member
/// it must land in.
type HermiteTests = Vec<(Element, usize)>;

type Visitor<'a> = &'a mut dyn FnMut(&[Element]) -> bool;

/// Incremental row echelon form over `F_p` supporting push/pop.
struct FpEchelon {
    p: u64,
    rows: Vec<(usize, Vec<u64>)>,
}

impl FpEchelon {
    fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut v = v.to_vec();
        for (piv, row) in &self.rows {
            let f = v[*piv];
            if f != 0 {
                for (a, &b) in v.iter_mut().zip(row) {
                    *a = (*a + (p - f) * b) % p;
                }
            }
        }
        v
    }

    /// Pushes `v` if independent; `v` must already be reduced.
    fn push_reduced(&mut self, mut v: Vec<u64>) -> bool {
        let Some(piv) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let p = self.p;
        let inv = (1..p).find(|&y| v[piv] * y % p == 1).expect("field inverse");
        for a in v.iter_mut() {
            *a = *a * inv % p;
        }
        self.rows.push((piv, v));
        true
    }

    fn pop(&mut self) {
        self.rows.pop();
    }
}

/// Coordinates of `p^{e-1} x` in the socle `G[p] ≅ F_p^n`, for `x` of order
/// dividing `p^e`.
fn socle_coords(g: &ExplicitGroup, x: &[u64], e: u32) -> Vec<u64> {
    let p = g.p();
    let y = g.scale(x, p.pow(e - 1));
    y.iter()
        .zip(g.exponents())
        .map(|(&a, &lam)| a / p.pow(lam - 1) % p)
        .collect()
}

/// Backtracking search over generator images.
///
/// A tuple `(g_1, …, g_n)` with `g_i` of order dividing `p^{λ_i}` defines an
/// automorphism exactly when the socle images `p^{λ_i-1} g_i` are linearly
/// independent, since a homomorphism is injective iff it is injective on the
/// socle. Coordinates are assigned in `order`; after each step the listed
/// chain elements whose support is already assigned are tested. Candidates
/// are grouped by socle image so the independence test runs once per group.
struct AutSearch<'a> {
    g: &'a ExplicitGroup,
    order: Vec<usize>,
    candidates: Vec<Vec<(Vec<u64>, Vec<Element>)>>,
    checks: Vec<HermiteTests>,
    chain: &'a [Subgroup],
}

impl<'a> AutSearch<'a> {
    fn new(g: &'a ExplicitGroup, chain: &'a [Subgroup]) -> Self {
        let (order, checks) = plan(g, chain);
        let candidates = order
            .iter()
            .map(|&c| {
                let e = g.exponents()[c];
                let mut groups: HashMap<Vec<u64>, Vec<Element>> = HashMap::new();
                for x in g.torsion_elements(e) {
                    groups.entry(socle_coords(g, &x, e)).or_default().push(x);
                }
                let mut groups: Vec<_> = groups.into_iter().filter(|(s, _)| s.iter().any(|&v| v != 0)).collect();
                groups.sort();
                groups
            })
            .collect();
        AutSearch {
            g,
            order,
            candidates,
            checks,
            chain,
        }
    }

    fn run(&self, visit: &mut dyn FnMut(&[Element]) -> bool) {
        let mut images = vec![self.g.zero(); self.g.rank()];
        let mut ech = FpEchelon {
            p: self.g.p(),
            rows: Vec::new(),
        };
        self.step(0, &mut images, &mut ech, &mut Some(visit), &mut 0);
    }

    fn count(&self) -> u64 {
        let mut images = vec![self.g.zero(); self.g.rank()];
        let mut ech = FpEchelon {
            p: self.g.p(),
            rows: Vec::new(),
        };
        let mut total = 0u64;
        self.step(0, &mut images, &mut ech, &mut None, &mut total);
        total
    }

    fn step(
        &self,
        s: usize,
        images: &mut Vec<Element>,
        ech: &mut FpEchelon,
        visit: &mut Option<Visitor<'_>>,
        total: &mut u64,
    ) -> bool {
        if s == self.order.len() {
            *total += 1;
            return match visit {
                Some(v) => v(images),
                None => true,
            };
        }
        let c = self.order[s];
        let g = self.g;
        let frame = g.frame();
        let checks = &self.checks[s];
        let last = s + 1 == self.order.len();
        // Contribution of the already assigned coordinates to each check.
        images[c].iter_mut().for_each(|x| *x = 0);
        let bases: Vec<Element> = checks.iter().map(|(h, _)| apply_hom(h, images, g)).collect();
        let mut buf = g.zero();
        for (soc, imgs) in &self.candidates[s] {
            let reduced = ech.reduce(soc);
            if reduced.iter().all(|&x| x == 0) {
                continue;
            }
            if last && checks.is_empty() && visit.is_none() {
                *total += imgs.len() as u64;
                continue;
            }
            let mut pushed = false;
            for img in imgs {
                let ok = checks.iter().zip(&bases).all(|((h, idx), base)| {
                    let hc = h[c] as u128;
                    for (((b, &x), &y), &m) in buf.iter_mut().zip(base).zip(img).zip(g.moduli()) {
                        *b = ((x as u128 + hc * y as u128) % m as u128) as u64;
                    }
                    frame.contains_in_place(&self.chain[*idx], &mut buf)
                });
                if !ok {
                    continue;
                }
                images[c].clone_from(img);
                if !pushed {
                    ech.push_reduced(reduced.clone());
                    pushed = true;
                }
                if !self.step(s + 1, images, ech, visit, total) {
                    ech.pop();
                    return false;
                }
            }
            if pushed {
                ech.pop();
            }
        }
        true
    }
}

/// Chooses the coordinate order that lets chain membership be tested as
/// early as possible, and the elements to test after each step.
fn plan(g: &ExplicitGroup, chain: &[Subgroup]) -> (Vec<usize>, Vec<HermiteTests>) {
    let n = g.rank();
    let reverse: Vec<usize> = (0..n).rev().collect();
    if chain.is_empty() {
        return (reverse, vec![Vec::new(); n]);
    }
    let mut orders = Vec::new();
    if n <= 6 {
        permutations(n, &mut Vec::new(), &mut orders);
    } else {
        orders.push(reverse);
    }
    let mut best: Option<(u64, Vec<usize>, Vec<HermiteTests>)> = None;
    for order in orders {
        // Position k of the permuted frame holds the coordinate assigned at
        // step n-1-k, so Hermite rows (supported on positions ≥ k) become
        // testable right after that step.
        let coord_at = |k: usize| order[n - 1 - k];
        let frame = Frame::new(g.p(), (0..n).map(|k| g.exponents()[coord_at(k)]).collect());
        let mut checks = vec![Vec::new(); n];
        let mut score = 0u64;
        for (idx, h) in chain.iter().enumerate() {
            let permuted: Vec<Element> = h
                .generators()
                .iter()
                .map(|x| (0..n).map(|k| x[coord_at(k)]).collect())
                .collect();
            let hp = frame.hnf(permuted.iter().map(Vec::as_slice));
            for row in hp.generators() {
                let pos = row.iter().position(|&x| x != 0).expect("nonzero generator");
                let s = n - 1 - pos;
                let mut x = g.zero();
                for (kk, &v) in row.iter().enumerate() {
                    let c = coord_at(kk);
                    x[c] = v % g.moduli()[c];
                }
                let weight = u64::from(frame.exps[pos] - hp.diagonal()[pos]);
                score += (n - s) as u64 * weight;
                checks[s].push((x, idx));
            }
        }
        if best.as_ref().is_none_or(|(b, _, _)| score > *b) {
            best = Some((score, order, checks));
        }
    }
    let (_, order, checks) = best.expect("at least one order");
    (order, checks)
}

fn permutations(n: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == n {
        out.push(prefix.clone());
        return;
    }
    for i in 0..n {
        if !prefix.contains(&i) {
            prefix.push(i);
            permutations(n, prefix, out);
            prefix.pop();
        }
    }
}

/// Visits every automorphism fixing each subgroup of `chain`; the visitor
/// returns `false` to stop early. Returns the number visited.
pub fn for_each_automorphism(
    g: &ExplicitGroup,
    chain: &[Subgroup],
    mut visit: impl FnMut(&Automorphism) -> bool,
) -> u64 {
    let search = AutSearch::new(g, chain);
    let mut count = 0u64;
    search.run(&mut |images| {
        count += 1;
        visit(&Automorphism {
            images: images.to_vec(),
        })
    });
    count
}

/// Number of automorphisms fixing each subgroup of `chain`, by exhaustive search.
pub(crate) fn count_stabilizer(g: &ExplicitGroup, chain: &[Subgroup]) -> u64 {
    AutSearch::new(g, chain).count()
}

/// All automorphisms of `G`, refusing groups with `|Aut(G)|` above the bound.
pub fn enumerate_automorphisms(g: &ExplicitGroup, bounds: &Bounds) -> Result<Vec<Automorphism>, GroupError> {
    let expected = aut_order(g.partition(), g.p()).to_u64().unwrap_or(u64::MAX);
    if expected > bounds.max_aut_order {
        return Err(GroupError::BoundExceeded {
            what: "automorphism group order",
            value: expected,
            bound: bounds.max_aut_order,
        });
    }
    let mut out = Vec::new();
    for_each_automorphism(g, &[], |a| {
        out.push(a.clone());
        true
    });
    Ok(out)
}

/// `|Aut(G)|` by exhaustive counting of admissible generator images.
///
/// Tuples are grouped by the span of their socle images, which keeps the count
/// exhaustive while making groups like `(Z/2)^6` tractable.
pub fn count_automorphisms(g: &ExplicitGroup) -> u128 {
    let n = g.rank();
    let socle = ExplicitGroup::new(g.p(), crate::partition::Partition::new(vec![1; n])).expect("valid prime");
    let mut states: HashMap<Subgroup, u128> = HashMap::new();
    states.insert(socle.trivial_subgroup(), 1);
    for i in 0..n {
        let e = g.exponents()[i];
        let mut multiplicity: HashMap<Vec<u64>, u128> = HashMap::new();
        for x in g.torsion_elements(e) {
            *multiplicity.entry(socle_coords(g, &x, e)).or_insert(0) += 1;
        }
        let mut next: HashMap<Subgroup, u128> = HashMap::new();
        for (s, count) in &states {
            for (v, mult) in &multiplicity {
                if socle.contains(s, v) {
                    continue;
                }
                *next.entry(socle.extend(s, v)).or_insert(0) += count * mult;
            }
        }
        states = next;
    }
    states.values().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn group(p: u64, parts: &[u32]) -> ExplicitGroup {
        ExplicitGroup::from_parts(p, parts).unwrap()
    }

    #[test]
    fn automorphism_examples() {
        let b = Bounds::default();
        assert_eq!(enumerate_automorphisms(&group(2, &[1]), &b).unwrap().len(), 1);
        assert_eq!(enumerate_automorphisms(&group(2, &[1, 1]), &b).unwrap().len(), 6);
        assert_eq!(enumerate_automorphisms(&group(3, &[2]), &b).unwrap().len(), 6);
        assert_eq!(enumerate_automorphisms(&group(2, &[2, 1]), &b).unwrap().len(), 8);
        let tight = Bounds {
            max_aut_order: 100,
            ..b
        };
        assert!(enumerate_automorphisms(&group(2, &[1, 1, 1]), &tight).is_err());
    }

    #[test]
    fn enumerated_maps_are_bijections() {
        for (p, parts) in [(2u64, vec![2, 1]), (2, vec![1, 1, 1]), (3, vec![2, 1]), (2, vec![3, 1])] {
            let g = group(p, &parts);
            let elems: Vec<Element> = g.elements().collect();
            let autos = enumerate_automorphisms(&g, &Bounds::default()).unwrap();
            let distinct: HashSet<_> = autos.iter().collect();
            assert_eq!(distinct.len(), autos.len());
            for a in &autos {
                let image: HashSet<Element> = elems.iter().map(|x| a.apply(&g, x)).collect();
                assert_eq!(image.len(), elems.len());
                for x in &elems {
                    for y in &elems {
                        assert_eq!(a.apply(&g, &g.add(x, y)), g.add(&a.apply(&g, x), &a.apply(&g, y)));
                    }
                }
            }
            assert_eq!(count_automorphisms(&g), autos.len() as u128);
        }
    }

    /// Every bijective endomorphism, from brute force over all generator images.
    fn brute_aut_count(g: &ExplicitGroup) -> u64 {
        let elems: Vec<Element> = g.elements().collect();
        let choices: Vec<Vec<Element>> = g.exponents().iter().map(|&e| g.torsion_elements(e).collect()).collect();
        let mut count = 0;
        let mut idx = vec![0usize; g.rank()];
        loop {
            let images: Vec<Element> = idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
            let image: HashSet<Element> = elems.iter().map(|x| apply_hom(x, &images, g)).collect();
            if image.len() == elems.len() {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return count;
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn dp_count_matches_bijection_count() {
        for (p, parts) in [
            (2u64, vec![]),
            (2, vec![1]),
            (2, vec![2, 1]),
            (2, vec![2, 2]),
            (3, vec![1, 1]),
            (2, vec![3, 1, 1]),
        ] {
            let g = group(p, &parts);
            assert_eq!(count_automorphisms(&g), brute_aut_count(&g) as u128, "{parts:?}");
        }
    }

    #[test]
    fn generators_generate() {
        // The closure of the generators under composition must be all of Aut(G).
        for (p, parts) in [
            (2u64, vec![2, 1]),
            (2, vec![1, 1, 1]),
            (3, vec![2, 1]),
            (2, vec![3, 1]),
            (2, vec![2, 2]),
        ] {
            let g = group(p, &parts);
            let gens = aut_generators(&g);
            let id = Automorphism::identity(&g);
            let mut seen: HashSet<Automorphism> = HashSet::from([id.clone()]);
            let mut frontier = vec![id];
            while let Some(a) = frontier.pop() {
                for s in &gens {
                    let composed = Automorphism {
                        images: a.images.iter().map(|x| s.apply(&g, x)).collect(),
                    };
                    if seen.insert(composed.clone()) {
                        frontier.push(composed);
                    }
                }
            }
            assert_eq!(seen.len() as u128, count_automorphisms(&g), "{parts:?}");
        }
    }
}
