use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use super::{Bounds, Element, ExplicitGroup, Frame, GroupError};
use crate::linalg::{snf_valuations, MatrixMod, RingSpec};
use crate::partition::Partition;

/// A subgroup `H ≤ G_λ`, stored as the Hermite basis of its preimage lattice
/// `L ⊆ Z^n`.
///
/// Row `i` of the basis is `p^{d_i} e_i + Σ_{j>i} a_{ij} e_j` with every
/// `a_{ij} < p^{d_j}`, which makes the representation unique. Rows with
/// `d_i = λ_i` are relations and vanish in `G`; the remaining rows, reduced
/// into `G`, form the echelon generating set [`Subgroup::generators`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgroup {
    diag: Vec<u32>,
    rows: Vec<Vec<u64>>,
    gens: Vec<Element>,
    order_exp: u32,
}

impl Subgroup {
    /// Echelon generators, one per row with `d_i < λ_i`.
    pub fn generators(&self) -> &[Element] {
        &self.gens
    }

    /// `log_p |H|`.
    pub fn order_exp(&self) -> u32 {
        self.order_exp
    }

    /// Valuations `d_i` of the Hermite diagonal.
    pub fn diagonal(&self) -> &[u32] {
        &self.diag
    }

    pub fn is_trivial(&self) -> bool {
        self.order_exp == 0
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (k, g) in self.gens.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            f.write_str("(")?;
            for (i, x) in g.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str(")")?;
        }
        f.write_str(">")
    }
}

impl Frame {
    /// Hermite basis of the lattice spanned by `gens` and the relations.
    pub(crate) fn hnf<'a>(&self, gens: impl IntoIterator<Item = &'a [u64]>) -> Subgroup {
        let n = self.rank();
        let z = self.z();
        let top = self.top;
        let mut pool: Vec<Vec<u64>> = gens
            .into_iter()
            .map(|g| g.iter().map(|&x| x % z.modulus).collect::<Vec<u64>>())
            .filter(|g| g.iter().any(|&x| x != 0))
            .collect();
        for (i, &e) in self.exps.iter().enumerate() {
            if e < top {
                let mut r = vec![0; n];
                r[i] = self.p.pow(e);
                pool.push(r);
            }
        }
        let mut diag = Vec::with_capacity(n);
        let mut rows: Vec<Vec<u64>> = Vec::with_capacity(n);
        for j in 0..n {
            let best = pool
                .iter()
                .enumerate()
                .filter(|(_, r)| r[j] != 0)
                .map(|(k, r)| (z.valuation(r[j]), k))
                .min();
            let Some((v, k)) = best else {
                // Only the implicit relation p^top e_j has a pivot here.
                diag.push(top);
                rows.push(vec![0; n]);
                continue;
            };
            let mut r = pool.swap_remove(k);
            let unit = z.shift_down(r[j], v);
            if unit != 1 {
                z.scale(&mut r, z.inv(unit));
            }
            for other in pool.iter_mut() {
                if other[j] != 0 {
                    let f = z.shift_down(other[j], v);
                    z.axpy_neg(other, &r, f);
                }
            }
            if v > 0 {
                // p^{top-v} r has zero pivot modulo p^top; it stays in the lattice.
                let mut extra = r.clone();
                z.scale(&mut extra, z.pow_p(top - v));
                pool.push(extra);
            }
            pool.retain(|row| row.iter().any(|&x| x != 0));
            diag.push(v);
            rows.push(r);
        }
        for j in 0..n {
            if diag[j] >= top {
                continue;
            }
            let pj = self.p.pow(diag[j]);
            let (head, tail) = rows.split_at_mut(j);
            let pivot = &tail[0];
            for row in head.iter_mut() {
                let q = row[j] / pj;
                if q != 0 {
                    z.axpy_neg(row, pivot, q);
                }
            }
        }
        let gens = rows
            .iter()
            .zip(&diag)
            .zip(&self.exps)
            .filter(|((_, &d), &e)| d < e)
            .map(|((r, _), _)| r.iter().zip(&self.moduli).map(|(&x, &m)| x % m).collect())
            .collect();
        let order_exp = self.exps.iter().zip(&diag).map(|(&e, &d)| e - d.min(e)).sum();
        Subgroup {
            diag,
            rows,
            gens,
            order_exp,
        }
    }

    pub(crate) fn contains(&self, h: &Subgroup, x: &[u64]) -> bool {
        let mut x = x.to_vec();
        self.contains_in_place(h, &mut x)
    }

    /// Membership test that reduces `x` in place.
    pub(crate) fn contains_in_place(&self, h: &Subgroup, x: &mut [u64]) -> bool {
        let z = self.z();
        for a in x.iter_mut() {
            *a %= z.modulus;
        }
        for j in 0..x.len() {
            if x[j] == 0 {
                continue;
            }
            let d = h.diag[j];
            if z.valuation(x[j]) < d {
                return false;
            }
            let q = z.shift_down(x[j], d);
            z.axpy_neg(&mut x[j..], &h.rows[j][j..], q);
        }
        true
    }

    pub(crate) fn extend(&self, h: &Subgroup, extra: &[u64]) -> Subgroup {
        self.hnf(h.gens.iter().map(Vec::as_slice).chain(std::iter::once(extra)))
    }
}

impl ExplicitGroup {
    pub fn trivial_subgroup(&self) -> Subgroup {
        self.frame().hnf(std::iter::empty())
    }

    pub fn whole(&self) -> Subgroup {
        let basis: Vec<Element> = (0..self.rank()).map(|i| self.basis(i)).collect();
        self.frame().hnf(basis.iter().map(Vec::as_slice))
    }

    /// The subgroup generated by `gens`.
    pub fn span(&self, gens: &[Element]) -> Result<Subgroup, GroupError> {
        for g in gens {
            self.check_element(g)?;
        }
        Ok(self.frame().hnf(gens.iter().map(Vec::as_slice)))
    }

    pub(crate) fn span_unchecked<'a>(&self, gens: impl IntoIterator<Item = &'a [u64]>) -> Subgroup {
        self.frame().hnf(gens)
    }

    /// `⟨H, x⟩`.
    pub fn extend(&self, h: &Subgroup, x: &[u64]) -> Subgroup {
        self.frame().extend(h, x)
    }

    pub fn contains(&self, h: &Subgroup, x: &[u64]) -> bool {
        self.frame().contains(h, x)
    }

    pub fn is_subgroup_of(&self, h: &Subgroup, k: &Subgroup) -> bool {
        h.order_exp <= k.order_exp && h.gens.iter().all(|g| self.contains(k, g))
    }

    /// Every element of `H`.
    pub fn subgroup_elements(&self, h: &Subgroup) -> Vec<Element> {
        let mut out = vec![self.zero()];
        for g in &h.gens {
            let ord = self.p().pow(self.element_order_exp(g));
            let mut next = Vec::with_capacity(out.len() * ord as usize);
            for x in &out {
                let mut y = x.clone();
                for _ in 0..ord {
                    next.push(y.clone());
                    y = self.add(&y, g);
                }
            }
            next.sort();
            next.dedup();
            out = next;
        }
        out
    }

    /// The partition `μ` with `H ≅ G_μ`.
    pub fn subgroup_type(&self, h: &Subgroup) -> Partition {
        let frame = self.frame();
        let top = frame.top;
        if h.gens.is_empty() {
            return Partition::empty();
        }
        // Embed G_λ into (Z/p^top)^n by x_j ↦ p^{top-λ_j} x_j.
        let ring = RingSpec::new(self.p(), top).expect("validated at construction");
        let (n, g) = (self.rank(), h.gens.len());
        let mut entries = vec![0u64; n * g];
        for (c, gen) in h.gens.iter().enumerate() {
            for j in 0..n {
                entries[j * g + c] = gen[j] * self.p().pow(top - frame.exps[j]);
            }
        }
        let m = MatrixMod::from_residues(ring, n, g, entries);
        Partition::new(
            snf_valuations(&m)
                .into_iter()
                .filter(|&v| v < top)
                .map(|v| top - v)
                .collect::<Vec<u32>>(),
        )
    }

    /// The partition of `G/H`.
    pub fn quotient_type(&self, h: &Subgroup) -> Partition {
        let frame = self.frame();
        let n = self.rank();
        if n == 0 {
            return Partition::empty();
        }
        let ring = RingSpec::new(self.p(), frame.top + 1).expect("validated at construction");
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in h.rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                entries.push(if i == j { self.p().pow(h.diag[i]) } else { x });
            }
        }
        let m = MatrixMod::from_residues(ring, n, n, entries);
        Partition::new(snf_valuations(&m))
    }

    /// Image of `H` under the homomorphism sending `e_i` to `images[i]` in `target`.
    pub fn image_of(&self, h: &Subgroup, images: &[Element], target: &ExplicitGroup) -> Subgroup {
        let imgs: Vec<Element> = h.gens.iter().map(|g| apply_hom(g, images, target)).collect();
        target.span_unchecked(imgs.iter().map(Vec::as_slice))
    }
}

/// `Σ_i x_i · images[i]` in `target`.
pub(crate) fn apply_hom(x: &[u64], images: &[Element], target: &ExplicitGroup) -> Element {
    let mut acc = vec![0u128; target.rank()];
    for (&c, img) in x.iter().zip(images) {
        if c == 0 {
            continue;
        }
        for ((a, &y), &m) in acc.iter_mut().zip(img).zip(target.moduli()) {
            *a = (*a + c as u128 * y as u128) % m as u128;
        }
    }
    acc.into_iter().map(|a| a as u64).collect()
}

/// A subgroup together with its isomorphism type and the type of its quotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubgroupInfo {
    pub subgroup: Subgroup,
    pub sub_type: Partition,
    pub quotient_type: Partition,
}

type SubgroupCache = RwLock<HashMap<(u64, Partition), Arc<Vec<SubgroupInfo>>>>;

fn subgroup_cache() -> &'static SubgroupCache {
    static CACHE: OnceLock<SubgroupCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Every subgroup of `G` exactly once, ordered by size then basis.
pub fn enumerate_subgroups(g: &ExplicitGroup) -> Result<Arc<Vec<SubgroupInfo>>, GroupError> {
    enumerate_subgroups_with(g, &Bounds::default())
}

pub fn enumerate_subgroups_with(g: &ExplicitGroup, bounds: &Bounds) -> Result<Arc<Vec<SubgroupInfo>>, GroupError> {
    g.check_bound(bounds)?;
    let key = (g.p(), g.partition().clone());
    if let Some(hit) = subgroup_cache().read().expect("cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let elements: Vec<Element> = g.elements().collect();
    let mut seen: HashSet<Subgroup> = HashSet::new();
    let trivial = g.trivial_subgroup();
    seen.insert(trivial.clone());
    let mut queue = vec![trivial];
    while let Some(h) = queue.pop() {
        for x in &elements {
            if g.contains(&h, x) {
                continue;
            }
            let k = g.extend(&h, x);
            if !seen.contains(&k) {
                seen.insert(k.clone());
                queue.push(k);
            }
        }
    }
    let mut list: Vec<SubgroupInfo> = seen
        .into_iter()
        .map(|h| SubgroupInfo {
            sub_type: g.subgroup_type(&h),
            quotient_type: g.quotient_type(&h),
            subgroup: h,
        })
        .collect();
    list.sort_by(|a, b| (a.subgroup.order_exp, &a.subgroup).cmp(&(b.subgroup.order_exp, &b.subgroup)));
    let list = Arc::new(list);
    subgroup_cache()
        .write()
        .expect("cache poisoned")
        .insert(key, list.clone());
    Ok(list)
}

/// Counts of subgroups of `G_ν` by (subgroup type, quotient type).
pub fn hall_table(p: u64, nu: &Partition) -> Result<BTreeMap<(Partition, Partition), u64>, GroupError> {
    let g = ExplicitGroup::new(p, nu.clone())?;
    let mut table = BTreeMap::new();
    for info in enumerate_subgroups(&g)?.iter() {
        *table
            .entry((info.sub_type.clone(), info.quotient_type.clone()))
            .or_insert(0) += 1;
    }
    Ok(table)
}

/// `|{N ≤ G_ν : N ≅ G_μ, G_ν/N ≅ G_λ}|`.
pub fn hall_number(p: u64, nu: &Partition, mu: &Partition, lambda: &Partition) -> Result<u64, GroupError> {
    if nu.size() != mu.size() + lambda.size() {
        return Ok(0);
    }
    let table = hall_table(p, nu)?;
    Ok(table.get(&(mu.clone(), lambda.clone())).copied().unwrap_or(0))
}
