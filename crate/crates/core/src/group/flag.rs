use std::collections::{HashMap, HashSet};
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::aut::{aut_generators, count_stabilizer};
use super::subgroup::{apply_hom, enumerate_subgroups_with};
use super::{product_iter, Bounds, Element, ExplicitGroup, GroupError, Subgroup};
use crate::partition::{aut_order, Partition};

/// Isomorphism class of a surjective flag, presented by its top group and the
/// `Aut(G_ν)`-orbit of its kernel chain.
///
/// `orbit` renders the lexicographically least chain in the orbit, one
/// subgroup per step separated by `;`, each as its echelon generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlagClass {
    pub p: u64,
    pub nu: Partition,
    pub orbit: String,
}

impl std::fmt::Display for FlagClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p={} nu={} chain={}", self.p, self.nu, self.orbit)
    }
}

fn render_chain(chain: &[Subgroup]) -> String {
    chain.iter().map(Subgroup::to_string).collect::<Vec<_>>().join(";")
}

fn check_chain(g: &ExplicitGroup, chain: &[Subgroup]) -> Result<(), GroupError> {
    for w in chain.windows(2) {
        if !g.is_subgroup_of(&w[0], &w[1]) {
            return Err(GroupError::NotAChain);
        }
    }
    Ok(())
}

fn check_aut_bound(g: &ExplicitGroup, bounds: &Bounds) -> Result<(), GroupError> {
    let order = aut_order(g.partition(), g.p()).to_u64().unwrap_or(u64::MAX);
    if order > bounds.max_aut_order {
        return Err(GroupError::BoundExceeded {
            what: "automorphism group order",
            value: order,
            bound: bounds.max_aut_order,
        });
    }
    Ok(())
}

/// The `Aut(G)`-orbit of a chain, sorted.
pub fn flag_orbit(g: &ExplicitGroup, chain: &[Subgroup], bounds: &Bounds) -> Result<Vec<Vec<Subgroup>>, GroupError> {
    check_chain(g, chain)?;
    check_aut_bound(g, bounds)?;
    let gens = aut_generators(g);
    let start = chain.to_vec();
    let mut seen: HashSet<Vec<Subgroup>> = HashSet::from([start.clone()]);
    let mut frontier = vec![start];
    while let Some(c) = frontier.pop() {
        for a in &gens {
            let image: Vec<Subgroup> = c.iter().map(|h| a.apply_subgroup(g, h)).collect();
            if !seen.contains(&image) {
                seen.insert(image.clone());
                frontier.push(image);
            }
        }
    }
    let mut orbit: Vec<Vec<Subgroup>> = seen.into_iter().collect();
    orbit.sort();
    Ok(orbit)
}

type OrbitCache = RwLock<HashMap<(u64, Partition, Vec<Subgroup>), Arc<str>>>;

fn orbit_cache() -> &'static OrbitCache {
    static CACHE: OnceLock<OrbitCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

pub fn canonicalize_flag(g: &ExplicitGroup, chain: &[Subgroup]) -> Result<FlagClass, GroupError> {
    canonicalize_flag_with(g, chain, &Bounds::default())
}

/// Canonical class of the flag with kernel chain `H_1 ≤ … ≤ H_{k-1}` in `G`.
///
/// Whole orbits are cached, so repeated chains cost a single lookup.
pub fn canonicalize_flag_with(g: &ExplicitGroup, chain: &[Subgroup], bounds: &Bounds) -> Result<FlagClass, GroupError> {
    let key = (g.p(), g.partition().clone(), chain.to_vec());
    let hit = orbit_cache().read().expect("cache poisoned").get(&key).cloned();
    let orbit_id = match hit {
        Some(id) => id,
        None => {
            let orbit = flag_orbit(g, chain, bounds)?;
            let id: Arc<str> = render_chain(&orbit[0]).into();
            let mut cache = orbit_cache().write().expect("cache poisoned");
            for c in orbit {
                cache.insert((g.p(), g.partition().clone(), c), id.clone());
            }
            id
        }
    };
    Ok(FlagClass {
        p: g.p(),
        nu: g.partition().clone(),
        orbit: orbit_id.to_string(),
    })
}

pub fn flag_aut_order(g: &ExplicitGroup, chain: &[Subgroup]) -> Result<u64, GroupError> {
    flag_aut_order_with(g, chain, &Bounds::default())
}

/// `|{α ∈ Aut(G) : α(H_i) = H_i for all i}|`, by exhaustive search.
pub fn flag_aut_order_with(g: &ExplicitGroup, chain: &[Subgroup], bounds: &Bounds) -> Result<u64, GroupError> {
    check_chain(g, chain)?;
    check_aut_bound(g, bounds)?;
    Ok(count_stabilizer(g, chain))
}

/// Counts surjections onto a fixed target flag from many source flags.
///
/// Target elements are indexed so that spans can be compared as bitsets.
pub struct SurjectionCounter {
    target: ExplicitGroup,
    elems: Vec<Element>,
    strides: Vec<u64>,
    chain_sets: Vec<Vec<u64>>,
    full: Vec<u64>,
    bounds: Bounds,
}

impl SurjectionCounter {
    pub fn new(target: &ExplicitGroup, chain: &[Subgroup], bounds: &Bounds) -> Result<Self, GroupError> {
        target.check_bound(bounds)?;
        check_chain(target, chain)?;
        let elems: Vec<Element> = target.elements().collect();
        let mut strides = Vec::with_capacity(target.rank());
        let mut s = 1u64;
        for &m in target.moduli() {
            strides.push(s);
            s *= m;
        }
        let mut counter = SurjectionCounter {
            target: target.clone(),
            elems,
            strides,
            chain_sets: Vec::new(),
            full: Vec::new(),
            bounds: *bounds,
        };
        counter.full = counter.set_of(&target.subgroup_elements(&target.whole()));
        counter.chain_sets = chain
            .iter()
            .map(|h| counter.set_of(&target.subgroup_elements(h)))
            .collect();
        Ok(counter)
    }

    pub fn target(&self) -> &ExplicitGroup {
        &self.target
    }

    pub fn chain_len(&self) -> usize {
        self.chain_sets.len()
    }

    fn index(&self, x: &[u64]) -> usize {
        x.iter().zip(&self.strides).map(|(&a, &s)| a * s).sum::<u64>() as usize
    }

    fn set_of(&self, xs: &[Element]) -> Vec<u64> {
        let mut bits = vec![0u64; self.elems.len().div_ceil(64)];
        for x in xs {
            let i = self.index(x);
            bits[i / 64] |= 1 << (i % 64);
        }
        bits
    }

    /// Element set of the span of `gens`, as a bitset.
    fn span_set(&self, gens: &[usize], memo: &mut HashMap<Vec<usize>, Vec<u64>>) -> Vec<u64> {
        let mut key = gens.to_vec();
        key.sort_unstable();
        key.dedup();
        key.retain(|&i| i != 0);
        if let Some(hit) = memo.get(&key) {
            return hit.clone();
        }
        let mut bits = vec![0u64; self.elems.len().div_ceil(64)];
        bits[0] |= 1;
        let mut members = vec![0usize];
        let mut k = 0;
        while k < members.len() {
            let x = members[k];
            for &g in &key {
                let y = self.index(&self.target.add(&self.elems[x], &self.elems[g]));
                if bits[y / 64] >> (y % 64) & 1 == 0 {
                    bits[y / 64] |= 1 << (y % 64);
                    members.push(y);
                }
            }
            k += 1;
        }
        memo.insert(key, bits.clone());
        bits
    }

    /// Surjections `φ: source → target` with `φ(H_i) = H'_i` for every step.
    pub fn count(&self, source: &ExplicitGroup, chain: &[Subgroup]) -> Result<u64, GroupError> {
        if chain.len() != self.chain_sets.len() {
            return Err(GroupError::ChainLength(chain.len(), self.chain_sets.len()));
        }
        let choices: Vec<Vec<u64>> = source
            .exponents()
            .iter()
            .map(|&e| self.target.torsion_elements(e).map(|x| self.index(&x) as u64).collect())
            .collect();
        let total = choices
            .iter()
            .try_fold(1u64, |acc, c| acc.checked_mul(c.len() as u64))
            .unwrap_or(u64::MAX);
        if total > self.bounds.max_homs {
            return Err(GroupError::BoundExceeded {
                what: "homomorphism count",
                value: total,
                bound: self.bounds.max_homs,
            });
        }
        let mut memo = HashMap::new();
        let mut count = 0u64;
        for idx in product_iter(choices) {
            let idx: Vec<usize> = idx.into_iter().map(|i| i as usize).collect();
            if self.span_set(&idx, &mut memo) != self.full {
                continue;
            }
            let images: Vec<Element> = idx.iter().map(|&i| self.elems[i].clone()).collect();
            let ok = chain.iter().zip(&self.chain_sets).all(|(h, want)| {
                let img: Vec<usize> = h
                    .generators()
                    .iter()
                    .map(|x| self.index(&apply_hom(x, &images, &self.target)))
                    .collect();
                self.span_set(&img, &mut memo) == *want
            });
            if ok {
                count += 1;
            }
        }
        Ok(count)
    }
}

pub fn count_surjections_with_flag(
    source: &ExplicitGroup,
    source_chain: &[Subgroup],
    target: &ExplicitGroup,
    target_chain: &[Subgroup],
) -> Result<u64, GroupError> {
    count_surjections_with_flag_with(source, source_chain, target, target_chain, &Bounds::default())
}

/// Surjections `φ` with `φ(H_i) = H'_i` for each step of the two chains.
pub fn count_surjections_with_flag_with(
    source: &ExplicitGroup,
    source_chain: &[Subgroup],
    target: &ExplicitGroup,
    target_chain: &[Subgroup],
    bounds: &Bounds,
) -> Result<u64, GroupError> {
    check_chain(source, source_chain)?;
    SurjectionCounter::new(target, target_chain, bounds)?.count(source, source_chain)
}

/// `n_k(G)`: the number of chains `H_1 ≤ … ≤ H_{k-1} ≤ G`.
pub fn count_injective_flags(g: &ExplicitGroup, k: usize, bounds: &Bounds) -> Result<u128, GroupError> {
    if k <= 1 {
        return Ok(1);
    }
    let subs = enumerate_subgroups_with(g, bounds)?;
    if k == 2 {
        return Ok(subs.len() as u128);
    }
    // below[j] lists the subgroups contained in subgroup j; the list is sorted
    // by order, so containment only looks backwards.
    let below: Vec<Vec<usize>> = (0..subs.len())
        .map(|j| {
            (0..=j)
                .filter(|&i| g.is_subgroup_of(&subs[i].subgroup, &subs[j].subgroup))
                .collect()
        })
        .collect();
    let mut f = vec![1u128; subs.len()];
    for _ in 2..k {
        f = below.iter().map(|b| b.iter().map(|&i| f[i]).sum()).collect();
    }
    Ok(f.iter().sum())
}

/// One representative chain for every class of surjective `k`-flags with top
/// group `G`, sorted by class.
pub fn flag_classes(
    g: &ExplicitGroup,
    k: usize,
    bounds: &Bounds,
) -> Result<Vec<(FlagClass, Vec<Subgroup>)>, GroupError> {
    let subs = enumerate_subgroups_with(g, bounds)?;
    let mut chains: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 1..k {
        chains = chains
            .into_iter()
            .flat_map(|c| {
                let last = c.last().copied();
                let subs = &subs;
                (last.unwrap_or(0)..subs.len())
                    .filter(move |&j| last.is_none_or(|i| g.is_subgroup_of(&subs[i].subgroup, &subs[j].subgroup)))
                    .map(move |j| {
                        let mut next = c.clone();
                        next.push(j);
                        next
                    })
            })
            .collect();
    }
    let mut classes: HashMap<FlagClass, Vec<Subgroup>> = HashMap::new();
    for c in chains {
        let chain: Vec<Subgroup> = c.iter().map(|&i| subs[i].subgroup.clone()).collect();
        let class = canonicalize_flag_with(g, &chain, bounds)?;
        classes.entry(class).or_insert(chain);
    }
    let mut out: Vec<_> = classes.into_iter().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}
