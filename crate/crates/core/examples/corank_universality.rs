//! The corank of M1 M2 over F_2 given the coranks of the factors, for two
//! entry distributions.

use std::collections::BTreeMap;

use cokflag::sampler::{CorankSampler, EntryDistribution};
use cokflag::theory::corank_conditional;

fn main() {
    let (a, b) = (1, 1);
    for spec in ["uniform:0..3", "bernoulli:0.3"] {
        let dist: EntryDistribution = spec.parse().unwrap();
        let sampler = CorankSampler::new(&dist, 2, 100).unwrap();
        let mut counts = BTreeMap::<u32, u64>::new();
        for s in sampler.sample_many(3, 50_000) {
            if (s.a, s.b) == (a, b) {
                *counts.entry(s.c).or_default() += 1;
            }
        }
        let total: u64 = counts.values().sum();
        println!("{spec}: {total} samples with coranks ({a},{b})");
        for c in a.max(b)..=a + b {
            let f = counts.get(&c).copied().unwrap_or(0) as f64 / total as f64;
            println!("  c = {c}: {f:.4} vs {}", corank_conditional(2, a, b, c));
        }
    }
}
