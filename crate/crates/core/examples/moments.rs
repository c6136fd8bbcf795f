//! Expected numbers of surjections onto small target flags, which the limit
//! law predicts to be 1.

use cokflag::group::{flag_classes, Bounds, ExplicitGroup, SurjectionCounter};
use cokflag::sampler::{estimate_moments, EntryDistribution, FlagSampler, PrecisionPolicy};

fn main() {
    let bounds = Bounds::default();
    let dist: EntryDistribution = "uniform:-1..1".parse().unwrap();
    let sampler = FlagSampler::new(&dist, &[2], 40, 2, PrecisionPolicy::default(), bounds).unwrap();

    let mut names = Vec::new();
    let mut targets = Vec::new();
    for parts in [vec![1], vec![2], vec![1, 1]] {
        let g = ExplicitGroup::from_parts(2, &parts).unwrap();
        for (class, chain) in flag_classes(&g, 2, &bounds).unwrap() {
            names.push(class.to_string());
            targets.push(SurjectionCounter::new(&g, &chain, &bounds).unwrap());
        }
    }
    let estimates = estimate_moments(&sampler, &targets, 11, 4000).unwrap();
    for (name, e) in names.iter().zip(&estimates) {
        println!("{name:<36} mean {:.3} +- {:.3}", e.mean, e.stderr);
    }
}
