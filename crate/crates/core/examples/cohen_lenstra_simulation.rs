//! Cokernels of random integer matrices against the Cohen-Lenstra law.

use cokflag::group::Bounds;
use cokflag::sampler::{EntryDistribution, FlagSampler, PrecisionPolicy};
use cokflag::stats::{cells, tv_distance, Histogram, Law};

fn main() {
    let dist: EntryDistribution = "bernoulli:0.3".parse().unwrap();
    let sampler = FlagSampler::new(&dist, &[2], 60, 1, PrecisionPolicy::default(), Bounds::default()).unwrap();
    let mut hist = Histogram::new("types");
    for record in sampler.sample_many(7, 20_000).unwrap() {
        match record.saturated() {
            true => hist.exclude(),
            false => hist.record(record.primes[0].types[0].to_string()),
        }
    }

    let law = Law::cohen_lenstra(2, 1e-4);
    println!("{:<10} {:>9} {:>9}  exact", "type", "observed", "law");
    let mut rows = cells(&hist, &law);
    rows.sort_by(|a, b| b.predicted.total_cmp(&a.predicted));
    for c in rows.iter().take(8) {
        println!("{:<10} {:>9.5} {:>9.5}  {}", c.key, c.frequency, c.predicted, c.exact);
    }
    println!("total variation: {:.4}", tv_distance(&hist, &law));
}
