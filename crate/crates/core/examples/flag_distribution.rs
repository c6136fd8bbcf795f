//! The flag of cok(M1 M2) -> cok(M1) against its limiting law.

use cokflag::group::Bounds;
use cokflag::sampler::{EntryDistribution, FlagSampler, PrecisionPolicy};
use cokflag::stats::{chi_square_report, tv_distance, Histogram, Law};

fn main() {
    let bounds = Bounds::default();
    let dist: EntryDistribution = "uniform:0..3".parse().unwrap();
    let sampler = FlagSampler::new(&dist, &[2], 40, 2, PrecisionPolicy::default(), bounds).unwrap();
    let mut hist = Histogram::new("flag");
    for record in sampler.sample_many(1, 10_000).unwrap() {
        hist.record_opt(record.flag_key());
    }

    let law = Law::flags(2, 2, 16, &bounds).unwrap();
    let mut top: Vec<_> = hist.counts.iter().collect();
    top.sort_by(|a, b| b.1.cmp(a.1));
    for (key, count) in top.into_iter().take(6) {
        println!(
            "{key:<40} {:.4} vs {:.4}",
            *count as f64 / hist.counted() as f64,
            law.mass(key)
        );
    }
    println!("TV over classes with |G| <= 16: {:.4}", tv_distance(&hist, &law));
    let chi = chi_square_report(&hist, &law);
    println!(
        "chi-square {:.2} on {} dof, p = {:?}",
        chi.statistic, chi.dof, chi.p_value
    );
}
