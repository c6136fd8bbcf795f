//! For Haar matrices of fixed size n, the law of cok(M1 M2) given the factor
//! cokernels is given by normalized Hall-Littlewood constants.

use cokflag::cli::{compare, ExperimentConfig, Mode};
use cokflag::hall_littlewood::normalized_constants;
use cokflag::partition::Partition;

fn main() {
    let one: Partition = "[1]".parse().unwrap();
    let exact = normalized_constants(&one, &one, 2, 2).unwrap();
    println!("n = 2, given Z/2 and Z/2:");
    for (nu, v) in &exact {
        println!("  {nu}: {v}");
    }

    let cfg = ExperimentConfig {
        mode: Mode::Vp,
        n: 2,
        samples: 50_000,
        dist: "haar:2^12".into(),
        given: vec!["1|1".into()],
        ..ExperimentConfig::default()
    };
    let (report, _) = compare(&cfg).unwrap();
    let cmp = &report["comparisons"][0];
    for c in cmp["cells"].as_array().unwrap() {
        println!("  sampled {}: {:.4}", c["key"], c["frequency"]);
    }
    println!("samples meeting the condition: {}", cmp["counted"]);
}
