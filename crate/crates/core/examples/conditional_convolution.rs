//! Given cok(M1) and cok(M2), the law of cok(M1 M2), in theory and by
//! sampling.

use cokflag::cli::{compare, ExperimentConfig, Mode};
use cokflag::partition::Partition;
use cokflag::theory::conditional_convolution;

fn main() {
    let h: Partition = "[1]".parse().unwrap();
    let k: Partition = "[1,1]".parse().unwrap();
    for g in Partition::all_of_size(3) {
        let v = conditional_convolution(2, &g, &h, &k).unwrap();
        println!("P(cok = {g} | {h}, {k}) = {v}");
    }

    let cfg = ExperimentConfig {
        mode: Mode::Convolution,
        n: 30,
        samples: 20_000,
        dist: "uniform:0..3".into(),
        given: vec!["1|1".into()],
        ..ExperimentConfig::default()
    };
    let (report, pass) = compare(&cfg).unwrap();
    for c in report["comparisons"][0]["cells"].as_array().unwrap() {
        println!("{}: observed {:.4}, predicted {}", c["key"], c["frequency"], c["exact"]);
    }
    println!("verdict: {}", if pass { "PASS" } else { "FAIL" });
}
