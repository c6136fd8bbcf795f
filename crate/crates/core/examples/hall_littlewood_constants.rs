//! Hall-Littlewood structure constants at t = 1/p and their agreement with
//! Hall numbers.

use cokflag::hall_littlewood::{group_theoretic_constants, hl_limit_constants, normalized_constants};
use cokflag::partition::Partition;

fn main() {
    let lambda: Partition = "[1]".parse().unwrap();
    let mu: Partition = "[1]".parse().unwrap();
    for n in 2..=5 {
        let c = normalized_constants(&lambda, &mu, 2, n).unwrap();
        let row: Vec<String> = c.iter().map(|(nu, v)| format!("{nu}: {v}")).collect();
        println!("n = {n}: {}", row.join(", "));
    }

    let limit = hl_limit_constants(&lambda, &mu, 2, 1e-9).unwrap();
    let group = group_theoretic_constants(&lambda, &mu, 2).unwrap();
    println!("limit at n = {} (error <= {:e}):", limit.n_vars, limit.error_bound);
    for (nu, v) in &limit.constants {
        println!("  {nu}: {v}  group constant {}", group[nu]);
    }
}
