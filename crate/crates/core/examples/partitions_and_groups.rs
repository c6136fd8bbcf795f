//! Partitions as abelian p-group types: orders, automorphism groups and
//! Hall numbers.

use cokflag::group::hall_number;
use cokflag::partition::{aut_order, cohen_lenstra_constant, group_order, Partition};

fn main() {
    let p = 2;
    println!("type       |G|   |Aut G|  n(lambda)");
    for size in 0..=4 {
        for lambda in Partition::all_of_size(size) {
            println!(
                "{:<10} {:>4} {:>9} {:>9}",
                lambda.to_string(),
                group_order(&lambda, p),
                aut_order(&lambda, p),
                lambda.n_statistic()
            );
        }
    }

    let c = cohen_lenstra_constant(p, 1e-12);
    println!("\nprod_(i>=1) (1 - 2^-i) = {:.12}", c.to_f64());

    // Z/4 x Z/2 contains a subgroup Z/2 with quotient Z/4 in several ways.
    let nu: Partition = "[2,1]".parse().unwrap();
    let one: Partition = "[1]".parse().unwrap();
    for mu in [Partition::new(vec![2]), Partition::new(vec![1, 1])] {
        let g = hall_number(p, &nu, &mu, &one).unwrap();
        println!("subgroups of type [1] in {nu} with quotient {mu}: {g}");
    }
}
