//! Subgroups of Z/4 x Z/2 and the Aut-classes of 2-step flags.

use cokflag::group::{enumerate_subgroups, flag_aut_order, flag_classes, Bounds, ExplicitGroup};

fn main() {
    let g = ExplicitGroup::from_parts(2, &[2, 1]).unwrap();
    let subs = enumerate_subgroups(&g).unwrap();
    println!("{} subgroups of Z/4 x Z/2:", subs.len());
    for s in subs.iter() {
        println!(
            "  {:<14} type {:<6} quotient {}",
            s.subgroup.to_string(),
            s.sub_type.to_string(),
            s.quotient_type
        );
    }

    println!("\nflag classes with k = 2:");
    for (class, chain) in flag_classes(&g, 2, &Bounds::default()).unwrap() {
        let aut = flag_aut_order(&g, &chain).unwrap();
        println!("  {class}  |Aut_flag| = {aut}");
    }
}
