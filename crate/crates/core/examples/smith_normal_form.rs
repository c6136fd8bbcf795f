//! Smith normal form over Z/p^N and cokernel types of integer matrices.

use cokflag::linalg::{cokernel_type, snf, MatrixMod, RingSpec};

fn main() {
    let ring = RingSpec::new(2, 8).unwrap();
    let m = MatrixMod::from_rows(ring, &[vec![2, 4, 0], vec![6, 0, 8], vec![4, 4, 12]]);
    let result = snf(&m);
    println!("valuations: {:?}", result.valuations);

    // U M V is the claimed diagonal.
    let umv = result.u.mul(&m).unwrap().mul(&result.v).unwrap();
    assert_eq!(umv, result.diagonal(3, 3));
    println!("U M V = diag checked");

    match cokernel_type(&m).finite() {
        Some(t) => println!("cok(M) at 2 has type {t}"),
        None => println!("precision too low"),
    }

    // At precision 2 the entry 8 vanishes and the cokernel saturates.
    let low = m.reduce_precision(2).unwrap();
    println!("at precision 2: {:?}", cokernel_type(&low));
}
