//! Brute-force cross-checks of the exact formulas.
//!
//! Each suite compares a closed form against an independent enumeration and
//! reports every disagreement it finds (up to a cap) as a readable dump.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::group::{
    count_automorphisms, enumerate_automorphisms, flag_aut_order_with, flag_classes, flag_orbit, hall_number, Bounds,
    ExplicitGroup,
};
use crate::hall_littlewood::{group_theoretic_constants, hl_limit_constants, normalized_constants};
use crate::linalg::{rank_mod_p, snf, snf_valuations, MatrixMod, RingSpec};
use crate::partition::{aut_order, Partition};
use crate::sampler::stream_rng;
use crate::theory::conditional_convolution;

const MAX_DUMPS: usize = 10;

/// Which suites to run and how far.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Largest group order enumerated by the group suites.
    pub max_order: u64,
    /// Largest group order for the orbit-stabilizer suite.
    pub max_orbit_order: u64,
    /// Largest `|λ| + |μ|` for the Hall-Littlewood suite.
    pub max_hl_size: u32,
    pub snf_trials: u32,
    /// Deliberately corrupts one automorphism count, to exercise failure
    /// reporting.
    pub inject_fault: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_order: 64,
            max_orbit_order: 32,
            max_hl_size: 4,
            snf_trials: 2000,
            inject_fault: false,
        }
    }
}

impl OracleConfig {
    /// Shrinks every suite to groups of order at most `max_order`.
    pub fn limited(max_order: u64) -> Self {
        let d = OracleConfig::default();
        OracleConfig {
            max_order: max_order.min(d.max_order),
            max_orbit_order: max_order.min(d.max_orbit_order),
            max_hl_size: (max_order.max(1).ilog2()).min(d.max_hl_size),
            snf_trials: if max_order < d.max_order { 200 } else { d.snf_trials },
            inject_fault: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub checked: u64,
    pub failures: u64,
    /// The first few counterexamples.
    pub dumps: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult {
            name: name.to_string(),
            checked: 0,
            failures: 0,
            dumps: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, dump: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.dumps.len() < MAX_DUMPS {
                self.dumps.push(dump());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checked > 0
    }
}

/// Every `(p, λ)` with `p^{|λ|} ≤ max_order`, nonempty `λ`.
pub fn groups_up_to(primes: &[u64], max_order: u64) -> Vec<(u64, Partition)> {
    let mut out = Vec::new();
    for &p in primes {
        let mut size = 1u32;
        while p.checked_pow(size).is_some_and(|o| o <= max_order) {
            out.extend(Partition::all_of_size(size).into_iter().map(|l| (p, l)));
            size += 1;
        }
    }
    out
}

fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&p| crate::partition::is_prime(p)).collect()
}

/// `|Aut(G_λ)|` from the closed form against exhaustive counting, and against
/// an explicit walk over all automorphisms when that is small enough.
pub fn aut_order_suite(cfg: &OracleConfig) -> SuiteResult {
    let mut r = SuiteResult::new("aut-order");
    let bounds = Bounds::default();
    for (p, lambda) in groups_up_to(&primes_up_to(cfg.max_order), cfg.max_order) {
        let g = ExplicitGroup::new(p, lambda.clone()).expect("prime");
        let mut formula = aut_order(&lambda, p);
        if cfg.inject_fault && r.checked == 0 {
            formula += 1u32;
        }
        let counted = BigUint::from(count_automorphisms(&g));
        r.check(formula == counted, || {
            format!("p={p} lambda={lambda}: formula {formula}, counted {counted}")
        });
        if formula.to_u64().is_some_and(|a| a <= 20_000) {
            let walked = enumerate_automorphisms(&g, &bounds).map(|v| v.len()).unwrap_or(0);
            r.check(BigUint::from(walked) == formula, || {
                format!("p={p} lambda={lambda}: formula {formula}, enumerated {walked}")
            });
        }
    }
    r
}

/// Hall numbers are symmetric in the subgroup and quotient types, and the
/// conditional convolution is a symmetric probability law.
pub fn hall_suite(cfg: &OracleConfig) -> SuiteResult {
    let mut r = SuiteResult::new("hall-symmetry");
    for (p, nu) in groups_up_to(&[2, 3], cfg.max_order) {
        for a in 0..=nu.size() {
            for lambda in Partition::all_of_size(a) {
                for mu in Partition::all_of_size(nu.size() - a) {
                    let x = hall_number(p, &nu, &mu, &lambda).expect("within bounds");
                    let y = hall_number(p, &nu, &lambda, &mu).expect("within bounds");
                    r.check(x == y, || format!("p={p} nu={nu} lambda={lambda} mu={mu}: {x} vs {y}"));
                }
            }
        }
    }
    for p in [2u64, 3] {
        for (_, h) in groups_up_to(&[p], cfg.max_order) {
            for (_, k) in groups_up_to(&[p], cfg.max_order) {
                if p.checked_pow(h.size() + k.size()).is_none_or(|o| o > cfg.max_order) {
                    continue;
                }
                let mut total = BigRational::zero();
                for g in Partition::all_of_size(h.size() + k.size()) {
                    let v = conditional_convolution(p, &g, &h, &k).expect("within bounds");
                    let w = conditional_convolution(p, &g, &k, &h).expect("within bounds");
                    r.check(v == w, || format!("p={p} G={g} H={h} K={k}: {v} vs swapped {w}"));
                    total += v;
                }
                r.check(total.is_one(), || format!("p={p} H={h} K={k}: total mass {total}"));
            }
        }
    }
    r
}

/// The Hall-Littlewood limit agrees with the group-theoretic constants, and
/// the finite-n normalized constants sum to one.
pub fn hall_littlewood_suite(cfg: &OracleConfig) -> SuiteResult {
    let mut r = SuiteResult::new("hall-littlewood");
    for p in [2u64, 3] {
        for total in 0..=cfg.max_hl_size {
            for a in 0..=total {
                for lambda in Partition::all_of_size(a) {
                    for mu in Partition::all_of_size(total - a) {
                        let limit = match hl_limit_constants(&lambda, &mu, p, 1e-6) {
                            Ok(l) => l,
                            Err(e) => {
                                r.check(false, || format!("p={p} lambda={lambda} mu={mu}: {e}"));
                                continue;
                            }
                        };
                        let groups = group_theoretic_constants(&lambda, &mu, p).expect("small sizes");
                        let keys: std::collections::BTreeSet<&Partition> =
                            limit.constants.keys().chain(groups.keys()).collect();
                        for nu in keys {
                            let x = limit.constants.get(nu).and_then(|v| v.to_f64()).unwrap_or(0.0);
                            let y = groups.get(nu).and_then(|v| v.to_f64()).unwrap_or(0.0);
                            let ok = (x - y).abs() <= limit.error_bound + 1e-12 && limit.error_bound <= 1e-6;
                            r.check(ok, || {
                                format!(
                                    "p={p} lambda={lambda} mu={mu} nu={nu}: limit {x} (bound {}), group {y}",
                                    limit.error_bound
                                )
                            });
                        }
                        let n0 = (total as usize).max(1);
                        for n in n0..=n0 + 1 {
                            let c = normalized_constants(&lambda, &mu, p, n).expect("n at least |λ|+|μ|");
                            let sum: BigRational = c.values().sum();
                            r.check(sum.is_one(), || {
                                format!("p={p} lambda={lambda} mu={mu} n={n}: sum {sum}")
                            });
                        }
                    }
                }
            }
        }
    }
    r
}

/// `|Aut_flag| · |orbit| = |Aut(G)|` for one chain per flag class, with the
/// orbit sizes adding up to the number of chains.
pub fn orbit_stabilizer_suite(cfg: &OracleConfig) -> SuiteResult {
    let mut r = SuiteResult::new("orbit-stabilizer");
    let bounds = Bounds {
        max_aut_order: u64::MAX,
        ..Bounds::default()
    };
    for (p, lambda) in groups_up_to(&[2, 3], cfg.max_orbit_order) {
        let g = ExplicitGroup::new(p, lambda.clone()).expect("prime");
        let aut = aut_order(&lambda, p).to_u64().expect("small group");
        let max_k = if g.order_saturating() <= 16 { 3 } else { 2 };
        for k in 2..=max_k {
            let classes = flag_classes(&g, k, &bounds).expect("within bounds");
            let mut covered = 0u64;
            for (_, chain) in &classes {
                let orbit = flag_orbit(&g, chain, &bounds).expect("within bounds").len() as u64;
                let stab = flag_aut_order_with(&g, chain, &bounds).expect("within bounds");
                covered += orbit;
                r.check(orbit * stab == aut, || {
                    format!("p={p} lambda={lambda} chain={chain:?}: orbit {orbit} x stabilizer {stab} != {aut}")
                });
            }
            let chains = crate::group::count_injective_flags(&g, k, &bounds).expect("within bounds");
            r.check(u128::from(covered) == chains, || {
                format!("p={p} lambda={lambda} k={k}: orbits cover {covered} of {chains} chains")
            });
        }
    }
    r
}

/// Randomized Smith normal form checks: `U M V` is the claimed diagonal,
/// `U` and `V` are invertible, and the valuations are sorted.
pub fn snf_suite(cfg: &OracleConfig) -> SuiteResult {
    let mut r = SuiteResult::new("snf");
    let mut rng = stream_rng(0x5eed, 0);
    for trial in 0..cfg.snf_trials {
        let p = [2u64, 3, 5][trial as usize % 3];
        let prec = rng.random_range(1..=10u32);
        let ring = RingSpec::new(p, prec).expect("small modulus");
        let (rows, cols) = (rng.random_range(1..=8usize), rng.random_range(1..=8usize));
        let q = ring.modulus() as i64;
        let vals: Vec<i64> = (0..rows * cols)
            .map(|_| {
                if rng.random_bool(0.5) {
                    rng.random_range(0..q)
                } else {
                    p as i64 * rng.random_range(0..q)
                }
            })
            .collect();
        let m = MatrixMod::from_i64(ring, rows, cols, &vals);
        let s = snf(&m);
        let lhs = s.u.mul(&m).and_then(|x| x.mul(&s.v));
        // The valuation-only routine reports one entry per row.
        let mut padded = s.valuations.clone();
        padded.resize(rows, prec);
        let ok = lhs.is_ok_and(|d| d == s.diagonal(rows, cols))
            && rank_mod_p(&s.u) == rows
            && rank_mod_p(&s.v) == cols
            && s.valuations.windows(2).all(|w| w[0] <= w[1])
            && padded == snf_valuations(&m);
        r.check(ok, || format!("trial {trial}: p={p} N={prec} M={vals:?}"));
    }
    r
}

/// Runs every suite.
pub fn run_suites(cfg: &OracleConfig) -> Vec<SuiteResult> {
    vec![
        aut_order_suite(cfg),
        hall_suite(cfg),
        hall_littlewood_suite(cfg),
        orbit_stabilizer_suite(cfg),
        snf_suite(cfg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let cfg = OracleConfig::limited(8);
        for s in run_suites(&cfg) {
            assert!(s.passed(), "{s:?}");
        }
    }

    #[test]
    fn injected_fault_is_reported() {
        let cfg = OracleConfig {
            inject_fault: true,
            ..OracleConfig::limited(4)
        };
        let s = aut_order_suite(&cfg);
        assert!(s.failures >= 1);
        assert!(s.dumps[0].contains("formula"));
    }
}
