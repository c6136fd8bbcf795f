use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::config::{ExperimentConfig, Mode};
use super::CliError;
use crate::group::{flag_classes, ExplicitGroup, SurjectionCounter};
use crate::hall_littlewood::normalized_constants;
use crate::partition::Partition;
use crate::sampler::{estimate_moments, CorankSampler, EntryDistribution, FlagSampler};
use crate::stats::{cells, chi_square_report, tv_distance, tv_empirical, Histogram, Law, OTHER};

pub const SCHEMA_VERSION: u32 = 1;

/// Report fields shared by every experiment.
pub fn header(command: &str, cfg: &ExperimentConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("command".into(), json!(command));
    m.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    m.insert("config_hash".into(), json!(cfg.hash()));
    m.insert("seed".into(), json!(cfg.seed));
    m
}

fn distribution(spec: &str) -> Result<EntryDistribution, CliError> {
    spec.parse().map_err(CliError::from)
}

fn flag_sampler(cfg: &ExperimentConfig, dist: &EntryDistribution, k: usize) -> Result<FlagSampler, CliError> {
    Ok(FlagSampler::new(
        dist,
        &cfg.primes,
        cfg.n,
        k,
        cfg.policy(),
        cfg.bounds(),
    )?)
}

/// Draws `cfg.samples` flag samples and histograms their classes and types.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let dist = distribution(&cfg.dist)?;
    let sampler = flag_sampler(cfg, &dist, cfg.k)?;
    let records = sampler.sample_many(cfg.seed, cfg.samples)?;
    if let Some(path) = &cfg.emit_samples {
        let file = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut w = std::io::BufWriter::new(file);
        for r in &records {
            serde_json::to_writer(&mut w, r).expect("records serialize");
            writeln!(w).map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    let mut flags = Histogram::new("flag");
    let mut types = Histogram::new("types");
    let mut beyond_bounds = 0u64;
    let mut precision: BTreeMap<String, u64> = BTreeMap::new();
    for r in &records {
        if r.saturated() {
            flags.exclude();
            types.exclude();
            continue;
        }
        for pr in &r.primes {
            *precision.entry(format!("p={} N={}", pr.p, pr.precision)).or_insert(0) += 1;
        }
        let t = r.types_key().expect("not saturated");
        match r.flag_key() {
            Some(f) => flags.record(f),
            None => {
                beyond_bounds += 1;
                flags.record(format!("marginal {t}"));
            }
        }
        types.record(t);
    }
    let mut report = header("simulate", cfg);
    report.insert("samples".into(), json!(cfg.samples));
    report.insert(
        "exclusions".into(),
        json!({ "saturated": flags.excluded, "beyond_bounds": beyond_bounds }),
    );
    report.insert("precision_used".into(), json!(precision));
    report.insert("histograms".into(), json!({ "flag": flags, "types": types }));
    Ok(Value::Object(report))
}

/// One conditioned sample outcome.
enum Outcome {
    /// The sample cannot meet any condition of interest.
    Skip,
    /// Saturated or otherwise unusable.
    Excluded,
    Hit(String, Option<String>),
}

/// Histograms per condition for one entry distribution.
struct Observed {
    groups: BTreeMap<String, Histogram>,
    excluded: u64,
}

fn fold(outcomes: Vec<Outcome>, schema: &str) -> Observed {
    let mut groups: BTreeMap<String, Histogram> = BTreeMap::new();
    let mut excluded = 0;
    for o in outcomes {
        match o {
            Outcome::Skip => {}
            Outcome::Excluded => excluded += 1,
            Outcome::Hit(c, v) => groups.entry(c).or_insert_with(|| Histogram::new(schema)).record_opt(v),
        }
    }
    Observed { groups, excluded }
}

fn type_pairs(cfg: &ExperimentConfig) -> Result<Vec<(Partition, Partition)>, CliError> {
    if cfg.given.is_empty() {
        return Err(CliError::Config(format!("mode {} needs --given H|K", cfg.mode.name())));
    }
    cfg.given
        .iter()
        .map(|g| {
            let (h, k) = g
                .split_once('|')
                .ok_or_else(|| CliError::Config(format!("condition {g:?} is not of the form H|K")))?;
            let parse = |s: &str| {
                s.parse::<Partition>()
                    .map_err(|e| CliError::Config(format!("{g:?}: {e}")))
            };
            Ok((parse(h)?, parse(k)?))
        })
        .collect()
}

fn corank_pairs(cfg: &ExperimentConfig) -> Result<Vec<(u32, u32)>, CliError> {
    if cfg.given.is_empty() {
        return Err(CliError::Config("mode corank needs --given a|b".into()));
    }
    cfg.given
        .iter()
        .map(|g| {
            let bad = || CliError::Config(format!("condition {g:?} is not of the form a|b"));
            let (a, b) = g.split_once('|').ok_or_else(bad)?;
            Ok((
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn type_condition(h: &Partition, k: &Partition) -> String {
    format!("H={h} K={k}")
}

fn corank_condition(a: u32, b: u32) -> String {
    format!("a={a} b={b}")
}

fn observe(cfg: &ExperimentConfig, mode: Mode, dist: &EntryDistribution) -> Result<Observed, CliError> {
    match mode {
        Mode::CohenLenstra => {
            cfg.prime()?;
            let s = flag_sampler(cfg, dist, 1)?;
            let out = (0..cfg.samples)
                .into_par_iter()
                .map(|i| {
                    let r = s.sample(cfg.seed, i)?;
                    Ok(match r.saturated() {
                        true => Outcome::Excluded,
                        false => Outcome::Hit("all".into(), Some(r.primes[0].types[0].to_string())),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(fold(out, "types"))
        }
        Mode::Flag => {
            cfg.prime()?;
            let s = flag_sampler(cfg, dist, cfg.k)?;
            let out = (0..cfg.samples)
                .into_par_iter()
                .map(|i| {
                    let r = s.sample(cfg.seed, i)?;
                    Ok(match r.saturated() {
                        true => Outcome::Excluded,
                        false => {
                            let key = r
                                .flag_key()
                                .unwrap_or_else(|| format!("marginal {}", r.types_key().unwrap_or_default()));
                            Outcome::Hit("all".into(), Some(key))
                        }
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(fold(out, "flag"))
        }
        Mode::Convolution | Mode::Vp => {
            let p = cfg.prime()?;
            let pairs = type_pairs(cfg)?;
            let ranks: BTreeSet<(usize, usize)> = pairs.iter().map(|(h, k)| (h.len(), k.len())).collect();
            let wanted: BTreeSet<&(Partition, Partition)> = pairs.iter().collect();
            let s = flag_sampler(cfg, dist, 2)?;
            let out = (0..cfg.samples)
                .into_par_iter()
                .map(|i| {
                    let draws = s.draws(cfg.seed, i);
                    // The rank of cok(M)_p is the corank of M over F_p, so a
                    // cheap rank test rules out most samples.
                    let c = draws.factor_coranks(p)?;
                    if !ranks.contains(&(c[0], c[1])) {
                        return Ok(Outcome::Skip);
                    }
                    let r = s.record(&draws, i)?;
                    let pr = &r.primes[0];
                    if pr.saturated {
                        return Ok(Outcome::Excluded);
                    }
                    let key = (pr.factor_types[0].clone(), pr.factor_types[1].clone());
                    Ok(match wanted.contains(&key) {
                        true => Outcome::Hit(type_condition(&key.0, &key.1), Some(pr.types[1].to_string())),
                        false => Outcome::Skip,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(fold(out, "type"))
        }
        Mode::Corank => {
            let p = cfg.prime()?;
            let pairs: BTreeSet<(u32, u32)> = corank_pairs(cfg)?.into_iter().collect();
            let s = CorankSampler::new(dist, p, cfg.n)?;
            let out = (0..cfg.samples)
                .into_par_iter()
                .map(|i| {
                    let r = s.sample(cfg.seed, i);
                    match pairs.contains(&(r.a, r.b)) {
                        true => Outcome::Hit(corank_condition(r.a, r.b), Some(r.c.to_string())),
                        false => Outcome::Skip,
                    }
                })
                .collect();
            Ok(fold(out, "corank"))
        }
        Mode::Cross | Mode::Moment => Err(CliError::Config(format!(
            "mode {} cannot be used as an observable",
            mode.name()
        ))),
    }
}

/// The limiting (or finite-n) law of each condition of `mode`.
fn laws(cfg: &ExperimentConfig, mode: Mode) -> Result<BTreeMap<String, Law>, CliError> {
    let p = cfg.prime()?;
    let mut out = BTreeMap::new();
    match mode {
        Mode::CohenLenstra => {
            out.insert("all".into(), Law::cohen_lenstra(p, cfg.truncation));
        }
        Mode::Flag => {
            out.insert("all".into(), Law::flags(p, cfg.k, cfg.max_class_order, &cfg.bounds())?);
        }
        Mode::Convolution => {
            for (h, k) in type_pairs(cfg)? {
                out.insert(type_condition(&h, &k), Law::convolution(p, &h, &k)?);
            }
        }
        Mode::Vp => {
            for (h, k) in type_pairs(cfg)? {
                let c = normalized_constants(&h, &k, p, cfg.n)?;
                let masses: BTreeMap<String, BigRational> = c.into_iter().map(|(nu, v)| (nu.to_string(), v)).collect();
                out.insert(type_condition(&h, &k), Law::from_masses(masses));
            }
        }
        Mode::Corank => {
            for (a, b) in corank_pairs(cfg)? {
                out.insert(corank_condition(a, b), Law::corank(p, a, b));
            }
        }
        Mode::Cross | Mode::Moment => unreachable!("not a law-backed observable"),
    }
    Ok(out)
}

fn compare_one(cfg: &ExperimentConfig, condition: &str, hist: &Histogram, law: &Law) -> (Value, bool) {
    let tv = tv_distance(hist, law);
    let cell_list = cells(hist, law);
    let max_dev = cell_list
        .iter()
        .filter(|c| c.key != OTHER)
        .map(|c| (c.frequency - c.predicted).abs())
        .fold(0.0, f64::max);
    let counted = hist.counted();
    let pass = counted > 0 && tv <= cfg.tv_threshold && cfg.cell_tolerance.is_none_or(|t| max_dev <= t);
    let v = json!({
        "condition": condition,
        "counted": counted,
        "excluded": hist.excluded,
        "tv": tv,
        "chi_square": chi_square_report(hist, law),
        "max_cell_deviation": max_dev,
        "constant": law.constant,
        "cells": cell_list,
        "verdict": verdict(pass),
    });
    (v, pass)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Runs the experiment of `cfg.mode` and checks it against theory. Returns
/// the report and whether every check passed.
pub fn compare(cfg: &ExperimentConfig) -> Result<(Value, bool), CliError> {
    let mut report = header("compare", cfg);
    report.insert("mode".into(), json!(cfg.mode.name()));
    let mut all_pass = true;
    let mut comparisons = Vec::new();
    match cfg.mode {
        Mode::Cross => {
            let d1 = distribution(&cfg.dist)?;
            let spec2 = cfg
                .dist2
                .as_ref()
                .ok_or_else(|| CliError::Config("mode cross needs --dist2".into()))?;
            let d2 = distribution(spec2)?;
            let a = observe(cfg, cfg.cross_of, &d1)?;
            let b = observe(cfg, cfg.cross_of, &d2)?;
            let conditions: BTreeSet<&String> = a.groups.keys().chain(b.groups.keys()).collect();
            if conditions.is_empty() {
                all_pass = false;
            }
            for c in conditions {
                let empty = Histogram::new("");
                let (ha, hb) = (a.groups.get(c).unwrap_or(&empty), b.groups.get(c).unwrap_or(&empty));
                let tv = tv_empirical(ha, hb);
                let pass = ha.counted() > 0 && hb.counted() > 0 && tv <= cfg.tv_threshold;
                all_pass &= pass;
                comparisons.push(json!({
                    "condition": c,
                    "tv": tv,
                    "first": ha,
                    "second": hb,
                    "verdict": verdict(pass),
                }));
            }
            report.insert("excluded".into(), json!([a.excluded, b.excluded]));
        }
        Mode::Moment => {
            let p = cfg.prime()?;
            let dist = distribution(&cfg.dist)?;
            let sampler = flag_sampler(cfg, &dist, cfg.k)?;
            let bounds = cfg.bounds();
            let mut targets = Vec::new();
            let mut names = Vec::new();
            let mut size = 0u32;
            while p.checked_pow(size).is_some_and(|o| o <= cfg.max_target_order) {
                for lambda in Partition::all_of_size(size) {
                    let g = ExplicitGroup::new(p, lambda)?;
                    for (class, chain) in flag_classes(&g, cfg.k, &bounds)? {
                        targets.push(SurjectionCounter::new(&g, &chain, &bounds)?);
                        names.push(class.to_string());
                    }
                }
                size += 1;
            }
            let estimates = estimate_moments(&sampler, &targets, cfg.seed, cfg.samples)?;
            for (name, e) in names.iter().zip(&estimates) {
                let rate = e.excluded as f64 / cfg.samples.max(1) as f64;
                let pass =
                    e.samples > 0 && (e.mean - 1.0).abs() <= cfg.moment_tolerance && rate < cfg.max_exclusion_rate;
                all_pass &= pass;
                comparisons.push(json!({
                    "target": name,
                    "estimate": e,
                    "exclusion_rate": rate,
                    "prediction": 1,
                    "verdict": verdict(pass),
                }));
            }
        }
        mode => {
            let dist = distribution(&cfg.dist)?;
            let observed = observe(cfg, mode, &dist)?;
            for (condition, law) in laws(cfg, mode)? {
                let empty = Histogram::new("");
                let hist = observed.groups.get(&condition).unwrap_or(&empty);
                let (v, pass) = compare_one(cfg, &condition, hist, &law);
                all_pass &= pass;
                comparisons.push(v);
            }
            report.insert("excluded".into(), json!(observed.excluded));
        }
    }
    report.insert("comparisons".into(), Value::Array(comparisons));
    report.insert("verdict".into(), json!(verdict(all_pass)));
    Ok((Value::Object(report), all_pass))
}
