use std::io::Write;

use clap::{Args, ValueEnum};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use super::CliError;
use crate::group::{flag_classes, Bounds, ExplicitGroup};
use crate::hall_littlewood::{
    group_theoretic_constants, hl_limit_constants, normalized_constants, structure_constants,
};
use crate::partition::{aut_order, cohen_lenstra_constant, Partition};
use crate::theory::{conditional_convolution, corank_conditional, flag_constant, flag_measure_with, FlagMeasureQuery};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Table {
    CohenLenstra,
    Flag,
    Convolution,
    Corank,
}

#[derive(Args, Debug, Clone)]
pub struct TheoryArgs {
    /// Which law to tabulate; without it the table is empty.
    #[arg(long, value_enum)]
    pub table: Option<Table>,
    #[arg(long, default_value_t = 2)]
    pub p: u64,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Largest group order listed.
    #[arg(long, default_value_t = 16)]
    pub max_order: u64,
    /// Largest corank listed in the corank table.
    #[arg(long, default_value_t = 2)]
    pub max_corank: u32,
    /// `H|K` conditions for the convolution table; all pairs up to
    /// `--max-order` when omitted.
    #[arg(long)]
    pub given: Vec<String>,
    #[arg(long, default_value_t = Bounds::default().max_group_order)]
    pub max_group_order: u64,
    #[arg(long, default_value_t = Bounds::default().max_aut_order)]
    pub max_aut_order: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// One table row. `exact` is a fraction, or a fraction of the constant `C`
/// described in the table's `constant` field.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub query: String,
    pub exact: String,
    pub decimal: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableOut {
    pub constant: Option<String>,
    pub rows: Vec<Row>,
}

fn row(query: String, exact: &BigRational) -> Row {
    Row {
        query,
        exact: exact.to_string(),
        decimal: exact.to_f64().unwrap_or(f64::NAN),
    }
}

fn partitions_up_to(p: u64, max_order: u64) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut size = 0u32;
    while p.checked_pow(size).is_some_and(|o| o <= max_order) {
        out.extend(Partition::all_of_size(size));
        size += 1;
    }
    out
}

pub fn theory_table(args: &TheoryArgs) -> Result<TableOut, CliError> {
    let bounds = Bounds {
        max_group_order: args.max_group_order,
        max_aut_order: args.max_aut_order,
        ..Bounds::default()
    };
    let p = args.p;
    if !crate::partition::is_prime(p) {
        return Err(CliError::Config(format!("{p} is not prime")));
    }
    if args.max_order > args.max_group_order {
        return Err(CliError::Bounds(format!(
            "--max-order {} exceeds the group order bound {}",
            args.max_order, args.max_group_order
        )));
    }
    let mut rows = Vec::new();
    let mut constant = None;
    match args.table {
        None => {}
        Some(Table::CohenLenstra) => {
            let c = cohen_lenstra_constant(p, 1e-15);
            constant = Some(format!("C = prod_(i>=1) (1 - {p}^-i) = {:.15}", c.to_f64()));
            for lambda in partitions_up_to(p, args.max_order) {
                let aut = aut_order(&lambda, p);
                rows.push(Row {
                    query: format!("G={lambda}"),
                    exact: format!("C/{aut}"),
                    decimal: c.to_f64() / aut.to_f64().unwrap_or(f64::INFINITY),
                });
            }
        }
        Some(Table::Flag) => {
            let (c, _) = flag_constant(&[p], args.k, 1e-15);
            constant = Some(format!(
                "C = prod_(i>=1) (1 - {p}^-i); C^{} = {:.15}",
                args.k,
                c.to_f64().unwrap_or(f64::NAN)
            ));
            for lambda in partitions_up_to(p, args.max_order) {
                let g = ExplicitGroup::new(p, lambda)?;
                for (class, chain) in flag_classes(&g, args.k, &bounds)? {
                    let m = flag_measure_with(&FlagMeasureQuery::single(args.k, g.clone(), chain), 1e-15, &bounds)?;
                    rows.push(Row {
                        query: class.to_string(),
                        exact: format!("C^{}/{}", args.k, m.flag_aut_order),
                        decimal: m.to_f64(),
                    });
                }
            }
        }
        Some(Table::Convolution) => {
            let pairs: Vec<(Partition, Partition)> = if args.given.is_empty() {
                let all = partitions_up_to(p, args.max_order);
                let mut v = Vec::new();
                for h in &all {
                    for k in &all {
                        if p.checked_pow(h.size() + k.size()).is_some_and(|o| o <= args.max_order) {
                            v.push((h.clone(), k.clone()));
                        }
                    }
                }
                v
            } else {
                args.given
                    .iter()
                    .map(|g| {
                        let (h, k) = g
                            .split_once('|')
                            .ok_or_else(|| CliError::Config(format!("condition {g:?} is not of the form H|K")))?;
                        let parse = |s: &str| s.parse::<Partition>().map_err(CliError::Config);
                        Ok((parse(h)?, parse(k)?))
                    })
                    .collect::<Result<_, CliError>>()?
            };
            for (h, k) in pairs {
                for g in Partition::all_of_size(h.size() + k.size()) {
                    let v = conditional_convolution(p, &g, &h, &k)?;
                    if v != BigRational::default() {
                        rows.push(row(format!("G={g} H={h} K={k}"), &v));
                    }
                }
            }
        }
        Some(Table::Corank) => {
            for a in 0..=args.max_corank {
                for b in 0..=args.max_corank {
                    for c in a.max(b)..=a + b {
                        rows.push(row(format!("a={a} b={b} c={c}"), &corank_conditional(p, a, b, c)));
                    }
                }
            }
        }
    }
    Ok(TableOut { constant, rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HlKind {
    /// Normalized constants at `t = 1/p` and `n` variables.
    Normalized,
    /// Raw structure constants at `t` and `n` variables.
    Structure,
    /// The `n → ∞` limit of the normalized constants.
    Limit,
    /// The group-theoretic constants from Hall numbers.
    Group,
}

#[derive(Args, Debug, Clone)]
pub struct HlArgs {
    #[arg(long)]
    pub lambda: String,
    #[arg(long)]
    pub mu: String,
    #[arg(long, default_value_t = 2)]
    pub p: u64,
    /// Number of variables; defaults to `|λ| + |μ|`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Parameter for raw structure constants; defaults to `1/p`.
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long, value_enum, default_value_t = HlKind::Normalized)]
    pub kind: HlKind,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

pub fn hl_table(args: &HlArgs) -> Result<TableOut, CliError> {
    let parse = |s: &str| s.parse::<Partition>().map_err(CliError::Config);
    let (lambda, mu) = (parse(&args.lambda)?, parse(&args.mu)?);
    let p = args.p;
    let n = args.n.unwrap_or(((lambda.size() + mu.size()) as usize).max(1));
    let label = |nu: &Partition| format!("nu={nu}");
    let (constant, values) = match args.kind {
        HlKind::Normalized => (None, normalized_constants(&lambda, &mu, p, n)?),
        HlKind::Structure => {
            let t = match &args.t {
                Some(s) => crate::sampler::parse_rational(s)
                    .ok_or_else(|| CliError::Config(format!("cannot parse t = {s:?}")))?,
                None => BigRational::new(1.into(), p.into()),
            };
            let c = structure_constants(&lambda, &mu, &t, n)?;
            (None, c.coeffs)
        }
        HlKind::Limit => {
            let l = hl_limit_constants(&lambda, &mu, p, args.tolerance)?;
            let note = format!("values at n = {}, within {:e} of the limit", l.n_vars, l.error_bound);
            (Some(note), l.constants)
        }
        HlKind::Group => (None, group_theoretic_constants(&lambda, &mu, p)?),
    };
    let rows = values.iter().map(|(nu, v)| row(label(nu), v)).collect();
    Ok(TableOut { constant, rows })
}

pub fn write_table(out: &mut dyn Write, table: &TableOut, format: Format) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, table).expect("tables serialize");
            writeln!(out).map_err(io)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["query", "exact", "decimal"])
                .map_err(|e| CliError::Io(e.to_string()))?;
            for r in &table.rows {
                w.write_record([r.query.as_str(), r.exact.as_str(), &r.decimal.to_string()])
                    .map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.flush().map_err(io)?;
        }
    }
    Ok(())
}
