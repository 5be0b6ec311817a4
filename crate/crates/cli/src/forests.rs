//! `oracle`, `sample-forest`, `explore`, `domination`.

use crate::config::{config_err, resolve, CliResult};
use crate::output::{CsvOut, manifest, num, sink, write_json};
use crate::Ctx;
use clap::{Args, ValueEnum};
use critforest::combinatorics::{acyclic_prob_exact, forest_count_log, LogCountTable, ScalingParams};
use critforest::exploration::{excursion_lengths, explore};
use critforest::forest_io;
use critforest::graph::Forest;
use critforest::oracle;
use critforest::rng::labelled_stream;
use critforest::samplers::{sample_forest_nm, sample_forest_np, Strategy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Largest `N` for which `auto` builds a count table and samples exactly.
const AUTO_EXACT_MAX: usize = 1000;

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleArgs {
    /// Number of vertices (at most 7).
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge probability for `--acyclic`.
    #[arg(long)]
    pub p: Option<f64>,
    /// Compare P(G(N,p) acyclic) instead of forest counts.
    #[arg(long)]
    #[serde(default)]
    pub acyclic: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn oracle_cmd(flags: &OracleArgs, ctx: &Ctx) -> CliResult<()> {
    let a = resolve("oracle", flags, ctx.file.as_ref())?;
    let Some(n) = a.n else { return config_err("oracle needs --n") };
    let table = LogCountTable::build(n.max(1))?;
    let manifest = manifest("oracle", &a, None);
    if a.acyclic {
        let Some(p) = a.p else { return config_err("oracle --acyclic needs --p") };
        let enumerated = oracle::acyclic_prob(n, p)?;
        let formula = acyclic_prob_exact(&table, n, p)?;
        let mut out = CsvOut::create(a.out.as_deref(), &manifest, &["n", "p", "enumerated", "formula", "abs_diff"])?;
        out.row([n.to_string(), num(p), num(enumerated), num(formula), num((enumerated - formula).abs())])?;
        return out.finish();
    }
    if a.p.is_some() {
        return config_err("--p only applies with --acyclic");
    }
    let counts = oracle::forest_counts(n)?;
    let mut out = CsvOut::create(a.out.as_deref(), &manifest, &["m", "enumerated", "formula"])?;
    for (m, c) in counts.iter().enumerate() {
        let formula = forest_count_log(&table, n, m)?.exp().round() as u64;
        out.row([m.to_string(), c.to_string(), formula.to_string()])?;
    }
    out.finish()
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Auto,
    Exact,
    Rejection,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForestFormat {
    Text,
    Binary,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleForestArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Exact edge count: F(N, m).
    #[arg(long)]
    pub m: Option<usize>,
    /// Edge probability: F(N, p).
    #[arg(long)]
    pub p: Option<f64>,
    /// Critical-window parameter: F(N, p) with p = (1 + λ N^{-1/3}) / N.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    #[arg(long)]
    pub max_attempts: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<ForestFormat>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sample_forest_cmd(flags: &SampleForestArgs, ctx: &Ctx) -> CliResult<()> {
    let mut a = resolve("sample-forest", flags, ctx.file.as_ref())?;
    let Some(n) = a.n else { return config_err("sample-forest needs --n") };
    let given = [a.m.is_some(), a.p.is_some(), a.lambda.is_some()].iter().filter(|&&g| g).count();
    if given != 1 {
        return config_err("sample-forest needs exactly one of --m, --p, --lambda");
    }
    let count = *a.count.get_or_insert(1);
    let seed = *a.seed.get_or_insert(1);
    let strategy = *a.strategy.get_or_insert(StrategyArg::Auto);
    let max_attempts = *a.max_attempts.get_or_insert(Strategy::DEFAULT_ATTEMPTS);
    let format = *a.format.get_or_insert(ForestFormat::Text);
    let p = match (a.p, a.lambda) {
        (Some(p), _) => Some(p),
        (None, Some(l)) => Some(ScalingParams::from_lambda(n, l)?.p),
        _ => None,
    };
    let exact = match strategy {
        StrategyArg::Exact => true,
        StrategyArg::Rejection => false,
        StrategyArg::Auto => n <= AUTO_EXACT_MAX,
    };
    let table = if exact { Some(LogCountTable::build(n.max(1))?) } else { None };
    let strat = if exact { Strategy::Exact } else { Strategy::Rejection { max_attempts } };
    let forests: Vec<Forest> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = labelled_stream(seed, "sample-forest", i);
            match (a.m, p) {
                (Some(m), _) => sample_forest_nm(table.as_ref(), n, m, &mut rng, strat),
                (None, Some(p)) => sample_forest_np(table.as_ref(), n, p, &mut rng, strat),
                _ => unreachable!("one of m, p is set"),
            }
        })
        .collect::<critforest::Result<_>>()?;
    let manifest = manifest("sample-forest", &a, Some(seed));
    let mut w = sink(a.out.as_deref())?;
    match format {
        ForestFormat::Text => {
            w.write_all(manifest.csv_comment().as_bytes())?;
            forest_io::write_text(&forests, &mut w)?;
        }
        ForestFormat::Binary => forest_io::write_binary_with_meta(&forests, &serde_json::to_string(&manifest)?, &mut w)?,
    }
    w.flush()?;
    Ok(())
}

/// Forests from a text or binary forest file, detected by content.
pub fn read_forests(path: &Path) -> CliResult<Vec<Forest>> {
    let bytes = std::fs::read(path)?;
    if forest_io::is_binary(&bytes) {
        Ok(forest_io::read_binary(&bytes[..])?)
    } else {
        Ok(forest_io::read_text(&bytes[..])?)
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExploreArgs {
    /// Forest file written by `sample-forest`.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Emit the full stack-size path instead of component sizes.
    #[arg(long)]
    #[serde(default)]
    pub trace: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn explore_cmd(flags: &ExploreArgs, ctx: &Ctx) -> CliResult<()> {
    let a = resolve("explore", flags, ctx.file.as_ref())?;
    let Some(input) = a.input.as_deref() else { return config_err("explore needs --in") };
    let forests = read_forests(input)?;
    let manifest = manifest("explore", &a, None);
    if a.trace {
        let mut out = CsvOut::create(a.out.as_deref(), &manifest, &["forest", "step", "vertex", "stack"])?;
        for (i, f) in forests.iter().enumerate() {
            let t = explore(f.graph());
            for (step, z) in t.stack_sizes.iter().enumerate() {
                let vertex = if step == 0 { String::new() } else { t.order[step - 1].to_string() };
                out.row([i.to_string(), step.to_string(), vertex, z.to_string()])?;
            }
        }
        return out.finish();
    }
    let mut out = CsvOut::create(a.out.as_deref(), &manifest, &["forest", "n", "rank", "size"])?;
    for (i, f) in forests.iter().enumerate() {
        for (rank, size) in excursion_lengths(&explore(f.graph()))?.iter().enumerate() {
            out.row([i.to_string(), f.n_vertices().to_string(), (rank + 1).to_string(), size.to_string()])?;
        }
    }
    out.finish()
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DominationArgs {
    /// Number of vertices (at most 7).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn domination_cmd(flags: &DominationArgs, ctx: &Ctx) -> CliResult<()> {
    let a = resolve("domination", flags, ctx.file.as_ref())?;
    let (Some(n), Some(p), Some(q)) = (a.n, a.p, a.q) else {
        return config_err("domination needs --n, --p and --q");
    };
    let report = oracle::domination_search(n, p, q)?;
    write_json(a.out.as_deref(), &manifest("domination", &a, None), &report)
}
