//! `eval-g`, `eval-alpha`.

use crate::config::{config_err, resolve, CliResult};
use crate::output::{CsvOut, manifest, num};
use crate::Ctx;
use clap::Args;
use critforest::drift::{eval_alpha, AlphaTable, AlphaWeight, DriftEvalConfig};
use critforest::stable_density::{eval_g, QuadratureConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalGArgs {
    /// Comma-separated points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// Grid start, used with --to and --step.
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn grid(x: &Option<Vec<f64>>, from: Option<f64>, to: Option<f64>, step: Option<f64>) -> CliResult<Vec<f64>> {
    match (x, from, to, step) {
        (Some(xs), None, None, None) if !xs.is_empty() => Ok(xs.clone()),
        (None, Some(a), Some(b), Some(h)) if h > 0.0 && a <= b => {
            let k = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=k).map(|i| a + h * i as f64).collect())
        }
        _ => config_err("give either a list of points or a grid with from <= to and step > 0"),
    }
}

pub fn eval_g_cmd(flags: &EvalGArgs, ctx: &Ctx) -> CliResult<()> {
    let mut a = resolve("eval-g", flags, ctx.file.as_ref())?;
    let xs = grid(&a.x, a.from, a.to, a.step)?;
    let cfg = QuadratureConfig { abs_tol: *a.abs_tol.get_or_insert(QuadratureConfig::default().abs_tol), ..Default::default() };
    cfg.validate()?;
    let values: Vec<f64> = xs.par_iter().map(|&x| eval_g(x, &cfg)).collect::<critforest::Result<_>>()?;
    let mut out = CsvOut::create(a.out.as_deref(), &manifest("eval-g", &a, None), &["x", "g"])?;
    for (x, g) in xs.iter().zip(values) {
        out.row([num(*x), num(g)])?;
    }
    out.finish()
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalAlphaArgs {
    /// Comma-separated heights b > 0.
    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<f64>>,
    /// Comma-separated λ values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub lambda: Option<Vec<f64>>,
    /// Interpolate from this table file; points it does not cover use quadrature.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Build the default table (or take it from the cache) and write it here.
    #[arg(long)]
    pub build_table: Option<PathBuf>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Weight of the `a` integrals.
    #[arg(long, value_enum)]
    pub weight: Option<AlphaWeightArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaWeightArg {
    /// g(λ-a) exp((λ-a)³/6), the default.
    Cubic,
    /// g(λ-a), the form finite-N chains converge to.
    Plain,
}

impl From<AlphaWeightArg> for AlphaWeight {
    fn from(w: AlphaWeightArg) -> Self {
        match w {
            AlphaWeightArg::Plain => AlphaWeight::Plain,
            AlphaWeightArg::Cubic => AlphaWeight::Cubic,
        }
    }
}

pub fn eval_alpha_cmd(flags: &EvalAlphaArgs, ctx: &Ctx) -> CliResult<()> {
    let mut a = resolve("eval-alpha", flags, ctx.file.as_ref())?;
    let cfg = DriftEvalConfig {
        rel_tol: *a.rel_tol.get_or_insert(DriftEvalConfig::default().rel_tol),
        weight: (*a.weight.get_or_insert(AlphaWeightArg::Cubic)).into(),
        ..Default::default()
    };
    let table = match (&a.table, &a.build_table) {
        (Some(_), Some(_)) => return config_err("--table and --build-table are exclusive"),
        (Some(path), None) => {
            let t = AlphaTable::load(path)?;
            if t.weight != cfg.weight {
                return config_err(format!("table uses the {} weight, not {}", t.weight.name(), cfg.weight.name()));
            }
            Some(t)
        }
        (None, Some(path)) => {
            let t = AlphaTable::cached_default(ctx.cache_dir.as_deref(), &cfg)?;
            t.save(path)?;
            Some(t)
        }
        (None, None) => None,
    };
    let (Some(bs), Some(ls)) = (a.b.clone(), a.lambda.clone()) else {
        if a.build_table.is_some() {
            return Ok(());
        }
        return config_err("eval-alpha needs --b and --lambda");
    };
    let points: Vec<(f64, f64)> = ls.iter().flat_map(|&l| bs.iter().map(move |&b| (b, l))).collect();
    let values: Vec<(f64, &str)> = points
        .par_iter()
        .map(|&(b, l)| match table.as_ref().and_then(|t| t.alpha(b, l)) {
            Some(v) => Ok((v, "table")),
            None => eval_alpha(b, l, &cfg).map(|v| (v, "quadrature")),
        })
        .collect::<critforest::Result<_>>()?;
    let mut out = CsvOut::create(a.out.as_deref(), &manifest("eval-alpha", &a, None), &["b", "lambda", "alpha", "source"])?;
    for ((b, l), (v, src)) in points.iter().zip(values) {
        out.row([num(*b), num(*l), num(v), src.to_string()])?;
    }
    out.finish()
}
