//! `simulate-kernel`, `simulate-diffusion`.

use crate::config::{config_err, resolve, CliResult};
use crate::output::{CsvOut, manifest, num, opt, sink, write_json};
use crate::numerics::AlphaWeightArg;
use crate::Ctx;
use clap::{Args, ValueEnum};
use critforest::combinatorics::ScalingParams;
use critforest::diffusion::{coupled_zb, diffusion_excursions, simulate_b, simulate_z, DiffusionPath, DriftField};
use critforest::drift::{AlphaTable, DriftEvalConfig};
use critforest::exploration::{empirical_increment_stats, KernelChain, StatsBins};
use critforest::rng::labelled_stream;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::PathBuf;

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateKernelArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Horizon in rescaled time; the chain runs ⌊T N^{2/3}⌋ steps.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Add the limiting drift prediction to each cell (loads the α table).
    #[arg(long)]
    #[serde(default)]
    pub predict: bool,
    /// Weight of the α integrals used by `--predict`.
    #[arg(long, value_enum)]
    pub weight: Option<AlphaWeightArg>,
    #[arg(long)]
    pub t_width: Option<f64>,
    #[arg(long)]
    pub b_width: Option<f64>,
    #[arg(long)]
    pub b_max: Option<f64>,
    /// Jump threshold in units of N^{1/3}.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Also write every path as `replica,step,z` CSV.
    #[arg(long)]
    pub paths_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn simulate_kernel_cmd(flags: &SimulateKernelArgs, ctx: &Ctx) -> CliResult<()> {
    let mut a = resolve("simulate-kernel", flags, ctx.file.as_ref())?;
    let Some(n) = a.n else { return config_err("simulate-kernel needs --n") };
    let d = StatsBins::default();
    let lambda = *a.lambda.get_or_insert(0.0);
    let horizon = *a.horizon.get_or_insert(2.0);
    let replicas = *a.replicas.get_or_insert(100);
    let seed = *a.seed.get_or_insert(1);
    let bins = StatsBins {
        t_width: *a.t_width.get_or_insert(d.t_width),
        t_max: horizon,
        b_width: *a.b_width.get_or_insert(d.b_width),
        b_max: *a.b_max.get_or_insert(d.b_max),
        delta: *a.delta.get_or_insert(d.delta),
    };
    if !(horizon > 0.0) || replicas == 0 {
        return config_err("simulate-kernel needs --horizon > 0 and --replicas >= 1");
    }
    let steps = (horizon * (n as f64).powf(2.0 / 3.0)).floor() as usize;
    let sp = ScalingParams::from_lambda(n, lambda)?;
    let paths = KernelChain::new(n, sp.p)?.simulate_ensemble(steps.min(n), replicas, seed)?;
    let cfg = DriftEvalConfig { weight: (*a.weight.get_or_insert(AlphaWeightArg::Cubic)).into(), ..Default::default() };
    let field = if a.predict {
        Some(DriftField::new(Some(AlphaTable::cached_default(ctx.cache_dir.as_deref(), &cfg)?), cfg))
    } else {
        None
    };
    let predict = |t: f64, b: f64| field.as_ref().map_or(f64::NAN, |f| f.eval(t, b, lambda).unwrap_or(f64::NAN));
    let stats = empirical_increment_stats(&paths, n, &bins, field.as_ref().map(|_| &predict as &(dyn Fn(f64, f64) -> f64 + Sync)))?;
    let manifest = manifest("simulate-kernel", &a, Some(seed));

    let header = ["kind", "t_lo", "b_lo", "count", "mean", "se", "second_moment", "second_moment_se", "jumps", "predicted_drift"];
    let mut out = CsvOut::create(a.out.as_deref(), &manifest, &header)?;
    for b in &stats.bins {
        out.row([
            "increment".to_string(),
            num(b.t_lo),
            num(b.b_lo),
            b.count.to_string(),
            num(b.drift.mean),
            num(b.drift.se),
            num(b.second_moment.mean),
            num(b.second_moment.se),
            b.jumps.to_string(),
            opt(b.predicted_drift),
        ])?;
    }
    // for stickiness rows `mean` is E[Z_{n+1}^2 | Z_n = 0]
    for s in &stats.stickiness {
        out.row([
            "stickiness".to_string(),
            num(s.t_lo),
            String::new(),
            s.count.to_string(),
            num(s.next_square.mean),
            num(s.next_square.se),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
    }
    out.finish()?;
    if let Some(path) = a.paths_out.as_deref() {
        let mut out = CsvOut::create(Some(path), &manifest, &["replica", "step", "z"])?;
        for (i, p) in paths.iter().enumerate() {
            for (step, z) in p.iter().enumerate() {
                out.row([i.to_string(), step.to_string(), z.to_string()])?;
            }
        }
        out.finish()?;
    }
    Ok(())
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    /// The forest diffusion with the α correction.
    Z,
    /// The reflected Brownian motion with drift λ - t.
    B,
    /// Both, driven by the same noise.
    Coupled,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateDiffusionArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub process: Option<Process>,
    /// Shortest excursion reported; defaults to 2 dt.
    #[arg(long)]
    pub min_length: Option<f64>,
    /// Number of longest excursions kept per path.
    #[arg(long)]
    pub top: Option<usize>,
    /// Weight of the α integrals.
    #[arg(long, value_enum)]
    pub weight: Option<AlphaWeightArg>,
    /// Evaluate α by quadrature instead of the cached table.
    #[arg(long)]
    #[serde(default)]
    pub direct: bool,
    /// Binary file for the path of replica 0 (Z for `coupled`).
    #[arg(long)]
    pub path_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub replica: usize,
    pub process: String,
    pub time_at_zero: f64,
    pub sup: f64,
    /// Longest completed excursions, non-increasing.
    pub excursions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionReport {
    pub paths: Vec<PathRecord>,
}

fn record(replica: usize, process: &str, path: &DiffusionPath, min_length: f64, top: usize) -> PathRecord {
    let mut excursions = diffusion_excursions(path, min_length).lengths;
    excursions.truncate(top);
    PathRecord {
        replica,
        process: process.to_string(),
        time_at_zero: path.time_at_zero(),
        sup: path.values.iter().copied().fold(0.0, f64::max),
        excursions,
    }
}

pub fn simulate_diffusion_cmd(flags: &SimulateDiffusionArgs, ctx: &Ctx) -> CliResult<()> {
    let mut a = resolve("simulate-diffusion", flags, ctx.file.as_ref())?;
    let lambda = *a.lambda.get_or_insert(0.0);
    let t_max = *a.t_max.get_or_insert(10.0);
    let dt = *a.dt.get_or_insert(1e-3);
    let replicas = *a.replicas.get_or_insert(1);
    let seed = *a.seed.get_or_insert(1);
    let process = *a.process.get_or_insert(Process::Z);
    let min_length = *a.min_length.get_or_insert(2.0 * dt);
    let top = *a.top.get_or_insert(10);
    if replicas == 0 {
        return config_err("simulate-diffusion needs --replicas >= 1");
    }
    let cfg = DriftEvalConfig { weight: (*a.weight.get_or_insert(AlphaWeightArg::Cubic)).into(), ..Default::default() };
    let field = match (process, a.direct) {
        (Process::B, _) | (_, true) => DriftField::new(None, cfg),
        (_, false) => DriftField::new(Some(AlphaTable::cached_default(ctx.cache_dir.as_deref(), &cfg)?), cfg),
    };
    let runs: Vec<(DiffusionPath, Option<DiffusionPath>)> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let mut rng = labelled_stream(seed, "simulate-diffusion", i as u64);
            Ok(match process {
                Process::Z => (simulate_z(&field, lambda, t_max, dt, &mut rng)?, None),
                Process::B => (simulate_b(lambda, t_max, dt, &mut rng)?, None),
                Process::Coupled => {
                    let (z, b) = coupled_zb(&field, lambda, t_max, dt, &mut rng)?;
                    (z, Some(b))
                }
            })
        })
        .collect::<critforest::Result<_>>()?;
    let first = if process == Process::B { "b" } else { "z" };
    let mut paths = Vec::new();
    for (i, (p, q)) in runs.iter().enumerate() {
        paths.push(record(i, first, p, min_length, top));
        if let Some(q) = q {
            paths.push(record(i, "b", q, min_length, top));
        }
    }
    let manifest = manifest("simulate-diffusion", &a, Some(seed));
    if let Some(path) = a.path_out.as_deref() {
        let mut w = sink(Some(path))?;
        runs[0].0.write_with_meta(&serde_json::to_string(&manifest)?, &mut w)?;
        w.flush()?;
    }
    write_json(a.out.as_deref(), &manifest, &DiffusionReport { paths })
}
