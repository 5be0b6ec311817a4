//! `compare`, `verify`.

use crate::config::{config_err, resolve, CliError, CliResult};
use crate::output::{manifest, write_json};
use crate::simulate::DiffusionReport;
use crate::Ctx;
use clap::{Args, ValueEnum};
use critforest::analysis::{component_spectrum, ks_distance, RankSummary, SizeSample};
use critforest::diffusion::{diffusion_excursions, DiffusionPath};
use critforest::forest_io;
use critforest::verify::{criteria_for, run_criterion, CriterionResult, Tier, VerifyOptions};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stat {
    /// Two-sample Kolmogorov–Smirnov distance of one rank.
    Ks,
    /// Per-rank mean comparison over the leading ranks.
    Spectrum,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareArgs {
    /// Forest file, diffusion path file, or `simulate-diffusion` JSON.
    #[arg(long)]
    pub left: Option<PathBuf>,
    #[arg(long)]
    pub right: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub stat: Option<Stat>,
    /// Rank compared by `ks` (1 = largest).
    #[arg(long)]
    pub rank: Option<usize>,
    /// Ranks compared by `spectrum`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Pass threshold: KS distance for `ks`, largest |z| for `spectrum`.
    #[arg(long)]
    pub gate: Option<f64>,
    /// Keep forest component sizes unscaled instead of dividing by N^{2/3}.
    #[arg(long)]
    #[serde(default)]
    pub raw: bool,
    /// Which process to read from a `simulate-diffusion` report.
    #[arg(long)]
    pub process: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Size sequences from any supported artifact, one per replica.
pub fn load_sizes(path: &Path, raw: bool, process: &str) -> CliResult<SizeSample> {
    let bytes = std::fs::read(path)?;
    let replicas: Vec<Vec<f64>> = if DiffusionPath::is_path_file(&bytes) {
        let p = DiffusionPath::read_from(&bytes[..])?;
        vec![diffusion_excursions(&p, 2.0 * p.dt).lengths]
    } else if bytes.first() == Some(&b'{') {
        let report: DiffusionReport = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Config(format!("{}: not a simulate-diffusion report: {e}", path.display())))?;
        report.paths.into_iter().filter(|r| r.process == process).map(|r| r.excursions).collect()
    } else {
        let forests = if forest_io::is_binary(&bytes) { forest_io::read_binary(&bytes[..])? } else { forest_io::read_text(&bytes[..])? };
        forests
            .iter()
            .map(|f| {
                let scale = if raw { 1.0 } else { (f.n_vertices() as f64).powf(2.0 / 3.0) };
                let mut sizes: Vec<f64> = f.component_sizes().into_iter().map(|s| s as f64 / scale).collect();
                sizes.sort_by(|a, b| b.total_cmp(a));
                sizes
            })
            .collect()
    };
    if replicas.is_empty() {
        return config_err(format!("{}: no samples", path.display()));
    }
    Ok(SizeSample::new(replicas)?)
}

#[derive(Serialize)]
struct Side {
    path: PathBuf,
    replicas: usize,
}

#[derive(Serialize)]
struct Verdict {
    stat: Stat,
    left: Side,
    right: Side,
    #[serde(skip_serializing_if = "Option::is_none")]
    rank: Option<usize>,
    statistic: f64,
    gate: f64,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<(Vec<RankSummary>, Vec<RankSummary>)>,
}

pub fn compare_cmd(flags: &CompareArgs, ctx: &Ctx) -> CliResult<()> {
    let mut a = resolve("compare", flags, ctx.file.as_ref())?;
    let (Some(left), Some(right)) = (a.left.clone(), a.right.clone()) else {
        return config_err("compare needs --left and --right");
    };
    let stat = *a.stat.get_or_insert(Stat::Ks);
    let process = a.process.get_or_insert_with(|| "z".to_string()).clone();
    let l = load_sizes(&left, a.raw, &process)?;
    let r = load_sizes(&right, a.raw, &process)?;
    let (rank, statistic, gate, spectrum) = match stat {
        Stat::Ks => {
            let rank = *a.rank.get_or_insert(1);
            if rank == 0 {
                return config_err("--rank starts at 1");
            }
            let gate = *a.gate.get_or_insert(0.05);
            (Some(rank), ks_distance(&l.rank_values(rank), &r.rank_values(rank))?, gate, None)
        }
        Stat::Spectrum => {
            let k = *a.k.get_or_insert(5);
            let gate = *a.gate.get_or_insert(3.0);
            let (sl, sr) = (component_spectrum(&l, k)?, component_spectrum(&r, k)?);
            let worst = sl
                .iter()
                .zip(&sr)
                .map(|(x, y)| {
                    let se = x.se.hypot(y.se);
                    if se > 0.0 { (x.mean - y.mean).abs() / se } else if x.mean == y.mean { 0.0 } else { f64::INFINITY }
                })
                .fold(0.0, f64::max);
            (None, worst, gate, Some((sl, sr)))
        }
    };
    let verdict = Verdict {
        stat,
        left: Side { path: left, replicas: l.replicas.len() },
        right: Side { path: right, replicas: r.replicas.len() },
        rank,
        statistic,
        gate,
        pass: statistic <= gate,
        spectrum,
    };
    write_json(a.out.as_deref(), &manifest("compare", &a, None), &verdict)?;
    if verdict.pass {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{statistic} exceeds gate {gate}")))
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub tier: Option<TierArg>,
    /// Comma-separated criterion ids to run within the tier.
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u8>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TierArg {
    Small,
    Medium,
    Large,
}

impl From<TierArg> for Tier {
    fn from(t: TierArg) -> Self {
        match t {
            TierArg::Small => Tier::Small,
            TierArg::Medium => Tier::Medium,
            TierArg::Large => Tier::Large,
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    tier: Tier,
    passed: bool,
    results: Vec<CriterionResult>,
}

pub fn verify_cmd(flags: &VerifyArgs, ctx: &Ctx) -> CliResult<()> {
    let mut a = resolve("verify", flags, ctx.file.as_ref())?;
    let tier: Tier = (*a.tier.get_or_insert(TierArg::Small)).into();
    let seed = *a.seed.get_or_insert(VerifyOptions::default().seed);
    let opts = VerifyOptions { seed, cache_dir: ctx.cache_dir.clone() };
    let mut ids = criteria_for(tier);
    if let Some(only) = &a.only {
        if let Some(bad) = only.iter().find(|id| !ids.contains(id)) {
            return config_err(format!("criterion {bad} is not in the {tier:?} tier"));
        }
        ids.retain(|id| only.contains(id));
    }
    let mut results = Vec::new();
    for id in ids {
        let r = run_criterion(id, &opts);
        eprintln!("{}", r.line());
        results.push(r);
    }
    let passed = results.iter().all(|r| r.passed);
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    write_json(a.out.as_deref(), &manifest("verify", &a, Some(seed)), &VerifyReport { tier, passed, results })?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("criteria {failed:?} failed")))
    }
}
