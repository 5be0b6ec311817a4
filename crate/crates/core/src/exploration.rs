//! Breadth-first exploration of a graph, its stack-size process, and the
//! exact Markov kernel of that process for `F(N, p)`.

use crate::analysis::Summary;
use crate::combinatorics::{AcyclicProfile, LogCountTable};
use crate::error::{domain, Error, Result};
use crate::graph::Graph;
use crate::logmath::LogFactorials;
use crate::rng::{child_stream, SimRng};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::RwLock;

/// Vertex order and stack sizes `Z_0..Z_N` of a breadth-first exploration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationTrace {
    pub n_vertices: usize,
    pub order: Vec<u32>,
    pub stack_sizes: Vec<u32>,
}

impl ExplorationTrace {
    pub fn new(n_vertices: usize, order: Vec<u32>, stack_sizes: Vec<u32>) -> Result<Self> {
        let t = Self { n_vertices, order, stack_sizes };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vertices;
        if self.order.len() != n {
            return Err(Error::Validation(format!("order has {} entries for N={n}", self.order.len())));
        }
        let mut seen = vec![false; n];
        for &v in &self.order {
            let v = v as usize;
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Validation("order is not a permutation".into()));
            }
        }
        validate_stack(&self.stack_sizes, n)?;
        if self.stack_sizes.len() != n + 1 || self.stack_sizes[n] != 0 {
            return Err(Error::Validation("stack sizes must run Z_0..Z_N and end at 0".into()));
        }
        Ok(())
    }
}

/// Checks a (possibly partial) stack-size path: starts at 0, never drops by
/// more than one, and respects `Z_n <= N - n`.
pub fn validate_stack(z: &[u32], n: usize) -> Result<()> {
    if z.first() != Some(&0) {
        return Err(Error::Validation("Z_0 must be 0".into()));
    }
    if z.len() > n + 1 {
        return Err(Error::Validation(format!("path longer than N+1 = {}", n + 1)));
    }
    for (i, w) in z.windows(2).enumerate() {
        if i64::from(w[1]) - i64::from(w[0]) < -1 {
            return Err(Error::Validation(format!("Z drops by more than one at step {}", i + 1)));
        }
    }
    for (i, &zi) in z.iter().enumerate() {
        if zi as usize > n - i {
            return Err(Error::Validation(format!("Z_{i} = {zi} exceeds N - {i}")));
        }
    }
    Ok(())
}

/// Breadth-first exploration: a new root is the smallest unseen label and
/// neighbours join the queue in increasing label order.
pub fn explore(graph: &Graph) -> ExplorationTrace {
    let n = graph.n_vertices;
    let adj = graph.adjacency();
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    let mut order = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n + 1);
    z.push(0);
    let mut next_root = 0usize;
    for _ in 0..n {
        let v = match queue.pop_front() {
            Some(v) => v,
            None => {
                while seen[next_root] {
                    next_root += 1;
                }
                seen[next_root] = true;
                next_root as u32
            }
        };
        for &w in &adj[v as usize] {
            if !seen[w as usize] {
                seen[w as usize] = true;
                queue.push_back(w);
            }
        }
        order.push(v);
        z.push(queue.len() as u32);
    }
    ExplorationTrace { n_vertices: n, order, stack_sizes: z }
}

pub fn excursion_lengths(trace: &ExplorationTrace) -> Result<Vec<usize>> {
    trace.validate()?;
    Ok(completed_excursions(&trace.stack_sizes))
}

/// Gaps between consecutive zeros of `z`, non-increasing. An unfinished
/// excursion at the end of a prefix is dropped.
pub fn completed_excursions(z: &[u32]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut last = 0;
    for (i, &v) in z.iter().enumerate().skip(1) {
        if v == 0 {
            out.push(i - last);
            last = i;
        }
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Law of the next step from stack size `r`: `probs[ℓ]` is the probability
/// that the processed vertex has `ℓ` unseen neighbours, so the increment is
/// `ℓ - 1` for `r >= 1` and `ℓ` from `r = 0` (a fresh root is processed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementDistribution {
    pub r: usize,
    pub probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl IncrementDistribution {
    fn from_log_weights(r: usize, logs: &[f64]) -> Self {
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut probs: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { r, probs, cdf }
    }

    /// Increment attached to `probs[0]`.
    pub fn offset(&self) -> i64 {
        if self.r == 0 {
            0
        } else {
            -1
        }
    }

    /// `(increment, probability)` pairs.
    pub fn support(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let o = self.offset();
        self.probs.iter().enumerate().map(move |(l, &p)| (l as i64 + o, p))
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(d, p)| d as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.support().map(|(d, p)| (d * d) as f64 * p).sum()
    }

    /// Next stack size after drawing from this row.
    pub fn sample_next<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let l = self.cdf.partition_point(|&c| c <= u).min(self.probs.len() - 1);
        (self.r.max(1) + l - 1) as u32
    }
}

/// Binomial masses below this fraction of the row maximum are dropped.
pub const KERNEL_TRUNCATION: f64 = 1e-16;

/// Kernel rows for one `(N, p)`, with separation probabilities cached by
/// `(N', j)`.
pub struct KernelChain {
    n: usize,
    p: f64,
    profile: AcyclicProfile,
    lf: LogFactorials,
    separated: RwLock<HashMap<(u32, u32), f64>>,
}

impl KernelChain {
    /// Uses the truncated one-dimensional acyclicity recursion; fine for `N` up to ~10⁶.
    pub fn new(n: usize, p: f64) -> Result<Self> {
        check_n(n)?;
        Ok(Self::with_profile(n, p, AcyclicProfile::build(n - 1, p)?))
    }

    /// Exact separation probabilities from a count table covering `N - 1`.
    pub fn from_table(table: &LogCountTable, n: usize, p: f64) -> Result<Self> {
        check_n(n)?;
        if table.max_vertices() < n - 1 {
            return Err(Error::Capacity { capacity: table.max_vertices(), requested: n - 1 });
        }
        Ok(Self::with_profile(n, p, AcyclicProfile::from_table(table, p)?))
    }

    fn with_profile(n: usize, p: f64, profile: AcyclicProfile) -> Self {
        Self { n, p, profile, lf: LogFactorials::new(n), separated: RwLock::new(HashMap::new()) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn ln_separated(&self, n_rem: usize, j: usize) -> f64 {
        if j <= 1 {
            return 0.0;
        }
        let key = (n_rem as u32, j as u32);
        if let Some(&v) = self.separated.read().unwrap().get(&key) {
            return v;
        }
        let v = self.profile.ln_separated(n_rem, j);
        self.separated.write().unwrap().insert(key, v);
        v
    }

    /// Row `(n, r)`: `P(ℓ) ∝ Bin(N-n-r', p; ℓ) · P([r'+ℓ-1] separated in F(N-n-1, p))`
    /// with `r' = max(r, 1)`.
    pub fn row(&self, step: usize, r: usize) -> Result<IncrementDistribution> {
        let n = self.n;
        if step >= n {
            return domain(format!("step {step} must be below N={n}"));
        }
        if r > n - step {
            return domain(format!("stack size {r} exceeds N - n = {}", n - step));
        }
        let r1 = r.max(1);
        let trials = n - step - r1;
        let n_rem = n - step - 1;
        let (lp, lq) = (self.p.ln(), (-self.p).ln_1p());
        let mode = ((trials + 1) as f64 * self.p).floor() as usize;
        let cut = KERNEL_TRUNCATION.ln();
        let ln_bin = |l: usize| self.lf.ln_binom(trials, l) + l as f64 * lp + (trials - l) as f64 * lq;
        let top = ln_bin(mode.min(trials));
        let mut logs = Vec::new();
        for l in 0..=trials {
            let b = ln_bin(l);
            if l > mode && b - top < cut {
                break;
            }
            logs.push(b + self.ln_separated(n_rem, r1 + l - 1));
        }
        Ok(IncrementDistribution::from_log_weights(r, &logs))
    }

    /// One chain path `Z_0..Z_horizon`.
    pub fn simulate<R: Rng + ?Sized>(&self, horizon: usize, rng: &mut R) -> Result<Vec<u32>> {
        if horizon > self.n {
            return domain(format!("horizon {horizon} exceeds N={}", self.n));
        }
        let mut z = Vec::with_capacity(horizon + 1);
        z.push(0u32);
        for step in 0..horizon {
            let r = *z.last().unwrap() as usize;
            z.push(self.row(step, r)?.sample_next(rng));
        }
        Ok(z)
    }

    /// `replicas` paths advanced in lockstep, replica `i` on child stream
    /// `i` of `seed`. Equal in law, path by path, to [`KernelChain::simulate`]
    /// on the same stream.
    pub fn simulate_ensemble(&self, horizon: usize, replicas: usize, seed: u64) -> Result<Vec<Vec<u32>>> {
        if horizon > self.n {
            return domain(format!("horizon {horizon} exceeds N={}", self.n));
        }
        let mut rngs: Vec<SimRng> = (0..replicas as u64).map(|i| child_stream(seed, i)).collect();
        let mut paths: Vec<Vec<u32>> = (0..replicas).map(|_| vec![0u32]).collect();
        for step in 0..horizon {
            let mut states: Vec<usize> = paths.iter().map(|z| *z.last().unwrap() as usize).collect();
            states.sort_unstable();
            states.dedup();
            let rows: Vec<IncrementDistribution> =
                states.par_iter().map(|&r| self.row(step, r)).collect::<Result<_>>()?;
            let lookup: HashMap<usize, &IncrementDistribution> = states.iter().copied().zip(rows.iter()).collect();
            for (z, rng) in paths.iter_mut().zip(rngs.iter_mut()) {
                let r = *z.last().unwrap() as usize;
                z.push(lookup[&r].sample_next(rng));
            }
            self.evict_below(self.n - step - 1);
        }
        Ok(paths)
    }

    // lockstep runs never revisit larger N'
    fn evict_below(&self, n_rem: usize) {
        self.separated.write().unwrap().retain(|&(m, _), _| m as usize >= n_rem.saturating_sub(1));
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 1 {
        return domain("kernel chain needs N >= 1");
    }
    Ok(())
}

/// Row `(n, r)` of the exact kernel using a count table.
pub fn transition_kernel(table: &LogCountTable, n: usize, p: f64, step: usize, r: usize) -> Result<IncrementDistribution> {
    KernelChain::from_table(table, n, p)?.row(step, r)
}

/// Stack-size prefix `Z_0..Z_horizon` of the kernel chain.
pub fn simulate_kernel_chain<R: Rng + ?Sized>(
    table: &LogCountTable,
    n: usize,
    p: f64,
    horizon: usize,
    rng: &mut R,
) -> Result<Vec<u32>> {
    KernelChain::from_table(table, n, p)?.simulate(horizon, rng)
}

/// `s ↦ N^{-1/3} Z_{⌊N^{2/3} s⌋}`, right-continuous and constant on each cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledPath {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl RescaledPath {
    pub fn horizon(&self) -> f64 {
        self.dt * (self.values.len().saturating_sub(1)) as f64
    }

    pub fn at(&self, s: f64) -> f64 {
        let i = (s / self.dt + 1e-9).floor().max(0.0) as usize;
        self.values[i.min(self.values.len() - 1)]
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

pub fn rescale_trace(prefix: &[u32], n: usize) -> RescaledPath {
    let nf = n as f64;
    let xs = nf.powf(-1.0 / 3.0);
    RescaledPath { dt: nf.powf(-2.0 / 3.0), values: prefix.iter().map(|&z| z as f64 * xs).collect() }
}

/// Binning for [`empirical_increment_stats`], in rescaled time `t = n/N^{2/3}`
/// and height `b = Z_n/N^{1/3}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsBins {
    pub t_width: f64,
    pub t_max: f64,
    pub b_width: f64,
    pub b_max: f64,
    /// Jump threshold `δ`: steps with `|ΔZ| > δ N^{1/3}` count as jumps.
    pub delta: f64,
}

impl Default for StatsBins {
    fn default() -> Self {
        Self { t_width: 0.25, t_max: 2.0, b_width: 0.25, b_max: 3.0, delta: 0.5 }
    }
}

/// Increment statistics for one `(t, b)` cell, over steps with `Z_n >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementBin {
    pub t_lo: f64,
    pub b_lo: f64,
    pub count: usize,
    /// `N^{1/3} ΔZ`.
    pub drift: Summary,
    /// `(ΔZ)²`.
    pub second_moment: Summary,
    pub jumps: usize,
    /// Mean of the caller's prediction at each sample's own `(t, b)`.
    pub predicted_drift: Option<f64>,
}

/// `Z_{n+1}²` after `Z_n = 0`, per time cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StickinessBin {
    pub t_lo: f64,
    pub count: usize,
    pub next_square: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementStats {
    pub bins: Vec<IncrementBin>,
    pub stickiness: Vec<StickinessBin>,
}

#[derive(Default)]
struct Moments {
    n: usize,
    s: f64,
    s2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.s += x;
        self.s2 += x * x;
    }

    fn summary(&self) -> Summary {
        let n = self.n as f64;
        if self.n == 0 {
            return Summary { mean: f64::NAN, se: f64::NAN, n: 0 };
        }
        let mean = self.s / n;
        let var = if self.n > 1 { ((self.s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { f64::NAN };
        Summary { mean, se: (var / n).sqrt(), n: self.n }
    }
}

/// Bins every step of every prefix. Empty cells are omitted. `predict(t, b)`
/// is averaged over the samples of each cell when given.
pub fn empirical_increment_stats(
    prefixes: &[Vec<u32>],
    n: usize,
    bins: &StatsBins,
    predict: Option<&(dyn Fn(f64, f64) -> f64 + Sync)>,
) -> Result<IncrementStats> {
    if prefixes.is_empty() {
        return domain("increment statistics need a non-empty ensemble");
    }
    if !(bins.t_width > 0.0 && bins.b_width > 0.0 && bins.t_max > 0.0 && bins.b_max > 0.0) {
        return domain("bin widths and ranges must be positive");
    }
    let nf = n as f64;
    let (ts, xs) = (nf.powf(2.0 / 3.0), nf.powf(1.0 / 3.0));
    let nt = (bins.t_max / bins.t_width).ceil() as usize;
    let nb = (bins.b_max / bins.b_width).ceil() as usize;
    let mut drift: Vec<Moments> = (0..nt * nb).map(|_| Moments::default()).collect();
    let mut square: Vec<Moments> = (0..nt * nb).map(|_| Moments::default()).collect();
    let mut pred: Vec<f64> = vec![0.0; nt * nb];
    let mut jumps = vec![0usize; nt * nb];
    let mut sticky: Vec<Moments> = (0..nt).map(|_| Moments::default()).collect();
    for z in prefixes {
        for (step, w) in z.windows(2).enumerate() {
            let t = step as f64 / ts;
            let ti = (t / bins.t_width) as usize;
            if ti >= nt {
                break;
            }
            let (r, next) = (w[0] as f64, w[1] as f64);
            if w[0] == 0 {
                sticky[ti].push(next * next);
                continue;
            }
            let b = r / xs;
            let bi = (b / bins.b_width) as usize;
            if bi >= nb {
                continue;
            }
            let c = ti * nb + bi;
            let d = next - r;
            drift[c].push(d * xs);
            square[c].push(d * d);
            if d.abs() > bins.delta * xs {
                jumps[c] += 1;
            }
            if let Some(f) = predict {
                pred[c] += f(t, b);
            }
        }
    }
    let mut out = Vec::new();
    for ti in 0..nt {
        for bi in 0..nb {
            let c = ti * nb + bi;
            if drift[c].n == 0 {
                continue;
            }
            out.push(IncrementBin {
                t_lo: ti as f64 * bins.t_width,
                b_lo: bi as f64 * bins.b_width,
                count: drift[c].n,
                drift: drift[c].summary(),
                second_moment: square[c].summary(),
                jumps: jumps[c],
                predicted_drift: predict.map(|_| pred[c] / drift[c].n as f64),
            });
        }
    }
    let stickiness = sticky
        .iter()
        .enumerate()
        .filter(|(_, m)| m.n > 0)
        .map(|(ti, m)| StickinessBin { t_lo: ti as f64 * bins.t_width, count: m.n, next_square: m.summary() })
        .collect();
    Ok(IncrementStats { bins: out, stickiness })
}
