//! Samplers for uniform trees, uniform forests `F(N,m)` and `F(N,p)`,
//! Erdős–Rényi graphs, and the almost-monotone coupling of forests.

use crate::combinatorics::{LogCountTable, ScalingParams};
use crate::error::{domain, Error, Result};
use crate::graph::{square_sum, Forest, Graph, UnionFind};
use rand::Rng;
use std::collections::HashSet;

/// How to draw a uniform forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Invert the counting recursion; needs a [`LogCountTable`] covering `N`.
    Exact,
    /// Condition an Erdős–Rényi draw on acyclicity.
    Rejection { max_attempts: u64 },
}

impl Strategy {
    pub const DEFAULT_ATTEMPTS: u64 = 1_000_000;

    /// Exact when the table covers `n`, rejection otherwise.
    pub fn auto(table: Option<&LogCountTable>, n: usize) -> Self {
        match table {
            Some(t) if t.max_vertices() >= n => Strategy::Exact,
            _ => Strategy::Rejection { max_attempts: Self::DEFAULT_ATTEMPTS },
        }
    }
}

/// Uniform labelled tree on `0..k` via a random Prüfer sequence.
pub fn sample_uniform_tree<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<Forest> {
    if k == 0 {
        return domain("uniform tree needs K >= 1");
    }
    let seq: Vec<u32> = (0..k.saturating_sub(2)).map(|_| rng.random_range(0..k as u32)).collect();
    Ok(Forest::from_trusted(Graph { n_vertices: k, edges: prufer_decode(k, &seq) }))
}

/// Edges of the tree on `0..k` encoded by `seq` (length `k - 2`).
pub fn prufer_decode(k: usize, seq: &[u32]) -> Vec<(u32, u32)> {
    if k == 1 {
        return Vec::new();
    }
    if k == 2 {
        return vec![(0, 1)];
    }
    let mut degree = vec![1u32; k];
    for &v in seq {
        degree[v as usize] += 1;
    }
    let mut edges = Vec::with_capacity(k - 1);
    let mut ptr = degree.iter().position(|&d| d == 1).unwrap();
    let mut leaf = ptr;
    for &v in seq {
        let v = v as usize;
        edges.push(ordered(leaf as u32, v as u32));
        degree[v] -= 1;
        if degree[v] == 1 && v < ptr {
            leaf = v;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push(ordered(leaf as u32, (k - 1) as u32));
    edges
}

#[inline]
fn ordered(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[inline]
fn edge_key(a: u32, b: u32) -> u64 {
    let (a, b) = ordered(a, b);
    ((a as u64) << 32) | b as u64
}

/// Uniform forest with `m` edges on `n` vertices.
pub fn sample_forest_nm<R: Rng + ?Sized>(
    table: Option<&LogCountTable>,
    n: usize,
    m: usize,
    rng: &mut R,
    strategy: Strategy,
) -> Result<Forest> {
    if m > n.saturating_sub(1) {
        return domain(format!("forest on N={n} vertices cannot have m={m} edges"));
    }
    match strategy {
        Strategy::Exact => {
            let table = table.ok_or_else(|| Error::Domain("exact strategy needs a count table".into()))?;
            sample_forest_nm_exact(table, n, m, rng)
        }
        Strategy::Rejection { max_attempts } => sample_forest_nm_rejection(n, m, rng, max_attempts),
    }
}

fn sample_forest_nm_exact<R: Rng + ?Sized>(table: &LogCountTable, n: usize, m: usize, rng: &mut R) -> Result<Forest> {
    if table.max_vertices() < n {
        return Err(Error::Capacity { capacity: table.max_vertices(), requested: n });
    }
    let lf = table.log_factorials();
    let mut remaining: Vec<u32> = (0..n as u32).collect();
    let mut m_left = m;
    let mut edges = Vec::with_capacity(m);
    let mut weights = Vec::new();
    while !remaining.is_empty() {
        let size = remaining.len();
        let total = table.get_unchecked(size, m_left);
        weights.clear();
        for k in 1..=(m_left + 1).min(size) {
            let (rest_n, rest_m) = (size - k, m_left + 1 - k);
            if rest_m > rest_n.saturating_sub(1) {
                weights.push(0.0);
                continue;
            }
            let lw = lf.ln_binom(size - 1, k - 1)
                + (k as f64 - 2.0) * (k as f64).ln()
                + table.get_unchecked(rest_n, rest_m)
                - total;
            weights.push(lw.exp());
        }
        let k = 1 + pick(&weights, rng);
        // the tree holding remaining[0] takes k - 1 further labels uniformly
        let root = remaining.swap_remove(0);
        let mut labels = Vec::with_capacity(k);
        labels.push(root);
        for i in 0..k - 1 {
            let j = rng.random_range(i..remaining.len());
            remaining.swap(i, j);
            labels.push(remaining[i]);
        }
        remaining.drain(..k - 1);
        remaining.sort_unstable();
        let tree = sample_uniform_tree(k, rng)?;
        edges.extend(tree.edges().iter().map(|&(a, b)| ordered(labels[a as usize], labels[b as usize])));
        m_left -= k - 1;
    }
    Ok(Forest::from_trusted(Graph { n_vertices: n, edges }))
}

/// Index drawn proportionally to non-negative `weights`.
fn pick<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Draw `m` distinct uniform edges; reject on the first cycle.
fn sample_forest_nm_rejection<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R, max_attempts: u64) -> Result<Forest> {
    let mut seen = HashSet::with_capacity(2 * m);
    'attempt: for _ in 0..max_attempts {
        seen.clear();
        let mut uf = UnionFind::new(n);
        let mut edges = Vec::with_capacity(m);
        while edges.len() < m {
            let a = rng.random_range(0..n as u32);
            let b = rng.random_range(0..n as u32);
            if a == b || seen.contains(&edge_key(a, b)) {
                continue;
            }
            seen.insert(edge_key(a, b));
            if !uf.union(a, b) {
                continue 'attempt;
            }
            edges.push(ordered(a, b));
        }
        return Ok(Forest::from_trusted(Graph { n_vertices: n, edges }));
    }
    Err(Error::Budget { attempts: max_attempts, context: format!("F({n},{m}) rejection") })
}

/// `F(N, p)` together with the rejection bookkeeping.
#[derive(Debug, Clone)]
pub struct Embedded {
    pub forest: Forest,
    /// The accepted `G(N, p)` draw; equal to `forest` edge for edge.
    pub ambient: Graph,
    pub attempts: u64,
}

/// Uniform-weighted forest `F(N, p)`: `G(N, p)` conditioned on acyclicity.
pub fn sample_forest_np<R: Rng + ?Sized>(
    table: Option<&LogCountTable>,
    n: usize,
    p: f64,
    rng: &mut R,
    strategy: Strategy,
) -> Result<Forest> {
    ScalingParams::new(n, p)?;
    match strategy {
        Strategy::Exact => {
            let table = table.ok_or_else(|| Error::Domain("exact strategy needs a count table".into()))?;
            if table.max_vertices() < n {
                return Err(Error::Capacity { capacity: table.max_vertices(), requested: n });
            }
            let ln_x = p.ln() - (-p).ln_1p();
            let logs: Vec<f64> = (0..n.max(1)).map(|m| table.get_unchecked(n, m) + m as f64 * ln_x).collect();
            let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
            let m = if n == 0 { 0 } else { pick(&w, rng) };
            sample_forest_nm_exact(table, n, m, rng)
        }
        Strategy::Rejection { max_attempts } => Ok(sample_forest_np_embedded(n, p, rng, max_attempts)?.forest),
    }
}

/// Rejection sampling of `F(N, p)` that also reports the ambient graph and attempt count.
pub fn sample_forest_np_embedded<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R, max_attempts: u64) -> Result<Embedded> {
    ScalingParams::new(n, p)?;
    for attempt in 1..=max_attempts {
        if let Some(edges) = gnp_edges(n, p, rng, true) {
            let forest = Forest::from_trusted(Graph { n_vertices: n, edges });
            let ambient = forest.graph().clone();
            return Ok(Embedded { forest, ambient, attempts: attempt });
        }
    }
    Err(Error::Budget { attempts: max_attempts, context: format!("F({n},{p}) rejection") })
}

/// Batagelj–Brandes geometric skipping over edge slots. With `abort_on_cycle`
/// returns `None` as soon as an edge closes a cycle.
fn gnp_edges<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R, abort_on_cycle: bool) -> Option<Vec<(u32, u32)>> {
    let mut edges = Vec::new();
    if n < 2 || p <= 0.0 {
        return Some(edges);
    }
    if p >= 1.0 {
        for v in 1..n as u32 {
            for w in 0..v {
                edges.push((w, v));
            }
        }
        return if abort_on_cycle && n > 2 { None } else { Some(edges) };
    }
    let mut uf = if abort_on_cycle { Some(UnionFind::new(n)) } else { None };
    let lq = (-p).ln_1p();
    let (mut v, mut w) = (1usize, -1i64);
    loop {
        let r: f64 = rng.random();
        w += 1 + ((-r).ln_1p() / lq).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v >= n {
            break;
        }
        if let Some(uf) = uf.as_mut() {
            if !uf.union(w as u32, v as u32) {
                return None;
            }
        }
        edges.push((w as u32, v as u32));
    }
    Some(edges)
}

pub fn sample_gnp<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("edge probability {p} outside [0, 1]"));
    }
    Ok(Graph { n_vertices: n, edges: gnp_edges(n, p, rng, false).unwrap() })
}

/// `G(N, p_i)` for several `p_i` from one uniform per edge slot, so the
/// graphs are nested whenever the `p_i` are ordered.
pub fn sample_gnp_coupled<R: Rng + ?Sized>(n: usize, ps: &[f64], rng: &mut R) -> Result<Vec<Graph>> {
    if ps.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return domain("edge probabilities must lie in [0, 1]");
    }
    let mut out: Vec<Graph> = ps.iter().map(|_| Graph::empty(n)).collect();
    for v in 1..n as u32 {
        for w in 0..v {
            let u: f64 = rng.random();
            for (g, &p) in out.iter_mut().zip(ps) {
                if u < p {
                    g.edges.push((w, v));
                }
            }
        }
    }
    Ok(out)
}

/// Slot `s` of the lexicographic enumeration `(w, v)`, `w < v`, `s = v(v-1)/2 + w`.
fn slot_to_pair(s: u64) -> (u32, u32) {
    let mut v = ((1.0 + (1.0 + 8.0 * s as f64).sqrt()) / 2.0).floor() as u64;
    while v * (v - 1) / 2 > s {
        v -= 1;
    }
    while (v + 1) * v / 2 <= s {
        v += 1;
    }
    ((s - v * (v - 1) / 2) as u32, v as u32)
}

/// `G(N, m)` by Floyd's subset sampling over the `C(N, 2)` edge slots.
pub fn sample_gnm<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Graph> {
    let slots = (n as u64) * (n as u64).saturating_sub(1) / 2;
    if m as u64 > slots {
        return domain(format!("G({n}, m) needs m <= {slots}, got {m}"));
    }
    let mut chosen = HashSet::with_capacity(m);
    for j in (slots - m as u64)..slots {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut edges: Vec<(u32, u32)> = chosen.into_iter().map(slot_to_pair).collect();
    edges.sort_unstable();
    Ok(Graph { n_vertices: n, edges })
}

/// Upper bound `q / (1 - q)`, `q = 2 k S² / N²`, on the probability that `k`
/// uniform ordered pairs added to a forest with square sum `S²` create a cycle.
pub fn sequential_cycle_bound(s2: f64, k: u64, n: usize) -> Result<f64> {
    let q = 2.0 * k as f64 * s2 / (n as f64 * n as f64);
    if q >= 1.0 {
        return Err(Error::BoundUndefined { ratio: q });
    }
    Ok(q / (1.0 - q))
}

/// Result of growing a forest by uniform ordered pairs.
#[derive(Debug, Clone)]
pub struct Growth {
    /// Original edges followed by every pair added before the first cycle.
    pub edges: Vec<(u32, u32)>,
    /// 1-based index of the pair that closed a cycle, if any.
    pub cycle_at: Option<usize>,
}

/// Add `k` independent uniform ordered pairs from `[N] × [N]` to `forest`,
/// stopping at the first one that closes a cycle. Self-loops and repeated
/// edges count as cycles.
pub fn add_uniform_edges<R: Rng + ?Sized>(forest: &Forest, k: usize, rng: &mut R) -> Growth {
    let n = forest.n_vertices() as u32;
    let mut uf = UnionFind::new(n as usize);
    for &(a, b) in forest.edges() {
        uf.union(a, b);
    }
    let mut edges = forest.edges().to_vec();
    for j in 1..=k {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        // union fails for loops and for any already-joined pair, repeats included
        if !uf.union(a, b) {
            return Growth { edges, cycle_at: Some(j) };
        }
        edges.push(ordered(a, b));
    }
    Growth { edges, cycle_at: None }
}

/// `F⁻ ~ F(N, p⁻)`, `F ~ F(N, m)`, `F⁺ ~ F(N, p⁺)`, coupled so that
/// `F⁻ ⊆ F ⊆ F⁺` holds with high probability.
#[derive(Debug, Clone)]
pub struct CoupledTriple {
    pub lower: Forest,
    pub middle: Forest,
    pub upper: Forest,
    /// True iff the sequential construction ran without a cycle, so the
    /// three forests are nested.
    pub monotone: bool,
    pub m_lower: usize,
    pub m_upper: usize,
}

/// Edge-count targets `(⌊m - N^{3/5}⌋, ⌈m + N^{3/5}⌉)` clamped to `[0, N-1]`.
pub fn coupling_targets(n: usize, m: usize) -> (usize, usize) {
    let w = (n as f64).powf(0.6);
    let lo = (m as f64 - w).floor().max(0.0) as usize;
    let hi = ((m as f64 + w).ceil() as usize).min(n.saturating_sub(1));
    (lo, hi)
}

/// The almost-monotone coupling built by adding uniform edges one at a
/// time. A cycle at step `j` replaces every later level by an independent
/// uniform forest of the right size, which keeps all three marginals exact.
/// `p⁻ = 0` (tiny `N`) gives the empty forest for `F⁻`.
pub fn almost_monotone_triple<R: Rng + ?Sized>(
    table: Option<&LogCountTable>,
    n: usize,
    m: usize,
    rng: &mut R,
    max_attempts: u64,
) -> Result<CoupledTriple> {
    if n < 2 || m > n - 1 {
        return domain(format!("coupling needs N >= 2 and m <= N-1, got N={n} m={m}"));
    }
    let (lo, hi) = coupling_targets(n, m);
    let nn = (n * n) as f64;
    let lower = if lo == 0 {
        Forest::empty(n)
    } else {
        sample_forest_np_embedded(n, 2.0 * lo as f64 / nn, rng, max_attempts)?.forest
    };
    let p_hi = 2.0 * hi as f64 / nn;
    let m_upper = if p_hi >= 1.0 {
        return domain("upper coupling probability reaches 1");
    } else {
        sample_forest_np_embedded(n, p_hi, rng, max_attempts)?.forest.edge_count()
    };
    let m_lower = lower.edge_count();
    let strategy = Strategy::auto(table, n);
    let fresh = |size: usize, rng: &mut R| sample_forest_nm(table, n, size, rng, strategy);
    if !(m_lower < m && m < m_upper) {
        let middle = fresh(m, rng)?;
        let upper = fresh(m_upper, rng)?;
        return Ok(CoupledTriple { lower, middle, upper, monotone: false, m_lower, m_upper });
    }
    let growth = add_uniform_edges(&lower, m_upper - m_lower, rng);
    let forest_of = |edges: &[(u32, u32)]| Forest::from_trusted(Graph { n_vertices: n, edges: edges.to_vec() });
    let reached = growth.edges.len();
    let middle = if reached >= m { forest_of(&growth.edges[..m]) } else { fresh(m, rng)? };
    let monotone = growth.cycle_at.is_none();
    let upper = if monotone { forest_of(&growth.edges) } else { fresh(m_upper, rng)? };
    Ok(CoupledTriple { lower, middle, upper, monotone, m_lower, m_upper })
}

/// `S²` of a forest.
pub fn forest_square_sum(f: &Forest) -> f64 {
    square_sum(&f.component_sizes())
}

/// Acceptance probability proxy `P(G(N,p) acyclic)` by plain Monte Carlo.
pub fn rejection_acceptance_rate<R: Rng + ?Sized>(n: usize, p: f64, draws: usize, rng: &mut R) -> f64 {
    let ok = (0..draws).filter(|_| gnp_edges(n, p, rng, true).is_some()).count();
    ok as f64 / draws as f64
}
