//! Exhaustive enumeration over all graphs on a handful of vertices. These
//! are the ground truth the closed forms are checked against.

use crate::error::{domain, Result};
use crate::graph::UnionFind;

/// Largest vertex count the enumerator accepts (`2^21` graphs).
pub const MAX_ENUM_VERTICES: usize = 7;

fn slots(n: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            out.push((a, b));
        }
    }
    out
}

/// Every forest on `0..n`, as sorted edge lists, with its edge count.
pub fn all_forests(n: usize) -> Result<Vec<Vec<(u32, u32)>>> {
    if n > MAX_ENUM_VERTICES {
        return domain(format!("enumeration limited to N <= {MAX_ENUM_VERTICES}"));
    }
    let sl = slots(n);
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << sl.len()) {
        let mut uf = UnionFind::new(n);
        let mut ok = true;
        let mut edges = Vec::with_capacity(mask.count_ones() as usize);
        for (i, &(a, b)) in sl.iter().enumerate() {
            if mask >> i & 1 == 1 {
                if !uf.union(a, b) {
                    ok = false;
                    break;
                }
                edges.push((a, b));
            }
        }
        if ok {
            out.push(edges);
        }
    }
    Ok(out)
}

/// Forests with exactly `m` edges.
pub fn forests_with_edges(n: usize, m: usize) -> Result<Vec<Vec<(u32, u32)>>> {
    Ok(all_forests(n)?.into_iter().filter(|f| f.len() == m).collect())
}

/// `f(n, m)` for every `m` by enumeration.
pub fn forest_counts(n: usize) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; n.max(1)];
    for f in all_forests(n)? {
        counts[f.len()] += 1;
    }
    Ok(counts)
}

fn weight(m: usize, total: usize, p: f64) -> f64 {
    p.powi(m as i32) * (1.0 - p).powi((total - m) as i32)
}

/// `P(G(n, p) acyclic)` by enumeration.
pub fn acyclic_prob(n: usize, p: f64) -> Result<f64> {
    let total = n * n.saturating_sub(1) / 2;
    Ok(all_forests(n)?.iter().map(|f| weight(f.len(), total, p)).sum())
}

fn components(n: usize, edges: &[(u32, u32)]) -> UnionFind {
    let mut uf = UnionFind::new(n);
    for &(a, b) in edges {
        uf.union(a, b);
    }
    uf
}

/// Whether vertices `0..r` lie in distinct trees, and if so the total size
/// of those trees.
pub fn stack_forest_size(n: usize, edges: &[(u32, u32)], r: usize) -> Option<usize> {
    let mut uf = components(n, edges);
    let mut roots: Vec<u32> = (0..r as u32).map(|v| uf.find(v)).collect();
    roots.sort_unstable();
    roots.dedup();
    if roots.len() < r {
        return None;
    }
    Some(roots.iter().map(|&x| uf.class_size(x)).sum())
}

/// `P(G(n, p) ∈ A_{n,r,k})` by enumeration.
pub fn stack_event_prob(n: usize, r: usize, k: usize, p: f64) -> Result<f64> {
    let total = n * n.saturating_sub(1) / 2;
    Ok(all_forests(n)?
        .iter()
        .filter(|f| stack_forest_size(n, f, r) == Some(k))
        .map(|f| weight(f.len(), total, p))
        .sum())
}

/// `P(G(n, p) acyclic with 0..r separated)` by enumeration.
pub fn separated_prob(n: usize, r: usize, p: f64) -> Result<f64> {
    let total = n * n.saturating_sub(1) / 2;
    Ok(all_forests(n)?
        .iter()
        .filter(|f| stack_forest_size(n, f, r).is_some())
        .map(|f| weight(f.len(), total, p))
        .sum())
}

/// `E[size of the tree holding vertex 0]` in `F(n, p)` by enumeration.
pub fn expected_root_tree_size(n: usize, p: f64) -> Result<f64> {
    let total = n * n.saturating_sub(1) / 2;
    let (mut num, mut den) = (0.0, 0.0);
    for f in all_forests(n)? {
        let w = weight(f.len(), total, p);
        let mut uf = components(n, &f);
        num += w * uf.class_size(0) as f64;
        den += w;
    }
    Ok(num / den)
}

/// Largest `P_p(A) - P_q(A)`, `p < q`, over a family of increasing events
/// `A` for forests on `n` vertices. A positive value is a counterexample to
/// `F(n, q)` dominating `F(n, p)`; a non-positive one proves nothing.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DominationReport {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub events_checked: usize,
    pub worst_event: String,
    pub worst_gap: f64,
}

pub fn domination_search(n: usize, p: f64, q: f64) -> Result<DominationReport> {
    if !(0.0 < p && p < q && q < 1.0) {
        return domain("domination search needs 0 < p < q < 1");
    }
    let forests = all_forests(n)?;
    let law = |x: f64| -> Vec<f64> {
        let w: Vec<f64> = forests.iter().map(|f| (x / (1.0 - x)).powi(f.len() as i32)).collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|v| v / z).collect()
    };
    let (lp, lq) = (law(p), law(q));
    let sizes: Vec<(usize, usize)> = forests
        .iter()
        .map(|f| {
            let mut uf = components(n, f);
            let largest = uf.class_sizes().first().copied().unwrap_or(0);
            (uf.class_size(0), largest)
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, String::new());
    let mut checked = 0;
    let mut consider = |name: String, member: &dyn Fn(usize) -> bool| {
        let gap: f64 = (0..forests.len()).filter(|&i| member(i)).map(|i| lp[i] - lq[i]).sum();
        checked += 1;
        if gap > best.0 {
            best = (gap, name);
        }
    };
    for h in forests.iter().filter(|h| !h.is_empty()) {
        consider(format!("contains {h:?}"), &|i| h.iter().all(|e| forests[i].contains(e)));
    }
    for k in 1..n {
        consider(format!("at least {k} edges"), &|i| forests[i].len() >= k);
    }
    for s in 2..=n {
        consider(format!("tree of vertex 0 has >= {s} vertices"), &|i| sizes[i].0 >= s);
        consider(format!("largest tree has >= {s} vertices"), &|i| sizes[i].1 >= s);
    }
    Ok(DominationReport { n, p, q, events_checked: checked, worst_event: best.1, worst_gap: best.0 })
}
