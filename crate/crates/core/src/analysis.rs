//! Comparators used by the acceptance harness: KS distances with
//! permutation critical values, chi-square tests, weak majorisation, and
//! per-rank summaries of component-size ensembles.

use crate::error::{domain, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sup-distance between the empirical CDFs of `a` and `b`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return domain("KS distance needs two non-empty samples");
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    Ok(ks_sorted(&x, &y))
}

fn ks_sorted(x: &[f64], y: &[f64]) -> f64 {
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// `level`-quantile of the KS distance under random relabelling of the pooled sample.
pub fn ks_permutation_critical<R: Rng + ?Sized>(a: &[f64], b: &[f64], level: f64, reps: usize, rng: &mut R) -> Result<f64> {
    if a.is_empty() || b.is_empty() || reps == 0 {
        return domain("permutation KS needs non-empty samples and reps > 0");
    }
    let mut pool: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut stats: Vec<f64> = (0..reps)
        .map(|_| {
            pool.shuffle(rng);
            let (l, r) = pool.split_at(a.len());
            let mut l = l.to_vec();
            let mut r = r.to_vec();
            l.sort_by(f64::total_cmp);
            r.sort_by(f64::total_cmp);
            ks_sorted(&l, &r)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let idx = ((level * reps as f64).ceil() as usize).clamp(1, reps) - 1;
    Ok(stats[idx])
}

/// Whether the non-increasing rearrangement of `a` has every prefix sum at
/// least that of `b`; the shorter sequence is padded with zeros.
pub fn weak_majorises(a: &[f64], b: &[f64]) -> bool {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(|p, q| q.total_cmp(p));
    y.sort_by(|p, q| q.total_cmp(p));
    let n = x.len().max(y.len());
    x.resize(n, 0.0);
    y.resize(n, 0.0);
    let (mut sx, mut sy) = (0.0, 0.0);
    for (p, q) in x.iter().zip(&y) {
        sx += p;
        sy += q;
        // tolerate rounding in long float sums
        if sx < sy - 1e-12 * sy.abs().max(1.0) {
            return false;
        }
    }
    true
}

/// `Σ_{i>k} sizes_i²` for a non-increasing sequence.
pub fn l2_tail(sizes: &[f64], k: usize) -> f64 {
    sizes.iter().skip(k).map(|s| s * s).sum()
}

/// Mean with standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, se: f64::NAN, n };
        }
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        Self { mean, se: (var / n as f64).sqrt(), n }
    }
}

/// Per-rank statistics across replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub rank: usize,
    pub mean: f64,
    pub se: f64,
    pub median: f64,
    /// 10%, 20%, ..., 90% quantiles.
    pub deciles: Vec<f64>,
}

/// Ensemble of non-increasing size sequences (implicitly zero-padded).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SizeSample {
    pub replicas: Vec<Vec<f64>>,
}

impl SizeSample {
    pub fn new(mut replicas: Vec<Vec<f64>>) -> Result<Self> {
        for r in &mut replicas {
            if r.iter().any(|&x| x < 0.0 || !x.is_finite()) {
                return domain("sizes must be finite and non-negative");
            }
            r.sort_by(|a, b| b.total_cmp(a));
        }
        Ok(Self { replicas })
    }

    /// Values at 1-based `rank` across replicas, zero where absent.
    pub fn rank_values(&self, rank: usize) -> Vec<f64> {
        self.replicas.iter().map(|r| r.get(rank - 1).copied().unwrap_or(0.0)).collect()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - f) + sorted[i + 1] * f
    } else {
        sorted[i]
    }
}

pub fn component_spectrum(ensemble: &SizeSample, k: usize) -> Result<Vec<RankSummary>> {
    if k == 0 {
        return domain("spectrum needs k >= 1");
    }
    if ensemble.replicas.is_empty() {
        return domain("spectrum needs at least one replica");
    }
    Ok((1..=k)
        .map(|rank| {
            let mut v = ensemble.rank_values(rank);
            let s = Summary::of(&v);
            v.sort_by(f64::total_cmp);
            RankSummary {
                rank,
                mean: s.mean,
                se: s.se,
                median: quantile(&v, 0.5),
                deciles: (1..10).map(|d| quantile(&v, d as f64 / 10.0)).collect(),
            }
        })
        .collect())
}

/// Outcome of a chi-square test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

fn chi_p(stat: f64, dof: f64) -> f64 {
    if dof <= 0.0 {
        return 1.0;
    }
    1.0 - ChiSquared::new(dof).expect("positive dof").cdf(stat)
}

/// Goodness of fit of `counts` against cell probabilities `probs`.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if counts.len() != probs.len() || counts.is_empty() {
        return domain("chi-square needs matching non-empty cells");
    }
    let n: u64 = counts.iter().sum();
    let total_p: f64 = probs.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0;
    for (&c, &p) in counts.iter().zip(probs) {
        let e = n as f64 * p / total_p;
        if e > 0.0 {
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        } else if c > 0 {
            return Ok(ChiSquare { statistic: f64::INFINITY, dof: cells as f64, p_value: 0.0 });
        }
    }
    let dof = cells as f64 - 1.0;
    Ok(ChiSquare { statistic: stat, dof, p_value: chi_p(stat, dof) })
}

/// Homogeneity of two count vectors over the same cells.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() || a.is_empty() {
        return domain("two-sample chi-square needs matching non-empty cells");
    }
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut stat = 0.0;
    let mut cells = 0;
    for (&x, &y) in a.iter().zip(b) {
        let tot = (x + y) as f64;
        if tot == 0.0 {
            continue;
        }
        cells += 1;
        let ea = tot * na / (na + nb);
        let eb = tot * nb / (na + nb);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let dof = cells as f64 - 1.0;
    Ok(ChiSquare { statistic: stat, dof, p_value: chi_p(stat, dof) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_extremes() {
        assert_eq!(ks_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[3.0, 4.0, 5.0]).unwrap(), 1.0);
        assert!(ks_distance(&[], &[1.0]).is_err());
    }

    #[test]
    fn majorisation_examples() {
        assert!(weak_majorises(&[3.0, 2.0, 1.0], &[2.0, 2.0, 2.0]));
        assert!(!weak_majorises(&[1.0, 1.0], &[3.0, 0.0]));
        assert!(weak_majorises(&[5.0], &[3.0, 2.0]));
    }

    #[test]
    fn l2_tail_cases() {
        assert_eq!(l2_tail(&[3.0, 2.0, 1.0], 5), 0.0);
        assert_eq!(l2_tail(&[3.0, 2.0, 1.0], 0), 14.0);
        assert_eq!(l2_tail(&[3.0, 2.0, 1.0], 1), 5.0);
    }

    #[test]
    fn chi_square_of_exact_fit() {
        let r = chi_square_gof(&[25, 25, 50], &[0.25, 0.25, 0.5]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        let t = chi_square_two_sample(&[10, 20], &[20, 40]).unwrap();
        assert!(t.statistic.abs() < 1e-12);
    }
}
