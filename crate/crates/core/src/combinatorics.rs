//! Forest counts, acyclicity probabilities and stack-forest events.
//!
//! Everything is carried in natural-log space. `f(N, m)` is the number of
//! forests on `N` labelled vertices with `m` edges; `A_{N,r,k}` is the event
//! that the first `r` vertices lie in distinct trees whose union has `k`
//! vertices, with the whole graph acyclic.

use crate::error::{domain, Error, Result};
use crate::logmath::{pairs, LogFactorials, LogSum};
use std::f64::consts::PI;

/// Default largest table the library will build without an explicit override.
pub const DEFAULT_TABLE_CAPACITY: usize = 5000;

/// Terms this far below the running maximum end a truncated sum.
const TRUNCATION_GAP: f64 = 60.0;

/// `ln f(N', m')` for all `N' <= N`, `0 <= m' <= N' - 1`.
#[derive(Debug, Clone)]
pub struct LogCountTable {
    max_vertices: usize,
    lf: LogFactorials,
    offsets: Vec<usize>,
    // ln f(N', m') - ln N'!, which keeps the recursion free of binomials
    scaled: Vec<f64>,
}

impl LogCountTable {
    pub fn build(max_vertices: usize) -> Result<Self> {
        Self::build_with_capacity(max_vertices, DEFAULT_TABLE_CAPACITY)
    }

    /// Build bottom-up over the size of the tree containing the smallest label.
    /// Cost is about `N^3 / 6` exponentials.
    pub fn build_with_capacity(max_vertices: usize, capacity: usize) -> Result<Self> {
        if max_vertices > capacity {
            return Err(Error::Capacity { capacity, requested: max_vertices });
        }
        let lf = LogFactorials::new(max_vertices.max(1));
        let mut offsets = Vec::with_capacity(max_vertices + 2);
        let mut total = 0;
        for n in 0..=max_vertices {
            offsets.push(total);
            total += n.max(1);
        }
        offsets.push(total);
        let mut scaled = vec![0.0; total];

        // tau_k = ln(k^{k-2} / (k-1)!)
        let tau: Vec<f64> = (0..=max_vertices)
            .map(|k| if k == 0 { 0.0 } else { (k as f64 - 2.0) * (k as f64).ln() - lf.lf(k - 1) })
            .collect();

        let mut buf = Vec::with_capacity(max_vertices);
        for n in 1..=max_vertices {
            let head = lf.lf(n - 1) - lf.lf(n);
            for m in 0..n {
                buf.clear();
                for k in 1..=(m + 1).min(n) {
                    let rest_n = n - k;
                    let rest_m = m + 1 - k;
                    if rest_m > rest_n.saturating_sub(1) {
                        continue;
                    }
                    buf.push(tau[k] + scaled[offsets[rest_n] + rest_m]);
                }
                scaled[offsets[n] + m] = head + crate::logmath::log_sum_exp(&buf);
            }
        }
        Ok(Self { max_vertices, lf, offsets, scaled })
    }

    pub fn max_vertices(&self) -> usize {
        self.max_vertices
    }

    pub fn log_factorials(&self) -> &LogFactorials {
        &self.lf
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.max_vertices {
            return Err(Error::Capacity { capacity: self.max_vertices, requested: n });
        }
        Ok(())
    }

    /// `ln f(n, m)`.
    pub fn get(&self, n: usize, m: usize) -> Result<f64> {
        self.check(n)?;
        if m > n.saturating_sub(1) {
            return domain(format!("forest edge count m={m} outside 0..={} for N={n}", n.saturating_sub(1)));
        }
        Ok(self.scaled[self.offsets[n] + m] + self.lf.lf(n))
    }

    /// `ln f(n, m)` without range checks, for hot loops that already validated.
    #[inline]
    pub(crate) fn get_unchecked(&self, n: usize, m: usize) -> f64 {
        self.scaled[self.offsets[n] + m] + self.lf.lf(n)
    }
}

/// Derived critical-window coordinates of `(N, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingParams {
    pub n: usize,
    pub p: f64,
}

impl ScalingParams {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self { n, p })
    }

    /// `p = (1 + Λ N^{-1/3}) / N`.
    pub fn from_lambda(n: usize, lambda: f64) -> Result<Self> {
        let nf = n as f64;
        Self::new(n, (1.0 + lambda * nf.powf(-1.0 / 3.0)) / nf)
    }

    pub fn lambda(&self) -> f64 {
        let nf = self.n as f64;
        nf.cbrt() * (nf * self.p - 1.0)
    }

    /// Rescaled stack quantities `(a, b, s)` for remaining size `n_rem`,
    /// stack size `r` and stack-forest size `k`.
    pub fn stack_coords(&self, n_rem: usize, r: usize, k: usize) -> Result<(f64, f64, f64)> {
        if !(r <= k && k <= n_rem && n_rem <= self.n) {
            return domain(format!("need r <= k <= N' <= N, got r={r} k={k} N'={n_rem} N={}", self.n));
        }
        let nf = self.n as f64;
        let n23 = nf.powf(2.0 / 3.0);
        Ok((k as f64 / n23, r as f64 / nf.cbrt(), (self.n - n_rem) as f64 / n23))
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("edge probability {p} outside (0, 1)"));
    }
    Ok(())
}

pub fn forest_count_log(table: &LogCountTable, n: usize, m: usize) -> Result<f64> {
    table.get(n, m)
}

/// Leading-order critical-window estimate of `f(N, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BritikovEstimate {
    pub log_value: f64,
    /// Argument passed to `g`.
    pub x: f64,
    /// False when `|2m - N| > c N^{2/3}`.
    pub in_window: bool,
}

impl BritikovEstimate {
    /// `exact / asymptotic` given `ln f(N, m)`.
    pub fn ratio_to(&self, exact_log: f64) -> f64 {
        (exact_log - self.log_value).exp()
    }
}

pub fn britikov_asymptotic<G: Fn(f64) -> f64>(n: usize, m: usize, window_c: f64, g: G) -> Result<BritikovEstimate> {
    if n == 0 || m >= n {
        return domain(format!("need 0 <= m < N, got N={n} m={m}"));
    }
    let nf = n as f64;
    let n23 = nf.powf(2.0 / 3.0);
    let x = (2.0 * m as f64 - nf) / n23;
    let c = n - m;
    let log_value = 0.5 * (2.0 * PI).ln() + (nf - 1.0 / 6.0) * nf.ln() + g(x).ln()
        - c as f64 * std::f64::consts::LN_2
        - statrs::function::factorial::ln_factorial(c as u64);
    Ok(BritikovEstimate { log_value, x, in_window: x.abs() <= window_c })
}

/// `P(G(N, p) is acyclic)`, exact.
pub fn acyclic_prob_exact(table: &LogCountTable, n: usize, p: f64) -> Result<f64> {
    Ok(ln_acyclic_exact(table, n, p)?.exp())
}

pub fn ln_acyclic_exact(table: &LogCountTable, n: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    table.check(n)?;
    if n <= 1 {
        return Ok(0.0);
    }
    let ln_x = p.ln() - (-p).ln_1p();
    let mut acc = LogSum::new();
    for m in 0..n {
        acc.add(table.get_unchecked(n, m) + m as f64 * ln_x);
    }
    Ok(pairs(n) * (-p).ln_1p() + acc.value())
}

/// `g(Λ) e^{3/4} sqrt(2π) N^{-1/6}`.
pub fn acyclic_prob_asymptotic<G: Fn(f64) -> f64>(n: usize, p: f64, g: G) -> Result<f64> {
    let sp = ScalingParams::new(n, p)?;
    Ok(g(sp.lambda()) * 0.75f64.exp() * (2.0 * PI).sqrt() * (n as f64).powf(-1.0 / 6.0))
}

fn ln_stack_core(lf: &LogFactorials, n: usize, r: usize, k: usize, ln_x: f64) -> f64 {
    lf.ln_binom(n - r, k - r) + (k - r) as f64 * ln_x + (r as f64).ln() + (k as f64 - r as f64 - 1.0) * (k as f64).ln()
}

/// `P(G(N, p) ∈ A_{N,r,k})`.
pub fn stack_forest_event_prob(table: &LogCountTable, n: usize, r: usize, k: usize, p: f64) -> Result<f64> {
    Ok(ln_stack_forest_event(table, n, r, k, p)?.exp())
}

pub fn ln_stack_forest_event(table: &LogCountTable, n: usize, r: usize, k: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    if !(1 <= r && r <= k && k <= n) {
        return domain(format!("need 1 <= r <= k <= N, got r={r} k={k} N={n}"));
    }
    table.check(n)?;
    let ln_1mp = (-p).ln_1p();
    let ln_x = p.ln() - ln_1mp;
    Ok((pairs(n) - pairs(n - k)) * ln_1mp
        + ln_stack_core(table.log_factorials(), n, r, k, ln_x)
        + ln_acyclic_exact(table, n - k, p)?)
}

/// Leading-order form of `P(A_{N',r,k})` in rescaled coordinates.
pub fn stack_forest_asymptotic<G: Fn(f64) -> f64>(
    n: usize,
    n_rem: usize,
    r: usize,
    k: usize,
    p: f64,
    g: G,
) -> Result<f64> {
    let sp = ScalingParams::new(n, p)?;
    let (a, b, s) = sp.stack_coords(n_rem, r, k)?;
    if a == 0.0 {
        return domain("stack forest size a = 0");
    }
    if b <= 0.0 {
        return domain("stack size b must be positive");
    }
    Ok(stack_asymptotic_scaled(n, a, b, sp.lambda() - s, g))
}

/// Same as [`stack_forest_asymptotic`] with `Λ - s` passed directly.
pub fn stack_asymptotic_scaled<G: Fn(f64) -> f64>(n: usize, a: f64, b: f64, lam_s: f64, g: G) -> f64 {
    let e = -b * lam_s - b * b / (2.0 * a) + ((lam_s - a).powi(3) - lam_s.powi(3)) / 6.0;
    0.75f64.exp() * g(lam_s - a) * (n as f64).powf(-5.0 / 6.0) * b * a.powf(-1.5) * e.exp()
}

/// `E[k | A_{N,r}]` where `k` is the stack-forest size.
pub fn expected_stack_forest_exact(table: &LogCountTable, n: usize, r: usize, p: f64) -> Result<f64> {
    if !(1 <= r && r <= n) {
        return domain(format!("need 1 <= r <= N, got r={r} N={n}"));
    }
    let logs: Vec<f64> = (r..=n)
        .map(|k| ln_stack_forest_event(table, n, r, k, p))
        .collect::<Result<_>>()?;
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, l) in logs.iter().enumerate() {
        let w = (l - m).exp();
        num += (r + i) as f64 * w;
        den += w;
    }
    Ok(num / den)
}

/// Acyclicity and separation probabilities at one fixed `p` for every size
/// up to `max_vertices`.
///
/// Backed by the one-dimensional recursion
/// `U(M) = Σ_k C(M-1,k-1) k^{k-2} x^{k-1} U(M-k)`, `x = p/(1-p)`, so that
/// `P(G(M,p) acyclic) = (1-p)^{C(M,2)} U(M)`. Sums are truncated once terms
/// fall far below their running maximum and are decreasing, which makes the
/// build roughly `N · N^{2/3}` near criticality.
#[derive(Debug, Clone)]
pub struct AcyclicProfile {
    p: f64,
    ln_x: f64,
    ln_1mp: f64,
    lf: LogFactorials,
    ln_u: Vec<f64>,
}

impl AcyclicProfile {
    pub fn build(max_vertices: usize, p: f64) -> Result<Self> {
        check_p(p)?;
        let lf = LogFactorials::new(max_vertices.max(1));
        let ln_1mp = (-p).ln_1p();
        let ln_x = p.ln() - ln_1mp;
        let tau: Vec<f64> = (0..=max_vertices)
            .map(|k| if k == 0 { 0.0 } else { (k as f64 - 2.0) * (k as f64).ln() - lf.lf(k - 1) })
            .collect();
        let mut ln_u = vec![0.0; max_vertices + 1];
        let mut w = vec![0.0; max_vertices + 1]; // ln U(M) - lf(M)
        for m in 1..=max_vertices {
            let mut acc = LogSum::new();
            let mut prev = f64::NEG_INFINITY;
            for k in 1..=m {
                let t = tau[k] + (k - 1) as f64 * ln_x + w[m - k];
                acc.add(t);
                if t < prev && t < acc.max_term() - TRUNCATION_GAP {
                    break;
                }
                prev = t;
            }
            ln_u[m] = lf.lf(m - 1) + acc.value();
            w[m] = ln_u[m] - lf.lf(m);
        }
        Ok(Self { p, ln_x, ln_1mp, lf, ln_u })
    }

    /// Same quantities taken from a full count table, with no truncation.
    pub fn from_table(table: &LogCountTable, p: f64) -> Result<Self> {
        check_p(p)?;
        let n = table.max_vertices();
        let ln_1mp = (-p).ln_1p();
        let ln_x = p.ln() - ln_1mp;
        let mut ln_u = vec![0.0; n + 1];
        for (m, slot) in ln_u.iter_mut().enumerate().skip(2) {
            let mut acc = LogSum::new();
            for e in 0..m {
                acc.add(table.get_unchecked(m, e) + e as f64 * ln_x);
            }
            *slot = acc.value();
        }
        let lf = table.log_factorials().clone();
        Ok(Self { p, ln_x, ln_1mp, lf, ln_u })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn max_vertices(&self) -> usize {
        self.ln_u.len() - 1
    }

    /// `ln P(G(M, p) acyclic)`.
    pub fn ln_acyclic(&self, m: usize) -> f64 {
        pairs(m) * self.ln_1mp + self.ln_u[m]
    }

    /// `ln P(G(N', p) ∈ A_{N',j,k})`.
    pub fn ln_stack_event(&self, n_rem: usize, j: usize, k: usize) -> f64 {
        (pairs(n_rem) - pairs(n_rem - k)) * self.ln_1mp
            + ln_stack_core(&self.lf, n_rem, j, k, self.ln_x)
            + self.ln_acyclic(n_rem - k)
    }

    /// `ln P(F(N', p) ∈ A_{N',j})`: the first `j` vertices of a forest lie in
    /// distinct trees. Zero for `j <= 1`.
    pub fn ln_separated(&self, n_rem: usize, j: usize) -> f64 {
        if j <= 1 {
            return 0.0;
        }
        debug_assert!(j <= n_rem);
        // the (1-p) powers cancel against P(G(N',p) acyclic)
        let base = (j as f64).ln() - self.ln_u[n_rem];
        let mut acc = LogSum::new();
        let mut prev = f64::NEG_INFINITY;
        for k in j..=n_rem {
            let t = self.lf.ln_binom(n_rem - j, k - j)
                + (k - j) as f64 * self.ln_x
                + (k as f64 - j as f64 - 1.0) * (k as f64).ln()
                + self.ln_u[n_rem - k];
            acc.add(t);
            if t < prev && t < acc.max_term() - TRUNCATION_GAP {
                break;
            }
            prev = t;
        }
        (base + acc.value()).min(0.0)
    }
}
