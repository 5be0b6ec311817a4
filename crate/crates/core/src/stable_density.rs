//! The density
//!
//! ```text
//! g(x) = (1/π) ∫₀^∞ exp(-κ t^{3/2}) cos(x t + κ t^{3/2}) dt,   κ = 2/3,
//! ```
//!
//! a totally skewed 3/2-stable law with a polynomial right tail
//! (`g(x) ~ x^{-5/2} / sqrt(2π)`) and a super-exponential left tail. This is
//! the density in the critical-window forest count
//! `f(N,m) ~ sqrt(2π) N^{N-1/6} g((2m-N)/N^{2/3}) / (2^{N-m} (N-m)!)`.
//! The same integral written with `κ = 4/3` is the stretch
//! `x ↦ 2^{-2/3} g(2^{-2/3} x)` of it and misses exact counts by the constant
//! factor `2^{2/3}`; [`eval_fourier_form`] evaluates either.
//!
//! Two independent evaluators are provided. [`eval_g`] integrates the
//! oscillatory Fourier form directly on panels narrow enough to resolve the
//! phase. [`ln_g_zolotarev`] uses the non-oscillatory integral
//! representation of stable densities over a finite angle range; it keeps
//! full relative accuracy deep in the left tail where the Fourier form only
//! yields absolute accuracy. [`GCache`] tabulates `ln g` for hot loops.

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, Tolerance};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Rate `κ` in the Fourier form of `g`.
pub const KAPPA: f64 = 2.0 / 3.0;

/// Scale of `g` relative to the standard (unit-scale) stable law.
fn sigma() -> f64 {
    KAPPA.powf(2.0 / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    /// Bound on the integrand envelope at the truncation point.
    pub truncation_tail: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, truncation_tail: 1e-13, max_subdivisions: 200_000 }
    }
}

impl QuadratureConfig {
    /// Looser setting for Monte Carlo hot paths.
    pub fn fast() -> Self {
        Self { abs_tol: 1e-8, truncation_tail: 1e-11, max_subdivisions: 100_000 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return domain("abs_tol must be positive");
        }
        if !(self.truncation_tail > 0.0 && self.truncation_tail < self.abs_tol) {
            return domain("truncation_tail must lie in (0, abs_tol)");
        }
        if self.max_subdivisions == 0 {
            return domain("max_subdivisions must be positive");
        }
        Ok(())
    }

    /// `T` with `exp(-κ T^{3/2}) = truncation_tail`.
    pub fn truncation_point(&self, kappa: f64) -> f64 {
        (-self.truncation_tail.ln() / kappa).powf(2.0 / 3.0)
    }
}

/// `g(x)` from the Fourier integral, accurate to `cfg.abs_tol`.
pub fn eval_g(x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    eval_fourier_form(x, KAPPA, cfg)
}

/// `(1/π) ∫₀^∞ exp(-κ t^{3/2}) cos(x t + κ t^{3/2}) dt` for any `κ > 0`.
pub fn eval_fourier_form(x: f64, kappa: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if !x.is_finite() {
        return domain(format!("g evaluated at non-finite x={x}"));
    }
    if !(kappa > 0.0) {
        return domain("kappa must be positive");
    }
    let t_max = cfg.truncation_point(kappa);
    // phase derivative is x + (3κ/2) sqrt(t)
    let width = PI / (4.0 * (x.abs() + 1.5 * kappa * t_max.sqrt()));
    let panels = (t_max / width).ceil().max(1.0) as usize;
    let breaks: Vec<f64> = (0..=panels).map(|i| t_max * i as f64 / panels as f64).collect();
    let integrand = |t: f64| {
        let c = kappa * t * t.sqrt();
        (-c).exp() * (x * t + c).cos()
    };
    // the truncated envelope mass is below truncation_tail / (2 sqrt T)
    let tol = Tolerance::absolute((cfg.abs_tol * PI - cfg.truncation_tail).max(0.5 * cfg.abs_tol * PI), cfg.max_subdivisions + panels);
    match integrate(integrand, &breaks, tol) {
        Ok(est) => Ok(est.value / PI),
        Err(Error::Accuracy { estimate, bound }) => Err(Error::Accuracy { estimate: estimate / PI, bound: bound / PI }),
        Err(e) => Err(e),
    }
}

/// `∫_lo^hi g` by adaptive quadrature over [`eval_g`], within `abs_tol · (hi - lo)`.
pub fn integrate_g(lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if lo == hi {
        return Ok(0.0);
    }
    if !(lo < hi) {
        return domain(format!("integrate_g needs lo < hi, got [{lo}, {hi}]"));
    }
    let inner = QuadratureConfig { abs_tol: cfg.abs_tol * 0.1, truncation_tail: cfg.truncation_tail * 0.1, ..*cfg };
    let mut failure = None;
    // unit breaks keep each panel inside one regime of the density's shape
    let mut breaks = vec![lo];
    let mut b = lo.floor() + 1.0;
    while b < hi {
        breaks.push(b);
        b += 1.0;
    }
    breaks.push(hi);
    let est = integrate(
        |x| match eval_g(x, &inner) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        &breaks,
        Tolerance::absolute(cfg.abs_tol * (hi - lo), cfg.max_subdivisions),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(est?.value)
}

/// Leading right-tail mass `∫_x^∞ y^{-5/2} / sqrt(2π) dy`. The next term of
/// the expansion of `g` is of order `x^{-11/2}`.
pub fn right_tail_mass(x: f64) -> f64 {
    (2.0 / 3.0) * x.powf(-1.5) / (2.0 * PI).sqrt()
}

/// Leading right-tail density `x^{-5/2} / sqrt(2π)`.
pub fn right_tail_density(x: f64) -> f64 {
    x.powf(-2.5) / (2.0 * PI).sqrt()
}

/// `g(0) = Γ(5/3) cos(π/6) / (π 2^{1/3} σ)`.
pub fn g_at_zero() -> f64 {
    statrs::function::gamma::gamma(5.0 / 3.0) * (PI / 6.0).cos() / (PI * 2f64.cbrt() * sigma())
}

/// Non-oscillatory angular form of the unit-scale 3/2-stable density with
/// skewness `beta = ±1`, for `u > ζ(beta) = beta`. Returns `ln f`.
///
/// The angle is measured from `π/2` (`ε = π/2 - θ`), where the reductions
/// below are exact; `V` increases in `ε` from its minimum at `ε = 0`.
fn ln_stable_angular(u: f64, beta: f64, rel_tol: f64) -> Result<f64> {
    let d = u - beta;
    debug_assert!(d > 0.0);
    // d^{α/(α-1)} = d^3
    let c = d * d * d;
    let (eps_max, v_min) = if beta > 0.0 { (PI / 3.0, 0.0) } else { (2.0 * PI / 3.0, 2.0 / 27.0) };
    let v = move |e: f64| -> f64 {
        let s = e.sin();
        let r = if beta > 0.0 {
            0.5 * s * s * (0.5 * e).cos() / (1.5 * e).cos().powi(3)
        } else {
            0.5 * s * s * (0.5 * e).sin() / (1.5 * e).sin().powi(3)
        };
        if r.is_finite() && r > 0.0 {
            r
        } else if e < 1e-300 {
            v_min
        } else {
            f64::INFINITY
        }
    };
    let mut breaks = vec![0.0, eps_max];
    // the peak of V e^{-cV} sits at c V = 1 when that is reachable
    let grid = 256;
    let mut prev = (0.0, v_min);
    for i in 1..grid {
        let e = eps_max * i as f64 / grid as f64;
        let cur = (e, v(e));
        if (c * prev.1 - 1.0).signum() != (c * cur.1 - 1.0).signum() {
            breaks.push(0.5 * (prev.0 + cur.0));
        }
        prev = cur;
    }
    // for large c the mass lies in a layer of width ~1/c next to ε = 0
    let mut e = eps_max;
    while e > 1e-15 {
        e *= 0.5;
        breaks.push(e);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let integrand = |e: f64| {
        let vv = v(e);
        if vv.is_finite() {
            vv * (-c * (vv - v_min).max(0.0)).exp()
        } else {
            0.0
        }
    };
    let est = integrate(integrand, &breaks, Tolerance::relative(rel_tol, 20_000))?;
    if !(est.value > 0.0) {
        return Err(Error::Accuracy { estimate: est.value, bound: est.error });
    }
    // α d^{1/(α-1)} / (π |α - 1|) with α = 3/2
    let pref = 3.0 * d * d / PI;
    Ok(pref.ln() + est.value.ln() - c * v_min)
}

/// `ln g(x)` from the angular representation; relative accuracy about `rel_tol`.
pub fn ln_g_zolotarev(x: f64, rel_tol: f64) -> Result<f64> {
    if !x.is_finite() {
        return domain(format!("g evaluated at non-finite x={x}"));
    }
    let s = sigma();
    // g(x) = f(x/σ + ζ; 3/2, 1) / σ with ζ = 1 and σ = κ^{2/3}
    let u = x / s + 1.0;
    let ln_f = if x.abs() < 1e-9 {
        (g_at_zero() * s).ln()
    } else if x > 0.0 {
        ln_stable_angular(u, 1.0, rel_tol)?
    } else {
        ln_stable_angular(-u, -1.0, rel_tol)?
    };
    Ok(ln_f - s.ln())
}

pub fn eval_g_zolotarev(x: f64, rel_tol: f64) -> Result<f64> {
    ln_g_zolotarev(x, rel_tol).map(f64::exp)
}

/// `ln g` on a uniform grid with six-point Lagrange interpolation. Outside
/// the grid it falls back to the angular evaluator.
#[derive(Debug, Clone)]
pub struct GCache {
    lo: f64,
    h: f64,
    values: Vec<f64>,
}

impl GCache {
    pub const DEFAULT_LO: f64 = -30.0;
    pub const DEFAULT_HI: f64 = 40.0;
    pub const DEFAULT_STEP: f64 = 0.01;

    pub fn build() -> Result<Self> {
        Self::build_range(Self::DEFAULT_LO, Self::DEFAULT_HI, Self::DEFAULT_STEP)
    }

    pub fn build_range(lo: f64, hi: f64, h: f64) -> Result<Self> {
        if !(lo < hi && h > 0.0) {
            return domain("cache range must be non-empty with positive step");
        }
        let n = ((hi - lo) / h).round() as usize + 1;
        let values = (0..n).map(|i| ln_g_zolotarev(lo + h * i as f64, 1e-12)).collect::<Result<Vec<_>>>()?;
        Ok(Self { lo, h, values })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.lo, self.lo + self.h * (self.values.len() - 1) as f64)
    }

    pub fn ln_g(&self, x: f64) -> f64 {
        let pos = (x - self.lo) / self.h;
        let i = pos.floor() as isize;
        if i < 2 || i + 3 >= self.values.len() as isize {
            return ln_g_zolotarev(x, 1e-12).unwrap_or(f64::NEG_INFINITY);
        }
        let base = i - 2;
        let t = pos - base as f64;
        let mut acc = 0.0;
        for j in 0..6 {
            let mut w = 1.0;
            for k in 0..6 {
                if k != j {
                    w *= (t - k as f64) / (j as f64 - k as f64);
                }
            }
            acc += w * self.values[(base + j) as usize];
        }
        acc
    }

    pub fn g(&self, x: f64) -> f64 {
        self.ln_g(x).exp()
    }
}

/// Process-wide default [`GCache`], built on first use and read-only after.
pub fn shared_cache() -> &'static GCache {
    static CACHE: std::sync::OnceLock<GCache> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| GCache::build().expect("default g cache range is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    // independent high-precision values of g
    const REFERENCE: [(f64, f64); 10] = [
        (-5.0, 8.00127724150848e-10),
        (-2.0, 0.151170463422326),
        (-1.0, 0.363090090015772),
        (0.0, 0.258819403792807),
        (1.0, 0.112472977592409),
        (2.0, 0.0464632442113748),
        (3.0, 0.0215996195879135),
        (5.0, 0.00683136129099653),
        (10.0, 0.00125429328381319),
        (20.0, 0.000222853140727355),
    ];

    #[test]
    fn fourier_and_angular_forms_agree_with_reference() {
        let cfg = QuadratureConfig::default();
        for &(x, want) in &REFERENCE {
            let a = eval_g(x, &cfg).unwrap();
            let b = eval_g_zolotarev(x, 1e-12).unwrap();
            assert!((a - want).abs() < 1e-9, "x={x}: {a} vs {want}");
            assert!((b / want - 1.0).abs() < 1e-9, "x={x}: {b} vs {want}");
        }
        assert!((g_at_zero() - 0.258819403792807).abs() < 1e-14);
    }

    #[test]
    fn literal_rate_is_a_stretch() {
        let cfg = QuadratureConfig::default();
        let c = 2f64.powf(2.0 / 3.0);
        for &x in &[-1.5, 0.0, 0.7, 4.0] {
            let lit = eval_fourier_form(c * x, 4.0 / 3.0, &cfg).unwrap();
            assert!((c * lit - eval_g(x, &cfg).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn left_tail_is_relative_accurate() {
        let v = eval_g_zolotarev(-5.0, 1e-12).unwrap();
        assert!((v / 8.00127724150848e-10 - 1.0).abs() < 1e-9, "{v}");
        assert!(ln_g_zolotarev(-30.0, 1e-12).unwrap() < -1000.0);
    }

    #[test]
    fn cache_interpolates() {
        let c = GCache::build_range(-8.0, 8.0, 0.01).unwrap();
        for &x in &[-7.123, -1.0005, 0.0, 0.3333, 4.56789] {
            let want = ln_g_zolotarev(x, 1e-12).unwrap();
            assert!((c.ln_g(x) - want).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn config_validation() {
        let bad = QuadratureConfig { abs_tol: 1e-10, truncation_tail: 1e-9, max_subdivisions: 10 };
        assert!(eval_g(0.0, &bad).is_err());
        assert_eq!(integrate_g(0.0, 0.0, &QuadratureConfig::default()).unwrap(), 0.0);
    }
}
