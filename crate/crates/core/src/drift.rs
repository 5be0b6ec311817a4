//! The drift correction `α(b, λ) = J₁(b, λ) / J₃(b, λ)` with
//!
//! ```text
//! J_k(b, λ) = ∫₀^∞ a^{-k/2} w(λ - a) exp(-b² / 2a) da,
//! ```
//!
//! where the weight `w` is `g(x) exp(x³/6)` ([`AlphaWeight::Cubic`], the
//! default) or plain `g` ([`AlphaWeight::Plain`]). The exact stack-forest
//! law at finite N converges to the plain form: the acyclicity probability
//! of the unexplored graph carries a factor `exp(-(λ-a)³/6)` that cancels
//! the cubic. Select it when comparing against finite-N chains.
//!
//! Integrands are evaluated relative to `w(λ)` so that the ratio and
//! derivative identities never see overflow. Near `a = 0` the integral
//! is taken in `v = sqrt(a)` for `k = 1` and in `w = b / sqrt(2a)` for
//! `k >= 3`, which leaves bounded smooth integrands.

use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::stable_density::{shared_cache, QuadratureConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

/// Weight against which `a` is integrated in `J_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaWeight {
    /// `g(λ - a) exp((λ - a)³ / 6)`.
    #[default]
    Cubic,
    /// `g(λ - a)`.
    Plain,
}

impl AlphaWeight {
    fn code(self) -> u32 {
        match self {
            Self::Plain => 0,
            Self::Cubic => 1,
        }
    }

    fn from_code(c: u32) -> Option<Self> {
        match c {
            0 => Some(Self::Plain),
            1 => Some(Self::Cubic),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Plain => "plain",
            Self::Cubic => "cubic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftEvalConfig {
    pub quad: QuadratureConfig,
    #[serde(default)]
    pub weight: AlphaWeight,
    /// Boundary between the substituted and direct regimes; `None` means `max(b², 0.5)`.
    pub split_point: Option<f64>,
    /// Relative tolerance for each piece of `J_k`.
    pub rel_tol: f64,
}

impl Default for DriftEvalConfig {
    fn default() -> Self {
        Self { quad: QuadratureConfig::default(), weight: AlphaWeight::Cubic, split_point: None, rel_tol: 1e-11 }
    }
}

impl DriftEvalConfig {
    fn split(&self, b: f64) -> Result<f64> {
        let s = self.split_point.unwrap_or((b * b).max(0.5));
        if !(s > 0.0) {
            return domain("split_point must be positive");
        }
        Ok(s)
    }

    fn tol(&self) -> Tolerance {
        Tolerance { abs: 0.0, rel: self.rel_tol, max_subdivisions: self.quad.max_subdivisions }
    }
}

/// `ln w(λ)`, the scale factored out of every `J_k`.
pub fn ln_scale(lambda: f64, weight: AlphaWeight) -> f64 {
    let cubic = if weight == AlphaWeight::Cubic { lambda.powi(3) / 6.0 } else { 0.0 };
    shared_cache().ln_g(lambda) + cubic
}

/// `w(λ-a)` divided by its value at `a = 0`.
#[inline]
fn relative_weight(weight: AlphaWeight, lambda: f64, a: f64) -> f64 {
    ln_relative_weight(weight, lambda, a).exp()
}

#[inline]
fn ln_relative_weight(weight: AlphaWeight, lambda: f64, a: f64) -> f64 {
    let cache = shared_cache();
    let lo = cache.range().0;
    // below the cached range the weight is under e^{-3000} relative to a = 0
    if lambda - a < lo && lambda > lo + 2.0 {
        return f64::NEG_INFINITY;
    }
    let cubic = match weight {
        AlphaWeight::Plain => 0.0,
        AlphaWeight::Cubic => -a * (3.0 * lambda * lambda - 3.0 * lambda * a + a * a) / 6.0,
    };
    cache.ln_g(lambda - a) - cache.ln_g(lambda) + cubic
}

/// Adds breaks around the largest sampled value of `ln_f` on `[lo, hi]`, so
/// the adaptive rule sees narrow peaks.
fn add_peak_breaks(breaks: &mut Vec<f64>, ln_f: impl Fn(f64) -> f64, lo: f64, hi: f64) {
    const SAMPLES: usize = 256;
    let h = (hi - lo) / SAMPLES as f64;
    let best = (1..SAMPLES)
        .map(|i| lo + i as f64 * h)
        .map(|x| (x, ln_f(x)))
        .filter(|(_, v)| v.is_finite())
        .max_by(|a, b| a.1.total_cmp(&b.1));
    if let Some((x, _)) = best {
        breaks.extend([-2.0, -1.0, 0.0, 1.0, 2.0].iter().map(|d| x + d * h).filter(|&y| y > lo && y < hi));
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
}

/// Upper end of the direct regime; beyond it either weight is below e^{-300}
/// relative to `a = 0`.
fn a_max(lambda: f64, s0: f64) -> f64 {
    s0.max(lambda.max(0.0) + 14.0)
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 || k % 2 == 0 {
        return domain(format!("J_k needs odd k >= 1, got {k}"));
    }
    Ok(())
}

/// `J_k(b, λ) / w(λ)`.
pub fn eval_j_scaled(k: u32, b: f64, lambda: f64, cfg: &DriftEvalConfig) -> Result<f64> {
    check_k(k)?;
    if !(b > 0.0) {
        return domain(format!("J_k needs b > 0, got {b}"));
    }
    let s0 = cfg.split(b)?;
    let kf = k as f64;
    let near = if k == 1 {
        let hi = s0.sqrt();
        let mut breaks = vec![0.0];
        breaks.extend([0.5 * b, b, 2.0 * b, 4.0 * b].into_iter().filter(|&x| x < hi));
        breaks.push(hi);
        let ln_f = |v: f64| ln_relative_weight(cfg.weight, lambda, v * v) - b * b / (2.0 * v * v);
        add_peak_breaks(&mut breaks, ln_f, 0.0, hi);
        integrate(
            |v: f64| {
                if v == 0.0 {
                    return 0.0;
                }
                2.0 * relative_weight(cfg.weight, lambda, v * v) * (-b * b / (2.0 * v * v)).exp()
            },
            &breaks,
            cfg.tol(),
        )?
        .value
    } else {
        let w0 = b / (2.0 * s0).sqrt();
        let ln_f = |w: f64| (kf - 3.0) * w.ln() + ln_relative_weight(cfg.weight, lambda, b * b / (2.0 * w * w)) - w * w;
        // push the upper end past the peak, which moves out when λ is very negative
        let mut w_hi = 8.0f64.max(2.0 * w0);
        loop {
            let top = (0..=64).map(|i| ln_f(w0 + (w_hi - w0) * i as f64 / 64.0)).fold(f64::NEG_INFINITY, f64::max);
            if ln_f(w_hi) < top - 60.0 || w_hi > 1e4 {
                break;
            }
            w_hi *= 1.5;
        }
        let mut breaks = vec![w0];
        breaks.extend([1.0, 2.0, 4.0].into_iter().filter(|&x| x > w0 && x < w_hi));
        breaks.push(w_hi);
        add_peak_breaks(&mut breaks, ln_f, w0, w_hi);
        let pref = (2.0 / (b * b)).powf(kf / 2.0) * (b * b / 2.0);
        pref * integrate(
            |w: f64| 2.0 * w.powi(k as i32 - 3) * relative_weight(cfg.weight, lambda, b * b / (2.0 * w * w)) * (-w * w).exp(),
            &breaks,
            cfg.tol(),
        )?
        .value
    };
    let hi = a_max(lambda, s0);
    let far = if hi > s0 {
        let mut breaks = vec![s0];
        let mut x = s0.floor() + 1.0;
        while x < hi {
            breaks.push(x);
            x += 1.0;
        }
        breaks.push(hi);
        integrate(
            |a: f64| a.powf(-kf / 2.0) * relative_weight(cfg.weight, lambda, a) * (-b * b / (2.0 * a)).exp(),
            &breaks,
            cfg.tol(),
        )?
        .value
    } else {
        0.0
    };
    Ok(near + far)
}

#[allow(non_snake_case)]
pub fn eval_J(k: u32, b: f64, lambda: f64, cfg: &DriftEvalConfig) -> Result<f64> {
    Ok(eval_j_scaled(k, b, lambda, cfg)? * ln_scale(lambda, cfg.weight).exp())
}

pub fn eval_alpha(b: f64, lambda: f64, cfg: &DriftEvalConfig) -> Result<f64> {
    Ok(eval_j_scaled(1, b, lambda, cfg)? / eval_j_scaled(3, b, lambda, cfg)?)
}

/// `α` extended by `α(0, λ) = 0`.
pub fn alpha_extended(b: f64, lambda: f64, cfg: &DriftEvalConfig) -> Result<f64> {
    if b == 0.0 {
        return Ok(0.0);
    }
    eval_alpha(b, lambda, cfg)
}

/// `∂α/∂b = b J₁ J₅ / J₃² - b`.
pub fn alpha_partial_b(b: f64, lambda: f64, cfg: &DriftEvalConfig) -> Result<f64> {
    let j1 = eval_j_scaled(1, b, lambda, cfg)?;
    let j3 = eval_j_scaled(3, b, lambda, cfg)?;
    let j5 = eval_j_scaled(5, b, lambda, cfg)?;
    Ok(b * j1 * j5 / (j3 * j3) - b)
}

/// Small-`b` limits `(γ₁, γ₃, γ₅)` of `J₁`, `b J₃` and `b³ J₅`.
///
/// `γ₁` is the `b`-free integral `∫ a^{-1/2} w(λ-a) da`, the monotone
/// limit of `J₁`; `γ₃ = √(2π) w(λ)` and `γ₅ = √(2π) w(λ)`.
pub fn gamma_limits(lambda: f64, cfg: &DriftEvalConfig) -> Result<(f64, f64, f64)> {
    let hi = a_max(lambda, 0.5).sqrt();
    let mut breaks: Vec<f64> = (0..=(hi.ceil() as usize)).map(|i| i as f64).filter(|&x| x < hi).collect();
    breaks.push(hi);
    let j1 = integrate(|v: f64| 2.0 * relative_weight(cfg.weight, lambda, v * v), &breaks, cfg.tol())?.value;
    let scale = ln_scale(lambda, cfg.weight).exp();
    let root2 = 2f64.sqrt();
    Ok((j1 * scale, root2 * PI.sqrt() * scale, 2.0 * root2 * (0.5 * PI.sqrt()) * scale))
}

/// Axis of an [`AlphaTable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    pub fn hi(&self) -> f64 {
        self.lo + self.step * (self.count - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + self.step * i as f64
    }

    fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi()
    }

    /// First of four stencil nodes and the fractional position relative to it.
    fn stencil(&self, x: f64) -> (usize, f64) {
        let pos = (x - self.lo) / self.step;
        let i = (pos.floor() as isize - 1).clamp(0, self.count as isize - 4) as usize;
        (i, pos - i as f64)
    }
}

fn cubic_weights(t: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for (j, wj) in w.iter_mut().enumerate() {
        for k in 0..4 {
            if k != j {
                *wj *= (t - k as f64) / (j as f64 - k as f64);
            }
        }
    }
    w
}

const TABLE_MAGIC: &[u8; 8] = b"CFALPHA\0";
const TABLE_VERSION: u32 = 3;

/// `α` tabulated on a `(b, λ)` grid with 4×4 local cubic interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    pub weight: AlphaWeight,
    pub b_axis: Axis,
    pub lambda_axis: Axis,
    values: Vec<f64>,
}

impl AlphaTable {
    /// `b ∈ [0, 8]` step 0.02, `λ ∈ [-12, 6]` step 0.05.
    pub fn default_axes() -> (Axis, Axis) {
        (Axis { lo: 0.0, step: 0.02, count: 401 }, Axis { lo: -12.0, step: 0.05, count: 361 })
    }

    pub fn build_default(cfg: &DriftEvalConfig) -> Result<Self> {
        let (b, l) = Self::default_axes();
        Self::build(b, l, cfg)
    }

    pub fn build(b_axis: Axis, lambda_axis: Axis, cfg: &DriftEvalConfig) -> Result<Self> {
        if b_axis.count < 4 || lambda_axis.count < 4 || !(b_axis.step > 0.0 && lambda_axis.step > 0.0) {
            return domain("alpha table axes need at least 4 nodes and positive steps");
        }
        if b_axis.lo < 0.0 {
            return domain("alpha table b axis must start at or above 0");
        }
        let rows: Vec<Vec<f64>> = (0..b_axis.count)
            .into_par_iter()
            .map(|i| {
                let b = b_axis.node(i);
                (0..lambda_axis.count)
                    .map(|j| alpha_extended(b, lambda_axis.node(j), cfg))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        Ok(Self { weight: cfg.weight, b_axis, lambda_axis, values: rows.concat() })
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.lambda_axis.count + j]
    }

    /// Interpolated `α`, or `None` outside the grid.
    pub fn alpha(&self, b: f64, lambda: f64) -> Option<f64> {
        if !self.b_axis.contains(b) || !self.lambda_axis.contains(lambda) {
            return None;
        }
        let (i0, tb) = self.b_axis.stencil(b);
        let (j0, tl) = self.lambda_axis.stencil(lambda);
        let wb = cubic_weights(tb);
        let wl = cubic_weights(tl);
        let mut acc = 0.0;
        for (di, wbi) in wb.iter().enumerate() {
            let row: f64 = wl.iter().enumerate().map(|(dj, w)| w * self.at(i0 + di, j0 + dj)).sum();
            acc += wbi * row;
        }
        Some(acc)
    }

    /// Table value with direct quadrature outside the grid.
    pub fn alpha_or_direct(&self, b: f64, lambda: f64, cfg: &DriftEvalConfig) -> Result<f64> {
        match self.alpha(b, lambda) {
            Some(v) => Ok(v),
            None => alpha_extended(b, lambda, cfg),
        }
    }

    /// Largest absolute deviation from direct evaluation at cell midpoints
    /// chosen by `stride` along each axis.
    pub fn max_deviation(&self, stride: usize, cfg: &DriftEvalConfig) -> Result<f64> {
        let stride = stride.max(1);
        let mut worst: f64 = 0.0;
        for i in (0..self.b_axis.count - 1).step_by(stride) {
            for j in (0..self.lambda_axis.count - 1).step_by(stride) {
                let b = self.b_axis.node(i) + 0.5 * self.b_axis.step;
                let l = self.lambda_axis.node(j) + 0.5 * self.lambda_axis.step;
                let direct = eval_alpha(b, l, cfg)?;
                worst = worst.max((self.alpha(b, l).unwrap() - direct).abs());
            }
        }
        Ok(worst)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let mut body = Vec::with_capacity(64 + 8 * self.values.len());
        body.extend_from_slice(TABLE_MAGIC);
        body.extend_from_slice(&TABLE_VERSION.to_le_bytes());
        body.extend_from_slice(&self.weight.code().to_le_bytes());
        for ax in [&self.b_axis, &self.lambda_axis] {
            body.extend_from_slice(&ax.lo.to_le_bytes());
            body.extend_from_slice(&ax.step.to_le_bytes());
            body.extend_from_slice(&(ax.count as u64).to_le_bytes());
        }
        for v in &self.values {
            body.extend_from_slice(&v.to_le_bytes());
        }
        let digest = Sha256::digest(&body);
        w.write_all(&body)?;
        w.write_all(&digest)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 16 + 48 + 32 {
            return Err(Error::Format("alpha table truncated".into()));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Format("alpha table checksum mismatch".into()));
        }
        if &body[..8] != TABLE_MAGIC {
            return Err(Error::Format("not an alpha table".into()));
        }
        let version = u32::from_le_bytes(body[8..12].try_into().unwrap());
        if version != TABLE_VERSION {
            return Err(Error::Format(format!("unsupported alpha table version {version}")));
        }
        let code = u32::from_le_bytes(body[12..16].try_into().unwrap());
        let weight = AlphaWeight::from_code(code).ok_or_else(|| Error::Format(format!("unknown alpha weight {code}")))?;
        let f = |o: usize| f64::from_le_bytes(body[o..o + 8].try_into().unwrap());
        let u = |o: usize| u64::from_le_bytes(body[o..o + 8].try_into().unwrap()) as usize;
        let b_axis = Axis { lo: f(16), step: f(24), count: u(32) };
        let lambda_axis = Axis { lo: f(40), step: f(48), count: u(56) };
        let n = b_axis.count.checked_mul(lambda_axis.count).ok_or_else(|| Error::Format("grid too large".into()))?;
        if body.len() != 64 + 8 * n {
            return Err(Error::Format("alpha table length does not match its grid".into()));
        }
        let values = (0..n).map(|i| f(64 + 8 * i)).collect();
        Ok(Self { weight, b_axis, lambda_axis, values })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// Default-axis table from `dir` (or [`cache_dir`]), built and stored
    /// there on a miss. A failed store is not an error.
    pub fn cached_default(dir: Option<&Path>, cfg: &DriftEvalConfig) -> Result<Self> {
        let dir = dir.map(Path::to_path_buf).unwrap_or_else(cache_dir);
        let path = dir.join(format!("alpha-{}-v{TABLE_VERSION}.bin", cfg.weight.name()));
        let (b, l) = Self::default_axes();
        if let Ok(t) = Self::load(&path) {
            if t.weight == cfg.weight && t.b_axis == b && t.lambda_axis == l {
                return Ok(t);
            }
        }
        let t = Self::build(b, l, cfg)?;
        if std::fs::create_dir_all(&dir).is_ok() {
            let tmp = path.with_extension("tmp");
            if t.save(&tmp).is_ok() {
                let _ = std::fs::rename(&tmp, &path);
            }
        }
        Ok(t)
    }
}

/// `$CRITFOREST_CACHE_DIR`, else `critforest` under the system temp dir.
pub fn cache_dir() -> std::path::PathBuf {
    std::env::var_os("CRITFOREST_CACHE_DIR")
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("critforest"))
}
