//! Euler–Maruyama simulation of the limiting reflected diffusions
//!
//! ```text
//! dZ = [λ - t - α(Z, λ - t)] dt + dW + dK,     dB = (λ - t) dt + dW + dK,
//! ```
//!
//! with reflection at 0 by the discrete Skorokhod step `max(0, ·)`.

use crate::drift::{alpha_extended, AlphaTable, DriftEvalConfig};
use crate::error::{domain, Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};

/// `λ - t - α(z, λ - t)`, with `α` from a table when one covers the point.
pub struct DriftField {
    table: Option<AlphaTable>,
    cfg: DriftEvalConfig,
}

impl DriftField {
    pub fn new(table: Option<AlphaTable>, cfg: DriftEvalConfig) -> Self {
        Self { table, cfg }
    }

    /// Direct quadrature only; slow, meant for spot checks.
    pub fn direct() -> Self {
        Self::new(None, DriftEvalConfig::default())
    }

    pub fn eval(&self, t: f64, z: f64, lambda: f64) -> Result<f64> {
        if !(z >= 0.0) {
            return domain(format!("drift field needs z >= 0, got {z}"));
        }
        let mu = lambda - t;
        if z == 0.0 {
            return Ok(mu);
        }
        let a = match self.table.as_ref().and_then(|tab| tab.alpha(z, mu)) {
            Some(a) => a,
            None => alpha_extended(z, mu, &self.cfg)?,
        };
        Ok(mu - a)
    }
}

pub fn drift_field(field: &DriftField, t: f64, z: f64, lambda: f64) -> Result<f64> {
    field.eval(t, z, lambda)
}

/// Path on the grid `t_i = i·dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionPath {
    pub lambda: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl DiffusionPath {
    pub fn horizon(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }

    /// Fraction of grid steps spent at 0.
    pub fn time_at_zero(&self) -> f64 {
        let steps = self.values.len() - 1;
        self.values[1..].iter().filter(|&&v| v == 0.0).count() as f64 / steps as f64
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        self.write_with_meta("", w)
    }

    /// Binary layout: magic, `u32` version, `u64`-prefixed UTF-8 metadata,
    /// `λ`, `dt`, `u64` count, the values, and a SHA-256 trailer.
    pub fn write_with_meta<W: Write>(&self, meta: &str, mut w: W) -> Result<()> {
        let mut buf = Vec::with_capacity(44 + meta.len() + 8 * self.values.len());
        buf.extend_from_slice(PATH_MAGIC);
        buf.extend_from_slice(&PATH_VERSION.to_le_bytes());
        buf.extend_from_slice(&(meta.len() as u64).to_le_bytes());
        buf.extend_from_slice(meta.as_bytes());
        buf.extend_from_slice(&self.lambda.to_le_bytes());
        buf.extend_from_slice(&self.dt.to_le_bytes());
        buf.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let digest = Sha256::digest(&buf);
        w.write_all(&buf)?;
        w.write_all(&digest)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        Ok(Self::read_with_meta(r)?.1)
    }

    pub fn read_with_meta<R: Read>(mut r: R) -> Result<(String, Self)> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        if buf.len() < 44 + 32 || &buf[..8] != PATH_MAGIC {
            return Err(Error::Format("not a diffusion path file".into()));
        }
        let (body, digest) = buf.split_at(buf.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Format("diffusion path checksum mismatch".into()));
        }
        let word = |o: usize| <[u8; 8]>::try_from(&body[o..o + 8]).unwrap();
        let version = u32::from_le_bytes(body[8..12].try_into().unwrap());
        if version != PATH_VERSION {
            return Err(Error::Format(format!("unsupported path version {version}")));
        }
        let meta_len = u64::from_le_bytes(word(12)) as usize;
        if body.len() < 44 + meta_len {
            return Err(Error::Format("truncated diffusion path header".into()));
        }
        let meta = String::from_utf8(body[20..20 + meta_len].to_vec())
            .map_err(|_| Error::Format("metadata is not UTF-8".into()))?;
        let o = 20 + meta_len;
        let lambda = f64::from_le_bytes(word(o));
        let dt = f64::from_le_bytes(word(o + 8));
        let n = u64::from_le_bytes(word(o + 16)) as usize;
        if body.len() != o + 24 + 8 * n || n == 0 {
            return Err(Error::Format("diffusion path length mismatch".into()));
        }
        let values = (0..n).map(|i| f64::from_le_bytes(word(o + 24 + 8 * i))).collect();
        Ok((meta, Self { lambda, dt, values }))
    }

    /// True if `bytes` starts like a binary path file.
    pub fn is_path_file(bytes: &[u8]) -> bool {
        bytes.starts_with(PATH_MAGIC)
    }
}

const PATH_MAGIC: &[u8; 8] = b"CFPATH\0\0";
const PATH_VERSION: u32 = 1;

fn check_grid(t_max: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && t_max > 0.0 && dt.is_finite() && t_max.is_finite()) {
        return domain("diffusion needs dt > 0 and T > 0");
    }
    Ok((t_max / dt).round().max(1.0) as usize)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn simulate_z<R: Rng + ?Sized>(field: &DriftField, lambda: f64, t_max: f64, dt: f64, rng: &mut R) -> Result<DiffusionPath> {
    Ok(coupled_paths(Some(field), lambda, t_max, dt, rng, false)?.0)
}

pub fn simulate_b<R: Rng + ?Sized>(lambda: f64, t_max: f64, dt: f64, rng: &mut R) -> Result<DiffusionPath> {
    Ok(coupled_paths(None, lambda, t_max, dt, rng, true)?.1.unwrap())
}

/// `(Z, B)` driven by the same Gaussian increments, so `Z <= B` on the grid.
pub fn coupled_zb<R: Rng + ?Sized>(
    field: &DriftField,
    lambda: f64,
    t_max: f64,
    dt: f64,
    rng: &mut R,
) -> Result<(DiffusionPath, DiffusionPath)> {
    let (z, b) = coupled_paths(Some(field), lambda, t_max, dt, rng, true)?;
    Ok((z, b.unwrap()))
}

fn coupled_paths<R: Rng + ?Sized>(
    field: Option<&DriftField>,
    lambda: f64,
    t_max: f64,
    dt: f64,
    rng: &mut R,
    with_b: bool,
) -> Result<(DiffusionPath, Option<DiffusionPath>)> {
    let steps = check_grid(t_max, dt)?;
    let sd = dt.sqrt();
    let mut z = Vec::with_capacity(steps + 1);
    let mut b = Vec::with_capacity(if with_b { steps + 1 } else { 0 });
    z.push(0.0);
    if with_b {
        b.push(0.0);
    }
    let (mut zc, mut bc) = (0.0f64, 0.0f64);
    for i in 0..steps {
        let t = i as f64 * dt;
        let noise = sd * gaussian(rng);
        if let Some(f) = field {
            zc = (zc + f.eval(t, zc, lambda)? * dt + noise).max(0.0);
            z.push(zc);
        }
        if with_b {
            bc = (bc + (lambda - t) * dt + noise).max(0.0);
            b.push(bc);
        }
    }
    let zp = DiffusionPath { lambda, dt, values: z };
    let bp = with_b.then(|| DiffusionPath { lambda, dt, values: b });
    Ok((zp, bp))
}

/// Completed excursions away from 0, in path order and by length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcursionSet {
    /// `(start, end)` in time order.
    pub intervals: Vec<(f64, f64)>,
    /// Lengths, non-increasing.
    pub lengths: Vec<f64>,
}

/// Maximal runs of positive values bracketed by grid zeros. A run still open
/// at the horizon is dropped.
pub fn diffusion_excursions(path: &DiffusionPath, min_length: f64) -> ExcursionSet {
    let dt = path.dt;
    let mut intervals = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &v) in path.values.iter().enumerate() {
        if v > 0.0 {
            if start.is_none() {
                start = Some(i - 1);
            }
        } else if let Some(s) = start.take() {
            let (a, b) = (s as f64 * dt, i as f64 * dt);
            if b - a >= min_length - 1e-12 * dt {
                intervals.push((a, b));
            }
        }
    }
    let mut lengths: Vec<f64> = intervals.iter().map(|(a, b)| b - a).collect();
    lengths.sort_by(|a, b| b.total_cmp(a));
    ExcursionSet { intervals, lengths }
}

/// Normalised Brownian excursion on `[0, 1]` at `steps + 1` grid points,
/// as the norm of a three-dimensional Brownian bridge.
pub fn sample_brownian_excursion<R: Rng + ?Sized>(steps: usize, rng: &mut R) -> Result<Vec<f64>> {
    if steps == 0 {
        return domain("excursion needs at least one step");
    }
    let sd = (1.0 / steps as f64).sqrt();
    let mut walks = vec![[0.0f64; 3]; steps + 1];
    for i in 1..=steps {
        for d in 0..3 {
            walks[i][d] = walks[i - 1][d] + sd * gaussian(rng);
        }
    }
    let end = walks[steps];
    Ok(walks
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let s = i as f64 / steps as f64;
            (0..3).map(|d| (w[d] - s * end[d]).powi(2)).sum::<f64>().sqrt()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::root_stream;

    #[test]
    fn drift_at_boundary_and_sign() {
        let f = DriftField::direct();
        assert_eq!(f.eval(0.3, 0.0, 1.0).unwrap(), 0.7);
        let mut prev = f64::INFINITY;
        for z in [0.1, 0.5, 1.0, 2.0] {
            let d = f.eval(0.5, z, 0.0).unwrap();
            assert!(d <= -0.5 && d < prev);
            prev = d;
        }
        assert!(f.eval(0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn excursion_extraction() {
        let flat = DiffusionPath { lambda: 0.0, dt: 0.1, values: vec![0.0; 10] };
        assert!(diffusion_excursions(&flat, 0.2).lengths.is_empty());
        let bump = DiffusionPath { lambda: 0.0, dt: 0.5, values: vec![0.0, 0.0, 1.0, 2.0, 1.0, 0.0, 0.0, 3.0] };
        let e = diffusion_excursions(&bump, 1.0);
        assert_eq!(e.intervals, vec![(0.5, 2.5)]);
        assert_eq!(e.lengths, vec![2.0]);
    }

    #[test]
    fn b_replays_and_stays_nonnegative() {
        let a = simulate_b(0.0, 2.0, 1e-3, &mut root_stream(4)).unwrap();
        let b = simulate_b(0.0, 2.0, 1e-3, &mut root_stream(4)).unwrap();
        assert_eq!(a, b);
        assert!(a.values.iter().all(|&v| v >= 0.0));
        assert_eq!(a.values.len(), 2001);
    }

    #[test]
    fn path_roundtrip() {
        let p = DiffusionPath { lambda: -1.5, dt: 0.01, values: vec![0.0, 0.2, 0.0] };
        let mut buf = Vec::new();
        p.write_to(&mut buf).unwrap();
        assert_eq!(DiffusionPath::read_from(&buf[..]).unwrap(), p);
        let n = buf.len();
        buf[n - 40] ^= 1;
        assert!(DiffusionPath::read_from(&buf[..]).is_err());
        let mut buf = Vec::new();
        p.write_with_meta("{}", &mut buf).unwrap();
        assert_eq!(DiffusionPath::read_with_meta(&buf[..]).unwrap(), ("{}".to_string(), p));
    }

    #[test]
    fn excursion_endpoints() {
        let e = sample_brownian_excursion(100, &mut root_stream(1)).unwrap();
        assert_eq!(e[0], 0.0);
        assert!(e[100].abs() < 1e-12);
        assert!(e.iter().all(|&v| v >= 0.0));
    }
}
