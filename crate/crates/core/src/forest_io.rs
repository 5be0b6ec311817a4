//! Forest files.
//!
//! Text: one block per forest, `forest <N> <m>` followed by `m` lines `u v`
//! with 0-based labels. Lines starting with `#` are comments.
//!
//! Binary: magic `CFFOREST`, `u32` version, `u64` forest count, a `u64`
//! length-prefixed UTF-8 metadata block, then per forest `u64` N and `u64` m
//! followed by the canonical edge list as LEB128 varints `(u - u_prev, v - u)`,
//! and a SHA-256 trailer over everything before it.

use crate::error::{Error, Result};
use crate::graph::{Forest, Graph};
use sha2::{Digest, Sha256};
use std::io::{BufRead, Read, Write};

const MAGIC: &[u8; 8] = b"CFFOREST";
const VERSION: u32 = 1;

pub fn write_text<W: Write>(forests: &[Forest], mut w: W) -> Result<()> {
    for f in forests {
        writeln!(w, "forest {} {}", f.n_vertices(), f.edge_count())?;
        for (u, v) in f.graph().canonical_edges() {
            writeln!(w, "{u} {v}")?;
        }
    }
    Ok(())
}

pub fn read_text<R: BufRead>(r: R) -> Result<Vec<Forest>> {
    let mut out = Vec::new();
    let mut current: Option<(usize, usize, Vec<(u32, u32)>)> = None;
    let parse = |s: &str, line: usize| -> Result<u64> {
        s.parse().map_err(|_| Error::Format(format!("line {line}: expected an integer, got {s:?}")))
    };
    let finish = |c: (usize, usize, Vec<(u32, u32)>), out: &mut Vec<Forest>| -> Result<()> {
        let (n, m, edges) = c;
        if edges.len() != m {
            return Err(Error::Format(format!("forest declares {m} edges, found {}", edges.len())));
        }
        out.push(Forest::new(Graph::from_edges(n, edges)?)?);
        Ok(())
    };
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts.as_slice() {
            ["forest", n, m] => {
                if let Some(c) = current.take() {
                    finish(c, &mut out)?;
                }
                current = Some((parse(n, i + 1)? as usize, parse(m, i + 1)? as usize, Vec::new()));
            }
            [u, v] => {
                let c = current.as_mut().ok_or_else(|| Error::Format(format!("line {}: edge before header", i + 1)))?;
                let (u, v) = (parse(u, i + 1)?, parse(v, i + 1)?);
                if u > u32::MAX as u64 || v > u32::MAX as u64 {
                    return Err(Error::Format(format!("line {}: label out of range", i + 1)));
                }
                c.2.push((u as u32, v as u32));
            }
            _ => return Err(Error::Format(format!("line {}: cannot parse {line:?}", i + 1))),
        }
    }
    if let Some(c) = current.take() {
        finish(c, &mut out)?;
    }
    Ok(out)
}

fn put_varint(buf: &mut Vec<u8>, mut x: u64) {
    while x >= 0x80 {
        buf.push((x as u8) | 0x80);
        x >>= 7;
    }
    buf.push(x as u8);
}

fn get_varint(buf: &[u8], pos: &mut usize) -> Result<u64> {
    let mut x = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *buf.get(*pos).ok_or_else(|| Error::Format("truncated varint".into()))?;
        *pos += 1;
        x |= u64::from(b & 0x7f) << shift;
        if b & 0x80 == 0 {
            return Ok(x);
        }
    }
    Err(Error::Format("varint overflow".into()))
}

pub fn write_binary<W: Write>(forests: &[Forest], w: W) -> Result<()> {
    write_binary_with_meta(forests, "", w)
}

/// Binary file carrying `meta` (typically a JSON manifest) alongside the forests.
pub fn write_binary_with_meta<W: Write>(forests: &[Forest], meta: &str, mut w: W) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(forests.len() as u64).to_le_bytes());
    buf.extend_from_slice(&(meta.len() as u64).to_le_bytes());
    buf.extend_from_slice(meta.as_bytes());
    for f in forests {
        buf.extend_from_slice(&(f.n_vertices() as u64).to_le_bytes());
        buf.extend_from_slice(&(f.edge_count() as u64).to_le_bytes());
        let mut prev = 0u32;
        for (u, v) in f.graph().canonical_edges() {
            put_varint(&mut buf, u64::from(u - prev));
            put_varint(&mut buf, u64::from(v - u));
            prev = u;
        }
    }
    let digest = Sha256::digest(&buf);
    w.write_all(&buf)?;
    w.write_all(&digest)?;
    Ok(())
}

pub fn read_binary<R: Read>(r: R) -> Result<Vec<Forest>> {
    Ok(read_binary_with_meta(r)?.1)
}

/// True if `bytes` starts like a binary forest file.
pub fn is_binary(bytes: &[u8]) -> bool {
    bytes.starts_with(MAGIC)
}

pub fn read_binary_with_meta<R: Read>(mut r: R) -> Result<(String, Vec<Forest>)> {
    let mut all = Vec::new();
    r.read_to_end(&mut all)?;
    if all.len() < 20 + 32 || &all[..8] != MAGIC {
        return Err(Error::Format("not a forest file".into()));
    }
    let (buf, digest) = all.split_at(all.len() - 32);
    if Sha256::digest(buf).as_slice() != digest {
        return Err(Error::Format("forest file checksum mismatch".into()));
    }
    let version = u32::from_le_bytes(buf[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported forest file version {version}")));
    }
    let count = u64::from_le_bytes(buf[12..20].try_into().unwrap());
    let mut pos = 20;
    let word = |pos: &mut usize| -> Result<u64> {
        let b = buf.get(*pos..*pos + 8).ok_or_else(|| Error::Format("truncated forest header".into()))?;
        *pos += 8;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    };
    let meta_len = word(&mut pos)? as usize;
    let meta = buf
        .get(pos..pos.saturating_add(meta_len))
        .ok_or_else(|| Error::Format("truncated metadata".into()))?;
    let meta = String::from_utf8(meta.to_vec()).map_err(|_| Error::Format("metadata is not UTF-8".into()))?;
    pos += meta_len;
    let mut out = Vec::new();
    for _ in 0..count {
        let n = word(&mut pos)? as usize;
        let m = word(&mut pos)? as usize;
        if m >= n.max(1) {
            return Err(Error::Format(format!("forest header claims {m} edges on {n} vertices")));
        }
        let mut edges = Vec::with_capacity(m);
        let mut u = 0u64;
        for _ in 0..m {
            u += get_varint(buf, &mut pos)?;
            let v = u + get_varint(buf, &mut pos)?;
            if v >= n as u64 {
                return Err(Error::Format("edge label out of range".into()));
            }
            edges.push((u as u32, v as u32));
        }
        out.push(Forest::new(Graph::from_edges(n, edges)?)?);
    }
    if pos != buf.len() {
        return Err(Error::Format("trailing bytes in forest file".into()));
    }
    Ok((meta, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Forest> {
        vec![
            Forest::new(Graph::from_edges(6, [(0, 3), (3, 5), (1, 2)]).unwrap()).unwrap(),
            Forest::empty(3),
            Forest::new(Graph::from_edges(300, [(0, 299), (200, 201)]).unwrap()).unwrap(),
        ]
    }

    #[test]
    fn text_roundtrip() {
        let mut buf = Vec::new();
        write_text(&sample(), &mut buf).unwrap();
        let back = read_text(&buf[..]).unwrap();
        for (a, b) in back.iter().zip(sample()) {
            assert_eq!(a.graph().canonical_edges(), b.graph().canonical_edges());
            assert_eq!(a.n_vertices(), b.n_vertices());
        }
        assert!(read_text("forest 3 2\n0 1\n1 2\n2 0\n".as_bytes()).is_err());
        assert!(read_text("0 1\n".as_bytes()).is_err());
        assert!(read_text("forest 3 3\n0 1\n1 2\n2 0\n".as_bytes()).is_err());
    }

    #[test]
    fn binary_roundtrip_and_checksum() {
        let mut buf = Vec::new();
        write_binary(&sample(), &mut buf).unwrap();
        let back = read_binary(&buf[..]).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[2].graph().canonical_edges(), vec![(0, 299), (200, 201)]);
        buf[29] ^= 0x40;
        assert!(matches!(read_binary(&buf[..]), Err(Error::Format(_))));

        let mut buf = Vec::new();
        write_binary_with_meta(&sample()[..1], "{\"seed\":3}", &mut buf).unwrap();
        assert!(is_binary(&buf));
        let (meta, back) = read_binary_with_meta(&buf[..]).unwrap();
        assert_eq!(meta, "{\"seed\":3}");
        assert_eq!(back.len(), 1);
    }
}
