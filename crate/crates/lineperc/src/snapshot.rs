//! `LPF1` configuration snapshots and plain-text path dumps.
//!
//! Snapshot layout, all integers little-endian:
//!
//! ```text
//! b"LPF1"  u32 d  u32 radius  i64×d center  u64 master  u64 replica  f64×d p
//! then per axis: i64×(d-1) lo  i64×(d-1) hi  u64 word count  u64×count words
//! ```

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use lineperc_core::lattice::MAX_D;
use lineperc_core::path::Site;
use lineperc_core::{BoxRegion, Configuration, ParamVector, PlaneField, SeedSpec, Window};

const MAGIC: &[u8; 4] = b"LPF1";

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub params: ParamVector,
    pub seed: SeedSpec,
    pub config: Configuration,
}

impl Snapshot {
    pub fn sample(params: ParamVector, region: BoxRegion, seed: SeedSpec) -> Result<Self> {
        let config = Configuration::sample(&params, region, seed)?;
        Ok(Snapshot { params, seed, config })
    }
}

pub fn write_snapshot(mut w: impl Write, s: &Snapshot) -> Result<()> {
    let region = s.config.region();
    let d = region.d();
    w.write_all(MAGIC)?;
    w.write_all(&(d as u32).to_le_bytes())?;
    w.write_all(&(region.side() as u32 / 2).to_le_bytes())?;
    for &c in region.window().lo().iter().zip(region.window().hi()).map(|(a, b)| (a + b) / 2).collect::<Vec<_>>().iter() {
        w.write_all(&c.to_le_bytes())?;
    }
    w.write_all(&s.seed.master.to_le_bytes())?;
    w.write_all(&s.seed.replica.to_le_bytes())?;
    for &p in s.params.p() {
        w.write_all(&p.to_le_bytes())?;
    }
    for f in s.config.fields() {
        for &x in f.window().lo().iter().chain(f.window().hi()) {
            w.write_all(&x.to_le_bytes())?;
        }
        w.write_all(&(f.words().len() as u64).to_le_bytes())?;
        for word in f.words() {
            w.write_all(&word.to_le_bytes())?;
        }
    }
    Ok(())
}

fn take<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).context("truncated snapshot")?;
    Ok(b)
}

fn u64_(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(take(r)?))
}

fn i64_(r: &mut impl Read) -> Result<i64> {
    Ok(i64::from_le_bytes(take(r)?))
}

pub fn read_snapshot(mut r: impl Read) -> Result<Snapshot> {
    ensure!(&take::<4>(&mut r)? == MAGIC, "not an LPF1 snapshot");
    let d = u32::from_le_bytes(take(&mut r)?) as usize;
    ensure!((3..=MAX_D).contains(&d), "dimension {d} out of range");
    let radius = u32::from_le_bytes(take(&mut r)?);
    let center = (0..d).map(|_| i64_(&mut r)).collect::<Result<Vec<_>>>()?;
    let seed = SeedSpec::new(u64_(&mut r)?, u64_(&mut r)?);
    let p = (0..d).map(|_| Ok(f64::from_le_bytes(take(&mut r)?))).collect::<Result<Vec<_>>>()?;
    let params = ParamVector::new(p)?;
    let region = BoxRegion::new(center, radius);
    let mut fields = Vec::with_capacity(d);
    for axis in 0..d {
        let lo = (0..d - 1).map(|_| i64_(&mut r)).collect::<Result<Vec<_>>>()?;
        let hi = (0..d - 1).map(|_| i64_(&mut r)).collect::<Result<Vec<_>>>()?;
        let window = Window::new(lo, hi)?;
        let count = u64_(&mut r)? as usize;
        let expect = (window.volume() as usize).div_ceil(64);
        ensure!(count == expect, "axis {axis}: {count} words, expected {expect}");
        let words = (0..count).map(|_| u64_(&mut r)).collect::<Result<Vec<_>>>()?;
        fields.push(PlaneField::from_words(axis, window, words)?);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    ensure!(rest.is_empty(), "{} trailing bytes after snapshot", rest.len());
    let config = Configuration::from_fields(region, fields)?;
    Ok(Snapshot { params, seed, config })
}

pub fn save_snapshot(path: &Path, s: &Snapshot) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?);
    write_snapshot(&mut f, s)?;
    f.flush()?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<Snapshot> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_snapshot(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))
}

/// One site per line, `x y z`.
pub fn write_path(mut w: impl Write, sites: &[Site]) -> Result<()> {
    for v in sites {
        writeln!(w, "{} {} {}", v[0], v[1], v[2])?;
    }
    Ok(())
}

pub fn read_path(r: impl BufRead) -> Result<Vec<Site>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Vec<i64> = line
            .split_whitespace()
            .map(|t| t.parse().with_context(|| format!("line {}: bad integer {t:?}", i + 1)))
            .collect::<Result<_>>()?;
        if v.len() != 3 {
            bail!("line {}: expected 3 coordinates, got {}", i + 1, v.len());
        }
        out.push([v[0], v[1], v[2]]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        for d in [3, 4] {
            let params = ParamVector::new(vec![0.6, 0.7, 0.8, 0.9][..d].to_vec()).unwrap();
            let mut center = vec![0; d];
            center[0] = -2;
            let s = Snapshot::sample(params, BoxRegion::new(center, 5), SeedSpec::new(8, 3)).unwrap();
            let mut buf = Vec::new();
            write_snapshot(&mut buf, &s).unwrap();
            let back = read_snapshot(&buf[..]).unwrap();
            assert_eq!(back.config.region(), s.config.region());
            assert_eq!(back.config.fields(), s.config.fields());
            assert_eq!(back.params, s.params);
            assert_eq!(back.seed, s.seed);
            assert!(read_snapshot(&buf[..buf.len() - 1]).is_err());
            let mut extra = buf.clone();
            extra.push(0);
            assert!(read_snapshot(&extra[..]).is_err());
            let mut bad = buf.clone();
            bad[0] = b'X';
            assert!(read_snapshot(&bad[..]).is_err());
        }
    }

    #[test]
    fn path_dump_round_trip() {
        let p = vec![[0, 0, 0], [1, 0, 0], [1, -1, 0]];
        let mut buf = Vec::new();
        write_path(&mut buf, &p).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0 0 0\n1 0 0\n1 -1 0\n");
        assert_eq!(read_path(&buf[..]).unwrap(), p);
        assert!(read_path(&b"1 2\n"[..]).is_err());
    }
}
