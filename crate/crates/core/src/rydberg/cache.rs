//! Memory and disk cache of radial multipole integrals.
//!
//! One file per molecule distance R:
//! `magic "PMRI" | version u32 | fingerprint u64 | R f64 | count u64 | records`,
//! each record `n1 l1 n2 l2 λ` as u32 followed by the inner and outer
//! integrals as f64, all little endian. The fingerprint covers species
//! parameters, grid and high-l potential choice; a mismatch discards the file.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

const MAGIC: &[u8; 4] = b"PMRI";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegralKey {
    pub n1: u32,
    pub l1: u32,
    pub n2: u32,
    pub l2: u32,
    pub lambda: u32,
    pub r_bits: u64,
}

impl IntegralKey {
    pub fn new(n1: u32, l1: u32, n2: u32, l2: u32, lambda: u32, big_r: f64) -> Self {
        Self { n1, l1, n2, l2, lambda, r_bits: big_r.to_bits() }
    }
}

#[derive(Debug)]
pub struct IntegralCache {
    dir: Option<PathBuf>,
    fingerprint: u64,
    table: RwLock<HashMap<IntegralKey, (f64, f64)>>,
    loaded: Mutex<HashSet<u64>>,
    write_lock: Mutex<()>,
}

impl IntegralCache {
    pub fn in_memory(fingerprint: u64) -> Self {
        Self { dir: None, fingerprint, table: RwLock::default(), loaded: Mutex::default(), write_lock: Mutex::new(()) }
    }

    pub fn on_disk(dir: impl Into<PathBuf>, fingerprint: u64) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir: Some(dir), ..Self::in_memory(fingerprint) })
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn len(&self) -> usize {
        self.table.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn path_for(&self, r_bits: u64) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("ri_{:016x}_{:016x}.bin", self.fingerprint, r_bits)))
    }

    fn ensure_loaded(&self, r_bits: u64) {
        let Some(path) = self.path_for(r_bits) else { return };
        let mut loaded = self.loaded.lock().unwrap();
        if !loaded.insert(r_bits) {
            return;
        }
        if let Ok(records) = read_file(&path, self.fingerprint, r_bits) {
            let mut t = self.table.write().unwrap();
            for (k, v) in records {
                t.entry(k).or_insert(v);
            }
        }
    }

    pub fn get(&self, key: &IntegralKey) -> Option<(f64, f64)> {
        self.ensure_loaded(key.r_bits);
        self.table.read().unwrap().get(key).copied()
    }

    pub fn insert(&self, key: IntegralKey, value: (f64, f64)) {
        self.table.write().unwrap().insert(key, value);
    }

    pub fn get_or_compute<E>(&self, key: IntegralKey, compute: impl FnOnce() -> Result<(f64, f64), E>) -> Result<(f64, f64), E> {
        if let Some(v) = self.get(&key) {
            return Ok(v);
        }
        let v = compute()?;
        self.insert(key, v);
        Ok(v)
    }

    /// Writes every entry at distance `big_r` to disk. No-op in memory mode.
    pub fn persist(&self, big_r: f64) -> io::Result<()> {
        let r_bits = big_r.to_bits();
        let Some(path) = self.path_for(r_bits) else { return Ok(()) };
        let mut records: Vec<(IntegralKey, (f64, f64))> =
            self.table.read().unwrap().iter().filter(|(k, _)| k.r_bits == r_bits).map(|(k, v)| (*k, *v)).collect();
        records.sort_by_key(|(k, _)| *k);
        let mut buf = Vec::with_capacity(32 + records.len() * 36);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&self.fingerprint.to_le_bytes());
        buf.extend_from_slice(&r_bits.to_le_bytes());
        buf.extend_from_slice(&(records.len() as u64).to_le_bytes());
        for (k, (a, b)) in &records {
            for v in [k.n1, k.l1, k.n2, k.l2, k.lambda] {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            buf.extend_from_slice(&a.to_le_bytes());
            buf.extend_from_slice(&b.to_le_bytes());
        }
        let _guard = self.write_lock.lock().unwrap();
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&buf)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)
    }
}

fn read_file(path: &Path, fingerprint: u64, r_bits: u64) -> io::Result<Vec<(IntegralKey, (f64, f64))>> {
    let mut data = Vec::new();
    fs::File::open(path)?.read_to_end(&mut data)?;
    let bad = || io::Error::new(io::ErrorKind::InvalidData, "stale or corrupt integral cache");
    if data.len() < 32 || &data[..4] != MAGIC {
        return Err(bad());
    }
    let u32_at = |o: usize| u32::from_le_bytes(data[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(data[o..o + 8].try_into().unwrap());
    if u32_at(4) != VERSION || u64_at(8) != fingerprint || u64_at(16) != r_bits {
        return Err(bad());
    }
    let count = u64_at(24) as usize;
    if data.len() != 32 + count * 36 {
        return Err(bad());
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let o = 32 + i * 36;
        let key = IntegralKey { n1: u32_at(o), l1: u32_at(o + 4), n2: u32_at(o + 8), l2: u32_at(o + 12), lambda: u32_at(o + 16), r_bits };
        out.push((key, (f64::from_bits(u64_at(o + 20)), f64::from_bits(u64_at(o + 28)))));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let k = IntegralKey::new(20, 3, 20, 4, 1, 600.0);
        {
            let c = IntegralCache::on_disk(dir.path(), 7).unwrap();
            c.insert(k, (1.5, -2.25));
            c.persist(600.0).unwrap();
        }
        let c = IntegralCache::on_disk(dir.path(), 7).unwrap();
        assert_eq!(c.get(&k), Some((1.5, -2.25)));
        // another fingerprint ignores the file
        let c = IntegralCache::on_disk(dir.path(), 8).unwrap();
        assert_eq!(c.get(&k), None);
    }

    #[test]
    fn corrupt_file_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let c = IntegralCache::on_disk(dir.path(), 1).unwrap();
        let k = IntegralKey::new(20, 3, 20, 3, 0, 100.0);
        fs::write(c.path_for(k.r_bits).unwrap(), b"PMRI garbage").unwrap();
        assert_eq!(c.get(&k), None);
        let v: Result<_, ()> = c.get_or_compute(k, || Ok((1.0, 0.0)));
        assert_eq!(v, Ok((1.0, 0.0)));
    }
}
