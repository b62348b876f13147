//! Eigenfunction basis over a uniform wavenumber grid, with a binary cache.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::band::LinearProblem;
use super::grid::RadialGrid;
use super::modes::{EigenMode, Profiles, C64};
use crate::error::{Error, Result};

pub const CACHE_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"NLWB";

/// Uniform symmetric wavenumber grid `k_j = -k_max + j dk`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub dk: f64,
    /// Number of positive grid points; `k_max = half * dk`.
    pub half: usize,
}

impl KGrid {
    pub fn new(dk: f64, k_max: f64) -> Result<Self> {
        if !(dk > 0.0) || !(k_max > 0.0) {
            return Err(Error::Config(format!("need dk > 0 and k_max > 0 (dk={dk}, k_max={k_max})")));
        }
        let ratio = k_max / dk;
        let half = ratio.round();
        if (ratio - half).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(format!("k_max={k_max} is not a multiple of dk={dk}")));
        }
        Ok(Self { dk, half: half as usize })
    }

    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k_max(&self) -> f64 {
        self.half as f64 * self.dk
    }

    /// Signed grid index `n` with `k = n dk`.
    pub fn k_of(&self, n: i64) -> f64 {
        n as f64 * self.dk
    }

    /// Storage index of signed index `n`.
    pub fn slot(&self, n: i64) -> usize {
        (n + self.half as i64) as usize
    }

    pub fn signed(&self, slot: usize) -> i64 {
        slot as i64 - self.half as i64
    }

    pub fn contains_index(&self, n: i64) -> bool {
        n.unsigned_abs() as usize <= self.half
    }

    /// Signed index for an on-grid wavenumber.
    pub fn index_of(&self, k: f64) -> Option<i64> {
        let x = k / self.dk;
        let n = x.round();
        if (x - n).abs() > 1e-9 || n.abs() > self.half as f64 {
            None
        } else {
            Some(n as i64)
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|s| self.k_of(self.signed(s))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisKey {
    pub h: f64,
    pub reynolds: f64,
    pub dk: f64,
    pub half: usize,
    pub modes: usize,
    pub n_r: usize,
    pub version: u32,
}

impl BasisKey {
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for v in [self.h, self.reynolds, self.dk] {
            hasher.update(v.to_le_bytes());
        }
        for v in [self.half as u64, self.modes as u64, self.n_r as u64, self.version as u64] {
            hasher.update(v.to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn file_name(&self) -> String {
        format!("basis-{}.bin", self.digest())
    }
}

/// Per-wavenumber eigenmodes; entries at `-k` are conjugates of those at `k`.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub key: BasisKey,
    pub kgrid: KGrid,
    pub grid: RadialGrid,
    /// `modes[slot][m - 1]`
    pub modes: Vec<Vec<EigenMode>>,
}

impl EigenBasis {
    pub fn build(problem: &LinearProblem, kgrid: KGrid, count: usize) -> Result<Self> {
        let mut positive = Vec::with_capacity(kgrid.half + 1);
        for n in 0..=kgrid.half as i64 {
            let k = kgrid.k_of(n);
            positive.push(problem.modes(k, count)?);
        }
        Ok(Self::from_nonnegative(problem, kgrid, count, positive))
    }

    fn from_nonnegative(problem: &LinearProblem, kgrid: KGrid, count: usize, positive: Vec<Vec<EigenMode>>) -> Self {
        let mut modes = Vec::with_capacity(kgrid.len());
        for slot in 0..kgrid.len() {
            let n = kgrid.signed(slot);
            let src = &positive[n.unsigned_abs() as usize];
            if n >= 0 {
                modes.push(src.clone());
            } else {
                modes.push(src.iter().map(EigenMode::conjugate).collect());
            }
        }
        Self {
            key: BasisKey {
                h: problem.profile.geometry.h,
                reynolds: problem.profile.reynolds,
                dk: kgrid.dk,
                half: kgrid.half,
                modes: count,
                n_r: problem.grid.n_r,
                version: CACHE_FORMAT_VERSION,
            },
            kgrid,
            grid: problem.grid.clone(),
            modes,
        }
    }

    pub fn mode_count(&self) -> usize {
        self.key.modes
    }

    pub fn mode(&self, n: i64, m: usize) -> &EigenMode {
        &self.modes[self.kgrid.slot(n)][m - 1]
    }

    pub fn at(&self, n: i64) -> &[EigenMode] {
        &self.modes[self.kgrid.slot(n)]
    }

    /// Largest `|omega|` across the basis.
    pub fn max_frequency(&self) -> f64 {
        self.modes
            .iter()
            .flatten()
            .map(|m| m.omega.norm())
            .fold(0.0, f64::max)
    }

    /// Loads a cached basis when the key matches, otherwise builds and stores it.
    pub fn load_or_build(problem: &LinearProblem, kgrid: KGrid, count: usize, cache_dir: Option<&Path>) -> Result<Self> {
        let key = BasisKey {
            h: problem.profile.geometry.h,
            reynolds: problem.profile.reynolds,
            dk: kgrid.dk,
            half: kgrid.half,
            modes: count,
            n_r: problem.grid.n_r,
            version: CACHE_FORMAT_VERSION,
        };
        if let Some(dir) = cache_dir {
            let path = dir.join(key.file_name());
            if path.exists() {
                match Self::read_cache(&path, problem) {
                    Ok(b) if b.key == key => {
                        log::info!("loaded eigenbasis from {}", path.display());
                        return Ok(b);
                    }
                    Ok(_) => log::warn!("cache key mismatch in {}, rebuilding", path.display()),
                    Err(e) => log::warn!("unreadable cache {} ({e}), rebuilding", path.display()),
                }
            }
        }
        log::info!("building eigenbasis: {} wavenumbers x {count} modes, n_r={}", kgrid.len(), problem.grid.n_r);
        let basis = Self::build(problem, kgrid, count)?;
        if let Some(dir) = cache_dir {
            std::fs::create_dir_all(dir)?;
            basis.write_cache(&dir.join(key.file_name()))?;
        }
        Ok(basis)
    }

    pub fn cache_path(&self, dir: &Path) -> PathBuf {
        dir.join(self.key.file_name())
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        let k = &self.key;
        w.write_u32::<LittleEndian>(k.version)?;
        w.write_f64::<LittleEndian>(k.h)?;
        w.write_f64::<LittleEndian>(k.reynolds)?;
        w.write_f64::<LittleEndian>(k.dk)?;
        for v in [k.half, k.modes, k.n_r] {
            w.write_u64::<LittleEndian>(v as u64)?;
        }
        for n in 0..=self.kgrid.half as i64 {
            for mode in self.at(n) {
                write_c64(&mut w, mode.omega)?;
                for p in [&mode.profile, &mode.adjoint] {
                    for f in [&p.u, &p.v, &p.w, &p.du, &p.dv, &p.dw] {
                        for z in f {
                            write_c64(&mut w, *z)?;
                        }
                    }
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a cache file; the caller compares the returned key.
    pub fn read_cache(path: &Path, problem: &LinearProblem) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Config(format!("{} is not a basis cache", path.display())));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != CACHE_FORMAT_VERSION {
            return Err(Error::Config(format!("cache format version {version} unsupported")));
        }
        let h = r.read_f64::<LittleEndian>()?;
        let reynolds = r.read_f64::<LittleEndian>()?;
        let dk = r.read_f64::<LittleEndian>()?;
        let half = r.read_u64::<LittleEndian>()? as usize;
        let count = r.read_u64::<LittleEndian>()? as usize;
        let n_r = r.read_u64::<LittleEndian>()? as usize;
        let key = BasisKey {
            h,
            reynolds,
            dk,
            half,
            modes: count,
            n_r,
            version,
        };
        if n_r != problem.grid.n_r || h != problem.profile.geometry.h || reynolds != problem.profile.reynolds {
            // Different problem: report the stored key without parsing the body.
            return Ok(Self {
                key,
                kgrid: KGrid { dk, half },
                grid: problem.grid.clone(),
                modes: Vec::new(),
            });
        }
        let kgrid = KGrid { dk, half };
        let mut positive = Vec::with_capacity(half + 1);
        for n in 0..=half as i64 {
            let mut at_k = Vec::with_capacity(count);
            for m in 1..=count {
                let omega = read_c64(&mut r)?;
                let mut read_profiles = || -> Result<Profiles> {
                    let mut f = || -> Result<Vec<C64>> { (0..n_r).map(|_| read_c64(&mut r).map_err(Error::from)).collect() };
                    Ok(Profiles {
                        u: f()?,
                        v: f()?,
                        w: f()?,
                        du: f()?,
                        dv: f()?,
                        dw: f()?,
                    })
                };
                let profile = read_profiles()?;
                let adjoint = read_profiles()?;
                at_k.push(EigenMode {
                    k: kgrid.k_of(n),
                    m,
                    omega,
                    profile,
                    adjoint,
                });
            }
            positive.push(at_k);
        }
        let mut basis = Self::from_nonnegative(problem, kgrid, count, positive);
        basis.key = key;
        Ok(basis)
    }
}

fn write_c64<W: Write>(w: &mut W, z: C64) -> std::io::Result<()> {
    w.write_f64::<LittleEndian>(z.re)?;
    w.write_f64::<LittleEndian>(z.im)
}

fn read_c64<R: Read>(r: &mut R) -> std::io::Result<C64> {
    let re = r.read_f64::<LittleEndian>()?;
    let im = r.read_f64::<LittleEndian>()?;
    Ok(C64::new(re, im))
}

/// Radial grid accessor used by downstream modules.
impl AsRef<RadialGrid> for EigenBasis {
    fn as_ref(&self) -> &RadialGrid {
        &self.grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kgrid_arithmetic() {
        let g = KGrid::new(0.25, 12.0).unwrap();
        assert_eq!(g.half, 48);
        assert_eq!(g.len(), 97);
        assert_eq!(g.index_of(3.0), Some(12));
        assert_eq!(g.index_of(-3.25), Some(-13));
        assert_eq!(g.index_of(3.1), None);
        assert_eq!(g.index_of(12.25), None);
        assert_eq!(g.signed(g.slot(-7)), -7);
        assert!(KGrid::new(0.25, 12.1).is_err());
        assert!(KGrid::new(0.0, 1.0).is_err());
    }

    fn small() -> (LinearProblem, KGrid) {
        (LinearProblem::new(0.5, 88.1, 20).unwrap(), KGrid::new(1.0, 2.0).unwrap())
    }

    #[test]
    fn negative_k_modes_are_conjugates() {
        let (p, g) = small();
        let b = EigenBasis::build(&p, g, 3).unwrap();
        for m in 1..=3 {
            assert_eq!(b.mode(-2, m).omega, -b.mode(2, m).omega.conj());
            assert_eq!(b.mode(-2, m).profile, b.mode(2, m).profile.conj());
        }
    }

    #[test]
    fn cache_round_trip_and_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (p, g) = small();
        let b = EigenBasis::load_or_build(&p, g, 3, Some(dir.path())).unwrap();
        let path = b.cache_path(dir.path());
        assert!(path.exists());
        let c = EigenBasis::read_cache(&path, &p).unwrap();
        assert_eq!(c.key, b.key);
        assert_eq!(c.modes, b.modes);
        let other = LinearProblem::new(0.5, 90.0, 20).unwrap();
        let d = EigenBasis::load_or_build(&other, g, 3, Some(dir.path())).unwrap();
        assert_ne!(d.key.digest(), b.key.digest());
        std::fs::write(&path, b"garbage").unwrap();
        let e = EigenBasis::load_or_build(&p, g, 3, Some(dir.path())).unwrap();
        assert_eq!(e.modes, b.modes);
    }
}
