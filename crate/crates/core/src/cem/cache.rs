//! Binary cache of a multiscale basis, keyed by a digest of everything that
//! determines it.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use faer::Mat;
use sha2::{Digest, Sha256};

use super::{MultiscaleSpace, RegionBasis, SampleSet};
use crate::error::{Error, Result};
use crate::mesh::{CoarsePartition, StructuredGrid};

const MAGIC: &[u8; 8] = b"RCEMBAS1";
const VERSION: u32 = 1;

/// Digest of a free-form description of the run and the sample states.
pub fn content_hash(description: &str, samples: &SampleSet) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((description.len() as u64).to_le_bytes());
    h.update(description.as_bytes());
    for (state, w) in samples.iter() {
        h.update(w.to_le_bytes());
        for v in state.values.iter().flatten() {
            h.update(v.to_le_bytes());
        }
    }
    h.finalize().into()
}

pub fn save_space(path: &Path, space: &MultiscaleSpace, hash: &[u8; 32]) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(hash);
    for v in [space.n, space.hdiv, space.layers, space.continua, space.regions.len()] {
        buf.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for r in &space.regions {
        for v in [r.block, r.rect.0, r.rect.1, r.rect.2, r.rect.3, r.values.nrows(), r.values.ncols()] {
            buf.extend_from_slice(&(v as u64).to_le_bytes());
        }
        for c in 0..r.values.ncols() {
            for i in 0..r.values.nrows() {
                buf.extend_from_slice(&r.values[(i, c)].to_le_bytes());
            }
        }
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::File::create(&tmp)?.write_all(&buf)?;
    fs::rename(tmp, path)?;
    Ok(())
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.0.len() < n {
            return Err(Error::Cache("file is truncated".into()));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u64(&mut self) -> Result<usize> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Loads a cached basis. Returns `None` when the file is missing or was
/// written for different inputs.
pub fn load_space(
    path: &Path,
    grid: &StructuredGrid,
    partition: &CoarsePartition,
    layers: usize,
    continua: usize,
    hash: &[u8; 32],
) -> Result<Option<MultiscaleSpace>> {
    let mut bytes = Vec::new();
    match fs::File::open(path) {
        Ok(mut f) => f.read_to_end(&mut bytes)?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut r = Reader(&bytes);
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Cache(format!("{} is not a basis cache", path.display())));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
    if version != VERSION {
        return Ok(None);
    }
    if r.take(32)? != hash {
        return Ok(None);
    }
    let header = [r.u64()?, r.u64()?, r.u64()?, r.u64()?];
    if header != [grid.n(), partition.hdiv(), layers, continua] {
        return Ok(None);
    }
    let count = r.u64()?;
    if count != partition.block_count() {
        return Err(Error::Cache(format!("{count} regions for {} blocks", partition.block_count())));
    }
    let mut regions = Vec::with_capacity(count);
    for _ in 0..count {
        let block = r.u64()?;
        let rect = (r.u64()?, r.u64()?, r.u64()?, r.u64()?);
        let (nrows, ncols) = (r.u64()?, r.u64()?);
        let mut values = Mat::<f64>::zeros(nrows, ncols);
        for c in 0..ncols {
            for i in 0..nrows {
                values[(i, c)] = r.f64()?;
            }
        }
        regions.push(RegionBasis { block, rect, values });
    }
    if !r.0.is_empty() {
        return Err(Error::Cache("trailing bytes".into()));
    }
    Ok(Some(MultiscaleSpace::new(grid, partition, layers, continua, regions)))
}
