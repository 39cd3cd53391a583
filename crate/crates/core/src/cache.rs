//! On-disk histogram cache.
//!
//! One CSV file per histogram, named by a hash of the stage prefix, the
//! operands, the stage and the range. The full key is repeated on the first
//! line and compared on load. Files are written to a temporary name and
//! renamed into place, so readers never see partial files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::{BigInt, BigUint};
use sha2::{Digest, Sha256};

use crate::construction::{prefix_hash, StageSpec};
use crate::descendants::CacheKey;
use crate::error::{Error, Result};

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Clone, Debug)]
pub struct HistogramCache {
    dir: PathBuf,
}

impl HistogramCache {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
        Ok(HistogramCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn full_key(prefix: &[StageSpec], key: &CacheKey) -> String {
        format!("prefix={};{}", prefix_hash(prefix), key.text)
    }

    fn path_for(&self, full_key: &str) -> PathBuf {
        let digest = Sha256::digest(full_key.as_bytes());
        self.dir.join(format!("{}.csv", hex::encode(&digest[..16])))
    }

    pub(crate) fn load(&self, prefix: &[StageSpec], key: &CacheKey) -> Result<Option<Vec<(BigInt, BigUint)>>> {
        let full = Self::full_key(prefix, key);
        let path = self.path_for(&full);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::Cache(format!("{}: {e}", path.display()))),
        };
        let mut lines = text.lines();
        if lines.next() != Some(format!("# {full}").as_str()) || lines.next() != Some("k,count") {
            return Ok(None);
        }
        let mut counts = Vec::new();
        for line in lines {
            let parsed = line
                .split_once(',')
                .and_then(|(k, c)| Some((k.parse::<BigInt>().ok()?, c.parse::<BigUint>().ok()?)));
            match parsed {
                Some(row) => counts.push(row),
                None => return Err(Error::Cache(format!("{}: bad row {line:?}", path.display()))),
            }
        }
        Ok(Some(counts))
    }

    pub(crate) fn store(&self, prefix: &[StageSpec], key: &CacheKey, counts: &[(BigInt, BigUint)]) -> Result<()> {
        let full = Self::full_key(prefix, key);
        let path = self.path_for(&full);
        let tmp = self.dir.join(format!(
            ".{}.{}.{}.tmp",
            path.file_name().unwrap().to_string_lossy(),
            std::process::id(),
            TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let io = |e: std::io::Error| Error::Cache(format!("{}: {e}", tmp.display()));
        let mut f = fs::File::create(&tmp).map_err(io)?;
        let mut body = format!("# {full}\nk,count\n");
        for (k, c) in counts {
            body.push_str(&format!("{k},{c}\n"));
        }
        f.write_all(body.as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
        drop(f);
        fs::rename(&tmp, &path).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))
    }
}
