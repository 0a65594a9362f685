//! On-disk response cache: one document per request, addressed by the
//! SHA-256 of the request key (endpoint plus parameters). No expiry.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedResponse {
    pub status: u16,
    pub body: Vec<u8>,
    /// Unix seconds when the response was fetched.
    pub fetched_at: i64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    key: String,
    status: u16,
    fetched_at: i64,
}

#[derive(Debug, Clone)]
pub struct MetadataCache {
    dir: PathBuf,
}

impl MetadataCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::io(format!("creating cache {}", dir.display()), e))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn digest(key: &str) -> String {
        hex::encode(Sha256::digest(key.as_bytes()))
    }

    fn paths(&self, key: &str) -> (PathBuf, PathBuf) {
        let d = Self::digest(key);
        (self.dir.join(format!("{d}.json")), self.dir.join(format!("{d}.meta")))
    }

    pub fn get(&self, key: &str) -> Option<CachedResponse> {
        let (body_path, meta_path) = self.paths(key);
        let meta: Meta = serde_json::from_slice(&fs::read(meta_path).ok()?).ok()?;
        if meta.key != key {
            return None;
        }
        let body = fs::read(body_path).ok()?;
        Some(CachedResponse {
            status: meta.status,
            body,
            fetched_at: meta.fetched_at,
        })
    }

    /// Stores a response. Both files are written atomically; the metadata
    /// goes last so a reader never sees a key without its body.
    pub fn put(&self, key: &str, status: u16, body: &[u8], fetched_at: i64) -> Result<()> {
        let (body_path, meta_path) = self.paths(key);
        self.write_atomic(&body_path, body)?;
        let meta = serde_json::to_vec(&Meta {
            key: key.to_string(),
            status,
            fetched_at,
        })?;
        self.write_atomic(&meta_path, &meta)
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<()> {
        let ctx = || format!("writing cache entry {}", path.display());
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(|e| Error::io(ctx(), e))?;
        tmp.write_all(bytes).map_err(|e| Error::io(ctx(), e))?;
        tmp.persist(path).map_err(|e| Error::io(ctx(), e.error))?;
        Ok(())
    }
}
