//! Per-stage output directories with a JSON manifest recording the digests
//! of inputs, parameters and seed, plus digests of every output file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{PipelineError, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageKey {
    pub inputs: BTreeMap<String, String>,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub key: StageKey,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Built,
    UpToDate,
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(PipelineError::io(path))?;
    Ok(digest_bytes(&bytes))
}

/// Sorted `(relative path, digest)` of every file below `dir`.
pub fn file_digests(dir: &Path) -> Result<BTreeMap<String, String>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> Result<()> {
        for entry in fs::read_dir(dir).map_err(PipelineError::io(dir))? {
            let path = entry.map_err(PipelineError::io(dir))?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, digest_file(&path)?);
            }
        }
        Ok(())
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out)?;
    Ok(out)
}

/// Digest of a file, or of a directory's full listing and contents.
pub fn digest_path(path: &Path) -> Result<String> {
    if path.is_dir() {
        let listing = serde_json::to_vec(&file_digests(path)?).expect("string map serializes");
        Ok(digest_bytes(&listing))
    } else {
        digest_file(path)
    }
}

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn stage_dir(&self, stage: &str) -> PathBuf {
        self.root.join(stage)
    }

    pub fn manifest(&self, stage: &str) -> Result<Option<Manifest>> {
        let path = self.stage_dir(stage).join(MANIFEST);
        if !path.exists() {
            return Ok(None);
        }
        let bytes = fs::read(&path).map_err(PipelineError::io(&path))?;
        serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|source| PipelineError::Manifest { path, source })
    }

    /// Output directory of `upstream`, which must have completed.
    pub fn require(&self, stage: &'static str, upstream: &'static str) -> Result<PathBuf> {
        match self.manifest(upstream)? {
            Some(_) => Ok(self.stage_dir(upstream)),
            None => Err(PipelineError::Dependency {
                stage,
                required: upstream,
            }),
        }
    }

    /// Digest identifying a completed upstream stage.
    pub fn upstream_digest(&self, stage: &'static str, upstream: &'static str) -> Result<String> {
        let dir = self.require(stage, upstream)?;
        digest_file(&dir.join(MANIFEST))
    }

    fn stale_reason(&self, stage: &str, old: &Manifest, key: &StageKey) -> Result<Option<String>> {
        if old.key.params != key.params {
            return Ok(Some("parameters changed".into()));
        }
        if old.key.seed != key.seed {
            return Ok(Some("seed changed".into()));
        }
        for (name, digest) in &key.inputs {
            if old.key.inputs.get(name) != Some(digest) {
                return Ok(Some(format!("input `{name}` changed")));
            }
        }
        if let Some(name) = old.key.inputs.keys().find(|n| !key.inputs.contains_key(*n)) {
            return Ok(Some(format!("input `{name}` removed")));
        }
        let mut current = file_digests(&self.stage_dir(stage))?;
        current.remove(MANIFEST);
        if current != old.outputs {
            return Ok(Some("cached outputs were modified".into()));
        }
        Ok(None)
    }

    /// Runs `body` into a fresh directory unless the cached manifest already
    /// matches `key`. A mismatching cache is an error unless `force`.
    pub fn run(
        &self,
        stage: &str,
        key: StageKey,
        force: bool,
        body: impl FnOnce(&Path) -> Result<()>,
    ) -> Result<Outcome> {
        if let Some(old) = self.manifest(stage)? {
            match self.stale_reason(stage, &old, &key)? {
                None => return Ok(Outcome::UpToDate),
                Some(detail) if !force => {
                    return Err(PipelineError::StaleCache {
                        stage: stage.to_string(),
                        detail,
                    })
                }
                Some(_) => {}
            }
        }
        fs::create_dir_all(&self.root).map_err(PipelineError::io(&self.root))?;
        let tmp = self.root.join(format!(".{}.partial", stage.replace('/', "_")));
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(PipelineError::io(&tmp))?;
        }
        fs::create_dir_all(&tmp).map_err(PipelineError::io(&tmp))?;
        body(&tmp)?;
        let manifest = Manifest {
            stage: stage.to_string(),
            key,
            outputs: file_digests(&tmp)?,
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        let manifest_path = tmp.join(MANIFEST);
        fs::write(&manifest_path, json).map_err(PipelineError::io(&manifest_path))?;
        let dir = self.stage_dir(stage);
        if let Some(parent) = dir.parent() {
            fs::create_dir_all(parent).map_err(PipelineError::io(parent))?;
        }
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(PipelineError::io(&dir))?;
        }
        fs::rename(&tmp, &dir).map_err(PipelineError::io(&dir))?;
        Ok(Outcome::Built)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(param: i64) -> StageKey {
        StageKey {
            inputs: BTreeMap::from([("a".to_string(), "00".to_string())]),
            params: serde_json::json!({ "p": param }),
            seed: Some(1),
        }
    }

    fn write_out(dir: &Path) -> Result<()> {
        fs::write(dir.join("out.txt"), b"hello").map_err(PipelineError::io(dir))
    }

    #[test]
    fn rerun_is_a_no_op_and_changes_are_stale() {
        let tmp = tempfile::tempdir().unwrap();
        let cache = Cache::new(tmp.path());
        assert_eq!(cache.run("s", key(1), false, write_out).unwrap(), Outcome::Built);
        let manifest = fs::read(cache.stage_dir("s").join(MANIFEST)).unwrap();
        assert_eq!(cache.run("s", key(1), false, |_| panic!("must not rerun")).unwrap(), Outcome::UpToDate);
        assert_eq!(fs::read(cache.stage_dir("s").join(MANIFEST)).unwrap(), manifest);

        assert!(matches!(cache.run("s", key(2), false, write_out), Err(PipelineError::StaleCache { .. })));
        assert_eq!(cache.run("s", key(2), true, write_out).unwrap(), Outcome::Built);

        fs::write(cache.stage_dir("s").join("out.txt"), b"tampered").unwrap();
        assert!(matches!(cache.run("s", key(2), false, write_out), Err(PipelineError::StaleCache { .. })));
    }

    #[test]
    fn missing_upstream_names_the_stage() {
        let tmp = tempfile::tempdir().unwrap();
        let cache = Cache::new(tmp.path());
        let err = cache.require("extract", "segment").unwrap_err();
        assert!(err.to_string().contains("segment"));
        assert_eq!(err.exit_code(), crate::error::exit::DEPENDENCY);
    }

    #[test]
    fn failed_body_leaves_no_manifest() {
        let tmp = tempfile::tempdir().unwrap();
        let cache = Cache::new(tmp.path());
        let r = cache.run("s", key(1), false, |_| Err(PipelineError::Config("boom".into())));
        assert!(r.is_err());
        assert!(cache.manifest("s").unwrap().is_none());
    }
}
