//! Locating, loading and fingerprinting the two datasets.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use posnb_core::corpus::{load_polarity_corpus, load_subjectivity_corpus, DirectoryLayout, PolarityLoad};
use posnb_core::{Sentence, Subjectivity};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config, data, CliError, CliResult};

pub const EXPECTED_PER_POLARITY: usize = 1000;
pub const EXPECTED_PER_SUBJECTIVITY: usize = 5000;

/// Dataset locations as given on the command line.
#[derive(Debug, Clone, Default)]
pub struct DatasetPaths {
    pub polarity: Option<PathBuf>,
    pub subjective: Option<PathBuf>,
    pub objective: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetRole {
    Polarity,
    Subjective,
    Objective,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHash {
    pub role: DatasetRole,
    pub path: PathBuf,
    pub sha256: String,
}

/// The distributed archive unpacks into `txt_sentoken/{pos,neg}`; accept
/// either that directory or its parent.
pub fn resolve_polarity_root(root: &Path) -> PathBuf {
    let layout = DirectoryLayout::default();
    let nested = root.join("txt_sentoken");
    if !root.join(&layout.positive_dir).exists() && nested.join(&layout.positive_dir).is_dir() {
        nested
    } else {
        root.to_path_buf()
    }
}

impl DatasetPaths {
    pub fn polarity_root(&self) -> CliResult<PathBuf> {
        let root = self
            .polarity
            .as_deref()
            .ok_or_else(|| config("no polarity dataset given (use --polarity or POSNB_POLARITY_DIR)"))?;
        Ok(resolve_polarity_root(root))
    }

    pub fn subjectivity_files(&self) -> CliResult<(PathBuf, PathBuf)> {
        match (&self.subjective, &self.objective) {
            (Some(s), Some(o)) => Ok((s.clone(), o.clone())),
            _ => {
                Err(config("subjectivity dataset needs both --subj and --obj (or POSNB_SUBJ_FILE and POSNB_OBJ_FILE)"))
            }
        }
    }
}

pub fn load_polarity(root: &Path) -> Result<PolarityLoad, posnb_core::Error> {
    load_polarity_corpus(root, &DirectoryLayout::default())
}

pub fn load_subjectivity(subj: &Path, obj: &Path) -> Result<Vec<(Sentence, Subjectivity)>, posnb_core::Error> {
    load_subjectivity_corpus(subj, obj)
}

fn hash_file_into(hasher: &mut Sha256, path: &Path) -> CliResult<()> {
    let mut file = fs::File::open(path).map_err(|e| data(format!("{}: {e}", path.display())))?;
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| data(format!("{}: {e}", path.display())))?;
        if n == 0 {
            return Ok(());
        }
        hasher.update(&buf[..n]);
    }
}

pub fn hash_file(path: &Path) -> CliResult<String> {
    let mut hasher = Sha256::new();
    hash_file_into(&mut hasher, path)?;
    Ok(hex::encode(hasher.finalize()))
}

/// Hash over every `.txt` file of both class directories, keyed by relative
/// path so renames change the digest.
pub fn hash_polarity_tree(root: &Path) -> CliResult<String> {
    let layout = DirectoryLayout::default();
    let mut files = Vec::new();
    for dir in [&layout.positive_dir, &layout.negative_dir] {
        let full = root.join(dir);
        let entries = fs::read_dir(&full).map_err(|e| data(format!("{}: {e}", full.display())))?;
        for entry in entries {
            let path = entry.map_err(|e| data(format!("{}: {e}", full.display())))?.path();
            if path.is_file() && path.extension().and_then(|e| e.to_str()) == Some(layout.extension.as_str()) {
                files.push(path);
            }
        }
    }
    files.sort();
    let mut hasher = Sha256::new();
    for path in &files {
        let rel = path.strip_prefix(root).unwrap_or(path);
        hasher.update(rel.to_string_lossy().as_bytes());
        hasher.update([0u8]);
        hash_file_into(&mut hasher, path)?;
        hasher.update([0u8]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn absolute(path: &Path) -> PathBuf {
    fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

pub fn fingerprint(role: DatasetRole, path: &Path) -> CliResult<DatasetHash> {
    let sha256 = match role {
        DatasetRole::Polarity => hash_polarity_tree(path)?,
        DatasetRole::Subjective | DatasetRole::Objective => hash_file(path)?,
    };
    Ok(DatasetHash { role, path: absolute(path), sha256 })
}

/// Recomputes a recorded hash. `None` when the dataset is no longer present.
pub fn verify(hash: &DatasetHash) -> CliResult<Option<bool>> {
    if !hash.path.exists() {
        return Ok(None);
    }
    let now = fingerprint(hash.role, &hash.path).map_err(|e| match e {
        CliError::Data(e) => CliError::Results(e),
        other => other,
    })?;
    Ok(Some(now.sha256 == hash.sha256))
}
