//! A directory of `.irmk` files plus a JSON index, keyed by user label.
//!
//! Writers take an advisory lock on `.lock` in the root. Every file, the
//! index included, is written to a `.tmp` sibling and renamed into place, so a
//! reader sees either the old or the new version.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::protection::{MatrixEncoding, ProtectedTemplate};

pub const INDEX_FILE: &str = "index.json";
pub const INDEX_VERSION: u32 = 1;
const LOCK_FILE: &str = ".lock";
const TMP_SUFFIX: &str = ".tmp";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub label: String,
    pub file: String,
    pub created_at: String,
    pub n: usize,
    pub alpha: usize,
    pub hash_id: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct Index {
    version: u32,
    entries: Vec<IndexEntry>,
}

#[derive(Debug)]
pub struct Registry {
    root: PathBuf,
    index: Index,
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() {
        return Err(Error::InvalidLabel("label is empty".into()));
    }
    if label.chars().any(char::is_control) {
        return Err(Error::InvalidLabel(format!("{label:?} contains control characters")));
    }
    Ok(())
}

/// `<sha256(label) prefix>-<digest prefix>.irmk`; a revoked and re-enrolled
/// label gets a new digest and so a new file name.
fn file_name(label: &str, pt: &ProtectedTemplate) -> String {
    let key = Sha256::digest(label.as_bytes());
    format!("{}-{}.irmk", hex::encode(&key[..8]), hex::encode(&pt.digest()[..4]))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic_with(path, bytes, None)
}

/// `truncate_at` cuts the temp file short and stops before the rename,
/// standing in for a crash mid-write.
fn write_atomic_with(path: &Path, bytes: &[u8], truncate_at: Option<usize>) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(TMP_SUFFIX);
    let tmp = PathBuf::from(tmp);
    let mut f = File::create(&tmp)?;
    if let Some(cut) = truncate_at {
        f.write_all(&bytes[..cut.min(bytes.len())])?;
        return Err(Error::IoFailure(std::io::Error::other("simulated crash before rename")));
    }
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_index(root: &Path) -> Result<Index> {
    let path = root.join(INDEX_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Ok(Index { version: INDEX_VERSION, entries: Vec::new() })
        }
        Err(e) => return Err(e.into()),
    };
    let index: Index = serde_json::from_str(&text).map_err(|e| Error::CorruptIndex(e.to_string()))?;
    if index.version != INDEX_VERSION {
        return Err(Error::CorruptIndex(format!("unsupported index version {}", index.version)));
    }
    for (i, e) in index.entries.iter().enumerate() {
        if index.entries[..i].iter().any(|p| p.label == e.label) {
            return Err(Error::CorruptIndex(format!("label {:?} listed twice", e.label)));
        }
    }
    Ok(index)
}

struct WriteLock(File);

impl WriteLock {
    fn acquire(root: &Path) -> Result<Self> {
        let f = OpenOptions::new().create(true).truncate(false).write(true).open(root.join(LOCK_FILE))?;
        f.lock()?;
        Ok(WriteLock(f))
    }
}

impl Drop for WriteLock {
    fn drop(&mut self) {
        let _ = self.0.unlock();
    }
}

impl Registry {
    /// Opens `root`, creating it if needed. Leftover temp files from an
    /// interrupted writer are removed.
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root)?;
        {
            let _lock = WriteLock::acquire(&root)?;
            for entry in fs::read_dir(&root)? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == &TMP_SUFFIX[1..]) {
                    fs::remove_file(&path)?;
                }
            }
        }
        let index = read_index(&root)?;
        Ok(Registry { root, index })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.index.entries
    }

    pub fn len(&self) -> usize {
        self.index.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.entries.is_empty()
    }

    pub fn entry(&self, label: &str) -> Option<&IndexEntry> {
        self.index.entries.iter().find(|e| e.label == label)
    }

    /// Path of the file holding `label`'s template.
    pub fn path_of(&self, label: &str) -> Result<PathBuf> {
        self.entry(label)
            .map(|e| self.root.join(&e.file))
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Re-reads the index from disk.
    pub fn reload(&mut self) -> Result<()> {
        self.index = read_index(&self.root)?;
        Ok(())
    }

    pub fn get(&self, label: &str) -> Result<ProtectedTemplate> {
        let bytes = fs::read(self.path_of(label)?)?;
        ProtectedTemplate::from_bytes(&bytes)
    }

    pub fn enroll(&mut self, label: &str, pt: &ProtectedTemplate, encoding: MatrixEncoding) -> Result<()> {
        self.enroll_inner(label, pt, encoding, None)
    }

    fn enroll_inner(
        &mut self,
        label: &str,
        pt: &ProtectedTemplate,
        encoding: MatrixEncoding,
        truncate_at: Option<usize>,
    ) -> Result<()> {
        check_label(label)?;
        let _lock = WriteLock::acquire(&self.root)?;
        self.reload()?;
        if self.entry(label).is_some() {
            return Err(Error::DuplicateLabel(label.to_string()));
        }
        let file = file_name(label, pt);
        write_atomic_with(&self.root.join(&file), &pt.to_bytes(encoding), truncate_at)?;
        let mut index = self.index.clone();
        index.entries.push(IndexEntry {
            label: label.to_string(),
            file,
            created_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            n: pt.params().dim(),
            alpha: pt.params().weight(),
            hash_id: pt.hash_id() as u8,
        });
        self.commit(index)
    }

    pub fn revoke(&mut self, label: &str) -> Result<()> {
        let _lock = WriteLock::acquire(&self.root)?;
        self.reload()?;
        let pos = self
            .index
            .entries
            .iter()
            .position(|e| e.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        let mut index = self.index.clone();
        let removed = index.entries.remove(pos);
        // Index first: a crash in between leaves an orphan file, never a
        // dangling entry.
        self.commit(index)?;
        match fs::remove_file(self.root.join(&removed.file)) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => Err(e.into()),
            _ => Ok(()),
        }
    }

    fn commit(&mut self, index: Index) -> Result<()> {
        let mut text = serde_json::to_string_pretty(&index).map_err(|e| Error::CorruptIndex(e.to_string()))?;
        text.push('\n');
        write_atomic(&self.root.join(INDEX_FILE), text.as_bytes())?;
        self.index = index;
        Ok(())
    }
}
