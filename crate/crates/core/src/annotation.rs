//! Human triage judgments, persisted as an append-only JSON-lines file.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg_store::EntityId;
use crate::whatif::Edit;

/// Closed vocabulary of mistake kinds and causes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MistakeKind {
    LocalMistake,
    SuperclassMistake,
    IncorrectDisjointness,
    EmptyClass,
    Exception,
    AmbiguousLabel,
    MultipleSenses,
    ClassOrderConfusion,
    Mixture,
    ConfusingItem,
    BasicMistake,
    Vandalism,
    Unknown,
}

impl MistakeKind {
    pub const ALL: [MistakeKind; 13] = [
        MistakeKind::LocalMistake,
        MistakeKind::SuperclassMistake,
        MistakeKind::IncorrectDisjointness,
        MistakeKind::EmptyClass,
        MistakeKind::Exception,
        MistakeKind::AmbiguousLabel,
        MistakeKind::MultipleSenses,
        MistakeKind::ClassOrderConfusion,
        MistakeKind::Mixture,
        MistakeKind::ConfusingItem,
        MistakeKind::BasicMistake,
        MistakeKind::Vandalism,
        MistakeKind::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MistakeKind::LocalMistake => "local_mistake",
            MistakeKind::SuperclassMistake => "superclass_mistake",
            MistakeKind::IncorrectDisjointness => "incorrect_disjointness",
            MistakeKind::EmptyClass => "empty_class",
            MistakeKind::Exception => "exception",
            MistakeKind::AmbiguousLabel => "ambiguous_label",
            MistakeKind::MultipleSenses => "multiple_senses",
            MistakeKind::ClassOrderConfusion => "class_order_confusion",
            MistakeKind::Mixture => "mixture",
            MistakeKind::ConfusingItem => "confusing_item",
            MistakeKind::BasicMistake => "basic_mistake",
            MistakeKind::Vandalism => "vandalism",
            MistakeKind::Unknown => "unknown",
        }
    }
}

impl fmt::Display for MistakeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mistake kind `{0}`")]
pub struct UnknownMistakeKind(pub String);

impl FromStr for MistakeKind {
    type Err = UnknownMistakeKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MistakeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownMistakeKind(s.to_owned()))
    }
}

/// The two classes of a disjoint pair, in pair order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairRef {
    pub a: EntityId,
    pub b: EntityId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub culprit: EntityId,
    pub pair: PairRef,
    pub mistake_kind: MistakeKind,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub proposed_edits: Vec<Edit>,
    #[serde(default)]
    pub author: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("annotation log {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("annotation log {}:{line}: {message}", path.display())]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

struct LogState {
    file: File,
    last: Option<DateTime<Utc>>,
    entries: Vec<Annotation>,
}

/// Append-only annotation store. Records are written whole under a lock,
/// one JSON object per line.
pub struct AnnotationLog {
    path: PathBuf,
    state: Mutex<LogState>,
}

impl AnnotationLog {
    /// Opens `path`, creating it if missing, and loads existing records.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, AnnotationError> {
        let path = path.as_ref().to_path_buf();
        let io_err = |source| AnnotationError::Io {
            path: path.clone(),
            source,
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .read(true)
            .open(&path)
            .map_err(io_err)?;
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(File::open(&path).map_err(io_err)?).lines().enumerate() {
            let line = line.map_err(io_err)?;
            if line.trim().is_empty() {
                continue;
            }
            let a: Annotation = serde_json::from_str(&line).map_err(|e| AnnotationError::Corrupt {
                path: path.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
            entries.push(a);
        }
        let last = entries.iter().map(|a| a.timestamp).max();
        Ok(AnnotationLog {
            path,
            state: Mutex::new(LogState {
                file,
                last,
                entries,
            }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Stamps `a` with a timestamp strictly after every earlier record and
    /// appends it. Returns the stored record.
    pub fn append(&self, mut a: Annotation) -> Result<Annotation, AnnotationError> {
        let mut state = self.state.lock().unwrap_or_else(|p| p.into_inner());
        let now = Utc::now();
        a.timestamp = match state.last {
            Some(last) if now <= last => last + Duration::microseconds(1),
            _ => now,
        };
        let mut line = serde_json::to_vec(&a).expect("annotation serializes");
        line.push(b'\n');
        let io_err = |source| AnnotationError::Io {
            path: self.path.clone(),
            source,
        };
        state.file.write_all(&line).map_err(io_err)?;
        state.file.flush().map_err(io_err)?;
        state.last = Some(a.timestamp);
        state.entries.push(a.clone());
        Ok(a)
    }

    pub fn all(&self) -> Vec<Annotation> {
        self.state.lock().unwrap_or_else(|p| p.into_inner()).entries.clone()
    }

    pub fn len(&self) -> usize {
        self.state.lock().unwrap_or_else(|p| p.into_inner()).entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
