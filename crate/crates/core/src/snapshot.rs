//! Versioned binary snapshots of a frozen graph.
//!
//! Layout: 8-byte magic, little-endian `u32` format version, then the
//! bincode-encoded graph. Encoding the same graph always yields the same
//! bytes.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disjointness::DisjointUnion;
use crate::kg_store::{EntityId, KnowledgeGraph};

pub const MAGIC: [u8; 8] = *b"DJAUDIT\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot I/O: {0}")]
    Io(#[from] io::Error),
    #[error("not a snapshot file (bad magic bytes)")]
    BadMagic,
    #[error("snapshot format version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("snapshot decoding failed: {0}")]
    Decode(String),
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
}

#[derive(Serialize, Deserialize)]
struct Body {
    nodes: Vec<EntityId>,
    labels: Vec<(u32, String)>,
    subclass: Vec<(u32, u32)>,
    instance: Vec<(u32, u32)>,
    unions: Vec<DisjointUnion>,
    empty: Vec<u32>,
}

pub fn write_snapshot<W: Write>(kg: &KnowledgeGraph, mut w: W) -> Result<(), SnapshotError> {
    let mut labels: Vec<(u32, String)> = kg
        .label_map()
        .iter()
        .map(|(&n, l)| (n, l.to_string()))
        .collect();
    labels.sort_unstable();
    let body = Body {
        nodes: kg.entities().to_vec(),
        labels,
        subclass: kg.subclass_pairs().to_vec(),
        instance: kg.instance_pairs().to_vec(),
        unions: kg.disjoint_unions().to_vec(),
        empty: kg.empty_nodes().to_vec(),
    };
    w.write_all(&MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    bincode::serialize_into(&mut w, &body).map_err(|e| SnapshotError::Decode(e.to_string()))?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<KnowledgeGraph, SnapshotError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| SnapshotError::BadMagic)?;
    if magic != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let mut version = [0u8; 4];
    r.read_exact(&mut version)?;
    let found = u32::from_le_bytes(version);
    if found != FORMAT_VERSION {
        return Err(SnapshotError::Version {
            found,
            expected: FORMAT_VERSION,
        });
    }
    let body: Body = bincode::deserialize_from(r).map_err(|e| SnapshotError::Decode(e.to_string()))?;
    validate(&body)?;
    let labels: HashMap<u32, Box<str>> = body
        .labels
        .into_iter()
        .map(|(n, l)| (n, l.into_boxed_str()))
        .collect();
    Ok(KnowledgeGraph::from_parts(
        Arc::new(body.nodes),
        Arc::new(labels),
        Arc::new(body.subclass),
        Arc::new(body.instance),
        Arc::new(body.unions),
        Arc::new(body.empty),
    ))
}

fn validate(b: &Body) -> Result<(), SnapshotError> {
    let corrupt = |m: &str| Err(SnapshotError::Corrupt(m.to_owned()));
    if !b.nodes.windows(2).all(|w| w[0] < w[1]) {
        return corrupt("node table not strictly sorted");
    }
    let n = b.nodes.len() as u32;
    let edges_ok = |e: &[(u32, u32)]| e.windows(2).all(|w| w[0] < w[1]) && e.iter().all(|&(x, y)| x < n && y < n);
    if !edges_ok(&b.subclass) || !edges_ok(&b.instance) {
        return corrupt("edge list out of range or unsorted");
    }
    if b.labels.iter().any(|&(x, _)| x >= n) || b.empty.iter().any(|&x| x >= n) {
        return corrupt("node index out of range");
    }
    let known = |id: &EntityId| b.nodes.binary_search(id).is_ok();
    if !b.unions.iter().all(|u| known(&u.union_class) && u.members().iter().all(known)) {
        return corrupt("union references unknown entity");
    }
    Ok(())
}

pub fn save_snapshot(kg: &KnowledgeGraph, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
    write_snapshot(kg, BufWriter::new(File::create(path)?))
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<KnowledgeGraph, SnapshotError> {
    read_snapshot(BufReader::new(File::open(path)?))
}
