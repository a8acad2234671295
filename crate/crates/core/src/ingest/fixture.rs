//! Native TSV fixture directories.
//!
//! | file | columns |
//! |---|---|
//! | `labels.tsv` | id, label |
//! | `subclass.tsv` | child, parent |
//! | `instance.tsv` | item, class |
//! | `disjoint_unions.tsv` | statement id, union class, rank, comma-separated members |
//! | `empty.tsv` | id |
//!
//! All five files must exist; blank lines are ignored.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::disjointness::DisjointUnion;
use crate::kg_store::{EntityId, GraphBuilder, KnowledgeGraph, Rank};

pub const FIXTURE_FILES: [&str; 5] = [
    "labels.tsv",
    "subclass.tsv",
    "instance.tsv",
    "disjoint_unions.tsv",
    "empty.tsv",
];

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("missing fixture file {}", .0.display())]
    Missing(PathBuf),
    #[error("{}:{line}: {message}", file.display())]
    Row {
        file: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", file.display())]
    Io { file: PathBuf, source: io::Error },
}

fn read(dir: &Path, name: &str) -> Result<(PathBuf, String), FixtureError> {
    let file = dir.join(name);
    match fs::read_to_string(&file) {
        Ok(text) => Ok((file, text)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Err(FixtureError::Missing(file)),
        Err(source) => Err(FixtureError::Io { file, source }),
    }
}

/// Non-blank rows with their 1-based line numbers.
fn rows(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn load_native_fixture(dir: impl AsRef<Path>) -> Result<KnowledgeGraph, FixtureError> {
    let dir = dir.as_ref();
    let files = FIXTURE_FILES
        .iter()
        .map(|name| read(dir, name))
        .collect::<Result<Vec<_>, _>>()?;
    let mut b = GraphBuilder::new();

    for (idx, (file, text)) in files.iter().enumerate() {
        let err = |line: usize, message: String| FixtureError::Row {
            file: file.clone(),
            line,
            message,
        };
        let id = |line: usize, s: &str| {
            s.trim().parse::<EntityId>().map_err(|e| err(line, e.to_string()))
        };
        for (line, row) in rows(text) {
            let cols: Vec<&str> = row.split('\t').collect();
            let want = match idx {
                0..=2 => 2,
                3 => 4,
                _ => 1,
            };
            // Labels may contain tabs: everything after the first is the label.
            if (idx == 0 && cols.len() < want) || (idx != 0 && cols.len() != want) {
                return Err(err(line, format!("expected {want} tab-separated columns, got {}", cols.len())));
            }
            match idx {
                0 => b.add_label(id(line, cols[0])?, &row[cols[0].len() + 1..]),
                1 => b.add_subclass(id(line, cols[0])?, id(line, cols[1])?),
                2 => b.add_instance(id(line, cols[0])?, id(line, cols[1])?),
                3 => {
                    let statement = cols[0].trim();
                    if statement.is_empty() {
                        return Err(err(line, "empty statement id".into()));
                    }
                    let rank: Rank = cols[2].trim().parse().map_err(|e: crate::kg_store::ParseRankError| err(line, e.to_string()))?;
                    let members = cols[3]
                        .split(',')
                        .filter(|m| !m.trim().is_empty())
                        .map(|m| id(line, m))
                        .collect::<Result<Vec<_>, _>>()?;
                    b.add_union(DisjointUnion::new(statement, id(line, cols[1])?, members, rank));
                }
                _ => b.mark_empty(id(line, cols[0])?),
            }
        }
    }
    Ok(b.build())
}

/// Writes `kg` as a fixture directory, creating it if needed. Tabs and
/// line breaks inside labels are replaced by spaces.
pub fn write_native_fixture(kg: &KnowledgeGraph, dir: impl AsRef<Path>) -> io::Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let open = |name: &str| fs::File::create(dir.join(name)).map(io::BufWriter::new);

    let mut w = open("labels.tsv")?;
    for (id, label) in kg.labels() {
        let clean: String = label
            .chars()
            .map(|c| if matches!(c, '\t' | '\n' | '\r') { ' ' } else { c })
            .collect();
        writeln!(w, "{id}\t{clean}")?;
    }
    w.flush()?;

    let mut w = open("subclass.tsv")?;
    for (c, p) in kg.subclass_edges() {
        writeln!(w, "{c}\t{p}")?;
    }
    w.flush()?;

    let mut w = open("instance.tsv")?;
    for (i, c) in kg.instance_edges() {
        writeln!(w, "{i}\t{c}")?;
    }
    w.flush()?;

    let mut w = open("disjoint_unions.tsv")?;
    for u in kg.disjoint_unions() {
        let members: Vec<String> = u.members().iter().map(|m| m.to_string()).collect();
        writeln!(w, "{}\t{}\t{}\t{}", u.statement_id, u.union_class, u.rank, members.join(","))?;
    }
    w.flush()?;

    let mut w = open("empty.tsv")?;
    for c in kg.empty_classes() {
        writeln!(w, "{c}")?;
    }
    w.flush()
}
