//! CSV reports: culprits, per-pair numbers, all disjoint pairs, rank
//! distributions and what-if deltas.
//!
//! Cells are quoted only when needed (RFC 4180); records end in `\n`.
//! Every emitter returns the number of rows written after the header.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use csv::{Terminator, WriterBuilder};

use crate::disjointness::{pair_order, DisjointPair};
use crate::kg_store::{EntityId, KnowledgeGraph};
use crate::violations::{Culprit, PairAnalysis, ViolationSummary};
use crate::whatif::{DeltaCounts, DeltaReport};

pub const ALL_CULPRITS_HEADER: [&str; 8] = [
    "class1_id",
    "class1_label",
    "class2_id",
    "class2_label",
    "union_id",
    "union_label",
    "culprit_id",
    "culprit_label",
];

pub const ALL_NUMBERS_HEADER: [&str; 11] = [
    "class1_id",
    "class1_label",
    "class2_id",
    "class2_label",
    "union_id",
    "union_label",
    "n_culprits",
    "n_subclass_violations",
    "n_instance_violations",
    "n_total",
    "n_exempted",
];

pub const ALL_DISJOINTS_HEADER: [&str; 6] = [
    "class1_id",
    "class1_label",
    "class2_id",
    "class2_label",
    "union_ids",
    "union_labels",
];

pub const VIOLATIONS_HEADER: [&str; 8] = [
    "class1_id",
    "class1_label",
    "class2_id",
    "class2_label",
    "kind",
    "entity_id",
    "entity_label",
    "status",
];

pub const DISTRIBUTION_HEADER: [&str; 2] = ["rank", "count"];

pub const DELTA_HEADER: [&str; 18] = [
    "class1_id",
    "class1_label",
    "class2_id",
    "class2_label",
    "culprits_before",
    "culprits_after",
    "culprits_eliminated",
    "culprits_introduced",
    "subclass_before",
    "subclass_after",
    "subclass_violations_eliminated",
    "subclass_violations_introduced",
    "instance_before",
    "instance_after",
    "instance_violations_eliminated",
    "instance_violations_introduced",
    "exempted_before",
    "exempted_after",
];

/// Where labels come from.
pub trait LabelSource {
    fn label(&self, id: EntityId) -> Option<&str>;
}

impl LabelSource for KnowledgeGraph {
    fn label(&self, id: EntityId) -> Option<&str> {
        KnowledgeGraph::label(self, id)
    }
}

impl LabelSource for HashMap<EntityId, String> {
    fn label(&self, id: EntityId) -> Option<&str> {
        self.get(&id).map(String::as_str)
    }
}

/// No labels at all; every label cell is empty.
pub struct NoLabels;

impl LabelSource for NoLabels {
    fn label(&self, _: EntityId) -> Option<&str> {
        None
    }
}

fn writer<W: Write>(sink: W) -> csv::Writer<W> {
    WriterBuilder::new()
        .terminator(Terminator::Any(b'\n'))
        .from_writer(sink)
}

fn label<L: LabelSource + ?Sized>(labels: &L, id: EntityId) -> String {
    labels.label(id).unwrap_or_default().to_owned()
}

fn joined<L: LabelSource + ?Sized>(labels: &L, ids: &[EntityId]) -> (String, String) {
    let ids_text: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    let label_text: Vec<&str> = ids.iter().map(|&i| labels.label(i).unwrap_or_default()).collect();
    (ids_text.join(";"), label_text.join(";"))
}

fn pair_cells<L: LabelSource + ?Sized>(labels: &L, a: EntityId, b: EntityId) -> [String; 4] {
    [a.to_string(), label(labels, a), b.to_string(), label(labels, b)]
}

/// One row per (pair, culprit), sorted by pair and then culprit id.
pub fn emit_all_culprits<'a, L, W, I>(pairs: I, labels: &L, sink: W) -> Result<usize, csv::Error>
where
    L: LabelSource + ?Sized,
    W: Write,
    I: IntoIterator<Item = (&'a DisjointPair, &'a [Culprit])>,
{
    let mut rows: Vec<(&DisjointPair, &Culprit)> = pairs
        .into_iter()
        .flat_map(|(p, cs)| cs.iter().map(move |c| (p, c)))
        .collect();
    rows.sort_by(|x, y| pair_order(&x.0.key(), &y.0.key()).then(x.1.class.render_cmp(&y.1.class)));
    let mut w = writer(sink);
    w.write_record(ALL_CULPRITS_HEADER)?;
    for (pair, c) in &rows {
        let (union_ids, union_labels) = joined(labels, &pair.provenance);
        let [a, al, b, bl] = pair_cells(labels, pair.a, pair.b);
        w.write_record([a, al, b, bl, union_ids, union_labels, c.class.to_string(), label(labels, c.class)])?;
    }
    w.flush()?;
    Ok(rows.len())
}

/// One row per pair with violations, in the given order, optionally
/// followed by a `TOTAL` row summing every count column.
pub fn emit_all_numbers<'a, L, W, I>(summaries: I, labels: &L, sink: W, totals_row: bool) -> Result<usize, csv::Error>
where
    L: LabelSource + ?Sized,
    W: Write,
    I: IntoIterator<Item = &'a ViolationSummary>,
{
    numbers(summaries.into_iter().filter(|s| s.has_violations()), labels, sink, totals_row)
}

/// Like [`emit_all_numbers`] but keeps pairs without violations.
pub fn emit_pair_summaries<'a, L, W, I>(summaries: I, labels: &L, sink: W) -> Result<usize, csv::Error>
where
    L: LabelSource + ?Sized,
    W: Write,
    I: IntoIterator<Item = &'a ViolationSummary>,
{
    numbers(summaries.into_iter(), labels, sink, false)
}

fn numbers<'a, L, W, I>(summaries: I, labels: &L, sink: W, totals_row: bool) -> Result<usize, csv::Error>
where
    L: LabelSource + ?Sized,
    W: Write,
    I: Iterator<Item = &'a ViolationSummary>,
{
    let mut w = writer(sink);
    w.write_record(ALL_NUMBERS_HEADER)?;
    let mut n = 0;
    let mut sums = [0usize; 5];
    for s in summaries {
        let counts = [
            s.n_culprits,
            s.n_subclass_violations,
            s.n_instance_violations,
            s.n_total,
            s.n_exempted,
        ];
        for (acc, v) in sums.iter_mut().zip(counts) {
            *acc += v;
        }
        let (union_ids, union_labels) = joined(labels, &s.pair.provenance);
        let [a, al, b, bl] = pair_cells(labels, s.pair.a, s.pair.b);
        let mut record = vec![a, al, b, bl, union_ids, union_labels];
        record.extend(counts.iter().map(|c| c.to_string()));
        w.write_record(&record)?;
        n += 1;
    }
    if totals_row {
        let mut record = vec!["TOTAL".to_owned(), String::new(), String::new(), String::new(), String::new(), String::new()];
        record.extend(sums.iter().map(|c| c.to_string()));
        w.write_record(&record)?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

/// Every violating class and item of each analysis: subclass violations
/// (active, then exempted) followed by instance violations.
pub fn emit_violations<'a, L, W, I>(analyses: I, labels: &L, sink: W) -> Result<usize, csv::Error>
where
    L: LabelSource + ?Sized,
    W: Write,
    I: IntoIterator<Item = &'a PairAnalysis>,
{
    let mut w = writer(sink);
    w.write_record(VIOLATIONS_HEADER)?;
    let mut n = 0;
    for an in analyses {
        let cells = pair_cells(labels, an.pair.a, an.pair.b);
        let rows = (an.active.iter().map(|&e| ("subclass", e, "active")))
            .chain(an.exempted.iter().map(|&e| ("subclass", e, "exempted")))
            .chain(an.instance.iter().map(|&e| ("instance", e, "active")));
        for (kind, e, status) in rows {
            let mut record = cells.to_vec();
            record.extend([kind.to_owned(), e.to_string(), label(labels, e), status.to_owned()]);
            w.write_record(&record)?;
            n += 1;
        }
    }
    w.flush()?;
    Ok(n)
}

/// Every pair, violating or not, in the given order.
pub fn emit_all_disjoints<L, W>(pairs: &[DisjointPair], labels: &L, sink: W) -> Result<usize, csv::Error>
where
    L: LabelSource + ?Sized,
    W: Write,
{
    let mut w = writer(sink);
    w.write_record(ALL_DISJOINTS_HEADER)?;
    for p in pairs {
        let (union_ids, union_labels) = joined(labels, &p.provenance);
        let [a, al, b, bl] = pair_cells(labels, p.a, p.b);
        w.write_record([a, al, b, bl, union_ids, union_labels])?;
    }
    w.flush()?;
    Ok(pairs.len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    Subclass,
    Instance,
    Culprits,
}

impl Metric {
    pub fn of(self, s: &ViolationSummary) -> usize {
        match self {
            Metric::Subclass => s.n_subclass_violations,
            Metric::Instance => s.n_instance_violations,
            Metric::Culprits => s.n_culprits,
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subclass" => Ok(Metric::Subclass),
            "instance" => Ok(Metric::Instance),
            "culprits" => Ok(Metric::Culprits),
            other => Err(format!("unknown metric `{other}` (expected subclass, instance or culprits)")),
        }
    }
}

/// The per-pair values of `metric`, largest first, numbered from 1.
/// Pairs where the value is zero are left out, as they have no place on
/// a log-scale plot.
pub fn emit_distribution<'a, W, I>(summaries: I, metric: Metric, sink: W) -> Result<usize, csv::Error>
where
    W: Write,
    I: IntoIterator<Item = &'a ViolationSummary>,
{
    let mut values: Vec<usize> = summaries.into_iter().map(|s| metric.of(s)).filter(|&v| v > 0).collect();
    values.sort_unstable_by(|a, b| b.cmp(a));
    let mut w = writer(sink);
    w.write_record(DISTRIBUTION_HEADER)?;
    for (rank, v) in values.iter().enumerate() {
        w.write_record([(rank + 1).to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(values.len())
}

fn delta_cells(c: &DeltaCounts) -> [usize; 14] {
    [
        c.culprits_before,
        c.culprits_after,
        c.culprits_eliminated,
        c.culprits_introduced,
        c.subclass_before,
        c.subclass_after,
        c.subclass_violations_eliminated,
        c.subclass_violations_introduced,
        c.instance_before,
        c.instance_after,
        c.instance_violations_eliminated,
        c.instance_violations_introduced,
        c.exempted_before,
        c.exempted_after,
    ]
}

/// One row per affected pair plus a final `TOTAL` row.
pub fn emit_delta<L, W>(report: &DeltaReport, labels: &L, sink: W) -> Result<usize, csv::Error>
where
    L: LabelSource + ?Sized,
    W: Write,
{
    let mut w = writer(sink);
    w.write_record(DELTA_HEADER)?;
    for p in &report.pairs {
        let mut record = pair_cells(labels, p.a, p.b).to_vec();
        record.extend(delta_cells(&p.counts).iter().map(|c| c.to_string()));
        w.write_record(&record)?;
    }
    let mut record = vec!["TOTAL".to_owned(), String::new(), String::new(), String::new()];
    record.extend(delta_cells(&report.totals).iter().map(|c| c.to_string()));
    w.write_record(&record)?;
    w.flush()?;
    Ok(report.pairs.len() + 1)
}

/// Opens `path` for writing; `-` is standard output.
pub fn open_sink(path: impl AsRef<Path>) -> io::Result<Box<dyn Write>> {
    let path = path.as_ref();
    if path.as_os_str() == "-" {
        Ok(Box::new(io::stdout().lock()))
    } else {
        Ok(Box::new(BufWriter::new(File::create(path)?)))
    }
}
