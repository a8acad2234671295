//! SPARQL texts for endpoint-side auditing, built from checked-in
//! templates under `queries/`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::kg_store::EntityId;

/// A named query with `{{param}}` placeholders.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryTemplate {
    pub name: &'static str,
    pub body: &'static str,
    pub required_params: &'static [&'static str],
}

pub const PAIR_EXTRACTION: QueryTemplate = QueryTemplate {
    name: "pair-extraction",
    body: include_str!("../queries/pair-extraction.rq"),
    required_params: &[],
};

pub const PAIR_EXTRACTION_LABELS: QueryTemplate = QueryTemplate {
    name: "pair-extraction-labels",
    body: include_str!("../queries/pair-extraction-labels.rq"),
    required_params: &[],
};

pub const CULPRIT_COUNT: QueryTemplate = QueryTemplate {
    name: "culprit-count",
    body: include_str!("../queries/culprit-count.rq"),
    required_params: &["class1", "class2"],
};

pub const SUBCLASS_VIOLATION_COUNT: QueryTemplate = QueryTemplate {
    name: "subclass-violation-count",
    body: include_str!("../queries/subclass-violation-count.rq"),
    required_params: &["class1", "class2"],
};

pub const INSTANCE_VIOLATION_COUNT: QueryTemplate = QueryTemplate {
    name: "instance-violation-count",
    body: include_str!("../queries/instance-violation-count.rq"),
    required_params: &["class1", "class2"],
};

pub const LABEL_LOOKUP: QueryTemplate = QueryTemplate {
    name: "label-lookup",
    body: include_str!("../queries/label-lookup.rq"),
    required_params: &["ids"],
};

pub const TEMPLATES: [QueryTemplate; 6] = [
    PAIR_EXTRACTION,
    PAIR_EXTRACTION_LABELS,
    CULPRIT_COUNT,
    SUBCLASS_VIOLATION_COUNT,
    INSTANCE_VIOLATION_COUNT,
    LABEL_LOOKUP,
];

pub const PREFIXES: &str = "\
PREFIX wd: <http://www.wikidata.org/entity/>
PREFIX wdt: <http://www.wikidata.org/prop/direct/>
PREFIX p: <http://www.wikidata.org/prop/>
PREFIX pq: <http://www.wikidata.org/prop/qualifier/>
PREFIX wikibase: <http://wikiba.se/ontology#>
PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#>
";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown query `{0}`")]
    UnknownTemplate(String),
    #[error("query `{template}` requires parameter `{param}`")]
    MissingParam { template: &'static str, param: &'static str },
    #[error("query `{template}` takes no parameter `{param}`")]
    UnexpectedParam { template: &'static str, param: String },
    #[error("{0} is not an item id")]
    NotAnItem(EntityId),
    #[error("query `{template}` expects {expected} argument(s), got {got}")]
    Arity {
        template: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid argument: {0}")]
    BadArgument(String),
}

impl QueryTemplate {
    pub fn by_name(name: &str) -> Option<QueryTemplate> {
        TEMPLATES.iter().copied().find(|t| t.name == name)
    }

    pub fn instantiate(&self, params: &BTreeMap<&str, String>) -> Result<String, QueryError> {
        for &param in self.required_params {
            if !params.contains_key(param) {
                return Err(QueryError::MissingParam {
                    template: self.name,
                    param,
                });
            }
        }
        if let Some(extra) = params.keys().find(|k| !self.required_params.contains(k)) {
            return Err(QueryError::UnexpectedParam {
                template: self.name,
                param: (*extra).to_owned(),
            });
        }
        let mut out = self.body.to_owned();
        for (k, v) in params {
            out = out.replace(&format!("{{{{{k}}}}}"), v);
        }
        Ok(out)
    }
}

/// Output switches shared by all generators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QueryOptions {
    /// Also select English labels (pair extraction only).
    pub labels: bool,
    /// Prepend PREFIX declarations, which some endpoints require.
    pub prefixes: bool,
}

fn finish(body: String, opts: QueryOptions) -> String {
    if opts.prefixes {
        format!("{PREFIXES}{body}")
    } else {
        body
    }
}

fn item(id: EntityId) -> Result<String, QueryError> {
    if id.is_item() {
        Ok(id.to_string())
    } else {
        Err(QueryError::NotAnItem(id))
    }
}

fn pair_params(a: EntityId, b: EntityId) -> Result<BTreeMap<&'static str, String>, QueryError> {
    Ok(BTreeMap::from([("class1", item(a)?), ("class2", item(b)?)]))
}

/// The statement-level extraction of disjoint pairs.
pub fn pair_extraction_query() -> String {
    PAIR_EXTRACTION.body.to_owned()
}

pub fn pair_extraction_query_with(opts: QueryOptions) -> String {
    let t = if opts.labels {
        PAIR_EXTRACTION_LABELS
    } else {
        PAIR_EXTRACTION
    };
    finish(t.body.to_owned(), opts)
}

/// Counts the culprits of the pair `(class1, class2)`.
pub fn culprit_count_query(class1: EntityId, class2: EntityId) -> Result<String, QueryError> {
    culprit_count_query_with(class1, class2, QueryOptions::default())
}

pub fn culprit_count_query_with(class1: EntityId, class2: EntityId, opts: QueryOptions) -> Result<String, QueryError> {
    Ok(finish(CULPRIT_COUNT.instantiate(&pair_params(class1, class2)?)?, opts))
}

/// Subclass-violation and instance-violation count queries for a pair.
pub fn violation_count_queries(a: EntityId, b: EntityId) -> Result<(String, String), QueryError> {
    violation_count_queries_with(a, b, QueryOptions::default())
}

pub fn violation_count_queries_with(a: EntityId, b: EntityId, opts: QueryOptions) -> Result<(String, String), QueryError> {
    let params = pair_params(a, b)?;
    Ok((
        finish(SUBCLASS_VIOLATION_COUNT.instantiate(&params)?, opts),
        finish(INSTANCE_VIOLATION_COUNT.instantiate(&params)?, opts),
    ))
}

/// English labels of `ids`.
pub fn label_query(ids: &[EntityId], opts: QueryOptions) -> String {
    let values: Vec<String> = ids.iter().map(|id| format!("wd:{id}")).collect();
    let params = BTreeMap::from([("ids", values.join(" "))]);
    finish(LABEL_LOOKUP.instantiate(&params).expect("label template params"), opts)
}

/// Renders a template by name with positional entity arguments, as the
/// command line does: `culprit-count Q7187 Q4406616`.
pub fn render(name: &str, args: &[String], opts: QueryOptions) -> Result<String, QueryError> {
    let t = QueryTemplate::by_name(name).ok_or_else(|| QueryError::UnknownTemplate(name.to_owned()))?;
    let ids = args
        .iter()
        .map(|a| a.parse::<EntityId>().map_err(|e| QueryError::BadArgument(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let arity = |expected: usize| {
        if ids.len() == expected {
            Ok(())
        } else {
            Err(QueryError::Arity {
                template: t.name,
                expected,
                got: ids.len(),
            })
        }
    };
    match t.name {
        "pair-extraction" | "pair-extraction-labels" => {
            arity(0)?;
            Ok(pair_extraction_query_with(QueryOptions {
                labels: opts.labels || t.name == "pair-extraction-labels",
                ..opts
            }))
        }
        "culprit-count" => {
            arity(2)?;
            culprit_count_query_with(ids[0], ids[1], opts)
        }
        "subclass-violation-count" => {
            arity(2)?;
            Ok(violation_count_queries_with(ids[0], ids[1], opts)?.0)
        }
        "instance-violation-count" => {
            arity(2)?;
            Ok(violation_count_queries_with(ids[0], ids[1], opts)?.1)
        }
        _ => {
            if ids.is_empty() {
                return Err(QueryError::Arity {
                    template: t.name,
                    expected: 1,
                    got: 0,
                });
            }
            Ok(label_query(&ids, opts))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("byte {offset}: {message}")]
pub struct SyntaxError {
    pub offset: usize,
    pub message: String,
}

/// A tolerant structural check: one query form keyword after optional
/// PREFIX lines, balanced brackets outside strings and IRIs, no leftover
/// placeholders, and no undeclared prefixes when any PREFIX is present.
pub fn check_syntax(query: &str) -> Result<(), SyntaxError> {
    let err = |offset: usize, message: &str| SyntaxError {
        offset,
        message: message.to_owned(),
    };
    if let Some(pos) = query.find("{{") {
        return Err(err(pos, "unfilled placeholder"));
    }
    let mut declared = Vec::new();
    let mut rest_at = 0;
    for line in query.split_inclusive('\n') {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            rest_at += line.len();
            continue;
        }
        if t.len() >= 6 && t[..6].eq_ignore_ascii_case("PREFIX") {
            let name = t[6..].trim_start().split(':').next().unwrap_or("").trim();
            declared.push(name.to_owned());
            rest_at += line.len();
            continue;
        }
        break;
    }
    let body = &query[rest_at..];
    let form = body
        .split_whitespace()
        .next()
        .map(str::to_ascii_uppercase)
        .unwrap_or_default();
    if !matches!(form.as_str(), "SELECT" | "ASK" | "CONSTRUCT" | "DESCRIBE") {
        return Err(err(rest_at, "expected SELECT, ASK, CONSTRUCT or DESCRIBE"));
    }

    let bytes = body.as_bytes();
    let mut stack: Vec<(u8, usize)> = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'"' | b'\'' => {
                let start = i;
                i += 1;
                while i < bytes.len() && bytes[i] != c {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err(err(rest_at + start, "unterminated string"));
                }
            }
            b'<' if bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphabetic()) => {
                // IRI, unless this is a comparison like `?a <?b` or `< str(`.
                if let Some(end) = body[i..].find('>') {
                    let inner = &body[i + 1..i + end];
                    if !inner.contains(char::is_whitespace) {
                        i += end;
                    }
                }
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'{' | b'(' | b'[' => stack.push((c, i)),
            b'}' | b')' | b']' => {
                let open = match c {
                    b'}' => b'{',
                    b')' => b'(',
                    _ => b'[',
                };
                match stack.pop() {
                    Some((o, _)) if o == open => {}
                    _ => return Err(err(rest_at + i, "unbalanced bracket")),
                }
            }
            _ => {
                if !declared.is_empty() && (c.is_ascii_alphabetic()) && (i == 0 || !is_name(bytes[i - 1])) {
                    let mut j = i;
                    while j < bytes.len() && is_name(bytes[j]) {
                        j += 1;
                    }
                    if bytes.get(j) == Some(&b':') && bytes.get(j + 1).is_some_and(|b| b.is_ascii_alphanumeric()) {
                        let prefix = &body[i..j];
                        if !declared.iter().any(|d| d == prefix) {
                            return Err(err(rest_at + i, &format!("undeclared prefix `{prefix}:`")));
                        }
                    }
                    i = j.max(i + 1);
                    continue;
                }
            }
        }
        i += 1;
    }
    if let Some((_, at)) = stack.pop() {
        return Err(err(rest_at + at, "unclosed bracket"));
    }
    if !body.contains('{') {
        return Err(err(rest_at, "missing group pattern"));
    }
    Ok(())
}

fn is_name(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'-'
}
