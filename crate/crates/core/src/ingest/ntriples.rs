//! Line-oriented N-Triples parsing.

use std::borrow::Cow;
use std::fmt;
use std::io::BufRead;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term<'a> {
    Iri(Cow<'a, str>),
    Blank(Cow<'a, str>),
    Literal {
        value: Cow<'a, str>,
        lang: Option<Cow<'a, str>>,
        datatype: Option<Cow<'a, str>>,
    },
}

impl<'a> Term<'a> {
    pub fn iri(&self) -> Option<&str> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }

    pub fn into_owned(self) -> Term<'static> {
        let own = |c: Cow<'a, str>| Cow::Owned(c.into_owned());
        match self {
            Term::Iri(i) => Term::Iri(own(i)),
            Term::Blank(b) => Term::Blank(own(b)),
            Term::Literal {
                value,
                lang,
                datatype,
            } => Term::Literal {
                value: own(value),
                lang: lang.map(own),
                datatype: datatype.map(own),
            },
        }
    }
}

impl fmt::Display for Term<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write_iri(f, i),
            Term::Blank(b) => write!(f, "_:{b}"),
            Term::Literal {
                value,
                lang,
                datatype,
            } => {
                write_literal(f, value)?;
                if let Some(l) = lang {
                    write!(f, "@{l}")
                } else if let Some(d) = datatype {
                    f.write_str("^^")?;
                    write_iri(f, d)
                } else {
                    Ok(())
                }
            }
        }
    }
}

fn write_iri(f: &mut impl fmt::Write, iri: &str) -> fmt::Result {
    f.write_char('<')?;
    for c in iri.chars() {
        match c {
            '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' | '\u{0}'..='\u{20}' => {
                write!(f, "\\u{:04X}", c as u32)?
            }
            c => f.write_char(c)?,
        }
    }
    f.write_char('>')
}

fn write_literal(f: &mut impl fmt::Write, value: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in value.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

/// A parsed statement. Borrowing from the input line where no unescaping
/// was necessary.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triple<'a> {
    pub subject: Term<'a>,
    pub predicate: Term<'a>,
    pub object: Term<'a>,
}

impl Triple<'_> {
    pub fn into_owned(self) -> Triple<'static> {
        Triple {
            subject: self.subject.into_owned(),
            predicate: self.predicate.into_owned(),
            object: self.object.into_owned(),
        }
    }
}

impl fmt::Display for Triple<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}: {text}")]
pub struct ParseError {
    pub line: u64,
    pub message: &'static str,
    /// The offending line, truncated to 200 bytes.
    pub text: String,
}

const EXCERPT: usize = 200;

fn excerpt(s: &str) -> String {
    if s.len() <= EXCERPT {
        return s.to_owned();
    }
    let mut end = EXCERPT;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}...", &s[..end])
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

type Step<T> = Result<T, &'static str>;

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.s.as_bytes().get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t')) {
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Step<Term<'a>> {
        match self.peek() {
            Some(b'<') => Ok(Term::Iri(self.iri()?)),
            Some(b'_') => self.blank(),
            Some(b'"') => self.literal(),
            Some(_) => Err("unexpected character"),
            None => Err("unexpected end of line"),
        }
    }

    fn iri(&mut self) -> Step<Cow<'a, str>> {
        self.pos += 1;
        let start = self.pos;
        let bytes = self.s.as_bytes();
        let mut owned: Option<String> = None;
        let mut run = start;
        while let Some(&b) = bytes.get(self.pos) {
            match b {
                b'>' => {
                    let tail = &self.s[run..self.pos];
                    self.pos += 1;
                    if self.pos - 1 == start {
                        return Err("empty IRI");
                    }
                    return Ok(match owned {
                        Some(mut o) => {
                            o.push_str(tail);
                            Cow::Owned(o)
                        }
                        None => Cow::Borrowed(tail),
                    });
                }
                b'\\' => {
                    let o = owned.get_or_insert_with(String::new);
                    o.push_str(&self.s[run..self.pos]);
                    let c = self.uchar()?;
                    o.push(c);
                    run = self.pos;
                }
                b' ' | b'<' | b'"' | b'{' | b'}' | b'|' | b'^' | b'`' | 0..=0x1f => {
                    return Err("invalid character in IRI")
                }
                _ => self.pos += 1,
            }
        }
        Err("unterminated IRI")
    }

    /// At a backslash inside an IRI: `\uXXXX` or `\UXXXXXXXX`.
    fn uchar(&mut self) -> Step<char> {
        let width = match self.s.as_bytes().get(self.pos + 1) {
            Some(b'u') => 4,
            Some(b'U') => 8,
            _ => return Err("invalid escape"),
        };
        self.hex(width)
    }

    fn hex(&mut self, width: usize) -> Step<char> {
        let start = self.pos + 2;
        let digits = self.s.get(start..start + width).ok_or("truncated escape")?;
        let code = u32::from_str_radix(digits, 16).map_err(|_| "invalid escape")?;
        self.pos = start + width;
        char::from_u32(code).ok_or("invalid code point")
    }

    fn blank(&mut self) -> Step<Term<'a>> {
        if self.s.as_bytes().get(self.pos + 1) != Some(&b':') {
            return Err("invalid blank node");
        }
        self.pos += 2;
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.') || b >= 0x80 {
                self.pos += 1;
            } else {
                break;
            }
        }
        // A trailing '.' is the statement terminator, not part of the label.
        while self.pos > start && self.s.as_bytes()[self.pos - 1] == b'.' {
            self.pos -= 1;
        }
        if self.pos == start {
            return Err("empty blank node label");
        }
        Ok(Term::Blank(Cow::Borrowed(&self.s[start..self.pos])))
    }

    fn literal(&mut self) -> Step<Term<'a>> {
        self.pos += 1;
        let bytes = self.s.as_bytes();
        let mut run = self.pos;
        let mut owned: Option<String> = None;
        let value = loop {
            match bytes.get(self.pos) {
                None => return Err("unterminated literal"),
                Some(b'"') => {
                    let tail = &self.s[run..self.pos];
                    self.pos += 1;
                    break match owned {
                        Some(mut o) => {
                            o.push_str(tail);
                            Cow::Owned(o)
                        }
                        None => Cow::Borrowed(tail),
                    };
                }
                Some(b'\\') => {
                    let o = owned.get_or_insert_with(String::new);
                    o.push_str(&self.s[run..self.pos]);
                    let c = match bytes.get(self.pos + 1) {
                        Some(b'u') => self.hex(4)?,
                        Some(b'U') => self.hex(8)?,
                        Some(&e) => {
                            self.pos += 2;
                            match e {
                                b't' => '\t',
                                b'b' => '\u{8}',
                                b'n' => '\n',
                                b'r' => '\r',
                                b'f' => '\u{c}',
                                b'"' => '"',
                                b'\'' => '\'',
                                b'\\' => '\\',
                                _ => return Err("invalid escape"),
                            }
                        }
                        None => return Err("unterminated literal"),
                    };
                    o.push(c);
                    run = self.pos;
                }
                Some(b'\n' | b'\r') => return Err("raw line break in literal"),
                Some(_) => self.pos += 1,
            }
        };
        let (mut lang, mut datatype) = (None, None);
        match self.peek() {
            Some(b'@') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'-') {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err("empty language tag");
                }
                lang = Some(Cow::Borrowed(&self.s[start..self.pos]));
            }
            Some(b'^') => {
                if self.s.as_bytes().get(self.pos + 1) != Some(&b'^') {
                    return Err("invalid datatype marker");
                }
                self.pos += 2;
                if self.peek() != Some(b'<') {
                    return Err("datatype must be an IRI");
                }
                datatype = Some(self.iri()?);
            }
            _ => {}
        }
        Ok(Term::Literal {
            value,
            lang,
            datatype,
        })
    }
}

/// Parses one line. Returns `Ok(None)` for blank and comment lines.
pub fn parse_line(line: &str) -> Result<Option<Triple<'_>>, &'static str> {
    let line = line.trim_end_matches(['\n', '\r']);
    let mut cur = Cursor { s: line, pos: 0 };
    cur.skip_ws();
    match cur.peek() {
        None | Some(b'#') => return Ok(None),
        _ => {}
    }
    let subject = cur.term()?;
    if matches!(subject, Term::Literal { .. }) {
        return Err("literal in subject position");
    }
    cur.skip_ws();
    let predicate = cur.term()?;
    if !matches!(predicate, Term::Iri(_)) {
        return Err("predicate must be an IRI");
    }
    cur.skip_ws();
    let object = cur.term()?;
    cur.skip_ws();
    if cur.peek() != Some(b'.') {
        return Err("missing terminating '.'");
    }
    cur.pos += 1;
    cur.skip_ws();
    match cur.peek() {
        None | Some(b'#') => Ok(Some(Triple {
            subject,
            predicate,
            object,
        })),
        Some(_) => Err("trailing characters after '.'"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Stop at the first malformed line.
    Strict,
    /// Skip malformed lines and count them.
    #[default]
    Lenient,
}

/// Streaming reader yielding owned triples.
///
/// Memory use is bounded by the longest line. In lenient mode skipped
/// lines are counted and the first [`NTriplesReader::MAX_SAMPLES`] are
/// kept as samples.
pub struct NTriplesReader<R> {
    reader: R,
    buf: Vec<u8>,
    line: u64,
    mode: ParseMode,
    skipped: u64,
    samples: Vec<ParseError>,
    failed: bool,
}

impl<R: BufRead> NTriplesReader<R> {
    pub const MAX_SAMPLES: usize = 100;

    pub fn new(reader: R, mode: ParseMode) -> Self {
        NTriplesReader {
            reader,
            buf: Vec::with_capacity(256),
            line: 0,
            mode,
            skipped: 0,
            samples: Vec::new(),
            failed: false,
        }
    }

    pub fn lines_read(&self) -> u64 {
        self.line
    }

    pub fn skipped(&self) -> u64 {
        self.skipped
    }

    pub fn skip_samples(&self) -> &[ParseError] {
        &self.samples
    }

    /// Calls `f` for every triple without allocating per triple. In strict
    /// mode the first malformed line is returned as an error.
    pub fn for_each_triple<F>(&mut self, mut f: F) -> Result<(), ReadError>
    where
        F: FnMut(Triple<'_>),
    {
        loop {
            self.buf.clear();
            if self.reader.read_until(b'\n', &mut self.buf)? == 0 {
                return Ok(());
            }
            self.line += 1;
            let line = self.line;
            let parsed = match std::str::from_utf8(&self.buf) {
                Ok(text) => parse_line(text).map_err(|message| ParseError {
                    line,
                    message,
                    text: excerpt(text.trim_end()),
                }),
                Err(_) => Err(ParseError {
                    line,
                    message: "invalid UTF-8",
                    text: excerpt(String::from_utf8_lossy(&self.buf).trim_end()),
                }),
            };
            match parsed {
                Ok(Some(t)) => f(t),
                Ok(None) => {}
                Err(e) => match self.mode {
                    ParseMode::Strict => {
                        self.failed = true;
                        return Err(ReadError::Parse(e));
                    }
                    ParseMode::Lenient => {
                        self.skipped += 1;
                        if self.samples.len() < Self::MAX_SAMPLES {
                            self.samples.push(e);
                        }
                    }
                },
            }
        }
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = Result<Triple<'static>, ReadError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e.into()));
                }
            }
            self.line += 1;
            let line = self.line;
            let parsed = match std::str::from_utf8(&self.buf) {
                Ok(text) => parse_line(text)
                    .map(|t| t.map(Triple::into_owned))
                    .map_err(|message| ParseError {
                        line,
                        message,
                        text: excerpt(text.trim_end()),
                    }),
                Err(_) => Err(ParseError {
                    line,
                    message: "invalid UTF-8",
                    text: excerpt(String::from_utf8_lossy(&self.buf).trim_end()),
                }),
            };
            match parsed {
                Ok(Some(t)) => return Some(Ok(t)),
                Ok(None) => {}
                Err(e) if self.mode == ParseMode::Strict => {
                    self.failed = true;
                    return Some(Err(ReadError::Parse(e)));
                }
                Err(e) => {
                    self.skipped += 1;
                    if self.samples.len() < Self::MAX_SAMPLES {
                        self.samples.push(e);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

/// Collects all triples of `input`.
pub fn parse_ntriples<R: BufRead>(input: R, mode: ParseMode) -> Result<(Vec<Triple<'static>>, Vec<ParseError>), ReadError> {
    let mut reader = NTriplesReader::new(input, mode);
    let triples = reader.by_ref().collect::<Result<Vec<_>, _>>()?;
    Ok((triples, reader.samples))
}
