use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// IRI prefix of Wikidata entities in the RDF dumps.
pub const ENTITY_IRI_PREFIX: &str = "http://www.wikidata.org/entity/";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    Item,
    Property,
}

impl EntityKind {
    fn letter(self) -> char {
        match self {
            EntityKind::Item => 'Q',
            EntityKind::Property => 'P',
        }
    }
}

/// A Wikidata identifier such as `Q35120` or `P279`.
///
/// Ordering is by kind (items first) and then numerically, which is the
/// order nodes are interned in. Pair ordering uses the rendered text
/// instead, see [`EntityId::render_cmp`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId {
    kind: EntityKind,
    num: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseEntityIdError {
    #[error("empty entity id")]
    Empty,
    #[error("entity id `{0}` must start with Q or P")]
    BadPrefix(String),
    #[error("entity id `{0}` has an invalid numeric part")]
    BadNumber(String),
}

impl EntityId {
    /// Panics if `num` is zero.
    pub const fn item(num: u32) -> Self {
        assert!(num >= 1, "entity numbers start at 1");
        EntityId {
            kind: EntityKind::Item,
            num,
        }
    }

    /// Panics if `num` is zero.
    pub const fn property(num: u32) -> Self {
        assert!(num >= 1, "entity numbers start at 1");
        EntityId {
            kind: EntityKind::Property,
            num,
        }
    }

    pub fn kind(self) -> EntityKind {
        self.kind
    }

    pub fn numeric_id(self) -> u32 {
        self.num
    }

    pub fn is_item(self) -> bool {
        self.kind == EntityKind::Item
    }

    /// Parses the local name of a `http://www.wikidata.org/entity/` IRI.
    pub fn from_iri(iri: &str) -> Option<Self> {
        iri.strip_prefix(ENTITY_IRI_PREFIX)?.parse().ok()
    }

    pub fn iri(self) -> String {
        format!("{ENTITY_IRI_PREFIX}{self}")
    }

    /// Compares the rendered forms (`"Q10" < "Q9"`), matching `str()`
    /// comparison of entity IRIs in SPARQL.
    pub fn render_cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self.kind != other.kind {
            return self.kind.letter().cmp(&other.kind.letter());
        }
        let (mut a, mut b) = ([0u8; 10], [0u8; 10]);
        digits(self.num, &mut a).cmp(digits(other.num, &mut b))
    }
}

fn digits(mut n: u32, buf: &mut [u8; 10]) -> &[u8] {
    let mut i = buf.len();
    loop {
        i -= 1;
        buf[i] = b'0' + (n % 10) as u8;
        n /= 10;
        if n == 0 {
            return &buf[i..];
        }
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.letter(), self.num)
    }
}

impl fmt::Debug for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for EntityId {
    type Err = ParseEntityIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let kind = match chars.next() {
            None => return Err(ParseEntityIdError::Empty),
            Some('Q') => EntityKind::Item,
            Some('P') => EntityKind::Property,
            Some(_) => return Err(ParseEntityIdError::BadPrefix(s.to_owned())),
        };
        let digits = &s[1..];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0')
        {
            return Err(ParseEntityIdError::BadNumber(s.to_owned()));
        }
        let num: u32 = digits
            .parse()
            .map_err(|_| ParseEntityIdError::BadNumber(s.to_owned()))?;
        Ok(EntityId { kind, num })
    }
}

impl Serialize for EntityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if serializer.is_human_readable() {
            serializer.collect_str(self)
        } else {
            (self.kind, self.num).serialize(serializer)
        }
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        if deserializer.is_human_readable() {
            let s = String::deserialize(deserializer)?;
            s.parse().map_err(serde::de::Error::custom)
        } else {
            let (kind, num) = <(EntityKind, u32)>::deserialize(deserializer)?;
            if num == 0 {
                return Err(serde::de::Error::custom("entity number 0"));
            }
            Ok(EntityId { kind, num })
        }
    }
}

/// Statement rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Preferred,
    Normal,
    Deprecated,
}

impl Rank {
    pub const ONTOLOGY_PREFIX: &'static str = "http://wikiba.se/ontology#";

    pub fn as_str(self) -> &'static str {
        match self {
            Rank::Preferred => "preferred",
            Rank::Normal => "normal",
            Rank::Deprecated => "deprecated",
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        match iri.strip_prefix(Self::ONTOLOGY_PREFIX)? {
            "PreferredRank" => Some(Rank::Preferred),
            "NormalRank" => Some(Rank::Normal),
            "DeprecatedRank" => Some(Rank::Deprecated),
            _ => None,
        }
    }

    pub fn iri(self) -> String {
        let local = match self {
            Rank::Preferred => "PreferredRank",
            Rank::Normal => "NormalRank",
            Rank::Deprecated => "DeprecatedRank",
        };
        format!("{}{local}", Self::ONTOLOGY_PREFIX)
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rank `{0}`")]
pub struct ParseRankError(pub String);

impl FromStr for Rank {
    type Err = ParseRankError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "preferred" => Ok(Rank::Preferred),
            "normal" => Ok(Rank::Normal),
            "deprecated" => Ok(Rank::Deprecated),
            other => Err(ParseRankError(other.to_owned())),
        }
    }
}
