//! JSON file formats for collections, groups, protocols, codebooks, states,
//! environment parametrizations, and seizure data.
//!
//! Complex entries are `[re, im]` pairs; numbers are emitted as decimal
//! strings at 17 significant digits so doubles round-trip exactly, and are
//! accepted either as JSON numbers or as such strings. Non-finite values are
//! rejected at parse time. A file's `kind` field selects its schema;
//! collection files may omit it.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use rebound_core::qcore::cx;
use rebound_core::{CMat, Complex64};

/// A finite double that serializes losslessly as a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_f64(self.0))
    }
}

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

struct NumVisitor;

impl Visitor<'_> for NumVisitor {
    type Value = Num;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a finite number or decimal string")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
        if v.is_finite() {
            Ok(Num(v))
        } else {
            Err(E::custom("non-finite number"))
        }
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
        Ok(Num(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
        Ok(Num(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Num(x)),
            _ => Err(E::custom(format!("not a finite decimal: {v}"))),
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Num, D::Error> {
        deserializer.deserialize_any(NumVisitor)
    }
}

/// Row-major complex matrix: array of rows of `[re, im]` pairs.
pub type Matrix = Vec<Vec<[Num; 2]>>;

pub fn to_cmat(m: &Matrix) -> Result<CMat, String> {
    let rows = m.len();
    if rows == 0 {
        return Err("empty matrix".into());
    }
    let cols = m[0].len();
    if cols == 0 || m.iter().any(|r| r.len() != cols) {
        return Err("ragged or empty matrix rows".into());
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for row in m {
        for e in row {
            entries.push(cx(e[0].0, e[1].0));
        }
    }
    Ok(CMat::from_row_slice(rows, cols, &entries))
}

pub fn from_cmat(m: &CMat) -> Matrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| {
                    let e: Complex64 = m[(i, j)];
                    [Num(e.re), Num(e.im)]
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelEntry {
    pub label: String,
    pub kraus: Vec<Matrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollectionFile {
    pub version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub in_dim: usize,
    pub out_dim: usize,
    pub channels: Vec<ChannelEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupFile {
    pub kind: String,
    pub unitaries_in: Vec<Matrix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitaries_out: Option<Vec<Matrix>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub kind: String,
    pub n: usize,
    pub initial_state: Matrix,
    /// Kraus list per adaptive stage (n − 1 stages).
    pub adaptive: Vec<Vec<Matrix>>,
    pub povm: Vec<Matrix>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodebookFile {
    pub kind: String,
    pub words: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub kind: String,
    pub dims: Vec<usize>,
    pub matrix: Matrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledState {
    pub label: String,
    pub matrix: Matrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvFile {
    pub kind: String,
    pub env_dim: usize,
    /// Kraus list of the interaction channel on B'⊗E → B.
    pub interaction: Vec<Matrix>,
    pub states: Vec<LabeledState>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeizeFile {
    pub kind: String,
    pub r_dim: usize,
    pub probe: Matrix,
    /// Kraus list of the seizing channel on R⊗B → E.
    pub seizer: Vec<Matrix>,
}

#[derive(Debug, Clone)]
pub enum InputFile {
    Collection(CollectionFile),
    Group(GroupFile),
    Protocol(ProtocolFile),
    Codebook(CodebookFile),
    State(StateFile),
    Env(EnvFile),
    Seize(SeizeFile),
}

impl InputFile {
    pub fn kind_name(&self) -> &'static str {
        match self {
            InputFile::Collection(_) => "collection",
            InputFile::Group(_) => "group",
            InputFile::Protocol(_) => "protocol",
            InputFile::Codebook(_) => "codebook",
            InputFile::State(_) => "state",
            InputFile::Env(_) => "env",
            InputFile::Seize(_) => "seize",
        }
    }

    pub fn to_canonical_json(&self) -> serde_json::Value {
        match self {
            InputFile::Collection(f) => serde_json::to_value(f).unwrap(),
            InputFile::Group(f) => serde_json::to_value(f).unwrap(),
            InputFile::Protocol(f) => serde_json::to_value(f).unwrap(),
            InputFile::Codebook(f) => serde_json::to_value(f).unwrap(),
            InputFile::State(f) => serde_json::to_value(f).unwrap(),
            InputFile::Env(f) => serde_json::to_value(f).unwrap(),
            InputFile::Seize(f) => serde_json::to_value(f).unwrap(),
        }
    }
}

/// Parse any input file, dispatching on its `kind` field (collections may
/// omit it).
pub fn parse_input(text: &str) -> Result<InputFile, String> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .unwrap_or("collection")
        .to_string();
    let wrap = |e: serde_json::Error| format!("invalid {kind} file: {e}");
    match kind.as_str() {
        "collection" => Ok(InputFile::Collection(serde_json::from_value(value).map_err(wrap)?)),
        "group" => Ok(InputFile::Group(serde_json::from_value(value).map_err(wrap)?)),
        "protocol" => Ok(InputFile::Protocol(serde_json::from_value(value).map_err(wrap)?)),
        "codebook" => Ok(InputFile::Codebook(serde_json::from_value(value).map_err(wrap)?)),
        "state" => Ok(InputFile::State(serde_json::from_value(value).map_err(wrap)?)),
        "env" => Ok(InputFile::Env(serde_json::from_value(value).map_err(wrap)?)),
        "seize" => Ok(InputFile::Seize(serde_json::from_value(value).map_err(wrap)?)),
        other => Err(format!("unknown kind: {other}")),
    }
}
