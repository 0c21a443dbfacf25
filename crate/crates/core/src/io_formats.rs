//! File formats.
//!
//! * tensors: `{"shape": [...], "data": [...]}`
//! * diagrams: `{"n": int, "links": [[i, j], ...], "open": [k, ...]}`
//! * lexicons: JSON lines, one word per line
//! * training data: JSON lines of [`TrainExample`]
//! * models: `{"T": tensor, "words": {word: tensor}}`, or with per-type
//!   tensors under `T_adj`, `T_iv`, `T_tv_inner` and `T_tv_outer`
//! * run configuration: semantics dims, parameter mode and training settings
//!
//! Every float is written with 17 significant digits, which round-trips any
//! `f64` exactly.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composition::{CompositionParams, Lexicon, LexiconEntry, Payload, SemanticsConfig, WordClass};
use crate::grammar::{LinkDiagram, PregroupType};
use crate::tensor::Tensor;
use crate::training::{ModelParams, TrainConfig, TrainExample};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: malformed JSON: {message}")]
    Json {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: field {field:?}: {message}")]
    Validation {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },
}

impl IoError {
    /// True for content problems, false for filesystem or syntax problems.
    pub fn is_validation(&self) -> bool {
        matches!(self, IoError::Validation { .. })
    }
}

pub type Result<T> = std::result::Result<T, IoError>;

/// serde_json formatter printing every `f64` with 17 significant digits.
#[derive(Debug, Clone, Copy, Default)]
pub struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", format_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// `value` in scientific notation with 17 significant digits, e.g.
/// `1.0000000000000000e0`.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Compact single-line JSON using [`FullPrecision`].
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser).expect("in-memory serialization of plain data");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<T: DeserializeOwned>(path: &Path, line: usize, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| IoError::Json {
        path: path.to_path_buf(),
        line: if line == 0 { e.line() } else { line },
        message: e.to_string(),
    })
}

/// Non-blank lines with 1-based line numbers.
fn json_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = fs::File::open(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| IoError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

pub fn save_tensor(path: &Path, t: &Tensor) -> Result<()> {
    write(path, &(to_json(t) + "\n"))
}

pub fn load_tensor(path: &Path) -> Result<Tensor> {
    parse_json(path, 0, &read(path)?)
}

pub fn save_diagram(path: &Path, d: &LinkDiagram) -> Result<()> {
    write(path, &(to_json(d) + "\n"))
}

pub fn load_diagram(path: &Path) -> Result<LinkDiagram> {
    parse_json(path, 0, &read(path)?)
}

/// One lexicon line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconRecord {
    pub word: String,
    #[serde(rename = "type")]
    pub gtype: String,
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tensor: Option<Tensor>,
}

impl LexiconRecord {
    pub fn from_entry(entry: &LexiconEntry) -> Self {
        let (vector, tensor) = match &entry.payload {
            Payload::Vector(v) => (Some(v.data().to_vec()), None),
            Payload::Tensor(t) => (None, Some(t.clone())),
            Payload::None => (None, None),
        };
        LexiconRecord {
            word: entry.word.clone(),
            gtype: entry.gtype.to_string(),
            class: entry.class.to_string(),
            vector,
            tensor,
        }
    }

    /// Converts and validates; errors carry the offending field name.
    pub fn into_entry(self, config: &SemanticsConfig) -> std::result::Result<LexiconEntry, (String, String)> {
        if self.word.trim().is_empty() || self.word.chars().any(char::is_whitespace) {
            return Err(("word".into(), format!("invalid word {:?}", self.word)));
        }
        let class: WordClass = self.class.parse().map_err(|e| ("class".to_string(), e))?;
        let gtype: PregroupType = self.gtype.parse().map_err(|e| ("type".to_string(), format!("{e}")))?;
        let payload = match (self.vector, self.tensor) {
            (Some(_), Some(_)) => return Err(("vector".into(), "give either vector or tensor, not both".into())),
            (Some(v), None) => Payload::Vector(Tensor::vector(v).map_err(|e| ("vector".to_string(), e.to_string()))?),
            (None, Some(t)) => Payload::Tensor(t),
            (None, None) => Payload::None,
        };
        let entry = LexiconEntry {
            word: self.word,
            gtype,
            class,
            payload,
        };
        entry
            .check(config)
            .map_err(|p| (p.field.to_string(), format!("word {:?}: {}", entry.word, p.message)))?;
        Ok(entry)
    }
}

/// Reads a JSON-lines lexicon, validating every record against `config`.
pub fn load_lexicon(path: &Path, config: &SemanticsConfig) -> Result<Lexicon> {
    let mut lexicon = Lexicon::new();
    for (line, text) in json_lines(path)? {
        let record: LexiconRecord = parse_json(path, line, &text)?;
        let word = record.word.clone();
        let entry = record.into_entry(config).map_err(|(field, message)| IoError::Validation {
            path: path.to_path_buf(),
            line,
            field,
            message,
        })?;
        if lexicon.get(&word).is_some() {
            return Err(IoError::Validation {
                path: path.to_path_buf(),
                line,
                field: "word".into(),
                message: format!("duplicate word {word:?}"),
            });
        }
        lexicon.insert(entry, config).expect("entry already validated");
    }
    Ok(lexicon)
}

pub fn save_lexicon(path: &Path, lexicon: &Lexicon) -> Result<()> {
    let mut out = String::new();
    for entry in lexicon.entries() {
        out.push_str(&to_json(&LexiconRecord::from_entry(entry)));
        out.push('\n');
    }
    write(path, &out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRecord {
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    t: Option<Tensor>,
    #[serde(rename = "T_adj", default, skip_serializing_if = "Option::is_none")]
    t_adj: Option<Tensor>,
    #[serde(rename = "T_iv", default, skip_serializing_if = "Option::is_none")]
    t_iv: Option<Tensor>,
    #[serde(rename = "T_tv_inner", default, skip_serializing_if = "Option::is_none")]
    t_tv_inner: Option<Tensor>,
    #[serde(rename = "T_tv_outer", default, skip_serializing_if = "Option::is_none")]
    t_tv_outer: Option<Tensor>,
    words: BTreeMap<String, Tensor>,
}

pub fn model_to_json(model: &ModelParams) -> String {
    let mut record = ModelRecord {
        t: None,
        t_adj: None,
        t_iv: None,
        t_tv_inner: None,
        t_tv_outer: None,
        words: model.words.clone(),
    };
    match &model.composition {
        CompositionParams::Unified { t } => record.t = Some(t.clone()),
        CompositionParams::PerType {
            adj,
            iv,
            tv_inner,
            tv_outer,
        } => {
            record.t_adj = Some(adj.clone());
            record.t_iv = Some(iv.clone());
            record.t_tv_inner = Some(tv_inner.clone());
            record.t_tv_outer = Some(tv_outer.clone());
        }
    }
    to_json(&record)
}

pub fn save_model(path: &Path, model: &ModelParams) -> Result<()> {
    write(path, &(model_to_json(model) + "\n"))
}

/// Reads a model file. With a config, tensor and vector shapes are checked too.
pub fn load_model(path: &Path, config: Option<&SemanticsConfig>) -> Result<ModelParams> {
    let record: ModelRecord = parse_json(path, 0, &read(path)?)?;
    let invalid = |field: &str, message: String| IoError::Validation {
        path: path.to_path_buf(),
        line: 1,
        field: field.to_string(),
        message,
    };
    let composition = match record {
        ModelRecord {
            t: Some(t),
            t_adj: None,
            t_iv: None,
            t_tv_inner: None,
            t_tv_outer: None,
            ..
        } => CompositionParams::unified(t).map_err(|e| invalid("T", e.to_string()))?,
        ModelRecord {
            t: None,
            t_adj: Some(adj),
            t_iv: Some(iv),
            t_tv_inner: Some(inner),
            t_tv_outer: Some(outer),
            ..
        } => CompositionParams::per_type(adj, iv, inner, outer).map_err(|e| invalid("T_adj", e.to_string()))?,
        _ => {
            return Err(invalid(
                "T",
                "expected either T alone or all of T_adj, T_iv, T_tv_inner, T_tv_outer".into(),
            ))
        }
    };
    let d_n = composition.noun_dim();
    for (word, v) in &record.words {
        if v.shape() != [d_n] {
            return Err(invalid(
                "words",
                format!("vector for {word:?} has shape {:?}, expected [{d_n}]", v.shape()),
            ));
        }
    }
    if let Some(config) = config {
        composition
            .check_against(config)
            .map_err(|e| invalid("T", e.to_string()))?;
    }
    Ok(ModelParams {
        composition,
        words: record.words,
    })
}

pub fn load_examples(path: &Path) -> Result<Vec<TrainExample>> {
    json_lines(path)?
        .into_iter()
        .map(|(line, text)| parse_json(path, line, &text))
        .collect()
}

pub fn save_examples(path: &Path, examples: &[TrainExample]) -> Result<()> {
    let mut out = String::new();
    for ex in examples {
        out.push_str(&to_json(ex));
        out.push('\n');
    }
    write(path, &out)
}

/// How the composition tensors are organized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    #[default]
    Unified,
    PerType,
}

/// Run configuration (`--config` / `DISCO_CONFIG`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// dimension per atom, e.g. `{"n": 3, "s": 3}`
    pub dims: BTreeMap<crate::grammar::Atom, usize>,
    #[serde(default)]
    pub mode: ParamMode,
    /// hidden dimension between the two transitive-verb tensors; defaults to the noun dimension
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden: Option<usize>,
    #[serde(default)]
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn semantics(&self) -> std::result::Result<SemanticsConfig, crate::composition::CompositionError> {
        SemanticsConfig::new(self.dims.clone(), self.mode == ParamMode::Unified)
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
            .or_else(|| self.dims.get(&crate::grammar::Atom::noun()).copied())
            .unwrap_or(1)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let config: RunConfig = parse_json(path, 0, &read(path)?)?;
    config.semantics().map_err(|e| IoError::Validation {
        path: path.to_path_buf(),
        line: 1,
        field: "dims".into(),
        message: e.to_string(),
    })?;
    config.train.validate().map_err(|e| IoError::Validation {
        path: path.to_path_buf(),
        line: 1,
        field: "train".into(),
        message: e.to_string(),
    })?;
    Ok(config)
}
