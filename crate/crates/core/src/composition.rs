//! From grammar to tensors.
//!
//! Atoms are sent to vector spaces ([`SemanticsConfig`]), adjoints to the same
//! space as their base, and a [`LinkDiagram`] becomes a sequence of tensor
//! contractions over the word meanings ([`compose`]).
//!
//! Functional words do not carry learned tensors of their own. An adjective,
//! intransitive verb or transitive verb stores only a vector in the noun
//! space; its tensor is synthesized by wiring that vector into one or two
//! copies of the linear compositionality function [`g_lin`]. Relative and
//! reflexive pronouns get fixed tensors built from the Frobenius maps.
//!
//! Index convention for every order-3 composition tensor `T`: the output is
//! the middle axis, `g_lin(v1, T, v2)[j] = Σ_ik v1[i] T[i,j,k] v2[k]`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{self, Atom, DiagramError, GrammarError, LinkDiagram, PregroupType};
use crate::tensor::{self, Tensor, TensorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompositionError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("no dimension configured for atom {0}")]
    MissingDim(Atom),
    #[error("invalid semantics config: {0}")]
    Config(String),
    #[error("{what}: expected shape {expected:?}, got {actual:?}")]
    Shape {
        what: String,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },
    #[error("word {0:?} is not in the lexicon")]
    UnknownWord(String),
    #[error("word {word:?} of class {class} needs composition tensors, but none were supplied")]
    MissingParams { word: String, class: WordClass },
    #[error("word {word:?}: {message}")]
    Entry { word: String, message: String },
    #[error("sentence does not reduce to {0}")]
    NoReduction(PregroupType),
}

pub type Result<T> = std::result::Result<T, CompositionError>;

/// Dimensions of the spaces atoms are sent to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSemanticsConfig", into = "RawSemanticsConfig")]
pub struct SemanticsConfig {
    atom_dims: BTreeMap<Atom, usize>,
    unified: bool,
}

#[derive(Serialize, Deserialize)]
struct RawSemanticsConfig {
    dims: BTreeMap<Atom, usize>,
    #[serde(default)]
    unified: bool,
}

impl TryFrom<RawSemanticsConfig> for SemanticsConfig {
    type Error = CompositionError;

    fn try_from(raw: RawSemanticsConfig) -> Result<Self> {
        SemanticsConfig::new(raw.dims, raw.unified)
    }
}

impl From<SemanticsConfig> for RawSemanticsConfig {
    fn from(c: SemanticsConfig) -> Self {
        RawSemanticsConfig {
            dims: c.atom_dims,
            unified: c.unified,
        }
    }
}

impl SemanticsConfig {
    /// `unified` forces every atom onto one shared dimension.
    pub fn new(atom_dims: BTreeMap<Atom, usize>, unified: bool) -> Result<Self> {
        if let Some((atom, _)) = atom_dims.iter().find(|(_, &d)| d == 0) {
            return Err(CompositionError::Config(format!("atom {atom} has dimension 0")));
        }
        for atom in [Atom::noun(), Atom::sentence()] {
            if !atom_dims.contains_key(&atom) {
                return Err(CompositionError::MissingDim(atom));
            }
        }
        if unified {
            let mut dims = atom_dims.values();
            let first = dims.next().copied();
            if dims.any(|&d| Some(d) != first) {
                return Err(CompositionError::Config(
                    "unified mode needs every atom to share one dimension".into(),
                ));
            }
        }
        Ok(SemanticsConfig { atom_dims, unified })
    }

    /// One shared dimension `d` for nouns and sentences.
    pub fn unified(d: usize) -> Result<Self> {
        SemanticsConfig::new(
            BTreeMap::from([(Atom::noun(), d), (Atom::sentence(), d)]),
            true,
        )
    }

    /// Separate noun and sentence spaces.
    pub fn split(noun_dim: usize, sentence_dim: usize) -> Result<Self> {
        SemanticsConfig::new(
            BTreeMap::from([(Atom::noun(), noun_dim), (Atom::sentence(), sentence_dim)]),
            false,
        )
    }

    pub fn is_unified(&self) -> bool {
        self.unified
    }

    pub fn dim(&self, atom: &Atom) -> Result<usize> {
        self.atom_dims
            .get(atom)
            .copied()
            .ok_or_else(|| CompositionError::MissingDim(atom.clone()))
    }

    pub fn noun_dim(&self) -> usize {
        self.atom_dims[&Atom::noun()]
    }

    pub fn sentence_dim(&self) -> usize {
        self.atom_dims[&Atom::sentence()]
    }

    /// Tensor shape of a word of type `t`: one axis per simple type.
    pub fn shape_of(&self, t: &PregroupType) -> Result<Vec<usize>> {
        t.factors().iter().map(|f| self.dim(&f.base)).collect()
    }
}

/// Pointwise squashing nonlinearity of the tree networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Squash {
    Tanh,
    Identity,
    Logistic,
}

impl Squash {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Squash::Tanh => x.tanh(),
            Squash::Identity => x,
            Squash::Logistic => 1.0 / (1.0 + (-x).exp()),
        }
    }

    pub fn apply_tensor(self, t: &Tensor) -> Result<Tensor> {
        match self {
            Squash::Identity => Ok(t.clone()),
            _ => Ok(tensor::map(t, |x| self.apply(x))?),
        }
    }
}

fn vector_len(v: &Tensor, what: &str) -> Result<usize> {
    if v.order() != 1 {
        return Err(CompositionError::Shape {
            what: format!("{what} must be a vector"),
            expected: vec![v.len()],
            actual: v.shape().to_vec(),
        });
    }
    Ok(v.shape()[0])
}

fn expect_shape(t: &Tensor, what: &str, expected: &[usize]) -> Result<()> {
    if t.shape() == expected {
        Ok(())
    } else {
        Err(CompositionError::Shape {
            what: what.to_string(),
            expected: expected.to_vec(),
            actual: t.shape().to_vec(),
        })
    }
}

/// Linear compositionality function: `out[j] = Σ_ik v1[i] T[i,j,k] v2[k]`.
///
/// `T` has shape `[|v1|, d_out, |v2|]`.
pub fn g_lin(v1: &Tensor, t: &Tensor, v2: &Tensor) -> Result<Tensor> {
    let d1 = vector_len(v1, "left argument")?;
    let d2 = vector_len(v2, "right argument")?;
    if t.order() != 3 || t.shape()[0] != d1 || t.shape()[2] != d2 {
        let out = if t.order() == 3 { t.shape()[1] } else { 0 };
        return Err(CompositionError::Shape {
            what: "composition tensor".into(),
            expected: vec![d1, out, d2],
            actual: t.shape().to_vec(),
        });
    }
    let right = tensor::contract(t, 2, v2, 0)?;
    Ok(tensor::contract(v1, 0, &right, 0)?)
}

/// Tree-RNN combiner `f1(M · [v1; v2])` with `M` of shape `[d, 2d]`.
pub fn g_tree_rnn(v1: &Tensor, v2: &Tensor, m: &Tensor, f1: Squash) -> Result<Tensor> {
    let d = vector_len(v1, "left argument")?;
    expect_shape(v2, "right argument", &[d])?;
    expect_shape(m, "combination matrix", &[d, 2 * d])?;
    let stacked = Tensor::vector(v1.data().iter().chain(v2.data()).copied().collect())?;
    let pre = tensor::contract(m, 1, &stacked, 0)?;
    f1.apply_tensor(&pre)
}

/// Tree-RNTN combiner `g_tree_rnn(v1, v2) + f2(g_lin(v1, T, v2))` with `T` of
/// shape `[d, d, d]`.
pub fn g_tree_rntn(v1: &Tensor, v2: &Tensor, m: &Tensor, t: &Tensor, f1: Squash, f2: Squash) -> Result<Tensor> {
    let d = vector_len(v1, "left argument")?;
    expect_shape(t, "composition tensor", &[d, d, d])?;
    let affine = g_tree_rnn(v1, v2, m, f1)?;
    let bilinear = f2.apply_tensor(&g_lin(v1, t, v2)?)?;
    Ok(tensor::add(&affine, &bilinear)?)
}

/// The composition tensors of the linear model.
///
/// In unified mode one cubical tensor serves every word class. In per-type
/// mode adjectives, intransitive verbs and transitive verbs each get their
/// own; transitive verbs use two tensors joined through a hidden space.
#[derive(Debug, Clone, PartialEq)]
pub enum CompositionParams {
    Unified {
        t: Tensor,
    },
    PerType {
        /// `[d_n, d_n, d_n]`
        adj: Tensor,
        /// `[d_n, d_s, d_n]`
        iv: Tensor,
        /// `[d_n, d_h, d_n]`
        tv_inner: Tensor,
        /// `[d_n, d_s, d_h]`
        tv_outer: Tensor,
    },
}

/// Which composition tensor a tree node applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Adj,
    Iv,
    TvInner,
    TvOuter,
}

impl CompositionParams {
    pub fn unified(t: Tensor) -> Result<Self> {
        let d = t.shape().first().copied().unwrap_or(0);
        expect_shape(&t, "unified composition tensor", &[d, d, d])?;
        Ok(CompositionParams::Unified { t })
    }

    pub fn per_type(adj: Tensor, iv: Tensor, tv_inner: Tensor, tv_outer: Tensor) -> Result<Self> {
        let d_n = adj.shape().first().copied().unwrap_or(0);
        let d_s = iv.shape().get(1).copied().unwrap_or(0);
        let d_h = tv_inner.shape().get(1).copied().unwrap_or(0);
        expect_shape(&adj, "adjective tensor", &[d_n, d_n, d_n])?;
        expect_shape(&iv, "intransitive verb tensor", &[d_n, d_s, d_n])?;
        expect_shape(&tv_inner, "inner transitive verb tensor", &[d_n, d_h, d_n])?;
        expect_shape(&tv_outer, "outer transitive verb tensor", &[d_n, d_s, d_h])?;
        Ok(CompositionParams::PerType {
            adj,
            iv,
            tv_inner,
            tv_outer,
        })
    }

    pub fn slot(&self, slot: Slot) -> &Tensor {
        match self {
            CompositionParams::Unified { t } => t,
            CompositionParams::PerType {
                adj,
                iv,
                tv_inner,
                tv_outer,
            } => match slot {
                Slot::Adj => adj,
                Slot::Iv => iv,
                Slot::TvInner => tv_inner,
                Slot::TvOuter => tv_outer,
            },
        }
    }

    pub fn slot_mut(&mut self, slot: Slot) -> &mut Tensor {
        match self {
            CompositionParams::Unified { t } => t,
            CompositionParams::PerType {
                adj,
                iv,
                tv_inner,
                tv_outer,
            } => match slot {
                Slot::Adj => adj,
                Slot::Iv => iv,
                Slot::TvInner => tv_inner,
                Slot::TvOuter => tv_outer,
            },
        }
    }

    /// The distinct tensors, in a fixed order.
    pub fn tensors(&self) -> Vec<(&'static str, &Tensor)> {
        match self {
            CompositionParams::Unified { t } => vec![("T", t)],
            CompositionParams::PerType {
                adj,
                iv,
                tv_inner,
                tv_outer,
            } => vec![
                ("T_adj", adj),
                ("T_iv", iv),
                ("T_tv_inner", tv_inner),
                ("T_tv_outer", tv_outer),
            ],
        }
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            CompositionParams::Unified { t } => vec![t],
            CompositionParams::PerType {
                adj,
                iv,
                tv_inner,
                tv_outer,
            } => vec![adj, iv, tv_inner, tv_outer],
        }
    }

    pub fn noun_dim(&self) -> usize {
        self.slot(Slot::Adj).shape()[0]
    }

    pub fn sentence_dim(&self) -> usize {
        self.slot(Slot::Iv).shape()[1]
    }

    pub fn hidden_dim(&self) -> usize {
        self.slot(Slot::TvInner).shape()[1]
    }

    /// Checks the tensors against the configured noun and sentence spaces.
    pub fn check_against(&self, config: &SemanticsConfig) -> Result<()> {
        let (d_n, d_s) = (config.noun_dim(), config.sentence_dim());
        match self {
            CompositionParams::Unified { t } => {
                if !config.is_unified() || d_n != d_s {
                    return Err(CompositionError::Config(
                        "a unified composition tensor needs a unified semantics config".into(),
                    ));
                }
                expect_shape(t, "T", &[d_n, d_n, d_n])
            }
            CompositionParams::PerType { .. } => {
                let d_h = self.hidden_dim();
                expect_shape(self.slot(Slot::Adj), "T_adj", &[d_n, d_n, d_n])?;
                expect_shape(self.slot(Slot::Iv), "T_iv", &[d_n, d_s, d_n])?;
                expect_shape(self.slot(Slot::TvInner), "T_tv_inner", &[d_n, d_h, d_n])?;
                expect_shape(self.slot(Slot::TvOuter), "T_tv_outer", &[d_n, d_s, d_h])
            }
        }
    }
}

/// Tensor for a transitive verb, shape `[d_n, d_s, d_n]`:
/// `B[i,j,c] = Σ_am verb[a] T_outer[i,j,m] T_inner[a,m,c]`.
///
/// Contracting `B` with an object and then a subject equals
/// `g_lin(subj, T_outer, g_lin(verb, T_inner, obj))`.
pub fn build_transitive_verb(verb_vec: &Tensor, params: &CompositionParams) -> Result<Tensor> {
    let inner = params.slot(Slot::TvInner);
    let d = vector_len(verb_vec, "verb vector")?;
    expect_shape(verb_vec, "verb vector", &inner.shape()[..1])?;
    debug_assert_eq!(d, inner.shape()[0]);
    let bound = tensor::contract(verb_vec, 0, inner, 0)?;
    Ok(tensor::contract(params.slot(Slot::TvOuter), 2, &bound, 0)?)
}

/// Matrix for an adjective, shape `[d_n, d_n]`: `A[j,k] = Σ_i adj[i] T_adj[i,j,k]`.
pub fn build_adjective(adj_vec: &Tensor, params: &CompositionParams) -> Result<Tensor> {
    let t = params.slot(Slot::Adj);
    vector_len(adj_vec, "adjective vector")?;
    expect_shape(adj_vec, "adjective vector", &t.shape()[..1])?;
    Ok(tensor::contract(adj_vec, 0, t, 0)?)
}

/// Matrix for an intransitive verb, shape `[d_n, d_s]`: `V[i,j] = Σ_k T_iv[i,j,k] verb[k]`.
pub fn build_intransitive_verb(verb_vec: &Tensor, params: &CompositionParams) -> Result<Tensor> {
    let t = params.slot(Slot::Iv);
    vector_len(verb_vec, "verb vector")?;
    expect_shape(verb_vec, "verb vector", &t.shape()[2..])?;
    Ok(tensor::contract(t, 2, verb_vec, 0)?)
}

/// Subject relative pronoun, type `n^r n s^l n`, shape `[d_n, d_n, d_s, d_n]`.
///
/// The noun wire is copied (Δ) onto the head noun and the clause subject, the
/// clause's sentence wire is deleted (ι), and the copies are merged (μ). The
/// result is `W[a,b,j,c] = 1` exactly when `a = b = c`.
pub fn build_relative_pronoun(config: &SemanticsConfig) -> Result<Tensor> {
    let (d_n, d_s) = (config.noun_dim(), config.sentence_dim());
    Ok(Tensor::from_fn(&[d_n, d_n, d_s, d_n], |i| {
        if i[0] == i[1] && i[1] == i[3] {
            1.0
        } else {
            0.0
        }
    })?)
}

/// Simplified form of a subject relative clause `subj who verb obj`:
/// delete the verb's sentence wire, then merge pointwise with the subject.
pub fn relpron_compose(subj: &Tensor, verb: &Tensor, obj: &Tensor) -> Result<Tensor> {
    let d_n = vector_len(subj, "head noun")?;
    if verb.order() != 3 {
        return Err(CompositionError::Shape {
            what: "transitive verb tensor".into(),
            expected: vec![d_n, 0, d_n],
            actual: verb.shape().to_vec(),
        });
    }
    let d_s = verb.shape()[1];
    expect_shape(verb, "transitive verb tensor", &[d_n, d_s, d_n])?;
    expect_shape(obj, "object", &[d_n])?;
    let verb_obj = tensor::contract(verb, 2, obj, 0)?;
    // ι as a covector is the all-ones vector
    let deleted = tensor::contract(&verb_obj, 1, &tensor::frobenius_zeta(d_s)?, 0)?;
    Ok(tensor::pointwise_mul(subj, &deleted)?)
}

/// Reflexive pronoun, type `n s^r n^rr n^r s`, shape `[d_n, d_s, d_n, d_n, d_s]`:
/// `R[a,j,b,c,j'] = δ_ab δ_ac δ_jj'`. The incoming noun is copied into both
/// argument wires of the verb and the sentence wire passes straight through.
pub fn build_reflexive_pronoun(config: &SemanticsConfig) -> Result<Tensor> {
    let (d_n, d_s) = (config.noun_dim(), config.sentence_dim());
    Ok(Tensor::from_fn(&[d_n, d_s, d_n, d_n, d_s], |i| {
        if i[0] == i[2] && i[0] == i[3] && i[1] == i[4] {
            1.0
        } else {
            0.0
        }
    })?)
}

/// Simplified form of `noun verb himself`: the noun is copied with Δ and the
/// two copies fill the verb's subject and object, so
/// `out[j] = Σ_i noun[i] verb[i,j,i]`.
pub fn reflexive_compose(verb: &Tensor, noun: &Tensor) -> Result<Tensor> {
    let d_n = vector_len(noun, "noun")?;
    if verb.order() != 3 {
        return Err(CompositionError::Shape {
            what: "transitive verb tensor".into(),
            expected: vec![d_n, 0, d_n],
            actual: verb.shape().to_vec(),
        });
    }
    expect_shape(verb, "transitive verb tensor", &[d_n, verb.shape()[1], d_n])?;
    let copied = tensor::frobenius_delta(noun)?;
    // [j, k, k'] then trace over the two object-side axes
    let plugged = tensor::contract(verb, 0, &copied, 0)?;
    Ok(tensor::self_contract(&plugged, 1, 2)?)
}

/// A word with its grammatical type and a tensor of matching shape.
#[derive(Debug, Clone, PartialEq)]
pub struct WordMeaning {
    pub word: String,
    pub gtype: PregroupType,
    pub tensor: Tensor,
}

impl WordMeaning {
    pub fn new(word: impl Into<String>, gtype: PregroupType, tensor: Tensor, config: &SemanticsConfig) -> Result<Self> {
        let word = word.into();
        let expected = config.shape_of(&gtype)?;
        expect_shape(&tensor, &format!("meaning of {word:?} (type {gtype})"), &expected)?;
        Ok(WordMeaning { word, gtype, tensor })
    }
}

struct Piece {
    tensor: Tensor,
    /// flattened sentence position carried by each axis
    positions: Vec<usize>,
}

/// Executes `diagram` over the word meanings and returns the tensor on the
/// open wires, axes in left-to-right order.
///
/// Cups are contracted innermost first. A cup whose ends already sit in the
/// same intermediate tensor becomes a trace.
pub fn compose(words: &[WordMeaning], diagram: &LinkDiagram, config: &SemanticsConfig) -> Result<Tensor> {
    let types: Vec<PregroupType> = words.iter().map(|w| w.gtype.clone()).collect();
    let factors = grammar::flatten(&types);
    diagram.validate(&factors)?;

    let mut pieces = Vec::with_capacity(words.len());
    let mut offset = 0;
    for w in words {
        let expected = config.shape_of(&w.gtype)?;
        expect_shape(&w.tensor, &format!("meaning of {:?}", w.word), &expected)?;
        let n = w.gtype.len();
        pieces.push(Piece {
            tensor: w.tensor.clone(),
            positions: (offset..offset + n).collect(),
        });
        offset += n;
    }

    let mut links = diagram.links().to_vec();
    links.sort_by_key(|&(i, j)| (j - i, i));

    let locate = |pieces: &[Piece], p: usize| -> (usize, usize) {
        pieces
            .iter()
            .enumerate()
            .find_map(|(x, piece)| piece.positions.iter().position(|&q| q == p).map(|axis| (x, axis)))
            .expect("every position belongs to one piece")
    };

    for (i, j) in links {
        let (pa, ax) = locate(&pieces, i);
        let (pb, bx) = locate(&pieces, j);
        if pa == pb {
            let piece = &mut pieces[pa];
            piece.tensor = tensor::self_contract(&piece.tensor, ax, bx)?;
            piece.positions.retain(|&q| q != i && q != j);
        } else {
            let merged = tensor::contract(&pieces[pa].tensor, ax, &pieces[pb].tensor, bx)?;
            let positions: Vec<usize> = pieces[pa]
                .positions
                .iter()
                .filter(|&&q| q != i)
                .chain(pieces[pb].positions.iter().filter(|&&q| q != j))
                .copied()
                .collect();
            let (keep, drop) = (pa.min(pb), pa.max(pb));
            pieces[keep] = Piece {
                tensor: merged,
                positions,
            };
            pieces.remove(drop);
        }
    }

    let mut pieces = pieces.into_iter();
    let first = pieces.next().expect("non-empty sentence");
    let (mut result, mut positions) = (first.tensor, first.positions);
    for piece in pieces {
        result = tensor::tensor_product(&result, &piece.tensor)?;
        positions.extend(piece.positions);
    }
    let perm: Vec<usize> = diagram
        .open()
        .iter()
        .map(|p| positions.iter().position(|q| q == p).expect("open position survives"))
        .collect();
    Ok(tensor::permute(&result, &perm)?)
}

/// Lexical category; fixes the pregroup type and how the meaning is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordClass {
    Noun,
    Adj,
    Iv,
    Tv,
    Relpron,
    Reflpron,
    Raw,
}

impl WordClass {
    pub const ALL: [WordClass; 7] = [
        WordClass::Noun,
        WordClass::Adj,
        WordClass::Iv,
        WordClass::Tv,
        WordClass::Relpron,
        WordClass::Reflpron,
        WordClass::Raw,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WordClass::Noun => "noun",
            WordClass::Adj => "adj",
            WordClass::Iv => "iv",
            WordClass::Tv => "tv",
            WordClass::Relpron => "relpron",
            WordClass::Reflpron => "reflpron",
            WordClass::Raw => "raw",
        }
    }

    /// The required pregroup type, or `None` for `raw`.
    pub fn canonical_type(self) -> Option<PregroupType> {
        let text = match self {
            WordClass::Noun => "n",
            WordClass::Adj => "n n^l",
            WordClass::Iv => "n^r s",
            WordClass::Tv => "n^r s n^l",
            WordClass::Relpron => "n^r n s^l n",
            WordClass::Reflpron => "n s^r n^rr n^r s",
            WordClass::Raw => return None,
        };
        Some(text.parse().expect("canonical types parse"))
    }

    /// Classes whose stored meaning is a single noun-space vector.
    pub fn stores_vector(self) -> bool {
        matches!(self, WordClass::Noun | WordClass::Adj | WordClass::Iv | WordClass::Tv)
    }
}

impl fmt::Display for WordClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WordClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        WordClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown word class {s:?}"))
    }
}

/// Stored meaning of a lexicon entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// noun-space vector (noun, adj, iv, tv)
    Vector(Tensor),
    /// explicit tensor (raw)
    Tensor(Tensor),
    /// purely structural meaning (pronouns)
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconEntry {
    pub word: String,
    pub gtype: PregroupType,
    pub class: WordClass,
    pub payload: Payload,
}

/// Which part of an entry failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryProblem {
    pub field: &'static str,
    pub message: String,
}

impl LexiconEntry {
    /// Checks class/type consistency and payload shape under `config`.
    pub fn check(&self, config: &SemanticsConfig) -> std::result::Result<(), EntryProblem> {
        let problem = |field, message: String| Err(EntryProblem { field, message });
        if let Some(expected) = self.class.canonical_type() {
            if expected != self.gtype {
                return problem(
                    "type",
                    format!("class {} requires type {expected}, got {}", self.class, self.gtype),
                );
            }
        }
        let shape = match config.shape_of(&self.gtype) {
            Ok(s) => s,
            Err(e) => return problem("type", e.to_string()),
        };
        match (&self.payload, self.class) {
            (Payload::Vector(v), c) if c.stores_vector() => {
                let d_n = config.noun_dim();
                if v.shape() != [d_n] {
                    return problem(
                        "vector",
                        format!("expected a vector of length {d_n}, got shape {:?}", v.shape()),
                    );
                }
            }
            (Payload::Tensor(t), WordClass::Raw) => {
                if t.shape() != shape.as_slice() {
                    return problem(
                        "tensor",
                        format!("type {} needs shape {shape:?}, got {:?}", self.gtype, t.shape()),
                    );
                }
            }
            (Payload::None, WordClass::Relpron | WordClass::Reflpron) => {}
            (Payload::None, c) if c.stores_vector() => {
                return problem("vector", format!("class {c} needs a vector"));
            }
            (Payload::None, _) => return problem("tensor", "class raw needs a tensor".into()),
            (Payload::Vector(_), c) => {
                return problem("vector", format!("class {c} does not take a vector"));
            }
            (Payload::Tensor(_), c) => {
                return problem("tensor", format!("class {c} does not take a tensor"));
            }
        }
        Ok(())
    }
}

/// Words with their types and stored meanings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, LexiconEntry>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces an entry after validating it.
    pub fn insert(&mut self, entry: LexiconEntry, config: &SemanticsConfig) -> Result<()> {
        entry.check(config).map_err(|p| CompositionError::Entry {
            word: entry.word.clone(),
            message: format!("{}: {}", p.field, p.message),
        })?;
        self.entries.insert(entry.word.clone(), entry);
        Ok(())
    }

    pub fn get(&self, word: &str) -> Option<&LexiconEntry> {
        self.entries.get(word)
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Turns whitespace-separated sentences into tensors: lexicon lookup,
/// reduction, tensor synthesis for functional words, then [`compose`].
#[derive(Debug, Clone, Copy)]
pub struct Composer<'a> {
    pub config: &'a SemanticsConfig,
    pub lexicon: &'a Lexicon,
    pub params: Option<&'a CompositionParams>,
    /// fitted vectors that take precedence over the lexicon's
    pub vectors: Option<&'a BTreeMap<String, Tensor>>,
}

impl<'a> Composer<'a> {
    pub fn new(config: &'a SemanticsConfig, lexicon: &'a Lexicon) -> Self {
        Composer {
            config,
            lexicon,
            params: None,
            vectors: None,
        }
    }

    pub fn with_params(mut self, params: &'a CompositionParams) -> Self {
        self.params = Some(params);
        self
    }

    pub fn with_vectors(mut self, vectors: &'a BTreeMap<String, Tensor>) -> Self {
        self.vectors = Some(vectors);
        self
    }

    fn entry(&self, word: &str) -> Result<&'a LexiconEntry> {
        self.lexicon
            .get(word)
            .ok_or_else(|| CompositionError::UnknownWord(word.to_string()))
    }

    pub fn types(&self, words: &[&str]) -> Result<Vec<PregroupType>> {
        words.iter().map(|w| Ok(self.entry(w)?.gtype.clone())).collect()
    }

    /// Reduces the sentence to `target`; `Ok(None)` if it does not reduce.
    pub fn parse(&self, words: &[&str], target: &PregroupType) -> Result<Option<LinkDiagram>> {
        let types = self.types(words)?;
        Ok(grammar::reduce(&types, target)?)
    }

    fn vector_of(&self, entry: &LexiconEntry) -> Result<Tensor> {
        if let Some(v) = self.vectors.and_then(|m| m.get(&entry.word)) {
            expect_shape(v, &format!("fitted vector for {:?}", entry.word), &[self.config.noun_dim()])?;
            return Ok(v.clone());
        }
        match &entry.payload {
            Payload::Vector(v) => Ok(v.clone()),
            _ => Err(CompositionError::Entry {
                word: entry.word.clone(),
                message: "no vector stored".into(),
            }),
        }
    }

    /// The tensor meaning of one word, synthesizing functional-word tensors.
    pub fn word_meaning(&self, word: &str) -> Result<WordMeaning> {
        let entry = self.entry(word)?;
        let params = || {
            self.params.ok_or(CompositionError::MissingParams {
                word: word.to_string(),
                class: entry.class,
            })
        };
        let tensor = match entry.class {
            WordClass::Noun => self.vector_of(entry)?,
            WordClass::Adj => build_adjective(&self.vector_of(entry)?, params()?)?,
            WordClass::Iv => build_intransitive_verb(&self.vector_of(entry)?, params()?)?,
            WordClass::Tv => build_transitive_verb(&self.vector_of(entry)?, params()?)?,
            WordClass::Relpron => build_relative_pronoun(self.config)?,
            WordClass::Reflpron => build_reflexive_pronoun(self.config)?,
            WordClass::Raw => match &entry.payload {
                Payload::Tensor(t) => t.clone(),
                _ => {
                    return Err(CompositionError::Entry {
                        word: word.to_string(),
                        message: "raw entry without a tensor".into(),
                    })
                }
            },
        };
        WordMeaning::new(word, entry.gtype.clone(), tensor, self.config)
    }

    /// Reduces and composes; the diagram is returned alongside the tensor.
    pub fn compose_sentence(&self, words: &[&str], target: &PregroupType) -> Result<(LinkDiagram, Tensor)> {
        let diagram = self
            .parse(words, target)?
            .ok_or_else(|| CompositionError::NoReduction(target.clone()))?;
        let meanings = words
            .iter()
            .map(|w| self.word_meaning(w))
            .collect::<Result<Vec<_>>>()?;
        let t = compose(&meanings, &diagram, self.config)?;
        Ok((diagram, t))
    }
}
