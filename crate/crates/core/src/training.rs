//! Gradients and plain SGD for the linear model.
//!
//! A training sentence is evaluated as a tree of [`g_lin`] applications, the
//! same computation the categorical route performs once functional-word
//! tensors are synthesized:
//!
//! * `adj np`          → `g_lin(adj, T_adj, np)`
//! * `np iv`           → `g_lin(np, T_iv, iv)`
//! * `np₁ tv np₂`      → `g_lin(np₁, T_tv_outer, g_lin(tv, T_tv_inner, np₂))`
//!
//! Noun phrases are `adj* noun`. Gradients flow back through the tree by the
//! chain rule using [`grad_g_lin`].
//!
//! The objectives are toy placeholders: squared error or one minus cosine
//! similarity against a fixed target vector.

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::composition::{g_lin, CompositionError, CompositionParams, SemanticsConfig, Slot, WordClass};
use crate::tensor::{self, Tensor, TensorError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrainError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Composition(#[from] CompositionError),
    #[error("unsupported sentence shape {0:?}: expected adj* noun [iv | tv adj* noun]")]
    Unsupported(Vec<WordClass>),
    #[error("word {0:?} has no vector in the model")]
    MissingWord(String),
    #[error("target has shape {actual:?}, model output has shape {expected:?}")]
    TargetShape { expected: Vec<usize>, actual: Vec<usize> },
    #[error("non-finite loss or update at example {index} ({sentence})")]
    NonFinite { index: usize, sentence: String },
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("cosine objective is undefined for a zero output or target")]
    ZeroNorm,
}

pub type Result<T> = std::result::Result<T, TrainError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    CosineToTarget,
    #[default]
    SquaredErrorToTarget,
}

fn default_learning_rate() -> f64 {
    0.01
}
fn default_epochs() -> usize {
    100
}
fn default_init_scale() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default)]
    pub seed: u64,
    /// half-width of the uniform initialization interval
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
    #[serde(default)]
    pub objective: Objective,
    /// keep the composition tensors fixed
    #[serde(default)]
    pub freeze_tensors: bool,
    /// word vectors kept fixed
    #[serde(default)]
    pub frozen_words: BTreeSet<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: default_learning_rate(),
            epochs: default_epochs(),
            seed: 0,
            init_scale: default_init_scale(),
            objective: Objective::default(),
            freeze_tensors: false,
            frozen_words: BTreeSet::new(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        // zero is allowed: it is a useful no-op run
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(TrainError::Config(format!("learning_rate must be >= 0, got {}", self.learning_rate)));
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return Err(TrainError::Config(format!("init_scale must be > 0, got {}", self.init_scale)));
        }
        Ok(())
    }
}

/// One supervised sentence: words with their classes and a target vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainExample {
    pub sentence: Vec<(String, WordClass)>,
    pub target: Vec<f64>,
}

impl TrainExample {
    pub fn words(&self) -> String {
        self.sentence.iter().map(|(w, _)| w.as_str()).collect::<Vec<_>>().join(" ")
    }
}

/// The trainable state: composition tensors and one noun-space vector per word.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub composition: CompositionParams,
    pub words: BTreeMap<String, Tensor>,
}

impl ModelParams {
    /// Same structure, every entry zero.
    pub fn zeros_like(&self) -> Result<ModelParams> {
        let mut composition = self.composition.clone();
        for t in composition.tensors_mut() {
            *t = Tensor::zeros(t.shape())?;
        }
        let words = self
            .words
            .iter()
            .map(|(w, v)| Ok((w.clone(), Tensor::zeros(v.shape())?)))
            .collect::<Result<_>>()?;
        Ok(ModelParams { composition, words })
    }

    pub fn noun_dim(&self) -> usize {
        self.composition.noun_dim()
    }

    fn word(&self, w: &str) -> Result<&Tensor> {
        self.words.get(w).ok_or_else(|| TrainError::MissingWord(w.to_string()))
    }
}

/// Parse tree of a training sentence.
#[derive(Debug, Clone, PartialEq)]
pub enum Tree {
    Word(String),
    Apply {
        slot: Slot,
        left: Box<Tree>,
        right: Box<Tree>,
    },
}

impl Tree {
    fn apply(slot: Slot, left: Tree, right: Tree) -> Tree {
        Tree::Apply {
            slot,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Builds the tree for `adj* noun [iv | tv adj* noun]`.
    pub fn from_sentence(sentence: &[(String, WordClass)]) -> Result<Tree> {
        let classes: Vec<WordClass> = sentence.iter().map(|(_, c)| *c).collect();
        let unsupported = || TrainError::Unsupported(classes.clone());

        fn noun_phrase(words: &[(String, WordClass)]) -> Option<(Tree, usize)> {
            let adjs = words.iter().take_while(|(_, c)| *c == WordClass::Adj).count();
            let (head, class) = words.get(adjs)?;
            if *class != WordClass::Noun {
                return None;
            }
            let mut tree = Tree::Word(head.clone());
            for (adj, _) in words[..adjs].iter().rev() {
                tree = Tree::apply(Slot::Adj, Tree::Word(adj.clone()), tree);
            }
            Some((tree, adjs + 1))
        }

        let (subject, used) = noun_phrase(sentence).ok_or_else(unsupported)?;
        let rest = &sentence[used..];
        match rest.first() {
            None => Ok(subject),
            Some((verb, WordClass::Iv)) if rest.len() == 1 => {
                Ok(Tree::apply(Slot::Iv, subject, Tree::Word(verb.clone())))
            }
            Some((verb, WordClass::Tv)) => {
                let (object, used) = noun_phrase(&rest[1..]).ok_or_else(unsupported)?;
                if used != rest.len() - 1 {
                    return Err(unsupported());
                }
                let phrase = Tree::apply(Slot::TvInner, Tree::Word(verb.clone()), object);
                Ok(Tree::apply(Slot::TvOuter, subject, phrase))
            }
            Some(_) => Err(unsupported()),
        }
    }

    pub fn leaves(&self) -> Vec<&str> {
        match self {
            Tree::Word(w) => vec![w.as_str()],
            Tree::Apply { left, right, .. } => {
                let mut out = left.leaves();
                out.extend(right.leaves());
                out
            }
        }
    }
}

/// Forward values kept for the backward pass.
enum Evaluated {
    Leaf {
        word: String,
        value: Tensor,
    },
    Node {
        slot: Slot,
        value: Tensor,
        left: Box<Evaluated>,
        right: Box<Evaluated>,
    },
}

impl Evaluated {
    fn value(&self) -> &Tensor {
        match self {
            Evaluated::Leaf { value, .. } | Evaluated::Node { value, .. } => value,
        }
    }
}

fn forward(tree: &Tree, params: &ModelParams) -> Result<Evaluated> {
    Ok(match tree {
        Tree::Word(w) => Evaluated::Leaf {
            word: w.clone(),
            value: params.word(w)?.clone(),
        },
        Tree::Apply { slot, left, right } => {
            let left = forward(left, params)?;
            let right = forward(right, params)?;
            let value = g_lin(left.value(), params.composition.slot(*slot), right.value())?;
            Evaluated::Node {
                slot: *slot,
                value,
                left: Box::new(left),
                right: Box::new(right),
            }
        }
    })
}

fn backward(node: &Evaluated, upstream: &Tensor, params: &ModelParams, grads: &mut ModelParams) -> Result<()> {
    match node {
        Evaluated::Leaf { word, .. } => {
            let g = grads.words.get_mut(word).expect("gradient has every model word");
            g.axpy(1.0, upstream)?;
        }
        Evaluated::Node {
            slot, left, right, ..
        } => {
            let t = params.composition.slot(*slot);
            let (d_left, d_t, d_right) = grad_g_lin(left.value(), t, right.value(), upstream)?;
            grads.composition.slot_mut(*slot).axpy(1.0, &d_t)?;
            backward(left, &d_left, params, grads)?;
            backward(right, &d_right, params, grads)?;
        }
    }
    Ok(())
}

/// Gradients of `g_lin(v1, T, v2)` given the upstream gradient of its output:
/// `dv1[i] = Σ_jk up[j] T[i,j,k] v2[k]`, `dT = v1 ⊗ up ⊗ v2`,
/// `dv2[k] = Σ_ij v1[i] T[i,j,k] up[j]`.
pub fn grad_g_lin(v1: &Tensor, t: &Tensor, v2: &Tensor, upstream: &Tensor) -> Result<(Tensor, Tensor, Tensor)> {
    let out = g_lin(v1, t, v2)?;
    if upstream.shape() != out.shape() {
        return Err(TrainError::TargetShape {
            expected: out.shape().to_vec(),
            actual: upstream.shape().to_vec(),
        });
    }
    let t_v2 = tensor::contract(t, 2, v2, 0)?;
    let d_v1 = tensor::contract(&t_v2, 1, upstream, 0)?;
    let d_t = tensor::tensor_product(&tensor::tensor_product(v1, upstream)?, v2)?;
    let v1_t = tensor::contract(v1, 0, t, 0)?;
    let d_v2 = tensor::contract(upstream, 0, &v1_t, 0)?;
    Ok((d_v1, d_t, d_v2))
}

/// Loss of `output` against `target` and its gradient with respect to `output`.
pub fn objective_loss(output: &Tensor, target: &Tensor, objective: Objective) -> Result<(f64, Tensor)> {
    if output.shape() != target.shape() {
        return Err(TrainError::TargetShape {
            expected: output.shape().to_vec(),
            actual: target.shape().to_vec(),
        });
    }
    match objective {
        Objective::SquaredErrorToTarget => {
            let diff = tensor::sub(output, target)?;
            let loss = diff.data().iter().map(|x| x * x).sum();
            Ok((loss, tensor::scale(&diff, 2.0)?))
        }
        Objective::CosineToTarget => {
            let (no, nt) = (output.norm(), target.norm());
            if no == 0.0 || nt == 0.0 {
                return Err(TrainError::ZeroNorm);
            }
            let dot: f64 = output.data().iter().zip(target.data()).map(|(a, b)| a * b).sum();
            let cos = dot / (no * nt);
            // d(1 - cos)/do = -(t / (|o||t|) - cos · o / |o|²)
            let grad = Tensor::new(
                output.shape().to_vec(),
                output
                    .data()
                    .iter()
                    .zip(target.data())
                    .map(|(o, t)| -(t / (no * nt) - cos * o / (no * no)))
                    .collect(),
            )?;
            Ok((1.0 - cos, grad))
        }
    }
}

/// Forward output of a sentence.
pub fn predict(sentence: &[(String, WordClass)], params: &ModelParams) -> Result<Tensor> {
    let tree = Tree::from_sentence(sentence)?;
    Ok(forward(&tree, params)?.value().clone())
}

/// Loss for one sentence and its gradient with respect to every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceGradient {
    pub loss: f64,
    pub grads: ModelParams,
}

/// Loss and gradients for one example; words absent from the sentence get
/// exactly zero gradient.
pub fn grad_sentence(
    sentence: &[(String, WordClass)],
    params: &ModelParams,
    target: &Tensor,
    objective: Objective,
) -> Result<SentenceGradient> {
    let tree = Tree::from_sentence(sentence)?;
    let evaluated = forward(&tree, params)?;
    let (loss, upstream) = objective_loss(evaluated.value(), target, objective)?;
    let mut grads = params.zeros_like()?;
    backward(&evaluated, &upstream, params, &mut grads)?;
    Ok(SentenceGradient { loss, grads })
}

/// Loss of one example without gradients.
pub fn sentence_loss(example: &TrainExample, params: &ModelParams, objective: Objective) -> Result<f64> {
    let out = predict(&example.sentence, params)?;
    let target = Tensor::vector(example.target.clone())?;
    Ok(objective_loss(&out, &target, objective)?.0)
}

/// Mean loss over a corpus.
pub fn mean_loss(examples: &[TrainExample], params: &ModelParams, objective: Objective) -> Result<f64> {
    if examples.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for ex in examples {
        total += sentence_loss(ex, params, objective)?;
    }
    Ok(total / examples.len() as f64)
}

/// Random initial parameters, uniform in `(-init_scale, init_scale)`.
///
/// Draw order is fixed: composition tensors first (in [`CompositionParams::tensors`]
/// order), then word vectors in lexicographic word order.
pub fn init_params<'w>(
    vocabulary: impl IntoIterator<Item = &'w str>,
    config: &SemanticsConfig,
    hidden_dim: usize,
    train: &TrainConfig,
) -> Result<ModelParams> {
    train.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(train.seed);
    let dist = Uniform::new(-train.init_scale, train.init_scale);
    let mut draw = |shape: &[usize]| -> Result<Tensor> {
        let n: usize = shape.iter().product();
        Ok(Tensor::new(shape.to_vec(), (0..n).map(|_| dist.sample(&mut rng)).collect())?)
    };
    let (d_n, d_s) = (config.noun_dim(), config.sentence_dim());
    let composition = if config.is_unified() {
        CompositionParams::unified(draw(&[d_n, d_n, d_n])?)?
    } else {
        if hidden_dim == 0 {
            return Err(TrainError::Config("hidden dimension must be positive".into()));
        }
        let adj = draw(&[d_n, d_n, d_n])?;
        let iv = draw(&[d_n, d_s, d_n])?;
        let inner = draw(&[d_n, hidden_dim, d_n])?;
        let outer = draw(&[d_n, d_s, hidden_dim])?;
        CompositionParams::per_type(adj, iv, inner, outer)?
    };
    let vocabulary: BTreeSet<&str> = vocabulary.into_iter().collect();
    let mut words = BTreeMap::new();
    for w in vocabulary {
        words.insert(w.to_string(), draw(&[d_n])?);
    }
    Ok(ModelParams { composition, words })
}

/// Result of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: ModelParams,
    /// mean loss before training, then after every epoch
    pub loss_trace: Vec<f64>,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> f64 {
        *self.loss_trace.last().expect("trace holds the initial loss")
    }
}

fn is_non_finite(e: &TrainError) -> bool {
    matches!(
        e,
        TrainError::Tensor(TensorError::NonFinite(_))
            | TrainError::Composition(CompositionError::Tensor(TensorError::NonFinite(_)))
    )
}

/// Initializes from the seed and runs SGD.
pub fn train(
    examples: &[TrainExample],
    config: &SemanticsConfig,
    hidden_dim: usize,
    train_config: &TrainConfig,
) -> Result<TrainOutcome> {
    let vocabulary = examples.iter().flat_map(|e| e.sentence.iter().map(|(w, _)| w.as_str()));
    let initial = init_params(vocabulary, config, hidden_dim, train_config)?;
    train_from(initial, examples, train_config)
}

/// Plain per-example SGD from `initial`, visiting examples in order.
pub fn train_from(initial: ModelParams, examples: &[TrainExample], config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let mut params = initial;
    let trees = examples
        .iter()
        .map(|e| Tree::from_sentence(&e.sentence))
        .collect::<Result<Vec<_>>>()?;
    let targets = examples
        .iter()
        .map(|e| Ok(Tensor::vector(e.target.clone())?))
        .collect::<Result<Vec<_>>>()?;
    for tree in &trees {
        for w in tree.leaves() {
            params.word(w)?;
        }
    }

    let non_finite = |index: usize| TrainError::NonFinite {
        index,
        sentence: examples[index].words(),
    };
    let corpus_loss = |params: &ModelParams| -> Result<f64> {
        let mut total = 0.0;
        for (index, (tree, target)) in trees.iter().zip(&targets).enumerate() {
            let out = forward(tree, params).map_err(|e| if is_non_finite(&e) { non_finite(index) } else { e })?;
            let (loss, _) = objective_loss(out.value(), target, config.objective)?;
            if !loss.is_finite() {
                return Err(non_finite(index));
            }
            total += loss;
        }
        Ok(if trees.is_empty() { 0.0 } else { total / trees.len() as f64 })
    };

    let mut loss_trace = Vec::with_capacity(config.epochs + 1);
    loss_trace.push(corpus_loss(&params)?);
    let lr = config.learning_rate;
    for _ in 0..config.epochs {
        for (index, (tree, target)) in trees.iter().zip(&targets).enumerate() {
            let evaluated = forward(tree, &params).map_err(|e| if is_non_finite(&e) { non_finite(index) } else { e })?;
            let (loss, upstream) = objective_loss(evaluated.value(), target, config.objective)?;
            if !loss.is_finite() {
                return Err(non_finite(index));
            }
            let mut grads = params.zeros_like()?;
            backward(&evaluated, &upstream, &params, &mut grads).map_err(|_| non_finite(index))?;
            drop(evaluated);

            if !config.freeze_tensors {
                let updates = grads.composition.tensors_mut();
                for (p, g) in params.composition.tensors_mut().into_iter().zip(updates) {
                    p.axpy(-lr, g).map_err(|_| non_finite(index))?;
                }
            }
            for (word, g) in &grads.words {
                if config.frozen_words.contains(word) {
                    continue;
                }
                let p = params.words.get_mut(word).expect("same vocabulary");
                p.axpy(-lr, g).map_err(|_| non_finite(index))?;
            }
        }
        loss_trace.push(corpus_loss(&params)?);
    }
    Ok(TrainOutcome { params, loss_trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(data: &[f64]) -> Tensor {
        Tensor::vector(data.to_vec()).unwrap()
    }

    fn sent(items: &[(&str, WordClass)]) -> Vec<(String, WordClass)> {
        items.iter().map(|(w, c)| (w.to_string(), *c)).collect()
    }

    fn toy_params(d: usize) -> ModelParams {
        let t = Tensor::from_fn(&[d, d, d], |i| 0.3 * i[0] as f64 - 0.2 * i[1] as f64 + 0.1 * i[2] as f64 + 0.05)
            .unwrap();
        let words = ["dragons", "breathe", "fire", "red", "sleep"]
            .iter()
            .enumerate()
            .map(|(n, w)| (w.to_string(), Tensor::from_fn(&[d], |i| (n + 1) as f64 * 0.1 - i[0] as f64 * 0.2).unwrap()))
            .collect();
        ModelParams {
            composition: CompositionParams::unified(t).unwrap(),
            words,
        }
    }

    #[test]
    fn zero_upstream_zero_gradients() {
        let t = Tensor::ones(&[2, 2, 2]).unwrap();
        let (a, b, c) = grad_g_lin(&v(&[1.0, 2.0]), &t, &v(&[3.0, 4.0]), &v(&[0.0, 0.0])).unwrap();
        assert!(a.data().iter().chain(b.data()).chain(c.data()).all(|&x| x == 0.0));
    }

    #[test]
    fn diagonal_gradient_by_hand() {
        let t = Tensor::diagonal(&[2, 2, 2]).unwrap();
        let (dv1, dt, dv2) = grad_g_lin(&v(&[2.0, 3.0]), &t, &v(&[4.0, 5.0]), &v(&[1.0, 0.0])).unwrap();
        assert_eq!(dv1.data(), &[4.0, 0.0]);
        assert_eq!(dv2.data(), &[2.0, 0.0]);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let x = dt.get(&[i, j, k]);
                    if j == 1 {
                        assert_eq!(x, 0.0);
                    } else {
                        assert_eq!(x, [2.0, 3.0][i] * [4.0, 5.0][k]);
                    }
                }
            }
        }
    }

    #[test]
    fn tree_shapes() {
        use WordClass::*;
        let t = Tree::from_sentence(&sent(&[("red", Adj), ("dragons", Noun), ("breathe", Tv), ("fire", Noun)])).unwrap();
        assert_eq!(t.leaves(), vec!["red", "dragons", "breathe", "fire"]);
        match &t {
            Tree::Apply { slot, .. } => assert_eq!(*slot, Slot::TvOuter),
            _ => panic!(),
        }
        assert!(Tree::from_sentence(&sent(&[("dragons", Noun), ("sleep", Iv)])).is_ok());
        assert!(Tree::from_sentence(&sent(&[("sleep", Iv)])).is_err());
        assert!(Tree::from_sentence(&sent(&[("dragons", Noun), ("breathe", Tv)])).is_err());
        assert!(Tree::from_sentence(&sent(&[("dragons", Noun), ("sleep", Iv), ("fire", Noun)])).is_err());
        assert!(Tree::from_sentence(&sent(&[("who", Relpron)])).is_err());
    }

    #[test]
    fn leaf_gradient_is_twice_residual() {
        let params = toy_params(2);
        let target = v(&[1.0, -1.0]);
        let g = grad_sentence(&sent(&[("fire", WordClass::Noun)]), &params, &target, Objective::SquaredErrorToTarget)
            .unwrap();
        let fire = &params.words["fire"];
        let expected: Vec<f64> = fire.data().iter().zip(target.data()).map(|(a, b)| 2.0 * (a - b)).collect();
        assert_eq!(g.grads.words["fire"].data(), expected.as_slice());
        assert!(g.grads.words["dragons"].data().iter().all(|&x| x == 0.0));
        assert!(g.grads.composition.slot(Slot::Adj).data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn two_word_gradient_matches_grad_g_lin() {
        let params = toy_params(3);
        let target = v(&[0.5, 0.0, -0.5]);
        let s = sent(&[("dragons", WordClass::Noun), ("sleep", WordClass::Iv)]);
        let g = grad_sentence(&s, &params, &target, Objective::SquaredErrorToTarget).unwrap();
        let t = params.composition.slot(Slot::Iv);
        let out = g_lin(&params.words["dragons"], t, &params.words["sleep"]).unwrap();
        let up = tensor::scale(&tensor::sub(&out, &target).unwrap(), 2.0).unwrap();
        let (dn, dt, dv) = grad_g_lin(&params.words["dragons"], t, &params.words["sleep"], &up).unwrap();
        assert_eq!(g.grads.words["dragons"], dn);
        assert_eq!(g.grads.words["sleep"], dv);
        assert_eq!(g.grads.composition.slot(Slot::Iv), &dt);
    }

    #[test]
    fn cosine_objective_gradient() {
        let o = v(&[1.0, 2.0, -0.5]);
        let t = v(&[0.3, -1.0, 2.0]);
        let (loss, g) = objective_loss(&o, &t, Objective::CosineToTarget).unwrap();
        let cos = tensor::cosine_similarity(&o, &t).unwrap();
        assert!((loss - (1.0 - cos)).abs() < 1e-15);
        let h = 1e-6;
        for i in 0..3 {
            let mut plus = o.data().to_vec();
            let mut minus = o.data().to_vec();
            plus[i] += h;
            minus[i] -= h;
            let fd = (objective_loss(&v(&plus), &t, Objective::CosineToTarget).unwrap().0
                - objective_loss(&v(&minus), &t, Objective::CosineToTarget).unwrap().0)
                / (2.0 * h);
            assert!((fd - g.data()[i]).abs() < 1e-8);
        }
        assert_eq!(
            objective_loss(&v(&[0.0, 0.0]), &v(&[1.0, 0.0]), Objective::CosineToTarget),
            Err(TrainError::ZeroNorm)
        );
    }

    fn example(words: &[(&str, WordClass)], target: &[f64]) -> TrainExample {
        TrainExample {
            sentence: sent(words),
            target: target.to_vec(),
        }
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let params = toy_params(2);
        let data = vec![example(&[("dragons", WordClass::Noun), ("sleep", WordClass::Iv)], &[1.0, 0.0])];
        let config = TrainConfig {
            learning_rate: 0.0,
            epochs: 5,
            ..TrainConfig::default()
        };
        let out = train_from(params.clone(), &data, &config).unwrap();
        assert_eq!(out.params, params);
        assert_eq!(out.loss_trace.len(), 6);
    }

    #[test]
    fn divergence_is_reported() {
        let params = toy_params(2);
        let data = vec![
            example(&[("dragons", WordClass::Noun)], &[1.0, 0.0]),
            example(&[("red", WordClass::Adj), ("dragons", WordClass::Noun), ("breathe", WordClass::Tv), ("fire", WordClass::Noun)], &[1e3, -1e3]),
        ];
        let config = TrainConfig {
            learning_rate: 10.0,
            epochs: 200,
            ..TrainConfig::default()
        };
        match train_from(params, &data, &config) {
            Err(TrainError::NonFinite { index, sentence }) => {
                assert_eq!(index, 1);
                assert_eq!(sentence, "red dragons breathe fire");
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn missing_word_and_bad_target() {
        let params = toy_params(2);
        let data = vec![example(&[("knights", WordClass::Noun)], &[1.0, 0.0])];
        assert!(matches!(train_from(params.clone(), &data, &TrainConfig::default()), Err(TrainError::MissingWord(_))));
        let data = vec![example(&[("fire", WordClass::Noun)], &[1.0, 0.0, 0.0])];
        assert!(matches!(train_from(params, &data, &TrainConfig::default()), Err(TrainError::TargetShape { .. })));
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let config = SemanticsConfig::split(2, 3).unwrap();
        let tc = TrainConfig {
            seed: 9,
            init_scale: 0.25,
            ..TrainConfig::default()
        };
        let a = init_params(["b", "a"], &config, 4, &tc).unwrap();
        let b = init_params(["a", "b", "a"], &config, 4, &tc).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.composition.hidden_dim(), 4);
        assert_eq!(a.composition.sentence_dim(), 3);
        for (_, t) in a.composition.tensors() {
            assert!(t.data().iter().all(|x| x.abs() < 0.25));
        }
        let c = init_params(["a", "b"], &config, 4, &TrainConfig { seed: 10, ..tc.clone() }).unwrap();
        assert_ne!(a, c);
        assert!(init_params(["a"], &config, 4, &TrainConfig { init_scale: 0.0, ..tc }).is_err());
    }
}
