use std::collections::BTreeMap;
use std::path::PathBuf;

use disco_core::composition::{g_lin, Slot};
use disco_core::io_formats;
use disco_core::tensor::Tensor;
use disco_core::training::{
    grad_g_lin, grad_sentence, init_params, objective_loss, predict, train, train_from, Objective, TrainError,
};
use disco_core::{CompositionParams, ModelParams, SemanticsConfig, TrainConfig, TrainExample, WordClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn sentence(words: &[(&str, WordClass)]) -> Vec<(String, WordClass)> {
    words.iter().map(|(w, c)| (w.to_string(), *c)).collect()
}

fn loss_of(s: &[(String, WordClass)], p: &ModelParams, target: &Tensor, objective: Objective) -> f64 {
    objective_loss(&predict(s, p).unwrap(), target, objective).unwrap().0
}

fn nudge(t: &Tensor, i: usize, delta: f64) -> Tensor {
    let mut d = t.data().to_vec();
    d[i] += delta;
    Tensor::new(t.shape().to_vec(), d).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-9 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

/// Checks up to ten random entries of every block against central differences.
fn check_against_finite_differences(
    s: &[(String, WordClass)],
    params: &ModelParams,
    target: &Tensor,
    objective: Objective,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let analytic = grad_sentence(s, params, target, objective).unwrap();
    let mut worst: f64 = 0.0;
    let pick = |n: usize, rng: &mut ChaCha8Rng| -> Vec<usize> {
        if n <= 10 {
            (0..n).collect()
        } else {
            (0..10).map(|_| rng.gen_range(0..n)).collect()
        }
    };
    for (word, g) in &analytic.grads.words {
        for i in pick(g.len(), rng) {
            let mut plus = params.clone();
            plus.words.insert(word.clone(), nudge(&params.words[word], i, H));
            let mut minus = params.clone();
            minus.words.insert(word.clone(), nudge(&params.words[word], i, -H));
            let numeric = (loss_of(s, &plus, target, objective) - loss_of(s, &minus, target, objective)) / (2.0 * H);
            worst = worst.max(rel(g.data()[i], numeric));
        }
    }
    let blocks = params.composition.tensors().len();
    for b in 0..blocks {
        let g = analytic.grads.composition.tensors()[b].1.clone();
        for i in pick(g.len(), rng) {
            let base = params.composition.tensors()[b].1.clone();
            let mut plus = params.clone();
            *plus.composition.tensors_mut()[b] = nudge(&base, i, H);
            let mut minus = params.clone();
            *minus.composition.tensors_mut()[b] = nudge(&base, i, -H);
            let numeric = (loss_of(s, &plus, target, objective) - loss_of(s, &minus, target, objective)) / (2.0 * H);
            worst = worst.max(rel(g.data()[i], numeric));
        }
    }
    worst
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Tensor {
    Tensor::vector((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn sentence_gradients_match_finite_differences() {
    use WordClass::*;
    let shapes = [
        sentence(&[("dragons", Noun), ("breathe", Tv), ("fire", Noun)]),
        sentence(&[("old", Adj), ("dragons", Noun), ("sleep", Iv)]),
        sentence(&[("red", Adj), ("dragons", Noun), ("guard", Tv), ("old", Adj), ("gold", Noun)]),
        sentence(&[("dragons", Noun), ("hoard", Tv), ("dragons", Noun)]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for k in 0..60 {
        let s = &shapes[k % shapes.len()];
        let d = rng.gen_range(2..=4);
        let config = if k % 2 == 0 {
            SemanticsConfig::unified(d).unwrap()
        } else {
            SemanticsConfig::split(d, rng.gen_range(2..=4)).unwrap()
        };
        let cfg = TrainConfig {
            seed: rng.gen(),
            init_scale: 1.0,
            ..TrainConfig::default()
        };
        let params = init_params(s.iter().map(|(w, _)| w.as_str()), &config, rng.gen_range(2..=4), &cfg).unwrap();
        let target = random_vector(&mut rng, config.sentence_dim());
        let objective = if k % 3 == 0 { Objective::CosineToTarget } else { Objective::SquaredErrorToTarget };
        worst = worst.max(check_against_finite_differences(s, &params, &target, objective, &mut rng));
    }
    assert!(worst <= 1e-6, "worst relative error {worst:e}");
}

#[test]
fn g_lin_gradient_hand_example() {
    let t = Tensor::from_fn(&[2, 2, 2], |i| if i[0] == i[1] && i[1] == i[2] { 1.0 } else { 0.0 }).unwrap();
    let v1 = Tensor::vector(vec![2.0, 3.0]).unwrap();
    let v2 = Tensor::vector(vec![4.0, 5.0]).unwrap();
    let up = Tensor::vector(vec![1.0, 0.0]).unwrap();
    let (d1, dt, d2) = grad_g_lin(&v1, &t, &v2, &up).unwrap();
    assert_eq!(d1.data(), &[4.0, 0.0]);
    assert_eq!(d2.data(), &[2.0, 0.0]);
    for i in 0..2 {
        for k in 0..2 {
            assert_eq!(dt.get(&[i, 1, k]), 0.0);
            assert_eq!(dt.get(&[i, 0, k]), v1.data()[i] * v2.data()[k]);
        }
    }
    let zero = Tensor::zeros(&[2]).unwrap();
    let (d1, dt, d2) = grad_g_lin(&v1, &t, &v2, &zero).unwrap();
    assert!(d1.data().iter().chain(dt.data()).chain(d2.data()).all(|&x| x == 0.0));
}

fn fixed_model(words: &[(&str, &[f64])], t: Tensor) -> ModelParams {
    ModelParams {
        composition: CompositionParams::unified(t).unwrap(),
        words: words
            .iter()
            .map(|(w, v)| (w.to_string(), Tensor::vector(v.to_vec()).unwrap()))
            .collect(),
    }
}

#[test]
fn leaf_and_two_word_gradients() {
    let t = Tensor::from_fn(&[2, 2, 2], |i| 0.5 + i[0] as f64 - 0.25 * i[1] as f64 + 0.75 * i[2] as f64).unwrap();
    let model = fixed_model(&[("dragons", &[0.3, -1.2]), ("sleep", &[0.7, 0.4])], t.clone());
    let target = Tensor::vector(vec![1.0, 2.0]).unwrap();

    let g = grad_sentence(&sentence(&[("dragons", WordClass::Noun)]), &model, &target, Objective::SquaredErrorToTarget).unwrap();
    assert_eq!(g.grads.words["dragons"].data(), &[2.0 * (0.3 - 1.0), 2.0 * (-1.2 - 2.0)]);
    assert!(g.grads.composition.slot(Slot::Iv).data().iter().all(|&x| x == 0.0));

    let s = sentence(&[("dragons", WordClass::Noun), ("sleep", WordClass::Iv)]);
    let g = grad_sentence(&s, &model, &target, Objective::SquaredErrorToTarget).unwrap();
    let out = g_lin(&model.words["dragons"], &t, &model.words["sleep"]).unwrap();
    let up = Tensor::vector(out.data().iter().zip(target.data()).map(|(o, t)| 2.0 * (o - t)).collect()).unwrap();
    let (d1, dt, d2) = grad_g_lin(&model.words["dragons"], &t, &model.words["sleep"], &up).unwrap();
    assert_eq!(g.grads.words["dragons"], d1);
    assert_eq!(g.grads.words["sleep"], d2);
    assert_eq!(g.grads.composition.slot(Slot::Iv), &dt);
}

#[test]
fn absent_words_get_exactly_zero_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let config = SemanticsConfig::split(3, 2).unwrap();
    let cfg = TrainConfig {
        init_scale: 1.0,
        ..TrainConfig::default()
    };
    let params = init_params(["dragons", "breathe", "fire", "gold", "old"], &config, 2, &cfg).unwrap();
    let s = sentence(&[("dragons", WordClass::Noun), ("breathe", WordClass::Tv), ("fire", WordClass::Noun)]);
    for objective in [Objective::SquaredErrorToTarget, Objective::CosineToTarget] {
        let g = grad_sentence(&s, &params, &random_vector(&mut rng, 2), objective).unwrap();
        for absent in ["gold", "old"] {
            assert!(g.grads.words[absent].data().iter().all(|x| x.to_bits() == 0));
        }
        // adjective tensor is unused by this sentence
        assert!(g.grads.composition.slot(Slot::Adj).data().iter().all(|x| x.to_bits() == 0));
    }
}

/// Cramer's rule for a 2×2 system.
fn solve2(m: [[f64; 2]; 2], b: [f64; 2]) -> [f64; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [(b[0] * m[1][1] - m[0][1] * b[1]) / det, (m[0][0] * b[1] - b[0] * m[1][0]) / det]
}

#[test]
fn single_trainable_vector_solves_the_linear_system() {
    // with dragons = e0, g_lin(dragons, T, v) = M v for M = T[0, :, :]
    let m = [[2.0, 0.5], [0.3, 1.5]];
    let t = Tensor::from_fn(&[2, 2, 2], |i| if i[0] == 0 { m[i[1]][i[2]] } else { 0.7 }).unwrap();
    let initial = fixed_model(&[("dragons", &[1.0, 0.0]), ("sleep", &[0.05, -0.02])], t.clone());
    let target = [0.8, -1.1];
    let examples = vec![TrainExample {
        sentence: sentence(&[("dragons", WordClass::Noun), ("sleep", WordClass::Iv)]),
        target: target.to_vec(),
    }];
    let cfg = TrainConfig {
        learning_rate: 0.1,
        epochs: 500,
        freeze_tensors: true,
        frozen_words: ["dragons".to_string()].into(),
        ..TrainConfig::default()
    };
    let out = train_from(initial, &examples, &cfg).unwrap();
    let expected = solve2(m, target);
    let got = out.params.words["sleep"].data();
    assert!((got[0] - expected[0]).abs() < 1e-10 && (got[1] - expected[1]).abs() < 1e-10, "{got:?} vs {expected:?}");
    assert_eq!(out.params.words["dragons"].data(), &[1.0, 0.0]);
    assert_eq!(out.params.composition.slot(Slot::Iv), &t);
    assert!(out.final_loss() < 1e-20);
}

#[test]
fn zero_learning_rate_changes_nothing() {
    let examples = io_formats::load_examples(&data_dir().join("train.jsonl")).unwrap();
    let config = SemanticsConfig::unified(3).unwrap();
    let cfg = TrainConfig {
        learning_rate: 0.0,
        epochs: 3,
        seed: 4,
        ..TrainConfig::default()
    };
    let vocab = examples.iter().flat_map(|e| e.sentence.iter().map(|(w, _)| w.as_str()));
    let initial = init_params(vocab, &config, 3, &cfg).unwrap();
    let out = train(&examples, &config, 3, &cfg).unwrap();
    assert_eq!(out.params, initial);
    assert_eq!(out.loss_trace.len(), 4);
    assert!(out.loss_trace.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn training_is_bitwise_deterministic() {
    let run = io_formats::load_config(&data_dir().join("config.json")).unwrap();
    let examples = io_formats::load_examples(&data_dir().join("train.jsonl")).unwrap();
    let mut cfg = run.train.clone();
    cfg.epochs = 50;
    let semantics = run.semantics().unwrap();
    let a = train(&examples, &semantics, run.hidden_dim(), &cfg).unwrap();
    let b = train(&examples, &semantics, run.hidden_dim(), &cfg).unwrap();
    assert_eq!(io_formats::model_to_json(&a.params), io_formats::model_to_json(&b.params));
    assert_eq!(a.loss_trace, b.loss_trace);
    cfg.seed += 1;
    let c = train(&examples, &semantics, run.hidden_dim(), &cfg).unwrap();
    assert_ne!(a.params, c.params);
}

#[test]
fn divergence_names_the_example() {
    let t = Tensor::from_fn(&[2, 2, 2], |_| 1e120).unwrap();
    let initial = fixed_model(&[("a", &[1e120, 1e120]), ("b", &[1.0, 1.0]), ("c", &[1e120, 1e120])], t);
    let examples = vec![
        TrainExample {
            sentence: sentence(&[("b", WordClass::Noun)]),
            target: vec![0.0, 0.0],
        },
        TrainExample {
            sentence: sentence(&[("a", WordClass::Noun), ("c", WordClass::Iv)]),
            target: vec![0.0, 0.0],
        },
    ];
    let err = train_from(initial, &examples, &TrainConfig::default()).unwrap_err();
    match &err {
        TrainError::NonFinite { index, sentence } => {
            assert_eq!(*index, 1);
            assert_eq!(sentence, "a c");
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.to_string().contains("a c"));
}

#[test]
fn unsupported_shapes_and_missing_words() {
    let config = SemanticsConfig::unified(2).unwrap();
    let params = init_params(["a", "b"], &config, 2, &TrainConfig::default()).unwrap();
    let bad = sentence(&[("a", WordClass::Iv), ("b", WordClass::Noun)]);
    assert!(matches!(predict(&bad, &params), Err(TrainError::Unsupported(_))));
    let missing = sentence(&[("zzz", WordClass::Noun)]);
    assert!(matches!(predict(&missing, &params), Err(TrainError::MissingWord(_))));
    let words: BTreeMap<_, _> = params.words.clone();
    assert_eq!(words.len(), 2);
}
