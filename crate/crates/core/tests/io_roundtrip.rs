use std::collections::BTreeMap;
use std::fs;

use disco_core::composition::Payload;
use disco_core::grammar::{reduce, Atom, PregroupType, SimpleType};
use disco_core::io_formats::{self, IoError, ParamMode, RunConfig};
use disco_core::tensor::Tensor;
use disco_core::training::Objective;
use disco_core::{CompositionParams, Lexicon, LexiconEntry, ModelParams, SemanticsConfig, TrainConfig, TrainExample, WordClass};
use proptest::prelude::*;

/// Any finite double, including subnormals, signed zero and extremes.
fn any_finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
        -1.0f64..1.0,
        Just(f64::MAX),
        Just(f64::MIN_POSITIVE),
        Just(-0.0),
    ]
}

fn tensor_with(shape: Vec<usize>) -> impl Strategy<Value = Tensor> {
    let n: usize = shape.iter().product();
    prop::collection::vec(any_finite(), n).prop_map(move |d| Tensor::new(shape.clone(), d).unwrap())
}

fn any_tensor() -> impl Strategy<Value = Tensor> {
    prop::collection::vec(1usize..=3, 0..=4).prop_flat_map(tensor_with)
}

fn bits(t: &Tensor) -> Vec<u64> {
    t.data().iter().map(|x| x.to_bits()).collect()
}

fn same_model(a: &ModelParams, b: &ModelParams) -> bool {
    let ta = a.composition.tensors();
    let tb = b.composition.tensors();
    ta.len() == tb.len()
        && ta.iter().zip(&tb).all(|((na, x), (nb, y))| na == nb && x.shape() == y.shape() && bits(x) == bits(y))
        && a.words.len() == b.words.len()
        && a.words.iter().zip(&b.words).all(|((wa, x), (wb, y))| wa == wb && bits(x) == bits(y))
}

fn any_model() -> impl Strategy<Value = ModelParams> {
    let words = |d: usize| prop::collection::btree_map("[a-z]{1,8}", tensor_with(vec![d]), 0..5);
    let unified = (1usize..=3).prop_flat_map(move |d| (tensor_with(vec![d, d, d]), words(d))).prop_map(|(t, words)| ModelParams {
        composition: CompositionParams::unified(t).unwrap(),
        words,
    });
    let per_type = (1usize..=3, 1usize..=3, 1usize..=3)
        .prop_flat_map(move |(n, s, h)| {
            (
                tensor_with(vec![n, n, n]),
                tensor_with(vec![n, s, n]),
                tensor_with(vec![n, h, n]),
                tensor_with(vec![n, s, h]),
                words(n),
            )
        })
        .prop_map(|(a, i, ti, to, words)| ModelParams {
            composition: CompositionParams::per_type(a, i, ti, to).unwrap(),
            words,
        });
    prop_oneof![unified, per_type]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tensor_json_is_bitwise_exact(t in any_tensor()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        io_formats::save_tensor(&path, &t).unwrap();
        let back = io_formats::load_tensor(&path).unwrap();
        prop_assert_eq!(back.shape(), t.shape());
        prop_assert_eq!(bits(&back), bits(&t));
    }

    #[test]
    fn model_file_is_bitwise_exact(m in any_model()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        io_formats::save_model(&path, &m).unwrap();
        let back = io_formats::load_model(&path, None).unwrap();
        prop_assert!(same_model(&back, &m));
        // writing again gives the same bytes
        let again = dir.path().join("again.json");
        io_formats::save_model(&again, &back).unwrap();
        prop_assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
    }

    #[test]
    fn diagram_file_round_trips(f in prop::collection::vec((any::<bool>(), -2i32..=2), 1..=8)) {
        let sentence: Vec<PregroupType> = f
            .iter()
            .map(|&(noun, z)| PregroupType::new(vec![SimpleType::new(if noun { Atom::noun() } else { Atom::sentence() }, z)]))
            .collect();
        let unit = PregroupType::unit();
        let s: PregroupType = "s".parse().unwrap();
        for target in [&s, &unit] {
            if let Some(d) = reduce(&sentence, target).unwrap() {
                let dir = tempfile::tempdir().unwrap();
                let path = dir.path().join("d.json");
                io_formats::save_diagram(&path, &d).unwrap();
                prop_assert_eq!(io_formats::load_diagram(&path).unwrap(), d);
            }
        }
    }

    #[test]
    fn examples_round_trip(rows in prop::collection::vec((prop::collection::vec("[a-z]{1,6}", 1..4), prop::collection::vec(any_finite(), 1..4)), 0..6)) {
        let examples: Vec<TrainExample> = rows
            .into_iter()
            .map(|(words, target)| TrainExample {
                sentence: words.into_iter().map(|w| (w, WordClass::Noun)).collect(),
                target,
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.jsonl");
        io_formats::save_examples(&path, &examples).unwrap();
        let back = io_formats::load_examples(&path).unwrap();
        prop_assert_eq!(back.len(), examples.len());
        for (a, b) in back.iter().zip(&examples) {
            prop_assert_eq!(&a.sentence, &b.sentence);
            let (x, y): (Vec<u64>, Vec<u64>) = (a.target.iter().map(|v| v.to_bits()).collect(), b.target.iter().map(|v| v.to_bits()).collect());
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn lexicon_round_trips(vectors in prop::collection::btree_map("[a-z]{1,8}", prop::collection::vec(any_finite(), 2), 0..6)) {
        let config = SemanticsConfig::unified(2).unwrap();
        let mut lexicon = Lexicon::new();
        for (k, (word, v)) in vectors.into_iter().enumerate() {
            let class = [WordClass::Noun, WordClass::Adj, WordClass::Iv, WordClass::Tv][k % 4];
            let entry = LexiconEntry {
                word,
                gtype: class.canonical_type().unwrap(),
                class,
                payload: Payload::Vector(Tensor::vector(v).unwrap()),
            };
            lexicon.insert(entry, &config).unwrap();
        }
        let raw = LexiconEntry {
            word: "raw-word".into(),
            gtype: "n^r s".parse().unwrap(),
            class: WordClass::Raw,
            payload: Payload::Tensor(Tensor::new(vec![2, 2], vec![1.0, -0.0, 5e-324, 3.0]).unwrap()),
        };
        lexicon.insert(raw, &config).unwrap();
        let who = LexiconEntry {
            word: "who".into(),
            gtype: WordClass::Relpron.canonical_type().unwrap(),
            class: WordClass::Relpron,
            payload: Payload::None,
        };
        lexicon.insert(who, &config).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("lex.jsonl");
        io_formats::save_lexicon(&path, &lexicon).unwrap();
        let back = io_formats::load_lexicon(&path, &config).unwrap();
        prop_assert_eq!(back.len(), lexicon.len());
        for (a, b) in back.entries().zip(lexicon.entries()) {
            prop_assert_eq!(&a.word, &b.word);
            prop_assert_eq!(&a.gtype, &b.gtype);
            prop_assert_eq!(a.class, b.class);
            let payload_bits = |p: &Payload| match p {
                Payload::Vector(t) | Payload::Tensor(t) => Some(bits(t)),
                Payload::None => None,
            };
            prop_assert_eq!(payload_bits(&a.payload), payload_bits(&b.payload));
        }
    }
}

#[test]
fn config_round_trips() {
    let config = RunConfig {
        dims: BTreeMap::from([(Atom::noun(), 4), (Atom::sentence(), 2)]),
        mode: ParamMode::PerType,
        hidden: Some(3),
        train: TrainConfig {
            learning_rate: 0.1 + 0.2,
            epochs: 7,
            seed: u64::MAX,
            init_scale: 0.5,
            objective: Objective::CosineToTarget,
            freeze_tensors: true,
            frozen_words: ["fire".to_string()].into(),
        },
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("config.json");
    fs::write(&path, io_formats::to_json(&config)).unwrap();
    assert_eq!(io_formats::load_config(&path).unwrap(), config);
}

#[test]
fn tv_record_with_noun_type_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lex.jsonl");
    fs::write(
        &path,
        concat!(
            "{\"word\":\"dragons\",\"type\":\"n\",\"class\":\"noun\",\"vector\":[1,2]}\n",
            "{\"word\":\"breathe\",\"type\":\"n\",\"class\":\"tv\",\"vector\":[1,2]}\n",
        ),
    )
    .unwrap();
    let err = io_formats::load_lexicon(&path, &SemanticsConfig::unified(2).unwrap()).unwrap_err();
    match &err {
        IoError::Validation { line, field, message, .. } => {
            assert_eq!(*line, 2);
            assert_eq!(field, "type");
            assert!(message.contains("breathe"));
        }
        other => panic!("unexpected {other:?}"),
    }
    let text = err.to_string();
    assert!(text.contains(":2:") && text.contains("type"), "{text}");
}

#[test]
fn bundled_files_load() {
    let data = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let run = io_formats::load_config(&data.join("config.json")).unwrap();
    let semantics = run.semantics().unwrap();
    let lexicon = io_formats::load_lexicon(&data.join("lexicon.jsonl"), &semantics).unwrap();
    assert!(lexicon.get("who").is_some() && lexicon.get("himself").is_some());
    let model = io_formats::load_model(&data.join("model.json"), Some(&semantics)).unwrap();
    let examples = io_formats::load_examples(&data.join("train.jsonl")).unwrap();
    assert_eq!(examples.len(), 12);
    for ex in &examples {
        for (w, _) in &ex.sentence {
            assert!(model.words.contains_key(w) && lexicon.get(w).is_some(), "{w}");
        }
    }
}
