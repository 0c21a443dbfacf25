//! Regenerates the bundled toy corpus.
//!
//! Targets come from a teacher model drawn with a fixed seed, so the corpus
//! is exactly representable by the linear model. Writes config.json,
//! train.jsonl, lexicon.jsonl (teacher vectors) and model.json (trained).
//!
//! Usage:
//!
//!     cargo run -p disco-core --example toy_corpus -- data/

use std::collections::BTreeMap;
use std::path::PathBuf;

use disco_core::composition::Payload;
use disco_core::io_formats::{self, RunConfig};
use disco_core::training::{self, init_params, predict};
use disco_core::{Lexicon, LexiconEntry, TrainConfig, TrainExample, WordClass};

const CONFIG: &str = r#"{
  "dims": {"n": 3, "s": 3},
  "mode": "unified",
  "train": {
    "learning_rate": 0.05,
    "epochs": 2000,
    "seed": 1,
    "init_scale": 0.3,
    "objective": "squared_error_to_target"
  }
}
"#;

const TEACHER_SEED: u64 = 2024;

const SENTENCES: [&[(&str, WordClass)]; 12] = {
    use WordClass::*;
    [
        &[("dragons", Noun), ("breathe", Tv), ("fire", Noun)],
        &[("knights", Noun), ("guard", Tv), ("castles", Noun)],
        &[("dragons", Noun), ("hoard", Tv), ("gold", Noun)],
        &[("old", Adj), ("dragons", Noun), ("sleep", Iv)],
        &[("knights", Noun), ("roar", Iv)],
        &[("red", Adj), ("dragons", Noun), ("breathe", Tv), ("fire", Noun)],
        &[("old", Adj), ("knights", Noun), ("guard", Tv), ("gold", Noun)],
        &[("dragons", Noun), ("guard", Tv), ("castles", Noun)],
        &[("knights", Noun), ("hoard", Tv), ("gold", Noun)],
        &[("dragons", Noun), ("roar", Iv)],
        &[("red", Adj), ("dragons", Noun), ("sleep", Iv)],
        &[("knights", Noun), ("guard", Tv), ("old", Adj), ("castles", Noun)],
    ]
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    let run: RunConfig = serde_json::from_str(CONFIG)?;
    let config = run.semantics()?;
    let teacher_cfg = TrainConfig {
        seed: TEACHER_SEED,
        init_scale: 1.0,
        ..TrainConfig::default()
    };
    let vocab = SENTENCES.iter().flat_map(|s| s.iter().map(|(w, _)| *w));
    let teacher = init_params(vocab, &config, run.hidden_dim(), &teacher_cfg)?;

    let mut examples = Vec::new();
    let mut classes = BTreeMap::new();
    for s in SENTENCES {
        let sentence: Vec<(String, WordClass)> = s.iter().map(|(w, c)| (w.to_string(), *c)).collect();
        let target = predict(&sentence, &teacher)?.into_data();
        classes.extend(sentence.iter().cloned());
        examples.push(TrainExample { sentence, target });
    }

    let mut lexicon = Lexicon::new();
    for (word, class) in classes {
        let payload = Payload::Vector(teacher.words[&word].clone());
        let gtype = class.canonical_type().expect("vector classes have a fixed type");
        lexicon.insert(LexiconEntry { word, gtype, class, payload }, &config)?;
    }
    for (word, class) in [("who", WordClass::Relpron), ("himself", WordClass::Reflpron)] {
        let gtype = class.canonical_type().expect("pronoun classes have a fixed type");
        let entry = LexiconEntry {
            word: word.into(),
            gtype,
            class,
            payload: Payload::None,
        };
        lexicon.insert(entry, &config)?;
    }

    let outcome = training::train(&examples, &config, run.hidden_dim(), &run.train)?;
    let trace = &outcome.loss_trace;
    println!(
        "initial loss {:.3e}, final {:.3e}, first below 1e-3 at epoch {:?}",
        trace[0],
        outcome.final_loss(),
        trace.iter().position(|&l| l < 1e-3)
    );

    std::fs::write(out.join("config.json"), CONFIG)?;
    io_formats::save_examples(&out.join("train.jsonl"), &examples)?;
    io_formats::save_lexicon(&out.join("lexicon.jsonl"), &lexicon)?;
    io_formats::save_model(&out.join("model.json"), &outcome.params)?;
    Ok(())
}
