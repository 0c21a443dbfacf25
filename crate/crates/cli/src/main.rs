//! `disco`: parse, compose, compare and train from the command line.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 no reduction to the
//! target type, 3 validation error (bad record, unknown word, failed check).

mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use disco_core::composition::{CompositionError, Composer};
use disco_core::grammar::{flatten, PregroupType};
use disco_core::io_formats::{self, IoError, LexiconRecord, RunConfig};
use disco_core::tensor::{self, Tensor};
use disco_core::training::{self, TrainError};
use disco_core::{Lexicon, ModelParams, SemanticsConfig};

#[derive(Debug, Parser)]
#[command(name = "disco", version, about = "Compositional distributional semantics with pregroup grammar")]
struct Cli {
    /// JSON-lines lexicon
    #[arg(long, global = true, value_name = "PATH")]
    lexicon: Option<PathBuf>,
    /// model file (read by compose/sim, written by train)
    #[arg(long, global = true, value_name = "PATH")]
    model: Option<PathBuf>,
    /// run configuration
    #[arg(long, global = true, value_name = "PATH", env = "DISCO_CONFIG")]
    config: Option<PathBuf>,
    /// type the sentence must reduce to
    #[arg(long, global = true, value_name = "TYPE", default_value = "s")]
    target: String,
    /// overrides the configured seed (train) or picks the sample (verify)
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,
    /// print one JSON document on stdout
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce a sentence and show its link diagram
    Parse {
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Compute the meaning tensor of a sentence
    Compose {
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Cosine similarity of two sentences separated by a lone `;`
    Sim {
        #[arg(required = true)]
        words: Vec<String>,
    },
    /// Fit a model on JSON-lines training data and write it to --model
    Train {
        /// training examples, one JSON object per line
        #[arg(long, value_name = "PATH")]
        data: PathBuf,
    },
    /// Run the property checks
    Verify,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure {
            code: if e.is_validation() { 3 } else { 1 },
            message: e.to_string(),
        }
    }
}

impl From<CompositionError> for Failure {
    fn from(e: CompositionError) -> Self {
        let code = match &e {
            CompositionError::NoReduction(_) => 2,
            CompositionError::MissingParams { .. } => 1,
            _ => 3,
        };
        let message = match &e {
            CompositionError::MissingParams { .. } => format!("{e} (pass --model)"),
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

impl From<TrainError> for Failure {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Composition(c) => c.into(),
            other => Failure::invalid(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

// stdout writes that tolerate a closed pipe (`disco verify | head`)
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Parse { words } => cmd_parse(cli, words),
        Command::Compose { words } => cmd_compose(cli, words),
        Command::Sim { words } => cmd_sim(cli, words),
        Command::Train { data } => cmd_train(cli, data),
        Command::Verify => cmd_verify(cli),
    }
}

fn emit(value: &serde_json::Value) {
    outln!("{}", io_formats::to_json(value));
}

fn target(cli: &Cli) -> Result<PregroupType, Failure> {
    cli.target
        .parse()
        .map_err(|e| Failure::usage(format!("--target {:?}: {e}", cli.target)))
}

fn require<'a>(flag: &str, value: &'a Option<PathBuf>) -> Result<&'a Path, Failure> {
    value
        .as_deref()
        .ok_or_else(|| Failure::usage(format!("this subcommand needs {flag}")))
}

/// Semantics from --config, else from the model's tensors, else unified at
/// the length of the first vector in the lexicon.
fn semantics(cli: &Cli, model: Option<&ModelParams>) -> Result<SemanticsConfig, Failure> {
    if let Some(path) = &cli.config {
        let run = io_formats::load_config(path)?;
        return run.semantics().map_err(|e| Failure::invalid(e.to_string()));
    }
    if let Some(m) = model {
        let (d_n, d_s) = (m.composition.noun_dim(), m.composition.sentence_dim());
        let unified = matches!(m.composition, disco_core::CompositionParams::Unified { .. });
        let config = if unified {
            SemanticsConfig::unified(d_n)
        } else {
            SemanticsConfig::split(d_n, d_s)
        };
        return config.map_err(|e| Failure::invalid(e.to_string()));
    }
    let path = require("--lexicon", &cli.lexicon)?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let dim = text
        .lines()
        .filter_map(|l| serde_json::from_str::<LexiconRecord>(l).ok())
        .find_map(|r| r.vector.map(|v| v.len()))
        .ok_or_else(|| Failure::usage("cannot infer dimensions from the lexicon; pass --config"))?;
    SemanticsConfig::unified(dim).map_err(|e| Failure::invalid(e.to_string()))
}

struct Loaded {
    config: SemanticsConfig,
    lexicon: Lexicon,
    model: Option<ModelParams>,
}

fn load(cli: &Cli) -> Result<Loaded, Failure> {
    let lexicon_path = require("--lexicon", &cli.lexicon)?;
    let model = match &cli.model {
        Some(p) => Some(io_formats::load_model(p, None)?),
        None => None,
    };
    let config = semantics(cli, model.as_ref())?;
    if let (Some(m), Some(p)) = (&model, &cli.model) {
        m.composition
            .check_against(&config)
            .map_err(|e| Failure::invalid(format!("{}: {e}", p.display())))?;
    }
    let lexicon = io_formats::load_lexicon(lexicon_path, &config)?;
    Ok(Loaded { config, lexicon, model })
}

impl Loaded {
    fn composer(&self) -> Composer<'_> {
        let mut c = Composer::new(&self.config, &self.lexicon);
        if let Some(m) = &self.model {
            c = c.with_params(&m.composition).with_vectors(&m.words);
        }
        c
    }
}

fn refs(words: &[String]) -> Vec<&str> {
    words.iter().map(String::as_str).collect()
}

fn cmd_parse(cli: &Cli, words: &[String]) -> Outcome {
    let target = target(cli)?;
    let loaded = load(cli)?;
    let words = refs(words);
    let composer = loaded.composer();
    let types = composer.types(&words)?;
    let diagram = composer
        .parse(&words, &target)?
        .ok_or_else(|| Failure {
            code: 2,
            message: format!(
                "{:?} does not reduce to {target}",
                words.join(" ")
            ),
        })?;
    let picture = diagram.render_ascii(&flatten(&types));
    if cli.json {
        eprint!("{picture}");
        emit(&json!({
            "words": words,
            "types": types.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "target": target.to_string(),
            "diagram": diagram,
        }));
    } else {
        out!("{picture}");
        outln!("{}", io_formats::to_json(&diagram));
    }
    Ok(())
}

fn compose_words(loaded: &Loaded, words: &[&str], target: &PregroupType) -> Result<(disco_core::LinkDiagram, Tensor), Failure> {
    Ok(loaded.composer().compose_sentence(words, target)?)
}

fn cmd_compose(cli: &Cli, words: &[String]) -> Outcome {
    let target = target(cli)?;
    let loaded = load(cli)?;
    let words = refs(words);
    let (diagram, meaning) = compose_words(&loaded, &words, &target)?;
    if cli.json {
        emit(&json!({ "words": words, "diagram": diagram, "tensor": meaning }));
    } else {
        outln!("{}", io_formats::to_json(&meaning));
    }
    Ok(())
}

fn split_sentences(words: &[String]) -> Result<(Vec<&str>, Vec<&str>), Failure> {
    let parts: Vec<&[String]> = words.split(|w| w == ";").collect();
    let (a, b): (Vec<&str>, Vec<&str>) = match parts.as_slice() {
        [a, b] => (refs(a), refs(b)),
        // two quoted sentences
        [single] if single.len() == 2 => (
            single[0].split_whitespace().collect(),
            single[1].split_whitespace().collect(),
        ),
        _ => return Err(Failure::usage("give two sentences separated by a lone ';'")),
    };
    if a.is_empty() || b.is_empty() {
        return Err(Failure::usage("both sentences must be non-empty"));
    }
    Ok((a, b))
}

fn cmd_sim(cli: &Cli, words: &[String]) -> Outcome {
    let (a, b) = split_sentences(words)?;
    let target = target(cli)?;
    let loaded = load(cli)?;
    let (_, va) = compose_words(&loaded, &a, &target)?;
    let (_, vb) = compose_words(&loaded, &b, &target)?;
    let cos = tensor::cosine_similarity(&va, &vb).map_err(|e| Failure::invalid(e.to_string()))?;
    if cli.json {
        emit(&json!({ "a": a.join(" "), "b": b.join(" "), "cosine": cos }));
    } else {
        outln!("{}", io_formats::format_f64(cos));
    }
    Ok(())
}

fn cmd_train(cli: &Cli, data: &Path) -> Outcome {
    let config_path = require("--config", &cli.config)?;
    let out = require("--model", &cli.model)?;
    let run: RunConfig = io_formats::load_config(config_path)?;
    let mut train_cfg = run.train.clone();
    if let Some(seed) = cli.seed {
        train_cfg.seed = seed;
    }
    let semantics = run.semantics().map_err(|e| Failure::invalid(e.to_string()))?;
    let examples = io_formats::load_examples(data)?;
    if examples.is_empty() {
        return Err(Failure::invalid(format!("{}: no training examples", data.display())));
    }
    let outcome = training::train(&examples, &semantics, run.hidden_dim(), &train_cfg)?;
    io_formats::save_model(out, &outcome.params)?;
    eprintln!(
        "trained on {} examples for {} epochs: loss {} -> {}; wrote {}",
        examples.len(),
        train_cfg.epochs,
        outcome.loss_trace[0],
        outcome.final_loss(),
        out.display()
    );
    if cli.json {
        emit(&json!({
            "model": out.display().to_string(),
            "final_loss": outcome.final_loss(),
            "loss_trace": outcome.loss_trace,
        }));
    } else {
        for (epoch, loss) in outcome.loss_trace.iter().enumerate() {
            outln!("{epoch}\t{}", io_formats::format_f64(*loss));
        }
    }
    Ok(())
}

fn cmd_verify(cli: &Cli) -> Outcome {
    let results = verify::run_all(cli.seed.unwrap_or(0));
    let all = results.iter().all(|r| r.passed);
    if cli.json {
        emit(&json!({ "passed": all, "properties": results }));
    } else {
        for r in &results {
            outln!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        }
    }
    if all {
        Ok(())
    } else {
        let failed = results.iter().filter(|r| !r.passed).count();
        Err(Failure::invalid(format!("{failed} of {} properties failed", results.len())))
    }
}
