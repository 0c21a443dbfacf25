//! Property checks behind `disco verify`.
//!
//! Each check draws its own seeded sample and compares two independent
//! routes to the same quantity.

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use disco_core::composition::{self, compose, g_lin, g_tree_rnn, g_tree_rntn, Squash, WordMeaning};
use disco_core::grammar::{self, Atom, LinkDiagram, PregroupType, SimpleType};
use disco_core::io_formats;
use disco_core::tensor::{self, Tensor};
use disco_core::training::{self, grad_g_lin, grad_sentence, Objective};
use disco_core::{CompositionParams, ModelParams, SemanticsConfig, WordClass};

#[derive(Debug, Clone, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(&mut ChaCha8Rng) -> Result<String, String>;

const CHECKS: [(&str, Check); 11] = [
    ("reduce agrees with exhaustive enumeration", reduce_vs_enumeration),
    ("example reduction: dragons breathe fire", example_reduction),
    ("transitive verb: categorical = nested g_lin", transitive_equivalence),
    ("adjective and intransitive verb: categorical = g_lin", adj_iv_equivalence),
    ("g_tree_rntn specializes to g_lin and g_tree_rnn", specialization),
    ("Frobenius laws", frobenius_laws),
    ("yanking: relative pronoun", relpron_yanking),
    ("yanking: reflexive pronoun", reflexive_yanking),
    ("gradient of g_lin vs finite differences", g_lin_gradients),
    ("sentence gradient vs finite differences", sentence_gradients),
    ("JSON round-trip", round_trips),
];

pub fn run_all(seed: u64) -> Vec<PropertyResult> {
    CHECKS
        .iter()
        .enumerate()
        .map(|(k, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let outcome = check(&mut rng);
            PropertyResult {
                name,
                passed: outcome.is_ok(),
                detail: outcome.unwrap_or_else(|e| e),
            }
        })
        .collect()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let dist = Uniform::new(-1.0, 1.0);
    let n: usize = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| dist.sample(rng)).collect()).expect("finite")
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn within(what: &str, a: &Tensor, b: &Tensor, tol: f64, worst: &mut f64) -> Result<(), String> {
    within_scaled(what, a, b, None, tol, worst)
}

/// Like [`within`], but with the error measured against `scale`, typically
/// the same computation on absolute values, so cancellation in the exact
/// result is not mistaken for an error.
fn within_scaled(what: &str, a: &Tensor, b: &Tensor, scale: Option<&Tensor>, tol: f64, worst: &mut f64) -> Result<(), String> {
    if a.shape() != b.shape() {
        return Err(format!("{what}: shapes {:?} vs {:?}", a.shape(), b.shape()));
    }
    let e = match scale {
        Some(s) if s.norm() > 0.0 => {
            let diff: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            diff / s.norm()
        }
        _ => rel_err(a.data(), b.data()),
    };
    *worst = worst.max(e);
    if e > tol {
        return Err(format!("{what}: relative error {e:.3e} > {tol:.0e}"));
    }
    Ok(())
}

fn ty(s: &str) -> PregroupType {
    s.parse().expect("literal type")
}

fn simple(rng: &mut ChaCha8Rng, z: std::ops::RangeInclusive<i32>) -> SimpleType {
    let atom = if rng.gen_bool(0.5) { Atom::noun() } else { Atom::sentence() };
    SimpleType::new(atom, rng.gen_range(z))
}

/// Uniform strings are rarely reducible, so half the sample is planted: `s`
/// with contracting pairs inserted, sometimes with one factor perturbed.
fn random_type_string(rng: &mut ChaCha8Rng) -> Vec<PregroupType> {
    let len = rng.gen_range(1..=8);
    let mut factors: Vec<SimpleType> = if rng.gen_bool(0.5) {
        (0..len).map(|_| simple(rng, -2..=2)).collect()
    } else {
        let mut f = vec![SimpleType::new(Atom::sentence(), 0)];
        while f.len() + 2 <= len {
            let left = simple(rng, -2..=1);
            let at = rng.gen_range(0..=f.len());
            f.insert(at, left.right());
            f.insert(at, left);
        }
        if rng.gen_bool(0.3) {
            let k = rng.gen_range(0..f.len());
            f[k] = simple(rng, -2..=2);
        }
        f
    };
    factors.truncate(8);
    factors.into_iter().map(|f| PregroupType::new(vec![f])).collect()
}

fn reduce_vs_enumeration(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let target = ty("s");
    let mut reducible = 0;
    for _ in 0..500 {
        let sentence = random_type_string(rng);
        let found = grammar::reduce(&sentence, &target).map_err(err)?;
        let all = grammar::enumerate_reductions(&sentence, &target).map_err(err)?;
        if found.is_some() != !all.is_empty() {
            return Err(format!("disagreement on {sentence:?}"));
        }
        if let Some(d) = found {
            d.validate(&grammar::flatten(&sentence)).map_err(err)?;
            if d != all[0] {
                return Err(format!("not the least reduction for {sentence:?}"));
            }
            reducible += 1;
        }
    }
    Ok(format!("500 strings, {reducible} reducible"))
}

fn example_reduction(_: &mut ChaCha8Rng) -> Result<String, String> {
    let sentence = [ty("n"), ty("n^r s n^l"), ty("n")];
    let d = grammar::reduce(&sentence, &ty("s"))
        .map_err(err)?
        .ok_or("no reduction")?;
    if d.links() != [(0, 1), (3, 4)] || d.open() != [2] {
        return Err(format!("got links {:?}", d.links()));
    }
    Ok("links [[0,1],[3,4]], open [2]".into())
}

fn per_type(rng: &mut ChaCha8Rng, d_n: usize, d_s: usize, hidden: usize) -> CompositionParams {
    CompositionParams::per_type(
        random_tensor(rng, &[d_n, d_n, d_n]),
        random_tensor(rng, &[d_n, d_s, d_n]),
        random_tensor(rng, &[d_n, hidden, d_n]),
        random_tensor(rng, &[d_n, d_s, hidden]),
    )
    .expect("consistent shapes")
}

fn meaning(word: &str, gtype: &str, t: Tensor, config: &SemanticsConfig) -> Result<WordMeaning, String> {
    WordMeaning::new(word, ty(gtype), t, config).map_err(err)
}

fn compose_all(words: &[WordMeaning], target: &str, config: &SemanticsConfig) -> Result<Tensor, String> {
    let types: Vec<_> = words.iter().map(|w| w.gtype.clone()).collect();
    let d = grammar::reduce(&types, &ty(target)).map_err(err)?.ok_or("no reduction")?;
    compose(words, &d, config).map_err(err)
}

fn transitive_equivalence(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for k in 0..500 {
        let d_n = [2, 3, 5][k % 3];
        let d_s = rng.gen_range(1..=4);
        let hidden = rng.gen_range(1..=4);
        let config = SemanticsConfig::split(d_n, d_s).map_err(err)?;
        let p = per_type(rng, d_n, d_s, hidden);
        let (verb, subj, obj) = (random_tensor(rng, &[d_n]), random_tensor(rng, &[d_n]), random_tensor(rng, &[d_n]));
        let b = composition::build_transitive_verb(&verb, &p).map_err(err)?;
        let words = [
            meaning("subj", "n", subj.clone(), &config)?,
            meaning("verb", "n^r s n^l", b, &config)?,
            meaning("obj", "n", obj.clone(), &config)?,
        ];
        let categorical = compose_all(&words, "s", &config)?;
        let inner = g_lin(&verb, p.slot(composition::Slot::TvInner), &obj).map_err(err)?;
        let nested = g_lin(&subj, p.slot(composition::Slot::TvOuter), &inner).map_err(err)?;
        let abs = |t: &Tensor| tensor::map(t, f64::abs).expect("finite");
        let inner_abs = g_lin(&abs(&verb), &abs(p.slot(composition::Slot::TvInner)), &abs(&obj)).map_err(err)?;
        let scale = g_lin(&abs(&subj), &abs(p.slot(composition::Slot::TvOuter)), &inner_abs).map_err(err)?;
        within_scaled("transitive", &categorical, &nested, Some(&scale), 1e-12, &mut worst)?;
    }
    Ok(format!("500 instances, worst relative error {worst:.1e}"))
}

fn adj_iv_equivalence(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for k in 0..500 {
        let d_n = [2, 3, 5][k % 3];
        let d_s = rng.gen_range(1..=4);
        let config = SemanticsConfig::split(d_n, d_s).map_err(err)?;
        let p = per_type(rng, d_n, d_s, 2);
        let (word, noun) = (random_tensor(rng, &[d_n]), random_tensor(rng, &[d_n]));

        let a = composition::build_adjective(&word, &p).map_err(err)?;
        let words = [meaning("adj", "n n^l", a, &config)?, meaning("noun", "n", noun.clone(), &config)?];
        let categorical = compose_all(&words, "n", &config)?;
        let direct = g_lin(&word, p.slot(composition::Slot::Adj), &noun).map_err(err)?;
        within("adjective", &categorical, &direct, 1e-12, &mut worst)?;

        let v = composition::build_intransitive_verb(&word, &p).map_err(err)?;
        let words = [meaning("noun", "n", noun.clone(), &config)?, meaning("iv", "n^r s", v, &config)?];
        let categorical = compose_all(&words, "s", &config)?;
        let direct = g_lin(&noun, p.slot(composition::Slot::Iv), &word).map_err(err)?;
        within("intransitive verb", &categorical, &direct, 1e-12, &mut worst)?;
    }
    Ok(format!("500 instances each, worst relative error {worst:.1e}"))
}

fn specialization(rng: &mut ChaCha8Rng) -> Result<String, String> {
    for k in 0..200 {
        let d = 2 + k % 4;
        let (v1, v2) = (random_tensor(rng, &[d]), random_tensor(rng, &[d]));
        let m = random_tensor(rng, &[d, 2 * d]);
        let t = random_tensor(rng, &[d, d, d]);
        let zero_m = Tensor::zeros(&[d, 2 * d]).map_err(err)?;
        let zero_t = Tensor::zeros(&[d, d, d]).map_err(err)?;
        let rntn = g_tree_rntn(&v1, &v2, &zero_m, &t, Squash::Identity, Squash::Identity).map_err(err)?;
        if rntn != g_lin(&v1, &t, &v2).map_err(err)? {
            return Err(format!("M = 0 differs from g_lin at d = {d}"));
        }
        for f in [Squash::Tanh, Squash::Logistic, Squash::Identity] {
            let rntn = g_tree_rntn(&v1, &v2, &m, &zero_t, f, Squash::Identity).map_err(err)?;
            if rntn != g_tree_rnn(&v1, &v2, &m, f).map_err(err)? {
                return Err(format!("T = 0 differs from g_tree_rnn at d = {d}"));
            }
        }
    }
    Ok("200 instances, bitwise equal".into())
}

fn frobenius_laws(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for d in 2..=5 {
        for _ in 0..50 {
            let (v, w) = (random_tensor(rng, &[d]), random_tensor(rng, &[d]));
            let delta = tensor::frobenius_delta(&v).map_err(err)?;
            within("μ∘Δ = id", &tensor::frobenius_mu(&delta).map_err(err)?, &v, 1e-12, &mut worst)?;

            let vw = tensor::tensor_product(&v, &w).map_err(err)?;
            let hadamard = tensor::pointwise_mul(&v, &w).map_err(err)?;
            within("μ(v⊗w) = v⊙w", &tensor::frobenius_mu(&vw).map_err(err)?, &hadamard, 1e-12, &mut worst)?;

            let zeta = tensor::frobenius_zeta(d).map_err(err)?;
            let unit = tensor::frobenius_mu(&tensor::tensor_product(&v, &zeta).map_err(err)?).map_err(err)?;
            within("μ(v⊗ζ) = v", &unit, &v, 1e-12, &mut worst)?;
            let counit = tensor::contract(&zeta, 0, &delta, 0).map_err(err)?;
            within("(ι⊗id)∘Δ = id", &counit, &v, 1e-12, &mut worst)?;
        }
        let iz = tensor::frobenius_iota(&tensor::frobenius_zeta(d).map_err(err)?).map_err(err)?;
        if iz != d as f64 {
            return Err(format!("ι∘ζ = {iz} at d = {d}"));
        }
    }
    Ok(format!("dims 2-5, worst relative error {worst:.1e}"))
}

fn relpron_yanking(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (d_n, d_s) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let config = SemanticsConfig::split(d_n, d_s).map_err(err)?;
        let (subj, obj) = (random_tensor(rng, &[d_n]), random_tensor(rng, &[d_n]));
        let verb = random_tensor(rng, &[d_n, d_s, d_n]);
        let who = composition::build_relative_pronoun(&config).map_err(err)?;
        let words = [
            meaning("subj", "n", subj.clone(), &config)?,
            meaning("who", "n^r n s^l n", who, &config)?,
            meaning("verb", "n^r s n^l", verb.clone(), &config)?,
            meaning("obj", "n", obj.clone(), &config)?,
        ];
        let full = compose_all(&words, "n", &config)?;
        let simple = composition::relpron_compose(&subj, &verb, &obj).map_err(err)?;
        within("relative pronoun", &full, &simple, 1e-12, &mut worst)?;
    }
    Ok(format!("200 instances, worst relative error {worst:.1e}"))
}

fn reflexive_yanking(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (d_n, d_s) = (rng.gen_range(1..=4), rng.gen_range(1..=4));
        let config = SemanticsConfig::split(d_n, d_s).map_err(err)?;
        let subj = random_tensor(rng, &[d_n]);
        let verb = random_tensor(rng, &[d_n, d_s, d_n]);
        let himself = composition::build_reflexive_pronoun(&config).map_err(err)?;
        let words = [
            meaning("subj", "n", subj.clone(), &config)?,
            meaning("verb", "n^r s n^l", verb.clone(), &config)?,
            meaning("himself", "n s^r n^rr n^r s", himself, &config)?,
        ];
        let full = compose_all(&words, "s", &config)?;
        let simple = composition::reflexive_compose(&verb, &subj).map_err(err)?;
        within("reflexive pronoun", &full, &simple, 1e-12, &mut worst)?;
    }
    Ok(format!("200 instances, worst relative error {worst:.1e}"))
}

const H: f64 = 1e-5;
const GRAD_TOL: f64 = 1e-6;

/// Central differences of `f` at every entry of `x`.
fn numeric_grad(x: &Tensor, mut f: impl FnMut(&Tensor) -> f64) -> Tensor {
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let mut data = x.data().to_vec();
        data[i] = x.data()[i] + H;
        let plus = f(&Tensor::new(x.shape().to_vec(), data.clone()).expect("finite"));
        data[i] = x.data()[i] - H;
        let minus = f(&Tensor::new(x.shape().to_vec(), data).expect("finite"));
        grad.push((plus - minus) / (2.0 * H));
    }
    Tensor::new(x.shape().to_vec(), grad).expect("finite")
}

fn g_lin_gradients(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (d1, d_out, d2) = (rng.gen_range(1..=4), rng.gen_range(1..=4), rng.gen_range(1..=4));
        let (v1, t, v2) = (random_tensor(rng, &[d1]), random_tensor(rng, &[d1, d_out, d2]), random_tensor(rng, &[d2]));
        let up = random_tensor(rng, &[d_out]);
        let (g1, gt, g2) = grad_g_lin(&v1, &t, &v2, &up).map_err(err)?;
        let score = |a: &Tensor, b: &Tensor, c: &Tensor| -> f64 {
            let out = g_lin(a, b, c).expect("shapes fixed");
            out.data().iter().zip(up.data()).map(|(o, u)| o * u).sum()
        };
        within("dv1", &g1, &numeric_grad(&v1, |x| score(x, &t, &v2)), GRAD_TOL, &mut worst)?;
        within("dT", &gt, &numeric_grad(&t, |x| score(&v1, x, &v2)), GRAD_TOL, &mut worst)?;
        within("dv2", &g2, &numeric_grad(&v2, |x| score(&v1, &t, x)), GRAD_TOL, &mut worst)?;
    }
    Ok(format!("50 instances, worst relative error {worst:.1e}"))
}

fn sentence_gradients(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let sentence: Vec<(String, WordClass)> = [("subj", WordClass::Noun), ("verb", WordClass::Tv), ("obj", WordClass::Noun)]
        .into_iter()
        .map(|(w, c)| (w.to_string(), c))
        .collect();
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        // cosine ignores scale: with a 1-d space (or hidden space) some
        // gradients vanish identically, so keep every dimension at least 2
        let d = rng.gen_range(2..=4);
        let config = if k % 2 == 0 {
            SemanticsConfig::unified(d)
        } else {
            SemanticsConfig::split(d, rng.gen_range(2..=4))
        }
        .map_err(err)?;
        let cfg = training::TrainConfig {
            seed: rng.gen(),
            init_scale: 1.0,
            ..Default::default()
        };
        let params = training::init_params(["subj", "verb", "obj"], &config, rng.gen_range(2..=4), &cfg).map_err(err)?;
        let target = random_tensor(rng, &[config.sentence_dim()]);
        let objective = if k % 4 < 2 { Objective::SquaredErrorToTarget } else { Objective::CosineToTarget };
        let analytic = grad_sentence(&sentence, &params, &target, objective).map_err(err)?;
        let loss = |p: &ModelParams| -> f64 {
            let out = training::predict(&sentence, p).expect("shapes fixed");
            training::objective_loss(&out, &target, objective).expect("shapes fixed").0
        };
        for (w, g) in &analytic.grads.words {
            let numeric = numeric_grad(&params.words[w], |x| {
                let mut p = params.clone();
                p.words.insert(w.clone(), x.clone());
                loss(&p)
            });
            within(w, g, &numeric, GRAD_TOL, &mut worst)?;
        }
        let names: Vec<&str> = params.composition.tensors().iter().map(|(n, _)| *n).collect();
        for (idx, name) in names.iter().enumerate() {
            let current = params.composition.tensors()[idx].1.clone();
            let numeric = numeric_grad(&current, |x| {
                let mut p = params.clone();
                *p.composition.tensors_mut()[idx] = x.clone();
                loss(&p)
            });
            within(name, analytic.grads.composition.tensors()[idx].1, &numeric, GRAD_TOL, &mut worst)?;
        }
    }
    Ok(format!("50 three-word sentences, worst relative error {worst:.1e}"))
}

fn round_trips(rng: &mut ChaCha8Rng) -> Result<String, String> {
    for _ in 0..100 {
        let order = rng.gen_range(0..=3);
        let shape: Vec<usize> = (0..order).map(|_| rng.gen_range(1..=3)).collect();
        let scale = 10f64.powi(rng.gen_range(-300..=300));
        let t = random_tensor(rng, &shape);
        let t = tensor::scale(&t, scale).map_err(err)?;
        let back: Tensor = serde_json::from_str(&io_formats::to_json(&t)).map_err(err)?;
        if back.shape() != t.shape() || back.data().iter().zip(t.data()).any(|(a, b)| a.to_bits() != b.to_bits()) {
            return Err(format!("tensor changed: {t:?} -> {back:?}"));
        }
    }
    let sentence = [ty("n"), ty("n^r s n^l"), ty("n")];
    let d = grammar::reduce(&sentence, &ty("s")).map_err(err)?.ok_or("no reduction")?;
    let back: LinkDiagram = serde_json::from_str(&io_formats::to_json(&d)).map_err(err)?;
    if back != d {
        return Err("diagram changed".into());
    }
    Ok("100 tensors bitwise, diagram exact".into())
}
