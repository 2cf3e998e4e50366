//! Test-only oracles and property checks shared by the integration tests and
//! the acceptance suite. The oracle works directly from per-document weight
//! tables in probability space and never calls into `posnb_core::nbayes`.

#![allow(dead_code)]

use posnb_core::corpus::{LabeledCorpus, Polarity, Token};
use posnb_core::eval::{ExperimentConfig, PolarityExperiment};
use posnb_core::features::{Attribute, AttributeVector, OccurrenceRule, SchemeFamily, WeightScheme};
use posnb_core::nbayes::NbModel;
use posnb_core::synthetic::{polarity_corpus, SyntheticSpec};

pub const VOCAB: usize = 6;

/// A tiny corpus: dense weight rows over a 6-word vocabulary plus labels.
#[derive(Debug, Clone)]
pub struct TinyCorpus {
    pub docs: Vec<[f64; VOCAB]>,
    pub labels: Vec<Polarity>,
}

const WEIGHTS: [f64; 5] = [0.0, 1.0, 0.5, 2.0, 0.25];

fn mix(mut x: u64) -> u64 {
    x ^= x >> 33;
    x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
    x ^= x >> 33;
    x = x.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    x ^ (x >> 33)
}

fn row(seed: u64) -> [f64; VOCAB] {
    let mut out = [0.0; VOCAB];
    let mut h = mix(seed);
    for w in out.iter_mut() {
        *w = WEIGHTS[(h % WEIGHTS.len() as u64) as usize];
        h /= WEIGHTS.len() as u64;
    }
    out
}

/// Every label pattern with both classes present for 2 to 5 documents, each
/// with `variants` deterministic weight tables.
pub fn enumerate_tiny_corpora(variants: u64) -> Vec<TinyCorpus> {
    let mut out = Vec::new();
    for n_docs in 2..=5usize {
        for pattern in 0u32..(1 << n_docs) {
            let labels: Vec<Polarity> = (0..n_docs)
                .map(|i| if pattern >> i & 1 == 1 { Polarity::Positive } else { Polarity::Negative })
                .collect();
            if !labels.contains(&Polarity::Positive) || !labels.contains(&Polarity::Negative) {
                continue;
            }
            for v in 0..variants {
                let docs = (0..n_docs)
                    .map(|i| row(((n_docs as u64) << 40) ^ ((pattern as u64) << 20) ^ (v << 4) ^ i as u64))
                    .collect();
                out.push(TinyCorpus { docs, labels: labels.clone() });
            }
        }
    }
    out
}

pub fn word(i: usize) -> Attribute {
    Attribute::Unigram(Token::new(format!("w{i}")).unwrap())
}

pub fn to_vector(row: &[f64; VOCAB]) -> AttributeVector {
    AttributeVector::from_entries(row.iter().enumerate().map(|(i, &w)| (word(i), w)), VOCAB)
}

/// `Pr(c) * prod_d Pr(d|c)^x_d` for both classes, computed by explicit loops.
pub fn oracle_joint(corpus: &TinyCorpus, x: &[f64; VOCAB], s: f64) -> [f64; 2] {
    let classes = [Polarity::Positive, Polarity::Negative];
    let mut n_cd = [[0.0; VOCAB]; 2];
    let mut docs_c = [0usize; 2];
    for (doc, label) in corpus.docs.iter().zip(&corpus.labels) {
        let c = classes.iter().position(|k| k == label).unwrap();
        docs_c[c] += 1;
        for d in 0..VOCAB {
            n_cd[c][d] += doc[d];
        }
    }
    let in_vocab: Vec<bool> = (0..VOCAB).map(|d| n_cd[0][d] + n_cd[1][d] > 0.0).collect();
    let mut out = [0.0; 2];
    for c in 0..2 {
        let mut denom = 0.0;
        for d in 0..VOCAB {
            if in_vocab[d] {
                denom += n_cd[c][d] + s;
            }
        }
        let mut joint = docs_c[c] as f64 / corpus.docs.len() as f64;
        for d in 0..VOCAB {
            if in_vocab[d] && x[d] > 0.0 {
                joint *= ((n_cd[c][d] + s) / denom).powf(x[d]);
            }
        }
        out[c] = joint;
    }
    out
}

/// Compares model log scores and posteriors against the oracle on every
/// enumerated corpus. Returns the number of comparisons made.
pub fn check_oracle_equivalence(variants: u64, tol: f64) -> Result<usize, String> {
    let mut checked = 0;
    for (ci, corpus) in enumerate_tiny_corpora(variants).iter().enumerate() {
        for s in [0.5, 1.0] {
            let vectors: Vec<AttributeVector> = corpus.docs.iter().map(to_vector).collect();
            let model = NbModel::train(vectors.iter().zip(corpus.labels.iter().copied()), s)
                .map_err(|e| format!("corpus {ci}: {e}"))?;
            let probes = [row(ci as u64 ^ 0xabc), corpus.docs[0], [1.0; VOCAB]];
            for x in probes {
                let joint = oracle_joint(corpus, &x, s);
                let scores = model.log_posterior_scores(&to_vector(&x), true);
                for (c, label) in [Polarity::Positive, Polarity::Negative].into_iter().enumerate() {
                    let want = joint[c].ln();
                    let got = scores.get(label);
                    if (want - got).abs() > tol {
                        return Err(format!("corpus {ci}, s={s}, x={x:?}: log score {got} vs oracle {want}"));
                    }
                }
                let z = joint[0] + joint[1];
                let post = model.posterior(&to_vector(&x));
                for c in 0..2 {
                    if (post[c].1 - joint[c] / z).abs() > tol {
                        return Err(format!("corpus {ci}, s={s}: posterior {} vs oracle {}", post[c].1, joint[c] / z));
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

pub fn synthetic_train() -> LabeledCorpus {
    polarity_corpus(&SyntheticSpec { docs_per_class: 60, seed: 101, ..SyntheticSpec::default() })
}

/// 100 documents never seen in training.
pub fn synthetic_probe() -> LabeledCorpus {
    polarity_corpus(&SyntheticSpec { docs_per_class: 50, seed: 202, ..SyntheticSpec::default() })
}

/// Predictions on the probe documents after training on `train` with the
/// given scheme and smoothing, ignoring the class prior. Attribute-keyed so
/// train and probe vocabularies line up.
pub fn predictions(train: &LabeledCorpus, probe: &LabeledCorpus, scheme: WeightScheme, s: f64) -> Vec<Polarity> {
    let cfg = posnb_core::features::FeatureConfig::new(posnb_core::NgramOrders::UNIGRAMS_AND_BIGRAMS);
    let vecs: Vec<AttributeVector> = train
        .documents()
        .iter()
        .map(|d| posnb_core::features::vectorize(d, &cfg, scheme, OccurrenceRule::Last))
        .collect();
    let model = NbModel::train(vecs.iter().zip(train.labels()), s).unwrap();
    probe
        .documents()
        .iter()
        .map(|d| model.classify(&posnb_core::features::vectorize(d, &cfg, scheme, OccurrenceRule::Last), false).label)
        .collect()
}

/// With no smoothing every `0+q` scheme makes the same predictions.
pub fn check_zero_plus_q_collapse() -> Result<(), String> {
    let (train, probe) = (synthetic_train(), synthetic_probe());
    let reference = predictions(&train, &probe, SchemeFamily::ZeroPlusQ.scheme(1.0).unwrap(), 0.0);
    for q in [0.1, 0.5, 2.0] {
        let got = predictions(&train, &probe, SchemeFamily::ZeroPlusQ.scheme(q).unwrap(), 0.0);
        let diff = got.iter().zip(&reference).filter(|(a, b)| a != b).count();
        if diff > 0 {
            return Err(format!("q={q}: {diff} of {} predictions differ from q=1", reference.len()));
        }
    }
    Ok(())
}

/// `(0, q)` with smoothing `s` predicts like `(0, 1)` with smoothing `s / q`.
pub fn check_q_smoothing_equivalence() -> Result<(), String> {
    let (train, probe) = (synthetic_train(), synthetic_probe());
    let s = 1.0;
    for q in [0.5, 2.0] {
        let a = predictions(&train, &probe, SchemeFamily::ZeroPlusQ.scheme(q).unwrap(), s);
        let b = predictions(&train, &probe, SchemeFamily::ZeroPlusQ.scheme(1.0).unwrap(), s / q);
        let diff = a.iter().zip(&b).filter(|(x, y)| x != y).count();
        if diff > 0 {
            return Err(format!("q={q}: {diff} predictions differ"));
        }
    }
    Ok(())
}

/// Scaling every training and test vector by the same constant leaves
/// unsmoothed, prior-free decisions unchanged.
pub fn check_scaling_invariance() -> Result<(), String> {
    let cfg = ExperimentConfig { orders: posnb_core::NgramOrders::UNIGRAMS_AND_BIGRAMS, ..ExperimentConfig::default() };
    let train = PolarityExperiment::prepare(&synthetic_train(), &cfg, None).map_err(|e| e.to_string())?;
    let vecs = train.prepared.vectors(WeightScheme::new(1.0, 0.7).unwrap(), OccurrenceRule::Last);
    let labels = train.prepared.labels();
    let base = NbModel::train(vecs.iter().zip(labels.iter().copied()), 0.0).unwrap();
    for c in [0.25, 3.0] {
        let scaled: Vec<_> = vecs.iter().map(|v| v.scaled(c)).collect();
        let model = NbModel::train(scaled.iter().zip(labels.iter().copied()), 0.0).unwrap();
        for (v, sv) in vecs.iter().zip(&scaled) {
            if base.classify(v, false) != model.classify(sv, false) {
                return Err(format!("scale {c} changed a decision"));
            }
        }
    }
    Ok(())
}

/// `sum_d Pr(d|c) = 1` for every class, and posteriors sum to one.
pub fn check_normalization(cond_tol: f64, post_tol: f64) -> Result<(), String> {
    let train = synthetic_train();
    let cfg = posnb_core::features::FeatureConfig::new(posnb_core::NgramOrders::UNIGRAMS_AND_BIGRAMS);
    for (scheme, s) in [(WeightScheme::presence(), 1.0), (WeightScheme::new(0.0, 1.5).unwrap(), 0.3)] {
        let vecs: Vec<AttributeVector> = train
            .documents()
            .iter()
            .map(|d| posnb_core::features::vectorize(d, &cfg, scheme, OccurrenceRule::Last))
            .collect();
        let model = NbModel::train(vecs.iter().zip(train.labels()), s).unwrap();
        for c in [Polarity::Positive, Polarity::Negative] {
            let total: f64 = model.vocabulary().iter().map(|d| model.cond_log_prob(d, c).unwrap().exp()).sum();
            if (total - 1.0).abs() > cond_tol {
                return Err(format!("sum of Pr(d|{c}) = {total}"));
            }
        }
        for v in &vecs {
            let p: f64 = model.posterior(v).iter().map(|(_, p)| p).sum();
            if (p - 1.0).abs() > post_tol {
                return Err(format!("posterior sums to {p}"));
            }
        }
    }
    Ok(())
}

/// Endpoints `p = 0 -> a` and `p = L - 1 -> a + q`, and non-decreasing
/// weights in between, on pseudo-random schemes and lengths.
pub fn check_positional_weights(trials: u64) -> Result<(), String> {
    use posnb_core::features::positional_weight;
    for t in 0..trials {
        let h = mix(t ^ 0x5eed);
        let a = (h % 1000) as f64 / 400.0;
        let q = (mix(h) % 1000) as f64 / 300.0;
        let len = 1 + (mix(h ^ 1) % 500) as usize;
        let scheme = WeightScheme::new(a, q).map_err(|e| e.to_string())?;
        let first = positional_weight(0, len, scheme);
        let last = positional_weight(len - 1, len, scheme);
        let want_first = if len == 1 { a + q } else { a };
        if (first - want_first).abs() > 1e-12 || (last - (a + q)).abs() > 1e-12 {
            return Err(format!("a={a} q={q} len={len}: endpoints {first}, {last}"));
        }
        let mut prev = f64::NEG_INFINITY;
        for p in 0..len {
            let w = positional_weight(p, len, scheme);
            if w < prev {
                return Err(format!("a={a} q={q} len={len}: weight drops at position {p}"));
            }
            prev = w;
        }
    }
    Ok(())
}

/// Every inner split of a nested plan draws only from its outer training
/// set, inner test folds partition that set, and outer test folds partition
/// the corpus.
pub fn check_nested_no_leakage() -> Result<usize, String> {
    use std::collections::BTreeSet;
    let corpus = synthetic_train();
    let mut inspected = 0;
    for strategy in [posnb_core::corpus::FoldStrategy::Auto, posnb_core::corpus::FoldStrategy::StratifiedRoundRobin] {
        let cfg = ExperimentConfig { fold_strategy: strategy, seed: 11, ..ExperimentConfig::default() };
        let exp = PolarityExperiment::prepare(&corpus, &cfg, None).map_err(|e| e.to_string())?;
        let plan = exp.prepared.plan_nested(&cfg).map_err(|e| e.to_string())?;
        let mut tested = BTreeSet::new();
        for (f, o) in plan.iter().enumerate() {
            let train: BTreeSet<usize> = o.outer.train.iter().copied().collect();
            let test: BTreeSet<usize> = o.outer.test.iter().copied().collect();
            if !train.is_disjoint(&test) || train.len() + test.len() != corpus.len() {
                return Err(format!("outer fold {f}: train and test overlap or miss documents"));
            }
            let mut inner_tested = BTreeSet::new();
            for s in &o.inner {
                if let Some(i) = s.train.iter().chain(&s.test).find(|i| !train.contains(i)) {
                    return Err(format!("outer fold {f}: inner split uses document {i} outside outer training"));
                }
                inner_tested.extend(s.test.iter().copied());
                inspected += 1;
            }
            if inner_tested != train {
                return Err(format!("outer fold {f}: inner test folds do not cover outer training"));
            }
            if !tested.is_disjoint(&test) {
                return Err(format!("outer fold {f}: document tested twice"));
            }
            tested.extend(test);
        }
        if tested.len() != corpus.len() {
            return Err("outer test folds do not cover the corpus".into());
        }
    }
    Ok(inspected)
}
