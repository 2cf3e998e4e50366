//! Seeded generators for review-like corpora. Early sentences are mostly
//! neutral plot narration with mixed sentiment noise; later sentences carry
//! the verdict. Used by dataset-free tests and benchmarks.

use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, LabeledCorpus, Polarity, Sentence, Subjectivity};
use crate::{Error, Result};

const NEUTRAL: &[&str] = &[
    "the",
    "a",
    "film",
    "movie",
    "story",
    "character",
    "plot",
    "scene",
    "director",
    "city",
    "family",
    "he",
    "she",
    "they",
    "is",
    "was",
    "and",
    "of",
    "to",
    "in",
    "with",
    "after",
    "before",
    "when",
    "his",
    "her",
    "father",
    "mother",
    "detective",
    "ship",
    "war",
    "town",
    ",",
    ".",
    "travels",
    "meets",
    "finds",
    "returns",
    "night",
];
const POSITIVE: &[&str] = &[
    "great",
    "wonderful",
    "superb",
    "moving",
    "brilliant",
    "delightful",
    "masterpiece",
    "best",
    "enjoyable",
    "touching",
    "fun",
    "beautiful",
];
const NEGATIVE: &[&str] = &[
    "awful",
    "boring",
    "dull",
    "worst",
    "mess",
    "stupid",
    "waste",
    "terrible",
    "bland",
    "tedious",
    "lame",
    "pointless",
];
const OPINION: &[&str] = &["i", "think", "really", "frankly", "felt", "!", "honestly", "loved", "hated", "must"];

#[derive(Debug, Clone, Copy)]
pub struct SyntheticSpec {
    pub docs_per_class: usize,
    pub sentences: (usize, usize),
    pub words_per_sentence: (usize, usize),
    /// Chance that a sentiment word in the closing sentences matches the label.
    pub closing_signal: f64,
    /// Chance that any word in an opening sentence is a sentiment word.
    pub opening_noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            docs_per_class: 50,
            sentences: (4, 9),
            words_per_sentence: (5, 12),
            closing_signal: 0.85,
            opening_noise: 0.1,
            seed: 7,
        }
    }
}

fn words_for(label: Polarity) -> (&'static [&'static str], &'static [&'static str]) {
    match label {
        Polarity::Positive => (POSITIVE, NEGATIVE),
        Polarity::Negative => (NEGATIVE, POSITIVE),
    }
}

fn sentence(rng: &mut ChaCha8Rng, len: usize, mut pick: impl FnMut(&mut ChaCha8Rng) -> &'static str) -> Sentence {
    let words: Vec<&str> = (0..len.max(1)).map(|_| pick(rng)).collect();
    Sentence::from_line(&words.join(" "), true).expect("non-empty sentence")
}

fn document(rng: &mut ChaCha8Rng, spec: &SyntheticSpec, id: String, label: Polarity) -> Document {
    let (own, other) = words_for(label);
    let n = rng.random_range(spec.sentences.0..=spec.sentences.1).max(2);
    let closing = (n / 3).max(1);
    let sentences = (0..n)
        .map(|i| {
            let len = rng.random_range(spec.words_per_sentence.0..=spec.words_per_sentence.1);
            if i + closing >= n {
                sentence(rng, len, |r| {
                    if r.random_bool(0.35) {
                        let pool = if r.random_bool(spec.closing_signal) { own } else { other };
                        *pool.choose(r).unwrap()
                    } else if r.random_bool(0.3) {
                        *OPINION.choose(r).unwrap()
                    } else {
                        *NEUTRAL.choose(r).unwrap()
                    }
                })
            } else {
                sentence(rng, len, |r| {
                    if r.random_bool(spec.opening_noise) {
                        let pool = if r.random_bool(0.5) { own } else { other };
                        *pool.choose(r).unwrap()
                    } else {
                        *NEUTRAL.choose(r).unwrap()
                    }
                })
            }
        })
        .collect();
    Document::new(id, sentences, Some(label)).expect("non-empty document")
}

/// Ids follow the `cvNNN_*` pattern with NNN spread over 000..999 so the
/// filename-prefix fold rule yields ten balanced folds.
pub fn polarity_corpus(spec: &SyntheticSpec) -> LabeledCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut docs = Vec::with_capacity(2 * spec.docs_per_class);
    for (offset, label) in [(10_000, Polarity::Positive), (20_000, Polarity::Negative)] {
        for i in 0..spec.docs_per_class {
            let prefix = i * 1000 / spec.docs_per_class.max(1);
            docs.push(document(&mut rng, spec, format!("cv{prefix:03}_{}", offset + i), label));
        }
    }
    LabeledCorpus::new(docs).expect("synthetic ids are unique")
}

/// Subjective sentences lean on opinion and sentiment words; objective ones
/// are plot narration.
pub fn subjectivity_sentences(per_class: usize, seed: u64) -> Vec<(Sentence, Subjectivity)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(2 * per_class);
    for label in [Subjectivity::Subjective, Subjectivity::Objective] {
        for _ in 0..per_class {
            let len = rng.random_range(5..=14);
            let s = sentence(&mut rng, len, |r| match label {
                Subjectivity::Subjective if r.random_bool(0.4) => {
                    let pool = if r.random_bool(0.5) {
                        OPINION
                    } else if r.random_bool(0.5) {
                        POSITIVE
                    } else {
                        NEGATIVE
                    };
                    *pool.choose(r).unwrap()
                }
                Subjectivity::Objective if r.random_bool(0.05) => *POSITIVE.choose(r).unwrap(),
                _ => *NEUTRAL.choose(r).unwrap(),
            });
            out.push((s, label));
        }
    }
    out
}

/// Writes `<root>/pos/<id>.txt` and `<root>/neg/<id>.txt`, one sentence per line.
pub fn write_polarity_tree(corpus: &LabeledCorpus, root: &Path) -> Result<()> {
    for dir in ["pos", "neg"] {
        fs::create_dir_all(root.join(dir)).map_err(|e| Error::io(root, e))?;
    }
    for doc in corpus.documents() {
        let dir = match doc.label {
            Some(Polarity::Negative) => "neg",
            _ => "pos",
        };
        let path = root.join(dir).join(format!("{}.txt", doc.id));
        let body: String = doc.sentences().iter().map(|s| format!("{s}\n")).collect();
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Writes the subjective and objective sentences to two files.
pub fn write_subjectivity_files(
    sentences: &[(Sentence, Subjectivity)],
    subjective: &Path,
    objective: &Path,
) -> Result<()> {
    for (path, label) in [(subjective, Subjectivity::Subjective), (objective, Subjectivity::Objective)] {
        let body: String = sentences.iter().filter(|(_, l)| *l == label).map(|(s, _)| format!("{s}\n")).collect();
        fs::write(path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
