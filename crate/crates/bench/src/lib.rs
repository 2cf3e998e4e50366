//! Shared fixtures for the benchmarks in `benches/`.

use posnb_core::synthetic::{polarity_corpus, subjectivity_sentences, SyntheticSpec};
use posnb_core::{LabeledCorpus, Sentence, Subjectivity};

/// Roughly the shape of the public review corpus: 2,000 documents of a few
/// dozen sentences each.
pub fn review_corpus() -> LabeledCorpus {
    polarity_corpus(&SyntheticSpec {
        docs_per_class: 1000,
        sentences: (20, 45),
        words_per_sentence: (8, 30),
        ..SyntheticSpec::default()
    })
}

pub fn small_corpus() -> LabeledCorpus {
    polarity_corpus(&SyntheticSpec { docs_per_class: 100, ..SyntheticSpec::default() })
}

pub fn subjectivity_corpus() -> Vec<(Sentence, Subjectivity)> {
    subjectivity_sentences(5000, 1)
}
