//! Sentence-level subjectivity scoring and the document transforms built on
//! it: reordering sentences so the most subjective ones land where positional
//! weights are largest, and optionally dropping the objective ones first.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Sentence, Subjectivity};
use crate::features::{vectorize, AttributeVector, FeatureConfig, OccurrenceRule, WeightScheme};
use crate::nbayes::NbModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectivityConfig {
    pub features: FeatureConfig,
    pub scheme: WeightScheme,
    pub rule: OccurrenceRule,
    pub smoothing: f64,
}

impl Default for SubjectivityConfig {
    /// Unigram presence weights with add-one smoothing.
    fn default() -> Self {
        SubjectivityConfig {
            features: FeatureConfig::default(),
            scheme: WeightScheme::presence(),
            rule: OccurrenceRule::Last,
            smoothing: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubjectivityModel {
    inner: NbModel<Subjectivity>,
    config: SubjectivityConfig,
}

pub fn sentence_vector(sentence: &Sentence, config: &SubjectivityConfig) -> AttributeVector {
    let doc = Document::new("", vec![sentence.clone()], None).expect("sentences are non-empty");
    vectorize(&doc, &config.features, config.scheme, config.rule)
}

pub fn train_subjectivity_model(
    sentences: &[(Sentence, Subjectivity)],
    config: SubjectivityConfig,
) -> Result<SubjectivityModel> {
    let vectors: Vec<AttributeVector> = sentences.iter().map(|(s, _)| sentence_vector(s, &config)).collect();
    let inner = NbModel::train(vectors.iter().zip(sentences.iter().map(|(_, l)| *l)), config.smoothing)?;
    Ok(SubjectivityModel { inner, config })
}

impl SubjectivityModel {
    pub fn inner(&self) -> &NbModel<Subjectivity> {
        &self.inner
    }

    pub fn config(&self) -> &SubjectivityConfig {
        &self.config
    }

    /// Posterior probability that `sentence` is subjective. A sentence with
    /// no known attributes gets the class prior.
    pub fn sentence_subjectivity(&self, sentence: &Sentence) -> f64 {
        let v = sentence_vector(sentence, &self.config);
        self.inner
            .posterior(&v)
            .into_iter()
            .find(|(c, _)| *c == Subjectivity::Subjective)
            .map(|(_, p)| p)
            .expect("subjective class present")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TransformMode {
    #[default]
    None,
    Sort,
    FilterAndSort,
}

/// Sentence order produced by the sort step. `Preserve` turns
/// `FilterAndSort` into a plain filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SentenceOrder {
    /// Most subjective sentence last.
    #[default]
    Ascending,
    /// Most subjective sentence first.
    Descending,
    Preserve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub mode: TransformMode,
    pub threshold: f64,
    pub order: SentenceOrder,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig { mode: TransformMode::None, threshold: 0.5, order: SentenceOrder::Ascending }
    }
}

impl TransformConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::Config(format!("subjectivity threshold {} outside [0, 1]", self.threshold)));
        }
        Ok(())
    }
}

/// Audit record for one input sentence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentenceTrace {
    pub sentence_index: usize,
    pub p_subjective: f64,
    pub kept: bool,
}

/// Reorders and/or filters the sentences of `doc` by subjectivity.
pub fn transform_document(doc: &Document, model: &SubjectivityModel, cfg: &TransformConfig) -> Result<Document> {
    Ok(transform_with_trace(doc, model, cfg)?.0)
}

pub fn transform_with_trace(
    doc: &Document,
    model: &SubjectivityModel,
    cfg: &TransformConfig,
) -> Result<(Document, Vec<SentenceTrace>)> {
    cfg.validate()?;
    if cfg.mode == TransformMode::None {
        return Ok((doc.clone(), Vec::new()));
    }
    let scores: Vec<f64> = doc.sentences().iter().map(|s| model.sentence_subjectivity(s)).collect();
    let (order, traces) = arrange(&scores, cfg);
    let sentences = order.iter().map(|&i| doc.sentences()[i].clone()).collect();
    Ok((doc.with_sentences(sentences)?, traces))
}

/// Output sentence indices for the given scores, plus per-sentence traces.
/// Never returns an empty order for non-empty input.
pub fn arrange(scores: &[f64], cfg: &TransformConfig) -> (Vec<usize>, Vec<SentenceTrace>) {
    let mut keep: Vec<usize> = match cfg.mode {
        TransformMode::None => (0..scores.len()).collect(),
        TransformMode::Sort => (0..scores.len()).collect(),
        TransformMode::FilterAndSort => (0..scores.len()).filter(|&i| scores[i] >= cfg.threshold).collect(),
    };
    if keep.is_empty() && !scores.is_empty() {
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        keep.push(best);
    }
    if cfg.mode != TransformMode::None {
        match cfg.order {
            SentenceOrder::Ascending => keep.sort_by(|&x, &y| scores[x].total_cmp(&scores[y])),
            SentenceOrder::Descending => keep.sort_by(|&x, &y| scores[y].total_cmp(&scores[x])),
            SentenceOrder::Preserve => {}
        }
    }
    let mut kept = vec![false; scores.len()];
    for &i in &keep {
        kept[i] = true;
    }
    let traces = scores
        .iter()
        .enumerate()
        .map(|(i, &p)| SentenceTrace { sentence_index: i, p_subjective: p, kept: kept[i] })
        .collect();
    (keep, traces)
}

/// Writes `doc_id<TAB>sentence_index<TAB>score<TAB>kept` lines.
pub fn write_traces<W: Write>(mut out: W, doc_id: &str, traces: &[SentenceTrace]) -> std::io::Result<()> {
    for t in traces {
        writeln!(out, "{doc_id}\t{}\t{}\t{}", t.sentence_index, t.p_subjective, u8::from(t.kept))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sent(s: &str) -> Sentence {
        Sentence::from_line(s, true).unwrap()
    }

    fn toy_model() -> SubjectivityModel {
        let data = vec![
            (sent("i loved this wonderful film"), Subjectivity::Subjective),
            (sent("a truly awful waste of time"), Subjectivity::Subjective),
            (sent("the detective travels to paris"), Subjectivity::Objective),
            (sent("his brother runs the family farm"), Subjectivity::Objective),
        ];
        train_subjectivity_model(&data, SubjectivityConfig::default()).unwrap()
    }

    fn cfg(mode: TransformMode) -> TransformConfig {
        TransformConfig { mode, ..TransformConfig::default() }
    }

    #[test]
    fn unseen_sentence_gets_prior() {
        let m = toy_model();
        assert!((m.sentence_subjectivity(&sent("zzz qqq")) - 0.5).abs() < 1e-12);
        let skewed = vec![
            (sent("great"), Subjectivity::Subjective),
            (sent("awful"), Subjectivity::Subjective),
            (sent("town"), Subjectivity::Objective),
        ];
        let m = train_subjectivity_model(&skewed, SubjectivityConfig::default()).unwrap();
        assert!((m.sentence_subjectivity(&sent("unknown")) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn training_sentences_lean_their_way() {
        let m = toy_model();
        assert!(m.sentence_subjectivity(&sent("i loved this wonderful film")) > 0.5);
        assert!(m.sentence_subjectivity(&sent("the detective travels to paris")) < 0.5);
    }

    #[test]
    fn symmetric_model_is_neutral() {
        let data = vec![(sent("a"), Subjectivity::Subjective), (sent("b"), Subjectivity::Objective)];
        let m = train_subjectivity_model(&data, SubjectivityConfig::default()).unwrap();
        assert_eq!(m.sentence_subjectivity(&sent("a b")), 0.5);
    }

    #[test]
    fn arrange_examples() {
        let scores = [0.9, 0.2, 0.6];
        assert_eq!(arrange(&scores, &cfg(TransformMode::Sort)).0, vec![1, 2, 0]);
        assert_eq!(arrange(&scores, &cfg(TransformMode::FilterAndSort)).0, vec![2, 0]);
        assert_eq!(arrange(&scores, &cfg(TransformMode::None)).0, vec![0, 1, 2]);
        let desc = TransformConfig { order: SentenceOrder::Descending, ..cfg(TransformMode::Sort) };
        assert_eq!(arrange(&scores, &desc).0, vec![0, 2, 1]);
        let filter_only = TransformConfig { order: SentenceOrder::Preserve, ..cfg(TransformMode::FilterAndSort) };
        assert_eq!(arrange(&scores, &filter_only).0, vec![0, 2]);
        assert_eq!(arrange(&[0.3, 0.3, 0.3], &cfg(TransformMode::Sort)).0, vec![0, 1, 2]);
    }

    #[test]
    fn all_objective_keeps_best_sentence() {
        let (order, traces) = arrange(&[0.1, 0.4, 0.2], &cfg(TransformMode::FilterAndSort));
        assert_eq!(order, vec![1]);
        assert_eq!(traces.iter().filter(|t| t.kept).count(), 1);
        assert!(traces[1].kept);
    }

    #[test]
    fn transform_document_reorders() {
        let m = toy_model();
        let doc =
            Document::new("d", vec![sent("i loved this wonderful film"), sent("the detective travels to paris")], None)
                .unwrap();
        let out = transform_document(&doc, &m, &cfg(TransformMode::Sort)).unwrap();
        assert_eq!(out.sentences()[1], doc.sentences()[0]);
        let same = transform_document(&doc, &m, &cfg(TransformMode::None)).unwrap();
        assert_eq!(same, doc);
        let filtered = transform_document(&doc, &m, &cfg(TransformMode::FilterAndSort)).unwrap();
        assert_eq!(filtered.sentences(), &doc.sentences()[..1]);
        let bad = TransformConfig { threshold: 2.0, ..cfg(TransformMode::Sort) };
        assert!(transform_document(&doc, &m, &bad).is_err());
    }

    #[test]
    fn trace_lines() {
        let mut buf = Vec::new();
        let (_, traces) = arrange(&[0.25, 0.75], &cfg(TransformMode::FilterAndSort));
        write_traces(&mut buf, "cv000_1", &traces).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "cv000_1\t0\t0.25\t0\ncv000_1\t1\t0.75\t1\n");
    }

    proptest! {
        #[test]
        fn arrange_properties(scores in proptest::collection::vec(0.0f64..1.0, 1..20), threshold in 0.0f64..1.0,
                              mode in 0u8..3, order in 0u8..3) {
            let mode = [TransformMode::None, TransformMode::Sort, TransformMode::FilterAndSort][mode as usize];
            let order = [SentenceOrder::Ascending, SentenceOrder::Descending, SentenceOrder::Preserve][order as usize];
            let c = TransformConfig { mode, threshold, order };
            let (out, traces) = arrange(&scores, &c);
            prop_assert!(!out.is_empty());
            let mut sorted = out.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), out.len());
            if mode == TransformMode::Sort {
                prop_assert_eq!(out.len(), scores.len());
            }
            if mode != TransformMode::None && order == SentenceOrder::Ascending {
                prop_assert!(out.windows(2).all(|w| scores[w[0]] <= scores[w[1]]));
            }
            if order == SentenceOrder::Preserve || mode == TransformMode::None {
                prop_assert!(out.windows(2).all(|w| w[0] < w[1]));
            }
            prop_assert_eq!(traces.iter().filter(|t| t.kept).count(), out.len());
            prop_assert_eq!(arrange(&scores, &c).0, out);
        }
    }
}
