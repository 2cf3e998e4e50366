//! Cross-validated evaluation: plain k-fold, nested tuning of `q` with an
//! inner k-fold loop, q sweeps, and Wilson score intervals.
//!
//! Documents are reduced once to interned [`OccurrenceProfile`]s; every fold
//! and grid point then derives its weighted vectors from those profiles.
//! Folds run in parallel and are merged in fold order, so results do not
//! depend on the thread count.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::corpus::{assign_item_folds, FoldStrategy, LabeledCorpus, Polarity, Sentence, Subjectivity};
use crate::features::{
    occurrence_profile, AttributeIndex, AttributeVector, FeatureConfig, NgramOrders, OccurrenceProfile, OccurrenceRule,
    PrefixFilterConfig, SchemeFamily, WeightScheme,
};
use crate::nbayes::{ClassLabel, NbModel};
use crate::subjectivity::{
    transform_with_trace, SentenceOrder, SentenceTrace, SubjectivityConfig, SubjectivityModel, TransformConfig,
    TransformMode,
};
use crate::{Error, Result};

/// Fraction of exact matches.
pub fn accuracy<T: PartialEq>(predictions: &[T], gold: &[T]) -> Result<f64> {
    if predictions.is_empty() || predictions.len() != gold.len() {
        return Err(Error::InvalidInput(format!(
            "accuracy needs equal, non-empty inputs (got {} and {})",
            predictions.len(),
            gold.len()
        )));
    }
    let correct = predictions.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(correct as f64 / predictions.len() as f64)
}

/// Two-sided standard normal quantile for a central `confidence` mass.
pub fn z_score(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidInput(format!("confidence {confidence} outside (0, 1)")));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(1.0 - (1.0 - confidence) / 2.0))
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: usize, n: usize, confidence: f64) -> Result<(f64, f64)> {
    if n == 0 || successes > n {
        return Err(Error::InvalidInput(format!("need 0 <= successes <= n and n >= 1, got {successes}/{n}")));
    }
    wilson_interval_from_proportion(successes as f64 / n as f64, n, confidence)
}

/// Wilson score interval for an observed proportion `p_hat` over `n` trials.
pub fn wilson_interval_from_proportion(p_hat: f64, n: usize, confidence: f64) -> Result<(f64, f64)> {
    if n == 0 || !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::InvalidInput(format!("need p_hat in [0, 1] and n >= 1, got {p_hat}, {n}")));
    }
    let z = z_score(confidence)?;
    let n = n as f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p_hat + z2 / (2.0 * n)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Document polarity on the review corpus.
    #[default]
    Polarity,
    /// Sentence subjectivity on the subjectivity corpus (self cross-validation).
    Subjectivity,
}

/// Everything that defines one experiment. Unknown keys are rejected when
/// deserializing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Method label used in reports.
    pub name: String,
    pub task: Task,
    pub orders: NgramOrders,
    pub cross_sentence_bigrams: bool,
    pub family: SchemeFamily,
    pub q: f64,
    pub rule: OccurrenceRule,
    pub prefix_fraction: PrefixFilterConfig,
    pub transform: TransformMode,
    pub threshold: f64,
    pub sentence_order: SentenceOrder,
    /// N-gram orders of the sentence-level subjectivity classifier.
    pub subjectivity_orders: NgramOrders,
    pub smoothing: f64,
    pub use_prior: bool,
    /// Candidate `q` values for nested tuning, strictly increasing.
    pub tuning_grid: Vec<f64>,
    pub outer_k: usize,
    pub inner_k: usize,
    pub fold_strategy: FoldStrategy,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    /// Plain binary-presence unigram NB, 10 outer folds, 5 inner folds.
    fn default() -> Self {
        ExperimentConfig {
            name: String::new(),
            task: Task::Polarity,
            orders: NgramOrders::UNIGRAMS,
            cross_sentence_bigrams: false,
            family: SchemeFamily::OnePlusQ,
            q: 0.0,
            rule: OccurrenceRule::Last,
            prefix_fraction: PrefixFilterConfig::default(),
            transform: TransformMode::None,
            threshold: 0.5,
            sentence_order: SentenceOrder::Ascending,
            subjectivity_orders: NgramOrders::UNIGRAMS,
            smoothing: 1.0,
            use_prior: true,
            tuning_grid: Vec::new(),
            outer_k: 10,
            inner_k: 5,
            fold_strategy: FoldStrategy::Auto,
            seed: 0,
        }
    }
}

/// `0.1, 0.2, ..., 2.0`.
pub fn default_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 10.0).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("q grid must not be empty".into()));
    }
    if grid.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
        return Err(Error::Config("q grid values must be finite and non-negative".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("q grid must be strictly increasing".into()));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_k < 2 || self.inner_k < 2 {
            return Err(Error::Config(format!(
                "fold counts must be at least 2 (outer_k={}, inner_k={})",
                self.outer_k, self.inner_k
            )));
        }
        if !(self.smoothing.is_finite() && self.smoothing >= 0.0) {
            return Err(Error::Config(format!("invalid smoothing {}", self.smoothing)));
        }
        self.scheme()?;
        self.transform_config().validate()?;
        if !self.tuning_grid.is_empty() {
            check_grid(&self.tuning_grid)?;
        }
        Ok(())
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            orders: self.orders,
            cross_sentence_bigrams: self.cross_sentence_bigrams,
            prefix: self.prefix_fraction,
        }
    }

    pub fn scheme(&self) -> Result<WeightScheme> {
        self.family.scheme(self.q)
    }

    pub fn transform_config(&self) -> TransformConfig {
        TransformConfig { mode: self.transform, threshold: self.threshold, order: self.sentence_order }
    }

    pub fn subjectivity_config(&self) -> SubjectivityConfig {
        SubjectivityConfig {
            features: FeatureConfig::new(self.subjectivity_orders),
            smoothing: self.smoothing,
            ..SubjectivityConfig::default()
        }
    }

    pub fn uses_subjectivity(&self) -> bool {
        self.task == Task::Subjectivity || self.transform != TransformMode::None
    }
}

pub const CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub name: String,
    pub subjectivity_used: bool,
    pub config: ExperimentConfig,
    pub per_fold_accuracy: Vec<f64>,
    pub per_fold_n: Vec<usize>,
    pub correct: usize,
    pub n: usize,
    pub pooled_accuracy: f64,
    pub confidence: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub chosen_q_per_fold: Option<Vec<f64>>,
    pub tie_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: f64,
    pub accuracy: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("q,accuracy,wilson_low,wilson_high\n");
        for r in &self.rows {
            writeln!(out, "{},{},{},{}", r.q, r.accuracy, r.wilson_low, r.wilson_high).unwrap();
        }
        out
    }

    pub fn best(&self) -> Option<&SweepRow> {
        self.rows.iter().fold(None, |best: Option<&SweepRow>, r| match best {
            Some(b) if b.accuracy >= r.accuracy => Some(b),
            _ => Some(r),
        })
    }
}

/// One train/test split over item indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// An outer split with the inner splits used for tuning on its training part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OuterSplit {
    pub outer: Split,
    pub inner: Vec<Split>,
}

/// Items reduced to interned occurrence profiles, ready for any `(a, q)`.
#[derive(Debug, Clone)]
pub struct PreparedCorpus<L> {
    ids: Vec<String>,
    labels: Vec<L>,
    profiles: Vec<OccurrenceProfile<u32>>,
    index: AttributeIndex,
}

impl<L: ClassLabel> PreparedCorpus<L> {
    /// Interns attributes in item order so ids are deterministic.
    pub fn from_profiles(ids: Vec<String>, labels: Vec<L>, profiles: Vec<OccurrenceProfile>) -> Self {
        let mut index = AttributeIndex::default();
        let profiles = profiles.iter().map(|p| p.map_keys(|a| index.intern(a))).collect();
        PreparedCorpus { ids, labels, profiles, index }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn attribute_index(&self) -> &AttributeIndex {
        &self.index
    }

    pub fn vectors(&self, scheme: WeightScheme, rule: OccurrenceRule) -> Vec<AttributeVector<u32>> {
        self.profiles.par_iter().map(|p| p.weights(scheme, rule)).collect()
    }

    fn folds(&self, items: &[usize], k: usize, strategy: FoldStrategy, seed: u64) -> Result<Vec<Split>> {
        let pairs: Vec<(&str, L)> = items.iter().map(|&i| (self.ids[i].as_str(), self.labels[i])).collect();
        let plan = assign_item_folds(&pairs, k, strategy, seed)?;
        let mut splits = vec![Split { train: Vec::new(), test: Vec::new() }; k];
        for &i in items {
            let f = plan.fold_of(&self.ids[i]).expect("every item assigned");
            for (g, split) in splits.iter_mut().enumerate() {
                if g == f {
                    split.test.push(i);
                } else {
                    split.train.push(i);
                }
            }
        }
        Ok(splits)
    }

    /// Outer k-fold splits over all items.
    pub fn plan_cv(&self, k: usize, strategy: FoldStrategy, seed: u64) -> Result<Vec<Split>> {
        let all: Vec<usize> = (0..self.len()).collect();
        self.folds(&all, k, strategy, seed)
    }

    /// Outer splits plus, for each, stratified inner splits drawn only from
    /// that outer split's training items.
    pub fn plan_nested(&self, config: &ExperimentConfig) -> Result<Vec<OuterSplit>> {
        self.plan_cv(config.outer_k, config.fold_strategy, config.seed)?
            .into_iter()
            .enumerate()
            .map(|(f, outer)| {
                let inner = self.folds(
                    &outer.train,
                    config.inner_k,
                    FoldStrategy::StratifiedRoundRobin,
                    inner_seed(config.seed, f),
                )?;
                Ok(OuterSplit { outer, inner })
            })
            .collect()
    }
}

fn inner_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Correct predictions, ties and size of one evaluated split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SplitOutcome {
    pub correct: usize,
    pub total: usize,
    pub ties: usize,
}

impl SplitOutcome {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

pub fn evaluate_split<L: ClassLabel>(
    vectors: &[AttributeVector<u32>],
    labels: &[L],
    split: &Split,
    smoothing: f64,
    use_prior: bool,
) -> Result<SplitOutcome> {
    let model = NbModel::train(split.train.iter().map(|&i| (&vectors[i], labels[i])), smoothing)?;
    let mut out = SplitOutcome { total: split.test.len(), ..SplitOutcome::default() };
    for &i in &split.test {
        let d = model.classify(&vectors[i], use_prior);
        out.correct += usize::from(d.label == labels[i]);
        out.ties += usize::from(d.tied);
    }
    Ok(out)
}

fn evaluate_splits<L: ClassLabel>(
    vectors: &[AttributeVector<u32>],
    labels: &[L],
    splits: &[Split],
    smoothing: f64,
    use_prior: bool,
) -> Result<Vec<SplitOutcome>> {
    splits.par_iter().map(|s| evaluate_split(vectors, labels, s, smoothing, use_prior)).collect()
}

fn report(config: &ExperimentConfig, outcomes: &[SplitOutcome], chosen_q: Option<Vec<f64>>) -> Result<EvalReport> {
    let correct = outcomes.iter().map(|o| o.correct).sum();
    let n = outcomes.iter().map(|o| o.total).sum();
    let (wilson_low, wilson_high) = wilson_interval(correct, n, CONFIDENCE)?;
    Ok(EvalReport {
        name: config.name.clone(),
        subjectivity_used: config.uses_subjectivity(),
        config: config.clone(),
        per_fold_accuracy: outcomes.iter().map(SplitOutcome::accuracy).collect(),
        per_fold_n: outcomes.iter().map(|o| o.total).collect(),
        correct,
        n,
        pooled_accuracy: correct as f64 / n as f64,
        confidence: CONFIDENCE,
        wilson_low,
        wilson_high,
        chosen_q_per_fold: chosen_q,
        tie_count: outcomes.iter().map(|o| o.ties).sum(),
    })
}

/// A polarity corpus prepared for one feature/transform setting, with the
/// per-document subjectivity traces when a transform was applied.
pub struct PolarityExperiment {
    pub prepared: PreparedCorpus<Polarity>,
    pub traces: Vec<(String, Vec<SentenceTrace>)>,
}

impl PolarityExperiment {
    /// Applies the sentence transform (if any) and extracts attributes.
    pub fn prepare(
        corpus: &LabeledCorpus,
        config: &ExperimentConfig,
        subjectivity: Option<&SubjectivityModel>,
    ) -> Result<Self> {
        config.validate()?;
        if config.task != Task::Polarity {
            return Err(Error::Config("polarity evaluation requested for a non-polarity config".into()));
        }
        let transform = config.transform_config();
        let model = match (transform.mode, subjectivity) {
            (TransformMode::None, _) => None,
            (_, Some(m)) => Some(m),
            (_, None) => return Err(Error::Config("sentence transform requested without a subjectivity model".into())),
        };
        let features = config.feature_config();
        let staged: Vec<(OccurrenceProfile, Vec<SentenceTrace>)> = corpus
            .documents()
            .par_iter()
            .map(|doc| match model {
                Some(m) => {
                    let (t, traces) = transform_with_trace(doc, m, &transform)?;
                    Ok((occurrence_profile(&t, &features), traces))
                }
                None => Ok((occurrence_profile(doc, &features), Vec::new())),
            })
            .collect::<Result<_>>()?;
        let ids: Vec<String> = corpus.documents().iter().map(|d| d.id.clone()).collect();
        let (profiles, traces): (Vec<_>, Vec<_>) = staged.into_iter().unzip();
        let traces = if model.is_some() { ids.iter().cloned().zip(traces).collect() } else { Vec::new() };
        Ok(PolarityExperiment { prepared: PreparedCorpus::from_profiles(ids, corpus.labels(), profiles), traces })
    }
}

/// Plain k-fold cross-validation at the configured `q`.
pub fn cross_validate(
    corpus: &LabeledCorpus,
    config: &ExperimentConfig,
    subjectivity: Option<&SubjectivityModel>,
) -> Result<EvalReport> {
    let exp = PolarityExperiment::prepare(corpus, config, subjectivity)?;
    cross_validate_prepared(&exp.prepared, config)
}

pub fn cross_validate_prepared<L: ClassLabel>(
    prepared: &PreparedCorpus<L>,
    config: &ExperimentConfig,
) -> Result<EvalReport> {
    config.validate()?;
    let splits = prepared.plan_cv(config.outer_k, config.fold_strategy, config.seed)?;
    let vectors = prepared.vectors(config.scheme()?, config.rule);
    let outcomes = evaluate_splits(&vectors, prepared.labels(), &splits, config.smoothing, config.use_prior)?;
    report(config, &outcomes, None)
}

/// Outer k-fold evaluation where each outer fold picks `q` by inner k-fold
/// cross-validation on its own training documents (highest mean inner
/// accuracy, smallest `q` on ties) and is then retrained on all of them.
pub fn nested_tune(
    corpus: &LabeledCorpus,
    config: &ExperimentConfig,
    subjectivity: Option<&SubjectivityModel>,
) -> Result<EvalReport> {
    let exp = PolarityExperiment::prepare(corpus, config, subjectivity)?;
    nested_tune_prepared(&exp.prepared, config)
}

pub fn nested_tune_prepared<L: ClassLabel>(
    prepared: &PreparedCorpus<L>,
    config: &ExperimentConfig,
) -> Result<EvalReport> {
    config.validate()?;
    let grid = if config.tuning_grid.is_empty() { default_grid() } else { config.tuning_grid.clone() };
    check_grid(&grid)?;
    let plan = prepared.plan_nested(config)?;
    run_nested(prepared, config, &grid, &plan)
}

/// Executes a nested plan. `mean_inner[f][g]` is the mean inner accuracy of
/// grid point `g` for outer fold `f`.
pub fn run_nested<L: ClassLabel>(
    prepared: &PreparedCorpus<L>,
    config: &ExperimentConfig,
    grid: &[f64],
    plan: &[OuterSplit],
) -> Result<EvalReport> {
    let mut mean_inner = vec![Vec::with_capacity(grid.len()); plan.len()];
    for &q in grid {
        let vectors = prepared.vectors(config.family.scheme(q)?, config.rule);
        let per_fold: Vec<f64> = plan
            .par_iter()
            .map(|o| {
                let outcomes =
                    evaluate_splits(&vectors, prepared.labels(), &o.inner, config.smoothing, config.use_prior)?;
                Ok(outcomes.iter().map(SplitOutcome::accuracy).sum::<f64>() / outcomes.len() as f64)
            })
            .collect::<Result<_>>()?;
        for (f, acc) in per_fold.into_iter().enumerate() {
            mean_inner[f].push(acc);
        }
    }

    let chosen: Vec<f64> = mean_inner
        .iter()
        .map(|accs| {
            let mut best = 0;
            for (g, &a) in accs.iter().enumerate() {
                if a > accs[best] {
                    best = g;
                }
            }
            grid[best]
        })
        .collect();

    let mut outcomes = vec![SplitOutcome::default(); plan.len()];
    let mut distinct = chosen.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    for q in distinct {
        let vectors = prepared.vectors(config.family.scheme(q)?, config.rule);
        let folds: Vec<usize> = (0..plan.len()).filter(|&f| chosen[f] == q).collect();
        let results: Vec<SplitOutcome> = folds
            .par_iter()
            .map(|&f| evaluate_split(&vectors, prepared.labels(), &plan[f].outer, config.smoothing, config.use_prior))
            .collect::<Result<_>>()?;
        for (f, r) in folds.into_iter().zip(results) {
            outcomes[f] = r;
        }
    }
    report(config, &outcomes, Some(chosen))
}

/// One cross-validation per grid point, with the same folds throughout.
pub fn sweep_q(
    corpus: &LabeledCorpus,
    config: &ExperimentConfig,
    grid: &[f64],
    subjectivity: Option<&SubjectivityModel>,
) -> Result<SweepResult> {
    let exp = PolarityExperiment::prepare(corpus, config, subjectivity)?;
    sweep_q_prepared(&exp.prepared, config, grid)
}

pub fn sweep_q_prepared<L: ClassLabel>(
    prepared: &PreparedCorpus<L>,
    config: &ExperimentConfig,
    grid: &[f64],
) -> Result<SweepResult> {
    config.validate()?;
    check_grid(grid)?;
    let splits = prepared.plan_cv(config.outer_k, config.fold_strategy, config.seed)?;
    let rows = grid
        .iter()
        .map(|&q| {
            let vectors = prepared.vectors(config.family.scheme(q)?, config.rule);
            let outcomes = evaluate_splits(&vectors, prepared.labels(), &splits, config.smoothing, config.use_prior)?;
            let correct: usize = outcomes.iter().map(|o| o.correct).sum();
            let n: usize = outcomes.iter().map(|o| o.total).sum();
            let (wilson_low, wilson_high) = wilson_interval(correct, n, CONFIDENCE)?;
            Ok(SweepRow { q, accuracy: correct as f64 / n as f64, wilson_low, wilson_high })
        })
        .collect::<Result<_>>()?;
    Ok(SweepResult { rows })
}

/// Prepares labeled sentences for the subjectivity classifier's own
/// cross-validation. Ids are `<class>-<index within class>`.
pub fn prepare_sentences(
    sentences: &[(Sentence, Subjectivity)],
    config: &SubjectivityConfig,
) -> PreparedCorpus<Subjectivity> {
    let mut counters = [0usize; 2];
    let ids = sentences
        .iter()
        .map(|(_, l)| {
            let i = counters[l.index()];
            counters[l.index()] += 1;
            format!("{}-{i:06}", l.name())
        })
        .collect();
    let profiles = sentences
        .par_iter()
        .map(|(s, _)| {
            let doc = crate::corpus::Document::new("", vec![s.clone()], None).expect("non-empty sentence");
            occurrence_profile(&doc, &config.features)
        })
        .collect();
    PreparedCorpus::from_profiles(ids, sentences.iter().map(|(_, l)| *l).collect(), profiles)
}

/// k-fold cross-validation of the subjectivity classifier on its own corpus,
/// with presence weights and stratified folds.
pub fn cross_validate_subjectivity(
    sentences: &[(Sentence, Subjectivity)],
    config: &ExperimentConfig,
) -> Result<EvalReport> {
    config.validate()?;
    let sub = config.subjectivity_config();
    let prepared = prepare_sentences(sentences, &sub);
    let splits = prepared.plan_cv(config.outer_k, FoldStrategy::StratifiedRoundRobin, config.seed)?;
    let vectors = prepared.vectors(sub.scheme, sub.rule);
    let outcomes = evaluate_splits(&vectors, prepared.labels(), &splits, sub.smoothing, config.use_prior)?;
    report(config, &outcomes, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Sentence};
    use crate::subjectivity::train_subjectivity_model;
    use crate::synthetic::{polarity_corpus, subjectivity_sentences, SyntheticSpec};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1, 1, 1, 0], &[1, 1, 1, 1]).unwrap(), 0.75);
        assert_eq!(accuracy(&[1, 2], &[1, 2]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 2], &[2, 1]).unwrap(), 0.0);
        assert!(accuracy::<u8>(&[], &[]).is_err());
        assert!(accuracy(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn wilson_reported_intervals() {
        let check = |(lo, hi): (f64, f64), want: (f64, f64)| {
            assert!((lo - want.0).abs() < 5e-4 && (hi - want.1).abs() < 5e-4, "{lo} {hi} vs {want:?}");
        };
        check(wilson_interval(1797, 2000, 0.95).unwrap(), (0.8845, 0.9110));
        check(wilson_interval_from_proportion(0.8555, 2000, 0.95).unwrap(), (0.8394, 0.8702));
        check(wilson_interval_from_proportion(0.8781, 2000, 0.95).unwrap(), (0.8630, 0.8917));
        assert!((z_score(0.95).unwrap() - 1.959964).abs() < 1e-6);
    }

    #[test]
    fn wilson_errors() {
        assert!(wilson_interval(3, 2, 0.95).is_err());
        assert!(wilson_interval(0, 0, 0.95).is_err());
        assert!(wilson_interval(1, 2, 1.0).is_err());
        assert!(wilson_interval(1, 2, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn wilson_brackets_and_mirrors(n in 1usize..5000, frac in 0.0f64..=1.0, conf in 0.5f64..0.999) {
            let k = ((n as f64) * frac).floor() as usize;
            let p = k as f64 / n as f64;
            let (lo, hi) = wilson_interval(k, n, conf).unwrap();
            prop_assert!(0.0 <= lo && lo <= p + 1e-15 && p <= hi + 1e-15 && hi <= 1.0);
            let (mlo, mhi) = wilson_interval(n - k, n, conf).unwrap();
            prop_assert!((mlo - (1.0 - hi)).abs() < 1e-12 && (mhi - (1.0 - lo)).abs() < 1e-12);
        }
    }

    fn toy_separable() -> LabeledCorpus {
        let doc = |id: &str, text: &str, l| {
            Document::new(id, vec![Sentence::from_line(text, true).unwrap()], Some(l)).unwrap()
        };
        LabeledCorpus::new(vec![
            doc("p1", "good great fine", Polarity::Positive),
            doc("p2", "great fine good", Polarity::Positive),
            doc("n1", "bad awful poor", Polarity::Negative),
            doc("n2", "poor bad awful", Polarity::Negative),
        ])
        .unwrap()
    }

    #[test]
    fn separable_toy_corpus_is_perfect() {
        let cfg = ExperimentConfig { outer_k: 2, ..ExperimentConfig::default() };
        let r = cross_validate(&toy_separable(), &cfg, None).unwrap();
        assert_eq!(r.pooled_accuracy, 1.0);
        assert_eq!(r.n, 4);
        assert_eq!(r.per_fold_accuracy, vec![1.0, 1.0]);
    }

    #[test]
    fn invalid_config_fails_before_training() {
        let corpus = toy_separable();
        let bad = ExperimentConfig { outer_k: 1, ..ExperimentConfig::default() };
        assert!(matches!(cross_validate(&corpus, &bad, None), Err(Error::Config(_))));
        let needs_model =
            ExperimentConfig { outer_k: 2, transform: TransformMode::Sort, ..ExperimentConfig::default() };
        assert!(matches!(cross_validate(&corpus, &needs_model, None), Err(Error::Config(_))));
        let bad_grid = ExperimentConfig { outer_k: 2, tuning_grid: vec![0.5, 0.5], ..ExperimentConfig::default() };
        assert!(matches!(nested_tune(&corpus, &bad_grid, None), Err(Error::Config(_))));
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let ok: ExperimentConfig = serde_json::from_str(r#"{"orders":[1,2],"family":"0+q","q":1.5}"#).unwrap();
        assert_eq!(ok.orders, NgramOrders::UNIGRAMS_AND_BIGRAMS);
        assert_eq!(ok.family, SchemeFamily::ZeroPlusQ);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"qq":1}"#).is_err());
        let json = serde_json::to_string(&ok).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&json).unwrap(), ok);
    }

    fn small() -> LabeledCorpus {
        polarity_corpus(&SyntheticSpec { docs_per_class: 40, ..SyntheticSpec::default() })
    }

    #[test]
    fn cross_validation_is_deterministic() {
        let corpus = small();
        let cfg = ExperimentConfig { family: SchemeFamily::ZeroPlusQ, q: 1.0, ..ExperimentConfig::default() };
        let a = cross_validate(&corpus, &cfg, None).unwrap();
        let b = cross_validate(&corpus, &cfg, None).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.n, 80);
        assert_eq!(a.correct as f64 / a.n as f64, a.pooled_accuracy);
        assert!(a.wilson_low <= a.pooled_accuracy && a.pooled_accuracy <= a.wilson_high);
    }

    #[test]
    fn one_point_grid_matches_plain_cv() {
        let corpus = small();
        let base = ExperimentConfig { family: SchemeFamily::ZeroPlusQ, q: 0.7, ..ExperimentConfig::default() };
        let plain = cross_validate(&corpus, &base, None).unwrap();
        let tuned = nested_tune(&corpus, &ExperimentConfig { tuning_grid: vec![0.7], ..base }, None).unwrap();
        assert_eq!(tuned.correct, plain.correct);
        assert_eq!(tuned.per_fold_accuracy, plain.per_fold_accuracy);
        assert_eq!(tuned.chosen_q_per_fold, Some(vec![0.7; 10]));
    }

    #[test]
    fn sweep_matches_cross_validation_rows() {
        let corpus = small();
        let cfg = ExperimentConfig { family: SchemeFamily::ZeroPlusQ, ..ExperimentConfig::default() };
        let grid = [0.5, 1.0, 1.5];
        let sweep = sweep_q(&corpus, &cfg, &grid, None).unwrap();
        for row in &sweep.rows {
            let r = cross_validate(&corpus, &ExperimentConfig { q: row.q, ..cfg.clone() }, None).unwrap();
            assert_eq!(r.pooled_accuracy, row.accuracy);
        }
        let csv = sweep.to_csv();
        assert!(csv.starts_with("q,accuracy,wilson_low,wilson_high\n0.5,"));
        assert_eq!(csv.lines().count(), 4);
        assert!(sweep_q(&corpus, &cfg, &[1.0, 0.5], None).is_err());
    }

    #[test]
    fn unsmoothed_zero_plus_q_sweep_is_flat() {
        let corpus = small();
        let cfg = ExperimentConfig {
            family: SchemeFamily::ZeroPlusQ,
            smoothing: 0.0,
            use_prior: false,
            ..ExperimentConfig::default()
        };
        let sweep = sweep_q(&corpus, &cfg, &[0.1, 0.5, 1.0, 2.0], None).unwrap();
        assert!(sweep.rows.windows(2).all(|w| w[0].accuracy == w[1].accuracy));
    }

    #[test]
    fn nested_plan_never_leaks() {
        let corpus = small();
        let exp = PolarityExperiment::prepare(&corpus, &ExperimentConfig::default(), None).unwrap();
        let plan = exp.prepared.plan_nested(&ExperimentConfig::default()).unwrap();
        assert_eq!(plan.len(), 10);
        let mut tested = BTreeSet::new();
        for o in &plan {
            let train: BTreeSet<usize> = o.outer.train.iter().copied().collect();
            let test: BTreeSet<usize> = o.outer.test.iter().copied().collect();
            assert!(train.is_disjoint(&test));
            assert_eq!(train.len() + test.len(), corpus.len());
            assert_eq!(o.inner.len(), 5);
            for s in &o.inner {
                assert!(s.train.iter().chain(&s.test).all(|i| train.contains(i)));
            }
            tested.extend(test);
        }
        assert_eq!(tested.len(), corpus.len());
    }

    #[test]
    fn subjectivity_self_cv_runs() {
        let sentences = subjectivity_sentences(100, 3);
        let cfg = ExperimentConfig { task: Task::Subjectivity, ..ExperimentConfig::default() };
        let r = cross_validate_subjectivity(&sentences, &cfg).unwrap();
        assert_eq!(r.n, 200);
        assert!(r.pooled_accuracy > 0.8, "{}", r.pooled_accuracy);
    }

    #[test]
    fn transform_none_is_baseline() {
        let corpus = small();
        let model = train_subjectivity_model(&subjectivity_sentences(100, 3), SubjectivityConfig::default()).unwrap();
        let cfg = ExperimentConfig::default();
        let with = cross_validate(&corpus, &cfg, Some(&model)).unwrap();
        let without = cross_validate(&corpus, &cfg, None).unwrap();
        assert_eq!(serde_json::to_string(&with).unwrap(), serde_json::to_string(&without).unwrap());
        let sorted = ExperimentConfig { transform: TransformMode::Sort, ..cfg };
        let exp = PolarityExperiment::prepare(&corpus, &sorted, Some(&model)).unwrap();
        assert_eq!(exp.traces.len(), corpus.len());
    }
}
