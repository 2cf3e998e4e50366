//! Multinomial Naive Bayes with Laplace smoothing, scored in log space.
//!
//! `N_cd` is the summed weight of attribute `d` over the training vectors of
//! class `c`, and
//!
//! ```text
//! log Pr(d|c) = log (N_cd + s) - log (sum_d' N_cd' + s * |V|)
//! ```
//!
//! where `V` is the vocabulary seen in training across all classes. Test
//! attributes outside `V` are skipped. The multinomial coefficient and the
//! document-length prior are class independent, so they never enter a score.

use std::collections::HashMap;
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::io::{BufRead, Write};
use std::marker::PhantomData;
use std::str::FromStr;

use crate::features::{Attribute, AttributeVector};
use crate::{Error, Result};

/// A closed set of class labels. `ALL` fixes the class order, which is also
/// the tie-break order.
pub trait ClassLabel: Copy + Eq + Ord + Hash + Debug + Send + Sync + 'static {
    const ALL: &'static [Self];

    fn name(self) -> &'static str;

    fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).expect("label listed in ALL")
    }
}

#[derive(Debug, Clone)]
pub struct NbModel<L, K = Attribute> {
    class_doc_counts: Vec<usize>,
    index: HashMap<K, usize>,
    vocabulary: Vec<K>,
    // Row-major: mass[row * n_classes + class].
    mass: Vec<f64>,
    class_mass_totals: Vec<f64>,
    log_denominators: Vec<f64>,
    smoothing: f64,
    _label: PhantomData<L>,
}

/// Per-class log scores in class order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores<L> {
    scores: Vec<(L, f64)>,
}

impl<L: ClassLabel> ClassScores<L> {
    pub fn get(&self, c: L) -> f64 {
        self.scores[c.index()].1
    }

    pub fn iter(&self) -> impl Iterator<Item = (L, f64)> + '_ {
        self.scores.iter().copied()
    }
}

/// The argmax class and whether another class reached the same score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision<L> {
    pub label: L,
    pub tied: bool,
}

impl<L: ClassLabel, K: Hash + Eq + Clone> NbModel<L, K> {
    /// Accumulates `N_cd` from weighted vectors. Every class needs at least
    /// one training document and `smoothing` must be finite and `>= 0`.
    pub fn train<'a, I>(examples: I, smoothing: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a AttributeVector<K>, L)>,
        K: 'a,
    {
        if !(smoothing.is_finite() && smoothing >= 0.0) {
            return Err(Error::Config(format!("smoothing must be finite and non-negative, got {smoothing}")));
        }
        let n_classes = L::ALL.len();
        let mut class_doc_counts = vec![0usize; n_classes];
        let mut index: HashMap<K, usize> = HashMap::new();
        let mut vocabulary = Vec::new();
        let mut mass: Vec<f64> = Vec::new();
        let mut class_mass_totals = vec![0.0; n_classes];

        for (vector, label) in examples {
            let c = label.index();
            class_doc_counts[c] += 1;
            for (key, w) in vector.iter() {
                let row = match index.get(key) {
                    Some(&row) => row,
                    None => {
                        let row = vocabulary.len();
                        index.insert(key.clone(), row);
                        vocabulary.push(key.clone());
                        mass.extend(std::iter::repeat_n(0.0, n_classes));
                        row
                    }
                };
                mass[row * n_classes + c] += w;
                class_mass_totals[c] += w;
            }
        }

        if let Some(empty) = L::ALL.iter().find(|c| class_doc_counts[c.index()] == 0) {
            return Err(Error::EmptyClass(empty.name()));
        }

        Ok(Self::assemble(class_doc_counts, index, vocabulary, mass, class_mass_totals, smoothing))
    }

    fn assemble(
        class_doc_counts: Vec<usize>,
        index: HashMap<K, usize>,
        vocabulary: Vec<K>,
        mass: Vec<f64>,
        class_mass_totals: Vec<f64>,
        smoothing: f64,
    ) -> Self {
        let v = vocabulary.len() as f64;
        let log_denominators = class_mass_totals.iter().map(|t| (t + smoothing * v).ln()).collect();
        NbModel {
            class_doc_counts,
            index,
            vocabulary,
            mass,
            class_mass_totals,
            log_denominators,
            smoothing,
            _label: PhantomData,
        }
    }

    pub fn classes(&self) -> &'static [L] {
        L::ALL
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    pub fn class_doc_count(&self, c: L) -> usize {
        self.class_doc_counts[c.index()]
    }

    pub fn class_mass_total(&self, c: L) -> f64 {
        self.class_mass_totals[c.index()]
    }

    pub fn vocabulary(&self) -> &[K] {
        &self.vocabulary
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn contains(&self, d: &K) -> bool {
        self.index.contains_key(d)
    }

    /// `N_cd`, zero for attributes outside the vocabulary.
    pub fn mass(&self, d: &K, c: L) -> f64 {
        self.index.get(d).map_or(0.0, |&row| self.mass[row * L::ALL.len() + c.index()])
    }

    pub fn log_prior(&self, c: L) -> f64 {
        let total: usize = self.class_doc_counts.iter().sum();
        (self.class_doc_counts[c.index()] as f64 / total as f64).ln()
    }

    fn row_log_prob(&self, row: usize, c: usize) -> f64 {
        let numerator = self.mass[row * L::ALL.len() + c] + self.smoothing;
        if numerator == 0.0 {
            // Unsmoothed zero count eliminates the class.
            return f64::NEG_INFINITY;
        }
        numerator.ln() - self.log_denominators[c]
    }

    /// `log Pr(d|c)`; errors for attributes outside the vocabulary.
    pub fn cond_log_prob(&self, d: &K, c: L) -> Result<f64>
    where
        K: Debug,
    {
        let row = *self.index.get(d).ok_or_else(|| Error::UnknownAttribute(format!("{d:?}")))?;
        Ok(self.row_log_prob(row, c.index()))
    }

    /// `[log Pr(c)] + sum_d x_d log Pr(d|c)` over in-vocabulary attributes.
    pub fn log_posterior_scores(&self, v: &AttributeVector<K>, use_prior: bool) -> ClassScores<L> {
        let n_classes = L::ALL.len();
        let mut scores: Vec<f64> =
            if use_prior { L::ALL.iter().map(|&c| self.log_prior(c)).collect() } else { vec![0.0; n_classes] };
        for (key, w) in v.iter() {
            if let Some(&row) = self.index.get(key) {
                for (c, score) in scores.iter_mut().enumerate() {
                    *score += w * self.row_log_prob(row, c);
                }
            }
        }
        ClassScores { scores: L::ALL.iter().copied().zip(scores).collect() }
    }

    /// Argmax of the log scores; ties go to the earliest class in `L::ALL`.
    pub fn classify(&self, v: &AttributeVector<K>, use_prior: bool) -> Decision<L> {
        decide(&self.log_posterior_scores(v, use_prior))
    }

    /// Normalized `Pr(c|x)` including the class prior. Classes eliminated by
    /// an unsmoothed zero get probability 0; if every class is eliminated the
    /// result is uniform.
    pub fn posterior(&self, v: &AttributeVector<K>) -> Vec<(L, f64)> {
        softmax(&self.log_posterior_scores(v, true))
    }
}

pub fn decide<L: ClassLabel>(scores: &ClassScores<L>) -> Decision<L> {
    let mut best = 0;
    for (i, &(_, s)) in scores.scores.iter().enumerate().skip(1) {
        if s > scores.scores[best].1 {
            best = i;
        }
    }
    let top = scores.scores[best].1;
    let tied = scores.scores.iter().enumerate().any(|(i, &(_, s))| i != best && s == top);
    Decision { label: scores.scores[best].0, tied }
}

pub fn softmax<L: ClassLabel>(scores: &ClassScores<L>) -> Vec<(L, f64)> {
    let max = scores.scores.iter().map(|&(_, s)| s).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        let u = 1.0 / scores.scores.len() as f64;
        return scores.scores.iter().map(|&(c, _)| (c, u)).collect();
    }
    let exps: Vec<f64> = scores.scores.iter().map(|&(_, s)| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    scores.scores.iter().zip(exps).map(|(&(c, _), e)| (c, e / z)).collect()
}

const FORMAT_TAG: &str = "posnb-model v1";

impl<L, K> NbModel<L, K>
where
    L: ClassLabel + Display + FromStr,
    K: Hash + Eq + Clone + Display + FromStr,
{
    /// Line-oriented text format. The header carries class names with their
    /// document counts and exact mass totals, the smoothing value and |V|;
    /// each following line is `class<TAB>attribute<TAB>N_cd`, sorted by class
    /// order and then attribute text. Zero masses are not written.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let classes: Vec<String> = L::ALL
            .iter()
            .map(|&c| format!("{}:{}:{}", c, self.class_doc_counts[c.index()], self.class_mass_totals[c.index()]))
            .collect();
        writeln!(
            out,
            "{FORMAT_TAG}\tclasses={}\tsmoothing={}\tvocabulary={}",
            classes.join(","),
            self.smoothing,
            self.vocabulary.len()
        )?;
        let mut rows: Vec<(String, usize)> =
            self.vocabulary.iter().enumerate().map(|(row, k)| (k.to_string(), row)).collect();
        rows.sort();
        for &c in L::ALL {
            for (text, row) in &rows {
                let m = self.mass[row * L::ALL.len() + c.index()];
                if m != 0.0 {
                    writeln!(out, "{c}\t{text}\t{m}")?;
                }
            }
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty model file".into()))?
            .map_err(|e| Error::Parse(e.to_string()))?;
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.len() != 4 || fields[0] != FORMAT_TAG {
            return Err(Error::Parse(format!("unrecognized model header `{header}`")));
        }
        let value = |field: &str, key: &str| -> Result<String> {
            field
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| Error::Parse(format!("expected `{key}=` in model header")))
        };
        let n_classes = L::ALL.len();
        let mut class_doc_counts = vec![0usize; n_classes];
        let mut class_mass_totals = vec![0.0; n_classes];
        let class_specs = value(fields[1], "classes")?;
        let specs: Vec<&str> = class_specs.split(',').collect();
        if specs.len() != n_classes {
            return Err(Error::Parse(format!("expected {n_classes} classes in model header")));
        }
        for spec in specs {
            let parts: Vec<&str> = spec.split(':').collect();
            let [name, docs, total] = parts[..] else {
                return Err(Error::Parse(format!("malformed class entry `{spec}`")));
            };
            let c = name.parse::<L>().map_err(|_| Error::Parse(format!("unknown class `{name}`")))?;
            class_doc_counts[c.index()] = docs.parse().map_err(|_| Error::Parse(format!("bad count `{docs}`")))?;
            class_mass_totals[c.index()] = total.parse().map_err(|_| Error::Parse(format!("bad total `{total}`")))?;
        }
        let smoothing: f64 =
            value(fields[2], "smoothing")?.parse().map_err(|_| Error::Parse("bad smoothing value".into()))?;
        let vocab_len: usize =
            value(fields[3], "vocabulary")?.parse().map_err(|_| Error::Parse("bad vocabulary size".into()))?;

        let mut index = HashMap::new();
        let mut vocabulary = Vec::new();
        let mut mass = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Parse(format!("malformed model line {}: `{line}`", lineno + 2));
            let mut parts = line.split('\t');
            let (Some(c), Some(attr), Some(m), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
                return Err(bad());
            };
            let c = c.parse::<L>().map_err(|_| bad())?;
            let key = attr.parse::<K>().map_err(|_| bad())?;
            let m: f64 = m.parse().map_err(|_| bad())?;
            let row = *index.entry(key.clone()).or_insert_with(|| {
                vocabulary.push(key);
                mass.extend(std::iter::repeat_n(0.0, n_classes));
                vocabulary.len() - 1
            });
            mass[row * n_classes + c.index()] = m;
        }
        if vocabulary.len() != vocab_len {
            return Err(Error::Parse(format!(
                "header declares {vocab_len} attributes but {} were listed",
                vocabulary.len()
            )));
        }
        Ok(Self::assemble(class_doc_counts, index, vocabulary, mass, class_mass_totals, smoothing))
    }
}

impl<L: ClassLabel> fmt::Display for Decision<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.label.name(), if self.tied { " (tie)" } else { "" })
    }
}
