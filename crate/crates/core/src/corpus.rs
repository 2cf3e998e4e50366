//! Dataset ingestion: tokenization, the polarity directory tree, the
//! two-file subjectivity corpus, and deterministic fold assignment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::nbayes::ClassLabel;
use crate::{Error, Result};

/// A single lowercased, whitespace-free word or punctuation mark.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token(String);

impl Token {
    /// Returns `None` for empty input or input containing whitespace.
    pub fn new(text: impl Into<String>) -> Option<Self> {
        let text = text.into();
        if text.is_empty() || text.chars().any(char::is_whitespace) {
            None
        } else {
            Some(Token(text))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Splits on runs of whitespace, optionally lowercasing each piece.
pub fn tokenize(line: &str, lowercase: bool) -> Vec<Token> {
    line.split_whitespace()
        .map(|piece| if lowercase { Token(piece.to_lowercase()) } else { Token(piece.to_owned()) })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    /// Returns `None` when `tokens` is empty.
    pub fn new(tokens: Vec<Token>) -> Option<Self> {
        if tokens.is_empty() {
            None
        } else {
            Some(Sentence { tokens })
        }
    }

    /// Tokenizes one dataset line; blank lines yield `None`.
    pub fn from_line(line: &str, lowercase: bool) -> Option<Self> {
        Sentence::new(tokenize(line, lowercase))
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, tok) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(tok.as_str())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl ClassLabel for Polarity {
    const ALL: &'static [Self] = &[Polarity::Positive, Polarity::Negative];

    fn name(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subjectivity {
    Subjective,
    Objective,
}

impl ClassLabel for Subjectivity {
    const ALL: &'static [Self] = &[Subjectivity::Subjective, Subjectivity::Objective];

    fn name(self) -> &'static str {
        match self {
            Subjectivity::Subjective => "subjective",
            Subjectivity::Objective => "objective",
        }
    }
}

macro_rules! label_text_impls {
    ($($ty:ty),*) => {$(
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                <$ty as ClassLabel>::ALL
                    .iter()
                    .copied()
                    .find(|c| c.name() == s)
                    .ok_or_else(|| Error::Parse(format!("unknown class label `{s}`")))
            }
        }
    )*};
}

label_text_impls!(Polarity, Subjectivity);

/// A document is an ordered list of sentences. Token positions are 0-based
/// over the concatenation of the sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    sentences: Vec<Sentence>,
    pub label: Option<Polarity>,
}

impl Document {
    /// Fails when there are no sentences.
    pub fn new(id: impl Into<String>, sentences: Vec<Sentence>, label: Option<Polarity>) -> Result<Self> {
        let id = id.into();
        if sentences.is_empty() {
            return Err(Error::InvalidInput(format!("document `{id}` has no tokens")));
        }
        Ok(Document { id, sentences, label })
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    /// Total token count, the document length used by positional weighting.
    pub fn len(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    /// Same id and label, different sentence list.
    pub fn with_sentences(&self, sentences: Vec<Sentence>) -> Result<Self> {
        Document::new(self.id.clone(), sentences, self.label)
    }
}

#[derive(Debug, Clone)]
pub struct LabeledCorpus {
    documents: Vec<Document>,
    class_counts: BTreeMap<Polarity, usize>,
}

impl LabeledCorpus {
    /// Sorts documents by id; rejects unlabeled documents and duplicate ids.
    pub fn new(mut documents: Vec<Document>) -> Result<Self> {
        documents.sort_by(|a, b| a.id.cmp(&b.id));
        let mut class_counts = BTreeMap::new();
        for (i, doc) in documents.iter().enumerate() {
            if i > 0 && documents[i - 1].id == doc.id {
                return Err(Error::InvalidInput(format!("duplicate document id `{}`", doc.id)));
            }
            let label = doc.label.ok_or_else(|| Error::InvalidInput(format!("document `{}` is unlabeled", doc.id)))?;
            *class_counts.entry(label).or_insert(0) += 1;
        }
        Ok(LabeledCorpus { documents, class_counts })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn class_counts(&self) -> &BTreeMap<Polarity, usize> {
        &self.class_counts
    }

    pub fn count(&self, label: Polarity) -> usize {
        self.class_counts.get(&label).copied().unwrap_or(0)
    }

    pub fn labels(&self) -> Vec<Polarity> {
        self.documents.iter().map(|d| d.label.expect("labeled corpus")).collect()
    }
}

/// Sub-directory names and file extension of the polarity tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectoryLayout {
    pub positive_dir: String,
    pub negative_dir: String,
    pub extension: String,
    pub lowercase: bool,
}

impl Default for DirectoryLayout {
    fn default() -> Self {
        DirectoryLayout {
            positive_dir: "pos".into(),
            negative_dir: "neg".into(),
            extension: "txt".into(),
            lowercase: true,
        }
    }
}

/// A loaded polarity corpus plus the files that were skipped for being empty.
#[derive(Debug, Clone)]
pub struct PolarityLoad {
    pub corpus: LabeledCorpus,
    pub skipped_empty: Vec<PathBuf>,
}

fn read_lossy(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    // The public subjectivity files are not strictly UTF-8.
    Ok(match String::from_utf8(bytes) {
        Ok(s) => s,
        Err(e) => String::from_utf8_lossy(e.as_bytes()).into_owned(),
    })
}

fn sentences_of(text: &str, lowercase: bool) -> Vec<Sentence> {
    text.lines().filter_map(|l| Sentence::from_line(l, lowercase)).collect()
}

fn list_class_dir(dir: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::Config(format!("missing dataset directory {}", dir.display())));
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().and_then(|e| e.to_str()) == Some(extension) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads `<root>/<pos>/*.<ext>` and `<root>/<neg>/*.<ext>`, one sentence per
/// line. Files are read in parallel; the corpus is ordered by id.
pub fn load_polarity_corpus(root: &Path, layout: &DirectoryLayout) -> Result<PolarityLoad> {
    let pos = list_class_dir(&root.join(&layout.positive_dir), &layout.extension)?;
    let neg = list_class_dir(&root.join(&layout.negative_dir), &layout.extension)?;

    let jobs: Vec<(PathBuf, Polarity)> = pos
        .into_iter()
        .map(|p| (p, Polarity::Positive))
        .chain(neg.into_iter().map(|p| (p, Polarity::Negative)))
        .collect();

    let loaded: Vec<Result<(PathBuf, Option<Document>)>> = jobs
        .into_par_iter()
        .map(|(path, label)| {
            let text = read_lossy(&path)?;
            let sentences = sentences_of(&text, layout.lowercase);
            if sentences.is_empty() {
                return Ok((path, None));
            }
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::InvalidInput(format!("unusable file name {}", path.display())))?
                .to_owned();
            Ok((path, Some(Document::new(id, sentences, Some(label))?)))
        })
        .collect();

    let mut documents = Vec::new();
    let mut skipped_empty = Vec::new();
    for item in loaded {
        match item? {
            (_, Some(doc)) => documents.push(doc),
            (path, None) => {
                log::warn!("skipping empty file {}", path.display());
                skipped_empty.push(path);
            }
        }
    }
    Ok(PolarityLoad { corpus: LabeledCorpus::new(documents)?, skipped_empty })
}

/// Default file names of the public subjectivity corpus.
pub const SUBJECTIVE_FILE: &str = "quote.tok.gt9.5000";
pub const OBJECTIVE_FILE: &str = "plot.tok.gt9.5000";

/// Reads both files, subjective sentences first, order preserved within each.
pub fn load_subjectivity_corpus(subjective: &Path, objective: &Path) -> Result<Vec<(Sentence, Subjectivity)>> {
    let mut out = Vec::new();
    for (path, label) in [(subjective, Subjectivity::Subjective), (objective, Subjectivity::Objective)] {
        if !path.is_file() {
            return Err(Error::Config(format!("missing subjectivity file {}", path.display())));
        }
        let sentences = sentences_of(&read_lossy(path)?, true);
        if sentences.is_empty() {
            log::warn!("{} contains no sentences", path.display());
        }
        out.extend(sentences.into_iter().map(|s| (s, label)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FoldStrategy {
    /// `filename-prefix` when every id looks like `cvNNN_*` and k = 10,
    /// otherwise `stratified-round-robin`.
    #[default]
    Auto,
    FilenamePrefix,
    StratifiedRoundRobin,
}

/// Assignment of every document id to a fold in `[0, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignment: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignment.get(id).copied()
    }

    pub fn assignment(&self) -> &BTreeMap<String, usize> {
        &self.assignment
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignment.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Parses the three-digit fold prefix of ids such as `cv927_10681`.
pub fn filename_prefix_number(id: &str) -> Option<usize> {
    let rest = id.strip_prefix("cv")?;
    let digits = rest.get(..3)?;
    if !digits.bytes().all(|b| b.is_ascii_digit()) || rest.as_bytes().get(3) != Some(&b'_') {
        return None;
    }
    digits.parse().ok()
}

pub fn assign_folds(corpus: &LabeledCorpus, k: usize, strategy: FoldStrategy, seed: u64) -> Result<FoldPlan> {
    let items: Vec<(&str, Polarity)> =
        corpus.documents().iter().map(|d| (d.id.as_str(), d.label.expect("labeled corpus"))).collect();
    assign_item_folds(&items, k, strategy, seed)
}

/// Fold assignment over arbitrary `(id, label)` items.
pub fn assign_item_folds<L: ClassLabel>(
    items: &[(&str, L)],
    k: usize,
    strategy: FoldStrategy,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("fold count must be at least 2, got {k}")));
    }
    if k > items.len() {
        return Err(Error::Config(format!("{k} folds requested for {} documents", items.len())));
    }
    let distinct: BTreeSet<&str> = items.iter().map(|(id, _)| *id).collect();
    if distinct.len() != items.len() {
        return Err(Error::InvalidInput("fold assignment requires unique ids".into()));
    }

    let strategy = match strategy {
        FoldStrategy::Auto if k == 10 && items.iter().all(|(id, _)| filename_prefix_number(id).is_some()) => {
            FoldStrategy::FilenamePrefix
        }
        FoldStrategy::Auto => FoldStrategy::StratifiedRoundRobin,
        s => s,
    };

    let assignment = match strategy {
        FoldStrategy::FilenamePrefix => {
            if k != 10 {
                return Err(Error::Config(format!("filename-prefix folds require k = 10, got {k}")));
            }
            items
                .iter()
                .map(|(id, _)| {
                    filename_prefix_number(id)
                        .map(|n| (id.to_string(), n / 100))
                        .ok_or_else(|| Error::InvalidInput(format!("id `{id}` does not match cvNNN_*")))
                })
                .collect::<Result<BTreeMap<_, _>>>()?
        }
        _ => stratified_round_robin(items, k, seed),
    };

    let plan = FoldPlan { k, assignment };
    if let Some(empty) = plan.fold_sizes().iter().position(|&n| n == 0) {
        return Err(Error::InvalidInput(format!("fold {empty} would be empty")));
    }
    Ok(plan)
}

fn stratified_round_robin<L: ClassLabel>(items: &[(&str, L)], k: usize, seed: u64) -> BTreeMap<String, usize> {
    let mut assignment = BTreeMap::new();
    for (class_index, &class) in L::ALL.iter().enumerate() {
        let mut ids: Vec<&str> = items.iter().filter(|(_, l)| *l == class).map(|(id, _)| *id).collect();
        ids.sort_unstable();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((class_index as u64 + 1) << 56));
        ids.shuffle(&mut rng);
        for (i, id) in ids.into_iter().enumerate() {
            assignment.insert(id.to_owned(), i % k);
        }
    }
    assignment
}
