//! Unigram/bigram attributes and their positional fractional counts.
//!
//! An occurrence of an attribute starting at token position `p` of a document
//! with `n` tokens contributes `a + q * p / (n - 1)`: the first word counts
//! `a`, the last word `a + q`, and everything in between is interpolated
//! linearly. With the `last` rule only the final surviving occurrence of an
//! attribute sets its weight, which makes `(a = 1, q = 0)` the classical
//! binary-presence vector.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Token};
use crate::{Error, Result};

/// A classification feature: one word or two adjacent words.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Attribute {
    Unigram(Token),
    Bigram(Token, Token),
}

impl Attribute {
    pub fn order(&self) -> u8 {
        match self {
            Attribute::Unigram(_) => 1,
            Attribute::Bigram(..) => 2,
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attribute::Unigram(t) => write!(f, "{t}"),
            Attribute::Bigram(a, b) => write!(f, "{a} {b}"),
        }
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(' ');
        let bad = || Error::Parse(format!("malformed attribute `{s}`"));
        let first = parts.next().and_then(Token::new).ok_or_else(bad)?;
        match (parts.next(), parts.next()) {
            (None, _) => Ok(Attribute::Unigram(first)),
            (Some(second), None) => Ok(Attribute::Bigram(first, Token::new(second).ok_or_else(bad)?)),
            _ => Err(bad()),
        }
    }
}

/// Which n-gram orders to extract. Serialized as a list such as `[1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct NgramOrders {
    pub unigrams: bool,
    pub bigrams: bool,
}

impl NgramOrders {
    pub const UNIGRAMS: NgramOrders = NgramOrders { unigrams: true, bigrams: false };
    pub const BIGRAMS: NgramOrders = NgramOrders { unigrams: false, bigrams: true };
    pub const UNIGRAMS_AND_BIGRAMS: NgramOrders = NgramOrders { unigrams: true, bigrams: true };
}

impl TryFrom<Vec<u8>> for NgramOrders {
    type Error = String;

    fn try_from(orders: Vec<u8>) -> std::result::Result<Self, String> {
        if orders.is_empty() {
            return Err("n-gram orders must not be empty".into());
        }
        let mut out = NgramOrders { unigrams: false, bigrams: false };
        for o in orders {
            match o {
                1 => out.unigrams = true,
                2 => out.bigrams = true,
                other => return Err(format!("unsupported n-gram order {other}")),
            }
        }
        Ok(out)
    }
}

impl From<NgramOrders> for Vec<u8> {
    fn from(o: NgramOrders) -> Vec<u8> {
        let mut v = Vec::new();
        if o.unigrams {
            v.push(1);
        }
        if o.bigrams {
            v.push(2);
        }
        v
    }
}

/// The `(a, q)` pair: weight `a` at the first word and `a + q` at the last.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    a: f64,
    q: f64,
}

impl WeightScheme {
    /// Both parameters must be finite and non-negative. `(0, 0)` is accepted:
    /// it assigns zero to every occurrence, so every vector comes out empty.
    pub fn new(a: f64, q: f64) -> Result<Self> {
        if !(a.is_finite() && q.is_finite() && a >= 0.0 && q >= 0.0) {
            return Err(Error::Config(format!("invalid weight scheme a={a}, q={q}")));
        }
        Ok(WeightScheme { a, q })
    }

    pub fn presence() -> Self {
        WeightScheme { a: 1.0, q: 0.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Weight at the last word.
    pub fn b(&self) -> f64 {
        self.a + self.q
    }
}

/// The two weighting families compared in experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeFamily {
    #[serde(rename = "0+q")]
    ZeroPlusQ,
    #[serde(rename = "1+q")]
    OnePlusQ,
}

impl SchemeFamily {
    pub fn scheme(self, q: f64) -> Result<WeightScheme> {
        match self {
            SchemeFamily::ZeroPlusQ => WeightScheme::new(0.0, q),
            SchemeFamily::OnePlusQ => WeightScheme::new(1.0, q),
        }
    }
}

impl fmt::Display for SchemeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeFamily::ZeroPlusQ => "0+q",
            SchemeFamily::OnePlusQ => "1+q",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OccurrenceRule {
    /// Weight of the final surviving occurrence.
    #[default]
    Last,
    /// Sum of the weights of all surviving occurrences.
    Sum,
    /// Shorthand for scheme `(1, 0)` with rule `Last`; ignores the scheme.
    Presence,
}

/// Drops occurrences starting before `floor(k_fraction * doc_length)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(try_from = "f64", into = "f64")]
pub struct PrefixFilterConfig {
    k_fraction: f64,
}

impl PrefixFilterConfig {
    pub fn new(k_fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&k_fraction) {
            return Err(Error::Config(format!("prefix fraction {k_fraction} outside [0, 1]")));
        }
        Ok(PrefixFilterConfig { k_fraction })
    }

    pub fn k_fraction(&self) -> f64 {
        self.k_fraction
    }

    pub fn cutoff(&self, doc_length: usize) -> usize {
        (self.k_fraction * doc_length as f64).floor() as usize
    }
}

impl TryFrom<f64> for PrefixFilterConfig {
    type Error = String;

    fn try_from(v: f64) -> std::result::Result<Self, String> {
        PrefixFilterConfig::new(v).map_err(|e| e.to_string())
    }
}

impl From<PrefixFilterConfig> for f64 {
    fn from(c: PrefixFilterConfig) -> f64 {
        c.k_fraction
    }
}

/// Everything about attribute extraction that does not depend on `(a, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub orders: NgramOrders,
    pub cross_sentence_bigrams: bool,
    pub prefix: PrefixFilterConfig,
}

impl FeatureConfig {
    pub fn new(orders: NgramOrders) -> Self {
        FeatureConfig { orders, cross_sentence_bigrams: false, prefix: PrefixFilterConfig::default() }
    }
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig::new(NgramOrders::UNIGRAMS)
    }
}

/// Every attribute occurrence with its 0-based start position, ordered by
/// position and then by n-gram order.
pub fn extract_attributes(
    doc: &Document,
    orders: NgramOrders,
    cross_sentence_bigrams: bool,
) -> Vec<(Attribute, usize)> {
    let mut out = Vec::new();
    let mut pos = 0usize;
    let mut prev: Option<&Token> = None;
    for sentence in doc.sentences() {
        if !cross_sentence_bigrams {
            prev = None;
        }
        for tok in sentence.tokens() {
            if orders.bigrams {
                if let Some(p) = prev {
                    // The bigram started one token earlier, after that token's unigram.
                    out.push((Attribute::Bigram(p.clone(), tok.clone()), pos - 1));
                }
            }
            if orders.unigrams {
                out.push((Attribute::Unigram(tok.clone()), pos));
            }
            prev = Some(tok);
            pos += 1;
        }
    }
    out.sort_by_key(|(attr, p)| (*p, attr.order()));
    out
}

/// `a + q * p / (doc_length - 1)`, or `a + q` for a one-token document.
///
/// Panics if `p >= doc_length`.
pub fn positional_weight(p: usize, doc_length: usize, scheme: WeightScheme) -> f64 {
    assert!(p < doc_length, "position {p} outside document of length {doc_length}");
    if doc_length == 1 {
        return scheme.a + scheme.q;
    }
    scheme.a + scheme.q * (p as f64 / (doc_length - 1) as f64)
}

pub fn prefix_filter<A>(occurrences: Vec<(A, usize)>, doc_length: usize, cfg: PrefixFilterConfig) -> Vec<(A, usize)> {
    let cutoff = cfg.cutoff(doc_length);
    if cutoff == 0 {
        return occurrences;
    }
    occurrences.into_iter().filter(|(_, p)| *p >= cutoff).collect()
}

/// Sparse attribute weights for one document, sorted by key.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeVector<K = Attribute> {
    entries: Vec<(K, f64)>,
    doc_length: usize,
}

impl<K: Ord> AttributeVector<K> {
    /// Drops non-positive weights and sorts by key. Duplicate keys are summed.
    pub fn from_entries(entries: impl IntoIterator<Item = (K, f64)>, doc_length: usize) -> Self {
        let mut entries: Vec<(K, f64)> = entries.into_iter().filter(|(_, w)| *w > 0.0).collect();
        entries.sort_by(|x, y| x.0.cmp(&y.0));
        entries.dedup_by(|later, kept| {
            if later.0 == kept.0 {
                kept.1 += later.1;
                true
            } else {
                false
            }
        });
        AttributeVector { entries, doc_length: doc_length.max(1) }
    }

    pub fn get(&self, key: &K) -> Option<f64> {
        self.entries.binary_search_by(|(k, _)| k.cmp(key)).ok().map(|i| self.entries[i].1)
    }
}

impl<K> AttributeVector<K> {
    pub fn entries(&self) -> &[(K, f64)] {
        &self.entries
    }

    pub fn doc_length(&self) -> usize {
        self.doc_length
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, f64)> {
        self.entries.iter().map(|(k, w)| (k, *w))
    }

    /// Multiplies every weight by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self
    where
        K: Clone,
    {
        AttributeVector {
            entries: self.entries.iter().map(|(k, w)| (k.clone(), w * c)).collect(),
            doc_length: self.doc_length,
        }
    }
}

/// Surviving start positions of every attribute in one document. Weights for
/// any `(a, q)` and rule can be derived from it without re-tokenizing.
#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceProfile<K = Attribute> {
    keys: Vec<K>,
    // keys[i] occurs at positions[spans[i]..spans[i + 1]], ascending.
    spans: Vec<u32>,
    positions: Vec<u32>,
    doc_length: usize,
}

impl<K: Ord + Clone> OccurrenceProfile<K> {
    pub fn from_occurrences(occurrences: impl IntoIterator<Item = (K, usize)>, doc_length: usize) -> Self {
        let mut occ: Vec<(K, usize)> = occurrences.into_iter().collect();
        occ.sort();
        let mut keys: Vec<K> = Vec::new();
        let mut spans = vec![0u32];
        let mut positions = Vec::with_capacity(occ.len());
        for (k, p) in occ {
            if keys.last() != Some(&k) {
                if !keys.is_empty() {
                    spans.push(positions.len() as u32);
                }
                keys.push(k);
            }
            positions.push(p as u32);
        }
        spans.push(positions.len() as u32);
        if keys.is_empty() {
            spans = vec![0];
        }
        OccurrenceProfile { keys, spans, positions, doc_length: doc_length.max(1) }
    }

    /// Re-keys the profile, e.g. through an interner.
    pub fn map_keys<J: Ord + Clone>(&self, mut f: impl FnMut(&K) -> J) -> OccurrenceProfile<J> {
        let occ = self
            .keys
            .iter()
            .enumerate()
            .flat_map(|(i, k)| {
                let j = f(k);
                self.positions_of(i).iter().map(move |&p| (j.clone(), p as usize))
            })
            .collect::<Vec<_>>();
        OccurrenceProfile::from_occurrences(occ, self.doc_length)
    }

    pub fn weights(&self, scheme: WeightScheme, rule: OccurrenceRule) -> AttributeVector<K> {
        let (scheme, rule) = match rule {
            OccurrenceRule::Presence => (WeightScheme::presence(), OccurrenceRule::Last),
            r => (scheme, r),
        };
        let n = self.doc_length;
        let entries = self.keys.iter().enumerate().map(|(i, k)| {
            let ps = self.positions_of(i);
            let w = match rule {
                OccurrenceRule::Sum => ps.iter().map(|&p| positional_weight(p as usize, n, scheme)).sum(),
                _ => positional_weight(*ps.last().expect("non-empty span") as usize, n, scheme),
            };
            (k.clone(), w)
        });
        // Keys are already sorted and unique.
        AttributeVector { entries: entries.filter(|(_, w)| *w > 0.0).collect(), doc_length: n }
    }
}

impl<K> OccurrenceProfile<K> {
    fn positions_of(&self, i: usize) -> &[u32] {
        &self.positions[self.spans[i] as usize..self.spans[i + 1] as usize]
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    pub fn doc_length(&self) -> usize {
        self.doc_length
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// Extracts, prefix-filters and groups the attribute occurrences of `doc`.
pub fn occurrence_profile(doc: &Document, cfg: &FeatureConfig) -> OccurrenceProfile<Attribute> {
    let n = doc.len();
    let occ = extract_attributes(doc, cfg.orders, cfg.cross_sentence_bigrams);
    OccurrenceProfile::from_occurrences(prefix_filter(occ, n, cfg.prefix), n)
}

pub fn vectorize(doc: &Document, cfg: &FeatureConfig, scheme: WeightScheme, rule: OccurrenceRule) -> AttributeVector {
    occurrence_profile(doc, cfg).weights(scheme, rule)
}

/// Dense ids for attributes, assigned in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct AttributeIndex {
    ids: HashMap<Attribute, u32>,
    attributes: Vec<Attribute>,
}

impl AttributeIndex {
    pub fn intern(&mut self, attr: &Attribute) -> u32 {
        if let Some(&id) = self.ids.get(attr) {
            return id;
        }
        let id = self.attributes.len() as u32;
        self.ids.insert(attr.clone(), id);
        self.attributes.push(attr.clone());
        id
    }

    pub fn get(&self, attr: &Attribute) -> Option<u32> {
        self.ids.get(attr).copied()
    }

    pub fn attribute(&self, id: u32) -> &Attribute {
        &self.attributes[id as usize]
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }
}

/// Convenience for keyed lookups in tests and tools.
pub fn weight_map<K: Hash + Eq + Clone>(v: &AttributeVector<K>) -> HashMap<K, f64> {
    v.iter().map(|(k, w)| (k.clone(), w)).collect()
}
