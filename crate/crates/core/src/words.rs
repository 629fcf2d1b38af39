//! Finite words, eventually periodic infinite words and lazily generated
//! aperiodic words over the alphabet `{1..n}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite word with 1-based letters. The empty word is allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: impl Into<Vec<u8>>) -> Self {
        Word(letters.into())
    }

    pub fn letter(i: u8) -> Self {
        Word(vec![i])
    }

    /// `i` repeated `k` times.
    pub fn power_of(i: u8, k: usize) -> Self {
        Word(vec![i; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&self, i: u8) -> Word {
        let mut v = self.0.clone();
        v.push(i);
        Word(v)
    }

    pub fn repeat(&self, k: usize) -> Word {
        Word(self.0.repeat(k))
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn starts_with(&self, p: &Word) -> bool {
        self.0.starts_with(&p.0)
    }

    /// The remainder after removing the prefix `p`, if `p` is a prefix.
    pub fn strip_prefix(&self, p: &Word) -> Option<Word> {
        self.0
            .strip_prefix(p.0.as_slice())
            .map(|r| Word(r.to_vec()))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self.0.iter().find(|&&c| c == 0 || c as usize > n) {
            Some(&letter) => Err(Error::InvalidLetter { letter, n }),
            None => Ok(()),
        }
    }

    /// Shortlex successor order key.
    pub fn shortlex_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }

    /// All words of length exactly `len`, in lexicographic order.
    pub fn all_of_length(n: usize, len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * n);
            for w in &out {
                for i in 1..=n as u8 {
                    next.push(w.push(i));
                }
            }
            out = next;
        }
        out
    }

    /// All words of length at most `len`, in shortlex order.
    pub fn all_up_to(n: usize, len: usize) -> Vec<Word> {
        (0..=len).flat_map(|l| Word::all_of_length(n, l)).collect()
    }

    /// Index of a word of length `m` in the lexicographic enumeration.
    pub fn lex_index(&self, n: usize) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &c| acc * n + (c as usize - 1))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let n_max = self.0.iter().copied().max().unwrap_or(0);
        let sep = if n_max >= 10 { "," } else { "" };
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(sep))
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

impl From<&[u8]> for Word {
    fn from(v: &[u8]) -> Self {
        Word(v.to_vec())
    }
}

/// KMP failure function: `pi[i]` is the length of the longest proper border
/// of `s[..=i]`.
pub fn prefix_function(s: &[u8]) -> Vec<usize> {
    let mut pi = vec![0; s.len()];
    for i in 1..s.len() {
        let mut k = pi[i - 1];
        while k > 0 && s[i] != s[k] {
            k = pi[k - 1];
        }
        if s[i] == s[k] {
            k += 1;
        }
        pi[i] = k;
    }
    pi
}

/// Smallest period of a nonempty sequence.
pub fn smallest_period(s: &[u8]) -> usize {
    if s.is_empty() {
        return 0;
    }
    s.len() - prefix_function(s)[s.len() - 1]
}

/// Decomposes `w = root^exponent` with `root` primitive.
pub fn primitive_root(w: &Word) -> Result<(Word, usize)> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let p = smallest_period(&w.0);
    if w.len() % p == 0 {
        Ok((Word(w.0[..p].to_vec()), w.len() / p))
    } else {
        Ok((w.clone(), 1))
    }
}

/// True iff `w2` is a cyclic rotation of `w1`.
pub fn words_conjugate(w1: &Word, w2: &Word) -> bool {
    if w1.len() != w2.len() {
        return false;
    }
    if w1.is_empty() {
        return true;
    }
    let doubled = w1.repeat(2);
    kmp_find(&doubled.0, &w2.0).is_some()
}

fn kmp_find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    if needle.is_empty() {
        return Some(0);
    }
    let pi = prefix_function(needle);
    let mut k = 0;
    for (i, &c) in hay.iter().enumerate() {
        while k > 0 && c != needle[k] {
            k = pi[k - 1];
        }
        if c == needle[k] {
            k += 1;
        }
        if k == needle.len() {
            return Some(i + 1 - k);
        }
    }
    None
}

/// An infinite word `pre · per · per · ⋯` kept in canonical form: the period
/// is primitive and the preperiod cannot be shortened.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventuallyPeriodicWord {
    n: usize,
    pre: Word,
    per: Word,
}

#[derive(Serialize, Deserialize)]
struct EpwJson {
    pre: Vec<u8>,
    per: Vec<u8>,
}

impl EventuallyPeriodicWord {
    pub fn new(n: usize, pre: Word, per: Word) -> Result<Self> {
        if per.is_empty() {
            return Err(Error::EmptyWord);
        }
        pre.validate(n)?;
        per.validate(n)?;
        let (root, _) = primitive_root(&per)?;
        let mut pre = pre.0;
        let mut per = root.0;
        while let (Some(&a), Some(&b)) = (pre.last(), per.last()) {
            if a != b {
                break;
            }
            pre.pop();
            per.rotate_right(1);
        }
        Ok(EventuallyPeriodicWord {
            n,
            pre: Word(pre),
            per: Word(per),
        })
    }

    pub fn periodic(n: usize, per: Word) -> Result<Self> {
        Self::new(n, Word::empty(), per)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pre(&self) -> &Word {
        &self.pre
    }

    pub fn per(&self) -> &Word {
        &self.per
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.pre.is_empty()
    }

    /// Letter at 0-based position `i`.
    pub fn letter(&self, i: usize) -> u8 {
        if i < self.pre.len() {
            self.pre.0[i]
        } else {
            let j = (i - self.pre.len()) % self.per.len();
            self.per.0[j]
        }
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word((0..len).map(|i| self.letter(i)).collect())
    }

    /// The word `i · self`.
    pub fn prepend(&self, w: &Word) -> Self {
        Self::new(self.n, w.concat(&self.pre), self.per.clone())
            .expect("prepending valid letters keeps a valid word")
    }

    /// The tail after dropping the first `k` letters.
    pub fn shift(&self, k: usize) -> Self {
        if k <= self.pre.len() {
            return EventuallyPeriodicWord {
                n: self.n,
                pre: Word(self.pre.0[k..].to_vec()),
                per: self.per.clone(),
            };
        }
        let r = (k - self.pre.len()) % self.per.len();
        let mut per = self.per.0.clone();
        per.rotate_left(r);
        EventuallyPeriodicWord {
            n: self.n,
            pre: Word::empty(),
            per: Word(per),
        }
    }

    /// If the word starts with `w`, the remaining tail.
    pub fn strip_prefix(&self, w: &Word) -> Option<Self> {
        if (0..w.len()).all(|i| self.letter(i) == w.0[i]) {
            Some(self.shift(w.len()))
        } else {
            None
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(EpwJson {
            pre: self.pre.0.clone(),
            per: self.per.0.clone(),
        })
        .expect("plain struct serializes")
    }

    pub fn from_json(n: usize, v: &serde_json::Value) -> Result<Self> {
        let j: EpwJson = serde_json::from_value(v.clone())
            .map_err(|e| crate::error::schema("word", e.to_string()))?;
        Self::new(n, Word(j.pre), Word(j.per))
    }
}

impl fmt::Display for EventuallyPeriodicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pre.is_empty() {
            write!(f, "({})^∞", self.per)
        } else {
            write!(f, "{}({})^∞", self.pre, self.per)
        }
    }
}

/// True iff the two words agree after finite shifts.
pub fn tail_equivalent(x: &EventuallyPeriodicWord, y: &EventuallyPeriodicWord) -> Result<bool> {
    if x.n != y.n {
        return Err(Error::AlphabetMismatch(x.n, y.n));
    }
    Ok(words_conjugate(&x.per, &y.per))
}

/// `(d, #distinct shifted tails)` where `d` is the primitive period length.
pub fn shifted_tail_data(x: &EventuallyPeriodicWord) -> (usize, usize) {
    (x.per.len(), x.pre.len() + x.per.len())
}

/// Deterministic infinite words that are not eventually periodic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LazyPreset {
    ThueMorse,
    Fibonacci,
}

/// An aperiodic word known up to a fixed horizon. Results derived from it
/// are evidence only.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LazyWord {
    preset: LazyPreset,
    prefix: Vec<u8>,
}

pub const DEFAULT_HORIZON: usize = 256;

impl LazyWord {
    pub fn new(preset: LazyPreset, horizon: usize) -> Self {
        let prefix = match preset {
            LazyPreset::ThueMorse => (0..horizon as u64)
                .map(|i| (i.count_ones() % 2) as u8 + 1)
                .collect(),
            LazyPreset::Fibonacci => {
                // fixed point of 1 -> 12, 2 -> 1
                let mut w = vec![1u8];
                while w.len() < horizon {
                    w = w
                        .iter()
                        .flat_map(|&c| if c == 1 { vec![1, 2] } else { vec![1] })
                        .collect();
                }
                w.truncate(horizon);
                w
            }
        };
        LazyWord { preset, prefix }
    }

    pub fn preset(&self) -> LazyPreset {
        self.preset
    }

    pub fn n(&self) -> usize {
        2
    }

    pub fn horizon(&self) -> usize {
        self.prefix.len()
    }

    /// Letter at 0-based position `i`, if within the horizon.
    pub fn letter(&self, i: usize) -> Option<u8> {
        self.prefix.get(i).copied()
    }

    pub fn prefix(&self, len: usize) -> Result<Word> {
        if len > self.prefix.len() {
            return Err(Error::HorizonExceeded(self.prefix.len()));
        }
        Ok(Word(self.prefix[..len].to_vec()))
    }
}
