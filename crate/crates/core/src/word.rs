//! Alphabets, words and the finite factor universe of an input word.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Dense identifier of a factor inside a [`FactorTable`].
pub type FactorId = u32;

/// A finite ordered set of terminal symbols (Σ).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Alphabet {
    symbols: BTreeSet<char>,
}

impl Alphabet {
    /// Builds a declared alphabet; it must be non-empty and duplicate free.
    pub fn new(symbols: impl IntoIterator<Item = char>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for c in symbols {
            if !set.insert(c) {
                return Err(Error::validation(format!("duplicate alphabet symbol '{c}'"), None));
            }
        }
        if set.is_empty() {
            return Err(Error::validation("alphabet must not be empty", None));
        }
        Ok(Alphabet { symbols: set })
    }

    /// Builds an alphabet from arbitrary symbols, merging duplicates and
    /// allowing the empty set (used for inferred alphabets).
    pub fn inferred(symbols: impl IntoIterator<Item = char>) -> Self {
        Alphabet { symbols: symbols.into_iter().collect() }
    }

    pub fn contains(&self, c: char) -> bool {
        self.symbols.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbols in ascending order.
    pub fn symbols(&self) -> impl Iterator<Item = char> + '_ {
        self.symbols.iter().copied()
    }

    /// Union of two alphabets.
    pub fn union(&self, other: &Alphabet) -> Alphabet {
        Alphabet { symbols: self.symbols.union(&other.symbols).copied().collect() }
    }

    /// Checks that every symbol of `w` belongs to the alphabet.
    pub fn check_word(&self, w: &str) -> Result<()> {
        match w.chars().find(|c| !self.contains(*c)) {
            Some(c) => Err(Error::Input(format!(
                "symbol '{c}' of word \"{w}\" is outside the alphabet {self}"
            ))),
            None => Ok(()),
        }
    }

    /// All words over this alphabet of length at most `max_len`, shortest
    /// first and lexicographic within a length.
    pub fn words_up_to(&self, max_len: usize) -> Vec<String> {
        let syms: Vec<char> = self.symbols().collect();
        let mut out = vec![String::new()];
        let mut layer = vec![String::new()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * syms.len());
            for w in &layer {
                for &c in &syms {
                    let mut v = w.clone();
                    v.push(c);
                    next.push(v);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// The interned set of all distinct factors of a word.
///
/// Ids are assigned in (length, lexicographic) order, so id 0 is always ε
/// and the highest id is the word itself.
#[derive(Clone, Debug)]
pub struct FactorTable {
    word: Vec<char>,
    factors: Vec<Box<[char]>>,
    index: HashMap<Box<[char]>, FactorId>,
    /// `length_start[l]` is the first id of length `l`; has `|w| + 2` entries.
    length_start: Vec<FactorId>,
}

impl FactorTable {
    /// Interns all factors of `w`, rejecting symbols outside `alphabet`.
    pub fn intern(w: &str, alphabet: &Alphabet) -> Result<Self> {
        alphabet.check_word(w)?;
        Ok(Self::intern_unchecked(w))
    }

    /// Interns all factors of `w` without an alphabet check.
    pub fn intern_unchecked(w: &str) -> Self {
        let word: Vec<char> = w.chars().collect();
        let n = word.len();
        let mut set: BTreeSet<(usize, &[char])> = BTreeSet::new();
        for i in 0..=n {
            for j in i..=n {
                set.insert((j - i, &word[i..j]));
            }
        }
        let mut factors = Vec::with_capacity(set.len());
        let mut index = HashMap::with_capacity(set.len());
        let mut length_start = vec![0; n + 2];
        let mut current_len = 0;
        for (len, f) in set {
            while current_len < len {
                current_len += 1;
                length_start[current_len] = factors.len() as FactorId;
            }
            let boxed: Box<[char]> = f.into();
            index.insert(boxed.clone(), factors.len() as FactorId);
            factors.push(boxed);
        }
        length_start[n + 1] = factors.len() as FactorId;
        FactorTable { word, factors, index, length_start }
    }

    /// The input word as characters.
    pub fn word(&self) -> &[char] {
        &self.word
    }

    /// The input word as a string.
    pub fn word_string(&self) -> String {
        self.word.iter().collect()
    }

    /// Number of distinct factors.
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    /// Always false: ε is present in every table.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Id of ε.
    pub fn epsilon(&self) -> FactorId {
        0
    }

    /// Id of the whole word (the universe value).
    pub fn universe(&self) -> FactorId {
        (self.factors.len() - 1) as FactorId
    }

    /// Characters of factor `id`.
    pub fn get(&self, id: FactorId) -> &[char] {
        &self.factors[id as usize]
    }

    /// Length of factor `id`.
    pub fn factor_len(&self, id: FactorId) -> usize {
        self.factors[id as usize].len()
    }

    /// Factor `id` as a string.
    pub fn text(&self, id: FactorId) -> String {
        self.get(id).iter().collect()
    }

    /// Id of `s` if it is a factor.
    pub fn id_of(&self, s: &[char]) -> Option<FactorId> {
        self.index.get(s).copied()
    }

    /// Id of the string `s` if it is a factor.
    pub fn id_of_str(&self, s: &str) -> Option<FactorId> {
        let chars: Vec<char> = s.chars().collect();
        self.id_of(&chars)
    }

    /// All ids.
    pub fn ids(&self) -> impl Iterator<Item = FactorId> {
        0..self.factors.len() as FactorId
    }

    /// Ids of all factors whose length lies in `min..=max` (clamped).
    pub fn ids_with_len(&self, min: usize, max: usize) -> std::ops::Range<FactorId> {
        let n = self.word.len();
        if min > n || min > max {
            return 0..0;
        }
        let max = max.min(n);
        self.length_start[min]..self.length_start[max + 1]
    }
}

/// Convenience wrapper matching the operation name used in the docs.
pub fn intern_factors(w: &str, alphabet: &Alphabet) -> Result<FactorTable> {
    FactorTable::intern(w, alphabet)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(['a', 'b']).unwrap()
    }

    #[test]
    fn factors_of_ab() {
        let t = intern_factors("ab", &ab()).unwrap();
        let all: Vec<String> = t.ids().map(|i| t.text(i)).collect();
        assert_eq!(all, vec!["", "a", "b", "ab"]);
        assert_eq!(t.universe(), 3);
    }

    #[test]
    fn unary_and_mixed_counts() {
        assert_eq!(intern_factors("aaa", &ab()).unwrap().len(), 4);
        let t = intern_factors("aba", &ab()).unwrap();
        assert_eq!(t.len(), 6);
        assert_eq!(t.ids_with_len(2, 2).map(|i| t.text(i)).collect::<Vec<_>>(), vec!["ab", "ba"]);
    }

    #[test]
    fn empty_word_has_only_epsilon() {
        let t = intern_factors("", &ab()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.universe(), t.epsilon());
    }

    #[test]
    fn rejects_foreign_symbol() {
        assert!(matches!(intern_factors("abc", &ab()), Err(Error::Input(_))));
    }

    #[test]
    fn factor_count_bounds() {
        for w in ab().words_up_to(10) {
            let n = w.chars().count();
            let t = intern_factors(&w, &ab()).unwrap();
            assert!(t.len() <= n * (n + 1) / 2 + 1);
            if w.chars().all(|c| c == 'a') {
                assert_eq!(t.len(), n + 1);
            }
        }
    }
}
