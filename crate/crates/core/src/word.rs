//! Free-group words over the alphabet `a, A, b, B, …`.
//!
//! Generator `i` is written as the `i`-th lowercase letter and its inverse as
//! the matching uppercase letter. Letters are ordered `a < A < b < B < …`,
//! and words are compared in shortlex order (length first, then
//! lexicographically). Every [`Word`] is freely reduced; the empty word is the
//! identity and prints as `1`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported rank: one lowercase letter per generator.
pub const MAX_RANK: usize = 26;

/// A generator or inverse generator. Encoded as `2·i` for `x_i` and `2·i + 1`
/// for `x_i⁻¹`, so the derived order is `a < A < b < B < …`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Letter {
        debug_assert!(generator < MAX_RANK);
        Letter((2 * generator + inverse as usize) as u8)
    }

    pub fn from_code(code: usize) -> Letter {
        debug_assert!(code < 2 * MAX_RANK);
        Letter(code as u8)
    }

    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    /// Parses a letter without checking it against a rank.
    pub fn from_char(c: char) -> Option<Letter> {
        if c.is_ascii_lowercase() {
            Some(Letter::new((c as u8 - b'a') as usize, false))
        } else if c.is_ascii_uppercase() {
            Some(Letter::new((c as u8 - b'A') as usize, true))
        } else {
            None
        }
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.generator() as u8) as char
    }

    /// All `2·rank` letters in alphabet order.
    pub fn alphabet(rank: usize) -> impl Iterator<Item = Letter> + Clone {
        (0..2 * rank).map(Letter::from_code)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A freely reduced word, i.e. an element of the free group and a vertex of
/// its Cayley tree.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

/// Freely reduces an arbitrary letter sequence.
pub fn reduce<I: IntoIterator<Item = Letter>>(raw: I) -> Word {
    let mut w = Word::identity();
    for l in raw {
        w.push(l);
    }
    w
}

impl Word {
    pub fn identity() -> Word {
        Word { letters: Vec::new() }
    }

    pub fn letter(l: Letter) -> Word {
        Word { letters: vec![l] }
    }

    /// Builds a word from letters that are already known to be reduced.
    pub(crate) fn from_reduced(letters: Vec<Letter>) -> Word {
        debug_assert!(letters.windows(2).all(|p| p[0] != p[1].inverse()));
        Word { letters }
    }

    /// Parses a word and validates each letter against `rank`. `1` and the
    /// empty string denote the identity. The result is freely reduced.
    pub fn parse(text: &str, rank: usize) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() || text == "1" {
            return Ok(Word::identity());
        }
        let mut w = Word::identity();
        for c in text.chars() {
            let l = Letter::from_char(c).ok_or(Error::UnknownLetter { letter: c, rank })?;
            if l.generator() >= rank {
                return Err(Error::UnknownLetter { letter: c, rank });
            }
            w.push(l);
        }
        Ok(w)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    /// Largest generator index used, plus one.
    pub fn min_rank(&self) -> usize {
        self.letters.iter().map(|l| l.generator() + 1).max().unwrap_or(0)
    }

    /// Appends a letter, cancelling against the last one if needed.
    pub fn push(&mut self, l: Letter) {
        if self.letters.last() == Some(&l.inverse()) {
            self.letters.pop();
        } else {
            self.letters.push(l);
        }
    }

    pub fn pop(&mut self) -> Option<Letter> {
        self.letters.pop()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let mut out = self.clone();
        for &l in &other.letters {
            out.push(l);
        }
        out
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 {
            self.inverse()
        } else {
            self.clone()
        };
        let mut out = Word::identity();
        for _ in 0..exponent.unsigned_abs() {
            out = out.multiply(&base);
        }
        out
    }

    /// Word-metric distance `|x⁻¹y|` in the Cayley tree.
    pub fn distance(&self, other: &Word) -> usize {
        let common = self.common_prefix_len(other);
        self.len() + other.len() - 2 * common
    }

    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.letters
            .iter()
            .zip(&other.letters)
            .take_while(|(a, b)| a == b)
            .count()
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.letters.starts_with(&self.letters)
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word {
            letters: self.letters[..n.min(self.len())].to_vec(),
        }
    }

    pub fn suffix_from(&self, n: usize) -> Word {
        Word {
            letters: self.letters[n.min(self.len())..].to_vec(),
        }
    }

    /// Whether the word is cyclically reduced (first and last letters are not
    /// mutually inverse).
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => self.len() == 1 || f != l.inverse(),
            _ => true,
        }
    }

    /// Splits `self = c · core · c⁻¹` with `core` cyclically reduced.
    pub fn cyclic_decomposition(&self) -> (Word, Word) {
        let n = self.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.letters[k] == self.letters[n - 1 - k].inverse() {
            k += 1;
        }
        (
            Word::from_reduced(self.letters[..k].to_vec()),
            Word::from_reduced(self.letters[k..n - k].to_vec()),
        )
    }

    /// The shortest `r` with `self = r^k` for some `k ≥ 1`. Only meaningful for
    /// cyclically reduced words.
    pub fn primitive_root(&self) -> Word {
        let n = self.len();
        for d in 1..=n {
            if n % d == 0 && (d..n).all(|i| self.letters[i] == self.letters[i - d]) {
                return Word::from_reduced(self.letters[..d].to_vec());
            }
        }
        self.clone()
    }

    /// Cyclic rotation moving the first `k` letters to the end. The word must
    /// be cyclically reduced for the result to be reduced.
    pub fn rotate_left(&self, k: usize) -> Word {
        let mut letters = self.letters.clone();
        if !letters.is_empty() {
            let k = k % letters.len();
            letters.rotate_left(k);
        }
        Word::from_reduced(letters)
    }

    pub fn concat_reduced(&self, other: &Word) -> Option<Word> {
        if let (Some(a), Some(b)) = (self.last(), other.first()) {
            if a == b.inverse() {
                return None;
            }
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Some(Word { letters })
    }
}

/// Gromov product `(x|y)_base = (d(base,x) + d(base,y) − d(x,y)) / 2`.
pub fn gromov_product(x: &Word, y: &Word, base: &Word) -> Rational64 {
    let dx = base.distance(x) as i64;
    let dy = base.distance(y) as i64;
    let dxy = x.distance(y) as i64;
    Rational64::new(dx + dy - dxy, 2)
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses without a rank bound; use [`Word::parse`] to validate letters.
    fn from_str(s: &str) -> Result<Word> {
        Word::parse(s, MAX_RANK)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Word, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of reduced words of length exactly `k`.
pub fn sphere_size(rank: usize, k: usize) -> u128 {
    if k == 0 {
        1
    } else {
        2 * rank as u128 * (2 * rank as u128 - 1).pow(k as u32 - 1)
    }
}

/// Number of reduced words of length at most `radius`.
pub fn ball_size(rank: usize, radius: usize) -> u128 {
    (0..=radius).map(|k| sphere_size(rank, k)).sum()
}

/// Position of a reduced word among all reduced words of the same length, in
/// lexicographic order. Used to index cylinders.
pub fn cylinder_index(rank: usize, w: &Word) -> usize {
    let mut idx = 0usize;
    let mut prev: Option<Letter> = None;
    for &l in w.letters() {
        match prev {
            None => idx = l.code(),
            Some(p) => {
                let skip = p.inverse().code();
                let digit = if l.code() > skip { l.code() - 1 } else { l.code() };
                idx = idx * (2 * rank - 1) + digit;
            }
        }
        prev = Some(l);
    }
    idx
}

/// Inverse of [`cylinder_index`].
pub fn cylinder_at(rank: usize, n: usize, mut idx: usize) -> Word {
    if n == 0 {
        return Word::identity();
    }
    let mut digits = vec![0usize; n];
    for d in (1..n).rev() {
        digits[d] = idx % (2 * rank - 1);
        idx /= 2 * rank - 1;
    }
    digits[0] = idx;
    let mut letters = Vec::with_capacity(n);
    let mut prev: Option<Letter> = None;
    for (i, &d) in digits.iter().enumerate() {
        let l = if i == 0 {
            Letter::from_code(d)
        } else {
            let skip = prev.unwrap().inverse().code();
            Letter::from_code(if d >= skip { d + 1 } else { d })
        };
        letters.push(l);
        prev = Some(l);
    }
    Word::from_reduced(letters)
}

/// All reduced words of length exactly `n`, in lexicographic order.
pub fn words_of_length(rank: usize, n: usize) -> impl Iterator<Item = Word> {
    let count = sphere_size(rank, n) as usize;
    (0..count).map(move |i| cylinder_at(rank, n, i))
}

/// All reduced words of length at most `radius`, in shortlex order.
pub fn words_up_to(rank: usize, radius: usize) -> impl Iterator<Item = Word> {
    (0..=radius).flat_map(move |n| words_of_length(rank, n))
}

/// Reduced one-letter extensions of `w`, in alphabet order.
pub fn extensions(rank: usize, w: &Word) -> impl Iterator<Item = Word> + '_ {
    Letter::alphabet(rank)
        .filter(move |&l| w.last() != Some(l.inverse()))
        .map(move |l| {
            let mut next = w.clone();
            next.letters.push(l);
            next
        })
}
