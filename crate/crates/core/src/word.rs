//! Finite words over the digits `{0, 1, 2}`.
//!
//! Words are the node currency of every tree in this crate. Prefix order is
//! the tree order, the meet of two words is their longest common prefix, and
//! the derived `Ord` is the lexicographic order with `0 < 1 < 2` in which a
//! proper prefix precedes its extensions.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// A finite sequence of ternary digits.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TernaryWord(Vec<u8>);

impl TernaryWord {
    pub fn empty() -> Self {
        TernaryWord(Vec::new())
    }

    /// Builds a word, rejecting digits outside `{0, 1, 2}`.
    pub fn from_digits(digits: &[u8]) -> Result<Self, Error> {
        if let Some(&d) = digits.iter().find(|&&d| d > 2) {
            return Err(Error::InvalidDigit(d));
        }
        Ok(TernaryWord(digits.to_vec()))
    }

    pub(crate) fn from_vec_unchecked(digits: Vec<u8>) -> Self {
        debug_assert!(digits.iter().all(|&d| d <= 2));
        TernaryWord(digits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    /// Digit at position `i`, if the word is long enough.
    pub fn digit(&self, i: usize) -> Option<u8> {
        self.0.get(i).copied()
    }

    /// `self ⊆ other` in the tree order (non-strict).
    pub fn is_prefix_of(&self, other: &TernaryWord) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn is_comparable(&self, other: &TernaryWord) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Restriction `self ↾ len`; words shorter than `len` are returned whole.
    pub fn restrict(&self, len: usize) -> TernaryWord {
        TernaryWord(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn child(&self, digit: u8) -> TernaryWord {
        assert!(digit <= 2, "digit {digit} out of range");
        let mut v = self.0.clone();
        v.push(digit);
        TernaryWord(v)
    }

    pub fn push(&mut self, digit: u8) {
        assert!(digit <= 2, "digit {digit} out of range");
        self.0.push(digit);
    }

    pub fn parent(&self) -> Option<TernaryWord> {
        if self.0.is_empty() {
            None
        } else {
            Some(TernaryWord(self.0[..self.0.len() - 1].to_vec()))
        }
    }
}

/// Longest common prefix.
pub fn meet(s: &TernaryWord, t: &TernaryWord) -> TernaryWord {
    let k = s.0.iter().zip(&t.0).take_while(|(a, b)| a == b).count();
    TernaryWord(s.0[..k].to_vec())
}

/// Length of the longest common prefix without allocating.
pub fn meet_len(s: &TernaryWord, t: &TernaryWord) -> usize {
    s.0.iter().zip(&t.0).take_while(|(a, b)| a == b).count()
}

impl fmt::Display for TernaryWord {
    /// The empty word prints as `-`, others as their digit string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("-");
        }
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TernaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{self}>")
    }
}

impl FromStr for TernaryWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "-" {
            return Ok(TernaryWord::empty());
        }
        if s.is_empty() {
            return Err(Error::InvalidWord(s.to_string()));
        }
        let mut v = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => v.push(0),
                '1' => v.push(1),
                '2' => v.push(2),
                _ => return Err(Error::InvalidWord(s.to_string())),
            }
        }
        Ok(TernaryWord(v))
    }
}

/// Shorthand for literals in tests and catalogs: `w("0,1")`-style is avoided in
/// favour of plain digit strings, `word("01")`.
pub fn word(s: &str) -> TernaryWord {
    s.parse().expect("literal ternary word")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_word() -> impl Strategy<Value = TernaryWord> {
        proptest::collection::vec(0u8..3, 0..12).prop_map(TernaryWord)
    }

    #[test]
    fn meet_examples() {
        assert_eq!(meet(&word("012"), &word("020")), word("0"));
        assert_eq!(meet(&word("012"), &word("012")), word("012"));
        assert_eq!(meet(&word("1"), &word("2")), TernaryWord::empty());
    }

    #[test]
    fn lex_order_digits_and_prefixes() {
        assert!(word("0") < word("1"));
        assert!(word("1") < word("2"));
        assert!(word("0") < word("00"));
        assert!(word("02") < word("1"));
    }

    #[test]
    fn display_roundtrip_empty() {
        assert_eq!(TernaryWord::empty().to_string(), "-");
        assert_eq!("-".parse::<TernaryWord>().unwrap(), TernaryWord::empty());
        assert!("".parse::<TernaryWord>().is_err());
        assert!("013".parse::<TernaryWord>().is_err());
    }

    #[test]
    fn rejects_bad_digits() {
        assert!(TernaryWord::from_digits(&[0, 3]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn meet_symmetric(s in arb_word(), t in arb_word()) {
            prop_assert_eq!(meet(&s, &t), meet(&t, &s));
        }

        #[test]
        fn meet_idempotent(s in arb_word()) {
            prop_assert_eq!(meet(&s, &s), s);
        }

        #[test]
        fn meet_associative(a in arb_word(), b in arb_word(), c in arb_word()) {
            prop_assert_eq!(meet(&meet(&a, &b), &c), meet(&a, &meet(&b, &c)));
        }

        #[test]
        fn meet_is_common_prefix(s in arb_word(), t in arb_word()) {
            let m = meet(&s, &t);
            prop_assert!(m.is_prefix_of(&s) && m.is_prefix_of(&t));
            prop_assert_eq!(m.len(), meet_len(&s, &t));
        }

        #[test]
        fn parse_display_roundtrip(s in arb_word()) {
            prop_assert_eq!(s.to_string().parse::<TernaryWord>().unwrap(), s);
        }
    }
}
