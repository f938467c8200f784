//! Words over named generators.
//!
//! A [`Word`] is a sequence of `(generator, exponent)` letters in which
//! adjacent letters never share a generator. Words carry no group structure;
//! the oracles in [`crate::group`] and the splittings in
//! [`crate::splitting`] give them meaning.
//!
//! The text form is a whitespace separated list of `gen^exp` tokens, for
//! example `"a b^-1 a^2"`. The identity is written `1` (the empty string is
//! accepted too).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A named generator together with the index of the base group it belongs
/// to (0 or 1 for the two factors of a splitting, 2 for edge generators).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub name: String,
    pub group_id: usize,
}

impl Generator {
    pub fn new(name: &str, group_id: usize) -> Result<Self> {
        if !is_valid_name(name) {
            return Err(Error::InvalidGeneratorName(name.to_string()));
        }
        Ok(Generator {
            name: name.to_string(),
            group_id,
        })
    }
}

/// `[A-Za-z][A-Za-z0-9_]*`
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: String,
    pub exp: BigInt,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn letter(gen: &str, exp: impl Into<BigInt>) -> Self {
        let mut w = Word::identity();
        w.push(gen, exp.into());
        w
    }

    pub fn from_letters<I, S>(letters: I) -> Self
    where
        I: IntoIterator<Item = (S, BigInt)>,
        S: AsRef<str>,
    {
        let mut w = Word::identity();
        for (g, e) in letters {
            w.push(g.as_ref(), e);
        }
        w
    }

    /// Appends a letter, merging with the last letter when the generator
    /// repeats so that the no-adjacent-repeats invariant is preserved.
    pub fn push(&mut self, gen: &str, exp: BigInt) {
        if exp.is_zero() {
            return;
        }
        if let Some(last) = self.letters.last_mut() {
            if last.gen == gen {
                last.exp += exp;
                if last.exp.is_zero() {
                    self.letters.pop();
                }
                return;
            }
        }
        self.letters.push(Letter {
            gen: gen.to_string(),
            exp,
        });
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of letters after expanding exponents, i.e. the sum of
    /// `|exp|`.
    pub fn length(&self) -> BigInt {
        self.letters.iter().map(|l| l.exp.abs()).sum()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for l in &other.letters {
            w.push(&l.gen, l.exp.clone());
        }
        w
    }

    pub fn inverse(&self) -> Word {
        let mut w = Word::identity();
        for l in self.letters.iter().rev() {
            w.push(&l.gen, -l.exp.clone());
        }
        w
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut w = Word::identity();
        for _ in 0..n.unsigned_abs() {
            w = w.concat(&base);
        }
        w
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if l.exp.is_one() {
                write!(f, "{}", l.gen)?;
            } else {
                write!(f, "{}^{}", l.gen, l.exp)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut w = Word::identity();
        for tok in s.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (gen, exp) = match tok.split_once('^') {
                Some((g, e)) => {
                    let e: BigInt = e.parse().map_err(|_| Error::WordSyntax(tok.to_string()))?;
                    (g, e)
                }
                None => (tok, BigInt::one()),
            };
            if !is_valid_name(gen) {
                return Err(Error::WordSyntax(tok.to_string()));
            }
            w.push(gen, exp);
        }
        Ok(w)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let w: Word = "a b^-1 a^2".parse().unwrap();
        assert_eq!(w.letters().len(), 3);
        assert_eq!(w.to_string(), "a b^-1 a^2");
        assert_eq!("".parse::<Word>().unwrap(), Word::identity());
        assert_eq!("1".parse::<Word>().unwrap().to_string(), "1");
    }

    #[test]
    fn adjacent_letters_merge() {
        let w: Word = "a a^2 b b^-1 c".parse().unwrap();
        assert_eq!(w.to_string(), "a^3 c");
        let w: Word = "x x^-1".parse().unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn rejects_bad_tokens() {
        assert!("2a".parse::<Word>().is_err());
        assert!("a^x".parse::<Word>().is_err());
        assert!(Generator::new("_a", 0).is_err());
        assert!(Generator::new("a_1", 0).is_ok());
    }

    #[test]
    fn inverse_and_length() {
        let w: Word = "a b^-2".parse().unwrap();
        assert_eq!(w.inverse().to_string(), "b^2 a^-1");
        assert_eq!(w.length(), BigInt::from(3));
        assert!(w.concat(&w.inverse()).is_empty());
        assert_eq!(w.pow(2).to_string(), "a b^-2 a b^-2");
    }
}
