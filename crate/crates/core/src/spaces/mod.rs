//! Horizontal model spaces: weighted Cayley trees of `F_m` and the diamond
//! complex, with exact orbit distances `d(y₀, w·y₀)`.

mod oracle;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::QuadExt;
use crate::freegroup::Word;

pub use oracle::{diamond_distance_oracle, ORACLE_MAX_LENGTH};

/// Cayley tree of `F_m` where edges labelled by generator `g` have length
/// `edge_lengths[g - 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSpace {
    pub edge_lengths: Vec<QuadExt>,
}

impl TreeSpace {
    pub fn new(edge_lengths: Vec<QuadExt>) -> Result<TreeSpace> {
        let space = TreeSpace { edge_lengths };
        space.validate()?;
        Ok(space)
    }

    /// All edges of length 1.
    pub fn unit(m: usize) -> TreeSpace {
        TreeSpace {
            edge_lengths: vec![QuadExt::one(); m],
        }
    }

    pub fn m(&self) -> usize {
        self.edge_lengths.len()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.edge_lengths.is_empty() {
            return Err(Error::InvalidAction(
                "tree needs at least one generator".into(),
            ));
        }
        if let Some(i) = self.edge_lengths.iter().position(|l| !l.is_positive()) {
            return Err(Error::InvalidAction(format!(
                "edge length for generator {} must be positive",
                i + 1
            )));
        }
        Ok(())
    }
}

/// Universal cover of two diamonds' worth of loops: a square of diagonal 2
/// with opposite vertices glued, so that `a` and `b` are loops of length 2
/// through the center.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiamondSpace;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Horizontal {
    Tree(TreeSpace),
    Diamond,
}

impl Horizontal {
    pub fn generators(&self) -> usize {
        match self {
            Horizontal::Tree(t) => t.m(),
            Horizontal::Diamond => 2,
        }
    }

    pub fn distance(&self, w: &Word) -> Result<QuadExt> {
        match self {
            Horizontal::Tree(t) => tree_distance(t, w),
            Horizontal::Diamond => diamond_distance(w),
        }
    }

    /// Largest displacement contributed by a single letter.
    pub fn max_letter_length(&self) -> QuadExt {
        match self {
            Horizontal::Tree(t) => t.edge_lengths.iter().max().cloned().unwrap_or_default(),
            Horizontal::Diamond => QuadExt::from_integer(2),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            Horizontal::Tree(t) => t.validate(),
            Horizontal::Diamond => Ok(()),
        }
    }
}

fn check_generators(w: &Word, m: usize) -> Result<()> {
    let g = w.max_generator();
    if g > m {
        return Err(Error::LetterOutOfRange {
            letter: g as i64,
            generators: m,
        });
    }
    Ok(())
}

/// Weighted word length.
pub fn tree_distance(space: &TreeSpace, w: &Word) -> Result<QuadExt> {
    check_generators(w, space.m())?;
    Ok((1..=space.m())
        .map(|g| space.edge_lengths[g - 1].scale(&BigInt::from(w.occurrences(g))))
        .sum())
}

/// `2 + 2·(same-generator adjacent pairs) + √2·(mixed adjacent pairs)` for a
/// nonempty word, `0` for the identity.
pub fn diamond_distance(w: &Word) -> Result<QuadExt> {
    check_generators(w, 2)?;
    if w.is_empty() {
        return Ok(QuadExt::zero());
    }
    let (same, cross) = w.adjacent_pairs();
    let a = BigInt::from(2) + BigInt::from(2) * BigInt::from(same.clone());
    let b = BigInt::from(cross.clone());
    Ok(QuadExt::from_bigint(a) + QuadExt::sqrt2().scale(&b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freegroup::Letter;

    fn w(s: &str) -> Word {
        Word::from_letters(s.chars().map(|c| Letter::from_char(c).unwrap()))
    }

    fn q(s: &str) -> QuadExt {
        s.parse().unwrap()
    }

    #[test]
    fn tree_examples() {
        let unit = TreeSpace::unit(2);
        assert_eq!(tree_distance(&unit, &w("aaaaa")).unwrap(), q("5"));
        let stretched = TreeSpace::new(vec![q("1"), q("2")]).unwrap();
        let x = w("aaa").concat(&w("b").pow(&BigInt::from(9)));
        assert_eq!(tree_distance(&stretched, &x).unwrap(), q("21"));
        assert_eq!(tree_distance(&stretched, &Word::empty()).unwrap(), q("0"));
        assert!(tree_distance(&unit, &w("c")).is_err());
        assert!(TreeSpace::new(vec![q("1"), q("-1 + 1 r2")]).is_ok());
        assert!(TreeSpace::new(vec![q("1"), q("1 - 1 r2")]).is_err());
    }

    #[test]
    fn diamond_examples() {
        let ab4 = w("ab").pow(&BigInt::from(4));
        assert_eq!(diamond_distance(&ab4).unwrap(), q("2 + 7 r2"));
        assert_eq!(diamond_distance(&w("aaa")).unwrap(), q("6"));
        assert_eq!(diamond_distance(&w("a")).unwrap(), q("2"));
        assert_eq!(diamond_distance(&w("aB")).unwrap(), q("2 + 1 r2"));
        assert_eq!(diamond_distance(&Word::empty()).unwrap(), q("0"));
        assert!(diamond_distance(&w("c")).is_err());
    }

    #[test]
    fn horizontal_json() {
        let h: Horizontal =
            serde_json::from_str(r#"{"type":"tree","edge_lengths":["1","2"]}"#).unwrap();
        assert_eq!(h.generators(), 2);
        let d: Horizontal = serde_json::from_str(r#"{"type":"diamond"}"#).unwrap();
        assert_eq!(d, Horizontal::Diamond);
        assert_eq!(serde_json::to_string(&d).unwrap(), r#"{"type":"diamond"}"#);
    }
}
