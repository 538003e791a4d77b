//! Free groups, the ambient group `F_m × Z^d`, and their elements.

mod cursor;
mod word;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use word::Word;

/// Largest number of generators addressable by the letter alphabet.
pub const MAX_GENERATORS: usize = 26;

/// A generator or its inverse: `+g` or `-g` for `g ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter(i32);

impl Letter {
    pub fn new(index: i32) -> Option<Letter> {
        (index != 0 && index.unsigned_abs() as usize <= MAX_GENERATORS).then_some(Letter(index))
    }

    pub fn gen(g: usize) -> Letter {
        Letter(g as i32)
    }

    pub fn index(self) -> i32 {
        self.0
    }

    pub fn generator(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn sign(self) -> i32 {
        self.0.signum()
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a'..='z' => Some(Letter(c as i32 - 'a' as i32 + 1)),
            'A'..='Z' => Some(Letter(-(c as i32 - 'A' as i32 + 1))),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        let base = if self.0 > 0 { b'a' } else { b'A' };
        (base + (self.generator() - 1) as u8) as char
    }

    /// Position in the order `a, A, b, B, …` used for shortlex enumeration.
    pub fn shortlex_key(self) -> usize {
        2 * (self.generator() - 1) + usize::from(self.0 < 0)
    }

    /// All letters over `m` generators in shortlex order.
    pub fn alphabet(m: usize) -> Vec<Letter> {
        (1..=m as i32)
            .flat_map(|g| [Letter(g), Letter(-g)])
            .collect()
    }
}

/// The group `F_m × Z^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ambient {
    pub m: usize,
    pub d: usize,
}

impl Ambient {
    pub fn new(m: usize, d: usize) -> Result<Ambient> {
        if m == 0 || m + d > MAX_GENERATORS {
            return Err(Error::InvalidArgument(format!(
                "ambient group needs 1 ≤ m and m + d ≤ {MAX_GENERATORS}, got m = {m}, d = {d}"
            )));
        }
        Ok(Ambient { m, d })
    }

    fn check(&self, other: &Ambient) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AmbientMismatch {
                m1: self.m,
                d1: self.d,
                m2: other.m,
                d2: other.d,
            })
        }
    }
}

/// Freely reduces a sequence of signed generator indices in `F_m`.
pub fn reduce(letters: &[i64], m: usize) -> Result<Word> {
    let mut out = Vec::with_capacity(letters.len());
    for &x in letters {
        if x == 0 || x.unsigned_abs() as usize > m {
            return Err(Error::LetterOutOfRange {
                letter: x,
                generators: m,
            });
        }
        out.push(Letter(x as i32));
    }
    Ok(Word::from_letters(out))
}

/// True iff `w` is nonempty and does not end in the inverse of its first
/// letter, i.e. `|w²| = 2|w|`.
pub fn is_straight(w: &Word) -> bool {
    match (w.first(), w.last()) {
        (Some(f), Some(l)) => l != f.inverse(),
        _ => false,
    }
}

/// Returns `w` if straight, otherwise `w` followed by the least-index
/// generator distinct from the generator of the first letter.
pub fn straighten(w: &Word, m: usize) -> Result<Word> {
    if is_straight(w) {
        return Ok(w.clone());
    }
    if m < 2 {
        return Err(Error::RequiresTwoGenerators);
    }
    let Some(first) = w.first() else {
        return Ok(Word::letter(Letter(1)));
    };
    let eps = if first.generator() == 1 { 2 } else { 1 };
    Ok(w.concat(&Word::letter(Letter(eps))))
}

pub fn common_prefix_length(w1: &Word, w2: &Word) -> BigUint {
    w1.common_prefix_length(w2)
}

/// An element `⟨w, z⟩` of `F_m × Z^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    ambient: Ambient,
    word: Word,
    z: Vec<BigInt>,
}

impl GroupElement {
    pub fn new(ambient: Ambient, word: Word, z: Vec<BigInt>) -> Result<GroupElement> {
        let g = word.max_generator();
        if g > ambient.m {
            return Err(Error::LetterOutOfRange {
                letter: g as i64,
                generators: ambient.m,
            });
        }
        if z.len() != ambient.d {
            return Err(Error::InvalidArgument(format!(
                "abelian part has {} coordinates, expected {}",
                z.len(),
                ambient.d
            )));
        }
        Ok(GroupElement { ambient, word, z })
    }

    pub fn identity(ambient: Ambient) -> GroupElement {
        GroupElement {
            ambient,
            word: Word::empty(),
            z: vec![BigInt::zero(); ambient.d],
        }
    }

    pub fn from_word(ambient: Ambient, word: Word) -> Result<GroupElement> {
        GroupElement::new(ambient, word, vec![BigInt::zero(); ambient.d])
    }

    /// The `j`-th generator of `Z^d` (`j` starting at 0).
    pub fn z_generator(ambient: Ambient, j: usize) -> GroupElement {
        let mut z = vec![BigInt::zero(); ambient.d];
        z[j] = BigInt::from(1);
        GroupElement {
            ambient,
            word: Word::empty(),
            z,
        }
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn z(&self) -> &[BigInt] {
        &self.z
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty() && self.z.iter().all(Zero::is_zero)
    }

    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        self.ambient.check(&other.ambient)?;
        Ok(GroupElement {
            ambient: self.ambient,
            word: self.word.concat(&other.word),
            z: self.z.iter().zip(&other.z).map(|(x, y)| x + y).collect(),
        })
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            ambient: self.ambient,
            word: self.word.inverse(),
            z: self.z.iter().map(|x| -x).collect(),
        }
    }

    pub fn pow(&self, k: &BigInt) -> GroupElement {
        GroupElement {
            ambient: self.ambient,
            word: self.word.pow(k),
            z: self.z.iter().map(|x| x * k).collect(),
        }
    }

    /// Same abelian part, different word.
    pub fn with_word(&self, word: Word) -> GroupElement {
        GroupElement {
            ambient: self.ambient,
            word,
            z: self.z.clone(),
        }
    }

    /// `|z|₁`.
    pub fn z_norm1(&self) -> BigInt {
        self.z.iter().map(|x| x.abs()).sum()
    }
}

impl fmt::Display for GroupElement {
    /// Written in the family syntax: the word, then `Z^d` generators as the
    /// letters following the free generators.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.word.is_empty() {
            parts.push(self.word.to_string());
        }
        for (j, c) in self.z.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let letter = Letter((self.ambient.m + j + 1) as i32);
            let letter = if c.is_negative() {
                letter.inverse()
            } else {
                letter
            };
            let k = c.magnitude();
            if k == &BigUint::from(1u32) {
                parts.push(letter.to_char().to_string());
            } else {
                parts.push(format!("{}^{}", letter.to_char(), k));
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join(" "))
        }
    }
}

/// Reduced words of length `len` over `m` generators, in lexicographic
/// order for the alphabet order `a, A, b, B, …`.
pub fn words_of_length(m: usize, len: usize) -> Vec<Vec<Letter>> {
    let alphabet = Letter::alphabet(m);
    let mut level: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(level.len() * (2 * m).saturating_sub(1).max(1));
        for w in &level {
            for &l in &alphabet {
                if w.last() == Some(&l.inverse()) {
                    continue;
                }
                let mut v = Vec::with_capacity(len);
                v.extend_from_slice(w);
                v.push(l);
                next.push(v);
            }
        }
        level = next;
    }
    level
}

/// Reduced words of length at most `radius`, in shortlex order.
pub fn ball_words(m: usize, radius: usize) -> Vec<Vec<Letter>> {
    (0..=radius).flat_map(|l| words_of_length(m, l)).collect()
}

/// Number of reduced words of length at most `radius` over `m` generators.
pub fn ball_size(m: usize, radius: usize) -> u128 {
    let mut total: u128 = 1;
    let mut sphere: u128 = 2 * m as u128;
    for _ in 1..=radius {
        total = total.saturating_add(sphere);
        sphere = sphere.saturating_mul((2 * m - 1) as u128);
    }
    total
}

/// Integer vectors of dimension `d` with `|z|₁ ≤ k`, in lexicographic order.
pub fn lattice_ball(d: usize, k: usize) -> Vec<Vec<i64>> {
    fn go(d: usize, budget: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == d {
            out.push(prefix.clone());
            return;
        }
        for x in -budget..=budget {
            prefix.push(x);
            go(d, budget - x.abs(), prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(d, k as i64, &mut Vec::with_capacity(d), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::from_letters(s.chars().map(|c| Letter::from_char(c).unwrap()))
    }

    fn big(k: i64) -> BigInt {
        BigInt::from(k)
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&[1, -1, 2], 2).unwrap(), w("b"));
        assert_eq!(reduce(&[1, 2, -2, 1], 2).unwrap(), w("aa"));
        assert!(reduce(&[], 2).unwrap().is_empty());
        assert!(matches!(
            reduce(&[3], 2),
            Err(Error::LetterOutOfRange { letter: 3, .. })
        ));
    }

    #[test]
    fn compose_examples() {
        let amb = Ambient::new(2, 1).unwrap();
        let g = GroupElement::new(amb, w("a"), vec![big(1)]).unwrap();
        let h = GroupElement::new(amb, w("A"), vec![big(2)]).unwrap();
        let gh = g.compose(&h).unwrap();
        assert!(gh.word().is_empty());
        assert_eq!(gh.z(), &[big(3)]);

        let amb0 = Ambient::new(2, 0).unwrap();
        let g = GroupElement::from_word(amb0, w("ab")).unwrap();
        let h = GroupElement::from_word(amb0, w("Ba")).unwrap();
        assert_eq!(g.compose(&h).unwrap().word(), &w("aa"));

        let a = GroupElement::new(amb, w("a"), vec![big(0)]).unwrap();
        let mut acc = GroupElement::identity(amb);
        for _ in 0..5 {
            acc = acc.compose(&a).unwrap();
        }
        assert_eq!(acc.word(), &w("aaaaa"));

        let other = GroupElement::identity(Ambient::new(3, 0).unwrap());
        assert!(matches!(
            a.compose(&other),
            Err(Error::AmbientMismatch { .. })
        ));
    }

    #[test]
    fn straightness() {
        assert!(is_straight(&w("ab")));
        assert!(!is_straight(&w("abA")));
        assert!(!is_straight(&Word::empty()));
        assert!(is_straight(&w("a")));
        for k in 2..=4 {
            assert!(is_straight(&w("ab").pow(&big(k))));
            assert!(is_straight(&w("aab").pow(&big(k))));
        }
    }

    #[test]
    fn straighten_examples() {
        assert_eq!(straighten(&w("abA"), 2).unwrap(), w("abAb"));
        assert_eq!(straighten(&w("ab"), 2).unwrap(), w("ab"));
        assert_eq!(straighten(&Word::empty(), 2).unwrap(), w("a"));
        assert_eq!(straighten(&w("bab"), 2).unwrap(), w("bab"));
        assert_eq!(straighten(&w("baB"), 2).unwrap(), w("baBa"));
    }

    #[test]
    fn straighten_needs_two_generators() {
        assert!(straighten(&w("aaa"), 1).is_ok());
        assert_eq!(
            straighten(&Word::empty(), 1).unwrap_err().to_string(),
            "requires m ≥ 2"
        );
    }

    #[test]
    fn common_prefix_examples() {
        assert_eq!(
            common_prefix_length(&w("aaaaa"), &w("aaab")),
            BigUint::from(3u32)
        );
        assert_eq!(common_prefix_length(&w("ab"), &w("ba")), BigUint::zero());
        let n = 7;
        let an = w("a").pow(&big(n));
        let anbn2 = an.concat(&w("b").pow(&big(n * n)));
        assert_eq!(common_prefix_length(&an, &anbn2), BigUint::from(7u32));
    }

    #[test]
    fn compressed_powers() {
        let huge = BigInt::from(10u32).pow(30);
        let p = w("ab").pow(&huge);
        assert_eq!(
            p.len(),
            &(BigUint::from(2u32) * BigUint::from(10u32).pow(30))
        );
        assert_eq!(p.net_exponent(1), huge);
        let q = p.concat(&w("ab").pow(&-&huge));
        assert!(q.is_empty());
        let half = w("ab").pow(&(&huge / 2));
        assert_eq!(p.common_prefix_length(&half), half.len().clone());
        assert_eq!(p.to_string(), format!("(ab)^{huge}"));
    }

    #[test]
    fn pow_of_conjugate() {
        let u = w("abA");
        let cube = u.pow(&big(3));
        assert_eq!(cube, w("abbbA"));
        assert_eq!(u.pow(&big(-2)), w("aBBA"));
    }

    #[test]
    fn display_forms() {
        assert_eq!(w("aaabbbbbbbbb").to_string(), "a^3 b^9");
        assert_eq!(w("abaB").to_string(), "abaB");
        assert_eq!(Word::empty().to_string(), "1");
        let x = w("aa").concat(&w("ab").pow(&big(4)));
        assert_eq!(x.to_string(), "a^2 (ab)^4");
        assert_eq!(x, w("aaabababab"));
    }

    #[test]
    fn ball_enumeration() {
        assert_eq!(ball_words(2, 3).len() as u128, ball_size(2, 3));
        assert_eq!(ball_size(2, 2), 1 + 4 + 12);
        let words = ball_words(2, 1);
        let shown: Vec<String> = words
            .iter()
            .map(|v| v.iter().map(|l| l.to_char()).collect())
            .collect();
        assert_eq!(shown, ["", "a", "A", "b", "B"]);
        assert_eq!(
            lattice_ball(1, 2),
            vec![vec![-2], vec![-1], vec![0], vec![1], vec![2]]
        );
        assert_eq!(lattice_ball(2, 1).len(), 5);
    }

    #[test]
    fn element_display() {
        let amb = Ambient::new(2, 1).unwrap();
        let g = GroupElement::new(amb, w("aabbbb"), vec![big(4)]).unwrap();
        assert_eq!(g.to_string(), "a^2 b^4 c^4");
        let h = GroupElement::new(amb, Word::empty(), vec![big(-1)]).unwrap();
        assert_eq!(h.to_string(), "C");
        assert_eq!(GroupElement::identity(amb).to_string(), "1");
    }
}
