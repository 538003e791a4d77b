//! Reduced words stored as nested run-length blocks.
//!
//! A [`Word`] is a list of segments `body^count` where a body is either a
//! single letter or another word. The sequence families in this crate reach
//! lengths far beyond what fits in memory letter by letter (the averaging
//! construction raises words of length ~n² to powers ~n²), so every
//! statistic the metrics need is maintained per node: length, end letters,
//! per-generator occurrence and net exponent counts, and adjacent-pair
//! counts split by whether the two letters share a generator.
//!
//! Invariants on every stored word:
//! - each segment count is at least 1;
//! - a word body is nonempty, and cyclically reduced when its count exceeds 1;
//! - consecutive segments meet without cancellation.
//!
//! Together these make the expanded letter sequence freely reduced.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::cursor::Cursor;
use super::Letter;

#[derive(Clone, Debug)]
pub(crate) enum Body {
    Letter(Letter),
    Word(Arc<Word>),
}

#[derive(Clone, Debug)]
pub(crate) struct Segment {
    pub(crate) body: Body,
    pub(crate) count: BigUint,
}

#[derive(Clone, Debug, Default)]
struct Stats {
    len: BigUint,
    first: Option<Letter>,
    last: Option<Letter>,
    /// Letter occurrences per generator, index `g - 1`.
    occurrences: Vec<BigUint>,
    /// Net exponent sum per generator, index `g - 1`.
    net: Vec<BigInt>,
    same_pairs: BigUint,
    cross_pairs: BigUint,
}

/// A freely reduced word in the free group on generators `a, b, c, …`.
#[derive(Clone, Debug, Default)]
pub struct Word {
    segs: Vec<Segment>,
    stats: Stats,
}

impl Body {
    pub(crate) fn len(&self) -> BigUint {
        match self {
            Body::Letter(_) => BigUint::one(),
            Body::Word(w) => w.stats.len.clone(),
        }
    }

    fn inverse(&self) -> Body {
        match self {
            Body::Letter(l) => Body::Letter(l.inverse()),
            Body::Word(w) => Body::Word(Arc::new(w.inverse())),
        }
    }

    /// Structural equality; implies equality of the expanded letters.
    pub(crate) fn same_structure(&self, other: &Body) -> bool {
        match (self, other) {
            (Body::Letter(x), Body::Letter(y)) => x == y,
            (Body::Word(u), Body::Word(v)) => {
                Arc::ptr_eq(u, v)
                    || (u.segs.len() == v.segs.len()
                        && u.stats.len == v.stats.len
                        && u.segs
                            .iter()
                            .zip(&v.segs)
                            .all(|(s, t)| s.count == t.count && s.body.same_structure(&t.body)))
            }
            _ => false,
        }
    }
}

fn add_at<T: Clone + Zero + std::ops::AddAssign>(v: &mut Vec<T>, i: usize, x: T) {
    if v.len() <= i {
        v.resize(i + 1, T::zero());
    }
    v[i] += x;
}

fn pair_kind(x: Letter, y: Letter) -> bool {
    x.generator() == y.generator()
}

impl Stats {
    fn of_letter(l: Letter) -> Stats {
        let mut s = Stats {
            len: BigUint::one(),
            first: Some(l),
            last: Some(l),
            ..Stats::default()
        };
        let g = l.generator() - 1;
        add_at(&mut s.occurrences, g, BigUint::one());
        add_at(&mut s.net, g, BigInt::from(l.sign()));
        s
    }

    fn of_body(b: &Body) -> Stats {
        match b {
            Body::Letter(l) => Stats::of_letter(*l),
            Body::Word(w) => w.stats.clone(),
        }
    }

    fn of_segments(segs: &[Segment]) -> Stats {
        let mut out = Stats::default();
        for seg in segs {
            let body = Stats::of_body(&seg.body);
            let k = &seg.count;
            let ki = BigInt::from(k.clone());
            if let (Some(prev), Some(first)) = (out.last, body.first) {
                out.bump_pair(prev, first, &BigUint::one());
            }
            out.len += &body.len * k;
            for (g, c) in body.occurrences.iter().enumerate() {
                add_at(&mut out.occurrences, g, c * k);
            }
            for (g, c) in body.net.iter().enumerate() {
                add_at(&mut out.net, g, c * &ki);
            }
            out.same_pairs += &body.same_pairs * k;
            out.cross_pairs += &body.cross_pairs * k;
            if k > &BigUint::one() {
                let (l, f) = (body.last.unwrap(), body.first.unwrap());
                out.bump_pair(l, f, &(k - 1u32));
            }
            if out.first.is_none() {
                out.first = body.first;
            }
            out.last = body.last;
        }
        out
    }

    fn bump_pair(&mut self, x: Letter, y: Letter, k: &BigUint) {
        if pair_kind(x, y) {
            self.same_pairs += k;
        } else {
            self.cross_pairs += k;
        }
    }
}

impl Word {
    pub fn empty() -> Word {
        Word::default()
    }

    pub fn letter(l: Letter) -> Word {
        Word::from_segments(vec![Segment {
            body: Body::Letter(l),
            count: BigUint::one(),
        }])
    }

    /// Freely reduces a letter sequence.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        let segs = stack
            .into_iter()
            .map(|l| Segment {
                body: Body::Letter(l),
                count: BigUint::one(),
            })
            .collect();
        Word::from_segments(segs)
    }

    pub(crate) fn segments(&self) -> &[Segment] {
        &self.segs
    }

    /// Builds a word from segments that already satisfy the reduction
    /// invariants, flattening trivial nesting and merging equal neighbours.
    pub(crate) fn from_segments(segs: Vec<Segment>) -> Word {
        let mut out: Vec<Segment> = Vec::with_capacity(segs.len());
        let push = |seg: Segment, out: &mut Vec<Segment>| {
            if seg.count.is_zero() {
                return;
            }
            if let Some(prev) = out.last_mut() {
                if prev.body.same_structure(&seg.body) {
                    prev.count += seg.count;
                    return;
                }
            }
            out.push(seg);
        };
        for seg in segs {
            match &seg.body {
                Body::Word(w) if w.segs.is_empty() => {}
                Body::Word(w) if seg.count.is_one() => {
                    for inner in &w.segs {
                        push(inner.clone(), &mut out);
                    }
                }
                Body::Word(w) if w.segs.len() == 1 => {
                    let inner = &w.segs[0];
                    push(
                        Segment {
                            body: inner.body.clone(),
                            count: &inner.count * &seg.count,
                        },
                        &mut out,
                    );
                }
                _ => push(seg, &mut out),
            }
        }
        let stats = Stats::of_segments(&out);
        Word { segs: out, stats }
    }

    pub fn len(&self) -> &BigUint {
        &self.stats.len
    }

    /// Length as `u64`, when it fits.
    pub fn len_u64(&self) -> Option<u64> {
        self.stats.len.to_u64()
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.stats.first
    }

    pub fn last(&self) -> Option<Letter> {
        self.stats.last
    }

    /// Largest generator index occurring in the word (0 for the empty word).
    pub fn max_generator(&self) -> usize {
        self.stats
            .occurrences
            .iter()
            .rposition(|c| !c.is_zero())
            .map_or(0, |i| i + 1)
    }

    /// Number of letters using generator `g` (either sign), `g ≥ 1`.
    pub fn occurrences(&self, g: usize) -> BigUint {
        self.stats
            .occurrences
            .get(g - 1)
            .cloned()
            .unwrap_or_default()
    }

    /// Exponent sum of generator `g`, `g ≥ 1`.
    pub fn net_exponent(&self, g: usize) -> BigInt {
        self.stats.net.get(g - 1).cloned().unwrap_or_default()
    }

    /// Counts of adjacent letter pairs `(same generator, different generators)`.
    pub fn adjacent_pairs(&self) -> (&BigUint, &BigUint) {
        (&self.stats.same_pairs, &self.stats.cross_pairs)
    }

    pub fn inverse(&self) -> Word {
        let segs = self
            .segs
            .iter()
            .rev()
            .map(|s| Segment {
                body: s.body.inverse(),
                count: s.count.clone(),
            })
            .collect();
        Word::from_segments(segs)
    }

    /// Splits off the first letter.
    pub fn split_first(&self) -> Option<(Letter, Word)> {
        let (head, rest) = self.segs.split_first()?;
        let mut segs = Vec::with_capacity(self.segs.len() + 2);
        let letter = match &head.body {
            Body::Letter(l) => {
                segs.push(Segment {
                    body: head.body.clone(),
                    count: &head.count - 1u32,
                });
                *l
            }
            Body::Word(w) => {
                let (l, tail) = w.split_first().expect("word bodies are nonempty");
                segs.extend(tail.segs);
                segs.push(Segment {
                    body: head.body.clone(),
                    count: &head.count - 1u32,
                });
                l
            }
        };
        segs.extend(rest.iter().cloned());
        Some((letter, Word::from_segments(segs)))
    }

    /// Splits off the last letter.
    pub fn split_last(&self) -> Option<(Word, Letter)> {
        let (tail, rest) = self.segs.split_last()?;
        let mut segs: Vec<Segment> = rest.to_vec();
        segs.push(Segment {
            body: tail.body.clone(),
            count: &tail.count - 1u32,
        });
        let letter = match &tail.body {
            Body::Letter(l) => *l,
            Body::Word(w) => {
                let (front, l) = w.split_last().expect("word bodies are nonempty");
                segs.extend(front.segs);
                l
            }
        };
        Some((Word::from_segments(segs), letter))
    }

    /// Product with free reduction at the junction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut left = self.clone();
        let mut right = other.clone();
        loop {
            match (left.last(), right.first()) {
                (Some(x), Some(y)) if x == y.inverse() => {}
                _ => break,
            }
            let ls = left.segs.last().unwrap();
            let rs = right.segs.first().unwrap();
            if bodies_inverse(&ls.body, &rs.body) {
                // Whole copies cancel at once.
                let k = (&ls.count).min(&rs.count).clone();
                let mut lsegs = left.segs.clone();
                lsegs.last_mut().unwrap().count -= &k;
                let mut rsegs = right.segs.clone();
                rsegs[0].count -= &k;
                left = Word::from_segments(lsegs);
                right = Word::from_segments(rsegs);
                continue;
            }
            left = left.split_last().unwrap().0;
            right = right.split_first().unwrap().1;
        }
        let mut segs = left.segs;
        segs.extend(right.segs);
        Word::from_segments(segs)
    }

    /// `self^k` for any integer `k`.
    pub fn pow(&self, k: &BigInt) -> Word {
        if k.is_zero() || self.is_empty() {
            return Word::empty();
        }
        if k.is_negative() {
            return self.inverse().pow(&-k);
        }
        let k = k.magnitude().clone();
        if self.is_cyclically_reduced() {
            return Word::from_segments(vec![Segment {
                body: Body::Word(Arc::new(self.clone())),
                count: k,
            }]);
        }
        // self = u · core · u⁻¹ with core cyclically reduced
        let mut conj = Vec::new();
        let mut core = self.clone();
        while !core.is_cyclically_reduced() {
            let (l, rest) = core.split_first().unwrap();
            conj.push(l);
            core = rest.split_last().unwrap().0;
        }
        let u = Word::from_letters(conj);
        let middle = Word::from_segments(vec![Segment {
            body: Body::Word(Arc::new(core)),
            count: k,
        }]);
        u.concat(&middle).concat(&u.inverse())
    }

    /// True for the empty word and for words whose last letter is not the
    /// inverse of the first.
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => self.stats.len.is_one() || l != f.inverse(),
            _ => true,
        }
    }

    /// The first `n` letters (the whole word if it is shorter).
    pub fn prefix(&self, n: &BigUint) -> Word {
        if n >= self.len() {
            return self.clone();
        }
        let mut rem = n.clone();
        let mut segs = Vec::new();
        for seg in &self.segs {
            if rem.is_zero() {
                break;
            }
            let body_len = seg.body.len();
            let total = &body_len * &seg.count;
            if rem >= total {
                rem -= &total;
                segs.push(seg.clone());
                continue;
            }
            let (q, r) = rem.div_rem(&body_len);
            if !q.is_zero() {
                segs.push(Segment {
                    body: seg.body.clone(),
                    count: q,
                });
            }
            if !r.is_zero() {
                if let Body::Word(w) = &seg.body {
                    segs.extend(w.prefix(&r).segs);
                }
            }
            break;
        }
        Word::from_segments(segs)
    }

    /// Length of the longest common prefix of two reduced words.
    pub fn common_prefix_length(&self, other: &Word) -> BigUint {
        Cursor::new(self).common_prefix_with(Cursor::new(other))
    }

    /// Iterates over the expanded letters. Intended for short words.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        let mut cursor = Cursor::new(self);
        std::iter::from_fn(move || cursor.next_letter())
    }

    /// Expanded letters as signed generator indices.
    pub fn to_signed_vec(&self) -> Vec<i32> {
        self.letters().map(Letter::index).collect()
    }
}

fn bodies_inverse(x: &Body, y: &Body) -> bool {
    match (x, y) {
        (Body::Letter(a), Body::Letter(b)) => *a == b.inverse(),
        (Body::Word(u), Body::Word(v)) => {
            u.len() == v.len() && u.inverse().common_prefix_length(v) == *u.len()
        }
        _ => false,
    }
}

impl PartialEq for Word {
    fn eq(&self, other: &Word) -> bool {
        self.len() == other.len() && self.common_prefix_length(other) == *self.len()
    }
}

impl Eq for Word {}

impl fmt::Display for Word {
    /// Compressed notation, e.g. `abaB`, `a^3 b^9`, `a^2 (ab)^4`; `1` for the
    /// identity.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        let mut prev_plain: Option<bool> = None;
        for seg in &self.segs {
            let mut token = match &seg.body {
                Body::Letter(l) => l.to_char().to_string(),
                Body::Word(w) => format!("({w})"),
            };
            let plain = seg.count.is_one() && matches!(seg.body, Body::Letter(_));
            if !seg.count.is_one() {
                token.push_str(&format!("^{}", seg.count));
            }
            if let Some(p) = prev_plain {
                if !(p && plain) {
                    write!(f, " ")?;
                }
            }
            write!(f, "{token}")?;
            prev_plain = Some(plain);
        }
        Ok(())
    }
}
