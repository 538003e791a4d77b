//! Letter-level traversal of compressed words.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::word::{Body, Segment, Word};
use super::Letter;

struct Frame<'a> {
    segs: &'a [Segment],
    idx: usize,
    copy: BigUint,
}

impl Frame<'_> {
    fn at_start(&self) -> bool {
        self.idx == 0 && self.copy.is_zero()
    }

    fn remaining(&self) -> BigUint {
        &self.segs[self.idx].count - &self.copy
    }
}

/// Position inside a word. The deepest frame always points at a letter
/// segment unless the cursor is exhausted.
pub(crate) struct Cursor<'a> {
    stack: Vec<Frame<'a>>,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(w: &'a Word) -> Cursor<'a> {
        let mut c = Cursor { stack: Vec::new() };
        if !w.is_empty() {
            c.stack.push(Frame {
                segs: w.segments(),
                idx: 0,
                copy: BigUint::zero(),
            });
            c.descend();
        }
        c
    }

    fn descend(&mut self) {
        loop {
            let top = self.stack.last().expect("descend on exhausted cursor");
            let segs: &'a [Segment] = top.segs;
            match &segs[top.idx].body {
                Body::Word(w) => {
                    let inner: &'a Word = w;
                    self.stack.push(Frame {
                        segs: inner.segments(),
                        idx: 0,
                        copy: BigUint::zero(),
                    });
                }
                Body::Letter(_) => break,
            }
        }
    }

    fn body_at(&self, level: usize) -> &'a Body {
        let f = &self.stack[level];
        let segs: &'a [Segment] = f.segs;
        &segs[f.idx].body
    }

    /// Moves forward by `k` whole copies of the body at `level`; deeper
    /// frames must be at their start.
    fn advance(&mut self, level: usize, k: &BigUint) {
        self.stack.truncate(level + 1);
        let mut k = k.clone();
        loop {
            let f = self.stack.last_mut().unwrap();
            f.copy += &k;
            if f.copy < f.segs[f.idx].count {
                break;
            }
            f.copy = BigUint::zero();
            f.idx += 1;
            if f.idx < f.segs.len() {
                break;
            }
            self.stack.pop();
            if self.stack.is_empty() {
                return;
            }
            k = BigUint::one();
        }
        self.descend();
    }

    /// Shallowest level at which the cursor sits on a copy boundary.
    fn shallowest_boundary(&self) -> usize {
        let mut level = self.stack.len() - 1;
        while level > 0 && self.stack[level].at_start() {
            level -= 1;
        }
        level
    }

    pub(crate) fn next_letter(&mut self) -> Option<Letter> {
        let deepest = self.stack.len().checked_sub(1)?;
        let letter = match self.body_at(deepest) {
            Body::Letter(l) => *l,
            Body::Word(_) => unreachable!("cursor rests on letters"),
        };
        self.advance(deepest, &BigUint::one());
        Some(letter)
    }

    /// Consumes both cursors while they agree and returns the number of
    /// letters skipped. Whole runs of structurally equal bodies are skipped
    /// in one step, so the cost depends on the nesting, not the length.
    pub(crate) fn common_prefix_with(mut self, mut other: Cursor<'a>) -> BigUint {
        let mut total = BigUint::zero();
        while !self.stack.is_empty() && !other.stack.is_empty() {
            let (sa, sb) = (self.shallowest_boundary(), other.shallowest_boundary());
            let mut found = None;
            'search: for la in sa..self.stack.len() {
                let ba = self.body_at(la);
                let len_a = ba.len();
                for lb in sb..other.stack.len() {
                    let bb = other.body_at(lb);
                    if bb.len() == len_a && ba.same_structure(bb) {
                        found = Some((la, lb, len_a));
                        break 'search;
                    }
                }
            }
            let Some((la, lb, body_len)) = found else {
                break;
            };
            let k = self.stack[la].remaining().min(other.stack[lb].remaining());
            total += &k * body_len;
            self.advance(la, &k);
            other.advance(lb, &k);
        }
        total
    }
}
