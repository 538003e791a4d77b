//! Parser for elements and sequence families, e.g. `a^n (ab)^{n^2} c^{2n^2}`.
//!
//! Letters `a, b, …` name the free generators followed by the `Z^d`
//! generators; capitals are inverses. An exponent is an integer, `n`, or a
//! braced polynomial in `n`. Inside parentheses only constant exponents are
//! allowed.

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::freegroup::{Ambient, GroupElement, Letter, Word};
use crate::sequences::{ExponentPoly, SequenceFamily};

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    ambient: Ambient,
}

struct Block {
    pattern: GroupElement,
    exponent: ExponentPoly,
    column: usize,
}

impl Parser {
    fn new(text: &str, line: usize, ambient: Ambient) -> Parser {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            line,
            ambient,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        self.err_at(self.pos, msg)
    }

    fn err_at(&self, pos: usize, msg: impl Into<String>) -> Error {
        Error::parse(self.line, pos + 1, msg)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn sequence(&mut self, closing: Option<char>) -> Result<Vec<Block>> {
        let mut blocks = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => break,
                Some(c) if Some(c) == closing => break,
                _ => {}
            }
            let column = self.pos;
            let pattern = self.atom()?;
            self.skip_ws();
            let exponent = if self.peek() == Some('^') {
                self.pos += 1;
                self.exponent()?
            } else {
                ExponentPoly::constant(1)
            };
            blocks.push(Block {
                pattern,
                exponent,
                column,
            });
        }
        Ok(blocks)
    }

    fn atom(&mut self) -> Result<GroupElement> {
        let start = self.pos;
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.sequence(Some(')'))?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                if inner.is_empty() {
                    return Err(self.err_at(start, "empty group"));
                }
                let mut acc = GroupElement::identity(self.ambient);
                for b in inner {
                    let Some(k) = b.exponent.as_constant() else {
                        return Err(
                            self.err_at(b.column, "exponents inside parentheses must be constant")
                        );
                    };
                    acc = acc.compose(&b.pattern.pow(&BigInt::from(k)))?;
                }
                Ok(acc)
            }
            Some('1') => {
                self.pos += 1;
                Ok(GroupElement::identity(self.ambient))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                self.pos += 1;
                let letter = Letter::from_char(c).expect("ascii letter");
                let g = letter.generator();
                let Ambient { m, d } = self.ambient;
                if g <= m {
                    GroupElement::from_word(self.ambient, Word::letter(letter))
                } else if g <= m + d {
                    let e = GroupElement::z_generator(self.ambient, g - m - 1);
                    Ok(if letter.sign() < 0 { e.inverse() } else { e })
                } else {
                    Err(self.err_at(
                        start,
                        format!("letter `{c}` out of range for m = {m}, d = {d}"),
                    ))
                }
            }
            Some(c) => Err(self.err(format!("unexpected character `{c}`"))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn integer(&mut self) -> Result<Option<i64>> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Ok(None);
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits
            .parse()
            .map(Some)
            .map_err(|_| self.err_at(start, "integer too large"))
    }

    fn exponent(&mut self) -> Result<ExponentPoly> {
        self.skip_ws();
        let negate = self.peek() == Some('-');
        if negate {
            self.pos += 1;
        }
        let poly = match self.peek() {
            Some('n') => {
                self.pos += 1;
                ExponentPoly::n()
            }
            Some('{') => {
                self.pos += 1;
                let p = self.polynomial()?;
                self.skip_ws();
                if self.peek() != Some('}') {
                    return Err(self.err("expected `}`"));
                }
                self.pos += 1;
                p
            }
            Some(c) if c.is_ascii_digit() => ExponentPoly::constant(self.integer()?.unwrap()),
            _ => return Err(self.err("expected an exponent: integer, `n`, or `{polynomial}`")),
        };
        Ok(if negate { poly.negate() } else { poly })
    }

    fn polynomial(&mut self) -> Result<ExponentPoly> {
        let mut coeffs = [0i64; ExponentPoly::MAX_DEGREE + 1];
        let mut first = true;
        loop {
            self.skip_ws();
            let mut sign = 1;
            match self.peek() {
                Some('}') | None if first => return Err(self.err("empty polynomial")),
                Some('}') | None => break,
                Some('+') if !first => self.pos += 1,
                Some('-') => {
                    sign = -1;
                    self.pos += 1;
                }
                _ if first => {}
                Some(c) => {
                    return Err(self.err(format!("unexpected character `{c}` in polynomial")))
                }
            }
            self.skip_ws();
            first = false;
            let term_start = self.pos;
            let coeff = self.integer()?;
            self.skip_ws();
            if coeff.is_some() && self.peek() == Some('*') {
                self.pos += 1;
                self.skip_ws();
            }
            let mut degree = 0;
            if self.peek() == Some('n') {
                self.pos += 1;
                degree = 1;
                self.skip_ws();
                if self.peek() == Some('^') {
                    self.pos += 1;
                    self.skip_ws();
                    let at = self.pos;
                    degree = self
                        .integer()?
                        .ok_or_else(|| self.err("expected a degree after `^`"))?
                        as usize;
                    if degree > ExponentPoly::MAX_DEGREE {
                        return Err(self.err_at(
                            at,
                            format!("degree {degree} exceeds {}", ExponentPoly::MAX_DEGREE),
                        ));
                    }
                }
            } else if coeff.is_none() {
                return Err(self.err_at(term_start, "expected a term"));
            }
            let c = coeff.unwrap_or(1) * sign;
            coeffs[degree] = coeffs[degree]
                .checked_add(c)
                .ok_or_else(|| self.err_at(term_start, "coefficient overflow"))?;
        }
        Ok(ExponentPoly::from_coeffs(&coeffs))
    }
}

fn parse_blocks(text: &str, line: usize, ambient: Ambient) -> Result<Vec<Block>> {
    let mut p = Parser::new(text, line, ambient);
    let blocks = p.sequence(None)?;
    if p.pos < p.chars.len() {
        return Err(p.err(format!("unexpected `{}`", p.chars[p.pos])));
    }
    if blocks.is_empty() {
        return Err(p.err_at(0, "empty expression"));
    }
    Ok(blocks)
}

/// Parses a single element such as `a^4 b^16` or `(ab)^3 c^-2`.
pub fn parse_element(text: &str, ambient: Ambient) -> Result<GroupElement> {
    let blocks = parse_blocks(text, 1, ambient)?;
    let mut acc = GroupElement::identity(ambient);
    for b in blocks {
        let Some(k) = b.exponent.as_constant() else {
            return Err(Error::parse(
                1,
                b.column + 1,
                "element exponents must be constant",
            ));
        };
        acc = acc.compose(&b.pattern.pow(&BigInt::from(k)))?;
    }
    Ok(acc)
}

/// Parses one family. The text itself becomes the label.
pub fn parse_family(text: &str, ambient: Ambient) -> Result<SequenceFamily> {
    parse_family_at(text, 1, ambient)
}

fn parse_family_at(text: &str, line: usize, ambient: Ambient) -> Result<SequenceFamily> {
    let blocks = parse_blocks(text, line, ambient)?;
    let blocks = blocks
        .into_iter()
        .map(|b| (b.pattern, b.exponent))
        .collect();
    Ok(SequenceFamily::new(ambient, blocks)?.with_label(text.trim()))
}

/// Parses a family file: one family per line, `#` starts a comment.
pub fn parse_family_file(text: &str, ambient: Ambient) -> Result<Vec<SequenceFamily>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        // Keep columns relative to the raw line.
        let lead = content.len() - content.trim_start().len();
        let fam = parse_family_at(content.trim_start(), i + 1, ambient).map_err(|e| match e {
            Error::Parse {
                line,
                column,
                message,
            } => Error::Parse {
                line,
                column: column + content[..lead].chars().count(),
                message,
            },
            other => other,
        })?;
        out.push(fam);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amb(m: usize, d: usize) -> Ambient {
        Ambient::new(m, d).unwrap()
    }

    #[test]
    fn elements() {
        let g = parse_element("a^4 b^16", amb(2, 1)).unwrap();
        assert_eq!(g.to_string(), "a^4 b^16");
        let g = parse_element("(ab)^3 c^-2", amb(2, 1)).unwrap();
        assert_eq!(g.to_string(), "(ab)^3 C^2");
        let g = parse_element("a A b", amb(2, 0)).unwrap();
        assert_eq!(g.to_string(), "b");
        assert!(parse_element("1", amb(2, 0)).unwrap().is_identity());
    }

    #[test]
    fn families() {
        let f = parse_family("a^n b^{n^2} c^{n^2}", amb(2, 1)).unwrap();
        assert_eq!(f.label(), "a^n b^{n^2} c^{n^2}");
        assert_eq!(f.evaluate(2).unwrap().to_string(), "a^2 b^4 c^4");
        let f = parse_family("a^{n+n^2} b^{-n^2}", amb(2, 0)).unwrap();
        assert_eq!(f.evaluate(2).unwrap().to_string(), "a^6 B^4");
        let f = parse_family("a^{2*n^2 - 1} C^{3n}", amb(2, 1)).unwrap();
        assert_eq!(f.evaluate(1).unwrap().to_string(), "a C^3");
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_element("a^4 q", amb(2, 1)).unwrap_err();
        assert_eq!(
            e.to_string(),
            "1:5: letter `q` out of range for m = 2, d = 1"
        );
        let e = parse_family("(a^n b)", amb(2, 0)).unwrap_err();
        assert!(matches!(e, Error::Parse { column: 2, .. }), "{e}");
        let e = parse_family("a^{n^5}", amb(2, 0)).unwrap_err();
        assert!(matches!(e, Error::Parse { column: 6, .. }), "{e}");
        assert!(parse_family("a^", amb(2, 0)).is_err());
        assert!(parse_family("(ab", amb(2, 0)).is_err());
        assert!(parse_family("  ", amb(2, 0)).is_err());
        let e = parse_family_file("a^n\n\n  a^n $\n", amb(2, 0)).unwrap_err();
        assert!(
            matches!(
                e,
                Error::Parse {
                    line: 3,
                    column: 7,
                    ..
                }
            ),
            "{e}"
        );
        assert!(e.is_usage());
    }

    #[test]
    fn family_file_skips_comments() {
        let fams = parse_family_file("# suite\na^n\n\nb^n # second\n", amb(2, 0)).unwrap();
        let labels: Vec<_> = fams.iter().map(|f| f.label().to_string()).collect();
        assert_eq!(labels, ["a^n", "b^n"]);
    }
}
