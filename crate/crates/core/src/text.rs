//! Small cursor used by the line-oriented text formats.

use crate::design::Label;
use crate::error::{Error, Result};

pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str, line: usize) -> Self {
        Cursor { src, pos: 0, line }
    }

    pub(crate) fn col(&self) -> usize {
        self.src[..self.pos].chars().count() + 1
    }

    pub(crate) fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.col(), msg)
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub(crate) fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    pub(crate) fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect_str(&mut self, s: &str) -> Result<()> {
        if self.eat_str(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`")))
        }
    }

    /// Consumes an identifier-like keyword (`[A-Za-z_][A-Za-z0-9_-]*`).
    pub(crate) fn word(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let mut end = 0;
        for (i, c) in rest.char_indices() {
            let ok = if i == 0 {
                c.is_ascii_alphabetic() || c == '_'
            } else {
                c.is_ascii_alphanumeric() || c == '_' || c == '-'
            };
            if !ok {
                break;
            }
            end = i + c.len_utf8();
        }
        if end == 0 {
            return None;
        }
        self.pos += end;
        Some(&rest[..end])
    }

    /// Consumes everything up to the next whitespace.
    pub(crate) fn token(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        if end == 0 {
            return None;
        }
        self.pos += end;
        Some(&rest[..end])
    }

    pub(crate) fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let rest = self.rest();
        let mut end = 0;
        for (i, c) in rest.char_indices() {
            if c.is_ascii_digit() || (i == 0 && (c == '-' || c == '+')) {
                end = i + 1;
            } else {
                break;
            }
        }
        let digits = &rest[..end];
        match digits.parse::<i64>() {
            Ok(n) => {
                self.pos += end;
                Ok(n)
            }
            Err(_) => Err(self.err("expected an integer")),
        }
    }

    pub(crate) fn uint(&mut self) -> Result<u64> {
        let col_err = self.err("expected a non-negative integer");
        let n = self.int()?;
        u64::try_from(n).map_err(|_| col_err)
    }

    pub(crate) fn label(&mut self) -> Result<Label> {
        self.skip_ws();
        if self.eat('(') {
            let a = self.int()?;
            self.expect(',')?;
            let b = self.int()?;
            self.expect(')')?;
            return Ok(Label::Pair(a, b));
        }
        let rest = self.rest();
        for prefix in ["INF", "inf", "\u{221e}"] {
            if let Some(after) = rest.strip_prefix(prefix) {
                self.pos += prefix.len();
                let after = after.strip_prefix('_').map_or(after, |a| {
                    self.pos += 1;
                    a
                });
                let digits: usize = after.chars().take_while(|c| c.is_ascii_digit()).count();
                if digits == 0 {
                    return Ok(Label::Inf(0));
                }
                let j = after[..digits]
                    .parse::<u32>()
                    .map_err(|_| self.err("bad infinity index"))?;
                self.pos += digits;
                return Ok(Label::Inf(j));
            }
        }
        Ok(Label::Int(self.int().map_err(|_| self.err("expected a point label"))?))
    }

    /// Parses `(l1, l2, ...)` with strict comma separation.
    pub(crate) fn tuple(&mut self) -> Result<Vec<Label>> {
        self.expect('(')?;
        let mut out = vec![self.label()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some(',') => {
                    self.pos += 1;
                    out.push(self.label()?);
                }
                Some(')') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.err("expected `,` or `)` in tuple")),
            }
        }
    }
}

/// Strips a trailing `#` comment.
pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}
