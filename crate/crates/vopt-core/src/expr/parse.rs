//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr     := cond
//! cond     := "if" comp "then" expr "else" expr | sum
//! comp     := sum ("=="|"!="|"<="|"<"|">="|">") sum
//! sum      := term (("+"|"-") term)*
//! term     := factor (("*"|"/") factor)*
//! factor   := atom ("^" exponent)?
//! exponent := number | "(" integer "/" integer ")" | atom
//! atom     := number | varname | func "(" expr ")" | "(" expr ")" | "-" atom
//! func     := sin | cos | tan | exp | log | abs | sqrt | sign
//! varname  := "x" integer
//! ```
//!
//! An exponent literal `(p/q)` with odd positive `q` becomes a rational power
//! with real odd-root semantics. With even `q` the parenthesized form is kept
//! as an ordinary quotient exponent, which is only defined for positive bases
//! at evaluation time.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};

use super::{BinaryOp, CmpOp, Comparison, Expr, ExprError, UnaryOp};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Cmp(CmpOp),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token with its starting byte offset; `None` at end of input.
    fn next(&mut self) -> Result<Option<(Tok, usize)>, ExprError> {
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'=' | b'!' | b'<' | b'>' => self.lex_cmp()?,
            b'0'..=b'9' => self.lex_number()?,
            b'.' => self.lex_number()?,
            c if c.is_ascii_alphabetic() => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let name = core::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                Tok::Ident(name)
            }
            other => {
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok(Some((tok, start)))
    }

    fn lex_cmp(&mut self) -> Result<Tok, ExprError> {
        let start = self.pos;
        let c = self.src[self.pos];
        let has_eq = self.pos + 1 < self.src.len() && self.src[self.pos + 1] == b'=';
        let op = match (c, has_eq) {
            (b'=', true) => CmpOp::Eq,
            (b'!', true) => CmpOp::Ne,
            (b'<', true) => CmpOp::Le,
            (b'<', false) => CmpOp::Lt,
            (b'>', true) => CmpOp::Ge,
            (b'>', false) => CmpOp::Gt,
            _ => {
                return Err(ExprError::Syntax {
                    offset: start,
                    message: "expected comparison operator".to_string(),
                })
            }
        };
        self.pos += if has_eq { 2 } else { 1 };
        Ok(Tok::Cmp(op))
    }

    fn lex_number(&mut self) -> Result<Tok, ExprError> {
        let start = self.pos;
        let mut end = self.pos;
        while end < self.src.len() && self.src[end].is_ascii_digit() {
            end += 1;
        }
        if end < self.src.len() && self.src[end] == b'.' {
            end += 1;
            while end < self.src.len() && self.src[end].is_ascii_digit() {
                end += 1;
            }
        }
        if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
            let mut probe = end + 1;
            if probe < self.src.len() && (self.src[probe] == b'+' || self.src[probe] == b'-') {
                probe += 1;
            }
            if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                end = probe;
                while end < self.src.len() && self.src[end].is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let text = core::str::from_utf8(&self.src[start..end]).unwrap();
        let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        self.pos = end;
        Ok(Tok::Num(value))
    }
}

struct Parser {
    toks: alloc::vec::Vec<(Tok, usize)>,
    idx: usize,
    n: usize,
    end: usize,
}

const FUNCS: &[(&str, UnaryOp)] = &[
    ("sin", UnaryOp::Sin),
    ("cos", UnaryOp::Cos),
    ("tan", UnaryOp::Tan),
    ("exp", UnaryOp::Exp),
    ("log", UnaryOp::Log),
    ("abs", UnaryOp::Abs),
    ("sqrt", UnaryOp::Sqrt),
    ("sign", UnaryOp::Sign),
];

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.idx).map(|&(_, o)| o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(t, _)| t.clone());
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ExprError> {
        if self.peek() == Some(want) {
            self.idx += 1;
            Ok(())
        } else {
            Err(ExprError::Syntax {
                offset: self.offset(),
                message: format!("expected {what}"),
            })
        }
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), ExprError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == word => {
                self.idx += 1;
                Ok(())
            }
            _ => Err(ExprError::Syntax {
                offset: self.offset(),
                message: format!("expected `{word}`"),
            }),
        }
    }

    fn cond(&mut self) -> Result<Expr, ExprError> {
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == "if" {
                self.idx += 1;
                let lhs = self.sum()?;
                let op = match self.bump() {
                    Some(Tok::Cmp(op)) => op,
                    _ => {
                        return Err(ExprError::Syntax {
                            offset: self.offset(),
                            message: "expected comparison operator in `if` predicate".to_string(),
                        })
                    }
                };
                let rhs = self.sum()?;
                self.expect_keyword("then")?;
                let then_e = self.cond()?;
                self.expect_keyword("else")?;
                let else_e = self.cond()?;
                return Ok(Expr::Conditional(
                    Box::new(Comparison { op, lhs, rhs }),
                    Box::new(then_e),
                    Box::new(else_e),
                ));
            }
        }
        self.sum()
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.idx += 1;
                    let rhs = self.term()?;
                    acc = Expr::Binary(BinaryOp::Add, Box::new(acc), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.idx += 1;
                    let rhs = self.term()?;
                    acc = Expr::Binary(BinaryOp::Sub, Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.idx += 1;
                    let rhs = self.factor()?;
                    acc = Expr::Binary(BinaryOp::Mul, Box::new(acc), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.idx += 1;
                    let rhs = self.factor()?;
                    acc = Expr::Binary(BinaryOp::Div, Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.idx += 1;
            return self.exponent(base);
        }
        Ok(base)
    }

    /// Parses the exponent position, attaching it to `base`.
    fn exponent(&mut self, base: Expr) -> Result<Expr, ExprError> {
        // Rational-exponent literal "(p/q)". With odd q it becomes a real
        // odd-root power node; even q falls back to a parenthesized quotient.
        if self.peek() == Some(&Tok::LParen) {
            if let Some((p, q, consumed)) = self.try_rational_literal() {
                if q > 0 && q % 2 == 1 {
                    self.idx = consumed;
                    return Ok(Expr::RationalPow(Box::new(base), p, q));
                }
            }
        }
        if let Some(Tok::Num(v)) = self.peek() {
            let v = *v;
            self.idx += 1;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(Expr::Const(v))));
        }
        let e = self.atom()?;
        Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(e)))
    }

    /// Looks ahead for "( [-]int / [-]int )" starting at the current `(`.
    /// Returns the literal and the token index just past the `)` on a match.
    fn try_rational_literal(&self) -> Option<(i64, i64, usize)> {
        let mut i = self.idx;
        let get = |idx: &mut usize| -> Option<Tok> {
            let t = self.toks.get(*idx).map(|(t, _)| t.clone());
            *idx += 1;
            t
        };
        if get(&mut i)? != Tok::LParen {
            return None;
        }
        let p = self.signed_int(&mut i)?;
        if get(&mut i)? != Tok::Slash {
            return None;
        }
        let q = self.signed_int(&mut i)?;
        if get(&mut i)? != Tok::RParen {
            return None;
        }
        Some((p, q, i))
    }

    fn signed_int(&self, i: &mut usize) -> Option<i64> {
        let mut neg = false;
        let mut t = self.toks.get(*i).map(|(t, _)| t.clone())?;
        if t == Tok::Minus {
            neg = true;
            *i += 1;
            t = self.toks.get(*i).map(|(t, _)| t.clone())?;
        }
        if let Tok::Num(v) = t {
            if libm::trunc(v) == v && v >= 0.0 && v <= 9.0e15 {
                *i += 1;
                let k = v as i64;
                return Some(if neg { -k } else { k });
            }
        }
        None
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::Minus) => {
                let inner = self.atom()?;
                Ok(Expr::Unary(UnaryOp::Neg, Box::new(inner)))
            }
            Some(Tok::LParen) => {
                let inner = self.cond()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                if let Some(&(_, op)) = FUNCS.iter().find(|(f, _)| *f == name) {
                    self.expect(&Tok::LParen, "`(` after function name")?;
                    let arg = self.cond()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    return Ok(Expr::Unary(op, Box::new(arg)));
                }
                if let Some(rest) = name.strip_prefix('x') {
                    if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                        let index: usize = rest.parse().map_err(|_| ExprError::Syntax {
                            offset,
                            message: format!("malformed variable `{name}`"),
                        })?;
                        if index == 0 || index > self.n {
                            return Err(ExprError::VariableOutOfRange {
                                offset,
                                index,
                                n: self.n,
                            });
                        }
                        return Ok(Expr::Var(index - 1));
                    }
                }
                Err(ExprError::UnknownIdentifier { offset, name })
            }
            _ => Err(ExprError::Syntax {
                offset,
                message: "expected number, variable, function call, `(`, or `-`".to_string(),
            }),
        }
    }
}

/// Parses `text` into an expression over at most `n` variables.
pub fn parse_expr(text: &str, n: usize) -> Result<Expr, ExprError> {
    let mut lexer = Lexer::new(text);
    let mut toks = alloc::vec::Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let mut parser = Parser { toks, idx: 0, n, end: text.len() };
    let e = parser.cond()?;
    if parser.idx != parser.toks.len() {
        return Err(ExprError::Syntax {
            offset: parser.offset(),
            message: "unexpected trailing input".to_string(),
        });
    }
    Ok(e)
}
