//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr     := ('-')? term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := base ('^' exponent)?
//! exponent := ('-')? factor
//! base     := number | name | name '(' args ')' | '(' expr ')'
//!           | 'diff' '(' expr ',' name (',' integer)? ')'
//! ```
//!
//! Identifiers are ASCII: a letter followed by letters, digits or
//! underscores. Numbers are integers or decimal literals; both are read
//! as exact rationals. `exp`, `ln`, `sin`, `cos`, `sqrt` take one
//! expression argument; any other applied name is an opaque function of
//! a single variable, so its argument must be a bare variable name.
//! `diff(e, x, n)` differentiates at parse time; derivatives of opaque
//! applications stay as derivative nodes and print back the same way.

use super::{rat_int, Elementary, Expr, Rat};
use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rat),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token together with its starting offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let at = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::Eof, at));
        }
        let c = self.src[self.pos];
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok((t, at));
        }
        if c.is_ascii_digit() {
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let mut numer = BigInt::parse_bytes(&self.src[start..self.pos], 10).unwrap();
            let mut denom = BigInt::one();
            if self.pos < self.src.len() && self.src[self.pos] == b'.' {
                self.pos += 1;
                let fstart = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if fstart == self.pos {
                    return err(self.pos, "expected digits after decimal point");
                }
                for &d in &self.src[fstart..self.pos] {
                    numer = numer * 10 + BigInt::from(d - b'0');
                    denom *= 10;
                }
            }
            return Ok((Tok::Num(Rat::new(numer, denom)), at));
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
            return Ok((Tok::Name(name), at));
        }
        err(at, format!("unexpected character {:?}", c as char))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (tok, at) = lexer.next()?;
        Ok(Parser { lexer, tok, at })
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.tok == tok {
            self.advance()
        } else {
            err(self.at, format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = Vec::new();
        let first = if self.tok == Tok::Minus {
            self.advance()?;
            self.term()?.neg()
        } else {
            self.term()?
        };
        terms.push(first);
        loop {
            match self.tok {
                Tok::Plus => {
                    self.advance()?;
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.advance()?;
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.tok {
                Tok::Star => {
                    self.advance()?;
                    factors.push(self.factor()?);
                }
                Tok::Slash => {
                    self.advance()?;
                    factors.push(self.factor()?.inv());
                }
                _ => break,
            }
        }
        Ok(Expr::mul(factors))
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.tok == Tok::Caret {
            self.advance()?;
            let e = self.exponent()?;
            return Ok(Expr::pow(base, e));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Minus {
            self.advance()?;
            return Ok(self.factor()?.neg());
        }
        self.factor()
    }

    fn name(&mut self, what: &str) -> Result<String, ParseError> {
        match std::mem::replace(&mut self.tok, Tok::Eof) {
            Tok::Name(n) => {
                self.advance()?;
                Ok(n)
            }
            other => {
                self.tok = other;
                err(self.at, format!("expected {what}"))
            }
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(r) => {
                self.advance()?;
                Ok(Expr::rational(r))
            }
            Tok::LParen => {
                self.advance()?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Name(name) => {
                self.advance()?;
                if self.tok != Tok::LParen {
                    return Ok(Expr::sym(&name));
                }
                self.advance()?;
                if name == "diff" {
                    let inner = self.expr()?;
                    self.expect(Tok::Comma, "',' in diff")?;
                    let var = self.name("variable name in diff")?;
                    let order = if self.tok == Tok::Comma {
                        self.advance()?;
                        let at = self.at;
                        match std::mem::replace(&mut self.tok, Tok::Eof) {
                            Tok::Num(r) if r.is_integer() && r > rat_int(0) => {
                                self.advance()?;
                                let n: BigInt = r.to_integer();
                                u32::try_from(&n)
                                    .map_err(|_| ParseError {
                                        offset: at,
                                        message: "derivative order too large".into(),
                                    })?
                            }
                            other => {
                                self.tok = other;
                                return err(at, "expected positive integer derivative order");
                            }
                        }
                    } else {
                        1
                    };
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(inner.diff(&var, order));
                }
                let elem = match name.as_str() {
                    "exp" => Some(Elementary::Exp),
                    "ln" => Some(Elementary::Ln),
                    "sin" => Some(Elementary::Sin),
                    "cos" => Some(Elementary::Cos),
                    "sqrt" => Some(Elementary::Sqrt),
                    _ => None,
                };
                if let Some(f) = elem {
                    let arg = self.expr()?;
                    if self.tok == Tok::Comma {
                        return err(self.at, format!("{name} takes exactly one argument"));
                    }
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Expr::elem(f, arg));
                }
                // Opaque function of one variable: the argument must be a
                // bare name, as in R(t).
                let at = self.at;
                let var = self
                    .name("variable name as opaque function argument")
                    .map_err(|_| ParseError {
                        offset: at,
                        message: format!("{name} is an opaque function and takes a single variable name"),
                    })?;
                if self.tok == Tok::Comma {
                    return err(self.at, format!("{name} takes exactly one argument"));
                }
                self.expect(Tok::RParen, "')'")?;
                Ok(Expr::func(&name, &var))
            }
            _ => err(self.at, "expected a number, name or parenthesized expression"),
        }
    }
}

/// Parse the text grammar into an expression tree.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    if p.tok != Tok::Eof {
        return err(p.at, "unexpected trailing input");
    }
    Ok(e)
}
