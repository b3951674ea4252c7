//! Polynomial expression parser.
//!
//! ```text
//! expr   := ['+' | '-'] term (('+' | '-') term)*
//! term   := factor (('*' factor) | ('/' number))*
//! factor := atom ['^' integer]
//! atom   := number | variable | '(' expr ')'
//! ```
//!
//! Numbers are decimal (`3`, `0.25`, `1e-3`); `p/q` is read as a division by
//! a literal. Multiplication must be written with `*`.

use thiserror::Error;

use crate::poly::{Coeff, Polynomial};

/// Largest total degree an expression may reach while being parsed.
pub const MAX_DEGREE: u32 = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{line}:{column}: unknown variable `{name}`")]
    UnknownVariable { line: usize, column: usize, name: String },
    #[error("{line}:{column}: malformed exponent `{text}` (expected a non-negative integer)")]
    BadExponent { line: usize, column: usize, text: String },
}

impl ParseError {
    pub fn line(&self) -> usize {
        match self {
            ParseError::Syntax { line, .. }
            | ParseError::UnknownVariable { line, .. }
            | ParseError::BadExponent { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str, line0: usize, col0: usize) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (line0, col0);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned {
                tok,
                line: tl,
                column: tc,
            });
            i += 1;
            col += 1;
            continue;
        }
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
        } else {
            return Err(ParseError::Syntax {
                line: tl,
                column: tc,
                message: format!("unexpected character `{c}`"),
            });
        }
        let word: String = chars[start..i].iter().collect();
        col += i - start;
        let tok = if c.is_alphabetic() || c == '_' {
            Tok::Ident(word)
        } else {
            Tok::Num(word)
        };
        out.push(Spanned {
            tok,
            line: tl,
            column: tc,
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'a, C> {
    toks: Vec<Spanned>,
    pos: usize,
    vars: &'a [String],
    _coeff: std::marker::PhantomData<C>,
}

impl<'a, C: Coeff> Parser<'a, C> {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, at: &Spanned, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: at.line,
            column: at.column,
            message: message.into(),
        }
    }

    fn check_degree(&self, p: &Polynomial<C>, at: &Spanned) -> Result<(), ParseError> {
        if p.degree() > MAX_DEGREE {
            Err(self.syntax(at, format!("expression degree exceeds {MAX_DEGREE}")))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Polynomial<C>, ParseError> {
        let n = self.vars.len();
        let mut acc = Polynomial::zero(n);
        let mut negate = match self.peek().tok {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        loop {
            let t = self.term()?;
            acc = if negate { &acc - &t } else { &acc + &t };
            let next = self.peek().clone();
            match next.tok {
                Tok::Plus => negate = false,
                Tok::Minus => negate = true,
                Tok::RParen | Tok::End => return Ok(acc),
                Tok::Ident(_) | Tok::Num(_) | Tok::LParen => {
                    return Err(self.syntax(
                        &next,
                        format!(
                            "expected an operator before {} (write `*` explicitly)",
                            next.tok.describe()
                        ),
                    ))
                }
                _ => return Err(self.syntax(&next, format!("unexpected {}", next.tok.describe()))),
            }
            self.bump();
        }
    }

    fn term(&mut self) -> Result<Polynomial<C>, ParseError> {
        let mut acc = self.factor()?;
        loop {
            let next = self.peek().clone();
            match next.tok {
                Tok::Star => {
                    self.bump();
                    let f = self.factor()?;
                    acc = &acc * &f;
                    self.check_degree(&acc, &next)?;
                }
                Tok::Slash => {
                    self.bump();
                    let d = self.bump();
                    let Tok::Num(text) = &d.tok else {
                        return Err(self.syntax(&d, "only division by a number literal is supported"));
                    };
                    let v = C::parse_literal(text).ok_or_else(|| self.syntax(&d, "invalid number"))?;
                    if v.is_zero() {
                        return Err(self.syntax(&d, "division by zero"));
                    }
                    acc = acc.scale(&(C::one() / v));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Polynomial<C>, ParseError> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        let caret = self.bump();
        let e = self.bump();
        let bad = |text: String| ParseError::BadExponent {
            line: e.line,
            column: e.column,
            text,
        };
        let exp: u32 = match &e.tok {
            Tok::Num(text) => {
                if !text.chars().all(|c| c.is_ascii_digit()) {
                    return Err(bad(text.clone()));
                }
                text.parse().map_err(|_| bad(text.clone()))?
            }
            Tok::Minus => {
                let rest = match &self.peek().tok {
                    Tok::Num(t) => t.clone(),
                    _ => String::new(),
                };
                return Err(bad(format!("-{rest}")));
            }
            other => return Err(bad(other.describe())),
        };
        if base.degree().saturating_mul(exp) > MAX_DEGREE {
            return Err(self.syntax(&caret, format!("expression degree exceeds {MAX_DEGREE}")));
        }
        Ok(base.pow(exp))
    }

    fn atom(&mut self) -> Result<Polynomial<C>, ParseError> {
        let n = self.vars.len();
        let t = self.bump();
        match &t.tok {
            Tok::Num(text) => {
                let v = C::parse_literal(text).ok_or_else(|| self.syntax(&t, format!("invalid number `{text}`")))?;
                Ok(Polynomial::constant(n, v))
            }
            Tok::Ident(name) => match self.vars.iter().position(|v| v == name) {
                Some(i) => Ok(Polynomial::var(n, i)),
                None => Err(ParseError::UnknownVariable {
                    line: t.line,
                    column: t.column,
                    name: name.clone(),
                }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                let close = self.bump();
                if close.tok != Tok::RParen {
                    return Err(self.syntax(&close, format!("expected `)`, found {}", close.tok.describe())));
                }
                Ok(inner)
            }
            other => Err(self.syntax(
                &t,
                format!("expected a number, variable or `(`, found {}", other.describe()),
            )),
        }
    }
}

/// Parses `text` over the ordered variable list.
pub fn parse_polynomial<C: Coeff>(text: &str, vars: &[String]) -> Result<Polynomial<C>, ParseError> {
    parse_polynomial_at(text, vars, 1, 1)
}

/// Like [`parse_polynomial`], reporting positions relative to `(line, column)`.
pub(crate) fn parse_polynomial_at<C: Coeff>(
    text: &str,
    vars: &[String],
    line: usize,
    column: usize,
) -> Result<Polynomial<C>, ParseError> {
    let toks = lex(text, line, column)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vars,
        _coeff: std::marker::PhantomData,
    };
    if p.peek().tok == Tok::End {
        let at = p.peek().clone();
        return Err(p.syntax(&at, "empty expression"));
    }
    let out = p.expr()?;
    let rest = p.peek().clone();
    if rest.tok != Tok::End {
        return Err(p.syntax(&rest, format!("unexpected {}", rest.tok.describe())));
    }
    Ok(out)
}
