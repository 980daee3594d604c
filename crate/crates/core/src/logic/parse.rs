//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula     := disjunction [ "->" formula ]
//! disjunction := conjunction [ "or" disjunction ]
//! conjunction := unary [ "and" conjunction ]
//! unary       := "not" unary
//!              | ("exists" | "forall") IDENT "(" formula ")"
//!              | "dist" "(" IDENT "," IDENT ")" ("<=" | ">") NUMBER
//!              | IDENT "(" IDENT { "," IDENT } ")"
//!              | IDENT "=" IDENT
//!              | "(" formula ")"
//! ```
//!
//! All binary connectives associate to the right.

use std::fmt;

use thiserror::Error;

use super::formula::{Formula, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnboundVariable(String),
    Rebound(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{position}: {}", describe(.kind))]
pub struct ParseError {
    pub position: Position,
    pub kind: ParseErrorKind,
}

fn describe(kind: &ParseErrorKind) -> String {
    match kind {
        ParseErrorKind::Syntax(msg) => msg.clone(),
        ParseErrorKind::UnboundVariable(v) => format!("unbound variable `{v}`"),
        ParseErrorKind::Rebound(v) => {
            format!("variable `{v}` is already bound by an enclosing quantifier")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(usize),
    LParen,
    RParen,
    Comma,
    Equals,
    Le,
    Gt,
    Arrow,
    Exists,
    Forall,
    And,
    Or,
    Not,
    Dist,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(n) => write!(f, "number {n}"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Equals => f.write_str("`=`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::Exists => f.write_str("`exists`"),
            Tok::Forall => f.write_str("`forall`"),
            Tok::And => f.write_str("`and`"),
            Tok::Or => f.write_str("`or`"),
            Tok::Not => f.write_str("`not`"),
            Tok::Dist => f.write_str("`dist`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Position)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let position = Position { line, column };
        let mut advance = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            advance(&mut chars);
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                    word.push(c);
                    advance(&mut chars);
                } else {
                    break;
                }
            }
            match word.as_str() {
                "exists" => Tok::Exists,
                "forall" => Tok::Forall,
                "and" => Tok::And,
                "or" => Tok::Or,
                "not" => Tok::Not,
                "dist" => Tok::Dist,
                _ => Tok::Ident(word),
            }
        } else if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    advance(&mut chars);
                } else {
                    break;
                }
            }
            let n = digits.parse().map_err(|_| ParseError {
                position,
                kind: ParseErrorKind::Syntax(format!("number `{digits}` out of range")),
            })?;
            Tok::Number(n)
        } else {
            advance(&mut chars);
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '=' => Tok::Equals,
                '>' => Tok::Gt,
                '<' if chars.peek() == Some(&'=') => {
                    advance(&mut chars);
                    Tok::Le
                }
                '-' if chars.peek() == Some(&'>') => {
                    advance(&mut chars);
                    Tok::Arrow
                }
                _ => {
                    return Err(ParseError {
                        position,
                        kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
                    })
                }
            }
        };
        out.push((tok, position));
    }
    out.push((Tok::End, Position { line, column }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
    scope: Vec<Var>,
    free: Vec<(Var, Position)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn position(&self) -> Position {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, msg: String) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.position(),
            kind: ParseErrorKind::Syntax(msg),
        })
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {want}, found {}", self.peek()))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {other}")),
        }
    }

    fn variable(&mut self) -> Result<Var, ParseError> {
        let position = self.position();
        let v = Var::new(&self.ident()?);
        if !self.scope.contains(&v) && !self.free.iter().any(|(f, _)| *f == v) {
            self.free.push((v.clone(), position));
        }
        Ok(v)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.conjunction()?;
        if *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.disjunction()?;
            return Ok(Formula::or(lhs, rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::And {
            self.bump();
            let rhs = self.conjunction()?;
            return Ok(Formula::and(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            q @ (Tok::Exists | Tok::Forall) => {
                self.bump();
                let position = self.position();
                let v = Var::new(&self.ident()?);
                if self.scope.contains(&v) {
                    return Err(ParseError {
                        position,
                        kind: ParseErrorKind::Rebound(v.name().to_string()),
                    });
                }
                self.expect(Tok::LParen)?;
                self.scope.push(v.clone());
                let body = self.formula()?;
                self.scope.pop();
                self.expect(Tok::RParen)?;
                Ok(if q == Tok::Exists {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                })
            }
            Tok::Dist => {
                self.bump();
                self.expect(Tok::LParen)?;
                let x = self.variable()?;
                self.expect(Tok::Comma)?;
                let y = self.variable()?;
                self.expect(Tok::RParen)?;
                let le = match self.bump() {
                    Tok::Le => true,
                    Tok::Gt => false,
                    other => {
                        self.at -= 1;
                        return self.error(format!("expected `<=` or `>`, found {other}"));
                    }
                };
                let r = match self.bump() {
                    Tok::Number(r) => r,
                    other => {
                        self.at -= 1;
                        return self.error(format!("expected radius, found {other}"));
                    }
                };
                Ok(if le {
                    Formula::DistLe(x, y, r)
                } else {
                    Formula::DistGt(x, y, r)
                })
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) => {
                let next = &self.toks[self.at + 1].0;
                if *next == Tok::LParen {
                    self.bump();
                    self.bump();
                    let mut args = vec![self.variable()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.variable()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Formula::Rel { symbol: name, args })
                } else {
                    let x = self.variable()?;
                    self.expect(Tok::Equals)?;
                    let y = self.variable()?;
                    Ok(Formula::Eq(x, y))
                }
            }
            other => self.error(format!("expected a formula, found {other}")),
        }
    }
}

fn parse_with_free(text: &str) -> Result<(Formula, Vec<(Var, Position)>), ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
        scope: Vec::new(),
        free: Vec::new(),
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return p.error(format!("unexpected {} after formula", p.peek()));
    }
    Ok((f, p.free))
}

/// Parses a formula; free variables are allowed.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parse_with_free(text).map(|(f, _)| f)
}

/// Parses a formula whose free variables must all be among `allowed`.
pub fn parse_formula_with_free(text: &str, allowed: &[Var]) -> Result<Formula, ParseError> {
    let (f, free) = parse_with_free(text)?;
    if let Some((v, position)) = free.into_iter().find(|(v, _)| !allowed.contains(v)) {
        return Err(ParseError {
            position,
            kind: ParseErrorKind::UnboundVariable(v.name().to_string()),
        });
    }
    Ok(f)
}

/// Parses a sentence (no free variables).
pub fn parse_sentence(text: &str) -> Result<Formula, ParseError> {
    parse_formula_with_free(text, &[])
}
