//! Concrete text syntax for formulas.
//!
//! ```text
//! formula := quant | implied
//! quant   := ("exists" | "forall" | "nu") IDENT "." formula
//! implied := ored ("->" implied)?
//! ored    := anded ("|" anded)*
//! anded   := unary ("&" unary)*
//! unary   := "~" unary | "[]" unary | "<>" unary | "U" unary | "E" unary
//!          | "<" EVENT ">" unary | "[!" formula "]" unary | "<!" formula ">" unary
//!          | atom
//! atom    := "true" | "false" | IDENT | NOMINAL | "(" formula ")"
//! ```
//!
//! Identifiers start with a lowercase letter; `j` followed only by digits is
//! a nominal. Generated names of the form `_f<digits>` are accepted so that
//! translator output can be read back. The printer fully parenthesises
//! binary connectives and wraps quantifiers appearing as operands.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::syntax::{Formula, SyntaxError, FRESH_PREFIX};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {}, offset {}: expected {}, found {found}", span.line, span.start, expected.join(" or "))]
    Unexpected {
        found: String,
        expected: Vec<&'static str>,
        span: SourceSpan,
    },
    #[error("line {}, offset {}: invalid token `{text}`", span.line, span.start)]
    InvalidToken { text: String, span: SourceSpan },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nominal(usize),
    Exists,
    Forall,
    Nu,
    True,
    False,
    Global,
    ExistsGlobal,
    Dot,
    Tilde,
    BoxOp,
    DiamondOp,
    Lt,
    Gt,
    AnnounceBox,
    AnnounceDiamond,
    RBracket,
    LParen,
    RParen,
    Amp,
    Bar,
    Arrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Nominal(i) => alloc::format!("j{i}"),
            Tok::Exists => "exists".into(),
            Tok::Forall => "forall".into(),
            Tok::Nu => "nu".into(),
            Tok::True => "true".into(),
            Tok::False => "false".into(),
            Tok::Global => "U".into(),
            Tok::ExistsGlobal => "E".into(),
            Tok::Dot => ".".into(),
            Tok::Tilde => "~".into(),
            Tok::BoxOp => "[]".into(),
            Tok::DiamondOp => "<>".into(),
            Tok::Lt => "<".into(),
            Tok::Gt => ">".into(),
            Tok::AnnounceBox => "[!".into(),
            Tok::AnnounceDiamond => "<!".into(),
            Tok::RBracket => "]".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Amp => "&".into(),
            Tok::Bar => "|".into(),
            Tok::Arrow => "->".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    1 + text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
}

fn span(text: &str, start: usize, end: usize) -> SourceSpan {
    SourceSpan {
        start,
        end,
        line: line_of(text, start),
    }
}

fn is_fresh_name(s: &str) -> bool {
    s.strip_prefix(FRESH_PREFIX)
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

fn is_nominal_name(s: &str) -> bool {
    s.strip_prefix('j')
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// True if `s` may be used as a proposition or event name.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    (first.is_ascii_lowercase() || is_fresh_name(s))
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_nominal_name(s)
        && !matches!(s, "exists" | "forall" | "nu" | "true" | "false")
}

fn lex(text: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = |a: u8, b: u8| c == a && bytes.get(i + 1) == Some(&b);
        let (tok, len) = if two(b'[', b']') {
            (Tok::BoxOp, 2)
        } else if two(b'[', b'!') {
            (Tok::AnnounceBox, 2)
        } else if two(b'<', b'>') {
            (Tok::DiamondOp, 2)
        } else if two(b'<', b'!') {
            (Tok::AnnounceDiamond, 2)
        } else if two(b'-', b'>') {
            (Tok::Arrow, 2)
        } else {
            match c {
                b'<' => (Tok::Lt, 1),
                b'>' => (Tok::Gt, 1),
                b']' => (Tok::RBracket, 1),
                b'(' => (Tok::LParen, 1),
                b')' => (Tok::RParen, 1),
                b'&' => (Tok::Amp, 1),
                b'|' => (Tok::Bar, 1),
                b'~' => (Tok::Tilde, 1),
                b'.' => (Tok::Dot, 1),
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let mut j = i;
                    while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                        j += 1;
                    }
                    let word = &text[i..j];
                    let tok = match word {
                        "exists" => Tok::Exists,
                        "forall" => Tok::Forall,
                        "nu" => Tok::Nu,
                        "true" => Tok::True,
                        "false" => Tok::False,
                        "U" => Tok::Global,
                        "E" => Tok::ExistsGlobal,
                        w if is_nominal_name(w) => match w[1..].parse() {
                            Ok(n) => Tok::Nominal(n),
                            Err(_) => {
                                return Err(ParseError::InvalidToken {
                                    text: w.to_owned(),
                                    span: span(text, i, j),
                                })
                            }
                        },
                        w if is_identifier(w) => Tok::Ident(w.to_owned()),
                        w => {
                            return Err(ParseError::InvalidToken {
                                text: w.to_owned(),
                                span: span(text, i, j),
                            })
                        }
                    };
                    (tok, j - i)
                }
                _ => {
                    let ch = text[i..].chars().next().unwrap_or('?');
                    return Err(ParseError::InvalidToken {
                        text: ch.to_string(),
                        span: span(text, i, i + ch.len_utf8()),
                    });
                }
            }
        };
        i += len;
        toks.push((tok, span(text, start, i)));
    }
    toks.push((Tok::Eof, span(text, text.len(), text.len())));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        let (tok, span) = &self.toks[self.pos];
        ParseError::Unexpected {
            found: tok.describe(),
            expected: expected.to_vec(),
            span: *span,
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn ident(&mut self, what: &'static str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let binder = match self.peek() {
            Tok::Exists => Formula::ExistsProp as fn(String, Box<Formula>) -> Formula,
            Tok::Forall => Formula::ForallProp,
            Tok::Nu => Formula::Nu,
            _ => return self.implied(),
        };
        self.bump();
        let var = self.ident("identifier")?;
        self.expect(Tok::Dot, ".")?;
        let body = self.formula()?;
        Ok(binder(var, Box::new(body)))
    }

    fn implied(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.ored()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implied()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn ored(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.anded()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.anded()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn anded(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::BoxOp => {
                self.bump();
                Ok(Formula::boxed(self.unary()?))
            }
            Tok::DiamondOp => {
                self.bump();
                Ok(Formula::diamond(self.unary()?))
            }
            Tok::Global => {
                self.bump();
                Ok(Formula::global(self.unary()?))
            }
            Tok::ExistsGlobal => {
                self.bump();
                Ok(Formula::exists_global(self.unary()?))
            }
            Tok::Lt => {
                self.bump();
                let event = self.ident("event name")?;
                self.expect(Tok::Gt, ">")?;
                Ok(Formula::action(event, self.unary()?))
            }
            Tok::AnnounceDiamond => {
                self.bump();
                let announced = self.formula()?;
                self.expect(Tok::Gt, ">")?;
                Ok(Formula::announce(announced, self.unary()?))
            }
            Tok::AnnounceBox => {
                self.bump();
                let announced = self.formula()?;
                self.expect(Tok::RBracket, "]")?;
                let body = self.unary()?;
                Ok(Formula::not(Formula::announce(announced, Formula::not(body))))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Formula::Top)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::Bottom)
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Formula::Atom(s))
            }
            Tok::Nominal(i) => {
                self.bump();
                Ok(Formula::Nominal(i))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, ")")?;
                Ok(f)
            }
            _ => Err(self.unexpected(&[
                "true", "false", "identifier", "nominal", "(", "~", "[]", "<>", "U", "E", "<", "[!", "<!",
            ])),
        }
    }
}

/// Parses a formula and checks fixpoint positivity.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected(&["end of input", "&", "|", "->"]));
    }
    f.check_positivity()?;
    Ok(f)
}

/// Canonical text form; `parse_formula(&print_formula(f)) == Ok(f)`.
pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}

fn is_quantifier(f: &Formula) -> bool {
    matches!(f, Formula::ExistsProp(..) | Formula::ForallProp(..) | Formula::Nu(..))
}

struct Operand<'a>(&'a Formula);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if is_quantifier(self.0) {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(p) => f.write_str(p),
            Formula::Nominal(i) => write!(f, "j{i}"),
            Formula::Top => f.write_str("true"),
            Formula::Bottom => f.write_str("false"),
            Formula::Not(a) => write!(f, "~{}", Operand(a)),
            Formula::Box(a) => write!(f, "[] {}", Operand(a)),
            Formula::Diamond(a) => write!(f, "<> {}", Operand(a)),
            Formula::Global(a) => write!(f, "U {}", Operand(a)),
            Formula::ExistsGlobal(a) => write!(f, "E {}", Operand(a)),
            Formula::ActionDiamond(e, a) => write!(f, "<{e}> {}", Operand(a)),
            Formula::Announce(a, b) => write!(f, "<!{a}> {}", Operand(b)),
            Formula::And(l, r) => write!(f, "({} & {})", Operand(l), Operand(r)),
            Formula::Or(l, r) => write!(f, "({} | {})", Operand(l), Operand(r)),
            Formula::Implies(l, r) => write!(f, "({} -> {})", Operand(l), Operand(r)),
            Formula::ExistsProp(v, a) => write!(f, "exists {v}. {a}"),
            Formula::ForallProp(v, a) => write!(f, "forall {v}. {a}"),
            Formula::Nu(v, a) => write!(f, "nu {v}. {a}"),
        }
    }
}
