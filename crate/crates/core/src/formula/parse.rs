use std::collections::BTreeSet;
use std::fmt;

use super::{Formula, GroupRef, Var};
use crate::error::Error;
use crate::model::CheckedModel;

/// A syntax error, located by byte offset and by 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at line {}, column {}: expected {}, found {}",
            self.line, self.column, self.expected, self.found
        )
    }
}

impl std::error::Error for ParseError {}

/// Parses `text` and resolves every name against `m`.
pub fn parse(text: &str, m: &CheckedModel) -> Result<Formula, Error> {
    parse_unresolved(text)?.resolve(m)
}

/// Parses `text` without consulting a model. Group references are left as
/// written: `{X}` is `Named`, `{X,Y}` is `Agents`.
pub fn parse_unresolved(text: &str) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        text,
        tokens,
        pos: 0,
    };
    let f = p.implication()?;
    match p.peek() {
        None => Ok(f),
        Some(_) => Err(p.error("end of input")),
    }
}

/// Parses a group reference on its own: `S`, `Y,Z`, `{S}` or `{Y,Z}`.
pub fn parse_group(text: &str) -> Result<GroupRef, ParseError> {
    let trimmed = text.trim();
    let braced = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        format!("{{{trimmed}}}")
    };
    let shift = if trimmed.starts_with('{') { 0 } else { 1 };
    let relocate = |mut e: ParseError| {
        e.offset = e.offset.saturating_sub(shift).min(trimmed.len());
        let (line, column) = position(trimmed, e.offset);
        e.line = line;
        e.column = column;
        e
    };
    let tokens = lex(&braced).map_err(relocate)?;
    let mut p = Parser {
        text: &braced,
        tokens,
        pos: 0,
    };
    let g = p.group().map_err(relocate)?;
    match p.peek() {
        None => Ok(g),
        Some(_) => Err(relocate(p.error("end of input"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Sym(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "`{w}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
        }
    }
}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

fn make_error(text: &str, offset: usize, expected: &str, found: String) -> ParseError {
    let (line, column) = position(text, offset);
    ParseError {
        offset,
        line,
        column,
        expected: expected.to_string(),
        found,
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    const SYMBOLS: [&str; 13] = [
        "->", "(", ")", "{", "}", "[", "]", ",", ":", "=", "!", "&", "|",
    ];
    let mut out = Vec::new();
    let mut i = 0;
    let bytes = text.as_bytes();
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Word(text[start..i].to_string())));
        } else if let Some(sym) = SYMBOLS.iter().find(|s| text[i..].starts_with(**s)) {
            out.push((i, Tok::Sym(sym)));
            i += sym.len();
        } else {
            let ch = text[i..].chars().next().expect("in bounds");
            return Err(make_error(
                text,
                i,
                "a formula token",
                format!("character `{ch}`"),
            ));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    text: &'a str,
    tokens: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.pos + k).map(|(_, t)| t)
    }

    fn error(&self, expected: &str) -> ParseError {
        let (offset, found) = match self.tokens.get(self.pos) {
            Some((o, t)) => (*o, t.to_string()),
            None => (self.text.len(), "end of input".to_string()),
        };
        make_error(self.text, offset, expected, found)
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.error(&format!("`{s}`")))
        }
    }

    fn word(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.error(what)),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        let save = self.pos;
        let w = self.word(what)?;
        if crate::model::is_identifier(&w) {
            Ok(w)
        } else {
            self.pos = save;
            Err(self.error(what))
        }
    }

    // implication := disjunction ("->" implication)?
    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.conjunction()?;
        while self.eat("|") {
            let rhs = self.conjunction()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut f = self.unary()?;
        while self.eat("&") {
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat("!") {
            Ok(Formula::not(self.unary()?))
        } else {
            self.primary()
        }
    }

    fn argument(&mut self) -> Result<Formula, ParseError> {
        self.expect("(")?;
        let f = self.implication()?;
        self.expect(")")?;
        Ok(f)
    }

    fn group(&mut self) -> Result<GroupRef, ParseError> {
        self.expect("{")?;
        let mut names = Vec::new();
        if !self.at_sym("}") {
            names.push(self.ident("an agent or group name")?);
            while self.eat(",") {
                names.push(self.ident("an agent name")?);
            }
        }
        self.expect("}")?;
        Ok(if names.len() == 1 {
            GroupRef::Named(names.pop().expect("one name"))
        } else {
            GroupRef::Agents(names.into_iter().collect::<BTreeSet<_>>())
        })
    }

    fn stamp(&mut self) -> Result<String, ParseError> {
        self.expect("[")?;
        match self.word("`t`")?.as_str() {
            "t" => {}
            _ => {
                self.pos -= 1;
                return Err(self.error("`t`"));
            }
        }
        self.expect(":")?;
        let name = self.ident("a time-stamp function name")?;
        self.expect("]")?;
        Ok(name)
    }

    fn value(&mut self) -> Result<String, ParseError> {
        self.expect("=")?;
        self.word("a value")
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        if self.at_sym("(") {
            return self.argument();
        }
        let Some(Tok::Word(w)) = self.peek().cloned() else {
            return Err(self.error("a formula"));
        };
        let next = match self.peek_at(1) {
            Some(Tok::Sym(s)) => Some(*s),
            _ => None,
        };
        if next == Some("=") {
            let name = self.ident("a variable name")?;
            let value = self.value()?;
            return Ok(Formula::Atom(Var::Named(name), value));
        }
        match (w.as_str(), next) {
            ("ACTING" | "SHOULD_ACT" | "MEMBER", Some("[")) => {
                self.pos += 2;
                let agent = self.ident("an agent name")?;
                self.expect("]")?;
                let g = self.group()?;
                let value = self.value()?;
                let var = match w.as_str() {
                    "ACTING" => Var::Acting(agent, g),
                    "SHOULD_ACT" => Var::ShouldAct(agent, g),
                    _ => Var::Member(agent, g),
                };
                Ok(Formula::Atom(var, value))
            }
            ("E" | "C", Some("[")) => {
                self.pos += 1;
                let stamp = self.stamp()?;
                let g = self.group()?;
                let f = self.argument()?;
                Ok(if w == "E" {
                    Formula::everyone_t(g, &stamp, f)
                } else {
                    Formula::common_t(g, &stamp, f)
                })
            }
            ("E" | "C" | "Ea" | "Ca", Some("{")) => {
                self.pos += 1;
                let g = self.group()?;
                let f = self.argument()?;
                Ok(match w.as_str() {
                    "E" => Formula::everyone(g, f),
                    "C" => Formula::common(g, f),
                    "Ea" => Formula::everyone_a(g, f),
                    _ => Formula::common_a(g, f),
                })
            }
            ("chi", Some("{")) => {
                self.pos += 1;
                Ok(Formula::Chi(self.group()?))
            }
            ("ALW", Some("(")) => {
                self.pos += 1;
                Ok(Formula::alw(self.argument()?))
            }
            (b, Some("(")) if b.starts_with("B_") && crate::model::is_identifier(&b[2..]) => {
                self.pos += 1;
                let agent = b[2..].to_string();
                Ok(Formula::believes(&agent, self.argument()?))
            }
            _ => {
                self.pos += 1;
                Err(self.error("`=` after a variable name"))
            }
        }
    }
}
