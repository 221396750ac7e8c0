//! Recursive-descent parser for the formula syntax.
//!
//! ```text
//! imp   := or ("->" imp)?
//! or    := and ("|" and)*
//! and   := unary ("&" unary)*
//! unary := "!" unary | prefix unary | "(" imp ")" | "true" | "false" | ident
//! prefix := "K[" agent "]" | "E[" group "]" | "Ek[" group "," nat "]"
//!         | "C[" group "]" | "Ee[" group "," nat "]" | "Ce[" group "," nat "]"
//!         | "Ed[" group "]" | "Cd[" group "]"
//! ```

use std::fmt;

use super::formula::{Formula, Group};
use crate::model::AgentId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the input.
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at offset {}: {}",
            self.offset, self.message
        )
    }
}

impl std::error::Error for ParseError {}

type PResult<T> = Result<T, ParseError>;

fn is_ident_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'@' | b'.' | b'\'')
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, offset: usize, message: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            offset,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token.as_bytes()) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> PResult<()> {
        if self.eat(token) {
            Ok(())
        } else {
            let found = self.describe_here();
            self.err(self.pos, format!("expected {token:?}, found {found}"))
        }
    }

    fn describe_here(&self) -> String {
        match self.src.get(self.pos) {
            None => "end of input".to_string(),
            Some(_) => {
                let rest = String::from_utf8_lossy(&self.src[self.pos..]);
                format!("{:?}", rest.chars().next().unwrap_or('?'))
            }
        }
    }

    fn ident(&mut self) -> PResult<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && is_ident_byte(self.src[self.pos]) {
            self.pos += 1;
        }
        if self.pos == start {
            let found = self.describe_here();
            return self.err(start, format!("expected identifier, found {found}"));
        }
        // only ASCII bytes were consumed
        Ok((
            start,
            std::str::from_utf8(&self.src[start..self.pos]).unwrap(),
        ))
    }

    fn agent(&mut self) -> PResult<AgentId> {
        let (start, name) = self.ident()?;
        AgentId::new(name).or_else(|_| self.err(start, format!("invalid agent {name:?}")))
    }

    fn group(&mut self) -> PResult<Group> {
        self.skip_ws();
        let start = self.pos;
        self.expect("{")?;
        if self.peek() == Some(b'}') {
            return self.err(start, "empty group");
        }
        let mut agents = vec![self.agent()?];
        while self.eat(",") {
            let at = {
                self.skip_ws();
                self.pos
            };
            let a = self.agent()?;
            if agents.contains(&a) {
                return self.err(at, format!("duplicate agent {a} in group"));
            }
            agents.push(a);
        }
        self.expect("}")?;
        Ok(Group::new(agents).expect("nonempty"))
    }

    fn nat(&mut self) -> PResult<u32> {
        self.skip_ws();
        let start = self.pos;
        if self.src.get(self.pos) == Some(&b'-') {
            return self.err(start, "negative parameter");
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            let found = self.describe_here();
            return self.err(start, format!("expected natural number, found {found}"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse()
            .or_else(|_| self.err(start, format!("number {text} out of range")))
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = self.implication()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.conjunction()?;
        while self.eat("|") {
            let rhs = self.conjunction()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while self.eat("&") {
            let rhs = self.unary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek() {
            None => {
                let at = self.pos;
                self.err(at, "expected formula, found end of input")
            }
            Some(b'!') => {
                self.pos += 1;
                Ok(self.unary()?.not())
            }
            Some(b'(') => {
                self.pos += 1;
                let f = self.implication()?;
                self.expect(")")?;
                Ok(f)
            }
            Some(b) if is_ident_byte(b) => {
                let (start, name) = self.ident()?;
                if self.src.get(self.pos) == Some(&b'[') {
                    self.pos += 1;
                    return self.modal(start, name);
                }
                Ok(match name {
                    "true" => Formula::True,
                    "false" => Formula::False,
                    _ => Formula::Atom(name.to_string()),
                })
            }
            Some(_) => {
                let at = self.pos;
                let found = self.describe_here();
                self.err(at, format!("expected formula, found {found}"))
            }
        }
    }

    /// Called with the opening `[` consumed.
    fn modal(&mut self, start: usize, op: &str) -> PResult<Formula> {
        let f = match op {
            "K" => {
                let a = self.agent()?;
                self.expect("]")?;
                Formula::knows(a, self.unary()?)
            }
            "E" | "C" | "Ed" | "Cd" => {
                let g = self.group()?;
                self.expect("]")?;
                let body = self.unary()?;
                match op {
                    "E" => Formula::everyone(g, body),
                    "C" => Formula::common(g, body),
                    "Ed" => Formula::everyone_eventually(g, body),
                    _ => Formula::common_eventually(g, body),
                }
            }
            "Ek" | "Ee" | "Ce" => {
                let g = self.group()?;
                self.expect(",")?;
                let n = self.nat()?;
                self.expect("]")?;
                let body = self.unary()?;
                match op {
                    "Ek" => Formula::everyone_k(g, n, body),
                    "Ee" => Formula::everyone_eps(g, n, body),
                    _ => Formula::common_eps(g, n, body),
                }
            }
            _ => return self.err(start, format!("unknown operator {op:?}")),
        };
        Ok(f)
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let f = p.implication()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        let found = p.describe_here();
        return p.err(p.pos, format!("unexpected {found}"));
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}
