use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{AgentId, Event};

/// A nonempty set of agents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Group(BTreeSet<AgentId>);

impl Group {
    pub fn new(agents: impl IntoIterator<Item = AgentId>) -> Result<Self> {
        let set: BTreeSet<AgentId> = agents.into_iter().collect();
        if set.is_empty() {
            return Err(Error::InvalidGroup("empty group".into()));
        }
        Ok(Group(set))
    }

    /// Builds a group from names, e.g. `Group::of(&["A", "B"])`.
    pub fn of<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let agents = names
            .iter()
            .map(|n| AgentId::new(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Group::new(agents)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AgentId> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: &AgentId) -> bool {
        self.0.contains(a)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

/// Parses the `{a,b}` group syntax used on the command line.
impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| Error::InvalidGroup(format!("{s:?} is not of the form {{a,b}}")))?;
        let names: Vec<&str> = inner
            .split(',')
            .map(str::trim)
            .filter(|n| !n.is_empty())
            .collect();
        Group::of(&names)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String),
    /// A proposition that holds exactly on a given event (a ψ_e proposition).
    EventAtom {
        name: String,
        event: Event,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    K(AgentId, Box<Formula>),
    E(Group, Box<Formula>),
    Ek(Group, u32, Box<Formula>),
    C(Group, Box<Formula>),
    Eeps(Group, u32, Box<Formula>),
    Ceps(Group, u32, Box<Formula>),
    Ediamond(Group, Box<Formula>),
    Cdiamond(Group, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn event_atom(name: impl Into<String>, event: Event) -> Self {
        Formula::EventAtom {
            name: name.into(),
            event,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    pub fn knows(agent: AgentId, f: Formula) -> Self {
        Formula::K(agent, Box::new(f))
    }

    pub fn everyone(group: Group, f: Formula) -> Self {
        Formula::E(group, Box::new(f))
    }

    pub fn everyone_k(group: Group, k: u32, f: Formula) -> Self {
        Formula::Ek(group, k, Box::new(f))
    }

    pub fn common(group: Group, f: Formula) -> Self {
        Formula::C(group, Box::new(f))
    }

    pub fn everyone_eps(group: Group, eps: u32, f: Formula) -> Self {
        Formula::Eeps(group, eps, Box::new(f))
    }

    pub fn common_eps(group: Group, eps: u32, f: Formula) -> Self {
        Formula::Ceps(group, eps, Box::new(f))
    }

    pub fn everyone_eventually(group: Group, f: Formula) -> Self {
        Formula::Ediamond(group, Box::new(f))
    }

    pub fn common_eventually(group: Group, f: Formula) -> Self {
        Formula::Cdiamond(group, Box::new(f))
    }

    /// Modal nesting plus connective depth; atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) | Formula::EventAtom { .. } => 0,
            Formula::Not(f)
            | Formula::K(_, f)
            | Formula::E(_, f)
            | Formula::Ek(_, _, f)
            | Formula::C(_, f)
            | Formula::Eeps(_, _, f)
            | Formula::Ceps(_, _, f)
            | Formula::Ediamond(_, f)
            | Formula::Cdiamond(_, f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            _ => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            f.write_str("(")?;
            self.fmt_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(p) => f.write_str(p),
            Formula::EventAtom { name, .. } => f.write_str(name),
            Formula::Not(g) => {
                f.write_str("!")?;
                g.fmt_at(f, 4)
            }
            // & and | are left-associative, -> is right-associative
            Formula::And(a, b) => {
                a.fmt_at(f, 3)?;
                f.write_str(" & ")?;
                b.fmt_at(f, 4)
            }
            Formula::Or(a, b) => {
                a.fmt_at(f, 2)?;
                f.write_str(" | ")?;
                b.fmt_at(f, 3)
            }
            Formula::Implies(a, b) => {
                a.fmt_at(f, 2)?;
                f.write_str(" -> ")?;
                b.fmt_at(f, 1)
            }
            Formula::K(a, g) => {
                write!(f, "K[{a}] ")?;
                g.fmt_at(f, 4)
            }
            Formula::E(gr, g) => {
                write!(f, "E[{gr}] ")?;
                g.fmt_at(f, 4)
            }
            Formula::Ek(gr, k, g) => {
                write!(f, "Ek[{gr},{k}] ")?;
                g.fmt_at(f, 4)
            }
            Formula::C(gr, g) => {
                write!(f, "C[{gr}] ")?;
                g.fmt_at(f, 4)
            }
            Formula::Eeps(gr, e, g) => {
                write!(f, "Ee[{gr},{e}] ")?;
                g.fmt_at(f, 4)
            }
            Formula::Ceps(gr, e, g) => {
                write!(f, "Ce[{gr},{e}] ")?;
                g.fmt_at(f, 4)
            }
            Formula::Ediamond(gr, g) => {
                write!(f, "Ed[{gr}] ")?;
                g.fmt_at(f, 4)
            }
            Formula::Cdiamond(gr, g) => {
                write!(f, "Cd[{gr}] ")?;
                g.fmt_at(f, 4)
            }
        }
    }
}

/// Canonical text; `parse_formula(&f.to_string())` gives back `f` for
/// formulas without event atoms.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

pub fn format_formula(f: &Formula) -> String {
    f.to_string()
}
