//! Extension computation for the epistemic language.
//!
//! Everything is computed on whole extensions (bitsets over points) rather
//! than point by point. `K_i` is a pass over agent i's local-state classes;
//! the three common-knowledge operators are greatest fixed points of
//! `X ↦ Op_G(φ ∧ X)` iterated down from the full point set.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::formula::{Formula, Group};
use crate::error::{Error, Result};
use crate::model::{Event, InterpretedSystem, Point};
use crate::partition::reachability_partition;

/// Timing discipline shared by the fixed-point engines and coordination
/// checks: simultaneous, within an ε window of the same run, or somewhere
/// in the same run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Perfect,
    Eps(u32),
    Eventual,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Perfect => f.write_str("perfect"),
            Mode::Eps(e) => write!(f, "eps:{e}"),
            Mode::Eventual => f.write_str("eventual"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(Mode::Perfect),
            "eventual" => Ok(Mode::Eventual),
            _ => s
                .strip_prefix("eps:")
                .and_then(|n| n.parse().ok())
                .map(Mode::Eps)
                .ok_or_else(|| {
                    Error::InvalidConfig(format!("mode {s:?} is not perfect, eps:N or eventual"))
                }),
        }
    }
}

/// The event of a formula holding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub formula: Formula,
    pub points: Event,
}

/// Evaluates formulas against one system, memoizing subformula extensions.
pub struct Checker<'s> {
    sys: &'s InterpretedSystem,
    cache: HashMap<Formula, Event>,
}

impl<'s> Checker<'s> {
    pub fn new(sys: &'s InterpretedSystem) -> Self {
        Checker {
            sys,
            cache: HashMap::new(),
        }
    }

    pub fn system(&self) -> &'s InterpretedSystem {
        self.sys
    }

    pub fn eval(&mut self, f: &Formula, p: Point) -> Result<bool> {
        self.sys.check_point(p)?;
        let ext = self.extension(f)?;
        Ok(ext.contains(self.sys.index_of(p)))
    }

    pub fn extension(&mut self, f: &Formula) -> Result<Event> {
        if let Some(e) = self.cache.get(f) {
            return Ok(e.clone());
        }
        let e = self.compute(f)?;
        self.cache.insert(f.clone(), e.clone());
        Ok(e)
    }

    fn agents_of(&self, g: &Group) -> Result<Vec<usize>> {
        g.iter().map(|a| self.sys.agent_index(a)).collect()
    }

    fn compute(&mut self, f: &Formula) -> Result<Event> {
        let sys = self.sys;
        let n = sys.num_points();
        Ok(match f {
            Formula::True => Event::full(n),
            Formula::False => Event::empty(n),
            Formula::Atom(p) => {
                let pi = sys.prop_index(p)?;
                Event::from_indices(n, (0..n).filter(|&i| sys.prop_holds(pi, i)))
            }
            Formula::EventAtom { event, .. } => {
                sys.check_event(event)?;
                event.clone()
            }
            Formula::Not(g) => self.extension(g)?.complement(),
            Formula::And(a, b) => self.extension(a)?.intersection(&self.extension(b)?),
            Formula::Or(a, b) => self.extension(a)?.union(&self.extension(b)?),
            Formula::Implies(a, b) => self.extension(a)?.complement().union(&self.extension(b)?),
            Formula::K(a, g) => {
                let i = sys.agent_index(a)?;
                let x = self.extension(g)?;
                knows(sys, i, &x)
            }
            Formula::E(gr, g) => {
                let agents = self.agents_of(gr)?;
                let x = self.extension(g)?;
                everyone(sys, &agents, &x)
            }
            Formula::Ek(gr, k, g) => {
                let agents = self.agents_of(gr)?;
                let mut x = self.extension(g)?;
                for _ in 0..*k {
                    x = everyone(sys, &agents, &x);
                }
                x
            }
            Formula::Eeps(gr, eps, g) => {
                let agents = self.agents_of(gr)?;
                let x = self.extension(g)?;
                everyone_within(sys, &agents, *eps, &x)
            }
            Formula::Ediamond(gr, g) => {
                let agents = self.agents_of(gr)?;
                let x = self.extension(g)?;
                everyone_eventually(sys, &agents, &x)
            }
            Formula::C(gr, g) => self.gfp(gr, Mode::Perfect, g)?,
            Formula::Ceps(gr, eps, g) => self.gfp(gr, Mode::Eps(*eps), g)?,
            Formula::Cdiamond(gr, g) => self.gfp(gr, Mode::Eventual, g)?,
        })
    }

    /// Greatest fixed point of `X ↦ Op_G(f ∧ X)` where `Op` is `E_G`,
    /// `E^ε_G` or `E^◇_G` according to `mode`.
    pub fn gfp(&mut self, group: &Group, mode: Mode, f: &Formula) -> Result<Event> {
        let agents = self.agents_of(group)?;
        let body = self.extension(f)?;
        let sys = self.sys;
        let mut x = Event::full(sys.num_points());
        let mut rounds = 0usize;
        loop {
            let arg = body.intersection(&x);
            let next = match mode {
                Mode::Perfect => everyone(sys, &agents, &arg),
                Mode::Eps(eps) => everyone_within(sys, &agents, eps, &arg),
                Mode::Eventual => everyone_eventually(sys, &agents, &arg),
            };
            rounds += 1;
            if next == x {
                break;
            }
            debug_assert!(next.is_subset(&x), "fixed-point iteration must decrease");
            x = next;
        }
        debug_assert!(rounds <= sys.num_points() + 1);
        Ok(x)
    }
}

/// `K_i X`: every point of a ~_i class is in X.
pub(crate) fn knows(sys: &InterpretedSystem, agent: usize, x: &Event) -> Event {
    let mut out = Event::empty(sys.num_points());
    for l in 0..sys.num_labels(agent) {
        let members = sys.label_members(agent, l as u32);
        if members.iter().all(|&i| x.contains(i)) {
            for &i in members {
                out.insert(i);
            }
        }
    }
    out
}

pub(crate) fn everyone(sys: &InterpretedSystem, agents: &[usize], x: &Event) -> Event {
    let mut out = Event::full(sys.num_points());
    for &i in agents {
        out.intersect_with(&knows(sys, i, x));
    }
    out
}

/// Marks every time that lies in some window where each agent's event has a
/// member. Windows are `[w, w+ε] ∩ [0, T]` within a single run.
pub(crate) fn windows_covering(sys: &InterpretedSystem, per_agent: &[Event], eps: u32) -> Event {
    let horizon = sys.horizon();
    let width = (eps as usize).min(horizon);
    let mut out = Event::empty(sys.num_points());
    for r in 0..sys.runs().len() {
        let base = sys.run_indices(r).start;
        for w in 0..=horizon - width {
            let window = base + w..base + w + width + 1;
            if per_agent.iter().all(|e| e.any_in(window.clone())) {
                for idx in window {
                    out.insert(idx);
                }
            }
        }
    }
    out
}

pub(crate) fn everyone_within(
    sys: &InterpretedSystem,
    agents: &[usize],
    eps: u32,
    x: &Event,
) -> Event {
    let known: Vec<Event> = agents.iter().map(|&i| knows(sys, i, x)).collect();
    windows_covering(sys, &known, eps)
}

/// Whole runs in which every agent's event has some member.
pub(crate) fn runs_covering(sys: &InterpretedSystem, per_agent: &[Event]) -> Event {
    let mut out = Event::empty(sys.num_points());
    for r in 0..sys.runs().len() {
        let range = sys.run_indices(r);
        if per_agent.iter().all(|e| e.any_in(range.clone())) {
            for idx in range {
                out.insert(idx);
            }
        }
    }
    out
}

pub(crate) fn everyone_eventually(sys: &InterpretedSystem, agents: &[usize], x: &Event) -> Event {
    let known: Vec<Event> = agents.iter().map(|&i| knows(sys, i, x)).collect();
    runs_covering(sys, &known)
}

pub fn eval(sys: &InterpretedSystem, f: &Formula, p: Point) -> Result<bool> {
    Checker::new(sys).eval(f, p)
}

pub fn extension(sys: &InterpretedSystem, f: &Formula) -> Result<Extension> {
    let points = Checker::new(sys).extension(f)?;
    Ok(Extension {
        formula: f.clone(),
        points,
    })
}

pub fn gfp_extension(
    sys: &InterpretedSystem,
    group: &Group,
    mode: Mode,
    f: &Formula,
) -> Result<Extension> {
    let points = Checker::new(sys).gfp(group, mode, f)?;
    let formula = match mode {
        Mode::Perfect => Formula::common(group.clone(), f.clone()),
        Mode::Eps(e) => Formula::common_eps(group.clone(), e, f.clone()),
        Mode::Eventual => Formula::common_eventually(group.clone(), f.clone()),
    };
    Ok(Extension { formula, points })
}

/// `C_G f` by reachability: f must hold on the whole G-reachability class.
pub fn ck_via_closure(sys: &InterpretedSystem, group: &Group, f: &Formula) -> Result<Extension> {
    let body = Checker::new(sys).extension(f)?;
    let partition = reachability_partition(sys, group)?;
    let mut points = Event::empty(sys.num_points());
    for class in &partition.classes {
        if class.is_subset(&body) {
            points.union_with(class);
        }
    }
    Ok(Extension {
        formula: Formula::common(group.clone(), f.clone()),
        points,
    })
}

/// Extension of `E_G^k f`; `k = 0` is `f` itself.
pub fn iterated_everyone(
    sys: &InterpretedSystem,
    group: &Group,
    f: &Formula,
    k: u32,
) -> Result<Extension> {
    let formula = Formula::everyone_k(group.clone(), k, f.clone());
    let points = Checker::new(sys).extension(&formula)?;
    Ok(Extension { formula, points })
}

/// Iterates `E_G` from `f` until `E^k f = E^{k+1} f`; returns that `k` and
/// the stable extension.
pub fn stabilized_everyone(
    sys: &InterpretedSystem,
    group: &Group,
    f: &Formula,
) -> Result<(u32, Event)> {
    let mut checker = Checker::new(sys);
    let agents = group
        .iter()
        .map(|a| sys.agent_index(a))
        .collect::<Result<Vec<_>>>()?;
    let mut x = checker.extension(f)?;
    let mut k = 0u32;
    loop {
        let next = everyone(sys, &agents, &x);
        if next == x {
            return Ok((k, x));
        }
        x = next;
        k += 1;
    }
}
