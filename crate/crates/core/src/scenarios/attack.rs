//! Coordinated attack: two generals, messengers, and decision tables keyed
//! on received-message history and round.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coordination::{build_ensemble, check_coordination};
use crate::error::{Error, Result};
use crate::logic::{Checker, Formula, Group, Mode};
use crate::model::{AgentId, Event, InterpretedSystem, Point, RunDesc, StateDesc, SystemDesc};

pub const GENERALS: [&str; 2] = ["A", "B"];
pub const DEFAULT_MAX_RUNS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Send,
    Attack,
    Wait,
    #[serde(rename = "send+attack")]
    SendAttack,
}

impl Action {
    pub fn sends(self) -> bool {
        matches!(self, Action::Send | Action::SendAttack)
    }

    pub fn attacks(self) -> bool {
        matches!(self, Action::Attack | Action::SendAttack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Channel {
    /// Each message arrives in the round it is sent, or is lost.
    #[default]
    Lossy,
    /// Each message arrives after 1..=eps rounds; nothing is lost.
    Bounded { eps: u32 },
}

pub type DecisionTable = BTreeMap<(String, u32), Action>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackProtocol {
    pub name: String,
    pub max_rounds: u32,
    pub channel: Channel,
    /// Indexed like [`GENERALS`].
    pub tables: [DecisionTable; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub history: String,
    pub round: u32,
    pub action: Action,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolFile {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    pub max_rounds: u32,
    #[serde(default)]
    pub channel: Channel,
    #[serde(rename = "A")]
    pub a: Vec<TableEntry>,
    #[serde(rename = "B")]
    pub b: Vec<TableEntry>,
}

/// Canonical history text: `label@round` entries sorted by round, then label.
pub fn history_key(received: &[(String, u32)]) -> String {
    let mut v: Vec<&(String, u32)> = received.iter().collect();
    v.sort_by(|x, y| (x.1, &x.0).cmp(&(y.1, &y.0)));
    v.iter()
        .map(|(l, r)| format!("{l}@{r}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Clone)]
struct Sim {
    received: [Vec<(String, u32)>; 2],
    acts: [Vec<String>; 2],
    attacked: [bool; 2],
    sent: [u32; 2],
    /// (arrival time, receiver, label)
    pending: Vec<(u32, usize, String)>,
    fates: Vec<String>,
    states: Vec<StateDesc>,
}

impl Sim {
    fn snapshot(&mut self, m: u32) {
        let mut locals = BTreeMap::new();
        let mut props = Vec::new();
        for g in 0..2 {
            locals.insert(
                GENERALS[g].to_string(),
                format!(
                    "t={m}|recv={}|acts={}",
                    history_key(&self.received[g]),
                    self.acts[g].join(",")
                ),
            );
            if self.attacked[g] {
                props.push(format!("attack_{}", GENERALS[g]));
            }
        }
        let env = format!("t={m}|{}", self.fates.join(","));
        self.states.push(StateDesc { env, locals, props });
    }

    fn deliver(&mut self, m: u32) {
        let (now, later): (Vec<_>, Vec<_>) = self.pending.drain(..).partition(|p| p.0 == m);
        self.pending = later;
        for (at, to, label) in now {
            self.received[to].push((label, at));
        }
    }
}

struct Finished {
    id: String,
    states: Vec<StateDesc>,
}

type Decide<'a> = dyn FnMut(usize, &str, u32) -> Result<Action> + 'a;

fn explore(
    max_rounds: u32,
    channel: Channel,
    decide: &mut Decide<'_>,
    sim: Sim,
    round: u32,
    out: &mut Vec<Finished>,
    budget: usize,
) -> Result<()> {
    if round > max_rounds {
        if out.len() >= budget {
            return Err(Error::Protocol(format!(
                "run enumeration exceeds the budget of {budget} runs"
            )));
        }
        out.push(Finished {
            id: format!("run({})", sim.fates.join(",")),
            states: sim.states,
        });
        return Ok(());
    }
    let mut base = sim;
    let mut outgoing = Vec::new();
    for g in 0..2 {
        let key = history_key(&base.received[g]);
        let action = decide(g, &key, round)?;
        if action.sends() {
            base.sent[g] += 1;
            let label = format!("{}{}", GENERALS[g], base.sent[g]);
            base.acts[g].push(format!("send@{round}"));
            outgoing.push((1 - g, label));
        }
        if action.attacks() && !base.attacked[g] {
            base.attacked[g] = true;
            base.acts[g].push(format!("attack@{round}"));
        }
    }

    // every combination of fates for this round's messages
    let options: Vec<(String, Option<u32>)> = match channel {
        Channel::Lossy => vec![("ok".into(), Some(round)), ("lost".into(), None)],
        Channel::Bounded { eps } => {
            let mut v: Vec<(String, Option<u32>)> = (1..=eps)
                .map(|d| round - 1 + d)
                .filter(|&at| at <= max_rounds)
                .map(|at| (format!("d{}", at + 1 - round), Some(at)))
                .collect();
            if round - 1 + eps > max_rounds {
                v.push(("late".into(), None));
            }
            v
        }
    };
    let mut branches = vec![base];
    for (to, label) in &outgoing {
        branches = branches
            .into_iter()
            .flat_map(|b| {
                options.iter().map(move |(fate, at)| {
                    let mut next = b.clone();
                    next.fates.push(format!("{label}={fate}"));
                    if let Some(at) = at {
                        next.pending.push((*at, *to, label.clone()));
                    }
                    next
                })
            })
            .collect();
    }
    for mut b in branches {
        b.deliver(round);
        b.snapshot(round);
        explore(max_rounds, channel, decide, b, round + 1, out, budget)?;
    }
    Ok(())
}

fn enumerate(
    max_rounds: u32,
    channel: Channel,
    decide: &mut Decide<'_>,
    budget: usize,
) -> Result<Vec<Finished>> {
    if max_rounds == 0 {
        return Err(Error::Protocol("max_rounds must be at least 1".into()));
    }
    if let Channel::Bounded { eps } = channel {
        if eps == 0 {
            return Err(Error::Protocol("bounded channel needs eps >= 1".into()));
        }
    }
    let mut start = Sim {
        received: [Vec::new(), Vec::new()],
        acts: [Vec::new(), Vec::new()],
        attacked: [false, false],
        sent: [0, 0],
        pending: Vec::new(),
        fates: Vec::new(),
        states: Vec::new(),
    };
    start.snapshot(0);
    let mut out = Vec::new();
    explore(max_rounds, channel, decide, start, 1, &mut out, budget)?;
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

impl AttackProtocol {
    /// Tabulates `f` over every history reachable under it.
    pub fn from_fn(
        name: impl Into<String>,
        max_rounds: u32,
        channel: Channel,
        mut f: impl FnMut(usize, &[(String, u32)], u32) -> Action,
    ) -> Result<Self> {
        let mut tables: [DecisionTable; 2] = [BTreeMap::new(), BTreeMap::new()];
        {
            let mut decide = |g: usize, key: &str, round: u32| -> Result<Action> {
                let parsed = parse_history(key)?;
                let a = f(g, &parsed, round);
                tables[g].insert((key.to_string(), round), a);
                Ok(a)
            };
            enumerate(max_rounds, channel, &mut decide, DEFAULT_MAX_RUNS)?;
        }
        let p = AttackProtocol {
            name: name.into(),
            max_rounds,
            channel,
            tables,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(Error::Protocol("max_rounds must be at least 1".into()));
        }
        if self.channel == Channel::Lossy {
            for (g, table) in self.tables.iter().enumerate() {
                for round in 1..=self.max_rounds {
                    if let Some(a) = table.get(&(String::new(), round)) {
                        if a.attacks() {
                            return Err(Error::Protocol(format!(
                                "general {} attacks in round {round} without having received \
                                 any message",
                                GENERALS[g]
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_file(file: &ProtocolFile) -> Result<Self> {
        let mut tables: [DecisionTable; 2] = [BTreeMap::new(), BTreeMap::new()];
        for (g, entries) in [&file.a, &file.b].into_iter().enumerate() {
            for e in entries {
                let key = history_key(&parse_history(&e.history)?);
                if let Some(prev) = tables[g].insert((key.clone(), e.round), e.action) {
                    if prev != e.action {
                        return Err(Error::Protocol(format!(
                            "general {} has two actions for history {key:?} in round {}",
                            GENERALS[g], e.round
                        )));
                    }
                }
            }
        }
        let p = AttackProtocol {
            name: if file.name.is_empty() {
                "custom".into()
            } else {
                file.name.clone()
            },
            max_rounds: file.max_rounds,
            channel: file.channel,
            tables,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ProtocolFile = serde_json::from_str(text)?;
        AttackProtocol::from_file(&file)
    }

    pub fn to_file(&self) -> ProtocolFile {
        let entries = |t: &DecisionTable| {
            t.iter()
                .map(|((h, r), a)| TableEntry {
                    history: h.clone(),
                    round: *r,
                    action: *a,
                })
                .collect()
        };
        ProtocolFile {
            name: self.name.clone(),
            max_rounds: self.max_rounds,
            channel: self.channel,
            a: entries(&self.tables[0]),
            b: entries(&self.tables[1]),
        }
    }
}

/// Inverse of [`history_key`].
pub fn parse_history(text: &str) -> Result<Vec<(String, u32)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|entry| {
            let (label, round) = entry
                .trim()
                .rsplit_once('@')
                .ok_or_else(|| Error::Protocol(format!("malformed history entry {entry:?}")))?;
            let round = round
                .parse()
                .map_err(|_| Error::Protocol(format!("malformed history entry {entry:?}")))?;
            Ok((label.to_string(), round))
        })
        .collect()
}

/// A sends once in round 1 and nobody ever attacks.
pub fn never_protocol() -> AttackProtocol {
    AttackProtocol::from_fn("never", 3, Channel::Lossy, |g, _, round| {
        if g == 0 && round == 1 {
            Action::Send
        } else {
            Action::Wait
        }
    })
    .expect("never protocol is valid")
}

/// A chain of k+1 messages alternating A, B, A, ... one per round; in round
/// k+2 each general attacks iff every chain message addressed to it arrived.
pub fn ack_protocol(k: u32) -> AttackProtocol {
    let chain = k + 1;
    let attack_round = k + 2;
    // chain messages j = 1..=chain; odd j go A -> B, even j go B -> A
    let addressed = move |g: usize, below: u32| -> usize {
        (1..below).filter(|j| (j % 2 == 1) == (g == 1)).count()
    };
    AttackProtocol::from_fn(
        format!("ack:{k}"),
        k + 3,
        Channel::Lossy,
        move |g, hist, round| {
            if round <= chain {
                let turn = if round % 2 == 1 { 0 } else { 1 };
                if g == turn && hist.len() == addressed(g, round) {
                    return Action::Send;
                }
                return Action::Wait;
            }
            if round == attack_round {
                let expected = addressed(g, chain + 1);
                if expected > 0 && hist.len() == expected {
                    return Action::Attack;
                }
            }
            Action::Wait
        },
    )
    .expect("ack protocol is valid")
}

/// Guaranteed delivery within `eps` rounds: A sends and attacks at once, B
/// attacks in the round after the message reaches it.
pub fn bounded_eps_protocol(eps: u32) -> Result<AttackProtocol> {
    if eps == 0 {
        return Err(Error::Protocol("bounded-eps needs eps >= 1".into()));
    }
    AttackProtocol::from_fn(
        format!("bounded-eps:{eps}"),
        eps + 2,
        Channel::Bounded { eps },
        |g, hist, round| match (g, round) {
            (0, 1) => Action::SendAttack,
            (1, _) if hist.len() == 1 && hist[0].1 + 1 == round => Action::Attack,
            _ => Action::Wait,
        },
    )
}

/// Resolves `never`, `ack:<k>`, `bounded-eps` (using `eps`) and
/// `bounded-eps:<eps>`.
pub fn builtin_protocol(name: &str, eps: u32) -> Result<AttackProtocol> {
    if name == "never" {
        return Ok(never_protocol());
    }
    if name == "bounded-eps" {
        return bounded_eps_protocol(eps);
    }
    if let Some(e) = name.strip_prefix("bounded-eps:") {
        let e = e
            .parse()
            .map_err(|_| Error::Protocol(format!("bad eps in {name:?}")))?;
        return bounded_eps_protocol(e);
    }
    if let Some(k) = name.strip_prefix("ack:") {
        let k: u32 = k
            .parse()
            .map_err(|_| Error::Protocol(format!("bad k in {name:?}")))?;
        if k > 8 {
            return Err(Error::Protocol("ack:k supports k <= 8".into()));
        }
        return Ok(ack_protocol(k));
    }
    Err(Error::Protocol(format!(
        "unknown protocol {name:?}; expected never, ack:<k> or bounded-eps"
    )))
}

pub fn attack_desc(protocol: &AttackProtocol) -> Result<SystemDesc> {
    protocol.validate()?;
    let mut decide = |g: usize, key: &str, round: u32| -> Result<Action> {
        protocol.tables[g]
            .get(&(key.to_string(), round))
            .copied()
            .ok_or_else(|| {
                Error::Protocol(format!(
                    "no action for general {} in round {round} with history {key:?}",
                    GENERALS[g]
                ))
            })
    };
    let runs = enumerate(
        protocol.max_rounds,
        protocol.channel,
        &mut decide,
        DEFAULT_MAX_RUNS,
    )?;
    let mut meta = BTreeMap::new();
    meta.insert("scenario".into(), "attack".into());
    meta.insert("protocol".into(), protocol.name.clone());
    meta.insert(
        "channel".into(),
        match protocol.channel {
            Channel::Lossy => "lossy".into(),
            Channel::Bounded { eps } => format!("bounded:{eps}"),
        },
    );
    Ok(SystemDesc {
        agents: GENERALS
            .iter()
            .map(|g| AgentId::new(*g))
            .collect::<Result<_>>()?,
        horizon: protocol.max_rounds as usize,
        propositions: vec!["attack_A".into(), "attack_B".into()],
        runs: runs
            .into_iter()
            .map(|f| RunDesc {
                id: f.id,
                states: f.states,
            })
            .collect(),
        meta,
    })
}

pub fn gen_attack(protocol: &AttackProtocol) -> Result<InterpretedSystem> {
    InterpretedSystem::build(&attack_desc(protocol)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttackReport {
    pub mode: String,
    pub attacks_ever: bool,
    pub coordinated: bool,
    pub ck_at_attack: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violating_run: Option<String>,
}

pub fn analyze_attack(sys: &InterpretedSystem, mode: Mode) -> Result<AttackReport> {
    let props: Vec<usize> = ["attack_A", "attack_B"]
        .iter()
        .map(|p| {
            sys.prop_index(p)
                .map_err(|_| Error::InvalidConfig(format!("system has no {p} proposition")))
        })
        .collect::<Result<_>>()?;
    let group = Group::of(&GENERALS)?;
    let mut events = BTreeMap::new();
    for (g, &prop) in GENERALS.iter().zip(&props) {
        let mut onset = Event::empty(sys.num_points());
        for idx in 0..sys.num_points() {
            let p = sys.point_at(idx);
            if sys.prop_holds(prop, idx) && (p.time == 0 || !sys.prop_holds(prop, idx - 1)) {
                onset.insert(idx);
            }
        }
        events.insert(AgentId::new(*g)?, onset);
    }
    let ens = build_ensemble(sys, "attack", &group, events)?;
    let attacks_ever = !ens.union().is_empty();
    let report = check_coordination(sys, &ens, mode);
    let violating_run = report
        .counterexample
        .as_ref()
        .and_then(|cx| cx.points.first())
        .map(|p| p.0.clone());

    let both = Formula::atom("attack_A").and(Formula::atom("attack_B"));
    let mut checker = Checker::new(sys);
    let attacking = checker.extension(&both)?;
    let ck = checker.extension(&Formula::common(group, both))?;
    Ok(AttackReport {
        mode: mode.to_string(),
        attacks_ever,
        coordinated: report.holds,
        ck_at_attack: attacking.is_subset(&ck),
        violating_run,
    })
}

/// Decoded actions of each general in `(run, time)`, for transcripts.
pub fn actions_at(sys: &InterpretedSystem, p: Point) -> Vec<String> {
    let round = format!("@{}", p.time);
    let mut out = Vec::new();
    for (g, name) in sys.agents().iter().enumerate() {
        let label = sys.local_label(g, p);
        if let Some(acts) = label.rsplit_once("acts=").map(|x| x.1) {
            for a in acts.split(',').filter(|a| a.ends_with(&round)) {
                out.push(format!("{name} {}", a.trim_end_matches(&round)));
            }
        }
    }
    out
}
