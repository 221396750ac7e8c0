//! Muddy children, in a lock-step (coarse) and an asynchronous-delay (fine)
//! granularity.
//!
//! Local states end in a comma separated token log:
//! `ann` (announcement heard), `q{q}:yes|no` (question q heard and answered),
//! `a{q}.{c}:yes|no` (child c's answer to q heard).

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::logic::{Checker, Formula};
use crate::model::{AgentId, InterpretedSystem, Point, RunDesc, StateDesc, SystemDesc};
use crate::report::{Counterexample, VerificationReport};

pub const DEFAULT_MAX_RUNS: usize = 200_000;
pub const MAX_COARSE_CHILDREN: usize = 5;
pub const MAX_FINE_CHILDREN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuddyVariant {
    Coarse,
    Fine { delay_min: u32, delay_max: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuddyConfig {
    pub n: usize,
    pub variant: MuddyVariant,
    pub question_rounds: usize,
    pub max_runs: usize,
}

impl MuddyConfig {
    pub fn coarse(n: usize) -> Self {
        MuddyConfig {
            n,
            variant: MuddyVariant::Coarse,
            question_rounds: n,
            max_runs: DEFAULT_MAX_RUNS,
        }
    }

    pub fn fine(n: usize, delay_min: u32, delay_max: u32) -> Self {
        MuddyConfig {
            n,
            variant: MuddyVariant::Fine {
                delay_min,
                delay_max,
            },
            question_rounds: n,
            max_runs: DEFAULT_MAX_RUNS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cap = match self.variant {
            MuddyVariant::Coarse => MAX_COARSE_CHILDREN,
            MuddyVariant::Fine { .. } => MAX_FINE_CHILDREN,
        };
        if self.n < 2 || self.n > cap {
            return Err(Error::InvalidConfig(format!(
                "number of children must be in 2..={cap}, got {}",
                self.n
            )));
        }
        if self.question_rounds < self.n {
            return Err(Error::InvalidConfig(format!(
                "question_rounds {} is below n = {}",
                self.question_rounds, self.n
            )));
        }
        if let MuddyVariant::Fine {
            delay_min,
            delay_max,
        } = self.variant
        {
            if delay_min < 1 || delay_min > delay_max {
                return Err(Error::InvalidConfig(format!(
                    "need 1 <= delay_min <= delay_max, got {delay_min}..{delay_max}"
                )));
            }
        }
        Ok(())
    }
}

/// Children that `child` can see muddy.
fn seen(muddy: &[bool], child: usize) -> Vec<usize> {
    (0..muddy.len())
        .filter(|&c| c != child && muddy[c])
        .collect()
}

/// The sees-k rule: "No" to the first k questions, "Yes" afterwards.
pub fn answers_yes(muddy: &[bool], child: usize, question: usize) -> bool {
    question > seen(muddy, child).len()
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn set_label(children: impl IntoIterator<Item = usize>) -> String {
    let names: Vec<String> = children.into_iter().map(|c| (c + 1).to_string()).collect();
    format!("{{{}}}", names.join(","))
}

pub fn config_label(muddy: &[bool]) -> String {
    set_label((0..muddy.len()).filter(|&c| muddy[c]))
}

struct Timeline {
    id: String,
    muddy: Vec<bool>,
    child_events: Vec<Vec<(usize, String)>>,
    env_events: Vec<(usize, String)>,
}

fn configs(n: usize) -> Vec<Vec<bool>> {
    let mut all: Vec<Vec<bool>> = (0u32..1 << n)
        .map(|m| (0..n).map(|c| m & (1 << c) != 0).collect())
        .collect();
    all.sort_by_key(|m| config_label(m));
    all
}

fn coarse_timelines(cfg: &MuddyConfig) -> Vec<Timeline> {
    let n = cfg.n;
    configs(n)
        .into_iter()
        .map(|muddy| {
            let announce = muddy.iter().any(|&b| b);
            let mut child_events = vec![Vec::new(); n];
            let mut env_events = Vec::new();
            if announce {
                env_events.push((1, "father:ann".to_string()));
                for ev in child_events.iter_mut() {
                    ev.push((1, "ann".to_string()));
                }
            }
            for q in 1..=cfg.question_rounds {
                let asked = 2 * q - 1;
                env_events.push((asked, format!("father:q{q}")));
                env_events.push((asked + 1, format!("answers:q{q}")));
                for c in 0..n {
                    let yes = answers_yes(&muddy, c, q);
                    child_events[c].push((asked, format!("q{q}:{}", yes_no(yes))));
                    for (other, ev) in child_events.iter_mut().enumerate() {
                        if other != c {
                            ev.push((asked + 1, format!("a{q}.{}:{}", c + 1, yes_no(yes))));
                        }
                    }
                }
            }
            Timeline {
                id: format!("muddy{}", config_label(&muddy)),
                muddy,
                child_events,
                env_events,
            }
        })
        .collect()
}

/// Every vector of `len` values drawn from `choices`, in lexicographic order.
fn assignments(len: usize, choices: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&d| {
                    let mut v = prefix.clone();
                    v.push(d);
                    v
                })
            })
            .collect();
    }
    out
}

#[derive(Clone)]
struct Partial {
    father_time: usize,
    child_events: Vec<Vec<(usize, String)>>,
    env_events: Vec<(usize, String)>,
    delays: Vec<u32>,
}

struct FineCtx<'a> {
    cfg: &'a MuddyConfig,
    muddy: &'a [bool],
    choices: Vec<u32>,
}

fn fine_question(
    ctx: &FineCtx<'_>,
    state: Partial,
    q: usize,
    out: &mut Vec<Timeline>,
    budget: &mut usize,
) -> Result<()> {
    let n = ctx.cfg.n;
    if q > ctx.cfg.question_rounds {
        if *budget == 0 {
            return Err(Error::InvalidConfig(format!(
                "fine muddy children exceeds the run budget of {}; \
                 narrow the delay range or raise max_runs",
                ctx.cfg.max_runs
            )));
        }
        *budget -= 1;
        let sep = if ctx.choices.iter().any(|&d| d > 9) {
            "."
        } else {
            ""
        };
        let digits: Vec<String> = state.delays.iter().map(|d| d.to_string()).collect();
        out.push(Timeline {
            id: format!("muddy{}/{}", config_label(ctx.muddy), digits.join(sep)),
            muddy: ctx.muddy.to_vec(),
            child_events: state.child_events,
            env_events: state.env_events,
        });
        return Ok(());
    }
    let mut base = state;
    base.env_events
        .push((base.father_time, format!("father:q{q}")));
    let answers: Vec<bool> = (0..n).map(|c| answers_yes(ctx.muddy, c, q)).collect();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|c| (0..n).filter(move |&d| d != c).map(move |d| (c, d)))
        .collect();
    let answer_delays = assignments(pairs.len(), &ctx.choices);
    for heard in assignments(n, &ctx.choices) {
        let hear: Vec<usize> = heard
            .iter()
            .map(|&d| base.father_time + d as usize)
            .collect();
        for delays in &answer_delays {
            let arrivals: Vec<usize> = pairs
                .iter()
                .zip(delays)
                .map(|(&(from, _), &d)| hear[from] + d as usize)
                .collect();
            // nobody hears an answer to q before hearing q itself
            if pairs
                .iter()
                .zip(&arrivals)
                .any(|(&(_, to), &at)| at <= hear[to])
            {
                continue;
            }
            let mut next = base.clone();
            for c in 0..n {
                next.child_events[c].push((hear[c], format!("q{q}:{}", yes_no(answers[c]))));
            }
            for (&(from, to), &at) in pairs.iter().zip(&arrivals) {
                next.child_events[to]
                    .push((at, format!("a{q}.{}:{}", from + 1, yes_no(answers[from]))));
            }
            next.father_time = arrivals.iter().copied().max().unwrap_or(base.father_time);
            next.delays.extend(&heard);
            next.delays.extend(delays);
            fine_question(ctx, next, q + 1, out, budget)?;
        }
    }
    Ok(())
}

fn fine_timelines(cfg: &MuddyConfig, delay_min: u32, delay_max: u32) -> Result<Vec<Timeline>> {
    let n = cfg.n;
    let choices: Vec<u32> = (delay_min..=delay_max).collect();
    let mut out = Vec::new();
    let mut budget = cfg.max_runs;
    for muddy in configs(n) {
        let ctx = FineCtx {
            cfg,
            muddy: &muddy,
            choices: choices.clone(),
        };
        let start = Partial {
            father_time: 0,
            child_events: vec![Vec::new(); n],
            env_events: Vec::new(),
            delays: Vec::new(),
        };
        if muddy.iter().any(|&b| b) {
            for heard in assignments(n, &choices) {
                let mut s = start.clone();
                s.env_events.push((0, "father:ann".to_string()));
                for c in 0..n {
                    s.child_events[c].push((heard[c] as usize, "ann".to_string()));
                }
                s.father_time = heard.iter().copied().max().unwrap_or(0) as usize;
                s.delays = heard;
                fine_question(&ctx, s, 1, &mut out, &mut budget)?;
            }
        } else {
            fine_question(&ctx, start, 1, &mut out, &mut budget)?;
        }
    }
    Ok(out)
}

pub fn muddy_desc(cfg: &MuddyConfig) -> Result<SystemDesc> {
    cfg.validate()?;
    let n = cfg.n;
    let coarse = cfg.variant == MuddyVariant::Coarse;
    let mut timelines = match cfg.variant {
        MuddyVariant::Coarse => coarse_timelines(cfg),
        MuddyVariant::Fine {
            delay_min,
            delay_max,
        } => fine_timelines(cfg, delay_min, delay_max)?,
    };
    for tl in timelines.iter_mut() {
        for ev in tl.child_events.iter_mut() {
            ev.sort_by_key(|e| e.0);
        }
    }
    let horizon = timelines
        .iter()
        .flat_map(|tl| tl.child_events.iter().flatten().map(|e| e.0))
        .max()
        .unwrap_or(0);

    let runs = timelines
        .iter()
        .map(|tl| {
            let states = (0..=horizon)
                .map(|m| {
                    let mut env = format!("mud={}|t={m}", config_label(&tl.muddy));
                    let now: Vec<&str> = tl
                        .env_events
                        .iter()
                        .filter(|e| e.0 == m)
                        .map(|e| e.1.as_str())
                        .collect();
                    if !now.is_empty() {
                        env.push('|');
                        env.push_str(&now.join(","));
                    }
                    let mut locals = BTreeMap::new();
                    let mut props = Vec::new();
                    if tl.muddy.iter().any(|&b| b) {
                        props.push("atleast_one".to_string());
                    }
                    for c in 0..n {
                        let tokens: Vec<&str> = tl.child_events[c]
                            .iter()
                            .filter(|e| e.0 <= m)
                            .map(|e| e.1.as_str())
                            .collect();
                        let clock = if coarse {
                            format!("t={m}|")
                        } else {
                            String::new()
                        };
                        let label = format!(
                            "{clock}sees={}|{}",
                            set_label(seen(&tl.muddy, c)),
                            tokens.join(",")
                        );
                        locals.insert((c + 1).to_string(), label);
                        if tl.muddy[c] {
                            props.push(format!("muddy_{}", c + 1));
                        }
                        for t in &tokens {
                            if let Some(q) =
                                t.strip_prefix('q').and_then(|r| r.strip_suffix(":yes"))
                            {
                                props.push(format!("ans_yes_{}_{q}", c + 1));
                            }
                        }
                    }
                    StateDesc { env, locals, props }
                })
                .collect();
            RunDesc {
                id: tl.id.clone(),
                states,
            }
        })
        .collect();

    let mut propositions = vec!["atleast_one".to_string()];
    for c in 1..=n {
        propositions.push(format!("muddy_{c}"));
    }
    for c in 1..=n {
        for q in 1..=cfg.question_rounds {
            propositions.push(format!("ans_yes_{c}_{q}"));
        }
    }
    let mut meta = BTreeMap::new();
    meta.insert("scenario".into(), "muddy".into());
    meta.insert("n".into(), n.to_string());
    meta.insert("question_rounds".into(), cfg.question_rounds.to_string());
    match cfg.variant {
        MuddyVariant::Coarse => {
            meta.insert("variant".into(), "coarse".into());
        }
        MuddyVariant::Fine {
            delay_min,
            delay_max,
        } => {
            meta.insert("variant".into(), "fine".into());
            meta.insert("delays".into(), format!("{delay_min}..{delay_max}"));
            meta.insert(
                "interleaving".into(),
                "the father asks question q+1 only after every answer to q has reached every child"
                    .into(),
            );
        }
    }
    Ok(SystemDesc {
        agents: (1..=n)
            .map(|c| AgentId::new(c.to_string()))
            .collect::<Result<_>>()?,
        horizon,
        propositions,
        runs,
        meta,
    })
}

pub fn gen_muddy(cfg: &MuddyConfig) -> Result<InterpretedSystem> {
    InterpretedSystem::build(&muddy_desc(cfg)?)
}

/// Token log of a child's local state.
pub fn tokens(label: &str) -> impl Iterator<Item = &str> {
    label
        .rsplit('|')
        .next()
        .unwrap_or("")
        .split(',')
        .filter(|t| !t.is_empty())
}

/// Number of questions recorded in a muddy system's metadata.
pub fn question_rounds(sys: &InterpretedSystem) -> Result<usize> {
    sys.meta()
        .get("question_rounds")
        .and_then(|q| q.parse().ok())
        .ok_or_else(|| Error::InvalidConfig("not a muddy children system".into()))
}

/// First time `child` has heard question `q` in `run`, with its answer.
pub fn answer_point(
    sys: &InterpretedSystem,
    run: usize,
    child: usize,
    q: usize,
) -> Option<(usize, bool)> {
    let prefix = format!("q{q}:");
    (0..=sys.horizon()).find_map(|m| {
        let label = sys.local_label(child, Point::new(run, m));
        tokens(label)
            .find_map(|t| t.strip_prefix(prefix.as_str()))
            .map(|a| (m, a == "yes"))
    })
}

/// `table[q-1][c]` is child c's answer to question q in `run`, read from
/// the `ans_yes` propositions at the final time.
pub fn answer_table(sys: &InterpretedSystem, run: usize) -> Result<Vec<Vec<bool>>> {
    let q_max = question_rounds(sys)?;
    let last = sys.index_of(Point::new(run, sys.horizon()));
    (1..=q_max)
        .map(|q| {
            (1..=sys.agents().len())
                .map(|c| Ok(sys.prop_holds(sys.prop_index(&format!("ans_yes_{c}_{q}"))?, last)))
                .collect()
        })
        .collect()
}

/// Checks that every answer is "Yes" exactly when the child knows whether
/// it is muddy at the point where it answers.
pub fn muddy_specification(sys: &InterpretedSystem) -> Result<VerificationReport> {
    let q_max = question_rounds(sys)?;
    let claim = "each child answers Yes iff it knows whether it is muddy";
    let mut checker = Checker::new(sys);
    let mut runs: Vec<usize> = (0..sys.runs().len()).collect();
    runs.sort_by(|a, b| sys.runs()[*a].id.cmp(&sys.runs()[*b].id));
    let mut knows_whether = Vec::new();
    for (c, agent) in sys.agents().iter().enumerate() {
        let m = Formula::atom(format!("muddy_{}", c + 1));
        let f = Formula::knows(agent.clone(), m.clone()).or(Formula::knows(agent.clone(), m.not()));
        knows_whether.push(checker.extension(&f)?);
    }
    for r in runs {
        for q in 1..=q_max {
            for (c, ext) in knows_whether.iter().enumerate() {
                let (time, yes) = answer_point(sys, r, c, q).ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "child {} never hears question {q} in run {}",
                        c + 1,
                        sys.runs()[r].id
                    ))
                })?;
                let knows = ext.contains(sys.index_of(Point::new(r, time)));
                if knows != yes {
                    return Ok(VerificationReport::fail(
                        claim,
                        Counterexample::new(
                            vec![(sys.runs()[r].id.clone(), time)],
                            format!(
                                "child answers {} to question {q} but knows-whether is {knows}",
                                if yes { "Yes" } else { "No" }
                            ),
                        )
                        .with_agent(sys.agents()[c].to_string()),
                    ));
                }
            }
        }
    }
    Ok(VerificationReport::pass(claim))
}

/// Run id of the coarse run for a muddy set given by 1-based child numbers.
pub fn coarse_run_id(muddy: &[usize]) -> String {
    let set: BTreeSet<usize> = muddy.iter().map(|c| c - 1).collect();
    format!("muddy{}", set_label(set))
}
