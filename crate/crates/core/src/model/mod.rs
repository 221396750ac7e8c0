//! Interpreted systems: a finite set of equal-length runs over global
//! states together with a valuation on global states.
//!
//! Every run is truncated at a shared horizon `T`, so a system has exactly
//! `runs × (T + 1)` points. Points are numbered densely (`run * (T + 1) +
//! time`) and events are bitsets over that numbering.

mod event;
mod file;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, PointRef, Result};

pub use event::{Event, EventClassification};
pub use file::{RunDesc, StateDesc, SystemDesc};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AgentId(String);

impl AgentId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidAgent(name));
        }
        Ok(AgentId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for AgentId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        AgentId::new(value)
    }
}

impl From<AgentId> for String {
    fn from(id: AgentId) -> String {
        id.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Environment label plus one local-state label per agent, in the system's
/// agent order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState {
    pub env: String,
    pub locals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub id: String,
    pub states: Vec<GlobalState>,
}

/// A (run, time) pair. `run` indexes [`InterpretedSystem::runs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub run: usize,
    pub time: usize,
}

impl Point {
    pub fn new(run: usize, time: usize) -> Self {
        Point { run, time }
    }
}

/// Per-agent interning of local-state labels.
#[derive(Debug, Clone)]
struct LocalView {
    labels: Vec<String>,
    label_ids: HashMap<String, u32>,
    /// label id at each point index
    at_point: Vec<u32>,
    /// points carrying each label, ascending
    members: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct InterpretedSystem {
    agents: Vec<AgentId>,
    agent_index: HashMap<AgentId, usize>,
    horizon: usize,
    runs: Vec<Run>,
    run_index: HashMap<String, usize>,
    props: Vec<String>,
    prop_index: HashMap<String, usize>,
    /// distinct global states and their proposition sets
    states: Vec<GlobalState>,
    state_props: Vec<BTreeSet<usize>>,
    state_at_point: Vec<u32>,
    views: Vec<LocalView>,
    meta: BTreeMap<String, String>,
}

impl InterpretedSystem {
    /// Validates `desc` and assembles the system.
    pub fn build(desc: &SystemDesc) -> Result<Self> {
        if desc.agents.is_empty() {
            return Err(Error::NoAgents);
        }
        let mut agent_index = HashMap::new();
        for (i, a) in desc.agents.iter().enumerate() {
            if agent_index.insert(a.clone(), i).is_some() {
                return Err(Error::DuplicateAgent(a.to_string()));
            }
        }
        if desc.runs.is_empty() {
            return Err(Error::NoRuns);
        }

        let horizon = desc.horizon;
        let len = horizon + 1;
        let mut run_index = HashMap::new();
        let mut prop_index: HashMap<String, usize> = HashMap::new();
        let mut props: Vec<String> = Vec::new();
        let mut intern_prop = |name: &str, props: &mut Vec<String>| -> usize {
            if let Some(&i) = prop_index.get(name) {
                return i;
            }
            let i = props.len();
            props.push(name.to_string());
            prop_index.insert(name.to_string(), i);
            i
        };
        for p in &desc.propositions {
            intern_prop(p, &mut props);
        }

        let mut runs = Vec::with_capacity(desc.runs.len());
        let mut states: Vec<GlobalState> = Vec::new();
        let mut state_ids: HashMap<GlobalState, u32> = HashMap::new();
        let mut state_props: Vec<BTreeSet<usize>> = Vec::new();
        let mut first_seen: Vec<PointRef> = Vec::new();
        let mut state_at_point = Vec::with_capacity(desc.runs.len() * len);

        for (r, run) in desc.runs.iter().enumerate() {
            if run_index.insert(run.id.clone(), r).is_some() {
                return Err(Error::DuplicateRun(run.id.clone()));
            }
            if run.states.len() != len {
                return Err(Error::RaggedRun {
                    run: run.id.clone(),
                    expected: len,
                    found: run.states.len(),
                });
            }
            let mut rstates = Vec::with_capacity(len);
            for (m, st) in run.states.iter().enumerate() {
                if st.locals.len() != desc.agents.len() {
                    return Err(Error::AgentMismatch {
                        run: run.id.clone(),
                        time: m,
                        detail: format!(
                            "{} local states for {} agents",
                            st.locals.len(),
                            desc.agents.len()
                        ),
                    });
                }
                let mut locals = Vec::with_capacity(desc.agents.len());
                for a in &desc.agents {
                    match st.locals.get(a.as_str()) {
                        Some(l) => locals.push(l.clone()),
                        None => {
                            return Err(Error::AgentMismatch {
                                run: run.id.clone(),
                                time: m,
                                detail: format!("no local state for agent {a}"),
                            })
                        }
                    }
                }
                let gs = GlobalState {
                    env: st.env.clone(),
                    locals,
                };
                let pset: BTreeSet<usize> = st
                    .props
                    .iter()
                    .map(|p| intern_prop(p, &mut props))
                    .collect();
                let id = match state_ids.get(&gs) {
                    Some(&id) => {
                        if state_props[id as usize] != pset {
                            return Err(Error::ValuationNotStateFunction {
                                first: first_seen[id as usize].clone(),
                                second: (run.id.clone(), m),
                            });
                        }
                        id
                    }
                    None => {
                        let id = states.len() as u32;
                        states.push(gs.clone());
                        state_ids.insert(gs.clone(), id);
                        state_props.push(pset);
                        first_seen.push((run.id.clone(), m));
                        id
                    }
                };
                state_at_point.push(id);
                rstates.push(gs);
            }
            runs.push(Run {
                id: run.id.clone(),
                states: rstates,
            });
        }

        let npoints = state_at_point.len();
        let mut views = Vec::with_capacity(desc.agents.len());
        for i in 0..desc.agents.len() {
            let mut view = LocalView {
                labels: Vec::new(),
                label_ids: HashMap::new(),
                at_point: Vec::with_capacity(npoints),
                members: Vec::new(),
            };
            for (idx, &sid) in state_at_point.iter().enumerate() {
                let label = &states[sid as usize].locals[i];
                let lid = match view.label_ids.get(label) {
                    Some(&l) => l,
                    None => {
                        let l = view.labels.len() as u32;
                        view.labels.push(label.clone());
                        view.label_ids.insert(label.clone(), l);
                        view.members.push(Vec::new());
                        l
                    }
                };
                view.at_point.push(lid);
                view.members[lid as usize].push(idx);
            }
            views.push(view);
        }

        Ok(InterpretedSystem {
            agents: desc.agents.clone(),
            agent_index,
            horizon,
            runs,
            run_index,
            props,
            prop_index,
            states,
            state_props,
            state_at_point,
            views,
            meta: desc.meta.clone(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let desc: SystemDesc = serde_json::from_str(text)?;
        Self::build(&desc)
    }

    /// The system in file form. `build(&sys.to_desc())` reproduces `sys`.
    pub fn to_desc(&self) -> SystemDesc {
        let runs = self
            .runs
            .iter()
            .enumerate()
            .map(|(r, run)| RunDesc {
                id: run.id.clone(),
                states: run
                    .states
                    .iter()
                    .enumerate()
                    .map(|(m, gs)| StateDesc {
                        env: gs.env.clone(),
                        locals: self
                            .agents
                            .iter()
                            .map(|a| a.to_string())
                            .zip(gs.locals.iter().cloned())
                            .collect(),
                        props: self
                            .props_at(Point::new(r, m))
                            .map(str::to_string)
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        SystemDesc {
            agents: self.agents.clone(),
            horizon: self.horizon,
            propositions: self.props.clone(),
            runs,
            meta: self.meta.clone(),
        }
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.agents
    }

    pub fn agent_index(&self, agent: &AgentId) -> Result<usize> {
        self.agent_index
            .get(agent)
            .copied()
            .ok_or_else(|| Error::UnknownAgent(agent.to_string()))
    }

    pub fn agent_by_name(&self, name: &str) -> Result<usize> {
        self.agents
            .iter()
            .position(|a| a.as_str() == name)
            .ok_or_else(|| Error::UnknownAgent(name.to_string()))
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn run_index(&self, id: &str) -> Result<usize> {
        self.run_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownRun(id.to_string()))
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn propositions(&self) -> &[String] {
        &self.props
    }

    pub fn prop_index(&self, name: &str) -> Result<usize> {
        self.prop_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownProp(name.to_string()))
    }

    pub fn num_points(&self) -> usize {
        self.state_at_point.len()
    }

    pub fn index_of(&self, p: Point) -> usize {
        p.run * (self.horizon + 1) + p.time
    }

    pub fn point_at(&self, idx: usize) -> Point {
        Point::new(idx / (self.horizon + 1), idx % (self.horizon + 1))
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.num_points()).map(|i| self.point_at(i))
    }

    /// Resolves `(run id, time)` against this system.
    pub fn point(&self, run: &str, time: usize) -> Result<Point> {
        let r = self.run_index(run)?;
        if time > self.horizon {
            return Err(Error::TimeOutOfRange {
                time,
                horizon: self.horizon,
            });
        }
        Ok(Point::new(r, time))
    }

    /// Parses `"runId:time"`. The split is at the last colon, so run ids
    /// may themselves contain colons.
    pub fn parse_point(&self, text: &str) -> Result<Point> {
        let (run, time) = text
            .rsplit_once(':')
            .ok_or_else(|| Error::MalformedPoint(text.to_string()))?;
        if run.is_empty() || time.is_empty() || !time.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::MalformedPoint(text.to_string()));
        }
        let time: usize = time
            .parse()
            .map_err(|_| Error::MalformedPoint(text.to_string()))?;
        self.point(run, time)
    }

    pub fn check_point(&self, p: Point) -> Result<()> {
        if p.run >= self.runs.len() {
            return Err(Error::UnknownRun(format!("#{}", p.run)));
        }
        if p.time > self.horizon {
            return Err(Error::TimeOutOfRange {
                time: p.time,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    pub fn point_ref(&self, p: Point) -> PointRef {
        (self.runs[p.run].id.clone(), p.time)
    }

    pub fn global_state(&self, p: Point) -> &GlobalState {
        &self.runs[p.run].states[p.time]
    }

    /// Dense id of the global state at a point; equal ids iff equal states.
    pub fn state_id(&self, idx: usize) -> u32 {
        self.state_at_point[idx]
    }

    pub fn distinct_states(&self) -> &[GlobalState] {
        &self.states
    }

    pub fn props_at(&self, p: Point) -> impl Iterator<Item = &str> + '_ {
        let sid = self.state_at_point[self.index_of(p)] as usize;
        self.state_props[sid]
            .iter()
            .map(|&i| self.props[i].as_str())
    }

    pub fn prop_holds(&self, prop: usize, idx: usize) -> bool {
        self.state_props[self.state_at_point[idx] as usize].contains(&prop)
    }

    pub fn local_label(&self, agent: usize, p: Point) -> &str {
        let v = &self.views[agent];
        &v.labels[v.at_point[self.index_of(p)] as usize]
    }

    pub fn local_id(&self, agent: usize, idx: usize) -> u32 {
        self.views[agent].at_point[idx]
    }

    /// All local-state labels agent `agent` takes somewhere in the system.
    pub fn local_labels(&self, agent: usize) -> &[String] {
        &self.views[agent].labels
    }

    pub fn label_id(&self, agent: usize, label: &str) -> Option<u32> {
        self.views[agent].label_ids.get(label).copied()
    }

    /// Point indices where `agent` has local label `label`: one ~_agent class.
    pub fn label_members(&self, agent: usize, label: u32) -> &[usize] {
        &self.views[agent].members[label as usize]
    }

    pub fn num_labels(&self, agent: usize) -> usize {
        self.views[agent].labels.len()
    }

    /// `(r,m) ~_i (r',m')` iff agent i has the same local state at both.
    pub fn indistinguishable(&self, agent: &AgentId, p: Point, q: Point) -> Result<bool> {
        let i = self.agent_index(agent)?;
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.local_id(i, self.index_of(p)) == self.local_id(i, self.index_of(q)))
    }

    /// Event of the points whose `agent`-local state is in `labels`.
    /// Labels that never occur contribute nothing.
    pub fn event_from_local_states<S: AsRef<str>>(
        &self,
        agent: &AgentId,
        labels: &[S],
    ) -> Result<Event> {
        let i = self.agent_index(agent)?;
        let mut e = Event::empty(self.num_points());
        for l in labels {
            if let Some(lid) = self.label_id(i, l.as_ref()) {
                for &idx in self.label_members(i, lid) {
                    e.insert(idx);
                }
            }
        }
        Ok(e)
    }

    /// Event from explicit `(run id, time)` references.
    pub fn event_from_refs(&self, refs: &[PointRef]) -> Result<Event> {
        let mut e = Event::empty(self.num_points());
        for (run, time) in refs {
            let p = self.point(run, *time)?;
            e.insert(self.index_of(p));
        }
        Ok(e)
    }

    pub fn check_event(&self, e: &Event) -> Result<()> {
        if e.universe() != self.num_points() {
            return Err(Error::EventSizeMismatch {
                expected: self.num_points(),
                found: e.universe(),
            });
        }
        Ok(())
    }

    /// Member points sorted by run id, then time.
    pub fn sorted_refs(&self, e: &Event) -> Vec<PointRef> {
        let mut refs: Vec<PointRef> = e.iter().map(|i| self.point_ref(self.point_at(i))).collect();
        refs.sort();
        refs
    }

    /// A pair `(inside, outside)` of `agent`-indistinguishable points that
    /// `e` separates, or `None` if `e` is local to `agent`.
    pub fn locality_witness(&self, agent: usize, e: &Event) -> Option<(Point, Point)> {
        let view = &self.views[agent];
        for members in &view.members {
            let inside = members.iter().find(|&&i| e.contains(i));
            let outside = members.iter().find(|&&i| !e.contains(i));
            if let (Some(&a), Some(&b)) = (inside, outside) {
                return Some((self.point_at(a), self.point_at(b)));
            }
        }
        None
    }

    pub fn is_local(&self, agent: usize, e: &Event) -> bool {
        self.locality_witness(agent, e).is_none()
    }

    /// Classifies `e` as arbitrary, state, or local event.
    pub fn classify_event(&self, e: &Event) -> Result<EventClassification> {
        self.check_event(e)?;
        let n = self.states.len();
        // per global state: 1 = some member inside, 2 = some member outside
        let mut seen = vec![0u8; n];
        for idx in 0..self.num_points() {
            let s = self.state_at_point[idx] as usize;
            seen[s] |= if e.contains(idx) { 1 } else { 2 };
        }
        let is_state_event = seen.iter().all(|&f| f != 3);
        let global_state_set = is_state_event.then(|| {
            let mut set: Vec<GlobalState> = seen
                .iter()
                .enumerate()
                .filter(|(_, &f)| f == 1)
                .map(|(s, _)| self.states[s].clone())
                .collect();
            set.sort();
            set
        });
        let mut local_to = BTreeMap::new();
        for (i, a) in self.agents.iter().enumerate() {
            let entry = self.is_local(i, e).then(|| {
                self.views[i]
                    .members
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| e.contains(m[0]))
                    .map(|(l, _)| self.views[i].labels[l].clone())
                    .collect::<BTreeSet<String>>()
            });
            local_to.insert(a.clone(), entry);
        }
        Ok(EventClassification {
            is_state_event,
            global_state_set,
            local_to,
        })
    }

    pub fn full_event(&self) -> Event {
        Event::full(self.num_points())
    }

    pub fn empty_event(&self) -> Event {
        Event::empty(self.num_points())
    }

    /// Point indices of one run, in time order.
    pub fn run_indices(&self, run: usize) -> std::ops::Range<usize> {
        let len = self.horizon + 1;
        run * len..(run + 1) * len
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agents(names: &[&str]) -> Vec<AgentId> {
        names.iter().map(|n| AgentId::new(*n).unwrap()).collect()
    }

    fn state(env: &str, locals: &[(&str, &str)], props: &[&str]) -> StateDesc {
        StateDesc {
            env: env.into(),
            locals: locals
                .iter()
                .map(|(a, l)| (a.to_string(), l.to_string()))
                .collect(),
            props: props.iter().map(|p| p.to_string()).collect(),
        }
    }

    #[test]
    fn minimal_system_has_one_point() {
        let desc = SystemDesc {
            agents: agents(&["A"]),
            horizon: 0,
            propositions: vec![],
            runs: vec![RunDesc {
                id: "r0".into(),
                states: vec![state("e", &[("A", "a")], &["p"])],
            }],
            meta: Default::default(),
        };
        let sys = InterpretedSystem::build(&desc).unwrap();
        assert_eq!(sys.num_points(), 1);
        assert_eq!(
            sys.props_at(Point::new(0, 0)).collect::<Vec<_>>(),
            vec!["p"]
        );
    }

    #[test]
    fn valuation_must_be_state_function() {
        let desc = SystemDesc {
            agents: agents(&["A"]),
            horizon: 0,
            propositions: vec![],
            runs: vec![
                RunDesc {
                    id: "r0".into(),
                    states: vec![state("e", &[("A", "a")], &["p"])],
                },
                RunDesc {
                    id: "r1".into(),
                    states: vec![state("e", &[("A", "a")], &[])],
                },
            ],
            meta: Default::default(),
        };
        let err = InterpretedSystem::build(&desc).unwrap_err();
        assert!(matches!(err, Error::ValuationNotStateFunction { .. }));
        assert!(err.to_string().contains("valuation not a state function"));
    }

    #[test]
    fn rejects_ragged_duplicate_and_mismatched_runs() {
        let good = || RunDesc {
            id: "r0".into(),
            states: vec![
                state("e", &[("A", "a")], &[]),
                state("e", &[("A", "b")], &[]),
            ],
        };
        let mut desc = SystemDesc {
            agents: agents(&["A"]),
            horizon: 1,
            propositions: vec![],
            runs: vec![good(), good()],
            meta: Default::default(),
        };
        assert!(matches!(
            InterpretedSystem::build(&desc),
            Err(Error::DuplicateRun(_))
        ));
        desc.runs[1].id = "r1".into();
        desc.runs[1].states.pop();
        assert!(matches!(
            InterpretedSystem::build(&desc),
            Err(Error::RaggedRun { found: 1, .. })
        ));
        desc.runs[1] = good();
        desc.runs[1].id = "r1".into();
        desc.runs[1].states[0] = state("e", &[("B", "a")], &[]);
        assert!(matches!(
            InterpretedSystem::build(&desc),
            Err(Error::AgentMismatch { .. })
        ));
    }

    #[test]
    fn agent_names_must_be_nonempty_without_whitespace() {
        assert!(AgentId::new("").is_err());
        assert!(AgentId::new("a b").is_err());
        assert!(AgentId::new("1").is_ok());
    }

    #[test]
    fn parse_point_forms() {
        let desc = SystemDesc {
            agents: agents(&["A"]),
            horizon: 10,
            propositions: vec![],
            runs: vec![RunDesc {
                id: "r0".into(),
                states: (0..=10)
                    .map(|m| state("e", &[("A", &m.to_string())], &[]))
                    .collect(),
            }],
            meta: Default::default(),
        };
        let sys = InterpretedSystem::build(&desc).unwrap();
        assert_eq!(sys.parse_point("r0:0").unwrap(), Point::new(0, 0));
        assert!(matches!(
            sys.parse_point("r0:99"),
            Err(Error::TimeOutOfRange {
                time: 99,
                horizon: 10
            })
        ));
        assert!(matches!(
            sys.parse_point("r0"),
            Err(Error::MalformedPoint(_))
        ));
        assert!(matches!(
            sys.parse_point("r0:-1"),
            Err(Error::MalformedPoint(_))
        ));
        assert!(matches!(sys.parse_point("zz:1"), Err(Error::UnknownRun(_))));
    }

    #[test]
    fn constant_event_is_local_everywhere() {
        let desc = SystemDesc {
            agents: agents(&["A", "B"]),
            horizon: 1,
            propositions: vec![],
            runs: vec![RunDesc {
                id: "r0".into(),
                states: vec![
                    state("e", &[("A", "a0"), ("B", "b0")], &[]),
                    state("e", &[("A", "a1"), ("B", "b0")], &[]),
                ],
            }],
            meta: Default::default(),
        };
        let sys = InterpretedSystem::build(&desc).unwrap();
        let c = sys.classify_event(&sys.full_event()).unwrap();
        assert!(c.is_state_event);
        assert_eq!(c.global_state_set.as_ref().unwrap().len(), 2);
        for l in c.local_to.values() {
            assert!(l.is_some());
        }
        let a = AgentId::new("A").unwrap();
        let labels = c.local_to[&a].clone().unwrap();
        assert_eq!(labels.into_iter().collect::<Vec<_>>(), vec!["a0", "a1"]);

        // {(r0,1)} is local to A (label a1) but not to B (b0 at both times)
        let e = sys.event_from_local_states(&a, &["a1"]).unwrap();
        let c = sys.classify_event(&e).unwrap();
        assert!(c.is_state_event);
        assert!(c.local_to[&a].is_some());
        assert!(c.local_to[&AgentId::new("B").unwrap()].is_none());

        assert!(sys
            .event_from_local_states(&a, &[] as &[&str])
            .unwrap()
            .is_empty());
        assert_eq!(
            sys.event_from_local_states(&a, &["a0", "a1", "nope"])
                .unwrap(),
            sys.full_event()
        );
    }
}
