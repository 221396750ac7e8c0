//! Event ensembles and their coordination, and the correspondence between
//! coordinated ensembles and (approximate) common knowledge.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, PointRef, Result};
use crate::logic::{runs_covering, windows_covering, Checker, Formula, Group, Mode};
use crate::model::{AgentId, Event, InterpretedSystem};
use crate::report::{Counterexample, VerificationReport};

pub type CoordinationMode = Mode;

/// One event per member of `group`, each local to its agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ensemble {
    pub name: String,
    group: Group,
    events: BTreeMap<AgentId, Event>,
}

impl Ensemble {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn events(&self) -> &BTreeMap<AgentId, Event> {
        &self.events
    }

    pub fn event(&self, agent: &AgentId) -> Option<&Event> {
        self.events.get(agent)
    }

    /// `∪_{i∈G} e(i)`.
    pub fn union(&self) -> Event {
        let mut it = self.events.values();
        let mut acc = it.next().expect("ensembles are nonempty").clone();
        for e in it {
            acc.union_with(e);
        }
        acc
    }
}

/// Validates that `events` has exactly one entry per group member and that
/// each event is local to its agent.
pub fn build_ensemble(
    sys: &InterpretedSystem,
    name: impl Into<String>,
    group: &Group,
    events: BTreeMap<AgentId, Event>,
) -> Result<Ensemble> {
    for a in group.iter() {
        if !events.contains_key(a) {
            return Err(Error::InvalidEnsemble(format!("no event for agent {a}")));
        }
    }
    for (a, e) in &events {
        if !group.contains(a) {
            return Err(Error::InvalidEnsemble(format!(
                "agent {a} has an event but is not in the group"
            )));
        }
        sys.check_event(e)?;
        let i = sys.agent_index(a)?;
        if let Some((inside, outside)) = sys.locality_witness(i, e) {
            return Err(Error::NotLocal {
                agent: a.to_string(),
                inside: sys.point_ref(inside),
                outside: sys.point_ref(outside),
            });
        }
    }
    Ok(Ensemble {
        name: name.into(),
        group: group.clone(),
        events,
    })
}

fn first_ref(sys: &InterpretedSystem, e: &Event) -> Option<PointRef> {
    sys.sorted_refs(e).into_iter().next()
}

pub fn check_coordination(
    sys: &InterpretedSystem,
    ens: &Ensemble,
    mode: Mode,
) -> VerificationReport {
    let claim = format!("{} is {mode}-coordinated", ens.name);
    let events: Vec<&Event> = ens.events.values().collect();
    let agents: Vec<&AgentId> = ens.events.keys().collect();

    match mode {
        Mode::Perfect => {
            // report the most widely separated miss: the point of e(i) that
            // is farthest from any point of e(j) in the same run
            let mut worst: Option<(Option<usize>, PointRef, usize, usize)> = None;
            for (i, ei) in events.iter().enumerate() {
                for (j, ej) in events.iter().enumerate() {
                    for p in sys.sorted_refs(&ei.difference(ej)) {
                        let r = sys.run_index(&p.0).expect("point from system");
                        let gap = sys
                            .run_indices(r)
                            .filter(|&idx| ej.contains(idx))
                            .map(|idx| sys.point_at(idx).time.abs_diff(p.1))
                            .min();
                        let wider = match &worst {
                            None => true,
                            Some((g, ..)) => match (g, gap) {
                                (None, _) => false,
                                (Some(_), None) => true,
                                (Some(a), Some(b)) => b > *a,
                            },
                        };
                        if wider {
                            worst = Some((gap, p, i, j));
                        }
                    }
                }
            }
            match worst {
                None => VerificationReport::pass(claim),
                Some((gap, p, i, j)) => {
                    let distance = match gap {
                        Some(g) => format!(
                            "the nearest occurrence of it in this run is {g} time units away"
                        ),
                        None => "it never occurs in this run".to_string(),
                    };
                    VerificationReport::fail(
                        claim,
                        Counterexample::new(
                            vec![p],
                            format!(
                                "event of {} holds here but the event of {} does not; {distance}",
                                agents[i], agents[j]
                            ),
                        )
                        .with_agent(agents[j].to_string()),
                    )
                }
            }
        }
        Mode::Eps(eps) => {
            let owned: Vec<Event> = events.iter().map(|e| (*e).clone()).collect();
            let covered = windows_covering(sys, &owned, eps);
            let union = ens.union();
            let uncovered = union.difference(&covered);
            let mut report = match sys.sorted_refs(&uncovered).into_iter().next() {
                Some(p) => {
                    let idx = sys.index_of(sys.point(&p.0, p.1).expect("point from system"));
                    let holder = agents
                        .iter()
                        .zip(&events)
                        .find(|(_, e)| e.contains(idx))
                        .map(|(a, _)| a.to_string())
                        .unwrap_or_default();
                    VerificationReport::fail(
                        claim,
                        Counterexample::new(
                            vec![p],
                            format!(
                                "the event of {holder} holds here but no window of {eps} time \
                                 units around it contains an occurrence of every agent's event"
                            ),
                        )
                        .with_agent(holder),
                    )
                }
                None => VerificationReport::pass(claim),
            };
            let horizon = sys.horizon();
            let near = union
                .iter()
                .filter(|&i| sys.point_at(i).time + eps as usize > horizon)
                .count();
            if eps > 0 && near > 0 {
                report = report.with_note(format!(
                    "{near} event points lie within {eps} of the horizon {horizon}; windows there are truncated"
                ));
            }
            report
        }
        Mode::Eventual => {
            let owned: Vec<Event> = events.iter().map(|e| (*e).clone()).collect();
            let covered = runs_covering(sys, &owned);
            let uncovered = ens.union().difference(&covered);
            match first_ref(sys, &uncovered) {
                Some(p) => VerificationReport::fail(
                    claim,
                    Counterexample::new(
                        vec![p.clone()],
                        format!(
                            "some event holds in run {} but not every agent's event occurs in it",
                            p.0
                        ),
                    ),
                ),
                None => VerificationReport::pass(claim),
            }
        }
    }
}

/// Holds iff some run has a time inside and a time outside `∪ e(i)`.
pub fn is_nontrivial(sys: &InterpretedSystem, ens: &Ensemble) -> VerificationReport {
    let claim = format!("{} is nontrivial", ens.name);
    let union = ens.union();
    let mut runs: Vec<usize> = (0..sys.runs().len()).collect();
    runs.sort_by(|a, b| sys.runs()[*a].id.cmp(&sys.runs()[*b].id));
    for r in runs {
        let range = sys.run_indices(r);
        let inside = range.clone().find(|&i| union.contains(i));
        let outside = range.clone().find(|&i| !union.contains(i));
        if let (Some(a), Some(b)) = (inside, outside) {
            let id = sys.runs()[r].id.clone();
            let (ta, tb) = (sys.point_at(a).time, sys.point_at(b).time);
            return VerificationReport::pass(claim).with_witness(Counterexample::new(
                vec![(id.clone(), ta), (id.clone(), tb)],
                format!("run {id} is inside the ensemble at time {ta} and outside at time {tb}"),
            ));
        }
    }
    VerificationReport::fail(
        claim,
        Counterexample::new(
            vec![],
            "every run lies entirely inside or entirely outside the ensemble",
        ),
    )
}

/// `ψ_e = ∨_{i∈G} ψ_{e(i)}`.
pub fn psi_formula(ens: &Ensemble) -> Formula {
    let single = ens.events.len() == 1;
    let mut parts = ens.events.iter().map(|(a, e)| {
        let name = if single {
            format!("psi_{}", ens.name)
        } else {
            format!("psi_{}.{}", ens.name, a)
        };
        Formula::event_atom(name, e.clone())
    });
    let first = parts.next().expect("ensembles are nonempty");
    parts.fold(first, Formula::or)
}

fn mode_label(mode: Mode) -> String {
    match mode {
        Mode::Perfect => "prop1".into(),
        Mode::Eps(e) => format!("prop3(eps={e})"),
        Mode::Eventual => "prop-eventual".into(),
    }
}

fn common_of(mode: Mode, group: &Group, f: Formula) -> Formula {
    match mode {
        Mode::Perfect => Formula::common(group.clone(), f),
        Mode::Eps(e) => Formula::common_eps(group.clone(), e, f),
        Mode::Eventual => Formula::common_eventually(group.clone(), f),
    }
}

/// The ensemble `e(i) = ev(K_i C*_G f)` for the common-knowledge variant
/// that matches `mode`.
pub fn knowledge_ensemble(
    sys: &InterpretedSystem,
    checker: &mut Checker<'_>,
    group: &Group,
    mode: Mode,
    f: &Formula,
) -> Result<Ensemble> {
    let ck = common_of(mode, group, f.clone());
    let mut events = BTreeMap::new();
    for a in group.iter() {
        let e = checker.extension(&Formula::knows(a.clone(), ck.clone()))?;
        events.insert(a.clone(), e);
    }
    build_ensemble(sys, format!("K_i {ck}"), group, events)
}

fn constant_ensemble(sys: &InterpretedSystem, group: &Group, name: &str, e: Event) -> Ensemble {
    let events = group.iter().map(|a| (a.clone(), e.clone())).collect();
    build_ensemble(sys, name, group, events).expect("constant events are local")
}

/// Checks the two halves of the coordination/common-knowledge
/// correspondence for `mode`:
///
/// - (a) `e(i) = ev(K_i C*_G f)` is `mode`-coordinated;
/// - (b) for coordinated ensembles `e`, `ψ_e → C*_G ψ_e` is valid.
///
/// For (b) the candidates are `supplied` (which must be coordinated) or, if
/// absent, the (a) ensembles of `mode` and of every stronger mode plus the
/// empty and full ensembles.
pub fn verify_correspondence(
    sys: &InterpretedSystem,
    group: &Group,
    mode: Mode,
    f: &Formula,
    supplied: Option<&Ensemble>,
) -> Result<Vec<VerificationReport>> {
    let label = mode_label(mode);
    let mut checker = Checker::new(sys);

    let ens_a = knowledge_ensemble(sys, &mut checker, group, mode, f)?;
    let coord = check_coordination(sys, &ens_a, mode);
    let mut report_a = if coord.holds {
        VerificationReport::pass(format!("{label}(a)"))
    } else {
        VerificationReport::fail(
            format!("{label}(a)"),
            coord
                .counterexample
                .clone()
                .expect("failed report has counterexample"),
        )
    };
    report_a.notes = coord.notes.clone();
    report_a = report_a.with_note(format!("ensemble {}", ens_a.name));

    let candidates: Vec<Ensemble> = match supplied {
        Some(e) => {
            if e.group() != group {
                return Err(Error::InvalidEnsemble(format!(
                    "ensemble group {} differs from {group}",
                    e.group()
                )));
            }
            let c = check_coordination(sys, e, mode);
            if !c.holds {
                return Err(Error::InvalidEnsemble(format!(
                    "ensemble {} is not {mode}-coordinated",
                    e.name
                )));
            }
            vec![e.clone()]
        }
        None => {
            let mut v = vec![ens_a.clone()];
            let stronger: &[Mode] = match mode {
                Mode::Perfect => &[],
                Mode::Eps(0) => &[],
                Mode::Eps(_) => &[Mode::Perfect],
                Mode::Eventual => &[Mode::Perfect, Mode::Eps(1)],
            };
            for &m in stronger {
                let e = knowledge_ensemble(sys, &mut checker, group, m, f)?;
                if check_coordination(sys, &e, mode).holds {
                    v.push(e);
                }
            }
            v.push(constant_ensemble(sys, group, "empty", sys.empty_event()));
            v.push(constant_ensemble(sys, group, "all", sys.full_event()));
            v
        }
    };

    let mut report_b = VerificationReport::pass(format!("{label}(b)"));
    for e in &candidates {
        let psi = psi_formula(e);
        let lhs = checker.extension(&psi)?;
        let rhs = checker.extension(&common_of(mode, group, psi))?;
        let bad = lhs.difference(&rhs);
        if let Some(p) = first_ref(sys, &bad) {
            report_b = VerificationReport::fail(
                format!("{label}(b)"),
                Counterexample::new(
                    vec![p],
                    format!(
                        "psi of ensemble {} holds here without its common knowledge",
                        e.name
                    ),
                ),
            );
            break;
        }
    }
    report_b = report_b.with_note(format!(
        "checked {} ensemble(s): {}",
        candidates.len(),
        candidates
            .iter()
            .map(|e| e.name.as_str())
            .collect::<Vec<_>>()
            .join("; ")
    ));
    Ok(vec![report_a, report_b])
}

/// Ensemble file: each event is given by local-state labels or by explicit
/// points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDesc {
    pub name: String,
    pub group: Vec<String>,
    pub events: BTreeMap<String, EventDesc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventDesc {
    #[serde(
        rename = "localStates",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub local_states: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<PointRef>>,
}

pub fn load_ensemble(sys: &InterpretedSystem, desc: &EnsembleDesc) -> Result<Ensemble> {
    let group = Group::of(&desc.group)?;
    let mut events = BTreeMap::new();
    for (name, ed) in &desc.events {
        let agent = AgentId::new(name.as_str())?;
        let event = match (&ed.local_states, &ed.points) {
            (Some(labels), None) => sys.event_from_local_states(&agent, labels)?,
            (None, Some(points)) => sys.event_from_refs(points)?,
            _ => {
                return Err(Error::InvalidEnsemble(format!(
                    "event for {name} needs exactly one of \"localStates\" or \"points\""
                )))
            }
        };
        events.insert(agent, event);
    }
    build_ensemble(sys, desc.name.clone(), &group, events)
}

pub fn ensemble_from_json(sys: &InterpretedSystem, text: &str) -> Result<Ensemble> {
    let desc: EnsembleDesc = serde_json::from_str(text)?;
    load_ensemble(sys, &desc)
}
