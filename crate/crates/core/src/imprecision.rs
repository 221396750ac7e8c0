//! Temporal imprecision, perfectly coordinated ensembles, and the
//! run-constancy of common knowledge.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::coordination::{build_ensemble, Ensemble};
use crate::error::{Error, Result};
use crate::logic::{Checker, Formula, Group};
use crate::model::{AgentId, InterpretedSystem};
use crate::partition::reachability_partition;
use crate::report::{Counterexample, VerificationReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImprecisionFailure {
    pub run: String,
    pub time: usize,
    pub group: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImprecisionWitness {
    pub agents: Vec<String>,
    pub has_imprecision: bool,
    /// Horizon 0: no (m, m+1) pair exists, so the condition is vacuous and
    /// the system is not classified as imprecise.
    pub degenerate_horizon: bool,
    pub subsets_checked: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<ImprecisionFailure>,
}

#[derive(Debug, Clone, Copy)]
pub struct ImprecisionOptions {
    /// Enumerate every group of size ≥ 2 up to this many agents; above it
    /// only pairs are checked. Pairs suffice: a witness pair inside G is a
    /// witness for every superset of G.
    pub max_subset_agents: usize,
}

impl Default for ImprecisionOptions {
    fn default() -> Self {
        ImprecisionOptions {
            max_subset_agents: 6,
        }
    }
}

pub fn has_temporal_imprecision(sys: &InterpretedSystem) -> Result<ImprecisionWitness> {
    has_temporal_imprecision_with(sys, ImprecisionOptions::default())
}

pub fn has_temporal_imprecision_with(
    sys: &InterpretedSystem,
    opts: ImprecisionOptions,
) -> Result<ImprecisionWitness> {
    let n = sys.agents().len();
    if n < 2 {
        return Err(Error::TooFewAgents {
            needed: 2,
            found: n,
        });
    }
    let agents: Vec<String> = sys.agents().iter().map(|a| a.to_string()).collect();
    if sys.horizon() == 0 {
        return Ok(ImprecisionWitness {
            agents,
            has_imprecision: false,
            degenerate_horizon: true,
            subsets_checked: 0,
            failure: None,
        });
    }

    // co[i][j]: (label of i, label of j) pairs occurring together at a point
    let mut co: Vec<Vec<HashSet<(u32, u32)>>> = vec![vec![HashSet::new(); n]; n];
    for idx in 0..sys.num_points() {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    co[i][j].insert((sys.local_id(i, idx), sys.local_id(j, idx)));
                }
            }
        }
    }

    let mut subsets: Vec<Vec<usize>> = if n <= opts.max_subset_agents {
        (0u32..1 << n)
            .filter(|m| m.count_ones() >= 2)
            .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
            .collect()
    } else {
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| vec![i, j]))
            .collect()
    };
    subsets.sort_by_key(|s| (s.len(), s.clone()));

    let mut runs: Vec<usize> = (0..sys.runs().len()).collect();
    runs.sort_by(|a, b| sys.runs()[*a].id.cmp(&sys.runs()[*b].id));

    for g in &subsets {
        for &r in &runs {
            let base = sys.run_indices(r).start;
            for m in 0..sys.horizon() {
                let now = base + m;
                let next = now + 1;
                let mixed = g.iter().any(|&i| {
                    g.iter().any(|&j| {
                        i != j && co[i][j].contains(&(sys.local_id(i, now), sys.local_id(j, next)))
                    })
                });
                if !mixed {
                    return Ok(ImprecisionWitness {
                        agents,
                        has_imprecision: false,
                        degenerate_horizon: false,
                        subsets_checked: subsets.len(),
                        failure: Some(ImprecisionFailure {
                            run: sys.runs()[r].id.clone(),
                            time: m,
                            group: g.iter().map(|&i| sys.agents()[i].to_string()).collect(),
                        }),
                    });
                }
            }
        }
    }
    Ok(ImprecisionWitness {
        agents,
        has_imprecision: true,
        degenerate_horizon: false,
        subsets_checked: subsets.len(),
        failure: None,
    })
}

fn require_pair(group: &Group) -> Result<()> {
    if group.len() < 2 {
        return Err(Error::InvalidGroup(format!(
            "{group} has fewer than 2 agents"
        )));
    }
    Ok(())
}

/// Searches for a nontrivial perfectly coordinated ensemble for `group`.
///
/// An event is local to every member of G exactly when it is a union of
/// G-reachability classes, so a nontrivial perfect ensemble exists iff a
/// single class splits some run; that class is returned as the ensemble.
pub fn find_nontrivial_perfect_ensemble(
    sys: &InterpretedSystem,
    group: &Group,
) -> Result<Option<Ensemble>> {
    require_pair(group)?;
    let partition = reachability_partition(sys, group)?;
    for (c, class) in partition.classes.iter().enumerate() {
        let splits = (0..sys.runs().len()).any(|r| {
            let range = sys.run_indices(r);
            class.any_in(range.clone()) && !class.all_in(range)
        });
        if splits {
            let events: BTreeMap<AgentId, _> =
                group.iter().map(|a| (a.clone(), class.clone())).collect();
            return build_ensemble(sys, format!("class{c}"), group, events).map(Some);
        }
    }
    Ok(None)
}

/// `C_G f` at `(r, m)` agrees with `C_G f` at `(r, 0)` for all runs and times.
pub fn ck_constant_check(
    sys: &InterpretedSystem,
    group: &Group,
    f: &Formula,
) -> Result<VerificationReport> {
    require_pair(group)?;
    let ck = Formula::common(group.clone(), f.clone());
    let ext = Checker::new(sys).extension(&ck)?;
    let claim = format!("{ck} is constant along every run");
    let mut runs: Vec<usize> = (0..sys.runs().len()).collect();
    runs.sort_by(|a, b| sys.runs()[*a].id.cmp(&sys.runs()[*b].id));
    for r in runs {
        let range = sys.run_indices(r);
        let at0 = ext.contains(range.start);
        if let Some(idx) = range.clone().find(|&i| ext.contains(i) != at0) {
            let id = sys.runs()[r].id.clone();
            let m = sys.point_at(idx).time;
            return Ok(VerificationReport::fail(
                claim,
                Counterexample::new(
                    vec![(id.clone(), 0), (id, m)],
                    format!(
                        "common knowledge is {} at time 0 but {} at time {m}",
                        at0, !at0
                    ),
                ),
            ));
        }
    }
    Ok(VerificationReport::pass(claim))
}
