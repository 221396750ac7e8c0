//! Small random systems and formulas for property tests and benchmarks.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::logic::{Formula, Group};
use crate::model::{AgentId, InterpretedSystem, RunDesc, StateDesc, SystemDesc};

#[derive(Debug, Clone, Copy)]
pub struct SystemParams {
    pub min_agents: usize,
    pub max_agents: usize,
    pub max_runs: usize,
    pub max_horizon: usize,
    /// Local labels are drawn from this many values per agent.
    pub labels: usize,
    pub env_values: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            min_agents: 1,
            max_agents: 3,
            max_runs: 4,
            max_horizon: 6,
            labels: 3,
            env_values: 2,
        }
    }
}

pub const PROPS: [&str; 2] = ["p", "q"];
const AGENT_NAMES: [&str; 6] = ["A", "B", "C", "D", "E", "F"];

pub fn random_desc<R: Rng + ?Sized>(rng: &mut R, params: &SystemParams) -> SystemDesc {
    let n = rng.gen_range(params.min_agents..=params.max_agents);
    let runs = rng.gen_range(1..=params.max_runs);
    let horizon = rng.gen_range(0..=params.max_horizon);
    let agents: Vec<AgentId> = AGENT_NAMES[..n]
        .iter()
        .map(|a| AgentId::new(*a).expect("valid name"))
        .collect();
    // props are a function of the global state
    let mut valuation: HashMap<(String, Vec<String>), Vec<String>> = HashMap::new();
    let runs = (0..runs)
        .map(|r| RunDesc {
            id: format!("r{r}"),
            states: (0..=horizon)
                .map(|_| {
                    let env = format!("e{}", rng.gen_range(0..params.env_values));
                    let locals: Vec<String> = (0..n)
                        .map(|_| format!("l{}", rng.gen_range(0..params.labels)))
                        .collect();
                    let props = valuation
                        .entry((env.clone(), locals.clone()))
                        .or_insert_with(|| {
                            PROPS
                                .iter()
                                .filter(|_| rng.gen_bool(0.5))
                                .map(|p| p.to_string())
                                .collect()
                        })
                        .clone();
                    StateDesc {
                        env,
                        locals: agents
                            .iter()
                            .map(|a| a.to_string())
                            .zip(locals)
                            .collect::<BTreeMap<_, _>>(),
                        props,
                    }
                })
                .collect(),
        })
        .collect();
    SystemDesc {
        agents,
        horizon,
        propositions: PROPS.iter().map(|p| p.to_string()).collect(),
        runs,
        meta: BTreeMap::new(),
    }
}

pub fn random_system<R: Rng + ?Sized>(rng: &mut R, params: &SystemParams) -> InterpretedSystem {
    InterpretedSystem::build(&random_desc(rng, params)).expect("generated systems are valid")
}

pub fn random_group<R: Rng + ?Sized>(rng: &mut R, agents: &[AgentId]) -> Group {
    let size = rng.gen_range(1..=agents.len());
    let chosen: Vec<AgentId> = agents.choose_multiple(rng, size).cloned().collect();
    Group::new(chosen).expect("nonempty")
}

/// A formula over `p`, `q` and `agents` with depth at most `depth`.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, agents: &[AgentId], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            k => Formula::atom(PROPS[k % 2]),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..14) {
        0 => random_formula(rng, agents, d).not(),
        1 => random_formula(rng, agents, d).and(random_formula(rng, agents, d)),
        2 => random_formula(rng, agents, d).or(random_formula(rng, agents, d)),
        3 => random_formula(rng, agents, d).implies(random_formula(rng, agents, d)),
        4 | 5 => {
            let a = agents.choose(rng).expect("agents").clone();
            Formula::knows(a, random_formula(rng, agents, d))
        }
        6 => Formula::everyone(random_group(rng, agents), random_formula(rng, agents, d)),
        7 => {
            let k = rng.gen_range(0..=3);
            Formula::everyone_k(random_group(rng, agents), k, random_formula(rng, agents, d))
        }
        8 | 9 => Formula::common(random_group(rng, agents), random_formula(rng, agents, d)),
        10 => {
            let e = rng.gen_range(0..=2);
            Formula::everyone_eps(random_group(rng, agents), e, random_formula(rng, agents, d))
        }
        11 => {
            let e = rng.gen_range(0..=2);
            Formula::common_eps(random_group(rng, agents), e, random_formula(rng, agents, d))
        }
        12 => {
            Formula::everyone_eventually(random_group(rng, agents), random_formula(rng, agents, d))
        }
        _ => Formula::common_eventually(random_group(rng, agents), random_formula(rng, agents, d)),
    }
}
