//! Alice sends Bob one message over a channel that delivers within ε.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{AgentId, InterpretedSystem, RunDesc, StateDesc, SystemDesc};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AliceBobConfig {
    pub eps: u32,
    pub max_send: u32,
    pub horizon: u32,
    /// Shared clock in every local state, and the send time in the message.
    pub timestamped: bool,
}

impl AliceBobConfig {
    /// Defaults the horizon to the smallest admissible value `S + 3ε`.
    pub fn new(eps: u32, max_send: u32, timestamped: bool) -> Self {
        AliceBobConfig {
            eps,
            max_send,
            horizon: max_send + 3 * eps,
            timestamped,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps < 1 {
            return Err(Error::InvalidConfig("eps must be at least 1".into()));
        }
        if self.horizon < self.max_send + 3 * self.eps {
            return Err(Error::InvalidConfig(format!(
                "horizon {} is below max_send + 3*eps = {}",
                self.horizon,
                self.max_send + 3 * self.eps
            )));
        }
        Ok(())
    }
}

pub fn run_id(send: u32, delay: u32) -> String {
    format!("r(s={send},d={delay})")
}

/// Id of the timestamped variant's run in which Alice never sends.
pub const NEVER_RUN: &str = "r(never)";

fn state(env: String, alice: String, bob: String, props: Vec<String>) -> StateDesc {
    let mut locals = BTreeMap::new();
    locals.insert("A".to_string(), alice);
    locals.insert("B".to_string(), bob);
    StateDesc { env, locals, props }
}

pub fn alice_bob_desc(cfg: &AliceBobConfig) -> Result<SystemDesc> {
    cfg.validate()?;
    let horizon = cfg.horizon;
    let mut runs = Vec::new();
    for s in 0..=cfg.max_send {
        for d in 0..=cfg.eps {
            let states = (0..=horizon)
                .map(|m| {
                    let phase = if m < s {
                        "before-send"
                    } else if m < s + d {
                        "in-transit"
                    } else {
                        "delivered"
                    };
                    let env = format!("s={s},d={d}:{phase}");
                    let (alice, bob) = if cfg.timestamped {
                        let a = if m < s {
                            format!("t={m},idle")
                        } else {
                            format!("t={m},sent@{s}")
                        };
                        let b = if m < s + d {
                            format!("t={m},waiting")
                        } else {
                            format!("t={m},recv@{s}")
                        };
                        (a, b)
                    } else {
                        let a = if m < s {
                            "idle".to_string()
                        } else {
                            format!("cnt{}", m - s)
                        };
                        let b = if m < s + d {
                            "waiting".to_string()
                        } else {
                            format!("cnt{}", m - s - d)
                        };
                        (a, b)
                    };
                    let props = if m >= s {
                        vec!["sent".to_string(), format!("sent@{s}")]
                    } else {
                        vec![]
                    };
                    state(env, alice, bob, props)
                })
                .collect();
            runs.push(RunDesc {
                id: run_id(s, d),
                states,
            });
        }
    }
    if cfg.timestamped {
        // Without this run Bob's clock would tell him a send at max_send
        // must already have happened.
        runs.push(RunDesc {
            id: NEVER_RUN.to_string(),
            states: (0..=horizon)
                .map(|m| {
                    state(
                        "never".into(),
                        format!("t={m},idle"),
                        format!("t={m},waiting"),
                        vec![],
                    )
                })
                .collect(),
        });
    }
    let mut propositions = vec!["sent".to_string()];
    propositions.extend((0..=cfg.max_send).map(|t| format!("sent@{t}")));
    let mut meta = BTreeMap::new();
    meta.insert("scenario".into(), "alicebob".into());
    meta.insert("eps".into(), cfg.eps.to_string());
    meta.insert("max_send".into(), cfg.max_send.to_string());
    meta.insert("timestamped".into(), cfg.timestamped.to_string());
    Ok(SystemDesc {
        agents: vec![AgentId::new("A")?, AgentId::new("B")?],
        horizon: horizon as usize,
        propositions,
        runs,
        meta,
    })
}

pub fn gen_alice_bob(cfg: &AliceBobConfig) -> Result<InterpretedSystem> {
    InterpretedSystem::build(&alice_bob_desc(cfg)?)
}
