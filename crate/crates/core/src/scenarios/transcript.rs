use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::{attack, muddy};
use crate::error::Result;
use crate::model::{InterpretedSystem, Point};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub time: usize,
    pub env: String,
    pub locals: BTreeMap<String, String>,
    pub props: Vec<String>,
    /// Decoded actions and proposition changes since the previous time.
    pub events: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transcript {
    pub run: String,
    pub entries: Vec<TranscriptEntry>,
}

fn muddy_events(sys: &InterpretedSystem, p: Point, prev: Option<Point>) -> Vec<String> {
    let mut out = Vec::new();
    for (c, agent) in sys.agents().iter().enumerate() {
        let before: Vec<&str> = prev
            .map(|q| muddy::tokens(sys.local_label(c, q)).collect())
            .unwrap_or_default();
        for t in muddy::tokens(sys.local_label(c, p)) {
            if before.contains(&t) {
                continue;
            }
            if t == "ann" {
                out.push(format!("child {agent} hears the announcement"));
            } else if let Some(rest) = t.strip_prefix('q') {
                if let Some((q, ans)) = rest.split_once(':') {
                    let word = if ans == "yes" { "Yes" } else { "No" };
                    out.push(format!(
                        "child {agent} hears question {q} and answers {word:?}"
                    ));
                }
            } else if let Some(rest) = t.strip_prefix('a') {
                if let Some((qc, ans)) = rest.split_once(':') {
                    if let Some((q, from)) = qc.split_once('.') {
                        out.push(format!(
                            "child {agent} hears child {from} answer {ans} to question {q}"
                        ));
                    }
                }
            }
        }
    }
    out
}

pub fn transcript(sys: &InterpretedSystem, run: &str) -> Result<Transcript> {
    let r = sys.run_index(run)?;
    let scenario = sys.meta().get("scenario").map(String::as_str);
    let mut entries = Vec::new();
    let mut prev: Option<Point> = None;
    for m in 0..=sys.horizon() {
        let p = Point::new(r, m);
        let gs = sys.global_state(p);
        let locals = sys
            .agents()
            .iter()
            .zip(&gs.locals)
            .map(|(a, l)| (a.to_string(), l.clone()))
            .collect();
        let props: Vec<String> = sys.props_at(p).map(str::to_string).collect();
        let mut events = match scenario {
            Some("muddy") => muddy_events(sys, p, prev),
            Some("attack") if m > 0 => attack::actions_at(sys, p),
            _ => Vec::new(),
        };
        let before: Vec<String> = prev
            .map(|q| sys.props_at(q).map(str::to_string).collect())
            .unwrap_or_default();
        for x in &props {
            if !before.contains(x) {
                events.push(format!("+{x}"));
            }
        }
        for x in &before {
            if !props.contains(x) {
                events.push(format!("-{x}"));
            }
        }
        entries.push(TranscriptEntry {
            time: m,
            env: gs.env.clone(),
            locals,
            props,
            events,
        });
        prev = Some(p);
    }
    Ok(Transcript {
        run: run.to_string(),
        entries,
    })
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "run {}", self.run)?;
        for e in &self.entries {
            writeln!(f, "t={}  env: {}", e.time, e.env)?;
            for (a, l) in &e.locals {
                writeln!(f, "    {a}: {l}")?;
            }
            if !e.props.is_empty() {
                writeln!(f, "    true: {}", e.props.join(" "))?;
            }
            for ev in &e.events {
                writeln!(f, "    * {ev}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::alice_bob::{gen_alice_bob, AliceBobConfig};
    use crate::scenarios::muddy::{gen_muddy, MuddyConfig};

    #[test]
    fn sent_from_time_zero() {
        let sys = gen_alice_bob(&AliceBobConfig::new(1, 2, false)).unwrap();
        let t = transcript(&sys, "r(s=0,d=0)").unwrap();
        assert!(t
            .entries
            .iter()
            .all(|e| e.props.contains(&"sent".to_string())));
        assert!(t.entries[0].events.contains(&"+sent".to_string()));
    }

    #[test]
    fn muddy_log_shows_announcement_and_answer() {
        let sys = gen_muddy(&MuddyConfig::coarse(2)).unwrap();
        let t = transcript(&sys, "muddy{1}").unwrap();
        let first = &t.entries[1].events;
        assert!(first.contains(&"child 1 hears the announcement".to_string()));
        assert!(first.contains(&"child 1 hears question 1 and answers \"Yes\"".to_string()));
        assert!(transcript(&sys, "nope").is_err());
    }
}
