use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use ckmc_core::coordination::{
    check_coordination, ensemble_from_json, is_nontrivial, verify_correspondence,
};
use ckmc_core::imprecision::{
    ck_constant_check, find_nontrivial_perfect_ensemble, has_temporal_imprecision,
};
use ckmc_core::scenarios::alice_bob::{alice_bob_desc, AliceBobConfig};
use ckmc_core::scenarios::attack::{analyze_attack, attack_desc, builtin_protocol, AttackProtocol};
use ckmc_core::scenarios::muddy::{muddy_desc, MuddyConfig, MuddyVariant};
use ckmc_core::scenarios::transcript;
use ckmc_core::{
    parse_formula, Checker, Ensemble, Formula, Group, InterpretedSystem, Mode, SystemDesc,
};

use crate::{Claim, Command, Scenario, Variant};

pub struct Outcome {
    pub json: String,
    pub summary: Option<String>,
    pub ok: bool,
}

impl Outcome {
    fn new(value: Value, ok: bool, summary: impl Into<String>) -> Self {
        Outcome {
            json: serde_json::to_string_pretty(&value).expect("json values serialize"),
            summary: Some(summary.into()),
            ok,
        }
    }
}

type CmdResult = Result<Outcome, String>;

fn load_system(path: &Path) -> Result<InterpretedSystem, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    InterpretedSystem::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn formula(text: &str) -> Result<Formula, String> {
    parse_formula(text).map_err(|e| format!("formula {text:?}: {e}"))
}

fn group(text: &str) -> Result<Group, String> {
    text.parse().map_err(|e: ckmc_core::Error| e.to_string())
}

fn mode(text: &str) -> Result<Mode, String> {
    text.parse().map_err(|e: ckmc_core::Error| e.to_string())
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

/// Largest ε parameter of any windowed operator in `f`.
fn max_window(f: &Formula) -> Option<u32> {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) | Formula::EventAtom { .. } => None,
        Formula::Eeps(_, e, g) | Formula::Ceps(_, e, g) => {
            Some(max_window(g).map_or(*e, |x| x.max(*e)))
        }
        Formula::Not(g)
        | Formula::K(_, g)
        | Formula::E(_, g)
        | Formula::Ek(_, _, g)
        | Formula::C(_, g)
        | Formula::Ediamond(_, g)
        | Formula::Cdiamond(_, g) => max_window(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            match (max_window(a), max_window(b)) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            }
        }
    }
}

fn ensemble_json(sys: &InterpretedSystem, ens: &Ensemble) -> Value {
    let events: serde_json::Map<String, Value> = ens
        .events()
        .iter()
        .map(|(a, e)| (a.to_string(), to_value(&sys.sorted_refs(e))))
        .collect();
    json!({ "name": ens.name, "group": ens.group().to_string(), "events": events })
}

pub fn run(cmd: &Command) -> CmdResult {
    match cmd {
        Command::Check {
            system,
            formula: text,
            at,
            expect,
        } => check(&load_system(system)?, text, at.as_deref(), *expect),
        Command::Extension {
            system,
            formula: text,
        } => check(&load_system(system)?, text, None, None),
        Command::Ensemble {
            system,
            ensemble,
            mode: m,
        } => {
            let sys = load_system(system)?;
            let text = fs::read_to_string(ensemble)
                .map_err(|e| format!("cannot read {}: {e}", ensemble.display()))?;
            let ens = ensemble_from_json(&sys, &text)
                .map_err(|e| format!("{}: {e}", ensemble.display()))?;
            let m = mode(m)?;
            let coord = check_coordination(&sys, &ens, m);
            let nontrivial = is_nontrivial(&sys, &ens);
            let summary = format!(
                "{}: {m}-coordinated: {}, nontrivial: {}",
                ens.name, coord.holds, nontrivial.holds
            );
            Ok(Outcome::new(
                json!({
                    "ensemble": ens.name,
                    "mode": m.to_string(),
                    "coordination": to_value(&coord),
                    "nontrivial": to_value(&nontrivial),
                }),
                coord.holds,
                summary,
            ))
        }
        Command::Imprecision { system, group: g } => {
            let sys = load_system(system)?;
            let witness = has_temporal_imprecision(&sys).map_err(|e| e.to_string())?;
            let mut value = json!({ "witness": to_value(&witness) });
            let mut summary = if witness.degenerate_horizon {
                "horizon 0: imprecision is degenerate".to_string()
            } else {
                format!("temporal imprecision: {}", witness.has_imprecision)
            };
            if let Some(g) = g {
                let g = group(g)?;
                let found =
                    find_nontrivial_perfect_ensemble(&sys, &g).map_err(|e| e.to_string())?;
                summary.push_str(&format!(
                    "; nontrivial perfectly coordinated ensemble for {g}: {}",
                    if found.is_some() { "found" } else { "none" }
                ));
                value["ensemble"] = found.map_or(Value::Null, |e| ensemble_json(&sys, &e));
            }
            Ok(Outcome::new(value, true, summary))
        }
        Command::Verify {
            system,
            claim,
            group: g,
            formula: text,
            eps,
            ensemble,
        } => verify(
            &load_system(system)?,
            *claim,
            g,
            text.as_deref(),
            *eps,
            ensemble.as_deref(),
        ),
        Command::Attack { system, mode: m } => {
            let sys = load_system(system)?;
            let m = mode(m)?;
            let report = analyze_attack(&sys, m).map_err(|e| e.to_string())?;
            let summary = format!(
                "attacks ever: {}, {m}-coordinated: {}, common knowledge when attacking: {}",
                report.attacks_ever, report.coordinated, report.ck_at_attack
            );
            let ok = report.coordinated;
            Ok(Outcome::new(to_value(&report), ok, summary))
        }
        Command::Scenario { scenario } => generate(scenario),
        Command::Transcript { system, run } => {
            let sys = load_system(system)?;
            let t = transcript(&sys, run).map_err(|e| e.to_string())?;
            Ok(Outcome::new(to_value(&t), true, t.to_string()))
        }
    }
}

fn check(sys: &InterpretedSystem, text: &str, at: Option<&str>, expect: Option<bool>) -> CmdResult {
    let f = formula(text)?;
    let mut checker = Checker::new(sys);
    match at {
        Some(at) => {
            let p = sys.parse_point(at).map_err(|e| e.to_string())?;
            let value = checker.eval(&f, p).map_err(|e| e.to_string())?;
            let mut notes = Vec::new();
            if let Some(eps) = max_window(&f) {
                if eps > 0 && p.time + eps as usize > sys.horizon() {
                    notes.push(format!(
                        "time {} is within {eps} of the horizon {}; windows there are truncated",
                        p.time,
                        sys.horizon()
                    ));
                }
            }
            let ok = expect.is_none_or(|e| e == value);
            let mut out = json!({
                "formula": f.to_string(),
                "point": to_value(&sys.point_ref(p)),
                "value": value,
            });
            if let Some(e) = expect {
                out["assert"] = json!(e);
                out["holds"] = json!(ok);
            }
            if !notes.is_empty() {
                out["notes"] = json!(notes);
            }
            let mut summary = format!("{f} at {at}: {value}");
            for n in &notes {
                summary.push_str(&format!("\nnote: {n}"));
            }
            if !ok {
                summary.push_str(&format!("\nassertion failed: expected {}", !value));
            }
            Ok(Outcome::new(out, ok, summary))
        }
        None => {
            let ext = checker.extension(&f).map_err(|e| e.to_string())?;
            let ok = match expect {
                None => true,
                Some(true) => ext.is_full(),
                Some(false) => ext.is_empty(),
            };
            let mut out = json!({
                "formula": f.to_string(),
                "extension": to_value(&sys.sorted_refs(&ext)),
                "size": ext.len(),
                "points": sys.num_points(),
            });
            if let Some(e) = expect {
                out["assert"] = json!(e);
                out["holds"] = json!(ok);
            }
            let mut summary = format!("{f} holds at {} of {} points", ext.len(), sys.num_points());
            if !ok {
                summary.push_str(if expect == Some(true) {
                    "\nassertion failed: formula is not valid"
                } else {
                    "\nassertion failed: formula is satisfied somewhere"
                });
            }
            Ok(Outcome::new(out, ok, summary))
        }
    }
}

fn verify(
    sys: &InterpretedSystem,
    claim: Claim,
    g: &str,
    text: Option<&str>,
    eps: Option<u32>,
    ensemble: Option<&Path>,
) -> CmdResult {
    let g = group(g)?;
    let need_formula = || -> Result<Formula, String> {
        formula(text.ok_or_else(|| "this claim needs --formula".to_string())?)
    };
    match claim {
        Claim::Prop1 | Claim::Prop3 | Claim::PropEventual => {
            let m = match claim {
                Claim::Prop1 => Mode::Perfect,
                Claim::Prop3 => Mode::Eps(eps.ok_or("prop3 needs --eps")?),
                _ => Mode::Eventual,
            };
            let f = need_formula()?;
            let supplied = match ensemble {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                    Some(
                        ensemble_from_json(sys, &text)
                            .map_err(|e| format!("{}: {e}", path.display()))?,
                    )
                }
                None => None,
            };
            let reports = verify_correspondence(sys, &g, m, &f, supplied.as_ref())
                .map_err(|e| e.to_string())?;
            let holds = reports.iter().all(|r| r.holds);
            let summary = reports
                .iter()
                .map(|r| format!("{}: {}", r.claim, if r.holds { "holds" } else { "FAILS" }))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Outcome::new(
                json!({
                    "claim": claim_name(claim),
                    "mode": m.to_string(),
                    "group": g.to_string(),
                    "formula": f.to_string(),
                    "holds": holds,
                    "reports": to_value(&reports),
                }),
                holds,
                summary,
            ))
        }
        Claim::Cor3 => {
            let f = need_formula()?;
            let report = ck_constant_check(sys, &g, &f).map_err(|e| e.to_string())?;
            let imprecise = has_temporal_imprecision(sys)
                .map_err(|e| e.to_string())?
                .has_imprecision;
            let mut summary = format!(
                "{}: {}",
                report.claim,
                if report.holds { "holds" } else { "FAILS" }
            );
            if !imprecise {
                summary.push_str("\nnote: the system has no temporal imprecision");
            }
            Ok(Outcome::new(
                json!({
                    "claim": "cor3",
                    "group": g.to_string(),
                    "formula": f.to_string(),
                    "imprecision": imprecise,
                    "holds": report.holds,
                    "report": to_value(&report),
                }),
                report.holds,
                summary,
            ))
        }
        Claim::Prop2 => {
            let witness = has_temporal_imprecision(sys).map_err(|e| e.to_string())?;
            let found = find_nontrivial_perfect_ensemble(sys, &g).map_err(|e| e.to_string())?;
            let holds = !(witness.has_imprecision && found.is_some());
            let summary = format!(
                "temporal imprecision: {}; nontrivial perfectly coordinated ensemble for {g}: {}",
                witness.has_imprecision,
                if found.is_some() { "found" } else { "none" }
            );
            Ok(Outcome::new(
                json!({
                    "claim": "prop2",
                    "group": g.to_string(),
                    "imprecision": witness.has_imprecision,
                    "holds": holds,
                    "ensemble": found.map_or(Value::Null, |e| ensemble_json(sys, &e)),
                }),
                holds,
                summary,
            ))
        }
    }
}

fn claim_name(c: Claim) -> &'static str {
    match c {
        Claim::Prop1 => "prop1",
        Claim::Prop3 => "prop3",
        Claim::PropEventual => "prop-eventual",
        Claim::Cor3 => "cor3",
        Claim::Prop2 => "prop2",
    }
}

fn generate(scenario: &Scenario) -> CmdResult {
    let (name, desc, out): (&str, SystemDesc, _) = match scenario {
        Scenario::Muddy {
            n,
            variant,
            rounds,
            delay_min,
            delay_max,
            max_runs,
            output,
        } => {
            let cfg = MuddyConfig {
                n: *n,
                variant: match variant {
                    Variant::Coarse => MuddyVariant::Coarse,
                    Variant::Fine => MuddyVariant::Fine {
                        delay_min: *delay_min,
                        delay_max: *delay_max,
                    },
                },
                question_rounds: rounds.unwrap_or(*n),
                max_runs: *max_runs,
            };
            (
                "muddy",
                muddy_desc(&cfg).map_err(|e| e.to_string())?,
                &output.out,
            )
        }
        Scenario::Alicebob {
            eps,
            max_send,
            horizon,
            timestamped,
            output,
        } => {
            let mut cfg = AliceBobConfig::new(*eps, *max_send, *timestamped);
            if let Some(h) = horizon {
                cfg.horizon = *h;
            }
            (
                "alicebob",
                alice_bob_desc(&cfg).map_err(|e| e.to_string())?,
                &output.out,
            )
        }
        Scenario::Attack {
            protocol,
            eps,
            output,
        } => {
            let path = Path::new(protocol);
            let p = if path.is_file() {
                let text = fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                AttackProtocol::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?
            } else {
                builtin_protocol(protocol, *eps).map_err(|e| e.to_string())?
            };
            (
                "attack",
                attack_desc(&p).map_err(|e| e.to_string())?,
                &output.out,
            )
        }
    };
    let text = desc.to_json();
    match out {
        None => Ok(Outcome {
            json: text,
            summary: None,
            ok: true,
        }),
        Some(path) => {
            fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            let summary = format!(
                "wrote {name} system with {} runs, horizon {} to {}",
                desc.runs.len(),
                desc.horizon,
                path.display()
            );
            Ok(Outcome::new(
                json!({
                    "scenario": name,
                    "out": path.display().to_string(),
                    "agents": desc.agents.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                    "runs": desc.runs.len(),
                    "horizon": desc.horizon,
                }),
                true,
                summary,
            ))
        }
    }
}
