//! Acceptance criteria. One PASS/FAIL line per criterion; exits nonzero if
//! any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use ckmc_core::coordination::verify_correspondence;
use ckmc_core::imprecision::{
    ck_constant_check, find_nontrivial_perfect_ensemble, has_temporal_imprecision,
};
use ckmc_core::logic::{ck_via_closure, gfp_extension, stabilized_everyone, ParseError};
use ckmc_core::random::{random_formula, random_group, random_system, SystemParams};
use ckmc_core::scenarios::attack::{ack_protocol, bounded_eps_protocol, never_protocol};
use ckmc_core::scenarios::muddy::{answer_table, coarse_run_id};
use ckmc_core::scenarios::*;
use ckmc_core::{parse_formula, Checker, Event, Formula, Group, InterpretedSystem, Mode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const RANDOM_SYSTEMS: u64 = 200;
const FORMULAS_PER_SYSTEM: usize = 3;

fn f(text: &str) -> Formula {
    parse_formula(text).expect("fixed formula parses")
}

fn ext(sys: &InterpretedSystem, f: &Formula) -> Event {
    Checker::new(sys).extension(f).expect("formula resolves")
}

fn refs(sys: &InterpretedSystem, e: &Event) -> BTreeSet<(String, usize)> {
    sys.sorted_refs(e).into_iter().collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// The random battery shared by criteria 4, 5 and 8.
fn battery() -> Vec<(InterpretedSystem, Vec<(Group, Formula)>)> {
    (0..RANDOM_SYSTEMS)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sys = random_system(&mut rng, &SystemParams::default());
            let cases = (0..FORMULAS_PER_SYSTEM)
                .map(|_| {
                    let g = random_group(&mut rng, sys.agents());
                    (g, random_formula(&mut rng, sys.agents(), 4))
                })
                .collect();
            (sys, cases)
        })
        .collect()
}

fn all_agents(sys: &InterpretedSystem) -> Group {
    Group::new(sys.agents().iter().cloned()).expect("systems have agents")
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..1 << n).map(move |m| (1..=n).filter(|c| m & (1 << (c - 1)) != 0).collect())
}

fn muddy_induction() -> Outcome {
    let mut checked = 0;
    for n in 2..=4 {
        let sys = gen_muddy(&MuddyConfig::coarse(n)).map_err(|e| e.to_string())?;
        for muddy in subsets(n) {
            let k = muddy.len();
            let id = coarse_run_id(&muddy);
            let r = sys.run_index(&id).map_err(|e| e.to_string())?;
            let expected: Vec<Vec<bool>> = (1..=n)
                .map(|q| {
                    (1..=n)
                        .map(|c| if muddy.contains(&c) { q >= k } else { q > k })
                        .collect()
                })
                .collect();
            let table = answer_table(&sys, r).map_err(|e| e.to_string())?;
            ensure(table == expected, || {
                format!("{id}: answers {table:?}, expected {expected:?}")
            })?;
            let log = transcript(&sys, &id).map_err(|e| e.to_string())?;
            for q in 1..=n {
                for c in 1..=n {
                    let word = if expected[q - 1][c - 1] { "Yes" } else { "No" };
                    let line = format!("child {c} hears question {q} and answers \"{word}\"");
                    let time = 2 * q - 1;
                    ensure(log.entries[time].events.contains(&line), || {
                        format!("{id}: transcript at t={time} lacks {line:?}")
                    })?;
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} configurations"))
}

fn knowledge_staircase() -> Outcome {
    let mut checked = 0;
    for n in 2..=4 {
        let sys = gen_muddy(&MuddyConfig::coarse(n)).map_err(|e| e.to_string())?;
        let g = all_agents(&sys);
        let p = Formula::atom("atleast_one");
        let ck = ext(&sys, &Formula::common(g.clone(), p.clone()));
        for muddy in subsets(n) {
            let k = muddy.len() as u32;
            let id = coarse_run_id(&muddy);
            let at0 = sys.index_of(sys.point(&id, 0).map_err(|e| e.to_string())?);
            let below = ext(&sys, &Formula::everyone_k(g.clone(), k - 1, p.clone()));
            let at = ext(&sys, &Formula::everyone_k(g.clone(), k, p.clone()));
            ensure(below.contains(at0), || {
                format!("{id}: E^{} fails at time 0", k - 1)
            })?;
            ensure(!at.contains(at0), || format!("{id}: E^{k} holds at time 0"))?;
            ensure(!ck.contains(at0), || {
                format!("{id}: C holds before the announcement")
            })?;
            for m in 1..=sys.horizon() {
                let idx = sys.index_of(sys.point(&id, m).map_err(|e| e.to_string())?);
                ensure(ck.contains(idx), || format!("{id}: C fails at time {m}"))?;
            }
            checked += 1;
        }
        let none = sys.run_index("muddy{}").map_err(|e| e.to_string())?;
        ensure(sys.run_indices(none).all(|i| !ck.contains(i)), || {
            "C atleast_one holds in the run without announcement".into()
        })?;
    }
    Ok(format!("{checked} configurations"))
}

fn alternation(k: usize) -> Formula {
    let mut x = Formula::atom("sent");
    for _ in 0..k {
        let a = ckmc_core::AgentId::new("A").unwrap();
        let b = ckmc_core::AgentId::new("B").unwrap();
        x = Formula::knows(a, Formula::knows(b, x));
    }
    x
}

fn alice_bob_thresholds() -> Outcome {
    let s_max = 3u32;
    for eps in 1..=2u32 {
        let plain =
            gen_alice_bob(&AliceBobConfig::new(eps, s_max, false)).map_err(|e| e.to_string())?;
        for k in 1..=3 {
            let got = refs(&plain, &ext(&plain, &alternation(k)));
            let want: BTreeSet<(String, usize)> = (0..=s_max)
                .flat_map(|s| (0..=eps).map(move |d| (s, d)))
                .flat_map(|(s, d)| {
                    let first = (s + k as u32 * eps) as usize;
                    (first..=plain.horizon()).map(move |m| (format!("r(s={s},d={d})"), m))
                })
                .collect();
            ensure(got == want, || {
                format!("eps={eps} k={k}: extension differs from m >= s+k*eps")
            })?;
        }
        let ab = Group::of(&["A", "B"]).unwrap();
        let c = ext(&plain, &Formula::common(ab.clone(), Formula::atom("sent")));
        ensure(c.is_empty(), || format!("eps={eps}: C sent is nonempty"))?;

        let stamped =
            gen_alice_bob(&AliceBobConfig::new(eps, s_max, true)).map_err(|e| e.to_string())?;
        for s in 0..=s_max {
            let got = refs(
                &stamped,
                &ext(
                    &stamped,
                    &Formula::common(ab.clone(), Formula::atom(format!("sent@{s}"))),
                ),
            );
            let want: BTreeSet<(String, usize)> = (0..=eps)
                .flat_map(|d| {
                    ((s + eps) as usize..=stamped.horizon())
                        .map(move |m| (format!("r(s={s},d={d})"), m))
                })
                .collect();
            ensure(got == want, || {
                format!("eps={eps} s={s}: C sent@s differs from m >= s+eps")
            })?;
        }
    }
    Ok("eps in {1,2}, S=3".into())
}

fn oracle_equivalence() -> Outcome {
    let mut mismatches = 0;
    let mut cases = 0;
    for (sys, list) in battery() {
        for (g, f) in &list {
            let gfp = gfp_extension(&sys, g, Mode::Perfect, f).map_err(|e| e.to_string())?;
            let closure = ck_via_closure(&sys, g, f).map_err(|e| e.to_string())?;
            let (_, stable) = stabilized_everyone(&sys, g, f).map_err(|e| e.to_string())?;
            if gfp.points != closure.points || gfp.points != stable {
                mismatches += 1;
            }
            cases += 1;
        }
    }
    ensure(mismatches == 0, || {
        format!("{mismatches} mismatches in {cases} cases")
    })?;
    Ok(format!(
        "{RANDOM_SYSTEMS} systems, {cases} cases, 0 mismatches"
    ))
}

fn scenario_systems() -> Result<Vec<(String, InterpretedSystem, Vec<Formula>)>, String> {
    let e = |x: ckmc_core::Error| x.to_string();
    let muddy = vec![
        f("atleast_one"),
        f("muddy_1"),
        f("K[1] muddy_1 | ans_yes_2_1"),
        f("true"),
    ];
    let ab = vec![f("sent"), f("sent@1"), f("K[B] sent"), f("!sent")];
    let attack = vec![
        f("attack_A & attack_B"),
        f("attack_A | attack_B"),
        f("!attack_B"),
    ];
    let mut out = vec![
        (
            "muddy coarse n=2".into(),
            gen_muddy(&MuddyConfig::coarse(2)).map_err(e)?,
            muddy.clone(),
        ),
        (
            "muddy coarse n=3".into(),
            gen_muddy(&MuddyConfig::coarse(3)).map_err(e)?,
            muddy.clone(),
        ),
        (
            "muddy fine n=2".into(),
            gen_muddy(&MuddyConfig::fine(2, 1, 2)).map_err(e)?,
            muddy,
        ),
    ];
    for eps in 1..=2 {
        for stamped in [false, true] {
            out.push((
                format!("alicebob eps={eps} timestamped={stamped}"),
                gen_alice_bob(&AliceBobConfig::new(eps, 3, stamped)).map_err(e)?,
                ab.clone(),
            ));
        }
    }
    let mut protocols = vec![never_protocol()];
    protocols.extend((0..=3).map(ack_protocol));
    protocols.push(bounded_eps_protocol(1).map_err(e)?);
    protocols.push(bounded_eps_protocol(2).map_err(e)?);
    for p in protocols {
        out.push((
            format!("attack {}", p.name),
            gen_attack(&p).map_err(e)?,
            attack.clone(),
        ));
    }
    Ok(out)
}

fn proposition_suite() -> Outcome {
    let modes = [
        Mode::Perfect,
        Mode::Eps(0),
        Mode::Eps(1),
        Mode::Eps(2),
        Mode::Eventual,
    ];
    let mut reports = 0;
    let mut run =
        |sys: &InterpretedSystem, g: &Group, f: &Formula, what: &str| -> Result<(), String> {
            for mode in modes {
                for r in verify_correspondence(sys, g, mode, f, None).map_err(|e| e.to_string())? {
                    ensure(r.holds, || {
                        format!(
                            "{what}: {} failed for {f} over {g}: {:?}",
                            r.claim, r.counterexample
                        )
                    })?;
                    reports += 1;
                }
            }
            Ok(())
        };
    for (seed, (sys, list)) in battery().into_iter().enumerate() {
        for (g, f) in &list {
            run(&sys, g, f, &format!("random system {seed}"))?;
        }
    }
    for (name, sys, formulas) in scenario_systems()? {
        let g = all_agents(&sys);
        for f in &formulas {
            run(&sys, &g, f, &name)?;
        }
    }
    Ok(format!("{reports} reports, 0 failures"))
}

fn imprecision_suite() -> Outcome {
    let e = |x: ckmc_core::Error| x.to_string();
    let imprecise = vec![
        (
            "alicebob eps=1",
            gen_alice_bob(&AliceBobConfig::new(1, 3, false)).map_err(e)?,
            vec![
                f("sent"),
                f("!sent"),
                f("sent@2"),
                f("K[A] K[B] sent"),
                f("true"),
            ],
        ),
        (
            "alicebob eps=2",
            gen_alice_bob(&AliceBobConfig::new(2, 3, false)).map_err(e)?,
            vec![
                f("sent"),
                f("!sent"),
                f("sent@2"),
                f("K[A] K[B] sent"),
                f("true"),
            ],
        ),
        (
            "muddy fine 1..2",
            gen_muddy(&MuddyConfig::fine(2, 1, 2)).map_err(e)?,
            vec![
                f("atleast_one"),
                f("muddy_1"),
                f("ans_yes_1_1"),
                f("K[1] muddy_1"),
                f("true"),
            ],
        ),
        (
            "muddy fine 2..3",
            gen_muddy(&MuddyConfig::fine(2, 2, 3)).map_err(e)?,
            vec![
                f("atleast_one"),
                f("muddy_1"),
                f("ans_yes_1_1"),
                f("K[1] muddy_1"),
                f("true"),
            ],
        ),
    ];
    for (name, sys, formulas) in &imprecise {
        let w = has_temporal_imprecision(sys).map_err(e)?;
        ensure(w.has_imprecision, || {
            format!("{name}: no imprecision, failure {:?}", w.failure)
        })?;
        let g = all_agents(sys);
        ensure(
            find_nontrivial_perfect_ensemble(sys, &g)
                .map_err(e)?
                .is_none(),
            || format!("{name}: found a nontrivial perfectly coordinated ensemble"),
        )?;
        for phi in formulas {
            let r = ck_constant_check(sys, &g, phi).map_err(e)?;
            ensure(r.holds, || {
                format!("{name}: C {phi} not run-constant: {:?}", r.counterexample)
            })?;
        }
    }
    let precise = vec![
        (
            "alicebob eps=1 timestamped",
            gen_alice_bob(&AliceBobConfig::new(1, 3, true)).map_err(e)?,
        ),
        (
            "alicebob eps=2 timestamped",
            gen_alice_bob(&AliceBobConfig::new(2, 3, true)).map_err(e)?,
        ),
        (
            "muddy coarse n=2",
            gen_muddy(&MuddyConfig::coarse(2)).map_err(e)?,
        ),
        (
            "muddy coarse n=3",
            gen_muddy(&MuddyConfig::coarse(3)).map_err(e)?,
        ),
    ];
    for (name, sys) in &precise {
        let w = has_temporal_imprecision(sys).map_err(e)?;
        ensure(!w.has_imprecision, || {
            format!("{name}: reports imprecision")
        })?;
        let g = all_agents(sys);
        let ens = find_nontrivial_perfect_ensemble(sys, &g).map_err(e)?;
        let ens =
            ens.ok_or_else(|| format!("{name}: no nontrivial perfectly coordinated ensemble"))?;
        ensure(
            ckmc_core::coordination::is_nontrivial(sys, &ens).holds,
            || format!("{name}: ensemble is trivial"),
        )?;
        ensure(
            ckmc_core::coordination::check_coordination(sys, &ens, Mode::Perfect).holds,
            || format!("{name}: ensemble is not perfectly coordinated"),
        )?;
    }
    Ok(format!(
        "{} imprecise, {} precise systems",
        imprecise.len(),
        precise.len()
    ))
}

fn attack_suite() -> Outcome {
    let e = |x: ckmc_core::Error| x.to_string();
    let report = |p: &AttackProtocol, mode: Mode| -> Result<AttackReport, String> {
        let sys = gen_attack(p).map_err(e)?;
        analyze_attack(&sys, mode).map_err(e)
    };
    let expect = |mode: Mode, ever: bool, coord: bool, ck: bool, run: Option<&str>| AttackReport {
        mode: mode.to_string(),
        attacks_ever: ever,
        coordinated: coord,
        ck_at_attack: ck,
        violating_run: run.map(str::to_string),
    };
    let cases = vec![
        (
            "never",
            never_protocol(),
            Mode::Perfect,
            expect(Mode::Perfect, false, true, true, None),
        ),
        (
            "ack:0",
            ack_protocol(0),
            Mode::Perfect,
            expect(Mode::Perfect, true, false, true, Some("run(A1=ok)")),
        ),
        (
            "ack:1",
            ack_protocol(1),
            Mode::Perfect,
            expect(
                Mode::Perfect,
                true,
                false,
                false,
                Some("run(A1=ok,B1=lost)"),
            ),
        ),
        (
            "ack:2",
            ack_protocol(2),
            Mode::Perfect,
            expect(
                Mode::Perfect,
                true,
                false,
                false,
                Some("run(A1=ok,B1=ok,A2=lost)"),
            ),
        ),
        (
            "ack:3",
            ack_protocol(3),
            Mode::Perfect,
            expect(
                Mode::Perfect,
                true,
                false,
                false,
                Some("run(A1=ok,B1=ok,A2=ok,B2=lost)"),
            ),
        ),
        (
            "bounded-eps:1 eps",
            bounded_eps_protocol(1).map_err(e)?,
            Mode::Eps(1),
            expect(Mode::Eps(1), true, true, true, None),
        ),
        (
            "bounded-eps:1 perfect",
            bounded_eps_protocol(1).map_err(e)?,
            Mode::Perfect,
            expect(Mode::Perfect, true, false, true, Some("run(A1=d1)")),
        ),
        (
            "bounded-eps:2 eps",
            bounded_eps_protocol(2).map_err(e)?,
            Mode::Eps(2),
            expect(Mode::Eps(2), true, true, false, None),
        ),
        (
            "bounded-eps:2 perfect",
            bounded_eps_protocol(2).map_err(e)?,
            Mode::Perfect,
            expect(Mode::Perfect, true, false, false, Some("run(A1=d2)")),
        ),
    ];
    for (name, p, mode, want) in &cases {
        let got = report(p, *mode)?;
        ensure(&got == want, || {
            format!("{name}: got {got:?}, expected {want:?}")
        })?;
    }
    Ok(format!("{} protocol/mode pairs", cases.len()))
}

fn logic_hygiene() -> Outcome {
    let checks = std::cell::Cell::new(0usize);
    for (seed, (sys, list)) in battery().into_iter().enumerate() {
        let mut checker = Checker::new(&sys);
        let mut valid = |phi: Formula| -> Result<(), String> {
            let x = checker.extension(&phi).map_err(|e| e.to_string())?;
            checks.set(checks.get() + 1);
            ensure(x.is_full(), || format!("system {seed}: {phi} is not valid"))
        };
        for (g, phi) in &list {
            for a in sys.agents() {
                let k = |x: Formula| Formula::knows(a.clone(), x);
                valid(k(phi.clone()).implies(phi.clone()))?;
                valid(k(phi.clone()).implies(k(k(phi.clone()))))?;
                valid(k(phi.clone()).not().implies(k(k(phi.clone()).not())))?;
            }
            let c = ext(&sys, &Formula::common(g.clone(), phi.clone()));
            let fixed = |x: &Event, op: &dyn Fn(Formula) -> Formula| -> bool {
                let step = op(phi.clone().and(Formula::event_atom("X", x.clone())));
                &ext(&sys, &step) == x
            };
            ensure(fixed(&c, &|y| Formula::everyone(g.clone(), y)), || {
                format!("system {seed}: C fixed point")
            })?;
            ensure(
                ext(&sys, &Formula::common_eps(g.clone(), 0, phi.clone())) == c,
                || format!("system {seed}: C^0 != C"),
            )?;
            let mut prev = c;
            for eps in 1..=2 {
                let ce = ext(&sys, &Formula::common_eps(g.clone(), eps, phi.clone()));
                ensure(
                    fixed(&ce, &|y| Formula::everyone_eps(g.clone(), eps, y)),
                    || format!("system {seed}: C^{eps} fixed point"),
                )?;
                ensure(prev.is_subset(&ce), || {
                    format!("system {seed}: chain breaks at eps={eps}")
                })?;
                prev = ce;
            }
            let cd = ext(&sys, &Formula::common_eventually(g.clone(), phi.clone()));
            ensure(
                fixed(&cd, &|y| Formula::everyone_eventually(g.clone(), y)),
                || format!("system {seed}: C^dia fixed point"),
            )?;
            ensure(prev.is_subset(&cd), || {
                format!("system {seed}: C^eps not inside C^dia")
            })?;
            checks.set(checks.get() + 4);
        }
    }
    Ok(format!("{} checks, 0 failures", checks.get()))
}

/// Malformed inputs with the byte offset the error must point at.
const MALFORMED: &[(&str, usize)] = &[
    ("K[A", 3),
    ("Ek[{A},-1] p", 7),
    ("", 0),
    ("p q", 2),
    ("p &", 3),
    ("(p", 2),
    ("E[{}] p", 2),
    ("E[{A,A}] p", 5),
    ("X[A] p", 0),
    ("K[A] ", 5),
    ("p -> ", 5),
    ("Ek[{A,B}] p", 8),
    ("C[A] p", 2),
    ("!", 1),
    ("p | | q", 4),
    ("K[] p", 2),
    ("Ce[{A},x] p", 7),
    ("p)", 1),
];

fn parser_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let agents: Vec<ckmc_core::AgentId> = ["A", "B", "C"]
        .iter()
        .map(|a| ckmc_core::AgentId::new(*a).unwrap())
        .collect();
    for i in 0..100 {
        let phi = random_formula(&mut rng, &agents, 4);
        let text = phi.to_string();
        let back = parse_formula(&text).map_err(|e| format!("case {i}: {text:?}: {e}"))?;
        ensure(back == phi, || {
            format!("case {i}: {text:?} did not round-trip")
        })?;
    }
    for (input, offset) in MALFORMED {
        match parse_formula(input) {
            Ok(phi) => return Err(format!("{input:?} parsed as {phi}")),
            Err(ParseError { offset: got, .. }) => ensure(got == *offset, || {
                format!("{input:?}: error at {got}, expected {offset}")
            })?,
        }
    }
    Ok(format!(
        "100 round-trips, {} malformed inputs",
        MALFORMED.len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("muddy-children induction", muddy_induction),
        ("knowledge staircase", knowledge_staircase),
        ("alice-bob thresholds", alice_bob_thresholds),
        ("oracle equivalence", oracle_equivalence),
        ("proposition suite", proposition_suite),
        ("imprecision suite", imprecision_suite),
        ("coordinated attack", attack_suite),
        ("logic hygiene", logic_hygiene),
        ("parser", parser_suite),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {}. {name} ({detail}; {secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}. {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
