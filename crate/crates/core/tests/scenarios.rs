use std::collections::BTreeSet;

use ckmc_core::coordination::verify_correspondence;
use ckmc_core::imprecision::{
    ck_constant_check, find_nontrivial_perfect_ensemble, has_temporal_imprecision,
};
use ckmc_core::scenarios::alice_bob::NEVER_RUN;
use ckmc_core::scenarios::attack::{ack_protocol, bounded_eps_protocol, never_protocol};
use ckmc_core::scenarios::muddy::{answer_table, coarse_run_id, muddy_specification};
use ckmc_core::scenarios::*;
use ckmc_core::{
    parse_formula, reachability_partition, Checker, Formula, Group, InterpretedSystem, Mode, Point,
};

fn f(text: &str) -> Formula {
    parse_formula(text).unwrap()
}

fn holds(sys: &InterpretedSystem, text: &str, run: &str, time: usize) -> bool {
    Checker::new(sys)
        .eval(&f(text), sys.point(run, time).unwrap())
        .unwrap()
}

fn points_of(sys: &InterpretedSystem, text: &str) -> BTreeSet<(String, usize)> {
    let ext = Checker::new(sys).extension(&f(text)).unwrap();
    sys.sorted_refs(&ext).into_iter().collect()
}

#[test]
fn muddy_coarse_staircase_before_announcement() {
    let sys = gen_muddy(&MuddyConfig::coarse(3)).unwrap();
    assert!(holds(&sys, "Ek[{1,2,3},1] atleast_one", "muddy{1,2}", 0));
    assert!(!holds(&sys, "Ek[{1,2,3},2] atleast_one", "muddy{1,2}", 0));
}

#[test]
fn muddy_coarse_announcement_creates_common_knowledge() {
    let sys = gen_muddy(&MuddyConfig::coarse(3)).unwrap();
    for m in 1..=sys.horizon() {
        assert!(holds(&sys, "C[{1,2,3}] atleast_one", "muddy{1,2}", m));
    }
    assert!(!holds(&sys, "C[{1,2,3}] atleast_one", "muddy{1,2}", 0));
}

#[test]
fn muddy_answers_match_knowledge_in_both_granularities() {
    for cfg in [
        MuddyConfig::coarse(2),
        MuddyConfig::coarse(3),
        MuddyConfig::fine(2, 1, 2),
    ] {
        let sys = gen_muddy(&cfg).unwrap();
        let report = muddy_specification(&sys).unwrap();
        assert!(report.holds, "{cfg:?}: {report:?}");
    }
}

#[test]
fn muddy_fine_never_reaches_common_knowledge() {
    let sys = gen_muddy(&MuddyConfig::fine(2, 1, 2)).unwrap();
    assert!(points_of(&sys, "C[{1,2}] atleast_one").is_empty());
    let coarse = gen_muddy(&MuddyConfig::coarse(2)).unwrap();
    let expected = answer_table(&coarse, coarse.run_index("muddy{1}").unwrap()).unwrap();
    for (r, run) in sys.runs().iter().enumerate() {
        if run.id.starts_with("muddy{1}/") {
            assert_eq!(answer_table(&sys, r).unwrap(), expected, "{}", run.id);
        }
    }
}

#[test]
fn muddy_knowledge_ensemble_switches_on_at_time_one() {
    let sys = gen_muddy(&MuddyConfig::coarse(3)).unwrap();
    let g = Group::of(&["1", "2", "3"]).unwrap();
    let reports = verify_correspondence(&sys, &g, Mode::Perfect, &f("atleast_one"), None).unwrap();
    assert!(reports.iter().all(|r| r.holds), "{reports:?}");
    let ext = Checker::new(&sys)
        .extension(&f("K[1] C[{1,2,3}] atleast_one"))
        .unwrap();
    for (r, run) in sys.runs().iter().enumerate() {
        let announced = run.id != "muddy{}";
        for m in 0..=sys.horizon() {
            let idx = sys.index_of(Point::new(r, m));
            assert_eq!(ext.contains(idx), announced && m >= 1, "{} {m}", run.id);
        }
    }
}

#[test]
fn muddy_time_zero_is_one_class() {
    let sys = gen_muddy(&MuddyConfig::coarse(3)).unwrap();
    let part = reachability_partition(&sys, &Group::of(&["1", "2", "3"]).unwrap()).unwrap();
    let class = part.class_of(sys.index_of(Point::new(0, 0)));
    for r in 0..sys.runs().len() {
        assert_eq!(part.class_of(sys.index_of(Point::new(r, 0))), class);
    }
    assert_eq!(
        part.class_containing(sys.index_of(Point::new(0, 0))).len(),
        8
    );
}

#[test]
fn alice_bob_alternation_thresholds() {
    let sys = gen_alice_bob(&AliceBobConfig::new(2, 3, false)).unwrap();
    let probe = |text: &str| {
        (0..=sys.horizon())
            .find(|&m| holds(&sys, text, "r(s=3,d=0)", m))
            .unwrap()
    };
    assert_eq!(probe("K[A] K[B] sent"), 5);
    assert_eq!(probe("K[A] K[B] K[A] K[B] sent"), 7);
    assert!(points_of(&sys, "C[{A,B}] sent").is_empty());
}

#[test]
fn alice_bob_bob_knows_after_receipt() {
    let sys = gen_alice_bob(&AliceBobConfig::new(2, 3, false)).unwrap();
    let b = sys.agent_by_name("B").unwrap();
    let expected: BTreeSet<(String, usize)> = sys
        .points()
        .filter(|&p| sys.local_label(b, p) != "waiting")
        .map(|p| sys.point_ref(p))
        .collect();
    assert_eq!(points_of(&sys, "K[B] sent"), expected);
}

#[test]
fn alice_bob_timestamped_common_knowledge_after_eps() {
    let eps = 2;
    let sys = gen_alice_bob(&AliceBobConfig::new(eps, 3, true)).unwrap();
    let expected: BTreeSet<(String, usize)> = (0..=eps)
        .flat_map(|d| (3 + eps as usize..=sys.horizon()).map(move |m| (format!("r(s=3,d={d})"), m)))
        .collect();
    assert_eq!(points_of(&sys, "C[{A,B}] sent@3"), expected);
    assert!(sys.run_index(NEVER_RUN).is_ok());
}

#[test]
fn alice_bob_imprecision_depends_on_timestamps() {
    let plain = gen_alice_bob(&AliceBobConfig::new(2, 3, false)).unwrap();
    assert!(has_temporal_imprecision(&plain).unwrap().has_imprecision);
    let stamped = gen_alice_bob(&AliceBobConfig::new(2, 3, true)).unwrap();
    assert!(!has_temporal_imprecision(&stamped).unwrap().has_imprecision);

    let ab = Group::of(&["A", "B"]).unwrap();
    assert!(ck_constant_check(&plain, &ab, &f("sent")).unwrap().holds);
    let report = ck_constant_check(&stamped, &ab, &f("sent@3")).unwrap();
    assert!(!report.holds);
    let cx = report.counterexample.unwrap();
    assert_eq!(cx.points[1], ("r(s=3,d=0)".to_string(), 5));
    assert!(find_nontrivial_perfect_ensemble(&plain, &ab)
        .unwrap()
        .is_none());
    assert!(find_nontrivial_perfect_ensemble(&stamped, &ab)
        .unwrap()
        .is_some());
}

#[test]
fn alice_bob_prop3_holds() {
    let sys = gen_alice_bob(&AliceBobConfig::new(2, 3, false)).unwrap();
    let ab = Group::of(&["A", "B"]).unwrap();
    let reports = verify_correspondence(&sys, &ab, Mode::Eps(2), &f("sent"), None).unwrap();
    assert_eq!(reports.len(), 2);
    assert!(reports.iter().all(|r| r.holds), "{reports:?}");
}

#[test]
fn attack_never_is_vacuously_coordinated() {
    let sys = gen_attack(&never_protocol()).unwrap();
    assert!(points_of(&sys, "attack_A | attack_B").is_empty());
    let report = analyze_attack(&sys, Mode::Perfect).unwrap();
    assert!(!report.attacks_ever && report.coordinated && report.ck_at_attack);
    assert_eq!(report.violating_run, None);
}

#[test]
fn attack_one_ack_fails_on_lost_ack() {
    let sys = gen_attack(&ack_protocol(1)).unwrap();
    let report = analyze_attack(&sys, Mode::Perfect).unwrap();
    assert!(report.attacks_ever);
    assert!(!report.coordinated);
    assert!(!report.ck_at_attack);
    assert_eq!(report.violating_run.as_deref(), Some("run(A1=ok,B1=lost)"));
    let last = sys.horizon();
    assert!(holds(
        &sys,
        "attack_B & !attack_A",
        "run(A1=ok,B1=lost)",
        last
    ));
}

#[test]
fn attack_branching_is_complete() {
    for k in 0..=3 {
        let sys = gen_attack(&ack_protocol(k)).unwrap();
        let ids: BTreeSet<&str> = sys.runs().iter().map(|r| r.id.as_str()).collect();
        for id in &ids {
            let inner = &id["run(".len()..id.len() - 1];
            let fates: Vec<&str> = inner.split(',').filter(|s| !s.is_empty()).collect();
            for i in 0..fates.len() {
                let (label, _) = fates[i].split_once('=').unwrap();
                let prefix = fates[..i].join(",");
                let sep = if prefix.is_empty() { "" } else { "," };
                for fate in ["ok", "lost"] {
                    let want = format!("run({prefix}{sep}{label}={fate}");
                    assert!(ids.iter().any(|x| x.starts_with(&want)), "{want}");
                }
            }
        }
        assert!(ids.contains("run(A1=lost)"));
    }
}

#[test]
fn attack_bounded_is_eps_coordinated_only() {
    for eps in 1..=3 {
        let sys = gen_attack(&bounded_eps_protocol(eps).unwrap()).unwrap();
        let eps_report = analyze_attack(&sys, Mode::Eps(eps)).unwrap();
        assert!(eps_report.coordinated, "eps={eps}");
        let perfect = analyze_attack(&sys, Mode::Perfect).unwrap();
        assert!(!perfect.coordinated);
        assert!(analyze_attack(&sys, Mode::Eventual).unwrap().coordinated);
    }
}

#[test]
fn transcripts() {
    let sys = gen_attack(&ack_protocol(2)).unwrap();
    let t = transcript(&sys, "run(A1=lost)").unwrap();
    assert!(t
        .entries
        .iter()
        .all(|e| e.events.iter().all(|x| !x.contains("attack"))));
    let t = transcript(&sys, "run(A1=ok,B1=ok,A2=ok)").unwrap();
    assert!(t.entries[4].events.contains(&"A attack".to_string()));
    assert!(t.to_string().contains("t=4"));

    let muddy = gen_muddy(&MuddyConfig::coarse(3)).unwrap();
    let t = transcript(&muddy, &coarse_run_id(&[1, 2])).unwrap();
    assert!(t.entries[3]
        .events
        .iter()
        .any(|e| e == "child 1 hears question 2 and answers \"Yes\""));
}
