mod common;

use common::{fixture, read};
use mavar::lex::Cursor;
use mavar::rules_dsl::parse_expr;
use mavar::scenario::{parse_scenario, write_scenario, Scenario, ScenarioEvent};
use mavar::scene_file::write_scene;
use mavar::state::{load_state, render_state, save_state};
use mavar::workflow_file::write_workflow;
use mavar::{
    compare_traces, parse_rules, parse_scene, parse_workflow, pretty_print, RulesError, ScenarioError, SceneFileError,
    Verdict, WorkflowFileError,
};
use mavar_core::scene::{SceneElement, SceneModel};
use mavar_core::strategies::{arb_literal, arb_rule_set};
use mavar_core::validate::Severity;
use mavar_core::{validate, ContextStore, ContextValue, FeatureId, Vec3};
use proptest::prelude::*;

fn fid(s: &str) -> FeatureId {
    FeatureId::parse(s).unwrap()
}

fn rules_error(rel: &str) -> RulesError {
    parse_rules(&read(rel)).expect_err(rel)
}

#[test]
fn one_condition_one_rule() {
    let rs = parse_rules(
        "condition dark: env.luminance < 0.05\n\
         rule AudioOutRule when dark do set_modality(instruction_panel, audio) category Modality\n",
    )
    .unwrap();
    assert_eq!(rs.conditions().len(), 1);
    assert_eq!(rs.rules().len(), 1);
    assert_eq!(rs.rules()[0].line, 2);
}

#[test]
fn inline_error_examples() {
    let e = parse_rules("rule R when missing do set_visible(a, true) category Style").unwrap_err();
    assert!(matches!(e, RulesError::UnknownConditionRef { line: 1, .. }), "{:?}", e);
    let e = parse_rules("condition c: dist(user.position, 3)").unwrap_err();
    assert!(matches!(e, RulesError::Type { line: 1, .. }), "{:?}", e);
    let e = parse_rules("condition c: env.a < env.b < env.c").unwrap_err();
    assert!(matches!(e, RulesError::Syntax { .. }));
    let e = parse_rules("condition c: env.a\nrule R when c do set_visible(p) category Style").unwrap_err();
    assert!(matches!(e, RulesError::Type { line: 2, .. }), "{:?}", e);
    let e = parse_rules("condition c: scene.p.colour == 1").unwrap_err();
    assert!(matches!(e, RulesError::Syntax { line: 1, .. }));
    let e = parse_rules("condition c: scene.p.highlight == 1").unwrap_err();
    assert!(matches!(e, RulesError::Type { line: 1, .. }));
}

#[test]
fn every_rules_error_class_has_a_fixture() {
    type Case = (&'static str, fn(&RulesError) -> bool, usize);
    let cases: [Case; 7] = [
        ("errors/syntax.rules", |e| matches!(e, RulesError::Syntax { .. }), 3),
        (
            "errors/unknown_condition_ref.rules",
            |e| matches!(e, RulesError::UnknownConditionRef { .. }),
            3,
        ),
        (
            "errors/dangling.rules",
            |e| matches!(e, RulesError::UnknownConditionRef { .. }),
            2,
        ),
        (
            "errors/duplicate_id.rules",
            |e| matches!(e, RulesError::DuplicateId { .. }),
            3,
        ),
        ("errors/type_error.rules", |e| matches!(e, RulesError::Type { .. }), 2),
        (
            "errors/unknown_effector.rules",
            |e| matches!(e, RulesError::UnknownEffector { .. }),
            2,
        ),
        (
            "errors/unknown_category.rules",
            |e| matches!(e, RulesError::UnknownCategory { .. }),
            3,
        ),
    ];
    for (rel, is_kind, line) in cases {
        let e = rules_error(rel);
        assert!(is_kind(&e), "{}: {:?}", rel, e);
        assert_eq!(e.line(), line, "{}", rel);
    }
}

#[test]
fn scene_workflow_scenario_error_fixtures() {
    let e = parse_scene(&read("errors/syntax.scene")).unwrap_err();
    assert!(matches!(e, SceneFileError::Syntax { line: 2, .. }));
    let e = parse_scene(&read("errors/duplicate_element.scene")).unwrap_err();
    assert!(matches!(e, SceneFileError::DuplicateElement { line: 3, .. }));

    let e = parse_workflow(&read("errors/syntax.workflow")).unwrap_err();
    assert!(matches!(e, WorkflowFileError::Syntax { line: 3, .. }), "{:?}", e);
    let e = parse_workflow(&read("errors/unknown_step.workflow")).unwrap_err();
    assert!(matches!(e, WorkflowFileError::UnknownStepRef { line: 2, ref id } if id == "missing_step"));
    let e = parse_workflow(&read("errors/duplicate_step.workflow")).unwrap_err();
    assert!(matches!(e, WorkflowFileError::DuplicateStep { line: 4, .. }));

    let e = parse_scenario(&read("errors/syntax.scenario")).unwrap_err();
    assert!(matches!(e, ScenarioError::Syntax { line: 3, .. }));
    let e = parse_scenario(&read("errors/decreasing.scenario")).unwrap_err();
    assert!(matches!(
        e,
        ScenarioError::DecreasingTimestamp {
            line: 4,
            t: 500,
            previous: 1000
        }
    ));
    let e = parse_scenario(&read("errors/duplicate_feature.scenario")).unwrap_err();
    assert!(matches!(e, ScenarioError::DuplicateFeatureInEvent { line: 4, .. }));

    let e = load_state(&read("errors/malformed.state")).unwrap_err();
    assert_eq!(e.line, 2);
}

#[test]
fn more_workflow_errors() {
    let cases = [
        ("step a \"x\" until c goto a", "header"),
        (
            "workflow w\nstep a \"x\" until c goto b terminal\nstep b \"y\" until c terminal",
            "terminal with goto",
        ),
        (
            "workflow w\nstep a \"x\" until c goto b on c goto b\nstep b \"y\" until c terminal",
            "default not last",
        ),
        ("workflow w\n", "no steps"),
        ("workflow w\nstep a x until c terminal", "unquoted instruction"),
    ];
    for (text, why) in cases {
        let e = parse_workflow(text).unwrap_err();
        assert!(matches!(e, WorkflowFileError::Syntax { .. }), "{}: {:?}", why, e);
    }
}

#[test]
fn printer_fixture_round_trips_without_comments() {
    let text = read("printer/printer.rules");
    assert!(text.contains('#'));
    let rs = parse_rules(&text).unwrap();
    let printed = pretty_print(&rs);
    assert!(!printed.contains('#'));
    assert_eq!(parse_rules(&printed).unwrap(), rs);
    assert_eq!(pretty_print(&parse_rules(&printed).unwrap()), printed);
    assert!(printed.contains("set_text_size(instruction_panel, 24.0)"));
}

#[test]
fn priority_is_printed_only_when_set() {
    let rs = parse_rules(&read("printer/conflict.rules")).unwrap();
    let printed = pretty_print(&rs);
    assert!(printed.contains("rule LowVisionTextRule priority 1 when"));
    assert!(printed.contains("rule DistanceTextRule when"));
}

fn expr(text: &str) -> mavar_core::Expr {
    let mut c = Cursor::new(text).unwrap();
    let e = parse_expr(&mut c).unwrap();
    c.end().unwrap();
    e
}

#[test]
fn precedence() {
    assert_eq!(expr("env.a || env.b && env.c").to_string(), "env.a || env.b && env.c");
    assert_eq!(
        expr("(env.a || env.b) && env.c").to_string(),
        "(env.a || env.b) && env.c"
    );
    assert_eq!(expr("!env.x < 3").to_string(), "!env.x < 3");
    assert_eq!(expr("!(env.a && env.b)").to_string(), "!(env.a && env.b)");
    assert_eq!(expr("env.p == (1, -2, 3.5)").to_string(), "env.p == (1.0, -2.0, 3.5)");
    assert_eq!(expr("((env.a))").to_string(), "env.a");
}

#[test]
fn eval_examples() {
    let mut scene = SceneModel::new();
    scene.insert(SceneElement::new("printer", Vec3::ZERO)).unwrap();
    let mut store = ContextStore::new();
    store
        .set_feature(&fid("user.app_use_count"), ContextValue::Int(5))
        .unwrap();
    store
        .set_feature(&fid("user.position"), ContextValue::Vec3(Vec3::new(0.0, 0.0, 2.0)))
        .unwrap();
    store
        .set_feature(&fid("env.luminance"), ContextValue::Float(0.5))
        .unwrap();
    let holds = |t: &str| expr(t).eval_condition(&store, &scene).unwrap();
    assert!(holds("user.app_use_count <= 5"));
    assert!(holds("dist(user.position, scene.printer.position) > 1.2"));
    assert!(!holds("env.luminance < 0.05"));
    assert!(expr("env.never_set == 1").eval_condition(&store, &scene).is_err());
    assert!(expr("scene.ghost.visible").eval_condition(&store, &scene).is_err());
}

#[test]
fn validate_examples() {
    let scene = parse_scene(&read("printer/printer.scene")).unwrap();
    let clean = parse_rules(&read("printer/printer.rules")).unwrap();
    assert_eq!(validate(&clean, Some(&scene), None), []);

    let ghost = parse_rules(&read("errors/missing_element.rules")).unwrap();
    let d = validate(&ghost, Some(&scene), None);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].severity, Severity::Error);
    assert_eq!(d[0].line, 2);

    let conflict = parse_rules(&read("printer/conflict.rules")).unwrap();
    let d = validate(&conflict, Some(&scene), None);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].severity, Severity::Warning);
    assert!(d[0].message.contains("DistanceTextRule") && d[0].message.contains("LowVisionTextRule"));
    assert!(d[0].message.contains("priority 0") && d[0].message.contains("priority 1"));
}

#[test]
fn workflow_fixtures() {
    let wf = parse_workflow(&read("warehouse/single_order.workflow")).unwrap();
    assert_eq!(wf.steps().len(), 4);
    assert_eq!(wf.current_step().id, "pick_a3");
    let wf = parse_workflow("workflow w\nstep a \"A\" target shelf until c goto b\nstep b \"B\" until d terminal\n")
        .unwrap();
    assert_eq!(wf.steps().len(), 2);
    assert_eq!(parse_workflow(&write_workflow(&wf)).unwrap(), wf);
    let multi = parse_workflow(&read("warehouse/multi_order.workflow")).unwrap();
    assert_eq!(parse_workflow(&write_workflow(&multi)).unwrap(), multi);
    assert_eq!(multi.steps()[0].transitions.len(), 2);
}

#[test]
fn scenario_examples() {
    let s = parse_scenario("scenario s\nat 0 set env.luminance = 0.5\nat 1000 set env.luminance = 0.01\n").unwrap();
    assert_eq!(s.initial.len(), 1);
    assert_eq!(s.events.len(), 1);
    let s = parse_scenario(&read("warehouse/multi_exception.scenario")).unwrap();
    assert_eq!(s.initial.len(), 5);
    assert_eq!(s.events.iter().map(|e| e.sets.len()).collect::<Vec<_>>(), [2, 2, 1, 1]);
}

#[test]
fn scene_file_defaults_and_round_trip() {
    let scene = parse_scene(&read("printer/printer.scene")).unwrap();
    let hints = scene.get("control_hints").unwrap();
    assert!(!hints.visible);
    assert_eq!(hints.text_size, 14.0);
    let full = parse_scene("element e at (1, 2, 3) yaw 7 visible false text \"a\\\"b\" text_size 9.5 detail reduced modality audio,visual billboard true\n").unwrap();
    let e = full.get("e").unwrap();
    assert!(e.yaw.radians() < std::f64::consts::TAU);
    assert_eq!(parse_scene(&write_scene(&full)).unwrap(), full);
    assert_eq!(parse_scene(&write_scene(&scene)).unwrap(), scene);
    assert!(parse_scene("element e at (0,0,0) text_size 0").is_err());
    assert!(parse_scene("element e at (0,0,0) visible true visible false").is_err());
}

#[test]
fn state_examples() {
    let mut store = ContextStore::new();
    store
        .set_feature(&fid("user.app_use_count"), ContextValue::Int(3))
        .unwrap();
    store.set_feature(&fid("env.scale"), ContextValue::Float(1.2)).unwrap();
    let text = save_state(&store, [&fid("user.app_use_count")]).unwrap();
    assert_eq!(text, "user.app_use_count=3\n");
    let back = load_state(&text).unwrap();
    assert_eq!(
        back.get_feature(&fid("user.app_use_count")).unwrap(),
        &ContextValue::Int(3)
    );
    assert_eq!(render_state(&store), "env.scale=1.200000\nuser.app_use_count=3\n");
    assert!(load_state("user.x\n").is_err());
    assert!(load_state("env.a=1\nenv.a=2\n").is_err());
    assert!(load_state("env.a=oops\n").is_err());
    assert!(save_state(&store, [&fid("env.missing")]).is_err());
}

#[test]
fn compare_examples() {
    let golden = read("golden/dark_switch.trace");
    assert_eq!(compare_traces(&golden, &golden), Verdict::Match);
    assert_eq!(compare_traces(&golden, &golden.replace('\n', "\r\n")), Verdict::Match);
    let edited = golden.replacen("S2 COND", "S2 KOND", 1);
    match compare_traces(&golden, &edited) {
        Verdict::Mismatch { line, expected, actual } => {
            assert_eq!(line, 2);
            assert!(expected.unwrap().contains("KOND"));
            assert!(actual.unwrap().contains("COND"));
        }
        Verdict::Match => panic!("edited golden matched"),
    }
    assert!(fixture("golden/dark_switch.trace").exists());
}

fn arb_persistable() -> impl Strategy<Value = ContextValue> {
    arb_literal().prop_filter("exact in state files", |v| {
        !matches!(v, ContextValue::Float(_) | ContextValue::Vec3(_))
    })
}

fn arb_sets() -> impl Strategy<Value = Vec<(FeatureId, ContextValue)>> {
    let set = (0usize..4, arb_literal()).prop_map(|(i, v)| (fid(&format!("env.f{}", i)), v));
    proptest::collection::vec(set, 0..4).prop_map(|mut v| {
        let mut seen = Vec::new();
        v.retain(|(f, _)| {
            let fresh = !seen.contains(f);
            seen.push(f.clone());
            fresh
        });
        v
    })
}

fn arb_scenario() -> impl Strategy<Value = Scenario> {
    (arb_sets(), proptest::collection::vec((1u64..50, arb_sets()), 0..5)).prop_map(|(initial, evs)| {
        let mut t = 0;
        let events = evs
            .into_iter()
            .filter(|(_, s)| !s.is_empty())
            .map(|(dt, sets)| {
                t += dt;
                ScenarioEvent { t, sets }
            })
            .collect();
        Scenario {
            id: "generated".into(),
            initial,
            events,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn rules_round_trip(rs in arb_rule_set()) {
        let printed = pretty_print(&rs);
        let back = parse_rules(&printed);
        prop_assert!(back.is_ok(), "{}\n{:?}", printed, back);
        prop_assert_eq!(back.unwrap(), rs);
    }

    #[test]
    fn scenarios_round_trip(s in arb_scenario()) {
        let text = write_scenario(&s);
        prop_assert_eq!(parse_scenario(&text).unwrap(), s);
    }

    #[test]
    fn state_round_trip(values in proptest::collection::btree_map("[a-z][a-z0-9_]{0,5}", arb_persistable(), 0..6)) {
        let mut store = ContextStore::new();
        for (name, v) in &values {
            store.set_feature(&fid(&format!("user.{}", name)), v.clone()).unwrap();
        }
        store.drain_dirty();
        let text = render_state(&store);
        let back = load_state(&text).unwrap();
        prop_assert_eq!(render_state(&back), text);
        for (id, v) in store.iter() {
            prop_assert!(back.get_feature(id).unwrap().same_as(v));
        }
    }

    #[test]
    fn float_state_is_stable_after_one_save(x in -1e6f64..1e6, p in (-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3)) {
        let mut store = ContextStore::new();
        store.set_feature(&fid("env.x"), ContextValue::Float(x)).unwrap();
        store.set_feature(&fid("env.p"), ContextValue::Vec3(Vec3::new(p.0, p.1, p.2))).unwrap();
        let once = render_state(&store);
        let twice = render_state(&load_state(&once).unwrap());
        prop_assert_eq!(once, twice);
    }
}
