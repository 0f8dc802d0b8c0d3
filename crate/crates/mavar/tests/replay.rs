mod common;

use common::*;
use mavar::scenario::{parse_scenario, run_scenario, run_scenario_observed, Scenario, ScenarioEvent};
use mavar::{compare_traces, Verdict};
use mavar_core::engine::{EngineConfig, EngineError};
use mavar_core::scene::{Color, PropValue, Property};
use mavar_core::{ContextStore, ContextValue, FeatureId};
use proptest::prelude::*;

fn golden(setup: &mavar::Setup, scenario: &str, golden: &str) {
    let report = run(setup, scenario);
    let verdict = compare_traces(&report.trace_text(), &read(golden));
    assert_eq!(verdict, Verdict::Match, "{}", verdict);
}

#[test]
fn printer_goldens() {
    golden(&printer(), "printer/dark_switch.scenario", "golden/dark_switch.trace");
    golden(&printer(), "printer/walk_away.scenario", "golden/walk_away.trace");
    golden(&printer(), "printer/view_angle.scenario", "golden/view_angle.trace");
}

#[test]
fn cascade_and_workflow_goldens() {
    golden(&cascade(), "cascade/chain.scenario", "golden/chain.trace");
    golden(&oscillator(), "cascade/oscillate.scenario", "golden/oscillate.trace");
    golden(
        &single_order(),
        "warehouse/single_order.scenario",
        "golden/single_order.trace",
    );
    golden(
        &multi_order(),
        "warehouse/multi_exception.scenario",
        "golden/multi_exception.trace",
    );
}

#[test]
fn walk_away_detail_swap() {
    let report = run(&printer(), "printer/walk_away.scenario");
    assert!(report.error.is_none());
    let text = report.trace_text();
    assert!(text.contains("E1 C1 S1 QUIESCENT cycles=1\n"));
    assert!(text.contains("COND DistanceToUserBigCondition -> true"));
    assert!(text.contains("RULE DistanceDetailRule EXECUTED"));
    assert!(text.contains("PROP instruction_panel.detail full -> reduced"));
    assert!(text.contains("PROP instruction_panel.text_size 14.000000 -> 24.000000"));
    let panel = report.scene.get("instruction_panel").unwrap();
    assert_eq!(panel.text_size, 14.0);
}

#[test]
fn oscillator_keeps_partial_trace() {
    let report = run(&oscillator(), "cascade/oscillate.scenario");
    assert_eq!(report.error, Some(EngineError::NonQuiescent { depth: 16 }));
    assert!(report.trace_text().ends_with("E1 C16 S6 NONQUIESCENT depth=16\n"));
}

#[test]
fn cascade_bound_is_configurable() {
    let mut setup = oscillator();
    setup.config = EngineConfig { max_cascade_depth: 3 };
    let report = run(&setup, "cascade/oscillate.scenario");
    assert_eq!(report.error, Some(EngineError::NonQuiescent { depth: 3 }));
}

#[test]
fn chain_settles_in_four_cycles() {
    let report = run(&cascade(), "cascade/chain.scenario");
    let quiescent: Vec<String> = report
        .trace
        .iter()
        .map(|e| e.to_string())
        .filter(|l| l.contains("QUIESCENT"))
        .collect();
    assert_eq!(
        quiescent,
        [
            "E0 C2 S1 QUIESCENT cycles=2",
            "E1 C4 S1 QUIESCENT cycles=4",
            "E2 C4 S1 QUIESCENT cycles=4"
        ]
    );
}

#[test]
fn initial_sets_only() {
    let s = parse_scenario("scenario idle\nat 0 set env.luminance = 0.5\nat 0 set user.position = (0, 0, 1)\nat 0 set user.app_use_count = 9\nat 0 set platform.ar_tracking = false\n").unwrap();
    let report = run_scenario(&printer(), &s, ContextStore::new()).unwrap();
    let lines: Vec<String> = report.trace.iter().map(|e| e.to_string()).collect();
    assert!(lines.iter().all(|l| l.starts_with("E0 ")));
    assert_eq!(lines.last().unwrap(), "E0 C2 S1 QUIESCENT cycles=2");
}

#[test]
fn missing_feature_is_a_runtime_error() {
    let report = run(&printer(), "printer/experience.scenario");
    assert!(
        matches!(report.error, Some(EngineError::Evaluation { ref condition, .. }) if condition == "NewUserCondition")
    );
    assert_eq!(report.trace.len(), 2);
}

#[test]
fn mismatched_initial_type_is_rejected() {
    let mut store = ContextStore::new();
    store
        .set_feature(&FeatureId::parse("env.luminance").unwrap(), ContextValue::Int(1))
        .unwrap();
    let err = run_scenario(&printer(), &scenario("printer/dark_switch.scenario"), store).unwrap_err();
    assert!(matches!(err, EngineError::Context(_)));
}

#[test]
fn highlight_is_exclusive_after_every_event() {
    for (setup, scen) in [
        (single_order(), "warehouse/single_order.scenario"),
        (multi_order(), "warehouse/multi_exception.scenario"),
        (multi_order(), "warehouse/multi_normal.scenario"),
    ] {
        let mut checked = 0;
        run_scenario_observed(&setup, &scenario(scen), ContextStore::new(), |_, engine| {
            let green = engine
                .scene()
                .elements()
                .filter(|e| e.highlight == Some(Color::GREEN))
                .count();
            assert!(green <= 1, "{}", scen);
            checked += 1;
        })
        .unwrap();
        assert_eq!(checked, scenario(scen).events.len() + 1);
    }
}

#[test]
fn default_branch_without_exception() {
    let report = run(&multi_order(), "warehouse/multi_normal.scenario");
    let steps: Vec<String> = report
        .trace
        .iter()
        .map(|e| e.to_string())
        .filter(|l| l.contains("WORKFLOW"))
        .collect();
    assert_eq!(
        steps,
        [
            "E1 C1 S2 WORKFLOW step pick_a3 -> pick_b1",
            "E2 C1 S2 WORKFLOW step pick_b1 -> sort"
        ]
    );
    assert_eq!(report.workflow.unwrap().current_step().id, "sort");
}

#[test]
fn terminal_step_absorbs_further_completions() {
    let mut s = scenario("warehouse/single_order.scenario");
    let packed = FeatureId::parse("env.order_packed").unwrap();
    for (i, v) in [false, true, false, true].into_iter().enumerate() {
        s.events.push(ScenarioEvent {
            t: 6000 + i as u64,
            sets: vec![(packed.clone(), ContextValue::Bool(v))],
        });
    }
    let report = run_scenario(&single_order(), &s, ContextStore::new()).unwrap();
    let steps = report
        .trace
        .iter()
        .filter(|e| e.to_string().contains("WORKFLOW"))
        .count();
    assert_eq!(steps, 3);
    let green = report
        .scene
        .read_property("packing_station", Property::Highlight)
        .unwrap();
    assert_eq!(green, PropValue::Highlight(Some(Color::GREEN)));
}

#[test]
fn simultaneous_sets_fire_in_one_cycle() {
    let s = parse_scenario(
        "scenario both\nat 0 set env.a = false\nat 0 set env.b = false\nat 10 set env.a = true\nat 10 set env.b = true\n",
    )
    .unwrap();
    let setup = mavar::Setup {
        rules: mavar::parse_rules(
            "condition A: env.a\ncondition B: env.b\nrule Both when A, B do set_visible(panel, false) category Style\n",
        )
        .unwrap(),
        scene: mavar::parse_scene("element panel at (0, 0, 0)\n").unwrap(),
        workflow: None,
        config: EngineConfig::default(),
    };
    let report = run_scenario(&setup, &s, ContextStore::new()).unwrap();
    let text = report.trace_text();
    assert!(text.contains("E1 C1 S3 RULE Both EXECUTED\n"), "{}", text);
    assert!(text.contains("E1 C2 S1 QUIESCENT cycles=2\n"));
}

fn scaled(s: &Scenario, k: u64) -> Scenario {
    let mut out = s.clone();
    for e in &mut out.events {
        e.t *= k;
    }
    out
}

proptest! {
    #[test]
    fn timestamps_do_not_reach_the_trace(k in 1u64..1000) {
        for (setup, scen) in [(printer(), "printer/walk_away.scenario"), (single_order(), "warehouse/single_order.scenario")] {
            let s = scenario(scen);
            let a = run_scenario(&setup, &s, ContextStore::new()).unwrap().trace_text();
            let b = run_scenario(&setup, &scaled(&s, k), ContextStore::new()).unwrap().trace_text();
            prop_assert_eq!(a, b);
        }
    }
}

#[test]
fn replays_are_byte_identical() {
    for (setup, scen) in [
        (printer(), "printer/view_angle.scenario"),
        (multi_order(), "warehouse/multi_exception.scenario"),
        (oscillator(), "cascade/oscillate.scenario"),
    ] {
        assert_eq!(run(&setup, scen).trace_text(), run(&setup, scen).trace_text());
    }
}
