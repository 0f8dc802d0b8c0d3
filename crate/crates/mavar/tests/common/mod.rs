#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use mavar::scenario::{parse_scenario, run_scenario, RunReport, Scenario, Setup};
use mavar::{parse_rules, parse_scene, parse_workflow};
use mavar_core::engine::EngineConfig;
use mavar_core::ContextStore;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read(rel: &str) -> String {
    fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{}: {}", rel, e))
}

pub fn setup(rules: &str, scene: &str, workflow: Option<&str>) -> Setup {
    Setup {
        rules: parse_rules(&read(rules)).unwrap(),
        scene: parse_scene(&read(scene)).unwrap(),
        workflow: workflow.map(|w| parse_workflow(&read(w)).unwrap()),
        config: EngineConfig::default(),
    }
}

pub fn scenario(rel: &str) -> Scenario {
    parse_scenario(&read(rel)).unwrap()
}

pub fn printer() -> Setup {
    setup("printer/printer.rules", "printer/printer.scene", None)
}

pub fn single_order() -> Setup {
    setup(
        "warehouse/single_order.rules",
        "warehouse/warehouse.scene",
        Some("warehouse/single_order.workflow"),
    )
}

pub fn multi_order() -> Setup {
    setup(
        "warehouse/multi_order.rules",
        "warehouse/warehouse.scene",
        Some("warehouse/multi_order.workflow"),
    )
}

pub fn cascade() -> Setup {
    setup("cascade/cascade.rules", "cascade/panel.scene", None)
}

pub fn oscillator() -> Setup {
    setup("cascade/oscillator.rules", "cascade/panel.scene", None)
}

pub fn run(setup: &Setup, scenario_rel: &str) -> RunReport {
    run_scenario(setup, &scenario(scenario_rel), ContextStore::new()).unwrap()
}
