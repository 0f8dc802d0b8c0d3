mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::fixture;

fn mavar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mavar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn f(rel: &str) -> String {
    fixture(rel).to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn printer_run(scenario: &str, extra: &[&str]) -> Output {
    let (rules, scene, scen) = (f("printer/printer.rules"), f("printer/printer.scene"), f(scenario));
    let mut args = vec!["run", "--rules", &rules, "--scene", &scene, "--scenario", &scen];
    args.extend_from_slice(extra);
    mavar(&args)
}

#[test]
fn check_clean_fixture() {
    let o = mavar(&[
        "check",
        "--rules",
        &f("printer/printer.rules"),
        "--scene",
        &f("printer/printer.scene"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(o.stderr.is_empty());
}

#[test]
fn check_dangling_reference() {
    let o = mavar(&["check", "--rules", &f("errors/dangling.rules")]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(
        err.starts_with(&format!("{}:2: error: ", f("errors/dangling.rules"))),
        "{}",
        err
    );
}

#[test]
fn check_conflict_is_a_warning() {
    let o = mavar(&[
        "check",
        "--rules",
        &f("printer/conflict.rules"),
        "--scene",
        &f("printer/printer.scene"),
    ]);
    assert_eq!(code(&o), 0);
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(
        err.contains(":5: warning: write-write conflict on instruction_panel.text_size"),
        "{}",
        err
    );
}

#[test]
fn check_workflow_against_scene_and_rules() {
    let o = mavar(&[
        "check",
        "--rules",
        &f("warehouse/multi_order.rules"),
        "--scene",
        &f("warehouse/warehouse.scene"),
        "--workflow",
        &f("warehouse/multi_order.workflow"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = mavar(&[
        "check",
        "--rules",
        &f("warehouse/single_order.rules"),
        "--workflow",
        &f("warehouse/multi_order.workflow"),
    ]);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).contains(&format!("{}:2: error:", f("warehouse/multi_order.workflow"))),
        "{}",
        stderr(&o)
    );
}

#[test]
fn run_prints_only_trace_on_stdout() {
    let o = printer_run("printer/dark_switch.scenario", &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        common::read("golden/dark_switch.trace")
    );
}

#[test]
fn run_writes_trace_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.trace");
    let o = printer_run("printer/walk_away.scenario", &["--trace", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(fs::read_to_string(out).unwrap(), common::read("golden/walk_away.trace"));
}

#[test]
fn runtime_errors_exit_3() {
    let osc = |extra: &[&str]| {
        let (rules, scene, scen) = (
            f("cascade/oscillator.rules"),
            f("cascade/panel.scene"),
            f("cascade/oscillate.scenario"),
        );
        let mut args = vec!["run", "--rules", &rules, "--scene", &scene, "--scenario", &scen];
        args.extend_from_slice(extra);
        mavar(&args)
    };
    let o = osc(&[]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).ends_with("NONQUIESCENT depth=16\n"));
    let o = osc(&["--max-cascade", "5"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stdout).ends_with("E1 C5 S6 NONQUIESCENT depth=5\n"));
    assert_eq!(code(&osc(&["--max-cascade", "0"])), 2);

    let o = printer_run("printer/experience.scenario", &[]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("unknown feature user.app_use_count"));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(code(&printer_run("errors/decreasing.scenario", &[])), 2);
    assert_eq!(code(&printer_run("does/not/exist.scenario", &[])), 2);
    assert_eq!(code(&mavar(&["run", "--rules", &f("printer/printer.rules")])), 2);
    assert_eq!(code(&mavar(&["frobnicate"])), 2);
    assert_eq!(code(&mavar(&["--help"])), 0);
}

fn verify(scenario: &str, golden: &Path) -> Output {
    mavar(&[
        "verify",
        "--rules",
        &f("printer/printer.rules"),
        "--scene",
        &f("printer/printer.scene"),
        "--scenario",
        &f(scenario),
        "--golden",
        golden.to_str().unwrap(),
    ])
}

#[test]
fn verify_outcomes() {
    assert_eq!(
        code(&verify(
            "printer/dark_switch.scenario",
            &fixture("golden/dark_switch.trace")
        )),
        0
    );

    let dir = tempfile::tempdir().unwrap();
    let edited = dir.path().join("edited.trace");
    let text = common::read("golden/dark_switch.trace").replace("visual -> audio", "visual -> voice_input");
    fs::write(&edited, text).unwrap();
    let o = verify("printer/dark_switch.scenario", &edited);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("line 11"), "{}", err);
    assert!(err.contains("visual -> voice_input") && err.contains("visual -> audio"));

    let crlf = dir.path().join("crlf.trace");
    fs::write(&crlf, common::read("golden/dark_switch.trace").replace('\n', "\r\n")).unwrap();
    assert_eq!(code(&verify("printer/dark_switch.scenario", &crlf)), 0);

    assert_eq!(
        code(&verify(
            "printer/dark_switch.scenario",
            &dir.path().join("missing.trace")
        )),
        2
    );
}

#[test]
fn state_file_counts_runs() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state");
    let state_arg = state.to_str().unwrap();
    for n in 1..=7 {
        let o = printer_run("printer/experience.scenario", &["--state-file", state_arg]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let trace = String::from_utf8(o.stdout).unwrap();
        assert_eq!(
            trace.contains("PROP control_hints.visible false -> true  writer=ControlHintsRule"),
            n <= 5,
            "run {}",
            n
        );
        assert_eq!(
            fs::read_to_string(&state).unwrap(),
            format!("user.app_use_count={}\n", n)
        );
    }
}

#[test]
fn state_file_keeps_other_keys() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state");
    fs::write(&state, "user.app_use_count=41\nuser.name=\"Ana\"\n").unwrap();
    let o = printer_run(
        "printer/experience.scenario",
        &["--state-file", state.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read_to_string(&state).unwrap(),
        "user.app_use_count=42\nuser.name=\"Ana\"\n"
    );

    fs::write(&state, "user.app_use_count=true\n").unwrap();
    let o = printer_run(
        "printer/experience.scenario",
        &["--state-file", state.to_str().unwrap()],
    );
    assert_eq!(code(&o), 2);
}
