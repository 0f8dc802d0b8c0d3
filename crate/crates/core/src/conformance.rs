//! Engine invariant checks over generated cases. Each check returns
//! `Err(TestCaseError)` describing the first violation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use proptest::test_runner::TestCaseError;

use crate::engine::{Engine, EngineConfig, EngineError};
use crate::expr::{CmpOp, Expr};
use crate::rules::{Action, Category, ConditionDef, RuleDef, RuleSet};
use crate::scene::{PropValue, Property};
use crate::strategies::{feature, small_scene, EngineCase};
use crate::trace::TraceKind;
use crate::value::ContextValue;
use crate::ContextStore;

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn engine_for(case: &EngineCase) -> Engine {
    Engine::new(
        case.rules.clone(),
        case.scene.clone(),
        case.store.clone(),
        None,
        EngineConfig::default(),
    )
    .expect("generated cases validate")
}

/// Starts the engine and feeds every event, calling `after` after each
/// quiescent one. Stops at the first error.
fn drive(
    case: &EngineCase,
    mut after: impl FnMut(&mut Engine) -> Result<(), TestCaseError>,
) -> Result<(Engine, Option<EngineError>), TestCaseError> {
    let mut engine = engine_for(case);
    if let Err(e) = engine.start() {
        return Ok((engine, Some(e)));
    }
    after(&mut engine)?;
    for ev in &case.events {
        if let Err(e) = engine.process_event(ev) {
            return Ok((engine, Some(e)));
        }
        after(&mut engine)?;
    }
    Ok((engine, None))
}

/// After every quiescent event, a rule is active iff all its conditions
/// evaluate true against the current context and scene.
pub fn activation_soundness(case: &EngineCase) -> Result<(), TestCaseError> {
    drive(case, |engine| {
        for rule in engine.rules().rules() {
            let mut all = true;
            for c in &rule.conditions {
                let def = &engine.rules().conditions()[engine.rules().condition_index(c).unwrap()];
                all &= def
                    .expr
                    .eval_condition(engine.store(), engine.scene())
                    .map_err(|e| fail(format!("{}", e)))?;
            }
            if engine.is_active(&rule.id) != all {
                return Err(fail(format!(
                    "rule {} active={} but conditions all true={}",
                    rule.id,
                    engine.is_active(&rule.id),
                    all
                )));
            }
        }
        Ok(())
    })
    .map(|_| ())
}

/// Every rule's EXECUTED/UNEXECUTED lines alternate, starting with EXECUTED.
pub fn exec_alternation(case: &EngineCase) -> Result<(), TestCaseError> {
    let (engine, _) = drive(case, |_| Ok(()))?;
    for rule in engine.rules().rules() {
        let mut expect_exec = true;
        for ev in engine.trace() {
            let is_exec = match &ev.kind {
                TraceKind::RuleExec { id } if *id == rule.id => true,
                TraceKind::RuleUnexec { id, .. } if *id == rule.id => false,
                _ => continue,
            };
            if is_exec != expect_exec {
                return Err(fail(format!("rule {} breaks alternation at {}", rule.id, ev)));
            }
            expect_exec = !expect_exec;
        }
    }
    let mut prev = None;
    for ev in engine.trace() {
        if prev.is_some_and(|p| p >= ev.position()) {
            return Err(fail(format!("trace position not increasing at {}", ev)));
        }
        prev = Some(ev.position());
    }
    Ok(())
}

/// Two runs of the same case produce byte-identical traces.
pub fn determinism(case: &EngineCase) -> Result<(), TestCaseError> {
    let (a, ea) = drive(case, |_| Ok(()))?;
    let (b, eb) = drive(case, |_| Ok(()))?;
    if a.render_trace() != b.render_trace() || ea != eb {
        return Err(fail(String::from("traces differ between identical runs")));
    }
    Ok(())
}

/// An empty event right after quiescence yields exactly one QUIESCENT line.
pub fn quiescence_idempotence(case: &EngineCase) -> Result<(), TestCaseError> {
    drive(case, |engine| {
        let before = engine.trace().len();
        let report = engine
            .process_event(&[])
            .map_err(|e| fail(format!("empty event failed: {}", e)))?;
        let added = &engine.trace()[before..];
        if report.cycles != 1 || added.len() != 1 || !matches!(added[0].kind, TraceKind::Quiescent { cycles: 1 }) {
            return Err(fail(format!("empty event emitted {} lines", added.len())));
        }
        Ok(())
    })
    .map(|_| ())
}

fn same_values(a: &ContextStore, b: &ContextStore) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b.iter())
            .all(|((ka, va), (kb, vb))| ka == kb && va.same_as(vb))
}

/// Executing then unexecuting any rule, with nothing in between, restores
/// the scene and context exactly.
pub fn restore_round_trip(case: &EngineCase) -> Result<(), TestCaseError> {
    for rule in case.rules.rules() {
        let mut engine = engine_for(case);
        engine.execute_rule(&rule.id).map_err(|e| fail(format!("{}", e)))?;
        engine.unexecute_rule(&rule.id).map_err(|e| fail(format!("{}", e)))?;
        if engine.scene() != &case.scene {
            return Err(fail(format!("rule {} left the scene changed", rule.id)));
        }
        if !same_values(engine.store(), &case.store) {
            return Err(fail(format!("rule {} left the context changed", rule.id)));
        }
        if engine.is_active(&rule.id) || !engine.rule_state(&rule.id).unwrap().snapshot().is_empty() {
            return Err(fail(format!("rule {} still holds state", rule.id)));
        }
    }
    Ok(())
}

/// Builds one rule per `(priority, value)` pair, all on the same condition
/// and all writing `e0.text_size`, in the given definition order.
pub fn conflicting_rules(rules: &[(i64, f64)]) -> RuleSet {
    let cond = ConditionDef::new(
        "go",
        Expr::compare(
            CmpOp::Eq,
            Expr::feature(feature(0)),
            Expr::Literal(ContextValue::Int(1)),
        ),
    );
    let defs = rules
        .iter()
        .enumerate()
        .map(|(i, &(priority, value))| {
            RuleDef::new(
                &format!("w{}", i),
                &["go"],
                alloc::vec![Action::SetTextSize {
                    element: "e0".into(),
                    value
                }],
                Category::Style,
            )
            .with_priority(priority)
        })
        .collect();
    RuleSet::new(alloc::vec![cond], defs).expect("well-formed")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for slot in 0..=p.len() {
            let mut q = p.clone();
            q.insert(slot, n - 1);
            out.push(q);
        }
    }
    out
}

/// For every definition order of the conflicting rules, the value left in
/// place is the one written by the rule with the greatest
/// `(priority, definition index)`, found by scanning all rules.
pub fn conflict_resolution(rules: &[(i64, f64)]) -> Result<(), TestCaseError> {
    for order in permutations(rules.len()) {
        let ordered: Vec<(i64, f64)> = order.iter().map(|&i| rules[i]).collect();
        let mut best = 0;
        for i in 1..ordered.len() {
            let beats = ordered[i].0 > ordered[best].0 || (ordered[i].0 == ordered[best].0 && i > best);
            if beats {
                best = i;
            }
        }
        let mut store = ContextStore::new();
        store.set_feature(&feature(0), ContextValue::Int(1)).unwrap();
        let engine = Engine::init(
            conflicting_rules(&ordered),
            small_scene(),
            store,
            None,
            EngineConfig::default(),
        )
        .map_err(|e| fail(format!("{}", e)))?;
        let got = engine.scene().read_property("e0", Property::TextSize).unwrap();
        if !got.same_as(&PropValue::Float(ordered[best].1)) {
            return Err(fail(format!(
                "order {:?}: got {}, expected {}",
                ordered, got, ordered[best].1
            )));
        }
    }
    Ok(())
}
