//! Scenario files and deterministic replay.
//!
//! ```text
//! scenario dark_switch
//! at 0 set env.luminance = 0.5
//! at 1000 set env.luminance = 0.01
//! ```
//!
//! Lines at `t = 0` seed the store before the engine starts; later lines
//! with equal timestamps form one atomic event. Timestamps only order
//! events and never reach the trace.

use std::fmt::Write as _;

use mavar_core::engine::{Engine, EngineConfig, EngineError};
use mavar_core::trace::{render, TraceEvent};
use mavar_core::value::SourceLiteral;
use mavar_core::{ContextStore, ContextValue, FeatureId, RuleSet, SceneModel, Workflow};
use thiserror::Error;

use crate::lex::{Cursor, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("timestamp {t} is earlier than {previous}")]
    DecreasingTimestamp { line: usize, t: u64, previous: u64 },
    #[error("feature {feature} set twice at t={t}")]
    DuplicateFeatureInEvent { line: usize, feature: String, t: u64 },
}

impl ScenarioError {
    pub fn line(&self) -> usize {
        match self {
            ScenarioError::Syntax { line, .. }
            | ScenarioError::DecreasingTimestamp { line, .. }
            | ScenarioError::DuplicateFeatureInEvent { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEvent {
    pub t: u64,
    pub sets: Vec<(FeatureId, ContextValue)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub initial: Vec<(FeatureId, ContextValue)>,
    pub events: Vec<ScenarioEvent>,
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut id = None;
    let mut initial: Vec<(FeatureId, ContextValue)> = Vec::new();
    let mut events: Vec<ScenarioEvent> = Vec::new();
    let mut previous = 0u64;
    let mut last_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let syntax = |message| ScenarioError::Syntax { line, message };
        let mut c = Cursor::new(raw).map_err(syntax)?;
        if c.is_empty_line() {
            continue;
        }
        last_line = line;
        if id.is_none() {
            c.expect_keyword("scenario").map_err(syntax)?;
            id = Some(c.ident("scenario id").map_err(syntax)?);
            c.end().map_err(syntax)?;
            continue;
        }
        let (t, feature, value) = set_line(&mut c).map_err(syntax)?;
        if t < previous {
            return Err(ScenarioError::DecreasingTimestamp { line, t, previous });
        }
        previous = t;
        let sets = if t == 0 {
            &mut initial
        } else {
            match events.last_mut() {
                Some(e) if e.t == t => &mut e.sets,
                _ => {
                    events.push(ScenarioEvent { t, sets: Vec::new() });
                    &mut events.last_mut().expect("just pushed").sets
                }
            }
        };
        if sets.iter().any(|(f, _)| *f == feature) {
            return Err(ScenarioError::DuplicateFeatureInEvent {
                line,
                feature: feature.to_string(),
                t,
            });
        }
        sets.push((feature, value));
    }
    let id = id.ok_or(ScenarioError::Syntax {
        line: last_line,
        message: "missing `scenario <id>` header".into(),
    })?;
    Ok(Scenario { id, initial, events })
}

fn set_line(c: &mut Cursor) -> Result<(u64, FeatureId, ContextValue), String> {
    c.expect_keyword("at")?;
    let t = match c.bump() {
        Some(Tok::Int(d)) => d
            .parse::<u64>()
            .map_err(|_| format!("timestamp `{}` out of range", d))?,
        _ => return Err("expected a non-negative integer timestamp".into()),
    };
    c.expect_keyword("set")?;
    let feature = c.feature()?;
    c.expect(&Tok::Assign)?;
    let value = c.literal()?;
    value.check().map_err(String::from)?;
    c.end()?;
    Ok((t, feature, value))
}

/// Canonical text for a scenario; parses back to an equal scenario.
pub fn write_scenario(s: &Scenario) -> String {
    let mut out = format!("scenario {}\n", s.id);
    let blocks = std::iter::once((0, &s.initial)).chain(s.events.iter().map(|e| (e.t, &e.sets)));
    for (t, sets) in blocks {
        for (f, v) in sets {
            let _ = writeln!(out, "at {} set {} = {}", t, f, SourceLiteral(v));
        }
    }
    out
}

/// Outcome of a replay. `error` holds the runtime failure that stopped the
/// run, if any; `trace` is complete up to that point.
#[derive(Debug)]
pub struct RunReport {
    pub trace: Vec<TraceEvent>,
    pub store: ContextStore,
    pub scene: SceneModel,
    pub workflow: Option<Workflow>,
    pub error: Option<EngineError>,
}

impl RunReport {
    pub fn trace_text(&self) -> String {
        render(&self.trace)
    }
}

/// Inputs shared by every run.
#[derive(Debug, Clone)]
pub struct Setup {
    pub rules: RuleSet,
    pub scene: SceneModel,
    pub workflow: Option<Workflow>,
    pub config: EngineConfig,
}

/// Replays `scenario` on top of `store`. Fails up front only when the
/// inputs do not validate or the initial sets do not fit `store`.
pub fn run_scenario(setup: &Setup, scenario: &Scenario, store: ContextStore) -> Result<RunReport, EngineError> {
    run_scenario_observed(setup, scenario, store, |_, _| {})
}

/// Like [`run_scenario`], calling `observe(e, engine)` after start-up
/// (`e = 0`) and after each event that reaches quiescence.
pub fn run_scenario_observed(
    setup: &Setup,
    scenario: &Scenario,
    mut store: ContextStore,
    mut observe: impl FnMut(u64, &Engine),
) -> Result<RunReport, EngineError> {
    for (f, v) in &scenario.initial {
        store.set_feature(f, v.clone())?;
    }
    let mut engine = Engine::new(
        setup.rules.clone(),
        setup.scene.clone(),
        store,
        setup.workflow.clone(),
        setup.config,
    )?;
    let mut error = engine.start().err();
    if error.is_none() {
        observe(0, &engine);
        for (i, event) in scenario.events.iter().enumerate() {
            if let Err(e) = engine.process_event(&event.sets) {
                error = Some(e);
                break;
            }
            observe(i as u64 + 1, &engine);
        }
    }
    let (store, scene, workflow, trace) = engine.into_parts();
    Ok(RunReport {
        trace,
        store,
        scene,
        workflow,
        error,
    })
}
