//! The adaptation engine: a deterministic control loop that evaluates
//! conditions, executes and unexecutes rules, keeps billboards facing the
//! user, advances the workflow, and repeats until nothing changes.
//!
//! Each event runs cycles `1..=max_cascade_depth`. A cycle:
//!
//! 1. evaluates every condition in definition order;
//! 2. collects rules to deactivate (active, some condition false) and to
//!    activate (inactive, all conditions true);
//! 3. unexecutes deactivated rules by descending `(priority, index)`;
//! 4. executes activated rules by ascending `(priority, index)`, so the
//!    highest-priority write lands last;
//! 5. refreshes billboards while a billboard-enabling rule is active;
//! 6. advances the workflow by at most one step;
//! 7. stops with `QUIESCENT` if none of the above changed anything.
//!
//! Conditions are only re-evaluated at cycle boundaries, so writes made by
//! rule actions are observed by the next cycle.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Reverse;

use thiserror::Error;

use crate::context::{ChangeFlag, ContextError, ContextStore, FeatureId};
use crate::expr::EvalError;
use crate::rules::{Action, RuleSet};
use crate::scene::{SceneError, SceneModel, Writer};
use crate::slot::{Slot, SlotValue, SlotWrite};
use crate::trace::{TraceEvent, TraceKind};
use crate::validate::{validate, Diagnostic};
use crate::value::ContextValue;
use crate::workflow::Workflow;

pub const DEFAULT_MAX_CASCADE_DEPTH: u32 = 16;

/// Feature billboards turn toward.
pub const USER_POSITION: &str = "user.position";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    pub max_cascade_depth: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            max_cascade_depth: DEFAULT_MAX_CASCADE_DEPTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("value does not fit slot {0}")]
    SlotMismatch(Slot),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("validation failed ({} error(s))", .0.iter().filter(|d| d.is_error()).count())]
    ValidationFailed(Vec<Diagnostic>),
    #[error("condition `{condition}`: {source}")]
    Evaluation { condition: String, source: EvalError },
    #[error("rule `{rule}`: {source}")]
    Action { rule: String, source: ActionError },
    #[error("workflow step `{step}`: {source}")]
    Workflow { step: String, source: SceneError },
    #[error("billboard refresh: {0}")]
    Billboard(String),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("no quiescence within {depth} cycles")]
    NonQuiescent { depth: u32 },
    #[error("rule `{rule}` {reason}")]
    RuleState { rule: String, reason: &'static str },
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("unknown condition `{0}`")]
    UnknownCondition(String),
    #[error("engine already started")]
    AlreadyStarted,
    #[error("engine not started")]
    NotStarted,
}

/// Prior and written value of one slot touched by a rule execution.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotEntry {
    pub slot: Slot,
    pub prior: SlotValue,
    pub written: SlotValue,
}

/// A rule's lifecycle. The snapshot is non-empty exactly while active.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleState {
    active: bool,
    snapshot: Vec<SnapshotEntry>,
}

impl RuleState {
    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn snapshot(&self) -> &[SnapshotEntry] {
        &self.snapshot
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleReport {
    pub event: u64,
    pub cycles: u32,
    /// Trace lines emitted while processing the event.
    pub emitted: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Cursor {
    event: u64,
    cycle: u32,
    seq: u32,
}

pub struct Engine {
    rules: RuleSet,
    rule_conditions: Vec<Vec<usize>>,
    store: ContextStore,
    scene: SceneModel,
    workflow: Option<Workflow>,
    conditions: Vec<Option<bool>>,
    rule_states: Vec<RuleState>,
    config: EngineConfig,
    trace: Vec<TraceEvent>,
    cursor: Cursor,
    next_event: u64,
    started: bool,
    user_position: FeatureId,
}

impl Engine {
    /// Validates the inputs and builds an engine with every condition
    /// unevaluated and every rule inactive. Call [`Engine::start`] next.
    pub fn new(
        rules: RuleSet,
        scene: SceneModel,
        store: ContextStore,
        workflow: Option<Workflow>,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        let diagnostics = validate(&rules, Some(&scene), workflow.as_ref());
        if diagnostics.iter().any(Diagnostic::is_error) {
            return Err(EngineError::ValidationFailed(diagnostics));
        }
        let rule_conditions = rules
            .rules()
            .iter()
            .map(|r| {
                r.conditions
                    .iter()
                    .map(|c| rules.condition_index(c).expect("rule set has no dangling references"))
                    .collect()
            })
            .collect();
        Ok(Self {
            conditions: alloc::vec![None; rules.conditions().len()],
            rule_states: alloc::vec![RuleState::default(); rules.rules().len()],
            rule_conditions,
            rules,
            store,
            scene,
            workflow,
            config,
            trace: Vec::new(),
            cursor: Cursor::default(),
            next_event: 0,
            started: false,
            user_position: FeatureId::parse(USER_POSITION).expect("valid feature id"),
        })
    }

    /// [`Engine::new`] followed by [`Engine::start`]. The partial trace is
    /// lost on failure.
    pub fn init(
        rules: RuleSet,
        scene: SceneModel,
        store: ContextStore,
        workflow: Option<Workflow>,
        config: EngineConfig,
    ) -> Result<Self, EngineError> {
        let mut engine = Self::new(rules, scene, store, workflow, config)?;
        engine.start()?;
        Ok(engine)
    }

    /// Processes the initialization event `E0`, so rules whose conditions
    /// already hold execute before the first real event.
    pub fn start(&mut self) -> Result<CycleReport, EngineError> {
        if self.started {
            return Err(EngineError::AlreadyStarted);
        }
        self.started = true;
        let event = self.next_event;
        self.next_event += 1;
        self.cursor = Cursor {
            event,
            cycle: 0,
            seq: 0,
        };
        self.run_cycles()
    }

    /// Applies `sets` atomically, then cycles to quiescence.
    pub fn process_event(&mut self, sets: &[(FeatureId, ContextValue)]) -> Result<CycleReport, EngineError> {
        if !self.started {
            return Err(EngineError::NotStarted);
        }
        let event = self.next_event;
        self.next_event += 1;
        self.cursor = Cursor {
            event,
            cycle: 0,
            seq: 0,
        };
        let first = self.trace.len();
        for (feature, value) in sets {
            self.store.set_feature(feature, value.clone())?;
            self.emit(TraceKind::Event {
                feature: feature.clone(),
                value: value.clone(),
            });
        }
        let mut report = self.run_cycles()?;
        report.emitted = self.trace.len() - first;
        Ok(report)
    }

    fn run_cycles(&mut self) -> Result<CycleReport, EngineError> {
        let first = self.trace.len();
        let depth = self.config.max_cascade_depth;
        for k in 1..=depth {
            self.cursor.cycle = k;
            self.cursor.seq = 0;
            let mut changed = false;

            for i in 0..self.conditions.len() {
                changed |= self.evaluate_condition_at(i)?.1;
            }

            let mut down = Vec::new();
            let mut up = Vec::new();
            for (i, conds) in self.rule_conditions.iter().enumerate() {
                let all_true = conds.iter().all(|&c| self.conditions[c] == Some(true));
                match (self.rule_states[i].active, all_true) {
                    (true, false) => down.push(i),
                    (false, true) => up.push(i),
                    _ => {}
                }
            }
            let rules = self.rules.rules();
            down.sort_by_key(|&i| Reverse((rules[i].priority, i)));
            up.sort_by_key(|&i| (rules[i].priority, i));
            for &i in &down {
                self.unexecute_at(i)?;
                changed = true;
            }
            for &i in &up {
                self.execute_at(i)?;
                changed = true;
            }

            changed |= self.refresh_billboards()?;
            changed |= self.advance_workflow()?;

            if !changed {
                self.emit(TraceKind::Quiescent { cycles: k });
                return Ok(CycleReport {
                    event: self.cursor.event,
                    cycles: k,
                    emitted: self.trace.len() - first,
                });
            }
        }
        self.emit(TraceKind::NonQuiescent { depth });
        Err(EngineError::NonQuiescent { depth })
    }

    /// Evaluates a condition and records its value. `changed` is true on
    /// first evaluation or when the value flipped; only then is a `COND`
    /// line emitted.
    pub fn evaluate_condition(&mut self, id: &str) -> Result<(bool, bool), EngineError> {
        let i = self
            .rules
            .condition_index(id)
            .ok_or_else(|| EngineError::UnknownCondition(id.to_string()))?;
        self.evaluate_condition_at(i)
    }

    fn evaluate_condition_at(&mut self, i: usize) -> Result<(bool, bool), EngineError> {
        let def = &self.rules.conditions()[i];
        let value = def
            .expr
            .eval_condition(&self.store, &self.scene)
            .map_err(|source| EngineError::Evaluation {
                condition: def.id.clone(),
                source,
            })?;
        let changed = self.conditions[i] != Some(value);
        if changed {
            self.conditions[i] = Some(value);
            let id = def.id.clone();
            self.emit(TraceKind::Cond { id, value });
        }
        Ok((value, changed))
    }

    /// Snapshots every slot the rule's actions target, applies the actions
    /// in order and marks the rule active. The caller is responsible for the
    /// rule's conditions holding.
    pub fn execute_rule(&mut self, id: &str) -> Result<Vec<TraceEvent>, EngineError> {
        let i = self.rule_index(id)?;
        let first = self.trace.len();
        self.execute_at(i)?;
        Ok(self.trace[first..].to_vec())
    }

    /// Restores each snapshotted slot that still holds the value this rule
    /// wrote; slots overwritten since are skipped and reported. Marks the
    /// rule inactive.
    pub fn unexecute_rule(&mut self, id: &str) -> Result<Vec<TraceEvent>, EngineError> {
        let i = self.rule_index(id)?;
        let first = self.trace.len();
        self.unexecute_at(i)?;
        Ok(self.trace[first..].to_vec())
    }

    fn rule_index(&self, id: &str) -> Result<usize, EngineError> {
        self.rules
            .rule_index(id)
            .ok_or_else(|| EngineError::UnknownRule(id.to_string()))
    }

    fn execute_at(&mut self, i: usize) -> Result<(), EngineError> {
        let rule = &self.rules.rules()[i];
        let rule_id = rule.id.clone();
        if self.rule_states[i].active {
            return Err(EngineError::RuleState {
                rule: rule_id,
                reason: "is already active",
            });
        }
        let actions: Vec<Action> = rule.actions.clone();
        let action_err = |source| EngineError::Action {
            rule: rule_id.clone(),
            source,
        };

        let mut snapshot: Vec<SnapshotEntry> = Vec::new();
        for a in &actions {
            let slot = a.target();
            if snapshot.iter().all(|s| s.slot != slot) {
                let prior = self.read_slot(&slot).map_err(action_err)?;
                snapshot.push(SnapshotEntry {
                    slot,
                    written: prior.clone(),
                    prior,
                });
            }
        }

        self.emit(TraceKind::RuleExec { id: rule_id.clone() });
        let writer = Writer::Rule(rule_id.clone());
        for a in &actions {
            let slot = a.target();
            let value = a.value();
            let write = self.write_slot(&slot, value, &writer).map_err(action_err)?;
            let entry = snapshot
                .iter_mut()
                .find(|s| s.slot == slot)
                .expect("every target was snapshotted");
            entry.written = self.read_slot(&slot).map_err(action_err)?;
            if let Some(w) = write {
                self.emit(TraceKind::Prop(w));
            }
        }
        self.rule_states[i] = RuleState { active: true, snapshot };
        Ok(())
    }

    fn unexecute_at(&mut self, i: usize) -> Result<(), EngineError> {
        let rule_id = self.rules.rules()[i].id.clone();
        if !self.rule_states[i].active {
            return Err(EngineError::RuleState {
                rule: rule_id,
                reason: "is not active",
            });
        }
        let snapshot = core::mem::take(&mut self.rule_states[i].snapshot);
        self.rule_states[i].active = false;
        let action_err = |source| EngineError::Action {
            rule: rule_id.clone(),
            source,
        };
        let writer = Writer::Rule(rule_id.clone());
        let mut skipped = Vec::new();
        let mut writes = Vec::new();
        for entry in snapshot {
            let current = self.read_slot(&entry.slot).map_err(action_err)?;
            if current.same_as(&entry.written) {
                if let Some(w) = self.write_slot(&entry.slot, entry.prior, &writer).map_err(action_err)? {
                    writes.push(w);
                }
            } else {
                skipped.push(entry.slot);
            }
        }
        self.emit(TraceKind::RuleUnexec {
            id: rule_id,
            skipped_restore: skipped,
        });
        for w in writes {
            self.emit(TraceKind::Prop(w));
        }
        Ok(())
    }

    fn read_slot(&self, slot: &Slot) -> Result<SlotValue, ActionError> {
        match slot {
            Slot::Property { element, property } => {
                Ok(SlotValue::Property(self.scene.read_property(element, *property)?))
            }
            Slot::Feature(id) => Ok(SlotValue::Feature(self.store.get_feature(id)?.clone())),
        }
    }

    /// Writes to an existing slot; `set_feature` on a never-set feature is
    /// an error, like writing a missing element property.
    fn write_slot(&mut self, slot: &Slot, value: SlotValue, writer: &Writer) -> Result<Option<SlotWrite>, ActionError> {
        match (slot, value) {
            (Slot::Property { element, property }, SlotValue::Property(v)) => Ok(self
                .scene
                .write_property(element, *property, v, writer)?
                .map(SlotWrite::from)),
            (Slot::Feature(id), SlotValue::Feature(v)) => {
                let old = self.store.get_feature(id)?.clone();
                match self.store.set_feature(id, v.clone())? {
                    ChangeFlag::Changed => Ok(Some(SlotWrite {
                        slot: slot.clone(),
                        old: SlotValue::Feature(old),
                        new: SlotValue::Feature(v),
                        writer: writer.clone(),
                    })),
                    ChangeFlag::Unchanged => Ok(None),
                }
            }
            (slot, _) => Err(ActionError::SlotMismatch(slot.clone())),
        }
    }

    fn refresh_billboards(&mut self) -> Result<bool, EngineError> {
        let driver = self
            .rules
            .rules()
            .iter()
            .zip(&self.rule_states)
            .find(|(r, s)| s.active && r.actions.iter().any(Action::enables_billboard));
        let Some((rule, _)) = driver else {
            return Ok(false);
        };
        let writer = Writer::Rule(rule.id.clone());
        let user = match self.store.get_feature(&self.user_position) {
            Ok(ContextValue::Vec3(v)) => *v,
            Ok(other) => {
                return Err(EngineError::Billboard(alloc::format!(
                    "{} holds {}, expected vec3",
                    USER_POSITION,
                    other.value_type()
                )))
            }
            Err(e) => return Err(EngineError::Billboard(e.to_string())),
        };
        let writes = self.scene.refresh_billboards(user, &writer);
        let changed = !writes.is_empty();
        for w in writes {
            self.emit(TraceKind::Prop(w.into()));
        }
        Ok(changed)
    }

    fn advance_workflow(&mut self) -> Result<bool, EngineError> {
        let Some(wf) = self.workflow.as_mut() else {
            return Ok(false);
        };
        let from = wf.current_step().id.clone();
        let mut moved = None;
        if wf.is_started() {
            if wf.current_step().terminal {
                return Ok(false);
            }
            let (rules, conds) = (&self.rules, &self.conditions);
            let holds = |id: &str| rules.condition_index(id).and_then(|i| conds[i]) == Some(true);
            if !holds(&wf.current_step().completion) {
                return Ok(false);
            }
            let Some(to) = wf.select_transition(holds).map(String::from) else {
                return Ok(false);
            };
            wf.set_current(&to).expect("transition targets are validated");
            moved = Some(to);
        }
        let step = wf.current_step().id.clone();
        let writes = wf
            .apply_step(&mut self.scene)
            .map_err(|source| EngineError::Workflow { step, source })?;
        if let Some(to) = moved {
            self.emit(TraceKind::Workflow { from, to });
        }
        for w in writes {
            self.emit(TraceKind::Prop(w.into()));
        }
        Ok(true)
    }

    fn emit(&mut self, kind: TraceKind) {
        self.cursor.seq += 1;
        self.trace.push(TraceEvent {
            event: self.cursor.event,
            cycle: self.cursor.cycle,
            seq: self.cursor.seq,
            kind,
        });
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    pub fn store(&self) -> &ContextStore {
        &self.store
    }

    pub fn scene(&self) -> &SceneModel {
        &self.scene
    }

    pub fn workflow(&self) -> Option<&Workflow> {
        self.workflow.as_ref()
    }

    pub fn config(&self) -> EngineConfig {
        self.config
    }

    /// Last evaluated value, `None` before the first evaluation.
    pub fn condition_value(&self, id: &str) -> Option<bool> {
        self.rules.condition_index(id).and_then(|i| self.conditions[i])
    }

    pub fn rule_state(&self, id: &str) -> Option<&RuleState> {
        self.rules.rule_index(id).map(|i| &self.rule_states[i])
    }

    pub fn is_active(&self, id: &str) -> bool {
        self.rule_state(id).is_some_and(RuleState::is_active)
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn render_trace(&self) -> String {
        crate::trace::render(&self.trace)
    }

    pub fn into_parts(self) -> (ContextStore, SceneModel, Option<Workflow>, Vec<TraceEvent>) {
        (self.store, self.scene, self.workflow, self.trace)
    }
}
