//! Step workflows: sequences with guarded exclusive branches and terminal
//! steps, driving instruction text and target highlighting.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::scene::{Color, PropValue, Property, PropertyWrite, SceneError, SceneModel, Writer};

/// Element that receives each step's instruction text.
pub const INSTRUCTION_PANEL: &str = "instruction_panel";
/// Highlight color marking the current step's target.
pub const HIGHLIGHT: Color = Color::GREEN;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    /// Condition id; `None` is the default branch.
    pub guard: Option<String>,
    pub target: String,
}

#[derive(Debug, Clone)]
pub struct WorkflowStep {
    pub id: String,
    pub instruction: String,
    pub target: Option<String>,
    /// Condition that marks the step as done.
    pub completion: String,
    pub transitions: Vec<Transition>,
    pub terminal: bool,
    pub line: usize,
}

impl PartialEq for WorkflowStep {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.instruction == other.instruction
            && self.target == other.target
            && self.completion == other.completion
            && self.transitions == other.transitions
            && self.terminal == other.terminal
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkflowError {
    #[error("workflow has no steps")]
    Empty,
    #[error("line {line}: duplicate step `{id}`")]
    DuplicateStep { id: String, line: usize },
    #[error("line {line}: unknown step `{id}`")]
    UnknownStepRef { id: String, line: usize },
    #[error("line {line}: step `{id}` {reason}")]
    BadStep {
        id: String,
        reason: &'static str,
        line: usize,
    },
}

/// A workflow and its position. The first step is the initial one.
#[derive(Debug, Clone, PartialEq)]
pub struct Workflow {
    id: String,
    steps: Vec<WorkflowStep>,
    current: usize,
    started: bool,
    highlighted: Option<String>,
}

impl Workflow {
    pub fn new(id: &str, steps: Vec<WorkflowStep>) -> Result<Self, WorkflowError> {
        if steps.is_empty() {
            return Err(WorkflowError::Empty);
        }
        let mut ids = BTreeSet::new();
        for s in &steps {
            if !ids.insert(s.id.as_str()) {
                return Err(WorkflowError::DuplicateStep {
                    id: s.id.clone(),
                    line: s.line,
                });
            }
        }
        for s in &steps {
            let bad = |reason| WorkflowError::BadStep {
                id: s.id.clone(),
                reason,
                line: s.line,
            };
            if s.terminal && !s.transitions.is_empty() {
                return Err(bad("is terminal but has transitions"));
            }
            if !s.terminal && s.transitions.is_empty() {
                return Err(bad("needs a transition or `terminal`"));
            }
            if let Some(pos) = s.transitions.iter().position(|t| t.guard.is_none()) {
                if pos + 1 != s.transitions.len() {
                    return Err(bad("has an unguarded transition that is not last"));
                }
            }
            if let Some(t) = s.transitions.iter().find(|t| !ids.contains(t.target.as_str())) {
                return Err(WorkflowError::UnknownStepRef {
                    id: t.target.clone(),
                    line: s.line,
                });
            }
        }
        Ok(Self {
            id: id.to_string(),
            steps,
            current: 0,
            started: false,
            highlighted: None,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn steps(&self) -> &[WorkflowStep] {
        &self.steps
    }

    pub fn current_step(&self) -> &WorkflowStep {
        &self.steps[self.current]
    }

    pub fn is_started(&self) -> bool {
        self.started
    }

    /// Element currently carrying the workflow highlight.
    pub fn highlighted(&self) -> Option<&str> {
        self.highlighted.as_deref()
    }

    pub fn step_index(&self, id: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.id == id)
    }

    /// Condition ids referenced by completions and guards, with the line
    /// of the step that references them.
    pub fn condition_refs(&self) -> impl Iterator<Item = (&str, usize)> {
        self.steps.iter().flat_map(|s| {
            core::iter::once((s.completion.as_str(), s.line)).chain(
                s.transitions
                    .iter()
                    .filter_map(move |t| t.guard.as_deref().map(|g| (g, s.line))),
            )
        })
    }

    /// Steps not reachable from the initial step.
    pub fn unreachable_steps(&self) -> Vec<&WorkflowStep> {
        let mut seen = alloc::vec![false; self.steps.len()];
        let mut stack = alloc::vec![0usize];
        while let Some(i) = stack.pop() {
            if core::mem::replace(&mut seen[i], true) {
                continue;
            }
            for t in &self.steps[i].transitions {
                if let Some(j) = self.step_index(&t.target) {
                    stack.push(j);
                }
            }
        }
        self.steps
            .iter()
            .zip(seen)
            .filter(|(_, s)| !s)
            .map(|(step, _)| step)
            .collect()
    }

    /// First transition whose guard holds; unguarded transitions always do.
    /// `None` for terminal steps or when no guard holds.
    pub fn select_transition(&self, mut holds: impl FnMut(&str) -> bool) -> Option<&str> {
        let step = self.current_step();
        if step.terminal {
            return None;
        }
        step.transitions
            .iter()
            .find(|t| t.guard.as_deref().is_none_or(&mut holds))
            .map(|t| t.target.as_str())
    }

    /// Moves to `step_id` without touching the scene; call
    /// [`Workflow::apply_step`] afterwards.
    pub fn set_current(&mut self, step_id: &str) -> Option<()> {
        self.current = self.step_index(step_id)?;
        Some(())
    }

    /// Writes the current step's instruction to the instruction panel, moves
    /// the highlight to its target and clears it from the previous target.
    pub fn apply_step(&mut self, scene: &mut SceneModel) -> Result<Vec<PropertyWrite>, SceneError> {
        self.started = true;
        let step = &self.steps[self.current];
        let mut writes = Vec::new();
        writes.extend(scene.write_property(
            INSTRUCTION_PANEL,
            Property::Text,
            PropValue::Text(step.instruction.clone()),
            &Writer::Workflow,
        )?);
        if let Some(prev) = self.highlighted.take() {
            if step.target.as_deref() != Some(prev.as_str()) {
                writes.extend(scene.write_property(
                    &prev,
                    Property::Highlight,
                    PropValue::Highlight(None),
                    &Writer::Workflow,
                )?);
            }
        }
        if let Some(target) = &step.target {
            writes.extend(scene.write_property(
                target,
                Property::Highlight,
                PropValue::Highlight(Some(HIGHLIGHT)),
                &Writer::Workflow,
            )?);
            self.highlighted = Some(target.clone());
        }
        Ok(writes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::SceneElement;
    use crate::value::Vec3;
    use alloc::vec;

    fn step(id: &str, target: Option<&str>, transitions: Vec<Transition>, terminal: bool) -> WorkflowStep {
        WorkflowStep {
            id: id.into(),
            instruction: alloc::format!("do {}", id),
            target: target.map(Into::into),
            completion: alloc::format!("{}_done", id),
            transitions,
            terminal,
            line: 0,
        }
    }

    fn goto(target: &str) -> Transition {
        Transition {
            guard: None,
            target: target.into(),
        }
    }

    fn on(guard: &str, target: &str) -> Transition {
        Transition {
            guard: Some(guard.into()),
            target: target.into(),
        }
    }

    fn scene() -> SceneModel {
        let mut s = SceneModel::new();
        for id in [INSTRUCTION_PANEL, "shelf_A3", "shelf_B1"] {
            s.insert(SceneElement::new(id, Vec3::ZERO)).unwrap();
        }
        s
    }

    #[test]
    fn apply_highlights_target_and_sets_text() {
        let mut wf = Workflow::new(
            "w",
            vec![
                step("s1", Some("shelf_A3"), vec![goto("s2")], false),
                step("s2", None, vec![], true),
            ],
        )
        .unwrap();
        let mut sc = scene();
        let w = wf.apply_step(&mut sc).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].element, "shelf_A3");
        assert_eq!(w[1].old, PropValue::Highlight(None));
        assert_eq!(w[1].new, PropValue::Highlight(Some(Color::GREEN)));
        assert_eq!(w[0].writer, Writer::Workflow);
        // re-applying is a no-op
        assert!(wf.apply_step(&mut sc).unwrap().is_empty());
        // moving on clears the old highlight
        wf.set_current("s2").unwrap();
        let w = wf.apply_step(&mut sc).unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].element, "shelf_A3");
        assert_eq!(w[1].new, PropValue::Highlight(None));
        assert_eq!(wf.highlighted(), None);
    }

    #[test]
    fn untargeted_step_writes_only_text() {
        let mut wf = Workflow::new("w", vec![step("s1", None, vec![], true)]).unwrap();
        let w = wf.apply_step(&mut scene()).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].property, Property::Text);
    }

    #[test]
    fn first_true_guard_wins() {
        let wf = Workflow::new(
            "w",
            vec![
                step("s1", None, vec![on("a", "x"), on("b", "y"), goto("z")], false),
                step("x", None, vec![], true),
                step("y", None, vec![], true),
                step("z", None, vec![], true),
            ],
        )
        .unwrap();
        assert_eq!(wf.select_transition(|_| true), Some("x"));
        assert_eq!(wf.select_transition(|g| g == "b"), Some("y"));
        assert_eq!(wf.select_transition(|_| false), Some("z"));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(Workflow::new("w", vec![]), Err(WorkflowError::Empty));
        assert!(matches!(
            Workflow::new("w", vec![step("s1", None, vec![goto("missing")], false)]),
            Err(WorkflowError::UnknownStepRef { .. })
        ));
        assert!(matches!(
            Workflow::new("w", vec![step("s1", None, vec![], false)]),
            Err(WorkflowError::BadStep { .. })
        ));
        assert!(matches!(
            Workflow::new(
                "w",
                vec![step("s1", None, vec![], true), step("s1", None, vec![], true)]
            ),
            Err(WorkflowError::DuplicateStep { .. })
        ));
        assert!(matches!(
            Workflow::new("w", vec![step("s1", None, vec![goto("s1"), on("g", "s1")], false)]),
            Err(WorkflowError::BadStep { .. })
        ));
    }

    #[test]
    fn finds_unreachable_steps() {
        let wf = Workflow::new(
            "w",
            vec![
                step("s1", None, vec![goto("s2")], false),
                step("s2", None, vec![], true),
                step("orphan", None, vec![], true),
            ],
        )
        .unwrap();
        let ids: Vec<_> = wf.unreachable_steps().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, vec!["orphan"]);
    }
}
