//! Static cross-checks between a rule set, a scene and an optional workflow.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::Expr;
use crate::rules::RuleSet;
use crate::scene::SceneModel;
use crate::slot::Slot;
use crate::workflow::{Workflow, INSTRUCTION_PANEL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// Which input a diagnostic points into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Rules,
    Workflow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub origin: Origin,
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    fn error(origin: Origin, line: usize, message: String) -> Self {
        Self {
            severity: Severity::Error,
            origin,
            line,
            message,
        }
    }

    fn warning(origin: Origin, line: usize, message: String) -> Self {
        Self {
            severity: Severity::Warning,
            origin,
            line,
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.severity, self.message)
    }
}

/// Reports scene references to missing elements (errors), workflow
/// references to missing conditions or elements (errors), unreachable
/// workflow steps (warnings) and rules that write the same slot (warnings).
/// Scene checks are skipped when `scene` is `None`.
pub fn validate(rules: &RuleSet, scene: Option<&SceneModel>, workflow: Option<&Workflow>) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if let Some(scene) = scene {
        for c in rules.conditions() {
            let mut missing = Vec::new();
            c.expr.walk(&mut |e| {
                if let Expr::SceneRef { element, .. } = e {
                    if !scene.contains(element) && !missing.contains(element) {
                        missing.push(element.clone());
                    }
                }
            });
            for el in missing {
                out.push(Diagnostic::error(
                    Origin::Rules,
                    c.line,
                    format!("condition `{}` reads unknown element `{}`", c.id, el),
                ));
            }
        }
        for r in rules.rules() {
            for a in &r.actions {
                if let Some(el) = a.element() {
                    if !scene.contains(el) {
                        out.push(Diagnostic::error(
                            Origin::Rules,
                            r.line,
                            format!("rule `{}`: {} targets unknown element `{}`", r.id, a.effector(), el),
                        ));
                    }
                }
            }
        }
    }

    let mut writers: BTreeMap<Slot, Vec<usize>> = BTreeMap::new();
    for (i, r) in rules.rules().iter().enumerate() {
        for a in &r.actions {
            let list = writers.entry(a.target()).or_default();
            if !list.contains(&i) {
                list.push(i);
            }
        }
    }
    let all = rules.rules();
    let mut conflicts: Vec<(usize, usize, Slot)> = Vec::new();
    for (slot, list) in writers {
        for (n, &a) in list.iter().enumerate() {
            for &b in &list[n + 1..] {
                conflicts.push((a, b, slot.clone()));
            }
        }
    }
    conflicts.sort_by_key(|x| (x.1, x.0));
    for (a, b, slot) in conflicts {
        let (ra, rb) = (&all[a], &all[b]);
        let winner = if (rb.priority, b) > (ra.priority, a) { rb } else { ra };
        out.push(Diagnostic::warning(
            Origin::Rules,
            rb.line,
            format!(
                "write-write conflict on {}: rule `{}` (priority {}) and rule `{}` (priority {}); `{}` wins when both are active",
                slot, ra.id, ra.priority, rb.id, rb.priority, winner.id
            ),
        ));
    }

    if let Some(wf) = workflow {
        for (cond, line) in wf.condition_refs() {
            if rules.condition_index(cond).is_none() {
                out.push(Diagnostic::error(
                    Origin::Workflow,
                    line,
                    format!("unknown condition `{}`", cond),
                ));
            }
        }
        if let Some(scene) = scene {
            if !scene.contains(INSTRUCTION_PANEL) {
                out.push(Diagnostic::error(
                    Origin::Workflow,
                    wf.steps()[0].line,
                    format!("scene has no `{}` element for step instructions", INSTRUCTION_PANEL),
                ));
            }
            for s in wf.steps() {
                if let Some(t) = &s.target {
                    if !scene.contains(t) {
                        out.push(Diagnostic::error(
                            Origin::Workflow,
                            s.line,
                            format!("step `{}` targets unknown element `{}`", s.id, t),
                        ));
                    }
                }
            }
        }
        for s in wf.unreachable_steps() {
            out.push(Diagnostic::warning(
                Origin::Workflow,
                s.line,
                format!("step `{}` is unreachable", s.id),
            ));
        }
    }

    out
}
