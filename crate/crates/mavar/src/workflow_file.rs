//! Workflow files: a `workflow` header followed by `step` lines.
//!
//! ```text
//! workflow single_order
//! step pick_a3 "Pick 2 items from A3" target shelf_a3 until picked_a3 goto pack
//! step pack "Pack the order" until packed terminal
//! ```

use std::fmt::Write as _;

use mavar_core::workflow::{Transition, Workflow, WorkflowError, WorkflowStep};
use mavar_core::ContextValue;
use thiserror::Error;

use crate::lex::{Cursor, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorkflowFileError {
    #[error("syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown step `{id}`")]
    UnknownStepRef { line: usize, id: String },
    #[error("duplicate step `{id}`")]
    DuplicateStep { line: usize, id: String },
}

impl WorkflowFileError {
    pub fn line(&self) -> usize {
        match self {
            WorkflowFileError::Syntax { line, .. }
            | WorkflowFileError::UnknownStepRef { line, .. }
            | WorkflowFileError::DuplicateStep { line, .. } => *line,
        }
    }
}

pub fn parse_workflow(text: &str) -> Result<Workflow, WorkflowFileError> {
    let mut id = None;
    let mut steps = Vec::new();
    let mut last_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let syntax = |message| WorkflowFileError::Syntax { line, message };
        let mut c = Cursor::new(raw).map_err(syntax)?;
        if c.is_empty_line() {
            continue;
        }
        last_line = line;
        if id.is_none() {
            c.expect_keyword("workflow").map_err(syntax)?;
            id = Some(c.ident("workflow id").map_err(syntax)?);
            c.end().map_err(syntax)?;
            continue;
        }
        let mut s = step(&mut c).map_err(syntax)?;
        s.line = line;
        steps.push(s);
    }
    let Some(id) = id else {
        return Err(WorkflowFileError::Syntax {
            line: last_line,
            message: "missing `workflow <id>` header".into(),
        });
    };
    Workflow::new(&id, steps).map_err(|e| match e {
        WorkflowError::Empty => WorkflowFileError::Syntax {
            line: last_line,
            message: "workflow has no steps".into(),
        },
        WorkflowError::DuplicateStep { id, line } => WorkflowFileError::DuplicateStep { line, id },
        WorkflowError::UnknownStepRef { id, line } => WorkflowFileError::UnknownStepRef { line, id },
        WorkflowError::BadStep { id, reason, line } => WorkflowFileError::Syntax {
            line,
            message: format!("step `{}` {}", id, reason),
        },
    })
}

fn step(c: &mut Cursor) -> Result<WorkflowStep, String> {
    c.expect_keyword("step")?;
    let id = c.ident("step id")?;
    let instruction = match c.bump() {
        Some(Tok::Str(s)) => s,
        other => {
            return Err(format!(
                "expected instruction string, found {}",
                other.map(|t| t.to_string()).unwrap_or_else(|| "end of line".into())
            ))
        }
    };
    ContextValue::Text(instruction.clone()).check().map_err(String::from)?;
    let target = if c.eat_keyword("target") {
        Some(c.ident("element id")?)
    } else {
        None
    };
    c.expect_keyword("until")?;
    let completion = c.ident("condition id")?;
    let mut transitions = Vec::new();
    loop {
        if c.eat_keyword("on") {
            let guard = c.ident("condition id")?;
            c.expect_keyword("goto")?;
            transitions.push(Transition {
                guard: Some(guard),
                target: c.ident("step id")?,
            });
        } else if c.eat_keyword("goto") {
            transitions.push(Transition {
                guard: None,
                target: c.ident("step id")?,
            });
        } else {
            break;
        }
    }
    let terminal = c.eat_keyword("terminal");
    c.end()?;
    if transitions.is_empty() && !terminal {
        return Err(format!("step `{}` needs a transition or `terminal`", id));
    }
    Ok(WorkflowStep {
        id,
        instruction,
        target,
        completion,
        transitions,
        terminal,
        line: 0,
    })
}

/// Canonical text for a workflow; parses back to an equal workflow.
pub fn write_workflow(wf: &Workflow) -> String {
    let mut out = format!("workflow {}\n", wf.id());
    for s in wf.steps() {
        let _ = write!(out, "step {} {}", s.id, ContextValue::Text(s.instruction.clone()));
        if let Some(t) = &s.target {
            let _ = write!(out, " target {}", t);
        }
        let _ = write!(out, " until {}", s.completion);
        for t in &s.transitions {
            match &t.guard {
                Some(g) => {
                    let _ = write!(out, " on {} goto {}", g, t.target);
                }
                None => {
                    let _ = write!(out, " goto {}", t.target);
                }
            }
        }
        if s.terminal {
            out.push_str(" terminal");
        }
        out.push('\n');
    }
    out
}
