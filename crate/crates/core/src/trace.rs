//! Engine trace events and their line format.
//!
//! ```text
//! E<e> C<k> S<s> EVENT set <feature> = <value>
//! E<e> C<k> S<s> COND <id> -> true|false
//! E<e> C<k> S<s> RULE <id> EXECUTED|UNEXECUTED[ skipped_restore=<slot>[,...]]
//! E<e> C<k> S<s> PROP <slot> <old> -> <new>  writer=<rule|workflow>
//! E<e> C<k> S<s> WORKFLOW step <from> -> <to>
//! E<e> C<k> S<s> QUIESCENT cycles=<k>
//! E<e> C<k> S<s> NONQUIESCENT depth=<max>
//! ```
//!
//! `e` counts events (0 is initialization), `k` counts cycles within an
//! event (0 holds the event's own sets) and `s` counts lines within a cycle,
//! starting at 1.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::context::FeatureId;
use crate::slot::{Slot, SlotWrite};
use crate::value::ContextValue;

#[derive(Debug, Clone, PartialEq)]
pub enum TraceKind {
    Event { feature: FeatureId, value: ContextValue },
    Cond { id: String, value: bool },
    RuleExec { id: String },
    RuleUnexec { id: String, skipped_restore: Vec<Slot> },
    Prop(SlotWrite),
    Workflow { from: String, to: String },
    Quiescent { cycles: u32 },
    NonQuiescent { depth: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub event: u64,
    pub cycle: u32,
    pub seq: u32,
    pub kind: TraceKind,
}

impl TraceEvent {
    pub fn position(&self) -> (u64, u32, u32) {
        (self.event, self.cycle, self.seq)
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{} C{} S{} ", self.event, self.cycle, self.seq)?;
        match &self.kind {
            TraceKind::Event { feature, value } => write!(f, "EVENT set {} = {}", feature, value),
            TraceKind::Cond { id, value } => write!(f, "COND {} -> {}", id, value),
            TraceKind::RuleExec { id } => write!(f, "RULE {} EXECUTED", id),
            TraceKind::RuleUnexec { id, skipped_restore } => {
                write!(f, "RULE {} UNEXECUTED", id)?;
                for (i, slot) in skipped_restore.iter().enumerate() {
                    f.write_str(if i == 0 { " skipped_restore=" } else { "," })?;
                    write!(f, "{}", slot)?;
                }
                Ok(())
            }
            TraceKind::Prop(w) => write!(f, "PROP {} {} -> {}  writer={}", w.slot, w.old, w.new, w.writer),
            TraceKind::Workflow { from, to } => write!(f, "WORKFLOW step {} -> {}", from, to),
            TraceKind::Quiescent { cycles } => write!(f, "QUIESCENT cycles={}", cycles),
            TraceKind::NonQuiescent { depth } => write!(f, "NONQUIESCENT depth={}", depth),
        }
    }
}

/// One line per event, each terminated by `\n`.
pub fn render(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        let _ = writeln!(out, "{}", e);
    }
    out
}
