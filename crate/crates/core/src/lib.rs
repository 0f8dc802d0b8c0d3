//! Core of a self-adaptive assistance engine.
//!
//! The crate is `no_std` (with `alloc`) and contains no I/O: a
//! [`context::ContextStore`] of monitored features, a [`scene::SceneModel`]
//! of managed elements, condition [`expr::Expr`]essions and
//! [`rules::RuleSet`]s, an optional [`workflow::Workflow`], and the
//! [`engine::Engine`] control loop that ties them together and records a
//! byte-stable [`trace`].

#![no_std]

extern crate alloc;

pub mod context;
pub mod engine;
pub mod expr;
pub mod rules;
pub mod scene;
pub mod slot;
pub mod trace;
pub mod validate;
pub mod value;
pub mod workflow;

#[cfg(feature = "proptest")]
pub mod conformance;
#[cfg(feature = "proptest")]
pub mod strategies;

pub use context::{ChangeFlag, ContextCategory, ContextError, ContextStore, FeatureId};
pub use engine::{CycleReport, Engine, EngineConfig, EngineError};
pub use expr::{CmpOp, Expr};
pub use rules::{Action, Category, ConditionDef, RuleDef, RuleSet};
pub use scene::{SceneElement, SceneModel};
pub use trace::{TraceEvent, TraceKind};
pub use validate::{validate, Diagnostic, Severity};
pub use value::{ContextValue, Vec3};
pub use workflow::Workflow;
