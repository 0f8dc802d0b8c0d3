//! Conditions, rules and their effector actions.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::context::FeatureId;
use crate::expr::Expr;
use crate::scene::{Color, DetailLevel, ModalitySet, PropValue, Property};
use crate::slot::{Slot, SlotValue};
use crate::value::{ContextValue, ShortFloat, SourceLiteral};

/// Adaptation category. Metadata only: it is traced and filterable but does
/// not change how a rule runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Style,
    Modality,
    Service,
    ContentPresentation,
    RealWorld,
    VirtualWorld,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Style,
        Category::Modality,
        Category::Service,
        Category::ContentPresentation,
        Category::RealWorld,
        Category::VirtualWorld,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Style => "Style",
            Category::Modality => "Modality",
            Category::Service => "Service",
            Category::ContentPresentation => "ContentPresentation",
            Category::RealWorld => "RealWorld",
            Category::VirtualWorld => "VirtualWorld",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Category::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Effector names accepted in rule actions.
pub const EFFECTORS: [&str; 9] = [
    "set_visible",
    "set_text",
    "set_text_size",
    "set_detail",
    "set_modality",
    "set_billboard",
    "highlight",
    "clear_highlight",
    "set_feature",
];

/// A typed effector call.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    SetVisible { element: String, value: bool },
    SetText { element: String, value: String },
    SetTextSize { element: String, value: f64 },
    SetDetail { element: String, value: DetailLevel },
    SetModality { element: String, value: ModalitySet },
    SetBillboard { element: String, value: bool },
    Highlight { element: String, color: Color },
    ClearHighlight { element: String },
    SetFeature { feature: FeatureId, value: ContextValue },
}

impl Action {
    pub fn effector(&self) -> &'static str {
        match self {
            Action::SetVisible { .. } => "set_visible",
            Action::SetText { .. } => "set_text",
            Action::SetTextSize { .. } => "set_text_size",
            Action::SetDetail { .. } => "set_detail",
            Action::SetModality { .. } => "set_modality",
            Action::SetBillboard { .. } => "set_billboard",
            Action::Highlight { .. } => "highlight",
            Action::ClearHighlight { .. } => "clear_highlight",
            Action::SetFeature { .. } => "set_feature",
        }
    }

    /// Element the action writes, if it targets the scene.
    pub fn element(&self) -> Option<&str> {
        match self {
            Action::SetVisible { element, .. }
            | Action::SetText { element, .. }
            | Action::SetTextSize { element, .. }
            | Action::SetDetail { element, .. }
            | Action::SetModality { element, .. }
            | Action::SetBillboard { element, .. }
            | Action::Highlight { element, .. }
            | Action::ClearHighlight { element } => Some(element),
            Action::SetFeature { .. } => None,
        }
    }

    pub fn target(&self) -> Slot {
        let prop = |element: &String, property| Slot::Property {
            element: element.clone(),
            property,
        };
        match self {
            Action::SetVisible { element, .. } => prop(element, Property::Visible),
            Action::SetText { element, .. } => prop(element, Property::Text),
            Action::SetTextSize { element, .. } => prop(element, Property::TextSize),
            Action::SetDetail { element, .. } => prop(element, Property::Detail),
            Action::SetModality { element, .. } => prop(element, Property::Modality),
            Action::SetBillboard { element, .. } => prop(element, Property::Billboard),
            Action::Highlight { element, .. } | Action::ClearHighlight { element } => {
                prop(element, Property::Highlight)
            }
            Action::SetFeature { feature, .. } => Slot::Feature(feature.clone()),
        }
    }

    pub fn value(&self) -> SlotValue {
        let p = SlotValue::Property;
        match self {
            Action::SetVisible { value, .. } | Action::SetBillboard { value, .. } => p(PropValue::Bool(*value)),
            Action::SetText { value, .. } => p(PropValue::Text(value.clone())),
            Action::SetTextSize { value, .. } => p(PropValue::Float(*value)),
            Action::SetDetail { value, .. } => p(PropValue::Detail(*value)),
            Action::SetModality { value, .. } => p(PropValue::Modalities(*value)),
            Action::Highlight { color, .. } => p(PropValue::Highlight(Some(*color))),
            Action::ClearHighlight { .. } => p(PropValue::Highlight(None)),
            Action::SetFeature { value, .. } => SlotValue::Feature(value.clone()),
        }
    }

    /// True for `set_billboard(_, true)`: a rule carrying it keeps
    /// billboards facing the user while active.
    pub fn enables_billboard(&self) -> bool {
        matches!(self, Action::SetBillboard { value: true, .. })
    }
}

/// Source form, e.g. `set_modality(instruction_panel, audio)`.
impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.effector())?;
        match self {
            Action::SetVisible { element, value } | Action::SetBillboard { element, value } => {
                write!(f, "{}, {}", element, value)?
            }
            Action::SetText { element, value } => {
                write!(f, "{}, {}", element, SourceLiteral(&ContextValue::Text(value.clone())))?
            }
            Action::SetTextSize { element, value } => write!(f, "{}, {}", element, ShortFloat(*value))?,
            Action::SetDetail { element, value } => write!(f, "{}, {}", element, value.name())?,
            Action::SetModality { element, value } => {
                write!(f, "{}", element)?;
                for m in value.iter() {
                    write!(f, ", {}", m.name())?;
                }
            }
            Action::Highlight { element, color } => write!(f, "{}, {}, {}, {}", element, color.r, color.g, color.b)?,
            Action::ClearHighlight { element } => write!(f, "{}", element)?,
            Action::SetFeature { feature, value } => write!(f, "{}, {}", feature, SourceLiteral(value))?,
        }
        f.write_str(")")
    }
}

/// A named boolean condition. `line` is the 1-based source line (0 when
/// built in code) and is ignored by equality.
#[derive(Debug, Clone)]
pub struct ConditionDef {
    pub id: String,
    pub expr: Expr,
    pub line: usize,
}

impl ConditionDef {
    pub fn new(id: &str, expr: Expr) -> Self {
        Self {
            id: id.to_string(),
            expr,
            line: 0,
        }
    }
}

impl PartialEq for ConditionDef {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.expr == other.expr
    }
}

/// A rule: executes when all its conditions hold, unexecutes when any fails.
/// `line` is ignored by equality.
#[derive(Debug, Clone)]
pub struct RuleDef {
    pub id: String,
    pub priority: i64,
    pub conditions: Vec<String>,
    pub actions: Vec<Action>,
    pub category: Category,
    pub line: usize,
}

impl RuleDef {
    pub fn new(id: &str, conditions: &[&str], actions: Vec<Action>, category: Category) -> Self {
        Self {
            id: id.to_string(),
            priority: 0,
            conditions: conditions.iter().map(|c| c.to_string()).collect(),
            actions,
            category,
            line: 0,
        }
    }

    pub fn with_priority(mut self, priority: i64) -> Self {
        self.priority = priority;
        self
    }
}

impl PartialEq for RuleDef {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.priority == other.priority
            && self.conditions == other.conditions
            && self.actions == other.actions
            && self.category == other.category
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleSetError {
    #[error("line {line}: duplicate condition `{id}`")]
    DuplicateCondition { id: String, line: usize },
    #[error("line {line}: duplicate rule `{id}`")]
    DuplicateRule { id: String, line: usize },
    #[error("line {line}: rule `{rule}` references unknown condition `{condition}`")]
    UnknownConditionRef {
        rule: String,
        condition: String,
        line: usize,
    },
    #[error("line {line}: rule `{rule}` has no {what}")]
    Empty {
        rule: String,
        what: &'static str,
        line: usize,
    },
    #[error("line {line}: condition `{id}`: {message}")]
    Type { id: String, message: String, line: usize },
}

impl RuleSetError {
    pub fn line(&self) -> usize {
        match self {
            RuleSetError::DuplicateCondition { line, .. }
            | RuleSetError::DuplicateRule { line, .. }
            | RuleSetError::UnknownConditionRef { line, .. }
            | RuleSetError::Empty { line, .. }
            | RuleSetError::Type { line, .. } => *line,
        }
    }
}

/// Conditions and rules in definition order, with no dangling references.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleSet {
    conditions: Vec<ConditionDef>,
    rules: Vec<RuleDef>,
}

impl RuleSet {
    pub fn new(conditions: Vec<ConditionDef>, rules: Vec<RuleDef>) -> Result<Self, RuleSetError> {
        let mut seen = BTreeSet::new();
        for c in &conditions {
            if !seen.insert(c.id.as_str()) {
                return Err(RuleSetError::DuplicateCondition {
                    id: c.id.clone(),
                    line: c.line,
                });
            }
            c.expr.check_condition().map_err(|e| RuleSetError::Type {
                id: c.id.clone(),
                message: e.0,
                line: c.line,
            })?;
        }
        let mut seen_rules = BTreeSet::new();
        for r in &rules {
            if !seen_rules.insert(r.id.as_str()) {
                return Err(RuleSetError::DuplicateRule {
                    id: r.id.clone(),
                    line: r.line,
                });
            }
            if r.conditions.is_empty() || r.actions.is_empty() {
                return Err(RuleSetError::Empty {
                    rule: r.id.clone(),
                    what: if r.conditions.is_empty() {
                        "conditions"
                    } else {
                        "actions"
                    },
                    line: r.line,
                });
            }
            if let Some(missing) = r.conditions.iter().find(|c| !seen.contains(c.as_str())) {
                return Err(RuleSetError::UnknownConditionRef {
                    rule: r.id.clone(),
                    condition: missing.clone(),
                    line: r.line,
                });
            }
        }
        Ok(Self { conditions, rules })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn conditions(&self) -> &[ConditionDef] {
        &self.conditions
    }

    pub fn rules(&self) -> &[RuleDef] {
        &self.rules
    }

    pub fn condition_index(&self, id: &str) -> Option<usize> {
        self.conditions.iter().position(|c| c.id == id)
    }

    pub fn rule_index(&self, id: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.id == id)
    }
}
