//! The context store: monitored features namespaced by category, with
//! fixed value types and change tracking.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

use crate::value::{ContextValue, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContextCategory {
    Environment,
    User,
    Platform,
}

impl ContextCategory {
    pub const ALL: [ContextCategory; 3] = [
        ContextCategory::Environment,
        ContextCategory::User,
        ContextCategory::Platform,
    ];

    pub fn prefix(self) -> &'static str {
        match self {
            ContextCategory::Environment => "env",
            ContextCategory::User => "user",
            ContextCategory::Platform => "platform",
        }
    }

    pub fn from_prefix(s: &str) -> Option<Self> {
        match s {
            "env" => Some(ContextCategory::Environment),
            "user" => Some(ContextCategory::User),
            "platform" => Some(ContextCategory::Platform),
            _ => None,
        }
    }
}

/// `env.name`, `user.name` or `platform.name`.
///
/// Ordering follows the rendered form, so maps keyed by `FeatureId` iterate
/// lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureId {
    category: ContextCategory,
    name: String,
}

/// `[a-z][a-z0-9_]*`
pub fn is_feature_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('a'..='z')) && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}

impl FeatureId {
    pub fn new(category: ContextCategory, name: &str) -> Result<Self, ContextError> {
        if !is_feature_name(name) {
            return Err(ContextError::InvalidFeatureId(alloc::format!(
                "{}.{}",
                category.prefix(),
                name
            )));
        }
        Ok(Self {
            category,
            name: name.to_string(),
        })
    }

    /// Parses the rendered form, e.g. `env.luminance`.
    pub fn parse(s: &str) -> Result<Self, ContextError> {
        let invalid = || ContextError::InvalidFeatureId(s.to_string());
        let (prefix, name) = s.split_once('.').ok_or_else(invalid)?;
        let category = ContextCategory::from_prefix(prefix).ok_or_else(invalid)?;
        FeatureId::new(category, name).map_err(|_| invalid())
    }

    pub fn category(&self) -> ContextCategory {
        self.category
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl Ord for FeatureId {
    fn cmp(&self, other: &Self) -> Ordering {
        // Prefixes differ in their first byte, so this matches comparing the
        // rendered strings.
        self.category
            .prefix()
            .cmp(other.category.prefix())
            .then_with(|| self.name.cmp(&other.name))
    }
}

impl PartialOrd for FeatureId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.category.prefix(), self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChangeFlag {
    Changed,
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContextError {
    #[error("feature {feature} holds {expected} values, got {found}")]
    TypeMismatch {
        feature: FeatureId,
        expected: ValueType,
        found: ValueType,
    },
    #[error("unknown feature {0}")]
    UnknownFeature(FeatureId),
    #[error("invalid value for {feature}: {reason}")]
    InvalidValue { feature: FeatureId, reason: &'static str },
    #[error("invalid feature id `{0}`")]
    InvalidFeatureId(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContextStore {
    values: BTreeMap<FeatureId, ContextValue>,
    dirty: BTreeSet<FeatureId>,
}

impl ContextStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores `value`. The first write fixes the feature's value type.
    pub fn set_feature(&mut self, id: &FeatureId, value: ContextValue) -> Result<ChangeFlag, ContextError> {
        value.check().map_err(|reason| ContextError::InvalidValue {
            feature: id.clone(),
            reason,
        })?;
        match self.values.get_mut(id) {
            Some(current) => {
                if current.value_type() != value.value_type() {
                    return Err(ContextError::TypeMismatch {
                        feature: id.clone(),
                        expected: current.value_type(),
                        found: value.value_type(),
                    });
                }
                if current.same_as(&value) {
                    return Ok(ChangeFlag::Unchanged);
                }
                *current = value;
            }
            None => {
                self.values.insert(id.clone(), value);
            }
        }
        self.dirty.insert(id.clone());
        Ok(ChangeFlag::Changed)
    }

    pub fn get_feature(&self, id: &FeatureId) -> Result<&ContextValue, ContextError> {
        self.values
            .get(id)
            .ok_or_else(|| ContextError::UnknownFeature(id.clone()))
    }

    pub fn contains(&self, id: &FeatureId) -> bool {
        self.values.contains_key(id)
    }

    /// Features changed since the previous drain, in lexicographic order.
    pub fn drain_dirty(&mut self) -> Vec<FeatureId> {
        core::mem::take(&mut self.dirty).into_iter().collect()
    }

    pub fn is_dirty(&self, id: &FeatureId) -> bool {
        self.dirty.contains(id)
    }

    pub fn dirty_len(&self) -> usize {
        self.dirty.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FeatureId, &ContextValue)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// A new store holding only `keys`, with an empty dirty-set.
    pub fn project<'a>(&self, keys: impl IntoIterator<Item = &'a FeatureId>) -> Result<ContextStore, ContextError> {
        let mut out = ContextStore::new();
        for key in keys {
            let value = self.get_feature(key)?;
            out.values.insert(key.clone(), value.clone());
        }
        Ok(out)
    }
}
