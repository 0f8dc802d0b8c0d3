//! Persisted context: `id=value` lines in lexicographic id order.

use mavar_core::context::ContextError;
use mavar_core::{ContextStore, FeatureId};
use thiserror::Error;

use crate::lex::parse_literal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed state file: {message}")]
pub struct MalformedStateFile {
    pub line: usize,
    pub message: String,
}

/// Renders the projection of `store` onto `keys`.
pub fn save_state<'a>(
    store: &ContextStore,
    keys: impl IntoIterator<Item = &'a FeatureId>,
) -> Result<String, ContextError> {
    Ok(render_state(&store.project(keys)?))
}

/// Renders every feature of `store`. Floats get six decimals, so float
/// values round-trip only up to that precision.
pub fn render_state(store: &ContextStore) -> String {
    store.iter().map(|(id, v)| format!("{}={}\n", id, v)).collect()
}

pub fn load_state(text: &str) -> Result<ContextStore, MalformedStateFile> {
    let mut store = ContextStore::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let bad = |message: String| MalformedStateFile { line, message };
        if raw.trim().is_empty() {
            continue;
        }
        let (key, value) = raw.split_once('=').ok_or_else(|| bad("expected `id=value`".into()))?;
        let id = FeatureId::parse(key.trim()).map_err(|e| bad(e.to_string()))?;
        if store.contains(&id) {
            return Err(bad(format!("duplicate key {}", id)));
        }
        let value = parse_literal(value).map_err(|m| bad(format!("{}: {}", id, m)))?;
        store.set_feature(&id, value).map_err(|e| bad(e.to_string()))?;
    }
    store.drain_dirty();
    Ok(store)
}
