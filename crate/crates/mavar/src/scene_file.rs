//! Scene files: one `element` per line.
//!
//! ```text
//! element instruction_panel at (0, 1.5, 0) text "Insert the tray" billboard false
//! ```

use std::fmt::Write as _;

use mavar_core::scene::{DetailLevel, Modality, ModalitySet, SceneElement, SceneModel, Yaw};
use mavar_core::value::ShortFloat;
use mavar_core::ContextValue;
use thiserror::Error;

use crate::lex::{Cursor, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SceneFileError {
    #[error("syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate element `{id}`")]
    DuplicateElement { line: usize, id: String },
}

impl SceneFileError {
    pub fn line(&self) -> usize {
        match self {
            SceneFileError::Syntax { line, .. } | SceneFileError::DuplicateElement { line, .. } => *line,
        }
    }
}

pub fn parse_scene(text: &str) -> Result<SceneModel, SceneFileError> {
    let mut scene = SceneModel::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let syntax = |message| SceneFileError::Syntax { line, message };
        let mut c = Cursor::new(raw).map_err(syntax)?;
        if c.is_empty_line() {
            continue;
        }
        let el = element(&mut c).map_err(syntax)?;
        if scene.contains(&el.id) {
            return Err(SceneFileError::DuplicateElement { line, id: el.id });
        }
        scene.insert(el).expect("duplicates checked above");
    }
    Ok(scene)
}

fn element(c: &mut Cursor) -> Result<SceneElement, String> {
    c.expect_keyword("element")?;
    let id = c.ident("element id")?;
    c.expect_keyword("at")?;
    c.expect(&Tok::LParen)?;
    let mut el = SceneElement::new(&id, c.vec3_tail()?);
    if !el.position.is_finite() {
        return Err("position must be finite".into());
    }
    let mut seen: Vec<String> = Vec::new();
    while !c.at_end() {
        let attr = c.ident("attribute")?;
        if seen.contains(&attr) {
            return Err(format!("attribute `{}` given twice", attr));
        }
        match attr.as_str() {
            "yaw" => {
                let r = c.number()?;
                if !r.is_finite() {
                    return Err("yaw must be finite".into());
                }
                el.yaw = Yaw::new(r);
            }
            "visible" => el.visible = c.bool()?,
            "billboard" => el.billboard = c.bool()?,
            "text" => match c.literal()? {
                ContextValue::Text(s) => el.text = s,
                _ => return Err("text expects a string".into()),
            },
            "text_size" => {
                let s = c.number()?;
                if !(s > 0.0 && s.is_finite()) {
                    return Err("text_size must be positive".into());
                }
                el.text_size = s;
            }
            "detail" => {
                let d = c.ident("detail level")?;
                el.detail = DetailLevel::parse(&d).ok_or("detail must be `full` or `reduced`")?;
            }
            "modality" => {
                let mut mods = Vec::new();
                loop {
                    let m = c.ident("modality")?;
                    mods.push(Modality::parse(&m).ok_or_else(|| format!("unknown modality `{}`", m))?);
                    if !c.eat(&Tok::Comma) {
                        break;
                    }
                }
                el.modalities = ModalitySet::new(mods).expect("non-empty");
            }
            other => return Err(format!("unknown attribute `{}`", other)),
        }
        seen.push(attr);
    }
    Ok(el)
}

/// Writes a scene back in file form. Highlights are not part of the format
/// and are dropped.
pub fn write_scene(scene: &SceneModel) -> String {
    let mut out = String::new();
    for el in scene.elements() {
        let p = el.position;
        let _ = write!(
            out,
            "element {} at ({}, {}, {}) yaw {} visible {} text {} text_size {} detail {} modality ",
            el.id,
            ShortFloat(p.x),
            ShortFloat(p.y),
            ShortFloat(p.z),
            ShortFloat(el.yaw.radians()),
            el.visible,
            ContextValue::Text(el.text.clone()),
            ShortFloat(el.text_size),
            el.detail.name(),
        );
        let mods: Vec<&str> = el.modalities.iter().map(Modality::name).collect();
        let _ = writeln!(out, "{} billboard {}", mods.join(","), el.billboard);
    }
    out
}
