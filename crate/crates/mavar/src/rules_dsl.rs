//! The rules language: condition and rule definitions, one per line.
//!
//! ```text
//! condition dark: env.luminance < 0.05
//! rule AudioOutRule when dark do set_modality(instruction_panel, audio) category Modality
//! ```

use std::fmt::Write as _;

use mavar_core::expr::{CmpOp, Expr};
use mavar_core::rules::{Action, Category, ConditionDef, RuleDef, RuleSet, RuleSetError, EFFECTORS};
use mavar_core::scene::{Color, DetailLevel, Modality, ModalitySet, Property};
use mavar_core::{ContextValue, FeatureId, Vec3};
use thiserror::Error;

use crate::lex::{Cursor, Tok};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RulesError {
    #[error("syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("rule `{rule}` references unknown condition `{condition}`")]
    UnknownConditionRef {
        line: usize,
        rule: String,
        condition: String,
    },
    #[error("duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("type error: {message}")]
    Type { line: usize, message: String },
    #[error("unknown effector `{name}`")]
    UnknownEffector { line: usize, name: String },
    #[error("unknown category `{name}`")]
    UnknownCategory { line: usize, name: String },
}

impl RulesError {
    pub fn line(&self) -> usize {
        match self {
            RulesError::Syntax { line, .. }
            | RulesError::UnknownConditionRef { line, .. }
            | RulesError::DuplicateId { line, .. }
            | RulesError::Type { line, .. }
            | RulesError::UnknownEffector { line, .. }
            | RulesError::UnknownCategory { line, .. } => *line,
        }
    }
}

impl From<RuleSetError> for RulesError {
    fn from(e: RuleSetError) -> Self {
        let line = e.line();
        match e {
            RuleSetError::DuplicateCondition { id, .. } | RuleSetError::DuplicateRule { id, .. } => {
                RulesError::DuplicateId { line, id }
            }
            RuleSetError::UnknownConditionRef { rule, condition, .. } => {
                RulesError::UnknownConditionRef { line, rule, condition }
            }
            RuleSetError::Type { message, .. } => RulesError::Type { line, message },
            other => RulesError::Syntax {
                line,
                message: other.to_string(),
            },
        }
    }
}

enum LineError {
    Syntax(String),
    Type(String),
    Effector(String),
    Category(String),
}

impl From<String> for LineError {
    fn from(s: String) -> Self {
        LineError::Syntax(s)
    }
}

impl LineError {
    fn at(self, line: usize) -> RulesError {
        match self {
            LineError::Syntax(message) => RulesError::Syntax { line, message },
            LineError::Type(message) => RulesError::Type { line, message },
            LineError::Effector(name) => RulesError::UnknownEffector { line, name },
            LineError::Category(name) => RulesError::UnknownCategory { line, name },
        }
    }
}

/// Parses a rules file. Definition order is preserved; conditions may be
/// referenced before they are defined.
pub fn parse_rules(text: &str) -> Result<RuleSet, RulesError> {
    let mut conditions = Vec::new();
    let mut rules = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut c = Cursor::new(raw).map_err(|message| RulesError::Syntax { line, message })?;
        if c.is_empty_line() {
            continue;
        }
        if c.eat_keyword("condition") {
            let mut def = condition(&mut c).map_err(|e| e.at(line))?;
            def.line = line;
            conditions.push(def);
        } else if c.eat_keyword("rule") {
            let mut def = rule(&mut c).map_err(|e| e.at(line))?;
            def.line = line;
            rules.push(def);
        } else {
            return Err(RulesError::Syntax {
                line,
                message: format!("expected `condition` or `rule`, found {}", c.describe_next()),
            });
        }
    }
    Ok(RuleSet::new(conditions, rules)?)
}

fn condition(c: &mut Cursor) -> Result<ConditionDef, LineError> {
    let id = c.ident("condition id")?;
    c.expect(&Tok::Colon)?;
    let expr = parse_expr(c)?;
    c.end()?;
    expr.check_condition().map_err(|e| LineError::Type(e.0))?;
    Ok(ConditionDef::new(&id, expr))
}

fn rule(c: &mut Cursor) -> Result<RuleDef, LineError> {
    let id = c.ident("rule id")?;
    let priority = if c.eat_keyword("priority") { c.int()? } else { 0 };
    c.expect_keyword("when")?;
    let mut conds = vec![c.ident("condition id")?];
    while c.eat(&Tok::Comma) {
        conds.push(c.ident("condition id")?);
    }
    c.expect_keyword("do")?;
    let mut actions = vec![action(c)?];
    while c.eat(&Tok::Semi) {
        actions.push(action(c)?);
    }
    c.expect_keyword("category")?;
    let name = c.ident("category")?;
    let category = Category::parse(&name).ok_or(LineError::Category(name))?;
    c.end()?;
    let refs: Vec<&str> = conds.iter().map(String::as_str).collect();
    Ok(RuleDef::new(&id, &refs, actions, category).with_priority(priority))
}

// ---- expressions

/// Parses an expression: `||` binds loosest, then `&&`, then `!`, then a
/// single non-chaining comparison.
pub fn parse_expr(c: &mut Cursor) -> Result<Expr, String> {
    let mut lhs = and_expr(c)?;
    while c.eat(&Tok::OrOr) {
        lhs = Expr::or(lhs, and_expr(c)?);
    }
    Ok(lhs)
}

fn and_expr(c: &mut Cursor) -> Result<Expr, String> {
    let mut lhs = not_expr(c)?;
    while c.eat(&Tok::AndAnd) {
        lhs = Expr::and(lhs, not_expr(c)?);
    }
    Ok(lhs)
}

fn not_expr(c: &mut Cursor) -> Result<Expr, String> {
    if c.eat(&Tok::Bang) {
        return Ok(Expr::not(not_expr(c)?));
    }
    cmp_expr(c)
}

fn cmp_op(t: Option<&Tok>) -> Option<CmpOp> {
    Some(match t? {
        Tok::Lt => CmpOp::Lt,
        Tok::Le => CmpOp::Le,
        Tok::Gt => CmpOp::Gt,
        Tok::Ge => CmpOp::Ge,
        Tok::Eq => CmpOp::Eq,
        Tok::Ne => CmpOp::Ne,
        _ => return None,
    })
}

fn cmp_expr(c: &mut Cursor) -> Result<Expr, String> {
    let lhs = atom(c)?;
    let Some(op) = cmp_op(c.peek()) else {
        return Ok(lhs);
    };
    c.bump();
    let rhs = atom(c)?;
    if cmp_op(c.peek()).is_some() {
        return Err("comparisons do not chain; add parentheses".into());
    }
    Ok(Expr::compare(op, lhs, rhs))
}

fn atom(c: &mut Cursor) -> Result<Expr, String> {
    match c.peek() {
        Some(Tok::LParen) => {
            c.bump();
            let first = parse_expr(c)?;
            if c.eat(&Tok::Comma) {
                let x = match first {
                    Expr::Literal(ContextValue::Int(i)) => i as f64,
                    Expr::Literal(ContextValue::Float(x)) => x,
                    _ => return Err("vector components must be numeric literals".into()),
                };
                let y = c.number()?;
                c.expect(&Tok::Comma)?;
                let z = c.number()?;
                c.expect(&Tok::RParen)?;
                return Ok(Expr::Literal(ContextValue::Vec3(Vec3::new(x, y, z))));
            }
            c.expect(&Tok::RParen)?;
            Ok(first)
        }
        Some(Tok::Ident(name)) if name == "dist" => {
            c.bump();
            c.expect(&Tok::LParen)?;
            let a = parse_expr(c)?;
            c.expect(&Tok::Comma)?;
            let b = parse_expr(c)?;
            c.expect(&Tok::RParen)?;
            Ok(Expr::dist(a, b))
        }
        Some(Tok::Ident(name)) if name == "scene" => {
            c.bump();
            c.expect(&Tok::Dot)?;
            let element = c.ident("element id")?;
            c.expect(&Tok::Dot)?;
            let prop = c.ident("property")?;
            let property = Property::parse(&prop).ok_or_else(|| format!("unknown property `{}`", prop))?;
            Ok(Expr::scene(&element, property))
        }
        Some(Tok::Ident(name)) if matches!(name.as_str(), "env" | "user" | "platform") => {
            Ok(Expr::Feature(c.feature()?))
        }
        Some(Tok::Ident(name)) if name != "true" && name != "false" => Err(format!("unknown identifier `{}`", name)),
        _ => {
            let v = c.literal()?;
            v.check().map_err(String::from)?;
            Ok(Expr::Literal(v))
        }
    }
}

// ---- actions

enum Arg {
    Path(Vec<String>),
    Lit(ContextValue),
}

fn arg(c: &mut Cursor) -> Result<Arg, String> {
    match c.peek() {
        Some(Tok::Ident(s)) if s != "true" && s != "false" => {
            let mut path = vec![c.ident("argument")?];
            while c.eat(&Tok::Dot) {
                path.push(c.ident("name")?);
            }
            Ok(Arg::Path(path))
        }
        _ => Ok(Arg::Lit(c.literal()?)),
    }
}

fn action(c: &mut Cursor) -> Result<Action, LineError> {
    let name = c.ident("effector")?;
    if !EFFECTORS.contains(&name.as_str()) {
        return Err(LineError::Effector(name));
    }
    c.expect(&Tok::LParen)?;
    let mut args = Vec::new();
    if !c.eat(&Tok::RParen) {
        args.push(arg(c)?);
        while c.eat(&Tok::Comma) {
            args.push(arg(c)?);
        }
        c.expect(&Tok::RParen)?;
    }
    typed_action(&name, args).map_err(LineError::Type)
}

fn element(a: &Arg) -> Result<String, String> {
    match a {
        Arg::Path(p) if p.len() == 1 => Ok(p[0].clone()),
        _ => Err("expected element id".into()),
    }
}

fn word(a: &Arg) -> Option<&str> {
    match a {
        Arg::Path(p) if p.len() == 1 => Some(&p[0]),
        _ => None,
    }
}

fn typed_action(name: &str, args: Vec<Arg>) -> Result<Action, String> {
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!("{} takes {} argument(s), got {}", name, n, args.len()))
        }
    };
    let boolean = |a: &Arg| match a {
        Arg::Lit(ContextValue::Bool(b)) => Ok(*b),
        _ => Err(format!("{} expects a bool", name)),
    };
    Ok(match name {
        "set_visible" | "set_billboard" => {
            arity(2)?;
            let element = element(&args[0])?;
            let value = boolean(&args[1])?;
            if name == "set_visible" {
                Action::SetVisible { element, value }
            } else {
                Action::SetBillboard { element, value }
            }
        }
        "set_text" => {
            arity(2)?;
            match &args[1] {
                Arg::Lit(ContextValue::Text(s)) => Action::SetText {
                    element: element(&args[0])?,
                    value: s.clone(),
                },
                _ => return Err("set_text expects a string".into()),
            }
        }
        "set_text_size" => {
            arity(2)?;
            let value = match &args[1] {
                Arg::Lit(ContextValue::Int(i)) => *i as f64,
                Arg::Lit(ContextValue::Float(x)) => *x,
                _ => return Err("set_text_size expects a number".into()),
            };
            if !(value > 0.0 && value.is_finite()) {
                return Err("text size must be positive".into());
            }
            Action::SetTextSize {
                element: element(&args[0])?,
                value,
            }
        }
        "set_detail" => {
            arity(2)?;
            let value = word(&args[1])
                .and_then(DetailLevel::parse)
                .ok_or("set_detail expects `full` or `reduced`")?;
            Action::SetDetail {
                element: element(&args[0])?,
                value,
            }
        }
        "set_modality" => {
            if args.len() < 2 {
                return Err("set_modality takes an element and at least one modality".into());
            }
            let mut mods = Vec::new();
            for a in &args[1..] {
                let m = word(a)
                    .and_then(Modality::parse)
                    .ok_or("modality must be `visual`, `audio` or `voice_input`")?;
                mods.push(m);
            }
            Action::SetModality {
                element: element(&args[0])?,
                value: ModalitySet::new(mods).expect("non-empty"),
            }
        }
        "highlight" => {
            arity(4)?;
            let mut rgb = [0u8; 3];
            for (slot, a) in rgb.iter_mut().zip(&args[1..]) {
                *slot = match a {
                    Arg::Lit(ContextValue::Int(i)) => {
                        u8::try_from(*i).map_err(|_| "color components must be 0..=255".to_string())?
                    }
                    _ => return Err("highlight expects integer color components".into()),
                };
            }
            Action::Highlight {
                element: element(&args[0])?,
                color: Color::new(rgb[0], rgb[1], rgb[2]),
            }
        }
        "clear_highlight" => {
            arity(1)?;
            Action::ClearHighlight {
                element: element(&args[0])?,
            }
        }
        "set_feature" => {
            arity(2)?;
            let feature = match &args[0] {
                Arg::Path(p) if p.len() == 2 => {
                    FeatureId::parse(&format!("{}.{}", p[0], p[1])).map_err(|e| e.to_string())?
                }
                _ => return Err("set_feature expects a feature id".into()),
            };
            let value = match &args[1] {
                Arg::Lit(v) => v.clone(),
                _ => return Err("set_feature expects a literal value".into()),
            };
            value.check().map_err(String::from)?;
            Action::SetFeature { feature, value }
        }
        other => return Err(format!("unhandled effector `{}`", other)),
    })
}

/// Canonical text: conditions, a blank line, then rules. Comments are not
/// kept. Parsing the output yields an equal rule set.
pub fn pretty_print(rules: &RuleSet) -> String {
    let mut out = String::new();
    for c in rules.conditions() {
        let _ = writeln!(out, "condition {}: {}", c.id, c.expr);
    }
    if !rules.conditions().is_empty() && !rules.rules().is_empty() {
        out.push('\n');
    }
    for r in rules.rules() {
        let _ = write!(out, "rule {}", r.id);
        if r.priority != 0 {
            let _ = write!(out, " priority {}", r.priority);
        }
        let actions: Vec<String> = r.actions.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(
            out,
            " when {} do {} category {}",
            r.conditions.join(", "),
            actions.join("; "),
            r.category.name()
        );
    }
    out
}
