//! Condition expressions: a small, statically checked boolean language over
//! context features and scene properties.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

use crate::context::{ContextError, ContextStore, FeatureId};
use crate::scene::{distance, PropValue, Property, SceneModel};
use crate::value::{ContextValue, SourceLiteral, ValueType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub const ALL: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne];

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }

    fn is_ordering(self) -> bool {
        !matches!(self, CmpOp::Eq | CmpOp::Ne)
    }

    fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(ContextValue),
    Feature(FeatureId),
    SceneRef { element: String, property: Property },
    Compare { op: CmpOp, lhs: Box<Expr>, rhs: Box<Expr> },
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Dist(Box<Expr>, Box<Expr>),
}

/// Static type of an expression. Feature references are `Any` until
/// evaluation, since feature types are fixed by the first write at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExprType {
    Known(ValueType),
    Any,
}

impl ExprType {
    fn accepts(self, t: ValueType) -> bool {
        match self {
            ExprType::Known(k) => k == t,
            ExprType::Any => true,
        }
    }

    fn numeric_or_any(self) -> bool {
        match self {
            ExprType::Known(k) => k.is_numeric(),
            ExprType::Any => true,
        }
    }
}

impl fmt::Display for ExprType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprType::Known(t) => write!(f, "{}", t),
            ExprType::Any => f.write_str("any"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct TypeError(pub String);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown feature {0}")]
    UnknownFeature(FeatureId),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

/// Type of a scene property when read inside an expression. Detail levels
/// read as text (`"full"`/`"reduced"`).
pub fn readable_type(property: Property) -> Option<ValueType> {
    match property {
        Property::Position => Some(ValueType::Vec3),
        Property::Yaw | Property::TextSize => Some(ValueType::Float),
        Property::Visible | Property::Billboard => Some(ValueType::Bool),
        Property::Text | Property::Detail => Some(ValueType::Text),
        Property::Modality | Property::Highlight => None,
    }
}

impl Expr {
    pub fn compare(op: CmpOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Compare {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn and(lhs: Expr, rhs: Expr) -> Expr {
        Expr::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Expr, rhs: Expr) -> Expr {
        Expr::Or(Box::new(lhs), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Expr) -> Expr {
        Expr::Not(Box::new(inner))
    }

    pub fn dist(a: Expr, b: Expr) -> Expr {
        Expr::Dist(Box::new(a), Box::new(b))
    }

    pub fn feature(id: FeatureId) -> Expr {
        Expr::Feature(id)
    }

    pub fn scene(element: &str, property: Property) -> Expr {
        Expr::SceneRef {
            element: element.to_string(),
            property,
        }
    }

    pub fn type_of(&self) -> Result<ExprType, TypeError> {
        match self {
            Expr::Literal(v) => Ok(ExprType::Known(v.value_type())),
            Expr::Feature(_) => Ok(ExprType::Any),
            Expr::SceneRef { element, property } => readable_type(*property).map(ExprType::Known).ok_or_else(|| {
                TypeError(alloc::format!(
                    "scene.{}.{} cannot be read in an expression",
                    element,
                    property
                ))
            }),
            Expr::Compare { op, lhs, rhs } => {
                let (l, r) = (lhs.type_of()?, rhs.type_of()?);
                let ok = if op.is_ordering() {
                    l.numeric_or_any() && r.numeric_or_any()
                } else {
                    match (l, r) {
                        (ExprType::Known(a), ExprType::Known(b)) => a == b || (a.is_numeric() && b.is_numeric()),
                        _ => true,
                    }
                };
                if ok {
                    Ok(ExprType::Known(ValueType::Bool))
                } else {
                    Err(TypeError(alloc::format!("cannot compare {} {} {}", l, op.symbol(), r)))
                }
            }
            Expr::And(a, b) | Expr::Or(a, b) => {
                for side in [a, b] {
                    let t = side.type_of()?;
                    if !t.accepts(ValueType::Bool) {
                        return Err(TypeError(alloc::format!("boolean operator applied to {}", t)));
                    }
                }
                Ok(ExprType::Known(ValueType::Bool))
            }
            Expr::Not(a) => {
                let t = a.type_of()?;
                if !t.accepts(ValueType::Bool) {
                    return Err(TypeError(alloc::format!("`!` applied to {}", t)));
                }
                Ok(ExprType::Known(ValueType::Bool))
            }
            Expr::Dist(a, b) => {
                for side in [a, b] {
                    let t = side.type_of()?;
                    if !t.accepts(ValueType::Vec3) {
                        return Err(TypeError(alloc::format!("dist expects two vec3 arguments, got {}", t)));
                    }
                }
                Ok(ExprType::Known(ValueType::Float))
            }
        }
    }

    /// Checks that the expression can serve as a condition.
    pub fn check_condition(&self) -> Result<(), TypeError> {
        let t = self.type_of()?;
        if t.accepts(ValueType::Bool) {
            Ok(())
        } else {
            Err(TypeError(alloc::format!("condition must be bool, found {}", t)))
        }
    }

    /// Evaluates without touching the store or the scene. Both operands of
    /// `&&`/`||` are always evaluated so missing inputs surface regardless
    /// of the other side.
    pub fn eval(&self, store: &ContextStore, scene: &SceneModel) -> Result<ContextValue, EvalError> {
        match self {
            Expr::Literal(v) => Ok(v.clone()),
            Expr::Feature(id) => store.get_feature(id).cloned().map_err(|e| match e {
                ContextError::UnknownFeature(id) => EvalError::UnknownFeature(id),
                other => EvalError::TypeMismatch(other.to_string()),
            }),
            Expr::SceneRef { element, property } => {
                let el = scene
                    .get(element)
                    .ok_or_else(|| EvalError::UnknownElement(element.clone()))?;
                match el.read(*property) {
                    PropValue::Bool(b) => Ok(ContextValue::Bool(b)),
                    PropValue::Float(x) => Ok(ContextValue::Float(x)),
                    PropValue::Text(s) => Ok(ContextValue::Text(s)),
                    PropValue::Vec3(v) => Ok(ContextValue::Vec3(v)),
                    PropValue::Detail(d) => Ok(ContextValue::Text(d.name().to_string())),
                    other => Err(EvalError::TypeMismatch(alloc::format!(
                        "{} value {} is not readable",
                        property,
                        other
                    ))),
                }
            }
            Expr::Compare { op, lhs, rhs } => {
                let l = lhs.eval(store, scene)?;
                let r = rhs.eval(store, scene)?;
                compare_values(*op, &l, &r).map(ContextValue::Bool)
            }
            Expr::And(a, b) => {
                let (l, r) = (eval_bool(a, store, scene)?, eval_bool(b, store, scene)?);
                Ok(ContextValue::Bool(l && r))
            }
            Expr::Or(a, b) => {
                let (l, r) = (eval_bool(a, store, scene)?, eval_bool(b, store, scene)?);
                Ok(ContextValue::Bool(l || r))
            }
            Expr::Not(a) => Ok(ContextValue::Bool(!eval_bool(a, store, scene)?)),
            Expr::Dist(a, b) => {
                let va = eval_vec3(a, store, scene)?;
                let vb = eval_vec3(b, store, scene)?;
                Ok(ContextValue::Float(distance(va, vb)))
            }
        }
    }

    /// Evaluates a condition root, which must produce a bool.
    pub fn eval_condition(&self, store: &ContextStore, scene: &SceneModel) -> Result<bool, EvalError> {
        eval_bool(self, store, scene)
    }

    /// Visits every node, parents before children.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        match self {
            Expr::Compare { lhs, rhs, .. } => {
                lhs.walk(visit);
                rhs.walk(visit);
            }
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Dist(a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            Expr::Not(a) => a.walk(visit),
            Expr::Literal(_) | Expr::Feature(_) | Expr::SceneRef { .. } => {}
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(_) => 3,
            Expr::Compare { .. } => 4,
            _ => 5,
        }
    }
}

fn eval_bool(e: &Expr, store: &ContextStore, scene: &SceneModel) -> Result<bool, EvalError> {
    match e.eval(store, scene)? {
        ContextValue::Bool(b) => Ok(b),
        other => Err(EvalError::TypeMismatch(alloc::format!(
            "expected bool, found {}",
            other.value_type()
        ))),
    }
}

fn eval_vec3(e: &Expr, store: &ContextStore, scene: &SceneModel) -> Result<crate::value::Vec3, EvalError> {
    match e.eval(store, scene)? {
        ContextValue::Vec3(v) => Ok(v),
        other => Err(EvalError::TypeMismatch(alloc::format!(
            "dist expects vec3, found {}",
            other.value_type()
        ))),
    }
}

fn compare_values(op: CmpOp, l: &ContextValue, r: &ContextValue) -> Result<bool, EvalError> {
    let mismatch = || {
        EvalError::TypeMismatch(alloc::format!(
            "cannot compare {} {} {}",
            l.value_type(),
            op.symbol(),
            r.value_type()
        ))
    };
    let ord = match (l, r) {
        (ContextValue::Int(a), ContextValue::Int(b)) => a.cmp(b),
        (a, b) if a.value_type().is_numeric() && b.value_type().is_numeric() => {
            let (x, y) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            x.partial_cmp(&y).ok_or_else(mismatch)?
        }
        _ if op.is_ordering() => return Err(mismatch()),
        (ContextValue::Bool(a), ContextValue::Bool(b)) => eq_ord(a == b),
        (ContextValue::Text(a), ContextValue::Text(b)) => eq_ord(a == b),
        (ContextValue::Vec3(a), ContextValue::Vec3(b)) => eq_ord(a == b),
        _ => return Err(mismatch()),
    };
    Ok(op.holds(ord))
}

fn eq_ord(equal: bool) -> Ordering {
    if equal {
        Ordering::Equal
    } else {
        Ordering::Less
    }
}

/// Canonical source form with the minimum parentheses needed to parse back
/// to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = self.precedence();
        let child = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({})", e)
            } else {
                write!(f, "{}", e)
            }
        };
        match self {
            Expr::Literal(v) => write!(f, "{}", SourceLiteral(v)),
            Expr::Feature(id) => write!(f, "{}", id),
            Expr::SceneRef { element, property } => write!(f, "scene.{}.{}", element, property),
            Expr::Compare { op, lhs, rhs } => {
                child(f, lhs, prec + 1)?;
                write!(f, " {} ", op.symbol())?;
                child(f, rhs, prec + 1)
            }
            Expr::And(a, b) | Expr::Or(a, b) => {
                let sym = if matches!(self, Expr::And(..)) { "&&" } else { "||" };
                child(f, a, prec)?;
                write!(f, " {} ", sym)?;
                child(f, b, prec + 1)
            }
            Expr::Not(a) => {
                f.write_str("!")?;
                child(f, a, prec)
            }
            Expr::Dist(a, b) => write!(f, "dist({}, {})", a, b),
        }
    }
}
