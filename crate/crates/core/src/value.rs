//! Typed values carried by context features, scene properties and expressions.

use alloc::string::String;
use core::fmt;

/// A point or direction in scene space, in meters. `y` is the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component-wise bit equality; distinguishes `0.0` from `-0.0`.
    pub fn bits_eq(&self, other: &Vec3) -> bool {
        self.x.to_bits() == other.x.to_bits()
            && self.y.to_bits() == other.y.to_bits()
            && self.z.to_bits() == other.z.to_bits()
    }

    pub fn sub(&self, other: &Vec3) -> Vec3 {
        Vec3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", Fixed6(self.x), Fixed6(self.y), Fixed6(self.z))
    }
}

/// Renders a float with exactly six decimals (ties to even on the exact
/// binary value). Negative zero prints as `0.000000`.
#[derive(Debug, Clone, Copy)]
pub struct Fixed6(pub f64);

impl fmt::Display for Fixed6 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = if self.0 == 0.0 { 0.0 } else { self.0 };
        write!(f, "{:.6}", v)
    }
}

/// Writes `s` as a double-quoted literal, escaping `"` and `\`.
pub fn write_quoted(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    f.write_str("\"")?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            c => write!(f, "{}", c)?,
        }
    }
    f.write_str("\"")
}

/// Value type tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueType {
    Bool,
    Int,
    Float,
    Text,
    Vec3,
}

impl ValueType {
    pub fn name(self) -> &'static str {
        match self {
            ValueType::Bool => "bool",
            ValueType::Int => "int",
            ValueType::Float => "float",
            ValueType::Text => "text",
            ValueType::Vec3 => "vec3",
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, ValueType::Int | ValueType::Float)
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A context feature value.
///
/// Floats and vector components must be finite and text must not contain
/// line breaks; [`ContextValue::check`] enforces both.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    Vec3(Vec3),
}

impl ContextValue {
    pub fn value_type(&self) -> ValueType {
        match self {
            ContextValue::Bool(_) => ValueType::Bool,
            ContextValue::Int(_) => ValueType::Int,
            ContextValue::Float(_) => ValueType::Float,
            ContextValue::Text(_) => ValueType::Text,
            ContextValue::Vec3(_) => ValueType::Vec3,
        }
    }

    /// Exact equality for bool/int/text, bitwise for floats.
    pub fn same_as(&self, other: &ContextValue) -> bool {
        match (self, other) {
            (ContextValue::Bool(a), ContextValue::Bool(b)) => a == b,
            (ContextValue::Int(a), ContextValue::Int(b)) => a == b,
            (ContextValue::Float(a), ContextValue::Float(b)) => a.to_bits() == b.to_bits(),
            (ContextValue::Text(a), ContextValue::Text(b)) => a == b,
            (ContextValue::Vec3(a), ContextValue::Vec3(b)) => a.bits_eq(b),
            _ => false,
        }
    }

    /// Returns a short reason when the value violates the value invariants.
    pub fn check(&self) -> Result<(), &'static str> {
        match self {
            ContextValue::Float(v) if !v.is_finite() => Err("float must be finite"),
            ContextValue::Vec3(v) if !v.is_finite() => Err("vector components must be finite"),
            ContextValue::Text(s) if s.contains(['\n', '\r']) => Err("text must not contain line breaks"),
            _ => Ok(()),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            ContextValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_vec3(&self) -> Option<Vec3> {
        match self {
            ContextValue::Vec3(v) => Some(*v),
            _ => None,
        }
    }

    /// Numeric view used for mixed int/float comparisons.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ContextValue::Int(i) => Some(*i as f64),
            ContextValue::Float(x) => Some(*x),
            _ => None,
        }
    }
}

/// Trace/state rendering: floats with six decimals, text quoted.
impl fmt::Display for ContextValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextValue::Bool(b) => write!(f, "{}", b),
            ContextValue::Int(i) => write!(f, "{}", i),
            ContextValue::Float(x) => write!(f, "{}", Fixed6(*x)),
            ContextValue::Text(s) => write_quoted(f, s),
            ContextValue::Vec3(v) => write!(f, "{}", v),
        }
    }
}

/// Source rendering of a literal: floats use the shortest representation
/// that reads back to the same value.
#[derive(Debug, Clone, Copy)]
pub struct SourceLiteral<'a>(pub &'a ContextValue);

impl fmt::Display for SourceLiteral<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            ContextValue::Float(x) => write!(f, "{}", ShortFloat(*x)),
            ContextValue::Vec3(v) => write!(f, "({}, {}, {})", ShortFloat(v.x), ShortFloat(v.y), ShortFloat(v.z)),
            other => write!(f, "{}", other),
        }
    }
}

/// Shortest round-trip float text, always containing `.` or an exponent.
#[derive(Debug, Clone, Copy)]
pub struct ShortFloat(pub f64);

impl fmt::Display for ShortFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}
