//! The managed scene: assistance elements with adaptable properties, plus
//! the geometry the adaptations need.
//!
//! Conventions: `y` is up, an element with yaw 0 faces `+z`, and yaw grows
//! toward `+x`. Billboards rotate about the vertical axis only.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use thiserror::Error;

use crate::value::{write_quoted, Fixed6, Vec3};

/// Below this horizontal distance the facing direction is undefined.
pub const FACING_EPSILON: f64 = 1e-9;

/// Rotation about the vertical axis, normalized into `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Yaw(f64);

impl Yaw {
    /// Wraps any finite angle into `[0, 2π)`; negative zero becomes zero.
    pub fn new(radians: f64) -> Self {
        let mut r = radians % TAU;
        if r < 0.0 {
            r += TAU;
        }
        if r >= TAU {
            r -= TAU;
        }
        if r == 0.0 {
            r = 0.0;
        }
        Yaw(r)
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DetailLevel {
    #[default]
    Full,
    Reduced,
}

impl DetailLevel {
    pub fn name(self) -> &'static str {
        match self {
            DetailLevel::Full => "full",
            DetailLevel::Reduced => "reduced",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(DetailLevel::Full),
            "reduced" => Some(DetailLevel::Reduced),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    Visual,
    Audio,
    VoiceInput,
}

impl Modality {
    pub const ALL: [Modality; 3] = [Modality::Visual, Modality::Audio, Modality::VoiceInput];

    pub fn name(self) -> &'static str {
        match self {
            Modality::Visual => "visual",
            Modality::Audio => "audio",
            Modality::VoiceInput => "voice_input",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Modality::ALL.into_iter().find(|m| m.name() == s)
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// Non-empty set of modalities; renders comma-separated in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModalitySet(u8);

impl ModalitySet {
    pub fn new(modalities: impl IntoIterator<Item = Modality>) -> Option<Self> {
        let bits = modalities.into_iter().fold(0u8, |acc, m| acc | m.bit());
        (bits != 0).then_some(ModalitySet(bits))
    }

    pub fn single(m: Modality) -> Self {
        ModalitySet(m.bit())
    }

    pub fn contains(self, m: Modality) -> bool {
        self.0 & m.bit() != 0
    }

    pub fn iter(self) -> impl Iterator<Item = Modality> {
        Modality::ALL.into_iter().filter(move |m| self.contains(*m))
    }
}

impl Default for ModalitySet {
    fn default() -> Self {
        ModalitySet::single(Modality::Visual)
    }
}

impl fmt::Display for ModalitySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(m.name())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Color {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Color {
    pub const GREEN: Color = Color { r: 0, g: 255, b: 0 };

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Color { r, g, b }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.r, self.g, self.b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneElement {
    pub id: String,
    pub position: Vec3,
    pub yaw: Yaw,
    pub visible: bool,
    pub text: String,
    pub text_size: f64,
    pub detail: DetailLevel,
    pub modalities: ModalitySet,
    pub highlight: Option<Color>,
    pub billboard: bool,
}

impl SceneElement {
    pub const DEFAULT_TEXT_SIZE: f64 = 14.0;

    /// An element at `position` with every other attribute at its default.
    pub fn new(id: &str, position: Vec3) -> Self {
        Self {
            id: id.to_string(),
            position,
            yaw: Yaw::default(),
            visible: true,
            text: String::new(),
            text_size: Self::DEFAULT_TEXT_SIZE,
            detail: DetailLevel::Full,
            modalities: ModalitySet::default(),
            highlight: None,
            billboard: false,
        }
    }

    pub fn read(&self, property: Property) -> PropValue {
        match property {
            Property::Position => PropValue::Vec3(self.position),
            Property::Yaw => PropValue::Float(self.yaw.radians()),
            Property::Visible => PropValue::Bool(self.visible),
            Property::Text => PropValue::Text(self.text.clone()),
            Property::TextSize => PropValue::Float(self.text_size),
            Property::Detail => PropValue::Detail(self.detail),
            Property::Modality => PropValue::Modalities(self.modalities),
            Property::Highlight => PropValue::Highlight(self.highlight),
            Property::Billboard => PropValue::Bool(self.billboard),
        }
    }

    fn store(&mut self, property: Property, value: PropValue) {
        match (property, value) {
            (Property::Position, PropValue::Vec3(v)) => self.position = v,
            (Property::Yaw, PropValue::Float(v)) => self.yaw = Yaw::new(v),
            (Property::Visible, PropValue::Bool(v)) => self.visible = v,
            (Property::Text, PropValue::Text(v)) => self.text = v,
            (Property::TextSize, PropValue::Float(v)) => self.text_size = v,
            (Property::Detail, PropValue::Detail(v)) => self.detail = v,
            (Property::Modality, PropValue::Modalities(v)) => self.modalities = v,
            (Property::Highlight, PropValue::Highlight(v)) => self.highlight = v,
            (Property::Billboard, PropValue::Bool(v)) => self.billboard = v,
            (p, v) => unreachable!("unchecked write of {:?} to {}", v, p),
        }
    }
}

/// Adaptable element properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    Position,
    Yaw,
    Visible,
    Text,
    TextSize,
    Detail,
    Modality,
    Highlight,
    Billboard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropType {
    Bool,
    Float,
    Text,
    Vec3,
    Detail,
    Modalities,
    Highlight,
}

impl Property {
    pub const ALL: [Property; 9] = [
        Property::Position,
        Property::Yaw,
        Property::Visible,
        Property::Text,
        Property::TextSize,
        Property::Detail,
        Property::Modality,
        Property::Highlight,
        Property::Billboard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Position => "position",
            Property::Yaw => "yaw",
            Property::Visible => "visible",
            Property::Text => "text",
            Property::TextSize => "text_size",
            Property::Detail => "detail",
            Property::Modality => "modality",
            Property::Highlight => "highlight",
            Property::Billboard => "billboard",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Property::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn prop_type(self) -> PropType {
        match self {
            Property::Position => PropType::Vec3,
            Property::Yaw | Property::TextSize => PropType::Float,
            Property::Visible | Property::Billboard => PropType::Bool,
            Property::Text => PropType::Text,
            Property::Detail => PropType::Detail,
            Property::Modality => PropType::Modalities,
            Property::Highlight => PropType::Highlight,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropValue {
    Bool(bool),
    Float(f64),
    Text(String),
    Vec3(Vec3),
    Detail(DetailLevel),
    Modalities(ModalitySet),
    Highlight(Option<Color>),
}

impl PropValue {
    pub fn prop_type(&self) -> PropType {
        match self {
            PropValue::Bool(_) => PropType::Bool,
            PropValue::Float(_) => PropType::Float,
            PropValue::Text(_) => PropType::Text,
            PropValue::Vec3(_) => PropType::Vec3,
            PropValue::Detail(_) => PropType::Detail,
            PropValue::Modalities(_) => PropType::Modalities,
            PropValue::Highlight(_) => PropType::Highlight,
        }
    }

    /// Bitwise for floats, structural otherwise.
    pub fn same_as(&self, other: &PropValue) -> bool {
        match (self, other) {
            (PropValue::Float(a), PropValue::Float(b)) => a.to_bits() == b.to_bits(),
            (PropValue::Vec3(a), PropValue::Vec3(b)) => a.bits_eq(b),
            (a, b) => a == b,
        }
    }
}

impl fmt::Display for PropValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropValue::Bool(b) => write!(f, "{}", b),
            PropValue::Float(x) => write!(f, "{}", Fixed6(*x)),
            PropValue::Text(s) => write_quoted(f, s),
            PropValue::Vec3(v) => write!(f, "{}", v),
            PropValue::Detail(d) => f.write_str(d.name()),
            PropValue::Modalities(m) => write!(f, "{}", m),
            PropValue::Highlight(Some(c)) => write!(f, "{}", c),
            PropValue::Highlight(None) => f.write_str("none"),
        }
    }
}

/// Who performed a write: a rule (by id) or the workflow.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Writer {
    Rule(String),
    Workflow,
}

impl fmt::Display for Writer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Writer::Rule(id) => f.write_str(id),
            Writer::Workflow => f.write_str("workflow"),
        }
    }
}

/// An applied, non-no-op property write.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyWrite {
    pub element: String,
    pub property: Property,
    pub old: PropValue,
    pub new: PropValue,
    pub writer: Writer,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("property {property} cannot hold that value type")]
    TypeMismatch { property: Property },
    #[error("invalid value for {property}: {reason}")]
    InvalidValue { property: Property, reason: &'static str },
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
}

/// Elements keyed by id; iteration is lexicographic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SceneModel {
    elements: BTreeMap<String, SceneElement>,
}

impl SceneModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, element: SceneElement) -> Result<(), SceneError> {
        if self.elements.contains_key(&element.id) {
            return Err(SceneError::DuplicateElement(element.id));
        }
        self.elements.insert(element.id.clone(), element);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&SceneElement> {
        self.elements.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.elements.contains_key(id)
    }

    pub fn elements(&self) -> impl Iterator<Item = &SceneElement> {
        self.elements.values()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn read_property(&self, element: &str, property: Property) -> Result<PropValue, SceneError> {
        self.get(element)
            .map(|e| e.read(property))
            .ok_or_else(|| SceneError::UnknownElement(element.to_string()))
    }

    /// Applies a write. Returns `None` when the value equals the current one.
    pub fn write_property(
        &mut self,
        element: &str,
        property: Property,
        value: PropValue,
        writer: &Writer,
    ) -> Result<Option<PropertyWrite>, SceneError> {
        let el = self
            .elements
            .get_mut(element)
            .ok_or_else(|| SceneError::UnknownElement(element.to_string()))?;
        if value.prop_type() != property.prop_type() {
            return Err(SceneError::TypeMismatch { property });
        }
        let value = check_prop_value(property, value)?;
        let old = el.read(property);
        if old.same_as(&value) {
            return Ok(None);
        }
        el.store(property, value.clone());
        Ok(Some(PropertyWrite {
            element: element.to_string(),
            property,
            old,
            new: value,
            writer: writer.clone(),
        }))
    }

    /// Turns every billboard element to face `user_pos`, in id order.
    /// Elements the user stands directly above or below are left alone.
    pub fn refresh_billboards(&mut self, user_pos: Vec3, writer: &Writer) -> Vec<PropertyWrite> {
        let targets: Vec<(String, Yaw)> = self
            .elements
            .values()
            .filter(|e| e.billboard)
            .filter_map(|e| face_user_yaw(e.position, user_pos).map(|y| (e.id.clone(), y)))
            .collect();
        targets
            .into_iter()
            .filter_map(|(id, yaw)| {
                self.write_property(&id, Property::Yaw, PropValue::Float(yaw.radians()), writer)
                    .expect("billboard yaw write is well-typed")
            })
            .collect()
    }
}

fn check_prop_value(property: Property, value: PropValue) -> Result<PropValue, SceneError> {
    let invalid = |reason| SceneError::InvalidValue { property, reason };
    match value {
        PropValue::Float(v) if !v.is_finite() => Err(invalid("must be finite")),
        PropValue::Float(v) if property == Property::TextSize && v <= 0.0 => Err(invalid("text size must be positive")),
        PropValue::Float(v) if property == Property::Yaw => Ok(PropValue::Float(Yaw::new(v).radians())),
        PropValue::Vec3(v) if !v.is_finite() => Err(invalid("must be finite")),
        PropValue::Text(ref s) if s.contains(['\n', '\r']) => Err(invalid("text must not contain line breaks")),
        v => Ok(v),
    }
}

/// Euclidean distance in meters.
pub fn distance(a: Vec3, b: Vec3) -> f64 {
    a.sub(&b).norm()
}

/// Yaw that turns an element at `element_pos` toward the horizontal
/// projection of `user_pos`, or `None` when the user is (almost) straight
/// above or below it.
pub fn face_user_yaw(element_pos: Vec3, user_pos: Vec3) -> Option<Yaw> {
    let dx = user_pos.x - element_pos.x;
    let dz = user_pos.z - element_pos.z;
    if libm::sqrt(dx * dx + dz * dz) < FACING_EPSILON {
        return None;
    }
    Some(Yaw::new(libm::atan2(dx, dz)))
}

/// Unit forward vector (x, z) for a yaw.
pub fn forward(yaw: Yaw) -> (f64, f64) {
    (libm::sin(yaw.radians()), libm::cos(yaw.radians()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn panel_scene() -> SceneModel {
        let mut s = SceneModel::new();
        s.insert(SceneElement::new("instruction_panel", Vec3::ZERO)).unwrap();
        s
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance(Vec3::ZERO, Vec3::new(3.0, 4.0, 0.0)), 5.0);
        let a = Vec3::new(0.3, -2.0, 7.5);
        assert_eq!(distance(a, a), 0.0);
        let d = distance(Vec3::new(1.0, 1.0, 1.0), Vec3::new(2.0, 2.0, 2.0));
        assert_eq!(format!("{}", Fixed6(d)), "1.732051");
    }

    #[test]
    fn distance_at_threshold_is_exact() {
        assert_eq!(distance(Vec3::new(0.0, 0.0, 1.2), Vec3::ZERO), 1.2);
    }

    #[test]
    fn face_user_examples() {
        assert_eq!(face_user_yaw(Vec3::ZERO, Vec3::new(0.0, 0.0, 5.0)), Some(Yaw::new(0.0)));
        assert_eq!(
            face_user_yaw(Vec3::ZERO, Vec3::new(5.0, 0.0, 0.0)),
            Some(Yaw::new(FRAC_PI_2))
        );
        assert_eq!(face_user_yaw(Vec3::ZERO, Vec3::new(0.0, 10.0, 0.0)), None);
        assert_eq!(face_user_yaw(Vec3::ZERO, Vec3::new(0.0, 0.0, -5.0)), Some(Yaw::new(PI)));
        let west = face_user_yaw(Vec3::ZERO, Vec3::new(-5.0, 0.0, 0.0)).unwrap();
        assert!((west.radians() - 3.0 * FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn yaw_normalizes_into_range() {
        assert_eq!(Yaw::new(-0.0).radians().to_bits(), 0.0f64.to_bits());
        assert_eq!(Yaw::new(TAU).radians(), 0.0);
        assert!((Yaw::new(-FRAC_PI_2).radians() - 3.0 * FRAC_PI_2).abs() < 1e-12);
        let tiny = Yaw::new(-1e-300).radians();
        assert!((0.0..TAU).contains(&tiny));
    }

    #[test]
    fn detail_write_reports_old_and_new() {
        let mut s = panel_scene();
        let w = s
            .write_property(
                "instruction_panel",
                Property::Detail,
                PropValue::Detail(DetailLevel::Reduced),
                &Writer::Rule("R".into()),
            )
            .unwrap()
            .unwrap();
        assert_eq!(w.old, PropValue::Detail(DetailLevel::Full));
        assert_eq!(w.new, PropValue::Detail(DetailLevel::Reduced));
    }

    #[test]
    fn no_op_write_is_suppressed() {
        let mut s = panel_scene();
        let w = s
            .write_property(
                "instruction_panel",
                Property::Visible,
                PropValue::Bool(true),
                &Writer::Workflow,
            )
            .unwrap();
        assert_eq!(w, None);
    }

    #[test]
    fn write_errors() {
        let mut s = panel_scene();
        assert_eq!(
            s.write_property("ghost", Property::Visible, PropValue::Bool(true), &Writer::Workflow),
            Err(SceneError::UnknownElement("ghost".into()))
        );
        assert_eq!(
            s.write_property(
                "instruction_panel",
                Property::Visible,
                PropValue::Float(1.0),
                &Writer::Workflow
            ),
            Err(SceneError::TypeMismatch {
                property: Property::Visible
            })
        );
        assert!(matches!(
            s.write_property(
                "instruction_panel",
                Property::TextSize,
                PropValue::Float(0.0),
                &Writer::Workflow
            ),
            Err(SceneError::InvalidValue { .. })
        ));
    }

    #[test]
    fn refresh_without_billboards_is_empty() {
        let mut s = panel_scene();
        assert!(s
            .refresh_billboards(Vec3::new(5.0, 0.0, 0.0), &Writer::Workflow)
            .is_empty());
    }

    #[test]
    fn refresh_turns_billboard_toward_user() {
        let mut s = panel_scene();
        let mut e = SceneElement::new("a_panel", Vec3::ZERO);
        e.billboard = true;
        s.insert(e).unwrap();
        let w = s.refresh_billboards(Vec3::new(5.0, 0.0, 0.0), &Writer::Rule("FaceUserRule".into()));
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].element, "a_panel");
        assert_eq!(w[0].old, PropValue::Float(0.0));
        assert_eq!(w[0].new, PropValue::Float(FRAC_PI_2));
        // second refresh is a no-op
        assert!(s
            .refresh_billboards(Vec3::new(5.0, 0.0, 0.0), &Writer::Workflow)
            .is_empty());
    }

    #[test]
    fn refresh_skips_user_overhead() {
        let mut s = SceneModel::new();
        let mut e = SceneElement::new("p", Vec3::new(1.0, 0.0, 1.0));
        e.billboard = true;
        s.insert(e).unwrap();
        assert!(s
            .refresh_billboards(Vec3::new(1.0, 3.0, 1.0), &Writer::Workflow)
            .is_empty());
    }

    #[test]
    fn modality_set_renders_in_canonical_order() {
        let m = ModalitySet::new([Modality::VoiceInput, Modality::Audio]).unwrap();
        assert_eq!(format!("{}", m), "audio,voice_input");
        assert!(ModalitySet::new([]).is_none());
    }

    #[test]
    fn highlight_renders() {
        assert_eq!(format!("{}", PropValue::Highlight(Some(Color::GREEN))), "(0,255,0)");
        assert_eq!(format!("{}", PropValue::Highlight(None)), "none");
    }

    #[test]
    fn duplicate_element_rejected() {
        let mut s = panel_scene();
        assert_eq!(
            s.insert(SceneElement::new("instruction_panel", Vec3::ZERO)),
            Err(SceneError::DuplicateElement("instruction_panel".into()))
        );
    }
}
