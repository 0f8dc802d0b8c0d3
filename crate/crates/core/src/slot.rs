//! Write targets shared by rule effectors, snapshots and trace lines: either
//! an element property or a context feature.

use alloc::string::String;
use core::fmt;

use crate::context::FeatureId;
use crate::scene::{PropValue, Property, PropertyWrite, Writer};
use crate::value::ContextValue;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Property { element: String, property: Property },
    Feature(FeatureId),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Property { element, property } => write!(f, "{}.{}", element, property),
            Slot::Feature(id) => write!(f, "{}", id),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SlotValue {
    Property(PropValue),
    Feature(ContextValue),
}

impl SlotValue {
    pub fn same_as(&self, other: &SlotValue) -> bool {
        match (self, other) {
            (SlotValue::Property(a), SlotValue::Property(b)) => a.same_as(b),
            (SlotValue::Feature(a), SlotValue::Feature(b)) => a.same_as(b),
            _ => false,
        }
    }
}

impl fmt::Display for SlotValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotValue::Property(v) => write!(f, "{}", v),
            SlotValue::Feature(v) => write!(f, "{}", v),
        }
    }
}

/// An applied write to any slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotWrite {
    pub slot: Slot,
    pub old: SlotValue,
    pub new: SlotValue,
    pub writer: Writer,
}

impl From<PropertyWrite> for SlotWrite {
    fn from(w: PropertyWrite) -> Self {
        SlotWrite {
            slot: Slot::Property {
                element: w.element,
                property: w.property,
            },
            old: SlotValue::Property(w.old),
            new: SlotValue::Property(w.new),
            writer: w.writer,
        }
    }
}
