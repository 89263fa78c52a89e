use std::fmt;

use serde::{Serialize, Serializer};

/// An information quantity in bits that may be infinite.
///
/// Rendered as the literal token `inf` when infinite, both in `Display`
/// and in serialized output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Information {
    Finite(f64),
    Infinite,
}

impl Information {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Information::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Information::Finite(v) => Some(v),
            Information::Infinite => None,
        }
    }

    /// The value as an `f64`, mapping the infinite marker to `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for Information {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Information::Finite(v) => write!(f, "{v}"),
            Information::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Information {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Information::Finite(v) => s.serialize_f64(v),
            Information::Infinite => s.serialize_str("inf"),
        }
    }
}
