use std::collections::BTreeSet;

/// A signal value at one tick.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Value {
    /// Signal not defined at this tick (e.g. an agent not yet in the world).
    Null,
    Bool(bool),
    Num(f64),
    /// Planar pose; heading in degrees, normalized into (-180, 180].
    Pose { x: f64, y: f64, theta_deg: f64 },
    /// Set of message ids.
    Set(BTreeSet<u64>),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<f64> for Value {
    fn from(n: f64) -> Self {
        Value::Num(n)
    }
}
