use std::fmt;
use std::sync::Arc;

use crate::{Trace, TraceError};

type PointwiseFn = dyn Fn(&Trace, usize) -> Result<bool, TraceError> + Send + Sync;
type GlobalFn = dyn Fn(&Trace) -> Result<bool, TraceError> + Send + Sync;

/// A named pointwise constraint: evaluated at a (trace, tick) pair.
///
/// Evaluation must be pure — the same trace and tick always yield the same
/// boolean. Predicates are cheaply clonable and safe to evaluate from
/// multiple threads.
#[derive(Clone)]
pub struct TracePredicate {
    name: String,
    f: Arc<PointwiseFn>,
}

impl TracePredicate {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Trace, usize) -> Result<bool, TraceError> + Send + Sync + 'static,
    ) -> Self {
        TracePredicate {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// Predicate over a boolean signal's raw value.
    pub fn signal(name: &str) -> Self {
        let sig = name.to_string();
        TracePredicate::new(name, move |tr, t| tr.bool_at(&sig, t))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, tr: &Trace, tick: usize) -> Result<bool, TraceError> {
        (self.f)(tr, tick)
    }

    pub fn not(&self) -> TracePredicate {
        let inner = self.clone();
        TracePredicate::new(format!("not({})", self.name), move |tr, t| {
            Ok(!inner.eval(tr, t)?)
        })
    }

    pub fn and(&self, other: &TracePredicate) -> TracePredicate {
        let (a, b) = (self.clone(), other.clone());
        TracePredicate::new(format!("({}) and ({})", a.name, b.name), move |tr, t| {
            Ok(a.eval(tr, t)? && b.eval(tr, t)?)
        })
    }

    pub fn or(&self, other: &TracePredicate) -> TracePredicate {
        let (a, b) = (self.clone(), other.clone());
        TracePredicate::new(format!("({}) or ({})", a.name, b.name), move |tr, t| {
            Ok(a.eval(tr, t)? || b.eval(tr, t)?)
        })
    }
}

impl fmt::Debug for TracePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TracePredicate({})", self.name)
    }
}

/// A named whole-trace constraint, the form used by contracts.
#[derive(Clone)]
pub struct GlobalPredicate {
    name: String,
    f: Arc<GlobalFn>,
}

impl GlobalPredicate {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Trace) -> Result<bool, TraceError> + Send + Sync + 'static,
    ) -> Self {
        GlobalPredicate {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn constant(name: impl Into<String>, value: bool) -> Self {
        GlobalPredicate::new(name, move |_| Ok(value))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, tr: &Trace) -> Result<bool, TraceError> {
        (self.f)(tr)
    }

    pub fn not(&self) -> GlobalPredicate {
        let inner = self.clone();
        GlobalPredicate::new(format!("not({})", self.name), move |tr| {
            Ok(!inner.eval(tr)?)
        })
    }

    pub fn and(&self, other: &GlobalPredicate) -> GlobalPredicate {
        let (a, b) = (self.clone(), other.clone());
        GlobalPredicate::new(format!("({}) and ({})", a.name, b.name), move |tr| {
            Ok(a.eval(tr)? && b.eval(tr)?)
        })
    }

    pub fn or(&self, other: &GlobalPredicate) -> GlobalPredicate {
        let (a, b) = (self.clone(), other.clone());
        GlobalPredicate::new(format!("({}) or ({})", a.name, b.name), move |tr| {
            Ok(a.eval(tr)? || b.eval(tr)?)
        })
    }

    pub fn implies(&self, other: &GlobalPredicate) -> GlobalPredicate {
        let (a, b) = (self.clone(), other.clone());
        GlobalPredicate::new(format!("({}) => ({})", a.name, b.name), move |tr| {
            Ok(!a.eval(tr)? || b.eval(tr)?)
        })
    }
}

impl fmt::Debug for GlobalPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GlobalPredicate({})", self.name)
    }
}
