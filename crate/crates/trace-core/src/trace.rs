use std::collections::{BTreeMap, BTreeSet};

use crate::{TraceError, Value};

/// Static description of a message observed on some channel, kept alongside
/// the signals so predicates can resolve ids back to payloads and customers.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MessageInfo {
    pub id: u64,
    pub channel: String,
    pub customer: String,
    /// Short payload label, e.g. "Park", "Accepted", "PosePair", "Path".
    pub kind: String,
    /// Full payload as recorded in the trace file.
    pub payload: serde_json::Value,
    pub sent_tick: usize,
}

/// Time-indexed data of one signal.
///
/// Set-valued signals produced by lossless channels only ever grow, so they
/// are stored as (id -> first tick of membership). Hand-built traces (e.g.
/// mutation tests) may need sets that shrink; those use the explicit form.
#[derive(Debug, Clone, PartialEq)]
pub enum SignalData {
    Values(Vec<Value>),
    /// Monotone set signal: member from `added[id]` onward.
    PersistentSet(BTreeMap<u64, usize>),
    /// One explicit set per tick.
    ExplicitSets(Vec<BTreeSet<u64>>),
}

impl SignalData {
    fn len(&self, horizon: usize) -> usize {
        match self {
            SignalData::Values(v) => v.len(),
            SignalData::PersistentSet(_) => horizon,
            SignalData::ExplicitSets(v) => v.len(),
        }
    }
}

/// A finite, discretely sampled behavior: every signal has exactly `horizon`
/// entries, one per tick of length `dt` seconds.
#[derive(Debug, Clone)]
pub struct Trace {
    horizon: usize,
    dt: f64,
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    data: Vec<SignalData>,
    messages: Vec<MessageInfo>,
}

impl Trace {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn signal_names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(|s| s.as_str())
    }

    pub fn has_signal(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn messages(&self) -> &[MessageInfo] {
        &self.messages
    }

    pub fn message(&self, id: u64) -> Option<&MessageInfo> {
        self.messages.iter().find(|m| m.id == id)
    }

    /// Resolve a signal name to a dense index for hot loops.
    pub fn signal_index(&self, name: &str) -> Result<usize, TraceError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| TraceError::UnknownSignal(name.to_string()))
    }

    fn check_tick(&self, tick: usize) -> Result<(), TraceError> {
        if tick >= self.horizon {
            return Err(TraceError::TickOutOfRange {
                tick,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    pub fn value_at(&self, name: &str, tick: usize) -> Result<Value, TraceError> {
        let idx = self.signal_index(name)?;
        self.value_at_index(idx, tick)
    }

    pub fn value_at_index(&self, idx: usize, tick: usize) -> Result<Value, TraceError> {
        self.check_tick(tick)?;
        match &self.data[idx] {
            SignalData::Values(v) => Ok(v[tick].clone()),
            SignalData::PersistentSet(added) => Ok(Value::Set(
                added
                    .iter()
                    .filter(|(_, &t0)| t0 <= tick)
                    .map(|(&id, _)| id)
                    .collect(),
            )),
            SignalData::ExplicitSets(v) => Ok(Value::Set(v[tick].clone())),
        }
    }

    pub fn bool_at(&self, name: &str, tick: usize) -> Result<bool, TraceError> {
        match self.value_at(name, tick)? {
            Value::Bool(b) => Ok(b),
            _ => Err(TraceError::WrongKind {
                signal: name.to_string(),
                expected: "bool",
                tick,
            }),
        }
    }

    /// Fast boolean access by pre-resolved index (used by enumeration oracles).
    pub fn bool_at_index(&self, idx: usize, tick: usize) -> bool {
        match &self.data[idx] {
            SignalData::Values(v) => matches!(v[tick], Value::Bool(true)),
            _ => false,
        }
    }

    pub fn num_at(&self, name: &str, tick: usize) -> Result<f64, TraceError> {
        match self.value_at(name, tick)? {
            Value::Num(n) => Ok(n),
            _ => Err(TraceError::WrongKind {
                signal: name.to_string(),
                expected: "num",
                tick,
            }),
        }
    }

    /// Numeric value, or None when the signal is Null at this tick.
    pub fn num_or_null_at(&self, name: &str, tick: usize) -> Result<Option<f64>, TraceError> {
        match self.value_at(name, tick)? {
            Value::Num(n) => Ok(Some(n)),
            Value::Null => Ok(None),
            _ => Err(TraceError::WrongKind {
                signal: name.to_string(),
                expected: "num|null",
                tick,
            }),
        }
    }

    /// Membership of one id in a set-valued signal at a tick, without
    /// materializing the whole set.
    pub fn set_contains(&self, name: &str, id: u64, tick: usize) -> Result<bool, TraceError> {
        let idx = self.signal_index(name)?;
        self.check_tick(tick)?;
        match &self.data[idx] {
            SignalData::PersistentSet(added) => Ok(added.get(&id).is_some_and(|&t0| t0 <= tick)),
            SignalData::ExplicitSets(v) => Ok(v[tick].contains(&id)),
            SignalData::Values(_) => Err(TraceError::NotSetValued(name.to_string())),
        }
    }

    pub fn set_at(&self, name: &str, tick: usize) -> Result<BTreeSet<u64>, TraceError> {
        let idx = self.signal_index(name)?;
        self.check_tick(tick)?;
        match &self.data[idx] {
            SignalData::PersistentSet(added) => Ok(added
                .iter()
                .filter(|(_, &t0)| t0 <= tick)
                .map(|(&id, _)| id)
                .collect()),
            SignalData::ExplicitSets(v) => Ok(v[tick].clone()),
            SignalData::Values(_) => Err(TraceError::NotSetValued(name.to_string())),
        }
    }

    /// All ids that are ever members of a set-valued signal.
    pub fn set_universe(&self, name: &str) -> Result<BTreeSet<u64>, TraceError> {
        let idx = self.signal_index(name)?;
        match &self.data[idx] {
            SignalData::PersistentSet(added) => Ok(added.keys().copied().collect()),
            SignalData::ExplicitSets(v) => {
                Ok(v.iter().flat_map(|s| s.iter().copied()).collect())
            }
            SignalData::Values(_) => Err(TraceError::NotSetValued(name.to_string())),
        }
    }

    /// First tick at which `id` is a member, if ever.
    pub fn first_membership(&self, name: &str, id: u64) -> Result<Option<usize>, TraceError> {
        let idx = self.signal_index(name)?;
        match &self.data[idx] {
            SignalData::PersistentSet(added) => Ok(added.get(&id).copied()),
            SignalData::ExplicitSets(v) => Ok(v.iter().position(|s| s.contains(&id))),
            SignalData::Values(_) => Err(TraceError::NotSetValued(name.to_string())),
        }
    }

    pub(crate) fn raw(&self, name: &str) -> Result<&SignalData, TraceError> {
        Ok(&self.data[self.signal_index(name)?])
    }

    /// In-place overwrite used by trace mutation helpers in tests and by the
    /// enumeration scratch buffer. The signal must already exist.
    pub fn overwrite_signal(&mut self, name: &str, data: SignalData) -> Result<(), TraceError> {
        let idx = self.signal_index(name)?;
        if data.len(self.horizon) != self.horizon {
            return Err(TraceError::Invalid(format!(
                "signal `{name}` must have exactly {} entries",
                self.horizon
            )));
        }
        self.data[idx] = data;
        Ok(())
    }

    pub fn set_bool_at(&mut self, name: &str, tick: usize, v: bool) -> Result<(), TraceError> {
        let idx = self.signal_index(name)?;
        self.check_tick(tick)?;
        match &mut self.data[idx] {
            SignalData::Values(vals) => {
                vals[tick] = Value::Bool(v);
                Ok(())
            }
            _ => Err(TraceError::WrongKind {
                signal: name.to_string(),
                expected: "bool",
                tick,
            }),
        }
    }
}

/// Incremental construction of a [`Trace`]. Signals may be registered lazily;
/// ticks missing a value are backfilled with the signal's registered default.
pub struct TraceBuilder {
    dt: f64,
    ticks: usize,
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    data: Vec<SignalData>,
    defaults: Vec<Value>,
    messages: Vec<MessageInfo>,
}

impl TraceBuilder {
    pub fn new(dt: f64) -> Self {
        assert!(dt > 0.0, "dt must be positive");
        TraceBuilder {
            dt,
            ticks: 0,
            names: Vec::new(),
            index: BTreeMap::new(),
            data: Vec::new(),
            defaults: Vec::new(),
            messages: Vec::new(),
        }
    }

    fn signal_slot(&mut self, name: &str, default: Value) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        // Backfill ticks recorded before this signal appeared.
        self.data
            .push(SignalData::Values(vec![default.clone(); self.ticks]));
        self.defaults.push(default);
        i
    }

    /// Register a persistent (monotone) set signal.
    pub fn declare_persistent_set(&mut self, name: &str) {
        if self.index.contains_key(name) {
            return;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.data.push(SignalData::PersistentSet(BTreeMap::new()));
        self.defaults.push(Value::Null);
    }

    /// Record `id` as entering the persistent set `name` at the current tick.
    pub fn add_set_member(&mut self, name: &str, id: u64) {
        self.declare_persistent_set(name);
        let idx = self.index[name];
        if let SignalData::PersistentSet(added) = &mut self.data[idx] {
            added.entry(id).or_insert(self.ticks);
        } else {
            panic!("signal `{name}` is not a persistent set");
        }
    }

    /// Record a plain value for the current tick. The default backfills
    /// earlier ticks and later gaps.
    pub fn set(&mut self, name: &str, value: Value) {
        self.set_with_default(name, value, Value::Null)
    }

    pub fn set_with_default(&mut self, name: &str, value: Value, default: Value) {
        let idx = self.signal_slot(name, default);
        match &mut self.data[idx] {
            SignalData::Values(vals) => {
                debug_assert_eq!(vals.len(), self.ticks, "one value per signal per tick");
                vals.push(value);
            }
            _ => panic!("signal `{name}` is set-valued"),
        }
    }

    pub fn push_message(&mut self, info: MessageInfo) {
        self.messages.push(info);
    }

    /// Close the current tick: pad every value signal that was not written.
    pub fn end_tick(&mut self) {
        self.ticks += 1;
        for (i, d) in self.data.iter_mut().enumerate() {
            if let SignalData::Values(vals) = d {
                while vals.len() < self.ticks {
                    vals.push(self.defaults[i].clone());
                }
            }
        }
    }

    pub fn ticks(&self) -> usize {
        self.ticks
    }

    pub fn finish(self) -> Result<Trace, TraceError> {
        if self.ticks == 0 {
            return Err(TraceError::Invalid("trace has zero ticks".into()));
        }
        for (i, d) in self.data.iter().enumerate() {
            if d.len(self.ticks) != self.ticks {
                return Err(TraceError::Invalid(format!(
                    "signal `{}` has {} entries, expected {}",
                    self.names[i],
                    d.len(self.ticks),
                    self.ticks
                )));
            }
        }
        Ok(Trace {
            horizon: self.ticks,
            dt: self.dt,
            names: self.names,
            index: self.index,
            data: self.data,
            messages: self.messages,
        })
    }
}

/// Convenience constructor for tests and enumeration: boolean signals given
/// as full per-tick vectors.
pub fn trace_from_bools(dt: f64, signals: &[(&str, Vec<bool>)]) -> Trace {
    let horizon = signals.first().map(|(_, v)| v.len()).unwrap_or(0);
    let mut b = TraceBuilder::new(dt);
    for t in 0..horizon {
        for (name, vals) in signals {
            b.set(name, Value::Bool(vals[t]));
        }
        b.end_tick();
    }
    b.finish().expect("well-formed boolean trace")
}
