use trace_core::{trace_from_bools, Trace};

use crate::AlgebraError;

/// Exhaustive, duplicate-free generator of all traces over a finite boolean
/// signal alphabet and a fixed horizon.
///
/// Serves as the finite proxy for the set of all behaviors when deciding
/// satisfaction, refinement, and the algebraic laws. Enumeration refuses to
/// run past `max_bits` total bits; there is no silent sampling fallback.
#[derive(Clone)]
pub struct TraceUniverse {
    signals: Vec<String>,
    horizon: usize,
    dt: f64,
    max_bits: u32,
}

impl TraceUniverse {
    pub const DEFAULT_MAX_BITS: u32 = 20;

    pub fn boolean(signals: &[&str], horizon: usize) -> Self {
        TraceUniverse {
            signals: signals.iter().map(|s| s.to_string()).collect(),
            horizon,
            dt: 1.0,
            max_bits: Self::DEFAULT_MAX_BITS,
        }
    }

    /// Raise or lower the enumeration bound (total bits = signals x horizon).
    pub fn with_max_bits(mut self, max_bits: u32) -> Self {
        self.max_bits = max_bits;
        self
    }

    pub fn signals(&self) -> &[String] {
        &self.signals
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn bits(&self) -> u32 {
        (self.signals.len() * self.horizon) as u32
    }

    /// Number of traces in the universe.
    pub fn size(&self) -> Result<u64, AlgebraError> {
        let bits = self.bits();
        if bits > self.max_bits {
            return Err(AlgebraError::UniverseTooLarge {
                signals: self.signals.len(),
                horizon: self.horizon,
                bits,
                max_bits: self.max_bits,
            });
        }
        Ok(1u64 << bits)
    }

    /// Materialize the trace for one enumeration index. Bit k of `index` is
    /// signal (k / horizon) at tick (k % horizon).
    pub fn trace_at(&self, index: u64) -> Trace {
        let signals: Vec<(&str, Vec<bool>)> = self
            .signals
            .iter()
            .enumerate()
            .map(|(s, name)| {
                let vals = (0..self.horizon)
                    .map(|t| index >> (s * self.horizon + t) & 1 == 1)
                    .collect();
                (name.as_str(), vals)
            })
            .collect();
        trace_from_bools(self.dt, &signals)
    }

    /// Visit every trace exactly once.
    pub fn for_each(
        &self,
        mut f: impl FnMut(u64, &Trace) -> Result<(), AlgebraError>,
    ) -> Result<(), AlgebraError> {
        let n = self.size()?;
        let mut scratch = self.trace_at(0);
        for index in 0..n {
            self.fill(&mut scratch, index);
            f(index, &scratch)?;
        }
        Ok(())
    }

    /// Overwrite a scratch trace (created by `trace_at`) in place.
    fn fill(&self, scratch: &mut Trace, index: u64) {
        for (s, name) in self.signals.iter().enumerate() {
            for t in 0..self.horizon {
                let bit = index >> (s * self.horizon + t) & 1 == 1;
                scratch
                    .set_bool_at(name, t, bit)
                    .expect("scratch trace has universe layout");
            }
        }
    }

    /// Collect all traces (small universes only; prefer `for_each`).
    pub fn enumerate(&self) -> Result<Vec<Trace>, AlgebraError> {
        let n = self.size()?;
        Ok((0..n).map(|i| self.trace_at(i)).collect())
    }

    /// Inverse of `trace_at` for traces laid out over this universe's
    /// signals. Enables extensional predicates stored as truth tables.
    pub fn index_of(&self, tr: &Trace) -> Result<u64, trace_core::TraceError> {
        let mut index = 0u64;
        for (s, name) in self.signals.iter().enumerate() {
            for t in 0..self.horizon {
                if tr.bool_at(name, t)? {
                    index |= 1 << (s * self.horizon + t);
                }
            }
        }
        Ok(index)
    }
}
