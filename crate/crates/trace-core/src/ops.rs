use crate::trace::SignalData;
use crate::{Trace, TraceError, TracePredicate, Verdict};

/// `a leads to b`: every tick where `a` holds is followed (at or after) by a
/// tick where `b` holds.
///
/// On a finite trace the inner existential can stay open: if some obligation
/// is still waiting when the horizon ends the verdict is `Pending` with the
/// tick of the earliest unresolved obligation. Leads-to is never
/// `ViolatedAt`; that arm of the verdict type is shared with other operators.
pub fn eval_leads_to(
    tr: &Trace,
    a: &TracePredicate,
    b: &TracePredicate,
) -> Result<Verdict, TraceError> {
    let n = tr.horizon();
    // Walk backwards tracking whether b occurs at or after each tick.
    let mut b_from = vec![false; n];
    let mut seen = false;
    for t in (0..n).rev() {
        if b.eval(tr, t)? {
            seen = true;
        }
        b_from[t] = seen;
    }
    for t in 0..n {
        if a.eval(tr, t)? && !b_from[t] {
            return Ok(Verdict::Pending(t));
        }
    }
    Ok(Verdict::Holds)
}

/// `a precedes b`: every tick where `b` holds has an earlier-or-equal tick
/// where `a` holds. A violation is definite (no waiting can repair the past).
pub fn eval_precedes(
    tr: &Trace,
    a: &TracePredicate,
    b: &TracePredicate,
) -> Result<Verdict, TraceError> {
    let mut a_seen = false;
    for t in 0..tr.horizon() {
        if a.eval(tr, t)? {
            a_seen = true;
        }
        if b.eval(tr, t)? && !a_seen {
            return Ok(Verdict::ViolatedAt(t));
        }
    }
    Ok(Verdict::Holds)
}

/// `always from t0`: the predicate holds at every tick >= t0.
pub fn eval_always_from(
    tr: &Trace,
    t0: usize,
    a: &TracePredicate,
) -> Result<Verdict, TraceError> {
    if t0 >= tr.horizon() {
        return Err(TraceError::TickOutOfRange {
            tick: t0,
            horizon: tr.horizon(),
        });
    }
    for t in t0..tr.horizon() {
        if !a.eval(tr, t)? {
            return Ok(Verdict::ViolatedAt(t));
        }
    }
    Ok(Verdict::Holds)
}

/// True iff `a` first becomes true exactly at `t0`.
pub fn eval_starts_at(tr: &Trace, a: &TracePredicate, t0: usize) -> Result<bool, TraceError> {
    if t0 >= tr.horizon() {
        return Err(TraceError::TickOutOfRange {
            tick: t0,
            horizon: tr.horizon(),
        });
    }
    if !a.eval(tr, t0)? {
        return Ok(false);
    }
    for t in 0..t0 {
        if a.eval(tr, t)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A set-valued signal is persistent when it never loses an element.
pub fn check_persistent(tr: &Trace, signal: &str) -> Result<Verdict, TraceError> {
    match tr.raw(signal)? {
        SignalData::Values(_) => Err(TraceError::NotSetValued(signal.to_string())),
        // Monotone by representation.
        SignalData::PersistentSet(_) => Ok(Verdict::Holds),
        SignalData::ExplicitSets(sets) => {
            for t in 1..sets.len() {
                if !sets[t - 1].is_subset(&sets[t]) {
                    return Ok(Verdict::ViolatedAt(t));
                }
            }
            Ok(Verdict::Holds)
        }
    }
}
