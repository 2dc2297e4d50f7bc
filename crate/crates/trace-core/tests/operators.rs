use std::collections::BTreeSet;

use proptest::prelude::*;
use trace_core::{
    check_persistent, eval_always_from, eval_leads_to, eval_precedes, eval_starts_at,
    trace_from_bools, SignalData, Trace, TraceBuilder, TraceError, TracePredicate, Value, Verdict,
};

fn bool_trace(a: Vec<bool>, b: Vec<bool>) -> Trace {
    trace_from_bools(0.1, &[("a", a), ("b", b)])
}

fn pa() -> TracePredicate {
    TracePredicate::signal("a")
}

fn pb() -> TracePredicate {
    TracePredicate::signal("b")
}

/// Independent oracle: quantifier definition as a double loop over (t, t').
fn leads_to_brute(a: &[bool], b: &[bool]) -> Verdict {
    for t in 0..a.len() {
        if a[t] {
            let witnessed = (t..b.len()).any(|t2| b[t2]);
            if !witnessed {
                return Verdict::Pending(t);
            }
        }
    }
    Verdict::Holds
}

fn precedes_brute(a: &[bool], b: &[bool]) -> Verdict {
    for t in 0..b.len() {
        if b[t] && !(0..=t).any(|t2| a[t2]) {
            return Verdict::ViolatedAt(t);
        }
    }
    Verdict::Holds
}

#[test]
fn leads_to_witness_exists() {
    let tr = bool_trace(
        vec![true, false, false, false, false],
        vec![false, false, true, false, false],
    );
    assert_eq!(eval_leads_to(&tr, &pa(), &pb()).unwrap(), Verdict::Holds);
}

#[test]
fn leads_to_vacuous_universal() {
    let tr = bool_trace(vec![false; 4], vec![false; 4]);
    assert_eq!(eval_leads_to(&tr, &pa(), &pb()).unwrap(), Verdict::Holds);
}

#[test]
fn leads_to_pending_when_witness_is_in_the_past() {
    // Expected value frozen from the brute-force oracle.
    let a = vec![false, false, false, false, true];
    let b = vec![false, true, false, false, false];
    assert_eq!(leads_to_brute(&a, &b), Verdict::Pending(4));
    let tr = bool_trace(a, b);
    assert_eq!(
        eval_leads_to(&tr, &pa(), &pb()).unwrap(),
        Verdict::Pending(4)
    );
}

#[test]
fn precedes_simple_and_violation() {
    let tr = bool_trace(
        vec![false, true, false, false],
        vec![false, false, false, true],
    );
    assert_eq!(eval_precedes(&tr, &pa(), &pb()).unwrap(), Verdict::Holds);

    let tr = bool_trace(vec![false; 4], vec![true, false, false, false]);
    assert_eq!(
        eval_precedes(&tr, &pa(), &pb()).unwrap(),
        Verdict::ViolatedAt(0)
    );
}

#[test]
fn precedes_same_tick_counts() {
    // a at {2}, b at {2,4}: exhaustive check over ticks says holds.
    let a = vec![false, false, true, false, false];
    let b = vec![false, false, true, false, true];
    assert_eq!(precedes_brute(&a, &b), Verdict::Holds);
    let tr = bool_trace(a, b);
    assert_eq!(eval_precedes(&tr, &pa(), &pb()).unwrap(), Verdict::Holds);
}

#[test]
fn always_from_cases() {
    let tr = bool_trace(vec![true; 5], vec![false; 5]);
    assert_eq!(eval_always_from(&tr, 0, &pa()).unwrap(), Verdict::Holds);

    let tr = bool_trace(vec![true, true, true, true, false], vec![false; 5]);
    assert_eq!(
        eval_always_from(&tr, 0, &pa()).unwrap(),
        Verdict::ViolatedAt(4)
    );

    // a true exactly on {3,4}, t0 = 3.
    let tr = bool_trace(vec![false, false, false, true, true], vec![false; 5]);
    assert_eq!(eval_always_from(&tr, 3, &pa()).unwrap(), Verdict::Holds);
}

#[test]
fn always_from_rejects_out_of_range() {
    let tr = bool_trace(vec![true; 3], vec![false; 3]);
    assert!(matches!(
        eval_always_from(&tr, 3, &pa()),
        Err(TraceError::TickOutOfRange { tick: 3, horizon: 3 })
    ));
}

#[test]
fn starts_at_cases() {
    let from2 = vec![false, false, true, true, true];
    let tr = bool_trace(from2.clone(), vec![false; 5]);
    assert!(eval_starts_at(&tr, &pa(), 2).unwrap());
    assert!(!eval_starts_at(&tr, &pa(), 3).unwrap());

    let only0 = vec![true, false, false, false, false];
    let tr = bool_trace(only0, vec![false; 5]);
    assert!(eval_starts_at(&tr, &pa(), 0).unwrap());
}

fn set_trace(sets: Vec<BTreeSet<u64>>) -> Trace {
    let mut builder = TraceBuilder::new(0.1);
    for _ in 0..sets.len() {
        builder.set("pad", Value::Bool(false));
        builder.declare_persistent_set("m");
        builder.end_tick();
    }
    let mut tr = builder.finish().unwrap();
    // Splice in an explicit per-tick set so shrinking is representable.
    tr.overwrite_signal("m", SignalData::ExplicitSets(sets)).unwrap();
    tr
}

#[test]
fn persistent_growth_shrink_constant() {
    let grow = set_trace(vec![
        BTreeSet::new(),
        BTreeSet::from([1]),
        BTreeSet::from([1, 2]),
    ]);
    assert_eq!(check_persistent(&grow, "m").unwrap(), Verdict::Holds);

    let shrink = set_trace(vec![BTreeSet::from([1]), BTreeSet::new()]);
    assert_eq!(
        check_persistent(&shrink, "m").unwrap(),
        Verdict::ViolatedAt(1)
    );

    let constant = set_trace(vec![
        BTreeSet::from([1]),
        BTreeSet::from([1]),
        BTreeSet::from([1]),
    ]);
    assert_eq!(check_persistent(&constant, "m").unwrap(), Verdict::Holds);
}

#[test]
fn persistent_rejects_non_set_signal() {
    let tr = bool_trace(vec![true; 3], vec![false; 3]);
    assert!(matches!(
        check_persistent(&tr, "a"),
        Err(TraceError::NotSetValued(_))
    ));
}

#[test]
fn unknown_signal_is_named_in_error() {
    let tr = bool_trace(vec![true; 3], vec![false; 3]);
    let p = TracePredicate::signal("nope");
    match eval_leads_to(&tr, &p, &pb()) {
        Err(TraceError::UnknownSignal(s)) => assert_eq!(s, "nope"),
        other => panic!("expected UnknownSignal, got {other:?}"),
    }
}

proptest! {
    /// eval_leads_to agrees with the brute-force double loop.
    #[test]
    fn leads_to_matches_brute_force(
        a in prop::collection::vec(any::<bool>(), 1..12),
        b in prop::collection::vec(any::<bool>(), 1..12),
    ) {
        let n = a.len().min(b.len());
        let (a, b) = (a[..n].to_vec(), b[..n].to_vec());
        let tr = bool_trace(a.clone(), b.clone());
        prop_assert_eq!(eval_leads_to(&tr, &pa(), &pb()).unwrap(), leads_to_brute(&a, &b));
    }

    /// precedes on a trace equals leads-to on the time-reversed trace with
    /// roles swapped, whenever both verdicts are fully determined.
    #[test]
    fn precedes_is_reversed_leads_to(
        a in prop::collection::vec(any::<bool>(), 1..12),
        b in prop::collection::vec(any::<bool>(), 1..12),
    ) {
        let n = a.len().min(b.len());
        let (a, b) = (a[..n].to_vec(), b[..n].to_vec());
        let tr = bool_trace(a.clone(), b.clone());
        let fwd = eval_precedes(&tr, &pa(), &pb()).unwrap();

        let (ra, rb): (Vec<bool>, Vec<bool>) = (
            a.iter().rev().copied().collect(),
            b.iter().rev().copied().collect(),
        );
        let rtr = bool_trace(ra, rb);
        // b leads to a on the reversal; a Pending there is exactly a
        // precedes violation here.
        let rev = eval_leads_to(&rtr, &pb(), &pa()).unwrap();
        match (fwd, rev) {
            (Verdict::Holds, v) => prop_assert_eq!(v, Verdict::Holds),
            (Verdict::ViolatedAt(_), v) => prop_assert!(matches!(v, Verdict::Pending(_))),
            other => prop_assert!(false, "unexpected verdict pair {:?}", other),
        }
    }

    /// precedes agrees with its brute-force definition.
    #[test]
    fn precedes_matches_brute_force(
        a in prop::collection::vec(any::<bool>(), 1..12),
        b in prop::collection::vec(any::<bool>(), 1..12),
    ) {
        let n = a.len().min(b.len());
        let (a, b) = (a[..n].to_vec(), b[..n].to_vec());
        let tr = bool_trace(a.clone(), b.clone());
        prop_assert_eq!(eval_precedes(&tr, &pa(), &pb()).unwrap(), precedes_brute(&a, &b));
    }
}
