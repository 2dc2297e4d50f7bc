use std::sync::Arc;

use contract_algebra::{
    compose2, compose_n, quotient, refines, satisfies, saturate, AlgebraError, Contract,
    TraceUniverse,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trace_core::{GlobalPredicate, Trace};

fn u2x3() -> TraceUniverse {
    TraceUniverse::boolean(&["p", "q"], 3)
}

/// Extensional predicate over a universe: one bit per trace index.
fn table_pred(name: &str, u: &TraceUniverse, bits: Arc<Vec<bool>>) -> GlobalPredicate {
    let u = u.clone();
    GlobalPredicate::new(name, move |tr: &Trace| {
        let idx = u.index_of(tr)? as usize;
        Ok(bits[idx])
    })
}

fn random_table(rng: &mut ChaCha8Rng, n: usize) -> Arc<Vec<bool>> {
    Arc::new((0..n).map(|_| rng.gen_bool(0.5)).collect())
}

fn random_saturated(rng: &mut ChaCha8Rng, u: &TraceUniverse, name: &str) -> Contract {
    let n = u.size().unwrap() as usize;
    let a = table_pred(&format!("{name}.A"), u, random_table(rng, n));
    let g = table_pred(&format!("{name}.G"), u, random_table(rng, n));
    saturate(&Contract::new(name, a, g))
}

/// Pointwise equality of two contracts over every trace of a universe.
fn contracts_agree(c1: &Contract, c2: &Contract, u: &TraceUniverse) -> bool {
    let mut same = true;
    u.for_each(|_, tr| {
        if same {
            same = c1.assumption().eval(tr)? == c2.assumption().eval(tr)?
                && c1.guarantee().eval(tr)? == c2.guarantee().eval(tr)?;
        }
        Ok(())
    })
    .unwrap();
    same
}

#[test]
fn saturate_true_assumption_keeps_guarantee() {
    let u = u2x3();
    let g_bits = Arc::new((0..64).map(|i| i % 3 == 0).collect::<Vec<_>>());
    let c = Contract::new(
        "c",
        GlobalPredicate::constant("true", true),
        table_pred("g", &u, g_bits.clone()),
    );
    let s = saturate(&c);
    u.for_each(|i, tr| {
        assert_eq!(s.guarantee().eval(tr)?, g_bits[i as usize]);
        Ok(())
    })
    .unwrap();
}

#[test]
fn saturate_false_assumption_is_vacuous() {
    let u = u2x3();
    let c = Contract::new(
        "c",
        GlobalPredicate::constant("false", false),
        table_pred("g", &u, Arc::new(vec![false; 64])),
    );
    let s = saturate(&c);
    u.for_each(|_, tr| {
        assert!(s.guarantee().eval(tr)?);
        Ok(())
    })
    .unwrap();
}

#[test]
fn saturate_is_idempotent_by_enumeration() {
    let u = u2x3();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..20 {
        let c = random_saturated(&mut rng, &u, &format!("c{k}"));
        let cc = saturate(&c);
        assert!(contracts_agree(&c, &cc, &u), "saturate not idempotent");
    }
}

#[test]
fn satisfies_examples() {
    let u = u2x3();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let c = random_saturated(&mut rng, &u, "c");

    // Empty behavior set: vacuous inclusion.
    assert!(satisfies(&[], &c).unwrap());

    // Behaviors all violating A satisfy vacuously.
    let mut outside_a = Vec::new();
    let mut witness_bad = None;
    u.for_each(|_, tr| {
        if !c.assumption().eval(tr)? {
            outside_a.push(tr.clone());
        }
        if witness_bad.is_none() && c.assumption().eval(tr)? && !c.guarantee().eval(tr)? {
            witness_bad = Some(tr.clone());
        }
        Ok(())
    })
    .unwrap();
    assert!(satisfies(&outside_a, &c).unwrap());

    // One trace with A true and raw G false fails. A saturated contract's
    // guarantee absorbs A, so build the failing trace from raw parts.
    let a_bits = Arc::new((0..64).map(|i| i % 2 == 0).collect::<Vec<_>>());
    let g_bits = Arc::new((0..64).map(|i| i % 4 == 1).collect::<Vec<_>>());
    let raw = Contract::new(
        "raw",
        table_pred("a", &u, a_bits),
        table_pred("g", &u, g_bits),
    );
    let sat = saturate(&raw);
    let bad = u.trace_at(0); // index 0: A true (0 % 2 == 0), G false (0 % 4 != 1)
    assert!(!satisfies(&[bad], &sat).unwrap());
}

#[test]
fn satisfies_requires_saturation() {
    let c = Contract::new(
        "c",
        GlobalPredicate::constant("true", true),
        GlobalPredicate::constant("g", true),
    );
    assert!(matches!(
        satisfies(&[], &c),
        Err(AlgebraError::Unsaturated(_))
    ));
}

#[test]
fn compose_self_is_saturated_self() {
    let u = u2x3();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let c = random_saturated(&mut rng, &u, "c");
    let cc = compose2(&c, &c).unwrap();
    // Guarantee stays G; assumption becomes A or not G.
    u.for_each(|_, tr| {
        assert_eq!(cc.guarantee().eval(tr)?, c.guarantee().eval(tr)?);
        let expect = c.assumption().eval(tr)? || !c.guarantee().eval(tr)?;
        assert_eq!(cc.assumption().eval(tr)?, expect);
        Ok(())
    })
    .unwrap();
}

#[test]
fn compose_true_assumptions() {
    let u = u2x3();
    let g1 = Arc::new((0..64).map(|i| i & 1 == 0).collect::<Vec<_>>());
    let g2 = Arc::new((0..64).map(|i| i & 2 == 0).collect::<Vec<_>>());
    let c1 = saturate(&Contract::new(
        "c1",
        GlobalPredicate::constant("true", true),
        table_pred("g1", &u, g1.clone()),
    ));
    let c2 = saturate(&Contract::new(
        "c2",
        GlobalPredicate::constant("true", true),
        table_pred("g2", &u, g2.clone()),
    ));
    let c = compose2(&c1, &c2).unwrap();
    u.for_each(|i, tr| {
        let g = g1[i as usize] && g2[i as usize];
        assert_eq!(c.guarantee().eval(tr)?, g);
        // (true and true) or not g == true everywhere.
        assert!(c.assumption().eval(tr)?);
        Ok(())
    })
    .unwrap();
}

#[test]
fn compose_commutative_by_enumeration() {
    let u = u2x3();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..20 {
        let c1 = random_saturated(&mut rng, &u, &format!("a{k}"));
        let c2 = random_saturated(&mut rng, &u, &format!("b{k}"));
        let l = compose2(&c1, &c2).unwrap();
        let r = compose2(&c2, &c1).unwrap();
        assert!(contracts_agree(&l, &r, &u), "compose2 not commutative");
    }
}

#[test]
fn compose_n_singleton_and_triple() {
    let u = u2x3();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let c = random_saturated(&mut rng, &u, "c");

    let single = compose_n(std::slice::from_ref(&c)).unwrap();
    assert!(contracts_agree(&single, &c, &u));

    // Three copies of c agree with nested compose2.
    let triple = compose_n(&[c.clone(), c.clone(), c.clone()]).unwrap();
    let nested = compose2(&c, &compose2(&c, &c).unwrap()).unwrap();
    assert!(contracts_agree(&triple, &nested, &u));
}

#[test]
fn compose_n_rejects_empty_and_unsaturated() {
    assert!(matches!(
        compose_n(&[]),
        Err(AlgebraError::EmptyComposition)
    ));
    let raw = Contract::new(
        "raw",
        GlobalPredicate::constant("a", true),
        GlobalPredicate::constant("g", true),
    );
    assert!(matches!(
        compose2(&raw, &raw),
        Err(AlgebraError::Unsaturated(_))
    ));
}

#[test]
fn quotient_by_self_and_by_top() {
    let u = u2x3();
    let g_bits = Arc::new((0..64).map(|i| i % 5 != 0).collect::<Vec<_>>());
    let c = saturate(&Contract::new(
        "c",
        GlobalPredicate::constant("true", true),
        table_pred("g", &u, g_bits.clone()),
    ));

    // quotient(c, c) with A = true: assumption == g, guarantee == true.
    let q = quotient(&c, &c).unwrap();
    u.for_each(|i, tr| {
        assert_eq!(q.assumption().eval(tr)?, g_bits[i as usize]);
        assert!(q.guarantee().eval(tr)?);
        Ok(())
    })
    .unwrap();

    // quotient by the top contract (true, true) returns c's own obligations.
    let top = saturate(&Contract::new(
        "top",
        GlobalPredicate::constant("true", true),
        GlobalPredicate::constant("true", true),
    ));
    let q = quotient(&c, &top).unwrap();
    u.for_each(|i, tr| {
        assert!(q.assumption().eval(tr)?);
        assert_eq!(q.guarantee().eval(tr)?, g_bits[i as usize]);
        Ok(())
    })
    .unwrap();
}

#[test]
fn refines_reflexive_and_extremes() {
    let u = u2x3();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let c = random_saturated(&mut rng, &u, "c");
    assert!(refines(&c, &c, &u).unwrap());

    // G1 false everywhere refines anything whose assumption is false
    // everywhere: both inclusions vacuous/total.
    let bottom_g = saturate(&Contract::new(
        "bottom",
        GlobalPredicate::constant("true", true),
        GlobalPredicate::constant("false", false),
    ));
    let empty_a = saturate(&Contract::new(
        "emptyA",
        GlobalPredicate::constant("false", false),
        GlobalPredicate::constant("g", false),
    ));
    // bottom_g saturated guarantee = not true or false = false; empty_a's
    // assumption false everywhere, so A2 subset of A1 holds trivially.
    assert!(refines(&bottom_g, &empty_a, &u).unwrap());
}

#[test]
fn refines_errors_when_universe_exceeds_bound() {
    let u = TraceUniverse::boolean(&["a", "b", "c", "d", "e"], 5); // 25 bits
    let c = saturate(&Contract::new(
        "c",
        GlobalPredicate::constant("true", true),
        GlobalPredicate::constant("true", true),
    ));
    assert!(matches!(
        refines(&c, &c, &u),
        Err(AlgebraError::UniverseTooLarge { .. })
    ));
}

#[test]
fn quotient_composition_recovers_target() {
    // compose2(c1, quotient(c, c1)) refines c, for random saturated pairs.
    let u = u2x3();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for k in 0..50 {
        let c = random_saturated(&mut rng, &u, &format!("c{k}"));
        let c1 = random_saturated(&mut rng, &u, &format!("c1_{k}"));
        let q = quotient(&c, &c1).unwrap();
        let composed = compose2(&c1, &q).unwrap();
        assert!(
            refines(&composed, &c, &u).unwrap(),
            "c1 (x) (c/c1) must refine c (pair {k})"
        );
    }
}

#[test]
fn composition_preserved_by_behavior_intersection() {
    // If B1 satisfies c1 and B2 satisfies c2 then B1 intersect B2 satisfies
    // c1 (x) c2 — checked extensionally over the universe.
    let u = u2x3();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..20 {
        let c1 = random_saturated(&mut rng, &u, &format!("c1_{k}"));
        let c2 = random_saturated(&mut rng, &u, &format!("c2_{k}"));
        let comp = compose2(&c1, &c2).unwrap();

        // Largest implementations: all traces satisfying A_i => G_i.
        let mut b1 = Vec::new();
        let mut b2 = Vec::new();
        u.for_each(|_, tr| {
            if !c1.assumption().eval(tr)? || c1.guarantee().eval(tr)? {
                b1.push(tr.clone());
            }
            if !c2.assumption().eval(tr)? || c2.guarantee().eval(tr)? {
                b2.push(tr.clone());
            }
            Ok(())
        })
        .unwrap();
        assert!(satisfies(&b1, &c1).unwrap());
        assert!(satisfies(&b2, &c2).unwrap());

        let b1_idx: std::collections::BTreeSet<u64> =
            b1.iter().map(|tr| u.index_of(tr).unwrap()).collect();
        let both: Vec<Trace> = b2
            .into_iter()
            .filter(|tr| b1_idx.contains(&u.index_of(tr).unwrap()))
            .collect();
        assert!(
            satisfies(&both, &comp).unwrap(),
            "intersection must satisfy the composition (pair {k})"
        );
    }
}
