use trace_core::{GlobalPredicate, Trace};

use crate::{AlgebraError, TraceUniverse};

/// An assume-guarantee contract: a pair of whole-trace predicates plus a
/// saturation flag.
///
/// A contract is saturated when its guarantee already absorbs the assumption
/// (G = A => G). The algebraic operations below require saturated operands;
/// [`saturate`] converts without changing the contract's environments or
/// implementations.
#[derive(Clone, Debug)]
pub struct Contract {
    name: String,
    assumption: GlobalPredicate,
    guarantee: GlobalPredicate,
    saturated: bool,
}

impl Contract {
    pub fn new(
        name: impl Into<String>,
        assumption: GlobalPredicate,
        guarantee: GlobalPredicate,
    ) -> Self {
        Contract {
            name: name.into(),
            assumption,
            guarantee,
            saturated: false,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn assumption(&self) -> &GlobalPredicate {
        &self.assumption
    }

    pub fn guarantee(&self) -> &GlobalPredicate {
        &self.guarantee
    }

    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    fn require_saturated(&self) -> Result<(), AlgebraError> {
        if self.saturated {
            Ok(())
        } else {
            Err(AlgebraError::Unsaturated(self.name.clone()))
        }
    }

    /// Emptiness of the assumption over a universe; a composed contract with
    /// a non-empty assumption is compatible.
    pub fn is_compatible(&self, u: &TraceUniverse) -> Result<bool, AlgebraError> {
        let mut any = false;
        u.for_each(|_, tr| {
            if !any && self.assumption.eval(tr)? {
                any = true;
            }
            Ok(())
        })?;
        Ok(any)
    }

    /// Emptiness of the guarantee over a universe; a saturated contract with
    /// a non-empty guarantee is consistent (has an implementation).
    pub fn is_consistent(&self, u: &TraceUniverse) -> Result<bool, AlgebraError> {
        let mut any = false;
        u.for_each(|_, tr| {
            if !any && self.guarantee.eval(tr)? {
                any = true;
            }
            Ok(())
        })?;
        Ok(any)
    }
}

/// Rewrite the guarantee to (not A or G) and mark the contract saturated.
/// Environments and implementations are unchanged.
pub fn saturate(c: &Contract) -> Contract {
    if c.saturated {
        return c.clone();
    }
    let guarantee = c.assumption.not().or(&c.guarantee);
    Contract {
        name: c.name.clone(),
        assumption: c.assumption.clone(),
        guarantee: GlobalPredicate::new(format!("sat({})", c.guarantee.name()), {
            let g = guarantee;
            move |tr| g.eval(tr)
        }),
        saturated: true,
    }
}

/// A set of behaviors satisfies a saturated contract when every trace lies
/// in (A => G); for saturated contracts that is exactly the guarantee.
pub fn satisfies(behaviors: &[Trace], c: &Contract) -> Result<bool, AlgebraError> {
    c.require_saturated()?;
    for tr in behaviors {
        let ok = !c.assumption.eval(tr)? || c.guarantee.eval(tr)?;
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Binary composition of saturated contracts: guarantees conjoin, and the
/// assumption is the weakest one consistent with the parts discharging each
/// other, in closed form (A1 and A2) or not (G1 and G2).
pub fn compose2(c1: &Contract, c2: &Contract) -> Result<Contract, AlgebraError> {
    compose_n(&[c1.clone(), c2.clone()])
}

/// N-ary composition in closed form: G = all guarantees, A = all assumptions
/// or not G.
pub fn compose_n(cs: &[Contract]) -> Result<Contract, AlgebraError> {
    if cs.is_empty() {
        return Err(AlgebraError::EmptyComposition);
    }
    for c in cs {
        c.require_saturated()?;
    }
    if cs.len() == 1 {
        return Ok(cs[0].clone());
    }
    let name = cs
        .iter()
        .map(|c| c.name.as_str())
        .collect::<Vec<_>>()
        .join(" (x) ");
    let parts: Vec<Contract> = cs.to_vec();
    let guarantee = GlobalPredicate::new(format!("G[{name}]"), {
        let parts = parts.clone();
        move |tr| {
            for c in &parts {
                if !c.guarantee.eval(tr)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    });
    let assumption = GlobalPredicate::new(format!("A[{name}]"), {
        let parts = parts.clone();
        move |tr| {
            let mut all_a = true;
            for c in &parts {
                if !c.assumption.eval(tr)? {
                    all_a = false;
                    break;
                }
            }
            if all_a {
                return Ok(true);
            }
            for c in &parts {
                if !c.guarantee.eval(tr)? {
                    return Ok(true); // not (G1 and ... and Gn)
                }
            }
            Ok(false)
        }
    });
    Ok(Contract {
        name,
        assumption,
        guarantee,
        saturated: true,
    })
}

/// Contract quotient: the obligation left for a missing part so that
/// composing it with `c1` meets `c`. Assumption A and G1; guarantee
/// (A1 and G) or not (A and G1). Saturated by construction.
pub fn quotient(c: &Contract, c1: &Contract) -> Result<Contract, AlgebraError> {
    c.require_saturated()?;
    c1.require_saturated()?;
    let name = format!("{} / {}", c.name, c1.name);
    let (a, g) = (c.assumption.clone(), c.guarantee.clone());
    let (a1, g1) = (c1.assumption.clone(), c1.guarantee.clone());
    let assumption = GlobalPredicate::new(format!("A[{name}]"), {
        let (a, g1) = (a.clone(), g1.clone());
        move |tr| Ok(a.eval(tr)? && g1.eval(tr)?)
    });
    let guarantee = GlobalPredicate::new(format!("G[{name}]"), move |tr| {
        let lhs = a1.eval(tr)? && g.eval(tr)?;
        let rhs = !(a.eval(tr)? && g1.eval(tr)?);
        Ok(lhs || rhs)
    });
    Ok(Contract {
        name,
        assumption,
        guarantee,
        saturated: true,
    })
}

/// Refinement by enumeration: `c1` refines `c2` iff over the universe the
/// assumption weakens (A2 implies A1) and the guarantee strengthens
/// (G1 implies G2).
pub fn refines(c1: &Contract, c2: &Contract, u: &TraceUniverse) -> Result<bool, AlgebraError> {
    c1.require_saturated()?;
    c2.require_saturated()?;
    let mut ok = true;
    u.for_each(|_, tr| {
        if !ok {
            return Ok(());
        }
        if c2.assumption.eval(tr)? && !c1.assumption.eval(tr)? {
            ok = false;
            return Ok(());
        }
        if c1.guarantee.eval(tr)? && !c2.guarantee.eval(tr)? {
            ok = false;
        }
        Ok(())
    })?;
    Ok(ok)
}
