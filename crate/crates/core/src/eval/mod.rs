//! Satisfaction, solution sets and quantifier-rank-k types.

mod compile;
mod types;

use std::borrow::Cow;
use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::caps::{CapExceeded, Caps};
use crate::formula::Formula;
use crate::structure::{ExpandedStructure, Structure};
use crate::subset::Subset;

pub(crate) use compile::{Machine, Program};
pub use types::{RankKType, Slot, TypeEngine, TypeInterner};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("free variable `{0}` has no value")]
    Uncovered(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} argument(s), found {found}")]
    Arity { symbol: String, expected: usize, found: usize },
    #[error("parameter @{index} is outside the universe of size {size}")]
    ParamOutOfRange { index: usize, size: usize },
    #[error("element {index} is outside the universe of size {size}")]
    ElementOutOfRange { index: usize, size: usize },
    #[error("expected at most one free variable, found {0:?}")]
    TooManyFreeVariables(Vec<String>),
    #[error("expected a formula over at most one subset predicate, found {0:?}")]
    TooManyPredicates(Vec<String>),
    #[error("parameter @{0} is not among the allowed parameters")]
    ParamNotAllowed(usize),
    #[error("type computation needs a relational signature; relationalize first")]
    NotRelational,
    #[error(transparent)]
    Cap(#[from] CapExceeded),
}

/// Values of variables.
pub type Assignment = BTreeMap<String, usize>;

/// Build an assignment from `(variable, element)` pairs.
pub fn assign<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Assignment {
    pairs.into_iter().map(|(v, a)| (v.to_string(), a)).collect()
}

/// Anything formulas can be evaluated in: a structure or an expansion.
pub trait Interpretation {
    fn expansion(&self) -> Cow<'_, ExpandedStructure>;
}

impl Interpretation for Structure {
    fn expansion(&self) -> Cow<'_, ExpandedStructure> {
        Cow::Owned(ExpandedStructure::from(self))
    }
}

impl Interpretation for ExpandedStructure {
    fn expansion(&self) -> Cow<'_, ExpandedStructure> {
        Cow::Borrowed(self)
    }
}

fn predicates_of(e: &ExpandedStructure) -> Vec<Subset> {
    e.predicates().iter().map(|(_, s)| s.clone()).collect()
}

/// Whether `f` holds in `e` under `a`.
pub fn sat<E: Interpretation + ?Sized>(e: &E, f: &Formula, a: &Assignment) -> Result<bool, EvalError> {
    let e = e.expansion();
    let prog = Program::compile(&e, f)?;
    let mut m = Machine::new(&prog, predicates_of(&e));
    for v in prog.free_names() {
        let value = *a.get(v).ok_or_else(|| EvalError::Uncovered(v.to_string()))?;
        if value >= e.size() {
            return Err(EvalError::ElementOutOfRange { index: value, size: e.size() });
        }
        m.set(prog.slot_of(v).unwrap(), value);
    }
    Ok(m.run())
}

/// The elements satisfying a formula with at most one free variable.
pub fn solution_set<E: Interpretation + ?Sized>(e: &E, f: &Formula) -> Result<Subset, EvalError> {
    let free: Vec<String> = f.free_variables().into_iter().collect();
    if free.len() > 1 {
        return Err(EvalError::TooManyFreeVariables(free));
    }
    let e = e.expansion();
    let prog = Program::compile(&e, f)?;
    let mut m = Machine::new(&prog, predicates_of(&e));
    let slot = free.first().and_then(|v| prog.slot_of(v));
    let mut out = Subset::empty();
    for a in 0..e.size() {
        if let Some(s) = slot {
            m.set(s, a);
        }
        if m.run() {
            out.insert(a);
        }
    }
    Ok(out)
}

/// Every assignment of elements to `vars` satisfying `f`, as tuples in
/// lexicographic order. `vars` must cover the free variables of `f`.
pub fn satisfying_tuples<E: Interpretation + ?Sized>(
    e: &E,
    f: &Formula,
    vars: &[&str],
) -> Result<Vec<Vec<usize>>, EvalError> {
    if let Some(v) = f.free_variables().into_iter().find(|v| !vars.contains(&v.as_str())) {
        return Err(EvalError::Uncovered(v));
    }
    let e = e.expansion();
    let n = e.size();
    let prog = Program::compile(&e, f)?;
    let mut m = Machine::new(&prog, predicates_of(&e));
    let slots: Vec<Option<u16>> = vars.iter().map(|v| prog.slot_of(v)).collect();
    let mut out = Vec::new();
    let mut tuple = vec![0usize; vars.len()];
    if n == 0 {
        return Ok(out);
    }
    loop {
        for (s, &x) in slots.iter().zip(&tuple) {
            if let Some(s) = s {
                m.set(*s, x);
            }
        }
        if m.run() {
            out.push(tuple.clone());
        }
        // Odometer, last position fastest.
        let mut i = tuple.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            tuple[i] += 1;
            if tuple[i] < n {
                break;
            }
            tuple[i] = 0;
        }
    }
}

/// Every subset `B` with `<S, B, P> |= psi`, in increasing numeric order.
///
/// `psi` is a sentence over at most one subset predicate (any name); the
/// parameters `@i` it mentions must belong to `params`.
pub fn subset_solutions(s: &Structure, psi: &Formula, params: &[usize]) -> Result<Vec<Subset>, EvalError> {
    let n = s.size();
    Caps::check("subset enumeration universe", n, Caps::current().subset_enum)?;
    let preds: Vec<String> = psi.predicates().into_iter().collect();
    if preds.len() > 1 {
        return Err(EvalError::TooManyPredicates(preds));
    }
    if let Some(&p) = psi.params().iter().find(|p| !params.contains(p)) {
        return Err(EvalError::ParamNotAllowed(p));
    }
    let free: Vec<String> = psi.free_variables().into_iter().collect();
    if let Some(v) = free.into_iter().next() {
        return Err(EvalError::Uncovered(v));
    }
    let name = preds.first().cloned().unwrap_or_else(|| "A".to_string());
    let e = ExpandedStructure::from(s)
        .with_predicate(&name, Subset::empty())
        .map_err(|_| EvalError::UnknownSymbol(name.clone()))?;
    let prog = Program::compile(&e, psi)?;
    let mut m = Machine::new(&prog, vec![Subset::empty()]);
    let mut out = Vec::new();
    for mask in 0..(1u64 << n) {
        let b = Subset::from_mask(mask);
        m.set_predicates(vec![b.clone()]);
        if m.run() {
            out.push(b);
        }
    }
    Ok(out)
}

/// The rank-`k` type of `tuple` in a relational structure or expansion,
/// with `params` as additional parameter constants.
///
/// Results share one process-wide interner, so types of tuples of the same
/// structure compare equal exactly when no formula of rank `k` separates
/// the tuples.
pub fn type_k<E: Interpretation + ?Sized>(
    e: &E,
    tuple: &[usize],
    k: usize,
    params: &[usize],
) -> Result<RankKType, EvalError> {
    TypeEngine::with_interner(&e.expansion(), params, TypeInterner::global())?.type_of(tuple, k)
}

/// Fibers of the rank-`k` element types with parameters `params`, ordered
/// by least element. Parameters form singleton blocks.
pub fn element_partition<E: Interpretation + ?Sized>(
    e: &E,
    k: usize,
    params: &[usize],
) -> Result<Vec<Subset>, EvalError> {
    let e = e.expansion();
    let mut engine = TypeEngine::new(&e, params)?;
    Ok(partition_with(&mut engine, k))
}

/// Element partition from an existing engine. The partition at rank `j`
/// refines the one at every lower rank, so the computation stops early
/// once all blocks are singletons.
pub(crate) fn partition_with(engine: &mut TypeEngine, k: usize) -> Vec<Subset> {
    let n = engine.size();
    let mut j = 0;
    loop {
        let types = engine.element_types(j);
        let mut blocks: Vec<Subset> = Vec::new();
        let mut index: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
        for (a, t) in types.iter().enumerate() {
            match t {
                None => blocks.push(Subset::from_indices([a])),
                Some(t) => match index.get(t) {
                    Some(&b) => blocks[b].insert(a),
                    None => {
                        index.insert(*t, blocks.len());
                        blocks.push(Subset::from_indices([a]));
                    }
                },
            }
        }
        if j >= k || blocks.len() == n {
            return blocks;
        }
        j += 1;
    }
}

/// The rank-`k` sentence type of `<S, B, P>` for every subset `B` of the
/// universe, in increasing numeric order of `B`. The predicate is named
/// `A`.
pub fn subset_type_map(s: &Structure, k: usize, params: &[usize]) -> Result<Vec<(Subset, RankKType)>, EvalError> {
    subset_type_map_with_cap(s, k, params, Caps::current().subset_types)
}

pub(crate) fn subset_type_map_with_cap(
    s: &Structure,
    k: usize,
    params: &[usize],
    cap: usize,
) -> Result<Vec<(Subset, RankKType)>, EvalError> {
    let n = s.size();
    Caps::check("subset type universe", n, cap)?;
    if !s.is_relational() {
        return Err(EvalError::NotRelational);
    }
    let interner = TypeInterner::new();
    (0..(1u64 << n))
        .into_par_iter()
        .map(|mask| {
            let b = Subset::from_mask(mask);
            let e = ExpandedStructure::from(s)
                .with_predicate("A", b.clone())
                .map_err(|_| EvalError::UnknownSymbol("A".into()))?;
            let mut engine = TypeEngine::with_interner(&e, params, interner.clone())?;
            Ok((b, engine.sentence_type(k)))
        })
        .collect()
}

/// Group subsets by type, keeping subset order inside each fiber and
/// ordering fibers by their least subset.
pub fn fibers(map: &[(Subset, RankKType)]) -> Vec<Vec<Subset>> {
    let mut index: std::collections::HashMap<&RankKType, usize> = std::collections::HashMap::new();
    let mut out: Vec<Vec<Subset>> = Vec::new();
    for (b, t) in map {
        match index.get(t) {
            Some(&i) => out[i].push(b.clone()),
            None => {
                index.insert(t, out.len());
                out.push(vec![b.clone()]);
            }
        }
    }
    out
}
