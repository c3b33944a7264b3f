//! Definable, implicitly definable and algebraic elements and subsets under
//! a resource budget, with witness synthesis and the two constructive
//! conversions: adding parameters to single out one solution of an
//! algebraic definition, and pinning down the elements of a definable set
//! that carries a definable linear order.

mod budget;
mod convert;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::aut::{automorphisms, PermutationSet};
use crate::caps::{CapExceeded, Caps};
use crate::eval::{self, element_partition, fibers, subset_solutions, subset_type_map, EvalError};
use crate::formula::{build_union_definition, hintikka, var_name, Formula, SynthError, Term};
use crate::structure::{ExpandedStructure, Structure, StructureError};
use crate::subset::Subset;

pub use budget::{Budget, Params, Rank, ResolvedBudget};
pub use convert::{alg_to_imp, pin_elements, Conversion, PinnedElement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DefinabilityError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Cap(#[from] CapExceeded),
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
    #[error("the target {0} is not a solution")]
    NotASolution(Subset),
    #[error("{count} solutions exceed the degree cap {cap}")]
    DegreeCap { count: usize, cap: usize },
    #[error("the defined set is empty")]
    EmptySet,
    #[error("not a strict linear order on the set: {0}")]
    NotLinearOrder(String),
    #[error("expected {expected} free variable(s), found {found:?}")]
    FreeVariables { expected: usize, found: Vec<String> },
}

impl DefinabilityError {
    /// Whether the error is a size cap being hit.
    pub fn is_cap(&self) -> bool {
        matches!(
            self,
            DefinabilityError::Cap(_)
                | DefinabilityError::Eval(EvalError::Cap(_))
                | DefinabilityError::Synth(SynthError::Eval(EvalError::Cap(_)))
                | DefinabilityError::Synth(SynthError::TooLarge { .. })
                | DefinabilityError::Structure(StructureError::Cap(_))
        )
    }
}

fn formula_text<S: Serializer>(f: &Option<Formula>, s: S) -> Result<S::Ok, S::Error> {
    match f {
        Some(f) => s.serialize_some(&f.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementReport {
    pub element: usize,
    /// Size of the element's type class (or orbit) under the budget.
    pub degree: usize,
    pub definable: bool,
    /// Degree within the budget's cap.
    pub algebraic: bool,
    /// Formula in `x` whose solution set is the type class.
    #[serde(serialize_with = "formula_text")]
    pub witness: Option<Formula>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetReport {
    pub subset: Subset,
    /// A union of element type classes, i.e. definable.
    pub explicit: bool,
    /// The only subset with its sentence type, i.e. implicitly definable.
    pub implicit: bool,
    /// Number of subsets sharing its sentence type (or its orbit size).
    pub alg_degree: usize,
    pub algebraic: bool,
    #[serde(serialize_with = "formula_text")]
    pub explicit_witness: Option<Formula>,
    /// Sentence in the predicate `A` whose solutions are the subsets of the
    /// same sentence type.
    #[serde(serialize_with = "formula_text")]
    pub implicit_witness: Option<Formula>,
}

/// Structures carrying function symbols are analysed through their graph
/// relations; witnesses then speak about those relations.
fn relational(s: &Structure) -> Structure {
    s.relationalize()
}

fn group(s: &Structure, params: &[usize]) -> PermutationSet {
    automorphisms(s, params)
}

/// Element partition under a resolved budget: orbits when unbounded, type
/// classes otherwise.
fn partition(s: &Structure, b: &ResolvedBudget) -> Result<Vec<Subset>, DefinabilityError> {
    if b.unbounded {
        Ok(group(s, &b.params).orbits())
    } else {
        Ok(element_partition(&relational(s), b.rank, &b.params)?)
    }
}

pub fn classify_elements(s: &Structure, budget: &Budget, witnesses: bool) -> Result<Vec<ElementReport>, DefinabilityError> {
    let b = budget.resolve(s.size())?;
    let blocks = partition(s, &b)?;
    let rel = ExpandedStructure::from(relational(s));
    let mut out: Vec<ElementReport> = Vec::with_capacity(s.size());
    for block in &blocks {
        let witness = match (witnesses, block.least()) {
            (true, Some(a)) if b.params.contains(&a) => {
                Some(Formula::eq(Term::Var(var_name(0)), Term::Param(a)))
            }
            (true, Some(a)) => {
                let f = hintikka(&rel, &[a], b.rank, &b.params)?;
                if eval::solution_set(&rel, &f)? != *block {
                    return Err(SynthError::Unverified(format!("witness for {a} does not define {block}")).into());
                }
                Some(f)
            }
            _ => None,
        };
        for a in block.iter() {
            out.push(ElementReport {
                element: a,
                degree: block.len(),
                definable: block.len() == 1,
                algebraic: block.len() <= b.max_degree,
                witness: witness.clone(),
            });
        }
    }
    out.sort_by_key(|r| r.element);
    Ok(out)
}

/// Elements of degree 1 under the budget.
pub fn dcl(s: &Structure, budget: &Budget) -> Result<Subset, DefinabilityError> {
    let b = budget.resolve(s.size())?;
    Ok(partition(s, &b)?.into_iter().filter(|blk| blk.len() == 1).fold(Subset::empty(), |acc, blk| acc.union(&blk)))
}

/// Degree of element `a` under the budget.
pub fn acl_degree(s: &Structure, budget: &Budget, a: usize) -> Result<usize, DefinabilityError> {
    let b = budget.resolve(s.size())?;
    if a >= s.size() {
        return Err(EvalError::ElementOutOfRange { index: a, size: s.size() }.into());
    }
    Ok(partition(s, &b)?.into_iter().find(|blk| blk.contains(a)).map(|blk| blk.len()).unwrap_or(0))
}

fn is_union_of(a: &Subset, blocks: &[Subset]) -> bool {
    blocks.iter().all(|blk| blk.is_subset(a) || blk.intersection(a).is_empty())
}

/// Classify every subset of the universe, in numeric order.
pub fn classify_subsets(s: &Structure, budget: &Budget, witnesses: bool) -> Result<Vec<SubsetReport>, DefinabilityError> {
    classify(s, budget, witnesses, None)
}

/// Classify a single subset.
pub fn classify_subset(s: &Structure, budget: &Budget, a: &Subset, witnesses: bool) -> Result<SubsetReport, DefinabilityError> {
    if let Some(bad) = a.iter().find(|&i| i >= s.size()) {
        return Err(EvalError::ElementOutOfRange { index: bad, size: s.size() }.into());
    }
    Ok(classify(s, budget, witnesses, Some(a))?.pop().expect("every subset is classified"))
}

fn classify(
    s: &Structure,
    budget: &Budget,
    witnesses: bool,
    only: Option<&Subset>,
) -> Result<Vec<SubsetReport>, DefinabilityError> {
    let n = s.size();
    let b = budget.resolve(n)?;
    let blocks = partition(s, &b)?;
    let degrees: Vec<(Subset, usize, Vec<Subset>)> = if b.unbounded {
        Caps::check("subset classification universe", n, Caps::current().subset_enum)?;
        let g = group(s, &b.params);
        (0..1u64 << n)
            .map(|mask| {
                let a = Subset::from_mask(mask);
                let orbit = g.orbit_of_subset(&a);
                (a, orbit.len(), orbit)
            })
            .collect()
    } else {
        let map = subset_type_map(&relational(s), b.rank, &b.params)?;
        let fibers = fibers(&map);
        let mut fiber_of = vec![0usize; map.len()];
        for (i, fib) in fibers.iter().enumerate() {
            for a in fib {
                fiber_of[a.to_mask().unwrap() as usize] = i;
            }
        }
        map.iter()
            .enumerate()
            .map(|(mask, (a, _))| (a.clone(), fibers[fiber_of[mask]].len(), fibers[fiber_of[mask]].clone()))
            .collect()
    };
    let rel = ExpandedStructure::from(relational(s));
    let mut out = Vec::with_capacity(degrees.len());
    for (a, degree, fiber) in degrees {
        if only.is_some_and(|t| *t != a) {
            continue;
        }
        let explicit = is_union_of(&a, &blocks);
        let (mut ew, mut iw) = (None, None);
        if witnesses {
            if explicit {
                let parts: Vec<Subset> = blocks.iter().filter(|blk| blk.is_subset(&a)).cloned().collect();
                ew = Some(build_union_definition(&rel, &parts, b.rank, &b.params)?);
            }
            iw = Some(implicit_witness(&rel, &a, &fiber, b.rank, &b.params)?);
        }
        out.push(SubsetReport {
            subset: a,
            explicit,
            implicit: degree == 1,
            alg_degree: degree,
            algebraic: degree <= b.max_degree,
            explicit_witness: ew,
            implicit_witness: iw,
        });
    }
    Ok(out)
}

/// The Hintikka sentence of `<S, A, P>`, checked to have exactly `fiber`
/// as its solutions.
fn implicit_witness(
    rel: &ExpandedStructure,
    a: &Subset,
    fiber: &[Subset],
    k: usize,
    params: &[usize],
) -> Result<Formula, DefinabilityError> {
    let e = rel.clone().with_predicate("A", a.clone())?;
    let psi = hintikka(&e, &[], k, params)?;
    let sols = subset_solutions(rel.base(), &psi, params)?;
    if sols != fiber {
        return Err(SynthError::Unverified(format!("sentence for {a} has {} solutions, expected {}", sols.len(), fiber.len())).into());
    }
    Ok(psi)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    pub pointwise_definable: bool,
    /// Largest element degree.
    pub pointwise_algebraic_degree: usize,
    pub budget: ResolvedBudget,
}

pub fn classify_structure(s: &Structure, budget: &Budget) -> Result<StructureReport, DefinabilityError> {
    let b = budget.resolve(s.size())?;
    let blocks = partition(s, &b)?;
    let max = blocks.iter().map(Subset::len).max().unwrap_or(0);
    Ok(StructureReport { pointwise_definable: max == 1, pointwise_algebraic_degree: max, budget: b })
}

/// Which side of the explicit/implicit gap to look for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    ImplicitNotExplicit,
    ExplicitNotImplicit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapEntry {
    pub structure: String,
    pub subset: Subset,
    pub alg_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub rank: usize,
    pub mode: GapMode,
    pub structures_checked: usize,
    pub entries: Vec<GapEntry>,
}

/// Every subset of every structure that is implicit but not explicit at
/// rank `k` (or the reverse), without parameters.
pub fn search_gap(corpus: &[Structure], k: usize, mode: GapMode) -> Result<GapReport, DefinabilityError> {
    let budget = Budget::rank(k);
    let mut entries = Vec::new();
    for s in corpus {
        for r in classify_subsets(s, &budget, false)? {
            let hit = match mode {
                GapMode::ImplicitNotExplicit => r.implicit && !r.explicit,
                GapMode::ExplicitNotImplicit => r.explicit && !r.implicit,
            };
            if hit {
                entries.push(GapEntry { structure: s.name().to_string(), subset: r.subset, alg_degree: r.alg_degree });
            }
        }
    }
    Ok(GapReport { rank: k, mode, structures_checked: corpus.len(), entries })
}
