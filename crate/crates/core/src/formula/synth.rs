//! Witness synthesis: Hintikka formulas isolating rank-k types, and unions
//! of them defining unions of type classes.
//!
//! `H_j(w)` for a tuple `w` bound to `x, y, z, ...` is the conjunction of
//!
//! * the atomic diagram of `w` (literals mentioning at least one position
//!   variable or a subset predicate, over the positions and parameters);
//! * `exists v. H_{j-1}(w a)` for one representative `a` of each type of
//!   one-point extension;
//! * `forall v. (v = x_i | ... | v = @p | ... | H_{j-1}(w a) | ...)`.
//!
//! Subformulas for equal types are shared, and every result is checked with
//! the evaluator before it is returned.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::{var_name, Formula, Term};
use crate::caps::Caps;
use crate::eval::{satisfying_tuples, solution_set, EvalError, RankKType, TypeEngine};
use crate::structure::ExpandedStructure;
use crate::subset::Subset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("witness formula exceeds the size guard of {cap} nodes")]
    TooLarge { cap: usize },
    #[error("synthesized formula failed verification: {0}")]
    Unverified(String),
}

pub(crate) struct Synth<'a> {
    e: &'a ExpandedStructure,
    engine: TypeEngine,
    params: Vec<usize>,
    memo: HashMap<RankKType, Formula>,
    nodes: usize,
    cap: usize,
}

impl<'a> Synth<'a> {
    pub(crate) fn new(e: &'a ExpandedStructure, params: &[usize]) -> Result<Synth<'a>, SynthError> {
        let engine = TypeEngine::new(e, params)?;
        let mut distinct: Vec<usize> = engine.params().to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        Ok(Synth { e, engine, params: distinct, memo: HashMap::new(), nodes: 0, cap: Caps::current().formula_nodes })
    }

    pub(crate) fn engine(&mut self) -> &mut TypeEngine {
        &mut self.engine
    }

    fn count(&mut self, k: usize) -> Result<(), SynthError> {
        self.nodes += k;
        if self.nodes > self.cap {
            Err(SynthError::TooLarge { cap: self.cap })
        } else {
            Ok(())
        }
    }

    fn term(&self, w: &[usize], pos: usize) -> Term {
        if pos < w.len() {
            Term::Var(var_name(pos))
        } else {
            Term::Param(self.params[pos - w.len()])
        }
    }

    fn element(&self, w: &[usize], pos: usize) -> usize {
        if pos < w.len() {
            w[pos]
        } else {
            self.params[pos - w.len()]
        }
    }

    fn literal(atom: Formula, holds: bool) -> Formula {
        if holds {
            atom
        } else {
            Formula::not(atom)
        }
    }

    fn diagram(&self, w: &[usize]) -> Vec<Formula> {
        let m = w.len();
        let width = m + self.params.len();
        let mut lits = Vec::new();
        for i in 0..m {
            for j in i + 1..width {
                let atom = Formula::eq(self.term(w, i), self.term(w, j));
                lits.push(Self::literal(atom, w[i] == self.element(w, j)));
            }
        }
        for (name, set) in self.e.predicates() {
            for pos in 0..width {
                let atom = Formula::pred(name, self.term(w, pos));
                lits.push(Self::literal(atom, set.contains(self.element(w, pos))));
            }
        }
        let base = self.e.base();
        for ((name, arity), rel) in base.signature().relations().iter().zip(base.relations()) {
            let total = width.pow(*arity as u32);
            for code in 0..total {
                let mut c = code;
                let mut positions = Vec::with_capacity(*arity);
                for _ in 0..*arity {
                    positions.push(c % width);
                    c /= width;
                }
                if positions.iter().all(|&p| p >= m) {
                    continue;
                }
                let args: Vec<usize> = positions.iter().map(|&p| self.element(w, p)).collect();
                let atom = Formula::rel(name, positions.iter().map(|&p| self.term(w, p)).collect());
                lits.push(Self::literal(atom, rel.contains(&args)));
            }
        }
        lits
    }

    fn free_elements(&self, w: &[usize]) -> usize {
        let mut taken: BTreeSet<usize> = w.iter().copied().collect();
        taken.extend(self.params.iter().copied());
        self.e.size() - taken.len()
    }

    /// `H_j(w)` with rank capped where the type stops changing.
    fn build(&mut self, w: &mut Vec<usize>, j: usize) -> Result<Formula, SynthError> {
        let r = j.min(self.free_elements(w));
        let t = self.engine.type_of(w, r)?;
        if let Some(f) = self.memo.get(&t) {
            return Ok(f.clone());
        }
        let mut parts = self.diagram(w);
        self.count(parts.len() + 1)?;
        if r > 0 {
            let m = w.len();
            let y = var_name(m);
            let mut seen = Vec::new();
            let mut reps = Vec::new();
            for a in 0..self.e.size() {
                if w.contains(&a) || self.params.contains(&a) {
                    continue;
                }
                w.push(a);
                let ta = self.engine.type_of(w, r - 1)?;
                w.pop();
                if !seen.contains(&ta) {
                    seen.push(ta);
                    reps.push(a);
                }
            }
            let mut subs = Vec::with_capacity(reps.len());
            for a in reps {
                w.push(a);
                let h = self.build(w, r - 1);
                w.pop();
                subs.push(h?);
            }
            let mut cover: Vec<Formula> = (0..m).map(|i| Formula::eq(Term::Var(y.clone()), Term::Var(var_name(i)))).collect();
            cover.extend(self.params.iter().map(|&p| Formula::eq(Term::Var(y.clone()), Term::Param(p))));
            cover.extend(subs.iter().cloned());
            self.count(2 * subs.len() + cover.len() + 3)?;
            parts.extend(subs.into_iter().map(|h| Formula::exists(&y, h)));
            parts.push(Formula::forall(&y, Formula::or(cover)));
        }
        let f = Formula::and(parts);
        self.memo.insert(t, f.clone());
        Ok(f)
    }

    pub(crate) fn hintikka(&mut self, tuple: &[usize], k: usize) -> Result<Formula, SynthError> {
        let mut w = tuple.to_vec();
        let mut f = self.build(&mut w, k)?;
        let free = f.free_variables();
        let missing: Vec<Formula> = (0..tuple.len())
            .map(var_name)
            .filter(|v| !free.contains(v))
            .map(|v| Formula::eq(Term::Var(v.clone()), Term::Var(v)))
            .collect();
        if !missing.is_empty() {
            let mut parts = missing;
            parts.push(f);
            f = Formula::and(parts);
        }
        Ok(f)
    }
}

/// A formula with free variables `x, y, z, ...` for the positions of
/// `tuple`, of quantifier rank at most `k`, satisfied by exactly the tuples
/// whose rank-`k` type (with parameters `params`) equals that of `tuple`.
///
/// `e` must be relational.
pub fn hintikka(e: &ExpandedStructure, tuple: &[usize], k: usize, params: &[usize]) -> Result<Formula, SynthError> {
    let mut synth = Synth::new(e, params)?;
    let f = synth.hintikka(tuple, k)?;
    let target = synth.engine().type_of(tuple, k)?;
    let names: Vec<String> = (0..tuple.len()).map(var_name).collect();
    let vars: Vec<&str> = names.iter().map(String::as_str).collect();
    let got = satisfying_tuples(e, &f, &vars)?;
    let mut expected = Vec::new();
    for b in all_tuples(e.size(), tuple.len()) {
        if synth.engine().type_of(&b, k)? == target {
            expected.push(b);
        }
    }
    if got != expected {
        return Err(SynthError::Unverified(format!("{} tuples satisfy it, {} expected", got.len(), expected.len())));
    }
    Ok(f)
}

fn all_tuples(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out.into_iter().flat_map(|t| (0..n).map(move |a| [t.clone(), vec![a]].concat())).collect();
    }
    out
}

/// A formula in the free variable `x` of rank at most `k` whose solution
/// set is the union of `blocks`, which must be classes of the rank-`k`
/// element partition with parameters `params`.
pub fn build_union_definition(
    e: &ExpandedStructure,
    blocks: &[Subset],
    k: usize,
    params: &[usize],
) -> Result<Formula, SynthError> {
    let x = Term::Var(var_name(0));
    let f = if blocks.is_empty() {
        Formula::not(Formula::eq(x.clone(), x))
    } else {
        let mut synth = Synth::new(e, params)?;
        let mut parts = Vec::with_capacity(blocks.len());
        for b in blocks {
            let rep = b.least().ok_or_else(|| SynthError::Unverified("empty block".into()))?;
            parts.push(synth.hintikka(&[rep], k)?);
        }
        Formula::or(parts)
    };
    let union = blocks.iter().fold(Subset::empty(), |acc, b| acc.union(b));
    let got = solution_set(e, &f)?;
    if got != union {
        return Err(SynthError::Unverified(format!("solution set {got}, expected {union}")));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::element_partition;
    use crate::structure::{gen_cycle, gen_linear_order};

    fn ex(s: &crate::structure::Structure) -> ExpandedStructure {
        ExpandedStructure::from(s)
    }

    #[test]
    fn rank_zero_is_the_diagram() {
        let l2 = ex(&gen_linear_order(2).unwrap());
        let h = hintikka(&l2, &[0], 0, &[]).unwrap();
        assert_eq!(h.to_string(), "~x < x");
        assert_eq!(h.quantifier_rank(), 0);
    }

    #[test]
    fn rank_one_isolates_endpoints() {
        let l3 = ex(&gen_linear_order(3).unwrap());
        let h = hintikka(&l3, &[0], 1, &[]).unwrap();
        assert!(h.quantifier_rank() <= 1);
        assert_eq!(solution_set(&l3, &h).unwrap(), Subset::from_indices([0]));
    }

    #[test]
    fn pairs_and_params() {
        let c4 = ex(&gen_cycle(4).unwrap());
        let h = hintikka(&c4, &[0, 2], 2, &[]).unwrap();
        assert_eq!(h.free_variables().len(), 2);
        let h = hintikka(&c4, &[1], 1, &[0]).unwrap();
        assert_eq!(solution_set(&c4, &h).unwrap(), Subset::from_indices([1]));
    }

    #[test]
    fn unions() {
        let l3 = ex(&gen_linear_order(3).unwrap());
        let blocks = element_partition(&l3, 1, &[]).unwrap();
        let f = build_union_definition(&l3, &blocks[..2], 1, &[]).unwrap();
        assert_eq!(solution_set(&l3, &f).unwrap(), Subset::from_indices([0, 1]));
        let none = build_union_definition(&l3, &[], 1, &[]).unwrap();
        assert_eq!(none.to_string(), "~x = x");
        let all = build_union_definition(&l3, &blocks, 1, &[]).unwrap();
        assert_eq!(solution_set(&l3, &all).unwrap(), Subset::full(3));
    }
}
