use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::DefinabilityError;
use crate::eval::{assign, sat, solution_set, subset_solutions};
use crate::formula::{var_index, var_name, Formula, Term};
use crate::structure::Structure;
use crate::subset::Subset;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conversion {
    #[serde(serialize_with = "as_text")]
    pub sentence: Formula,
    /// Parameters the new sentence mentions beyond the given ones.
    pub added_params: Vec<usize>,
    /// Number of solutions of the input sentence other than the target.
    pub rivals: usize,
}

fn as_text<S: serde::Serializer>(f: &Formula, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&f.to_string())
}

/// Turn a sentence with finitely many solutions into one whose only
/// solution is `target`: for each rival solution, the least element of its
/// symmetric difference with `target` becomes a parameter, and a literal
/// saying on which side of the predicate it lies is conjoined.
pub fn alg_to_imp(s: &Structure, psi: &Formula, params: &[usize], target: &Subset) -> Result<Conversion, DefinabilityError> {
    let sols = subset_solutions(s, psi, params)?;
    if !sols.contains(target) {
        return Err(DefinabilityError::NotASolution(target.clone()));
    }
    let pred = psi.predicates().into_iter().next().unwrap_or_else(|| "A".to_string());
    let mut separators = BTreeSet::new();
    for rival in sols.iter().filter(|b| *b != target) {
        let a = target.symmetric_difference(rival).least().expect("distinct subsets differ somewhere");
        separators.insert(a);
    }
    let literals: Vec<Formula> = separators
        .iter()
        .map(|&a| {
            let atom = Formula::pred(&pred, Term::Param(a));
            if target.contains(a) {
                atom
            } else {
                Formula::not(atom)
            }
        })
        .collect();
    let sentence = if literals.is_empty() {
        psi.clone()
    } else {
        let mut parts = vec![psi.clone()];
        parts.extend(literals);
        Formula::and(parts)
    };
    let added: Vec<usize> = separators.into_iter().filter(|a| !params.contains(a)).collect();
    let mut all = params.to_vec();
    all.extend(&added);
    let check = subset_solutions(s, &sentence, &all)?;
    if check.as_slice() != std::slice::from_ref(target) {
        return Err(crate::formula::SynthError::Unverified(format!("{} solutions after conversion", check.len())).into());
    }
    Ok(Conversion { sentence, added_params: added, rivals: sols.len() - 1 })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PinnedElement {
    pub element: usize,
    /// Number of elements of the set preceding this one.
    pub position: usize,
    #[serde(serialize_with = "as_text")]
    pub formula: Formula,
}

/// Order two variable names by their place in the variable supply, other
/// names after supply names and alphabetically.
fn supply_order(a: &str, b: &str) -> std::cmp::Ordering {
    let key = |v: &str| (var_index(v).unwrap_or(usize::MAX), v.to_string());
    key(a).cmp(&key(b))
}

/// Given a definable set `A` (by `set_def` in one free variable) and a
/// definable strict linear order on it (by `order_def` in two free
/// variables, the earlier one in the variable supply being the smaller
/// element), define each element of `A` as the element of `A` preceded by
/// exactly `i` elements of `A`.
pub fn pin_elements(
    s: &Structure,
    set_def: &Formula,
    order_def: &Formula,
) -> Result<Vec<PinnedElement>, DefinabilityError> {
    let x = var_name(0);
    let set_free: Vec<String> = set_def.free_variables().into_iter().collect();
    if set_free.len() > 1 {
        return Err(DefinabilityError::FreeVariables { expected: 1, found: set_free });
    }
    let mut order_free: Vec<String> = order_def.free_variables().into_iter().collect();
    if order_free.len() != 2 {
        return Err(DefinabilityError::FreeVariables { expected: 2, found: order_free });
    }
    order_free.sort_by(|a, b| supply_order(a, b));
    let (lo, hi) = (order_free[0].clone(), order_free[1].clone());

    // Put the set's free variable at `x`.
    let set_x = match set_free.first() {
        Some(v) if *v != x => set_def.substitute(&HashMap::from([(v.clone(), Term::Var(x.clone()))])),
        _ => set_def.clone(),
    };
    let a_set = solution_set(s, &set_x)?;
    if a_set.is_empty() {
        return Err(DefinabilityError::EmptySet);
    }

    let elems: Vec<usize> = a_set.iter().collect();
    let prec = |a: usize, b: usize| sat(s, order_def, &assign([(lo.as_str(), a), (hi.as_str(), b)]));
    for &a in &elems {
        if prec(a, a)? {
            return Err(DefinabilityError::NotLinearOrder(format!("{a} precedes itself")));
        }
        for &b in &elems {
            if a != b && prec(a, b)? == prec(b, a)? {
                return Err(DefinabilityError::NotLinearOrder(format!("{a} and {b} are not strictly comparable")));
            }
            for &c in &elems {
                if prec(a, b)? && prec(b, c)? && !prec(a, c)? {
                    return Err(DefinabilityError::NotLinearOrder(format!("{a} < {b} < {c} but not {a} < {c}")));
                }
            }
        }
    }
    let mut ranked: Vec<(usize, usize)> = Vec::new();
    for &a in &elems {
        let mut before = 0;
        for &b in &elems {
            if prec(b, a)? {
                before += 1;
            }
        }
        ranked.push((before, a));
    }
    ranked.sort_unstable();

    let mut avoid = set_x.all_variables();
    avoid.extend(order_def.all_variables());
    avoid.insert(x.clone());
    let fresh: Vec<String> = (1..).map(var_name).filter(|v| !avoid.contains(v)).take(elems.len()).collect();
    let in_set = |v: &str| set_x.substitute(&HashMap::from([(x.clone(), Term::Var(v.to_string()))]));
    let before = |v: &str| {
        order_def.substitute(&HashMap::from([
            (lo.clone(), Term::Var(v.to_string())),
            (hi.clone(), Term::Var(x.clone())),
        ]))
    };
    // At least `i` elements of the set precede `x`.
    let at_least = |i: usize| -> Formula {
        let ys = &fresh[..i];
        let mut body = Vec::new();
        for (j, y) in ys.iter().enumerate() {
            for z in &ys[j + 1..] {
                body.push(Formula::not(Formula::eq(Term::Var(y.clone()), Term::Var(z.clone()))));
            }
        }
        for y in ys {
            body.push(in_set(y));
            body.push(before(y));
        }
        ys.iter().rev().fold(Formula::and(body), |f, y| Formula::exists(y, f))
    };

    let last = elems.len() - 1;
    let mut out = Vec::with_capacity(elems.len());
    for (i, &(_, a)) in ranked.iter().enumerate() {
        let formula = if elems.len() == 1 {
            set_x.clone()
        } else {
            let mut parts = vec![set_x.clone()];
            if i > 0 {
                parts.push(at_least(i));
            }
            if i < last {
                parts.push(Formula::not(at_least(i + 1)));
            }
            Formula::and(parts)
        };
        let got = solution_set(s, &formula)?;
        if got != Subset::from_indices([a]) {
            return Err(crate::formula::SynthError::Unverified(format!("pinning formula for {a} defines {got}")).into());
        }
        out.push(PinnedElement { element: a, position: i, formula });
    }
    let union = Formula::or(out.iter().map(|p| p.formula.clone()).collect());
    if solution_set(s, &union)? != a_set {
        return Err(crate::formula::SynthError::Unverified("pinning formulas do not cover the set".into()).into());
    }
    Ok(out)
}
