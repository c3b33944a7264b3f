//! First-order formulas over a signature, optionally mentioning unary subset
//! predicates (`A(x)`) and parameter constants (`@3`).
//!
//! Children are reference counted, so synthesized formulas can share
//! identical subformulas; every traversal in this module memoizes on node
//! identity and stays linear in the number of distinct nodes.

mod parse;
mod print;
pub mod synth;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

pub use parse::{parse, ParseError, ParseErrorKind, Vocabulary};
pub use print::print;
pub use synth::{build_union_definition, hintikka, SynthError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    /// A constant symbol: a nullary function of the signature or a named
    /// parameter constant of an expansion.
    Const(String),
    /// The parameter constant `@i` naming universe element `i`.
    Param(usize),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Const(_) | Term::Param(_) => {}
        }
    }

    fn collect_params(&self, out: &mut BTreeSet<usize>) {
        match self {
            Term::Param(p) => {
                out.insert(*p);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_params(out)),
            Term::Var(_) | Term::Const(_) => {}
        }
    }

    pub fn substitute(&self, map: &HashMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.substitute(map)).collect()),
            _ => self.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    /// Membership in a subset predicate.
    Pred(String, Term),
    Not(Arc<Formula>),
    And(Arc<[Formula]>),
    Or(Arc<[Formula]>),
    Implies(Arc<Formula>, Arc<Formula>),
    Forall(String, Arc<Formula>),
    Exists(String, Arc<Formula>),
}

/// The `i`-th name of the variable supply `x, y, z, x1, x2, ...`.
pub fn var_name(i: usize) -> String {
    match i {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        _ => format!("x{}", i - 2),
    }
}

/// Position of a name in the variable supply, if it belongs to it.
pub fn var_index(name: &str) -> Option<usize> {
    match name {
        "x" => Some(0),
        "y" => Some(1),
        "z" => Some(2),
        _ => name.strip_prefix('x')?.parse::<usize>().ok().filter(|&k| k >= 1 && !name[1..].starts_with('0')).map(|k| k + 2),
    }
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn rel(name: &str, args: Vec<Term>) -> Formula {
        Formula::Rel(name.to_string(), args)
    }

    pub fn pred(name: &str, t: Term) -> Formula {
        Formula::Pred(name.to_string(), t)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Arc::new(f))
    }

    /// Conjunction; the empty conjunction is `true` and a single conjunct is
    /// returned as is.
    pub fn and(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::True,
            1 => parts.pop().unwrap(),
            _ => Formula::And(parts.into()),
        }
    }

    /// Disjunction; the empty disjunction is `false`.
    pub fn or(mut parts: Vec<Formula>) -> Formula {
        match parts.len() {
            0 => Formula::False,
            1 => parts.pop().unwrap(),
            _ => Formula::Or(parts.into()),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Arc::new(a), Arc::new(b))
    }

    pub fn exists(v: &str, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), Arc::new(body))
    }

    pub fn forall(v: &str, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), Arc::new(body))
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => vec![f],
            Formula::And(fs) | Formula::Or(fs) => fs.iter().collect(),
            Formula::Implies(a, b) => vec![a, b],
            _ => Vec::new(),
        }
    }

    /// Maximum nesting depth of quantifiers.
    pub fn quantifier_rank(&self) -> usize {
        fn go(f: &Formula, memo: &mut HashMap<*const Formula, usize>) -> usize {
            if let Some(&r) = memo.get(&(f as *const _)) {
                return r;
            }
            let inner = f.children().into_iter().map(|c| go(c, memo)).max().unwrap_or(0);
            let r = match f {
                Formula::Forall(..) | Formula::Exists(..) => inner + 1,
                _ => inner,
            };
            memo.insert(f as *const _, r);
            r
        }
        go(self, &mut HashMap::new())
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        fn go(f: &Formula, memo: &mut HashMap<*const Formula, BTreeSet<String>>) -> BTreeSet<String> {
            if let Some(r) = memo.get(&(f as *const _)) {
                return r.clone();
            }
            let mut out = BTreeSet::new();
            match f {
                Formula::Eq(a, b) => {
                    a.collect_vars(&mut out);
                    b.collect_vars(&mut out);
                }
                Formula::Rel(_, args) => args.iter().for_each(|t| t.collect_vars(&mut out)),
                Formula::Pred(_, t) => t.collect_vars(&mut out),
                Formula::Forall(v, body) | Formula::Exists(v, body) => {
                    out = go(body, memo);
                    out.remove(v);
                }
                _ => {
                    for c in f.children() {
                        out.extend(go(c, memo));
                    }
                }
            }
            memo.insert(f as *const _, out.clone());
            out
        }
        go(self, &mut HashMap::new())
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Every variable name occurring free or bound.
    pub fn all_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Eq(a, b) => {
                a.collect_vars(&mut out);
                b.collect_vars(&mut out);
            }
            Formula::Rel(_, args) => args.iter().for_each(|t| t.collect_vars(&mut out)),
            Formula::Pred(_, t) => t.collect_vars(&mut out),
            Formula::Forall(v, _) | Formula::Exists(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Names of the subset predicates used.
    pub fn predicates(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Pred(p, _) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    /// Elements named by `@i` parameter constants.
    pub fn params(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Eq(a, b) => {
                a.collect_params(&mut out);
                b.collect_params(&mut out);
            }
            Formula::Rel(_, args) => args.iter().for_each(|t| t.collect_params(&mut out)),
            Formula::Pred(_, t) => t.collect_params(&mut out),
            _ => {}
        });
        out
    }

    /// Number of distinct nodes, counting shared subformulas once.
    pub fn dag_size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Number of nodes of the fully unshared tree, saturating.
    pub fn tree_size(&self) -> u64 {
        fn go(f: &Formula, memo: &mut HashMap<*const Formula, u64>) -> u64 {
            if let Some(&r) = memo.get(&(f as *const _)) {
                return r;
            }
            let r = f.children().into_iter().fold(1u64, |acc, c| acc.saturating_add(go(c, memo)));
            memo.insert(f as *const _, r);
            r
        }
        go(self, &mut HashMap::new())
    }

    /// Visit each distinct node once.
    fn visit(&self, f: &mut impl FnMut(&Formula)) {
        let mut seen: HashSet<*const Formula> = HashSet::new();
        let mut stack = vec![self];
        while let Some(g) = stack.pop() {
            if !seen.insert(g as *const _) {
                continue;
            }
            f(g);
            stack.extend(g.children());
        }
    }

    /// Simultaneous capture-avoiding substitution of terms for free
    /// variables.
    pub fn substitute(&self, map: &HashMap<String, Term>) -> Formula {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Eq(a, b) => Formula::Eq(a.substitute(map), b.substitute(map)),
            Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|t| t.substitute(map)).collect()),
            Formula::Pred(p, t) => Formula::Pred(p.clone(), t.substitute(map)),
            Formula::Not(f) => Formula::not(f.substitute(map)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute(map)).collect()),
            Formula::Implies(a, b) => Formula::implies(a.substitute(map), b.substitute(map)),
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let free = body.free_variables();
                let mut inner: HashMap<String, Term> =
                    map.iter().filter(|(k, _)| *k != v && free.contains(*k)).map(|(k, t)| (k.clone(), t.clone())).collect();
                let mut incoming = BTreeSet::new();
                for t in inner.values() {
                    t.collect_vars(&mut incoming);
                }
                let mut var = v.clone();
                if incoming.contains(v) {
                    let mut avoid = body.all_variables();
                    avoid.extend(incoming);
                    var = fresh_var(&avoid);
                    inner.insert(v.clone(), Term::Var(var.clone()));
                }
                let body = body.substitute(&inner);
                match self {
                    Formula::Forall(..) => Formula::forall(&var, body),
                    _ => Formula::exists(&var, body),
                }
            }
        }
    }

    /// Structural equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        alpha(self, other, &mut Vec::new())
    }
}

/// First name of the variable supply not in `avoid`.
pub fn fresh_var(avoid: &BTreeSet<String>) -> String {
    (0..).map(var_name).find(|v| !avoid.contains(v)).unwrap()
}

fn alpha(a: &Formula, b: &Formula, env: &mut Vec<(String, String)>) -> bool {
    use Formula::*;
    match (a, b) {
        (True, True) | (False, False) => true,
        (Eq(a1, a2), Eq(b1, b2)) => alpha_term(a1, b1, env) && alpha_term(a2, b2, env),
        (Rel(r, xs), Rel(s, ys)) => r == s && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| alpha_term(x, y, env)),
        (Pred(p, x), Pred(q, y)) => p == q && alpha_term(x, y, env),
        (Not(x), Not(y)) => alpha(x, y, env),
        (And(xs), And(ys)) | (Or(xs), Or(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| alpha(x, y, env))
        }
        (Implies(x1, x2), Implies(y1, y2)) => alpha(x1, y1, env) && alpha(x2, y2, env),
        (Forall(v, x), Forall(w, y)) | (Exists(v, x), Exists(w, y)) => {
            env.push((v.clone(), w.clone()));
            let r = alpha(x, y, env);
            env.pop();
            r
        }
        _ => false,
    }
}

fn alpha_term(a: &Term, b: &Term, env: &[(String, String)]) -> bool {
    match (a, b) {
        (Term::Var(v), Term::Var(w)) => {
            let lv = env.iter().rposition(|(x, _)| x == v);
            let lw = env.iter().rposition(|(_, y)| y == w);
            match (lv, lw) {
                (Some(i), Some(j)) => i == j,
                (None, None) => v == w,
                _ => false,
            }
        }
        (Term::Const(c), Term::Const(d)) => c == d,
        (Term::Param(p), Term::Param(q)) => p == q,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| alpha_term(x, y, env))
        }
        _ => false,
    }
}
