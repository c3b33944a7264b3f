//! Independent oracles shared by the integration tests: a tree-walking
//! evaluator, brute-force automorphisms, an Ehrenfeucht-Fraisse game
//! solver and random formula and structure generators.
#![allow(dead_code)]

use std::collections::HashMap;

use defilab::formula::{Formula, Term};
use defilab::structure::{Structure, StructureBuilder};
use defilab::Subset;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Env = HashMap<String, usize>;

fn term(s: &Structure, t: &Term, env: &Env) -> usize {
    match t {
        Term::Var(v) => env[v],
        Term::Param(i) => *i,
        Term::Const(c) => s.function_by_name(c).expect("constant").apply(&[]),
        Term::App(f, args) => {
            let vals: Vec<usize> = args.iter().map(|a| term(s, a, env)).collect();
            s.function_by_name(f).expect("function").apply(&vals)
        }
    }
}

/// Satisfaction by direct recursion on the formula tree.
pub fn ref_sat(s: &Structure, preds: &[(&str, &Subset)], f: &Formula, env: &mut Env) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Eq(a, b) => term(s, a, env) == term(s, b, env),
        Formula::Rel(r, args) => {
            let vals: Vec<usize> = args.iter().map(|a| term(s, a, env)).collect();
            s.relation_by_name(r).expect("relation").contains(&vals)
        }
        Formula::Pred(p, t) => {
            let v = term(s, t, env);
            preds.iter().find(|(n, _)| n == p).expect("predicate").1.contains(v)
        }
        Formula::Not(g) => !ref_sat(s, preds, g, env),
        Formula::And(gs) => gs.iter().all(|g| ref_sat(s, preds, g, env)),
        Formula::Or(gs) => gs.iter().any(|g| ref_sat(s, preds, g, env)),
        Formula::Implies(a, b) => !ref_sat(s, preds, a, env) || ref_sat(s, preds, b, env),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let saved = env.get(v).copied();
            let want = matches!(f, Formula::Exists(..));
            let mut result = !want;
            for a in 0..s.size() {
                env.insert(v.clone(), a);
                if ref_sat(s, preds, g, env) == want {
                    result = want;
                    break;
                }
            }
            match saved {
                Some(x) => env.insert(v.clone(), x),
                None => env.remove(v),
            };
            result
        }
    }
}

/// Solution set of a formula in `x` by the reference evaluator.
pub fn ref_solutions(s: &Structure, preds: &[(&str, &Subset)], f: &Formula) -> Subset {
    let var = f.free_variables().into_iter().next().unwrap_or_else(|| "x".into());
    (0..s.size()).filter(|&a| ref_sat(s, preds, f, &mut Env::from([(var.clone(), a)]))).collect()
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn is_automorphism(s: &Structure, p: &[usize]) -> bool {
    s.relations().iter().all(|r| r.tuples().iter().all(|t| r.contains(&t.iter().map(|&a| p[a]).collect::<Vec<_>>())))
        && s.functions().iter().all(|f| f.entries().all(|(args, v)| f.apply(&args.iter().map(|&a| p[a]).collect::<Vec<_>>()) == p[v]))
}

/// Every automorphism fixing `fixed` pointwise, by trying all permutations.
pub fn brute_automorphisms(s: &Structure, fixed: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = permutations(s.size())
        .into_iter()
        .filter(|p| fixed.iter().all(|&a| p[a] == a) && is_automorphism(s, p))
        .collect();
    out.sort();
    out
}

pub fn orbits_of(perms: &[Vec<usize>], n: usize) -> Vec<Subset> {
    let mut seen = Subset::empty();
    let mut out = Vec::new();
    for a in 0..n {
        if !seen.contains(a) {
            let orbit: Subset = perms.iter().map(|p| p[a]).collect();
            seen = seen.union(&orbit);
            out.push(orbit);
        }
    }
    out
}

pub fn subset_orbit(perms: &[Vec<usize>], a: &Subset) -> Vec<Subset> {
    let mut out: Vec<Subset> = perms.iter().map(|p| a.iter().map(|i| p[i]).collect()).collect();
    out.sort();
    out.dedup();
    out
}

/// Partition of all subsets of `0..n` into orbits, ordered by least member.
pub fn subset_orbits(perms: &[Vec<usize>], n: usize) -> Vec<Vec<Subset>> {
    let mut seen = vec![false; 1 << n];
    let mut out = Vec::new();
    for mask in 0..1u64 << n {
        if !seen[mask as usize] {
            let orbit = subset_orbit(perms, &Subset::from_mask(mask));
            for b in &orbit {
                seen[b.to_mask().unwrap() as usize] = true;
            }
            out.push(orbit);
        }
    }
    out
}

/// One side of an Ehrenfeucht-Fraisse game: a relational structure with an
/// optional subset predicate.
pub struct Side<'a> {
    pub s: &'a Structure,
    pub pred: Option<&'a Subset>,
}

fn partial_iso(a: &Side, b: &Side, xs: &[usize], ys: &[usize]) -> bool {
    let m = xs.len();
    for i in 0..m {
        for j in 0..m {
            if (xs[i] == xs[j]) != (ys[i] == ys[j]) {
                return false;
            }
        }
        if let (Some(p), Some(q)) = (a.pred, b.pred) {
            if p.contains(xs[i]) != q.contains(ys[i]) {
                return false;
            }
        }
    }
    for (ra, rb) in a.s.relations().iter().zip(b.s.relations()) {
        let k = ra.arity();
        let total = m.pow(k as u32);
        for code in 0..total {
            let mut c = code;
            let mut ta = Vec::with_capacity(k);
            let mut tb = Vec::with_capacity(k);
            for _ in 0..k {
                ta.push(xs[c % m]);
                tb.push(ys[c % m]);
                c /= m;
            }
            if ra.contains(&ta) != rb.contains(&tb) {
                return false;
            }
        }
    }
    true
}

/// Whether the duplicator survives `k` rounds from the position
/// `xs -> ys`.
pub fn ef_game(a: &Side, b: &Side, xs: &mut Vec<usize>, ys: &mut Vec<usize>, k: usize) -> bool {
    if !partial_iso(a, b, xs, ys) {
        return false;
    }
    if k == 0 {
        return true;
    }
    for flip in [false, true] {
        let (n1, n2) = if flip { (b.s.size(), a.s.size()) } else { (a.s.size(), b.s.size()) };
        for c in 0..n1 {
            let mut answered = false;
            for d in 0..n2 {
                let (x, y) = if flip { (d, c) } else { (c, d) };
                xs.push(x);
                ys.push(y);
                let ok = ef_game(a, b, xs, ys, k - 1);
                xs.pop();
                ys.pop();
                if ok {
                    answered = true;
                    break;
                }
            }
            if !answered {
                return false;
            }
        }
    }
    true
}

/// Rank-`k` equivalence of `<s, A, P>` and `<s, B, P>`.
pub fn ef_subsets(s: &Structure, a: &Subset, b: &Subset, params: &[usize], k: usize) -> bool {
    let (l, r) = (Side { s, pred: Some(a) }, Side { s, pred: Some(b) });
    ef_game(&l, &r, &mut params.to_vec(), &mut params.to_vec(), k)
}

/// Rank-`k` equivalence of elements `a` and `b` over `params`.
pub fn ef_elements(s: &Structure, a: usize, b: usize, params: &[usize], k: usize) -> bool {
    let side = Side { s, pred: None };
    let mut xs = params.to_vec();
    let mut ys = params.to_vec();
    xs.push(a);
    ys.push(b);
    ef_game(&side, &side, &mut xs, &mut ys, k)
}

/// Classes of `0..n` under an equivalence given as a predicate.
pub fn classes(n: usize, mut same: impl FnMut(usize, usize) -> bool) -> Vec<Subset> {
    let mut reps: Vec<usize> = Vec::new();
    let mut out: Vec<Subset> = Vec::new();
    for a in 0..n {
        match reps.iter().position(|&r| same(r, a)) {
            Some(i) => out[i].insert(a),
            None => {
                reps.push(a);
                out.push(Subset::from_indices([a]));
            }
        }
    }
    out
}

/// Symbols available to the random formula generator.
#[derive(Clone, Debug, Default)]
pub struct Symbols {
    pub relations: Vec<(String, usize)>,
    pub functions: Vec<(String, usize)>,
    pub predicates: Vec<String>,
    pub params: usize,
}

impl Symbols {
    pub fn of(s: &Structure) -> Symbols {
        Symbols {
            relations: s.signature().relations().to_vec(),
            functions: s.signature().functions().to_vec(),
            predicates: Vec::new(),
            params: s.size(),
        }
    }
}

const VARS: [&str; 4] = ["x", "y", "z", "x1"];

pub fn random_term(rng: &mut ChaCha8Rng, sym: &Symbols, bound: &[String], depth: usize) -> Term {
    let roll = rng.gen_range(0..10);
    if depth > 0 && roll < 3 {
        if let Some((f, k)) = sym.functions.iter().filter(|(_, k)| *k > 0).collect::<Vec<_>>().choose(rng) {
            return Term::App(f.clone(), (0..*k).map(|_| random_term(rng, sym, bound, depth - 1)).collect());
        }
    }
    if roll == 3 {
        if let Some((c, _)) = sym.functions.iter().filter(|(_, k)| *k == 0).collect::<Vec<_>>().choose(rng) {
            return Term::Const(c.clone());
        }
    }
    if roll == 4 && sym.params > 0 {
        return Term::Param(rng.gen_range(0..sym.params));
    }
    match bound.choose(rng) {
        Some(v) => Term::Var(v.clone()),
        None => Term::Var(VARS[rng.gen_range(0..VARS.len())].to_string()),
    }
}

/// A random formula; free variables come from `x, y, z, x1`.
pub fn random_formula(rng: &mut ChaCha8Rng, sym: &Symbols, depth: usize) -> Formula {
    let all: Vec<String> = VARS.iter().map(|v| v.to_string()).collect();
    random_formula_in(rng, sym, &all, depth)
}

pub fn random_formula_in(rng: &mut ChaCha8Rng, sym: &Symbols, vars: &[String], depth: usize) -> Formula {
    let leaf = depth == 0 || rng.gen_range(0..4) == 0;
    if leaf {
        return match rng.gen_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            2 | 3 => Formula::eq(random_term(rng, sym, vars, 2), random_term(rng, sym, vars, 2)),
            4 if !sym.predicates.is_empty() => {
                Formula::pred(sym.predicates.choose(rng).unwrap(), random_term(rng, sym, vars, 1))
            }
            _ => match sym.relations.choose(rng) {
                Some((r, k)) => Formula::rel(r, (0..*k).map(|_| random_term(rng, sym, vars, 1)).collect()),
                None => Formula::eq(random_term(rng, sym, vars, 2), random_term(rng, sym, vars, 2)),
            },
        };
    }
    match rng.gen_range(0..6) {
        0 => Formula::not(random_formula_in(rng, sym, vars, depth - 1)),
        1 | 2 => {
            let parts = (0..rng.gen_range(2..4)).map(|_| random_formula_in(rng, sym, vars, depth - 1)).collect();
            if rng.gen_bool(0.5) {
                Formula::and(parts)
            } else {
                Formula::or(parts)
            }
        }
        3 => Formula::implies(random_formula_in(rng, sym, vars, depth - 1), random_formula_in(rng, sym, vars, depth - 1)),
        _ => {
            let v = vars[rng.gen_range(0..vars.len())].clone();
            let body = random_formula_in(rng, sym, vars, depth - 1);
            if rng.gen_bool(0.5) {
                Formula::exists(&v, body)
            } else {
                Formula::forall(&v, body)
            }
        }
    }
}

/// A random relational structure with one binary and one unary relation.
pub fn random_structure(rng: &mut ChaCha8Rng, n: usize) -> Structure {
    let mut b = StructureBuilder::new("random", n);
    let density = rng.gen_range(0.1..0.6);
    let edges: Vec<Vec<usize>> =
        (0..n).flat_map(|i| (0..n).map(move |j| vec![i, j])).filter(|_| rng.gen_bool(density)).collect();
    b.relation("E", 2, edges);
    let unary: Vec<Vec<usize>> = (0..n).filter(|_| rng.gen_bool(0.4)).map(|i| vec![i]).collect();
    b.relation("U", 1, unary);
    b.build().unwrap()
}

/// A random structure with a unary function `f`, a binary function `g` and
/// a constant `c`, for exercising terms.
pub fn random_algebra(rng: &mut ChaCha8Rng, n: usize) -> Structure {
    let mut b = StructureBuilder::new("algebra", n);
    let f: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let g: Vec<usize> = (0..n * n).map(|_| rng.gen_range(0..n)).collect();
    b.function_from("f", 1, move |a| f[a[0]]);
    b.function_from("g", 2, move |a| g[a[0] * n + a[1]]);
    b.constant("c", rng.gen_range(0..n));
    let edges: Vec<Vec<usize>> = (0..n).flat_map(|i| (0..n).map(move |j| vec![i, j])).filter(|_| rng.gen_bool(0.3)).collect();
    b.relation("R", 2, edges);
    b.build().unwrap()
}

/// Whether `p` maps `s` isomorphically onto `t` (same signature order).
pub fn is_isomorphism(s: &Structure, t: &Structure, p: &[usize]) -> bool {
    let mut seen = Subset::empty();
    p.iter().for_each(|&a| seen.insert(a));
    seen.len() == s.size()
        && s.size() == t.size()
        && s.relations().iter().zip(t.relations()).all(|(r, q)| {
            r.tuples().len() == q.tuples().len()
                && r.tuples().iter().all(|tp| q.contains(&tp.iter().map(|&a| p[a]).collect::<Vec<_>>()))
        })
        && s.functions().iter().zip(t.functions()).all(|(f, g)| {
            f.entries().all(|(args, v)| g.apply(&args.iter().map(|&a| p[a]).collect::<Vec<_>>()) == p[v])
        })
}

/// Every bijection from `s` onto `t` that is an isomorphism.
pub fn brute_isomorphisms(s: &Structure, t: &Structure) -> Vec<Vec<usize>> {
    if s.size() != t.size() {
        return Vec::new();
    }
    permutations(s.size()).into_iter().filter(|p| is_isomorphism(s, t, p)).collect()
}

/// Extensionality and well-foundedness of the single binary relation,
/// checked directly.
pub fn ext_wf(s: &Structure) -> bool {
    let n = s.size();
    let r = &s.relations()[0];
    let members: Vec<Subset> = (0..n).map(|b| (0..n).filter(|&a| r.contains(&[a, b])).collect()).collect();
    let extensional = (0..n).all(|a| (a + 1..n).all(|b| members[a] != members[b]));
    // Repeatedly strip elements all of whose members are already stripped.
    let mut done = Subset::empty();
    loop {
        let next: Vec<usize> = (0..n).filter(|&a| !done.contains(a) && members[a].is_subset(&done)).collect();
        if next.is_empty() {
            break;
        }
        next.into_iter().for_each(|a| done.insert(a));
    }
    extensional && done.len() == n
}
