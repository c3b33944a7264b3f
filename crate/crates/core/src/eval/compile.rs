//! Formulas compiled against an expansion: symbols resolved to indices,
//! variables to slots, shared subformulas to shared nodes.
//!
//! Quantifier nodes are memoized on the values of their free slots, so a
//! formula with heavy sharing is evaluated in time proportional to its
//! distinct nodes rather than its unshared tree.

use std::collections::{BTreeSet, HashMap};

use smallvec::SmallVec;

use super::EvalError;
use crate::formula::{Formula, Term};
use crate::structure::{ExpandedStructure, Structure, SymbolRef};
use crate::subset::Subset;

#[derive(Debug)]
enum CTerm {
    Slot(u16),
    Elem(usize),
    App(usize, Box<[CTerm]>),
}

#[derive(Debug)]
enum Node {
    Const(bool),
    Eq(CTerm, CTerm),
    Rel(usize, Box<[CTerm]>),
    Pred(usize, CTerm),
    Not(u32),
    And(Box<[u32]>),
    Or(Box<[u32]>),
    Implies(u32, u32),
    Quant { exists: bool, slot: u16, body: u32 },
}

#[derive(Debug)]
pub(crate) struct Program {
    base: Structure,
    nodes: Vec<Node>,
    root: u32,
    slots: Vec<String>,
    /// Free slots of each node, sorted.
    free: Vec<Box<[u16]>>,
    /// Whether a node mentions a subset predicate.
    uses_pred: Vec<bool>,
}

struct Compiler<'a> {
    e: &'a ExpandedStructure,
    nodes: Vec<Node>,
    free: Vec<Box<[u16]>>,
    uses_pred: Vec<bool>,
    slots: HashMap<String, u16>,
    slot_names: Vec<String>,
    memo: HashMap<*const Formula, u32>,
}

impl Compiler<'_> {
    fn slot(&mut self, v: &str) -> u16 {
        if let Some(&s) = self.slots.get(v) {
            return s;
        }
        let s = self.slot_names.len() as u16;
        self.slots.insert(v.to_string(), s);
        self.slot_names.push(v.to_string());
        s
    }

    fn term(&mut self, t: &Term, free: &mut BTreeSet<u16>) -> Result<CTerm, EvalError> {
        let n = self.e.size();
        Ok(match t {
            Term::Var(v) => {
                let s = self.slot(v);
                free.insert(s);
                CTerm::Slot(s)
            }
            Term::Param(i) if *i < n => CTerm::Elem(*i),
            Term::Param(i) => return Err(EvalError::ParamOutOfRange { index: *i, size: n }),
            Term::Const(c) => match self.e.base().signature().lookup(c) {
                Some(SymbolRef::Function { index, arity: 0 }) => CTerm::Elem(self.e.base().function(index).apply(&[])),
                Some(SymbolRef::Function { arity, .. }) => {
                    return Err(EvalError::Arity { symbol: c.clone(), expected: arity, found: 0 })
                }
                _ => CTerm::Elem(self.e.param(c).ok_or_else(|| EvalError::UnknownSymbol(c.clone()))?),
            },
            Term::App(f, args) => match self.e.base().signature().lookup(f) {
                Some(SymbolRef::Function { index, arity }) => {
                    if arity != args.len() {
                        return Err(EvalError::Arity { symbol: f.clone(), expected: arity, found: args.len() });
                    }
                    let args = args.iter().map(|a| self.term(a, free)).collect::<Result<Vec<_>, _>>()?;
                    CTerm::App(index, args.into())
                }
                _ => return Err(EvalError::UnknownSymbol(f.clone())),
            },
        })
    }

    fn push(&mut self, node: Node, free: BTreeSet<u16>, uses_pred: bool) -> u32 {
        self.nodes.push(node);
        self.free.push(free.into_iter().collect());
        self.uses_pred.push(uses_pred);
        (self.nodes.len() - 1) as u32
    }

    fn formula(&mut self, f: &Formula) -> Result<u32, EvalError> {
        if let Some(&id) = self.memo.get(&(f as *const _)) {
            return Ok(id);
        }
        let mut free = BTreeSet::new();
        let mut uses_pred = false;
        let node = match f {
            Formula::True => Node::Const(true),
            Formula::False => Node::Const(false),
            Formula::Eq(a, b) => Node::Eq(self.term(a, &mut free)?, self.term(b, &mut free)?),
            Formula::Rel(r, args) => match self.e.base().signature().lookup(r) {
                Some(SymbolRef::Relation { index, arity }) => {
                    if arity != args.len() {
                        return Err(EvalError::Arity { symbol: r.clone(), expected: arity, found: args.len() });
                    }
                    let args = args.iter().map(|a| self.term(a, &mut free)).collect::<Result<Vec<_>, _>>()?;
                    Node::Rel(index, args.into())
                }
                _ => return Err(EvalError::UnknownSymbol(r.clone())),
            },
            Formula::Pred(p, t) => {
                let index = self
                    .e
                    .predicates()
                    .iter()
                    .position(|(n, _)| n == p)
                    .ok_or_else(|| EvalError::UnknownSymbol(p.clone()))?;
                uses_pred = true;
                Node::Pred(index, self.term(t, &mut free)?)
            }
            Formula::Not(g) => {
                let id = self.formula(g)?;
                self.inherit(id, &mut free, &mut uses_pred);
                Node::Not(id)
            }
            Formula::And(gs) | Formula::Or(gs) => {
                let mut ids = Vec::with_capacity(gs.len());
                for g in gs.iter() {
                    let id = self.formula(g)?;
                    self.inherit(id, &mut free, &mut uses_pred);
                    ids.push(id);
                }
                if matches!(f, Formula::And(_)) {
                    Node::And(ids.into())
                } else {
                    Node::Or(ids.into())
                }
            }
            Formula::Implies(a, b) => {
                let (ia, ib) = (self.formula(a)?, self.formula(b)?);
                self.inherit(ia, &mut free, &mut uses_pred);
                self.inherit(ib, &mut free, &mut uses_pred);
                Node::Implies(ia, ib)
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let slot = self.slot(v);
                let id = self.formula(body)?;
                self.inherit(id, &mut free, &mut uses_pred);
                free.remove(&slot);
                Node::Quant { exists: matches!(f, Formula::Exists(..)), slot, body: id }
            }
        };
        let id = self.push(node, free, uses_pred);
        self.memo.insert(f as *const _, id);
        Ok(id)
    }

    fn inherit(&self, id: u32, free: &mut BTreeSet<u16>, uses_pred: &mut bool) {
        free.extend(self.free[id as usize].iter().copied());
        *uses_pred |= self.uses_pred[id as usize];
    }
}

impl Program {
    pub(crate) fn compile(e: &ExpandedStructure, f: &Formula) -> Result<Program, EvalError> {
        let mut c = Compiler {
            e,
            nodes: Vec::new(),
            free: Vec::new(),
            uses_pred: Vec::new(),
            slots: HashMap::new(),
            slot_names: Vec::new(),
            memo: HashMap::new(),
        };
        let root = c.formula(f)?;
        Ok(Program { base: e.base().clone(), nodes: c.nodes, root, slots: c.slot_names, free: c.free, uses_pred: c.uses_pred })
    }

    /// Slot of a variable, if the formula mentions it.
    pub(crate) fn slot_of(&self, v: &str) -> Option<u16> {
        self.slots.iter().position(|s| s == v).map(|i| i as u16)
    }

    /// Names of the root's free variables, in slot order.
    pub(crate) fn free_names(&self) -> Vec<&str> {
        self.free[self.root as usize].iter().map(|&s| self.slots[s as usize].as_str()).collect()
    }
}

type MemoKey = (u32, SmallVec<[u32; 4]>);

/// Evaluation state for one program: slot values, predicate extensions and
/// the quantifier memo.
pub(crate) struct Machine<'p> {
    prog: &'p Program,
    vals: Vec<u32>,
    preds: Vec<Subset>,
    /// Results of quantifier nodes that do not depend on predicates.
    memo: HashMap<MemoKey, bool>,
    /// Results that depend on the current predicate extensions.
    pred_memo: HashMap<MemoKey, bool>,
}

impl<'p> Machine<'p> {
    pub(crate) fn new(prog: &'p Program, preds: Vec<Subset>) -> Machine<'p> {
        Machine { prog, vals: vec![0; prog.slots.len()], preds, memo: HashMap::new(), pred_memo: HashMap::new() }
    }

    pub(crate) fn set_predicates(&mut self, preds: Vec<Subset>) {
        self.preds = preds;
        self.pred_memo.clear();
    }

    pub(crate) fn set(&mut self, slot: u16, value: usize) {
        self.vals[slot as usize] = value as u32;
    }

    pub(crate) fn run(&mut self) -> bool {
        self.eval(self.prog.root)
    }

    fn term(&self, t: &CTerm) -> usize {
        match t {
            CTerm::Slot(s) => self.vals[*s as usize] as usize,
            CTerm::Elem(e) => *e,
            CTerm::App(f, args) => {
                let args: SmallVec<[usize; 4]> = args.iter().map(|a| self.term(a)).collect();
                self.prog.base.function(*f).apply(&args)
            }
        }
    }

    fn eval(&mut self, id: u32) -> bool {
        let prog = self.prog;
        match &prog.nodes[id as usize] {
            Node::Const(b) => *b,
            Node::Eq(a, b) => self.term(a) == self.term(b),
            Node::Rel(r, args) => {
                let args: SmallVec<[usize; 4]> = args.iter().map(|a| self.term(a)).collect();
                prog.base.relation(*r).contains(&args)
            }
            Node::Pred(p, t) => self.preds[*p].contains(self.term(t)),
            Node::Not(g) => !self.eval(*g),
            Node::And(gs) => gs.iter().all(|&g| self.eval(g)),
            Node::Or(gs) => gs.iter().any(|&g| self.eval(g)),
            Node::Implies(a, b) => !self.eval(*a) || self.eval(*b),
            Node::Quant { exists, slot, body } => {
                let key: MemoKey = (id, prog.free[id as usize].iter().map(|&s| self.vals[s as usize]).collect());
                let pred = prog.uses_pred[id as usize];
                let cached = if pred { self.pred_memo.get(&key) } else { self.memo.get(&key) };
                if let Some(&r) = cached {
                    return r;
                }
                let saved = self.vals[*slot as usize];
                let n = prog.base.size();
                let mut result = !*exists;
                for a in 0..n {
                    self.vals[*slot as usize] = a as u32;
                    if self.eval(*body) == *exists {
                        result = *exists;
                        break;
                    }
                }
                self.vals[*slot as usize] = saved;
                if pred {
                    self.pred_memo.insert(key, result);
                } else {
                    self.memo.insert(key, result);
                }
                result
            }
        }
    }
}
