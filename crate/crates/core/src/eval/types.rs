//! Canonical quantifier-rank-k types over a relational expansion.
//!
//! For a tuple `u` of distinct elements outside the parameter list `P`:
//!
//! * `T_0(u)` is the atomic diagram of `P ++ u`, interned one position at a
//!   time (each diagram node stores its parent and the facts involving the
//!   newest position);
//! * `T_j(u)` pairs `T_0(u)` with the set of `T_{j-1}(u a)` over elements
//!   `a` outside `u` and `P`.
//!
//! Extensions by an element of `u` or `P` are left out: they are determined
//! by `T_{j-1}(u)`, which `T_j(u)` already determines. Tuples with repeated
//! entries or entries in `P` are reduced to their distinct free entries plus
//! a position pattern.
//!
//! Once `j` reaches the number `f` of elements outside `P ++ u`, `T_f(u)`
//! fixes the isomorphism type of `(M, P, u)`, so ranks are capped at `f`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, OnceLock};

use dashmap::DashMap;
use smallvec::SmallVec;

use super::EvalError;
use crate::structure::{ExpandedStructure, Structure};
use crate::subset::Subset;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Diag { parent: u32, facts: Box<[u64]> },
    Node { diag: u32, children: Box<[u32]> },
}

const ROOT: u32 = u32::MAX;

/// Hash-consing table for type values. Safe to share between threads;
/// equal values always receive the same id.
#[derive(Debug, Default)]
pub struct TypeInterner {
    map: DashMap<Key, u32>,
    next: AtomicU32,
}

impl TypeInterner {
    pub fn new() -> Arc<TypeInterner> {
        Arc::new(TypeInterner::default())
    }

    /// The process-wide table behind [`type_k`](super::type_k). It only
    /// grows.
    pub fn global() -> Arc<TypeInterner> {
        static GLOBAL: OnceLock<Arc<TypeInterner>> = OnceLock::new();
        GLOBAL.get_or_init(TypeInterner::new).clone()
    }

    fn intern(&self, key: Key) -> u32 {
        if let Some(id) = self.map.get(&key) {
            return *id;
        }
        *self.map.entry(key).or_insert_with(|| self.next.fetch_add(1, Ordering::Relaxed))
    }

    /// Number of distinct values interned so far.
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Where a position of a typed tuple points: a parameter or one of the
/// tuple's distinct free entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Param(u16),
    Free(u16),
}

/// The rank-k type of a tuple. Values from engines sharing an interner
/// compare equal exactly when the types are equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankKType {
    rank: usize,
    pattern: SmallVec<[Slot; 4]>,
    core: u32,
}

impl RankKType {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn arity(&self) -> usize {
        self.pattern.len()
    }
}

type Tuple = SmallVec<[u16; 8]>;

/// Type computation for one relational expansion and parameter list, with
/// memo tables that live as long as the engine.
pub struct TypeEngine {
    n: usize,
    base: Structure,
    preds: Vec<Subset>,
    params: Vec<usize>,
    is_param: Vec<bool>,
    interner: Arc<TypeInterner>,
    root_diag: u32,
    diag_memo: HashMap<Tuple, u32>,
    type_memo: HashMap<(Tuple, u16), u32>,
}

impl TypeEngine {
    /// Engine over `e` with parameters `params` in addition to the named
    /// parameters of `e`.
    pub fn new(e: &ExpandedStructure, params: &[usize]) -> Result<TypeEngine, EvalError> {
        TypeEngine::with_interner(e, params, TypeInterner::new())
    }

    pub fn with_interner(
        e: &ExpandedStructure,
        params: &[usize],
        interner: Arc<TypeInterner>,
    ) -> Result<TypeEngine, EvalError> {
        if !e.base().is_relational() {
            return Err(EvalError::NotRelational);
        }
        let n = e.size();
        let mut all: Vec<usize> = e.params().iter().map(|(_, v)| *v).collect();
        all.extend_from_slice(params);
        if let Some(&bad) = all.iter().find(|&&p| p >= n) {
            return Err(EvalError::ParamOutOfRange { index: bad, size: n });
        }
        let mut is_param = vec![false; n];
        for &p in &all {
            is_param[p] = true;
        }
        let mut engine = TypeEngine {
            n,
            base: e.base().clone(),
            preds: e.predicates().iter().map(|(_, s)| s.clone()).collect(),
            params: all,
            is_param,
            interner,
            root_diag: ROOT,
            diag_memo: HashMap::new(),
            type_memo: HashMap::new(),
        };
        let mut parent = ROOT;
        for m in 0..engine.params.len() {
            let facts = engine.facts(&[], m);
            parent = engine.interner.intern(Key::Diag { parent, facts });
        }
        engine.root_diag = parent;
        Ok(engine)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn params(&self) -> &[usize] {
        &self.params
    }

    pub fn interner(&self) -> &Arc<TypeInterner> {
        &self.interner
    }

    /// Element at position `i` of `P ++ u`.
    fn at(&self, u: &[u16], i: usize) -> usize {
        if i < self.params.len() {
            self.params[i]
        } else {
            u[i - self.params.len()] as usize
        }
    }

    /// Bit vector of the atomic facts of `P ++ u` that involve position `m`
    /// and otherwise only earlier positions.
    fn facts(&self, u: &[u16], m: usize) -> Box<[u64]> {
        let mut bits: Vec<u64> = Vec::new();
        let mut count = 0usize;
        let mut push = |b: bool| {
            if count.is_multiple_of(64) {
                bits.push(0);
            }
            if b {
                *bits.last_mut().unwrap() |= 1 << (count % 64);
            }
            count += 1;
        };
        let x = self.at(u, m);
        for i in 0..m {
            push(self.at(u, i) == x);
        }
        for p in &self.preds {
            push(p.contains(x));
        }
        let mut args: SmallVec<[usize; 4]> = SmallVec::new();
        for rel in self.base.relations() {
            let r = rel.arity();
            // Position tuples over 0..=m that use m at least once.
            let total = (m + 1).pow(r as u32);
            for code in 0..total {
                let mut c = code;
                let mut uses_m = false;
                args.clear();
                for _ in 0..r {
                    let pos = c % (m + 1);
                    c /= m + 1;
                    uses_m |= pos == m;
                    args.push(self.at(u, pos));
                }
                if uses_m {
                    push(rel.contains(&args));
                }
            }
        }
        bits.into()
    }

    fn diag(&mut self, u: &Tuple) -> u32 {
        if u.is_empty() {
            return self.root_diag;
        }
        if let Some(&d) = self.diag_memo.get(u) {
            return d;
        }
        let prefix: Tuple = u[..u.len() - 1].iter().copied().collect();
        let parent = self.diag(&prefix);
        let facts = self.facts(u, self.params.len() + u.len() - 1);
        let d = self.interner.intern(Key::Diag { parent, facts });
        self.diag_memo.insert(u.clone(), d);
        d
    }

    fn free_count(&self, len: usize) -> usize {
        let taken = self.is_param.iter().filter(|&&b| b).count();
        self.n - taken - len
    }

    /// Core type id of a tuple of distinct non-parameter elements.
    fn core(&mut self, u: &mut Tuple, j: usize) -> u32 {
        let r = j.min(self.free_count(u.len()));
        if r == 0 {
            return self.diag(u);
        }
        let key = (u.clone(), r as u16);
        if let Some(&t) = self.type_memo.get(&key) {
            return t;
        }
        let diag = self.diag(u);
        let mut children: Vec<u32> = Vec::new();
        for a in 0..self.n {
            if self.is_param[a] || u.contains(&(a as u16)) {
                continue;
            }
            u.push(a as u16);
            children.push(self.core(u, r - 1));
            u.pop();
        }
        children.sort_unstable();
        children.dedup();
        let t = self.interner.intern(Key::Node { diag, children: children.into() });
        self.type_memo.insert(key, t);
        t
    }

    /// The rank-`k` type of an arbitrary tuple.
    pub fn type_of(&mut self, tuple: &[usize], k: usize) -> Result<RankKType, EvalError> {
        let mut distinct: Tuple = SmallVec::new();
        let mut pattern: SmallVec<[Slot; 4]> = SmallVec::new();
        for &x in tuple {
            if x >= self.n {
                return Err(EvalError::ElementOutOfRange { index: x, size: self.n });
            }
            if let Some(p) = self.params.iter().position(|&p| p == x) {
                pattern.push(Slot::Param(p as u16));
            } else if let Some(i) = distinct.iter().position(|&d| d as usize == x) {
                pattern.push(Slot::Free(i as u16));
            } else {
                pattern.push(Slot::Free(distinct.len() as u16));
                distinct.push(x as u16);
            }
        }
        let core = self.core(&mut distinct, k);
        Ok(RankKType { rank: k, pattern, core })
    }

    /// Rank-`k` type of each element, `None` for parameters.
    pub fn element_types(&mut self, k: usize) -> Vec<Option<u32>> {
        (0..self.n)
            .map(|a| {
                if self.is_param[a] {
                    None
                } else {
                    let mut u: Tuple = SmallVec::from_slice(&[a as u16]);
                    Some(self.core(&mut u, k))
                }
            })
            .collect()
    }

    /// Rank-`k` type of the empty tuple, i.e. the sentence type of the
    /// expansion.
    pub fn sentence_type(&mut self, k: usize) -> RankKType {
        let core = self.core(&mut SmallVec::new(), k);
        RankKType { rank: k, pattern: SmallVec::new(), core }
    }
}
