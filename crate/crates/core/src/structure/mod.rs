//! Finite first-order structures over a universe `0..n`.
//!
//! A [`Structure`] is immutable once built and cheap to clone; an
//! [`ExpandedStructure`] adds named subset predicates and parameter
//! constants on top of a base structure without copying it.

mod corpus;
mod gen;
mod text;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::caps::CapExceeded;
use crate::subset::Subset;

pub use gen::{
    gen_cycle, gen_finite_field, gen_finite_field_with_modulus, gen_linear_order,
    gen_membership_digraph, is_prime, least_irreducible,
};
pub use corpus::{corpus, corpus_names, corpus_structure};
pub(crate) use gen::membership_structure;
pub use text::{load_structure, print_structure};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("symbol `{0}` is declared more than once")]
    DuplicateSymbol(String),
    #[error("symbol `{symbol}` has invalid arity {arity}")]
    BadArity { symbol: String, arity: usize },
    #[error("symbol `{symbol}`: index {index} is outside the universe of size {size}")]
    IndexOutOfRange { symbol: String, index: usize, size: usize },
    #[error("symbol `{symbol}`: expected a tuple of length {expected}, found {found}")]
    TupleLength { symbol: String, expected: usize, found: usize },
    #[error("function not total: `{0}`")]
    NotTotal(String),
    #[error("function not single-valued: `{0}`")]
    NotSingleValued(String),
    #[error("the universe must contain at least one element")]
    EmptyUniverse,
    #[error("symbol `{0}` is too large to tabulate")]
    TooLarge(String),
    #[error("name `{0}` collides with an existing symbol")]
    NameCollision(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("polynomial is not irreducible of degree {0}")]
    Reducible(usize),
    #[error("structures have different signatures")]
    SignatureMismatch,
    #[error(transparent)]
    Cap(#[from] CapExceeded),
}

/// Reference to a symbol of a [`Signature`] by kind and position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolRef {
    Relation { index: usize, arity: usize },
    Function { index: usize, arity: usize },
}

/// Relation and function symbols with their arities, in declaration order.
/// Constants are functions of arity zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    relations: Vec<(String, usize)>,
    functions: Vec<(String, usize)>,
}

impl Signature {
    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    pub fn functions(&self) -> &[(String, usize)] {
        &self.functions
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<SymbolRef> {
        if let Some(index) = self.relations.iter().position(|(n, _)| n == name) {
            return Some(SymbolRef::Relation { index, arity: self.relations[index].1 });
        }
        self.functions
            .iter()
            .position(|(n, _)| n == name)
            .map(|index| SymbolRef::Function { index, arity: self.functions[index].1 })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.lookup(name).is_some()
    }
}

#[derive(Debug, Clone)]
enum Lookup {
    Dense(Vec<u64>),
    Sparse(HashSet<u64>),
}

/// Extension of a relation symbol.
#[derive(Debug, Clone)]
pub struct Relation {
    arity: usize,
    size: usize,
    tuples: Vec<Vec<usize>>,
    lookup: Lookup,
}

const DENSE_LIMIT: u64 = 1 << 24;

impl Relation {
    fn new(name: &str, size: usize, arity: usize, tuples: BTreeSet<Vec<usize>>) -> Result<Self, StructureError> {
        let cells = (size as u64)
            .checked_pow(arity as u32)
            .ok_or_else(|| StructureError::TooLarge(name.to_string()))?;
        let tuples: Vec<Vec<usize>> = tuples.into_iter().collect();
        let lookup = if cells <= DENSE_LIMIT {
            let mut bits = vec![0u64; (cells as usize).div_ceil(64)];
            for t in &tuples {
                let i = tuple_index(size, t);
                bits[(i / 64) as usize] |= 1 << (i % 64);
            }
            Lookup::Dense(bits)
        } else {
            Lookup::Sparse(tuples.iter().map(|t| tuple_index(size, t)).collect())
        };
        Ok(Relation { arity, size, tuples, lookup })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Tuples in lexicographic order.
    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        debug_assert_eq!(tuple.len(), self.arity);
        let i = tuple_index(self.size, tuple);
        match &self.lookup {
            Lookup::Dense(bits) => bits[(i / 64) as usize] & (1 << (i % 64)) != 0,
            Lookup::Sparse(set) => set.contains(&i),
        }
    }
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.tuples == other.tuples
    }
}

impl Eq for Relation {}

/// Total table of a function symbol, indexed in mixed radix with the first
/// argument most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionTable {
    arity: usize,
    size: usize,
    table: Vec<usize>,
}

impl FunctionTable {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn apply(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        self.table[tuple_index(self.size, args) as usize]
    }

    /// All `(arguments, value)` pairs in lexicographic argument order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, usize)> + '_ {
        self.table.iter().enumerate().map(|(i, &v)| (index_tuple(self.size, self.arity, i as u64), v))
    }
}

fn tuple_index(size: usize, tuple: &[usize]) -> u64 {
    tuple.iter().fold(0u64, |acc, &x| acc * size as u64 + x as u64)
}

fn index_tuple(size: usize, arity: usize, mut index: u64) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = (index % size as u64) as usize;
        index /= size as u64;
    }
    out
}

#[derive(Debug, PartialEq, Eq)]
struct Inner {
    name: String,
    size: usize,
    labels: Vec<Option<String>>,
    signature: Signature,
    relations: Vec<Relation>,
    functions: Vec<FunctionTable>,
}

/// A finite structure with universe `0..size`.
#[derive(Clone)]
pub struct Structure(Arc<Inner>);

impl Structure {
    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn signature(&self) -> &Signature {
        &self.0.signature
    }

    pub fn is_relational(&self) -> bool {
        self.0.signature.is_relational()
    }

    pub fn relation(&self, index: usize) -> &Relation {
        &self.0.relations[index]
    }

    pub fn relations(&self) -> &[Relation] {
        &self.0.relations
    }

    pub fn function(&self, index: usize) -> &FunctionTable {
        &self.0.functions[index]
    }

    pub fn functions(&self) -> &[FunctionTable] {
        &self.0.functions
    }

    pub fn relation_by_name(&self, name: &str) -> Option<&Relation> {
        match self.signature().lookup(name)? {
            SymbolRef::Relation { index, .. } => Some(self.relation(index)),
            SymbolRef::Function { .. } => None,
        }
    }

    pub fn function_by_name(&self, name: &str) -> Option<&FunctionTable> {
        match self.signature().lookup(name)? {
            SymbolRef::Function { index, .. } => Some(self.function(index)),
            SymbolRef::Relation { .. } => None,
        }
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.0.labels.get(i).and_then(|l| l.as_deref())
    }

    /// Label of `i` if present, else its index.
    pub fn display_element(&self, i: usize) -> String {
        self.label(i).map(str::to_string).unwrap_or_else(|| i.to_string())
    }

    /// Same structure under a different name.
    pub fn renamed(&self, name: &str) -> Structure {
        let inner = &self.0;
        Structure(Arc::new(Inner {
            name: name.to_string(),
            size: inner.size,
            labels: inner.labels.clone(),
            signature: inner.signature.clone(),
            relations: inner.relations.clone(),
            functions: inner.functions.clone(),
        }))
    }

    /// Replace every function symbol by its graph relation. Constants become
    /// singleton unary relations. Relational structures come back unchanged.
    pub fn relationalize(&self) -> Structure {
        if self.is_relational() {
            return self.clone();
        }
        let mut b = StructureBuilder::new(self.name(), self.size());
        for i in 0..self.size() {
            if let Some(l) = self.label(i) {
                b.label(i, l);
            }
        }
        let mut taken: HashSet<String> = self.signature().relations.iter().map(|(n, _)| n.clone()).collect();
        for ((name, arity), rel) in self.signature().relations.iter().zip(self.relations()) {
            b.relation(name, *arity, rel.tuples().iter().cloned());
        }
        for ((name, arity), f) in self.signature().functions.iter().zip(self.functions()) {
            let mut graph_name = graph_name(name, *arity);
            while taken.contains(&graph_name) {
                graph_name.push('\'');
            }
            taken.insert(graph_name.clone());
            let tuples = f.entries().map(|(mut args, v)| {
                args.push(v);
                args
            });
            b.relation(&graph_name, arity + 1, tuples);
        }
        b.build().expect("graph relations of a valid structure are valid")
    }

    /// Permute the universe: element `i` of `self` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Structure {
        let n = self.size();
        assert_eq!(perm.len(), n);
        let mut b = StructureBuilder::new(self.name(), n);
        for (i, &to) in perm.iter().enumerate() {
            if let Some(l) = self.label(i) {
                b.label(to, l);
            }
        }
        for ((name, arity), rel) in self.signature().relations.iter().zip(self.relations()) {
            b.relation(name, *arity, rel.tuples().iter().map(|t| t.iter().map(|&x| perm[x]).collect()));
        }
        for ((name, arity), f) in self.signature().functions.iter().zip(self.functions()) {
            let entries: Vec<_> = f
                .entries()
                .map(|(args, v)| (args.iter().map(|&x| perm[x]).collect(), perm[v]))
                .collect();
            b.function(name, *arity, entries);
        }
        b.build().expect("a permuted valid structure is valid")
    }
}

fn graph_name(name: &str, arity: usize) -> String {
    match name {
        "+" => "Add".into(),
        "*" => "Mul".into(),
        "-" => "Sub".into(),
        "0" if arity == 0 => "Zero".into(),
        "1" if arity == 0 => "One".into(),
        _ if arity == 0 => format!("Const_{name}"),
        _ => format!("Graph_{name}"),
    }
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Structure {}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Structure({}, |M|={})", self.name(), self.size())
    }
}

/// Accumulates a structure description; all validation happens in
/// [`StructureBuilder::build`].
#[derive(Debug, Clone)]
pub struct StructureBuilder {
    name: String,
    size: usize,
    labels: Vec<(usize, String)>,
    relations: Vec<(String, usize, Vec<Vec<usize>>)>,
    functions: Vec<(String, usize, FunctionEntries)>,
}

type FunctionEntries = Vec<(Vec<usize>, usize)>;

impl StructureBuilder {
    pub fn new(name: &str, size: usize) -> Self {
        StructureBuilder {
            name: name.to_string(),
            size,
            labels: Vec::new(),
            relations: Vec::new(),
            functions: Vec::new(),
        }
    }

    pub fn label(&mut self, i: usize, label: &str) -> &mut Self {
        self.labels.push((i, label.to_string()));
        self
    }

    pub fn relation<I>(&mut self, name: &str, arity: usize, tuples: I) -> &mut Self
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        self.relations.push((name.to_string(), arity, tuples.into_iter().collect()));
        self
    }

    pub fn function(&mut self, name: &str, arity: usize, entries: Vec<(Vec<usize>, usize)>) -> &mut Self {
        self.functions.push((name.to_string(), arity, entries));
        self
    }

    /// Tabulate a function from a closure over all argument tuples.
    pub fn function_from(&mut self, name: &str, arity: usize, f: impl Fn(&[usize]) -> usize) -> &mut Self {
        let cells = self.size.pow(arity as u32);
        let entries = (0..cells as u64)
            .map(|i| {
                let args = index_tuple(self.size, arity, i);
                let v = f(&args);
                (args, v)
            })
            .collect();
        self.function(name, arity, entries)
    }

    pub fn constant(&mut self, name: &str, value: usize) -> &mut Self {
        self.function(name, 0, vec![(Vec::new(), value)])
    }

    pub fn build(&self) -> Result<Structure, StructureError> {
        let n = self.size;
        if n == 0 {
            return Err(StructureError::EmptyUniverse);
        }
        let mut seen = HashSet::new();
        for name in self.relations.iter().map(|r| &r.0).chain(self.functions.iter().map(|f| &f.0)) {
            if !seen.insert(name.as_str()) {
                return Err(StructureError::DuplicateSymbol(name.clone()));
            }
        }
        let mut labels = vec![None; n];
        for (i, l) in &self.labels {
            if *i >= n {
                return Err(StructureError::IndexOutOfRange { symbol: "label".into(), index: *i, size: n });
            }
            labels[*i] = Some(l.clone());
        }
        let check_tuple = |name: &str, arity: usize, t: &[usize]| -> Result<(), StructureError> {
            if t.len() != arity {
                return Err(StructureError::TupleLength { symbol: name.into(), expected: arity, found: t.len() });
            }
            if let Some(&bad) = t.iter().find(|&&x| x >= n) {
                return Err(StructureError::IndexOutOfRange { symbol: name.into(), index: bad, size: n });
            }
            Ok(())
        };

        let mut signature = Signature::default();
        let mut relations = Vec::new();
        for (name, arity, tuples) in &self.relations {
            if *arity == 0 {
                return Err(StructureError::BadArity { symbol: name.clone(), arity: 0 });
            }
            let mut set = BTreeSet::new();
            for t in tuples {
                check_tuple(name, *arity, t)?;
                set.insert(t.clone());
            }
            relations.push(Relation::new(name, n, *arity, set)?);
            signature.relations.push((name.clone(), *arity));
        }

        let mut functions = Vec::new();
        for (name, arity, entries) in &self.functions {
            let cells = (n as u64)
                .checked_pow(*arity as u32)
                .filter(|&c| c <= DENSE_LIMIT)
                .ok_or_else(|| StructureError::TooLarge(name.clone()))? as usize;
            let mut table: Vec<Option<usize>> = vec![None; cells];
            for (args, v) in entries {
                check_tuple(name, *arity, args)?;
                check_tuple(name, 1, std::slice::from_ref(v))?;
                let slot = &mut table[tuple_index(n, args) as usize];
                match slot {
                    Some(old) if old != v => return Err(StructureError::NotSingleValued(name.clone())),
                    _ => *slot = Some(*v),
                }
            }
            let table: Option<Vec<usize>> = table.into_iter().collect();
            let table = table.ok_or_else(|| StructureError::NotTotal(name.clone()))?;
            functions.push(FunctionTable { arity: *arity, size: n, table });
            signature.functions.push((name.clone(), *arity));
        }

        Ok(Structure(Arc::new(Inner {
            name: self.name.clone(),
            size: n,
            labels,
            signature,
            relations,
            functions,
        })))
    }
}

/// A structure together with named subset predicates and named parameter
/// constants, i.e. the expansion `<M, A, ..., c, ...>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedStructure {
    base: Structure,
    predicates: Vec<(String, Subset)>,
    params: Vec<(String, usize)>,
}

impl ExpandedStructure {
    pub fn base(&self) -> &Structure {
        &self.base
    }

    pub fn size(&self) -> usize {
        self.base.size()
    }

    pub fn predicates(&self) -> &[(String, Subset)] {
        &self.predicates
    }

    pub fn params(&self) -> &[(String, usize)] {
        &self.params
    }

    pub fn predicate(&self, name: &str) -> Option<&Subset> {
        self.predicates.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn param(&self, name: &str) -> Option<usize> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    fn name_taken(&self, name: &str) -> bool {
        self.base.signature().contains(name)
            || self.predicates.iter().any(|(n, _)| n == name)
            || self.params.iter().any(|(n, _)| n == name)
    }

    pub fn with_predicate(mut self, name: &str, subset: Subset) -> Result<Self, StructureError> {
        if self.name_taken(name) {
            return Err(StructureError::NameCollision(name.to_string()));
        }
        if let Some(bad) = subset.iter().find(|&i| i >= self.size()) {
            return Err(StructureError::IndexOutOfRange { symbol: name.into(), index: bad, size: self.size() });
        }
        self.predicates.push((name.to_string(), subset));
        Ok(self)
    }

    pub fn with_param(mut self, name: &str, element: usize) -> Result<Self, StructureError> {
        if self.name_taken(name) {
            return Err(StructureError::NameCollision(name.to_string()));
        }
        if element >= self.size() {
            return Err(StructureError::IndexOutOfRange { symbol: name.into(), index: element, size: self.size() });
        }
        self.params.push((name.to_string(), element));
        Ok(self)
    }

    /// The relational counterpart: the base is relationalized, predicates and
    /// parameters are kept.
    pub fn relationalize(&self) -> ExpandedStructure {
        ExpandedStructure { base: self.base.relationalize(), ..self.clone() }
    }
}

impl From<Structure> for ExpandedStructure {
    fn from(base: Structure) -> Self {
        ExpandedStructure { base, predicates: Vec::new(), params: Vec::new() }
    }
}

impl From<&Structure> for ExpandedStructure {
    fn from(base: &Structure) -> Self {
        ExpandedStructure::from(base.clone())
    }
}

/// Expand `s` by named subset predicates and named parameter constants.
pub fn expand<P, Q>(s: &Structure, subsets: P, params: Q) -> Result<ExpandedStructure, StructureError>
where
    P: IntoIterator<Item = (String, Subset)>,
    Q: IntoIterator<Item = (String, usize)>,
{
    let mut e = ExpandedStructure::from(s);
    for (name, subset) in subsets {
        e = e.with_predicate(&name, subset)?;
    }
    for (name, element) in params {
        e = e.with_param(&name, element)?;
    }
    Ok(e)
}

/// An isomorphism `s -> t` as an image table, if one exists.
pub fn iso_check(s: &Structure, t: &Structure) -> Result<Option<Vec<usize>>, StructureError> {
    if s.signature() != t.signature() {
        return Err(StructureError::SignatureMismatch);
    }
    if s.size() != t.size() {
        return Ok(None);
    }
    Ok(crate::aut::find_isomorphism(s, t))
}
