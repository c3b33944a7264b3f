//! Hereditarily finite sets with the Ackermann ordering.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::structure::Structure;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HfError {
    #[error("Ackermann code of {0} does not fit in 64 bits")]
    Overflow(String),
}

/// A hereditarily finite set.
///
/// Elements are kept sorted and duplicate free, so structural equality is
/// set equality. Sets are ordered by their Ackermann codes
/// `code(x) = sum of 2^code(y) over y in x`, computed structurally so that
/// the order is available even when codes do not fit in a machine word.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct HFSet(Arc<[HFSet]>);

impl HFSet {
    pub fn empty() -> HFSet {
        HFSet(Arc::from(Vec::new()))
    }

    pub fn from_elements<I: IntoIterator<Item = HFSet>>(items: I) -> HFSet {
        let mut v: Vec<HFSet> = items.into_iter().collect();
        v.sort();
        v.dedup();
        HFSet(Arc::from(v))
    }

    pub fn singleton(x: HFSet) -> HFSet {
        HFSet(Arc::from(vec![x]))
    }

    /// Members in increasing Ackermann order.
    pub fn elements(&self) -> &[HFSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &HFSet) -> bool {
        self.0.binary_search(x).is_ok()
    }

    /// Von Neumann rank.
    pub fn rank(&self) -> usize {
        self.0.iter().map(|x| x.rank() + 1).max().unwrap_or(0)
    }

    pub fn encode(&self) -> Result<u64, HfError> {
        let mut code = 0u64;
        for x in self.0.iter() {
            let c = x.encode()?;
            if c >= 64 {
                return Err(HfError::Overflow(self.to_string()));
            }
            code |= 1 << c;
        }
        Ok(code)
    }

    pub fn decode(code: u64) -> HFSet {
        let items = (0..64).filter(|b| code & (1 << b) != 0).map(HFSet::decode);
        HFSet::from_elements(items)
    }

    /// Members, members of members, and so on; sorted, without `self`.
    pub fn transitive_closure(&self) -> Vec<HFSet> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<HFSet> = self.0.to_vec();
        while let Some(x) = stack.pop() {
            if seen.insert(x.clone()) {
                stack.extend(x.0.iter().cloned());
            }
        }
        seen.into_iter().collect()
    }

    /// True when every member of a member is a member.
    pub fn is_transitive(&self) -> bool {
        self.0.iter().all(|x| x.0.iter().all(|y| self.contains(y)))
    }
}

impl Ord for HFSet {
    fn cmp(&self, other: &Self) -> Ordering {
        // Compare as binary numbers: the largest differing element decides.
        let mut a = self.0.iter().rev();
        let mut b = other.0.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) => match x.cmp(y) {
                    Ordering::Equal => continue,
                    ord => return ord,
                },
            }
        }
    }
}

impl PartialOrd for HFSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for HFSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn hf_encode(x: &HFSet) -> Result<u64, HfError> {
    x.encode()
}

pub fn hf_decode(code: u64) -> HFSet {
    HFSet::decode(code)
}

/// Number of elements of `V_m`, if it fits in `usize`.
pub fn vn_size(m: usize) -> Option<usize> {
    let mut size: usize = 0;
    for _ in 0..m {
        if size >= usize::BITS as usize {
            return None;
        }
        size = 1usize << size;
    }
    Some(size)
}

/// The elements of `V_m` in Ackermann order. These are exactly the sets
/// with codes `0..|V_m|`.
pub fn vn(m: usize) -> Vec<HFSet> {
    let size = vn_size(m).expect("V_m too large to list");
    (0..size as u64).map(HFSet::decode).collect()
}

/// Check that the single binary relation of `s` is extensional and
/// well-founded: distinct vertices have distinct in-neighbourhoods and there
/// is no directed cycle.
pub fn check_extensional_wf(s: &Structure) -> bool {
    let rels = s.relations();
    if rels.len() != 1 || rels[0].arity() != 2 || !s.signature().functions().is_empty() {
        return false;
    }
    let n = s.size();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in rels[0].tuples() {
        members[t[1]].push(t[0]);
    }
    let distinct: BTreeSet<&Vec<usize>> = members.iter().collect();
    distinct.len() == n && topological_order(&members).is_some()
}

/// Vertices ordered so that members come before the sets containing them.
fn topological_order(members: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = members.len();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < members[v].len() {
                let u = members[v][*next];
                *next += 1;
                match state[u] {
                    0 => {
                        state[u] = 1;
                        stack.push((u, 0));
                    }
                    1 => return None,
                    _ => {}
                }
            } else {
                state[v] = 2;
                order.push(v);
                stack.pop();
            }
        }
    }
    Some(order)
}

/// Mostowski collapse of a well-founded digraph whose single binary
/// relation reads `(a, b)` as "a is a member of b". Returns the set assigned
/// to each vertex, or `None` when the relation has a cycle.
pub fn mostowski_collapse(s: &Structure) -> Option<Vec<HFSet>> {
    let rels = s.relations();
    if rels.len() != 1 || rels[0].arity() != 2 {
        return None;
    }
    let n = s.size();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in rels[0].tuples() {
        members[t[1]].push(t[0]);
    }
    let order = topological_order(&members)?;
    let mut value: HashMap<usize, HFSet> = HashMap::new();
    for v in order {
        let set = HFSet::from_elements(members[v].iter().map(|u| value[u].clone()));
        value.insert(v, set);
    }
    Some((0..n).map(|v| value[&v].clone()).collect())
}
