//! Automorphism groups, pointwise stabilizers and orbits.
//!
//! Groups are enumerated in full. At the sizes this toolkit works with that
//! is cheap, and orbit computations for subsets become a plain loop over the
//! group elements.

mod search;

use std::collections::BTreeSet;

use crate::structure::Structure;
use crate::subset::Subset;

/// Every automorphism of a structure that fixes a parameter set pointwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationSet {
    size: usize,
    perms: Vec<Vec<usize>>,
    fixed: Vec<usize>,
}

impl PermutationSet {
    /// Members as image tables, in lexicographic order.
    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.perms.len() == 1
    }

    pub fn contains(&self, perm: &[usize]) -> bool {
        self.perms.binary_search_by(|p| p.as_slice().cmp(perm)).is_ok()
    }

    /// Closure under composition and inverses, with the identity present.
    pub fn is_group(&self) -> bool {
        let id: Vec<usize> = (0..self.size).collect();
        if !self.contains(&id) {
            return false;
        }
        self.perms.iter().all(|p| {
            let mut inv = vec![0; self.size];
            for (i, &x) in p.iter().enumerate() {
                inv[x] = i;
            }
            self.contains(&inv) && self.perms.iter().all(|q| self.contains(&compose(p, q)))
        })
    }

    /// Orbit partition of the universe, blocks ordered by least element.
    pub fn orbits(&self) -> Vec<Subset> {
        let mut seen = vec![false; self.size];
        let mut out = Vec::new();
        for v in 0..self.size {
            if seen[v] {
                continue;
            }
            let orbit: Subset = self.perms.iter().map(|p| p[v]).collect();
            for x in orbit.iter() {
                seen[x] = true;
            }
            out.push(orbit);
        }
        out
    }

    /// Images of `a` under the group, deduplicated, in numeric order.
    pub fn orbit_of_subset(&self, a: &Subset) -> Vec<Subset> {
        let images: BTreeSet<Subset> = self.perms.iter().map(|p| a.map(p)).collect();
        images.into_iter().collect()
    }

    pub fn fixes_setwise(&self, a: &Subset) -> bool {
        self.perms.iter().all(|p| &a.map(p) == a)
    }
}

/// `p` after `q`: `i -> p[q[i]]`.
fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&i| p[i]).collect()
}

/// All automorphisms of `s` fixing each element of `params`.
pub fn automorphisms(s: &Structure, params: &[usize]) -> PermutationSet {
    let mut fixed = params.to_vec();
    fixed.sort_unstable();
    fixed.dedup();
    let perms = search::isomorphisms(s, s, &fixed, true);
    PermutationSet { size: s.size(), perms, fixed }
}

pub fn orbits_elements(s: &Structure, params: &[usize]) -> Vec<Subset> {
    automorphisms(s, params).orbits()
}

pub fn orbit_of_subset(s: &Structure, params: &[usize], a: &Subset) -> Vec<Subset> {
    automorphisms(s, params).orbit_of_subset(a)
}

pub fn is_rigid(s: &Structure) -> bool {
    automorphisms(s, &[]).is_trivial()
}

pub(crate) fn find_isomorphism(s: &Structure, t: &Structure) -> Option<Vec<usize>> {
    search::isomorphisms(s, t, &[], false).into_iter().next()
}
