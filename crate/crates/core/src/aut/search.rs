//! Individualization-refinement search for isomorphisms between two
//! structures over the same signature.
//!
//! Both sides are colored jointly: every refinement round renames colors
//! through a table shared by the two structures, so the coloring is
//! equivariant and any isomorphism maps each color class of the source onto
//! the same-colored class of the target. Color classes of unequal size
//! therefore prune a branch. Leaves are verified tuple by tuple, so hash
//! collisions in the signatures only weaken pruning.

use std::collections::HashMap;

use crate::structure::Structure;

struct View {
    s: Structure,
}

impl View {
    fn new(s: &Structure) -> View {
        View { s: s.relationalize() }
    }

    fn n(&self) -> usize {
        self.s.size()
    }
}

fn mix(mut h: u64, x: u64) -> u64 {
    h ^= x.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    // splitmix64 finalizer
    let mut z = h;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn signatures(view: &View, colors: &[u32]) -> Vec<u64> {
    let n = view.n();
    let mut contrib: Vec<Vec<u64>> = vec![Vec::new(); n];
    for (ri, rel) in view.s.relations().iter().enumerate() {
        for t in rel.tuples() {
            let mut h = mix(0x1234, ri as u64);
            for &x in t {
                h = mix(h, colors[x] as u64);
            }
            for (pos, &x) in t.iter().enumerate() {
                contrib[x].push(mix(h, pos as u64));
            }
        }
    }
    contrib
        .into_iter()
        .enumerate()
        .map(|(v, mut c)| {
            c.sort_unstable();
            c.iter().fold(mix(0x5678, colors[v] as u64), |h, &x| mix(h, x))
        })
        .collect()
}

fn count_colors(colors: &[u32]) -> usize {
    let mut seen: Vec<u32> = colors.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Refine the joint coloring to a fixpoint. Returns `None` when some color
/// class has different sizes on the two sides.
fn refine(src: &View, dst: &View, mut cs: Vec<u32>, mut cd: Vec<u32>) -> Option<(Vec<u32>, Vec<u32>)> {
    if !balanced(&cs, &cd) {
        return None;
    }
    let mut classes = count_colors(&cs);
    loop {
        let ss = signatures(src, &cs);
        let sd = signatures(dst, &cd);
        let mut keys: Vec<(u32, u64)> = cs.iter().zip(&ss).chain(cd.iter().zip(&sd)).map(|(&c, &s)| (c, s)).collect();
        keys.sort_unstable();
        keys.dedup();
        let rename: HashMap<(u32, u64), u32> = keys.iter().enumerate().map(|(i, &k)| (k, i as u32)).collect();
        cs = cs.iter().zip(&ss).map(|(&c, &s)| rename[&(c, s)]).collect();
        cd = cd.iter().zip(&sd).map(|(&c, &s)| rename[&(c, s)]).collect();
        if !balanced(&cs, &cd) {
            return None;
        }
        let now = count_colors(&cs);
        if now == classes {
            return Some((cs, cd));
        }
        classes = now;
    }
}

fn balanced(cs: &[u32], cd: &[u32]) -> bool {
    let mut a = cs.to_vec();
    let mut b = cd.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

fn is_isomorphism(src: &View, dst: &View, map: &[usize]) -> bool {
    src.s.relations().iter().zip(dst.s.relations()).all(|(rs, rd)| {
        rs.tuples().len() == rd.tuples().len()
            && rs.tuples().iter().all(|t| {
                let image: Vec<usize> = t.iter().map(|&x| map[x]).collect();
                rd.contains(&image)
            })
    })
}

struct Search<'a> {
    src: &'a View,
    dst: &'a View,
    find_all: bool,
    found: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn run(&mut self, cs: Vec<u32>, cd: Vec<u32>) {
        if !self.find_all && !self.found.is_empty() {
            return;
        }
        let Some((cs, cd)) = refine(self.src, self.dst, cs, cd) else { return };
        let n = cs.len();
        // Smallest non-singleton class, ties broken by color.
        let mut sizes: HashMap<u32, usize> = HashMap::new();
        for &c in &cs {
            *sizes.entry(c).or_default() += 1;
        }
        let target = sizes.iter().filter(|(_, &k)| k > 1).min_by_key(|(&c, &k)| (k, c)).map(|(&c, _)| c);
        match target {
            None => {
                let mut by_color = vec![0usize; n];
                for (w, &c) in cd.iter().enumerate() {
                    by_color[c as usize] = w;
                }
                let map: Vec<usize> = cs.iter().map(|&c| by_color[c as usize]).collect();
                if is_isomorphism(self.src, self.dst, &map) {
                    self.found.push(map);
                }
            }
            Some(cell) => {
                let v = cs.iter().position(|&c| c == cell).unwrap();
                let fresh = n as u32;
                for w in (0..n).filter(|&w| cd[w] == cell) {
                    let mut cs2 = cs.clone();
                    let mut cd2 = cd.clone();
                    cs2[v] = fresh;
                    cd2[w] = fresh;
                    self.run(cs2, cd2);
                    if !self.find_all && !self.found.is_empty() {
                        return;
                    }
                }
            }
        }
    }
}

fn initial_colors(n: usize, fixed: &[usize]) -> Vec<u32> {
    let mut c = vec![0u32; n];
    for (i, &p) in fixed.iter().enumerate() {
        c[p] = i as u32 + 1;
    }
    c
}

/// All isomorphisms `src -> dst` mapping each `fixed` element to itself,
/// sorted lexicographically as image tables.
pub(crate) fn isomorphisms(src: &Structure, dst: &Structure, fixed: &[usize], find_all: bool) -> Vec<Vec<usize>> {
    if src.size() != dst.size() || src.signature() != dst.signature() {
        return Vec::new();
    }
    let (vs, vd) = (View::new(src), View::new(dst));
    let mut fixed: Vec<usize> = fixed.to_vec();
    fixed.sort_unstable();
    fixed.dedup();
    let c = initial_colors(src.size(), &fixed);
    let mut search = Search { src: &vs, dst: &vd, find_all, found: Vec::new() };
    search.run(c.clone(), c);
    search.found.sort();
    search.found
}
