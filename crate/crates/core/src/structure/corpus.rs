//! Named structures used as a fixed test and demonstration corpus.

use super::{gen_cycle, membership_structure, gen_finite_field, gen_linear_order, gen_membership_digraph, Structure, StructureBuilder};
use crate::hierarchy::{vn, HFSet};

fn graph(name: &str, n: usize, edges: &[(usize, usize)]) -> Structure {
    let mut b = StructureBuilder::new(name, n);
    b.relation("E", 2, edges.iter().flat_map(|&(i, j)| [vec![i, j], vec![j, i]]));
    b.build().expect("valid corpus graph")
}

fn undirected_path(n: usize) -> Structure {
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    graph(&format!("P{n}"), n, &edges)
}

fn undirected_cycle(n: usize) -> Structure {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    graph(&format!("UC{n}"), n, &edges)
}

fn pure_set(n: usize) -> Structure {
    StructureBuilder::new(&format!("Set{n}"), n).build().expect("valid pure set")
}

fn colored(name: &str, n: usize, red: &[usize]) -> Structure {
    let mut b = StructureBuilder::new(name, n);
    b.relation("R", 1, red.iter().map(|&i| vec![i]));
    b.build().expect("valid colored set")
}

fn equivalence(name: &str, classes: &[&[usize]]) -> Structure {
    let n = classes.iter().map(|c| c.len()).sum();
    let mut b = StructureBuilder::new(name, n);
    b.relation("~", 2, classes.iter().flat_map(|c| c.iter().flat_map(move |&i| c.iter().map(move |&j| vec![i, j]))));
    b.build().expect("valid equivalence relation")
}

fn successor(n: usize) -> Structure {
    let mut b = StructureBuilder::new(&format!("Succ{n}"), n);
    b.relation("S", 2, (1..n).map(|i| vec![i - 1, i]));
    b.build().expect("valid successor")
}

fn two_triangles() -> Structure {
    let mut b = StructureBuilder::new("2C3", 6);
    b.relation("E", 2, [[0, 1], [1, 2], [2, 0], [3, 4], [4, 5], [5, 3]].map(|e| e.to_vec()));
    b.build().expect("valid digraph")
}

fn von_neumann(m: usize) -> Structure {
    membership_structure(&format!("V{m}"), &vn(m))
}

const NAMES: &[&str] = &[
    "L1", "L2", "L3", "L4", "L5", "L6", "C3", "C4", "C5", "C6", "P3", "P4", "UC4", "UC5", "K3", "Star4", "Set3",
    "Red2of4", "Eq2+1", "Eq2+2", "Succ4", "2C3", "GF2", "GF3", "GF4", "GF5", "V1", "V2", "V3", "hf:11", "hf:19",
];

/// Names of the corpus structures, in a fixed order.
pub fn corpus_names() -> &'static [&'static str] {
    NAMES
}

/// A corpus structure by name. Also knows `GF7`, `GF8` and `GF9`, which
/// are not in the default list.
pub fn corpus_structure(name: &str) -> Option<Structure> {
    let s = match name {
        "L1" | "L2" | "L3" | "L4" | "L5" | "L6" => gen_linear_order(name[1..].parse().ok()?).ok()?,
        "C3" | "C4" | "C5" | "C6" => gen_cycle(name[1..].parse().ok()?).ok()?,
        "P3" | "P4" => undirected_path(name[1..].parse().ok()?),
        "UC4" | "UC5" => undirected_cycle(name[2..].parse().ok()?),
        "K3" => graph("K3", 3, &[(0, 1), (1, 2), (0, 2)]),
        "Star4" => graph("Star4", 4, &[(0, 1), (0, 2), (0, 3)]),
        "Set3" => pure_set(3),
        "Red2of4" => colored("Red2of4", 4, &[0, 1]),
        "Eq2+1" => equivalence("Eq2+1", &[&[0, 1], &[2]]),
        "Eq2+2" => equivalence("Eq2+2", &[&[0, 1], &[2, 3]]),
        "Succ4" => successor(4),
        "2C3" => two_triangles(),
        "GF2" => gen_finite_field(2, 1).ok()?,
        "GF3" => gen_finite_field(3, 1).ok()?,
        "GF4" => gen_finite_field(2, 2).ok()?,
        "GF5" => gen_finite_field(5, 1).ok()?,
        "GF7" => gen_finite_field(7, 1).ok()?,
        "GF8" => gen_finite_field(2, 3).ok()?,
        "GF9" => gen_finite_field(3, 2).ok()?,
        "V1" | "V2" | "V3" => von_neumann(name[1..].parse().ok()?),
        _ => {
            let code: u64 = name.strip_prefix("hf:")?.parse().ok()?;
            gen_membership_digraph(&HFSet::decode(code))
        }
    };
    Some(s)
}

/// Every structure in [`corpus_names`].
pub fn corpus() -> Vec<Structure> {
    NAMES.iter().map(|n| corpus_structure(n).expect("corpus names resolve")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve_and_stay_small() {
        for s in corpus() {
            assert!(s.size() <= 6, "{}", s.name());
        }
        assert_eq!(corpus_structure("GF9").unwrap().size(), 9);
        assert_eq!(corpus_structure("V3").unwrap().size(), 4);
        assert!(corpus_structure("nope").is_none());
    }
}
