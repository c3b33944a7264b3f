//! Generators for the standard structure families.

use crate::caps::Caps;
use crate::hierarchy::HFSet;

use super::{Structure, StructureBuilder, StructureError};

/// The strict linear order `0 < 1 < ... < n-1`.
pub fn gen_linear_order(n: usize) -> Result<Structure, StructureError> {
    Caps::check("linear order", n, Caps::current().structure)?;
    let mut b = StructureBuilder::new(&format!("L{n}"), n);
    let tuples = (0..n).flat_map(|i| (i + 1..n).map(move |j| vec![i, j]));
    b.relation("<", 2, tuples);
    b.build()
}

/// The directed cycle `0 -> 1 -> ... -> n-1 -> 0` with edge relation `E`.
pub fn gen_cycle(n: usize) -> Result<Structure, StructureError> {
    Caps::check("cycle", n, Caps::current().structure)?;
    let mut b = StructureBuilder::new(&format!("C{n}"), n);
    b.relation("E", 2, (0..n).map(|i| vec![i, (i + 1) % n]));
    b.build()
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Polynomials over GF(p) as coefficient vectors, lowest degree first.
type Poly = Vec<u64>;

fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u64], m: &[u64], p: u64) -> Poly {
    let mut r = trim(a.to_vec());
    let m = trim(m.to_vec());
    let lead_inv = mod_inverse(*m.last().expect("nonzero modulus"), p);
    while r.len() >= m.len() {
        let shift = r.len() - m.len();
        let factor = r.last().unwrap() * lead_inv % p;
        for (i, &c) in m.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - factor * c % p) % p;
        }
        r = trim(r);
    }
    r
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    (1..p).find(|x| a * x % p == 1).expect("p prime and a nonzero")
}

/// Monic polynomial of degree `d` whose lower coefficients are the base-`p`
/// digits of `v`.
fn monic_from_index(v: u64, p: u64, d: usize) -> Poly {
    let mut coeffs = digits(v, p, d);
    coeffs.push(1);
    coeffs
}

fn digits(mut v: u64, p: u64, d: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(d);
    for _ in 0..d {
        out.push(v % p);
        v /= p;
    }
    out
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let d = f.len() - 1;
    for deg in 1..=d / 2 {
        for v in 0..p.pow(deg as u32) {
            let g = monic_from_index(v, p, deg);
            if poly_rem(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// The lexicographically least monic irreducible polynomial of degree `d`
/// over GF(p), comparing coefficients from the highest non-leading degree
/// down. Coefficients are returned lowest degree first, leading 1 included.
pub fn least_irreducible(p: u64, d: usize) -> Poly {
    (0..p.pow(d as u32))
        .map(|v| monic_from_index(v, p, d))
        .find(|f| is_irreducible(f, p))
        .expect("irreducible polynomials exist in every degree")
}

/// GF(p^d) built from the least irreducible polynomial of degree `d`.
pub fn gen_finite_field(p: u64, d: usize) -> Result<Structure, StructureError> {
    if !is_prime(p) {
        return Err(StructureError::NotPrime(p));
    }
    check_field_size(p, d)?;
    gen_finite_field_with_modulus(p, &least_irreducible(p, d))
}

fn check_field_size(p: u64, d: usize) -> Result<usize, StructureError> {
    let cap = Caps::current().field;
    let size = p.checked_pow(d as u32).filter(|&q| q <= cap as u64).ok_or(StructureError::Cap(
        crate::caps::CapExceeded { what: "field order", size: p.saturating_pow(d as u32) as usize, cap },
    ))?;
    Ok(size as usize)
}

/// GF(p^d) as polynomials modulo `modulus` (monic, lowest degree first).
/// Element `i` is the polynomial whose coefficients are the base-`p` digits
/// of `i`, so `0` and `1` are the field's zero and one.
pub fn gen_finite_field_with_modulus(p: u64, modulus: &[u64]) -> Result<Structure, StructureError> {
    if !is_prime(p) {
        return Err(StructureError::NotPrime(p));
    }
    let modulus = trim(modulus.iter().map(|c| c % p).collect());
    if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
        return Err(StructureError::Reducible(modulus.len().saturating_sub(1)));
    }
    let d = modulus.len() - 1;
    if !is_irreducible(&modulus, p) {
        return Err(StructureError::Reducible(d));
    }
    let q = check_field_size(p, d)?;
    let elem = |i: usize| digits(i as u64, p, d);
    let index = |poly: &[u64]| poly.iter().rev().fold(0u64, |acc, &c| acc * p + c) as usize;
    let add = |a: &[usize]| {
        let (x, y) = (elem(a[0]), elem(a[1]));
        let s: Vec<u64> = x.iter().zip(&y).map(|(u, v)| (u + v) % p).collect();
        index(&s)
    };
    let mul = |a: &[usize]| {
        let (x, y) = (elem(a[0]), elem(a[1]));
        let mut prod = vec![0u64; 2 * d];
        for (i, u) in x.iter().enumerate() {
            for (j, v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % p;
            }
        }
        let mut r = poly_rem(&prod, &modulus, p);
        r.resize(d, 0);
        index(&r)
    };
    let name = if d == 1 { format!("GF({p})") } else { format!("GF({q})") };
    let mut b = StructureBuilder::new(&name, q);
    if d > 1 {
        for i in 0..q {
            b.label(i, &poly_label(&elem(i)));
        }
    }
    b.function_from("+", 2, add);
    b.function_from("*", 2, mul);
    b.constant("0", 0).constant("1", 1);
    b.build()
}

fn poly_label(coeffs: &[u64]) -> String {
    let mut terms = Vec::new();
    for (deg, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match deg {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{deg}"),
        };
        terms.push(match (c, deg) {
            (_, 0) => c.to_string(),
            (1, _) => mono,
            _ => format!("{c}{mono}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

/// The membership digraph on the transitive closure of `{code}`: universe in
/// Ackermann order, relation `in` with `(a, b)` when `a` is a member of `b`.
pub fn gen_membership_digraph(code: &HFSet) -> Structure {
    let universe = HFSet::singleton(code.clone()).transitive_closure();
    membership_structure(&name_of(code), &universe)
}

fn name_of(x: &HFSet) -> String {
    match x.encode() {
        Ok(c) => format!("hf:{c}"),
        Err(_) => format!("hf:{x}"),
    }
}

/// Membership structure on a sorted, transitive list of sets.
pub(crate) fn membership_structure(name: &str, universe: &[HFSet]) -> Structure {
    let mut b = StructureBuilder::new(name, universe.len());
    for (i, x) in universe.iter().enumerate() {
        b.label(i, &x.to_string());
    }
    let mut edges = Vec::new();
    for (j, y) in universe.iter().enumerate() {
        for x in y.elements() {
            let i = universe.binary_search(x).expect("universe must be transitive");
            edges.push(vec![i, j]);
        }
    }
    b.relation("in", 2, edges);
    b.build().expect("membership digraphs of nonempty universes are valid")
}
