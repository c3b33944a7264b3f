mod common;

use common::{brute_automorphisms, brute_isomorphisms, ext_wf, is_isomorphism};
use defilab::eval::{sat, solution_set};
use defilab::formula::{parse, Vocabulary};
use defilab::hierarchy::HFSet;
use defilab::structure::*;
use defilab::Subset;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn f(s: &Structure, text: &str) -> defilab::formula::Formula {
    parse(text, &Vocabulary::new(s.signature())).unwrap()
}

fn small_corpus() -> Vec<Structure> {
    let mut all = corpus();
    all.retain(|s| s.size() <= 6);
    all
}

#[test]
fn load_two_element_order() {
    let s = load_structure("structure L\nuniverse 2\nrelation </2 = {(0,1)}\n").unwrap();
    assert_eq!(s.size(), 2);
    assert_eq!(s.relation_by_name("<").unwrap().tuples(), [vec![0, 1]]);
    assert_eq!(s, gen_linear_order(2).unwrap().renamed("L"));
}

#[test]
fn partial_function_is_rejected() {
    let text = "structure F\nuniverse 2\nfunction f/1 = {(0)->1}\n";
    let err = load_structure(text).unwrap_err();
    assert_eq!(err, StructureError::NotTotal("f".into()));
    assert!(err.to_string().contains("function not total"));
    assert!(load_structure("universe 2\nrelation R/1 = {(2)}\n").is_err());
}

#[test]
fn print_load_round_trip_on_the_corpus() {
    let mut all = corpus();
    all.extend(["GF7", "GF8", "GF9"].map(|n| corpus_structure(n).unwrap()));
    for s in all {
        let text = print_structure(&s);
        assert_eq!(load_structure(&text).unwrap(), s, "{}", s.name());
    }
}

#[test]
fn linear_orders() {
    assert!(gen_linear_order(1).unwrap().relations()[0].tuples().is_empty());
    let l3 = gen_linear_order(3).unwrap();
    assert_eq!(l3.relations()[0].tuples(), [vec![0, 1], vec![0, 2], vec![1, 2]]);
    assert_eq!(brute_automorphisms(&l3, &[]).len(), 1);
}

#[test]
fn finite_fields() {
    let gf2 = gen_finite_field(2, 1).unwrap();
    assert_eq!(gf2.function_by_name("+").unwrap().apply(&[1, 1]), 0);

    let gf4 = gen_finite_field(2, 2).unwrap();
    let roots = solution_set(&gf4, &f(&gf4, "x * x + x + 1 = 0")).unwrap();
    // The prime field is {0, 1}; the other two elements are the roots.
    assert_eq!(roots, Subset::from_indices([2, 3]));

    let gf9 = gen_finite_field(3, 2).unwrap();
    let mul = gf9.function_by_name("*").unwrap();
    let order = |a: usize| {
        let mut x = a;
        (1..=8).find(|_| {
            let done = x == 1;
            x = mul.apply(&[x, a]);
            done
        })
    };
    assert!((1..9).any(|a| order(a) == Some(8)));
    assert!((1..9).all(|a| order(a).is_some_and(|o| 8 % o == 0)));

    assert!(matches!(gen_finite_field(4, 1), Err(StructureError::NotPrime(4))));
    assert!(matches!(gen_finite_field(2, 10), Err(StructureError::Cap(_))));
}

#[test]
fn membership_digraphs() {
    let empty = gen_membership_digraph(&HFSet::empty());
    assert_eq!(empty.size(), 1);
    assert!(empty.relations()[0].tuples().is_empty());

    let three = gen_membership_digraph(&HFSet::decode(3));
    assert_eq!(three.size(), 3);
    assert_eq!(three.relations()[0].tuples(), [vec![0, 1], vec![0, 2], vec![1, 2]]);

    for code in 0..300 {
        assert!(ext_wf(&gen_membership_digraph(&HFSet::decode(code))), "hf:{code}");
    }
}

#[test]
fn relationalize_fields() {
    let gf2 = gen_finite_field(2, 1).unwrap().relationalize();
    assert!(gf2.is_relational());
    let arities: Vec<(String, usize)> = gf2.signature().relations().to_vec();
    assert_eq!(
        arities,
        [("Add".to_string(), 3), ("Mul".into(), 3), ("Zero".into(), 1), ("One".into(), 1)]
    );
    let l3 = gen_linear_order(3).unwrap();
    assert_eq!(l3.relationalize(), l3);
}

#[test]
fn relationalize_keeps_the_automorphism_group() {
    for s in small_corpus() {
        assert_eq!(brute_automorphisms(&s, &[]), brute_automorphisms(&s.relationalize(), &[]), "{}", s.name());
    }
}

#[test]
fn expansions() {
    let l2 = gen_linear_order(2).unwrap();
    let e = expand(&l2, [("A".to_string(), Subset::from_indices([0]))], Vec::<(String, usize)>::new()).unwrap();
    let voc = Vocabulary::of(&e);
    assert_eq!(solution_set(&e, &parse("A(x)", &voc).unwrap()).unwrap(), Subset::from_indices([0]));

    let e = expand(&l2, Vec::new(), [("a".to_string(), 1)]).unwrap();
    let x_is_a = parse("x = a", &Vocabulary::of(&e)).unwrap();
    assert_eq!(solution_set(&e, &x_is_a).unwrap(), Subset::from_indices([1]));

    let e = expand(&l2, [("A".to_string(), Subset::full(2))], Vec::<(String, usize)>::new()).unwrap();
    let all = parse("forall x. A(x)", &Vocabulary::of(&e)).unwrap();
    assert!(sat(&e, &all, &Default::default()).unwrap());

    assert!(expand(&l2, [("<".to_string(), Subset::empty())], Vec::<(String, usize)>::new()).is_err());
    assert!(expand(&l2, [("A".to_string(), Subset::from_indices([5]))], Vec::<(String, usize)>::new()).is_err());
}

#[test]
fn isomorphism_examples() {
    let l3 = gen_linear_order(3).unwrap();
    let relabeled = l3.permuted(&[1, 2, 0]);
    let iso = iso_check(&l3, &relabeled).unwrap().unwrap();
    assert!(is_isomorphism(&l3, &relabeled, &iso));

    let mut b = StructureBuilder::new("cycle", 3);
    b.relation("<", 2, [vec![0, 1], vec![1, 2], vec![2, 0]]);
    let cycle = b.build().unwrap();
    assert_eq!(iso_check(&l3, &cycle).unwrap(), None);
    assert!(brute_isomorphisms(&l3, &cycle).is_empty());

    assert_eq!(iso_check(&l3, &gen_cycle(3).unwrap()), Err(StructureError::SignatureMismatch));
}

#[test]
fn fields_from_different_moduli_are_isomorphic() {
    let gf4 = gen_finite_field(2, 2).unwrap();
    let shuffled = gf4.permuted(&[0, 1, 3, 2]);
    let iso = iso_check(&gf4, &shuffled).unwrap().unwrap();
    assert!(is_isomorphism(&gf4, &shuffled, &iso));

    // x^2 + 1, x^2 + x + 2 and x^2 + 2x + 2 are the monic irreducible
    // quadratics over GF(3).
    let base = gen_finite_field_with_modulus(3, &[1, 0, 1]).unwrap();
    for modulus in [[2, 1, 1], [2, 2, 1]] {
        let other = gen_finite_field_with_modulus(3, &modulus).unwrap();
        let iso = iso_check(&base, &other).unwrap().expect("fields of equal order are isomorphic");
        assert!(is_isomorphism(&base, &other, &iso));
    }
    assert!(gen_finite_field_with_modulus(3, &[0, 0, 1]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn iso_check_agrees_with_exhaustive_search(seed in any::<u64>(), n in 1usize..=5, shuffle in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_structure(&mut rng, n);
        let t = if shuffle {
            let mut p: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(&mut p[..], &mut rng);
            s.permuted(&p)
        } else {
            common::random_structure(&mut rng, n)
        };
        let found = iso_check(&s, &t).unwrap();
        let brute = brute_isomorphisms(&s, &t);
        prop_assert_eq!(found.is_some(), !brute.is_empty());
        if let Some(p) = found {
            prop_assert!(is_isomorphism(&s, &t, &p));
        }
    }

    #[test]
    fn relationalize_preserves_automorphisms_of_algebras(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = common::random_algebra(&mut rng, n);
        prop_assert_eq!(brute_automorphisms(&s, &[]), brute_automorphisms(&s.relationalize(), &[]));
    }
}
