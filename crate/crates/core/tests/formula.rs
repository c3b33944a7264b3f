mod common;

use common::{classes, ef_elements, random_formula, ref_solutions, Symbols};
use defilab::eval::{element_partition, solution_set};
use defilab::formula::*;
use defilab::structure::{corpus, gen_finite_field, gen_linear_order, ExpandedStructure, Structure};
use defilab::Subset;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn voc(s: &Structure) -> Vocabulary {
    Vocabulary::new(s.signature())
}

#[test]
fn parse_examples() {
    let l2 = gen_linear_order(2).unwrap();
    let f = parse("exists y. x < y", &voc(&l2)).unwrap();
    assert!(matches!(f, Formula::Exists(..)));
    assert_eq!(f.quantifier_rank(), 1);
    assert_eq!(f.free_variables().into_iter().collect::<Vec<_>>(), ["x"]);

    let g = parse("forall x. exists y. x < y", &voc(&l2)).unwrap();
    assert_eq!(g.quantifier_rank(), 2);
    assert!(g.is_sentence());

    assert!(parse("A(x) & ~A(y)", &voc(&l2).with_predicate("A")).is_ok());
    let err = parse("A(x) & ~A(y)", &voc(&l2)).unwrap_err();
    assert_eq!(err.kind, ParseErrorKind::UnknownSymbol("A".into()));
}

#[test]
fn precedence_and_scope() {
    let l2 = gen_linear_order(2).unwrap();
    let v = voc(&l2);
    let f = parse("~x < y & y < z | z = x -> x = y", &v).unwrap();
    let Formula::Implies(lhs, _) = &f else { panic!("implication binds loosest: {f:?}") };
    assert!(matches!(**lhs, Formula::Or(_)));
    let g = parse("exists y. x < y & y < z", &v).unwrap();
    let Formula::Exists(_, body) = &g else { panic!() };
    assert!(matches!(**body, Formula::And(_)));
}

#[test]
fn parse_errors_carry_positions() {
    let l2 = gen_linear_order(2).unwrap();
    let err = parse("exists y.\n  x < ", &voc(&l2)).unwrap_err();
    assert_eq!((err.line, err.column), (2, 7));
    let c4 = defilab::structure::gen_cycle(4).unwrap();
    let err = parse("E(x)", &voc(&c4)).unwrap_err();
    assert!(matches!(err.kind, ParseErrorKind::Arity { .. }));
}

#[test]
fn printing_uses_ascii_keywords() {
    let l2 = gen_linear_order(2).unwrap();
    let text = "forall x. (exists y. x < y -> ~x = y) | x = x & true";
    let f = parse(text, &voc(&l2)).unwrap();
    let printed = print(&f);
    for kw in ["forall", "exists", "->", "~", "|", "&"] {
        assert!(printed.contains(kw), "{printed}");
    }
    assert!(printed.is_ascii());
    let same = parse("x = x", &voc(&l2)).unwrap();
    assert_eq!(parse(&print(&same), &voc(&l2)).unwrap(), same);
}

#[test]
fn terms_and_params() {
    let gf4 = gen_finite_field(2, 2).unwrap();
    let f = parse("x * x + x + 1 = 0 & ~x = @2", &voc(&gf4)).unwrap();
    assert_eq!(f.params().into_iter().collect::<Vec<_>>(), [2]);
    assert_eq!(parse(&print(&f), &voc(&gf4)).unwrap(), f);
}

/// Rank-`k` classes of single elements from the game oracle.
fn game_classes(s: &Structure, k: usize) -> Vec<Subset> {
    classes(s.size(), |a, b| ef_elements(s, a, b, &[], k))
}

#[test]
fn hintikka_formulas_isolate_their_type_class() {
    for s in corpus().into_iter().filter(|s| s.size() <= 5) {
        let rel = s.relationalize();
        let e = ExpandedStructure::from(&rel);
        for k in 0..=3 {
            let blocks = element_partition(&e, k, &[]).unwrap();
            if rel.size() <= 4 && k <= 2 {
                assert_eq!(blocks, game_classes(&rel, k), "{} k={k}", s.name());
            }
            for block in &blocks {
                for a in block.iter() {
                    let h = hintikka(&e, &[a], k, &[]).unwrap();
                    assert!(h.quantifier_rank() <= k);
                    assert_eq!(solution_set(&e, &h).unwrap(), *block, "{} k={k} a={a}", s.name());
                    if k <= 1 {
                        assert_eq!(ref_solutions(&rel, &[], &h), *block);
                    }
                }
            }
        }
    }
}

#[test]
fn hintikka_examples() {
    let l2 = ExpandedStructure::from(gen_linear_order(2).unwrap());
    let h = hintikka(&l2, &[0], 0, &[]).unwrap();
    assert_eq!(h.quantifier_rank(), 0);
    assert_eq!(solution_set(&l2, &h).unwrap(), Subset::full(2));

    let l3 = ExpandedStructure::from(gen_linear_order(3).unwrap());
    let h = hintikka(&l3, &[0], 1, &[]).unwrap();
    let sols: Vec<bool> = (0..3).map(|a| solution_set(&l3, &h).unwrap().contains(a)).collect();
    assert_eq!(sols, [true, false, false]);
}

#[test]
fn union_definitions() {
    let l3 = ExpandedStructure::from(gen_linear_order(3).unwrap());
    let none = build_union_definition(&l3, &[], 1, &[]).unwrap();
    assert!(solution_set(&l3, &none).unwrap().is_empty());
    let blocks = element_partition(&l3, 1, &[]).unwrap();
    let all = build_union_definition(&l3, &blocks, 1, &[]).unwrap();
    assert_eq!(solution_set(&l3, &all).unwrap(), Subset::full(3));
    let two: Vec<Subset> = blocks.iter().filter(|b| !b.contains(2)).cloned().collect();
    let f = build_union_definition(&l3, &two, 1, &[]).unwrap();
    assert!(f.quantifier_rank() <= 1);
    assert_eq!(solution_set(&l3, &f).unwrap(), Subset::from_indices([0, 1]));
}

#[test]
fn variable_supply_is_well_ordered() {
    let names: Vec<String> = (0..6).map(var_name).collect();
    assert_eq!(names, ["x", "y", "z", "x1", "x2", "x3"]);
    for (i, n) in names.iter().enumerate() {
        assert_eq!(var_index(n), Some(i));
    }
}

fn symbols_with_a(s: &Structure) -> Symbols {
    let mut sym = Symbols::of(s);
    sym.predicates.push("A".into());
    sym
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>(), which in 0usize..3) {
        let s = match which {
            0 => gen_linear_order(3).unwrap(),
            1 => gen_finite_field(2, 2).unwrap(),
            _ => common::random_algebra(&mut ChaCha8Rng::seed_from_u64(seed ^ 7), 3),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, &symbols_with_a(&s), 4);
        let text = print(&f);
        let back = parse(&text, &voc(&s).with_predicate("A")).unwrap();
        prop_assert!(back.alpha_eq(&f), "{}", text);
        prop_assert_eq!(print(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn substitution_avoids_capture(seed in any::<u64>()) {
        let s = gen_linear_order(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, &Symbols::of(&s), 3);
        let free: Vec<String> = f.free_variables().into_iter().collect();
        prop_assume!(free.len() == 1);
        let v = &free[0];
        let g = f.substitute(&[(v.clone(), Term::var("y"))].into_iter().collect());
        // Renaming the free variable cannot change the solution set.
        prop_assert_eq!(ref_solutions(&s, &[], &f), ref_solutions(&s, &[], &g));
    }
}
