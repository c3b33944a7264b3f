use defilab::cli::{run, SCHEMA_VERSION};
use serde_json::Value;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["defilab".to_string()];
    argv.extend(args.iter().map(|a| a.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let (code, out, err) = call(&a);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], SCHEMA_VERSION);
    v
}

#[test]
fn elements_of_gf4() {
    let v = json(&["elements", "gf:2,2", "--rank", "unbounded", "--params", "none"]);
    let degrees: Vec<u64> = v["elements"].as_array().unwrap().iter().map(|e| e["degree"].as_u64().unwrap()).collect();
    assert_eq!(degrees, [1, 1, 2, 2]);
    assert_eq!(v["budget"]["rank"], 5);
    let (code, table, _) = call(&["elements", "gf:2,2"]);
    assert_eq!(code, 0);
    assert!(table.contains("largest degree: 2"));
}

#[test]
fn subsets_of_l2() {
    let v = json(&["subsets", "linord:2", "--rank", "1", "--params", "none"]);
    let subsets = v["subsets"].as_array().unwrap();
    for one in &subsets[1..3] {
        assert_eq!(one["subset"].as_array().unwrap().len(), 1);
        assert_eq!((one["explicit"].as_bool(), one["implicit"].as_bool()), (Some(true), Some(false)));
        assert_eq!(one["alg_degree"], 2);
    }
}

#[test]
fn hierarchy_from_the_empty_set() {
    let (code, out, _) = call(&["hierarchy", "hf:0", "--op", "imp", "--rank", "unbounded", "--params", "none", "--steps", "3"]);
    assert_eq!(code, 0);
    assert!(out.contains("sizes 1,2,4,16"));
    assert!(out.contains("no divergence from V_n"));
    let v = json(&["hierarchy", "--steps", "2", "--dump"]);
    assert!(v.to_string().contains("\"command\":\"hierarchy\""));
}

#[test]
fn other_subcommands() {
    let (code, out, _) = call(&["show", "L3"]);
    assert_eq!(code, 0);
    assert!(out.contains('<'));
    let v = json(&["aut", "gf:3,2"]);
    assert_eq!(v["order"], 2);
    let (code, out, _) = call(&["check", "linord:2", "forall x. A(x)", "--target", "0,1"]);
    assert_eq!(code, 0, "{out}");
    let (code, _, _) = call(&["witness", "linord:3", "--element", "1", "--rank", "1"]);
    assert_eq!(code, 0);
    let (code, _, err) = call(&["witness", "gf:2,1", "--element", "1"]);
    assert_eq!(code, 0);
    assert!(err.contains("graph relations"));
    let v = json(&["convert", "linord:2", "exists x. A(x) & forall y. (A(y) -> y = x)", "--target", "{1}"]);
    assert_eq!(v["conversion"]["added_params"], serde_json::json!([0]));
    let v = json(&["pin", "linord:4", "--set", "x = x", "--order", "x < y"]);
    assert_eq!(v["elements"].as_array().unwrap().len(), 4);
    let (code, _, _) = call(&["gap", "digraphs:2", "--rank", "1"]);
    assert_eq!(code, 0);
}

#[test]
fn exit_codes() {
    assert_eq!(call(&["elements", "no-such-structure"]).0, 2);
    assert_eq!(call(&["elements", "L2", "--rank", "many"]).0, 2);
    assert_eq!(call(&["frobnicate"]).0, 2);
    assert_eq!(call(&["--help"]).0, 0);
    assert_eq!(call(&["convert", "linord:2", "forall x. A(x)", "--target", "0"]).0, 1);
    assert_eq!(call(&["elements", "linord:30"]).0, 3);
}

#[test]
fn output_is_deterministic() {
    let q = ["subsets", "C4", "--rank", "2", "--witnesses", "--format", "json"];
    let first = call(&q);
    assert_eq!(first, call(&q));
    let mut one = q.to_vec();
    one.extend(["--threads", "1"]);
    let mut eight = q.to_vec();
    eight.extend(["--threads", "8"]);
    assert_eq!(call(&one).1, first.1);
    assert_eq!(call(&eight).1, first.1);
}
