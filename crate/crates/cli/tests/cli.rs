use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn pavc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pavc"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn pavc_env(dir: &Path, args: &[&str], key: &str, val: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pavc"))
        .current_dir(dir)
        .env(key, val)
        .args(args)
        .output()
        .unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: stdout {:?} stderr {:?}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap()
}

#[test]
fn gen_d2_sweeps_to_four_subsets() {
    let dir = tempfile::tempdir().unwrap();
    let o = pavc(dir.path(), &["gen", "--d", "2", "--encoder", "naive"]);
    assert!(o.status.success());
    assert!(dir.path().join("ft_d2.pa").exists() && dir.path().join("ft_d2.meta.json").exists());
    let o = pavc(dir.path(), &["vc", "--formula", "ft_d2.pa", "--meta", "ft_d2.meta.json"]);
    let r = json(&o);
    assert_eq!(r["outputs"]["family_size"], 4);
    assert_eq!(r["outputs"]["vc_dim"], 2);
}

#[test]
fn gen_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for (i, out) in ["a.pa", "b.pa"].iter().enumerate() {
        let o = pavc(p, &["gen", "--d", "4", "--seed", "3", "--out", out]);
        assert!(o.status.success(), "run {i}");
    }
    assert_eq!(fs::read(p.join("a.pa")).unwrap(), fs::read(p.join("b.pa")).unwrap());
    assert_eq!(fs::read(p.join("a.meta.json")).unwrap(), fs::read(p.join("b.meta.json")).unwrap());
}

#[test]
fn gen_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = pavc(dir.path(), &["gen", "--d", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = pavc(dir.path(), &["gen", "--d", "17"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
    let o = pavc(dir.path(), &["gen", "--d", "3", "--encoder", "cf-short", "--modulus", "prime", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("not built") && err.contains("79"), "{err}");
}

#[test]
fn verify_d4_reports_shape() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pavc(p, &["gen", "--d", "4"]).status.success());
    let o = pavc(p, &["verify", "--formula", "ft_d4.pa", "--meta", "ft_d4.meta.json"]);
    assert!(o.status.success());
    let r = json(&o);
    assert_eq!(r["pass"], true);
    assert_eq!(r["outputs"]["shape"]["total_vars"], 4);
    assert_eq!(r["outputs"]["shape"]["num_inequalities"], 24);
    assert_eq!(r["outputs"]["short_10_18"], false);
    assert_eq!(check(&r, "c_shape")["pass"], true);
}

#[test]
fn verify_in_qe_mode() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pavc(p, &["gen", "--d", "3"]).status.success());
    let o = pavc(p, &["verify", "--formula", "ft_d3.pa", "--meta", "ft_d3.meta.json", "--mode", "qe"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["outputs"]["mode"], "qe");
}

#[test]
fn verify_flags_corrupted_hints() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pavc(p, &["gen", "--d", "3"]).status.success());
    let mut meta: Value = serde_json::from_str(&fs::read_to_string(p.join("ft_d3.meta.json")).unwrap()).unwrap();
    meta["hints"]["xh"] = serde_json::json!(["0", "0"]);
    write(p, "bad.json", &meta.to_string());
    let o = pavc(p, &["verify", "--formula", "ft_d3.pa", "--meta", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    let a = check(&r, "a_extensional");
    assert_eq!(a["pass"], false);
    // t = 2 + 3·1 is the first element of T that needs xh = 1
    assert!(a["detail"].as_str().unwrap().contains("t = 5"), "{a}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL a_extensional"));
}

#[test]
fn verify_flags_short_param_window() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pavc(p, &["gen", "--d", "3"]).status.success());
    let o = pavc(p, &["verify", "--formula", "ft_d3.pa", "--meta", "ft_d3.meta.json", "--params", "0..6"]);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    let b = check(&r, "b_family");
    assert_eq!(b["pass"], false);
    // S_7 = ∅ is the one subset left out
    assert!(b["detail"].as_str().unwrap().contains("[]"), "{b}");
}

#[test]
fn verify_flags_bad_witness() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pavc(p, &["gen", "--d", "2"]).status.success());
    let mut meta: Value = serde_json::from_str(&fs::read_to_string(p.join("ft_d2.meta.json")).unwrap()).unwrap();
    meta["witnesses"][2]["s"] = serde_json::json!("5");
    write(p, "bad.json", &meta.to_string());
    let o = pavc(p, &["verify", "--formula", "ft_d2.pa", "--meta", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(check(&json(&o), "a_witnesses")["pass"], false);
}

#[test]
fn verify_d6_is_quick() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pavc(p, &["gen", "--d", "6"]).status.success());
    let t = Instant::now();
    let o = pavc(p, &["verify", "--formula", "ft_d6.pa", "--meta", "ft_d6.meta.json"]);
    assert!(o.status.success());
    assert!(t.elapsed().as_secs() < 60);
    assert_eq!(json(&o)["outputs"]["measured_vc"], 6);
}

#[test]
fn vc_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "thresh.pa", "#objects: x\n#params: y\n(<= x y)\n");
    let o = pavc(p, &["vc", "--formula", "thresh.pa", "--ground", "0..10", "--params", "0..10"]);
    assert!(o.status.success());
    let r = json(&o);
    assert_eq!(r["outputs"]["vc_dim"], 1);
    assert_eq!(r["command"], "vc");
    assert_eq!(r["inputs_digest"].as_str().unwrap().len(), 64);
    let missing = pavc(p, &["vc", "--formula", "thresh.pa", "--ground", "0..10"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn vc_with_hints_on_two_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // half-planes x1 + x2 <= y with an existential copy of y
    write(p, "hp.pa", "#objects: x1 x2\n#params: y\n(exists z (and (= z y) (<= (+ x1 x2) z)))\n");
    let base = ["vc", "--formula", "hp.pa", "--ground", "0..3", "--params", "-2..8"];
    let mut with_hint = base.to_vec();
    with_hint.extend(["--hint", "z=-2..8"]);
    let bounded = json(&pavc(p, &with_hint));
    assert_eq!(bounded["outputs"]["mode"], "bounded");
    let qe = json(&pavc(p, &base));
    assert_eq!(qe["outputs"]["mode"], "qe");
    assert_eq!(bounded["outputs"]["vc_dim"], 1);
    assert_eq!(qe["outputs"]["vc_dim"], 1);
}

#[test]
fn shatter_points_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "iv.pa", "#objects: x\n#params: a b\n(and (<= a x) (<= x b))\n");
    let args = ["shatter", "--formula", "iv.pa", "--ground", "0..6", "--params", "0..6"];
    let mut two = args.to_vec();
    two.extend(["--point", "2", "--point", "4"]);
    let o = pavc(p, &two);
    assert!(o.status.success());
    assert_eq!(json(&o)["outputs"]["witnesses"].as_array().unwrap().len(), 4);
    let mut three = args.to_vec();
    three.extend(["--point", "1", "--point", "3", "--point", "5"]);
    assert_eq!(pavc(p, &three).status.code(), Some(1));
    let mut table = args.to_vec();
    table.extend(["--n", "3"]);
    let r = json(&pavc(p, &table));
    let pis: Vec<u64> = r["outputs"]["pi"].as_array().unwrap().iter().map(|e| e["pi"].as_u64().unwrap()).collect();
    // intervals: 1 + n + C(n, 2) traces
    assert_eq!(pis, vec![1, 2, 4, 7]);
}

#[test]
fn qe_parity() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "even.pa", "#objects: y\n#params:\n(exists x (= (* 2 x) y))\n");
    let o = pavc(p, &["qe", "--formula", "even.pa"]);
    assert!(o.status.success());
    let r = json(&o);
    assert!(r["outputs"]["formula"].as_str().unwrap().contains("(div 2 y)"));
    write(p, "sent.pa", "(forall x (exists y (< x y)))\n");
    let r = json(&pavc(p, &["qe", "--formula", "sent.pa"]));
    assert_eq!(r["outputs"]["sentence_value"], true);
}

#[test]
fn qe_atom_cap_from_env() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pavc(p, &["gen", "--d", "4"]).status.success());
    let o = pavc_env(p, &["qe", "--formula", "ft_d4.pa"], "PAVC_MAX_ATOMS", "3");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
    let o = pavc_env(p, &["upperbound", "--formula", "ft_d4.pa"], "PAVC_MAX_ATOMS", "3");
    assert!(String::from_utf8_lossy(&o.stderr).contains("certificate unavailable"));
    assert!(pavc(p, &["qe", "--formula", "ft_d4.pa"]).status.success());
}

#[test]
fn div_input_needs_flag() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "d.pa", "#objects: x\n#params: y\n(div 3 (+ x y))\n");
    assert_eq!(pavc(p, &["analyze", "--formula", "d.pa"]).status.code(), Some(2));
    let o = pavc(p, &["analyze", "--formula", "d.pa", "--allow-div"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["outputs"]["shape"]["num_inequalities"], 2);
}

#[test]
fn upperbound_dominates_on_d3() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pavc(p, &["gen", "--d", "3"]).status.success());
    let r = json(&pavc(p, &["upperbound", "--formula", "ft_d3.pa"]));
    assert!(r["outputs"]["bound"].as_u64().unwrap() >= 3);
    for key in ["ell", "atom_breakdown", "qe_stats", "note"] {
        assert!(r["outputs"].get(key).is_some(), "{key}");
    }
}

#[test]
fn analyze_and_convergents() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(pavc(p, &["gen", "--d", "2"]).status.success());
    let r = json(&pavc(p, &["analyze", "--formula", "ft_d2.pa"]));
    assert_eq!(r["outputs"]["shape"]["num_inequalities"], 12);
    assert_eq!(r["outputs"]["object_vars"], serde_json::json!(["x"]));
    let r = json(&pavc(p, &["convergents", "--rational", "45/16"]));
    assert_eq!(r["outputs"]["fraction"]["terms"], serde_json::json!(["2", "1", "4", "3"]));
    assert_eq!(r["outputs"]["convergents"][2]["p"], "14");
    let r = json(&pavc(p, &["convergents", "--terms", "1,1,1,1,2"]));
    assert_eq!(r["outputs"]["value"], "13/8");
    assert_eq!(pavc(p, &["convergents", "--terms", "1,0"]).status.code(), Some(2));
}

#[test]
fn report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write(p, "t.pa", "#objects: x\n#params: y\n(< x y)\n");
    let o = pavc(p, &["analyze", "--formula", "t.pa", "--report", "r.json"]);
    assert!(o.status.success() && o.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(p.join("r.json")).unwrap()).unwrap();
    assert_eq!(r["command"], "analyze");
}
