use std::path::Path;

use rvforce::harness::{
    emit_report, structure_scenario_text, CheckReport, RealizeReport, ReportFormat, Scenario,
    WitnessReport,
};
use rvforce::saturation::{check_satur, realize_open_type, TypeSpec};
use rvforce::witnessing::{witness_existential, WitnessPolicy};
use rvforce::{Env, Formula, Rational};
use rvforce_testkit::{random_open_formula, random_structure, rng};

const MINIMAL: &str = "\
space n_bits=2 exhaustive
rv a table 0 1 0 1
rv b table 1 0 1 0
family: a b
formula lower := \"(forall y)(x <= y)\"
";

fn render(report: &dyn rvforce::harness::Report, format: ReportFormat) -> String {
    let mut out = Vec::new();
    emit_report(report, format, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn defect_renders_as_exact_and_decimal() {
    let sc = Scenario::parse(MINIMAL, Path::new("."), "minimal").unwrap();
    let k = sc.structure();
    let p = TypeSpec::new(vec![sc.formula("lower").unwrap().clone()], "x").unwrap();
    let u = k.constant("a").unwrap();
    let c = check_satur(k, &p, u, Rational::from_integer(0)).unwrap();
    let report = CheckReport::new(k, "x", p.formulas(), u, &c);
    let json = render(&report, ReportFormat::Json);
    let compact: String = json.split_whitespace().collect();
    assert!(compact.contains(r#""defect":{"num":1,"den":2,"approx":0.500000}"#), "{json}");
    let csv = render(&report, ReportFormat::Csv);
    assert_eq!(csv, "k,lhs_measure,rhs_measure,gap,stage_flags\n1,1/1,1/2,1/2,ok\n");
}

#[test]
fn generated_structures_survive_a_round_trip() {
    let mut r = rng(5);
    let k = random_structure(&mut r, 20, 5, 9);
    let names: Vec<String> = k.family().members().iter().map(|m| m.name().to_string()).collect();
    let f = Formula::exists("x", random_open_formula(&mut r, &["x".to_string()], &names, 2));
    let text = structure_scenario_text(&k, Rational::new(1, 10), &[("f".to_string(), f.clone())]);
    let sc = Scenario::parse(&text, Path::new("."), "generated").unwrap();
    assert_eq!(sc.space().points(), k.space().points());
    assert_eq!(sc.eps(), Rational::new(1, 10));
    assert_eq!(sc.formula("f"), Some(&f));
    assert_eq!(
        sc.structure().sentence_value(&f).unwrap(),
        k.sentence_value(&f).unwrap()
    );
    assert_eq!(sc.to_text(), text);
}

#[test]
fn text_reports_name_the_witness_and_its_merge_trace() {
    let sc = Scenario::parse(MINIMAL, Path::new("."), "minimal").unwrap();
    let k = sc.structure();
    let p = TypeSpec::parse("x = a + b\n", "x", |n| k.is_declared(n)).unwrap();
    let r = realize_open_type(k, &p, Rational::from_integer(0), WitnessPolicy::Synthesize, false)
        .unwrap();
    let text = render(&RealizeReport::new(k, &r), ReportFormat::Text);
    assert!(text.contains("defect: 0/1 (0.000000)"), "{text}");
    assert!(text.contains("witness: witness_x (case-merge"), "{text}");

    let a = k.parse("x = a + b").unwrap();
    let w = witness_existential(k, &a, "x", &Env::new(), WitnessPolicy::Synthesize).unwrap();
    let report = WitnessReport::new(&a, "x", false, WitnessPolicy::Synthesize, &w);
    let text = render(&report, ReportFormat::Text);
    assert!(text.contains("merge trace:\n  1. take a where"), "{text}");
}
