//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits nonzero on any failure.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rvforce::family::case_merge;
use rvforce::harness::{emit_report, EvalReport, Report, ReportFormat, Scenario, WitnessReport};
use rvforce::saturation::{
    check_satur, conjunction_chain, pack_extension, realize_existential_type, realize_open_type,
    TypeSpec,
};
use rvforce::witnessing::{pairing_reduce, skolem_chain, witness_existential, WitnessPolicy};
use rvforce::{Env, Family, Formula, RandomVariable, Rational, SampleSpace, Structure, Term};
use rvforce_testkit::{
    event_flags, random_formula, random_open_formula, random_rv, random_structure, rng,
    BruteForce, TestRng,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn zero() -> Rational {
    Rational::from_integer(0)
}

fn names(k: &Structure) -> Vec<String> {
    k.family().members().iter().map(|m| m.name().to_string()).collect()
}

fn x() -> Vec<String> {
    vec!["x".to_string()]
}

fn render(r: &dyn Report) -> String {
    let mut out = Vec::new();
    emit_report(r, ReportFormat::Json, &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    check(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

/// Oracle equivalence. Appends one JSON report per formula to `log`.
fn oracle_equivalence(log: &mut String) -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut count = 0;
    for _ in 0..25 {
        let samples = r.random_range(4..=16);
        let size = r.random_range(2..=6);
        let k = random_structure(&mut r, samples, size, 7);
        let c = names(&k);
        for i in 0..10 {
            let (f, env) = if i % 2 == 0 {
                (random_formula(&mut r, &[], &c, 2), Env::new())
            } else {
                let u = random_rv(&mut r, "u", k.space(), 7);
                (random_formula(&mut r, &x(), &c, 2), Env::from([("x".to_string(), u)]))
            };
            check(f.quantifier_depth() <= 2, || format!("generated depth > 2: {f}"))?;
            let got = k.truth_value(&f, &env).map_err(|e| format!("{f}: {e}"))?;
            let want = BruteForce::for_structure(&k).truth(&f, &env, k.space().len());
            check(event_flags(&got) == want, || format!("mismatch on {f}"))?;
            log.push_str(&render(&EvalReport::new(&f, &got, zero())));
            count += 1;
        }
    }
    within(start, Duration::from_secs(10), "oracle equivalence")?;
    Ok(format!("{count} formulas agree with the brute-force evaluator"))
}

const SCHEMATA: [&str; 20] = [
    "(forall x)(x = x)",
    "(forall x)(forall y)(x = y -> y = x)",
    "(forall x)(forall y)(forall z)((x = y & y = z) -> x = z)",
    "(forall x)(x <= x)",
    "(forall x)(forall y)(x <= y | y <= x)",
    "(forall x)(forall y)((x <= y & y <= x) -> x = y)",
    "(forall x)(forall y)(p1(pair(x, y)) = x)",
    "(forall x)(forall y)(p2(pair(x, y)) = y)",
    "(forall z)(pair(p1(z), p2(z)) = z)",
    "(forall x)(x + 0 = x)",
    "(forall x)(forall y)(x + y = y + x)",
    "(forall x)(forall y)(x * y = y * x)",
    "(forall x)(x * 1 = x)",
    "(forall x)(forall y)(x <= x + y)",
    "(forall x)(len(x) <= x)",
    "(exists x)(x = r0)",
    "(forall x)(x <= r0) -> (exists x)(x <= r0)",
    "(forall x)(x <= r1) | (exists x)(!(x <= r1))",
    "!((exists x)(x != x))",
    "(forall x)(forall y)(x = y -> (x <= r1 -> y <= r1))",
];

const SCENARIO_EXHAUSTIVE: &str = "\
space n_bits=3 exhaustive
rv r0 builtin identity
rv r1 const 5
rv r2 table 7 0 3 3 1 2 6 4
family: r0 r1 r2
";

const SCENARIO_SAMPLED: &str = "\
space n_bits=64 samples=16 seed=3
rv r0 builtin identity
rv r1 table 1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16
rv r2 const 0
family level 1: r0 r1 r2
family level 2: r0 r1
";

fn validity_suite() -> Outcome {
    let mut structures: Vec<Structure> = Vec::new();
    for text in [SCENARIO_EXHAUSTIVE, SCENARIO_SAMPLED] {
        let sc = Scenario::parse(text, Path::new("."), "inline").map_err(|e| e.to_string())?;
        structures.push(Structure::new(sc.structure().family().clone()));
    }
    let mut r = rng(202);
    for size in [2, 3, 4, 6] {
        structures.push(random_structure(&mut r, 12, size, 30));
    }
    for (i, k) in structures.iter().enumerate() {
        for s in SCHEMATA {
            let f = k.parse(s).map_err(|e| format!("{s}: {e}"))?;
            let m = k.sentence_value(&f).map_err(|e| format!("{s}: {e}"))?.measure();
            check(m.value() == Rational::from_integer(1), || {
                format!("scenario {i}: {s} has measure {m}")
            })?;
        }
    }
    Ok(format!("{} schemata have measure 1 on {} scenarios", SCHEMATA.len(), structures.len()))
}

/// Existential witnesses are exact. Appends one JSON report per formula.
fn witness_exactness(log: &mut String) -> Outcome {
    let start = Instant::now();
    let mut r = rng(303);
    let mut count = 0;
    for _ in 0..20 {
        let samples = r.random_range(8..=64);
        let size = r.random_range(2..=8);
        let k = random_structure(&mut r, samples, size, 9);
        let c = names(&k);
        for _ in 0..6 {
            let a = random_open_formula(&mut r, &x(), &c, 3);
            let env = Env::new();
            let w = witness_existential(&k, &a, "x", &env, WitnessPolicy::Synthesize)
                .map_err(|e| format!("{a}: {e}"))?;
            let target = k
                .sentence_value(&Formula::exists("x", a.clone()))
                .map_err(|e| e.to_string())?;
            check(w.gap.value() == zero(), || format!("gap {} on {a}", w.gap))?;
            check(w.event == target, || format!("event differs on {a}"))?;
            log.push_str(&render(&WitnessReport::new(&a, "x", false, WitnessPolicy::Synthesize, &w)));
            count += 1;
        }
    }
    within(start, Duration::from_secs(30), "witness exactness")?;
    Ok(format!("{count} open formulas: gap 0, event equal to the existential"))
}

fn case_merge_law() -> Outcome {
    let mut r = rng(404);
    let mut count = 0;
    for _ in 0..50 {
        let samples = r.random_range(4..=32);
        let k = random_structure(&mut r, samples, 4, 9);
        let c = names(&k);
        for _ in 0..10 {
            let a = random_open_formula(&mut r, &x(), &c, 3);
            let alpha = random_rv(&mut r, "alpha", k.space(), 9);
            let beta = random_rv(&mut r, "beta", k.space(), 9);
            let env = Env::new();
            let merged = case_merge(&k, &alpha, &beta, &a, "x", &env).map_err(|e| e.to_string())?;
            let at = |rv: &RandomVariable| {
                let e = Env::from([("x".to_string(), rv.clone())]);
                BruteForce::for_structure(&k).truth(&a, &e, k.space().len())
            };
            let (fa, fb, fm) = (at(&alpha), at(&beta), at(&merged));
            let want: Vec<bool> = fa.iter().zip(&fb).map(|(p, q)| *p || *q).collect();
            check(fm == want, || format!("merge law fails for {a}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} triples satisfy the merge law"))
}

fn random_prefix_formula(r: &mut TestRng, c: &[String], blocks: usize) -> Formula {
    let vars: Vec<String> = (0..2 * blocks).map(|i| format!("v{i}")).collect();
    let mut f = random_open_formula(r, &vars, c, 2);
    for i in (0..blocks).rev() {
        f = Formula::exists(&vars[2 * i], Formula::forall(&vars[2 * i + 1], f));
    }
    f
}

fn skolem_exactness() -> Outcome {
    let mut r = rng(505);
    let mut count = 0;
    for i in 0..60 {
        let samples = r.random_range(4..=16);
        let k = random_structure(&mut r, samples, 4, 6);
        let c = names(&k);
        let blocks = 1 + i % 2;
        let f = random_prefix_formula(&mut r, &c, blocks);
        let chain = skolem_chain(&k, &f, &Env::new(), WitnessPolicy::Synthesize)
            .map_err(|e| format!("{f}: {e}"))?;
        let truth = k.sentence_value(&f).map_err(|e| e.to_string())?;
        check(chain.truth == truth, || format!("chain truth differs on {f}"))?;
        check(chain.stages.len() == 2 * blocks, || format!("stage count on {f}"))?;
        // Re-evaluate every remainder with the witnesses so far, through the
        // reference evaluator.
        let mut env = Env::new();
        for st in &chain.stages {
            env.insert(st.var.clone(), st.witness.clone());
            let want = BruteForce::for_structure(&k).truth(&st.remainder, &env, k.space().len());
            check(want == event_flags(&truth), || {
                format!("stage ({}) changes the value of {f}", st.var)
            })?;
            check(st.value == truth, || format!("reported stage value differs on {f}"))?;
        }
        count += 1;
    }
    Ok(format!("{count} exists-forall instances keep the value at every stage"))
}

/// A structure whose values at each sample are closed under the projections:
/// constants `0..=m` plus random members with values at most `m`.
fn projection_closed(r: &mut TestRng, samples: usize, m: u64, extra: usize) -> Structure {
    let space = rvforce_testkit::random_space(r, 8, samples);
    let mut members: Vec<RandomVariable> = (0..=m)
        .map(|v| RandomVariable::constant(&format!("c{v}"), &space, v.into()))
        .collect();
    for i in 0..extra {
        members.push(random_rv(r, &format!("r{i}"), &space, m));
    }
    Structure::new(Family::new(&space, members).unwrap())
}

fn pairing_lift() -> Outcome {
    let mut r = rng(606);
    let mut scenarios = 0;
    for _ in 0..20 {
        let samples = r.random_range(4..=12);
        let k = projection_closed(&mut r, samples, 3, 2);
        let c: Vec<String> = ["r0", "r1"].iter().map(|s| s.to_string()).collect();
        let formulas: Vec<Formula> = (0..3)
            .map(|i| {
                let y = format!("y{i}");
                let body = random_open_formula(&mut r, &["x".to_string(), y.clone()], &c, 1);
                let body = Formula::and(body, Formula::le(Term::var("x"), Term::var("x")));
                Formula::exists(&y, body)
            })
            .collect();
        let p = TypeSpec::new(formulas.clone(), "x").map_err(|e| e.to_string())?;
        let red = pairing_reduce(&formulas, "x").map_err(|e| e.to_string())?;
        let zk = k
            .over_family(pack_extension(&k, 3, 1_000_000).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let xs = conjunction_chain(&formulas).map_err(|e| e.to_string())?;
        let zs = conjunction_chain(&red.formulas).map_err(|e| e.to_string())?;
        for j in 0..3 {
            let lhs = k.sentence_value(&Formula::exists("x", xs[j].clone())).unwrap().measure();
            let rhs = zk.sentence_value(&Formula::exists(&red.var, zs[j].clone())).unwrap().measure();
            check(lhs == rhs, || {
                format!("k={}: x side {lhs}, z side {rhs} for {}", j + 1, xs[j])
            })?;
        }
        let rep = realize_existential_type(&k, &p, zero(), WitnessPolicy::Synthesize, 3, 1_000_000, false)
            .map_err(|e| e.to_string())?;
        let lift = rep.lift.as_ref().ok_or("no lift recorded")?;
        let env = Env::from([(red.var.clone(), lift.z_report.witness.clone())]);
        let projected = k.apply_term(&Term::p1(Term::var(&red.var)), &env).unwrap();
        check(rep.witness.same_values(&projected), || "witness is not p1 of the z witness".into())?;
        check(rep.check.defect == lift.z_report.check.defect, || {
            format!("defect {} vs z defect {}", rep.check.defect, lift.z_report.check.defect)
        })?;
        scenarios += 1;
    }
    Ok(format!("{scenarios} projection-closed scenarios: equal measures for k <= 3, equal defects"))
}

fn open_realization() -> Outcome {
    let mut r = rng(707);
    let mut count = 0;
    for _ in 0..100 {
        let samples = r.random_range(4..=24);
        let size = r.random_range(2..=8);
        let k = random_structure(&mut r, samples, size, 6);
        let c = names(&k);
        let len = r.random_range(1..=5);
        let formulas: Vec<Formula> = (0..len)
            .map(|_| {
                Formula::and(
                    random_open_formula(&mut r, &x(), &c, 2),
                    Formula::le(Term::var("x"), Term::var("x")),
                )
            })
            .collect();
        let p = TypeSpec::new(formulas.clone(), "x").map_err(|e| e.to_string())?;
        let syn = realize_open_type(&k, &p, zero(), WitnessPolicy::Synthesize, false)
            .map_err(|e| e.to_string())?;
        check(syn.check.defect.value() == zero(), || {
            format!("synthesize defect {} on a type of length {len}", syn.check.defect)
        })?;

        let fam = realize_open_type(&k, &p, zero(), WitnessPolicy::FamilyOnly, false)
            .map_err(|e| e.to_string())?;
        // Brute-force optimum over members on the selected prefix.
        let s = fam.stage;
        let bf = BruteForce::for_structure(&k);
        let n = k.space().len();
        let holds_all = |u: &RandomVariable| -> Vec<bool> {
            let env = Env::from([("x".to_string(), u.clone())]);
            let per: Vec<Vec<bool>> = formulas[..s].iter().map(|f| bf.truth(f, &env, n)).collect();
            (0..n).map(|w| per.iter().all(|v| v[w])).collect()
        };
        let rows: Vec<Vec<bool>> = k.range().iter().map(holds_all).collect();
        let lhs: Vec<bool> = (0..n).map(|w| rows.iter().any(|v| v[w])).collect();
        let best = rows
            .iter()
            .map(|v| (0..n).filter(|&w| lhs[w] && !v[w]).count())
            .min()
            .unwrap();
        check(fam.check.defect.value() == Rational::new(best as u64, n as u64), || {
            format!("family-only defect {} but optimum {best}/{n}", fam.check.defect)
        })?;
        count += 1;
    }
    Ok(format!("{count} open types: synthesize defect 0, family-only defect optimal"))
}

fn minimal_universal_failure() -> Outcome {
    let space = SampleSpace::exhaustive(2).unwrap();
    let a = RandomVariable::from_u64s("a", &space, &[0, 1, 0, 1]).unwrap();
    let b = RandomVariable::from_u64s("b", &space, &[1, 0, 1, 0]).unwrap();
    let k = Structure::new(Family::new(&space, vec![a.clone(), b.clone()]).unwrap());
    let f = k.parse("(forall y)(x <= y)").unwrap();
    let p = TypeSpec::new(vec![f.clone()], "x").unwrap();

    // Reference: per sample, the left side holds if some member is below
    // every member there; the right side is the formula at the candidate.
    let bf = BruteForce::for_structure(&k);
    let at = |u: &RandomVariable| bf.truth(&f, &Env::from([("x".to_string(), u.clone())]), 4);
    let lhs: Vec<bool> = (0..4).map(|w| at(&a)[w] || at(&b)[w]).collect();
    for u in [&a, &b] {
        let rhs = at(u);
        let want_lhs = lhs.iter().filter(|&&v| v).count();
        let want_rhs = rhs.iter().filter(|&&v| v).count();
        let want_defect = (0..4).filter(|&w| lhs[w] && !rhs[w]).count();
        let c = check_satur(&k, &p, u, zero()).map_err(|e| e.to_string())?;
        let got = (c.lhs.cardinality(), c.rhs.cardinality(), c.defect.value());
        check(got == (want_lhs, want_rhs, Rational::new(want_defect as u64, 4)), || {
            format!("{}: got {got:?}", u.name())
        })?;
        check(
            c.lhs.measure().value() == Rational::from_integer(1)
                && c.rhs.measure().value() == Rational::new(1, 2)
                && c.defect.value() == Rational::new(1, 2),
            || format!("{}: measures {} {} {}", u.name(), c.lhs.measure(), c.rhs.measure(), c.defect),
        )?;
    }
    Ok("lhs 1, rhs 1/2, defect 1/2 for both members".into())
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_rvforce"))
}

const DEMO_ARGS: [&str; 14] = [
    "demo",
    "universal-failure",
    "--n",
    "256",
    "--levels",
    "4",
    "--samples",
    "1024",
    "--seed",
    "7",
    "--horizon",
    "3",
    "--depth",
    "4",
];

fn run_cli(args: &[&str], workers: usize) -> Result<Vec<u8>, String> {
    let out = Command::new(bin())
        .args(args)
        .args(["--workers", &workers.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).trim().to_string());
    }
    Ok(out.stdout)
}

fn field<'a>(v: &'a serde_json::Value, path: &[&str]) -> Result<&'a serde_json::Value, String> {
    path.iter()
        .try_fold(v, |v, k| v.get(*k))
        .ok_or_else(|| format!("missing {}", path.join(".")))
}

fn universal_failure_demo() -> Outcome {
    let start = Instant::now();
    let mut args = DEMO_ARGS.to_vec();
    args.extend(["--report", "json"]);
    let out = run_cli(&args, 8)?;
    within(start, Duration::from_secs(60), "demo")?;
    let v: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let roots: Vec<u64> = field(&v, &["filtration"])?
        .as_array()
        .ok_or("filtration is not a list")?
        .iter()
        .filter_map(|l| l.get("root").and_then(|r| r.as_u64()))
        .collect();
    check(roots == [256, 16, 6, 4], || format!("level roots {roots:?}"))?;
    let lhs = (field(&v, &["lhs", "num"])?.as_u64(), field(&v, &["lhs", "den"])?.as_u64());
    check(lhs == (Some(1), Some(1)), || format!("LHS_3 = {lhs:?}"))?;
    let num = field(&v, &["rhs_max", "num"])?.as_u64().unwrap_or(u64::MAX);
    let den = field(&v, &["rhs_max", "den"])?.as_u64().unwrap_or(1);
    check(Rational::new(num, den) <= Rational::new(1, 20), || {
        format!("depth-4 maximum {num}/{den} exceeds 0.05")
    })?;
    Ok(format!("LHS_3 = 1, depth-4 core maximum = {num}/{den}, {:?}", start.elapsed()))
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .unwrap()
        .install(f)
}

fn determinism() -> Outcome {
    for (name, f) in [
        ("oracle equivalence", oracle_equivalence as fn(&mut String) -> Outcome),
        ("witness exactness", witness_exactness),
    ] {
        let run = |w| {
            in_pool(w, || {
                let mut log = String::new();
                f(&mut log).map(|_| log)
            })
        };
        let (one, eight) = (run(1)?, run(8)?);
        check(one == eight, || format!("{name} reports differ between 1 and 8 workers"))?;
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scn = dir.path().join("s.scn");
    std::fs::write(&scn, SCENARIO_SAMPLED).map_err(|e| e.to_string())?;
    let scn = scn.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["eval", "--scenario", scn, "--formula", "(forall x)(exists y)(x <= y + r1)", "--report", "json"],
        vec!["witness", "--scenario", scn, "--formula", "(exists x)(r1 <= x & x <= r0)", "--report", "json"],
        [DEMO_ARGS.as_slice(), &["--report", "json"]].concat(),
        [DEMO_ARGS.as_slice(), &["--report", "csv"]].concat(),
    ];
    for args in &cases {
        let (one, eight) = (run_cli(args, 1)?, run_cli(args, 8)?);
        check(one == eight, || format!("`{}` differs between 1 and 8 workers", args[..2].join(" ")))?;
    }
    Ok("library and CLI reports byte-identical with 1 and 8 workers".into())
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("oracle equivalence", Box::new(|| oracle_equivalence(&mut String::new()))),
        ("validity suite", Box::new(validity_suite)),
        ("existential witness exactness", Box::new(|| witness_exactness(&mut String::new()))),
        ("case-merge law", Box::new(case_merge_law)),
        ("exists-forall stage exactness", Box::new(skolem_exactness)),
        ("pairing lift of existential types", Box::new(pairing_lift)),
        ("open-type realization", Box::new(open_realization)),
        ("universal failure, minimal instance", Box::new(minimal_universal_failure)),
        ("universal failure demo", Box::new(universal_failure_demo)),
        ("determinism across worker counts", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
