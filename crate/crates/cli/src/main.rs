use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rvforce::harness::{
    emit_report, structure_scenario_text, CheckReport, DemoReport, EvalReport, RealizeReport,
    Report, ReportFormat, Scenario, SkolemReport, WitnessReport,
};
use rvforce::saturation::{
    build_universal_failure, check_satur, realize_existential_type, TypeSpec,
    UniversalFailureParams, DEFAULT_CLOSURE_CAP,
};
use rvforce::space::parse_rational;
use rvforce::witnessing::{cowitness_universal, skolem_chain, witness_existential, WitnessPolicy};
use rvforce::{Env, Formula, Rational};

#[derive(Parser)]
#[command(name = "rvforce", version, about = "Boolean-valued evaluation over finite sample spaces")]
struct Cli {
    /// Output format: text, json or csv.
    #[arg(long, global = true, default_value = "text")]
    report: ReportFormat,

    /// Worker threads for evaluation (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Truth value of a formula.
    Eval {
        #[command(flatten)]
        input: FormulaInput,
        /// Validity tolerance; defaults to the scenario's eps.
        #[arg(long)]
        eps: Option<String>,
    },
    /// Witness for an existential (or counter-witness for a universal).
    Witness {
        #[command(flatten)]
        input: FormulaInput,
        #[arg(long, default_value = "x")]
        var: String,
        #[arg(long, default_value = "synthesize")]
        policy: WitnessPolicy,
    },
    /// Stage-by-stage witnesses for an exists-forall prefix.
    Skolemize {
        #[command(flatten)]
        input: FormulaInput,
        #[arg(long, default_value = "synthesize")]
        policy: WitnessPolicy,
    },
    /// Realize a finite type modulo eps.
    Realize {
        #[command(flatten)]
        ty: TypeInput,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long, default_value = "synthesize")]
        policy: WitnessPolicy,
        /// Pairing depth of the packed witness tuples for existential types.
        #[arg(long, default_value_t = 1)]
        closure_depth: usize,
        /// Drop prefix positions that fail the measure-drop check.
        #[arg(long)]
        thin: bool,
    },
    /// Check whether a declared variable realizes a type.
    CheckSatur {
        #[command(flatten)]
        ty: TypeInput,
        #[arg(long)]
        witness: String,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        demo: Demo,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// A type realized by every finite prefix but by no core member.
    UniversalFailure {
        #[arg(long, default_value_t = 256)]
        n: u32,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 1024)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        horizon: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Also write the generated structure as a scenario file.
        #[arg(long)]
        emit_scenario: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FormulaInput {
    #[arg(long)]
    scenario: PathBuf,
    /// Formula text, `@path` to read it from a file, or a formula name from
    /// the scenario.
    #[arg(long)]
    formula: String,
}

#[derive(Args)]
struct TypeInput {
    #[arg(long)]
    scenario: PathBuf,
    /// Type file: one formula per line, `#` comments.
    #[arg(long = "type")]
    type_file: PathBuf,
    /// Free variable of the type.
    #[arg(long, default_value = "x")]
    var: String,
}

fn load(path: &Path) -> Result<Scenario> {
    Ok(Scenario::load(path)?)
}

fn resolve_formula(sc: &Scenario, spec: &str) -> Result<Formula> {
    if let Some(path) = spec.strip_prefix('@') {
        let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        return Ok(sc.structure().parse(text.trim())?);
    }
    if let Some(f) = sc.formula(spec) {
        return Ok(f.clone());
    }
    Ok(sc.structure().parse(spec)?)
}

fn load_type(sc: &Scenario, ty: &TypeInput) -> Result<TypeSpec> {
    let text = fs::read_to_string(&ty.type_file)
        .with_context(|| format!("reading {}", ty.type_file.display()))?;
    let k = sc.structure();
    let spec = TypeSpec::parse(&text, &ty.var, |n| k.is_declared(n)).map_err(|e| {
        rvforce::Error::Scenario {
            path: ty.type_file.display().to_string(),
            line: match &e {
                rvforce::Error::Parse(p) => p.line,
                _ => 0,
            },
            message: format!("{}: {e}", e.kind()),
        }
    })?;
    Ok(spec)
}

fn eps_or(sc: &Scenario, eps: &Option<String>) -> Result<Rational> {
    match eps {
        Some(t) => Ok(parse_rational(t)?),
        None => Ok(sc.eps()),
    }
}

fn run(cli: &Cli) -> Result<Box<dyn Report + Send>> {
    let env = Env::new();
    match &cli.command {
        Command::Eval { input, eps } => {
            let sc = load(&input.scenario)?;
            let f = resolve_formula(&sc, &input.formula)?;
            let event = sc.structure().truth_value(&f, &env)?;
            Ok(Box::new(EvalReport::new(&f, &event, eps_or(&sc, eps)?)))
        }
        Command::Witness { input, var, policy } => {
            let sc = load(&input.scenario)?;
            let f = resolve_formula(&sc, &input.formula)?;
            let k = sc.structure();
            let (body, universal) = match &f {
                Formula::Exists(v, b) if v == var => (b.as_ref().clone(), false),
                Formula::Forall(v, b) if v == var => (b.as_ref().clone(), true),
                _ => (f.clone(), false),
            };
            let r = if universal {
                cowitness_universal(k, &body, var, &env, *policy)?
            } else {
                witness_existential(k, &body, var, &env, *policy)?
            };
            Ok(Box::new(WitnessReport::new(&body, var, universal, *policy, &r)))
        }
        Command::Skolemize { input, policy } => {
            let sc = load(&input.scenario)?;
            let f = resolve_formula(&sc, &input.formula)?;
            let chain = skolem_chain(sc.structure(), &f, &env, *policy)?;
            Ok(Box::new(SkolemReport::new(&chain, *policy)))
        }
        Command::Realize {
            ty,
            eps,
            policy,
            closure_depth,
            thin,
        } => {
            let sc = load(&ty.scenario)?;
            let spec = load_type(&sc, ty)?;
            let k = sc.structure();
            let r = realize_existential_type(
                k,
                &spec,
                eps_or(&sc, eps)?,
                *policy,
                *closure_depth,
                DEFAULT_CLOSURE_CAP,
                *thin,
            )?;
            Ok(Box::new(RealizeReport::new(k, &r)))
        }
        Command::CheckSatur { ty, witness, eps } => {
            let sc = load(&ty.scenario)?;
            let spec = load_type(&sc, ty)?;
            let k = sc.structure();
            let u = k
                .constant(witness)
                .ok_or_else(|| rvforce::Error::Undeclared(witness.clone()))?;
            let c = check_satur(k, &spec, u, eps_or(&sc, eps)?)?;
            Ok(Box::new(CheckReport::new(k, spec.var(), spec.formulas(), u, &c)))
        }
        Command::Demo {
            demo:
                Demo::UniversalFailure {
                    n,
                    levels,
                    samples,
                    seed,
                    horizon,
                    depth,
                    emit_scenario,
                },
        } => {
            let params = UniversalFailureParams {
                n: *n,
                levels: *levels,
                samples: *samples,
                seed: *seed,
                horizon: *horizon,
                depth: *depth,
            };
            let u = build_universal_failure(params)?;
            if let Some(path) = emit_scenario {
                let formulas: Vec<(String, Formula)> = u
                    .type_spec
                    .formulas()
                    .iter()
                    .enumerate()
                    .map(|(i, f)| (format!("a{}", i + 1), f.clone()))
                    .collect();
                let text = structure_scenario_text(&u.structure, Rational::from_integer(0), &formulas);
                fs::write(path, text).map_err(rvforce::Error::Io)?;
            }
            Ok(Box::new(DemoReport::new(&u)))
        }
    }
}

fn reason(e: &anyhow::Error) -> String {
    let msg = match e.downcast_ref::<rvforce::Error>() {
        Some(core) => format!("{}: {core}", core.kind()),
        None => match e.root_cause().downcast_ref::<io::Error>() {
            Some(io) => format!("io: {e}: {io}"),
            None => format!("invalid-argument: {e}"),
        },
    };
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn fail(msg: &str, code: u8) -> ExitCode {
    let _ = writeln!(io::stderr(), "error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail(&format!("usage: {first}"), 2);
        }
    };

    let outcome = match cli.workers {
        Some(0) => Err(anyhow!("--workers must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| anyhow!("thread pool: {e}"))
            .and_then(|pool| pool.install(|| run(&cli))),
        None => run(&cli),
    };

    let report = match outcome {
        Ok(r) => r,
        Err(e) => return fail(&reason(&e), 1),
    };
    let stdout = io::stdout();
    let mut sink = stdout.lock();
    match emit_report(report.as_ref(), cli.report, &mut sink) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&format!("{}: {e}", e.kind()), 1),
    }
}
