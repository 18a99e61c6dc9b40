//! Command-line pipelines over the MAX-3-EQUAL toolkit: instance generation,
//! solve-and-round, certification, dictatorship tests, and orthant queries.
//!
//! Machine-readable output (JSON, or key/value CSV with `--format csv`) goes
//! to stdout or `--output`; a human summary goes to stderr. Runs are
//! deterministic given their flags; the seed defaults to 0 and is echoed in
//! every report. Thread count follows `RAYON_NUM_THREADS`.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 solver non-convergence.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use max3eq::csp::{brute_force_opt, random_instance, Instance, EXHAUSTIVE_LIMIT};
use max3eq::dictatorship::{accept_and, accept_equal, EvalMode, TestFunction};
use max3eq::dist::parse_rational;
use max3eq::gaussian::{mc_orthant, trivariate_orthant, Covariance};
use max3eq::rounding::{empirical_round, expected_value_closed_form};
use max3eq::sdp::{build, solve, SolveOptions};
use max3eq::Error;

#[derive(Parser)]
#[command(name = "max3eq", version, about = "MAX-3-EQUAL SDP relaxation, rounding, and certification")]
struct Cli {
    /// RNG seed echoed in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it in the instance JSON format.
    Gen(GenArgs),
    /// Solve the SDP relaxation, round it, and report every value produced.
    SolveRound(SolveRoundArgs),
    /// Produce certified intervals or run the trigonometric fact suite.
    Certify(CertifyArgs),
    /// Run a dictatorship test against a named function.
    Dict(DictArgs),
    /// Trivariate orthant probability, closed form and optional Monte Carlo.
    Orthant(OrthantArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of Boolean variables (at least 3).
    #[arg(long)]
    n: usize,
    /// Number of constraints.
    #[arg(long)]
    m: usize,
}

#[derive(Args)]
struct SolveRoundArgs {
    /// Instance file in the instance JSON format.
    #[arg(long)]
    instance: PathBuf,
    /// Solver tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Solver iteration cap.
    #[arg(long, default_value_t = 50_000)]
    max_iter: usize,
    /// Monte-Carlo rounding trials.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Skip the exhaustive optimum even when n is small enough.
    #[arg(long)]
    skip_brute_force: bool,
}

#[derive(Args)]
struct CertifyArgs {
    /// What to certify.
    #[arg(long, value_enum)]
    target: CertifyTarget,
    /// Grid points per inequality for the fact suite.
    #[arg(long, default_value_t = 100_000)]
    grid: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum CertifyTarget {
    Alpha,
    H1,
    Trig,
}

#[derive(Args)]
struct DictArgs {
    /// Which tester to run.
    #[arg(long, value_enum)]
    test: Tester,
    /// Function name: dictator, const-half, majority-<odd n>,
    /// random-balanced-<n>.
    #[arg(long = "function", alias = "f")]
    function: String,
    /// Noise level for the equality tester (rational or decimal).
    #[arg(long, default_value = "0.4")]
    delta: String,
    /// Arity of the AND tester.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Uniform mixing weight for the AND tester (rational or decimal).
    #[arg(long, default_value = "0.05")]
    xi: String,
    /// Monte-Carlo trials; exact junta evaluation when omitted.
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tester {
    Equal,
    And,
}

#[derive(Args)]
struct OrthantArgs {
    rho1: f64,
    rho2: f64,
    rho3: f64,
    /// Optional Monte-Carlo cross-check sample count.
    #[arg(long)]
    trials: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut exit = ExitCode::SUCCESS;
    let (name, config, result) = match &cli.command {
        Command::Gen(args) => {
            let inst = random_instance(args.n, args.m, cli.seed)?;
            // The instance format itself is the output, not a report.
            emit(cli, &inst.to_json())?;
            eprintln!(
                "generated instance: n={} constraints={} seed={}",
                args.n, args.m, cli.seed
            );
            return Ok(ExitCode::SUCCESS);
        }
        Command::SolveRound(args) => {
            let text = std::fs::read_to_string(&args.instance)?;
            let inst = Instance::from_json(&text)?;
            let problem = build(&inst)?;
            let opts = SolveOptions {
                tol: args.tol,
                max_iter: args.max_iter,
                penalty: 1.0,
            };
            let sol = solve(&problem, &opts)?;
            let report = expected_value_closed_form(&inst, &sol.gram)?;
            let empirical = empirical_round(&inst, &sol.gram, args.trials, cli.seed)?;
            let brute = if inst.n <= EXHAUSTIVE_LIMIT && !args.skip_brute_force {
                let (value, witness) = brute_force_opt(&inst)?;
                Some(json!({
                    "value": value,
                    "witness": witness.values,
                }))
            } else {
                None
            };
            if !sol.converged {
                eprintln!(
                    "solver did not converge: primal residual {:.3e}, dual residual {:.3e}",
                    sol.primal_residual, sol.dual_residual
                );
                exit = ExitCode::from(3);
            }
            eprintln!(
                "sdp objective {:.6} | closed-form rounded value {:.6} | empirical {:.6} ± {:.6}{}",
                sol.objective,
                report.expected_value_closed_form,
                empirical.mean,
                empirical.std_error,
                brute
                    .as_ref()
                    .map(|b| format!(" | exhaustive optimum {:.6}", b["value"].as_f64().unwrap()))
                    .unwrap_or_default()
            );
            (
                "solve-round",
                json!({
                    "instance": args.instance.display().to_string(),
                    "tol": args.tol,
                    "max_iter": args.max_iter,
                    "trials": args.trials,
                }),
                json!({
                    "n": inst.n,
                    "constraints": inst.num_constraints(),
                    "sdp": sol.export(),
                    "rounding": {
                        "expected_value_closed_form": report.expected_value_closed_form,
                        "min_ratio": report.min_ratio,
                        "per_constraint_kappa": report.per_constraint_kappa,
                        "per_constraint_lambda": report.per_constraint_lambda,
                        "empirical": empirical,
                    },
                    "brute_force": brute,
                    "closed_form_to_sdp_ratio":
                        report.expected_value_closed_form / sol.objective,
                }),
            )
        }
        Command::Certify(args) => {
            let (summary, value) = match args.target {
                CertifyTarget::Alpha => {
                    let cert = max3eq::certify::certify_alpha();
                    let s = format!(
                        "alpha in [{:.6}, {:.6}] (argmin a = {:.6}, delta = {:.4})",
                        cert.alpha.lo, cert.alpha.hi, cert.argmin_a, cert.argmin_delta
                    );
                    (s, serde_json::to_value(&cert)?)
                }
                CertifyTarget::H1 => {
                    let cert = max3eq::certify::certify_h1_infimum();
                    let s = format!(
                        "boundary-branch infimum in [{:.6}, {:.6}] (argmin {:.6})",
                        cert.lo, cert.hi, cert.argmin_estimate
                    );
                    (s, serde_json::to_value(&cert)?)
                }
                CertifyTarget::Trig => {
                    let report = max3eq::certify::verify_trig_facts(args.grid)?;
                    let worst = report
                        .facts
                        .iter()
                        .map(|f| f.worst_margin)
                        .fold(f64::INFINITY, f64::min);
                    let s = format!(
                        "{} inequalities checked, worst margin {:.3e}",
                        report.facts.len(),
                        worst
                    );
                    (s, serde_json::to_value(&report)?)
                }
            };
            eprintln!("{summary}");
            ("certify", json!({ "grid": args.grid }), value)
        }
        Command::Dict(args) => {
            let function = parse_function(&args.function, cli.seed)?;
            let mode = match args.trials {
                Some(trials) => EvalMode::MonteCarlo {
                    trials,
                    seed: cli.seed,
                },
                None => EvalMode::Exact,
            };
            let report = match args.test {
                Tester::Equal => {
                    let delta = parse_rational(&args.delta)?;
                    accept_equal(&function, &delta, mode)?
                }
                Tester::And => {
                    let xi = parse_rational(&args.xi)?;
                    accept_and(&function, args.k, &xi, mode)?
                }
            };
            eprintln!(
                "acceptance {:.6} (completeness bound {:.6}, soundness bound {:.6})",
                report.acceptance.value(),
                report.completeness_bound,
                report.soundness_bound
            );
            let mut value = report.to_json_value();
            value["function"] = args.function.clone().into();
            let config = match args.test {
                Tester::Equal => json!({ "test": "equal", "delta": args.delta }),
                Tester::And => json!({ "test": "and", "k": args.k, "xi": args.xi }),
            };
            ("dict", config, value)
        }
        Command::Orthant(args) => {
            let closed = trivariate_orthant(args.rho1, args.rho2, args.rho3)?;
            let mc = match args.trials {
                Some(trials) => {
                    let cov = Covariance::correlation_triple(args.rho1, args.rho2, args.rho3)?;
                    Some(mc_orthant(&cov, trials, cli.seed)?)
                }
                None => None,
            };
            eprintln!(
                "closed form {closed:.6}{}",
                mc.map(|e| format!(" | Monte Carlo {:.6} ± {:.6}", e.mean, e.std_error))
                    .unwrap_or_default()
            );
            (
                "orthant",
                json!({ "rho": [args.rho1, args.rho2, args.rho3], "trials": args.trials }),
                json!({
                    "closed_form": closed,
                    "monte_carlo": mc,
                    "sigmas": mc.map(|e| e.sigmas_from(closed)),
                }),
            )
        }
    };

    let report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "seed": cli.seed,
        "config": config,
        "result": result,
    });
    let rendered = match cli.format {
        Format::Json => serde_json::to_string_pretty(&report)?,
        Format::Csv => to_csv(&report),
    };
    emit(cli, &rendered)?;
    Ok(exit)
}

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parse_function(name: &str, seed: u64) -> Result<TestFunction, Error> {
    let invalid = || Error::ParameterDomain {
        name: "function",
        value: name.to_string(),
        domain: "dictator | const-half | majority-<odd n> | random-balanced-<n>",
    };
    if name == "dictator" {
        return TestFunction::dictator(3, 0);
    }
    if name == "const-half" {
        return Ok(TestFunction::ConstHalf { n: 3 });
    }
    if let Some(arity) = name.strip_prefix("majority-") {
        let n: usize = arity.parse().map_err(|_| invalid())?;
        return TestFunction::majority(n);
    }
    if let Some(arity) = name.strip_prefix("random-balanced-") {
        let n: usize = arity.parse().map_err(|_| invalid())?;
        return TestFunction::random_balanced(n, seed);
    }
    Err(invalid())
}

/// Key/value flattening of a report for `--format csv`: one `path,value`
/// row per scalar, arrays of scalars joined with `;`.
fn to_csv(value: &Value) -> String {
    fn scalar(v: &Value) -> Option<String> {
        match v {
            Value::Null => Some(String::new()),
            Value::Bool(b) => Some(b.to_string()),
            Value::Number(n) => Some(n.to_string()),
            Value::String(s) => Some(s.clone()),
            _ => None,
        }
    }
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        if let Some(s) = scalar(v) {
            let _ = writeln!(out, "{prefix},{s}");
            return;
        }
        match v {
            Value::Array(items) => {
                if items.iter().all(|i| scalar(i).is_some()) {
                    let joined: Vec<String> = items.iter().filter_map(|i| scalar(i)).collect();
                    let _ = writeln!(out, "{prefix},{}", joined.join(";"));
                } else {
                    for (idx, item) in items.iter().enumerate() {
                        walk(&format!("{prefix}.{idx}"), item, out);
                    }
                }
            }
            Value::Object(map) => {
                for (key, item) in map {
                    let path = if prefix.is_empty() {
                        key.clone()
                    } else {
                        format!("{prefix}.{key}")
                    };
                    walk(&path, item, out);
                }
            }
            _ => unreachable!(),
        }
    }
    let mut out = String::from("key,value\n");
    walk("", value, &mut out);
    out
}
