//! `alexot` command line. Exit codes: 0 pass, 1 verification failure,
//! 2 input error, 3 capability error.

mod output;
mod parse;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alexot::comparison::{check_first_variation_sampled, check_triangle_comparison_in, default_region, DEFAULT_T_GRID};
use alexot::duality::{is_c_concave, FEASIBILITY_TOL};
use alexot::instance::{generate, plane_translation, Instance, TargetSpec};
use alexot::monge::{default_fd_step, default_tol, verify_graph_and_formula, verify_ladder, verify_uniqueness, MapVerificationReport};
use alexot::solver::{duality_gap, oracle_bruteforce, slackness_residual, solve_exact};
use alexot::Error;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    pub fn json(source: &str, e: &serde_json::Error) -> Self {
        let what = match e.classify() {
            serde_json::error::Category::Data => "invalid data",
            serde_json::error::Category::Eof => "unexpected end of input",
            _ => "malformed JSON",
        };
        CliError::input(format!("{source}:{}:{}: {what}: {e}", e.line(), e.column()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Size(_)) { 3 } else { 2 };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "alexot", version, about = "Optimal transport on model Alexandrov surfaces with verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Write the JSON result here (atomically) instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the discrete transport problem of an instance.
    Solve {
        instance: PathBuf,
        /// Cross-check the optimum by exhaustive enumeration.
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Generate an instance from seeded samples of a region.
    Generate(GenerateArgs),
}

#[derive(Subcommand)]
enum Suite {
    /// Sampled triangle comparison against the model surface of curvature k.
    Curvature {
        /// `plane`, `sphere:K`, `cone:THETA` (e.g. `cone:1.5pi`), JSON or a JSON file.
        space: String,
        /// Model curvature; defaults to the space's curvature bound.
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Sampling region; defaults to the unit square, the unit disc about the apex or the whole sphere.
        #[arg(long)]
        region: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve and check the Kantorovich duality certificate.
    Duality {
        instance: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Check graph concentration and the map formula at every source atom.
    Map {
        instance: PathBuf,
        /// Finite-difference step; defaults to 1e-5 times the instance diameter.
        #[arg(long)]
        fd_step: Option<f64>,
        /// Residual tolerance; defaults to 1e-6 on the plane and 1e-4 otherwise.
        #[arg(long)]
        tol: Option<f64>,
        /// Resample the source region at these sizes, e.g. `250,500,1000`.
        #[arg(long)]
        refine: Option<String>,
        /// Seed for `--refine`; defaults to the instance seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Per-atom CSV; defaults to the `--out` path with a `.csv` extension.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare assignments across pivot rules and cost perturbations.
    Uniqueness {
        instance: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        perturbation: f64,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Ratio test of the first variation formula on sampled configurations.
    FirstVariation {
        space: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated step lengths.
        #[arg(long)]
        t_values: Option<String>,
        #[arg(long)]
        region: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct GenerateArgs {
    /// `plane`, `sphere:K`, `cone:THETA`, JSON or a JSON file.
    #[arg(long, required_unless_present = "preset")]
    space: Option<String>,
    /// `square`, `rect:X0,X1,Y0,Y1`, `grid:NX,NY`, `annulus:R0,R1`, `cap:MAX`, JSON or a JSON file.
    #[arg(long)]
    region: Option<String>,
    /// Number of source atoms.
    #[arg(long, required_unless_present = "preset")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `quadratic` or `power:P`.
    #[arg(long, default_value = "quadratic")]
    cost: String,
    /// Number of sampled target atoms.
    #[arg(long, default_value_t = 5)]
    targets: usize,
    /// Draw target weights instead of using uniform ones.
    #[arg(long)]
    random_weights: bool,
    /// Use the source translated by `DX,DY` as the target (plane only).
    #[arg(long)]
    translate: Option<String>,
    /// `translation`: the 20x20 unit-square grid and its translate by (2, 0).
    #[arg(long)]
    preset: Option<String>,
    #[command(flatten)]
    common: Common,
}

fn read_instance(path: &Path) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let raw: Instance = serde_json::from_str(&text).map_err(|e| CliError::json(&path.display().to_string(), &e))?;
    raw.validated().map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn with_config<T: Serialize>(config: Value, report: &T) -> Value {
    json!({ "config": config, "report": report })
}

/// `Ok(true)` when the command's checks passed.
fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Solve { instance, oracle, common } => {
            let inst = read_instance(&instance)?;
            let c = inst.cost.matrix(&inst.space, &inst.source.points(), &inst.target.points())?;
            let (w0, w1) = (inst.source.weights(), inst.target.weights());
            let (plan, pair) = solve_exact(&c, &w0, &w1)?;
            let gap = duality_gap(&plan, &pair, &inst.source, &inst.target)?;
            let mut out = json!({
                "plan": plan.entries(),
                "cost": plan.cost_total(),
                "phi": pair.phi,
                "phi_c": pair.phi_c,
                "gap": gap,
            });
            let mut passed = true;
            if oracle {
                let best = oracle_bruteforce(&c, &w0, &w1)?;
                let agrees = (best - plan.cost_total()).abs() <= 1e-12 * (1.0 + best.abs());
                out["oracle"] = json!({ "cost": best, "agrees": agrees });
                passed = agrees;
            }
            output::emit(common.out.as_deref(), &output::json(&out))?;
            Ok(passed)
        }
        Command::Verify { suite } => verify(suite),
        Command::Generate(args) => {
            let inst = generate_instance(&args)?;
            output::emit(args.common.out.as_deref(), &output::json(&inst))?;
            Ok(true)
        }
    }
}

fn generate_instance(args: &GenerateArgs) -> Result<Instance, CliError> {
    if let Some(p) = &args.preset {
        return match p.as_str() {
            "translation" => Ok(plane_translation()),
            _ => Err(CliError::input(format!("unknown preset {p:?}"))),
        };
    }
    let space = parse::space(args.space.as_deref().expect("clap enforces --space"))?;
    let n = args.n.expect("clap enforces --n");
    let region = match &args.region {
        Some(r) => parse::region(r)?,
        None => default_region(&space),
    };
    let cost = parse::cost(&args.cost)?;
    let target = match &args.translate {
        Some(t) => {
            let v: Vec<f64> = t.split(',').map(parse::number).collect::<Result<_, _>>()?;
            let [dx, dy] = v[..] else {
                return Err(CliError::input("--translate needs DX,DY"));
            };
            TargetSpec::Translate { offset: [dx, dy] }
        }
        None => TargetSpec::Sample { m: args.targets, random_weights: args.random_weights },
    };
    Ok(generate(space, cost, region, n, target, args.seed)?)
}

fn verify(suite: Suite) -> Result<bool, CliError> {
    match suite {
        Suite::Curvature { space, k, samples, seed, tol, region, common } => {
            let space = parse::space(&space)?;
            let region = match region {
                Some(r) => parse::region(&r)?,
                None => default_region(&space),
            };
            let k = k.unwrap_or_else(|| space.curvature_bound());
            let report = check_triangle_comparison_in(&space, &region, k, samples, seed, tol)?;
            output::emit(common.out.as_deref(), &output::json(&report))?;
            Ok(report.passed)
        }
        Suite::Duality { instance, tol, common } => {
            let inst = read_instance(&instance)?;
            let c = inst.cost.matrix(&inst.space, &inst.source.points(), &inst.target.points())?;
            let (plan, pair) = solve_exact(&c, &inst.source.weights(), &inst.target.weights())?;
            let gap = duality_gap(&plan, &pair, &inst.source, &inst.target)?;
            let slackness = slackness_residual(&c, &plan, &pair);
            let violation = pair.max_violation(&c);
            let concavity = is_c_concave(&inst.cost, &inst.space, &pair.phi, &inst.source.points(), &inst.target.points(), tol)?;
            let passed = gap.abs() <= tol * (1.0 + plan.cost_total().abs()) && slackness <= tol && violation <= FEASIBILITY_TOL;
            let report = json!({
                "cost": plan.cost_total(),
                "gap": gap,
                "slackness_residual": slackness,
                "max_violation": violation,
                "phi_cc_deviation": concavity.max_deviation,
                "support": plan.entries().len(),
                "passed": passed,
            });
            let config = json!({ "instance": instance, "tol": tol, "space": inst.space, "cost": inst.cost });
            output::emit(common.out.as_deref(), &output::json(&with_config(config, &report)))?;
            Ok(passed)
        }
        Suite::Map { instance, fd_step, tol, refine, seed, csv, common } => {
            let inst = read_instance(&instance)?;
            let tol = tol.unwrap_or_else(|| default_tol(&inst.space));
            let reports: Vec<MapVerificationReport> = match &refine {
                Some(sizes) => {
                    let sizes: Vec<usize> = parse::list(sizes, "--refine")?;
                    let region = inst.source_region.ok_or_else(|| CliError::input("--refine needs an instance with a source_region"))?;
                    let seed = seed.or(inst.seed).unwrap_or(0);
                    verify_ladder(&inst.space, &inst.cost, &region, &inst.target, &sizes, seed, fd_step, tol)?
                }
                None => {
                    let h = fd_step.unwrap_or_else(|| {
                        let mut all = inst.source.points();
                        all.extend(inst.target.points());
                        default_fd_step(&inst.space, &all)
                    });
                    vec![verify_graph_and_formula(&inst.space, &inst.cost, &inst.source, &inst.target, h, tol)?]
                }
            };
            let fractions: Vec<f64> = reports.iter().map(MapVerificationReport::split_fraction).collect();
            let trend = fractions.windows(2).all(|w| w[1] <= w[0]);
            let passed = trend && reports.iter().all(|r| r.passed);
            let config = json!({ "instance": instance, "tol": tol, "fd_step": fd_step, "refine": refine, "seed": seed });
            let body = json!({
                "config": config,
                "reports": reports,
                "split_fractions": fractions,
                "split_fraction_non_increasing": trend,
                "passed": passed,
            });
            output::emit(common.out.as_deref(), &output::json(&body))?;
            let csv_path = csv.or_else(|| common.out.as_ref().map(|p| p.with_extension("csv")));
            if let Some(p) = csv_path {
                output::emit(Some(&p), &output::atoms_csv(&reports))?;
            }
            Ok(passed)
        }
        Suite::Uniqueness { instance, perturbation, trials, seed, common } => {
            let inst = read_instance(&instance)?;
            let report = verify_uniqueness(&inst.space, &inst.cost, &inst.source, &inst.target, perturbation, trials, seed)?;
            let config = json!({ "instance": instance });
            output::emit(common.out.as_deref(), &output::json(&with_config(config, &report)))?;
            Ok(report.passed)
        }
        Suite::FirstVariation { space, samples, seed, t_values, region, common } => {
            let space = parse::space(&space)?;
            let region = match region {
                Some(r) => parse::region(&r)?,
                None => default_region(&space),
            };
            let ts = match t_values {
                Some(t) => t.split(',').map(parse::number).collect::<Result<Vec<_>, _>>()?,
                None => DEFAULT_T_GRID.to_vec(),
            };
            let report = check_first_variation_sampled(&space, &region, samples, seed, &ts)?;
            output::emit(common.out.as_deref(), &output::json(&report))?;
            Ok(report.passed)
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
