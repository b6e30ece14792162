use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use sympgt::algebra::{parse_rational, to_f64, QSeriesCtx, Rational, DEFAULT_TRUNCATION};
use sympgt::berele::{process_word, process_word_steps};
use sympgt::branching::{conjecture_checks, default_t0_ladder, BranchingPair};
use sympgt::characters::{
    qwhittaker_pattern_sum, qwhittaker_recursion, symplectic_schur_patterns, symplectic_schur_tableaux,
    symplectic_schur_weyl,
};
use sympgt::combinatorics::{parse_word, Partition};
use sympgt::continuous::{
    conjecture_probe_n2, phi2_report, phi_eigen_residual, polymer_identity_check, sde_simulate, verify_kernels,
    PhiSettings, PolymerConfig, SdeConfig, SdeStart,
};
use sympgt::dynamics::{simulate, Model, SimulationConfig, Start};
use sympgt::limits::{convergence_table, scaled_qwhittaker, so_whittaker, ScalingCtx};
use sympgt::spectral::{
    law, moments, orthogonality_matrix, CoefficientMethod, MomentSettings, PolynomialFamily, TorusQuadrature,
};
use sympgt::verify::{hard_failures, run_all, Scale};
use sympgt::{Error, Result};

/// Schema version stamped into every JSON report.
const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "sympgt", version, about = "Symplectic Gelfand-Tsetlin dynamics, q-Whittaker functions and their limits")]
struct Cli {
    /// Defaults to text where a command has it, then CSV, then JSON.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Worker threads for parallel sections (overridden by SYMPGT_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Symplectic Schur or q-Whittaker polynomials, as text or evaluated at `--a`.
    Compute(ComputeArgs),
    /// Berele insertion of a word.
    Berele(BereleArgs),
    /// Verification reports.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Seeded simulation of the pattern dynamics.
    Simulate(SimulateArgs),
    /// Law of the bottom level at time t from the origin.
    Law(LawArgs),
    /// The moment ⟨q^{-k Z_1}⟩ by three routes.
    Moments(MomentsArgs),
    /// Scaled q-Whittaker functions against their classical limit.
    Limit(LimitArgs),
    /// Euler–Maruyama simulation of the continuous pattern.
    Sde(SdeArgs),
    /// Distributional check of the polymer identity.
    Polymer(PolymerArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Schur,
    Qwhittaker,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Weyl,
    Tableaux,
    Patterns,
    Recursion,
}

#[derive(Args)]
struct ComputeArgs {
    #[arg(value_enum)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// Partition, e.g. `2,1`.
    #[arg(long, default_value = "")]
    lambda: String,
    /// Exact q, e.g. `1/3`.
    #[arg(long, default_value = "1/2")]
    q: String,
    /// Rational evaluation point, e.g. `2,3/5`.
    #[arg(long)]
    a: Option<String>,
    #[arg(long, value_enum)]
    method: Option<Method>,
}

#[derive(Args)]
struct BereleArgs {
    /// Letters separated by spaces; `k~` is the barred letter.
    #[arg(long)]
    word: String,
    #[arg(long, default_value_t = 3)]
    n: u32,
    /// Print every intermediate tableau.
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// The acceptance suite; exits nonzero on a hard failure.
    All {
        #[arg(long)]
        quick: bool,
    },
    /// Branching-conjecture report for one pair.
    Branching {
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value = "")]
        nu: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "2/5")]
        q: String,
        /// Comma-separated t0 values.
        #[arg(long)]
        t0_ladder: Option<String>,
    },
    /// Gram matrix of the normalised polynomials on the torus.
    Orthogonality {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "2/5")]
        q: String,
        #[arg(long, default_value_t = 2)]
        max_weight: i64,
        /// Nodes per torus coordinate.
        #[arg(long, default_value_t = 64)]
        points: usize,
    },
    /// Identities of the continuous model.
    Continuous {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Seed for `--which conjecture`.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        replicas: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Kernels,
    Eigen,
    Phi2,
    /// Edge of the pattern from far away vs the h-transformed diffusion and the polymer.
    Conjecture,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Berele,
    Randomized,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    Origin,
    Shape,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Berele)]
    model: ModelArg,
    /// Number of levels N.
    #[arg(long = "N", alias = "levels")]
    n_levels: usize,
    #[arg(long)]
    a: String,
    #[arg(long)]
    q: String,
    #[arg(long)]
    t: String,
    #[arg(long, default_value_t = 10_000)]
    replicas: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = StartArg::Origin)]
    start: StartArg,
    /// Bottom shape for `--start shape`.
    #[arg(long)]
    shape: Option<String>,
    /// Write the first replica's events as JSON lines.
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args)]
struct LawArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: String,
    #[arg(long)]
    a: String,
    #[arg(long)]
    q: String,
    #[arg(long, default_value_t = 40)]
    window: i64,
    /// Use torus quadrature with this many nodes per coordinate instead of the series.
    #[arg(long)]
    quadrature: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    t: String,
    #[arg(long)]
    a: String,
    #[arg(long)]
    q: String,
    #[arg(long, default_value_t = 40)]
    window: i64,
    #[arg(long, default_value_t = 1024)]
    points: usize,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Spectral parameter(s); the limit is evaluated at iλ.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Vec<f64>,
    /// Points for n = 1; a single point `x1,x2` for n = 2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.05,0.02")]
    eps: Vec<f64>,
}

#[derive(Args)]
struct SdeArgs {
    #[arg(long = "N")]
    n_levels: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambda: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    #[arg(long, default_value_t = 1000)]
    replicas: usize,
    #[arg(long)]
    seed: u64,
    /// Distance scale of the far-away start.
    #[arg(long, default_value_t = 8.0)]
    depth: f64,
}

#[derive(Args)]
struct PolymerArgs {
    #[arg(long = "N")]
    n_levels: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.5")]
    lambda: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, default_value_t = 20_000)]
    replicas: usize,
    #[arg(long)]
    seed: u64,
}

/// What a subcommand hands back for printing.
struct Report {
    json: Value,
    /// Optional table for `--format csv`, with `# key: value` metadata lines on top.
    table: Option<Table>,
    /// Plain text that replaces the JSON/CSV rendering.
    text: Option<String>,
    exit: ExitCode,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Report {
    fn json(json: Value) -> Self {
        Self { json, table: None, text: None, exit: ExitCode::SUCCESS }
    }

    fn with_table(mut self, header: &[&str], rows: Vec<Vec<String>>) -> Self {
        self.table = Some(Table { header: header.iter().map(|s| s.to_string()).collect(), rows });
        self
    }
}

fn rationals(s: &str) -> Result<Vec<Rational>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse_rational).collect()
}

fn floats(s: &str) -> Result<Vec<f64>> {
    Ok(rationals(s)?.iter().map(to_f64).collect())
}

fn float(s: &str) -> Result<f64> {
    Ok(to_f64(&parse_rational(s)?))
}

fn compute(args: &ComputeArgs) -> Result<Report> {
    let lam = Partition::parse(&args.lambda)?;
    let q = parse_rational(&args.q)?;
    let a = args.a.as_deref().map(rationals).transpose()?;
    if let Some(a) = &a {
        if a.len() != args.n {
            return Err(Error::Config(format!("--a needs {} entries", args.n)));
        }
    }
    let ctx = QSeriesCtx::exact(q.clone())?;
    let (method, poly) = match (args.family, args.method) {
        (Family::Schur, Some(Method::Weyl)) => {
            let a = a.ok_or_else(|| Error::Config("the Weyl formula needs --a".into()))?;
            let v = symplectic_schur_weyl(args.n, &lam, &a)?;
            return Ok(Report {
                text: Some(v.to_string()),
                ..Report::json(json!({ "schema": SCHEMA, "family": "schur", "method": "weyl", "n": args.n,
                    "lambda": lam, "value": v.to_string() }))
            });
        }
        (Family::Schur, None | Some(Method::Tableaux)) => ("tableaux", symplectic_schur_tableaux(args.n, &lam)),
        (Family::Schur, Some(Method::Patterns)) => ("patterns", symplectic_schur_patterns(args.n, &lam)),
        (Family::Qwhittaker, None | Some(Method::Recursion)) => ("recursion", qwhittaker_recursion(args.n, &lam, &ctx)),
        (Family::Qwhittaker, Some(Method::Patterns)) => ("patterns", qwhittaker_pattern_sum(2 * args.n, &lam, &ctx)),
        (_, Some(m)) => {
            let name = match m {
                Method::Weyl => "weyl",
                Method::Tableaux => "tableaux",
                Method::Patterns => "patterns",
                Method::Recursion => "recursion",
            };
            return Err(Error::UnsupportedMode(format!("method {name} does not apply to this family")));
        }
    };
    let value = a.as_ref().map(|a| poly.eval(a).to_string());
    let text = value.clone().unwrap_or_else(|| poly.to_string());
    let family = match args.family {
        Family::Schur => "schur",
        Family::Qwhittaker => "qwhittaker",
    };
    Ok(Report {
        text: Some(text),
        ..Report::json(json!({ "schema": SCHEMA, "family": family, "method": method, "n": args.n, "lambda": lam,
            "q": q.to_string(), "polynomial": poly.to_string(), "value": value }))
    })
}

fn berele(args: &BereleArgs) -> Result<Report> {
    let word = parse_word(&args.word)?;
    let rec = process_word(&word, args.n)?;
    let mut text = String::new();
    if args.trace {
        for (i, (t, l)) in process_word_steps(&word, args.n)?.iter().skip(1).zip(&word).enumerate() {
            text.push_str(&format!("after {} ({l}):\n{t}\n\n", i + 1));
        }
    }
    let shapes: Vec<String> = rec.shapes.iter().map(|s| s.to_string()).collect();
    text.push_str(&format!("P:\n{}\nshapes: {}", rec.tableau, shapes.join(" ")));
    let rows: Vec<String> = rec.tableau.to_string().lines().map(String::from).collect();
    Ok(Report {
        text: Some(text),
        ..Report::json(json!({ "schema": SCHEMA, "word": args.word, "n": args.n, "tableau": rows, "shapes": shapes }))
    })
}

fn verify(cmd: &VerifyCommand) -> Result<Report> {
    match cmd {
        VerifyCommand::All { quick } => {
            let scale = if *quick { Scale::Quick } else { Scale::Full };
            let outcomes = run_all(scale);
            let failed: Vec<&str> = hard_failures(&outcomes).iter().map(|o| o.id).collect();
            let lines: Vec<String> = outcomes.iter().map(|o| o.to_string()).collect();
            let rows = outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.id.to_string(),
                        format!("{:?}", o.status).to_lowercase(),
                        o.hard.to_string(),
                        o.tolerance.clone(),
                        o.observed.clone(),
                        format!("{:.3}", o.seconds),
                    ]
                })
                .collect();
            let report = Report {
                text: None,
                exit: if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE },
                ..Report::json(json!({ "schema": SCHEMA, "scale": scale, "criteria": outcomes,
                    "hard_failures": failed }))
            };
            eprintln!("{}", lines.join("\n"));
            Ok(report.with_table(&["id", "status", "hard", "tolerance", "observed", "seconds"], rows))
        }
        VerifyCommand::Branching { lambda, nu, n, q, t0_ladder } => {
            let pair = BranchingPair::new(Partition::parse(lambda)?, Partition::parse(nu)?, *n)?;
            let ctx = QSeriesCtx::exact(parse_rational(q)?)?;
            let ladder = match t0_ladder {
                Some(s) => rationals(s)?,
                None => default_t0_ladder(),
            };
            let rep = conjecture_checks(&pair, &ctx, &ladder)?;
            let exit = if rep.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE };
            Ok(Report { exit, ..Report::json(json!({ "schema": SCHEMA, "q": q, "report": rep })) })
        }
        VerifyCommand::Orthogonality { n, q, max_weight, points } => {
            let qr = parse_rational(q)?;
            let family = PolynomialFamily::new(*n, &qr)?;
            let quad = TorusQuadrature::plain(*n, *points, to_f64(&qr))?;
            let parts = sympgt::combinatorics::partitions_up_to(*max_weight, *n);
            let g = orthogonality_matrix(&family, &parts, &quad);
            let mut worst: f64 = 0.0;
            let mut rows = Vec::new();
            for (i, row) in g.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
                    rows.push(vec![parts[i].to_string(), parts[j].to_string(), format!("{v:e}")]);
                }
            }
            let names: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
            Ok(Report::json(json!({ "schema": SCHEMA, "n": n, "q": q, "points": points,
                "truncation": DEFAULT_TRUNCATION, "shapes": names, "gram": g, "max_deviation": worst }))
            .with_table(&["lambda", "mu", "value"], rows))
        }
        VerifyCommand::Continuous { which, lambda, seed, replicas } => {
            let body = match which {
                Which::Kernels => {
                    let mut reps = Vec::new();
                    for n in 1..=2 {
                        for theta in [0.5, 0.0, 1.3] {
                            reps.push(verify_kernels(n, theta)?);
                        }
                    }
                    json!({ "kernels": reps })
                }
                Which::Eigen => {
                    let s = PhiSettings::default();
                    let xs = [-1.5, 0.0, 1.0, 2.5];
                    let even: Vec<f64> =
                        xs.iter().map(|&x| phi_eigen_residual(2, &[*lambda], &[x], s)).collect::<Result<_>>()?;
                    let odd = phi_eigen_residual(3, &[*lambda + 0.4, *lambda], &[0.8, 0.1], s)?;
                    json!({ "settings": s, "x": xs, "n2_residuals": even, "n3_residual_at_(0.8,0.1)": odd })
                }
                Which::Phi2 => {
                    let xs: Vec<f64> = (0..=10).map(|i| -2.0 + 0.5 * i as f64).collect();
                    json!({ "settings": PhiSettings::default(), "phi2": phi2_report(*lambda, &xs)? })
                }
                Which::Conjecture => json!({ "probe": conjecture_probe_n2(*lambda, 1.0, 8.0, *replicas, *seed)? }),
            };
            Ok(Report::json(json!({ "schema": SCHEMA, "lambda": lambda, "result": body })))
        }
    }
}

fn simulate_cmd(args: &SimulateArgs) -> Result<Report> {
    let start = match args.start {
        StartArg::Origin => Start::Origin,
        StartArg::Shape => Start::Shape(Partition::parse(
            args.shape.as_deref().ok_or_else(|| Error::Config("--start shape needs --shape".into()))?,
        )?),
    };
    let config = SimulationConfig {
        model: match args.model {
            ModelArg::Berele => Model::Berele,
            ModelArg::Randomized => Model::Randomized,
        },
        n_levels: args.n_levels,
        a: floats(&args.a)?,
        q: float(&args.q)?,
        horizon: float(&args.t)?,
        replicas: args.replicas,
        seed: args.seed,
        start,
        log_first: args.events.is_some(),
    };
    let res = simulate(&config)?;
    if let Some(path) = &args.events {
        let io_err = |e: io::Error| Error::Config(format!("cannot write {}: {e}", path.display()));
        let mut f = File::create(path).map_err(io_err)?;
        for e in &res.events {
            let line = serde_json::to_string(e).map_err(|e| Error::Numerical(e.to_string()))?;
            writeln!(f, "{line}").map_err(io_err)?;
        }
    }
    let total = config.replicas as f64;
    let rows = res
        .bottom_counts
        .iter()
        .map(|(z, c)| vec![config.horizon.to_string(), join(z), c.to_string(), format!("{}", *c as f64 / total)])
        .collect();
    Ok(Report::json(json!({ "schema": SCHEMA, "config": config, "bottom_counts": res.bottom_counts }))
        .with_table(&["time", "z", "count", "frequency"], rows))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn law_cmd(args: &LawArgs) -> Result<Report> {
    let q = parse_rational(&args.q)?;
    let family = PolynomialFamily::new(args.n, &q)?;
    let a = floats(&args.a)?;
    let t = float(&args.t)?;
    let quad = args.quadrature.map(|p| TorusQuadrature::plain(args.n, p, to_f64(&q))).transpose()?;
    let method = match &quad {
        Some(qd) => CoefficientMethod::Quadrature(qd),
        None => CoefficientMethod::Series,
    };
    let table = law(&family, t, &a, args.window, method, args.tolerance)?;
    let rows = table.entries.iter().map(|(z, p)| vec![join(z), format!("{p:e}")]).collect();
    Ok(Report::json(json!({ "schema": SCHEMA, "method": if quad.is_some() { "quadrature" } else { "series" },
        "quadrature_points": args.quadrature, "truncation": DEFAULT_TRUNCATION, "tolerance": args.tolerance,
        "law": table }))
    .with_table(&["z", "p"], rows))
}

fn moments_cmd(args: &MomentsArgs) -> Result<Report> {
    let q = parse_rational(&args.q)?;
    let settings = MomentSettings { window: args.window, torus_points: args.points, contour_points: args.points };
    let m = moments(args.n, args.k, float(&args.t)?, &floats(&args.a)?, &q, &settings)?;
    let rows = vec![vec![
        m.k.to_string(),
        format!("{:e}", m.direct),
        format!("{:e}", m.operator),
        format!("{:e}", m.contour),
        format!("{:e}", m.max_relative_spread()),
    ]];
    Ok(Report::json(json!({ "schema": SCHEMA, "n": args.n, "q": args.q, "t": args.t, "a": args.a,
        "window": args.window, "points": args.points, "moments": m, "max_relative_spread": m.max_relative_spread() }))
    .with_table(&["k", "direct", "operator", "contour", "spread"], rows))
}

fn limit_cmd(args: &LimitArgs) -> Result<Report> {
    match args.n {
        1 => {
            let lambda = *args.lambda.first().ok_or_else(|| Error::Config("--lambda is required".into()))?;
            let table = convergence_table(lambda, &args.x, &args.eps)?;
            let rows = table
                .rows
                .iter()
                .map(|r| {
                    vec![r.eps.to_string(), r.m.to_string(), r.x.to_string(), format!("{:e}", r.scaled_re),
                        format!("{:e}", r.scaled_im), format!("{:e}", r.limit), format!("{:e}", r.error),
                        format!("{:e}", r.snap)]
                })
                .collect();
            Ok(Report::json(json!({ "schema": SCHEMA, "table": table, "max_errors": table.max_errors() }))
                .with_table(&["eps", "m", "x", "scaled_re", "scaled_im", "limit", "error", "snap"], rows))
        }
        2 => {
            if args.lambda.len() != 2 || args.x.len() != 2 {
                return Err(Error::Config("n = 2 takes --lambda l1,l2 and a single point --x x1,x2".into()));
            }
            let spectral: Vec<Complex64> = args.lambda.iter().map(|&l| Complex64::new(0.0, l)).collect();
            let limit = so_whittaker(&spectral, &args.x)?;
            let mut rows = Vec::new();
            let mut values = Vec::new();
            for &e in &args.eps {
                let ctx = ScalingCtx::new(e)?;
                let s = scaled_qwhittaker(&ctx, &args.lambda, &args.x)?;
                let err = (s.value() - Complex64::new(limit.re, limit.im)).norm();
                rows.push(vec![e.to_string(), ctx.m().to_string(), format!("{:e}", s.re), format!("{:e}", s.im),
                    format!("{:e}", limit.re), format!("{err:e}"), format!("{:e}", s.snap)]);
                values.push(json!({ "eps": e, "m": ctx.m(), "scaled": s, "error": err }));
            }
            Ok(Report::json(json!({ "schema": SCHEMA, "lambda": args.lambda, "x": args.x, "limit": limit,
                "rows": values }))
            .with_table(&["eps", "m", "scaled_re", "scaled_im", "limit", "error", "snap"], rows))
        }
        _ => Err(Error::UnsupportedMode("limit supports n ∈ {1, 2}".into())),
    }
}

fn sde_cmd(args: &SdeArgs) -> Result<Report> {
    let config = SdeConfig {
        n_levels: args.n_levels,
        lambda: args.lambda.clone(),
        t: args.t,
        h: args.h,
        replicas: args.replicas,
        seed: args.seed,
        start: SdeStart::FarAway { depth: args.depth },
    };
    let res = sde_simulate(&config)?;
    let rows = res
        .bottom
        .iter()
        .zip(&res.edge)
        .enumerate()
        .map(|(r, (b, e))| vec![r.to_string(), join(b), join(e)])
        .collect();
    Ok(Report::json(json!({ "schema": SCHEMA, "result": res })).with_table(&["replica", "bottom", "edge"], rows))
}

fn polymer_cmd(args: &PolymerArgs) -> Result<Report> {
    let rep = polymer_identity_check(&PolymerConfig {
        n_levels: args.n_levels,
        lambda: args.lambda.clone(),
        t: args.t,
        steps: args.steps,
        replicas: args.replicas,
        seed: args.seed,
    })?;
    let rows = vec![vec![
        format!("{:e}", rep.ks),
        format!("{:e}", rep.ks_critical_95),
        format!("{:e}", rep.mean_z),
        format!("{:e}", rep.mean_rhs),
    ]];
    Ok(Report::json(json!({ "schema": SCHEMA, "report": rep }))
        .with_table(&["ks", "ks_critical_95", "mean_z", "mean_rhs"], rows))
}

fn render(report: &Report, format: Option<Format>, out: &mut dyn Write) -> io::Result<()> {
    match (format, &report.text, &report.table) {
        (None | Some(Format::Csv), Some(text), _) => writeln!(out, "{text}"),
        (None | Some(Format::Csv), None, Some(table)) => {
            if let Value::Object(map) = &report.json {
                for (k, v) in map {
                    if !v.is_array() && !v.is_object() {
                        writeln!(out, "# {k}: {v}")?;
                    } else if matches!(k.as_str(), "config" | "settings" | "law" | "table" | "result" | "report") {
                        writeln!(out, "# {k}: {}", serde_json::to_string(&strip_arrays(v))?)?;
                    }
                }
            }
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()
        }
        _ => {
            serde_json::to_writer_pretty(&mut *out, &report.json)?;
            writeln!(out)
        }
    }
}

/// Scalar fields of a JSON object; long arrays are left to the table body.
fn strip_arrays(v: &Value) -> Value {
    match v {
        Value::Object(map) => Value::Object(
            map.iter()
                .filter(|(_, x)| !matches!(x, Value::Array(a) if a.len() > 8))
                .map(|(k, x)| (k.clone(), strip_arrays(x)))
                .collect(),
        ),
        other => other.clone(),
    }
}

fn configure_threads(requested: Option<usize>) {
    let from_env = std::env::var("SYMPGT_THREADS").ok().and_then(|s| s.parse().ok());
    if let Some(n) = from_env.or(requested) {
        // a second initialisation fails harmlessly
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Compute(a) => compute(a),
        Command::Berele(a) => berele(a),
        Command::Verify(v) => verify(v),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Law(a) => law_cmd(a),
        Command::Moments(a) => moments_cmd(a),
        Command::Limit(a) => limit_cmd(a),
        Command::Sde(a) => sde_cmd(a),
        Command::Polymer(a) => polymer_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.output {
        Some(path) => File::create(path).and_then(|mut f| render(&report, cli.format, &mut f)),
        None => render(&report, cli.format, &mut io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    report.exit
}
