//! Batch verification driver. Every subcommand runs one suite (or one
//! integration), prints a deterministic JSON report (timing excluded) and
//! exits 0 only if every check passed; 1 on check failure, 2 on usage
//! errors, 3 on config errors. QCALC_THREADS caps the worker pool.

use clap::{Args, Parser, Subcommand};
use qcalc::clifford::curvature::{
    bianchi_check, curvature_direct, curvature_formula, random_connection, CliffordConnection,
};
use qcalc::clifford::{sorted_multisets, verify_nilpotency_and_anticommutators};
use qcalc::config::{
    from_path, BundleConfig, CliffordConnectionConfig, GeodesicConfig, LengthConfig,
};
use qcalc::covariant::{
    conjugate_constraint_check, covariant_d3, random_bundle, random_symmetric_gamma,
    riemann_identification, tilde_coefficients, torsion_and_reality, verify_tensoriality, Chart,
    ConnectionBundle,
};
use qcalc::dim1::{curve_length, theorem_suite};
use qcalc::forms::{basis_enumerate, module_dimension};
use qcalc::geodesic::{integrate, TrajectoryPoint};
use qcalc::nilpotency::{verify_dn_zero, verify_l_conditions};
use qcalc::report::{Check, RunReport};
use qcalc::symfun::PolyFun;
use rayon::prelude::*;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "qcalc", version, about = "Exact verification suite for graded differential calculus with d^N = 0")]
struct Cli {
    /// Write the report (or trajectory) here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identity suites on the differential algebra
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Basis count of the order-3 differential module over n variables
    Dims {
        #[arg(long)]
        n: u64,
    },
    /// One-dimensional form calculus
    #[command(subcommand)]
    Dim1(Dim1Cmd),
    /// Generalized Clifford algebras and their curvature
    #[command(subcommand)]
    Clifford(CliffordCmd),
    /// Covariant coefficient calculus on polynomial charts
    #[command(subcommand)]
    Covariant(CovariantCmd),
    /// Third-order geodesic equation
    #[command(subcommand)]
    Geodesic(GeodesicCmd),
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// d^N f = 0 for seeded random polynomials in the truncated algebra
    Nilpotency {
        #[arg(long = "N")]
        n_order: u32,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        trials: u32,
        #[arg(long)]
        seed: u64,
    },
    /// Each homogeneous condition polynomial reduces to zero under the
    /// cyclic relations
    Conditions {
        #[arg(long = "N")]
        n_order: u32,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum Dim1Cmd {
    /// Closed/exact/primitive/square-root/pullback theorem suite
    Suite {
        #[arg(long)]
        seed: u64,
    },
    /// Arclength of a curve in a polynomial metric via the odd square root
    Length {
        /// Config file with metric, curve, from, to and optional tol
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Args)]
struct CliffordShape {
    #[arg(long)]
    p: usize,
    #[arg(long = "N")]
    n_order: u32,
}

#[derive(Subcommand)]
enum CliffordCmd {
    /// Generator relations, matrix representation, d_k^N = 0 and the
    /// operator anticommutators
    Verify {
        #[command(flatten)]
        shape: CliffordShape,
    },
    /// Direct curvature extraction vs the combinatorial brace formula
    Curvature {
        #[command(flatten)]
        shape: CliffordShape,
        #[arg(long, default_value_t = 10)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check one explicit connection instead of seeded random ones
        #[arg(long)]
        connection: Option<PathBuf>,
    },
    /// Sum rule relating the derivatives of the curvature components to
    /// their q-commutators with the connection
    Bianchi {
        #[command(flatten)]
        shape: CliffordShape,
        #[arg(long, default_value_t = 10)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        connection: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CovariantCmd {
    /// Tilde-coefficient extraction and tensoriality under affine and
    /// shear chart changes
    Tensoriality {
        /// Bundle config (with optional chart); default: seeded random bundles
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Riemann-tensor content of the connection block, plus the
    /// torsion-reality decomposition
    Riemann {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        trials: u32,
        /// Also check the optional tie between the two skew parts of C
        #[arg(long)]
        check_conjugate: bool,
    },
}

#[derive(Subcommand)]
enum GeodesicCmd {
    /// Integrate the third-order geodesic equation from a config file
    Integrate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
        format: String,
    },
}

enum CliError {
    Usage(String),
    Config(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Config(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn config_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn init_threads() {
    if let Ok(s) = std::env::var("QCALC_THREADS") {
        if let Ok(k) = s.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
        }
    }
}

fn load_connection(
    path: &Option<PathBuf>,
    shape: &CliffordShape,
) -> Result<Option<CliffordConnection>, CliError> {
    let Some(path) = path else { return Ok(None) };
    let cfg: CliffordConnectionConfig =
        from_path(&path.to_string_lossy()).map_err(config_err)?;
    if cfg.p != shape.p || cfg.n_order != shape.n_order {
        return Err(CliError::Usage(format!(
            "connection file is for (p, N) = ({}, {}), flags say ({}, {})",
            cfg.p, cfg.n_order, shape.p, shape.n_order
        )));
    }
    Ok(Some(cfg.connection().map_err(config_err)?))
}

fn curvature_checks(conn: &CliffordConnection, label: &str) -> Vec<Check> {
    let (p, n) = (conn.p() as u32, conn.n_order());
    sorted_multisets(p, n)
        .iter()
        .map(|tuple| {
            let name = format!("curvature {tuple:?} direct = formula ({label})");
            match (curvature_direct(conn, tuple), curvature_formula(conn, tuple)) {
                (Ok(d), Ok(f)) => {
                    Check::expect(name, d == f, || format!("direct {d} vs formula {f}"))
                }
                (Err(e), _) | (_, Err(e)) => Check::fail(name, e.to_string()),
            }
        })
        .collect()
}

fn bianchi_checks(conn: &CliffordConnection, label: &str) -> Vec<Check> {
    let (p, n) = (conn.p() as u32, conn.n_order());
    sorted_multisets(p, n + 1)
        .iter()
        .map(|tuple| match bianchi_check(conn, tuple) {
            Ok(mut c) => {
                c.name = format!("{} ({label})", c.name);
                c
            }
            Err(e) => Check::fail(format!("bianchi {tuple:?} ({label})"), e.to_string()),
        })
        .collect()
}

fn tilde_extraction_checks(bundle: &ConnectionBundle, label: &str) -> Vec<Check> {
    let n = bundle.n;
    let closed = tilde_coefficients(bundle);
    let mut checks = Vec::new();
    for k in 0..n {
        let name = format!("third-differential expansion component {k} ({label})");
        match covariant_d3(bundle, k) {
            Ok((_, tilde)) => {
                let ok = (0..n).all(|l| {
                    (0..n).all(|m| tilde.btilde.get(k, l, m) == closed.btilde.get(k, l, m))
                });
                checks.push(Check::expect(name, ok, || {
                    "extracted tilde-B differs from the closed form".into()
                }));
            }
            Err(e) => checks.push(Check::fail(name, e.to_string())),
        }
    }
    checks
}

fn test_charts() -> Vec<(Chart, &'static str)> {
    let p = |s: &str| PolyFun::parse(3, 2, s).expect("fixed chart strings parse");
    let affine = Chart::new(
        vec![p("2*x1 + x2"), p("x1 + x2")],
        vec![p("x1 - x2"), p("2*x2 - x1")],
    )
    .expect("affine chart inverts");
    let shear = Chart::new(
        vec![p("x1"), p("x2 + x1^2")],
        vec![p("x1"), p("x2 - x1^2")],
    )
    .expect("shear chart inverts");
    vec![(affine, "affine"), (shear, "shear")]
}

fn run(cli: &Cli) -> Result<(RunReport, Option<String>), CliError> {
    let started = Instant::now();
    let mut extra_output = None;
    let mut report = match &cli.command {
        Command::Verify(VerifyCmd::Nilpotency { n_order, n, trials, seed }) => {
            if *n_order < 2 {
                return Err(CliError::Usage("--N must be at least 2".into()));
            }
            let mut r = RunReport::new("verify nilpotency")
                .param("N", *n_order)
                .param("n", *n as u64)
                .param("trials", *trials)
                .param("seed", *seed);
            r.checks = verify_dn_zero(*n_order, *n, *trials, *seed);
            r
        }
        Command::Verify(VerifyCmd::Conditions { n_order, n }) => {
            let mut r = RunReport::new("verify conditions")
                .param("N", *n_order)
                .param("n", *n as u64);
            r.checks = verify_l_conditions(*n_order, *n).map_err(usage)?;
            r
        }
        Command::Dims { n } => {
            let formula = module_dimension(*n);
            let mut r = RunReport::new("dims").param("n", *n).param("dimension", formula);
            let enumerated = basis_enumerate(3, *n as usize).map_err(usage)?.len() as u64;
            r.checks.push(Check::expect(
                format!("enumerated basis count matches the closed formula (n={n})"),
                enumerated == formula,
                || format!("enumerated {enumerated}, formula {formula}"),
            ));
            r
        }
        Command::Dim1(Dim1Cmd::Suite { seed }) => {
            let mut r = RunReport::new("dim1 suite").param("seed", *seed);
            r.checks = theorem_suite(*seed);
            r
        }
        Command::Dim1(Dim1Cmd::Length { config, from, to, tol }) => {
            let cfg: LengthConfig =
                from_path(&config.to_string_lossy()).map_err(config_err)?;
            let metric = cfg.metric_polys().map_err(config_err)?;
            let curve = cfg.curve_exprs().map_err(config_err)?;
            let (a, b) = (from.unwrap_or(cfg.from), to.unwrap_or(cfg.to));
            let tol = tol.unwrap_or(cfg.tol);
            let result = curve_length(&metric, &curve, a, b, tol).map_err(usage)?;
            let mut r = RunReport::new("dim1 length")
                .param("from", a)
                .param("to", b)
                .param("tol", tol)
                .param("length", result.length)
                .param("evaluations", result.evaluations);
            r.checks.push(Check::pass(format!("length = {:.12}", result.length)));
            r
        }
        Command::Clifford(CliffordCmd::Verify { shape }) => {
            let mut r = RunReport::new("clifford verify")
                .param("p", shape.p as u64)
                .param("N", shape.n_order);
            r.checks =
                verify_nilpotency_and_anticommutators(shape.p, shape.n_order).map_err(usage)?;
            r
        }
        Command::Clifford(CliffordCmd::Curvature { shape, trials, seed, connection }) => {
            let mut r = RunReport::new("clifford curvature")
                .param("p", shape.p as u64)
                .param("N", shape.n_order)
                .param("trials", *trials)
                .param("seed", *seed);
            if let Some(conn) = load_connection(connection, shape)? {
                r.checks = curvature_checks(&conn, "config connection");
            } else {
                r.checks = (0..*trials)
                    .into_par_iter()
                    .flat_map(|t| {
                        let conn =
                            random_connection(shape.p, shape.n_order, seed + t as u64);
                        curvature_checks(&conn, &format!("trial {t}"))
                    })
                    .collect();
            }
            r
        }
        Command::Clifford(CliffordCmd::Bianchi { shape, trials, seed, connection }) => {
            let mut r = RunReport::new("clifford bianchi")
                .param("p", shape.p as u64)
                .param("N", shape.n_order)
                .param("trials", *trials)
                .param("seed", *seed);
            if let Some(conn) = load_connection(connection, shape)? {
                r.checks = bianchi_checks(&conn, "config connection");
            } else {
                r.checks = (0..*trials)
                    .into_par_iter()
                    .flat_map(|t| {
                        let conn =
                            random_connection(shape.p, shape.n_order, seed + t as u64);
                        bianchi_checks(&conn, &format!("trial {t}"))
                    })
                    .collect();
            }
            r
        }
        Command::Covariant(CovariantCmd::Tensoriality { config, trials, seed }) => {
            let mut r = RunReport::new("covariant tensoriality")
                .param("trials", *trials)
                .param("seed", *seed);
            if let Some(path) = config {
                let cfg: BundleConfig =
                    from_path(&path.to_string_lossy()).map_err(config_err)?;
                let bundle = cfg.bundle().map_err(config_err)?;
                r.checks.extend(tilde_extraction_checks(&bundle, "config bundle"));
                let charts = match cfg.chart().map_err(config_err)? {
                    Some(chart) => vec![(chart, "config chart")],
                    None if bundle.n == 2 => test_charts(),
                    None => {
                        return Err(CliError::Usage(
                            "bundle config needs a chart section unless n = 2".into(),
                        ))
                    }
                };
                for (chart, label) in &charts {
                    r.checks.extend(
                        verify_tensoriality(&bundle, chart, label).map_err(usage)?,
                    );
                }
            } else {
                let per_trial: Vec<Vec<Check>> = (0..*trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut checks = Vec::new();
                        for n in [2usize, 3] {
                            let bundle = random_bundle(seed + t as u64, n, 1);
                            let label = format!("trial {t}, n={n}");
                            checks.extend(tilde_extraction_checks(&bundle, &label));
                            if n == 2 {
                                for (chart, chart_label) in test_charts() {
                                    match verify_tensoriality(
                                        &bundle,
                                        &chart,
                                        &format!("{label}, {chart_label}"),
                                    ) {
                                        Ok(cs) => checks.extend(cs),
                                        Err(e) => checks.push(Check::fail(
                                            format!("tensoriality ({label})"),
                                            e.to_string(),
                                        )),
                                    }
                                }
                            }
                        }
                        checks
                    })
                    .collect();
                r.checks = per_trial.into_iter().flatten().collect();
            }
            r
        }
        Command::Covariant(CovariantCmd::Riemann { config, n, seed, trials, check_conjugate }) => {
            let mut r = RunReport::new("covariant riemann")
                .param("n", *n as u64)
                .param("seed", *seed)
                .param("trials", *trials);
            let bundles: Vec<(ConnectionBundle, String)> = if let Some(path) = config {
                let cfg: BundleConfig =
                    from_path(&path.to_string_lossy()).map_err(config_err)?;
                vec![(cfg.bundle().map_err(config_err)?, "config bundle".into())]
            } else {
                (0..*trials)
                    .map(|t| {
                        let gamma = random_symmetric_gamma(seed + t as u64, *n, 1);
                        let bundle = ConnectionBundle::new(
                            gamma,
                            qcalc::covariant::Tensor3::zero(*n),
                            qcalc::covariant::Tensor4::zero(*n),
                        );
                        (bundle, format!("trial {t}"))
                    })
                    .collect()
            };
            for (bundle, label) in &bundles {
                match riemann_identification(&bundle.gamma) {
                    Ok(cs) => {
                        for mut c in cs {
                            c.name = format!("{} ({label})", c.name);
                            r.checks.push(c);
                        }
                    }
                    Err(e) => r
                        .checks
                        .push(Check::fail(format!("riemann ({label})"), e.to_string())),
                }
                for mut c in torsion_and_reality(bundle) {
                    c.name = format!("{} ({label})", c.name);
                    r.checks.push(c);
                }
                if *check_conjugate {
                    let mut c = conjugate_constraint_check(&bundle.ccoef);
                    c.name = format!("{} ({label})", c.name);
                    r.checks.push(c);
                }
            }
            r
        }
        Command::Geodesic(GeodesicCmd::Integrate { config, format }) => {
            let cfg: GeodesicConfig =
                from_path(&config.to_string_lossy()).map_err(config_err)?;
            let coeffs = cfg.coefficients().map_err(config_err)?;
            let trajectory = integrate(
                &coeffs,
                &cfg.x0,
                &cfg.v0,
                &cfg.a0,
                (cfg.lambda[0], cfg.lambda[1]),
                cfg.step,
            )
            .map_err(usage)?;
            let mut r = RunReport::new("geodesic integrate")
                .param("lambda", serde_json::json!(cfg.lambda))
                .param("step", cfg.step)
                .param("samples", trajectory.len() as u64);
            if format == "csv" {
                extra_output = Some(trajectory_csv(&trajectory));
            } else {
                r = r.param("trajectory", serde_json::to_value(&trajectory).map_err(usage)?);
            }
            let last = trajectory.last().expect("nonempty trajectory");
            r.checks.push(Check::pass(format!(
                "integrated to lambda = {} in {} samples",
                last.lambda,
                trajectory.len()
            )));
            r
        }
    };
    report.timing_ms = started.elapsed().as_millis();
    Ok((report, extra_output))
}

fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let n = points.first().map_or(0, |p| p.x.len());
    let mut out = String::from("lambda");
    for tag in ["x", "v", "a"] {
        for i in 1..=n {
            out.push_str(&format!(",{tag}{i}"));
        }
    }
    out.push('\n');
    for p in points {
        out.push_str(&p.lambda.to_string());
        for series in [&p.x, &p.v, &p.a] {
            for value in series {
                out.push_str(&format!(",{value}"));
            }
        }
        out.push('\n');
    }
    out
}

fn main() {
    init_threads();
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, extra)) => {
            let mut body = extra.unwrap_or_else(|| report.to_json());
            if !body.ends_with('\n') {
                body.push('\n');
            }
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, body) {
                        eprintln!("cannot write {}: {e}", path.display());
                        std::process::exit(2);
                    }
                }
                None => print!("{body}"),
            }
            std::process::exit(if report.all_passed() { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("{}", e.message());
            std::process::exit(e.exit_code());
        }
    }
}
