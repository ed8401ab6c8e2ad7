//! `gmob` — command-line front-end with stable JSON output.
//!
//! Every subcommand accepts metric arguments either as a path to a metric
//! JSON file or as a `corpus:<name>` pseudo-path.  Errors are reported as a
//! JSON object on stderr; exit codes: 1 malformed input, 2 numerical
//! indecision, 3 verification failure.

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use geodesic_mobility::canonical::{self, BlockEigen, PairBlocks};
use geodesic_mobility::cone;
use geodesic_mobility::corpus;
use geodesic_mobility::error::{Error, Result};
use geodesic_mobility::expr::{parse, Expr};
use geodesic_mobility::geometry::{self, MetricSpec};
use geodesic_mobility::io;
use geodesic_mobility::mobility;
use geodesic_mobility::pairs;
use geodesic_mobility::prolong::ProlongOpts;
use geodesic_mobility::sampling;
use geodesic_mobility::acceptance;

#[derive(Parser)]
#[command(
    name = "gmob",
    about = "Degree of mobility, cone correspondence, and geodesic equivalence of explicit metrics"
)]
struct Cli {
    /// Seed for sample-point generation; echoed in reports
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pointwise differential geometry of a metric
    Geom {
        #[command(subcommand)]
        cmd: GeomCmd,
    },
    /// Cone metrics: construction and recognition
    Cone {
        #[command(subcommand)]
        cmd: ConeCmd,
    },
    /// Spaces of geodesically equivalent metrics
    Mobility {
        #[command(subcommand)]
        cmd: MobilityCmd,
    },
    /// Analysis of explicit metric pairs and projective vector fields
    Pairs {
        #[command(subcommand)]
        cmd: PairsCmd,
    },
    /// Simultaneous normal form of a scalar product and a self-adjoint map
    Canonical {
        #[command(subcommand)]
        cmd: CanonicalCmd,
    },
    /// Built-in metrics with known answers
    Corpus {
        #[command(subcommand)]
        cmd: CorpusCmd,
    },
    /// End-to-end verification
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
}

#[derive(Subcommand)]
enum GeomCmd {
    /// Metric, connection, and curvature at a point
    Curvature {
        metric: String,
        /// Evaluation point, comma-separated; default: seeded sample
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        point: Option<Vec<f64>>,
        /// Curvature derivative order (0, 1, or 2)
        #[arg(long, default_value_t = 0)]
        order: usize,
    },
}

#[derive(Subcommand)]
enum ConeCmd {
    /// Emit the metric dr² + r²·g over the given base g
    Build { metric: String },
    /// Test whether the metric is a cone, witnessed by the function v
    Check {
        metric: String,
        /// Candidate cone function, e.g. "r^2/2"
        #[arg(long)]
        v: String,
    },
}

#[derive(Subcommand)]
enum MobilityCmd {
    /// Dimension of the solution space of the mobility system
    Degree {
        metric: String,
        /// Fixed value of the constant B
        #[arg(long = "B", allow_hyphen_values = true)]
        b: Option<f64>,
        /// Scan a grid of B values and report the best
        #[arg(long = "search-B")]
        search_b: bool,
    },
    /// Degree of the base metric via parallel forms on its cone
    Cone { base: String },
}

#[derive(Subcommand)]
enum PairsCmd {
    /// Certify or refute geodesic equivalence of two explicit metrics
    Analyze {
        g: String,
        gbar: String,
        /// Constant B used when deriving the companion constant for ḡ
        #[arg(long = "B", allow_hyphen_values = true, default_value_t = -1.0)]
        b: f64,
        /// Number of sample points
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Test whether a vector field is projective for the metric
    Projective {
        g: String,
        #[command(flatten)]
        field: FieldArg,
        /// Number of sample points
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
}

#[derive(Args)]
struct FieldArg {
    /// Vector field: path to a JSON array of component expressions,
    /// or an inline comma-separated list like "x1*x1,x1*x2"
    #[arg(long)]
    field: String,
}

#[derive(Subcommand)]
enum CanonicalCmd {
    /// Block-diagonalize a symmetric G and a G-self-adjoint L together
    Form {
        /// Path to a JSON 2D array for G
        #[arg(long = "G")]
        g: String,
        /// Path to a JSON 2D array for L
        #[arg(long = "L")]
        l: String,
        /// Eigenvalue clustering tolerance (relative to ‖L‖)
        #[arg(long, default_value_t = canonical::DEFAULT_CLUSTER_TOL)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Names of the built-in metrics
    List,
    /// Emit a built-in metric as standard metric JSON
    Export { name: String },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Run every acceptance check; exit 0 iff all pass
    All,
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            let code = e.exit_code();
            let msg = json!({
                "error": format!("{e}"),
                "exit_code": code,
            });
            eprintln!("{msg}");
            std::process::exit(code);
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let seed = cli.seed;
    match &cli.cmd {
        Cmd::Geom { cmd } => match cmd {
            GeomCmd::Curvature {
                metric,
                point,
                order,
            } => geom_curvature(metric, point.as_deref(), *order, seed),
        },
        Cmd::Cone { cmd } => match cmd {
            ConeCmd::Build { metric } => cone_build(metric, seed),
            ConeCmd::Check { metric, v } => cone_check(metric, v, seed),
        },
        Cmd::Mobility { cmd } => match cmd {
            MobilityCmd::Degree {
                metric,
                b,
                search_b,
            } => mobility_degree(metric, *b, *search_b, seed),
            MobilityCmd::Cone { base } => mobility_cone(base, seed),
        },
        Cmd::Pairs { cmd } => match cmd {
            PairsCmd::Analyze { g, gbar, b, points } => pairs_analyze(g, gbar, *b, *points, seed),
            PairsCmd::Projective { g, field, points } => {
                pairs_projective(g, &field.field, *points, seed)
            }
        },
        Cmd::Canonical { cmd } => match cmd {
            CanonicalCmd::Form { g, l, tol } => canonical_form(g, l, *tol),
        },
        Cmd::Corpus { cmd } => match cmd {
            CorpusCmd::List => {
                let names: Vec<&str> = corpus::list();
                emit(&json!(names));
                Ok(0)
            }
            CorpusCmd::Export { name } => {
                let entry = corpus::get(name)?;
                out(&io::metric_to_json(&entry.metric, None)?);
                Ok(0)
            }
        },
        Cmd::Verify { cmd } => match cmd {
            VerifyCmd::All => verify_all(),
        },
    }
}

fn emit(v: &Value) {
    out(&format!("{}\n", serde_json::to_string_pretty(v).unwrap()));
}

/// Write to stdout, tolerating a closed pipe (e.g. `gmob … | head`).
fn out(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(s.as_bytes());
}

fn load(path: &str) -> Result<io::LoadedMetric> {
    io::load_metric(path)
}

fn mat_json(m: &DMatrix<f64>) -> Value {
    let rows: Vec<Vec<f64>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect();
    json!(rows)
}

fn vec_json(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<f64>>())
}

fn geom_curvature(metric: &str, point: Option<&[f64]>, order: usize, seed: u64) -> Result<i32> {
    let lm = load(metric)?;
    let m = &lm.spec;
    let p = match point {
        Some(p) => p.to_vec(),
        None => sampling::base_point(m, seed)?,
    };
    let geo = geometry::riemann(m, &p, order)?;
    let n = m.dim;
    let gamma: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| geo.gamma_at(i, j, k)).collect())
                .collect()
        })
        .collect();
    let riem: Vec<Vec<Vec<Vec<f64>>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| (0..n).map(|l| geo.riemann_at(i, j, k, l)).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    emit(&json!({
        "label": m.label,
        "dim": n,
        "point": p,
        "seed": seed,
        "g": mat_json(&geo.g),
        "signature": { "plus": geo.signature.0, "minus": geo.signature.1 },
        "christoffel": gamma,
        "riemann": riem,
        "max_abs_riemann": geo.max_abs_riemann(),
    }));
    Ok(0)
}

fn cone_build(metric: &str, _seed: u64) -> Result<i32> {
    let lm = load(metric)?;
    let built = cone::build_cone(&lm.spec)?;
    out(&io::metric_to_json(&built.total, None)?);
    Ok(0)
}

fn cone_check(metric: &str, v_src: &str, seed: u64) -> Result<i32> {
    let lm = load(metric)?;
    let v = cone::parse_v(v_src)?;
    let pts = sampling::sample_points(&lm.spec, seed, 20)?;
    let rep = cone::check_hom(&lm.spec, &v, &pts)?;
    emit(&json!({
        "label": lm.spec.label,
        "seed": seed,
        "hessian_residual": rep.hessian_residual,
        "gradient_residual": rep.gradient_residual,
        "min_v": rep.min_v,
        "max_v": rep.max_v,
        "cone_compatible": rep.cone_compatible,
        "cone_for_negated": rep.cone_for_negated,
    }));
    if rep.cone_compatible || rep.cone_for_negated {
        Ok(0)
    } else {
        Err(Error::Verification(format!(
            "`{v_src}` is not a cone function for `{}`",
            lm.spec.label
        )))
    }
}

fn mobility_degree(metric: &str, b: Option<f64>, search: bool, seed: u64) -> Result<i32> {
    let lm = load(metric)?;
    let opts = ProlongOpts {
        seed,
        ..ProlongOpts::default()
    };
    if search {
        let s = mobility::search_b(&lm.spec, &opts)?;
        emit(&serde_json::to_value(&s)?);
        return Ok(0);
    }
    let rep = mobility::degree(&lm.spec, b.unwrap_or(0.0), &opts)?;
    emit(&serde_json::to_value(&rep)?);
    Ok(0)
}

fn mobility_cone(base: &str, seed: u64) -> Result<i32> {
    let lm = load(base)?;
    let opts = ProlongOpts {
        seed,
        ..ProlongOpts::default()
    };
    let rep = if lm.corpus.as_ref().map_or(false, |e| e.is_cone_total) {
        let e = lm.corpus.as_ref().unwrap();
        mobility::cone_mobility_of_total(&e.metric, e.metric.dim - 1, &e.name, &opts)?
    } else {
        mobility::cone_mobility(&lm.spec, &opts)?
    };
    emit(&serde_json::to_value(&rep)?);
    Ok(0)
}

fn pairs_analyze(g: &str, gbar: &str, b: f64, npts: usize, seed: u64) -> Result<i32> {
    let lg = load(g)?;
    // a corpus entry carrying a companion metric can be analyzed against it
    let gbar_spec: MetricSpec = if gbar == "companion" {
        lg.corpus
            .as_ref()
            .and_then(|e| e.gbar.clone())
            .ok_or_else(|| Error::Malformed(format!("`{g}` has no companion metric")))?
    } else {
        load(gbar)?.spec
    };
    let pts = sampling::sample_points(&lg.spec, seed, npts)?;
    let rep = pairs::check_geodesic_equiv(&lg.spec, &gbar_spec, &pts)?;
    let mut out = json!({
        "g": lg.spec.label,
        "gbar": gbar_spec.label,
        "seed": seed,
        "points": npts,
        "max_lc_residual": rep.max_lc_residual,
        "max_basic_residual": rep.max_basic_residual,
        "equivalent": rep.equivalent,
        "strong": rep.strong,
    });
    if rep.equivalent {
        let p0 = &pts[0];
        let sol = pairs::pair_solution(&lg.spec, &gbar_spec, b, p0)?;
        let bb = pairs::bar_b(&lg.spec, &gbar_spec, &sol, p0)?;
        let obj = out.as_object_mut().unwrap();
        obj.insert("B".into(), json!(b));
        obj.insert("bar_B".into(), json!(bb));
        obj.insert(
            "solution_at_basepoint".into(),
            json!({
                "point": p0,
                "a": mat_json(&sol.a),
                "lambda": vec_json(&sol.lambda),
                "mu": sol.mu,
            }),
        );
    }
    emit(&out);
    Ok(0)
}

fn pairs_projective(g: &str, field: &str, npts: usize, seed: u64) -> Result<i32> {
    let lg = load(g)?;
    let n = lg.spec.dim;
    let comps = load_field(field, n)?;
    let pts = sampling::sample_points(&lg.spec, seed, npts)?;
    let rep = pairs::projective_field_solution(&lg.spec, &comps, &pts)?;
    emit(&json!({
        "g": lg.spec.label,
        "seed": seed,
        "points": npts,
        "a": mat_json(&rep.a),
        "lambda": vec_json(&rep.lambda),
        "residual": rep.residual,
        "is_projective": rep.is_projective,
    }));
    Ok(0)
}

fn load_field(src: &str, n: usize) -> Result<Vec<Expr>> {
    let texts: Vec<String> = if std::path::Path::new(src).exists() {
        serde_json::from_str(&std::fs::read_to_string(src)?)?
    } else {
        src.split(',').map(|s| s.trim().to_string()).collect()
    };
    if texts.len() != n {
        return Err(Error::Malformed(format!(
            "vector field has {} components, metric dimension is {n}",
            texts.len()
        )));
    }
    texts.iter().map(|t| parse(t)).collect()
}

fn load_matrix(path: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Malformed(format!(
            "matrix in `{path}` is not square"
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn canonical_form(g_path: &str, l_path: &str, tol: f64) -> Result<i32> {
    let g = load_matrix(g_path)?;
    let l = load_matrix(l_path)?;
    let pb = canonical::canonical_pair_form(&g, &l, tol)?;
    emit(&pair_blocks_json(&pb));
    Ok(0)
}

fn pair_blocks_json(pb: &PairBlocks) -> Value {
    let blocks: Vec<Value> = pb
        .blocks
        .iter()
        .map(|b| {
            let eigen = match b.eigen {
                BlockEigen::Real(r) => json!({ "re": r, "im": 0.0 }),
                BlockEigen::ComplexPair { re, im } => json!({ "re": re, "im": im }),
            };
            json!({
                "eigenvalue": eigen,
                "size": b.size,
                "epsilon": b.epsilon,
            })
        })
        .collect();
    json!({
        "blocks": blocks,
        "P": mat_json(&pb.p),
        "block_G": mat_json(&pb.block_g),
        "block_L": mat_json(&pb.block_l),
        "residual": pb.residual,
    })
}

fn verify_all() -> Result<i32> {
    let results = acceptance::run_all();
    for r in &results {
        out(&format!(
            "[{}] criterion {:2} — {}: {}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.id,
            r.name,
            r.note
        ));
    }
    if acceptance::all_pass(&results) {
        Ok(0)
    } else {
        Err(Error::Verification(format!(
            "{} of {} criteria failed",
            results.iter().filter(|r| !r.pass).count(),
            results.len()
        )))
    }
}
