//! Command-line front end. Every command produces a [`RunReport`]; `--json`
//! prints it verbatim, otherwise the result is flattened to `path: value`
//! lines.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::chain::{models, product_complex, SimplicialGComplex};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hilbert::{goettsche_series, hilbert_maximality, lqw_census, total, SurfaceData};
use crate::involution::InvolutiveModule;
use crate::io;
use crate::k3n::{
    case_representative, classify_split, obstruct, obstruction_sweep, symplectic_smith_slack, BraneCase,
    MonodromyInvolution, SlackTarget,
};
use crate::lattice::{make_named, IntegerLattice};

#[derive(Parser, Debug)]
#[command(name = "maxbrane", version, about = "Certificates for (non-)maximality of involutions")]
pub struct Cli {
    /// Print the machine-readable report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized drivers.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Invariants of an even or odd integral lattice.
    Lattice(LatticeArgs),
    /// Comessatti characteristic and standard form of an involution.
    Comessatti { file: PathBuf },
    /// Smith theory of a simplicial complex with involution.
    Smith(SmithArgs),
    /// Betti numbers and maximality on Hilbert schemes of points
    #[command(subcommand)]
    Hilbert(HilbertCmd),
    /// Involutions of the K3^[n] lattice
    #[command(subcommand)]
    K3n(K3nCmd),
}

#[derive(Args, Debug)]
pub struct LatticeArgs {
    /// Expression such as "U^3 + E8(-1)^2 + <-2>".
    #[arg(long, conflicts_with = "file")]
    pub expr: Option<String>,
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SmithArgs {
    pub file: Option<PathBuf>,
    /// Built-in model instead of a file.
    #[arg(long, conflicts_with = "file")]
    pub model: Option<String>,
    /// Take the product with a second built-in model.
    #[arg(long)]
    pub times: Option<String>,
    /// Compute Kalinin differentials up to this page (1..=3).
    #[arg(long)]
    pub kalinin: Option<usize>,
    /// Top degree of Borel cohomology (default: dim + 2).
    #[arg(long)]
    pub borel_cap: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum HilbertCmd {
    /// Betti numbers of S^[n] with census cross-check.
    Betti {
        #[arg(long)]
        b2: usize,
        #[arg(long)]
        n: usize,
    },
    /// Maximality of the natural involution on S^[n].
    Maximality {
        file: PathBuf,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum K3nCmd {
    /// Assign one of the four cases to a lambda = 0 involution.
    Classify {
        #[arg(long)]
        n: usize,
        file: PathBuf,
    },
    /// Emit the lambda >= 1 obstruction certificate.
    Obstruct {
        #[arg(long)]
        n: usize,
        file: PathBuf,
    },
    /// Smith slack of symplectic involutions.
    Symplectic {
        #[arg(long, required_unless_present = "og6", conflicts_with = "og6")]
        n: Option<usize>,
        #[arg(long)]
        og6: bool,
    },
    /// Explicit case representative as a sigma JSON file.
    Representative {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        case: u8,
        #[arg(long, default_value_t = 0)]
        line: usize,
    },
    /// Certify random conjugates of the case representatives.
    Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub result: Value,
    pub timing_ms: f64,
    pub version: String,
}

fn read_json(path: &PathBuf) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))?;
    io::from_str(&text)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn lattice_report(l: &IntegerLattice) -> Value {
    let a = l.discriminant_group();
    json!({
        "label": l.label(),
        "rank": l.rank(),
        "signature": l.signature(),
        "even": l.is_even(),
        "det": io::int_json(&l.det()),
        "unimodular": l.is_unimodular(),
        "discriminant": {
            "invariant_factors": io::vector_json(&a.invariant_factors),
            "qvalues": a.qvalues.as_ref().map(|q| q.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
        },
        "gram": io::matrix_json(l.gram()),
    })
}

fn parse_lattice(v: &Value) -> Result<IntegerLattice> {
    if let Some(e) = v.get("expr") {
        let e = e.as_str().ok_or_else(|| Error::Parse("expr must be a string".into()))?;
        return make_named(e);
    }
    let l = IntegerLattice::new(io::parse_matrix(io::field(v, "gram")?)?)?;
    Ok(match v.get("label").and_then(|x| x.as_str()) {
        Some(s) => l.with_label(s),
        None => l,
    })
}

fn parse_complex(v: &Value) -> Result<SimplicialGComplex> {
    let n = io::parse_usize(io::field(v, "vertices")?)?;
    let Value::Array(faces) = io::field(v, "simplices")? else {
        return Err(Error::Parse("simplices must be an array".into()));
    };
    let faces: Vec<Vec<usize>> = faces
        .iter()
        .map(|f| match f {
            Value::Array(a) => a.iter().map(io::parse_usize).collect(),
            _ => Err(Error::Parse("each simplex must be an array".into())),
        })
        .collect::<Result<_>>()?;
    let inv = match io::field(v, "involution")? {
        Value::Array(a) => a.iter().map(io::parse_usize).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::Parse("involution must be an array".into())),
    };
    SimplicialGComplex::new(n, &faces, inv)
}

fn model(name: &str) -> Result<SimplicialGComplex> {
    models::named(name).ok_or_else(|| {
        Error::Precondition(format!("unknown model {name:?}; available: {}", models::NAMES.join(", ")))
    })
}

/// Full Smith-theory report for a complex.
pub fn smith_report(k: &SimplicialGComplex, kalinin: Option<usize>, borel_cap: Option<usize>, seed: u64) -> Result<Value> {
    let betti = k.betti_f2();
    let subdivided = !k.is_regular();
    let reg = if subdivided { k.barycentric_subdivide() } else { k.clone() };
    let fixed = reg.fixed_subcomplex()?;
    let verdict = reg.maximality_verdict()?;
    let lefschetz = k.lefschetz_number();
    let fixed_chi = fixed.euler_characteristic();
    if lefschetz != fixed_chi {
        return Err(Error::Internal(format!("Lefschetz number {lefschetz} differs from chi(fixed) {fixed_chi}")));
    }
    let dim = k.dim().unwrap_or(0);
    let cap = borel_cap.unwrap_or(dim + 2).max(dim);
    let borel = reg.borel_cohomology(cap)?;
    let degeneration = borel.trivial_action && borel.degenerate_count;
    let agree = verdict.maximal == borel.all_surjective && verdict.maximal == degeneration;
    if !agree {
        return Err(Error::Internal("maximality criteria disagree".into()));
    }
    let kal = match kalinin {
        Some(r) => Some(to_value(&reg.kalinin_differentials(r, seed)?)),
        None => None,
    };
    let sg = if k.is_free() { Some(to_value(&k.smith_gysin()?)) } else { None };
    Ok(json!({
        "simplices": (0..=dim).map(|d| k.count(d)).collect::<Vec<_>>(),
        "regular": !subdivided,
        "subdivided": subdivided,
        "free": k.is_free(),
        "betti": betti,
        "fixed_betti": fixed.betti_f2(),
        "verdict": if verdict.maximal { "maximal" } else { "not_maximal" },
        "totals": { "fixed": verdict.fixed_total, "ambient": verdict.total },
        "lefschetz": { "trace": lefschetz, "fixed_euler_characteristic": fixed_chi },
        "borel": borel,
        "three_way_agreement": agree,
        "kalinin": kal,
        "smith_gysin": sg,
    }))
}

fn parse_case(c: u8) -> Result<BraneCase> {
    Ok(match c {
        1 => BraneCase::Case1,
        2 => BraneCase::Case2,
        3 => BraneCase::Case3,
        4 => BraneCase::Case4,
        _ => return Err(Error::Precondition("case must be 1, 2, 3 or 4".into())),
    })
}

fn sigma_file(path: &PathBuf) -> Result<crate::zmat::ZMatrix> {
    let v = read_json(path)?;
    io::parse_matrix(io::field(&v, "sigma")?)
}

pub fn execute(cli: &Cli) -> Result<Value> {
    match &cli.command {
        Command::Lattice(a) => {
            let l = match (&a.expr, &a.file) {
                (Some(e), _) => make_named(e)?,
                (None, Some(f)) => parse_lattice(&read_json(f)?)?,
                (None, None) => return Err(Error::Precondition("give --expr or a lattice file".into())),
            };
            Ok(lattice_report(&l))
        }
        Command::Comessatti { file } => {
            let v = read_json(file)?;
            let sigma = io::parse_matrix(io::field(&v, "sigma")?)?;
            let gram = match v.get("gram") {
                Some(g) => Some(IntegerLattice::new(io::parse_matrix(g)?)?),
                None => None,
            };
            let m = InvolutiveModule::new(sigma, gram)?;
            let d = m.decompose()?;
            let mut out = json!({
                "lambda": d.lambda,
                "rank": m.rank(),
                "rank_plus": d.rank_plus,
                "rank_minus": d.rank_minus,
                "plus_blocks": d.plus_blocks(),
                "minus_blocks": d.minus_blocks(),
                "swap_blocks": d.lambda,
                "splitting": m.splitting_report()?,
            });
            if let Some(b) = &d.basis_change {
                out["basis_change"] = io::matrix_json(b);
            }
            Ok(out)
        }
        Command::Smith(a) => {
            let k = match (&a.file, &a.model) {
                (Some(f), _) => parse_complex(&read_json(f)?)?,
                (None, Some(m)) => model(m)?,
                (None, None) => return Err(Error::Precondition("give a complex file or --model".into())),
            };
            let k = match &a.times {
                Some(t) => product_complex(&k, &model(t)?)?,
                None => k,
            };
            smith_report(&k, a.kalinin, a.borel_cap, cli.seed)
        }
        Command::Hilbert(HilbertCmd::Betti { b2, n }) => {
            let series = goettsche_series(*b2, *n);
            let p = &series[*n];
            let census = lqw_census(*b2, *n);
            Ok(json!({
                "b2": b2,
                "n": n,
                "betti": p.iter().map(|x| io::int_json(&x.clone().into())).collect::<Vec<_>>(),
                "total": io::int_json(&total(p).into()),
                "census_agrees": census == *p,
            }))
        }
        Command::Hilbert(HilbertCmd::Maximality { file, n }) => {
            let s = SurfaceData::from_json(&read_json(file)?)?;
            Ok(to_value(&hilbert_maximality(&s, *n)?))
        }
        Command::K3n(K3nCmd::Classify { n, file }) => {
            let mi = MonodromyInvolution::new(*n, sigma_file(file)?)?;
            Ok(to_value(&classify_split(&mi)?))
        }
        Command::K3n(K3nCmd::Obstruct { n, file }) => Ok(to_value(&obstruct(*n, sigma_file(file)?)?)),
        Command::K3n(K3nCmd::Symplectic { n, og6 }) => {
            let target = if *og6 { SlackTarget::Og6 } else { SlackTarget::K3n(n.expect("clap enforces")) };
            Ok(to_value(&symplectic_smith_slack(target)?))
        }
        Command::K3n(K3nCmd::Representative { n, case, line }) => {
            let s = case_representative(*n, parse_case(*case)?, *line)?;
            Ok(json!({ "n": n, "case": case, "line": line, "sigma": io::matrix_json(&s) }))
        }
        Command::K3n(K3nCmd::Sweep { n, count }) => {
            let out = obstruction_sweep(Exec::default(), *n, *count, cli.seed);
            let certified = out.iter().filter(|o| o.certified).count();
            let failures: Vec<_> = out.iter().filter(|o| !o.certified).collect();
            Ok(json!({ "n": n, "count": count, "certified": certified, "failures": to_value(&failures) }))
        }
    }
}

/// Flatten a JSON value into `path: value` lines.
pub fn render_human(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&p, x, out);
                }
            }
            Value::Array(a) if a.iter().any(|x| x.is_object() || x.is_array()) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            _ => {
                out.push_str(prefix);
                out.push_str(": ");
                out.push_str(&v.to_string());
                out.push('\n');
            }
        }
    }
    let mut s = String::new();
    walk("", v, &mut s);
    s
}

/// Parse, execute and render; returns the exit code and standard output.
pub fn run(args: &[String]) -> (u8, String, String) {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { (0, text, String::new()) } else { (2, String::new(), text) };
        }
    };
    let start = Instant::now();
    match execute(&cli) {
        Ok(result) => {
            let report = RunReport {
                command: args.iter().skip(1).cloned().collect(),
                result,
                timing_ms: start.elapsed().as_secs_f64() * 1000.0,
                version: env!("CARGO_PKG_VERSION").to_string(),
            };
            let out = if cli.json {
                serde_json::to_string_pretty(&report).expect("serializable") + "\n"
            } else {
                render_human(&report.result)
            };
            (0, out, String::new())
        }
        Err(e) => (e.exit_code(), String::new(), format!("error: {e}\n")),
    }
}
