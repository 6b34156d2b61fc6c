use clap::{Args, Parser, Subcommand, ValueEnum};
use minksep::catalog::{self, identify_webs, Params};
use minksep::concircular::{classify_ct, is_reducible, ConcircularTensor};
use minksep::verify::{verify, Tolerances, VerifyOptions, VerifyReport};
use minksep::{Error, Operator, Vec3};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::process::ExitCode;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "minksep", version, about = "Concircular tensors and separable webs of 3D Minkowski space")]
struct Cli {
    /// Seed for every sampled check
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Override every verification tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<std::path::PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a concircular tensor given as JSON ({"A":..,"w":..,"m":..})
    Classify {
        /// File path, '-' for stdin, or inline JSON
        input: String,
    },
    /// Evaluate or invert a catalog chart
    Chart(ChartArgs),
    /// Run the certification suite over the catalog
    Verify {
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long)]
        web: Option<usize>,
        #[arg(long)]
        chart: Option<usize>,
    },
    /// Export catalog data
    Export {
        #[command(subcommand)]
        kind: ExportKind,
    },
}

#[derive(Args)]
struct ChartArgs {
    web: usize,
    chart: usize,
    /// Family parameters, e.g. a=1,b=2
    #[arg(long, default_value = "")]
    params: String,
    /// Chart coordinates u,v,w
    #[arg(long, allow_hyphen_values = true, conflicts_with = "point")]
    triple: Option<String>,
    /// Cartesian point t,x,y
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    #[arg(long, conflicts_with = "invert")]
    forward: bool,
    #[arg(long)]
    invert: bool,
}

#[derive(Subcommand)]
enum ExportKind {
    /// Every web and chart record
    Catalog,
    /// CSV grid "u,v,w,t,x,y" on a coordinate slice
    Surface {
        web: usize,
        chart: usize,
        /// Fixed coordinate, e.g. u=1
        #[arg(long, allow_hyphen_values = true)]
        fix: String,
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long, default_value = "")]
        params: String,
    },
}

/// Failure carrying its exit code.
struct Fail(u8, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotSelfAdjoint => 3,
            Error::BadParams(_) | Error::Parse(_) | Error::UnknownWeb(_) | Error::UnknownChart(..) => 2,
            _ => 4,
        };
        Fail(code, e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

// ---- classify -------------------------------------------------------------

/// Scalar (multiple of the identity / zero vector), diagonal, or full entries.
#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixIn {
    Scalar(f64),
    Diagonal([f64; 3]),
    Full([[f64; 3]; 3]),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorIn {
    Scalar(f64),
    Full([f64; 3]),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CtIn {
    #[serde(rename = "A")]
    a: MatrixIn,
    w: VectorIn,
    m: f64,
}

impl CtIn {
    fn tensor(&self) -> Result<ConcircularTensor<f64>, Fail> {
        let a = match self.a {
            MatrixIn::Scalar(s) => Operator::identity().scale(s),
            MatrixIn::Diagonal(d) => Operator::diag(d),
            MatrixIn::Full(m) => Operator::new(m),
        };
        let w = match self.w {
            VectorIn::Scalar(s) => Vec3::new(s, s, s),
            VectorIn::Full(v) => Vec3::new(v[0], v[1], v[2]),
        };
        let finite = a.m.iter().flatten().chain(w.0.iter()).chain([self.m].iter()).all(|x| x.is_finite());
        if !finite {
            return Err(usage("tensor entries must be finite"));
        }
        Ok(ConcircularTensor::new(a, w, self.m)?)
    }
}

#[derive(Serialize)]
struct TensorOut {
    #[serde(rename = "A")]
    a: [[f64; 3]; 3],
    w: [f64; 3],
    m: f64,
}

#[derive(Serialize)]
struct ClassifyOut {
    schema_version: u32,
    class: &'static str,
    eps: i8,
    k: u8,
    trivial: bool,
    reducible: bool,
    canonical: TensorOut,
    origin_shift: [f64; 3],
    scale: f64,
    metric_shift: f64,
    frame: [[f64; 3]; 3],
    webs: Vec<usize>,
}

fn read_input(input: &str) -> Result<String, Fail> {
    if input.trim_start().starts_with('{') {
        return Ok(input.to_string());
    }
    let mut s = String::new();
    if input == "-" {
        std::io::stdin().read_to_string(&mut s).map_err(|e| usage(e.to_string()))?;
    } else {
        s = std::fs::read_to_string(input).map_err(|e| usage(format!("{input}: {e}")))?;
    }
    Ok(s)
}

fn cmd_classify(input: &str, fmt: Format) -> Result<String, Fail> {
    let raw = read_input(input)?;
    let ct: CtIn = serde_json::from_str(&raw).map_err(|e| usage(format!("malformed tensor: {e}")))?;
    let l = ct.tensor()?;
    let c = classify_ct(&l)?;
    let t = c.tensor();
    let out = ClassifyOut {
        schema_version: SCHEMA_VERSION,
        class: c.class.tag(),
        eps: c.class.eps(),
        k: c.class.k(),
        trivial: c.trivial,
        reducible: is_reducible(&l)?,
        canonical: TensorOut { a: t.a.m, w: t.w.0, m: t.m },
        origin_shift: c.origin_shift.0,
        scale: c.scale,
        metric_shift: c.metric_shift,
        frame: c.frame.m,
        webs: identify_webs(&l)?,
    };
    Ok(match fmt {
        Format::Json => json(&out),
        Format::Text => format!(
            "class {} (eps {}, k {}){}\nreducible: {}\ncanonical A: {:?}\ncanonical w: {:?}  m: {}\nwebs: {:?}\n",
            out.class,
            out.eps,
            out.k,
            if out.trivial { ", trivial" } else { "" },
            out.reducible,
            out.canonical.a,
            out.canonical.w,
            out.canonical.m,
            out.webs
        ),
    })
}

// ---- chart ----------------------------------------------------------------

fn triple(s: &str) -> Result<[f64; 3], Fail> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("expected three comma-separated numbers, got {s:?}")))?;
    <[f64; 3]>::try_from(v).map_err(|_| usage(format!("expected three numbers, got {s:?}")))
}

#[derive(Serialize)]
struct ForwardOut {
    schema_version: u32,
    chart: String,
    t: f64,
    x: f64,
    y: f64,
}

#[derive(Serialize)]
struct InverseOut {
    schema_version: u32,
    chart: String,
    u: f64,
    v: f64,
    w: f64,
    in_range: bool,
}

fn cmd_chart(a: &ChartArgs, fmt: Format) -> Result<String, Fail> {
    let c = catalog::chart(a.web, a.chart)?;
    let pr = c.web().params.check(&Params::parse(&a.params)?)?;
    let id = c.to_string();
    match (&a.triple, &a.point) {
        (Some(s), None) if !a.invert => {
            let s = triple(s)?;
            let p = catalog::chart_map(c, &pr, &s)?;
            let out = ForwardOut { schema_version: SCHEMA_VERSION, chart: id, t: p[0], x: p[1], y: p[2] };
            Ok(match fmt {
                Format::Json => json(&out),
                Format::Text => format!("t = {}\nx = {}\ny = {}\n", out.t, out.x, out.y),
            })
        }
        (None, Some(p)) if !a.forward => {
            let p = triple(p)?;
            let s = catalog::chart_invert(c, &pr, &Vec3::new(p[0], p[1], p[2]))?;
            let in_range = c.in_ranges(&pr, &s)?;
            let out = InverseOut { schema_version: SCHEMA_VERSION, chart: id, u: s[0], v: s[1], w: s[2], in_range };
            Ok(match fmt {
                Format::Json => json(&out),
                Format::Text => format!("u = {}\nv = {}\nw = {}\nin range: {}\n", out.u, out.v, out.w, in_range),
            })
        }
        _ => Err(usage("give --triple (forward) or --point (invert)")),
    }
}

// ---- verify ---------------------------------------------------------------

fn render_report(r: &VerifyReport, fmt: Format) -> String {
    match fmt {
        Format::Json => json(r),
        Format::Text => {
            let mut s = format!(
                "{:<6} {:>10} {:>10} {:>10} {:>10}  result\n",
                "chart", "pullback", "killing", "diagonal", "roundtrip"
            );
            for c in &r.charts {
                let rt = c.max_round_trip.map_or("-".to_string(), |x| format!("{x:.2e}"));
                s += &format!(
                    "{:<6} {:>10.2e} {:>10.2e} {:>10.2e} {:>10}  {}{}\n",
                    c.chart,
                    c.max_pullback,
                    c.max_killing,
                    c.max_diagonality,
                    rt,
                    if c.pass { "pass" } else { "FAIL" },
                    c.error.as_ref().map_or(String::new(), |e| format!(" ({e})"))
                );
            }
            s += &format!("{}/{} charts pass\n", r.summary.passed, r.summary.charts);
            s
        }
    }
}

// ---- export ---------------------------------------------------------------

#[derive(Serialize)]
struct CatalogOut<'a> {
    schema_version: u32,
    web_count: usize,
    chart_count: usize,
    webs: &'a [catalog::WebRecord],
}

fn cmd_export_catalog() -> String {
    let webs = catalog::list_webs();
    json(&CatalogOut {
        schema_version: SCHEMA_VERSION,
        web_count: webs.len(),
        chart_count: catalog::list_charts().count(),
        webs,
    })
}

fn cmd_export_surface(web: usize, chart: usize, fix: &str, grid: usize, params: &str) -> Result<String, Fail> {
    let c = catalog::chart(web, chart)?;
    let pr = c.web().params.check(&Params::parse(params)?)?;
    let (name, value) = fix.split_once('=').ok_or_else(|| usage("--fix expects u=, v= or w=<value>"))?;
    let idx = ["u", "v", "w"].iter().position(|n| *n == name.trim()).ok_or_else(|| usage("--fix names u, v or w"))?;
    let value: f64 = value.trim().parse().map_err(|_| usage(format!("bad number in --fix {fix}")))?;
    let rows = c.surface_grid(&pr, (idx, value), grid)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Fail(4, e.to_string());
    w.write_record(["u", "v", "w", "t", "x", "y"]).map_err(io)?;
    for (s, p) in rows {
        let p = p.map_or([f64::NAN; 3], |p| p.0);
        w.write_record(s.iter().chain(p.iter()).map(|x| x.to_string())).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Fail(4, e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output types serialize");
    s.push('\n');
    s
}

fn emit(out: &str, path: &Option<std::path::PathBuf>) -> Result<(), Fail> {
    match path {
        Some(p) => std::fs::write(p, out).map_err(|e| Fail(2, format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(out.as_bytes()).map_err(|e| Fail(2, e.to_string())),
    }
}

fn run(cli: Cli) -> Result<u8, Fail> {
    let out = match &cli.cmd {
        Cmd::Classify { input } => cmd_classify(input, cli.format)?,
        Cmd::Chart(a) => cmd_chart(a, cli.format)?,
        Cmd::Verify { samples, web, chart } => {
            if let Some(w) = web {
                catalog::web(*w)?;
                if let Some(c) = chart {
                    catalog::chart(*w, *c)?;
                }
            }
            let tol = match cli.tol {
                Some(t) if t.is_finite() && t > 0.0 => Tolerances::uniform(t),
                Some(t) => return Err(usage(format!("--tol must be positive, got {t}"))),
                None => Tolerances::default(),
            };
            let opts = VerifyOptions { samples: *samples, seed: cli.seed, tol, web: *web, chart: *chart };
            let r = verify(&opts);
            emit(&render_report(&r, cli.format), &cli.output)?;
            return Ok(if r.all_pass() { 0 } else { 1 });
        }
        Cmd::Export { kind } => match kind {
            ExportKind::Catalog => cmd_export_catalog(),
            ExportKind::Surface { web, chart, fix, grid, params } => cmd_export_surface(*web, *chart, fix, *grid, params)?,
        },
    };
    emit(&out, &cli.output)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("minksep: {msg}");
            ExitCode::from(code)
        }
    }
}
