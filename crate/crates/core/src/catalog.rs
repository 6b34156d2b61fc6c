//! The 45 separable webs of E³₁ and their 88 coordinate charts, as data.
//!
//! Every formula is parsed once into an [`Expr`]; the same record drives
//! evaluation, dual-number differentiation and export.

use crate::concircular::{classify_ct, CTClass, CanonicalCT, ConcircularTensor, CLUSTER_TOL};
use crate::jordan::Eigen;
use crate::dd::Dd as Wide;
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::expr::{Env, Expr, Sym};
use crate::ict::ict_invert;
use crate::minkowski::{Operator3, SymBilinear, Vec3M};
use crate::scalar::{c, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;
use std::sync::OnceLock;

type V = Vec3M<f64>;

const SOURCE: &str = include_str!("../data/catalog.toml");

/// Distance kept from finite range boundaries when sampling.
pub const SAMPLE_MARGIN: f64 = 1e-3;
/// Width used in place of an infinite range end.
pub const SAMPLE_SPAN: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Cartesian,
    Central,
    NonNullAxial,
    NullAxial,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Cartesian => "cartesian",
            Family::Central => "central",
            Family::NonNullAxial => "non_null_axial",
            Family::NullAxial => "null_axial",
        }
    }

    fn from_tag(s: &str) -> Option<Family> {
        [Family::Cartesian, Family::Central, Family::NonNullAxial, Family::NullAxial]
            .into_iter()
            .find(|f| f.tag() == s)
    }
}

/// Parameter constraint families of the webs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    /// no parameters
    None,
    /// a > 0
    APos,
    /// 0 < a < b
    ALtB,
    /// 0 < a < 1, b = √(1 − a²)
    A2B2One,
    /// b > 0, c > 0
    BPos,
    /// c > 0
    CPos,
}

impl ParamKind {
    fn from_tag(s: &str) -> Option<ParamKind> {
        Some(match s {
            "none" => ParamKind::None,
            "a_pos" => ParamKind::APos,
            "a_lt_b" => ParamKind::ALtB,
            "a2_b2_one" => ParamKind::A2B2One,
            "b_pos" => ParamKind::BPos,
            "c_pos" => ParamKind::CPos,
            _ => return None,
        })
    }

    pub fn tag(self) -> &'static str {
        match self {
            ParamKind::None => "none",
            ParamKind::APos => "a_pos",
            ParamKind::ALtB => "a_lt_b",
            ParamKind::A2B2One => "a2_b2_one",
            ParamKind::BPos => "b_pos",
            ParamKind::CPos => "c_pos",
        }
    }

    pub fn constraint(self) -> &'static str {
        match self {
            ParamKind::None => "",
            ParamKind::APos => "a > 0",
            ParamKind::ALtB => "0 < a < b",
            ParamKind::A2B2One => "0 < a < 1, a^2 + b^2 = 1",
            ParamKind::BPos => "b > 0, c > 0",
            ParamKind::CPos => "c > 0",
        }
    }

    /// Representative values used for verification.
    pub fn defaults(self) -> Params {
        match self {
            ParamKind::None => Params::default(),
            ParamKind::APos => Params::new().a(1.0),
            ParamKind::ALtB => Params::new().a(1.0).b(2.0),
            ParamKind::A2B2One => Params::new().a(0.6).b(0.8),
            ParamKind::BPos => Params::new().b(2.0).c(1.0),
            ParamKind::CPos => Params::new().c(1.0),
        }
    }

    /// Validate `p`, filling in a dependent value where one is implied.
    pub fn check(self, p: &Params) -> Result<Params> {
        let bad = |m: &str| Err(Error::BadParams(format!("{m} (need {})", self.constraint())));
        let need = |v: Option<f64>, n: &str| v.ok_or_else(|| Error::BadParams(format!("missing parameter {n}")));
        for v in [p.a, p.b, p.c].into_iter().flatten() {
            if !v.is_finite() {
                return bad("non-finite parameter");
            }
        }
        match self {
            ParamKind::None => Ok(*p),
            ParamKind::APos => {
                if need(p.a, "a")? <= 0.0 {
                    return bad("a must be positive");
                }
                Ok(*p)
            }
            ParamKind::ALtB => {
                let (a, b) = (need(p.a, "a")?, need(p.b, "b")?);
                if !(0.0 < a && a < b) {
                    return bad("a, b out of order");
                }
                Ok(*p)
            }
            ParamKind::A2B2One => {
                let a = need(p.a, "a")?;
                if !(0.0 < a && a < 1.0) {
                    return bad("a outside (0, 1)");
                }
                let bb = (1.0 - a * a).sqrt();
                if let Some(b) = p.b {
                    if (a * a + b * b - 1.0).abs() > 1e-12 || b <= 0.0 {
                        return bad("a^2 + b^2 != 1");
                    }
                }
                Ok(Params { b: Some(p.b.unwrap_or(bb)), ..*p })
            }
            ParamKind::BPos => {
                if need(p.b, "b")? <= 0.0 || need(p.c, "c")? <= 0.0 {
                    return bad("b and c must be positive");
                }
                Ok(*p)
            }
            ParamKind::CPos => {
                if need(p.c, "c")? <= 0.0 {
                    return bad("c must be positive");
                }
                Ok(*p)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl Params {
    pub fn new() -> Self {
        Params::default()
    }
    pub fn a(mut self, v: f64) -> Self {
        self.a = Some(v);
        self
    }
    pub fn b(mut self, v: f64) -> Self {
        self.b = Some(v);
        self
    }
    pub fn c(mut self, v: f64) -> Self {
        self.c = Some(v);
        self
    }

    /// Parse "a=1,b=2".
    pub fn parse(s: &str) -> Result<Params> {
        let mut p = Params::default();
        for part in s.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::BadParams(format!("expected name=value, got {part:?}")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::BadParams(format!("bad number in {part:?}")))?;
            match k.trim() {
                "a" => p.a = Some(v),
                "b" => p.b = Some(v),
                "c" => p.c = Some(v),
                other => return Err(Error::BadParams(format!("unknown parameter {other}"))),
            }
        }
        Ok(p)
    }

    fn env<T: Scalar>(&self) -> Env<T> {
        let mut e = Env::new();
        for (s, v) in [(Sym::A, self.a), (Sym::B, self.b), (Sym::C, self.c)] {
            if let Some(v) = v {
                e.set(s, c(v));
            }
        }
        e
    }
}

fn ser_expr<S: Serializer>(e: &Expr, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&e.prefix())
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ser_expr(self, s)
    }
}

/// Cartesian combination a map formula defines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Target {
    #[serde(rename = "t")]
    T,
    #[serde(rename = "x")]
    X,
    #[serde(rename = "y")]
    Y,
    #[serde(rename = "t+x")]
    TPlusX,
    #[serde(rename = "t-x")]
    TMinusX,
    #[serde(rename = "x-t")]
    XMinusT,
    #[serde(rename = "t^2")]
    T2,
    #[serde(rename = "x^2")]
    X2,
    #[serde(rename = "y^2")]
    Y2,
    #[serde(rename = "(t+x)^2")]
    TPlusX2,
    #[serde(rename = "(t+x)*y")]
    TPlusXY,
    #[serde(rename = "t^2-x^2")]
    T2MinusX2,
    #[serde(rename = "x^2-t^2")]
    X2MinusT2,
    #[serde(rename = "t^2+x^2")]
    T2PlusX2,
    #[serde(rename = "-t^2+x^2+y^2")]
    Interval,
    #[serde(rename = "t*x")]
    TX,
}

impl Target {
    const ALL: [(Target, &'static str); 16] = [
        (Target::T, "t"),
        (Target::X, "x"),
        (Target::Y, "y"),
        (Target::TPlusX, "t+x"),
        (Target::TMinusX, "t-x"),
        (Target::XMinusT, "x-t"),
        (Target::T2, "t^2"),
        (Target::X2, "x^2"),
        (Target::Y2, "y^2"),
        (Target::TPlusX2, "(t+x)^2"),
        (Target::TPlusXY, "(t+x)*y"),
        (Target::T2MinusX2, "t^2-x^2"),
        (Target::X2MinusT2, "x^2-t^2"),
        (Target::T2PlusX2, "t^2+x^2"),
        (Target::Interval, "-t^2+x^2+y^2"),
        (Target::TX, "t*x"),
    ];

    fn from_str(s: &str) -> Option<Target> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        Target::ALL.iter().find(|(_, n)| *n == s).map(|(t, _)| *t)
    }

    pub fn as_str(self) -> &'static str {
        Target::ALL.iter().find(|(t, _)| *t == self).unwrap().1
    }
}

/// One side-by-side inequality `lhs < rhs` or `lhs > rhs` over (t, x, y).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Predicate {
    pub lhs: Expr,
    pub greater: bool,
    pub rhs: Expr,
    pub text: String,
}

impl Predicate {
    fn parse(s: &str) -> Result<Predicate> {
        let (greater, (l, r)) = if let Some(p) = s.split_once('>') {
            (true, p)
        } else if let Some(p) = s.split_once('<') {
            (false, p)
        } else {
            return Err(Error::Parse(format!("predicate without comparison: {s:?}")));
        };
        Ok(Predicate { lhs: Expr::parse(l)?, greater, rhs: Expr::parse(r)?, text: s.to_string() })
    }

    pub fn holds(&self, env: &Env<f64>) -> Result<bool> {
        let (l, r) = (self.lhs.eval(env)?, self.rhs.eval(env)?);
        Ok(if self.greater { l > r } else { l < r })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RangeItem {
    /// chart coordinate, optionally under absolute value
    Coord { index: usize, abs: bool },
    Bound(Expr),
}

/// A strict ascending chain such as `0 < a < w < v < b < u`.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeChain {
    pub items: Vec<RangeItem>,
    pub text: String,
}

impl Serialize for RangeChain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl RangeChain {
    fn parse(s: &str) -> Result<RangeChain> {
        let mut items = Vec::new();
        for tok in s.split('<').map(str::trim) {
            let abs = tok.starts_with('|') && tok.ends_with('|') && tok.len() > 2;
            let core = tok.trim_matches('|');
            let idx = ["u", "v", "w"].iter().position(|&n| n == core);
            items.push(match idx {
                Some(index) => RangeItem::Coord { index, abs },
                None => RangeItem::Bound(Expr::parse(tok)?),
            });
        }
        Ok(RangeChain { items, text: s.to_string() })
    }

    fn values(&self, params: &Env<f64>, s: &[f64; 3]) -> Result<Vec<f64>> {
        self.items
            .iter()
            .map(|it| match it {
                RangeItem::Coord { index, abs } => Ok(if *abs { s[*index].abs() } else { s[*index] }),
                RangeItem::Bound(e) => e.eval(params),
            })
            .collect()
    }

    pub fn holds(&self, params: &Env<f64>, s: &[f64; 3]) -> Result<bool> {
        let v = self.values(params, s)?;
        Ok(v.windows(2).all(|p| p[0] < p[1]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Generator {
    #[serde(rename = "A")]
    pub a: [[Expr; 3]; 3],
    pub w: [Expr; 3],
    pub m: Expr,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartRecord {
    pub web_id: usize,
    /// 1-based within the web
    pub chart_index: usize,
    pub irreducible: bool,
    pub region: Vec<Predicate>,
    pub ranges: Vec<RangeChain>,
    /// index of the timelike coordinate in (u, v, w)
    pub timelike: usize,
    pub map: Vec<(Target, Expr)>,
    pub metric: [Expr; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inverse: Option<[Expr; 3]>,
    /// translation to the generator's canonical position (irreducible charts)
    pub canonical_offset: [Expr; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WebRecord {
    pub id: usize,
    pub name: String,
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hm_label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub km_h_label: Option<String>,
    pub params: ParamKind,
    pub irreducible: bool,
    pub generator: Generator,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Number of inequivalent regions when it differs from the chart count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequivalent_regions: Option<usize>,
    pub charts: Vec<ChartRecord>,
}

#[derive(Deserialize)]
struct RawCatalog {
    web: Vec<RawWeb>,
}

#[derive(Deserialize)]
struct RawWeb {
    id: usize,
    name: String,
    family: String,
    hm_label: Option<String>,
    km_h_label: Option<String>,
    params: String,
    #[serde(default)]
    irreducible: bool,
    generator: RawGen,
    note: Option<String>,
    inequivalent_regions: Option<usize>,
    chart: Vec<RawChart>,
}

#[derive(Deserialize)]
struct RawGen {
    #[serde(rename = "A")]
    a: [[String; 3]; 3],
    w: [String; 3],
    m: String,
}

#[derive(Deserialize)]
struct RawChart {
    #[serde(default)]
    region: Vec<String>,
    ranges: Vec<String>,
    timelike: String,
    map: Vec<[String; 2]>,
    metric: [String; 3],
    inverse: Option<[String; 3]>,
    offset: Option<[String; 3]>,
}

fn parse3(v: &[String; 3]) -> Result<[Expr; 3]> {
    Ok([Expr::parse(&v[0])?, Expr::parse(&v[1])?, Expr::parse(&v[2])?])
}

fn build(raw: RawCatalog) -> Result<Catalog> {
    let mut webs = Vec::new();
    for w in raw.web {
        let family = Family::from_tag(&w.family).ok_or_else(|| Error::Parse(format!("family {}", w.family)))?;
        let params = ParamKind::from_tag(&w.params).ok_or_else(|| Error::Parse(format!("params {}", w.params)))?;
        let generator = Generator {
            a: [parse3(&w.generator.a[0])?, parse3(&w.generator.a[1])?, parse3(&w.generator.a[2])?],
            w: parse3(&w.generator.w)?,
            m: Expr::parse(&w.generator.m)?,
        };
        let mut charts = Vec::new();
        for (i, ch) in w.chart.into_iter().enumerate() {
            let timelike = ["u", "v", "w"]
                .iter()
                .position(|&n| n == ch.timelike)
                .ok_or_else(|| Error::Parse(format!("timelike {}", ch.timelike)))?;
            let map = ch
                .map
                .iter()
                .map(|[t, f]| {
                    let tg = Target::from_str(t).ok_or_else(|| Error::Parse(format!("map target {t}")))?;
                    Ok((tg, Expr::parse(f)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let zero = || Expr::Num(0.0);
            charts.push(ChartRecord {
                web_id: w.id,
                chart_index: i + 1,
                irreducible: w.irreducible,
                region: ch.region.iter().map(|s| Predicate::parse(s)).collect::<Result<_>>()?,
                ranges: ch.ranges.iter().map(|s| RangeChain::parse(s)).collect::<Result<_>>()?,
                timelike,
                map,
                metric: parse3(&ch.metric)?,
                inverse: ch.inverse.as_ref().map(parse3).transpose()?,
                canonical_offset: match &ch.offset {
                    Some(o) => parse3(o)?,
                    None => [zero(), zero(), zero()],
                },
            });
        }
        webs.push(WebRecord {
            id: w.id,
            name: w.name,
            family,
            hm_label: w.hm_label,
            km_h_label: w.km_h_label,
            params,
            irreducible: w.irreducible,
            generator,
            note: w.note,
            inequivalent_regions: w.inequivalent_regions,
            charts,
        });
    }
    Ok(Catalog { webs })
}

#[derive(Debug, Serialize)]
pub struct Catalog {
    pub webs: Vec<WebRecord>,
}

static CATALOG: OnceLock<Catalog> = OnceLock::new();

/// The embedded catalog, parsed on first use.
pub fn catalog() -> &'static Catalog {
    CATALOG.get_or_init(|| {
        let raw: RawCatalog = toml::from_str(SOURCE).expect("embedded catalog is valid TOML");
        build(raw).expect("embedded catalog formulas parse")
    })
}

pub fn list_webs() -> &'static [WebRecord] {
    &catalog().webs
}

pub fn list_charts() -> impl Iterator<Item = &'static ChartRecord> {
    catalog().webs.iter().flat_map(|w| w.charts.iter())
}

pub fn web(id: usize) -> Result<&'static WebRecord> {
    catalog().webs.iter().find(|w| w.id == id).ok_or(Error::UnknownWeb(id))
}

pub fn chart(web_id: usize, index: usize) -> Result<&'static ChartRecord> {
    web(web_id)?
        .charts
        .get(index.wrapping_sub(1))
        .ok_or(Error::UnknownChart(web_id, index))
}

impl fmt::Display for ChartRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.web_id, self.chart_index)
    }
}

impl WebRecord {
    /// The generator with parameters substituted.
    pub fn generator_ct(&self, params: &Params) -> Result<ConcircularTensor<f64>> {
        self.generator_ct_in(params)
    }

    /// The generator evaluated at the precision of `T`.
    pub fn generator_ct_in<T: Scalar>(&self, params: &Params) -> Result<ConcircularTensor<T>> {
        let (_, env) = self.param_env::<T>(params)?;
        let g = &self.generator;
        let mut a = [[T::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = g.a[i][j].eval(&env)?;
            }
        }
        let w = Vec3M::new(g.w[0].eval(&env)?, g.w[1].eval(&env)?, g.w[2].eval(&env)?);
        ConcircularTensor::new(Operator3::new(a), w, g.m.eval(&env)?)
    }

    fn param_env<T: Scalar>(&self, params: &Params) -> Result<(Params, Env<T>)> {
        let p = self.params.check(params)?;
        let mut env = p.env::<T>();
        if self.params == ParamKind::A2B2One {
            // keep a² + b² = 1 exact at the working precision
            let a = env.get(Sym::A).expect("checked");
            env.set(Sym::B, (T::one() - a * a).sqrt());
        }
        Ok((p, env))
    }
}

fn sqrt_nonneg<F: Scalar>(z: F) -> Result<F> {
    if z.value() < -1e-12 * (1.0 + z.value().abs()) {
        return Err(Error::RangeViolation(format!("negative square {:e}", z.value())));
    }
    if z.value() <= 0.0 {
        return Ok(F::zero());
    }
    Ok(z.sqrt())
}

/// Recover (t, x, y) from the map's target values, taking nonnegative roots.
pub fn solve_targets<F: Scalar>(vals: &[(Target, F)]) -> Result<Vec3M<F>> {
    Ok(solve_targets_full(vals)?.point)
}

/// Solved map point; `null` carries (x+t, x−t) when the targets determine
/// them without cancellation, which keeps pullbacks accurate near the light
/// cone where t ≈ ±x are both large.
#[derive(Clone, Copy, Debug)]
pub struct Solved<F> {
    pub point: Vec3M<F>,
    pub null: Option<(F, F)>,
}

pub fn solve_targets_full<F: Scalar>(vals: &[(Target, F)]) -> Result<Solved<F>> {
    use Target::*;
    let get = |t: Target| vals.iter().find(|(k, _)| *k == t).map(|(_, v)| *v);
    let unsupported = || Error::Unsupported("map target combination".into());
    let half: F = c(0.5);
    let mut y = match (get(Y), get(Y2)) {
        (Some(y), _) => Some(y),
        (None, Some(y2)) => Some(sqrt_nonneg(y2)?),
        _ => None,
    };
    let mut null = None;
    let tx: (F, F) = if let (Some(t), Some(x)) = (get(T), get(X)) {
        (t, x)
    } else if let (Some(t), Some(x2)) = (get(T), get(X2)) {
        (t, sqrt_nonneg(x2)?)
    } else if let (Some(t2), Some(x2)) = (get(T2), get(X2)) {
        (sqrt_nonneg(t2)?, sqrt_nonneg(x2)?)
    } else if let (Some(p), Some(m)) = (get(TPlusX), get(TMinusX).or(get(XMinusT).map(|v| -v))) {
        null = Some((p, -m));
        ((p + m) * half, (p - m) * half)
    } else if let Some(p2) = get(TPlusX2) {
        let p = sqrt_nonneg(p2)?;
        let m = if let Some(d) = get(X2MinusT2) {
            -d / p
        } else if let Some(d) = get(T2MinusX2) {
            d / p
        } else if let (Some(py), Some(q)) = (get(TPlusXY), get(Interval)) {
            let yy = py / p;
            y = Some(yy);
            (yy * yy - q) / p
        } else {
            return Err(unsupported());
        };
        null = Some((p, -m));
        ((p + m) * half, (p - m) * half)
    } else if let Some(pr) = get(TX) {
        let d = get(X2MinusT2).or(get(T2MinusX2).map(|v| -v)).ok_or_else(unsupported)?;
        let t2 = (-d + (d * d + c::<F>(4.0) * pr * pr).sqrt()) * half;
        if t2.value() <= 0.0 {
            (F::zero(), sqrt_nonneg(d)?)
        } else {
            let t = t2.sqrt();
            (t, pr / t)
        }
    } else if let Some(s) = get(T2PlusX2) {
        let d = get(X2MinusT2).or(get(T2MinusX2).map(|v| -v)).ok_or_else(unsupported)?;
        // (x+t)² = S + 2tx with 2tx = √(S² − D²); x − t = D/(x+t)
        let tx2 = sqrt_nonneg((s - d) * (s + d))?;
        let p = sqrt_nonneg(s + tx2)?;
        if p.value() <= 0.0 {
            (F::zero(), F::zero())
        } else {
            let m = d / p;
            null = Some((p, m));
            ((p - m) * half, (p + m) * half)
        }
    } else {
        return Err(unsupported());
    };
    let y = y.ok_or_else(unsupported)?;
    Ok(Solved { point: Vec3M::new(tx.0, tx.1, y), null })
}

impl ChartRecord {
    pub fn web(&self) -> &'static WebRecord {
        web(self.web_id).expect("chart belongs to a catalog web")
    }

    fn checked_env<T: Scalar>(&self, params: &Params) -> Result<(Params, Env<T>)> {
        self.web().param_env(params)
    }

    pub fn in_ranges(&self, params: &Params, s: &[f64; 3]) -> Result<bool> {
        let p = self.web().params.check(params)?;
        let env = p.env::<f64>();
        for r in &self.ranges {
            if !r.holds(&env, s)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub(crate) fn require_in_ranges(&self, params: &Params, s: &[f64; 3]) -> Result<()> {
        if !s.iter().all(|v| v.is_finite()) || !self.in_ranges(params, s)? {
            return Err(Error::RangeViolation(format!("{:?} outside chart {} ranges", s, self)));
        }
        Ok(())
    }

    fn coord_env<T: Scalar>(&self, params: &Params, s: &[T; 3]) -> Result<Env<T>> {
        let sv = [s[0].value(), s[1].value(), s[2].value()];
        self.require_in_ranges(params, &sv)?;
        let (_, mut env) = self.checked_env::<T>(params)?;
        env.set(Sym::U, s[0]).set(Sym::V, s[1]).set(Sym::W, s[2]);
        Ok(env)
    }

    /// Cartesian point of the chart triple `s`.
    pub fn map<T: Scalar>(&self, params: &Params, s: &[T; 3]) -> Result<Vec3M<T>> {
        Ok(self.map_full(params, s)?.point)
    }

    pub fn map_full<T: Scalar>(&self, params: &Params, s: &[T; 3]) -> Result<Solved<T>> {
        let env = self.coord_env(params, s)?;
        let vals = self
            .map
            .iter()
            .map(|(t, e)| Ok((*t, e.eval(&env)?)))
            .collect::<Result<Vec<_>>>()?;
        solve_targets_full(&vals)
    }

    /// Diagonal metric components at `s`.
    pub fn metric_eval<T: Scalar>(&self, params: &Params, s: &[T; 3]) -> Result<[T; 3]> {
        let env = self.coord_env(params, s)?;
        Ok([self.metric[0].eval(&env)?, self.metric[1].eval(&env)?, self.metric[2].eval(&env)?])
    }

    /// Point and Jacobian (rows t, x, y; columns u, v, w) by dual numbers.
    pub fn jacobian<T: Scalar>(&self, params: &Params, s: &[f64; 3]) -> Result<(Vec3M<T>, [[T; 3]; 3])> {
        let sd = [Dual::var(c::<T>(s[0]), 0), Dual::var(c(s[1]), 1), Dual::var(c(s[2]), 2)];
        let p = self.map(params, &sd)?;
        let mut j = [[T::zero(); 3]; 3];
        for i in 0..3 {
            j[i] = p[i].d;
        }
        Ok((Vec3M::new(p[0].v, p[1].v, p[2].v), j))
    }

    /// Pullback of a covariant form field through the chart.
    pub fn pullback_of<T: Scalar>(
        &self,
        params: &Params,
        s: &[f64; 3],
        field: impl Fn(&Vec3M<T>) -> SymBilinear<T>,
    ) -> Result<[[T; 3]; 3]> {
        let (p, j) = self.jacobian(params, s)?;
        Ok(field(&p).pullback(&j))
    }

    /// Pullback of the flat metric, using null coordinates where available.
    pub fn metric_pullback<T: Scalar>(&self, params: &Params, s: &[f64; 3]) -> Result<[[T; 3]; 3]> {
        let sd = [Dual::var(c::<T>(s[0]), 0), Dual::var(c(s[1]), 1), Dual::var(c(s[2]), 2)];
        let sol = self.map_full(params, &sd)?;
        let Some((pl, mi)) = sol.null else {
            let mut j = [[T::zero(); 3]; 3];
            for i in 0..3 {
                j[i] = sol.point[i].d;
            }
            return Ok(SymBilinear::metric().pullback(&j));
        };
        // −dt² + dx² = d(x+t)·d(x−t)
        let y = sol.point[2];
        let half: T = c(0.5);
        let mut out = [[T::zero(); 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                out[a][b] = half * (pl.d[a] * mi.d[b] + mi.d[a] * pl.d[b]) + y.d[a] * y.d[b];
            }
        }
        Ok(out)
    }

    /// max |JᵀgJ − diag(metric)| relative to the largest metric entry.
    ///
    /// Evaluated in double-double: near the poles of the elliptic charts the
    /// Jacobian entries exceed the metric by ~10⁵, so the f64 sum cancels
    /// away every significant digit the tolerance asks for.
    pub fn pullback_residual(&self, params: &Params, s: &[f64; 3]) -> Result<f64> {
        self.pullback_residual_in::<Wide>(params, s)
    }

    /// Same residual at the precision of `T`.
    pub fn pullback_residual_in<T: Scalar>(&self, params: &Params, s: &[f64; 3]) -> Result<f64> {
        let pb = self.metric_pullback::<T>(params, s)?;
        let g = self.metric_eval::<T>(params, &s.map(c::<T>))?;
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.value().abs()));
        let mut r = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { g[i] } else { T::zero() };
                r = r.max((pb[i][j] - want).value().abs());
            }
        }
        if !r.is_finite() {
            return Err(Error::RangeViolation("non-finite pullback".into()));
        }
        Ok(if scale > 0.0 { r / scale } else { r })
    }

    pub fn offset(&self, params: &Params) -> Result<V> {
        self.offset_in(params)
    }

    pub fn offset_in<T: Scalar>(&self, params: &Params) -> Result<Vec3M<T>> {
        let (_, env) = self.checked_env::<T>(params)?;
        let o = &self.canonical_offset;
        Ok(Vec3M::new(o[0].eval(&env)?, o[1].eval(&env)?, o[2].eval(&env)?))
    }

    /// The web's generator written in this chart's Cartesian frame,
    /// L(p + offset).
    pub fn chart_ct_in<T: Scalar>(&self, params: &Params) -> Result<ConcircularTensor<T>> {
        Ok(self.web().generator_ct_in::<T>(params)?.translated(&self.offset_in(params)?))
    }

    /// Printed region predicates; irreducible charts without one are
    /// characterized by the eigenvalues of their generator.
    pub fn region_contains(&self, params: &Params, p: &V) -> Result<bool> {
        let (_, mut env) = self.checked_env::<f64>(params)?;
        env.set(Sym::T, p[0]).set(Sym::X, p[1]).set(Sym::Y, p[2]);
        for pr in &self.region {
            if !pr.holds(&env)? {
                return Ok(false);
            }
        }
        if self.region.is_empty() && self.irreducible {
            return Ok(match self.invert_irreducible(params, p) {
                Ok(s) => self.in_ranges(params, &s)?,
                Err(Error::BadParams(m)) => return Err(Error::BadParams(m)),
                Err(_) => false,
            });
        }
        Ok(true)
    }

    fn invert_irreducible(&self, params: &Params, p: &V) -> Result<[f64; 3]> {
        let l = self.web().generator_ct(params)?;
        Ok(ict_invert(&l, p, &self.offset(params)?)?.0)
    }

    /// Chart coordinates of `p`.
    pub fn invert(&self, params: &Params, p: &V) -> Result<[f64; 3]> {
        let params = &self.web().params.check(params)?;
        if !self.region_contains(params, p)? {
            return Err(Error::OutsideRegion);
        }
        let s = if self.irreducible {
            self.invert_irreducible(params, p)?
        } else if let Some(inv) = &self.inverse {
            let (_, mut env) = self.checked_env::<f64>(params)?;
            env.set(Sym::T, p[0]).set(Sym::X, p[1]).set(Sym::Y, p[2]);
            [inv[0].eval(&env)?, inv[1].eval(&env)?, inv[2].eval(&env)?]
        } else {
            self.newton_invert(params, p)?
        };
        if !s.iter().all(|v| v.is_finite()) || !self.in_ranges(params, &s)? {
            return Err(Error::OutsideRegion);
        }
        Ok(s)
    }

    /// Damped Newton from the best of a fixed set of in-range starting points.
    fn newton_invert(&self, params: &Params, p: &V) -> Result<[f64; 3]> {
        let tol = 1e-12 * (1.0 + p.max_abs());
        let resid = |s: &[f64; 3]| -> Option<f64> {
            let q = self.map::<f64>(params, s).ok()?;
            let r = (q - *p).max_abs();
            r.is_finite().then_some(r)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut starts: Vec<([f64; 3], f64)> = (0..96)
            .filter_map(|_| {
                let s = self.sample(params, &mut rng).ok()?;
                Some((s, resid(&s)?))
            })
            .collect();
        starts.sort_by(|a, b| a.1.total_cmp(&b.1));
        for (mut s, mut r) in starts.into_iter().take(6) {
            for _ in 0..100 {
                if r <= tol {
                    return Ok(s);
                }
                let Ok((q, j)) = self.jacobian(params, &s) else { break };
                let f = q - *p;
                let Some(jinv) = Operator3::new(j).inverse() else { break };
                let step = jinv.apply(&f);
                let mut lam = 1.0;
                let mut improved = false;
                while lam > 1e-6 {
                    let cand = [s[0] - lam * step[0], s[1] - lam * step[1], s[2] - lam * step[2]];
                    if let Some(rc) = resid(&cand) {
                        if rc < r {
                            s = cand;
                            r = rc;
                            improved = true;
                            break;
                        }
                    }
                    lam *= 0.5;
                }
                if !improved {
                    break;
                }
            }
            if r <= tol {
                return Ok(s);
            }
        }
        Err(Error::NumericalNonConvergence)
    }

    /// Uniform sample inside the ranges, kept `SAMPLE_MARGIN` from every
    /// finite bound and from each other; rejects points where the map or the
    /// metric is not finite.
    pub fn sample<R: Rng>(&self, params: &Params, rng: &mut R) -> Result<[f64; 3]> {
        let params = self.web().params.check(params)?;
        let env = params.env::<f64>();
        for _ in 0..1000 {
            let mut s = [f64::NAN; 3];
            for chain in &self.ranges {
                self.sample_chain(chain, &env, rng, &mut s)?;
            }
            if s.iter().any(|v| v.is_nan()) {
                return Err(Error::Unsupported(format!("chart {self} leaves a coordinate unranged")));
            }
            if !self.in_ranges(&params, &s)? {
                continue;
            }
            let (Ok(p), Ok(g)) = (self.map::<f64>(&params, &s), self.metric_eval::<f64>(&params, &s)) else {
                continue;
            };
            if (0..3).all(|i| p[i].is_finite() && g[i].is_finite()) {
                return Ok(s);
            }
        }
        Err(Error::NumericalNonConvergence)
    }

    /// An n×n grid over the two free coordinates with `fix = (index, value)`.
    /// The grid spans the box of the sampled ranges; points outside the
    /// ranges (or where the map fails) carry no image.
    pub fn surface_grid(&self, params: &Params, fix: (usize, f64), n: usize) -> Result<Vec<([f64; 3], Option<V>)>> {
        if fix.0 > 2 || n < 2 || !fix.1.is_finite() {
            return Err(Error::BadParams("surface needs a coordinate index, a finite value and n ≥ 2".into()));
        }
        let free: Vec<usize> = (0..3).filter(|&i| i != fix.0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for _ in 0..2000 {
            let s = self.sample(params, &mut rng)?;
            for i in 0..3 {
                lo[i] = lo[i].min(s[i]);
                hi[i] = hi[i].max(s[i]);
            }
        }
        let step = |i: usize, k: usize| lo[i] + (hi[i] - lo[i]) * k as f64 / (n - 1) as f64;
        let mut out = Vec::with_capacity(n * n);
        let mut hits = 0;
        for a in 0..n {
            for b in 0..n {
                let mut s = [0.0; 3];
                s[fix.0] = fix.1;
                s[free[0]] = step(free[0], a);
                s[free[1]] = step(free[1], b);
                let p = match self.in_ranges(params, &s)? {
                    true => self.map::<f64>(params, &s).ok(),
                    false => None,
                };
                hits += p.is_some() as usize;
                out.push((s, p));
            }
        }
        if hits == 0 {
            return Err(Error::OutsideRegion);
        }
        Ok(out)
    }

    fn sample_chain<R: Rng>(&self, chain: &RangeChain, env: &Env<f64>, rng: &mut R, s: &mut [f64; 3]) -> Result<()> {
        // anchors: (position in chain, value); sentinels for open ends
        let n = chain.items.len();
        let mut anchors: Vec<(isize, f64)> = Vec::new();
        for (i, it) in chain.items.iter().enumerate() {
            if let RangeItem::Bound(e) = it {
                anchors.push((i as isize, e.eval(env)?));
            }
        }
        if anchors.first().map_or(true, |a| a.0 != 0) {
            anchors.insert(0, (-1, f64::NEG_INFINITY));
        }
        if anchors.last().map_or(true, |a| a.0 != n as isize - 1) {
            anchors.push((n as isize, f64::INFINITY));
        }
        for pair in anchors.windows(2) {
            let ((i0, mut lo), (i1, mut hi)) = (pair[0], pair[1]);
            let vars: Vec<(usize, bool)> = ((i0 + 1)..i1)
                .filter_map(|k| match &chain.items[k as usize] {
                    RangeItem::Coord { index, abs } => Some((*index, *abs)),
                    RangeItem::Bound(_) => None,
                })
                .collect();
            if vars.is_empty() {
                continue;
            }
            match (lo.is_finite(), hi.is_finite()) {
                (false, false) => (lo, hi) = (-SAMPLE_SPAN, SAMPLE_SPAN),
                (false, true) => lo = hi - SAMPLE_SPAN,
                (true, false) => hi = lo + SAMPLE_SPAN,
                _ => {}
            }
            let (a, b) = (lo + SAMPLE_MARGIN, hi - SAMPLE_MARGIN);
            if a >= b {
                return Err(Error::BadParams(format!("empty range in {}", chain.text)));
            }
            let xs = loop {
                let mut xs: Vec<f64> = vars.iter().map(|_| rng.gen_range(a..b)).collect();
                xs.sort_by(f64::total_cmp);
                if xs.windows(2).all(|w| w[1] - w[0] >= SAMPLE_MARGIN) {
                    break xs;
                }
            };
            for ((idx, abs), x) in vars.into_iter().zip(xs) {
                s[idx] = if abs && rng.gen_bool(0.5) { -x } else { x };
            }
        }
        Ok(())
    }
}

/// Convenience wrappers mirroring the record methods.
pub fn chart_map(c: &ChartRecord, params: &Params, s: &[f64; 3]) -> Result<V> {
    c.map(params, s)
}

pub fn chart_metric_eval(c: &ChartRecord, params: &Params, s: &[f64; 3]) -> Result<[f64; 3]> {
    c.metric_eval(params, s)
}

pub fn pullback_residual(c: &ChartRecord, params: &Params, s: &[f64; 3]) -> Result<f64> {
    c.pullback_residual(params, s)
}

pub fn region_contains(c: &ChartRecord, params: &Params, p: &V) -> Result<bool> {
    c.region_contains(params, p)
}

pub fn chart_invert(c: &ChartRecord, params: &Params, p: &V) -> Result<[f64; 3]> {
    c.invert(params, p)
}


/// Canonical-form fingerprint: class, signs and the order pattern of the
/// Jordan blocks of the canonical operator. Invariant under geometric
/// equivalence, blind to the continuous parameters of a family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Fingerprint {
    pub class: &'static str,
    pub eps: i8,
    pub k: u8,
    pub trivial: bool,
    /// (rank among distinct real parts, size, metric sign, complex).
    pub blocks: Vec<(usize, usize, i8, bool)>,
}

pub fn fingerprint(c: &CanonicalCT) -> Fingerprint {
    let blocks = c.jordan.as_ref().map(|j| j.blocks.clone()).unwrap_or_default();
    // the level of the axial block is moved by translations along w, so only
    // the blocks on D⊥ are ranked
    let mut levels: Vec<f64> = blocks.iter().map(|b| b.eigen.re()).collect();
    levels.sort_by(f64::total_cmp);
    let scale = 1.0 + levels.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    levels.dedup_by(|a, b| (*a - *b).abs() <= CLUSTER_TOL * scale);
    let rank = |x: f64| levels.iter().position(|l| (x - l).abs() <= CLUSTER_TOL * scale).unwrap_or(0);
    let pattern = |rev: bool| {
        let mut v: Vec<_> = blocks
            .iter()
            .map(|b| {
                let r = rank(b.eigen.re());
                // −(λ + N) ≅ −λ + N with the block sign times (−1)^(size−1)
                let (r, sign) = if rev {
                    (levels.len() - 1 - r, if b.size % 2 == 0 { -b.sign } else { b.sign })
                } else {
                    (r, b.sign)
                };
                (r, b.size, sign, matches!(b.eigen, Eigen::Complex(..)))
            })
            .collect();
        v.sort();
        v
    };
    let mut blocks = pattern(false);
    if c.class != CTClass::Central {
        // −L is equivalent to L; only the central normalization m = 1 fixes
        // an orientation of the spectrum
        blocks = blocks.min(pattern(true));
    }
    Fingerprint { class: c.class.tag(), eps: c.class.eps(), k: c.class.k(), trivial: c.trivial, blocks }
}

/// Catalog webs whose generator shares the fingerprint of `l`.
pub fn identify_webs(l: &ConcircularTensor<f64>) -> Result<Vec<usize>> {
    let f = fingerprint(&classify_ct(l)?);
    let mut out = Vec::new();
    for w in list_webs() {
        let g = w.generator_ct(&w.params.defaults())?;
        if fingerprint(&classify_ct(&g)?) == f {
            out.push(w.id);
        }
    }
    Ok(out)
}
