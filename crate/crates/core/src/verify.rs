//! Catalog-wide certification: pullback, Killing, diagonality and
//! round-trip residuals per chart.

use crate::catalog::{list_charts, ChartRecord, Params};
use crate::error::{Error, Result};
use crate::killing::{diagonality_residual, killing_residual, ks_algebra};
use crate::minkowski::Vec3M;
use crate::Wide;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub pullback: f64,
    pub killing: f64,
    pub diagonality: f64,
    pub round_trip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { pullback: 1e-8, killing: 1e-10, diagonality: 1e-8, round_trip: 1e-8 }
    }
}

impl Tolerances {
    pub fn uniform(t: f64) -> Self {
        Tolerances { pullback: t, killing: t, diagonality: t, round_trip: t }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartReport {
    pub chart: String,
    pub web_id: usize,
    pub chart_index: usize,
    pub samples: usize,
    pub max_pullback: f64,
    pub max_killing: f64,
    pub max_diagonality: f64,
    /// None when no sample could be inverted (see `round_trip_skipped`).
    pub max_round_trip: Option<f64>,
    pub round_trip_skipped: usize,
    /// Reducible charts folded by the nonnegative-root convention can invert
    /// to a different triple with the same image; those samples are
    /// measured in point space and counted here.
    pub round_trip_aliased: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub charts: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
    pub charts: Vec<ChartReport>,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub tol: Tolerances,
    pub web: Option<usize>,
    pub chart: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { samples: 20, seed: 0, tol: Tolerances::default(), web: None, chart: None }
    }
}

/// Per-chart stream, independent of evaluation order.
fn chart_rng(seed: u64, c: &ChartRecord) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ ((c.web_id as u64) << 32 | c.chart_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Triple distance beyond which an inverse is a different preimage rather
/// than an inaccurate one.
const ALIAS_GAP: f64 = 1e-4;

fn within(r: f64, tol: f64) -> bool {
    r.is_finite() && r <= tol
}

struct Maxima {
    pullback: f64,
    killing: f64,
    diagonality: f64,
    round_trip: Option<f64>,
    skipped: usize,
    aliased: usize,
}

fn measure(c: &ChartRecord, samples: usize, rng: &mut ChaCha8Rng) -> Result<Maxima> {
    let pr: Params = c.web().params.defaults();
    let mut m = Maxima { pullback: 0.0, killing: 0.0, diagonality: 0.0, round_trip: None, skipped: 0, aliased: 0 };
    let alg_wide = ks_algebra(&c.chart_ct_in::<Wide>(&pr)?);
    let alg = ks_algebra(&c.chart_ct_in::<f64>(&pr)?);
    for _ in 0..samples {
        let s = c.sample(&pr, rng)?;
        m.pullback = m.pullback.max(c.pullback_residual(&pr, &s)?);
        for k in alg_wide.members() {
            m.diagonality = m.diagonality.max(diagonality_residual(k, c, &pr, &s)?);
        }
        let q = Vec3M::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        for k in [&alg.k1, &alg.k2] {
            m.killing = m.killing.max(killing_residual(k, &q));
        }
        let p = c.map(&pr, &s)?;
        match c.invert(&pr, &p) {
            Ok(back) => {
                let sc = 1.0 + s.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                let mut e = (0..3).fold(0.0f64, |a, i| a.max((back[i] - s[i]).abs() / sc));
                if e > ALIAS_GAP && !c.irreducible {
                    let q = c.map(&pr, &back)?;
                    e = (q - p).max_abs() / (1.0 + p.max_abs());
                    m.aliased += 1;
                }
                m.round_trip = Some(m.round_trip.unwrap_or(0.0).max(e));
            }
            Err(Error::NumericalNonConvergence) => m.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(m)
}

pub fn verify_chart(c: &ChartRecord, opts: &VerifyOptions) -> ChartReport {
    let mut rng = chart_rng(opts.seed, c);
    let mut rep = ChartReport {
        chart: c.to_string(),
        web_id: c.web_id,
        chart_index: c.chart_index,
        samples: opts.samples,
        max_pullback: 0.0,
        max_killing: 0.0,
        max_diagonality: 0.0,
        max_round_trip: None,
        round_trip_skipped: 0,
        round_trip_aliased: 0,
        error: None,
        pass: false,
    };
    match measure(c, opts.samples, &mut rng) {
        Ok(m) => {
            let t = &opts.tol;
            rep.pass = within(m.pullback, t.pullback)
                && within(m.killing, t.killing)
                && within(m.diagonality, t.diagonality)
                && m.round_trip.map_or(true, |r| within(r, t.round_trip));
            rep.max_pullback = m.pullback;
            rep.max_killing = m.killing;
            rep.max_diagonality = m.diagonality;
            rep.max_round_trip = m.round_trip;
            rep.round_trip_skipped = m.skipped;
            rep.round_trip_aliased = m.aliased;
        }
        Err(e) => rep.error = Some(e.to_string()),
    }
    rep
}

/// Run the suite over the selected charts, sorted by chart id.
pub fn verify(opts: &VerifyOptions) -> VerifyReport {
    let charts: Vec<ChartReport> = list_charts()
        .filter(|c| opts.web.map_or(true, |w| w == c.web_id))
        .filter(|c| opts.chart.map_or(true, |i| i == c.chart_index))
        .map(|c| verify_chart(c, opts))
        .collect();
    let passed = charts.iter().filter(|r| r.pass).count();
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        seed: opts.seed,
        samples: opts.samples,
        tolerances: opts.tol,
        summary: Summary { charts: charts.len(), passed, failed: charts.len() - passed },
        charts,
    }
}
