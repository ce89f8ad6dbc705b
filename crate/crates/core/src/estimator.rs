//! From an observed distance to an estimated number of events.
//!
//! Two routes are offered. [`estimate_meanfield`] inverts the limit curve
//! `u`, which is right when rearrangements act at long range. For a finite
//! range `L` the distance grows more slowly than `u(2t/n)`, so
//! [`calibrate_curve`] simulates the process at that `L` on a grid of times and
//! [`estimate_from_curve`] inverts the simulated mean curve instead.
//!
//! Both confidence intervals are heuristic. The mean-field interval treats the
//! distance as fluctuating on the scale `sqrt(d)` and maps that through the
//! local slope of `u`. The calibrated interval inverts the bands
//! `mean +- 1.96 stderr` of the calibration curve, so it reflects Monte Carlo
//! error in the curve rather than the spread of a single trajectory.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::breakpoint::delta_hat;
use crate::distribution::DistanceDistribution;
use crate::error::{Error, Result};
use crate::replicas::run_replicas;
use crate::reversal::run_reversals_with;
use crate::stats::mean_stderr;
use crate::theory::{invert_u, u_slope};
use crate::transposition::run_transpositions_with;

const Z95: f64 = 1.96;
const INVERT_TOL: f64 = 1e-12;
/// Fraction of the calibrated plateau beyond which inversion is refused.
pub const SATURATION_FRACTION: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    Transpositions,
    Reversals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Meanfield,
    Calibrated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub c_hat: f64,
    pub t_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: Method,
    /// True when an interval end was clipped to the calibrated grid.
    pub ci_clipped: bool,
}

/// Estimate from the mean-field curve: `c_hat = u^-1(d/n)`, `t_hat = c_hat n / 2`.
///
/// `d = 0` returns the zero estimate.
pub fn estimate_meanfield(n: usize, d_obs: usize) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::validation("n must be positive"));
    }
    if d_obs >= n {
        return Err(Error::Range(format!(
            "observed distance {d_obs} is not below n = {n}; u(c) < 1 for every c"
        )));
    }
    let nf = n as f64;
    if d_obs == 0 {
        return Ok(Estimate {
            c_hat: 0.0,
            t_hat: 0.0,
            ci_low: 0.0,
            ci_high: 0.0,
            method: Method::Meanfield,
            ci_clipped: false,
        });
    }
    let r = d_obs as f64 / nf;
    let c_hat = invert_u(r, INVERT_TOL)?;
    let half_c = (d_obs as f64).sqrt() / nf / u_slope(c_hat)?;
    let t_hat = c_hat * nf / 2.0;
    let half_t = half_c * nf / 2.0;
    Ok(Estimate {
        c_hat,
        t_hat,
        ci_low: (t_hat - half_t).max(0.0),
        ci_high: t_hat + half_t,
        method: Method::Meanfield,
        ci_clipped: false,
    })
}

/// Simulated mean distance curve `E[d(t)] / n` on a time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationCurve {
    pub n: usize,
    pub l: usize,
    pub process: Process,
    pub replicas: usize,
    pub t_grid: Vec<f64>,
    pub mean_over_n: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Isotonic fit of `mean_over_n`, the curve that is inverted.
    pub isotonic: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    t: f64,
    mean_over_n: f64,
    stderr: f64,
    replicas: usize,
    n: usize,
    #[serde(rename = "L")]
    l: usize,
    process: Process,
}

impl CalibrationCurve {
    pub fn new(
        n: usize,
        l: usize,
        process: Process,
        replicas: usize,
        t_grid: Vec<f64>,
        mean_over_n: Vec<f64>,
        stderr: Vec<f64>,
    ) -> Result<Self> {
        if t_grid.is_empty() || t_grid.len() != mean_over_n.len() || t_grid.len() != stderr.len() {
            return Err(Error::validation("calibration grids must be non-empty and aligned"));
        }
        check_grid(&t_grid)?;
        let isotonic = isotonic_fit(&mean_over_n);
        Ok(CalibrationCurve {
            n,
            l,
            process,
            replicas,
            t_grid,
            mean_over_n,
            stderr,
            isotonic,
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for k in 0..self.t_grid.len() {
            w.serialize(CurveRow {
                t: self.t_grid[k],
                mean_over_n: self.mean_over_n[k],
                stderr: self.stderr[k],
                replicas: self.replicas,
                n: self.n,
                l: self.l,
                process: self.process,
            })
            .map_err(csv_error)?;
        }
        w.flush()
            .map_err(|e| Error::validation(format!("writing curve: {e}")))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let rows: Vec<CurveRow> = r
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_error)?;
        let first = rows
            .first()
            .ok_or_else(|| Error::validation("calibration file has no rows"))?;
        let (n, l, process, replicas) = (first.n, first.l, first.process, first.replicas);
        if rows
            .iter()
            .any(|row| (row.n, row.l, row.process, row.replicas) != (n, l, process, replicas))
        {
            return Err(Error::validation(
                "calibration rows disagree on n, L, process or replicas",
            ));
        }
        CalibrationCurve::new(
            n,
            l,
            process,
            replicas,
            rows.iter().map(|r| r.t).collect(),
            rows.iter().map(|r| r.mean_over_n).collect(),
            rows.iter().map(|r| r.stderr).collect(),
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
        self.write_csv(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path)
            .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
        Self::read_csv(f)
    }

    /// Largest value of the fitted curve.
    pub fn plateau(&self) -> f64 {
        self.isotonic.last().copied().unwrap_or(0.0)
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Parse {
            line: p.line() as usize,
            message: e.to_string(),
        },
        None => Error::validation(e.to_string()),
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::validation("grid times must be finite and non-negative"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::validation("grid times must be strictly increasing"));
    }
    Ok(())
}

/// Least-squares non-decreasing fit (pool adjacent violators, equal weights).
pub fn isotonic_fit(ys: &[f64]) -> Vec<f64> {
    // Blocks of (sum, count).
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() > 1 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 <= s1 / c1 as f64 {
                break;
            }
            blocks.pop();
            *blocks.last_mut().unwrap() = (s0 + s1, c0 + c1);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, c)| std::iter::repeat_n(s / c as f64, c))
        .collect()
}

/// Simulates `replicas` trajectories of `process` at range `L` from the
/// identity and records the mean normalised distance at each grid time.
/// Reversal runs use `delta_hat`, transposition runs the exact distance.
pub fn calibrate_curve(
    n: usize,
    l: usize,
    t_grid: &[f64],
    replicas: usize,
    process: Process,
    seed: u64,
) -> Result<CalibrationCurve> {
    if replicas < 50 {
        return Err(Error::validation(format!(
            "calibration needs at least 50 replicas, got {replicas}"
        )));
    }
    if t_grid.is_empty() {
        return Err(Error::validation("empty time grid"));
    }
    check_grid(t_grid)?;
    let t_end = *t_grid.last().unwrap();
    let nf = n as f64;
    let dist = match process {
        Process::Transpositions => Some(DistanceDistribution::uniform(l, n)?),
        Process::Reversals => None,
    };
    let runs = run_replicas(seed, replicas, |_, s| -> Result<Vec<f64>> {
        match &dist {
            Some(dist) => {
                let (_, snaps) = run_transpositions_with(dist, t_end, s, t_grid, None, |_, _| Ok(()))?;
                Ok(snaps.iter().map(|x| x.delta as f64 / nf).collect())
            }
            None => {
                let (_, snaps) = run_reversals_with(n, l, t_end, s, t_grid, |_, _| {})?;
                Ok(snaps.iter().map(|x| x.delta_hat as f64 / nf).collect())
            }
        }
    });
    let runs: Vec<Vec<f64>> = runs.into_iter().collect::<Result<_>>()?;
    let mut means = Vec::with_capacity(t_grid.len());
    let mut errs = Vec::with_capacity(t_grid.len());
    for k in 0..t_grid.len() {
        let xs: Vec<f64> = runs.iter().map(|r| r[k]).collect();
        let (m, se) = mean_stderr(&xs);
        means.push(m);
        errs.push(se);
    }
    CalibrationCurve::new(n, l, process, replicas, t_grid.to_vec(), means, errs)
}

/// Smallest grid-interpolated `t` with `f(t) >= r` for a non-decreasing `f`
/// on `ts`, or `None` when `r` exceeds the last value.
fn generalized_inverse(ts: &[f64], f: &[f64], r: f64) -> Option<f64> {
    let k = f.iter().position(|&y| y >= r)?;
    if k == 0 {
        return Some(ts[0]);
    }
    let (y0, y1) = (f[k - 1], f[k]);
    let w = if y1 > y0 { (r - y0) / (y1 - y0) } else { 1.0 };
    Some(ts[k - 1] + w * (ts[k] - ts[k - 1]))
}

/// Inverts a calibration curve at `d_obs / n`.
pub fn estimate_from_curve(curve: &CalibrationCurve, d_obs: usize) -> Result<Estimate> {
    let nf = curve.n as f64;
    let r = d_obs as f64 / nf;
    let plateau = curve.plateau();
    if r > SATURATION_FRACTION * plateau && r > 0.0 {
        return Err(Error::Range(format!(
            "observed distance beyond calibrated saturation: d/n = {r:.4} exceeds \
             {SATURATION_FRACTION} x plateau {plateau:.4}"
        )));
    }
    let ts = &curve.t_grid;
    let t_hat = generalized_inverse(ts, &curve.isotonic, r)
        .ok_or_else(|| Error::Range("observed distance above the calibrated curve".into()))?;

    let band = |sign: f64| {
        let raw: Vec<f64> = curve
            .isotonic
            .iter()
            .zip(&curve.stderr)
            .map(|(m, s)| m + sign * Z95 * s)
            .collect();
        isotonic_fit(&raw)
    };
    // The upper band reaches r first, giving the lower end of the interval.
    let mut clipped = false;
    let ci_low = generalized_inverse(ts, &band(1.0), r).unwrap_or(t_hat);
    let ci_high = generalized_inverse(ts, &band(-1.0), r).unwrap_or_else(|| {
        clipped = true;
        *ts.last().unwrap()
    });
    Ok(Estimate {
        c_hat: 2.0 * t_hat / nf,
        t_hat,
        ci_low: ci_low.min(t_hat),
        ci_high: ci_high.max(t_hat),
        method: Method::Calibrated,
        ci_clipped: clipped,
    })
}

/// Reversal distance of one simulated trajectory at time `t`; used to test
/// estimators on data with a known answer.
pub fn simulate_reversal_distance(n: usize, l: usize, t: f64, seed: u64) -> Result<usize> {
    let (sp, _) = run_reversals_with(n, l, t, seed, &[], |_, _| {})?;
    Ok(delta_hat(&sp))
}
