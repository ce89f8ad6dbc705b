use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use longrange::graph::run_graph as simulate;
use longrange::replicas::{rng_from_seed, run_replicas};
use longrange::reversal::run_reversals_with;
use longrange::stats::mean_stderr;
use longrange::theory::{u_of_c, SeriesParams};
use longrange::transposition::{run_transpositions_with, RateMode};
use longrange::{DistanceDistribution, Error};

use crate::error::CliError;
use crate::output::{csv_bytes, Outputs};

#[derive(Args, Debug, Serialize)]
pub struct RangeArgs {
    /// Number of sites on the cycle (genes, for reversals).
    #[arg(long)]
    pub n: usize,

    /// Range: distances uniform on 1..=L (segment lengths for reversals).
    #[arg(long = "L", value_name = "L")]
    pub l: Option<usize>,

    /// Distance weight table, one `distance weight` pair per line.
    #[arg(long, conflicts_with = "l")]
    pub dist_file: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct TimeArgs {
    /// Final time in units of n/2 (t = c n / 2).
    #[arg(long, conflicts_with_all = ["t", "c_grid"])]
    pub c: Option<f64>,

    /// Final time in events.
    #[arg(long, conflicts_with = "c_grid")]
    pub t: Option<f64>,

    /// Snapshot grid in units of n/2, as START:END:STEP.
    #[arg(long, value_name = "A:B:STEP")]
    pub c_grid: Option<String>,

    /// Number of evenly spaced snapshots on (0, t]; the last is at t.
    #[arg(long, default_value_t = 1, conflicts_with = "c_grid")]
    pub snapshots: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,

    /// Master seed; replica i uses a stream derived from (seed, i).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Trajectory CSV (standard output if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct GraphArgs {
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub run: RunArgs,

    /// Length of the vertex windows counted as empty patches (default: the
    /// largest distance of the range).
    #[arg(long = "empty-patch-L", value_name = "LEN")]
    pub empty_patch_l: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct TranspositionArgs {
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub run: RunArgs,

    /// Leave the fragmentation-rate column empty.
    #[arg(long)]
    pub no_rate: bool,

    /// Also write the mean curve `c,mean,stderr,u_of_c` to this file.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ReversalArgs {
    #[command(flatten)]
    pub range: RangeArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub run: RunArgs,

    /// Also write the mean curve `c,mean,stderr,u_of_c` to this file.
    #[arg(long)]
    pub curve: Option<PathBuf>,
}

/// Parses `START:END:STEP` into `START + k STEP` for `k = 0, 1, ...` up to
/// `END` (inclusive, with a relative slack of `1e-9` steps).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Usage(format!("grid {spec:?} is not START:END:STEP"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let (a, b, step) = (nums[0], nums[1], nums[2]);
    if !(a >= 0.0 && b >= a && step > 0.0 && b.is_finite()) {
        return Err(CliError::Usage(format!(
            "grid {spec:?} needs 0 <= START <= END and STEP > 0"
        )));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| a + k as f64 * step).collect())
}

/// Snapshot times and the final time.
fn snapshot_times(n: usize, time: &TimeArgs) -> Result<(Vec<f64>, f64), CliError> {
    let half_n = n as f64 / 2.0;
    if let Some(grid) = &time.c_grid {
        let times: Vec<f64> = parse_grid(grid)?.iter().map(|c| c * half_n).collect();
        let end = *times.last().expect("grids are non-empty");
        return Ok((times, end));
    }
    let end = match (time.c, time.t) {
        (Some(c), None) => c * half_n,
        (None, Some(t)) => t,
        _ => return Err(CliError::Usage("give one of --c, --t or --c-grid".into())),
    };
    if !(end >= 0.0 && end.is_finite()) {
        return Err(CliError::Usage(format!("final time must be finite and >= 0, got {end}")));
    }
    if time.snapshots == 0 {
        return Err(CliError::Usage("--snapshots must be at least 1".into()));
    }
    let k = time.snapshots;
    let times = (1..=k).map(|i| end * i as f64 / k as f64).collect();
    Ok((times, end))
}

fn distribution(range: &RangeArgs) -> Result<DistanceDistribution, CliError> {
    match (&range.dist_file, range.l) {
        (Some(path), _) => Ok(DistanceDistribution::from_weight_file(path, range.n)?),
        (None, Some(l)) => Ok(DistanceDistribution::uniform(l, range.n)?),
        (None, None) => Err(CliError::Usage("give --L or --dist-file".into())),
    }
}

fn check_replicas(run: &RunArgs) -> Result<(), CliError> {
    if run.replicas == 0 {
        return Err(CliError::Usage("--replicas must be at least 1".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct GraphRow {
    replica: usize,
    t: f64,
    c: f64,
    #[serde(rename = "K")]
    k: usize,
    lambda1: usize,
    lambda2: usize,
    #[serde(rename = "empty_patches_L")]
    empty_patches: usize,
}

pub fn run_graph(args: GraphArgs) -> Result<(), CliError> {
    check_replicas(&args.run)?;
    let dist = distribution(&args.range)?;
    let (times, end) = snapshot_times(dist.n(), &args.time)?;
    let patch = args.empty_patch_l.unwrap_or(dist.max_distance());
    if patch == 0 || patch > dist.n() / 2 {
        return Err(CliError::Usage(format!(
            "--empty-patch-L must lie in [1, n/2], got {patch}"
        )));
    }
    let n = dist.n() as f64;
    let runs = run_replicas(args.run.seed, args.run.replicas, |_, seed| {
        let mut rng = rng_from_seed(seed);
        simulate(&dist, end, &times, patch, &mut rng).map(|(_, s)| s)
    });
    let mut rows = Vec::new();
    for (replica, run) in runs.into_iter().enumerate() {
        for s in run? {
            rows.push(GraphRow {
                replica,
                t: s.t,
                c: 2.0 * s.t / n,
                k: s.components,
                lambda1: s.lambda1,
                lambda2: s.lambda2,
                empty_patches: s.empty_patches,
            });
        }
    }
    let mut out = Outputs::new();
    out.emit(args.run.out.as_deref(), csv_bytes(&rows)?);
    out.commit("sim-graph", &args, Some(args.run.seed))
}

#[derive(Serialize)]
struct TranspositionRow {
    replica: usize,
    time: f64,
    c_equiv: f64,
    #[serde(rename = "N")]
    events: u64,
    #[serde(rename = "F")]
    fragmentations: u64,
    delta: usize,
    delta_over_n: f64,
    g_hat: Option<f64>,
}

#[derive(Serialize)]
struct CurveRow {
    c: f64,
    mean: f64,
    stderr: f64,
    u_of_c: f64,
}

/// Per-snapshot mean of `values[replica][snapshot]` against `u(c)`.
fn curve_rows(c_values: &[f64], values: &[Vec<f64>]) -> Result<Vec<CurveRow>, CliError> {
    c_values
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let xs: Vec<f64> = values.iter().map(|v| v[k]).collect();
            let (mean, stderr) = mean_stderr(&xs);
            let u = if c > 0.0 {
                u_of_c(c, SeriesParams::default())?.value
            } else {
                0.0
            };
            Ok(CurveRow {
                c,
                mean,
                stderr,
                u_of_c: u,
            })
        })
        .collect()
}

pub fn run_transpositions(args: TranspositionArgs) -> Result<(), CliError> {
    check_replicas(&args.run)?;
    let dist = distribution(&args.range)?;
    let (times, end) = snapshot_times(dist.n(), &args.time)?;
    let rate = (!args.no_rate).then_some(RateMode::Auto);
    let n = dist.n() as f64;
    let runs = run_replicas(args.run.seed, args.run.replicas, |_, seed| {
        run_transpositions_with(&dist, end, seed, &times, rate, |state, _| {
            let bookkept = state.events() as i64 - 2 * state.fragmentations() as i64;
            if state.delta() as i64 != bookkept {
                return Err(Error::Invariant(format!(
                    "delta {} differs from N - 2F = {bookkept} after event {}",
                    state.delta(),
                    state.events()
                )));
            }
            Ok(())
        })
        .map(|(_, s)| s)
    });
    let mut rows = Vec::new();
    let mut per_replica = Vec::new();
    for (replica, run) in runs.into_iter().enumerate() {
        let run = run?;
        per_replica.push(run.iter().map(|s| s.delta as f64 / n).collect::<Vec<_>>());
        for s in run {
            rows.push(TranspositionRow {
                replica,
                time: s.time,
                c_equiv: 2.0 * s.time / n,
                events: s.events,
                fragmentations: s.fragmentations,
                delta: s.delta,
                delta_over_n: s.delta as f64 / n,
                g_hat: s.g_hat,
            });
        }
    }
    let mut out = Outputs::new();
    out.emit(args.run.out.as_deref(), csv_bytes(&rows)?);
    if let Some(path) = &args.curve {
        let cs: Vec<f64> = times.iter().map(|t| 2.0 * t / n).collect();
        out.emit(Some(path), csv_bytes(&curve_rows(&cs, &per_replica)?)?);
    }
    out.commit("sim-transpositions", &args, Some(args.run.seed))
}

#[derive(Serialize)]
struct ReversalRow {
    replica: usize,
    time: f64,
    c_equiv: f64,
    delta_hat: usize,
    delta_hat_over_n: f64,
}

pub fn run_reversals(args: ReversalArgs) -> Result<(), CliError> {
    check_replicas(&args.run)?;
    if args.range.dist_file.is_some() {
        return Err(CliError::Usage(
            "sim-reversals takes segment lengths uniform on 1..=L; --dist-file is not supported"
                .into(),
        ));
    }
    let (n, l) = match args.range.l {
        Some(l) => (args.range.n, l),
        None => return Err(CliError::Usage("give --L".into())),
    };
    let (times, end) = snapshot_times(n, &args.time)?;
    let nf = n as f64;
    let runs = run_replicas(args.run.seed, args.run.replicas, |_, seed| {
        run_reversals_with(n, l, end, seed, &times, |_, _| {}).map(|(_, s)| s)
    });
    let mut rows = Vec::new();
    let mut per_replica = Vec::new();
    for (replica, run) in runs.into_iter().enumerate() {
        let run = run?;
        per_replica.push(run.iter().map(|s| s.delta_hat as f64 / nf).collect::<Vec<_>>());
        for s in run {
            rows.push(ReversalRow {
                replica,
                time: s.time,
                c_equiv: 2.0 * s.time / nf,
                delta_hat: s.delta_hat,
                delta_hat_over_n: s.delta_hat as f64 / nf,
            });
        }
    }
    let mut out = Outputs::new();
    out.emit(args.run.out.as_deref(), csv_bytes(&rows)?);
    if let Some(path) = &args.curve {
        let cs: Vec<f64> = times.iter().map(|t| 2.0 * t / nf).collect();
        out.emit(Some(path), csv_bytes(&curve_rows(&cs, &per_replica)?)?);
    }
    out.commit("sim-reversals", &args, Some(args.run.seed))
}
