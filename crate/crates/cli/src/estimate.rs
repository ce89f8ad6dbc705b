use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use longrange::breakpoint::{
    delta_hat, drosophila_dataset, minimize_delta_hat_over_signs, read_gene_order,
    GeneOrderDataset, SignSearchReport, DEFAULT_SIGN_BUDGET,
};
use longrange::estimator::{
    calibrate_curve, estimate_from_curve, estimate_meanfield, CalibrationCurve, Estimate, Process,
};

use crate::error::CliError;
use crate::output::{json_bytes, Outputs};

#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false)]
pub struct GenesArgs {
    /// Gene order file: whitespace-separated labels 1..n, optional signs.
    #[arg(long)]
    pub genes: Option<PathBuf>,

    /// Use the bundled 79-gene Drosophila order.
    #[arg(long)]
    pub drosophila: bool,
}

impl GenesArgs {
    fn load(&self) -> Result<GeneOrderDataset, CliError> {
        match &self.genes {
            Some(path) => Ok(read_gene_order(path)?),
            None => Ok(drosophila_dataset()),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ProcessArg {
    Reversals,
    Transpositions,
}

impl From<ProcessArg> for Process {
    fn from(p: ProcessArg) -> Self {
        match p {
            ProcessArg::Reversals => Process::Reversals,
            ProcessArg::Transpositions => Process::Transpositions,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub genes: GenesArgs,

    /// Range of the rearrangements, or `meanfield` for the L-free curve u(c).
    #[arg(long = "L", value_name = "L|meanfield")]
    pub l: String,

    /// Read a saved calibration curve.
    #[arg(long, conflicts_with = "calibrate")]
    pub curve: Option<PathBuf>,

    /// Simulate a calibration curve at the given L.
    #[arg(long)]
    pub calibrate: bool,

    #[arg(long, value_enum, default_value_t = ProcessArg::Reversals)]
    pub process: ProcessArg,

    /// Calibration replicas.
    #[arg(long, default_value_t = 1000)]
    pub replicas: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// End of the calibration grid (default: 4n).
    #[arg(long)]
    pub t_max: Option<f64>,

    #[arg(long, default_value_t = 1.0)]
    pub t_step: f64,

    /// Write the simulated calibration curve here.
    #[arg(long, requires = "calibrate")]
    pub save_curve: Option<PathBuf>,

    /// Distance evaluations for the orientation search on unsigned input.
    #[arg(long, default_value_t = DEFAULT_SIGN_BUDGET)]
    pub sign_search_budget: usize,

    /// Result JSON (standard output if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SignSearchArgs {
    #[command(flatten)]
    pub genes: GenesArgs,

    #[arg(long, default_value_t = DEFAULT_SIGN_BUDGET)]
    pub budget: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EstimateReport {
    genes: String,
    n: usize,
    signed_input: bool,
    delta_hat: usize,
    /// Absent when the input already carried signs.
    sign_search: Option<SignSearchReport>,
    estimate: Estimate,
}

/// `delta_hat` of the input, minimised over orientations when unsigned.
fn observed_distance(
    data: &GeneOrderDataset,
    budget: usize,
    seed: u64,
) -> Result<(usize, Option<SignSearchReport>), CliError> {
    if data.signed {
        return Ok((delta_hat(&data.signed_permutation()), None));
    }
    let report = minimize_delta_hat_over_signs(&data.unsigned_order(), budget, seed)?;
    Ok((report.delta_hat, Some(report)))
}

fn time_grid(t_max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0 && t_max > 0.0 && t_max.is_finite()) {
        return Err(CliError::Usage(
            "--t-max and --t-step must be positive and finite".into(),
        ));
    }
    let count = (t_max / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| k as f64 * step).collect())
}

pub fn run_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let data = args.genes.load()?;
    let n = data.n();
    let l = match args.l.as_str() {
        "meanfield" => None,
        s => Some(s.parse::<usize>().map_err(|_| {
            CliError::Usage(format!("--L takes a positive integer or `meanfield`, got {s:?}"))
        })?),
    };
    if l.is_none() && (args.curve.is_some() || args.calibrate) {
        return Err(CliError::Usage(
            "--curve and --calibrate need a finite --L".into(),
        ));
    }
    let curve = match (l, &args.curve) {
        (None, _) => None,
        (Some(l), Some(path)) => {
            let curve = CalibrationCurve::load(path)?;
            if curve.n != n || curve.l != l || curve.process != args.process.into() {
                return Err(CliError::Usage(format!(
                    "curve {} was calibrated for n = {}, L = {}, {:?}; input needs n = {n}, L = {l}",
                    path.display(),
                    curve.n,
                    curve.l,
                    curve.process
                )));
            }
            Some(curve)
        }
        (Some(l), None) if args.calibrate => {
            let grid = time_grid(args.t_max.unwrap_or(4.0 * n as f64), args.t_step)?;
            Some(calibrate_curve(n, l, &grid, args.replicas, args.process.into(), args.seed)?)
        }
        (Some(_), None) => {
            return Err(CliError::Usage(
                "a finite --L needs --curve FILE or --calibrate".into(),
            ))
        }
    };

    let (d, search) = observed_distance(&data, args.sign_search_budget, args.seed)?;
    let estimate = match &curve {
        None => estimate_meanfield(n, d)?,
        Some(curve) => estimate_from_curve(curve, d)?,
    };
    let report = EstimateReport {
        genes: data.name.clone(),
        n,
        signed_input: data.signed,
        delta_hat: d,
        sign_search: search,
        estimate,
    };

    let mut out = Outputs::new();
    out.emit(args.out.as_deref(), json_bytes(&report)?);
    if let (Some(path), Some(curve)) = (&args.save_curve, &curve) {
        let mut bytes = Vec::new();
        curve.write_csv(&mut bytes)?;
        out.emit(Some(path), bytes);
    }
    out.commit("estimate", &args, Some(args.seed))
}

pub fn run_sign_search(args: SignSearchArgs) -> Result<(), CliError> {
    let data = args.genes.load()?;
    let report = minimize_delta_hat_over_signs(&data.unsigned_order(), args.budget, args.seed)?;
    let mut out = Outputs::new();
    out.emit(args.out.as_deref(), json_bytes(&report)?);
    out.commit("sign-search", &args, Some(args.seed))
}
