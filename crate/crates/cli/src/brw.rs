use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use longrange::brw::{simulate_replicas, summarize, BrwConfig, BrwMode};

use crate::error::CliError;
use crate::output::{csv_bytes, json_bytes, Outputs};

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    /// Siblings land on distinct sites.
    Plain,
    /// Independent steps; siblings may coincide.
    WithReplacement,
}

#[derive(Args, Debug, Serialize)]
pub struct BrwArgs {
    /// Poisson offspring mean.
    #[arg(long)]
    pub c: f64,

    /// Steps uniform on {-L..-1, 1..L}.
    #[arg(long = "L", value_name = "L")]
    pub l: u32,

    #[arg(long, value_enum, default_value_t = ModeArg::Plain)]
    pub mode: ModeArg,

    /// Kill particles outside [-K L, K L].
    #[arg(long, value_name = "K")]
    pub kill_window: Option<u32>,

    /// Remove particles born on sites visited earlier.
    #[arg(long)]
    pub erased: bool,

    /// Sites treated as already visited (comma-separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub forbidden: Vec<i64>,

    #[arg(long, default_value_t = 200)]
    pub max_generations: usize,

    /// Total population at which a walk counts as surviving.
    #[arg(long, default_value_t = 1_000_000)]
    pub population_cap: usize,

    #[arg(long, default_value_t = 1000)]
    pub replicas: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Per-replica CSV (standard output if neither this nor --summary is given).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Summary JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Serialize)]
struct Row {
    replica: usize,
    survived: bool,
    extinct_at: Option<usize>,
    tau: Option<usize>,
    gen_max_size: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    p_hat: f64,
    stderr: f64,
    replicas: usize,
    cap_hits: usize,
    seed: u64,
    config: &'a BrwConfig,
}

pub fn run(args: BrwArgs) -> Result<(), CliError> {
    if !args.forbidden.is_empty() && !args.erased {
        return Err(CliError::Usage("--forbidden only applies with --erased".into()));
    }
    let config = BrwConfig {
        offspring_mean: args.c,
        step_l: args.l,
        mode: match args.mode {
            ModeArg::Plain => BrwMode::Plain,
            ModeArg::WithReplacement => BrwMode::WithReplacement,
        },
        kill_window_k: args.kill_window,
        erased: args.erased,
        forbidden: args.forbidden.iter().copied().collect::<BTreeSet<_>>(),
        max_generations: args.max_generations,
        population_cap: args.population_cap,
    };
    config.validate()?;
    if let Some(w) = config.regime_warning() {
        eprintln!("warning: {w}");
    }
    let outcomes = simulate_replicas(&config, args.replicas, args.seed)?;
    let rows: Vec<Row> = outcomes
        .iter()
        .enumerate()
        .map(|(replica, o)| Row {
            replica,
            survived: o.survived,
            extinct_at: o.extinct_at,
            tau: o.first_self_intersection,
            gen_max_size: o.max_generation_size(),
        })
        .collect();
    let est = summarize(&outcomes);
    let summary = Summary {
        p_hat: est.p_hat,
        stderr: est.stderr,
        replicas: est.replicas,
        cap_hits: outcomes.iter().filter(|o| o.hit_cap).count(),
        seed: args.seed,
        config: &config,
    };

    let mut out = Outputs::new();
    if args.out.is_some() || args.summary.is_none() {
        out.emit(args.out.as_deref(), csv_bytes(&rows)?);
    }
    if let Some(path) = &args.summary {
        out.emit(Some(path), json_bytes(&summary)?);
    }
    out.commit("brw", &args, Some(args.seed))
}
