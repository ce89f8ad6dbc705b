use clap::Args;

use longrange::theory::{
    borel_tanner_pmf, component_fraction, invert_u, theta_of_c, u_of_c, SeriesParams,
};

use crate::error::CliError;

#[derive(Args, Debug)]
pub struct TheoryArgs {
    /// u(c), the limiting normalised transposition distance.
    #[arg(long = "u", value_name = "C")]
    u: Vec<f64>,

    /// theta(c), the Poisson(c) Galton-Watson survival probability.
    #[arg(long, value_name = "C")]
    theta: Vec<f64>,

    /// P(Z = k) for the Borel-Tanner law with parameter c.
    #[arg(long, num_args = 2, value_names = ["C", "K"])]
    borel: Vec<f64>,

    /// The c with u(c) = r.
    #[arg(long, value_name = "R")]
    invert_u: Vec<f64>,

    /// S(c), the limiting number of components per vertex.
    #[arg(long, value_name = "C")]
    component_fraction: Vec<f64>,

    /// Target bound on the omitted tail of series evaluations.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,

    #[arg(long, default_value_t = 1_000_000)]
    max_terms: usize,
}

/// Prints one tab-separated row per requested quantity:
/// `quantity argument value error_bound`.
pub fn run(args: TheoryArgs) -> Result<(), CliError> {
    let params = SeriesParams::new(args.tolerance, args.max_terms)?;
    let mut rows: Vec<[String; 4]> = Vec::new();
    for &c in &args.u {
        let v = u_of_c(c, params)?;
        rows.push(["u".into(), c.to_string(), v.value.to_string(), format!("{:.3e}", v.truncation_bound)]);
    }
    for &c in &args.theta {
        let v = theta_of_c(c, args.tolerance)?;
        rows.push(["theta".into(), c.to_string(), v.value.to_string(), format!("{:.3e}", v.truncation_bound)]);
    }
    for pair in args.borel.chunks(2) {
        let (c, k) = (pair[0], pair[1]);
        if k.fract() != 0.0 || k < 1.0 {
            return Err(CliError::Usage(format!("--borel needs an integer k >= 1, got {k}")));
        }
        let p = borel_tanner_pmf(c, k as u64)?;
        rows.push(["borel".into(), format!("{c} {k}"), p.to_string(), "-".into()]);
    }
    for &r in &args.invert_u {
        let c = invert_u(r, args.tolerance)?;
        rows.push(["invert_u".into(), r.to_string(), c.to_string(), format!("{:.3e}", args.tolerance)]);
    }
    for &c in &args.component_fraction {
        let v = component_fraction(c, params)?;
        rows.push([
            "component_fraction".into(),
            c.to_string(),
            v.value.to_string(),
            format!("{:.3e}", v.truncation_bound),
        ]);
    }
    if rows.is_empty() {
        return Err(CliError::Usage(
            "nothing to evaluate; pass --u, --theta, --borel, --invert-u or --component-fraction"
                .into(),
        ));
    }
    println!("quantity\targument\tvalue\terror_bound");
    for r in rows {
        println!("{}", r.join("\t"));
    }
    Ok(())
}
