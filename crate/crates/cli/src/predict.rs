use clap::{Args, ValueEnum};
use diagscale::replica::{replica_prediction, stationarity_residuals};
use serde::Serialize;

use crate::{CliResult, Failure};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long, allow_hyphen_values = true)]
    omega: f64,
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Serialize)]
struct PredictionRow {
    omega: f64,
    alpha: f64,
    mu: f64,
    nu: f64,
    eta: f64,
    w2: f64,
    #[serde(rename = "Q")]
    q: f64,
    m: f64,
    chi: f64,
    cosine: f64,
    r_nu: f64,
    r_mu: f64,
    r_eta: f64,
    r_w2: f64,
}

pub fn run(args: PredictArgs) -> CliResult {
    if !(args.omega >= 0.0) || !(args.alpha >= 1.0) {
        return Err(Failure::invalid(format!(
            "no replica formula outside omega >= 0 and alpha >= 1 (got omega = {}, alpha = {}); \
             simulate that regime instead",
            args.omega, args.alpha
        )));
    }
    let p = replica_prediction(args.omega, args.alpha)?;
    let r = stationarity_residuals(&p);
    let row = PredictionRow {
        omega: p.omega,
        alpha: p.alpha,
        mu: p.mu,
        nu: p.nu,
        eta: p.eta,
        w2: p.w2,
        q: p.q,
        m: p.m,
        chi: p.chi,
        cosine: p.cosine,
        r_nu: r.r_nu,
        r_mu: r.r_mu,
        r_eta: r.r_eta,
        r_w2: r.r_w2,
    };
    let out = std::io::stdout().lock();
    match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.serialize(&row)?;
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer(&mut out, &row).map_err(|e| Failure::invalid(e.to_string()))?;
            use std::io::Write;
            writeln!(out)?;
        }
    }
    Ok(())
}
