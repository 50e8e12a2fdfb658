use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use diagscale::{
    harness::run_experiment, CovarianceKind, CovarianceSpec, ExperimentConfig, Noise, Statistic, TheoryCurve,
};

use crate::config::ConfigFile;
use crate::grid::parse_reals;
use crate::output::{write_csv, SimulationRecord};
use crate::svg::{PlotSpec, Series, XAxis};
use crate::{open_output, CliResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Identity,
    Spike,
    PowerLaw,
    Stepwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Gaussian,
    T3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatArg {
    Cosine,
    Q,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoryArg {
    Auto,
    Identity,
    Spike,
    None,
}

const KEYS: &[&str] = &["model", "omega", "noise", "p", "alphas", "reps", "seed", "stat", "theory", "csv", "svg"];

#[derive(Args, Default)]
pub struct SimulateArgs {
    /// key = value file supplying any of the flags below (flags win)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Spike strength, > -1 (spike model only)
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<f64>,
    #[arg(long, value_enum)]
    noise: Option<NoiseArg>,
    #[arg(long)]
    p: Option<usize>,
    /// Comma-separated sample ratios n/p
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    stat: Option<StatArg>,
    #[arg(long, value_enum)]
    theory: Option<TheoryArg>,
    /// Write CSV here instead of stdout
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also render an SVG plot
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn from_file<T: ValueEnum>(file: &ConfigFile, key: &str) -> Result<Option<T>, String> {
    file.raw(key).map(|v| T::from_str(v, true).map_err(|_| format!("config key {key}: unknown value {v:?}"))).transpose()
}

struct Resolved {
    cfg: ExperimentConfig,
    csv: Option<PathBuf>,
    svg: Option<PathBuf>,
}

fn resolve(args: SimulateArgs) -> Result<Resolved, String> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    file.check_keys(KEYS)?;

    let model = args.model.or(from_file(&file, "model")?).unwrap_or(ModelArg::Identity);
    let omega = args.omega.or(file.get("omega")?);
    let noise = args.noise.or(from_file(&file, "noise")?).unwrap_or(NoiseArg::Gaussian);
    let p = args.p.or(file.get("p")?).unwrap_or(100);
    let alphas = match args.alphas.or(file.raw("alphas").map(str::to_string)) {
        Some(raw) => parse_reals(&raw).map_err(|e| format!("--alphas: {e}"))?,
        None => vec![1.0, 2.0, 4.0, 8.0],
    };
    let reps = args.reps.or(file.get("reps")?).unwrap_or(100);
    let seed = args.seed.or(file.get("seed")?).unwrap_or(0);
    let stat = args.stat.or(from_file(&file, "stat")?).unwrap_or(StatArg::Cosine);
    let theory = args.theory.or(from_file(&file, "theory")?).unwrap_or(TheoryArg::Auto);

    let kind = match (model, omega) {
        (ModelArg::Spike, Some(omega)) => CovarianceKind::Spike { omega },
        (ModelArg::Spike, None) => return Err("spike model needs --omega".into()),
        (ModelArg::Identity, None) => CovarianceKind::Identity,
        (ModelArg::Identity, Some(o)) if o == 0.0 => CovarianceKind::Identity,
        (ModelArg::PowerLaw, None) => CovarianceKind::PowerLaw,
        (ModelArg::Stepwise, None) => CovarianceKind::Stepwise,
        (_, Some(_)) => return Err("--omega only applies to the spike model".into()),
    };
    let noise = match noise {
        NoiseArg::Gaussian => Noise::Gaussian,
        NoiseArg::T3 => Noise::StudentT3,
    };
    let statistic = match stat {
        StatArg::Cosine => Statistic::Cosine,
        StatArg::Q => Statistic::MacroQ,
        StatArg::M => Statistic::MacroM,
    };
    let theory = match theory {
        TheoryArg::Auto => TheoryCurve::Auto,
        TheoryArg::Identity => TheoryCurve::IdentityCurve,
        TheoryArg::Spike => TheoryCurve::SpikeCurve,
        TheoryArg::None => TheoryCurve::None,
    };
    let spec = CovarianceSpec::new(kind, noise).map_err(|e| e.to_string())?;
    let cfg = ExperimentConfig::new(spec, p, alphas, reps, seed).with_statistic(statistic).with_theory(theory);
    cfg.validate().map_err(|e| e.to_string())?;
    let csv = args.csv.or(file.raw("csv").map(PathBuf::from));
    let svg = args.svg.or(file.raw("svg").map(PathBuf::from));
    Ok(Resolved { cfg, csv, svg })
}

pub fn run(args: SimulateArgs) -> CliResult {
    let Resolved { cfg, csv, svg } = resolve(args).map_err(Failure::invalid)?;
    let records = simulate(&cfg)?;
    write_csv(open_output(csv.as_ref())?, &records)?;
    if let Some(path) = svg {
        write_plot(&path, &alpha_plot(&cfg, &records, default_title(&cfg)))?;
    }
    Ok(())
}

pub fn simulate(cfg: &ExperimentConfig) -> CliResult<Vec<SimulationRecord>> {
    let rows = run_experiment(cfg)?;
    let omega = cfg.model.omega();
    Ok(rows.iter().map(|r| SimulationRecord::new(&cfg.model.kind, omega, cfg.p, cfg.reps, r)).collect())
}

pub fn stat_label(stat: Statistic) -> &'static str {
    match stat {
        Statistic::Cosine => "cosine similarity",
        Statistic::MacroQ => "Q",
        Statistic::MacroM => "m",
    }
}

fn default_title(cfg: &ExperimentConfig) -> String {
    let model = crate::output::model_name(&cfg.model.kind);
    let mut title = match cfg.model.kind {
        CovarianceKind::Spike { omega } => format!("{model}, Ω = {omega}, p = {}", cfg.p),
        _ => format!("{model}, p = {}", cfg.p),
    };
    if cfg.model.noise == Noise::StudentT3 {
        title.push_str(", t3 noise");
    }
    title
}

/// Points with whiskers against α, plus the theory curve sampled finely.
pub fn alpha_plot(cfg: &ExperimentConfig, records: &[SimulationRecord], title: String) -> PlotSpec {
    let series = Series::from_records(
        "simulated",
        records.iter().map(|r| (r.alpha, r.median, r.q05.zip(r.q95))),
    );
    let lo = cfg.alphas.iter().copied().fold(f64::INFINITY, f64::min).max(1.0);
    let hi = cfg.alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let theory: Vec<(f64, f64)> = if hi >= lo {
        (0..=200)
            .map(|i| lo + (hi - lo) * i as f64 / 200.0)
            .filter_map(|a| cfg.theory_at(a).map(|t| (a, t)))
            .collect()
    } else {
        Vec::new()
    };
    PlotSpec {
        title,
        x_axis: XAxis::Alpha,
        y_label: stat_label(cfg.statistic).to_string(),
        series: vec![series],
        theory: Some(theory).filter(|t| !t.is_empty()),
    }
}

pub fn write_plot(path: &Path, plot: &PlotSpec) -> CliResult {
    std::fs::write(path, plot.render())?;
    Ok(())
}
