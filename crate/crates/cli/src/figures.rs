//! Presets regenerating the full figure suite: CSV data plus an SVG per panel.

use std::path::PathBuf;

use clap::Args;
use diagscale::wendel::{empirical_solvability, wendel_probability};
use diagscale::{
    derive_seed, CovarianceKind, CovarianceSpec, ExperimentConfig, Noise, Statistic, TheoryCurve,
};

use crate::grid::parse_counts;
use crate::output::{write_csv, SimulationRecord, SolvabilityRecord};
use crate::simulate::{alpha_plot, simulate, stat_label, write_plot};
use crate::svg::{PlotSpec, Series, XAxis};
use crate::{CliResult, Failure};

#[derive(Args)]
pub struct FiguresArgs {
    /// Output directory (created if missing)
    #[arg(long)]
    out: PathBuf,
    /// Figures to regenerate, e.g. `1,2` or `1..6`
    #[arg(long, default_value = "1..6")]
    only: String,
    /// Replications per point for the estimator figures
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Replications per point for the solvability figure
    #[arg(long, default_value_t = 1000)]
    solvability_reps: usize,
    /// Dimension for every figure except the small-p solvability panel
    #[arg(long, default_value_t = 100)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

const ALPHAS: [f64; 9] = [1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0];
const SPIKES: [(&str, f64); 4] = [("a", 0.0), ("b", 1.0), ("c", 10.0), ("d", 100.0)];
const SOLVABILITY_OMEGAS: [f64; 5] = [-0.99, -0.9, 0.0, 10.0, 100.0];

struct Suite {
    out: PathBuf,
    reps: usize,
    solvability_reps: usize,
    p: usize,
    seed: u64,
}

pub fn run(args: FiguresArgs) -> CliResult {
    let figures = parse_counts(&args.only).map_err(|e| Failure::invalid(format!("--only: {e}")))?;
    if let Some(f) = figures.iter().find(|f| !(1..=6).contains(*f)) {
        return Err(Failure::invalid(format!("no figure {f}; choose from 1..6")));
    }
    if args.reps == 0 || args.solvability_reps == 0 {
        return Err(Failure::invalid("replication counts must be positive"));
    }
    if args.p < 2 || args.p % 2 != 0 {
        return Err(Failure::invalid(format!("--p must be even and at least 2, got {}", args.p)));
    }
    std::fs::create_dir_all(&args.out)?;
    let suite = Suite {
        out: args.out,
        reps: args.reps,
        solvability_reps: args.solvability_reps,
        p: args.p,
        seed: args.seed,
    };
    for f in figures {
        eprintln!("figure {f}");
        match f {
            1 => suite.spike_profiles()?,
            2 => suite.macroscopics()?,
            3 => suite.solvability()?,
            4 => suite.rotation_models()?,
            5 => suite.omega_profiles()?,
            6 => suite.heavy_tails()?,
            _ => unreachable!(),
        }
    }
    Ok(())
}

fn spike(omega: f64) -> CovarianceSpec {
    let kind = if omega == 0.0 { CovarianceKind::Identity } else { CovarianceKind::Spike { omega } };
    CovarianceSpec { kind, noise: Noise::Gaussian }
}

impl Suite {
    fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.out.join(format!("{stem}.{ext}"))
    }

    fn config(&self, model: CovarianceSpec, figure: u64, panel: u64) -> ExperimentConfig {
        ExperimentConfig::new(model, self.p, ALPHAS.to_vec(), self.reps, derive_seed(self.seed, &[figure, panel]))
    }

    fn emit(&self, stem: &str, cfg: &ExperimentConfig, title: String) -> CliResult {
        let records = simulate(cfg)?;
        write_csv(std::fs::File::create(self.path(stem, "csv"))?, &records)?;
        write_plot(&self.path(stem, "svg"), &alpha_plot(cfg, &records, title))
    }

    fn spike_profiles(&self) -> CliResult {
        for (i, (panel, omega)) in SPIKES.iter().enumerate() {
            let cfg = self.config(spike(*omega), 1, i as u64);
            self.emit(&format!("fig1{panel}"), &cfg, format!("spike model, Ω = {omega}, p = {}", self.p))?;
        }
        Ok(())
    }

    fn macroscopics(&self) -> CliResult {
        for (i, (name, stat)) in [("q", Statistic::MacroQ), ("m", Statistic::MacroM)].into_iter().enumerate() {
            let cfg = self.config(spike(1.0), 2, i as u64).with_statistic(stat);
            self.emit(&format!("fig2_{name}"), &cfg, format!("{}, Ω = 1, p = {}", stat_label(stat), self.p))?;
        }
        Ok(())
    }

    fn rotation_models(&self) -> CliResult {
        for (i, (stem, kind)) in
            [("fig4a", CovarianceKind::PowerLaw), ("fig4b", CovarianceKind::Stepwise)].into_iter().enumerate()
        {
            let model = CovarianceSpec { kind, noise: Noise::Gaussian };
            let cfg = self.config(model, 4, i as u64);
            let title = format!("{} model, p = {}", crate::output::model_name(&kind), self.p);
            self.emit(stem, &cfg, title)?;
        }
        Ok(())
    }

    fn heavy_tails(&self) -> CliResult {
        let model = CovarianceSpec::identity().with_noise(Noise::StudentT3);
        let cfg = self.config(model, 6, 0).with_theory(TheoryCurve::IdentityCurve);
        self.emit("fig6", &cfg, format!("standardized t3 samples, p = {}", self.p))
    }

    /// Cosine against log10(1 + Ω) at fixed α, including -1 < Ω < 0.
    fn omega_profiles(&self) -> CliResult {
        let xs: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.25).collect();
        for (i, (panel, alpha)) in [("a", 1.0), ("b", 0.7)].into_iter().enumerate() {
            let mut records: Vec<SimulationRecord> = Vec::new();
            let mut theory = Vec::new();
            for (j, &x) in xs.iter().enumerate() {
                let omega = if x == 0.0 { 0.0 } else { 10f64.powf(x) - 1.0 };
                let model = CovarianceSpec { kind: CovarianceKind::Spike { omega }, noise: Noise::Gaussian };
                let seed = derive_seed(self.seed, &[5, i as u64, j as u64]);
                let cfg = ExperimentConfig::new(model, self.p, vec![alpha], self.reps, seed);
                if let Some(t) = cfg.theory_at(alpha) {
                    theory.push((x, t));
                }
                records.extend(simulate(&cfg)?);
            }
            write_csv(std::fs::File::create(self.path(&format!("fig5{panel}"), "csv"))?, &records)?;
            let series = Series::from_records(
                "simulated",
                records.iter().zip(&xs).map(|(r, &x)| (x, r.median, r.q05.zip(r.q95))),
            );
            let plot = PlotSpec {
                title: format!("spike model, α = {alpha}, p = {}", self.p),
                x_axis: XAxis::LogOnePlusOmega,
                y_label: "cosine similarity".into(),
                series: vec![series],
                theory: Some(theory).filter(|t| !t.is_empty()),
            };
            write_plot(&self.path(&format!("fig5{panel}"), "svg"), &plot)?;
        }
        Ok(())
    }

    /// Frequency of solvable draws for α ≤ 1, with the exact law for Ω = 0.
    fn solvability(&self) -> CliResult {
        for (i, (panel, p)) in [("a", 10usize), ("b", self.p)].into_iter().enumerate() {
            let ns = sample_sizes_below(p);
            let mut records = Vec::new();
            let mut series = Vec::new();
            for (j, &omega) in SOLVABILITY_OMEGAS.iter().enumerate() {
                let spec = spike(omega);
                let mut points = Vec::new();
                for (k, &n) in ns.iter().enumerate() {
                    let seed = derive_seed(self.seed, &[3, i as u64, j as u64, k as u64]);
                    let pt = empirical_solvability(&spec, n, p, self.solvability_reps, seed)?;
                    let rec = SolvabilityRecord::simulated(&pt);
                    points.push((rec.alpha, rec.empirical, None));
                    records.push(rec);
                }
                series.push(Series::from_records(format!("Ω = {omega}"), points));
            }
            let stem = format!("fig3{panel}");
            write_csv(std::fs::File::create(self.path(&stem, "csv"))?, &records)?;
            let theory = ns.iter().map(|&n| (n as f64 / p as f64, wendel_probability(n, p))).collect();
            let plot = PlotSpec {
                title: format!("solvable fraction, p = {p}"),
                x_axis: XAxis::Alpha,
                y_label: "frequency".into(),
                series,
                theory: Some(theory),
            };
            write_plot(&self.path(&stem, "svg"), &plot)?;
        }
        Ok(())
    }
}

/// Distinct sample sizes for α on a 0.05 grid up to 1.
fn sample_sizes_below(p: usize) -> Vec<usize> {
    let mut ns: Vec<usize> = (1..=20).map(|k| diagscale::harness::sample_size(0.05 * k as f64, p).max(1)).collect();
    ns.dedup();
    ns
}
