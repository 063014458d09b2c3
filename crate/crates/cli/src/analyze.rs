use std::collections::BTreeSet;
use std::fs::File;
use std::path::PathBuf;

use clap::{ArgGroup, Args, ValueEnum};
use qaoae_core::experiments::{
    aggregate_series, linear_fit, maxima_per_problem, power_fit, read_records_csv, ExperimentRecord, FitResult,
    SeriesPoint, Summary,
};

use crate::{figures, write_json, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitTarget {
    /// Final-layer mean entropy against N.
    Page,
    /// Power law of mean entropy against layer, inside the window.
    Growth,
    /// Per-instance maximum entropy against N.
    MaxLinear,
    /// Power law of the max-linear slopes against the total time.
    Decay,
    /// Power law of mean entropy against annealing time, inside the window.
    Kappa,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("task").required(true).args(["fit", "figure"])))]
pub struct AnalyzeArgs {
    #[arg(long, value_enum, requires = "input")]
    fit: Option<FitTarget>,
    /// Sweep records (`records.csv`).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Fit window `lo,hi` for growth and kappa fits.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    window: Option<Vec<f64>>,
    /// System size for growth and kappa fits (default: the largest).
    #[arg(long)]
    n: Option<usize>,
    /// Depth or total time to select when records hold several.
    #[arg(long)]
    key: Option<f64>,
    /// Figure id, e.g. fig2a or fig3d.
    #[arg(long, requires = "summary")]
    figure: Option<String>,
    /// Sweep summary (`summary.json`).
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Output file (fits) or directory (figures).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn select_key(records: &[ExperimentRecord], key: Option<f64>) -> CliResult<f64> {
    if let Some(k) = key {
        return Ok(k);
    }
    let keys: BTreeSet<u64> = records.iter().map(|r| r.p_or_t.to_bits()).collect();
    match keys.len() {
        1 => Ok(f64::from_bits(*keys.first().unwrap())),
        0 => Err(CliError::Validation("no records".into())),
        _ => Err(CliError::Validation(format!(
            "records hold {} depths or times; pick one with --key",
            keys.len()
        ))),
    }
}

fn curve(series: &[SeriesPoint], n: usize, key: f64) -> Vec<(f64, f64)> {
    series.iter().filter(|s| s.n == n && s.p_or_t == key).map(|s| (s.layer_or_time, s.s_mean)).collect()
}

pub fn fit_records(
    target: FitTarget,
    records: &[ExperimentRecord],
    window: Option<(f64, f64)>,
    n: Option<usize>,
    key: Option<f64>,
) -> CliResult<FitResult> {
    let series = aggregate_series(records);
    let fit = match target {
        FitTarget::Page => {
            let key = select_key(records, key)?;
            let sizes: BTreeSet<usize> = series.iter().filter(|s| s.p_or_t == key).map(|s| s.n).collect();
            let (xs, ys): (Vec<f64>, Vec<f64>) = sizes
                .iter()
                .filter_map(|&n| curve(&series, n, key).last().map(|&(_, s)| (n as f64, s)))
                .unzip();
            linear_fit(&xs, &ys)?
        }
        FitTarget::Growth | FitTarget::Kappa => {
            let key = select_key(records, key)?;
            let n = n
                .or_else(|| series.iter().filter(|s| s.p_or_t == key).map(|s| s.n).max())
                .ok_or_else(|| CliError::Validation("no records".into()))?;
            let (lo, hi) = window.unwrap_or(if target == FitTarget::Growth { (4.0, 60.0) } else { (0.5, 2.0) });
            let (xs, ys): (Vec<f64>, Vec<f64>) = curve(&series, n, key)
                .into_iter()
                .filter(|&(x, y)| x >= lo && x <= hi && y > 0.0)
                .unzip();
            power_fit(&xs, &ys)?
        }
        FitTarget::MaxLinear => {
            let key = select_key(records, key)?;
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                maxima_per_problem(records).iter().filter(|m| m.p_or_t == key).map(|m| (m.n as f64, m.mean)).unzip();
            linear_fit(&xs, &ys)?
        }
        FitTarget::Decay => {
            let maxima = maxima_per_problem(records);
            let keys: BTreeSet<u64> = maxima.iter().map(|m| m.p_or_t.to_bits()).collect();
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for k in keys {
                let (ns, ss): (Vec<f64>, Vec<f64>) = maxima
                    .iter()
                    .filter(|m| m.p_or_t.to_bits() == k)
                    .map(|m| (m.n as f64, m.mean))
                    .unzip();
                xs.push(f64::from_bits(k));
                ys.push(linear_fit(&ns, &ss)?.slope);
            }
            power_fit(&xs, &ys)?
        }
    };
    Ok(fit)
}

pub fn run(args: &AnalyzeArgs) -> CliResult<()> {
    if let Some(target) = args.fit {
        let path = args.input.as_ref().expect("clap enforces --input");
        let records = read_records_csv(File::open(path)?)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let window = args.window.as_ref().map(|w| (w[0], w[1]));
        let fit = fit_records(target, &records, window, args.n, args.key)?;
        match &args.output {
            Some(out) => write_json(out, &fit)?,
            None => println!("{}", serde_json::to_string_pretty(&fit)?),
        }
        return Ok(());
    }
    let figure = args.figure.as_deref().expect("clap enforces --figure");
    let path = args.summary.as_ref().expect("clap enforces --summary");
    let summary: Summary = serde_json::from_reader(File::open(path)?)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let dir = args.output.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    for written in figures::emit_plot_data(&summary, figure, &dir)? {
        println!("{}", written.display());
    }
    Ok(())
}
