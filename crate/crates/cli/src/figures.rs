//! Plot-ready CSV series for the figures of the study.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qaoae_core::entanglement::{poisson_pdf, R_GUE_Z2, R_POISSON};
use qaoae_core::experiments::{linear_fit, power_fit, Mode, Summary};
use qaoae_core::GraphKind;

use crate::{write_json, CliError, CliResult};

pub fn write_table_to<W: Write>(w: W, header: &[&str], rows: Vec<Vec<f64>>) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row.iter().map(f64::to_string))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_table(path: &Path, header: &[&str], rows: Vec<Vec<f64>>) -> CliResult<()> {
    write_table_to(BufWriter::new(File::create(path)?), header, rows)
}

struct Spec {
    mode: Mode,
    kind: Option<GraphKind>,
}

fn spec_of(figure: &str) -> Option<Spec> {
    use GraphKind::*;
    let panel_kind = |c: char| match c {
        'a' | 'd' => Some(Linear),
        'b' | 'e' => Some(Complete),
        'c' | 'f' => Some(Regular3),
        _ => None,
    };
    let (num, panel) = figure.strip_prefix("fig")?.split_at(1);
    let panel = panel.chars().next()?;
    let spec = match (num, panel) {
        ("2", 'a') => Spec { mode: Mode::Randomized, kind: Some(Linear) },
        ("2", 'b') => Spec { mode: Mode::Randomized, kind: Some(Complete) },
        ("2", 'c') => Spec { mode: Mode::Randomized, kind: Some(Regular3) },
        ("2", 'e' | 'f') => Spec { mode: Mode::Randomized, kind: Some(Regular3) },
        ("3", 'a') => Spec { mode: Mode::Randomized, kind: Some(Linear) },
        ("3", 'b') => Spec { mode: Mode::Randomized, kind: Some(Complete) },
        ("3", 'c') => Spec { mode: Mode::Randomized, kind: Some(Regular3) },
        ("3", 'd' | 'e') => Spec { mode: Mode::Randomized, kind: None },
        ("4", 'a'..='f') => Spec { mode: Mode::Optimized, kind: panel_kind(panel) },
        ("5", 'a'..='f') => Spec { mode: Mode::Annealing, kind: panel_kind(panel) },
        ("5", 'g') => Spec { mode: Mode::Annealing, kind: None },
        _ => return None,
    };
    (figure.len() == 5).then_some(spec)
}

fn missing(figure: &str, what: &str) -> CliError {
    CliError::Validation(format!("{figure}: summary has no {what}"))
}

/// Writes the CSV series of `figure` into `dir`; returns the written paths.
pub fn emit_plot_data(summary: &Summary, figure: &str, dir: &Path) -> CliResult<Vec<PathBuf>> {
    let spec = spec_of(figure).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown figure `{figure}`; expected fig2a-c, fig2e-f, fig3a-e, fig4a-f or fig5a-g (fig2d comes from graph-stats)"
        ))
    })?;
    let cfg = &summary.config;
    if cfg.mode != spec.mode {
        return Err(CliError::Validation(format!("{figure} needs a {} sweep, summary is {}", spec.mode, cfg.mode)));
    }
    if let Some(kind) = spec.kind {
        if cfg.graph_kind != kind {
            return Err(CliError::Validation(format!(
                "{figure} needs {kind} graphs, summary is for {}",
                cfg.graph_kind
            )));
        }
    }
    let mut written = Vec::new();
    let emit = |written: &mut Vec<PathBuf>, name: String, header: &[&str], rows: Vec<Vec<f64>>| -> CliResult<()> {
        if rows.is_empty() {
            return Err(missing(figure, "data for this figure"));
        }
        let path = dir.join(name);
        write_table(&path, header, rows)?;
        written.push(path);
        Ok(())
    };
    let panel = &figure[4..];
    match (&figure[3..4], panel) {
        ("2" | "4" | "5", "a" | "b" | "c") => {
            let mut curves: BTreeMap<(usize, u64), Vec<Vec<f64>>> = BTreeMap::new();
            for s in &summary.series {
                curves.entry((s.n, s.p_or_t.to_bits())).or_default().push(vec![s.layer_or_time, s.s_mean, s.s_stderr]);
            }
            if curves.is_empty() {
                return Err(missing(figure, "entropy series"));
            }
            let x = if spec.mode == Mode::Annealing { "t" } else { "ell" };
            for ((n, key), rows) in curves {
                let name = match spec.mode {
                    Mode::Randomized => format!("{figure}_N{n}.csv"),
                    Mode::Optimized => format!("{figure}_N{n}_p{}.csv", f64::from_bits(key)),
                    Mode::Annealing => format!("{figure}_N{n}_T{}.csv", f64::from_bits(key)),
                };
                emit(&mut written, name, &[x, "S_mean", "S_stderr"], rows)?;
            }
        }
        ("2", "e") => {
            let rows = summary.series.iter().map(|s| vec![s.layer_or_time, s.n as f64, s.s_mean, s.s_stderr]).collect();
            emit(&mut written, format!("{figure}.csv"), &["ell", "N", "S_mean", "S_stderr"], rows)?;
        }
        ("2", "f") => {
            let mut by_layer: BTreeMap<u64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
            for s in &summary.series {
                let e = by_layer.entry(s.layer_or_time.to_bits()).or_default();
                e.0.push(s.n as f64);
                e.1.push(s.s_mean);
            }
            let rows = by_layer
                .into_iter()
                .filter_map(|(l, (xs, ys))| {
                    let f = linear_fit(&xs, &ys).ok()?;
                    Some(vec![f64::from_bits(l), f.intercept, f.slope, f.residual_norm])
                })
                .collect();
            emit(&mut written, format!("{figure}.csv"), &["ell", "a_of_ell", "b_of_ell", "residual_norm"], rows)?;
        }
        ("3", "a" | "b" | "c") => {
            if summary.gaps.is_empty() {
                return Err(missing(figure, "gap-ratio statistics (run with spectrum=true)"));
            }
            for g in &summary.gaps {
                let bins = g.histogram.len() as f64;
                let rows = g
                    .histogram
                    .iter()
                    .enumerate()
                    .map(|(k, &p)| {
                        let r = (k as f64 + 0.5) / bins;
                        vec![r, p, poisson_pdf(r).unwrap_or(0.0)]
                    })
                    .collect();
                emit(&mut written, format!("{figure}_N{}.csv", g.n), &["r", "P_r", "poisson_reference"], rows)?;
            }
        }
        ("3", "d") => {
            if summary.spectra.is_empty() {
                return Err(missing(figure, "entanglement spectra (run with spectrum=true)"));
            }
            for s in &summary.spectra {
                let rows = (0..s.x.len()).map(|k| vec![s.x[k], s.scaled_mean[k], s.mp_reference[k]]).collect();
                emit(
                    &mut written,
                    format!("{figure}_N{}.csv", s.n),
                    &["x", "scaled_lambda2_mean", "mp_reference"],
                    rows,
                )?;
            }
        }
        ("3", "e") => {
            let rows = summary
                .gaps
                .iter()
                .map(|g| vec![g.n as f64, g.r_mean, g.r_stderr, R_POISSON, R_GUE_Z2])
                .collect();
            emit(&mut written, format!("{figure}.csv"), &["N", "r_mean", "r_stderr", "r_poisson", "r_gue_z2"], rows)?;
        }
        ("4" | "5", "d" | "e" | "f") => {
            let key = if spec.mode == Mode::Annealing { "T" } else { "p" };
            let rows =
                summary.maxima.iter().map(|m| vec![m.p_or_t, m.n as f64, m.mean, m.stderr]).collect();
            emit(&mut written, format!("{figure}.csv"), &[key, "N", "max_S_mean", "max_S_stderr"], rows)?;
            let fits = summary
                .fits
                .iter()
                .filter(|f| f.name == "max_linear")
                .filter_map(|f| {
                    Some(vec![f.p_or_t?, f.fit.intercept, f.fit.slope, f.fit.residual_norm, f.fit.n_points as f64])
                })
                .collect();
            emit(&mut written, format!("{figure}_fits.csv"), &[key, "a", "b", "residual_norm", "n_points"], fits)?;
        }
        ("5", "g") => {
            let keys: BTreeSet<u64> = summary.maxima.iter().map(|m| m.p_or_t.to_bits()).collect();
            let mut rows = Vec::new();
            for k in keys {
                let (xs, ys): (Vec<f64>, Vec<f64>) = summary
                    .maxima
                    .iter()
                    .filter(|m| m.p_or_t.to_bits() == k)
                    .map(|m| (m.n as f64, m.mean))
                    .unzip();
                if let Ok(f) = linear_fit(&xs, &ys) {
                    rows.push(vec![f64::from_bits(k), f.slope]);
                }
            }
            let (ts, bs): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r[0], r[1])).unzip();
            let fit = power_fit(&ts, &bs).map_err(|e| CliError::Validation(format!("{figure}: {e}")))?;
            emit(&mut written, format!("{figure}.csv"), &["T", "b_of_T"], rows)?;
            let meta = dir.join(format!("{figure}_meta.json"));
            write_json(
                &meta,
                &serde_json::json!({
                    "powerfit_alpha": -fit.exponent(),
                    "powerfit_amplitude": fit.amplitude(),
                    "residual_norm": fit.residual_norm,
                    "n_points": fit.n_points,
                }),
            )?;
            written.push(meta);
        }
        _ => unreachable!("figure ids are checked above"),
    }
    Ok(written)
}
