//! Ensemble statistics, least-squares fits and sweep summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentRecord, Mode, SpectrumDigest, SweepOutput};
use crate::entanglement::{gap_ratio_histogram, marchenko_pastur_scaled};
use crate::{Error, Result};

/// Bins of the `P(r)` histograms on `[0, 1]`.
pub const HISTOGRAM_BINS: usize = 50;
/// Consecutive measured layers inspected for saturation.
pub const SATURATION_WINDOW: usize = 10;
/// Largest relative spread within the window for the entropy to count as saturated.
pub const SATURATION_DRIFT: f64 = 0.01;

const FLOOR_SENSITIVITY: [f64; 4] = [1e-16, 1e-14, 1e-12, 1e-10];

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean (0 for fewer than two samples).
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

impl FromIterator<f64> for RunningStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = RunningStats::default();
        iter.into_iter().for_each(|x| s.push(x));
        s
    }
}

pub fn mean_stderr_streaming(values: &[f64]) -> (f64, f64) {
    let s: RunningStats = values.iter().copied().collect();
    (s.mean(), s.stderr())
}

pub fn mean_stderr_two_pass(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    /// `y = intercept + slope x`
    Linear,
    /// `y = exp(intercept) x^slope`, fitted in log-log space.
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: FitKind,
    pub intercept: f64,
    pub slope: f64,
    /// Euclidean norm of the residuals (in log space for power fits).
    pub residual_norm: f64,
    pub n_points: usize,
}

impl FitResult {
    pub fn exponent(&self) -> f64 {
        self.slope
    }

    pub fn amplitude(&self) -> f64 {
        match self.kind {
            FitKind::Linear => self.intercept,
            FitKind::Power => self.intercept.exp(),
        }
    }

    pub fn predict(&self, x: f64) -> f64 {
        match self.kind {
            FitKind::Linear => self.intercept + self.slope * x,
            FitKind::Power => self.intercept.exp() * x.powf(self.slope),
        }
    }
}

/// Ordinary least squares line through `(xs, ys)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::Parameter(format!("{} xs but {} ys", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData(format!("linear fit needs 2 points, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > f64::EPSILON * xs.iter().map(|x| x * x).sum::<f64>()) {
        return Err(Error::Rank("abscissae are not distinct".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_norm = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(FitResult { kind: FitKind::Linear, intercept, slope, residual_norm, n_points: xs.len() })
}

/// Least-squares line in log-log space; `exponent()` is the power.
pub fn power_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() < 3 {
        return Err(Error::InsufficientData(format!("power fit needs 3 points, got {}", xs.len())));
    }
    if let Some(&v) = xs.iter().chain(ys).find(|&&v| !(v > 0.0)) {
        return Err(Error::Domain { value: v, domain: "(0, inf)" });
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    Ok(FitResult { kind: FitKind::Power, ..linear_fit(&lx, &ly)? })
}

pub fn max_over_layers(entropies: &[f64]) -> Result<f64> {
    entropies
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or_else(|| Error::InsufficientData("empty trajectory".into()))
}

/// First layer of the first run of [`SATURATION_WINDOW`] consecutive
/// points whose spread is below [`SATURATION_DRIFT`] of their mean.
pub fn detect_saturation(curve: &[(f64, f64)]) -> Option<f64> {
    curve.windows(SATURATION_WINDOW).find_map(|w| {
        let (lo, hi, sum) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), &(_, y)| {
            (lo.min(y), hi.max(y), s + y)
        });
        let mean = sum / w.len() as f64;
        (mean > 0.0 && (hi - lo) / mean < SATURATION_DRIFT).then_some(w[0].0)
    })
}

/// Ensemble mean of the entropy at one `(N, p_or_T, layer)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub n: usize,
    pub p_or_t: f64,
    pub layer_or_time: f64,
    pub count: usize,
    pub s_mean: f64,
    pub s_stderr: f64,
    pub cost_mean: Option<f64>,
    pub r_mean: Option<f64>,
}

// keys are non-negative floats, for which the bit pattern orders like the value
type Key = (usize, u64, u64);

pub fn aggregate_series(records: &[ExperimentRecord]) -> Vec<SeriesPoint> {
    let mut groups: BTreeMap<Key, (RunningStats, RunningStats, RunningStats)> = BTreeMap::new();
    for r in records {
        let g = groups.entry((r.n, r.p_or_t.to_bits(), r.layer_or_time.to_bits())).or_default();
        g.0.push(r.entropy);
        if let Some(c) = r.cost {
            g.1.push(c);
        }
        if let Some(v) = r.r_mean {
            g.2.push(v);
        }
    }
    groups
        .into_iter()
        .map(|((n, p, l), (s, c, rm))| SeriesPoint {
            n,
            p_or_t: f64::from_bits(p),
            layer_or_time: f64::from_bits(l),
            count: s.count(),
            s_mean: s.mean(),
            s_stderr: s.stderr(),
            cost_mean: (c.count() > 0).then(|| c.mean()),
            r_mean: (rm.count() > 0).then(|| rm.mean()),
        })
        .collect()
}

/// Ensemble mean of the per-instance maximum of `S` over the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPoint {
    pub n: usize,
    pub p_or_t: f64,
    pub count: usize,
    pub mean: f64,
    pub stderr: f64,
}

pub fn maxima_per_problem(records: &[ExperimentRecord]) -> Vec<MaxPoint> {
    let mut per_problem: BTreeMap<(usize, u64, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        per_problem.entry((r.n, r.p_or_t.to_bits(), r.problem_id)).or_default().push(r.entropy);
    }
    let mut groups: BTreeMap<(usize, u64), RunningStats> = BTreeMap::new();
    for ((n, p, _), traj) in per_problem {
        if let Ok(m) = max_over_layers(&traj) {
            groups.entry((n, p)).or_default().push(m);
        }
    }
    groups
        .into_iter()
        .map(|((n, p), s)| MaxPoint { n, p_or_t: f64::from_bits(p), count: s.count(), mean: s.mean(), stderr: s.stderr() })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub n: usize,
    pub p_or_t: f64,
    pub count: usize,
    pub x: Vec<f64>,
    pub scaled_mean: Vec<f64>,
    pub scaled_stderr: Vec<f64>,
    pub mp_reference: Vec<f64>,
}

fn group_digests(spectra: &[SpectrumDigest]) -> BTreeMap<(usize, u64), Vec<&SpectrumDigest>> {
    let mut groups: BTreeMap<(usize, u64), Vec<&SpectrumDigest>> = BTreeMap::new();
    for d in spectra {
        groups.entry((d.n, d.p_or_t.to_bits())).or_default().push(d);
    }
    groups
}

/// Ensemble-averaged rescaled spectrum `D lambda_k^2` against `x = k / D`.
pub fn spectrum_summaries(spectra: &[SpectrumDigest]) -> Vec<SpectrumSummary> {
    group_digests(spectra)
        .into_iter()
        .map(|((n, p), group)| {
            let dim = group[0].spectrum.len();
            let scale = dim as f64;
            let mut stats = vec![RunningStats::default(); dim];
            for d in &group {
                for (s, v) in stats.iter_mut().zip(&d.spectrum) {
                    s.push(scale * v);
                }
            }
            let x: Vec<f64> = (0..dim).map(|k| k as f64 / scale).collect();
            SpectrumSummary {
                n,
                p_or_t: f64::from_bits(p),
                count: group.len(),
                mp_reference: x.iter().map(|&x| marchenko_pastur_scaled(x).unwrap_or(0.0)).collect(),
                x,
                scaled_mean: stats.iter().map(RunningStats::mean).collect(),
                scaled_stderr: stats.iter().map(RunningStats::stderr).collect(),
            }
        })
        .collect()
}

/// Gap-ratio statistics of one `(N, p_or_T)` group.
///
/// `r_mean` averages the per-instance means; the histograms pool every
/// ratio of the group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub n: usize,
    pub p_or_t: f64,
    pub floor: f64,
    pub count: usize,
    pub r_mean: f64,
    pub r_stderr: f64,
    pub pooled_r_mean: f64,
    pub histogram: Vec<f64>,
    pub block_count: usize,
    pub block_r_mean: Option<f64>,
    pub block_r_stderr: Option<f64>,
    pub block_histogram: Option<Vec<f64>>,
    /// `(floor, r_mean)` at alternative level floors.
    pub floor_sensitivity: Vec<(f64, f64)>,
}

pub fn gap_summaries(spectra: &[SpectrumDigest], floor: f64) -> Vec<GapSummary> {
    let mean_of = |group: &[&SpectrumDigest], f: f64| -> RunningStats {
        group
            .iter()
            .filter_map(|d| d.gap_ratios(f))
            .filter(|r| !r.is_empty())
            .map(|r| r.iter().sum::<f64>() / r.len() as f64)
            .collect()
    };
    group_digests(spectra)
        .into_iter()
        .filter_map(|((n, p), group)| {
            let full = mean_of(&group, floor);
            if full.count() == 0 {
                return None;
            }
            let pooled: Vec<f64> = group.iter().filter_map(|d| d.gap_ratios(floor)).flatten().collect();
            let block_ratios: Vec<Vec<f64>> = group.iter().filter_map(|d| d.block_gap_ratios(floor)).collect();
            let blocks: RunningStats =
                block_ratios.iter().filter(|r| !r.is_empty()).map(|r| r.iter().sum::<f64>() / r.len() as f64).collect();
            let block_pooled: Vec<f64> = block_ratios.iter().flatten().copied().collect();
            let has_blocks = blocks.count() > 0;
            Some(GapSummary {
                n,
                p_or_t: f64::from_bits(p),
                floor,
                count: full.count(),
                r_mean: full.mean(),
                r_stderr: full.stderr(),
                pooled_r_mean: pooled.iter().sum::<f64>() / pooled.len().max(1) as f64,
                histogram: gap_ratio_histogram(&pooled, HISTOGRAM_BINS),
                block_count: blocks.count(),
                block_r_mean: has_blocks.then(|| blocks.mean()),
                block_r_stderr: has_blocks.then(|| blocks.stderr()),
                block_histogram: has_blocks.then(|| gap_ratio_histogram(&block_pooled, HISTOGRAM_BINS)),
                floor_sensitivity: FLOOR_SENSITIVITY
                    .iter()
                    .filter_map(|&f| {
                        let s = mean_of(&group, f);
                        (s.count() > 0).then(|| (f, s.mean()))
                    })
                    .collect(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    /// `page`, `growth`, `max_linear`, `decay` or `kappa`.
    pub name: String,
    pub n: Option<usize>,
    pub p_or_t: Option<f64>,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationPoint {
    pub n: usize,
    pub p_or_t: f64,
    pub layer: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub series: Vec<SeriesPoint>,
    pub maxima: Vec<MaxPoint>,
    pub fits: Vec<NamedFit>,
    pub spectra: Vec<SpectrumSummary>,
    pub gaps: Vec<GapSummary>,
    pub saturation: Vec<SaturationPoint>,
}

impl Summary {
    pub fn fit(&self, name: &str, n: Option<usize>, p_or_t: Option<f64>) -> Option<&FitResult> {
        self.fits
            .iter()
            .find(|f| f.name == name && f.n == n && f.p_or_t == p_or_t)
            .map(|f| &f.fit)
    }

    /// Mean-entropy curve of one `(N, p_or_T)` group as `(layer, S)`.
    pub fn curve(&self, n: usize, p_or_t: f64) -> Vec<(f64, f64)> {
        self.series
            .iter()
            .filter(|s| s.n == n && s.p_or_t == p_or_t)
            .map(|s| (s.layer_or_time, s.s_mean))
            .collect()
    }
}

fn curves(series: &[SeriesPoint]) -> BTreeMap<(usize, u64), Vec<(f64, f64)>> {
    let mut out: BTreeMap<(usize, u64), Vec<(f64, f64)>> = BTreeMap::new();
    for s in series {
        out.entry((s.n, s.p_or_t.to_bits())).or_default().push((s.layer_or_time, s.s_mean));
    }
    out
}

fn window_power_fit(curve: &[(f64, f64)], (lo, hi): (f64, f64)) -> Option<FitResult> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        curve.iter().filter(|&&(x, y)| x >= lo && x <= hi && y > 0.0).copied().unzip();
    power_fit(&xs, &ys).ok()
}

/// Slope of `max S` against `N` for every `p_or_T` with at least two sizes.
fn max_linear_fits(maxima: &[MaxPoint]) -> Vec<NamedFit> {
    let mut by_key: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for m in maxima {
        by_key.entry(m.p_or_t.to_bits()).or_default().push((m.n as f64, m.mean));
    }
    by_key
        .into_iter()
        .filter_map(|(p, pts)| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            linear_fit(&xs, &ys).ok().map(|fit| NamedFit {
                name: "max_linear".into(),
                n: None,
                p_or_t: Some(f64::from_bits(p)),
                fit,
            })
        })
        .collect()
}

pub fn summarize(cfg: &ExperimentConfig, output: &SweepOutput) -> Summary {
    let series = aggregate_series(&output.records);
    let maxima = maxima_per_problem(&output.records);
    let curves = curves(&series);
    let mut fits = Vec::new();
    match cfg.mode {
        Mode::Randomized => {
            let (xs, ys): (Vec<f64>, Vec<f64>) = curves
                .iter()
                .filter_map(|((n, _), c)| c.last().map(|&(_, s)| (*n as f64, s)))
                .unzip();
            if let Ok(fit) = linear_fit(&xs, &ys) {
                fits.push(NamedFit { name: "page".into(), n: None, p_or_t: None, fit });
            }
        }
        Mode::Optimized => fits.extend(max_linear_fits(&maxima)),
        Mode::Annealing => {
            let slopes = max_linear_fits(&maxima);
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                slopes.iter().filter_map(|f| Some((f.p_or_t?, f.fit.slope))).unzip();
            fits.extend(slopes);
            if let Ok(fit) = power_fit(&xs, &ys) {
                fits.push(NamedFit { name: "decay".into(), n: None, p_or_t: None, fit });
            }
        }
    }
    if let Some(window) = cfg.fit_window {
        let name = if cfg.mode == Mode::Annealing { "kappa" } else { "growth" };
        for ((n, p), c) in &curves {
            if let Some(fit) = window_power_fit(c, window) {
                fits.push(NamedFit { name: name.into(), n: Some(*n), p_or_t: Some(f64::from_bits(*p)), fit });
            }
        }
    }
    let saturation = curves
        .iter()
        .map(|((n, p), c)| SaturationPoint { n: *n, p_or_t: f64::from_bits(*p), layer: detect_saturation(c) })
        .collect();
    Summary {
        config: cfg.clone(),
        series,
        maxima,
        fits,
        spectra: spectrum_summaries(&output.spectra),
        gaps: gap_summaries(&output.spectra, cfg.level_floor),
        saturation,
    }
}
