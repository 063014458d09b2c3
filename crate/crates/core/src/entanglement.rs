//! Bipartite entanglement: Schmidt spectra, entropies, symmetry-resolved
//! blocks, adjacent gap ratios and the random-matrix reference curves.

use std::f64::consts::{FRAC_PI_2, LN_2};
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::seed::rng_from_seed;
use crate::simulator::StateVector;
use crate::{Error, Result};

/// Default floor below which Schmidt weights are ignored by gap statistics.
pub const DEFAULT_LEVEL_FLOOR: f64 = 1e-14;

/// Mean gap ratio of i.i.d. (Poisson) levels, `2 ln 2 - 1`.
pub const R_POISSON: f64 = 2.0 * LN_2 - 1.0;
/// Mean gap ratio of two independent GUE blocks mixed together.
pub const R_GUE_Z2: f64 = 0.422085;
/// Mean gap ratio of a single GUE block.
pub const R_GUE: f64 = 0.60266;

/// Maximum tolerated `|amps[b] - amps[!b]|` for the block decomposition.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;
const FAST_PATH_ASYMMETRY: f64 = 1e-13;

/// An equal split of the register; `side_a` is sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    n_qubits: usize,
    side_a: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BipartitionPolicy {
    Contiguous,
    Random,
}

impl Bipartition {
    pub fn new(n_qubits: usize, mut side_a: Vec<usize>) -> Result<Self> {
        check_even(n_qubits)?;
        side_a.sort_unstable();
        side_a.dedup();
        if side_a.len() != n_qubits / 2 || side_a.iter().any(|&q| q >= n_qubits) {
            return Err(Error::Parameter(format!(
                "side A must hold {} distinct qubits below {n_qubits}",
                n_qubits / 2
            )));
        }
        Ok(Bipartition { n_qubits, side_a })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|q| self.side_a.binary_search(q).is_err()).collect()
    }

    pub fn complement(&self) -> Self {
        Bipartition { n_qubits: self.n_qubits, side_a: self.side_b() }
    }
}

fn check_even(n: usize) -> Result<()> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::Parameter(format!("bipartition needs an even qubit count, got {n}")));
    }
    Ok(())
}

/// Uniformly random half of the register.
pub fn random_bipartition(n: usize, seed: u64) -> Result<Bipartition> {
    check_even(n)?;
    let mut rng = rng_from_seed(seed);
    Bipartition::new(n, sample(&mut rng, n, n / 2).into_vec())
}

/// The left half `{0, .., N/2 - 1}`.
pub fn contiguous_bipartition(n: usize) -> Result<Bipartition> {
    check_even(n)?;
    Bipartition::new(n, (0..n / 2).collect())
}

pub fn bipartition_for(policy: BipartitionPolicy, n: usize, seed: u64) -> Result<Bipartition> {
    match policy {
        BipartitionPolicy::Contiguous => contiguous_bipartition(n),
        BipartitionPolicy::Random => random_bipartition(n, seed),
    }
}

/// Schmidt weights `lambda_k^2`, descending, negatives clamped to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementSpectrum {
    values: Vec<f64>,
}

impl EntanglementSpectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        for v in &mut values {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        EntanglementSpectrum { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(x_k, D lambda_k^2)` with `x_k = k / D` and `D` the spectrum length.
    pub fn rescaled(&self) -> Vec<(f64, f64)> {
        let d = self.values.len() as f64;
        self.values.iter().enumerate().map(|(k, &v)| (k as f64 / d, d * v)).collect()
    }

    /// CSV with columns `k,lambda2,x,scaled_lambda2`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["k", "lambda2", "x", "scaled_lambda2"])?;
        for (k, (&v, (x, y))) in self.values.iter().zip(self.rescaled()).enumerate() {
            out.write_record([k.to_string(), v.to_string(), x.to_string(), y.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Maps every basis index to its `(row, column)` in the amplitude matrix,
/// with side-A qubits on the row index (in the order of `side_a`).
fn split_indices(part: &Bipartition) -> Vec<(usize, usize)> {
    let n = part.n_qubits;
    let mut dest = vec![(false, 0usize); n];
    for (k, &q) in part.side_a.iter().enumerate() {
        dest[q] = (true, k);
    }
    for (k, q) in part.side_b().into_iter().enumerate() {
        dest[q] = (false, k);
    }
    // two half-width lookup tables keep this O(2^N)
    let lo_bits = n / 2;
    let table = |offset: usize, width: usize| -> Vec<(usize, usize)> {
        (0..1usize << width)
            .map(|v| {
                (0..width).fold((0, 0), |(r, c), bit| {
                    if v >> bit & 1 == 0 {
                        return (r, c);
                    }
                    match dest[offset + bit] {
                        (true, k) => (r | 1 << k, c),
                        (false, k) => (r, c | 1 << k),
                    }
                })
            })
            .collect()
    };
    let lo = table(0, lo_bits);
    let hi = table(lo_bits, n - lo_bits);
    let lo_mask = (1 << lo_bits) - 1;
    (0..1usize << n)
        .map(|b| {
            let (r1, c1) = lo[b & lo_mask];
            let (r2, c2) = hi[b >> lo_bits];
            (r1 | r2, c1 | c2)
        })
        .collect()
}

fn check_part(state: &StateVector, part: &Bipartition) -> Result<()> {
    if state.n_qubits() != part.n_qubits {
        return Err(Error::Shape { expected: part.n_qubits, actual: state.n_qubits() });
    }
    Ok(())
}

/// `M[s_A, s_B] = c_s`.
pub fn amplitude_matrix(state: &StateVector, part: &Bipartition) -> Result<DMatrix<Complex64>> {
    check_part(state, part)?;
    let d = 1 << (part.n_qubits / 2);
    let mut m = DMatrix::zeros(d, d);
    for (&a, (r, c)) in state.amplitudes().iter().zip(split_indices(part)) {
        m[(r, c)] = a;
    }
    Ok(m)
}

fn squared_singular_values(m: DMatrix<Complex64>) -> Vec<f64> {
    m.singular_values().iter().map(|s| s * s).collect()
}

/// Squared singular values of the amplitude matrix.
///
/// Spin-flip symmetric states (all QAOA and annealing states) take the
/// block path of [`spectrum_blocks`], two half-size SVDs instead of one.
pub fn schmidt_spectrum(state: &StateVector, part: &Bipartition) -> Result<EntanglementSpectrum> {
    if state.n_qubits() >= 2 && state.z2_asymmetry() <= FAST_PATH_ASYMMETRY {
        return Ok(spectrum_blocks(state, part)?.union());
    }
    Ok(EntanglementSpectrum::new(squared_singular_values(amplitude_matrix(state, part)?)))
}

/// `-sum lambda^2 ln lambda^2`, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(spec: &EntanglementSpectrum) -> f64 {
    let s = -spec.values.iter().filter(|&&v| v > 0.0).map(|&v| v * v.ln()).sum::<f64>();
    if s > 0.0 {
        s
    } else {
        0.0
    }
}

/// `ln(sum (lambda^2)^q) / (1 - q)` for `q > 0`, `q != 1`.
pub fn renyi_entropy(spec: &EntanglementSpectrum, q: f64) -> Result<f64> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Parameter(format!("Renyi index must be positive, got {q}")));
    }
    if q == 1.0 {
        return Err(Error::Parameter("Renyi index 1 is the von Neumann entropy; use von_neumann_entropy".into()));
    }
    let sum: f64 = spec.values.iter().filter(|&&v| v > 0.0).map(|v| v.powf(q)).sum();
    Ok(sum.ln() / (1.0 - q))
}

pub fn entanglement_entropy(state: &StateVector, part: &Bipartition) -> Result<f64> {
    Ok(von_neumann_entropy(&schmidt_spectrum(state, part)?))
}

/// Which quotient of adjacent gaps is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapRatioConvention {
    /// `min/max`, bounded in `[0, 1]`.
    #[default]
    MinOverMax,
    /// `max/min`, unbounded; a zero gap gives infinity.
    MaxOverMin,
}

/// Adjacent gap ratios of the levels above `floor`, using `min/max`.
pub fn gap_ratios(spec: &EntanglementSpectrum, floor: f64) -> Result<Vec<f64>> {
    gap_ratios_with(spec.values(), floor, GapRatioConvention::MinOverMax)
}

/// Gap ratios of an arbitrary level set (any order).
pub fn gap_ratios_with(levels: &[f64], floor: f64, convention: GapRatioConvention) -> Result<Vec<f64>> {
    let mut kept: Vec<f64> = levels.iter().copied().filter(|&v| v > floor).collect();
    if kept.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} levels above floor {floor:e}; need at least 3",
            kept.len()
        )));
    }
    kept.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = kept.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(gaps
        .windows(2)
        .map(|g| {
            let (lo, hi) = (g[0].min(g[1]), g[0].max(g[1]));
            match convention {
                GapRatioConvention::MinOverMax if hi == 0.0 => 0.0,
                GapRatioConvention::MinOverMax => lo / hi,
                GapRatioConvention::MaxOverMin if lo == 0.0 => f64::INFINITY,
                GapRatioConvention::MaxOverMin => hi / lo,
            }
        })
        .collect())
}

pub fn mean_gap_ratio(ratios: &[f64]) -> Result<f64> {
    if ratios.is_empty() {
        return Err(Error::InsufficientData("no gap ratios".into()));
    }
    Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
}

/// Density-normalized histogram of ratios on `[0, 1]`.
pub fn gap_ratio_histogram(ratios: &[f64], bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; bins];
    let mut total = 0usize;
    for &r in ratios {
        if (0.0..=1.0).contains(&r) {
            let k = ((r * bins as f64) as usize).min(bins - 1);
            counts[k] += 1.0;
            total += 1;
        }
    }
    if total > 0 {
        let scale = bins as f64 / total as f64;
        counts.iter_mut().for_each(|c| *c *= scale);
    }
    counts
}

/// `P(r) = 2 / (1 + r)^2` on `[0, 1]`.
pub fn poisson_pdf(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain { value: r, domain: "[0, 1]" });
    }
    Ok(2.0 / ((1.0 + r) * (1.0 + r)))
}

/// Solves `(pi/2) x = phi - sin(2 phi)/2` for `phi` in `[0, pi/2]`.
fn marchenko_pastur_angle(x: f64) -> f64 {
    let target = FRAC_PI_2 * x;
    let f = |phi: f64| phi - 0.5 * (2.0 * phi).sin() - target;
    let (mut lo, mut hi) = (0.0f64, FRAC_PI_2);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = f(mid);
        if r.abs() < 1e-12 || (hi - lo).abs() < f64::EPSILON {
            return mid;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Rescaled Marchenko-Pastur weight `D lambda^2(x) = 4 cos^2 phi(x)`.
pub fn marchenko_pastur_scaled(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain { value: x, domain: "[0, 1]" });
    }
    if x == 0.0 {
        return Ok(4.0);
    }
    if x == 1.0 {
        return Ok(0.0);
    }
    let c = marchenko_pastur_angle(x).cos();
    Ok(4.0 * c * c)
}

/// `lambda^2(x)` for an `n`-qubit register split in halves.
pub fn marchenko_pastur_lambda2(x: f64, n: usize) -> Result<f64> {
    Ok(marchenko_pastur_scaled(x)? / (n as f64 / 2.0).exp2())
}

/// Eigenvalues of the reduced density matrix split by subsystem X-parity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBlocks {
    pub even: Vec<f64>,
    pub odd: Vec<f64>,
}

impl SpectrumBlocks {
    /// Sorted (descending) union of both blocks.
    pub fn union(&self) -> EntanglementSpectrum {
        EntanglementSpectrum::new(self.even.iter().chain(&self.odd).copied().collect())
    }
}

/// In-place Walsh-Hadamard transform along both axes of a `d x d`
/// column-major matrix, scaled by `1/d` so that it is orthogonal.
fn hadamard_both_sides(m: &mut DMatrix<Complex64>) {
    let d = m.nrows();
    let data = m.as_mut_slice();
    let mut h = 1;
    while h < d {
        for col in data.chunks_exact_mut(d) {
            for block in col.chunks_exact_mut(2 * h) {
                let (lo, hi) = block.split_at_mut(h);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    (*a, *b) = (*a + *b, *a - *b);
                }
            }
        }
        for block in data.chunks_exact_mut(2 * h * d) {
            let (lo, hi) = block.split_at_mut(h * d);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                (*a, *b) = (*a + *b, *a - *b);
            }
        }
        h *= 2;
    }
    let scale = 1.0 / d as f64;
    data.iter_mut().for_each(|v| *v *= scale);
}

/// Spectrum of the reduced density matrix of side A, split into the even
/// and odd sectors of the subsystem parity `prod_{j in A} X_j`.
///
/// Requires the state to be invariant under global qubit inversion, which
/// makes that parity a symmetry of the reduced density matrix.
pub fn spectrum_blocks(state: &StateVector, part: &Bipartition) -> Result<SpectrumBlocks> {
    let asym = state.z2_asymmetry();
    if asym > SYMMETRY_TOLERANCE {
        return Err(Error::Symmetry(asym));
    }
    // With c(s) = c(~s), the amplitude matrix is block diagonal in the
    // Walsh-Hadamard basis of both halves: parity(row) = parity(column).
    let mut m = amplitude_matrix(state, part)?;
    hadamard_both_sides(&mut m);
    let d = m.nrows();
    let (even, odd): (Vec<usize>, Vec<usize>) = (0..d).partition(|k| k.count_ones() % 2 == 0);
    let block = |idx: &[usize]| -> Vec<f64> {
        let mut ev = squared_singular_values(DMatrix::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]));
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    };
    Ok(SpectrumBlocks { even: block(&even), odd: block(&odd) })
}
