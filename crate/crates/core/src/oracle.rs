//! Dense-matrix reference implementations.
//!
//! Everything here is built from explicit Kronecker products and full
//! matrix functions, sharing no code with the butterfly kernels in
//! [`crate::simulator`]. Only usable for a handful of qubits; the self-test
//! and the test suites compare the fast paths against it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::graph::Graph;
use crate::simulator::QaoaAngles;

type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn hadamard() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMat::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
}

/// `exp(-i beta X / 2)`.
pub fn rx(beta: f64) -> CMat {
    let (s, co) = (beta / 2.0).sin_cos();
    CMat::from_row_slice(2, 2, &[c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
}

/// `ops[n-1] ⊗ ... ⊗ ops[0]`, so that `ops[q]` acts on bit `q`.
pub fn kron_register(ops: &[CMat]) -> CMat {
    ops.iter()
        .rev()
        .fold(CMat::from_element(1, 1, c(1.0, 0.0)), |acc, op| acc.kronecker(op))
}

/// `op` on qubit `q`, identity elsewhere.
pub fn single_site(n: usize, q: usize, op: &CMat) -> CMat {
    let ops: Vec<CMat> = (0..n).map(|k| if k == q { op.clone() } else { CMat::identity(2, 2) }).collect();
    kron_register(&ops)
}

/// `sum w_ij Z_i Z_j` as a dense matrix.
pub fn cost_matrix(g: &Graph) -> CMat {
    let n = g.n_vertices();
    let dim = 1 << n;
    let z = pauli_z();
    g.edges().iter().fold(CMat::zeros(dim, dim), |acc, e| {
        acc + single_site(n, e.i, &z) * single_site(n, e.j, &z) * c(e.w, 0.0)
    })
}

/// `exp(-i t H)` for Hermitian `H` via its eigendecomposition.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let eig = h.clone().symmetric_eigen();
    let phases = CMat::from_diagonal(&DVector::from_iterator(
        h.nrows(),
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -t * l)),
    ));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

pub fn mixer_unitary(n: usize, beta: f64) -> CMat {
    kron_register(&vec![rx(beta); n])
}

pub fn phase_unitary(cost: &CMat, gamma: f64) -> CMat {
    expm_hermitian(cost, gamma / 2.0)
}

/// `H^{⊗n}|0...0>`.
pub fn plus_state(n: usize) -> DVector<Complex64> {
    let mut zero = DVector::zeros(1 << n);
    zero[0] = c(1.0, 0.0);
    kron_register(&vec![hadamard(); n]) * zero
}

pub fn qaoa_state(g: &Graph, angles: &QaoaAngles) -> DVector<Complex64> {
    let n = g.n_vertices();
    let cost = cost_matrix(g);
    angles
        .betas()
        .iter()
        .zip(angles.gammas())
        .fold(plus_state(n), |psi, (&b, &gm)| mixer_unitary(n, b) * (phase_unitary(&cost, gm) * psi))
}

pub fn expectation(psi: &DVector<Complex64>, op: &CMat) -> f64 {
    psi.dotc(&(op * psi)).re
}

/// `rho_A = tr_B |psi><psi|`, with the bits of `side_a` (in order) forming
/// the row index.
pub fn reduced_density_matrix(psi: &[Complex64], n: usize, side_a: &[usize]) -> CMat {
    let side_b: Vec<usize> = (0..n).filter(|q| !side_a.contains(q)).collect();
    let compose = |a: usize, b: usize| -> usize {
        let mut idx = 0;
        for (k, &q) in side_a.iter().enumerate() {
            idx |= ((a >> k) & 1) << q;
        }
        for (k, &q) in side_b.iter().enumerate() {
            idx |= ((b >> k) & 1) << q;
        }
        idx
    };
    let da = 1 << side_a.len();
    let db = 1 << side_b.len();
    CMat::from_fn(da, da, |a1, a2| {
        (0..db).map(|b| psi[compose(a1, b)] * psi[compose(a2, b)].conj()).sum()
    })
}

/// Eigenvalues of the reduced density matrix, descending.
pub fn entanglement_spectrum(psi: &[Complex64], n: usize, side_a: &[usize]) -> Vec<f64> {
    let mut ev: Vec<f64> = reduced_density_matrix(psi, n, side_a).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}
