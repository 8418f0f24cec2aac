//! Independent brute-force oracles shared by the integration tests.
//!
//! Nothing here calls into the library's numeric kernels; each value is
//! recomputed from its definition with plain loops.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use spipca::dataset::ImageDictionary;
use spipca::eigen::EigenBasis;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut impl Rng, pixels: usize) -> Vec<f64> {
    (0..pixels).map(|_| rng.gen::<f64>()).collect()
}

pub fn random_dictionary(
    rng: &mut impl Rng,
    m: usize,
    width: usize,
    height: usize,
) -> ImageDictionary {
    let pixels = random_image(rng, m * width * height);
    ImageDictionary::new(pixels, width, height, None).unwrap()
}

/// Column means of an M×N row-major matrix.
pub fn column_mean(rows: &[f64], m: usize, n: usize) -> Vec<f64> {
    let mut mean = vec![0.0; n];
    for i in 0..m {
        for j in 0..n {
            mean[j] += rows[i * n + j];
        }
    }
    mean.iter().map(|s| s / m as f64).collect()
}

/// AᵀA for the centred dictionary, one entry at a time.
pub fn covariance_oracle(dict: &ImageDictionary) -> Vec<Vec<f64>> {
    let (m, n) = (dict.len(), dict.pixels());
    let mean = column_mean(dict.as_slice(), m, n);
    let mut c = vec![vec![0.0; n]; n];
    for img in dict.iter() {
        for a in 0..n {
            let da = img[a] - mean[a];
            for b in 0..n {
                c[a][b] += da * (img[b] - mean[b]);
            }
        }
    }
    c
}

/// Closed-form eigenvalues of [[a, b], [b, d]], larger first.
pub fn sym2_eigenvalues(a: f64, b: f64, d: f64) -> (f64, f64) {
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    (mid + rad, mid - rad)
}

/// wₖ = Σᵢ Q[k][i]·I[i] for k < K.
pub fn project(basis: &EigenBasis, image: &[f64], k: usize) -> Vec<f64> {
    (0..k)
        .map(|row| {
            let q = basis.vectors.row(row);
            let mut s = 0.0;
            for i in 0..image.len() {
                s += q[i] * image[i];
            }
            s
        })
        .collect()
}

/// Σₖ wₖ·qₖ without truncation.
pub fn synthesize(basis: &EigenBasis, w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; basis.pixels()];
    for (k, wk) in w.iter().enumerate() {
        let q = basis.vectors.row(k);
        for i in 0..out.len() {
            out[i] += wk * q[i];
        }
    }
    out
}

/// F(u, v) = Σ_{y,x} I(y, x)·exp(−2πi(u·y/Y + v·x/X)).
pub fn dft(image: &[f64], width: usize, height: usize, u: usize, v: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for y in 0..height {
        for x in 0..width {
            let angle = -TAU * ((u * y) as f64 / height as f64 + (v * x) as f64 / width as f64);
            acc += image[y * width + x] * Complex64::new(angle.cos(), angle.sin());
        }
    }
    acc
}

/// Real part of the inverse DFT of a spectrum that holds `known` and their
/// Hermitian mirrors and is zero elsewhere.
pub fn zero_filled_inverse(
    known: &[((usize, usize), Complex64)],
    width: usize,
    height: usize,
) -> Vec<f64> {
    let mut spectrum = vec![vec![Complex64::new(0.0, 0.0); width]; height];
    for &((u, v), value) in known {
        spectrum[u][v] = value;
        spectrum[(height - u) % height][(width - v) % width] = value.conj();
    }
    let n = (width * height) as f64;
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let mut acc = Complex64::new(0.0, 0.0);
            for u in 0..height {
                for v in 0..width {
                    let angle =
                        TAU * ((u * y) as f64 / height as f64 + (v * x) as f64 / width as f64);
                    acc += spectrum[u][v] * Complex64::new(angle.cos(), angle.sin());
                }
            }
            out[y * width + x] = acc.re / n;
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn squared_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Worst violations of the eigenpair contract against the covariance `c`.
#[derive(Debug)]
pub struct EigenReport {
    pub max_residual: f64,
    pub max_orthonormality: f64,
    pub ordered: bool,
    pub min_eigenvalue: f64,
    pub trace_rel_error: f64,
    pub lambda_max: f64,
}

pub fn eigen_report(c: &[Vec<f64>], basis: &EigenBasis) -> EigenReport {
    let n = c.len();
    let k = basis.len();
    let mut max_residual: f64 = 0.0;
    for row in 0..k {
        let q = basis.vectors.row(row);
        let lambda = basis.eigenvalues[row];
        let mut r2 = 0.0;
        for a in 0..n {
            let mut cq = 0.0;
            for b in 0..n {
                cq += c[a][b] * q[b];
            }
            r2 += (cq - lambda * q[a]).powi(2);
        }
        max_residual = max_residual.max(r2.sqrt());
    }
    let mut max_orthonormality: f64 = 0.0;
    for i in 0..k {
        for j in i..k {
            let (qi, qj) = (basis.vectors.row(i), basis.vectors.row(j));
            let mut d = 0.0;
            for p in 0..n {
                d += qi[p] * qj[p];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            max_orthonormality = max_orthonormality.max((d - target).abs());
        }
    }
    let trace: f64 = (0..n).map(|i| c[i][i]).sum();
    let sum: f64 = basis.eigenvalues.iter().sum();
    EigenReport {
        max_residual,
        max_orthonormality,
        ordered: basis.eigenvalues.windows(2).all(|w| w[0] >= w[1]),
        min_eigenvalue: basis
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min),
        trace_rel_error: (sum - trace).abs() / trace.abs().max(f64::MIN_POSITIVE),
        lambda_max: basis.eigenvalues.first().copied().unwrap_or(0.0),
    }
}
