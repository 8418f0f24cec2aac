//! Principal components of an image dictionary.
//!
//! The dictionary D (M×N) is mean-centred column-wise into A, and the
//! eigenvectors of AᵀA, sorted by descending eigenvalue, become the rows of
//! the basis Q. Two routes are provided: the direct N×N covariance, and the
//! M×M Gram matrix AAᵀ whose eigenvectors are mapped back through Aᵀ. They
//! agree on the nonzero part of the spectrum; the Gram route is cheaper when
//! M < N.

mod io;
mod jacobi;
mod tridiag;

use rayon::prelude::*;

use crate::dataset::ImageDictionary;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};

/// Relative asymmetry tolerated by [`eigendecompose`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Entries within this relative distance of a row's largest magnitude count as ties
/// when choosing the sign-defining entry.
const SIGN_TIE_TOL: f64 = 1e-12;

/// Eigenvalues at or below this fraction of the largest are treated as zero by the Gram route.
const DUAL_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Cyclic Jacobi rotations. Slow at N = 784 (~15x the QL route) but very robust.
    Jacobi,
    /// Householder reduction to tridiagonal form plus implicit QL.
    #[default]
    TridiagonalQl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Eigendecomposition of the N×N covariance AᵀA.
    #[default]
    Covariance,
    /// Eigendecomposition of the M×M Gram matrix AAᵀ.
    Gram,
    /// Gram when M < N, covariance otherwise.
    Auto,
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "jacobi" => Ok(Solver::Jacobi),
            "ql" | "tridiagonal-ql" => Ok(Solver::TridiagonalQl),
            other => Err(Error::Config(format!("unknown solver {other:?}"))),
        }
    }
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "covariance" => Ok(Route::Covariance),
            "gram" => Ok(Route::Gram),
            "auto" => Ok(Route::Auto),
            other => Err(Error::Config(format!("unknown route {other:?}"))),
        }
    }
}

/// Mean-centred dictionary A together with the column means μ.
#[derive(Debug, Clone)]
pub struct CenteredDictionary {
    pub centered: Matrix,
    pub mean: Vec<f64>,
    pub width: usize,
    pub height: usize,
}

pub fn center(dict: &ImageDictionary) -> CenteredDictionary {
    let m = dict.len();
    let n = dict.pixels();
    let mut mean = vec![0.0; n];
    for img in dict.iter() {
        for (acc, &x) in mean.iter_mut().zip(img) {
            *acc += x;
        }
    }
    for v in mean.iter_mut() {
        *v /= m as f64;
    }
    let mut centered = Matrix::from_vec(m, n, dict.as_slice().to_vec());
    for i in 0..m {
        for (x, mu) in centered.row_mut(i).iter_mut().zip(&mean) {
            *x -= mu;
        }
    }
    CenteredDictionary {
        centered,
        mean,
        width: dict.width(),
        height: dict.height(),
    }
}

/// AᵀA, upper triangle computed and mirrored.
pub fn covariance(a: &CenteredDictionary) -> Matrix {
    gram_of_rows(&a.centered.transpose())
}

/// AAᵀ, the M×M Gram matrix of the centred images.
pub fn gram(a: &CenteredDictionary) -> Matrix {
    gram_of_rows(&a.centered)
}

/// G[i][j] = ⟨row i, row j⟩.
fn gram_of_rows(rows: &Matrix) -> Matrix {
    let n = rows.rows();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let ri = rows.row(i);
            (i..n).map(|j| dot(ri, rows.row(j))).collect()
        })
        .collect();
    let mut g = Matrix::zeros(n, n);
    for (i, vals) in upper.into_iter().enumerate() {
        for (off, v) in vals.into_iter().enumerate() {
            g[(i, i + off)] = v;
            g[(i + off, i)] = v;
        }
    }
    g
}

/// Eigenpairs sorted by descending eigenvalue; rows of `vectors` are unit eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl Spectrum {
    fn sorted(values: Vec<f64>, vectors: Matrix) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        // Stable: equal eigenvalues keep solver order.
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
        let n = vectors.cols();
        let mut sorted = Matrix::zeros(order.len(), n);
        for (dst, &src) in order.iter().enumerate() {
            sorted.row_mut(dst).copy_from_slice(vectors.row(src));
            canonicalize_sign(sorted.row_mut(dst));
        }
        Spectrum {
            values: order.iter().map(|&i| values[i]).collect(),
            vectors: sorted,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Flips `v` so that its largest-magnitude entry (lowest index among ties) is non-negative.
pub fn canonicalize_sign(v: &mut [f64]) {
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return;
    }
    let lead = v
        .iter()
        .position(|x| x.abs() >= peak * (1.0 - SIGN_TIE_TOL))
        .expect("peak exists");
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Full eigendecomposition of a symmetric matrix.
pub fn eigendecompose(c: &Matrix, solver: Solver) -> Result<Spectrum> {
    if c.rows() != c.cols() {
        return Err(Error::DimensionMismatch {
            expected: c.rows(),
            actual: c.cols(),
        });
    }
    let asym = c.max_asymmetry();
    if asym > SYMMETRY_TOL * c.max_abs().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let (values, vectors) = match solver {
        Solver::Jacobi => jacobi::jacobi(c)?,
        Solver::TridiagonalQl => tridiag::tridiagonal_ql(c)?,
    };
    Ok(Spectrum::sorted(values, vectors))
}

/// Nonzero eigenpairs of AᵀA obtained through the Gram matrix AAᵀ.
///
/// Each Gram eigenvector v with eigenvalue λ > 0 maps to the covariance
/// eigenvector Aᵀv/‖Aᵀv‖ with the same eigenvalue; the mapped vectors are
/// re-orthonormalized to remove the error amplified by small λ.
pub fn eigendecompose_dual(a: &CenteredDictionary, solver: Solver) -> Result<Spectrum> {
    let g = gram(a);
    let gram_spectrum = eigendecompose(&g, solver)?;
    let top = gram_spectrum.values.first().copied().unwrap_or(0.0);
    let n = a.centered.cols();
    let at = a.centered.transpose();

    let mut values = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, &lambda) in gram_spectrum.values.iter().enumerate().take(n) {
        if lambda.is_nan() || lambda <= DUAL_RANK_TOL * top {
            break;
        }
        let v = gram_spectrum.vectors.row(k);
        let mut q = at.mul_vec(v);
        for prev in &rows {
            let proj = dot(prev, &q);
            q.iter_mut().zip(prev).for_each(|(x, p)| *x -= proj * p);
        }
        for prev in &rows {
            let proj = dot(prev, &q);
            q.iter_mut().zip(prev).for_each(|(x, p)| *x -= proj * p);
        }
        let len = norm(&q);
        if len == 0.0 {
            break;
        }
        q.iter_mut().for_each(|x| *x /= len);
        canonicalize_sign(&mut q);
        values.push(lambda);
        rows.push(q);
    }
    let vectors = if rows.is_empty() {
        Matrix::zeros(0, n)
    } else {
        Matrix::from_rows(&rows)
    };
    Ok(Spectrum { values, vectors })
}

/// The ordered pattern basis Q with its eigenvalues and the dictionary mean.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBasis {
    /// K_avail × N, one eigenvector per row.
    pub vectors: Matrix,
    /// Non-increasing.
    pub eigenvalues: Vec<f64>,
    pub mean: Vec<f64>,
    pub width: usize,
    pub height: usize,
}

impl EigenBasis {
    /// Keeps at most `retain` leading components of `spectrum`.
    pub fn from_spectrum(
        spectrum: Spectrum,
        centered: &CenteredDictionary,
        retain: usize,
    ) -> Result<Self> {
        let n = centered.width * centered.height;
        if spectrum.vectors.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: spectrum.vectors.cols(),
            });
        }
        let Spectrum {
            mut values,
            mut vectors,
        } = spectrum;
        let keep = retain.min(values.len());
        values.truncate(keep);
        vectors.truncate_rows(keep);
        Ok(Self {
            vectors,
            eigenvalues: values,
            mean: centered.mean.clone(),
            width: centered.width,
            height: centered.height,
        })
    }

    /// Number of retained components, K_avail.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn pattern(&self, k: usize) -> &[f64] {
        self.vectors.row(k)
    }

    /// W = Q_K·I for the first `k` components.
    pub fn project(&self, image: &[f64], k: usize) -> Vec<f64> {
        (0..k).map(|i| dot(self.pattern(i), image)).collect()
    }

    /// 64-bit FNV-style hash over dimensions, eigenvalues and basis entries;
    /// identifies pattern sets and measurements derived from this basis.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let words = [self.width as u64, self.height as u64]
            .into_iter()
            .chain(self.eigenvalues.iter().map(|v| v.to_bits()))
            .chain(self.vectors.as_slice().iter().map(|v| v.to_bits()));
        for w in words {
            h = (h ^ w).wrapping_mul(0x0000_0100_0000_01b3);
            h ^= h >> 29;
        }
        h
    }
}

/// Centres the dictionary, decomposes it along `route` and keeps min(M, N) components.
pub fn design_basis(dict: &ImageDictionary, route: Route, solver: Solver) -> Result<EigenBasis> {
    let centered = center(dict);
    let (m, n) = (dict.len(), dict.pixels());
    let use_gram = match route {
        Route::Covariance => false,
        Route::Gram => true,
        Route::Auto => m < n,
    };
    let spectrum = if use_gram {
        eigendecompose_dual(&centered, solver)?
    } else {
        eigendecompose(&covariance(&centered), solver)?
    };
    EigenBasis::from_spectrum(spectrum, &centered, m.min(n))
}
