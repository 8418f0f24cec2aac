//! Image recovery from single-pixel measurements, contrast truncation, and PSNR scoring.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dataset::ImageDictionary;
use crate::eigen::EigenBasis;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::patterns::{normalize_patterns, DisplayPatternSet, FourierPlan};
use crate::sim::{
    measure_fourier, measure_pca, projection_budget, Coefficients, MeasurementSequence, Method,
    NoiseConfig,
};

/// Post-processing applied to a raw reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Keep the raw reconstruction.
    None,
    /// Clip to [lo, hi], then map that range onto [0, 1].
    Fixed { lo: f64, hi: f64 },
    /// Like `Fixed`, with bounds taken at the given percentiles of the image.
    Percentile { lower: f64, upper: f64 },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Fixed { lo: 0.0, hi: 1.0 }
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::None => write!(f, "none"),
            Truncation::Fixed { lo, hi } => write!(f, "fixed:{lo}:{hi}"),
            Truncation::Percentile { lower, upper } => write!(f, "percentile:{lower}:{upper}"),
        }
    }
}

impl std::str::FromStr for Truncation {
    type Err = Error;

    /// `none`, `fixed[:lo:hi]` or `percentile[:lower:upper]`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Config(format!("bad truncation setting {s:?}"));
        let pair = |d: (f64, f64)| -> Result<(f64, f64)> {
            match parts.len() {
                1 => Ok(d),
                3 => Ok((
                    parts[1].parse().map_err(|_| bad())?,
                    parts[2].parse().map_err(|_| bad())?,
                )),
                _ => Err(bad()),
            }
        };
        match parts[0] {
            "none" if parts.len() == 1 => Ok(Truncation::None),
            "fixed" => {
                let (lo, hi) = pair((0.0, 1.0))?;
                Ok(Truncation::Fixed { lo, hi })
            }
            "percentile" => {
                let (lower, upper) = pair((1.0, 99.0))?;
                Ok(Truncation::Percentile { lower, upper })
            }
            _ => Err(bad()),
        }
    }
}

/// The bounds that were actually applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Postprocess {
    None,
    Clipped {
        lo: f64,
        hi: f64,
    },
    /// Percentile bounds; `lo`/`hi` are the resolved pixel values.
    Percentile {
        lower: f64,
        upper: f64,
        lo: f64,
        hi: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Reconstruction before truncation.
    pub raw: Vec<f64>,
    pub image: Vec<f64>,
    pub method: Method,
    pub coefficients_used: usize,
    pub projections_used: usize,
    pub postprocess: Postprocess,
}

/// Clip to [lo, hi] and rescale affinely onto [0, 1].
pub fn truncate_contrast(image: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(Error::DegenerateBounds { lo, hi });
    }
    let span = hi - lo;
    Ok(image
        .iter()
        .map(|&x| ((x.clamp(lo, hi) - lo) / span).clamp(0.0, 1.0))
        .collect())
}

/// Percentile of `values` with linear interpolation between order statistics.
pub fn percentile(values: &[f64], pct: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (pct.clamp(0.0, 100.0) / 100.0) * (sorted.len() - 1) as f64;
    let below = rank.floor() as usize;
    let above = rank.ceil() as usize;
    sorted[below] + (sorted[above] - sorted[below]) * (rank - below as f64)
}

/// Applies `truncation`, returning the processed image and the bounds used.
///
/// A percentile window that collapses (flat image) falls back to a [0, 1] clip.
pub fn apply_truncation(raw: &[f64], truncation: Truncation) -> Result<(Vec<f64>, Postprocess)> {
    match truncation {
        Truncation::None => Ok((raw.to_vec(), Postprocess::None)),
        Truncation::Fixed { lo, hi } => Ok((
            truncate_contrast(raw, lo, hi)?,
            Postprocess::Clipped { lo, hi },
        )),
        Truncation::Percentile { lower, upper } => {
            if lower.is_nan() || upper.is_nan() || lower >= upper {
                return Err(Error::DegenerateBounds {
                    lo: lower,
                    hi: upper,
                });
            }
            if raw.is_empty() {
                return Ok((Vec::new(), Postprocess::None));
            }
            let lo = percentile(raw, lower);
            let hi = percentile(raw, upper);
            if lo < hi {
                Ok((
                    truncate_contrast(raw, lo, hi)?,
                    Postprocess::Percentile {
                        lower,
                        upper,
                        lo,
                        hi,
                    },
                ))
            } else {
                Ok((
                    truncate_contrast(raw, 0.0, 1.0)?,
                    Postprocess::Clipped { lo: 0.0, hi: 1.0 },
                ))
            }
        }
    }
}

fn pca_coefficients<'a>(meas: &'a MeasurementSequence, basis: &EigenBasis) -> Result<&'a [f64]> {
    let Coefficients::Pca(w) = &meas.coefficients else {
        return Err(Error::BasisMismatch("not a PCA measurement".into()));
    };
    if (meas.width, meas.height) != (basis.width, basis.height) {
        return Err(Error::BasisMismatch(format!(
            "measurement is {}x{}, basis is {}x{}",
            meas.width, meas.height, basis.width, basis.height
        )));
    }
    if let Some(fp) = meas.basis_fingerprint {
        if fp != basis.fingerprint() {
            return Err(Error::BasisMismatch(
                "patterns were derived from a different basis".into(),
            ));
        }
    }
    if w.len() > basis.len() {
        return Err(Error::KOutOfRange {
            requested: w.len(),
            available: basis.len(),
        });
    }
    Ok(w)
}

fn pca_result(
    meas: &MeasurementSequence,
    raw: Vec<f64>,
    truncation: Truncation,
) -> Result<ReconstructionResult> {
    let (image, postprocess) = apply_truncation(&raw, truncation)?;
    Ok(ReconstructionResult {
        raw,
        image,
        method: Method::Pca,
        coefficients_used: meas.len(),
        projections_used: meas.projections_used,
        postprocess,
    })
}

/// Σₖ wₖ·qₖ over the measured coefficients, then truncation.
pub fn reconstruct_pca(
    meas: &MeasurementSequence,
    basis: &EigenBasis,
    truncation: Truncation,
) -> Result<ReconstructionResult> {
    let w = pca_coefficients(meas, basis)?;
    let mut raw = vec![0.0; basis.pixels()];
    for (k, &wk) in w.iter().enumerate() {
        for (r, q) in raw.iter_mut().zip(basis.pattern(k)) {
            *r += wk * q;
        }
    }
    pca_result(meas, raw, truncation)
}

/// Mean-augmented variant: μ + Σₖ (wₖ − ⟨qₖ, μ⟩)·qₖ, i.e. the projection of
/// the object onto the affine subspace through the dictionary mean.
pub fn reconstruct_pca_mean_augmented(
    meas: &MeasurementSequence,
    basis: &EigenBasis,
    truncation: Truncation,
) -> Result<ReconstructionResult> {
    let w = pca_coefficients(meas, basis)?;
    let mut raw = basis.mean.clone();
    for (k, &wk) in w.iter().enumerate() {
        let q = basis.pattern(k);
        let c = wk - dot(q, &basis.mean);
        for (r, qi) in raw.iter_mut().zip(q) {
            *r += c * qi;
        }
    }
    pca_result(meas, raw, truncation)
}

/// Zero-filled, conjugate-completed spectrum followed by an inverse DFT (1/N scaling).
pub fn reconstruct_fourier(
    meas: &MeasurementSequence,
    plan: &FourierPlan,
    truncation: Truncation,
) -> Result<ReconstructionResult> {
    let Coefficients::Fourier {
        frequencies,
        values,
    } = &meas.coefficients
    else {
        return Err(Error::PlanMismatch("not a Fourier measurement".into()));
    };
    let (width, height) = (plan.width, plan.height);
    if (meas.width, meas.height) != (width, height) {
        return Err(Error::PlanMismatch(format!(
            "measurement is {}x{}, plan is {width}x{height}",
            meas.width, meas.height
        )));
    }
    if frequencies.len() > plan.len() || frequencies[..] != plan.order[..frequencies.len()] {
        return Err(Error::PlanMismatch(
            "measured frequencies are not a prefix of the plan".into(),
        ));
    }

    let mut spectrum = vec![Complex64::new(0.0, 0.0); width * height];
    for (&(u, v), &c) in frequencies.iter().zip(values) {
        spectrum[u * width + v] = c;
        let (cu, cv) = plan.conjugate((u, v));
        if (cu, cv) != (u, v) {
            spectrum[cu * width + cv] = c.conj();
        }
    }
    let raw: Vec<f64> = inverse_dft_2d(spectrum, width, height)
        .into_iter()
        .map(|c| c.re)
        .collect();
    let (image, postprocess) = apply_truncation(&raw, truncation)?;
    Ok(ReconstructionResult {
        raw,
        image,
        method: Method::Fourier,
        coefficients_used: meas.len(),
        projections_used: meas.projections_used,
        postprocess,
    })
}

/// (1/N)·Σ F(u, v)·exp(+2πi(u·y/Y + v·x/X)); input indexed [u·X + v], output [y·X + x].
fn inverse_dft_2d(mut data: Vec<Complex64>, width: usize, height: usize) -> Vec<Complex64> {
    let mut planner = FftPlanner::<f64>::new();
    let rows = planner.plan_fft_inverse(width);
    for row in data.chunks_exact_mut(width) {
        rows.process(row);
    }
    let cols = planner.plan_fft_inverse(height);
    let mut column = vec![Complex64::new(0.0, 0.0); height];
    for x in 0..width {
        for (y, c) in column.iter_mut().enumerate() {
            *c = data[y * width + x];
        }
        cols.process(&mut column);
        for (y, c) in column.iter().enumerate() {
            data[y * width + x] = *c;
        }
    }
    let scale = 1.0 / (width * height) as f64;
    data.iter_mut().for_each(|c| *c *= scale);
    data
}

pub fn mse(reference: &[f64], candidate: &[f64]) -> Result<f64> {
    if reference.len() != candidate.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            actual: candidate.len(),
        });
    }
    if reference.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = reference
        .iter()
        .zip(candidate)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / reference.len() as f64)
}

/// 10·log₁₀(1/MSE) for unit-range images; infinite when the images match.
pub fn psnr(reference: &[f64], candidate: &[f64]) -> Result<f64> {
    let e = mse(reference, candidate)?;
    Ok(if e == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * e.log10()
    })
}

/// Which count a report row was requested on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Coefficients,
    Projections,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub method: Method,
    pub axis: Axis,
    pub coefficients: usize,
    pub projections: usize,
    pub mean_psnr_db: f64,
    pub n_images: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub category: String,
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str =
        "category,method,coefficients,projections,mean_psnr_db,n_images";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.category,
                r.method,
                r.coefficients,
                r.projections,
                format_db(r.mean_psnr_db),
                r.n_images
            ));
        }
        out
    }

    pub fn find(&self, method: Method, axis: Axis, count: usize) -> Option<&EvalRow> {
        self.rows.iter().find(|r| {
            r.method == method
                && r.axis == axis
                && match axis {
                    Axis::Coefficients => r.coefficients == count,
                    Axis::Projections => {
                        r.projections <= count
                            && count - r.projections < r.method.projections_per_coefficient()
                    }
                }
        })
    }
}

/// Four decimals, or the literal `inf`.
pub fn format_db(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".to_string()
    } else {
        format!("{v:.4}")
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub category: String,
    pub truncation: Truncation,
    /// Add the dictionary mean back in PCA reconstructions.
    pub mean_augmented: bool,
}

/// Simulates, reconstructs and scores every test image for each requested count,
/// on both the coefficient-count and projection-count axes.
///
/// On the projection axis a budget of P displays buys P/2 PCA coefficients and
/// P/4 Fourier coefficients.
pub fn evaluate(
    test: &ImageDictionary,
    basis: &EigenBasis,
    plan: &FourierPlan,
    counts: &[usize],
    noise: &NoiseConfig,
    options: &EvalOptions,
) -> Result<EvalReport> {
    if counts.is_empty() {
        return Err(Error::Usage("empty count list".into()));
    }
    if (test.width(), test.height()) != (basis.width, basis.height) {
        return Err(Error::BasisMismatch(
            "test images and basis differ in size".into(),
        ));
    }
    if (plan.width, plan.height) != (basis.width, basis.height) {
        return Err(Error::PlanMismatch(
            "test images and plan differ in size".into(),
        ));
    }
    noise.validate()?;

    let requests: Vec<(Axis, usize)> = [Axis::Coefficients, Axis::Projections]
        .into_iter()
        .flat_map(|axis| counts.iter().map(move |&c| (axis, c)))
        .collect();
    let coefficient_count = |method: Method, axis: Axis, c: usize| match axis {
        Axis::Coefficients => c,
        Axis::Projections => c / method.projections_per_coefficient(),
    };
    let pca_counts: BTreeSet<usize> = requests
        .iter()
        .map(|&(a, c)| coefficient_count(Method::Pca, a, c))
        .collect();
    let fourier_counts: BTreeSet<usize> = requests
        .iter()
        .map(|&(a, c)| coefficient_count(Method::Fourier, a, c))
        .collect();
    let max_pca = pca_counts.last().copied().unwrap_or(0);
    let max_fourier = fourier_counts.last().copied().unwrap_or(0);
    if max_pca > basis.len() {
        return Err(Error::KOutOfRange {
            requested: max_pca,
            available: basis.len(),
        });
    }
    if max_fourier > plan.len() {
        return Err(Error::COutOfRange {
            requested: max_fourier,
            available: plan.len(),
        });
    }

    let patterns = if max_pca > 0 {
        normalize_patterns(basis, max_pca)?
    } else {
        DisplayPatternSet::empty(basis)
    };
    let plan = plan.prefix(max_fourier);
    let pca_counts: Vec<usize> = pca_counts.into_iter().collect();
    let fourier_counts: Vec<usize> = fourier_counts.into_iter().collect();

    let per_image: Vec<(Vec<f64>, Vec<f64>)> = (0..test.len())
        .into_par_iter()
        .map(|i| -> Result<_> {
            let object = test.image(i);
            let noise = noise.for_realization(i as u64);
            let pca = measure_pca(&patterns, object, &noise)?;
            let fourier = measure_fourier(&plan, object, &noise)?;
            let pca_scores = pca_counts
                .iter()
                .map(|&k| {
                    let meas = pca.prefix(k);
                    let rec = if options.mean_augmented {
                        reconstruct_pca_mean_augmented(&meas, basis, options.truncation)?
                    } else {
                        reconstruct_pca(&meas, basis, options.truncation)?
                    };
                    psnr(object, &rec.image)
                })
                .collect::<Result<Vec<_>>>()?;
            let fourier_scores = fourier_counts
                .iter()
                .map(|&c| {
                    let rec = reconstruct_fourier(&fourier.prefix(c), &plan, options.truncation)?;
                    psnr(object, &rec.image)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((pca_scores, fourier_scores))
        })
        .collect::<Result<_>>()?;

    let mean_of = |method: Method, slot: usize| -> f64 {
        let sum: f64 = per_image
            .iter()
            .map(|(p, f)| match method {
                Method::Pca => p[slot],
                Method::Fourier => f[slot],
            })
            .sum();
        sum / per_image.len().max(1) as f64
    };

    let mut rows = Vec::with_capacity(2 * requests.len());
    for method in [Method::Pca, Method::Fourier] {
        for &(axis, c) in &requests {
            let k = coefficient_count(method, axis, c);
            let slot = match method {
                Method::Pca => pca_counts.binary_search(&k),
                Method::Fourier => fourier_counts.binary_search(&k),
            }
            .expect("count was scheduled");
            rows.push(EvalRow {
                method,
                axis,
                coefficients: k,
                projections: projection_budget(method, k),
                mean_psnr_db: mean_of(method, slot),
                n_images: test.len(),
            });
        }
    }
    Ok(EvalReport {
        category: options.category.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{design_basis, Route, Solver};
    use crate::linalg::Matrix;
    use crate::patterns::zigzag_order;

    #[test]
    fn truncation_examples() {
        let img = [0.0, 0.3, 1.0];
        assert_eq!(truncate_contrast(&img, 0.0, 1.0).unwrap(), img.to_vec());
        assert_eq!(
            truncate_contrast(&[-0.2, 0.5, 1.3], 0.0, 1.0).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
        assert_eq!(
            truncate_contrast(&[0.5, 1.5, 2.5], 1.0, 2.0).unwrap(),
            vec![0.0, 0.5, 1.0]
        );
        assert!(matches!(
            truncate_contrast(&img, 1.0, 1.0),
            Err(Error::DegenerateBounds { .. })
        ));
        assert!(matches!(
            truncate_contrast(&img, 2.0, 1.0),
            Err(Error::DegenerateBounds { .. })
        ));
    }

    #[test]
    fn percentile_mode_on_ten_values() {
        // Sorted: 0,1,...,9. Rank for p is 9p/100; p = 1 gives 0.09, p = 99 gives 8.91.
        let v = [5.0, 2.0, 9.0, 0.0, 7.0, 1.0, 8.0, 3.0, 6.0, 4.0];
        assert!((percentile(&v, 1.0) - 0.09).abs() < 1e-12);
        assert!((percentile(&v, 99.0) - 8.91).abs() < 1e-12);
        let (out, post) = apply_truncation(
            &v,
            Truncation::Percentile {
                lower: 1.0,
                upper: 99.0,
            },
        )
        .unwrap();
        let Postprocess::Percentile { lo, hi, .. } = post else {
            panic!()
        };
        assert!((lo - 0.09).abs() < 1e-12 && (hi - 8.91).abs() < 1e-12);
        assert_eq!(out[3], 0.0);
        assert_eq!(out[2], 1.0);
        assert!((out[0] - (5.0 - 0.09) / 8.82).abs() < 1e-12);
    }

    #[test]
    fn flat_image_percentile_falls_back() {
        let (out, post) = apply_truncation(
            &[0.4; 5],
            Truncation::Percentile {
                lower: 1.0,
                upper: 99.0,
            },
        )
        .unwrap();
        assert_eq!(out, vec![0.4; 5]);
        assert_eq!(post, Postprocess::Clipped { lo: 0.0, hi: 1.0 });
    }

    #[test]
    fn truncation_parsing() {
        assert_eq!("none".parse::<Truncation>().unwrap(), Truncation::None);
        assert_eq!(
            "fixed".parse::<Truncation>().unwrap(),
            Truncation::default()
        );
        assert_eq!(
            "percentile:2:98".parse::<Truncation>().unwrap(),
            Truncation::Percentile {
                lower: 2.0,
                upper: 98.0
            }
        );
        assert!("fixed:1".parse::<Truncation>().is_err());
        let t = Truncation::Fixed { lo: -0.5, hi: 1.5 };
        assert_eq!(t.to_string().parse::<Truncation>().unwrap(), t);
    }

    #[test]
    fn psnr_examples() {
        let a = [0.2, 0.4, 0.6];
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        assert!((psnr(&[0.0; 4], &[0.1; 4]).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(psnr(&[1.0; 4], &[0.0; 4]).unwrap(), 0.0);
        assert!(psnr(&[0.0; 2], &[0.0; 3]).is_err());
        assert_eq!(format_db(f64::INFINITY), "inf");
        assert_eq!(format_db(20.0), "20.0000");
    }

    fn two_pixel_basis() -> EigenBasis {
        let dict = ImageDictionary::new(vec![1.0, 0.0, 0.0, 1.0], 2, 1, None).unwrap();
        design_basis(&dict, Route::Covariance, Solver::Jacobi).unwrap()
    }

    #[test]
    fn pca_two_pixel_projection() {
        let basis = two_pixel_basis();
        let set = normalize_patterns(&basis, 1).unwrap();
        let meas = measure_pca(&set, &[1.0, 0.0], &NoiseConfig::none()).unwrap();
        let rec = reconstruct_pca(&meas, &basis, Truncation::None).unwrap();
        // Q₁ᵀQ₁·I with q₁ = [1, −1]/√2 and I = [1, 0].
        assert!((rec.raw[0] - 0.5).abs() < 1e-12);
        assert!((rec.raw[1] + 0.5).abs() < 1e-12);
        assert_eq!(rec.image, rec.raw);
        let clipped = reconstruct_pca(&meas, &basis, Truncation::default()).unwrap();
        assert!((clipped.image[0] - 0.5).abs() < 1e-12);
        assert_eq!(clipped.image[1], 0.0);
        assert_eq!(clipped.projections_used, 2);
    }

    #[test]
    fn zero_coefficients_give_zero_image() {
        let basis = two_pixel_basis();
        let set = normalize_patterns(&basis, 2).unwrap();
        let meas = measure_pca(&set, &[0.3, 0.9], &NoiseConfig::none())
            .unwrap()
            .prefix(0);
        let rec = reconstruct_pca(&meas, &basis, Truncation::None).unwrap();
        assert_eq!(rec.raw, vec![0.0, 0.0]);
    }

    #[test]
    fn pca_rejects_foreign_basis() {
        let basis = two_pixel_basis();
        let set = normalize_patterns(&basis, 1).unwrap();
        let meas = measure_pca(&set, &[1.0, 0.0], &NoiseConfig::none()).unwrap();
        let mut other = basis.clone();
        other.vectors = Matrix::identity(2);
        assert!(matches!(
            reconstruct_pca(&meas, &other, Truncation::None),
            Err(Error::BasisMismatch(_))
        ));
        let plan = zigzag_order(2, 1, 2).unwrap();
        assert!(matches!(
            reconstruct_fourier(&meas, &plan, Truncation::None),
            Err(Error::PlanMismatch(_))
        ));
    }

    #[test]
    fn mean_augmented_with_full_basis_is_exact() {
        let basis = two_pixel_basis();
        // The two-image dictionary has full rank 2 after padding with the null vector.
        let set = normalize_patterns(&basis, 2).unwrap();
        let obj = [0.3, 0.8];
        let meas = measure_pca(&set, &obj, &NoiseConfig::none()).unwrap();
        let rec = reconstruct_pca_mean_augmented(&meas, &basis, Truncation::None).unwrap();
        assert!((rec.raw[0] - 0.3).abs() < 1e-12 && (rec.raw[1] - 0.8).abs() < 1e-12);
        // With no coefficients it returns the mean.
        let rec =
            reconstruct_pca_mean_augmented(&meas.prefix(0), &basis, Truncation::None).unwrap();
        assert_eq!(rec.raw, basis.mean);
    }

    #[test]
    fn fourier_dc_only_on_constant_image() {
        let plan = zigzag_order(5, 4, 9).unwrap();
        let obj = vec![0.35; 20];
        let meas = measure_fourier(&plan.prefix(1), &obj, &NoiseConfig::none()).unwrap();
        let rec = reconstruct_fourier(&meas, &plan, Truncation::None).unwrap();
        assert!(rec.raw.iter().all(|v| (v - 0.35).abs() < 1e-12));
        let wrong = zigzag_order(4, 5, 9).unwrap();
        assert!(matches!(
            reconstruct_fourier(&meas, &wrong, Truncation::None),
            Err(Error::PlanMismatch(_))
        ));
    }

    #[test]
    fn evaluate_row_layout_and_zero_count() {
        let imgs: Vec<f64> = (0..6 * 16).map(|i| ((i * 37) % 17) as f64 / 16.0).collect();
        let dict = ImageDictionary::new(imgs, 4, 4, None).unwrap();
        let basis = design_basis(&dict, Route::Covariance, Solver::TridiagonalQl).unwrap();
        let plan = zigzag_order(4, 4, 10).unwrap();
        let opts = EvalOptions {
            category: "toy".into(),
            ..Default::default()
        };
        let report = evaluate(&dict, &basis, &plan, &[0, 4], &NoiseConfig::none(), &opts).unwrap();
        assert_eq!(report.rows.len(), 8);
        let csv = report.to_csv();
        assert!(csv.starts_with(EvalReport::CSV_HEADER));
        assert_eq!(csv.lines().count(), 9);
        let row = report.find(Method::Fourier, Axis::Projections, 4).unwrap();
        assert_eq!((row.coefficients, row.projections), (1, 4));
        let zero = report.find(Method::Pca, Axis::Coefficients, 0).unwrap();
        let expected: f64 = dict
            .iter()
            .map(|img| psnr(img, &[0.0; 16]).unwrap())
            .sum::<f64>()
            / 6.0;
        assert!((zero.mean_psnr_db - expected).abs() < 1e-12);
        assert!(evaluate(&dict, &basis, &plan, &[], &NoiseConfig::none(), &opts).is_err());
        assert!(matches!(
            evaluate(&dict, &basis, &plan, &[7], &NoiseConfig::none(), &opts),
            Err(Error::KOutOfRange { .. })
        ));
    }
}
