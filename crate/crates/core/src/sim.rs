//! Simulated single-pixel acquisition.
//!
//! Every physical projection yields one bucket value, the inner product of
//! the displayed pattern with the object. PCA coefficients come from a
//! pattern/complement pair, Fourier coefficients from four phase-shifted
//! fringes. Detector noise is added per projection, before differencing.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::patterns::{fringe_angle, DisplayPatternSet, FourierPlan, Phase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Pca,
    Fourier,
}

impl Method {
    /// Physical projections needed per coefficient.
    pub fn projections_per_coefficient(self) -> usize {
        match self {
            Method::Pca => 2,
            Method::Fourier => 4,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Pca => "pca",
            Method::Fourier => "fourier",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pca" => Ok(Method::Pca),
            "fourier" | "fspi" => Ok(Method::Fourier),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// Number of pattern displays needed for `count` coefficients.
pub fn projection_budget(method: Method, count: usize) -> usize {
    method.projections_per_coefficient() * count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseKind {
    #[default]
    None,
    /// Zero-mean Gaussian added to every bucket value.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    /// Standard deviation in bucket-intensity units.
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn gaussian(sigma: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            kind: NoiseKind::Gaussian,
            sigma,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!(
                "noise sigma {} must be finite and >= 0",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.kind == NoiseKind::Gaussian && self.sigma > 0.0
    }

    /// Independent noise configuration for the `r`-th object of a batch.
    pub fn for_realization(&self, r: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(r.wrapping_add(0x5851_F42D_4C95_7F2D))),
            ..*self
        }
    }

    /// Noise for the projections behind coefficient `index`.
    ///
    /// Each coefficient owns its own ChaCha stream, so any prefix or subset of
    /// a sequence sees the same noise whether measured alone or in bulk.
    fn coefficient_noise(&self, method: Method, index: usize) -> CoefficientNoise {
        if !self.is_active() {
            return CoefficientNoise(None);
        }
        let tag = match method {
            Method::Pca => 0x7063_6100,
            Method::Fourier => 0x6674_0000,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ tag));
        rng.set_stream(index as u64);
        CoefficientNoise(Some((rng, self.sigma)))
    }
}

struct CoefficientNoise(Option<(ChaCha8Rng, f64)>);

impl CoefficientNoise {
    fn sample(&mut self) -> f64 {
        match &mut self.0 {
            Some((rng, sigma)) => {
                let z: f64 = StandardNormal.sample(rng);
                *sigma * z
            }
            None => 0.0,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Bucket-detector reading for one displayed pattern.
pub fn measure(pattern: &[f64], object: &[f64]) -> Result<f64> {
    if pattern.len() != object.len() {
        return Err(Error::DimensionMismatch {
            expected: pattern.len(),
            actual: object.len(),
        });
    }
    Ok(dot(pattern, object))
}

/// Diagnostic reading of the all-ones pattern (total object intensity).
pub fn measure_reference(object: &[f64], noise: &NoiseConfig) -> f64 {
    let mut n = noise.coefficient_noise(Method::Pca, usize::MAX);
    object.iter().sum::<f64>() + n.sample()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    /// Rescaled differential readings wₖ.
    Pca(Vec<f64>),
    /// Four-step spectrum samples F(u, v).
    Fourier {
        frequencies: Vec<(usize, usize)>,
        values: Vec<Complex64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSequence {
    pub coefficients: Coefficients,
    pub projections_used: usize,
    pub noise: NoiseConfig,
    /// Fingerprint of the basis behind PCA patterns.
    pub basis_fingerprint: Option<u64>,
    pub width: usize,
    pub height: usize,
}

impl MeasurementSequence {
    pub fn method(&self) -> Method {
        match self.coefficients {
            Coefficients::Pca(_) => Method::Pca,
            Coefficients::Fourier { .. } => Method::Fourier,
        }
    }

    /// Number of coefficients, K or C.
    pub fn len(&self) -> usize {
        match &self.coefficients {
            Coefficients::Pca(w) => w.len(),
            Coefficients::Fourier { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The sequence that measuring only the first `count` coefficients would have produced.
    pub fn prefix(&self, count: usize) -> MeasurementSequence {
        let count = count.min(self.len());
        let coefficients = match &self.coefficients {
            Coefficients::Pca(w) => Coefficients::Pca(w[..count].to_vec()),
            Coefficients::Fourier {
                frequencies,
                values,
            } => Coefficients::Fourier {
                frequencies: frequencies[..count].to_vec(),
                values: values[..count].to_vec(),
            },
        };
        MeasurementSequence {
            coefficients,
            projections_used: projection_budget(self.method(), count),
            ..self.clone()
        }
    }
}

fn check_len(expected: usize, object: &[f64]) -> Result<()> {
    if object.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: object.len(),
        });
    }
    Ok(())
}

/// Differential measurement with each pattern and its complement, rescaled by sₖ.
pub fn measure_pca(
    patterns: &DisplayPatternSet,
    object: &[f64],
    noise: &NoiseConfig,
) -> Result<MeasurementSequence> {
    noise.validate()?;
    check_len(patterns.pixels(), object)?;
    let mut w = Vec::with_capacity(patterns.len());
    for k in 0..patterns.len() {
        let mut n = noise.coefficient_noise(Method::Pca, k);
        let p = patterns.pattern(k);
        let direct = dot(p, object) + n.sample();
        let complement: f64 = p
            .iter()
            .zip(object)
            .map(|(p, x)| (1.0 - p) * x)
            .sum::<f64>()
            + n.sample();
        w.push(patterns.scales[k] * (direct - complement));
    }
    Ok(MeasurementSequence {
        projections_used: projection_budget(Method::Pca, w.len()),
        coefficients: Coefficients::Pca(w),
        noise: *noise,
        basis_fingerprint: Some(patterns.basis_fingerprint),
        width: patterns.width,
        height: patterns.height,
    })
}

/// Four-step phase-shifting acquisition of each planned frequency.
///
/// F(u, v) = (m₀ − m_π) + i(m_{π/2} − m_{3π/2}), which equals the
/// unnormalized forward DFT Σ I(x, y)·exp(−2πi(u·y/Y + v·x/X)) exactly in
/// the noiseless case (the global scale factor is 1).
pub fn measure_fourier(
    plan: &FourierPlan,
    object: &[f64],
    noise: &NoiseConfig,
) -> Result<MeasurementSequence> {
    noise.validate()?;
    check_len(plan.pixels(), object)?;
    let (width, height) = (plan.width, plan.height);
    let mut values = Vec::with_capacity(plan.len());
    let mut buckets = [0.0; 4];
    for (idx, &(u, v)) in plan.order.iter().enumerate() {
        buckets.fill(0.0);
        for y in 0..height {
            for x in 0..width {
                let theta = fringe_angle(u, v, x, y, width, height);
                let value = object[y * width + x];
                for (b, phase) in buckets.iter_mut().zip(Phase::ALL) {
                    *b += value * (0.5 + 0.5 * (theta + phase.radians()).cos());
                }
            }
        }
        let mut n = noise.coefficient_noise(Method::Fourier, idx);
        for b in buckets.iter_mut() {
            *b += n.sample();
        }
        values.push(Complex64::new(
            buckets[0] - buckets[2],
            buckets[1] - buckets[3],
        ));
    }
    Ok(MeasurementSequence {
        projections_used: projection_budget(Method::Fourier, values.len()),
        coefficients: Coefficients::Fourier {
            frequencies: plan.order.clone(),
            values,
        },
        noise: *noise,
        basis_fingerprint: None,
        width,
        height,
    })
}

impl MeasurementSequence {
    /// CSV with a `key=value` metadata row, a column header, and one row per coefficient.
    pub fn to_csv(&self) -> String {
        let noise = match self.noise.kind {
            NoiseKind::None => "none",
            NoiseKind::Gaussian => "gaussian",
        };
        let mut out = format!(
            "method={},count={},noise={},sigma={},seed={},width={},height={}",
            self.method(),
            self.len(),
            noise,
            self.noise.sigma,
            self.noise.seed,
            self.width,
            self.height
        );
        if let Some(fp) = self.basis_fingerprint {
            out.push_str(&format!(",basis={fp:016x}"));
        }
        out.push('\n');
        let per = self.method().projections_per_coefficient();
        match &self.coefficients {
            Coefficients::Pca(w) => {
                out.push_str("index,k,real,imag,projections_cumulative\n");
                for (i, v) in w.iter().enumerate() {
                    out.push_str(&format!("{i},{},{v},0,{}\n", i + 1, per * (i + 1)));
                }
            }
            Coefficients::Fourier {
                frequencies,
                values,
            } => {
                out.push_str("index,u,v,real,imag,projections_cumulative\n");
                for (i, ((u, v), c)) in frequencies.iter().zip(values).enumerate() {
                    out.push_str(&format!(
                        "{i},{u},{v},{},{},{}\n",
                        c.re,
                        c.im,
                        per * (i + 1)
                    ));
                }
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::Config(format!("measurement CSV: {what}"));
        let mut lines = text.lines();
        let meta_line = lines.next().ok_or_else(|| bad("empty input"))?;
        let mut meta = std::collections::HashMap::new();
        for field in meta_line.split(',') {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| bad("malformed metadata"))?;
            meta.insert(k.trim(), v.trim());
        }
        let get = |k: &str| {
            meta.get(k)
                .copied()
                .ok_or_else(|| bad(&format!("missing {k}")))
        };
        let num = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| bad(k)) };
        let method: Method = get("method")?.parse()?;
        let noise = NoiseConfig {
            kind: match get("noise")? {
                "none" => NoiseKind::None,
                "gaussian" => NoiseKind::Gaussian,
                _ => return Err(bad("noise kind")),
            },
            sigma: get("sigma")?.parse().map_err(|_| bad("sigma"))?,
            seed: get("seed")?.parse().map_err(|_| bad("seed"))?,
        };
        let basis_fingerprint = match meta.get("basis") {
            Some(h) => Some(u64::from_str_radix(h, 16).map_err(|_| bad("basis"))?),
            None => None,
        };
        lines.next().ok_or_else(|| bad("missing column header"))?;
        let rows: Vec<Vec<&str>> = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split(',').collect())
            .collect();
        let f = |s: &str| -> Result<f64> { s.parse().map_err(|_| bad("number")) };
        let u = |s: &str| -> Result<usize> { s.parse().map_err(|_| bad("index")) };
        let coefficients = match method {
            Method::Pca => Coefficients::Pca(
                rows.iter()
                    .map(|r| r.get(2).ok_or_else(|| bad("short row")).and_then(|s| f(s)))
                    .collect::<Result<_>>()?,
            ),
            Method::Fourier => {
                let mut frequencies = Vec::new();
                let mut values = Vec::new();
                for r in &rows {
                    if r.len() < 5 {
                        return Err(bad("short row"));
                    }
                    frequencies.push((u(r[1])?, u(r[2])?));
                    values.push(Complex64::new(f(r[3])?, f(r[4])?));
                }
                Coefficients::Fourier {
                    frequencies,
                    values,
                }
            }
        };
        let seq = MeasurementSequence {
            projections_used: projection_budget(method, rows.len()),
            coefficients,
            noise,
            basis_fingerprint,
            width: num("width")?,
            height: num("height")?,
        };
        if seq.len() != num("count")? {
            return Err(bad("count does not match rows"));
        }
        Ok(seq)
    }
}
