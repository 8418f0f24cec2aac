//! Displayable illumination patterns.
//!
//! A projector can only emit non-negative intensities, so each signed
//! eigenvector q is mapped to p = q/(2s) + 1/2 with s = max|q|, and both p
//! and its complement 1 − p are displayed. The Fourier baseline uses
//! raised-cosine fringes at four phase shifts, visited in zig-zag order.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::eigen::EigenBasis;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Non-negative PCA patterns ready for display.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplayPatternSet {
    /// K × N, values in [0, 1].
    pub patterns: Matrix,
    /// sₖ = max|qₖ| for each pattern.
    pub scales: Vec<f64>,
    /// [`EigenBasis::fingerprint`] of the source basis.
    pub basis_fingerprint: u64,
    pub width: usize,
    pub height: usize,
}

impl DisplayPatternSet {
    /// A set with no patterns, bound to `basis`; measuring with it yields zero coefficients.
    pub fn empty(basis: &EigenBasis) -> Self {
        Self {
            patterns: Matrix::zeros(0, basis.pixels()),
            scales: Vec::new(),
            basis_fingerprint: basis.fingerprint(),
            width: basis.width,
            height: basis.height,
        }
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    pub fn pattern(&self, k: usize) -> &[f64] {
        self.patterns.row(k)
    }

    /// 1 − pₖ element-wise.
    pub fn complement(&self, k: usize) -> Vec<f64> {
        self.pattern(k).iter().map(|p| 1.0 - p).collect()
    }
}

pub fn normalize_patterns(basis: &EigenBasis, k: usize) -> Result<DisplayPatternSet> {
    if k == 0 || k > basis.len() {
        return Err(Error::KOutOfRange {
            requested: k,
            available: basis.len(),
        });
    }
    let n = basis.pixels();
    let mut patterns = Matrix::zeros(k, n);
    let mut scales = Vec::with_capacity(k);
    for i in 0..k {
        let q = basis.pattern(i);
        let s = q.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if s == 0.0 {
            return Err(Error::ZeroPattern(i));
        }
        for (p, &x) in patterns.row_mut(i).iter_mut().zip(q) {
            *p = (x / (2.0 * s) + 0.5).clamp(0.0, 1.0);
        }
        scales.push(s);
    }
    Ok(DisplayPatternSet {
        patterns,
        scales,
        basis_fingerprint: basis.fingerprint(),
        width: basis.width,
        height: basis.height,
    })
}

/// Phase shift of a four-step Fourier fringe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Zero,
    HalfPi,
    Pi,
    ThreeHalvesPi,
}

impl Phase {
    pub const ALL: [Phase; 4] = [Phase::Zero, Phase::HalfPi, Phase::Pi, Phase::ThreeHalvesPi];

    pub fn radians(self) -> f64 {
        match self {
            Phase::Zero => 0.0,
            Phase::HalfPi => FRAC_PI_2,
            Phase::Pi => PI,
            Phase::ThreeHalvesPi => 3.0 * FRAC_PI_2,
        }
    }

    pub fn degrees(self) -> u32 {
        match self {
            Phase::Zero => 0,
            Phase::HalfPi => 90,
            Phase::Pi => 180,
            Phase::ThreeHalvesPi => 270,
        }
    }
}

/// Sampled Fourier frequencies for the FSPI baseline.
///
/// `u` is the vertical (row) frequency in `0..height` and `v` the horizontal
/// (column) frequency in `0..width`. Only one member of each conjugate pair
/// (u, v) ~ (−u mod Y, −v mod X) is listed; the other is implied for real objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourierPlan {
    pub order: Vec<(usize, usize)>,
    pub width: usize,
    pub height: usize,
}

impl FourierPlan {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }

    /// The first `c` frequencies (clamped to the plan length).
    pub fn prefix(&self, c: usize) -> FourierPlan {
        FourierPlan {
            order: self.order[..c.min(self.order.len())].to_vec(),
            width: self.width,
            height: self.height,
        }
    }

    pub fn conjugate(&self, (u, v): (usize, usize)) -> (usize, usize) {
        conjugate(u, v, self.width, self.height)
    }
}

fn conjugate(u: usize, v: usize, width: usize, height: usize) -> (usize, usize) {
    ((height - u) % height, (width - v) % width)
}

/// Number of frequencies left once conjugate duplicates are removed.
pub fn non_redundant_count(width: usize, height: usize) -> usize {
    let self_conjugate =
        (1 + usize::from(height.is_multiple_of(2))) * (1 + usize::from(width.is_multiple_of(2)));
    (width * height + self_conjugate) / 2
}

/// Zig-zag traversal of the (u, v) grid by anti-diagonals of constant u + v, starting at DC.
///
/// Odd diagonals run with u increasing, even ones with u decreasing, so the
/// walk reads (0,0), (0,1), (1,0), (2,0), (1,1), (0,2), ...
pub fn zigzag_order(width: usize, height: usize, count: usize) -> Result<FourierPlan> {
    let available = if width == 0 || height == 0 {
        0
    } else {
        non_redundant_count(width, height)
    };
    if count == 0 || count > available {
        return Err(Error::COutOfRange {
            requested: count,
            available,
        });
    }
    let mut seen = vec![false; width * height];
    let mut order = Vec::with_capacity(count);
    'diagonals: for d in 0..width + height - 1 {
        let lo = d.saturating_sub(width - 1);
        let hi = d.min(height - 1);
        let us: Box<dyn Iterator<Item = usize>> = if d % 2 == 1 {
            Box::new(lo..=hi)
        } else {
            Box::new((lo..=hi).rev())
        };
        for u in us {
            let v = d - u;
            if seen[u * width + v] {
                continue;
            }
            let (cu, cv) = conjugate(u, v, width, height);
            seen[u * width + v] = true;
            seen[cu * width + cv] = true;
            order.push((u, v));
            if order.len() == count {
                break 'diagonals;
            }
        }
    }
    Ok(FourierPlan {
        order,
        width,
        height,
    })
}

/// Raised-cosine fringe 1/2 + 1/2·cos(2π(u·y/Y + v·x/X) + φ), row-major over (y, x).
pub fn fourier_pattern(u: usize, v: usize, phase: Phase, width: usize, height: usize) -> Vec<f64> {
    let n = width * height;
    let phi = phase.radians();
    let mut out = Vec::with_capacity(n);
    for y in 0..height {
        for x in 0..width {
            out.push(0.5 + 0.5 * (fringe_angle(u, v, x, y, width, height) + phi).cos());
        }
    }
    out
}

/// 2π(u·y/Y + v·x/X) with the integer part reduced exactly.
#[inline]
pub(crate) fn fringe_angle(
    u: usize,
    v: usize,
    x: usize,
    y: usize,
    width: usize,
    height: usize,
) -> f64 {
    let period = width * height;
    let r = ((u * y % height) * width + (v * x % width) * height) % period;
    TAU * r as f64 / period as f64
}

/// File name for an exported PCA pattern.
pub fn pca_pattern_filename(index: usize) -> String {
    format!("pca_{index:03}.pgm")
}

/// File name for an exported Fourier fringe.
pub fn fourier_pattern_filename(index: usize, u: usize, v: usize, phase: Phase) -> String {
    format!("fourier_{index:03}_u{u}_v{v}_p{}.pgm", phase.degrees())
}
