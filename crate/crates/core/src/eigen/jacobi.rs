//! Cyclic Jacobi rotations for dense symmetric matrices.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const MAX_SWEEPS: usize = 60;
/// Off-diagonal Frobenius norm, relative to the full norm, at which a sweep stops.
const OFF_DIAGONAL_TOL: f64 = 1e-14;

/// Returns unsorted eigenvalues and a matrix whose rows are the matching eigenvectors.
pub(crate) fn jacobi(c: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = c.rows();
    let mut a = c.clone();
    let mut v = Matrix::identity(n);
    let total = c.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    if total == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let negligible = total * f64::MIN_POSITIVE.sqrt();

    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= OFF_DIAGONAL_TOL * total {
            let values = (0..n).map(|i| a[(i, i)]).collect();
            return Ok((values, v));
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= negligible {
                    continue;
                }
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let cos = 1.0 / t.hypot(1.0);
                let sin = t * cos;
                rotate_rows(a.as_mut_slice(), n, p, q, cos, sin);
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        a[(r, p)] = a[(p, r)];
                        a[(r, q)] = a[(q, r)];
                    }
                }
                rotate_rows(v.as_mut_slice(), n, p, q, cos, sin);
            }
        }
    }
    Err(Error::NonConvergence { sweeps: MAX_SWEEPS })
}

/// row_p <- c·row_p − s·row_q, row_q <- s·row_p + c·row_q, for p < q.
#[inline]
fn rotate_rows(data: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = data.split_at_mut(q * n);
    let rp = &mut head[p * n..(p + 1) * n];
    let rq = &mut tail[..n];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += a[(i, j)] * a[(i, j)];
        }
    }
    (2.0 * sum).sqrt()
}
