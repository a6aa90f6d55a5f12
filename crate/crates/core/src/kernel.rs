//! Allocation-free dense helpers for the trajectory inner loops.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{C64, ZERO};

/// Row-major copy of a square matrix.
#[derive(Debug, Clone)]
pub(crate) struct DenseOp {
    dim: usize,
    data: Vec<C64>,
}

impl DenseOp {
    pub(crate) fn new(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(m[(i, j)]);
            }
        }
        Self { dim, data }
    }

    #[inline]
    pub(crate) fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim;
        for (row, yi) in self.data.chunks_exact(n).zip(y.iter_mut()) {
            let mut acc = ZERO;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *yi = acc;
        }
    }

    /// `⟨x|self|y⟩`.
    #[inline]
    pub(crate) fn sandwich(&self, x: &[C64], y: &[C64]) -> C64 {
        let n = self.dim;
        let mut acc = ZERO;
        for (row, xi) in self.data.chunks_exact(n).zip(x) {
            let mut r = ZERO;
            for (a, b) in row.iter().zip(y) {
                r += a * b;
            }
            acc += xi.conj() * r;
        }
        acc
    }
}

#[inline]
pub(crate) fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
}

#[inline]
pub(crate) fn norm_sqr(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

#[inline]
pub(crate) fn scale(x: &mut [C64], s: f64) {
    for z in x {
        *z *= s;
    }
}

/// Norms outside this window are treated as overflow/underflow.
pub(crate) const NORM_FLOOR: f64 = 1e-250;
pub(crate) const NORM_CEIL: f64 = 1e250;

#[inline]
pub(crate) fn check_norm(n2: f64) -> Result<f64> {
    if n2.is_finite() && n2 > NORM_FLOOR && n2 < NORM_CEIL {
        Ok(n2)
    } else {
        Err(Error::NormOutOfRange(n2))
    }
}

/// Number of `dt` steps in each grid interval (grid starts from `t = 0`).
pub(crate) fn steps_per_interval(grid: &[f64], dt: f64) -> Result<Vec<usize>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::NonPositiveStep(dt));
    }
    let mut prev = 0.0;
    let mut out = Vec::with_capacity(grid.len());
    for (i, &t) in grid.iter().enumerate() {
        let ok = if i == 0 { t >= 0.0 } else { t > prev };
        if !ok || !t.is_finite() {
            return Err(Error::NonMonotoneGrid);
        }
        let ratio = (t - prev) / dt;
        let k = ratio.round();
        if (ratio - k).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::IncommensurateGrid { node: t, dt });
        }
        out.push(k as usize);
        prev = t;
    }
    Ok(out)
}
