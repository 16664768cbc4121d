//! Dense 2x2 matrices and a banded stationary-distribution solver.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::math;

/// Row-major 2x2 matrix; index 0 is the `Up` phase.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[0.0; 2]; 2]);
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Mat2([[a, 0.0], [0.0, d]])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn transpose(&self) -> Self {
        let m = self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular("2x2 matrix has zero determinant"));
        }
        let m = self.0;
        Ok(Mat2([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]]).scale(1.0 / det))
    }

    pub fn row_sums(&self) -> [f64; 2] {
        [self.0[0][0] + self.0[0][1], self.0[1][0] + self.0[1][1]]
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: [f64; 2]) -> [f64; 2] {
        let m = self.0;
        [
            v[0] * m[0][0] + v[1] * m[1][0],
            v[0] * m[0][1] + v[1] * m[1][1],
        ]
    }

    /// Matrix times column vector.
    pub fn right_mul(&self, v: [f64; 2]) -> [f64; 2] {
        let m = self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    /// Real eigenvalues in descending order.
    ///
    /// The smaller one is recovered from the determinant to avoid
    /// cancellation when the two are far apart.
    pub fn real_eigenvalues(&self) -> Result<(f64, f64)> {
        let m = self.0;
        let half_gap = 0.5 * (m[0][0] - m[1][1]);
        let disc = half_gap * half_gap + m[0][1] * m[1][0];
        if disc < 0.0 {
            return Err(Error::Singular("matrix has complex eigenvalues"));
        }
        let half_tr = 0.5 * self.trace();
        let root = math::sqrt(disc);
        if half_tr >= 0.0 {
            let large = half_tr + root;
            let small = if large != 0.0 { self.det() / large } else { half_tr - root };
            Ok((large, small))
        } else {
            let small = half_tr - root;
            let large = if small != 0.0 { self.det() / small } else { half_tr + root };
            Ok((large, small))
        }
    }

    /// Stationary law of a 2-state stochastic matrix.
    pub fn two_state_stationary(&self) -> [f64; 2] {
        let to_down = self.0[0][1];
        let to_up = self.0[1][0];
        let total = to_down + to_up;
        [to_up / total, to_down / total]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (self.0, o.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Transition matrix stored by bands: row `i` holds columns
/// `i - bandwidth ..= i + bandwidth`.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        BandedMatrix {
            n,
            bandwidth,
            data: vec![0.0; n * (2 * bandwidth + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i.abs_diff(j) <= self.bandwidth, "({i}, {j}) outside band");
        i * (2 * self.bandwidth + 1) + (j + self.bandwidth - i)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.bandwidth {
            0.0
        } else {
            self.data[self.offset(i, j)]
        }
    }

    /// Adds `v` to entry `(i, j)`. Panics when `(i, j)` lies outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i.abs_diff(j) <= self.bandwidth, "entry ({i}, {j}) outside band");
        let o = self.offset(i, j);
        self.data[o] += v;
    }

    /// Stationary vector by Grassmann-Taksar-Heyman elimination.
    ///
    /// Only off-diagonal entries are used and no subtraction occurs, so
    /// small probabilities keep full relative accuracy. The chain must be
    /// irreducible.
    pub fn gth_stationary(&self) -> Result<Vec<f64>> {
        let n = self.n;
        let b = self.bandwidth;
        let mut a = self.data.clone();
        let w = 2 * b + 1;
        let idx = |i: usize, j: usize| i * w + (j + b - i);
        let mut outflow = vec![0.0; n];
        for k in (1..n).rev() {
            let lo = k.saturating_sub(b);
            let s: f64 = (lo..k).map(|j| a[idx(k, j)]).sum();
            if !(s > 0.0) {
                return Err(Error::Singular("chain is not irreducible (state cannot reach lower indices)"));
            }
            outflow[k] = s;
            for i in lo..k {
                let f = a[idx(i, k)];
                if f == 0.0 {
                    continue;
                }
                let f = f / s;
                for j in lo..k {
                    if j != i {
                        let v = a[idx(k, j)];
                        if v != 0.0 {
                            a[idx(i, j)] += f * v;
                        }
                    }
                }
            }
        }
        let mut pi = vec![0.0; n];
        pi[0] = 1.0;
        for k in 1..n {
            let lo = k.saturating_sub(b);
            let inflow: f64 = (lo..k).map(|i| pi[i] * a[idx(i, k)]).sum();
            pi[k] = inflow / outflow[k];
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|v| *v /= total);
        Ok(pi)
    }

    /// `max_j |(pi P)_j - pi_j|`.
    pub fn balance_residual(&self, pi: &[f64]) -> f64 {
        let n = self.n;
        let b = self.bandwidth;
        let mut flow = vec![0.0; n];
        for (i, &pi_i) in pi.iter().enumerate() {
            let lo = i.saturating_sub(b);
            let hi = (i + b).min(n - 1);
            for (j, f) in flow.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *f += pi_i * self.get(i, j);
            }
        }
        flow.iter()
            .zip(pi)
            .fold(0.0_f64, |acc, (f, p)| acc.max((f - p).abs()))
    }
}
