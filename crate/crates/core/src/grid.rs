//! Uniform periodic grids on [-L/2, L/2) and the FFT plumbing behind them.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{MixError, Result};

/// Samples f_j = f(x_j), x_j = -L/2 + j·h, h = L/N, N a power of two.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction1D {
    samples: Vec<f64>,
    length: f64,
}

/// Smallest admissible grid.
pub const MIN_POINTS: usize = 64;

impl GridFunction1D {
    pub fn new(samples: Vec<f64>, length: f64) -> Result<Self> {
        let n = samples.len();
        if n < MIN_POINTS || !n.is_power_of_two() {
            return Err(MixError::InvalidGrid(format!(
                "N = {n} must be a power of two and at least {MIN_POINTS}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(MixError::InvalidGrid(format!("domain length {length} must be positive")));
        }
        if let Some(site) = samples.iter().position(|v| !v.is_finite()) {
            return Err(MixError::NonFinite { site, what: "sample" });
        }
        Ok(Self { samples, length })
    }

    pub fn from_fn(n: usize, length: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = length / n as f64;
        let samples = (0..n).map(|j| f(-0.5 * length + j as f64 * h)).collect();
        Self::new(samples, length)
    }

    pub fn zeros(n: usize, length: f64) -> Result<Self> {
        Self::new(vec![0.0; n], length)
    }

    /// Same grid, new samples. Panics on length mismatch.
    pub fn with_samples(&self, samples: Vec<f64>) -> Self {
        assert_eq!(samples.len(), self.samples.len());
        Self { samples, length: self.length }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn h(&self) -> f64 {
        self.length / self.samples.len() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.h()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.len() == other.len() && self.length == other.length
    }

    /// Discrete L² norm (h Σ f_j²)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        (self.h() * self.samples.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// k-th spectral derivative. Odd orders drop the Nyquist mode.
    pub fn derivative(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        let n = self.len();
        let mut c = forward_fft(&self.samples);
        for (i, ci) in c.iter_mut().enumerate() {
            let k = mode_of(i, n);
            if order % 2 == 1 && 2 * i == n {
                *ci = Complex64::new(0.0, 0.0);
                continue;
            }
            let factor = Complex64::new(0.0, 2.0 * PI * k as f64 / self.length).powu(order);
            *ci *= factor;
        }
        self.with_samples(inverse_fft_real(&c))
    }

    /// Elementwise combination of two samples on the same grid.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(self.same_grid(other));
        self.with_samples(self.samples.iter().zip(&other.samples).map(|(a, b)| f(*a, *b)).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_samples(self.samples.iter().map(|v| f(*v)).collect())
    }
}

/// Integer mode of FFT slot `i` (Nyquist slot maps to +N/2).
pub fn mode_of(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|p| {
        let mut p = p.borrow_mut();
        let (planner, cache) = &mut *p;
        cache
            .entry((n, forward))
            .or_insert_with(|| {
                if forward {
                    planner.plan_fft_forward(n)
                } else {
                    planner.plan_fft_inverse(n)
                }
            })
            .clone()
    })
}

/// c_k = (1/N) Σ_j f_j e^{-2πi jk/N}, in FFT slot order.
pub fn forward_fft(samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_fft_complex(&mut buf);
    buf
}

pub fn forward_fft_complex(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, true).process(buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// f_j = Σ_k c_k e^{2πi jk/N}.
pub fn inverse_fft_complex(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

/// Inverse transform keeping the real part.
pub fn inverse_fft_real(coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    inverse_fft_complex(&mut buf);
    buf.into_iter().map(|v| v.re).collect()
}

/// Number of points in local Lagrange interpolation stencils.
pub const STENCIL: usize = 12;

/// Local Lagrange interpolation stencil for a point at fractional grid
/// position `u` (in units of h from x_0): returns the first stencil index
/// (unwrapped) and the weights.
pub fn lagrange_stencil(u: f64) -> (i64, [f64; STENCIL]) {
    let base = u.floor() as i64 - (STENCIL as i64 / 2 - 1);
    let t = u - base as f64;
    let mut w = [0.0; STENCIL];
    for (i, wi) in w.iter_mut().enumerate() {
        let mut num = 1.0;
        let mut den = 1.0;
        for k in 0..STENCIL {
            if k != i {
                num *= t - k as f64;
                den *= i as f64 - k as f64;
            }
        }
        *wi = num / den;
    }
    (base, w)
}

/// Applies a stencil to periodic samples.
#[inline]
pub fn apply_stencil(samples: &[f64], base: i64, w: &[f64; STENCIL]) -> f64 {
    let n = samples.len() as i64;
    let mut acc = 0.0;
    for (i, wi) in w.iter().enumerate() {
        let idx = (base + i as i64).rem_euclid(n) as usize;
        acc += wi * samples[idx];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(GridFunction1D::zeros(100, 1.0).is_err());
        assert!(GridFunction1D::zeros(32, 1.0).is_err());
        assert!(GridFunction1D::zeros(64, 0.0).is_err());
        assert!(GridFunction1D::new(vec![f64::NAN; 64], 1.0).is_err());
    }

    #[test]
    fn spectral_derivative_of_mode() {
        let l = 10.0;
        let k = 3.0;
        let g = GridFunction1D::from_fn(128, l, |x| (2.0 * PI * k * x / l).sin()).unwrap();
        let d = g.derivative(1);
        let d2 = g.derivative(2);
        for j in 0..128 {
            let x = g.x(j);
            let w = 2.0 * PI * k / l;
            assert!((d.samples()[j] - w * (w * x).cos()).abs() < 1e-12);
            assert!((d2.samples()[j] + w * w * (w * x).sin()).abs() < 1e-11);
        }
    }

    #[test]
    fn fft_round_trip() {
        let g = GridFunction1D::from_fn(256, 7.0, |x| (-(x * x)).exp() + 0.3 * x.sin()).unwrap();
        let back = inverse_fft_real(&forward_fft(g.samples()));
        for (a, b) in back.iter().zip(g.samples()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn lagrange_reproduces_polynomials_and_nodes() {
        let samples: Vec<f64> = (0..64).map(|j| (j as f64 - 30.0).powi(5) * 1e-6).collect();
        for u in [30.0, 30.25, 31.7, 29.999] {
            let (b, w) = lagrange_stencil(u);
            let got = apply_stencil(&samples, b, &w);
            let exact = (u - 30.0).powi(5) * 1e-6;
            assert!((got - exact).abs() < 1e-12, "u={u}");
        }
        let (b, w) = lagrange_stencil(7.0);
        assert_eq!(apply_stencil(&samples, b, &w), samples[7]);
    }
}
