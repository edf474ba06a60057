//! Fourier-side operators: the transform of the frozen kernel, the damping
//! exponent H, the symbols m and m̃, the smoothing multipliers 𝒟⁻¹ and D⁻¹,
//! the x-dependent operator m̃𝒟⁻¹ and the weighted energy.
//!
//! Conventions: ξ_k = k/L, f(x_j) = Σ_k c_k e^{2πi jk/N}; the Nyquist slot is
//! treated as k = +N/2.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, MixError, Result};
use crate::grid::{forward_fft, inverse_fft_complex, mode_of, GridFunction1D};
use crate::quadrature::adaptive_gk;

/// Complex Fourier coefficients of a periodic field, in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub coeffs: Vec<Complex64>,
    pub domain_length: f64,
}

impl SpectralField {
    pub fn from_grid(f: &GridFunction1D) -> Self {
        Self { coeffs: forward_fft(f.samples()), domain_length: f.length() }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mode(&self, i: usize) -> i64 {
        mode_of(i, self.len())
    }

    pub fn freq(&self, i: usize) -> f64 {
        self.mode(i) as f64 / self.domain_length
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.freq(i)).collect()
    }

    /// Complex samples of the synthesized field.
    pub fn synthesize(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        inverse_fft_complex(&mut buf);
        buf
    }

    /// Real part of the synthesized field on the grid.
    pub fn to_grid(&self) -> Result<GridFunction1D> {
        GridFunction1D::new(self.synthesize().into_iter().map(|v| v.re).collect(), self.domain_length)
    }

    /// L² norm over one period, (L Σ|c_k|²)^{1/2}.
    pub fn l2_norm(&self) -> f64 {
        (self.domain_length * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Largest defect |c_{−k} − conj(c_k)| relative to the largest coefficient.
    pub fn conjugate_defect(&self) -> (i64, f64) {
        let n = self.len();
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm())).max(1e-300);
        let mut worst = (0, 0.0);
        for i in 0..n {
            let j = (n - i) % n;
            let d = if j == i {
                self.coeffs[i].im.abs()
            } else {
                (self.coeffs[j] - self.coeffs[i].conj()).norm()
            } / scale;
            if d > worst.1 {
                worst = (self.mode(i), d);
            }
        }
        worst
    }
}

/// Pointwise product with `sym(ξ)`.
pub fn apply_multiplier(field: &SpectralField, sym: impl Fn(f64) -> Complex64) -> SpectralField {
    let coeffs = field.coeffs.iter().enumerate().map(|(i, c)| c * sym(field.freq(i))).collect();
    SpectralField { coeffs, domain_length: field.domain_length }
}

const SYMMETRY_TOL: f64 = 1e-12;

/// Multiplier application that keeps a real field real.
///
/// The input must be conjugate symmetric and the symbol Hermitian,
/// sym(−ξ) = conj(sym(ξ)); either defect beyond 1e−12 is reported. The
/// Nyquist slot, which is its own mirror, gets Re sym(ξ_{N/2}).
pub fn apply_real_multiplier(field: &SpectralField, sym: impl Fn(f64) -> Complex64) -> Result<SpectralField> {
    let (mode, defect) = field.conjugate_defect();
    if defect > SYMMETRY_TOL {
        return Err(MixError::Symmetry { mode, defect });
    }
    let n = field.len();
    let mut coeffs = Vec::with_capacity(n);
    for (i, c) in field.coeffs.iter().enumerate() {
        let xi = field.freq(i);
        let s = sym(xi);
        let mirror = sym(-xi);
        let d = (mirror - s.conj()).norm() / s.norm().max(1.0);
        if d > SYMMETRY_TOL {
            return Err(MixError::Symmetry { mode: field.mode(i), defect: d });
        }
        let s = if 2 * i == n { Complex64::new(s.re, 0.0) } else { s };
        coeffs.push(c * s);
    }
    Ok(SpectralField { coeffs, domain_length: field.domain_length })
}

/// 𝒟⁻¹: multiplier 1/(1 + t|ξ|).
pub fn apply_dinv(field: &SpectralField, t: f64) -> SpectralField {
    apply_multiplier(field, |xi| Complex64::new(1.0 / (1.0 + t * xi.abs()), 0.0))
}

/// 𝒟 = (1 + t|ξ|), the inverse of [`apply_dinv`].
pub fn apply_d(field: &SpectralField, t: f64) -> SpectralField {
    apply_multiplier(field, |xi| Complex64::new(1.0 + t * xi.abs(), 0.0))
}

/// D⁻¹ = (1 + t∂_x)⁻¹: multiplier 1/(1 + 2πitξ).
pub fn apply_dinv_complex(field: &SpectralField, t: f64) -> SpectralField {
    apply_multiplier(field, |xi| 1.0 / Complex64::new(1.0, 2.0 * PI * t * xi))
}

/// D = 1 + t∂_x.
pub fn apply_d_complex(field: &SpectralField, t: f64) -> SpectralField {
    apply_multiplier(field, |xi| Complex64::new(1.0, 2.0 * PI * t * xi))
}

/// Re[1 − (1 − e^{−z})/z] for z = b/(1 + iA), b ≥ 0.
///
/// This is the bracket 1 + (e^{−bσ}(cos(bσA) − A sin(bσA)) − 1)/b with
/// σ = 1/(1+A²), written through the complex exponential and expanded in
/// series for small |z| to avoid cancellation.
pub fn damping_bracket(b: f64, a: f64) -> f64 {
    let z = Complex64::new(b, 0.0) / Complex64::new(1.0, a);
    if z.norm() < 0.1 {
        // z/2 − z²/6 + z³/24 − …
        let mut term = z;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut fact = 2.0;
        for k in 0..12 {
            sum += term / fact;
            term *= -z;
            fact *= (k + 3) as f64;
        }
        sum.re
    } else {
        (1.0 - (1.0 - (-z).exp()) / z).re
    }
}

/// K̂_A(ξ) in closed form.
pub fn k_hat(a: f64, xi: f64, eps: f64) -> Result<Complex64> {
    if xi == 0.0 {
        return Err(invalid("xi", "the zero frequency is excluded"));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    let s = xi.abs() * eps;
    let bracket = damping_bracket(4.0 * PI * s, a);
    Ok(Complex64::new(0.0, -xi.signum()) * (bracket / (2.0 * PI * s)))
}

/// Series cutoff for the removable singularity of the H integrand.
pub const TAU_SERIES: f64 = 1e-3;

/// Integrand of H: (1/τ)·bracket(4πτ, A).
pub fn h_integrand(tau: f64, a: f64) -> f64 {
    if tau == 0.0 {
        return 2.0 * PI / (1.0 + a * a);
    }
    if tau < TAU_SERIES {
        return h_integrand_series(tau, a);
    }
    let sigma = 1.0 / (1.0 + a * a);
    let b = 4.0 * PI * tau;
    let arg = b * sigma * a;
    (1.0 + ((-b * sigma).exp() * (arg.cos() - a * arg.sin()) - 1.0) / b) / tau
}

// 4πw(1/2 − z/6 + z²/24 − z³/120) with w = 1/(1+iA), z = 4πτw
fn series_coeffs(a: f64) -> [Complex64; 4] {
    let w = Complex64::new(1.0, 0.0) / Complex64::new(1.0, a);
    let q = 4.0 * PI * w;
    [q / 2.0, -q * q / 6.0, q * q * q / 24.0, -q * q * q * q / 120.0]
}

fn h_integrand_series(tau: f64, a: f64) -> f64 {
    let c = series_coeffs(a);
    (c[0] + tau * (c[1] + tau * (c[2] + tau * c[3]))).re
}

fn h_series_integral(s: f64, a: f64) -> f64 {
    let c = series_coeffs(a);
    (s * (c[0] + s * (c[1] / 2.0 + s * (c[2] / 3.0 + s * c[3] / 4.0)))).re
}

const H_TOL: f64 = 1e-14;

fn h_piece(lo: f64, hi: f64, a: f64) -> f64 {
    // in the variable u = ln τ the integrand τ·I(τ) is smooth and O(1)
    adaptive_gk(|u| { let tau = u.exp(); tau * h_integrand(tau, a) }, lo.ln(), hi.ln(), H_TOL, H_TOL, 500).value
}

/// H(s, A) = ∫_0^s h_integrand(τ, A) dτ.
pub fn h_integral(s: f64, a: f64) -> f64 {
    assert!(s >= 0.0, "H is defined for s >= 0");
    if s <= TAU_SERIES {
        return h_series_integral(s, a);
    }
    h_series_integral(TAU_SERIES, a) + h_piece(TAU_SERIES, s, a)
}

/// H at an increasing list of arguments, integrating piece by piece.
pub fn h_integral_sorted(s: &[f64], a: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(s.len());
    let mut prev = 0.0;
    let mut acc = 0.0;
    for &si in s {
        assert!(si >= prev, "arguments must be nondecreasing and nonnegative");
        if si > prev {
            acc += if si <= TAU_SERIES {
                h_series_integral(si, a) - h_series_integral(prev, a)
            } else if prev < TAU_SERIES {
                h_series_integral(TAU_SERIES, a) - h_series_integral(prev, a) + h_piece(TAU_SERIES, si, a)
            } else {
                h_piece(prev, si, a)
            };
        }
        out.push(acc);
        prev = si;
    }
    out
}

/// m = e^{−H(t|ξ|, A)}.
pub fn symbol_m(xi: f64, a: f64, t: f64) -> f64 {
    (-h_integral(t * xi.abs(), a)).exp()
}

/// m̃ = (1 + t|ξ|)·e^{−H(t|ξ|, A)}.
pub fn symbol_mtilde(xi: f64, a: f64, t: f64) -> f64 {
    let s = t * xi.abs();
    (s.ln_1p() - h_integral(s, a)).exp()
}

/// m̃(ξ_k, x_j, t) for the nonnegative modes k = 0..=N/2 at every site.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    /// Row-major over sites: values[j * modes + k].
    pub values: Vec<f64>,
    pub modes: usize,
    pub slope: Vec<f64>,
    pub t: f64,
    pub domain_length: f64,
}

impl SymbolTable {
    pub fn new(slope: &GridFunction1D, t: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(invalid("t", "must be nonnegative"));
        }
        let n = slope.len();
        let modes = n / 2 + 1;
        let l = slope.length();
        let s: Vec<f64> = (0..modes).map(|k| t * k as f64 / l).collect();
        let rows: Vec<Vec<f64>> = slope
            .samples()
            .par_iter()
            .map(|&a| {
                h_integral_sorted(&s, a)
                    .iter()
                    .zip(&s)
                    .map(|(h, si)| (si.ln_1p() - h).exp())
                    .collect()
            })
            .collect();
        Ok(Self { values: rows.concat(), modes, slope: slope.samples().to_vec(), t, domain_length: l })
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.values[j * self.modes + k]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values.iter().fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
    }

    /// Direct mode sum of m̃(ξ, x_j)·ĝ(ξ) at every site, ĝ conjugate symmetric.
    pub fn apply(&self, g: &SpectralField) -> Vec<f64> {
        let n = g.len();
        assert_eq!(n / 2 + 1, self.modes);
        let twiddle: Vec<Complex64> =
            (0..n).map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / n as f64)).collect();
        (0..n)
            .into_par_iter()
            .map(|j| {
                let row = &self.values[j * self.modes..(j + 1) * self.modes];
                let mut acc = g.coeffs[0].re * row[0];
                for k in 1..n / 2 {
                    let ph = twiddle[(j * k) % n];
                    acc += 2.0 * row[k] * (g.coeffs[k] * ph).re;
                }
                let ny = n / 2;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc + row[ny] * g.coeffs[ny].re * sign
            })
            .collect()
    }
}

fn check_pair(f: &GridFunction1D, a: &GridFunction1D) -> Result<()> {
    if !f.same_grid(a) {
        return Err(invalid("A", "field and slope must share a grid"));
    }
    Ok(())
}

/// m̃𝒟⁻¹F by direct summation over modes at every site.
pub fn apply_mtilde_dinv(f: &GridFunction1D, a: &GridFunction1D, t: f64) -> Result<GridFunction1D> {
    check_pair(f, a)?;
    let table = SymbolTable::new(a, t)?;
    let g = apply_dinv(&SpectralField::from_grid(f), t);
    GridFunction1D::new(table.apply(&g), f.length())
}

/// Fast path for m̃𝒟⁻¹F: Chebyshev interpolation in the slope variable.
///
/// The symbol depends on x only through A(x); the operator is applied with an
/// FFT at `nodes` Chebyshev slopes spanning the range of A and the results are
/// interpolated to A(x_j) with the barycentric formula.
pub fn apply_mtilde_dinv_fast(
    f: &GridFunction1D,
    a: &GridFunction1D,
    t: f64,
    nodes: usize,
) -> Result<GridFunction1D> {
    check_pair(f, a)?;
    if nodes < 2 {
        return Err(invalid("nodes", "need at least two interpolation nodes"));
    }
    let g = apply_dinv(&SpectralField::from_grid(f), t);
    let n = f.len();
    let l = f.length();
    let s: Vec<f64> = (0..=n / 2).map(|k| t * k as f64 / l).collect();
    let (lo, hi) = a.samples().iter().fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let apply_at = |slope: f64| -> Vec<f64> {
        let h = h_integral_sorted(&s, slope);
        let mut c = g.coeffs.clone();
        for (i, ci) in c.iter_mut().enumerate() {
            let k = mode_of(i, n).unsigned_abs() as usize;
            *ci *= (s[k].ln_1p() - h[k]).exp();
        }
        inverse_fft_complex(&mut c);
        c.into_iter().map(|v| v.re).collect()
    };
    if hi - lo < 1e-14 {
        return GridFunction1D::new(apply_at(0.5 * (lo + hi)), l);
    }
    // Chebyshev points of the second kind on [lo, hi]
    let xs: Vec<f64> = (0..nodes)
        .map(|q| 0.5 * (lo + hi) - 0.5 * (hi - lo) * (PI * q as f64 / (nodes - 1) as f64).cos())
        .collect();
    let vals: Vec<Vec<f64>> = xs.par_iter().map(|&x| apply_at(x)).collect();
    let bw: Vec<f64> = (0..nodes)
        .map(|q| {
            let sgn = if q % 2 == 0 { 1.0 } else { -1.0 };
            if q == 0 || q == nodes - 1 { 0.5 * sgn } else { sgn }
        })
        .collect();
    let out = a
        .samples()
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let mut num = 0.0;
            let mut den = 0.0;
            for q in 0..nodes {
                let d = x - xs[q];
                if d == 0.0 {
                    return vals[q][j];
                }
                let w = bw[q] / d;
                num += w * vals[q][j];
                den += w;
            }
            num / den
        })
        .collect();
    GridFunction1D::new(out, l)
}

/// ‖m̃𝒟⁻¹F‖²_{L²}.
pub fn energy(f: &GridFunction1D, a: &GridFunction1D, t: f64) -> Result<f64> {
    let g = apply_mtilde_dinv(f, a, t)?;
    let n = g.l2_norm();
    Ok(n * n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoercivityReport {
    pub worst_ratio: f64,
    pub mean_ratio: f64,
    pub trials: usize,
    /// Range of m̃ over the symbol table.
    pub symbol_min: f64,
    pub symbol_max: f64,
}

/// Default spectral envelope scale for random smooth probe fields (1/length).
pub const PROBE_CUTOFF: f64 = 1.0;

/// Random smooth F with Gaussian spectral envelope e^{−(ξ/cutoff)²}.
pub fn random_smooth_field(n: usize, length: f64, cutoff: f64, rng: &mut ChaCha8Rng) -> Result<GridFunction1D> {
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..n / 2 {
        let xi = k as f64 / length;
        let amp = (-(xi / cutoff).powi(2)).exp();
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c[k] = Complex64::new(re, im) * amp;
        c[n - k] = c[k].conj();
    }
    let mut buf = c;
    inverse_fft_complex(&mut buf);
    GridFunction1D::new(buf.into_iter().map(|v| v.re).collect(), length)
}

/// Worst ratio ‖m̃𝒟⁻¹F‖/‖𝒟⁻¹F‖ over `trials` random smooth fields.
pub fn coercivity_probe(a: &GridFunction1D, t: f64, trials: usize, seed: u64, cutoff: f64) -> Result<CoercivityReport> {
    if trials < 10 {
        return Err(invalid("trials", format!("need at least 10, got {trials}")));
    }
    let table = SymbolTable::new(a, t)?;
    let (symbol_min, symbol_max) = table.min_max();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut sum = 0.0;
    for _ in 0..trials {
        let f = random_smooth_field(a.len(), a.length(), cutoff, &mut rng)?;
        let g = apply_dinv(&SpectralField::from_grid(&f), t);
        let weighted = GridFunction1D::new(table.apply(&g), a.length())?;
        let ratio = weighted.l2_norm() / g.l2_norm();
        worst = worst.min(ratio);
        sum += ratio;
    }
    Ok(CoercivityReport { worst_ratio: worst, mean_ratio: sum / trials as f64, trials, symbol_min, symbol_max })
}
