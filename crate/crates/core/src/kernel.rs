//! The double-averaged interface kernel K_ε, its frozen-slope form K_A, the
//! transport coefficient a(x), and the K̃ / K̃_c kernels with their L¹ norms.
//!
//! K_ε(dx, Δf) = 1/(4πε²) ∫∫_{[-ε,ε]²} dx / (dx² + (Δf + λ − λ')²) dλ dλ'.
//! With g(a) = a·atan(a/dx) − (dx/2)·log(dx² + a²) one has g'' = dx/(dx² + a²), so
//! the double integral is the centred second difference of g with step 2ε.

use std::f64::consts::{FRAC_1_PI, PI};

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid::GridFunction1D;
use crate::pv::{PvLayout, PvOptions};
use crate::quadrature::{adaptive_gk, graded_breaks, merge_breaks, GaussLegendre};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelParams {
    pub eps: f64,
    pub kappa: f64,
    pub trunc_radius: f64,
}

impl KernelParams {
    pub fn new(eps: f64, kappa: f64, trunc_radius: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid("eps", format!("must be positive, got {eps}")));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(invalid("kappa", format!("must be nonnegative, got {kappa}")));
        }
        if !(trunc_radius >= 10.0 * eps) {
            return Err(invalid("trunc_radius", format!("must be at least 10·eps, got {trunc_radius}")));
        }
        Ok(Self { eps, kappa, trunc_radius })
    }

    /// Width actually used by the kernel, ε + κ.
    pub fn width(&self) -> f64 {
        self.eps + self.kappa
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub dx: f64,
    pub delta_f: f64,
    pub slope_a: f64,
}

impl KernelPoint {
    pub fn new(dx: f64, delta_f: f64) -> Self {
        Self { dx, delta_f, slope_a: if dx != 0.0 { delta_f / dx } else { 0.0 } }
    }
}

fn antideriv(a: f64, x: f64) -> f64 {
    a * (a / x).atan() - 0.5 * x * (x * x + a * a).ln()
}

/// g(a + e) − g(a) without cancellation.
#[inline]
fn forward_step(a: f64, e: f64, x: f64) -> f64 {
    let ax = x.abs();
    let r2 = x * x + a * a;
    // atan((a+e)/x) − atan(a/x), written as one angle
    let dtheta = (e * ax).atan2(x * x + a * (a + e)) * x.signum();
    let q = e * (2.0 * a + e) / r2;
    let log_ratio = if q > -0.5 { q.ln_1p() } else { ((x * x + (a + e) * (a + e)) / r2).ln() };
    a * dtheta + e * ((a + e) / x).atan() - 0.5 * x * log_ratio
}

/// K_ε(dx, Δf) in closed form with the 1/(4πε²) normalization.
///
/// Evaluated as g(Δf+2ε) − 2g(Δf) + g(Δf−2ε) through grouped forward steps,
/// which avoids the large cancelling logarithms of the literal expansion when
/// |dx| ≫ ε. Returns 0 at dx = 0.
pub fn kernel_closed_form(p: KernelPoint, eps: f64) -> f64 {
    let x = p.dx;
    if x == 0.0 {
        return 0.0;
    }
    let a = p.delta_f;
    let e = 2.0 * eps;
    (forward_step(a, e, x) - forward_step(a - e, e, x)) / (4.0 * PI * eps * eps)
}

/// Term-by-term expansion of the closed form (single-argument arctangents).
pub fn kernel_closed_form_literal(p: KernelPoint, eps: f64) -> f64 {
    let x = p.dx;
    if x == 0.0 {
        return 0.0;
    }
    let a = p.delta_f;
    let e = 2.0 * eps;
    (antideriv(a + e, x) + antideriv(a - e, x) - 2.0 * antideriv(a, x)) / (4.0 * PI * eps * eps)
}

/// Inner λ' average: (1/2ε)∫_{-ε}^{ε} dx/(dx² + (D − λ')²) dλ'.
#[inline]
pub fn lambda_average(dx: f64, d: f64, eps: f64) -> f64 {
    if dx == 0.0 {
        return 0.0;
    }
    let ax = dx.abs();
    // atan((d+ε)/dx) − atan((d−ε)/dx)
    let angle = (2.0 * eps * ax).atan2(dx * dx + (d + eps) * (d - eps)) * dx.signum();
    angle / (2.0 * eps)
}

/// W(D) = g(D+ε) − g(D−ε), the λ-antiderivative of 2ε·[`lambda_average`].
#[inline]
pub fn lambda_average_antideriv(dx: f64, d: f64, eps: f64) -> f64 {
    if dx == 0.0 {
        return 0.0;
    }
    forward_step(d - eps, 2.0 * eps, dx)
}

/// ∫_a^b [`lambda_average`](dx, p + λ, ε) dλ, written as two forward steps so
/// that short intervals keep their relative accuracy.
pub fn lambda_average_integral(dx: f64, p: f64, a: f64, b: f64, eps: f64) -> f64 {
    if dx == 0.0 || a == b {
        return 0.0;
    }
    (forward_step(p + a + eps, b - a, dx) - forward_step(p + a - eps, b - a, dx)) / (2.0 * eps)
}

/// Tensor Gauss–Legendre evaluation of the double λ, λ' average.
///
/// Panels are graded geometrically toward the near-singular lines of the
/// integrand (inner: λ' = Δf + λ; outer: λ = −Δf ± ε) down to width |dx|/4;
/// `nodes` is the order on each panel.
pub fn kernel_quadrature_oracle(p: KernelPoint, eps: f64, nodes: usize) -> Result<f64> {
    if nodes < 8 {
        return Err(invalid("nodes", format!("need at least 8, got {nodes}")));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    let x = p.dx;
    if x == 0.0 {
        return Ok(0.0);
    }
    let gl = GaussLegendre::new(nodes);
    let fine = (0.25 * x.abs()).min(eps);
    let outer = merge_breaks(&[
        graded_breaks(-eps, eps, -p.delta_f - eps, fine, 4.0),
        graded_breaks(-eps, eps, -p.delta_f + eps, fine, 4.0),
    ]);
    let total = gl.integrate_panels(&outer, |lam| {
        let c = p.delta_f + lam;
        let inner = graded_breaks(-eps, eps, c, fine, 4.0);
        gl.integrate_panels(&inner, |lp| {
            let s = c - lp;
            x / (x * x + s * s)
        })
    });
    Ok(total / (4.0 * PI * eps * eps))
}

/// The ε → 0 limit (1/π)·dx/(dx² + Δf²).
pub fn muskat_limit(dx: f64, delta_f: f64) -> f64 {
    if dx == 0.0 {
        return 0.0;
    }
    FRAC_1_PI * dx / (dx * dx + delta_f * delta_f)
}

/// Frozen-slope kernel K_A(y) = K_ε(dx = y, Δf = A·y).
pub fn kernel_frozen(a: f64, y: f64, eps: f64) -> f64 {
    kernel_closed_form(KernelPoint { dx: y, delta_f: a * y, slope_a: a }, eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientA {
    pub value: f64,
    /// Bound on the omitted |y| > R part of the principal value.
    pub tail_estimate: f64,
}

/// a(x_j) = −P.V.∫_{|y|≤R} K_{ε+κ}(x_j, y) dy.
pub fn coefficient_a(f: &GridFunction1D, params: &KernelParams, index: usize) -> Result<CoefficientA> {
    if index >= f.len() {
        return Err(invalid("index", format!("{index} outside grid of {}", f.len())));
    }
    let width = params.width();
    let lay = PvLayout::new(f.len(), f.h(), params.trunc_radius, width, PvOptions::default());
    let fs = f.samples();
    let fx = fs[index];
    let [v] = lay.integrate(index, fs, fs, |d, fy, _| {
        [kernel_closed_form(KernelPoint::new(d, fx - fy), width)]
    });
    let radius = params.trunc_radius.min(0.5 * f.length());
    let osc = fs.iter().cloned().fold(f64::MIN, f64::max) - fs.iter().cloned().fold(f64::MAX, f64::min);
    // paired tail: |K(d)+K(−d)| ≲ (1/π)(osc² + ε²)/d³
    let tail_estimate = FRAC_1_PI * (osc * osc + 4.0 * width * width) / (radius * radius);
    Ok(CoefficientA { value: -v, tail_estimate })
}

fn arc_part(a: f64, yp: f64) -> f64 {
    -2.0 * a.atan() + (a - 2.0 / yp).atan() + (a + 2.0 / yp).atan()
}

/// K̃(A; y, t), the frozen kernel with the mixing width replaced by t.
pub fn ktilde(a: f64, y: f64, t: f64) -> f64 {
    let yp = y / t;
    let logs = (yp * yp * (1.0 + a * a)).ln()
        - 0.5 * (yp * yp + (a * yp - 2.0).powi(2)).ln()
        - 0.5 * (yp * yp + (a * yp + 2.0).powi(2)).ln();
    (a * arc_part(a, yp) + logs) / (4.0 * PI * t * t)
}

/// K̃_c = K̃(A) − K̃(0), the slope-dependent part.
pub fn ktilde_c(a: f64, y: f64, t: f64) -> f64 {
    let yp = y / t;
    let y2 = yp * yp;
    // grouped to cancel the common log y² singularity
    let logs = (1.0 + a * a).ln() + (y2 + 4.0).ln()
        - 0.5 * (y2 + (a * yp - 2.0).powi(2)).ln()
        - 0.5 * (y2 + (a * yp + 2.0).powi(2)).ln();
    (a * arc_part(a, yp) + logs) / (4.0 * PI * t * t)
}

/// ∂_A K̃(A; y, t).
pub fn ktilde_da(a: f64, y: f64, t: f64) -> f64 {
    let yp = y / t;
    let y2 = yp * yp;
    let s = 1.0 + a * a;
    let rational = 16.0 * a * y2 / (16.0 - 8.0 * (a * a - 1.0) * y2 + s * s * y2 * y2);
    (arc_part(a, yp) + rational) / (4.0 * PI * t * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L1Estimate {
    pub value: f64,
    pub quadrature_error: f64,
    pub tail_bound: f64,
}

impl L1Estimate {
    pub fn upper(&self) -> f64 {
        self.value + self.quadrature_error + self.tail_bound
    }
}

fn even_l1(g: impl Fn(f64) -> f64, t: f64) -> L1Estimate {
    // both kernels decay like y^{-2}; integrate on (0, Y] and bound the rest
    let y_max = 1e4 * t;
    let breaks = graded_breaks(0.0, y_max, 0.0, 1e-3 * t, 2.0);
    let mut value = 0.0;
    let mut err = 0.0;
    for w in breaks.windows(2) {
        let r = adaptive_gk(|y| t * g(y).abs(), w[0], w[1], 1e-15, 1e-12, 200);
        value += r.value;
        err += r.error;
    }
    let tail = 2.0 * y_max * t * g(y_max).abs();
    L1Estimate { value: 2.0 * value, quadrature_error: 2.0 * err, tail_bound: 2.0 * tail }
}

/// ∫_ℝ t·|K̃_c(A; y, t)| dy.
pub fn ktilde_c_l1(a: f64, t: f64) -> L1Estimate {
    even_l1(|y| ktilde_c(a, y, t), t)
}

/// ∫_ℝ t·|∂_A K̃(A; y, t)| dy.
pub fn ktilde_da_l1(a: f64, t: f64) -> L1Estimate {
    even_l1(|y| ktilde_da(a, y, t), t)
}
