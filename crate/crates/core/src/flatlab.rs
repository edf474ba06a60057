//! Closed-form mixing zones around a straight interface with unit tangent
//! t = (μ₁, μ₂)/|μ|, in the stable (σ > 0) and unstable (σ < 0) regimes.
//!
//! Coordinates are x = s·t + λ·t^⊥ with t^⊥ = (−t₂, t₁), ρ = −sign(σ)·λ/ε and
//! ε = c·t. With the relaxed flux written as
//! m = ρu − γ(1 − ρ²)ν − ½(1 − ρ²)(0, 1), the choice ν = −t^⊥ makes the
//! transport equation ∂_t ρ + ∇·m = 0 hold with γ = ½(t₁ + sign(σ)·c).

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::subsolution::{choose_m, hull_check, HullMargin, SubsolutionSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatConfig {
    pub mu1: f64,
    pub mu2: f64,
    /// +1 stable, −1 unstable.
    pub sigma_sign: f64,
    pub c: f64,
}

impl FlatConfig {
    pub fn new(mu1: f64, mu2: f64, sigma_sign: f64, c: f64) -> Result<Self> {
        check_direction(mu1, mu2, sigma_sign)?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid("c", format!("growth rate must be positive, got {c}")));
        }
        Ok(Self { mu1, mu2, sigma_sign, c })
    }

    pub fn tangent(&self) -> [f64; 2] {
        let r = self.mu1.hypot(self.mu2);
        [self.mu1 / r, self.mu2 / r]
    }

    /// Coordinate normal t^⊥.
    pub fn normal(&self) -> [f64; 2] {
        let t = self.tangent();
        [-t[1], t[0]]
    }
}

fn check_direction(mu1: f64, mu2: f64, sigma_sign: f64) -> Result<()> {
    if !(mu1 >= 0.0) || !mu2.is_finite() || (mu1 == 0.0 && mu2 == 0.0) {
        return Err(invalid("mu", "need mu1 ≥ 0 and (mu1, mu2) ≠ (0, 0)"));
    }
    if sigma_sign != 1.0 && sigma_sign != -1.0 {
        return Err(invalid("sigma_sign", "must be +1 (stable) or -1 (unstable)"));
    }
    Ok(())
}

/// γ = ½(μ₁/|μ| + sign(σ)·c).
pub fn flat_gamma(cfg: &FlatConfig) -> f64 {
    0.5 * (cfg.tangent()[0] + cfg.sigma_sign * cfg.c)
}

/// Open interval of growth rates with |γ| < ½: (0, 1 ∓ μ₁/|μ|), or `None`
/// when it is empty (stable horizontal interface).
pub fn flat_admissible_c(mu1: f64, mu2: f64, sigma_sign: f64) -> Result<Option<(f64, f64)>> {
    check_direction(mu1, mu2, sigma_sign)?;
    let t1 = mu1 / mu1.hypot(mu2);
    let hi = 1.0 - sigma_sign * t1;
    Ok((hi > 0.0).then_some((0.0, hi)))
}

/// Fields at normal offset λ with |λ| ≤ ε.
pub fn flat_fields(cfg: &FlatConfig, eps: f64, s: f64, lambda: f64) -> Result<SubsolutionSample> {
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    if !(lambda.abs() <= eps) {
        return Err(invalid("lambda", format!("|λ| = {} exceeds ε = {eps}", lambda.abs())));
    }
    Ok(fields_with_gamma(cfg, eps, s, lambda, flat_gamma(cfg)))
}

fn fields_with_gamma(cfg: &FlatConfig, eps: f64, s: f64, lambda: f64, gamma: f64) -> SubsolutionSample {
    let t = cfg.tangent();
    let n = cfg.normal();
    let rho = -cfg.sigma_sign * lambda / eps;
    let speed = -t[1] * rho;
    let u = [speed * t[0], speed * t[1]];
    let open = 1.0 - rho * rho;
    // γ-term along −t^⊥
    let m = [
        rho * u[0] + gamma * open * n[0],
        rho * u[1] + gamma * open * n[1] - 0.5 * open,
    ];
    SubsolutionSample { site: None, s, lambda, rho, u, m, gamma }
}

/// (s, λ) of the point x.
pub fn flat_coords(cfg: &FlatConfig, x: [f64; 2]) -> (f64, f64) {
    let t = cfg.tangent();
    let n = cfg.normal();
    (x[0] * t[0] + x[1] * t[1], x[0] * n[0] + x[1] * n[1])
}

/// (ρ, m) at a point and time; outside the zone the pure phases with m = 0.
fn density_flux(cfg: &FlatConfig, gamma: f64, x: [f64; 2], time: f64) -> (f64, [f64; 2]) {
    let eps = cfg.c * time;
    let (s, lambda) = flat_coords(cfg, x);
    if lambda.abs() > eps {
        return (-cfg.sigma_sign * lambda.signum(), [0.0, 0.0]);
    }
    let f = fields_with_gamma(cfg, eps, s, lambda, gamma);
    (f.rho, f.m)
}

/// ∂_t ρ + ∇·m at (x, time) for a trial γ, by central differences.
///
/// ρ and m are polynomials of degree two in x inside the zone, so the second
/// order spatial stencil is exact; the time derivative uses a sixth-order
/// stencil with step 2·10⁻³·time.
pub fn transport_residual(cfg: &FlatConfig, gamma: f64, x: [f64; 2], time: f64) -> f64 {
    let dt = 2e-3 * time;
    let rho_at = |tt: f64| density_flux(cfg, gamma, x, tt).0;
    let coef = [(1.0, 45.0), (2.0, -9.0), (3.0, 1.0)];
    let drho: f64 = coef.iter().map(|&(k, w)| w * (rho_at(time + k * dt) - rho_at(time - k * dt))).sum::<f64>()
        / (60.0 * dt);
    let eps = cfg.c * time;
    let hx = 1e-3 * eps;
    let m_at = |p: [f64; 2]| density_flux(cfg, gamma, p, time).1;
    let div = (m_at([x[0] + hx, x[1]])[0] - m_at([x[0] - hx, x[1]])[0]) / (2.0 * hx)
        + (m_at([x[0], x[1] + hx])[1] - m_at([x[0], x[1] - hx])[1]) / (2.0 * hx);
    drho + div
}

/// γ that zeroes the transport residual at (x, time); the residual is affine in γ.
pub fn gamma_from_transport(cfg: &FlatConfig, x: [f64; 2], time: f64) -> f64 {
    let r0 = transport_residual(cfg, 0.0, x, time);
    let r1 = transport_residual(cfg, 1.0, x, time);
    -r0 / (r1 - r0)
}

/// Graph coordinates (s_graph, vertical offset) of the point s·t + λ·t^⊥,
/// for a non-vertical line (μ₁ > 0).
pub fn flat_to_graph(cfg: &FlatConfig, s: f64, lambda: f64) -> Result<(f64, f64)> {
    let t = cfg.tangent();
    if t[0] <= 0.0 {
        return Err(invalid("mu1", "a vertical line is not a graph"));
    }
    Ok((s * t[0] - lambda * t[1], lambda / t[0]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub c: f64,
    pub gamma: f64,
    pub admissible: bool,
    /// Smallest slack over interior λ levels.
    pub min_slack: f64,
    pub margins: HullMargin,
    pub pass: bool,
}

/// Hull check of the closed-form fields for each c at `n_lambda` interior
/// levels λ ∈ (−ε, ε), with M from the sampled velocities.
pub fn flat_hull_sweep(mu1: f64, mu2: f64, sigma_sign: f64, c_samples: &[f64], n_lambda: usize) -> Result<Vec<SweepRow>> {
    if n_lambda == 0 {
        return Err(invalid("n_lambda", "need at least one level"));
    }
    let interval = flat_admissible_c(mu1, mu2, sigma_sign)?;
    let time = 1.0;
    c_samples
        .iter()
        .map(|&c| {
            let cfg = FlatConfig::new(mu1, mu2, sigma_sign, c)?;
            let eps = c * time;
            let samples = (1..=n_lambda)
                .map(|i| {
                    let frac = -1.0 + 2.0 * i as f64 / (n_lambda + 1) as f64;
                    flat_fields(&cfg, eps, 0.0, frac * eps)
                })
                .collect::<Result<Vec<_>>>()?;
            let m_bound = choose_m(&samples)?;
            let margins = samples
                .iter()
                .map(|s| hull_check(s, m_bound))
                .min_by(|a, b| a.min_slack().total_cmp(&b.min_slack()))
                .expect("at least one level");
            let min_slack = margins.min_slack();
            Ok(SweepRow {
                c,
                gamma: flat_gamma(&cfg),
                admissible: interval.is_some_and(|(lo, hi)| c > lo && c < hi),
                min_slack,
                margins,
                pass: min_slack > 0.0,
            })
        })
        .collect()
}
