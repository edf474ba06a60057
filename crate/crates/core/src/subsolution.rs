//! Candidate subsolution on the mixing zone of a graph interface y = f(s):
//! velocity, tangentially corrected velocity, γ♯, the fields (ρ, u, m) and the
//! four hull inequalities.
//!
//! Points are x(s, λ) = (s, f(s) + λ) with s at a grid site and |λ| ≤ ε.

use std::f64::consts::FRAC_1_PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::evolution::Trajectory;
use crate::grid::GridFunction1D;
use crate::kernel::{kernel_closed_form, lambda_average, lambda_average_integral, KernelPoint};
use crate::pv::{PvLayout, PvOptions};
use crate::quadrature::{graded_breaks, merge_breaks, GaussLegendre};

/// Evaluation is pulled in to |λ| ≤ (1 − LAMBDA_CLAMP)·ε.
pub const LAMBDA_CLAMP: f64 = 1e-6;
/// Relative margin of the velocity bound over 8(max|u| + 1).
pub const M_MARGIN: f64 = 1e-6;
/// Slacks below this count as violations; the band above it is quadrature noise.
pub const VIOLATION_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixCoords {
    pub site: usize,
    pub lambda: f64,
}

/// Interface data shared by all evaluations at one time.
#[derive(Debug, Clone)]
pub struct Zone {
    f: GridFunction1D,
    fp: GridFunction1D,
    eps: f64,
    opts: PvOptions,
}

impl Zone {
    pub fn new(f: &GridFunction1D, eps: f64) -> Result<Self> {
        Self::with_options(f, eps, PvOptions::default())
    }

    pub fn with_options(f: &GridFunction1D, eps: f64, opts: PvOptions) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(invalid("eps", format!("mixing half-width must be positive, got {eps}")));
        }
        Ok(Self { f: f.clone(), fp: f.derivative(1), eps, opts })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn interface(&self) -> &GridFunction1D {
        &self.f
    }

    fn check(&self, p: MixCoords) -> Result<()> {
        if p.site >= self.f.len() {
            return Err(invalid("site", format!("{} is outside the grid", p.site)));
        }
        if !(p.lambda.abs() <= self.eps) {
            return Err(invalid("lambda", format!("|λ| = {} exceeds ε = {}", p.lambda.abs(), self.eps)));
        }
        Ok(())
    }

    fn layout(&self, lambda: f64) -> PvLayout {
        // near λ = ±ε the λ' average varies on the scale ε − |λ|
        let scale = self.eps.min((self.eps - lambda.abs()).max(LAMBDA_CLAMP * self.eps));
        PvLayout::new(self.f.len(), self.f.h(), 0.5 * self.f.length(), scale, self.opts)
    }

    fn integrate<const K: usize>(
        &self,
        lay: &PvLayout,
        site: usize,
        g: impl Fn(f64, f64, f64, f64) -> [f64; K],
    ) -> [f64; K] {
        let (fs, fps) = (self.f.samples(), self.fp.samples());
        let (fx, fpx) = (fs[site], fps[site]);
        lay.integrate(site, fs, fps, |d, fy, fpy| g(d, fx - fy, fpy, fpx - fpy))
    }

    fn velocity_with(&self, lay: &PvLayout, p: MixCoords) -> [f64; 2] {
        let eps = self.eps;
        let [a, b] = self.integrate(lay, p.site, |d, df, fpy, _| {
            let w = lambda_average(d, df + p.lambda, eps);
            [w, fpy * w]
        });
        [FRAC_1_PI * a, FRAC_1_PI * b]
    }

    /// u(x(s, λ)) = (1/π) PV∫ (1, f'(x'))·(λ'-average of the Biot–Savart kernel) dx'.
    pub fn velocity(&self, p: MixCoords) -> Result<[f64; 2]> {
        self.check(p)?;
        Ok(self.velocity_with(&self.layout(p.lambda), p))
    }

    fn modified_with(&self, lay: &PvLayout, p: MixCoords) -> f64 {
        let eps = self.eps;
        let [v] = self.integrate(lay, p.site, |d, df, _, dfp| [dfp * lambda_average(d, df + p.lambda, eps)]);
        -FRAC_1_PI * v
    }

    /// u_c = u − (tangential part), which has u_c,1 = 0 for graphs.
    pub fn velocity_modified(&self, p: MixCoords) -> Result<[f64; 2]> {
        self.check(p)?;
        Ok([0.0, self.modified_with(&self.layout(p.lambda), p)])
    }

    /// ℳu₂(s) = −∫ (f'(s) − f'(x'))·K_ε(s − x', f(s) − f(x')) dx'.
    pub fn mean_velocity(&self, site: usize) -> f64 {
        let lay = PvLayout::new(self.f.len(), self.f.h(), 0.5 * self.f.length(), self.eps, self.opts);
        let eps = self.eps;
        let [v] = self.integrate(&lay, site, |d, df, _, dfp| [dfp * kernel_closed_form(KernelPoint::new(d, df), eps)]);
        -v
    }

    /// ∫_a^b u_c,2(s, λ) dλ.
    fn modified_integral(&self, lay: &PvLayout, site: usize, a: f64, b: f64) -> f64 {
        let eps = self.eps;
        let [v] = self.integrate(lay, site, |d, df, _, dfp| [dfp * lambda_average_integral(d, df, a, b, eps)]);
        -FRAC_1_PI * v
    }

    /// γ♯ at (s, λ) with ∂_t z = (0, ℳu₂(s)). The lower half integrates from
    /// −ε, the upper half from ε.
    fn gamma_with(&self, lay: &PvLayout, p: MixCoords, c: f64, mean: f64) -> f64 {
        let eps = self.eps;
        let lambda = p.lambda.clamp(-(1.0 - LAMBDA_CLAMP) * eps, (1.0 - LAMBDA_CLAMP) * eps);
        let rho = lambda / eps;
        let scale = (1.0 - rho * rho) * eps;
        let base = -(1.0 - c) / 2.0;
        if lambda <= 0.0 {
            base + (self.modified_integral(lay, p.site, -eps, lambda) - mean * (lambda + eps)) / scale
        } else {
            base - (self.modified_integral(lay, p.site, lambda, eps) - mean * (eps - lambda)) / scale
        }
    }

    pub fn gamma_sharp(&self, p: MixCoords, c: f64) -> Result<f64> {
        self.check(p)?;
        if p.lambda.abs() >= self.eps {
            return Err(invalid("lambda", "γ♯ is defined in the open zone |λ| < ε"));
        }
        check_growth_rate(c)?;
        Ok(self.gamma_with(&self.layout(p.lambda), p, c, self.mean_velocity(p.site)))
    }

    /// ∫_{−ε}^{ε} (u_c − ∂_t z)·∂_s z^⊥ dλ by Gauss–Legendre in λ over
    /// pointwise values of u_c, with panels graded toward λ = ±ε where u_c
    /// varies on the scale ε − |λ|.
    pub fn zero_mean_residual(&self, site: usize) -> f64 {
        let eps = self.eps;
        let gl = GaussLegendre::new(12);
        let inner = 0.75 * eps;
        let mid: Vec<f64> = (0..=6).map(|i| -inner + 2.0 * inner * i as f64 / 6.0).collect();
        let breaks = merge_breaks(&[
            graded_breaks(-eps, -inner, -eps, 1e-4 * eps, 2.0),
            mid,
            graded_breaks(inner, eps, eps, 1e-4 * eps, 2.0),
        ]);
        let mut nodes = Vec::new();
        gl.push_panel_nodes(&breaks, &mut nodes);
        let integral: f64 = nodes
            .par_iter()
            .map(|&(l, w)| {
                let p = MixCoords { site, lambda: l };
                w * self.modified_with(&self.layout(l), p)
            })
            .sum();
        integral - 2.0 * eps * self.mean_velocity(site)
    }
}

fn check_growth_rate(c: f64) -> Result<()> {
    if !(c > 0.0 && c < 2.0) {
        return Err(invalid("c", format!("growth rate {c} must lie in (0, 2)")));
    }
    Ok(())
}

pub fn velocity_field(f: &GridFunction1D, eps: f64, p: MixCoords) -> Result<[f64; 2]> {
    Zone::new(f, eps)?.velocity(p)
}

pub fn velocity_modified(f: &GridFunction1D, eps: f64, p: MixCoords) -> Result<[f64; 2]> {
    Zone::new(f, eps)?.velocity_modified(p)
}

pub fn gamma_sharp(f: &GridFunction1D, eps: f64, c: f64, p: MixCoords) -> Result<f64> {
    Zone::new(f, eps)?.gamma_sharp(p, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsolutionSample {
    /// Grid site of the base point; `None` for closed-form samples.
    pub site: Option<usize>,
    pub s: f64,
    pub lambda: f64,
    pub rho: f64,
    pub u: [f64; 2],
    pub m: [f64; 2],
    pub gamma: f64,
}

/// Sample sites and transverse positions λ = frac·ε, frac ∈ [−1, 1].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZoneLattice {
    pub sites: Vec<usize>,
    pub lambda_fracs: Vec<f64>,
}

impl ZoneLattice {
    /// Every `stride`-th site and `n_lambda` evenly spaced fractions including ±1.
    pub fn uniform(n: usize, stride: usize, n_lambda: usize) -> Result<Self> {
        if stride == 0 || n_lambda < 2 {
            return Err(invalid("lattice", "need stride ≥ 1 and at least two λ levels"));
        }
        let sites = (0..n).step_by(stride).collect();
        let lambda_fracs = (0..n_lambda).map(|i| -1.0 + 2.0 * i as f64 / (n_lambda - 1) as f64).collect();
        Ok(Self { sites, lambda_fracs })
    }

    /// Every `stride`-th site and `n_lambda` interior fractions −1 + 2i/(n_lambda + 1);
    /// the slacks vanish identically at the zone edges.
    pub fn interior(n: usize, stride: usize, n_lambda: usize) -> Result<Self> {
        if stride == 0 || n_lambda == 0 {
            return Err(invalid("lattice", "need stride ≥ 1 and at least one λ level"));
        }
        let sites = (0..n).step_by(stride).collect();
        let lambda_fracs = (1..=n_lambda).map(|i| -1.0 + 2.0 * i as f64 / (n_lambda + 1) as f64).collect();
        Ok(Self { sites, lambda_fracs })
    }

    pub fn len(&self) -> usize {
        self.sites.len() * self.lambda_fracs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// ρ = λ/ε, u from the zone velocity and m = ρu − γ(1−ρ²)(0,1) − ½(1−ρ²)(0,1).
pub fn build_fields(f: &GridFunction1D, eps: f64, c: f64, lattice: &ZoneLattice) -> Result<Vec<SubsolutionSample>> {
    check_growth_rate(c)?;
    let zone = Zone::new(f, eps)?;
    if let Some(&bad) = lattice.sites.iter().find(|&&j| j >= f.len()) {
        return Err(invalid("site", format!("{bad} is outside the grid")));
    }
    if lattice.lambda_fracs.iter().any(|r| !(r.abs() <= 1.0)) {
        return Err(invalid("lambda_fracs", "fractions must lie in [-1, 1]"));
    }
    let means: Vec<f64> = lattice.sites.par_iter().map(|&j| zone.mean_velocity(j)).collect();
    let layouts: Vec<PvLayout> = lattice.lambda_fracs.iter().map(|r| zone.layout(r * eps)).collect();
    let jobs: Vec<(usize, usize)> =
        (0..lattice.sites.len()).flat_map(|a| (0..lattice.lambda_fracs.len()).map(move |b| (a, b))).collect();
    let out = jobs
        .par_iter()
        .map(|&(a, b)| {
            let site = lattice.sites[a];
            let rho = lattice.lambda_fracs[b];
            let lambda = rho * eps;
            let p = MixCoords { site, lambda };
            let lay = &layouts[b];
            let u = zone.velocity_with(lay, p);
            let gamma = zone.gamma_with(lay, p, c, means[a]);
            let open = 1.0 - rho * rho;
            let m = [rho * u[0], rho * u[1] - gamma * open - 0.5 * open];
            SubsolutionSample { site: Some(site), s: f.x(site), lambda, rho, u, m, gamma }
        })
        .collect();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HullMargin {
    pub slack1: f64,
    pub slack2: f64,
    pub slack3: f64,
    pub slack4: f64,
    pub m_bound: f64,
}

impl HullMargin {
    pub fn min_slack(&self) -> f64 {
        self.slack1.min(self.slack2).min(self.slack3).min(self.slack4)
    }

    pub fn strictly_inside(&self) -> bool {
        self.min_slack() > 0.0
    }

    pub fn violated(&self) -> bool {
        self.min_slack() < -VIOLATION_TOL
    }
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Signed slacks of the four hull inequalities; positive means strictly inside.
pub fn hull_check(sample: &SubsolutionSample, m_bound: f64) -> HullMargin {
    let (rho, u, m) = (sample.rho, sample.u, sample.m);
    let open = 1.0 - rho * rho;
    let slack1 = 0.5 * open - norm([m[0] - rho * u[0], m[1] - rho * u[1] + 0.5 * open]);
    let w = [2.0 * u[0], 2.0 * u[1] + rho];
    let slack2 = m_bound * m_bound - open - (w[0] * w[0] + w[1] * w[1]);
    let slack3 = 0.5 * m_bound * (1.0 - rho) - norm([m[0] - u[0], m[1] - u[1] - 0.5 * (1.0 - rho)]);
    let slack4 = 0.5 * m_bound * (1.0 + rho) - norm([m[0] + u[0], m[1] + u[1] + 0.5 * (1.0 + rho)]);
    HullMargin { slack1, slack2, slack3, slack4, m_bound }
}

/// M = 8(max|u| + 1)(1 + 10⁻⁶).
pub fn choose_m(samples: &[SubsolutionSample]) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("samples", "need at least one sample"));
    }
    let umax = samples.iter().map(|s| norm(s.u)).fold(0.0, f64::max);
    Ok(8.0 * (umax + 1.0) * (1.0 + M_MARGIN))
}

/// Number of lattice sites at which the zero-mean identity is checked per time.
pub const RESIDUAL_SITES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub t: f64,
    pub eps: f64,
    pub max_abs_gamma: f64,
    pub min_slacks: [f64; 4],
    pub m_bound: f64,
    pub max_zero_mean_residual: f64,
    /// |γ♯| < ½ everywhere and no slack below the violation tolerance.
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsolutionReport {
    pub rows: Vec<ReportRow>,
    /// First time at which a row fails, if any.
    pub first_failure: Option<f64>,
}

/// Summary of the subsolution conditions at every snapshot with t > 0.
pub fn subsolution_report(traj: &Trajectory, lattice: &ZoneLattice, c: f64) -> Result<SubsolutionReport> {
    let mut rows = Vec::new();
    for snap in traj.snapshots.iter().filter(|s| s.t > 0.0) {
        let eps = c * snap.t;
        let samples = build_fields(&snap.f, eps, c, lattice)?;
        let m_bound = choose_m(&samples)?;
        let mut min_slacks = [f64::INFINITY; 4];
        let mut max_gamma = 0.0f64;
        for s in &samples {
            let h = hull_check(s, m_bound);
            for (k, v) in [h.slack1, h.slack2, h.slack3, h.slack4].into_iter().enumerate() {
                min_slacks[k] = min_slacks[k].min(v);
            }
            max_gamma = max_gamma.max(s.gamma.abs());
        }
        let zone = Zone::new(&snap.f, eps)?;
        // the λ-quadrature behind the residual is costly; a spread of sites suffices
        let stride = lattice.sites.len().div_ceil(RESIDUAL_SITES).max(1);
        let residual = lattice
            .sites
            .iter()
            .step_by(stride)
            .map(|&j| zone.zero_mean_residual(j).abs())
            .fold(0.0, f64::max);
        let ok = max_gamma < 0.5 && min_slacks.iter().all(|v| *v >= -VIOLATION_TOL);
        rows.push(ReportRow {
            t: snap.t,
            eps,
            max_abs_gamma: max_gamma,
            min_slacks,
            m_bound,
            max_zero_mean_residual: residual,
            ok,
        });
    }
    let first_failure = rows.iter().find(|r| !r.ok).map(|r| r.t);
    Ok(SubsolutionReport { rows, first_failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> GridFunction1D {
        GridFunction1D::zeros(128, 20.0).unwrap()
    }

    #[test]
    fn hull_arithmetic_examples() {
        let base = SubsolutionSample { site: None, s: 0.0, lambda: 0.0, rho: 0.0, u: [0.0; 2], m: [0.0, -0.25], gamma: 0.0 };
        assert_eq!(hull_check(&base, 9.0).slack1, 0.25);
        // the disc |m + (0, ½)| < ½ is centred at m = (0, −½); its rim passes through 0 and (0, −1)
        assert_eq!(hull_check(&SubsolutionSample { m: [0.0, -0.5], ..base }, 9.0).slack1, 0.5);
        for rim in [[0.0, 0.0], [0.0, -1.0]] {
            let edge = SubsolutionSample { m: rim, ..base };
            assert_eq!(hull_check(&edge, 9.0).slack1, 0.0);
            assert!(!hull_check(&edge, 9.0).strictly_inside());
        }
    }

    #[test]
    fn choose_m_examples() {
        let mut s = SubsolutionSample { site: None, s: 0.0, lambda: 0.0, rho: 0.0, u: [0.0; 2], m: [0.0; 2], gamma: 0.0 };
        assert!((choose_m(&[s]).unwrap() - 8.0).abs() < 1e-4 && choose_m(&[s]).unwrap() > 8.0);
        s.u = [0.6, 0.8];
        assert!((choose_m(&[s]).unwrap() - 16.0).abs() < 1e-4);
        assert!(choose_m(&[]).is_err());
    }

    #[test]
    fn flat_interface_gamma_is_constant() {
        for c in [0.5, 1.0, 1.5] {
            for l in [-0.09, 0.0, 0.05] {
                let g = gamma_sharp(&flat(), 0.1, c, MixCoords { site: 7, lambda: l }).unwrap();
                assert!((g + (1.0 - c) / 2.0).abs() < 1e-15);
            }
        }
        assert!(gamma_sharp(&flat(), 0.1, 1.0, MixCoords { site: 7, lambda: 0.1 }).is_err());
    }

    #[test]
    fn flat_fields_match_boundary_and_center() {
        let lat = ZoneLattice::uniform(128, 32, 5).unwrap();
        let samples = build_fields(&flat(), 0.1, 1.0, &lat).unwrap();
        for s in &samples {
            let open = 1.0 - s.rho * s.rho;
            assert!((s.m[1] - (s.rho * s.u[1] - 0.5 * open)).abs() < 1e-15);
            if s.lambda.abs() == 0.1 {
                assert_eq!(s.rho.abs(), 1.0);
                assert_eq!(s.m[0] - s.rho * s.u[0], 0.0);
            }
            assert_eq!(s.u[1], 0.0);
        }
    }
}
