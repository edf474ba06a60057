//! Interface evolution: the mean vertical velocity of the mixing zone, its
//! mollified and diffused regularization, and an RK4 integrator with ε = c·t.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, MixError, Result};
use crate::grid::{forward_fft, GridFunction1D};
use crate::kernel::{kernel_closed_form, KernelPoint};
use crate::pv::{PvLayout, PvOptions};
use crate::spectral::{apply_dinv, apply_mtilde_dinv_fast, SpectralField};

/// Gaussian mollifier cutoff in standard deviations.
pub const MOLLIFIER_CUTOFF: f64 = 6.0;

fn mollifier_stencil(h: f64, delta: f64) -> Vec<f64> {
    let m = (MOLLIFIER_CUTOFF * delta / h).floor() as i64;
    let mut w: Vec<f64> = (-m..=m).map(|i| (-0.5 * (i as f64 * h / delta).powi(2)).exp()).collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Convolution with a mean-one Gaussian of standard deviation `delta`,
/// truncated at 6δ and renormalized on the grid.
pub fn mollify(f: &GridFunction1D, delta: f64) -> Result<GridFunction1D> {
    let h = f.h();
    if !(delta >= 2.0 * h) {
        return Err(invalid("delta", format!("mollifier width {delta} is below 2h = {}", 2.0 * h)));
    }
    let w = mollifier_stencil(h, delta);
    let half = (w.len() / 2) as i64;
    let n = f.len() as i64;
    let s = f.samples();
    let out = (0..n)
        .map(|j| {
            w.iter()
                .enumerate()
                .map(|(i, wi)| wi * s[(j + i as i64 - half).rem_euclid(n) as usize])
                .sum()
        })
        .collect();
    Ok(f.with_samples(out))
}

/// Fourier symbol of the continuous Gaussian mollifier at frequency ξ (1/length).
pub fn mollifier_symbol(xi: f64, delta: f64) -> f64 {
    let a = 2.0 * std::f64::consts::PI * delta * xi;
    (-0.5 * a * a).exp()
}

/// −∫_{|y|≤R} (f'(x) − f'(x−y))·K_w(y, f(x) − f(x−y)) dy at every grid site.
///
/// The y-integral uses the near/far split of [`PvLayout`] so that kernel widths
/// below the grid spacing are resolved.
pub fn velocity_rhs(f: &GridFunction1D, width: f64, radius: f64) -> Result<GridFunction1D> {
    if !(width > 0.0) {
        return Err(invalid("eps + kappa", "kernel width must be positive"));
    }
    let fp = f.derivative(1);
    let n = f.len();
    let lay = PvLayout::new(n, f.h(), radius, width, PvOptions::default());
    let (fs, fps) = (f.samples(), fp.samples());
    let skip = 1e-17 * fp.max_abs();
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let (fx, fpx) = (fs[j], fps[j]);
            let [v] = lay.integrate(j, fs, fps, |d, fy, fpy| {
                let dfp = fpx - fpy;
                if dfp.abs() <= skip {
                    return [0.0];
                }
                [dfp * kernel_closed_form(KernelPoint::new(d, fx - fy), width)]
            });
            -v
        })
        .collect();
    if let Some(site) = out.iter().position(|v| !v.is_finite()) {
        return Err(MixError::NonFinite { site, what: "velocity integrand" });
    }
    Ok(f.with_samples(out))
}

/// Evolving interface with its regularization parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceState {
    pub f: GridFunction1D,
    pub t: f64,
    pub c: f64,
    pub delta: f64,
    pub kappa: f64,
    /// Window radius of the velocity integral; half the period by default.
    pub trunc_radius: f64,
}

impl InterfaceState {
    pub fn new(f: GridFunction1D, t: f64, c: f64, delta: f64, kappa: f64) -> Result<Self> {
        if !(c > 0.0 && c < 2.0) {
            return Err(invalid("c", format!("growth rate {c} must lie in (0, 2)")));
        }
        if !(t >= 0.0) {
            return Err(invalid("t", "must be nonnegative"));
        }
        if !(delta > 0.0) {
            return Err(invalid("delta", "must be positive"));
        }
        if !(kappa >= 0.0) {
            return Err(invalid("kappa", "must be nonnegative"));
        }
        let trunc_radius = 0.5 * f.length();
        Ok(Self { f, t, c, delta, kappa, trunc_radius })
    }

    /// Replace the window radius; must lie in (0, L/2].
    pub fn with_trunc_radius(self, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= 0.5 * self.f.length()) {
            return Err(invalid("trunc_radius", format!("radius {radius} must lie in (0, L/2]")));
        }
        Ok(Self { trunc_radius: radius, ..self })
    }

    pub fn eps(&self) -> f64 {
        self.c * self.t
    }

    pub fn kernel_width(&self) -> f64 {
        self.eps() + self.kappa
    }

    fn at(&self, f: GridFunction1D, t: f64) -> Self {
        Self { f, t, ..self.clone() }
    }
}

/// Unregularized mean velocity ℳu₂ with kernel width ε + κ.
pub fn mean_velocity_rhs(state: &InterfaceState) -> Result<GridFunction1D> {
    velocity_rhs(&state.f, state.kernel_width(), state.trunc_radius)
}

/// Which parts of the regularized right-hand side to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum RhsTerms {
    #[default]
    Full,
    KernelOnly,
    DiffusionOnly,
}

/// φ_δ * V(φ_δ * f) + κ φ_δ * ∂²(φ_δ * f), with V the velocity at width ε + κ.
pub fn rhs_regularized(state: &InterfaceState, terms: RhsTerms) -> Result<GridFunction1D> {
    let g = mollify(&state.f, state.delta)?;
    let mut out = state.f.map(|_| 0.0);
    if terms != RhsTerms::DiffusionOnly {
        let v = velocity_rhs(&g, state.kernel_width(), state.trunc_radius)?;
        out = mollify(&v, state.delta)?;
    }
    if terms != RhsTerms::KernelOnly && state.kappa > 0.0 {
        let diff = mollify(&g.derivative(2), state.delta)?;
        out = out.zip_map(&diff, |a, b| a + state.kappa * b);
    }
    Ok(out)
}

/// (L Σ_k (1 + ξ_k²)^order |c_k|²)^{1/2}, ξ_k = k/L.
pub fn sobolev_norm(f: &GridFunction1D, order: u32) -> Result<f64> {
    if order > 5 {
        return Err(invalid("k", "Sobolev order must be at most 5"));
    }
    let l = f.length();
    let sf = SpectralField::from_grid(f);
    let sum: f64 = sf
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| (1.0 + sf.freq(i).powi(2)).powi(order as i32) * c.norm_sqr())
        .sum();
    Ok((l * sum).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub h4_norm: f64,
    /// ‖𝒟⁻¹∂⁵f‖.
    pub damped_h5_norm: f64,
    /// ‖m̃𝒟⁻¹∂⁵f‖² with slope A = ∂f.
    pub energy: f64,
    pub mean: f64,
    pub max_abs_gamma: Option<f64>,
}

/// Chebyshev nodes used by the fast symbol path in diagnostics.
pub const DIAGNOSTIC_NODES: usize = 24;

pub fn diagnostics(f: &GridFunction1D, t: f64) -> Result<Diagnostics> {
    let d5 = f.derivative(5);
    let slope = f.derivative(1);
    let damped = apply_dinv(&SpectralField::from_grid(&d5), t).l2_norm();
    let weighted = apply_mtilde_dinv_fast(&d5, &slope, t, DIAGNOSTIC_NODES)?.l2_norm();
    Ok(Diagnostics {
        h4_norm: sobolev_norm(f, 4)?,
        damped_h5_norm: damped,
        energy: weighted * weighted,
        mean: forward_fft(f.samples())[0].re,
        max_abs_gamma: None,
    })
}

/// One classical RK4 step. With `freeze_eps` the kernel width stays at its
/// value at the start of the step.
pub fn rk4_step(state: &InterfaceState, dt: f64, terms: RhsTerms, freeze_eps: bool) -> Result<GridFunction1D> {
    let t0 = state.t;
    let stage_t = |frac: f64| if freeze_eps { t0 } else { t0 + frac * dt };
    // with a frozen width the state time is kept fixed and may be advanced by a negative dt
    let eval = |f: GridFunction1D, frac: f64| rhs_regularized(&state.at(f, stage_t(frac)), terms);
    let f0 = &state.f;
    let k1 = eval(f0.clone(), 0.0)?;
    let k2 = eval(f0.zip_map(&k1, |a, b| a + 0.5 * dt * b), 0.5)?;
    let k3 = eval(f0.zip_map(&k2, |a, b| a + 0.5 * dt * b), 0.5)?;
    let k4 = eval(f0.zip_map(&k3, |a, b| a + dt * b), 1.0)?;
    let out = (0..f0.len())
        .map(|j| {
            f0.samples()[j]
                + dt / 6.0 * (k1.samples()[j] + 2.0 * k2.samples()[j] + 2.0 * k3.samples()[j] + k4.samples()[j])
        })
        .collect();
    Ok(f0.with_samples(out))
}

/// Largest admissible step: min(h²/(2κ σ_moll), h/V_max) with σ_moll = 1 the
/// squared mollifier symbol at ξ = 0 and V_max = 1 + max|RHS(f₀)|.
pub fn stability_bound(state: &InterfaceState, terms: RhsTerms) -> Result<f64> {
    let h = state.f.h();
    let v_max = 1.0 + rhs_regularized(state, terms)?.max_abs();
    let diffusive = if state.kappa > 0.0 { h * h / (2.0 * state.kappa) } else { f64::INFINITY };
    Ok(diffusive.min(h / v_max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between snapshots; the final state is always recorded.
    pub output_every: usize,
    /// Abort when max|f| or the H⁴ norm exceeds this value.
    pub blowup_threshold: f64,
    pub terms: RhsTerms,
    pub with_diagnostics: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_end: 0.1,
            output_every: 1,
            blowup_threshold: 1e8,
            terms: RhsTerms::Full,
            with_diagnostics: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub f: GridFunction1D,
    pub diagnostics: Option<Diagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Blowup {
    pub t: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    pub blowup: Option<Blowup>,
    pub stability_bound: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory holds the initial state")
    }
}

fn snapshot(f: &GridFunction1D, t: f64, with_diag: bool) -> Result<Snapshot> {
    let diagnostics = if with_diag { Some(diagnostics(f, t)?) } else { None };
    Ok(Snapshot { t, f: f.clone(), diagnostics })
}

/// RK4 integration from `initial` to `cfg.t_end`.
///
/// The step is checked against [`stability_bound`] up front. Non-finite values
/// or norms above the blowup threshold stop the run and are reported in
/// [`Trajectory::blowup`]; the snapshots up to that point are kept.
pub fn integrate(initial: &InterfaceState, cfg: &StepperConfig) -> Result<Trajectory> {
    if !(cfg.dt > 0.0) || !(cfg.t_end > initial.t) {
        return Err(invalid("dt", "need dt > 0 and t_end beyond the initial time"));
    }
    if cfg.output_every == 0 {
        return Err(invalid("output_every", "must be at least 1"));
    }
    let bound = stability_bound(initial, cfg.terms)?;
    if cfg.dt > bound {
        return Err(MixError::Stability { dt: cfg.dt, bound });
    }
    let span = cfg.t_end - initial.t;
    let nsteps = (span / cfg.dt - 1e-9).ceil().max(1.0) as usize;
    let mut snaps = vec![snapshot(&initial.f, initial.t, cfg.with_diagnostics)?];
    let mut state = initial.clone();
    let mut blowup = None;
    let mut taken = 0;
    for step in 1..=nsteps {
        let dt = if step == nsteps { cfg.t_end - state.t } else { cfg.dt };
        let next = match rk4_step(&state, dt, cfg.terms, false) {
            Ok(f) => f,
            Err(MixError::NonFinite { .. } | MixError::InvalidGrid(_)) => {
                blowup = Some(Blowup { t: state.t, reason: "non-finite values".into() });
                break;
            }
            Err(e) => return Err(e),
        };
        let t = initial.t + if step == nsteps { span } else { step as f64 * cfg.dt };
        let h4 = sobolev_norm(&next, 4)?;
        if next.max_abs() > cfg.blowup_threshold || !(h4 <= cfg.blowup_threshold) {
            blowup = Some(Blowup { t, reason: format!("norm above threshold (H4 = {h4:e})") });
            break;
        }
        state = state.at(next, t);
        taken = step;
        if step % cfg.output_every == 0 || step == nsteps {
            snaps.push(snapshot(&state.f, t, cfg.with_diagnostics)?);
        }
    }
    Ok(Trajectory { snapshots: snaps, steps: taken, blowup, stability_bound: bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn wave(n: usize, l: f64) -> GridFunction1D {
        GridFunction1D::from_fn(n, l, |x| (2.0 * PI * x / l).sin()).unwrap()
    }

    #[test]
    fn mollify_keeps_constants_and_rejects_narrow_width() {
        let one = GridFunction1D::from_fn(128, 10.0, |_| 1.0).unwrap();
        let m = mollify(&one, 0.4).unwrap();
        assert!(m.samples().iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert!(mollify(&one, 0.1).is_err());
    }

    #[test]
    fn mollify_semigroup() {
        let l = 40.0;
        let f = wave(1024, l);
        let d = 2.0 * f.h();
        let twice = mollify(&mollify(&f, d).unwrap(), d).unwrap();
        let once = mollify(&f, 2f64.sqrt() * d).unwrap();
        assert!(twice.zip_map(&once, |a, b| a - b).max_abs() < 1e-10);
    }

    #[test]
    fn mollify_small_width_is_second_order() {
        let l = 40.0;
        let f = wave(1024, l);
        let err = |d: f64| mollify(&f, d).unwrap().zip_map(&f, |a, b| a - b).max_abs();
        let h = f.h();
        let order = (err(4.0 * h) / err(2.0 * h)).log2();
        assert!((order - 2.0).abs() < 0.05, "{order}");
    }

    #[test]
    fn sobolev_norm_cases() {
        let l = 10.0;
        let f = GridFunction1D::from_fn(128, l, |x| 0.3 * (2.0 * PI * 2.0 * x / l).cos()).unwrap();
        assert!((sobolev_norm(&f, 0).unwrap() - f.l2_norm()).abs() < 1e-12);
        // amplitude a cosine: L²-norm a·√(L/2)
        let xi: f64 = 2.0 / l;
        let want = 0.3 * (l / 2.0).sqrt() * (1.0 + xi * xi).powf(1.5);
        assert!((sobolev_norm(&f, 3).unwrap() - want).abs() < 1e-12);
        assert_eq!(sobolev_norm(&f.map(|_| 0.0), 4).unwrap(), 0.0);
        assert!(sobolev_norm(&f, 6).is_err());
    }

    #[test]
    fn zero_is_fixed_point() {
        let zero = GridFunction1D::zeros(128, 40.0).unwrap();
        let s = InterfaceState::new(zero, 0.0, 1.0, 4.0 * 40.0 / 128.0, 1e-3).unwrap();
        let r = rhs_regularized(&s, RhsTerms::Full).unwrap();
        assert_eq!(r.max_abs(), 0.0);
        assert!(mean_velocity_rhs(&s).unwrap().max_abs() == 0.0);
        let s0 = InterfaceState { kappa: 0.0, ..s };
        assert!(mean_velocity_rhs(&s0).is_err());
    }

    #[test]
    fn diffusion_decay_rate() {
        let l = 40.0;
        let n = 256;
        let k = 3.0;
        let f = GridFunction1D::from_fn(n, l, |x| (2.0 * PI * k * x / l).sin()).unwrap();
        let (kappa, delta) = (1e-2, 4.0 * l / n as f64);
        let s = InterfaceState::new(f.clone(), 0.0, 1.0, delta, kappa).unwrap();
        let r = rhs_regularized(&s, RhsTerms::DiffusionOnly).unwrap();
        let w = 2.0 * PI * k / l;
        let rate = kappa * w * w * mollifier_symbol(k / l, delta).powi(2);
        for j in 0..n {
            assert!((r.samples()[j] + rate * f.samples()[j]).abs() < 1e-6 * rate.max(1.0));
        }
    }

    #[test]
    fn single_step_reversal() {
        let l = 40.0;
        let f = GridFunction1D::from_fn(256, l, |x| 0.1 * (-x * x).exp()).unwrap();
        let s = InterfaceState::new(f.clone(), 0.05, 1.0, 4.0 * l / 256.0, 1e-3).unwrap();
        let err = |dt: f64| {
            let fwd = rk4_step(&s, dt, RhsTerms::KernelOnly, true).unwrap();
            let back = rk4_step(&s.at(fwd, s.t), -dt, RhsTerms::KernelOnly, true).unwrap();
            back.zip_map(&f, |a, b| a - b).max_abs()
        };
        let (e1, e2) = (err(0.02), err(0.01));
        assert!(e1 < 1e-8, "{e1:e}");
        assert!((e1 / e2).log2() > 4.5, "{e1:e} {e2:e}");
    }
}
