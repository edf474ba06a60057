//! Invariant suites behind `verify <suite>`, reported as JSON.

use std::f64::consts::FRAC_PI_2;

use clap::ValueEnum;
use mixzone::evolution::{integrate, InterfaceState, StepperConfig};
use mixzone::flatlab::{flat_admissible_c, flat_gamma, flat_hull_sweep, gamma_from_transport, FlatConfig};
use mixzone::kernel::{
    kernel_closed_form, kernel_frozen, kernel_quadrature_oracle, ktilde_c_l1, ktilde_da_l1, muskat_limit,
    KernelPoint,
};
use mixzone::spectral::{coercivity_probe, h_integral, h_integrand, symbol_m, symbol_mtilde, PROBE_CUTOFF};
use mixzone::subsolution::{gamma_sharp, hull_check, subsolution_report, MixCoords, SubsolutionSample, ZoneLattice, Zone};
use mixzone::{GridFunction1D, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Kernel,
    Spectral,
    Subsolution,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    /// `measured ≤ tolerance`, or `≥` for lower bounds.
    pub comparison: &'static str,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl Check {
    fn at_most(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self { name, measured, tolerance, comparison: "<=", pass: measured <= tolerance, detail: None }
    }

    fn at_least(name: &'static str, measured: f64, tolerance: f64) -> Self {
        Self { name, measured, tolerance, comparison: ">=", pass: measured >= tolerance, detail: None }
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub pass: bool,
    pub checks: Vec<Check>,
}

pub fn run_verify(suite: Suite) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Kernel => kernel_checks()?,
        Suite::Spectral => spectral_checks()?,
        Suite::Subsolution => subsolution_checks()?,
        Suite::Flat => flat_checks()?,
    };
    Ok(SuiteReport { suite, pass: checks.iter().all(|c| c.pass), checks })
}

fn sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

fn kernel_checks() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let eps = 10f64.powf(rng.gen_range(-2.0..0.0));
        let dx = 10f64.powf(rng.gen_range(-2.0..1.0)) * sign(&mut rng);
        let p = KernelPoint::new(dx, rng.gen_range(-2.0..2.0) * dx.abs());
        let q = kernel_quadrature_oracle(p, eps, 64)?;
        worst = worst.max((kernel_closed_form(p, eps) - q).abs() / q.abs().max(1e-300));
    }
    let mut odd = 0.0f64;
    for _ in 0..200 {
        let (dx, df, eps) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(0.01..1.0));
        let k = kernel_closed_form(KernelPoint::new(dx, df), eps);
        let m = kernel_closed_form(KernelPoint::new(-dx, -df), eps);
        odd = odd.max((k + m).abs() / (1.0 + k.abs()));
    }
    let mut min_order = f64::INFINITY;
    for _ in 0..10 {
        let dx = rng.gen_range(0.5..3.0) * sign(&mut rng);
        let a = rng.gen_range(-1.5..1.5);
        let lim = muskat_limit(dx, a * dx);
        let e: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&eps| (kernel_frozen(a, dx, eps) - lim).abs()).collect();
        min_order = min_order.min((e[0] / e[1]).log2()).min((e[1] / e[2]).log2());
    }
    let mut c_ratio = 0.0f64;
    let mut da_max = 0.0f64;
    for a in [0.25, 0.5, 1.0, 2.0] {
        for t in [0.1, 0.5, 1.0] {
            c_ratio = c_ratio.max(ktilde_c_l1(a, t).upper() / (2.0 * a * a / (1.0 + a * a)));
            da_max = da_max.max(ktilde_da_l1(a, t).upper());
        }
    }
    Ok(vec![
        Check::at_most("closed_form_vs_quadrature_rel_err", worst, 1e-8),
        Check::at_most("joint_oddness", odd, 1e-13),
        Check::at_least("eps_limit_richardson_order", min_order, 1.9),
        Check::at_most("ktilde_c_l1_over_2a2sigma", c_ratio, 1.0),
        Check::at_most("ktilde_slope_derivative_l1", da_max, 2.0 - 1e-12),
    ])
}

fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn spectral_checks() -> Result<Vec<Check>> {
    let slopes = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut ftc = 0.0f64;
    for &a in &slopes {
        for s in logspace(1e-3, 1e4, 36) {
            let ds = 1e-4 * s;
            let fd = (h_integral(s + ds, a) - h_integral(s - ds, a)) / (2.0 * ds);
            let ig = h_integrand(s, a);
            ftc = ftc.max((fd - ig).abs() / (1.0 + ig.abs()));
        }
    }
    let mut product = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for a in (0..=16).map(|i| -2.0 + 0.25 * i as f64) {
        for s in std::iter::once(0.0).chain(logspace(1e-3, 100.0, 60)) {
            let mt = symbol_mtilde(s, a, 1.0);
            product = product.max((mt - (1.0 + s) * symbol_m(s, a, 1.0)).abs() / mt);
            lo = lo.min(mt);
            hi = hi.max(mt);
        }
    }
    let slope = GridFunction1D::from_fn(512, 40.0, |x| -0.2 * x * (-x * x).exp())?;
    let probe = coercivity_probe(&slope, 0.05, 16, 5, PROBE_CUTOFF)?;
    Ok(vec![
        Check::at_most("h_fundamental_theorem", ftc, 1e-6),
        Check::at_most("mtilde_product_form", product, 1e-12),
        Check::at_least("mtilde_lower_bound", lo, f64::MIN_POSITIVE)
            .with_detail(json!({ "min": lo, "max": hi, "slope_range": [-2.0, 2.0], "s_range": [0.0, 100.0] })),
        Check::at_most("mtilde_upper_bound", hi, f64::MAX),
        Check::at_least("coercivity_probe_worst_ratio", probe.worst_ratio, 0.5).with_detail(json!(probe)),
    ])
}

fn subsolution_checks() -> Result<Vec<Check>> {
    let flat = GridFunction1D::zeros(128, 20.0)?;
    let mut gamma_err = 0.0f64;
    for c in [0.5, 1.0, 1.5] {
        for frac in [-0.9, 0.0, 0.5] {
            let g = gamma_sharp(&flat, 0.1, c, MixCoords { site: 17, lambda: frac * 0.1 })?;
            gamma_err = gamma_err.max((g + (1.0 - c) / 2.0).abs());
        }
    }
    let base = SubsolutionSample { site: None, s: 0.0, lambda: 0.0, rho: 0.0, u: [0.0; 2], m: [0.0; 2], gamma: 0.0 };
    let rim = [[0.0, 0.0], [0.0, -1.0]]
        .iter()
        .map(|&m| hull_check(&SubsolutionSample { m, ..base }, 9.0).slack1.abs())
        .fold(0.0, f64::max);

    // short coarse run of the bump benchmark
    let (n, l, c) = (256, 40.0, 1.0);
    let f0 = GridFunction1D::from_fn(n, l, |x| 0.1 * (-x * x).exp())?;
    let state = InterfaceState::new(f0, 0.0, c, 4.0 * l / n as f64, 1e-3)?;
    let traj = integrate(&state, &StepperConfig { dt: 0.01, t_end: 0.05, ..Default::default() })?;
    let lattice = ZoneLattice::uniform(n, 8, 9)?;
    let report = subsolution_report(&traj, &lattice, c)?;
    let max_gamma = report.rows.iter().map(|r| r.max_abs_gamma).fold(0.0, f64::max);
    let residual = report.rows.iter().map(|r| r.max_zero_mean_residual).fold(0.0, f64::max);
    let zone = Zone::new(&traj.last().f, c * traj.last().t)?;
    let jump = (0..n).step_by(32).fold(0.0f64, |acc, j| {
        let below = zone.gamma_sharp(MixCoords { site: j, lambda: -1e-12 }, c).unwrap_or(f64::NAN);
        let above = zone.gamma_sharp(MixCoords { site: j, lambda: 1e-12 }, c).unwrap_or(f64::NAN);
        acc.max((above - below).abs())
    });
    Ok(vec![
        Check::at_most("flat_gamma_closed_form", gamma_err, 1e-10),
        Check::at_most("hull_rim_slack", rim, 0.0),
        Check::at_most("benchmark_max_abs_gamma", max_gamma, 0.5 - f64::EPSILON)
            .with_detail(json!({ "n": n, "t_end": 0.05, "rows": report.rows })),
        Check::at_most("benchmark_zero_mean_residual", residual, 1e-6),
        Check::at_most("gamma_continuity_across_centre", jump, 1e-9),
    ])
}

fn flat_checks() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut transport = 0.0f64;
    for _ in 0..20 {
        let cfg = FlatConfig::new(rng.gen_range(0.0..2.0), rng.gen_range(-2.0..2.0), sign(&mut rng), rng.gen_range(0.1..1.9))?;
        let time = rng.gen_range(0.5..2.0);
        let eps = cfg.c * time;
        let (s, lambda) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.2..0.8) * eps * sign(&mut rng));
        let (t, nrm) = (cfg.tangent(), cfg.normal());
        let x = [s * t[0] + lambda * nrm[0], s * t[1] + lambda * nrm[1]];
        transport = transport.max((gamma_from_transport(&cfg, x, time) - flat_gamma(&cfg)).abs());
    }
    let cs: Vec<f64> = (1..=10).map(|k| 0.2 * k as f64).collect();
    let mut misclassified = 0usize;
    let mut classified = 0usize;
    let mut table = Vec::new();
    for i in 0..20 {
        let angle = -FRAC_PI_2 + std::f64::consts::PI * (i as f64 + 0.5) / 20.0;
        let (m1, m2) = (angle.cos(), angle.sin());
        for sigma in [-1.0, 1.0] {
            let rows = flat_hull_sweep(m1, m2, sigma, &cs, 9)?;
            for r in rows.iter().filter(|r| r.min_slack.abs() > 2e-6) {
                classified += 1;
                if r.pass != r.admissible {
                    misclassified += 1;
                }
            }
            table.push(json!({
                "mu1": m1,
                "mu2": m2,
                "sigma_sign": sigma,
                "admissible_c": flat_admissible_c(m1, m2, sigma)?,
                "passing_c": rows.iter().filter(|r| r.pass).map(|r| r.c).collect::<Vec<_>>(),
            }));
        }
    }
    Ok(vec![
        Check::at_most("transport_gamma_vs_closed_form", transport, 1e-12),
        Check::at_most("sweep_misclassifications", misclassified as f64, 0.0)
            .with_detail(json!({ "classified": classified, "table": table })),
    ])
}
