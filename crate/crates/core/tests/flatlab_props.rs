use mixzone::evolution::{integrate, InterfaceState, StepperConfig};
use mixzone::flatlab::*;
use mixzone::grid::GridFunction1D;
use mixzone::subsolution::{gamma_sharp, MixCoords};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn directions() -> Vec<(f64, f64)> {
    // μ₁ ≥ 0: angles in [−π/2, π/2]
    (0..20)
        .map(|i| {
            let a = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * (i as f64 + 0.5) / 20.0;
            (a.cos(), a.sin())
        })
        .collect()
}

#[test]
fn transport_holds_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (m1, m2) = (rng.gen_range(0.0..2.0), rng.gen_range(-2.0..2.0));
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let cfg = FlatConfig::new(m1, m2, sign, rng.gen_range(0.1..1.9)).unwrap();
        let time = rng.gen_range(0.5..2.0);
        let eps = cfg.c * time;
        let s = rng.gen_range(-3.0..3.0);
        let lambda = rng.gen_range(0.2..0.8) * eps * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (t, n) = (cfg.tangent(), cfg.normal());
        let x = [s * t[0] + lambda * n[0], s * t[1] + lambda * n[1]];
        let g = flat_gamma(&cfg);
        assert!(transport_residual(&cfg, g, x, time).abs() < 1e-10);
        assert!((gamma_from_transport(&cfg, x, time) - g).abs() < 1e-12);
    }
}

#[test]
fn sweep_matches_admissible_interval() {
    let mut checked = 0;
    for (m1, m2) in directions() {
        for sign in [-1.0, 1.0] {
            let cs: Vec<f64> = (1..=10).map(|k| 0.2 * k as f64).collect();
            for row in flat_hull_sweep(m1, m2, sign, &cs, 9).unwrap() {
                assert_eq!(row.gamma.abs() < 0.5, row.admissible, "{row:?}");
                if row.min_slack.abs() > 2e-6 {
                    assert_eq!(row.pass, row.admissible, "μ=({m1},{m2}) σ={sign} {row:?}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 350);
}

#[test]
fn horizontal_unstable_examples() {
    let rows = flat_hull_sweep(1.0, 0.0, -1.0, &[1.0, 2.0, 2.5], 9).unwrap();
    assert!(rows[0].pass && rows[0].admissible);
    assert!(!rows[1].pass && rows[1].min_slack <= 0.0 && !rows[1].admissible);
    assert!(!rows[2].pass && rows[2].min_slack < 0.0);
    for row in flat_hull_sweep(1.0, 0.0, 1.0, &[0.1, 0.5, 1.0], 9).unwrap() {
        assert!(!row.pass && !row.admissible);
    }
}

#[test]
fn slacks_match_closed_forms() {
    for (m1, m2) in directions().into_iter().step_by(3) {
        for sign in [-1.0, 1.0] {
            let cfg = FlatConfig::new(m1, m2, sign, 0.4).unwrap();
            let row = &flat_hull_sweep(m1, m2, sign, &[0.4], 9).unwrap()[0];
            let m = row.margins.m_bound;
            let eps = 0.4;
            for i in 1..=9 {
                let lambda = (-1.0 + 2.0 * i as f64 / 10.0) * eps;
                let f = flat_fields(&cfg, eps, 0.0, lambda).unwrap();
                let h = mixzone::subsolution::hull_check(&f, m);
                let (rho, g, u) = (f.rho, f.gamma, f.u);
                let nu = [-cfg.normal()[0], -cfg.normal()[1]];
                let len = |v: [f64; 2]| v[0].hypot(v[1]);
                let s1 = (1.0 - rho * rho) * (0.5 - g.abs());
                let s3 = (1.0 - rho) * (0.5 * m - len([u[0] + g * (1.0 + rho) * nu[0], u[1] + g * (1.0 + rho) * nu[1] + 0.5 * (2.0 + rho)]));
                let s4 = (1.0 + rho) * (0.5 * m - len([u[0] - g * (1.0 - rho) * nu[0], u[1] - g * (1.0 - rho) * nu[1] + 0.5 * rho]));
                assert!((h.slack1 - s1).abs() < 1e-12);
                assert!((h.slack3 - s3).abs() < 1e-12, "{} {}", h.slack3, s3);
                assert!((h.slack4 - s4).abs() < 1e-12, "{} {}", h.slack4, s4);
            }
        }
    }
}

#[test]
fn evolved_flat_interface_gives_closed_form_gamma() {
    let zero = GridFunction1D::zeros(256, 40.0).unwrap();
    for c in [0.5, 1.0, 1.5] {
        let s = InterfaceState::new(zero.clone(), 0.0, c, 4.0 * 40.0 / 256.0, 1e-3).unwrap();
        let cfg = StepperConfig { dt: 0.02, t_end: 0.1, with_diagnostics: false, ..Default::default() };
        let last = integrate(&s, &cfg).unwrap().last().clone();
        let eps = c * last.t;
        let flat = flat_gamma(&FlatConfig::new(1.0, 0.0, -1.0, c).unwrap());
        for lambda in [-0.9 * eps, 0.0, 0.5 * eps] {
            let g = gamma_sharp(&last.f, eps, c, MixCoords { site: 100, lambda }).unwrap();
            assert!((g + (1.0 - c) / 2.0).abs() < 1e-10);
            // graph form measures γ along +e₂, the flat form along −t^⊥ = −e₂
            assert!((g + flat).abs() < 1e-10);
        }
    }
}

proptest! {
    #[test]
    fn gamma_below_half_iff_admissible(angle in -1.5707f64..1.5707, c in 0.01f64..3.0, stable in any::<bool>()) {
        let sign = if stable { 1.0 } else { -1.0 };
        let (m1, m2) = (angle.cos(), angle.sin());
        let g = flat_gamma(&FlatConfig::new(m1, m2, sign, c).unwrap());
        let adm = flat_admissible_c(m1, m2, sign).unwrap().is_some_and(|(lo, hi)| c > lo && c < hi);
        if (g.abs() - 0.5).abs() > 1e-12 {
            prop_assert_eq!(g.abs() < 0.5, adm);
        }
    }
}
