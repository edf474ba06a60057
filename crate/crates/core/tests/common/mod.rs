//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use mixzone::grid::forward_fft;
use mixzone::kernel::kernel_frozen;
use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Ein(z) = ∫_0^z (1 − e^{−w})/w dw for Re z ≥ 0.
pub fn ein(z: Complex64) -> Complex64 {
    if z.norm() < 4.0 {
        let mut term = z;
        let mut sum = z;
        for k in 2..80 {
            term *= -z / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        // E1 by modified Lentz on the continued fraction
        // e^{-z}/(z+1− 1/(z+3− 4/(z+5− …)))
        let tiny = 1e-300;
        let mut f = z + 1.0;
        let mut c = f;
        let mut d = Complex64::new(0.0, 0.0);
        for k in 1..500 {
            let a = -((k * k) as f64);
            let b = z + (2 * k + 1) as f64;
            d = b + a * d;
            if d.norm() < tiny {
                d = Complex64::new(tiny, 0.0);
            }
            c = b + a / c;
            if c.norm() < tiny {
                c = Complex64::new(tiny, 0.0);
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).norm() < 1e-16 {
                break;
            }
        }
        let e1 = (-z).exp() / f;
        EULER_GAMMA + z.ln() + e1
    }
}

/// H(s, A) through the exponential integral: with Z = 4πs/(1+iA),
/// H = Re[Ein(Z) + (1 − e^{−Z})/Z − 1].
pub fn h_via_ein(s: f64, a: f64) -> f64 {
    let z = Complex64::new(4.0 * PI * s, 0.0) / Complex64::new(1.0, a);
    (ein(z) + (1.0 - (-z).exp()) / z - 1.0).re
}

/// Transform of the frozen kernel by FFT of its samples on a wide window.
///
/// The 1/y tail and the jump at 0 are subtracted analytically and their exact
/// transforms added back. Returns (ξ_k, K̂(ξ_k)) for k in `modes`.
pub fn khat_by_fft(a: f64, eps: f64, n: usize, modes: std::ops::Range<usize>) -> Vec<(f64, Complex64)> {
    let l = 200.0 * eps;
    let h = l / n as f64;
    let sigma = 1.0 / (1.0 + a * a);
    let tail = |y: f64| sigma / PI * y / (y * y + eps * eps);
    let jump = |y: f64| y.signum() * (-y.abs() / eps).exp() / (2.0 * eps);
    let samples: Vec<f64> = (0..n)
        .map(|m| {
            let y = if m < n / 2 { m as f64 * h } else { (m as f64 - n as f64) * h };
            if m == 0 {
                0.0
            } else {
                kernel_frozen(a, y, eps) - tail(y) - jump(y)
            }
        })
        .collect();
    let c = forward_fft(&samples);
    modes
        .map(|k| {
            let xi = k as f64 / l;
            let tail_hat = Complex64::new(0.0, -sigma) * (-2.0 * PI * eps * xi).exp();
            let w = 2.0 * PI * xi;
            let jump_hat = Complex64::new(0.0, -2.0 * w / (1.0 / (eps * eps) + w * w) / (2.0 * eps));
            (xi, c[k] * l + tail_hat + jump_hat)
        })
        .collect()
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * GK_X[i]) + f(c + h * GK_X[i]);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15): bisect the interval with the
/// largest error estimate until the total is below `tol` or the interval
/// budget runs out.
pub fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    struct Part(f64, f64, f64, f64);
    impl PartialEq for Part {
        fn eq(&self, o: &Self) -> bool {
            self.3 == o.3
        }
    }
    impl Eq for Part {}
    impl PartialOrd for Part {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Part {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            self.3.total_cmp(&o.3)
        }
    }
    let (v, e) = gk15(f, a, b);
    let mut heap = std::collections::BinaryHeap::from([Part(a, b, v, e)]);
    let mut err = e;
    for _ in 0..4000 {
        if err <= tol {
            break;
        }
        let Part(lo, hi, _, e) = heap.pop().unwrap();
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(f, lo, mid);
        let (v2, e2) = gk15(f, mid, hi);
        err += e1 + e2 - e;
        heap.push(Part(lo, mid, v1, e1));
        heap.push(Part(mid, hi, v2, e2));
    }
    heap.iter().map(|p| p.2).sum()
}

/// `integrate` over [a, b] with extra break points (those outside are ignored).
pub fn integrate_split(f: &impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts = vec![a, b];
    pts.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
    pts.sort_by(f64::total_cmp);
    pts.windows(2).map(|w| integrate(f, w[0], w[1], tol / (pts.len() - 1) as f64)).sum()
}

/// K_ε(dx, Δf) straight from the double average
/// 1/(4πε²) ∫∫ dx / (dx² + (Δf + λ − λ')²) dλ dλ', nested adaptive quadrature.
pub fn kernel_by_double_integral(dx: f64, df: f64, eps: f64) -> f64 {
    let peak = 1.0 / dx.abs();
    let inner = |lam: f64| {
        let c = df + lam;
        integrate_split(&|lp: f64| dx / (dx * dx + (c - lp).powi(2)), -eps, eps, &[c], 1e-15 * peak * eps)
    };
    let outer = integrate_split(&inner, -eps, eps, &[-df - eps, -df + eps], 1e-14 * std::f64::consts::PI * eps);
    outer / (4.0 * PI * eps * eps)
}
