//! One-dimensional quadrature rules: Gauss–Legendre (plain and composite),
//! geometrically graded panel layouts, and adaptive Gauss–Kronrod.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            // Tricomi initial guess, then Newton.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Integrates `f` over consecutive panels given by sorted `breaks`.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, breaks: &[f64], mut f: F) -> f64 {
        breaks
            .windows(2)
            .map(|w| self.integrate(w[0], w[1], &mut f))
            .sum()
    }

    /// Appends mapped nodes and weights for each panel of `breaks` to `out`.
    pub fn push_panel_nodes(&self, breaks: &[f64], out: &mut Vec<(f64, f64)>) {
        for w in breaks.windows(2) {
            let half = 0.5 * (w[1] - w[0]);
            let mid = 0.5 * (w[0] + w[1]);
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, wt * half));
            }
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Breakpoints on [a, b] refined geometrically toward `center`.
///
/// Panels adjacent to `center` have width `smallest`; each further panel is
/// `ratio` times wider. `center` is always a breakpoint when it lies inside.
pub fn graded_breaks(a: f64, b: f64, center: f64, smallest: f64, ratio: f64) -> Vec<f64> {
    graded_breaks_capped(a, b, center, smallest, ratio, f64::INFINITY)
}

/// As [`graded_breaks`], with panel widths growing no further than `largest`.
pub fn graded_breaks_capped(a: f64, b: f64, center: f64, smallest: f64, ratio: f64, largest: f64) -> Vec<f64> {
    assert!(b > a && smallest > 0.0 && ratio > 1.0 && largest >= smallest);
    let mut breaks = vec![a];
    let c = center.clamp(a, b);
    // left side: from c down to a
    let mut left = Vec::new();
    let mut w = smallest;
    let mut x = c;
    while x - a > w * (1.0 + 0.5 * ratio) {
        x -= w;
        left.push(x);
        w = (w * ratio).min(largest);
    }
    left.reverse();
    breaks.extend(left);
    if c > a && c < b {
        breaks.push(c);
    }
    let mut w = smallest;
    let mut x = c;
    while b - x > w * (1.0 + 0.5 * ratio) {
        x += w;
        breaks.push(x);
        w = (w * ratio).min(largest);
    }
    breaks.push(b);
    breaks.dedup();
    breaks
}

/// Merges several sorted breakpoint lists, dropping near-duplicates.
pub fn merge_breaks(lists: &[Vec<f64>]) -> Vec<f64> {
    let mut all: Vec<f64> = lists.iter().flatten().copied().collect();
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let span = all.last().unwrap() - all.first().unwrap();
    let tiny = 1e-14 * span.max(1e-300);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        if out.last().map_or(true, |&l| x - l > tiny) {
            out.push(x);
        }
    }
    out
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive G7/K15 integration of `f` over [a, b].
///
/// Splits the interval with the largest error estimate until the summed
/// estimate falls below `max(abs_tol, rel_tol·|I|)` or `max_intervals`
/// is reached.
pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Adaptive {
    if a == b {
        return Adaptive { value: 0.0, error: 0.0, intervals: 0 };
    }
    let (v0, e0) = gk15(&mut f, a, b);
    let mut parts = vec![(a, b, v0, e0)];
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || parts.len() >= max_intervals {
            return Adaptive { value, error, intervals: parts.len() };
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.partial_cmp(&y.1 .3).unwrap())
            .unwrap();
        let (lo, hi, _, _) = parts[worst];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval cannot be split further in floating point
            return Adaptive { value, error, intervals: parts.len() };
        }
        parts.swap_remove(worst);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Integrates `f` over [a, ∞) via the map y = a + u/(1−u).
pub fn adaptive_gk_half_line<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Adaptive {
    adaptive_gk(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let v = 1.0 - u;
            f(a + u / v) / (v * v)
        },
        0.0,
        1.0,
        abs_tol,
        rel_tol,
        4000,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 8, 16, 33] {
            let gl = GaussLegendre::new(n);
            let wsum: f64 = gl.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-14, "n={n}");
            for k in 0..(2 * n) {
                let got = gl.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} k={k} got={got}");
            }
        }
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let gl = GaussLegendre::new(20);
        for w in gl.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..20 {
            assert!((gl.nodes[i] + gl.nodes[19 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn graded_breaks_cover_interval_and_hit_center() {
        let b = graded_breaks(-3.0, 5.0, 0.25, 1e-4, 2.0);
        assert_eq!(b[0], -3.0);
        assert_eq!(*b.last().unwrap(), 5.0);
        assert!(b.contains(&0.25));
        for w in b.windows(2) {
            assert!(w[1] > w[0]);
        }
        let edge = graded_breaks(0.0, 1.0, 0.0, 1e-3, 2.0);
        assert_eq!(edge[0], 0.0);
        assert!((edge[1] - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn adaptive_handles_log_singularity() {
        let r = adaptive_gk(|x: f64| x.ln(), 0.0, 1.0, 1e-13, 1e-13, 500);
        assert!((r.value + 1.0).abs() < 1e-11, "{r:?}");
    }

    #[test]
    fn half_line_integral() {
        let r = adaptive_gk_half_line(|y| 1.0 / (1.0 + y * y), 0.0, 1e-13, 1e-13);
        assert!((r.value - PI / 2.0).abs() < 1e-11);
        let r = adaptive_gk_half_line(|y: f64| (-y).exp(), 2.0, 1e-14, 1e-13);
        assert!((r.value - (-2.0f64).exp()).abs() < 1e-12);
    }
}
