//! Principal-value integrals over grid-aligned offsets.
//!
//! An integral ∫_{|d|≤R} G(d) dd centred on a grid site is split with a smooth
//! logistic partition of unity χ(|d|): the far part (1−χ)G is summed with the
//! periodic trapezoid rule on grid offsets, and the near part χG is integrated
//! with Gauss–Legendre panels graded geometrically toward d = 0, using local
//! Lagrange interpolation of the sampled data. Structure on scales much finer
//! than h (the mixing width ε) is therefore resolved without refining the grid.

use crate::grid::{apply_stencil, lagrange_stencil, STENCIL};
use crate::quadrature::{graded_breaks_capped, GaussLegendre};

/// Tuning knobs for [`PvLayout`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvOptions {
    /// Gauss–Legendre order on each near-field panel.
    pub near_nodes: usize,
    /// Logistic transition width in grid cells.
    pub transition_cells: f64,
    /// Smallest near-field panel relative to min(scale, h).
    pub finest_fraction: f64,
    /// Largest near-field panel in grid cells; keeps the partition function resolved.
    pub max_panel_cells: f64,
}

impl Default for PvOptions {
    fn default() -> Self {
        Self { near_nodes: 10, transition_cells: 3.0, finest_fraction: 1.0 / 32.0, max_panel_cells: 2.0 }
    }
}

#[derive(Debug, Clone)]
pub struct NearNode {
    pub offset: f64,
    pub weight: f64,
    base_shift: i64,
    stencil: [f64; STENCIL],
}

/// Precomputed offsets and weights for one grid, window and fine scale.
#[derive(Debug, Clone)]
pub struct PvLayout {
    pub far: Vec<(i64, f64)>,
    pub near: Vec<NearNode>,
    n: usize,
    h: f64,
}

/// End weights of the sixth-order Gregory rule (trapezoid with endpoint
/// corrections), exact for polynomials of degree five.
const GREGORY_END: [f64; 5] = [95.0 / 288.0, 317.0 / 240.0, 23.0 / 30.0, 793.0 / 720.0, 157.0 / 160.0];

fn logistic_cut(d: f64, center: f64, width: f64) -> f64 {
    // 1 near the origin, 0 far away
    0.5 * (1.0 - ((d.abs() - center) / width).tanh())
}

impl PvLayout {
    /// `n` grid points of spacing `h`, window radius `radius` (clamped to the
    /// half period and rounded down to a whole number of cells) and fine scale
    /// `scale` (the mixing half-width). The window is cut sharply at the radius
    /// and the cut is integrated with Gregory end corrections.
    pub fn new(n: usize, h: f64, radius: f64, scale: f64, opts: PvOptions) -> Self {
        let half_period = 0.5 * n as f64 * h;
        let radius = radius.min(half_period);
        let mut width = opts.transition_cells * h;
        if 30.0 * width > radius {
            width = radius / 30.0;
        }
        let center = 15.0 * width;
        let near_radius = 30.0 * width;

        let kmax = (radius / h + 1e-9).floor() as i64;
        let mut far = Vec::with_capacity(2 * kmax as usize);
        for k in -kmax..=kmax {
            if k == 0 {
                continue;
            }
            let d = k as f64 * h;
            let mut w = h * (1.0 - logistic_cut(d, center, width));
            let from_end = (kmax - k.abs()) as usize;
            if from_end < GREGORY_END.len() {
                w *= GREGORY_END[from_end];
            }
            far.push((k, w));
        }

        let finest = (scale.min(h) * opts.finest_fraction).max(1e-12 * h);
        let gl = GaussLegendre::new(opts.near_nodes);
        let mut pts = Vec::new();
        let largest = (opts.max_panel_cells / opts.transition_cells * width).max(finest);
        let breaks = graded_breaks_capped(-near_radius, near_radius, 0.0, finest, 2.0, largest);
        gl.push_panel_nodes(&breaks, &mut pts);
        let near = pts
            .into_iter()
            .map(|(d, w)| {
                // position of x_j − d relative to x_j, in cells
                let (base_shift, stencil) = lagrange_stencil(-d / h);
                NearNode { offset: d, weight: w * logistic_cut(d, center, width), base_shift, stencil }
            })
            .collect();
        Self { far, near, n, h }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Value of periodic `samples` at x_j − node.offset.
    #[inline]
    pub fn interp(&self, node: &NearNode, samples: &[f64], j: usize) -> f64 {
        apply_stencil(samples, j as i64 + node.base_shift, &node.stencil)
    }

    /// ∫ G(d, f(x_j−d), f'(x_j−d)) dd over the window.
    pub fn integrate<const K: usize>(
        &self,
        j: usize,
        f: &[f64],
        fp: &[f64],
        mut g: impl FnMut(f64, f64, f64) -> [f64; K],
    ) -> [f64; K] {
        let n = self.n as i64;
        let h = self.h;
        let mut acc = [0.0; K];
        for &(k, w) in &self.far {
            let idx = (j as i64 - k).rem_euclid(n) as usize;
            let v = g(k as f64 * h, f[idx], fp[idx]);
            for i in 0..K {
                acc[i] += w * v[i];
            }
        }
        for node in &self.near {
            let fy = self.interp(node, f, j);
            let fpy = self.interp(node, fp, j);
            let v = g(node.offset, fy, fpy);
            for i in 0..K {
                acc[i] += node.weight * v[i];
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_integrate_smooth_even_function() {
        // ∫ e^{-d²} over a wide window equals √π
        let n = 256;
        let h = 40.0 / n as f64;
        let lay = PvLayout::new(n, h, 20.0, 1e-3, PvOptions::default());
        let f = vec![0.0; n];
        let v = lay.integrate(0, &f, &f, |d, _, _| [(-d * d).exp()]);
        assert!((v[0] - PI.sqrt()).abs() < 1e-12, "{}", v[0]);
    }

    #[test]
    fn resolves_scale_finer_than_grid() {
        // ∫ e^{-|d|/a} with a ≪ h: exact 2a(1 - e^{-R/a}) ≈ 2a
        let n = 128;
        let h = 0.1;
        let a = 1e-3;
        let lay = PvLayout::new(n, h, 6.4, a, PvOptions::default());
        let f = vec![0.0; n];
        let v = lay.integrate(3, &f, &f, |d, _, _| [(-d.abs() / a).exp()]);
        assert!((v[0] - 2.0 * a).abs() < 1e-12, "{}", v[0]);
    }

    #[test]
    fn hard_cut_is_high_order() {
        // ∫_{-R}^{R} e^{d/3} dd, not periodic over the window
        let exact = |r: f64| 3.0 * ((r / 3.0).exp() - (-r / 3.0).exp());
        let err = |n: usize| {
            let h = 20.0 / n as f64;
            let lay = PvLayout::new(n, h, 5.0, 0.1, PvOptions::default());
            let f = vec![0.0; n];
            (lay.integrate(0, &f, &f, |d, _, _| [(d / 3.0).exp()])[0] - exact(5.0)).abs()
        };
        let (e1, e2) = (err(256), err(512));
        assert!(e2 < 1e-10 && (e1 / e2).log2() > 5.5, "{e1:e} {e2:e}");
    }

    #[test]
    fn interpolation_follows_samples() {
        let n = 256;
        let l = 20.0;
        let h = l / n as f64;
        let lay = PvLayout::new(n, h, 10.0, 0.01, PvOptions::default());
        let xs: Vec<f64> = (0..n).map(|j| -0.5 * l + j as f64 * h).collect();
        let f: Vec<f64> = xs.iter().map(|x| (2.0 * PI * x / l).sin()).collect();
        let j = 17;
        for node in lay.near.iter().step_by(7) {
            let want = (2.0 * PI * (xs[j] - node.offset) / l).sin();
            assert!((lay.interp(node, &f, j) - want).abs() < 1e-12);
        }
    }
}
