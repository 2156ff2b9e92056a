//! Independent numerical oracles shared by the integration tests.
//!
//! Everything here consumes only `model::field` evaluations (plus generic
//! linear algebra), never the closed-form derivatives, so agreement with
//! the library is a genuine cross-check.

#![allow(dead_code)]

use lgallee_core::model::{field, ModelParams};

/// Central first partial, step 1e-5.
pub fn fd_first(p: &ModelParams, x: f64, y: f64, comp: usize, dir: usize) -> f64 {
    let h = 1e-5;
    let (dx, dy) = if dir == 0 { (h, 0.0) } else { (0.0, h) };
    (field(p, x + dx, y + dy)[comp] - field(p, x - dx, y - dy)[comp]) / (2.0 * h)
}

/// Central second partials, step 1e-4.
pub fn fd_second(p: &ModelParams, x: f64, y: f64, comp: usize, dirs: (usize, usize)) -> f64 {
    let h = 1e-4;
    match dirs {
        (0, 0) => {
            (field(p, x + h, y)[comp] - 2.0 * field(p, x, y)[comp] + field(p, x - h, y)[comp])
                / (h * h)
        }
        (1, 1) => {
            (field(p, x, y + h)[comp] - 2.0 * field(p, x, y)[comp] + field(p, x, y - h)[comp])
                / (h * h)
        }
        _ => {
            (field(p, x + h, y + h)[comp] - field(p, x + h, y - h)[comp]
                - field(p, x - h, y + h)[comp]
                + field(p, x - h, y - h)[comp])
                / (4.0 * h * h)
        }
    }
}

/// Five-point third derivative along a line through (x, y).
fn third_stencil(
    p: &ModelParams,
    x: f64,
    y: f64,
    comp: usize,
    dir: (f64, f64),
    h: f64,
) -> f64 {
    let g = |t: f64| field(p, x + t * dir.0, y + t * dir.1)[comp];
    (g(2.0 * h) - 2.0 * g(h) + 2.0 * g(-h) - g(-2.0 * h)) / (2.0 * h * h * h)
}

/// Third derivative along a direction with two Richardson levels; the
/// base step scales with x so the stencil stays clear of the pole at
/// x = 0, and is large enough that the 1/h^3 rounding amplification stays
/// below the truncation budget.
pub fn fd_third_dir(p: &ModelParams, x: f64, y: f64, comp: usize, dir: (f64, f64)) -> f64 {
    let h = 0.03 * x.min(1.0);
    let d = |hh: f64| third_stencil(p, x, y, comp, dir, hh);
    let r1 = |hh: f64| (4.0 * d(hh / 2.0) - d(hh)) / 3.0;
    (16.0 * r1(h / 2.0) - r1(h)) / 15.0
}

/// Five-point first derivative in y (exact for the cubic y-dependence of
/// the predator equation) of a function given by a closure.
fn dy5<F: Fn(f64) -> f64>(g: F, h: f64) -> f64 {
    (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h)
}

/// Mixed third partial d^3 f / dx^2 dy via a y-derivative of x-stencils.
pub fn fd_xxy(p: &ModelParams, x: f64, y: f64, comp: usize) -> f64 {
    let hy = 0.05;
    let fxx = |yy: f64| {
        let h = 0.01 * x.min(1.0);
        let d = |hh: f64| {
            (field(p, x + hh, yy)[comp] - 2.0 * field(p, x, yy)[comp]
                + field(p, x - hh, yy)[comp])
                / (hh * hh)
        };
        (16.0 * ((4.0 * d(h / 4.0) - d(h / 2.0)) / 3.0) - (4.0 * d(h / 2.0) - d(h)) / 3.0) / 15.0
    };
    dy5(|t| fxx(y + t), hy)
}

/// Mixed third partial d^3 f / dx dy^2 via an x-derivative of y-stencils.
pub fn fd_xyy(p: &ModelParams, x: f64, y: f64, comp: usize) -> f64 {
    let hy = 0.05;
    let fyy = |xx: f64| {
        (field(p, xx, y + hy)[comp] - 2.0 * field(p, xx, y)[comp] + field(p, xx, y - hy)[comp])
            / (hy * hy)
    };
    let h = 0.01 * x.min(1.0);
    let d = |hh: f64| (fyy(x + hh) - fyy(x - hh)) / (2.0 * hh);
    let r1 = |hh: f64| (4.0 * d(hh / 2.0) - d(hh)) / 3.0;
    (16.0 * r1(h / 2.0) - r1(h)) / 15.0
}

/// Pure third y-derivative; the five-point stencil is exact here because
/// the field is cubic in y.
pub fn fd_yyy(p: &ModelParams, x: f64, y: f64, comp: usize) -> f64 {
    third_stencil(p, x, y, comp, (0.0, 1.0), 0.1)
}

/// All jet entries from finite differences, in the same normalization as
/// the library's Taylor coefficients.
pub struct FdJet {
    pub jacobian: [[f64; 2]; 2],
    pub a20: f64,
    pub a11: f64,
    pub a02: f64,
    pub b20: f64,
    pub b11: f64,
    pub b02: f64,
    pub a30: f64,
    pub a21: f64,
    pub a12: f64,
    pub a03: f64,
    pub b30: f64,
    pub b21: f64,
    pub b12: f64,
    pub b03: f64,
}

pub fn fd_jet(p: &ModelParams, x: f64, y: f64) -> FdJet {
    FdJet {
        jacobian: [
            [fd_first(p, x, y, 0, 0), fd_first(p, x, y, 0, 1)],
            [fd_first(p, x, y, 1, 0), fd_first(p, x, y, 1, 1)],
        ],
        a20: 0.5 * fd_second(p, x, y, 0, (0, 0)),
        a11: fd_second(p, x, y, 0, (0, 1)),
        a02: 0.5 * fd_second(p, x, y, 0, (1, 1)),
        b20: 0.5 * fd_second(p, x, y, 1, (0, 0)),
        b11: fd_second(p, x, y, 1, (0, 1)),
        b02: 0.5 * fd_second(p, x, y, 1, (1, 1)),
        a30: fd_third_dir(p, x, y, 0, (1.0, 0.0)) / 6.0,
        a21: fd_xxy(p, x, y, 0) / 2.0,
        a12: fd_xyy(p, x, y, 0) / 2.0,
        a03: fd_yyy(p, x, y, 0) / 6.0,
        b30: fd_third_dir(p, x, y, 1, (1.0, 0.0)) / 6.0,
        b21: fd_xxy(p, x, y, 1) / 2.0,
        b12: fd_xyy(p, x, y, 1) / 2.0,
        b03: fd_yyy(p, x, y, 1) / 6.0,
    }
}

/// Relative discrepancy guarded against small magnitudes.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Eigenvalues (re, im pairs) of a 2x2 matrix.
pub fn eigenvalues(j: &[[f64; 2]; 2]) -> [(f64, f64); 2] {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(0.5 * (tr + r), 0.0), (0.5 * (tr - r), 0.0)]
    } else {
        let w = 0.5 * (-disc).sqrt();
        [(0.5 * tr, w), (0.5 * tr, -w)]
    }
}

/// High-order finite-difference Jacobian (five-point first derivatives,
/// step 1e-3), accurate enough for 1e-12-level eigen comparisons.
pub fn fd_jacobian_hi(p: &ModelParams, x: f64, y: f64) -> [[f64; 2]; 2] {
    let h = 1e-3;
    let d = |comp: usize, dir: usize| {
        let g = |t: f64| {
            let (dx, dy) = if dir == 0 { (t, 0.0) } else { (0.0, t) };
            field(p, x + dx, y + dy)[comp]
        };
        dy5(g, h)
    };
    [[d(0, 0), d(0, 1)], [d(1, 0), d(1, 1)]]
}

/// Bisection oracle for the critical growth rate at a diagonal point: the
/// root of the finite-difference trace, entirely independent of the
/// closed forms.
pub fn bisect_critical_s(p: &ModelParams, x: f64, y: f64, lo: f64, hi: f64) -> f64 {
    let tr = |s: f64| {
        let ps = ModelParams::new(p.q, p.h, s, p.m).unwrap();
        let j = fd_jacobian_hi(&ps, x, y);
        j[0][0] + j[1][1]
    };
    let (mut lo, mut hi) = (lo, hi);
    let flo = tr(lo);
    assert!(
        flo * tr(hi) <= 0.0,
        "trace must change sign on the bracket"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tr(mid) * flo.signum() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Saddle-node quadratic coefficient recomputed from purely
/// finite-difference data: the null directions of the finite-difference
/// Jacobian and the finite-difference quadratic form.
pub fn fd_center_quadratic(p: &ModelParams, x: f64, y: f64) -> f64 {
    let j = fd_jacobian_hi(p, x, y);
    let tr = j[0][0] + j[1][1];
    let null_of = |m: &[[f64; 2]; 2]| -> [f64; 2] {
        let r0 = m[0][0].abs().max(m[0][1].abs());
        let r1 = m[1][0].abs().max(m[1][1].abs());
        let (a, b) = if r0 >= r1 {
            (m[0][0], m[0][1])
        } else {
            (m[1][0], m[1][1])
        };
        let v = [b, -a];
        if v[0].abs() > 1e-12 * v[0].abs().max(v[1].abs()) {
            [1.0, v[1] / v[0]]
        } else {
            [0.0, 1.0]
        }
    };
    let v0 = null_of(&j);
    let shifted = [[j[0][0] - tr, j[0][1]], [j[1][0], j[1][1] - tr]];
    let v1 = null_of(&shifted);
    let det_u = v0[0] * v1[1] - v0[1] * v1[0];
    let quad = |comp: usize| {
        0.5 * fd_second(p, x, y, comp, (0, 0)) * v0[0] * v0[0]
            + fd_second(p, x, y, comp, (0, 1)) * v0[0] * v0[1]
            + 0.5 * fd_second(p, x, y, comp, (1, 1)) * v0[1] * v0[1]
    };
    (v1[1] * quad(0) - v1[0] * quad(1)) / det_u
}
