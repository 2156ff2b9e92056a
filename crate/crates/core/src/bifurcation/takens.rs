//! Two-parameter unfolding of the codimension-2 cusp on the diagonal fold.
//!
//! At h3 = 1/(4(q+1)) the diagonal equilibria collide at (2h3, 2h3); at the
//! growth rate s1 the collision point has a double zero eigenvalue with a
//! nondegenerate quadratic normal form. Perturbing (h, s) = (h3 + eta1,
//! s1 + eta2) and reducing the expanded system through a fixed sequence of
//! polynomial changes of variables and one time reparameterization brings
//! it to
//!
//! ```text
//! u' = v,   v' = l00 + l01 v + u^2 + u v + O(3)
//! ```
//!
//! whose constants (l00, l01) are the unfolding values. The chain is run
//! numerically on truncated polynomials; the named coefficients of every
//! intermediate stage are read off and reported, and a pointwise self-check
//! compares each stage against the exact vector field pushed through the
//! same transformations.

use crate::classification::ZERO_BAND;
use crate::equilibria::{solve_diagonal, Label};
use crate::model::{ModelParams, State};
use crate::poly::Poly2;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Perturbations are restricted to this box; beyond it the quadratic
/// truncation no longer dominates.
pub const ETA_BOX: f64 = 1e-3;
/// Central-difference step for the unfolding determinant.
pub const UNFOLD_FD_STEP: f64 = 1e-5;

/// The organizing center of the unfolding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtOrganizingCenter {
    pub q: f64,
    pub m: f64,
    /// Harvest at the diagonal fold, 1/(4(q+1)).
    pub h3: f64,
    /// Growth rate with zero trace at the fold point.
    pub s1: f64,
    pub cusp: State,
}

/// Validates (q, m) and computes the organizing center. Fails when the
/// cusp conditions (m != 2 h3, s1 > 0) cannot hold.
pub fn bt_organizing_center(q: f64, m: f64) -> Result<BtOrganizingCenter> {
    if !(q > 0.0) {
        return Err(Error::domain("q must be positive"));
    }
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::domain("m must lie in (0, 1)"));
    }
    let h3 = 0.25 / (q + 1.0);
    let x7 = 2.0 * h3;
    if (m - x7).abs() <= 1e-9 {
        return Err(Error::degenerate(
            "m coincides with the fold point; the cusp conditions fail",
        ));
    }
    let s1 = (4.0 * h3 - 1.0) / (2.0 * (m - x7));
    if !(s1 > 0.0) {
        return Err(Error::infeasible(format!(
            "critical growth rate s1 = {s1} is not positive"
        )));
    }
    Ok(BtOrganizingCenter {
        q,
        m,
        h3,
        s1,
        cusp: State::new(x7, x7),
    })
}

/// Coefficients of the expansion of the perturbed field at the fold point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage20 {
    pub a00: f64,
    pub a10: f64,
    pub a01: f64,
    pub a20: f64,
    pub a11: f64,
    pub b10: f64,
    pub b01: f64,
    pub b20: f64,
    pub b11: f64,
    pub b02: f64,
}

/// After the linear change v2 = a10 u1 + a01 v1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage21 {
    pub c00: f64,
    pub c20: f64,
    pub c11: f64,
    pub d00: f64,
    pub d10: f64,
    pub d01: f64,
    pub d20: f64,
    pub d11: f64,
    pub d02: f64,
}

/// After introducing the velocity coordinate v3 = du2/dt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage22 {
    pub e00: f64,
    pub e10: f64,
    pub e01: f64,
    pub e20: f64,
    pub e11: f64,
    pub e02: f64,
}

/// After the time reparameterization and v4 = v3 (1 - e02 u3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage24 {
    pub f00: f64,
    pub f10: f64,
    pub f01: f64,
    pub f20: f64,
    pub f11: f64,
}

/// After scaling the quadratic coefficient to unit magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage25 {
    pub g00: f64,
    pub g10: f64,
    pub g01: f64,
    pub g11: f64,
}

/// After the shift removing the linear term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage26 {
    pub h00: f64,
    pub h01: f64,
    pub h11: f64,
}

/// The final normal form constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage27 {
    pub l00: f64,
    pub l01: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtReport {
    pub center: BtOrganizingCenter,
    pub eta1: f64,
    pub eta2: f64,
    pub stage20: Stage20,
    pub stage21: Stage21,
    pub stage22: Stage22,
    pub stage24: Stage24,
    pub stage25: Stage25,
    pub stage26: Stage26,
    pub l00: f64,
    pub l01: f64,
    /// Sign of the quadratic coefficient before unit scaling.
    pub f20_sign: f64,
    /// True when the final scaling reverses the time direction (only in
    /// the positive-f20 branch with negative h11).
    pub time_reversed: bool,
    /// det d(l00, l01)/d(eta1, eta2) at eta = 0, by central differences.
    pub unfold_determinant: f64,
}

/// The full chain state: stage polynomials plus the transformation data
/// needed to map points and velocities through the chain.
pub(crate) struct BtChain {
    pub params: ModelParams,
    pub x0: f64,
    // (udot, vdot) polynomials after each stage, in that stage's coords.
    pub sys20: (Poly2, Poly2),
    pub sys21: (Poly2, Poly2),
    pub sys22: (Poly2, Poly2),
    pub sys23: (Poly2, Poly2),
    pub sys24: (Poly2, Poly2),
    pub sys25: (Poly2, Poly2),
    pub sys26: (Poly2, Poly2),
    pub sys27: (Poly2, Poly2),
    pub stage20: Stage20,
    pub stage21: Stage21,
    pub stage22: Stage22,
    pub stage24: Stage24,
    pub stage25: Stage25,
    pub stage26: Stage26,
    pub stage27: Stage27,
    pub omega: f64,
    pub f20_sign: f64,
    pub shift: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn coeff_band(scale: f64) -> f64 {
    ZERO_BAND * scale.max(1.0)
}

impl BtChain {
    pub fn build(center: &BtOrganizingCenter, eta1: f64, eta2: f64) -> Result<Self> {
        if eta1.abs() > ETA_BOX * (1.0 + 1e-9) || eta2.abs() > ETA_BOX * (1.0 + 1e-9) {
            return Err(Error::domain(format!(
                "perturbations must stay within +/-{ETA_BOX}"
            )));
        }
        let h = center.h3 + eta1;
        let s = center.s1 + eta2;
        let params = ModelParams::new(center.q, h, s, center.m)?;
        let x0 = center.cusp.x;
        let q = center.q;
        let m = center.m;

        let u = Poly2::var_u();
        let v = Poly2::var_v();

        // Stage (20): degree-4 expansion of the perturbed field at the
        // unperturbed fold point. The prey equation is exactly quadratic;
        // the predator equation is s * (ys^2 - m ys - (ys^3 - m ys^2)/x),
        // expanded through the truncated series of 1/(x0 + u).
        let xs = u.add(&Poly2::constant(x0));
        let ys = v.add(&Poly2::constant(x0));
        let p20 = xs
            .mul(&Poly2::constant(1.0).sub(&xs))
            .sub(&xs.mul(&ys).scale(q))
            .sub(&Poly2::constant(h));
        let ys2 = ys.mul(&ys);
        let ys3 = ys2.mul(&ys);
        let a_poly = ys2.sub(&ys.scale(m));
        let b_poly = ys3.sub(&ys2.scale(m));
        let inv_x = Poly2::geometric_inverse(&u.scale(1.0 / x0)).scale(1.0 / x0);
        let q20 = a_poly.sub(&b_poly.mul(&inv_x)).scale(s);

        let stage20 = Stage20 {
            a00: p20.coeff(0, 0),
            a10: p20.coeff(1, 0),
            a01: p20.coeff(0, 1),
            a20: p20.coeff(2, 0),
            a11: p20.coeff(1, 1),
            b10: q20.coeff(1, 0),
            b01: q20.coeff(0, 1),
            b20: q20.coeff(2, 0),
            b11: q20.coeff(1, 1),
            b02: q20.coeff(0, 2),
        };
        let (a10, a01) = (stage20.a10, stage20.a01);
        if a01.abs() <= coeff_band(1.0) {
            return Err(Error::degenerate("a01 vanishes; the chain breaks down"));
        }

        // Stage (21): u2 = u1, v2 = a10 u1 + a01 v1.
        let sub21_v = v.sub(&u.scale(a10)).scale(1.0 / a01);
        let p21 = p20.compose(&u, &sub21_v);
        let q21 = p20
            .scale(a10)
            .add(&q20.scale(a01))
            .compose(&u, &sub21_v);
        let stage21 = Stage21 {
            c00: p21.coeff(0, 0),
            c20: p21.coeff(2, 0),
            c11: p21.coeff(1, 1),
            d00: q21.coeff(0, 0),
            d10: q21.coeff(1, 0),
            d01: q21.coeff(0, 1),
            d20: q21.coeff(2, 0),
            d11: q21.coeff(1, 1),
            d02: q21.coeff(0, 2),
        };
        debug_assert!(
            (p21.coeff(0, 1) - 1.0).abs() < 1e-12 && p21.coeff(0, 2).abs() < 1e-12,
            "prey equation must stay quadratic with unit v coefficient"
        );

        // Stage (22): v3 = du2/dt = c00 + v2 + c20 u^2 + c11 u v2, exactly
        // quadratic, so the inverse is rational:
        // v2 = (v3 - c00 - c20 u^2) / (1 + c11 u).
        let (c00, c20, c11) = (stage21.c00, stage21.c20, stage21.c11);
        let numer = v
            .sub(&Poly2::constant(c00))
            .sub(&Poly2::monomial(c20, 2, 0));
        let sub22_v = numer.mul(&Poly2::geometric_inverse(&u.scale(c11)));
        let q22 = p21
            .d_du()
            .mul(&p21)
            .add(&p21.d_dv().mul(&q21))
            .compose(&u, &sub22_v);
        let p22 = v.clone();
        let stage22 = Stage22 {
            e00: q22.coeff(0, 0),
            e10: q22.coeff(1, 0),
            e01: q22.coeff(0, 1),
            e20: q22.coeff(2, 0),
            e11: q22.coeff(1, 1),
            e02: q22.coeff(0, 2),
        };
        let e02 = stage22.e02;

        // Stage (23): time reparameterization dt = (1 - e02 u3) dtau.
        let mult = Poly2::constant(1.0).sub(&u.scale(e02));
        let p23 = mult.mul(&p22);
        let q23 = mult.mul(&q22);

        // Stage (24): v4 = v3 (1 - e02 u3); dv4/dtau = (1 - e02 u) dv3/dtau
        // - e02 v3 du3/dtau, then substitute v3 = v4 / (1 - e02 u4).
        let q24_pre = mult.mul(&q23).sub(&v.mul(&p23).scale(e02));
        let sub24_v = v.mul(&Poly2::geometric_inverse(&u.scale(-e02)));
        let q24 = q24_pre.compose(&u, &sub24_v);
        let stage24 = Stage24 {
            f00: q24.coeff(0, 0),
            f10: q24.coeff(1, 0),
            f01: q24.coeff(0, 1),
            f20: q24.coeff(2, 0),
            f11: q24.coeff(1, 1),
        };
        debug_assert!(q24.coeff(0, 2).abs() < 1e-9, "v^2 term must cancel");

        // Stage (25): scale the quadratic coefficient to +/-1. Both signs
        // of f20 are supported through |f20|.
        let f20 = stage24.f20;
        if f20.abs() <= coeff_band(1.0) {
            return Err(Error::degenerate(
                "quadratic coefficient f20 vanishes; the chain breaks down",
            ));
        }
        let f20_sign = f20.signum();
        let omega = f20.abs().sqrt();
        let q25 = q24.compose(&u, &v.scale(omega)).scale(1.0 / (omega * omega));
        let stage25 = Stage25 {
            g00: q25.coeff(0, 0),
            g10: q25.coeff(1, 0),
            g01: q25.coeff(0, 1),
            g11: q25.coeff(1, 1),
        };

        // Stage (26): shift u to remove the linear term. The quadratic
        // coefficient is sign(f20) after the unit scaling, so the shift is
        // -g10 / (2 sign(f20)).
        let shift = -0.5 * stage25.g10 / f20_sign;
        let q26 = q25.compose(&u.add(&Poly2::constant(shift)), &v);
        let stage26 = Stage26 {
            h00: q26.coeff(0, 0),
            h01: q26.coeff(0, 1),
            h11: q26.coeff(1, 1),
        };
        let h11 = stage26.h11;
        if h11.abs() <= coeff_band(1.0) {
            return Err(Error::degenerate(
                "cross coefficient h11 vanishes; the chain breaks down",
            ));
        }

        // Stage (27): (u7, v7) = (alpha u6, beta v6), t2 = gamma t1 with
        // gamma = sign(f20)/h11, alpha = sign(f20) h11^2, beta = h11^3,
        // which sets both normal-form coefficients to +1.
        let gamma = f20_sign / h11;
        let alpha = f20_sign * h11 * h11;
        let beta = h11 * h11 * h11;
        let q27 = q26
            .compose(&u.scale(1.0 / alpha), &v.scale(1.0 / beta))
            .scale(beta / gamma);
        let stage27 = Stage27 {
            l00: q27.coeff(0, 0),
            l01: q27.coeff(0, 1),
        };
        // The uv coefficient is 1 by construction. The u^2 coefficient is
        // 1 up to the retained cubic terms pulled down by the shift (the
        // truncated normal form makes it exactly 1); both are O(eta) away
        // from unity inside the perturbation box.
        debug_assert!((q27.coeff(1, 1) - 1.0).abs() < 1e-9);
        debug_assert!((q27.coeff(2, 0) - 1.0).abs() < 1.0);

        Ok(Self {
            params,
            x0,
            sys20: (p20, q20),
            sys21: (p21, q21),
            sys22: (p22, q22),
            sys23: (p23, q23),
            sys24: (v.clone(), q24),
            sys25: (v.clone(), q25),
            sys26: (v.clone(), q26),
            sys27: (v, q27),
            stage20,
            stage21,
            stage22,
            stage24,
            stage25,
            stage26,
            stage27,
            omega,
            f20_sign,
            shift,
            alpha,
            beta,
            gamma,
        })
    }

    /// Stage-20 coordinates of a point given in stage-k coordinates,
    /// through the closed-form inverse of each change of variables.
    pub fn stage20_coords(&self, stage: usize, w: [f64; 2]) -> [f64; 2] {
        let mut x = w;
        let mut k = stage;
        while k > 0 {
            x = match k {
                7 => [x[0] / self.alpha, x[1] / self.beta],
                6 => [x[0] + self.shift, x[1]],
                5 => [x[0], self.omega * x[1]],
                4 => [x[0], x[1] / (1.0 - self.stage22.e02 * x[0])],
                3 => x,
                2 => {
                    let (c00, c20, c11) =
                        (self.stage21.c00, self.stage21.c20, self.stage21.c11);
                    [
                        x[0],
                        (x[1] - c00 - c20 * x[0] * x[0]) / (1.0 + c11 * x[0]),
                    ]
                }
                1 => [
                    x[0],
                    (x[1] - self.stage20.a10 * x[0]) / self.stage20.a01,
                ],
                _ => unreachable!(),
            };
            k -= 1;
        }
        x
    }

    /// Positions of one physical point in every stage's coordinates,
    /// starting from stage-20 coordinates (u1, v1).
    pub fn positions(&self, u1: f64, v1: f64) -> [[f64; 2]; 8] {
        let s20 = [u1, v1];
        let s21 = [u1, self.stage20.a10 * u1 + self.stage20.a01 * v1];
        let (c00, c20, c11) = (self.stage21.c00, self.stage21.c20, self.stage21.c11);
        let v3 = c00 + s21[1] + c20 * s21[0] * s21[0] + c11 * s21[0] * s21[1];
        let s22 = [s21[0], v3];
        let s23 = s22;
        let e02 = self.stage22.e02;
        let s24 = [s22[0], s22[1] * (1.0 - e02 * s22[0])];
        let s25 = [s24[0], s24[1] / self.omega];
        let s26 = [s25[0] - self.shift, s25[1]];
        let s27 = [self.alpha * s26[0], self.beta * s26[1]];
        [s20, s21, s22, s23, s24, s25, s26, s27]
    }

    /// The true field velocity at the physical point, pushed through every
    /// stage (accounting for the time rescalings).
    pub fn true_velocities(&self, u1: f64, v1: f64) -> [[f64; 2]; 8] {
        let pos = self.positions(u1, v1);
        let f = crate::model::field(&self.params, self.x0 + u1, self.x0 + v1);
        let w20 = f;
        let w21 = [
            w20[0],
            self.stage20.a10 * w20[0] + self.stage20.a01 * w20[1],
        ];
        let (c20, c11) = (self.stage21.c20, self.stage21.c11);
        let (u2, v2) = (pos[1][0], pos[1][1]);
        let w22 = [
            w21[0],
            (2.0 * c20 * u2 + c11 * v2) * w21[0] + (1.0 + c11 * u2) * w21[1],
        ];
        let e02 = self.stage22.e02;
        let factor = 1.0 - e02 * pos[2][0];
        let w23 = [factor * w22[0], factor * w22[1]];
        let (u3, v3) = (pos[2][0], pos[2][1]);
        let w24 = [
            w23[0],
            (1.0 - e02 * u3) * w23[1] - e02 * v3 * w23[0],
        ];
        let w25 = [w24[0] / self.omega, w24[1] / (self.omega * self.omega)];
        let w26 = w25;
        let w27 = [
            self.alpha / self.gamma * w26[0],
            self.beta / self.gamma * w26[1],
        ];
        [w20, w21, w22, w23, w24, w25, w26, w27]
    }

    /// Largest discrepancy between the stage polynomials and the true
    /// field pushed through the chain. Each stage is probed at the given
    /// points taken in its own coordinates (transform-then-evaluate versus
    /// evaluate-original-then-transform).
    pub fn self_check(&self, probes: &[[f64; 2]]) -> f64 {
        let systems = [
            &self.sys20, &self.sys21, &self.sys22, &self.sys23, &self.sys24, &self.sys25,
            &self.sys26, &self.sys27,
        ];
        let mut worst = 0.0f64;
        for (k, sys) in systems.iter().enumerate() {
            for &w in probes {
                let base = self.stage20_coords(k, w);
                let pos = self.positions(base[0], base[1]);
                let vel = self.true_velocities(base[0], base[1]);
                debug_assert!(
                    (pos[k][0] - w[0]).abs() < 1e-12 && (pos[k][1] - w[1]).abs() < 1e-12,
                    "chain inverses disagree with the forward maps"
                );
                let pu = sys.0.eval(pos[k][0], pos[k][1]);
                let pv = sys.1.eval(pos[k][0], pos[k][1]);
                worst = worst.max((pu - vel[k][0]).abs()).max((pv - vel[k][1]).abs());
            }
        }
        worst
    }

    pub fn report(&self, center: &BtOrganizingCenter, eta1: f64, eta2: f64) -> BtReport {
        BtReport {
            center: *center,
            eta1,
            eta2,
            stage20: self.stage20,
            stage21: self.stage21,
            stage22: self.stage22,
            stage24: self.stage24,
            stage25: self.stage25,
            stage26: self.stage26,
            l00: self.stage27.l00,
            l01: self.stage27.l01,
            f20_sign: self.f20_sign,
            time_reversed: self.gamma < 0.0,
            unfold_determinant: 0.0,
        }
    }
}

fn unfolding_values(center: &BtOrganizingCenter, eta1: f64, eta2: f64) -> Result<(f64, f64)> {
    let chain = BtChain::build(center, eta1, eta2)?;
    Ok((chain.stage27.l00, chain.stage27.l01))
}

/// Central-difference determinant of the map (eta1, eta2) -> (l00, l01)
/// at the origin.
fn unfolding_determinant(center: &BtOrganizingCenter) -> Result<f64> {
    let d = UNFOLD_FD_STEP;
    let (l00_p1, l01_p1) = unfolding_values(center, d, 0.0)?;
    let (l00_m1, l01_m1) = unfolding_values(center, -d, 0.0)?;
    let (l00_p2, l01_p2) = unfolding_values(center, 0.0, d)?;
    let (l00_m2, l01_m2) = unfolding_values(center, 0.0, -d)?;
    let j11 = (l00_p1 - l00_m1) / (2.0 * d);
    let j12 = (l00_p2 - l00_m2) / (2.0 * d);
    let j21 = (l01_p1 - l01_m1) / (2.0 * d);
    let j22 = (l01_p2 - l01_m2) / (2.0 * d);
    Ok(j11 * j22 - j12 * j21)
}

/// Runs the full unfolding chain for the perturbation (eta1, eta2) and
/// attaches the nondegeneracy determinant at the origin.
pub fn bt_unfold(q: f64, m: f64, eta1: f64, eta2: f64) -> Result<BtReport> {
    let center = bt_organizing_center(q, m)?;
    let chain = BtChain::build(&center, eta1, eta2)?;
    let mut report = chain.report(&center, eta1, eta2);
    report.unfold_determinant = unfolding_determinant(&center)?;
    Ok(report)
}

/// Maximum pointwise residual of the stage-by-stage self-check over
/// `n_points` probe points within the given radius of the origin.
pub fn bt_chain_self_check(
    q: f64,
    m: f64,
    eta1: f64,
    eta2: f64,
    radius: f64,
    n_points: usize,
) -> Result<f64> {
    let center = bt_organizing_center(q, m)?;
    let chain = BtChain::build(&center, eta1, eta2)?;
    // Deterministic golden-angle spiral in the disc.
    let golden = PI_GOLDEN;
    let probes: Vec<[f64; 2]> = (0..n_points)
        .map(|i| {
            let r = radius * ((i + 1) as f64 / n_points as f64).sqrt();
            let th = golden * i as f64;
            [r * th.cos(), r * th.sin()]
        })
        .collect();
    Ok(chain.self_check(&probes))
}

const PI_GOLDEN: f64 = 2.399963229728653;

/// Qualitative regime of one census cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BtRegime {
    /// No diagonal equilibria near the fold point.
    NoEquilibria,
    /// A single degenerate point (on the fold curve).
    Fold,
    /// Saddle plus a stable companion.
    SaddleStable,
    /// Saddle plus an unstable companion.
    SaddleUnstable,
    /// Saddle plus a neutral (zero-trace) companion.
    SaddleCenter,
    /// Probing trajectories escaped the domain.
    Escape,
}

impl fmt::Display for BtRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BtRegime::NoEquilibria => "none",
            BtRegime::Fold => "fold",
            BtRegime::SaddleStable => "saddle_stable",
            BtRegime::SaddleUnstable => "saddle_unstable",
            BtRegime::SaddleCenter => "saddle_center",
            BtRegime::Escape => "escape",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for BtRegime {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(BtRegime::NoEquilibria),
            "fold" => Ok(BtRegime::Fold),
            "saddle_stable" => Ok(BtRegime::SaddleStable),
            "saddle_unstable" => Ok(BtRegime::SaddleUnstable),
            "saddle_center" => Ok(BtRegime::SaddleCenter),
            "escape" => Ok(BtRegime::Escape),
            other => Err(format!("unknown regime {other:?}")),
        }
    }
}

/// One cell of the phase census.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtCensusCell {
    pub eta1: f64,
    pub eta2: f64,
    pub equilibrium_count: u8,
    pub cycle_found: bool,
    pub regime: BtRegime,
}

/// Empirical census of one perturbation cell: counts the diagonal
/// equilibria near the fold point and probes for a small limit cycle
/// around the non-saddle one.
fn census_cell(center: &BtOrganizingCenter, eta1: f64, eta2: f64) -> BtCensusCell {
    use crate::bifurcation::hopf::{probe_small_cycle, ProbeOutcome, ProbeSettings};
    let h = center.h3 + eta1;
    let s = center.s1 + eta2;
    let mut cell = BtCensusCell {
        eta1,
        eta2,
        equilibrium_count: 0,
        cycle_found: false,
        regime: BtRegime::NoEquilibria,
    };
    let params = match ModelParams::new(center.q, h, s, center.m) {
        Ok(p) => p,
        Err(_) => return cell,
    };
    let near: Vec<_> = solve_diagonal(&params)
        .into_iter()
        .filter(|e| (e.x() - center.cusp.x).abs() < 0.2)
        .collect();
    cell.equilibrium_count = near.len() as u8;
    match near.len() {
        0 => cell,
        1 => {
            cell.regime = BtRegime::Fold;
            cell
        }
        _ => {
            let focus = near
                .iter()
                .find(|e| e.labels.contains(&Label::E8))
                .or_else(|| near.first())
                .expect("nonempty");
            let jet = match crate::model::jet3(&params, &focus.point) {
                Ok(j) => j,
                Err(_) => return cell,
            };
            let tr = jet.trace();
            let band = ZERO_BAND * jet.jacobian_norm().max(1.0);
            cell.regime = if tr < -band {
                BtRegime::SaddleStable
            } else if tr > band {
                BtRegime::SaddleUnstable
            } else {
                BtRegime::SaddleCenter
            };

            let gap = (near[0].x() - near[1].x()).abs().max(1e-9);
            let settings_for = |displacement: f64| ProbeSettings {
                window_radius: 2.5 * gap,
                displacement,
                amplitude_floor: (0.02 * gap).max(1e-9),
                shear_safe_radius: 0.45 * gap,
                max_crossings: 150,
                max_time: 6e5,
                residual_tol: 1e-6,
            };
            let mut escaped = false;
            'probe: for frac in [0.25, 0.1, 0.45] {
                for backward in [true, false] {
                    match probe_small_cycle(
                        &params,
                        &focus.point,
                        backward,
                        &settings_for(frac * gap),
                    ) {
                        Ok(ProbeOutcome::Cycle { .. }) => {
                            cell.cycle_found = true;
                            break 'probe;
                        }
                        Ok(_) => {}
                        Err(Error::Escape(_)) => {
                            escaped = true;
                        }
                        Err(_) => {}
                    }
                }
            }
            if escaped && !cell.cycle_found {
                cell.regime = BtRegime::Escape;
            }
            cell
        }
    }
}

/// Census over an explicit grid of perturbations, every value within the
/// +/-1e-3 box. Cells are processed on worker threads; the output order
/// matches the input order.
pub fn bt_phase_census(
    q: f64,
    m: f64,
    grid: &[(f64, f64)],
) -> Result<Vec<BtCensusCell>> {
    let center = bt_organizing_center(q, m)?;
    for &(e1, e2) in grid {
        if e1.abs() > ETA_BOX * (1.0 + 1e-9) || e2.abs() > ETA_BOX * (1.0 + 1e-9) {
            return Err(Error::domain(format!(
                "census grid must stay within +/-{ETA_BOX}"
            )));
        }
    }
    Ok(grid
        .par_iter()
        .map(|&(e1, e2)| census_cell(&center, e1, e2))
        .collect())
}

/// Uniform n x n grid over the perturbation box, row-major in eta1 then
/// eta2.
pub fn uniform_eta_grid(n: usize) -> Vec<(f64, f64)> {
    let axis: Vec<f64> = if n == 1 {
        vec![0.0]
    } else {
        (0..n)
            .map(|i| -ETA_BOX + 2.0 * ETA_BOX * i as f64 / (n - 1) as f64)
            .collect()
    };
    let mut grid = Vec::with_capacity(n * n);
    for &e1 in &axis {
        for &e2 in &axis {
            grid.push((e1, e2));
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn organizing_center_reference_values() {
        let c = bt_organizing_center(1.0, 0.1).unwrap();
        assert_relative_eq!(c.h3, 0.125, max_relative = 1e-15);
        assert_relative_eq!(c.s1, 5.0 / 3.0, max_relative = 1e-13);
        assert_eq!((c.cusp.x, c.cusp.y), (0.25, 0.25));
        // Trace and determinant vanish at the organizing center.
        let p = ModelParams::new(1.0, c.h3, c.s1, 0.1).unwrap();
        let jet = crate::model::jet3(&p, &c.cusp).unwrap();
        assert!(jet.trace().abs() < 1e-13);
        assert!(jet.det().abs() < 1e-13);
    }

    #[test]
    fn organizing_center_rejects_degenerate_inputs() {
        assert!(bt_organizing_center(-1.0, 0.1).is_err());
        // m = 2 h3 = 0.25 at q = 1.
        assert!(matches!(
            bt_organizing_center(1.0, 0.25),
            Err(Error::Degenerate(_))
        ));
        // s1 < 0 when 2 m (q+1) > 1.
        assert!(matches!(
            bt_organizing_center(1.0, 0.4),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn unfolding_vanishes_at_origin() {
        let report = bt_unfold(1.0, 0.1, 0.0, 0.0).unwrap();
        assert!(report.l00.abs() <= 1e-8, "l00 = {}", report.l00);
        assert!(report.l01.abs() <= 1e-8, "l01 = {}", report.l01);
        assert!(report.unfold_determinant.abs() > 1e-6);
    }

    #[test]
    fn stage_coefficients_match_closed_forms_at_origin() {
        let report = bt_unfold(1.0, 0.1, 0.0, 0.0).unwrap();
        let s20 = report.stage20;
        assert_relative_eq!(s20.a00, 0.0, epsilon = 1e-14);
        assert_relative_eq!(s20.a10, 0.25, max_relative = 1e-12);
        assert_relative_eq!(s20.a01, -0.25, max_relative = 1e-12);
        assert_relative_eq!(s20.a20, -1.0, max_relative = 1e-12);
        assert_relative_eq!(s20.a11, -1.0, max_relative = 1e-12);
        // b20 = s (m - 2h)/(2h), b11 = s(3 - m/h), b02 = s(m/(2h) - 2).
        let s1 = 5.0 / 3.0;
        assert_relative_eq!(s20.b10, s1 * 0.15, max_relative = 1e-12);
        assert_relative_eq!(s20.b01, -s1 * 0.15, max_relative = 1e-12);
        assert_relative_eq!(s20.b20, s1 * (-0.15) / 0.25, max_relative = 1e-11);
        assert_relative_eq!(s20.b11, s1 * (3.0 - 0.8), max_relative = 1e-11);
        assert_relative_eq!(s20.b02, s1 * (0.4 - 2.0), max_relative = 1e-11);
        // The quadratic coefficient of the reduced system realizes the
        // negative sign (2h3 - 1/2)(q + 1).
        assert_relative_eq!(report.stage24.f20, -0.5, max_relative = 1e-11);
        assert_eq!(report.f20_sign, -1.0);
        assert!(!report.time_reversed);
        // h11 = -(s1 + q + 2)/sqrt(-f20).
        let expected_h11 = -(s1 + 3.0) / 0.5f64.sqrt();
        assert_relative_eq!(report.stage26.h11, expected_h11, max_relative = 1e-11);
    }

    #[test]
    fn eta1_controls_the_constant_term() {
        let report = bt_unfold(1.0, 0.1, 1e-4, 0.0).unwrap();
        assert_relative_eq!(report.stage20.a00, -1e-4, max_relative = 1e-9);
        assert!(report.l00.abs() > 1e-3, "l00 = {}", report.l00);
        // l01 stays second order along the eta1 axis.
        assert!(report.l01.abs() < 1e-2);
    }

    #[test]
    fn chain_self_check_is_tight() {
        for (eta1, eta2) in [(0.0, 0.0), (1e-3, -1e-3), (-5e-4, 7e-4)] {
            let worst = bt_chain_self_check(1.0, 0.1, eta1, eta2, 1e-3, 20).unwrap();
            assert!(worst <= 1e-8, "self-check residual {worst}");
        }
    }

    #[test]
    fn census_counts_split_at_the_fold() {
        let center_cells = bt_phase_census(
            1.0,
            0.1,
            &[(-1e-3, 0.0), (0.0, 0.0), (1e-3, 0.0)],
        )
        .unwrap();
        assert_eq!(center_cells[0].equilibrium_count, 2);
        assert_eq!(center_cells[1].equilibrium_count, 1);
        assert_eq!(center_cells[2].equilibrium_count, 0);
        assert_eq!(center_cells[1].regime, BtRegime::Fold);
    }

    #[test]
    fn census_rejects_out_of_box_grids() {
        assert!(bt_phase_census(1.0, 0.1, &[(2e-3, 0.0)]).is_err());
    }
}
