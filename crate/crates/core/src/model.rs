//! The model: parameter spaces, vector field, and analytic derivatives.
//!
//! The dimensional system is
//!
//! ```text
//! dx/dt = r*x*(1 - x/K) - q*x*y - h
//! dy/dt = s*y*(1 - y/(b*x))*(y - m)
//! ```
//!
//! Rescaling x by K, y by bK, and time by 1/r yields the dimensionless
//! four-parameter system analyzed by the rest of the crate. All derivatives
//! up to third order are hand-derived closed forms; the x-equation is a
//! polynomial of total degree 2, so its second-order coefficient block is
//! constant and its cubic block is identically zero.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parameters of the dimensional system. All seven are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionalParams {
    /// Prey intrinsic growth rate (1/time).
    pub r: f64,
    /// Prey carrying capacity (individuals).
    pub k: f64,
    /// Predation rate.
    pub q_dim: f64,
    /// Ratio of predator carrying capacity to prey abundance.
    pub b: f64,
    /// Predator growth rate.
    pub s_dim: f64,
    /// Allee threshold (individuals).
    pub m_dim: f64,
    /// Harvest intensity (individuals/time).
    pub h_dim: f64,
}

impl DimensionalParams {
    pub fn new(
        r: f64,
        k: f64,
        q_dim: f64,
        b: f64,
        s_dim: f64,
        m_dim: f64,
        h_dim: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("r", r),
            ("K", k),
            ("q", q_dim),
            ("b", b),
            ("s", s_dim),
            ("m", m_dim),
            ("h", h_dim),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be positive")));
            }
        }
        Ok(Self {
            r,
            k,
            q_dim,
            b,
            s_dim,
            m_dim,
            h_dim,
        })
    }
}

/// Parameters of the dimensionless system.
///
/// Invariants: q > 0, h > 0, s > 0, 0 < m < 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Dimensionless predation rate.
    pub q: f64,
    /// Dimensionless harvest intensity.
    pub h: f64,
    /// Dimensionless predator growth rate.
    pub s: f64,
    /// Dimensionless Allee threshold, in (0, 1).
    pub m: f64,
}

impl ModelParams {
    pub fn new(q: f64, h: f64, s: f64, m: f64) -> Result<Self> {
        for (name, v) in [("q", q), ("h", h), ("s", s)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be positive")));
            }
        }
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::domain("m must lie in (0, 1)"));
        }
        Ok(Self { q, h, s, m })
    }

    /// Same parameters with the predator growth rate replaced.
    pub fn with_s(self, s: f64) -> Result<Self> {
        Self::new(self.q, self.h, s, self.m)
    }

    /// Same parameters with the harvest intensity replaced.
    pub fn with_h(self, h: f64) -> Result<Self> {
        Self::new(self.q, h, self.s, self.m)
    }
}

/// A point of the phase space.
///
/// The model's domain is x > 0, y >= 0; operations that require it check
/// x > 0 and report a domain error otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Converts dimensional parameters to the dimensionless set
/// (q, h, s, m) = (b q K / r, h / (K r), s b K / r, m / (b K)).
///
/// The growth-rate scaling follows from requiring the rescaled field to
/// equal the dimensional one divided by (rK, rbK): the predator equation
/// carries two powers of population, so s picks up a factor bK like q
/// does (the reciprocal form sometimes quoted fails dimensional
/// analysis). Fails if the resulting Allee threshold leaves (0, 1).
pub fn nondimensionalize(p: &DimensionalParams) -> Result<ModelParams> {
    let q = p.b * p.q_dim * p.k / p.r;
    let h = p.h_dim / (p.k * p.r);
    let s = p.s_dim * p.b * p.k / p.r;
    let m = p.m_dim / (p.b * p.k);
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::domain(format!(
            "nondimensional Allee threshold m = {m} must lie in (0, 1)"
        )));
    }
    ModelParams::new(q, h, s, m)
}

/// Raw right-hand side at (x, y). No domain check; the formulas are valid
/// for any x != 0 and any y, which the finite-difference stencils in the
/// test suite rely on.
#[inline]
pub fn field(p: &ModelParams, x: f64, y: f64) -> [f64; 2] {
    let fx = x * (1.0 - x) - p.q * x * y - p.h;
    let fy = p.s * y * (1.0 - y / x) * (y - p.m);
    [fx, fy]
}

/// The vector field of the dimensionless system at a state in the domain.
pub fn vector_field(p: &ModelParams, z: &State) -> Result<[f64; 2]> {
    if !(z.x > 0.0) {
        return Err(Error::domain("x must be positive (division by x)"));
    }
    Ok(field(p, z.x, z.y))
}

/// The vector field of the dimensional system, used to cross-check the
/// rescaling.
pub fn dimensional_field(p: &DimensionalParams, x: f64, y: f64) -> [f64; 2] {
    let fx = p.r * x * (1.0 - x / p.k) - p.q_dim * x * y - p.h_dim;
    let fy = p.s_dim * y * (1.0 - y / (p.b * x)) * (y - p.m_dim);
    [fx, fy]
}

/// Taylor data of the field at a state: value, Jacobian, and the quadratic
/// and cubic coefficients of the shifted expansion
///
/// ```text
/// du/dt = a10 u + a01 v + a20 u^2 + a11 u v + a02 v^2 + (cubic terms)
/// dv/dt = b10 u + b01 v + b20 u^2 + b11 u v + b02 v^2 + (cubic terms)
/// ```
///
/// For this model a02 = a30 = a21 = a12 = a03 = 0 exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet3 {
    pub value: [f64; 2],
    /// Row-major Jacobian [[a10, a01], [b10, b01]].
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

impl Jet3 {
    #[inline]
    pub fn a10(&self) -> f64 {
        self.jacobian[0][0]
    }
    #[inline]
    pub fn a01(&self) -> f64 {
        self.jacobian[0][1]
    }
    #[inline]
    pub fn b10(&self) -> f64 {
        self.jacobian[1][0]
    }
    #[inline]
    pub fn b01(&self) -> f64 {
        self.jacobian[1][1]
    }

    pub fn trace(&self) -> f64 {
        self.jacobian[0][0] + self.jacobian[1][1]
    }

    pub fn det(&self) -> f64 {
        self.jacobian[0][0] * self.jacobian[1][1] - self.jacobian[0][1] * self.jacobian[1][0]
    }

    /// Max-norm of the Jacobian, the scale used by degeneracy bands.
    pub fn jacobian_norm(&self) -> f64 {
        self.jacobian
            .iter()
            .flatten()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    /// Directional second derivative D2F(v, v), one entry per equation.
    pub fn second_directional(&self, v: [f64; 2]) -> [f64; 2] {
        let quad = |c20: f64, c11: f64, c02: f64| {
            2.0 * (c20 * v[0] * v[0] + c11 * v[0] * v[1] + c02 * v[1] * v[1])
        };
        [
            quad(self.a20, self.a11, self.a02),
            quad(self.b20, self.b11, self.b02),
        ]
    }

    /// Quadratic part evaluated on a direction: (a20 u^2 + a11 u v + a02 v^2, ...).
    pub fn quadratic(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a20 * v[0] * v[0] + self.a11 * v[0] * v[1] + self.a02 * v[1] * v[1],
            self.b20 * v[0] * v[0] + self.b11 * v[0] * v[1] + self.b02 * v[1] * v[1],
        ]
    }
}

/// Closed-form jet of the field at z; errors if x <= 0.
///
/// Writing w = y - m, the second equation is s*(y^2 - m*y - (y^3 - m*y^2)/x),
/// so every x-derivative is a power of 1/x times a polynomial in y.
pub fn jet3(p: &ModelParams, z: &State) -> Result<Jet3> {
    if !(z.x > 0.0) {
        return Err(Error::domain("x must be positive (division by x)"));
    }
    let (x, y) = (z.x, z.y);
    let (q, s, m) = (p.q, p.s, p.m);
    let x2 = x * x;
    let x3 = x2 * x;
    let x4 = x3 * x;
    let y2 = y * y;
    let ym = y - m;

    Ok(Jet3 {
        value: field(p, x, y),
        jacobian: [
            [1.0 - 2.0 * x - q * y, -q * x],
            [
                s * y2 * ym / x2,
                s * (2.0 * y - m - 3.0 * y2 / x + 2.0 * m * y / x),
            ],
        ],
        a20: -1.0,
        a11: -q,
        a02: 0.0,
        b20: -s * y2 * ym / x3,
        b11: s * y * (3.0 * y - 2.0 * m) / x2,
        b02: s * (x - 3.0 * y + m) / x,
        a30: 0.0,
        a21: 0.0,
        a12: 0.0,
        a03: 0.0,
        b30: s * y2 * ym / x4,
        b21: s * y * (2.0 * m - 3.0 * y) / x3,
        b12: s * (3.0 * y - m) / x2,
        b03: -s / x,
    })
}
