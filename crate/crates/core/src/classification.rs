//! Local classification of equilibria.
//!
//! Hyperbolic types come from the trace-determinant plane with an explicit
//! zero band. The degenerate types are confirmed by normal-form
//! coefficients: a single zero eigenvalue with a nonzero quadratic
//! self-coefficient along the center direction is a saddle-node; a double
//! zero eigenvalue of a nonzero Jacobian with nonvanishing quadratic normal
//! form is a codimension-2 cusp. One generic eigenbasis reduction covers
//! every saddle-node case instead of per-point coordinate changes.

use crate::equilibria::Equilibrium;
use crate::model::{jet3, Jet3, ModelParams};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Relative half-width of the zero band for traces, determinants, and
/// eigenvalues, scaled by max(1, |J|).
pub const ZERO_BAND: f64 = 1e-9;

/// Trace, determinant, and the eigenvalue pair of a 2x2 Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub trace: f64,
    pub det: f64,
    /// trace^2 - 4 det; negative for a complex-conjugate pair.
    pub disc: f64,
    pub lambda1_re: f64,
    pub lambda1_im: f64,
    pub lambda2_re: f64,
    pub lambda2_im: f64,
}

impl EigenData {
    pub fn from_jacobian(j: &[[f64; 2]; 2]) -> Self {
        let trace = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let disc = trace * trace - 4.0 * det;
        if disc >= 0.0 {
            let r = disc.sqrt();
            Self {
                trace,
                det,
                disc,
                lambda1_re: 0.5 * (trace + r),
                lambda1_im: 0.0,
                lambda2_re: 0.5 * (trace - r),
                lambda2_im: 0.0,
            }
        } else {
            let w = 0.5 * (-disc).sqrt();
            Self {
                trace,
                det,
                disc,
                lambda1_re: 0.5 * trace,
                lambda1_im: w,
                lambda2_re: 0.5 * trace,
                lambda2_im: -w,
            }
        }
    }
}

/// The determined local type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Kind {
    StableNode,
    UnstableNode,
    StableFocus,
    UnstableFocus,
    Saddle,
    SaddleNode,
    WeakCenter,
    CuspCodim2,
    /// A degenerate candidate whose nondegeneracy check failed.
    Degenerate(String),
}

impl Kind {
    /// Short stable code used in sweep CSVs.
    pub fn code(&self) -> &'static str {
        match self {
            Kind::StableNode => "SN",
            Kind::UnstableNode => "UN",
            Kind::StableFocus => "SF",
            Kind::UnstableFocus => "UF",
            Kind::Saddle => "SA",
            Kind::SaddleNode => "SNODE",
            Kind::WeakCenter => "WC",
            Kind::CuspCodim2 => "CUSP",
            Kind::Degenerate(_) => "DEG",
        }
    }

    pub fn from_code(code: &str, reason: &str) -> std::result::Result<Self, String> {
        match code {
            "SN" => Ok(Kind::StableNode),
            "UN" => Ok(Kind::UnstableNode),
            "SF" => Ok(Kind::StableFocus),
            "UF" => Ok(Kind::UnstableFocus),
            "SA" => Ok(Kind::Saddle),
            "SNODE" => Ok(Kind::SaddleNode),
            "WC" => Ok(Kind::WeakCenter),
            "CUSP" => Ok(Kind::CuspCodim2),
            "DEG" => Ok(Kind::Degenerate(reason.to_string())),
            other => Err(format!("unknown kind code {other:?}")),
        }
    }

    pub fn is_stable_attractor(&self) -> bool {
        matches!(self, Kind::StableNode | Kind::StableFocus)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Normal-form coefficients backing a degenerate classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Evidence {
    /// Quadratic self-coefficient along the center direction.
    SaddleNode { c20: f64 },
    /// Quadratic normal-form pair of the nilpotent case.
    Cusp { g20: f64, g11: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: Kind,
    pub eigen: EigenData,
    pub evidence: Option<Evidence>,
    /// Set when the node/focus discriminant sits inside the zero band;
    /// reported as a node in that case.
    pub borderline: bool,
}

fn zero_band(jet: &Jet3) -> f64 {
    ZERO_BAND * jet.jacobian_norm().max(1.0)
}

/// Null vector of a 2x2 matrix assumed singular, from its larger row.
fn null_vector(j: &[[f64; 2]; 2]) -> Option<[f64; 2]> {
    let r0 = j[0][0].abs().max(j[0][1].abs());
    let r1 = j[1][0].abs().max(j[1][1].abs());
    if r0 <= 0.0 && r1 <= 0.0 {
        return None;
    }
    let (a, b) = if r0 >= r1 {
        (j[0][0], j[0][1])
    } else {
        (j[1][0], j[1][1])
    };
    Some([b, -a])
}

/// Scale so the first component of largest magnitude order becomes 1,
/// preferring the first component when it is not negligible.
fn normalize_first(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].abs().max(v[1].abs());
    if v[0].abs() > 1e-12 * n {
        [1.0, v[1] / v[0]]
    } else {
        [0.0, 1.0]
    }
}

/// Quadratic self-coefficient of the center equation after the linear
/// change of coordinates sending the zero-eigenvalue direction to the
/// first axis and the nonzero one to the second. A nonzero value makes
/// the equilibrium a saddle-node.
pub fn saddle_node_coefficient(p: &ModelParams, e: &Equilibrium) -> Result<f64> {
    let jet = jet3(p, &e.point)?;
    center_quadratic(&jet)
}

pub(crate) fn center_quadratic(jet: &Jet3) -> Result<f64> {
    let band = zero_band(jet);
    // det within the band certifies a zero eigenvalue; the other one is
    // then the trace.
    if jet.det().abs() > band {
        return Err(Error::domain("no eigenvalue inside the zero band"));
    }
    if jet.trace().abs() <= band {
        return Err(Error::degenerate(
            "both eigenvalues vanish; use the cusp reduction",
        ));
    }
    let l_rest = jet.trace();
    let j = &jet.jacobian;
    let v0 = normalize_first(
        null_vector(j).ok_or_else(|| Error::degenerate("zero jacobian"))?,
    );
    let shifted = [
        [j[0][0] - l_rest, j[0][1]],
        [j[1][0], j[1][1] - l_rest],
    ];
    let v1 = normalize_first(
        null_vector(&shifted).ok_or_else(|| Error::degenerate("defective jacobian"))?,
    );
    let det_u = v0[0] * v1[1] - v0[1] * v1[0];
    if det_u.abs() <= 1e-12 {
        return Err(Error::degenerate("eigenvectors nearly parallel"));
    }
    let b = jet.quadratic(v0);
    Ok((v1[1] * b[0] - v1[0] * b[1]) / det_u)
}

/// Quadratic normal-form coefficients (g20, g11) of the nilpotent case.
///
/// Shifting to the origin and applying (u, v) -> (u, u + v/a01) brings the
/// system to u' = v + e20 u^2 + e11 u v, v' = f20 u^2 + f11 u v + f02 v^2;
/// the reduced normal form has g20 = f20, g11 = f11 + 2 e20. Both nonzero
/// makes the point a codimension-2 cusp.
pub fn cusp_coefficients(p: &ModelParams, e: &Equilibrium) -> Result<(f64, f64)> {
    let jet = jet3(p, &e.point)?;
    cusp_normal_form(&jet)
}

pub(crate) fn cusp_normal_form(jet: &Jet3) -> Result<(f64, f64)> {
    let band = zero_band(jet);
    if jet.trace().abs() > band || jet.det().abs() > band {
        return Err(Error::domain("trace and determinant must vanish"));
    }
    if jet.jacobian_norm() <= band {
        return Err(Error::degenerate("zero jacobian"));
    }
    let a01 = jet.a01();
    if a01.abs() <= band {
        return Err(Error::degenerate("transformation undefined: a01 = 0"));
    }
    let e20 = jet.a20 + jet.a11 + jet.a02;
    let f20 = a01 * (jet.b20 + jet.b11 + jet.b02 - jet.a20 - jet.a11 - jet.a02);
    let f11 = jet.b11 + 2.0 * jet.b02 - jet.a11 - 2.0 * jet.a02;
    Ok((f20, f11 + 2.0 * e20))
}

/// Classifies an equilibrium produced by the solvers for the same
/// parameters. Degenerate candidates that fail their nondegeneracy check
/// are reported as [`Kind::Degenerate`], never as an error.
pub fn classify(p: &ModelParams, e: &Equilibrium) -> Result<Classification> {
    let jet = jet3(p, &e.point)?;
    let band = zero_band(&jet);
    let eig = EigenData::from_jacobian(&jet.jacobian);
    let (tr, det) = (eig.trace, eig.det);

    let mut borderline = false;
    let kind;
    let mut evidence = None;

    if det < -band {
        kind = Kind::Saddle;
    } else if det > band && tr.abs() > band {
        let disc_band = ZERO_BAND * (tr * tr).max(4.0 * det.abs()).max(1.0);
        let node = if eig.disc.abs() <= disc_band {
            borderline = true;
            true
        } else {
            eig.disc > 0.0
        };
        kind = match (tr < 0.0, node) {
            (true, true) => Kind::StableNode,
            (true, false) => Kind::StableFocus,
            (false, true) => Kind::UnstableNode,
            (false, false) => Kind::UnstableFocus,
        };
    } else if det > band {
        // Zero trace with positive determinant: purely imaginary pair.
        kind = Kind::WeakCenter;
    } else if tr.abs() > band {
        // One eigenvalue in the zero band: saddle-node candidate.
        kind = match center_quadratic(&jet) {
            Ok(c20) if c20.abs() > band => {
                evidence = Some(Evidence::SaddleNode { c20 });
                Kind::SaddleNode
            }
            Ok(c20) => {
                evidence = Some(Evidence::SaddleNode { c20 });
                Kind::Degenerate("saddle-node quadratic coefficient vanishes".into())
            }
            Err(err) => Kind::Degenerate(err.to_string()),
        };
    } else {
        // Double zero eigenvalue: cusp candidate.
        kind = match cusp_normal_form(&jet) {
            Ok((g20, g11)) if g20.abs() > band && g11.abs() > band => {
                evidence = Some(Evidence::Cusp { g20, g11 });
                Kind::CuspCodim2
            }
            Ok((g20, g11)) => {
                evidence = Some(Evidence::Cusp { g20, g11 });
                Kind::Degenerate("cusp normal form degenerates".into())
            }
            Err(err) => Kind::Degenerate(err.to_string()),
        };
    }

    Ok(Classification {
        kind,
        eigen: eig,
        evidence,
        borderline,
    })
}
