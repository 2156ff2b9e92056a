//! Fold transversality at the boundary double point.
//!
//! At h = 1/4 the two boundary equilibria collide at (1/2, 0). The
//! transversality scalars are w'f_h and w'[D2f(v,v)] for the right/left
//! null vectors v, w of the Jacobian; both nonzero means the harvest
//! parameter genuinely unfolds the fold.

use crate::classification::ZERO_BAND;
use crate::equilibria::{solve_boundary, Label};
use crate::model::{jet3, ModelParams, State};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleNodeReport {
    /// Critical harvest value 1/4.
    pub critical_h: f64,
    pub equilibrium: State,
    /// Right null vector of J, normalized to (1, 0).
    pub right_null: [f64; 2],
    /// Left null vector of J, scaled to (2sm, -q) so the transversality
    /// scalars take the reference values -2sm and -4sm. The validity
    /// decision is normalization independent.
    pub left_null: [f64; 2],
    /// w' f_h; equals -2sm under the chosen normalization.
    pub t1: f64,
    /// w' [D2f(v,v)]; equals -4sm under the chosen normalization.
    pub t2: f64,
    /// Residual norms |J v| and |J' w|.
    pub null_residuals: [f64; 2],
}

/// Checks the fold transversality at the boundary double point. Requires
/// h inside the zero band of 1/4 so that the double point exists.
pub fn saddle_node_check(p: &ModelParams) -> Result<SaddleNodeReport> {
    let fold = solve_boundary(p)
        .into_iter()
        .find(|e| e.labels.contains(&Label::E1))
        .ok_or_else(|| Error::domain("h must sit at the boundary fold value 1/4"))?;
    let jet = jet3(p, &fold.point)?;
    let j = &jet.jacobian;
    let band = ZERO_BAND * jet.jacobian_norm().max(1.0);

    let v = [1.0, 0.0];
    let w = [-2.0 * j[1][1], 2.0 * j[0][1]];

    let jv = [
        j[0][0] * v[0] + j[0][1] * v[1],
        j[1][0] * v[0] + j[1][1] * v[1],
    ];
    let jtw = [
        j[0][0] * w[0] + j[1][0] * w[1],
        j[0][1] * w[0] + j[1][1] * w[1],
    ];
    let null_residuals = [jv[0].hypot(jv[1]), jtw[0].hypot(jtw[1])];
    if null_residuals[0] > 1e-10 || null_residuals[1] > 1e-10 {
        return Err(Error::degenerate("null vectors fail their residual check"));
    }

    // The harvest enters only the prey equation, additively: f_h = (-1, 0).
    let f_h = [-1.0, 0.0];
    let d2 = jet.second_directional(v);
    let t1 = w[0] * f_h[0] + w[1] * f_h[1];
    let t2 = w[0] * d2[0] + w[1] * d2[1];
    if t1.abs() <= band || t2.abs() <= band {
        return Err(Error::degenerate(
            "fold transversality fails: a scalar vanishes",
        ));
    }

    Ok(SaddleNodeReport {
        critical_h: 0.25,
        equilibrium: fold.point,
        right_null: v,
        left_null: w,
        t1,
        t2,
        null_residuals,
    })
}
