//! Closed-form equilibria of the dimensionless system.
//!
//! Setting the right-hand side to zero splits the predator equation into
//! three branches y = 0, y = m, y = x; on each branch the prey equation is
//! a quadratic in x. Each solver returns zero, one (double root), or two
//! equilibria, with an explicit tolerance band deciding degeneracy. The
//! threshold constants collected in [`Thresholds`] organize the parameter
//! space: folds of each branch and the critical growth rates at which the
//! interior equilibria lose hyperbolicity.

use crate::model::{vector_field, ModelParams, State};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Relative half-width of the "discriminant is zero" band.
pub const DISC_BAND: f64 = 1e-10;

/// Coordinate tolerance for merging coincident equilibria across branches.
pub const DEDUP_TOL: f64 = 1e-10;

/// The branch of the predator nullcline an equilibrium lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// y = 0 (predator extinct).
    Boundary,
    /// y = m (the Allee threshold line).
    AlleeLine,
    /// y = x (the Leslie-Gower diagonal).
    Diagonal,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Branch::Boundary => "boundary",
            Branch::AlleeLine => "allee_line",
            Branch::Diagonal => "diagonal",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Branch {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "boundary" => Ok(Branch::Boundary),
            "allee_line" => Ok(Branch::AlleeLine),
            "diagonal" => Ok(Branch::Diagonal),
            other => Err(format!("unknown branch {other:?}")),
        }
    }
}

/// Standard labels E1..E9: E1-E3 boundary, E4-E6 Allee line, E7-E9 diagonal.
/// Within each interior pair the larger root carries the smaller index
/// (E5 and E8 are the larger-x points).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
    E8,
    E9,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E{}", *self as u8 + 1)
    }
}

impl std::str::FromStr for Label {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use Label::*;
        match s {
            "E1" => Ok(E1),
            "E2" => Ok(E2),
            "E3" => Ok(E3),
            "E4" => Ok(E4),
            "E5" => Ok(E5),
            "E6" => Ok(E6),
            "E7" => Ok(E7),
            "E8" => Ok(E8),
            "E9" => Ok(E9),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

/// An equilibrium point with provenance.
///
/// `labels` has one entry except for points where two branches intersect
/// (x = y = m), which keep the labels from both branches after dedup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub point: State,
    pub branch: Branch,
    pub labels: Vec<Label>,
    /// 2 for the fold (double-root) points E1, E4, E7, otherwise 1.
    pub multiplicity: u8,
}

impl Equilibrium {
    fn new(x: f64, y: f64, branch: Branch, label: Label, multiplicity: u8) -> Self {
        Self {
            point: State::new(x, y),
            branch,
            labels: vec![label],
            multiplicity,
        }
    }

    /// Primary label (branch order boundary < allee line < diagonal).
    pub fn label(&self) -> Label {
        self.labels[0]
    }

    pub fn x(&self) -> f64 {
        self.point.x
    }

    pub fn y(&self) -> f64 {
        self.point.y
    }
}

/// Threshold constants of the parameter space. Fields that are undefined
/// for the given parameters (negative discriminants, missing equilibria,
/// vanishing denominators) are absent rather than NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Root sum A = 1 - q m of the Allee-line quadratic.
    pub allee_root_sum: f64,
    /// Discriminant A^2 - 4h of the Allee-line quadratic.
    pub allee_disc: f64,
    /// Root gap sqrt(A^2 - 4h), defined when the discriminant is nonnegative.
    pub allee_root_gap: Option<f64>,
    /// Root sum C = 1/(q+1) of the diagonal quadratic.
    pub diagonal_root_sum: f64,
    /// Discriminant C^2 - 4h/(q+1) of the diagonal quadratic.
    pub diagonal_disc: f64,
    /// Root gap sqrt(C^2 - 4h/(q+1)), defined when nonnegative.
    pub diagonal_root_gap: Option<f64>,
    /// Harvest h1 = m - (q+1) m^2 at which an Allee-line equilibrium hits (m, m).
    pub allee_tangency_harvest: f64,
    /// Harvest h2 = 1/4 at which the boundary equilibria collide.
    pub boundary_fold_harvest: f64,
    /// Harvest h3 = 1/(4(q+1)) at which the diagonal equilibria collide.
    pub diagonal_fold_harvest: f64,
    /// Growth rate s1 = (4h-1)/(2(m-2h)) with zero trace at the diagonal
    /// fold point; defined when m != 2h.
    pub cusp_growth_rate: Option<f64>,
    /// Growth rate s2 with zero trace at the larger diagonal equilibrium;
    /// defined when that equilibrium exists and m != x8.
    pub hopf_growth_rate_upper: Option<f64>,
    /// Growth rate s3 with zero trace at the smaller diagonal equilibrium;
    /// defined when that equilibrium exists and m != x9.
    pub hopf_growth_rate_lower: Option<f64>,
}

fn band(scale: f64) -> f64 {
    DISC_BAND * scale.max(1.0)
}

/// Numerically stable roots of x^2 - b x + c with b, c > 0 and
/// discriminant d >= 0: the larger root first, the smaller via the
/// product of roots to avoid cancellation when c is small.
fn stable_roots(b: f64, c: f64, d: f64) -> (f64, f64) {
    let large = 0.5 * (b + d.max(0.0).sqrt());
    (large, c / large)
}

/// Threshold constants for the given parameters.
pub fn thresholds(p: &ModelParams) -> Thresholds {
    let a = 1.0 - p.q * p.m;
    let allee_disc = a * a - 4.0 * p.h;
    let c = 1.0 / (p.q + 1.0);
    let diagonal_disc = c * c - 4.0 * p.h / (p.q + 1.0);

    let cusp_growth_rate = if (p.m - 2.0 * p.h).abs() > band(1.0) {
        Some((4.0 * p.h - 1.0) / (2.0 * (p.m - 2.0 * p.h)))
    } else {
        None
    };

    let diag_band = band(c * c);
    let mut upper = None;
    let mut lower = None;
    if diagonal_disc > diag_band {
        let (x8, x9) = stable_roots(c, p.h / (p.q + 1.0), diagonal_disc);
        if (p.m - x8).abs() > band(1.0) {
            upper = Some(((2.0 + p.q) * x8 - 1.0) / (p.m - x8));
        }
        if (p.m - x9).abs() > band(1.0) {
            lower = Some(((2.0 + p.q) * x9 - 1.0) / (p.m - x9));
        }
    }

    Thresholds {
        allee_root_sum: a,
        allee_disc,
        allee_root_gap: if allee_disc >= 0.0 {
            Some(allee_disc.sqrt())
        } else {
            None
        },
        diagonal_root_sum: c,
        diagonal_disc,
        diagonal_root_gap: if diagonal_disc >= 0.0 {
            Some(diagonal_disc.sqrt())
        } else {
            None
        },
        allee_tangency_harvest: p.m - (p.q + 1.0) * p.m * p.m,
        boundary_fold_harvest: 0.25,
        diagonal_fold_harvest: 0.25 / (p.q + 1.0),
        cusp_growth_rate,
        hopf_growth_rate_upper: upper,
        hopf_growth_rate_lower: lower,
    }
}

/// Equilibria on y = 0, from x^2 - x + h = 0.
pub fn solve_boundary(p: &ModelParams) -> Vec<Equilibrium> {
    let disc = 1.0 - 4.0 * p.h;
    let tol = band(1.0f64.max(4.0 * p.h));
    if disc.abs() <= tol {
        vec![Equilibrium::new(0.5, 0.0, Branch::Boundary, Label::E1, 2)]
    } else if disc > 0.0 {
        let (x2, x3) = stable_roots(1.0, p.h, disc);
        vec![
            Equilibrium::new(x2, 0.0, Branch::Boundary, Label::E2, 1),
            Equilibrium::new(x3, 0.0, Branch::Boundary, Label::E3, 1),
        ]
    } else {
        Vec::new()
    }
}

/// Equilibria on y = m, from x^2 - (1 - qm) x + h = 0. Empty when the
/// root sum 1 - qm is nonpositive (no positive roots) or the discriminant
/// is negative.
pub fn solve_allee_line(p: &ModelParams) -> Vec<Equilibrium> {
    let a = 1.0 - p.q * p.m;
    if a <= 0.0 {
        return Vec::new();
    }
    let disc = a * a - 4.0 * p.h;
    let tol = band((a * a).max(4.0 * p.h));
    if disc.abs() <= tol {
        vec![Equilibrium::new(
            0.5 * a,
            p.m,
            Branch::AlleeLine,
            Label::E4,
            2,
        )]
    } else if disc > 0.0 {
        let (x5, x6) = stable_roots(a, p.h, disc);
        vec![
            Equilibrium::new(x5, p.m, Branch::AlleeLine, Label::E5, 1),
            Equilibrium::new(x6, p.m, Branch::AlleeLine, Label::E6, 1),
        ]
    } else {
        Vec::new()
    }
}

/// Equilibria on y = x, from x^2 - x/(q+1) + h/(q+1) = 0.
pub fn solve_diagonal(p: &ModelParams) -> Vec<Equilibrium> {
    let c = 1.0 / (p.q + 1.0);
    let hc = p.h / (p.q + 1.0);
    let disc = c * c - 4.0 * hc;
    let tol = band((c * c).max(4.0 * hc));
    if disc.abs() <= tol {
        // The double root c/2 and the fold representation 2h agree at the
        // exact fold; inside the band they differ by at most |disc| / (2c).
        let x7 = 2.0 * p.h;
        debug_assert!(
            (0.5 * c - x7).abs() <= disc.abs() / (2.0 * c) + 1e-12,
            "diagonal fold representations diverged"
        );
        vec![Equilibrium::new(x7, x7, Branch::Diagonal, Label::E7, 2)]
    } else if disc > 0.0 {
        let (x8, x9) = stable_roots(c, hc, disc);
        vec![
            Equilibrium::new(x8, x8, Branch::Diagonal, Label::E8, 1),
            Equilibrium::new(x9, x9, Branch::Diagonal, Label::E9, 1),
        ]
    } else {
        Vec::new()
    }
}

/// All equilibria of the system. Coincident points across branches (the
/// Allee line and the diagonal meet at (m, m)) are merged into a single
/// entry that keeps the labels of both branches.
pub fn all_equilibria(p: &ModelParams) -> Vec<Equilibrium> {
    let mut out: Vec<Equilibrium> = Vec::new();
    for eq in solve_boundary(p)
        .into_iter()
        .chain(solve_allee_line(p))
        .chain(solve_diagonal(p))
    {
        // Positive-x guard; unreachable for positive root sums and products
        // but kept as a hard domain invariant.
        if !(eq.x() > 0.0) {
            debug_assert!(false, "discarded nonpositive root {:?}", eq);
            continue;
        }
        if let Some(existing) = out.iter_mut().find(|e| {
            (e.x() - eq.x()).abs() <= DEDUP_TOL && (e.y() - eq.y()).abs() <= DEDUP_TOL
        }) {
            existing.labels.extend(eq.labels.iter().copied());
            existing.multiplicity = existing.multiplicity.max(eq.multiplicity);
        } else {
            out.push(eq);
        }
    }
    debug_assert!(out.iter().all(|e| {
        let f = vector_field(p, &e.point).expect("equilibrium inside domain");
        f[0].hypot(f[1]) <= 2.5e-11
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use approx::assert_relative_eq;

    fn p(q: f64, h: f64, s: f64, m: f64) -> ModelParams {
        ModelParams::new(q, h, s, m).unwrap()
    }

    fn residual(p: &ModelParams, e: &Equilibrium) -> f64 {
        let f = vector_field(p, &e.point).unwrap();
        f[0].hypot(f[1])
    }

    #[test]
    fn boundary_fold_and_generic_cases() {
        let fold = solve_boundary(&p(1.0, 0.25, 1.0, 0.1));
        assert_eq!(fold.len(), 1);
        assert_eq!((fold[0].x(), fold[0].y()), (0.5, 0.0));
        assert_eq!(fold[0].multiplicity, 2);

        let two = solve_boundary(&p(1.0, 0.21, 1.0, 0.1));
        assert_eq!(two.len(), 2);
        assert_relative_eq!(two[0].x(), 0.7, max_relative = 1e-14);
        assert_relative_eq!(two[1].x(), 0.3, max_relative = 1e-14);
        assert_eq!(two[0].label(), Label::E2);
        assert_eq!(two[1].label(), Label::E3);

        assert!(solve_boundary(&p(1.0, 0.3, 1.0, 0.1)).is_empty());
    }

    #[test]
    fn allee_line_cases() {
        let two = solve_allee_line(&p(1.0, 0.14, 1.0, 0.1));
        assert_eq!(two.len(), 2);
        assert_relative_eq!(two[0].x(), 0.7, max_relative = 1e-14);
        assert_relative_eq!(two[1].x(), 0.2, max_relative = 1e-14);
        assert_eq!(two[0].y(), 0.1);

        let double = solve_allee_line(&p(1.0, 0.2025, 1.0, 0.1));
        assert_eq!(double.len(), 1);
        assert_relative_eq!(double[0].x(), 0.45, max_relative = 1e-14);
        assert_eq!(double[0].multiplicity, 2);
        assert_eq!(double[0].label(), Label::E4);

        // Root sum 1 - qm = -0.2 <= 0: no equilibria with y = m.
        assert!(solve_allee_line(&p(12.0, 0.1, 1.0, 0.1)).is_empty());
    }

    #[test]
    fn diagonal_cases() {
        let fold = solve_diagonal(&p(1.0, 0.125, 1.0, 0.1));
        assert_eq!(fold.len(), 1);
        assert_eq!((fold[0].x(), fold[0].y()), (0.25, 0.25));
        assert_eq!(fold[0].label(), Label::E7);

        let two = solve_diagonal(&p(1.0, 0.12, 1.0, 0.1));
        assert_eq!(two.len(), 2);
        assert_relative_eq!(two[0].x(), 0.3, max_relative = 1e-14);
        assert_relative_eq!(two[1].x(), 0.2, max_relative = 1e-14);

        assert!(solve_diagonal(&p(1.0, 0.2, 1.0, 0.1)).is_empty());
    }

    #[test]
    fn threshold_constants() {
        let t = thresholds(&p(1.0, 0.12, 1.0, 0.1));
        assert_relative_eq!(t.allee_root_sum, 0.9, max_relative = 1e-15);
        assert_relative_eq!(t.allee_disc, 0.33, max_relative = 1e-13);
        assert_relative_eq!(t.diagonal_root_sum, 0.5, max_relative = 1e-15);
        assert_relative_eq!(t.diagonal_disc, 0.01, max_relative = 1e-12);
        assert_relative_eq!(t.diagonal_root_gap.unwrap(), 0.1, max_relative = 1e-12);
        assert_relative_eq!(t.allee_tangency_harvest, 0.08, max_relative = 1e-13);
        assert_eq!(t.boundary_fold_harvest, 0.25);
        assert_relative_eq!(t.diagonal_fold_harvest, 0.125, max_relative = 1e-15);
        assert_relative_eq!(t.cusp_growth_rate.unwrap(), 13.0 / 7.0, max_relative = 1e-13);
        assert_relative_eq!(t.hopf_growth_rate_upper.unwrap(), 0.5, max_relative = 1e-12);
        // Direct evaluation: ((2+q) x9 - 1)/(m - x9) = (-0.4)/(-0.1) = 4.
        assert_relative_eq!(t.hopf_growth_rate_lower.unwrap(), 4.0, max_relative = 1e-12);
        // h3 = C^2 (q+1) / 4.
        let c = t.diagonal_root_sum;
        assert_relative_eq!(t.diagonal_fold_harvest, c * c * 2.0 / 4.0, max_relative = 1e-15);
    }

    #[test]
    fn thresholds_absent_fields() {
        // Diagonal discriminant 0.0625 - 0.125 < 0: no gap, no hopf rates.
        let t = thresholds(&p(1.0, 0.25, 1.0, 0.1));
        assert!(t.diagonal_root_gap.is_none());
        assert!(t.hopf_growth_rate_upper.is_none());
        assert!(t.hopf_growth_rate_lower.is_none());
        // Allee discriminant 0.01 - 0.4 < 0: no gap.
        let t = thresholds(&p(9.0, 0.1, 1.0, 0.1));
        assert_relative_eq!(t.allee_root_sum, 0.1, max_relative = 1e-13);
        assert!(t.allee_root_gap.is_none());
    }

    #[test]
    fn union_counts_and_residuals() {
        // h = 0.21: both interior discriminants negative, boundary pair only.
        let eqs = all_equilibria(&p(1.0, 0.21, 1.0, 0.1));
        assert_eq!(eqs.len(), 2);

        // h = 0.12: boundary pair, allee pair, diagonal pair.
        let eqs = all_equilibria(&p(1.0, 0.12, 1.0, 0.1));
        assert_eq!(eqs.len(), 6);
        let labels: Vec<Label> = eqs.iter().map(|e| e.label()).collect();
        assert_eq!(
            labels,
            [Label::E2, Label::E3, Label::E5, Label::E6, Label::E8, Label::E9]
        );
        for e in &eqs {
            assert!(residual(&p(1.0, 0.12, 1.0, 0.1), e) <= 1e-12);
        }

        // Every existence test fails.
        assert!(all_equilibria(&p(1.0, 0.3, 1.0, 0.5)).is_empty());
    }

    #[test]
    fn dedup_keeps_both_labels_at_branch_intersection() {
        // With h = h1 = m - (q+1) m^2 the Allee line and the diagonal both
        // pass through the equilibrium (m, m).
        let m = 0.3;
        let q = 1.5;
        let h1 = m - (q + 1.0) * m * m;
        let pp = p(q, h1, 1.0, m);
        let eqs = all_equilibria(&pp);
        let merged = eqs
            .iter()
            .find(|e| (e.x() - m).abs() < 1e-12 && (e.y() - m).abs() < 1e-12)
            .expect("intersection point present");
        assert_eq!(merged.labels.len(), 2);
        assert_eq!(merged.branch, Branch::AlleeLine);
        // No other entry duplicates the point.
        let n = eqs
            .iter()
            .filter(|e| (e.x() - m).abs() < 1e-9 && (e.y() - m).abs() < 1e-9)
            .count();
        assert_eq!(n, 1);
    }

    #[test]
    fn fold_count_is_monotone_in_harvest() {
        let counts: Vec<usize> = [0.24, 0.25, 0.26]
            .iter()
            .map(|&h| solve_boundary(&p(1.0, h, 1.0, 0.1)).len())
            .collect();
        assert_eq!(counts, [2, 1, 0]);
    }
}
