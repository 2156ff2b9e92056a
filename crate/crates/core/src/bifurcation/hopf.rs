//! Hopf bifurcation at the interior diagonal equilibria.
//!
//! The trace of the Jacobian at a diagonal equilibrium is linear in the
//! predator growth rate s, so the critical value solving trace = 0 is a
//! ratio of closed forms. At the critical value the first Lyapunov
//! coefficient decides criticality; an independent return-map experiment
//! confirms the predicted cycle side and stability.

use crate::classification::{classify, Kind};
use crate::dynamics::{
    crossings, integrate, integrate_backward, IntegratorConfig, Section, SectionHit, Termination,
};
use crate::equilibria::{all_equilibria, solve_diagonal, Equilibrium, Label};
use crate::model::{jet3, vector_field, ModelParams, State};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which diagonal equilibrium a critical growth rate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagonalRoot {
    /// The larger root of the diagonal quadratic.
    Larger,
    /// The smaller root.
    Smaller,
}

/// Critical growth rate and the eigen-data certifying the weak center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfCritical {
    pub critical_s: f64,
    /// d(trace)/ds at the critical value: m - x at the equilibrium.
    pub trace_derivative: f64,
    /// Jacobian determinant at the critical value; positive at a weak center.
    pub det_at_critical: f64,
    pub equilibrium: Equilibrium,
}

/// Critical growth rate at the requested diagonal equilibrium. The growth
/// rate in `p` is ignored; existence of the diagonal pair depends only on
/// (q, h). Errors: domain if the pair is missing or the weak-center
/// hypothesis (m < x at the larger root, m > x at the smaller) fails;
/// infeasible if the critical value is nonpositive.
pub fn hopf_critical(p: &ModelParams, root: DiagonalRoot) -> Result<HopfCritical> {
    let eqs = solve_diagonal(p);
    let label = match root {
        DiagonalRoot::Larger => Label::E8,
        DiagonalRoot::Smaller => Label::E9,
    };
    let eq = eqs
        .into_iter()
        .find(|e| e.labels.contains(&label))
        .ok_or_else(|| Error::domain("diagonal equilibrium pair does not exist"))?;
    let x = eq.x();
    match root {
        DiagonalRoot::Larger if !(p.m < x) => {
            return Err(Error::domain(
                "weak-center hypothesis fails: m must be below the larger root",
            ))
        }
        DiagonalRoot::Smaller if !(p.m > x) => {
            return Err(Error::domain(
                "weak-center hypothesis fails: m must be above the smaller root",
            ))
        }
        _ => {}
    }
    let critical_s = ((2.0 + p.q) * x - 1.0) / (p.m - x);
    if !(critical_s > 0.0) {
        return Err(Error::infeasible(format!(
            "critical growth rate {critical_s} is not positive"
        )));
    }
    let at_critical = p.with_s(critical_s)?;
    let jet = jet3(&at_critical, &eq.point)?;
    let det = jet.det();
    if !(det > 0.0) {
        return Err(Error::domain(
            "determinant is not positive at the critical growth rate",
        ));
    }
    Ok(HopfCritical {
        critical_s,
        trace_derivative: p.m - x,
        det_at_critical: det,
        equilibrium: eq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HopfDirection {
    /// Negative first Lyapunov coefficient: a stable cycle appears on the
    /// side where the equilibrium is unstable.
    Supercritical,
    /// Positive coefficient: an unstable cycle surrounds the stable focus.
    Subcritical,
    Undetermined,
}

/// First Lyapunov coefficient report at a weak center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfReport {
    pub critical_s: f64,
    pub trace_derivative: f64,
    /// Jacobian determinant at the weak center.
    pub det_at_critical: f64,
    /// a10*b01 - a01*b10, equal to the determinant at a weak center.
    pub m_coeff: f64,
    /// The eight terms of the general coefficient formula.
    pub phi: [f64; 8],
    /// The same terms under the transcribed per-model listing, which swaps
    /// two factors (b20 -> a20 in the sixth term, b10 -> b01 in the
    /// seventh); recorded so the discrepancy stays visible.
    pub phi_listing: [f64; 8],
    pub sigma: f64,
    pub sigma_listing: f64,
    pub direction: HopfDirection,
    pub evidence: Option<LimitCycleEvidence>,
}

/// First Lyapunov coefficient at a weak center of the system.
///
/// The growth rate inside `p` must already be critical. The sign of the
/// returned coefficient decides the direction; magnitudes inside the
/// 1e-10 band are reported as a degeneracy instead of a direction.
pub fn first_lyapunov(p: &ModelParams, e: &Equilibrium) -> Result<HopfReport> {
    let class = classify(p, e)?;
    if class.kind != Kind::WeakCenter {
        return Err(Error::domain(format!(
            "equilibrium must be a weak center, found {}",
            class.kind
        )));
    }
    let jet = jet3(p, &e.point)?;
    let (a10, a01, b10, b01) = (jet.a10(), jet.a01(), jet.b10(), jet.b01());
    let (a20, a11, a02) = (jet.a20, jet.a11, jet.a02);
    let (b20, b11, b02) = (jet.b20, jet.b11, jet.b02);
    let (a30, a21, a12) = (jet.a30, jet.a21, jet.a12);
    let (b30, b21, b12, b03) = (jet.b30, jet.b21, jet.b12, jet.b03);
    let _ = b30;

    let m_coeff = a10 * b01 - a01 * b10;
    if !(m_coeff > 0.0) {
        return Err(Error::degenerate("a10*b01 - a01*b10 must be positive"));
    }

    let phi = [
        a10 * b10 * (a11 * a11 + a11 * b02 + a02 * b11),
        a10 * a01 * (b11 * b11 + a20 * b11 + a11 * b02),
        b10 * b10 * (a11 * a02 + 2.0 * a02 * b02),
        -2.0 * a10 * b10 * (b02 * b02 - a20 * a02),
        -2.0 * a10 * a01 * (a20 * a20 - b20 * b02),
        -a01 * a01 * (2.0 * a20 * b20 + b11 * b20),
        (a01 * b10 - 2.0 * a10 * a10) * (b11 * b02 - a11 * a20),
        -(a10 * a10 + a01 * b10)
            * (3.0 * (b10 * b03 - a01 * a30)
                + 2.0 * a10 * (a21 + b12)
                + (b10 * a12 - a01 * b21)),
    ];
    let phi_listing = [
        phi[0],
        phi[1],
        phi[2],
        -2.0 * a10 * b10 * b02 * b02,
        phi[4],
        -a01 * a01 * (2.0 * a20 * b20 + b11 * a20),
        (a01 * b01 - 2.0 * a10 * a10) * (b11 * b02 - a11 * a20),
        -(a10 * a10 + a01 * b10) * (3.0 * (b10 * b03 - a01 * a30) + 2.0 * a10 * b12 - a01 * b21),
    ];

    let prefactor = -3.0 * PI / (2.0 * a01 * m_coeff.powf(1.5));
    let sigma = prefactor * phi.iter().sum::<f64>();
    let sigma_listing = prefactor * phi_listing.iter().sum::<f64>();

    if sigma.abs() <= 1e-10 {
        return Err(Error::degenerate(
            "first Lyapunov coefficient vanishes; direction undetermined",
        ));
    }
    let direction = if sigma < 0.0 {
        HopfDirection::Supercritical
    } else {
        HopfDirection::Subcritical
    };

    Ok(HopfReport {
        critical_s: p.s,
        trace_derivative: p.m - e.x(),
        det_at_critical: jet.det(),
        m_coeff,
        phi,
        phi_listing,
        sigma,
        sigma_listing,
        direction,
        evidence: None,
    })
}

/// Numerical evidence for a small limit cycle from a return-map fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCycleEvidence {
    /// Growth rate at which the cycle was found.
    pub s_value: f64,
    pub section: Section,
    /// Section coordinate of the return-map fixed point.
    pub fixed_point: f64,
    pub period: f64,
    /// Final residual |x_{k+1} - x_k| of the map iteration.
    pub residual: f64,
    /// Return-map slope estimated in the probe's time direction.
    pub map_derivative: Option<f64>,
    /// Stability in forward time.
    pub attracting: bool,
    /// True when the cycle was located by reverse-time integration
    /// (a repelling cycle attracts in reverse time).
    pub via_reverse_time: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoCycleReason {
    /// Crossings converged to the equilibrium itself.
    SpiralsIn,
    /// The trajectory left the probing neighborhood without settling.
    LeftNeighborhood,
    /// The crossing budget ran out before convergence.
    NoConvergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HopfSideOutcome {
    Cycle(LimitCycleEvidence),
    NoCycle(NoCycleReason),
}

pub(crate) struct ProbeSettings {
    pub window_radius: f64,
    pub displacement: f64,
    /// Fixed points closer to the equilibrium than this are the
    /// equilibrium itself.
    pub amplitude_floor: f64,
    /// Radius of the neighborhood the linear transient must not leave.
    /// Near a fold pair this is a fraction of the distance to the saddle.
    pub shear_safe_radius: f64,
    pub max_crossings: usize,
    pub max_time: f64,
    pub residual_tol: f64,
}

/// Peak transient amplification of a unit x-displacement under the
/// linearization over one rotation period. Near a double-zero point the
/// Jacobian is strongly non-normal and this factor is large; displacements
/// must shrink accordingly or the probe is thrown out of the neighborhood
/// before it can spiral.
fn excursion_factor(j: &[[f64; 2]; 2]) -> f64 {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        return 1.0;
    }
    let alpha = 0.5 * tr;
    let omega = 0.5 * (-disc).sqrt();
    // exp(Jt) = exp(alpha t) [cos(wt) I + sin(wt) (J - alpha I)/w]; the
    // growth factor is stripped to isolate the rotation shear.
    let mut worst = 1.0f64;
    for k in 0..64 {
        let th = 2.0 * PI * k as f64 / 64.0;
        let (c, s) = (th.cos(), th.sin());
        let zx = c + s * (j[0][0] - alpha) / omega;
        let zy = s * j[1][0] / omega;
        worst = worst.max(zx.abs().max(zy.abs()));
    }
    worst
}

pub(crate) enum ProbeOutcome {
    Cycle {
        fixed_point: f64,
        period: f64,
        residual: f64,
        derivative: Option<f64>,
    },
    SpiralsIn,
    LeftWindow,
    Budget,
}

/// One-sided slope of the return map at a fixed point, measured in the
/// probe's time direction by a single displaced return.
fn map_slope_at(
    p: &ModelParams,
    center: &State,
    backward: bool,
    cfg: &IntegratorConfig,
    section: &Section,
    fixed_point: f64,
    displacement: f64,
) -> Option<f64> {
    let d = (0.1 * (fixed_point - center.x)).min(0.5 * displacement).max(1e-9);
    let start = State::new(fixed_point + d, center.y);
    let traj = if backward {
        integrate_backward(p, &start, cfg)
    } else {
        integrate(p, &start, cfg)
    }
    .ok()?;
    let first = crossings(p, &traj, section).into_iter().next()?;
    Some((first.coordinate() - fixed_point) / d)
}

fn aitken(xs: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 3 {
        return None;
    }
    let (x0, x1, x2) = (xs[n - 3], xs[n - 2], xs[n - 1]);
    let denom = x2 - 2.0 * x1 + x0;
    if denom.abs() > 1e-300 {
        let acc = x2 - (x2 - x1) * (x2 - x1) / denom;
        if acc.is_finite() {
            return Some(acc);
        }
    }
    Some(x2)
}

/// Iterates the Poincare return map on the ray through `center` and looks
/// for a fixed point away from the equilibrium. Secant (Aitken)
/// extrapolation restarts the iteration once the residual is already
/// small, which speeds up the weakly attracting cycles near a Hopf point.
pub(crate) fn probe_small_cycle(
    p: &ModelParams,
    center: &State,
    backward: bool,
    st: &ProbeSettings,
) -> Result<ProbeOutcome> {
    let section = Section {
        y_level: center.y,
        x_min: center.x,
    };
    let jet = jet3(p, center)?;
    let period_guess = {
        let det = jet.det();
        if det > 1e-12 {
            2.0 * PI / det.sqrt()
        } else {
            100.0
        }
    };
    // Keep the linear transient of the initial displacement inside the
    // safe neighborhood, and scale the floor separating "the equilibrium
    // itself" from a genuine cycle down with the displacement.
    let kappa = excursion_factor(&jet.jacobian);
    let displacement = st.displacement.min(st.shear_safe_radius / kappa);
    let amplitude_floor = st.amplitude_floor.min((0.05 * displacement).max(1e-9));

    let chunk = (8.0 * period_guess).min(st.max_time);
    let cfg = IntegratorConfig {
        max_time: chunk,
        ..IntegratorConfig::default()
    };
    let verify_cfg = IntegratorConfig {
        max_time: (3.0 * period_guess).min(st.max_time),
        ..IntegratorConfig::default()
    };
    let one_return = |x_start: f64| -> Result<Option<SectionHit>> {
        let z = State::new(x_start, center.y);
        let traj = if backward {
            integrate_backward(p, &z, &verify_cfg)?
        } else {
            integrate(p, &z, &verify_cfg)?
        };
        Ok(crossings(p, &traj, &section).into_iter().next())
    };

    let mut state = State::new(center.x + displacement, center.y);
    let mut xs: Vec<f64> = Vec::new();
    let mut ts: Vec<f64> = Vec::new();
    let mut n_crossings = 0usize;
    let mut total_t = 0.0;
    let mut jumped = false;

    while total_t < st.max_time && n_crossings < st.max_crossings {
        let traj = if backward {
            integrate_backward(p, &state, &cfg)?
        } else {
            integrate(p, &state, &cfg)?
        };

        // Window scan: stop at the first sample that leaves the probing
        // neighborhood; an escape from the domain itself is an error.
        let mut left_at: Option<f64> = None;
        for &(t, z) in &traj.samples {
            if (z.x - center.x).abs() > st.window_radius
                || (z.y - center.y).abs() > st.window_radius
            {
                left_at = Some(t);
                break;
            }
        }
        if left_at.is_none() && traj.reason == Termination::Escaped {
            return Err(Error::escape("probe trajectory left the domain"));
        }

        for hit in crossings(p, &traj, &section) {
            if let Some(t_exit) = left_at {
                if hit.t >= t_exit {
                    break;
                }
            }
            xs.push(hit.coordinate());
            ts.push(total_t + hit.t);
            n_crossings += 1;
            let k = xs.len() - 1;
            if k == 0 || (xs[k] - xs[k - 1]).abs() > st.residual_tol {
                continue;
            }
            let candidate = aitken(&xs).unwrap_or(xs[k]);
            if candidate - center.x <= amplitude_floor {
                return Ok(ProbeOutcome::SpiralsIn);
            }
            // Verify the extrapolated fixed point with one more return;
            // the reported residual belongs to the reported point.
            if let Some(next) = one_return(candidate)? {
                let residual = (next.coordinate() - candidate).abs();
                if residual <= st.residual_tol {
                    let derivative = if !jumped && xs.len() >= 3 {
                        let d0 = xs[k - 1] - xs[k - 2];
                        let d1 = xs[k] - xs[k - 1];
                        (d0.abs() > 1e-300).then(|| d1 / d0)
                    } else {
                        map_slope_at(
                            p, center, backward, &verify_cfg, &section, candidate,
                            displacement,
                        )
                    };
                    return Ok(ProbeOutcome::Cycle {
                        fixed_point: candidate,
                        period: next.t,
                        residual,
                        derivative,
                    });
                }
            }
        }

        if left_at.is_some() {
            // Crossings up to the exit were inspected above.
            return Ok(ProbeOutcome::LeftWindow);
        }
        match traj.reason {
            Termination::Converged(z) => {
                let dist = (z.x - center.x).abs().max((z.y - center.y).abs());
                return if dist <= amplitude_floor {
                    Ok(ProbeOutcome::SpiralsIn)
                } else {
                    Ok(ProbeOutcome::LeftWindow)
                };
            }
            Termination::Escaped => unreachable!("handled by the window scan"),
            Termination::TimeLimit => {}
        }

        total_t += traj.last_time();
        state = traj.last_state();
        jumped = false;

        // Accelerate once the iteration is clearly contracting.
        if xs.len() >= 3 {
            let k = xs.len() - 1;
            let residual = (xs[k] - xs[k - 1]).abs();
            if residual < 5e-3 && residual > st.residual_tol {
                if let Some(acc) = aitken(&xs) {
                    let target = xs[k] + 0.8 * (acc - xs[k]);
                    if target - center.x > amplitude_floor
                        && target - center.x < st.window_radius
                    {
                        state = State::new(target, center.y);
                        xs.clear();
                        ts.clear();
                        jumped = true;
                    }
                }
            }
        }
    }
    Ok(ProbeOutcome::Budget)
}

/// Integrates from a point displaced along the section ray at the growth
/// rate `critical_s + offset` and reports the small limit cycle found (by
/// forward or, for repelling cycles, reverse-time iteration) or the reason
/// none exists near the equilibrium.
pub fn simulate_hopf_side(
    p: &ModelParams,
    e: &Equilibrium,
    critical_s: f64,
    offset: f64,
) -> Result<HopfSideOutcome> {
    if offset == 0.0 {
        return Err(Error::domain("offset must be nonzero"));
    }
    if offset.abs() > 0.1 * critical_s {
        return Err(Error::domain(
            "offset must stay within a tenth of the critical growth rate",
        ));
    }
    let s_value = critical_s + offset;
    let p_side = p.with_s(s_value)?;
    let f = vector_field(&p_side, &e.point)?;
    if f[0].hypot(f[1]) > 1e-9 {
        return Err(Error::domain(
            "the point is not an equilibrium at the offset growth rate",
        ));
    }

    // Probe within half the distance to the nearest other equilibrium.
    let window_radius = all_equilibria(&p_side)
        .iter()
        .filter(|other| {
            (other.x() - e.x()).abs() > 1e-9 || (other.y() - e.y()).abs() > 1e-9
        })
        .map(|other| {
            let d = (other.x() - e.x()).abs().max((other.y() - e.y()).abs());
            0.5 * d
        })
        .fold(0.25 * e.x(), f64::min)
        .clamp(1e-4, 0.5);

    let settings = ProbeSettings {
        window_radius,
        displacement: 1e-2_f64.min(0.5 * window_radius),
        amplitude_floor: 1e-3_f64.min(0.2 * window_radius),
        shear_safe_radius: window_radius,
        max_crossings: 200,
        max_time: 5e4,
        residual_tol: 1e-6,
    };

    let section = Section {
        y_level: e.y(),
        x_min: e.x(),
    };
    let forward = probe_small_cycle(&p_side, &e.point, false, &settings)?;
    if let ProbeOutcome::Cycle {
        fixed_point,
        period,
        residual,
        derivative,
    } = forward
    {
        return Ok(HopfSideOutcome::Cycle(LimitCycleEvidence {
            s_value,
            section,
            fixed_point,
            period,
            residual,
            map_derivative: derivative,
            attracting: true,
            via_reverse_time: false,
        }));
    }
    let backward = probe_small_cycle(&p_side, &e.point, true, &settings)?;
    if let ProbeOutcome::Cycle {
        fixed_point,
        period,
        residual,
        derivative,
    } = backward
    {
        return Ok(HopfSideOutcome::Cycle(LimitCycleEvidence {
            s_value,
            section,
            fixed_point,
            period,
            residual,
            map_derivative: derivative,
            attracting: false,
            via_reverse_time: true,
        }));
    }
    let reason = match forward {
        ProbeOutcome::SpiralsIn => NoCycleReason::SpiralsIn,
        ProbeOutcome::LeftWindow => NoCycleReason::LeftNeighborhood,
        _ => NoCycleReason::NoConvergence,
    };
    Ok(HopfSideOutcome::NoCycle(reason))
}

/// Bisection oracle for the critical growth rate: solves trace(s) = 0 on
/// (lo, hi) using only Jacobian evaluations. Used to cross-check the
/// closed form.
pub fn critical_s_by_bisection(
    p: &ModelParams,
    e: &Equilibrium,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let tr = |s: f64| -> Result<f64> {
        let ps = ModelParams { s, ..*p };
        Ok(jet3(&ps, &e.point)?.trace())
    };
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (tr(lo)?, tr(hi)?);
    if flo * fhi > 0.0 {
        return Err(Error::domain("trace does not change sign on the bracket"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = tr(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm * flo.signum() > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
