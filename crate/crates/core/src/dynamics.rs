//! Time integration and section machinery.
//!
//! A Dormand-Prince 5(4) embedded pair with proportional step control
//! integrates the model. The predator axis y = 0 is invariant and is kept
//! exactly invariant numerically: a state with y = 0 has ydot = 0 in every
//! stage, and accepted steps clamp |y| below the absolute tolerance back
//! to 0. The domain boundary x -> 0+ is treated as an escape event at the
//! floor delta rather than a state.

use crate::model::{field, ModelParams, State};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Velocity norm below which a state counts as stationary.
const CONV_NORM: f64 = 1e-10;
/// Consecutive stationary accepted steps before declaring convergence.
const CONV_STEPS: usize = 10;
/// Hard cap on accepted + rejected steps, a defensive bound only.
const MAX_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_time: f64,
    /// Upper bounds of the escape box; the lower bounds are 0.
    pub escape_box: [f64; 2],
    /// Escape floor for x.
    pub escape_floor: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: 1.0,
            max_time: 1e4,
            escape_box: [10.0, 10.0],
            escape_floor: 1e-9,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(v > 0.0 && v <= 1e-2) {
                return Err(Error::domain(format!("{name} must lie in (0, 1e-2]")));
            }
        }
        if !(self.escape_floor > 0.0) {
            return Err(Error::domain("escape_floor must be positive"));
        }
        if !(self.max_step > 0.0 && self.max_time > 0.0) {
            return Err(Error::domain("max_step and max_time must be positive"));
        }
        Ok(())
    }

    pub fn with_max_time(mut self, t: f64) -> Self {
        self.max_time = t;
        self
    }

    pub fn with_tolerances(mut self, rel: f64, abs: f64) -> Self {
        self.rel_tol = rel;
        self.abs_tol = abs;
        self
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    TimeLimit,
    /// The velocity stayed below the stationarity norm for several steps.
    Converged(State),
    /// The trajectory left the domain (x at the floor or outside the box).
    Escaped,
}

/// Samples along one solution, one per accepted step, times strictly
/// increasing in the integration direction parameter. Every sample stays
/// above the escape floor except, for an escaped trajectory, the terminal
/// one: the step that reaches the floor is recorded and integration stops
/// there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, State)>,
    pub reason: Termination,
    /// True when the trajectory was integrated in reversed time; sample
    /// times then measure backward time from the seed.
    pub backward: bool,
}

impl Trajectory {
    pub fn last_state(&self) -> State {
        self.samples.last().expect("nonempty trajectory").1
    }

    pub fn last_time(&self) -> f64 {
        self.samples.last().expect("nonempty trajectory").0
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[inline]
fn axpy(y: [f64; 2], h: f64, ks: &[[f64; 2]; 7], coeffs: &[f64]) -> [f64; 2] {
    let mut out = y;
    for (k, &c) in ks.iter().zip(coeffs) {
        if c != 0.0 {
            out[0] += h * c * k[0];
            out[1] += h * c * k[1];
        }
    }
    out
}

#[inline]
fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

struct Dopri5<'a> {
    p: &'a ModelParams,
    backward: bool,
}

impl Dopri5<'_> {
    #[inline]
    fn f(&self, y: [f64; 2]) -> [f64; 2] {
        let v = field(self.p, y[0], y[1]);
        if self.backward {
            [-v[0], -v[1]]
        } else {
            v
        }
    }

    /// One trial step; returns the 5th-order state, scaled error, and the
    /// first stage of the next step (FSAL).
    fn step(&self, y: [f64; 2], k1: [f64; 2], h: f64, cfg: &IntegratorConfig) -> ([f64; 2], f64, [f64; 2]) {
        let mut ks = [[0.0; 2]; 7];
        ks[0] = k1;
        for i in 0..6 {
            let yi = axpy(y, h, &ks, &A[i][..=i]);
            ks[i + 1] = self.f(yi);
        }
        let y5 = axpy(y, h, &ks, &B5);
        let y4 = axpy(y, h, &ks, &B4);
        let mut err = 0.0f64;
        for d in 0..2 {
            let scale = cfg.abs_tol + cfg.rel_tol * y[d].abs().max(y5[d].abs());
            let e = (y5[d] - y4[d]) / scale;
            err += e * e;
        }
        (y5, (err / 2.0).sqrt(), ks[6])
    }
}

fn escaped(y: [f64; 2], cfg: &IntegratorConfig) -> bool {
    y[0] <= cfg.escape_floor
        || y[0] >= cfg.escape_box[0]
        || y[1] >= cfg.escape_box[1]
        || y[1] < -cfg.abs_tol.max(1e-9) * 10.0
}

fn integrate_dir(
    p: &ModelParams,
    z0: &State,
    cfg: &IntegratorConfig,
    backward: bool,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(z0.x > 0.0) {
        return Err(Error::domain("initial state must have x > 0"));
    }
    if !(z0.y >= 0.0) {
        return Err(Error::domain("initial state must have y >= 0"));
    }
    let sys = Dopri5 { p, backward };
    let mut t = 0.0;
    let mut y = [z0.x, z0.y];
    let mut k1 = sys.f(y);
    let mut samples = vec![(t, State::new(y[0], y[1]))];

    if escaped(y, cfg) {
        return Ok(Trajectory {
            samples,
            reason: Termination::Escaped,
            backward,
        });
    }

    // Initial step from the velocity scale, then controlled.
    let mut h = {
        let d0 = norm2(y).max(1e-3);
        let d1 = norm2(k1);
        if d1 > 1e-12 {
            (0.01 * d0 / d1).min(cfg.max_step)
        } else {
            cfg.max_step * 1e-3
        }
    };

    let mut quiet_steps = 0usize;
    let mut reason = Termination::TimeLimit;
    let mut nsteps = 0usize;

    while t < cfg.max_time {
        nsteps += 1;
        if nsteps > MAX_STEPS {
            break;
        }
        h = h.min(cfg.max_step).min(cfg.max_time - t).max(1e-13);
        let (y_new, err, k_last) = sys.step(y, k1, h, cfg);
        if err <= 1.0 || h <= 1e-13 {
            t += h;
            y = y_new;
            k1 = k_last;
            // Keep the invariant axis exactly invariant.
            if y[1] != 0.0 && y[1].abs() <= cfg.abs_tol {
                y[1] = 0.0;
                k1 = sys.f(y);
            }
            samples.push((t, State::new(y[0], y[1])));
            if escaped(y, cfg) {
                reason = Termination::Escaped;
                break;
            }
            let speed = norm2(sys.f(y));
            if speed <= CONV_NORM {
                quiet_steps += 1;
                if quiet_steps >= CONV_STEPS {
                    reason = Termination::Converged(State::new(y[0], y[1]));
                    break;
                }
            } else {
                quiet_steps = 0;
            }
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }

    Ok(Trajectory {
        samples,
        reason,
        backward,
    })
}

/// Integrates the system forward from z0 until the time limit, convergence
/// to an equilibrium, or escape from the domain.
pub fn integrate(p: &ModelParams, z0: &State, cfg: &IntegratorConfig) -> Result<Trajectory> {
    integrate_dir(p, z0, cfg, false)
}

/// Integrates the reversed field; sample times are backward time.
pub fn integrate_backward(
    p: &ModelParams,
    z0: &State,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_dir(p, z0, cfg, true)
}

/// A Poincare section: the horizontal ray y = y_level, x > x_min, taken
/// with crossing direction ydot > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub y_level: f64,
    pub x_min: f64,
}

/// One transversal hit of a section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionHit {
    pub t: f64,
    pub state: State,
}

impl SectionHit {
    /// Section coordinate: the x position on the ray.
    pub fn coordinate(&self) -> f64 {
        self.state.x
    }
}

#[inline]
fn hermite(t: f64, t0: f64, t1: f64, y0: [f64; 2], f0: [f64; 2], y1: [f64; 2], f1: [f64; 2]) -> [f64; 2] {
    let dt = t1 - t0;
    let s = (t - t0) / dt;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let mut out = [0.0; 2];
    for d in 0..2 {
        out[d] = h00 * y0[d] + h10 * dt * f0[d] + h01 * y1[d] + h11 * dt * f1[d];
    }
    out
}

/// Section hits of a stored trajectory, located by bisection on the cubic
/// Hermite interpolant of each accepted step to time tolerance 1e-10.
///
/// The crossing direction is taken in phase space: hits require ydot > 0
/// under the forward field, whichever way the trajectory itself was
/// parameterized. For a backward trajectory such events appear as
/// downward crossings in sample order.
pub fn crossings(p: &ModelParams, traj: &Trajectory, section: &Section) -> Vec<SectionHit> {
    let sign = if traj.backward { -1.0 } else { 1.0 };
    let mut hits = Vec::new();
    for w in traj.samples.windows(2) {
        let (t0, s0) = w[0];
        let (t1, s1) = w[1];
        if s0.x <= 0.0 || s1.x <= 0.0 {
            continue;
        }
        let g0 = s0.y - section.y_level;
        let g1 = s1.y - section.y_level;
        let crosses = (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0);
        if !crosses {
            continue;
        }
        let y0 = [s0.x, s0.y];
        let y1 = [s1.x, s1.y];
        let f0 = field(p, s0.x, s0.y).map(|v| v * sign);
        let f1 = field(p, s1.x, s1.y).map(|v| v * sign);
        let (mut lo, mut hi) = (t0, t1);
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            let g = hermite(mid, t0, t1, y0, f0, y1, f1)[1] - section.y_level;
            if (g < 0.0) == (g0 < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tc = 0.5 * (lo + hi);
        let yc = hermite(tc, t0, t1, y0, f0, y1, f1);
        let forward_ydot = field(p, yc[0], section.y_level)[1];
        if yc[0] > section.x_min && forward_ydot > 0.0 {
            hits.push(SectionHit {
                t: tc,
                state: State::new(yc[0], section.y_level),
            });
        }
    }
    hits
}

/// Integration direction(s) for phase portraits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
    Both,
}

/// A rectangular window with a seed grid and an integration horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortraitSpec {
    /// Window [x0, x1] x [y0, y1]; requires 0 < x0 < x1 and 0 <= y0 < y1.
    pub window: [f64; 4],
    /// Seed columns across x.
    pub nx: usize,
    /// Seed rows across y.
    pub ny: usize,
    pub horizon: f64,
    pub direction: Direction,
}

impl PortraitSpec {
    pub fn validate(&self) -> Result<()> {
        let [x0, x1, y0, y1] = self.window;
        if !(x0 > 0.0 && x1 > x0 && y0 >= 0.0 && y1 > y0) {
            return Err(Error::domain(
                "window must satisfy 0 < x0 < x1 and 0 <= y0 < y1",
            ));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::domain("grid dimensions must be at least 1"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::domain("horizon must be positive"));
        }
        Ok(())
    }

    /// Seed points in row-major order (rows over y, columns over x).
    /// A single-point axis seeds the window midpoint.
    pub fn seeds(&self) -> Vec<State> {
        let [x0, x1, y0, y1] = self.window;
        let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            if n == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..n)
                    .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                    .collect()
            }
        };
        let xs = axis(x0, x1, self.nx);
        let ys = axis(y0, y1, self.ny);
        let mut seeds = Vec::with_capacity(self.nx * self.ny);
        for &y in &ys {
            for &x in &xs {
                seeds.push(State::new(x, y));
            }
        }
        seeds
    }
}

/// One portrait trajectory with its seed provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortraitRun {
    pub seed: usize,
    pub trajectory: Trajectory,
}

/// Integrates every grid seed for the horizon in the requested
/// direction(s). Seeds are distributed over worker threads; the output
/// order is by seed index (then forward before backward) regardless of
/// scheduling.
pub fn portrait(p: &ModelParams, spec: &PortraitSpec, cfg: &IntegratorConfig) -> Result<Vec<PortraitRun>> {
    spec.validate()?;
    cfg.validate()?;
    let run_cfg = IntegratorConfig {
        max_time: spec.horizon,
        ..*cfg
    };
    let seeds = spec.seeds();
    let jobs: Vec<(usize, State, bool)> = seeds
        .iter()
        .enumerate()
        .flat_map(|(i, z)| match spec.direction {
            Direction::Forward => vec![(i, *z, false)],
            Direction::Backward => vec![(i, *z, true)],
            Direction::Both => vec![(i, *z, false), (i, *z, true)],
        })
        .collect();
    let runs: Result<Vec<PortraitRun>> = jobs
        .into_par_iter()
        .map(|(seed, z, backward)| {
            integrate_dir(p, &z, &run_cfg, backward).map(|trajectory| PortraitRun {
                seed,
                trajectory,
            })
        })
        .collect();
    runs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;

    fn p(q: f64, h: f64, s: f64, m: f64) -> ModelParams {
        ModelParams::new(q, h, s, m).unwrap()
    }

    #[test]
    fn converges_to_stable_boundary_node() {
        let pp = p(1.0, 0.21, 1.0, 0.1);
        let traj = integrate(
            &pp,
            &State::new(0.69, 0.001),
            &IntegratorConfig::default(),
        )
        .unwrap();
        match traj.reason {
            Termination::Converged(z) => {
                assert!((z.x - 0.7).abs() < 1e-5, "x -> {}", z.x);
                assert!(z.y.abs() < 1e-6, "y -> {}", z.y);
            }
            other => panic!("expected convergence, got {other:?}"),
        }
    }

    #[test]
    fn escapes_when_harvest_kills_prey() {
        // h > 1/4 leaves no boundary equilibria; xdot < 0 along y >= 0.
        let pp = p(1.0, 0.3, 1.0, 0.1);
        let traj = integrate(&pp, &State::new(0.5, 0.1), &IntegratorConfig::default()).unwrap();
        assert_eq!(traj.reason, Termination::Escaped);
        assert!(traj.last_state().x <= 1e-9);
    }

    #[test]
    fn rejects_bad_initial_state_and_config() {
        let pp = p(1.0, 0.1, 1.0, 0.1);
        assert!(integrate(&pp, &State::new(0.0, 0.1), &IntegratorConfig::default()).is_err());
        let bad = IntegratorConfig {
            rel_tol: 0.5,
            ..Default::default()
        };
        assert!(integrate(&pp, &State::new(0.5, 0.1), &bad).is_err());
    }

    #[test]
    fn invariant_axis_is_exact() {
        let pp = p(1.0, 0.1, 1.0, 0.2);
        let traj = integrate(
            &pp,
            &State::new(0.4, 0.0),
            &IntegratorConfig::default().with_max_time(50.0),
        )
        .unwrap();
        assert!(traj.samples.iter().all(|(_, z)| z.y == 0.0));
    }

    #[test]
    fn crossing_sequence_of_a_focus_is_monotone() {
        // Stable focus at the larger diagonal equilibrium for s above the
        // critical growth rate.
        let pp = p(1.0, 0.12, 1.0, 0.1);
        let traj = integrate(
            &pp,
            &State::new(0.34, 0.3),
            &IntegratorConfig::default().with_max_time(400.0),
        )
        .unwrap();
        let hits = crossings(&pp, &traj, &Section { y_level: 0.3, x_min: 0.3 });
        assert!(hits.len() >= 3, "spiral produced {} hits", hits.len());
        for w in hits.windows(2) {
            assert!(w[1].coordinate() < w[0].coordinate());
            assert!(w[1].coordinate() > 0.3);
        }
    }

    #[test]
    fn no_hits_for_disjoint_ray() {
        let pp = p(1.0, 0.12, 1.0, 0.1);
        let traj = integrate(
            &pp,
            &State::new(0.34, 0.3),
            &IntegratorConfig::default().with_max_time(100.0),
        )
        .unwrap();
        let hits = crossings(&pp, &traj, &Section { y_level: 5.0, x_min: 0.0 });
        assert!(hits.is_empty());
    }

    #[test]
    fn portrait_seed_counts_and_direction() {
        let pp = p(1.0, 0.12, 1.0, 0.1);
        let cfg = IntegratorConfig::default();
        let spec = PortraitSpec {
            window: [0.2, 0.8, 0.0, 0.5],
            nx: 1,
            ny: 1,
            horizon: 1.0,
            direction: Direction::Forward,
        };
        assert_eq!(portrait(&pp, &spec, &cfg).unwrap().len(), 1);
        let spec = PortraitSpec {
            direction: Direction::Both,
            ..spec
        };
        assert_eq!(portrait(&pp, &spec, &cfg).unwrap().len(), 2);
        let bad = PortraitSpec {
            window: [-1.0, 1.0, 0.0, 1.0],
            ..spec
        };
        assert!(portrait(&pp, &bad, &cfg).is_err());
    }

    #[test]
    fn stable_equilibrium_stays_put() {
        let pp = p(1.0, 0.21, 1.0, 0.1);
        let traj = integrate(
            &pp,
            &State::new(0.7, 0.0),
            &IntegratorConfig::default().with_max_time(100.0),
        )
        .unwrap();
        for (_, z) in &traj.samples {
            assert!((z.x - 0.7).abs() < 1e-8 && z.y.abs() < 1e-8);
        }
        // Same for an interior stable focus.
        let pp = p(1.0, 0.12, 1.0, 0.1);
        let traj = integrate(
            &pp,
            &State::new(0.3, 0.3),
            &IntegratorConfig::default().with_max_time(100.0),
        )
        .unwrap();
        for (_, z) in &traj.samples {
            assert!((z.x - 0.3).abs() < 1e-8 && (z.y - 0.3).abs() < 1e-8);
        }
    }
}
