//! Backward reachable tube of a Dubins-type car, computed with a
//! Lax-Friedrichs level-set scheme on a [`Grid3`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{angle_diff, Pose, VehicleGeometry};
use crate::grid::{Grid3, ValueField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DubinsParams {
    pub speed: f64,
    pub omega_max: f64,
    pub allow_reverse: bool,
}

impl DubinsParams {
    /// Turn rate bound matching the car's minimum turning radius.
    pub fn for_vehicle(geom: &VehicleGeometry, speed: f64, allow_reverse: bool) -> Self {
        DubinsParams { speed, omega_max: speed * geom.max_curvature(), allow_reverse }
    }

    fn validate(&self) -> Result<()> {
        if self.speed > 0.0 && self.omega_max > 0.0 {
            Ok(())
        } else {
            Err(Error::Validation("speed and omega_max must be positive".into()))
        }
    }
}

impl Default for DubinsParams {
    fn default() -> Self {
        Self::for_vehicle(&VehicleGeometry::default(), 1.0, true)
    }
}

/// Box of tolerances around the parking goal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoalSet {
    pub center: Pose,
    pub half_widths: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    Euler,
    /// Second-order TVD Runge-Kutta.
    Rk2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub cfl: f64,
    pub tol: f64,
    pub max_horizon: f64,
    pub integrator: Integrator,
    /// Keep a copy of the field every this many seconds.
    pub checkpoint_every: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            cfl: 0.5,
            tol: 1e-4,
            max_horizon: 120.0,
            integrator: Integrator::Euler,
            checkpoint_every: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BrtResult {
    pub field: ValueField,
    pub horizon: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `(time, field)` snapshots, starting with the terminal condition.
    pub checkpoints: Vec<(f64, ValueField)>,
}

/// `l(z) = (max_i |Δ_i| / ε_i - 1) · min ε`, negative inside the goal box.
pub fn goal_level_set(grid: &Grid3, goal: &GoalSet) -> Result<ValueField> {
    if !grid.contains_xy(goal.center.x, goal.center.y) {
        return Err(Error::OutOfBounds { x: goal.center.x, y: goal.center.y });
    }
    if goal.half_widths.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Validation("goal tolerances must be positive".into()));
    }
    let values = grid.par_map(|idx| goal_value(goal, &grid.cell_pose(idx)));
    ValueField::new(grid.clone(), values)
}

pub fn goal_value(goal: &GoalSet, p: &Pose) -> f64 {
    let [ex, ey, et] = goal.half_widths;
    let r = ((p.x - goal.center.x).abs() / ex)
        .max((p.y - goal.center.y).abs() / ey)
        .max(angle_diff(p.theta, goal.center.theta).abs() / et);
    (r - 1.0) * ex.min(ey).min(et)
}

/// `min_u ∇V · f(z, u)` for the unicycle with bounded turn rate.
pub fn hamiltonian(theta: f64, grad: [f64; 3], params: &DubinsParams) -> f64 {
    let (s, c) = theta.sin_cos();
    hamiltonian_sc(s, c, grad, params)
}

#[inline]
fn hamiltonian_sc(s: f64, c: f64, grad: [f64; 3], params: &DubinsParams) -> f64 {
    let a = params.speed * (grad[0] * c + grad[1] * s);
    let turn = params.omega_max * grad[2].abs();
    if params.allow_reverse {
        -a.abs() - turn
    } else {
        a - turn
    }
}

pub fn solve_brt(grid: &Grid3, goal: &GoalSet, params: &DubinsParams, opts: &SolverOptions) -> Result<BrtResult> {
    let target = goal_level_set(grid, goal)?;
    solve_brt_from(target, params, opts)
}

/// Evolves an arbitrary terminal condition `l` (the target set is `l <= 0`).
pub fn solve_brt_from(target: ValueField, params: &DubinsParams, opts: &SolverOptions) -> Result<BrtResult> {
    params.validate()?;
    if !(opts.max_horizon >= 0.0) || !(opts.cfl > 0.0) {
        return Err(Error::Validation("max_horizon must be >= 0 and cfl > 0".into()));
    }
    let grid = target.grid.clone();
    let d = [grid.spacing(0), grid.spacing(1), grid.spacing(2)];
    let rate = params.speed / d[0] + params.speed / d[1] + params.omega_max / d[2];
    let dt_max = opts.cfl / rate;
    let trig: Vec<(f64, f64)> = (0..grid.n[2]).map(|k| grid.coord(2, k).sin_cos()).collect();

    let mut v = target.values;
    let mut next = vec![0.0; v.len()];
    let mut stage = vec![0.0; v.len()];
    let mut t = 0.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut checkpoints = Vec::new();
    let mut next_checkpoint = opts.checkpoint_every;
    if next_checkpoint.is_some() {
        checkpoints.push((0.0, ValueField { grid: grid.clone(), values: v.clone() }));
    }

    while t < opts.max_horizon {
        let dt = dt_max.min(opts.max_horizon - t);
        match opts.integrator {
            Integrator::Euler => euler_step(&grid, &trig, params, d, dt, &v, &mut next),
            Integrator::Rk2 => {
                euler_step(&grid, &trig, params, d, dt, &v, &mut stage);
                euler_step(&grid, &trig, params, d, dt, &stage, &mut next);
                next.par_iter_mut().zip(v.par_iter()).for_each(|(n, &old)| *n = 0.5 * (old + *n));
            }
        }
        iterations += 1;
        let change = next
            .par_iter_mut()
            .zip(v.par_iter())
            .map(|(n, &old)| {
                *n = n.min(old);
                old - *n
            })
            .reduce(|| 0.0, f64::max);
        if !change.is_finite() || next.par_iter().any(|x| !x.is_finite()) {
            return Err(Error::Diverged { iteration: iterations });
        }
        std::mem::swap(&mut v, &mut next);
        t += dt;
        if let (Some(every), Some(at)) = (opts.checkpoint_every, next_checkpoint) {
            if t >= at - 1e-12 {
                checkpoints.push((t, ValueField { grid: grid.clone(), values: v.clone() }));
                next_checkpoint = Some(at + every);
            }
        }
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    if opts.checkpoint_every.is_some() && checkpoints.last().map_or(true, |(ct, _)| *ct < t) {
        checkpoints.push((t, ValueField { grid: grid.clone(), values: v.clone() }));
    }
    Ok(BrtResult {
        field: ValueField { grid, values: v },
        horizon: t,
        converged,
        iterations,
        checkpoints,
    })
}

/// One explicit step `out = v + dt * (H(p̄) + Σ α_i (p⁺_i - p⁻_i) / 2)`.
fn euler_step(
    grid: &Grid3,
    trig: &[(f64, f64)],
    params: &DubinsParams,
    d: [f64; 3],
    dt: f64,
    v: &[f64],
    out: &mut [f64],
) {
    let [nx, ny, nt] = grid.n;
    let alpha = [params.speed, params.speed, params.omega_max];
    let sx = ny * nt;
    out.par_chunks_mut(sx).enumerate().for_each(|(i, slab)| {
        for j in 0..ny {
            for k in 0..nt {
                let f = (i * ny + j) * nt + k;
                let c = v[f];
                let (mx, px) = one_sided(v, f, i, nx, sx, d[0]);
                let (my, py) = one_sided(v, f, j, ny, nt, d[1]);
                let km = if k == 0 { nt - 1 } else { k - 1 };
                let kp = if k + 1 == nt { 0 } else { k + 1 };
                let base = f - k;
                let mt = (c - v[base + km]) / d[2];
                let pt = (v[base + kp] - c) / d[2];
                let grad = [0.5 * (mx + px), 0.5 * (my + py), 0.5 * (mt + pt)];
                let (s, co) = trig[k];
                let h = hamiltonian_sc(s, co, grad, params);
                let diss = 0.5 * (alpha[0] * (px - mx) + alpha[1] * (py - my) + alpha[2] * (pt - mt));
                slab[j * nt + k] = c + dt * (h + diss);
            }
        }
    });
}

/// Backward and forward differences along one non-periodic axis; at the
/// edges the missing side copies the available one (linear extrapolation).
#[inline]
fn one_sided(v: &[f64], f: usize, i: usize, n: usize, stride: usize, h: f64) -> (f64, f64) {
    let c = v[f];
    let minus = if i > 0 { Some((c - v[f - stride]) / h) } else { None };
    let plus = if i + 1 < n { Some((v[f + stride] - c) / h) } else { None };
    match (minus, plus) {
        (Some(m), Some(p)) => (m, p),
        (Some(m), None) => (m, m),
        (None, Some(p)) => (p, p),
        (None, None) => (0.0, 0.0),
    }
}

pub fn brt_contains(result: &BrtResult, pose: &Pose) -> Result<bool> {
    Ok(result.field.interpolate(pose)? <= 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn demo_grid(n: usize) -> Grid3 {
        Grid3::cubic((-10.0, 10.0), (-10.0, 10.0), n).unwrap()
    }

    fn origin_goal() -> GoalSet {
        GoalSet { center: Pose::new(0.0, 0.0, 0.0), half_widths: [1.0, 1.0, 0.5] }
    }

    #[test]
    fn level_set_values() {
        let goal = GoalSet { center: Pose::new(0.0, 1.3, PI / 2.0), half_widths: [0.25, 0.25, 5f64.to_radians()] };
        assert!((goal_value(&goal, &goal.center) + 5f64.to_radians()).abs() < 1e-12);
        assert!(goal_value(&goal, &Pose::new(0.25, 1.3, PI / 2.0)).abs() < 1e-9);
        let face = Pose::new(0.0, 1.3, PI / 2.0 + 5f64.to_radians());
        assert!(goal_value(&goal, &face).abs() < 1e-9);
        assert!(goal_value(&goal, &Pose::new(1.0, 1.3, PI / 2.0)) > 0.0);
    }

    #[test]
    fn goal_outside_grid_is_rejected() {
        let goal = GoalSet { center: Pose::new(20.0, 0.0, 0.0), half_widths: [1.0, 1.0, 1.0] };
        assert!(matches!(goal_level_set(&demo_grid(5), &goal), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn hamiltonian_cases() {
        let p = DubinsParams { speed: 1.0, omega_max: 0.5, allow_reverse: false };
        assert_eq!(hamiltonian(0.3, [0.0, 0.0, 0.0], &p), 0.0);
        assert!((hamiltonian(0.0, [1.0, 0.0, 0.0], &p) - 1.0).abs() < 1e-12);
        let r = DubinsParams { allow_reverse: true, ..p };
        assert!((hamiltonian(0.0, [1.0, 0.0, 0.0], &r) + 1.0).abs() < 1e-12);
        assert!((hamiltonian(0.0, [0.0, 0.0, -2.0], &r) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_horizon_returns_target() {
        let g = demo_grid(11);
        let opts = SolverOptions { max_horizon: 0.0, ..Default::default() };
        let r = solve_brt(&g, &origin_goal(), &DubinsParams::default(), &opts).unwrap();
        assert_eq!(r.field, goal_level_set(&g, &origin_goal()).unwrap());
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn value_stays_below_target_and_shrinks() {
        let g = demo_grid(21);
        let l = goal_level_set(&g, &origin_goal()).unwrap();
        let opts = SolverOptions { max_horizon: 6.0, checkpoint_every: Some(1.0), ..Default::default() };
        let r = solve_brt(&g, &origin_goal(), &DubinsParams::default(), &opts).unwrap();
        assert!(r.field.values.iter().zip(&l.values).all(|(v, l)| v <= l));
        for w in r.checkpoints.windows(2) {
            assert!(w[1].1.values.iter().zip(&w[0].1.values).all(|(b, a)| b <= a));
        }
        assert!(brt_contains(&r, &Pose::new(0.0, 0.0, 0.0)).unwrap());
        // Farther than speed * horizon from the goal box.
        assert!(!brt_contains(&r, &Pose::new(9.5, 9.5, 0.0)).unwrap());
    }

    #[test]
    fn rk2_matches_euler_roughly() {
        let g = demo_grid(21);
        let base = SolverOptions { max_horizon: 3.0, ..Default::default() };
        let e = solve_brt(&g, &origin_goal(), &DubinsParams::default(), &base).unwrap();
        let rk = SolverOptions { integrator: Integrator::Rk2, ..base };
        let r = solve_brt(&g, &origin_goal(), &DubinsParams::default(), &rk).unwrap();
        let worst = e.field.values.iter().zip(&r.field.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst < 0.2, "{worst}");
    }

    #[test]
    fn forward_only_tube_is_asymmetric() {
        let g = demo_grid(41);
        let opts = SolverOptions { max_horizon: 4.0, ..Default::default() };
        let p = DubinsParams { allow_reverse: false, ..Default::default() };
        let r = solve_brt(&g, &origin_goal(), &p, &opts).unwrap();
        // Behind the goal facing it is reachable driving forward; ahead of it is not.
        assert!(brt_contains(&r, &Pose::new(-3.0, 0.0, 0.0)).unwrap());
        assert!(!brt_contains(&r, &Pose::new(3.0, 0.0, 0.0)).unwrap());
    }

    #[test]
    fn quarter_turn_symmetry() {
        // Goal heading 0 at the origin: rotating the setup by 90° maps the tube
        // for goal heading π/2 onto it.
        let n = 21;
        let g =Grid3::new((-6.0, 6.0), (-6.0, 6.0), [n, n, 20]).unwrap();
        let opts = SolverOptions { max_horizon: 3.0, ..Default::default() };
        let p = DubinsParams::default();
        let a = solve_brt(&g, &GoalSet { center: Pose::new(0.0, 0.0, 0.0), half_widths: [1.0, 1.0, 0.5] }, &p, &opts).unwrap();
        let b = solve_brt(&g, &GoalSet { center: Pose::new(0.0, 0.0, PI / 2.0), half_widths: [1.0, 1.0, 0.5] }, &p, &opts).unwrap();
        let tol = 2.0 * g.spacing(0);
        let mut worst: f64 = 0.0;
        g.for_each_cell(|f, [i, j, k]| {
            // (x, y, θ) -> (-y, x, θ + π/2); θ has 20 nodes so the shift is 5.
            let rotated = [n - 1 - j, i, (k + 5) % 20];
            worst = worst.max((a.field.values[f] - b.field.at(rotated)).abs());
        });
        assert!(worst <= tol, "{worst}");
    }
}
