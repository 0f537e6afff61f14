//! Regular grid over (x, y, θ) with periodic heading, and scalar fields on it.

use std::f64::consts::PI;
use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Pose};

/// Node-centered grid. x and y include both end nodes; θ covers `[-π, π)`
/// with node `n_θ` aliasing node 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid3 {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub n: [usize; 3],
}

const SNAP: f64 = 1e-9;

impl Grid3 {
    pub fn new(x: (f64, f64), y: (f64, f64), n: [usize; 3]) -> Result<Self> {
        if n.iter().any(|&k| k < 3) {
            return Err(Error::Validation("grid needs at least 3 nodes per axis".into()));
        }
        if !(x.1 > x.0 && y.1 > y.0) || ![x.0, x.1, y.0, y.1].iter().all(|v| v.is_finite()) {
            return Err(Error::Validation("grid bounds must be finite with hi > lo".into()));
        }
        Ok(Grid3 { lo: [x.0, y.0, -PI], hi: [x.1, y.1, PI], n })
    }

    pub fn cubic(x: (f64, f64), y: (f64, f64), n: usize) -> Result<Self> {
        Self::new(x, y, [n, n, n])
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        if axis == 2 {
            (self.hi[2] - self.lo[2]) / self.n[2] as f64
        } else {
            (self.hi[axis] - self.lo[axis]) / (self.n[axis] - 1) as f64
        }
    }

    pub fn flat(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.n[1] + idx[1]) * self.n[2] + idx[2]
    }

    pub fn unflat(&self, flat: usize) -> [usize; 3] {
        let k = flat % self.n[2];
        let ij = flat / self.n[2];
        [ij / self.n[1], ij % self.n[1], k]
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + i as f64 * self.spacing(axis)
    }

    pub fn cell_pose(&self, idx: [usize; 3]) -> Pose {
        Pose::new(self.coord(0, idx[0]), self.coord(1, idx[1]), self.coord(2, idx[2]))
    }

    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        let tol = |a: usize| SNAP * (self.hi[a] - self.lo[a]);
        x >= self.lo[0] - tol(0)
            && x <= self.hi[0] + tol(0)
            && y >= self.lo[1] - tol(1)
            && y <= self.hi[1] + tol(1)
    }

    fn check_xy(&self, pose: &Pose) -> Result<()> {
        if self.contains_xy(pose.x, pose.y) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { x: pose.x, y: pose.y })
        }
    }

    /// Continuous index along an axis, snapped onto nodes it is within
    /// rounding distance of.
    fn fractional(&self, axis: usize, v: f64) -> f64 {
        let f = (v - self.lo[axis]) / self.spacing(axis);
        let r = f.round();
        if (f - r).abs() < SNAP {
            r
        } else {
            f
        }
    }

    fn theta_fraction(&self, theta: f64) -> f64 {
        let f = self.fractional(2, normalize_angle(theta));
        f.rem_euclid(self.n[2] as f64)
    }

    /// Nearest node to the pose.
    pub fn state_to_index(&self, pose: &Pose) -> Result<[usize; 3]> {
        self.check_xy(pose)?;
        let i = (self.fractional(0, pose.x).round() as usize).min(self.n[0] - 1);
        let j = (self.fractional(1, pose.y).round() as usize).min(self.n[1] - 1);
        let k = (self.theta_fraction(pose.theta).round() as usize) % self.n[2];
        Ok([i, j, k])
    }

    /// Visits every cell once in flat order.
    pub fn for_each_cell(&self, visitor: impl FnMut(usize, [usize; 3])) {
        self.for_each_cell_in(0..self.len(), visitor)
    }

    /// Visits the cells of a flat-index range in order.
    pub fn for_each_cell_in(&self, range: Range<usize>, mut visitor: impl FnMut(usize, [usize; 3])) {
        for f in range.start..range.end.min(self.len()) {
            visitor(f, self.unflat(f));
        }
    }

    /// Splits the flat index space into at most `parts` contiguous ranges.
    pub fn partition(&self, parts: usize) -> Vec<Range<usize>> {
        let parts = parts.max(1);
        let n = self.len();
        let chunk = n.div_ceil(parts);
        (0..parts)
            .map(|p| (p * chunk).min(n)..((p + 1) * chunk).min(n))
            .filter(|r| !r.is_empty())
            .collect()
    }

    /// Evaluates `f` at every cell in parallel, returning values in flat order.
    pub fn par_map<T: Send>(&self, f: impl Fn([usize; 3]) -> T + Sync) -> Vec<T> {
        (0..self.len()).into_par_iter().map(|i| f(self.unflat(i))).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueField {
    pub grid: Grid3,
    pub values: Vec<f64>,
}

impl ValueField {
    pub fn new(grid: Grid3, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "field has {} values for {} cells",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("field values must be finite".into()));
        }
        Ok(ValueField { grid, values })
    }

    pub fn constant(grid: Grid3, v: f64) -> Self {
        let values = vec![v; grid.len()];
        ValueField { grid, values }
    }

    pub fn at(&self, idx: [usize; 3]) -> f64 {
        self.values[self.grid.flat(idx)]
    }

    /// Trilinear interpolation with wraparound in θ.
    pub fn interpolate(&self, pose: &Pose) -> Result<f64> {
        let g = &self.grid;
        g.check_xy(pose)?;
        let axis = |a: usize, v: f64| {
            let f = g.fractional(a, v).clamp(0.0, (g.n[a] - 1) as f64);
            let i0 = (f.floor() as usize).min(g.n[a] - 2);
            (i0, i0 + 1, f - i0 as f64)
        };
        let (i0, i1, tx) = axis(0, pose.x);
        let (j0, j1, ty) = axis(1, pose.y);
        let ft = g.theta_fraction(pose.theta);
        let k0 = (ft.floor() as usize) % g.n[2];
        let k1 = (k0 + 1) % g.n[2];
        let tt = ft - ft.floor();
        let v = |i, j, k| self.at([i, j, k]);
        let lerp = |a: f64, b: f64, t: f64| if t == 0.0 { a } else if t == 1.0 { b } else { a + (b - a) * t };
        let c00 = lerp(v(i0, j0, k0), v(i1, j0, k0), tx);
        let c10 = lerp(v(i0, j1, k0), v(i1, j1, k0), tx);
        let c01 = lerp(v(i0, j0, k1), v(i1, j0, k1), tx);
        let c11 = lerp(v(i0, j1, k1), v(i1, j1, k1), tx);
        let c0 = lerp(c00, c10, ty);
        let c1 = lerp(c01, c11, ty);
        Ok(lerp(c0, c1, tt))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
