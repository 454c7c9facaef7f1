//! Discretized functions, balls, and quadrature over balls.
//!
//! A [`GridFunction`] is a real function sampled at the cell centers of a
//! uniform grid over an axis-aligned box, extended by zero outside the box.
//! Ball means use the cell-indicator (midpoint) rule: a cell contributes iff
//! its center lies in the open ball, and the denominator is the analytic ball
//! measure `v_d r^d` (v_1 = 2, v_2 = pi), not the counted cell measure.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::parallel;

pub type Point = [f64; 2];

/// Analytic measure of the unit ball in dimension `d` (d = 1 or 2).
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => panic!("unsupported dimension {dim}"),
    }
}

pub fn dist(dim: usize, a: Point, b: Point) -> f64 {
    let mut s = 0.0;
    for ax in 0..dim {
        let d = a[ax] - b[ax];
        s += d * d;
    }
    s.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Self {
        assert!(radius > 0.0, "ball radius must be positive");
        Ball { center, radius }
    }

    /// `|B| = v_d r^d`.
    pub fn volume(&self, dim: usize) -> f64 {
        unit_ball_volume(dim) * self.radius.powi(dim as i32)
    }

    pub fn contains(&self, dim: usize, p: Point) -> bool {
        dist(dim, self.center, p) < self.radius
    }

    /// Concentric ball with `factor` times the radius.
    pub fn scaled(&self, factor: f64) -> Ball {
        Ball::new(self.center, self.radius * factor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    lower: Point,
    upper: Point,
    h: f64,
    shape: [usize; 2],
    values: Vec<f64>,
}

fn cells_along(lower: f64, upper: f64, h: f64) -> Result<usize> {
    let span = upper - lower;
    if !(span > 0.0) || !(h > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "bad box/spacing: [{lower}, {upper}], h = {h}"
        )));
    }
    let n = (span / h).round();
    if (span - n * h).abs() > 1e-9 * span.max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "box span {span} is not an integer multiple of h = {h}"
        )));
    }
    Ok(n as usize)
}

impl GridFunction {
    pub fn from_values(
        dim: usize,
        lower: Point,
        upper: Point,
        h: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        let mut shape = [1usize; 2];
        let mut lo = [0.0; 2];
        let mut up = [0.0; 2];
        for ax in 0..dim {
            shape[ax] = cells_along(lower[ax], upper[ax], h)?;
            lo[ax] = lower[ax];
            up[ax] = upper[ax];
        }
        if values.len() != shape[0] * shape[1] {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                shape[0] * shape[1],
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite sample".into()));
        }
        Ok(GridFunction { dim, lower: lo, upper: up, h, shape, values })
    }

    /// Sample `f` at cell centers.
    pub fn sample<F: Fn(Point) -> f64 + Sync>(
        dim: usize,
        lower: Point,
        upper: Point,
        h: f64,
        f: F,
    ) -> Result<Self> {
        let mut g = GridFunction::from_values(
            dim,
            lower,
            upper,
            h,
            vec![0.0; cells_along(lower[0], upper[0], h)?
                * if dim == 2 { cells_along(lower[1], upper[1], h)? } else { 1 }],
        )?;
        let shape = g.shape;
        g.values = parallel::map_collect(shape[0] * shape[1], |idx| {
            let i = idx / shape[1];
            let j = idx % shape[1];
            f(g.cell_center([i, j]))
        });
        if g.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite sample".into()));
        }
        Ok(g)
    }

    pub fn zeros(dim: usize, lower: Point, upper: Point, h: f64) -> Result<Self> {
        GridFunction::sample(dim, lower, upper, h, |_| 0.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn lower(&self) -> Point {
        self.lower
    }
    pub fn upper(&self) -> Point {
        self.upper
    }
    pub fn spacing(&self) -> f64 {
        self.h
    }
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cell measure `h^d`.
    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn cell_center(&self, idx: [usize; 2]) -> Point {
        let mut p = [0.0; 2];
        for ax in 0..self.dim {
            p[ax] = self.lower[ax] + (idx[ax] as f64 + 0.5) * self.h;
        }
        p
    }

    pub fn flat(&self, idx: [usize; 2]) -> usize {
        idx[0] * self.shape[1] + idx[1]
    }

    /// Function value at a point: nearest-cell sample inside the box, 0 outside.
    pub fn value(&self, p: Point) -> f64 {
        let mut idx = [0usize; 2];
        for ax in 0..self.dim {
            let t = (p[ax] - self.lower[ax]) / self.h;
            if t < 0.0 || t >= self.shape[ax] as f64 {
                return 0.0;
            }
            idx[ax] = t as usize;
        }
        self.values[self.flat(idx)]
    }

    /// Index range of cells whose center coordinate along `ax` lies in
    /// `(lo, hi)`, clamped to the grid.
    fn center_range(&self, ax: usize, lo: f64, hi: f64) -> (usize, usize) {
        // center coordinate: lower + (i + 0.5) h
        let n = self.shape[ax];
        let a = ((lo - self.lower[ax]) / self.h - 0.5).ceil().max(0.0) as usize;
        let b = ((hi - self.lower[ax]) / self.h - 0.5).floor();
        if b < 0.0 {
            return (1, 0);
        }
        (a.min(n), (b as usize + 1).min(n))
    }

    /// `(1/|B| \int_B |f|^p)^{1/p}` by the cell-indicator rule.
    pub fn ball_mean_p(&self, ball: &Ball, p: f64) -> Result<f64> {
        if p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if ball.radius < 0.5 * self.h {
            return Err(Error::BallUnderResolved { radius: ball.radius, half_h: 0.5 * self.h });
        }
        let sum = self.ball_power_sum(ball, p);
        Ok((sum * self.cell_measure() / ball.volume(self.dim)).powf(1.0 / p))
    }

    /// `sum over cells with center in B of |f|^p` (no `h^d` factor), fixed index order.
    pub(crate) fn ball_power_sum(&self, ball: &Ball, p: f64) -> f64 {
        let (i0, i1) =
            self.center_range(0, ball.center[0] - ball.radius, ball.center[0] + ball.radius);
        let mut sum = 0.0;
        if self.dim == 1 {
            for i in i0..i1 {
                sum += pow_abs(self.values[i], p);
            }
        } else {
            let (j0, j1) =
                self.center_range(1, ball.center[1] - ball.radius, ball.center[1] + ball.radius);
            let r2 = ball.radius * ball.radius;
            for i in i0..i1 {
                let dx = self.lower[0] + (i as f64 + 0.5) * self.h - ball.center[0];
                let row = i * self.shape[1];
                for j in j0..j1 {
                    let dy = self.lower[1] + (j as f64 + 0.5) * self.h - ball.center[1];
                    if dx * dx + dy * dy < r2 {
                        sum += pow_abs(self.values[row + j], p);
                    }
                }
            }
        }
        sum
    }

    /// Counted measure of the cells the quadrature assigns to `B`.
    pub fn counted_measure(&self, ball: &Ball) -> f64 {
        let mut count = 0usize;
        let (i0, i1) =
            self.center_range(0, ball.center[0] - ball.radius, ball.center[0] + ball.radius);
        if self.dim == 1 {
            count = i1.saturating_sub(i0);
        } else {
            let (j0, j1) =
                self.center_range(1, ball.center[1] - ball.radius, ball.center[1] + ball.radius);
            let r2 = ball.radius * ball.radius;
            for i in i0..i1 {
                let dx = self.lower[0] + (i as f64 + 0.5) * self.h - ball.center[0];
                for j in j0..j1 {
                    let dy = self.lower[1] + (j as f64 + 0.5) * self.h - ball.center[1];
                    if dx * dx + dy * dy < r2 {
                        count += 1;
                    }
                }
            }
        }
        count as f64 * self.cell_measure()
    }

    /// `L^p` norm over the whole grid, `p = inf` via [`Self::linf_norm`].
    pub fn lp_norm(&self, p: f64) -> f64 {
        let mut sum = 0.0;
        for &v in &self.values {
            sum += pow_abs(v, p);
        }
        (sum * self.cell_measure()).powf(1.0 / p)
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Riemann sum of `f * g * h^d` over the intersection box, fixed index order.
    pub fn integrate_product(&self, other: &GridFunction) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if (self.h - other.h).abs() > 1e-9 * self.h {
            return Err(Error::GridMismatch(format!("h = {} vs {}", self.h, other.h)));
        }
        for ax in 0..self.dim {
            let off = (self.lower[ax] - other.lower[ax]) / self.h;
            if (off - off.round()).abs() > 1e-6 {
                return Err(Error::GridMismatch(format!("lattices offset by {off} cells (axis {ax})")));
            }
        }
        let mut ranges = [[0usize; 2]; 2];
        let mut offs = [0i64; 2];
        for ax in 0..self.dim {
            let off = ((other.lower[ax] - self.lower[ax]) / self.h).round() as i64;
            offs[ax] = off;
            let lo = off.max(0);
            let hi = (off + other.shape[ax] as i64).min(self.shape[ax] as i64);
            if hi <= lo {
                return Ok(0.0);
            }
            ranges[ax] = [lo as usize, hi as usize];
        }
        let mut sum = 0.0;
        if self.dim == 1 {
            for i in ranges[0][0]..ranges[0][1] {
                sum += self.values[i] * other.values[(i as i64 - offs[0]) as usize];
            }
        } else {
            for i in ranges[0][0]..ranges[0][1] {
                let oi = (i as i64 - offs[0]) as usize;
                for j in ranges[1][0]..ranges[1][1] {
                    let oj = (j as i64 - offs[1]) as usize;
                    sum += self.values[self.flat([i, j])] * other.values[oi * other.shape[1] + oj];
                }
            }
        }
        Ok(sum * self.cell_measure())
    }

    /// Pointwise map on the samples (same grid).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        let mut out = self.clone();
        for v in &mut out.values {
            *v = f(*v);
        }
        out
    }

    /// `self - other` on identical grids.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip(other, |a, b| a + b)
    }

    fn zip(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.dim != other.dim || self.shape != other.shape || self.lower != other.lower {
            return Err(Error::GridMismatch("zip requires identical grids".into()));
        }
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(&other.values) {
            *v = f(*v, *w);
        }
        Ok(out)
    }

    /// `ca * self + cb * other` on the union box, zero extension applied.
    /// Boxes must live on the same lattice.
    pub fn lincomb_zero_extended(
        &self,
        ca: f64,
        other: &GridFunction,
        cb: f64,
    ) -> Result<GridFunction> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        if (self.h - other.h).abs() > 1e-9 * self.h {
            return Err(Error::GridMismatch(format!("h = {} vs {}", self.h, other.h)));
        }
        let mut lo = [0.0; 2];
        let mut up = [0.0; 2];
        for ax in 0..self.dim {
            let off = (self.lower[ax] - other.lower[ax]) / self.h;
            if (off - off.round()).abs() > 1e-6 {
                return Err(Error::GridMismatch(format!(
                    "lattices offset by {off} cells (axis {ax})"
                )));
            }
            lo[ax] = self.lower[ax].min(other.lower[ax]);
            up[ax] = self.upper[ax].max(other.upper[ax]);
        }
        let mut out = GridFunction::zeros(self.dim, lo, up, self.h)?;
        for (g, coeff) in [(self, ca), (other, cb)] {
            let mut off = [0usize; 2];
            for ax in 0..g.dim {
                off[ax] = ((g.lower[ax] - lo[ax]) / g.h).round() as usize;
            }
            for i in 0..g.shape[0] {
                for j in 0..g.shape[1] {
                    let oi = [i + off[0], if g.dim == 2 { j + off[1] } else { j }];
                    let idx = out.flat(oi);
                    out.values[idx] += coeff * g.values[g.flat([i, j])];
                }
            }
        }
        Ok(out)
    }

    /// Multiply by the indicator of `B` (cells with center outside `B` zeroed).
    pub fn restrict_to_ball(&self, ball: &Ball) -> GridFunction {
        let mut out = self.clone();
        for i in 0..self.shape[0] {
            for j in 0..self.shape[1] {
                let idx = self.flat([i, j]);
                if !ball.contains(self.dim, self.cell_center([i, j])) {
                    out.values[idx] = 0.0;
                }
            }
        }
        out
    }

    /// Same samples on a box enlarged by `pad_cells` zero cells on every side.
    pub fn zero_padded(&self, pad_cells: usize) -> GridFunction {
        let mut lo = self.lower;
        let mut up = self.upper;
        let mut shape = [1usize; 2];
        for ax in 0..self.dim {
            lo[ax] -= pad_cells as f64 * self.h;
            up[ax] += pad_cells as f64 * self.h;
            shape[ax] = self.shape[ax] + 2 * pad_cells;
        }
        let mut values = vec![0.0; shape[0] * shape[1]];
        for i in 0..self.shape[0] {
            for j in 0..self.shape[1] {
                let (oi, oj) = if self.dim == 1 {
                    (i + pad_cells, j)
                } else {
                    (i + pad_cells, j + pad_cells)
                };
                values[oi * shape[1] + oj] = self.values[self.flat([i, j])];
            }
        }
        GridFunction { dim: self.dim, lower: lo, upper: up, h: self.h, shape, values }
    }

    /// Radius of the smallest origin-centered ball containing every nonzero cell center.
    pub fn support_radius(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.shape[0] {
            for j in 0..self.shape[1] {
                if self.values[self.flat([i, j])] != 0.0 {
                    r = r.max(dist(self.dim, self.cell_center([i, j]), [0.0, 0.0]));
                }
            }
        }
        r
    }

    /// Half-width of the bounding box (max over axes).
    pub fn box_halfwidth(&self) -> f64 {
        (0..self.dim).map(|ax| (self.upper[ax] - self.lower[ax]) / 2.0).fold(0.0, f64::max)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        writeln!(out, "d {}", self.dim).unwrap();
        write_point(&mut out, "lower", self.dim, self.lower);
        write_point(&mut out, "upper", self.dim, self.upper);
        writeln!(out, "h {}", self.h).unwrap();
        for v in &self.values {
            writeln!(out, "{v}").unwrap();
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<GridFunction> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let dim: usize = parse_header(lines.next(), "d")?
            .first()
            .copied()
            .ok_or_else(|| Error::Parse("missing dimension".into()))? as usize;
        let lo = parse_header(lines.next(), "lower")?;
        let up = parse_header(lines.next(), "upper")?;
        let h = parse_header(lines.next(), "h")?[0];
        let mut lower = [0.0; 2];
        let mut upper = [0.0; 2];
        for ax in 0..dim {
            lower[ax] = *lo.get(ax).ok_or_else(|| Error::Parse("short lower".into()))?;
            upper[ax] = *up.get(ax).ok_or_else(|| Error::Parse("short upper".into()))?;
        }
        let values: Vec<f64> = lines
            .map(|l| l.trim().parse::<f64>().map_err(|e| Error::Parse(format!("bad sample: {e}"))))
            .collect::<Result<_>>()?;
        GridFunction::from_values(dim, lower, upper, h, values)
    }
}

fn write_point(out: &mut String, key: &str, dim: usize, p: Point) {
    write!(out, "{key}").unwrap();
    for ax in 0..dim {
        write!(out, " {}", p[ax]).unwrap();
    }
    out.push('\n');
}

fn parse_header(line: Option<&str>, key: &str) -> Result<Vec<f64>> {
    let line = line.ok_or_else(|| Error::Parse(format!("missing header `{key}`")))?;
    let mut parts = line.split_whitespace();
    let k = parts.next().unwrap_or("");
    if k != key {
        return Err(Error::Parse(format!("expected header `{key}`, got `{k}`")));
    }
    parts
        .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("bad `{key}`: {e}"))))
        .collect()
}

#[inline]
fn pow_abs(v: f64, p: f64) -> f64 {
    if p == 1.0 {
        v.abs()
    } else if p == 2.0 {
        v * v
    } else {
        v.abs().powf(p)
    }
}

/// How ball centers are thinned per radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrideRule {
    /// Centers at every grid point for every radius.
    Dense,
    /// Center stride of `max(1, floor(factor * r / h))` lattice steps.
    Proportional(f64),
}

/// Finite multiscale stand-in for "all balls": grid-point centers paired with
/// a geometric radius ladder.
#[derive(Debug, Clone)]
pub struct BallFamily {
    dim: usize,
    lower: Point,
    h: f64,
    /// grid points per axis (cells + 1)
    points: [usize; 2],
    radii: Vec<f64>,
    rule: StrideRule,
}

impl BallFamily {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
    pub fn rule(&self) -> StrideRule {
        self.rule
    }
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn stride_for(&self, r: f64) -> usize {
        match self.rule {
            StrideRule::Dense => 1,
            StrideRule::Proportional(c) => ((c * r / self.h).floor() as usize).max(1),
        }
    }

    pub fn center_count(&self, stride: usize) -> usize {
        let mut n = 1;
        for ax in 0..self.dim {
            n *= (self.points[ax] + stride - 1) / stride;
        }
        n
    }

    pub fn center(&self, stride: usize, idx: usize) -> Point {
        let n1 = if self.dim == 2 { (self.points[1] + stride - 1) / stride } else { 1 };
        let i = idx / n1;
        let j = idx % n1;
        let mut p = [0.0; 2];
        p[0] = self.lower[0] + (i * stride) as f64 * self.h;
        if self.dim == 2 {
            p[1] = self.lower[1] + (j * stride) as f64 * self.h;
        }
        p
    }

    /// Total ball count (all radii, per-radius strides applied).
    pub fn len(&self) -> usize {
        self.radii.iter().map(|&r| self.center_count(self.stride_for(r))).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All balls, materialized. Intended for small families and tests.
    pub fn balls(&self) -> Vec<Ball> {
        let mut out = Vec::new();
        for &r in &self.radii {
            let stride = self.stride_for(r);
            for idx in 0..self.center_count(stride) {
                out.push(Ball::new(self.center(stride, idx), r));
            }
        }
        out
    }

    /// All grid-point centers at stride 1.
    pub fn dense_centers(&self) -> Vec<Point> {
        (0..self.center_count(1)).map(|i| self.center(1, i)).collect()
    }
}

/// Geometric radius ladder `r_min * rho^k` capped at `r_max`, centers on the
/// grid-point lattice of the box.
pub fn make_ball_family(
    dim: usize,
    lower: Point,
    upper: Point,
    h: f64,
    r_min: f64,
    r_max: f64,
    rho: f64,
    rule: StrideRule,
) -> Result<BallFamily> {
    if r_min < h * (1.0 - 1e-12) {
        return Err(Error::InvalidGrid(format!("r_min = {r_min} < h = {h}")));
    }
    if !(rho > 1.0 && rho <= 2.0) {
        return Err(Error::InvalidGrid(format!("ladder ratio {rho} not in (1, 2]")));
    }
    if r_max < r_min {
        return Err(Error::EmptyLadder { r_min, r_max });
    }
    let mut radii = Vec::new();
    let mut r = r_min;
    while r <= r_max * (1.0 + 1e-9) {
        radii.push(r);
        r *= rho;
    }
    if radii.is_empty() {
        return Err(Error::EmptyLadder { r_min, r_max });
    }
    let mut points = [1usize; 2];
    for ax in 0..dim {
        points[ax] = cells_along(lower[ax], upper[ax], h)? + 1;
    }
    Ok(BallFamily { dim, lower, h, points, radii, rule })
}
