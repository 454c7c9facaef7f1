//! Morrey norms over ball families, the three-term asymptotic functional,
//! closure diagnostics, and two-sided distance estimates.
//!
//! Limits are unobservable on a grid. Each asymptotic term is therefore a
//! ladder of measured suprema plus a log-log trend: a term "vanishes
//! numerically" when the trend decreases toward the limit, and its estimate
//! is 0 in that case, the ladder maximum when stalled, and the extreme-rung
//! value when growing.

use crate::approx;
use crate::error::{Error, Result};
use crate::grid::{Ball, BallFamily, GridFunction, Point, StrideRule};
use crate::growth::{fit_loglog_slope, GrowthFunction};
use crate::parallel;

/// Parameters from which a concrete ball family is built per grid: radii run
/// from `h` to `r_max_factor` times the box diameter with ratio `rho`.
#[derive(Debug, Clone, Copy)]
pub struct FamilySpec {
    pub rho: f64,
    pub stride: StrideRule,
    pub r_max_factor: f64,
}

impl Default for FamilySpec {
    fn default() -> Self {
        FamilySpec { rho: 2.0, stride: StrideRule::Proportional(0.25), r_max_factor: 1.0 }
    }
}

impl FamilySpec {
    pub fn family_for(&self, f: &GridFunction) -> Result<BallFamily> {
        let h = f.spacing();
        let r_max = self.r_max_factor * 2.0 * f.box_halfwidth();
        crate::grid::make_ball_family(
            f.dim(),
            f.lower(),
            f.upper(),
            h,
            h,
            r_max.max(h),
            self.rho,
            self.stride,
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NormResult {
    pub value: f64,
    pub witness: Ball,
}

/// `sup over the family of M_p(f, B) / phi(B)` with the argmax ball.
pub fn morrey_norm(
    f: &GridFunction,
    phi: &GrowthFunction,
    p: f64,
    family: &BallFamily,
) -> Result<NormResult> {
    if p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if f.dim() != family.dim() {
        return Err(Error::DimensionMismatch(f.dim(), family.dim()));
    }
    let mut best = NormResult { value: 0.0, witness: Ball::new([0.0, 0.0], family.radii()[0]) };
    let h = f.spacing();
    for &r in family.radii() {
        if r < 0.5 * h {
            return Err(Error::BallUnderResolved { radius: r, half_h: 0.5 * h });
        }
        let (value, witness) = sup_at_radius(f, phi, p, r, family)?;
        if value > best.value {
            best = NormResult { value, witness };
        }
    }
    Ok(best)
}

fn sup_at_radius(
    f: &GridFunction,
    phi: &GrowthFunction,
    p: f64,
    r: f64,
    family: &BallFamily,
) -> Result<(f64, Ball)> {
    let stride = family.stride_for(r);
    let n = family.center_count(stride);
    let hd = f.cell_measure();
    let vol = Ball::new([0.0, 0.0], r).volume(f.dim());
    let hit = parallel::max_indexed(n, |idx| {
        let x = family.center(stride, idx);
        let ball = Ball { center: x, radius: r };
        let sum = f.ball_power_sum(&ball, p);
        if sum == 0.0 {
            return None;
        }
        let mean = (sum * hd / vol).powf(1.0 / p);
        Some((mean / phi.eval(x, r), ()))
    });
    match hit {
        Some((v, idx, ())) => Ok((v, Ball { center: family.center(stride, idx), radius: r })),
        None => Ok((0.0, Ball::new([0.0, 0.0], r))),
    }
}

/// Supremum of the ratio at one radius with lattice centers over `f`'s box.
pub fn sup_ratio_at_radius(
    f: &GridFunction,
    phi: &GrowthFunction,
    p: f64,
    r: f64,
    stride_factor: f64,
) -> Result<(f64, Ball)> {
    let fam = crate::grid::make_ball_family(
        f.dim(),
        f.lower(),
        f.upper(),
        f.spacing(),
        r.max(f.spacing()),
        r.max(f.spacing()),
        2.0,
        StrideRule::Proportional(stride_factor),
    )?;
    sup_at_radius(f, phi, p, r, &fam)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    DecreasingToZero,
    Stalled,
    Growing,
}

impl std::fmt::Display for Trend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Trend::DecreasingToZero => "decreasing-to-zero",
            Trend::Stalled => "stalled",
            Trend::Growing => "growing",
        };
        f.write_str(s)
    }
}

/// One asymptotic term: ladder values scanned toward the limit, the extreme
/// rung, the fitted slope, and the trend-adjusted estimate.
#[derive(Debug, Clone)]
pub struct TermReport {
    pub name: &'static str,
    /// rung parameters in scan order; the limit is approached at the end
    pub rungs: Vec<f64>,
    pub values: Vec<f64>,
    pub extreme: f64,
    pub slope: f64,
    pub trend: Trend,
    pub estimate: f64,
    pub witness: Ball,
}

fn classify(
    name: &'static str,
    rungs: Vec<f64>,
    values: Vec<f64>,
    limit_at_zero: bool,
    witness: Ball,
) -> TermReport {
    let extreme = *values.last().unwrap();
    let slope = fit_loglog_slope(&rungs, &values);
    let oriented = if limit_at_zero { slope } else { -slope };
    let trend = if extreme == 0.0 || oriented >= 0.1 {
        Trend::DecreasingToZero
    } else if oriented <= -0.1 {
        Trend::Growing
    } else {
        Trend::Stalled
    };
    let estimate = match trend {
        Trend::DecreasingToZero => 0.0,
        Trend::Stalled => values.iter().copied().fold(0.0, f64::max),
        Trend::Growing => extreme,
    };
    TermReport { name, rungs, values, extreme, slope, trend, estimate, witness }
}

/// Scale windows for the three asymptotic terms.
#[derive(Debug, Clone)]
pub struct Windows {
    /// small radii as multiples of h, scanned in the given order (limit last)
    pub small_factors: Vec<f64>,
    /// absolute large radii, ascending
    pub large_radii: Vec<f64>,
    /// absolute |x| shell cutoffs, ascending
    pub far_shells: Vec<f64>,
    /// radii searched per shell, as multiples of the shell cutoff
    pub far_radius_factors: Vec<f64>,
    /// vanishing threshold as a fraction of the Morrey norm
    pub threshold_frac: f64,
    /// center lattice thinning for the supremum scans
    pub stride_factor: f64,
}

impl Windows {
    /// Ladders tied to the experiment box.
    pub fn box_scale(f: &GridFunction) -> Self {
        let h = f.spacing();
        let b = f.box_halfwidth();
        Windows {
            small_factors: vec![8.0, 4.0, 2.0, 1.0],
            large_radii: vec![b, 2.0 * b, 4.0 * b],
            far_shells: vec![0.5 * b, 0.65 * b, 0.8 * b],
            far_radius_factors: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            threshold_frac: 0.05,
            stride_factor: 0.25,
        }
        .clamped(h)
    }

    /// Ladders pushed far beyond the box; needed to watch slowly decaying
    /// ratios (e.g. r^{-1/4}) actually approach zero. Balls larger than the
    /// box stay exact because the extension by zero is global.
    pub fn asymptotic(f: &GridFunction) -> Self {
        let mut w = Windows::box_scale(f);
        let base = (1 << 18) as f64;
        w.large_radii = vec![base, 2.0 * base, 4.0 * base];
        w.far_shells = vec![base / 4.0, base, 4.0 * base];
        w
    }

    fn clamped(mut self, h: f64) -> Self {
        for v in &mut self.small_factors {
            *v = v.max(1.0);
        }
        for v in &mut self.large_radii {
            *v = v.max(4.0 * h);
        }
        self
    }
}

#[derive(Debug, Clone)]
pub struct AFunctionalReport {
    pub small_r: TermReport,
    pub large_r: TermReport,
    pub far_x: TermReport,
    pub a: f64,
}

/// Three-window surrogate for the asymptotic functional: small radii, large
/// radii, far centers.
pub fn a_functional(
    f: &GridFunction,
    phi: &GrowthFunction,
    p: f64,
    windows: &Windows,
) -> Result<AFunctionalReport> {
    let h = f.spacing();
    if windows.small_factors.is_empty()
        || windows.large_radii.is_empty()
        || windows.far_shells.is_empty()
    {
        return Err(Error::BadWindow("empty ladder".into()));
    }
    if windows.small_factors.iter().any(|&m| m * h < 0.5 * h) {
        return Err(Error::BadWindow("small-radius rung below h/2".into()));
    }

    // (i) r -> 0
    let mut rungs = Vec::new();
    let mut values = Vec::new();
    let mut wit = Ball::new([0.0, 0.0], h);
    let mut wit_v = f64::NEG_INFINITY;
    for &m in &windows.small_factors {
        let r = m * h;
        let (v, b) = sup_ratio_at_radius(f, phi, p, r, windows.stride_factor)?;
        rungs.push(r);
        values.push(v);
        if v > wit_v {
            wit_v = v;
            wit = b;
        }
    }
    let small_r = classify("small-r", rungs, values, true, wit);

    // (ii) r -> infinity
    let mut rungs = Vec::new();
    let mut values = Vec::new();
    let mut wit = Ball::new([0.0, 0.0], windows.large_radii[0]);
    let mut wit_v = f64::NEG_INFINITY;
    for &r in &windows.large_radii {
        let (v, b) = sup_ratio_at_radius(f, phi, p, r, windows.stride_factor)?;
        rungs.push(r);
        values.push(v);
        if v > wit_v {
            wit_v = v;
            wit = b;
        }
    }
    let large_r = classify("large-r", rungs, values, false, wit);

    // (iii) |x| -> infinity: sup over r of the ratio restricted to the shell
    let mut rungs = Vec::new();
    let mut values = Vec::new();
    let mut wit = Ball::new([0.0, 0.0], h);
    let mut wit_v = f64::NEG_INFINITY;
    for &shell in &windows.far_shells {
        let (v, b) = far_shell_sup(f, phi, p, shell, &windows.far_radius_factors)?;
        rungs.push(shell);
        values.push(v);
        if v > wit_v {
            wit_v = v;
            wit = b;
        }
    }
    let far_x = classify("far-x", rungs, values, false, wit);

    let a = small_r.estimate.max(large_r.estimate).max(far_x.estimate);
    Ok(AFunctionalReport { small_r, large_r, far_x, a })
}

/// Sup over centers with `|x| >= shell` of the ratio, maximized over the
/// radius ladder `shell * factors`. Centers are sampled log-radially in
/// `[shell, 4 shell]` (they need not lie on the grid lattice).
pub fn far_shell_sup(
    f: &GridFunction,
    phi: &GrowthFunction,
    p: f64,
    shell: f64,
    radius_factors: &[f64],
) -> Result<(f64, Ball)> {
    let dim = f.dim();
    let h = f.spacing();
    let mags: Vec<f64> = (0..=8).map(|k| shell * 2f64.powf(k as f64 / 4.0)).collect();
    let mut centers: Vec<Point> = Vec::new();
    if dim == 1 {
        for &m in &mags {
            centers.push([m, 0.0]);
            centers.push([-m, 0.0]);
        }
    } else {
        for &m in &mags {
            for k in 0..8 {
                let th = std::f64::consts::PI * k as f64 / 4.0;
                centers.push([m * th.cos(), m * th.sin()]);
            }
        }
    }
    let hd = f.cell_measure();
    let mut best = 0.0;
    let mut wit = Ball::new(centers[0], shell);
    for &fac in radius_factors {
        let r = (fac * shell).max(h);
        let vol = Ball::new([0.0, 0.0], r).volume(dim);
        let hit = parallel::max_indexed(centers.len(), |idx| {
            let ball = Ball { center: centers[idx], radius: r };
            let sum = f.ball_power_sum(&ball, p);
            if sum == 0.0 {
                return None;
            }
            let mean = (sum * hd / vol).powf(1.0 / p);
            Some((mean / phi.eval(centers[idx], r), ()))
        });
        if let Some((v, idx, ())) = hit {
            if v > best {
                best = v;
                wit = Ball { center: centers[idx], radius: r };
            }
        }
    }
    Ok((best, wit))
}

/// Verdict for one closure condition.
#[derive(Debug, Clone)]
pub struct ClosureVerdict {
    pub term: TermReport,
    pub trend_ok: bool,
    pub below_threshold: bool,
}

#[derive(Debug, Clone)]
pub struct ClosureReport {
    pub norm: f64,
    pub threshold: f64,
    pub conditions: Vec<ClosureVerdict>,
    pub a: f64,
}

impl ClosureReport {
    pub fn all_vanish(&self) -> bool {
        self.conditions.iter().all(|c| c.trend_ok && c.below_threshold)
    }
}

/// The three membership conditions for the closure of smooth compactly
/// supported functions, each as (ladder, trend, threshold comparison).
pub fn closure_conditions(
    f: &GridFunction,
    phi: &GrowthFunction,
    p: f64,
    windows: &Windows,
    family: &BallFamily,
) -> Result<ClosureReport> {
    let norm = morrey_norm(f, phi, p, family)?.value;
    let threshold = windows.threshold_frac * norm;
    let afr = a_functional(f, phi, p, windows)?;
    let conditions = [afr.small_r.clone(), afr.large_r.clone(), afr.far_x.clone()]
        .into_iter()
        .map(|term| ClosureVerdict {
            trend_ok: term.trend == Trend::DecreasingToZero,
            below_threshold: term.extreme <= threshold,
            term,
        })
        .collect();
    Ok(ClosureReport { norm, threshold, conditions, a: afr.a })
}

#[derive(Debug, Clone)]
pub struct DistanceEstimate {
    pub lower: f64,
    pub upper: f64,
    pub tolerance: f64,
    pub certificate: approx::ApproximationCertificate,
    pub approximant: GridFunction,
}

/// Two-sided distance estimate: lower bound from the asymptotic functional,
/// upper bound as the measured distance to the constructed approximant.
/// Errors if the sandwich `lower <= upper * (1 + tolerance)` fails.
pub fn distance_bounds(
    f: &GridFunction,
    phi: &GrowthFunction,
    p: f64,
    eps: f64,
    windows: &Windows,
    spec: &FamilySpec,
) -> Result<DistanceEstimate> {
    // discretization slack for the sandwich assertion; both sides carry
    // extreme-rung quadrature artifacts of this order
    let tolerance = 0.25;
    let (g, cert) = approx::approximate(f, phi, p, eps, windows, spec)?;
    let lower = cert.a_value;
    let upper = cert.error_norm;
    if lower > upper * (1.0 + tolerance) {
        return Err(Error::SandwichViolated { lower, upper });
    }
    Ok(DistanceEstimate { lower, upper, tolerance, certificate: cert, approximant: g })
}
