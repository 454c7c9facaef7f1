//! Standard kernels with a smoothness modulus, singular-integral application
//! by principal-value quadrature, and the operator verification suites.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{dist, Ball, GridFunction, Point};
use crate::growth::{
    check_czc, find_czc_epsilon, log_spaced, GrowthFunction, DEFAULT_CAP, DEFAULT_R_INF,
};
use crate::morrey::{closure_conditions, morrey_norm, ClosureReport, FamilySpec, Windows};
use crate::parallel;

/// Smoothness modulus `omega(t)`, nonnegative and nondecreasing on [0, 1].
#[derive(Debug, Clone)]
pub enum Omega {
    /// `omega(t) = t`; Dini integral exactly 1
    Linear,
    /// monotone table, linearly interpolated
    Table { ts: Vec<f64>, vs: Vec<f64> },
}

impl Omega {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Omega::Linear => t,
            Omega::Table { ts, vs } => {
                if t <= ts[0] {
                    return vs[0] * t / ts[0];
                }
                if t >= *ts.last().unwrap() {
                    return *vs.last().unwrap();
                }
                let i = ts.partition_point(|&v| v <= t) - 1;
                let s = (t - ts[i]) / (ts[i + 1] - ts[i]);
                vs[i] + s * (vs[i + 1] - vs[i])
            }
        }
    }

    /// `int_0^1 omega(t)/t dt` by log-trapezoid quadrature.
    pub fn dini_integral(&self) -> f64 {
        match self {
            Omega::Linear => 1.0,
            Omega::Table { .. } => {
                let n = 4000;
                let (a, b) = ((1e-12f64).ln(), 0.0f64);
                let du = (b - a) / n as f64;
                let mut acc = 0.0;
                let mut prev = self.eval(a.exp());
                for i in 1..=n {
                    let cur = self.eval((a + du * i as f64).exp());
                    acc += 0.5 * (prev + cur) * du;
                    prev = cur;
                }
                acc
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelTag {
    Hilbert,
    /// component index 0 or 1
    Riesz(usize),
    Custom,
}

/// Off-diagonal kernel `K(x, y)` with its modulus and a transpose flag.
#[derive(Clone)]
pub struct KernelSpec {
    pub tag: KernelTag,
    pub dim: usize,
    pub omega: Omega,
    pub name: String,
    transposed: bool,
    eval: Arc<dyn Fn(Point, Point) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "KernelSpec({})", self.name)
    }
}

impl KernelSpec {
    /// `K(x, y) = 1 / (pi (x - y))` in d = 1.
    pub fn hilbert() -> Self {
        KernelSpec {
            tag: KernelTag::Hilbert,
            dim: 1,
            omega: Omega::Linear,
            name: "hilbert".into(),
            transposed: false,
            eval: Arc::new(|x, y| 1.0 / (std::f64::consts::PI * (x[0] - y[0]))),
        }
    }

    /// `K(x, y) = (1/(2 pi)) (x_j - y_j) / |x - y|^3` in d = 2.
    pub fn riesz(j: usize) -> Self {
        assert!(j < 2);
        KernelSpec {
            tag: KernelTag::Riesz(j),
            dim: 2,
            omega: Omega::Linear,
            name: format!("riesz{j}"),
            transposed: false,
            eval: Arc::new(move |x, y| {
                let d = dist(2, x, y);
                (x[j] - y[j]) / (2.0 * std::f64::consts::PI * d * d * d)
            }),
        }
    }

    pub fn custom(
        dim: usize,
        name: &str,
        omega: Omega,
        f: impl Fn(Point, Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        KernelSpec {
            tag: KernelTag::Custom,
            dim,
            omega,
            name: name.into(),
            transposed: false,
            eval: Arc::new(f),
        }
    }

    pub fn eval(&self, x: Point, y: Point) -> f64 {
        if self.transposed {
            (self.eval)(y, x)
        } else {
            (self.eval)(x, y)
        }
    }

    /// `K^t(x, y) = K(y, x)`.
    pub fn transpose(&self) -> Self {
        let mut k = self.clone();
        k.transposed = !k.transposed;
        k.name = if k.transposed { format!("{}^t", self.name) } else { self.name.clone() };
        k
    }
}

#[derive(Debug, Clone)]
pub struct SkReport {
    pub sk1: f64,
    pub sk2: f64,
    pub dini: f64,
    pub pass: bool,
}

fn sample_directions(dim: usize) -> Vec<Point> {
    if dim == 1 {
        vec![[1.0, 0.0], [-1.0, 0.0]]
    } else {
        (0..8)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / 4.0;
                [th.cos(), th.sin()]
            })
            .collect()
    }
}

/// Measures the size constant `max |K| |x-y|^d` and the smoothness constant
/// against `omega(|x-z| / |x-y|) / |x-y|^d` over a deterministic sample of
/// pairs and admissible triples (`|x-y| >= 2 |x-z|`).
pub fn check_standard_kernel(k: &KernelSpec, cap: f64) -> SkReport {
    let dim = k.dim;
    let dirs = sample_directions(dim);
    let xs: Vec<Point> = if dim == 1 {
        vec![[0.0, 0.0], [1.0, 0.0], [-2.5, 0.0]]
    } else {
        vec![[0.0, 0.0], [1.0, -0.5], [-2.5, 1.5]]
    };
    let rs = log_spaced(1e-3, 1e3, 19);
    let sigmas = [0.5, 0.25, 0.1, 0.01];
    let d = dim as f64;

    let mut sk1 = 0.0f64;
    let mut sk2 = 0.0f64;
    for &x in &xs {
        for &u in &dirs {
            for &r in &rs {
                let y = [x[0] + r * u[0], x[1] + r * u[1]];
                sk1 = sk1.max(k.eval(x, y).abs() * r.powf(d));
                for &sig in &sigmas {
                    for &v in &dirs {
                        let z = [x[0] + sig * r * v[0], x[1] + sig * r * v[1]];
                        let num = (k.eval(x, y) - k.eval(z, y)).abs()
                            + (k.eval(y, x) - k.eval(y, z)).abs();
                        let den = k.omega.eval(sig) / r.powf(d);
                        if den > 0.0 {
                            sk2 = sk2.max(num / den);
                        }
                    }
                }
            }
        }
    }
    let dini = k.omega.dini_integral();
    SkReport { sk1, sk2, dini, pass: sk1 <= cap && sk2 <= cap && dini.is_finite() }
}

/// `Tf(x)` by quadrature: direct sum over `|y - x| >= delta`, and on the
/// punctured ball `0 < |y - x| < delta` antisymmetric pairing of each node
/// `y` with its mirror `2x - y` (zero off the grid), which cancels the odd
/// singular part exactly.
pub fn apply_czo(k: &KernelSpec, f: &GridFunction, delta: f64) -> Result<GridFunction> {
    let h = f.spacing();
    if delta < 2.0 * h {
        return Err(Error::KernelUnderResolved { t: delta, min_t: 2.0 * h });
    }
    if k.dim != f.dim() {
        return Err(Error::DimensionMismatch(k.dim, f.dim()));
    }
    let shape = f.shape();
    let n1 = shape[1];
    let values = parallel::map_collect(f.len(), |flat| {
        let x = f.cell_center([flat / n1, flat % n1]);
        apply_at_inner(k, f, x, delta)
    });
    let mut out = f.map(|_| 0.0);
    out.values_mut().copy_from_slice(&values);
    Ok(out)
}

/// `Tf(x)` at one point (same quadrature as `apply_czo`).
pub fn apply_czo_at(k: &KernelSpec, f: &GridFunction, x: Point, delta: f64) -> Result<f64> {
    let h = f.spacing();
    if delta < 2.0 * h {
        return Err(Error::KernelUnderResolved { t: delta, min_t: 2.0 * h });
    }
    Ok(apply_at_inner(k, f, x, delta))
}

fn apply_at_inner(k: &KernelSpec, f: &GridFunction, x: Point, delta: f64) -> f64 {
    let dim = f.dim();
    let hd = f.cell_measure();
    let shape = f.shape();
    let mut acc = 0.0;
    for i in 0..shape[0] {
        for j in 0..shape[1] {
            let y = f.cell_center([i, j]);
            let r = dist(dim, x, y);
            if r == 0.0 {
                continue;
            }
            let v = f.values()[f.flat([i, j])];
            if r >= delta {
                acc += k.eval(x, y) * v;
            } else {
                // half of the paired difference; the mirror node contributes
                // the other half when visited (or zero if outside the box)
                let mirror = [2.0 * x[0] - y[0], 2.0 * x[1] - y[1]];
                acc += 0.5 * k.eval(x, y) * (v - f.value(mirror));
            }
        }
    }
    acc * hd
}

/// `Tf(x)` through the two-piece form: local part over the doubled ball by
/// the same pv quadrature, far part by direct quadrature outside it. Agrees
/// with `apply_czo_at` up to floating-point regrouping for any admissible
/// ball containing `x`.
pub fn apply_split_at(
    k: &KernelSpec,
    f: &GridFunction,
    x: Point,
    ball: &Ball,
    delta: f64,
) -> Result<f64> {
    let h = f.spacing();
    if delta < 2.0 * h {
        return Err(Error::KernelUnderResolved { t: delta, min_t: 2.0 * h });
    }
    let dim = f.dim();
    let double = ball.scaled(2.0);
    if dist(dim, x, ball.center) + delta >= double.radius {
        return Err(Error::BadWindow("exclusion ball escapes the doubled ball".into()));
    }
    let hd = f.cell_measure();
    let shape = f.shape();
    let mut local = 0.0;
    let mut far = 0.0;
    for i in 0..shape[0] {
        for j in 0..shape[1] {
            let y = f.cell_center([i, j]);
            let r = dist(dim, x, y);
            if r == 0.0 {
                continue;
            }
            let v = f.values()[f.flat([i, j])];
            if double.contains(dim, y) {
                if r >= delta {
                    local += k.eval(x, y) * v;
                } else {
                    let mirror = [2.0 * x[0] - y[0], 2.0 * x[1] - y[1]];
                    local += 0.5 * k.eval(x, y) * (v - f.value(mirror));
                }
            } else {
                far += k.eval(x, y) * v;
            }
        }
    }
    Ok((local + far) * hd)
}

#[derive(Debug, Clone)]
pub struct OperatorReport {
    pub kernel: String,
    pub sk: SkReport,
    /// per-input (input norm, output norm, ratio)
    pub ratios: Vec<(f64, f64, f64)>,
    pub max_ratio: f64,
    pub czc_constant: f64,
}

/// Norm-ratio table `||Tf|| / ||f||` over a battery, gated on the growth
/// function passing the tail-integral condition.
pub fn operator_bound_suite(
    k: &KernelSpec,
    phi: &GrowthFunction,
    p: f64,
    battery: &[GridFunction],
    delta: f64,
    spec: &FamilySpec,
) -> Result<OperatorReport> {
    let xs = [[0.0, 0.0], [1.0, -1.0]];
    let rs = log_spaced(1e-3, 1e3, 13);
    let czc = check_czc(phi, &xs, &rs, DEFAULT_R_INF, DEFAULT_CAP)?;
    if !czc.pass {
        return Err(Error::CzcViolated { constant: czc.constant });
    }
    let sk = check_standard_kernel(k, DEFAULT_CAP);
    let mut ratios = Vec::new();
    let mut max_ratio = 0.0f64;
    for f in battery {
        let fam = spec.family_for(f)?;
        let nf = morrey_norm(f, phi, p, &fam)?.value;
        if nf == 0.0 {
            continue;
        }
        let tf = apply_czo(k, f, delta)?;
        let ntf = morrey_norm(&tf, phi, p, &fam)?.value;
        let ratio = ntf / nf;
        max_ratio = max_ratio.max(ratio);
        ratios.push((nf, ntf, ratio));
    }
    Ok(OperatorReport { kernel: k.name.clone(), sk, ratios, max_ratio, czc_constant: czc.constant })
}

#[derive(Debug, Clone)]
pub struct ClosureCaseReport {
    pub closure: ClosureReport,
    /// log-log slope of the small-radius diagnostic of `Tf - g`,
    /// `g` a mollification of `Tf`
    pub decay_slope: f64,
    pub decay_ok: bool,
}

#[derive(Debug, Clone)]
pub struct ClosureSuiteReport {
    pub eps: f64,
    pub cases: Vec<ClosureCaseReport>,
    pub pass: bool,
}

/// For each smooth compactly supported input: all three vanishing diagnostics
/// of `Tf` must trend to zero, and the small-radius diagnostic of `Tf - g`
/// (`g` a mollification of `Tf`) must decay with log-log slope at least
/// `eps / 2`, `eps` from the largest passing tail-integral shift of `phi`.
pub fn closure_preservation_suite(
    k: &KernelSpec,
    phi: &GrowthFunction,
    p: f64,
    battery: &[GridFunction],
    delta: f64,
    spec: &FamilySpec,
) -> Result<ClosureSuiteReport> {
    let xs = [[0.0, 0.0], [1.0, -1.0]];
    let rs = log_spaced(1e-3, 1e3, 13);
    let (eps, _) = find_czc_epsilon(phi, &xs, &rs, DEFAULT_R_INF, DEFAULT_CAP)?;
    let kernel = crate::approx::MollifierKernel::standard(k.dim);
    let mut cases = Vec::new();
    let mut pass = true;
    for f in battery {
        let tf = apply_czo(k, f, delta)?;
        let fam = spec.family_for(&tf)?;
        let w = Windows::box_scale(&tf);
        let closure = closure_conditions(&tf, phi, p, &w, &fam)?;
        // Mollify at a box-relative scale: an `h`-proportional scale would make
        // `Tf - g` quantization-sized, leaving nothing for the ladder to measure.
        let halfwidth = 0.5 * (f.upper()[0] - f.lower()[0]);
        let t = (halfwidth / 16.0).max(8.0 * f.spacing());
        let g = crate::approx::mollify(&tf, t, &kernel)?;
        let diff = tf.lincomb_zero_extended(1.0, &g, -1.0)?;
        let afr = crate::morrey::a_functional(&diff, phi, p, &Windows::box_scale(&diff))?;
        let decay_slope = afr.small_r.slope;
        let decay_ok = decay_slope >= 0.5 * eps;
        pass = pass
            && decay_ok
            && closure
                .conditions
                .iter()
                .all(|c| c.term.trend == crate::morrey::Trend::DecreasingToZero);
        cases.push(ClosureCaseReport { closure, decay_slope, decay_ok });
    }
    Ok(ClosureSuiteReport { eps, cases, pass })
}

#[derive(Debug, Clone)]
pub struct TransposeEntry {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct TransposeReport {
    pub entries: Vec<TransposeEntry>,
    pub max_diff: f64,
    pub pass: bool,
}

/// `int (Tf) g = int f (T^t g)` for each pair. For disjointly supported
/// pairs both sides are the same double sum regrouped, so the tolerance is
/// tight; for overlapping supports it is scaled by the pv-exclusion error.
pub fn transpose_identity_suite(
    k: &KernelSpec,
    fs: &[GridFunction],
    gs: &[GridFunction],
    delta: f64,
    tol: f64,
) -> Result<TransposeReport> {
    let kt = k.transpose();
    let mut entries = Vec::new();
    let mut max_diff = 0.0f64;
    let mut pass = true;
    for f in fs {
        let tf = apply_czo(k, f, delta)?;
        for g in gs {
            let lhs = tf.integrate_product(g)?;
            let ttg = apply_czo(&kt, g, delta)?;
            let rhs = f.integrate_product(&ttg)?;
            let diff = (lhs - rhs).abs();
            let scale = 1.0 + lhs.abs().max(rhs.abs());
            let entry_pass = diff <= tol * scale;
            pass = pass && entry_pass;
            max_diff = max_diff.max(diff);
            entries.push(TransposeEntry { lhs, rhs, diff, tol: tol * scale, pass: entry_pass });
        }
    }
    Ok(TransposeReport { entries, max_diff, pass })
}
