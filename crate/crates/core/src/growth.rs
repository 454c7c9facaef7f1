//! Growth functions `phi(x, r)` and sampled checkers for the structural
//! conditions used throughout: doubling, nearness, almost monotonicity, the
//! decreasing class, log-Hoelder continuity of variable exponents, the tail
//! integral condition, and the two limit conditions.
//!
//! Every check is relative to a declared finite sample set and a constant
//! cap; nothing here is symbolic.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{dist, Point};

/// Default cap on measured condition constants.
pub const DEFAULT_CAP: f64 = 1e6;
/// Default tail truncation for the tail-integral condition.
pub const DEFAULT_R_INF: f64 = 1e8;

/// Variable exponent `lambda(x)` (evaluated on the first coordinate).
#[derive(Clone)]
pub enum LambdaFn {
    Const(f64),
    /// `base + amp * sin(freq * x)`
    Sin { base: f64, amp: f64, freq: f64 },
    /// `left` for x < at, `right` otherwise
    Step { left: f64, right: f64, at: f64 },
    /// linear interpolation on a sorted node table, clamped at the ends
    Table { xs: Vec<f64>, ys: Vec<f64> },
}

impl LambdaFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            LambdaFn::Const(c) => *c,
            LambdaFn::Sin { base, amp, freq } => base + amp * (freq * x).sin(),
            LambdaFn::Step { left, right, at } => {
                if x < *at {
                    *left
                } else {
                    *right
                }
            }
            LambdaFn::Table { xs, ys } => {
                if x <= xs[0] {
                    return ys[0];
                }
                if x >= *xs.last().unwrap() {
                    return *ys.last().unwrap();
                }
                let i = xs.partition_point(|&v| v <= x) - 1;
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                ys[i] + t * (ys[i + 1] - ys[i])
            }
        }
    }

    /// (min, max) over a coarse scan of `[-m, m]`.
    pub fn range(&self, m: f64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for k in 0..=400 {
            let v = self.eval(-m + 2.0 * m * k as f64 / 400.0);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

#[derive(Clone)]
pub enum GrowthFunction {
    /// `r^lambda`
    PowerLaw { lambda: f64 },
    /// `r^{lambda(x)}` for r < 1, `r^{lambda_star}` for r >= 1
    VariableExponent { lambda: LambdaFn, lambda_star: f64 },
    Constant { c: f64 },
    /// `r^{-d/p}`, the growth function whose space degenerates to `L^p`
    Lp { dim: usize, p: f64 },
    /// `phi(x,r) * r^eps`
    Derived1 { base: Box<GrowthFunction>, eps: f64 },
    /// `phi(x,r) * r^eps / (|x| + r)^eps`
    Derived2 { base: Box<GrowthFunction>, eps: f64 },
    Custom {
        name: String,
        f: Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>,
    },
}

impl std::fmt::Debug for GrowthFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GrowthFunction({})", self.describe())
    }
}

impl GrowthFunction {
    pub fn power(lambda: f64) -> Self {
        GrowthFunction::PowerLaw { lambda }
    }

    pub fn eval(&self, x: Point, r: f64) -> f64 {
        debug_assert!(r > 0.0);
        match self {
            GrowthFunction::PowerLaw { lambda } => r.powf(*lambda),
            GrowthFunction::VariableExponent { lambda, lambda_star } => {
                if r < 1.0 {
                    r.powf(lambda.eval(x[0]))
                } else {
                    r.powf(*lambda_star)
                }
            }
            GrowthFunction::Constant { c } => *c,
            GrowthFunction::Lp { dim, p } => r.powf(-(*dim as f64) / p),
            GrowthFunction::Derived1 { base, eps } => base.eval(x, r) * r.powf(*eps),
            GrowthFunction::Derived2 { base, eps } => {
                let ax = (x[0] * x[0] + x[1] * x[1]).sqrt();
                base.eval(x, r) * (r / (ax + r)).powf(*eps)
            }
        GrowthFunction::Custom { f, .. } => f(x, r),
        }
    }

    /// Shorthand for growth functions that ignore the center.
    pub fn eval_r(&self, r: f64) -> f64 {
        self.eval([0.0, 0.0], r)
    }

    pub fn describe(&self) -> String {
        match self {
            GrowthFunction::PowerLaw { lambda } => format!("r^{lambda}"),
            GrowthFunction::VariableExponent { lambda_star, .. } => {
                format!("r^lambda(x) [lambda* = {lambda_star}]")
            }
            GrowthFunction::Constant { c } => format!("const {c}"),
            GrowthFunction::Lp { dim, p } => format!("r^(-{dim}/{p})"),
            GrowthFunction::Derived1 { base, eps } => format!("({}) * r^{eps}", base.describe()),
            GrowthFunction::Derived2 { base, eps } => {
                format!("({}) * (r/(|x|+r))^{eps}", base.describe())
            }
            GrowthFunction::Custom { name, .. } => name.clone(),
        }
    }

    /// Exponent of `phi(x, r) ~ r^e` as `r -> infinity`, when known.
    pub fn tail_exponent(&self) -> Option<f64> {
        match self {
            GrowthFunction::PowerLaw { lambda } => Some(*lambda),
            GrowthFunction::VariableExponent { lambda_star, .. } => Some(*lambda_star),
            GrowthFunction::Constant { .. } => Some(0.0),
            GrowthFunction::Lp { dim, p } => Some(-(*dim as f64) / p),
            GrowthFunction::Derived1 { base, eps } => base.tail_exponent().map(|e| e + eps),
            GrowthFunction::Derived2 { base, .. } => base.tail_exponent(),
            GrowthFunction::Custom { .. } => None,
        }
    }
}

/// The two derived transforms: `phi * r^eps` and `phi * r^eps / (|x|+r)^eps`.
pub fn derive_phi12(phi: &GrowthFunction, eps: f64) -> (GrowthFunction, GrowthFunction) {
    (
        GrowthFunction::Derived1 { base: Box::new(phi.clone()), eps },
        GrowthFunction::Derived2 { base: Box::new(phi.clone()), eps },
    )
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Witness {
    pub x: Point,
    pub y: Point,
    pub r: f64,
    pub s: f64,
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub condition: String,
    pub pass: bool,
    /// best (smallest admissible) constant over the sample set, or the
    /// measured growth exponent for the limit conditions
    pub constant: f64,
    pub cap: f64,
    pub witness: Witness,
    pub sub: Vec<ConditionReport>,
}

impl ConditionReport {
    fn new(condition: &str, constant: f64, cap: f64, witness: Witness) -> Self {
        ConditionReport {
            condition: condition.to_string(),
            pass: constant.is_finite() && constant <= cap,
            constant,
            cap,
            witness,
            sub: Vec::new(),
        }
    }
}

/// Finite witness set: centers and radii to sample conditions on.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub xs: Vec<Point>,
    pub rs: Vec<f64>,
    pub cap: f64,
}

impl SampleSet {
    /// Coarse x-grid over `[-m, m]^dim`, log-uniform radii `[r_lo, r_hi]`.
    pub fn new(dim: usize, m: f64, nx: usize, r_lo: f64, r_hi: f64, nr: usize) -> Self {
        let mut xs = Vec::new();
        let axis: Vec<f64> = (0..nx).map(|i| -m + 2.0 * m * i as f64 / (nx - 1) as f64).collect();
        if dim == 1 {
            xs.extend(axis.iter().map(|&x| [x, 0.0]));
        } else {
            for &a in &axis {
                for &b in &axis {
                    xs.push([a, b]);
                }
            }
        }
        let rs = log_spaced(r_lo, r_hi, nr);
        SampleSet { xs, rs, cap: DEFAULT_CAP }
    }

    pub fn default_for(dim: usize, box_halfwidth: f64) -> Self {
        SampleSet::new(dim, box_halfwidth, 9, 1e-4, 1e4, 33)
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap = cap;
        self
    }
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn scan_max(
    condition: &str,
    cap: f64,
    items: impl Iterator<Item = (f64, Witness)>,
) -> Result<ConditionReport> {
    let mut best = f64::NEG_INFINITY;
    let mut wit = Witness::default();
    let mut seen = false;
    for (v, w) in items {
        seen = true;
        if v > best {
            best = v;
            wit = w;
        }
    }
    if !seen {
        return Err(Error::EmptySamples("condition scan"));
    }
    Ok(ConditionReport::new(condition, best, cap, wit))
}

/// Doubling: `phi(x,r) / phi(x,s)` bounded both ways for `1/2 <= r/s <= 2`.
pub fn check_doubling(phi: &GrowthFunction, samples: &SampleSet) -> Result<ConditionReport> {
    let sigmas = log_spaced(0.5, 2.0, 9);
    scan_max(
        "doubling",
        samples.cap,
        samples.xs.iter().flat_map(|&x| {
            let rs = &samples.rs;
            let phi = &phi;
            let sigmas = &sigmas;
            rs.iter().flat_map(move |&r| {
                sigmas.iter().map(move |&sig| {
                    let s = r * sig;
                    let a = phi.eval(x, r);
                    let b = phi.eval(x, s);
                    ((a / b).max(b / a), Witness { x, y: x, r, s })
                })
            })
        }),
    )
}

/// Nearness: `phi(x,r) / phi(y,r)` bounded both ways for `|x-y| <= r`.
pub fn check_nearness(
    phi: &GrowthFunction,
    dim: usize,
    samples: &SampleSet,
) -> Result<ConditionReport> {
    scan_max(
        "nearness",
        samples.cap,
        samples.xs.iter().flat_map(|&x| {
            samples.xs.iter().flat_map(move |&y| {
                let d = dist(dim, x, y);
                samples.rs.iter().filter(move |&&r| d <= r && d > 0.0).map(move |&r| {
                    let a = phi.eval(x, r);
                    let b = phi.eval(y, r);
                    ((a / b).max(b / a), Witness { x, y, r, s: r })
                })
            })
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// almost increasing: `phi(x,r) <= C phi(x,s)` for `r < s`
    AlmostIncreasing,
    /// almost decreasing: `phi(x,s) <= C phi(x,r)` for `r < s`
    AlmostDecreasing,
}

pub fn check_almost_monotone(
    phi: &GrowthFunction,
    direction: Direction,
    samples: &SampleSet,
) -> Result<ConditionReport> {
    let name = match direction {
        Direction::AlmostIncreasing => "almost-increasing",
        Direction::AlmostDecreasing => "almost-decreasing",
    };
    let mut rep = scan_max(
        name,
        samples.cap,
        samples.xs.iter().flat_map(|&x| {
            let rs = &samples.rs;
            rs.iter().enumerate().flat_map(move |(i, &r)| {
                rs[i + 1..].iter().map(move |&s| {
                    let a = phi.eval(x, r);
                    let b = phi.eval(x, s);
                    let c = match direction {
                        Direction::AlmostIncreasing => a / b,
                        Direction::AlmostDecreasing => b / a,
                    };
                    (c, Witness { x, y: x, r, s })
                })
            })
        }),
    )?;
    // the continuum supremum includes r -> s, where the ratio tends to 1;
    // never report a constant below that limit
    rep.constant = rep.constant.max(1.0);
    Ok(rep)
}

/// Decreasing class: `r^{d/p} phi(x,r)` almost increasing AND `phi` almost
/// decreasing.
pub fn check_gdec(
    phi: &GrowthFunction,
    dim: usize,
    p: f64,
    samples: &SampleSet,
) -> Result<ConditionReport> {
    let weighted = GrowthFunction::Derived1 { base: Box::new(phi.clone()), eps: dim as f64 / p };
    let ai = check_almost_monotone(&weighted, Direction::AlmostIncreasing, samples)?;
    let ad = check_almost_monotone(phi, Direction::AlmostDecreasing, samples)?;
    let mut rep = ConditionReport::new(
        "decreasing-class",
        ai.constant.max(ad.constant),
        samples.cap,
        if ai.constant >= ad.constant { ai.witness } else { ad.witness },
    );
    rep.pass = ai.pass && ad.pass;
    rep.sub = vec![ai, ad];
    Ok(rep)
}

/// log-Hoelder: `|lambda(x) - lambda(y)| <= C / log(e / |x-y|)` for
/// `|x-y| <= 1`; C is the sup of `|dlambda| * log(e/|x-y|)`.
pub fn check_log_holder(
    lambda: &LambdaFn,
    xs: &[f64],
    deltas: &[f64],
    cap: f64,
) -> Result<ConditionReport> {
    scan_max(
        "log-hoelder",
        cap,
        xs.iter().flat_map(|&x| {
            deltas.iter().filter(|&&d| d > 0.0 && d <= 1.0).map(move |&d| {
                let y = x + d;
                let c = (lambda.eval(x) - lambda.eval(y)).abs()
                    * (std::f64::consts::E / d).ln();
                (c, Witness { x: [x, 0.0], y: [y, 0.0], r: d, s: d })
            })
        }),
    )
}

/// Tail integral condition: `int_r^inf phi(x,t)/t dt <= C phi(x,r)`.
///
/// Quadrature is trapezoidal in `log t` up to `r_inf`; when the tail exponent
/// of the family is known and negative the remainder is added in closed form,
/// and a nonnegative tail exponent fails outright. For unknown tails the
/// check fails if the last decade's contribution is non-negligible.
pub fn check_czc(
    phi: &GrowthFunction,
    xs: &[Point],
    rs: &[f64],
    r_inf: f64,
    cap: f64,
) -> Result<ConditionReport> {
    if xs.is_empty() || rs.is_empty() {
        return Err(Error::EmptySamples("tail-integral"));
    }
    let tail = phi.tail_exponent();
    if let Some(e) = tail {
        if e >= 0.0 {
            let mut rep =
                ConditionReport::new("tail-integral", f64::INFINITY, cap, Witness::default());
            rep.pass = false;
            return Ok(rep);
        }
    }
    let nodes_per_decade = 64usize;
    let mut best = f64::NEG_INFINITY;
    let mut wit = Witness::default();
    let mut divergent = false;
    for &x in xs {
        for &r in rs {
            if r >= r_inf {
                continue;
            }
            let decades = (r_inf / r).log10();
            let n = ((decades * nodes_per_decade as f64).ceil() as usize).max(16);
            let (a, b) = (r.ln(), r_inf.ln());
            let du = (b - a) / n as f64;
            // trapezoid on g(u) = phi(x, e^u)
            let mut integral = 0.0;
            let mut last_decade = 0.0;
            let last_start = b - std::f64::consts::LN_10;
            let mut prev = phi.eval(x, r);
            for i in 1..=n {
                let u = a + du * i as f64;
                let cur = phi.eval(x, u.exp());
                let piece = 0.5 * (prev + cur) * du;
                integral += piece;
                if u > last_start {
                    last_decade += piece;
                }
                prev = cur;
            }
            match tail {
                Some(e) => integral += phi.eval(x, r_inf) / (-e),
                None => {
                    if last_decade > 1e-3 * integral {
                        divergent = true;
                    }
                }
            }
            let c = integral / phi.eval(x, r);
            if c > best {
                best = c;
                wit = Witness { x, y: x, r, s: r_inf };
            }
        }
    }
    let mut rep = ConditionReport::new("tail-integral", best, cap, wit);
    if divergent {
        rep.pass = false;
        rep.constant = f64::INFINITY;
    }
    Ok(rep)
}

/// Largest `eps` in (0, 1] such that `phi * r^eps` still passes the tail
/// integral condition; returns `(eps, C_eps)`.
pub fn find_czc_epsilon(
    phi: &GrowthFunction,
    xs: &[Point],
    rs: &[f64],
    r_inf: f64,
    cap: f64,
) -> Result<(f64, f64)> {
    let passes = |eps: f64| -> Result<Option<f64>> {
        let (phi1, _) = derive_phi12(phi, eps);
        let rep = check_czc(&phi1, xs, rs, r_inf, cap)?;
        Ok(if rep.pass { Some(rep.constant) } else { None })
    };
    if let Some(c) = passes(1.0)? {
        return Ok((1.0, c));
    }
    let mut lo = 1e-3f64;
    let mut lo_c = match passes(lo)? {
        Some(c) => c,
        None => return Err(Error::CzcViolated { constant: f64::INFINITY }),
    };
    let mut hi = 1.0f64;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        match passes(mid)? {
            Some(c) => {
                lo = mid;
                lo_c = c;
            }
            None => hi = mid,
        }
    }
    Ok((lo, lo_c))
}

/// Verdict for the two limit conditions: small radii must blow up uniformly
/// on bounded center sets, and `r^{d/p} phi(0, r)` must blow up at infinity.
/// `constant` carries the fitted growth exponent.
pub fn check_lim_conditions(
    phi: &GrowthFunction,
    dim: usize,
    p: f64,
    m_list: &[f64],
    small_ladder: &[f64],
    large_ladder: &[f64],
) -> Result<ConditionReport> {
    if m_list.is_empty() || small_ladder.len() < 2 || large_ladder.len() < 2 {
        return Err(Error::EmptySamples("limit conditions"));
    }
    // lim1: inf over |x| <= M of phi(x, r), r -> 0
    let mut lim1_exp = f64::INFINITY;
    for &m in m_list {
        let xs: Vec<Point> = (0..=32)
            .map(|i| [-m + 2.0 * m * i as f64 / 32.0, 0.0])
            .collect();
        let values: Vec<f64> = small_ladder
            .iter()
            .map(|&r| xs.iter().map(|&x| phi.eval(x, r)).fold(f64::INFINITY, f64::min))
            .collect();
        // exponent e in v ~ r^{-e}
        let e = -fit_loglog_slope(small_ladder, &values);
        lim1_exp = lim1_exp.min(e);
    }
    let lim1 = ConditionReport {
        condition: "lim-small-r".into(),
        pass: lim1_exp >= 0.05,
        constant: lim1_exp,
        cap: f64::INFINITY,
        witness: Witness::default(),
        sub: Vec::new(),
    };
    // lim2: r^{d/p} phi(0, r), r -> infinity
    let values: Vec<f64> = large_ladder
        .iter()
        .map(|&r| r.powf(dim as f64 / p) * phi.eval([0.0, 0.0], r))
        .collect();
    let lim2_exp = fit_loglog_slope(large_ladder, &values);
    let lim2 = ConditionReport {
        condition: "lim-large-r".into(),
        pass: lim2_exp >= 0.05,
        constant: lim2_exp,
        cap: f64::INFINITY,
        witness: Witness::default(),
        sub: Vec::new(),
    };
    let mut rep = ConditionReport {
        condition: "limit-conditions".into(),
        pass: lim1.pass && lim2.pass,
        constant: lim1_exp.min(lim2_exp),
        cap: f64::INFINITY,
        witness: Witness::default(),
        sub: vec![lim1, lim2],
    };
    rep.constant = rep.sub.iter().map(|s| s.constant).fold(f64::INFINITY, f64::min);
    Ok(rep)
}

/// Least-squares slope of `ln y` against `ln x`; zero values clamp to 1e-300.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(1e-300).ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..xs.len() {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}
