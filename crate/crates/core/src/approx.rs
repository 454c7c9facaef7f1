//! Mollification and the constructive truncate-then-mollify approximation.
//!
//! The approximation algorithm mirrors the inequality chain it certifies:
//! pick dyadic thresholds so that small, large, and far balls are already
//! below `A + eps`, cut the function to a dyadic ball, and mollify at a scale
//! fine enough that the local error is below `C_eps * eps`.

use crate::error::{Error, Result};
use crate::grid::{Ball, GridFunction, StrideRule};
use crate::growth::{check_almost_monotone, Direction, GrowthFunction, SampleSet};
use crate::morrey::{a_functional, far_shell_sup, morrey_norm, sup_ratio_at_radius, FamilySpec, Windows};
use crate::parallel;

/// Radial polynomial bump on the unit ball, normalized so its integral is
/// the unit-ball measure. The profile exponent is 2 in d = 1 (peak 15/8) and
/// 1 in d = 2, keeping the peak at 2; a squared profile would need peak 3.
#[derive(Debug, Clone, Copy)]
pub struct MollifierKernel {
    dim: usize,
    exponent: i32,
    amp: f64,
}

impl MollifierKernel {
    pub fn standard(dim: usize) -> Self {
        match dim {
            1 => MollifierKernel { dim, exponent: 2, amp: 15.0 / 8.0 },
            2 => MollifierKernel { dim, exponent: 1, amp: 2.0 },
            _ => panic!("unsupported dimension {dim}"),
        }
    }

    /// Profile value at radius `u` (kernel scale 1).
    pub fn eval(&self, u: f64) -> f64 {
        if u >= 1.0 {
            0.0
        } else {
            self.amp * (1.0 - u * u).powi(self.exponent)
        }
    }

    pub fn peak(&self) -> f64 {
        self.amp
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Normalized local average: weights are the scaled kernel sampled on the
/// grid, renormalized so that constants are reproduced exactly.
pub fn mollify(f: &GridFunction, t: f64, kernel: &MollifierKernel) -> Result<GridFunction> {
    let h = f.spacing();
    if t < 2.0 * h {
        return Err(Error::KernelUnderResolved { t, min_t: 2.0 * h });
    }
    let k = (t / h).ceil() as i64;
    let dim = f.dim();
    let mut out = f.zero_padded(k as usize);

    if dim == 1 {
        let mut w = Vec::with_capacity((2 * k + 1) as usize);
        let mut total = 0.0;
        for j in -k..=k {
            let v = kernel.eval((j as f64 * h / t).abs());
            total += v;
            w.push(v);
        }
        let n = f.shape()[0] as i64;
        let vals = f.values();
        let new = parallel::map_collect(out.len(), |oi| {
            let base = oi as i64 - k; // index in f of the aligned cell
            let mut acc = 0.0;
            for (wi, &wv) in w.iter().enumerate() {
                let src = base - (wi as i64 - k);
                if wv > 0.0 && src >= 0 && src < n {
                    acc += wv * vals[src as usize];
                }
            }
            acc / total
        });
        out.values_mut().copy_from_slice(&new);
    } else {
        let side = (2 * k + 1) as usize;
        let mut w = vec![0.0; side * side];
        let mut total = 0.0;
        for jx in -k..=k {
            for jy in -k..=k {
                let u = ((jx * jx + jy * jy) as f64).sqrt() * h / t;
                let v = kernel.eval(u);
                total += v;
                w[(jx + k) as usize * side + (jy + k) as usize] = v;
            }
        }
        let shape = f.shape();
        let (n0, n1) = (shape[0] as i64, shape[1] as i64);
        let out_shape = out.shape();
        let vals = f.values();
        let new = parallel::map_collect(out.len(), |flat| {
            let oi = (flat / out_shape[1]) as i64 - k;
            let oj = (flat % out_shape[1]) as i64 - k;
            let mut acc = 0.0;
            for jx in -k..=k {
                let si = oi - jx;
                if si < 0 || si >= n0 {
                    continue;
                }
                for jy in -k..=k {
                    let sj = oj - jy;
                    if sj < 0 || sj >= n1 {
                        continue;
                    }
                    let wv = w[(jx + k) as usize * side + (jy + k) as usize];
                    if wv > 0.0 {
                        acc += wv * vals[(si * n1 + sj) as usize];
                    }
                }
            }
            acc / total
        });
        out.values_mut().copy_from_slice(&new);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MollifierBoundReport {
    pub ratios: Vec<(f64, f64)>,
    pub max_ratio: f64,
    pub c_ad: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Uniform-bound suite: max over the t-ladder of the Morrey-norm ratio of
/// the mollified function, against the explicit constant
/// `2 * 2^{d/p} * C_AD(phi)`.
pub fn mollifier_bound_suite(
    f: &GridFunction,
    phi: &GrowthFunction,
    p: f64,
    ts: &[f64],
    spec: &FamilySpec,
    samples: &SampleSet,
) -> Result<MollifierBoundReport> {
    let c_ad = check_almost_monotone(phi, Direction::AlmostDecreasing, samples)?.constant;
    let bound = 2.0 * 2f64.powf(f.dim() as f64 / p) * c_ad;
    let kernel = MollifierKernel::standard(f.dim());
    let nf = morrey_norm(f, phi, p, &spec.family_for(f)?)?.value;
    let mut ratios = Vec::with_capacity(ts.len());
    let mut max_ratio = 0.0f64;
    for &t in ts {
        let g = mollify(f, t, &kernel)?;
        let ng = morrey_norm(&g, phi, p, &spec.family_for(&g)?)?.value;
        let ratio = if nf == 0.0 { 0.0 } else { ng / nf };
        max_ratio = max_ratio.max(ratio);
        ratios.push((t, ratio));
    }
    Ok(MollifierBoundReport { ratios, max_ratio, c_ad, bound, pass: max_ratio <= bound })
}

#[derive(Debug, Clone)]
pub struct ApproximationCertificate {
    pub i_eps: i32,
    pub k_eps: i32,
    pub j_eps: i32,
    /// cutoff radius `2^{j_eps + 2}`
    pub s: f64,
    pub c_eps: f64,
    /// mollification scale, `2h <= t < 2^{i_eps - 1}`
    pub t: f64,
    /// measured asymptotic functional of the input
    pub a_value: f64,
    pub margin: f64,
    /// local p-mean error of the mollification step, below `c_eps * eps`
    pub lp_error: f64,
    /// measured Morrey distance from the input to the approximant
    pub error_norm: f64,
}

/// Dyadic ladder exponent cap for the threshold scans.
pub const LADDER_MAX_EXP: i32 = 20;

/// Truncate-then-mollify approximation with a quantitative certificate.
///
/// Steps: (1) measure the asymptotic functional; (2) find dyadic thresholds
/// `i < k < j` so that balls with radius below `2^{i-1}`, radius above
/// `2^{k}`, or center beyond `2^{j}` all have ratio at most `A + eps`;
/// (3) cut to `B(0, s)`, `s = 2^{j+2}`; (4) choose the mollification scale
/// `t < 2^{i-1}` by bisection (20 steps, first probe `2^{i-2}`) so the local
/// p-mean error is below `C_eps * eps`; (5) mollify.
pub fn approximate(
    f: &GridFunction,
    phi: &GrowthFunction,
    p: f64,
    eps: f64,
    windows: &Windows,
    spec: &FamilySpec,
) -> Result<(GridFunction, ApproximationCertificate)> {
    let h = f.spacing();
    let dim = f.dim();
    let afr = a_functional(f, phi, p, windows)?;
    let margin = afr.a + eps;

    let e_min = h.log2().ceil() as i32;
    let e_max = LADDER_MAX_EXP;
    let mut values = Vec::new();
    for e in e_min..=e_max {
        let r = 2f64.powi(e);
        let (v, _) = sup_ratio_at_radius(f, phi, p, r, windows.stride_factor)?;
        values.push(v);
    }
    let at = |e: i32| values[(e - e_min) as usize];

    // i: largest prefix of passing rungs, capped so that k fits above and the
    // mollification window stays affordable relative to the box
    let first_fail = (e_min..=e_max).find(|&e| at(e) > margin).unwrap_or(e_max + 1);
    let box_cap = f.box_halfwidth().log2().floor() as i32 - 1;
    let i_eps = first_fail.min(e_max - 2).min(box_cap);
    if i_eps < e_min + 3 {
        return Err(Error::InsufficientResolution {
            predicate: format!(
                "small-radius rungs exceed A + eps = {margin} down to the grid scale \
                 (first failure at 2^{first_fail})"
            ),
        });
    }

    // k: all rungs at and above 2^k pass
    let last_fail = (e_min..=e_max).rev().find(|&e| at(e) > margin);
    let k_eps = match last_fail {
        Some(e) if e == e_max => {
            return Err(Error::InsufficientResolution {
                predicate: format!("large-radius rung 2^{e_max} still exceeds A + eps = {margin}"),
            })
        }
        Some(e) => (e + 1).max(i_eps + 1),
        None => i_eps + 1,
    };

    // j: far centers with mid-range radii pass
    let mid_radii: Vec<f64> = (i_eps - 1..=k_eps - 1).map(|e| 2f64.powi(e)).collect();
    let mut j_eps = None;
    for j in (k_eps + 1)..=(e_max + 2) {
        let shell = 2f64.powi(j);
        let factors: Vec<f64> = mid_radii.iter().map(|r| r / shell).collect();
        let (v, _) = far_shell_sup(f, phi, p, shell, &factors)?;
        if v <= margin {
            j_eps = Some(j);
            break;
        }
    }
    let j_eps = j_eps.ok_or_else(|| Error::InsufficientResolution {
        predicate: format!("far-center rungs exceed A + eps = {margin} out to 2^{}", e_max + 2),
    })?;
    let s = 2f64.powi(j_eps + 2);

    // C_eps: smallest |B|^{1/p} phi(B) over mid-range balls inside B(0, s)
    let mut c_eps = f64::INFINITY;
    for &r in &mid_radii {
        let fam = crate::grid::make_ball_family(
            dim,
            f.lower(),
            f.upper(),
            h,
            r,
            r,
            2.0,
            StrideRule::Proportional(windows.stride_factor),
        )?;
        let stride = fam.stride_for(r);
        let vol = Ball::new([0.0, 0.0], r).volume(dim);
        for idx in 0..fam.center_count(stride) {
            let x = fam.center(stride, idx);
            let ax = crate::grid::dist(dim, x, [0.0, 0.0]);
            if ax + r <= s {
                c_eps = c_eps.min(vol.powf(1.0 / p) * phi.eval(x, r));
            }
        }
    }
    if !c_eps.is_finite() {
        return Err(Error::InsufficientResolution {
            predicate: "no admissible ball for the lower constant".into(),
        });
    }

    // truncate, then bisect the mollification scale
    let f1 = f.restrict_to_ball(&Ball::new([0.0, 0.0], s));
    let kernel = MollifierKernel::standard(dim);
    let target = c_eps * eps;
    let cut = Ball::new([0.0, 0.0], s);
    let lp_err = |t: f64| -> Result<f64> {
        let g = mollify(&f1, t, &kernel)?;
        Ok(f1
            .lincomb_zero_extended(1.0, &g, -1.0)?
            .restrict_to_ball(&cut)
            .lp_norm(p))
    };
    let t_cap = 2f64.powi(i_eps - 1) * (1.0 - 1e-9);
    let t_floor = 2.0 * h;
    let floor_err = lp_err(t_floor)?;
    if floor_err >= target {
        return Err(Error::InsufficientResolution {
            predicate: format!(
                "mollification error {floor_err} at the finest scale exceeds C_eps*eps = {target}"
            ),
        });
    }
    let mut lo = t_floor;
    let mut lo_err = floor_err;
    let mut hi = t_cap;
    for step in 0..20 {
        let mid = if step == 0 {
            (2f64.powi(i_eps - 2)).clamp(lo, hi)
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        let e = lp_err(mid)?;
        if e < target {
            lo = mid;
            lo_err = e;
        } else {
            hi = mid;
        }
    }
    // the cap itself may already be fine
    let (t, lp_error) = {
        let cap_err = lp_err(t_cap)?;
        if cap_err < target {
            (t_cap, cap_err)
        } else {
            (lo, lo_err)
        }
    };

    let g = mollify(&f1, t, &kernel)?;
    let diff = f.lincomb_zero_extended(1.0, &g, -1.0)?;
    let error_norm = morrey_norm(&diff, phi, p, &spec.family_for(&diff)?)?.value;

    let cert = ApproximationCertificate {
        i_eps,
        k_eps,
        j_eps,
        s,
        c_eps,
        t,
        a_value: afr.a,
        margin,
        lp_error,
        error_norm,
    };
    debug_assert!(cert.i_eps < cert.k_eps && cert.k_eps < cert.j_eps);
    debug_assert!(cert.t < 2f64.powi(cert.i_eps - 1));
    Ok((g, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions;
    use crate::grid::GridFunction;
    use crate::growth::log_spaced;

    #[test]
    fn kernel_profiles_normalized() {
        // d=1: integral of the profile over [-1,1] equals |B(0,1)| = 2
        let k1 = MollifierKernel::standard(1);
        let n = 200_000;
        let mut int = 0.0;
        for i in 0..n {
            let u = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
            int += k1.eval(u.abs()) * 2.0 / n as f64;
        }
        assert!((int - 2.0).abs() < 1e-6, "{int}");
        assert!(k1.peak() <= 2.0);

        // d=2: integral over the unit disk equals pi
        let k2 = MollifierKernel::standard(2);
        let m = 600;
        let mut int = 0.0;
        let dh = 2.0 / m as f64;
        for i in 0..m {
            for j in 0..m {
                let x = -1.0 + (i as f64 + 0.5) * dh;
                let y = -1.0 + (j as f64 + 0.5) * dh;
                int += k2.eval((x * x + y * y).sqrt()) * dh * dh;
            }
        }
        assert!((int - std::f64::consts::PI).abs() < 1e-3, "{int}");
        assert!(k2.peak() <= 2.0);
    }

    #[test]
    fn mollify_reproduces_constants_in_the_interior() {
        let h = 1.0 / 64.0;
        let f = GridFunction::sample(1, [-2.0, 0.0], [2.0, 0.0], h, |_| 1.0).unwrap();
        let g = mollify(&f, 0.25, &MollifierKernel::standard(1)).unwrap();
        assert!((g.value([0.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!((g.value([1.5, 0.0]) - 1.0).abs() < 1e-12);
        // support grows by at most t
        assert!(g.support_radius() <= 2.0 + 0.25 + h);
        assert!(matches!(
            mollify(&f, h, &MollifierKernel::standard(1)),
            Err(Error::KernelUnderResolved { .. })
        ));
    }

    #[test]
    fn mollify_contracts_lp() {
        let h = 1.0 / 128.0;
        let f = functions::power_chi(1, -0.25, 1.0, [-4.0, 0.0], [4.0, 0.0], h).unwrap();
        for p in [1.0, 2.0] {
            let n0 = f.lp_norm(p);
            for t in [4.0 * h, 0.1, 0.5] {
                let g = mollify(&f, t, &MollifierKernel::standard(1)).unwrap();
                assert!(g.lp_norm(p) <= n0 * (1.0 + 1e-3), "p = {p}, t = {t}");
            }
        }
    }

    #[test]
    fn mollify_2d_constant_and_mass() {
        let h = 1.0 / 32.0;
        let f = GridFunction::sample(2, [-1.0, -1.0], [1.0, 1.0], h, |_| 2.5).unwrap();
        let g = mollify(&f, 0.25, &MollifierKernel::standard(2)).unwrap();
        assert!((g.value([0.0, 0.0]) - 2.5).abs() < 1e-12);
        assert!(g.lp_norm(1.0) <= f.lp_norm(1.0) * (1.0 + 1e-9));
    }

    #[test]
    fn small_scale_mean_bound_against_doubled_ball() {
        // for t <= r: M_p(mollified, B(x,r)) <= 2^{d/p} M_p(f, B(x,2r)) (1 + tol)
        let h = 1.0 / 256.0;
        let f = functions::power_chi(1, -0.25, 1.0, [-4.0, 0.0], [4.0, 0.0], h).unwrap();
        let p = 2.0;
        let bound_c = 2f64.powf(1.0 / p);
        for (t, r, x) in [(0.05, 0.1, 0.0), (0.02, 0.25, 0.3), (0.1, 0.1, -0.5)] {
            let g = mollify(&f, t, &MollifierKernel::standard(1)).unwrap();
            let lhs = g.ball_mean_p(&Ball::new([x, 0.0], r), p).unwrap();
            let rhs = f.ball_mean_p(&Ball::new([x, 0.0], 2.0 * r), p).unwrap();
            assert!(lhs <= bound_c * rhs * 1.05, "t={t} r={r} x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn difference_mean_bound() {
        // M_p(f - mollified, B(x,r)) <= 2 * 2^{d/p} M_p(f, B(x,2r)) (1+tol) for t <= r
        let h = 1.0 / 256.0;
        let f = functions::chi_ball(1, 1.0, [-4.0, 0.0], [4.0, 0.0], h).unwrap();
        let p = 2.0;
        let c = 2.0 * 2f64.powf(1.0 / p);
        for (t, r, x) in [(0.05, 0.1, 1.0), (0.1, 0.2, 0.9), (0.02, 0.5, 0.0)] {
            let g = mollify(&f, t, &MollifierKernel::standard(1)).unwrap();
            let diff = f.lincomb_zero_extended(1.0, &g, -1.0).unwrap();
            let lhs = diff.ball_mean_p(&Ball::new([x, 0.0], r), p).unwrap();
            let rhs = f.ball_mean_p(&Ball::new([x, 0.0], 2.0 * r), p).unwrap();
            assert!(lhs <= c * rhs * 1.05, "t={t} r={r} x={x}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn bound_suite_on_gaussian() {
        let h = 1.0 / 128.0;
        let f = functions::gaussian(1, [-6.0, 0.0], [6.0, 0.0], h).unwrap();
        let phi = GrowthFunction::power(-0.25);
        let ts = log_spaced(4.0 * h, 2.0, 8);
        let rep = mollifier_bound_suite(
            &f,
            &phi,
            2.0,
            &ts,
            &FamilySpec::default(),
            &SampleSet::default_for(1, 6.0),
        )
        .unwrap();
        assert!(rep.pass, "max ratio {} vs bound {}", rep.max_ratio, rep.bound);
        assert!((rep.c_ad - 1.0).abs() < 1e-9);

        // zero input: all ratios zero, trivially passes
        let z = GridFunction::zeros(1, [-2.0, 0.0], [2.0, 0.0], h).unwrap();
        let rep = mollifier_bound_suite(
            &z,
            &phi,
            2.0,
            &[0.1, 0.5],
            &FamilySpec::default(),
            &SampleSet::default_for(1, 2.0),
        )
        .unwrap();
        assert_eq!(rep.max_ratio, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn approximate_smooth_function() {
        let h = 2f64.powi(-12);
        let f = functions::bump(1, [0.0, 0.0], 1.0, 1.0, [-8.0, 0.0], [8.0, 0.0], h).unwrap();
        let phi = GrowthFunction::power(-0.25);
        let w = Windows::asymptotic(&f);
        let spec = FamilySpec::default();
        let fam = spec.family_for(&f).unwrap();
        let nf = morrey_norm(&f, &phi, 2.0, &fam).unwrap().value;
        let (g, cert) = approximate(&f, &phi, 2.0, 0.25 * nf, &w, &spec).unwrap();
        assert!(cert.i_eps < cert.k_eps && cert.k_eps < cert.j_eps);
        assert!(cert.t < 2f64.powi(cert.i_eps - 1) && cert.t >= 2.0 * h);
        assert!(cert.lp_error < cert.c_eps * 0.25 * nf);
        assert!(g.support_radius() <= cert.s + cert.t + h);
        // a smooth function is close to its own mollification
        assert!(cert.error_norm <= 0.1 * nf, "{} vs {}", cert.error_norm, nf);
    }

    #[test]
    fn approximate_indicator() {
        let h = 2f64.powi(-12);
        let f = functions::chi_ball(1, 1.0, [-4.0, 0.0], [4.0, 0.0], h).unwrap();
        let phi = GrowthFunction::power(-0.25);
        let w = Windows::asymptotic(&f);
        let spec = FamilySpec::default();
        let fam = spec.family_for(&f).unwrap();
        let nf = morrey_norm(&f, &phi, 2.0, &fam).unwrap().value;
        let eps = 0.25 * nf;
        let (g, cert) = approximate(&f, &phi, 2.0, eps, &w, &spec).unwrap();
        assert!(cert.t < 2f64.powi(cert.i_eps - 1));
        assert!(g.support_radius() <= cert.s + cert.t + h);
        assert!(cert.lp_error < cert.c_eps * eps);
        // A = 0 for a bounded jump: the measured distance stays a modest
        // fraction of the norm, concentrated in the smoothed jump layer
        assert!(cert.a_value == 0.0, "A = {}", cert.a_value);
        assert!(cert.error_norm <= 0.25 * nf, "{} vs {}", cert.error_norm, nf);
    }

    #[test]
    fn approximate_singular_profile_error_matches_a() {
        let h = 2f64.powi(-12);
        let f = functions::power_chi(1, -0.25, 1.0, [-4.0, 0.0], [4.0, 0.0], h).unwrap();
        let phi = GrowthFunction::power(-0.25);
        let w = Windows::asymptotic(&f);
        let spec = FamilySpec::default();
        let (_g, cert) = approximate(&f, &phi, 2.0, 0.25 * 1.414, &w, &spec).unwrap();
        let a = cert.a_value;
        assert!(a >= 1.36, "A = {a}");
        // the measured distance sandwiches A: the extreme rung r = h sees a
        // partially cancelled singularity, so allow the same slack the
        // distance estimate uses
        assert!(cert.error_norm >= a / 1.25, "{} vs {}", cert.error_norm, a);
        assert!(cert.error_norm <= 3.0 * cert.margin, "{}", cert.error_norm);
    }
}
