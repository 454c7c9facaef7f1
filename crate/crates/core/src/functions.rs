//! Deterministic test-function constructors and batteries.
//!
//! Power-law singularities are sampled at offset `h/4` from the singular
//! point on the cells touching it: for exponents `-1/2` (first power) and
//! `-1/4` (squared) this reproduces the analytic cell average exactly, so the
//! ball quadrature sees the correct local mass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{dist, GridFunction, Point};

/// `e^{-|x|^2}` sampled on the box.
pub fn gaussian(dim: usize, lower: Point, upper: Point, h: f64) -> Result<GridFunction> {
    GridFunction::sample(dim, lower, upper, h, move |p| {
        (-(0..dim).map(|ax| p[ax] * p[ax]).sum::<f64>()).exp()
    })
}

/// Indicator of the origin-centered ball of radius `r0`.
pub fn chi_ball(dim: usize, r0: f64, lower: Point, upper: Point, h: f64) -> Result<GridFunction> {
    GridFunction::sample(dim, lower, upper, h, move |p| {
        if dist(dim, p, [0.0, 0.0]) < r0 {
            1.0
        } else {
            0.0
        }
    })
}

/// `|y|^lambda` on `B(0, r0)`, zero outside; cells touching the origin use the
/// value at distance `h/4`.
pub fn power_chi(
    dim: usize,
    lambda: f64,
    r0: f64,
    lower: Point,
    upper: Point,
    h: f64,
) -> Result<GridFunction> {
    shifted_power_chi(dim, lambda, r0, [0.0, 0.0], lower, upper, h)
}

/// `|y - x0|^lambda` on `B(x0, r0)`, zero outside.
pub fn shifted_power_chi(
    dim: usize,
    lambda: f64,
    r0: f64,
    x0: Point,
    lower: Point,
    upper: Point,
    h: f64,
) -> Result<GridFunction> {
    GridFunction::sample(dim, lower, upper, h, move |p| {
        let d = dist(dim, p, x0);
        if d >= r0 {
            return 0.0;
        }
        let d = if d < h { 0.25 * h } else { d };
        d.powf(lambda)
    })
}

/// Classic C-infinity bump `a * exp(1 - 1/(1 - u^2))`, `u = |x-c|/w`.
pub fn bump(
    dim: usize,
    center: Point,
    halfwidth: f64,
    amplitude: f64,
    lower: Point,
    upper: Point,
    h: f64,
) -> Result<GridFunction> {
    GridFunction::sample(dim, lower, upper, h, move |p| {
        amplitude * bump_profile(dist(dim, p, center) / halfwidth)
    })
}

/// Bump with an exactly flat plateau: `a` for `|x-c| <= plateau`, a smooth
/// taper of width `taper`, zero beyond.
pub fn flat_top_bump(
    dim: usize,
    center: Point,
    plateau: f64,
    taper: f64,
    amplitude: f64,
    lower: Point,
    upper: Point,
    h: f64,
) -> Result<GridFunction> {
    GridFunction::sample(dim, lower, upper, h, move |p| {
        let u = (dist(dim, p, center) - plateau) / taper;
        amplitude * smooth_step(1.0 - u)
    })
}

fn bump_profile(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// C-infinity step: 0 for s <= 0, 1 for s >= 1.
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / s).exp();
        let b = (-1.0 / (1.0 - s)).exp();
        a / (a + b)
    }
}

/// Five fixed plateau bumps (no randomness): the "smooth compactly supported"
/// battery used by the vanishing-diagnostics suites.
pub fn plateau_battery(dim: usize, lower: Point, upper: Point, h: f64) -> Result<Vec<GridFunction>> {
    let params: [(f64, f64); 5] =
        [(0.0, 1.0), (0.5, 0.8), (-0.5, 1.2), (1.0, 0.9), (-1.0, 1.1)];
    params
        .iter()
        .map(|&(c, a)| {
            let center = if dim == 1 { [c, 0.0] } else { [c, -c] };
            flat_top_bump(dim, center, 2.0, 1.0, a, lower, upper, h)
        })
        .collect()
}

/// Seeded battery of smooth compactly supported functions: each member is a
/// sum of 1-3 bumps with centers in `[-spread, spread]`, widths in
/// `[0.3, 1.5]`, and max amplitude at most 1.
pub fn smooth_battery(
    dim: usize,
    count: usize,
    seed: u64,
    spread: f64,
    lower: Point,
    upper: Point,
    h: f64,
) -> Result<Vec<GridFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let n_bumps = rng.gen_range(1..=3usize);
        let mut parts: Vec<([f64; 2], f64, f64)> = Vec::new();
        let mut amp_total = 0.0;
        for _ in 0..n_bumps {
            let mut c = [0.0; 2];
            for it in c.iter_mut().take(dim) {
                *it = rng.gen_range(-spread..spread);
            }
            let w = rng.gen_range(0.3..1.5);
            let a = rng.gen_range(0.1..1.0);
            amp_total += a;
            parts.push((c, w, a));
        }
        // bumps may overlap; rescale so the pointwise max stays at most 1
        let scale = if amp_total > 1.0 { 1.0 / amp_total } else { 1.0 };
        let f = GridFunction::sample(dim, lower, upper, h, move |p| {
            parts
                .iter()
                .map(|&(c, w, a)| scale * a * bump_profile(dist(dim, p, c) / w))
                .sum()
        })?;
        out.push(f);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_top_has_exact_plateau_and_compact_support() {
        let f = flat_top_bump(1, [0.0, 0.0], 2.0, 1.0, 1.5, [-8.0, 0.0], [8.0, 0.0], 0.125)
            .unwrap();
        assert_eq!(f.value([0.0, 0.0]), 1.5);
        assert_eq!(f.value([1.9, 0.0]), 1.5);
        assert_eq!(f.value([3.5, 0.0]), 0.0);
        let v = f.value([2.5, 0.0]);
        assert!(v > 0.0 && v < 1.5);
        assert!(f.support_radius() <= 3.0);
    }

    #[test]
    fn battery_is_seed_deterministic_and_bounded() {
        let a = smooth_battery(1, 6, 42, 2.0, [-4.0, 0.0], [4.0, 0.0], 0.0625).unwrap();
        let b = smooth_battery(1, 6, 42, 2.0, [-4.0, 0.0], [4.0, 0.0], 0.0625).unwrap();
        for (f, g) in a.iter().zip(&b) {
            assert_eq!(f.values(), g.values());
        }
        for f in &a {
            assert!(f.linf_norm() <= 1.0 + 1e-12);
            assert!(f.support_radius() <= 3.6);
        }
        let c = smooth_battery(1, 6, 43, 2.0, [-4.0, 0.0], [4.0, 0.0], 0.0625).unwrap();
        assert_ne!(a[0].values(), c[0].values());
    }

    #[test]
    fn singular_sample_rule_matches_cell_average() {
        // |y|^{-1/2}: analytic average over [0, h] is 2 h^{-1/2} = (h/4)^{-1/2}
        let h = 0.03125;
        let f = power_chi(1, -0.5, 1.0, [-2.0, 0.0], [2.0, 0.0], h).unwrap();
        let v = f.value([h * 0.5, 0.0]);
        assert!((v - 2.0 / h.sqrt()).abs() < 1e-12, "{v}");
    }
}
