//! Blocks, the 3^n-scale bounded-overlap covering, block decompositions,
//! and the duality-pairing inequality.
//!
//! A block for the pair `(phi, q)` is a function supported in a ball `B`
//! with `||b||_q <= 1 / (|B|^{1/q'} phi(B))`. Use `q = f64::INFINITY` for
//! sup-norm blocks.

use crate::error::{Error, Result};
use crate::grid::{dist, Ball, BallFamily, GridFunction, Point};
use crate::growth::GrowthFunction;
use crate::morrey::morrey_norm;

/// Multiplicative slack allowed on the norm bound, absorbing quadrature
/// round-off in the equality case.
pub const NORM_SLACK: f64 = 1e-6;

/// Conjugate exponent `q' = q/(q-1)`; `q = inf` gives 1.
pub fn conjugate(q: f64) -> f64 {
    if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

fn lq_norm(f: &GridFunction, q: f64) -> f64 {
    if q.is_infinite() {
        f.linf_norm()
    } else {
        f.lp_norm(q)
    }
}

#[derive(Debug, Clone)]
pub struct Block {
    pub data: GridFunction,
    pub ball: Ball,
    pub q: f64,
    pub norm_q: f64,
}

#[derive(Debug, Clone)]
pub struct BlockVerdict {
    pub pass: bool,
    pub support_ok: bool,
    pub norm_ok: bool,
    /// `1 - ||b||_q |B|^{1/q'} phi(B)`; zero at the equality case
    pub slack: f64,
    pub norm_q: f64,
    pub bound: f64,
}

/// Checks the two block conditions: support inside the ball (cell centers)
/// and the `L^q` bound with analytic ball measure.
pub fn validate_block(
    b: &GridFunction,
    ball: &Ball,
    phi: &GrowthFunction,
    q: f64,
) -> Result<BlockVerdict> {
    if !(q > 1.0) {
        return Err(Error::InvalidExponent(q));
    }
    let dim = b.dim();
    let mut support_ok = true;
    for i in 0..b.shape()[0] {
        for j in 0..b.shape()[1] {
            if b.values()[b.flat([i, j])] != 0.0 && !ball.contains(dim, b.cell_center([i, j])) {
                support_ok = false;
            }
        }
    }
    let norm_q = lq_norm(b, q);
    let qp = conjugate(q);
    let bound = 1.0 / (ball.volume(dim).powf(1.0 / qp) * phi.eval(ball.center, ball.radius));
    let norm_ok = norm_q <= (1.0 + NORM_SLACK) * bound;
    Ok(BlockVerdict {
        pass: support_ok && norm_ok,
        support_ok,
        norm_ok,
        slack: 1.0 - norm_q / bound,
        norm_q,
        bound,
    })
}

/// Scale-`n` covering: dilated balls `S_i = B(3^{n-1} m, 3^n sqrt(d))` over
/// a lattice window, with the measured pointwise overlap bound.
#[derive(Debug, Clone)]
pub struct Covering {
    pub dim: usize,
    pub n: i32,
    pub centers: Vec<Point>,
    pub radius: f64,
    /// measured max pointwise overlap over the scan lattice
    pub overlap: usize,
    /// true when every scanned window point lies in at least one ball
    pub covers: bool,
}

impl Covering {
    pub fn balls(&self) -> impl Iterator<Item = Ball> + '_ {
        self.centers.iter().map(move |&c| Ball::new(c, self.radius))
    }
}

/// Builds the scale-`n` covering of `[-window, window]^dim` and measures its
/// overlap by a scan at off-lattice points (offsets avoid boundary ties).
pub fn build_covering(dim: usize, n: i32, window: f64) -> Covering {
    let spacing = 3f64.powi(n - 1);
    let radius = 3f64.powi(n) * (dim as f64).sqrt();
    let m_max = ((window + radius) / spacing).ceil() as i64;
    let mut centers: Vec<Point> = Vec::new();
    if dim == 1 {
        for m in -m_max..=m_max {
            centers.push([m as f64 * spacing, 0.0]);
        }
    } else {
        for mx in -m_max..=m_max {
            for my in -m_max..=m_max {
                centers.push([mx as f64 * spacing, my as f64 * spacing]);
            }
        }
    }
    let scan = 1000usize / dim;
    let probe = |k: usize| -> f64 { -window + 2.0 * window * (k as f64 + 0.37) / scan as f64 };
    let mut overlap = 0usize;
    let mut covers = true;
    let mut count_at = |p: Point| {
        let c = centers.iter().filter(|&&c| dist(dim, p, c) < radius).count();
        overlap = overlap.max(c);
        if c == 0 {
            covers = false;
        }
    };
    if dim == 1 {
        for k in 0..scan {
            count_at([probe(k), 0.0]);
        }
    } else {
        for kx in 0..scan {
            for ky in 0..scan {
                count_at([probe(kx), probe(ky)]);
            }
        }
    }
    Covering { dim, n, centers, radius, overlap, covers }
}

#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    pub terms: Vec<(f64, Block)>,
    pub n: i32,
    pub lambda_sum: f64,
}

impl BlockDecomposition {
    /// `sum_j lambda_j b_j` on the decomposed function's grid.
    pub fn reconstruct(&self, like: &GridFunction) -> GridFunction {
        let mut out = like.map(|_| 0.0);
        for (lam, block) in &self.terms {
            for (o, &v) in out.values_mut().iter_mut().zip(block.data.values()) {
                *o += lam * v;
            }
        }
        out
    }
}

/// Single-scale block decomposition over the scale-`n` covering: tent weights
/// `w_i(x) = max(0, radius - |x - c_i|)` normalized into a partition of unity
/// on the support, each piece rescaled to an exact-norm block.
pub fn decompose(
    f: &GridFunction,
    phi: &GrowthFunction,
    q: f64,
    n: i32,
) -> Result<BlockDecomposition> {
    if !(q > 1.0) {
        return Err(Error::InvalidExponent(q));
    }
    let dim = f.dim();
    let window = f.box_halfwidth();
    if f.support_radius() > window {
        return Err(Error::SupportEscapesWindow);
    }
    let covering = build_covering(dim, n, window);
    let radius = covering.radius;

    // keep balls that can see the box at all
    let active: Vec<Point> = covering
        .centers
        .iter()
        .copied()
        .filter(|&c| {
            (0..dim).all(|ax| c[ax].abs() <= window + radius)
                && dist(dim, c, [0.0, 0.0]) <= (dim as f64).sqrt() * window + radius
        })
        .collect();

    // total tent weight per cell
    let mut total = vec![0.0f64; f.len()];
    for &c in &active {
        for i in 0..f.shape()[0] {
            for j in 0..f.shape()[1] {
                let idx = f.flat([i, j]);
                total[idx] += (radius - dist(dim, f.cell_center([i, j]), c)).max(0.0);
            }
        }
    }
    for (idx, &t) in total.iter().enumerate() {
        if f.values()[idx] != 0.0 && t == 0.0 {
            return Err(Error::SupportEscapesWindow);
        }
    }

    let qp = conjugate(q);
    let mut terms: Vec<(f64, Block)> = Vec::new();
    for &c in &active {
        let mut piece = f.map(|_| 0.0);
        let mut nonzero = false;
        for i in 0..f.shape()[0] {
            for j in 0..f.shape()[1] {
                let idx = f.flat([i, j]);
                let w = (radius - dist(dim, f.cell_center([i, j]), c)).max(0.0);
                if w > 0.0 && f.values()[idx] != 0.0 {
                    // subnormal tails can underflow to an exact zero here
                    let v = f.values()[idx] * w / total[idx];
                    piece.values_mut()[idx] = v;
                    nonzero = nonzero || v != 0.0;
                }
            }
        }
        if !nonzero {
            continue;
        }
        let ball = Ball::new(c, radius);
        let nu = lq_norm(&piece, q) * ball.volume(dim).powf(1.0 / qp) * phi.eval(c, radius);
        if nu == 0.0 {
            // the whole piece is subnormal; its mass underflows in the norm
            continue;
        }
        let data = piece.map(|v| v / nu);
        let norm_q = lq_norm(&data, q);
        terms.push((nu, Block { data, ball, q, norm_q }));
    }
    let lambda_sum = terms.iter().map(|(l, _)| l).sum();
    Ok(BlockDecomposition { terms, n, lambda_sum })
}

#[derive(Debug, Clone)]
pub struct PairingEntry {
    pub block_idx: usize,
    pub g_idx: usize,
    pub pairing: f64,
    pub g_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct PairingReport {
    pub entries: Vec<PairingEntry>,
    pub max_ratio: f64,
    pub pass: bool,
}

/// Asserts `|int b g| <= (1 + tol) ||g||` for every block and battery member,
/// where `||g||` is the Morrey norm for the conjugate exponent. The norm is
/// floored by the ratio at the block's own supporting ball, which is what the
/// discrete Hoelder inequality actually compares against.
pub fn pairing_bound_suite(
    blocks: &[Block],
    battery: &[GridFunction],
    phi: &GrowthFunction,
    family: &BallFamily,
) -> Result<PairingReport> {
    let mut entries = Vec::new();
    let mut max_ratio = 0.0f64;
    for (gi, g) in battery.iter().enumerate() {
        for (bi, block) in blocks.iter().enumerate() {
            let qp = conjugate(block.q);
            let pairing = block.data.integrate_product(g)?.abs();
            let base = morrey_norm(g, phi, qp, family)?.value;
            let at_ball = g.ball_mean_p(&block.ball, qp)?
                / phi.eval(block.ball.center, block.ball.radius);
            let g_norm = base.max(at_ball);
            let ratio = if g_norm == 0.0 {
                if pairing == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                pairing / g_norm
            };
            max_ratio = max_ratio.max(ratio);
            entries.push(PairingEntry { block_idx: bi, g_idx: gi, pairing, g_norm, ratio });
        }
    }
    Ok(PairingReport { entries, max_ratio, pass: max_ratio <= 1.0 + 1e-5 })
}

#[derive(Debug, Clone)]
pub struct PartialSumReport {
    /// `int_B sum_j lambda_j |b_j|`
    pub integral: f64,
    /// measured constant `integral * phi(B) / sum lambda`
    pub constant: f64,
    pub pass: bool,
}

/// Local integrability of the partial sums: the mass of `sum lambda_j |b_j|`
/// on a test ball is at most `C sum(lambda) / phi(B)` with a finite measured
/// constant.
pub fn partial_sum_l1loc(
    decomp: &BlockDecomposition,
    b_test: &Ball,
    phi: &GrowthFunction,
    cap: f64,
) -> Result<PartialSumReport> {
    if decomp.terms.is_empty() {
        return Ok(PartialSumReport { integral: 0.0, constant: 0.0, pass: true });
    }
    let dim = decomp.terms[0].1.data.dim();
    let hd = decomp.terms[0].1.data.cell_measure();
    let mut integral = 0.0;
    for (lam, block) in &decomp.terms {
        let f = &block.data;
        let mut mass = 0.0;
        for i in 0..f.shape()[0] {
            for j in 0..f.shape()[1] {
                if b_test.contains(dim, f.cell_center([i, j])) {
                    mass += f.values()[f.flat([i, j])].abs();
                }
            }
        }
        integral += lam * mass * hd;
    }
    let constant = integral * phi.eval(b_test.center, b_test.radius) / decomp.lambda_sum;
    Ok(PartialSumReport { integral, constant, pass: constant.is_finite() && constant <= cap })
}
