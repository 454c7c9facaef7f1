//! Acceptance gate: twelve numbered criteria, one pass/fail line each.
//!
//! Every tolerance is pinned here, next to the assertion it guards. Run with
//! `cargo test --test acceptance -- --nocapture` to see the verdict lines.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use morrey::approx::mollifier_bound_suite;
use morrey::blocks::{
    build_covering, decompose, pairing_bound_suite, validate_block, Block,
};
use morrey::czo::{apply_czo, closure_preservation_suite, KernelSpec};
use morrey::functions;
use morrey::grid::{dist, Ball, GridFunction, Point};
use morrey::growth::{
    find_czc_epsilon, log_spaced, GrowthFunction, SampleSet, DEFAULT_CAP, DEFAULT_R_INF,
};
use morrey::morrey::{
    a_functional, closure_conditions, distance_bounds, morrey_norm, FamilySpec, Trend, Windows,
};

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n:2} [{name}]: {tag}  ({detail})");
    assert!(pass, "criterion {n} [{name}] failed: {detail}");
}

fn box1(b: f64) -> (Point, Point) {
    ([-b, 0.0], [b, 0.0])
}

fn phi14() -> GrowthFunction {
    GrowthFunction::power(-0.25)
}

/// Gaussian / indicator / singular-power battery on a 1-d box.
fn three_function_battery(b: f64, h: f64) -> Vec<GridFunction> {
    let (lo, hi) = box1(b);
    vec![
        functions::gaussian(1, lo, hi, h).unwrap(),
        functions::chi_ball(1, 1.0, lo, hi, h).unwrap(),
        functions::power_chi(1, -0.25, 1.0, lo, hi, h).unwrap(),
    ]
}

#[test]
fn criterion_01_degenerate_space_consistency() {
    let h = 2f64.powi(-8);
    let (lo, hi) = box1(8.0);
    let f = functions::gaussian(1, lo, hi, h).unwrap();
    let fam = FamilySpec::default().family_for(&f).unwrap();

    // phi = r^{-d/p}: the norm collapses to v_1^{-1/2} ||f||_2
    let got_lp = morrey_norm(&f, &GrowthFunction::power(-0.5), 2.0, &fam).unwrap().value;
    let want_lp = f.lp_norm(2.0) / 2f64.sqrt();
    let ok_lp = (got_lp - want_lp).abs() <= 0.02 * want_lp;

    // phi = 1: the norm collapses to max |f|
    let got_sup = morrey_norm(&f, &GrowthFunction::Constant { c: 1.0 }, 2.0, &fam).unwrap().value;
    let want_sup = f.linf_norm();
    let ok_sup = (got_sup - want_sup).abs() <= 0.02 * want_sup;

    verdict(
        1,
        "degenerate-space consistency",
        ok_lp && ok_sup,
        &format!("L2 tag {got_lp:.5} vs {want_lp:.5}; sup tag {got_sup:.5} vs {want_sup:.5}"),
    );
}

#[test]
fn criterion_02_mollifier_uniform_bound() {
    let h = 2f64.powi(-10);
    let phi = phi14();
    let spec = FamilySpec::default();
    let ts = log_spaced(4.0 * h, 2.0, 12);
    let samples = SampleSet::default_for(1, 8.0);
    let mut pass = true;
    let mut detail = String::new();
    for f in three_function_battery(8.0, h) {
        let rep = mollifier_bound_suite(&f, &phi, 2.0, &ts, &spec, &samples).unwrap();
        pass = pass && rep.pass && rep.ratios.len() == 12;
        detail.push_str(&format!("max {:.4} <= {:.4}; ", rep.max_ratio, rep.bound));
    }
    verdict(2, "mollifier uniform bound", pass, detail.trim_end_matches("; "));
}

#[test]
fn criterion_03_distance_sandwich_and_stability() {
    let h = 2f64.powi(-12);
    let phi = phi14();
    let spec = FamilySpec::default();
    let mut pass = true;
    let mut detail = String::new();
    for idx in 0..3usize {
        let mut ratios = Vec::new();
        for refine in [1.0, 2.0] {
            let f = &three_function_battery(4.0, h / refine)[idx];
            let fam = spec.family_for(f).unwrap();
            let nf = morrey_norm(f, &phi, 2.0, &fam).unwrap().value;
            let w = Windows::asymptotic(f);
            // distance_bounds itself enforces the sandwich (lower bound at
            // most the measured upper bound, up to its pinned 25% slack)
            let d = distance_bounds(f, &phi, 2.0, 0.25 * nf, &w, &spec).unwrap();
            ratios.push(d.upper / d.lower.max(0.01));
        }
        let stable = (ratios[1] / ratios[0] - 1.0).abs() <= 0.25;
        pass = pass && stable;
        detail.push_str(&format!("f{idx}: {:.3} -> {:.3}; ", ratios[0], ratios[1]));
    }
    verdict(3, "distance sandwich stability", pass, detail.trim_end_matches("; "));
}

#[test]
fn criterion_04_singular_example_positivity() {
    let h = 2f64.powi(-14);
    let (lo, hi) = box1(4.0);
    let phi = phi14();
    let f = functions::power_chi(1, -0.25, 1.0, lo, hi, h).unwrap();

    let a = a_functional(&f, &phi, 2.0, &Windows::asymptotic(&f)).unwrap().a;
    let ok_a = a >= 1.41 - 0.05;

    let spec = FamilySpec::default();
    let battery = functions::smooth_battery(1, 20, 11, 2.0, lo, hi, h).unwrap();
    let mut min_dist = f64::INFINITY;
    for g in &battery {
        let diff = f.sub(g).unwrap();
        let fam = spec.family_for(&diff).unwrap();
        min_dist = min_dist.min(morrey_norm(&diff, &phi, 2.0, &fam).unwrap().value);
    }
    let ok_b = min_dist >= 1.41 - 0.1;

    verdict(
        4,
        "singular-example positivity",
        ok_a && ok_b,
        &format!("A = {a:.4} >= 1.36; min ||f - g|| = {min_dist:.4} >= 1.31"),
    );
}

#[test]
fn criterion_05_smooth_functions_vanish() {
    let h = 2f64.powi(-17);
    let (lo, hi) = box1(8.0);
    let phi = phi14();
    let spec = FamilySpec::default();
    let mut pass = true;
    let mut detail = String::new();
    for f in functions::plateau_battery(1, lo, hi, h).unwrap() {
        let fam = spec.family_for(&f).unwrap();
        let rep = closure_conditions(&f, &phi, 2.0, &Windows::asymptotic(&f), &fam).unwrap();
        pass = pass && rep.all_vanish();
        let worst = rep
            .conditions
            .iter()
            .map(|c| c.term.extreme)
            .fold(0.0f64, f64::max);
        detail.push_str(&format!("{:.4}<={:.4}; ", worst, rep.threshold));
    }
    verdict(5, "smooth functions vanish", pass, detail.trim_end_matches("; "));
}

#[test]
fn criterion_06_counterexample_growth_functions() {
    let h = 2f64.powi(-8);
    let (lo, hi) = box1(4.0);

    // phi = 1: a bump that is identically 1 near 0 stalls the small-radius
    // diagnostic at its plateau height
    let f = functions::flat_top_bump(1, [0.0, 0.0], 2.0, 1.0, 1.0, lo, hi, h).unwrap();
    let one = GrowthFunction::Constant { c: 1.0 };
    let small = a_functional(&f, &one, 2.0, &Windows::box_scale(&f)).unwrap().small_r;
    let ok_small = small.trend == Trend::Stalled && small.estimate >= 0.9;

    // phi = r^{-d/p}: the large-radius diagnostic stalls at v_1^{-1/2}||f||_2
    let (lo8, hi8) = box1(8.0);
    let g = functions::gaussian(1, lo8, hi8, h).unwrap();
    let lp_tag = GrowthFunction::power(-0.5);
    let large = a_functional(&g, &lp_tag, 2.0, &Windows::asymptotic(&g)).unwrap().large_r;
    let want = g.lp_norm(2.0) / 2f64.sqrt();
    let ok_large =
        large.trend == Trend::Stalled && (large.estimate - want).abs() <= 0.05 * want;

    verdict(
        6,
        "counterexample growth functions",
        ok_small && ok_large,
        &format!(
            "sup tag stalls at {:.4} >= 0.9; L2 tag stalls at {:.4} vs {want:.4}",
            small.estimate, large.estimate
        ),
    );
}

#[test]
fn criterion_07_block_pairing_bound() {
    let h = 1.0 / 64.0;
    let (lo, hi) = box1(4.0);
    let phi = phi14();
    let q = 2.0;

    // blocks from decompositions of random smooth functions
    let mut blocks: Vec<Block> = Vec::new();
    for seed in 0..4u64 {
        let f = &functions::smooth_battery(1, 1, seed, 2.0, lo, hi, h).unwrap()[0];
        let dec = decompose(f, &phi, q, 0).unwrap();
        blocks.extend(dec.terms.into_iter().map(|(_, b)| b));
    }
    for block in &blocks {
        assert!(validate_block(&block.data, &block.ball, &phi, q).unwrap().pass);
    }
    let battery = functions::smooth_battery(1, 8, 17, 2.0, lo, hi, h).unwrap();
    let fam = FamilySpec::default().family_for(&battery[0]).unwrap();
    let rep = pairing_bound_suite(&blocks, &battery, &phi, &fam).unwrap();
    let pairs = rep.entries.len();
    let ok_pairs = pairs >= 200 && rep.max_ratio <= 1.0 + 1e-3;

    // equality case: b = chi_B / (|B| phi(B)) against g = chi_B
    let ball = Ball::new([0.0, 0.0], 1.0);
    let c = 1.0 / (ball.volume(1) * phi.eval_r(1.0));
    let g = functions::chi_ball(1, 1.0, lo, hi, h).unwrap();
    let data = g.map(|v| v * c);
    let norm_q = data.lp_norm(q);
    let eq_block = Block { data, ball, q, norm_q };
    let eq = pairing_bound_suite(&[eq_block], &[g], &phi, &fam).unwrap();
    let ok_eq = eq.max_ratio >= 0.95;

    verdict(
        7,
        "block pairing bound",
        ok_pairs && ok_eq,
        &format!(
            "{pairs} pairs, max ratio {:.6}; equality case {:.4} >= 0.95",
            rep.max_ratio, eq.max_ratio
        ),
    );
}

#[test]
fn criterion_08_covering_overlap_oracle() {
    // independent brute-force oracle: a prime-sized scan at a different
    // phase than the library's own probe lattice
    fn oracle(centers: &[Point], radius: f64, window: f64) -> usize {
        let scan = 7919usize;
        let mut max = 0usize;
        for k in 0..scan {
            let x = [-window + 2.0 * window * (k as f64 + 0.613) / scan as f64, 0.0];
            let c = centers.iter().filter(|&&c| dist(1, x, c) < radius).count();
            max = max.max(c);
        }
        max
    }
    let mut measured = Vec::new();
    let mut pass = true;
    for n in [-1i32, 0, 1] {
        let window = 3.0 * 3f64.powi(n);
        let cov = build_covering(1, n, window);
        let want = oracle(&cov.centers, cov.radius, window);
        pass = pass && cov.covers && cov.overlap == want;
        measured.push(cov.overlap);
    }
    pass = pass && measured.iter().all(|&m| m == measured[0]);
    verdict(
        8,
        "covering overlap oracle",
        pass,
        &format!("N1 = {measured:?} across n in {{-1, 0, 1}}"),
    );
}

#[test]
fn criterion_09_hilbert_closed_form() {
    let h = 2f64.powi(-8);
    let (lo, hi) = box1(4.0);
    let k = KernelSpec::hilbert();

    // closed form (1/pi) ln|(x+1)/(x-1)| for the unit-interval indicator
    let f = functions::chi_ball(1, 1.0, lo, hi, h).unwrap();
    let tf = apply_czo(&k, &f, 4.0 * h).unwrap();
    let mut worst = 0.0f64;
    for i in 0..tf.len() {
        let x = tf.cell_center([i, 0])[0];
        if (x.abs() - 1.0).abs() <= 0.1 {
            continue;
        }
        let oracle = ((x + 1.0) / (x - 1.0)).abs().ln() / std::f64::consts::PI;
        let rel = (tf.values()[i] - oracle).abs() / oracle.abs();
        worst = worst.max(rel);
    }
    let ok_form = worst <= 0.02;

    // L2 isometry on a random bump battery (wide box to keep the tail)
    let (lo16, hi16) = box1(16.0);
    let battery = functions::smooth_battery(1, 5, 3, 2.0, lo16, hi16, 1.0 / 64.0).unwrap();
    let mut worst_l2 = 0.0f64;
    for g in &battery {
        let tg = apply_czo(&k, g, 4.0 / 64.0).unwrap();
        let ratio = tg.lp_norm(2.0) / g.lp_norm(2.0);
        worst_l2 = worst_l2.max((ratio - 1.0).abs());
    }
    let ok_l2 = worst_l2 <= 0.03;

    verdict(
        9,
        "Hilbert closed form",
        ok_form && ok_l2,
        &format!("max rel err {worst:.4} <= 0.02; L2 ratio off by {worst_l2:.4} <= 0.03"),
    );
}

#[test]
fn criterion_10_cz_closure_preservation() {
    let h = 2f64.powi(-8);
    let (lo, hi) = box1(8.0);
    let phi = phi14();
    let xs = [[0.0, 0.0], [1.0, -1.0]];
    let rs = log_spaced(1e-3, 1e3, 13);
    let (eps, _) = find_czc_epsilon(&phi, &xs, &rs, DEFAULT_R_INF, DEFAULT_CAP).unwrap();
    let ok_eps = eps >= 0.125;

    let battery = functions::smooth_battery(1, 5, 7, 1.0, lo, hi, h).unwrap();
    let rep = closure_preservation_suite(
        &KernelSpec::hilbert(),
        &phi,
        2.0,
        &battery,
        4.0 * h,
        &FamilySpec::default(),
    )
    .unwrap();
    let min_slope = rep
        .cases
        .iter()
        .map(|c| c.decay_slope)
        .fold(f64::INFINITY, f64::min);
    verdict(
        10,
        "CZ closure preservation",
        ok_eps && rep.pass,
        &format!("eps = {eps:.4} >= 0.125; min decay slope {min_slope:.4} >= {:.4}", 0.5 * eps),
    );
}

#[test]
fn criterion_11_transpose_identity() {
    fn check(k: &KernelSpec, f: &GridFunction, g: &GridFunction, delta: f64) -> (f64, f64) {
        let lhs = apply_czo(k, f, delta).unwrap().integrate_product(g).unwrap();
        let rhs = f.integrate_product(&apply_czo(&k.transpose(), g, delta).unwrap()).unwrap();
        ((lhs - rhs).abs(), 1e-4 * f.lp_norm(2.0) * g.lp_norm(2.0))
    }

    // d = 1, Hilbert, disjoint bumps
    let h = 2f64.powi(-8);
    let (lo, hi) = box1(4.0);
    let f1 = functions::bump(1, [-2.0, 0.0], 0.75, 1.0, lo, hi, h).unwrap();
    let g1 = functions::bump(1, [2.0, 0.0], 0.75, 1.0, lo, hi, h).unwrap();
    let (d1, t1) = check(&KernelSpec::hilbert(), &f1, &g1, 4.0 * h);

    // d = 2, Riesz, disjoint bumps
    let h2 = 1.0 / 16.0;
    let f2 = functions::bump(2, [-1.0, -1.0], 0.5, 1.0, [-2.0, -2.0], [2.0, 2.0], h2).unwrap();
    let g2 = functions::bump(2, [1.0, 1.0], 0.5, 1.0, [-2.0, -2.0], [2.0, 2.0], h2).unwrap();
    let (d2, t2) = check(&KernelSpec::riesz(0), &f2, &g2, 4.0 * h2);

    verdict(
        11,
        "transpose identity",
        d1 <= t1 && d2 <= t2,
        &format!("Hilbert |lhs - rhs| = {d1:.2e} <= {t1:.2e}; Riesz {d2:.2e} <= {t2:.2e}"),
    );
}

#[test]
fn criterion_12_deterministic_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let fine = tmp.path().join("fine.toml");
    std::fs::write(&fine, "[grid]\nh = 0.000244140625\n").unwrap();
    let dec = tmp.path().join("dec.toml");
    std::fs::write(&dec, "[function]\nkind = \"bump\"\n[grid]\nh = 0.015625\n").unwrap();
    let czo = tmp.path().join("czo.toml");
    std::fs::write(
        &czo,
        "[function]\nkind = \"battery\"\ncount = 3\nspread = 1.0\n[grid]\nbox = 8.0\nh = 0.015625\n",
    )
    .unwrap();

    let suites: [(&str, Option<&Path>); 8] = [
        ("check-phi", None),
        ("norm", None),
        ("afunc", None),
        ("demo-zorko", None),
        ("distance", Some(&fine)),
        ("approx", Some(&fine)),
        ("decompose", Some(&dec)),
        ("czo", Some(&czo)),
    ];

    fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
        let mut out = BTreeMap::new();
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            out.insert(
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            );
        }
        out
    }

    let mut pass = true;
    let mut compared = 0usize;
    for (suite, cfg) in suites {
        let mut runs = Vec::new();
        for threads in ["1", "8"] {
            let out = tmp.path().join(format!("{suite}-t{threads}"));
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_morrey"));
            cmd.stdout(std::process::Stdio::null());
            cmd.arg(suite).arg("--out").arg(&out).arg("--threads").arg(threads);
            if let Some(c) = cfg {
                cmd.arg("--config").arg(c);
            }
            let status = cmd.status().unwrap();
            assert!(status.success(), "{suite} --threads {threads} exited {status}");
            runs.push(snapshot(&out));
        }
        assert!(!runs[0].is_empty(), "{suite} wrote no reports");
        pass = pass && runs[0] == runs[1];
        compared += runs[0].len();
    }
    verdict(
        12,
        "deterministic reports",
        pass,
        &format!("8 suites, {compared} report files byte-identical across thread counts"),
    );
}
