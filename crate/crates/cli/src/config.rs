//! Experiment configuration: one TOML file, all defaults in one place.
//!
//! Defaults table (used when a field is omitted):
//!   space:    dim = 1, p = 2.0, q = 2.0
//!   growth:   kind = "power", lambda = -0.25, eps = 0.25
//!   function: kind = "gaussian", r0 = 1.0, lambda = -0.25, amplitude = 1.0,
//!             halfwidth = 1.0, plateau = 2.0, taper = 1.0, center = origin,
//!             count = 5, spread = 2.0
//!   grid:     box = 4.0, h = 2^-8
//!   family:   rho = 2.0, stride = 0.25, r_max_factor = 1.0
//!   windows:  mode = "asymptotic", threshold_frac = 0.05
//!   suite:    eps_rel = 0.25, delta_factor = 4.0, kernel = "hilbert",
//!             scale_n = 0, battery_count = 5

use std::path::Path;

use anyhow::{bail, Context};
use serde::Deserialize;

use morrey::functions;
use morrey::grid::{GridFunction, Point, StrideRule};
use morrey::growth::{GrowthFunction, LambdaFn};
use morrey::morrey::{FamilySpec, Windows};

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub space: Space,
    #[serde(default)]
    pub growth: Growth,
    #[serde(default)]
    pub function: Function,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub family: Family,
    #[serde(default)]
    pub windows: WindowsCfg,
    #[serde(default)]
    pub suite: Suite,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Space {
    #[serde(default = "d1")]
    pub dim: usize,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default = "two")]
    pub q: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Growth {
    #[serde(default = "power_kind")]
    pub kind: String,
    #[serde(default = "neg_quarter")]
    pub lambda: f64,
    /// variable exponent: lambda(x) = lambda + amp * sin(freq * x)
    #[serde(default)]
    pub amp: f64,
    #[serde(default = "one")]
    pub freq: f64,
    #[serde(default = "neg_quarter")]
    pub lambda_star: f64,
    #[serde(default = "one")]
    pub c: f64,
    /// shift for the derived transforms
    #[serde(default = "quarter")]
    pub eps: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Function {
    #[serde(default = "gaussian_kind")]
    pub kind: String,
    #[serde(default = "one")]
    pub r0: f64,
    #[serde(default = "neg_quarter")]
    pub lambda: f64,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "one")]
    pub halfwidth: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "two")]
    pub plateau: f64,
    #[serde(default = "one")]
    pub taper: f64,
    #[serde(default = "five")]
    pub count: usize,
    #[serde(default = "two")]
    pub spread: f64,
    #[serde(default)]
    pub path: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// box halfwidth; the domain is [-box, box]^dim
    #[serde(default = "four")]
    pub r#box: f64,
    #[serde(default = "h_default")]
    pub h: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Family {
    #[serde(default = "two")]
    pub rho: f64,
    #[serde(default = "quarter")]
    pub stride: f64,
    #[serde(default = "one")]
    pub r_max_factor: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowsCfg {
    #[serde(default = "asymptotic_kind")]
    pub mode: String,
    #[serde(default = "threshold_default")]
    pub threshold_frac: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    /// distance/approx target as a fraction of the measured norm
    #[serde(default = "quarter")]
    pub eps_rel: f64,
    /// pv exclusion radius as a multiple of h
    #[serde(default = "four")]
    pub delta_factor: f64,
    #[serde(default = "hilbert_kind")]
    pub kernel: String,
    /// covering scale for decompositions
    #[serde(default)]
    pub scale_n: i32,
    #[serde(default = "five")]
    pub battery_count: usize,
}

fn d1() -> usize {
    1
}
fn one() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn four() -> f64 {
    4.0
}
fn five() -> usize {
    5
}
fn quarter() -> f64 {
    0.25
}
fn neg_quarter() -> f64 {
    -0.25
}
fn h_default() -> f64 {
    2f64.powi(-8)
}
fn threshold_default() -> f64 {
    0.05
}
fn power_kind() -> String {
    "power".into()
}
fn gaussian_kind() -> String {
    "gaussian".into()
}
fn asymptotic_kind() -> String {
    "asymptotic".into()
}
fn hilbert_kind() -> String {
    "hilbert".into()
}

impl Default for Space {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}
impl Default for Growth {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}
impl Default for Function {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}
impl Default for Grid {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}
impl Default for Family {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}
impl Default for WindowsCfg {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}
impl Default for Suite {
    fn default() -> Self {
        toml::from_str("").unwrap()
    }
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: Config = toml::from_str(&text).context("cannot parse config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.space.dim != 1 && self.space.dim != 2 {
            bail!("space.dim must be 1 or 2");
        }
        if !(self.space.p >= 1.0 && self.space.p.is_finite()) {
            bail!("space.p must be in [1, inf)");
        }
        if !(self.space.q > 1.0) {
            bail!("space.q must be in (1, inf]");
        }
        if !(self.grid.h > 0.0 && self.grid.r#box > self.grid.h) {
            bail!("grid: need 0 < h < box");
        }
        if !(self.family.rho > 1.0 && self.family.rho <= 2.0) {
            bail!("family.rho must be in (1, 2]");
        }
        Ok(())
    }

    pub fn lower(&self) -> Point {
        let b = self.grid.r#box;
        if self.space.dim == 1 {
            [-b, 0.0]
        } else {
            [-b, -b]
        }
    }

    pub fn upper(&self) -> Point {
        let b = self.grid.r#box;
        if self.space.dim == 1 {
            [b, 0.0]
        } else {
            [b, b]
        }
    }

    pub fn h(&self, refine: u32) -> f64 {
        self.grid.h / refine as f64
    }

    pub fn growth_function(&self) -> anyhow::Result<GrowthFunction> {
        let g = &self.growth;
        let base = match g.kind.as_str() {
            "power" => GrowthFunction::power(g.lambda),
            "variable" => GrowthFunction::VariableExponent {
                lambda: LambdaFn::Sin { base: g.lambda, amp: g.amp, freq: g.freq },
                lambda_star: g.lambda_star,
            },
            "constant" => GrowthFunction::Constant { c: g.c },
            "lp" => GrowthFunction::Lp { dim: self.space.dim, p: self.space.p },
            "derived1" => GrowthFunction::Derived1 {
                base: Box::new(GrowthFunction::power(g.lambda)),
                eps: g.eps,
            },
            "derived2" => GrowthFunction::Derived2 {
                base: Box::new(GrowthFunction::power(g.lambda)),
                eps: g.eps,
            },
            other => bail!("unknown growth.kind `{other}`"),
        };
        Ok(base)
    }

    pub fn function(&self, refine: u32, seed: u64) -> anyhow::Result<GridFunction> {
        Ok(self.battery(refine, seed)?.remove(0))
    }

    /// The configured function; `kind = "battery"` yields `count` members,
    /// every other kind yields one.
    pub fn battery(&self, refine: u32, seed: u64) -> anyhow::Result<Vec<GridFunction>> {
        let f = &self.function;
        let (dim, lo, hi, h) = (self.space.dim, self.lower(), self.upper(), self.h(refine));
        let one = |g: morrey::Result<GridFunction>| -> anyhow::Result<Vec<GridFunction>> {
            Ok(vec![g?])
        };
        match f.kind.as_str() {
            "gaussian" => one(functions::gaussian(dim, lo, hi, h)),
            "chi" => one(functions::chi_ball(dim, f.r0, lo, hi, h)),
            "power-chi" => one(functions::power_chi(dim, f.lambda, f.r0, lo, hi, h)),
            "bump" => one(functions::bump(dim, f.center, f.halfwidth, f.amplitude, lo, hi, h)),
            "flat-top" => one(functions::flat_top_bump(
                dim, f.center, f.plateau, f.taper, f.amplitude, lo, hi, h,
            )),
            "battery" => {
                Ok(functions::smooth_battery(dim, f.count, seed, f.spread, lo, hi, h)?)
            }
            "file" => {
                if f.path.is_empty() {
                    bail!("function.kind = \"file\" requires function.path");
                }
                one(GridFunction::load(Path::new(&f.path)))
            }
            other => bail!("unknown function.kind `{other}`"),
        }
    }

    pub fn family_spec(&self) -> FamilySpec {
        FamilySpec {
            rho: self.family.rho,
            stride: StrideRule::Proportional(self.family.stride),
            r_max_factor: self.family.r_max_factor,
        }
    }

    pub fn windows_for(&self, f: &GridFunction) -> anyhow::Result<Windows> {
        let mut w = match self.windows.mode.as_str() {
            "box" => Windows::box_scale(f),
            "asymptotic" => Windows::asymptotic(f),
            other => bail!("unknown windows.mode `{other}`"),
        };
        w.threshold_frac = self.windows.threshold_frac;
        Ok(w)
    }

    pub fn kernel(&self) -> anyhow::Result<morrey::czo::KernelSpec> {
        match self.suite.kernel.as_str() {
            "hilbert" => Ok(morrey::czo::KernelSpec::hilbert()),
            "riesz0" => Ok(morrey::czo::KernelSpec::riesz(0)),
            "riesz1" => Ok(morrey::czo::KernelSpec::riesz(1)),
            other => bail!("unknown suite.kernel `{other}`"),
        }
    }
}
