//! Numerical integration: Gauss–Legendre rules and adaptive Gauss–Kronrod
//! (7/15) integration on finite and semi-infinite intervals.
//!
//! Panel sums are always accumulated in interval order so that results do not
//! depend on the refinement history beyond the final partition.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Controls for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureControl {
    /// Target for the summed Kronrod-minus-Gauss error estimate.
    pub abs_tol: f64,
    /// Maximum number of panels before giving up.
    pub max_subdivisions: usize,
}

impl Default for QuadratureControl {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureControl {
    pub fn new(abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return invalid(format!("quadrature abs_tol must be positive, got {abs_tol}"));
        }
        if max_subdivisions == 0 {
            return invalid("quadrature max_subdivisions must be at least 1");
        }
        Ok(Self {
            abs_tol,
            max_subdivisions,
        })
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; npts];
    let mut weights = vec![0.0; npts];
    let m = npts.div_ceil(2);
    let nf = npts as f64;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=npts {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let (p, pm1) = if npts == 1 { (x, 1.0) } else { (p1, p0) };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[npts - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[npts - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrates `f` over `[a, b]` with an `npts`-point Gauss–Legendre rule.
pub fn gauss_legendre_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, npts: usize) -> f64 {
    let (x, w) = gauss_legendre(npts);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(&w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>() * h
}

#[allow(clippy::excessive_precision)]
const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the Kronrod nodes with odd index (1, 3, 5) and the centre.
#[allow(clippy::excessive_precision)]
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Panel {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for j in 0..7 {
        let dx = h * KRONROD_NODES[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += KRONROD_WEIGHTS[j] * pair;
        if j % 2 == 1 {
            gauss += GAUSS_WEIGHTS[j / 2] * pair;
        }
    }
    Panel {
        a,
        b,
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate is below `ctl.abs_tol`. Endpoints are never evaluated, so
/// integrable endpoint singularities are tolerated.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, ctl: &QuadratureControl) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return invalid("finite integration limits required");
    }
    let mut panels = vec![gk15(&f, a, b)];
    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if !total_err.is_finite() {
            return Err(Error::Numerical("non-finite integrand value".into()));
        }
        if total_err <= ctl.abs_tol || panels.len() >= ctl.max_subdivisions {
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value: f64 = panels.iter().map(|p| p.value).sum();
            let result = QuadResult {
                value,
                error: total_err,
                panels: panels.len(),
            };
            if total_err > ctl.abs_tol {
                return Err(Error::Quadrature {
                    value,
                    achieved: total_err,
                    tol: ctl.abs_tol,
                    panels: panels.len(),
                });
            }
            return Ok(result);
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
    }
}

/// Integrates `f` over `[0, ∞)` via the substitution `u = e^{−s v}`.
///
/// `rate` should be about half the exponential decay rate of `f`, so the
/// transformed integrand `f(−ln u / s)/(s u)` vanishes like `u` at the origin
/// instead of carrying an `u^{a−1}` endpoint singularity.
pub fn integrate_semi_infinite(
    f: impl Fn(f64) -> f64,
    rate: f64,
    ctl: &QuadratureControl,
) -> Result<QuadResult> {
    if !(rate > 0.0 && rate.is_finite()) {
        return invalid(format!("substitution rate must be positive, got {rate}"));
    }
    integrate(
        |u| {
            let v = -u.ln() / rate;
            f(v) / (rate * u)
        },
        0.0,
        1.0,
        ctl,
    )
}
