//! Identity suites: batches of exact relations evaluated numerically, each
//! reported as a residual against a tolerance. Used by the command-line
//! `identity-check` command and by the acceptance run.

use num_complex::Complex64;

use crate::closedform::{critical_r2, h_function, laplace_weight, LaplaceWeight};
use crate::error::{invalid, Result};
use crate::quadrature::{integrate_semi_infinite, QuadratureControl};
use crate::specfun::{gegenbauer_at_one, gegenbauer_sequence, wronskian_residual, Dimension};

/// One evaluated identity.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub label: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// A named collection of checks.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: Vec<IdentityCheck>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }

    /// The check with the largest residual-to-tolerance ratio.
    pub fn worst(&self) -> Option<&IdentityCheck> {
        self.checks
            .iter()
            .max_by(|a, b| (a.residual / a.tolerance).total_cmp(&(b.residual / b.tolerance)))
    }
}

/// The identity suites known to `run_suite`.
pub const SUITE_NAMES: [&str; 3] = ["wronskian", "generating", "laplace"];

/// Runs a suite by name over the given dimensions.
pub fn run_suite(name: &str, dims: &[u32]) -> Result<SuiteReport> {
    match name {
        "wronskian" => wronskian_suite(dims),
        "generating" => generating_suite(dims),
        "laplace" => laplace_suite(dims),
        _ => invalid(format!("unknown suite '{name}' (expected one of {})", SUITE_NAMES.join(", "))),
    }
}

/// Wronskian residuals for `k = 0..=30` and `z = 0.05, 0.10, …, 0.95`,
/// each against `1e-10·(k + ρ)`.
pub fn wronskian_suite(dims: &[u32]) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for &n in dims {
        let dim = Dimension::new(n)?;
        for k in 0..=30u32 {
            for j in 1..=19 {
                let z = 0.05 * f64::from(j);
                let residual = wronskian_residual(dim, k, z)?.abs();
                checks.push(IdentityCheck {
                    label: format!("n={n} k={k} z={z:.2}"),
                    residual,
                    tolerance: 1e-10 * (f64::from(k) + dim.rho()),
                });
            }
        }
    }
    Ok(SuiteReport {
        name: "wronskian",
        checks,
    })
}

/// Partial sums of a Gegenbauer-type series `Σ_k t^k a_k C_k^{(v)}(c)`, stopped
/// once the term envelope `t^k |a_k| C_k^{(v)}(1)` stays below `1e-17` of the
/// running sum for 8 consecutive orders.
fn gegenbauer_series(v: f64, t: f64, c: f64, start: u32, coeff: impl Fn(u32) -> f64) -> f64 {
    const BLOCK: u32 = 64;
    let mut sum = 0.0;
    let mut quiet = 0;
    let mut k0 = 0;
    loop {
        let values = gegenbauer_sequence(v, k0 + BLOCK, c);
        for k in k0.max(start)..k0 + BLOCK {
            let a = coeff(k);
            let tk = t.powi(k as i32);
            sum += tk * a * values[k as usize];
            let envelope = tk * a.abs() * gegenbauer_at_one(v, k);
            if envelope <= 1e-17 * sum.abs().max(1e-300) {
                quiet += 1;
                if quiet >= 8 {
                    return sum;
                }
            } else {
                quiet = 0;
            }
        }
        k0 += BLOCK;
    }
}

/// Euclidean generating-function expansions against their closed forms, for
/// `|x|/|y| ∈ {0.1, 0.4, 0.7}` and a grid of angles. Power-law kernels are
/// compared relatively, logarithmic kernels absolutely; tolerance `1e-8`.
///
/// * `|x−y|^{2−n} = |y|^{2−n} Σ_k t^k C_k^{(ρ)}(cos θ)`
/// * `(r² − |x|²)/|x−y|^n = r^{2−n} Σ_k (k+ρ)/ρ · t^k C_k^{(ρ)}(cos θ)`, `|y| = r`
/// * `log|x−y|^{−1} = log|y|^{−1} + ½ Σ_{k≥1} t^k C_k^{(0)}(cos θ)`
/// * `4 log|x−y|^{−1} = 4 log|y|^{−1} − t² − 2 Σ_{k≥1} t^k (t²/(k+2) − 1/k) C_k^{(1)}(cos θ)`
pub fn generating_suite(dims: &[u32]) -> Result<SuiteReport> {
    const TOL: f64 = 1e-8;
    let ay = 0.8;
    let ratios = [0.1, 0.4, 0.7];
    let angles: Vec<f64> = (0..7).map(|j| 0.05 + 0.5 * f64::from(j)).collect();
    let mut checks = Vec::new();
    for &t in &ratios {
        for &theta in &angles {
            let c = theta.cos();
            let ax = t * ay;
            let dist2 = ax * ax + ay * ay - 2.0 * ax * ay * c;
            let log_closed = -0.5 * dist2.ln();
            let log_series = -ay.ln() + 0.5 * gegenbauer_series(0.0, t, c, 1, |_| 1.0);
            checks.push(IdentityCheck {
                label: format!("log t={t} theta={theta:.2}"),
                residual: (log_series - log_closed).abs(),
                tolerance: TOL,
            });
            let log2_series = 4.0 * (-ay.ln()) - t * t
                - 2.0 * gegenbauer_series(1.0, t, c, 1, |k| t * t / (f64::from(k) + 2.0) - 1.0 / f64::from(k));
            checks.push(IdentityCheck {
                label: format!("log-second-kind t={t} theta={theta:.2}"),
                residual: (log2_series - 4.0 * log_closed).abs(),
                tolerance: TOL,
            });
            for &n in dims {
                let dim = Dimension::new(n)?;
                let rho = dim.rho();
                let p = 2 - n as i32;
                let newton = dist2.powf(0.5 * f64::from(p));
                let newton_series = ay.powi(p) * gegenbauer_series(rho, t, c, 0, |_| 1.0);
                checks.push(IdentityCheck {
                    label: format!("newton n={n} t={t} theta={theta:.2}"),
                    residual: ((newton_series - newton) / newton).abs(),
                    tolerance: TOL,
                });
                let poisson = (ay * ay - ax * ax) / dist2.powf(0.5 * f64::from(n));
                let poisson_series =
                    ay.powi(p) * gegenbauer_series(rho, t, c, 0, |k| (f64::from(k) + rho) / rho);
                checks.push(IdentityCheck {
                    label: format!("poisson n={n} t={t} theta={theta:.2}"),
                    residual: ((poisson_series - poisson) / poisson).abs(),
                    tolerance: TOL,
                });
            }
        }
    }
    Ok(SuiteReport {
        name: "generating",
        checks,
    })
}

/// `(|x|², r²)` cases covering every weight regime: `n = 4` at two radii and
/// `n = 6` in the cosh–sinh, critical and oscillatory regimes.
pub fn laplace_cases(n: u32) -> Vec<(f64, f64)> {
    match n {
        4 => vec![(0.09, 0.36), (0.2, 0.5)],
        6 => {
            let crit = critical_r2();
            vec![(0.02, 0.05), (0.4 * crit, crit), (0.09, 0.36), (0.5, 0.9)]
        }
        _ => Vec::new(),
    }
}

/// `∫_0^∞ e^{ρv} h w dv` with `h = |x|²(e^{−v} − 1) + r²(e^v − 1)`, written as
/// `e^{(ρ+1)v} w · (1 − e^{−v})(r² − |x|² e^{−v})`.
pub fn h_weighted_moment(weight: &LaplaceWeight, ctl: &QuadratureControl) -> Result<f64> {
    let rho = weight.dim.rho();
    let rate = weight.decay_rate() - rho - 1.0;
    if !(rate > 0.0) {
        return invalid("the h-weighted moment diverges for this radius");
    }
    let (x2, r2) = (weight.x2, weight.r2);
    integrate_semi_infinite(
        |v| weight.eval_scaled(v, rho + 1.0) * (-(-v).exp_m1()) * (r2 - x2 * (-v).exp()),
        0.5 * rate,
        ctl,
    )
    .map(|r| r.value)
}

/// Laplace-transform and moment identities of the weights `w` for
/// `n ∈ {4, 6}` (other dimensions are skipped):
///
/// * `∫ e^{−kv} w dv = H(k)` for `k ∈ {0, 1, 2, 3, 5, 10}` (relative, `1e-8`)
/// * `∫ e^{ρv} w dv = (n/2)(1 − |x|²)^{ρ−1}(1 − r²)^{ρ−1}` (relative, `1e-9`)
/// * `∫ e^{ρv} h w dv = (1 − |x|²)^ρ (1 − r²)^ρ / ρ` (relative, `1e-9`)
/// * `n = 4`: `H(k) = [2(1+r²)/(1−r²)]/(k + 2/(1−r²))`, independently of `|x|`
///   (relative, `1e-12`)
pub fn laplace_suite(dims: &[u32]) -> Result<SuiteReport> {
    let ctl = QuadratureControl::new(1e-13, 4000)?;
    let mut checks = Vec::new();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    for &n in dims {
        let dim = Dimension::new(n)?;
        let rho = dim.rho();
        for (x2, r2) in laplace_cases(n) {
            let w = laplace_weight(dim, x2, r2)?;
            let tag = format!("n={n} x2={x2:.4} r2={r2:.4} ({})", w.regime.name());
            for k in [0.0, 1.0, 2.0, 3.0, 5.0, 10.0] {
                let h = h_function(dim, x2, r2, Complex64::new(k, 0.0))?.re;
                checks.push(IdentityCheck {
                    label: format!("transform {tag} k={k}"),
                    residual: rel(w.laplace_numeric(k, &ctl)?, h),
                    tolerance: 1e-8,
                });
            }
            let moment = w.laplace_numeric(-rho, &ctl)?;
            let expected = 0.5 * dim.nf() * ((1.0 - x2) * (1.0 - r2)).powf(rho - 1.0);
            checks.push(IdentityCheck {
                label: format!("moment {tag}"),
                residual: rel(moment, expected),
                tolerance: 1e-9,
            });
            let hm = h_weighted_moment(&w, &ctl)?;
            let expected = ((1.0 - x2) * (1.0 - r2)).powf(rho) / rho;
            checks.push(IdentityCheck {
                label: format!("h-moment {tag}"),
                residual: rel(hm, expected),
                tolerance: 1e-9,
            });
            if n == 4 {
                for k in [0.0, 1.0, 2.5, 7.0] {
                    let closed = 2.0 * (1.0 + r2) / (1.0 - r2) / (k + 2.0 / (1.0 - r2));
                    let kc = Complex64::new(k, 0.0);
                    let h = h_function(dim, x2, r2, kc)?.re;
                    checks.push(IdentityCheck {
                        label: format!("closed-H {tag} k={k}"),
                        residual: rel(h, closed),
                        tolerance: 1e-12,
                    });
                    let other = h_function(dim, 0.5 * x2, r2, kc)?.re;
                    checks.push(IdentityCheck {
                        label: format!("x-independence {tag} k={k}"),
                        residual: rel(other, h),
                        tolerance: 1e-12,
                    });
                }
            }
        }
    }
    Ok(SuiteReport {
        name: "laplace",
        checks,
    })
}
