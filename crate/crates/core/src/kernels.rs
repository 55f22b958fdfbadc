//! Gegenbauer-spectral evaluation of the Poisson kernel and the Green function
//! of the ball `{|x| < r}` for hyperbolic Brownian motion.
//!
//! Both kernels are axially symmetric about the direction of `x`, so they are
//! series in `C_k^{(ρ)}(cos θ)` whose radial coefficients are built from `F_k`
//! and `G_k`. Truncation is controlled by explicit geometric tail bounds.

use crate::error::{invalid, Error, Result};
use crate::geometry::{cos_angle, unit_sphere_area, BallDomain, Point};
use crate::quadrature::gauss_legendre;
use crate::specfun::{f_k, g_k, gamma, gegenbauer_at_one, Dimension};

/// Truncation control for spectral sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Hard cap on the highest degree summed.
    pub k_max: u32,
    /// Target absolute error of the summed series.
    pub tol: f64,
    /// Number of terms always computed before the tail bound is consulted.
    pub min_terms: u32,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            k_max: 4000,
            tol: 1e-12,
            min_terms: 10,
        }
    }
}

impl SeriesControl {
    pub fn new(k_max: u32, tol: f64, min_terms: u32) -> Result<Self> {
        if !(tol > 0.0) {
            return invalid(format!("series tolerance must be positive, got {tol}"));
        }
        if min_terms < 1 || k_max < min_terms {
            return invalid(format!(
                "series control needs k_max ≥ min_terms ≥ 1 (k_max = {k_max}, min_terms = {min_terms})"
            ));
        }
        Ok(Self {
            k_max,
            tol,
            min_terms,
        })
    }
}

/// A truncated spectral sum together with its certified tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub tail_bound: f64,
    /// Number of terms summed (degrees `0..terms`).
    pub terms: u32,
}

/// Coefficients `c_k` of an axially symmetric function on a sphere in the
/// normalisation `f(θ) = Σ_k c_k C_k^{(ρ)}(cos θ) / C_k^{(ρ)}(1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GegenbauerSpectrum {
    pub dim: Dimension,
    pub coefficients: Vec<f64>,
}

impl GegenbauerSpectrum {
    /// Evaluates the synthesis `Σ_k c_k C_k(cos θ)/C_k(1)`.
    pub fn synthesize(&self, theta: f64) -> f64 {
        let rho = self.dim.rho();
        let kmax = self.coefficients.len().saturating_sub(1) as u32;
        let c = crate::specfun::gegenbauer_sequence(rho, kmax, theta.cos().clamp(-1.0, 1.0));
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, ck)| ck * c[k] / gegenbauer_at_one(rho, k as u32))
            .sum()
    }

    /// Gegenbauer transform `μ̂_k` of the measure `f dσ_R` on the sphere of
    /// radius `radius`, defined by `C_k(1) μ̂_k = ∫ C_k(cos θ) f dσ_R`.
    ///
    /// For the Poisson kernel this returns the exit-law coefficients
    /// (`poisson_coefficient`).
    pub fn measure_transform(&self, radius: f64) -> Vec<f64> {
        let rho = self.dim.rho();
        let area = unit_sphere_area(self.dim.n()) * radius.powi(self.dim.n() as i32 - 1);
        self.coefficients
            .iter()
            .enumerate()
            .map(|(k, ck)| {
                let kf = k as f64;
                area * ck * rho / ((kf + rho) * gegenbauer_at_one(rho, k as u32))
            })
            .collect()
    }
}

/// `C_n = Γ(n/2 − 1)/(4π^{n/2})`, the Newtonian constant of the Green function.
pub fn green_constant(dim: Dimension) -> f64 {
    gamma(dim.half() - 1.0) / (4.0 * std::f64::consts::PI.powf(dim.half()))
}

fn check_inside(domain: &BallDomain, ax: f64, what: &str) -> Result<()> {
    if !(ax >= 0.0 && ax < domain.r) {
        return invalid(format!("{what} must satisfy 0 ≤ |x| < r = {}, got {ax}", domain.r));
    }
    Ok(())
}

/// Normalised Gegenbauer coefficient of the exit law,
/// `(|x|/r)^k F_k(|x|²)/F_k(r²) = E^x C_k(Φ_τ)/C_k(1)`.
pub fn poisson_coefficient(domain: &BallDomain, k: u32, ax: f64) -> Result<f64> {
    check_inside(domain, ax, "poisson_coefficient")?;
    if k == 0 {
        return Ok(1.0);
    }
    if ax == 0.0 {
        return Ok(0.0);
    }
    let denom = f_k(domain.dim, k, domain.r2())?;
    if denom.abs() < 1e-14 {
        return Err(Error::Numerical(format!(
            "F_{k}(r²) = {denom:e} vanishes; F_k has no zeros on [0, 1)"
        )));
    }
    Ok((ax / domain.r).powi(k as i32) * f_k(domain.dim, k, ax * ax)? / denom)
}

/// Poisson kernel `P_r(x, y)` for `|y| = r`, the density of the exit position
/// with respect to Euclidean surface measure on the sphere `S_r`.
pub fn poisson_kernel(domain: &BallDomain, x: &Point, y: &Point, ctl: &SeriesControl) -> Result<f64> {
    let ay = y.norm();
    if (ay - domain.r).abs() > 1e-12 {
        return invalid(format!("Poisson kernel needs |y| = r = {}, got {ay}", domain.r));
    }
    let ax = x.norm();
    let cos_theta = if ax == 0.0 { 1.0 } else { cos_angle(x, y)? };
    poisson_kernel_radial(domain, ax, cos_theta, ctl).map(|s| s.value)
}

/// Poisson kernel as a function of `|x|` and `cos θ = cos ∠(x, y)`.
pub fn poisson_kernel_radial(
    domain: &BallDomain,
    ax: f64,
    cos_theta: f64,
    ctl: &SeriesControl,
) -> Result<SeriesSum> {
    check_inside(domain, ax, "poisson_kernel")?;
    let dim = domain.dim;
    let n = dim.n();
    let rho = dim.rho();
    let prefactor = 1.0 / (unit_sphere_area(n) * domain.r.powi(n as i32 - 1));
    if ax == 0.0 {
        return Ok(SeriesSum {
            value: prefactor,
            tail_bound: 0.0,
            terms: 1,
        });
    }
    let x2 = ax * ax;
    let r2 = domain.r2();
    let t = ax / domain.r;
    let xc = cos_theta.clamp(-1.0, 1.0);
    // Limit of F_k(|x|²)/F_k(r²) as k → ∞
    let ratio_limit = ((1.0 - x2) / (1.0 - r2)).powf(rho);

    let mut sum = 0.0;
    let mut recent = [0.0f64; 5];
    let (mut c_prev, mut c_cur) = (0.0, 1.0);
    let mut tpow = 1.0;
    let mut c_one = 1.0;
    let mut bound = f64::INFINITY;
    for k in 0..=ctl.k_max {
        let kf = f64::from(k);
        if k == 1 {
            c_prev = 1.0;
            c_cur = 2.0 * rho * xc;
        } else if k >= 2 {
            let next = (2.0 * xc * (kf + rho - 1.0) * c_cur - (kf + 2.0 * rho - 2.0) * c_prev) / kf;
            c_prev = c_cur;
            c_cur = next;
        }
        let a_ratio = if k == 0 {
            1.0
        } else {
            f_k(dim, k, x2)? / f_k(dim, k, r2)?
        };
        sum += (kf + rho) / rho * tpow * a_ratio * c_cur;
        recent[k as usize % 5] = a_ratio;

        // Tail envelope: Σ_{j>k} (j+ρ)/ρ t^j C_j(1) · max(A_∞, recent A_j),
        // a geometric series whose ratio decreases in j.
        let next_tpow = tpow * t;
        let next_c_one = c_one * (2.0 * rho + kf) / (kf + 1.0);
        let e_next = (kf + 1.0 + rho) / rho * next_tpow * next_c_one;
        let s_next = (kf + 2.0 + rho) / (kf + 1.0 + rho) * t * (kf + 1.0 + 2.0 * rho) / (kf + 2.0);
        if s_next < 1.0 {
            let c = recent.iter().fold(ratio_limit, |m, v| m.max(*v));
            bound = prefactor * c * e_next / (1.0 - s_next);
            if k + 1 >= ctl.min_terms && bound < ctl.tol {
                return Ok(SeriesSum {
                    value: prefactor * sum,
                    tail_bound: bound,
                    terms: k + 1,
                });
            }
        }
        tpow = next_tpow;
        c_one = next_c_one;
    }
    Err(Error::TailBound {
        value: prefactor * sum,
        achieved: bound,
        tol: ctl.tol,
        terms: ctl.k_max as usize + 1,
    })
}

/// Gegenbauer coefficient of the Green function on the sphere of radius `radius`:
/// `C_n ρ/(k+ρ) a^k F_k(a²) R^k (G_k(R²)/R^{2k+2ρ} − G_k(r²) F_k(R²)/(r^{2k+2ρ} F_k(r²)))`
/// with `a ≤ R`; the arguments are swapped when `a > R`, which makes the
/// coefficient symmetric.
pub fn green_coefficient(domain: &BallDomain, k: u32, ax: f64, radius: f64) -> Result<f64> {
    check_inside(domain, ax, "green_coefficient |x|")?;
    check_inside(domain, radius, "green_coefficient R")?;
    let (a, b) = if ax <= radius { (ax, radius) } else { (radius, ax) };
    if a == 0.0 && k >= 1 {
        return Ok(0.0);
    }
    let dim = domain.dim;
    let rho = dim.rho();
    let r2 = domain.r2();
    let kf = f64::from(k);
    let (t1, t2) = (a / b, a * b / r2);
    let g_inner = g_k(dim, k, b * b)?;
    let g_outer = g_k(dim, k, r2)?;
    let bracket = t1.powi(k as i32) * g_inner / b.powf(2.0 * rho)
        - t2.powi(k as i32) * g_outer * f_k(dim, k, b * b)? / (f_k(dim, k, r2)? * domain.r.powf(2.0 * rho));
    Ok(green_constant(dim) * rho / (kf + rho) * f_k(dim, k, a * a)? * bracket)
}

/// Green function `G_D(x, y)` of the ball.
pub fn green_function(domain: &BallDomain, x: &Point, y: &Point, ctl: &SeriesControl) -> Result<f64> {
    let (ax, ay) = (x.norm(), y.norm());
    if x.dist_sqr(y) == 0.0 {
        return invalid("Green function is singular at x = y");
    }
    let cos_theta = if ax == 0.0 || ay == 0.0 { 1.0 } else { cos_angle(x, y)? };
    green_function_radial(domain, ax, ay, cos_theta, ctl).map(|s| s.value)
}

/// Geometric-envelope tail estimate for a sequence of term bounds `b_j`.
///
/// Uses the largest of the last consecutive ratios as the common ratio of the
/// envelope; returns infinity when that ratio is not below one.
struct TailEnvelope {
    last: f64,
    ratios: [f64; 5],
    count: usize,
}

impl TailEnvelope {
    fn new() -> Self {
        Self {
            last: 0.0,
            ratios: [f64::INFINITY; 5],
            count: 0,
        }
    }

    fn push(&mut self, b: f64) {
        if self.count > 0 {
            self.ratios[self.count % 5] = if self.last > 0.0 { b / self.last } else { 0.0 };
        }
        self.last = b;
        self.count += 1;
    }

    fn bound(&self) -> f64 {
        if self.last == 0.0 && self.count > 5 {
            return 0.0;
        }
        if self.count < 6 {
            return f64::INFINITY;
        }
        let s = self.ratios.iter().fold(0.0f64, |m, v| m.max(*v));
        if s < 1.0 {
            self.last * s / (1.0 - s)
        } else {
            f64::INFINITY
        }
    }
}

/// Green function as a function of `|x|`, `|y|` and `cos θ = cos ∠(x, y)`.
///
/// The radii are ordered internally so that the series runs in powers of
/// `min/max < 1`. When one point is the origin only the radial `k = 0` term
/// survives.
pub fn green_function_radial(
    domain: &BallDomain,
    ax: f64,
    ay: f64,
    cos_theta: f64,
    ctl: &SeriesControl,
) -> Result<SeriesSum> {
    check_inside(domain, ax, "green_function |x|")?;
    if !(ay >= 0.0 && ay <= domain.r) {
        return invalid(format!("green_function needs |y| ≤ r = {}, got {ay}", domain.r));
    }
    let (a, b) = if ax <= ay { (ax, ay) } else { (ay, ax) };
    if b == 0.0 {
        return invalid("Green function is singular at x = y = 0");
    }
    let dim = domain.dim;
    let rho = dim.rho();
    let r2 = domain.r2();
    let cn = green_constant(dim);
    let xc = cos_theta.clamp(-1.0, 1.0);
    let b_pow = b.powf(2.0 * rho);
    let r_pow = domain.r.powf(2.0 * rho);

    if a == 0.0 {
        let value = cn * (g_k(dim, 0, b * b)? / b_pow - g_k(dim, 0, r2)? / r_pow);
        return Ok(SeriesSum {
            value,
            tail_bound: 0.0,
            terms: 1,
        });
    }

    let (t1, t2) = (a / b, a * b / r2);
    let mut sum = 0.0;
    let (mut c_prev, mut c_cur) = (0.0, 1.0);
    let (mut p1, mut p2) = (1.0, 1.0);
    let mut c_one = 1.0;
    let mut env1 = TailEnvelope::new();
    let mut env2 = TailEnvelope::new();
    let mut bound = f64::INFINITY;
    for k in 0..=ctl.k_max {
        let kf = f64::from(k);
        if k == 1 {
            c_prev = 1.0;
            c_cur = 2.0 * rho * xc;
        } else if k >= 2 {
            let next = (2.0 * xc * (kf + rho - 1.0) * c_cur - (kf + 2.0 * rho - 2.0) * c_prev) / kf;
            c_prev = c_cur;
            c_cur = next;
        }
        if k >= 1 {
            c_one *= (2.0 * rho + kf - 1.0) / kf;
        }
        let fa = f_k(dim, k, a * a)?;
        let inner = p1 * g_k(dim, k, b * b)? / b_pow;
        let outer = p2 * g_k(dim, k, r2)? * f_k(dim, k, b * b)? / (f_k(dim, k, r2)? * r_pow);
        sum += fa * (inner - outer) * c_cur;
        env1.push((fa * inner).abs() * c_one);
        env2.push((fa * outer).abs() * c_one);
        if k + 1 >= ctl.min_terms {
            bound = cn * (env1.bound() + env2.bound());
            if bound < ctl.tol {
                return Ok(SeriesSum {
                    value: cn * sum,
                    tail_bound: bound,
                    terms: k + 1,
                });
            }
        }
        p1 *= t1;
        p2 *= t2;
    }
    Err(Error::TailBound {
        value: cn * sum,
        achieved: bound,
        tol: ctl.tol,
        terms: ctl.k_max as usize + 1,
    })
}

/// Estimate of `P_r(x, r u)` from the inward normal derivative of the Green
/// function, `−∂_R G_D(x, R u)|_{R=r} = (1 − r²)^{n−2} P_r(x, r u)`, using the
/// one-sided difference `(G(x, (r−h)u) − G(x, r u))/h`.
pub fn poisson_from_green_derivative(
    domain: &BallDomain,
    x: &Point,
    u: &Point,
    h: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    if (u.norm() - 1.0).abs() > 1e-12 {
        return invalid("direction u must be a unit vector");
    }
    let ax = x.norm();
    if !(h > 0.0 && h < domain.r - ax) {
        return invalid(format!(
            "difference step h must lie in (0, r − |x|) = (0, {}), got {h}",
            domain.r - ax
        ));
    }
    let inner = green_function(domain, x, &u.scaled(domain.r - h), ctl)?;
    let edge = green_function(domain, x, &u.scaled(domain.r), ctl)?;
    let n = domain.dim.n() as i32;
    Ok((inner - edge) / h / (1.0 - domain.r2()).powi(n - 2))
}

/// Gegenbauer spectrum `c_0..c_K` of an axially symmetric function
/// `f(θ)` on a sphere, by Gauss–Legendre quadrature in `θ ∈ [0, π]`:
/// `c_k = (k+ρ)/ρ · ω_{n−2}/ω_{n−1} · ∫_0^π f(θ) C_k(cos θ) sin^{n−2}θ dθ`.
///
/// The rule is doubled once and the two results compared; a disagreement
/// above `1e-10` (relative to the largest coefficient) is reported.
pub fn spectrum_of(f: impl Fn(f64) -> f64, dim: Dimension, k_max: u32) -> Result<GegenbauerSpectrum> {
    let base = 2 * k_max as usize + 128;
    let coarse = spectrum_with_rule(&f, dim, k_max, base);
    let fine = spectrum_with_rule(&f, dim, k_max, 2 * base);
    let scale = fine.iter().fold(1e-300f64, |m, c| m.max(c.abs()));
    let diff = coarse
        .iter()
        .zip(&fine)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if !(diff <= 1e-10 * scale) {
        return Err(Error::Numerical(format!(
            "spectral quadrature not converged: rule-doubling change {diff:e} (scale {scale:e})"
        )));
    }
    Ok(GegenbauerSpectrum {
        dim,
        coefficients: fine,
    })
}

fn spectrum_with_rule(f: &impl Fn(f64) -> f64, dim: Dimension, k_max: u32, npts: usize) -> Vec<f64> {
    let rho = dim.rho();
    let (nodes, weights) = gauss_legendre(npts);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let area_ratio = unit_sphere_area(dim.n() - 1) / unit_sphere_area(dim.n());
    let mut acc = vec![0.0; k_max as usize + 1];
    for (xi, wi) in nodes.iter().zip(&weights) {
        let theta = half_pi * (xi + 1.0);
        let s = theta.sin().powi(dim.n() as i32 - 2);
        let fv = f(theta) * s * wi * half_pi;
        let c = crate::specfun::gegenbauer_sequence(rho, k_max, theta.cos());
        for (a, ck) in acc.iter_mut().zip(&c) {
            *a += fv * ck;
        }
    }
    acc.iter()
        .enumerate()
        .map(|(k, a)| (k as f64 + rho) / rho * area_ratio * a)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gegenbauer;

    fn domain(n: u32, r: f64) -> BallDomain {
        BallDomain::new(Dimension::new(n).unwrap(), r).unwrap()
    }

    #[test]
    fn poisson_coefficient_examples() {
        let d = domain(4, 0.6);
        assert_eq!(poisson_coefficient(&d, 0, 0.3).unwrap(), 1.0);
        assert_eq!(poisson_coefficient(&d, 3, 0.0).unwrap(), 0.0);
        let e = 0.5 * (1.0 - 0.03) / (1.0 - 0.12);
        assert!((poisson_coefficient(&d, 1, 0.3).unwrap() - e).abs() < 1e-15);
        assert!(poisson_coefficient(&d, 1, 0.6).is_err());
    }

    #[test]
    fn poisson_kernel_uniform_at_origin() {
        for n in 3..=6 {
            let d = domain(n, 0.7);
            let p = poisson_kernel_radial(&d, 0.0, 0.3, &SeriesControl::default()).unwrap();
            let e = gamma(f64::from(n) / 2.0)
                / (2.0 * std::f64::consts::PI.powf(f64::from(n) / 2.0) * 0.7f64.powi(n as i32 - 1));
            assert!((p.value - e).abs() < 1e-14 * e);
        }
    }

    #[test]
    fn poisson_kernel_normalised() {
        let ctl = SeriesControl::default();
        for n in 3..=6u32 {
            let d = domain(n, 0.6);
            let pts = 96;
            let area = unit_sphere_area(n - 1) * 0.6f64.powi(n as i32 - 1);
            let (x, w) = gauss_legendre(pts);
            let total: f64 = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| {
                    let th = std::f64::consts::FRAC_PI_2 * (xi + 1.0);
                    let p = poisson_kernel_radial(&d, 0.4, th.cos(), &ctl).unwrap().value;
                    wi * p * th.sin().powi(n as i32 - 2)
                })
                .sum::<f64>()
                * std::f64::consts::FRAC_PI_2
                * area;
            assert!((total - 1.0).abs() < 1e-9, "n={n} total={total}");
        }
    }

    #[test]
    fn spectrum_examples() {
        let dim = Dimension::new(5).unwrap();
        let s = spectrum_of(|_| 1.0, dim, 6).unwrap();
        assert!((s.coefficients[0] - 1.0).abs() < 1e-13);
        assert!(s.coefficients[1..].iter().all(|c| c.abs() < 1e-13));
        let rho = dim.rho();
        let s = spectrum_of(|t| gegenbauer(rho, 3, t.cos()) / gegenbauer_at_one(rho, 3), dim, 6).unwrap();
        for (k, c) in s.coefficients.iter().enumerate() {
            let e = if k == 3 { 1.0 } else { 0.0 };
            assert!((c - e).abs() < 1e-12, "k={k} c={c}");
        }
        assert!((s.synthesize(0.4) - gegenbauer(rho, 3, 0.4f64.cos()) / gegenbauer_at_one(rho, 3)).abs() < 1e-12);
    }

    #[test]
    fn green_symmetry_and_boundary() {
        let d = domain(4, 0.6);
        let ctl = SeriesControl::default();
        let a = green_coefficient(&d, 3, 0.2, 0.4).unwrap();
        let b = green_coefficient(&d, 3, 0.4, 0.2).unwrap();
        assert_eq!(a, b);
        assert!(green_coefficient(&d, 2, 0.3, 0.6 - 1e-12).unwrap().abs() < 1e-9);
        let edge = green_function_radial(&d, 0.3, 0.6, 0.2, &ctl).unwrap().value;
        assert!(edge.abs() < 1e-11);
        let g1 = green_function_radial(&d, 0.2, 0.45, 0.1, &ctl).unwrap().value;
        let g2 = green_function_radial(&d, 0.45, 0.2, 0.1, &ctl).unwrap().value;
        assert!((g1 - g2).abs() < 1e-14);
        assert!(g1 > 0.0);
    }

    #[test]
    fn green_at_origin_matches_radial_formula() {
        // n = 4: G(0, y)/C_4 = 1/|y|² − |y|² + 4 log|y| − 1/r² + r² − 4 log r
        let d = domain(4, 0.6);
        let y = 0.35f64;
        let r = 0.6f64;
        let e = green_constant(d.dim)
            * (1.0 / (y * y) - y * y + 4.0 * y.ln() - 1.0 / (r * r) + r * r - 4.0 * r.ln());
        let g = green_function_radial(&d, 0.0, y, 0.0, &SeriesControl::default()).unwrap().value;
        assert!((g - e).abs() < 1e-13 * e.abs());
        let c = green_coefficient(&d, 0, 0.0, y).unwrap();
        // ρ/(k+ρ) = 1 at k = 0
        assert!((c - e).abs() < 1e-13 * e.abs());
    }

    #[test]
    fn equal_radii_reports_tail() {
        let d = domain(4, 0.6);
        let ctl = SeriesControl::new(200, 1e-12, 10).unwrap();
        match green_function_radial(&d, 0.3, 0.3, 0.5, &ctl) {
            Err(Error::TailBound { value, .. }) => assert!(value.is_finite()),
            other => panic!("expected a tail-bound report, got {other:?}"),
        }
    }
}
