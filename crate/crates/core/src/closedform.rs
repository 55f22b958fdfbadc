//! Integral representations and closed forms in dimensions four and six.
//!
//! The normalised Poisson coefficient is written as a Euclidean-like leading
//! part plus a remainder `H(k)`, the Laplace transform of an explicit weight
//! `w(v)`. Summing the spectral series against this representation turns it
//! into a single integral over dilated Euclidean kernels. The module also
//! houses the entire function `f_z(k) = F_k(z)/Γ(k + n/2)` and numerical probes
//! of the two conjectures about it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::geometry::{BallDomain, Point};
use crate::quadrature::{integrate_semi_infinite, QuadratureControl};
use crate::specfun::{f_k, gamma, recip_gamma, Dimension};

/// Half-width of the band around `r⁴ − 14r² + 1 = 0` treated as critical.
pub const CRITICAL_DEAD_BAND: f64 = 1e-12;

/// Slack `ε` used when reporting whether a rectangle lies in the half-plane
/// `Re k ≥ −n/2 − ε` covered by the zero-free conjecture.
pub const CONJECTURE_PROBE_EPS: f64 = 0.1;

/// `r²` at which the six-dimensional weight changes regime: `7 − 4√3`.
pub fn critical_r2() -> f64 {
    7.0 - 4.0 * 3f64.sqrt()
}

/// Shape of the Laplace weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightRegime {
    /// `n = 4`: `A e^{−bv}`.
    SingleExponential,
    /// `n = 6`, `r² < 7 − 4√3`: `e^{−bv}(A cosh cv + B sinh(cv)/c)`.
    CoshSinh,
    /// `n = 6`, `r² = 7 − 4√3`: `e^{−bv}(A + B v)`.
    Critical,
    /// `n = 6`, `r² > 7 − 4√3`: `e^{−bv}(A cos c̃v + B sin(c̃v)/c̃)`.
    Oscillatory,
}

impl WeightRegime {
    pub fn name(&self) -> &'static str {
        match self {
            WeightRegime::SingleExponential => "single-exponential",
            WeightRegime::CoshSinh => "cosh-sinh",
            WeightRegime::Critical => "critical",
            WeightRegime::Oscillatory => "oscillatory",
        }
    }
}

/// A damped pair `e^{−bv}(A φ(v) + B ψ(v))` with `φ, ψ` the regime's
/// even/odd fundamental solutions (`cosh`, `sinh(cv)/c` and their limits).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Damped {
    regime: WeightRegime,
    b: f64,
    c: f64,
}

impl Damped {
    fn for_six(r2: f64) -> Self {
        let disc = r2 * r2 - 14.0 * r2 + 1.0;
        let b = (7.0 - r2) / (2.0 * (1.0 - r2));
        let c = disc.abs().sqrt() / (2.0 * (1.0 - r2));
        let regime = if disc.abs() < CRITICAL_DEAD_BAND {
            WeightRegime::Critical
        } else if disc > 0.0 {
            WeightRegime::CoshSinh
        } else {
            WeightRegime::Oscillatory
        };
        let c = if regime == WeightRegime::Critical { 0.0 } else { c };
        Self { regime, b, c }
    }

    /// `(e^{−bv} φ(v), e^{−bv} ψ(v))` with the decay rate lowered by `shift`.
    fn eval(&self, v: f64, shift: f64) -> (f64, f64) {
        let b = self.b - shift;
        match self.regime {
            WeightRegime::SingleExponential => ((-b * v).exp(), 0.0),
            WeightRegime::Critical => {
                let e = (-b * v).exp();
                (e, v * e)
            }
            WeightRegime::CoshSinh => {
                let c = self.c;
                let lo = (-(b - c) * v).exp();
                let hi = (-(b + c) * v).exp();
                // e^{−bv} sinh(cv)/c = e^{−(b−c)v}(1 − e^{−2cv})/(2c), free of cancellation
                let sinhc = -(-2.0 * c * v).exp_m1() / (2.0 * c);
                (0.5 * (lo + hi), lo * sinhc)
            }
            WeightRegime::Oscillatory => {
                let e = (-b * v).exp();
                let c = self.c;
                (e * (c * v).cos(), e * (c * v).sin() / c)
            }
        }
    }

    /// Laplace transform at `k` of `e^{−bv} φ` and `e^{−bv} ψ`.
    fn laplace(&self, k: Complex64) -> (Complex64, Complex64) {
        let s = k + self.b;
        match self.regime {
            WeightRegime::SingleExponential => (1.0 / s, Complex64::new(0.0, 0.0)),
            WeightRegime::Critical => (1.0 / s, 1.0 / (s * s)),
            WeightRegime::CoshSinh => {
                let d = s * s - self.c * self.c;
                (s / d, 1.0 / d)
            }
            WeightRegime::Oscillatory => {
                let d = s * s + self.c * self.c;
                (s / d, 1.0 / d)
            }
        }
    }

    /// Slowest exponential decay rate of the pair.
    fn decay_rate(&self) -> f64 {
        match self.regime {
            WeightRegime::CoshSinh => self.b - self.c,
            _ => self.b,
        }
    }
}

/// Inverse Laplace transform `w(v)` of the remainder `H(k)`:
/// `H(k) = ∫_0^∞ e^{−kv} w(v) dv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceWeight {
    pub dim: Dimension,
    pub x2: f64,
    pub r2: f64,
    pub regime: WeightRegime,
    /// Decay rate `b` of the exponential envelope.
    pub b: f64,
    /// `c` (cosh-sinh), `c̃` (oscillatory) or 0.
    pub c: f64,
    /// Amplitude of the even part (`e^{−bv}`, `cosh`, `cos` or constant).
    pub even_amplitude: f64,
    /// Amplitude of the odd part (`sinh(cv)/c`, `sin(c̃v)/c̃` or `v`).
    pub odd_amplitude: f64,
}

/// Builds the Laplace weight for `n ∈ {4, 6}` and `|x|² < r²`.
///
/// For `n = 6` the odd part enters with a positive sign,
/// `w = 3A e^{−bv} cosh cv + (3B/2) e^{−bv} sinh(cv)/c` with
/// `A = 1 − r²|x|² + 3(r² − |x|²)` and `B = 1 + |x|²r² + 5(|x|² + r²)`; this is
/// the inverse transform of `H` (checked against it in the tests).
pub fn laplace_weight(dim: Dimension, x2: f64, r2: f64) -> Result<LaplaceWeight> {
    if !(0.0 <= x2 && x2 < r2 && r2 < 1.0) {
        return invalid(format!("laplace_weight needs 0 ≤ |x|² < r² < 1, got |x|² = {x2}, r² = {r2}"));
    }
    match dim.n() {
        4 => Ok(LaplaceWeight {
            dim,
            x2,
            r2,
            regime: WeightRegime::SingleExponential,
            b: 2.0 / (1.0 - r2),
            c: 0.0,
            even_amplitude: 2.0 * (1.0 + r2) / (1.0 - r2),
            odd_amplitude: 0.0,
        }),
        6 => {
            let d = Damped::for_six(r2);
            let a = 1.0 - r2 * x2 + 3.0 * (r2 - x2);
            let bb = 1.0 + x2 * r2 + 5.0 * (x2 + r2);
            Ok(LaplaceWeight {
                dim,
                x2,
                r2,
                regime: d.regime,
                b: d.b,
                c: d.c,
                even_amplitude: 3.0 * a,
                odd_amplitude: 1.5 * bb,
            })
        }
        n => invalid(format!("Laplace weights are available for n = 4 and n = 6 only, got {n}")),
    }
}

impl LaplaceWeight {
    fn damped(&self) -> Damped {
        Damped {
            regime: self.regime,
            b: self.b,
            c: self.c,
        }
    }

    /// `w(v)`.
    pub fn eval(&self, v: f64) -> f64 {
        self.eval_scaled(v, 0.0)
    }

    /// `w(v) e^{shift·v}`, evaluated without forming the growing factor.
    pub fn eval_scaled(&self, v: f64, shift: f64) -> f64 {
        let (even, odd) = self.damped().eval(v, shift);
        self.even_amplitude * even + self.odd_amplitude * odd
    }

    /// Closed-form Laplace transform `∫_0^∞ e^{−kv} w(v) dv`.
    pub fn laplace_transform(&self, k: Complex64) -> Complex64 {
        let (even, odd) = self.damped().laplace(k);
        self.even_amplitude * even + self.odd_amplitude * odd
    }

    /// Slowest exponential decay rate of `w`.
    pub fn decay_rate(&self) -> f64 {
        self.damped().decay_rate()
    }

    /// Numerical `∫_0^∞ e^{−kv} w(v) dv` (requires `k > −decay_rate`).
    pub fn laplace_numeric(&self, k: f64, ctl: &QuadratureControl) -> Result<f64> {
        let rate = self.decay_rate() + k;
        if !(rate > 0.0) {
            return invalid(format!("Laplace integral diverges at k = {k}"));
        }
        integrate_semi_infinite(|v| self.eval_scaled(v, -k), 0.5 * rate, ctl).map(|r| r.value)
    }
}

/// The entire function `f_z(k) = F_k(z)/Γ(k + n/2)`, summed as
/// `Σ_i (k)_i (−ρ)_i z^i / (i! Γ(k + n/2 + i))` so that no gamma pole is ever
/// divided by.
pub fn f_entire(dim: Dimension, z: f64, k: Complex64) -> Result<Complex64> {
    if !(z > 0.0 && z < 1.0) {
        return invalid(format!("f_entire needs z in (0, 1), got {z}"));
    }
    let rho = dim.rho();
    let half = dim.half();
    let mut sum = Complex64::new(0.0, 0.0);
    // coef = (k)_i (−ρ)_i z^i / i!
    let mut coef = Complex64::new(1.0, 0.0);
    let stop = dim.rho_int();
    let mut quiet = false;
    let mut rg = Complex64::new(0.0, 0.0);
    for i in 0..200_000u32 {
        let fi = f64::from(i);
        // 1/Γ(k + n/2 + i) by downward recurrence from the previous term,
        // recomputed directly when the recurrence would divide by zero.
        let arg = k + half + fi;
        if i == 0 || (arg - 1.0).norm() == 0.0 {
            rg = recip_gamma(arg);
        } else {
            rg /= arg - 1.0;
        }
        let term = coef * rg;
        sum += term;
        if let Some(l) = stop {
            if i == l {
                return Ok(sum);
            }
        }
        coef *= (k + fi) * (fi - rho) * z / (fi + 1.0);
        if stop.is_none() {
            if coef.norm() == 0.0 {
                return Ok(sum);
            }
            // Terms eventually decay geometrically with ratio z; require two
            // consecutive negligible terms before stopping.
            let small = term.norm() / (1.0 - z) < 1e-17 * sum.norm().max(1e-300);
            if small && quiet && i > 2 {
                return Ok(sum);
            }
            quiet = small;
        }
    }
    Err(Error::Numerical(format!("f_entire series did not converge (z = {z}, k = {k})")))
}

/// The remainder `H(k)` defined by
/// `(k+ρ)/ρ · f_{|x|²}(k)/f_{r²}(k) = ((1−|x|²)/(1−r²))^ρ ((k+ρ)/ρ − (n/2)(r²−|x|²)/((1−r²)(1−|x|²)))
///  + (r² − |x|²)/(1 − r²)^{n−2} · H(k)`.
pub fn h_function(dim: Dimension, x2: f64, r2: f64, k: Complex64) -> Result<Complex64> {
    if !(0.0 <= x2 && x2 < r2 && r2 < 1.0) {
        return invalid(format!("H needs 0 ≤ |x|² < r² < 1, got |x|² = {x2}, r² = {r2}"));
    }
    let rho = dim.rho();
    let n = dim.nf();
    let fr = f_entire(dim, r2, k)?;
    if fr.norm() < 1e-300 {
        return Err(Error::InvalidParameter(format!("k = {k} is a zero of f_(r²)")));
    }
    // f_{|x|²}(k) at x = 0 is 1/Γ(k + n/2)
    let fx = if x2 == 0.0 {
        recip_gamma(k + dim.half())
    } else {
        f_entire(dim, x2, k)?
    };
    let kr = (k + rho) / rho;
    let lead = ((1.0 - x2) / (1.0 - r2)).powf(rho)
        * (kr - (n / 2.0) * (r2 - x2) / ((1.0 - r2) * (1.0 - x2)));
    Ok((kr * fx / fr - lead) * (1.0 - r2).powi(dim.n() as i32 - 2) / (r2 - x2))
}

/// `h(x, y, v) = |x|²(e^{−v} − 1) + |y|²(e^{v} − 1)`.
pub fn h_factor(x: &Point, y: &Point, v: f64) -> f64 {
    x.norm_sqr() * (-v).exp_m1() + y.norm_sqr() * v.exp_m1()
}

/// `|x e^{−v/2} − y e^{v/2}|² − |x − y|²`, the defining form of `h`.
pub fn h_factor_direct(x: &Point, y: &Point, v: f64) -> f64 {
    x.combine((-0.5 * v).exp(), y, -(0.5 * v).exp()).norm_sqr() - x.dist_sqr(y)
}

/// `L(x, y, v) = ρ h A^ρ − |x−y|²(A^ρ − |x−y|^{2ρ})` with
/// `A = |x e^{−v/2} − y e^{v/2}|² = |x−y|² + h`.
pub fn l_factor(dim: Dimension, x: &Point, y: &Point, v: f64) -> f64 {
    let rho = dim.rho();
    let d = x.dist_sqr(y);
    let h = h_factor(x, y, v);
    let a = d + h;
    rho * h * a.powf(rho) - d * (a.powf(rho) - d.powf(rho))
}

/// The simplified forms of `L`: `h²` for `n = 4` and `h²(2A + |x−y|²)` for `n = 6`.
pub fn l_factor_reduced(dim: Dimension, x: &Point, y: &Point, v: f64) -> Result<f64> {
    let d = x.dist_sqr(y);
    let h = h_factor(x, y, v);
    match dim.n() {
        4 => Ok(h * h),
        6 => Ok(h * h * (2.0 * (d + h) + d)),
        n => invalid(format!("reduced L is available for n = 4 and n = 6 only, got {n}")),
    }
}

fn check_four_or_six(dim: Dimension) -> Result<()> {
    if dim.n() != 4 && dim.n() != 6 {
        return invalid(format!("closed forms are available for n = 4 and n = 6 only, got {}", dim.n()));
    }
    Ok(())
}

/// Poisson kernel from the Laplace-weight integral representation,
/// `P = Γ(n/2)/(2π^{n/2} r (1−r²)^{n−2}) · (r²−|x|²)/|x−y|^n ·
///  ∫_0^∞ w(v) L(x, y, v)/|x e^{−v} − y|^{n−2} dv`.
///
/// `q.abs_tol` bounds the quadrature error of the returned density.
pub fn poisson_integral(domain: &BallDomain, x: &Point, y: &Point, q: &QuadratureControl) -> Result<f64> {
    let dim = domain.dim;
    check_four_or_six(dim)?;
    let (x2, r2) = (x.norm_sqr(), domain.r2());
    if (y.norm() - domain.r).abs() > 1e-12 {
        return invalid(format!("poisson_integral needs |y| = r = {}", domain.r));
    }
    if !(x2 < r2) {
        return invalid("poisson_integral needs |x| < r");
    }
    let w = laplace_weight(dim, x2, r2)?;
    let n = dim.n() as i32;
    let rho = dim.rho();
    let d = x.dist_sqr(y);
    let xy = x.dot(y);
    let prefactor = gamma(dim.half()) / (2.0 * PI.powf(dim.half()) * domain.r * (1.0 - r2).powi(n - 2))
        * (r2 - x2)
        / d.powf(dim.half());
    // The integrand grows like e^{(ρ+1)v} through L and decays through w;
    // both factors are rescaled by e^{∓(ρ+1)v} to stay finite.
    let grow = rho + 1.0;
    let net_decay = w.decay_rate() - grow;
    if !(net_decay > 0.0) {
        return Err(Error::Numerical(format!("integrand does not decay (rate {net_decay})")));
    }
    let integrand = |v: f64| {
        let em = (-v).exp();
        // h e^{−v} = (1 − e^{−v})(r² − |x|² e^{−v})
        let hs = -(-v).exp_m1() * (r2 - x2 * em);
        let ls = if n == 4 {
            hs * hs
        } else {
            // L e^{−3v} = (h e^{−v})² (2 A e^{−v} + |x−y|² e^{−v})
            hs * hs * (2.0 * (d * em + hs) + d * em)
        };
        let dist2 = x2 * em * em - 2.0 * em * xy + r2;
        w.eval_scaled(v, grow) * ls / dist2.powf(0.5 * (dim.nf() - 2.0))
    };
    let ctl = QuadratureControl {
        abs_tol: q.abs_tol / prefactor,
        max_subdivisions: q.max_subdivisions,
    };
    let r = integrate_semi_infinite(integrand, 0.5 * net_decay, &ctl).map_err(|e| scale_quad_error(e, prefactor))?;
    Ok(prefactor * r.value)
}

fn scale_quad_error(e: Error, s: f64) -> Error {
    match e {
        Error::Quadrature {
            value,
            achieved,
            tol,
            panels,
        } => Error::Quadrature {
            value: value * s,
            achieved: achieved * s,
            tol: tol * s,
            panels,
        },
        other => other,
    }
}

/// Squared distances used by the Kelvin-point terms:
/// `|y|²|x − y*|²` and `|y|²|x e^{−v} − y*|²` with `y* = r²y/|y|²`,
/// expanded so that `y → 0` is harmless.
struct Kelvin {
    x2: f64,
    y2: f64,
    xy: f64,
    r2: f64,
}

impl Kelvin {
    fn at(&self, em: f64) -> f64 {
        self.x2 * self.y2 * em * em - 2.0 * self.r2 * em * self.xy + self.r2 * self.r2
    }
}

fn green_inputs(domain: &BallDomain, x: &Point, y: &Point) -> Result<(Kelvin, f64)> {
    if x.dim() != y.dim() {
        return invalid("point dimensions differ");
    }
    let r2 = domain.r2();
    let (x2, y2) = (x.norm_sqr(), y.norm_sqr());
    if !(x2 < r2 && y2 < r2) {
        return invalid("closed-form Green functions need interior points |x|, |y| < r");
    }
    let d = x.dist_sqr(y);
    if d == 0.0 {
        return invalid("Green function is singular at x = y");
    }
    Ok((
        Kelvin {
            x2,
            y2,
            xy: x.dot(y),
            r2,
        },
        d,
    ))
}

/// Closed-form Green function for `n = 4`:
/// `G = (1/4π²) [ (1−|x|²)(1−|y|²)(1/|x−y|² − r²/(|y|²|x−y*|²))
///   − 4 (log(1/|x−y|) − log(r/(|y||x−y*|)))
///   + (r²−|x|²)(r²−|y|²) ∫_0^∞ w(v)/(|y|²|x e^{−v} − y*|²) dv ]`.
pub fn green_closed_n4(domain: &BallDomain, x: &Point, y: &Point, q: &QuadratureControl) -> Result<f64> {
    if domain.dim.n() != 4 {
        return invalid("green_closed_n4 needs n = 4");
    }
    let (kv, d) = green_inputs(domain, x, y)?;
    let (x2, y2, r2) = (kv.x2, kv.y2, kv.r2);
    let k0 = kv.at(1.0);
    let rate = 2.0 / (1.0 - r2);
    let amp = 2.0 * (1.0 + r2) / (1.0 - r2);
    let coupling = (r2 - x2) * (r2 - y2);
    let ctl = QuadratureControl {
        abs_tol: q.abs_tol * 4.0 * PI * PI / coupling.max(1e-300),
        max_subdivisions: q.max_subdivisions,
    };
    let integral = integrate_semi_infinite(
        |v| {
            let em = (-v).exp();
            amp * (-rate * v).exp() / kv.at(em)
        },
        0.5 * rate,
        &ctl,
    )?
    .value;
    let direct = (1.0 - x2) * (1.0 - y2) * (1.0 / d - r2 / k0);
    // log(1/|x−y|) − log(r/(|y||x−y*|)) = −½ log|x−y|² − log r + ½ log(|y|²|x−y*|²)
    let logs = -0.5 * d.ln() - 0.5 * r2.ln() + 0.5 * k0.ln();
    Ok((direct - 4.0 * logs + coupling * integral) / (4.0 * PI * PI))
}

/// Closed-form Green function for `n = 6`:
///
/// ```text
/// G = (1/4π³) [ (1−|x|²)²(1−|y|²)² (1/|x−y|⁴ − r⁴/(|y|⁴|x−y*|⁴))
///             − 6(1−|x|²)(1−|y|²)(1/|x−y|² − r²/(|y|²|x−y*|²))
///             + 24 (log(1/|x−y|) − log(r/(|y||x−y*|)))
///             − 12 (r²−|x|²)(r²−|y|²)/(|y|²|x−y*|²)
///             + 6 (r²−|x|²)(r²−|y|²) ∫_0^∞ W(v)/(|y|⁴|x e^{−v} − y*|⁴) dv ]
/// ```
///
/// with `W = f₁ e^{−bv} cosh cv + f₂ e^{−bv} sinh(cv)/(2(1−r²)c)` (and the
/// critical/oscillatory analogues), where
/// `f₁ = r²(1+r²)/(1−r²)(1−|x|²)(1−|y|²) + 2(1−|x|²|y|²) − 2(1−r⁴)` and
/// `f₂ = −3r²(1+r²)²/(1−r²)(1−|x|²)(1−|y|²) + 2(2r⁴+5r²−1)(1−|x|²|y|²) + 2(1−r²)³`.
pub fn green_closed_n6(domain: &BallDomain, x: &Point, y: &Point, q: &QuadratureControl) -> Result<f64> {
    if domain.dim.n() != 6 {
        return invalid("green_closed_n6 needs n = 6");
    }
    let (kv, d) = green_inputs(domain, x, y)?;
    let (x2, y2, r2) = (kv.x2, kv.y2, kv.r2);
    let k0 = kv.at(1.0);
    let damped = Damped::for_six(r2);
    let (px, py) = (1.0 - x2, 1.0 - y2);
    let f1 = r2 * (1.0 + r2) / (1.0 - r2) * px * py + 2.0 * (1.0 - x2 * y2) - 2.0 * (1.0 - r2 * r2);
    let f2 = -3.0 * r2 * (1.0 + r2).powi(2) / (1.0 - r2) * px * py
        + 2.0 * (2.0 * r2 * r2 + 5.0 * r2 - 1.0) * (1.0 - x2 * y2)
        + 2.0 * (1.0 - r2).powi(3);
    let odd_amp = f2 / (2.0 * (1.0 - r2));
    let coupling = (r2 - x2) * (r2 - y2);
    let ctl = QuadratureControl {
        abs_tol: q.abs_tol * 4.0 * PI.powi(3) / (6.0 * coupling).max(1e-300),
        max_subdivisions: q.max_subdivisions,
    };
    let integral = integrate_semi_infinite(
        |v| {
            let (even, odd) = damped.eval(v, 0.0);
            let kk = kv.at((-v).exp());
            (f1 * even + odd_amp * odd) / (kk * kk)
        },
        0.5 * damped.decay_rate(),
        &ctl,
    )?
    .value;
    let direct4 = px * px * py * py * (1.0 / (d * d) - r2 * r2 / (k0 * k0));
    let direct2 = -6.0 * px * py * (1.0 / d - r2 / k0);
    let logs = -0.5 * d.ln() - 0.5 * r2.ln() + 0.5 * k0.ln();
    let value = direct4 + direct2 + 24.0 * logs - 12.0 * coupling / k0 + 6.0 * coupling * integral;
    Ok(value / (4.0 * PI.powi(3)))
}

/// `k² |F_k(z) − (1−z)^ρ − (n/2)ρ z (1−z)^{ρ−1}/(k + n/2)|`, the scaled
/// remainder of the two-term large-`k` expansion of `F_k`.
///
/// `F_k(z) − (1−z)^ρ = Σ_i (−ρ)_i z^i/i! · ((k)_i/(k+n/2)_i − 1)` is summed with
/// the bracket obtained from a cancellation-free recurrence, so the result is
/// accurate even when the remainder is far below the size of `F_k`.
pub fn conjecture1_residual(dim: Dimension, z: f64, k: f64) -> Result<f64> {
    if !(z > 0.0 && z < 1.0) {
        return invalid(format!("conjecture1_residual needs z in (0, 1), got {z}"));
    }
    if !(k > 0.0) {
        return invalid(format!("conjecture1_residual needs k > 0, got {k}"));
    }
    let rho = dim.rho();
    let half = dim.half();
    let stop = dim.rho_int();
    let mut excess = 0.0;
    // coef = (−ρ)_i z^i / i!, dev = (k)_i/(k+n/2)_i − 1
    let mut coef = 1.0;
    let mut dev = 0.0;
    let mut i = 0u32;
    loop {
        let fi = f64::from(i);
        excess += coef * dev;
        if let Some(l) = stop {
            if i == l {
                break;
            }
        }
        let step = half / (k + half + fi);
        dev = dev * (1.0 - step) - step;
        coef *= (fi - rho) * z / (fi + 1.0);
        if stop.is_none() && (coef.abs() / (1.0 - z) < 1e-18 || coef == 0.0) {
            break;
        }
        i += 1;
        if i > 1_000_000 {
            return Err(Error::Numerical("conjecture1 series did not converge".into()));
        }
    }
    let second = half * rho * z * (1.0 - z).powf(rho - 1.0) / (k + half);
    Ok(k * k * (excess - second).abs())
}

/// Axis-aligned rectangle in the complex `k`-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) {
            return invalid("rectangle needs re_min < re_max and im_min < im_max");
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }
}

/// Outcome of a zero count by the argument principle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCount {
    pub count: i64,
    /// Winding number before rounding.
    pub winding: f64,
    /// Boundary nodes used by the accepted evaluation.
    pub nodes: usize,
    /// Smallest `|f|` seen on the contour.
    pub min_abs: f64,
    /// Whether the rectangle lies in `Re k ≥ −n/2 − ε` (the conjectured
    /// zero-free half-plane, with `ε` = [`CONJECTURE_PROBE_EPS`]).
    pub in_conjecture_region: bool,
}

const ZERO_COUNT_START_NODES: usize = 4096;
const ZERO_COUNT_MAX_NODES: usize = 1 << 20;

fn winding_number(dim: Dimension, z: f64, rect: &Rect, nodes: usize) -> Result<(f64, f64, f64)> {
    let corners = [
        Complex64::new(rect.re_min, rect.im_min),
        Complex64::new(rect.re_max, rect.im_min),
        Complex64::new(rect.re_max, rect.im_max),
        Complex64::new(rect.re_min, rect.im_max),
    ];
    let perimeter = 2.0 * ((rect.re_max - rect.re_min) + (rect.im_max - rect.im_min));
    let mut total = 0.0;
    let mut max_step = 0.0f64;
    let mut min_abs = f64::INFINITY;
    let first = f_entire(dim, z, corners[0])?;
    let mut prev = first;
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        let m = (((b - a).norm() / perimeter) * nodes as f64).ceil().max(16.0) as usize;
        for j in 1..=m {
            let k = a + (b - a) * (j as f64 / m as f64);
            let cur = if e == 3 && j == m { first } else { f_entire(dim, z, k)? };
            if !(cur.norm().is_finite()) {
                return Err(Error::Numerical(format!("f_entire is not finite at k = {k}")));
            }
            min_abs = min_abs.min(cur.norm());
            if cur.norm() == 0.0 {
                return Err(Error::ContourNearZero { min_abs: 0.0 });
            }
            let step = (cur / prev).arg();
            max_step = max_step.max(step.abs());
            total += step;
            prev = cur;
        }
    }
    Ok((total / (2.0 * PI), max_step, min_abs))
}

/// Counts zeros of `f_entire(dim, z, ·)` inside `rect` by summing principal
/// argument increments along the boundary.
///
/// The node count starts at 4096 and doubles until two consecutive winding
/// numbers agree to within 0.25 of the same integer and no single increment
/// exceeds π/2. A contour that cannot be resolved this way passes too close
/// to a zero and is reported as [`Error::ContourNearZero`].
pub fn conjecture2_zero_count(dim: Dimension, z: f64, rect: &Rect) -> Result<ZeroCount> {
    let mut nodes = ZERO_COUNT_START_NODES;
    let (mut w_prev, mut step_prev, mut min_prev) = winding_number(dim, z, rect, nodes)?;
    while nodes < ZERO_COUNT_MAX_NODES {
        nodes *= 2;
        let (w, step, min_abs) = winding_number(dim, z, rect, nodes)?;
        let rounded = w.round();
        let settled = (w - rounded).abs() < 0.25
            && (w_prev - rounded).abs() < 0.25
            && step < 0.5 * PI
            && step_prev < 0.5 * PI;
        if settled {
            return Ok(ZeroCount {
                count: rounded as i64,
                winding: w,
                nodes,
                min_abs,
                in_conjecture_region: rect.re_min >= -dim.half() - CONJECTURE_PROBE_EPS,
            });
        }
        w_prev = w;
        step_prev = step;
        min_prev = min_abs;
    }
    Err(Error::ContourNearZero { min_abs: min_prev })
}

/// `F_k(z)/Γ(k + n/2)` for real `k ≥ 0` via the real-variable evaluator,
/// used to cross-check [`f_entire`].
pub fn f_entire_real(dim: Dimension, z: f64, k: u32) -> Result<f64> {
    Ok(f_k(dim, k, z)? / gamma(f64::from(k) + dim.half()))
}
