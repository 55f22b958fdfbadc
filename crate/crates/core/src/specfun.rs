//! Special-function substrate.
//!
//! Pochhammer symbols, Gauss hypergeometric series with exact termination,
//! the radial solutions `F_k(z) = F(k, -ρ; k + n/2; z)` and
//! `G_k(z) = F(-ρ, 2 - k - n; 2 - k - n/2; z)`, the logarithmic second
//! solution for `k = 0` in even dimension, Gegenbauer polynomials and the
//! complex reciprocal gamma function.
//!
//! All evaluation is in double precision. Derivatives are obtained by
//! differentiating the series term by term, never by finite differences.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Absolute tolerance used for the internal `F_k`/`G_k` evaluations.
///
/// The series values are O(1); summing until the remaining tail is below
/// 1e-17 leaves only rounding error.
pub const SERIES_TOL: f64 = 1e-17;

/// Hard cap on the number of terms of a non-terminating series.
const MAX_SERIES_TERMS: usize = 200_000;

/// Dimension `n ≥ 3` of the ball model together with `ρ = (n − 2)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimension {
    n: u32,
}

impl Dimension {
    /// Creates a dimension, rejecting `n < 3`.
    pub fn new(n: u32) -> Result<Self> {
        if n < 3 {
            return invalid(format!("dimension must be at least 3, got {n}"));
        }
        Ok(Self { n })
    }

    /// The dimension `n`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// `n` as a float.
    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    /// `ρ = (n − 2)/2`, exact in binary floating point.
    pub fn rho(&self) -> f64 {
        (f64::from(self.n) - 2.0) / 2.0
    }

    /// `n/2`.
    pub fn half(&self) -> f64 {
        f64::from(self.n) / 2.0
    }

    /// True when `n` is even (every series involved terminates).
    pub fn is_even(&self) -> bool {
        self.n.is_multiple_of(2)
    }

    /// `ρ` as an integer when `n` is even.
    pub fn rho_int(&self) -> Option<u32> {
        self.is_even().then(|| (self.n - 2) / 2)
    }
}

/// Pochhammer symbol `(a)_i = a (a + 1) ⋯ (a + i − 1)` as a direct product.
///
/// The product form returns an exact zero once a factor vanishes, which is
/// what the terminating series rely on.
pub fn pochhammer(a: f64, i: u32) -> f64 {
    let mut p = 1.0;
    for j in 0..i {
        p *= a + f64::from(j);
        if p == 0.0 {
            return 0.0;
        }
    }
    p
}

/// Parameters of a Gauss hypergeometric function `F(α, β; γ; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub z: f64,
}

impl HypParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, z: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            z,
        }
    }
}

fn non_positive_integer(x: f64) -> Option<u32> {
    (x <= 0.0 && x == x.round() && x > -(u32::MAX as f64)).then(|| (-x) as u32)
}

/// Index of the last non-zero term when `α` or `β` is a non-positive integer.
///
/// Validates the lower parameter: a non-positive integer `γ = −m` is only
/// admissible when the series stops at some `l ≤ m` (the supplemented
/// definition of `F(−l, β; −m; z)`).
fn termination_index(p: &HypParams) -> Result<Option<u32>> {
    let stop = match (non_positive_integer(p.alpha), non_positive_integer(p.beta)) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    if let Some(m) = non_positive_integer(p.gamma) {
        match stop {
            Some(l) if l <= m => {}
            _ => return Err(Error::HypergeometricPole { gamma: p.gamma }),
        }
    }
    Ok(stop)
}

/// Evaluates `F(α, β; γ; z)` for `|z| < 1`.
///
/// Terminating series (a non-positive integer upper parameter) are summed
/// exactly; otherwise terms are added until the current term plus a geometric
/// bound on the remainder is below `tol`.
pub fn hyp2f1(p: &HypParams, tol: f64) -> Result<f64> {
    hyp2f1_with_derivative(p, tol).map(|(v, _)| v)
}

/// Evaluates `F(α, β; γ; z)` and its `z`-derivative from the same series.
pub fn hyp2f1_with_derivative(p: &HypParams, tol: f64) -> Result<(f64, f64)> {
    if !(p.z.abs() < 1.0) {
        return invalid(format!("hypergeometric argument must satisfy |z| < 1, got {}", p.z));
    }
    if !(tol > 0.0) {
        return invalid("hypergeometric tolerance must be positive");
    }
    let stop = termination_index(p)?;
    let (a, b, c, z) = (p.alpha, p.beta, p.gamma, p.z);

    let mut value = 0.0;
    let mut deriv = 0.0;
    // coef = (a)_i (b)_i / ((c)_i i!), zi = z^i, zim1 = z^(i-1)
    let mut coef = 1.0;
    let mut zi = 1.0;
    let mut zim1 = 0.0;
    let mut i = 0usize;
    loop {
        let fi = i as f64;
        value += coef * zi;
        if i > 0 {
            deriv += fi * coef * zim1;
        }
        if let Some(l) = stop {
            if i == l as usize {
                return Ok((value, deriv));
            }
        }
        let ratio = (a + fi) * (b + fi) / ((c + fi) * (fi + 1.0));
        coef *= ratio;
        zim1 = zi;
        zi *= z;
        if stop.is_none() && i >= 1 {
            let next = (coef * zi).abs();
            let next_deriv = ((fi + 1.0) * coef * zim1).abs();
            let fj = fi + 1.0;
            let q = ((a + fj) * (b + fj) / ((c + fj) * (fj + 1.0)) * z).abs();
            let q_deriv = q * (fj + 1.0) / fj;
            if q_deriv < 1.0 {
                let tail = next / (1.0 - q);
                let tail_deriv = next_deriv / (1.0 - q_deriv);
                if tail <= tol && tail_deriv <= tol {
                    return Ok((value, deriv));
                }
            }
        }
        i += 1;
        if i > MAX_SERIES_TERMS {
            return Err(Error::Numerical(format!(
                "hypergeometric series F({a}, {b}; {c}; {z}) did not converge in {MAX_SERIES_TERMS} terms"
            )));
        }
    }
}

fn check_unit_interval(z: f64, what: &str) -> Result<()> {
    if !(0.0..1.0).contains(&z) {
        return invalid(format!("{what} requires z in [0, 1), got {z}"));
    }
    Ok(())
}

/// `F_k(z) = F(k, −ρ; k + n/2; z)`, the bounded radial solution.
pub fn f_k(dim: Dimension, k: u32, z: f64) -> Result<f64> {
    f_k_with_derivative(dim, k, z).map(|(v, _)| v)
}

/// `F_k(z)` together with `F_k'(z)`.
pub fn f_k_with_derivative(dim: Dimension, k: u32, z: f64) -> Result<(f64, f64)> {
    check_unit_interval(z, "F_k")?;
    let kf = f64::from(k);
    hyp2f1_with_derivative(
        &HypParams::new(kf, -dim.rho(), kf + dim.half(), z),
        SERIES_TOL,
    )
}

/// Which of the two candidate logarithmic `G_0` formulas (even `n`) to use.
///
/// [`G0Branch::General`] is the closed finite sum with a `z^ρ log z` term;
/// [`G0Branch::FlippedLeading`] flips the sign of its top-degree `z^{n−2}`
/// term, which is the variant that a worked four-dimensional example would
/// produce. [`g0_branch`] selects the correct one at runtime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum G0Branch {
    General,
    FlippedLeading,
}

impl G0Branch {
    pub fn name(&self) -> &'static str {
        match self {
            G0Branch::General => "general",
            G0Branch::FlippedLeading => "flipped-leading",
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut b = 1.0;
    for j in 0..k {
        b = b * f64::from(n - j) / f64::from(j + 1);
    }
    b
}

/// `G_0(z)` and its derivative for even `n` using the given branch.
pub fn g0_even_with_derivative(dim: Dimension, z: f64, branch: G0Branch) -> Result<(f64, f64)> {
    let Some(rho) = dim.rho_int() else {
        return invalid("the logarithmic G_0 formula applies to even dimensions only");
    };
    if !(z > 0.0 && z < 1.0) {
        return invalid(format!("logarithmic G_0 requires z in (0, 1), got {z}"));
    }
    let top = dim.n() - 2;
    let rhof = f64::from(rho);
    let mut value = 0.0;
    let mut deriv = 0.0;
    for i in 0..=top {
        if i == rho {
            continue;
        }
        let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let mut c = rhof * binomial(top, i) * sign / (f64::from(i) - rhof);
        if i == top && branch == G0Branch::FlippedLeading {
            c = -c;
        }
        value += c * z.powi(i as i32);
        if i > 0 {
            deriv += c * f64::from(i) * z.powi(i as i32 - 1);
        }
    }
    let sign = if (dim.n() / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    let c = rhof * binomial(top, rho) * sign;
    let zr = z.powi(rho as i32);
    let zr1 = z.powi(rho as i32 - 1);
    value += c * zr * z.ln();
    deriv += c * (rhof * zr1 * z.ln() + zr1);
    Ok((value, deriv))
}

/// Wronskian residuals of both `G_0` branches, maximised over a few sample
/// points, in the order `[General, FlippedLeading]`.
pub fn g0_branch_residuals(dim: Dimension) -> Result<[(G0Branch, f64); 2]> {
    let rho = dim.rho();
    let mut out: [(G0Branch, f64); 2] = [(G0Branch::General, 0.0), (G0Branch::FlippedLeading, 0.0)];
    for entry in out.iter_mut() {
        for &z in &[0.2, 0.5, 0.8] {
            let (g, dg) = g0_even_with_derivative(dim, z, entry.0)?;
            // F_0 ≡ 1, so the identity reduces to ρ G − z G' = ρ (1 − z)^{n−2}.
            let res = rho * g - z * dg - rho * (1.0 - z).powi(dim.n() as i32 - 2);
            entry.1 = entry.1.max(res.abs());
        }
    }
    Ok(out)
}

/// The `G_0` branch that satisfies the Wronskian identity in dimension `dim`.
///
/// Selection is cached per dimension for the lifetime of the process.
pub fn g0_branch(dim: Dimension) -> Result<G0Branch> {
    const CACHED: usize = 64;
    static CACHE: OnceLock<Vec<OnceLock<G0Branch>>> = OnceLock::new();
    let select = || -> Result<G0Branch> {
        let res = g0_branch_residuals(dim)?;
        Ok(if res[0].1 <= res[1].1 { res[0].0 } else { res[1].0 })
    };
    let n = dim.n() as usize;
    if n >= CACHED {
        return select();
    }
    let cache = CACHE.get_or_init(|| (0..CACHED).map(|_| OnceLock::new()).collect());
    if let Some(b) = cache[n].get() {
        return Ok(*b);
    }
    let b = select()?;
    Ok(*cache[n].get_or_init(|| b))
}

/// `G_k(z)`, the second radial solution.
pub fn g_k(dim: Dimension, k: u32, z: f64) -> Result<f64> {
    g_k_with_derivative(dim, k, z).map(|(v, _)| v)
}

/// `G_k(z)` together with `G_k'(z)`.
///
/// For `k = 0` and even `n` the logarithmic branch chosen by [`g0_branch`] is
/// used and `z = 0` is rejected.
pub fn g_k_with_derivative(dim: Dimension, k: u32, z: f64) -> Result<(f64, f64)> {
    if k == 0 && dim.is_even() {
        return g0_even_with_derivative(dim, z, g0_branch(dim)?);
    }
    check_unit_interval(z, "G_k")?;
    let kf = f64::from(k);
    let n = dim.nf();
    hyp2f1_with_derivative(
        &HypParams::new(-dim.rho(), 2.0 - kf - n, 2.0 - kf - n / 2.0, z),
        SERIES_TOL,
    )
}

/// Residual of the Wronskian-type identity
/// `(k+ρ) F_k G_k + z F_k' G_k − z F_k G_k' − (k+ρ)(1−z)^{n−2}`.
pub fn wronskian_residual(dim: Dimension, k: u32, z: f64) -> Result<f64> {
    if !(z > 0.0 && z < 1.0) {
        return invalid(format!("Wronskian residual requires z in (0, 1), got {z}"));
    }
    let (f, df) = f_k_with_derivative(dim, k, z)?;
    let (g, dg) = g_k_with_derivative(dim, k, z)?;
    let kr = f64::from(k) + dim.rho();
    Ok(kr * f * g + z * df * g - z * f * dg - kr * (1.0 - z).powi(dim.n() as i32 - 2))
}

/// Gegenbauer polynomial `C_k^{(v)}(x)`.
///
/// For `v = 0` the Chebyshev limit `C_0 = 1`, `C_k = 2 T_k / k` is used.
pub fn gegenbauer(v: f64, k: u32, x: f64) -> f64 {
    *gegenbauer_sequence(v, k, x).last().expect("sequence is non-empty")
}

/// `[C_0^{(v)}(x), …, C_kmax^{(v)}(x)]` by the three-term recurrence.
pub fn gegenbauer_sequence(v: f64, kmax: u32, x: f64) -> Vec<f64> {
    let len = kmax as usize + 1;
    let mut out = Vec::with_capacity(len);
    if v == 0.0 {
        // Chebyshev T_k by recurrence, then C_k = 2 T_k / k.
        let (mut t0, mut t1) = (1.0, x);
        out.push(1.0);
        for k in 1..len {
            let tk = if k == 1 {
                t1
            } else {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
                t2
            };
            out.push(2.0 * tk / k as f64);
        }
        return out;
    }
    out.push(1.0);
    if len > 1 {
        out.push(2.0 * v * x);
    }
    for k in 2..len {
        let kf = k as f64;
        let next = (2.0 * x * (kf + v - 1.0) * out[k - 1] - (kf + 2.0 * v - 2.0) * out[k - 2]) / kf;
        out.push(next);
    }
    out
}

/// `C_k^{(v)}(1) = (2v)_k / k!` as an exact product; `2/k` in the Chebyshev
/// limit `v = 0`, consistent with [`gegenbauer`].
pub fn gegenbauer_at_one(v: f64, k: u32) -> f64 {
    if v == 0.0 && k > 0 {
        return 2.0 / f64::from(k);
    }
    let mut p = 1.0;
    for j in 0..k {
        let jf = f64::from(j);
        p *= (2.0 * v + jf) / (jf + 1.0);
    }
    p
}

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos approximation of `1/Γ(z)` for `Re z ≥ 1/2`, evaluated in
/// logarithmic form so large arguments neither overflow nor underflow early.
fn lanczos_recip_gamma(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (t - (z + 0.5) * t.ln()).exp() / ((2.0 * PI).sqrt() * acc)
}

/// `1/Γ(z)` for complex `z`, an entire function.
///
/// Exactly zero at the non-positive integers; uses the reflection formula
/// `1/Γ(z) = sin(πz) Γ(1 − z)/π` in the left half-plane.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Complex64::new(0.0, 0.0);
    }
    if z.re < 0.5 {
        (PI * z).sin() / (PI * lanczos_recip_gamma(1.0 - z))
    } else {
        lanczos_recip_gamma(z)
    }
}

/// Real gamma function `Γ(x)` (poles return infinity).
pub fn gamma(x: f64) -> f64 {
    let r = recip_gamma(Complex64::new(x, 0.0));
    if r.re == 0.0 {
        f64::INFINITY
    } else {
        1.0 / r.re
    }
}
