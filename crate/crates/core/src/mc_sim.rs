//! Monte Carlo simulation of hyperbolic Brownian motion up to the exit of a
//! ball, by two independent discretizations: the Cartesian SDE
//! `dX = (1 − |X|²)(dB + 2(n − 2)X dt)` and the polar pair `(R, Φ)` with
//! `R = |X|²`, `Φ = cos∠(x₀, X)`. Brownian increments follow the variance-2t
//! convention (`√(2 dt)·ξ`).
//!
//! From the exit samples this module estimates normalized Gegenbauer
//! coefficients of the exit law, the Feynman–Kac gauge
//! `E exp(−∫ q(R_s) ds)` with `q(x) = k(k + n − 2)(1 − x)²/x`, and an
//! empirical exit density.
//!
//! Every path draws from its own ChaCha8 stream selected by the path index,
//! so results are bit-identical regardless of thread scheduling.
//!
//! Two discretization refinements are available and enabled by default:
//!
//! * [`ExitRule::BrownianBridge`]: between grid points the path may leave the
//!   ball unseen; the bridge crossing probability
//!   `exp(−2(b − s₀)(b − s₁)/σ²)` decides such exits, and the exit point is
//!   drawn from the bridge at the interpolated crossing time.
//! * [`PotentialRule::BridgeMean`]: the per-step integral of `q` is the
//!   Brownian-bridge expectation, evaluated with a 3×3 Gauss–Legendre ×
//!   Gauss–Hermite rule, instead of a left-endpoint value.
//!
//! The remaining weak first-order bias is removed by [`richardson`]
//! extrapolation from runs at `dt` and `2·dt`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::{unit_sphere_area, BallDomain, Point};
use crate::quadrature::gauss_legendre_integrate;
use crate::specfun::{gegenbauer_at_one, gegenbauer_sequence, Dimension};

/// Fraction of clamped steps above which a run is flagged as too coarse.
pub const CLAMP_WARNING_RATE: f64 = 0.01;

/// Seed offset used for the independent coarse companion run of
/// [`richardson_pair`].
pub const COARSE_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Which discretization to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Cartesian,
    Polar,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Cartesian => "cartesian",
            Scheme::Polar => "polar",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cartesian" => Ok(Scheme::Cartesian),
            "polar" => Ok(Scheme::Polar),
            _ => invalid(format!("unknown scheme '{s}' (expected cartesian or polar)")),
        }
    }
}

/// How the exit from the ball is detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitRule {
    /// First grid point outside the ball; the exit point is that grid point.
    GridCrossing,
    /// Grid crossing plus Brownian-bridge crossing between grid points, with
    /// the exit point sampled from the bridge.
    BrownianBridge,
}

impl ExitRule {
    pub fn name(self) -> &'static str {
        match self {
            ExitRule::GridCrossing => "grid",
            ExitRule::BrownianBridge => "bridge",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(ExitRule::GridCrossing),
            "bridge" => Ok(ExitRule::BrownianBridge),
            _ => invalid(format!("unknown exit rule '{s}' (expected grid or bridge)")),
        }
    }
}

/// How `∫ q(R_s) ds` is accumulated over one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialRule {
    /// `q(R_left)·dt`.
    LeftEndpoint,
    /// Expectation of the step integral over the Brownian bridge between the
    /// two grid values.
    BridgeMean,
}

impl PotentialRule {
    pub fn name(self) -> &'static str {
        match self {
            PotentialRule::LeftEndpoint => "left",
            PotentialRule::BridgeMean => "bridge-mean",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(PotentialRule::LeftEndpoint),
            "bridge-mean" => Ok(PotentialRule::BridgeMean),
            _ => invalid(format!("unknown potential rule '{s}' (expected left or bridge-mean)")),
        }
    }
}

/// Simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeConfig {
    pub dt: f64,
    pub max_steps: u64,
    pub n_paths: u64,
    pub seed: u64,
    /// Lower clamp for `R` in the polar and radial schemes.
    pub r_floor: f64,
    pub scheme: Scheme,
    pub exit_rule: ExitRule,
    pub potential_rule: PotentialRule,
}

impl Default for SdeConfig {
    fn default() -> Self {
        Self {
            dt: 5e-4,
            max_steps: 200_000,
            n_paths: 100_000,
            seed: 1,
            r_floor: 1e-6,
            scheme: Scheme::Cartesian,
            exit_rule: ExitRule::BrownianBridge,
            potential_rule: PotentialRule::BridgeMean,
        }
    }
}

impl SdeConfig {
    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        if self.max_steps == 0 {
            return invalid("max_steps must be at least 1");
        }
        if self.n_paths == 0 {
            return invalid("n_paths must be at least 1");
        }
        if !(self.r_floor > 0.0 && self.r_floor < 1.0) {
            return invalid(format!("r_floor must lie in (0, 1), got {}", self.r_floor));
        }
        Ok(())
    }

    /// The same configuration with a different step.
    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..*self }
    }
}

/// One simulated path, summarized at its exit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitSample {
    /// Index (1-based) of the step during which the exit happened, or
    /// `max_steps` for a censored path.
    pub tau_steps: u64,
    /// Exit time, including the fractional last step under bridge exits.
    pub exit_time: f64,
    /// `cos∠(x₀, X_τ)`, clamped to `[−1, 1]`. Zero for radial-only runs.
    pub phi_exit: f64,
    /// `∫₀^τ (1 − R_s)²/R_s ds`, i.e. `∫ q` divided by `k(k + n − 2)`.
    /// Present for the polar and radial schemes.
    pub potential_integral: Option<f64>,
    /// The path hit `max_steps` without leaving the ball.
    pub censored: bool,
}

/// Samples plus run diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub samples: Vec<ExitSample>,
    pub censored: u64,
    pub total_steps: u64,
    pub clamped_steps: u64,
    pub warnings: Vec<String>,
}

impl SimulationOutput {
    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.samples.len() as f64
    }

    pub fn clamp_rate(&self) -> f64 {
        if self.total_steps == 0 {
            0.0
        } else {
            self.clamped_steps as f64 / self.total_steps as f64
        }
    }

    fn from_paths(paths: Vec<PathResult>) -> Self {
        // ordered sequential reduction keeps the diagnostics deterministic
        let mut out = SimulationOutput {
            samples: Vec::with_capacity(paths.len()),
            censored: 0,
            total_steps: 0,
            clamped_steps: 0,
            warnings: Vec::new(),
        };
        for p in paths {
            out.censored += u64::from(p.sample.censored);
            out.total_steps += p.sample.tau_steps;
            out.clamped_steps += p.clamps;
            out.samples.push(p.sample);
        }
        let rate = out.clamp_rate();
        if rate > CLAMP_WARNING_RATE {
            out.warnings.push(format!(
                "R was clamped at r_floor in {:.3}% of steps; the step is too coarse",
                100.0 * rate
            ));
        }
        if out.censored > 0 {
            out.warnings.push(format!(
                "{} of {} paths reached max_steps without exiting",
                out.censored,
                out.samples.len()
            ));
        }
        out
    }
}

/// The Feynman–Kac potential `q(x) = k(k + n − 2)(1 − x)²/x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    pub k: u32,
    pub dim: Dimension,
}

impl Potential {
    pub fn new(dim: Dimension, k: u32) -> Self {
        Self { k, dim }
    }

    /// `k(k + n − 2)`, the spherical Laplacian eigenvalue.
    pub fn rate(&self) -> f64 {
        let k = f64::from(self.k);
        k * (k + self.dim.nf() - 2.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.rate() * unit_potential(x)
    }
}

fn unit_potential(x: f64) -> f64 {
    (1.0 - x) * (1.0 - x) / x
}

struct PathResult {
    sample: ExitSample,
    clamps: u64,
}

fn path_rng(seed: u64, path_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_id);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Gauss–Legendre nodes on `[0, 1]` with weights, 3 points.
const BRIDGE_TIME_RULE: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// Gauss–Hermite nodes for the standard normal with weights, 3 points.
const BRIDGE_NOISE_RULE: [(f64, f64); 3] = [
    (-1.732_050_807_568_877_2, 1.0 / 6.0),
    (0.0, 2.0 / 3.0),
    (1.732_050_807_568_877_2, 1.0 / 6.0),
];

/// Outcome of one radial step in the `R` variable.
struct RadialStep {
    next: f64,
    exited: bool,
    /// Fraction of the step elapsed at exit (1 when no exit).
    fraction: f64,
    clamped: bool,
}

/// One Euler step of `dR = 2(1 − R)(√R dW + ((n − 4)R + n)dt)` with exit
/// detection at `r2`.
fn radial_step(n: f64, rr: f64, r2: f64, cfg: &SdeConfig, xi: f64, rng: &mut ChaCha8Rng) -> RadialStep {
    let dt = cfg.dt;
    let mut next = rr + 2.0 * (1.0 - rr) * (rr.sqrt() * (2.0 * dt).sqrt() * xi + ((n - 4.0) * rr + n) * dt);
    let clamped = next < cfg.r_floor;
    if clamped {
        next = cfg.r_floor;
    }
    if next >= r2 {
        let fraction = match cfg.exit_rule {
            ExitRule::GridCrossing => 1.0,
            ExitRule::BrownianBridge => (r2 - rr) / (next - rr),
        };
        return RadialStep {
            next,
            exited: true,
            fraction,
            clamped,
        };
    }
    if cfg.exit_rule == ExitRule::BrownianBridge {
        let variance = 8.0 * (1.0 - rr) * (1.0 - rr) * rr * dt;
        let p = (-2.0 * (r2 - rr) * (r2 - next) / variance).exp();
        if rng.random::<f64>() < p {
            return RadialStep {
                next,
                exited: true,
                fraction: 0.5,
                clamped,
            };
        }
    }
    RadialStep {
        next,
        exited: false,
        fraction: 1.0,
        clamped,
    }
}

/// `∫ (1 − R)²/R ds` over a step of length `h` from `rr` to `end`.
fn potential_step(rr: f64, end: f64, h: f64, cfg: &SdeConfig) -> f64 {
    match cfg.potential_rule {
        PotentialRule::LeftEndpoint => unit_potential(rr) * h,
        PotentialRule::BridgeMean => {
            let spread = (8.0 * (1.0 - rr) * (1.0 - rr) * rr * h).sqrt();
            let mut acc = 0.0;
            for &(s, ws) in &BRIDGE_TIME_RULE {
                let sd = (s * (1.0 - s)).sqrt() * spread;
                for &(x, wx) in &BRIDGE_NOISE_RULE {
                    let m = (rr + s * (end - rr) + sd * x).clamp(cfg.r_floor, 1.0 - 1e-12);
                    acc += ws * wx * unit_potential(m);
                }
            }
            acc * h
        }
    }
}

fn check_polar_start(r0_sq: f64, domain: &BallDomain, cfg: &SdeConfig) -> Result<()> {
    cfg.validate()?;
    if !(r0_sq > 0.0 && r0_sq < domain.r2()) {
        return invalid(format!(
            "starting R must lie in (0, r²) = (0, {}), got {r0_sq}",
            domain.r2()
        ));
    }
    Ok(())
}

/// Simulates the Cartesian SDE from `x0` until `|X| ≥ r`.
pub fn simulate_cartesian(x0: &Point, domain: &BallDomain, cfg: &SdeConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    let n = domain.dim.n() as usize;
    if x0.dim() != n {
        return invalid(format!("starting point has dimension {}, expected {n}", x0.dim()));
    }
    let a0 = x0.norm();
    if !(a0 > 0.0) {
        return invalid("the Cartesian scheme needs a non-zero starting point (Φ is undefined at 0)");
    }
    if a0 >= domain.r {
        return invalid(format!("starting point must lie inside the ball (|x0| = {a0} ≥ r = {})", domain.r));
    }
    let axis: Vec<f64> = x0.coords().iter().map(|c| c / a0).collect();
    let paths: Vec<PathResult> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|id| cartesian_path(x0.coords(), &axis, domain, cfg, id))
        .collect();
    Ok(SimulationOutput::from_paths(paths))
}

fn cartesian_path(x0: &[f64], axis: &[f64], domain: &BallDomain, cfg: &SdeConfig, id: u64) -> PathResult {
    let mut rng = path_rng(cfg.seed, id);
    let n = x0.len();
    let drift = 2.0 * (domain.dim.nf() - 2.0) * cfg.dt;
    let sq = (2.0 * cfg.dt).sqrt();
    let r = domain.r;
    let mut x = x0.to_vec();
    let mut next = vec![0.0; n];
    let cos_to_axis = |p: &[f64]| {
        let norm = p.iter().map(|c| c * c).sum::<f64>().sqrt();
        let dot: f64 = p.iter().zip(axis).map(|(a, b)| a * b).sum();
        (dot / norm).clamp(-1.0, 1.0)
    };
    for step in 1..=cfg.max_steps {
        let s0sq: f64 = x.iter().map(|c| c * c).sum();
        let s0 = s0sq.sqrt();
        let scale = 1.0 - s0sq;
        for i in 0..n {
            next[i] = x[i] + scale * (sq * normal(&mut rng) + drift * x[i]);
        }
        let s1 = next.iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut exit_fraction = None;
        if s1 >= r {
            exit_fraction = Some(match cfg.exit_rule {
                ExitRule::GridCrossing => 1.0,
                ExitRule::BrownianBridge => (r - s0) / (s1 - s0),
            });
        } else if cfg.exit_rule == ExitRule::BrownianBridge {
            let p = (-(r - s0) * (r - s1) / (scale * scale * cfg.dt)).exp();
            if rng.random::<f64>() < p {
                exit_fraction = Some(0.5);
            }
        }
        if let Some(theta) = exit_fraction {
            let phi = match cfg.exit_rule {
                ExitRule::GridCrossing => cos_to_axis(&next),
                ExitRule::BrownianBridge => {
                    let spread = (theta * (1.0 - theta) * 2.0 * cfg.dt).sqrt() * scale;
                    let point: Vec<f64> = x
                        .iter()
                        .zip(&next)
                        .map(|(a, b)| a + theta * (b - a) + spread * normal(&mut rng))
                        .collect();
                    cos_to_axis(&point)
                }
            };
            return PathResult {
                sample: ExitSample {
                    tau_steps: step,
                    exit_time: (step as f64 - 1.0 + theta) * cfg.dt,
                    phi_exit: phi,
                    potential_integral: None,
                    censored: false,
                },
                clamps: 0,
            };
        }
        std::mem::swap(&mut x, &mut next);
    }
    PathResult {
        sample: ExitSample {
            tau_steps: cfg.max_steps,
            exit_time: cfg.max_steps as f64 * cfg.dt,
            phi_exit: cos_to_axis(&x),
            potential_integral: None,
            censored: true,
        },
        clamps: 0,
    }
}

/// Simulates the polar pair `(R, Φ)` from `(r0_sq, 1)` until `R ≥ r²`.
///
/// The angular drift uses the step average of `(1 − R)²/R` produced by the
/// configured [`PotentialRule`], so the angle and the gauge share one clock.
pub fn simulate_polar(r0_sq: f64, domain: &BallDomain, cfg: &SdeConfig) -> Result<SimulationOutput> {
    check_polar_start(r0_sq, domain, cfg)?;
    let paths: Vec<PathResult> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|id| polar_path(r0_sq, domain, cfg, id, true))
        .collect();
    Ok(SimulationOutput::from_paths(paths))
}

/// Simulates `R` alone (no angle), accumulating the potential integral.
pub fn simulate_radial(r0_sq: f64, domain: &BallDomain, cfg: &SdeConfig) -> Result<SimulationOutput> {
    check_polar_start(r0_sq, domain, cfg)?;
    let paths: Vec<PathResult> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|id| polar_path(r0_sq, domain, cfg, id, false))
        .collect();
    Ok(SimulationOutput::from_paths(paths))
}

fn polar_path(r0_sq: f64, domain: &BallDomain, cfg: &SdeConfig, id: u64, with_angle: bool) -> PathResult {
    let mut rng = path_rng(cfg.seed, id);
    let n = domain.dim.nf();
    let r2 = domain.r2();
    let sq = (2.0 * cfg.dt).sqrt();
    let (mut rr, mut phi, mut clock) = (r0_sq, 1.0_f64, 0.0);
    let mut clamps = 0;
    for step in 1..=cfg.max_steps {
        let xi_r = normal(&mut rng);
        let xi_phi = if with_angle { normal(&mut rng) } else { 0.0 };
        let rs = radial_step(n, rr, r2, cfg, xi_r, &mut rng);
        clamps += u64::from(rs.clamped);
        let h = rs.fraction * cfg.dt;
        let end = if rs.exited && cfg.exit_rule == ExitRule::BrownianBridge {
            r2
        } else {
            rs.next
        };
        let increment = potential_step(rr, end, h, cfg);
        let mut phi_exit = 0.0;
        if with_angle {
            let mean_q = if h > 0.0 { increment / h } else { unit_potential(rr) };
            let diffusion = (1.0 - rr) * ((1.0 - phi * phi).max(0.0) / rr).sqrt();
            let next_phi = (phi + diffusion * sq * xi_phi - (n - 1.0) * mean_q * phi * cfg.dt).clamp(-1.0, 1.0);
            if rs.exited {
                phi_exit = match cfg.exit_rule {
                    ExitRule::GridCrossing => next_phi,
                    ExitRule::BrownianBridge => {
                        let theta = rs.fraction;
                        let spread = (theta * (1.0 - theta) * 2.0 * cfg.dt).sqrt() * diffusion;
                        (phi + theta * (next_phi - phi) + spread * normal(&mut rng)).clamp(-1.0, 1.0)
                    }
                };
            }
            phi = next_phi;
        }
        clock += increment;
        if rs.exited {
            return PathResult {
                sample: ExitSample {
                    tau_steps: step,
                    exit_time: (step as f64 - 1.0 + rs.fraction) * cfg.dt,
                    phi_exit,
                    potential_integral: Some(clock),
                    censored: false,
                },
                clamps,
            };
        }
        rr = rs.next;
    }
    PathResult {
        sample: ExitSample {
            tau_steps: cfg.max_steps,
            exit_time: cfg.max_steps as f64 * cfg.dt,
            phi_exit: if with_angle { phi } else { 0.0 },
            potential_integral: Some(clock),
            censored: true,
        },
        clamps,
    }
}

/// Dispatches on `cfg.scheme`: Cartesian from `x0`, or polar from `|x0|²`.
pub fn simulate(x0: &Point, domain: &BallDomain, cfg: &SdeConfig) -> Result<SimulationOutput> {
    match cfg.scheme {
        Scheme::Cartesian => simulate_cartesian(x0, domain, cfg),
        Scheme::Polar => simulate_polar(x0.norm_sqr(), domain, cfg),
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `(mean − target)/std_error`; zero when both the error and the
    /// deviation vanish.
    pub fn z_score(&self, target: f64) -> f64 {
        let dev = self.mean - target;
        if dev == 0.0 {
            0.0
        } else {
            dev / self.std_error
        }
    }

    /// `(a − b)/√(se_a² + se_b²)`.
    pub fn combined_z(&self, other: &Estimate) -> f64 {
        let dev = self.mean - other.mean;
        if dev == 0.0 {
            0.0
        } else {
            dev / self.std_error.hypot(other.std_error)
        }
    }
}

fn mean_and_error(values: impl Iterator<Item = f64>) -> Estimate {
    let (mut count, mut sum, mut sum_sq) = (0.0, 0.0, 0.0);
    for v in values {
        count += 1.0;
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / count;
    let var = ((sum_sq / count - mean * mean) * count / (count - 1.0)).max(0.0);
    Estimate {
        mean,
        std_error: (var / count).sqrt(),
    }
}

/// Empirical normalized Gegenbauer coefficients `E C_k(Φ_τ)/C_k(1)` for
/// `k = 0..=k_max`, over uncensored samples.
pub fn gegenbauer_estimates(samples: &[ExitSample], dim: Dimension, k_max: u32) -> Result<Vec<Estimate>> {
    let used: Vec<&ExitSample> = samples.iter().filter(|s| !s.censored).collect();
    if used.len() < 2 {
        return invalid("at least two uncensored samples are needed");
    }
    let rho = dim.rho();
    let norms: Vec<f64> = (0..=k_max).map(|k| gegenbauer_at_one(rho, k)).collect();
    let values: Vec<Vec<f64>> = used
        .iter()
        .map(|s| {
            gegenbauer_sequence(rho, k_max, s.phi_exit)
                .iter()
                .zip(&norms)
                .map(|(c, nk)| c / nk)
                .collect()
        })
        .collect();
    Ok((0..=k_max as usize)
        .map(|k| mean_and_error(values.iter().map(|v| v[k])))
        .collect())
}

/// Gauge estimate `E exp(−∫ q_k(R_s) ds)` from samples carrying the
/// potential integral.
pub fn gauge_from_samples(samples: &[ExitSample], dim: Dimension, k: u32) -> Result<Estimate> {
    let rate = Potential::new(dim, k).rate();
    let mut values = Vec::with_capacity(samples.len());
    for s in samples.iter().filter(|s| !s.censored) {
        match s.potential_integral {
            Some(i) => values.push((-rate * i).exp()),
            None => return invalid("samples carry no potential integral (use the polar or radial scheme)"),
        }
    }
    if values.len() < 2 {
        return invalid("at least two uncensored samples are needed");
    }
    Ok(mean_and_error(values.into_iter()))
}

/// Gauge estimate together with the run's censoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeEstimate {
    pub estimate: Estimate,
    pub censored_fraction: f64,
}

/// Simulates `R` from `r0_sq` and estimates the order-`k` gauge.
pub fn estimate_gauge(dim: Dimension, k: u32, r0_sq: f64, domain: &BallDomain, cfg: &SdeConfig) -> Result<GaugeEstimate> {
    if dim != domain.dim {
        return invalid("dimension does not match the domain");
    }
    let out = simulate_radial(r0_sq, domain, cfg)?;
    Ok(GaugeEstimate {
        estimate: gauge_from_samples(&out.samples, dim, k)?,
        censored_fraction: out.censored_fraction(),
    })
}

/// Richardson extrapolation `2·fine − coarse` for a weak first-order bias,
/// where `coarse` used twice the step of `fine` and independent randomness.
pub fn richardson(fine: &Estimate, coarse: &Estimate) -> Estimate {
    Estimate {
        mean: 2.0 * fine.mean - coarse.mean,
        std_error: (4.0 * fine.std_error * fine.std_error + coarse.std_error * coarse.std_error).sqrt(),
    }
}

/// The configurations of a Richardson pair: `cfg` itself and a companion with
/// step `2·dt`, half the step budget and an independent seed.
pub fn richardson_pair(cfg: &SdeConfig) -> (SdeConfig, SdeConfig) {
    let coarse = SdeConfig {
        dt: 2.0 * cfg.dt,
        max_steps: cfg.max_steps.div_ceil(2),
        seed: cfg.seed.wrapping_add(COARSE_SEED_OFFSET),
        ..*cfg
    };
    (*cfg, coarse)
}

/// One bin of an empirical exit density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityBin {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub count: u64,
    /// Estimated density w.r.t. surface measure; `None` for empty bins.
    pub density: Option<f64>,
    /// Counting (Poisson) error of the density; `None` for empty bins.
    pub error: Option<f64>,
    /// Surface measure `ω_{n−2} r^{n−1} ∫_bin sin^{n−2}θ dθ` of the bin.
    pub surface: f64,
}

/// Histogram of exit angles normalized to estimate the Poisson kernel
/// `P_r(x, ·)` as a function of the angle to `x`.
///
/// Each count is divided by the exact surface measure of its angular band.
pub fn empirical_exit_density(samples: &[ExitSample], dim: Dimension, r: f64, bins: usize) -> Result<Vec<DensityBin>> {
    if bins == 0 {
        return invalid("at least one bin is required");
    }
    if !(r > 0.0 && r < 1.0) {
        return invalid(format!("ball radius must lie in (0, 1), got {r}"));
    }
    let used: Vec<f64> = samples
        .iter()
        .filter(|s| !s.censored)
        .map(|s| s.phi_exit.clamp(-1.0, 1.0).acos())
        .collect();
    if used.len() < 10_000 {
        return invalid(format!("at least 10⁴ uncensored samples are needed, got {}", used.len()));
    }
    let width = std::f64::consts::PI / bins as f64;
    let mut counts = vec![0u64; bins];
    for theta in &used {
        let b = ((theta / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let total = used.len() as f64;
    let m = dim.n() - 2;
    let sphere = unit_sphere_area(m + 1) * r.powi(dim.n() as i32 - 1);
    Ok(counts
        .iter()
        .enumerate()
        .map(|(b, &count)| {
            let (lo, hi) = (b as f64 * width, (b + 1) as f64 * width);
            let surface = sphere * gauss_legendre_integrate(|t| t.sin().powi(m as i32), lo, hi, 16);
            let (density, error) = if count == 0 {
                (None, None)
            } else {
                let c = count as f64;
                (Some(c / (total * surface)), Some(c.sqrt() / (total * surface)))
            };
            DensityBin {
                theta_lo: lo,
                theta_hi: hi,
                count,
                density,
                error,
                surface,
            }
        })
        .collect())
}

/// What [`validate`] should compare.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationPlan {
    pub domain: BallDomain,
    /// `|x0|`; the start is `x0 = |x0|·e₁`.
    pub start_radius: f64,
    pub base: SdeConfig,
    pub schemes: Vec<Scheme>,
    /// Coefficients `k = 0..=k_max` are compared.
    pub k_max: u32,
    /// Gauges `k = 0..=gauge_k_max` are compared (polar scheme only).
    pub gauge_k_max: u32,
    /// Richardson-extrapolate from `dt` and `2·dt`; otherwise raw `dt` estimates.
    pub extrapolate: bool,
    /// Also report raw estimates at `2·dt`, `dt`, `dt/2` (not part of pass/fail).
    pub bias_curve: bool,
    /// Pass threshold on `|z|`.
    pub z_threshold: f64,
    /// Pass threshold on the censored fraction of every run.
    pub max_censored_fraction: f64,
}

impl ValidationPlan {
    /// The reference setup: both schemes, `k ≤ 5`, gauges `k ≤ 3`,
    /// extrapolated, `|z| < 3`, censoring below 0.1 %.
    pub fn new(domain: BallDomain, start_radius: f64, base: SdeConfig) -> Self {
        Self {
            domain,
            start_radius,
            base,
            schemes: vec![Scheme::Cartesian, Scheme::Polar],
            k_max: 5,
            gauge_k_max: 3,
            extrapolate: true,
            bias_curve: false,
            z_threshold: 3.0,
            max_censored_fraction: 1e-3,
        }
    }
}

/// Kind of statistic in a validation row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// Normalized Gegenbauer coefficient of the exit law.
    Coefficient,
    /// Feynman–Kac gauge.
    Gauge,
    /// Cartesian-versus-polar coefficient difference.
    CrossScheme,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Coefficient => "coefficient",
            Statistic::Gauge => "gauge",
            Statistic::CrossScheme => "cross-scheme",
        }
    }
}

/// One compared statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    /// `cartesian`, `polar`, or `cartesian-polar` for cross-scheme rows.
    pub scheme: String,
    pub statistic: Statistic,
    /// `richardson` or `raw`.
    pub method: &'static str,
    pub dt: f64,
    pub k: u32,
    /// Analytic value (cross-scheme rows: the Cartesian estimate).
    pub reference: f64,
    /// Monte Carlo value (cross-scheme rows: the polar estimate).
    pub empirical: f64,
    pub std_error: f64,
    pub z_score: f64,
    /// Whether the row enters the pass/fail decision.
    pub graded: bool,
}

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    /// `(scheme, dt, censored fraction)` for every simulation run.
    pub censoring: Vec<(Scheme, f64, f64)>,
    pub warnings: Vec<String>,
    pub max_abs_z: f64,
    pub passed: bool,
}

impl ValidationReport {
    fn empty() -> Self {
        Self {
            rows: Vec::new(),
            censoring: Vec::new(),
            warnings: Vec::new(),
            max_abs_z: 0.0,
            passed: true,
        }
    }
}

fn run_estimates(plan: &ValidationPlan, cfg: &SdeConfig, report: &mut ValidationReport) -> Result<(Vec<Estimate>, Vec<Estimate>)> {
    let dim = plan.domain.dim;
    let x0 = Point::polar(dim.n() as usize, plan.start_radius, 0.0);
    let out = simulate(&x0, &plan.domain, cfg)?;
    report.censoring.push((cfg.scheme, cfg.dt, out.censored_fraction()));
    for w in &out.warnings {
        report.warnings.push(format!("{} dt={}: {w}", cfg.scheme.name(), cfg.dt));
    }
    let coefficients = gegenbauer_estimates(&out.samples, dim, plan.k_max)?;
    let gauges = if cfg.scheme == Scheme::Polar {
        (0..=plan.gauge_k_max)
            .map(|k| gauge_from_samples(&out.samples, dim, k))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok((coefficients, gauges))
}

/// Simulates the configured schemes and compares exit-law coefficients and
/// gauges with the analytic Poisson coefficients, and the schemes with each
/// other.
pub fn validate(plan: &ValidationPlan) -> Result<ValidationReport> {
    plan.base.validate()?;
    if !(plan.start_radius > 0.0 && plan.start_radius < plan.domain.r) {
        return invalid(format!("start radius must lie in (0, r), got {}", plan.start_radius));
    }
    if plan.schemes.is_empty() {
        return invalid("at least one scheme is required");
    }
    let analytic: Vec<f64> = (0..=plan.k_max.max(plan.gauge_k_max))
        .map(|k| crate::kernels::poisson_coefficient(&plan.domain, k, plan.start_radius))
        .collect::<Result<_>>()?;
    let mut report = ValidationReport::empty();
    let mut finals: Vec<(Scheme, Vec<Estimate>)> = Vec::new();
    for &scheme in &plan.schemes {
        let cfg = SdeConfig { scheme, ..plan.base };
        let (coefficients, gauges, method) = if plan.extrapolate {
            let (fine, coarse) = richardson_pair(&cfg);
            let (cf, gf) = run_estimates(plan, &fine, &mut report)?;
            let (cc, gc) = run_estimates(plan, &coarse, &mut report)?;
            let c: Vec<Estimate> = cf.iter().zip(&cc).map(|(a, b)| richardson(a, b)).collect();
            let g: Vec<Estimate> = gf.iter().zip(&gc).map(|(a, b)| richardson(a, b)).collect();
            (c, g, "richardson")
        } else {
            let (c, g) = run_estimates(plan, &cfg, &mut report)?;
            (c, g, "raw")
        };
        for (stat, estimates) in [(Statistic::Coefficient, &coefficients), (Statistic::Gauge, &gauges)] {
            for (k, e) in estimates.iter().enumerate() {
                report.rows.push(ValidationRow {
                    scheme: scheme.name().to_string(),
                    statistic: stat,
                    method,
                    dt: cfg.dt,
                    k: k as u32,
                    reference: analytic[k],
                    empirical: e.mean,
                    std_error: e.std_error,
                    z_score: e.z_score(analytic[k]),
                    graded: true,
                });
            }
        }
        finals.push((scheme, coefficients));
    }
    if let [(_, a), (_, b)] = finals.as_slice() {
        for (k, (ea, eb)) in a.iter().zip(b).enumerate() {
            report.rows.push(ValidationRow {
                scheme: format!("{}-{}", finals[0].0.name(), finals[1].0.name()),
                statistic: Statistic::CrossScheme,
                method: if plan.extrapolate { "richardson" } else { "raw" },
                dt: plan.base.dt,
                k: k as u32,
                reference: ea.mean,
                empirical: eb.mean,
                std_error: ea.std_error.hypot(eb.std_error),
                z_score: eb.combined_z(ea),
                graded: true,
            });
        }
    }
    if plan.bias_curve {
        for &scheme in &plan.schemes {
            for factor in [2.0, 1.0, 0.5] {
                let base = SdeConfig { scheme, ..plan.base };
                let cfg = SdeConfig {
                    dt: factor * base.dt,
                    max_steps: (base.max_steps as f64 / factor).ceil() as u64,
                    ..base
                };
                // bias-curve runs are informational: their censoring is not graded
                let mut scratch = ValidationReport::empty();
                let (coefficients, gauges) = run_estimates(plan, &cfg, &mut scratch)?;
                report.warnings.extend(scratch.warnings);
                for (stat, estimates) in [(Statistic::Coefficient, &coefficients), (Statistic::Gauge, &gauges)] {
                    for (k, e) in estimates.iter().enumerate() {
                        report.rows.push(ValidationRow {
                            scheme: scheme.name().to_string(),
                            statistic: stat,
                            method: "raw",
                            dt: cfg.dt,
                            k: k as u32,
                            reference: analytic[k],
                            empirical: e.mean,
                            std_error: e.std_error,
                            z_score: e.z_score(analytic[k]),
                            graded: false,
                        });
                    }
                }
            }
        }
    }
    report.max_abs_z = report
        .rows
        .iter()
        .filter(|r| r.graded)
        .map(|r| r.z_score.abs())
        .fold(0.0, f64::max);
    let censor_ok = report.censoring.iter().all(|&(_, _, f)| f < plan.max_censored_fraction);
    report.passed = censor_ok && report.max_abs_z < plan.z_threshold;
    Ok(report)
}
