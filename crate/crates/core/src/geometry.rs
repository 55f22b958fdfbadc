//! Ball-model hyperbolic geometry: points, distances, sphere measures, angles.

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::specfun::{gamma, Dimension};

/// Largest deviation from `±1` that [`cos_angle`] silently clamps away.
pub const COS_CLAMP_SLACK: f64 = 4.0 * f64::EPSILON;

/// A point of `R^n`, typically inside the unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    /// Wraps a coordinate vector.
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    /// The origin of `R^n`.
    pub fn origin(n: usize) -> Self {
        Self::new(vec![0.0; n])
    }

    /// The point `radius · (cos θ, sin θ, 0, …, 0)` in `R^n`.
    ///
    /// Every axially symmetric configuration used here can be put in this
    /// plane: the first axis is the symmetry axis.
    pub fn polar(n: usize, radius: f64, theta: f64) -> Self {
        let mut coords = vec![0.0; n];
        coords[0] = radius * theta.cos();
        if n > 1 {
            coords[1] = radius * theta.sin();
        }
        Self::new(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `|self − other|²`.
    pub fn dist_sqr(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Point, b: f64) -> Point {
        Point::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point::new(self.coords.iter().map(|x| s * x).collect())
    }
}

/// A Euclidean ball `{|x| < r}` inside the ball model `D^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallDomain {
    pub dim: Dimension,
    pub r: f64,
}

impl BallDomain {
    /// Creates the domain, requiring `0 < r < 1`.
    pub fn new(dim: Dimension, r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return invalid(format!("ball radius must lie in (0, 1), got {r}"));
        }
        Ok(Self { dim, r })
    }

    /// `r²`.
    pub fn r2(&self) -> f64 {
        self.r * self.r
    }
}

fn check_same_dim(x: &Point, y: &Point) -> Result<()> {
    if x.dim() != y.dim() {
        return invalid(format!("point dimensions differ: {} vs {}", x.dim(), y.dim()));
    }
    Ok(())
}

/// Hyperbolic distance in the ball model.
///
/// Uses `cosh 2d = 1 + 2δ` with `δ = |x − y|²/((1 − |x|²)(1 − |y|²))`, rewritten
/// as `d = asinh(√δ)` to avoid the cancellation of `acosh` near zero.
pub fn hyperbolic_distance(x: &Point, y: &Point) -> Result<f64> {
    check_same_dim(x, y)?;
    let (nx, ny) = (x.norm_sqr(), y.norm_sqr());
    if nx >= 1.0 || ny >= 1.0 {
        return invalid("hyperbolic distance needs interior points (|x| < 1)");
    }
    let delta = x.dist_sqr(y) / ((1.0 - nx) * (1.0 - ny));
    Ok(delta.sqrt().asinh())
}

/// Hyperbolic radius `(1/2) log((1 + r)/(1 − r))` of the ball `{|x| < r}`.
pub fn hyperbolic_radius(domain: &BallDomain) -> f64 {
    domain.r.atanh()
}

/// Surface area `ω_{n−1} R^{n−1}` of the sphere of radius `R` in `R^n`,
/// where `ω_{n−1} = 2π^{n/2}/Γ(n/2)`.
pub fn sphere_area(dim: Dimension, radius: f64) -> Result<f64> {
    if !(radius > 0.0) {
        return invalid(format!("sphere radius must be positive, got {radius}"));
    }
    Ok(unit_sphere_area(dim.n()) * radius.powi(dim.n() as i32 - 1))
}

/// `ω_{m−1}`: area of the unit sphere in `R^m` (`m ≥ 1`; `ω_0 = 2`).
pub fn unit_sphere_area(m: u32) -> f64 {
    let half = f64::from(m) / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

/// `cos ∠(x, y)` clamped to `[−1, 1]`.
pub fn cos_angle(x: &Point, y: &Point) -> Result<f64> {
    check_same_dim(x, y)?;
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return invalid("cos_angle is undefined for the zero vector");
    }
    Ok((x.dot(y) / (nx * ny)).clamp(-1.0, 1.0))
}
