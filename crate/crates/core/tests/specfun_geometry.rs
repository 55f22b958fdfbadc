//! Special functions and ball geometry against independent oracles and
//! property-based invariants.

use std::f64::consts::PI;

use hypball::geometry::{cos_angle, hyperbolic_distance, hyperbolic_radius, sphere_area, unit_sphere_area};
use hypball::quadrature::gauss_legendre;
use hypball::specfun::{
    f_k, g_k, gamma, gegenbauer, gegenbauer_at_one, hyp2f1, pochhammer, wronskian_residual, HypParams, SERIES_TOL,
};
use hypball::{BallDomain, Dimension, Error, Point};
use proptest::prelude::*;

fn dim(n: u32) -> Dimension {
    Dimension::new(n).unwrap()
}

#[test]
fn hypergeometric_closed_forms() {
    for &z in &[0.05, 0.3, 0.7, 0.95] {
        // F(1, 1; 2; z) = −ln(1 − z)/z
        let v = hyp2f1(&HypParams::new(1.0, 1.0, 2.0, z), SERIES_TOL).unwrap();
        assert!((v + (1.0 - z).ln() / z).abs() < 1e-12 * v, "z={z}");
        // F(a, b; b; z) = (1 − z)^{−a}
        let v = hyp2f1(&HypParams::new(0.7, 2.3, 2.3, z), SERIES_TOL).unwrap();
        assert!((v - (1.0 - z).powf(-0.7)).abs() < 1e-12 * v, "z={z}");
        // F(½, 1; 3/2; z²) = atanh(z)/z
        let v = hyp2f1(&HypParams::new(0.5, 1.0, 1.5, z * z), SERIES_TOL).unwrap();
        assert!((v - z.atanh() / z).abs() < 1e-12 * v, "z={z}");
    }
    // terminating polynomial F(−2, b; c; z) = 1 − 2bz/c + b(b+1)z²/(c(c+1))
    let (b, c, z) = (1.5, 2.5, 0.4);
    let v = hyp2f1(&HypParams::new(-2.0, b, c, z), SERIES_TOL).unwrap();
    let exact = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0));
    assert!((v - exact).abs() < 1e-15);
    // a pole in γ without earlier termination is an error
    assert!(matches!(
        hyp2f1(&HypParams::new(0.5, 0.5, -2.0, 0.3), SERIES_TOL),
        Err(Error::HypergeometricPole { .. })
    ));
}

#[test]
fn gamma_and_pochhammer_values() {
    assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
    assert!((gamma(5.0) - 24.0).abs() < 1e-12);
    assert!((gamma(3.5) - 15.0 * PI.sqrt() / 8.0).abs() < 1e-13);
    assert_eq!(pochhammer(3.0, 0), 1.0);
    assert_eq!(pochhammer(3.0, 4), 3.0 * 4.0 * 5.0 * 6.0);
    assert_eq!(pochhammer(-2.0, 3), 0.0);
}

#[test]
fn four_dimensional_radial_solutions() {
    // n = 4: F_k(z) = 1 − kz/(k+2), G_k(z) = 1 − (k+2)z/k
    let d = dim(4);
    for k in 1..20u32 {
        let kf = f64::from(k);
        for &z in &[0.1, 0.5, 0.9] {
            assert!((f_k(d, k, z).unwrap() - (1.0 - kf * z / (kf + 2.0))).abs() < 1e-15);
            assert!((g_k(d, k, z).unwrap() - (1.0 - (kf + 2.0) * z / kf)).abs() < 1e-13);
        }
    }
}

#[test]
fn wronskian_holds_across_dimensions() {
    for n in 3..=8 {
        let d = dim(n);
        for k in 0..=30u32 {
            for j in 1..=19 {
                let z = 0.05 * f64::from(j);
                let r = wronskian_residual(d, k, z).unwrap().abs();
                assert!(r <= 1e-10 * (f64::from(k) + d.rho()), "n={n} k={k} z={z}: {r:e}");
            }
        }
    }
}

#[test]
fn large_order_limit_of_f_k() {
    for n in [3, 4, 5, 6, 8] {
        let d = dim(n);
        for &z in &[0.2f64, 0.5, 0.9] {
            let limit = (1.0 - z).powf(d.rho());
            let mut prev = f64::INFINITY;
            for k in [10u32, 20, 40, 80, 160, 320, 640] {
                let gap = (f_k(d, k, z).unwrap() - limit).abs();
                assert!(gap < 10.0 / f64::from(k), "n={n} z={z} k={k}: {gap}");
                assert!(gap <= prev, "not monotone: n={n} z={z} k={k}");
                prev = gap;
            }
        }
    }
}

#[test]
fn gegenbauer_orthogonality() {
    let (nodes, weights) = gauss_legendre(64);
    for n in 3..=6u32 {
        let d = dim(n);
        let rho = d.rho();
        let ratio = unit_sphere_area(n) / unit_sphere_area(n - 1);
        // substitute x = cos θ so the weight (1 − x²)^{(n−3)/2} becomes sin^{n−2}θ dθ
        for k in 0..=10u32 {
            for l in 0..=10u32 {
                let integral: f64 = nodes
                    .iter()
                    .zip(&weights)
                    .map(|(t, w)| {
                        let theta = 0.5 * PI * (t + 1.0);
                        let x = theta.cos();
                        w * gegenbauer(rho, k, x) * gegenbauer(rho, l, x) * theta.sin().powi(n as i32 - 2)
                    })
                    .sum::<f64>()
                    * 0.5
                    * PI;
                let expected = if k == l {
                    rho / (f64::from(k) + rho) * gegenbauer_at_one(rho, k) * ratio
                } else {
                    0.0
                };
                assert!((integral - expected).abs() < 1e-8, "n={n} k={k} l={l}: {integral} vs {expected}");
            }
        }
    }
}

#[test]
fn gegenbauer_ratio_at_one() {
    for n in 3..=8u32 {
        let rho = dim(n).rho();
        for k in 0..40u32 {
            let ratio = gegenbauer_at_one(rho, k + 1) / gegenbauer_at_one(rho, k);
            let expected = f64::from(n + k - 2) / f64::from(k + 1);
            assert!((ratio - expected).abs() < 1e-13 * expected);
        }
    }
}

#[test]
fn sphere_area_and_radius_examples() {
    assert!((sphere_area(dim(3), 1.0).unwrap() - 4.0 * PI).abs() < 1e-13);
    assert!((sphere_area(dim(4), 1.0).unwrap() - 2.0 * PI * PI).abs() < 1e-13);
    let d = BallDomain::new(dim(5), 0.5).unwrap();
    assert!((hyperbolic_radius(&d) - 0.5 * 3f64.ln()).abs() < 1e-15);
}

fn rotation(n: usize, angles: &[(usize, usize, f64)]) -> impl Fn(&Point) -> Point + '_ {
    move |p: &Point| {
        let mut c = p.coords().to_vec();
        for &(i, j, a) in angles {
            let (i, j) = (i % n, j % n);
            if i == j {
                continue;
            }
            let (s, co) = a.sin_cos();
            let (xi, xj) = (c[i], c[j]);
            c[i] = co * xi - s * xj;
            c[j] = s * xi + co * xj;
        }
        Point::new(c)
    }
}

fn interior_point(n: usize) -> impl Strategy<Value = Point> {
    (proptest::collection::vec(-1.0f64..1.0, n), 0.0f64..0.95).prop_map(|(v, radius)| {
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-9);
        Point::new(v.iter().map(|c| c * radius / norm).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gegenbauer_bounded_by_value_at_one(k in 0u32..=50, phi in 0.0f64..PI, v in 0.0f64..6.0) {
        let c = gegenbauer(v, k, phi.cos()).abs();
        let bound = gegenbauer_at_one(v, k);
        prop_assert!(c <= bound * (1.0 + 1e-12) + 1e-300, "C={c} bound={bound}");
    }

    #[test]
    fn wronskian_random_points(n in 3u32..=8, k in 0u32..=30, z in 0.01f64..0.97) {
        let d = dim(n);
        let r = wronskian_residual(d, k, z).unwrap().abs();
        prop_assert!(r <= 1e-10 * (f64::from(k) + d.rho()), "residual {r:e}");
    }

    #[test]
    fn distance_invariant_under_rotation(
        x in interior_point(5),
        y in interior_point(5),
        angles in proptest::collection::vec((0usize..5, 0usize..5, -PI..PI), 1..8),
    ) {
        let rot = rotation(5, &angles);
        let d0 = hyperbolic_distance(&x, &y).unwrap();
        let d1 = hyperbolic_distance(&rot(&x), &rot(&y)).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-12 * d0.max(1.0));
    }

    #[test]
    fn distance_triangle_inequality(x in interior_point(4), y in interior_point(4), z in interior_point(4)) {
        let dxy = hyperbolic_distance(&x, &y).unwrap();
        let dyz = hyperbolic_distance(&y, &z).unwrap();
        let dxz = hyperbolic_distance(&x, &z).unwrap();
        prop_assert!(dxz <= dxy + dyz + 1e-12);
    }

    #[test]
    fn distance_symmetric_and_origin_radial(x in interior_point(3)) {
        let o = Point::origin(3);
        let d = hyperbolic_distance(&o, &x).unwrap();
        prop_assert!((d - x.norm().atanh()).abs() < 1e-13);
        prop_assert_eq!(hyperbolic_distance(&x, &o).unwrap(), d);
    }

    #[test]
    fn sphere_area_scales_as_power(n in 3u32..=9, radius in 0.01f64..5.0) {
        let d = dim(n);
        let ratio = sphere_area(d, radius).unwrap() / radius.powi(n as i32 - 1);
        let unit = sphere_area(d, 1.0).unwrap();
        prop_assert!((ratio - unit).abs() < 1e-12 * unit);
    }

    #[test]
    fn cos_angle_stays_in_range(x in interior_point(6), s in 0.1f64..3.0) {
        prop_assume!(x.norm() > 1e-6);
        let c = cos_angle(&x, &x.scaled(s)).unwrap();
        prop_assert!(c <= 1.0 && 1.0 - c < 1e-14);
        let c = cos_angle(&x, &x.scaled(-s)).unwrap();
        prop_assert!(c >= -1.0 && 1.0 + c < 1e-14);
    }
}
