//! Exit-law simulation checked against the analytic exit law and gauges.

use hypball::geometry::unit_sphere_area;
use hypball::kernels::{poisson_coefficient, poisson_kernel_radial, SeriesControl};
use hypball::mc_sim::{
    empirical_exit_density, estimate_gauge, gegenbauer_estimates, richardson, richardson_pair, simulate,
    simulate_radial, ExitRule, Estimate, PotentialRule, Scheme, SdeConfig,
};
use hypball::quadrature::{integrate, QuadratureControl};
use hypball::{BallDomain, Dimension, Point};

fn ball(n: u32, r: f64) -> BallDomain {
    BallDomain::new(Dimension::new(n).unwrap(), r).unwrap()
}

fn config(scheme: Scheme, paths: u64, seed: u64) -> SdeConfig {
    SdeConfig {
        n_paths: paths,
        seed,
        scheme,
        ..SdeConfig::default()
    }
}

#[test]
fn replay_is_bit_identical_and_thread_count_independent() {
    let dom = ball(4, 0.6);
    let x0 = Point::polar(4, 0.3, 0.0);
    for scheme in [Scheme::Cartesian, Scheme::Polar] {
        let cfg = config(scheme, 3000, 17);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(&x0, &dom, &cfg).unwrap())
        };
        let (a, b, c) = (run(1), run(1), run(4));
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.samples, c.samples);
        assert_eq!(a.total_steps, c.total_steps);
        let other = simulate(&x0, &dom, &SdeConfig { seed: 18, ..cfg }).unwrap();
        assert_ne!(a.samples, other.samples);
    }
}

/// Exit probability of the angular band `[lo, hi]` under the Poisson kernel.
fn band_mass(dom: &BallDomain, ax: f64, lo: f64, hi: f64) -> f64 {
    let n = dom.dim.n();
    let ctl = SeriesControl::default();
    let q = QuadratureControl::new(1e-12, 500).unwrap();
    let v = integrate(
        |t| poisson_kernel_radial(dom, ax, t.cos(), &ctl).unwrap().value * t.sin().powi(n as i32 - 2),
        lo,
        hi,
        &q,
    )
    .unwrap()
    .value;
    unit_sphere_area(n - 1) * dom.r.powi(n as i32 - 1) * v
}

#[test]
fn exit_histogram_follows_the_poisson_kernel() {
    let dom = ball(4, 0.6);
    let ax = 0.3;
    let out = simulate(&Point::polar(4, ax, 0.0), &dom, &config(Scheme::Cartesian, 200_000, 5)).unwrap();
    assert_eq!(out.censored, 0);
    let bins = empirical_exit_density(&out.samples, dom.dim, dom.r, 30).unwrap();
    let total = out.samples.len() as f64;
    let mut good = 0;
    let mut mass = 0.0;
    for b in &bins {
        let expected = total * band_mass(&dom, ax, b.theta_lo, b.theta_hi);
        let chi2 = (b.count as f64 - expected).powi(2) / expected;
        if chi2 < 4.0 {
            good += 1;
        }
        mass += b.density.unwrap_or(0.0) * b.surface;
    }
    assert!(good as f64 >= 0.95 * bins.len() as f64, "{good}/{} bins", bins.len());
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn exit_histogram_is_flat_from_the_centre() {
    let dom = ball(4, 0.6);
    let out = simulate(&Point::polar(4, 1e-9, 0.0), &dom, &config(Scheme::Cartesian, 50_000, 8)).unwrap();
    let bins = empirical_exit_density(&out.samples, dom.dim, dom.r, 10).unwrap();
    let uniform = 1.0 / (unit_sphere_area(4) * dom.r.powi(3));
    for b in bins {
        let (d, e) = (b.density.unwrap(), b.error.unwrap());
        assert!((d - uniform).abs() < 4.0 * e, "θ∈[{}, {}]: {d} vs {uniform} ± {e}", b.theta_lo, b.theta_hi);
    }
}

fn richardson_gauge(n: u32, k: u32, paths: u64) -> (Estimate, f64) {
    let dom = ball(n, 0.6);
    let (fine, coarse) = richardson_pair(&config(Scheme::Polar, paths, 11));
    let f = estimate_gauge(dom.dim, k, 0.09, &dom, &fine).unwrap();
    let c = estimate_gauge(dom.dim, k, 0.09, &dom, &coarse).unwrap();
    (richardson(&f.estimate, &c.estimate), f.censored_fraction.max(c.censored_fraction))
}

#[test]
fn gauges_match_their_closed_forms() {
    let dom = ball(4, 0.6);
    // order zero: no potential, the gauge is exactly one
    let g0 = estimate_gauge(dom.dim, 0, 0.09, &dom, &config(Scheme::Polar, 1000, 3)).unwrap();
    assert_eq!(g0.estimate.mean, 1.0);
    assert_eq!(g0.estimate.std_error, 0.0);

    let reference = poisson_coefficient(&dom, 1, 0.3).unwrap();
    assert!((reference - 0.5511363636363636).abs() < 1e-15);
    let (g1, censored) = richardson_gauge(4, 1, 200_000);
    assert!(g1.z_score(reference).abs() < 3.0, "{g1:?} vs {reference}");
    assert_eq!(censored, 0.0);

    // a high order is tiny and bounded by its geometric envelope
    let reference = poisson_coefficient(&dom, 8, 0.3).unwrap();
    // (|x|/r)^k · ((1−|x|²)/(1−r²))^ρ with ρ = 1
    let envelope = 0.5f64.powi(8) * (1.0 - 0.09) / (1.0 - 0.36);
    assert!(reference < envelope);
    let (g8, _) = richardson_gauge(4, 8, 200_000);
    assert!(g8.z_score(reference).abs() < 3.0, "{g8:?} vs {reference}");
}

#[test]
fn coefficients_of_both_schemes_agree() {
    let dom = ball(6, 0.6);
    let x0 = Point::polar(6, 0.3, 0.0);
    let mut finals = Vec::new();
    for scheme in [Scheme::Cartesian, Scheme::Polar] {
        let (fine, coarse) = richardson_pair(&config(scheme, 100_000, 21));
        let f = gegenbauer_estimates(&simulate(&x0, &dom, &fine).unwrap().samples, dom.dim, 4).unwrap();
        let c = gegenbauer_estimates(&simulate(&x0, &dom, &coarse).unwrap().samples, dom.dim, 4).unwrap();
        let est: Vec<Estimate> = f.iter().zip(&c).map(|(a, b)| richardson(a, b)).collect();
        for (k, e) in est.iter().enumerate() {
            let reference = poisson_coefficient(&dom, k as u32, 0.3).unwrap();
            assert!(e.z_score(reference).abs() < 3.5, "{scheme:?} k={k}: {e:?} vs {reference}");
        }
        finals.push(est);
    }
    for (a, b) in finals[0].iter().zip(&finals[1]) {
        assert!(a.combined_z(b).abs() < 3.5);
    }
}

#[test]
fn higher_dimension_exits_sooner() {
    // the outward drift grows with n
    let mean_time = |n: u32| {
        let out = simulate_radial(0.09, &ball(n, 0.6), &config(Scheme::Polar, 20_000, 2)).unwrap();
        out.samples.iter().map(|s| s.exit_time).sum::<f64>() / out.samples.len() as f64
    };
    let (t3, t4, t6) = (mean_time(3), mean_time(4), mean_time(6));
    assert!(t3 > t4 && t4 > t6, "{t3} {t4} {t6}");
}

#[test]
fn discretisation_bias_shrinks_with_the_step() {
    // grid-crossing exit with left-endpoint potential has a visible step bias
    let dom = ball(4, 0.6);
    let reference = poisson_coefficient(&dom, 1, 0.3).unwrap();
    let biased = |dt: f64| {
        let cfg = SdeConfig {
            dt,
            max_steps: (100.0 / dt) as u64,
            exit_rule: ExitRule::GridCrossing,
            potential_rule: PotentialRule::LeftEndpoint,
            ..config(Scheme::Polar, 200_000, 4)
        };
        let g = estimate_gauge(dom.dim, 1, 0.09, &dom, &cfg).unwrap().estimate;
        (g.mean - reference, g.std_error)
    };
    let curve: Vec<(f64, f64)> = [1e-3, 5e-4, 2.5e-4].iter().map(|&dt| biased(dt)).collect();
    for w in curve.windows(2) {
        let ((b0, s0), (b1, s1)) = (w[0], w[1]);
        assert!(b1.abs() < b0.abs() || (b1 - b0).abs() < 3.0 * s0.hypot(s1), "{curve:?}");
    }
    // the coarsest step is detectably biased
    assert!(curve[0].0.abs() > 3.0 * curve[0].1, "{curve:?}");
}
