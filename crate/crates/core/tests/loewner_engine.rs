use num_complex::Complex;
use sle_lab_core::loewner::*;
use sle_lab_core::stats::{replica_rng, replica_stats, rng_from_seed, Estimate, RunningStats};

fn joint_z(a: &Estimate, b: &Estimate) -> f64 {
    (a.value - b.value).abs() / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
}

#[test]
fn driving_variance_over_many_replicas() {
    let [mean, second] = replica_stats(21, 10_000, |rng, _| {
        let s = sle_driving(2.0f64, 1.0, 1e-2, rng).unwrap();
        let u = *s.driving.last().unwrap();
        [u, u * u]
    });
    assert!(mean.estimate().covers(0.0, 3.0, 0.0));
    assert!(second.estimate().covers(1.0, 3.0, 0.0));
}

#[test]
fn kappa_two_traces_are_simple_at_resolution_scale() {
    let mut clean = 0;
    let runs = 300;
    for i in 0..runs {
        let tr = sle_trace(2.0f64, 1.0, 1e-3, &mut replica_rng(5, i)).unwrap();
        if tr.self_intersections(1e-4) == 0 {
            clean += 1;
        }
    }
    assert!(clean as f64 >= 0.99 * runs as f64, "{clean}/{runs}");
}

#[test]
fn hull_capacity_from_the_far_field() {
    for seed in 0..3 {
        let s = sle_driving(4.0f64, 0.5, 1e-4, &mut rng_from_seed(seed)).unwrap();
        let cap = s.far_field_capacity(200.0, 32);
        assert!((cap / (s.a * 0.5) - 1.0).abs() < 1e-2, "cap={cap}");
    }
}

#[test]
fn tracked_derivative_never_increases_and_swallowing_recedes() {
    let mut swallowed = [0usize; 3];
    let xs = [0.05, 0.3, 1.5];
    for i in 0..400 {
        let mut rng = replica_rng(8, i);
        let mut s = DrivingState::new(0.5f64, 0.0, &xs).unwrap();
        let mut prev = [0.0; 3];
        for _ in 0..500 {
            s.evolve(2e-3, 2e-3f64.sqrt() * <f64 as sle_lab_core::Scalar>::sample_standard_normal(&mut rng));
            for k in 0..3 {
                assert!(s.tracked[k].log_deriv <= prev[k]);
                prev[k] = s.tracked[k].log_deriv;
            }
        }
        for k in 0..3 {
            swallowed[k] += s.tracked[k].swallowed as usize;
        }
    }
    assert!(swallowed[0] >= swallowed[1] && swallowed[1] >= swallowed[2], "{swallowed:?}");
}

#[test]
fn martingale_drift_direction_for_kappa_four() {
    let m = martingale_check(4.0, 1.0, 1.0, 1e-3, 2000, 3).unwrap();
    assert!(m.estimate.value < 1.0 - 3.0 * m.estimate.std_error);
    let c = martingale_check_complex(4.0, Complex::new(1.0, 1.5), 1.0, 1e-3, 2000, 3).unwrap();
    assert!(c.max_z_score() > 3.0);
}

#[test]
fn hstar_scaling_invariance() {
    let cfg = HstarConfig {
        horizon: 100.0,
        ..Default::default()
    };
    let a = estimate_hstar(1.0, 0.5, 1.0, &cfg, 4000, 1).unwrap();
    let b = estimate_hstar(1.0, 1.0, 2.0, &cfg, 4000, 2).unwrap();
    assert!(joint_z(&a.estimate, &b.estimate) < 3.0, "{a:?} {b:?}");
    assert!((a.estimate.value - 0.75).abs() < 4.0 * a.estimate.std_error + 0.01);
}

#[test]
fn hstar_small_runs_bracket_the_closed_form() {
    let cfg = HstarConfig {
        horizon: 100.0,
        ..Default::default()
    };
    for &(b, u) in &[(0.25, 0.25), (1.0, 0.2), (1.0, 0.8)] {
        let e = estimate_hstar(b, u, 1.0, &cfg, 3000, 4).unwrap();
        let exact = sle_lab_core::partition::phi(b, u).unwrap();
        assert!(e.estimate.covers(exact, 4.0, 0.0), "b={b} u={u} {e:?} exact={exact}");
    }
}

#[test]
fn avoidance_functional_matches_hstar_path_by_path() {
    let cfg = AvoidanceConfig {
        functional: HstarConfig {
            horizon: 20.0,
            ..Default::default()
        },
        ..Default::default()
    };
    let av = avoidance_mc(0.5, 1.0, 200, 0, &cfg, 9).unwrap();
    let h = estimate_hstar(1.0, 0.5, 1.0, &cfg.functional, 200, 9).unwrap();
    assert_eq!(av.functional.estimate, h.estimate);
    assert!(av.geometric.is_none());
    assert_eq!(av.exact, 0.75);
}

#[test]
fn avoidance_limits() {
    let cfg = HstarConfig {
        horizon: 100.0,
        ..Default::default()
    };
    let near_zero = estimate_hstar(1.0, 0.02, 1.0, &cfg, 1000, 1).unwrap();
    let near_one = estimate_hstar(1.0, 0.98, 1.0, &cfg, 1000, 1).unwrap();
    assert!(near_zero.estimate.value < 0.08);
    assert!(near_one.estimate.value > 0.97);
}

#[test]
fn geometric_estimator_runs_and_reports_sensitivity() {
    let cfg = AvoidanceConfig::default();
    let mut agree = 0;
    for i in 0..20 {
        let (apart, eps, complete) = avoidance_replica(0.5, 1.0, &cfg, &mut replica_rng(2, i)).unwrap();
        assert!(complete && eps > 0.0);
        assert!(apart[2] <= apart[0] && apart[0] <= apart[1]);
        agree += apart[0] as usize;
    }
    assert!(agree > 5);
}

type Sampler = fn(f64, f64, f64, &ExcursionConfig, &mut sle_lab_core::stats::LabRng) -> sle_lab_core::Result<ExcursionPath2D<f64>>;

/// Fraction of excursions from `x` to `y` rising above `level |y - x|`.
fn tall_fraction(sampler: Sampler, x: f64, y: f64, level: f64, dt: f64, n: usize, seed: u64) -> Estimate {
    let cfg = ExcursionConfig::default();
    let h = level * (y - x).abs();
    (0..n)
        .map(|i| {
            let m = sampler(x, y, dt, &cfg, &mut replica_rng(seed, i as u64)).unwrap().max_height();
            if m > h {
                1.0
            } else {
                0.0
            }
        })
        .collect::<RunningStats>()
        .estimate()
}

/// Probability that the excursion from 0 to 1 stays below height `h`,
/// `H_strip(0, 1) / H_H(0, 1)` for the strip of height `h`.
fn stays_below(h: f64) -> f64 {
    let u = std::f64::consts::PI / (2.0 * h);
    (u / u.sinh()).powi(2)
}

#[test]
fn excursion_height_law_matches_the_strip_kernel() {
    for (level, seed) in [(0.5, 11), (1.0, 12)] {
        let est = tall_fraction(sample_brownian_excursion, 0.0, 1.0, level, 1e-3, 3000, seed);
        let exact = 1.0 - stays_below(level);
        assert!(est.value <= exact + 3.0 * est.std_error);
        assert!(est.value >= exact - 3.0 * est.std_error - 0.01, "{level}: {est:?} vs {exact}");
    }
}

#[test]
fn excursion_reflection_symmetry() {
    let fwd = tall_fraction(sample_brownian_excursion, 0.0, 1.0, 0.5, 1e-2, 3000, 1);
    let rev = tall_fraction(sample_brownian_excursion, 1.0, 0.0, 0.5, 1e-2, 3000, 2);
    assert!(joint_z(&fwd, &rev) < 3.0);
}

#[test]
fn excursion_scale_covariance() {
    let one = tall_fraction(sample_brownian_excursion, 0.0, 1.0, 0.5, 1e-2, 3000, 3);
    let two = tall_fraction(sample_brownian_excursion, 0.0, 2.0, 0.5, 1e-2, 3000, 4);
    assert!(joint_z(&one, &two) < 3.0);
}

#[test]
fn exact_and_h_process_samplers_agree() {
    for level in [0.5, 1.0] {
        let exact = tall_fraction(sample_brownian_excursion, 0.0, 1.0, level, 1e-2, 3000, 5);
        let sde = tall_fraction(sample_brownian_excursion_sde, 0.0, 1.0, level, 1e-2, 3000, 6);
        assert!(joint_z(&exact, &sde) < 3.0, "{level}: {exact:?} {sde:?}");
    }
}

#[test]
fn excursion_mass_near_the_axis_vanishes() {
    let cfg = ExcursionConfig::default();
    let mut fractions = [0.0; 3];
    let eps = [0.1, 0.03, 0.01];
    let n = 300;
    for i in 0..n {
        let p = sample_brownian_excursion(0.0f64, 1.0, 1e-2, &cfg, &mut replica_rng(6, i)).unwrap();
        for (f, &e) in fractions.iter_mut().zip(&eps) {
            *f += p.near_axis_fraction(e, 0.2) / n as f64;
        }
    }
    assert!(fractions[0] > fractions[1] && fractions[1] > fractions[2]);
    assert!(fractions[2] < 0.01, "{fractions:?}");
}

#[test]
fn kappa_rho_lifetimes_are_finite() {
    let mut finite = 0;
    for i in 0..200 {
        let p = sle_kappa_rho(2.0f64, 0.0, KappaRhoTarget::Finite(1.0), 50.0, 1e-3, &mut replica_rng(10, i)).unwrap();
        finite += p.lifetime.is_some() as usize;
    }
    assert!(finite >= 198, "{finite}");
}

/// Euler simulation of `dZ = 2a/Z dt + dB`.
fn bessel_oracle(a: f64, z0: f64, t: f64, dt: f64, n: usize, seed: u64) -> Estimate {
    let [z2] = replica_stats(seed, n, |rng, _| {
        let (mut z, mut s) = (z0, 0.0);
        while s < t {
            let h = dt.min((z / 4.0).powi(2)).min(t - s);
            z += 2.0 * a / z * h + h.sqrt() * <f64 as sle_lab_core::Scalar>::sample_standard_normal(rng);
            s += h;
        }
        [z * z]
    });
    z2.estimate()
}

#[test]
fn target_infinity_pair_obeys_the_bessel_moment() {
    let a = 1.0;
    let [z2] = replica_stats(12, 4000, |rng, _| {
        let p = sle_kappa_rho(2.0, 0.0, KappaRhoTarget::Infinity { x1: -1.0 }, 1.0, 1e-3, rng).unwrap();
        let z = p.driving.last().unwrap() - p.force.last().unwrap();
        [z * z]
    });
    let est = z2.estimate();
    assert!(est.covers(1.0 + (4.0 * a + 1.0), 3.0, 0.0), "{est:?}");
    let oracle = bessel_oracle(a, 1.0, 1.0, 1e-3, 4000, 13);
    assert!(joint_z(&est, &oracle) < 3.0);
}

#[test]
fn two_path_time_change_reduction() {
    let (kappa, a, s) = (2.0, 1.0, 0.5);
    let [d2] = replica_stats(14, 4000, |rng, _| {
        let run = two_path_simultaneous::<f64, _>(kappa, 0.0, 1.0, s, 1e-3, rng).unwrap();
        [run.separation().powi(2)]
    });
    let est = d2.estimate();
    assert!(est.covers(1.0 + (4.0 * a + 1.0) * 2.0 * s, 3.0, 0.0), "{est:?}");
    let oracle = bessel_oracle(a, 1.0, 2.0 * s, 1e-3, 4000, 15);
    assert!(joint_z(&est, &oracle) < 3.0);
}

#[test]
fn two_path_mirror_symmetry() {
    let [l, r] = replica_stats(16, 3000, |rng, _| {
        let run = two_path_simultaneous(4.0, 0.0, 1.0, 0.5, 1e-3, rng).unwrap();
        [run.u1.last().unwrap() - 0.0, 1.0 - run.u2.last().unwrap()]
    });
    assert!(joint_z(&l.estimate(), &r.estimate()) < 3.0);
    let run = two_path_simultaneous(4.0f64, 0.0, 1.0, 0.5, 1e-3, &mut rng_from_seed(1)).unwrap();
    assert!((run.far_field_capacity(500.0, 32) - 2.0 * run.a * 0.5).abs() < 1e-2);
}

#[test]
fn csv_exports() {
    let tr = sle_trace(2.0f64, 0.1, 1e-2, &mut rng_from_seed(1)).unwrap();
    assert_eq!(tr.to_csv().lines().count(), tr.len() + 1);
    let e = sample_brownian_excursion(0.0f64, 1.0, 1e-2, &ExcursionConfig::default(), &mut rng_from_seed(1)).unwrap();
    let csv = e.to_csv();
    assert!(csv.starts_with("t,re,im\n"));
    assert_eq!(csv.lines().count(), e.len() + 1);
}
