use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::excursion::{sample_brownian_excursion, ExcursionConfig};
use super::geometry;
use super::trace::trace_from_driving;
use super::{slit_map, DrivingState, GradedGrid};
use crate::error::{Error, Result};
use crate::partition::ParamBundle;
use crate::scalar::Scalar;
use crate::stats::{replica_stats, Estimate, LabRng};

/// Flat result record shared by all Monte Carlo estimators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorRecord {
    pub estimator: String,
    pub n: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub value: f64,
    pub std_error: f64,
    pub swallowed_fraction: f64,
    pub seed: u64,
}

const GAP_FRACTION: f64 = 0.125;

/// Step of a Monte Carlo chain: the grid step, shrunk to `(gap/8)^2`.
#[inline]
fn sub_step(grid_step: f64, gap: f64) -> f64 {
    grid_step.min(GAP_FRACTION * GAP_FRACTION * gap * gap)
}

#[inline]
fn normal(rng: &mut LabRng) -> f64 {
    f64::sample_standard_normal(rng)
}

fn check_positive(what: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value: v,
            range: "(0, inf)",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleEstimate {
    pub kappa: f64,
    pub x: f64,
    pub t_max: f64,
    pub dt: f64,
    pub seed: u64,
    /// Mean of `g_T'(x)`; swallowed replicas count as 0.
    pub estimate: Estimate,
    pub swallowed_fraction: f64,
}

impl MartingaleEstimate {
    pub fn record(&self) -> EstimatorRecord {
        EstimatorRecord {
            estimator: "martingale_check".into(),
            n: self.estimate.n,
            dt: self.dt,
            t: self.t_max,
            value: self.estimate.value,
            std_error: self.estimate.std_error,
            swallowed_fraction: self.swallowed_fraction,
            seed: self.seed,
        }
    }
}

/// Monte Carlo mean of `g_T'(x)` under SLE_kappa driving, replica `i` seeded
/// from `(seed, i)`.
pub fn martingale_check(kappa: f64, x: f64, t_max: f64, dt: f64, n: usize, seed: u64) -> Result<MartingaleEstimate> {
    let a = ParamBundle::from_kappa(kappa)?.a;
    if x == 0.0 {
        return Err(Error::OutOfRange {
            what: "x",
            value: x,
            range: "nonzero",
        });
    }
    check_positive("dt", dt)?;
    let [value, swallowed] = replica_stats(seed, n, |rng, _| {
        let mut s = DrivingState::new(a, 0.0, &[x]).unwrap().without_history();
        while s.time() < t_max {
            let h = sub_step(dt.min(t_max - s.time()), s.min_gap());
            s.evolve(h, h.sqrt() * normal(rng));
            if s.tracked[0].swallowed {
                return [0.0, 1.0];
            }
        }
        [s.tracked[0].log_deriv.exp(), 0.0]
    });
    Ok(MartingaleEstimate {
        kappa,
        x,
        t_max,
        dt,
        seed,
        estimate: value.estimate(),
        swallowed_fraction: swallowed.mean(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMartingaleEstimate {
    pub kappa: f64,
    pub z: Complex<f64>,
    /// `a / z`, the value at time 0.
    pub initial: Complex<f64>,
    pub re: Estimate,
    pub im: Estimate,
}

impl ComplexMartingaleEstimate {
    /// Largest z-score of the two components against the initial value.
    pub fn max_z_score(&self) -> f64 {
        self.re.z_score(self.initial.re).abs().max(self.im.z_score(self.initial.im).abs())
    }
}

/// Monte Carlo mean of `d/dt g_t(z) = a / (g_T(z) - U_T)` at an interior point.
pub fn martingale_check_complex(
    kappa: f64,
    z: Complex<f64>,
    t_max: f64,
    dt: f64,
    n: usize,
    seed: u64,
) -> Result<ComplexMartingaleEstimate> {
    let a = ParamBundle::from_kappa(kappa)?.a;
    check_positive("Im z", z.im)?;
    check_positive("dt", dt)?;
    let [re, im] = replica_stats(seed, n, |rng, _| {
        let (mut w, mut u, mut t) = (z, 0.0, 0.0);
        while t < t_max {
            let h = sub_step(dt.min(t_max - t), (w - u).norm());
            u += h.sqrt() * normal(rng);
            w = slit_map(w, u, a, h);
            t += h;
        }
        let m = a / (w - u);
        [m.re, m.im]
    });
    Ok(ComplexMartingaleEstimate {
        kappa,
        z,
        initial: a / z,
        re: re.estimate(),
        im: im.estimate(),
    })
}

/// Graded time grid for the `H*` estimator, in units of `y^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HstarConfig {
    pub dt: f64,
    pub t_ref: f64,
    pub horizon: f64,
}

impl Default for HstarConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_ref: 1.0,
            horizon: 1000.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HstarEstimate {
    pub b: f64,
    pub x: f64,
    pub y: f64,
    pub config: HstarConfig,
    pub seed: u64,
    /// Mean of `(y - x)^{2b} J_T`.
    pub estimate: Estimate,
    /// Mean of `1 - X_T / Y_T`.
    pub horizon_gap: f64,
    /// Mean of `T a b (1/X_T - 1/Y_T)^2`: the decrease of `log J` over a
    /// further horizon at the terminal rate.
    pub horizon_drift: f64,
    pub swallowed_fraction: f64,
}

impl HstarEstimate {
    pub fn record(&self, name: &str) -> EstimatorRecord {
        EstimatorRecord {
            estimator: name.into(),
            n: self.estimate.n,
            dt: self.config.dt,
            t: self.config.horizon * self.y * self.y,
            value: self.estimate.value,
            std_error: self.estimate.std_error,
            swallowed_fraction: self.swallowed_fraction,
            seed: self.seed,
        }
    }
}

/// `J` never increases, so a chain whose `log J` falls below this is
/// stopped and scored 0.
pub const LOG_J_FLOOR: f64 = -40.0;

/// A chain with `1 - X/Y` below this is stopped early: its remaining
/// change of `J` is at most of this relative order.
pub const SETTLED_GAP: f64 = 1e-6;

/// One chain for `H*` in gap coordinates `X = g(x) - U`, `Y = g(y) - U`:
/// returns `(log((y-x)^{2b} J_T), X_T, Y_T)` or `None`
/// when a point was swallowed. `trail` receives `(t, log J_t)`.
pub fn hstar_chain(
    a: f64,
    b: f64,
    x: f64,
    y: f64,
    grid: &GradedGrid,
    rng: &mut LabRng,
    mut trail: Option<&mut Vec<(f64, f64)>>,
) -> Option<(f64, f64, f64)> {
    let (mut gx, mut gy, mut t) = (x, y, 0.0);
    // `ratio = (g_t(y) - g_t(x)) / (y - x)`, updated multiplicatively; both
    // products are renormalized into `log_scale` before they underflow.
    let (mut deriv, mut ratio, mut log_scale) = (1.0f64, 1.0f64, 0.0);
    let log_j = |deriv: f64, ratio: f64, log_scale: f64| b * deriv.ln() - 2.0 * b * ratio.ln() + log_scale;
    if let Some(tr) = trail.as_deref_mut() {
        tr.push((0.0, 0.0));
    }
    let mut k = 0u32;
    while t < grid.horizon {
        let h = sub_step(grid.step_at(t), gx);
        let du = h.sqrt() * normal(rng);
        // Half step of flow, driving jump at the midpoint, half step of flow.
        let (mx, my) = ((gx * gx + a * h).sqrt(), (gy * gy + a * h).sqrt());
        let (zx, zy) = (mx - du, my - du);
        if zx <= 0.0 {
            return None;
        }
        let nx = (zx * zx + a * h).sqrt();
        let ny = (zy * zy + a * h).sqrt();
        deriv *= (gx / mx) * (gy / my) * (zx / nx) * (zy / ny);
        ratio *= ((gy + gx) / (my + mx)) * ((zy + zx) / (ny + nx));
        gx = nx;
        gy = ny;
        t += h;
        if deriv < 1e-100 || ratio < 1e-100 {
            log_scale = log_j(deriv, ratio, log_scale);
            deriv = 1.0;
            ratio = 1.0;
        }
        k = k.wrapping_add(1);
        if let Some(tr) = trail.as_deref_mut() {
            tr.push((t, log_j(deriv, ratio, log_scale)));
        } else if k % 64 == 0 {
            if log_j(deriv, ratio, log_scale) < LOG_J_FLOOR {
                return Some((f64::NEG_INFINITY, gx, gy));
            }
            if (gy - gx) < SETTLED_GAP * gy {
                break;
            }
        }
    }
    Some((log_j(deriv, ratio, log_scale), gx, gy))
}

/// `(y - x)^{2b} E[J_T]` for SLE_kappa with `kappa` fixed by `b`, tracking `x`
/// and `y` on a graded grid scaled by `y^2`. Swallowed replicas contribute 0.
pub fn estimate_hstar(b: f64, x: f64, y: f64, config: &HstarConfig, n: usize, seed: u64) -> Result<HstarEstimate> {
    let p = ParamBundle::from_b(b)?;
    if !(0.0 < x && x < y) {
        return Err(Error::Ordering("0 < x < y".into()));
    }
    check_positive("dt", config.dt)?;
    let s = y * y;
    let grid = GradedGrid {
        dt: config.dt * s,
        t_ref: config.t_ref * s,
        horizon: config.horizon * s,
    };
    let (a, horizon) = (p.a, grid.horizon);
    let [value, gap, drift, swallowed] = replica_stats(seed, n, |rng, _| match hstar_chain(a, b, x, y, &grid, rng, None) {
        Some((lj, _, _)) if lj == f64::NEG_INFINITY => [0.0, 0.0, 0.0, 0.0],
        Some((lj, gx, gy)) => {
            let r = (gy - gx) / (gx * gy);
            [lj.exp(), 1.0 - gx / gy, horizon * a * b * r * r, 0.0]
        }
        None => [0.0, 0.0, 0.0, 1.0],
    });
    Ok(HstarEstimate {
        b,
        x,
        y,
        config: *config,
        seed,
        estimate: value.estimate(),
        horizon_gap: gap.mean(),
        horizon_drift: drift.mean(),
        swallowed_fraction: swallowed.mean(),
    })
}

/// Resolution of the geometric avoidance estimator. Trace times are in units
/// of `y^2`; `excursion_dt` is the relative step of the excursion sampler.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceConfig {
    pub functional: HstarConfig,
    pub trace: HstarConfig,
    pub excursion_dt: f64,
    /// `eps = eps_factor * median trace step`.
    pub eps_factor: f64,
}

impl Default for AvoidanceConfig {
    fn default() -> Self {
        Self {
            functional: HstarConfig::default(),
            trace: HstarConfig {
                dt: 1e-3,
                t_ref: 0.5,
                horizon: 16.0,
            },
            excursion_dt: 1e-3,
            eps_factor: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricEstimate {
    pub estimate: Estimate,
    pub half_eps: Estimate,
    pub double_eps: Estimate,
    /// Mean of the per-replica tolerance.
    pub eps: f64,
    pub incomplete_excursions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvoidanceEstimate {
    pub x: f64,
    pub y: f64,
    /// `(x/y)(2 - x/y)`.
    pub exact: f64,
    pub functional: HstarEstimate,
    pub geometric: Option<GeometricEstimate>,
}

/// Independent SLE_2 trace from 0 and Brownian excursion from `x` to `y`;
/// returns whether they stay apart at `eps`, `eps/2` and `2 eps`, and `eps`.
pub fn avoidance_replica(x: f64, y: f64, config: &AvoidanceConfig, rng: &mut LabRng) -> Result<([bool; 3], f64, bool)> {
    let s = y * y;
    let grid = GradedGrid {
        dt: config.trace.dt * s,
        t_ref: config.trace.t_ref * s,
        horizon: config.trace.horizon * s,
    };
    let mut state = DrivingState::new(1.0, 0.0, &[])?;
    let mut t = 0.0;
    while t < grid.horizon {
        let h = grid.step_at(t);
        state.evolve(h, h.sqrt() * normal(rng));
        t += h;
    }
    let trace = trace_from_driving(&state)?.points_f64();
    let eps = config.eps_factor * geometry::median_segment(&trace);
    let exc = sample_brownian_excursion(x, y, config.excursion_dt, &ExcursionConfig::default(), rng)?;
    let beta = exc.points_f64();
    let apart = [eps, 0.5 * eps, 2.0 * eps].map(|e| !geometry::polylines_within(&trace, &beta, e));
    Ok((apart, eps, exc.complete))
}

/// Probability that SLE_2 from 0 to infinity avoids a Brownian excursion from
/// `x` to `y`. The functional estimator uses `n` replicas; the geometric one
/// runs when `n_geometric > 0`.
pub fn avoidance_mc(
    x: f64,
    y: f64,
    n: usize,
    n_geometric: usize,
    config: &AvoidanceConfig,
    seed: u64,
) -> Result<AvoidanceEstimate> {
    let functional = estimate_hstar(1.0, x, y, &config.functional, n, seed)?;
    let geometric = if n_geometric > 0 {
        let [e, h, d, eps, bad] = replica_stats(seed ^ 0x6765_6f6d, n_geometric, |rng, _| {
            let (apart, eps, complete) = avoidance_replica(x, y, config, rng).expect("validated inputs");
            let f = |b: bool| if b { 1.0 } else { 0.0 };
            [f(apart[0]), f(apart[1]), f(apart[2]), eps, f(!complete)]
        });
        Some(GeometricEstimate {
            estimate: e.estimate(),
            half_eps: h.estimate(),
            double_eps: d.estimate(),
            eps: eps.mean(),
            incomplete_excursions: (bad.mean() * bad.count() as f64).round() as usize,
        })
    } else {
        None
    };
    let u = x / y;
    Ok(AvoidanceEstimate {
        x,
        y,
        exact: u * (2.0 - u),
        functional,
        geometric,
    })
}

/// Whether polylines `p` and `q` come within `eps` of each other.
pub fn polylines_within(p: &[Complex<f64>], q: &[Complex<f64>], eps: f64) -> bool {
    geometry::polylines_within(p, q, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::rng_from_seed;

    #[test]
    fn zero_horizon_is_exactly_one() {
        let m = martingale_check(2.0, 1.0, 0.0, 1e-3, 10, 1).unwrap();
        assert_eq!(m.estimate.value, 1.0);
        assert_eq!(m.estimate.std_error, 0.0);
    }

    #[test]
    fn j_is_non_increasing_along_paths() {
        let grid = GradedGrid {
            dt: 1e-3,
            t_ref: 1.0,
            horizon: 5.0,
        };
        for seed in 0..20 {
            let mut trail = Vec::new();
            hstar_chain(1.0, 1.0, 0.5, 1.0, &grid, &mut rng_from_seed(seed), Some(&mut trail)).unwrap();
            assert!(trail.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12));
        }
    }

    #[test]
    fn estimators_are_reproducible() {
        let c = HstarConfig {
            horizon: 2.0,
            ..Default::default()
        };
        let a = estimate_hstar(1.0, 0.5, 1.0, &c, 50, 3).unwrap();
        let b = estimate_hstar(1.0, 0.5, 1.0, &c, 50, 3).unwrap();
        assert_eq!(a, b);
        assert!(estimate_hstar(1.0, 1.0, 0.5, &c, 50, 3).is_err());
        let r = a.record("hstar");
        let v = serde_json::to_value(&r).unwrap();
        for k in ["estimator", "n", "dt", "T", "value", "std_error", "swallowed_fraction", "seed"] {
            assert!(v.get(k).is_some(), "{k}");
        }
    }

    #[test]
    fn complex_martingale_for_kappa_two() {
        let m = martingale_check_complex(2.0, Complex::new(1.0, 1.5), 1.0, 1e-2, 2000, 7).unwrap();
        assert!(m.max_z_score() < 4.0, "{m:?}");
    }
}
