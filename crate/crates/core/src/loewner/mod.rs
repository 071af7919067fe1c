//! Chordal Loewner evolution `d/dt g_t(z) = a / (g_t(z) - U_t)` with
//! piecewise-constant driving, traces, Brownian excursions, Monte Carlo
//! estimators and the SLE(kappa, rho) and two-path driving processes.

mod estimators;
mod excursion;
mod geometry;
mod processes;
mod trace;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use estimators::{
    avoidance_mc, avoidance_replica, estimate_hstar, hstar_chain, martingale_check, martingale_check_complex,
    polylines_within, AvoidanceConfig, AvoidanceEstimate, ComplexMartingaleEstimate, EstimatorRecord,
    GeometricEstimate, HstarConfig, HstarEstimate, MartingaleEstimate,
};
pub use geometry::segment_distance;
pub use excursion::{
    sample_brownian_excursion, sample_brownian_excursion_sde, ExcursionConfig, ExcursionPath2D,
};
pub use processes::{
    kappa_rho_finite, sle_kappa_rho, two_path_simultaneous, weighted_pair_drift, KappaRhoTarget, RhoPath,
    TwoPathRun,
};
pub use trace::{sle_trace, trace_from_driving, zipper_tip, TracePolyline};

/// A real boundary point followed through the flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedPoint<T> {
    pub x0: T,
    /// `g_t(x0)`.
    pub g: T,
    /// `log g_t'(x0)`.
    pub log_deriv: T,
    pub swallowed: bool,
}

/// Time grid, driving values and tracked boundary points of a Loewner chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrivingState<T> {
    pub a: T,
    pub times: Vec<T>,
    pub driving: Vec<T>,
    pub tracked: Vec<TrackedPoint<T>>,
    record_path: bool,
    t: T,
    u: T,
}

/// `sqrt(z)` with a nonnegative real part, by the stable half-angle formulas.
/// `|z|` is formed without overflow guards.
#[inline]
pub fn csqrt<T: Scalar>(z: Complex<T>) -> Complex<T> {
    let (p, q) = (z.re, z.im);
    if p == T::zero() && q == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let r = (p * p + q * q).sqrt();
    let half = T::lit(0.5);
    if p >= T::zero() {
        let s = (half * (r + p)).sqrt();
        Complex::new(s, q / (T::lit(2.0) * s))
    } else {
        let s = (half * (r - p)).sqrt();
        let s = if q < T::zero() { -s } else { s };
        Complex::new(q / (T::lit(2.0) * s), s)
    }
}

/// Forward slit map of one step with constant driving `u` and capacity `2 a dt`
/// on a real point: `u + sign(x - u) sqrt((x - u)^2 + 2 a dt)`.
#[inline]
pub fn slit_map_real<T: Scalar>(x: T, u: T, a: T, dt: T) -> T {
    let z = x - u;
    let w = (z * z + T::lit(2.0) * a * dt).sqrt();
    if z >= T::zero() {
        u + w
    } else {
        u - w
    }
}

/// Forward slit map on a point of the closed upper half-plane.
#[inline]
pub fn slit_map<T: Scalar>(z: Complex<T>, u: T, a: T, dt: T) -> Complex<T> {
    let w = z - u;
    let s = csqrt(w * w + T::lit(2.0) * a * dt);
    let s = if s.im < T::zero() || (s.im == T::zero() && (s.re > T::zero()) != (w.re >= T::zero())) {
        -s
    } else {
        s
    };
    s + u
}

/// Inverse slit map `u + sqrt((w - u)^2 - 2 a dt)` into the upper half-plane.
#[inline]
pub fn inverse_slit_map<T: Scalar>(w: Complex<T>, u: T, a: T, dt: T) -> Complex<T> {
    let (x, y) = (w.re - u, w.im);
    let s = csqrt(Complex::new(x * x - y * y - T::lit(2.0) * a * dt, T::lit(2.0) * x * y));
    let flip = s.im < T::zero() || (s.im == T::zero() && (s.re > T::zero()) != (x >= T::zero()));
    if flip {
        Complex::new(u - s.re, -s.im)
    } else {
        Complex::new(u + s.re, s.im)
    }
}

impl<T: Scalar> DrivingState<T> {
    /// A chain started at `u0` with the given real points tracked.
    pub fn new(a: T, u0: T, points: &[T]) -> Result<Self> {
        if !(a > T::zero()) {
            return Err(Error::OutOfRange {
                what: "a",
                value: a.as_f64(),
                range: "(0, inf)",
            });
        }
        for &x in points {
            if x == u0 {
                return Err(Error::OutOfRange {
                    what: "tracked point",
                    value: x.as_f64(),
                    range: "away from the initial driving value",
                });
            }
        }
        Ok(Self {
            a,
            times: vec![T::zero()],
            driving: vec![u0],
            tracked: points
                .iter()
                .map(|&x| TrackedPoint {
                    x0: x,
                    g: x,
                    log_deriv: T::zero(),
                    swallowed: false,
                })
                .collect(),
            record_path: true,
            t: T::zero(),
            u: u0,
        })
    }

    /// Stops recording the grid; only the current time and driving value are kept.
    pub fn without_history(mut self) -> Self {
        self.record_path = false;
        self
    }

    pub fn time(&self) -> T {
        self.t
    }

    pub fn current_driving(&self) -> T {
        self.u
    }

    /// `g_t(x) - U_t` for tracked point `k`.
    pub fn gap(&self, k: usize) -> T {
        self.tracked[k].g - self.u
    }

    /// Smallest `|g_t(x) - U_t|` over live tracked points.
    pub fn min_gap(&self) -> T {
        self.tracked
            .iter()
            .filter(|p| !p.swallowed)
            .map(|p| (p.g - self.u).abs())
            .fold(T::infinity(), T::min)
    }

    /// Advances by `dt` with the driving value moved by `du` at the start of the
    /// step and held constant over it. Points whose gap changes sign are
    /// flagged as swallowed and frozen.
    pub fn evolve(&mut self, dt: T, du: T) {
        self.u += du;
        self.t += dt;
        let (u, a) = (self.u, self.a);
        for p in self.tracked.iter_mut().filter(|p| !p.swallowed) {
            let z = p.g - u;
            let z0 = p.x0 - self.driving[0];
            if z == T::zero() || (z > T::zero()) != (z0 > T::zero()) {
                p.swallowed = true;
                continue;
            }
            let g = slit_map_real(p.g, u, a, dt);
            p.log_deriv += (z.abs() / (g - u).abs()).ln();
            p.g = g;
        }
        if self.record_path {
            self.times.push(self.t);
            self.driving.push(self.u);
        }
    }

    /// Step sizes `(dt_j)` and constant driving values `(U_j)` of the recorded grid.
    pub fn steps(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.times
            .windows(2)
            .zip(self.driving.iter().skip(1))
            .map(|(w, &u)| (w[1] - w[0], u))
    }

    /// `g_t(z)` for `z` in the closed upper half-plane, by composing the
    /// recorded steps.
    pub fn map_point(&self, z: Complex<T>) -> Complex<T> {
        self.steps().fold(z, |w, (dt, u)| slit_map(w, u, self.a, dt))
    }

    /// Half-plane capacity read off the far field: the mean of
    /// `(g_t(z) - z) z` over a circle of radius `r`.
    pub fn far_field_capacity(&self, r: T, samples: usize) -> T {
        let mut acc = T::zero();
        for k in 0..samples {
            let theta = T::PI() * (T::from_count(k) + T::lit(0.5)) / T::from_count(samples);
            let z = Complex::from_polar(r, theta);
            let g = self.map_point(z);
            acc += ((g - z) * z).re;
        }
        acc / T::from_count(samples)
    }

    /// Writes `t,u` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u\n");
        for (t, u) in self.times.iter().zip(&self.driving) {
            out.push_str(&format!("{:e},{:e}\n", t.as_f64(), u.as_f64()));
        }
        out
    }
}

/// SLE driving with `a = 2/kappa` on a uniform grid: standard Brownian
/// increments of variance `dt`.
pub fn sle_driving<T: Scalar, R: Rng + ?Sized>(kappa: T, t_max: T, dt: T, rng: &mut R) -> Result<DrivingState<T>> {
    if !(kappa > T::zero() && kappa <= T::lit(4.0)) {
        return Err(Error::OutOfRange {
            what: "kappa",
            value: kappa.as_f64(),
            range: "(0, 4]",
        });
    }
    if !(dt > T::zero()) {
        return Err(Error::OutOfRange {
            what: "dt",
            value: dt.as_f64(),
            range: "(0, inf)",
        });
    }
    let mut state = DrivingState::new(T::lit(2.0) / kappa, T::zero(), &[])?;
    let steps = (t_max / dt).round().to_usize().unwrap_or(0);
    let sd = dt.sqrt();
    for _ in 0..steps {
        state.evolve(dt, sd * T::sample_standard_normal(rng));
    }
    Ok(state)
}

/// Step sizes of a graded grid on `[0, horizon]`: `dt` up to `t_ref`, then
/// `dt t / t_ref`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedGrid {
    pub dt: f64,
    pub t_ref: f64,
    pub horizon: f64,
}

impl GradedGrid {
    pub fn step_at(&self, t: f64) -> f64 {
        let h = if t < self.t_ref { self.dt } else { self.dt * t / self.t_ref };
        h.min(self.horizon - t)
    }

    /// Number of steps the grid takes.
    pub fn len(&self) -> usize {
        let mut t = 0.0;
        let mut n = 0;
        while t < self.horizon {
            t += self.step_at(t);
            n += 1;
        }
        n
    }

    pub fn is_empty(&self) -> bool {
        self.horizon <= 0.0
    }
}
