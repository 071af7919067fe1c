use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{inverse_slit_map, DrivingState};
use crate::error::{Error, Result};
use crate::loewner::geometry;
use crate::scalar::Scalar;

/// Polyline through `gamma(t_j)`, starting at the initial driving value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePolyline<T> {
    pub times: Vec<T>,
    pub points: Vec<Complex<T>>,
    pub dt: T,
    pub substeps: usize,
}

/// Tip after the first `k` recorded steps: `f_1 o ... o f_{k-1}(U_k + i sqrt(2 a dt_k))`.
pub fn zipper_tip<T: Scalar>(steps: &[(T, T)], a: T) -> Complex<T> {
    let Some((&(dt, u), rest)) = steps.split_last() else {
        return Complex::new(T::zero(), T::zero());
    };
    let mut w = Complex::new(u, (T::lit(2.0) * a * dt).sqrt());
    for &(dt, u) in rest.iter().rev() {
        w = inverse_slit_map(w, u, a, dt);
    }
    w
}

/// Trace of a recorded driving path, one tip per step.
pub fn trace_from_driving<T: Scalar>(state: &DrivingState<T>) -> Result<TracePolyline<T>> {
    let steps: Vec<(T, T)> = state.steps().collect();
    let mut points = Vec::with_capacity(steps.len() + 1);
    points.push(Complex::new(state.driving[0], T::zero()));
    // Tips are unzipped in independent lanes.
    const LANES: usize = 8;
    let m = steps.len();
    let mut base = 1;
    while base <= m {
        let hi = (base + LANES - 1).min(m);
        let mut ws = [Complex::new(T::zero(), T::zero()); LANES];
        for (l, w) in ws.iter_mut().enumerate().take(hi - base + 1) {
            let (dt, u) = steps[base + l - 1];
            *w = Complex::new(u, (T::lit(2.0) * state.a * dt).sqrt());
        }
        for j in (0..hi - 1).rev() {
            let (dt, u) = steps[j];
            let first = (j + 2).saturating_sub(base);
            for w in ws.iter_mut().take(hi - base + 1).skip(first) {
                *w = inverse_slit_map(*w, u, state.a, dt);
            }
        }
        for (l, tip) in ws.iter().enumerate().take(hi - base + 1) {
            if !(tip.re.is_finite() && tip.im.is_finite()) {
                return Err(Error::Convergence(format!("trace tip at step {} is not finite", base + l)));
            }
            points.push(Complex::new(tip.re, tip.im.max(T::zero())));
        }
        base = hi + 1;
    }
    let dt = steps.first().map_or(T::zero(), |s| s.0);
    Ok(TracePolyline {
        times: state.times.clone(),
        points,
        dt,
        substeps: 1,
    })
}

/// SLE trace on a uniform grid. A non-finite tip triggers a refinement of the
/// offending step into `2^k` sub-steps for `k = 1..=4` before failing.
pub fn sle_trace<T: Scalar, R: Rng + ?Sized>(kappa: T, t_max: T, dt: T, rng: &mut R) -> Result<TracePolyline<T>> {
    let state = super::sle_driving(kappa, t_max, dt, rng)?;
    match trace_from_driving(&state) {
        Ok(t) => Ok(t),
        Err(first) => {
            for level in 1..=4u32 {
                let parts = 1usize << level;
                let mut fine = DrivingState::new(state.a, state.driving[0], &[])?;
                for (h, u) in state.steps() {
                    let du = u - fine.current_driving();
                    fine.evolve(h / T::from_count(parts), du);
                    for _ in 1..parts {
                        fine.evolve(h / T::from_count(parts), T::zero());
                    }
                }
                if let Ok(mut t) = trace_from_driving(&fine) {
                    t.substeps = parts;
                    return Ok(t);
                }
            }
            Err(first)
        }
    }
}

impl<T: Scalar> TracePolyline<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points_f64(&self) -> Vec<Complex<f64>> {
        self.points.iter().map(|p| Complex::new(p.re.as_f64(), p.im.as_f64())).collect()
    }

    /// Pairs of segments at least three apart in index closer than `tol`.
    pub fn self_intersections(&self, tol: f64) -> usize {
        geometry::self_close_pairs(&self.points_f64(), tol)
    }

    pub fn median_step(&self) -> f64 {
        geometry::median_segment(&self.points_f64())
    }

    /// Writes `t,re,im` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im\n");
        for (t, p) in self.times.iter().zip(&self.points) {
            out.push_str(&format!("{:e},{:e},{:e}\n", t.as_f64(), p.re.as_f64(), p.im.as_f64()));
        }
        out
    }
}
