use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Polyline of a Brownian excursion in the upper half-plane from `x` to `y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcursionPath2D<T> {
    /// Time parameter of the underlying process (not the image time).
    pub times: Vec<T>,
    pub points: Vec<Complex<T>>,
    pub x: T,
    pub y: T,
    pub rel_dt: T,
    pub endpoint_tol: T,
    /// False when the step cap stopped the path early.
    pub complete: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcursionConfig {
    /// Relative endpoint tolerance, in units of `|y - x|`.
    pub endpoint_tol: f64,
    pub max_steps: usize,
}

impl Default for ExcursionConfig {
    fn default() -> Self {
        Self {
            endpoint_tol: 1e-4,
            max_steps: 2_000_000,
        }
    }
}

fn check<T: Scalar>(x: T, y: T, dt: T) -> Result<()> {
    if x == y || !x.is_finite() || !y.is_finite() {
        return Err(Error::OutOfRange {
            what: "excursion endpoints",
            value: (y - x).as_f64(),
            range: "distinct finite reals",
        });
    }
    if !(dt > T::zero() && dt < T::one()) {
        return Err(Error::OutOfRange {
            what: "dt",
            value: dt.as_f64(),
            range: "(0, 1)",
        });
    }
    Ok(())
}

/// Samples the excursion as the Moebius image `M(z) = (y z + x) / (z + 1)` of
/// the excursion from 0 to infinity (with `z + 1` replaced by `z - 1` when `y < x`), `W + i |B^3|` with `W` a linear and `B^3`
/// a three-dimensional Brownian motion. Steps are `dt min(|z|, |z + 1|)^2` in
/// the source time, so image steps shrink near both endpoints and stay
/// proportionate near the pole of `M`. The path starts within
/// `endpoint_tol |y - x|` of `x` and stops once that close to `y`; both ends
/// are then snapped onto the axis.
pub fn sample_brownian_excursion<T: Scalar, R: Rng + ?Sized>(
    x: T,
    y: T,
    dt: T,
    config: &ExcursionConfig,
    rng: &mut R,
) -> Result<ExcursionPath2D<T>> {
    check(x, y, dt)?;
    let tol = T::lit(config.endpoint_tol);
    let s = (y - x).signum();
    let image = |z: Complex<T>| (z * y + x * s) / (z + s);
    let mut b = [tol * T::lit(0.1), T::zero(), T::zero()];
    let mut w = T::zero();
    let mut t = T::zero();
    let mut points = vec![Complex::new(x, T::zero())];
    let mut times = vec![T::zero()];
    let stop = T::one() / tol;
    let mut complete = false;
    for _ in 0..config.max_steps {
        let r = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        let z = Complex::new(w, r);
        if (z + s).norm() >= stop {
            complete = true;
            break;
        }
        points.push(image(z));
        times.push(t);
        let h = dt * z.norm_sqr().min((z + s).norm_sqr());
        let sd = h.sqrt();
        w += sd * T::sample_standard_normal(rng);
        for c in &mut b {
            *c += sd * T::sample_standard_normal(rng);
        }
        t += h;
    }
    if complete {
        points.push(Complex::new(y, T::zero()));
        times.push(t);
    }
    Ok(ExcursionPath2D {
        times,
        points,
        x,
        y,
        rel_dt: dt,
        endpoint_tol: tol,
        complete,
    })
}

/// Euler scheme for the h-process `dZ = grad log h(Z) dt + dB` with
/// `h(z) = Im z / |z - y|^2`, started at `x + i tol |y - x|`. Steps are
/// `dt min(Im z, |z - y|)^2`; a step leaving the half-plane is redrawn at a
/// quarter of the size.
pub fn sample_brownian_excursion_sde<T: Scalar, R: Rng + ?Sized>(
    x: T,
    y: T,
    dt: T,
    config: &ExcursionConfig,
    rng: &mut R,
) -> Result<ExcursionPath2D<T>> {
    check(x, y, dt)?;
    let scale = (y - x).abs();
    let tol = T::lit(config.endpoint_tol) * scale;
    let mut z = Complex::new(x, tol * T::lit(2.0));
    let mut t = T::zero();
    let mut points = vec![Complex::new(x, T::zero()), z];
    let mut times = vec![T::zero(), T::zero()];
    let two = T::lit(2.0);
    let mut complete = false;
    let mut steps = 0;
    while steps < config.max_steps {
        let d = z - y;
        let dist = d.norm();
        if dist <= tol {
            complete = true;
            break;
        }
        let d2 = d.norm_sqr();
        let drift = Complex::new(-two * d.re / d2, T::one() / z.im - two * d.im / d2);
        let mut h = dt * z.im.min(dist).powi(2);
        loop {
            steps += 1;
            let sd = h.sqrt();
            let next = z
                + drift * h
                + Complex::new(sd * T::sample_standard_normal(rng), sd * T::sample_standard_normal(rng));
            if next.im > T::zero() {
                z = next;
                t += h;
                break;
            }
            h *= T::lit(0.25);
        }
        points.push(z);
        times.push(t);
    }
    if complete {
        points.push(Complex::new(y, T::zero()));
        times.push(t);
    }
    Ok(ExcursionPath2D {
        times,
        points,
        x,
        y,
        rel_dt: dt,
        endpoint_tol: T::lit(config.endpoint_tol),
        complete,
    })
}

impl<T: Scalar> ExcursionPath2D<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_height(&self) -> T {
        self.points.iter().map(|p| p.im).fold(T::zero(), T::max)
    }

    /// Fraction of interior vertices within `eps` of the axis and at least
    /// `margin` away from both endpoints.
    pub fn near_axis_fraction(&self, eps: T, margin: T) -> f64 {
        let inner = &self.points[1..self.points.len().saturating_sub(1)];
        if inner.is_empty() {
            return 0.0;
        }
        let hits = inner
            .iter()
            .filter(|p| p.im < eps && (p.re - self.x).abs() > margin && (p.re - self.y).abs() > margin)
            .count();
        hits as f64 / inner.len() as f64
    }

    pub fn points_f64(&self) -> Vec<Complex<f64>> {
        self.points.iter().map(|p| Complex::new(p.re.as_f64(), p.im.as_f64())).collect()
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
