use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::slit_map;
use crate::error::{Error, Result};
use crate::partition::{phi_jet, ParamBundle};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum KappaRhoTarget<T> {
    /// Force point at a finite target `y`.
    Finite(T),
    /// Target at infinity with the marked point `x1` pushed by `a/(V - U)`.
    Infinity { x1: T },
}

/// Driving path `W` (or `U`) together with its force point `X` (or `V`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoPath<T> {
    pub a: T,
    pub b: T,
    pub times: Vec<T>,
    pub driving: Vec<T>,
    pub force: Vec<T>,
    /// Capacity time of the collision `X = W`, if reached before the horizon.
    pub lifetime: Option<T>,
}

impl<T: Scalar> RhoPath<T> {
    pub fn final_gap(&self) -> T {
        *self.force.last().unwrap() - *self.driving.last().unwrap()
    }

    /// Writes `t,driving,force` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,driving,force\n");
        for ((t, w), x) in self.times.iter().zip(&self.driving).zip(&self.force) {
            out.push_str(&format!("{:e},{:e},{:e}\n", t.as_f64(), w.as_f64(), x.as_f64()));
        }
        out
    }
}

fn positive<T: Scalar>(what: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value: v.as_f64(),
            range: "(0, inf)",
        })
    }
}

/// Step size: `dt`, shrunk to `(gap/4)^2` near a collision and clipped to the horizon.
fn step<T: Scalar>(dt: T, gap: T, left: T) -> T {
    dt.min((gap / T::lit(4.0)).powi(2)).min(left)
}

/// `dW = 2b/(X - W) dt + dB`, `dX = a/(X - W) dt` from `W_0 = x0`, `X_0 = y`
/// with explicit `a` and `b`. Stops at the horizon or when `|X - W|` drops
/// below `1e-6 |y - x0|`, which is recorded as the lifetime.
pub fn kappa_rho_finite<T: Scalar, R: Rng + ?Sized>(
    a: T,
    b: T,
    x0: T,
    y: T,
    t_max: T,
    dt: T,
    rng: &mut R,
) -> Result<RhoPath<T>> {
    positive("a", a)?;
    positive("dt", dt)?;
    if x0 == y {
        return Err(Error::OutOfRange {
            what: "y - x0",
            value: 0.0,
            range: "nonzero",
        });
    }
    let sign = (y - x0).signum();
    let stop = T::lit(1e-6) * (y - x0).abs();
    let (mut w, mut x, mut t) = (x0, y, T::zero());
    let mut path = RhoPath {
        a,
        b,
        times: vec![t],
        driving: vec![w],
        force: vec![x],
        lifetime: None,
    };
    while t < t_max {
        let g = x - w;
        if g * sign <= stop {
            path.lifetime = Some(t);
            break;
        }
        let h = step(dt, g.abs(), t_max - t);
        w += T::lit(2.0) * b / g * h + h.sqrt() * T::sample_standard_normal(rng);
        x += a / g * h;
        t += h;
        path.times.push(t);
        path.driving.push(w);
        path.force.push(x);
    }
    if path.lifetime.is_none() && (x - w) * sign <= stop {
        path.lifetime = Some(t);
    }
    Ok(path)
}

/// SLE(kappa, rho) driving toward a finite target `y`, or toward infinity with
/// the marked point `x1`, for `kappa` in `(0, 4]`.
pub fn sle_kappa_rho<T: Scalar, R: Rng + ?Sized>(
    kappa: T,
    x0: T,
    target: KappaRhoTarget<T>,
    t_max: T,
    dt: T,
    rng: &mut R,
) -> Result<RhoPath<T>> {
    let p = ParamBundle::from_kappa(kappa)?;
    match target {
        KappaRhoTarget::Finite(y) => kappa_rho_finite(p.a, p.b, x0, y, t_max, dt, rng),
        KappaRhoTarget::Infinity { x1 } => {
            positive("dt", dt)?;
            if x0 == x1 {
                return Err(Error::OutOfRange {
                    what: "x1 - x0",
                    value: 0.0,
                    range: "nonzero",
                });
            }
            let (mut u, mut v, mut t) = (x0, x1, T::zero());
            let mut path = RhoPath {
                a: p.a,
                b: p.b,
                times: vec![t],
                driving: vec![u],
                force: vec![v],
                lifetime: None,
            };
            while t < t_max {
                let z = u - v;
                let h = step(dt, z.abs(), t_max - t);
                u += p.a / z * h + h.sqrt() * T::sample_standard_normal(rng);
                v -= p.a / z * h;
                t += h;
                path.times.push(t);
                path.driving.push(u);
                path.force.push(v);
                if (u - v) * (x0 - x1) <= T::zero() {
                    path.lifetime = Some(t);
                    break;
                }
            }
            Ok(path)
        }
    }
}

/// Two driving functions growing simultaneously under
/// `dU^j = 2a/(U^j - U^{3-j}) dt + dB^j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPathRun<T> {
    pub a: T,
    pub times: Vec<T>,
    pub u1: Vec<T>,
    pub u2: Vec<T>,
    /// Set when the driving values crossed, which signals a too coarse step.
    pub collided: bool,
}

impl<T: Scalar> TwoPathRun<T> {
    /// `g_t(z)` under the flow `a/(g - U^1) + a/(g - U^2)`, split per step into
    /// the two one-point slit maps.
    pub fn map_point(&self, z: Complex<T>) -> Complex<T> {
        let mut w = z;
        for k in 1..self.times.len() {
            let h = self.times[k] - self.times[k - 1];
            w = slit_map(w, self.u1[k], self.a, h);
            w = slit_map(w, self.u2[k], self.a, h);
        }
        w
    }

    /// Mean of `(g_t(z) - z) z` over a half circle of radius `r`.
    pub fn far_field_capacity(&self, r: T, samples: usize) -> T {
        let mut acc = T::zero();
        for k in 0..samples {
            let theta = T::PI() * (T::from_count(k) + T::lit(0.5)) / T::from_count(samples);
            let z = Complex::from_polar(r, theta);
            acc += ((self.map_point(z) - z) * z).re;
        }
        acc / T::from_count(samples)
    }

    pub fn separation(&self) -> T {
        *self.u2.last().unwrap() - *self.u1.last().unwrap()
    }

    /// Writes `t,u1,u2` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u1,u2\n");
        for k in 0..self.times.len() {
            out.push_str(&format!(
                "{:e},{:e},{:e}\n",
                self.times[k].as_f64(),
                self.u1[k].as_f64(),
                self.u2[k].as_f64()
            ));
        }
        out
    }
}

/// Simultaneous growth from `x0 < x1`. The first Brownian motion drives `U^1`.
pub fn two_path_simultaneous<T: Scalar, R: Rng + ?Sized>(
    kappa: T,
    x0: T,
    x1: T,
    t_max: T,
    dt: T,
    rng: &mut R,
) -> Result<TwoPathRun<T>> {
    let p = ParamBundle::from_kappa(kappa)?;
    positive("dt", dt)?;
    if !(x0 < x1) {
        return Err(Error::Ordering("x0 < x1".into()));
    }
    let a = p.a;
    let two_a = T::lit(2.0) * a;
    let (mut u1, mut u2, mut t) = (x0, x1, T::zero());
    let mut run = TwoPathRun {
        a,
        times: vec![t],
        u1: vec![u1],
        u2: vec![u2],
        collided: false,
    };
    while t < t_max {
        let d = u2 - u1;
        let h = step(dt, d, t_max - t);
        let sd = h.sqrt();
        let (b1, b2) = (T::sample_standard_normal(rng), T::sample_standard_normal(rng));
        u1 += -two_a / d * h + sd * b1;
        u2 += two_a / d * h + sd * b2;
        t += h;
        run.times.push(t);
        run.u1.push(u1);
        run.u2.push(u2);
        if u2 <= u1 {
            run.collided = true;
            break;
        }
    }
    Ok(run)
}

/// Drift `-(q/(x2 - x0)) [log phi_b]'(1 - q)` of the marginal driving function,
/// `q = (x2 - x1)/(x2 - x0)`. `x2 = inf` gives the limit `-a/(x1 - x0)`.
pub fn weighted_pair_drift<T: Scalar>(b: T, x0: T, x1: T, x2: T) -> Result<T> {
    if !(x0 < x1 && x1 < x2) {
        return Err(Error::Ordering("x0 < x1 < x2".into()));
    }
    let p = ParamBundle::from_b(b)?;
    if x2 == T::infinity() {
        return Ok(-p.a / (x1 - x0));
    }
    let q = (x2 - x1) / (x2 - x0);
    let j = phi_jet(b, T::one() - q)?;
    Ok(-(q / (x2 - x0)) * j.first / j.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::rng_from_seed;

    #[test]
    fn pair_drift_special_cases() {
        let (x0, x1, x2) = (0.0f64, 0.7, 2.0);
        let q = (x2 - x1) / (x2 - x0);
        let d1 = weighted_pair_drift(1.0, x0, x1, x2).unwrap();
        assert!((d1 + 2.0 / (x2 - x0) * q * q / (1.0 - q * q)).abs() < 1e-12);
        let d4 = weighted_pair_drift(0.25, x0, x1, x2).unwrap();
        assert!((d4 + q / (2.0 * (x2 - x0) * (1.0 - q))).abs() < 1e-12);
        for &b in &[0.25f64, 1.0, 1.75] {
            let a = (2.0 * b + 1.0) / 3.0;
            let far = weighted_pair_drift(b, 0.0, 1.0, 1e7).unwrap();
            assert!((far + a).abs() < 1e-5, "b={b} far={far}");
            assert_eq!(weighted_pair_drift(b, 0.0, 1.0, f64::INFINITY).unwrap(), -a);
        }
        assert!(weighted_pair_drift(1.0, 0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn finite_target_collides() {
        let mut rng = rng_from_seed(11);
        let p = sle_kappa_rho(2.0f64, 0.0, KappaRhoTarget::Finite(1.0), 100.0, 1e-3, &mut rng).unwrap();
        assert!(p.lifetime.is_some());
        assert!(p.final_gap() <= 1e-6);
    }

    #[test]
    fn zero_b_is_plain_brownian_motion() {
        let mut r1 = rng_from_seed(5);
        let mut r2 = rng_from_seed(5);
        let p = kappa_rho_finite(1.0f64, 0.0, 0.0, 5.0, 0.1, 1e-3, &mut r1).unwrap();
        let mut w = 0.0;
        for k in 1..p.times.len() {
            let h: f64 = p.times[k] - p.times[k - 1];
            w += h.sqrt() * f64::sample_standard_normal(&mut r2);
            assert!((p.driving[k] - w).abs() < 1e-12);
        }
    }

    #[test]
    fn two_paths_repel_and_record_capacity() {
        let run = two_path_simultaneous(2.0f64, 0.0, 1.0, 0.5, 1e-3, &mut rng_from_seed(2)).unwrap();
        assert!(!run.collided);
        let cap = run.far_field_capacity(1e3, 64);
        assert!((cap - 2.0 * 0.5).abs() < 1e-2, "cap={cap}");
        assert!(two_path_simultaneous(2.0f64, 1.0, 0.0, 0.5, 1e-3, &mut rng_from_seed(2)).is_err());
    }
}
