//! Closed-form continuum quantities: the parameter family, the two-path
//! partition function `phi_b`, Cardy's formula, excursion Poisson kernels and
//! the scaling limit of the two-path Fomin determinant.

mod special;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use special::{gamma, gauss_sum, hyp2f1, hyp2f1_series, hyp2f1_shifted, ln_gamma, SeriesValue, HYP2F1_TERM_CAP};

/// The linked parameters `a = 2/kappa = (2b+1)/3`,
/// `lambda = (3a-1)(4a-3)/(2a)`, `c = -2 lambda`, `d = 1 + 1/(4a)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBundle<T = f64> {
    pub kappa: T,
    pub a: T,
    pub b: T,
    pub lambda: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> ParamBundle<T> {
    fn from_a_unchecked(a: T) -> Self {
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let four = T::lit(4.0);
        let lambda = (three * a - one) * (four * a - three) / (two * a);
        Self {
            kappa: two / a,
            a,
            b: (three * a - one) / two,
            lambda,
            c: -two * lambda,
            d: one + one / (four * a),
        }
    }

    /// Requires `0 < kappa <= 4`.
    pub fn from_kappa(kappa: T) -> Result<Self> {
        if !(kappa > T::zero() && kappa <= T::lit(4.0)) {
            return Err(Error::OutOfRange {
                what: "kappa",
                value: kappa.as_f64(),
                range: "(0, 4]",
            });
        }
        let mut p = Self::from_a_unchecked(T::lit(2.0) / kappa);
        p.kappa = kappa;
        Ok(p)
    }

    /// Requires `b >= 1/4`.
    pub fn from_b(b: T) -> Result<Self> {
        if !(b >= T::lit(0.25)) || !b.is_finite() {
            return Err(Error::OutOfRange {
                what: "b",
                value: b.as_f64(),
                range: "[1/4, inf)",
            });
        }
        let mut p = Self::from_a_unchecked((T::lit(2.0) * b + T::one()) / T::lit(3.0));
        p.b = b;
        Ok(p)
    }

    /// Requires `a >= 1/2`.
    pub fn from_a(a: T) -> Result<Self> {
        if !(a >= T::lit(0.5)) || !a.is_finite() {
            return Err(Error::OutOfRange {
                what: "a",
                value: a.as_f64(),
                range: "[1/2, inf)",
            });
        }
        Ok(Self::from_a_unchecked(a))
    }

    /// Largest violation of the defining relations.
    pub fn consistency_error(&self) -> T {
        let one = T::one();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let four = T::lit(4.0);
        [
            self.a - two / self.kappa,
            self.a - (two * self.b + one) / three,
            self.lambda - (three * self.a - one) * (four * self.a - three) / (two * self.a),
            self.c + two * self.lambda,
            self.d - one - one / (four * self.a),
        ]
        .iter()
        .fold(T::zero(), |m, e| m.max(e.abs()))
    }
}

fn a_of_b<T: Scalar>(b: T) -> T {
    (T::lit(2.0) * b + T::one()) / T::lit(3.0)
}

fn require_unit<T: Scalar>(u: T) -> Result<()> {
    if !(u >= T::zero() && u <= T::one()) {
        return Err(Error::OutOfRange {
            what: "u",
            value: u.as_f64(),
            range: "[0, 1]",
        });
    }
    Ok(())
}

fn require_b<T: Scalar>(b: T) -> Result<()> {
    if !(b >= T::zero()) || !b.is_finite() {
        return Err(Error::OutOfRange {
            what: "b",
            value: b.as_f64(),
            range: "[0, inf)",
        });
    }
    Ok(())
}

/// `Gamma(2a)Gamma(6a-1) / (Gamma(4a)Gamma(4a-1))`, the reciprocal of `F(2a, 1-2a; 4a; 1)`.
pub fn phi_normalization<T: Scalar>(a: T) -> T {
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let six = T::lit(6.0);
    let one = T::one();
    (ln_gamma(two * a) + ln_gamma(six * a - one) - ln_gamma(four * a) - ln_gamma(four * a - one)).exp()
}

/// `phi_b` with its first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiJet<T> {
    pub value: T,
    pub first: T,
    pub second: T,
}

const SERIES_TOL: f64 = 1e-15;

/// `phi_b(u), phi_b'(u), phi_b''(u)` by termwise differentiation of
/// `C u^a F(2a, 1-2a; 4a; u)`.
pub fn phi_jet<T: Scalar>(b: T, u: T) -> Result<PhiJet<T>> {
    require_b(b)?;
    require_unit(u)?;
    let a = a_of_b(b);
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let norm = phi_normalization(a);
    if u == T::one() {
        // Value only at the endpoint.
        let f = hyp2f1(two * a, T::one() - two * a, four * a, u)?;
        return Ok(PhiJet {
            value: norm * f,
            first: T::nan(),
            second: T::nan(),
        });
    }
    let s = hyp2f1_shifted(two * a, T::one() - two * a, four * a, u, a, T::lit(SERIES_TOL))?;
    Ok(PhiJet {
        value: norm * s.value,
        first: norm * s.first,
        second: norm * s.second,
    })
}

/// `phi_b(u) = C u^a F(2a, 1-2a; 4a; u)`, `a = (2b+1)/3`.
pub fn phi<T: Scalar>(b: T, u: T) -> Result<T> {
    Ok(phi_jet(b, u)?.value)
}

/// Residual of `u^2(1-u)^2 phi'' + 2u(a - u + (1-a)u^2) phi' - a(3a-1)(1-u)^2 phi`.
pub fn phi_ode_residual<T: Scalar>(b: T, u: T) -> Result<T> {
    let j = phi_jet(b, u)?;
    let a = a_of_b(b);
    let one = T::one();
    let w = one - u;
    Ok(u * u * w * w * j.second + T::lit(2.0) * u * (a - u + (one - a) * u * u) * j.first
        - a * (T::lit(3.0) * a - one) * w * w * j.value)
}

fn require_ordered<T: Scalar>(xs: &[T], what: &str) -> Result<()> {
    if xs.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(Error::Ordering(format!("{what} must be strictly increasing")))
    }
}

/// `H*(x, y) = phi_b(x/y) / (y - x)^{2b}` for `0 < x < y`.
pub fn h_star<T: Scalar>(b: T, x: T, y: T) -> Result<T> {
    require_ordered(&[T::zero(), x, y], "0 < x < y")?;
    Ok(phi(b, x / y)? / (y - x).powf(T::lit(2.0) * b))
}

/// The cross-ratio `q = (y1-x1)(y2-x2) / ((y1-x2)(y2-x1))`; `y1 = +inf` is
/// taken as the limit `(y2-x2)/(y2-x1)`.
pub fn cross_ratio<T: Scalar>(x1: T, x2: T, y2: T, y1: T) -> Result<T> {
    require_ordered(&[x1, x2, y2], "x1 < x2 < y2")?;
    if y1.is_infinite() && y1 > T::zero() {
        return Ok((y2 - x2) / (y2 - x1));
    }
    require_ordered(&[y2, y1], "y2 < y1")?;
    Ok((y1 - x1) * (y2 - x2) / ((y1 - x2) * (y2 - x1)))
}

/// `H~_{b,2} = phi_b(1 - q)` for `x1 < x2 < y2 < y1`.
pub fn htilde2<T: Scalar>(b: T, x1: T, x2: T, y2: T, y1: T) -> Result<T> {
    let q = cross_ratio(x1, x2, y2, y1)?;
    phi(b, T::one() - q)
}

/// Cardy's formula, `phi_0`.
pub fn cardy<T: Scalar>(u: T) -> Result<T> {
    phi(T::zero(), u)
}

/// The boundary pair of an excursion Poisson kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    HalfPlane,
    UnitDisk,
}

const ON_CIRCLE_TOL: f64 = 1e-10;

/// `H_{dH}(x, y) = 1/(pi (y-x)^2)` or `H_{dD}(x, y) = 1/(pi |y-x|^2)`.
pub fn excursion_poisson_kernel<T: Scalar>(spec: KernelSpec, x: Complex<T>, y: Complex<T>) -> Result<T> {
    match spec {
        KernelSpec::HalfPlane => {
            if x.im != T::zero() || y.im != T::zero() {
                return Err(Error::OutOfRange {
                    what: "imaginary part of a half-plane boundary point",
                    value: x.im.abs().max(y.im.abs()).as_f64(),
                    range: "{0}",
                });
            }
        }
        KernelSpec::UnitDisk => {
            for z in [x, y] {
                if (z.norm() - T::one()).abs() > T::lit(ON_CIRCLE_TOL) {
                    return Err(Error::OutOfRange {
                        what: "modulus of a disk boundary point",
                        value: z.norm().as_f64(),
                        range: "{1}",
                    });
                }
            }
        }
    }
    let d2 = (y - x).norm_sqr();
    if d2 == T::zero() {
        return Err(Error::CoincidentPoints(crate::lattice::LatticePoint::ORIGIN));
    }
    Ok(T::one() / (T::PI() * d2))
}

/// Disk kernel in angles, `1 / (2 pi (1 - cos(theta1 - theta2)))`.
pub fn disk_kernel_angles<T: Scalar>(theta1: T, theta2: T) -> T {
    T::one() / (T::TAU() * (T::one() - (theta1 - theta2).cos()))
}

/// The Cayley-type map `f(z) = (iz + 1)/(z + i)` from `H` onto the unit disk.
pub fn half_plane_to_disk<T: Scalar>(z: T) -> Complex<T> {
    if z.is_infinite() {
        return Complex::new(T::zero(), T::one());
    }
    let i = Complex::new(T::zero(), T::one());
    let zc = Complex::new(z, T::zero());
    (i * zc + T::one()) / (zc + i)
}

/// `|f'(x)| = 2 / (x^2 + 1)` for real `x`.
pub fn half_plane_to_disk_derivative<T: Scalar>(x: T) -> T {
    T::lit(2.0) / (x * x + T::one())
}

/// Ratio `det[H_{dD}(f(u), f(v))] / (H_{dD}(f(0), f(inf)) H_{dD}(f(x), f(y)))`
/// for sources `(0, x)` and targets `(inf, y)`.
pub fn scalefomin_rhs<T: Scalar>(x: T, y: T) -> Result<T> {
    require_ordered(&[T::zero(), x, y], "0 < x < y")?;
    let f0 = half_plane_to_disk(T::zero());
    let fx = half_plane_to_disk(x);
    let fy = half_plane_to_disk(y);
    let finf = half_plane_to_disk(T::infinity());
    let h = |p, q| excursion_poisson_kernel(KernelSpec::UnitDisk, p, q);
    let diag = h(f0, finf)? * h(fx, fy)?;
    let off = h(f0, fy)? * h(fx, finf)?;
    Ok((diag - off) / diag)
}

/// A row of the special-case table: polynomial closed forms of `phi_b`.
#[derive(Clone, Copy, Debug)]
pub struct TableRow {
    pub a: f64,
    pub b: f64,
    pub kappa: f64,
    pub formula: &'static str,
    pub closed_form: fn(f64) -> f64,
}

pub fn table_rows() -> [TableRow; 4] {
    [
        TableRow {
            a: 2.0,
            b: 2.5,
            kappa: 1.0,
            formula: "u^2 (6 - 9u + 5u^2 - u^3)",
            closed_form: |u| u * u * (6.0 - 9.0 * u + 5.0 * u * u - u * u * u),
        },
        TableRow {
            a: 1.5,
            b: 1.75,
            kappa: 4.0 / 3.0,
            formula: "u^(3/2) (7/2 - 7u/2 + u^2)",
            closed_form: |u| u.powf(1.5) * (3.5 - 3.5 * u + u * u),
        },
        TableRow {
            a: 1.0,
            b: 1.0,
            kappa: 2.0,
            formula: "u (2 - u)",
            closed_form: |u| u * (2.0 - u),
        },
        TableRow {
            a: 0.5,
            b: 0.25,
            kappa: 4.0,
            formula: "u^(1/2)",
            closed_form: |u| u.sqrt(),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_examples() {
        let k2 = ParamBundle::from_kappa(2.0f64).unwrap();
        assert!((k2.b - 1.0).abs() < 1e-15 && (k2.a - 1.0).abs() < 1e-15);
        let k4 = ParamBundle::from_kappa(4.0f64).unwrap();
        assert!((k4.b - 0.25).abs() < 1e-15);
        let k83 = ParamBundle::from_kappa(8.0f64 / 3.0).unwrap();
        assert!(k83.lambda.abs() < 1e-15);
        for kappa in [0.5f64, 1.0, 2.0, 8.0 / 3.0, 4.0] {
            let p = ParamBundle::from_kappa(kappa).unwrap();
            assert!(p.consistency_error() < 1e-12);
            let back = ParamBundle::from_b(p.b).unwrap();
            assert!((back.kappa - kappa).abs() < 1e-12);
            assert!(p.lambda >= -0.5 - 1e-12);
        }
        assert!(ParamBundle::from_kappa(5.0f64).is_err());
        assert!(ParamBundle::from_b(0.1f64).is_err());
        assert!(ParamBundle::from_a(0.4f64).is_err());
    }

    #[test]
    fn phi_spot_values() {
        assert!((phi(1.0f64, 0.3).unwrap() - 0.51).abs() < 1e-14);
        assert!((phi(0.25f64, 0.49).unwrap() - 0.7).abs() < 1e-14);
        assert_eq!(phi(1.0f64, 0.0).unwrap(), 0.0);
        assert!((phi(1.0f64, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(phi(1.0f64, 1.5).is_err());
    }

    #[test]
    fn table_rows_match_the_series() {
        for row in table_rows() {
            for k in 1..=9 {
                let u = k as f64 / 10.0;
                let series = phi(row.b, u).unwrap();
                assert!((series - (row.closed_form)(u)).abs() < 1e-10, "b={} u={u}", row.b);
            }
            assert!((ParamBundle::from_b(row.b).unwrap().kappa - row.kappa).abs() < 1e-12);
        }
    }

    #[test]
    fn ode_residual_is_small() {
        for b in [0.25f64, 1.0, 1.75, 2.5, 0.6] {
            for k in 1..=99 {
                let u = k as f64 / 100.0;
                let r = phi_ode_residual(b, u).unwrap();
                assert!(r.abs() < 1e-8, "b={b} u={u} r={r}");
            }
        }
    }

    #[test]
    fn phi_is_increasing() {
        for b in [0.0f64, 0.25, 1.0, 2.5] {
            let vals: Vec<f64> = (0..=50).map(|k| phi(b, k as f64 / 50.0).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] > w[0]), "b={b}");
        }
    }

    #[test]
    fn cardy_symmetry() {
        assert!((cardy(0.5f64).unwrap() - 0.5).abs() < 1e-10);
        assert!((cardy(1.0f64).unwrap() - 1.0).abs() < 1e-12);
        for k in 1..10 {
            let u = k as f64 / 10.0;
            let s = cardy(u).unwrap() + cardy(1.0 - u).unwrap();
            assert!((s - 1.0).abs() < 1e-10, "u={u}");
        }
    }

    #[test]
    fn cross_ratio_and_large_y_limit() {
        let q = cross_ratio(0.0f64, 0.3, 1.0, f64::INFINITY).unwrap();
        assert!((q - 0.7).abs() < 1e-15);
        assert!(htilde2(1.0f64, 0.0, 0.5, 2.0, 3.0).unwrap() <= 1.0);
        assert!(htilde2(1.0f64, 0.0, 2.0, 0.5, 3.0).is_err());
        let (b, x) = (1.75f64, 0.8);
        let a = (2.0 * b + 1.0) / 3.0;
        let y: f64 = 1e7;
        let lhs = y.powf(a + 2.0 * b) * h_star(b, x, y).unwrap();
        let rhs = phi_normalization(a) * x.powf(a);
        assert!((lhs - rhs).abs() < 1e-5 * rhs);
    }

    #[test]
    fn poisson_kernels() {
        let c = |x: f64, y: f64| Complex::new(x, y);
        let pi = std::f64::consts::PI;
        let d = excursion_poisson_kernel(KernelSpec::UnitDisk, c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert!((d - 1.0 / (4.0 * pi)).abs() < 1e-15);
        let h = excursion_poisson_kernel(KernelSpec::HalfPlane, c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((h - 1.0 / pi).abs() < 1e-15);
        let (t1, t2) = (0.4f64, 2.1f64);
        let e = excursion_poisson_kernel(KernelSpec::UnitDisk, c(t1.cos(), t1.sin()), c(t2.cos(), t2.sin())).unwrap();
        assert!((e - disk_kernel_angles(t1, t2)).abs() < 1e-13);
        assert!(excursion_poisson_kernel(KernelSpec::HalfPlane, c(0.0, 1.0), c(1.0, 0.0)).is_err());
        assert!(excursion_poisson_kernel(KernelSpec::UnitDisk, c(0.5, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn conformal_covariance_of_the_kernel() {
        for &(x, y) in &[(0.3f64, 1.7f64), (-2.0, 0.5), (1.0, 9.0)] {
            let h = excursion_poisson_kernel(KernelSpec::HalfPlane, Complex::new(x, 0.0), Complex::new(y, 0.0)).unwrap();
            let d = excursion_poisson_kernel(KernelSpec::UnitDisk, half_plane_to_disk(x), half_plane_to_disk(y)).unwrap();
            let mapped = half_plane_to_disk_derivative(x) * half_plane_to_disk_derivative(y) * d;
            assert!((h - mapped).abs() < 1e-12 * h);
        }
    }

    #[test]
    fn determinant_ratio_is_phi_one() {
        assert!((scalefomin_rhs(0.5f64, 1.0).unwrap() - 0.75).abs() < 1e-12);
        for k in 1..100 {
            let x = k as f64 / 100.0;
            let r = scalefomin_rhs(x, 1.0).unwrap();
            assert!((r - x * (2.0 - x)).abs() < 1e-12);
            assert!((scalefomin_rhs(3.0 * x, 3.0).unwrap() - r).abs() < 1e-12);
        }
    }
}
