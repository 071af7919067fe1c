//! Log-gamma and the Gauss hypergeometric series.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `log |Gamma(x)|` by the Lanczos approximation, with reflection below `1/2`.
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::PI();
        let s = (pi * x).sin().abs();
        return pi.ln() - s.ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_count(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::TAU()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// `Gamma(x)`, with the sign restored for negative non-integer arguments.
pub fn gamma<T: Scalar>(x: T) -> T {
    let mag = ln_gamma(x).exp();
    if x > T::zero() || (x.floor() / T::lit(2.0)).fract() == T::zero() {
        mag
    } else {
        -mag
    }
}

/// Maximal number of series terms before giving up.
pub const HYP2F1_TERM_CAP: usize = 5_000_000;

/// Partial sums of the hypergeometric series and its first two derivatives
/// after multiplication by `u^shift`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue<T> {
    pub value: T,
    pub first: T,
    pub second: T,
    pub terms: usize,
}

/// `sum_n c_n u^{n + shift}` with `c_n` the coefficients of `F(alpha, beta; gamma; u)`,
/// together with its first two `u`-derivatives.
///
/// Stops when the next-term bound `|t_n| / (1 - max(u, r_n))` is below
/// `rel_tol` times the sum, or when the series terminates.
pub fn hyp2f1_shifted<T: Scalar>(alpha: T, beta: T, gamma: T, u: T, shift: T, rel_tol: T) -> Result<SeriesValue<T>> {
    if !(T::zero()..T::one()).contains(&u) {
        return Err(Error::OutOfRange {
            what: "series argument",
            value: u.as_f64(),
            range: "[0, 1)",
        });
    }
    let one = T::one();
    let two = T::lit(2.0);
    let mut coeff = one;
    let mut value = T::zero();
    let mut first = T::zero();
    let mut second = T::zero();
    for n in 0..HYP2F1_TERM_CAP {
        let nf = T::from_count(n);
        let e = nf + shift;
        let pow = if u == T::zero() {
            if e == T::zero() {
                one
            } else {
                T::zero()
            }
        } else {
            u.powf(e)
        };
        let term = coeff * pow;
        value += term;
        if u > T::zero() {
            first += coeff * e * u.powf(e - one);
            second += coeff * e * (e - one) * u.powf(e - two);
        }
        let ratio = (alpha + nf) * (beta + nf) / ((gamma + nf) * (nf + one));
        coeff *= ratio;
        if coeff == T::zero() || u == T::zero() {
            return Ok(SeriesValue {
                value,
                first,
                second,
                terms: n + 1,
            });
        }
        let r = (ratio * u).abs().max(u);
        if r < one {
            let next = (coeff * u.powf(e + one)).abs();
            let tail = next / (one - r);
            let scale = value.abs().max(first.abs()).max(second.abs()).max(T::min_positive_value());
            if n > 2 && tail * (e + two) * (e + two) <= rel_tol * scale {
                return Ok(SeriesValue {
                    value,
                    first,
                    second,
                    terms: n + 1,
                });
            }
        }
    }
    Err(Error::Convergence(format!(
        "hypergeometric series did not reach tolerance within {HYP2F1_TERM_CAP} terms at u = {}",
        u.as_f64()
    )))
}

/// Direct power series for `F(alpha, beta; gamma; u)`, `0 <= u < 1`.
pub fn hyp2f1_series<T: Scalar>(alpha: T, beta: T, gamma: T, u: T) -> Result<T> {
    Ok(hyp2f1_shifted(alpha, beta, gamma, u, T::zero(), T::lit(1e-14))?.value)
}

/// Gauss's closed form `F(alpha, beta; gamma; 1) = Gamma(g)Gamma(g-a-b) / (Gamma(g-a)Gamma(g-b))`.
pub fn gauss_sum<T: Scalar>(alpha: T, beta: T, gamma: T) -> Result<T> {
    let excess = gamma - alpha - beta;
    if excess <= T::zero() {
        return Err(Error::OutOfRange {
            what: "gamma - alpha - beta",
            value: excess.as_f64(),
            range: "(0, inf)",
        });
    }
    Ok(self::gamma(gamma) * self::gamma(excess) / (self::gamma(gamma - alpha) * self::gamma(gamma - beta)))
}

/// `F(alpha, beta; gamma; u)` on `[0, 1]`.
pub fn hyp2f1<T: Scalar>(alpha: T, beta: T, gamma: T, u: T) -> Result<T> {
    if u == T::one() {
        // A terminating series is a polynomial and can be summed directly.
        let terminating = [alpha, beta].iter().any(|&p| p <= T::zero() && p.fract() == T::zero());
        if terminating {
            let mut coeff = T::one();
            let mut sum = T::zero();
            for n in 0..HYP2F1_TERM_CAP {
                sum += coeff;
                let nf = T::from_count(n);
                coeff *= (alpha + nf) * (beta + nf) / ((gamma + nf) * (nf + T::one()));
                if coeff == T::zero() {
                    return Ok(sum);
                }
            }
        }
        return gauss_sum(alpha, beta, gamma);
    }
    hyp2f1_series(alpha, beta, gamma, u)
}
