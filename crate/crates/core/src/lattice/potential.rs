//! Potential kernel `a(z)` of simple random walk on the square lattice.
//!
//! Inside the exact region every value has the form `p + q/pi` with `p` an
//! integer and `q` rational. Those coefficients are produced by an exact
//! integer recursion outward from the diagonal and only then rounded, because
//! the same recursion in floating point loses all accuracy within a few dozen
//! columns. Outside the region the expansion `(2/pi) log|z| + C` is used with
//! the `|z|^-2` correction dropped; its size there is below `1/(6 pi R^2)`,
//! about `3.2e-6` at the default radius.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::LatticePoint;
use crate::linalg::least_squares;
use crate::scalar::Scalar;

/// Default radius of the exact region (max-norm).
pub const EXACT_RADIUS: usize = 128;

/// Inner radius of the annulus used to fit the constant `C`.
const FIT_INNER_RADIUS: f64 = 64.0;

#[derive(Clone, Debug)]
pub struct PotentialKernel {
    radius: usize,
    /// First-octant values `0 <= y <= x <= radius`, index `x(x+1)/2 + y`.
    octant: Vec<f64>,
    constant: f64,
}

fn octant_index(x: usize, y: usize) -> usize {
    x * (x + 1) / 2 + y
}

impl PotentialKernel {
    /// The shared kernel with the default exact radius.
    pub fn global() -> &'static PotentialKernel {
        static KERNEL: OnceLock<PotentialKernel> = OnceLock::new();
        KERNEL.get_or_init(|| PotentialKernel::new(EXACT_RADIUS))
    }

    pub fn new(radius: usize) -> Self {
        assert!(radius >= 2, "exact region must contain the first two columns");
        let exact = ExactOctant::compute(radius);
        let octant = exact.to_f64();
        let constant = fit_constant(&octant, radius);
        Self {
            radius,
            octant,
            constant,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// The fitted constant `C` in `a(z) = (2/pi) log|z| + C + O(|z|^-2)`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Exact-region value, if `p` lies inside it.
    pub fn exact(&self, p: LatticePoint) -> Option<f64> {
        let (mut x, mut y) = (p.x.unsigned_abs() as usize, p.y.unsigned_abs() as usize);
        if y > x {
            std::mem::swap(&mut x, &mut y);
        }
        (x <= self.radius).then(|| self.octant[octant_index(x, y)])
    }

    pub fn asymptotic(&self, p: LatticePoint) -> f64 {
        let r = ((p.x as f64).powi(2) + (p.y as f64).powi(2)).sqrt();
        std::f64::consts::FRAC_2_PI * r.ln() + self.constant
    }

    pub fn value(&self, p: LatticePoint) -> f64 {
        self.exact(p).unwrap_or_else(|| self.asymptotic(p))
    }
}

/// `a(p)` from the shared kernel.
pub fn potential_kernel<T: Scalar>(p: LatticePoint) -> T {
    T::lit(PotentialKernel::global().value(p))
}

/// Octant values as `int_part + (scaled_pi_part / denom) / pi`.
struct ExactOctant {
    int_part: Vec<BigInt>,
    scaled_pi_part: Vec<BigInt>,
    denom: BigInt,
}

impl ExactOctant {
    fn compute(radius: usize) -> Self {
        // Common denominator of the diagonal sums 4 * sum 1/(2k-1).
        let mut denom = BigInt::one();
        for k in 1..=radius {
            denom = denom.lcm(&BigInt::from(2 * k - 1));
        }
        let size = octant_index(radius, radius) + 1;
        let mut int_part = vec![BigInt::zero(); size];
        let mut pi_part = vec![BigInt::zero(); size];

        let mut diag = BigInt::zero();
        let mut diagonal = |n: usize| -> BigInt {
            diag += &denom * 4 / BigInt::from(2 * n - 1);
            diag.clone()
        };

        // a(1,0) = 1, a(1,1) = 4/pi.
        int_part[octant_index(1, 0)] = BigInt::one();
        pi_part[octant_index(1, 1)] = diagonal(1);

        let get = |v: &[BigInt], x: i64, y: i64| -> BigInt {
            let (mut x, mut y) = (x.unsigned_abs() as usize, y.unsigned_abs() as usize);
            if y > x {
                std::mem::swap(&mut x, &mut y);
            }
            v[octant_index(x, y)].clone()
        };

        for n in 1..radius {
            let ni = n as i64;
            // Harmonicity at (n, y) for y < n determines a(n + 1, y).
            for y in 0..n {
                let yi = y as i64;
                for v in [&mut int_part, &mut pi_part] {
                    let next = get(v, ni, yi) * 4
                        - get(v, ni - 1, yi)
                        - get(v, ni, yi + 1)
                        - get(v, ni, yi - 1);
                    v[octant_index(n + 1, y)] = next;
                }
            }
            // Harmonicity at (n, n) with the reflection symmetry.
            for v in [&mut int_part, &mut pi_part] {
                let next = get(v, ni, ni) * 2 - get(v, ni, ni - 1);
                v[octant_index(n + 1, n)] = next;
            }
            pi_part[octant_index(n + 1, n + 1)] = diagonal(n + 1);
        }

        Self {
            int_part,
            scaled_pi_part: pi_part,
            denom,
        }
    }

    fn to_f64(&self) -> Vec<f64> {
        let max_bits = self
            .scaled_pi_part
            .iter()
            .chain(self.int_part.iter())
            .map(|v| v.bits())
            .max()
            .unwrap_or(0);
        let frac_bits = max_bits + 128;
        let pi = pi_fixed(frac_bits);
        let inv_pi = (BigInt::one() << (2 * frac_bits)) / &pi;
        let out_bits: u64 = 62;
        self.int_part
            .iter()
            .zip(&self.scaled_pi_part)
            .map(|(p, q)| {
                let fixed = (p << frac_bits) + (q * &inv_pi) / &self.denom;
                let shifted: BigInt = fixed >> (frac_bits - out_bits);
                let sign = if shifted.is_negative() { -1.0 } else { 1.0 };
                let mag = shifted.abs().to_u128().expect("potential kernel value overflow");
                sign * (mag as f64) / (1u64 << out_bits) as f64
            })
            .collect()
    }
}

/// `floor(pi * 2^bits)` from Machin's formula.
fn pi_fixed(bits: u64) -> BigInt {
    let guard = 32;
    let one = BigInt::one() << (bits + guard);
    let atan_inv = |x: u64| -> BigInt {
        let x = BigInt::from(x);
        let x2 = &x * &x;
        let mut power = &one / &x;
        let mut sum = BigInt::zero();
        let mut k: u64 = 0;
        while !power.is_zero() {
            let term = &power / BigInt::from(2 * k + 1);
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            power /= &x2;
            k += 1;
        }
        sum
    };
    let pi = atan_inv(5) * 16 - atan_inv(239) * 4;
    pi >> guard
}

/// Fits `a(z) - (2/pi) log|z|` on the annulus `64 <= |z| <= radius` against
/// the constant plus the first two correction orders.
fn fit_constant(octant: &[f64], radius: usize) -> f64 {
    let r0 = FIT_INNER_RADIUS.min(radius as f64 / 2.0);
    let mut design = Vec::new();
    let mut target = Vec::new();
    for x in 1..=radius {
        for y in 0..=x {
            let (xf, yf) = (x as f64, y as f64);
            let r = xf.hypot(yf);
            if r < r0 || r > radius as f64 {
                continue;
            }
            let theta = yf.atan2(xf);
            let s2 = (r0 / r).powi(2);
            let s4 = s2 * s2;
            design.push(vec![1.0, (4.0 * theta).cos() * s2, (4.0 * theta).cos() * s4, (8.0 * theta).cos() * s4]);
            target.push(octant[octant_index(x, y)] - std::f64::consts::FRAC_2_PI * r.ln());
        }
    }
    least_squares(&design, &target).expect("well-posed fit")[0]
}
