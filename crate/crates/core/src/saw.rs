//! The lambda-SAW measure `exp{-r|omega| + lambda m*(A; omega)}` on
//! self-avoiding excursions: weights, total masses, k-tuples and
//! exploratory critical-`r` scans.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GreenMatrix, LatticeDomain, LatticePoint};
use crate::lerw::{default_len_cap, enumerate_saes, fold_saes, SelfAvoidingExcursion, DEFAULT_ENUMERATION_BUDGET};
use crate::linalg::least_squares;
use crate::loops::m_star;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SawParams {
    pub r: f64,
    pub lambda: f64,
}

impl SawParams {
    pub fn new(r: f64, lambda: f64) -> Self {
        Self { r, lambda }
    }

    /// `lambda = 1`, `e^{-r} = 1/4`: the loop-erased walk point.
    pub fn loop_erased() -> Self {
        Self::new(4f64.ln(), 1.0)
    }
}

/// `exp{-r|omega| + lambda m*(A; omega)}`.
pub fn saw_weight<T: Scalar>(domain: &LatticeDomain, omega: &SelfAvoidingExcursion, params: SawParams) -> Result<T> {
    omega.check_in(domain)?;
    let m: T = m_star(domain, omega.inner())?;
    Ok((T::lit(-params.r) * T::from_count(omega.len()) + T::lit(params.lambda) * m).exp())
}

/// Per-length sums `S_n = sum_{|omega| = n} exp{lambda m*(A; omega)}`, from
/// which the total mass at any `r` is `sum_n e^{-rn} S_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthProfile<T> {
    pub lambda: f64,
    pub sums: Vec<T>,
    pub paths: usize,
}

impl<T: Scalar> LengthProfile<T> {
    pub fn mass(&self, r: f64) -> T {
        self.sums
            .iter()
            .enumerate()
            .map(|(n, &s)| (T::lit(-r) * T::from_count(n)).exp() * s)
            .sum()
    }

    pub fn log_mass(&self, r: f64) -> T {
        self.mass(r).ln()
    }

    pub fn shortest(&self) -> Option<usize> {
        self.sums.iter().position(|&s| s > T::zero())
    }
}

pub fn length_profile<T: Scalar>(
    domain: &LatticeDomain,
    z: LatticePoint,
    w: LatticePoint,
    lambda: f64,
    budget: usize,
) -> Result<LengthProfile<T>> {
    let green = GreenMatrix::<T>::new(domain)?;
    let cap = default_len_cap(domain);
    let lam = T::lit(lambda);
    let (sums, paths) = fold_saes(
        &green,
        z,
        w,
        cap,
        budget,
        || (vec![T::zero(); cap + 1], 0usize),
        |acc, leaf| {
            acc.0[leaf.points.len() - 1] += (lam * leaf.log_theta).exp();
            acc.1 += 1;
        },
        |mut a, b| {
            for (x, y) in a.0.iter_mut().zip(b.0) {
                *x += y;
            }
            a.1 += b.1;
            a
        },
    )?;
    Ok(LengthProfile { lambda, sums, paths })
}

/// Sum of [`saw_weight`] over every self-avoiding excursion from `z` to `w`.
pub fn total_mass<T: Scalar>(domain: &LatticeDomain, z: LatticePoint, w: LatticePoint, params: SawParams) -> Result<T> {
    Ok(length_profile::<T>(domain, z, w, params.lambda, DEFAULT_ENUMERATION_BUDGET)?.mass(params.r))
}

/// Mass of `k`-tuples of mutually disjoint self-avoiding excursions,
/// `sum exp{-r sum|omega_j| + lambda m*(A; union omega_j)}`.
pub fn k_tuple_mass<T: Scalar>(
    domain: &LatticeDomain,
    pairs: &[(LatticePoint, LatticePoint)],
    params: SawParams,
    budget: usize,
) -> Result<T> {
    if pairs.is_empty() {
        return Err(Error::ArityMismatch { sources: 0, targets: 0 });
    }
    if pairs.len() == 1 {
        return total_mass(domain, pairs[0].0, pairs[0].1, params);
    }
    let mut lists = Vec::with_capacity(pairs.len());
    for &(z, w) in pairs {
        lists.push(enumerate_saes(domain, z, w, default_len_cap(domain), budget)?);
    }
    let base = GreenMatrix::<T>::new(domain)?.log_det();
    let mut cache: HashMap<Vec<usize>, T> = HashMap::new();
    let mut chosen: Vec<&SelfAvoidingExcursion> = Vec::with_capacity(pairs.len());
    let mut used = vec![false; domain.len()];
    let mut visited = 0usize;
    let mut total = T::zero();
    let ctx = TupleCtx {
        domain,
        lists: &lists,
        params,
        base,
        budget,
    };
    ctx.recurse(0, &mut chosen, &mut used, &mut cache, &mut visited, &mut total)?;
    Ok(total)
}

struct TupleCtx<'a, T> {
    domain: &'a LatticeDomain,
    lists: &'a [Vec<SelfAvoidingExcursion>],
    params: SawParams,
    base: T,
    budget: usize,
}

impl<'a, T: Scalar> TupleCtx<'a, T> {
    fn recurse(
        &self,
        depth: usize,
        chosen: &mut Vec<&'a SelfAvoidingExcursion>,
        used: &mut [bool],
        cache: &mut HashMap<Vec<usize>, T>,
        visited: &mut usize,
        total: &mut T,
    ) -> Result<()> {
        if depth == self.lists.len() {
            *visited += 1;
            if *visited > self.budget {
                return Err(Error::Budget {
                    what: "k-tuple enumeration",
                    limit: self.budget,
                });
            }
            let key: Vec<usize> = (0..used.len()).filter(|&i| used[i]).collect();
            let m = match cache.get(&key) {
                Some(&m) => m,
                None => {
                    let removed: Vec<LatticePoint> = key.iter().map(|&i| self.domain.interior()[i]).collect();
                    let rest = GreenMatrix::<T>::new(&self.domain.without(&removed))?.log_det();
                    let m = rest - self.base;
                    cache.insert(key, m);
                    m
                }
            };
            let steps: usize = chosen.iter().map(|e| e.len()).sum();
            *total += (T::lit(-self.params.r) * T::from_count(steps) + T::lit(self.params.lambda) * m).exp();
            return Ok(());
        }
        for eta in &self.lists[depth] {
            let idx: Vec<usize> = eta
                .inner()
                .iter()
                .map(|p| self.domain.index_of(*p).expect("interior"))
                .collect();
            if idx.iter().any(|&i| used[i]) {
                continue;
            }
            for &i in &idx {
                used[i] = true;
            }
            chosen.push(eta);
            let r = self.recurse(depth + 1, chosen, used, cache, visited, total);
            chosen.pop();
            for &i in &idx {
                used[i] = false;
            }
            r?;
        }
        Ok(())
    }
}

/// The scan domain of width `n`: `{0..n} x {1..n}` with excursions from `0` to `n`.
pub fn scan_domain(n: usize) -> (LatticeDomain, LatticePoint, LatticePoint) {
    let n = n as i64;
    (
        LatticeDomain::rectangle(0, n, 1, n),
        LatticePoint::new(0, 0),
        LatticePoint::new(n, 0),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub lambda: f64,
    pub r: f64,
    pub n: usize,
    pub log_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalScan {
    pub lambda: f64,
    pub widths: Vec<usize>,
    pub rows: Vec<ScanRow>,
    /// Fitted exponential growth rate of the mass in the width, per grid value of `r`.
    pub slopes: Vec<(f64, f64)>,
    /// Grid neighbours between which the slope changes sign.
    pub bracket: Option<(f64, f64)>,
    /// Linear interpolation of the zero crossing.
    pub r_star: Option<f64>,
}

impl CriticalScan {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,r,N,log_mass\n");
        for row in &self.rows {
            let _ = writeln!(out, "{},{},{},{:.15e}", row.lambda, row.r, row.n, row.log_mass);
        }
        out
    }
}

/// Growth rate of `log M(N)` in `N`: a fit of `c + sN - 2b log N` when at
/// least four widths are available, otherwise a straight-line fit.
fn growth_rate(widths: &[usize], log_mass: &[f64]) -> f64 {
    let design: Vec<Vec<f64>> = widths
        .iter()
        .map(|&n| {
            let nf = n as f64;
            if widths.len() >= 4 {
                vec![1.0, nf, nf.ln()]
            } else {
                vec![1.0, nf]
            }
        })
        .collect();
    least_squares(&design, log_mass).map(|b| b[1]).unwrap_or(f64::NAN)
}

/// Exploratory scan of the total mass over widths and a grid of `r`.
pub fn critical_r_scan(lambda: f64, widths: &[usize], r_grid: &[f64], budget: usize) -> Result<CriticalScan> {
    let mut profiles = Vec::with_capacity(widths.len());
    for &n in widths {
        let (domain, z, w) = scan_domain(n);
        profiles.push(length_profile::<f64>(&domain, z, w, lambda, budget)?);
    }
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for &r in r_grid {
        let logs: Vec<f64> = profiles.iter().map(|p| p.log_mass(r)).collect();
        for (&n, &lm) in widths.iter().zip(&logs) {
            rows.push(ScanRow {
                lambda,
                r,
                n,
                log_mass: lm,
            });
        }
        if widths.len() >= 2 {
            slopes.push((r, growth_rate(widths, &logs)));
        }
    }
    let crossing = slopes
        .windows(2)
        .find(|w| w[0].1 >= 0.0 && w[1].1 < 0.0 || w[0].1 <= 0.0 && w[1].1 > 0.0);
    let bracket = crossing.map(|w| (w[0].0, w[1].0));
    let r_star = crossing.map(|w| {
        let (r0, s0) = w[0];
        let (r1, s1) = w[1];
        if s1 == s0 {
            r0
        } else {
            r0 - s0 * (r1 - r0) / (s1 - s0)
        }
    });
    Ok(CriticalScan {
        lambda,
        widths: widths.to_vec(),
        rows,
        slopes,
        bracket,
        r_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::excursion_kernel;
    use crate::lerw::lerw_weight_exact;

    fn p(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    #[test]
    fn lambda_zero_and_trivial_paths() {
        let a = LatticeDomain::rectangle(0, 2, 0, 1);
        let etas = enumerate_saes(&a, p(-1, 0), p(3, 1), 20, 1_000_000).unwrap();
        for eta in &etas {
            let w: f64 = saw_weight(&a, eta, SawParams::new(0.7, 0.0)).unwrap();
            assert!((w - (-0.7 * eta.len() as f64).exp()).abs() < 1e-15);
        }
        let direct = enumerate_saes(&a, p(-1, 0), p(-1, 1), 1, 10).unwrap();
        assert_eq!(direct.len(), 1);
        let w: f64 = saw_weight(&a, &direct[0], SawParams::new(0.3, 5.0)).unwrap();
        assert!((w - (-0.3f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn loop_erased_point_matches_lerw() {
        let a = LatticeDomain::rectangle(0, 2, 0, 2);
        let (z, w) = (p(1, -1), p(3, 2));
        for eta in enumerate_saes(&a, z, w, 20, 1_000_000).unwrap() {
            let s: f64 = saw_weight(&a, &eta, SawParams::loop_erased()).unwrap();
            let l: f64 = lerw_weight_exact(&a, &eta).unwrap();
            assert!((s - l).abs() <= 1e-12 * l);
        }
        let total: f64 = total_mass(&a, z, w, SawParams::loop_erased()).unwrap();
        let h: f64 = excursion_kernel(&a, z, w).unwrap();
        assert!((total - h).abs() <= 1e-10 * h);
    }

    #[test]
    fn mass_is_log_convex_in_r_and_monotone_in_lambda() {
        let (a, z, w) = scan_domain(2);
        let prof = length_profile::<f64>(&a, z, w, 0.5, 1_000_000).unwrap();
        let rs: Vec<f64> = (0..20).map(|i| 0.5 + 0.1 * i as f64).collect();
        let lm: Vec<f64> = rs.iter().map(|&r| prof.log_mass(r)).collect();
        for k in 1..lm.len() - 1 {
            assert!(lm[k - 1] + lm[k + 1] - 2.0 * lm[k] >= -1e-12);
        }
        let lo: f64 = total_mass(&a, z, w, SawParams::new(1.0, 0.2)).unwrap();
        let hi: f64 = total_mass(&a, z, w, SawParams::new(1.0, 0.8)).unwrap();
        assert!(hi >= lo);
    }

    #[test]
    fn k_tuple_reduces_and_blocks() {
        let a = LatticeDomain::rectangle(0, 2, 0, 1);
        let params = SawParams::new(1.1, 0.6);
        let one: f64 = k_tuple_mass(&a, &[(p(-1, 0), p(3, 0))], params, 1_000_000).unwrap();
        let direct: f64 = total_mass(&a, p(-1, 0), p(3, 0), params).unwrap();
        assert_eq!(one, direct);
        // A one-wide corridor: the two crossings must share a point.
        let corridor = LatticeDomain::rectangle(0, 3, 0, 0);
        let blocked: f64 = k_tuple_mass(
            &corridor,
            &[(p(-1, 0), p(4, 0)), (p(1, 1), p(1, -1))],
            params,
            1_000_000,
        )
        .unwrap();
        assert_eq!(blocked, 0.0);
    }

    #[test]
    fn k_tuple_is_symmetric_under_reversal() {
        let a = LatticeDomain::rectangle(0, 2, 0, 2);
        let params = SawParams::new(1.2, 0.7);
        let fwd: f64 = k_tuple_mass(&a, &[(p(-1, 2), p(3, 2)), (p(-1, 0), p(3, 0))], params, 10_000_000).unwrap();
        let rev: f64 = k_tuple_mass(&a, &[(p(3, 2), p(-1, 2)), (p(3, 0), p(-1, 0))], params, 10_000_000).unwrap();
        assert!(fwd > 0.0);
        assert!((fwd - rev).abs() <= 1e-12 * fwd);
    }

    #[test]
    fn scan_brackets_a_sign_change() {
        let grid: Vec<f64> = (0..15).map(|i| 0.8 + 0.1 * i as f64).collect();
        let scan = critical_r_scan(1.0, &[2, 3, 4], &grid, 10_000_000).unwrap();
        let (lo, hi) = scan.bracket.unwrap();
        let s_lo = scan.slopes.iter().find(|s| s.0 == lo).unwrap().1;
        let s_hi = scan.slopes.iter().find(|s| s.0 == hi).unwrap().1;
        assert!(s_lo * s_hi <= 0.0);
        for w in scan.slopes.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
        assert!(scan.to_csv().starts_with("lambda,r,N,log_mass\n"));
    }
}
