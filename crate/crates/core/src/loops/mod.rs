//! The random-walk loop measure on a finite domain: total masses, masses of
//! loops meeting given sets, escape probabilities, `Theta_A`, unrooted-loop
//! canonicalisation and enumeration, and the loop soup.

mod soup;

use crate::error::{Error, Result};
use crate::lattice::{GreenMatrix, LatticeDomain, LatticePoint, LatticeWalk};
use crate::lerw::SelfAvoidingExcursion;
use crate::linalg::{green_downdate, DenseMatrix};
use crate::scalar::Scalar;

pub use soup::{
    attach_loops, concatenated_loop_law, sample_loop_soup, LoopCatalog, LoopLawRow, LoopLawTable,
    LoopSoupSample, RootedLoopCatalog, SoupEntry, DEFAULT_L_MAX,
};

/// Total mass of unrooted loops in `A`: `-log det(I - Q_A)`.
pub fn loop_measure_total<T: Scalar>(domain: &LatticeDomain) -> Result<T> {
    Ok(-GreenMatrix::<T>::new(domain)?.log_det())
}

/// Truncated series `sum_{n <= L} tr(Q^n)/n` with a certified bound on the rest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopSeries<T> {
    pub partial_sum: T,
    pub tail_bound: T,
    pub max_length: usize,
    /// Upper bound on the spectral radius of `Q_A` used for the tail.
    pub spectral_bound: T,
}

/// Collatz-Wielandt upper bound on the spectral radius of a nonnegative matrix.
pub fn spectral_radius_bound<T: Scalar>(q: &DenseMatrix<T>) -> T {
    let n = q.rows();
    if n == 0 {
        return T::zero();
    }
    let mut v = vec![T::one(); n];
    for _ in 0..200 {
        let w = q.matvec(&v);
        let norm = w.iter().fold(T::zero(), |m, &x| m.max(x));
        if norm == T::zero() {
            return T::zero();
        }
        // Keep the vector strictly positive.
        let floor = norm * T::lit(1e-12);
        v = w.into_iter().map(|x| x.max(floor) / norm).collect();
    }
    let w = q.matvec(&v);
    w.iter().zip(&v).fold(T::zero(), |m, (&a, &b)| m.max(a / b))
}

pub fn loop_measure_series<T: Scalar>(domain: &LatticeDomain, max_length: usize) -> Result<LoopSeries<T>> {
    let q = crate::lattice::step_matrix::<T>(domain);
    let n = domain.len();
    let mut partial = T::zero();
    let mut power = DenseMatrix::<T>::identity(n);
    for k in 1..=max_length {
        power = power.matmul(&q);
        partial += power.trace() / T::from_count(k);
    }
    let rho = spectral_radius_bound(&q);
    let tail = if rho >= T::one() {
        T::infinity()
    } else {
        let l1 = T::from_count(max_length + 1);
        T::from_count(n) * rho.powi(max_length as i32 + 1) / (l1 * (T::one() - rho))
    };
    Ok(LoopSeries {
        partial_sum: partial,
        tail_bound: tail,
        max_length,
        spectral_bound: rho,
    })
}

fn require_subset(domain: &LatticeDomain, set: &[LatticePoint]) -> Result<()> {
    for &p in set {
        domain.require_interior(p)?;
    }
    Ok(())
}

/// `m*(A; S)`: mass of loops in `A` that visit `S`.
pub fn m_star<T: Scalar>(domain: &LatticeDomain, set: &[LatticePoint]) -> Result<T> {
    require_subset(domain, set)?;
    let whole = GreenMatrix::<T>::new(domain)?.log_det();
    let rest = GreenMatrix::<T>::new(&domain.without(set))?.log_det();
    Ok(rest - whole)
}

/// Mass of loops in `A` that visit both `V1` and `V2`.
pub fn m_two_sets<T: Scalar>(domain: &LatticeDomain, v1: &[LatticePoint], v2: &[LatticePoint]) -> Result<T> {
    require_subset(domain, v1)?;
    require_subset(domain, v2)?;
    let both: Vec<LatticePoint> = v1.iter().chain(v2).copied().collect();
    let total = |d: &LatticeDomain| -> Result<T> { Ok(-GreenMatrix::<T>::new(d)?.log_det()) };
    let m = total(domain)? - total(&domain.without(v1))? - total(&domain.without(v2))?
        + total(&domain.without(&both))?;
    Ok(m.max(T::zero()))
}

/// `q_A(z) = 1 / G_A(z, z)`.
pub fn escape_probability<T: Scalar>(domain: &LatticeDomain, z: LatticePoint) -> Result<T> {
    domain.require_interior(z)?;
    Ok(T::one() / GreenMatrix::<T>::new(domain)?.get(z, z)?)
}

/// `log Theta_A` of the points `inner`, removed in order from a Green's matrix
/// of `A`.
pub(crate) fn log_theta_from_green<T: Scalar>(green: &GreenMatrix<T>, inner: &[LatticePoint]) -> Result<T> {
    let mut g = green.matrix().clone();
    let mut log = T::zero();
    for &p in inner {
        let i = green.domain().require_interior(p)?;
        let pivot = green_downdate(&mut g, i);
        if pivot <= T::zero() {
            return Err(Error::NotSelfAvoiding(p));
        }
        log += pivot.ln();
    }
    Ok(log)
}

/// `log Theta_A(eta) = sum_j log G_{A_j}(eta_j, eta_j)` with `A_j = A minus {eta_1..eta_{j-1}}`.
pub fn log_theta<T: Scalar>(domain: &LatticeDomain, eta: &SelfAvoidingExcursion) -> Result<T> {
    eta.check_in(domain)?;
    log_theta_from_green(&GreenMatrix::<T>::new(domain)?, eta.inner())
}

/// `Theta_A(eta)`, the reciprocal of the product of successive escape probabilities.
pub fn theta<T: Scalar>(domain: &LatticeDomain, eta: &SelfAvoidingExcursion) -> Result<T> {
    Ok(log_theta::<T>(domain, eta)?.exp())
}

/// An unrooted loop, stored as its lexicographically least rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnrootedLoop {
    /// `[w_0, ..., w_{n-1}]`; the closing point `w_n = w_0` is implicit.
    cycle: Vec<LatticePoint>,
    rotations: usize,
}

/// Smallest `p` with `s[i] = s[(i + p) mod n]` for all `i`.
fn cyclic_period<P: PartialEq>(s: &[P]) -> usize {
    let n = s.len();
    (1..=n)
        .find(|&p| n % p == 0 && (0..n).all(|i| s[i] == s[(i + p) % n]))
        .unwrap_or(n)
}

fn least_rotation(s: &[LatticePoint]) -> usize {
    let n = s.len();
    (0..n)
        .min_by(|&a, &b| {
            for k in 0..n {
                let c = s[(a + k) % n].cmp(&s[(b + k) % n]);
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
            std::cmp::Ordering::Equal
        })
        .unwrap_or(0)
}

impl UnrootedLoop {
    /// Canonicalises a rooted loop given as a closed walk.
    pub fn from_rooted(walk: &LatticeWalk) -> Result<Self> {
        let pts = walk.points();
        if walk.len() < 2 || walk.start() != walk.end() {
            return Err(Error::InvalidWalk("a loop must be closed with positive length".into()));
        }
        Ok(Self::from_cycle(&pts[..pts.len() - 1]))
    }

    pub(crate) fn from_cycle(cycle: &[LatticePoint]) -> Self {
        let r = least_rotation(cycle);
        let n = cycle.len();
        let canonical: Vec<LatticePoint> = (0..n).map(|k| cycle[(r + k) % n]).collect();
        let rotations = cyclic_period(&canonical);
        Self {
            cycle: canonical,
            rotations,
        }
    }

    /// Number of steps `|omega|`.
    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }

    /// Number of distinct rooted loops in the class.
    pub fn rotations(&self) -> usize {
        self.rotations
    }

    pub fn cycle(&self) -> &[LatticePoint] {
        &self.cycle
    }

    /// Canonical rooted representative as a closed walk.
    pub fn representative(&self) -> LatticeWalk {
        self.rooted_at(0)
    }

    /// The rooted loop starting at position `k` of the canonical cycle.
    pub fn rooted_at(&self, k: usize) -> LatticeWalk {
        let n = self.cycle.len();
        LatticeWalk::from_trusted((0..=n).map(|j| self.cycle[(k + j) % n]).collect())
    }

    /// Loop-measure weight `(R / |omega|) 4^{-|omega|}`.
    pub fn weight<T: Scalar>(&self) -> T {
        T::from_count(self.rotations) / T::from_count(self.len()) * T::lit(0.25).powi(self.len() as i32)
    }

    pub fn visits(&self, p: LatticePoint) -> bool {
        self.cycle.contains(&p)
    }
}

/// All unrooted loops in `A` with `|omega| <= max_length`, in canonical order.
///
/// Fails with [`Error::Budget`] once more than `budget` rooted walks have been
/// explored.
pub fn enumerate_unrooted_loops(
    domain: &LatticeDomain,
    max_length: usize,
    budget: usize,
) -> Result<Vec<UnrootedLoop>> {
    let mut out = Vec::new();
    let mut explored = 0usize;
    for &root in domain.interior() {
        let mut path = vec![root];
        dfs_loops(domain, root, max_length, budget, &mut explored, &mut path, &mut out)?;
    }
    Ok(out)
}

fn dfs_loops(
    domain: &LatticeDomain,
    root: LatticePoint,
    max_length: usize,
    budget: usize,
    explored: &mut usize,
    path: &mut Vec<LatticePoint>,
    out: &mut Vec<UnrootedLoop>,
) -> Result<()> {
    *explored += 1;
    if *explored > budget {
        return Err(Error::Budget {
            what: "loop enumeration",
            limit: budget,
        });
    }
    let here = *path.last().expect("nonempty");
    let steps = path.len() - 1;
    for next in domain.interior_neighbors(here) {
        // The least rotation starts at the least point.
        if next < root {
            continue;
        }
        let taken = steps + 1;
        if next == root {
            if least_rotation(path) == 0 {
                out.push(UnrootedLoop {
                    rotations: cyclic_period(path),
                    cycle: path.clone(),
                });
            }
        }
        if taken as i64 + next.manhattan(root) > max_length as i64 {
            continue;
        }
        path.push(next);
        dfs_loops(domain, root, max_length, budget, explored, path, out)?;
        path.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: i64, y: i64) -> LatticePoint {
        LatticePoint::new(x, y)
    }

    fn pair() -> LatticeDomain {
        LatticeDomain::new([p(0, 0), p(1, 0)])
    }

    #[test]
    fn totals_for_tiny_domains() {
        let one = LatticeDomain::new([p(0, 0)]);
        assert_eq!(loop_measure_total::<f64>(&one).unwrap(), 0.0);
        let m: f64 = loop_measure_total(&pair()).unwrap();
        assert!((m + (15.0f64 / 16.0).ln()).abs() < 1e-15);
        let series: f64 = (1..60).map(|n| 16f64.powi(-n) / n as f64).sum();
        assert!((m - series).abs() < 1e-15);
    }

    #[test]
    fn series_agrees_within_tail() {
        let a = LatticeDomain::rectangle(0, 2, 0, 3);
        let exact: f64 = loop_measure_total(&a).unwrap();
        for l in [4, 10, 30] {
            let s = loop_measure_series::<f64>(&a, l).unwrap();
            let gap = exact - s.partial_sum;
            assert!(gap >= -1e-14 && gap <= s.tail_bound + 1e-14, "L={l} gap={gap} tail={}", s.tail_bound);
        }
    }

    #[test]
    fn spectral_bound_of_the_pair_is_a_quarter() {
        let q = crate::lattice::step_matrix::<f64>(&pair());
        let rho = spectral_radius_bound(&q);
        assert!((rho - 0.25).abs() < 1e-12);
    }

    #[test]
    fn m_star_edge_cases() {
        let a = pair();
        assert_eq!(m_star::<f64>(&a, &[]).unwrap(), 0.0);
        let all: f64 = m_star(&a, a.interior()).unwrap();
        assert!((all - loop_measure_total::<f64>(&a).unwrap()).abs() < 1e-15);
        let one: f64 = m_star(&a, &[p(0, 0)]).unwrap();
        assert!((one + (15.0f64 / 16.0).ln()).abs() < 1e-15);
        assert!(m_star::<f64>(&a, &[p(5, 5)]).is_err());
    }

    #[test]
    fn m_two_sets_collapses_on_equal_sets() {
        let a = LatticeDomain::rectangle(0, 2, 0, 2);
        let s = [p(1, 1), p(0, 1)];
        let two: f64 = m_two_sets(&a, &s, &s).unwrap();
        let star: f64 = m_star(&a, &s).unwrap();
        assert!((two - star).abs() < 1e-13);
    }

    #[test]
    fn escape_probabilities() {
        assert_eq!(escape_probability::<f64>(&LatticeDomain::new([p(0, 0)]), p(0, 0)).unwrap(), 1.0);
        let q: f64 = escape_probability(&pair(), p(0, 0)).unwrap();
        assert!((q - 15.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_rotation_and_period() {
        let w = LatticeWalk::new(vec![p(1, 0), p(0, 0), p(1, 0)]).unwrap();
        let l = UnrootedLoop::from_rooted(&w).unwrap();
        assert_eq!(l.cycle(), &[p(0, 0), p(1, 0)]);
        assert_eq!(l.rotations(), 2);
        assert!((l.weight::<f64>() - 1.0 / 16.0).abs() < 1e-16);

        let bounce_twice = LatticeWalk::new(vec![p(0, 0), p(1, 0), p(0, 0), p(1, 0), p(0, 0)]).unwrap();
        let l2 = UnrootedLoop::from_rooted(&bounce_twice).unwrap();
        assert_eq!(l2.len(), 4);
        assert_eq!(l2.rotations(), 2);
        assert_eq!(l2.len() % l2.rotations(), 0);
    }

    #[test]
    fn enumeration_reproduces_the_series() {
        let a = LatticeDomain::rectangle(0, 1, 0, 2);
        let l = 10;
        let loops = enumerate_unrooted_loops(&a, l, 10_000_000).unwrap();
        let total: f64 = loops.iter().map(|u| u.weight::<f64>()).sum();
        let series = loop_measure_series::<f64>(&a, l).unwrap();
        assert!((total - series.partial_sum).abs() < 1e-14);
        for u in &loops {
            assert_eq!(u.len() % u.rotations(), 0);
            assert_eq!(&UnrootedLoop::from_cycle(u.cycle()), u);
        }
    }

    #[test]
    fn enumeration_budget_is_reported() {
        let a = LatticeDomain::rectangle(0, 2, 0, 2);
        assert!(matches!(
            enumerate_unrooted_loops(&a, 12, 100),
            Err(Error::Budget { .. })
        ));
    }
}
